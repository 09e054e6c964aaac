//! Closed-form w-functions for exp-polynomial costs (the closed-form family),
//! linear composition, mean cost per job, relative value and admission
//! cost.

use num_complex::Complex64;

use crate::error::WfError;
use crate::exppoly::{ExpPolyTerm, PiecewiseExpPoly};
use crate::numerics::{factorial, upper_incomplete_gamma_int};
use crate::service::{QueueSpec, ServiceModel};
use crate::waiting::{dominant_pole, germ_at_point, germ_at_zero};

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// A w-function together with its derivative and the mean cost per job of
/// the generating cost function.
#[derive(Debug, Clone)]
pub struct WResult {
    pub w: PiecewiseExpPoly,
    pub wprime: PiecewiseExpPoly,
    pub mean_cost: Complex64,
    pub spec: QueueSpec,
}

impl WResult {
    pub fn scale(&self, k: Complex64) -> WResult {
        WResult {
            w: self.w.scale(k),
            wprime: self.wprime.scale(k),
            mean_cost: self.mean_cost * k,
            spec: self.spec,
        }
    }

    pub fn add(&self, other: &WResult) -> WResult {
        assert_eq!(self.spec, other.spec, "w-functions belong to different queues");
        WResult {
            w: self.w.add(&other.w),
            wprime: self.wprime.add(&other.wprime),
            mean_cost: self.mean_cost + other.mean_cost,
            spec: self.spec,
        }
    }

    /// `v(u) - v(0) = w(u) - lambda cbar u / (1 - rho)`.
    pub fn relative_value(&self, u: f64) -> f64 {
        let rho = self.spec.rho();
        let lin = self.spec.lambda * self.mean_cost.re / (1.0 - rho);
        self.w.eval(u) - lin * u
    }

    /// Admission cost `w(u+d) - w(u) - lambda cbar d / (1 - rho)`.
    pub fn admission_cost(&self, u: f64, d: f64) -> f64 {
        let rho = self.spec.rho();
        let lin = self.spec.lambda * self.mean_cost.re / (1.0 - rho);
        self.w.eval(u + d) - self.w.eval(u) - lin * d
    }
}

/// Closed-form w-function for the cost `u^n e^{-a u}` (`a = 0` gives the pure
/// monomial rows).
pub fn w_table1(spec: &QueueSpec, n: u32, a: Complex64) -> Result<WResult, WfError> {
    spec.stability_check()?;
    let pw = dominant_pole(spec)?;
    let term = ExpPolyTerm::new(cr(1.0), n, a);
    if !term.admissible(pw) {
        return Err(WfError::Admissibility(format!(
            "cost pole -a = {} lies right of -p_W = {}",
            -a, -pw
        )));
    }
    let rho = spec.rho();
    let scale = spec.lambda * factorial(n) / (1.0 - rho);
    let mut terms = Vec::with_capacity(n as usize + 1);
    let mean;
    if a.norm() == 0.0 {
        let germ = germ_at_zero(spec, n as usize)?;
        for k in 0..=n {
            terms.push(ExpPolyTerm::new(
                cr(scale * germ.coeff((n - k) as usize) / factorial(k)),
                k,
                cr(0.0),
            ));
        }
        mean = cr(factorial(n) * germ.coeff(n as usize));
    } else {
        let germ = germ_at_point(spec, a, n as usize)?;
        for k in 0..=n {
            terms.push(ExpPolyTerm::new(
                cr(scale) * germ.coeff((n - k) as usize) / factorial(k),
                k,
                a,
            ));
        }
        mean = factorial(n) * germ.coeff(n as usize);
    }
    let wprime = PiecewiseExpPoly::global(terms);
    let w = wprime.antiderivative();
    let mean_cost = mean_cost_with_setup(spec, mean, &w)?;
    Ok(WResult { w, wprime, mean_cost, spec: *spec })
}

/// w-function of a finite exp-polynomial cost by linearity.
pub fn w_for_exp_poly_cost(spec: &QueueSpec, cost: &[ExpPolyTerm]) -> Result<WResult, WfError> {
    spec.stability_check()?;
    let mut acc = WResult {
        w: PiecewiseExpPoly::zero(),
        wprime: PiecewiseExpPoly::zero(),
        mean_cost: cr(0.0),
        spec: *spec,
    };
    for t in cost {
        let single = w_table1(spec, t.m, t.a)?;
        acc = acc.add(&single.scale(t.kappa));
    }
    Ok(acc)
}

/// Stationary mean `E[c(W)]` of an exp-polynomial cost (the `(D, D)`
/// convention, no setup adjustment).
pub fn stationary_mean_cost(spec: &QueueSpec, cost: &[ExpPolyTerm]) -> Result<Complex64, WfError> {
    let mut acc = cr(0.0);
    for t in cost {
        let e = if t.a.norm() == 0.0 {
            cr(factorial(t.m) * germ_at_zero(spec, t.m as usize)?.coeff(t.m as usize))
        } else {
            factorial(t.m) * germ_at_point(spec, t.a, t.m as usize)?.coeff(t.m as usize)
        };
        acc += t.kappa * e;
    }
    Ok(acc)
}

/// Applies the setup-state correction to a stationary mean:
/// `cbar = [E[c(W)] + (1-rho)(E[w(D0)] - E[w(D)])] / (1 - rho + rho0)`,
/// collapsing to `E[c(W)]` when `D0 = D`. Cost jumps at 0 are handled by
/// the caller (exp-polynomial costs are continuous).
pub fn mean_cost_with_setup(
    spec: &QueueSpec,
    stationary_mean: Complex64,
    w: &PiecewiseExpPoly,
) -> Result<Complex64, WfError> {
    if !spec.has_setup() {
        return Ok(stationary_mean);
    }
    let (rho, rho0) = spec.utilization();
    let e_w_d0 = expectation_against_service(w, &spec.model0())?;
    let e_w_d = expectation_against_service(w, &spec.model)?;
    Ok((stationary_mean + (1.0 - rho) * (e_w_d0 - e_w_d)) / (1.0 - rho + rho0))
}

/// `E[f(D)]` for a piecewise exp-polynomial `f` against a service model.
pub fn expectation_against_service(
    f: &PiecewiseExpPoly,
    model: &ServiceModel,
) -> Result<Complex64, WfError> {
    match *model {
        ServiceModel::Deterministic { d } => Ok(f.eval_complex(d)),
        ServiceModel::Exponential { omega } => {
            expectation_against_density(f, cr(omega), 0, omega)
        }
        ServiceModel::Erlang { q, omega } => {
            let coef = omega.powi(q as i32) / factorial(q - 1);
            expectation_against_density(f, cr(coef), q - 1, omega)
        }
    }
}

/// Integrates `f(u) * c u^p e^{-omega u}` over `[0, inf)` piece by piece.
fn expectation_against_density(
    f: &PiecewiseExpPoly,
    c: Complex64,
    p: u32,
    omega: f64,
) -> Result<Complex64, WfError> {
    let mut acc = cr(0.0);
    for piece in f.pieces() {
        let lo = piece.lo;
        let hi = piece.hi;
        let mut local = piece.terms.clone();
        local.push(ExpPolyTerm::real(piece.constant, 0, 0.0));
        for t in local {
            if t.kappa.norm() == 0.0 {
                continue;
            }
            let b = t.a + omega;
            if b.re <= 0.0 {
                return Err(WfError::Domain(format!(
                    "expectation integral diverges: Re(a + omega) = {} <= 0",
                    b.re
                )));
            }
            // u^p = ((u - u0) + u0)^p expanded (p is the small density
            // exponent), so each term is kappa (u-u0)^{m+i} e^{-b(u-u0)}
            // times constants; integrate in v = u - u0 with the gamma rule
            // ∫ v^m e^{-b v} dv = [Γ(m+1, b v_lo) - Γ(m+1, b v_hi)]/b^{m+1}.
            let v_lo = lo - t.u0;
            let efold = (-Complex64::new(omega, 0.0) * t.u0).exp();
            for i in 0..=p {
                let m = t.m + i;
                let coef = crate::numerics::binomial(p, i) * t.u0.powi((p - i) as i32);
                let g_lo = upper_incomplete_gamma_int(m, b * v_lo);
                let g_hi = match hi {
                    Some(h) => upper_incomplete_gamma_int(m, b * (h - t.u0)),
                    None => cr(0.0),
                };
                acc += t.kappa * c * cr(coef) * efold * (g_lo - g_hi) / b.powu(m + 1);
            }
        }
    }
    Ok(acc)
}
