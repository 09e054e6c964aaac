//! Numerically stable interval evaluation of w-functions for
//! interval costs with high-degree interiors.
//!
//! The coefficient pipeline of the finite-pole construction cancels
//! catastrophically once `degree x tau` grows, so the dispatch path
//! evaluates through the equivalent cross-correlation form
//! `w'(u) = lambda/(1-rho) E[c+(u+W)]` with the *closed* waiting density
//! (atom at 0 plus an exp-polynomial from the pole set). Interior
//! polynomials stay in the Chebyshev basis (Clenshaw); the only
//! quadrature is over `[0, tau]` and its error estimate is folded into
//! the returned intervals. Tails and indicator corrections are exact.

use num_complex::Complex64;

use crate::approx::{ChebPoly, IntervalCost};
use crate::error::WfError;
use crate::exppoly::{ExpPolyTerm, PiecewiseExpPoly};
use crate::numerics::quad::adaptive_gk;
use crate::numerics::{binomial, factorial, upper_incomplete_gamma_int, Interval};
use crate::service::{QueueSpec, ServiceModel};
use crate::waiting::pole_set;

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Closed stationary waiting density: atom `1-rho` at zero plus an
/// exp-polynomial continuous part reconstructed from the pole set.
#[derive(Debug, Clone)]
pub struct WaitingDensity {
    pub atom: f64,
    pub terms: Vec<ExpPolyTerm>,
}

impl WaitingDensity {
    pub fn for_spec(spec: &QueueSpec) -> Result<Self, WfError> {
        spec.stability_check()?;
        if matches!(spec.model, ServiceModel::Deterministic { .. }) {
            return Err(WfError::UnsupportedModel(
                "closed waiting density needs a finite pole set".into(),
            ));
        }
        let ps = pole_set(spec)?;
        let mut terms = Vec::new();
        for p in &ps.poles {
            let d = p.degree;
            for (j, w) in p.residues.iter().enumerate() {
                let sign = if (d - j) % 2 == 0 { 1.0 } else { -1.0 };
                terms.push(ExpPolyTerm::new(
                    w * cr(sign / factorial((d - 1 - j) as u32)),
                    (d - 1 - j) as u32,
                    -p.location,
                ));
            }
        }
        Ok(WaitingDensity { atom: 1.0 - spec.rho(), terms })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|x| x.eval(t).re).sum()
    }

    /// Exact `∫_lo^hi (t-u0)^m e^{-a(t-u0)} dens(t) dt` (`hi = None` is
    /// +infinity) for one exp-poly factor against the density.
    fn integrate_term(&self, g: &ExpPolyTerm, lo: f64, hi: Option<f64>) -> Complex64 {
        let mut acc = cr(0.0);
        for dt in &self.terms {
            // Align the density factor to the g-shift: t^r (density has
            // u0 = 0, small r) expands around u0.
            let r = dt.m;
            let b = g.a + dt.a;
            debug_assert!(b.re > 0.0, "divergent density integral");
            let efold = (-dt.a * g.u0).exp();
            for i in 0..=r {
                let m = g.m + i;
                let coef = binomial(r, i) * g.u0.powi((r - i) as i32);
                let v_lo = lo - g.u0;
                let g_lo = upper_incomplete_gamma_int(m, b * v_lo);
                let g_hi = match hi {
                    Some(h) => upper_incomplete_gamma_int(m, b * (h - g.u0)),
                    None => cr(0.0),
                };
                acc += g.kappa * dt.kappa * cr(coef) * efold * (g_lo - g_hi) / b.powu(m + 1);
            }
        }
        acc
    }

    /// Exact expectation of an exp-polynomial over a range of the density
    /// (continuous part only; add the atom separately).
    pub fn integrate(&self, terms: &[ExpPolyTerm], lo: f64, hi: Option<f64>) -> f64 {
        let mut acc = cr(0.0);
        for g in terms {
            acc += self.integrate_term(g, lo, hi);
        }
        debug_assert!(acc.im.abs() < 1e-8 * (1.0 + acc.re.abs()), "imag {}", acc.im);
        acc.re
    }

    /// Mass of the continuous part on `[lo, hi)`.
    pub fn mass(&self, lo: f64, hi: Option<f64>) -> f64 {
        self.integrate(&[ExpPolyTerm::real(1.0, 0, 0.0)], lo, hi)
    }
}

/// Stable interval evaluator for a queue and an interval cost.
pub struct StableEvaluator {
    pub spec: QueueSpec,
    pub density: WaitingDensity,
    scale: f64,
    cost: IntervalCost,
    /// Antiderivative of the interior approximation, Chebyshev basis.
    interior_anti: ChebPoly,
    /// Antiderivatives of the tail envelopes (anchored at 0; differences
    /// from tau are what matters).
    tail_anti_lo: PiecewiseExpPoly,
    tail_anti_hi: PiecewiseExpPoly,
    quad_tol: f64,
}

impl StableEvaluator {
    pub fn new(spec: &QueueSpec, cost: IntervalCost) -> Result<Self, WfError> {
        let density = WaitingDensity::for_spec(spec)?;
        let rho = spec.rho();
        let interior_anti = cost.approx.cheb.antiderivative();
        // Anchor the tail antiderivatives at tau: anchoring at 0 would
        // evaluate incomplete gammas at -a tau and amplify e^{a tau}.
        let tail_anti = |terms: &[ExpPolyTerm]| -> Result<PiecewiseExpPoly, WfError> {
            Ok(PiecewiseExpPoly::from_pieces(vec![
                crate::exppoly::Piece { lo: 0.0, hi: Some(cost.tau), terms: vec![], constant: 0.0 },
                crate::exppoly::Piece { lo: cost.tau, hi: None, terms: terms.to_vec(), constant: 0.0 },
            ])?
            .antiderivative())
        };
        let tail_anti_lo = tail_anti(&cost.tail.lower)?;
        let tail_anti_hi = tail_anti(&cost.tail.upper)?;
        Ok(StableEvaluator {
            spec: *spec,
            density,
            scale: spec.lambda / (1.0 - rho),
            cost,
            interior_anti,
            tail_anti_lo,
            tail_anti_hi,
            quad_tol: 1e-11,
        })
    }

    pub fn tau(&self) -> f64 {
        self.cost.tau
    }

    /// `Ĉ(min(v, tau))`: antiderivative of the interior piece.
    fn c_interior(&self, v: f64) -> f64 {
        self.interior_anti.eval(v.min(self.cost.tau))
    }

    /// w of the interior mid cost `chat 1(0,tau)` plus a quadrature error
    /// bound: `scale [ atom Ĉτ(x) + ∫_0^τ (Ĉτ(x+t) - Ĉ(t)) dens(t) dt ]`
    /// (the integrand vanishes beyond `tau`).
    fn w_interior_mid(&self, x: f64) -> (f64, f64) {
        let tau = self.cost.tau;
        let f = |t: f64| (self.c_interior(x + t) - self.c_interior(t)) * self.density.eval(t);
        let split = (tau - x).clamp(0.0, tau);
        let (i1, e1) = adaptive_gk(&f, 0.0, split, self.quad_tol);
        let (i2, e2) = adaptive_gk(&f, split, tau, self.quad_tol);
        let val = self.scale * (self.density.atom * self.c_interior(x) + i1 + i2);
        (val, self.scale * 10.0 * (e1 + e2))
    }

    /// Exact w of the indicator `1[0, tau)`.
    pub fn w_indicator(&self, x: f64) -> f64 {
        let tau = self.cost.tau;
        // E[min(x+W, tau)] - E[min(W, tau)], against atom + density.
        let e_min = |x0: f64| -> f64 {
            // E[min(x0 + W, tau)]
            let split = (tau - x0).max(0.0);
            let lin = self.density.integrate(
                &[ExpPolyTerm::real(x0, 0, 0.0), ExpPolyTerm::real(1.0, 1, 0.0)],
                0.0,
                Some(split),
            );
            let cap = tau * self.density.mass(split, None);
            self.density.atom * (x0.min(tau)) + lin + cap
        };
        self.scale * (e_min(x) - e_min(0.0))
    }

    /// Exact w of a tail envelope `xi 1[tau, inf)` through its
    /// antiderivative `Xi`.
    fn w_tail(&self, x: f64, anti: &PiecewiseExpPoly) -> f64 {
        let tau = self.cost.tau;
        let cap = |v: f64| anti.eval_complex(v).re - anti.eval_complex(tau).re;
        // Xi(x+t) as exp-poly in t: each tail term integrates in its own
        // shifted basis; build the antiderivative's shifted representation
        // directly from `anti` terms with t-shift.
        let shift_terms = |f: &PiecewiseExpPoly, x0: f64| -> Vec<ExpPolyTerm> {
            let piece = f.pieces().last().unwrap();
            let mut out = Vec::new();
            for t in &piece.terms {
                // term kappa (v-u0)^m e^{-a(v-u0)} at v = x0 + t:
                // = kappa (t-(u0-x0))^m e^{-a(t-(u0-x0))}.
                out.push(ExpPolyTerm { u0: t.u0 - x0, ..*t });
            }
            out.push(ExpPolyTerm::real(piece.constant - cap_const(f, tau), 0, 0.0));
            out
        };
        fn cap_const(f: &PiecewiseExpPoly, tau: f64) -> f64 {
            f.eval_complex(tau).re
        }
        let e_tail = |x0: f64| -> f64 {
            let lo0 = (tau - x0).max(0.0);
            let atom_part = if x0 >= tau { self.density.atom * cap(x0) } else { 0.0 };
            let mut terms = shift_terms(anti, x0);
            let integral = self.density.integrate(&terms, lo0, None);
            terms.clear();
            atom_part + integral
        };
        self.scale * (e_tail(x) - e_tail(0.0))
    }

    /// Interval value of w at `x`, outward-rounded by the quadrature
    /// error.
    pub fn w_interval(&self, x: f64) -> Interval {
        let (mid, err) = self.w_interior_mid(x);
        let ind = self.w_indicator(x);
        let lo = mid - self.cost.eta_used * ind + self.w_tail(x, &self.tail_anti_lo);
        let hi = mid + self.cost.eta_used * ind + self.w_tail(x, &self.tail_anti_hi);
        Interval::new((lo - err).min(hi + err), (hi + err).max(lo - err))
    }

    /// Mean-cost interval `[cbar]`.
    pub fn cbar_interval(&self) -> Interval {
        let tau = self.cost.tau;
        let f = |t: f64| self.cost.approx.eval(t) * self.density.eval(t);
        let (mid_int, err) = adaptive_gk(&f, 0.0, tau, self.quad_tol);
        let mid = self.density.atom * self.cost.approx.eval(0.0) + mid_int;
        let ind_mass = self.density.atom + self.density.mass(0.0, Some(tau));
        let tail_lo = self.density.integrate(&self.cost.tail.lower, tau, None);
        let tail_hi = self.density.integrate(&self.cost.tail.upper, tau, None);
        let eta = self.cost.eta_used;
        let lo = mid - eta * ind_mass + tail_lo - 10.0 * err;
        let hi = mid + eta * ind_mass + tail_hi + 10.0 * err;
        Interval::new(lo.min(hi), hi.max(lo))
    }

    /// Admission-cost interval `[w](u+d) - [w](u) - lambda d/(1-rho) [cbar]`.
    pub fn admission_interval(&self, u: f64, d: f64) -> Interval {
        let wud = self.w_interval(u + d);
        let wu = self.w_interval(u);
        let cb = self.cbar_interval().scale(self.scale * d);
        wud.sub(&wu).sub(&cb)
    }

    /// Admission interval of the tail envelope alone (interior zero), the
    /// tail-cut criterion of the dispatching loop.
    pub fn tail_only_admission(&self, u: f64, d: f64) -> Interval {
        let w_lo = |x: f64| self.w_tail(x, &self.tail_anti_lo);
        let w_hi = |x: f64| self.w_tail(x, &self.tail_anti_hi);
        let cb_lo = self.density.integrate(&self.cost.tail.lower, self.cost.tau, None);
        let cb_hi = self.density.integrate(&self.cost.tail.upper, self.cost.tau, None);
        let lin = self.scale * d;
        let lo = w_lo(u + d) - w_hi(u) - lin * cb_hi;
        let hi = w_hi(u + d) - w_lo(u) - lin * cb_lo;
        Interval::new(lo.min(hi), hi.max(lo))
    }
}
