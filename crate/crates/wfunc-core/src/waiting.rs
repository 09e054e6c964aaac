//! Pollaczek-Khintchine waiting-time transform: values, germs at 0 and at
//! shifted points, dominant pole, and the full pole set with residue
//! coefficients for the finite-pole models.

use num_complex::Complex64;

use crate::error::WfError;
use crate::numerics::jet::{jet_of_exp_cs, jet_of_rational, Jet};
use crate::numerics::{erlang_scenario_counts, lambert_w_minus1, scenario_counts};
use crate::service::{QueueSpec, ServiceModel};

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `W*(s)` by the PK formula `(1-rho) s / (s - lambda (1 - D*(s)))`;
/// the removable singularity at `s = 0` evaluates to 1.
pub fn pk_lst(spec: &QueueSpec, s: Complex64) -> Result<Complex64, WfError> {
    spec.stability_check()?;
    if s.norm() == 0.0 {
        return Ok(cr(1.0));
    }
    let rho = spec.rho();
    let den = s - spec.lambda * (cr(1.0) - spec.model.lst(s)?);
    if den.norm() < 1e-12 * s.norm().max(1.0) {
        return Err(WfError::PoleEvaluation(format!("W* pole near s = {s}")));
    }
    Ok(cr(1.0 - rho) * s / den)
}

/// `W~*(s)` for the setup-state convention `(D, D0)`; collapses to
/// `pk_lst` when `D0 = D`.
pub fn true_lst(spec: &QueueSpec, s: Complex64) -> Result<Complex64, WfError> {
    spec.stability_check()?;
    if s.norm() == 0.0 {
        return Ok(cr(1.0));
    }
    let (rho, rho0) = spec.utilization();
    let d = spec.model.lst(s)?;
    let d0 = spec.model0().lst(s)?;
    let den = s - spec.lambda * (cr(1.0) - d);
    if den.norm() < 1e-12 * s.norm().max(1.0) {
        return Err(WfError::PoleEvaluation(format!("W~* pole near s = {s}")));
    }
    let num = s - spec.lambda * (d0 - d);
    Ok(cr((1.0 - rho) / (1.0 - rho + rho0)) * num / den)
}

/// Germ of `W*(-s)` at the origin: `y_k = E[W^k]/k!`.
#[derive(Debug, Clone)]
pub struct WtGerm {
    pub coeffs: Vec<f64>,
    pub spec: QueueSpec,
}

impl WtGerm {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Checks the asymptotic geometric ratio `y_{k+1}/y_k -> 1/|p_W|` over
    /// the last `window` stored ratios.
    pub fn ratio_consistent_with_pole(&self, window: usize, rel_tol: f64) -> Result<(), WfError> {
        let n = self.coeffs.len();
        if n < window + 2 {
            return Ok(());
        }
        let target = 1.0 / dominant_pole(&self.spec)?.abs();
        for k in (n - 1 - window)..(n - 1) {
            let ratio = self.coeffs[k + 1] / self.coeffs[k];
            if (ratio - target).abs() > rel_tol * target {
                return Err(WfError::Domain(format!(
                    "germ ratio {ratio} at k={k} deviates from 1/|p_W| = {target}"
                )));
            }
        }
        Ok(())
    }
}

/// Germ at the origin by the generic moment recursion
/// `y_k = lambda/(1-rho) * sum_{t<k} x_{k-t+1} y_t`, `y_0 = 1`.
pub fn germ_at_zero(spec: &QueueSpec, n: usize) -> Result<WtGerm, WfError> {
    spec.stability_check()?;
    let rho = spec.rho();
    let scale = spec.lambda / (1.0 - rho);
    let mut x = Vec::with_capacity(n + 2);
    for j in 0..=(n + 1) {
        x.push(spec.model.moment(j as u32) / crate::numerics::factorial(j as u32));
    }
    let mut y = vec![0.0f64; n + 1];
    y[0] = 1.0;
    for k in 1..=n {
        let mut acc = 0.0;
        for (t, yt) in y.iter().enumerate().take(k) {
            acc += x[k - t + 1] * yt;
        }
        y[k] = scale * acc;
    }
    Ok(WtGerm { coeffs: y, spec: *spec })
}

/// Closed-form germ specializations, used as independent oracles against
/// the generic recursion.
pub mod closed_germs {
    use super::*;

    /// Exponential: `y_k = lambda / (omega (omega-lambda)^k)`, k >= 1.
    pub fn exponential(lambda: f64, omega: f64, n: usize) -> Vec<f64> {
        let mut y = vec![1.0];
        for k in 1..=n {
            y.push(lambda / (omega * (omega - lambda).powi(k as i32)));
        }
        y
    }

    /// Deterministic: scenario-count series
    /// `y_k = d^k sum_{t=1}^{k} (lambda d/(1-lambda d))^t phi(t, k+t)/(k+t)!`,
    /// with early exit once a term falls below 1e-14 of the running sum.
    pub fn deterministic(lambda: f64, d: f64, n: usize) -> Result<Vec<f64>, WfError> {
        let rho = lambda * d;
        let table = scenario_counts(n.max(1), 2 * n.max(1))?;
        let r = rho / (1.0 - rho);
        let mut y = vec![1.0];
        for k in 1..=n {
            let mut acc = 0.0;
            let mut rp = 1.0;
            for t in 1..=k {
                rp *= r;
                let term = rp * table.phi_over_fact(t, k + t);
                acc += term;
                if term < 1e-14 * acc {
                    break;
                }
            }
            y.push(acc * d.powi(k as i32));
        }
        Ok(y)
    }

    /// Erlang: theta series `y_k = omega^{-k} sum_t (lambda/(omega-q lambda))^t theta^{(q)}(t, k+t)`.
    pub fn erlang(lambda: f64, q: u32, omega: f64, n: usize) -> Result<Vec<f64>, WfError> {
        let table = erlang_scenario_counts(q, n.max(1), 2 * n.max(1))?;
        let r = lambda / (omega - q as f64 * lambda);
        let mut y = vec![1.0];
        for k in 1..=n {
            let mut acc = 0.0;
            let mut rp = 1.0;
            for t in 1..=k {
                rp *= r;
                let term = rp * table.theta(t, k + t);
                acc += term;
                if term < 1e-14 * acc {
                    break;
                }
            }
            y.push(acc / omega.powi(k as i32));
        }
        Ok(y)
    }
}

/// Taylor coefficients of `W*(-s)` around `-a`:
/// `yhat_{a:k} = (-1)^k (d^k W*/ds^k)(a) / k!`, so that
/// `W*(sigma) = sum_k yhat_{a:k} (a - sigma)^k` near `sigma = a`.
#[derive(Debug, Clone)]
pub struct ShiftedWtGerm {
    pub point: Complex64,
    pub coeffs: Vec<Complex64>,
}

impl ShiftedWtGerm {
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_else(|| cr(0.0))
    }
}

/// Shifted germ by the shifted-coefficient recursion seeded with
/// `yhat_0 = W*(a)` (the normalization the recursion reproduces; validated
/// against jet differentiation in tests). Very small `|a|` switches to the
/// jet path: the recursion divides a cancellation-prone bracket by `a^2`.
pub fn germ_at_point(spec: &QueueSpec, a: Complex64, n: usize) -> Result<ShiftedWtGerm, WfError> {
    spec.stability_check()?;
    if a.norm() == 0.0 {
        return Err(WfError::Domain(
            "germ_at_point requires a != 0; use germ_at_zero at the origin".into(),
        ));
    }
    let pw = dominant_pole(spec)?.abs();
    if a.norm() < 0.05 * pw {
        // Recenter the origin germ: yhat_{a:j} = sum_k C(k,j) y_k (-a)^{k-j}.
        let extra = 60usize;
        let germ0 = germ_at_zero(spec, n + extra)?;
        let mut coeffs = vec![cr(0.0); n + 1];
        for (j, slot) in coeffs.iter_mut().enumerate() {
            let mut acc = cr(0.0);
            let mut binom = 1.0f64; // C(j, j)
            for k in j..=(n + extra) {
                if k > j {
                    binom *= k as f64 / (k - j) as f64;
                }
                let term = cr(binom * germ0.coeff(k)) * (-a).powu((k - j) as u32);
                acc += term;
                if k > j + 4 && term.norm() < 1e-16 * acc.norm() {
                    break;
                }
            }
            *slot = acc;
        }
        return Ok(ShiftedWtGerm { point: a, coeffs });
    }
    let rho = spec.rho();
    let wa = pk_lst(spec, a)?;
    let lambda = spec.lambda;
    let mut xs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        xs.push(spec.model.shifted_moment_coeff(a, k as u32)?);
    }
    let mut yhat = vec![cr(0.0); n + 1];
    yhat[0] = wa;
    if n >= 1 {
        let da = spec.model.lst(a)?;
        yhat[1] = cr(lambda / (1.0 - rho)) * (wa / a) * (wa / a) * (cr(1.0) - da - a * xs[1]);
    }
    for k in 2..=n {
        let mut acc = (cr(1.0) - lambda * xs[1]) / lambda * yhat[k - 1];
        for t in 0..=(k - 2) {
            acc -= xs[k - t] * yhat[t];
        }
        yhat[k] = cr(lambda / (1.0 - rho)) * wa / a * acc;
    }
    Ok(ShiftedWtGerm { point: a, coeffs: yhat })
}

/// Jet of `W*(-s)` at a regular point `s0` (including the removable origin).
pub fn wstar_neg_jet(spec: &QueueSpec, s0: Complex64, order: usize) -> Result<Jet, WfError> {
    spec.stability_check()?;
    let rho = spec.rho();
    let lambda = spec.lambda;
    // D*(-s) jet at s0.
    let dstar_neg = match spec.model {
        ServiceModel::Deterministic { d } => jet_of_exp_cs(cr(d), s0, order + 1),
        ServiceModel::Exponential { omega } => {
            jet_of_rational(&[cr(omega)], &[cr(omega), cr(-1.0)], s0, 0, order + 1)?
        }
        ServiceModel::Erlang { q, omega } => {
            let base = jet_of_rational(&[cr(omega)], &[cr(omega), cr(-1.0)], s0, 0, order + 1)?;
            let mut acc = Jet::constant(cr(1.0), order + 1);
            for _ in 0..q {
                acc = acc.mul(&base);
            }
            acc
        }
    };
    // num = (1-rho) s, den = s + lambda - lambda D*(-s), both as jets at s0.
    let s_jet = Jet::variable(s0, order + 1);
    let num = s_jet.scale(cr(1.0 - rho));
    let den = s_jet.add(&Jet::constant(cr(lambda), order + 1)).sub(&dstar_neg.scale(cr(lambda)));
    if s0.norm() == 0.0 {
        // Removable singularity: cancel one factor of s from both sides.
        let num = num.unshift_pow(1, 1e-9)?;
        let den = den.unshift_pow(1, 1e-9)?;
        return num.div(&den).map(|j| j.resized(order));
    }
    if den.coeff(0).norm() < 1e-10 {
        return Err(WfError::PoleEvaluation(format!("W*(-s) pole near s = {s0}")));
    }
    num.div(&den).map(|j| j.resized(order))
}

/// Dominant (rightmost) pole of `W*`, a simple real negative zero of
/// `s - lambda (1 - D*(s))`.
pub fn dominant_pole(spec: &QueueSpec) -> Result<f64, WfError> {
    spec.stability_check()?;
    let lambda = spec.lambda;
    match spec.model {
        ServiceModel::Exponential { omega } => Ok(lambda - omega),
        ServiceModel::Deterministic { d } => {
            let rho = lambda * d;
            let w = lambert_w_minus1(-rho * (-rho).exp())?;
            let p = lambda * (1.0 + w / rho);
            verify_denominator_zero(spec, p)?;
            Ok(p)
        }
        ServiceModel::Erlang { .. } => {
            let poles = pole_set(spec)?;
            let p = poles
                .poles
                .iter()
                .filter(|p| p.location.im.abs() < 1e-9)
                .map(|p| p.location.re)
                .fold(f64::NEG_INFINITY, f64::max);
            if !p.is_finite() {
                return Err(WfError::RootFinding(
                    "no real pole found for the Erlang denominator".into(),
                ));
            }
            verify_denominator_zero(spec, p)?;
            Ok(p)
        }
    }
}

fn verify_denominator_zero(spec: &QueueSpec, p: f64) -> Result<(), WfError> {
    let den = cr(p) - spec.lambda * (cr(1.0) - spec.model.lst(cr(p))?);
    if den.norm() > 1e-10 * p.abs().max(1.0) {
        return Err(WfError::RootFinding(format!(
            "pole candidate {p} leaves denominator residual {:.3e} (bracket: (-2 lambda/rho, 0))",
            den.norm()
        )));
    }
    Ok(())
}

/// One pole of `W*` with its degree and the leading residue coefficients
/// `varpi_{p:q} = (1/q!) lim_{s->-p} d^q/ds^q [(s+p)^degree W*(-s)]`.
#[derive(Debug, Clone)]
pub struct Pole {
    pub location: Complex64,
    pub degree: usize,
    pub residues: Vec<Complex64>,
}

/// Full pole set of `W*` for the finite-pole models.
#[derive(Debug, Clone)]
pub struct PoleSet {
    pub poles: Vec<Pole>,
}

/// Poles and residue coefficients for Exponential and Erlang service.
pub fn pole_set(spec: &QueueSpec) -> Result<PoleSet, WfError> {
    spec.stability_check()?;
    let lambda = spec.lambda;
    let (q, omega) = match spec.model {
        ServiceModel::Exponential { omega } => (1u32, omega),
        ServiceModel::Erlang { q, omega } => (q, omega),
        ServiceModel::Deterministic { .. } => {
            return Err(WfError::UnsupportedModel(
                "pole_set requires a finite pole set; use the M/D/1 piecewise path instead".into(),
            ))
        }
    };
    // Denominator of W*(s): s (s+omega)^q - lambda ((s+omega)^q - omega^q),
    // with the root s = 0 factored out.
    let mut poly = vec![cr(0.0); q as usize + 2];
    for j in 0..=q {
        let b = crate::numerics::binomial(q, j) * omega.powi((q - j) as i32);
        poly[j as usize + 1] += cr(b); // s (s+omega)^q
        poly[j as usize] -= cr(lambda * b); // -lambda (s+omega)^q
    }
    poly[0] += cr(lambda * omega.powi(q as i32));
    debug_assert!(poly[0].norm() < 1e-9);
    let reduced: Vec<Complex64> = poly[1..].to_vec();
    let mut roots = durand_kerner(&reduced)?;
    // Newton polish on the analytic denominator.
    for r in roots.iter_mut() {
        for _ in 0..40 {
            let f = *r - lambda * (cr(1.0) - spec.model.lst(*r)?);
            // d/ds [s - lambda(1 - D*(s))] = 1 + lambda D*'(s); for Erlang
            // D*'(s) = -q/omega * (omega/(s+omega))^{q+1}.
            let df =
                cr(1.0) - lambda * (q as f64) / omega * (cr(omega) / (*r + omega)).powu(q + 1);
            let step = f / df;
            *r -= step;
            if step.norm() < 1e-14 * r.norm().max(1.0) {
                break;
            }
        }
        // Snap near-real roots.
        if r.im.abs() < 1e-12 * r.re.abs().max(1.0) {
            *r = cr(r.re);
        }
    }
    for r in &roots {
        if r.re >= 0.0 {
            return Err(WfError::RootFinding(format!(
                "found a nonnegative-real-part pole {r} (expected all Re < 0)"
            )));
        }
    }
    // Cluster roots into multiplicity groups.
    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    'outer: for r in roots {
        for g in groups.iter_mut() {
            if (g.0 - r).norm() < 1e-7 * r.norm().max(1.0) {
                g.0 = (g.0 * g.1 as f64 + r) / (g.1 as f64 + 1.0);
                g.1 += 1;
                continue 'outer;
            }
        }
        groups.push((r, 1));
    }
    // Residue coefficients of W*(-s) at -p via rational jets:
    // W*(-s) = (1-rho) s (omega-s)^q / [s (omega-s)^q + lambda ((omega-s)^q - omega^q)].
    let rho = spec.rho();
    let mut num = vec![cr(0.0); q as usize + 2];
    let mut den = vec![cr(0.0); q as usize + 2];
    for j in 0..=q {
        let b = crate::numerics::binomial(q, j) * omega.powi((q - j) as i32) * (-1.0f64).powi(j as i32);
        num[j as usize + 1] += cr((1.0 - rho) * b);
        den[j as usize + 1] += cr(b);
        den[j as usize] += cr(lambda * b);
    }
    den[0] -= cr(lambda * omega.powi(q as i32));
    let mut poles = Vec::new();
    for (p, degree) in groups {
        let s0 = -p;
        let jet = jet_of_rational(&num, &den, s0, degree, degree - 1)?;
        poles.push(Pole { location: p, degree, residues: jet.coeffs().to_vec() });
    }
    poles.sort_by(|a, b| {
        b.location
            .re
            .partial_cmp(&a.location.re)
            .unwrap()
            .then(a.location.im.partial_cmp(&b.location.im).unwrap())
    });
    Ok(PoleSet { poles })
}

/// Durand-Kerner root finder for a complex-coefficient polynomial given in
/// ascending order; returns all roots.
fn durand_kerner(poly: &[Complex64]) -> Result<Vec<Complex64>, WfError> {
    let n = poly.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = poly[n];
    if lead.norm() == 0.0 {
        return Err(WfError::RootFinding("zero leading coefficient".into()));
    }
    let monic: Vec<Complex64> = poly.iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| {
        let mut acc = cr(0.0);
        for c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    // Standard seeding on a slightly irrational spiral.
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(0.4, 0.9).powu(k as u32 + 1))
        .collect();
    for _ in 0..200 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = cr(1.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                roots[i] += Complex64::new(1e-8, 1e-8);
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 {
            break;
        }
    }
    for r in &roots {
        if eval(*r).norm() > 1e-8 {
            return Err(WfError::RootFinding(format!(
                "Durand-Kerner failed to converge (residual {:.3e} at {r})",
                eval(*r).norm()
            )));
        }
    }
    Ok(roots)
}

/// M/M/1 waiting-time CDF `F_W(u) = 1 - (lambda/omega) e^{-(omega-lambda) u}`.
pub fn waiting_cdf_mm1(spec: &QueueSpec, u: f64) -> Result<f64, WfError> {
    spec.stability_check()?;
    let ServiceModel::Exponential { omega } = spec.model else {
        return Err(WfError::UnsupportedModel("waiting_cdf_mm1 requires exponential service".into()));
    };
    Ok(1.0 - spec.lambda / omega * (-(omega - spec.lambda) * u).exp())
}

/// Fixed-Talbot numerical inverse Laplace transform, used as an
/// independent oracle for residue-based densities. The f64 roundoff floor
/// is about `eps * e^{2M/5}`, so `terms` near 28 is optimal; larger M
/// trades method error for roundoff.
pub fn talbot_inverse<F>(f: F, t: f64, terms: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let m = terms as f64;
    let r = 2.0 * m / (5.0 * t);
    let mut acc = 0.5 * f(cr(r)) * (r * t).exp();
    for k in 1..terms {
        let theta = k as f64 * std::f64::consts::PI / m;
        let cot = theta.cos() / theta.sin();
        let s = r * theta * Complex64::new(cot, 1.0);
        let sigma = theta + (theta * cot - 1.0) * cot;
        acc += (f(s) * (s * t).exp() * Complex64::new(1.0, sigma)).re * cr(1.0);
    }
    acc * cr(r / m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mm1() -> QueueSpec {
        QueueSpec::new(ServiceModel::Exponential { omega: 1.0 }, 0.5).unwrap()
    }

    fn md1() -> QueueSpec {
        QueueSpec::new(ServiceModel::Deterministic { d: 1.0 }, 0.5).unwrap()
    }

    #[test]
    fn pk_at_zero_is_one() {
        for spec in [mm1(), md1()] {
            assert_eq!(pk_lst(&spec, cr(0.0)).unwrap(), cr(1.0));
        }
    }

    #[test]
    fn pk_matches_mm1_closed_form() {
        // (1-rho)s/(s-lambda(1-D*)) must equal (omega-lambda)(s+omega)/(omega(s+omega-lambda)).
        let spec = mm1();
        for s in [cr(0.25), cr(1.0), Complex64::new(0.3, 0.7)] {
            let general = pk_lst(&spec, s).unwrap();
            let closed = cr(0.5) * (s + 1.0) / (s + 0.5);
            assert!((general - closed).norm() < 1e-12);
        }
        let v = pk_lst(&spec, cr(0.25)).unwrap();
        assert!((v - cr(5.0 / 6.0)).norm() < 1e-14);
    }

    #[test]
    fn pk_md1_direct_value_and_series() {
        let spec = md1();
        let s = cr(1.0);
        let v = pk_lst(&spec, s).unwrap();
        let expect = 0.5 / (1.0 - 0.5 * (1.0 - (-1.0f64).exp()));
        assert!((v - cr(expect)).norm() < 1e-12);
        // Germ-based series at small s: W*(s) = sum y_k (-s)^k.
        let germ = germ_at_zero(&spec, 40).unwrap();
        let pw = dominant_pole(&spec).unwrap().abs();
        for sv in [0.1 * pw, 0.3 * pw, 0.5 * pw] {
            let s = cr(sv);
            let mut acc = cr(0.0);
            for (k, y) in germ.coeffs.iter().enumerate() {
                acc += cr(*y) * (-s).powu(k as u32);
            }
            let direct = pk_lst(&spec, s).unwrap();
            assert!(
                (acc - direct).norm() < 1e-8 * direct.norm(),
                "series {acc} vs direct {direct} at s={sv}"
            );
        }
    }

    #[test]
    fn pole_and_origin_errors() {
        let spec = mm1();
        assert!(matches!(pk_lst(&spec, cr(-0.5)), Err(WfError::PoleEvaluation(_))));
        assert!(matches!(germ_at_point(&spec, cr(0.0), 3), Err(WfError::Domain(_))));
    }

    #[test]
    fn germ_series_reconstructs_transform_erlang() {
        let spec = QueueSpec::new(ServiceModel::Erlang { q: 3, omega: 6.0 }, 1.1).unwrap();
        let germ = germ_at_zero(&spec, 48).unwrap();
        assert!(germ.coeffs[1..].iter().all(|y| *y > 0.0));
        germ.ratio_consistent_with_pole(5, 0.05).unwrap();
        let pw = dominant_pole(&spec).unwrap().abs();
        for t in [0.2, 0.5] {
            let s = cr(t * pw);
            let mut acc = cr(0.0);
            for (k, y) in germ.coeffs.iter().enumerate() {
                acc += cr(*y) * (-s).powu(k as u32);
            }
            let direct = pk_lst(&spec, s).unwrap();
            assert!(
                (acc - direct).norm() < 1e-8 * direct.norm(),
                "t={t}: {acc} vs {direct}"
            );
        }
    }

    #[test]
    fn pk_matches_erlang_closed_form() {
        // General PK quotient against the expanded rational form
        // (1-rho)(s/w+1)^q / ((s/w+1)^q - (l/w) sum_k C(q,k+1)(s/w)^k).
        let (q, omega, lambda) = (3u32, 6.0, 1.2);
        let spec = QueueSpec::new(ServiceModel::Erlang { q, omega }, lambda).unwrap();
        let rho = spec.rho();
        for s in [cr(0.3), cr(2.0), Complex64::new(0.5, 1.1)] {
            let x = s / omega;
            let mut tail = cr(0.0);
            for k in 0..q {
                tail += crate::numerics::binomial(q, k + 1) * x.powu(k);
            }
            let den = (x + 1.0).powu(q) - lambda / omega * tail;
            let closed = cr(1.0 - rho) * (x + 1.0).powu(q) / den;
            let general = pk_lst(&spec, s).unwrap();
            assert!(
                (general - closed).norm() < 1e-12 * closed.norm(),
                "s={s}: {general} vs {closed}"
            );
        }
    }

    #[test]
    fn true_lst_collapses_without_setup() {
        let spec = mm1();
        for s in [cr(0.3), Complex64::new(0.2, -1.1)] {
            let a = true_lst(&spec, s).unwrap();
            let b = pk_lst(&spec, s).unwrap();
            assert!((a - b).norm() < 1e-13);
        }
        assert_eq!(true_lst(&spec, cr(0.0)).unwrap(), cr(1.0));
    }

    #[test]
    fn germ_exponential_closed_form() {
        let spec = mm1();
        let germ = germ_at_zero(&spec, 10).unwrap();
        let closed = closed_germs::exponential(0.5, 1.0, 10);
        assert_eq!(germ.coeff(0), 1.0);
        assert!((germ.coeff(1) - 1.0).abs() < 1e-12);
        assert!((germ.coeff(2) - 2.0).abs() < 1e-12);
        assert!((germ.coeff(3) - 4.0).abs() < 1e-12);
        for k in 0..=10 {
            assert!((germ.coeff(k) - closed[k]).abs() < 1e-12 * closed[k].max(1.0));
        }
        // Exact geometric ratio 1/(omega - lambda) for k >= 1.
        for k in 1..10 {
            assert!((germ.coeff(k + 1) / germ.coeff(k) - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn germ_deterministic_series_matches_recursion() {
        let spec = md1();
        let germ = germ_at_zero(&spec, 24).unwrap();
        let series = closed_germs::deterministic(0.5, 1.0, 24).unwrap();
        // k = 1 term: (lambda/(1-lambda d)) d^2/2 = 0.5.
        assert!((germ.coeff(1) - 0.5).abs() < 1e-13);
        for k in 0..=24 {
            assert!(
                (germ.coeff(k) - series[k]).abs() < 1e-11 * series[k].max(1e-30),
                "k={k}: recursion {} vs series {}",
                germ.coeff(k),
                series[k]
            );
        }
        germ.ratio_consistent_with_pole(5, 0.05).unwrap();
    }

    #[test]
    fn germ_erlang_series_matches_recursion() {
        let spec = QueueSpec::new(ServiceModel::Erlang { q: 2, omega: 4.0 }, 1.0).unwrap();
        let germ = germ_at_zero(&spec, 20).unwrap();
        let series = closed_germs::erlang(1.0, 2, 4.0, 20).unwrap();
        for k in 0..=20 {
            assert!(
                (germ.coeff(k) - series[k]).abs() < 1e-11 * series[k].max(1e-30),
                "k={k}: recursion {} vs theta series {}",
                germ.coeff(k),
                series[k]
            );
        }
        // q = 1 degeneracy: theta series equals the exponential closed form.
        let e1 = closed_germs::erlang(0.5, 1, 1.0, 12).unwrap();
        let ec = closed_germs::exponential(0.5, 1.0, 12);
        for k in 0..=12 {
            assert!((e1[k] - ec[k]).abs() < 1e-12 * ec[k].max(1.0));
        }
    }

    #[test]
    fn shifted_germ_against_jets() {
        let spec = mm1();
        let a = cr(0.25);
        let germ = germ_at_point(&spec, a, 8).unwrap();
        // yhat_0 = W*(a).
        assert!((germ.coeff(0) - pk_lst(&spec, a).unwrap()).norm() < 1e-13);
        // yhat_1 = -dW*/ds(a) = lambda (omega-lambda)/(omega (a+omega-lambda)^2).
        let expect = 0.5 * 0.5 / (0.75f64 * 0.75);
        assert!((germ.coeff(1) - cr(expect)).norm() < 1e-12);
        // Full comparison with the jet of W*(-s) at -a: coefficients of
        // (s+a)^k there equal yhat_{a:k}.
        let jet = wstar_neg_jet(&spec, -a, 8).unwrap();
        for k in 0..=8 {
            assert!(
                (germ.coeff(k) - jet.coeff(k)).norm() < 1e-10 * jet.coeff(k).norm().max(1.0),
                "k={k}: recursion {} vs jet {}",
                germ.coeff(k),
                jet.coeff(k)
            );
        }
    }

    #[test]
    fn shifted_germ_erlang_against_jets() {
        let spec = QueueSpec::new(ServiceModel::Erlang { q: 3, omega: 4.0 }, 0.9).unwrap();
        let a = Complex64::new(0.4, 0.3);
        let germ = germ_at_point(&spec, a, 6).unwrap();
        let jet = wstar_neg_jet(&spec, -a, 6).unwrap();
        for k in 0..=6 {
            assert!(
                (germ.coeff(k) - jet.coeff(k)).norm() < 1e-9 * jet.coeff(k).norm().max(1.0),
                "k={k}: {} vs {}",
                germ.coeff(k),
                jet.coeff(k)
            );
        }
    }

    #[test]
    fn shifted_germ_limit_to_origin() {
        let spec = mm1();
        let germ0 = germ_at_zero(&spec, 6).unwrap();
        let germ = germ_at_point(&spec, cr(1e-6), 6).unwrap();
        for k in 0..=6 {
            assert!(
                (germ.coeff(k).re - germ0.coeff(k)).abs() < 1e-4 * germ0.coeff(k).max(1.0),
                "k={k}"
            );
        }
    }

    #[test]
    fn dominant_poles() {
        assert!((dominant_pole(&mm1()).unwrap() + 0.5).abs() < 1e-14);
        let p = dominant_pole(&md1()).unwrap();
        assert!((p + 1.2564).abs() < 1e-4, "got {p}");
        // Independent bisection root of s - lambda(1 - e^{-s d}) on (p-1, -1e-6).
        let g = |s: f64| s - 0.5 * (1.0 - (-s).exp());
        let (mut lo, mut hi) = (-2.0, -1e-6);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((p - 0.5 * (lo + hi)).abs() < 1e-9);
        // Erlang(2, 4), lambda = 1.
        let spec = QueueSpec::new(ServiceModel::Erlang { q: 2, omega: 4.0 }, 1.0).unwrap();
        let p = dominant_pole(&spec).unwrap();
        let den = cr(p) - 1.0 * (cr(1.0) - spec.model.lst(cr(p)).unwrap());
        assert!(p < 0.0 && den.norm() < 1e-10);
        // The pole is a simple zero: linear jet coefficient of the
        // denominator is away from zero.
        let h = 1e-6;
        let d_at = |s: f64| s - 1.0 * (1.0 - spec.model.lst(cr(s)).unwrap().re);
        let slope = (d_at(p + h) - d_at(p - h)) / (2.0 * h);
        assert!(slope.abs() > 1e-3);
    }

    #[test]
    fn pole_set_exponential() {
        let spec = mm1();
        let ps = pole_set(&spec).unwrap();
        assert_eq!(ps.poles.len(), 1);
        let p = &ps.poles[0];
        assert!((p.location - cr(-0.5)).norm() < 1e-12);
        assert_eq!(p.degree, 1);
        // varpi = lambda (lambda - omega)/omega = -0.25.
        assert!((p.residues[0] - cr(-0.25)).norm() < 1e-12);
        // Erlang(1, omega) must coincide.
        let spec1 = QueueSpec::new(ServiceModel::Erlang { q: 1, omega: 1.0 }, 0.5).unwrap();
        let ps1 = pole_set(&spec1).unwrap();
        assert!((ps1.poles[0].location - p.location).norm() < 1e-10);
        assert!((ps1.poles[0].residues[0] - p.residues[0]).norm() < 1e-10);
    }

    #[test]
    fn pole_set_erlang_density_reconstruction() {
        // Erlang(2, omega): two poles; the residue reconstruction of the
        // waiting density must match fixed-Talbot numerical inversion of
        // W*(s) - (1-rho) at u = 1.
        let spec = QueueSpec::new(ServiceModel::Erlang { q: 2, omega: 4.0 }, 1.0).unwrap();
        let ps = pole_set(&spec).unwrap();
        assert_eq!(ps.poles.iter().map(|p| p.degree).sum::<usize>(), 2);
        // Conjugate closure.
        for p in &ps.poles {
            if p.location.im != 0.0 {
                assert!(ps
                    .poles
                    .iter()
                    .any(|q| (q.location - p.location.conj()).norm() < 1e-9));
            }
        }
        let density_from_residues = |u: f64| {
            let mut acc = cr(0.0);
            for p in &ps.poles {
                let d = p.degree;
                for (j, w) in p.residues.iter().enumerate() {
                    // Res_{sigma=p}[W*(sigma) e^{sigma u}] contribution.
                    let sign = if (d - j) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign
                        * w
                        * (p.location * u).exp()
                        * u.powi((d - 1 - j) as i32)
                        / cr(crate::numerics::factorial((d - 1 - j) as u32));
                }
            }
            acc
        };
        let rho = spec.rho();
        let f = |s: Complex64| pk_lst(&spec, s).unwrap() - (1.0 - rho);
        for u in [0.5, 1.0, 2.0] {
            let talbot = talbot_inverse(f, u, 28);
            let resid = density_from_residues(u);
            assert!(resid.im.abs() < 1e-9);
            assert!(
                (talbot.re - resid.re).abs() < 1e-6 * resid.re.abs().max(1.0),
                "u={u}: talbot {} vs residues {}",
                talbot.re,
                resid.re
            );
        }
    }

    #[test]
    fn pole_set_rejects_deterministic() {
        assert!(matches!(pole_set(&md1()), Err(WfError::UnsupportedModel(_))));
    }

    #[test]
    fn mm1_cdf() {
        let spec = mm1();
        assert!((waiting_cdf_mm1(&spec, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((waiting_cdf_mm1(&spec, 2.0).unwrap() - (1.0 - 0.5 * (-1.0f64).exp())).abs() < 1e-15);
        assert!(waiting_cdf_mm1(&spec, 1e6).unwrap() > 1.0 - 1e-12);
        assert!(waiting_cdf_mm1(&md1(), 1.0).is_err());
    }

    #[test]
    fn talbot_on_known_pair() {
        // L^{-1}[1/(s+1)](t) = e^{-t}.
        let f = |s: Complex64| cr(1.0) / (s + 1.0);
        for t in [0.3, 1.0, 2.5] {
            let v = talbot_inverse(f, t, 28);
            assert!((v.re - (-t).exp()).abs() < 1e-9);
        }
    }
}
