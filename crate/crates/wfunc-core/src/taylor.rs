//! Taylor-germ machinery: the Toeplitz filter mapping cost germs to
//! w'-germs, its inverse, polynomial interval bounds with Lagrange
//! remainders, and convergence classification by growth order and type.

use num_complex::Complex64;

use crate::error::WfError;
use crate::exppoly::{ExpPolyTerm, PiecewiseExpPoly};
use crate::numerics::{factorial, Interval};
use crate::service::QueueSpec;
use crate::waiting::{dominant_pole, germ_at_zero};

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Finite vector of unscaled derivatives at 0: `coeffs[k] = f^{(k)}(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Germ {
    pub coeffs: Vec<Complex64>,
}

impl Germ {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "germ needs at least one derivative");
        Germ { coeffs }
    }

    pub fn real(coeffs: Vec<f64>) -> Self {
        Germ::new(coeffs.into_iter().map(cr).collect())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_else(|| cr(0.0))
    }
}

/// Growth metadata of an entire cost function: order `rho` and type
/// `sigma` (type is meaningful for the classification only at order 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthClass {
    pub order: f64,
    pub type_: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Converges,
    Diverges,
    Marginal,
}

/// Growth-order classification against `|p_W|` (pass `|p_D|` for the inverse
/// problem).
pub fn convergence_classify(threshold: f64, growth: GrowthClass) -> Convergence {
    if growth.order < 1.0 {
        return Convergence::Converges;
    }
    if growth.order > 1.0 {
        return Convergence::Diverges;
    }
    if (growth.type_ - threshold).abs() <= 1e-9 {
        Convergence::Marginal
    } else if growth.type_ < threshold {
        Convergence::Converges
    } else {
        Convergence::Diverges
    }
}

/// Advisory empirical estimate of (order, type) from germ ratios; the
/// classification itself always takes caller-declared metadata.
pub fn estimate_growth(derivs: &dyn Fn(usize) -> Complex64, upto: usize) -> GrowthClass {
    // For order-1 type-sigma functions, |f^{(k)}(0)| ~ sigma^k, so the
    // trailing ratio estimates sigma; a superexponential trend signals
    // order > 1.
    let mut ratios = Vec::new();
    for k in (upto.saturating_sub(6))..upto {
        let a = derivs(k).norm();
        let b = derivs(k + 1).norm();
        if a > 0.0 && b > 0.0 {
            ratios.push(b / a);
        }
    }
    if ratios.is_empty() {
        return GrowthClass { order: 0.0, type_: 0.0 };
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let trend = ratios.last().unwrap() / ratios.first().unwrap();
    GrowthClass { order: if trend > 1.5 { 2.0 } else { 1.0 }, type_: mean }
}

/// Truncation/divergence bookkeeping for the germ sums.
const TAIL_TOL: f64 = 1e-12;
const MAX_TERMS: usize = 512;
const WITNESS_RANGE: std::ops::RangeInclusive<usize> = 30..=40;

/// One entry of the filtered germ:
/// `ytilde_n = lambda/(1-rho) sum_q y_q c^{(n+q)}(0)`, truncated by the
/// geometric-majorant rule; divergence (growing partial sums or a
/// non-contracting tail) is reported with the partial-sum witness.
fn filtered_entry(
    scale: f64,
    weights: &dyn Fn(usize) -> f64,
    derivs: &dyn Fn(usize) -> Complex64,
    offset: usize,
) -> Result<Complex64, WfError> {
    let mut acc = cr(0.0);
    let mut partials: Vec<f64> = Vec::with_capacity(64);
    let mut recent: [f64; 3] = [f64::NAN; 3];
    let mut prev_term = f64::NAN;
    let mut ratio = f64::NAN;
    let mut passes = 0u32;
    let mut noncontract = 0u32;
    let mut negligible = 0u32;
    for q in 0..MAX_TERMS {
        let term = cr(weights(q)) * derivs(offset + q);
        acc += term;
        partials.push(acc.norm());
        let t = term.norm();
        if t == 0.0 {
            // A finitely-supported germ terminates the sum exactly; require
            // a few consecutive zeros to conclude.
            let all_zero = (1..=3).all(|j| derivs(offset + q + j).norm() == 0.0);
            if all_zero {
                return Ok(acc * scale);
            }
        }
        // Terms far below the truncation target carry no information
        // (ratio estimates at that scale are noise): count them as
        // converged once sustained.
        if q > 4 && t <= 1e-13 * acc.norm() {
            negligible += 1;
            if negligible >= 3 {
                return Ok(acc * scale);
            }
            prev_term = t;
            continue;
        }
        negligible = 0;
        let mut sustained = 0u32;
        if prev_term.is_finite() && prev_term > 0.0 && t > 0.0 {
            let r = t / prev_term;
            recent[q % 3] = r;
            // Conservative geometric majorant: the largest recent ratio.
            ratio = recent.iter().copied().filter(|x| x.is_finite()).fold(0.0, f64::max);
            if ratio < 0.999 {
                let tail = t * ratio / (1.0 - ratio);
                if tail <= TAIL_TOL * acc.norm().max(1e-300) && q > 4 {
                    passes += 1;
                    if passes >= 2 {
                        return Ok(acc * scale);
                    }
                } else {
                    passes = 0;
                }
            } else {
                passes = 0;
            }
            // Sustained non-contraction of *significant* terms signals the
            // divergence/marginal regime; noise-scale terms don't count.
            if r >= 0.999 && t > 1e-10 * acc.norm().max(1e-300) {
                noncontract += 1;
            } else if r < 0.999 {
                noncontract = 0;
            }
            sustained = noncontract;
        }
        prev_term = t;
        // Divergence: terms have stopped contracting for a sustained run
        // (at or beyond the threshold the sum never settles).
        if q >= *WITNESS_RANGE.end() && sustained >= 10 {
            let witness = partials[*WITNESS_RANGE.start()..=*WITNESS_RANGE.end()].to_vec();
            return Err(WfError::DivergentSeries {
                reason: format!(
                    "germ terms stopped contracting (order/type at or beyond the dominant-pole threshold); trailing ratio {ratio:.3}"
                ),
                witness,
            });
        }
    }
    let witness = partials[*WITNESS_RANGE.start()..=*WITNESS_RANGE.end()].to_vec();
    Err(WfError::DivergentSeries {
        reason: format!("germ sum did not contract within {MAX_TERMS} terms"),
        witness,
    })
}

/// Filters a cost germ into the w'-germ at 0. `derivs(k)` supplies
/// `c^{(k)}(0)` for arbitrary order.
pub fn filter_germ(
    spec: &QueueSpec,
    derivs: &dyn Fn(usize) -> Complex64,
    n: usize,
) -> Result<Germ, WfError> {
    spec.stability_check()?;
    let germ = germ_at_zero(spec, MAX_TERMS + n)?;
    let scale = spec.lambda / (1.0 - spec.rho());
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(filtered_entry(scale, &|q| germ.coeff(q), derivs, k)?);
    }
    Ok(Germ::new(out))
}

/// Inverse filter: recovers the cost germ from a w'-germ,
/// `c^{(k)}(0) = ytilde_k/lambda - sum_t (E[D^{t+1}]/(t+1)!) ytilde_{t+k}`.
pub fn inverse_filter_germ(
    spec: &QueueSpec,
    wderivs: &dyn Fn(usize) -> Complex64,
    n: usize,
) -> Result<Germ, WfError> {
    spec.stability_check()?;
    let lambda = spec.lambda;
    let weights = |t: usize| spec.model.moment(t as u32 + 1) / factorial(t as u32 + 1);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let sum = filtered_entry(1.0, &weights, wderivs, k)?;
        out.push(wderivs(k) / lambda - sum);
    }
    Ok(Germ::new(out))
}

/// Assembled Toeplitz matrices for the filter identity
/// `Y^{(n)} = (I/lambda - M^{(n)})^{-1}`.
pub fn filter_matrices(spec: &QueueSpec, n: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), WfError> {
    let germ = germ_at_zero(spec, n)?;
    let scale = spec.lambda / (1.0 - spec.rho());
    let mut y = vec![vec![0.0; n]; n];
    let mut im = vec![vec![0.0; n]; n];
    for r in 0..n {
        for c in r..n {
            y[r][c] = scale * germ.coeff(c - r);
            im[r][c] = if c == r { 1.0 / spec.lambda } else { 0.0 }
                - spec.model.moment((c - r + 1) as u32) / factorial((c - r + 1) as u32);
        }
    }
    Ok((y, im))
}

/// Infinity-norm of `Y (I/lambda - M) - I`.
pub fn filter_identity_residual(spec: &QueueSpec, n: usize) -> Result<f64, WfError> {
    let (y, im) = filter_matrices(spec, n)?;
    let mut worst: f64 = 0.0;
    for r in 0..n {
        let mut row: f64 = 0.0;
        for c in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += y[r][k] * im[k][c];
            }
            row += (acc - if r == c { 1.0 } else { 0.0 }).abs();
        }
        worst = worst.max(row);
    }
    Ok(worst)
}

/// Per-order constant intervals bounding Re and Im of the `(n+1)`-th cost
/// derivative uniformly on the evaluation range.
#[derive(Debug, Clone)]
pub struct DerivativeBounds {
    pub re: Interval,
    pub im: Interval,
}

/// Interval value function: bracketing pair plus the mean-cost interval.
#[derive(Debug, Clone)]
pub struct IntervalFn {
    pub lower: PiecewiseExpPoly,
    pub upper: PiecewiseExpPoly,
    pub mean: Interval,
}

impl IntervalFn {
    pub fn eval(&self, u: f64) -> Interval {
        let (lo, elo) = self.lower.eval_with_err(u);
        let (hi, ehi) = self.upper.eval_with_err(u);
        Interval::new((lo - elo).min(hi + ehi), (hi + ehi).max(lo - elo))
    }

    pub fn width_at(&self, u: f64) -> f64 {
        self.eval(u).width()
    }
}

/// Polynomial interval bounds for w from the first `n+1` cost derivatives
/// and a constant interval bound on the `(n+1)`-th derivative:
/// main part `lambda/(1-rho) sum_k {sum_t y_t c^{(k+t)}(0)} u^{k+1}/(k+1)!`,
/// remainder `lambda/(1-rho) sum_k [alpha] y_{n+1-k} u^{k+1}/(k+1)!`.
pub fn polynomial_bounds(
    spec: &QueueSpec,
    cost_germ: &Germ,
    dbounds: &DerivativeBounds,
) -> Result<IntervalFn, WfError> {
    spec.stability_check()?;
    let n = cost_germ.len() - 1;
    let germ = germ_at_zero(spec, n + 1)?;
    let scale = spec.lambda / (1.0 - spec.rho());
    // Finite double sum: the cost germ is the truncated Taylor polynomial.
    let mut mid_terms = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut acc = cr(0.0);
        for t in 0..=(n - k) {
            acc += cr(germ.coeff(t)) * cost_germ.coeff(k + t);
        }
        mid_terms.push(acc * scale / factorial(k as u32 + 1));
    }
    // Remainder coefficients r_k = y_{n+1-k}/(k+1)! * scale, k = 0..n+1.
    let mut rem = Vec::with_capacity(n + 2);
    for k in 0..=(n + 1) {
        rem.push(scale * germ.coeff(n + 1 - k) / factorial(k as u32 + 1));
    }
    let build = |bound_re: f64, bound_im: f64| -> PiecewiseExpPoly {
        let mut terms = Vec::new();
        for (k, c) in mid_terms.iter().enumerate() {
            terms.push(ExpPolyTerm::new(*c, k as u32 + 1, cr(0.0)));
        }
        for (k, r) in rem.iter().enumerate() {
            terms.push(ExpPolyTerm::new(
                Complex64::new(bound_re, bound_im) * r,
                k as u32 + 1,
                cr(0.0),
            ));
        }
        PiecewiseExpPoly::global(terms)
    };
    let lower = build(dbounds.re.lo, dbounds.im.lo);
    let upper = build(dbounds.re.hi, dbounds.im.hi);
    // Mean-cost interval from the stationary means of the bracketing
    // exp-poly costs: E[poly] = sum c_k k! y_k plus remainder bound.
    let mut mean_mid = 0.0;
    for k in 0..=n {
        mean_mid += cost_germ.coeff(k).re * germ.coeff(k);
    }
    let mean_rem = germ.coeff(n + 1); // E[W^{n+1}]/(n+1)!
    let mean = Interval::new(
        mean_mid + dbounds.re.lo * mean_rem,
        mean_mid + dbounds.re.hi * mean_rem,
    );
    Ok(IntervalFn { lower, upper, mean })
}

/// The section-4.2 derivative-bound recipe for the cost `1 - e^{-a u}`:
/// `[alpha^{(2n)}] = [0, a^{2n+1}]`, `[alpha^{(2n+1)}] = [-a^{2n+2}, 0]`.
pub fn one_minus_exp_bounds(a: f64, n: usize) -> DerivativeBounds {
    let mag = a.powi(n as i32 + 1);
    let re = if n % 2 == 0 {
        Interval::new(0.0, mag)
    } else {
        Interval::new(-mag, 0.0)
    };
    DerivativeBounds { re, im: Interval::point(0.0) }
}

/// Cost germ of `1 - e^{-a u}` up to order `n`.
pub fn one_minus_exp_germ(a: f64, n: usize) -> Germ {
    let mut coeffs = vec![cr(0.0); n + 1];
    for (k, slot) in coeffs.iter_mut().enumerate().skip(1) {
        *slot = cr(-(-a).powi(k as i32));
    }
    Germ::new(coeffs)
}

/// Convenience: classification threshold `|p_W|` of a queue.
pub fn wt_threshold(spec: &QueueSpec) -> Result<f64, WfError> {
    Ok(dominant_pole(spec)?.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::service::ServiceModel;
    use crate::waiting::pk_lst;
    use crate::wfn::w_for_exp_poly_cost;

    fn mm1() -> QueueSpec {
        QueueSpec::new(ServiceModel::Exponential { omega: 1.0 }, 0.5).unwrap()
    }

    fn one_minus_exp_derivs(a: f64) -> impl Fn(usize) -> Complex64 {
        move |k: usize| {
            if k == 0 {
                cr(0.0)
            } else {
                cr(-(-a).powi(k as i32))
            }
        }
    }

    #[test]
    fn filter_matches_exp_cost_closed_form() {
        // ytilde_n = lambda/(1-rho) (delta[n] - W*(a)(-a)^n), a = 0.25.
        let spec = mm1();
        let a = 0.25;
        let derivs = one_minus_exp_derivs(a);
        let germ = filter_germ(&spec, &derivs, 6).unwrap();
        let wa = pk_lst(&spec, cr(a)).unwrap().re;
        assert!((germ.coeff(0).re - (1.0 - wa)).abs() < 1e-10);
        assert!((germ.coeff(0).re - 1.0 / 6.0).abs() < 1e-10);
        assert!((germ.coeff(1).re - 5.0 / 24.0).abs() < 1e-10);
        for n in 0..6 {
            let expect = if n == 0 { 1.0 - wa } else { -wa * (-a).powi(n as i32) };
            assert!(
                (germ.coeff(n).re - expect).abs() < 1e-10,
                "n={n}: {} vs {expect}",
                germ.coeff(n).re
            );
        }
    }

    #[test]
    fn filter_constant_cost() {
        let spec = mm1();
        let derivs = |k: usize| if k == 0 { cr(1.0) } else { cr(0.0) };
        let germ = filter_germ(&spec, &derivs, 4).unwrap();
        assert!((germ.coeff(0).re - 1.0).abs() < 1e-12);
        for k in 1..4 {
            assert!(germ.coeff(k).norm() < 1e-12);
        }
    }

    #[test]
    fn filter_md1_closed_form() {
        // M/D/1: ytilde_n = lambda delta[n]/(1-ld) + lambda(-a)^{n+1}/(a - l(1-e^{-ad})).
        let spec = QueueSpec::new(ServiceModel::Deterministic { d: 1.0 }, 0.5).unwrap();
        let pw = wt_threshold(&spec).unwrap();
        let a = 0.5 * pw;
        let derivs = one_minus_exp_derivs(a);
        let germ = filter_germ(&spec, &derivs, 5).unwrap();
        for n in 0..5 {
            let expect = if n == 0 { 0.5 / 0.5 } else { 0.0 }
                + 0.5 * (-a).powi(n as i32 + 1) / (a - 0.5 * (1.0 - (-a).exp()));
            assert!(
                (germ.coeff(n).re - expect).abs() < 1e-9 * expect.abs().max(1.0),
                "n={n}: {} vs {expect}",
                germ.coeff(n).re
            );
        }
    }

    #[test]
    fn divergence_witness() {
        // a = 0.75 > omega - lambda: DivergentSeries with growing partial
        // sums over indices 30..40.
        let spec = mm1();
        let derivs = one_minus_exp_derivs(0.75);
        match filter_germ(&spec, &derivs, 1) {
            Err(WfError::DivergentSeries { witness, .. }) => {
                assert_eq!(witness.len(), 11);
                for w in witness.windows(2) {
                    assert!(w[1] >= w[0], "witness not increasing: {witness:?}");
                }
                assert!(witness[10] > witness[0]);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
        // Marginal a = omega - lambda also fails to contract.
        let derivs = one_minus_exp_derivs(0.5);
        assert!(matches!(
            filter_germ(&spec, &derivs, 1),
            Err(WfError::DivergentSeries { .. })
        ));
    }

    #[test]
    fn partial_sums_converge_to_closed_form() {
        // sum ytilde_k u^{k+1}/(k+1)! -> w(u) for a = 0.5 (omega-lambda).
        let spec = mm1();
        let a = 0.25;
        let derivs = one_minus_exp_derivs(a);
        let germ = filter_germ(&spec, &derivs, 41).unwrap();
        let cost = vec![ExpPolyTerm::real(1.0, 0, 0.0), ExpPolyTerm::real(-1.0, 0, a)];
        let closed = w_for_exp_poly_cost(&spec, &cost).unwrap();
        for u in [0.5f64, 1.0, 2.0, 5.0] {
            let mut acc = 0.0;
            for k in 0..=40 {
                acc += germ.coeff(k).re * u.powi(k as i32 + 1)
                    / factorial(k as u32 + 1);
            }
            let expect = closed.w.eval(u);
            assert!(
                (acc - expect).abs() <= 1e-8 * expect.abs().max(1.0),
                "u={u}: partial {acc} vs closed {expect}"
            );
        }
    }

    #[test]
    fn inverse_filter_round_trip() {
        let spec = mm1();
        // Random geometric-decay germs at rate 0.5 min(|p_D|, |p_W|).
        let rate: f64 = 0.25;
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rand = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..20 {
            let base: Vec<Complex64> =
                (0..160).map(|k| cr(rand() * rate.powi(k as i32))).collect();
            let derivs = |k: usize| base.get(k).copied().unwrap_or(cr(0.0));
            let filtered = filter_germ(&spec, &derivs, 80).unwrap();
            let fder = |k: usize| filtered.coeff(k);
            let back = inverse_filter_germ(&spec, &fder, 8).unwrap();
            for k in 0..8 {
                assert!(
                    (back.coeff(k) - base[k]).norm() <= 1e-10 * base[k].norm().max(1e-12),
                    "k={k}: {} vs {}",
                    back.coeff(k),
                    base[k]
                );
            }
        }
    }

    #[test]
    fn inverse_filter_recovers_exp_cost_germ() {
        // w-germ of cost 1 - e^{-au}: c~_n = delta[n] - (-a)^n, |a| < omega.
        let spec = mm1();
        let a = 0.25;
        let wa = pk_lst(&spec, cr(a)).unwrap().re;
        let scale = 1.0; // lambda/(1-rho) = 1 here
        let wder =
            move |k: usize| cr(scale * (if k == 0 { 1.0 - wa } else { -wa * (-a).powi(k as i32) }));
        let back = inverse_filter_germ(&spec, &wder, 6).unwrap();
        for n in 0..6 {
            let expect = if n == 0 { 0.0 } else { -(-a).powi(n as i32) };
            assert!(
                (back.coeff(n).re - expect).abs() < 1e-10,
                "n={n}: {} vs {expect}",
                back.coeff(n).re
            );
        }
        // Zero germ maps to zero germ.
        let zero = inverse_filter_germ(&spec, &|_| cr(0.0), 4).unwrap();
        assert!(zero.coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn inverse_filter_diverges_beyond_service_pole() {
        // The recovery series weights are E[D^{t+1}]/(t+1)! ~ omega^{-t};
        // a w-germ growing faster than |p_D| = omega cannot be inverted.
        let spec = mm1();
        let wder = |k: usize| cr(1.5f64.powi(k as i32));
        assert!(matches!(
            inverse_filter_germ(&spec, &wder, 2),
            Err(WfError::DivergentSeries { .. })
        ));
        // Below the pole it converges.
        let wder = |k: usize| cr(0.5f64.powi(k as i32));
        assert!(inverse_filter_germ(&spec, &wder, 2).is_ok());
    }

    #[test]
    fn toeplitz_identity() {
        for spec in [
            mm1(),
            QueueSpec::new(ServiceModel::Deterministic { d: 1.0 }, 0.5).unwrap(),
            QueueSpec::new(ServiceModel::Erlang { q: 2, omega: 4.0 }, 1.0).unwrap(),
        ] {
            for n in [5usize, 12, 20] {
                let r = filter_identity_residual(&spec, n).unwrap();
                assert!(r <= 1e-10, "residual {r} at n={n} for {:?}", spec.model);
            }
        }
    }

    #[test]
    fn classification_rules() {
        let spec = mm1();
        let pw = wt_threshold(&spec).unwrap();
        assert_eq!(
            convergence_classify(pw, GrowthClass { order: 1.0, type_: 0.25 }),
            Convergence::Converges
        );
        assert_eq!(
            convergence_classify(pw, GrowthClass { order: 1.0, type_: 0.75 }),
            Convergence::Diverges
        );
        assert_eq!(
            convergence_classify(pw, GrowthClass { order: 2.0, type_: 0.1 }),
            Convergence::Diverges
        );
        assert_eq!(
            convergence_classify(pw, GrowthClass { order: 0.5, type_: 9.0 }),
            Convergence::Converges
        );
        assert_eq!(
            convergence_classify(pw, GrowthClass { order: 1.0, type_: pw }),
            Convergence::Marginal
        );
    }

    #[test]
    fn polynomial_bounds_contain_and_shrink() {
        let spec = mm1();
        let a = 0.25;
        let cost = vec![ExpPolyTerm::real(1.0, 0, 0.0), ExpPolyTerm::real(-1.0, 0, a)];
        let closed = w_for_exp_poly_cost(&spec, &cost).unwrap();
        let widths: Vec<f64> = [5usize, 25]
            .iter()
            .map(|&n| {
                let germ = one_minus_exp_germ(a, n);
                let bounds =
                    polynomial_bounds(&spec, &germ, &one_minus_exp_bounds(a, n)).unwrap();
                for u in [0.5, 1.0, 2.0] {
                    let iv = bounds.eval(u);
                    let truth = closed.w.eval(u);
                    assert!(
                        iv.contains(truth),
                        "n={n} u={u}: {truth} not in [{}, {}]",
                        iv.lo,
                        iv.hi
                    );
                    assert!(bounds.eval(u).width() >= 0.0);
                }
                bounds.width_at(2.0)
            })
            .collect();
        assert!(
            widths[1] < 0.1 * widths[0],
            "width at n=25 ({}) not below 10% of n=5 ({})",
            widths[1],
            widths[0]
        );
        // Exact polynomial cost with zero remainder: degenerate interval
        // equal to the closed-form w.
        let germ = Germ::real(vec![0.0, 1.0]);
        let zero = DerivativeBounds { re: Interval::point(0.0), im: Interval::point(0.0) };
        let bounds = polynomial_bounds(&spec, &germ, &zero).unwrap();
        let table = crate::wfn::w_table1(&spec, 1, cr(0.0)).unwrap();
        for u in [0.7, 1.9] {
            let iv = bounds.eval(u);
            assert!(iv.width() < 1e-12);
            assert!((iv.midpoint() - table.w.eval(u)).abs() < 1e-10);
        }
    }

    #[test]
    fn growth_estimator_is_sane() {
        let derivs = one_minus_exp_derivs(0.3);
        let g = estimate_growth(&derivs, 20);
        assert!((g.type_ - 0.3).abs() < 0.05);
        assert!((g.order - 1.0).abs() < 0.5);
    }
}
