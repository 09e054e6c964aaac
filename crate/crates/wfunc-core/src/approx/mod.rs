//! Uniform cost approximation on `[0, tau]`: Bernstein polynomials,
//! Korovkin-weighted trigonometric sums mapped to near-best polynomials
//! with the Jackson error bound, modulus-of-continuity estimation,
//! interval cost assembly with exponential tails, and periodic-cost
//! bounds.

pub mod cheb;
pub mod expr;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::WfError;
use crate::exppoly::{ExpPolyTerm, PiecewiseExpPoly};
use crate::numerics::Interval;
use crate::piecewise::PiecewiseCostSpec;
use crate::service::QueueSpec;
use crate::taylor::IntervalFn;
use crate::waiting::pk_lst;

pub use cheb::{cos_poly, cos_poly_nu, ChebPoly};

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// A black-box continuous cost on `[0, tau]`, optionally with an exact
/// modulus of continuity.
#[derive(Clone)]
pub struct SampledCost {
    pub evaluator: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub tau: f64,
    pub exact_modulus: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl std::fmt::Debug for SampledCost {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledCost").field("tau", &self.tau).finish()
    }
}

impl SampledCost {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, tau: f64) -> Self {
        SampledCost { evaluator: Arc::new(f), tau, exact_modulus: None }
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.evaluator)(u)
    }

    /// Rescales the approximation window, keeping the evaluator.
    pub fn with_tau(&self, tau: f64) -> SampledCost {
        SampledCost { evaluator: self.evaluator.clone(), tau, exact_modulus: None }
    }
}

/// The `example7` quotient cost `u^2/(a^2 + u^2)` with its exact modulus of
/// continuity and canonical tail envelope.
pub fn example7_cost(a: f64, tau: f64) -> SampledCost {
    let aa = a;
    let modulus = move |delta: f64| example7_modulus(aa, tau, delta);
    SampledCost {
        evaluator: Arc::new(move |u: f64| u * u / (aa * aa + u * u)),
        tau,
        exact_modulus: Some(Arc::new(modulus)),
    }
}

/// Exact modulus of the quotient cost on `[0, tau]` for `delta <= tau/2`:
/// the sup is attained centered at `u*`.
pub fn example7_modulus(a: f64, tau: f64, delta: f64) -> f64 {
    let c = |u: f64| u * u / (a * a + u * u);
    let h = delta / 2.0;
    let inner = (h * h - a * a
        + 2.0 * (a.powi(4) + a * a * h * h + h.powi(4)).sqrt())
        / 3.0;
    let ustar = inner.sqrt().min(tau - h);
    c(ustar + h) - c(ustar - h)
}

/// Tail envelope: bounding exp-polynomials valid on `(tau, inf)`.
#[derive(Debug, Clone)]
pub struct TailEnvelope {
    pub lower: Vec<ExpPolyTerm>,
    pub upper: Vec<ExpPolyTerm>,
}

impl TailEnvelope {
    /// Sampled sanity check `lower <= upper` on `(tau, tau + 10/|p_W|]`.
    pub fn validate(&self, tau: f64, pw_abs: f64) -> Result<(), WfError> {
        for i in 1..=64 {
            let u = tau + 10.0 / pw_abs * i as f64 / 64.0;
            let lo: f64 = self.lower.iter().map(|t| t.eval(u).re).sum();
            let hi: f64 = self.upper.iter().map(|t| t.eval(u).re).sum();
            if lo > hi + 1e-12 {
                return Err(WfError::Domain(format!(
                    "tail envelope inverted at u = {u}: {lo} > {hi}"
                )));
            }
        }
        Ok(())
    }

    /// The `example7` envelope: constant `c(tau)` below, saturating
    /// exponential `1 - (1 - c(tau)) e^{-beta (u - tau)}` above.
    pub fn example7(a: f64, tau: f64) -> TailEnvelope {
        let ctau = tau * tau / (a * a + tau * tau);
        let dctau = 2.0 * a * a * tau / (a * a + tau * tau).powi(2);
        let beta = dctau / (1.0 - ctau);
        TailEnvelope {
            lower: vec![ExpPolyTerm::real(ctau, 0, 0.0)],
            upper: vec![
                ExpPolyTerm::real(1.0, 0, 0.0),
                ExpPolyTerm::shifted(cr(-(1.0 - ctau)), 0, cr(beta), tau),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxMethod {
    Bernstein,
    NearBest,
    /// Chebyshev interpolation at Chebyshev points: converges geometrically
    /// for analytic costs where the positive operators saturate; the
    /// dispatching loop depends on that.
    ChebInterp,
}

/// A uniform polynomial approximation with its declared error bound.
#[derive(Debug, Clone)]
pub struct PolyApprox {
    /// Monomial coefficients on `[0, tau]`.
    pub coeffs: Vec<f64>,
    /// The same polynomial in the Chebyshev basis (stable evaluation).
    pub cheb: ChebPoly,
    /// Declared uniform bound (Jackson / Bernstein rate).
    pub eta: f64,
    pub method: ApproxMethod,
    pub tau: f64,
}

impl PolyApprox {
    pub fn eval(&self, u: f64) -> f64 {
        self.cheb.eval(u)
    }

    /// A tighter sound slack: the sup error measured on a dense grid,
    /// inflated by 1.5 plus an absolute floor, capped by the declared
    /// bound. Smooth costs beat the modulus rates by orders of magnitude
    /// and the dispatching loop depends on that.
    pub fn eta_tight(&self, cost: &SampledCost) -> f64 {
        let grid = 2048usize.max(8 * self.cheb.degree());
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..=grid {
            let u = self.tau * i as f64 / grid as f64;
            let c = cost.eval(u);
            worst = worst.max((self.eval(u) - c).abs());
            scale = scale.max(c.abs());
        }
        (1.5 * worst + 1e-13 * (1.0 + scale)).min(self.eta)
    }

    /// Measured sup error against the sampled cost on a grid.
    pub fn measured_error(&self, cost: &SampledCost, points: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=points {
            let u = self.tau * i as f64 / points as f64;
            worst = worst.max((self.eval(u) - cost.eval(u)).abs());
        }
        worst
    }
}

/// Modulus-of-continuity estimate: sliding-window grid sup inflated by
/// 1.05 (a documented overestimate keeping interval validity).
pub fn modulus_estimate(cost: &SampledCost, delta: f64) -> f64 {
    const GRID: usize = 4096;
    let tau = cost.tau;
    let delta = delta.min(tau);
    let vals: Vec<f64> = (0..=GRID).map(|i| cost.eval(tau * i as f64 / GRID as f64)).collect();
    let win = ((delta / tau * GRID as f64).floor() as usize).max(1);
    // Sliding max - min with monotonic deques.
    let mut maxd: std::collections::VecDeque<usize> = Default::default();
    let mut mind: std::collections::VecDeque<usize> = Default::default();
    let mut worst: f64 = 0.0;
    for i in 0..vals.len() {
        while let Some(&b) = maxd.back() {
            if vals[b] <= vals[i] {
                maxd.pop_back();
            } else {
                break;
            }
        }
        maxd.push_back(i);
        while let Some(&b) = mind.back() {
            if vals[b] >= vals[i] {
                mind.pop_back();
            } else {
                break;
            }
        }
        mind.push_back(i);
        while *maxd.front().unwrap() + win < i {
            maxd.pop_front();
        }
        while *mind.front().unwrap() + win < i {
            mind.pop_front();
        }
        if i >= win {
            worst = worst.max(vals[*maxd.front().unwrap()] - vals[*mind.front().unwrap()]);
        }
    }
    worst = worst.max({
        // Also cover the first full window.
        let m = vals[..=win].iter().cloned().fold(f64::MIN, f64::max);
        let n = vals[..=win].iter().cloned().fold(f64::MAX, f64::min);
        m - n
    });
    1.05 * worst
}

fn modulus(cost: &SampledCost, delta: f64) -> f64 {
    match &cost.exact_modulus {
        Some(f) => f(delta.min(cost.tau)),
        None => modulus_estimate(cost, delta),
    }
}

/// Bernstein approximation of degree `n` with monomial coefficients from
/// the forward-difference recursion and the 3/2 omega(tau/sqrt n) bound.
pub fn bernstein(cost: &SampledCost, n: usize) -> PolyApprox {
    assert!(n >= 1);
    let tau = cost.tau;
    let mut diffs: Vec<f64> = (0..=n).map(|t| cost.eval(t as f64 * tau / n as f64)).collect();
    let mut coeffs = vec![0.0f64; n + 1];
    coeffs[0] = diffs[0];
    let mut fact = 1.0f64;
    for k in 1..=n {
        for t in 0..=(n - k) {
            diffs[t] = (n - k + 1) as f64 * (diffs[t + 1] - diffs[t]) / tau;
        }
        fact *= k as f64;
        coeffs[k] = diffs[0] / fact;
    }
    let eta = 1.5 * modulus(cost, tau / (n as f64).sqrt());
    // Chebyshev form fitted exactly from values of the polynomial.
    let cheb = cheb_from_poly_values(&|u| horner(&coeffs, u), n, tau);
    PolyApprox { coeffs, cheb, eta, method: ApproxMethod::Bernstein, tau }
}

fn horner(c: &[f64], u: f64) -> f64 {
    let mut acc = 0.0;
    for &x in c.iter().rev() {
        acc = acc * u + x;
    }
    acc
}

/// Chebyshev interpolation from `n+1` Chebyshev points of the first kind
/// (exact on polynomials of degree `n`).
fn cheb_from_poly_values(f: &dyn Fn(f64) -> f64, n: usize, tau: f64) -> ChebPoly {
    let m = n + 1;
    let vals: Vec<f64> = (0..m)
        .map(|j| {
            let theta = (j as f64 + 0.5) * PI / m as f64;
            f(tau * (1.0 + theta.cos()) / 2.0)
        })
        .collect();
    let mut coeffs = vec![0.0f64; m];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, v) in vals.iter().enumerate() {
            acc += v * ((j as f64 + 0.5) * k as f64 * PI / m as f64).cos();
        }
        *c = acc * if k == 0 { 1.0 } else { 2.0 } / m as f64;
    }
    ChebPoly::new(coeffs, tau)
}

/// Korovkin weights `rho_{n,0..n}`.
pub fn korovkin_weights(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let m = n as f64 + 2.0;
    let mut w = Vec::with_capacity(n + 1);
    w.push(1.0);
    if n >= 1 {
        w.push((PI / m).cos());
    }
    let denom: f64 = (0..=n).map(|q| ((q as f64 + 1.0) * PI / m).sin().powi(2)).sum();
    for k in 2..=n {
        let num: f64 = (0..=(n - k))
            .map(|q| {
                ((q as f64 + 1.0) * PI / m).sin() * ((q as f64 + k as f64 + 1.0) * PI / m).sin()
            })
            .sum();
        w.push(num / denom);
    }
    w
}

/// Real Fourier cosine coefficients `Re alpha_k` of
/// `c~(theta) = c(tau(1+cos theta)/2)` by Chebyshev-Gauss quadrature with
/// `N = max(512, 16 n)` midpoint nodes.
pub fn fourier_coeffs(cost: &SampledCost, n: usize) -> Vec<f64> {
    let nq = 512usize.max(16 * n);
    let vals: Vec<f64> = (0..nq)
        .map(|j| {
            let theta = (j as f64 + 0.5) * PI / nq as f64;
            cost.eval(cost.tau * (1.0 + theta.cos()) / 2.0)
        })
        .collect();
    (0..=n)
        .map(|k| {
            let mut acc = 0.0;
            for (j, v) in vals.iter().enumerate() {
                acc += v * ((j as f64 + 0.5) * k as f64 * PI / nq as f64).cos();
            }
            acc / nq as f64
        })
        .collect()
}

/// Near-best polynomial: Korovkin-weighted Fourier sum mapped back to
/// `[0, tau]`, with the Jackson bound `6 omega(tau/(2n))`.
pub fn near_best(cost: &SampledCost, n: usize) -> PolyApprox {
    assert!(n >= 1);
    let tau = cost.tau;
    let alpha = fourier_coeffs(cost, n);
    let rho = korovkin_weights(n);
    // Chebyshev coefficients directly: cos(k theta) = T_k(x).
    let cheb_coeffs: Vec<f64> = (0..=n)
        .map(|k| rho[k] * alpha[k] * if k == 0 { 1.0 } else { 2.0 })
        .collect();
    let cheb = ChebPoly::new(cheb_coeffs, tau);
    // Monomial pipeline: p_t = sum_{k in S(n,t)} rho_k beta_k nu(k, floor(t/2)),
    // then the affine substitution x = 2u/tau - 1.
    let mut px = vec![0.0f64; n + 1];
    for (t, slot) in px.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut k = t;
        while k <= n {
            let beta = rho[k] * alpha[k] * if k == 0 { 1.0 } else { 2.0 };
            acc += beta * cos_poly_nu(k, t / 2);
            k += 2;
        }
        *slot = acc;
    }
    let mut coeffs = vec![0.0f64; n + 1];
    for (k, slot) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for t in 0..=(n - k) {
            acc += crate::numerics::binomial((t + k) as u32, k as u32)
                * if t % 2 == 0 { 1.0 } else { -1.0 }
                * px[t + k];
        }
        *slot = (2.0f64 / tau).powi(k as i32) * acc;
    }
    let eta = 6.0 * modulus(cost, tau / (2.0 * n as f64));
    PolyApprox { coeffs, cheb, eta, method: ApproxMethod::NearBest, tau }
}

/// Interval cost for a continuous cost: approximation plus
/// slack on `(0, tau)`, tail envelope on `(tau, inf)`.
#[derive(Debug, Clone)]
pub struct IntervalCost {
    pub approx: PolyApprox,
    pub tail: TailEnvelope,
    pub tau: f64,
    /// Slack actually applied around the approximation (defaults to the
    /// declared bound; the dispatch path tightens it).
    pub eta_used: f64,
}

impl IntervalCost {
    /// Bracketing pair of two-piece cost specs, ready for the piecewise
    /// module (monomial coefficients; use the stable evaluator for large
    /// degrees).
    pub fn to_piecewise_pair(&self) -> Result<(PiecewiseCostSpec, PiecewiseCostSpec), WfError> {
        if self.approx.coeffs.is_empty() {
            return Err(WfError::UnsupportedCost(
                "monomial coefficients unavailable at this degree; use the stable evaluator".into(),
            ));
        }
        let mut lo_sigma = self.approx.coeffs.clone();
        let mut hi_sigma = self.approx.coeffs.clone();
        lo_sigma[0] -= self.eta_used;
        hi_sigma[0] += self.eta_used;
        let lo = PiecewiseCostSpec::new(lo_sigma, self.tail.lower.clone(), self.tau)?;
        let hi = PiecewiseCostSpec::new(hi_sigma, self.tail.upper.clone(), self.tau)?;
        Ok((lo, hi))
    }

    /// Pointwise cost interval.
    pub fn eval(&self, u: f64) -> Interval {
        if u < self.tau {
            Interval::centered(self.approx.eval(u), self.eta_used)
        } else {
            let lo: f64 = self.tail.lower.iter().map(|t| t.eval(u).re).sum();
            let hi: f64 = self.tail.upper.iter().map(|t| t.eval(u).re).sum();
            Interval::new(lo.min(hi), hi.max(lo))
        }
    }
}

/// Chebyshev interpolant with the Lebesgue-inflated Jackson bound
/// `(1 + Lambda_n) 6 omega(tau/(2n))`.
pub fn cheb_interp(cost: &SampledCost, n: usize) -> PolyApprox {
    assert!(n >= 1);
    let tau = cost.tau;
    let cheb = cheb_from_poly_values(&|u| cost.eval(u), n, tau);
    let lebesgue = 1.0 + 2.0 / PI * ((n + 1) as f64).ln();
    let eta = (1.0 + lebesgue) * 6.0 * modulus(cost, tau / (2.0 * n as f64));
    let coeffs = if n <= 24 { cheb.to_monomial() } else { Vec::new() };
    PolyApprox { coeffs, cheb, eta, method: ApproxMethod::ChebInterp, tau }
}

/// Assembles the interval cost at order `n` with the chosen method.
pub fn interval_cost(
    cost: &SampledCost,
    n: usize,
    tail: TailEnvelope,
    method: ApproxMethod,
) -> IntervalCost {
    let approx = match method {
        ApproxMethod::Bernstein => bernstein(cost, n),
        ApproxMethod::NearBest => near_best(cost, n),
        ApproxMethod::ChebInterp => cheb_interp(cost, n),
    };
    let eta_used = approx.eta;
    IntervalCost { approx, tail, tau: cost.tau, eta_used }
}

/// Interval cost with the measured-and-inflated slack, used by the
/// dispatching loop where the modulus rates are hopelessly conservative.
pub fn interval_cost_tight(
    cost: &SampledCost,
    n: usize,
    tail: TailEnvelope,
    method: ApproxMethod,
) -> IntervalCost {
    let mut ic = interval_cost(cost, n, tail, method);
    ic.eta_used = ic.approx.eta_tight(cost);
    ic
}

/// Periodic cost: a continuous periodic `c~` with period `T`.
#[derive(Clone)]
pub struct PeriodicCost {
    pub evaluator: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub period: f64,
}

impl PeriodicCost {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, period: f64) -> Self {
        PeriodicCost { evaluator: Arc::new(f), period }
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.evaluator)(u)
    }

    /// Complex Fourier coefficients by the trapezoidal rule over one
    /// period (exact for bandlimited inputs).
    pub fn fourier(&self, n: usize) -> Vec<Complex64> {
        let m = 4096usize.max(8 * n);
        (0..=n)
            .map(|k| {
                let mut acc = cr(0.0);
                for j in 0..m {
                    let u = self.period * j as f64 / m as f64;
                    let phase =
                        Complex64::new(0.0, -2.0 * PI * k as f64 * j as f64 / m as f64).exp();
                    acc += cr(self.eval(u)) * phase;
                }
                acc / m as f64
            })
            .collect()
    }

    /// Modulus of continuity of the periodic function (wrap-around grid).
    pub fn modulus(&self, delta: f64) -> f64 {
        const GRID: usize = 4096;
        let mut worst: f64 = 0.0;
        let win = ((delta / self.period * GRID as f64).ceil() as usize).max(1);
        let vals: Vec<f64> =
            (0..GRID).map(|i| self.eval(self.period * i as f64 / GRID as f64)).collect();
        for i in 0..GRID {
            for o in 1..=win {
                worst = worst.max((vals[(i + o) % GRID] - vals[i]).abs());
            }
        }
        1.05 * worst
    }
}

/// Interval w-function for a periodic cost: the alpha_0 drift plus the
/// Korovkin-weighted oscillatory terms with `W*(i 2 k pi / T)`, slack
/// `6 omega(c~; T/(n pi))` on the cost.
pub fn periodic_bounds(
    spec: &QueueSpec,
    cost: &PeriodicCost,
    n: usize,
) -> Result<IntervalFn, WfError> {
    spec.stability_check()?;
    let t_per = cost.period;
    let alpha = cost.fourier(n);
    let rho_w = korovkin_weights(n);
    let scale = spec.lambda / (1.0 - spec.rho());
    let slack = 6.0 * cost.modulus(t_per / (n as f64 * PI));
    // Oscillatory exp-poly terms: for each k >= 1 the conjugate pair of
    // closed-form exponential rows at a = -i 2 k pi / T.
    let mut terms = vec![ExpPolyTerm::real(scale * alpha[0].re, 1, 0.0)];
    let mut mean_mid = alpha[0].re;
    for (k, &ak) in alpha.iter().enumerate().skip(1) {
        let a = Complex64::new(0.0, -2.0 * PI * k as f64 / t_per);
        let wa = pk_lst(spec, a)?;
        let coef = cr(rho_w[k] * scale) * ak * wa / a;
        // w-term: coef (1 - e^{-a u}) plus its conjugate.
        terms.push(ExpPolyTerm::new(coef + coef.conj(), 0, cr(0.0)));
        terms.push(ExpPolyTerm::new(-coef, 0, a));
        terms.push(ExpPolyTerm::new(-coef.conj(), 0, a.conj()));
        mean_mid += rho_w[k] * 2.0 * (ak * wa).re;
    }
    let mid = PiecewiseExpPoly::global(terms);
    let slack_term = PiecewiseExpPoly::global(vec![ExpPolyTerm::real(scale * slack, 1, 0.0)]);
    let lower = mid.add(&slack_term.scale(cr(-1.0)));
    let upper = mid.add(&slack_term);
    Ok(IntervalFn {
        lower,
        upper,
        mean: Interval::new(mean_mid - slack, mean_mid + slack),
    })
}
