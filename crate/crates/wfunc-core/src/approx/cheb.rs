//! Chebyshev polynomials: the monomial coefficient pipeline (with the
//! combinatorial closed form kept as a cross-check) and stable
//! Chebyshev-basis evaluation on a mapped interval.

use crate::numerics::binomial;

/// Monomial coefficients of `p_k` with `p_k(cos t) = cos(k t)`, by the
/// three-term recurrence `p_{k+1} = 2x p_k - p_{k-1}`.
pub fn cos_poly(k: usize) -> Vec<f64> {
    if k == 0 {
        return vec![1.0];
    }
    let mut prev = vec![1.0];
    let mut cur = vec![0.0, 1.0];
    for _ in 1..k {
        let mut next = vec![0.0; cur.len() + 1];
        for (j, c) in cur.iter().enumerate() {
            next[j + 1] += 2.0 * c;
        }
        for (j, c) in prev.iter().enumerate() {
            next[j] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// The closed-form coefficient `nu(k, q)` of `x^{2q}` (k even) or
/// `x^{2q+1}` (k odd) in `p_k`.
pub fn cos_poly_nu(k: usize, q: usize) -> f64 {
    if k == 0 {
        return if q == 0 { 1.0 } else { 0.0 };
    }
    let h = k / 2;
    let sign = if (h - q) % 2 == 0 { 1.0 } else { -1.0 };
    let mut acc = 0.0;
    for t in 0..=q {
        acc += binomial(k as u32, 2 * (h - t) as u32) * binomial((h - t) as u32, (h - q) as u32);
    }
    sign * acc
}

/// A polynomial in the Chebyshev basis on `[0, tau]`:
/// `f(u) = sum_k coeffs[k] T_k(2u/tau - 1)`.
#[derive(Debug, Clone)]
pub struct ChebPoly {
    pub coeffs: Vec<f64>,
    pub tau: f64,
}

impl ChebPoly {
    pub fn new(coeffs: Vec<f64>, tau: f64) -> Self {
        assert!(tau > 0.0);
        assert!(!coeffs.is_empty());
        ChebPoly { coeffs, tau }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Clenshaw evaluation (stable at any degree).
    pub fn eval(&self, u: f64) -> f64 {
        let x = 2.0 * u / self.tau - 1.0;
        let mut b1 = 0.0f64;
        let mut b2 = 0.0f64;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + x * b1 - b2
    }

    /// Antiderivative anchored at 0 in the same basis, using
    /// `∫ T_k = T_{k+1}/(2(k+1)) - T_{k-1}/(2(k-1))` scaled by `tau/2`.
    pub fn antiderivative(&self) -> ChebPoly {
        let n = self.coeffs.len();
        let mut out = vec![0.0f64; n + 1];
        let scale = self.tau / 2.0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            match k {
                0 => out[1] += c * scale,
                1 => {
                    out[0] += c * scale / 2.0;
                    out[2] += c * scale / 4.0;
                }
                _ => {
                    out[k + 1] += c * scale / (2.0 * (k as f64 + 1.0));
                    out[k - 1] -= c * scale / (2.0 * (k as f64 - 1.0));
                }
            }
        }
        let mut f = ChebPoly::new(out, self.tau);
        let at0 = f.eval(0.0);
        f.coeffs[0] -= at0;
        f
    }

    /// Conversion to monomial coefficients on `[0, tau]` (the combinatorial
    /// coefficient pipeline; unstable for large degree, kept for the
    /// piecewise closed-form route and cross-checks).
    pub fn to_monomial(&self) -> Vec<f64> {
        let n = self.degree();
        // p_t coefficients on x = 2u/tau - 1.
        let mut px = vec![0.0f64; n + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            for (t, &nu) in cos_poly(k).iter().enumerate() {
                px[t] += c * nu;
            }
        }
        // Substitute x = 2u/tau - 1.
        let mut out = vec![0.0f64; n + 1];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for t in 0..=(n - k) {
                acc += binomial((t + k) as u32, k as u32)
                    * if t % 2 == 0 { 1.0 } else { -1.0 }
                    * px[t + k];
            }
            *slot = (2.0f64 / self.tau).powi(k as i32) * acc;
        }
        out
    }
}
