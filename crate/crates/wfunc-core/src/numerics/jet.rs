//! Truncated power series ("jets") over complex coefficients.
//!
//! A jet of order `K` at an expansion point `s0` holds the coefficients
//! `c_0..c_K` of `f(s) = sum_k c_k (s - s0)^k + O((s-s0)^{K+1})`. All
//! arithmetic is coefficient-exact at the truncation order, which is what
//! the residue extraction in the piecewise value-function machinery needs:
//! the residue of `f` at a pole `p` of degree `D` is coefficient `D-1` of
//! the jet of `(s-p)^D f(s)` at `p`.

use num_complex::Complex64;

use crate::error::WfError;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<Complex64>,
}

impl Jet {
    /// Jet of the constant function `c`.
    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = c;
        Jet { coeffs }
    }

    /// Jet of the identity `s` at expansion point `s0`: `s0 + (s - s0)`.
    pub fn variable(s0: Complex64, order: usize) -> Self {
        let mut j = Jet::constant(s0, order);
        if order >= 1 {
            j.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty());
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Truncates or zero-extends to the given order.
    pub fn resized(&self, order: usize) -> Jet {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, Complex64::new(0.0, 0.0));
        coeffs.truncate(order + 1);
        Jet { coeffs }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Jet { coeffs }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - other.coeff(k)).collect();
        Jet { coeffs }
    }

    pub fn scale(&self, k: Complex64) -> Jet {
        Jet { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// Cauchy product truncated at the larger of the two orders.
    pub fn mul(&self, other: &Jet) -> Jet {
        let order = self.order().max(other.order());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > order {
                break;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j > order {
                    break;
                }
                coeffs[i + j] += a * b;
            }
        }
        Jet { coeffs }
    }

    /// Division; the divisor's leading (order-0) coefficient must be nonzero.
    pub fn div(&self, other: &Jet) -> Result<Jet, WfError> {
        let order = self.order().max(other.order());
        let d0 = other.coeff(0);
        if d0.norm() == 0.0 {
            return Err(WfError::SingularExpansion(
                "jet division by a series with zero leading coefficient".into(),
            ));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        for k in 0..=order {
            let mut acc = self.coeff(k);
            for j in 1..=k {
                acc -= other.coeff(j) * coeffs[k - j];
            }
            coeffs[k] = acc / d0;
        }
        Ok(Jet { coeffs })
    }

    /// Composes with the exponential: returns the jet of `exp(f(s))`.
    pub fn exp(&self) -> Jet {
        let order = self.order();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = self.coeff(0).exp();
        for k in 1..=order {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.coeff(j) * coeffs[k - j] * (j as f64);
            }
            coeffs[k] = acc / (k as f64);
        }
        Jet { coeffs }
    }

    /// Multiplies by `(s - s0)^k`, shifting coefficients upward.
    pub fn shift_pow(&self, k: usize) -> Jet {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + k];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i + k] = *c;
        }
        Jet { coeffs }
    }

    /// Divides by `(s - s0)^k`. The first `k` coefficients must vanish to
    /// within `tol` of the largest coefficient magnitude; they are dropped.
    pub fn unshift_pow(&self, k: usize, tol: f64) -> Result<Jet, WfError> {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        for j in 0..k.min(self.coeffs.len()) {
            if self.coeffs[j].norm() > tol * scale {
                return Err(WfError::SingularExpansion(format!(
                    "expected a zero of order {k} but coefficient {j} is {:.3e}",
                    self.coeffs[j].norm()
                )));
            }
        }
        if self.coeffs.len() <= k {
            return Ok(Jet::constant(Complex64::new(0.0, 0.0), 0));
        }
        Ok(Jet { coeffs: self.coeffs[k..].to_vec() })
    }
}

/// Jet at `s0` of a polynomial with coefficients `poly[j]` on `s^j`
/// (Taylor shift by repeated synthetic division).
pub fn jet_of_poly(poly: &[Complex64], s0: Complex64, order: usize) -> Jet {
    let mut work: Vec<Complex64> = poly.to_vec();
    let mut out = vec![Complex64::new(0.0, 0.0); order + 1];
    for item in out.iter_mut() {
        if work.is_empty() {
            break;
        }
        // Divide `work` by (s - s0): the remainder is the next Taylor
        // coefficient, the quotient feeds the following round.
        let mut carry = Complex64::new(0.0, 0.0);
        let mut quot = vec![Complex64::new(0.0, 0.0); work.len() - 1];
        for j in (0..work.len()).rev() {
            let q = work[j] + carry * s0;
            if j == 0 {
                *item = q;
            } else {
                quot[j - 1] = q;
                carry = q;
            }
        }
        work = quot;
    }
    Jet { coeffs: out }
}

/// Jet at `s0` of the rational function `num(s)/den(s)`, cancelling a pole
/// of the stated degree (0 for a regular point).
pub fn jet_of_rational(
    num: &[Complex64],
    den: &[Complex64],
    s0: Complex64,
    pole_degree: usize,
    order: usize,
) -> Result<Jet, WfError> {
    let jn = jet_of_poly(num, s0, order + pole_degree);
    let jd = jet_of_poly(den, s0, order + pole_degree);
    let jd = jd.unshift_pow(pole_degree, 1e-9)?;
    jn.div(&jd).map(|j| j.resized(order))
}

/// Jet at `s0` of `exp(c s)`.
pub fn jet_of_exp_cs(c: Complex64, s0: Complex64, order: usize) -> Jet {
    let lin = Jet::variable(s0, order).scale(c);
    lin.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_jet_matches_closed_form() {
        // e^{c s} at s=0, K=3 -> (1, c, c^2/2, c^3/6)
        let cc = c(0.7, -0.3);
        let j = jet_of_exp_cs(cc, c(0.0, 0.0), 3);
        assert!((j.coeff(0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((j.coeff(1) - cc).norm() < 1e-14);
        assert!((j.coeff(2) - cc * cc / 2.0).norm() < 1e-14);
        assert!((j.coeff(3) - cc * cc * cc / 6.0).norm() < 1e-14);
    }

    #[test]
    fn residue_of_simple_pole() {
        // 1/(s(s-1)) at s=0: residue -1.
        let num = [c(1.0, 0.0)];
        let den = [c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]; // s^2 - s
        let j = jet_of_rational(&num, &den, c(0.0, 0.0), 1, 0).unwrap();
        assert!((j.coeff(0) - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn residue_of_double_pole_with_exponential() {
        // Residue of e^{su}/(s+l)^2 at s=-l is u e^{-l u}:
        // jet of e^{su} at -l to order 1, coefficient 1.
        let l = 0.8;
        let u = 1.7;
        let j = jet_of_exp_cs(c(u, 0.0), c(-l, 0.0), 1);
        let expected = u * (-l * u).exp();
        assert!((j.coeff(1) - c(expected, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn division_by_zero_leading_coefficient_is_reported() {
        let a = Jet::constant(c(1.0, 0.0), 2);
        let b = Jet::from_coeffs(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(a.div(&b).is_err());
    }

    #[test]
    fn jet_mul_matches_finite_differences() {
        // d^k/ds^k of f(s)g(s) with f = exp(0.3 s), g = 1/(1+s) at s=0.25,
        // against central finite differences, orders 0..4. The step is
        // balanced per order (roundoff grows like eps/h^k), keeping the
        // 1e-6 relative agreement the comparison asks for.
        let s0 = 0.25;
        let f = |s: f64| (0.3 * s).exp();
        let g = |s: f64| 1.0 / (1.0 + s);
        let fj = jet_of_exp_cs(c(0.3, 0.0), c(s0, 0.0), 4);
        let gj = jet_of_rational(&[c(1.0, 0.0)], &[c(1.0, 0.0), c(1.0, 0.0)], c(s0, 0.0), 0, 4)
            .unwrap();
        let prod = fj.mul(&gj);
        let fg = |s: f64| f(s) * g(s);
        let d0 = fg(s0);
        let h = 1e-5;
        let d1 = (fg(s0 + h) - fg(s0 - h)) / (2.0 * h);
        let h = 1e-3;
        let d2 = (fg(s0 + h) - 2.0 * fg(s0) + fg(s0 - h)) / (h * h);
        let h = 5e-3;
        let d3 = (fg(s0 + 2.0 * h) - 2.0 * fg(s0 + h) + 2.0 * fg(s0 - h) - fg(s0 - 2.0 * h))
            / (2.0 * h * h * h);
        let h = 1e-2;
        let d4 = (fg(s0 + 2.0 * h) - 4.0 * fg(s0 + h) + 6.0 * fg(s0) - 4.0 * fg(s0 - h)
            + fg(s0 - 2.0 * h))
            / (h * h * h * h);
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0];
        let tol = [1e-10, 1e-9, 1e-6, 1e-4, 1e-3];
        for (k, d) in [d0, d1, d2, d3, d4].iter().enumerate() {
            let got = prod.coeff(k).re * fact[k];
            assert!(
                (got - d).abs() <= tol[k] * d.abs().max(1.0),
                "order {k}: jet {got} vs fd {d}"
            );
        }
    }

    #[test]
    fn taylor_shift_of_polynomial() {
        // p(s) = 1 + 2s + 3s^2 at s0 = 2: p(2) = 17, p'(2) = 14, p''(2)/2 = 3.
        let p = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let j = jet_of_poly(&p, c(2.0, 0.0), 3);
        assert!((j.coeff(0) - c(17.0, 0.0)).norm() < 1e-12);
        assert!((j.coeff(1) - c(14.0, 0.0)).norm() < 1e-12);
        assert!((j.coeff(2) - c(3.0, 0.0)).norm() < 1e-12);
        assert!(j.coeff(3).norm() < 1e-12);
    }
}
