//! Upper incomplete gamma function at nonnegative integer shape.

use num_complex::Complex64;

/// `Γ(q+1, x) = q! e^{-x} Σ_{j=0}^{q} x^j / j!` for integer `q >= 0`,
/// entire in the complex argument `x`.
pub fn upper_incomplete_gamma_int(q: u32, x: Complex64) -> Complex64 {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for j in 1..=q {
        term = term * x / (j as f64);
        sum += term;
    }
    factorial(q) * (-x).exp() * sum
}

/// `q!` as a float; exact for `q <= 22`, accurate to f64 for larger `q`.
pub fn factorial(q: u32) -> f64 {
    let mut f = 1.0f64;
    for j in 2..=q {
        f *= j as f64;
    }
    f
}

/// Binomial coefficient as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for j in 0..k {
        acc = acc * ((n - j) as f64) / ((j + 1) as f64);
    }
    acc
}
