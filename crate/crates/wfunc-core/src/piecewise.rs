//! w-functions for two-piece costs: a polynomial interior on `[0, tau)`
//! and an exp-polynomial tail on `[tau, inf)`.
//!
//! Exponential and Erlang service go through the finite-pole construction
//! (interior germ polynomial plus residue corrections at the mirrored
//! transform poles); deterministic service uses the geometric splitting of
//! the PK transform with residues at `-lambda` of cellwise degree
//! `mu(u) = ceil((tau-u)/d)`. All residues are extracted with jet
//! arithmetic; the hand-expanded closed forms live in the tests as oracles.

use num_complex::Complex64;

use crate::error::WfError;
use crate::exppoly::{canonicalize, ExpPolyTerm, Piece, PiecewiseExpPoly};
use crate::numerics::jet::{jet_of_exp_cs, Jet};
use crate::numerics::{binomial, factorial};
use crate::service::{QueueSpec, ServiceModel};
use crate::waiting::{dominant_pole, germ_at_point, germ_at_zero, pole_set, wstar_neg_jet};
use crate::wfn::{mean_cost_with_setup, WResult};

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Two-piece cost: `sum_j sigma[j] u^j` on `[0, tau)` and an
/// exp-polynomial tail on `[tau, inf)`.
#[derive(Debug, Clone)]
pub struct PiecewiseCostSpec {
    pub sigma: Vec<f64>,
    pub tail: Vec<ExpPolyTerm>,
    pub tau: f64,
    /// Explicit `c(0)`; defaults to the right limit `sigma[0]`.
    pub at_zero: Option<f64>,
}

impl PiecewiseCostSpec {
    pub fn new(sigma: Vec<f64>, tail: Vec<ExpPolyTerm>, tau: f64) -> Result<Self, WfError> {
        if !(tau > 0.0) {
            return Err(WfError::Domain("piecewise cost requires tau > 0".into()));
        }
        // Normalize every tail term to the tau-shifted basis
        // kappa (u-tau)^j e^{-a(u-tau)}; the transform and closed-form rows
        // below assume it.
        let mut rebased = Vec::new();
        for t in tail {
            let off = tau - t.u0;
            let efold = (-t.a * off).exp();
            for j in 0..=t.m {
                rebased.push(ExpPolyTerm::shifted(
                    t.kappa * cr(binomial(t.m, j) * off.powi((t.m - j) as i32)) * efold,
                    j,
                    t.a,
                    tau,
                ));
            }
        }
        canonicalize(&mut rebased);
        Ok(PiecewiseCostSpec { sigma, tail: rebased, tau, at_zero: None })
    }

    /// Pure tail `kappa u^k e^{-a u} 1[tau, inf)`.
    pub fn tail_only(kappa: Complex64, k: u32, a: Complex64, tau: f64) -> Result<Self, WfError> {
        PiecewiseCostSpec::new(Vec::new(), vec![ExpPolyTerm::new(kappa, k, a)], tau)
    }

    /// Step cost `1[tau, inf)`.
    pub fn step(tau: f64) -> Result<Self, WfError> {
        PiecewiseCostSpec::tail_only(cr(1.0), 0, cr(0.0), tau)
    }

    pub fn interior_degree(&self) -> usize {
        self.sigma.len().saturating_sub(1)
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u < self.tau {
            if u == 0.0 {
                if let Some(c0) = self.at_zero {
                    return c0;
                }
            }
            let mut acc = 0.0;
            for s in self.sigma.iter().rev() {
                acc = acc * u + s;
            }
            acc
        } else {
            self.tail.iter().map(|t| t.eval(u)).sum::<Complex64>().re
        }
    }

    /// Right limit of the cost at 0.
    pub fn right_at_zero(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    pub fn as_cost_pieces(&self) -> PiecewiseExpPoly {
        let interior: Vec<ExpPolyTerm> = self
            .sigma
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != 0.0)
            .map(|(j, s)| ExpPolyTerm::real(*s, j as u32, 0.0))
            .collect();
        PiecewiseExpPoly::from_pieces(vec![
            Piece { lo: 0.0, hi: Some(self.tau), terms: interior, constant: 0.0 },
            Piece { lo: self.tau, hi: None, terms: self.tail.clone(), constant: 0.0 },
        ])
        .expect("valid two-piece layout")
    }

    fn admissible(&self, pw: f64) -> Result<(), WfError> {
        for t in &self.tail {
            if !t.admissible(pw) {
                return Err(WfError::Admissibility(format!(
                    "tail pole -a = {} lies right of -p_W = {}",
                    -t.a, -pw
                )));
            }
        }
        Ok(())
    }
}

/// Basis pole term of the shifted cost transform `L1 - L0`: a summand
/// `coef / (s + a)^{r}` (the common `e^{-s tau}` shift is carried by the
/// contour argument, not the term).
#[derive(Debug, Clone, Copy)]
struct TransformTerm {
    coef: Complex64,
    a: Complex64,
    r: u32,
}

/// `L1(s, tau) - L0(s, tau)`: the transform of the cost jump at `tau`
/// shifted by `e^{s tau}` (poles at 0 from the interior, at `-a` from the
/// tail).
fn jump_transform_terms(pcost: &PiecewiseCostSpec) -> Vec<TransformTerm> {
    let mut terms = Vec::new();
    let tau = pcost.tau;
    for t in &pcost.tail {
        // tau-shifted tail term: transform kappa m!/(s+a)^{m+1} (times the
        // common e^{-s tau} handled by the contour shift).
        debug_assert_eq!(t.u0, tau);
        terms.push(TransformTerm { coef: t.kappa * factorial(t.m), a: t.a, r: t.m + 1 });
    }
    for (j, s) in pcost.sigma.iter().enumerate() {
        if *s == 0.0 {
            continue;
        }
        let base = cr(-s * factorial(j as u32));
        for t in 0..=j {
            terms.push(TransformTerm {
                coef: base * cr(tau.powi(t as i32) / factorial(t as u32)),
                a: cr(0.0),
                r: (j - t + 1) as u32,
            });
        }
    }
    terms
}

/// Jet of `1/(s + c)^r` at `s0` (with `-c` away from `s0`).
fn jet_inv_pow(c: Complex64, r: u32, s0: Complex64, order: usize) -> Result<Jet, WfError> {
    let base = s0 + c;
    if base.norm() < 1e-12 {
        return Err(WfError::SingularExpansion(
            "jet_inv_pow expanded at its own pole".into(),
        ));
    }
    // 1/(s+c)^r = sum_k C(r-1+k, k) (-(s-s0))^k / base^{r+k}.
    let mut coeffs = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let b = binomial(r - 1 + k as u32, k as u32);
        coeffs.push(cr(b) * (-Complex64::new(1.0, 0.0)).powu(k as u32) / base.powu(r + k as u32));
    }
    Ok(Jet::from_coeffs(coeffs))
}

/// Jet at `s0` of `(s - s0)^{d} * sum coef/(s+a)^r` where `d` is the
/// largest pole order of the sum at `s0`.
fn shifted_jump_jet(
    terms: &[TransformTerm],
    s0: Complex64,
    d: u32,
    order: usize,
) -> Result<Jet, WfError> {
    let mut acc = Jet::constant(cr(0.0), order);
    for t in terms {
        if (-t.a - s0).norm() < 1e-9 {
            // (s-s0)^{d}/(s+a)^r = (s-s0)^{d-r}: basis shift.
            let shift = (d - t.r) as usize;
            if shift <= order {
                let mut coeffs = vec![cr(0.0); order + 1];
                coeffs[shift] = t.coef;
                acc = acc.add(&Jet::from_coeffs(coeffs));
            }
        } else {
            let j = jet_inv_pow(t.a, t.r, s0, order)?.scale(t.coef);
            acc = acc.add(&j.shift_pow(d as usize).resized(order));
        }
    }
    Ok(acc)
}

/// Largest pole order of the jump transform at `s0`.
fn jump_pole_degree(terms: &[TransformTerm], s0: Complex64) -> u32 {
    terms
        .iter()
        .filter(|t| (-t.a - s0).norm() < 1e-9)
        .map(|t| t.r)
        .max()
        .unwrap_or(0)
}

/// Interior germ polynomial: the closed-form w' of the full polynomial
/// `sum_j sigma_j u^j` as exp-poly terms (a = 0).
fn interior_germ_terms(spec: &QueueSpec, sigma: &[f64]) -> Result<Vec<ExpPolyTerm>, WfError> {
    let n = sigma.len().saturating_sub(1);
    let germ = germ_at_zero(spec, n)?;
    let scale = spec.lambda / (1.0 - spec.rho());
    let mut terms = Vec::new();
    for q in 0..=n {
        let mut coef = 0.0;
        for (j, s) in sigma.iter().enumerate().skip(q) {
            coef += s * factorial(j as u32) * germ.coeff(j - q);
        }
        terms.push(ExpPolyTerm::real(scale * coef / factorial(q as u32), q as u32, 0.0));
    }
    Ok(terms)
}

/// The w' row on `(tau, inf)`: closed-form row of the (tau-shifted) tail
/// cost, `w'(u) = scale kappa m! sum_q yhat_{a:m-q} (u-u0)^q/q! e^{-a(u-u0)}`.
fn tail_row_terms(spec: &QueueSpec, tail: &[ExpPolyTerm]) -> Result<Vec<ExpPolyTerm>, WfError> {
    let scale = spec.lambda / (1.0 - spec.rho());
    let mut terms = Vec::new();
    for t in tail {
        if t.a.norm() == 0.0 {
            let germ = germ_at_zero(spec, t.m as usize)?;
            for q in 0..=t.m {
                terms.push(ExpPolyTerm::shifted(
                    t.kappa
                        * cr(scale * factorial(t.m) * germ.coeff((t.m - q) as usize)
                            / factorial(q)),
                    q,
                    cr(0.0),
                    t.u0,
                ));
            }
        } else {
            let germ = germ_at_point(spec, t.a, t.m as usize)?;
            for q in 0..=t.m {
                terms.push(ExpPolyTerm::shifted(
                    t.kappa
                        * cr(scale * factorial(t.m) / factorial(q))
                        * germ.coeff((t.m - q) as usize),
                    q,
                    t.a,
                    t.u0,
                ));
            }
        }
    }
    canonicalize(&mut terms);
    Ok(terms)
}

/// Converts a symbolic residue jet `G` at `s0` into exp-poly terms of
/// `sum_i G_{deg-1-i} (u-tau)^i / i! * e^{s0 (u-tau)}`, kept in the
/// tau-shifted basis.
fn residue_terms(g: &Jet, deg: usize, s0: Complex64, tau: f64) -> Vec<ExpPolyTerm> {
    let mut terms = Vec::new();
    for i in 0..deg {
        let coef = g.coeff(deg - 1 - i) / factorial(i as u32);
        if coef.norm() == 0.0 {
            continue;
        }
        terms.push(ExpPolyTerm::shifted(coef, i as u32, -s0, tau));
    }
    terms
}

/// Finite-pole construction: interior polynomial + tail under Exponential or
/// Erlang service.
pub fn w_piecewise_finite(spec: &QueueSpec, pcost: &PiecewiseCostSpec) -> Result<WResult, WfError> {
    spec.stability_check()?;
    if matches!(spec.model, ServiceModel::Deterministic { .. }) {
        return Err(WfError::UnsupportedModel(
            "w_piecewise_finite requires a finite pole set; use w_piecewise_md1".into(),
        ));
    }
    let pw = dominant_pole(spec)?;
    pcost.admissible(pw)?;
    let scale = spec.lambda / (1.0 - spec.rho());
    let jump = jump_transform_terms(pcost);
    // Interior piece [0, tau): germ polynomial + corrections at the
    // mirrored poles of W*(-s) with B = L0 - L1.
    let mut interior = interior_germ_terms(spec, &pcost.sigma)?;
    let poles = pole_set(spec)?;
    for pole in &poles.poles {
        let s0 = -pole.location;
        let d = pole.degree;
        // varpi jet: coefficients of (s-s0)^d W*(-s) at s0, order d-1.
        let varpi = Jet::from_coeffs(pole.residues.clone());
        // B = L0 - L1 = -(L1 - L0): analytic at s0.
        let b = shifted_jump_jet(&jump, s0, 0, d - 1)?.scale(cr(-1.0));
        let g = varpi.mul(&b).scale(cr(scale));
        interior.extend(residue_terms(&g, d, s0, pcost.tau));
    }
    canonicalize(&mut interior);
    // Tail piece [tau, inf).
    let tail = tail_row_terms(spec, &pcost.tail)?;
    let wprime = PiecewiseExpPoly::from_pieces(vec![
        Piece { lo: 0.0, hi: Some(pcost.tau), terms: interior, constant: 0.0 },
        Piece { lo: pcost.tau, hi: None, terms: tail, constant: 0.0 },
    ])?;
    finish(spec, pcost, wprime)
}

fn finish(
    spec: &QueueSpec,
    pcost: &PiecewiseCostSpec,
    wprime: PiecewiseExpPoly,
) -> Result<WResult, WfError> {
    let w = wprime.antiderivative();
    // Stationary mean: cbar = (1-rho)(c(0) - c+(0)) + (1-rho)/lambda w'(0+).
    let rho = spec.rho();
    let jump0 = pcost.at_zero.map(|c0| c0 - pcost.right_at_zero()).unwrap_or(0.0);
    let stationary = cr((1.0 - rho) * jump0 + (1.0 - rho) / spec.lambda * wprime.eval(0.0));
    let mean_cost = mean_cost_with_setup(spec, stationary, &w)?;
    Ok(WResult { w, wprime, mean_cost, spec: *spec })
}

/// Step-cost closed form `1[tau, inf)` under deterministic
/// service, built cell by cell.
pub fn w_step_md1(spec: &QueueSpec, tau: f64) -> Result<WResult, WfError> {
    spec.stability_check()?;
    let ServiceModel::Deterministic { d } = spec.model else {
        return Err(WfError::UnsupportedModel("w_step_md1 requires deterministic service".into()));
    };
    if !(tau > 0.0) {
        return Err(WfError::Domain("w_step_md1 requires tau > 0".into()));
    }
    let lambda = spec.lambda;
    let rho = lambda * d;
    let drift = lambda / (1.0 - rho);
    let mu0 = ((tau / d).ceil() as usize).max(1);
    // w(tau) from the closed-form expression.
    let mut w_tau = drift * tau + mu0 as f64;
    for k in 0..mu0 {
        let x = lambda * (k as f64 * d - tau);
        let mut inner = 0.0;
        let mut pow = 1.0;
        for q in 0..=k {
            if q > 0 {
                pow *= x / q as f64;
            }
            inner += pow;
        }
        w_tau -= (-x).exp() * inner;
    }
    // Cell boundaries: tau - m d for m = mu0..1, clamped at 0.
    let mut pieces = Vec::new();
    for m in (1..=mu0).rev() {
        let lo = (tau - m as f64 * d).max(0.0);
        let hi = tau - (m - 1) as f64 * d;
        if hi <= lo {
            continue;
        }
        // w(u) = [w(tau) - drift tau - m] + drift u
        //        + sum_{k=0}^{m-1} e^{-lambda(u+kd-tau)} sum_{q<=k} (lambda(u+kd-tau))^q/q!
        let mut terms = vec![ExpPolyTerm::real(drift, 1, 0.0)];
        let constant = w_tau - drift * tau - m as f64;
        for k in 0..m {
            // e^{-lambda(u+kd-tau)} sum_{q<=k} (lambda(u+kd-tau))^q/q! in the
            // basis shifted to u0 = tau - kd.
            let u0 = tau - k as f64 * d;
            for q in 0..=k as u32 {
                terms.push(ExpPolyTerm::shifted(
                    cr(lambda.powi(q as i32) / factorial(q)),
                    q,
                    cr(lambda),
                    u0,
                ));
            }
        }
        canonicalize(&mut terms);
        pieces.push(Piece { lo, hi: Some(hi), terms, constant });
    }
    // Final piece [tau, inf): w = w(tau) + drift (u - tau).
    pieces.push(Piece {
        lo: tau,
        hi: None,
        terms: vec![ExpPolyTerm::real(drift, 1, 0.0)],
        constant: w_tau - drift * tau,
    });
    let w = PiecewiseExpPoly::from_pieces(pieces)?;
    let wprime = w.derivative();
    let stationary = cr((1.0 - rho) / lambda * wprime.eval(0.0));
    let mean_cost = mean_cost_with_setup(spec, stationary, &w)?;
    Ok(WResult { w, wprime, mean_cost, spec: *spec })
}

/// Cap on the per-cell pole degree of the M/D/1 split.
pub const MD1_CELL_CAP: usize = 2048;

/// Deterministic-service construction: cellwise residues of the
/// split `W*(-s) = Y(s)^mu W*(-s) + remainder`, `Y(s) = lambda e^{sd}/(s+lambda)`.
pub fn w_piecewise_md1(spec: &QueueSpec, pcost: &PiecewiseCostSpec) -> Result<WResult, WfError> {
    spec.stability_check()?;
    let ServiceModel::Deterministic { d } = spec.model else {
        return Err(WfError::UnsupportedModel("w_piecewise_md1 requires deterministic service".into()));
    };
    let pw = dominant_pole(spec)?;
    pcost.admissible(pw)?;
    let lambda = spec.lambda;
    let tau = pcost.tau;
    let scale = lambda / (1.0 - spec.rho());
    let mu0 = ((tau / d).ceil() as usize).max(1);
    if mu0 > MD1_CELL_CAP {
        return Err(WfError::CellOverflow { mu: mu0, cap: MD1_CELL_CAP });
    }
    let jump = jump_transform_terms(pcost);
    let germ_terms = interior_germ_terms(spec, &pcost.sigma)?;
    // Distinct pole sites of B = L1 - L0: 0 (interior), -a (tail), plus
    // -lambda from the split factor.
    let mut sites: Vec<Complex64> = Vec::new();
    for t in &jump {
        let s0 = -t.a;
        if !sites.iter().any(|s| (s - s0).norm() < 1e-9) {
            sites.push(s0);
        }
    }
    if !sites.iter().any(|s| (s + lambda).norm() < 1e-9) {
        sites.push(cr(-lambda));
    }
    let mut pieces: Vec<Piece> = Vec::new();
    for m in (1..=mu0).rev() {
        let lo = (tau - m as f64 * d).max(0.0);
        let hi = tau - (m - 1) as f64 * d;
        if hi <= lo {
            continue;
        }
        let mut terms = germ_terms.clone();
        for &s0 in &sites {
            let d_psi = if (s0 + lambda).norm() < 1e-9 { m } else { 0 };
            let d_b = jump_pole_degree(&jump, s0) as usize;
            let deg = d_psi + d_b;
            if deg == 0 {
                continue;
            }
            let order = deg - 1;
            // Psi^l_m(-s) e^{s(u-tau)} = lambda^m e^{smd}/(s+lambda)^m
            //   W*(-s) e^{s(u-tau)}. At the -lambda site the factor
            // e^{smd} is absorbed into the symbolic exponential,
            // e^{smd} e^{s(u-tau)} = e^{s(u-u0)} with u0 = tau - m d, so
            // the jet never convolves two large opposing exponentials.
            let wjet = wstar_neg_jet(spec, s0, order)?;
            let (psi, u0) = if d_psi > 0 {
                // (s+lambda)^m cancelled analytically against the split.
                (wjet.scale(cr(lambda.powi(m as i32))), tau - m as f64 * d)
            } else {
                let expo = jet_of_exp_cs(cr(d * m as f64), s0, order)
                    .scale(cr(lambda.powi(m as i32)));
                let invl = jet_inv_pow(cr(lambda), m as u32, s0, order)?;
                (expo.mul(&invl).mul(&wjet), tau)
            };
            let b = shifted_jump_jet(&jump, s0, d_b as u32, order)?;
            let g = psi.mul(&b).scale(cr(scale));
            terms.extend(residue_terms(&g, deg, s0, u0));
        }
        canonicalize(&mut terms);
        pieces.push(Piece { lo, hi: Some(hi), terms, constant: 0.0 });
    }
    pieces.push(Piece {
        lo: tau,
        hi: None,
        terms: tail_row_terms(spec, &pcost.tail)?,
        constant: 0.0,
    });
    let wprime = PiecewiseExpPoly::from_pieces(pieces)?;
    finish(spec, pcost, wprime)
}

/// Routes a piecewise cost to the model's construction.
pub fn w_piecewise(spec: &QueueSpec, pcost: &PiecewiseCostSpec) -> Result<WResult, WfError> {
    match spec.model {
        ServiceModel::Deterministic { .. } => w_piecewise_md1(spec, pcost),
        _ => w_piecewise_finite(spec, pcost),
    }
}
