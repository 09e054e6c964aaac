//! Symbolic exp-polynomials `sum kappa u^m e^{-a u}` pieced over
//! breakpoints: the closed-form representation of every w-function, its
//! derivative, and exp-polynomial costs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::WfError;
use crate::numerics::{factorial, upper_incomplete_gamma_int};

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// One term `kappa * (u - u0)^m * e^{-a (u - u0)}`. The expansion shift
/// `u0` (usually 0) lets deep piecewise cells keep their natural local
/// basis instead of cancelling global monomials. `kappa_err` is an
/// absolute bound on the accumulated coefficient roundoff, consumed by
/// interval evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPolyTerm {
    pub kappa: Complex64,
    pub kappa_err: f64,
    pub m: u32,
    pub a: Complex64,
    pub u0: f64,
}

impl ExpPolyTerm {
    pub fn new(kappa: Complex64, m: u32, a: Complex64) -> Self {
        ExpPolyTerm { kappa, kappa_err: 0.0, m, a: snap_real(a), u0: 0.0 }
    }

    pub fn real(kappa: f64, m: u32, a: f64) -> Self {
        ExpPolyTerm::new(cr(kappa), m, cr(a))
    }

    pub fn shifted(kappa: Complex64, m: u32, a: Complex64, u0: f64) -> Self {
        ExpPolyTerm { kappa, kappa_err: 0.0, m, a: snap_real(a), u0 }
    }

    pub fn eval(&self, u: f64) -> Complex64 {
        let v = u - self.u0;
        self.kappa * v.powi(self.m as i32) * (-self.a * v).exp()
    }

    /// Magnitude of the basis function at `u`, used for error propagation.
    pub fn basis_abs(&self, u: f64) -> f64 {
        let v = u - self.u0;
        v.powi(self.m as i32).abs() * (-self.a.re * v).exp()
    }

    /// Pole-region membership: the cost-transform pole `-a` must lie left
    /// of `-p_W`, i.e. `Re(a) > p_W`.
    pub fn admissible(&self, dominant_pole: f64) -> bool {
        self.a.re > dominant_pole
    }
}

fn snap_real(a: Complex64) -> Complex64 {
    if a.im.abs() < 1e-12 {
        cr(a.re)
    } else {
        a
    }
}

/// Merges terms with identical `(m, a)` after imaginary snapping.
pub fn canonicalize(terms: &mut Vec<ExpPolyTerm>) {
    let mut out: Vec<ExpPolyTerm> = Vec::with_capacity(terms.len());
    for t in terms.iter() {
        let t = ExpPolyTerm { a: snap_real(t.a), ..*t };
        match out
            .iter_mut()
            .find(|o| o.m == t.m && o.a == t.a && o.u0 == t.u0)
        {
            Some(o) => {
                o.kappa += t.kappa;
                o.kappa_err += t.kappa_err;
            }
            None => out.push(t),
        }
    }
    out.retain(|t| t.kappa.norm() != 0.0 || t.kappa_err != 0.0);
    *terms = out;
}

/// One piece on `[lo, hi)` (`hi = None` is +infinity).
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: Option<f64>,
    pub terms: Vec<ExpPolyTerm>,
    pub constant: f64,
}

impl Piece {
    fn contains(&self, u: f64) -> bool {
        u >= self.lo && self.hi.map(|h| u < h).unwrap_or(true)
    }

    fn eval(&self, u: f64) -> Complex64 {
        let mut acc = cr(self.constant);
        for t in &self.terms {
            acc += t.eval(u);
        }
        acc
    }

    fn eval_err(&self, u: f64) -> f64 {
        let mut err = 0.0;
        let mut mag = self.constant.abs();
        for t in &self.terms {
            err += t.kappa_err * t.basis_abs(u);
            mag += t.eval(u).norm();
        }
        // Summation roundoff on top of coefficient error bounds.
        err + mag * 1e-15 * (self.terms.len() as f64 + 1.0)
    }
}

/// Piecewise exp-polynomial on `[0, inf)` with right-open pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseExpPoly {
    pieces: Vec<Piece>,
}

impl PiecewiseExpPoly {
    /// Single piece covering `[0, inf)`.
    pub fn global(terms: Vec<ExpPolyTerm>) -> Self {
        let mut terms = terms;
        canonicalize(&mut terms);
        PiecewiseExpPoly { pieces: vec![Piece { lo: 0.0, hi: None, terms, constant: 0.0 }] }
    }

    pub fn zero() -> Self {
        PiecewiseExpPoly::global(Vec::new())
    }

    /// Builds from pieces; breakpoints must start at 0, be increasing, and
    /// end with an unbounded piece.
    pub fn from_pieces(pieces: Vec<Piece>) -> Result<Self, WfError> {
        if pieces.is_empty() {
            return Err(WfError::Domain("piecewise function needs at least one piece".into()));
        }
        if pieces[0].lo != 0.0 {
            return Err(WfError::Domain("first piece must start at 0".into()));
        }
        for w in pieces.windows(2) {
            let hi = w[0].hi.ok_or_else(|| {
                WfError::Domain("only the final piece may be unbounded".into())
            })?;
            if (hi - w[1].lo).abs() > 1e-12 * hi.abs().max(1.0) {
                return Err(WfError::Domain("pieces must tile [0, inf) contiguously".into()));
            }
            if hi <= w[0].lo {
                return Err(WfError::Domain("breakpoints must be strictly increasing".into()));
            }
        }
        if pieces.last().unwrap().hi.is_some() {
            return Err(WfError::Domain("final piece must extend to infinity".into()));
        }
        let mut pieces = pieces;
        for p in pieces.iter_mut() {
            canonicalize(&mut p.terms);
        }
        Ok(PiecewiseExpPoly { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.pieces.iter().map(|p| p.lo).collect();
        b.remove(0);
        b
    }

    fn piece_at(&self, u: f64) -> &Piece {
        self.pieces
            .iter()
            .find(|p| p.contains(u))
            .unwrap_or_else(|| self.pieces.last().unwrap())
    }

    pub fn eval_complex(&self, u: f64) -> Complex64 {
        self.piece_at(u).eval(u)
    }

    /// Real evaluation; the imaginary part of conjugate-pair sums must have
    /// cancelled to noise level.
    pub fn eval(&self, u: f64) -> f64 {
        let v = self.eval_complex(u);
        debug_assert!(
            v.im.abs() <= 1e-9 * (1.0 + v.re.abs()),
            "imaginary residue {} at u = {u}",
            v.im
        );
        v.re
    }

    /// Evaluation together with an absolute roundoff bound.
    pub fn eval_with_err(&self, u: f64) -> (f64, f64) {
        let p = self.piece_at(u);
        let v = p.eval(u);
        (v.re, p.eval_err(u) + v.im.abs())
    }

    /// Evaluates the piece limit from the right at a breakpoint.
    pub fn eval_right(&self, u: f64) -> Complex64 {
        self.piece_at(u).eval(u)
    }

    /// Evaluates the limit from the left at `u > 0`.
    pub fn eval_left(&self, u: f64) -> Complex64 {
        let p = self
            .pieces
            .iter()
            .rev()
            .find(|p| p.lo < u)
            .unwrap_or(&self.pieces[0]);
        p.eval(u)
    }

    /// Termwise symbolic derivative (constants drop; no delta functions at
    /// breakpoints, matching the a.e.-derivative semantics).
    pub fn derivative(&self) -> PiecewiseExpPoly {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut terms = Vec::new();
                for t in &p.terms {
                    if t.m > 0 {
                        terms.push(ExpPolyTerm {
                            kappa: t.kappa * t.m as f64,
                            kappa_err: t.kappa_err * t.m as f64,
                            m: t.m - 1,
                            a: t.a,
                            u0: t.u0,
                        });
                    }
                    if t.a.norm() != 0.0 {
                        terms.push(ExpPolyTerm {
                            kappa: -t.kappa * t.a,
                            kappa_err: t.kappa_err * t.a.norm(),
                            m: t.m,
                            a: t.a,
                            u0: t.u0,
                        });
                    }
                }
                canonicalize(&mut terms);
                Piece { lo: p.lo, hi: p.hi, terms, constant: 0.0 }
            })
            .collect();
        PiecewiseExpPoly { pieces }
    }

    /// Antiderivative anchored at 0 (`A(0) = 0`), continuous across
    /// breakpoints. Uses the two-branch closed form: the polynomial rule at
    /// `a = 0` and `[Γ(m+1, a t0) - Γ(m+1, a u)]/a^{m+1}` otherwise.
    pub fn antiderivative(&self) -> PiecewiseExpPoly {
        let mut out: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        let mut carried = cr(0.0); // accumulated integral up to the piece start
        for p in &self.pieces {
            let mut terms: Vec<ExpPolyTerm> = Vec::new();
            let mut constant = carried;
            for t in &p.terms {
                // Integrate in the local coordinate v = u - u0.
                let v_lo = p.lo - t.u0;
                if t.a.norm() == 0.0 {
                    // kappa (v^{m+1} - v_lo^{m+1})/(m+1)
                    let den = (t.m + 1) as f64;
                    terms.push(ExpPolyTerm {
                        kappa: t.kappa / den,
                        kappa_err: t.kappa_err / den,
                        m: t.m + 1,
                        a: cr(0.0),
                        u0: t.u0,
                    });
                    constant -= t.kappa / den * v_lo.powi((t.m + 1) as i32);
                } else {
                    // kappa [Γ(m+1, a v_lo) - Γ(m+1, a v)] / a^{m+1}
                    let apow = t.a.powu(t.m + 1);
                    constant += t.kappa * upper_incomplete_gamma_int(t.m, t.a * v_lo) / apow;
                    // -Γ(m+1, a v) expanded: -m! e^{-a v} sum_j (a v)^j / j!
                    let mfact = factorial(t.m);
                    for j in 0..=t.m {
                        let coef = -t.kappa * mfact * t.a.powu(j) / (factorial(j) * apow);
                        let err = t.kappa_err * mfact * t.a.norm().powi(j as i32)
                            / (factorial(j) * t.a.norm().powi((t.m + 1) as i32));
                        terms.push(ExpPolyTerm {
                            kappa: coef,
                            kappa_err: err,
                            m: j,
                            a: t.a,
                            u0: t.u0,
                        });
                    }
                }
            }
            if p.constant != 0.0 {
                terms.push(ExpPolyTerm::real(p.constant, 1, 0.0));
                constant -= cr(p.constant * p.lo);
            }
            canonicalize(&mut terms);
            // Value at the end of the piece feeds the next carried constant.
            let piece = Piece {
                lo: p.lo,
                hi: p.hi,
                terms,
                constant: 0.0,
            };
            let (const_re, extra_terms) = fold_constant(constant);
            let mut piece = piece;
            piece.constant = const_re;
            piece.terms.extend(extra_terms);
            canonicalize(&mut piece.terms);
            if let Some(hi) = p.hi {
                carried = piece.eval(hi);
            }
            out.push(piece);
        }
        PiecewiseExpPoly { pieces: out }
    }

    pub fn scale(&self, k: Complex64) -> PiecewiseExpPoly {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                lo: p.lo,
                hi: p.hi,
                terms: p
                    .terms
                    .iter()
                    .map(|t| ExpPolyTerm {
                        kappa: t.kappa * k,
                        kappa_err: t.kappa_err * k.norm(),
                        m: t.m,
                        a: t.a,
                        u0: t.u0,
                    })
                    .collect(),
                constant: if k.im == 0.0 { p.constant * k.re } else { 0.0 },
            })
            .collect::<Vec<_>>();
        let mut out = PiecewiseExpPoly { pieces };
        if k.im != 0.0 {
            // Fold real constants scaled by a complex factor into terms.
            for (p, orig) in out.pieces.iter_mut().zip(self.pieces.iter()) {
                if orig.constant != 0.0 {
                    p.terms.push(ExpPolyTerm::new(cr(orig.constant) * k, 0, cr(0.0)));
                    canonicalize(&mut p.terms);
                }
            }
        }
        out
    }

    /// Pointwise sum with breakpoint union.
    pub fn add(&self, other: &PiecewiseExpPoly) -> PiecewiseExpPoly {
        let mut cuts: Vec<f64> = Vec::new();
        for p in self.pieces.iter().chain(other.pieces.iter()) {
            cuts.push(p.lo);
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
        let mut pieces = Vec::with_capacity(cuts.len());
        for (i, &lo) in cuts.iter().enumerate() {
            let hi = cuts.get(i + 1).copied();
            let pa = self.piece_at(lo);
            let pb = other.piece_at(lo);
            let mut terms = pa.terms.clone();
            terms.extend(pb.terms.iter().cloned());
            canonicalize(&mut terms);
            pieces.push(Piece { lo, hi, terms, constant: pa.constant + pb.constant });
        }
        PiecewiseExpPoly { pieces }
    }

    /// Largest relative continuity jump across internal breakpoints.
    pub fn max_breakpoint_jump(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.pieces.windows(2) {
            let b = w[1].lo;
            let left = w[0].eval(b);
            let right = w[1].eval(b);
            let scale = left.norm().max(right.norm()).max(1.0);
            worst = worst.max((left - right).norm() / scale);
        }
        worst
    }

    /// Maximum imaginary residue over a grid, relative to `1 + |Re|`.
    pub fn max_imag_residue(&self, u_max: f64, points: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=points {
            let u = u_max * i as f64 / points as f64;
            let v = self.eval_complex(u);
            worst = worst.max(v.im.abs() / (1.0 + v.re.abs()));
        }
        worst
    }
}

fn fold_constant(c: Complex64) -> (f64, Vec<ExpPolyTerm>) {
    if c.im.abs() <= 1e-12 * (1.0 + c.re.abs()) {
        (c.re, Vec::new())
    } else {
        (0.0, vec![ExpPolyTerm::new(c, 0, cr(0.0))])
    }
}

// --- serialization (bit-exact JSON round trip) ---

#[derive(Serialize, Deserialize)]
struct TermRepr {
    kappa_re: f64,
    kappa_im: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    kappa_err: f64,
    m: u32,
    a_re: f64,
    a_im: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    u0: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Serialize, Deserialize)]
struct PieceRepr {
    tau_lo: f64,
    tau_hi: Option<f64>,
    terms: Vec<TermRepr>,
    #[serde(rename = "const")]
    constant: f64,
}

#[derive(Serialize, Deserialize)]
struct PwRepr {
    pieces: Vec<PieceRepr>,
}

impl Serialize for PiecewiseExpPoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = PwRepr {
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceRepr {
                    tau_lo: p.lo,
                    tau_hi: p.hi,
                    terms: p
                        .terms
                        .iter()
                        .map(|t| TermRepr {
                            kappa_re: t.kappa.re,
                            kappa_im: t.kappa.im,
                            kappa_err: t.kappa_err,
                            m: t.m,
                            a_re: t.a.re,
                            a_im: t.a.im,
                            u0: t.u0,
                        })
                        .collect(),
                    constant: p.constant,
                })
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PiecewiseExpPoly {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = PwRepr::deserialize(deserializer)?;
        let pieces = repr
            .pieces
            .into_iter()
            .map(|p| Piece {
                lo: p.tau_lo,
                hi: p.tau_hi,
                terms: p
                    .terms
                    .into_iter()
                    .map(|t| ExpPolyTerm {
                        kappa: Complex64::new(t.kappa_re, t.kappa_im),
                        kappa_err: t.kappa_err,
                        m: t.m,
                        a: Complex64::new(t.a_re, t.a_im),
                        u0: t.u0,
                    })
                    .collect(),
                constant: p.constant,
            })
            .collect();
        Ok(PiecewiseExpPoly { pieces })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::adaptive_simpson;
    use proptest::prelude::*;

    #[test]
    fn antiderivative_of_one_is_u() {
        let f = PiecewiseExpPoly::global(vec![ExpPolyTerm::real(1.0, 0, 0.0)]);
        let a = f.antiderivative();
        for u in [0.0, 0.5, 2.0, 7.0] {
            assert!((a.eval(u) - u).abs() < 1e-14);
        }
    }

    #[test]
    fn antiderivative_by_parts() {
        // ∫_0^u xi e^{-xi} dxi = 1 - (1+u) e^{-u}.
        let f = PiecewiseExpPoly::global(vec![ExpPolyTerm::real(1.0, 1, 1.0)]);
        let a = f.antiderivative();
        for u in [0.0f64, 0.3, 1.0, 4.2] {
            let expect = 1.0 - (1.0 + u) * (-u).exp();
            assert!((a.eval(u) - expect).abs() < 1e-13, "u={u}");
        }
    }

    #[test]
    fn antiderivative_gamma_branch_vs_quadrature() {
        // ∫_tau^u xi^2 e^{-a xi} dxi across a breakpoint at tau, against
        // adaptive quadrature at 1e-10.
        let tau = 0.8;
        let a = 0.6;
        let f = PiecewiseExpPoly::from_pieces(vec![
            Piece { lo: 0.0, hi: Some(tau), terms: vec![], constant: 0.0 },
            Piece { lo: tau, hi: None, terms: vec![ExpPolyTerm::real(1.0, 2, a)], constant: 0.0 },
        ])
        .unwrap();
        let anti = f.antiderivative();
        for u in [1.0, 2.5, 6.0] {
            let quad =
                adaptive_simpson(&|x: f64| x * x * (-a * x).exp(), tau, u, 1e-13, 30);
            assert!(
                (anti.eval(u) - quad).abs() < 1e-10 * quad.abs().max(1.0),
                "u={u}: {} vs {}",
                anti.eval(u),
                quad
            );
        }
        // Anchored at zero and continuous.
        assert_eq!(anti.eval(0.0), 0.0);
        assert!(anti.max_breakpoint_jump() < 1e-12);
    }

    #[test]
    fn derivative_inverts_antiderivative() {
        let f = PiecewiseExpPoly::global(vec![
            ExpPolyTerm::real(2.0, 1, 0.5),
            ExpPolyTerm::real(-0.7, 0, 0.0),
            ExpPolyTerm::real(0.3, 2, 0.0),
        ]);
        let round = f.antiderivative().derivative();
        for u in [0.1, 0.9, 3.7] {
            assert!((round.eval(u) - f.eval(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugate_pair_is_real() {
        let a = Complex64::new(0.0, 2.0);
        let k = Complex64::new(0.5, -1.5);
        let f = PiecewiseExpPoly::global(vec![
            ExpPolyTerm::new(k, 0, a),
            ExpPolyTerm::new(k.conj(), 0, a.conj()),
        ]);
        for u in [0.0, 1.0, 2.3] {
            let v = f.eval_complex(u);
            assert!(v.im.abs() < 1e-12);
        }
        let anti = f.antiderivative();
        assert!(anti.max_imag_residue(5.0, 50) < 1e-9);
    }

    #[test]
    fn canonicalize_merges_and_snaps() {
        let mut terms = vec![
            ExpPolyTerm::new(cr(1.0), 1, Complex64::new(0.5, 5e-13)),
            ExpPolyTerm::new(cr(2.0), 1, cr(0.5)),
            ExpPolyTerm::new(cr(-3.0), 1, cr(0.5)),
        ];
        canonicalize(&mut terms);
        assert!(terms.is_empty());
    }

    proptest! {
        #[test]
        fn serialization_round_trip_is_bit_exact(
            kr in -1e3f64..1e3, ki in -1e3f64..1e3,
            ar in -2.0f64..2.0, ai in -2.0f64..2.0,
            m in 0u32..5, tau in 0.1f64..10.0, cst in -5.0f64..5.0,
        ) {
            let f = PiecewiseExpPoly::from_pieces(vec![
                Piece {
                    lo: 0.0,
                    hi: Some(tau),
                    terms: vec![ExpPolyTerm::new(Complex64::new(kr, ki), m, Complex64::new(ar, ai))],
                    constant: cst,
                },
                Piece { lo: tau, hi: None, terms: vec![], constant: 0.0 },
            ]).unwrap();
            let json = serde_json::to_string(&f).unwrap();
            let back: PiecewiseExpPoly = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(f, back);
        }
    }
}
