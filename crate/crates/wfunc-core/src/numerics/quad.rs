//! Adaptive quadrature used by oracles and by the interval pipeline (where
//! its error estimate is folded into the interval slack).

/// Adaptive Simpson with absolute tolerance `tol`. The range is pre-split
/// into uniform panels so that integrands concentrated on a small part of
/// a long interval are not missed by the first coarse probe.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    const PANELS: usize = 32;
    let mut acc = 0.0;
    for i in 0..PANELS {
        let pa = a + (b - a) * i as f64 / PANELS as f64;
        let pb = a + (b - a) * (i + 1) as f64 / PANELS as f64;
        let c = 0.5 * (pa + pb);
        let fa = f(pa);
        let fb = f(pb);
        let fc = f(c);
        let whole = (pb - pa) / 6.0 * (fa + 4.0 * fc + fb);
        acc += simpson_step(f, pa, pb, fa, fb, fc, whole, tol / PANELS as f64, depth);
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let c = 0.5 * (a + b);
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let fd = f(d);
    let fe = f(e);
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, c, fa, fc, fd, left, 0.5 * tol, depth - 1)
            + simpson_step(f, c, b, fc, fb, fe, right, 0.5 * tol, depth - 1)
    }
}

/// Gauss–Kronrod 7-15 on a single panel; returns (estimate, error bound).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    // Nodes and weights for the Kronrod 15-point rule on [-1, 1].
    const XGK: [f64; 8] = [
        0.991455371120813,
        0.949107912342759,
        0.864864423359769,
        0.741531185599394,
        0.586087235467691,
        0.405845151377397,
        0.207784955007898,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022935322010529,
        0.063092092629979,
        0.104790010322250,
        0.140653259715525,
        0.169004726639267,
        0.190350578064785,
        0.204432940075298,
        0.209482141084728,
    ];
    const WG: [f64; 4] = [
        0.129484966168870,
        0.279705391489277,
        0.381830050505119,
        0.417959183673469,
    ];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(mid - x) + f(mid + x);
        kronrod += fsum * WGK[j];
        if j % 2 == 1 {
            gauss += fsum * WG[j / 2];
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive Gauss–Kronrod; returns (integral, accumulated error bound).
pub fn adaptive_gk(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
        let (est, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            (est, err)
        } else {
            let c = 0.5 * (a + b);
            let (l, le) = recurse(f, a, c, 0.5 * tol, depth - 1);
            let (r, re) = recurse(f, c, b, 0.5 * tol, depth - 1);
            (l + r, le + re)
        }
    }
    if a == b {
        return (0.0, 0.0);
    }
    const PANELS: usize = 16;
    let mut acc = (0.0, 0.0);
    for i in 0..PANELS {
        let pa = a + (b - a) * i as f64 / PANELS as f64;
        let pb = a + (b - a) * (i + 1) as f64 / PANELS as f64;
        let (v, e) = recurse(f, pa, pb, tol / PANELS as f64, 20);
        acc.0 += v;
        acc.1 += e;
    }
    acc
}
