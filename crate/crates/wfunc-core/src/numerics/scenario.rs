//! Combinatorial scenario counts feeding the M/D/1 and Erlang waiting-time
//! germ series.
//!
//! `φ(m, n)` counts placements of `n` distinct objects into `m` numbered
//! urns with every urn holding at least two objects (`n >= 2m`). The table
//! stores the normalized values `φ(m,n)/n!`, which is what the germ series
//! consumes and what stays in floating-point range (`n!` overflows near
//! n = 21). `θ^{(q)}(m, n)` is the Erlang-shape generalization from the
//! companion recursion; it is stored raw (no factorial in the germ series).

use crate::error::WfError;

/// Normalized M/D/1 scenario counts `φ(m,n)/n!`, `1 <= m <= m_max`,
/// `2m <= n <= n_max`.
#[derive(Debug, Clone)]
pub struct ScenarioTable {
    m_max: usize,
    n_max: usize,
    /// `rows[m-1][n]` = φ(m,n)/n! (0 where n < 2m).
    rows: Vec<Vec<f64>>,
}

impl ScenarioTable {
    /// `φ(m,n)/n!`; zero for absent entries (`n < 2m`).
    pub fn phi_over_fact(&self, m: usize, n: usize) -> f64 {
        if m == 0 || m > self.m_max || n > self.n_max {
            return 0.0;
        }
        self.rows[m - 1].get(n).copied().unwrap_or(0.0)
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }
}

/// Builds the normalized table with the convolution recursion
/// `φ(m+1,n)/n! = Σ_{p=2m}^{n-2} (1/(n-p)!) φ(m,p)/p!`, base
/// `φ(1,n)/n! = 1/n!` for `n >= 2`.
pub fn scenario_counts(m_max: usize, n_max: usize) -> Result<ScenarioTable, WfError> {
    if m_max < 1 || n_max < 2 * m_max {
        return Err(WfError::Domain(format!(
            "scenario_counts requires m_max >= 1 and n_max >= 2 m_max, got ({m_max}, {n_max})"
        )));
    }
    let mut inv_fact = vec![1.0f64; n_max + 1];
    for n in 1..=n_max {
        inv_fact[n] = inv_fact[n - 1] / (n as f64);
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m_max);
    let mut base = vec![0.0f64; n_max + 1];
    for (n, slot) in base.iter_mut().enumerate().skip(2) {
        *slot = inv_fact[n];
    }
    rows.push(base);
    for m in 1..m_max {
        let prev = &rows[m - 1];
        let mut row = vec![0.0f64; n_max + 1];
        for (n, slot) in row.iter_mut().enumerate() {
            if n < 2 * (m + 1) {
                continue;
            }
            let mut acc = 0.0;
            for p in (2 * m)..=(n - 2) {
                acc += inv_fact[n - p] * prev[p];
            }
            *slot = acc;
        }
        rows.push(row);
    }
    Ok(ScenarioTable { m_max, n_max, rows })
}

/// Raw Erlang scenario counts `θ^{(q)}(m,n)` per the shape-q recursion:
/// base `θ(1,n) = C(n+q-1, q-1)`, step
/// `θ(m+1,n) = Σ_{p=2m}^{n-2} C(q+n-p-1, q-1) θ(m,p)`.
#[derive(Debug, Clone)]
pub struct ErlangScenarioTable {
    pub shape: u32,
    m_max: usize,
    n_max: usize,
    rows: Vec<Vec<f64>>,
}

impl ErlangScenarioTable {
    pub fn theta(&self, m: usize, n: usize) -> f64 {
        if m == 0 || m > self.m_max || n > self.n_max {
            return 0.0;
        }
        self.rows[m - 1].get(n).copied().unwrap_or(0.0)
    }
}

pub fn erlang_scenario_counts(
    q: u32,
    m_max: usize,
    n_max: usize,
) -> Result<ErlangScenarioTable, WfError> {
    if q < 1 {
        return Err(WfError::Domain("erlang_scenario_counts requires q >= 1".into()));
    }
    if m_max < 1 || n_max < 2 * m_max {
        return Err(WfError::Domain(format!(
            "erlang_scenario_counts requires m_max >= 1 and n_max >= 2 m_max, got ({m_max}, {n_max})"
        )));
    }
    let binom = |n: u32, k: u32| crate::numerics::gamma::binomial(n, k);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m_max);
    let mut base = vec![0.0f64; n_max + 1];
    for (n, slot) in base.iter_mut().enumerate().skip(2) {
        *slot = binom(n as u32 + q - 1, q - 1);
    }
    rows.push(base);
    for m in 1..m_max {
        let prev = &rows[m - 1];
        let mut row = vec![0.0f64; n_max + 1];
        for (n, slot) in row.iter_mut().enumerate() {
            if n < 2 * (m + 1) {
                continue;
            }
            let mut acc = 0.0;
            for p in (2 * m)..=(n - 2) {
                acc += binom((q as usize + n - p - 1) as u32, q - 1) * prev[p];
            }
            *slot = acc;
        }
        rows.push(row);
    }
    Ok(ErlangScenarioTable { shape: q, m_max, n_max, rows })
}
