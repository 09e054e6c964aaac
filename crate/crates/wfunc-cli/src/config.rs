//! Structured run configuration: one JSON document per experiment, schema
//! validated with unknown keys rejected.

use std::sync::Arc;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use wfunc_core::approx::expr;
use wfunc_core::approx::{PeriodicCost, SampledCost, TailEnvelope};
use wfunc_core::{ExpPolyTerm, PiecewiseCostSpec, QueueSpec, ServiceModel};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Deterministic { d: f64 },
    Exponential { omega: f64 },
    Erlang { q: u32, omega: f64 },
}

impl ModelConfig {
    pub fn to_model(&self) -> ServiceModel {
        match *self {
            ModelConfig::Deterministic { d } => ServiceModel::Deterministic { d },
            ModelConfig::Exponential { omega } => ServiceModel::Exponential { omega },
            ModelConfig::Erlang { q, omega } => ServiceModel::Erlang { q, omega },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub model: ModelConfig,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model0: Option<ModelConfig>,
}

impl SpecConfig {
    pub fn to_spec(&self) -> Result<QueueSpec> {
        let spec = match &self.model0 {
            Some(m0) => {
                QueueSpec::with_setup(self.model.to_model(), self.lambda, m0.to_model())?
            }
            None => QueueSpec::new(self.model.to_model(), self.lambda)?,
        };
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub kappa: f64,
    #[serde(default)]
    pub m: u32,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub a_im: f64,
}

impl TermConfig {
    pub fn to_term(&self) -> ExpPolyTerm {
        ExpPolyTerm::new(
            Complex64::new(self.kappa, 0.0),
            self.m,
            Complex64::new(self.a, self.a_im),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    pub kappa: f64,
    #[serde(default)]
    pub k: u32,
    #[serde(default)]
    pub a: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum CostConfig {
    /// Finite combination of `kappa u^m e^{-a u}` terms.
    ExpPoly { terms: Vec<TermConfig> },
    /// `1 - e^{-a u}` (the recurring study cost; enables the
    /// derivative-bound recipe of the bounds command).
    OneMinusExp { a: f64 },
    /// Two-piece cost: polynomial interior, single exp-poly tail term.
    Piecewise {
        sigma: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<TailConfig>,
        tau: f64,
    },
    /// Black-box continuous cost from an expression in `u` on `[0, tau]`.
    Sampled { expr: String, tau: f64 },
    /// The quotient cost `u^2/(a^2+u^2)` with its exact modulus and tail
    /// envelope.
    Example7 { a: f64, tau: f64 },
    /// Continuous periodic cost from an expression in `u`.
    Periodic { expr: String, period: f64 },
}

impl CostConfig {
    pub fn to_exp_poly(&self) -> Result<Vec<ExpPolyTerm>> {
        match self {
            CostConfig::ExpPoly { terms } => Ok(terms.iter().map(|t| t.to_term()).collect()),
            CostConfig::OneMinusExp { a } => Ok(vec![
                ExpPolyTerm::real(1.0, 0, 0.0),
                ExpPolyTerm::real(-1.0, 0, *a),
            ]),
            other => bail!("cost kind {other:?} is not an exp-polynomial"),
        }
    }

    pub fn to_piecewise(&self) -> Result<PiecewiseCostSpec> {
        match self {
            CostConfig::Piecewise { sigma, tail, tau } => {
                let tail_terms = tail
                    .iter()
                    .map(|t| ExpPolyTerm::real(t.kappa, t.k, t.a))
                    .collect();
                Ok(PiecewiseCostSpec::new(sigma.clone(), tail_terms, *tau)?)
            }
            other => bail!("cost kind {other:?} is not piecewise"),
        }
    }

    pub fn to_sampled(&self) -> Result<SampledCost> {
        match self {
            CostConfig::Sampled { expr: src, tau } => {
                let ast = expr::parse(src)?;
                Ok(SampledCost::new(move |u| ast.eval(u), *tau))
            }
            CostConfig::Example7 { a, tau } => Ok(wfunc_core::approx::example7_cost(*a, *tau)),
            other => bail!("cost kind {other:?} is not a sampled cost"),
        }
    }

    pub fn to_periodic(&self) -> Result<PeriodicCost> {
        match self {
            CostConfig::Periodic { expr: src, period } => {
                let ast = expr::parse(src)?;
                Ok(PeriodicCost::new(move |u| ast.eval(u), *period))
            }
            other => bail!("cost kind {other:?} is not periodic"),
        }
    }

    /// Pointwise evaluator for the simulator.
    pub fn evaluator(&self) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
        match self {
            CostConfig::ExpPoly { .. } | CostConfig::OneMinusExp { .. } => {
                let terms = self.to_exp_poly()?;
                Ok(Arc::new(move |u: f64| {
                    terms.iter().map(|t| t.eval(u).re).sum()
                }))
            }
            CostConfig::Piecewise { .. } => {
                let p = self.to_piecewise()?;
                Ok(Arc::new(move |u: f64| p.eval(u)))
            }
            CostConfig::Sampled { .. } | CostConfig::Example7 { .. } => {
                let s = self.to_sampled()?;
                Ok(Arc::new(move |u: f64| s.eval(u)))
            }
            CostConfig::Periodic { .. } => {
                let p = self.to_periodic()?;
                Ok(Arc::new(move |u: f64| p.eval(u)))
            }
        }
    }

    /// Dispatch server cost: continuous kinds pair the evaluator with a
    /// per-tau tail envelope, exp-poly kinds stay exact.
    pub fn to_server_cost(
        &self,
        tail_override: Option<&TailEnvelopeConfig>,
    ) -> Result<wfunc_core::ServerCost> {
        use wfunc_core::ServerCost;
        if let Some(t) = tail_override {
            let env = TailEnvelope {
                lower: t.lower.iter().map(|x| ExpPolyTerm::real(x.kappa, x.k, x.a)).collect(),
                upper: t.upper.iter().map(|x| ExpPolyTerm::real(x.kappa, x.k, x.a)).collect(),
            };
            let sampled = self.to_sampled()?;
            return Ok(ServerCost::Continuous {
                cost: sampled,
                tail_for: Arc::new(move |_| env.clone()),
            });
        }
        match self {
            CostConfig::Example7 { a, .. } => Ok(ServerCost::example7(*a)),
            CostConfig::ExpPoly { .. } | CostConfig::OneMinusExp { .. } => {
                Ok(ServerCost::ExpPoly(self.to_exp_poly()?))
            }
            CostConfig::Sampled { expr: src, tau } => {
                // Without an explicit tail section the envelope falls back
                // to constants [inf c, sup c] scanned far beyond tau; that
                // is only sound for costs that saturate, so reject ones
                // still trending at the scan horizon.
                let ast = expr::parse(src)?;
                let tau0 = *tau;
                let horizon = 64.0 * tau0;
                let scan: Vec<f64> =
                    (0..=8192).map(|i| ast.eval(horizon * i as f64 / 8192.0)).collect();
                let sup = scan.iter().cloned().fold(f64::MIN, f64::max);
                let tail_floor =
                    scan[(scan.len() / 2)..].iter().cloned().fold(f64::MAX, f64::min);
                let last_eighth = &scan[(scan.len() * 7 / 8)..];
                let swing = last_eighth.iter().cloned().fold(f64::MIN, f64::max)
                    - last_eighth.iter().cloned().fold(f64::MAX, f64::min);
                if swing > 1e-3 * sup.abs().max(1.0) {
                    bail!(
                        "sampled cost {src:?} has not flattened by u = {horizon}; give the                          server an explicit `tail` envelope"
                    );
                }
                let ast2 = ast.clone();
                Ok(ServerCost::Continuous {
                    cost: SampledCost::new(move |u| ast.eval(u), tau0),
                    tail_for: Arc::new(move |tau: f64| {
                        let lo = (0..=512)
                            .map(|i| ast2.eval(tau + (horizon - tau).max(0.0) * i as f64 / 512.0))
                            .fold(f64::MAX, f64::min)
                            .min(tail_floor);
                        TailEnvelope {
                            lower: vec![ExpPolyTerm::real(lo, 0, 0.0)],
                            upper: vec![ExpPolyTerm::real(sup, 0, 0.0)],
                        }
                    }),
                })
            }
            other => bail!("cost kind {other:?} cannot drive a dispatch server"),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridConfig {
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps.max(2);
        (0..n)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn parse(text: &str) -> Result<GridConfig> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            bail!("grid must be 'min:max:steps', got {text:?}");
        }
        Ok(GridConfig {
            min: parts[0].parse().context("grid min")?,
            max: parts[1].parse().context("grid max")?,
            steps: parts[2].parse().context("grid steps")?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaylorSection {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_order: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_type: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxSection {
    pub n: usize,
    pub method: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailEnvelopeConfig {
    pub lower: Vec<TailConfig>,
    pub upper: Vec<TailConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerConfig {
    pub lambda: f64,
    pub model: ModelConfig,
    pub cost: CostConfig,
    /// Optional explicit tail envelope (terms valid beyond any tau),
    /// overriding the cost's default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailEnvelopeConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispatchSection {
    pub d: Vec<f64>,
    pub grid: GridConfig,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(default = "default_tmax")]
    pub tmax: usize,
    #[serde(default = "default_tau_cap")]
    pub tau_cap: f64,
    #[serde(default = "default_n_cap")]
    pub n_cap: usize,
}

fn default_eps0() -> f64 {
    0.5
}
fn default_tmax() -> usize {
    12
}
fn default_tau_cap() -> f64 {
    16.0
}
fn default_n_cap() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub u0: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub reps: u64,
}

fn default_seed() -> u64 {
    1
}
fn default_reps() -> u64 {
    10_000
}

/// The top-level config document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taylor: Option<TaylorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<ApproxSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub servers: Option<Vec<ServerConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispatch: Option<DispatchSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn spec(&self) -> Result<QueueSpec> {
        self.spec.as_ref().context("config needs a `spec` section")?.to_spec()
    }

    pub fn cost(&self) -> Result<&CostConfig> {
        self.cost.as_ref().context("config needs a `cost` section")
    }

    /// Canonical digest of the config document (stable field order via
    /// serde_json's value round trip).
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let canon = serde_json::to_string(self).unwrap_or_default();
        let mut hasher = Sha256::new();
        hasher.update(canon.as_bytes());
        let out = hasher.finalize();
        out.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
