//! Command implementations behind the CLI surface.

use anyhow::{bail, Context, Result};
use num_complex::Complex64;

use wfunc_core::approx::{bernstein, cheb_interp, near_best, ApproxMethod, PolyApprox};
use wfunc_core::dispatch::{policy_map, RefineSchedule, ServerSpec};
use wfunc_core::piecewise::w_piecewise;
use wfunc_core::sim::{sim_discharge_cost, SimConfig};
use wfunc_core::taylor::{
    convergence_classify, filter_germ, one_minus_exp_bounds, one_minus_exp_germ,
    polynomial_bounds, wt_threshold, Convergence, GrowthClass,
};
use wfunc_core::wfn::w_for_exp_poly_cost;
use wfunc_core::{QueueSpec, WResult};

use crate::config::{CostConfig, GridConfig, RunConfig};
use crate::output::Table;

/// Builds the w-function for any closed-form cost kind.
pub fn build_wresult(spec: &QueueSpec, cost: &CostConfig) -> Result<WResult> {
    match cost {
        CostConfig::ExpPoly { .. } | CostConfig::OneMinusExp { .. } => {
            Ok(w_for_exp_poly_cost(spec, &cost.to_exp_poly()?)?)
        }
        CostConfig::Piecewise { .. } => Ok(w_piecewise(spec, &cost.to_piecewise()?)?),
        other => bail!("cost kind {other:?} has no exact w-function; use bounds/approx"),
    }
}

/// `wfn`: w, w', relative value on a grid.
pub fn cmd_wfn(cfg: &RunConfig, grid_override: Option<GridConfig>) -> Result<Table> {
    let spec = cfg.spec()?;
    let res = build_wresult(&spec, cfg.cost()?)?;
    let grid = grid_override
        .or(cfg.grid)
        .unwrap_or(GridConfig { min: 0.0, max: 5.0, steps: 51 });
    let mut table = Table::new(&["u", "w", "wprime", "relvalue"]);
    table.comment(format!("spec_hash={}", cfg.digest()));
    table.comment(format!("cbar={:.12e}", res.mean_cost.re));
    for u in grid.points() {
        table.push(vec![
            u.into(),
            res.w.eval(u).into(),
            res.wprime.eval(u).into(),
            res.relative_value(u).into(),
        ]);
    }
    Ok(table)
}

/// `bounds`: interval bounds `[w^(n)]` over a range of orders for the
/// `1 - e^{-a u}` cost (bounds-sweep data), or the trigonometric interval
/// bounds for a periodic cost.
pub fn cmd_bounds(cfg: &RunConfig, grid_override: Option<GridConfig>) -> Result<Table> {
    let spec = cfg.spec()?;
    let section = cfg.bounds.as_ref().context("config needs a `bounds` section")?;
    if let CostConfig::Periodic { .. } = cfg.cost()? {
        let cost = cfg.cost()?.to_periodic()?;
        let grid = grid_override
            .or(cfg.grid)
            .unwrap_or(GridConfig { min: 0.0, max: 3.0 * cost.period, steps: 31 });
        let mut table = Table::new(&["u", "n", "lower", "upper"]);
        table.comment(format!("spec_hash={}", cfg.digest()));
        for n in section.n_min..=section.n_max {
            let bounds = wfunc_core::approx::periodic_bounds(&spec, &cost, n)?;
            table.comment(format!(
                "n={n} cbar_interval=[{:.12e},{:.12e}]",
                bounds.mean.lo, bounds.mean.hi
            ));
            for u in grid.points() {
                let iv = bounds.eval(u);
                table.push(vec![u.into(), n.into(), iv.lo.into(), iv.hi.into()]);
            }
        }
        return Ok(table);
    }
    let CostConfig::OneMinusExp { a } = cfg.cost()? else {
        bail!("bounds needs cost.kind = one_minus_exp or periodic");
    };
    let pw = wt_threshold(&spec)?;
    let class = convergence_classify(pw, GrowthClass { order: 1.0, type_: *a });
    if class != Convergence::Converges {
        bail!(wfunc_core::WfError::DivergentSeries {
            reason: format!(
                "cost type {a} is at or beyond the dominant-pole threshold {pw}; the polynomial bounds diverge"
            ),
            witness: vec![],
        });
    }
    let grid = grid_override
        .or(cfg.grid)
        .unwrap_or(GridConfig { min: 0.0, max: 5.0, steps: 26 });
    let mut table = Table::new(&["u", "n", "lower", "upper"]);
    table.comment(format!("spec_hash={}", cfg.digest()));
    for n in section.n_min..=section.n_max {
        let germ = one_minus_exp_germ(*a, n);
        let bounds = polynomial_bounds(&spec, &germ, &one_minus_exp_bounds(*a, n))?;
        for u in grid.points() {
            let iv = bounds.eval(u);
            table.push(vec![u.into(), n.into(), iv.lo.into(), iv.hi.into()]);
        }
    }
    Ok(table)
}

/// `taylor`: the filtered w'-germ (or the divergence witness).
pub fn cmd_taylor(cfg: &RunConfig) -> Result<Table> {
    let spec = cfg.spec()?;
    let section = cfg.taylor.as_ref().context("config needs a `taylor` section")?;
    let terms = cfg.cost()?.to_exp_poly()?;
    if let (Some(ord), Some(ty)) = (section.growth_order, section.growth_type) {
        let pw = wt_threshold(&spec)?;
        let class = convergence_classify(pw, GrowthClass { order: ord, type_: ty });
        if class == Convergence::Diverges {
            bail!(wfunc_core::WfError::DivergentSeries {
                reason: format!("declared growth (order {ord}, type {ty}) exceeds |p_W| = {pw}"),
                witness: vec![],
            });
        }
    }
    let derivs = move |k: usize| -> Complex64 {
        terms
            .iter()
            .map(|t| {
                // d^k/du^k [kappa u^m e^{-a u}] at 0 =
                // kappa k!/(k-m)! (-a)^{k-m} for k >= m.
                if k < t.m as usize {
                    Complex64::new(0.0, 0.0)
                } else {
                    let mut c = t.kappa;
                    for j in (k - t.m as usize + 1)..=k {
                        c *= j as f64;
                    }
                    c * (-t.a).powu((k - t.m as usize) as u32)
                }
            })
            .sum()
    };
    let germ = filter_germ(&spec, &derivs, section.n)?;
    let mut table = Table::new(&["k", "ytilde_re", "ytilde_im"]);
    table.comment(format!("spec_hash={}", cfg.digest()));
    for (k, c) in germ.coeffs.iter().enumerate() {
        table.push(vec![k.into(), c.re.into(), c.im.into()]);
    }
    Ok(table)
}

/// `approx`: uniform approximation coefficients and measured error.
pub fn cmd_approx(cfg: &RunConfig) -> Result<Table> {
    let section = cfg.approx.as_ref().context("config needs an `approx` section")?;
    let cost = cfg.cost()?.to_sampled()?;
    let approx: PolyApprox = match section.method.as_str() {
        "bernstein" => bernstein(&cost, section.n),
        "near_best" => near_best(&cost, section.n),
        "cheb" => cheb_interp(&cost, section.n),
        other => bail!("unknown approximation method {other:?}"),
    };
    let measured = approx.measured_error(&cost, 1000);
    let mut table = Table::new(&["k", "coeff"]);
    table.comment(format!("method={:?}", approx.method));
    table.comment(format!("eta_declared={:.12e}", approx.eta));
    table.comment(format!("eta_measured={measured:.12e}"));
    if approx.method == ApproxMethod::ChebInterp || approx.coeffs.is_empty() {
        for (k, c) in approx.cheb.coeffs.iter().enumerate() {
            table.push(vec![k.into(), (*c).into()]);
        }
        table.comment("basis=chebyshev".to_string());
    } else {
        for (k, c) in approx.coeffs.iter().enumerate() {
            table.push(vec![k.into(), (*c).into()]);
        }
        table.comment("basis=monomial".to_string());
    }
    Ok(table)
}

/// Builds the dispatch fleet from config.
pub fn build_fleet(cfg: &RunConfig) -> Result<(Vec<ServerSpec>, RefineSchedule, Vec<f64>)> {
    let servers = cfg.servers.as_ref().context("config needs a `servers` section")?;
    let section = cfg.dispatch.as_ref().context("config needs a `dispatch` section")?;
    if servers.len() != section.d.len() {
        bail!("dispatch.d must list one service time per server");
    }
    let mut fleet = Vec::new();
    for (i, s) in servers.iter().enumerate() {
        let queue = QueueSpec::new(s.model.to_model(), s.lambda)?;
        fleet.push(ServerSpec {
            id: i + 1,
            queue,
            cost: s.cost.to_server_cost(s.tail.as_ref())?,
        });
    }
    let schedule = RefineSchedule {
        eps0: section.eps0,
        t_max: section.tmax,
        tau_cap: section.tau_cap,
        n_cap: section.n_cap,
    };
    Ok((fleet, schedule, section.d.clone()))
}

/// `policy`: winner map over a backlog grid.
pub fn cmd_policy(cfg: &RunConfig, grid_override: Option<GridConfig>) -> Result<Table> {
    let (fleet, schedule, d) = build_fleet(cfg)?;
    let grid = grid_override.unwrap_or(cfg.dispatch.as_ref().unwrap().grid);
    let points = policy_map(&fleet, grid.min, grid.max, grid.steps, &d, &schedule)?;
    let mut table = Table::new(&["u1", "u2", "winner", "n_star", "rounds"]);
    table.comment(format!("spec_hash={}", cfg.digest()));
    for p in points {
        table.push(vec![
            p.u[0].into(),
            p.u[1].into(),
            p.winner.map(|w| w.to_string()).unwrap_or_else(|| "unresolved".into()).into(),
            p.n_star.into(),
            p.rounds.into(),
        ]);
    }
    Ok(table)
}

/// `simulate`: discharge-cost estimates on a list of initial backlogs.
pub fn cmd_simulate(cfg: &RunConfig, seed: Option<u64>, reps: Option<u64>) -> Result<Table> {
    let spec = cfg.spec()?;
    let section = cfg.simulate.as_ref().context("config needs a `simulate` section")?;
    let evaluator = cfg.cost()?.evaluator()?;
    let config = SimConfig {
        spec,
        seed: seed.unwrap_or(section.seed),
        replications: reps.unwrap_or(section.reps),
    };
    let mut table = Table::new(&["u0", "mean", "stderr", "reps"]);
    table.comment(format!("spec_hash={}", cfg.digest()));
    table.comment(format!("seed={}", config.seed));
    for &u0 in &section.u0 {
        let est = sim_discharge_cost(&config, &|u| evaluator(u), u0)?;
        table.push(vec![u0.into(), est.mean.into(), est.stderr.into(), est.count.into()]);
    }
    Ok(table)
}
