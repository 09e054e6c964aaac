use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use num_complex::Complex64;

use wfunc_core::approx::{example7_cost, near_best};
use wfunc_core::dispatch::{dispatch_decide, RefineSchedule, ServerCost, ServerSpec};
use wfunc_core::piecewise::{w_piecewise_finite, w_piecewise_md1, PiecewiseCostSpec};
use wfunc_core::sim::{sim_discharge_cost, SimConfig};
use wfunc_core::taylor::filter_germ;
use wfunc_core::waiting::{germ_at_zero, pole_set};
use wfunc_core::wfn::w_for_exp_poly_cost;
use wfunc_core::{ExpPolyTerm, QueueSpec, ServiceModel};

fn mm1() -> QueueSpec {
    QueueSpec::new(ServiceModel::Exponential { omega: 1.0 }, 0.5).unwrap()
}

fn md1() -> QueueSpec {
    QueueSpec::new(ServiceModel::Deterministic { d: 1.0 }, 0.5).unwrap()
}

fn bench_germs(c: &mut Criterion) {
    let spec = md1();
    c.bench_function("germ_at_zero_md1_n40", |b| {
        b.iter(|| germ_at_zero(&spec, 40).unwrap())
    });
    let erl = QueueSpec::new(ServiceModel::Erlang { q: 4, omega: 8.0 }, 1.0).unwrap();
    c.bench_function("pole_set_erlang4", |b| b.iter(|| pole_set(&erl).unwrap()));
}

fn bench_wfunctions(c: &mut Criterion) {
    let spec = mm1();
    let cost = vec![ExpPolyTerm::real(1.0, 2, 0.4), ExpPolyTerm::real(0.5, 0, 0.0)];
    c.bench_function("w_table1_linearity", |b| {
        b.iter(|| w_for_exp_poly_cost(&spec, &cost).unwrap())
    });
    let pcost = PiecewiseCostSpec::new(
        vec![0.1, 0.7, -0.05],
        vec![ExpPolyTerm::new(Complex64::new(0.8, 0.0), 1, Complex64::new(0.5, 0.0))],
        2.5,
    )
    .unwrap();
    c.bench_function("w_piecewise_finite", |b| {
        b.iter(|| w_piecewise_finite(&spec, &pcost).unwrap())
    });
    let dspec = md1();
    let step = PiecewiseCostSpec::step(6.5).unwrap();
    c.bench_function("w_piecewise_md1_7cells", |b| {
        b.iter(|| w_piecewise_md1(&dspec, &step).unwrap())
    });
}

fn bench_taylor(c: &mut Criterion) {
    let spec = mm1();
    let derivs = |k: usize| {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-(-0.25f64).powi(k as i32), 0.0)
        }
    };
    c.bench_function("filter_germ_n40", |b| {
        b.iter(|| filter_germ(&spec, &derivs, 40).unwrap())
    });
}

fn bench_approx(c: &mut Criterion) {
    let cost = example7_cost(1.0, 2.0);
    c.bench_function("near_best_n32", |b| b.iter(|| near_best(&cost, 32)));
}

fn bench_sim(c: &mut Criterion) {
    let config = SimConfig { spec: mm1(), seed: 7, replications: 10_000 };
    c.bench_function("sim_discharge_10k", |b| {
        b.iter(|| sim_discharge_cost(&config, &|u: f64| 1.0 - (-0.25 * u).exp(), 2.0).unwrap())
    });
}

fn bench_dispatch(c: &mut Criterion) {
    let fleet = vec![
        ServerSpec {
            id: 1,
            queue: QueueSpec::new(ServiceModel::Exponential { omega: 2.0 }, 1.0).unwrap(),
            cost: ServerCost::example7(1.0),
        },
        ServerSpec {
            id: 2,
            queue: QueueSpec::new(ServiceModel::Exponential { omega: 1.0 }, 0.5).unwrap(),
            cost: ServerCost::example7(1.0),
        },
    ];
    let schedule = RefineSchedule::default();
    c.bench_function("dispatch_decide_point", |b| {
        b.iter_batched(
            || (),
            |_| dispatch_decide(&fleet, &[1.5, 2.5], &[1.0, 2.0], &schedule).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_germs,
    bench_wfunctions,
    bench_taylor,
    bench_approx,
    bench_sim,
    bench_dispatch
);
criterion_main!(benches);
