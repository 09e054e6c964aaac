//! Foundational numerical kernels: interval arithmetic, truncated power
//! series, integer-shape incomplete gamma, Lambert W (branch -1), scenario
//! combinatorics and quadrature.

pub mod gamma;
pub mod interval;
pub mod jet;
pub mod lambert;
pub mod quad;
pub mod scenario;

pub use gamma::{binomial, factorial, upper_incomplete_gamma_int};
pub use interval::Interval;
pub use jet::{jet_of_exp_cs, jet_of_poly, jet_of_rational, Jet};
pub use lambert::lambert_w_minus1;
pub use scenario::{erlang_scenario_counts, scenario_counts, ErlangScenarioTable, ScenarioTable};
