//! Value functions ("w-functions") for M/G/1-FCFS queues under arbitrary
//! waiting-cost functions: exact closed forms, interval bounds from
//! polynomial approximation, one-step dispatch improvement, and a
//! discrete-event simulation oracle.

pub mod approx;
pub mod dispatch;
pub mod error;
pub mod exppoly;
pub mod numerics;
pub mod piecewise;
pub mod service;
pub mod sim;
pub mod stable;
pub mod taylor;
pub mod waiting;
pub mod wfn;

pub use error::WfError;
pub use dispatch::{DecisionRecord, RefineSchedule, ServerCost, ServerSpec};
pub use exppoly::{ExpPolyTerm, Piece, PiecewiseExpPoly};
pub use numerics::Interval;
pub use taylor::{Convergence, Germ, GrowthClass, IntervalFn};
pub use piecewise::PiecewiseCostSpec;
pub use service::{QueueSpec, ServiceModel};
pub use sim::{Estimate, SimConfig};
pub use wfn::WResult;
