//! Chain-inequality tests and joint-distribution feasibility for selective
//! influences.
//!
//! A system of observed outputs, one joint table per treatment, is
//! consistent with selective influence exactly when a single joint
//! distribution of one hidden variable per input point reproduces every
//! table. This crate decides that question exactly by linear programming
//! ([`jdc`]) and offers the cheaper necessary tests: chain inequalities for
//! pseudo-quasi-metrics such as the order-distance ([`metrics`],
//! [`selectivity`]).

pub mod cli;
pub mod gauss;
pub mod jdc;
pub mod metrics;
pub mod num;
pub mod probspace;
pub mod report;
pub mod selectivity;

pub use num::{Arithmetic, Num, Regime};
