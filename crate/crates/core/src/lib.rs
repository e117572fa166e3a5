//! Capability-constrained multi-robot task allocation.

pub mod baseline;
pub mod compat;
pub mod compile;
pub mod fuzz;
pub mod gen;
pub mod greedy;
pub mod ground;
pub mod maxsat;
pub mod model;
pub mod oracle;
pub mod prng;
pub mod stamr;
