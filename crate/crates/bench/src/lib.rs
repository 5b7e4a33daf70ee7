//! Shared fixtures for the criterion benchmarks.

/// Dimensions of the desk-scale tracing regime benchmarked throughout.
pub const N: usize = 24;
pub const D: usize = 65_536;
pub const K: usize = 100;
pub const RHO: f64 = 0.05;
