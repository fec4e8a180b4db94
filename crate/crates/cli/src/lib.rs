//! Command-line surface for Bradley-Terry scheduling designs: covariance
//! generators, design construction (exact, reduced-basis, closed-form), file
//! formats, sampling, model fitting, and the benchmark harness.

pub mod args;
pub mod commands;
pub mod harness;
pub mod io;
