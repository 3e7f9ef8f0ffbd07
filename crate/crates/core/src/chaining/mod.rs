//! Chaining construction: Λ functions, dyadic chaining points, partitions of
//! a given quality and the decomposition of lower quadrants.

pub mod domination;
pub mod lambda;
pub mod partitions;

pub use domination::{lambda_domination_check, DominationReport, DOMINATION_TOL};
pub use lambda::{LambdaAxis, LambdaMode, LambdaSpec};
pub use partitions::{
    chaining_points, boundary_probe_axis, decompose, enumerate_partitions, increment_excess, probe_axis, verify_decomposition, Cell,
    Decomposition, PartitionScheme, ProbeReport,
};
