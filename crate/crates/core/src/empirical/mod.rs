//! Sequential empirical processes, their normalization and the reduction
//! statistic.

mod counting;
pub mod distribution;
pub mod grid;
pub mod normalization;
pub mod reduction;
pub mod surface;

pub use distribution::{DistributionSource, DistributionTable};
pub use grid::EvaluationGrid;
pub use normalization::{normalization, normalization_ladder};
pub use reduction::{reduction_statistic, ReductionStatistic};
pub use surface::{leading_term_surface, sequential_empirical, LeadingTerm, SeqEmpiricalSurface, Surface};
