//! Hermite polynomials, linear-combination expansions, Hermite coefficients
//! of indicator functionals and Hermite ranks.

pub mod coefficients;
pub mod intervals;
pub mod linear;
pub mod poly;
pub mod quadrature;
pub mod rank;
pub mod subordinator;

pub use coefficients::{coefficient_table, coefficient_table_orders, hermite_coefficient, HermiteCoeffTable};
pub use linear::{expand_hermite_linear, HermiteExpansion};
pub use poly::{hermite, hermite_all, hermite_multi, multi_indices, MultiIndex, MAX_ORDER};
pub use quadrature::{Estimate, QuadratureSpec};
pub use rank::{hermite_rank_at, hermite_rank_family, HermiteRankResult, PointRank, RankWitness, DEFAULT_RANK_TOL};
pub use subordinator::{Component, Interval, Subordinator};
