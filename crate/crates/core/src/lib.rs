//! Communication for omniscience as a coalitional game.
//!
//! Given a source model (packets per user, or an explicit entropy table) the
//! crate computes the minimum sum-rate `R_CO` for the asymptotic and integer
//! rate models, decides whether the core of `G(V, α, f_α)` is empty, builds the
//! Dilworth truncation of the dual set function, and produces Shapley, greedy
//! vertex and integer-point rate allocations. All arithmetic is exact.

// error variants carry exact rationals for reporting; they are rare and cold
#![allow(clippy::result_large_err)]

pub mod allocation;
pub mod cli;
pub mod combinatorics;
pub mod dilworth;
pub mod entropy;
pub mod game;
pub mod model_file;
pub mod rational;
pub mod report;
pub mod sumrate;

pub use allocation::{
    enumerate_integer_core, fairness_compare, greedy_vertex, greedy_vertices, jain_index, shapley,
    Allocation, AllocationError, Method, VertexSet,
};
pub use combinatorics::{
    enumerate_partitions, enumerate_subsets, min_partition_sum, Partition, SetFunction, Subset,
};
pub use dilworth::{
    convex_characteristic, cores_equal, dilworth_truncate, ConvexCharacteristic, TruncatedDual,
};
pub use entropy::{validate_polymatroid, EntropyTable, ModelError, PacketModel, SourceModel};
pub use game::{satisfies_slepian_wolf, GameError, GameSpec, Membership, RateVector};
pub use model_file::{load_model, parse_model};
pub use rational::{format_rational, parse_rational, Rational};
pub use sumrate::{
    core_nonempty, intersecting_nonempty, min_sum_rate, min_sum_rate_asymptotic,
    min_sum_rate_non_asymptotic, mmi, ModelKind, SumRateReport,
};
