//! Edge-color-avoiding percolation on randomly colored Erdős–Rényi multigraphs.
//!
//! Vertices `u`, `v` are CA-connected when, for every color `i`, they are
//! connected using only edges of the other colors. This crate samples
//! colored graphs, computes CA-components exactly, censuses the structures
//! that carry them, evaluates the limit constants governing their size, and
//! runs reproducible Monte Carlo experiments.

pub mod ca;
pub mod census;
pub mod error;
pub mod graph;
pub mod montecarlo;
pub mod params;
pub mod partition;
pub mod seed;
pub mod theory;
pub mod union_find;

pub use ca::{ca_partition, ca_partition_oracle, components_avoiding, CaReport};
pub use census::{
    census, classify_ca_support, enumerate_cycles, excess_census, max_separation, repeated_edges,
    CensusResult, CycleRecord, Support, SupportClassifier,
};
pub use error::{Error, Result};
pub use graph::{figure1_gadget, generate, ColorSet, ColoredMultigraph, GraphView, ViewMode};
pub use montecarlo::{ExperimentConfig, Measurement, SummaryStats, TrialRecord};
pub use params::ColorParams;
pub use partition::Partition;
pub use theory::{Regime, TheoryConstants};
