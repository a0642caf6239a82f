#![allow(clippy::neg_cmp_op_on_partial_ord)] // comparisons are written to reject NaN

//! Conditional independence on discrete tables, Gaussian models and graphs:
//! CI oracles, vertex separation, property scans, perfectness checks for
//! Markov trees, model generators, Chow–Liu learning and a small proof checker
//! for graphoid-style derivations.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common `f64` instantiations.

pub mod axioms;
pub mod ci;
pub mod deduction;
pub mod error;
pub mod graph;
pub mod learn;
pub mod model_gen;
pub mod oracle;
pub mod perfectness;
pub mod rng;
pub mod scalar;
pub mod varset;

pub use axioms::{Binding, DTInstance, PropertyId, ScanReport, Violation};
pub use ci::{CIQuery, CiOutcome, GaussianCiOutcome, GaussianModel, JointTable};
pub use error::{Error, Result};
pub use graph::{markov_network, SepQuery, UGraph};
pub use learn::{chow_liu, ingest_samples, mutual_information, SampleMatrix};
pub use model_gen::{TreeModel, TreeParams};
pub use oracle::{ModelRef, Regime};
pub use perfectness::{PerfectnessReport, MAX_PERFECTNESS_VARS};
pub use rng::Seed;
pub use scalar::Real;
pub use varset::VarSet;

pub type Table = JointTable<f64>;
pub type Table32 = JointTable<f32>;
pub type Gaussian = GaussianModel<f64>;
pub type Gaussian32 = GaussianModel<f32>;
pub type Report = PerfectnessReport<f64>;
