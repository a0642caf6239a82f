//! Conditional-independence semantics for binary joint tables and Gaussians.

mod gaussian;
pub(crate) mod linalg;
mod query;
mod table;

pub(crate) use gaussian::PcorCache;
pub use gaussian::{GaussianCiOutcome, GaussianModel};
pub use query::CIQuery;
pub(crate) use query::{index_of, resolve_names, resolve_triple};
pub(crate) use table::MarginalCache;
pub use table::{CiOutcome, JointTable, MAX_TABLE_VARS};
