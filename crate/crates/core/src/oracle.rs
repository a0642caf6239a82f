//! Uniform access to the three independence semantics.

use crate::ci::{GaussianModel, JointTable, MarginalCache, PcorCache};
use crate::error::Result;
use crate::graph::{separated_mask, UGraph};
use crate::scalar::Real;
use crate::varset::VarSet;

/// Which semantics a model carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Discrete,
    Gaussian,
    Separation,
}

/// Borrowed model under test.
#[derive(Clone, Copy, Debug)]
pub enum ModelRef<'a, T> {
    Discrete(&'a JointTable<T>),
    Gaussian(&'a GaussianModel<T>),
    Graph(&'a UGraph),
}

impl<'a, T: Real> ModelRef<'a, T> {
    pub fn variables(&self) -> &'a [String] {
        match self {
            ModelRef::Discrete(t) => t.variables(),
            ModelRef::Gaussian(g) => g.variables(),
            ModelRef::Graph(g) => g.vertices(),
        }
    }

    pub fn regime(&self) -> Regime {
        match self {
            ModelRef::Discrete(_) => Regime::Discrete,
            ModelRef::Gaussian(_) => Regime::Gaussian,
            ModelRef::Graph(_) => Regime::Separation,
        }
    }

    /// Direct evaluator for a handful of queries.
    pub(crate) fn direct(self) -> Result<Oracle<'a, T>> {
        Ok(match self {
            ModelRef::Discrete(t) => Oracle::Table(t),
            ModelRef::Gaussian(g) => Oracle::Gauss(g),
            ModelRef::Graph(g) => Oracle::Graph(g.adjacency_masks()?),
        })
    }

    /// Evaluator with every marginal or partial correlation precomputed.
    pub(crate) fn cached(self) -> Result<Oracle<'a, T>> {
        Ok(match self {
            ModelRef::Discrete(t) => Oracle::CachedTable(MarginalCache::new(t)?),
            ModelRef::Gaussian(g) => Oracle::CachedGauss(PcorCache::new(g)?),
            ModelRef::Graph(g) => Oracle::Graph(g.adjacency_masks()?),
        })
    }
}

pub(crate) enum Oracle<'a, T> {
    Table(&'a JointTable<T>),
    CachedTable(MarginalCache<T>),
    Gauss(&'a GaussianModel<T>),
    CachedGauss(PcorCache<T>),
    Graph(Vec<u64>),
}

impl<T: Real> Oracle<'_, T> {
    /// Deviation from `X ⊥ Y | Z`: the product-identity gap for tables, the
    /// largest |partial correlation| for Gaussians, 0 or 1 for separation.
    pub(crate) fn deviation(&self, x: VarSet, y: VarSet, z: VarSet) -> Result<T> {
        Ok(match self {
            Oracle::Table(t) => t.ci_deviation(x, y, z),
            Oracle::CachedTable(c) => c.deviation(x, y, z),
            Oracle::Gauss(g) => g.max_abs_pcor(x, y, z)?,
            Oracle::CachedGauss(c) => c.max_abs(x, y, z),
            Oracle::Graph(adj) => {
                if separated_mask(adj, x, y, z) {
                    T::zero()
                } else {
                    T::one()
                }
            }
        })
    }
}

impl<'a, T> From<&'a JointTable<T>> for ModelRef<'a, T> {
    fn from(t: &'a JointTable<T>) -> Self {
        ModelRef::Discrete(t)
    }
}

impl<'a, T> From<&'a GaussianModel<T>> for ModelRef<'a, T> {
    fn from(g: &'a GaussianModel<T>) -> Self {
        ModelRef::Gaussian(g)
    }
}

impl<'a, T> From<&'a UGraph> for ModelRef<'a, T> {
    fn from(g: &'a UGraph) -> Self {
        ModelRef::Graph(g)
    }
}
