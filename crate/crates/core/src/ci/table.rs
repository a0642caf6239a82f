use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::query::{index_of, resolve_names, validate_names, CIQuery};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::varset::VarSet;

/// Largest number of binary variables a dense table may hold.
pub const MAX_TABLE_VARS: usize = 20;

/// Exact joint distribution over `n` binary variables, stored densely.
///
/// Cell `k` holds the probability of the assignment whose bits spell `k`,
/// with the first listed variable as the most significant bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct JointTable<T> {
    variables: Vec<String>,
    probs: Vec<T>,
}

#[derive(Deserialize)]
struct TableRepr<T> {
    variables: Vec<String>,
    probs: Vec<T>,
}

impl<T: Real> TryFrom<TableRepr<T>> for JointTable<T> {
    type Error = Error;
    fn try_from(r: TableRepr<T>) -> Result<Self> {
        JointTable::new(r.variables, r.probs)
    }
}

/// Result of a discrete CI decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CiOutcome<T> {
    pub holds: bool,
    pub max_dev: T,
}

impl<T: Real> JointTable<T> {
    pub fn new(variables: Vec<String>, probs: Vec<T>) -> Result<Self> {
        validate_names(&variables)?;
        let n = variables.len();
        if n > MAX_TABLE_VARS {
            return Err(Error::Model(format!("{n} variables exceeds the cap of {MAX_TABLE_VARS}")));
        }
        if probs.len() != 1 << n {
            return Err(Error::Model(format!(
                "expected {} probabilities for {n} variables, got {}",
                1usize << n,
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < T::zero()) {
            return Err(Error::Model(format!("invalid probability {p}")));
        }
        let total: T = probs.iter().copied().sum();
        if (total.as_f64() - 1.0).abs() > T::MASS_TOL {
            return Err(Error::Model(format!("probabilities sum to {total}, not 1")));
        }
        Ok(JointTable { variables, probs })
    }

    pub(crate) fn from_parts_unchecked(variables: Vec<String>, probs: Vec<T>) -> Self {
        debug_assert_eq!(probs.len(), 1 << variables.len());
        JointTable { variables, probs }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        index_of(&self.variables, name)
    }

    pub fn strictly_positive(&self) -> bool {
        self.strictly_positive_with(T::lit(T::POSITIVITY_FLOOR))
    }

    pub fn strictly_positive_with(&self, floor: T) -> bool {
        self.probs.iter().all(|&p| p >= floor)
    }

    /// Probability of one full assignment, given in variable order.
    pub fn prob_of(&self, assignment: &[bool]) -> Result<T> {
        if assignment.len() != self.n() {
            return Err(Error::Query("assignment length does not match the table".into()));
        }
        let cell = assignment.iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
        Ok(self.probs[cell])
    }

    /// Bit of the cell index that carries variable `i`.
    pub(crate) fn cell_bit(&self, i: usize) -> usize {
        self.n() - 1 - i
    }

    /// Cell-index mask covering the variables in `s`.
    pub(crate) fn cell_mask(&self, s: VarSet) -> usize {
        s.iter().fold(0, |m, i| m | 1 << self.cell_bit(i))
    }

    /// Marginal over `mask`, stored at full width and indexed by `cell & mask`.
    pub(crate) fn marginal_dense(&self, mask: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.probs.len()];
        for (cell, &p) in self.probs.iter().enumerate() {
            out[cell & mask] = out[cell & mask] + p;
        }
        out
    }

    pub fn marginalize<I>(&self, keep: I) -> Result<JointTable<T>>
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        let keep = resolve_names(&self.variables, keep)?;
        Ok(self.marginalize_set(keep))
    }

    pub(crate) fn marginalize_set(&self, keep: VarSet) -> JointTable<T> {
        let kept: Vec<usize> = keep.iter().collect();
        let k = kept.len();
        let mut probs = vec![T::zero(); 1 << k];
        for (cell, &p) in self.probs.iter().enumerate() {
            let mut idx = 0;
            for &v in &kept {
                idx = idx << 1 | (cell >> self.cell_bit(v) & 1);
            }
            probs[idx] = probs[idx] + p;
        }
        let variables = kept.iter().map(|&v| self.variables[v].clone()).collect();
        JointTable::from_parts_unchecked(variables, probs)
    }

    /// Same distribution with the variables listed in `order`.
    pub fn reorder(&self, order: &[String]) -> Result<JointTable<T>> {
        let target: BTreeSet<&String> = order.iter().collect();
        let source: BTreeSet<&String> = self.variables.iter().collect();
        if target != source || order.len() != self.n() {
            return Err(Error::Query("reorder needs a permutation of the table's variables".into()));
        }
        let src_bits: Vec<usize> =
            order.iter().map(|name| self.index_of(name).map(|i| self.cell_bit(i))).collect::<Result<_>>()?;
        let n = self.n();
        let mut probs = vec![T::zero(); self.probs.len()];
        for (new_cell, slot) in probs.iter_mut().enumerate() {
            let mut old = 0;
            for (pos, &bit) in src_bits.iter().enumerate() {
                old |= (new_cell >> (n - 1 - pos) & 1) << bit;
            }
            *slot = self.probs[old];
        }
        Ok(JointTable::from_parts_unchecked(order.to_vec(), probs))
    }

    pub fn cast<U: Real>(&self) -> Result<JointTable<U>> {
        let probs = self
            .probs
            .iter()
            .map(|p| U::from_f64(p.as_f64()).ok_or_else(|| Error::Model("unrepresentable probability".into())))
            .collect::<Result<Vec<U>>>()?;
        JointTable::new(self.variables.clone(), probs)
    }

    /// Decides `X ⊥ Y | Z` by the maximum absolute deviation of
    /// `P(x,y,z)P(z) - P(x,z)P(y,z)` over all assignments.
    pub fn is_ci(&self, q: &CIQuery, tol: T) -> Result<CiOutcome<T>> {
        if !(tol >= T::zero()) {
            return Err(Error::Query("tolerance must be nonnegative".into()));
        }
        let (x, y, z) = q.resolve(&self.variables)?;
        let max_dev = self.ci_deviation(x, y, z);
        Ok(CiOutcome { holds: max_dev <= tol, max_dev })
    }

    pub(crate) fn ci_deviation(&self, x: VarSet, y: VarSet, z: VarSet) -> T {
        let (xm, ym, zm) = (self.cell_mask(x), self.cell_mask(y), self.cell_mask(z));
        let um = xm | ym | zm;
        let pu = self.marginal_dense(um);
        let pxz = self.marginal_dense(xm | zm);
        let pyz = self.marginal_dense(ym | zm);
        let pz = self.marginal_dense(zm);
        product_identity_deviation(um, xm | zm, ym | zm, zm, |m| match m {
            _ if m == um => &pu,
            _ if m == xm | zm => &pxz,
            _ if m == ym | zm => &pyz,
            _ => &pz,
        })
    }
}

/// Max over assignments `s ⊆ um` of `|P(s)P(s∩z) - P(s∩xz)P(s∩yz)|`, where
/// `marg(mask)` yields a full-width marginal indexed by `cell & mask`.
pub(crate) fn product_identity_deviation<'a, T: Real>(
    um: usize,
    xzm: usize,
    yzm: usize,
    zm: usize,
    marg: impl Fn(usize) -> &'a [T],
) -> T {
    let (pu, pxz, pyz, pz) = (marg(um), marg(xzm), marg(yzm), marg(zm));
    let mut max = T::zero();
    let mut s = um;
    loop {
        let d = (pu[s] * pz[s & zm] - pxz[s & xzm] * pyz[s & yzm]).abs();
        if d > max {
            max = d;
        }
        if s == 0 {
            break;
        }
        s = (s - 1) & um;
    }
    max
}

/// Every marginal of a small table, precomputed for exhaustive scans.
pub(crate) struct MarginalCache<T> {
    table: JointTable<T>,
    marginals: Vec<Vec<T>>,
}

/// Largest table the marginal cache accepts (4^n scalars).
pub(crate) const MAX_CACHED_VARS: usize = 10;

impl<T: Real> MarginalCache<T> {
    pub(crate) fn new(table: &JointTable<T>) -> Result<Self> {
        if table.n() > MAX_CACHED_VARS {
            return Err(Error::Resource(format!("exhaustive scans are limited to {MAX_CACHED_VARS} variables")));
        }
        let size = table.probs.len();
        let marginals = (0..size).map(|mask| table.marginal_dense(mask)).collect();
        Ok(MarginalCache { table: table.clone(), marginals })
    }

    pub(crate) fn deviation(&self, x: VarSet, y: VarSet, z: VarSet) -> T {
        let t = &self.table;
        let (xm, ym, zm) = (t.cell_mask(x), t.cell_mask(y), t.cell_mask(z));
        product_identity_deviation(xm | ym | zm, xm | zm, ym | zm, zm, |m| &self.marginals[m])
    }
}
