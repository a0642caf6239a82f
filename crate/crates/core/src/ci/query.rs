use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::varset::{VarSet, MAX_VARS};

/// Name-level conditional-independence query `X ⊥ Y | Z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CIQuery {
    pub x: BTreeSet<String>,
    pub y: BTreeSet<String>,
    pub z: BTreeSet<String>,
}

impl CIQuery {
    pub fn new<I, J, K, S>(x: I, y: J, z: K) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = S>,
        K: IntoIterator<Item = S>,
        S: Into<String>,
    {
        CIQuery {
            x: x.into_iter().map(Into::into).collect(),
            y: y.into_iter().map(Into::into).collect(),
            z: z.into_iter().map(Into::into).collect(),
        }
    }

    pub fn swapped(&self) -> Self {
        CIQuery { x: self.y.clone(), y: self.x.clone(), z: self.z.clone() }
    }

    /// Resolves the three sets against a variable list, enforcing the query invariants.
    pub fn resolve(&self, variables: &[String]) -> Result<(VarSet, VarSet, VarSet)> {
        resolve_triple(variables, &self.x, &self.y, &self.z)
    }
}

pub(crate) fn resolve_triple(
    variables: &[String],
    x: &BTreeSet<String>,
    y: &BTreeSet<String>,
    z: &BTreeSet<String>,
) -> Result<(VarSet, VarSet, VarSet)> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Query("first and second sets must be nonempty".into()));
    }
    let xs = resolve_names(variables, x)?;
    let ys = resolve_names(variables, y)?;
    let zs = resolve_names(variables, z)?;
    if !xs.is_disjoint(ys) || !xs.is_disjoint(zs) || !ys.is_disjoint(zs) {
        return Err(Error::Query("sets must be pairwise disjoint".into()));
    }
    Ok((xs, ys, zs))
}

pub(crate) fn index_of(variables: &[String], name: &str) -> Result<usize> {
    variables.iter().position(|v| v == name).ok_or_else(|| Error::Query(format!("unknown variable `{name}`")))
}

pub(crate) fn resolve_names<I>(variables: &[String], names: I) -> Result<VarSet>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    if variables.len() > MAX_VARS {
        return Err(Error::Resource(format!("models above {MAX_VARS} variables are not addressable")));
    }
    names.into_iter().map(|n| index_of(variables, n.as_ref())).collect::<Result<Vec<_>>>().map(VarSet::from_indices)
}

pub(crate) fn validate_names(variables: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for v in variables {
        if v.is_empty() {
            return Err(Error::Model("empty variable name".into()));
        }
        if !seen.insert(v.as_str()) {
            return Err(Error::Model(format!("duplicate variable `{v}`")));
        }
    }
    Ok(())
}
