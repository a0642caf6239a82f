//! Agreement between vertex separation in a tree and independence in a model.
//!
//! `equivalence_scan` compares the two relations on every ordered disjoint
//! triple. The edge checks are the cheap certificates: the marginal test asks
//! that every tree edge joins marginally dependent variables, the defining test
//! that every edge is justified by dependence given all other variables.
//!
//! The marginal test's pass polarity ("no edge is marginally independent") is
//! our reading of the per-edge criterion; it is the condition whose failure
//! produces the contradiction in the single-edge case of the perfectness proof.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{separated_mask, UGraph};
use crate::oracle::{ModelRef, Oracle};
use crate::scalar::Real;
use crate::varset::VarSet;

/// Largest model `equivalence_scan` will enumerate.
pub const MAX_PERFECTNESS_VARS: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Separated in the graph but dependent in the model.
    SepNotCi,
    /// Independent in the model but connected in the graph.
    CiNotSep,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mismatch<T> {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: Vec<String>,
    pub direction: Direction,
    pub dev: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeResult<T> {
    pub edge: (String, String),
    pub marginal_dev: T,
    pub defining_dev: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerfectnessReport<T> {
    pub model_id: String,
    pub tree: UGraph,
    pub triples_checked: usize,
    /// Triples where the graph or the model asserts independence.
    pub non_vacuous: usize,
    pub mismatches: Vec<Mismatch<T>>,
    pub edge_results: Vec<EdgeResult<T>>,
}

impl<T> PerfectnessReport<T> {
    pub fn is_perfect(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// `PERFECT` or `MISMATCHES k`.
    pub fn summary(&self) -> String {
        if self.is_perfect() {
            "PERFECT".to_string()
        } else {
            format!("MISMATCHES {}", self.mismatches.len())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeDev<T> {
    pub edge: (String, String),
    pub dev: T,
    pub independent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeCheck<T> {
    pub passed: bool,
    pub per_edge: Vec<EdgeDev<T>>,
}

/// Number of ordered triples `(A, B, C)` of disjoint subsets of `n` variables
/// with `A` and `B` nonempty: `4^n - 2·3^n + 2^n`.
pub fn triple_count(n: usize) -> usize {
    4usize.pow(n as u32) + 2usize.pow(n as u32) - 2 * 3usize.pow(n as u32)
}

/// Model-variable index to graph-vertex index, requiring equal name sets.
fn vertex_map(variables: &[String], g: &UGraph) -> Result<Vec<usize>> {
    if variables.len() != g.vertices().len() {
        return Err(Error::Model("graph vertices and model variables differ".into()));
    }
    variables
        .iter()
        .map(|v| g.index_of(v).ok_or_else(|| Error::Model(format!("variable `{v}` is not a graph vertex"))))
        .collect()
}

fn to_graph(s: VarSet, map: &[usize]) -> VarSet {
    s.iter().map(|i| map[i]).collect()
}

fn model_id<T: Real>(m: &ModelRef<'_, T>) -> &'static str {
    match m {
        ModelRef::Discrete(_) => "table",
        ModelRef::Gaussian(_) => "gaussian",
        ModelRef::Graph(_) => "graph",
    }
}

/// Compares separation in `g` with independence in the model on every
/// disjoint triple. `g` need not be a tree.
pub fn compare_separation<'a, T: Real>(
    model: impl Into<ModelRef<'a, T>>,
    g: &UGraph,
    tol: T,
) -> Result<PerfectnessReport<T>> {
    let model = model.into();
    if !(tol >= T::zero()) {
        return Err(Error::Query("tolerance must be nonnegative".into()));
    }
    let variables = model.variables();
    let n = variables.len();
    if n > MAX_PERFECTNESS_VARS {
        return Err(Error::Resource(format!(
            "equivalence scans are limited to {MAX_PERFECTNESS_VARS} variables, model has {n}"
        )));
    }
    let map = vertex_map(variables, g)?;
    let adj = g.adjacency_masks()?;
    let oracle = model.cached()?;

    let outcomes = (0..4usize.pow(n as u32))
        .into_par_iter()
        .map(|code| triple_outcome(code, n, &map, &adj, &oracle, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut triples_checked = 0;
    let mut non_vacuous = 0;
    let mut found = Vec::new();
    for outcome in outcomes.into_iter().flatten() {
        triples_checked += 1;
        let (key, sep, ci, dev) = outcome;
        if sep || ci {
            non_vacuous += 1;
        }
        if sep != ci {
            let direction = if sep { Direction::SepNotCi } else { Direction::CiNotSep };
            found.push((key, direction, dev));
        }
    }
    found.sort_by_key(|(key, _, _)| *key);
    let mismatches = found
        .into_iter()
        .map(|((a, b, c), direction, dev)| Mismatch {
            a: a.names(variables),
            b: b.names(variables),
            c: c.names(variables),
            direction,
            dev,
        })
        .collect();
    let edge_results = edge_devs(&oracle, variables, g)?;
    Ok(PerfectnessReport {
        model_id: model_id(&model).to_string(),
        tree: g.clone(),
        triples_checked,
        non_vacuous,
        mismatches,
        edge_results,
    })
}

type TripleOutcome<T> = ((VarSet, VarSet, VarSet), bool, bool, T);

fn triple_outcome<T: Real>(
    code: usize,
    n: usize,
    map: &[usize],
    adj: &[u64],
    oracle: &Oracle<'_, T>,
    tol: T,
) -> Result<Option<TripleOutcome<T>>> {
    let mut sets = [VarSet::EMPTY; 3];
    let mut c = code;
    for v in 0..n {
        let label = c % 4;
        c /= 4;
        if label < 3 {
            sets[label] = sets[label].with(v);
        }
    }
    let [a, b, cs] = sets;
    if a.is_empty() || b.is_empty() {
        return Ok(None);
    }
    let sep = separated_mask(adj, to_graph(a, map), to_graph(b, map), to_graph(cs, map));
    let dev = oracle.deviation(a, b, cs)?;
    Ok(Some(((a, b, cs), sep, dev <= tol, dev)))
}

fn edge_devs<T: Real>(oracle: &Oracle<'_, T>, variables: &[String], g: &UGraph) -> Result<Vec<EdgeResult<T>>> {
    let all = VarSet::full(variables.len());
    g.edges()
        .iter()
        .map(|&(u, v)| {
            let (x, y) = model_pair(variables, g, u, v)?;
            let (xs, ys) = (VarSet::singleton(x), VarSet::singleton(y));
            Ok(EdgeResult {
                edge: (g.vertices()[u].clone(), g.vertices()[v].clone()),
                marginal_dev: oracle.deviation(xs, ys, VarSet::EMPTY)?,
                defining_dev: oracle.deviation(xs, ys, all.minus(xs.union(ys)))?,
            })
        })
        .collect()
}

fn model_pair(variables: &[String], g: &UGraph, u: usize, v: usize) -> Result<(usize, usize)> {
    let find = |w: usize| {
        variables
            .iter()
            .position(|name| *name == g.vertices()[w])
            .ok_or_else(|| Error::Model(format!("vertex `{}` is not a model variable", g.vertices()[w])))
    };
    Ok((find(u)?, find(v)?))
}

fn require_tree(g: &UGraph) -> Result<()> {
    if g.is_tree() {
        Ok(())
    } else {
        Err(Error::Structure("graph is not a tree".into()))
    }
}

/// Full comparison of tree separation against model independence.
pub fn equivalence_scan<'a, T: Real>(
    model: impl Into<ModelRef<'a, T>>,
    tree: &UGraph,
    tol: T,
) -> Result<PerfectnessReport<T>> {
    require_tree(tree)?;
    compare_separation(model, tree, tol)
}

fn edge_check<'a, T: Real>(
    model: ModelRef<'a, T>,
    tree: &UGraph,
    tol: T,
    condition_on_rest: bool,
) -> Result<EdgeCheck<T>> {
    require_tree(tree)?;
    if !(tol >= T::zero()) {
        return Err(Error::Query("tolerance must be nonnegative".into()));
    }
    let variables = model.variables();
    vertex_map(variables, tree)?;
    let oracle = model.direct()?;
    let all = VarSet::full(variables.len());
    let per_edge = tree
        .edges()
        .iter()
        .map(|&(u, v)| {
            let (x, y) = model_pair(variables, tree, u, v)?;
            let (xs, ys) = (VarSet::singleton(x), VarSet::singleton(y));
            let z = if condition_on_rest { all.minus(xs.union(ys)) } else { VarSet::EMPTY };
            let dev = oracle.deviation(xs, ys, z)?;
            Ok(EdgeDev { edge: (tree.vertices()[u].clone(), tree.vertices()[v].clone()), dev, independent: dev <= tol })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = per_edge.iter().all(|e| !e.independent);
    Ok(EdgeCheck { passed, per_edge })
}

/// Passes when no tree edge joins marginally independent variables.
pub fn edge_marginal_check<'a, T: Real>(
    model: impl Into<ModelRef<'a, T>>,
    tree: &UGraph,
    tol: T,
) -> Result<EdgeCheck<T>> {
    edge_check(model.into(), tree, tol, false)
}

/// Passes when every tree edge joins variables dependent given all others.
pub fn defining_edge_check<'a, T: Real>(
    model: impl Into<ModelRef<'a, T>>,
    tree: &UGraph,
    tol: T,
) -> Result<EdgeCheck<T>> {
    edge_check(model.into(), tree, tol, true)
}
