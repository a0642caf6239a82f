//! Seeded generators for tree-factored binary models, Gaussian trees,
//! arbitrary positive tables and the degenerate copy distribution.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use serde::Serialize;

use crate::ci::{GaussianModel, JointTable, MAX_TABLE_VARS};
use crate::error::{Error, Result};
use crate::graph::{markov_network, UGraph};
use crate::learn::SampleMatrix;
use crate::rng::{Seed, SeededRng};

/// Default tolerance for CI decisions throughout the crate.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Trees above this size skip the Markov-network recovery self-check, whose
/// absolute deviations shrink with the number of conditioning variables.
/// Models with a zero coupling floor skip it too: nothing keeps their edges
/// detectable at a fixed tolerance.
pub const MARKOV_SELF_CHECK_MAX_VARS: usize = 10;

const MAX_REJECTIONS: usize = 1_000_000;

/// Uniformly random labelled tree on `v0..v(n-1)`, decoded from a Prüfer sequence.
pub fn random_tree(n: usize, seed: Seed) -> Result<UGraph> {
    if n == 0 {
        return Err(Error::Parameter("a tree needs at least one vertex".into()));
    }
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut rng = SeededRng::new(seed);
    let code: Vec<usize> = (0..n.saturating_sub(2)).map(|_| rng.index(n)).collect();
    let edges = prufer_decode(n, &code);
    UGraph::new(names.iter().cloned(), edges.into_iter().map(|(u, v)| (names[u].clone(), names[v].clone())))
}

/// Edges of the labelled tree encoded by `code` (length `n - 2`).
pub fn prufer_decode(n: usize, code: &[usize]) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    let mut degree = vec![1usize; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in code {
        let Reverse(leaf) = leaves.pop().expect("a leaf exists");
        edges.push((leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.push(Reverse(c));
        }
    }
    let Reverse(u) = leaves.pop().expect("two leaves remain");
    let Reverse(v) = leaves.pop().expect("two leaves remain");
    edges.push((u, v));
    edges
}

/// Conditional table of one variable: `[P(v=1)]` for the root,
/// `[P(v=1 | parent=0), P(v=1 | parent=1)]` otherwise.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cpt {
    pub variable: String,
    pub parent: Option<String>,
    pub p_one: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TreeParams {
    pub epsilon: f64,
    pub delta: f64,
}

/// Binary distribution factored along a rooted tree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeModel {
    pub tree: UGraph,
    pub root: String,
    pub cpts: Vec<Cpt>,
    pub table: JointTable<f64>,
    pub seed: Option<Seed>,
    pub params: TreeParams,
}

/// Parent of every vertex when `tree` is rooted at `root`, plus a BFS order.
fn orient(tree: &UGraph, root: usize) -> (Vec<Option<usize>>, Vec<usize>) {
    let n = tree.vertices().len();
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &w in tree.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(u);
                queue.push_back(w);
            }
        }
    }
    (parent, order)
}

impl TreeModel {
    /// Multiplies out a rooted CPT parameterization and checks every invariant.
    pub fn from_cpts(tree: UGraph, root: &str, cpts: Vec<Cpt>, params: TreeParams) -> Result<TreeModel> {
        if !tree.is_tree() {
            return Err(Error::Structure("graph is not a tree".into()));
        }
        let n = tree.vertices().len();
        if n > MAX_TABLE_VARS {
            return Err(Error::Resource(format!("tree models are limited to {MAX_TABLE_VARS} vertices")));
        }
        let root_idx = tree.index_of(root).ok_or_else(|| Error::Model(format!("root `{root}` is not a vertex")))?;
        let (parent, _) = orient(&tree, root_idx);
        let mut by_vertex: Vec<Option<&Cpt>> = vec![None; n];
        for cpt in &cpts {
            let v = tree
                .index_of(&cpt.variable)
                .ok_or_else(|| Error::Model(format!("cpt for unknown vertex `{}`", cpt.variable)))?;
            if by_vertex[v].replace(cpt).is_some() {
                return Err(Error::Model(format!("duplicate cpt for `{}`", cpt.variable)));
            }
            let expected = parent[v].map(|p| tree.vertices()[p].as_str());
            if cpt.parent.as_deref() != expected {
                return Err(Error::Model(format!("cpt parent of `{}` disagrees with the rooted tree", cpt.variable)));
            }
            let want_len = if expected.is_some() { 2 } else { 1 };
            if cpt.p_one.len() != want_len {
                return Err(Error::Model(format!("cpt of `{}` must have {want_len} entries", cpt.variable)));
            }
        }
        let by_vertex: Vec<&Cpt> = by_vertex
            .into_iter()
            .enumerate()
            .map(|(v, c)| c.ok_or_else(|| Error::Model(format!("missing cpt for `{}`", tree.vertices()[v]))))
            .collect::<Result<_>>()?;

        // Table variables follow the tree's (sorted) vertex order.
        let mut probs = vec![0.0; 1 << n];
        for (cell, slot) in probs.iter_mut().enumerate() {
            let value = |v: usize| cell >> (n - 1 - v) & 1 == 1;
            let mut p = 1.0;
            for v in 0..n {
                let q = match parent[v] {
                    None => by_vertex[v].p_one[0],
                    Some(u) => by_vertex[v].p_one[value(u) as usize],
                };
                p *= if value(v) { q } else { 1.0 - q };
            }
            *slot = p;
        }
        let table = JointTable::new(tree.vertices().to_vec(), probs)?;
        let ordered: Vec<Cpt> = {
            let (_, order) = orient(&tree, root_idx);
            order.into_iter().map(|v| by_vertex[v].clone()).collect()
        };
        let model = TreeModel { tree, root: root.to_string(), cpts: ordered, table, seed: None, params };
        model.verify()?;
        Ok(model)
    }

    /// Checks entry ranges, the coupling floor and (for small trees with a
    /// positive coupling floor) that the Markov network of the table is the tree.
    pub fn verify(&self) -> Result<()> {
        let TreeParams { epsilon, delta } = self.params;
        for cpt in &self.cpts {
            if cpt.p_one.iter().any(|&p| !(p >= epsilon && p <= 1.0 - epsilon)) {
                return Err(Error::Model(format!("cpt of `{}` leaves [epsilon, 1-epsilon]", cpt.variable)));
            }
            if cpt.parent.is_some() && (cpt.p_one[1] - cpt.p_one[0]).abs() < delta {
                return Err(Error::Model(format!("edge into `{}` is below the coupling floor", cpt.variable)));
            }
        }
        if delta > 0.0 && self.tree.vertices().len() <= MARKOV_SELF_CHECK_MAX_VARS {
            let mn = markov_network(&self.table, DEFAULT_TOL)?;
            if mn != self.tree {
                return Err(Error::Model("markov network of the table differs from the tree".into()));
            }
        }
        Ok(())
    }
}

fn check_tree_params(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Parameter("epsilon must lie in (0, 0.5)".into()));
    }
    if !(delta >= 0.0 && delta < 1.0 - 2.0 * epsilon) {
        return Err(Error::Parameter("delta must lie in [0, 1 - 2 epsilon)".into()));
    }
    Ok(())
}

/// Strictly positive binary model factored along `tree`, rooted at its
/// lexicographically smallest vertex, with every edge coupled by at least `delta`.
pub fn random_tree_binary(tree: &UGraph, seed: Seed, epsilon: f64, delta: f64) -> Result<TreeModel> {
    check_tree_params(epsilon, delta)?;
    if !tree.is_tree() {
        return Err(Error::Structure("graph is not a tree".into()));
    }
    let mut rng = SeededRng::new(seed);
    let (parent, order) = orient(tree, 0);
    let name = |v: usize| tree.vertices()[v].clone();
    let mut cpts = Vec::with_capacity(order.len());
    for v in order {
        let cpt = match parent[v] {
            None => Cpt { variable: name(v), parent: None, p_one: vec![rng.uniform(epsilon, 1.0 - epsilon)] },
            Some(u) => {
                let mut tries = 0;
                let (p0, p1) = loop {
                    let p0 = rng.uniform(epsilon, 1.0 - epsilon);
                    let p1 = rng.uniform(epsilon, 1.0 - epsilon);
                    if (p1 - p0).abs() >= delta {
                        break (p0, p1);
                    }
                    tries += 1;
                    if tries == MAX_REJECTIONS {
                        return Err(Error::Parameter("coupling floor is practically infeasible".into()));
                    }
                };
                Cpt { variable: name(v), parent: Some(name(u)), p_one: vec![p0, p1] }
            }
        };
        cpts.push(cpt);
    }
    let root = name(0);
    let mut model = TreeModel::from_cpts(tree.clone(), &root, cpts, TreeParams { epsilon, delta })?;
    model.seed = Some(seed);
    Ok(model)
}

/// The hand-checkable chain `x → c → y` with `P(x=1)=0.3`,
/// `P(c=1|x) = 0.2 / 0.8`, `P(y=1|c) = 0.1 / 0.6`.
pub fn chain_preset() -> TreeModel {
    let tree = UGraph::new(["x", "c", "y"], [("x", "c"), ("c", "y")]).expect("valid chain");
    let cpt = |v: &str, p: Option<&str>, q: &[f64]| Cpt {
        variable: v.to_string(),
        parent: p.map(str::to_string),
        p_one: q.to_vec(),
    };
    let cpts = vec![cpt("x", None, &[0.3]), cpt("c", Some("x"), &[0.2, 0.8]), cpt("y", Some("c"), &[0.1, 0.6])];
    TreeModel::from_cpts(tree, "x", cpts, TreeParams { epsilon: 0.05, delta: 0.05 }).expect("valid preset")
}

/// Standardized Gaussian whose correlations multiply along tree paths; each
/// edge correlation has magnitude in `[rho_min, rho_max]` and a random sign.
pub fn random_tree_gaussian(tree: &UGraph, seed: Seed, rho_min: f64, rho_max: f64) -> Result<GaussianModel<f64>> {
    if !(rho_min > 0.0 && rho_min <= rho_max && rho_max < 1.0) {
        return Err(Error::Parameter("need 0 < rho_min <= rho_max < 1".into()));
    }
    if !tree.is_tree() {
        return Err(Error::Structure("graph is not a tree".into()));
    }
    let n = tree.vertices().len();
    let mut rng = SeededRng::new(seed);
    let (parent, order) = orient(tree, 0);
    let mut edge_rho = vec![0.0; n];
    for &v in &order {
        if parent[v].is_some() {
            let magnitude = rng.uniform(rho_min, rho_max);
            edge_rho[v] = if rng.bit() { -magnitude } else { magnitude };
        }
    }
    let mut cov = vec![vec![0.0; n]; n];
    for (s, row) in cov.iter_mut().enumerate() {
        // products along the unique path from s
        let mut stack = vec![(s, usize::MAX, 1.0)];
        while let Some((u, from, r)) = stack.pop() {
            row[u] = r;
            for &w in tree.neighbors(u) {
                if w != from {
                    let rho = if parent[w] == Some(u) { edge_rho[w] } else { edge_rho[u] };
                    stack.push((w, u, r * rho));
                }
            }
        }
    }
    GaussianModel::new(tree.vertices().to_vec(), cov)
}

/// Random strictly positive table over `v0..v(n-1)`: a uniform draw from the
/// simplex mixed with the uniform table at rate `epsilon · 2^n`, so every cell
/// is at least `epsilon`.
pub fn random_positive_table(n: usize, seed: Seed, epsilon: f64) -> Result<JointTable<f64>> {
    if !(1..=MAX_TABLE_VARS).contains(&n) {
        return Err(Error::Parameter(format!("n must lie in 1..={MAX_TABLE_VARS}")));
    }
    let cells = 1usize << n;
    let uniform = 1.0 / cells as f64;
    if !(epsilon > 0.0 && epsilon <= uniform) {
        return Err(Error::Parameter("epsilon must lie in (0, 2^-n]".into()));
    }
    let mut rng = SeededRng::new(seed);
    let weights: Vec<f64> = (0..cells).map(|_| -(1.0 - rng.unit()).ln()).collect();
    let total: f64 = weights.iter().sum();
    let rate = epsilon * cells as f64;
    let probs = weights.iter().map(|w| (1.0 - rate) * w / total + rate * uniform).collect();
    JointTable::new((0..n).map(|i| format!("v{i}")).collect(), probs)
}

/// `k` binary copies of one fair bit: half the mass on all-zeros, half on all-ones.
pub fn deterministic_copy_dist(k: usize) -> Result<JointTable<f64>> {
    if !(2..=MAX_TABLE_VARS).contains(&k) {
        return Err(Error::Parameter(format!("k must lie in 2..={MAX_TABLE_VARS}")));
    }
    let mut probs = vec![0.0; 1 << k];
    probs[0] = 0.5;
    probs[(1 << k) - 1] = 0.5;
    JointTable::new((0..k).map(|i| format!("v{i}")).collect(), probs)
}

/// `count` independent full assignments drawn from `table` by inverse CDF.
pub fn sample_rows(table: &JointTable<f64>, count: usize, seed: Seed) -> Result<SampleMatrix> {
    if count == 0 {
        return Err(Error::Parameter("sample count must be positive".into()));
    }
    let mut cdf = Vec::with_capacity(table.probs().len());
    let mut acc = 0.0;
    for &p in table.probs() {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = SeededRng::new(seed);
    let n = table.n();
    let rows = (0..count)
        .map(|_| {
            let u = rng.unit() * acc;
            let cell = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            (0..n).map(|v| cell >> (n - 1 - v) & 1 == 1).collect()
        })
        .collect();
    SampleMatrix::new(table.variables().to_vec(), rows)
}
