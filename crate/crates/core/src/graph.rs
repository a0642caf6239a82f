//! Undirected graphs and vertex separation.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ci::{resolve_triple, JointTable};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::varset::{VarSet, MAX_VARS};

/// Simple undirected graph over named vertices.
///
/// Vertices are kept sorted; vertex indices used internally are positions in
/// that order. Edges are stored with the smaller index first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UGraph {
    vertices: Vec<String>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
}

impl Serialize for UGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr { vertices: self.vertices.clone(), edges: self.edge_names() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GraphRepr::deserialize(d)?;
        UGraph::new(r.vertices, r.edges).map_err(serde::de::Error::custom)
    }
}

/// Separation query `A ⊥_G B | C`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SepQuery {
    pub a: BTreeSet<String>,
    pub b: BTreeSet<String>,
    pub c: BTreeSet<String>,
}

impl SepQuery {
    pub fn new<I, J, K, S>(a: I, b: J, c: K) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = S>,
        K: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SepQuery {
            a: a.into_iter().map(Into::into).collect(),
            b: b.into_iter().map(Into::into).collect(),
            c: c.into_iter().map(Into::into).collect(),
        }
    }
}

impl UGraph {
    pub fn new<V, E, S>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator<Item = S>,
        E: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = vertices.into_iter().map(Into::into).collect();
        if set.iter().any(String::is_empty) {
            return Err(Error::Structure("empty vertex name".into()));
        }
        let vertices: Vec<String> = set.into_iter().collect();
        let mut pairs = BTreeSet::new();
        for (u, v) in edges {
            let (u, v): (String, String) = (u.into(), v.into());
            let ui = vertices
                .binary_search(&u)
                .map_err(|_| Error::Structure(format!("edge endpoint `{u}` is not a vertex")))?;
            let vi = vertices
                .binary_search(&v)
                .map_err(|_| Error::Structure(format!("edge endpoint `{v}` is not a vertex")))?;
            if ui == vi {
                return Err(Error::Structure(format!("self-loop on `{u}`")));
            }
            pairs.insert((ui.min(vi), ui.max(vi)));
        }
        Ok(Self::from_indices(vertices, pairs))
    }

    /// Builds from sorted, unique vertex names and normalized index pairs.
    pub(crate) fn from_indices(vertices: Vec<String>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        UGraph { vertices, edges: edges.into_iter().collect(), adjacency }
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_names(&self) -> Vec<(String, String)> {
        self.edges.iter().map(|&(u, v)| (self.vertices[u].clone(), self.vertices[v].clone())).collect()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_str().cmp(name)).ok()
    }

    pub fn has_edge(&self, u: &str, v: &str) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(a), Some(b)) => self.adjacency[a].binary_search(&b).is_ok(),
            _ => false,
        }
    }

    /// Connected and `|E| = |V| - 1`; the single-vertex graph counts.
    pub fn is_tree(&self) -> bool {
        let n = self.vertices.len();
        n >= 1 && self.edges.len() == n - 1 && self.reachable(&[0], &vec![false; n]).iter().all(|&r| r)
    }

    /// `A ⊥_G B | C`: no `B` vertex is reachable from `A` once `C` is deleted.
    pub fn separates(&self, q: &SepQuery) -> Result<bool> {
        if self.vertices.len() <= MAX_VARS {
            let (a, b, c) = resolve_triple(&self.vertices, &q.a, &q.b, &q.c)?;
            let adj = self.adjacency_masks()?;
            return Ok(separated_mask(&adj, a, b, c));
        }
        let (a, b, c) = self.resolve_indices(q)?;
        Ok(self.separated_idx(&a, &b, &c))
    }

    fn resolve_indices(&self, q: &SepQuery) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
        if q.a.is_empty() || q.b.is_empty() {
            return Err(Error::Query("first and second sets must be nonempty".into()));
        }
        let lookup = |set: &BTreeSet<String>| -> Result<Vec<usize>> {
            set.iter().map(|n| self.index_of(n).ok_or_else(|| Error::Query(format!("unknown vertex `{n}`")))).collect()
        };
        let (a, b, c) = (lookup(&q.a)?, lookup(&q.b)?, lookup(&q.c)?);
        if !q.a.is_disjoint(&q.b) || !q.a.is_disjoint(&q.c) || !q.b.is_disjoint(&q.c) {
            return Err(Error::Query("sets must be pairwise disjoint".into()));
        }
        Ok((a, b, c))
    }

    /// Index-level separation, valid for any graph size.
    pub(crate) fn separated_idx(&self, a: &[usize], b: &[usize], c: &[usize]) -> bool {
        let mut blocked = vec![false; self.vertices.len()];
        for &v in c {
            blocked[v] = true;
        }
        let seen = self.reachable(a, &blocked);
        !b.iter().any(|&v| seen[v])
    }

    fn reachable(&self, from: &[usize], blocked: &[bool]) -> Vec<bool> {
        let mut seen = blocked.to_vec();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in from {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        // blocked vertices are not reached
        for (s, &b) in seen.iter_mut().zip(blocked) {
            if b {
                *s = false;
            }
        }
        seen
    }

    /// Vertex indices of the connected component of `start` after deleting `removed_edge`.
    pub fn component_without_edge(&self, start: usize, removed_edge: (usize, usize)) -> Vec<usize> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        let (p, q) = (removed_edge.0.min(removed_edge.1), removed_edge.0.max(removed_edge.1));
        while let Some(u) = stack.pop() {
            for &w in &self.adjacency[u] {
                if (u.min(w), u.max(w)) == (p, q) || seen[w] {
                    continue;
                }
                seen[w] = true;
                stack.push(w);
            }
        }
        (0..n).filter(|&i| seen[i]).collect()
    }

    /// Neighbor bitmasks, available for graphs of at most 64 vertices.
    pub(crate) fn adjacency_masks(&self) -> Result<Vec<u64>> {
        if self.vertices.len() > MAX_VARS {
            return Err(Error::Resource(format!("mask-based scans need at most {MAX_VARS} vertices")));
        }
        Ok(self.adjacency.iter().map(|a| VarSet::from_indices(a.iter().copied()).0).collect())
    }
}

/// Reachability from `from` in the graph given by `adj`, avoiding `blocked`.
pub(crate) fn reach_mask(adj: &[u64], from: u64, blocked: u64) -> u64 {
    let mut seen = from & !blocked;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0;
        let mut f = frontier;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= adj[v];
        }
        next &= !seen & !blocked;
        seen |= next;
        frontier = next;
    }
    seen
}

pub(crate) fn separated_mask(adj: &[u64], a: VarSet, b: VarSet, c: VarSet) -> bool {
    reach_mask(adj, a.0, c.0) & b.0 == 0
}

/// Markov network of a table: an edge joins `x` and `y` exactly when they are
/// dependent given all remaining variables at tolerance `tol`.
pub fn markov_network<T: Real>(t: &JointTable<T>, tol: T) -> Result<UGraph> {
    if !t.strictly_positive() {
        log::warn!("markov_network: table is not strictly positive; Intersection may fail");
    }
    let n = t.n();
    let all = VarSet::full(n);
    let mut names: Vec<(String, String)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (x, y) = (VarSet::singleton(i), VarSet::singleton(j));
            let rest = all.minus(x.union(y));
            if t.ci_deviation(x, y, rest) > tol {
                names.push((t.variables()[i].clone(), t.variables()[j].clone()));
            }
        }
    }
    UGraph::new(t.variables().iter().cloned(), names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> UGraph {
        UGraph::new(["a", "b", "c"], [("a", "b"), ("b", "c")]).unwrap()
    }

    fn star() -> UGraph {
        UGraph::new(["h", "u", "v", "w"], [("h", "u"), ("h", "v"), ("h", "w")]).unwrap()
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn smoothed_xor(eps: f64) -> JointTable<f64> {
        // cells indexed (x, y, z) with x most significant
        let raw: Vec<f64> = (0..8)
            .map(|cell| {
                let (x, y, z) = (cell >> 2 & 1, cell >> 1 & 1, cell & 1);
                if z == x ^ y {
                    (1.0 - 8.0 * eps) / 4.0 + eps
                } else {
                    eps
                }
            })
            .collect();
        let total: f64 = raw.iter().sum();
        JointTable::new(names(&["x", "y", "z"]), raw.iter().map(|p| p / total).collect()).unwrap()
    }

    fn chain_table() -> JointTable<f64> {
        // P(x) P(c|x) P(y|c) over (x, c, y)
        let px = [0.7, 0.3];
        let pc = [[0.8, 0.2], [0.2, 0.8]];
        let py = [[0.9, 0.1], [0.4, 0.6]];
        let probs = (0..8)
            .map(|cell| {
                let (x, c, y) = (cell >> 2 & 1, cell >> 1 & 1, cell & 1);
                px[x] * pc[x][c] * py[c][y]
            })
            .collect();
        JointTable::new(names(&["x", "c", "y"]), probs).unwrap()
    }

    #[test]
    fn path_separation() {
        let g = path3();
        assert!(g.separates(&SepQuery::new(["a"], ["c"], ["b"])).unwrap());
        assert!(!g.separates(&SepQuery::new(["a"], ["c"], Vec::<&str>::new())).unwrap());
    }

    #[test]
    fn star_separation() {
        let g = star();
        assert!(g.separates(&SepQuery::new(["u"], ["v", "w"], ["h"])).unwrap());
        assert!(!g.separates(&SepQuery::new(["u"], ["v", "w"], Vec::<&str>::new())).unwrap());
    }

    #[test]
    fn invalid_queries() {
        let g = path3();
        assert!(matches!(g.separates(&SepQuery::new(["a"], ["q"], ["b"])), Err(Error::Query(_))));
        assert!(matches!(g.separates(&SepQuery::new(["a"], ["a"], ["b"])), Err(Error::Query(_))));
        assert!(matches!(g.separates(&SepQuery::new(Vec::<&str>::new(), ["a"], ["b"])), Err(Error::Query(_))));
    }

    #[test]
    fn invalid_graphs() {
        assert!(matches!(UGraph::new(["a"], [("a", "a")]), Err(Error::Structure(_))));
        assert!(matches!(UGraph::new(["a"], [("a", "b")]), Err(Error::Structure(_))));
        assert!(matches!(UGraph::new([""], Vec::<(&str, &str)>::new()), Err(Error::Structure(_))));
    }

    #[test]
    fn tree_recognition() {
        assert!(UGraph::new(["a"], Vec::<(&str, &str)>::new()).unwrap().is_tree());
        assert!(path3().is_tree());
        assert!(!UGraph::new(["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")]).unwrap().is_tree());
        assert!(!UGraph::new(["a", "b", "c", "d"], [("a", "b"), ("c", "d")]).unwrap().is_tree());
    }

    #[test]
    fn duplicate_edges_collapse_and_json_is_canonical() {
        let g = UGraph::new(["c", "b", "a"], [("c", "b"), ("b", "c"), ("b", "a")]).unwrap();
        assert_eq!(g.edges().len(), 2);
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"vertices":["a","b","c"],"edges":[["a","b"],["b","c"]]}"#);
        let back: UGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<UGraph>(r#"{"vertices":["a"],"edges":[["a","z"]]}"#).is_err());
    }

    #[test]
    fn large_graph_uses_index_path() {
        let n = 70;
        let vs: Vec<String> = (0..n).map(|i| format!("p{i:03}")).collect();
        let es: Vec<(String, String)> = (1..n).map(|i| (vs[i - 1].clone(), vs[i].clone())).collect();
        let g = UGraph::new(vs.clone(), es).unwrap();
        assert!(g.is_tree());
        assert!(g.separates(&SepQuery::new(["p000"], ["p069"], ["p040"])).unwrap());
        assert!(!g.separates(&SepQuery::new(["p000"], ["p069"], Vec::<&str>::new())).unwrap());
        assert!(g.adjacency_masks().is_err());
    }

    #[test]
    fn markov_network_examples() {
        let product = JointTable::new(
            names(&["a", "b", "c"]),
            (0..8)
                .map(|cell: usize| {
                    let p = [0.3, 0.6, 0.8];
                    (0..3).map(|i| if cell >> (2 - i) & 1 == 1 { p[i] } else { 1.0 - p[i] }).product()
                })
                .collect(),
        )
        .unwrap();
        assert!(markov_network(&product, 1e-9).unwrap().edges().is_empty());

        let chain = markov_network(&chain_table(), 1e-9).unwrap();
        assert_eq!(chain.edge_names(), vec![("c".to_string(), "x".to_string()), ("c".to_string(), "y".to_string())]);

        let xor = markov_network(&smoothed_xor(0.01), 1e-9).unwrap();
        assert_eq!(xor.edges().len(), 3);
    }

    #[test]
    fn markov_network_ignores_variable_order() {
        let t = smoothed_xor(0.02);
        let r = t.reorder(&names(&["z", "x", "y"])).unwrap();
        assert_eq!(markov_network(&t, 1e-9).unwrap(), markov_network(&r, 1e-9).unwrap());
        let c = chain_table();
        let r = c.reorder(&names(&["y", "c", "x"])).unwrap();
        assert_eq!(markov_network(&c, 1e-9).unwrap(), markov_network(&r, 1e-9).unwrap());
    }

    #[test]
    fn component_without_edge_splits_tree() {
        let g = path3();
        let (a, b) = (g.index_of("a").unwrap(), g.index_of("b").unwrap());
        assert_eq!(g.component_without_edge(a, (a, b)), vec![a]);
        assert_eq!(g.component_without_edge(b, (b, a)).len(), 2);
    }

    fn random_tree_graph(n: usize, code: &[usize]) -> UGraph {
        let names: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
        let edges = crate::model_gen::prufer_decode(n, code);
        UGraph::from_indices(names, edges)
    }

    fn random_graph(n: usize, bits: u64) -> UGraph {
        let names: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
        let pairs = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)));
        UGraph::from_indices(names, pairs.enumerate().filter(|(k, _)| bits >> k & 1 == 1).map(|(_, e)| e))
    }

    proptest! {
        #[test]
        fn separation_is_symmetric_and_matches_index_path(n in 2usize..9, bits in any::<u64>(), labels in proptest::collection::vec(0u8..4, 9)) {
            let g = random_graph(n, bits);
            let mut sets = [Vec::new(), Vec::new(), Vec::new()];
            for (v, &l) in labels.iter().take(n).enumerate() {
                if l < 3 { sets[l as usize].push(g.vertices()[v].clone()); }
            }
            prop_assume!(!sets[0].is_empty() && !sets[1].is_empty());
            let q = SepQuery::new(sets[0].clone(), sets[1].clone(), sets[2].clone());
            let swapped = SepQuery::new(sets[1].clone(), sets[0].clone(), sets[2].clone());
            let fast = g.separates(&q).unwrap();
            prop_assert_eq!(fast, g.separates(&swapped).unwrap());
            let idx = |s: &Vec<String>| s.iter().map(|x| g.index_of(x).unwrap()).collect::<Vec<_>>();
            prop_assert_eq!(fast, g.separated_idx(&idx(&sets[0]), &idx(&sets[1]), &idx(&sets[2])));
        }

        #[test]
        fn tree_separation_is_monotone_in_the_separator(n in 3usize..10, code in proptest::collection::vec(0usize..10, 8), labels in proptest::collection::vec(0u8..4, 10), extra in 0usize..10) {
            let code: Vec<usize> = code.iter().take(n - 2).map(|c| c % n).collect();
            let g = random_tree_graph(n, &code);
            prop_assert!(g.is_tree());
            let mut sets = [VarSet::EMPTY; 3];
            for (v, &l) in labels.iter().take(n).enumerate() {
                if l < 3 { sets[l as usize] = sets[l as usize].with(v); }
            }
            prop_assume!(!sets[0].is_empty() && !sets[1].is_empty());
            let adj = g.adjacency_masks().unwrap();
            let v = extra % n;
            prop_assume!(!sets[0].contains(v) && !sets[1].contains(v));
            if separated_mask(&adj, sets[0], sets[1], sets[2]) {
                prop_assert!(separated_mask(&adj, sets[0], sets[1], sets[2].with(v)));
            }
        }
    }
}
