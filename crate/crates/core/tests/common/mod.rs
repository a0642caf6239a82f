#![allow(dead_code)]

use mtlab::model_gen::{random_positive_table, random_tree, random_tree_binary, random_tree_gaussian};
use mtlab::{Gaussian, Seed, Table, TreeModel, UGraph};

pub const TREE_EPSILON: f64 = 1e-4;
pub const TREE_DELTA: f64 = 0.05;

/// Binary tree model number `i` of the standard family: n cycles through 3..=7.
pub fn binary_tree_model(i: u64) -> TreeModel {
    let n = 3 + (i % 5) as usize;
    let tree = random_tree(n, Seed(2 * i)).unwrap();
    random_tree_binary(&tree, Seed(2 * i + 1), TREE_EPSILON, TREE_DELTA).unwrap()
}

pub fn binary_tree_model_n(i: u64, n: usize) -> TreeModel {
    let tree = random_tree(n, Seed(1_000 + 2 * i)).unwrap();
    random_tree_binary(&tree, Seed(1_001 + 2 * i), TREE_EPSILON, TREE_DELTA).unwrap()
}

/// Gaussian tree model number `i`, n cycling through `lo..=hi`.
pub fn gaussian_tree_model(i: u64, lo: usize, hi: usize) -> (UGraph, Gaussian) {
    let n = lo + (i as usize) % (hi - lo + 1);
    let tree = random_tree(n, Seed(5_000 + 2 * i)).unwrap();
    let g = random_tree_gaussian(&tree, Seed(5_001 + 2 * i), 0.2, 0.9).unwrap();
    (tree, g)
}

/// Random positive table number `i` on `n` variables with a floor at a tenth of uniform.
pub fn positive_table(i: u64, n: usize) -> Table {
    let eps = 0.1 / (1u64 << n) as f64;
    random_positive_table(n, Seed(9_000 + i), eps).unwrap()
}

/// Product of independent bits with P(v_i = 1) = 0.2 + 0.1 i.
pub fn product_table(n: usize) -> Table {
    let p: Vec<f64> = (0..n).map(|i| 0.2 + 0.1 * i as f64).collect();
    let probs = (0..1usize << n)
        .map(|cell| (0..n).map(|i| if cell >> (n - 1 - i) & 1 == 1 { p[i] } else { 1.0 - p[i] }).product())
        .collect();
    Table::new((0..n).map(|i| format!("v{i}")).collect(), probs).unwrap()
}

/// Edge set as sorted name pairs.
pub fn edge_set(g: &UGraph) -> Vec<(String, String)> {
    let mut e: Vec<(String, String)> =
        g.edge_names().into_iter().map(|(a, b)| if a <= b { (a, b) } else { (b, a) }).collect();
    e.sort();
    e
}
