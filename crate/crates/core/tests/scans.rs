mod common;

use std::collections::BTreeMap;

use mtlab::axioms::{exhaustive_graph_sweep, scan_property};
use mtlab::model_gen::random_tree;
use mtlab::{ModelRef, PropertyId, Seed, Table, UGraph};

use common::*;

const TOL_ANTE: f64 = 1e-10;
const TOL_CONC: f64 = 1e-6;

#[test]
fn positive_tables_satisfy_the_graphoid_properties() {
    for n in 2..=4 {
        for i in 0..4 {
            let t = positive_table(100 * n as u64 + i, n);
            for p in PropertyId::SEMI_GRAPHOID.into_iter().chain([PropertyId::Intersection]) {
                let r = scan_property(ModelRef::Discrete(&t), p, TOL_ANTE, TOL_CONC).unwrap();
                assert!(r.violations.is_empty(), "{p} on table {n}/{i}");
            }
        }
    }
}

#[test]
fn tree_tables_satisfy_semi_graphoid_non_vacuously() {
    for i in 0..5 {
        let m = binary_tree_model_n(i, 5);
        let mut informative = 0;
        for p in PropertyId::SEMI_GRAPHOID {
            let r = scan_property(ModelRef::Discrete(&m.table), p, TOL_ANTE, TOL_CONC).unwrap();
            assert!(r.violations.is_empty(), "{p} on tree model {i}");
            informative += r.non_vacuous;
        }
        assert!(informative > 0);
    }
}

#[test]
fn graph_separation_satisfies_every_property() {
    for p in PropertyId::ALL {
        let sweep = exhaustive_graph_sweep(p, 4).unwrap();
        assert_eq!(sweep.graphs, 1 + 2 + 8 + 64);
        assert!(sweep.violations.is_empty(), "{p}");
        if p != PropertyId::Symmetry {
            assert!(sweep.non_vacuous > 0, "{p}");
        }
    }
}

#[test]
fn gaussian_trees_satisfy_both_transitivities() {
    // a star has one internal vertex, so decomposable transitivity is vacuous on it;
    // only the family as a whole must be informative
    let mut informative = [0; 2];
    for i in 0..12 {
        let (_, g) = gaussian_tree_model(i, 4, 6);
        for (k, p) in [PropertyId::WeakTransitivity, PropertyId::DecomposableTransitivity].into_iter().enumerate() {
            let r = scan_property(ModelRef::Gaussian(&g), p, TOL_ANTE, TOL_CONC).unwrap();
            assert!(r.violations.is_empty(), "{p} on gaussian {i}");
            informative[k] += r.non_vacuous;
        }
    }
    assert!(informative.iter().all(|&c| c > 0), "{informative:?}");
}

/// P(x) P(y) P(c | x): x and y independent with and without c.
fn one_sided_table(px: f64, c_given_x: [f64; 2], py: f64) -> Table {
    let mut probs = Vec::new();
    for c in [false, true] {
        for x in [false, true] {
            for y in [false, true] {
                let p_x = if x { px } else { 1.0 - px };
                let p_y = if y { py } else { 1.0 - py };
                let pc1 = c_given_x[x as usize];
                probs.push(p_x * p_y * if c { pc1 } else { 1.0 - pc1 });
            }
        }
    }
    Table::new(vec!["c".into(), "x".into(), "y".into()], probs).unwrap()
}

#[test]
fn discrete_weak_transitivity_with_empty_z_is_exercised() {
    for (k, px) in [0.2, 0.5, 0.65].into_iter().enumerate() {
        let t = one_sided_table(px, [0.1 + 0.2 * k as f64, 0.9], 0.4);
        let r = scan_property(ModelRef::Discrete(&t), PropertyId::WeakTransitivity, TOL_ANTE, TOL_CONC).unwrap();
        assert!(r.non_vacuous > 0);
        assert!(r.violations.is_empty());
    }
}

#[test]
fn symmetric_duplicates_are_dropped_consistently() {
    let m = binary_tree_model_n(3, 4);
    let r = scan_property(ModelRef::Discrete(&m.table), PropertyId::Intersection, TOL_ANTE, TOL_CONC).unwrap();
    let g = scan_property(ModelRef::<f64>::Graph(&m.tree), PropertyId::Intersection, TOL_ANTE, TOL_CONC).unwrap();
    assert_eq!(r.instances, g.instances);
}

#[test]
fn uniform_tree_sampler_hits_every_labelled_tree() {
    // Cayley: 4^2 = 16 labelled trees on four vertices.
    const DRAWS: u64 = 30_000;
    let mut counts: BTreeMap<Vec<(String, String)>, u64> = BTreeMap::new();
    for s in 0..DRAWS {
        let t: UGraph = random_tree(4, Seed(s)).unwrap();
        assert!(t.is_tree());
        *counts.entry(t.edge_names()).or_default() += 1;
    }
    assert_eq!(counts.len(), 16);
    let p = 1.0 / 16.0;
    let mean = DRAWS as f64 * p;
    let sigma = (DRAWS as f64 * p * (1.0 - p)).sqrt();
    for (tree, c) in counts {
        assert!((c as f64 - mean).abs() <= 3.0 * sigma, "{tree:?}: {c}");
    }
}
