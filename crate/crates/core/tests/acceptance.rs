//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use mtlab::axioms::{
    alpha_beta_gap, check_property_instance, enumerate_bindings, exhaustive_graph_sweep, scan_property,
};
use mtlab::deduction::{
    apply_rule, bundled_script, check_derivation, load_script, Atom, Clause, Literal, Rule, Script, Step,
    BUNDLED_SCRIPTS,
};
use mtlab::learn::{chow_liu, ingest_samples, min_mi_gap};
use mtlab::model_gen::{chain_preset, deterministic_copy_dist, sample_rows};
use mtlab::perfectness::{defining_edge_check, edge_marginal_check, equivalence_scan};
use mtlab::{CIQuery, ModelRef, PropertyId, Regime, Seed, Table};

use common::*;

const TOL: f64 = 1e-9;
const TOL_ANTE: f64 = 1e-10;
const TOL_CONC: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
    /// Serialized reports, compared across reruns for determinism.
    json: String,
}

fn json<S: serde::Serialize>(v: &S) -> String {
    serde_json::to_string(v).expect("report serializes")
}

fn c1_binary_perfectness() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut out = String::new();
    for i in 0..100 {
        let m = binary_tree_model(i);
        let r = equivalence_scan(&m.table, &m.tree, TOL).unwrap();
        mismatches += r.mismatches.len();
        out += &json(&r);
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: mismatches == 0 && elapsed < Duration::from_secs(300),
        detail: format!("100 models, {mismatches} mismatches, {:.1}s", elapsed.as_secs_f64()),
        json: out,
    }
}

fn c2_gaussian_perfectness() -> Outcome {
    let mut mismatches = 0;
    let mut triples = 0;
    let mut out = String::new();
    for i in 0..100 {
        let (tree, g) = gaussian_tree_model(i, 3, 6);
        let r = equivalence_scan(&g, &tree, TOL).unwrap();
        mismatches += r.mismatches.len();
        triples += r.triples_checked;
        out += &json(&r);
    }
    Outcome {
        pass: mismatches == 0,
        detail: format!("100 models, {triples} triples, {mismatches} mismatches"),
        json: out,
    }
}

fn c3_decomposable_transitivity() -> Outcome {
    let mut tables: Vec<Table> = (0..50).map(|i| positive_table(i, 5)).collect();
    tables.extend((0..50).map(|i| binary_tree_model_n(i, 5).table));
    let (mut violations, mut non_vacuous, mut worst_gap, mut gap_instances) = (0, 0, 0.0f64, 0);
    let mut out = String::new();
    for t in &tables {
        let r = scan_property(ModelRef::Discrete(t), PropertyId::DecomposableTransitivity, TOL_ANTE, TOL_CONC).unwrap();
        violations += r.violations.len();
        non_vacuous += r.non_vacuous;
        out += &json(&r);
        for b in enumerate_bindings(PropertyId::DecomposableTransitivity, t.n(), Regime::Discrete, true) {
            let r = check_property_instance(ModelRef::Discrete(t), &b, TOL_ANTE, TOL_CONC).unwrap();
            if !r.vacuous {
                gap_instances += 1;
                worst_gap = worst_gap.max(alpha_beta_gap(t, &b).unwrap());
            }
        }
    }
    Outcome {
        pass: violations == 0 && non_vacuous >= 100 && worst_gap <= TOL_CONC,
        detail: format!(
            "100 tables, {non_vacuous} non-vacuous, {violations} violations, worst alpha/beta gap {worst_gap:.2e} over {gap_instances} instances"
        ),
        json: out,
    }
}

fn c4_graph_dt() -> Outcome {
    let start = Instant::now();
    let sweep = exhaustive_graph_sweep(PropertyId::DecomposableTransitivity, 5).unwrap();
    let elapsed = start.elapsed();
    Outcome {
        pass: sweep.violations.is_empty() && sweep.non_vacuous > 0 && elapsed < Duration::from_secs(120),
        detail: format!(
            "{} graphs, {} instances, {} non-vacuous, {} violations, {:.1}s",
            sweep.graphs,
            sweep.instances,
            sweep.non_vacuous,
            sweep.violations.len(),
            elapsed.as_secs_f64()
        ),
        json: json(&sweep),
    }
}

fn c5_semi_graphoid() -> Outcome {
    let mut violations = 0;
    let mut out = String::new();
    for i in 0..50 {
        let t = positive_table(100 + i, 3 + (i % 3) as usize);
        for p in PropertyId::SEMI_GRAPHOID {
            let r = scan_property(ModelRef::Discrete(&t), p, TOL_ANTE, TOL_CONC).unwrap();
            violations += r.violations.len();
            out += &json(&r);
        }
    }
    let copy = deterministic_copy_dist(3).unwrap();
    let r = scan_property(ModelRef::Discrete(&copy), PropertyId::Intersection, TOL_ANTE, TOL_CONC).unwrap();
    out += &json(&r);
    Outcome {
        pass: violations == 0 && !r.violations.is_empty(),
        detail: format!(
            "semi-graphoid violations {violations} on 50 tables; intersection violations on copy distribution: {}",
            r.violations.len()
        ),
        json: out,
    }
}

fn c6_weak_transitivity() -> Outcome {
    let (mut gauss_viol, mut gauss_nv, mut disc_viol, mut disc_nv) = (0, 0, 0, 0);
    let mut out = String::new();
    for i in 0..50 {
        let (_, g) = gaussian_tree_model(200 + i, 3, 5);
        let r = scan_property(ModelRef::Gaussian(&g), PropertyId::WeakTransitivity, TOL_ANTE, TOL_CONC).unwrap();
        gauss_viol += r.violations.len();
        gauss_nv += r.non_vacuous;
        out += &json(&r);
    }
    for i in 0..50 {
        let t = positive_table(300 + i, 3 + (i % 3) as usize);
        let r = scan_property(ModelRef::Discrete(&t), PropertyId::WeakTransitivity, TOL_ANTE, TOL_CONC).unwrap();
        disc_viol += r.violations.len();
        disc_nv += r.non_vacuous;
        out += &json(&r);
    }
    Outcome {
        pass: gauss_viol == 0 && disc_viol == 0,
        detail: format!(
            "gaussian: {gauss_viol} violations ({gauss_nv} non-vacuous); discrete Z=empty: {disc_viol} violations ({disc_nv} non-vacuous)"
        ),
        json: out,
    }
}

fn c7_edge_tests() -> Outcome {
    let mut agree = 0;
    let mut both_pass = 0;
    let mut out = String::new();
    for i in 0..100 {
        let m = binary_tree_model(i);
        let scan = equivalence_scan(&m.table, &m.tree, TOL).unwrap();
        let marginal = edge_marginal_check(&m.table, &m.tree, TOL).unwrap();
        let defining = defining_edge_check(&m.table, &m.tree, TOL).unwrap();
        if marginal.passed && defining.passed {
            both_pass += 1;
        }
        if marginal.passed == scan.is_perfect() && defining.passed == scan.is_perfect() {
            agree += 1;
        }
        out += &json(&(&marginal, &defining));
    }
    let mut product_fail = 0;
    for n in 3..=7 {
        let t = product_table(n);
        let tree = binary_tree_model(n as u64 - 3).tree;
        let marginal = edge_marginal_check(&t, &tree, TOL).unwrap();
        let defining = defining_edge_check(&t, &tree, TOL).unwrap();
        if !marginal.passed && !defining.passed {
            product_fail += 1;
        }
        out += &json(&(&marginal, &defining));
    }
    Outcome {
        pass: both_pass == 100 && agree == 100 && product_fail == 5,
        detail: format!(
            "both checks pass {both_pass}/100, agree with scan {agree}/100, product tables failing {product_fail}/5"
        ),
        json: out,
    }
}

fn c8_chow_liu() -> Outcome {
    let (mut eligible, mut recovered) = (0, 0);
    let mut out = String::new();
    for i in 0..100 {
        let m = binary_tree_model(i);
        if min_mi_gap(&m.table) < 1e-6 {
            continue;
        }
        eligible += 1;
        let learned = chow_liu(&m.table).unwrap();
        if edge_set(&learned) == edge_set(&m.tree) {
            recovered += 1;
        }
        out += &json(&learned);
    }
    let chain = chain_preset();
    let samples = sample_rows(&chain.table, 10_000, Seed(42)).unwrap();
    let learned = chow_liu(&ingest_samples(&samples, 1.0).unwrap()).unwrap();
    let path_ok = edge_set(&learned) == edge_set(&chain.tree);
    out += &json(&learned);
    Outcome {
        pass: eligible > 0 && recovered == eligible && path_ok,
        detail: format!(
            "recovered {recovered}/{eligible} eligible trees; chain from 10000 samples recovered: {path_ok}"
        ),
        json: out,
    }
}

fn mutations(script: &Script) -> Vec<(usize, Script)> {
    let steps = script.steps();
    let mut out = Vec::new();
    for (k, step) in steps.iter().enumerate() {
        let mut push = |s: Step| {
            let mut v = steps.to_vec();
            v[k] = s;
            out.push((k, Script::new(v).unwrap()));
        };
        for r in Rule::ALL {
            if r != step.rule {
                push(Step { rule: r, ..step.clone() });
            }
        }
        for slot in 0..step.premises.len() {
            for earlier in &steps[..k] {
                if earlier.index != step.premises[slot] {
                    let mut premises = step.premises.clone();
                    premises[slot] = earlier.index;
                    push(Step { premises, ..step.clone() });
                }
            }
        }
    }
    out
}

/// True when the mutation cites the same rule and the same premise clauses.
fn same_derivation(orig: &Script, mutated: &Script, k: usize) -> bool {
    let (a, b) = (&orig.steps()[k], &mutated.steps()[k]);
    let clauses = |s: &Script, step: &Step| -> BTreeSet<Clause> {
        step.premises.iter().map(|p| s.step(*p).unwrap().clause.clone()).collect()
    };
    a.rule == b.rule && clauses(orig, a) == clauses(mutated, b)
}

/// Whether `to` is an image of `from` under a unary rule, by direct set checks.
fn unary_image(rule: Rule, from: &Atom, to: &Atom) -> bool {
    let strict_part = to.y.is_subset(&from.y) && to.y.len() < from.y.len();
    match rule {
        Rule::Symmetry => from.relation == to.relation && to.x == from.y && to.y == from.x && to.z == from.z,
        Rule::Decomposition => from.relation == to.relation && to.x == from.x && to.z == from.z && strict_part,
        Rule::WeakUnion => {
            let moved: BTreeSet<String> = from.y.difference(&to.y).cloned().collect();
            let z: BTreeSet<String> = from.z.union(&moved).cloned().collect();
            from.relation == to.relation && to.x == from.x && strict_part && to.z == z
        }
        _ => false,
    }
}

fn plain(term: &BTreeSet<Literal>) -> Option<&Atom> {
    let l = term.iter().next()?;
    (term.len() == 1 && !l.negated).then_some(&l.atom)
}

/// Reference decision for a one-premise step: every premise disjunct is kept
/// or rewritten, every conclusion disjunct is accounted for, and at least one
/// disjunct is rewritten. `None` when the step is outside its coverage.
fn reference_unary(rule: Rule, premise: &Clause, clause: &Clause) -> Option<bool> {
    if !matches!(rule, Rule::Symmetry | Rule::Decomposition | Rule::WeakUnion) {
        return None;
    }
    let from: Vec<_> = premise.terms().iter().collect();
    let to: Vec<_> = clause.terms().iter().collect();
    let choices = to.len().pow(from.len() as u32);
    Some((0..choices).any(|code| {
        let mut c = code;
        let mut hit = vec![false; to.len()];
        let mut rewrote = false;
        for f in &from {
            let j = c % to.len();
            c /= to.len();
            hit[j] = true;
            if *f == to[j] {
                continue;
            }
            match (plain(f), plain(to[j])) {
                (Some(a), Some(b)) if unary_image(rule, a, b) => rewrote = true,
                _ => return false,
            }
        }
        rewrote && hit.iter().all(|&h| h)
    }))
}

/// A mutation leaves the derivation intact when it cites the same rule and
/// premise clauses, or when the reference decision still accepts the step.
fn mutation_is_sound(orig: &Script, mutated: &Script, k: usize) -> bool {
    if same_derivation(orig, mutated, k) {
        return true;
    }
    let step = &mutated.steps()[k];
    match step.premises.as_slice() {
        [p] => reference_unary(step.rule, &mutated.step(*p).unwrap().clause, &step.clause).unwrap_or(false),
        _ => false,
    }
}

fn true_atoms(t: &Table) -> Vec<Atom> {
    let n = t.n();
    let names = t.variables();
    let mut out = Vec::new();
    for code in 0..4usize.pow(n as u32) {
        let mut sets = [Vec::new(), Vec::new(), Vec::new()];
        let mut c = code;
        for name in names {
            if c % 4 < 3 {
                sets[c % 4].push(name.as_str());
            }
            c /= 4;
        }
        if sets[0].is_empty() || sets[1].is_empty() {
            continue;
        }
        let q = CIQuery::new(sets[0].iter().copied(), sets[1].iter().copied(), sets[2].iter().copied());
        if t.is_ci(&q, TOL_ANTE).unwrap().holds {
            out.push(Atom::ci(&sets[0], &sets[1], &sets[2]).unwrap());
        }
    }
    out
}

fn clause_holds(t: &Table, c: &Clause) -> bool {
    c.terms().iter().any(|term| {
        term.iter().all(|l: &Literal| {
            let a = &l.atom;
            let q = CIQuery::new(
                a.x.iter().map(String::as_str),
                a.y.iter().map(String::as_str),
                a.z.iter().map(String::as_str),
            );
            t.is_ci(&q, TOL_CONC).unwrap().holds != l.negated
        })
    })
}

/// Applies the unconditional rules to true facts of `t`; returns (applications, failures).
fn soundness_on(t: &Table) -> (usize, usize) {
    let atoms = true_atoms(t);
    let (mut applied, mut failed) = (0, 0);
    for a in &atoms {
        for rule in [Rule::Symmetry, Rule::Decomposition, Rule::WeakUnion] {
            if let Ok(outs) = apply_rule(rule, &[Clause::atom(a.clone())]) {
                for c in outs {
                    applied += 1;
                    failed += usize::from(!clause_holds(t, &c));
                }
            }
        }
        for b in &atoms {
            if let Ok(outs) = apply_rule(Rule::Contraction, &[Clause::atom(a.clone()), Clause::atom(b.clone())]) {
                for c in outs {
                    applied += 1;
                    failed += usize::from(!clause_holds(t, &c));
                }
            }
        }
    }
    (applied, failed)
}

fn c9_proof_checker() -> Outcome {
    let mut out = String::new();
    let mut valid = 0;
    let (mut semantic_mutations, mut rejected, mut neutral, mut neutral_accepted) = (0, 0, 0, 0);
    for (name, _) in BUNDLED_SCRIPTS {
        let script = load_script(bundled_script(name).unwrap()).unwrap();
        let verdict = check_derivation(&script).unwrap();
        valid += usize::from(verdict.valid);
        out += &json(&verdict);
        for (k, m) in mutations(&script) {
            let v = check_derivation(&m).unwrap();
            if mutation_is_sound(&script, &m, k) {
                neutral += 1;
                neutral_accepted += usize::from(v.valid);
                continue;
            }
            semantic_mutations += 1;
            if !v.valid && v.first_bad_step == Some(script.steps()[k].index) {
                rejected += 1;
            }
        }
    }
    let (mut applied, mut failed) = (0, 0);
    for i in 0..10 {
        for t in [positive_table(400 + i, 5), binary_tree_model_n(100 + i, 5).table] {
            let (a, f) = soundness_on(&t);
            applied += a;
            failed += f;
        }
    }
    out += &format!("{applied},{failed}");
    Outcome {
        pass: valid == 3 && rejected == semantic_mutations && neutral_accepted == neutral && semantic_mutations > 0 && failed == 0 && applied >= 100,
        detail: format!(
            "{valid}/3 scripts valid; {rejected}/{semantic_mutations} mutations rejected ({neutral_accepted}/{neutral} mutations that leave the step sound accepted); soundness: {applied} applications on 20 tables, {failed} failures"
        ),
        json: out,
    }
}

type Criterion = (&'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 9] = [
    ("binary tree models are perfect", c1_binary_perfectness),
    ("gaussian tree models are perfect", c2_gaussian_perfectness),
    ("decomposable transitivity on positive tables", c3_decomposable_transitivity),
    ("decomposable transitivity on graphs", c4_graph_dt),
    ("semi-graphoid axioms and intersection failure", c5_semi_graphoid),
    ("weak transitivity", c6_weak_transitivity),
    ("edge certification tests", c7_edge_tests),
    ("chow-liu recovery", c8_chow_liu),
    ("proof checker", c9_proof_checker),
];

fn main() {
    let mut failures = 0;
    let mut first_run = Vec::new();
    for (i, (name, f)) in CRITERIA.iter().enumerate() {
        let o = f();
        println!("criterion {}: {} - {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failures += usize::from(!o.pass);
        first_run.push(o.json);
    }
    let differing: Vec<usize> =
        CRITERIA.iter().enumerate().filter(|(i, (_, f))| f().json != first_run[*i]).map(|(i, _)| i + 1).collect();
    let deterministic = differing.is_empty();
    println!(
        "criterion 10: {} - determinism: {}",
        if deterministic { "PASS" } else { "FAIL" },
        if deterministic {
            format!(
                "reports of criteria 1-9 byte-identical across two runs ({} bytes)",
                first_run.iter().map(String::len).sum::<usize>()
            )
        } else {
            format!("criteria {differing:?} differ between runs")
        }
    );
    failures += usize::from(!deterministic);
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
