use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::atom::{plain_atom, Atom, Clause, Literal, NameSet, Relation, Term};
use crate::error::{Error, Result};

/// Inference rules of the checker.
///
/// The graphoid rules act on independence and separation atoms alike (both
/// premises of a binary rule must share the relation). `conjoin` is the one
/// purely logical rule: it attaches literals of a conjunctive fact to the
/// disjuncts of a clause.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Symmetry,
    Decomposition,
    WeakUnion,
    Contraction,
    Intersection,
    WeakTransitivity,
    DecomposableTransitivity,
    MarkovTransfer,
    Conjoin,
    Assumption,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::Symmetry,
        Rule::Decomposition,
        Rule::WeakUnion,
        Rule::Contraction,
        Rule::Intersection,
        Rule::WeakTransitivity,
        Rule::DecomposableTransitivity,
        Rule::MarkovTransfer,
        Rule::Conjoin,
        Rule::Assumption,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Symmetry => "symmetry",
            Rule::Decomposition => "decomposition",
            Rule::WeakUnion => "weak_union",
            Rule::Contraction => "contraction",
            Rule::Intersection => "intersection",
            Rule::WeakTransitivity => "weak_transitivity",
            Rule::DecomposableTransitivity => "decomposable_transitivity",
            Rule::MarkovTransfer => "markov_transfer",
            Rule::Conjoin => "conjoin",
            Rule::Assumption => "assumption",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Rule::Assumption => 0,
            Rule::Symmetry | Rule::Decomposition | Rule::WeakUnion | Rule::MarkovTransfer => 1,
            _ => 2,
        }
    }

    /// Side condition under which the rule is sound; recorded, never discharged.
    pub fn side_condition(self) -> Option<&'static str> {
        match self {
            Rule::Intersection => Some("strictly positive distribution"),
            Rule::WeakTransitivity => Some("normal distribution, or binary pivot with empty conditioning set"),
            Rule::DecomposableTransitivity => {
                Some("strictly positive binary distribution or strictly positive normal distribution")
            }
            Rule::MarkovTransfer => Some("graph is a Markov network of a distribution satisfying intersection"),
            _ => None,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| Error::Query(format!("unknown rule `{s}`")))
    }
}

fn fail(rule: Rule, slot: &str, message: impl Into<String>) -> Error {
    Error::RuleApplication { rule: rule.name().to_string(), slot: slot.to_string(), message: message.into() }
}

/// Nonempty proper subsets of `s`, smallest first.
fn proper_splits(s: &NameSet) -> Vec<(NameSet, NameSet)> {
    let items: Vec<&String> = s.iter().collect();
    let k = items.len();
    if !(2..=16).contains(&k) {
        return Vec::new();
    }
    let mut out: Vec<(NameSet, NameSet)> = (1..(1u32 << k) - 1)
        .map(|mask| {
            let (mut keep, mut rest) = (NameSet::new(), NameSet::new());
            for (i, name) in items.iter().enumerate() {
                if mask >> i & 1 == 1 { &mut keep } else { &mut rest }.insert((*name).clone());
            }
            (keep, rest)
        })
        .collect();
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    out
}

fn union(a: &NameSet, b: &NameSet) -> NameSet {
    a.union(b).cloned().collect()
}

fn minus(a: &NameSet, b: &NameSet) -> NameSet {
    a.difference(b).cloned().collect()
}

/// Images of one atom under a unary rule.
fn unary_images(rule: Rule, a: &Atom) -> Vec<Atom> {
    match rule {
        Rule::Symmetry => vec![Atom::raw(a.relation, a.y.clone(), a.x.clone(), a.z.clone())],
        Rule::Decomposition => {
            proper_splits(&a.y).into_iter().map(|(y, _)| Atom::raw(a.relation, a.x.clone(), y, a.z.clone())).collect()
        }
        Rule::WeakUnion => proper_splits(&a.y)
            .into_iter()
            .map(|(y, w)| Atom::raw(a.relation, a.x.clone(), y, union(&a.z, &w)))
            .collect(),
        Rule::MarkovTransfer if a.relation == Relation::Separation => {
            vec![Atom::raw(Relation::Independence, a.x.clone(), a.y.clone(), a.z.clone())]
        }
        _ => Vec::new(),
    }
}

/// Conclusion disjuncts of a binary graphoid rule on ordered premises `p`, `q`,
/// or the schema slot that failed to unify.
fn binary_image(rule: Rule, p: &Atom, q: &Atom) -> std::result::Result<Vec<Atom>, (&'static str, String)> {
    if p.relation != q.relation {
        return Err(("relation", "premises mix independence and separation".into()));
    }
    let rel = p.relation;
    match rule {
        // X ⊥ Y | Z  ∧  X ⊥ W | ZY  ⇒  X ⊥ YW | Z
        Rule::Contraction => {
            if p.x != q.x {
                return Err(("X", "premises disagree on X".into()));
            }
            if q.z != union(&p.z, &p.y) {
                return Err(("Z", "second conditioning set must be Z ∪ Y".into()));
            }
            Ok(vec![Atom::raw(rel, p.x.clone(), union(&p.y, &q.y), p.z.clone())])
        }
        // X ⊥ Y | ZW  ∧  X ⊥ W | ZY  ⇒  X ⊥ YW | Z
        Rule::Intersection => {
            if p.x != q.x {
                return Err(("X", "premises disagree on X".into()));
            }
            if !q.y.is_subset(&p.z) || !p.y.is_subset(&q.z) {
                return Err(("W", "each second component must sit in the other's conditioning set".into()));
            }
            let z = minus(&p.z, &q.y);
            if z != minus(&q.z, &p.y) {
                return Err(("Z", "remaining conditioning sets differ".into()));
            }
            Ok(vec![Atom::raw(rel, p.x.clone(), union(&p.y, &q.y), z)])
        }
        // X ⊥ Y | Z  ∧  X ⊥ Y | Zc  ⇒  X ⊥ c | Z  ∨  c ⊥ Y | Z
        Rule::WeakTransitivity => {
            if p.x != q.x || p.y != q.y {
                return Err(("X,Y", "premises must share X and Y".into()));
            }
            let extra = minus(&q.z, &p.z);
            if !p.z.is_subset(&q.z) || extra.len() != 1 {
                return Err(("c", "second conditioning set must add exactly one variable".into()));
            }
            Ok(vec![
                Atom::raw(rel, p.x.clone(), extra.clone(), p.z.clone()),
                Atom::raw(rel, extra, p.y.clone(), p.z.clone()),
            ])
        }
        // aB ⊥ De | c  ∧  a ⊥ e | BD  ⇒  a ⊥ c | B  ∨  c ⊥ e | D
        Rule::DecomposableTransitivity => {
            if p.z.len() != 1 {
                return Err(("c", "first premise must condition on a single variable".into()));
            }
            if q.x.len() != 1 || q.y.len() != 1 {
                return Err(("a,e", "second premise must relate two single variables".into()));
            }
            if !q.x.is_subset(&p.x) || !q.y.is_subset(&p.y) {
                return Err(("a,e", "a and e must appear in the first premise's sides".into()));
            }
            let b = minus(&p.x, &q.x);
            let d = minus(&p.y, &q.y);
            if q.z != union(&b, &d) {
                return Err(("B,D", "second premise must condition on B ∪ D".into()));
            }
            Ok(vec![Atom::raw(rel, q.x.clone(), p.z.clone(), b), Atom::raw(rel, p.z.clone(), q.y.clone(), d)])
        }
        _ => Err(("rule", "not a binary graphoid rule".into())),
    }
}

fn plain_term(a: Atom) -> Term {
    Term::from([Literal::pos(a)])
}

fn without(c: &Clause, t: &Term) -> BTreeSet<Term> {
    c.terms().iter().filter(|x| *x != t).cloned().collect()
}

const MAX_CONJOIN_LITERALS: usize = 6;

/// Every clause derivable from `premises` by one application of `rule`, in
/// canonical order. Unary rules rewrite any nonempty selection of a clause's
/// plain disjuncts; binary rules pick one plain disjunct from each premise
/// (in either order) and carry the remaining disjuncts along.
pub fn apply_rule(rule: Rule, premises: &[Clause]) -> Result<Vec<Clause>> {
    if premises.len() != rule.arity() {
        return Err(fail(rule, "arity", format!("expects {} premises, got {}", rule.arity(), premises.len())));
    }
    let out: BTreeSet<Clause> = match rule {
        Rule::Assumption => BTreeSet::new(),
        Rule::Symmetry | Rule::Decomposition | Rule::WeakUnion | Rule::MarkovTransfer => {
            let out = apply_unary(rule, &premises[0]);
            if out.is_empty() {
                return Err(fail(rule, "premise", "no disjunct matches the rule's premise schema"));
            }
            out
        }
        Rule::Conjoin => apply_conjoin(&premises[0], &premises[1])
            .into_iter()
            .chain(apply_conjoin(&premises[1], &premises[0]))
            .collect(),
        _ => {
            let mut out = BTreeSet::new();
            let mut first_err = None;
            for (p, q) in [(&premises[0], &premises[1]), (&premises[1], &premises[0])] {
                for tp in p.terms() {
                    let Some(pa) = plain_atom(tp) else { continue };
                    for tq in q.terms() {
                        let Some(qa) = plain_atom(tq) else { continue };
                        match binary_image(rule, pa, qa) {
                            Ok(atoms) => {
                                let mut terms = without(p, tp);
                                terms.extend(without(q, tq));
                                terms.extend(atoms.into_iter().map(plain_term));
                                out.insert(Clause::from_terms_unchecked(terms));
                            }
                            Err(e) => {
                                first_err.get_or_insert(e);
                            }
                        }
                    }
                }
            }
            if out.is_empty() {
                let (slot, message) = first_err.unwrap_or(("premise", "no plain disjuncts to match".into()));
                return Err(fail(rule, slot, message));
            }
            out
        }
    };
    if rule == Rule::Conjoin && out.is_empty() {
        return Err(fail(rule, "fact", "one premise must be a single conjunction of at most six literals"));
    }
    Ok(out.into_iter().collect())
}

fn apply_unary(rule: Rule, c: &Clause) -> BTreeSet<Clause> {
    // per term: the term itself plus its rewrites
    let options: Vec<(Term, Vec<Term>)> = c
        .terms()
        .iter()
        .map(|t| {
            let images = plain_atom(t).map(|a| unary_images(rule, a)).unwrap_or_default();
            (t.clone(), images.into_iter().map(plain_term).collect())
        })
        .collect();
    let mut out = BTreeSet::new();
    let mut chosen = Vec::with_capacity(options.len());
    expand_unary(&options, 0, false, &mut chosen, &mut out);
    out
}

fn expand_unary(
    options: &[(Term, Vec<Term>)],
    i: usize,
    rewrote: bool,
    chosen: &mut Vec<Term>,
    out: &mut BTreeSet<Clause>,
) {
    if i == options.len() {
        if rewrote {
            out.insert(Clause::from_terms_unchecked(chosen.iter().cloned().collect()));
        }
        return;
    }
    let (keep, images) = &options[i];
    chosen.push(keep.clone());
    expand_unary(options, i + 1, rewrote, chosen, out);
    chosen.pop();
    for img in images {
        chosen.push(img.clone());
        expand_unary(options, i + 1, true, chosen, out);
        chosen.pop();
    }
}

/// `t1 ∨ … ∨ tk` and the fact `l1 ∧ … ∧ lm` give `(t1 ∧ S1) ∨ … ∨ (tk ∧ Sk)`
/// for any subsets `Si` of the fact's literals, not all empty.
fn apply_conjoin(c: &Clause, fact: &Clause) -> BTreeSet<Clause> {
    let mut out = BTreeSet::new();
    if fact.len() != 1 {
        return out;
    }
    let lits: Vec<&Literal> = fact.terms().iter().next().expect("one term").iter().collect();
    if lits.len() > MAX_CONJOIN_LITERALS {
        return out;
    }
    let subsets: Vec<BTreeSet<Literal>> = (0..1u32 << lits.len())
        .map(|m| lits.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, l)| (*l).clone()).collect())
        .collect();
    let terms: Vec<&Term> = c.terms().iter().collect();
    let total = subsets.len().pow(terms.len() as u32);
    for code in 1..total {
        let mut k = code;
        let mut built = BTreeSet::new();
        for t in &terms {
            let s = &subsets[k % subsets.len()];
            k /= subsets.len();
            built.insert(t.union(s).cloned().collect::<Term>());
        }
        out.insert(Clause::from_terms_unchecked(built));
    }
    out
}
