//! Semantic checks of the graphoid axioms, weak transitivity and
//! decomposable transitivity against concrete models and graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::ci::{index_of, resolve_names, JointTable};
use crate::error::{Error, Result};
use crate::graph::{separated_mask, UGraph};
use crate::oracle::{ModelRef, Oracle, Regime};
use crate::scalar::Real;
use crate::varset::VarSet;

/// Largest model `scan_property` will enumerate.
pub const MAX_SCAN_VARS: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyId {
    Symmetry,
    Decomposition,
    WeakUnion,
    Contraction,
    Intersection,
    WeakTransitivity,
    DecomposableTransitivity,
}

impl PropertyId {
    pub const ALL: [PropertyId; 7] = [
        PropertyId::Symmetry,
        PropertyId::Decomposition,
        PropertyId::WeakUnion,
        PropertyId::Contraction,
        PropertyId::Intersection,
        PropertyId::WeakTransitivity,
        PropertyId::DecomposableTransitivity,
    ];

    /// The four properties every probability distribution satisfies.
    pub const SEMI_GRAPHOID: [PropertyId; 4] =
        [PropertyId::Symmetry, PropertyId::Decomposition, PropertyId::WeakUnion, PropertyId::Contraction];

    pub fn name(self) -> &'static str {
        match self {
            PropertyId::Symmetry => "symmetry",
            PropertyId::Decomposition => "decomposition",
            PropertyId::WeakUnion => "weak_union",
            PropertyId::Contraction => "contraction",
            PropertyId::Intersection => "intersection",
            PropertyId::WeakTransitivity => "weak_transitivity",
            PropertyId::DecomposableTransitivity => "decomposable_transitivity",
        }
    }

    /// Schema slots, in binding order.
    pub fn roles(self) -> &'static [(Role, Card)] {
        use Card::*;
        use Role::*;
        match self {
            PropertyId::Symmetry => &[(X, NonEmpty), (Y, NonEmpty), (Z, Any)],
            PropertyId::Decomposition | PropertyId::WeakUnion | PropertyId::Contraction | PropertyId::Intersection => {
                &[(X, NonEmpty), (Y, NonEmpty), (W, NonEmpty), (Z, Any)]
            }
            PropertyId::WeakTransitivity => &[(X, NonEmpty), (Y, NonEmpty), (Z, Any), (C, Single)],
            PropertyId::DecomposableTransitivity => &[(A, Single), (C, Single), (E, Single), (B, Any), (D, Any)],
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropertyId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PropertyId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Query(format!("unknown property `{s}`")))
    }
}

/// Schema slot of a property.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    X,
    Y,
    Z,
    W,
    A,
    C,
    E,
    B,
    D,
}

impl Role {
    pub fn label(self) -> &'static str {
        match self {
            Role::X => "X",
            Role::Y => "Y",
            Role::Z => "Z",
            Role::W => "W",
            Role::A => "a",
            Role::C => "c",
            Role::E => "e",
            Role::B => "B",
            Role::D => "D",
        }
    }
}

/// Cardinality constraint on a slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Card {
    Single,
    NonEmpty,
    Any,
}

impl Card {
    fn admits(self, s: VarSet) -> bool {
        match self {
            Card::Single => s.len() == 1,
            Card::NonEmpty => !s.is_empty(),
            Card::Any => true,
        }
    }
}

/// Concrete sets bound to a property's schema slots.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binding {
    pub property: PropertyId,
    pub sets: Vec<VarSet>,
}

type Statement = (VarSet, VarSet, VarSet);

impl Binding {
    /// Binds slots by role label (`"X"`, `"c"`, ...) to variable names.
    pub fn from_names(property: PropertyId, variables: &[String], slots: &[(&str, &[&str])]) -> Result<Self> {
        let mut sets = Vec::new();
        for (role, _) in property.roles() {
            let (_, names) = slots
                .iter()
                .find(|(label, _)| *label == role.label())
                .ok_or_else(|| Error::Query(format!("{property}: missing slot {}", role.label())))?;
            let owned: Vec<String> = names.iter().map(|s| s.to_string()).collect();
            sets.push(resolve_names(variables, &owned)?);
        }
        if slots.len() != property.roles().len() {
            return Err(Error::Query(format!("{property}: unexpected slots")));
        }
        let b = Binding { property, sets };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let roles = self.property.roles();
        if roles.len() != self.sets.len() {
            return Err(Error::Query(format!("{}: expected {} slots", self.property, roles.len())));
        }
        let mut seen = VarSet::EMPTY;
        for ((role, card), &s) in roles.iter().zip(&self.sets) {
            if !card.admits(s) {
                return Err(Error::Query(format!("{}: slot {} violates its cardinality", self.property, role.label())));
            }
            if !seen.is_disjoint(s) {
                return Err(Error::Query(format!("{}: slots must be disjoint", self.property)));
            }
            seen = seen.union(s);
        }
        Ok(())
    }

    fn slot(&self, role: Role) -> VarSet {
        self.property.roles().iter().position(|(r, _)| *r == role).map(|i| self.sets[i]).unwrap_or(VarSet::EMPTY)
    }

    /// Antecedent CI statements (all must hold).
    pub fn antecedents(&self) -> Vec<Statement> {
        use Role::*;
        let s = |r| self.slot(r);
        match self.property {
            PropertyId::Symmetry => vec![(s(X), s(Y), s(Z))],
            PropertyId::Decomposition | PropertyId::WeakUnion => vec![(s(X), s(Y).union(s(W)), s(Z))],
            PropertyId::Contraction => vec![(s(X), s(Y), s(Z)), (s(X), s(W), s(Z).union(s(Y)))],
            PropertyId::Intersection => vec![(s(X), s(Y), s(Z).union(s(W))), (s(X), s(W), s(Z).union(s(Y)))],
            PropertyId::WeakTransitivity => vec![(s(X), s(Y), s(Z)), (s(X), s(Y), s(Z).union(s(C)))],
            PropertyId::DecomposableTransitivity => {
                vec![(s(A).union(s(B)), s(D).union(s(E)), s(C)), (s(A), s(E), s(B).union(s(D)))]
            }
        }
    }

    /// Conclusion disjuncts (at least one must hold).
    pub fn conclusions(&self) -> Vec<Statement> {
        use Role::*;
        let s = |r| self.slot(r);
        match self.property {
            PropertyId::Symmetry => vec![(s(Y), s(X), s(Z))],
            PropertyId::Decomposition => vec![(s(X), s(Y), s(Z))],
            PropertyId::WeakUnion => vec![(s(X), s(Y), s(Z).union(s(W)))],
            PropertyId::Contraction | PropertyId::Intersection => vec![(s(X), s(Y).union(s(W)), s(Z))],
            PropertyId::WeakTransitivity => vec![(s(X), s(C), s(Z)), (s(C), s(Y), s(Z))],
            PropertyId::DecomposableTransitivity => vec![(s(A), s(C), s(B)), (s(C), s(E), s(D))],
        }
    }

    /// Slot label to member names.
    pub fn named(&self, variables: &[String]) -> BTreeMap<&'static str, Vec<String>> {
        self.property.roles().iter().zip(&self.sets).map(|((r, _), s)| (r.label(), s.names(variables))).collect()
    }

    fn check_regime(&self, regime: Regime) -> Result<()> {
        if regime == Regime::Discrete && self.property == PropertyId::WeakTransitivity && !self.slot(Role::Z).is_empty()
        {
            return Err(Error::UnsupportedRegime(
                "weak transitivity on binary tables is only established for an empty conditioning set".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one property instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceResult<T> {
    pub vacuous: bool,
    pub holds: bool,
    pub antecedent_devs: Vec<T>,
    pub conclusion_devs: Vec<T>,
}

/// A non-vacuous instance whose conclusion failed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation<T: Real> {
    pub property: PropertyId,
    pub binding: BTreeMap<&'static str, Vec<String>>,
    #[serde(serialize_with = "decimal_string")]
    pub antecedent_dev: T,
    #[serde(serialize_with = "decimal_string")]
    pub conclusion_dev: T,
    #[serde(skip)]
    pub sets: Vec<VarSet>,
}

fn decimal_string<T: Real, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{:e}", v.as_f64()))
}

/// Result of an exhaustive scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport<T: Real> {
    pub property: PropertyId,
    pub instances: usize,
    pub non_vacuous: usize,
    pub violations: Vec<Violation<T>>,
}

impl<T: Real> ScanReport<T> {
    /// One JSON object per violation, newline separated.
    pub fn to_json_lines(&self) -> String {
        self.violations.iter().map(|v| serde_json::to_string(v).expect("violation serializes") + "\n").collect()
    }
}

fn evaluate<T: Real>(oracle: &Oracle<'_, T>, b: &Binding, tol_ante: T, tol_conc: T) -> Result<InstanceResult<T>> {
    let mut antecedent_devs = Vec::new();
    for (x, y, z) in b.antecedents() {
        let d = oracle.deviation(x, y, z)?;
        antecedent_devs.push(d);
        if d > tol_ante {
            return Ok(InstanceResult { vacuous: true, holds: true, antecedent_devs, conclusion_devs: vec![] });
        }
    }
    let conclusion_devs =
        b.conclusions().into_iter().map(|(x, y, z)| oracle.deviation(x, y, z)).collect::<Result<Vec<T>>>()?;
    let holds = conclusion_devs.iter().any(|&d| d <= tol_conc);
    Ok(InstanceResult { vacuous: false, holds, antecedent_devs, conclusion_devs })
}

fn check_tolerances<T: Real>(tol_ante: T, tol_conc: T) -> Result<()> {
    if !(tol_ante >= T::zero() && tol_conc >= T::zero()) {
        return Err(Error::Query("tolerances must be nonnegative".into()));
    }
    Ok(())
}

/// Evaluates one instance: vacuous when an antecedent fails at `tol_ante`,
/// otherwise holds when some conclusion disjunct holds at `tol_conc`.
pub fn check_property_instance<T: Real>(
    model: ModelRef<'_, T>,
    binding: &Binding,
    tol_ante: T,
    tol_conc: T,
) -> Result<InstanceResult<T>> {
    check_tolerances(tol_ante, tol_conc)?;
    binding.validate()?;
    if binding.sets.iter().any(|s| s.iter().any(|i| i >= model.variables().len())) {
        return Err(Error::Query("binding refers to variables outside the model".into()));
    }
    binding.check_regime(model.regime())?;
    evaluate(&model.direct()?, binding, tol_ante, tol_conc)
}

/// Every binding of `p`'s schema over `n` variables, in a fixed order.
///
/// Each variable is labelled with a slot or left unused. With `dedup`, bindings
/// related by a symmetry of the property are reported once. Discrete weak
/// transitivity only admits an empty `Z`.
pub fn enumerate_bindings(p: PropertyId, n: usize, regime: Regime, dedup: bool) -> Vec<Binding> {
    let roles = p.roles();
    let labels = roles.len() + 1;
    let total = labels.pow(n as u32);
    let mut out = Vec::new();
    let mut sets = vec![VarSet::EMPTY; roles.len()];
    'labelling: for code in 0..total {
        sets.iter_mut().for_each(|s| *s = VarSet::EMPTY);
        let mut c = code;
        for v in 0..n {
            let l = c % labels;
            c /= labels;
            if l < roles.len() {
                sets[l] = sets[l].with(v);
            }
        }
        for ((_, card), &s) in roles.iter().zip(&sets) {
            if !card.admits(s) {
                continue 'labelling;
            }
        }
        let b = Binding { property: p, sets: sets.clone() };
        if b.check_regime(regime).is_err() {
            continue;
        }
        if dedup && !is_canonical(&b) {
            continue;
        }
        out.push(b);
    }
    out.sort();
    out
}

fn is_canonical(b: &Binding) -> bool {
    use Role::*;
    let first = |r| b.slot(r).first().unwrap_or(usize::MAX);
    match b.property {
        PropertyId::Intersection => first(Y) < first(W),
        PropertyId::WeakTransitivity => first(X) < first(Y),
        PropertyId::DecomposableTransitivity => first(A) < first(E),
        _ => true,
    }
}

/// Exhaustive falsification sweep of `p` over every binding of the model's variables.
pub fn scan_property<T: Real>(
    model: ModelRef<'_, T>,
    p: PropertyId,
    tol_ante: T,
    tol_conc: T,
) -> Result<ScanReport<T>> {
    check_tolerances(tol_ante, tol_conc)?;
    let n = model.variables().len();
    if n > MAX_SCAN_VARS {
        return Err(Error::Resource(format!("scans are limited to {MAX_SCAN_VARS} variables, model has {n}")));
    }
    let oracle = model.cached()?;
    let bindings = enumerate_bindings(p, n, model.regime(), true);
    let results = bindings.par_iter().map(|b| evaluate(&oracle, b, tol_ante, tol_conc)).collect::<Result<Vec<_>>>()?;
    let variables = model.variables();
    let mut violations = Vec::new();
    let mut non_vacuous = 0;
    for (b, r) in bindings.iter().zip(results) {
        if r.vacuous {
            continue;
        }
        non_vacuous += 1;
        if !r.holds {
            violations.push(Violation {
                property: p,
                binding: b.named(variables),
                antecedent_dev: r.antecedent_devs.iter().copied().fold(T::zero(), T::max),
                conclusion_dev: r.conclusion_devs.iter().copied().fold(T::infinity(), T::min),
                sets: b.sets.clone(),
            });
        }
    }
    violations.sort_by(|a, b| a.sets.cmp(&b.sets));
    Ok(ScanReport { property: p, instances: bindings.len(), non_vacuous, violations })
}

/// Name-level instance of decomposable transitivity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DTInstance {
    pub a: String,
    pub c: String,
    pub e: String,
    pub b: BTreeSet<String>,
    pub d: BTreeSet<String>,
}

impl DTInstance {
    pub fn new<S: Into<String>>(
        a: S,
        c: S,
        e: S,
        b: impl IntoIterator<Item = S>,
        d: impl IntoIterator<Item = S>,
    ) -> Self {
        DTInstance {
            a: a.into(),
            c: c.into(),
            e: e.into(),
            b: b.into_iter().map(Into::into).collect(),
            d: d.into_iter().map(Into::into).collect(),
        }
    }

    pub fn to_binding(&self, variables: &[String]) -> Result<Binding> {
        let one = |n: &String| index_of(variables, n).map(VarSet::singleton);
        let b = Binding {
            property: PropertyId::DecomposableTransitivity,
            sets: vec![
                one(&self.a)?,
                one(&self.c)?,
                one(&self.e)?,
                resolve_names(variables, &self.b)?,
                resolve_names(variables, &self.d)?,
            ],
        };
        b.validate()?;
        Ok(b)
    }
}

/// The two cross-ratios whose product identity forces `α = 1` or `β = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaBeta<T> {
    pub alpha: T,
    pub beta: T,
}

fn cross_ratio<T: Real>(marginal: &[T], first: usize, second: usize, base: usize) -> Result<T> {
    // odds ratio P(f1,s0)P(f0,s1) / (P(f0,s0)P(f1,s1))
    let p = |f: bool, s: bool| marginal[base | if f { first } else { 0 } | if s { second } else { 0 }];
    let (p00, p01, p10, p11) = (p(false, false), p(false, true), p(true, false), p(true, true));
    if !(p00 > T::zero() && p01 > T::zero() && p10 > T::zero() && p11 > T::zero()) {
        return Err(Error::Positivity("cross-ratio needs strictly positive marginal cells".into()));
    }
    Ok(p10 * p01 / (p00 * p11))
}

fn assignment_bits<T: Real>(
    t: &JointTable<T>,
    set: &BTreeSet<String>,
    values: &BTreeMap<String, bool>,
) -> Result<usize> {
    if values.len() != set.len() || !set.iter().all(|n| values.contains_key(n)) {
        return Err(Error::Query("assignment must cover exactly its set".into()));
    }
    let mut bits = 0;
    for (name, &v) in values {
        if v {
            bits |= 1 << t.cell_bit(t.index_of(name)?);
        }
    }
    Ok(bits)
}

/// `α(𝐁)` over `{a, c} ∪ B` and `β(𝐃)` over `{c, e} ∪ D` at the given assignments.
pub fn alpha_beta<T: Real>(
    t: &JointTable<T>,
    inst: &DTInstance,
    b_values: &BTreeMap<String, bool>,
    d_values: &BTreeMap<String, bool>,
) -> Result<AlphaBeta<T>> {
    let binding = inst.to_binding(t.variables())?;
    let (a, c, e, b, d) = (binding.sets[0], binding.sets[1], binding.sets[2], binding.sets[3], binding.sets[4]);
    let left = t.marginal_dense(t.cell_mask(a.union(c).union(b)));
    let right = t.marginal_dense(t.cell_mask(c.union(e).union(d)));
    let (am, cm, em) = (t.cell_mask(a), t.cell_mask(c), t.cell_mask(e));
    Ok(AlphaBeta {
        alpha: cross_ratio(&left, am, cm, assignment_bits(t, &inst.b, b_values)?)?,
        beta: cross_ratio(&right, cm, em, assignment_bits(t, &inst.d, d_values)?)?,
    })
}

/// `α` over every assignment of `B` and `β` over every assignment of `D`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaBetaFamily<T> {
    pub alphas: Vec<T>,
    pub betas: Vec<T>,
}

impl<T: Real> AlphaBetaFamily<T> {
    /// `min(max_𝐁 |α - 1|, max_𝐃 |β - 1|)`; zero when one family is all ones.
    pub fn dichotomy_gap(&self) -> T {
        let worst = |v: &[T]| v.iter().map(|&x| (x - T::one()).abs()).fold(T::zero(), T::max);
        worst(&self.alphas).min(worst(&self.betas))
    }
}

pub fn alpha_beta_family<T: Real>(t: &JointTable<T>, inst: &DTInstance) -> Result<AlphaBetaFamily<T>> {
    let binding = inst.to_binding(t.variables())?;
    alpha_beta_family_sets(t, &binding)
}

pub(crate) fn alpha_beta_family_sets<T: Real>(t: &JointTable<T>, binding: &Binding) -> Result<AlphaBetaFamily<T>> {
    let (a, c, e, b, d) = (binding.sets[0], binding.sets[1], binding.sets[2], binding.sets[3], binding.sets[4]);
    let (am, cm, em, bm, dm) = (t.cell_mask(a), t.cell_mask(c), t.cell_mask(e), t.cell_mask(b), t.cell_mask(d));
    let left = t.marginal_dense(am | cm | bm);
    let right = t.marginal_dense(cm | em | dm);
    let family = |marg: &[T], first: usize, second: usize, set: usize| -> Result<Vec<T>> {
        let mut out = Vec::new();
        let mut s = set;
        loop {
            out.push(cross_ratio(marg, first, second, s)?);
            if s == 0 {
                break;
            }
            s = (s - 1) & set;
        }
        out.reverse();
        Ok(out)
    };
    Ok(AlphaBetaFamily { alphas: family(&left, am, cm, bm)?, betas: family(&right, cm, em, dm)? })
}

/// Dichotomy gap for a binding produced by `enumerate_bindings`.
pub fn alpha_beta_gap<T: Real>(t: &JointTable<T>, binding: &Binding) -> Result<T> {
    if binding.property != PropertyId::DecomposableTransitivity {
        return Err(Error::Query("alpha/beta needs a decomposable transitivity binding".into()));
    }
    binding.validate()?;
    Ok(alpha_beta_family_sets(t, binding)?.dichotomy_gap())
}

/// Decomposable transitivity for vertex separation:
/// `aB ⊥ De | c ∧ a ⊥ e | BD ⇒ a ⊥ c | B ∨ c ⊥ e | D`.
pub fn check_graph_dt(g: &UGraph, inst: &DTInstance) -> Result<bool> {
    let binding = inst.to_binding(g.vertices())?;
    let adj = g.adjacency_masks()?;
    Ok(graph_implication(&adj, &binding))
}

fn graph_implication(adj: &[u64], b: &Binding) -> bool {
    let sep = |(x, y, z): Statement| separated_mask(adj, x, y, z);
    !b.antecedents().into_iter().all(sep) || b.conclusions().into_iter().any(sep)
}

/// Outcome of the exhaustive graph sweep.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GraphSweep {
    pub graphs: usize,
    pub instances: usize,
    pub non_vacuous: usize,
    pub violations: Vec<(UGraph, BTreeMap<&'static str, Vec<String>>)>,
}

/// Every labelled graph on 1..=`max_vertices` vertices against every binding of `p`.
pub fn exhaustive_graph_sweep(p: PropertyId, max_vertices: usize) -> Result<GraphSweep> {
    if max_vertices > MAX_SCAN_VARS {
        return Err(Error::Resource(format!("graph sweeps are limited to {MAX_SCAN_VARS} vertices")));
    }
    let mut sweep = GraphSweep::default();
    for n in 1..=max_vertices {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let bindings = enumerate_bindings(p, n, Regime::Separation, false);
        // per graph: instances, non-vacuous instances, violations
        type Tally = (usize, usize, Vec<(UGraph, Binding)>);
        let results: Vec<Tally> = (0u64..1 << pairs.len())
            .into_par_iter()
            .map(|code| {
                let edges = pairs.iter().enumerate().filter(|(k, _)| code >> k & 1 == 1).map(|(_, &e)| e);
                let g = UGraph::from_indices(names.clone(), edges);
                let adj = g.adjacency_masks().expect("small graph");
                let mut non_vacuous = 0;
                let mut bad = Vec::new();
                for b in &bindings {
                    let ante = b.antecedents().into_iter().all(|(x, y, z)| separated_mask(&adj, x, y, z));
                    if ante {
                        non_vacuous += 1;
                        if !graph_implication(&adj, b) {
                            bad.push((g.clone(), b.clone()));
                        }
                    }
                }
                (bindings.len(), non_vacuous, bad)
            })
            .collect();
        for (instances, non_vacuous, bad) in results {
            sweep.graphs += 1;
            sweep.instances += instances;
            sweep.non_vacuous += non_vacuous;
            sweep.violations.extend(bad.into_iter().map(|(g, b)| {
                let named = b.named(g.vertices());
                (g, named)
            }));
        }
    }
    Ok(sweep)
}
