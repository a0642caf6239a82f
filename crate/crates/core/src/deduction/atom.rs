use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

pub type NameSet = BTreeSet<String>;

/// Which ternary relation an atom asserts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// Probabilistic independence, written `_|_`.
    Independence,
    /// Vertex separation, written `_|_G`.
    Separation,
}

/// Symbolic `X ⊥ Y | Z` over names that are not bound to any model.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub relation: Relation,
    pub x: NameSet,
    pub y: NameSet,
    pub z: NameSet,
}

impl Atom {
    pub fn new(relation: Relation, x: NameSet, y: NameSet, z: NameSet) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::Query("atom sides must be nonempty".into()));
        }
        if !x.is_disjoint(&y) || !x.is_disjoint(&z) || !y.is_disjoint(&z) {
            return Err(Error::Query("atom sets must be pairwise disjoint".into()));
        }
        Ok(Atom { relation, x, y, z })
    }

    pub fn ci<'a>(x: &[&'a str], y: &[&'a str], z: &[&'a str]) -> Result<Self> {
        Atom::new(Relation::Independence, set(x), set(y), set(z))
    }

    pub fn sep<'a>(x: &[&'a str], y: &[&'a str], z: &[&'a str]) -> Result<Self> {
        Atom::new(Relation::Separation, set(x), set(y), set(z))
    }

    /// Constructs an atom already known to satisfy the invariants.
    pub(crate) fn raw(relation: Relation, x: NameSet, y: NameSet, z: NameSet) -> Self {
        debug_assert!(Atom::new(relation, x.clone(), y.clone(), z.clone()).is_ok());
        Atom { relation, x, y, z }
    }
}

pub(crate) fn set(names: &[&str]) -> NameSet {
    names.iter().map(|s| s.to_string()).collect()
}

/// Possibly negated atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub negated: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { negated: false, atom }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { negated: true, atom }
    }
}

/// Conjunction of literals; a plain disjunct is a term with one positive literal.
pub type Term = BTreeSet<Literal>;

/// Disjunction of terms, deduplicated and canonically ordered.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    terms: BTreeSet<Term>,
}

impl Clause {
    pub fn new<I: IntoIterator<Item = Term>>(terms: I) -> Result<Self> {
        let terms: BTreeSet<Term> = terms.into_iter().collect();
        if terms.is_empty() || terms.iter().any(BTreeSet::is_empty) {
            return Err(Error::Query("clauses and their terms must be nonempty".into()));
        }
        Ok(Clause { terms })
    }

    pub fn atom(a: Atom) -> Self {
        Clause::of_atoms([a])
    }

    /// Disjunction of positive atoms.
    pub fn of_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> Self {
        Clause::new(atoms.into_iter().map(|a| Term::from([Literal::pos(a)]))).expect("nonempty atom list")
    }

    pub fn terms(&self) -> &BTreeSet<Term> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn from_terms_unchecked(terms: BTreeSet<Term>) -> Self {
        Clause { terms }
    }
}

/// The atom of a term that is a single positive literal.
pub(crate) fn plain_atom(term: &Term) -> Option<&Atom> {
    match term.iter().next() {
        Some(l) if term.len() == 1 && !l.negated => Some(&l.atom),
        _ => None,
    }
}

fn write_set(f: &mut fmt::Formatter<'_>, s: &NameSet) -> fmt::Result {
    f.write_str("{")?;
    for (i, n) in s.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        f.write_str(n)?;
    }
    f.write_str("}")
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_set(f, &self.x)?;
        f.write_str(match self.relation {
            Relation::Independence => " _|_ ",
            Relation::Separation => " _|_G ",
        })?;
        write_set(f, &self.y)?;
        f.write_str(" | ")?;
        write_set(f, &self.z)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, term) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" OR ")?;
            }
            for (j, lit) in term.iter().enumerate() {
                if j > 0 {
                    f.write_str(" AND ")?;
                }
                write!(f, "{lit}")?;
            }
        }
        Ok(())
    }
}
