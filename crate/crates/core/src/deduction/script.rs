use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::atom::{Atom, Clause, Literal, NameSet, Relation, Term};
use super::rules::Rule;
use crate::error::{Error, Result};

/// Step number `major` or `major.minor`; minor steps sort after `major` and
/// before `major + 1`, so one logical step can be split into single-rule moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StepIndex {
    pub major: u32,
    pub minor: Option<u32>,
}

impl StepIndex {
    pub fn new(major: u32, minor: Option<u32>) -> Self {
        StepIndex { major, minor }
    }

    fn key(self) -> (u32, u32) {
        (self.major, self.minor.unwrap_or(0))
    }
}

impl PartialOrd for StepIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for StepIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for StepIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.minor {
            Some(m) => write!(f, "{}.{}", self.major, m),
            None => write!(f, "{}", self.major),
        }
    }
}

impl FromStr for StepIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Query(format!("bad step index `{s}`"));
        let (major, minor) = match s.split_once('.') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let digits = |t: &str| -> Result<u32> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse().map_err(|_| bad())
        };
        Ok(StepIndex { major: digits(major)?, minor: minor.map(digits).transpose()? })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub index: StepIndex,
    pub clause: Clause,
    pub rule: Rule,
    pub premises: Vec<StepIndex>,
    pub note: String,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} BY {}", self.index, self.clause, self.rule)?;
        if !self.premises.is_empty() {
            f.write_str(" FROM ")?;
            for (i, p) in self.premises.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{p}")?;
            }
        }
        if !self.note.is_empty() {
            write!(f, " # {}", self.note)?;
        }
        Ok(())
    }
}

/// Ordered derivation with strictly increasing step indices whose premises
/// all point backwards.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Script {
    steps: Vec<Step>,
}

impl Script {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for step in &steps {
            let idx = step.index;
            if idx.major == 0 || idx.minor == Some(0) {
                return Err(Error::Script(format!("step index {idx} must be positive")));
            }
            if seen.last().is_some_and(|last| *last >= idx) {
                return Err(Error::Script(format!("step {idx} is out of order")));
            }
            for p in &step.premises {
                if *p >= idx {
                    return Err(Error::Script(format!("step {idx} cites premise {p}, which is not earlier")));
                }
                if !seen.contains(p) {
                    return Err(Error::Script(format!("step {idx} cites missing premise {p}")));
                }
            }
            seen.insert(idx);
        }
        Ok(Script { steps })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn step(&self, idx: StepIndex) -> Option<&Step> {
        self.steps.binary_search_by(|s| s.index.cmp(&idx)).ok().map(|i| &self.steps[i])
    }

    /// Number of distinct major step numbers.
    pub fn major_steps(&self) -> usize {
        self.steps.iter().map(|s| s.index.major).collect::<BTreeSet<_>>().len()
    }

    pub fn last(&self) -> Option<&Step> {
        self.steps.last()
    }

    /// Canonical text form; parsing it gives back an equal script.
    pub fn to_text(&self) -> String {
        self.steps.iter().map(|s| format!("{s}\n")).collect()
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Script {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        load_script(s)
    }
}

/// Parses the line-oriented script format. Blank lines and lines starting
/// with `#` are skipped.
pub fn load_script(text: &str) -> Result<Script> {
    let mut steps = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        steps.push(Cursor::new(line, n + 1).step()?);
    }
    Script::new(steps)
}

/// Parses a standalone clause such as `{a} _|_ {b} | {} OR {a} _|_ {c} | {}`.
pub fn parse_clause(text: &str) -> Result<Clause> {
    let mut c = Cursor::new(text, 1);
    let clause = c.clause()?;
    c.ws();
    if !c.at_end() {
        return Err(c.err("unexpected trailing input"));
    }
    Ok(clause)
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, line }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        self.err_at(self.pos, message)
    }

    fn err_at(&self, pos: usize, message: impl Into<String>) -> Error {
        Error::Syntax { line: self.line, column: pos + 1, message: message.into() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn looking_at(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(k, ch)| self.chars.get(self.pos + k) == Some(&ch))
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.looking_at(s) {
            self.pos += s.chars().count();
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`")))
        }
    }

    /// Keyword followed by whitespace or end of input.
    fn keyword(&mut self, kw: &str) -> bool {
        if !self.looking_at(kw) {
            return false;
        }
        let after = self.pos + kw.chars().count();
        if self.chars.get(after).is_some_and(|c| !c.is_whitespace()) {
            return false;
        }
        self.pos = after;
        true
    }

    fn word(&mut self, ok: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.peek().is_some_and(&ok) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn index(&mut self) -> Result<StepIndex> {
        let start = self.pos;
        let w = self.word(|c| c.is_ascii_digit() || c == '.');
        w.parse().map_err(|_| self.err_at(start, "expected a step index like `3` or `3.1`"))
    }

    fn step(&mut self) -> Result<Step> {
        self.ws();
        let index = self.index()?;
        self.ws();
        self.expect(":")?;
        let clause = self.clause()?;
        self.ws();
        if !self.keyword("BY") {
            return Err(self.err("expected `BY`"));
        }
        self.ws();
        let start = self.pos;
        let name = self.word(|c| c.is_ascii_alphanumeric() || c == '_');
        let rule: Rule = name.parse().map_err(|_| self.err_at(start, format!("unknown rule `{name}`")))?;
        self.ws();
        let mut premises = Vec::new();
        if self.keyword("FROM") {
            loop {
                self.ws();
                premises.push(self.index()?);
                self.ws();
                if self.peek() == Some(',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.ws();
        let mut note = String::new();
        if self.peek() == Some('#') {
            self.pos += 1;
            note = self.chars[self.pos..].iter().collect::<String>().trim().to_string();
            self.pos = self.chars.len();
        }
        if !self.at_end() {
            return Err(self.err("unexpected input after step"));
        }
        Ok(Step { index, clause, rule, premises, note })
    }

    fn clause(&mut self) -> Result<Clause> {
        let mut terms = BTreeSet::new();
        loop {
            terms.insert(self.term()?);
            let save = self.pos;
            self.ws();
            if !self.keyword("OR") {
                self.pos = save;
                break;
            }
        }
        Ok(Clause::from_terms_unchecked(terms))
    }

    fn term(&mut self) -> Result<Term> {
        let mut term = Term::new();
        loop {
            term.insert(self.literal()?);
            let save = self.pos;
            self.ws();
            if !self.keyword("AND") {
                self.pos = save;
                break;
            }
        }
        Ok(term)
    }

    fn literal(&mut self) -> Result<Literal> {
        self.ws();
        let negated = self.peek() == Some('~');
        if negated {
            self.pos += 1;
        }
        let atom = self.atom()?;
        Ok(Literal { negated, atom })
    }

    fn atom(&mut self) -> Result<Atom> {
        self.ws();
        let start = self.pos;
        let x = self.set()?;
        self.ws();
        self.expect("_|_")?;
        let relation = if self.peek() == Some('G') {
            self.pos += 1;
            Relation::Separation
        } else {
            Relation::Independence
        };
        self.ws();
        let y = self.set()?;
        self.ws();
        self.expect("|")?;
        self.ws();
        let z = self.set()?;
        Atom::new(relation, x, y, z).map_err(|e| {
            let msg = match e {
                Error::Query(m) => m,
                other => other.to_string(),
            };
            self.err_at(start, msg)
        })
    }

    fn set(&mut self) -> Result<NameSet> {
        self.expect("{")?;
        let mut out = NameSet::new();
        self.ws();
        if self.peek() == Some('}') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            self.ws();
            let start = self.pos;
            let name = self.word(|c| c.is_alphanumeric() || c == '_' || c == '\'');
            if name.is_empty() {
                return Err(self.err("expected a variable name"));
            }
            if !out.insert(name.clone()) {
                return Err(self.err_at(start, format!("duplicate name `{name}`")));
            }
            self.ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some('}') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.err("expected `,` or `}`")),
            }
        }
    }
}
