//! Subject-predicate-object facts: the unit of persistence and inference.
//!
//! Facts are stored in a line-oriented canonical text format (see [`syntax`])
//! and matched with simple triple patterns (see [`query`]).

pub mod query;
pub mod syntax;

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

pub use query::{query, Binding, Term, TriplePattern};
pub use syntax::{parse_facts, serialize_facts, FactParseError};

/// Identifier token: `[A-Za-z0-9_:.=-]+`, not `.` alone and not shaped like a number.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Ident(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid identifier {0:?}")]
pub struct InvalidIdent(pub String);

impl Ident {
    pub fn new(s: impl Into<String>) -> Result<Self, InvalidIdent> {
        let s = s.into();
        if is_ident(&s) {
            Ok(Ident(s))
        } else {
            Err(InvalidIdent(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | ':' | '.' | '=' | '-')
}

pub(crate) fn is_ident(s: &str) -> bool {
    !s.is_empty() && s != "." && s.chars().all(is_ident_char) && syntax::parse_number(s).is_none()
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Ident {
    type Error = InvalidIdent;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Ident::new(s)
    }
}

impl From<Ident> for String {
    fn from(id: Ident) -> String {
        id.0
    }
}

impl AsRef<str> for Ident {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Typed object of a fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Ident(Ident),
    Text(String),
    Int(i64),
    Rational(Ratio<i64>),
}

impl Value {
    /// Identifier value; panics on an invalid identifier, so only use with literals.
    pub fn ident(s: &str) -> Value {
        Value::Ident(Ident::new(s).expect("valid identifier literal"))
    }

    pub fn text(s: impl Into<String>) -> Value {
        Value::Text(s.into())
    }

    pub fn as_ident(&self) -> Option<&Ident> {
        match self {
            Value::Ident(id) => Some(id),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(t) => Some(t),
            _ => None,
        }
    }

    /// Numeric view of integers and rationals.
    pub fn as_ratio(&self) -> Option<Ratio<i64>> {
        match self {
            Value::Int(i) => Some(Ratio::from_integer(*i)),
            Value::Rational(r) => Some(*r),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Ident(id) => f.write_str(id.as_str()),
            Value::Text(t) => syntax::write_text_literal(f, t),
            Value::Int(i) => write!(f, "{i}"),
            Value::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl From<Ident> for Value {
    fn from(id: Ident) -> Self {
        Value::Ident(id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub subject: Ident,
    pub predicate: Ident,
    pub object: Value,
}

impl Fact {
    pub fn new(subject: Ident, predicate: Ident, object: Value) -> Self {
        Fact { subject, predicate, object }
    }

    /// Convenience constructor for literals known to be valid identifiers.
    pub fn of(subject: &str, predicate: &str, object: Value) -> Self {
        Fact {
            subject: Ident::new(subject).expect("valid subject literal"),
            predicate: Ident::new(predicate).expect("valid predicate literal"),
            object,
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// A set of facts; inserting an existing fact is a no-op.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactSet {
    facts: BTreeSet<Fact>,
}

impl FactSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `true` when the fact was not already present.
    pub fn insert(&mut self, fact: Fact) -> bool {
        self.facts.insert(fact)
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn remove(&mut self, fact: &Fact) -> bool {
        self.facts.remove(fact)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    pub fn is_subset(&self, other: &FactSet) -> bool {
        self.facts.is_subset(&other.facts)
    }

    pub fn with_predicate<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = &'a Fact> + 'a {
        self.facts.iter().filter(move |f| f.predicate.as_str() == predicate)
    }
}

impl FromIterator<Fact> for FactSet {
    fn from_iter<I: IntoIterator<Item = Fact>>(iter: I) -> Self {
        FactSet { facts: iter.into_iter().collect() }
    }
}

impl Extend<Fact> for FactSet {
    fn extend<I: IntoIterator<Item = Fact>>(&mut self, iter: I) {
        self.facts.extend(iter)
    }
}

impl IntoIterator for FactSet {
    type Item = Fact;
    type IntoIter = std::collections::btree_set::IntoIter<Fact>;
    fn into_iter(self) -> Self::IntoIter {
        self.facts.into_iter()
    }
}

impl<'a> IntoIterator for &'a FactSet {
    type Item = &'a Fact;
    type IntoIter = std::collections::btree_set::Iter<'a, Fact>;
    fn into_iter(self) -> Self::IntoIter {
        self.facts.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers() {
        assert!(Ident::new("teacher:42").is_ok());
        assert!(Ident::new("maetic=little").is_ok());
        assert!(Ident::new("a.b-c_d").is_ok());
        assert!(Ident::new("").is_err());
        assert!(Ident::new(".").is_err());
        assert!(Ident::new("42").is_err());
        assert!(Ident::new("-3/4").is_err());
        assert!(Ident::new("has space").is_err());
        assert!(Ident::new("?x").is_err());
    }

    #[test]
    fn set_semantics() {
        let mut fs = FactSet::new();
        let f = Fact::of("teacher:42", "inputs", Value::ident("verbal"));
        assert!(fs.insert(f.clone()));
        assert!(!fs.insert(f));
        assert_eq!(fs.len(), 1);
    }
}
