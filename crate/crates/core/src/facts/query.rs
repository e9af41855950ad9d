use std::collections::BTreeMap;
use std::fmt;

use super::{Fact, FactSet, Value};

/// Variable substitution produced by matching; ordered by variable name.
pub type Binding = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// `?name`
    Var(String),
    Const(Value),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn ident(s: &str) -> Term {
        Term::Const(Value::ident(s))
    }

    /// Parses `?name` as a variable and anything else as a fact object token.
    pub fn parse(s: &str) -> Result<Term, String> {
        match s.strip_prefix('?') {
            Some(name) if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => {
                Ok(Term::Var(name.to_string()))
            }
            Some(_) => Err(format!("invalid variable {s:?}")),
            None if s.starts_with('"') => {
                let chars: Vec<char> = s.chars().collect();
                let (text, end) = super::syntax::scan_text_literal(&chars, 0).map_err(|(_, m)| m)?;
                if end != chars.len() {
                    return Err(format!("trailing characters in {s:?}"));
                }
                Ok(Term::Const(Value::Text(text)))
            }
            None => super::syntax::parse_atom(s).map(Term::Const),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        TriplePattern { subject, predicate, object }
    }

    /// Extends `binding` so that the pattern equals `fact`, or returns `None`.
    pub fn match_fact(&self, fact: &Fact, binding: &Binding) -> Option<Binding> {
        let mut out = binding.clone();
        let slots = [
            (&self.subject, Value::Ident(fact.subject.clone())),
            (&self.predicate, Value::Ident(fact.predicate.clone())),
            (&self.object, fact.object.clone()),
        ];
        for (term, value) in slots {
            match term {
                Term::Const(c) if *c == value => {}
                Term::Const(_) => return None,
                Term::Var(name) => match out.get(name) {
                    Some(bound) if *bound == value => {}
                    Some(_) => return None,
                    None => {
                        out.insert(name.clone(), value);
                    }
                },
            }
        }
        Some(out)
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.predicate, self.object)
    }
}

/// All bindings under which `pattern` is a member of `fs`, sorted by bound
/// values (in variable-name order). A fully constant pattern yields one empty
/// binding when present.
pub fn query(fs: &FactSet, pattern: &TriplePattern) -> Vec<Binding> {
    let empty = Binding::new();
    let mut out: Vec<Binding> = fs.iter().filter_map(|f| pattern.match_fact(f, &empty)).collect();
    out.sort_by(|a, b| a.values().cmp(b.values()));
    out.dedup();
    out
}
