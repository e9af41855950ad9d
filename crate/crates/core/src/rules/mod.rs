//! Production rules kept outside the application logic.
//!
//! ```text
//! RULE <name>
//!   WHEN <pattern> {AND <pattern> | AND <guard>}
//!   THEN <conclusion> {AND <conclusion>}
//! END
//!
//! pattern    := '(' term ',' term ',' term ')'
//! term       := ?var | identifier | "text" | integer | integer/integer
//! guard      := ?var ('<' | '<=' | '=' | '!=' | '>' | '>=') constant
//! conclusion := 'assert' pattern | 'directive' kind '(' term {',' term} ')'
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Guards may only use
//! variables bound by an earlier pattern and every conclusion variable must be
//! bound by some pattern. Knowledge levels compare as
//! `none < little < working < expert`; integers and rationals compare
//! numerically. Any other ordered comparison is false.

mod directive;
mod engine;
mod parser;

use std::cmp::Ordering;
use std::fmt;

use crate::facts::{Binding, Term, TriplePattern, Value};
use crate::profile::KnowledgeLevel;

pub use directive::{sort_canonical, Directive, DirectiveArgError, DirectiveKind};
pub use engine::{explain, infer, ExplainError, Firing, Inference, TraceStep};
pub use parser::{parse_rules, RuleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    fn holds(self, ord: Ordering) -> bool {
        match self {
            CompareOp::Lt => ord.is_lt(),
            CompareOp::Le => ord.is_le(),
            CompareOp::Eq => ord.is_eq(),
            CompareOp::Ne => ord.is_ne(),
            CompareOp::Gt => ord.is_gt(),
            CompareOp::Ge => ord.is_ge(),
        }
    }
}

/// Ordering used by guards, when the two values are comparable.
pub fn compare_values(a: &Value, b: &Value) -> Option<Ordering> {
    if let (Some(x), Some(y)) = (a.as_ratio(), b.as_ratio()) {
        return Some(x.cmp(&y));
    }
    let level = |v: &Value| v.as_ident().and_then(|i| i.as_str().parse::<KnowledgeLevel>().ok());
    if let (Some(x), Some(y)) = (level(a), level(b)) {
        return Some(x.cmp(&y));
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Guard {
    pub var: String,
    pub op: CompareOp,
    pub value: Value,
}

impl Guard {
    /// `false` when the variable is unbound or the values are not comparable
    /// (except that `=`/`!=` fall back to plain equality).
    pub fn holds(&self, binding: &Binding) -> bool {
        let Some(bound) = binding.get(&self.var) else { return false };
        match compare_values(bound, &self.value) {
            Some(ord) => self.op.holds(ord),
            None => match self.op {
                CompareOp::Eq => *bound == self.value,
                CompareOp::Ne => *bound != self.value,
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    Match(TriplePattern),
    Guard(Guard),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DirectiveTemplate {
    pub kind: DirectiveKind,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Conclusion {
    Assert(TriplePattern),
    Directive(DirectiveTemplate),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub conditions: Vec<Condition>,
    pub conclusions: Vec<Conclusion>,
    /// Position in the rule file; lower fires first.
    pub priority: usize,
}

impl Rule {
    pub fn patterns(&self) -> impl Iterator<Item = &TriplePattern> {
        self.conditions.iter().filter_map(|c| match c {
            Condition::Match(p) => Some(p),
            Condition::Guard(_) => None,
        })
    }

    pub fn guards(&self) -> impl Iterator<Item = &Guard> {
        self.conditions.iter().filter_map(|c| match c {
            Condition::Guard(g) => Some(g),
            Condition::Match(_) => None,
        })
    }
}

/// Parsed rule file. Equality ignores the retained source text.
#[derive(Debug, Clone, Default)]
pub struct RuleBase {
    pub rules: Vec<Rule>,
    pub source: String,
}

impl PartialEq for RuleBase {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl Eq for RuleBase {}

impl RuleBase {
    pub fn shipped() -> Self {
        parse_rules(include_str!("../../../../config/adaptation.rules")).expect("shipped rulebase parses")
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Match(p) => write!(f, "{p}"),
            Condition::Guard(g) => write!(f, "?{} {} {}", g.var, g.op.symbol(), g.value),
        }
    }
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conclusion::Assert(p) => write!(f, "assert {p}"),
            Conclusion::Directive(d) => {
                let args: Vec<String> = d.args.iter().map(|a| a.to_string()).collect();
                write!(f, "directive {}({})", d.kind, args.join(", "))
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RULE {}\n  WHEN ", self.name)?;
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("\n  THEN ")?;
        for (i, c) in self.conclusions.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("\nEND")
    }
}

/// Renders the rule list back to DSL text.
impl fmt::Display for RuleBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
