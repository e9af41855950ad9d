use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{Conclusion, Condition, Directive, Rule, RuleBase};
use crate::facts::{Binding, Fact, FactSet, Ident, Term, TriplePattern, Value};

/// One rule application.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Firing {
    pub rule: String,
    pub rule_index: usize,
    #[serde(serialize_with = "binding_text")]
    pub binding: Binding,
    /// Facts matched by the rule's patterns under `binding`.
    #[serde(serialize_with = "facts_text")]
    pub premises: Vec<Fact>,
    /// Facts this firing added to the set.
    #[serde(serialize_with = "facts_text")]
    pub asserted: Vec<Fact>,
    pub directives: Vec<Directive>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inference {
    /// Input facts plus everything derived.
    pub facts: FactSet,
    /// Facts derived by rules and absent from the input.
    pub derived: FactSet,
    /// Deduplicated by kind and key, first firing wins.
    pub directives: Vec<Directive>,
    pub firings: Vec<Firing>,
    pub warnings: Vec<String>,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule: String,
    #[serde(serialize_with = "binding_text")]
    pub binding: Binding,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExplainError {
    #[error("directive {0} was not derived")]
    NotDerivable(String),
}

fn binding_text<S: serde::Serializer>(b: &Binding, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(b.iter().map(|(k, v)| (k, v.to_string())))
}

fn facts_text<S: serde::Serializer>(fs: &[Fact], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(fs.iter().map(|f| f.to_string()))
}

fn resolve(term: &Term, binding: &Binding) -> Option<Value> {
    match term {
        Term::Const(v) => Some(v.clone()),
        Term::Var(v) => binding.get(v).cloned(),
    }
}

fn resolve_ident(term: &Term, binding: &Binding) -> Option<Ident> {
    resolve(term, binding)?.as_ident().cloned()
}

fn instantiate(p: &TriplePattern, binding: &Binding) -> Option<Fact> {
    Some(Fact::new(
        resolve_ident(&p.subject, binding)?,
        resolve_ident(&p.predicate, binding)?,
        resolve(&p.object, binding)?,
    ))
}

/// All bindings satisfying the rule's conditions. The match condition at
/// position `delta_at` only considers `delta`; the others consider `all`.
fn matches(rule: &Rule, all: &FactSet, delta: &FactSet, delta_at: Option<usize>) -> Vec<Binding> {
    let mut bindings = vec![Binding::new()];
    for (i, cond) in rule.conditions.iter().enumerate() {
        bindings = match cond {
            Condition::Match(p) => {
                let source = if delta_at == Some(i) { delta } else { all };
                bindings.iter().flat_map(|b| source.iter().filter_map(move |f| p.match_fact(f, b))).collect()
            }
            Condition::Guard(g) => bindings.into_iter().filter(|b| g.holds(b)).collect(),
        };
        if bindings.is_empty() {
            break;
        }
    }
    bindings
}

/// Distinct values in the facts and the rule constants.
fn universe_size(facts: &FactSet, rules: &RuleBase) -> usize {
    let mut values: BTreeSet<Value> = BTreeSet::new();
    for f in facts.iter() {
        values.insert(Value::Ident(f.subject.clone()));
        values.insert(Value::Ident(f.predicate.clone()));
        values.insert(f.object.clone());
    }
    let mut add = |p: &TriplePattern| {
        for t in [&p.subject, &p.predicate, &p.object] {
            if let Term::Const(v) = t {
                values.insert(v.clone());
            }
        }
    };
    for r in &rules.rules {
        r.patterns().for_each(&mut add);
        for c in &r.conclusions {
            if let Conclusion::Assert(p) = c {
                add(p);
            }
        }
    }
    values.len()
}

/// Forward-chains `rules` over `facts` to a fixpoint.
///
/// Each round only revisits bindings that involve a fact derived in the
/// previous round; facts asserted during a round become visible in the next
/// one. A rule fires at most once per binding. The run stops early, with
/// `budget_exhausted` set, after `|rules| * U^3` firings, U being the number of
/// distinct values involved.
pub fn infer(facts: &FactSet, rules: &RuleBase) -> Inference {
    let u = universe_size(facts, rules).max(1);
    let budget = rules.len().saturating_mul(u.saturating_pow(3));

    let mut all = facts.clone();
    let mut derived = FactSet::new();
    let mut firings: Vec<Firing> = Vec::new();
    let mut warnings = Vec::new();
    let mut fired: BTreeSet<(usize, Binding)> = BTreeSet::new();
    let mut delta = facts.clone();
    let mut first_round = true;
    let mut budget_exhausted = false;

    'rounds: while first_round || !delta.is_empty() {
        let mut next_delta = FactSet::new();
        for (idx, rule) in rules.rules.iter().enumerate() {
            let mut candidates: BTreeSet<Binding> = BTreeSet::new();
            if first_round {
                candidates.extend(matches(rule, &all, &delta, None));
            } else {
                for (pos, cond) in rule.conditions.iter().enumerate() {
                    if matches!(cond, Condition::Match(_)) {
                        candidates.extend(matches(rule, &all, &delta, Some(pos)));
                    }
                }
            }
            for binding in candidates {
                if fired.contains(&(idx, binding.clone())) {
                    continue;
                }
                if firings.len() >= budget {
                    budget_exhausted = true;
                    break 'rounds;
                }
                fired.insert((idx, binding.clone()));
                let premises: Vec<Fact> = rule.patterns().filter_map(|p| instantiate(p, &binding)).collect();
                let mut asserted = Vec::new();
                let mut directives = Vec::new();
                for c in &rule.conclusions {
                    match c {
                        Conclusion::Assert(p) => match instantiate(p, &binding) {
                            Some(f) => {
                                if !all.contains(&f) && !next_delta.contains(&f) {
                                    next_delta.insert(f.clone());
                                    asserted.push(f);
                                }
                            }
                            None => warnings.push(format!("{}: assert {p} has a non-identifier subject or predicate", rule.name)),
                        },
                        Conclusion::Directive(t) => {
                            let args: Vec<Value> = t.args.iter().filter_map(|a| resolve(a, &binding)).collect();
                            match Directive::from_args(t.kind, &args) {
                                Ok(d) => directives.push(d),
                                Err(e) => warnings.push(format!("{}: {e}", rule.name)),
                            }
                        }
                    }
                }
                firings.push(Firing { rule: rule.name.clone(), rule_index: idx, binding, premises, asserted, directives });
            }
        }
        for f in next_delta.iter() {
            all.insert(f.clone());
            derived.insert(f.clone());
        }
        delta = next_delta;
        first_round = false;
    }

    let mut seen = BTreeSet::new();
    let mut directives = Vec::new();
    for d in firings.iter().flat_map(|f| &f.directives) {
        let (kind, key) = d.key();
        if seen.insert((kind, key.to_string())) {
            directives.push(d.clone());
        }
    }
    Inference { facts: all, derived, directives, firings, warnings, budget_exhausted }
}

/// The firings needed to derive `directive`, in the order they happened.
pub fn explain(inference: &Inference, directive: &Directive) -> Result<Vec<TraceStep>, ExplainError> {
    let target = inference
        .firings
        .iter()
        .position(|f| f.directives.contains(directive))
        .ok_or_else(|| ExplainError::NotDerivable(directive.to_string()))?;
    let producer: BTreeMap<&Fact, usize> = inference
        .firings
        .iter()
        .enumerate()
        .flat_map(|(i, f)| f.asserted.iter().map(move |a| (a, i)))
        .collect();

    let mut needed = BTreeSet::from([target]);
    let mut stack = vec![target];
    while let Some(i) = stack.pop() {
        for premise in &inference.firings[i].premises {
            if let Some(&p) = producer.get(premise) {
                if needed.insert(p) {
                    stack.push(p);
                }
            }
        }
    }
    Ok(needed
        .into_iter()
        .map(|i| TraceStep { rule: inference.firings[i].rule.clone(), binding: inference.firings[i].binding.clone() })
        .collect())
}
