//! Random rule bases and fact sets over a small vocabulary, so that rules
//! actually chain.

use at_core::facts::{Fact, FactSet, Term, TriplePattern, Value};
use at_core::rules::{CompareOp, Conclusion, Condition, DirectiveKind, DirectiveTemplate, Guard, Rule, RuleBase};
use rand::seq::IndexedRandom;
use rand::Rng;

const SUBJECTS: [&str; 3] = ["a", "b", "c"];
const PREDICATES: [&str; 3] = ["p", "q", "r"];
const LEVELS: [&str; 4] = ["none", "little", "working", "expert"];
const VARS: [&str; 3] = ["x", "y", "z"];
const OPS: [CompareOp; 6] = [CompareOp::Lt, CompareOp::Le, CompareOp::Eq, CompareOp::Ne, CompareOp::Gt, CompareOp::Ge];

fn object<R: Rng>(rng: &mut R) -> Value {
    match rng.random_range(0..3) {
        0 => Value::ident(SUBJECTS.choose(rng).unwrap()),
        1 => Value::ident(LEVELS.choose(rng).unwrap()),
        _ => Value::Int(rng.random_range(0..4)),
    }
}

pub fn random_facts<R: Rng>(rng: &mut R, max: usize) -> FactSet {
    let n = rng.random_range(0..=max);
    (0..n)
        .map(|_| Fact::of(SUBJECTS.choose(rng).unwrap(), PREDICATES.choose(rng).unwrap(), object(rng)))
        .collect()
}

fn term<R: Rng>(rng: &mut R, consts: &[&str], objects: bool) -> Term {
    if rng.random_bool(0.6) {
        Term::var(VARS.choose(rng).unwrap())
    } else if objects {
        Term::Const(object(rng))
    } else {
        Term::ident(consts.choose(rng).unwrap())
    }
}

fn bound_term<R: Rng>(rng: &mut R, bound: &[String], consts: &[&str]) -> Term {
    if !bound.is_empty() && rng.random_bool(0.7) {
        Term::Var(bound.choose(rng).unwrap().clone())
    } else {
        Term::ident(consts.choose(rng).unwrap())
    }
}

pub fn random_rule<R: Rng>(rng: &mut R, name: String, priority: usize) -> Rule {
    let mut conditions = Vec::new();
    let mut bound: Vec<String> = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        let p = TriplePattern::new(term(rng, &SUBJECTS, false), term(rng, &PREDICATES, false), term(rng, &[], true));
        for t in [&p.subject, &p.predicate, &p.object] {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    bound.push(v.clone());
                }
            }
        }
        conditions.push(Condition::Match(p));
        if !bound.is_empty() && rng.random_bool(0.3) {
            let value = if rng.random_bool(0.5) { Value::ident(LEVELS.choose(rng).unwrap()) } else { Value::Int(rng.random_range(0..4)) };
            conditions.push(Condition::Guard(Guard {
                var: bound.choose(rng).unwrap().clone(),
                op: *OPS.choose(rng).unwrap(),
                value,
            }));
        }
    }
    let mut conclusions = Vec::new();
    for _ in 0..rng.random_range(1..=2) {
        let c = match rng.random_range(0..5) {
            0..=2 => Conclusion::Assert(TriplePattern::new(
                bound_term(rng, &bound, &SUBJECTS),
                bound_term(rng, &bound, &PREDICATES),
                bound_term(rng, &bound, &SUBJECTS),
            )),
            3 => Conclusion::Directive(DirectiveTemplate {
                kind: if rng.random_bool(0.5) { DirectiveKind::Skip } else { DirectiveKind::EmbedTool },
                args: vec![bound_term(rng, &bound, &SUBJECTS)],
            }),
            _ => Conclusion::Directive(DirectiveTemplate {
                kind: DirectiveKind::Present,
                args: vec![bound_term(rng, &bound, &SUBJECTS), Term::ident("audio"), Term::ident("deductive")],
            }),
        };
        conclusions.push(c);
    }
    Rule { name, conditions, conclusions, priority }
}

pub fn random_rulebase<R: Rng>(rng: &mut R, max_rules: usize) -> RuleBase {
    let n = rng.random_range(0..=max_rules);
    RuleBase { rules: (0..n).map(|i| random_rule(rng, format!("r{i}"), i)).collect(), source: String::new() }
}
