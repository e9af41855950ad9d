//! Naive fixpoint: every round re-evaluates every rule over every fact.
//! Written without the library's matching or comparison code.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use at_core::facts::{Fact, FactSet, Ident, Term, Value};
use at_core::rules::{CompareOp, Conclusion, Condition, Directive, RuleBase};

type Env = BTreeMap<String, Value>;

const LEVELS: [&str; 4] = ["none", "little", "working", "expert"];

fn order(a: &Value, b: &Value) -> Option<Ordering> {
    let num = |v: &Value| match v {
        Value::Int(i) => Some((*i as i128, 1i128)),
        Value::Rational(r) => Some((*r.numer() as i128, *r.denom() as i128)),
        _ => None,
    };
    if let (Some((an, ad)), Some((bn, bd))) = (num(a), num(b)) {
        return Some((an * bd).cmp(&(bn * ad)));
    }
    let lvl = |v: &Value| match v {
        Value::Ident(i) => LEVELS.iter().position(|l| *l == i.as_str()),
        _ => None,
    };
    match (lvl(a), lvl(b)) {
        (Some(x), Some(y)) => Some(x.cmp(&y)),
        _ => None,
    }
}

fn guard(op: CompareOp, a: &Value, b: &Value) -> bool {
    match (order(a, b), op) {
        (Some(o), CompareOp::Lt) => o == Ordering::Less,
        (Some(o), CompareOp::Le) => o != Ordering::Greater,
        (Some(o), CompareOp::Eq) => o == Ordering::Equal,
        (Some(o), CompareOp::Ne) => o != Ordering::Equal,
        (Some(o), CompareOp::Gt) => o == Ordering::Greater,
        (Some(o), CompareOp::Ge) => o != Ordering::Less,
        (None, CompareOp::Eq) => a == b,
        (None, CompareOp::Ne) => a != b,
        (None, _) => false,
    }
}

fn unify(t: &Term, v: &Value, env: &mut Env) -> bool {
    match t {
        Term::Const(c) => c == v,
        Term::Var(name) => match env.get(name) {
            Some(bound) => bound == v,
            None => {
                env.insert(name.clone(), v.clone());
                true
            }
        },
    }
}

fn value_of(t: &Term, env: &Env) -> Value {
    match t {
        Term::Const(c) => c.clone(),
        Term::Var(v) => env[v].clone(),
    }
}

fn as_ident(v: Value) -> Option<Ident> {
    match v {
        Value::Ident(i) => Some(i),
        _ => None,
    }
}

/// All environments satisfying every pattern, then filtered by the guards.
fn solutions(conditions: &[Condition], facts: &FactSet) -> Vec<Env> {
    let mut envs = vec![Env::new()];
    for c in conditions {
        let Condition::Match(p) = c else { continue };
        let mut next = Vec::new();
        for env in &envs {
            for f in facts.iter() {
                let mut e = env.clone();
                if unify(&p.subject, &Value::Ident(f.subject.clone()), &mut e)
                    && unify(&p.predicate, &Value::Ident(f.predicate.clone()), &mut e)
                    && unify(&p.object, &f.object, &mut e)
                {
                    next.push(e);
                }
            }
        }
        envs = next;
    }
    envs.retain(|env| {
        conditions.iter().all(|c| match c {
            Condition::Guard(g) => guard(g.op, &env[&g.var], &g.value),
            Condition::Match(_) => true,
        })
    });
    envs
}

pub struct Naive {
    pub facts: FactSet,
    /// Every directive any rule produced.
    pub directives: BTreeSet<Directive>,
}

pub fn naive_fixpoint(input: &FactSet, rules: &RuleBase) -> Naive {
    let mut facts = input.clone();
    let mut directives = BTreeSet::new();
    loop {
        let mut new = Vec::new();
        for r in &rules.rules {
            for env in solutions(&r.conditions, &facts) {
                for c in &r.conclusions {
                    match c {
                        Conclusion::Assert(p) => {
                            let (s, pr) = (as_ident(value_of(&p.subject, &env)), as_ident(value_of(&p.predicate, &env)));
                            if let (Some(s), Some(pr)) = (s, pr) {
                                new.push(Fact::new(s, pr, value_of(&p.object, &env)));
                            }
                        }
                        Conclusion::Directive(t) => {
                            let args: Vec<Value> = t.args.iter().map(|a| value_of(a, &env)).collect();
                            if let Ok(d) = Directive::from_args(t.kind, &args) {
                                directives.insert(d);
                            }
                        }
                    }
                }
            }
        }
        let before = facts.len();
        facts.extend(new);
        if facts.len() == before {
            return Naive { facts, directives };
        }
    }
}
