mod support;

use std::collections::BTreeSet;

use at_core::facts::{Fact, FactSet, Value};
use at_core::rules::{explain, infer, parse_rules, Conclusion, Condition, Directive, Inference, RuleBase};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::naive::naive_fixpoint;
use support::random_rules::{random_facts, random_rulebase};

fn fired(inf: &Inference) -> BTreeSet<Directive> {
    inf.firings.iter().flat_map(|f| f.directives.iter().cloned()).collect()
}

fn keys(ds: &[Directive]) -> BTreeSet<(String, String)> {
    ds.iter().map(|d| (d.kind().to_string(), d.key().1.to_string())).collect()
}

#[test]
fn semi_naive_matches_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut derived_any = 0;
    for _ in 0..200 {
        let rules = random_rulebase(&mut rng, 5);
        let facts = random_facts(&mut rng, 30);
        let inf = infer(&facts, &rules);
        let oracle = naive_fixpoint(&facts, &rules);
        assert!(!inf.budget_exhausted);
        assert_eq!(inf.facts, oracle.facts, "rules:\n{rules}");
        assert_eq!(fired(&inf), oracle.directives, "rules:\n{rules}");
        assert_eq!(keys(&inf.directives), keys(&oracle.directives.iter().cloned().collect::<Vec<_>>()));
        derived_any += usize::from(!inf.derived.is_empty());
    }
    assert!(derived_any > 30, "generator too weak: {derived_any}");
}

#[test]
fn display_parse_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let rules = random_rulebase(&mut rng, 5);
        let text = rules.to_string();
        assert_eq!(parse_rules(&text).unwrap(), rules, "{text}");
    }
}

#[test]
fn inference_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let rules = random_rulebase(&mut rng, 5);
        let small = random_facts(&mut rng, 15);
        let mut large = small.clone();
        large.extend(random_facts(&mut rng, 15));
        let (a, b) = (infer(&small, &rules), infer(&large, &rules));
        assert!(a.facts.is_subset(&b.facts));
        assert!(fired(&a).is_subset(&fired(&b)));
        assert!(keys(&a.directives).is_subset(&keys(&b.directives)));
    }
}

#[test]
fn insertion_order_is_irrelevant() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let rules = random_rulebase(&mut rng, 5);
        let facts = random_facts(&mut rng, 30);
        let mut list: Vec<Fact> = facts.iter().cloned().collect();
        list.shuffle(&mut rng);
        let shuffled: FactSet = list.into_iter().collect();
        assert_eq!(infer(&facts, &rules), infer(&shuffled, &rules));
    }
}

/// Re-fires the traced steps in order on the input and checks each step's
/// premises hold when it runs.
fn replay(input: &FactSet, rules: &RuleBase, steps: &[at_core::rules::TraceStep], target: &Directive) {
    let mut facts = input.clone();
    let mut produced = Vec::new();
    for step in steps {
        let rule = rules.rule(&step.rule).unwrap();
        let subst = |t: &at_core::facts::Term| match t {
            at_core::facts::Term::Const(c) => c.clone(),
            at_core::facts::Term::Var(v) => step.binding[v].clone(),
        };
        for c in &rule.conditions {
            match c {
                Condition::Match(p) => {
                    let f = Fact::new(
                        subst(&p.subject).as_ident().unwrap().clone(),
                        subst(&p.predicate).as_ident().unwrap().clone(),
                        subst(&p.object),
                    );
                    assert!(facts.contains(&f), "premise {f} missing at {}", step.rule);
                }
                Condition::Guard(g) => assert!(g.holds(&step.binding)),
            }
        }
        for c in &rule.conclusions {
            match c {
                Conclusion::Assert(p) => {
                    if let (Some(s), Some(pr)) = (subst(&p.subject).as_ident().cloned(), subst(&p.predicate).as_ident().cloned()) {
                        facts.insert(Fact::new(s, pr, subst(&p.object)));
                    }
                }
                Conclusion::Directive(t) => {
                    let args: Vec<Value> = t.args.iter().map(subst).collect();
                    if let Ok(d) = Directive::from_args(t.kind, &args) {
                        produced.push(d);
                    }
                }
            }
        }
    }
    assert!(produced.contains(target));
}

#[test]
fn explanations_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    for _ in 0..200 {
        let rules = random_rulebase(&mut rng, 5);
        let facts = random_facts(&mut rng, 30);
        let inf = infer(&facts, &rules);
        for d in &inf.directives {
            let steps = explain(&inf, d).unwrap();
            replay(&facts, &rules, &steps, d);
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn empty_rulebase_and_shipped_rules() {
    let rb = parse_rules("").unwrap();
    let facts: FactSet = [Fact::of("a", "p", Value::Int(1))].into_iter().collect();
    let inf = infer(&facts, &rb);
    assert_eq!(inf.facts, facts);
    assert!(inf.directives.is_empty());
    let shipped = RuleBase::shipped();
    assert_eq!(parse_rules(&shipped.source).unwrap(), shipped);
}
