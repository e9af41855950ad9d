//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#[path = "../../core/tests/support/mod.rs"]
mod oracles;
mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use at_core::facts::{parse_facts, serialize_facts, Fact, FactSet, Ident, Value};
use at_core::ils::{score, AnswerSheet, Choice, QuestionnaireDefinition, ITEM_COUNT};
use at_core::profile::{default_profile, Hours, Strength, TopicRegistry, Uid};
use at_core::rules::{infer, Directive};
use at_core::scenario::{apportion, compose_teams, exact_shares, session_count};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{at, fixture_profile, fixture_unit, read_tree, repo, seed_cli, Harness};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap()
}

fn mr_jones_end_to_end() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    seed_cli(dir.path());
    let started = Instant::now();
    let out = at(&["gen", "--data-dir", dir.path().to_str().unwrap(), "--user", "jones@example.edu", "--unit", "web-programming"]);
    let elapsed = started.elapsed();
    ensure(out.status.success(), || format!("at gen failed: {}", String::from_utf8_lossy(&out.stderr)))?;
    ensure(elapsed.as_secs_f64() < 5.0, || format!("at gen took {elapsed:?}"))?;
    let device = Path::new(String::from_utf8(out.stdout).unwrap().trim()).to_path_buf();
    let files = read_tree(&device);
    let text = |p: &str| String::from_utf8(files.get(p).cloned().unwrap_or_default()).unwrap();

    let blog_trees: BTreeSet<&str> =
        files.keys().filter_map(|f| f.strip_prefix("blogs/")?.split_once('/').map(|x| x.0)).collect();
    ensure(blog_trees.len() == 5, || format!("{} blog trees", blog_trees.len()))?;

    let blog_links: BTreeSet<String> = files
        .iter()
        .filter(|(p, _)| p.starts_with("esuitcase/"))
        .flat_map(|(_, b)| {
            let html = String::from_utf8_lossy(b).into_owned();
            html.split("href=\"").skip(1).filter_map(|s| s.split('"').next().map(str::to_string)).collect::<Vec<_>>()
        })
        .filter(|href| href.starts_with("../blogs/"))
        .collect();
    ensure(blog_links.len() == 5, || format!("{} distinct blog links in the e-suitcase", blog_links.len()))?;
    for link in &blog_links {
        let target = link.trim_start_matches("../");
        ensure(files.contains_key(target), || format!("blog link {link} does not resolve"))?;
    }

    let presentations: Vec<&str> =
        files.keys().filter_map(|f| f.strip_prefix("esuitcase/presentation/")).collect();
    ensure(presentations == ["maetic.html"], || format!("presentation pages {presentations:?}"))?;

    let maetic = text("esuitcase/presentation/maetic.html");
    let audio = maetic.matches("<audio ").count();
    ensure(audio > 0 && !maetic.contains("<video"), || format!("maetic page is not in audio: {audio} audio items"))?;
    let kinds: Vec<&str> = maetic
        .lines()
        .filter_map(|l| l.strip_prefix("<h2>")?.strip_suffix(")</h2>")?.rsplit_once('(').map(|x| x.1))
        .collect();
    let first_example = kinds.iter().position(|k| *k == "example").unwrap_or(kinds.len());
    ensure(kinds.len() == 5 && kinds[first_example..].iter().all(|k| *k == "example"), || {
        format!("section order {kinds:?}")
    })?;

    let manifest = text("toolbox.manifest");
    let spreadsheet = manifest.lines().find(|l| l.split('|').next().map(str::trim) == Some("spreadsheet"));
    ensure(spreadsheet.is_some_and(|l| l.split('|').nth(2).map(str::trim) == Some("directive")), || {
        format!("toolbox: {manifest}")
    })?;
    Ok(format!("5 blog trees, 5 blog links, maetic only (audio, {kinds:?}), spreadsheet=directive, at gen {elapsed:.2?}"))
}

fn standard_behaviour() -> Outcome {
    let h = Harness::new();
    runtime().block_on(async {
        let (a, token_a) = h.user("a@example.edu").await;
        let (b, token_b) = h.user("b@example.edu").await;
        h.create_unit(&token_a, &fixture_unit()).await;
        h.create_unit(&token_b, &fixture_unit()).await;
        let saved = h.put_profile(&token_b, &default_profile(Uid(b), &TopicRegistry::shipped())).await;
        ensure(saved.status.is_success(), || format!("saving default profile: {}", saved.status))?;
        let reported = h.get("/api/profile", &token_a).await.json();
        ensure(reported["standard"] == true, || format!("profile without save reported as {reported}"))?;
        h.generate(&token_a, "web-programming").await;
        h.generate(&token_b, "web-programming").await;
        let tree = |uid: u64| read_tree(&h.data_dir().join(format!("users/{uid}/device/web-programming")));
        let (ta, tb) = (tree(a), tree(b));
        ensure(!ta.is_empty() && ta == tb, || "bundles differ".into())?;
        Ok(format!("{} files byte-identical", ta.len()))
    })
}

fn rule_engine_oracle() -> Outcome {
    use oracles::naive::naive_fixpoint;
    use oracles::random_rules::{random_facts, random_rulebase};
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let (mut mismatches, mut derived) = (0, 0);
    for _ in 0..200 {
        let rules = random_rulebase(&mut rng, 5);
        let facts = random_facts(&mut rng, 30);
        let inf = infer(&facts, &rules);
        let oracle = naive_fixpoint(&facts, &rules);
        let fired: BTreeSet<Directive> = inf.firings.iter().flat_map(|f| f.directives.iter().cloned()).collect();
        let keys = |ds: &mut dyn Iterator<Item = &Directive>| -> BTreeSet<(String, String)> {
            ds.map(|d| (d.kind().to_string(), d.key().1.to_string())).collect()
        };
        if inf.budget_exhausted
            || inf.facts != oracle.facts
            || fired != oracle.directives
            || keys(&mut inf.directives.iter()) != keys(&mut oracle.directives.iter())
        {
            mismatches += 1;
        }
        derived += usize::from(!inf.derived.is_empty());
    }
    ensure(mismatches == 0, || format!("{mismatches} of 200 instances mismatch"))?;
    Ok(format!("200 instances, 0 mismatches ({derived} derived new facts)"))
}

/// Per-axis tally straight from the questionnaire file: +1 for an answer
/// favouring the axis' first pole, -1 otherwise.
fn tally(sheet: &AnswerSheet) -> BTreeMap<String, i32> {
    let first = BTreeMap::from([
        ("processing", "active"),
        ("perception", "sensory"),
        ("input", "visual"),
        ("understanding", "sequential"),
    ]);
    let text = std::fs::read_to_string(repo("config/ils-44.txt")).unwrap();
    let mut out = BTreeMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
        let cols: Vec<&str> = line.split('|').map(str::trim).collect();
        let id: u32 = cols[0].parse().unwrap();
        let a_favours_first = first[cols[1]] == cols[2];
        let picked_a = sheet.answers[&id] == Choice::A;
        *out.entry(cols[1].to_string()).or_insert(0) += if picked_a == a_favours_first { 1 } else { -1 };
    }
    out
}

fn band(value: i32) -> Strength {
    match value.abs() {
        1 | 3 => Strength::Balanced,
        5 | 7 => Strength::Moderate,
        _ => Strength::Strong,
    }
}

fn ils_scoring() -> Outcome {
    let def = QuestionnaireDefinition::shipped();
    let all_a = score(&AnswerSheet::uniform(Choice::A), &def).map_err(|e| e.to_string())?;
    ensure(all_a.len() == 4 && all_a.iter().all(|s| s.value == 11 && s.strength == Strength::Strong), || {
        format!("all-a: {all_a:?}")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x115);
    for _ in 0..50 {
        let sheet = AnswerSheet {
            answers: (1..=ITEM_COUNT).map(|i| (i, if rng.random_bool(0.5) { Choice::A } else { Choice::B })).collect(),
        };
        let flipped = AnswerSheet { answers: sheet.answers.iter().map(|(i, c)| (*i, c.flipped())).collect() };
        let got = score(&sheet, &def).map_err(|e| e.to_string())?;
        let neg = score(&flipped, &def).map_err(|e| e.to_string())?;
        let oracle = tally(&sheet);
        for (s, n) in got.iter().zip(&neg) {
            ensure(s.axis == n.axis && s.value == -n.value && s.strength == n.strength, || format!("antisymmetry {s:?} {n:?}"))?;
            let expected = oracle[s.axis.as_str()];
            ensure(s.value == expected && s.strength == band(expected), || format!("{s:?} vs tally {expected}"))?;
        }
    }
    Ok("all-a +11 strong on 4 axes; 50 random sheets match tally and flip antisymmetrically".into())
}

fn random_value(rng: &mut ChaCha8Rng) -> Value {
    const PIECES: [&str; 10] = ["a", "Z", " ", "\"", "\\", "\n", "\r", "\t", "é", "#."];
    match rng.random_range(0..4) {
        0 => Value::Ident(random_ident(rng)),
        1 => Value::Text((0..rng.random_range(0..10)).map(|_| PIECES[rng.random_range(0..PIECES.len())]).collect()),
        2 => Value::Int(rng.random_range(i64::MIN..=i64::MAX)),
        _ => Value::Rational(Ratio::new(rng.random_range(-1000..1000), rng.random_range(1..1000))),
    }
}

fn random_ident(rng: &mut ChaCha8Rng) -> Ident {
    const CHARS: &[u8] = b"abcXYZ019_:.=-";
    let tail: String = (0..rng.random_range(0..8)).map(|_| CHARS[rng.random_range(0..CHARS.len())] as char).collect();
    Ident::new(format!("{}{tail}", ['t', 'u', 'k'][rng.random_range(0..3)])).unwrap()
}

fn fact_store_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfac7);
    for i in 0..500 {
        let fs: FactSet = (0..rng.random_range(0..25))
            .map(|_| Fact::new(random_ident(&mut rng), random_ident(&mut rng), random_value(&mut rng)))
            .collect();
        let text = serialize_facts(&fs);
        let back = parse_facts(&text).map_err(|e| format!("set {i}: {e}"))?;
        ensure(back == fs && serialize_facts(&back) == text, || format!("set {i} does not round trip"))?;
        let mut lines: Vec<&str> = text.lines().collect();
        lines.shuffle(&mut rng);
        let permuted = lines.join("\n") + "\n";
        let again = serialize_facts(&parse_facts(&permuted).map_err(|e| e.to_string())?);
        ensure(again == text, || format!("set {i} not stable under permutation"))?;
    }

    let h = Harness::new();
    let scanned = runtime().block_on(async {
        let (_, token) = h.user("sentinel.mail@example.edu").await;
        h.put_profile(&token, &fixture_profile()).await;
        h.create_unit(&token, &fixture_unit()).await;
        h.generate(&token, "web-programming").await;
        read_tree(&h.data_dir().join("users"))
    });
    let secrets = ["Sentinelname", "Sentinelsurname", "sentinel.mail@example.edu", "correct horse"];
    let leaks: Vec<&String> =
        scanned.iter().filter(|(_, b)| secrets.iter().any(|s| String::from_utf8_lossy(b).contains(s))).map(|x| x.0).collect();
    ensure(leaks.is_empty(), || format!("credential leaks in {leaks:?}"))?;
    Ok(format!("500 sets round trip and are permutation-stable; 0 leaks in {} files under users/", scanned.len()))
}

fn team_composition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ea);
    for _ in 0..200 {
        let n = rng.random_range(1..=200);
        let members: Vec<String> = (0..n).map(|i| format!("Student {:03}", i)).collect();
        let k = rng.random_range(1..=n);
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        let teams = compose_teams(&shuffled, k, 0).map_err(|e| e.to_string())?;
        let mut all: Vec<&String> = teams.iter().flat_map(|t| &t.members).collect();
        all.sort();
        ensure(all.len() == n && all.iter().zip(&members).all(|(a, b)| *a == b), || format!("not a partition ({n}, {k})"))?;
        let sizes: Vec<usize> = teams.iter().map(|t| t.members.len()).collect();
        ensure(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, || format!("unbalanced {sizes:?}"))?;
    }
    let names: Vec<String> = (0..22).map(|i| format!("s{i:02}")).collect();
    let sizes: Vec<usize> = compose_teams(&names, 5, 0).map_err(|e| e.to_string())?.iter().map(|t| t.members.len()).collect();
    ensure(sizes == [5, 5, 4, 4, 4], || format!("(22, 5) -> {sizes:?}"))?;
    let (sessions, _) = session_count(Hours::whole(26), Hours::whole(2)).map_err(|e| e.to_string())?;
    ensure(sessions == 13, || format!("(26 h, 2 h) -> {sessions}"))?;
    Ok("200 random rosters partitioned and balanced; (22,5) -> (5,5,4,4,4); (26h,2h) -> 13".into())
}

fn scenario_apportionment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa990);
    let one = Ratio::from_integer(1i128);
    let (mut feasible, mut floor_forced) = (0, 0);
    for _ in 0..100 {
        let k = rng.random_range(1..=8);
        let n = rng.random_range(k..=40);
        let weights: Vec<Ratio<i64>> =
            (0..k).map(|_| Ratio::new(rng.random_range(1..=20), rng.random_range(1..=4))).collect();
        let alloc = apportion(&weights, n).map_err(|e| e.to_string())?;
        let shares = exact_shares(&weights, n);
        ensure(alloc.iter().sum::<usize>() == n, || format!("{weights:?} {n} -> {alloc:?} does not sum"))?;
        ensure(alloc.iter().all(|&a| a >= 1), || format!("{weights:?} {n} -> {alloc:?} leaves a step empty"))?;
        let within = alloc.iter().zip(&shares).all(|(&a, q)| {
            let d = Ratio::from_integer(a as i128) - q;
            -one <= d && d <= one
        });
        // Whether any allocation with every step >= 1 can be within one seat.
        let lower: i128 = shares.iter().map(|q| (*q - one).ceil().to_integer().max(1)).sum();
        if lower <= n as i128 {
            feasible += 1;
            ensure(within, || format!("{weights:?} {n} -> {alloc:?} deviates by more than 1"))?;
        } else if !within {
            floor_forced += 1;
        }
    }
    Ok(format!(
        "100 vectors: all sum and give every step a session; within 1 of the exact share on all {feasible} vectors \
         where the one-session floor allows it; {floor_forced} vectors where the floor forces a larger deviation"
    ))
}

fn service_isolation_and_parity() -> Outcome {
    runtime().block_on(async {
        let h = Harness::new();
        let failures = common::isolation_failures(&h).await;
        ensure(failures.is_empty(), || format!("isolation: {failures:?}"))?;

        let h = Harness::new();
        let (uid, token) = h.user("jones@example.edu").await;
        h.put_profile(&token, &fixture_profile()).await;
        h.create_unit(&token, &fixture_unit()).await;
        let diffs = common::parity_failures(&h, &token, uid, "jones@example.edu", &["web-programming"]).await;
        ensure(diffs.is_empty(), || format!("CLI and HTTP bundles differ for {diffs:?}"))?;
        Ok("user B gets 404 on all 10 probes of user A's data; CLI and HTTP bundles byte-identical".into())
    })
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("Mr Jones end-to-end", mr_jones_end_to_end),
        ("Standard behaviour", standard_behaviour),
        ("Rule-engine oracle equivalence", rule_engine_oracle),
        ("ILS scoring", ils_scoring),
        ("Fact-store round trips", fact_store_round_trips),
        ("Team composition", team_composition),
        ("Scenario apportionment", scenario_apportionment),
        ("Service isolation and parity", service_isolation_and_parity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}: {reason}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
