//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::{BTreeSet, VecDeque};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use stratcheck_core::bench::{generate_benchmark, BenchmarkParams};
use stratcheck_core::bisim::{check_a_bisimulation, BisimOptions, CandidateRelation};
use stratcheck_core::corpus::{corpus, CorpusItem, CorpusParams};
use stratcheck_core::por::{build_reduced_model, C3Mode, ReductionParams};
use stratcheck_core::verify::{
    certificate, fixpoint_lower, fixpoint_upper, verify_approx, verify_bruteforce, verify_dfs, Limits, Truth,
};
use stratcheck_core::{build_global_model, AgentId, Amas, Formula, GlobalModel};

use stratcheck_cli::ops;

const CORPUS_SIZE: usize = 1000;
const CORPUS_SEED: u64 = 1;

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixtures_dir().join(name)).unwrap()
}

fn model_fixtures() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "stv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn build(text: &str) -> GlobalModel {
    build_global_model(Arc::new(Amas::parse(text).unwrap())).unwrap()
}

fn file_formula(model: &GlobalModel, text: &str) -> Option<Formula> {
    let doc = stratcheck_core::spec_lang::parse_spec(text).unwrap();
    doc.formula.map(|f| model.amas().resolve_formula(&f).unwrap())
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (t < limit, format!("{} ms, limit {} s", t.as_millis(), limit.as_secs()))
}

type Step = (String, String, String);

/// TGC semantics written out by hand: the controller alternates G/R and
/// synchronizes entering (`x1`) and leaving (`x2`) with each train, which
/// then returns to waiting with the private `x3`.
fn tgc_oracle() -> (BTreeSet<String>, BTreeSet<Step>) {
    type S = (char, char, char);
    let fmt = |s: S| format!("({},{},{})", s.0, s.1, s.2);
    let next = |s: S| -> Vec<(&'static str, S)> {
        let mut out = Vec::new();
        let (c, t1, t2) = s;
        if c == 'G' && t1 == 'W' {
            out.push(("a1", ('R', 'T', t2)));
        }
        if c == 'G' && t2 == 'W' {
            out.push(("b1", ('R', t1, 'T')));
        }
        if c == 'R' && t1 == 'T' {
            out.push(("a2", ('G', 'A', t2)));
        }
        if c == 'R' && t2 == 'T' {
            out.push(("b2", ('G', t1, 'A')));
        }
        if t1 == 'A' {
            out.push(("a3", (c, 'W', t2)));
        }
        if t2 == 'A' {
            out.push(("b3", (c, t1, 'W')));
        }
        out
    };
    let mut seen = BTreeSet::new();
    let mut steps = BTreeSet::new();
    let mut queue = VecDeque::from([('G', 'W', 'W')]);
    seen.insert(('G', 'W', 'W'));
    while let Some(s) = queue.pop_front() {
        for (a, t) in next(s) {
            steps.insert((fmt(s), a.to_string(), fmt(t)));
            if seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    (seen.into_iter().map(fmt).collect(), steps)
}

fn model_sets(m: &GlobalModel) -> (BTreeSet<String>, BTreeSet<Step>) {
    let states = m.states().map(|s| m.describe(s)).collect();
    let steps = m
        .edges()
        .iter()
        .map(|e| (m.describe(e.src), m.label_name(e.label).to_string(), m.describe(e.dst)))
        .collect();
    (states, steps)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let m = build(&fixture("tgc.stv"));
    let (time_ok, t) = within(start, Duration::from_secs(1));
    let (states, steps) = model_sets(&m);
    let (o_states, o_steps) = tgc_oracle();
    let pass = m.num_states() == 8 && m.num_edges() == 14 && states == o_states && steps == o_steps && time_ok;
    outcome(pass, format!("{} states, {} edges, {t}", m.num_states(), m.num_edges()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let amas = Arc::new(Amas::parse(&fixture("tgc.stv")).unwrap());
    let controller = vec![amas.agent_id("Controller").unwrap()];
    let reduce = |c3| {
        let params = ReductionParams::new(&amas, controller.clone(), Vec::new(), c3);
        build_reduced_model(amas.clone(), &params).unwrap().model
    };
    let aggressive = reduce(C3Mode::Aggressive);
    let safe = reduce(C3Mode::Safe);
    let (time_ok, t) = within(start, Duration::from_secs(1));
    // Highlighted part of the figure.
    let blue_states: BTreeSet<String> = ["(G,W,W)", "(R,T,W)", "(R,W,T)", "(G,A,W)", "(G,W,A)"]
        .into_iter()
        .map(String::from)
        .collect();
    let blue_steps: BTreeSet<Step> = [
        ("(G,W,W)", "a1", "(R,T,W)"),
        ("(G,W,W)", "b1", "(R,W,T)"),
        ("(R,T,W)", "a2", "(G,A,W)"),
        ("(R,W,T)", "b2", "(G,W,A)"),
        ("(G,A,W)", "a3", "(G,W,W)"),
        ("(G,W,A)", "b3", "(G,W,W)"),
    ]
    .into_iter()
    .map(|(a, b, c)| (a.into(), b.into(), c.into()))
    .collect();
    let (states, steps) = model_sets(&aggressive);
    let pass = states == blue_states && steps == blue_steps && safe.num_states() == 8 && time_ok;
    outcome(
        pass,
        format!(
            "aggressive {} states / {} edges, safe {} states, {t}",
            aggressive.num_states(),
            aggressive.num_edges(),
            safe.num_states()
        ),
    )
}

fn criterion_3(items: &[CorpusItem]) -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut bad = Vec::new();
    for item in items {
        let full = build_global_model(item.amas.clone()).unwrap();
        for f in [&item.eventually, &item.always] {
            let params = ReductionParams::for_formula(&item.amas, f, C3Mode::Safe);
            let reduced = build_reduced_model(item.amas.clone(), &params).unwrap().model;
            let a = verify_bruteforce(&full, f, Limits::default()).unwrap().truth;
            let b = verify_bruteforce(&reduced, f, Limits::default()).unwrap().truth;
            checked += 1;
            if a != b {
                bad.push(item.seed);
            }
        }
    }
    let (time_ok, t) = within(start, Duration::from_secs(300));
    outcome(
        bad.is_empty() && time_ok && items.len() >= 200,
        format!("{} models, {checked} formulas, {} discrepancies {bad:?}, {t}", items.len(), bad.len()),
    )
}

/// Every corpus formula plus the formula of every model fixture.
fn all_instances(items: &[CorpusItem]) -> Vec<(String, GlobalModel, Vec<Formula>)> {
    let mut out = Vec::new();
    for item in items {
        let m = build_global_model(item.amas.clone()).unwrap();
        let fs = item.formulas().into_iter().cloned().collect();
        out.push((format!("seed {}", item.seed), m, fs));
    }
    for (name, text) in model_fixtures() {
        let m = build(&text);
        let fs = file_formula(&m, &text).into_iter().collect();
        out.push((name, m, fs));
    }
    out
}

fn criterion_4(instances: &[(String, GlobalModel, Vec<Formula>)]) -> Outcome {
    let start = Instant::now();
    let mut violations = Vec::new();
    let mut total = 0;
    let mut inconclusive = 0;
    for (name, m, fs) in instances {
        for f in fs {
            total += 1;
            let lower = fixpoint_lower(m, f);
            let upper = fixpoint_upper(m, f);
            let exact = verify_bruteforce(m, f, Limits::default()).unwrap().truth == Truth::True;
            if (lower && !exact) || (exact && !upper) {
                violations.push(name.clone());
            }
            if lower != upper {
                inconclusive += 1;
            }
        }
    }
    let pinned: Vec<String> = ["guess.stv", "fuzz_inconclusive.stv"]
        .into_iter()
        .filter(|name| {
            let text = fixture(name);
            let m = build(&text);
            let f = file_formula(&m, &text).unwrap();
            verify_approx(&m, &f, Limits::default()).unwrap().truth == Truth::Inconclusive
        })
        .map(String::from)
        .collect();
    let (time_ok, t) = within(start, Duration::from_secs(300));
    outcome(
        violations.is_empty() && !pinned.is_empty() && time_ok,
        format!(
            "{total} formulas, {} violations, {inconclusive} inconclusive, pinned inconclusive: {}, {t}",
            violations.len(),
            pinned.join(" ")
        ),
    )
}

fn criterion_5(instances: &[(String, GlobalModel, Vec<Formula>)]) -> Outcome {
    let start = Instant::now();
    let mut total = 0;
    let mut disagreements = Vec::new();
    let mut certified = 0;
    let mut rejected = Vec::new();
    for (name, m, fs) in instances {
        for f in fs {
            total += 1;
            let b = verify_bruteforce(m, f, Limits::default()).unwrap();
            let d = verify_dfs(m, f, Limits::default()).unwrap();
            let a = verify_approx(m, f, Limits::default()).unwrap();
            if b.truth != d.truth {
                disagreements.push(name.clone());
            }
            for r in [&b, &d, &a] {
                if let Some(s) = &r.strategy {
                    if certificate::check(m, f, s) {
                        certified += 1;
                    } else {
                        rejected.push(format!("{name} ({})", r.method));
                    }
                }
            }
        }
    }
    let (time_ok, t) = within(start, Duration::from_secs(300));
    outcome(
        disagreements.is_empty() && rejected.is_empty() && time_ok,
        format!(
            "{total} formulas, {} disagreements, {certified} strategies certified, {} rejected, {t}",
            disagreements.len(),
            rejected.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut identity_runs = 0;
    let mut identity_failures = Vec::new();
    for (name, text) in model_fixtures() {
        let m = build(&text);
        let n = m.amas().agents.len();
        for mask in 0u32..1 << n {
            let coalition: Vec<AgentId> = (0..n).filter(|i| mask >> i & 1 == 1).map(AgentId).collect();
            let rel = CandidateRelation::identity(&m, &coalition);
            identity_runs += 1;
            if !check_a_bisimulation(&m, &m, &rel, BisimOptions::default()).ok() {
                identity_failures.push(format!("{name}/{mask:b}"));
            }
        }
    }
    let run = |left: &str, right: &str, rel: &str| {
        ops::run_bisim(
            (left, &fixture(left)),
            (right, &fixture(right)),
            (rel, &fixture(rel)),
            None,
            false,
        )
        .unwrap()
        .verdict
    };
    let expected = [
        ("tgc.stv", "tgc.stv", "identity.rel", serde_json::json!({"ok": true})),
        (
            "tgc.stv",
            "tgc_stripped.stv",
            "stripped.rel",
            serde_json::json!({"ok": false, "condition": "valuation", "direction": "L2R",
                               "pair": ["(R,T,W)", "(R,T,W)"], "detail": "in1"}),
        ),
        (
            "tgc.stv",
            "tgc.stv",
            "dropped_pair.rel",
            serde_json::json!({"ok": false, "condition": "epistemic", "direction": "L2R",
                               "pair": ["(G,W,W)", "(G,W,W)"], "detail": "(G,A,A)"}),
        ),
        (
            "tgc.stv",
            "tgc.stv",
            "missing_initial.rel",
            serde_json::json!({"ok": false, "condition": "initial", "direction": "L2R",
                               "pair": ["(G,W,W)", "(G,W,W)"], "detail": "initial pair missing"}),
        ),
    ];
    let mut wrong = Vec::new();
    for (l, r, rel, want) in &expected {
        let got = run(l, r, rel);
        if &got != want {
            wrong.push(format!("{rel}: {got}"));
        }
    }
    let fixtures_time = start.elapsed();

    let big = build(&generate_benchmark(BenchmarkParams { n: 4 }).unwrap());
    let controller = vec![big.amas().agent_id("Controller").unwrap()];
    let t4 = Instant::now();
    let big_ok = check_a_bisimulation(&big, &big, &CandidateRelation::identity(&big, &controller), BisimOptions::default()).ok();
    let (time_ok, t) = within(t4, Duration::from_secs(10));
    outcome(
        identity_failures.is_empty() && wrong.is_empty() && big_ok && time_ok,
        format!(
            "{identity_runs} identity checks, {} failed; violation fixtures {}; fixtures {} ms; TGC(4) identity ({} states) {}, {t}",
            identity_failures.len(),
            if wrong.is_empty() { "as designed".to_string() } else { wrong.join("; ") },
            fixtures_time.as_millis(),
            big.num_states(),
            if big_ok { "ok" } else { "rejected" }
        ),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let amas = Arc::new(Amas::parse(&generate_benchmark(BenchmarkParams { n: 3 }).unwrap()).unwrap());
    let full = build_global_model(amas.clone()).unwrap();
    let doc = stratcheck_core::spec_lang::parse_spec(&generate_benchmark(BenchmarkParams { n: 3 }).unwrap()).unwrap();
    let f = amas.resolve_formula(&doc.formula.unwrap()).unwrap();
    // Safe C3 expands every state of TGC(3); the plain cycle proviso reduces.
    let safe = build_reduced_model(amas.clone(), &ReductionParams::for_formula(&amas, &f, C3Mode::Safe))
        .unwrap()
        .model;
    let reduced = build_reduced_model(amas.clone(), &ReductionParams::for_formula(&amas, &f, C3Mode::Aggressive))
        .unwrap()
        .model;
    let limits = Limits::with_timeout(Duration::from_secs(60));
    let on_reduced = verify_bruteforce(&reduced, &f, limits).map(|r| r.truth);
    let on_full = verify_bruteforce(&full, &f, limits).map(|r| r.truth);
    let (time_ok, t) = within(start, Duration::from_secs(60));
    let ratio = reduced.num_states() as f64 / full.num_states() as f64;
    // Regression values from the first run.
    let pinned = (full.num_states(), full.num_edges(), safe.num_states(), reduced.num_states(), reduced.num_edges())
        == (20, 48, 20, 7, 9);
    let pass = ratio < 1.0 && time_ok && pinned && on_reduced == Ok(Truth::True) && on_full == Ok(Truth::True);
    outcome(
        pass,
        format!(
            "full {} / {}, reduced (aggressive) {} / {}, safe {} states, ratio {ratio:.2}, truth {:?}, {t}",
            full.num_states(),
            full.num_edges(),
            reduced.num_states(),
            reduced.num_edges(),
            safe.num_states(),
            on_reduced
        ),
    )
}

fn cli(args: &[&str]) -> (Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_stratcheck"))
        .args(args)
        .current_dir(fixtures_dir())
        .output()
        .unwrap();
    (out.stdout, out.status.code())
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut runs: Vec<Vec<String>> = Vec::new();
    let owned = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    for (name, _) in model_fixtures() {
        for method in ["bruteforce", "approx", "dfs"] {
            runs.push(owned(&["verify", &name, "--method", method]));
            runs.push(owned(&["verify", &name, "--method", method, "--por"]));
        }
        for c3 in ["safe", "aggressive"] {
            runs.push(owned(&["reduce", &name, "--c3", c3]));
            runs.push(owned(&["reduce", &name, "--c3", c3, "--format", "json"]));
            runs.push(owned(&["reduce", &name, "--c3", c3, "--format", "dot"]));
            runs.push(owned(&["export", &name, "--por", "--c3", c3, "--format", "json"]));
        }
        runs.push(owned(&["export", &name, "--format", "dot"]));
        runs.push(owned(&["export", &name, "--format", "json"]));
    }
    for rel in ["identity.rel", "missing_initial.rel", "dropped_pair.rel"] {
        runs.push(owned(&["bisim", "tgc.stv", "tgc.stv", rel]));
        runs.push(owned(&["bisim", "tgc.stv", "tgc.stv", rel, "--strict-bisim"]));
    }
    runs.push(owned(&["bisim", "tgc.stv", "tgc_stripped.stv", "stripped.rel"]));
    for n in ["1", "2", "3"] {
        runs.push(owned(&["bench", n]));
        runs.push(owned(&["bench", n, "--verify", "--method", "dfs"]));
    }
    let mut differing = Vec::new();
    for args in &runs {
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = cli(&a);
        let second = cli(&a);
        if first != second || first.0.is_empty() {
            differing.push(args.join(" "));
        }
    }
    let t = start.elapsed();
    outcome(
        differing.is_empty(),
        format!(
            "{} commands run twice, {} differ {differing:?}, {} ms",
            runs.len(),
            differing.len(),
            t.as_millis()
        ),
    )
}

fn main() {
    // `cargo test` passes harness flags; listing must not run the suite.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let items = corpus(CORPUS_SEED, CORPUS_SIZE, &CorpusParams::default());
    let instances = all_instances(&items);
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("TGC golden model", Box::new(criterion_1)),
        ("TGC reduction", Box::new(criterion_2)),
        ("POR preservation", Box::new(|| criterion_3(&items))),
        ("approximation sandwich", Box::new(|| criterion_4(&instances))),
        ("engine agreement and certificates", Box::new(|| criterion_5(&instances))),
        ("bisimulation checker", Box::new(criterion_6)),
        ("scaling smoke test", Box::new(criterion_7)),
        ("determinism", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {} ({name}): {} [{}]", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
