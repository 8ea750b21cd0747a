//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS line (visible with `--nocapture`).
//!
//! Run with: `cargo test -p efsm-cli --test acceptance`

use efsm_core::generate::{generate, CoverageCriterion, GenerationOptions, TestSuite};
use efsm_core::machine::{CompiledEfsm, InputMap, SimError};
use efsm_core::model::{load_document, ModelDocument, TransitionSpec};
use efsm_core::testkit::{
    self, random_actions, random_event, random_guard, reference_guard_outcome, render_source,
    Outcome, Rng,
};
use efsm_core::{parse, StatementKind};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

fn scp_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models/scp.json")
}

fn scp() -> CompiledEfsm {
    CompiledEfsm::compile(&load_document(testkit::scp_json()).unwrap()).unwrap()
}

fn efsm_command() -> Command {
    Command::new(env!("CARGO_BIN_EXE_efsm"))
}

fn im(pairs: &[(&str, i64)]) -> InputMap {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// A reference case: path, data, and the expected (configuration, output)
/// per step.
type ReferenceCase = (
    &'static [&'static str],
    Vec<InputMap>,
    &'static [(&'static str, Option<&'static str>)],
);

/// Criterion 1: the three reference test cases replay with byte-exact tail
/// configurations and outputs, in under 100 ms.
#[test]
fn criterion_1_reference_replay_is_exact() {
    let efsm = scp();
    let cases: [ReferenceCase; 3] = [
        (
            &["t1", "t2", "t3"],
            vec![im(&[]), im(&[("qos", 2)]), im(&[("qos", 1)])],
            &[
                ("(s2, 0, 0, 0, 0)", None),
                ("(s2, 0, 2, 0, 2)", Some("!U.Nonsupport(2);")),
                ("(s3, 0, 1, 0, 1)", Some("!U.connect(1);")),
            ],
        ),
        (
            &["t1", "t2", "t2"],
            vec![im(&[]), im(&[("qos", 2)]), im(&[("qos", 2)])],
            &[
                ("(s2, 0, 0, 0, 0)", None),
                ("(s2, 0, 2, 0, 2)", Some("!U.Nonsupport(2);")),
                ("(s2, 0, 2, 0, 2)", Some("!U.Nonsupport(2);")),
            ],
        ),
        (
            &["t1", "t3", "t6"],
            vec![im(&[]), im(&[("qos", 0)]), im(&[])],
            &[
                ("(s2, 0, 0, 0, 0)", None),
                ("(s3, 0, 0, 0, 0)", Some("!U.connect(0);")),
                ("(s4, 0, 0, 0, 0)", Some("!U.CONcnf(0);")),
            ],
        ),
    ];

    let started = Instant::now();
    for (path, data, expected) in &cases {
        let steps = efsm.simulate_path(path, data).unwrap();
        for (step, (configuration, output)) in steps.iter().zip(*expected) {
            assert_eq!(step.configuration.to_string(), *configuration);
            assert_eq!(step.output.as_deref(), *output);
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_millis() < 100, "replay took {elapsed:?}");
    println!("criterion 1: PASS — all three reference cases replay exactly in {elapsed:?}");
}

/// Criterion 2: generation with all-states at depth 3 reaches 4/4 states
/// with at most 4 replay-feasible cases, in under a second.
#[test]
fn criterion_2_generation_covers_all_states() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("suite.json");
    let started = Instant::now();
    let status = efsm_command()
        .args(["generate", "--criterion", "all-states", "--max-depth", "3"])
        .arg(scp_path())
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    let elapsed = started.elapsed();
    assert!(status.success());
    assert!(elapsed.as_millis() < 1000, "generation took {elapsed:?}");

    let suite: TestSuite = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(suite.coverage.covered, ["s1", "s2", "s3", "s4"]);
    assert_eq!(suite.coverage.total, 4);
    assert!(
        suite.cases.len() <= 4,
        "suite has {} cases",
        suite.cases.len()
    );
    let efsm = scp();
    for case in &suite.cases {
        efsm.simulate_path(&case.path, &case.data)
            .expect("case replays");
    }
    println!(
        "criterion 2: PASS — 4/4 states, {} cases, all replay-feasible, {elapsed:?}",
        suite.cases.len()
    );
}

/// Criterion 3: the parse tree rendering matches the checked-in golden file
/// and contains the expected nodes in order.
#[test]
fn criterion_3_parse_tree_matches_golden() {
    let output = efsm_command()
        .args(["parse", "--kind", "input-event", "?U.connect(ReqQos);"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout, include_str!("golden/parse_input_event.golden"));

    let positions: Vec<usize> = [
        "input_event",
        "Port U",
        "function_expr connect",
        "param ReqQos",
    ]
    .iter()
    .map(|needle| {
        stdout
            .find(needle)
            .unwrap_or_else(|| panic!("missing {needle}"))
    })
    .collect();
    assert!(
        positions.windows(2).all(|w| w[0] < w[1]),
        "nodes out of order"
    );
    println!("criterion 3: PASS — golden rendering matches");
}

/// Criterion 4: on 1000 random guards over three variables with four-value
/// domains, is_feasible agrees with the independent reference evaluator on
/// every exhaustive assignment.
#[test]
fn criterion_4_guard_oracle_equivalence() {
    let assignments = testkit::all_assignments(&[("a", 0, 3), ("b", 0, 3), ("c", 0, 3)]);
    let mut guards = 0usize;
    let mut evaluations = 0usize;
    for seed in 0..1000u64 {
        let mut rng = Rng::new(seed);
        let guard = random_guard(&mut rng, &["a", "b", "c"], 3);
        let doc = ModelDocument {
            transitions: vec![TransitionSpec {
                name: "t".into(),
                head_state: "s1".into(),
                tail_state: "s2".into(),
                input_event: "?P.chk(a, b, c);".into(),
                guard: render_source(&guard),
                action: String::new(),
                output_event: String::new(),
            }],
            domains: vec![],
            variables: vec![],
            initial_state: None,
        };
        let efsm = CompiledEfsm::compile(&doc).unwrap();
        let transition = efsm.transition_by_name("t").unwrap();
        let sc = efsm.initial_configuration();
        for assignment in &assignments {
            let expected = reference_guard_outcome(&guard, assignment);
            let actual = match efsm.is_feasible(transition, &sc, assignment) {
                Ok(true) => Outcome::Feasible,
                Ok(false) => Outcome::Infeasible,
                Err(_) => Outcome::Error,
            };
            assert_eq!(
                actual,
                expected,
                "guard {} disagrees under {assignment:?}",
                render_source(&guard)
            );
            evaluations += 1;
        }
        guards += 1;
    }
    assert!(guards >= 1000);
    println!("criterion 4: PASS — {guards} guards, {evaluations} evaluations, 0 disagreements");
}

/// Criterion 5: every generated case across the model corpus replays without
/// GuardViolated; a corrupted data map raises GuardViolated at the right step.
#[test]
fn criterion_5_generated_suites_replay_soundly() {
    let mut models: Vec<(String, ModelDocument)> =
        vec![("scp".into(), load_document(testkit::scp_json()).unwrap())];
    for (name, text) in testkit::corpus() {
        models.push((name.into(), load_document(text).unwrap()));
    }
    assert!(models.len() >= 5);

    let mut cases_checked = 0usize;
    for (name, doc) in &models {
        let efsm = CompiledEfsm::compile(doc).unwrap();
        for criterion in [
            CoverageCriterion::AllStates,
            CoverageCriterion::AllTransitions,
        ] {
            let options = GenerationOptions::new(criterion).with_max_depth(4);
            let suite =
                generate(&efsm, &options).unwrap_or_else(|e| panic!("{name}/{criterion}: {e}"));
            for case in &suite.cases {
                let outcome = efsm.simulate_path(&case.path, &case.data);
                assert!(
                    !matches!(outcome, Err(SimError::GuardViolated { .. })),
                    "{name}: case {:?} violated a guard",
                    case.path
                );
                outcome.unwrap_or_else(|e| panic!("{name}: case {:?}: {e}", case.path));
                cases_checked += 1;
            }
        }
    }

    // Corrupt the second step of the negotiation case: qos=0 fails t2's
    // guard (qos > 1) at zero-based step 1.
    let efsm = scp();
    let error = efsm
        .simulate_path(
            &["t1", "t2", "t3"],
            &[im(&[]), im(&[("qos", 0)]), im(&[("qos", 1)])],
        )
        .unwrap_err();
    assert_eq!(
        error,
        SimError::GuardViolated {
            step: Some(1),
            transition: "t2".into()
        }
    );
    println!(
        "criterion 5: PASS — {} models, {cases_checked} cases replay; corruption detected at step 1",
        models.len()
    );
}

/// Criterion 6: two identical generate runs write byte-identical files.
#[test]
fn criterion_6_generation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    for out in [&first, &second] {
        let status = efsm_command()
            .args([
                "generate",
                "--criterion",
                "all-transitions",
                "--max-depth",
                "4",
            ])
            .arg(scp_path())
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(&first).unwrap();
    let b = std::fs::read(&second).unwrap();
    assert_eq!(a, b, "suite files differ between runs");
    assert!(!a.is_empty());
    println!("criterion 6: PASS — {} identical bytes", a.len());
}

/// Criterion 7: a depth-1 search honestly reports 2/4 coverage and
/// exhaustion, and --strict turns that into exit code 3.
#[test]
fn criterion_7_bounded_search_is_honest() {
    let efsm = scp();
    let options = GenerationOptions::new(CoverageCriterion::AllStates).with_max_depth(1);
    let suite = generate(&efsm, &options).unwrap();
    assert_eq!(suite.coverage.covered, ["s1", "s2"]);
    assert_eq!(suite.coverage.total, 4);
    assert!(suite.exhausted);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("suite.json");
    let output = efsm_command()
        .args([
            "generate",
            "--criterion",
            "all-states",
            "--max-depth",
            "1",
            "--strict",
        ])
        .arg(scp_path())
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("2/4"), "summary missing 2/4: {stdout}");
    println!("criterion 7: PASS — 2/4, exhausted, exit code 3 under --strict");
}

/// Criterion 8: parse ∘ unparse is the identity on 1000 random trees.
#[test]
fn criterion_8_expression_round_trip() {
    let mut trees = 0usize;
    for seed in 0..250u64 {
        let mut rng = Rng::new(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1));
        let samples = [
            (
                StatementKind::Guard,
                random_guard(&mut rng, &["a", "b", "x", "y"], 3),
            ),
            (
                StatementKind::ActionList,
                random_actions(&mut rng, &["a", "b"], &["a", "b", "x", "y"], 3),
            ),
            (
                StatementKind::InputEvent,
                random_event(&mut rng, true, &["x", "y"], 1),
            ),
            (
                StatementKind::OutputEvent,
                random_event(&mut rng, false, &["a", "x"], 2),
            ),
        ];
        for (kind, tree) in samples {
            let source = render_source(&tree);
            let reparsed = parse(kind, &source)
                .unwrap_or_else(|e| panic!("{kind}: `{source}` fails to reparse: {e}"));
            assert_eq!(reparsed, tree, "`{source}` changed shape");
            trees += 1;
        }
    }
    assert!(trees >= 1000);
    println!("criterion 8: PASS — {trees} trees round-trip");
}
