//! The models shipped under `models/` stay loadable, valid, and generable.

use efsm_core::generate::{coverage_of, generate, CoverageCriterion, GenerationOptions};
use efsm_core::machine::CompiledEfsm;
use efsm_core::model::{load_document, validate_document};

fn bundled(name: &str) -> CompiledEfsm {
    let path = format!("{}/../../models/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let doc = load_document(&text).unwrap();
    assert_eq!(
        validate_document(&doc),
        Vec::new(),
        "{name} must validate cleanly"
    );
    CompiledEfsm::compile(&doc).unwrap()
}

#[test]
fn scp_compiles_to_the_documented_shape() {
    let efsm = bundled("scp.json");
    assert_eq!(efsm.states(), ["s1", "s2", "s3", "s4"]);
    assert_eq!(efsm.transitions().len(), 8);
    assert_eq!(efsm.initial_state(), "s1");
    let sc = efsm.initial_configuration();
    let variables: Vec<&str> = sc.values.keys().map(String::as_str).collect();
    assert_eq!(variables, ["TryCount", "ReqQos", "FinQos", "qos"]);
}

#[test]
fn vending_reaches_full_coverage_under_both_criteria() {
    let efsm = bundled("vending.json");
    assert_eq!(efsm.initial_state(), "idle");
    let sc = efsm.initial_configuration();
    let variables: Vec<&str> = sc.values.keys().map(String::as_str).collect();
    assert_eq!(variables, ["Paid", "Price", "price", "c"]);
    assert_eq!(
        efsm.input_domain("c").map(|d| (d.low, d.high)),
        Some((1, 2))
    );

    for criterion in [
        CoverageCriterion::AllStates,
        CoverageCriterion::AllTransitions,
    ] {
        let suite = generate(&efsm, &GenerationOptions::new(criterion).with_max_depth(4)).unwrap();
        assert!(!suite.exhausted, "{criterion}: {suite:?}");
        let report = coverage_of(&efsm, &suite, criterion).unwrap();
        assert_eq!(report.fraction, 1.0, "{criterion}");
    }
}

#[test]
fn vending_charges_until_paid() {
    let efsm = bundled("vending.json");
    let steps = efsm
        .simulate_path(
            &["setup", "coin", "coin", "vend"],
            &[
                [("price".to_string(), 3)].into_iter().collect(),
                [("c".to_string(), 2)].into_iter().collect(),
                [("c".to_string(), 2)].into_iter().collect(),
                Default::default(),
            ],
        )
        .unwrap();
    assert_eq!(steps[0].output.as_deref(), Some("!panel.show(3);"));
    assert_eq!(steps[2].output.as_deref(), Some("!panel.show(-1);"));
    assert_eq!(steps[3].output.as_deref(), Some("!tray.dispense(1);"));
    assert_eq!(steps[3].configuration.state, "done");
}
