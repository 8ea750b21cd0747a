//! Executable extended finite state machines.
//!
//! An EFSM couples a finite state machine with integer variables: transitions
//! carry an input event (which may bind input variables), a guard predicate,
//! an action (a list of assignments) and an output event. This crate loads a
//! JSON model description, compiles it into an executable in-memory machine,
//! simulates transition paths against concrete data, and generates test
//! suites that satisfy a coverage criterion while rejecting infeasible paths
//! by actually executing them.
//!
//! The pipeline mirrors the module layout:
//!
//! - [`model`] — load and validate the JSON model description.
//! - [`expr`] — tokenize and parse the expression mini-language used inside
//!   transition fields (events, guards, actions).
//! - [`machine`] — compile a document into a [`CompiledEfsm`] and simulate it:
//!   guard feasibility, transition firing with context write-back, path
//!   replay, and model introspection.
//! - [`mod@generate`] — breadth-first, coverage-directed test-suite
//!   generation with boundary-value input data.
//!
//! ```
//! use efsm_core::{load_document, CompiledEfsm};
//!
//! let doc = load_document(
//!     r#"{ "transitions": [ { "name": "t", "head_state": "a", "tail_state": "b",
//!          "input_event": "?P.go(x);", "guard": "x > 0", "action": "", "output_event": "" } ] }"#,
//! )
//! .unwrap();
//! let efsm = CompiledEfsm::compile(&doc).unwrap();
//! let sc = efsm.initial_configuration();
//! let t = efsm.transition_by_name("t").unwrap();
//! let inputs = [("x".to_string(), 1)].into_iter().collect();
//! assert!(efsm.is_feasible(t, &sc, &inputs).unwrap());
//! ```

pub mod expr;
pub mod generate;
pub mod machine;
pub mod model;
pub mod testkit;

pub use expr::{
    identifiers, parse, render_tree, tokenize, CompareOp, ExprError, ExprKind, ExprNode,
    IdentifierSets, StatementKind, Token, TokenKind,
};
pub use generate::{
    boundary_candidates, coverage_of, generate, step_inputs, CoverageCriterion, CoverageReport,
    CoverageSummary, GenerateError, GenerationOptions, TestCase, TestSuite,
};
pub use machine::{
    CompileError, CompiledEfsm, CompiledTransition, EvalError, InfoReport, InputMap, SimError,
    StateConfiguration, StepResult, TraceStep,
};
pub use model::{
    load_document, validate_document, Diagnostic, DiagnosticCode, LoadError, Location,
    ModelDocument, Severity, TransitionSpec, VariableDomain,
};
