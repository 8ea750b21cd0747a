//! Support code for the test suites: a deterministic RNG, a minimal
//! unparser, an independent reference evaluator, random expression trees,
//! and a corpus of small synthetic models.
//!
//! Nothing here is used by the engine itself; it exists so that unit,
//! property and acceptance tests across the workspace can share one set of
//! generators and oracles.

use crate::expr::{CompareOp, ExprKind, ExprNode};
use crate::generate::{step_inputs, CoverageCriterion};
use crate::machine::{CompiledEfsm, StateConfiguration};
use std::collections::{BTreeMap, BTreeSet};

/// SplitMix64: tiny, deterministic, seedable. Good enough for generating
/// test inputs, useless for anything else.
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }
}

/// Minimal unparser: renders a parse tree back to source text that parses to
/// a structurally identical tree. Subexpressions are fully parenthesized.
pub fn render_source(node: &ExprNode) -> String {
    match &node.kind {
        ExprKind::Empty => String::new(),
        ExprKind::InputEvent => render_event_source(node, '?'),
        ExprKind::OutputEvent => render_event_source(node, '!'),
        ExprKind::ActionList => node
            .children
            .iter()
            .map(|assignment| {
                let ExprKind::Var { name } = &assignment.children[0].kind else {
                    panic!("assignment target must be a variable");
                };
                format!("{name} = {};", render_source(&assignment.children[1]))
            })
            .collect::<Vec<_>>()
            .join(" "),
        ExprKind::IntLit { value } => value.to_string(),
        ExprKind::Var { name } => name.clone(),
        ExprKind::Neg => format!("-{}", render_source(&node.children[0])),
        ExprKind::Not => format!("!{}", render_source(&node.children[0])),
        ExprKind::Or => render_binary(node, "||"),
        ExprKind::And => render_binary(node, "&&"),
        ExprKind::Compare { op } => render_binary(node, op.symbol()),
        ExprKind::Add => render_binary(node, "+"),
        ExprKind::Sub => render_binary(node, "-"),
        ExprKind::Mul => render_binary(node, "*"),
        ExprKind::Div => render_binary(node, "/"),
        ExprKind::Mod => render_binary(node, "%"),
        other => panic!("{other:?} cannot appear in expression position"),
    }
}

fn render_binary(node: &ExprNode, op: &str) -> String {
    format!(
        "({} {op} {})",
        render_source(&node.children[0]),
        render_source(&node.children[1])
    )
}

fn render_event_source(node: &ExprNode, marker: char) -> String {
    let ExprKind::Port { name: port } = &node.children[0].kind else {
        panic!("event without a port");
    };
    let function = &node.children[1];
    let ExprKind::FunctionExpr { name } = &function.kind else {
        panic!("event without a function");
    };
    let params: Vec<String> = function.children[0]
        .children
        .iter()
        .map(render_source)
        .collect();
    format!("{marker}{port}.{name}({});", params.join(", "))
}

/// Outcome of evaluating a guard under one assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Feasible,
    Infeasible,
    Error,
}

enum RefValue {
    Int(i64),
    Bool(bool),
}

/// Independent tree-walking evaluator used as an oracle against the engine.
/// Same semantics, separate code: short-circuit `&&`/`||`, checked 64-bit
/// arithmetic, division by zero is an error.
pub fn reference_guard_outcome(node: &ExprNode, bindings: &BTreeMap<String, i64>) -> Outcome {
    match reference_eval(node, bindings) {
        Ok(RefValue::Bool(true)) => Outcome::Feasible,
        Ok(RefValue::Bool(false)) => Outcome::Infeasible,
        _ => Outcome::Error,
    }
}

fn reference_eval(node: &ExprNode, bindings: &BTreeMap<String, i64>) -> Result<RefValue, ()> {
    let int = |child: &ExprNode| match reference_eval(child, bindings) {
        Ok(RefValue::Int(v)) => Ok(v),
        _ => Err(()),
    };
    let boolean = |child: &ExprNode| match reference_eval(child, bindings) {
        Ok(RefValue::Bool(v)) => Ok(v),
        _ => Err(()),
    };
    match &node.kind {
        ExprKind::IntLit { value } => Ok(RefValue::Int(*value)),
        ExprKind::Var { name } => bindings.get(name).copied().map(RefValue::Int).ok_or(()),
        ExprKind::Add => int(&node.children[0])?
            .checked_add(int(&node.children[1])?)
            .map(RefValue::Int)
            .ok_or(()),
        ExprKind::Sub => int(&node.children[0])?
            .checked_sub(int(&node.children[1])?)
            .map(RefValue::Int)
            .ok_or(()),
        ExprKind::Mul => int(&node.children[0])?
            .checked_mul(int(&node.children[1])?)
            .map(RefValue::Int)
            .ok_or(()),
        ExprKind::Div => {
            let (l, r) = (int(&node.children[0])?, int(&node.children[1])?);
            if r == 0 {
                return Err(());
            }
            l.checked_div(r).map(RefValue::Int).ok_or(())
        }
        ExprKind::Mod => {
            let (l, r) = (int(&node.children[0])?, int(&node.children[1])?);
            if r == 0 {
                return Err(());
            }
            l.checked_rem(r).map(RefValue::Int).ok_or(())
        }
        ExprKind::Neg => int(&node.children[0])?
            .checked_neg()
            .map(RefValue::Int)
            .ok_or(()),
        ExprKind::Compare { op } => {
            let (l, r) = (int(&node.children[0])?, int(&node.children[1])?);
            Ok(RefValue::Bool(match op {
                CompareOp::Eq => l == r,
                CompareOp::Ne => l != r,
                CompareOp::Lt => l < r,
                CompareOp::Le => l <= r,
                CompareOp::Gt => l > r,
                CompareOp::Ge => l >= r,
            }))
        }
        ExprKind::And => {
            if !boolean(&node.children[0])? {
                Ok(RefValue::Bool(false))
            } else {
                Ok(RefValue::Bool(boolean(&node.children[1])?))
            }
        }
        ExprKind::Or => {
            if boolean(&node.children[0])? {
                Ok(RefValue::Bool(true))
            } else {
                Ok(RefValue::Bool(boolean(&node.children[1])?))
            }
        }
        ExprKind::Not => Ok(RefValue::Bool(!boolean(&node.children[0])?)),
        _ => Err(()),
    }
}

/// Random integer-sorted expression over `vars`. Literals stay in `0..=3` so
/// that products of small trees cannot overflow.
pub fn random_int_expr(rng: &mut Rng, vars: &[&str], depth: usize) -> ExprNode {
    if depth == 0 || rng.below(3) == 0 {
        return if vars.is_empty() || rng.below(2) == 0 {
            ExprNode::int(rng.below(4) as i64)
        } else {
            ExprNode::var(*rng.pick(vars))
        };
    }
    match rng.below(8) {
        0 | 1 => binary(ExprKind::Add, rng, vars, depth),
        2 | 3 => binary(ExprKind::Sub, rng, vars, depth),
        4 => binary(ExprKind::Mul, rng, vars, depth),
        5 => binary(ExprKind::Div, rng, vars, depth),
        6 => binary(ExprKind::Mod, rng, vars, depth),
        _ => ExprNode::new(ExprKind::Neg, vec![random_int_expr(rng, vars, depth - 1)]),
    }
}

fn binary(kind: ExprKind, rng: &mut Rng, vars: &[&str], depth: usize) -> ExprNode {
    let lhs = random_int_expr(rng, vars, depth - 1);
    let rhs = random_int_expr(rng, vars, depth - 1);
    ExprNode::new(kind, vec![lhs, rhs])
}

/// Random boolean-sorted expression (a guard) over `vars`.
pub fn random_guard(rng: &mut Rng, vars: &[&str], depth: usize) -> ExprNode {
    let compare = |rng: &mut Rng, depth: usize| {
        let op = *rng.pick(&[
            CompareOp::Eq,
            CompareOp::Ne,
            CompareOp::Lt,
            CompareOp::Le,
            CompareOp::Gt,
            CompareOp::Ge,
        ]);
        let lhs = random_int_expr(rng, vars, depth);
        let rhs = random_int_expr(rng, vars, depth);
        ExprNode::new(ExprKind::Compare { op }, vec![lhs, rhs])
    };
    if depth == 0 {
        return compare(rng, 0);
    }
    match rng.below(6) {
        0 | 1 => compare(rng, depth - 1),
        2 => {
            let lhs = random_guard(rng, vars, depth - 1);
            let rhs = random_guard(rng, vars, depth - 1);
            ExprNode::new(ExprKind::And, vec![lhs, rhs])
        }
        3 => {
            let lhs = random_guard(rng, vars, depth - 1);
            let rhs = random_guard(rng, vars, depth - 1);
            ExprNode::new(ExprKind::Or, vec![lhs, rhs])
        }
        _ => ExprNode::new(ExprKind::Not, vec![random_guard(rng, vars, depth - 1)]),
    }
}

/// Random action list: one to three assignments to `targets`, reading `vars`.
pub fn random_actions(rng: &mut Rng, targets: &[&str], vars: &[&str], depth: usize) -> ExprNode {
    let count = 1 + rng.below(3);
    let assignments = (0..count)
        .map(|_| {
            ExprNode::new(
                ExprKind::Assignment,
                vec![
                    ExprNode::var(*rng.pick(targets)),
                    random_int_expr(rng, vars, depth),
                ],
            )
        })
        .collect();
    ExprNode::new(ExprKind::ActionList, assignments)
}

/// Random input or output event. Input parameters are distinct variable
/// names drawn from `vars`; output arguments are integer expressions.
pub fn random_event(rng: &mut Rng, input: bool, vars: &[&str], depth: usize) -> ExprNode {
    let port = ExprNode::leaf(ExprKind::Port {
        name: rng.pick(&["U", "L", "P"]).to_string(),
    });
    let function = rng.pick(&["go", "send", "set", "ping"]).to_string();
    let params: Vec<ExprNode> = if input {
        let mut names: Vec<&str> = vars.to_vec();
        let count = rng.below(names.len().min(3) + 1);
        let mut picked = Vec::new();
        for _ in 0..count {
            picked.push(names.remove(rng.below(names.len())));
        }
        picked.into_iter().map(ExprNode::var).collect()
    } else {
        (0..rng.below(3))
            .map(|_| random_int_expr(rng, vars, depth))
            .collect()
    };
    let kind = if input {
        ExprKind::InputEvent
    } else {
        ExprKind::OutputEvent
    };
    ExprNode::new(
        kind,
        vec![
            port,
            ExprNode::new(
                ExprKind::FunctionExpr { name: function },
                vec![ExprNode::new(ExprKind::ParamList, params)],
            ),
        ],
    )
}

/// The bundled SCP model description.
pub fn scp_json() -> &'static str {
    include_str!("../../../models/scp.json")
}

/// Small synthetic models exercising distinct shapes: a lone self-loop, an
/// infeasible guard, a two-parameter input event, a bounded counter loop,
/// and a plain chain.
pub fn corpus() -> Vec<(&'static str, &'static str)> {
    vec![
        ("self_loop", SELF_LOOP),
        ("infeasible_guard", INFEASIBLE_GUARD),
        ("two_params", TWO_PARAMS),
        ("counter", COUNTER),
        ("chain", CHAIN),
    ]
}

const SELF_LOOP: &str = r#"{
  "transitions": [
    { "name": "spin", "head_state": "only", "tail_state": "only",
      "input_event": "", "guard": "", "action": "", "output_event": "" }
  ]
}"#;

const INFEASIBLE_GUARD: &str = r#"{
  "transitions": [
    { "name": "a", "head_state": "p1", "tail_state": "p2",
      "input_event": "", "guard": "", "action": "", "output_event": "" },
    { "name": "b", "head_state": "p2", "tail_state": "p3",
      "input_event": "?C.go(v);", "guard": "v > 10", "action": "", "output_event": "" }
  ]
}"#;

const TWO_PARAMS: &str = r#"{
  "transitions": [
    { "name": "set", "head_state": "w1", "tail_state": "w2",
      "input_event": "?P.set(a, b);", "guard": "a <= b", "action": "sum = a + b;",
      "output_event": "!P.ack(sum);" },
    { "name": "done", "head_state": "w2", "tail_state": "w3",
      "input_event": "", "guard": "sum >= 0", "action": "", "output_event": "!P.done(sum);" }
  ],
  "domains": [
    { "variable": "a", "low": 0, "high": 3 },
    { "variable": "b", "low": 0, "high": 3 }
  ]
}"#;

const COUNTER: &str = r#"{
  "transitions": [
    { "name": "inc", "head_state": "c0", "tail_state": "c0",
      "input_event": "", "guard": "n < 3", "action": "n = n + 1;", "output_event": "" },
    { "name": "exit", "head_state": "c0", "tail_state": "c1",
      "input_event": "", "guard": "n >= 2", "action": "", "output_event": "!P.at(n);" }
  ]
}"#;

const CHAIN: &str = r#"{
  "transitions": [
    { "name": "first", "head_state": "a", "tail_state": "b",
      "input_event": "", "guard": "", "action": "", "output_event": "" },
    { "name": "second", "head_state": "b", "tail_state": "c",
      "input_event": "?P.go(k);", "guard": "", "action": "", "output_event": "!P.echo(k);" }
  ],
  "domains": [ { "variable": "k", "low": -2, "high": 2 } ]
}"#;

/// Brute-force enumeration of the targets reachable within `max_depth` steps
/// under boundary data. Independent of the worklist search in `generate`:
/// plain depth-first recursion over every feasible (transition, input) pair.
pub fn reachable_targets(
    efsm: &CompiledEfsm,
    criterion: CoverageCriterion,
    max_depth: usize,
) -> BTreeSet<String> {
    let mut found = BTreeSet::new();
    if criterion == CoverageCriterion::AllStates {
        found.insert(efsm.initial_state().to_string());
    }
    let initial = efsm.initial_configuration();
    recurse(efsm, criterion, &initial, max_depth, &mut found);
    found
}

fn recurse(
    efsm: &CompiledEfsm,
    criterion: CoverageCriterion,
    configuration: &StateConfiguration,
    depth_left: usize,
    found: &mut BTreeSet<String>,
) {
    if depth_left == 0 {
        return;
    }
    for transition in efsm.outgoing(&configuration.state).expect("known state") {
        for inputs in step_inputs(efsm, transition) {
            if !efsm
                .is_feasible(transition, configuration, &inputs)
                .expect("evaluates")
            {
                continue;
            }
            let step = efsm
                .fire(transition, configuration, &inputs)
                .expect("fires");
            match criterion {
                CoverageCriterion::AllStates => {
                    found.insert(step.configuration.state.clone());
                }
                CoverageCriterion::AllTransitions => {
                    found.insert(transition.name.clone());
                }
            }
            recurse(efsm, criterion, &step.configuration, depth_left - 1, found);
        }
    }
}

/// Exhaustive assignments over `vars`, each ranging over its full inclusive
/// `low..=high` domain.
pub fn all_assignments(vars: &[(&str, i64, i64)]) -> Vec<BTreeMap<String, i64>> {
    let mut maps = vec![BTreeMap::new()];
    for (name, low, high) in vars {
        let mut extended = Vec::new();
        for map in &maps {
            for value in *low..=*high {
                let mut next = map.clone();
                next.insert(name.to_string(), value);
                extended.push(next);
            }
        }
        maps = extended;
    }
    maps
}
