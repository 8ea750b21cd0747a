//! Compilation of a model document into an executable machine, and its
//! simulation semantics.
//!
//! Compilation parses the four expression fields of every transition,
//! extracts the variable table (identifiers declared by input events are
//! input variables, everything else referenced is a context variable,
//! initialized to 0), and builds an adjacency matrix of transitions indexed
//! by head and tail state.
//!
//! Simulation is value-based: a [`StateConfiguration`] is never mutated in
//! place, so callers can branch a search from any configuration. Firing a
//! transition overlays the consumed inputs, executes the assignments left to
//! right (each immediately visible to the next), renders the output event
//! against the post-action values, and moves to the tail state. Input
//! variables keep their last received value in the configuration.

use crate::expr::{
    identifiers, input_parameters, parse, ExprError, ExprKind, ExprNode, StatementKind,
};
use crate::model::{validate_document, Diagnostic, ModelDocument, Severity, VariableDomain};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Concrete input data for one step: values for the consumed parameters.
pub type InputMap = BTreeMap<String, i64>;

/// One transition of the compiled machine, with parsed fields and
/// precomputed def/use sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledTransition {
    pub name: String,
    pub head: String,
    pub tail: String,
    pub input_event: ExprNode,
    pub guard: ExprNode,
    pub actions: ExprNode,
    pub output_event: ExprNode,
    /// Parameters declared by the input event, in declaration order.
    pub input_params: Vec<String>,
    /// Variables assigned by the actions.
    pub defs: BTreeSet<String>,
    /// Variables read in actions or output event.
    pub c_uses: BTreeSet<String>,
    /// Variables read in the guard.
    pub p_uses: BTreeSet<String>,
}

impl CompiledTransition {
    /// The precomputed `(defs, c_uses, p_uses)` sets.
    pub fn def_use(&self) -> (&BTreeSet<String>, &BTreeSet<String>, &BTreeSet<String>) {
        (&self.defs, &self.c_uses, &self.p_uses)
    }
}

/// Current state plus one value per variable, context variables first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateConfiguration {
    pub state: String,
    pub values: IndexMap<String, i64>,
}

impl fmt::Display for StateConfiguration {
    /// Tuple form, e.g. `(s2, 0, 2, 0, 2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.state)?;
        for value in self.values.values() {
            write!(f, ", {value}")?;
        }
        write!(f, ")")
    }
}

/// Result of firing one transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub configuration: StateConfiguration,
    /// Rendered output event with argument values substituted,
    /// e.g. `!U.connect(1);`, or `None` when the transition has no output.
    pub output: Option<String>,
}

/// One serializable step of a trace: the transition taken, the tail
/// configuration, and the rendered output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub transition: String,
    pub configuration: StateConfiguration,
    pub output: Option<String>,
}

impl TraceStep {
    /// Pairs transition names with their step results.
    pub fn zip<S: AsRef<str>>(path: &[S], steps: Vec<StepResult>) -> Vec<TraceStep> {
        path.iter()
            .zip(steps)
            .map(|(name, step)| TraceStep {
                transition: name.as_ref().to_string(),
                configuration: step.configuration,
                output: step.output,
            })
            .collect()
    }
}

/// Expression evaluation failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("type error: {0}")]
    Type(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("undefined variable `{0}`")]
    UndefinedVariable(String),
}

/// Compilation failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("document failed validation: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidDocument(Vec<Diagnostic>),
    #[error("transition `{transition}`, {field}: {source}")]
    ExpressionSyntax {
        transition: String,
        field: StatementKind,
        source: ExprError,
    },
    #[error("variable `{name}` {detail}")]
    VariableClash { name: String, detail: String },
    #[error("domain declared for `{0}`, which is not an input variable")]
    UnknownDomainVariable(String),
    #[error("variable `{0}` listed more than once")]
    DuplicateVariable(String),
}

/// Simulation failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("step {step}: transition `{transition}` has head state `{expected}`, but the current state is `{actual}`")]
    NonAdjacent {
        step: usize,
        transition: String,
        expected: String,
        actual: String,
    },
    #[error("guard of `{transition}` violated{}", .step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    GuardViolated {
        step: Option<usize>,
        transition: String,
    },
    #[error(
        "transition `{transition}` fires from `{expected}`, but the configuration is at `{actual}`"
    )]
    HeadStateMismatch {
        transition: String,
        expected: String,
        actual: String,
    },
    #[error("transition `{transition}` consumes inputs [{}], but [{}] were provided", expected.join(", "), provided.join(", "))]
    InputMismatch {
        transition: String,
        expected: Vec<String>,
        provided: Vec<String>,
    },
    #[error("path has {path_len} steps but data has {data_len} input maps")]
    DataLengthMismatch { path_len: usize, data_len: usize },
    #[error("evaluating {field} of `{transition}`{}: {source}", .step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    Eval {
        transition: String,
        field: StatementKind,
        step: Option<usize>,
        source: EvalError,
    },
}

impl SimError {
    fn with_step(self, index: usize) -> SimError {
        match self {
            SimError::GuardViolated {
                step: None,
                transition,
            } => SimError::GuardViolated {
                step: Some(index),
                transition,
            },
            SimError::Eval {
                transition,
                field,
                step: None,
                source,
            } => SimError::Eval {
                transition,
                field,
                step: Some(index),
                source,
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    Int(i64),
    Bool(bool),
}

fn eval(node: &ExprNode, lookup: &dyn Fn(&str) -> Option<i64>) -> Result<Value, EvalError> {
    match &node.kind {
        ExprKind::IntLit { value } => Ok(Value::Int(*value)),
        ExprKind::Var { name } => lookup(name)
            .map(Value::Int)
            .ok_or_else(|| EvalError::UndefinedVariable(name.clone())),
        ExprKind::Add => arith(node, lookup, i64::checked_add),
        ExprKind::Sub => arith(node, lookup, i64::checked_sub),
        ExprKind::Mul => arith(node, lookup, i64::checked_mul),
        ExprKind::Div => divide(node, lookup, i64::checked_div),
        ExprKind::Mod => divide(node, lookup, i64::checked_rem),
        ExprKind::Neg => {
            let value = eval_int(&node.children[0], lookup)?;
            value
                .checked_neg()
                .map(Value::Int)
                .ok_or(EvalError::Overflow)
        }
        ExprKind::Compare { op } => {
            let lhs = eval_int(&node.children[0], lookup)?;
            let rhs = eval_int(&node.children[1], lookup)?;
            Ok(Value::Bool(match op {
                crate::expr::CompareOp::Eq => lhs == rhs,
                crate::expr::CompareOp::Ne => lhs != rhs,
                crate::expr::CompareOp::Lt => lhs < rhs,
                crate::expr::CompareOp::Le => lhs <= rhs,
                crate::expr::CompareOp::Gt => lhs > rhs,
                crate::expr::CompareOp::Ge => lhs >= rhs,
            }))
        }
        // && and || are C-style: the right operand is only evaluated when
        // the left one has not already decided the result.
        ExprKind::And => {
            if !eval_bool(&node.children[0], lookup)? {
                return Ok(Value::Bool(false));
            }
            Ok(Value::Bool(eval_bool(&node.children[1], lookup)?))
        }
        ExprKind::Or => {
            if eval_bool(&node.children[0], lookup)? {
                return Ok(Value::Bool(true));
            }
            Ok(Value::Bool(eval_bool(&node.children[1], lookup)?))
        }
        ExprKind::Not => Ok(Value::Bool(!eval_bool(&node.children[0], lookup)?)),
        other => Err(EvalError::Type(format!("{other:?} has no value"))),
    }
}

fn arith(
    node: &ExprNode,
    lookup: &dyn Fn(&str) -> Option<i64>,
    op: fn(i64, i64) -> Option<i64>,
) -> Result<Value, EvalError> {
    let lhs = eval_int(&node.children[0], lookup)?;
    let rhs = eval_int(&node.children[1], lookup)?;
    op(lhs, rhs).map(Value::Int).ok_or(EvalError::Overflow)
}

fn divide(
    node: &ExprNode,
    lookup: &dyn Fn(&str) -> Option<i64>,
    op: fn(i64, i64) -> Option<i64>,
) -> Result<Value, EvalError> {
    let lhs = eval_int(&node.children[0], lookup)?;
    let rhs = eval_int(&node.children[1], lookup)?;
    if rhs == 0 {
        return Err(EvalError::DivisionByZero);
    }
    op(lhs, rhs).map(Value::Int).ok_or(EvalError::Overflow)
}

fn eval_int(node: &ExprNode, lookup: &dyn Fn(&str) -> Option<i64>) -> Result<i64, EvalError> {
    match eval(node, lookup)? {
        Value::Int(v) => Ok(v),
        Value::Bool(_) => Err(EvalError::Type(
            "expected an integer, found a boolean".into(),
        )),
    }
}

fn eval_bool(node: &ExprNode, lookup: &dyn Fn(&str) -> Option<i64>) -> Result<bool, EvalError> {
    match eval(node, lookup)? {
        Value::Bool(v) => Ok(v),
        Value::Int(_) => Err(EvalError::Type(
            "expected a boolean, found an integer".into(),
        )),
    }
}

/// Variable kind in the variable table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableKind {
    Context,
    Input,
}

impl fmt::Display for VariableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariableKind::Context => write!(f, "context"),
            VariableKind::Input => write!(f, "input"),
        }
    }
}

/// Inclusive bounds of an input variable's domain, as reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainBounds {
    pub low: i64,
    pub high: i64,
}

/// `transitions` entry of an [`InfoReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionInfo {
    pub name: String,
    pub head: String,
    pub tail: String,
}

/// `variables` entry of an [`InfoReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableInfo {
    pub name: String,
    pub kind: VariableKind,
    pub initial: i64,
    pub domain: Option<DomainBounds>,
}

/// `def_use` entry of an [`InfoReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefUseInfo {
    pub transition: String,
    pub defs: Vec<String>,
    pub c_uses: Vec<String>,
    pub p_uses: Vec<String>,
}

/// Serializable summary of a compiled machine: states, transitions, the
/// variable table, and per-transition def/use sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoReport {
    pub state_count: usize,
    pub states: Vec<String>,
    pub transition_count: usize,
    pub transitions: Vec<TransitionInfo>,
    pub variables: Vec<VariableInfo>,
    pub def_use: Vec<DefUseInfo>,
}

const DEFAULT_DOMAIN: (i64, i64) = (0, 2);

/// An executable machine. Immutable after compilation; simulation state
/// lives entirely in [`StateConfiguration`] values owned by the caller.
#[derive(Debug, Clone)]
pub struct CompiledEfsm {
    states: Vec<String>,
    initial_state: String,
    transitions: Vec<CompiledTransition>,
    /// `adjacency[head][tail]` holds the indices of the transitions from
    /// `states[head]` to `states[tail]`, in declaration order.
    adjacency: Vec<Vec<Vec<usize>>>,
    context_vars: Vec<(String, i64)>,
    input_vars: Vec<(String, VariableDomain)>,
}

impl CompiledEfsm {
    /// Compiles a validated document into an executable machine.
    ///
    /// The document is re-validated first; error-severity diagnostics abort
    /// compilation.
    pub fn compile(doc: &ModelDocument) -> Result<CompiledEfsm, CompileError> {
        let diagnostics = validate_document(doc);
        if diagnostics.iter().any(|d| d.severity == Severity::Error) {
            return Err(CompileError::InvalidDocument(diagnostics));
        }

        let parse_field = |name: &str, field: StatementKind, text: &str| {
            parse(field, text).map_err(|source| CompileError::ExpressionSyntax {
                transition: name.to_string(),
                field,
                source,
            })
        };

        struct Parsed {
            input_event: ExprNode,
            guard: ExprNode,
            actions: ExprNode,
            output_event: ExprNode,
            input_params: Vec<String>,
        }
        let mut parsed = Vec::with_capacity(doc.transitions.len());
        for spec in &doc.transitions {
            let input_event =
                parse_field(&spec.name, StatementKind::InputEvent, &spec.input_event)?;
            let guard = parse_field(&spec.name, StatementKind::Guard, &spec.guard)?;
            let actions = parse_field(&spec.name, StatementKind::ActionList, &spec.action)?;
            let output_event =
                parse_field(&spec.name, StatementKind::OutputEvent, &spec.output_event)?;
            let input_params = input_parameters(&input_event);
            parsed.push(Parsed {
                input_event,
                guard,
                actions,
                output_event,
                input_params,
            });
        }

        // Variable table. Input variables come from input-event parameter
        // declarations; every other referenced identifier is a context
        // variable. The optional `variables` section fixes the leading
        // context-variable order; unlisted ones follow in first-mention
        // order (guard, action, output event; file order across transitions).
        let mut input_names: Vec<String> = Vec::new();
        for p in &parsed {
            for param in &p.input_params {
                if !input_names.contains(param) {
                    input_names.push(param.clone());
                }
            }
        }

        let mut context_names: Vec<String> = Vec::new();
        for name in &doc.variables {
            if context_names.contains(name) {
                return Err(CompileError::DuplicateVariable(name.clone()));
            }
            if input_names.contains(name) {
                return Err(CompileError::VariableClash {
                    name: name.clone(),
                    detail: "is listed as a context variable but declared by an input event".into(),
                });
            }
            context_names.push(name.clone());
        }
        for p in &parsed {
            for tree in [&p.guard, &p.actions, &p.output_event] {
                let mut mentions = Vec::new();
                ordered_var_mentions(tree, &mut mentions);
                for name in mentions {
                    if !input_names.contains(&name) && !context_names.contains(&name) {
                        context_names.push(name);
                    }
                }
            }
        }

        for (spec, p) in doc.transitions.iter().zip(&parsed) {
            let sets = identifiers(&p.actions);
            for assigned in &sets.assigned {
                if input_names.contains(assigned) {
                    return Err(CompileError::VariableClash {
                        name: assigned.clone(),
                        detail: format!(
                            "is declared by an input event and assigned by the action of `{}`",
                            spec.name
                        ),
                    });
                }
            }
        }

        let mut declared_domains: BTreeMap<&str, &VariableDomain> = BTreeMap::new();
        for domain in &doc.domains {
            if !input_names.contains(&domain.variable) {
                return Err(CompileError::UnknownDomainVariable(domain.variable.clone()));
            }
            declared_domains.insert(&domain.variable, domain);
        }
        let input_vars: Vec<(String, VariableDomain)> = input_names
            .iter()
            .map(|name| {
                let domain = declared_domains
                    .get(name.as_str())
                    .map(|d| (*d).clone())
                    .unwrap_or(VariableDomain {
                        variable: name.clone(),
                        low: DEFAULT_DOMAIN.0,
                        high: DEFAULT_DOMAIN.1,
                    });
                (name.clone(), domain)
            })
            .collect();
        let context_vars: Vec<(String, i64)> =
            context_names.into_iter().map(|name| (name, 0)).collect();

        // States in first-appearance order, then the adjacency matrix.
        let mut states: Vec<String> = Vec::new();
        for spec in &doc.transitions {
            for state in [&spec.head_state, &spec.tail_state] {
                if !states.contains(state) {
                    states.push(state.clone());
                }
            }
        }
        let state_index = |state: &str| states.iter().position(|s| s == state).unwrap();
        let mut adjacency = vec![vec![Vec::new(); states.len()]; states.len()];
        for (index, spec) in doc.transitions.iter().enumerate() {
            adjacency[state_index(&spec.head_state)][state_index(&spec.tail_state)].push(index);
        }

        let initial_state = match &doc.initial_state {
            Some(state) => state.clone(),
            None => {
                if doc.transitions.iter().any(|t| t.head_state == "s1") {
                    "s1".to_string()
                } else {
                    doc.transitions[0].head_state.clone()
                }
            }
        };

        let transitions = doc
            .transitions
            .iter()
            .zip(parsed)
            .map(|(spec, p)| {
                let guard_ids = identifiers(&p.guard);
                let action_ids = identifiers(&p.actions);
                let output_ids = identifiers(&p.output_event);
                let mut c_uses = action_ids.used;
                c_uses.extend(output_ids.used);
                CompiledTransition {
                    name: spec.name.clone(),
                    head: spec.head_state.clone(),
                    tail: spec.tail_state.clone(),
                    input_event: p.input_event,
                    guard: p.guard,
                    actions: p.actions,
                    output_event: p.output_event,
                    input_params: p.input_params,
                    defs: action_ids.assigned,
                    c_uses,
                    p_uses: guard_ids.used,
                }
            })
            .collect();

        Ok(CompiledEfsm {
            states,
            initial_state,
            transitions,
            adjacency,
            context_vars,
            input_vars,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial_state(&self) -> &str {
        &self.initial_state
    }

    pub fn transitions(&self) -> &[CompiledTransition] {
        &self.transitions
    }

    pub fn transition_by_name(&self, name: &str) -> Option<&CompiledTransition> {
        self.transitions.iter().find(|t| t.name == name)
    }

    /// Context variables with their initial values, in table order.
    pub fn context_vars(&self) -> &[(String, i64)] {
        &self.context_vars
    }

    /// Input variables with their domains, in table order.
    pub fn input_vars(&self) -> &[(String, VariableDomain)] {
        &self.input_vars
    }

    pub fn input_domain(&self, name: &str) -> Option<&VariableDomain> {
        self.input_vars
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, d)| d)
    }

    /// The transitions from `head` to `tail`, in declaration order.
    pub fn adjacent(&self, head: &str, tail: &str) -> Vec<&CompiledTransition> {
        let (Some(h), Some(t)) = (
            self.states.iter().position(|s| s == head),
            self.states.iter().position(|s| s == tail),
        ) else {
            return Vec::new();
        };
        self.adjacency[h][t]
            .iter()
            .map(|&i| &self.transitions[i])
            .collect()
    }

    /// The initial configuration: the initial state with every variable at
    /// its initial value (0). Declared domains do not affect initial values.
    pub fn initial_configuration(&self) -> StateConfiguration {
        let mut values = IndexMap::new();
        for (name, initial) in &self.context_vars {
            values.insert(name.clone(), *initial);
        }
        for (name, _) in &self.input_vars {
            values.insert(name.clone(), 0);
        }
        StateConfiguration {
            state: self.initial_state.clone(),
            values,
        }
    }

    pub(crate) fn outgoing_indices(&self, state: &str) -> Result<Vec<usize>, SimError> {
        let index = self
            .states
            .iter()
            .position(|s| s == state)
            .ok_or_else(|| SimError::UnknownState(state.to_string()))?;
        let mut indices: Vec<usize> = self.adjacency[index].iter().flatten().copied().collect();
        // Cells are visited per tail state; restore declaration order.
        indices.sort_unstable();
        Ok(indices)
    }

    /// All transitions whose head is `state`, in declaration order.
    pub fn outgoing(&self, state: &str) -> Result<Vec<&CompiledTransition>, SimError> {
        Ok(self
            .outgoing_indices(state)?
            .into_iter()
            .map(|i| &self.transitions[i])
            .collect())
    }

    fn check_inputs(
        &self,
        transition: &CompiledTransition,
        inputs: &InputMap,
    ) -> Result<(), SimError> {
        let mut expected: Vec<&String> = transition.input_params.iter().collect();
        expected.sort();
        let provided: Vec<&String> = inputs.keys().collect();
        if expected != provided {
            return Err(SimError::InputMismatch {
                transition: transition.name.clone(),
                expected: transition.input_params.clone(),
                provided: inputs.keys().cloned().collect(),
            });
        }
        Ok(())
    }

    /// Evaluates the transition's guard at `sc` with `inputs` overlaid.
    ///
    /// An empty guard is always true. The configuration is not mutated, and
    /// a guard whose evaluation fails is an error, never `false`.
    pub fn is_feasible(
        &self,
        transition: &CompiledTransition,
        sc: &StateConfiguration,
        inputs: &InputMap,
    ) -> Result<bool, SimError> {
        if sc.state != transition.head {
            return Err(SimError::HeadStateMismatch {
                transition: transition.name.clone(),
                expected: transition.head.clone(),
                actual: sc.state.clone(),
            });
        }
        self.check_inputs(transition, inputs)?;
        if transition.guard.is_empty() {
            return Ok(true);
        }
        let lookup = |name: &str| {
            inputs
                .get(name)
                .copied()
                .or_else(|| sc.values.get(name).copied())
        };
        match eval(&transition.guard, &lookup) {
            Ok(Value::Bool(b)) => Ok(b),
            Ok(Value::Int(_)) => Err(SimError::Eval {
                transition: transition.name.clone(),
                field: StatementKind::Guard,
                step: None,
                source: EvalError::Type("guard evaluated to an integer".into()),
            }),
            Err(source) => Err(SimError::Eval {
                transition: transition.name.clone(),
                field: StatementKind::Guard,
                step: None,
                source,
            }),
        }
    }

    /// Fires a feasible transition from `sc` and returns the tail
    /// configuration and rendered output.
    ///
    /// Order of effects: inputs are overlaid, assignments run left to right
    /// with immediate visibility, output arguments are evaluated against the
    /// post-action values, and the state moves from head to tail. The input
    /// configuration is left untouched.
    pub fn fire(
        &self,
        transition: &CompiledTransition,
        sc: &StateConfiguration,
        inputs: &InputMap,
    ) -> Result<StepResult, SimError> {
        if !self.is_feasible(transition, sc, inputs)? {
            return Err(SimError::GuardViolated {
                step: None,
                transition: transition.name.clone(),
            });
        }
        let mut values = sc.values.clone();
        for (name, value) in inputs {
            values.insert(name.clone(), *value);
        }
        let eval_step = |field: StatementKind, source: EvalError| SimError::Eval {
            transition: transition.name.clone(),
            field,
            step: None,
            source,
        };
        if !transition.actions.is_empty() {
            for assignment in &transition.actions.children {
                let ExprKind::Var { name: target } = &assignment.children[0].kind else {
                    unreachable!("assignment targets are variables by construction");
                };
                let value = eval_int(&assignment.children[1], &|name| values.get(name).copied())
                    .map_err(|e| eval_step(StatementKind::ActionList, e))?;
                values.insert(target.clone(), value);
            }
        }
        let output = if transition.output_event.is_empty() {
            None
        } else {
            Some(
                render_event(&transition.output_event, &|name| values.get(name).copied())
                    .map_err(|e| eval_step(StatementKind::OutputEvent, e))?,
            )
        };
        Ok(StepResult {
            configuration: StateConfiguration {
                state: transition.tail.clone(),
                values,
            },
            output,
        })
    }

    /// Replays a transition path with per-step input data from the initial
    /// configuration and returns the full trace.
    ///
    /// Fails with `NonAdjacent` when a step's head state does not match the
    /// current state and with `GuardViolated` when a step is infeasible
    /// under the given data; both carry the zero-based step index.
    pub fn simulate_path<S: AsRef<str>>(
        &self,
        path: &[S],
        data: &[InputMap],
    ) -> Result<Vec<StepResult>, SimError> {
        if path.len() != data.len() {
            return Err(SimError::DataLengthMismatch {
                path_len: path.len(),
                data_len: data.len(),
            });
        }
        let mut configuration = self.initial_configuration();
        let mut steps = Vec::with_capacity(path.len());
        for (index, name) in path.iter().enumerate() {
            let transition = self
                .transition_by_name(name.as_ref())
                .ok_or_else(|| SimError::UnknownTransition(name.as_ref().to_string()))?;
            if configuration.state != transition.head {
                return Err(SimError::NonAdjacent {
                    step: index,
                    transition: transition.name.clone(),
                    expected: transition.head.clone(),
                    actual: configuration.state.clone(),
                });
            }
            if !self
                .is_feasible(transition, &configuration, &data[index])
                .map_err(|e| e.with_step(index))?
            {
                return Err(SimError::GuardViolated {
                    step: Some(index),
                    transition: transition.name.clone(),
                });
            }
            let step = self
                .fire(transition, &configuration, &data[index])
                .map_err(|e| e.with_step(index))?;
            configuration = step.configuration.clone();
            steps.push(step);
        }
        Ok(steps)
    }

    /// Summarizes the machine: states, transitions, variable table, and
    /// per-transition def/use sets.
    pub fn model_info(&self) -> InfoReport {
        let mut variables = Vec::new();
        for (name, initial) in &self.context_vars {
            variables.push(VariableInfo {
                name: name.clone(),
                kind: VariableKind::Context,
                initial: *initial,
                domain: None,
            });
        }
        for (name, domain) in &self.input_vars {
            variables.push(VariableInfo {
                name: name.clone(),
                kind: VariableKind::Input,
                initial: 0,
                domain: Some(DomainBounds {
                    low: domain.low,
                    high: domain.high,
                }),
            });
        }
        InfoReport {
            state_count: self.states.len(),
            states: self.states.clone(),
            transition_count: self.transitions.len(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionInfo {
                    name: t.name.clone(),
                    head: t.head.clone(),
                    tail: t.tail.clone(),
                })
                .collect(),
            variables,
            def_use: self
                .transitions
                .iter()
                .map(|t| DefUseInfo {
                    transition: t.name.clone(),
                    defs: t.defs.iter().cloned().collect(),
                    c_uses: t.c_uses.iter().cloned().collect(),
                    p_uses: t.p_uses.iter().cloned().collect(),
                })
                .collect(),
        }
    }
}

fn ordered_var_mentions(node: &ExprNode, out: &mut Vec<String>) {
    if let ExprKind::Var { name } = &node.kind {
        out.push(name.clone());
    }
    for child in &node.children {
        ordered_var_mentions(child, out);
    }
}

fn render_event(
    event: &ExprNode,
    lookup: &dyn Fn(&str) -> Option<i64>,
) -> Result<String, EvalError> {
    let marker = match event.kind {
        ExprKind::OutputEvent => '!',
        ExprKind::InputEvent => '?',
        _ => return Err(EvalError::Type("not an event".into())),
    };
    let ExprKind::Port { name: port } = &event.children[0].kind else {
        return Err(EvalError::Type("event without a port".into()));
    };
    let function = &event.children[1];
    let ExprKind::FunctionExpr {
        name: function_name,
    } = &function.kind
    else {
        return Err(EvalError::Type("event without a function".into()));
    };
    let mut arguments = Vec::new();
    for param in &function.children[0].children {
        arguments.push(eval_int(param, lookup)?.to_string());
    }
    Ok(format!(
        "{marker}{port}.{function_name}({});",
        arguments.join(", ")
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_document;

    fn scp() -> CompiledEfsm {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../models/scp.json"
        ))
        .expect("bundled SCP model");
        CompiledEfsm::compile(&load_document(&text).unwrap()).unwrap()
    }

    fn doc(text: &str) -> ModelDocument {
        load_document(text).unwrap()
    }

    fn inputs(pairs: &[(&str, i64)]) -> InputMap {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn compiles_the_bundled_scp_model() {
        let efsm = scp();
        assert_eq!(efsm.states(), ["s1", "s2", "s3", "s4"]);
        assert_eq!(efsm.transitions().len(), 8);
        assert_eq!(
            efsm.context_vars(),
            [
                ("TryCount".to_string(), 0),
                ("ReqQos".to_string(), 0),
                ("FinQos".to_string(), 0)
            ]
        );
        assert_eq!(efsm.input_vars().len(), 1);
        assert_eq!(efsm.input_vars()[0].0, "qos");
    }

    #[test]
    fn compiles_a_single_empty_transition() {
        let efsm = CompiledEfsm::compile(&doc(
            r#"{ "transitions": [ { "name": "t", "head_state": "s1", "tail_state": "s1",
                 "input_event": "", "guard": "", "action": "", "output_event": "" } ] }"#,
        ))
        .unwrap();
        assert_eq!(efsm.states(), ["s1"]);
        assert_eq!(efsm.transitions().len(), 1);
        assert!(efsm.context_vars().is_empty());
        assert!(efsm.input_vars().is_empty());
    }

    #[test]
    fn unassigned_guard_variable_becomes_context_with_zero() {
        let efsm = CompiledEfsm::compile(&doc(
            r#"{ "transitions": [ { "name": "t", "head_state": "s1", "tail_state": "s2",
                 "input_event": "", "guard": "w == 0", "action": "", "output_event": "" } ] }"#,
        ))
        .unwrap();
        assert_eq!(efsm.context_vars(), [("w".to_string(), 0)]);
        let t = efsm.transition_by_name("t").unwrap();
        let sc = efsm.initial_configuration();
        assert_eq!(efsm.is_feasible(t, &sc, &InputMap::new()), Ok(true));
    }

    #[test]
    fn input_variable_assigned_by_action_is_a_clash() {
        let error = CompiledEfsm::compile(&doc(
            r#"{ "transitions": [ { "name": "t", "head_state": "s1", "tail_state": "s2",
                 "input_event": "?P.f(x);", "guard": "", "action": "x = 1;", "output_event": "" } ] }"#,
        ))
        .unwrap_err();
        assert!(matches!(error, CompileError::VariableClash { name, .. } if name == "x"));
    }

    #[test]
    fn domain_for_non_input_variable_is_rejected() {
        let error = CompiledEfsm::compile(&doc(
            r#"{ "transitions": [ { "name": "t", "head_state": "s1", "tail_state": "s2",
                 "input_event": "", "guard": "", "action": "y = 1;", "output_event": "" } ],
                 "domains": [ { "variable": "y", "low": 0, "high": 1 } ] }"#,
        ))
        .unwrap_err();
        assert_eq!(error, CompileError::UnknownDomainVariable("y".into()));
    }

    #[test]
    fn syntax_errors_carry_transition_field_and_offset() {
        let error = CompiledEfsm::compile(&doc(
            r#"{ "transitions": [ { "name": "t", "head_state": "s1", "tail_state": "s2",
                 "input_event": "", "guard": "qos ==", "action": "", "output_event": "" } ] }"#,
        ))
        .unwrap_err();
        match error {
            CompileError::ExpressionSyntax {
                transition,
                field,
                source,
            } => {
                assert_eq!(transition, "t");
                assert_eq!(field, StatementKind::Guard);
                assert!(matches!(source, ExprError::Syntax { offset: 6, .. }));
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn initial_configuration_is_all_zeros() {
        let efsm = scp();
        let sc = efsm.initial_configuration();
        assert_eq!(sc.to_string(), "(s1, 0, 0, 0, 0)");
        assert_eq!(
            sc.values.keys().collect::<Vec<_>>(),
            ["TryCount", "ReqQos", "FinQos", "qos"]
        );
    }

    #[test]
    fn domains_do_not_affect_initial_values() {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../models/scp.json"
        ))
        .unwrap();
        let mut document = load_document(&text).unwrap();
        document.domains = vec![VariableDomain {
            variable: "qos".into(),
            low: 0,
            high: 5,
        }];
        let efsm = CompiledEfsm::compile(&document).unwrap();
        assert_eq!(efsm.initial_configuration().to_string(), "(s1, 0, 0, 0, 0)");
        assert_eq!(efsm.input_domain("qos"), Some(&document.domains[0]));
    }

    #[test]
    fn initial_state_defaults_to_s1_then_first_head() {
        let efsm = CompiledEfsm::compile(&doc(r#"{ "transitions": [
                { "name": "a", "head_state": "start", "tail_state": "s1",
                  "input_event": "", "guard": "", "action": "", "output_event": "" } ] }"#))
        .unwrap();
        // `s1` exists only as a tail state, so the first head wins.
        assert_eq!(efsm.initial_state(), "start");
    }

    #[test]
    fn outgoing_respects_declaration_order() {
        let efsm = scp();
        let names = |state: &str| {
            efsm.outgoing(state)
                .unwrap()
                .iter()
                .map(|t| t.name.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(names("s1"), ["t1"]);
        assert_eq!(names("s2"), ["t2", "t3"]);
        assert_eq!(
            efsm.outgoing("s4")
                .unwrap()
                .iter()
                .map(|t| t.name.as_str())
                .collect::<Vec<_>>(),
            ["t7"]
        );
        assert_eq!(
            efsm.outgoing("nowhere"),
            Err(SimError::UnknownState("nowhere".into()))
        );
    }

    #[test]
    fn state_with_no_outgoing_transitions() {
        let efsm = CompiledEfsm::compile(&doc(
            r#"{ "transitions": [ { "name": "t", "head_state": "s1", "tail_state": "s2",
                 "input_event": "", "guard": "", "action": "", "output_event": "" } ] }"#,
        ))
        .unwrap();
        assert!(efsm.outgoing("s2").unwrap().is_empty());
    }

    #[test]
    fn adjacency_cells_hold_exact_transition_sets() {
        let efsm = scp();
        for head in efsm.states() {
            for tail in efsm.states() {
                let cell: Vec<&str> = efsm
                    .adjacent(head, tail)
                    .iter()
                    .map(|t| t.name.as_str())
                    .collect();
                let expected: Vec<&str> = efsm
                    .transitions()
                    .iter()
                    .filter(|t| &t.head == head && &t.tail == tail)
                    .map(|t| t.name.as_str())
                    .collect();
                assert_eq!(cell, expected, "cell ({head}, {tail})");
            }
        }
    }

    #[test]
    fn t3_feasibility_depends_on_qos() {
        let efsm = scp();
        let t3 = efsm.transition_by_name("t3").unwrap();
        let sc = StateConfiguration {
            state: "s2".into(),
            values: efsm.initial_configuration().values,
        };
        assert_eq!(efsm.is_feasible(t3, &sc, &inputs(&[("qos", 1)])), Ok(true));
        assert_eq!(efsm.is_feasible(t3, &sc, &inputs(&[("qos", 2)])), Ok(false));
    }

    #[test]
    fn empty_guard_is_always_feasible() {
        let efsm = scp();
        let t1 = efsm.transition_by_name("t1").unwrap();
        let sc = efsm.initial_configuration();
        assert_eq!(efsm.is_feasible(t1, &sc, &InputMap::new()), Ok(true));
    }

    #[test]
    fn head_state_mismatch_is_an_error() {
        let efsm = scp();
        let t3 = efsm.transition_by_name("t3").unwrap();
        let sc = efsm.initial_configuration();
        assert!(matches!(
            efsm.is_feasible(t3, &sc, &inputs(&[("qos", 1)])),
            Err(SimError::HeadStateMismatch { .. })
        ));
    }

    #[test]
    fn inputs_must_bind_exactly_the_declared_parameters() {
        let efsm = scp();
        let t1 = efsm.transition_by_name("t1").unwrap();
        let sc = efsm.initial_configuration();
        assert!(matches!(
            efsm.is_feasible(t1, &sc, &inputs(&[("qos", 1)])),
            Err(SimError::InputMismatch { .. })
        ));
        let t2 = efsm.transition_by_name("t2").unwrap();
        let sc2 = StateConfiguration {
            state: "s2".into(),
            values: sc.values.clone(),
        };
        assert!(matches!(
            efsm.is_feasible(t2, &sc2, &InputMap::new()),
            Err(SimError::InputMismatch { .. })
        ));
    }

    #[test]
    fn is_feasible_does_not_mutate_the_configuration() {
        let efsm = scp();
        let t3 = efsm.transition_by_name("t3").unwrap();
        let sc = StateConfiguration {
            state: "s2".into(),
            values: efsm.initial_configuration().values,
        };
        let before = sc.clone();
        for _ in 0..3 {
            assert_eq!(efsm.is_feasible(t3, &sc, &inputs(&[("qos", 1)])), Ok(true));
        }
        assert_eq!(sc, before);
    }

    #[test]
    fn firing_t3_updates_context_and_renders_output() {
        let efsm = scp();
        let t3 = efsm.transition_by_name("t3").unwrap();
        let sc = StateConfiguration {
            state: "s2".into(),
            values: efsm.initial_configuration().values,
        };
        let step = efsm.fire(t3, &sc, &inputs(&[("qos", 1)])).unwrap();
        assert_eq!(step.configuration.to_string(), "(s3, 0, 1, 0, 1)");
        assert_eq!(step.output.as_deref(), Some("!U.connect(1);"));
        // The input configuration is untouched.
        assert_eq!(sc.to_string(), "(s2, 0, 0, 0, 0)");
    }

    #[test]
    fn firing_t2_shows_post_action_output_values() {
        let efsm = scp();
        let t2 = efsm.transition_by_name("t2").unwrap();
        let sc = StateConfiguration {
            state: "s2".into(),
            values: efsm.initial_configuration().values,
        };
        let step = efsm.fire(t2, &sc, &inputs(&[("qos", 2)])).unwrap();
        assert_eq!(step.configuration.to_string(), "(s2, 0, 2, 0, 2)");
        assert_eq!(step.output.as_deref(), Some("!U.Nonsupport(2);"));
    }

    #[test]
    fn firing_t1_produces_no_output() {
        let efsm = scp();
        let t1 = efsm.transition_by_name("t1").unwrap();
        let step = efsm
            .fire(t1, &efsm.initial_configuration(), &InputMap::new())
            .unwrap();
        assert_eq!(step.configuration.to_string(), "(s2, 0, 0, 0, 0)");
        assert_eq!(step.output, None);
    }

    #[test]
    fn fire_rejects_a_violated_guard() {
        let efsm = scp();
        let t2 = efsm.transition_by_name("t2").unwrap();
        let sc = StateConfiguration {
            state: "s2".into(),
            values: efsm.initial_configuration().values,
        };
        assert_eq!(
            efsm.fire(t2, &sc, &inputs(&[("qos", 0)])),
            Err(SimError::GuardViolated {
                step: None,
                transition: "t2".into()
            })
        );
    }

    #[test]
    fn fire_changes_nothing_outside_defs() {
        let efsm = scp();
        let t3 = efsm.transition_by_name("t3").unwrap();
        let sc = StateConfiguration {
            state: "s2".into(),
            values: efsm.initial_configuration().values,
        };
        let step = efsm.fire(t3, &sc, &inputs(&[("qos", 1)])).unwrap();
        for (name, value) in &step.configuration.values {
            if !t3.defs.contains(name) && !t3.input_params.contains(name) {
                assert_eq!(value, sc.values.get(name).unwrap(), "{name} changed");
            }
        }
        assert_eq!(step.configuration.state, t3.tail);
    }

    #[test]
    fn simulate_path_replays_the_negotiation_sequence() {
        let efsm = scp();
        let steps = efsm
            .simulate_path(
                &["t1", "t2", "t3"],
                &[
                    InputMap::new(),
                    inputs(&[("qos", 2)]),
                    inputs(&[("qos", 1)]),
                ],
            )
            .unwrap();
        let rendered: Vec<(String, Option<&str>)> = steps
            .iter()
            .map(|s| (s.configuration.to_string(), s.output.as_deref()))
            .collect();
        assert_eq!(
            rendered,
            vec![
                ("(s2, 0, 0, 0, 0)".to_string(), None),
                ("(s2, 0, 2, 0, 2)".to_string(), Some("!U.Nonsupport(2);")),
                ("(s3, 0, 1, 0, 1)".to_string(), Some("!U.connect(1);")),
            ]
        );
    }

    #[test]
    fn simulate_path_replays_the_confirm_case() {
        let efsm = scp();
        let steps = efsm
            .simulate_path(
                &["t1", "t3", "t6"],
                &[InputMap::new(), inputs(&[("qos", 0)]), InputMap::new()],
            )
            .unwrap();
        let last = steps.last().unwrap();
        assert_eq!(last.configuration.to_string(), "(s4, 0, 0, 0, 0)");
        assert_eq!(last.output.as_deref(), Some("!U.CONcnf(0);"));
    }

    #[test]
    fn non_adjacent_first_step_is_reported_at_index_zero() {
        let efsm = scp();
        let error = efsm
            .simulate_path(&["t3"], &[inputs(&[("qos", 1)])])
            .unwrap_err();
        assert!(
            matches!(error, SimError::NonAdjacent { step: 0, .. }),
            "got {error:?}"
        );
    }

    #[test]
    fn violated_guard_mid_path_carries_its_step() {
        let efsm = scp();
        let error = efsm
            .simulate_path(&["t1", "t3"], &[InputMap::new(), inputs(&[("qos", 2)])])
            .unwrap_err();
        assert_eq!(
            error,
            SimError::GuardViolated {
                step: Some(1),
                transition: "t3".into()
            }
        );
    }

    #[test]
    fn unknown_transition_name_is_rejected() {
        let efsm = scp();
        assert_eq!(
            efsm.simulate_path(&["bogus"], &[InputMap::new()]),
            Err(SimError::UnknownTransition("bogus".into()))
        );
    }

    #[test]
    fn empty_path_yields_an_empty_trace() {
        let efsm = scp();
        let path: [&str; 0] = [];
        assert_eq!(efsm.simulate_path(&path, &[]), Ok(Vec::new()));
    }

    #[test]
    fn traces_compose() {
        let efsm = scp();
        let data = [
            InputMap::new(),
            inputs(&[("qos", 2)]),
            inputs(&[("qos", 1)]),
        ];
        let full = efsm.simulate_path(&["t1", "t2", "t3"], &data).unwrap();
        let prefix = efsm.simulate_path(&["t1", "t2"], &data[..2]).unwrap();
        assert_eq!(full[..2], prefix[..]);
        let t3 = efsm.transition_by_name("t3").unwrap();
        let resumed = efsm
            .fire(t3, &prefix.last().unwrap().configuration, &data[2])
            .unwrap();
        assert_eq!(full[2], resumed);
    }

    #[test]
    fn def_use_sets_for_scp() {
        let efsm = scp();
        let set = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        let t2 = efsm.transition_by_name("t2").unwrap();
        assert_eq!(
            t2.def_use(),
            (&set(&["ReqQos"]), &set(&["qos", "ReqQos"]), &set(&["qos"]))
        );
        let t3 = efsm.transition_by_name("t3").unwrap();
        assert_eq!(t3.p_uses, set(&["qos"]));
        let t1 = efsm.transition_by_name("t1").unwrap();
        assert_eq!(t1.def_use(), (&set(&[]), &set(&[]), &set(&[])));
    }

    #[test]
    fn model_info_reports_table_contents() {
        let efsm = scp();
        let info = efsm.model_info();
        assert_eq!(info.state_count, 4);
        assert_eq!(info.transition_count, 8);
        let context = info
            .variables
            .iter()
            .filter(|v| v.kind == VariableKind::Context)
            .count();
        let input: Vec<&VariableInfo> = info
            .variables
            .iter()
            .filter(|v| v.kind == VariableKind::Input)
            .collect();
        assert_eq!(context, 3);
        assert_eq!(input.len(), 1);
        assert_eq!(input[0].name, "qos");
        assert_eq!(input[0].domain, Some(DomainBounds { low: 0, high: 2 }));
        assert!(info.variables.iter().all(|v| v.initial == 0));
    }

    #[test]
    fn model_info_serializes_with_stable_keys() {
        let efsm = scp();
        let json = serde_json::to_string_pretty(&efsm.model_info()).unwrap();
        let back: InfoReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, efsm.model_info());
        let first = json.find("\"state_count\"").unwrap();
        let second = json.find("\"states\"").unwrap();
        assert!(first < second);
    }

    #[test]
    fn empty_variable_table_for_variable_free_model() {
        let efsm = CompiledEfsm::compile(&doc(
            r#"{ "transitions": [ { "name": "t", "head_state": "s1", "tail_state": "s1",
                 "input_event": "", "guard": "", "action": "", "output_event": "" } ] }"#,
        ))
        .unwrap();
        assert!(efsm.model_info().variables.is_empty());
        assert_eq!(efsm.initial_configuration().to_string(), "(s1)");
    }

    #[test]
    fn division_by_zero_in_a_guard_is_an_error_not_false() {
        let efsm = CompiledEfsm::compile(&doc(
            r#"{ "transitions": [ { "name": "t", "head_state": "s1", "tail_state": "s2",
                 "input_event": "?P.f(x);", "guard": "10 / x > 2", "action": "", "output_event": "" } ] }"#,
        ))
        .unwrap();
        let t = efsm.transition_by_name("t").unwrap();
        let sc = efsm.initial_configuration();
        assert_eq!(efsm.is_feasible(t, &sc, &inputs(&[("x", 3)])), Ok(true));
        assert!(matches!(
            efsm.is_feasible(t, &sc, &inputs(&[("x", 0)])),
            Err(SimError::Eval {
                source: EvalError::DivisionByZero,
                ..
            })
        ));
    }

    #[test]
    fn short_circuit_skips_the_right_operand() {
        let efsm = CompiledEfsm::compile(&doc(
            r#"{ "transitions": [ { "name": "t", "head_state": "s1", "tail_state": "s2",
                 "input_event": "?P.f(x);", "guard": "x != 0 && 10 / x > 2", "action": "", "output_event": "" } ] }"#,
        ))
        .unwrap();
        let t = efsm.transition_by_name("t").unwrap();
        let sc = efsm.initial_configuration();
        assert_eq!(efsm.is_feasible(t, &sc, &inputs(&[("x", 0)])), Ok(false));
        assert_eq!(efsm.is_feasible(t, &sc, &inputs(&[("x", 4)])), Ok(false));
        assert_eq!(efsm.is_feasible(t, &sc, &inputs(&[("x", 1)])), Ok(true));
    }

    #[test]
    fn division_truncates_toward_zero_and_mod_follows_dividend() {
        let efsm = CompiledEfsm::compile(&doc(
            r#"{ "transitions": [ { "name": "t", "head_state": "s1", "tail_state": "s2",
                 "input_event": "?P.f(x);", "guard": "x / 2 == 0 - 3 && x % 2 == 0 - 1", "action": "", "output_event": "" } ] }"#,
        ))
        .unwrap();
        let t = efsm.transition_by_name("t").unwrap();
        let sc = efsm.initial_configuration();
        // -7 / 2 == -3 (toward zero), -7 % 2 == -1 (sign of the dividend).
        assert_eq!(efsm.is_feasible(t, &sc, &inputs(&[("x", -7)])), Ok(true));
    }

    #[test]
    fn sticky_inputs_persist_until_overwritten() {
        let efsm = scp();
        let steps = efsm
            .simulate_path(
                &["t1", "t2", "t2"],
                &[
                    InputMap::new(),
                    inputs(&[("qos", 2)]),
                    inputs(&[("qos", 2)]),
                ],
            )
            .unwrap();
        assert_eq!(steps[2].configuration.values["qos"], 2);
        // t6 consumes nothing, so qos keeps its last received value.
        let steps = efsm
            .simulate_path(
                &["t1", "t3", "t6"],
                &[InputMap::new(), inputs(&[("qos", 1)]), InputMap::new()],
            )
            .unwrap();
        assert_eq!(steps[2].configuration.values["qos"], 1);
    }

    #[test]
    fn output_arguments_render_comma_separated() {
        let efsm = CompiledEfsm::compile(&doc(
            r#"{ "transitions": [ { "name": "t", "head_state": "s1", "tail_state": "s2",
                 "input_event": "?P.f(x);", "guard": "", "action": "",
                 "output_event": "!P.pair(x, x + 1);" } ] }"#,
        ))
        .unwrap();
        let t = efsm.transition_by_name("t").unwrap();
        let step = efsm
            .fire(t, &efsm.initial_configuration(), &inputs(&[("x", 1)]))
            .unwrap();
        assert_eq!(step.output.as_deref(), Some("!P.pair(1, 2);"));
    }

    #[test]
    fn compiled_machines_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<CompiledEfsm>();
        assert_send_sync::<StateConfiguration>();

        let efsm = std::sync::Arc::new(scp());
        let handles: Vec<_> = (0..4)
            .map(|worker| {
                let efsm = std::sync::Arc::clone(&efsm);
                std::thread::spawn(move || {
                    let qos = worker % 2;
                    let steps = efsm
                        .simulate_path(&["t1", "t3"], &[InputMap::new(), inputs(&[("qos", qos)])])
                        .unwrap();
                    assert_eq!(steps[1].configuration.state, "s3");
                    assert_eq!(steps[1].configuration.values["qos"], qos);
                })
            })
            .collect();
        for handle in handles {
            handle.join().unwrap();
        }
    }

    #[test]
    fn trace_steps_serialize_with_the_documented_shape() {
        let efsm = scp();
        let path = ["t1"];
        let steps = efsm.simulate_path(&path, &[InputMap::new()]).unwrap();
        let trace = TraceStep::zip(&path, steps);
        let json = serde_json::to_value(&trace).unwrap();
        assert_eq!(json[0]["transition"], "t1");
        assert_eq!(json[0]["configuration"]["state"], "s2");
        assert_eq!(json[0]["configuration"]["values"]["TryCount"], 0);
        assert_eq!(json[0]["output"], serde_json::Value::Null);
    }
}
