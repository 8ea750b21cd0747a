//! Coverage-directed test-suite generation.
//!
//! The search is a breadth-first exploration of state configurations: a FIFO
//! worklist of nodes (path, data so far, trace, configuration) seeded with
//! the empty path at the initial configuration. Expanding a node tries every
//! outgoing transition in declaration order and, for each, every boundary
//! input map in order; feasible children are fired and enqueued, infeasible
//! ones discarded. A node that covers a previously uncovered target becomes
//! a test case on the spot, so coverage grows monotonically and case path
//! lengths are non-decreasing. The whole procedure is deterministic.

use crate::machine::{
    CompiledEfsm, CompiledTransition, InputMap, SimError, StateConfiguration, TraceStep,
};
use crate::model::VariableDomain;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// What a generated suite must exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverageCriterion {
    AllStates,
    AllTransitions,
}

impl fmt::Display for CoverageCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverageCriterion::AllStates => write!(f, "all-states"),
            CoverageCriterion::AllTransitions => write!(f, "all-transitions"),
        }
    }
}

/// Input-data generation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataStrategy {
    /// Five-point boundary rule per domain: low, low+1, midpoint, high-1, high.
    #[default]
    Boundary,
}

/// Order in which a node's outgoing transitions are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    DeclarationOrder,
}

/// Knobs for [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationOptions {
    pub criterion: CoverageCriterion,
    /// Maximum path length of a search node.
    pub max_depth: usize,
    pub data_strategy: DataStrategy,
    pub tie_break: TieBreak,
    /// Safety cap on the number of search nodes ever created.
    pub node_limit: usize,
    /// Drop children whose (state, values) configuration was already seen.
    /// Off by default: loops stay explorable within `max_depth`.
    pub prune_repeated_configurations: bool,
}

impl GenerationOptions {
    pub fn new(criterion: CoverageCriterion) -> Self {
        GenerationOptions {
            criterion,
            max_depth: 10,
            data_strategy: DataStrategy::Boundary,
            tie_break: TieBreak::DeclarationOrder,
            node_limit: 100_000,
            prune_repeated_configurations: false,
        }
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn with_node_limit(mut self, node_limit: usize) -> Self {
        self.node_limit = node_limit;
        self
    }

    pub fn with_prune_repeated_configurations(mut self, prune: bool) -> Self {
        self.prune_repeated_configurations = prune;
        self
    }
}

/// One generated test case: a feasible path, the data that drives it, the
/// resulting trace, and the targets it newly covered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub path: Vec<String>,
    pub data: Vec<InputMap>,
    pub trace: Vec<TraceStep>,
    pub covered: Vec<String>,
}

impl TestCase {
    /// Builds a case by replaying `path` with `data` on `efsm`; the trace is
    /// the replay result and `covered` is left empty.
    pub fn replayed<S: AsRef<str>>(
        efsm: &CompiledEfsm,
        path: &[S],
        data: Vec<InputMap>,
    ) -> Result<TestCase, SimError> {
        let steps = efsm.simulate_path(path, &data)?;
        Ok(TestCase {
            path: path.iter().map(|s| s.as_ref().to_string()).collect(),
            trace: TraceStep::zip(path, steps),
            data,
            covered: Vec::new(),
        })
    }
}

/// Covered targets of a suite, in model declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub covered: Vec<String>,
    pub total: usize,
    pub fraction: f64,
}

/// The result of [`generate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSuite {
    pub criterion: CoverageCriterion,
    pub coverage: CoverageSummary,
    /// True when the search ran out of nodes (depth or safety limit) before
    /// covering every target.
    pub exhausted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub cases: Vec<TestCase>,
}

impl TestSuite {
    /// Pretty-printed JSON with stable key order and a trailing newline.
    /// Identical suites serialize to identical bytes.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("suite serializes");
        text.push('\n');
        text
    }
}

/// Coverage achieved by a suite, recomputed by replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub criterion: CoverageCriterion,
    pub covered: Vec<String>,
    pub uncovered: Vec<String>,
    pub fraction: f64,
}

/// Generation and coverage-accounting failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("the coverage criterion has no targets")]
    NoTargets,
    #[error("case {index} does not replay: {source}")]
    InfeasibleCase { index: usize, source: SimError },
    #[error("search failed: {0}")]
    Simulation(#[from] SimError),
}

/// The boundary-value candidates of a domain: the deduplicated ascending
/// values of {low, low+1, midpoint, high-1, high} that lie inside the domain.
/// The midpoint is the floor of (low+high)/2.
pub fn boundary_candidates(domain: &VariableDomain) -> Vec<i64> {
    let low = i128::from(domain.low);
    let high = i128::from(domain.high);
    let mut values: Vec<i128> = vec![low, low + 1, (low + high).div_euclid(2), high - 1, high];
    values.retain(|v| (low..=high).contains(v));
    values.sort_unstable();
    values.dedup();
    values.into_iter().map(|v| v as i64).collect()
}

/// All candidate input maps for one transition: the Cartesian product of the
/// boundary candidates over its parameters, in lexicographic order of the
/// ascending per-variable sequences. A parameterless transition yields one
/// empty map.
pub fn step_inputs(efsm: &CompiledEfsm, transition: &CompiledTransition) -> Vec<InputMap> {
    let mut maps = vec![InputMap::new()];
    for param in &transition.input_params {
        let domain = efsm
            .input_domain(param)
            .expect("compiled transitions only declare housed input variables");
        let candidates = boundary_candidates(domain);
        let mut extended = Vec::with_capacity(maps.len() * candidates.len());
        for map in &maps {
            for value in &candidates {
                let mut next = map.clone();
                next.insert(param.clone(), *value);
                extended.push(next);
            }
        }
        maps = extended;
    }
    maps
}

struct Node {
    path: Vec<usize>,
    data: Vec<InputMap>,
    trace: Vec<TraceStep>,
    configuration: StateConfiguration,
}

struct Search<'a> {
    efsm: &'a CompiledEfsm,
    options: &'a GenerationOptions,
    targets: Vec<String>,
    covered: BTreeSet<String>,
    cases: Vec<TestCase>,
    nodes_created: usize,
    diagnostic: Option<String>,
}

impl<'a> Search<'a> {
    fn node_targets(&self, node: &Node) -> BTreeSet<String> {
        match self.options.criterion {
            CoverageCriterion::AllStates => {
                let mut states: BTreeSet<String> = node
                    .trace
                    .iter()
                    .map(|s| s.configuration.state.clone())
                    .collect();
                states.insert(self.efsm.initial_state().to_string());
                states
            }
            CoverageCriterion::AllTransitions => node
                .path
                .iter()
                .map(|&i| self.efsm.transitions()[i].name.clone())
                .collect(),
        }
    }

    /// Marks the node's targets covered; when anything is new, the node is
    /// promoted to a test case. Returns true when every target is covered.
    fn record(&mut self, node: &Node) -> bool {
        let new_targets: Vec<String> = {
            let node_targets = self.node_targets(node);
            self.targets
                .iter()
                .filter(|t| node_targets.contains(*t) && !self.covered.contains(*t))
                .cloned()
                .collect()
        };
        if !new_targets.is_empty() {
            self.covered.extend(new_targets.iter().cloned());
            let case = TestCase {
                path: node
                    .path
                    .iter()
                    .map(|&i| self.efsm.transitions()[i].name.clone())
                    .collect(),
                data: node.data.clone(),
                trace: node.trace.clone(),
                covered: new_targets,
            };
            #[cfg(debug_assertions)]
            {
                let steps = self
                    .efsm
                    .simulate_path(&case.path, &case.data)
                    .expect("generated cases replay");
                assert_eq!(TraceStep::zip(&case.path, steps), case.trace);
            }
            self.cases.push(case);
        }
        self.covered.len() == self.targets.len()
    }

    fn suite(self, exhausted: bool) -> TestSuite {
        let covered: Vec<String> = self
            .targets
            .iter()
            .filter(|t| self.covered.contains(*t))
            .cloned()
            .collect();
        let fraction = if self.targets.is_empty() {
            0.0
        } else {
            covered.len() as f64 / self.targets.len() as f64
        };
        TestSuite {
            criterion: self.options.criterion,
            coverage: CoverageSummary {
                covered,
                total: self.targets.len(),
                fraction,
            },
            exhausted,
            diagnostic: self.diagnostic,
            cases: self.cases,
        }
    }
}

fn configuration_key(configuration: &StateConfiguration) -> (String, Vec<i64>) {
    (
        configuration.state.clone(),
        configuration.values.values().copied().collect(),
    )
}

/// Generates a test suite satisfying `options.criterion`, breadth-first.
///
/// The search stops as soon as every target is covered, or once every node up
/// to `max_depth` is exhausted (then `exhausted` is true and the suite holds
/// whatever was covered). The node safety limit is reported in-band through
/// `exhausted` plus `diagnostic`, never as an error.
///
/// Panics when `options.max_depth` is 0; the options contract requires a
/// depth of at least 1.
pub fn generate(
    efsm: &CompiledEfsm,
    options: &GenerationOptions,
) -> Result<TestSuite, GenerateError> {
    assert!(options.max_depth >= 1, "max_depth must be at least 1");
    let targets: Vec<String> = match options.criterion {
        CoverageCriterion::AllStates => efsm.states().to_vec(),
        CoverageCriterion::AllTransitions => {
            efsm.transitions().iter().map(|t| t.name.clone()).collect()
        }
    };
    if targets.is_empty() {
        return Err(GenerateError::NoTargets);
    }

    let mut search = Search {
        efsm,
        options,
        targets,
        covered: BTreeSet::new(),
        cases: Vec::new(),
        nodes_created: 1,
        diagnostic: None,
    };

    let seed = Node {
        path: Vec::new(),
        data: Vec::new(),
        trace: Vec::new(),
        configuration: efsm.initial_configuration(),
    };
    if search.record(&seed) {
        return Ok(search.suite(false));
    }

    let mut seen: HashSet<(String, Vec<i64>)> = HashSet::new();
    if options.prune_repeated_configurations {
        seen.insert(configuration_key(&seed.configuration));
    }
    let mut queue: VecDeque<Node> = VecDeque::from([seed]);

    while let Some(node) = queue.pop_front() {
        if node.path.len() >= options.max_depth {
            continue;
        }
        for index in efsm.outgoing_indices(&node.configuration.state)? {
            let transition = &efsm.transitions()[index];
            for inputs in step_inputs(efsm, transition) {
                if !efsm.is_feasible(transition, &node.configuration, &inputs)? {
                    continue;
                }
                let step = efsm.fire(transition, &node.configuration, &inputs)?;
                let mut trace = node.trace.clone();
                trace.push(TraceStep {
                    transition: transition.name.clone(),
                    configuration: step.configuration.clone(),
                    output: step.output,
                });
                let mut path = node.path.clone();
                path.push(index);
                let mut data = node.data.clone();
                data.push(inputs);
                let child = Node {
                    path,
                    data,
                    trace,
                    configuration: step.configuration,
                };
                search.nodes_created += 1;

                if search.record(&child) {
                    return Ok(search.suite(false));
                }
                if search.nodes_created >= options.node_limit {
                    search.diagnostic = Some(format!(
                        "stopped after creating {} search nodes (safety limit)",
                        search.nodes_created
                    ));
                    return Ok(search.suite(true));
                }
                if options.prune_repeated_configurations
                    && !seen.insert(configuration_key(&child.configuration))
                {
                    continue;
                }
                queue.push_back(child);
            }
        }
    }

    Ok(search.suite(true))
}

/// Recomputes the coverage a suite achieves under `criterion` by replaying
/// every case; nothing is trusted from the suite itself.
pub fn coverage_of(
    efsm: &CompiledEfsm,
    suite: &TestSuite,
    criterion: CoverageCriterion,
) -> Result<CoverageReport, GenerateError> {
    let targets: Vec<String> = match criterion {
        CoverageCriterion::AllStates => efsm.states().to_vec(),
        CoverageCriterion::AllTransitions => {
            efsm.transitions().iter().map(|t| t.name.clone()).collect()
        }
    };
    let mut hit: BTreeSet<String> = BTreeSet::new();
    for (index, case) in suite.cases.iter().enumerate() {
        let steps = efsm
            .simulate_path(&case.path, &case.data)
            .map_err(|source| GenerateError::InfeasibleCase { index, source })?;
        match criterion {
            CoverageCriterion::AllStates => {
                hit.insert(efsm.initial_state().to_string());
                hit.extend(steps.iter().map(|s| s.configuration.state.clone()));
            }
            CoverageCriterion::AllTransitions => {
                hit.extend(case.path.iter().cloned());
            }
        }
    }
    let covered: Vec<String> = targets
        .iter()
        .filter(|t| hit.contains(*t))
        .cloned()
        .collect();
    let uncovered: Vec<String> = targets
        .iter()
        .filter(|t| !hit.contains(*t))
        .cloned()
        .collect();
    let fraction = if targets.is_empty() {
        0.0
    } else {
        covered.len() as f64 / targets.len() as f64
    };
    Ok(CoverageReport {
        criterion,
        covered,
        uncovered,
        fraction,
    })
}
