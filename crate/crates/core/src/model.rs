//! Loading, validation and normalization of JSON model descriptions.
//!
//! A model file is a UTF-8 JSON object. Each transition is an object with
//! exactly seven semantic keys: `name`, `head_state`, `tail_state`,
//! `input_event`, `guard`, `action` and `output_event`; the whole machine is
//! the `transitions` array. Optional top-level keys: `domains` (integer
//! ranges for input variables), `variables` (declaration order for context
//! variables), `initial_state`, and free-text `notes` (ignored).

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// The seven semantic fields of a single transition, as read from the file.
///
/// Empty strings are meaningful: an empty `guard` is always true, an empty
/// `input_event` consumes nothing, and empty `action`/`output_event` have no
/// effect and produce no output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub name: String,
    pub head_state: String,
    pub tail_state: String,
    pub input_event: String,
    pub guard: String,
    pub action: String,
    pub output_event: String,
}

/// Inclusive integer range for an input variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDomain {
    pub variable: String,
    pub low: i64,
    pub high: i64,
}

/// A loaded, normalized model description.
///
/// `transitions` preserves file order. `domains` and `variables` are empty
/// when the corresponding sections are absent; `initial_state` is `None` when
/// unspecified (compilation then defaults to the head state named `s1`, or
/// the head of the first transition).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelDocument {
    pub transitions: Vec<TransitionSpec>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub domains: Vec<VariableDomain>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub variables: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<String>,
}

const TRANSITION_KEYS: [&str; 7] = [
    "name",
    "head_state",
    "tail_state",
    "input_event",
    "guard",
    "action",
    "output_event",
];

/// Errors raised by [`load_document`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("malformed JSON model description: {0}")]
    MalformedJson(String),
    #[error("transitions[{transition}] is missing key \"{key}\"")]
    MissingKey {
        transition: usize,
        key: &'static str,
    },
    #[error("duplicate transition name `{0}`")]
    DuplicateTransitionName(String),
    #[error("model contains no transitions")]
    EmptyModel,
}

/// Parses a JSON model description into a [`ModelDocument`].
///
/// Pure: identical input bytes yield structurally identical documents.
/// Unknown keys (such as `notes`) are ignored.
pub fn load_document(text: &str) -> Result<ModelDocument, LoadError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| LoadError::MalformedJson(e.to_string()))?;
    let root = value
        .as_object()
        .ok_or_else(|| LoadError::MalformedJson("top level must be an object".into()))?;

    let transitions_value = root.get("transitions").ok_or_else(|| {
        LoadError::MalformedJson("missing top-level \"transitions\" array".into())
    })?;
    let items = transitions_value.as_array().ok_or_else(|| {
        LoadError::MalformedJson("top-level \"transitions\" must be an array".into())
    })?;
    if items.is_empty() {
        return Err(LoadError::EmptyModel);
    }

    let mut transitions = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let object = item.as_object().ok_or_else(|| {
            LoadError::MalformedJson(format!("transitions[{index}] must be an object"))
        })?;
        let mut fields = Vec::with_capacity(TRANSITION_KEYS.len());
        for key in TRANSITION_KEYS {
            let value = object.get(key).ok_or(LoadError::MissingKey {
                transition: index,
                key,
            })?;
            let text = value.as_str().ok_or_else(|| {
                LoadError::MalformedJson(format!("transitions[{index}].{key} must be a string"))
            })?;
            fields.push(text.to_string());
        }
        let mut fields = fields.into_iter();
        transitions.push(TransitionSpec {
            name: fields.next().unwrap(),
            head_state: fields.next().unwrap(),
            tail_state: fields.next().unwrap(),
            input_event: fields.next().unwrap(),
            guard: fields.next().unwrap(),
            action: fields.next().unwrap(),
            output_event: fields.next().unwrap(),
        });
    }

    for (i, t) in transitions.iter().enumerate() {
        if transitions[..i].iter().any(|u| u.name == t.name) {
            return Err(LoadError::DuplicateTransitionName(t.name.clone()));
        }
    }

    let domains = match root.get("domains") {
        None | Some(serde_json::Value::Null) => Vec::new(),
        Some(value) => {
            let items = value.as_array().ok_or_else(|| {
                LoadError::MalformedJson("top-level \"domains\" must be an array".into())
            })?;
            items
                .iter()
                .enumerate()
                .map(|(i, item)| {
                    serde_json::from_value::<VariableDomain>(item.clone())
                        .map_err(|e| LoadError::MalformedJson(format!("domains[{i}]: {e}")))
                })
                .collect::<Result<_, _>>()?
        }
    };

    let variables = match root.get("variables") {
        None | Some(serde_json::Value::Null) => Vec::new(),
        Some(value) => {
            let items = value.as_array().ok_or_else(|| {
                LoadError::MalformedJson("top-level \"variables\" must be an array".into())
            })?;
            items
                .iter()
                .enumerate()
                .map(|(i, item)| {
                    item.as_str().map(str::to_string).ok_or_else(|| {
                        LoadError::MalformedJson(format!("variables[{i}] must be a string"))
                    })
                })
                .collect::<Result<_, _>>()?
        }
    };

    let initial_state = match root.get("initial_state") {
        None | Some(serde_json::Value::Null) => None,
        Some(value) => Some(value.as_str().map(str::to_string).ok_or_else(|| {
            LoadError::MalformedJson("top-level \"initial_state\" must be a string".into())
        })?),
    };

    Ok(ModelDocument {
        transitions,
        domains,
        variables,
        initial_state,
    })
}

impl ModelDocument {
    /// Serializes the document back to pretty-printed JSON with stable key
    /// order. `load_document(doc.to_json())` reproduces `doc` exactly.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model document serializes")
    }
}

/// Diagnostic severity. Only `Error` severity blocks compilation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// Where a diagnostic points. Every diagnostic is anchored either to a named
/// transition or to the document as a whole.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Transition(String),
    Document,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Transition(name) => write!(f, "transition `{name}`"),
            Location::Document => write!(f, "document"),
        }
    }
}

/// Machine-readable diagnostic category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCode {
    BadTransitionName,
    BadStateName,
    DuplicateTransitionName,
    InvertedDomain,
    DuplicateDomainVariable,
    UnknownInitialState,
}

/// One finding from [`validate_document`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Location,
    pub code: DiagnosticCode,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.severity, self.location, self.message)
    }
}

fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Checks a loaded document for structural problems.
///
/// Returns an ordered list of diagnostics; an empty list means the document is
/// valid. Checked: state and transition name identifier syntax, duplicate
/// transition names, duplicate or inverted domains, and that `initial_state`
/// (when given) appears as the head state of some transition.
pub fn validate_document(doc: &ModelDocument) -> Vec<Diagnostic> {
    let mut diagnostics = Vec::new();

    for (i, t) in doc.transitions.iter().enumerate() {
        let location = Location::Transition(t.name.clone());
        if !is_identifier(&t.name) {
            diagnostics.push(Diagnostic {
                severity: Severity::Error,
                location: location.clone(),
                code: DiagnosticCode::BadTransitionName,
                message: format!("transition name `{}` is not an identifier", t.name),
            });
        }
        for (what, state) in [("head", &t.head_state), ("tail", &t.tail_state)] {
            if !is_identifier(state) {
                diagnostics.push(Diagnostic {
                    severity: Severity::Error,
                    location: location.clone(),
                    code: DiagnosticCode::BadStateName,
                    message: format!("{what} state `{state}` is not an identifier"),
                });
            }
        }
        if doc.transitions[..i].iter().any(|u| u.name == t.name) {
            diagnostics.push(Diagnostic {
                severity: Severity::Error,
                location: location.clone(),
                code: DiagnosticCode::DuplicateTransitionName,
                message: format!("transition name `{}` is declared more than once", t.name),
            });
        }
    }

    for (i, d) in doc.domains.iter().enumerate() {
        if d.low > d.high {
            diagnostics.push(Diagnostic {
                severity: Severity::Error,
                location: Location::Document,
                code: DiagnosticCode::InvertedDomain,
                message: format!(
                    "domain for `{}` has low {} greater than high {}",
                    d.variable, d.low, d.high
                ),
            });
        }
        if doc.domains[..i].iter().any(|e| e.variable == d.variable) {
            diagnostics.push(Diagnostic {
                severity: Severity::Error,
                location: Location::Document,
                code: DiagnosticCode::DuplicateDomainVariable,
                message: format!("domain for `{}` is declared more than once", d.variable),
            });
        }
    }

    if let Some(initial) = &doc.initial_state {
        if !doc.transitions.iter().any(|t| &t.head_state == initial) {
            diagnostics.push(Diagnostic {
                severity: Severity::Error,
                location: Location::Document,
                code: DiagnosticCode::UnknownInitialState,
                message: format!(
                    "initial state `{initial}` is not the head state of any transition"
                ),
            });
        }
    }

    diagnostics
}
