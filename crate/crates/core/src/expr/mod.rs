//! The expression mini-language used inside transition fields.
//!
//! Each of the four transition fields holds one syntactic category:
//!
//! ```text
//! input_event  ::= '?' Port '.' function_expr ';'
//! output_event ::= '!' Port '.' function_expr ';'
//! Port         ::= Identifier
//! function_expr::= Identifier '(' [ params ] ')'
//! params       ::= expr { ',' expr }
//! action_list  ::= { assignment }
//! assignment   ::= Identifier '=' expr ';'
//! guard        ::= or_expr
//! or_expr      ::= and_expr { '||' and_expr }
//! and_expr     ::= unary_bool { '&&' unary_bool }
//! unary_bool   ::= '!' unary_bool | rel_expr
//! rel_expr     ::= add_expr [ relop add_expr ]      relop: == != < <= > >=
//! add_expr     ::= mul_expr { ('+'|'-') mul_expr }
//! mul_expr     ::= unary { ('*'|'/'|'%') unary }
//! unary        ::= '-' unary | primary
//! primary      ::= IntegerLiteral | Identifier | '(' guard ')'
//! ```
//!
//! Values have two sorts, integer and boolean. Guards must be boolean-typed;
//! assignment right-hand sides and event parameters must be integer-typed;
//! input-event parameters must be bare variable names (they declare the
//! transition's input variables). Empty text parses to a distinguished
//! [`ExprKind::Empty`] tree accepted by every category.

mod lexer;
mod parser;

pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Comparison operator carried by [`ExprKind::Compare`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompareOp {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Node label of a parse tree node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExprKind {
    InputEvent,
    OutputEvent,
    Port {
        name: String,
    },
    FunctionExpr {
        name: String,
    },
    ParamList,
    ActionList,
    Assignment,
    Or,
    And,
    Not,
    Compare {
        op: CompareOp,
    },
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Neg,
    #[serde(rename = "int")]
    IntLit {
        value: i64,
    },
    Var {
        name: String,
    },
    Empty,
}

/// A parse tree node: a label plus ordered children.
///
/// Shape conventions: input/output events have exactly a `Port` child and a
/// `FunctionExpr` child; a `FunctionExpr` has exactly one `ParamList` child;
/// an `Assignment` has a `Var` target child followed by one expression child;
/// `Compare` and the binary operators have exactly two children.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExprNode {
    #[serde(flatten)]
    pub kind: ExprKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ExprNode>,
}

impl ExprNode {
    pub fn new(kind: ExprKind, children: Vec<ExprNode>) -> Self {
        ExprNode { kind, children }
    }

    pub fn leaf(kind: ExprKind) -> Self {
        ExprNode {
            kind,
            children: Vec::new(),
        }
    }

    pub fn empty() -> Self {
        ExprNode::leaf(ExprKind::Empty)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.kind, ExprKind::Empty)
    }

    pub fn var(name: impl Into<String>) -> Self {
        ExprNode::leaf(ExprKind::Var { name: name.into() })
    }

    pub fn int(value: i64) -> Self {
        ExprNode::leaf(ExprKind::IntLit { value })
    }
}

/// Which syntactic category to parse a piece of text as. The four transition
/// fields map one-to-one onto these start symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementKind {
    InputEvent,
    OutputEvent,
    Guard,
    ActionList,
}

impl fmt::Display for StatementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatementKind::InputEvent => write!(f, "input event"),
            StatementKind::OutputEvent => write!(f, "output event"),
            StatementKind::Guard => write!(f, "guard"),
            StatementKind::ActionList => write!(f, "action"),
        }
    }
}

/// Tokenizer and parser errors. Offsets are character indices into the
/// source text; end-of-input errors point one past the last character.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("unknown character at offset {offset}")]
    UnknownCharacter { offset: usize },
    #[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("integer literal at offset {offset} is out of range")]
    LiteralOutOfRange { offset: usize },
    #[error("{message}")]
    TypeShape { message: String },
}

/// Identifier usage extracted from a parse tree by [`identifiers`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdentifierSets {
    /// Variables read anywhere in the tree.
    pub used: BTreeSet<String>,
    /// Assignment targets.
    pub assigned: BTreeSet<String>,
    /// Parameters declared by an input event's function expression.
    pub declared_inputs: BTreeSet<String>,
}

/// Classifies every variable occurrence in a tree.
///
/// Input-event parameters are declarations, not reads; assignment targets are
/// writes, not reads; port and function names are not variables at all.
pub fn identifiers(node: &ExprNode) -> IdentifierSets {
    let mut sets = IdentifierSets::default();
    collect_identifiers(node, false, &mut sets);
    sets
}

/// Parameters declared by an input event, in declaration order.
/// Returns an empty list for any other tree.
pub fn input_parameters(node: &ExprNode) -> Vec<String> {
    if !matches!(node.kind, ExprKind::InputEvent) {
        return Vec::new();
    }
    let mut params = Vec::new();
    if let Some(function) = node.children.get(1) {
        if let Some(list) = function.children.first() {
            for param in &list.children {
                if let ExprKind::Var { name } = &param.kind {
                    params.push(name.clone());
                }
            }
        }
    }
    params
}

fn collect_identifiers(node: &ExprNode, declaring: bool, sets: &mut IdentifierSets) {
    match &node.kind {
        ExprKind::Var { name } => {
            if declaring {
                sets.declared_inputs.insert(name.clone());
            } else {
                sets.used.insert(name.clone());
            }
        }
        ExprKind::InputEvent => {
            for child in &node.children {
                collect_identifiers(child, true, sets);
            }
        }
        ExprKind::Assignment => {
            if let ExprKind::Var { name } = &node.children[0].kind {
                sets.assigned.insert(name.clone());
            }
            for child in &node.children[1..] {
                collect_identifiers(child, declaring, sets);
            }
        }
        _ => {
            for child in &node.children {
                collect_identifiers(child, declaring, sets);
            }
        }
    }
}

/// Renders a parse tree one node per line, children indented two spaces under
/// their parent. `ParamList` nodes are folded into their parent: each
/// parameter prints as a `param` line directly under the function node.
pub fn render_tree(node: &ExprNode) -> String {
    let mut lines = Vec::new();
    render_node(node, 0, &mut lines);
    lines.join("\n")
}

fn render_node(node: &ExprNode, depth: usize, lines: &mut Vec<String>) {
    let pad = "  ".repeat(depth);
    match &node.kind {
        ExprKind::Empty => lines.push(format!("{pad}(empty)")),
        ExprKind::InputEvent => {
            lines.push(format!("{pad}input_event"));
            for child in &node.children {
                render_node(child, depth + 1, lines);
            }
        }
        ExprKind::OutputEvent => {
            lines.push(format!("{pad}output_event"));
            for child in &node.children {
                render_node(child, depth + 1, lines);
            }
        }
        ExprKind::Port { name } => lines.push(format!("{pad}Port {name}")),
        ExprKind::FunctionExpr { name } => {
            lines.push(format!("{pad}function_expr {name}"));
            for list in &node.children {
                for param in &list.children {
                    render_param(param, depth + 1, lines);
                }
            }
        }
        ExprKind::ParamList => {
            for param in &node.children {
                render_param(param, depth, lines);
            }
        }
        ExprKind::ActionList => {
            lines.push(format!("{pad}action_list"));
            for child in &node.children {
                render_node(child, depth + 1, lines);
            }
        }
        ExprKind::Assignment => {
            lines.push(format!("{pad}assign"));
            for child in &node.children {
                render_node(child, depth + 1, lines);
            }
        }
        ExprKind::Or => render_branch(node, "or", depth, lines),
        ExprKind::And => render_branch(node, "and", depth, lines),
        ExprKind::Not => render_branch(node, "not", depth, lines),
        ExprKind::Compare { op } => render_branch(node, &format!("compare {op}"), depth, lines),
        ExprKind::Add => render_branch(node, "add", depth, lines),
        ExprKind::Sub => render_branch(node, "sub", depth, lines),
        ExprKind::Mul => render_branch(node, "mul", depth, lines),
        ExprKind::Div => render_branch(node, "div", depth, lines),
        ExprKind::Mod => render_branch(node, "mod", depth, lines),
        ExprKind::Neg => render_branch(node, "neg", depth, lines),
        ExprKind::IntLit { value } => lines.push(format!("{pad}int {value}")),
        ExprKind::Var { name } => lines.push(format!("{pad}var {name}")),
    }
}

fn render_branch(node: &ExprNode, label: &str, depth: usize, lines: &mut Vec<String>) {
    lines.push(format!("{}{}", "  ".repeat(depth), label));
    for child in &node.children {
        render_node(child, depth + 1, lines);
    }
}

fn render_param(param: &ExprNode, depth: usize, lines: &mut Vec<String>) {
    let pad = "  ".repeat(depth);
    match &param.kind {
        ExprKind::Var { name } => lines.push(format!("{pad}param {name}")),
        ExprKind::IntLit { value } => lines.push(format!("{pad}param {value}")),
        _ => {
            lines.push(format!("{pad}param"));
            render_node(param, depth + 1, lines);
        }
    }
}
