//! Recursive-descent parser for the four statement categories.

use super::lexer::{tokenize, Token, TokenKind};
use super::{CompareOp, ExprError, ExprKind, ExprNode, StatementKind};

/// Parses `text` as the requested category and returns its parse tree.
///
/// Text that contains no tokens parses to the distinguished `Empty` tree in
/// every category. Sort and shape rules are enforced here: guards must be
/// boolean expressions, assignment right-hand sides and event parameters must
/// be integer expressions, and input-event parameters must be distinct
/// variable names.
pub fn parse(kind: StatementKind, text: &str) -> Result<ExprNode, ExprError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Ok(ExprNode::empty());
    }
    let end = text.chars().count();
    let node = match kind {
        StatementKind::InputEvent => parse_event(&tokens, end, "?", ExprKind::InputEvent)?,
        StatementKind::OutputEvent => parse_event(&tokens, end, "!", ExprKind::OutputEvent)?,
        StatementKind::ActionList => parse_actions(&tokens, end)?,
        StatementKind::Guard => match parse_guard(&tokens, end) {
            Ok(node) => node,
            Err(error) => {
                // A guard that reads as an assignment gets the clearer error.
                if parse_actions(&tokens, end).is_ok() {
                    return Err(ExprError::TypeShape {
                        message: "guard parses as an assignment; expected a boolean expression"
                            .into(),
                    });
                }
                return Err(error);
            }
        },
    };
    check_category(kind, &node)?;
    Ok(node)
}

fn parse_event(
    tokens: &[Token],
    end: usize,
    marker: &str,
    kind: ExprKind,
) -> Result<ExprNode, ExprError> {
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
    };
    p.expect_punct(marker)?;
    let port = p.expect_identifier("a port name")?;
    p.expect_punct(".")?;
    let function = p.expect_identifier("a function name")?;
    p.expect_punct("(")?;
    let mut params = Vec::new();
    if !p.at_punct(")") {
        params.push(p.expression()?);
        while p.eat_punct(",") {
            params.push(p.expression()?);
        }
    }
    p.expect_punct(")")?;
    p.expect_punct(";")?;
    p.expect_end()?;
    let function_node = ExprNode::new(
        ExprKind::FunctionExpr { name: function },
        vec![ExprNode::new(ExprKind::ParamList, params)],
    );
    Ok(ExprNode::new(
        kind,
        vec![ExprNode::leaf(ExprKind::Port { name: port }), function_node],
    ))
}

fn parse_actions(tokens: &[Token], end: usize) -> Result<ExprNode, ExprError> {
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
    };
    let mut assignments = Vec::new();
    while !p.done() {
        let target = p.expect_identifier("a variable name")?;
        p.expect_punct("=")?;
        let value = p.expression()?;
        p.expect_punct(";")?;
        assignments.push(ExprNode::new(
            ExprKind::Assignment,
            vec![ExprNode::var(target), value],
        ));
    }
    Ok(ExprNode::new(ExprKind::ActionList, assignments))
}

fn parse_guard(tokens: &[Token], end: usize) -> Result<ExprNode, ExprError> {
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
    };
    let node = p.or_expr()?;
    p.expect_end()?;
    Ok(node)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn done(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn found(&self) -> String {
        self.peek()
            .map_or_else(|| "end of input".into(), |t| format!("`{}`", t.text))
    }

    fn error(&self, expected: Vec<String>) -> ExprError {
        ExprError::Syntax {
            offset: self.offset(),
            expected,
            found: self.found(),
        }
    }

    fn at_punct(&self, text: &str) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Punct && t.text == text)
    }

    fn eat_punct(&mut self, text: &str) -> bool {
        if self.at_punct(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, text: &str) -> Result<(), ExprError> {
        if self.eat_punct(text) {
            Ok(())
        } else {
            Err(self.error(vec![format!("`{text}`")]))
        }
    }

    fn expect_identifier(&mut self, what: &str) -> Result<String, ExprError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                self.pos += 1;
                Ok(t.text.clone())
            }
            _ => Err(self.error(vec![what.into()])),
        }
    }

    fn expect_end(&mut self) -> Result<(), ExprError> {
        if self.done() {
            Ok(())
        } else {
            Err(self.error(vec!["end of input".into()]))
        }
    }

    fn expression(&mut self) -> Result<ExprNode, ExprError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<ExprNode, ExprError> {
        let mut node = self.and_expr()?;
        while self.eat_punct("||") {
            let rhs = self.and_expr()?;
            node = ExprNode::new(ExprKind::Or, vec![node, rhs]);
        }
        Ok(node)
    }

    fn and_expr(&mut self) -> Result<ExprNode, ExprError> {
        let mut node = self.unary_bool()?;
        while self.eat_punct("&&") {
            let rhs = self.unary_bool()?;
            node = ExprNode::new(ExprKind::And, vec![node, rhs]);
        }
        Ok(node)
    }

    fn unary_bool(&mut self) -> Result<ExprNode, ExprError> {
        if self.eat_punct("!") {
            let operand = self.unary_bool()?;
            return Ok(ExprNode::new(ExprKind::Not, vec![operand]));
        }
        self.rel_expr()
    }

    fn rel_expr(&mut self) -> Result<ExprNode, ExprError> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Some(t) if t.kind == TokenKind::Punct => match t.text.as_str() {
                "==" => CompareOp::Eq,
                "!=" => CompareOp::Ne,
                "<" => CompareOp::Lt,
                "<=" => CompareOp::Le,
                ">" => CompareOp::Gt,
                ">=" => CompareOp::Ge,
                _ => return Ok(lhs),
            },
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.add_expr()?;
        Ok(ExprNode::new(ExprKind::Compare { op }, vec![lhs, rhs]))
    }

    fn add_expr(&mut self) -> Result<ExprNode, ExprError> {
        let mut node = self.mul_expr()?;
        loop {
            let kind = if self.at_punct("+") {
                ExprKind::Add
            } else if self.at_punct("-") {
                ExprKind::Sub
            } else {
                return Ok(node);
            };
            self.pos += 1;
            let rhs = self.mul_expr()?;
            node = ExprNode::new(kind, vec![node, rhs]);
        }
    }

    fn mul_expr(&mut self) -> Result<ExprNode, ExprError> {
        let mut node = self.unary()?;
        loop {
            let kind = if self.at_punct("*") {
                ExprKind::Mul
            } else if self.at_punct("/") {
                ExprKind::Div
            } else if self.at_punct("%") {
                ExprKind::Mod
            } else {
                return Ok(node);
            };
            self.pos += 1;
            let rhs = self.unary()?;
            node = ExprNode::new(kind, vec![node, rhs]);
        }
    }

    fn unary(&mut self) -> Result<ExprNode, ExprError> {
        if self.eat_punct("-") {
            let operand = self.unary()?;
            return Ok(ExprNode::new(ExprKind::Neg, vec![operand]));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<ExprNode, ExprError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::IntegerLiteral => {
                let value = t
                    .text
                    .parse::<i64>()
                    .map_err(|_| ExprError::LiteralOutOfRange { offset: t.offset })?;
                self.pos += 1;
                Ok(ExprNode::int(value))
            }
            Some(t) if t.kind == TokenKind::Identifier => {
                let name = t.text.clone();
                self.pos += 1;
                Ok(ExprNode::var(name))
            }
            Some(t) if t.kind == TokenKind::Punct && t.text == "(" => {
                self.pos += 1;
                let node = self.or_expr()?;
                self.expect_punct(")")?;
                Ok(node)
            }
            _ => Err(self.error(vec![
                "an integer literal".into(),
                "a variable name".into(),
                "`(`".into(),
            ])),
        }
    }
}

/// The two value sorts of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sort {
    Int,
    Bool,
}

impl Sort {
    fn name(self) -> &'static str {
        match self {
            Sort::Int => "integer",
            Sort::Bool => "boolean",
        }
    }
}

fn sort_of(node: &ExprNode) -> Result<Sort, ExprError> {
    match &node.kind {
        ExprKind::IntLit { .. } | ExprKind::Var { .. } => Ok(Sort::Int),
        ExprKind::Add | ExprKind::Sub | ExprKind::Mul | ExprKind::Div | ExprKind::Mod => {
            expect_children(node, Sort::Int, "arithmetic")?;
            Ok(Sort::Int)
        }
        ExprKind::Neg => {
            expect_children(node, Sort::Int, "negation")?;
            Ok(Sort::Int)
        }
        ExprKind::Compare { .. } => {
            expect_children(node, Sort::Int, "comparison")?;
            Ok(Sort::Bool)
        }
        ExprKind::And | ExprKind::Or => {
            expect_children(node, Sort::Bool, "logical operator")?;
            Ok(Sort::Bool)
        }
        ExprKind::Not => {
            expect_children(node, Sort::Bool, "logical negation")?;
            Ok(Sort::Bool)
        }
        other => Err(ExprError::TypeShape {
            message: format!("{other:?} is not an expression"),
        }),
    }
}

fn expect_children(node: &ExprNode, sort: Sort, what: &str) -> Result<(), ExprError> {
    for child in &node.children {
        let got = sort_of(child)?;
        if got != sort {
            return Err(ExprError::TypeShape {
                message: format!(
                    "{what} takes {} operands, found {}",
                    sort.name(),
                    got.name()
                ),
            });
        }
    }
    Ok(())
}

fn check_category(kind: StatementKind, node: &ExprNode) -> Result<(), ExprError> {
    match kind {
        StatementKind::Guard => {
            let sort = sort_of(node)?;
            if sort != Sort::Bool {
                return Err(ExprError::TypeShape {
                    message: format!(
                        "guard has {} sort; expected a boolean expression",
                        sort.name()
                    ),
                });
            }
        }
        StatementKind::ActionList => {
            for assignment in &node.children {
                let sort = sort_of(&assignment.children[1])?;
                if sort != Sort::Int {
                    return Err(ExprError::TypeShape {
                        message: "assignments store integer values; the right-hand side is boolean"
                            .into(),
                    });
                }
            }
        }
        StatementKind::InputEvent => {
            let mut seen = Vec::new();
            for param in &node.children[1].children[0].children {
                match &param.kind {
                    ExprKind::Var { name } => {
                        if seen.contains(&name) {
                            return Err(ExprError::TypeShape {
                                message: format!(
                                    "input event declares parameter `{name}` more than once"
                                ),
                            });
                        }
                        seen.push(name);
                    }
                    _ => {
                        return Err(ExprError::TypeShape {
                            message: "input event parameters must be variable names".into(),
                        })
                    }
                }
            }
        }
        StatementKind::OutputEvent => {
            for param in &node.children[1].children[0].children {
                let sort = sort_of(param)?;
                if sort != Sort::Int {
                    return Err(ExprError::TypeShape {
                        message: "output event arguments must be integer expressions".into(),
                    });
                }
            }
        }
    }
    Ok(())
}
