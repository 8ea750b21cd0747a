//! Longest-munch tokenizer for the expression mini-language.

use super::ExprError;
use serde::{Deserialize, Serialize};

/// Token category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Identifier,
    IntegerLiteral,
    Punct,
}

/// A lexical token. `offset` is the character index of the token's first
/// character in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub offset: usize,
}

const TWO_CHAR_PUNCT: [&str; 6] = ["==", "!=", "<=", ">=", "&&", "||"];
const ONE_CHAR_PUNCT: [char; 15] = [
    '?', '!', '.', ',', ';', '(', ')', '=', '<', '>', '+', '-', '*', '/', '%',
];

/// Splits source text into tokens, skipping whitespace.
///
/// Multi-character operators win over their one-character prefixes, so `<=`
/// is a single token and never `<` followed by `=`.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Identifier,
                text: chars[start..i].iter().collect(),
                offset: start,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::IntegerLiteral,
                text: chars[start..i].iter().collect(),
                offset: start,
            });
            continue;
        }
        if i + 1 < chars.len() {
            let pair: String = chars[i..i + 2].iter().collect();
            if TWO_CHAR_PUNCT.contains(&pair.as_str()) {
                tokens.push(Token {
                    kind: TokenKind::Punct,
                    text: pair,
                    offset: i,
                });
                i += 2;
                continue;
            }
        }
        if ONE_CHAR_PUNCT.contains(&c) {
            tokens.push(Token {
                kind: TokenKind::Punct,
                text: c.to_string(),
                offset: i,
            });
            i += 1;
            continue;
        }
        return Err(ExprError::UnknownCharacter { offset: i });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn tokenizes_an_input_event() {
        let tokens = tokenize("?U.connect(ReqQos);").unwrap();
        assert_eq!(
            texts(&tokens),
            vec!["?", "U", ".", "connect", "(", "ReqQos", ")", ";"]
        );
        assert_eq!(tokens[0].offset, 0);
        assert_eq!(tokens[3].offset, 3);
        assert_eq!(tokens[5].offset, 11);
    }

    #[test]
    fn empty_text_has_no_tokens() {
        assert_eq!(tokenize("").unwrap(), Vec::new());
        assert_eq!(tokenize("   \t ").unwrap(), Vec::new());
    }

    #[test]
    fn tokenizes_a_guard() {
        let tokens = tokenize("qos == 1").unwrap();
        assert_eq!(texts(&tokens), vec!["qos", "==", "1"]);
        assert_eq!(
            tokens.iter().map(|t| t.kind).collect::<Vec<_>>(),
            vec![
                TokenKind::Identifier,
                TokenKind::Punct,
                TokenKind::IntegerLiteral
            ]
        );
    }

    #[test]
    fn longest_munch_wins() {
        let tokens = tokenize("a<=b!=c&&!d").unwrap();
        assert_eq!(
            texts(&tokens),
            vec!["a", "<=", "b", "!=", "c", "&&", "!", "d"]
        );
    }

    #[test]
    fn unknown_character_reports_its_offset() {
        assert_eq!(
            tokenize("qos @ 1"),
            Err(ExprError::UnknownCharacter { offset: 4 })
        );
        assert_eq!(
            tokenize("a & b"),
            Err(ExprError::UnknownCharacter { offset: 2 })
        );
    }

    #[test]
    fn offsets_are_character_based() {
        // One multi-byte character before the token.
        let tokens = tokenize("µ").unwrap_err();
        assert_eq!(tokens, ExprError::UnknownCharacter { offset: 0 });
    }
}
