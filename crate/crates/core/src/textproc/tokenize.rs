use serde::{Deserialize, Serialize};

use super::porter;
use crate::corpus::Citation;

/// Identifies the tokenization rules. Stored in dataset manifests so that
/// token-index annotations are never interpreted under different rules.
pub const TOKENIZER_FINGERPRINT: &str = "alnum-runs;lowercase;porter-1980;sentence=[.?!]+ws+upper;title-is-sentence;v1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Lowercased surface form.
    pub surface: String,
    pub stem: String,
    pub sentence: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    /// Number of distinct sentences (indices are dense from zero).
    pub fn sentence_count(&self) -> usize {
        self.tokens.last().map_or(0, |t| t.sentence + 1)
    }

    fn push_text(&mut self, text: &str, first_sentence: usize) {
        #[derive(PartialEq)]
        enum Boundary {
            None,
            Terminal,
            TerminalSpace,
        }

        let mut sentence = first_sentence;
        let mut state = Boundary::None;
        let mut current = String::new();
        let flush = |current: &mut String, sentence: usize, tokens: &mut Vec<Token>| {
            if !current.is_empty() {
                let surface = std::mem::take(current);
                let stem = porter::stem(&surface);
                tokens.push(Token {
                    surface,
                    stem,
                    sentence,
                });
            }
        };

        for ch in text.chars() {
            if ch.is_alphanumeric() {
                if state == Boundary::TerminalSpace
                    && ch.is_uppercase()
                    && self.tokens.last().is_some_and(|t| t.sentence == sentence)
                {
                    sentence += 1;
                }
                state = Boundary::None;
                current.extend(ch.to_lowercase());
                continue;
            }
            flush(&mut current, sentence, &mut self.tokens);
            state = match (ch, state) {
                ('.' | '?' | '!', _) => Boundary::Terminal,
                (c, Boundary::Terminal | Boundary::TerminalSpace) if c.is_whitespace() => Boundary::TerminalSpace,
                _ => Boundary::None,
            };
        }
        flush(&mut current, sentence, &mut self.tokens);
    }
}

/// Split text into lowercased alphanumeric runs with Porter stems and
/// sentence indices.
///
/// A new sentence starts at a token beginning with an uppercase letter that
/// follows `.`, `?` or `!` plus at least one whitespace character.
pub fn tokenize(text: &str) -> TokenStream {
    let mut ts = TokenStream::default();
    ts.push_text(text, 0);
    ts
}

/// Tokens of title followed by abstract. The title always forms its own
/// sentence(s); the abstract starts a new one.
pub fn tokenize_citation(c: &Citation) -> TokenStream {
    let mut ts = tokenize(&c.title);
    let next = ts.sentence_count();
    ts.push_text(&c.abstract_text, next);
    ts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(ts: &TokenStream) -> Vec<&str> {
        ts.surfaces().collect()
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  ;; ").is_empty());
    }

    #[test]
    fn charting_by_exception() {
        let ts = tokenize("Charting by exception:");
        assert_eq!(surfaces(&ts), ["charting", "by", "exception"]);
        let stems: Vec<_> = ts.tokens.iter().map(|t| t.stem.as_str()).collect();
        assert_eq!(stems, ["chart", "by", "except"]);
    }

    #[test]
    fn single_lowercase_token() {
        assert_eq!(surfaces(&tokenize("chart")), ["chart"]);
    }

    #[test]
    fn sentence_boundaries() {
        let ts = tokenize("One two. Three four? five. e.g. Six 3.5 seven!Eight");
        let sent: Vec<_> = ts.tokens.iter().map(|t| (t.surface.as_str(), t.sentence)).collect();
        assert_eq!(
            sent,
            [
                ("one", 0),
                ("two", 0),
                ("three", 1),
                ("four", 1),
                // lowercase after terminal: no boundary
                ("five", 1),
                ("e", 1),
                ("g", 1),
                ("six", 2),
                ("3", 2),
                ("5", 2),
                ("seven", 2),
                // no whitespace after '!': no boundary
                ("eight", 2),
            ]
        );
    }

    #[test]
    fn citation_title_is_its_own_sentence() {
        let c = Citation::new("1", "Charting by exception", "Documentation varies. It helps.");
        let ts = tokenize_citation(&c);
        let sent: Vec<_> = ts.tokens.iter().map(|t| t.sentence).collect();
        assert_eq!(sent, [0, 0, 0, 1, 1, 2, 2]);

        let untitled = Citation::new("2", "", "Alpha beta.");
        assert_eq!(tokenize_citation(&untitled).tokens[0].sentence, 0);
    }
}
