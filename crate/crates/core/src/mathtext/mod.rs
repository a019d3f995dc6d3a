//! Alternative text for figures and formulas: the word budget shown while
//! writing figure descriptions, and MathSpeak generated from LaTeX.

mod ast;
mod latex;
mod parse;
mod speak;

use serde::{Deserialize, Serialize};

use crate::region::RegionId;

pub use ast::{BigOpKind, BinOp, Delim, Func, MathExpr};
pub use latex::to_latex;
pub use parse::{parse_latex, LatexError};
pub use speak::to_mathspeak;

/// Recommended maximum length of a figure description, in words.
pub const WORD_LIMIT: i64 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordBudget {
    pub limit: i64,
    /// Words left before the limit; negative once exceeded.
    pub remaining: i64,
}

impl WordBudget {
    pub fn over_limit(&self) -> bool {
        self.remaining < 0
    }
}

/// Counts maximal runs of non-whitespace.
pub fn word_budget(text: &str) -> WordBudget {
    let words = text.split_whitespace().count() as i64;
    WordBudget { limit: WORD_LIMIT, remaining: WORD_LIMIT - words }
}

/// Figure description. A decorative figure is exported as an artifact and
/// its text is ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltText {
    pub region: RegionId,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub decorative: bool,
}

/// MathSpeak for a LaTeX source. Unsupported input is an error; no partial
/// speech is produced.
pub fn formula_alt_text(latex: &str) -> Result<String, LatexError> {
    Ok(to_mathspeak(&parse_latex(latex)?))
}
