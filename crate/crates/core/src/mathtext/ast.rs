use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Comma,
    Eq,
    Neq,
    Lt,
    Gt,
    Le,
    Ge,
    Approx,
    To,
    In,
    Plus,
    Minus,
    PlusMinus,
    Times,
    Cdot,
    Div,
    Slash,
}

impl BinOp {
    pub(crate) fn precedence(self) -> u8 {
        use BinOp::*;
        match self {
            Comma => prec::COMMA,
            Eq | Neq | Lt | Gt | Le | Ge | Approx | To | In => prec::REL,
            Plus | Minus | PlusMinus => prec::ADD,
            Times | Cdot | Div | Slash => prec::MUL,
        }
    }
}

/// Binding strengths, loosest first.
pub(crate) mod prec {
    pub const COMMA: u8 = 1;
    pub const REL: u8 = 2;
    pub const ADD: u8 = 3;
    pub const MUL: u8 = 4;
    pub const ROW: u8 = 5;
    pub const POSTFIX: u8 = 6;
    pub const ATOM: u8 = 7;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Delim {
    Paren,
    Bracket,
    Brace,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BigOpKind {
    Sum,
    Prod,
    Int,
    Lim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Log,
    Ln,
    Exp,
    Max,
    Min,
}

impl Func {
    pub const ALL: [Func; 8] = [Func::Sin, Func::Cos, Func::Tan, Func::Log, Func::Ln, Func::Exp, Func::Max, Func::Min];

    pub fn macro_name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Log => "log",
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Max => "max",
            Func::Min => "min",
        }
    }
}

/// Parsed formula in the supported LaTeX subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MathExpr {
    Number(String),
    /// Single Latin letter.
    Ident(char),
    /// Greek letter by macro name, e.g. `alpha` or `Gamma`.
    Greek(String),
    /// Named symbol such as `infty` or `partial`.
    Symbol(String),
    Binary { op: BinOp, lhs: Box<MathExpr>, rhs: Box<MathExpr> },
    Neg(Box<MathExpr>),
    /// Juxtaposition of two or more terms.
    Row(Vec<MathExpr>),
    Frac(Box<MathExpr>, Box<MathExpr>),
    Script { base: Box<MathExpr>, sub: Option<Box<MathExpr>>, sup: Option<Box<MathExpr>> },
    Root { index: Option<Box<MathExpr>>, radicand: Box<MathExpr> },
    Group { delim: Delim, inner: Box<MathExpr> },
    BigOp { op: BigOpKind, lower: Option<Box<MathExpr>>, upper: Option<Box<MathExpr>>, body: Option<Box<MathExpr>> },
    Apply { func: Func, sub: Option<Box<MathExpr>>, sup: Option<Box<MathExpr>>, arg: Box<MathExpr> },
    Factorial(Box<MathExpr>),
    Text(String),
}

impl MathExpr {
    pub(crate) fn precedence(&self) -> u8 {
        match self {
            MathExpr::Binary { op, .. } => op.precedence(),
            MathExpr::Neg(_) => prec::ADD,
            MathExpr::Row(_) | MathExpr::BigOp { .. } | MathExpr::Apply { .. } => prec::ROW,
            MathExpr::Script { .. } | MathExpr::Factorial(_) => prec::POSTFIX,
            _ => prec::ATOM,
        }
    }

    /// Nesting height of fractions: 0 without fractions, 1 for a fraction
    /// with plain parts, and so on.
    pub fn fraction_height(&self) -> usize {
        let inner = self.children().map(MathExpr::fraction_height).max().unwrap_or(0);
        match self {
            MathExpr::Frac(..) => inner + 1,
            _ => inner,
        }
    }

    pub fn children(&self) -> impl Iterator<Item = &MathExpr> {
        let mut v: Vec<&MathExpr> = Vec::new();
        match self {
            MathExpr::Number(_) | MathExpr::Ident(_) | MathExpr::Greek(_) | MathExpr::Symbol(_) | MathExpr::Text(_) => {}
            MathExpr::Binary { lhs, rhs, .. } => v.extend([&**lhs, &**rhs]),
            MathExpr::Neg(e) | MathExpr::Factorial(e) => v.push(e),
            MathExpr::Row(items) => v.extend(items.iter()),
            MathExpr::Frac(a, b) => v.extend([&**a, &**b]),
            MathExpr::Script { base, sub, sup } => {
                v.push(base);
                v.extend(sub.as_deref());
                v.extend(sup.as_deref());
            }
            MathExpr::Root { index, radicand } => {
                v.extend(index.as_deref());
                v.push(radicand);
            }
            MathExpr::Group { inner, .. } => v.push(inner),
            MathExpr::BigOp { lower, upper, body, .. } => {
                v.extend(lower.as_deref());
                v.extend(upper.as_deref());
                v.extend(body.as_deref());
            }
            MathExpr::Apply { sub, sup, arg, .. } => {
                v.extend(sub.as_deref());
                v.extend(sup.as_deref());
                v.push(arg);
            }
        }
        v.into_iter()
    }
}
