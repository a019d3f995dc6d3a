use thiserror::Error;

use super::ast::{BigOpKind, BinOp, Delim, Func, MathExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatexError {
    #[error("syntax error at byte {pos}: {message}")]
    SyntaxError { pos: usize, message: String },
    #[error("unsupported macro \\{name} at byte {pos}")]
    UnsupportedMacro { name: String, pos: usize },
    #[error("empty formula")]
    EmptyFormula,
}

type PResult<T> = Result<T, LatexError>;

pub(crate) const GREEK: [&str; 38] = [
    "alpha", "beta", "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta", "theta", "vartheta", "iota", "kappa",
    "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon", "phi", "varphi", "chi", "psi", "omega",
    "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Upsilon", "Phi", "Psi", "Omega", "varpi",
];

pub(crate) const SYMBOLS: [&str; 4] = ["infty", "partial", "ldots", "nabla"];

const SPACING: [&str; 6] = [",", ";", ":", "!", "quad", "qquad"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Letter(char),
    Cmd(String),
    Ch(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

/// Parses a formula in the supported subset: numbers, single-letter
/// identifiers, Greek letters, arithmetic and relations, fractions, scripts,
/// roots, delimiters, sums, products, integrals, limits, common functions,
/// factorials and `\text`. Matrices and alignment are rejected.
pub fn parse_latex(src: &str) -> Result<MathExpr, LatexError> {
    let mut p = Parser { src, pos: 0, abs_depth: 0 };
    if p.peek()?.is_none() {
        return Err(LatexError::EmptyFormula);
    }
    let expr = p.expr()?;
    match p.peek()? {
        None => Ok(expr),
        Some(t) => Err(p.unexpected(&t)),
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    abs_depth: usize,
}

fn binop_of(tok: &Tok) -> Option<BinOp> {
    Some(match tok {
        Tok::Ch(',') => BinOp::Comma,
        Tok::Ch('=') => BinOp::Eq,
        Tok::Ch('<') => BinOp::Lt,
        Tok::Ch('>') => BinOp::Gt,
        Tok::Ch('+') => BinOp::Plus,
        Tok::Ch('-') => BinOp::Minus,
        Tok::Ch('/') => BinOp::Slash,
        Tok::Cmd(c) => match c.as_str() {
            "neq" | "ne" => BinOp::Neq,
            "le" | "leq" => BinOp::Le,
            "ge" | "geq" => BinOp::Ge,
            "lt" => BinOp::Lt,
            "gt" => BinOp::Gt,
            "approx" => BinOp::Approx,
            "to" | "rightarrow" => BinOp::To,
            "in" => BinOp::In,
            "pm" => BinOp::PlusMinus,
            "times" => BinOp::Times,
            "cdot" => BinOp::Cdot,
            "div" => BinOp::Div,
            _ => return None,
        },
        _ => return None,
    })
}

fn func_of(name: &str) -> Option<Func> {
    Func::ALL.into_iter().find(|f| f.macro_name() == name)
}

fn bigop_of(name: &str) -> Option<BigOpKind> {
    Some(match name {
        "sum" => BigOpKind::Sum,
        "prod" => BigOpKind::Prod,
        "int" => BigOpKind::Int,
        "lim" => BigOpKind::Lim,
        _ => return None,
    })
}

fn known_cmd(name: &str) -> bool {
    GREEK.contains(&name)
        || SYMBOLS.contains(&name)
        || matches!(name, "dots" | "cdots" | "frac" | "dfrac" | "tfrac" | "sqrt" | "text" | "left" | "right" | "{" | "}")
        || func_of(name).is_some()
        || bigop_of(name).is_some()
        || binop_of(&Tok::Cmd(name.to_string())).is_some()
}

impl Parser<'_> {
    fn err(&self, pos: usize, message: impl Into<String>) -> LatexError {
        LatexError::SyntaxError { pos, message: message.into() }
    }

    fn unexpected(&self, t: &Token) -> LatexError {
        let text = &self.src[t.start..t.end];
        self.err(t.start, format!("unexpected `{text}`"))
    }

    /// Next token without consuming it. Whitespace and spacing commands are
    /// skipped for good.
    fn peek(&mut self) -> PResult<Option<Token>> {
        loop {
            let rest = &self.src[self.pos..];
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            let Some(c) = trimmed.chars().next() else { return Ok(None) };
            let start = self.pos;
            let tok = if c == '\\' {
                let after = &trimmed[1..];
                let name_len = after.chars().take_while(|c| c.is_ascii_alphabetic()).count();
                let name: String = if name_len > 0 {
                    after[..name_len].to_string()
                } else {
                    match after.chars().next() {
                        Some(ch) => ch.to_string(),
                        None => return Err(self.err(start, "dangling backslash")),
                    }
                };
                let end = start + 1 + name.len();
                if SPACING.contains(&name.as_str()) || name == " " {
                    self.pos = end;
                    continue;
                }
                if !known_cmd(&name) {
                    return Err(LatexError::UnsupportedMacro { name, pos: start });
                }
                Token { tok: Tok::Cmd(name), start, end }
            } else if c.is_ascii_digit() {
                let mut len = trimmed.chars().take_while(|c| c.is_ascii_digit()).count();
                let tail = &trimmed[len..];
                if tail.starts_with('.') && tail[1..].starts_with(|c: char| c.is_ascii_digit()) {
                    len += 1 + tail[1..].chars().take_while(|c| c.is_ascii_digit()).count();
                }
                Token { tok: Tok::Num(trimmed[..len].to_string()), start, end: start + len }
            } else if c.is_ascii_alphabetic() {
                Token { tok: Tok::Letter(c), start, end: start + 1 }
            } else if "+-=<>()[]{}|^_/!,".contains(c) {
                Token { tok: Tok::Ch(c), start, end: start + 1 }
            } else {
                return Err(self.err(start, format!("unexpected character `{c}`")));
            };
            return Ok(Some(tok));
        }
    }

    fn next(&mut self) -> PResult<Option<Token>> {
        let t = self.peek()?;
        if let Some(t) = &t {
            self.pos = t.end;
        }
        Ok(t)
    }

    fn expect_ch(&mut self, ch: char) -> PResult<()> {
        match self.next()? {
            Some(Token { tok: Tok::Ch(c), .. }) if c == ch => Ok(()),
            Some(t) => Err(self.err(t.start, format!("expected `{ch}`"))),
            None => Err(self.err(self.src.len(), format!("expected `{ch}` before end of input"))),
        }
    }

    fn expr(&mut self) -> PResult<MathExpr> {
        self.binary(super::ast::prec::COMMA)
    }

    /// Left-associative binary levels from `level` (comma, relation,
    /// additive, multiplicative) down to juxtaposition.
    fn binary(&mut self, level: u8) -> PResult<MathExpr> {
        use super::ast::prec;
        if level == prec::ROW {
            return self.row(false);
        }
        let mut lhs = if level == prec::ADD { self.signed()? } else { self.binary(level + 1)? };
        while let Some(t) = self.peek()? {
            let Some(op) = binop_of(&t.tok).filter(|op| op.precedence() == level) else { break };
            self.pos = t.end;
            let rhs = if level == prec::ADD { self.signed()? } else { self.binary(level + 1)? };
            lhs = MathExpr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    /// Additive operand with an optional leading minus.
    fn signed(&mut self) -> PResult<MathExpr> {
        if let Some(Token { tok: Tok::Ch('-'), end, .. }) = self.peek()? {
            self.pos = end;
            let inner = self.binary(super::ast::prec::MUL)?;
            return Ok(MathExpr::Neg(Box::new(inner)));
        }
        self.binary(super::ast::prec::MUL)
    }

    fn starts_atom(&self, t: &Tok, stop_at_operators: bool) -> bool {
        match t {
            Tok::Num(_) | Tok::Letter(_) => true,
            Tok::Ch(c) => matches!(c, '(' | '[' | '{') || (*c == '|' && self.abs_depth == 0),
            Tok::Cmd(c) => {
                let opener = func_of(c).is_some() || bigop_of(c).is_some();
                if stop_at_operators && opener {
                    return false;
                }
                binop_of(t).is_none() && !matches!(c.as_str(), "right" | "}")
            }
        }
    }

    /// Juxtaposed postfix terms. Function arguments stop before the next
    /// function or large operator.
    fn row(&mut self, function_arg: bool) -> PResult<MathExpr> {
        let mut items = Vec::new();
        while let Some(t) = self.peek()? {
            if !self.starts_atom(&t.tok, function_arg && !items.is_empty()) {
                break;
            }
            items.push(self.postfix()?);
        }
        match items.len() {
            0 => {
                let pos = self.pos;
                match self.peek()? {
                    Some(t) => Err(self.unexpected(&t)),
                    None => Err(self.err(pos, "expected a term before end of input")),
                }
            }
            1 => Ok(items.pop().expect("one item")),
            _ => Ok(MathExpr::Row(items)),
        }
    }

    fn postfix(&mut self) -> PResult<MathExpr> {
        let mut base = self.atom()?;
        loop {
            match self.peek()? {
                Some(Token { tok: Tok::Ch('!'), end, .. }) => {
                    self.pos = end;
                    base = MathExpr::Factorial(Box::new(base));
                }
                Some(Token { tok: Tok::Ch('_' | '^'), .. }) => {
                    let (sub, sup) = self.scripts()?;
                    base = MathExpr::Script { base: Box::new(base), sub, sup };
                }
                _ => return Ok(base),
            }
        }
    }

    /// At most one subscript and one superscript, in either order.
    #[allow(clippy::type_complexity)]
    fn scripts(&mut self) -> PResult<(Option<Box<MathExpr>>, Option<Box<MathExpr>>)> {
        let (mut sub, mut sup) = (None, None);
        while let Some(t) = self.peek()? {
            let slot = match t.tok {
                Tok::Ch('_') => &mut sub,
                Tok::Ch('^') => &mut sup,
                _ => break,
            };
            if slot.is_some() {
                return Err(self.err(t.start, "double script"));
            }
            self.pos = t.end;
            *slot = Some(Box::new(self.argument()?));
        }
        Ok((sub, sup))
    }

    /// Macro or script argument: a braced expression or a single token.
    fn argument(&mut self) -> PResult<MathExpr> {
        let Some(t) = self.peek()? else {
            return Err(self.err(self.src.len(), "missing argument"));
        };
        match &t.tok {
            Tok::Ch('{') => {
                self.pos = t.end;
                let e = self.expr()?;
                self.expect_ch('}')?;
                Ok(e)
            }
            Tok::Num(n) => {
                // `x^23` is x squared followed by 3
                let first = &n[..1];
                self.pos = t.start + 1;
                Ok(MathExpr::Number(first.to_string()))
            }
            Tok::Letter(c) => {
                self.pos = t.end;
                Ok(MathExpr::Ident(*c))
            }
            Tok::Cmd(name) if GREEK.contains(&name.as_str()) || SYMBOLS.contains(&name.as_str()) => self.atom(),
            _ => Err(self.err(t.start, "expected an argument")),
        }
    }

    fn atom(&mut self) -> PResult<MathExpr> {
        let Some(t) = self.next()? else {
            return Err(self.err(self.src.len(), "unexpected end of input"));
        };
        match t.tok {
            Tok::Num(n) => Ok(MathExpr::Number(n)),
            Tok::Letter(c) => Ok(MathExpr::Ident(c)),
            Tok::Ch('{') => {
                let e = self.expr()?;
                self.expect_ch('}')?;
                Ok(e)
            }
            Tok::Ch('(') => self.delimited(Delim::Paren, ')'),
            Tok::Ch('[') => self.delimited(Delim::Bracket, ']'),
            Tok::Ch('|') => {
                self.abs_depth += 1;
                let inner = self.expr();
                self.abs_depth -= 1;
                let inner = inner?;
                self.expect_ch('|')?;
                Ok(MathExpr::Group { delim: Delim::Abs, inner: Box::new(inner) })
            }
            Tok::Cmd(name) => self.command(&name, t.start),
            _ => Err(self.unexpected(&t)),
        }
    }

    fn delimited(&mut self, delim: Delim, close: char) -> PResult<MathExpr> {
        let saved = self.abs_depth;
        self.abs_depth = 0;
        let inner = self.expr();
        self.abs_depth = saved;
        let inner = inner?;
        self.close(close)?;
        Ok(MathExpr::Group { delim, inner: Box::new(inner) })
    }

    /// Closing delimiter, optionally preceded by `\right`.
    fn close(&mut self, close: char) -> PResult<()> {
        if let Some(Token { tok: Tok::Cmd(c), end, .. }) = self.peek()? {
            if c == "right" {
                self.pos = end;
            }
        }
        if close == '}' {
            return match self.next()? {
                Some(Token { tok: Tok::Cmd(c), .. }) if c == "}" => Ok(()),
                Some(t) => Err(self.err(t.start, "expected `\\}`")),
                None => Err(self.err(self.src.len(), "unbalanced `\\{`")),
            };
        }
        match self.next()? {
            Some(Token { tok: Tok::Ch(c), .. }) if c == close => Ok(()),
            Some(t) => Err(self.err(t.start, format!("expected `{close}`"))),
            None => Err(self.err(self.src.len(), format!("unbalanced delimiter, expected `{close}`"))),
        }
    }

    fn command(&mut self, name: &str, start: usize) -> PResult<MathExpr> {
        if GREEK.contains(&name) {
            return Ok(MathExpr::Greek(name.to_string()));
        }
        if SYMBOLS.contains(&name) {
            return Ok(MathExpr::Symbol(name.to_string()));
        }
        if matches!(name, "dots" | "cdots") {
            return Ok(MathExpr::Symbol("ldots".into()));
        }
        match name {
            "frac" | "dfrac" | "tfrac" => {
                let num = self.argument()?;
                let den = self.argument()?;
                Ok(MathExpr::Frac(Box::new(num), Box::new(den)))
            }
            "sqrt" => {
                let index = match self.peek()? {
                    Some(Token { tok: Tok::Ch('['), end, .. }) => {
                        self.pos = end;
                        let idx = self.expr()?;
                        self.expect_ch(']')?;
                        Some(Box::new(idx))
                    }
                    _ => None,
                };
                let radicand = self.argument()?;
                Ok(MathExpr::Root { index, radicand: Box::new(radicand) })
            }
            "text" => self.text(),
            "left" => match self.next()? {
                Some(Token { tok: Tok::Ch('('), .. }) => self.delimited(Delim::Paren, ')'),
                Some(Token { tok: Tok::Ch('['), .. }) => self.delimited(Delim::Bracket, ']'),
                Some(Token { tok: Tok::Cmd(c), .. }) if c == "{" => self.delimited(Delim::Brace, '}'),
                Some(Token { tok: Tok::Ch('|'), .. }) => {
                    let inner = self.expr()?;
                    self.close('|')?;
                    Ok(MathExpr::Group { delim: Delim::Abs, inner: Box::new(inner) })
                }
                _ => Err(self.err(start, "unsupported delimiter after \\left")),
            },
            "{" => self.delimited(Delim::Brace, '}'),
            _ => {
                if let Some(op) = bigop_of(name) {
                    let (lower, upper) = self.scripts()?;
                    let body = match self.peek()? {
                        Some(t) if self.starts_atom(&t.tok, false) || t.tok == Tok::Ch('-') => {
                            Some(Box::new(self.signed()?))
                        }
                        _ => None,
                    };
                    return Ok(MathExpr::BigOp { op, lower, upper, body });
                }
                if let Some(func) = func_of(name) {
                    let (sub, sup) = self.scripts()?;
                    match self.peek()? {
                        Some(t) if self.starts_atom(&t.tok, false) => {}
                        _ => return Err(self.err(self.pos, format!("\\{name} needs an argument"))),
                    }
                    let arg = self.row(true)?;
                    return Ok(MathExpr::Apply { func, sub, sup, arg: Box::new(arg) });
                }
                Err(self.err(start, format!("`\\{name}` cannot start a term")))
            }
        }
    }

    /// Raw text up to the matching brace.
    fn text(&mut self) -> PResult<MathExpr> {
        self.expect_ch('{')?;
        let rest = &self.src[self.pos..];
        let mut depth = 0usize;
        for (i, c) in rest.char_indices() {
            match c {
                '{' => depth += 1,
                '}' if depth == 0 => {
                    let text = rest[..i].to_string();
                    self.pos += i + 1;
                    return Ok(MathExpr::Text(text));
                }
                '}' => depth -= 1,
                _ => {}
            }
        }
        Err(self.err(self.src.len(), "unbalanced braces in \\text"))
    }
}
