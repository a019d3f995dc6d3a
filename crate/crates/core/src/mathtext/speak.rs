//! Verbose English MathSpeak.

use super::ast::{BigOpKind, BinOp, Delim, Func, MathExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Level {
    Sub,
    Sup,
}

#[derive(Debug, Clone, PartialEq)]
enum Word {
    Text(String),
    /// Announcement of the script level the following words sit on.
    Level(Vec<Level>),
}

/// Name of a script level: `Baseline` at the base, otherwise the path with
/// all but the last step shortened, e.g. `SuperSubscript`.
fn level_name(path: &[Level]) -> String {
    let Some((last, init)) = path.split_last() else { return "Baseline".into() };
    let mut s: String = init
        .iter()
        .map(|l| match l {
            Level::Sub => "Sub",
            Level::Sup => "Super",
        })
        .collect();
    s.push_str(match last {
        Level::Sub => "Subscript",
        Level::Sup => "Superscript",
    });
    s
}

pub fn to_mathspeak(expr: &MathExpr) -> String {
    let mut sp = Speaker { words: Vec::new(), path: Vec::new(), root_depth: 0 };
    sp.expr(expr);
    // consecutive level changes collapse into the last one
    let mut out: Vec<String> = Vec::new();
    let mut pending: Option<Vec<Level>> = None;
    for w in sp.words {
        match w {
            Word::Level(p) => pending = Some(p),
            Word::Text(t) => {
                if let Some(p) = pending.take() {
                    out.push(level_name(&p));
                }
                out.push(t);
            }
        }
    }
    if let Some(p) = pending {
        out.push(level_name(&p));
    }
    out.join(" ")
}

fn op_words(op: BinOp) -> &'static str {
    match op {
        BinOp::Comma => "comma",
        BinOp::Eq => "equals",
        BinOp::Neq => "not-equals",
        BinOp::Lt => "less-than",
        BinOp::Gt => "greater-than",
        BinOp::Le => "less-than-or-equal-to",
        BinOp::Ge => "greater-than-or-equal-to",
        BinOp::Approx => "almost-equals",
        BinOp::To => "right-arrow",
        BinOp::In => "element-of",
        BinOp::Plus => "plus",
        BinOp::Minus => "minus",
        BinOp::PlusMinus => "plus-or-minus",
        BinOp::Times => "times",
        BinOp::Cdot => "dot",
        BinOp::Div => "divided-by",
        BinOp::Slash => "slash",
    }
}

fn func_words(f: Func) -> &'static str {
    match f {
        Func::Sin => "sine",
        Func::Cos => "cosine",
        Func::Tan => "tangent",
        Func::Log => "log",
        Func::Ln => "natural-log",
        Func::Exp => "exp",
        Func::Max => "max",
        Func::Min => "min",
    }
}

fn greek_words(name: &str) -> String {
    let base = name.strip_prefix("var").unwrap_or(name);
    let mut chars = base.chars();
    let first = chars.next().expect("greek names are non-empty");
    let spoken = if first.is_uppercase() {
        format!("upper {}{}", first.to_lowercase(), chars.as_str())
    } else {
        base.to_string()
    };
    if name.starts_with("var") {
        format!("variant {spoken}")
    } else {
        spoken
    }
}

fn symbol_words(name: &str) -> &'static str {
    match name {
        "infty" => "infinity",
        "partial" => "partial-differential",
        "ldots" => "ellipsis",
        "nabla" => "nabla",
        _ => "symbol",
    }
}

struct Speaker {
    words: Vec<Word>,
    path: Vec<Level>,
    root_depth: usize,
}

impl Speaker {
    fn say(&mut self, s: impl Into<String>) {
        self.words.push(Word::Text(s.into()));
    }

    fn scripted(&mut self, level: Level, e: &MathExpr) {
        self.path.push(level);
        self.words.push(Word::Level(self.path.clone()));
        self.expr(e);
        self.path.pop();
    }

    fn scripts(&mut self, sub: Option<&MathExpr>, sup: Option<&MathExpr>) {
        if let Some(s) = sub {
            self.scripted(Level::Sub, s);
        }
        if let Some(s) = sup {
            self.scripted(Level::Sup, s);
        }
        if sub.is_some() || sup.is_some() {
            self.words.push(Word::Level(self.path.clone()));
        }
    }

    fn expr(&mut self, e: &MathExpr) {
        match e {
            MathExpr::Number(n) => self.say(n.clone()),
            MathExpr::Ident(c) if c.is_ascii_uppercase() => self.say(format!("upper {c}")),
            MathExpr::Ident(c) => self.say(c.to_string()),
            MathExpr::Greek(g) => self.say(greek_words(g)),
            MathExpr::Symbol(s) => self.say(symbol_words(s)),
            MathExpr::Text(t) => {
                let t = t.split_whitespace().collect::<Vec<_>>().join(" ");
                if !t.is_empty() {
                    self.say(t);
                }
            }
            MathExpr::Binary { op, lhs, rhs } => {
                self.expr(lhs);
                self.say(op_words(*op));
                self.expr(rhs);
            }
            MathExpr::Neg(inner) => {
                self.say("negative");
                self.expr(inner);
            }
            MathExpr::Row(items) => items.iter().for_each(|i| self.expr(i)),
            MathExpr::Frac(a, b) => {
                let depth = e.fraction_height();
                let rep = |w: &str| w.repeat(depth);
                self.say(format!("{}Fraction", rep("Start")));
                self.expr(a);
                self.say(rep("Over"));
                self.expr(b);
                self.say(format!("{}Fraction", rep("End")));
            }
            MathExpr::Script { base, sub, sup } => {
                self.expr(base);
                self.scripts(sub.as_deref(), sup.as_deref());
            }
            MathExpr::Root { index, radicand } => {
                let nested = "Nested".repeat(self.root_depth);
                if let Some(i) = index {
                    self.say("RootIndex");
                    self.expr(i);
                }
                self.say(format!("Start{nested}Root"));
                self.root_depth += 1;
                self.expr(radicand);
                self.root_depth -= 1;
                self.say(format!("End{nested}Root"));
            }
            MathExpr::Group { delim, inner } => {
                let (open, close) = match delim {
                    Delim::Paren => ("left-parenthesis", "right-parenthesis"),
                    Delim::Bracket => ("left-bracket", "right-bracket"),
                    Delim::Brace => ("left-brace", "right-brace"),
                    Delim::Abs => ("StartAbsoluteValue", "EndAbsoluteValue"),
                };
                self.say(open);
                self.expr(inner);
                self.say(close);
            }
            MathExpr::BigOp { op, lower, upper, body } => {
                match op {
                    BigOpKind::Int => {
                        self.say("integral");
                        self.scripts(lower.as_deref(), upper.as_deref());
                    }
                    _ => {
                        self.say(match op {
                            BigOpKind::Sum => "sigma-summation",
                            BigOpKind::Prod => "product",
                            _ => "limit",
                        });
                        if let Some(l) = lower {
                            self.say("Underscript");
                            self.expr(l);
                        }
                        if let Some(u) = upper {
                            self.say("Overscript");
                            self.expr(u);
                        }
                        if lower.is_some() || upper.is_some() {
                            self.say("Endscripts");
                        }
                    }
                }
                if let Some(b) = body {
                    self.expr(b);
                }
            }
            MathExpr::Apply { func, sub, sup, arg } => {
                self.say(func_words(*func));
                self.scripts(sub.as_deref(), sup.as_deref());
                self.expr(arg);
            }
            MathExpr::Factorial(inner) => {
                self.expr(inner);
                self.say("factorial");
            }
        }
    }
}
