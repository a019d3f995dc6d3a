//! Canonical LaTeX printing. Braces are inserted wherever the parser would
//! otherwise group differently, so printing and reparsing is structurally
//! the identity.

use super::ast::{prec, BigOpKind, BinOp, Delim, MathExpr};

pub fn to_latex(expr: &MathExpr) -> String {
    let mut out = String::new();
    print(expr, prec::COMMA, 0, &mut out);
    out.trim().to_string()
}

fn op_text(op: BinOp) -> &'static str {
    match op {
        BinOp::Comma => ",",
        BinOp::Eq => "=",
        BinOp::Neq => "\\neq",
        BinOp::Lt => "<",
        BinOp::Gt => ">",
        BinOp::Le => "\\le",
        BinOp::Ge => "\\ge",
        BinOp::Approx => "\\approx",
        BinOp::To => "\\to",
        BinOp::In => "\\in",
        BinOp::Plus => "+",
        BinOp::Minus => "-",
        BinOp::PlusMinus => "\\pm",
        BinOp::Times => "\\times",
        BinOp::Cdot => "\\cdot",
        BinOp::Div => "\\div",
        BinOp::Slash => "/",
    }
}

fn push_token(out: &mut String, tok: &str) {
    if !out.is_empty() && !out.ends_with([' ', '{', '(', '[', '|']) {
        out.push(' ');
    }
    out.push_str(tok);
}

fn braced(expr: &MathExpr, out: &mut String) {
    push_token(out, "{");
    print(expr, prec::COMMA, 0, out);
    out.push('}');
}

/// Prints `expr` where the context binds at `min` and the next thing to the
/// right binds at `follow` (0 when nothing follows). Open-ended constructs
/// (large operators absorb a product, functions a juxtaposition) are braced
/// when something they would swallow comes next.
fn print(expr: &MathExpr, min: u8, follow: u8, out: &mut String) {
    let open_ended = match expr {
        MathExpr::BigOp { .. } => follow >= prec::MUL,
        MathExpr::Apply { .. } => follow >= prec::ROW,
        _ => false,
    };
    let nested_row = matches!(expr, MathExpr::Row(_)) && min > prec::ROW;
    let nested_script = matches!(expr, MathExpr::Script { .. }) && min > prec::POSTFIX;
    if expr.precedence() < min || open_ended || nested_row || nested_script {
        braced(expr, out);
        return;
    }
    match expr {
        MathExpr::Number(n) => push_token(out, n),
        MathExpr::Ident(c) => push_token(out, &c.to_string()),
        MathExpr::Greek(g) | MathExpr::Symbol(g) => push_token(out, &format!("\\{g}")),
        MathExpr::Text(t) => push_token(out, &format!("\\text{{{t}}}")),
        MathExpr::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            print(lhs, p, p, out);
            push_token(out, op_text(*op));
            print(rhs, p + 1, follow, out);
        }
        MathExpr::Neg(inner) => {
            push_token(out, "-");
            print(inner, prec::MUL, follow, out);
        }
        MathExpr::Row(items) => {
            for (i, item) in items.iter().enumerate() {
                let next = if i + 1 < items.len() { prec::ROW } else { follow };
                print(item, prec::ROW + 1, next, out);
            }
        }
        MathExpr::Frac(a, b) => {
            push_token(out, "\\frac");
            braced(a, out);
            braced(b, out);
        }
        MathExpr::Script { base, sub, sup } => {
            // a script base must not itself carry scripts
            print(base, prec::ATOM, 0, out);
            scripts(sub.as_deref(), sup.as_deref(), out);
        }
        MathExpr::Factorial(inner) => {
            print(inner, prec::POSTFIX, 0, out);
            out.push('!');
        }
        MathExpr::Root { index, radicand } => {
            push_token(out, "\\sqrt");
            if let Some(i) = index {
                out.push('[');
                print(i, prec::COMMA, 0, out);
                out.push(']');
            }
            braced(radicand, out);
        }
        MathExpr::Group { delim, inner } => {
            let (open, close) = match delim {
                Delim::Paren => ("(", ")"),
                Delim::Bracket => ("[", "]"),
                Delim::Brace => ("\\{", "\\}"),
                Delim::Abs => ("|", "|"),
            };
            push_token(out, open);
            print(inner, prec::COMMA, 0, out);
            push_token(out, close);
        }
        MathExpr::BigOp { op, lower, upper, body } => {
            push_token(
                out,
                match op {
                    BigOpKind::Sum => "\\sum",
                    BigOpKind::Prod => "\\prod",
                    BigOpKind::Int => "\\int",
                    BigOpKind::Lim => "\\lim",
                },
            );
            scripts(lower.as_deref(), upper.as_deref(), out);
            if let Some(b) = body {
                braced(b, out);
            }
        }
        MathExpr::Apply { func, sub, sup, arg } => {
            push_token(out, &format!("\\{}", func.macro_name()));
            scripts(sub.as_deref(), sup.as_deref(), out);
            braced(arg, out);
        }
    }
}

fn scripts(sub: Option<&MathExpr>, sup: Option<&MathExpr>, out: &mut String) {
    if let Some(s) = sub {
        out.push('_');
        out.push('{');
        print(s, prec::COMMA, 0, out);
        out.push('}');
    }
    if let Some(s) = sup {
        out.push('^');
        out.push('{');
        print(s, prec::COMMA, 0, out);
        out.push('}');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathtext::parse_latex;

    fn roundtrip(src: &str) {
        let ast = parse_latex(src).unwrap();
        let printed = to_latex(&ast);
        assert_eq!(parse_latex(&printed).unwrap(), ast, "{src} -> {printed}");
    }

    #[test]
    fn reparse_is_identity() {
        for src in [
            "\\frac{1}{2}",
            "x^{2}+1",
            "a-(b-c)",
            "a-{b-c}",
            "2{x+1}",
            "-x^2",
            "\\sum_{i=1}^{n} i^2 + 1",
            "{\\sum_i x} y",
            "\\sin x \\cos y",
            "\\sin {x \\cos y}",
            "\\sqrt[3]{x}",
            "|x|+|y|",
            "n!^2",
            "{x^2}^3",
            "\\lim_{x \\to 0} \\frac{\\sin x}{x} = 1",
            "\\int_0^1 x \\, dx",
            "a, b",
            "\\text{if } x > 0",
        ] {
            roundtrip(src);
        }
    }

    #[test]
    fn canonical_spacing() {
        assert_eq!(to_latex(&parse_latex("x^{2}+1").unwrap()), "x^{2} + 1");
    }
}
