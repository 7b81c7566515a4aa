//! Recursive-descent parser and evaluator for sequence expressions.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor (("*"|"/") factor)* ;
//! factor := unary ("^" factor)? ;            right-associative
//! unary  := "-"? base ;
//! base   := NUMBER | "n" | "(" expr ")" | FUNC "(" expr ")" ;
//! FUNC   := "exp"|"log"|"sin"|"cos"|"sqrt"|"abs" ;
//! NUMBER := decimal literal with optional fraction and exponent ;
//! ```
//!
//! The only variable is the index `n`; there are no user-defined functions.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
        }
    }
}

/// Expression tree over numeric literals and the index variable `n`.
#[derive(Clone, Debug, PartialEq)]
pub enum SeqExpr {
    Number(f64),
    Index,
    Add(Box<SeqExpr>, Box<SeqExpr>),
    Sub(Box<SeqExpr>, Box<SeqExpr>),
    Mul(Box<SeqExpr>, Box<SeqExpr>),
    Div(Box<SeqExpr>, Box<SeqExpr>),
    Pow(Box<SeqExpr>, Box<SeqExpr>),
    Neg(Box<SeqExpr>),
    Call(Func, Box<SeqExpr>),
}

impl SeqExpr {
    /// Evaluate at index value `n`.
    pub fn eval(&self, n: f64) -> f64 {
        match self {
            SeqExpr::Number(v) => *v,
            SeqExpr::Index => n,
            SeqExpr::Add(a, b) => a.eval(n) + b.eval(n),
            SeqExpr::Sub(a, b) => a.eval(n) - b.eval(n),
            SeqExpr::Mul(a, b) => a.eval(n) * b.eval(n),
            SeqExpr::Div(a, b) => a.eval(n) / b.eval(n),
            SeqExpr::Pow(a, b) => pow_real(a.eval(n), b.eval(n)),
            SeqExpr::Neg(a) => -a.eval(n),
            SeqExpr::Call(f, a) => f.apply(a.eval(n)),
        }
    }
}

/// Real power with the sign of negative integer-exponent cases taken exactly
/// by parity, so forms like `(-1)^(n+1)` never fall into NaN.
fn pow_real(base: f64, exp: f64) -> f64 {
    if base < 0.0 && exp.fract() == 0.0 && exp.abs() < 9.007_199_254_740_992e15 {
        let mag = base.abs().powf(exp);
        if exp % 2.0 == 0.0 {
            mag
        } else {
            -mag
        }
    } else {
        base.powf(exp)
    }
}

/// Parse a sequence expression, reporting failures with their byte offset.
pub fn parse_seq(text: &str) -> Result<SeqExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.pos >= p.src.len() {
        return Err(Error::Syntax {
            offset: p.pos,
            message: "empty input".into(),
        });
    }
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(Error::Syntax {
            offset: p.pos,
            message: format!("unexpected `{}`", p.src[p.pos] as char),
        });
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Syntax {
                offset: self.pos,
                message: format!("expected `{}`", c as char),
            })
        }
    }

    fn expr(&mut self) -> Result<SeqExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = SeqExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = SeqExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<SeqExpr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = SeqExpr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = SeqExpr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<SeqExpr> {
        let lhs = self.unary()?;
        if self.eat(b'^') {
            let rhs = self.factor()?;
            Ok(SeqExpr::Pow(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<SeqExpr> {
        if self.eat(b'-') {
            Ok(SeqExpr::Neg(Box::new(self.base()?)))
        } else {
            self.base()
        }
    }

    fn base(&mut self) -> Result<SeqExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(Error::Syntax {
                offset: self.pos,
                message: format!("unexpected `{}`", c as char),
            }),
            None => Err(Error::Syntax {
                offset: self.pos,
                message: "unexpected end of input".into(),
            }),
        }
    }

    fn number(&mut self) -> Result<SeqExpr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let frac_start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == frac_start {
                return Err(Error::Syntax {
                    offset: self.pos,
                    message: "expected digits after `.`".into(),
                });
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                self.pos += 1;
            }
            let exp_start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == exp_start {
                // Not an exponent after all (e.g. `2e` would be `2 * e...`);
                // the grammar has no such form, so report it at the `e`.
                self.pos = mark;
                return Err(Error::Syntax {
                    offset: mark,
                    message: "expected digits in exponent".into(),
                });
            }
        }
        let lit = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii literal");
        let value: f64 = lit.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("invalid numeric literal `{lit}`"),
        })?;
        if !value.is_finite() {
            return Err(Error::Syntax {
                offset: start,
                message: format!("numeric literal `{lit}` out of range"),
            });
        }
        Ok(SeqExpr::Number(value))
    }

    fn identifier(&mut self) -> Result<SeqExpr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        if name == "n" {
            return Ok(SeqExpr::Index);
        }
        if let Some(f) = Func::from_name(name) {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(SeqExpr::Call(f, Box::new(arg)));
        }
        Err(Error::UnknownIdentifier {
            offset: start,
            name: name.to_string(),
        })
    }
}

// Printing is fully parenthesized so that `parse(print(ast)) == ast` for any
// parser-produced tree.
impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqExpr::Number(v) => write!(f, "{v:?}"),
            SeqExpr::Index => write!(f, "n"),
            SeqExpr::Add(a, b) => write!(f, "({a} + {b})"),
            SeqExpr::Sub(a, b) => write!(f, "({a} - {b})"),
            SeqExpr::Mul(a, b) => write!(f, "({a} * {b})"),
            SeqExpr::Div(a, b) => write!(f, "({a} / {b})"),
            SeqExpr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            SeqExpr::Neg(a) => write!(f, "(-{a})"),
            SeqExpr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn num(v: f64) -> Box<SeqExpr> {
        Box::new(SeqExpr::Number(v))
    }

    #[test]
    fn parses_alternating_harmonic_factor() {
        // exp((-1)^(n+1)/n)
        let got = parse_seq("exp((-1)^(n+1)/n)").unwrap();
        let want = SeqExpr::Call(
            Func::Exp,
            Box::new(SeqExpr::Div(
                Box::new(SeqExpr::Pow(
                    Box::new(SeqExpr::Neg(num(1.0))),
                    Box::new(SeqExpr::Add(Box::new(SeqExpr::Index), num(1.0))),
                )),
                Box::new(SeqExpr::Index),
            )),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn parses_one_plus_reciprocal() {
        let got = parse_seq("1 + 1/n").unwrap();
        let want = SeqExpr::Add(num(1.0), Box::new(SeqExpr::Div(num(1.0), Box::new(SeqExpr::Index))));
        assert_eq!(got, want);
    }

    #[test]
    fn unclosed_expression_reports_offset() {
        match parse_seq("exp(1/n^") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 8),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_reports_name_and_offset() {
        match parse_seq("1 + foo(n)") {
            Err(Error::UnknownIdentifier { offset, name }) => {
                assert_eq!(offset, 4);
                assert_eq!(name, "foo");
            }
            other => panic!("expected unknown identifier error, got {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_a_syntax_error() {
        assert!(matches!(parse_seq("   "), Err(Error::Syntax { offset: 3, .. })));
    }

    #[test]
    fn power_is_right_associative() {
        let got = parse_seq("2^3^2").unwrap();
        assert_eq!(got.eval(1.0), 512.0);
    }

    #[test]
    fn negative_base_integer_power_by_parity() {
        let e = parse_seq("(-1)^(n+1)").unwrap();
        assert_eq!(e.eval(1.0), 1.0);
        assert_eq!(e.eval(2.0), -1.0);
        assert_eq!(e.eval(1_000_000.0), -1.0);
    }

    #[test]
    fn print_parse_round_trip_on_samples() {
        for text in [
            "exp((-1)^(n+1)/n)",
            "1 + 1/n",
            "(4*n^2)/(4*n^2-1)",
            "sqrt(abs(cos(n))) + 1e-3",
            "2^-3",
            "n/(n+1)",
            "(1/2)^((-1)^(n+1))",
        ] {
            let ast = parse_seq(text).unwrap();
            let printed = ast.to_string();
            let reparsed = parse_seq(&printed).unwrap();
            assert_eq!(ast, reparsed, "round trip failed for `{text}` -> `{printed}`");
        }
    }

    fn arb_expr() -> impl Strategy<Value = SeqExpr> {
        let leaf = prop_oneof![
            (0.001f64..1000.0).prop_map(SeqExpr::Number),
            Just(SeqExpr::Index),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| SeqExpr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| SeqExpr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| SeqExpr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| SeqExpr::Div(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| SeqExpr::Pow(Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| SeqExpr::Neg(Box::new(a))),
                inner.prop_map(|a| SeqExpr::Call(Func::Exp, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(ast in arb_expr()) {
            let printed = ast.to_string();
            let reparsed = parse_seq(&printed).unwrap();
            prop_assert_eq!(ast, reparsed);
        }
    }
}
