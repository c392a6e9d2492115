//! The expression mini-language: sequences, closed forms, and user claims are
//! all written in it.
//!
//! Grammar (authoritative):
//!
//! ```text
//! expr    := term (('+'|'-') term)* ;
//! term    := unary (('*'|'/') unary)* ;
//! unary   := '-' unary | power ;
//! power   := postfix ('^' unary)? ;
//! postfix := atom '!'* ;
//! atom    := INT | 'k' | 'n' | '(' expr ')' ;
//! INT     := [0-9]+ ;
//! ```
//!
//! Precedence, highest to lowest: postfix `!`; `^` (right-associative);
//! unary `-`; `*` `/`; `+` `-`. Whitespace is insignificant. `k` and `n` are
//! the only variables. Evaluation is exact over the rationals; `!` demands a
//! nonnegative integer argument and `^` a nonnegative integer exponent.

use std::fmt;

use crate::numeric::{BigInt, FactorialCache, NumericError, Rat};
use num_traits::{Signed, ToPrimitive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    K,
    N,
}

impl Var {
    pub fn name(self) -> char {
        match self {
            Var::K => 'k',
            Var::N => 'n',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(BigInt),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Factorial(Box<Expr>),
}

/// Values for the free variables; both are positive integers when present.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings {
    pub k: Option<u64>,
    pub n: Option<u64>,
}

impl Bindings {
    pub fn k(value: u64) -> Bindings {
        Bindings {
            k: Some(value),
            n: None,
        }
    }

    pub fn n(value: u64) -> Bindings {
        Bindings {
            k: None,
            n: Some(value),
        }
    }

    fn get(&self, var: Var) -> Option<u64> {
        match var {
            Var::K => self.k,
            Var::N => self.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at offset {offset} (only `k` and `n` are variables)")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero in `{expr}`")]
    DivisionByZero { expr: String },
    #[error("factorial of a value that is not a nonnegative integer ({value}) in `{expr}`")]
    FactorialDomain { expr: String, value: String },
    #[error("factorial cap exceeded in `{expr}`: {source}")]
    FactorialCap { expr: String, source: NumericError },
    #[error("exponent must be a nonnegative integer, got {value} in `{expr}`")]
    ExponentDomain { expr: String, value: String },
    #[error("exponent {value} in `{expr}` exceeds the supported range")]
    ExponentRange { expr: String, value: String },
    #[error("variable `{var}` is not bound")]
    UnboundVariable { var: char },
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Var(Var),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Bang,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Var(v) => format!("`{}`", v.name()),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Bang => "`!`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..i];
                out.push((Tok::Int(digits.parse::<BigInt>().unwrap()), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let name = &text[start..i];
                match name {
                    "k" => out.push((Tok::Var(Var::K), start)),
                    "n" => out.push((Tok::Var(Var::N), start)),
                    _ => {
                        return Err(ParseError::UnknownIdentifier {
                            offset: start,
                            name: name.to_string(),
                        })
                    }
                }
            }
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            '!' => {
                out.push((Tok::Bang, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            other => {
                return Err(ParseError::Syntax {
                    offset: i,
                    expected: "a token".into(),
                    found: format!("`{other}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if self.peek() == &tok {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax {
                offset: self.offset(),
                expected: expected.to_string(),
                found: self.peek().describe(),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == &Tok::Minus {
            self.bump();
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.postfix()?;
        if self.peek() == &Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            Ok(Expr::Pow(Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        while self.peek() == &Tok::Bang {
            self.bump();
            e = Expr::Factorial(Box::new(e));
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Var(v) => {
                self.bump();
                Ok(Expr::Var(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            other => Err(ParseError::Syntax {
                offset: self.offset(),
                expected: "an integer, `k`, `n`, or `(`".into(),
                found: other.describe(),
            }),
        }
    }
}

/// Parses the mini-language into an [`Expr`].
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        return Err(ParseError::Syntax {
            offset: p.offset(),
            expected: "end of input".into(),
            found: p.peek().describe(),
        });
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Pretty-printing
// ---------------------------------------------------------------------------

// Binding strength used to decide parentheses; parse(pretty(e)) must rebuild
// the identical tree.
fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Factorial(..) => 5,
        Expr::Int(..) | Expr::Var(..) => 6,
    }
}

fn write_expr(e: &Expr, min: u8, out: &mut String) {
    let lv = level(e);
    let parens = lv < min;
    if parens {
        out.push('(');
    }
    match e {
        Expr::Int(v) => out.push_str(&v.to_string()),
        Expr::Var(v) => out.push(v.name()),
        Expr::Neg(x) => {
            out.push('-');
            write_expr(x, 3, out);
        }
        Expr::Add(l, r) => {
            write_expr(l, 1, out);
            out.push_str(" + ");
            write_expr(r, 2, out);
        }
        Expr::Sub(l, r) => {
            write_expr(l, 1, out);
            out.push_str(" - ");
            write_expr(r, 2, out);
        }
        Expr::Mul(l, r) => {
            write_expr(l, 2, out);
            out.push('*');
            write_expr(r, 3, out);
        }
        Expr::Div(l, r) => {
            write_expr(l, 2, out);
            out.push('/');
            write_expr(r, 3, out);
        }
        Expr::Pow(b, x) => {
            write_expr(b, 5, out);
            out.push('^');
            write_expr(x, 3, out);
        }
        Expr::Factorial(x) => {
            write_expr(x, 5, out);
            out.push('!');
        }
    }
    if parens {
        out.push(')');
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(self, 0, &mut s);
        f.write_str(&s)
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

impl Expr {
    pub fn int<T: Into<BigInt>>(value: T) -> Expr {
        let v: BigInt = value.into();
        if v.is_negative() {
            Expr::Neg(Box::new(Expr::Int(-v)))
        } else {
            Expr::Int(v)
        }
    }

    /// Which variables occur in the tree, as (uses k, uses n).
    pub fn variables(&self) -> (bool, bool) {
        match self {
            Expr::Int(_) => (false, false),
            Expr::Var(Var::K) => (true, false),
            Expr::Var(Var::N) => (false, true),
            Expr::Neg(x) | Expr::Factorial(x) => x.variables(),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r)
            | Expr::Pow(l, r) => {
                let (lk, ln) = l.variables();
                let (rk, rn) = r.variables();
                (lk || rk, ln || rn)
            }
        }
    }

    /// Exact evaluation with the process-wide factorial cache.
    pub fn eval(&self, bindings: &Bindings) -> Result<Rat, EvalError> {
        self.eval_in(bindings, crate::numeric::global_factorials())
    }

    /// Exact evaluation against an explicit factorial cache.
    pub fn eval_in(
        &self,
        bindings: &Bindings,
        factorials: &FactorialCache,
    ) -> Result<Rat, EvalError> {
        match self {
            Expr::Int(v) => Ok(Rat::from_int(v.clone())),
            Expr::Var(v) => bindings
                .get(*v)
                .map(Rat::from)
                .ok_or(EvalError::UnboundVariable { var: v.name() }),
            Expr::Neg(x) => Ok(-x.eval_in(bindings, factorials)?),
            Expr::Add(l, r) => {
                Ok(&l.eval_in(bindings, factorials)? + &r.eval_in(bindings, factorials)?)
            }
            Expr::Sub(l, r) => {
                Ok(&l.eval_in(bindings, factorials)? - &r.eval_in(bindings, factorials)?)
            }
            Expr::Mul(l, r) => {
                Ok(&l.eval_in(bindings, factorials)? * &r.eval_in(bindings, factorials)?)
            }
            Expr::Div(l, r) => {
                let num = l.eval_in(bindings, factorials)?;
                let den = r.eval_in(bindings, factorials)?;
                num.checked_div(&den)
                    .map_err(|_| EvalError::DivisionByZero {
                        expr: self.to_string(),
                    })
            }
            Expr::Pow(b, x) => {
                let base = b.eval_in(bindings, factorials)?;
                let exp = x.eval_in(bindings, factorials)?;
                let Some(e) = exp.to_integer().filter(|e| !e.is_negative()) else {
                    return Err(EvalError::ExponentDomain {
                        expr: self.to_string(),
                        value: exp.to_string(),
                    });
                };
                let Some(e32) = e.to_u32() else {
                    return Err(EvalError::ExponentRange {
                        expr: self.to_string(),
                        value: exp.to_string(),
                    });
                };
                Ok(base.pow(e32))
            }
            Expr::Factorial(x) => {
                let arg = x.eval_in(bindings, factorials)?;
                let Some(m) = arg.to_integer().filter(|m| !m.is_negative()) else {
                    return Err(EvalError::FactorialDomain {
                        expr: self.to_string(),
                        value: arg.to_string(),
                    });
                };
                // Anything beyond the cap is rejected before the u64 narrowing.
                if m > BigInt::from(factorials.cap()) {
                    return Err(EvalError::FactorialCap {
                        expr: self.to_string(),
                        source: NumericError::FactorialCap {
                            m: m.to_u64().unwrap_or(u64::MAX),
                            cap: factorials.cap(),
                        },
                    });
                }
                let value = factorials.get(m.to_u64().unwrap()).map_err(|source| {
                    EvalError::FactorialCap {
                        expr: self.to_string(),
                        source,
                    }
                })?;
                Ok(Rat::from_int(value))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn parse_polynomial() {
        // k^2 + k + 1, left-assoc sum
        let e = parse("k^2 + k + 1").unwrap();
        assert_eq!(
            e,
            Expr::Add(
                b(Expr::Add(
                    b(Expr::Pow(b(Expr::Var(Var::K)), b(Expr::Int(BigInt::from(2))))),
                    b(Expr::Var(Var::K)),
                )),
                b(Expr::Int(BigInt::from(1))),
            )
        );
    }

    #[test]
    fn parse_factorial_bound() {
        let e = parse("2*((n+1)! - 1)/(n+1)").unwrap();
        let n_plus_1 = || Expr::Add(b(Expr::Var(Var::N)), b(Expr::Int(BigInt::from(1))));
        assert_eq!(
            e,
            Expr::Div(
                b(Expr::Mul(
                    b(Expr::Int(BigInt::from(2))),
                    b(Expr::Sub(
                        b(Expr::Factorial(b(n_plus_1()))),
                        b(Expr::Int(BigInt::from(1))),
                    )),
                )),
                b(n_plus_1()),
            )
        );
    }

    #[test]
    fn unbalanced_paren_reports_offset() {
        let err = parse("(k").unwrap_err();
        match err {
            ParseError::Syntax {
                offset, expected, ..
            } => {
                assert_eq!(offset, 2);
                assert!(expected.contains(")"), "{expected}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_is_rejected() {
        let err = parse("2*x").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                offset: 2,
                name: "x".into()
            }
        );
    }

    #[test]
    fn trailing_input_is_rejected() {
        let err = parse("2 3").unwrap_err();
        assert_eq!(err.offset(), 2);
    }

    fn eval_str(text: &str, bindings: Bindings) -> Result<Rat, EvalError> {
        parse(text).unwrap().eval(&bindings)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(
            eval_str("k^2+k+1", Bindings::k(2)).unwrap(),
            Rat::from_int(7)
        );
        assert_eq!(
            eval_str("(n+1)!-1", Bindings::n(3)).unwrap(),
            Rat::from_int(23)
        );
    }

    #[test]
    fn eval_division_by_zero() {
        let err = eval_str("1/(k-1)", Bindings::k(1)).unwrap_err();
        assert_eq!(
            err,
            EvalError::DivisionByZero {
                expr: "1/(k - 1)".into()
            }
        );
    }

    #[test]
    fn eval_factorial_domain() {
        let err = eval_str("(1/2)!", Bindings::default()).unwrap_err();
        match err {
            EvalError::FactorialDomain { expr, value } => {
                assert_eq!(expr, "(1/2)!");
                assert_eq!(value, "1/2");
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(matches!(
            eval_str("(0-3)!", Bindings::default()).unwrap_err(),
            EvalError::FactorialDomain { .. }
        ));
    }

    #[test]
    fn eval_exponent_domain() {
        assert!(matches!(
            eval_str("2^(1/2)", Bindings::default()).unwrap_err(),
            EvalError::ExponentDomain { .. }
        ));
        assert!(matches!(
            eval_str("2^-1", Bindings::default()).unwrap_err(),
            EvalError::ExponentDomain { .. }
        ));
    }

    #[test]
    fn eval_unbound_variable() {
        assert_eq!(
            eval_str("k+1", Bindings::default()).unwrap_err(),
            EvalError::UnboundVariable { var: 'k' }
        );
    }

    #[test]
    fn precedence_fixtures() {
        let cases = [
            ("2+3*4", 14i64),
            ("2^3^2", 512),
            ("3!", 6),
            ("-2^2", -4),
        ];
        for (text, expected) in cases {
            assert_eq!(
                eval_str(text, Bindings::default()).unwrap(),
                Rat::from_int(expected),
                "{text}"
            );
        }
    }

    #[test]
    fn factorial_chains_and_pow_bases() {
        assert_eq!(eval_str("3!!", Bindings::default()).unwrap(), Rat::from_int(720));
        // `!` binds tighter than `^`: 2^3! = 2^6
        assert_eq!(eval_str("2^3!", Bindings::default()).unwrap(), Rat::from_int(64));
    }

    #[test]
    fn eval_respects_cache_cap() {
        let small = FactorialCache::with_cap(5);
        let e = parse("(n+1)!").unwrap();
        assert!(e.eval_in(&Bindings::n(4), &small).is_ok());
        assert!(matches!(
            e.eval_in(&Bindings::n(5), &small).unwrap_err(),
            EvalError::FactorialCap { .. }
        ));
    }

    #[test]
    fn pretty_print_spacing() {
        let e = parse("2*((n+1)!-1)/(n+1)").unwrap();
        assert_eq!(e.to_string(), "2*((n + 1)! - 1)/(n + 1)");
        let e = parse("-2^2").unwrap();
        assert_eq!(e.to_string(), "-2^2");
        let e = Expr::Pow(b(Expr::Neg(b(Expr::Int(BigInt::from(2))))), b(Expr::Int(BigInt::from(2))));
        assert_eq!(e.to_string(), "(-2)^2");
    }

    pub(super) fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u64..1_000_000).prop_map(|v| Expr::Int(BigInt::from(v))),
            Just(Expr::Var(Var::K)),
            Just(Expr::Var(Var::N)),
        ];
        leaf.prop_recursive(5, 64, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                inner.clone().prop_map(|e| Expr::Factorial(Box::new(e))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Pow(Box::new(a), Box::new(b))),
            ]
        })
    }

    // Small leaves keep randomized evaluation cheap; nested `^` towers over
    // large literals would otherwise produce numbers with millions of digits.
    fn arb_small_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u64..12).prop_map(|v| Expr::Int(BigInt::from(v))),
            Just(Expr::Var(Var::K)),
            Just(Expr::Var(Var::N)),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            let small_exp = (0u64..6).prop_map(|v| Expr::Int(BigInt::from(v)));
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                inner.clone().prop_map(|e| Expr::Factorial(Box::new(e))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
                (inner.clone(), small_exp).prop_map(|(a, b)| Expr::Pow(Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn pretty_print_round_trips(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse(&printed)
                .unwrap_or_else(|err| panic!("`{printed}` failed to reparse: {err}"));
            prop_assert_eq!(reparsed, e);
        }

        #[test]
        fn eval_is_deterministic(e in arb_small_expr()) {
            let bindings = Bindings { k: Some(3), n: Some(7) };
            let first = e.eval(&bindings);
            let second = e.eval(&bindings);
            prop_assert_eq!(first, second);
        }
    }
}
