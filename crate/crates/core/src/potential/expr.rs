//! Small expression language for user-defined potentials.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          right-associative
//! atom   := number | 'x' | param | func '(' expr ')' | '(' expr ')'
//! func   := abs | exp | ln | sqrt | sin | cos | tanh
//! ```
//!
//! Parameters are resolved when parsing, so evaluation never sees an unknown name.

use std::collections::BTreeMap;
use std::fmt;

use super::dual::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Abs,
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tanh,
}

impl UnaryOp {
    fn function(name: &str) -> Option<Self> {
        Some(match name {
            "abs" => Self::Abs,
            "exp" => Self::Exp,
            "ln" => Self::Ln,
            "sqrt" => Self::Sqrt,
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "tanh" => Self::Tanh,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Neg => "-",
            Self::Abs => "abs",
            Self::Exp => "exp",
            Self::Ln => "ln",
            Self::Sqrt => "sqrt",
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Tanh => "tanh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            Self::Add => "+",
            Self::Sub => "-",
            Self::Mul => "*",
            Self::Div => "/",
            Self::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            Self::Add | Self::Sub => 1,
            Self::Mul | Self::Div => 2,
            Self::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Param { name: String, value: f64 },
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

const NEG_PRECEDENCE: u8 = 3;
const ATOM_PRECEDENCE: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Unary(UnaryOp::Neg, _) => NEG_PRECEDENCE,
            Expr::Binary(op, _, _) => op.precedence(),
            _ => ATOM_PRECEDENCE,
        }
    }

    pub fn eval<S: Scalar>(&self, x: S) -> S {
        match self {
            Expr::Const(c) => S::constant(*c),
            Expr::Var => x,
            Expr::Param { value, .. } => S::constant(*value),
            Expr::Unary(op, a) => {
                let a = a.eval(x);
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Abs => a.abs(),
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Ln => a.ln(),
                    UnaryOp::Sqrt => a.sqrt(),
                    UnaryOp::Sin => a.sin(),
                    UnaryOp::Cos => a.cos(),
                    UnaryOp::Tanh => a.tanh(),
                }
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => a / b,
                    BinaryOp::Pow => a.powf(b),
                }
            }
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => f.write_str("x"),
            Expr::Param { name, .. } => f.write_str(name),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                a.write_child(f, a.precedence() < NEG_PRECEDENCE)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(BinaryOp::Pow, a, b) => {
                a.write_child(f, a.precedence() <= BinaryOp::Pow.precedence())?;
                f.write_str("^")?;
                b.write_child(f, b.precedence() < NEG_PRECEDENCE)
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                a.write_child(f, a.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                b.write_child(f, b.precedence() <= p)
            }
        }
    }
}

/// A parsed potential expression in the variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionAst {
    root: Expr,
}

impl ExpressionAst {
    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn eval<S: Scalar>(&self, x: S) -> S {
        self.root.eval(x)
    }

    /// Canonical source text; parsing it again yields an equal tree.
    pub fn unparse(&self) -> String {
        self.root.to_string()
    }
}

impl From<Expr> for ExpressionAst {
    fn from(root: Expr) -> Self {
        Self { root }
    }
}

impl fmt::Display for ExpressionAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

pub fn parse_potential(source: &str, params: &BTreeMap<String, f64>) -> Result<ExpressionAst> {
    let tokens = lex(source)?;
    if tokens.is_empty() {
        return Err(Error::Syntax { position: 0, message: "empty expression".into() });
    }
    let mut parser = Parser { tokens, pos: 0, params, end: source.len() };
    let root = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(Error::Syntax {
            position: tok.offset,
            message: format!("unexpected {}", tok.kind.describe()),
        });
    }
    Ok(ExpressionAst { root })
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(v) => format!("number {v}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Op(c) => format!("`{c}`"),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn lex(source: &str) -> Result<Vec<Token>> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                tokens.push(Token { kind: TokenKind::Op(c as char), offset: start });
                i += 1;
            }
            b'(' => {
                tokens.push(Token { kind: TokenKind::LParen, offset: start });
                i += 1;
            }
            b')' => {
                tokens.push(Token { kind: TokenKind::RParen, offset: start });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Syntax {
                    position: start,
                    message: format!("malformed number `{text}`"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Syntax {
                        position: start,
                        message: format!("number `{text}` overflows"),
                    });
                }
                tokens.push(Token { kind: TokenKind::Number(value), offset: start });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push(Token { kind: TokenKind::Ident(source[start..i].to_string()), offset: start });
            }
            _ => {
                let ch = source[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax { position: start, message: format!("unexpected character `{ch}`") });
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    params: &'a BTreeMap<String, f64>,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token { kind: TokenKind::Op(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.peek() {
            Some(Token { kind: TokenKind::RParen, .. }) => {
                self.pos += 1;
                Ok(())
            }
            Some(tok) => Err(Error::Syntax {
                position: tok.offset,
                message: format!("expected `)`, found {}", tok.kind.describe()),
            }),
            None => Err(Error::Syntax { position: self.end, message: "expected `)`".into() }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if op == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if op == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            let operand = self.unary()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(operand)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return Err(Error::Syntax { position: self.end, message: "unexpected end of input".into() });
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Number(v) => Ok(Expr::Const(v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                if let Some(op) = UnaryOp::function(&name) {
                    match self.peek() {
                        Some(Token { kind: TokenKind::LParen, .. }) => self.pos += 1,
                        _ => {
                            return Err(Error::Syntax {
                                position: self.offset(),
                                message: format!("expected `(` after `{name}`"),
                            })
                        }
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Unary(op, Box::new(arg)));
                }
                if name == "x" {
                    return Ok(Expr::Var);
                }
                match self.params.get(&name) {
                    Some(&value) => Ok(Expr::Param { name, value }),
                    None => Err(Error::UnknownIdentifier { name, position: tok.offset }),
                }
            }
            other => Err(Error::Syntax { position: tok.offset, message: format!("unexpected {}", other.describe()) }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(src: &str) -> ExpressionAst {
        parse_potential(src, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn harmonic_source() {
        assert_eq!(parse("x^2/2").eval(1.0), 0.5);
    }

    #[test]
    fn double_oscillator_zero() {
        assert_eq!(parse("10*(abs(x)-3)^2").eval(3.0), 0.0);
    }

    #[test]
    fn logistic_midpoint_with_param() {
        let params = BTreeMap::from([("r0".to_string(), 30.0)]);
        let ast = parse_potential("-1/(1+exp(2*(x-r0)))", &params).unwrap();
        assert_eq!(ast.eval(30.0), -0.5);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("-x^2").eval(3.0), -9.0);
        assert_eq!(parse("2^3^2").eval(0.0), 512.0);
        assert_eq!(parse("2^-1").eval(0.0), 0.5);
        assert_eq!(parse("8/4/2").eval(0.0), 1.0);
        assert_eq!(parse("1-2-3").eval(0.0), -4.0);
        assert_eq!(parse("--x").eval(2.0), 2.0);
        assert_eq!(parse("1.5e1 + .5").eval(0.0), 15.5);
    }

    #[test]
    fn syntax_error_offsets() {
        let err = parse_potential("x + * 2", &BTreeMap::new()).unwrap_err();
        assert_eq!(err, Error::Syntax { position: 4, message: "unexpected `*`".into() });
        let err = parse_potential("(x + 1", &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, Error::Syntax { position: 6, .. }));
        let err = parse_potential("x $ 1", &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, Error::Syntax { position: 2, .. }));
        let err = parse_potential("exp x", &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, Error::Syntax { position: 4, .. }));
        let err = parse_potential("   ", &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, Error::Syntax { position: 0, .. }));
    }

    #[test]
    fn unknown_identifier_reported() {
        let err = parse_potential("x + depth", &BTreeMap::new()).unwrap_err();
        assert_eq!(err, Error::UnknownIdentifier { name: "depth".into(), position: 4 });
    }

    #[test]
    fn unparse_is_minimal_but_faithful() {
        assert_eq!(parse("(x^2)/2").unparse(), "x^2 / 2");
        assert_eq!(parse("1-(2-3)").unparse(), "1 - (2 - 3)");
        assert_eq!(parse("(-x)^2").unparse(), "(-x)^2");
        assert_eq!(parse("(2^3)^2").unparse(), "(2^3)^2");
        assert_eq!(parse("2^-x").unparse(), "2^-x");
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..1e3).prop_map(Expr::Const),
            Just(Expr::Var),
            Just(Expr::Param { name: "a".into(), value: 1.25 }),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let unary = prop_oneof![
                Just(UnaryOp::Neg),
                Just(UnaryOp::Abs),
                Just(UnaryOp::Exp),
                Just(UnaryOp::Ln),
                Just(UnaryOp::Sqrt),
                Just(UnaryOp::Sin),
                Just(UnaryOp::Cos),
                Just(UnaryOp::Tanh),
            ];
            let binary = prop_oneof![
                Just(BinaryOp::Add),
                Just(BinaryOp::Sub),
                Just(BinaryOp::Mul),
                Just(BinaryOp::Div),
                Just(BinaryOp::Pow),
            ];
            prop_oneof![
                (unary, inner.clone()).prop_map(|(op, a)| Expr::Unary(op, Box::new(a))),
                (binary, inner.clone(), inner).prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn unparse_parse_round_trip(expr in arb_expr()) {
            let params = BTreeMap::from([("a".to_string(), 1.25)]);
            let ast = ExpressionAst::from(expr);
            let text = ast.unparse();
            let reparsed = parse_potential(&text, &params).unwrap();
            prop_assert_eq!(&reparsed, &ast);
            prop_assert_eq!(reparsed.unparse(), text);
        }

        #[test]
        fn evaluation_is_deterministic(expr in arb_expr(), x in -10.0f64..10.0) {
            let ast = ExpressionAst::from(expr);
            prop_assert_eq!(ast.eval(x).to_bits(), ast.eval(x).to_bits());
        }
    }
}
