//! Potential expressions: a small arithmetic language over one variable.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          right-associative
//! atom    := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `-x^2` parses as `-(x^2)`. A variable is any single ASCII letter; at most
//! one distinct variable may appear. Whitespace is ignored.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Sin,
    Cos,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression together with the name of its free variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    root: Node,
    variable: Option<char>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("more than one free variable: `{first}` and `{second}`")]
    MultipleVariables { first: char, second: char },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainReason {
    DivisionByZero,
    LogNonPositive,
    SqrtNegative,
    NonFinite,
}

impl fmt::Display for DomainReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainReason::DivisionByZero => "division by zero",
            DomainReason::LogNonPositive => "log of non-positive value",
            DomainReason::SqrtNegative => "sqrt of negative value",
            DomainReason::NonFinite => "non-finite result",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("{reason} at {point}")]
pub struct EvalError {
    pub point: f64,
    pub reason: DomainReason,
}

impl ExprAst {
    pub fn new(root: Node, variable: Option<char>) -> Self {
        ExprAst { root, variable }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variable(&self) -> Option<char> {
        self.variable
    }

    pub fn eval(&self, point: f64) -> Result<f64, EvalError> {
        let v = eval_node(&self.root, point)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError {
                point,
                reason: DomainReason::NonFinite,
            })
        }
    }
}

pub fn parse(source: &str) -> Result<ExprAst, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        variable: None,
        end: source.len(),
    };
    let root = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(ParseError::Syntax {
            offset: tok.offset,
            message: format!("unexpected {}", tok.kind),
        });
    }
    Ok(ExprAst {
        root,
        variable: parser.variable,
    })
}

fn eval_node(node: &Node, x: f64) -> Result<f64, EvalError> {
    let fail = |reason| EvalError { point: x, reason };
    Ok(match node {
        Node::Const(c) => *c,
        Node::Var => x,
        Node::Neg(a) => -eval_node(a, x)?,
        Node::Binary(op, a, b) => {
            let a = eval_node(a, x)?;
            let b = eval_node(b, x)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(fail(DomainReason::DivisionByZero));
                    }
                    a / b
                }
                BinOp::Pow => {
                    if a == 0.0 && b < 0.0 {
                        return Err(fail(DomainReason::DivisionByZero));
                    }
                    a.powf(b)
                }
            }
        }
        Node::Call(f, a) => {
            let a = eval_node(a, x)?;
            match f {
                Func::Exp => a.exp(),
                Func::Log => {
                    if a <= 0.0 {
                        return Err(fail(DomainReason::LogNonPositive));
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(fail(DomainReason::SqrtNegative));
                    }
                    a.sqrt()
                }
                Func::Abs => a.abs(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
            }
        }
    })
    .and_then(|v: f64| {
        if v.is_nan() {
            Err(fail(DomainReason::NonFinite))
        } else {
            Ok(v)
        }
    })
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, self.variable.unwrap_or('x'), f)
    }
}

// Canonical form: every compound node is parenthesized, constants use the
// shortest round-trip representation.
fn write_node(node: &Node, var: char, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Node::Const(c) => {
            if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                write!(f, "(0.0-{:?})", -c)
            } else {
                write!(f, "{c:?}")
            }
        }
        Node::Var => write!(f, "{var}"),
        Node::Neg(a) => {
            f.write_str("(-")?;
            write_node(a, var, f)?;
            f.write_str(")")
        }
        Node::Binary(op, a, b) => {
            f.write_str("(")?;
            write_node(a, var, f)?;
            write!(f, " {} ", op.symbol())?;
            write_node(b, var, f)?;
            f.write_str(")")
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(a, var, f)?;
            f.write_str(")")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Number(v) => write!(f, "number {v}"),
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Op(c) => write!(f, "`{c}`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push(Token {
                    kind: TokenKind::Op(c as char),
                    offset: i,
                });
                i += 1;
            }
            b'(' => {
                out.push(Token {
                    kind: TokenKind::LParen,
                    offset: i,
                });
                i += 1;
            }
            b')' => {
                out.push(Token {
                    kind: TokenKind::RParen,
                    offset: i,
                });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
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
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push(Token {
                    kind: TokenKind::Number(value),
                    offset: start,
                });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: TokenKind::Ident(src[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: i,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    variable: Option<char>,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Op(c),
                ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let offset = self.here();
        let Some(tok) = self.next() else {
            return Err(ParseError::Syntax {
                offset,
                message: "unexpected end of input".into(),
            });
        };
        match tok.kind {
            TokenKind::Number(v) => Ok(Node::Const(v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => self.identifier(name, tok.offset),
            other => Err(ParseError::Syntax {
                offset: tok.offset,
                message: format!("unexpected {other}"),
            }),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Node, ParseError> {
        if let Some(func) = Func::from_name(&name) {
            match self.next() {
                Some(Token {
                    kind: TokenKind::LParen,
                    ..
                }) => {}
                _ => {
                    return Err(ParseError::Syntax {
                        offset,
                        message: format!("expected `(` after `{name}`"),
                    })
                }
            }
            let arg = self.expr()?;
            self.expect_rparen()?;
            return Ok(Node::Call(func, Box::new(arg)));
        }
        if name == "pi" {
            return Ok(Node::Const(std::f64::consts::PI));
        }
        let mut chars = name.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_alphabetic() => {
                match self.variable {
                    None => self.variable = Some(c),
                    Some(v) if v == c => {}
                    Some(v) => {
                        return Err(ParseError::MultipleVariables {
                            first: v,
                            second: c,
                        })
                    }
                }
                Ok(Node::Var)
            }
            _ => Err(ParseError::UnknownIdentifier { name, offset }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        let offset = self.here();
        match self.next() {
            Some(Token {
                kind: TokenKind::RParen,
                ..
            }) => Ok(()),
            Some(t) => Err(ParseError::Syntax {
                offset: t.offset,
                message: format!("expected `)`, found {}", t.kind),
            }),
            None => Err(ParseError::Syntax {
                offset,
                message: "expected `)`".into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn var() -> Box<Node> {
        Box::new(Node::Var)
    }

    #[test]
    fn parses_power() {
        let ast = parse("x^2").unwrap();
        assert_eq!(
            ast.root(),
            &Node::Binary(BinOp::Pow, var(), Box::new(Node::Const(2.0)))
        );
        assert_eq!(ast.variable(), Some('x'));
    }

    #[test]
    fn funnel_expression() {
        let ast = parse("-0.5/r + 0.2*r").unwrap();
        assert_eq!(ast.variable(), Some('r'));
        assert!((ast.eval(1.0).unwrap() - (-0.3)).abs() < 1e-15);
    }

    #[test]
    fn rejects_two_variables() {
        assert_eq!(
            parse("x + y"),
            Err(ParseError::MultipleVariables {
                first: 'x',
                second: 'y'
            })
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let ast = parse("2^3^2").unwrap();
        assert_eq!(ast.eval(0.0).unwrap(), 512.0);
        let ast = parse("-x^2").unwrap();
        assert_eq!(ast.eval(3.0).unwrap(), -9.0);
        let ast = parse("1 + 2 * 3 - 4 / 2").unwrap();
        assert_eq!(ast.eval(0.0).unwrap(), 5.0);
        let ast = parse("x^-2").unwrap();
        assert_eq!(ast.eval(2.0).unwrap(), 0.25);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("x + * 2") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse("(x + 1") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        match parse("x $ 1") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse(""), Err(ParseError::Syntax { offset: 0, .. })));
    }

    #[test]
    fn unknown_identifier() {
        assert_eq!(
            parse("2*foo"),
            Err(ParseError::UnknownIdentifier {
                name: "foo".into(),
                offset: 2
            })
        );
    }

    #[test]
    fn domain_violations_are_tagged() {
        let ast = parse("1/r").unwrap();
        assert_eq!(
            ast.eval(0.0),
            Err(EvalError {
                point: 0.0,
                reason: DomainReason::DivisionByZero
            })
        );
        assert_eq!(
            parse("log(x)").unwrap().eval(-1.0).unwrap_err().reason,
            DomainReason::LogNonPositive
        );
        assert_eq!(
            parse("sqrt(x)").unwrap().eval(-1.0).unwrap_err().reason,
            DomainReason::SqrtNegative
        );
        assert_eq!(
            parse("exp(x)").unwrap().eval(1000.0).unwrap_err().reason,
            DomainReason::NonFinite
        );
    }

    #[test]
    fn functions_and_constants() {
        let ast = parse("exp(0) + log(1) + sqrt(4) + abs(-3) + sin(0) + cos(0) + pi").unwrap();
        assert_eq!(ast.variable(), None);
        assert!((ast.eval(0.0).unwrap() - (1.0 + 2.0 + 3.0 + 1.0 + std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn display_is_canonical() {
        let ast = parse(" -0.5 / r+0.2*r ").unwrap();
        assert_eq!(ast.to_string(), "(((-0.5) / r) + (0.2 * r))");
        assert_eq!(parse(&ast.to_string()).unwrap(), ast);
    }

    #[test]
    fn golden_arithmetic_is_exact() {
        let corpus: &[(&str, fn(f64) -> f64)] = &[
            ("x*x + 3*x - 7", |x| x * x + 3.0 * x - 7.0),
            ("(x - 1.5)*(x + 2.25)", |x| (x - 1.5) * (x + 2.25)),
            ("0.1*x*x*x - 0.3*x", |x| 0.1 * x * x * x - 0.3 * x),
            ("-x + 0.7 - x*0.2", |x| -x + 0.7 - x * 0.2),
        ];
        for (src, direct) in corpus {
            let ast = parse(src).unwrap();
            for i in 0..200 {
                let x = -10.0 + 0.0937 * i as f64;
                assert_eq!(ast.eval(x).unwrap().to_bits(), direct(x).to_bits(), "{src} at {x}");
            }
        }
    }

    fn arb_node() -> impl Strategy<Value = Node> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Node::Const),
            Just(Node::Var),
        ];
        leaf.prop_recursive(6, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Node::Binary(op, Box::new(a), Box::new(b))),
                (
                    prop_oneof![
                        Just(Func::Exp),
                        Just(Func::Log),
                        Just(Func::Sqrt),
                        Just(Func::Abs),
                        Just(Func::Sin),
                        Just(Func::Cos)
                    ],
                    inner
                )
                    .prop_map(|(f, a)| Node::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn print_parse_idempotent(node in arb_node(), v in prop_oneof![Just('x'), Just('r')]) {
            let ast = ExprAst::new(node, Some(v));
            let printed = ast.to_string();
            let reparsed = parse(&printed).unwrap();
            // Constant-only trees reparse without a variable symbol.
            prop_assert_eq!(reparsed.root(), ast.root());
            let again = parse(&reparsed.to_string()).unwrap();
            prop_assert_eq!(again, reparsed);
        }
    }
}
