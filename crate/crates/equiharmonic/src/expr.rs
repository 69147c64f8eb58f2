//! Scalar expressions for nonlinearities `G(u)` and forcings `e(x)`.
//!
//! Grammar (bit-exact contract of the problem-file format):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-' unary | atom
//! atom   := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and its left operand is a `unary`, so `-u^2`
//! parses as `(-u)^2`. Functions: `sin cos tan exp log sqrt abs atan`
//! (`log` is the natural logarithm). An expression references exactly one
//! variable, fixed by its role: `u` for nonlinearities, `x` for forcings.
//!
//! Evaluation is IEEE double precision. Domain violations (log of a
//! non-positive value, division by zero, fractional powers of negative
//! bases, overflow to infinity) are reported as errors instead of letting
//! NaN/inf propagate into grid functions. First derivatives come from
//! forward-mode dual numbers with the convention `abs'(0) = 0`.

use crate::error::{Error, Result};
use std::fmt;

const FUNCTIONS: [(&str, UnaryOp); 8] = [
    ("sin", UnaryOp::Sin),
    ("cos", UnaryOp::Cos),
    ("tan", UnaryOp::Tan),
    ("exp", UnaryOp::Exp),
    ("log", UnaryOp::Log),
    ("sqrt", UnaryOp::Sqrt),
    ("abs", UnaryOp::Abs),
    ("atan", UnaryOp::Atan),
];

/// The two variable roles expressions are parsed for.
const KNOWN_VARIABLES: [&str; 2] = ["u", "x"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Atan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Pi,
    Var,
    Unary(UnaryOp, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
}

/// A parsed expression in a single named variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    variable: String,
    root: Node,
}

impl Expr {
    /// Parse `source` as an expression in `variable` (`"u"` or `"x"`).
    pub fn parse(source: &str, variable: &str) -> Result<Expr> {
        let tokens = lex(source)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            variable,
            source_len: source.len(),
        };
        let root = parser.expr()?;
        parser.expect_end()?;
        Ok(Expr {
            variable: variable.to_string(),
            root,
        })
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    /// Evaluate at a point.
    pub fn eval(&self, value: f64) -> Result<f64> {
        Ok(eval_node(&self.root, Dual::constant(value))?.v)
    }

    /// Evaluate value and first derivative at a point.
    pub fn eval_with_derivative(&self, value: f64) -> Result<(f64, f64)> {
        let d = eval_node(&self.root, Dual::seed(value))?;
        Ok((d.v, d.d))
    }

    /// `self + coeff * other`; both expressions must share the variable.
    pub fn plus_scaled(&self, coeff: f64, other: &Expr) -> Result<Expr> {
        if self.variable != other.variable {
            return Err(Error::InvalidArgument(format!(
                "cannot combine an expression in `{}` with one in `{}`",
                self.variable, other.variable
            )));
        }
        Ok(Expr {
            variable: self.variable.clone(),
            root: Node::Binary(
                BinOp::Add,
                Box::new(self.root.clone()),
                Box::new(Node::Binary(
                    BinOp::Mul,
                    Box::new(Node::Const(coeff)),
                    Box::new(other.root.clone()),
                )),
            ),
        })
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq)]
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
        let offset = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' | b'(' | b')' => {
                let kind = match c {
                    b'+' => TokenKind::Plus,
                    b'-' => TokenKind::Minus,
                    b'*' => TokenKind::Star,
                    b'/' => TokenKind::Slash,
                    b'^' => TokenKind::Caret,
                    b'(' => TokenKind::LParen,
                    _ => TokenKind::RParen,
                };
                tokens.push(Token { kind, offset });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let value = text.parse::<f64>().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("invalid number literal `{text}`"),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    offset: start,
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(source[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                return Err(Error::Syntax {
                    offset,
                    message: format!("unexpected character `{}`", source[i..].chars().next().unwrap()),
                });
            }
        }
    }
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    variable: &'a str,
    source_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|t| t.offset)
            .unwrap_or(self.source_len)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_end(&self) -> Result<()> {
        if self.pos != self.tokens.len() {
            return Err(Error::Syntax {
                offset: self.offset(),
                message: "unexpected trailing input".into(),
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Node> {
        let mut node = self.term()?;
        loop {
            match self.peek() {
                Some(TokenKind::Plus) => {
                    self.advance();
                    let rhs = self.term()?;
                    node = Node::Binary(BinOp::Add, Box::new(node), Box::new(rhs));
                }
                Some(TokenKind::Minus) => {
                    self.advance();
                    let rhs = self.term()?;
                    node = Node::Binary(BinOp::Sub, Box::new(node), Box::new(rhs));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut node = self.factor()?;
        loop {
            match self.peek() {
                Some(TokenKind::Star) => {
                    self.advance();
                    let rhs = self.factor()?;
                    node = Node::Binary(BinOp::Mul, Box::new(node), Box::new(rhs));
                }
                Some(TokenKind::Slash) => {
                    self.advance();
                    let rhs = self.factor()?;
                    node = Node::Binary(BinOp::Div, Box::new(node), Box::new(rhs));
                }
                _ => return Ok(node),
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.unary()?;
        if let Some(TokenKind::Caret) = self.peek() {
            self.advance();
            let exponent = self.factor()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Node> {
        if let Some(TokenKind::Minus) = self.peek() {
            self.advance();
            let inner = self.unary()?;
            return Ok(Node::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Node> {
        let offset = self.offset();
        let token = self.advance().ok_or_else(|| Error::Syntax {
            offset,
            message: "unexpected end of input".into(),
        })?;
        match token.kind {
            TokenKind::Number(v) => Ok(Node::Const(v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => self.ident(name, token.offset),
            _ => Err(Error::Syntax {
                offset: token.offset,
                message: "expected a number, name, or `(`".into(),
            }),
        }
    }

    fn ident(&mut self, name: String, offset: usize) -> Result<Node> {
        if name == "pi" {
            return Ok(Node::Pi);
        }
        if name == self.variable {
            return Ok(Node::Var);
        }
        if let Some((_, op)) = FUNCTIONS.iter().find(|(n, _)| *n == name) {
            match self.peek() {
                Some(TokenKind::LParen) => {
                    self.advance();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Node::Unary(*op, Box::new(arg)));
                }
                _ => {
                    return Err(Error::Syntax {
                        offset: self.offset(),
                        message: format!("expected `(` after function `{name}`"),
                    })
                }
            }
        }
        if KNOWN_VARIABLES.contains(&name.as_str()) {
            return Err(Error::WrongVariable {
                found: name,
                expected: self.variable.to_string(),
                offset,
            });
        }
        Err(Error::UnknownIdentifier { name, offset })
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.peek() {
            Some(TokenKind::RParen) => {
                self.advance();
                Ok(())
            }
            _ => Err(Error::Syntax {
                offset: self.offset(),
                message: "expected `)`".into(),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation with forward-mode dual numbers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    d: f64,
}

impl Dual {
    fn constant(v: f64) -> Dual {
        Dual { v, d: 0.0 }
    }

    fn seed(v: f64) -> Dual {
        Dual { v, d: 1.0 }
    }
}

fn finite(op: &'static str, argument: f64, result: Dual) -> Result<Dual> {
    if result.v.is_finite() && result.d.is_finite() {
        Ok(result)
    } else {
        Err(Error::Domain { op, argument })
    }
}

fn eval_node(node: &Node, at: Dual) -> Result<Dual> {
    match node {
        Node::Const(c) => Ok(Dual::constant(*c)),
        Node::Pi => Ok(Dual::constant(std::f64::consts::PI)),
        Node::Var => Ok(at),
        Node::Unary(op, inner) => {
            let a = eval_node(inner, at)?;
            eval_unary(*op, a)
        }
        Node::Binary(op, lhs, rhs) => {
            let a = eval_node(lhs, at)?;
            let b = eval_node(rhs, at)?;
            eval_binary(*op, a, b)
        }
    }
}

fn eval_unary(op: UnaryOp, a: Dual) -> Result<Dual> {
    let out = match op {
        UnaryOp::Neg => Dual { v: -a.v, d: -a.d },
        UnaryOp::Sin => Dual {
            v: a.v.sin(),
            d: a.d * a.v.cos(),
        },
        UnaryOp::Cos => Dual {
            v: a.v.cos(),
            d: -a.d * a.v.sin(),
        },
        UnaryOp::Tan => {
            let c = a.v.cos();
            Dual {
                v: a.v.tan(),
                d: a.d / (c * c),
            }
        }
        UnaryOp::Exp => {
            let e = a.v.exp();
            Dual { v: e, d: a.d * e }
        }
        UnaryOp::Log => {
            if a.v <= 0.0 {
                return Err(Error::Domain {
                    op: "log",
                    argument: a.v,
                });
            }
            Dual {
                v: a.v.ln(),
                d: a.d / a.v,
            }
        }
        UnaryOp::Sqrt => {
            if a.v < 0.0 {
                return Err(Error::Domain {
                    op: "sqrt",
                    argument: a.v,
                });
            }
            let s = a.v.sqrt();
            let d = if a.d == 0.0 { 0.0 } else { a.d / (2.0 * s) };
            Dual { v: s, d }
        }
        UnaryOp::Abs => Dual {
            v: a.v.abs(),
            // abs'(0) := 0
            d: a.d * a.v.signum() * if a.v == 0.0 { 0.0 } else { 1.0 },
        },
        UnaryOp::Atan => Dual {
            v: a.v.atan(),
            d: a.d / (1.0 + a.v * a.v),
        },
    };
    finite(op_name(op), a.v, out)
}

fn eval_binary(op: BinOp, a: Dual, b: Dual) -> Result<Dual> {
    let out = match op {
        BinOp::Add => Dual {
            v: a.v + b.v,
            d: a.d + b.d,
        },
        BinOp::Sub => Dual {
            v: a.v - b.v,
            d: a.d - b.d,
        },
        BinOp::Mul => Dual {
            v: a.v * b.v,
            d: a.d * b.v + a.v * b.d,
        },
        BinOp::Div => {
            if b.v == 0.0 {
                return Err(Error::Domain {
                    op: "/",
                    argument: b.v,
                });
            }
            Dual {
                v: a.v / b.v,
                d: (a.d * b.v - a.v * b.d) / (b.v * b.v),
            }
        }
        BinOp::Pow => return pow_dual(a, b),
    };
    finite(op_name_bin(op), a.v, out)
}

fn pow_dual(a: Dual, b: Dual) -> Result<Dual> {
    // Exponent depending on the variable requires a positive base.
    if b.d != 0.0 {
        if a.v <= 0.0 {
            return Err(Error::Domain {
                op: "^",
                argument: a.v,
            });
        }
        let v = a.v.powf(b.v);
        let d = v * (b.d * a.v.ln() + b.v * a.d / a.v);
        return finite("^", a.v, Dual { v, d });
    }
    let exponent = b.v;
    let is_integer = exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64;
    if is_integer {
        let n = exponent as i32;
        let v = a.v.powi(n);
        let d = if n == 0 {
            0.0
        } else {
            f64::from(n) * a.v.powi(n - 1) * a.d
        };
        return finite("^", a.v, Dual { v, d });
    }
    // Fractional exponent: real-valued semantics require a non-negative base.
    if a.v < 0.0 {
        return Err(Error::Domain {
            op: "^",
            argument: a.v,
        });
    }
    let v = a.v.powf(exponent);
    let d = if a.d == 0.0 {
        0.0
    } else {
        exponent * a.v.powf(exponent - 1.0) * a.d
    };
    finite("^", a.v, Dual { v, d })
}

fn op_name(op: UnaryOp) -> &'static str {
    match op {
        UnaryOp::Neg => "-",
        UnaryOp::Sin => "sin",
        UnaryOp::Cos => "cos",
        UnaryOp::Tan => "tan",
        UnaryOp::Exp => "exp",
        UnaryOp::Log => "log",
        UnaryOp::Sqrt => "sqrt",
        UnaryOp::Abs => "abs",
        UnaryOp::Atan => "atan",
    }
}

fn op_name_bin(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Pow => "^",
    }
}

// ---------------------------------------------------------------------------
// Printing (grammar-faithful: `parse(to_string())` evaluates identically)
// ---------------------------------------------------------------------------

/// Grammar nonterminal a node can be produced by, for parenthesization.
#[derive(PartialEq, PartialOrd)]
enum Level {
    Expr = 0,
    Term = 1,
    Factor = 2,
    Unary = 3,
    Atom = 4,
}

fn level(node: &Node) -> Level {
    match node {
        Node::Const(_) | Node::Pi | Node::Var => Level::Atom,
        Node::Unary(UnaryOp::Neg, _) => Level::Unary,
        Node::Unary(..) => Level::Atom, // function application is an atom
        Node::Binary(BinOp::Pow, ..) => Level::Factor,
        Node::Binary(BinOp::Mul | BinOp::Div, ..) => Level::Term,
        Node::Binary(BinOp::Add | BinOp::Sub, ..) => Level::Expr,
    }
}

fn fmt_node(node: &Node, min: Level, f: &mut fmt::Formatter<'_>, var: &str) -> fmt::Result {
    if level(node) < min {
        write!(f, "(")?;
        fmt_node(node, Level::Expr, f, var)?;
        return write!(f, ")");
    }
    match node {
        Node::Const(c) => {
            if *c < 0.0 || !c.is_finite() {
                // Negative or non-finite literals are not produced by the
                // grammar; parenthesize so the output stays parseable.
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        }
        Node::Pi => write!(f, "pi"),
        Node::Var => write!(f, "{var}"),
        Node::Unary(UnaryOp::Neg, inner) => {
            write!(f, "-")?;
            fmt_node(inner, Level::Unary, f, var)
        }
        Node::Unary(op, inner) => {
            write!(f, "{}(", op_name(*op))?;
            fmt_node(inner, Level::Expr, f, var)?;
            write!(f, ")")
        }
        Node::Binary(op, lhs, rhs) => {
            let (lmin, rmin) = match op {
                BinOp::Add | BinOp::Sub => (Level::Expr, Level::Term),
                BinOp::Mul | BinOp::Div => (Level::Term, Level::Factor),
                BinOp::Pow => (Level::Unary, Level::Factor),
            };
            fmt_node(lhs, lmin, f, var)?;
            write!(f, "{}", op_name_bin(*op))?;
            fmt_node(rhs, rmin, f, var)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(&self.root, Level::Expr, f, &self.variable)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn eval(src: &str, var: &str, at: f64) -> f64 {
        Expr::parse(src, var).unwrap().eval(at).unwrap()
    }

    #[test]
    fn parses_rational_over_sqrt() {
        assert!(Expr::parse("u/sqrt(u^2+1)", "u").is_ok());
    }

    #[test]
    fn syntax_error_position() {
        match Expr::parse("sin(x", "x") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_variable_for_role() {
        match Expr::parse("u + x", "u") {
            Err(Error::WrongVariable { found, .. }) => assert_eq!(found, "x"),
            other => panic!("expected wrong-variable error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier() {
        assert!(matches!(
            Expr::parse("foo + 1", "u"),
            Err(Error::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn eval_examples() {
        assert!((eval("sin(x)", "x", PI / 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(eval("u/(2*u^2+u+1)", "u", 0.0), 0.0);
        assert!(matches!(
            Expr::parse("1/x", "x").unwrap().eval(0.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("2^3^2", "u", 0.0), 512.0); // right-associative
        assert_eq!(eval("1-2-3", "u", 0.0), -4.0); // left-associative
        assert_eq!(eval("6/3/2", "u", 0.0), 1.0);
        assert_eq!(eval("2+3*4", "u", 0.0), 14.0);
        // The grammar makes the base of `^` a unary, so -2^2 = (-2)^2.
        assert_eq!(eval("-2^2", "u", 0.0), 4.0);
        assert_eq!(eval("2^-2", "u", 0.0), 0.25);
    }

    #[test]
    fn derivative_examples() {
        let g = Expr::parse("u/sqrt(u^2+1)", "u").unwrap();
        let (v, d) = g.eval_with_derivative(0.0).unwrap();
        assert_eq!(v, 0.0);
        assert!((d - 1.0).abs() < 1e-15);

        let g = Expr::parse("0.2*u^3/(u^2+3*u+3)+sin(0.5*u)", "u").unwrap();
        let (v, d) = g.eval_with_derivative(0.0).unwrap();
        // Central-difference oracle with step 1e-6.
        let h = 1e-6;
        let fd = (g.eval(h).unwrap() - g.eval(-h).unwrap()) / (2.0 * h);
        assert_eq!(v, 0.0);
        assert!((d - 0.5).abs() < 1e-12);
        assert!((d - fd).abs() < 1e-9);

        let c = Expr::parse("pi", "u").unwrap();
        let (v, d) = c.eval_with_derivative(3.5).unwrap();
        assert_eq!(v, PI);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn abs_derivative_at_zero_is_zero() {
        let e = Expr::parse("abs(u)", "u").unwrap();
        assert_eq!(e.eval_with_derivative(0.0).unwrap(), (0.0, 0.0));
        assert_eq!(e.eval_with_derivative(-2.0).unwrap(), (2.0, -1.0));
    }

    #[test]
    fn pow_domain_rules() {
        let e = Expr::parse("u^0.5", "u").unwrap();
        assert!(matches!(e.eval(-1.0), Err(Error::Domain { .. })));
        assert!((e.eval(4.0).unwrap() - 2.0).abs() < 1e-15);
        // Integer exponents of negative bases are fine.
        let c = Expr::parse("u^3", "u").unwrap();
        assert_eq!(c.eval(-2.0).unwrap(), -8.0);
        let (_, d) = c.eval_with_derivative(-2.0).unwrap();
        assert_eq!(d, 12.0);
    }

    #[test]
    fn overflow_is_an_error_not_inf() {
        let e = Expr::parse("exp(x)", "x").unwrap();
        assert!(matches!(e.eval(1000.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn log_rules() {
        let e = Expr::parse("log(x)", "x").unwrap();
        assert!((e.eval(1.0).unwrap()).abs() < 1e-15);
        assert!(matches!(e.eval(0.0), Err(Error::Domain { .. })));
        assert!(matches!(e.eval(-1.0), Err(Error::Domain { .. })));
    }

    /// Derivatives of each built-in nonlinearity against central differences.
    #[test]
    fn dual_derivatives_match_central_differences() {
        use rand::{Rng, SeedableRng};
        let sources = [
            "u + 0.2*u^3/(u^2+3*u+3) + sin(0.5*u)",
            "u + u/(2*u^2+u+1)",
            "u + u/sqrt(u^2+1)",
            "4*u + u/sqrt(u^2+1)",
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for src in sources {
            let g = Expr::parse(src, "u").unwrap();
            for _ in 0..100 {
                let u = rng.random_range(-50.0..50.0);
                let (_, d) = g.eval_with_derivative(u).unwrap();
                let h = 1e-5;
                let fd = (g.eval(u + h).unwrap() - g.eval(u - h).unwrap()) / (2.0 * h);
                assert!(
                    (d - fd).abs() <= 1e-6 * (1.0 + d.abs()),
                    "{src} at u = {u}: dual {d} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn print_parse_round_trip_on_builtins() {
        use rand::{Rng, SeedableRng};
        let sources = [
            "u + 0.2*u^3/(u^2+3*u+3) + sin(0.5*u)",
            "u + u/(2*u^2+u+1)",
            "u + u/sqrt(u^2+1)",
            "4*u + u/sqrt(u^2+1)",
            "-u^2",
            "-(u^2)",
            "u^2^3",
            "(u^2)^3",
            "u-(u+1)",
            "u/(2*u)",
            "2*(u+1)",
            "atan(abs(u)+1)^(1+1)",
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for src in sources {
            let ast = Expr::parse(src, "u").unwrap();
            let printed = ast.to_string();
            let reparsed = Expr::parse(&printed, "u")
                .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
            for _ in 0..20 {
                let u = rng.random_range(-10.0..10.0);
                let a = ast.eval(u).unwrap();
                let b = reparsed.eval(u).unwrap();
                assert_eq!(a.to_bits(), b.to_bits(), "`{src}` -> `{printed}` at {u}");
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_node(depth: u32) -> BoxedStrategy<Node> {
            let leaf = prop_oneof![
                (0.0..10.0f64).prop_map(Node::Const),
                Just(Node::Pi),
                Just(Node::Var),
            ];
            if depth == 0 {
                return leaf.boxed();
            }
            let sub = arb_node(depth - 1);
            prop_oneof![
                leaf,
                (sub.clone(), sub.clone()).prop_map(|(a, b)| Node::Binary(
                    BinOp::Add,
                    Box::new(a),
                    Box::new(b)
                )),
                (sub.clone(), sub.clone()).prop_map(|(a, b)| Node::Binary(
                    BinOp::Sub,
                    Box::new(a),
                    Box::new(b)
                )),
                (sub.clone(), sub.clone()).prop_map(|(a, b)| Node::Binary(
                    BinOp::Mul,
                    Box::new(a),
                    Box::new(b)
                )),
                (sub.clone(), sub.clone()).prop_map(|(a, b)| Node::Binary(
                    BinOp::Div,
                    Box::new(a),
                    Box::new(b)
                )),
                (sub.clone(), 1..4i32).prop_map(|(a, n)| Node::Binary(
                    BinOp::Pow,
                    Box::new(a),
                    Box::new(Node::Const(n as f64))
                )),
                sub.clone().prop_map(|a| Node::Unary(UnaryOp::Neg, Box::new(a))),
                sub.clone().prop_map(|a| Node::Unary(UnaryOp::Sin, Box::new(a))),
                sub.clone().prop_map(|a| Node::Unary(UnaryOp::Atan, Box::new(a))),
                sub.prop_map(|a| Node::Unary(UnaryOp::Abs, Box::new(a))),
            ]
            .boxed()
        }

        proptest! {
            /// parse(print(ast)) evaluates identically wherever defined.
            #[test]
            fn print_then_parse_preserves_evaluation(root in arb_node(4), at in -5.0..5.0f64) {
                let ast = Expr { variable: "u".into(), root };
                let printed = ast.to_string();
                let reparsed = Expr::parse(&printed, "u")
                    .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
                match (ast.eval(at), reparsed.eval(at)) {
                    (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                    (Err(_), Err(_)) => {}
                    (a, b) => prop_assert!(false, "`{}`: {:?} vs {:?}", printed, a, b),
                }
            }
        }
    }
}
