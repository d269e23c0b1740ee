//! Coefficient expressions: parsing, evaluation, exact symbolic derivative.
//!
//! The grammar is deliberately small — one variable `x`, decimal literals,
//! `+ - * / ^`, unary minus and the functions `sin cos exp log sqrt tanh` —
//! so that differentiation is total and every evaluation either produces a
//! finite double or a reported domain error, never a silent NaN.
//!
//! ```
//! use sturm_osc::expr::Expression;
//! let e = Expression::parse("1 + 0.1*sin(x)").unwrap();
//! assert_eq!(e.evaluate(0.0).unwrap(), 1.0);
//! let d = e.differentiate();
//! assert!((d.evaluate(0.0).unwrap() - 0.1).abs() < 1e-15);
//! ```

use std::fmt;

use thiserror::Error;

/// Binary operators, in source syntax `+ - * / ^`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// The built-in function set. Fixed: no user-defined functions, which keeps
/// [`Expression::differentiate`] total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// An immutable expression tree in the variable `x`.
///
/// Structural equality (`==`) is decidable and used by the parse/print
/// round-trip tests. Values are shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
}

/// Parse failure, with the byte offset of the offending token.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    /// Input does not match the grammar.
    #[error("syntax error at byte {offset}: {message}")]
    Syntax {
        /// Byte offset into the source of the offending token.
        offset: usize,
        /// Human-readable description of what was expected.
        message: String,
    },
    /// An identifier that is neither `x` nor a known function name.
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier {
        /// Byte offset of the identifier.
        offset: usize,
        /// The identifier text.
        name: String,
    },
}

impl ParseError {
    /// Byte offset into the source where the error was detected.
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } => *offset,
            ParseError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

/// Evaluation hit a point outside an operation's real domain, or overflowed.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    /// `log` of a non-positive argument.
    #[error("log of non-positive value {arg:e} at x = {x:e}")]
    Log {
        /// The offending argument.
        arg: f64,
        /// The evaluation point.
        x: f64,
    },
    /// `sqrt` of a negative argument.
    #[error("sqrt of negative value {arg:e} at x = {x:e}")]
    Sqrt {
        /// The offending argument.
        arg: f64,
        /// The evaluation point.
        x: f64,
    },
    /// Division by zero.
    #[error("division by zero at x = {x:e}")]
    DivisionByZero {
        /// The evaluation point.
        x: f64,
    },
    /// `0` raised to a negative power.
    #[error("zero raised to negative power {exponent:e} at x = {x:e}")]
    ZeroToNegativePower {
        /// The exponent value.
        exponent: f64,
        /// The evaluation point.
        x: f64,
    },
    /// Negative base raised to a non-integer power.
    #[error("negative base {base:e} raised to non-integer power {exponent:e} at x = {x:e}")]
    NegativeBaseFractionalPower {
        /// The base value.
        base: f64,
        /// The exponent value.
        exponent: f64,
        /// The evaluation point.
        x: f64,
    },
    /// An intermediate result overflowed to a non-finite double.
    #[error("non-finite intermediate result at x = {x:e}")]
    Overflow {
        /// The evaluation point.
        x: f64,
    },
}

/// Parse `source` into an [`Expression`].
///
/// Grammar (whitespace-insensitive between tokens, `^` right-associative):
///
/// ```text
/// expr   := term (("+" | "-") term)*
/// term   := factor (("*" | "/") factor)*
/// factor := unary ("^" factor)?
/// unary  := "-" unary | atom
/// atom   := number | "x" | func "(" expr ")" | "(" expr ")"
/// func   := "sin" | "cos" | "exp" | "log" | "sqrt" | "tanh"
/// ```
///
/// Numbers are decimal with an optional exponent (`2.5e-3`). Implicit
/// multiplication is rejected: `2x` is a syntax error at the `x`. The Unicode
/// minus sign `−` is accepted as a synonym for `-`.
pub fn parse(source: &str) -> Result<Expression, ParseError> {
    Expression::parse(source)
}

impl Expression {
    /// Parse `source`; see the module-level grammar.
    pub fn parse(source: &str) -> Result<Expression, ParseError> {
        let tokens = lex(source)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        match p.peek() {
            Token::End(_) => Ok(Expression { root }),
            t => Err(ParseError::Syntax {
                offset: t.offset(),
                message: format!("unexpected {}", t.describe()),
            }),
        }
    }

    /// Evaluate at `x` in IEEE-754 double precision.
    ///
    /// Domain errors (`log(-1)`, `1/0`, `sqrt(-2)`, non-finite overflow) are
    /// reported as [`DomainError`]; the result is never NaN.
    pub fn evaluate(&self, x: f64) -> Result<f64, DomainError> {
        eval_node(&self.root, x)
    }

    /// Exact symbolic derivative with respect to `x`.
    ///
    /// The result is lightly folded (constants collapsed, `0`/`1` identities
    /// removed) but not otherwise simplified.
    pub fn differentiate(&self) -> Expression {
        Expression {
            root: simplify(diff_node(&self.root)),
        }
    }

    /// Compile to a flat stack program for repeated evaluation.
    pub(crate) fn compile(&self) -> Program {
        let mut code = Vec::new();
        compile_node(&self.root, &mut code);
        let mut depth = 0usize;
        let mut max_stack = 0usize;
        for instr in &code {
            match instr {
                Instr::Push(_) | Instr::PushX => depth += 1,
                Instr::Add | Instr::Sub | Instr::Mul | Instr::Div | Instr::Pow => depth -= 1,
                _ => {}
            }
            max_stack = max_stack.max(depth);
        }
        Program { code, max_stack }
    }
}

impl std::str::FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expression::parse(s)
    }
}

/// Unambiguous serializer: `parse(print(parse(s)))` reproduces the same tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, 0)
    }
}

// Precedence levels used by both the printer and (implicitly) the grammar:
// atoms 6, unary minus 4, `^` 3, `*` `/` 2, `+` `-` 1. A child is printed
// without parentheses iff its level is at least the slot's minimum.
fn node_prec(n: &Node) -> u8 {
    match n {
        Node::Num(_) | Node::Var | Node::Call(..) => 6,
        Node::Neg(_) => 4,
        Node::Bin(BinOp::Pow, ..) => 3,
        Node::Bin(BinOp::Mul, ..) | Node::Bin(BinOp::Div, ..) => 2,
        Node::Bin(BinOp::Add, ..) | Node::Bin(BinOp::Sub, ..) => 1,
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, n: &Node, min: u8) -> fmt::Result {
    let prec = node_prec(n);
    let parens = prec < min;
    if parens {
        write!(f, "(")?;
    }
    match n {
        Node::Num(v) => write!(f, "{v}")?,
        Node::Var => write!(f, "x")?,
        Node::Neg(inner) => {
            write!(f, "-")?;
            write_node(f, inner, 4)?;
        }
        Node::Call(func, arg) => {
            write!(f, "{}(", func.name())?;
            write_node(f, arg, 0)?;
            write!(f, ")")?;
        }
        Node::Bin(op, l, r) => {
            let (sym, lmin, rmin) = match op {
                BinOp::Add => (" + ", 1, 2),
                BinOp::Sub => (" - ", 1, 2),
                BinOp::Mul => ("*", 2, 3),
                BinOp::Div => ("/", 2, 3),
                // The base slot accepts unary minus but not another power,
                // matching right-associativity of `^`.
                BinOp::Pow => ("^", 4, 3),
            };
            write_node(f, l, lmin)?;
            write!(f, "{sym}")?;
            write_node(f, r, rmin)?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(usize, f64),
    Ident(usize, String),
    LParen(usize),
    RParen(usize),
    Plus(usize),
    Minus(usize),
    Star(usize),
    Slash(usize),
    Caret(usize),
    End(usize),
}

impl Token {
    fn offset(&self) -> usize {
        match self {
            Token::Num(o, _)
            | Token::Ident(o, _)
            | Token::LParen(o)
            | Token::RParen(o)
            | Token::Plus(o)
            | Token::Minus(o)
            | Token::Star(o)
            | Token::Slash(o)
            | Token::Caret(o)
            | Token::End(o) => *o,
        }
    }

    fn describe(&self) -> String {
        match self {
            Token::Num(_, v) => format!("number `{v}`"),
            Token::Ident(_, s) => format!("identifier `{s}`"),
            Token::LParen(_) => "`(`".into(),
            Token::RParen(_) => "`)`".into(),
            Token::Plus(_) => "`+`".into(),
            Token::Minus(_) => "`-`".into(),
            Token::Star(_) => "`*`".into(),
            Token::Slash(_) => "`/`".into(),
            Token::Caret(_) => "`^`".into(),
            Token::End(_) => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'(' => {
                out.push(Token::LParen(i));
                i += 1;
            }
            b')' => {
                out.push(Token::RParen(i));
                i += 1;
            }
            b'+' => {
                out.push(Token::Plus(i));
                i += 1;
            }
            b'-' => {
                out.push(Token::Minus(i));
                i += 1;
            }
            b'*' => {
                out.push(Token::Star(i));
                i += 1;
            }
            b'/' => {
                out.push(Token::Slash(i));
                i += 1;
            }
            b'^' => {
                out.push(Token::Caret(i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    if i >= bytes.len() || !bytes[i].is_ascii_digit() {
                        return Err(ParseError::Syntax {
                            offset: i.min(bytes.len()),
                            message: "expected digit after decimal point".into(),
                        });
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j >= bytes.len() || !bytes[j].is_ascii_digit() {
                        return Err(ParseError::Syntax {
                            offset: j.min(bytes.len()),
                            message: "expected digit in exponent".into(),
                        });
                    }
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push(Token::Num(start, value));
            }
            _ if b.is_ascii_alphabetic() || b == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token::Ident(start, src[start..i].to_string()));
            }
            _ => {
                // Accept the Unicode minus sign as `-`.
                if src[i..].starts_with('\u{2212}') {
                    out.push(Token::Minus(i));
                    i += '\u{2212}'.len_utf8();
                } else {
                    let ch = src[i..].chars().next().unwrap_or('?');
                    return Err(ParseError::Syntax {
                        offset: i,
                        message: format!("unexpected character `{ch}`"),
                    });
                }
            }
        }
    }
    out.push(Token::End(src.len()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Token::Plus(_) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Token::Minus(_) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Token::Star(_) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Node::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Token::Slash(_) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Node::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        let base = self.unary()?;
        if let Token::Caret(_) = self.peek() {
            self.bump();
            let exponent = self.factor()?; // right-associative
            Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if let Token::Minus(_) = self.peek() {
            self.bump();
            let inner = self.unary()?;
            Ok(Node::Neg(Box::new(inner)))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        match self.bump() {
            Token::Num(_, v) => Ok(Node::Num(v)),
            Token::Ident(offset, name) => {
                if name == "x" {
                    return Ok(Node::Var);
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(ParseError::UnknownIdentifier { offset, name });
                };
                match self.bump() {
                    Token::LParen(_) => {}
                    t => {
                        return Err(ParseError::Syntax {
                            offset: t.offset(),
                            message: format!("expected `(` after `{name}`, found {}", t.describe()),
                        })
                    }
                }
                let arg = self.expr()?;
                match self.bump() {
                    Token::RParen(_) => Ok(Node::Call(func, Box::new(arg))),
                    t => Err(ParseError::Syntax {
                        offset: t.offset(),
                        message: format!("expected `)`, found {}", t.describe()),
                    }),
                }
            }
            Token::LParen(_) => {
                let inner = self.expr()?;
                match self.bump() {
                    Token::RParen(_) => Ok(inner),
                    t => Err(ParseError::Syntax {
                        offset: t.offset(),
                        message: format!("expected `)`, found {}", t.describe()),
                    }),
                }
            }
            t => Err(ParseError::Syntax {
                offset: t.offset(),
                message: format!("expected expression, found {}", t.describe()),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

fn check_finite(v: f64, x: f64) -> Result<f64, DomainError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DomainError::Overflow { x })
    }
}

fn eval_pow(base: f64, exponent: f64, x: f64) -> Result<f64, DomainError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(DomainError::ZeroToNegativePower { exponent, x });
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(DomainError::NegativeBaseFractionalPower {
            base,
            exponent,
            x,
        });
    }
    // Same fast path the compiled form takes, so both evaluators agree bitwise.
    if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        return check_finite(base.powi(exponent as i32), x);
    }
    check_finite(base.powf(exponent), x)
}

fn eval_func(func: Func, arg: f64, x: f64) -> Result<f64, DomainError> {
    match func {
        Func::Sin => Ok(arg.sin()),
        Func::Cos => Ok(arg.cos()),
        Func::Exp => check_finite(arg.exp(), x),
        Func::Log => {
            if arg <= 0.0 {
                Err(DomainError::Log { arg, x })
            } else {
                Ok(arg.ln())
            }
        }
        Func::Sqrt => {
            if arg < 0.0 {
                Err(DomainError::Sqrt { arg, x })
            } else {
                Ok(arg.sqrt())
            }
        }
        Func::Tanh => Ok(arg.tanh()),
    }
}

fn eval_node(n: &Node, x: f64) -> Result<f64, DomainError> {
    match n {
        Node::Num(v) => Ok(*v),
        Node::Var => Ok(x),
        Node::Neg(e) => Ok(-eval_node(e, x)?),
        Node::Call(func, arg) => eval_func(*func, eval_node(arg, x)?, x),
        Node::Bin(op, l, r) => {
            let a = eval_node(l, x)?;
            let b = eval_node(r, x)?;
            match op {
                BinOp::Add => check_finite(a + b, x),
                BinOp::Sub => check_finite(a - b, x),
                BinOp::Mul => check_finite(a * b, x),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(DomainError::DivisionByZero { x })
                    } else {
                        check_finite(a / b, x)
                    }
                }
                BinOp::Pow => eval_pow(a, b, x),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Differentiation and folding
// ---------------------------------------------------------------------------

fn num(v: f64) -> Node {
    Node::Num(v)
}

fn add(a: Node, b: Node) -> Node {
    Node::Bin(BinOp::Add, Box::new(a), Box::new(b))
}

fn sub(a: Node, b: Node) -> Node {
    Node::Bin(BinOp::Sub, Box::new(a), Box::new(b))
}

fn mul(a: Node, b: Node) -> Node {
    Node::Bin(BinOp::Mul, Box::new(a), Box::new(b))
}

fn div(a: Node, b: Node) -> Node {
    Node::Bin(BinOp::Div, Box::new(a), Box::new(b))
}

fn pow(a: Node, b: Node) -> Node {
    Node::Bin(BinOp::Pow, Box::new(a), Box::new(b))
}

fn call(f: Func, a: Node) -> Node {
    Node::Call(f, Box::new(a))
}

fn diff_node(n: &Node) -> Node {
    match n {
        Node::Num(_) => num(0.0),
        Node::Var => num(1.0),
        Node::Neg(e) => Node::Neg(Box::new(diff_node(e))),
        Node::Bin(BinOp::Add, l, r) => add(diff_node(l), diff_node(r)),
        Node::Bin(BinOp::Sub, l, r) => sub(diff_node(l), diff_node(r)),
        Node::Bin(BinOp::Mul, l, r) => add(
            mul(diff_node(l), (**r).clone()),
            mul((**l).clone(), diff_node(r)),
        ),
        Node::Bin(BinOp::Div, l, r) => div(
            sub(
                mul(diff_node(l), (**r).clone()),
                mul((**l).clone(), diff_node(r)),
            ),
            pow((**r).clone(), num(2.0)),
        ),
        Node::Bin(BinOp::Pow, base, exponent) => {
            if let Node::Num(c) = **exponent {
                // Power rule for literal exponents; valid for negative bases
                // (where the exp/log form below is not).
                mul(
                    mul(num(c), pow((**base).clone(), num(c - 1.0))),
                    diff_node(base),
                )
            } else {
                // d(u^v) = u^v (v' log u + v u'/u)
                mul(
                    pow((**base).clone(), (**exponent).clone()),
                    add(
                        mul(diff_node(exponent), call(Func::Log, (**base).clone())),
                        div(
                            mul((**exponent).clone(), diff_node(base)),
                            (**base).clone(),
                        ),
                    ),
                )
            }
        }
        Node::Call(func, arg) => {
            let du = diff_node(arg);
            let u = (**arg).clone();
            let outer = match func {
                Func::Sin => call(Func::Cos, u),
                Func::Cos => Node::Neg(Box::new(call(Func::Sin, u))),
                Func::Exp => call(Func::Exp, u),
                Func::Log => return div(du, u),
                Func::Sqrt => return div(du, mul(num(2.0), call(Func::Sqrt, u))),
                Func::Tanh => sub(num(1.0), pow(call(Func::Tanh, u), num(2.0))),
            };
            mul(outer, du)
        }
    }
}

/// Bottom-up constant folding and identity removal. Keeps derivative chains
/// from blowing up under repeated differentiation; not a general simplifier.
fn simplify(n: Node) -> Node {
    let n = match n {
        Node::Neg(e) => Node::Neg(Box::new(simplify(*e))),
        Node::Bin(op, l, r) => Node::Bin(op, Box::new(simplify(*l)), Box::new(simplify(*r))),
        Node::Call(f, a) => Node::Call(f, Box::new(simplify(*a))),
        leaf => leaf,
    };
    fold_once(n)
}

fn as_num(n: &Node) -> Option<f64> {
    match n {
        Node::Num(v) => Some(*v),
        _ => None,
    }
}

fn fold_once(n: Node) -> Node {
    match n {
        Node::Neg(e) => match *e {
            Node::Num(v) => num(-v),
            Node::Neg(inner) => *inner,
            other => Node::Neg(Box::new(other)),
        },
        Node::Call(f, a) => {
            if let Some(v) = as_num(&a) {
                if let Ok(folded) = eval_func(f, v, 0.0) {
                    return num(folded);
                }
            }
            Node::Call(f, a)
        }
        Node::Bin(op, l, r) => {
            if let (Some(a), Some(b)) = (as_num(&l), as_num(&r)) {
                let folded = match op {
                    BinOp::Add => Some(a + b),
                    BinOp::Sub => Some(a - b),
                    BinOp::Mul => Some(a * b),
                    BinOp::Div => (b != 0.0).then(|| a / b),
                    BinOp::Pow => eval_pow(a, b, 0.0).ok(),
                };
                if let Some(v) = folded {
                    if v.is_finite() {
                        return num(v);
                    }
                }
            }
            match (op, as_num(&l), as_num(&r)) {
                (BinOp::Add, Some(a), _) if a == 0.0 => *r,
                (BinOp::Add, _, Some(b)) if b == 0.0 => *l,
                (BinOp::Sub, _, Some(b)) if b == 0.0 => *l,
                (BinOp::Sub, Some(a), _) if a == 0.0 => fold_once(Node::Neg(r)),
                (BinOp::Mul, Some(a), _) if a == 0.0 => num(0.0),
                (BinOp::Mul, _, Some(b)) if b == 0.0 => num(0.0),
                (BinOp::Mul, Some(a), _) if a == 1.0 => *r,
                (BinOp::Mul, _, Some(b)) if b == 1.0 => *l,
                (BinOp::Mul, Some(a), _) if a == -1.0 => fold_once(Node::Neg(r)),
                (BinOp::Mul, _, Some(b)) if b == -1.0 => fold_once(Node::Neg(l)),
                (BinOp::Div, Some(a), _) if a == 0.0 => num(0.0),
                (BinOp::Div, _, Some(b)) if b == 1.0 => *l,
                (BinOp::Pow, _, Some(b)) if b == 1.0 => *l,
                (BinOp::Pow, _, Some(b)) if b == 0.0 => num(1.0),
                _ => Node::Bin(op, l, r),
            }
        }
        leaf => leaf,
    }
}

// ---------------------------------------------------------------------------
// Compiled form
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub(crate) enum Instr {
    Push(f64),
    PushX,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    /// Integer power fast path (|n| <= 64).
    PowI(i32),
    Pow,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

/// Flattened postfix program; evaluation never allocates when the stack fits
/// the inline buffer.
#[derive(Debug, Clone)]
pub(crate) struct Program {
    code: Vec<Instr>,
    max_stack: usize,
}

const INLINE_STACK: usize = 64;

fn compile_node(n: &Node, out: &mut Vec<Instr>) {
    match n {
        Node::Num(v) => out.push(Instr::Push(*v)),
        Node::Var => out.push(Instr::PushX),
        Node::Neg(e) => {
            compile_node(e, out);
            out.push(Instr::Neg);
        }
        Node::Call(f, a) => {
            compile_node(a, out);
            out.push(match f {
                Func::Sin => Instr::Sin,
                Func::Cos => Instr::Cos,
                Func::Exp => Instr::Exp,
                Func::Log => Instr::Log,
                Func::Sqrt => Instr::Sqrt,
                Func::Tanh => Instr::Tanh,
            });
        }
        Node::Bin(op, l, r) => {
            if let (BinOp::Pow, Some(c)) = (op, as_num(r)) {
                if c.fract() == 0.0 && c.abs() <= 64.0 {
                    compile_node(l, out);
                    out.push(Instr::PowI(c as i32));
                    return;
                }
            }
            compile_node(l, out);
            compile_node(r, out);
            out.push(match op {
                BinOp::Add => Instr::Add,
                BinOp::Sub => Instr::Sub,
                BinOp::Mul => Instr::Mul,
                BinOp::Div => Instr::Div,
                BinOp::Pow => Instr::Pow,
            });
        }
    }
}

impl Program {
    pub(crate) fn eval(&self, x: f64) -> Result<f64, DomainError> {
        if self.max_stack <= INLINE_STACK {
            let mut stack = [0.0f64; INLINE_STACK];
            self.eval_on(x, &mut stack)
        } else {
            let mut stack = vec![0.0f64; self.max_stack];
            self.eval_on(x, &mut stack)
        }
    }

    fn eval_on(&self, x: f64, stack: &mut [f64]) -> Result<f64, DomainError> {
        let mut top = 0usize;
        for instr in &self.code {
            match *instr {
                Instr::Push(v) => {
                    stack[top] = v;
                    top += 1;
                }
                Instr::PushX => {
                    stack[top] = x;
                    top += 1;
                }
                Instr::Neg => stack[top - 1] = -stack[top - 1],
                Instr::Add => {
                    top -= 1;
                    stack[top - 1] += stack[top];
                }
                Instr::Sub => {
                    top -= 1;
                    stack[top - 1] -= stack[top];
                }
                Instr::Mul => {
                    top -= 1;
                    stack[top - 1] *= stack[top];
                }
                Instr::Div => {
                    top -= 1;
                    let b = stack[top];
                    if b == 0.0 {
                        return Err(DomainError::DivisionByZero { x });
                    }
                    stack[top - 1] /= b;
                }
                Instr::PowI(p) => {
                    let b = stack[top - 1];
                    if b == 0.0 && p < 0 {
                        return Err(DomainError::ZeroToNegativePower {
                            exponent: p as f64,
                            x,
                        });
                    }
                    stack[top - 1] = b.powi(p);
                }
                Instr::Pow => {
                    top -= 1;
                    stack[top - 1] = eval_pow(stack[top - 1], stack[top], x)?;
                }
                Instr::Sin => stack[top - 1] = stack[top - 1].sin(),
                Instr::Cos => stack[top - 1] = stack[top - 1].cos(),
                Instr::Exp => stack[top - 1] = stack[top - 1].exp(),
                Instr::Log => {
                    let a = stack[top - 1];
                    if a <= 0.0 {
                        return Err(DomainError::Log { arg: a, x });
                    }
                    stack[top - 1] = a.ln();
                }
                Instr::Sqrt => {
                    let a = stack[top - 1];
                    if a < 0.0 {
                        return Err(DomainError::Sqrt { arg: a, x });
                    }
                    stack[top - 1] = a.sqrt();
                }
                Instr::Tanh => stack[top - 1] = stack[top - 1].tanh(),
            }
        }
        check_finite(stack[0], x)
    }
}
