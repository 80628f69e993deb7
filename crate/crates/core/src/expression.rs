//! Objective functions as text: parsing, point evaluation, printing and exact
//! symbolic differentiation.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' INT)?
//! base   := NUMBER | 'pi' | 'x' INT | '(' expr ')' | FUNC '(' expr ')'
//! FUNC   := 'sin' | 'cos' | 'exp' | 'ln'
//! ```
//!
//! Variables are written one-based (`x1 .. xn`) and stored zero-based.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Abstract syntax tree of an objective.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Pi,
    /// Zero-based variable index.
    Var(usize),
    Neg(Box<Node>),
    Call(Func, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    /// Non-negative integer power.
    Pow(Box<Node>, u32),
}

impl Node {
    fn constant_value(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            Node::Pi => Some(std::f64::consts::PI),
            _ => None,
        }
    }

    fn is_const(&self, v: f64) -> bool {
        self.constant_value() == Some(v)
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) | Node::Pi => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Call(_, a) | Node::Pow(a, _) => a.max_var(),
            Node::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    fn compile(&self, tape: &mut Vec<Op>) {
        match self {
            Node::Const(c) => tape.push(Op::Const(*c)),
            Node::Pi => tape.push(Op::Const(std::f64::consts::PI)),
            Node::Var(i) => tape.push(Op::Var(*i)),
            Node::Neg(a) => {
                a.compile(tape);
                tape.push(Op::Neg);
            }
            Node::Call(f, a) => {
                a.compile(tape);
                tape.push(Op::Call(*f));
            }
            Node::Binary(op, a, b) => {
                a.compile(tape);
                b.compile(tape);
                tape.push(Op::Binary(*op));
            }
            Node::Pow(a, k) => {
                a.compile(tape);
                tape.push(Op::Pow(*k));
            }
        }
    }
}

// Simplifying constructors. Only constant folding and 0/1 identities; any
// fold that would hide a domain error (ln of a non-positive constant,
// division by a zero constant) is left unfolded.

fn constant(c: f64) -> Node {
    Node::Const(c)
}

fn neg(a: Node) -> Node {
    match a {
        Node::Neg(inner) => *inner,
        a => match a.constant_value() {
            Some(c) => constant(-c),
            None => Node::Neg(Box::new(a)),
        },
    }
}

fn add(a: Node, b: Node) -> Node {
    if a.is_const(0.0) {
        return b;
    }
    if b.is_const(0.0) {
        return a;
    }
    match (a.constant_value(), b.constant_value()) {
        (Some(x), Some(y)) => constant(x + y),
        _ => Node::Binary(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Node, b: Node) -> Node {
    if b.is_const(0.0) {
        return a;
    }
    if a.is_const(0.0) {
        return neg(b);
    }
    match (a.constant_value(), b.constant_value()) {
        (Some(x), Some(y)) => constant(x - y),
        _ => Node::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Node, b: Node) -> Node {
    if a.is_const(0.0) || b.is_const(0.0) {
        return constant(0.0);
    }
    if a.is_const(1.0) {
        return b;
    }
    if b.is_const(1.0) {
        return a;
    }
    match (a.constant_value(), b.constant_value()) {
        (Some(x), Some(y)) => constant(x * y),
        _ => Node::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Node, b: Node) -> Node {
    if b.is_const(1.0) {
        return a;
    }
    if a.is_const(0.0) {
        return constant(0.0);
    }
    match (a.constant_value(), b.constant_value()) {
        (Some(x), Some(y)) if y != 0.0 => constant(x / y),
        _ => Node::Binary(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

fn pow(a: Node, k: u32) -> Node {
    match k {
        0 => constant(1.0),
        1 => a,
        _ => match a.constant_value() {
            Some(c) => constant(c.powi(k as i32)),
            None => Node::Pow(Box::new(a), k),
        },
    }
}

fn call(f: Func, a: Node) -> Node {
    match (f, a.constant_value()) {
        (Func::Sin, Some(c)) => constant(c.sin()),
        (Func::Cos, Some(c)) => constant(c.cos()),
        (Func::Exp, Some(c)) => constant(c.exp()),
        (Func::Ln, Some(c)) if c > 0.0 => constant(c.ln()),
        _ => Node::Call(f, Box::new(a)),
    }
}

fn derivative(node: &Node, var: usize) -> Node {
    match node {
        Node::Const(_) | Node::Pi => constant(0.0),
        Node::Var(j) => constant(if *j == var { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(derivative(a, var)),
        Node::Binary(op, a, b) => {
            let da = derivative(a, var);
            let db = derivative(b, var);
            match op {
                BinOp::Add => add(da, db),
                BinOp::Sub => sub(da, db),
                BinOp::Mul => add(mul(da, (**b).clone()), mul((**a).clone(), db)),
                BinOp::Div => sub(
                    div(da, (**b).clone()),
                    div(mul((**a).clone(), db), pow((**b).clone(), 2)),
                ),
            }
        }
        Node::Pow(a, k) => {
            if *k == 0 {
                return constant(0.0);
            }
            let da = derivative(a, var);
            mul(mul(constant(*k as f64), pow((**a).clone(), k - 1)), da)
        }
        Node::Call(f, a) => {
            let da = derivative(a, var);
            let inner = (**a).clone();
            match f {
                Func::Sin => mul(call(Func::Cos, inner), da),
                Func::Cos => neg(mul(call(Func::Sin, inner), da)),
                Func::Exp => mul(call(Func::Exp, inner), da),
                Func::Ln => div(da, inner),
            }
        }
    }
}

/// Postfix instruction for the flat evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Op {
    Const(f64),
    Var(usize),
    Neg,
    Call(Func),
    Binary(BinOp),
    Pow(u32),
}

/// An immutable objective over `dimension` variables.
///
/// Holds both the tree (for printing and differentiation) and a compiled
/// postfix tape that point and interval evaluation walk.
#[derive(Debug, Clone)]
pub struct Expression {
    dimension: usize,
    root: Node,
    tape: Vec<Op>,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.root == other.root
    }
}

impl Expression {
    pub fn new(root: Node, dimension: usize) -> Result<Self> {
        if let Some(max) = root.max_var() {
            if max >= dimension {
                return Err(Error::VariableOutOfRange {
                    index: max + 1,
                    dimension,
                });
            }
        }
        let mut tape = Vec::new();
        root.compile(&mut tape);
        Ok(Self {
            dimension,
            root,
            tape,
        })
    }

    pub fn parse(text: &str, dimension: usize) -> Result<Self> {
        let root = Parser::new(text, dimension).parse()?;
        Self::new(root, dimension)
    }

    pub fn constant(value: f64, dimension: usize) -> Self {
        Self::new(Node::Const(value), dimension).expect("constants reference no variables")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub(crate) fn tape(&self) -> &[Op] {
        &self.tape
    }

    /// Number of tree nodes.
    pub fn size(&self) -> usize {
        self.tape.len()
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: point.len(),
            });
        }
        let mut stack: Vec<f64> = Vec::with_capacity(16);
        for op in &self.tape {
            match *op {
                Op::Const(c) => stack.push(c),
                Op::Var(i) => stack.push(point[i]),
                Op::Neg => {
                    let a = stack.last_mut().unwrap();
                    *a = -*a;
                }
                Op::Call(f) => {
                    let a = stack.last_mut().unwrap();
                    *a = match f {
                        Func::Sin => a.sin(),
                        Func::Cos => a.cos(),
                        Func::Exp => a.exp(),
                        Func::Ln => {
                            if *a <= 0.0 {
                                return Err(Error::Domain(format!("ln of non-positive value {a}")));
                            }
                            a.ln()
                        }
                    };
                }
                Op::Binary(op) => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a = match op {
                        BinOp::Add => *a + b,
                        BinOp::Sub => *a - b,
                        BinOp::Mul => *a * b,
                        BinOp::Div => {
                            if b == 0.0 {
                                return Err(Error::Domain("division by zero".into()));
                            }
                            *a / b
                        }
                    };
                }
                Op::Pow(k) => {
                    let a = stack.last_mut().unwrap();
                    *a = a.powi(k as i32);
                }
            }
        }
        Ok(stack.pop().unwrap())
    }

    /// Exact partial derivative with respect to the zero-based variable `var`.
    pub fn differentiate(&self, var: usize) -> Expression {
        assert!(var < self.dimension, "variable index out of range");
        Self::new(derivative(&self.root, var), self.dimension)
            .expect("derivative references only existing variables")
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{:?})", -c)
            }
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Pi => write!(f, "pi"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
            Node::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Node::Pow(a, k) => write!(f, "({a})^{k}"),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// The objective together with its symbolic gradient and Hessian.
#[derive(Debug, Clone)]
pub struct Objective {
    f: Expression,
    gradient: Vec<Expression>,
    // Upper triangle, row-major: (0,0), (0,1), .., (0,n-1), (1,1), ..
    hessian: Vec<Expression>,
}

impl Objective {
    pub fn new(f: Expression) -> Self {
        let n = f.dimension();
        let gradient: Vec<Expression> = (0..n).map(|i| f.differentiate(i)).collect();
        let mut hessian = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                hessian.push(gradient[i].differentiate(j));
            }
        }
        Self {
            f,
            gradient,
            hessian,
        }
    }

    pub fn parse(text: &str, dimension: usize) -> Result<Self> {
        Ok(Self::new(Expression::parse(text, dimension)?))
    }

    pub fn dimension(&self) -> usize {
        self.f.dimension()
    }

    pub fn expression(&self) -> &Expression {
        &self.f
    }

    pub fn gradient_expressions(&self) -> &[Expression] {
        &self.gradient
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.f.evaluate(x)
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        for (g, e) in out.iter_mut().zip(&self.gradient) {
            *g = e.evaluate(x)?;
        }
        Ok(())
    }

    /// Symbolic second partial derivative for `(i, j)` in either order.
    pub fn hessian_entry(&self, i: usize, j: usize) -> &Expression {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let n = self.dimension();
        &self.hessian[i * n - i * i.saturating_sub(1) / 2 + (j - i)]
    }

    /// Dense Hessian at a point, row-major.
    pub fn hessian_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dimension();
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.hessian_entry(i, j).evaluate(x)?;
                h[i * n + j] = v;
                h[j * n + i] = v;
            }
        }
        Ok(h)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dimension: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, dimension: usize) -> Self {
        Self {
            src: text.as_bytes(),
            pos: 0,
            dimension,
        }
    }

    fn parse(mut self) -> Result<Node> {
        let node = self.expr()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.error(format!("unexpected `{}`", self.src[self.pos] as char)));
        }
        Ok(node)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            position: self.pos,
            message: message.into(),
        }
    }

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
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            let digits = self.take_while(|c| c.is_ascii_digit());
            if digits.is_empty() {
                self.pos = start;
                return Err(self.error("expected a non-negative integer exponent"));
            }
            let k: u32 = digits.parse().map_err(|_| Error::Syntax {
                position: start,
                message: "exponent too large".into(),
            })?;
            return Ok(Node::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn take_while(&mut self, pred: impl Fn(u8) -> bool) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() && pred(self.src[self.pos]) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        self.take_while(|c| c.is_ascii_digit());
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            self.take_while(|c| c.is_ascii_digit());
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.take_while(|c| c.is_ascii_digit()).is_empty() {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Node::Const)
            .map_err(|_| Error::Syntax {
                position: start,
                message: format!("malformed number `{text}`"),
            })
    }

    fn base(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let ident = self.take_while(|c| c.is_ascii_alphanumeric() || c == b'_');
                if ident == "pi" {
                    return Ok(Node::Pi);
                }
                let func = match ident {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    "ln" => Some(Func::Ln),
                    _ => None,
                };
                if let Some(func) = func {
                    self.expect(b'(')?;
                    let arg = self.expr()?;
                    self.expect(b')')?;
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                if let Some(digits) = ident.strip_prefix('x') {
                    if !digits.is_empty() && digits.bytes().all(|c| c.is_ascii_digit()) {
                        let index: usize = digits.parse().map_err(|_| Error::Syntax {
                            position: start,
                            message: "variable index too large".into(),
                        })?;
                        if index == 0 || index > self.dimension {
                            return Err(Error::VariableOutOfRange {
                                index,
                                dimension: self.dimension,
                            });
                        }
                        return Ok(Node::Var(index - 1));
                    }
                }
                Err(Error::UnknownIdentifier {
                    position: start,
                    name: ident.to_string(),
                })
            }
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
        }
    }
}
