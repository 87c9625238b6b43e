//! Dynamics expressions: a small AST with a text parser and two evaluators.
//!
//! Surface grammar (whitespace insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | primary
//! primary := number | 't' | 'x'<k> | 'u'<k> | func '(' expr ')'
//!          | 'piecewise' '(' 't' ';' numbers ';' numbers ')' | '(' expr ')'
//! func    := 'sin' | 'cos' | 'sqrt' | 'exp'
//! ```
//!
//! Variable indices are 1-based in text (`x1`, `u2`) and 0-based in the AST.
//! A minus sign applied directly to a numeric literal folds into a negative
//! constant, so `Display` output parses back to the identical tree.

use std::fmt;

use thiserror::Error;

use crate::interval::{linear_extension_unchecked, Elementary, Interval, IntervalError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("variable `{name}` at position {pos} is out of range (declared dimension {limit})")]
    IndexOutOfRange {
        name: String,
        pos: usize,
        limit: usize,
    },
    #[error("invalid piecewise node: {0}")]
    InvalidPiecewise(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("expected {expected} {what} values, got {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

impl ExprError {
    /// Character offset of a parse failure, when the error carries one.
    pub fn position(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { pos, .. }
            | ExprError::UnknownIdentifier { pos, .. }
            | ExprError::IndexOutOfRange { pos, .. } => Some(*pos),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Time,
    State,
    Input,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<S> {
    Const(S),
    /// Time has index 0; state and input indices are 0-based.
    Var(VarKind, usize),
    Unary(Elementary, Box<Expr<S>>),
    Binary(BinaryOp, Box<Expr<S>>, Box<Expr<S>>),
    /// Piecewise-constant function of time. Piece `k` covers `(b_{k-1}, b_k]`,
    /// with the first piece unbounded below and the last unbounded above.
    PiecewiseTime { breakpoints: Vec<S>, values: Vec<S> },
}

impl<S: Scalar> Expr<S> {
    pub fn constant(c: S) -> Self {
        Expr::Const(c)
    }

    pub fn time() -> Self {
        Expr::Var(VarKind::Time, 0)
    }

    pub fn state(index: usize) -> Self {
        Expr::Var(VarKind::State, index)
    }

    pub fn input(index: usize) -> Self {
        Expr::Var(VarKind::Input, index)
    }

    pub fn unary(op: Elementary, child: Expr<S>) -> Self {
        Expr::Unary(op, Box::new(child))
    }

    pub fn binary(op: BinaryOp, lhs: Expr<S>, rhs: Expr<S>) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn piecewise(breakpoints: Vec<S>, values: Vec<S>) -> Result<Self, ExprError> {
        validate_piecewise(&breakpoints, &values)?;
        Ok(Expr::PiecewiseTime {
            breakpoints,
            values,
        })
    }

    pub fn parse(source: &str, n_x: usize, n_u: usize) -> Result<Self, ExprError> {
        Parser::new(source, n_x, n_u).parse_all()
    }

    /// Real evaluation at a point.
    pub fn eval_real(&self, t: S, u: &[S], x: &[S]) -> Result<S, ExprError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(kind, i) => match kind {
                VarKind::Time => t,
                VarKind::State => lookup(x, *i, "state")?,
                VarKind::Input => lookup(u, *i, "input")?,
            },
            Expr::Unary(op, child) => op.apply_real(child.eval_real(t, u, x)?)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval_real(t, u, x)?;
                let b = r.eval_real(t, u, x)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b.is_zero() {
                            return Err(ExprError::DivisionByZero);
                        }
                        a / b
                    }
                }
            }
            Expr::PiecewiseTime {
                breakpoints,
                values,
            } => values[piece_index(breakpoints, t)],
        })
    }

    /// Natural interval extension: every real operation is replaced by its
    /// interval counterpart. A time interval spanning breakpoints yields the
    /// hull of the values of every piece it touches.
    pub fn eval_interval(
        &self,
        t: Interval<S>,
        u: &[Interval<S>],
        x: &[Interval<S>],
    ) -> Result<Interval<S>, ExprError> {
        Ok(match self {
            Expr::Const(c) => Interval::point(*c),
            Expr::Var(kind, i) => match kind {
                VarKind::Time => t,
                VarKind::State => lookup(x, *i, "state")?,
                VarKind::Input => lookup(u, *i, "input")?,
            },
            Expr::Unary(op, child) => child.eval_interval(t, u, x)?.elementary(*op)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval_interval(t, u, x)?;
                let b = r.eval_interval(t, u, x)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => a.div(b)?,
                }
            }
            Expr::PiecewiseTime {
                breakpoints,
                values,
            } => {
                let first = piece_index(breakpoints, t.lo());
                let last = piece_index(breakpoints, t.hi());
                let (lo, hi) = values[first..=last]
                    .iter()
                    .fold((S::infinity(), S::neg_infinity()), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                Interval::raw(lo, hi)
            }
        })
    }

    /// True when the tree references no variables at all (time included).
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(..) | Expr::PiecewiseTime { .. } => false,
            Expr::Unary(_, c) => c.is_constant(),
            Expr::Binary(_, l, r) => l.is_constant() && r.is_constant(),
        }
    }

    pub fn depends_on(&self, kind: VarKind) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(k, _) => *k == kind,
            Expr::PiecewiseTime { .. } => kind == VarKind::Time,
            Expr::Unary(_, c) => c.depends_on(kind),
            Expr::Binary(_, l, r) => l.depends_on(kind) || r.depends_on(kind),
        }
    }

    /// Largest variable index (plus one) referenced for `kind`.
    pub fn max_index(&self, kind: VarKind) -> usize {
        match self {
            Expr::Const(_) | Expr::PiecewiseTime { .. } => 0,
            Expr::Var(k, i) => {
                if *k == kind {
                    i + 1
                } else {
                    0
                }
            }
            Expr::Unary(_, c) => c.max_index(kind),
            Expr::Binary(_, l, r) => l.max_index(kind).max(r.max_index(kind)),
        }
    }

    /// Appends every breakpoint of every piecewise node.
    pub fn collect_breakpoints(&self, out: &mut Vec<S>) {
        match self {
            Expr::PiecewiseTime { breakpoints, .. } => out.extend_from_slice(breakpoints),
            Expr::Unary(_, c) => c.collect_breakpoints(out),
            Expr::Binary(_, l, r) => {
                l.collect_breakpoints(out);
                r.collect_breakpoints(out);
            }
            Expr::Const(_) | Expr::Var(..) => {}
        }
    }

    /// Splits the expression into `coeffs . x + offset + remainder`, where the
    /// first two parts collect top-level additive terms that are constant
    /// multiples of a single state variable or pure constants.
    pub fn split_affine(&self, n_x: usize) -> AffineSplit<S> {
        let mut split = AffineSplit {
            coeffs: vec![S::zero(); n_x],
            offset: S::zero(),
            remainder: Vec::new(),
        };
        self.collect_terms(S::one(), &mut split);
        split
    }

    fn collect_terms(&self, sign: S, split: &mut AffineSplit<S>) {
        match self {
            Expr::Binary(BinaryOp::Add, l, r) => {
                l.collect_terms(sign, split);
                r.collect_terms(sign, split);
            }
            Expr::Binary(BinaryOp::Sub, l, r) => {
                l.collect_terms(sign, split);
                r.collect_terms(-sign, split);
            }
            Expr::Unary(Elementary::Neg, c) => c.collect_terms(-sign, split),
            _ => match self.as_linear_term() {
                Some((Some(j), k)) if j < split.coeffs.len() => split.coeffs[j] += sign * k,
                Some((None, k)) => split.offset += sign * k,
                _ => split.remainder.push((sign, self.clone())),
            },
        }
    }

    /// Recognizes `c`, `x_j`, `c * x_j`, `x_j * c`, `x_j / c` and negations,
    /// where `c` is any variable-free subtree.
    fn as_linear_term(&self) -> Option<(Option<usize>, S)> {
        if self.is_constant() {
            let c = self.eval_real(S::zero(), &[], &[]).ok()?;
            return c.is_finite().then_some((None, c));
        }
        match self {
            Expr::Var(VarKind::State, j) => Some((Some(*j), S::one())),
            Expr::Unary(Elementary::Neg, c) => c.as_linear_term().map(|(j, k)| (j, -k)),
            Expr::Binary(BinaryOp::Mul, l, r) => {
                let (a, b) = (l.as_linear_term()?, r.as_linear_term()?);
                match (a, b) {
                    ((None, c), (j, k)) | ((j, k), (None, c)) => Some((j, c * k)),
                    _ => None,
                }
            }
            Expr::Binary(BinaryOp::Div, l, r) => {
                let (j, k) = l.as_linear_term()?;
                match r.as_linear_term()? {
                    (None, c) if !c.is_zero() => Some((j, k / c)),
                    _ => None,
                }
            }
            _ => None,
        }
    }
}

/// Result of [`Expr::split_affine`].
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSplit<S> {
    pub coeffs: Vec<S>,
    pub offset: S,
    /// Remaining terms with their accumulated sign.
    pub remainder: Vec<(S, Expr<S>)>,
}

impl<S: Scalar> AffineSplit<S> {
    /// Natural extension of the nonlinear remainder alone.
    pub fn eval_remainder(
        &self,
        t: Interval<S>,
        u: &[Interval<S>],
        x: &[Interval<S>],
    ) -> Result<Interval<S>, ExprError> {
        let mut acc = Interval::point(S::zero());
        for (sign, term) in &self.remainder {
            acc = acc + term.eval_interval(t, u, x)?.scale(*sign);
        }
        Ok(acc)
    }

    /// Natural extension of the whole split form (affine part evaluated exactly).
    pub fn eval_interval(
        &self,
        t: Interval<S>,
        u: &[Interval<S>],
        x: &[Interval<S>],
    ) -> Result<Interval<S>, ExprError> {
        if x.len() < self.coeffs.len() {
            return Err(ExprError::DimensionMismatch {
                what: "state",
                expected: self.coeffs.len(),
                found: x.len(),
            });
        }
        let lin = linear_extension_unchecked(&self.coeffs, &x[..self.coeffs.len()]);
        Ok(lin + Interval::point(self.offset) + self.eval_remainder(t, u, x)?)
    }
}

fn lookup<T: Copy>(values: &[T], i: usize, what: &'static str) -> Result<T, ExprError> {
    values.get(i).copied().ok_or(ExprError::DimensionMismatch {
        what,
        expected: i + 1,
        found: values.len(),
    })
}

/// Index of the piece containing `t`: the number of breakpoints strictly below `t`.
fn piece_index<S: Scalar>(breakpoints: &[S], t: S) -> usize {
    breakpoints.partition_point(|&b| b < t)
}

fn validate_piecewise<S: Scalar>(breakpoints: &[S], values: &[S]) -> Result<(), ExprError> {
    if breakpoints.is_empty() {
        return Err(ExprError::InvalidPiecewise(
            "at least one breakpoint is required".into(),
        ));
    }
    if values.len() != breakpoints.len() + 1 {
        return Err(ExprError::InvalidPiecewise(format!(
            "{} breakpoints need {} values, got {}",
            breakpoints.len(),
            breakpoints.len() + 1,
            values.len()
        )));
    }
    if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ExprError::InvalidPiecewise(
            "breakpoints must be strictly increasing".into(),
        ));
    }
    if breakpoints.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(ExprError::InvalidPiecewise("non-finite entry".into()));
    }
    Ok(())
}

impl<S: Scalar> fmt::Display for Expr<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(VarKind::Time, _) => write!(f, "t"),
            Expr::Var(VarKind::State, i) => write!(f, "x{}", i + 1),
            Expr::Var(VarKind::Input, i) => write!(f, "u{}", i + 1),
            Expr::Unary(Elementary::Neg, c) => write!(f, "-({c})"),
            Expr::Unary(op, c) => write!(f, "{}({c})", op.name()),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::PiecewiseTime {
                breakpoints,
                values,
            } => {
                let join = |v: &[S]| {
                    v.iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(", ")
                };
                write!(
                    f,
                    "piecewise(t; {}; {})",
                    join(breakpoints),
                    join(values)
                )
            }
        }
    }
}

/// A vector field `f(t, u, x)` with one expression per state component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<S> {
    components: Vec<Expr<S>>,
    n_u: usize,
}

impl<S: Scalar> VectorField<S> {
    pub fn new(components: Vec<Expr<S>>, n_u: usize) -> Result<Self, ExprError> {
        let n_x = components.len();
        if n_x == 0 {
            return Err(ExprError::DimensionMismatch {
                what: "state",
                expected: 1,
                found: 0,
            });
        }
        for c in &components {
            let (mx, mu) = (c.max_index(VarKind::State), c.max_index(VarKind::Input));
            if mx > n_x {
                return Err(ExprError::IndexOutOfRange {
                    name: format!("x{mx}"),
                    pos: 0,
                    limit: n_x,
                });
            }
            if mu > n_u {
                return Err(ExprError::IndexOutOfRange {
                    name: format!("u{mu}"),
                    pos: 0,
                    limit: n_u,
                });
            }
        }
        Ok(Self { components, n_u })
    }

    /// Parses one expression per component.
    pub fn parse<T: AsRef<str>>(sources: &[T], n_u: usize) -> Result<Self, ExprError> {
        let n_x = sources.len();
        let components = sources
            .iter()
            .map(|s| Expr::parse(s.as_ref(), n_x, n_u))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(components, n_u)
    }

    #[inline]
    pub fn n_x(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn components(&self) -> &[Expr<S>] {
        &self.components
    }

    pub fn eval_real(&self, t: S, u: &[S], x: &[S]) -> Result<Vec<S>, ExprError> {
        self.components.iter().map(|c| c.eval_real(t, u, x)).collect()
    }

    pub fn eval_interval(
        &self,
        t: Interval<S>,
        u: &[Interval<S>],
        x: &[Interval<S>],
    ) -> Result<Vec<Interval<S>>, ExprError> {
        self.components
            .iter()
            .map(|c| c.eval_interval(t, u, x))
            .collect()
    }

    /// Sorted, deduplicated breakpoints of all piecewise-time nodes.
    pub fn breakpoints(&self) -> Vec<S> {
        let mut out = Vec::new();
        for c in &self.components {
            c.collect_breakpoints(&mut out);
        }
        sort_dedup(&mut out);
        out
    }
}

pub(crate) fn sort_dedup<S: Scalar>(v: &mut Vec<S>) {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    v.dedup();
}

#[derive(Debug, Clone, PartialEq)]
enum Token<S> {
    Number(S),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Semi,
    Comma,
    End,
}

struct Parser<'a, S> {
    chars: Vec<char>,
    source: &'a str,
    pos: usize,
    tok: Token<S>,
    tok_pos: usize,
    n_x: usize,
    n_u: usize,
}

impl<'a, S: Scalar> Parser<'a, S> {
    fn new(source: &'a str, n_x: usize, n_u: usize) -> Self {
        Self {
            chars: source.chars().collect(),
            source,
            pos: 0,
            tok: Token::End,
            tok_pos: 0,
            n_x,
            n_u,
        }
    }

    fn syntax(&self, pos: usize, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            pos,
            message: message.into(),
        }
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
        self.tok_pos = self.pos;
        let Some(&c) = self.chars.get(self.pos) else {
            self.tok = Token::End;
            return Ok(());
        };
        let single = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            ';' => Some(Token::Semi),
            ',' => Some(Token::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            self.tok = tok;
            return Ok(());
        }
        if c.is_ascii_digit() || c == '.' {
            let start = self.pos;
            while self.pos < self.chars.len()
                && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '.')
            {
                self.pos += 1;
            }
            if self.pos < self.chars.len() && matches!(self.chars[self.pos], 'e' | 'E') {
                let mut look = self.pos + 1;
                if look < self.chars.len() && matches!(self.chars[look], '+' | '-') {
                    look += 1;
                }
                if look < self.chars.len() && self.chars[look].is_ascii_digit() {
                    self.pos = look;
                    while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                }
            }
            let text: String = self.chars[start..self.pos].iter().collect();
            let value = text
                .parse::<S>()
                .map_err(|_| self.syntax(start, format!("malformed number `{text}`")))?;
            self.tok = Token::Number(value);
            return Ok(());
        }
        if c.is_alphabetic() || c == '_' {
            let start = self.pos;
            while self.pos < self.chars.len()
                && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
            {
                self.pos += 1;
            }
            self.tok = Token::Ident(self.chars[start..self.pos].iter().collect());
            return Ok(());
        }
        Err(self.syntax(self.pos, format!("unexpected character `{c}`")))
    }

    fn expect(&mut self, want: Token<S>, what: &str) -> Result<(), ExprError> {
        if self.tok != want {
            return Err(self.syntax(self.tok_pos, format!("expected {what}")));
        }
        self.advance()
    }

    fn parse_all(mut self) -> Result<Expr<S>, ExprError> {
        if self.source.trim().is_empty() {
            return Err(self.syntax(0, "empty expression"));
        }
        self.advance()?;
        let e = self.parse_expr()?;
        if self.tok != Token::End {
            return Err(self.syntax(self.tok_pos, "unexpected trailing input"));
        }
        Ok(e)
    }

    fn parse_expr(&mut self) -> Result<Expr<S>, ExprError> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.tok {
                Token::Plus => BinaryOp::Add,
                Token::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.parse_term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn parse_term(&mut self) -> Result<Expr<S>, ExprError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.tok {
                Token::Star => BinaryOp::Mul,
                Token::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.parse_unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn parse_unary(&mut self) -> Result<Expr<S>, ExprError> {
        match self.tok {
            Token::Minus => {
                self.advance()?;
                if let Token::Number(v) = self.tok {
                    self.advance()?;
                    return Ok(Expr::Const(-v));
                }
                Ok(Expr::unary(Elementary::Neg, self.parse_unary()?))
            }
            Token::Plus => {
                self.advance()?;
                self.parse_unary()
            }
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Expr<S>, ExprError> {
        let pos = self.tok_pos;
        match self.tok.clone() {
            Token::Number(v) => {
                self.advance()?;
                Ok(Expr::Const(v))
            }
            Token::LParen => {
                self.advance()?;
                let e = self.parse_expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(e)
            }
            Token::Ident(name) => {
                self.advance()?;
                self.parse_identifier(name, pos)
            }
            Token::End => Err(self.syntax(pos, "unexpected end of input")),
            _ => Err(self.syntax(pos, "expected a number, variable, function or `(`")),
        }
    }

    fn parse_identifier(&mut self, name: String, pos: usize) -> Result<Expr<S>, ExprError> {
        let func = match name.as_str() {
            "t" => return Ok(Expr::time()),
            "sin" => Some(Elementary::Sin),
            "cos" => Some(Elementary::Cos),
            "sqrt" => Some(Elementary::Sqrt),
            "exp" => Some(Elementary::Exp),
            "piecewise" => return self.parse_piecewise(pos),
            _ => None,
        };
        if let Some(op) = func {
            self.expect(Token::LParen, "`(` after function name")?;
            let arg = self.parse_expr()?;
            self.expect(Token::RParen, "`)`")?;
            return Ok(Expr::unary(op, arg));
        }
        let (kind, limit) = match name.chars().next() {
            Some('x') => (VarKind::State, self.n_x),
            Some('u') => (VarKind::Input, self.n_u),
            _ => return Err(ExprError::UnknownIdentifier { name, pos }),
        };
        let digits = &name[1..];
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(ExprError::UnknownIdentifier { name, pos });
        }
        let index: usize = digits
            .parse()
            .map_err(|_| ExprError::UnknownIdentifier {
                name: name.clone(),
                pos,
            })?;
        if index == 0 || index > limit {
            return Err(ExprError::IndexOutOfRange { name, pos, limit });
        }
        Ok(Expr::Var(kind, index - 1))
    }

    fn parse_piecewise(&mut self, pos: usize) -> Result<Expr<S>, ExprError> {
        self.expect(Token::LParen, "`(` after `piecewise`")?;
        if self.tok != Token::Ident("t".into()) {
            return Err(self.syntax(self.tok_pos, "piecewise must be a function of `t`"));
        }
        self.advance()?;
        self.expect(Token::Semi, "`;` after `t`")?;
        let breakpoints = self.parse_number_list()?;
        self.expect(Token::Semi, "`;` between breakpoints and values")?;
        let values = self.parse_number_list()?;
        self.expect(Token::RParen, "`)`")?;
        validate_piecewise(&breakpoints, &values).map_err(|e| self.syntax(pos, e.to_string()))?;
        Ok(Expr::PiecewiseTime {
            breakpoints,
            values,
        })
    }

    fn parse_number_list(&mut self) -> Result<Vec<S>, ExprError> {
        let mut out = vec![self.parse_signed_number()?];
        while self.tok == Token::Comma {
            self.advance()?;
            out.push(self.parse_signed_number()?);
        }
        Ok(out)
    }

    fn parse_signed_number(&mut self) -> Result<S, ExprError> {
        let negative = match self.tok {
            Token::Minus => {
                self.advance()?;
                true
            }
            Token::Plus => {
                self.advance()?;
                false
            }
            _ => false,
        };
        match self.tok {
            Token::Number(v) => {
                self.advance()?;
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.syntax(self.tok_pos, "expected a number")),
        }
    }
}
