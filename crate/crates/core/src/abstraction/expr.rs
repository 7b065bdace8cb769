//! Arithmetic expressions over `x1`, `x2` for vector fields.
//!
//! ```text
//! field  := expr (';' expr)*
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'x1' | 'x2' | func '(' expr ')' | '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x1^2`
//! is `-(x1^2)`.

use std::fmt;

use super::AbstractionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based coordinate index: `x1` is `Var(0)`.
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

const NEG_PRECEDENCE: u8 = 3;
const ATOM_PRECEDENCE: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => ATOM_PRECEDENCE,
            Expr::Neg(_) => NEG_PRECEDENCE,
            Expr::Bin(op, ..) => op.precedence(),
        }
    }

    /// Highest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) | Expr::Call(_, e) => e.arity(),
            Expr::Bin(_, l, r) => l.arity().max(r.arity()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, AbstractionError> {
        let value = match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => *x.get(*i).ok_or(AbstractionError::Eval(format!("x{} is not bound", i + 1)))?,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Call(f, e) => {
                let v = e.eval(x)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                }
            }
            Expr::Bin(op, l, r) => {
                let (a, b) = (l.eval(x)?, r.eval(x)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => {
                        return Err(AbstractionError::Eval("division by zero".into()))
                    }
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(AbstractionError::Eval(format!("non-finite value in `{self}`")))
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Neg(e) => {
                f.write_str("-")?;
                wrap(f, e, e.precedence() < NEG_PRECEDENCE)
            }
            Expr::Bin(op, l, r) => {
                let p = op.precedence();
                let (left_parens, right_parens) = if *op == BinOp::Pow {
                    (l.precedence() <= p, r.precedence() < NEG_PRECEDENCE)
                } else {
                    (l.precedence() < p, r.precedence() <= p)
                };
                wrap(f, l, left_parens)?;
                write!(f, " {} ", op.symbol())?;
                wrap(f, r, right_parens)
            }
        }
    }
}

/// A parsed vector field `a : ℝⁿ → ℝⁿ`, `n ∈ {1, 2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<Expr>,
}

impl VectorField {
    pub fn new(components: Vec<Expr>) -> Result<Self, AbstractionError> {
        let n = components.len();
        if !(1..=2).contains(&n) {
            return Err(AbstractionError::Dimension(n));
        }
        if let Some(e) = components.iter().find(|e| e.arity() > n) {
            return Err(AbstractionError::UnknownIdentifier {
                name: format!("x{}", e.arity()),
                line: 1,
                column: 1,
            });
        }
        Ok(VectorField { components })
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, AbstractionError> {
        self.components.iter().map(|e| e.eval(x)).collect()
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Semi,
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "number {v}"),
            Token::Ident(s) => write!(f, "`{s}`"),
            Token::Op(c) => write!(f, "`{c}`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::Semi => f.write_str("`;`"),
            Token::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn tokenize(src: &str) -> Result<Vec<(Token, Pos)>, AbstractionError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        let token = if c.is_ascii_digit() || c == '.' {
            let mut text = String::new();
            while let Some(&d) = chars.peek() {
                let exponent_sign = (d == '+' || d == '-') && text.ends_with(['e', 'E']);
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exponent_sign {
                    text.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            column += text.chars().count();
            let value = text.parse::<f64>().map_err(|_| AbstractionError::Syntax {
                line: pos.line,
                column: pos.column,
                message: format!("malformed number `{text}`"),
            })?;
            Token::Num(value)
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut text = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    text.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            column += text.chars().count();
            Token::Ident(text)
        } else {
            chars.next();
            column += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => Token::Op(c),
                '(' => Token::LParen,
                ')' => Token::RParen,
                ';' => Token::Semi,
                _ => {
                    return Err(AbstractionError::Syntax {
                        line: pos.line,
                        column: pos.column,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        out.push((token, pos));
    }
    out.push((Token::End, Pos { line, column }));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at].0
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].1
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].0.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> AbstractionError {
        let Pos { line, column } = self.pos();
        AbstractionError::Syntax { line, column, message: format!("expected {expected}, found {}", self.peek()) }
    }

    fn field(&mut self) -> Result<Vec<Expr>, AbstractionError> {
        let mut components = vec![self.expr()?];
        while *self.peek() == Token::Semi {
            self.bump();
            components.push(self.expr()?);
        }
        if *self.peek() != Token::End {
            return Err(self.error("an operator or `;`"));
        }
        Ok(components)
    }

    fn expr(&mut self) -> Result<Expr, AbstractionError> {
        let mut left = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Op('+') => BinOp::Add,
                Token::Op('-') => BinOp::Sub,
                _ => return Ok(left),
            };
            self.bump();
            left = Expr::Bin(op, Box::new(left), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, AbstractionError> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Op('*') => BinOp::Mul,
                Token::Op('/') => BinOp::Div,
                _ => return Ok(left),
            };
            self.bump();
            left = Expr::Bin(op, Box::new(left), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, AbstractionError> {
        if *self.peek() == Token::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, AbstractionError> {
        let base = self.atom()?;
        if *self.peek() == Token::Op('^') {
            self.bump();
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, AbstractionError> {
        let pos = self.pos();
        match self.peek().clone() {
            Token::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Token::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Token::RParen {
                    return Err(self.error("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            Token::Ident(name) => {
                self.bump();
                let func = match name.as_str() {
                    "x1" => return Ok(Expr::Var(0)),
                    "x2" => return Ok(Expr::Var(1)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    _ => {
                        return Err(AbstractionError::UnknownIdentifier {
                            name,
                            line: pos.line,
                            column: pos.column,
                        })
                    }
                };
                if *self.peek() != Token::LParen {
                    return Err(self.error("`(`"));
                }
                self.bump();
                let arg = self.expr()?;
                if *self.peek() != Token::RParen {
                    return Err(self.error("`)`"));
                }
                self.bump();
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.error("a number, variable, function or `(`")),
        }
    }
}

/// Parses a single expression.
pub fn parse_expr(src: &str) -> Result<Expr, AbstractionError> {
    let mut parser = Parser { tokens: tokenize(src)?, at: 0 };
    let e = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(parser.error("an operator"));
    }
    Ok(e)
}

/// Parses `expr` or `expr ; expr` into a vector field. Variables beyond the
/// field's dimension are rejected.
pub fn parse_field(src: &str) -> Result<VectorField, AbstractionError> {
    let tokens = tokenize(src)?;
    let dimension = 1 + tokens.iter().filter(|(t, _)| *t == Token::Semi).count();
    if let Some((Token::Ident(name), pos)) = tokens.iter().find(|(t, _)| {
        matches!(t, Token::Ident(name) if name.strip_prefix('x').and_then(|i| i.parse::<usize>().ok()).is_some_and(|i| i == 0 || i > dimension))
    }) {
        return Err(AbstractionError::UnknownIdentifier { name: name.clone(), line: pos.line, column: pos.column });
    }
    let mut parser = Parser { tokens, at: 0 };
    VectorField::new(parser.field()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_field() {
        let f = parse_field("-x1").unwrap();
        assert_eq!(f.components(), [Expr::Neg(Box::new(Expr::Var(0)))]);
        assert_eq!(f.eval(&[2.0]).unwrap(), [-2.0]);
    }

    #[test]
    fn harmonic_oscillator() {
        let f = parse_field("x2 ; -x1").unwrap();
        assert_eq!(f.dimension(), 2);
        assert_eq!(f.eval(&[1.0, 3.0]).unwrap(), [3.0, -1.0]);
    }

    #[test]
    fn dangling_operator_position() {
        assert_eq!(
            parse_field("x1 +").unwrap_err(),
            AbstractionError::Syntax {
                line: 1,
                column: 5,
                message: "expected a number, variable, function or `(`, found end of input".into()
            }
        );
    }

    #[test]
    fn error_positions_span_lines() {
        let err = parse_field("x1;\n  x2 * )").unwrap_err();
        assert!(matches!(err, AbstractionError::Syntax { line: 2, column: 8, .. }), "{err:?}");
    }

    #[test]
    fn unknown_identifiers() {
        assert!(matches!(
            parse_field("x1 + y").unwrap_err(),
            AbstractionError::UnknownIdentifier { ref name, line: 1, column: 6 } if name == "y"
        ));
        assert!(matches!(
            parse_field("x2").unwrap_err(),
            AbstractionError::UnknownIdentifier { ref name, .. } if name == "x2"
        ));
        assert!(matches!(parse_field("tan(x1)").unwrap_err(), AbstractionError::UnknownIdentifier { .. }));
    }

    #[test]
    fn three_components_are_rejected() {
        assert_eq!(parse_field("x1; x2; 0").unwrap_err(), AbstractionError::Dimension(3));
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("2 ^ 3 ^ 2").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), 512.0);
        let e = parse_expr("-2 ^ 2").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), -4.0);
        let e = parse_expr("8 / 4 / 2").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), 1.0);
        let e = parse_expr("1 - 2 - 3").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), -4.0);
        let e = parse_expr("2 * -x1 ^ 2 + exp(0) * sin(0) - cos(0)").unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), -19.0);
        let e = parse_expr("1.5e1 + .5").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), 15.5);
    }

    #[test]
    fn evaluation_errors() {
        let e = parse_expr("1 / x1").unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(AbstractionError::Eval(_))));
        assert!(matches!(parse_expr("exp(1000)").unwrap().eval(&[]), Err(AbstractionError::Eval(_))));
        assert_eq!(e.eval(&[4.0]).unwrap(), 0.25);
    }

    #[test]
    fn printing_normalizes() {
        let e = parse_expr("((x1))+ -(x2*3)^2").unwrap();
        assert_eq!(e.to_string(), "x1 + -(x2 * 3) ^ 2");
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
        assert_eq!(parse_expr("(-x1)^2").unwrap().to_string(), "(-x1) ^ 2");
        assert_eq!(parse_expr("x1 - (x2 - 1)").unwrap().to_string(), "x1 - (x2 - 1)");
        assert_eq!(parse_expr("(2 ^ 3) ^ 2").unwrap().to_string(), "(2 ^ 3) ^ 2");
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..1000, 0u32..4).prop_map(|(m, s)| Expr::Num(m as f64 / 10f64.powi(s as i32))),
            (0usize..2).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            let op = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow)
            ];
            let func = prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp)];
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (op, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::Bin(o, Box::new(l), Box::new(r))),
                (func, inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse_expr(&printed).unwrap();
            prop_assert_eq!(&reparsed, &e, "printed as {}", printed);
            prop_assert_eq!(reparsed.to_string(), printed);
        }
    }
}
