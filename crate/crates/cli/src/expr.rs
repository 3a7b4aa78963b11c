//! Arithmetic expressions for functions, sources and densities.
//!
//! Grammar: numbers, the named variables, `pi`, `e`, binary `+ - * / ^`
//! (`^` binds tightest and associates to the right), unary minus, and the
//! functions `exp`, `ln`, `sqrt`, `sin`, `cos`, `tanh`, `abs`, `pow(u, v)`,
//! `min(u, v)`, `max(u, v)` and `indicator(u, lo, hi)`, which is one when
//! `lo ≤ u ≤ hi` and zero otherwise.

use std::fmt;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tanh,
    Abs,
    Pow,
    Min,
    Max,
    Indicator,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "exp" => (Func::Exp, 1),
            "ln" => (Func::Ln, 1),
            "sqrt" => (Func::Sqrt, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "tanh" => (Func::Tanh, 1),
            "abs" => (Func::Abs, 1),
            "pow" => (Func::Pow, 2),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            "indicator" => (Func::Indicator, 3),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Node {
    fn eval(&self, v: &[f64]) -> f64 {
        match self {
            Node::Num(c) => *c,
            Node::Var(i) => v[*i],
            Node::Neg(a) => -a.eval(v),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(v), b.eval(v));
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' => a / b,
                    _ => a.powf(b),
                }
            }
            Node::Call(f, args) => {
                let a = args[0].eval(v);
                match f {
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln(),
                    Func::Sqrt => a.sqrt(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tanh => a.tanh(),
                    Func::Abs => a.abs(),
                    Func::Pow => a.powf(args[1].eval(v)),
                    Func::Min => a.min(args[1].eval(v)),
                    Func::Max => a.max(args[1].eval(v)),
                    Func::Indicator => {
                        if a >= args[1].eval(v) && a <= args[2].eval(v) {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            }
        }
    }

    fn uses_vars(&self) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(_) => true,
            Node::Neg(a) => a.uses_vars(),
            Node::Bin(_, a, b) => a.uses_vars() || b.uses_vars(),
            Node::Call(_, args) => args.iter().any(Node::uses_vars),
        }
    }
}

/// A compiled expression over a fixed list of variable names.
#[derive(Clone, PartialEq)]
pub struct Expr {
    src: String,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.src)
    }
}

impl Expr {
    /// Compiles `src`; `vars[i]` is bound to the `i`-th evaluation argument.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Self, CliError> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0, vars, src };
        let root = p.sum()?;
        if p.pos != p.tokens.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self { src: src.to_string(), root })
    }

    #[inline]
    pub fn eval(&self, vars: &[f64]) -> f64 {
        self.root.eval(vars)
    }

    /// The value when the expression does not depend on its variables.
    pub fn constant(&self) -> Option<f64> {
        (!self.root.uses_vars()).then(|| self.root.eval(&[]))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>, CliError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, e.g. 1e-3
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse().map_err(|_| CliError::Config(format!("bad number {text:?} in {src:?}")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(CliError::Config(format!("unexpected character {c:?} in {src:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    vars: &'a [&'a str],
    src: &'a str,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> CliError {
        CliError::Config(format!("{what} at token {} of {:?}", self.pos + 1, self.src))
    }

    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<(), CliError> {
        if self.peek_op() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn sum(&mut self) -> Result<Node, CliError> {
        let mut lhs = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.product()?));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Node, CliError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, CliError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, CliError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            // right associative, and -x^2 = -(x^2) via unary()
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, CliError> {
        let tok = self.tokens.get(self.pos).cloned().ok_or_else(|| self.error("unexpected end of expression"))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('(') => {
                let inner = self.sum()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(i));
                }
                match name.as_str() {
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "e" => return Ok(Node::Num(std::f64::consts::E)),
                    _ => {}
                }
                let (f, arity) = Func::lookup(&name).ok_or_else(|| {
                    CliError::Config(format!("unknown name {name:?} in {:?} (variables: {:?})", self.src, self.vars))
                })?;
                self.expect('(')?;
                let mut args = vec![self.sum()?];
                while self.peek_op() == Some(',') {
                    self.pos += 1;
                    args.push(self.sum()?);
                }
                self.expect(')')?;
                if args.len() != arity {
                    return Err(CliError::Config(format!("{name} takes {arity} argument(s), got {}", args.len())));
                }
                Ok(Node::Call(f, args))
            }
            Tok::Op(c) => Err(self.error(&format!("unexpected '{c}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, x: f64) -> f64 {
        Expr::parse(src, &["x"]).unwrap().eval(&[x])
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(eval("2 ^ 3 ^ 2", 0.0), 512.0);
        assert_eq!(eval("-x^2", 3.0), -9.0);
        assert_eq!(eval("(1 - x) / 4", 3.0), -0.5);
        assert_eq!(eval("2^-1", 0.0), 0.5);
        assert_eq!(eval("1e-3 * 2E2", 0.0), 0.2);
    }

    #[test]
    fn functions() {
        assert_eq!(eval("indicator(x, 0, 1)", 0.5), 1.0);
        assert_eq!(eval("indicator(x, 0, 1)", 1.5), 0.0);
        assert_eq!(eval("max(x, 2) + min(x, 2) + abs(-x)", 1.0), 4.0);
        assert_eq!(eval("pow(x, 0.5)", 4.0), 2.0);
        assert!((eval("exp(ln(x)) - x", 1.7)).abs() < 1e-15);
        assert!((eval("cos(pi)", 0.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn constants_are_detected() {
        assert_eq!(Expr::parse("-1", &["x"]).unwrap().constant(), Some(-1.0));
        assert_eq!(Expr::parse("2*x", &["x"]).unwrap().constant(), None);
    }

    #[test]
    fn errors_are_reported() {
        for bad in ["1 +", "foo(1)", "x y", "pow(1)", "(1", "3 $ 4", "z"] {
            assert!(matches!(Expr::parse(bad, &["x"]), Err(CliError::Config(_))), "{bad}");
        }
    }
}
