//! A small arithmetic-expression interpreter over the variable `u`, used
//! by config files to describe sampled cost functions.

use crate::error::WfError;

#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Expr {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Expr::Num(x) => *x,
            Expr::Var => u,
            Expr::Add(a, b) => a.eval(u) + b.eval(u),
            Expr::Sub(a, b) => a.eval(u) - b.eval(u),
            Expr::Mul(a, b) => a.eval(u) * b.eval(u),
            Expr::Div(a, b) => a.eval(u) / b.eval(u),
            Expr::Pow(a, b) => a.eval(u).powf(b.eval(u)),
            Expr::Neg(a) => -a.eval(u),
            Expr::Call(f, a) => {
                let x = a.eval(u);
                match f {
                    Func::Exp => x.exp(),
                    Func::Ln => x.ln(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sqrt => x.sqrt(),
                    Func::Abs => x.abs(),
                }
            }
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, WfError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(WfError::Domain(format!(
            "unexpected trailing input at byte {} of expression {src:?}",
            p.pos
        )));
    }
    Ok(e)
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

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expr(&mut self) -> Result<Expr, WfError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, WfError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, WfError> {
        // Unary minus binds looser than '^', so -u^2 is -(u^2).
        if self.peek() == Some(b'-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, WfError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.bump();
            let exp = self.factor()?; // right associative, allows 2^-3
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, WfError> {
        match self.peek() {
            Some(b'(') => {
                self.bump();
                let e = self.expr()?;
                if self.bump() != Some(b')') {
                    return Err(WfError::Domain("expected ')' in expression".into()));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            other => Err(WfError::Domain(format!("unexpected token {other:?} in expression"))),
        }
    }

    fn number(&mut self) -> Result<Expr, WfError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit()
                || self.src[self.pos] == b'.'
                || self.src[self.pos] == b'e'
                || self.src[self.pos] == b'E'
                || ((self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
                    && self.pos > start
                    && (self.src[self.pos - 1] == b'e' || self.src[self.pos - 1] == b'E')))
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| WfError::Domain(format!("bad numeric literal {text:?}")))
    }

    fn ident(&mut self) -> Result<Expr, WfError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        match name.as_str() {
            "u" => Ok(Expr::Var),
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            "e" => Ok(Expr::Num(std::f64::consts::E)),
            "exp" | "ln" | "sin" | "cos" | "sqrt" | "abs" => {
                if self.bump() != Some(b'(') {
                    return Err(WfError::Domain(format!("{name} expects '(...)'")));
                }
                let arg = self.expr()?;
                if self.bump() != Some(b')') {
                    return Err(WfError::Domain(format!("unclosed call to {name}")));
                }
                let f = match name.as_str() {
                    "exp" => Func::Exp,
                    "ln" => Func::Ln,
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "sqrt" => Func::Sqrt,
                    _ => Func::Abs,
                };
                Ok(Expr::Call(f, Box::new(arg)))
            }
            other => Err(WfError::Domain(format!("unknown identifier {other:?} in expression"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_functions() {
        let e = parse("u^2/(1+u^2)").unwrap();
        assert!((e.eval(2.0) - 0.8).abs() < 1e-15);
        let e = parse("1 - exp(-0.25*u)").unwrap();
        assert!((e.eval(1.0) - (1.0 - (-0.25f64).exp())).abs() < 1e-15);
        let e = parse("2*sin(pi*u) + 3").unwrap();
        assert!((e.eval(0.5) - 5.0).abs() < 1e-12);
        let e = parse("-u^2").unwrap();
        assert!((e.eval(3.0) + 9.0).abs() < 1e-15);
    }

    #[test]
    fn parse_errors() {
        assert!(parse("u +").is_err());
        assert!(parse("foo(u)").is_err());
        assert!(parse("(u").is_err());
        assert!(parse("1 2").is_err());
    }
}
