//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' uint)?
//! atom   := number | 'x' uint | 't' | func '(' expr ')' | '(' expr ')'
//! func   := exp | log | sin | cos
//! ```

use super::ast::{Expr, Func};
use crate::error::{Error, Result};

pub fn parse_expr(text: &str, dim: usize) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        dim,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.error("expected unsigned integer exponent"));
            }
            let e: u32 = digits.parse().map_err(|_| Error::Syntax {
                pos: start,
                msg: "exponent out of range".into(),
            })?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits")
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(self.error(format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        self.digits();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            self.digits();
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.digits().is_empty() {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Expr::Num)
            .ok_or(Error::Syntax {
                pos: start,
                msg: format!("malformed number `{text}`"),
            })
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if name == "t" {
            return Ok(Expr::Time);
        }
        if let Some(func) = Func::from_name(name) {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if let Some(rest) = name.strip_prefix('x') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                if let Ok(k) = rest.parse::<usize>() {
                    if k >= 1 && k <= self.dim {
                        return Ok(Expr::Var(k - 1));
                    }
                }
            }
        }
        Err(Error::UnknownIdentifier {
            name: name.to_string(),
            pos: start,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse_expr(s, 3).unwrap()
    }

    #[test]
    fn sum_of_power_and_sine() {
        let e = p("x1^2 + sin(x2)");
        assert_eq!(
            e,
            Expr::Add(
                Box::new(Expr::Pow(Box::new(Expr::Var(0)), 2)),
                Box::new(Expr::Call(Func::Sin, Box::new(Expr::Var(1))))
            )
        );
        assert_eq!(e.to_string(), "x1^2 + sin(x2)");
    }

    #[test]
    fn rational_examples() {
        let e = p("1/(1+4*x1^2)");
        assert!(matches!(e, Expr::Div(..)));
        let e = p("t^2/(t^2+x1^2)");
        assert!(e.depends_on_time());
    }

    #[test]
    fn left_associativity() {
        assert_eq!(p("1 - 2 - 3"), p("(1 - 2) - 3"));
        assert_ne!(p("1 - 2 - 3"), p("1 - (2 - 3)"));
        assert_eq!(p("8/4/2").to_string(), "8/4/2");
        assert_eq!(p("1 - (2 - 3)").to_string(), "1 - (2 - 3)");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_expr("x1 + * 2", 1) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        match parse_expr("x1 + y", 1) {
            Err(Error::UnknownIdentifier { name, pos }) => {
                assert_eq!(name, "y");
                assert_eq!(pos, 5);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("x2", 1), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse_expr("x0", 1), Err(Error::UnknownIdentifier { .. })));
        assert!(parse_expr("-x1", 1).is_err());
        assert!(parse_expr("x1^", 1).is_err());
        assert!(parse_expr("(x1", 1).is_err());
        assert!(parse_expr("x1 x1", 1).is_err());
    }

    #[test]
    fn numbers() {
        assert_eq!(p("2.5e-3"), Expr::Num(2.5e-3));
        assert_eq!(p(".5"), Expr::Num(0.5));
        assert_eq!(p("3E2"), Expr::Num(300.0));
    }
}
