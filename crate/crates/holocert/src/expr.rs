//! Polynomial expressions in chart coordinates, e.g. `0.5*i*z1^2 - (z2 + 1)/3`.
//!
//! Grammar:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('+' | '-') unary | power
//! power := atom ('^' integer)?
//! atom  := number | 'i' | 'z' integer | '(' expr ')'
//! ```
//!
//! Variables are 1-based. Division is only by nonzero constants.

use holocert_core::poly::Polynomial;
use holocert_core::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("at column {column}: {message}")]
pub struct ExprError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

/// Parses `text` as a polynomial in `vars` variables.
pub fn parse_polynomial(text: &str, vars: usize) -> Result<Polynomial, ExprError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0, vars };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error(format!("unexpected `{}`", p.chars[p.pos])));
    }
    Ok(out)
}

/// Parses a constant expression such as `-i/2` or `0.25`.
pub fn parse_constant(text: &str) -> Result<C64, ExprError> {
    let p = parse_polynomial(text, 0)?;
    constant_value(&p).ok_or(ExprError { column: 1, message: "expected a constant".into() })
}

fn constant_value(p: &Polynomial) -> Option<C64> {
    if p.is_zero() {
        return Some(C64::new(0.0, 0.0));
    }
    let mut terms = p.terms();
    let (e, c) = terms.next()?;
    (terms.next().is_none() && e.iter().all(|&k| k == 0)).then_some(*c)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    vars: usize,
}

impl Parser {
    fn error(&self, message: String) -> ExprError {
        ExprError { column: self.pos + 1, message }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat('/') {
                let at = self.pos;
                let d = self.unary()?;
                match constant_value(&d) {
                    Some(c) if c.norm() > 0.0 => acc = acc.scale(c.inv()),
                    Some(_) => return Err(ExprError { column: at + 1, message: "division by zero".into() }),
                    None => {
                        return Err(ExprError { column: at + 1, message: "can only divide by a constant".into() })
                    }
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, ExprError> {
        if self.eat('-') {
            return Ok(-&self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let k = self.integer().ok_or_else(|| self.error("expected an integer exponent".into()))?;
            let k = u32::try_from(k).map_err(|_| self.error("exponent too large".into()))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Option<usize> {
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().ok()
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        let start = self.pos;
        let digit = |c: &char| c.is_ascii_digit() || *c == '.';
        while self.chars.get(self.pos).is_some_and(digit) {
            self.pos += 1;
        }
        if matches!(self.chars.get(self.pos), Some('e' | 'E')) {
            let mut look = self.pos + 1;
            if matches!(self.chars.get(look), Some('+' | '-')) {
                look += 1;
            }
            if self.chars.get(look).is_some_and(|c| c.is_ascii_digit()) {
                self.pos = look;
                while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| ExprError { column: start + 1, message: format!("bad number `{s}`") })
    }

    fn atom(&mut self) -> Result<Polynomial, ExprError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let x = self.number()?;
                Ok(Polynomial::constant(self.vars, C64::new(x, 0.0)))
            }
            Some('i') => {
                self.pos += 1;
                Ok(Polynomial::constant(self.vars, C64::new(0.0, 1.0)))
            }
            Some('z') => {
                self.pos += 1;
                let at = self.pos;
                match self.integer() {
                    Some(k) if k >= 1 && k <= self.vars => Ok(Polynomial::variable(self.vars, k - 1)),
                    Some(k) => Err(ExprError {
                        column: at + 1,
                        message: format!("variable z{k} out of range (z1..z{})", self.vars),
                    }),
                    None => Err(ExprError { column: at + 1, message: "expected a variable index after `z`".into() }),
                }
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`".into()));
                }
                Ok(inner)
            }
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
            None => Err(self.error("unexpected end of expression".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn evaluates_like_the_written_formula() {
        let p = parse_polynomial("0.5*i*z1^2 - (z2 + 1)/4 + 2e-1", 2).unwrap();
        let at = [c(0.3, -0.2), c(1.5, 0.7)];
        let expect = c(0.0, 0.5) * at[0] * at[0] - (at[1] + 1.0) / 4.0 + 0.2;
        assert!((p.eval(&at) - expect).norm() < 1e-15);
    }

    #[test]
    fn constants() {
        assert_eq!(parse_constant("-i/2").unwrap(), c(0.0, -0.5));
        assert_eq!(parse_constant("3*(1 - i)").unwrap(), c(3.0, -3.0));
        assert!(parse_constant("z1").is_err());
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse_polynomial("z1 + z3", 2).unwrap_err();
        assert_eq!(e.column, 7);
        assert!(parse_polynomial("z1 / z2", 2).unwrap_err().message.contains("constant"));
        assert!(parse_polynomial("1/0", 1).unwrap_err().message.contains("zero"));
        assert!(parse_polynomial("(z1", 1).is_err());
        assert!(parse_polynomial("z1 z1", 1).is_err());
        assert!(parse_polynomial("", 1).is_err());
    }
}
