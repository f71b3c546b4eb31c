//! Complex scalar expressions: integers, `p/q`, decimals (as floats), `i`, `sqrt(..)`,
//! `root4(..)`, parentheses, `+ - * / ^` and implicit multiplication (`2i`, `3sqrt(5)`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("column {col}: {msg}")]
pub struct ExprError {
    pub col: usize,
    pub msg: String,
}

pub fn parse_scalar(src: &str) -> Result<Scalar, ExprError> {
    let mut p = Parser { s: src.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.pos == p.s.len() {
        return Err(p.err("empty expression"));
    }
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err(&format!("unexpected `{}`", p.s[p.pos] as char)));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ExprError {
        ExprError { col: self.pos + 1, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Scalar, ExprError> {
        let mut v = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            v = if c == b'+' { v + t } else { v - t };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<Scalar, ExprError> {
        let mut v = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    v = v * self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    if d.is_exact_zero() {
                        return Err(ExprError { col: at + 1, msg: "division by zero".into() });
                    }
                    v = v / d;
                }
                Some(c) if c.is_ascii_alphanumeric() || c == b'(' || c == b'.' => {
                    v = v * self.power()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> Result<Scalar, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Scalar, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
            let e: i32 = digits.parse().map_err(|_| ExprError { col: start + 1, msg: "expected integer exponent".into() })?;
            if base.is_exact_zero() && neg {
                return Err(ExprError { col: start + 1, msg: "negative power of zero".into() });
            }
            return Ok(base.pow(if neg { -e } else { e }));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Scalar, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                match name {
                    "i" => Ok(Scalar::i()),
                    "sqrt" | "root4" => {
                        if self.peek() != Some(b'(') {
                            return Err(self.err(&format!("expected `(` after {name}")));
                        }
                        self.pos += 1;
                        let v = self.expr()?;
                        if self.peek() != Some(b')') {
                            return Err(self.err("expected `)`"));
                        }
                        self.pos += 1;
                        Ok(if name == "sqrt" { v.sqrt() } else { v.root4() })
                    }
                    _ => Err(ExprError { col: start + 1, msg: format!("unknown identifier `{name}`") }),
                }
            }
            Some(c) => Err(self.err(&format!("unexpected `{}`", c as char))),
            None => Err(self.err("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<Scalar, ExprError> {
        let start = self.pos;
        let mut int = String::new();
        let mut frac = String::new();
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            int.push(self.s[self.pos] as char);
            self.pos += 1;
        }
        if self.pos < self.s.len() && self.s[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                frac.push(self.s[self.pos] as char);
                self.pos += 1;
            }
        }
        if int.is_empty() && frac.is_empty() {
            return Err(ExprError { col: start + 1, msg: "malformed number".into() });
        }
        let digits: BigInt = format!("{int}{frac}").parse().unwrap_or_else(|_| BigInt::zero());
        let mut value = BigRational::new(digits, num_traits::pow(BigInt::from(10), frac.len()));
        // optional decimal exponent, only when followed by a digit so `2e` stays an error elsewhere
        if self.pos + 1 < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
            let mut k = self.pos + 1;
            let neg = self.s[k] == b'-';
            if self.s[k] == b'-' || self.s[k] == b'+' {
                k += 1;
            }
            if k < self.s.len() && self.s[k].is_ascii_digit() {
                let es = k;
                while k < self.s.len() && self.s[k].is_ascii_digit() {
                    k += 1;
                }
                let e: usize = std::str::from_utf8(&self.s[es..k]).unwrap().parse().unwrap_or(0);
                let scale = BigRational::from_integer(num_traits::pow(BigInt::from(10), e));
                value = if neg { value / scale } else { value * scale };
                self.pos = k;
            }
        }
        if value.is_zero() {
            return Ok(Scalar::zero());
        }
        // a decimal point or exponent marks a measured value, kept as a float
        if self.s[start..self.pos].iter().any(|&c| matches!(c, b'.' | b'e' | b'E')) {
            return Ok(Scalar::float(num_traits::ToPrimitive::to_f64(&value).unwrap_or(f64::NAN), 0.0));
        }
        Ok(Scalar::from_rational(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(s: &str) -> Scalar {
        parse_scalar(s).unwrap()
    }

    #[test]
    fn rationals_are_exact_and_decimals_float() {
        assert_eq!(ok("3/4").as_rational().unwrap(), BigRational::new(3.into(), 4.into()));
        assert!(!ok("0.25").is_exact());
        assert!(ok("0.25").approx_eq(&Scalar::ratio(1, 4)));
        assert!(ok("-1.5e2").approx_eq(&Scalar::from_int(-150)));
    }

    #[test]
    fn complex_and_implicit() {
        assert!(ok("-2+3i").approx_eq(&(Scalar::from_int(-2) + Scalar::from_int(3) * Scalar::i())));
        assert!(ok("i/2").approx_eq(&(Scalar::i() * Scalar::ratio(1, 2))));
        assert!(ok("2(1+i)").approx_eq(&(Scalar::from_int(2) + Scalar::from_int(2) * Scalar::i())));
        assert!(ok("sqrt(5)/2 - 1/2").approx_eq(&Scalar::float((5f64.sqrt() - 1.0) / 2.0, 0.0)));
        assert!(ok("root4(5)^3").approx_eq(&Scalar::float(5f64.powf(0.75), 0.0)));
        assert!(ok("5^-1").approx_eq(&Scalar::ratio(1, 5)));
        assert!(ok("i^2").approx_eq(&Scalar::from_int(-1)));
    }

    #[test]
    fn errors_report_columns() {
        assert_eq!(parse_scalar("1 + foo").unwrap_err().col, 5);
        assert_eq!(parse_scalar("(1+2").unwrap_err().col, 5);
        assert_eq!(parse_scalar("1/0").unwrap_err().col, 3);
        assert!(parse_scalar("").is_err());
    }
}
