use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::monomial::{Monomial, MonomialOrder};

pub type Rational = BigRational;

/// Sparse polynomial over the rationals in a fixed number of variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(Monomial::var(nvars, i), Rational::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for a nonzero constant.
    pub fn is_unit(&self) -> bool {
        self.terms.len() == 1 && self.terms.keys().next().unwrap().is_one()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Terms sorted by decreasing monomial under `order`.
    pub fn sorted_terms(&self, order: MonomialOrder) -> Vec<(Monomial, Rational)> {
        let mut v: Vec<_> = self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        v.sort_by(|a, b| order.cmp(&b.0, &a.0));
        v
    }

    pub fn leading_term(&self, order: MonomialOrder) -> Option<(Monomial, Rational)> {
        self.terms
            .iter()
            .max_by(|a, b| order.cmp(a.0, b.0))
            .map(|(m, c)| (m.clone(), c.clone()))
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect(),
        }
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self, order: MonomialOrder) -> Poly {
        match self.leading_term(order) {
            Some((_, c)) => self.scale(&(Rational::one() / c)),
            None => self.clone(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut r = Poly::one(self.nvars);
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exps().iter().enumerate() {
                for _ in 0..e {
                    t *= &point[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitute constants for some variables; other variables are kept.
    pub fn substitute(&self, values: &BTreeMap<usize, Rational>) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut exps = m.exps().to_vec();
            for (&i, v) in values {
                for _ in 0..exps[i] {
                    coef *= v;
                }
                exps[i] = 0;
            }
            out.add_term(Monomial::from_exps(exps), coef);
        }
        out
    }

    /// Re-index variables: variable `i` moves to `map[i]` in a ring of `nvars` variables.
    pub fn remap(&self, map: &[usize], nvars: usize) -> Poly {
        let mut out = Poly::zero(nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0u16; nvars];
            for (i, &x) in m.exps().iter().enumerate() {
                if x > 0 {
                    e[map[i]] += x;
                }
            }
            out.add_term(Monomial::from_exps(e), c.clone());
        }
        out
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.exps()[i] > 0)
    }

    /// Clear denominators and common content; sign fixed so the lex-largest coefficient is positive.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut lcm_den = BigInt::one();
        for c in self.terms.values() {
            lcm_den = num_integer::Integer::lcm(&lcm_den, c.denom());
        }
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            let n = c.numer() * (&lcm_den / c.denom());
            g = num_integer::Integer::gcd(&g, &n);
        }
        let mut f = Rational::new(lcm_den, g);
        if self.terms.values().next_back().unwrap().is_negative() {
            f = -f;
        }
        self.scale(&f)
    }

    pub fn to_string_with(&self, vars: &[String], order: MonomialOrder) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (m, c)) in self.sorted_terms(order).iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono = monomial_string(m, vars);
            if mono.is_empty() {
                write!(s, "{}", a).unwrap();
            } else if a.is_one() {
                s.push_str(&mono);
            } else {
                write!(s, "{}*{}", a, mono).unwrap();
            }
        }
        s
    }
}

pub(crate) fn monomial_string(m: &Monomial, vars: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.exps().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(vars[i].clone()),
            _ => parts.push(format!("{}^{}", vars[i], e)),
        }
    }
    parts.join("*")
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("polynomial parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parse a polynomial such as `2*x^2 - 3/4*x*y + 1` over the given variable names.
/// Juxtaposition is not multiplication; use `*`.
pub fn parse_poly(src: &str, vars: &[String]) -> Result<Poly, ParseError> {
    let mut p = PolyParser { s: src.as_bytes(), pos: 0, vars };
    let r = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(r)
}

struct PolyParser<'a> {
    s: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl PolyParser<'_> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError { pos: self.pos, msg: msg.into() }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let n = self.vars.len();
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -&self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        debug_assert_eq!(acc.nvars(), n);
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.power()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.power()?;
                    if !d.is_unit() {
                        return Err(self.err("division by a non-constant"));
                    }
                    let c = d.coefficient(&Monomial::one(self.vars.len()));
                    acc = acc.scale(&(Rational::one() / c));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Poly, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.ws();
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.s[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("expected exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        let n = self.vars.len();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.atom()?)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let v: BigInt = std::str::from_utf8(&self.s[start..self.pos]).unwrap().parse().unwrap();
                Ok(Poly::constant(n, Rational::from_integer(v)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                match self.vars.iter().position(|v| v == name) {
                    Some(i) => Ok(Poly::var(n, i)),
                    None => {
                        self.pos = start;
                        Err(self.err(&format!("unknown variable {name:?}")))
                    }
                }
            }
            _ => Err(self.err("expected a number, variable or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parse_and_print() {
        let v = vars(&["x", "y"]);
        let p = parse_poly("2*x^2 - 3/4*x*y + 1", &v).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.to_string_with(&v, MonomialOrder::Degrevlex), "2*x^2 - 3/4*x*y + 1");
        let q = parse_poly("(x+y)^2 - x^2 - 2*x*y", &v).unwrap();
        assert_eq!(q, parse_poly("y^2", &v).unwrap());
    }

    #[test]
    fn parse_errors() {
        let v = vars(&["x"]);
        assert!(parse_poly("x + z", &v).is_err());
        assert!(parse_poly("x / x", &v).is_err());
        assert!(parse_poly("(x", &v).is_err());
    }

    #[test]
    fn primitive_clears_denominators() {
        let v = vars(&["x", "y"]);
        let p = parse_poly("-1/2*x + 3/4*y", &v).unwrap();
        assert_eq!(p.primitive(), parse_poly("2*x - 3*y", &v).unwrap());
    }

    #[test]
    fn eval_and_substitute() {
        let v = vars(&["x", "y"]);
        let p = parse_poly("x*y - 2", &v).unwrap();
        let r = |a: i64| Rational::from_integer(a.into());
        assert_eq!(p.eval(&[r(2), r(1)]), r(0));
        let mut sub = BTreeMap::new();
        sub.insert(0, r(3));
        assert_eq!(p.substitute(&sub), parse_poly("3*y - 2", &v).unwrap());
    }
}
