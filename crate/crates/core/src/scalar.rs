use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Default comparison tolerance.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Tolerance used by every approximate comparison; `PFK_EPS` overrides the default.
pub fn eps() -> f64 {
    static EPS: OnceLock<f64> = OnceLock::new();
    *EPS.get_or_init(|| {
        std::env::var("PFK_EPS").ok().and_then(|s| s.trim().parse::<f64>().ok()).filter(|e| *e > 0.0).unwrap_or(DEFAULT_EPS)
    })
}

/// Gaussian rational `re + im·i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussQ {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussQ {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussQ { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussQ { re, im: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    fn add(&self, o: &GaussQ) -> GaussQ {
        GaussQ::new(&self.re + &o.re, &self.im + &o.im)
    }

    fn sub(&self, o: &GaussQ) -> GaussQ {
        GaussQ::new(&self.re - &o.re, &self.im - &o.im)
    }

    fn mul(&self, o: &GaussQ) -> GaussQ {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussQ::real(&self.re * &o.re);
        }
        GaussQ::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }

    fn inv(&self) -> Option<GaussQ> {
        if self.is_zero() {
            return None;
        }
        if self.im.is_zero() {
            return Some(GaussQ::real(self.re.recip()));
        }
        let n = self.norm_sqr();
        Some(GaussQ::new(&self.re / &n, -&self.im / &n))
    }
}

pub(crate) fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Complex coefficient: exact Gaussian rational when possible, floating otherwise.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(GaussQ),
    Float(Complex64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(GaussQ::real(BigRational::zero()))
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn i() -> Self {
        Scalar::Exact(GaussQ::new(BigRational::zero(), BigRational::one()))
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(GaussQ::real(BigRational::from_integer(BigInt::from(n))))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar::Exact(GaussQ::real(BigRational::new(BigInt::from(n), BigInt::from(d))))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar::Exact(GaussQ::real(r))
    }

    pub fn gauss(re: BigRational, im: BigRational) -> Self {
        Scalar::Exact(GaussQ::new(re, im))
    }

    pub fn float(re: f64, im: f64) -> Self {
        Scalar::Float(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Self {
        Scalar::Float(z)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// Exact zero, or a float within ε of zero.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(g) => g.is_zero(),
            Scalar::Float(z) => z.norm() <= eps(),
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, Scalar::Exact(g) if g.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.approx_eq(&Scalar::one())
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact(g) => g.to_complex(),
            Scalar::Float(z) => *z,
        }
    }

    pub fn abs(&self) -> f64 {
        self.to_complex().norm()
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(GaussQ::new(g.re.clone(), -&g.im)),
            Scalar::Float(z) => Scalar::Float(z.conj()),
        }
    }

    /// Rational value if exact and real.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Scalar::Exact(g) if g.im.is_zero() => Some(g.re.clone()),
            _ => None,
        }
    }

    pub fn as_gauss(&self) -> Option<&GaussQ> {
        match self {
            Scalar::Exact(g) => Some(g),
            Scalar::Float(_) => None,
        }
    }

    /// `|a−b| ≤ ε·max(1, |a|, |b|)`.
    pub fn approx_eq(&self, other: &Scalar) -> bool {
        self.approx_eq_eps(other, eps())
    }

    pub fn approx_eq_eps(&self, other: &Scalar, eps: f64) -> bool {
        if let (Scalar::Exact(a), Scalar::Exact(b)) = (self, other) {
            return a == b;
        }
        let (a, b) = (self.to_complex(), other.to_complex());
        (a - b).norm() <= eps * 1f64.max(a.norm()).max(b.norm())
    }

    pub fn dist(&self, other: &Scalar) -> f64 {
        (self.to_complex() - other.to_complex()).norm()
    }

    pub fn inv(&self) -> Option<Scalar> {
        match self {
            Scalar::Exact(g) => g.inv().map(Scalar::Exact),
            Scalar::Float(z) => {
                if z.norm() == 0.0 {
                    None
                } else {
                    Some(Scalar::Float(z.inv()))
                }
            }
        }
    }

    pub fn pow(&self, e: i32) -> Scalar {
        let base = if e < 0 { self.inv().expect("negative power of zero") } else { self.clone() };
        let mut out = Scalar::one();
        for _ in 0..e.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    /// Principal square root; exact for perfect-square rationals.
    pub fn sqrt(&self) -> Scalar {
        if let Some(r) = self.as_rational() {
            if let Some(s) = rational_root(&r.abs(), 2) {
                return if r.is_negative() { Scalar::gauss(BigRational::zero(), s) } else { Scalar::from_rational(s) };
            }
        }
        Scalar::Float(self.to_complex().sqrt())
    }

    /// Principal fourth root; exact for perfect fourth powers of non-negative rationals.
    pub fn root4(&self) -> Scalar {
        if let Some(r) = self.as_rational() {
            if !r.is_negative() {
                if let Some(s) = rational_root(&r, 4) {
                    return Scalar::from_rational(s);
                }
            }
        }
        Scalar::Float(self.to_complex().sqrt().sqrt())
    }

    /// Snap a float to zero if within ε (pruning helper).
    pub fn pruned(self) -> Option<Scalar> {
        if self.is_zero() {
            None
        } else {
            Some(self)
        }
    }
}

fn rational_root(r: &BigRational, k: u32) -> Option<BigRational> {
    let n = r.numer().nth_root(k);
    let d = r.denom().nth_root(k);
    if num_traits::pow(n.clone(), k as usize) == *r.numer() && num_traits::pow(d.clone(), k as usize) == *r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::from_rational(r)
    }
}

impl From<Complex64> for Scalar {
    fn from(z: Complex64) -> Self {
        Scalar::Float(z)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $exact:expr, $float:expr) => {
        impl<'a> $tr<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact($exact(a, b)),
                    _ => Scalar::Float($float(self.to_complex(), rhs.to_complex())),
                }
            }
        }
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
    };
}

binop!(Add, add, |a: &GaussQ, b: &GaussQ| a.add(b), |a: Complex64, b: Complex64| a + b);
binop!(Sub, sub, |a: &GaussQ, b: &GaussQ| a.sub(b), |a: Complex64, b: Complex64| a - b);
binop!(Mul, mul, |a: &GaussQ, b: &GaussQ| a.mul(b), |a: Complex64, b: Complex64| a * b);
binop!(
    Div,
    div,
    |a: &GaussQ, b: &GaussQ| a.mul(&b.inv().expect("exact division by zero")),
    |a: Complex64, b: Complex64| a / b
);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(GaussQ::new(-&g.re, -&g.im)),
            Scalar::Float(z) => Scalar::Float(-z),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for Scalar {
    fn product<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::one(), |a, b| a * b)
    }
}

fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    format!("{x}")
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = match self {
            Scalar::Exact(g) => {
                let re = (!g.re.is_zero()).then(|| g.re.to_string());
                let im = (!g.im.is_zero()).then(|| (g.im.is_negative(), g.im.abs().to_string(), g.im.abs().is_one()));
                (re, im)
            }
            Scalar::Float(z) => {
                let e = eps();
                let re = (z.re.abs() > e).then(|| fmt_f64(z.re));
                let im = (z.im.abs() > e).then(|| (z.im < 0.0, fmt_f64(z.im.abs()), (z.im.abs() - 1.0).abs() <= e));
                (re, im)
            }
        };
        match (re, im) {
            (None, None) => f.write_str("0"),
            (Some(r), None) => f.write_str(&r),
            (None, Some((neg, m, unit))) => {
                let sign = if neg { "-" } else { "" };
                if unit {
                    write!(f, "{sign}i")
                } else {
                    write!(f, "{sign}{m}i")
                }
            }
            (Some(r), Some((neg, m, unit))) => {
                let sign = if neg { "-" } else { "+" };
                if unit {
                    write!(f, "{r}{sign}i")
                } else {
                    write!(f, "{r}{sign}{m}i")
                }
            }
        }
    }
}
