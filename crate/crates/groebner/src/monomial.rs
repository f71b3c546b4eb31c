use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Exponent vector over a fixed number of variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    exps: Box<[u16]>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial { exps: vec![0; nvars].into_boxed_slice() }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial { exps: e.into_boxed_slice() }
    }

    pub fn from_exps(exps: Vec<u16>) -> Self {
        Monomial { exps: exps.into_boxed_slice() }
    }

    pub fn exps(&self) -> &[u16] {
        &self.exps
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let exps = self.exps.iter().zip(other.exps.iter()).map(|(a, b)| a + b).collect();
        Monomial { exps }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(other.exps.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        let exps = other.exps.iter().zip(self.exps.iter()).map(|(a, b)| a - b).collect();
        Monomial { exps }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let exps = self.exps.iter().zip(other.exps.iter()).map(|(a, b)| *a.max(b)).collect();
        Monomial { exps }
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(other.exps.iter()).all(|(a, b)| *a == 0 || *b == 0)
    }

    pub fn with_nvars(&self, nvars: usize) -> Monomial {
        let mut e = self.exps.to_vec();
        e.resize(nvars, 0);
        Monomial::from_exps(e)
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

/// Monomial order. Variable 0 has the highest precedence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MonomialOrder {
    Lex,
    Deglex,
    #[default]
    Degrevlex,
    /// Degrevlex on the first `k` variables, ties broken by degrevlex on the rest.
    /// Eliminates the first block.
    Block(usize),
}

fn degrevlex(a: &[u16], b: &[u16]) -> Ordering {
    let da: u32 = a.iter().map(|&e| e as u32).sum();
    let db: u32 = b.iter().map(|&e| e as u32).sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        o => return o,
    }
    for i in (0..a.len()).rev() {
        if a[i] != b[i] {
            return b[i].cmp(&a[i]);
        }
    }
    Ordering::Equal
}

impl MonomialOrder {
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        let (x, y) = (a.exps(), b.exps());
        match *self {
            MonomialOrder::Lex => x.cmp(y),
            MonomialOrder::Deglex => a.degree().cmp(&b.degree()).then_with(|| x.cmp(y)),
            MonomialOrder::Degrevlex => degrevlex(x, y),
            MonomialOrder::Block(k) => {
                let k = k.min(x.len());
                degrevlex(&x[..k], &y[..k]).then_with(|| degrevlex(&x[k..], &y[k..]))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            MonomialOrder::Lex => "lex".into(),
            MonomialOrder::Deglex => "deglex".into(),
            MonomialOrder::Degrevlex => "degrevlex".into(),
            MonomialOrder::Block(k) => format!("block:{k}"),
        }
    }
}

impl FromStr for MonomialOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lex" => Ok(MonomialOrder::Lex),
            "deglex" | "degderived" => Ok(MonomialOrder::Deglex),
            "degrevlex" | "dp" | "grevlex" => Ok(MonomialOrder::Degrevlex),
            _ => {
                if let Some(k) = s.strip_prefix("block:") {
                    k.parse().map(MonomialOrder::Block).map_err(|_| format!("bad block size in {s:?}"))
                } else {
                    Err(format!("unknown monomial order {s:?}"))
                }
            }
        }
    }
}
