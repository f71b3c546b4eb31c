use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::buchberger::{groebner_basis, GbConfig, GbError, GbStats, GroebnerBasis};
use crate::monomial::{Monomial, MonomialOrder};
use crate::poly::{monomial_string, Poly};

/// Where a generator came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GenTag {
    Parity,
    Consistency,
    Empty,
    Inversion,
    Linkage,
    Basis,
    Input,
}

impl GenTag {
    pub fn name(self) -> &'static str {
        match self {
            GenTag::Parity => "parity",
            GenTag::Consistency => "consistency",
            GenTag::Empty => "empty",
            GenTag::Inversion => "inversion",
            GenTag::Linkage => "linkage",
            GenTag::Basis => "basis",
            GenTag::Input => "input",
        }
    }
}

impl FromStr for GenTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "parity" => GenTag::Parity,
            "consistency" => GenTag::Consistency,
            "empty" => GenTag::Empty,
            "inversion" => GenTag::Inversion,
            "linkage" => GenTag::Linkage,
            "basis" => GenTag::Basis,
            "input" => GenTag::Input,
            _ => return Err(format!("unknown generator tag `{s}`")),
        })
    }
}

impl fmt::Display for GenTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub tag: GenTag,
    pub poly: Poly,
}

/// Named variables plus tagged generators.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PolySystem {
    pub vars: Vec<String>,
    pub gens: Vec<Generator>,
}

/// Outcome line of a basis computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Trivial,
    Nontrivial,
    Budget,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Trivial => "TRIVIAL",
            Verdict::Nontrivial => "NONTRIVIAL",
            Verdict::Budget => "BUDGET",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

impl PolySystem {
    pub fn new(vars: Vec<String>) -> Self {
        PolySystem { vars, gens: Vec::new() }
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Adds a generator; zero polynomials are dropped.
    pub fn push(&mut self, tag: GenTag, poly: Poly) {
        assert_eq!(poly.nvars(), self.vars.len(), "generator arity mismatch");
        if !poly.is_zero() {
            self.gens.push(Generator { tag, poly });
        }
    }

    pub fn polys(&self) -> Vec<Poly> {
        self.gens.iter().map(|g| g.poly.clone()).collect()
    }

    pub fn count(&self, tag: GenTag) -> usize {
        self.gens.iter().filter(|g| g.tag == tag).count()
    }

    /// Removes variables that occur in no generator.
    pub fn prune_vars(&mut self) {
        let used: Vec<usize> = (0..self.vars.len()).filter(|&i| self.gens.iter().any(|g| g.poly.uses_var(i))).collect();
        if used.len() == self.vars.len() {
            return;
        }
        let mut map = vec![usize::MAX; self.vars.len()];
        for (new, &old) in used.iter().enumerate() {
            map[old] = new;
        }
        let n = used.len();
        for g in &mut self.gens {
            g.poly = g.poly.remap(&map, n);
        }
        self.vars = used.iter().map(|&i| self.vars[i].clone()).collect();
    }

    /// Appends `other`, merging variables by name.
    pub fn extend(&mut self, other: &PolySystem) {
        let mut map = Vec::with_capacity(other.vars.len());
        for v in &other.vars {
            match self.var_index(v) {
                Some(i) => map.push(i),
                None => {
                    self.vars.push(v.clone());
                    map.push(self.vars.len() - 1);
                }
            }
        }
        let n = self.vars.len();
        for g in &mut self.gens {
            g.poly = g.poly.remap(&(0..g.poly.nvars()).collect::<Vec<_>>(), n);
        }
        for g in &other.gens {
            self.gens.push(Generator { tag: g.tag, poly: g.poly.remap(&map, n) });
        }
    }

    pub fn groebner(&self, cfg: &GbConfig) -> Result<(GroebnerBasis, GbStats), GbError> {
        groebner_basis(&self.polys(), self.nvars(), cfg)
    }

    /// Singular input: ring declaration, ideal, `std` call.
    pub fn to_singular(&self) -> String {
        let mut s = String::new();
        if self.vars.is_empty() {
            s.push_str("ring r = 0, (x), dp;\n");
        } else {
            writeln!(s, "ring r = 0, ({}), dp;", self.vars.join(", ")).unwrap();
        }
        if self.gens.is_empty() {
            s.push_str("ideal i = 0;\n");
        } else {
            s.push_str("ideal i =\n");
            for (k, g) in self.gens.iter().enumerate() {
                let sep = if k + 1 == self.gens.len() { ";" } else { "," };
                writeln!(s, "  {}{}", g.poly.to_string_with(&self.vars, MonomialOrder::Degrevlex), sep).unwrap();
            }
        }
        s.push_str("std(i);\n");
        s
    }

    /// Line-oriented neutral format; see the crate docs.
    pub fn to_neutral(&self) -> String {
        let mut s = String::from("pfk-system v1\n");
        write_body(&mut s, &self.vars, self.gens.iter().map(|g| (g.tag, &g.poly)));
        s
    }

    pub fn from_neutral(src: &str) -> Result<PolySystem, FormatError> {
        let parsed = parse_neutral(src)?;
        if parsed.header != "pfk-system" {
            return Err(FormatError { line: 1, msg: format!("expected `pfk-system v1`, found `{}`", parsed.header) });
        }
        Ok(PolySystem { vars: parsed.vars, gens: parsed.gens })
    }
}

fn write_body<'a>(s: &mut String, vars: &[String], gens: impl Iterator<Item = (GenTag, &'a Poly)>) {
    for v in vars {
        writeln!(s, "var {v}").unwrap();
    }
    for (tag, p) in gens {
        writeln!(s, "gen {} {}", tag, p.len()).unwrap();
        for (m, c) in p.sorted_terms(MonomialOrder::Degrevlex) {
            write!(s, "term {c}").unwrap();
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    write!(s, " {i}:{e}").unwrap();
                }
            }
            s.push('\n');
        }
    }
}

/// Neutral rendering of a basis with its verdict line.
pub fn basis_to_neutral(vars: &[String], gb: &GroebnerBasis, verdict: Verdict) -> String {
    let mut s = String::from("pfk-basis v1\n");
    writeln!(s, "order {}", gb.order.name()).unwrap();
    write_body(&mut s, vars, gb.polys.iter().map(|p| (GenTag::Basis, p)));
    writeln!(s, "verdict {verdict}").unwrap();
    s
}

/// Human-readable rendering of a basis, one polynomial per line.
pub fn basis_to_text(vars: &[String], gb: &GroebnerBasis) -> String {
    let mut s = String::new();
    for p in &gb.polys {
        writeln!(s, "{}", p.to_string_with(vars, gb.order)).unwrap();
    }
    s
}

/// Parsed neutral file: either a system or a basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeutralFile {
    pub header: String,
    pub order: Option<MonomialOrder>,
    pub vars: Vec<String>,
    pub gens: Vec<Generator>,
    pub verdict: Option<Verdict>,
}

pub fn parse_neutral(src: &str) -> Result<NeutralFile, FormatError> {
    let err = |line: usize, msg: String| FormatError { line, msg };
    let mut lines = src
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();
    let (hl, header) = lines.next().ok_or_else(|| err(1, "empty input".into()))?;
    let mut hp = header.split_whitespace();
    let kind = hp.next().unwrap_or("");
    if !matches!(kind, "pfk-system" | "pfk-basis") || hp.next() != Some("v1") || hp.next().is_some() {
        return Err(err(hl, format!("bad header `{header}`")));
    }
    let mut out =
        NeutralFile { header: kind.to_string(), order: None, vars: Vec::new(), gens: Vec::new(), verdict: None };
    let mut pending: Vec<(usize, GenTag, usize, Vec<(Monomial, BigRational)>)> = Vec::new();
    for (ln, line) in lines {
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        match key {
            "order" => {
                let o = rest.first().ok_or_else(|| err(ln, "missing order name".into()))?;
                out.order = Some(o.parse().map_err(|e: String| err(ln, e))?);
            }
            "var" => {
                if !pending.is_empty() {
                    return Err(err(ln, "variables must precede generators".into()));
                }
                let [name] = rest[..] else {
                    return Err(err(ln, "expected `var NAME`".into()));
                };
                if out.vars.iter().any(|v| v == name) {
                    return Err(err(ln, format!("duplicate variable `{name}`")));
                }
                out.vars.push(name.to_string());
            }
            "gen" => {
                let [tag, n] = rest[..] else {
                    return Err(err(ln, "expected `gen TAG NTERMS`".into()));
                };
                let tag: GenTag = tag.parse().map_err(|e| err(ln, e))?;
                let n: usize = n.parse().map_err(|_| err(ln, format!("bad term count `{n}`")))?;
                pending.push((ln, tag, n, Vec::new()));
            }
            "term" => {
                let cur = pending.last_mut().ok_or_else(|| err(ln, "term outside generator".into()))?;
                let c = rest.first().ok_or_else(|| err(ln, "missing coefficient".into()))?;
                let c = parse_rational(c).ok_or_else(|| err(ln, format!("bad coefficient `{c}`")))?;
                let mut exps = vec![0u16; out.vars.len()];
                for f in &rest[1..] {
                    let (i, e) = f.split_once(':').ok_or_else(|| err(ln, format!("bad factor `{f}`")))?;
                    let i: usize = i.parse().map_err(|_| err(ln, format!("bad variable index `{i}`")))?;
                    let e: u16 = e.parse().map_err(|_| err(ln, format!("bad exponent `{e}`")))?;
                    if i >= exps.len() {
                        return Err(err(ln, format!("variable index {i} out of range")));
                    }
                    exps[i] += e;
                }
                cur.3.push((Monomial::from_exps(exps), c));
            }
            "verdict" => {
                out.verdict = Some(match rest.first().copied() {
                    Some("TRIVIAL") => Verdict::Trivial,
                    Some("NONTRIVIAL") => Verdict::Nontrivial,
                    Some("BUDGET") => Verdict::Budget,
                    other => return Err(err(ln, format!("bad verdict `{}`", other.unwrap_or("")))),
                });
            }
            _ => return Err(err(ln, format!("unknown record `{key}`"))),
        }
    }
    for (ln, tag, n, terms) in pending {
        if terms.len() != n {
            return Err(err(ln, format!("generator declares {n} terms, found {}", terms.len())));
        }
        let poly = Poly::from_terms(out.vars.len(), terms);
        out.gens.push(Generator { tag, poly });
    }
    Ok(out)
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

impl fmt::Display for PolySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gens {
            writeln!(f, "[{}] {}", g.tag, g.poly.to_string_with(&self.vars, MonomialOrder::Degrevlex))?;
        }
        Ok(())
    }
}

/// Monomial rendered with variable names, `1` for the empty product.
pub fn monomial_name(m: &Monomial, vars: &[String]) -> String {
    let s = monomial_string(m, vars);
    if s.is_empty() {
        BigRational::one().to_string()
    } else {
        s
    }
}
