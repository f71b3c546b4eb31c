//! Polynomial systems whose solutions are the basis changes making a gate,
//! cogate or linked circuit Pfaffian.
//!
//! Variables: `a{k}_{rc}` entries of basis `k` (gate side), `b{k}_{rc}`
//! entries of its inverse (cogate side), `dA{k}`/`dB{k}` determinants with
//! inverses `dA{k}v`/`dB{k}v`, and `g0`/`g0v` for the empty-set coefficient
//! and its inverse (`g0_t{n}`/`g0v_t{n}` per tensor in circuits).

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use pfk_groebner::{GenTag, Poly, PolySystem, Rational};

use crate::registry::{CNOT1, CNOT2};
use crate::tensor::{full_mask, BasisMatrix, Kind, Mask, Tensor};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolysysError {
    #[error("{0} is not rational")]
    NotRational(String),
    #[error("basis index scheme collision: {0}")]
    SchemeCollision(String),
    #[error("expected {expected} basis indices, found {found}")]
    ArityMismatch { expected: usize, found: usize },
}

/// One basis shared by all wires, or one basis per wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Homogeneous,
    Heterogeneous,
}

/// Fixed rational bases by index, and whether to clear removable `g0v` factors.
#[derive(Clone, Debug, Default)]
pub struct IdealOptions {
    pub fixed: BTreeMap<usize, BasisMatrix>,
    pub reduce_scalars: bool,
}

impl IdealOptions {
    pub fn reduced() -> Self {
        IdealOptions { reduce_scalars: true, ..Default::default() }
    }
}

type Entries = [[Poly; 2]; 2];

/// Variable table built once the unknowns are known.
struct Scheme {
    names: Vec<String>,
}

impl Scheme {
    fn n(&self) -> usize {
        self.names.len()
    }

    fn var(&self, name: &str) -> Poly {
        let i = self.names.iter().position(|v| v == name).unwrap_or_else(|| panic!("variable {name}"));
        Poly::var(self.n(), i)
    }

    fn constant(&self, c: Rational) -> Poly {
        Poly::constant(self.n(), c)
    }

    fn one(&self) -> Poly {
        Poly::one(self.n())
    }

    fn matrix(&self, prefix: &str) -> Entries {
        let v = |r: usize, c: usize| self.var(&format!("{prefix}_{r}{c}"));
        [[v(0, 0), v(0, 1)], [v(1, 0), v(1, 1)]]
    }

    fn fixed(&self, m: &[[Rational; 2]; 2]) -> Entries {
        let c = |r: usize, k: usize| self.constant(m[r][k].clone());
        [[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]]
    }
}

fn rational_matrix(m: &BasisMatrix, what: &str) -> Result<[[Rational; 2]; 2], PolysysError> {
    let e = |r: usize, c: usize| m.get(r, c).as_rational().ok_or_else(|| PolysysError::NotRational(what.into()));
    Ok([[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]])
}

fn rational_coeffs(t: &Tensor, what: &str) -> Result<Vec<(Mask, Rational)>, PolysysError> {
    t.terms()
        .map(|(m, c)| c.as_rational().map(|r| (m, r)).ok_or_else(|| PolysysError::NotRational(what.into())))
        .collect()
}

/// `G'_{I'}` (gates) or `D_{I'} = C'_{I'^c}` (cogates) for every mask.
fn coefficient_table(s: &Scheme, kind: Kind, coeffs: &[(Mask, Rational)], mats: &[&Entries]) -> Vec<Poly> {
    let n = mats.len();
    let full = full_mask(n);
    (0..=full)
        .map(|i| {
            let mut acc = Poly::zero(s.n());
            for (j, c) in coeffs {
                let mut term = s.constant(c.clone());
                for (w, m) in mats.iter().enumerate() {
                    let ib = (i >> w & 1) as usize;
                    let jb = (j >> w & 1) as usize;
                    let e = match kind {
                        Kind::Gate => &m[ib][jb],
                        Kind::Cogate => &m[jb][1 - ib],
                    };
                    term = &term * e;
                }
                acc = &acc + &term;
            }
            acc
        })
        .collect()
}

/// Parity, consistency, empty-set and scale-inversion generators from a coefficient table.
fn pfaffian_conditions(s: &Scheme, coef: &[Poly], n: usize, g0: &Poly, g0v: &Poly, reduce: bool, out: &mut Vec<(GenTag, Poly)>) {
    let full = full_mask(n);
    for i in 0..=full {
        if i.count_ones() % 2 == 1 {
            let p = if reduce { coef[i as usize].clone() } else { g0v * &coef[i as usize] };
            out.push((GenTag::Parity, p));
        }
    }
    for i in 0..=full {
        let k = i.count_ones();
        if k < 4 || k % 2 == 1 {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|b| i >> b & 1 == 1).collect();
        let m = idx[0];
        let mut sum = Poly::zero(s.n());
        for (p, &j) in idx[1..].iter().enumerate() {
            let pair: Mask = 1 << m | 1 << j;
            let term = &coef[pair as usize] * &coef[(i & !pair) as usize];
            sum = if p % 2 == 0 { &sum + &term } else { &sum - &term };
        }
        let p = if reduce {
            &(g0 * &coef[i as usize]) - &sum
        } else {
            &(g0v * &coef[i as usize]) - &(&(g0v * g0v) * &sum)
        };
        out.push((GenTag::Consistency, p));
    }
    out.push((GenTag::Empty, &coef[0] - g0));
    out.push((GenTag::Inversion, &(g0 * g0v) - &s.one()));
}

fn det(m: &Entries) -> Poly {
    &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0])
}

/// Gate/cogate system for one tensor.
pub fn gate_ideal(g: &Tensor, mode: Mode, opts: &IdealOptions) -> Result<PolySystem, PolysysError> {
    tensor_ideal(g, mode, opts)
}

/// Cogate analog over the entries of the inverse bases; fixed bases are inverted first.
pub fn cogate_ideal(c: &Tensor, mode: Mode, opts: &IdealOptions) -> Result<PolySystem, PolysysError> {
    tensor_ideal(c, mode, opts)
}

fn tensor_ideal(t: &Tensor, mode: Mode, opts: &IdealOptions) -> Result<PolySystem, PolysysError> {
    let idx: Vec<usize> = match mode {
        Mode::Homogeneous => vec![1; t.arity()],
        Mode::Heterogeneous => (1..=t.arity()).collect(),
    };
    build(&[(t.clone(), idx)], opts, false)
}

/// Union of per-tensor systems with `A_k·A_k^{-1} = I` linkage for indices shared by both sides.
pub fn circuit_ideal(tensors: &[(Tensor, Vec<usize>)], opts: &IdealOptions) -> Result<PolySystem, PolysysError> {
    build(tensors, opts, true)
}

fn build(tensors: &[(Tensor, Vec<usize>)], opts: &IdealOptions, per_tensor: bool) -> Result<PolySystem, PolysysError> {
    let mut a_ks = BTreeSet::new();
    let mut b_ks = BTreeSet::new();
    for (t, idx) in tensors {
        if idx.len() != t.arity() {
            return Err(PolysysError::ArityMismatch { expected: t.arity(), found: idx.len() });
        }
        if idx.contains(&0) {
            return Err(PolysysError::SchemeCollision("basis index 0 is reserved".into()));
        }
        match t.kind() {
            Kind::Gate => a_ks.extend(idx.iter().copied()),
            Kind::Cogate => b_ks.extend(idx.iter().copied()),
        }
    }
    let mut fixed_a = BTreeMap::new();
    let mut fixed_b = BTreeMap::new();
    for (&k, m) in &opts.fixed {
        fixed_a.insert(k, rational_matrix(m, &format!("fixed basis {k}"))?);
        let inv = m.inverse().ok_or_else(|| PolysysError::SchemeCollision(format!("fixed basis {k} is singular")))?;
        fixed_b.insert(k, rational_matrix(&inv, &format!("fixed basis {k}"))?);
    }
    let free_a: Vec<usize> = a_ks.iter().copied().filter(|k| !fixed_a.contains_key(k)).collect();
    let free_b: Vec<usize> = b_ks.iter().copied().filter(|k| !fixed_b.contains_key(k)).collect();
    let linked: Vec<usize> = free_a.iter().copied().filter(|k| b_ks.contains(k)).collect();
    let det_b: Vec<usize> = free_b.iter().copied().filter(|k| !a_ks.contains(k)).collect();

    let mut names = Vec::new();
    for k in &free_a {
        names.extend(["00", "01", "10", "11"].map(|rc| format!("a{k}_{rc}")));
    }
    for k in &free_b {
        names.extend(["00", "01", "10", "11"].map(|rc| format!("b{k}_{rc}")));
    }
    names.extend(free_a.iter().map(|k| format!("dA{k}")));
    names.extend(det_b.iter().map(|k| format!("dB{k}")));
    names.extend(free_a.iter().map(|k| format!("dA{k}v")));
    names.extend(det_b.iter().map(|k| format!("dB{k}v")));
    let g0_names: Vec<(String, String)> = if per_tensor {
        (1..=tensors.len()).map(|n| (format!("g0_t{n}"), format!("g0v_t{n}"))).collect()
    } else {
        vec![("g0".into(), "g0v".into())]
    };
    for (g, v) in &g0_names {
        names.push(g.clone());
        names.push(v.clone());
    }
    let s = Scheme { names };

    let mut a_mats = BTreeMap::new();
    for &k in &a_ks {
        a_mats.insert(k, fixed_a.get(&k).map_or_else(|| s.matrix(&format!("a{k}")), |m| s.fixed(m)));
    }
    let mut b_mats = BTreeMap::new();
    for &k in &b_ks {
        b_mats.insert(k, fixed_b.get(&k).map_or_else(|| s.matrix(&format!("b{k}")), |m| s.fixed(m)));
    }

    let mut gens = Vec::new();
    for (n, (t, idx)) in tensors.iter().enumerate() {
        let coeffs = rational_coeffs(t, &format!("coefficient of tensor {}", n + 1))?;
        let mats: Vec<&Entries> = idx
            .iter()
            .map(|k| match t.kind() {
                Kind::Gate => &a_mats[k],
                Kind::Cogate => &b_mats[k],
            })
            .collect();
        let table = coefficient_table(&s, t.kind(), &coeffs, &mats);
        let (g, v) = &g0_names[if per_tensor { n } else { 0 }];
        pfaffian_conditions(&s, &table, t.arity(), &s.var(g), &s.var(v), opts.reduce_scalars, &mut gens);
    }
    for k in &free_a {
        gens.push((GenTag::Inversion, &det(&a_mats[k]) - &s.var(&format!("dA{k}"))));
    }
    for k in &det_b {
        gens.push((GenTag::Inversion, &det(&b_mats[k]) - &s.var(&format!("dB{k}"))));
    }
    for k in &free_a {
        gens.push((GenTag::Inversion, &(&s.var(&format!("dA{k}")) * &s.var(&format!("dA{k}v"))) - &s.one()));
    }
    for k in &det_b {
        gens.push((GenTag::Inversion, &(&s.var(&format!("dB{k}")) * &s.var(&format!("dB{k}v"))) - &s.one()));
    }
    for k in &linked {
        let (a, b) = (&a_mats[k], &b_mats[k]);
        for r in 0..2 {
            for c in 0..2 {
                let mut p = &(&a[r][0] * &b[0][c]) + &(&a[r][1] * &b[1][c]);
                if r == c {
                    p = &p - &s.one();
                }
                gens.push((GenTag::Linkage, p));
            }
        }
    }

    let mut sys = PolySystem::new(s.names.clone());
    for (tag, p) in gens {
        sys.push(tag, p);
    }
    Ok(sys)
}

/// Values of every scheme variable for a certified single-tensor system with rational data.
pub fn witness(sys: &PolySystem, t: &Tensor, mode: Mode, bases: &[BasisMatrix], scale: &Rational) -> Option<Vec<Rational>> {
    let mut vals = vec![Rational::zero(); sys.nvars()];
    let mut set = |name: String, v: Rational| {
        if let Some(i) = sys.var_index(&name) {
            vals[i] = v;
        }
    };
    for (w, m) in bases.iter().enumerate() {
        let k = match mode {
            Mode::Homogeneous => 1,
            Mode::Heterogeneous => w + 1,
        };
        let (prefix, dname, m) = match t.kind() {
            Kind::Gate => ("a", "dA", m.clone()),
            Kind::Cogate => ("b", "dB", m.inverse()?),
        };
        let r = rational_matrix(&m, "witness").ok()?;
        for (ri, row) in r.iter().enumerate() {
            for (ci, v) in row.iter().enumerate() {
                set(format!("{prefix}{k}_{ri}{ci}"), v.clone());
            }
        }
        let d = &r[0][0] * &r[1][1] - &r[0][1] * &r[1][0];
        if d.is_zero() {
            return None;
        }
        set(format!("{dname}{k}v"), Rational::one() / &d);
        set(format!("{dname}{k}"), d);
    }
    if scale.is_zero() {
        return None;
    }
    set("g0v".into(), Rational::one() / scale);
    set("g0".into(), scale.clone());
    Some(vals)
}

/// CNOT1 → EQUAL cogates → CNOT2 → EQUAL cogates → CNOT1 with one basis index per edge.
pub fn cnot_chain_ideal(opts: &IdealOptions) -> Result<PolySystem, PolysysError> {
    let eq = Tensor::equal(Kind::Cogate, 2);
    let c1 = Tensor::gate(&CNOT1);
    let c2 = Tensor::gate(&CNOT2);
    let parts = vec![
        (c1.clone(), vec![1, 2, 3, 4]),
        (eq.clone(), vec![3, 5]),
        (eq.clone(), vec![4, 6]),
        (c2, vec![5, 6, 7, 8]),
        (eq.clone(), vec![7, 9]),
        (eq, vec![8, 10]),
        (c1, vec![9, 10, 11, 12]),
    ];
    circuit_ideal(&parts, opts)
}

/// Elimination system for the heterogeneous Boolean tree over `A = a1`, `B = a2`.
///
/// Cogate sides use `det^{-1}·adj`, the three EQUAL tensors have `G'_∅ = 1`
/// and the caps keep a free scale. The first `k` variables (the scales) are
/// meant to be eliminated with `MonomialOrder::Block(k)`.
pub fn boolean_tree_elimination_ideal() -> (PolySystem, usize) {
    let mut names: Vec<String> = (1..=2).flat_map(|t| [format!("g0_t{t}"), format!("g0v_t{t}")]).collect();
    let k = names.len();
    for m in ["a1", "a2"] {
        names.extend(["00", "01", "10", "11"].map(|rc| format!("{m}_{rc}")));
    }
    names.extend(["dA1", "dA1v", "dA2", "dA2v"].map(String::from));
    let s = Scheme { names };
    let a = s.matrix("a1");
    let b = s.matrix("a2");
    let adj_inv = |m: &Entries, dv: &str| -> Entries {
        let d = s.var(dv);
        [[&d * &m[1][1], -&(&d * &m[0][1])], [-&(&d * &m[1][0]), &d * &m[0][0]]]
    };
    let ai = adj_inv(&a, "dA1v");
    let bi = adj_inv(&b, "dA2v");
    let one = s.one();
    let eq = |kind: Kind, n: usize| rational_coeffs(&Tensor::equal(kind, n), "").expect("rational");
    let mut gens = Vec::new();
    let parts: [(Kind, usize, Vec<&Entries>, Option<usize>); 5] = [
        (Kind::Gate, 3, vec![&a, &b, &b], None),
        (Kind::Cogate, 3, vec![&bi, &ai, &ai], None),
        (Kind::Cogate, 2, vec![&ai, &ai], None),
        (Kind::Cogate, 1, vec![&bi], Some(1)),
        (Kind::Gate, 1, vec![&a], Some(2)),
    ];
    for (kind, n, mats, scale) in parts {
        let table = coefficient_table(&s, kind, &eq(kind, n), &mats);
        match scale {
            None => pfaffian_conditions(&s, &table, n, &one, &one, true, &mut gens),
            Some(t) => pfaffian_conditions(&s, &table, n, &s.var(&format!("g0_t{t}")), &s.var(&format!("g0v_t{t}")), true, &mut gens),
        }
    }
    gens.push((GenTag::Inversion, &det(&a) - &s.var("dA1")));
    gens.push((GenTag::Inversion, &det(&b) - &s.var("dA2")));
    gens.push((GenTag::Inversion, &(&s.var("dA1") * &s.var("dA1v")) - &one));
    gens.push((GenTag::Inversion, &(&s.var("dA2") * &s.var("dA2v")) - &one));
    let mut sys = PolySystem::new(s.names.clone());
    for (tag, p) in gens {
        sys.push(tag, p);
    }
    (sys, k)
}
