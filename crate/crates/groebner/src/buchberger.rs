use std::cmp::Ordering;
use std::collections::VecDeque;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::division::normal_form;
use crate::monomial::{Monomial, MonomialOrder};
use crate::poly::Poly;

/// Integer polynomial with terms sorted by decreasing monomial; primitive with positive leading coefficient.
#[derive(Clone, Debug)]
struct IPoly {
    terms: Vec<(Monomial, BigInt)>,
}

impl IPoly {
    fn from_poly(p: &Poly, order: MonomialOrder) -> IPoly {
        let prim = p.primitive();
        let mut terms: Vec<(Monomial, BigInt)> =
            prim.terms().map(|(m, c)| (m.clone(), c.numer().clone())).collect();
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        let mut r = IPoly { terms };
        r.normalize_sign();
        r
    }

    fn to_monic(&self, nvars: usize) -> Poly {
        let lc = BigRational::from_integer(self.terms[0].1.clone());
        Poly::from_terms(nvars, self.terms.iter().map(|(m, c)| (m.clone(), BigRational::from_integer(c.clone()) / &lc)))
    }

    fn lm(&self) -> &Monomial {
        &self.terms[0].0
    }

    fn lc(&self) -> &BigInt {
        &self.terms[0].1
    }

    fn is_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one()
    }

    fn normalize_sign(&mut self) {
        if let Some((_, c)) = self.terms.first() {
            if c.is_negative() {
                for t in &mut self.terms {
                    t.1 = -&t.1;
                }
            }
        }
    }
}

fn content<'a>(coeffs: impl Iterator<Item = &'a BigInt>) -> BigInt {
    let mut g = BigInt::zero();
    for c in coeffs {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// `a*p[1..] - b*(q*g)[1..]`, both inputs sorted decreasing; the leading terms are assumed to cancel.
fn combine(
    p: &VecDeque<(Monomial, BigInt)>,
    a: &BigInt,
    g: &IPoly,
    q: &Monomial,
    b: &BigInt,
    order: MonomialOrder,
) -> VecDeque<(Monomial, BigInt)> {
    let mut out = VecDeque::with_capacity(p.len() + g.terms.len());
    let mut i = 1;
    let mut j = 1;
    let a_one = a.is_one();
    while i < p.len() || j < g.terms.len() {
        let gm = if j < g.terms.len() { Some(g.terms[j].0.mul(q)) } else { None };
        let ord = match (i < p.len(), &gm) {
            (true, Some(m)) => order.cmp(&p[i].0, m),
            (true, None) => Ordering::Greater,
            (false, Some(_)) => Ordering::Less,
            (false, None) => unreachable!(),
        };
        match ord {
            Ordering::Greater => {
                let c = if a_one { p[i].1.clone() } else { &p[i].1 * a };
                out.push_back((p[i].0.clone(), c));
                i += 1;
            }
            Ordering::Less => {
                out.push_back((gm.unwrap(), -(&g.terms[j].1 * b)));
                j += 1;
            }
            Ordering::Equal => {
                let c = if a_one { p[i].1.clone() } else { &p[i].1 * a } - &g.terms[j].1 * b;
                if !c.is_zero() {
                    out.push_back((p[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Full fraction-free reduction of `f` by the polynomials of `basis` selected by `use_idx`.
fn reduce(f: Vec<(Monomial, BigInt)>, basis: &[IPoly], use_idx: &[usize], order: MonomialOrder) -> IPoly {
    let mut p: VecDeque<_> = f.into();
    let mut r: Vec<(Monomial, BigInt)> = Vec::new();
    let mut steps = 0usize;
    while let Some((m, c)) = p.front() {
        let reducer = use_idx.iter().map(|&k| &basis[k]).find(|g| g.lm().divides(m));
        match reducer {
            Some(g) => {
                let q = g.lm().quotient_of(m);
                let d = c.gcd(g.lc());
                let a = g.lc() / &d;
                let b = c / &d;
                p = combine(&p, &a, g, &q, &b, order);
                if !a.is_one() {
                    for t in &mut r {
                        t.1 *= &a;
                    }
                }
                steps += 1;
                if steps % 8 == 0 {
                    let g = content(p.iter().map(|t| &t.1).chain(r.iter().map(|t| &t.1)));
                    if !g.is_zero() && !g.is_one() {
                        for t in p.iter_mut().chain(r.iter_mut()) {
                            t.1 /= &g;
                        }
                    }
                }
            }
            None => {
                r.push(p.pop_front().unwrap());
            }
        }
    }
    let g = content(r.iter().map(|t| &t.1));
    if !g.is_zero() && !g.is_one() {
        for t in &mut r {
            t.1 /= &g;
        }
    }
    let mut out = IPoly { terms: r };
    out.normalize_sign();
    out
}

fn s_poly(f: &IPoly, g: &IPoly, order: MonomialOrder) -> Vec<(Monomial, BigInt)> {
    let l = f.lm().lcm(g.lm());
    let qf = f.lm().quotient_of(&l);
    let qg = g.lm().quotient_of(&l);
    let d = f.lc().gcd(g.lc());
    let a = g.lc() / &d;
    let b = f.lc() / &d;
    let shifted = IPoly { terms: f.terms.iter().map(|(m, c)| (m.mul(&qf), c.clone())).collect() };
    let p: VecDeque<_> = shifted.terms.into();
    combine(&p, &a, g, &qg, &b, order).into()
}

#[derive(Clone, Debug)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

/// Limits for a Buchberger run.
#[derive(Clone, Debug, Default)]
pub struct GbConfig {
    pub order: MonomialOrder,
    pub max_pairs: Option<usize>,
    pub timeout: Option<Duration>,
}

impl GbConfig {
    pub fn new(order: MonomialOrder) -> Self {
        GbConfig { order, ..Default::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GbStats {
    pub pairs_processed: usize,
    pub pairs_pruned: usize,
    pub zero_reductions: usize,
    pub max_basis_len: usize,
}

/// Reduced, monic Gröbner basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis {
    pub nvars: usize,
    pub order: MonomialOrder,
    pub polys: Vec<Poly>,
}

impl GroebnerBasis {
    pub fn is_trivial(&self) -> bool {
        self.polys.len() == 1 && self.polys[0].is_unit()
    }

    pub fn reduce(&self, p: &Poly) -> Poly {
        normal_form(p, &self.polys, self.order)
    }

    pub fn contains(&self, p: &Poly) -> bool {
        self.reduce(p).is_zero()
    }
}

/// True iff `gb` is the unit ideal basis.
pub fn is_trivial(gb: &GroebnerBasis) -> bool {
    gb.is_trivial()
}

#[derive(Debug, thiserror::Error)]
pub enum GbError {
    #[error("budget exceeded after {} pairs (partial basis of {} polynomials)", stats.pairs_processed, partial.polys.len())]
    BudgetExceeded { partial: GroebnerBasis, stats: GbStats },
}

struct State {
    order: MonomialOrder,
    basis: Vec<IPoly>,
    active: Vec<bool>,
    pairs: Vec<Pair>,
    stats: GbStats,
}

impl State {
    fn active_idx(&self) -> Vec<usize> {
        (0..self.basis.len()).filter(|&k| self.active[k]).collect()
    }

    /// Gebauer–Möller installation of a new basis element.
    fn update(&mut self, h: usize) {
        let lm_h = self.basis[h].lm().clone();
        let mut cands: Vec<(usize, Monomial)> = (0..h)
            .filter(|&g| self.active[g])
            .map(|g| (g, lm_h.lcm(self.basis[g].lm())))
            .collect();
        let mut kept: Vec<(usize, Monomial)> = Vec::new();
        while let Some((g1, l1)) = cands.pop() {
            let coprime = lm_h.coprime(self.basis[g1].lm());
            let dominated = cands.iter().any(|(_, l2)| l2.divides(&l1)) || kept.iter().any(|(_, l2)| l2.divides(&l1));
            if coprime || !dominated {
                kept.push((g1, l1));
            } else {
                self.stats.pairs_pruned += 1;
            }
        }
        let before = kept.len();
        kept.retain(|(g, _)| !lm_h.coprime(self.basis[*g].lm()));
        self.stats.pairs_pruned += before - kept.len();

        let basis = &self.basis;
        let old = self.pairs.len();
        self.pairs.retain(|p| {
            if !lm_h.divides(&p.lcm) {
                return true;
            }
            let li = lm_h.lcm(basis[p.i].lm());
            let lj = lm_h.lcm(basis[p.j].lm());
            li == p.lcm || lj == p.lcm
        });
        self.stats.pairs_pruned += old - self.pairs.len();
        for (g, l) in kept {
            self.pairs.push(Pair { i: g, j: h, lcm: l });
        }
        for g in 0..h {
            if self.active[g] && lm_h.divides(self.basis[g].lm()) {
                self.active[g] = false;
            }
        }
        self.active[h] = true;
    }

    fn pop_pair(&mut self) -> Option<Pair> {
        if self.pairs.is_empty() {
            return None;
        }
        let order = self.order;
        let mut best = 0;
        for k in 1..self.pairs.len() {
            let (a, b) = (&self.pairs[k], &self.pairs[best]);
            let c = order.cmp(&a.lcm, &b.lcm).then((a.j, a.i).cmp(&(b.j, b.i)));
            if c == Ordering::Less {
                best = k;
            }
        }
        Some(self.pairs.swap_remove(best))
    }

    fn insert(&mut self, p: IPoly) -> usize {
        self.basis.push(p);
        self.active.push(false);
        let h = self.basis.len() - 1;
        self.update(h);
        self.stats.max_basis_len = self.stats.max_basis_len.max(self.active.iter().filter(|a| **a).count());
        h
    }

    fn finish(&self, nvars: usize) -> GroebnerBasis {
        let idx = self.active_idx();
        let mut polys: Vec<IPoly> = idx.iter().map(|&k| self.basis[k].clone()).collect();
        polys.sort_by(|a, b| self.order.cmp(a.lm(), b.lm()));
        // minimal basis: drop elements whose leading monomial is divisible by another's
        let mut minimal: Vec<IPoly> = Vec::new();
        for p in polys {
            if !minimal.iter().any(|q| q.lm().divides(p.lm())) {
                minimal.push(p);
            }
        }
        let n = minimal.len();
        for k in 0..n {
            let others: Vec<usize> = (0..n).filter(|&j| j != k).collect();
            let r = reduce(minimal[k].terms.clone(), &minimal, &others, self.order);
            minimal[k] = r;
        }
        GroebnerBasis { nvars, order: self.order, polys: minimal.iter().map(|p| p.to_monic(nvars)).collect() }
    }
}

/// Reduced Gröbner basis of the ideal generated by `gens`.
pub fn groebner_basis(gens: &[Poly], nvars: usize, cfg: &GbConfig) -> Result<(GroebnerBasis, GbStats), GbError> {
    let order = cfg.order;
    let start = Instant::now();
    let mut st = State { order, basis: Vec::new(), active: Vec::new(), pairs: Vec::new(), stats: GbStats::default() };
    let unit = |stats: GbStats| (GroebnerBasis { nvars, order, polys: vec![Poly::one(nvars)] }, stats);

    let mut input: Vec<IPoly> = gens.iter().filter(|p| !p.is_zero()).map(|p| IPoly::from_poly(p, order)).collect();
    input.sort_by(|a, b| order.cmp(a.lm(), b.lm()));
    for f in input {
        let idx = st.active_idx();
        let r = reduce(f.terms, &st.basis, &idx, order);
        if r.terms.is_empty() {
            continue;
        }
        if r.is_constant() {
            return Ok(unit(st.stats));
        }
        st.insert(r);
    }

    while let Some(pair) = st.pop_pair() {
        st.stats.pairs_processed += 1;
        let over_pairs = cfg.max_pairs.is_some_and(|m| st.stats.pairs_processed > m);
        let over_time = cfg.timeout.is_some_and(|t| start.elapsed() > t);
        if over_pairs || over_time {
            st.pairs.push(pair);
            return Err(GbError::BudgetExceeded { partial: st.finish(nvars), stats: st.stats });
        }
        let s = s_poly(&st.basis[pair.i], &st.basis[pair.j], order);
        let idx = st.active_idx();
        let r = reduce(s, &st.basis, &idx, order);
        if r.terms.is_empty() {
            st.stats.zero_reductions += 1;
            continue;
        }
        if r.is_constant() {
            return Ok(unit(st.stats));
        }
        st.insert(r);
    }
    Ok((st.finish(nvars), st.stats))
}

/// Post-hoc check that every S-polynomial of `polys` reduces to zero.
pub fn s_pairs_reduce_to_zero(polys: &[Poly], order: MonomialOrder) -> bool {
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            let (Some((mi, ci)), Some((mj, cj))) = (polys[i].leading_term(order), polys[j].leading_term(order)) else {
                continue;
            };
            let l = mi.lcm(&mj);
            let a = polys[i].mul_term(&mi.quotient_of(&l), &(BigRational::one() / ci));
            let b = polys[j].mul_term(&mj.quotient_of(&l), &(BigRational::one() / cj));
            if !normal_form(&(&a - &b), polys, order).is_zero() {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn gb(src: &[&str], v: &[String], order: MonomialOrder) -> GroebnerBasis {
        let gens: Vec<Poly> = src.iter().map(|s| parse_poly(s, v).unwrap()).collect();
        groebner_basis(&gens, v.len(), &GbConfig::new(order)).unwrap().0
    }

    #[test]
    fn x2_minus_1_and_x_minus_1() {
        let v = vars(&["x"]);
        let g = gb(&["x^2 - 1", "x - 1"], &v, MonomialOrder::Lex);
        assert_eq!(g.polys, vec![parse_poly("x - 1", &v).unwrap()]);
        assert!(!g.is_trivial());
    }

    #[test]
    fn inconsistent_system_is_unit() {
        let v = vars(&["x", "y"]);
        let g = gb(&["x*y - 1", "x"], &v, MonomialOrder::Degrevlex);
        assert!(g.is_trivial());
    }

    #[test]
    fn cyclic3_lex() {
        let v = vars(&["x", "y", "z"]);
        let g = gb(&["x + y + z", "x*y + y*z + z*x", "x*y*z - 1"], &v, MonomialOrder::Lex);
        let expect = ["x + y + z", "y^2 + y*z + z^2", "z^3 - 1"];
        let e: Vec<Poly> = expect.iter().map(|s| parse_poly(s, &v).unwrap()).collect();
        assert_eq!(g.polys.len(), 3);
        for p in &e {
            assert!(g.polys.contains(p), "missing {}", p.to_string_with(&v, MonomialOrder::Lex));
        }
        assert!(s_pairs_reduce_to_zero(&g.polys, MonomialOrder::Lex));
    }

    #[test]
    fn budget_is_reported() {
        let v = vars(&["x", "y", "z"]);
        let gens: Vec<Poly> = ["x^2 + y*z - 1", "y^2 + x*z - 1", "z^2 + x*y - 1"]
            .iter()
            .map(|s| parse_poly(s, &v).unwrap())
            .collect();
        let cfg = GbConfig { order: MonomialOrder::Degrevlex, max_pairs: Some(1), timeout: None };
        match groebner_basis(&gens, 3, &cfg) {
            Err(GbError::BudgetExceeded { stats, .. }) => assert_eq!(stats.pairs_processed, 2),
            Ok(_) => panic!("expected budget error"),
        }
    }
}
