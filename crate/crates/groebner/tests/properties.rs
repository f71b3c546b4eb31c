use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use pfk_groebner::{
    divide, groebner_basis, normal_form, parse_poly, s_pairs_reduce_to_zero, GbConfig, Monomial, MonomialOrder,
    Poly,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORDERS: [MonomialOrder; 3] = [MonomialOrder::Lex, MonomialOrder::Deglex, MonomialOrder::Degrevlex];

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn monomials_of_degree(nvars: usize, d: u16) -> Vec<Monomial> {
    fn rec(nvars: usize, left: u16, cur: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        if cur.len() + 1 == nvars {
            cur.push(left);
            out.push(Monomial::from_exps(cur.clone()));
            cur.pop();
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(nvars, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(nvars, d, &mut Vec::new(), &mut out);
    out
}

fn random_poly(rng: &mut ChaCha8Rng, nvars: usize, max_deg: u16, nterms: usize) -> Poly {
    let mut p = Poly::zero(nvars);
    for _ in 0..nterms {
        let exps: Vec<u16> = (0..nvars).map(|_| rng.gen_range(0..=max_deg)).collect();
        if exps.iter().sum::<u16>() > max_deg {
            continue;
        }
        p.add_term(Monomial::from_exps(exps), q(rng.gen_range(-3..=3)));
    }
    p
}

fn random_homogeneous(rng: &mut ChaCha8Rng, nvars: usize, d: u16, nterms: usize) -> Poly {
    let mons = monomials_of_degree(nvars, d);
    let mut p = Poly::zero(nvars);
    for _ in 0..nterms {
        let m = mons[rng.gen_range(0..mons.len())].clone();
        p.add_term(m, q(rng.gen_range(-3..=3)));
    }
    p
}

/// Rank of a rational matrix by Gaussian elimination.
fn rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &pivot;
                for k in c..ncols {
                    let v = &rows[r][k] * &f;
                    rows[i][k] -= v;
                }
            }
        }
        r += 1;
    }
    r
}

/// Membership of a homogeneous `p` in a homogeneous ideal, decided by the degree-d Macaulay matrix.
fn macaulay_member(p: &Poly, gens: &[Poly], nvars: usize) -> bool {
    let d = p.degree() as u16;
    let cols = monomials_of_degree(nvars, d);
    let row_of = |f: &Poly| -> Vec<BigRational> { cols.iter().map(|m| f.coefficient(m)).collect() };
    let mut rows = Vec::new();
    for g in gens {
        let dg = g.degree() as u16;
        if dg > d {
            continue;
        }
        for m in monomials_of_degree(nvars, d - dg) {
            rows.push(row_of(&g.mul_term(&m, &BigRational::one())));
        }
    }
    let r0 = rank(rows.clone());
    rows.push(row_of(p));
    rank(rows) == r0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basis_is_closed_and_contains_generators(seed in any::<u64>(), oi in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nvars = 3;
        let order = ORDERS[oi];
        let gens: Vec<Poly> = (0..3).map(|_| random_poly(&mut rng, nvars, 2, 4)).collect();
        let (gb, _) = groebner_basis(&gens, nvars, &GbConfig::new(order)).unwrap();
        for g in &gens {
            prop_assert!(normal_form(g, &gb.polys, order).is_zero());
        }
        prop_assert!(s_pairs_reduce_to_zero(&gb.polys, order));
        let lms: Vec<Monomial> = gb.polys.iter().map(|p| p.leading_term(order).unwrap().0).collect();
        for (i, a) in lms.iter().enumerate() {
            prop_assert!(gb.polys[i].leading_term(order).unwrap().1.is_one());
            for (j, b) in lms.iter().enumerate() {
                prop_assert!(i == j || !a.divides(b));
            }
        }
    }

    #[test]
    fn deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens: Vec<Poly> = (0..3).map(|_| random_poly(&mut rng, 3, 2, 4)).collect();
        let cfg = GbConfig::new(MonomialOrder::Degrevlex);
        let a = groebner_basis(&gens, 3, &cfg).unwrap();
        let b = groebner_basis(&gens, 3, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn division_quotients_reconstruct(seed in any::<u64>(), oi in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = ORDERS[oi];
        let basis: Vec<Poly> = (0..2).map(|_| random_poly(&mut rng, 3, 2, 3)).filter(|p| !p.is_zero()).collect();
        let p = random_poly(&mut rng, 3, 4, 8);
        let (qs, r) = divide(&p, &basis, order);
        let mut back = r.clone();
        for (qi, bi) in qs.iter().zip(&basis) {
            back = &back + &(qi * bi);
        }
        prop_assert_eq!(back, p);
        let lms: Vec<Monomial> = basis.iter().map(|b| b.leading_term(order).unwrap().0).collect();
        for (m, _) in r.terms() {
            prop_assert!(!lms.iter().any(|l| l.divides(m)));
        }
    }

    #[test]
    fn membership_matches_macaulay(seed in any::<u64>(), oi in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = ORDERS[oi];
        let nvars = 3;
        let gens: Vec<Poly> = (0..2)
            .map(|_| {
                let d = rng.gen_range(1..=2);
                random_homogeneous(&mut rng, nvars, d, 3)
            })
            .filter(|p| !p.is_zero())
            .collect();
        let (gb, _) = groebner_basis(&gens, nvars, &GbConfig::new(order)).unwrap();
        for d in 1..=4u16 {
            let mut p = random_homogeneous(&mut rng, nvars, d, 3);
            if rng.gen_bool(0.5) {
                for g in &gens {
                    let dg = g.degree() as u16;
                    if dg <= d {
                        p = &p + &(&random_homogeneous(&mut rng, nvars, d - dg, 2) * g);
                    }
                }
            }
            if p.is_zero() {
                continue;
            }
            prop_assert_eq!(gb.contains(&p), macaulay_member(&p, &gens, nvars));
        }
    }
}

#[test]
fn cyclic4_degrevlex_closure() {
    let v: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    let gens: Vec<Poly> = ["a*b*c*d - 1", "a*b*c + a*b*d + a*c*d + b*c*d", "a*b + b*c + a*d + c*d", "a + b + c + d"]
        .iter()
        .map(|s| parse_poly(s, &v).unwrap())
        .collect();
    for order in ORDERS {
        let (gb, _) = groebner_basis(&gens, 4, &GbConfig::new(order)).unwrap();
        assert!(!gb.is_trivial());
        assert!(s_pairs_reduce_to_zero(&gb.polys, order));
        for g in &gens {
            assert!(gb.contains(g));
        }
    }
    let (gb, _) = groebner_basis(&gens, 4, &GbConfig::new(MonomialOrder::Degrevlex)).unwrap();
    assert_eq!(gb.polys.len(), 7);
}

#[test]
fn input_order_does_not_change_reduced_basis() {
    let v: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
    let mut gens: Vec<Poly> =
        ["x^2 + y*z - 2", "y^2 - x*z + 1", "z^2 + x - y"].iter().map(|s| parse_poly(s, &v).unwrap()).collect();
    let cfg = GbConfig::new(MonomialOrder::Degrevlex);
    let a = groebner_basis(&gens, 3, &cfg).unwrap().0;
    gens.reverse();
    let b = groebner_basis(&gens, 3, &cfg).unwrap().0;
    assert_eq!(a, b);
}

#[test]
fn empty_and_unit_inputs() {
    let cfg = GbConfig::new(MonomialOrder::Lex);
    let (gb, _) = groebner_basis(&[], 2, &cfg).unwrap();
    assert!(gb.polys.is_empty());
    let (gb, _) = groebner_basis(&[Poly::constant(2, q(5))], 2, &cfg).unwrap();
    assert!(gb.is_trivial());
}
