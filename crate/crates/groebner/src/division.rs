use num_traits::Zero;

use crate::monomial::MonomialOrder;
use crate::poly::Poly;

/// Multivariate division: `p = sum q_i * basis_i + r`, no term of `r` divisible by any leading monomial.
pub fn divide(p: &Poly, basis: &[Poly], order: MonomialOrder) -> (Vec<Poly>, Poly) {
    let n = p.nvars();
    let leads: Vec<_> = basis.iter().map(|b| b.leading_term(order)).collect();
    let mut quotients = vec![Poly::zero(n); basis.len()];
    let mut rem = Poly::zero(n);
    let mut work = p.clone();
    while let Some((m, c)) = work.leading_term(order) {
        let hit = leads.iter().enumerate().find_map(|(i, lt)| match lt {
            Some((lm, lc)) if lm.divides(&m) => Some((i, lm, lc)),
            _ => None,
        });
        match hit {
            Some((i, lm, lc)) => {
                let q = lm.quotient_of(&m);
                let f = &c / lc;
                quotients[i].add_term(q.clone(), f.clone());
                work = &work - &basis[i].mul_term(&q, &f);
            }
            None => {
                rem.add_term(m.clone(), c.clone());
                work.add_term(m, -c);
            }
        }
        debug_assert!(work.terms().all(|(_, c)| !c.is_zero()));
    }
    (quotients, rem)
}

/// Remainder of `p` on division by `basis`.
pub fn normal_form(p: &Poly, basis: &[Poly], order: MonomialOrder) -> Poly {
    divide(p, basis, order).1
}
