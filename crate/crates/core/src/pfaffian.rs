use std::collections::HashMap;
use std::fmt;

use crate::scalar::Scalar;
use crate::tensor::{full_mask, EdgeId, Kind, Mask, Tensor};

/// Default cap on the order of matrices passed to [`sub_pfaffian`].
pub const SUB_PFAFFIAN_CAP: usize = 16;

/// Largest order accepted by [`PfMethod::Enumeration`].
pub const ENUMERATION_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PfError {
    #[error("matrix is not skew-symmetric at ({0}, {1})")]
    NotSkewSymmetric(usize, usize),
    #[error("order {n} exceeds the limit {limit}")]
    SizeLimit { n: usize, limit: usize },
    #[error("label {0} appears in more than one block")]
    LabelCollision(EdgeId),
    #[error("label {0} is missing from the edge order")]
    OrderMismatch(EdgeId),
    #[error("duplicate label {0}")]
    DuplicateLabel(EdgeId),
    #[error("matrix shape does not match its labels")]
    Shape,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PfMethod {
    Enumeration,
    Laplace,
    #[default]
    Elimination,
}

/// Skew-symmetric matrix whose rows and columns are labeled by edges.
#[derive(Clone, Debug)]
pub struct SkewMatrix {
    labels: Vec<EdgeId>,
    m: Vec<Vec<Scalar>>,
}

impl SkewMatrix {
    pub fn new(labels: Vec<EdgeId>, m: Vec<Vec<Scalar>>) -> Result<Self, PfError> {
        let n = labels.len();
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(PfError::Shape);
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(PfError::DuplicateLabel(*a));
            }
        }
        for i in 0..n {
            if !m[i][i].is_zero() {
                return Err(PfError::NotSkewSymmetric(i + 1, i + 1));
            }
            for j in i + 1..n {
                if !m[i][j].approx_eq(&-&m[j][i]) {
                    return Err(PfError::NotSkewSymmetric(i + 1, j + 1));
                }
            }
        }
        Ok(SkewMatrix { labels, m })
    }

    pub fn zero(labels: Vec<EdgeId>) -> Self {
        let n = labels.len();
        SkewMatrix { labels, m: vec![vec![Scalar::zero(); n]; n] }
    }

    /// Builds from upper-triangle entries given by 0-based positions.
    pub fn from_upper(labels: Vec<EdgeId>, entries: &[(usize, usize, Scalar)]) -> Self {
        let mut s = SkewMatrix::zero(labels);
        for (i, j, v) in entries {
            s.set(*i, *j, v.clone());
        }
        s
    }

    /// Builds from the row-major upper triangle `(0,1), (0,2), …, (n−2,n−1)`.
    pub fn from_upper_rows(labels: Vec<EdgeId>, upper: &[Scalar]) -> Self {
        let n = labels.len();
        assert_eq!(upper.len(), n * n.saturating_sub(1) / 2, "upper triangle length");
        let mut s = SkewMatrix::zero(labels);
        let mut it = upper.iter();
        for i in 0..n {
            for j in i + 1..n {
                s.set(i, j, it.next().unwrap().clone());
            }
        }
        s
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[EdgeId] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.m[i][j]
    }

    /// Sets `(i, j)` and `(j, i)` consistently.
    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert_ne!(i, j, "diagonal of a skew matrix is zero");
        self.m[j][i] = -&v;
        self.m[i][j] = v;
    }

    pub fn position(&self, label: EdgeId) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn get_by_label(&self, a: EdgeId, b: EdgeId) -> Option<&Scalar> {
        Some(&self.m[self.position(a)?][self.position(b)?])
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.m
    }

    pub fn is_exact(&self) -> bool {
        self.m.iter().flatten().all(Scalar::is_exact)
    }

    /// Principal submatrix on the positions set in `mask`.
    pub fn restrict(&self, mask: Mask) -> SkewMatrix {
        let idx: Vec<usize> = (0..self.size()).filter(|&k| mask >> k & 1 == 1).collect();
        SkewMatrix {
            labels: idx.iter().map(|&k| self.labels[k]).collect(),
            m: idx.iter().map(|&i| idx.iter().map(|&j| self.m[i][j].clone()).collect()).collect(),
        }
    }

    /// Same matrix with rows/columns listed in `order` (a permutation of the labels).
    pub fn reorder(&self, order: &[EdgeId]) -> Result<SkewMatrix, PfError> {
        if order.len() != self.size() {
            return Err(PfError::Shape);
        }
        let idx: Vec<usize> = order.iter().map(|&l| self.position(l).ok_or(PfError::OrderMismatch(l))).collect::<Result<_, _>>()?;
        Ok(SkewMatrix {
            labels: order.to_vec(),
            m: idx.iter().map(|&i| idx.iter().map(|&j| self.m[i][j].clone()).collect()).collect(),
        })
    }

    pub fn with_labels(&self, labels: Vec<EdgeId>) -> SkewMatrix {
        assert_eq!(labels.len(), self.size());
        SkewMatrix { labels, m: self.m.clone() }
    }

    pub fn scale(&self, s: &Scalar) -> SkewMatrix {
        SkewMatrix { labels: self.labels.clone(), m: self.m.iter().map(|r| r.iter().map(|x| x * s).collect()).collect() }
    }

    /// Entry-wise sum; labels must agree.
    pub fn add(&self, o: &SkewMatrix) -> Result<SkewMatrix, PfError> {
        if self.labels != o.labels {
            return Err(PfError::Shape);
        }
        let m = self.m.iter().zip(&o.m).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect();
        Ok(SkewMatrix { labels: self.labels.clone(), m })
    }

    pub fn max_residual(&self, o: &SkewMatrix) -> f64 {
        if self.labels != o.labels {
            return f64::INFINITY;
        }
        self.m.iter().flatten().zip(o.m.iter().flatten()).map(|(a, b)| a.dist(b)).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, o: &SkewMatrix) -> bool {
        self.labels == o.labels && self.m.iter().flatten().zip(o.m.iter().flatten()).all(|(a, b)| a.approx_eq(b))
    }
}

impl PartialEq for SkewMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}

impl fmt::Display for SkewMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = self.m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
        let w = cells.iter().flatten().map(|s| s.len()).chain(self.labels.iter().map(|l| l.to_string().len())).max().unwrap_or(1);
        write!(f, "{:>w$} ", "")?;
        for l in &self.labels {
            write!(f, " {:>w$}", l)?;
        }
        writeln!(f)?;
        for (l, row) in self.labels.iter().zip(&cells) {
            write!(f, "{:>w$} ", l)?;
            for c in row {
                write!(f, " {:>w$}", c)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Pf(m); 1 for the empty matrix, 0 for odd order.
pub fn pfaffian(m: &SkewMatrix, method: PfMethod) -> Result<Scalar, PfError> {
    let n = m.size();
    if n % 2 == 1 {
        return Ok(Scalar::zero());
    }
    if n == 0 {
        return Ok(Scalar::one());
    }
    match method {
        PfMethod::Enumeration => {
            if n > ENUMERATION_LIMIT {
                return Err(PfError::SizeLimit { n, limit: ENUMERATION_LIMIT });
            }
            Ok(pf_enumerate(m))
        }
        PfMethod::Laplace => {
            if n > 62 {
                return Err(PfError::SizeLimit { n, limit: 62 });
            }
            let mut memo = HashMap::new();
            Ok(pf_laplace(m, full_mask(n), &mut memo))
        }
        PfMethod::Elimination => Ok(pf_eliminate(m)),
    }
}

/// Sum over perfect matchings with the sign of the flattened permutation.
fn pf_enumerate(m: &SkewMatrix) -> Scalar {
    fn rec(m: &SkewMatrix, left: &mut Vec<usize>, perm: &mut Vec<usize>, acc: &mut Scalar) {
        if left.is_empty() {
            let mut inv = 0usize;
            for a in 0..perm.len() {
                for b in a + 1..perm.len() {
                    if perm[a] > perm[b] {
                        inv += 1;
                    }
                }
            }
            let mut term = Scalar::one();
            for pair in perm.chunks(2) {
                term = term * m.get(pair[0], pair[1]);
            }
            *acc = if inv % 2 == 0 { &*acc + &term } else { &*acc - &term };
            return;
        }
        let i = left.remove(0);
        for k in 0..left.len() {
            let j = left.remove(k);
            perm.push(i);
            perm.push(j);
            rec(m, left, perm, acc);
            perm.pop();
            perm.pop();
            left.insert(k, j);
        }
        left.insert(0, i);
    }
    let mut acc = Scalar::zero();
    rec(m, &mut (0..m.size()).collect(), &mut Vec::new(), &mut acc);
    acc
}

/// Expansion along the first remaining row, memoised on the remaining index set.
fn pf_laplace(m: &SkewMatrix, mask: Mask, memo: &mut HashMap<Mask, Scalar>) -> Scalar {
    if mask == 0 {
        return Scalar::one();
    }
    if let Some(v) = memo.get(&mask) {
        return v.clone();
    }
    let i = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << i);
    let mut acc = Scalar::zero();
    let mut k = 0;
    for j in 0..m.size() {
        if rest >> j & 1 == 0 {
            continue;
        }
        let a = m.get(i, j);
        if !a.is_exact_zero() {
            let sub = pf_laplace(m, rest & !(1 << j), memo);
            let t = a * &sub;
            acc = if k % 2 == 0 { acc + t } else { acc - t };
        }
        k += 1;
    }
    memo.insert(mask, acc.clone());
    acc
}

/// Skew Gaussian elimination with pivoting; each pivot swap negates the result.
fn pf_eliminate(m: &SkewMatrix) -> Scalar {
    let n = m.size();
    let mut a: Vec<Vec<Scalar>> = m.rows().to_vec();
    let exact = m.is_exact();
    let mut result = Scalar::one();
    let mut k = 0;
    while k + 1 < n {
        let piv = if exact {
            (k + 1..n).find(|&p| !a[k][p].is_exact_zero())
        } else {
            (k + 1..n).max_by(|&x, &y| a[k][x].abs().total_cmp(&a[k][y].abs())).filter(|&p| a[k][p].abs() > 0.0)
        };
        let Some(p) = piv else { return Scalar::zero() };
        if p != k + 1 {
            a.swap(k + 1, p);
            for row in a.iter_mut() {
                row.swap(k + 1, p);
            }
            result = -result;
        }
        let pv = a[k][k + 1].clone();
        result = &result * &pv;
        let inv = pv.inv().expect("nonzero pivot");
        for i in k + 2..n {
            for j in i + 1..n {
                let upd = &(&(&a[k + 1][i] * &a[k][j]) - &(&a[k][i] * &a[k + 1][j])) * &inv;
                if upd.is_exact_zero() {
                    continue;
                }
                let v = &a[i][j] + &upd;
                a[j][i] = -&v;
                a[i][j] = v;
            }
        }
        k += 2;
    }
    result
}

/// Pfaffians of every principal submatrix, indexed by position mask.
fn all_sub_pfaffians(m: &SkewMatrix) -> Vec<Scalar> {
    let n = m.size();
    let mut pf = vec![Scalar::zero(); 1usize << n];
    pf[0] = Scalar::one();
    let mut masks: Vec<Mask> = (1..1u64 << n).filter(|s| s.count_ones() % 2 == 0).collect();
    masks.sort_by_key(|s| s.count_ones());
    for s in masks {
        let i = s.trailing_zeros() as usize;
        let rest = s & !(1 << i);
        let mut acc = Scalar::zero();
        let mut k = 0;
        for j in i + 1..n {
            if rest >> j & 1 == 0 {
                continue;
            }
            let a = m.get(i, j);
            let sub = &pf[(rest & !(1 << j)) as usize];
            if !a.is_exact_zero() && !sub.is_exact_zero() {
                let t = a * sub;
                acc = if k % 2 == 0 { acc + t } else { acc - t };
            }
            k += 1;
        }
        pf[s as usize] = acc;
    }
    pf
}

pub fn sub_pfaffian(m: &SkewMatrix) -> Result<Tensor, PfError> {
    sub_pfaffian_capped(m, SUB_PFAFFIAN_CAP)
}

/// `sPf(Ξ) = Σ_I Pf(Ξ|_I) |I⟩` on wires = labels.
pub fn sub_pfaffian_capped(m: &SkewMatrix, cap: usize) -> Result<Tensor, PfError> {
    if m.size() > cap {
        return Err(PfError::SizeLimit { n: m.size(), limit: cap });
    }
    let pf = all_sub_pfaffians(m);
    Ok(Tensor::new(Kind::Gate, m.labels().to_vec(), pf.into_iter().enumerate().map(|(s, v)| (s as Mask, v))))
}

/// `sPf*(Ξ) = Σ_J Pf(Ξ|_{J^C}) ⟨J|` on wires = labels.
pub fn sub_pfaffian_dual(m: &SkewMatrix) -> Result<Tensor, PfError> {
    if m.size() > SUB_PFAFFIAN_CAP {
        return Err(PfError::SizeLimit { n: m.size(), limit: SUB_PFAFFIAN_CAP });
    }
    let full = full_mask(m.size());
    let pf = all_sub_pfaffians(m);
    Ok(Tensor::new(Kind::Cogate, m.labels().to_vec(), pf.into_iter().enumerate().map(|(s, v)| (full ^ s as Mask, v))))
}

/// Block-diagonal sum labeled by the union of labels, rows ordered by `sigma`.
pub fn direct_sum_ordered(ms: &[SkewMatrix], sigma: &[EdgeId]) -> Result<SkewMatrix, PfError> {
    let mut owner: HashMap<EdgeId, (usize, usize)> = HashMap::new();
    for (b, m) in ms.iter().enumerate() {
        for (p, &l) in m.labels().iter().enumerate() {
            if owner.insert(l, (b, p)).is_some() {
                return Err(PfError::LabelCollision(l));
            }
        }
    }
    for l in owner.keys() {
        if !sigma.contains(l) {
            return Err(PfError::OrderMismatch(*l));
        }
    }
    let labels: Vec<EdgeId> = sigma.iter().copied().filter(|l| owner.contains_key(l)).collect();
    let n = labels.len();
    let mut out = SkewMatrix::zero(labels.clone());
    for i in 0..n {
        for j in i + 1..n {
            let (bi, pi) = owner[&labels[i]];
            let (bj, pj) = owner[&labels[j]];
            if bi == bj {
                out.set(i, j, ms[bi].get(pi, pj).clone());
            }
        }
    }
    Ok(out)
}

/// Entry at 1-based positions (i, j) multiplied by (−1)^{i+j+1}.
pub fn sign_flip(m: &SkewMatrix) -> SkewMatrix {
    let mut out = m.clone();
    let n = m.size();
    for i in 0..n {
        for j in 0..n {
            if (i + j) % 2 == 0 {
                out.m[i][j] = -&m.m[i][j];
            }
        }
    }
    out
}
