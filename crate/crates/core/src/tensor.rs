use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::expr::{parse_scalar, ExprError};
use crate::scalar::Scalar;

/// Edge label; unique within a network.
pub type EdgeId = u32;

/// Subset of wire positions: bit `pos − 1` is set when position `pos` carries a 1.
pub type Mask = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Gate,
    Cogate,
}

impl Kind {
    pub fn opposite(self) -> Kind {
        match self {
            Kind::Gate => Kind::Cogate,
            Kind::Cogate => Kind::Gate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("position {pos} is outside 1..={arity}")]
    InvalidSubset { pos: usize, arity: usize },
    #[error("expected {expected} entries, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("basis matrix for wire {wire} is singular")]
    SingularBasis { wire: usize },
    #[error("contraction leaves surviving wires of both kinds")]
    UnsupportedMixedResult,
    #[error("expected a {expected:?}, found a {found:?}")]
    KindMismatch { expected: Kind, found: Kind },
    #[error("shared wire {0} has the same kind on both sides")]
    SameKindWire(EdgeId),
    #[error("duplicate wire {0}")]
    DuplicateWire(EdgeId),
    #[error("arity {0} exceeds the supported maximum of 63")]
    TooManyWires(usize),
    #[error("column {col}: {msg}")]
    Parse { col: usize, msg: String },
}

impl From<ExprError> for TensorError {
    fn from(e: ExprError) -> Self {
        TensorError::Parse { col: e.col, msg: e.msg }
    }
}

pub fn mask_from_bits(bits: &str) -> Option<Mask> {
    let mut m = 0;
    for (k, c) in bits.chars().enumerate() {
        match c {
            '0' => {}
            '1' => m |= 1 << k,
            _ => return None,
        }
    }
    Some(m)
}

pub fn mask_to_bits(m: Mask, n: usize) -> String {
    (0..n).map(|k| if m >> k & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn full_mask(n: usize) -> Mask {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// 2×2 change-of-basis matrix, rows and columns indexed from zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisMatrix {
    pub a: [[Scalar; 2]; 2],
}

impl BasisMatrix {
    pub fn new(a00: Scalar, a01: Scalar, a10: Scalar, a11: Scalar) -> Self {
        BasisMatrix { a: [[a00, a01], [a10, a11]] }
    }

    pub fn from_ints(m: [[i64; 2]; 2]) -> Self {
        BasisMatrix::new(m[0][0].into(), m[0][1].into(), m[1][0].into(), m[1][1].into())
    }

    pub fn identity() -> Self {
        BasisMatrix::from_ints([[1, 0], [0, 1]])
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.a[r][c]
    }

    pub fn det(&self) -> Scalar {
        &self.a[0][0] * &self.a[1][1] - &self.a[0][1] * &self.a[1][0]
    }

    /// Adjugate over determinant; `None` when the determinant is within ε of zero.
    pub fn inverse(&self) -> Option<BasisMatrix> {
        let d = self.det();
        if d.is_zero() {
            return None;
        }
        let di = d.inv()?;
        Some(BasisMatrix::new(
            &self.a[1][1] * &di,
            -(&self.a[0][1] * &di),
            -(&self.a[1][0] * &di),
            &self.a[0][0] * &di,
        ))
    }

    pub fn mul(&self, o: &BasisMatrix) -> BasisMatrix {
        let e = |r: usize, c: usize| &self.a[r][0] * &o.a[0][c] + &self.a[r][1] * &o.a[1][c];
        BasisMatrix::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn transpose(&self) -> BasisMatrix {
        BasisMatrix::new(self.a[0][0].clone(), self.a[1][0].clone(), self.a[0][1].clone(), self.a[1][1].clone())
    }

    pub fn is_exact(&self) -> bool {
        self.a.iter().flatten().all(Scalar::is_exact)
    }

    pub fn approx_eq(&self, o: &BasisMatrix) -> bool {
        self.a.iter().flatten().zip(o.a.iter().flatten()).all(|(x, y)| x.approx_eq(y))
    }

    /// Parses `[[a00, a01], [a10, a11]]`.
    pub fn parse(src: &str) -> Result<BasisMatrix, TensorError> {
        let mut entries = Vec::new();
        let mut start = 0;
        let mut depth = 0i32;
        let bytes = src.as_bytes();
        let mut cur = String::new();
        for (k, &b) in bytes.iter().enumerate() {
            match b {
                b'[' => {
                    depth += 1;
                    start = k + 1;
                }
                b']' | b',' => {
                    if b == b']' {
                        depth -= 1;
                    }
                    if !cur.trim().is_empty() {
                        let v = parse_scalar(&cur).map_err(|e| TensorError::Parse { col: start + e.col, msg: e.msg })?;
                        entries.push(v);
                    }
                    cur.clear();
                    start = k + 1;
                }
                _ => cur.push(b as char),
            }
        }
        if depth != 0 || !cur.trim().is_empty() {
            return Err(TensorError::Parse { col: src.len().max(1), msg: "unbalanced matrix brackets".into() });
        }
        if entries.len() != 4 {
            return Err(TensorError::ArityMismatch { expected: 4, found: entries.len() });
        }
        let mut it = entries.into_iter();
        Ok(BasisMatrix::new(it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap()))
    }
}

impl fmt::Display for BasisMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a[0][0], self.a[0][1], self.a[1][0], self.a[1][1])
    }
}

fn add_into(map: &mut BTreeMap<Mask, Scalar>, m: Mask, c: Scalar) {
    match map.get_mut(&m) {
        Some(v) => *v = &*v + &c,
        None => {
            map.insert(m, c);
        }
    }
}

fn prune(map: BTreeMap<Mask, Scalar>) -> BTreeMap<Mask, Scalar> {
    map.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// Applies `m[r][c]` (or its transpose) to one wire of a sparse table.
fn apply_wire(map: &BTreeMap<Mask, Scalar>, bit: usize, m: &BasisMatrix, transpose: bool) -> BTreeMap<Mask, Scalar> {
    let mut out = BTreeMap::new();
    for (&mask, c) in map {
        let b = (mask >> bit & 1) as usize;
        let base = mask & !(1 << bit);
        for r in 0..2 {
            let e = if transpose { m.get(b, r) } else { m.get(r, b) };
            if e.is_exact_zero() {
                continue;
            }
            add_into(&mut out, base | (r as u64) << bit, c * e);
        }
    }
    out
}

/// Gate (ket) or cogate (bra) over an ordered list of edges.
#[derive(Clone, Debug)]
pub struct Tensor {
    kind: Kind,
    wires: Vec<EdgeId>,
    coeffs: BTreeMap<Mask, Scalar>,
}

impl Tensor {
    pub fn new(kind: Kind, wires: Vec<EdgeId>, coeffs: impl IntoIterator<Item = (Mask, Scalar)>) -> Self {
        assert!(wires.len() < 64, "arity too large");
        let mut map = BTreeMap::new();
        for (m, c) in coeffs {
            assert!(m <= full_mask(wires.len()), "mask outside arity");
            add_into(&mut map, m, c);
        }
        Tensor { kind, wires, coeffs: prune(map) }
    }

    /// Unit-coefficient tensor over wires `1..=n` from bit strings such as `"0110"`.
    pub fn from_bits(kind: Kind, terms: &[&str]) -> Self {
        let n = terms.first().map_or(0, |t| t.len());
        let coeffs = terms.iter().map(|t| {
            assert_eq!(t.len(), n, "inconsistent term length");
            (mask_from_bits(t).expect("bit string"), Scalar::one())
        });
        Tensor::new(kind, (1..=n as EdgeId).collect(), coeffs)
    }

    pub fn gate(terms: &[&str]) -> Self {
        Tensor::from_bits(Kind::Gate, terms)
    }

    pub fn cogate(terms: &[&str]) -> Self {
        Tensor::from_bits(Kind::Cogate, terms)
    }

    /// EQUAL_n: `|0..0⟩ + |1..1⟩`.
    pub fn equal(kind: Kind, n: usize) -> Self {
        let z = "0".repeat(n);
        let o = "1".repeat(n);
        Tensor::from_bits(kind, &[&z, &o])
    }

    pub fn parse(src: &str) -> Result<Tensor, TensorError> {
        parse_tensor(src)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn wires(&self) -> &[EdgeId] {
        &self.wires
    }

    pub fn arity(&self) -> usize {
        self.wires.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mask, &Scalar)> {
        self.coeffs.iter().map(|(m, c)| (*m, c))
    }

    pub fn support(&self) -> Vec<Mask> {
        self.coeffs.keys().copied().collect()
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.values().all(Scalar::is_exact)
    }

    pub fn coeff(&self, m: Mask) -> Scalar {
        self.coeffs.get(&m).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Coefficient of the subset of 1-based positions.
    pub fn coefficient(&self, subset: &[usize]) -> Result<Scalar, TensorError> {
        let mut m = 0;
        for &p in subset {
            if p == 0 || p > self.arity() {
                return Err(TensorError::InvalidSubset { pos: p, arity: self.arity() });
            }
            m |= 1 << (p - 1);
        }
        Ok(self.coeff(m))
    }

    pub fn position_of(&self, e: EdgeId) -> Option<usize> {
        self.wires.iter().position(|&w| w == e)
    }

    pub fn with_wires(&self, wires: Vec<EdgeId>) -> Tensor {
        assert_eq!(wires.len(), self.arity());
        Tensor { kind: self.kind, wires, coeffs: self.coeffs.clone() }
    }

    pub fn with_kind(&self, kind: Kind) -> Tensor {
        Tensor { kind, wires: self.wires.clone(), coeffs: self.coeffs.clone() }
    }

    /// Reorders wires so that new position `k` holds old position `perm[k]` (0-based).
    pub fn permute(&self, perm: &[usize]) -> Tensor {
        assert_eq!(perm.len(), self.arity());
        let wires = perm.iter().map(|&p| self.wires[p]).collect();
        let coeffs = self.coeffs.iter().map(|(&m, c)| {
            let mut nm = 0;
            for (k, &p) in perm.iter().enumerate() {
                nm |= (m >> p & 1) << k;
            }
            (nm, c.clone())
        });
        Tensor::new(self.kind, wires, coeffs)
    }

    /// Reorders wires to match `order`, which must be a permutation of the current wires.
    pub fn reorder(&self, order: &[EdgeId]) -> Option<Tensor> {
        if order.len() != self.arity() {
            return None;
        }
        let perm: Option<Vec<usize>> = order.iter().map(|e| self.position_of(*e)).collect();
        Some(self.permute(&perm?))
    }

    pub fn scale(&self, s: &Scalar) -> Tensor {
        Tensor::new(self.kind, self.wires.clone(), self.coeffs.iter().map(|(&m, c)| (m, c * s)))
    }

    pub fn add(&self, o: &Tensor) -> Result<Tensor, TensorError> {
        self.check_same_shape(o)?;
        let mut map = self.coeffs.clone();
        for (&m, c) in &o.coeffs {
            add_into(&mut map, m, c.clone());
        }
        Ok(Tensor { kind: self.kind, wires: self.wires.clone(), coeffs: prune(map) })
    }

    fn check_same_shape(&self, o: &Tensor) -> Result<(), TensorError> {
        if self.kind != o.kind {
            return Err(TensorError::KindMismatch { expected: self.kind, found: o.kind });
        }
        if self.wires != o.wires {
            return Err(TensorError::ArityMismatch { expected: self.arity(), found: o.arity() });
        }
        Ok(())
    }

    /// Largest coefficient difference; infinite when kinds or wires differ.
    pub fn max_residual(&self, o: &Tensor) -> f64 {
        if self.kind != o.kind || self.wires != o.wires {
            return f64::INFINITY;
        }
        let mut r: f64 = 0.0;
        for m in self.coeffs.keys().chain(o.coeffs.keys()) {
            r = r.max(self.coeff(*m).dist(&o.coeff(*m)));
        }
        r
    }

    /// Coefficient-wise ε-equality on identical wire lists.
    pub fn approx_eq(&self, o: &Tensor) -> bool {
        if self.kind != o.kind || self.wires != o.wires {
            return false;
        }
        self.coeffs.keys().chain(o.coeffs.keys()).all(|m| self.coeff(*m).approx_eq(&o.coeff(*m)))
    }

    /// `G'_{I'} = Σ_I G_I ∏ A_i[I'_i, I_i]`.
    pub fn apply_basis_change(&self, bases: &[BasisMatrix]) -> Result<Tensor, TensorError> {
        if bases.len() != self.arity() {
            return Err(TensorError::ArityMismatch { expected: self.arity(), found: bases.len() });
        }
        let mut map = self.coeffs.clone();
        for (k, m) in bases.iter().enumerate() {
            map = apply_wire(&map, k, m, false);
        }
        Ok(Tensor { kind: self.kind, wires: self.wires.clone(), coeffs: prune(map) })
    }

    /// `(A_1^{-1} ⊗ … ⊗ A_n^{-1})` acting on bras: `C'_{J'} = Σ_J C_J ∏ A_i^{-1}[J_i, J'_i]`.
    pub fn apply_inverse_basis_change(&self, bases: &[BasisMatrix]) -> Result<Tensor, TensorError> {
        if bases.len() != self.arity() {
            return Err(TensorError::ArityMismatch { expected: self.arity(), found: bases.len() });
        }
        let mut inv = Vec::with_capacity(bases.len());
        for (k, b) in bases.iter().enumerate() {
            inv.push(b.inverse().ok_or(TensorError::SingularBasis { wire: k + 1 })?);
        }
        self.apply_row_action(&inv)
    }

    /// `C'_{J'} = Σ_J C_J ∏ M_i[J_i, J'_i]` for the given matrices.
    pub fn apply_row_action(&self, ms: &[BasisMatrix]) -> Result<Tensor, TensorError> {
        if ms.len() != self.arity() {
            return Err(TensorError::ArityMismatch { expected: self.arity(), found: ms.len() });
        }
        let mut map = self.coeffs.clone();
        for (k, m) in ms.iter().enumerate() {
            map = apply_wire(&map, k, m, true);
        }
        Ok(Tensor { kind: self.kind, wires: self.wires.clone(), coeffs: prune(map) })
    }

    /// True iff the complement of every supported subset is also supported.
    pub fn complement_invariant(&self) -> bool {
        let full = full_mask(self.arity());
        self.coeffs.keys().all(|m| self.coeffs.contains_key(&(full ^ m)))
    }

    /// Tensor with coefficient `t_{I^C}` at `I`.
    pub fn complement(&self) -> Tensor {
        let full = full_mask(self.arity());
        Tensor { kind: self.kind, wires: self.wires.clone(), coeffs: self.coeffs.iter().map(|(m, c)| (full ^ m, c.clone())).collect() }
    }

    pub fn to_mixed(&self) -> MixedTensor {
        MixedTensor { wires: self.wires.iter().map(|&w| (w, self.kind)).collect(), coeffs: self.coeffs.clone() }
    }
}

impl PartialEq for Tensor {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}

fn fmt_terms(
    f: &mut fmt::Formatter<'_>,
    coeffs: &BTreeMap<Mask, Scalar>,
    n: usize,
    wrap: impl Fn(Mask) -> String,
) -> fmt::Result {
    if coeffs.is_empty() {
        return f.write_str("0");
    }
    let mut keys: Vec<Mask> = coeffs.keys().copied().collect();
    keys.sort_by_key(|&m| mask_to_bits(m, n));
    for (k, m) in keys.into_iter().enumerate() {
        let c = &coeffs[&m];
        let s = c.to_string();
        let simple = !s[1..].contains(['+', '-']);
        let (neg, body) = if simple && s.starts_with('-') { (true, s[1..].to_string()) } else { (false, s.clone()) };
        if k > 0 {
            f.write_str(if neg { " - " } else { " + " })?;
        } else if neg {
            f.write_str("-")?;
        }
        if !simple {
            write!(f, "({body})")?;
        } else if body != "1" {
            f.write_str(&body)?;
        }
        f.write_str(&wrap(m))?;
    }
    Ok(())
}

impl fmt::Display for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.arity();
        let kind = self.kind;
        fmt_terms(f, &self.coeffs, n, |m| match kind {
            Kind::Gate => format!("|{}>", mask_to_bits(m, n)),
            Kind::Cogate => format!("<{}|", mask_to_bits(m, n)),
        })
    }
}

/// Tensor literal such as `|10> + |01> - (2+3i)|11>` or `1/2<00| + <11|`; wires are `1..=n`.
pub fn parse_tensor(src: &str) -> Result<Tensor, TensorError> {
    let bytes = src.as_bytes();
    let mut terms: Vec<(Mask, Scalar)> = Vec::new();
    let mut kind: Option<Kind> = None;
    let mut arity: Option<usize> = None;
    let mut seg_start = 0;
    let mut k = 0;
    let mut depth = 0;
    while k < bytes.len() {
        let b = bytes[k];
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'|' | b'<' if depth == 0 => {
                let (this_kind, close) = if b == b'|' { (Kind::Gate, b'>') } else { (Kind::Cogate, b'|') };
                let end = bytes[k + 1..]
                    .iter()
                    .position(|&c| c == close)
                    .map(|p| p + k + 1)
                    .ok_or(TensorError::Parse { col: k + 1, msg: "unterminated ket/bra".into() })?;
                let bits = &src[k + 1..end];
                let mask = mask_from_bits(bits).ok_or(TensorError::Parse { col: k + 2, msg: format!("bad bit string `{bits}`") })?;
                if bits.is_empty() || bits.len() >= 64 {
                    return Err(TensorError::Parse { col: k + 2, msg: "bit string length must be 1..63".into() });
                }
                match kind {
                    None => kind = Some(this_kind),
                    Some(kd) if kd != this_kind => {
                        return Err(TensorError::Parse { col: k + 1, msg: "mixed kets and bras".into() })
                    }
                    _ => {}
                }
                match arity {
                    None => arity = Some(bits.len()),
                    Some(n) if n != bits.len() => {
                        return Err(TensorError::Parse { col: k + 2, msg: format!("expected {n} bits, found {}", bits.len()) })
                    }
                    _ => {}
                }
                let coeff = parse_prefix(&src[seg_start..k], seg_start, terms.is_empty())?;
                terms.push((mask, coeff));
                k = end + 1;
                seg_start = k;
                continue;
            }
            _ => {}
        }
        k += 1;
    }
    if !src[seg_start..].trim().is_empty() {
        return Err(TensorError::Parse { col: seg_start + 1 + leading_ws(&src[seg_start..]), msg: "trailing input".into() });
    }
    let (Some(kind), Some(n)) = (kind, arity) else {
        return Err(TensorError::Parse { col: 1, msg: "no kets or bras found".into() });
    };
    Ok(Tensor::new(kind, (1..=n as EdgeId).collect(), terms))
}

fn leading_ws(s: &str) -> usize {
    s.len() - s.trim_start().len()
}

/// Sign and coefficient text preceding a ket/bra.
fn parse_prefix(seg: &str, offset: usize, first: bool) -> Result<Scalar, TensorError> {
    let lead = leading_ws(seg);
    let t = seg.trim();
    let col = offset + lead + 1;
    let (neg, rest, rest_col) = match t.as_bytes().first() {
        Some(b'+') => (false, &t[1..], col + 1),
        Some(b'-') => (true, &t[1..], col + 1),
        _ if first => (false, t, col),
        _ => return Err(TensorError::Parse { col, msg: "expected `+` or `-` between terms".into() }),
    };
    let body = rest.trim().trim_end_matches('*').trim();
    let c = if body.is_empty() {
        Scalar::one()
    } else {
        let inner = rest_col + leading_ws(rest);
        parse_scalar(body).map_err(|e| TensorError::Parse { col: inner + e.col - 1, msg: e.msg })?
    };
    Ok(if neg { -c } else { c })
}

/// Tensor whose wires may be a mix of bra and ket wires; produced by partial contraction.
#[derive(Clone, Debug)]
pub struct MixedTensor {
    pub wires: Vec<(EdgeId, Kind)>,
    pub coeffs: BTreeMap<Mask, Scalar>,
}

impl MixedTensor {
    pub fn scalar(s: Scalar) -> Self {
        let mut coeffs = BTreeMap::new();
        if !s.is_zero() {
            coeffs.insert(0, s);
        }
        MixedTensor { wires: Vec::new(), coeffs }
    }

    pub fn value(&self) -> Option<Scalar> {
        if self.wires.is_empty() {
            Some(self.coeffs.get(&0).cloned().unwrap_or_else(Scalar::zero))
        } else {
            None
        }
    }

    pub fn coeff(&self, m: Mask) -> Scalar {
        self.coeffs.get(&m).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Uniform-kind result, if all surviving wires share a kind.
    pub fn to_tensor(&self) -> Option<Tensor> {
        let kind = self.wires.first()?.1;
        if self.wires.iter().any(|w| w.1 != kind) {
            return None;
        }
        Some(Tensor { kind, wires: self.wires.iter().map(|w| w.0).collect(), coeffs: self.coeffs.clone() })
    }

    /// Coefficient lookup by per-wire bit values keyed by edge.
    pub fn coeff_by_edges(&self, assignment: &HashMap<EdgeId, u8>) -> Scalar {
        let mut m = 0;
        for (k, (e, _)) in self.wires.iter().enumerate() {
            if assignment.get(e).copied().unwrap_or(0) == 1 {
                m |= 1 << k;
            }
        }
        self.coeff(m)
    }
}

impl fmt::Display for MixedTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bras: Vec<(usize, EdgeId)> =
            self.wires.iter().enumerate().filter(|w| w.1 .1 == Kind::Cogate).map(|(k, w)| (k, w.0)).collect();
        let kets: Vec<(usize, EdgeId)> =
            self.wires.iter().enumerate().filter(|w| w.1 .1 == Kind::Gate).map(|(k, w)| (k, w.0)).collect();
        if self.wires.is_empty() {
            return write!(f, "{}", self.coeff(0));
        }
        let label = |m: Mask, side: &[(usize, EdgeId)]| -> String {
            side.iter().map(|&(k, e)| format!("{}_{}", m >> k & 1, e)).collect::<Vec<_>>().join("")
        };
        fmt_terms(f, &self.coeffs, self.wires.len(), |m| match (bras.is_empty(), kets.is_empty()) {
            (false, false) => format!("<{}|{}>", label(m, &bras), label(m, &kets)),
            (false, true) => format!("<{}|", label(m, &bras)),
            _ => format!("|{}>", label(m, &kets)),
        })
    }
}

/// Result of [`contract`].
#[derive(Clone, Debug)]
pub enum Contraction {
    Scalar(Scalar),
    Tensor(Tensor),
}

/// Contracts shared edges (bra wire against ket wire with Kronecker pairing).
pub fn contract_mixed(a: &MixedTensor, b: &MixedTensor) -> Result<MixedTensor, TensorError> {
    let mut shared_a = 0u64;
    let mut shared_b = 0u64;
    let mut pairs = Vec::new();
    for (i, (e, ka)) in a.wires.iter().enumerate() {
        if let Some(j) = b.wires.iter().position(|w| w.0 == *e) {
            if b.wires[j].1 == *ka {
                return Err(TensorError::SameKindWire(*e));
            }
            shared_a |= 1 << i;
            shared_b |= 1 << j;
            pairs.push((i, j));
        }
    }
    let keep_a: Vec<usize> = (0..a.wires.len()).filter(|i| shared_a >> i & 1 == 0).collect();
    let keep_b: Vec<usize> = (0..b.wires.len()).filter(|j| shared_b >> j & 1 == 0).collect();
    if keep_a.len() + keep_b.len() >= 64 {
        return Err(TensorError::TooManyWires(keep_a.len() + keep_b.len()));
    }
    let mut wires: Vec<(EdgeId, Kind)> = keep_a.iter().map(|&i| a.wires[i]).collect();
    wires.extend(keep_b.iter().map(|&j| b.wires[j]));

    // key shared bits in a common (a-side) layout
    let key_b = |m: Mask| -> Mask {
        let mut k = 0;
        for (t, &(_, j)) in pairs.iter().enumerate() {
            k |= (m >> j & 1) << t;
        }
        k
    };
    let key_a = |m: Mask| -> Mask {
        let mut k = 0;
        for (t, &(i, _)) in pairs.iter().enumerate() {
            k |= (m >> i & 1) << t;
        }
        k
    };
    let compress = |m: Mask, keep: &[usize], shift: usize| -> Mask {
        let mut r = 0;
        for (t, &p) in keep.iter().enumerate() {
            r |= (m >> p & 1) << (t + shift);
        }
        r
    };
    let mut by_key: HashMap<Mask, Vec<(Mask, &Scalar)>> = HashMap::new();
    for (&m, c) in &b.coeffs {
        by_key.entry(key_b(m)).or_default().push((compress(m, &keep_b, keep_a.len()), c));
    }
    let mut out = BTreeMap::new();
    for (&m, c) in &a.coeffs {
        if let Some(list) = by_key.get(&key_a(m)) {
            let ra = compress(m, &keep_a, 0);
            for (rb, cb) in list {
                add_into(&mut out, ra | rb, c * *cb);
            }
        }
    }
    Ok(MixedTensor { wires, coeffs: prune(out) })
}

/// `⟨a|b⟩` over shared edges: a scalar when nothing survives, else a single-kind tensor.
pub fn contract(a: &Tensor, b: &Tensor) -> Result<Contraction, TensorError> {
    if a.kind != Kind::Cogate {
        return Err(TensorError::KindMismatch { expected: Kind::Cogate, found: a.kind });
    }
    if b.kind != Kind::Gate {
        return Err(TensorError::KindMismatch { expected: Kind::Gate, found: b.kind });
    }
    let r = contract_mixed(&a.to_mixed(), &b.to_mixed())?;
    if let Some(v) = r.value() {
        return Ok(Contraction::Scalar(v));
    }
    r.to_tensor().map(Contraction::Tensor).ok_or(TensorError::UnsupportedMixedResult)
}
