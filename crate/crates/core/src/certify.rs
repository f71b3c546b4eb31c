//! Pfaffian certificates: verification, recovery under fixed bases, the
//! 0/1 gate census, Boolean trees, and decomposition checks.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_complex::Complex64;

use crate::exec::Exec;
use crate::network::{contract_all, corrected_block, matrix_text, parse_square, validate_order, CertifiedNetwork, NetError, Network, DEFAULT_WORK_LIMIT};
use crate::pfaffian::{direct_sum_ordered, sign_flip, sub_pfaffian, sub_pfaffian_dual, PfError, SkewMatrix};
use crate::registry::{self, RegistryEntry};
use crate::scalar::Scalar;
use crate::tensor::{contract, full_mask, BasisMatrix, Contraction, EdgeId, Kind, Mask, Tensor, TensorError};

/// Largest arity for exhaustive 0/1 enumeration.
pub const CENSUS_MAX_ARITY: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertError {
    #[error("certificate covers {found} wires, tensor has {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("census arity {arity} exceeds {limit}")]
    SizeLimit { arity: usize, limit: usize },
    #[error("fragment wires {fragment:?} do not match target wires {target:?}")]
    WireMismatch { target: Vec<EdgeId>, fragment: Vec<EdgeId> },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("contraction left wires of both kinds")]
    MixedResult,
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Pfaffian(#[from] PfError),
    #[error(transparent)]
    Network(#[from] NetError),
}

/// `(A_1 ⊗ … ⊗ A_n) G = α sPf(Ξ)` for gates, `C (A_1^{-1} ⊗ … ⊗ A_n^{-1}) = β sPf*(Θ)` for cogates.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub bases: Vec<BasisMatrix>,
    pub scale: Scalar,
    pub matrix: SkewMatrix,
}

impl Certificate {
    pub fn new(bases: Vec<BasisMatrix>, scale: Scalar, matrix: SkewMatrix) -> Self {
        Certificate { bases, scale, matrix }
    }

    pub fn arity(&self) -> usize {
        self.bases.len()
    }

    /// `scale·sPf(matrix)` (gates) or `scale·sPf*(matrix)` (cogates) over `wires`.
    pub fn image(&self, kind: Kind, wires: &[EdgeId]) -> Result<Tensor, CertError> {
        if wires.len() != self.matrix.size() {
            return Err(CertError::ArityMismatch { expected: wires.len(), found: self.matrix.size() });
        }
        let m = self.matrix.with_labels(wires.to_vec());
        let t = match kind {
            Kind::Gate => sub_pfaffian(&m)?,
            Kind::Cogate => sub_pfaffian_dual(&m)?,
        };
        Ok(t.scale(&self.scale))
    }

    /// Reads `basis [[..]]` lines (one per wire), `scale EXPR` and an optional `matrix [[..]]`.
    pub fn parse(src: &str) -> Result<Certificate, CertError> {
        let mut bases = Vec::new();
        let mut scale = None;
        let mut matrix = None;
        for (k, raw) in src.lines().enumerate() {
            let line = k + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let (key, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
            let perr = |msg: String| CertError::Parse { line, msg };
            match key {
                "basis" => bases.push(BasisMatrix::parse(rest).map_err(|e| perr(e.to_string()))?),
                "scale" => scale = Some(crate::expr::parse_scalar(rest).map_err(|e| perr(e.to_string()))?),
                "matrix" => {
                    let rows = parse_square(rest, line, 1).map_err(|e| perr(e.to_string()))?;
                    let labels = (1..=rows.len() as EdgeId).collect();
                    matrix = Some(SkewMatrix::new(labels, rows).map_err(|e| perr(e.to_string()))?);
                }
                other => return Err(perr(format!("unknown record `{other}`"))),
            }
        }
        let scale = scale.ok_or(CertError::Parse { line: 0, msg: "missing `scale`".into() })?;
        let n = bases.len();
        let matrix = matrix.unwrap_or_else(|| SkewMatrix::zero((1..=n as EdgeId).collect()));
        if matrix.size() != n {
            return Err(CertError::ArityMismatch { expected: n, found: matrix.size() });
        }
        Ok(Certificate { bases, scale, matrix })
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bases {
            writeln!(f, "basis {b}")?;
        }
        writeln!(f, "scale {}", self.scale)?;
        writeln!(f, "matrix {}", matrix_text(&self.matrix))
    }
}

/// Both sides of the certificate equation over the tensor's wires.
fn sides(t: &Tensor, c: &Certificate) -> Result<(Tensor, Tensor), CertError> {
    let n = t.arity();
    if c.bases.len() != n {
        return Err(CertError::ArityMismatch { expected: n, found: c.bases.len() });
    }
    if c.matrix.size() != n {
        return Err(CertError::ArityMismatch { expected: n, found: c.matrix.size() });
    }
    let lhs = match t.kind() {
        Kind::Gate => t.apply_basis_change(&c.bases)?,
        Kind::Cogate => t.apply_inverse_basis_change(&c.bases)?,
    };
    Ok((lhs, c.image(t.kind(), t.wires())?))
}

/// Largest coefficient distance between the changed tensor and the certificate image.
pub fn certificate_residual(t: &Tensor, c: &Certificate) -> Result<f64, CertError> {
    let (lhs, rhs) = sides(t, c)?;
    Ok(lhs.max_residual(&rhs))
}

/// Coefficient-wise ε-check of a certificate.
pub fn check_certificate(t: &Tensor, c: &Certificate) -> Result<bool, CertError> {
    let (lhs, rhs) = sides(t, c)?;
    Ok(lhs.approx_eq(&rhs))
}

/// The unique certificate under `bases`, if any: scale from the empty (full) set, matrix from pairs.
pub fn find_certificate_given_bases(t: &Tensor, bases: &[BasisMatrix]) -> Result<Option<Certificate>, CertError> {
    let n = t.arity();
    if bases.len() != n {
        return Err(CertError::ArityMismatch { expected: n, found: bases.len() });
    }
    let (tp, flip) = match t.kind() {
        Kind::Gate => (t.apply_basis_change(bases)?, 0),
        Kind::Cogate => (t.apply_inverse_basis_change(bases)?, full_mask(n)),
    };
    let scale = tp.coeff(flip);
    if scale.is_zero() {
        return Ok(None);
    }
    for (m, c) in tp.terms() {
        if (m ^ flip).count_ones() % 2 == 1 && !(c / &scale).is_zero() {
            return Ok(None);
        }
    }
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v = tp.coeff((1 << i | 1 << j) ^ flip) / &scale;
            if let Some(v) = v.pruned() {
                entries.push((i, j, v));
            }
        }
    }
    let matrix = SkewMatrix::from_upper(t.wires().to_vec(), &entries);
    let cert = Certificate { bases: bases.to_vec(), scale, matrix };
    Ok(check_certificate(t, &cert)?.then_some(cert))
}

/// Census member with its recovered certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct CensusEntry {
    pub tensor: Tensor,
    pub certificate: Certificate,
}

/// Float pre-screen of a changed table `v`: nonzero scale, vanishing odd part, 4-subset Pfaffian consistency.
fn screen(v: &[Complex64], n: usize, flip: usize) -> bool {
    let s = v[flip];
    if s.norm() < 1e-9 {
        return false;
    }
    let tol = 1e-7;
    for (k, c) in v.iter().enumerate() {
        if (k ^ flip).count_ones() % 2 == 1 && (c / s).norm() > tol {
            return false;
        }
    }
    if n == 4 {
        let x = |i: usize, j: usize| v[(1 << i | 1 << j) ^ flip] / s;
        let pf = x(0, 1) * x(2, 3) - x(0, 2) * x(1, 3) + x(0, 3) * x(1, 2);
        let full = v[15 ^ flip] / s;
        if (pf - full).norm() > tol * full.norm().max(1.0) {
            return false;
        }
    }
    true
}

/// All nonzero 0/1-coefficient tensors of `arity` that are Pfaffian under `bases`, in table order.
pub fn census_under_fixed_bases(arity: usize, kind: Kind, bases: &[BasisMatrix], exec: Exec) -> Result<Vec<CensusEntry>, CertError> {
    if arity > CENSUS_MAX_ARITY {
        return Err(CertError::SizeLimit { arity, limit: CENSUS_MAX_ARITY });
    }
    if bases.len() != arity {
        return Err(CertError::ArityMismatch { expected: arity, found: bases.len() });
    }
    let dim = 1usize << arity;
    let wires: Vec<EdgeId> = (1..=arity as EdgeId).collect();
    let mut images = Vec::with_capacity(dim);
    for m in 0..dim {
        let unit = Tensor::new(kind, wires.clone(), [(m as Mask, Scalar::one())]);
        let img = match kind {
            Kind::Gate => unit.apply_basis_change(bases)?,
            Kind::Cogate => unit.apply_inverse_basis_change(bases)?,
        };
        images.push((0..dim).map(|k| img.coeff(k as Mask).to_complex()).collect::<Vec<_>>());
    }
    let flip = if kind == Kind::Gate { 0 } else { dim - 1 };
    let tables = 1u64 << dim;
    Ok(exec.filter_map_range(tables, |tab| {
        if tab == 0 {
            return None;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for (m, img) in images.iter().enumerate() {
            if tab >> m & 1 == 1 {
                for (a, b) in v.iter_mut().zip(img) {
                    *a += b;
                }
            }
        }
        if !screen(&v, arity, flip) {
            return None;
        }
        let t = Tensor::new(kind, wires.clone(), (0..dim).filter(|m| tab >> m & 1 == 1).map(|m| (m as Mask, Scalar::one())));
        let certificate = find_certificate_given_bases(&t, bases).ok().flatten()?;
        Some(CensusEntry { tensor: t, certificate })
    }))
}

/// Alternating EQUAL gate/cogate tree with `leaf_count` dangling cogate wires.
pub fn build_boolean_tree(leaf_count: usize) -> CertifiedNetwork {
    assert!(leaf_count >= 1, "a Boolean tree has at least one leaf");
    let get = |name: &str| registry::lookup(name).expect("registry entry");
    let root = get("tree-eq2-cogate");
    let cap_gate = get("tree-cap-gate");
    let eq3_gate = get("tree-eq3-gate");
    let cap_cogate = get("tree-cap-cogate");
    let eq3_cogate = get("tree-eq3-cogate");

    let mut net = Network::default();
    let mut gate_certs = Vec::new();
    let mut cogate_certs = Vec::new();
    let mut next: EdgeId = 1;
    let mut fresh = || {
        next += 1;
        next - 1
    };
    let mut place = |net: &mut Network, entry: &RegistryEntry, name: String, wires: Vec<EdgeId>| {
        let t = entry.tensor.with_wires(wires);
        match t.kind() {
            Kind::Gate => {
                net.add_gate(&name, t);
                gate_certs.push(entry.certificate.clone());
            }
            Kind::Cogate => {
                net.add_cogate(&name, t);
                cogate_certs.push(entry.certificate.clone());
            }
        }
    };
    let (e1, e2) = (fresh(), fresh());
    place(&mut net, &root, "root".into(), vec![e1, e2]);
    let mut open = std::collections::VecDeque::from([e1, e2]);
    if leaf_count == 1 {
        place(&mut net, &cap_gate, "seal".into(), vec![e2]);
        open.pop_back();
    }
    for k in 0..leaf_count.saturating_sub(2) {
        let e = open.pop_front().expect("open wire");
        let (f, g, h1, h2) = (fresh(), fresh(), fresh(), fresh());
        place(&mut net, &eq3_gate, format!("g{k}"), vec![e, f, g]);
        place(&mut net, &cap_cogate, format!("cap{k}"), vec![f]);
        place(&mut net, &eq3_cogate, format!("c{k}"), vec![g, h1, h2]);
        open.extend([h1, h2]);
    }
    net.edges = (1..next).collect();
    let cn = CertifiedNetwork { network: net, gate_certs, cogate_certs };
    let network = cn.to_network();
    CertifiedNetwork { network, ..cn }
}

/// Block sign handling when laying out a partial contraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlipRule {
    /// Native-order blocks; a block read in cyclically reversed order gets a checkerboard sign flip, Θ gets the tilde.
    Checkerboard,
    /// Blocks rescaled to σ order so every sub-Pfaffian is preserved; no tilde on Θ.
    Exact,
}

/// Outcome of [`check_decomposition`].
#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub holds: bool,
    pub residual: f64,
    /// `sPf(Ξ̃_σ)` over the gate layout.
    pub intermediate: Tensor,
    /// Scaled partial contraction over the target's wires.
    pub contraction: Tensor,
    /// Target after its basis change.
    pub expected: Tensor,
}

/// `Some(false)`: σ reads the block in a rotation of its native order; `Some(true)`: a rotation of the reversal.
fn checkerboard_block_flip(native: &[EdgeId], pos: &HashMap<EdgeId, usize>) -> Option<bool> {
    let n = native.len();
    let mut seen = native.to_vec();
    seen.sort_by_key(|e| pos[e]);
    let is_rotation = |seq: &[EdgeId]| (0..n).any(|k| (0..n).all(|i| seen[i] == seq[(i + k) % n]));
    if n <= 2 || is_rotation(native) {
        return Some(false);
    }
    let rev: Vec<EdgeId> = native.iter().rev().copied().collect();
    is_rotation(&rev).then_some(true)
}

fn checkerboard(m: &SkewMatrix) -> SkewMatrix {
    let mut out = m.clone();
    for i in 0..m.size() {
        for j in i + 1..m.size() {
            if (i + j) % 2 == 0 {
                out.set(i, j, -m.get(i, j));
            }
        }
    }
    out
}

/// Blocks in native order, concatenated by first appearance in σ.
fn checkerboard_layout(blocks: Vec<(String, SkewMatrix)>, pos: &HashMap<EdgeId, usize>, flip: bool) -> Result<SkewMatrix, CertError> {
    let mut blocks = blocks;
    blocks.sort_by_key(|(_, m)| m.labels().iter().map(|e| pos[e]).min().unwrap_or(usize::MAX));
    let mut layout = Vec::new();
    let mut mats = Vec::new();
    for (name, m) in blocks {
        let rev = checkerboard_block_flip(m.labels(), pos).ok_or(NetError::UnsupportedWireOrder(name))?;
        layout.extend_from_slice(m.labels());
        mats.push(if flip && rev { checkerboard(&m) } else { m });
    }
    Ok(direct_sum_ordered(&mats, &layout)?)
}

/// Does the fragment's partial contraction reproduce the target after its basis change?
pub fn check_decomposition(
    target: &Tensor,
    target_cert: &Certificate,
    fragment: &CertifiedNetwork,
    sigma: &[EdgeId],
    rule: FlipRule,
) -> Result<DecompositionReport, CertError> {
    let net = &fragment.network;
    net.validate_fragment()?;
    let dangling = net.dangling();
    let want: BTreeSet<EdgeId> = target.wires().iter().copied().collect();
    let have: BTreeSet<EdgeId> = dangling.iter().copied().collect();
    if want != have || want.len() != target.arity() {
        return Err(CertError::WireMismatch { target: target.wires().to_vec(), fragment: dangling });
    }
    if net.cogates.iter().any(|c| c.tensor.wires().iter().any(|e| have.contains(e))) {
        return Err(CertError::WireMismatch { target: target.wires().to_vec(), fragment: dangling });
    }
    validate_order(net, sigma)?;
    let pos: HashMap<EdgeId, usize> = sigma.iter().enumerate().map(|(k, &e)| (e, k)).collect();

    let mut scale = Scalar::one();
    let mut gate_blocks = Vec::new();
    for (n, c) in net.gates.iter().zip(&fragment.gate_certs) {
        gate_blocks.push((n.name.clone(), c.matrix.with_labels(n.tensor.wires().to_vec())));
        scale = scale * &c.scale;
    }
    let mut cogate_blocks = Vec::new();
    for (n, c) in net.cogates.iter().zip(&fragment.cogate_certs) {
        cogate_blocks.push((n.name.clone(), c.matrix.with_labels(n.tensor.wires().to_vec())));
        scale = scale * &c.scale;
    }

    let (xi, theta) = match rule {
        FlipRule::Checkerboard => (checkerboard_layout(gate_blocks, &pos, true)?, sign_flip(&checkerboard_layout(cogate_blocks, &pos, false)?)),
        FlipRule::Exact => {
            let fix = |blocks: Vec<(String, SkewMatrix)>| -> Result<SkewMatrix, CertError> {
                let ms = blocks.iter().map(|(name, m)| corrected_block(m, sigma, name)).collect::<Result<Vec<_>, _>>()?;
                Ok(direct_sum_ordered(&ms, sigma)?)
            };
            (fix(gate_blocks)?, fix(cogate_blocks)?)
        }
    };

    let intermediate = sub_pfaffian(&xi)?;
    let dual = sub_pfaffian_dual(&theta)?;
    let joined = match contract(&dual, &intermediate)? {
        Contraction::Tensor(t) => t,
        Contraction::Scalar(s) => Tensor::new(Kind::Gate, Vec::new(), [(0, s)]),
    };
    let contraction = joined.reorder(target.wires()).ok_or(CertError::MixedResult)?.scale(&scale);
    let expected = target.apply_basis_change(&target_cert.bases)?;
    let residual = contraction.max_residual(&expected);
    let holds = contraction.approx_eq(&expected) && fragment.verify() && check_certificate(target, target_cert)?;
    Ok(DecompositionReport { holds, residual, intermediate, contraction, expected })
}

/// Dangling-wire tensor of a fragment by brute-force contraction.
pub fn fragment_tensor(fragment: &Network) -> Result<Tensor, CertError> {
    let mixed = contract_all(fragment, DEFAULT_WORK_LIMIT)?;
    mixed.to_tensor().ok_or(CertError::MixedResult)
}

/// One line of the reference suite report.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {:.3e}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.residual)
    }
}

fn result(name: &str, r: Result<(bool, f64), CertError>) -> SuiteResult {
    match r {
        Ok((pass, residual)) => SuiteResult { name: name.into(), pass, residual },
        Err(_) => SuiteResult { name: name.into(), pass: false, residual: f64::INFINITY },
    }
}

/// Sealing one wire of a registered tensor with a registered cap leaves EQUAL_2 on the rest.
fn bridge_check(body: &str, cap: &str) -> Result<(bool, f64), CertError> {
    let body = registry::lookup(body).expect("registry entry");
    let cap = registry::lookup(cap).expect("registry entry");
    let sealed = cap.tensor.with_wires(vec![3]);
    let t = match contract(&sealed, &body.tensor).or_else(|_| contract(&body.tensor, &sealed))? {
        Contraction::Tensor(t) => t,
        Contraction::Scalar(_) => return Err(CertError::MixedResult),
    };
    let want = Tensor::equal(body.tensor.kind(), 2);
    let residual = t.max_residual(&want);
    let certs = check_certificate(&body.tensor, &body.certificate)? && check_certificate(&cap.tensor, &cap.certificate)?;
    Ok((certs && t.approx_eq(&want), residual))
}

fn tree_check(leaves: usize) -> Result<(bool, f64), CertError> {
    let tree = build_boolean_tree(leaves);
    let t = fragment_tensor(&tree.network)?;
    let want = Tensor::equal(Kind::Cogate, leaves).with_wires(t.wires().to_vec());
    let residual = t.max_residual(&want).max(tree.max_residual().unwrap_or(f64::INFINITY));
    Ok((tree.verify() && t.approx_eq(&want), residual))
}

fn decomposition_check() -> Result<(bool, f64), CertError> {
    let d = registry::decomposition_example();
    let rep = check_decomposition(&d.target, &d.target_cert, &d.fragment, &d.sigma, FlipRule::Checkerboard)?;
    let inter = rep.intermediate.max_residual(&d.printed_intermediate);
    Ok((rep.holds && rep.intermediate.approx_eq(&d.printed_intermediate), rep.residual.max(inter)))
}

/// Checks every registry certificate plus the bridge, tree and decomposition constructions.
pub fn run_reference_suite() -> Vec<SuiteResult> {
    let mut out: Vec<SuiteResult> = registry::registry()
        .iter()
        .map(|e| {
            let r = check_certificate(&e.tensor, &e.certificate)
                .and_then(|ok| Ok((ok, certificate_residual(&e.tensor, &e.certificate)?)));
            result(&e.name, r)
        })
        .collect();
    out.push(result("bridge-gate-fragment", bridge_check("tree-eq3-gate", "tree-cap-cogate")));
    out.push(result("bridge-cogate-fragment", bridge_check("tree-eq3-cogate", "tree-cap-gate")));
    out.push(result("boolean-tree-5", tree_check(5)));
    out.push(result("decomposition-eq4", decomposition_check()));
    out
}
