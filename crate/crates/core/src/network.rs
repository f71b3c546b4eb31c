use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use crate::certify::Certificate;
use crate::expr::parse_scalar;
use crate::pfaffian::{direct_sum_ordered, pfaffian, sign_flip, PfError, PfMethod, SkewMatrix};
use crate::scalar::Scalar;
use crate::tensor::{contract_mixed, parse_tensor, BasisMatrix, EdgeId, Kind, MixedTensor, Tensor, TensorError};

/// Default bound on coefficient products performed by brute-force contraction.
pub const DEFAULT_WORK_LIMIT: u64 = 200_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetError {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("edge {0} does not join exactly one gate and one cogate")]
    NotBipartite(EdgeId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("unknown tensor `{0}`")]
    UnknownTensor(String),
    #[error("network has no embedding")]
    MissingEmbedding,
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
    #[error("auxiliary gate graph is disconnected")]
    NotTreeConnectable,
    #[error("brute-force work limit of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("network has an odd number of edges ({0})")]
    OddEdgeCount(usize),
    #[error("wire order of `{0}` in sigma has no sign-consistent correction")]
    UnsupportedWireOrder(String),
    #[error("invalid edge order: {0}")]
    InvalidOrder(String),
    #[error("missing certificate for `{0}`")]
    MissingCertificate(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Pfaffian(#[from] PfError),
}

/// Named gate or cogate.
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub name: String,
    pub tensor: Tensor,
}

/// Certificate data as written in a network file: scale and matrix over the tensor's wires.
#[derive(Clone, Debug, PartialEq)]
pub struct CertSpec {
    pub scale: Scalar,
    pub matrix: SkewMatrix,
}

/// Bipartite tensor contraction network, optionally embedded and certified.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Network {
    pub edges: Vec<EdgeId>,
    pub gates: Vec<Node>,
    pub cogates: Vec<Node>,
    pub rotations: BTreeMap<String, Vec<EdgeId>>,
    pub outer: Option<(String, EdgeId)>,
    pub order: Option<Vec<EdgeId>>,
    pub bases: BTreeMap<EdgeId, BasisMatrix>,
    pub certificates: BTreeMap<String, CertSpec>,
}

/// Vertex index: gates first, then cogates.
pub type Vertex = usize;

/// Counterclockwise edge order at every vertex plus an outer dart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationSystem {
    pub rot: Vec<Vec<EdgeId>>,
    pub outer: Option<(Vertex, EdgeId)>,
}

impl Network {
    pub fn new(edges: Vec<EdgeId>) -> Self {
        Network { edges, ..Default::default() }
    }

    pub fn add_gate(&mut self, name: &str, tensor: Tensor) {
        assert_eq!(tensor.kind(), Kind::Gate);
        self.gates.push(Node { name: name.into(), tensor });
    }

    pub fn add_cogate(&mut self, name: &str, tensor: Tensor) {
        assert_eq!(tensor.kind(), Kind::Cogate);
        self.cogates.push(Node { name: name.into(), tensor });
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.gates.iter().chain(&self.cogates)
    }

    pub fn vertex_count(&self) -> usize {
        self.gates.len() + self.cogates.len()
    }

    pub fn node(&self, v: Vertex) -> &Node {
        if v < self.gates.len() {
            &self.gates[v]
        } else {
            &self.cogates[v - self.gates.len()]
        }
    }

    pub fn vertex_of(&self, name: &str) -> Option<Vertex> {
        self.nodes().position(|n| n.name == name)
    }

    /// (gate vertex, cogate vertex) per edge; either side may be absent in a fragment.
    pub fn endpoints(&self) -> BTreeMap<EdgeId, (Option<Vertex>, Option<Vertex>)> {
        let mut ends: BTreeMap<EdgeId, (Option<Vertex>, Option<Vertex>)> =
            self.edges.iter().map(|&e| (e, (None, None))).collect();
        for (v, n) in self.nodes().enumerate() {
            for &w in n.tensor.wires() {
                let slot = ends.entry(w).or_insert((None, None));
                if v < self.gates.len() {
                    slot.0 = Some(v);
                } else {
                    slot.1 = Some(v);
                }
            }
        }
        ends
    }

    fn incidence_counts(&self) -> Result<BTreeMap<EdgeId, (usize, usize)>, NetError> {
        let declared: BTreeSet<EdgeId> = self.edges.iter().copied().collect();
        let mut counts: BTreeMap<EdgeId, (usize, usize)> = declared.iter().map(|&e| (e, (0, 0))).collect();
        for (v, n) in self.nodes().enumerate() {
            for &w in n.tensor.wires() {
                let c = counts.get_mut(&w).ok_or(NetError::UnknownEdge(w))?;
                if v < self.gates.len() {
                    c.0 += 1;
                } else {
                    c.1 += 1;
                }
            }
        }
        Ok(counts)
    }

    /// Closed bipartite network: every edge joins exactly one gate and one cogate.
    pub fn validate(&self) -> Result<(), NetError> {
        for (e, c) in self.incidence_counts()? {
            if c != (1, 1) {
                return Err(NetError::NotBipartite(e));
            }
        }
        Ok(())
    }

    /// Fragment: each edge meets at most one gate and one cogate, and at least one tensor.
    pub fn validate_fragment(&self) -> Result<(), NetError> {
        for (e, (g, c)) in self.incidence_counts()? {
            if g > 1 || c > 1 || g + c == 0 {
                return Err(NetError::NotBipartite(e));
            }
        }
        Ok(())
    }

    /// Edges incident on a single tensor, in increasing order.
    pub fn dangling(&self) -> Vec<EdgeId> {
        self.endpoints().into_iter().filter(|(_, (g, c))| g.is_none() != c.is_none()).map(|(e, _)| e).collect()
    }

    pub fn embedding(&self) -> Result<RotationSystem, NetError> {
        if self.rotations.is_empty() {
            return Err(NetError::MissingEmbedding);
        }
        let mut rot = Vec::with_capacity(self.vertex_count());
        for n in self.nodes() {
            let r = self.rotations.get(&n.name).ok_or_else(|| {
                NetError::InvalidEmbedding(format!("no rotation for `{}`", n.name))
            })?;
            let mut a = r.clone();
            let mut b = n.tensor.wires().to_vec();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(NetError::InvalidEmbedding(format!("rotation of `{}` is not a permutation of its wires", n.name)));
            }
            rot.push(r.clone());
        }
        for name in self.rotations.keys() {
            if self.vertex_of(name).is_none() {
                return Err(NetError::UnknownTensor(name.clone()));
            }
        }
        let outer = match &self.outer {
            Some((name, e)) => {
                let v = self.vertex_of(name).ok_or_else(|| NetError::UnknownTensor(name.clone()))?;
                if !rot[v].contains(e) {
                    return Err(NetError::InvalidEmbedding(format!("outer edge {e} is not incident on `{name}`")));
                }
                Some((v, *e))
            }
            None => None,
        };
        Ok(RotationSystem { rot, outer })
    }

    pub fn parse(src: &str) -> Result<Network, NetError> {
        parse_network(src)
    }

    /// Certified view built from `basis` and `certificate` records.
    pub fn certified(&self) -> Result<CertifiedNetwork, NetError> {
        let cert_for = |n: &Node| -> Result<Certificate, NetError> {
            let spec = self.certificates.get(&n.name).ok_or_else(|| NetError::MissingCertificate(n.name.clone()))?;
            let bases = n.tensor.wires().iter().map(|e| self.bases.get(e).cloned().unwrap_or_else(BasisMatrix::identity)).collect();
            Ok(Certificate { bases, scale: spec.scale.clone(), matrix: spec.matrix.clone() })
        };
        let gate_certs = self.gates.iter().map(cert_for).collect::<Result<_, _>>()?;
        let cogate_certs = self.cogates.iter().map(cert_for).collect::<Result<_, _>>()?;
        Ok(CertifiedNetwork { network: self.clone(), gate_certs, cogate_certs })
    }
}

/// Network with one certificate per gate and per cogate.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedNetwork {
    pub network: Network,
    pub gate_certs: Vec<Certificate>,
    pub cogate_certs: Vec<Certificate>,
}

impl CertifiedNetwork {
    /// Every certificate checks against its tensor.
    pub fn verify(&self) -> bool {
        self.max_residual().is_some_and(|r| r <= crate::scalar::eps() * 10.0)
    }

    /// Largest certificate residual, `None` on shape errors.
    pub fn max_residual(&self) -> Option<f64> {
        let mut worst: f64 = 0.0;
        let pairs = self.network.gates.iter().zip(&self.gate_certs).chain(self.network.cogates.iter().zip(&self.cogate_certs));
        for (n, c) in pairs {
            worst = worst.max(crate::certify::certificate_residual(&n.tensor, c).ok()?);
        }
        Some(worst)
    }

    /// Writes the certificates (and the basis of every edge) back into the network records.
    pub fn to_network(&self) -> Network {
        let mut net = self.network.clone();
        let pairs = net.gates.iter().zip(&self.gate_certs).chain(net.cogates.iter().zip(&self.cogate_certs));
        let mut certs = BTreeMap::new();
        let mut bases = BTreeMap::new();
        for (n, c) in pairs {
            let matrix = c.matrix.with_labels(n.tensor.wires().to_vec());
            certs.insert(n.name.clone(), CertSpec { scale: c.scale.clone(), matrix });
            for (e, b) in n.tensor.wires().iter().zip(&c.bases) {
                if n.tensor.kind() == Kind::Gate {
                    bases.insert(*e, b.clone());
                } else {
                    bases.entry(*e).or_insert_with(|| b.clone());
                }
            }
        }
        net.certificates = certs;
        net.bases = bases;
        net
    }
}

// ---------------------------------------------------------------- brute force

/// Contraction order: BFS over the tensor graph from the lowest-index node of each component.
fn component_orders(net: &Network) -> Vec<Vec<Vertex>> {
    let n = net.vertex_count();
    let mut by_edge: HashMap<EdgeId, Vec<Vertex>> = HashMap::new();
    for (v, node) in net.nodes().enumerate() {
        for &w in node.tensor.wires() {
            by_edge.entry(w).or_default().push(v);
        }
    }
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut order = vec![root];
        let mut q = VecDeque::from([root]);
        while let Some(v) = q.pop_front() {
            for w in net.node(v).tensor.wires() {
                for &u in &by_edge[w] {
                    if !seen[u] {
                        seen[u] = true;
                        order.push(u);
                        q.push_back(u);
                    }
                }
            }
        }
        comps.push(order);
    }
    comps
}

/// Contracts every tensor; dangling wires survive in the result.
pub fn contract_all(net: &Network, work_limit: u64) -> Result<MixedTensor, NetError> {
    let mut total = MixedTensor::scalar(Scalar::one());
    let mut work: u64 = 0;
    for comp in component_orders(net) {
        let mut acc: Option<MixedTensor> = None;
        for v in comp {
            let t = net.node(v).tensor.to_mixed();
            acc = Some(match acc {
                None => t,
                Some(a) => {
                    work = work.saturating_add((a.coeffs.len() as u64).saturating_mul(t.coeffs.len() as u64));
                    if work > work_limit {
                        return Err(NetError::BudgetExceeded(work_limit));
                    }
                    contract_mixed(&a, &t)?
                }
            });
        }
        if let Some(a) = acc {
            total = contract_mixed(&total, &a)?;
        }
    }
    Ok(total)
}

/// val(Γ) by exhaustive contraction; components are evaluated separately and multiplied.
pub fn brute_force_value(net: &Network) -> Result<Scalar, NetError> {
    brute_force_value_limited(net, DEFAULT_WORK_LIMIT)
}

pub fn brute_force_value_limited(net: &Network, work_limit: u64) -> Result<Scalar, NetError> {
    net.validate()?;
    let r = contract_all(net, work_limit)?;
    Ok(r.value().expect("closed network contracts to a scalar"))
}

// ---------------------------------------------------------------- planar order

struct Faces {
    /// Darts `(vertex, rotation index)` per face, in tracing order.
    faces: Vec<Vec<(Vertex, usize)>>,
    outer: usize,
}

fn trace_faces(net: &Network, rs: &RotationSystem) -> Result<Faces, NetError> {
    let ends = net.endpoints();
    let other = |e: EdgeId, v: Vertex| -> Result<Vertex, NetError> {
        match ends.get(&e) {
            Some((Some(g), Some(c))) => Ok(if *g == v { *c } else { *g }),
            _ => Err(NetError::NotBipartite(e)),
        }
    };
    let pos: Vec<HashMap<EdgeId, usize>> =
        rs.rot.iter().map(|r| r.iter().enumerate().map(|(i, &e)| (e, i)).collect()).collect();
    let mut seen: Vec<Vec<bool>> = rs.rot.iter().map(|r| vec![false; r.len()]).collect();
    let mut faces = Vec::new();
    for v in 0..rs.rot.len() {
        for i in 0..rs.rot[v].len() {
            if seen[v][i] {
                continue;
            }
            let mut face = Vec::new();
            let (mut cv, mut ci) = (v, i);
            while !seen[cv][ci] {
                seen[cv][ci] = true;
                face.push((cv, ci));
                let e = rs.rot[cv][ci];
                let w = other(e, cv)?;
                let d = rs.rot[w].len();
                let j = pos[w][&e];
                cv = w;
                ci = (j + d - 1) % d;
            }
            if (cv, ci) != (v, i) {
                return Err(NetError::InvalidEmbedding("face tracing does not close".into()));
            }
            faces.push(face);
        }
    }
    let nv = net.vertex_count() as i64;
    let ne = net.edges.len() as i64;
    if nv - ne + faces.len() as i64 != 2 {
        return Err(NetError::InvalidEmbedding(format!(
            "Euler characteristic {} (V={nv}, E={ne}, F={}); embedding is not planar or network is disconnected",
            nv - ne + faces.len() as i64,
            faces.len()
        )));
    }
    let outer = match rs.outer {
        Some((v, e)) => {
            let i = pos[v][&e];
            faces.iter().position(|f| f.contains(&(v, i))).unwrap()
        }
        None => {
            let best = faces.iter().map(|f| f.len()).max().unwrap_or(0);
            faces.iter().position(|f| f.len() == best).unwrap_or(0)
        }
    };
    Ok(Faces { faces, outer })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Item {
    Edge(EdgeId),
    Attach(usize),
}

struct Chord {
    ends: [Vertex; 2],
}

/// Builds auxiliary chords over gate corners of the chosen faces.
fn add_face_chords(
    faces: &Faces,
    which: &[usize],
    ngates: usize,
    chords: &mut Vec<Chord>,
    corner_items: &mut HashMap<(Vertex, usize), Vec<usize>>,
    adjacency: &mut [Vec<((usize, usize, u8), usize)>],
) {
    for &f in which {
        let gd: Vec<(usize, Vertex, usize)> =
            faces.faces[f].iter().enumerate().filter(|(_, (v, _))| *v < ngates).map(|(t, &(v, c))| (t, v, c)).collect();
        let m = gd.len();
        if m < 2 {
            continue;
        }
        let first = chords.len();
        for t in 0..m {
            let (ta, a, _) = gd[t];
            let (_, b, _) = gd[(t + 1) % m];
            chords.push(Chord { ends: [a, b] });
            adjacency[a].push(((f, ta, 0), first + t));
        }
        for t in 0..m {
            let (tb, b, cb) = gd[t];
            let next = first + t;
            let prev = first + (t + m - 1) % m;
            adjacency[b].push(((f, tb, 1), prev));
            let items = corner_items.entry((b, cb)).or_default();
            items.push(next);
            items.push(prev);
        }
    }
}

/// σ from the planar spanning tree of the auxiliary gate graph (Euler tour, tree on the left).
pub fn planar_spanning_tree_edge_order(net: &Network) -> Result<Vec<EdgeId>, NetError> {
    net.validate()?;
    let rs = net.embedding()?;
    let faces = trace_faces(net, &rs)?;
    let ng = net.gates.len();
    if ng == 0 {
        return Err(NetError::NotTreeConnectable);
    }
    let interior: Vec<usize> = (0..faces.faces.len()).filter(|&f| f != faces.outer).collect();
    let attempt = |include_outer: bool| -> Option<(Vec<Chord>, HashMap<(Vertex, usize), Vec<usize>>, Vec<bool>)> {
        let mut chords = Vec::new();
        let mut corner_items = HashMap::new();
        let mut adjacency: Vec<Vec<((usize, usize, u8), usize)>> = vec![Vec::new(); ng];
        let mut which = interior.clone();
        if include_outer {
            which.push(faces.outer);
        }
        add_face_chords(&faces, &which, ng, &mut chords, &mut corner_items, &mut adjacency);
        for a in adjacency.iter_mut() {
            a.sort_by_key(|x| x.0);
        }
        let mut seen = vec![false; ng];
        let mut tree = vec![false; chords.len()];
        seen[0] = true;
        let mut q = VecDeque::from([0usize]);
        while let Some(v) = q.pop_front() {
            for &(_, k) in &adjacency[v] {
                let c: &Chord = &chords[k];
                let u = if c.ends[0] == v { c.ends[1] } else { c.ends[0] };
                if !seen[u] {
                    seen[u] = true;
                    tree[k] = true;
                    q.push_back(u);
                }
            }
        }
        seen.iter().all(|s| *s).then_some((chords, corner_items, tree))
    };
    let (chords, corner_items, tree) = attempt(false).or_else(|| attempt(true)).ok_or(NetError::NotTreeConnectable)?;

    let items: Vec<Vec<Item>> = (0..ng)
        .map(|v| {
            let mut out = Vec::new();
            for (c, &e) in rs.rot[v].iter().enumerate() {
                out.push(Item::Edge(e));
                if let Some(ks) = corner_items.get(&(v, c)) {
                    out.extend(ks.iter().filter(|&&k| tree[k]).map(|&k| Item::Attach(k)));
                }
            }
            out
        })
        .collect();

    fn walk(v: Vertex, start: usize, count: usize, entry: Option<usize>, items: &[Vec<Item>], chords: &[Chord], out: &mut Vec<EdgeId>) {
        let n = items[v].len();
        for s in 0..count {
            match items[v][(start + s) % n] {
                Item::Edge(e) => out.push(e),
                Item::Attach(k) if Some(k) != entry => {
                    let c = &chords[k];
                    let u = if c.ends[0] == v { c.ends[1] } else { c.ends[0] };
                    let at = items[u].iter().position(|it| *it == Item::Attach(k)).unwrap();
                    let nu = items[u].len();
                    walk(u, (at + 1) % nu, nu - 1, Some(k), items, chords, out);
                }
                Item::Attach(_) => {}
            }
        }
    }
    let mut sigma = Vec::with_capacity(net.edges.len());
    walk(0, 0, items[0].len(), None, &items, &chords, &mut sigma);
    Ok(sigma)
}

// ---------------------------------------------------------------- Pfaffian value

/// Structural check: every edge once, gate blocks pairwise non-crossing, cogate blocks pairwise non-crossing.
pub fn validate_order(net: &Network, sigma: &[EdgeId]) -> Result<(), NetError> {
    let mut pos = HashMap::new();
    for (k, &e) in sigma.iter().enumerate() {
        if pos.insert(e, k).is_some() {
            return Err(NetError::InvalidOrder(format!("edge {e} occurs twice")));
        }
    }
    for &e in &net.edges {
        if !pos.contains_key(&e) {
            return Err(NetError::InvalidOrder(format!("edge {e} is missing")));
        }
    }
    if pos.len() != net.edges.len() {
        return Err(NetError::InvalidOrder("order contains undeclared edges".into()));
    }
    for side in [&net.gates, &net.cogates] {
        let blocks: Vec<Vec<usize>> = side
            .iter()
            .map(|n| {
                let mut p: Vec<usize> = n.tensor.wires().iter().map(|e| pos[e]).collect();
                p.sort_unstable();
                p
            })
            .collect();
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                if crossing(&blocks[i], &blocks[j]) {
                    return Err(NetError::InvalidOrder(format!("blocks of `{}` and `{}` cross", side[i].name, side[j].name)));
                }
            }
        }
    }
    Ok(())
}

/// True when two sorted position sets interleave as a..b..a..b.
fn crossing(a: &[usize], b: &[usize]) -> bool {
    let mut merged: Vec<(usize, u8)> = a.iter().map(|&p| (p, 0)).chain(b.iter().map(|&p| (p, 1))).collect();
    merged.sort_unstable();
    let mut runs: Vec<u8> = Vec::new();
    for (_, s) in merged {
        if runs.last() != Some(&s) {
            runs.push(s);
        }
    }
    runs.len() >= 4
}

/// Sign data `(c, ε)` with `s_ab = c·ε_a·ε_b`, where `s_ab = −1` marks a pair of native positions inverted by `sigma`.
pub fn wire_order_correction(native: &[EdgeId], sigma: &[EdgeId]) -> Option<(i8, Vec<i8>)> {
    let rank: HashMap<EdgeId, usize> = sigma.iter().enumerate().map(|(k, &e)| (e, k)).collect();
    let r: Vec<usize> = native.iter().map(|e| rank.get(e).copied()).collect::<Option<_>>()?;
    let n = r.len();
    let s = |a: usize, b: usize| -> i8 {
        if r[a] < r[b] {
            1
        } else {
            -1
        }
    };
    if n < 2 {
        return Some((1, vec![1; n]));
    }
    for c in [1i8, -1] {
        let mut eps = vec![1i8; n];
        for b in 1..n {
            eps[b] = c * s(0, b);
        }
        let ok = (0..n).all(|a| (a + 1..n).all(|b| s(a, b) == c * eps[a] * eps[b]));
        if ok {
            return Some((c, eps));
        }
    }
    None
}

/// Rescales a block so that its sub-Pfaffians read in σ order equal the native ones.
pub fn corrected_block(m: &SkewMatrix, sigma: &[EdgeId], name: &str) -> Result<SkewMatrix, NetError> {
    let (c, eps) = wire_order_correction(m.labels(), sigma).ok_or_else(|| NetError::UnsupportedWireOrder(name.into()))?;
    let mut out = m.clone();
    for a in 0..m.size() {
        for b in a + 1..m.size() {
            let f = c * eps[a] * eps[b];
            if f < 0 {
                out.set(a, b, -m.get(a, b));
            }
        }
    }
    Ok(out)
}

/// Ξ and Θ laid out in σ (before the sign flip), with the scale product.
pub fn assemble(cn: &CertifiedNetwork, sigma: &[EdgeId]) -> Result<(SkewMatrix, SkewMatrix, Scalar), NetError> {
    let net = &cn.network;
    let mut scale = Scalar::one();
    let mut xi_blocks = Vec::new();
    for (n, c) in net.gates.iter().zip(&cn.gate_certs) {
        xi_blocks.push(corrected_block(&c.matrix.with_labels(n.tensor.wires().to_vec()), sigma, &n.name)?);
        scale = scale * &c.scale;
    }
    let mut theta_blocks = Vec::new();
    for (n, c) in net.cogates.iter().zip(&cn.cogate_certs) {
        theta_blocks.push(corrected_block(&c.matrix.with_labels(n.tensor.wires().to_vec()), sigma, &n.name)?);
        scale = scale * &c.scale;
    }
    let xi = direct_sum_ordered(&xi_blocks, sigma)?;
    let theta = direct_sum_ordered(&theta_blocks, sigma)?;
    Ok((xi, theta, scale))
}

/// `(∏α)(∏β)·Pf(Θ̃ + Ξ)` with Ξ, Θ laid out in σ.
pub fn pfaffian_value(cn: &CertifiedNetwork, sigma: &[EdgeId]) -> Result<Scalar, NetError> {
    let net = &cn.network;
    net.validate()?;
    if net.edges.len() % 2 == 1 {
        return Err(NetError::OddEdgeCount(net.edges.len()));
    }
    validate_order(net, sigma)?;
    let (xi, theta, scale) = assemble(cn, sigma)?;
    let m = sign_flip(&theta).add(&xi)?;
    Ok(scale * pfaffian(&m, PfMethod::Elimination)?)
}

// ---------------------------------------------------------------- file format

fn perr(line: usize, col: usize, msg: impl Into<String>) -> NetError {
    NetError::Parse { line, col, msg: msg.into() }
}

fn parse_edge(tok: &str, line: usize, col: usize) -> Result<EdgeId, NetError> {
    tok.parse::<EdgeId>().ok().filter(|e| *e > 0).ok_or_else(|| perr(line, col, format!("bad edge id `{tok}`")))
}

/// Splits into whitespace tokens with 1-based columns.
fn tokens(s: &str, base: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in s.char_indices() {
        if ch.is_whitespace() {
            if let Some(st) = start.take() {
                out.push((base + st, &s[st..k]));
            }
        } else if start.is_none() {
            start = Some(k);
        }
    }
    if let Some(st) = start {
        out.push((base + st, &s[st..]));
    }
    out
}

/// Parses a bracketed square matrix `[[..],[..]]`.
pub(crate) fn parse_square(src: &str, line: usize, col: usize) -> Result<Vec<Vec<Scalar>>, NetError> {
    let t = src.trim();
    let lead = src.len() - src.trim_start().len();
    let inner = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or_else(|| perr(line, col, "expected `[[...]]`"))?;
    let mut rows = Vec::new();
    let mut depth = 0;
    let mut cur_start = None;
    for (k, ch) in inner.char_indices() {
        match ch {
            '[' => {
                depth += 1;
                cur_start = Some(k + 1);
            }
            ']' => {
                depth -= 1;
                let st = cur_start.take().ok_or_else(|| perr(line, col + lead + 1 + k, "unbalanced `]`"))?;
                let body = &inner[st..k];
                let mut row = Vec::new();
                if !body.trim().is_empty() {
                    let mut off = 0;
                    for cell in body.split(',') {
                        let c0 = col + lead + 1 + st + off;
                        row.push(parse_scalar(cell).map_err(|e| perr(line, c0 + e.col - 1, e.msg))?);
                        off += cell.len() + 1;
                    }
                }
                rows.push(row);
            }
            _ => {}
        }
        if depth < 0 {
            return Err(perr(line, col + lead + 1 + k, "unbalanced brackets"));
        }
    }
    if depth != 0 {
        return Err(perr(line, col, "unbalanced brackets"));
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(perr(line, col, "matrix is not square"));
    }
    Ok(rows)
}

pub fn parse_network(src: &str) -> Result<Network, NetError> {
    let mut net = Network::default();
    let mut edges_declared = false;
    let mut cert_lines: Vec<(usize, usize, String, Scalar, Vec<Vec<Scalar>>)> = Vec::new();
    let lines: Vec<&str> = src.lines().collect();
    let mut ln = 0;
    while ln < lines.len() {
        let lineno = ln + 1;
        let mut text = lines[ln].split('#').next().unwrap().to_string();
        ln += 1;
        // tensor bodies may span lines until the closing brace
        if text.contains('{') && !text.contains('}') {
            while ln < lines.len() && !text.contains('}') {
                text.push(' ');
                text.push_str(lines[ln].split('#').next().unwrap());
                ln += 1;
            }
        }
        let toks = tokens(&text, 1);
        let Some(&(kcol, key)) = toks.first() else { continue };
        match key {
            "edges" => {
                let rest: Vec<(usize, &str)> =
                    toks[1..].iter().map(|&(c, t)| (c, t.trim_matches(|ch| ch == '{' || ch == '}'))).filter(|(_, t)| !t.is_empty()).collect();
                let braced = text.contains('{');
                if rest.is_empty() {
                    return Err(perr(lineno, kcol, "expected edge count or list"));
                }
                net.edges = if rest.len() == 1 && !braced {
                    let n = parse_edge(rest[0].1, lineno, rest[0].0)?;
                    (1..=n).collect()
                } else {
                    rest.iter().map(|&(c, t)| parse_edge(t, lineno, c)).collect::<Result<_, _>>()?
                };
                let mut sorted = net.edges.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != net.edges.len() {
                    return Err(perr(lineno, kcol, "duplicate edge in declaration"));
                }
                net.edges = sorted;
                edges_declared = true;
            }
            "gate" | "cogate" => {
                if toks.len() < 3 || toks[2].1 != "on" {
                    return Err(perr(lineno, kcol, format!("expected `{key} NAME on EDGES {{ ... }}`")));
                }
                let name = toks[1].1.to_string();
                if net.vertex_of(&name).is_some() {
                    return Err(perr(lineno, toks[1].0, format!("duplicate tensor name `{name}`")));
                }
                let open = text.find('{').ok_or_else(|| perr(lineno, kcol, "missing `{`"))?;
                let close = text.rfind('}').ok_or_else(|| perr(lineno, open + 1, "missing `}`"))?;
                let wires: Vec<EdgeId> = toks[3..]
                    .iter()
                    .take_while(|(c, _)| *c <= open)
                    .map(|&(c, t)| parse_edge(t, lineno, c))
                    .collect::<Result<_, _>>()?;
                let body = &text[open + 1..close];
                let t = parse_tensor(body).map_err(|e| match e {
                    TensorError::Parse { col, msg } => perr(lineno, open + 1 + col, msg),
                    other => perr(lineno, open + 2, other.to_string()),
                })?;
                let kind = if key == "gate" { Kind::Gate } else { Kind::Cogate };
                if t.kind() != kind {
                    return Err(perr(lineno, open + 2, format!("{key} body must use {}", if key == "gate" { "kets" } else { "bras" })));
                }
                if t.arity() != wires.len() {
                    return Err(perr(lineno, open + 2, format!("{} wires declared but terms have {} bits", wires.len(), t.arity())));
                }
                let mut uniq = wires.clone();
                uniq.sort_unstable();
                uniq.dedup();
                if uniq.len() != wires.len() {
                    return Err(perr(lineno, kcol, "repeated wire"));
                }
                let node = Node { name, tensor: t.with_wires(wires) };
                if kind == Kind::Gate {
                    net.gates.push(node);
                } else {
                    net.cogates.push(node);
                }
            }
            "rotation" => {
                let name_tok = toks.get(1).ok_or_else(|| perr(lineno, kcol, "expected `rotation NAME: EDGES`"))?;
                let (name, rest_start) = match name_tok.1.strip_suffix(':') {
                    Some(n) => (n.to_string(), 2),
                    None if toks.get(2).map(|t| t.1) == Some(":") => (name_tok.1.to_string(), 3),
                    None => return Err(perr(lineno, name_tok.0, "expected `:` after tensor name")),
                };
                let es = toks[rest_start..].iter().map(|&(c, t)| parse_edge(t, lineno, c)).collect::<Result<_, _>>()?;
                net.rotations.insert(name, es);
            }
            "outer" => {
                if toks.len() != 3 {
                    return Err(perr(lineno, kcol, "expected `outer NAME EDGE`"));
                }
                net.outer = Some((toks[1].1.to_string(), parse_edge(toks[2].1, lineno, toks[2].0)?));
            }
            "order" => {
                net.order = Some(toks[1..].iter().map(|&(c, t)| parse_edge(t, lineno, c)).collect::<Result<_, _>>()?);
            }
            "basis" => {
                let eq = text.find('=').ok_or_else(|| perr(lineno, kcol, "expected `basis EDGE = [[..],[..]]`"))?;
                let et = tokens(&text[..eq], 1);
                if et.len() != 2 {
                    return Err(perr(lineno, kcol, "expected `basis EDGE = [[..],[..]]`"));
                }
                let e = parse_edge(et[1].1, lineno, et[1].0)?;
                let rows = parse_square(&text[eq + 1..], lineno, eq + 2)?;
                if rows.len() != 2 {
                    return Err(perr(lineno, eq + 2, "basis must be 2x2"));
                }
                let [r0, r1]: [Vec<Scalar>; 2] = rows.try_into().unwrap();
                let [a, b]: [Scalar; 2] = r0.try_into().unwrap();
                let [c, d]: [Scalar; 2] = r1.try_into().unwrap();
                net.bases.insert(e, BasisMatrix::new(a, b, c, d));
            }
            "certificate" => {
                if toks.len() < 4 || !matches!(toks[2].1, "alpha" | "beta") {
                    return Err(perr(lineno, kcol, "expected `certificate NAME alpha EXPR xi = [[...]]`"));
                }
                let name = toks[1].1.to_string();
                let mat_kw = toks.iter().skip(3).find(|t| matches!(t.1, "xi" | "theta")).ok_or_else(|| perr(lineno, kcol, "missing `xi =`"))?;
                let expr_start = toks[3].0 - 1;
                let expr_src = &text[expr_start..mat_kw.0 - 1];
                let scale = parse_scalar(expr_src).map_err(|e| perr(lineno, toks[3].0 + e.col - 1, e.msg))?;
                let after = &text[mat_kw.0 - 1 + mat_kw.1.len()..];
                let eq = after.find('=').ok_or_else(|| perr(lineno, mat_kw.0, "missing `=`"))?;
                let base = mat_kw.0 - 1 + mat_kw.1.len() + eq + 1;
                let rows = parse_square(&text[base..], lineno, base + 1)?;
                cert_lines.push((lineno, kcol, name, scale, rows));
            }
            _ => return Err(perr(lineno, kcol, format!("unknown record `{key}`"))),
        }
    }
    if !edges_declared {
        let mut all: Vec<EdgeId> = net.nodes().flat_map(|n| n.tensor.wires().to_vec()).collect();
        all.sort_unstable();
        all.dedup();
        net.edges = all;
    }
    for (lineno, col, name, scale, rows) in cert_lines {
        let v = net.vertex_of(&name).ok_or_else(|| perr(lineno, col, format!("certificate for unknown tensor `{name}`")))?;
        let wires = net.node(v).tensor.wires().to_vec();
        if rows.len() != wires.len() {
            return Err(perr(lineno, col, format!("matrix is {}x{} but `{name}` has {} wires", rows.len(), rows.len(), wires.len())));
        }
        let matrix = SkewMatrix::new(wires, rows).map_err(|e| perr(lineno, col, e.to_string()))?;
        net.certificates.insert(name, CertSpec { scale, matrix });
    }
    for (i, n) in net.nodes().enumerate() {
        for &w in n.tensor.wires() {
            if !net.edges.contains(&w) {
                return Err(NetError::UnknownEdge(w));
            }
        }
        let _ = i;
    }
    for name in net.rotations.keys() {
        if net.vertex_of(name).is_none() {
            return Err(NetError::UnknownTensor(name.clone()));
        }
    }
    Ok(net)
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub(crate) fn matrix_text(m: &SkewMatrix) -> String {
    let rows: Vec<String> =
        m.rows().iter().map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))).collect();
    format!("[{}]", rows.join(", "))
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let contiguous = self.edges.iter().enumerate().all(|(k, &e)| e == k as EdgeId + 1);
        if contiguous {
            writeln!(s, "edges {}", self.edges.len())?;
        } else {
            writeln!(s, "edges {{{}}}", join(&self.edges))?;
        }
        for (key, nodes) in [("gate", &self.gates), ("cogate", &self.cogates)] {
            for n in nodes {
                writeln!(s, "{key} {} on {} {{ {} }}", n.name, join(n.tensor.wires()), n.tensor)?;
            }
        }
        for n in self.nodes() {
            if let Some(r) = self.rotations.get(&n.name) {
                writeln!(s, "rotation {}: {}", n.name, join(r))?;
            }
        }
        if let Some((name, e)) = &self.outer {
            writeln!(s, "outer {name} {e}")?;
        }
        if let Some(o) = &self.order {
            writeln!(s, "order {}", join(o))?;
        }
        for (e, b) in &self.bases {
            writeln!(s, "basis {e} = {b}")?;
        }
        for n in self.nodes() {
            if let Some(c) = self.certificates.get(&n.name) {
                let (kw, mk) = if n.tensor.kind() == Kind::Gate { ("alpha", "xi") } else { ("beta", "theta") };
                writeln!(s, "certificate {} {kw} {} {mk} = {}", n.name, c.scale, matrix_text(&c.matrix))?;
            }
        }
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAIR: &str = "edges 2\ngate G on 1 2 { |00> + |11> }\ncogate C on 1 2 { <00| + <11| }\nrotation G: 1 2\nrotation C: 2 1\n";

    #[test]
    fn pair_value() {
        let net = Network::parse(PAIR).unwrap();
        assert!(brute_force_value(&net).unwrap().approx_eq(&Scalar::from_int(2)));
    }

    #[test]
    fn pair_order_is_rotation() {
        let net = Network::parse(PAIR).unwrap();
        let s = planar_spanning_tree_edge_order(&net).unwrap();
        assert!(s == vec![1, 2] || s == vec![2, 1]);
        validate_order(&net, &s).unwrap();
    }

    #[test]
    fn round_trip() {
        let net = Network::parse(PAIR).unwrap();
        let again = Network::parse(&net.to_string()).unwrap();
        assert_eq!(net, again);
    }

    #[test]
    fn parse_error_position() {
        match Network::parse("edges 2\ngate G on 1 2 { |00> + |1x> }\n") {
            Err(NetError::Parse { line, col, .. }) => assert_eq!((line, col), (2, 25)),
            other => panic!("{other:?}"),
        }
        match Network::parse("edges 2\nwire 1\n") {
            Err(NetError::Parse { line, col, .. }) => assert_eq!((line, col), (2, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn correction_exists_for_dihedral_orders() {
        assert!(wire_order_correction(&[1, 2, 3, 4], &[2, 3, 4, 1]).is_some());
        assert!(wire_order_correction(&[1, 2, 3, 4], &[4, 3, 2, 1]).is_some());
        assert!(wire_order_correction(&[1, 2, 3, 4], &[2, 1, 3, 4]).is_none());
        assert!(wire_order_correction(&[1, 2, 3], &[2, 1, 3]).is_some());
    }

    #[test]
    fn crossing_detection() {
        assert!(crossing(&[0, 2], &[1, 3]));
        assert!(!crossing(&[0, 3], &[1, 2]));
        assert!(!crossing(&[0, 1], &[2, 3]));
    }
}
