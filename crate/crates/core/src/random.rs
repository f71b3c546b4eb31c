//! Random certified planar networks assembled from registry blocks.
//!
//! Blocks are glued one at a time onto consecutive open wires of the outer
//! boundary, so the rotation system stays planar by construction. Leftover
//! open wires are sealed with basis-adapted caps (`M^{-1}|0⟩` for gates,
//! `⟨1|M` for cogates), which are Pfaffian with scale 1 under `M`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::certify::Certificate;
use crate::network::{CertifiedNetwork, Network};
use crate::pfaffian::SkewMatrix;
use crate::registry::{registry, RegistryEntry};
use crate::scalar::Scalar;
use crate::tensor::{BasisMatrix, EdgeId, Kind, Tensor};

/// Open wire on the outer boundary: its edge, basis, and the kind that must attach.
#[derive(Clone, Debug)]
struct Stub {
    edge: EdgeId,
    basis: BasisMatrix,
    needs: Kind,
}

/// Gate `M^{-1}|0⟩` or cogate `⟨1|M` with its scale-1 certificate under `M`.
pub fn basis_cap(kind: Kind, m: &BasisMatrix) -> (Tensor, Certificate) {
    let coeffs: Vec<(u64, Scalar)> = match kind {
        Kind::Gate => {
            let inv = m.inverse().expect("invertible basis");
            (0..2).map(|r| (r as u64, inv.get(r, 0).clone())).collect()
        }
        Kind::Cogate => (0..2).map(|c| (c as u64, m.get(1, c).clone())).collect(),
    };
    let t = Tensor::new(kind, vec![1], coeffs);
    (t, Certificate::new(vec![m.clone()], Scalar::one(), SkewMatrix::zero(vec![1])))
}

/// Rotations and reflections of `0..n`; every ordering when `n <= 3`.
fn dihedral(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for s in 0..n.max(1) {
        let fwd: Vec<usize> = (0..n).map(|i| (s + i) % n).collect();
        let mut rev = fwd.clone();
        rev.reverse();
        out.push(fwd);
        out.push(rev);
    }
    out.sort();
    out.dedup();
    out
}

struct Builder {
    net: Network,
    gate_certs: Vec<Certificate>,
    cogate_certs: Vec<Certificate>,
    next: EdgeId,
}

impl Builder {
    /// Places `t` with wires in native order `wires` and the given counterclockwise rotation.
    fn place(&mut self, t: &Tensor, cert: &Certificate, wires: Vec<EdgeId>, rotation: Vec<EdgeId>) {
        let t = t.with_wires(wires);
        let name = match t.kind() {
            Kind::Gate => format!("g{}", self.net.gates.len()),
            Kind::Cogate => format!("c{}", self.net.cogates.len()),
        };
        self.net.rotations.insert(name.clone(), rotation);
        match t.kind() {
            Kind::Gate => {
                self.net.add_gate(&name, t);
                self.gate_certs.push(cert.clone());
            }
            Kind::Cogate => {
                self.net.add_cogate(&name, t);
                self.cogate_certs.push(cert.clone());
            }
        }
    }

    fn fresh(&mut self) -> EdgeId {
        self.next += 1;
        self.next - 1
    }
}

/// Tries to attach `entry` to the ends `ends` (consecutive, counterclockwise along the boundary).
/// Returns the new vertex's open stubs in boundary order.
fn attach<R: Rng>(b: &mut Builder, entry: &RegistryEntry, ends: &[Stub], rng: &mut R) -> Option<Vec<Stub>> {
    let n = entry.tensor.arity();
    let bases = &entry.certificate.bases;
    let mut arrangements = dihedral(n);
    arrangements.shuffle(rng);
    let k = ends.len();
    let arr = arrangements.into_iter().find(|arr| (0..k).all(|i| bases[arr[i]].approx_eq(&ends[k - 1 - i].basis)))?;
    let mut wires = vec![0; n];
    let mut rotation = Vec::with_capacity(n);
    let mut stubs = Vec::new();
    for (i, &p) in arr.iter().enumerate() {
        let e = if i < k {
            ends[k - 1 - i].edge
        } else {
            let e = b.fresh();
            stubs.push(Stub { edge: e, basis: bases[p].clone(), needs: entry.tensor.kind().opposite() });
            e
        };
        wires[p] = e;
        rotation.push(e);
    }
    b.place(&entry.tensor, &entry.certificate, wires, rotation);
    Some(stubs)
}

/// Random certified planar network with an even number of edges, at most `max_edges`.
pub fn random_certified_network<R: Rng>(rng: &mut R, max_edges: usize) -> CertifiedNetwork {
    let blocks: Vec<RegistryEntry> = registry().into_iter().filter(|e| e.tensor.arity() <= 4).collect();
    let seeds: Vec<&RegistryEntry> = blocks.iter().filter(|e| e.tensor.arity() >= 2 && e.tensor.arity() <= max_edges).collect();
    loop {
        let mut b = Builder { net: Network::default(), gate_certs: Vec::new(), cogate_certs: Vec::new(), next: 1 };
        let seed = *seeds.choose(rng).expect("seed block");
        let mut boundary = attach(&mut b, seed, &[], rng).expect("seed placement");
        let steps = rng.gen_range(2..16);
        for _ in 0..steps {
            if boundary.is_empty() {
                break;
            }
            let start = rng.gen_range(0..boundary.len());
            boundary.rotate_left(start);
            let k = if boundary.len() >= 2 && boundary[0].needs == boundary[1].needs && rng.gen_bool(0.5) { 2 } else { 1 };
            let used = b.next as usize - 1;
            let fits: Vec<&RegistryEntry> = blocks
                .iter()
                .filter(|e| e.tensor.kind() == boundary[0].needs && e.tensor.arity() >= k && used + e.tensor.arity() - k <= max_edges)
                .collect();
            let Some(entry) = fits.choose(rng) else { continue };
            let ends: Vec<Stub> = boundary[..k].to_vec();
            if let Some(stubs) = attach(&mut b, entry, &ends, rng) {
                boundary.splice(..k, stubs);
            }
        }
        for s in &boundary {
            let (t, c) = basis_cap(s.needs, &s.basis);
            b.place(&t, &c, vec![s.edge], vec![s.edge]);
        }
        let edges = b.next as usize - 1;
        if edges % 2 == 1 || edges < 2 {
            continue;
        }
        b.net.edges = (1..b.next).collect();
        let cn = CertifiedNetwork { network: b.net, gate_certs: b.gate_certs, cogate_certs: b.cogate_certs };
        let network = cn.to_network();
        return CertifiedNetwork { network, ..cn };
    }
}
