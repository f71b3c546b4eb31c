//! Named certificates for the worked constructions, plus the bases they use.

use crate::certify::{find_certificate_given_bases, Certificate};
use crate::expr::parse_scalar;
use crate::network::{CertifiedNetwork, Network};
use crate::pfaffian::SkewMatrix;
use crate::scalar::Scalar;
use crate::tensor::{BasisMatrix, EdgeId, Kind, Tensor};

/// A tensor over wires `1..=n` with a certificate that verifies.
#[derive(Clone, Debug, PartialEq)]
pub struct RegistryEntry {
    pub name: String,
    pub tensor: Tensor,
    pub certificate: Certificate,
}

fn x(src: &str) -> Scalar {
    parse_scalar(src).unwrap_or_else(|e| panic!("registry literal `{src}`: {e}"))
}

fn mat(cells: [&str; 4]) -> BasisMatrix {
    BasisMatrix::new(x(cells[0]), x(cells[1]), x(cells[2]), x(cells[3]))
}

/// Skew matrix over `1..=n` from its upper triangle, row-major.
fn upper(n: usize, cells: &[&str]) -> SkewMatrix {
    let vals: Vec<Scalar> = cells.iter().map(|c| x(c)).collect();
    SkewMatrix::from_upper_rows((1..=n as EdgeId).collect(), &vals)
}

fn uniform(n: usize, v: &str) -> SkewMatrix {
    upper(n, &vec![v; n * (n - 1) / 2])
}

/// `[[1, 1], [1, -1]]`, the homogeneous EQUAL basis.
pub fn hadamard() -> BasisMatrix {
    BasisMatrix::from_ints([[1, 1], [1, -1]])
}

/// `[[1, -1], [1/2, 1/2]]`, the second Boolean-tree basis.
pub fn tree_b() -> BasisMatrix {
    mat(["1", "-1", "1/2", "1/2"])
}

/// Basis of the 2-SAT example, entries in fourth roots of 5.
pub fn two_sat() -> BasisMatrix {
    mat(["(-root4(5)^3+root4(5)^5)/10", "root4(5)^-1", "(-root4(5)^3-root4(5)^5)/10", "root4(5)^-1"])
}

/// Looks up a basis by name: `hadamard`, `tree-b`, `two-sat`, `identity`.
pub fn named_basis(name: &str) -> Option<BasisMatrix> {
    match name {
        "hadamard" => Some(hadamard()),
        "tree-b" => Some(tree_b()),
        "two-sat" => Some(two_sat()),
        "identity" => Some(BasisMatrix::identity()),
        _ => None,
    }
}

fn entry(name: impl Into<String>, tensor: Tensor, bases: Vec<BasisMatrix>, scale: &str, matrix: SkewMatrix) -> RegistryEntry {
    RegistryEntry { name: name.into(), tensor, certificate: Certificate::new(bases, x(scale), matrix) }
}

/// Bases shared by the CNOT and swap constructions.
struct Swap {
    a: BasisMatrix,
    b: BasisMatrix,
    c: BasisMatrix,
    d: BasisMatrix,
    e: BasisMatrix,
    f: BasisMatrix,
    g: BasisMatrix,
    h: BasisMatrix,
    i: BasisMatrix,
    j: BasisMatrix,
}

fn swap_bases() -> Swap {
    Swap {
        a: mat(["1", "1", "-1/2", "1/2"]),
        b: mat(["0", "1", "-1", "0"]),
        c: mat(["1", "1", "-1/2", "1/2"]),
        d: mat(["0", "1/2", "-2", "0"]),
        e: mat(["-2", "2i", "i/4", "-1/4"]),
        f: mat(["(-1+i)/2", "-1/2", "1-i", "-i"]),
        g: mat(["-i/2", "-1/2", "1", "i"]),
        h: mat(["1", "-i", "-i/2", "1/2"]),
        i: mat(["i", "0", "0", "-i"]),
        j: mat(["1", "-1", "1/2", "1/2"]),
    }
}

/// Bases of the EQUAL_4 decomposition, entries in fourth roots of 2.
struct Decomp {
    a: BasisMatrix,
    b: BasisMatrix,
    c: BasisMatrix,
    d: BasisMatrix,
}

fn decomp_bases() -> Decomp {
    Decomp {
        a: mat(["i*root4(2)^3/2", "i*root4(2)^3/2", "i*root4(2)/2", "-i*root4(2)/2"]),
        b: mat(["-root4(2)^3/2", "root4(2)^3/2", "-root4(2)/2", "-root4(2)/2"]),
        c: mat(["-root4(2)^3/2", "-i*root4(2)^3/2", "-i*root4(2)/2", "-root4(2)/2"]),
        d: mat(["root4(2)^3/2", "-i*root4(2)^3/2", "-i*root4(2)/2", "root4(2)/2"]),
    }
}

pub const CNOT1: [&str; 4] = ["0000", "0110", "1011", "1101"];
pub const CNOT12: [&str; 4] = ["0000", "1010", "1101", "0111"];
/// CNOT1 with the roles of the two qubits exchanged.
pub const CNOT2: [&str; 4] = ["0000", "1001", "0111", "1110"];
pub const SWAP: [&str; 4] = ["0000", "0101", "1010", "1111"];
/// Complement-invariant 4-arity gate with no certificate under any registered basis.
pub const COMPLEMENT_FAILURE: [&str; 8] = ["0000", "1000", "0100", "0010", "0111", "1011", "1101", "1111"];

/// Every named certificate; each entry verifies under `check_certificate`.
pub fn registry() -> Vec<RegistryEntry> {
    let (a, b) = (hadamard(), tree_b());
    let eq = |k: Kind, n: usize| Tensor::equal(k, n);
    let mut out = Vec::new();

    let s = two_sat();
    out.push(entry("or-gate-two-sat", Tensor::gate(&["01", "10", "11"]), vec![s.clone(); 2], "1", upper(2, &["-1"])));
    out.push(entry("eq2-cogate-two-sat", eq(Kind::Cogate, 2), vec![s; 2], "sqrt(5)/2-1/2", upper(2, &["sqrt(5)/2+3/2"])));

    for n in 2..=8 {
        out.push(entry(format!("eq{n}-gate-hadamard"), eq(Kind::Gate, n), vec![a.clone(); n], "2", uniform(n, "1")));
        out.push(entry(format!("eq{n}-cogate-tree-b"), eq(Kind::Cogate, n), vec![b.clone(); n], "2", uniform(n, "1/4")));
    }

    out.push(entry("tree-eq2-cogate", eq(Kind::Cogate, 2), vec![a.clone(), a.clone()], "1/2", upper(2, &["1"])));
    out.push(entry("tree-eq3-gate", eq(Kind::Gate, 3), vec![a.clone(), b.clone(), b.clone()], "2", upper(3, &["1/2", "1/2", "1/4"])));
    out.push(entry("tree-eq3-cogate", eq(Kind::Cogate, 3), vec![b.clone(), a.clone(), a.clone()], "1/2", upper(3, &["1/2", "1/2", "1"])));
    out.push(entry("tree-cap-cogate", eq(Kind::Cogate, 1), vec![b.clone()], "2", upper(1, &[])));
    out.push(entry("tree-cap-gate", eq(Kind::Gate, 1), vec![a.clone()], "2", upper(1, &[])));

    for (tname, bits) in [("eq", ["00", "11"]), ("not", ["01", "10"])] {
        for kind in [Kind::Gate, Kind::Cogate] {
            for (bname, m) in [("aa", &a), ("bb", &b)] {
                let t = Tensor::from_bits(kind, &bits);
                let kname = if kind == Kind::Gate { "gate" } else { "cogate" };
                if let Ok(Some(c)) = find_certificate_given_bases(&t, &[m.clone(), m.clone()]) {
                    out.push(RegistryEntry { name: format!("bridge-{tname}-{kname}-{bname}"), tensor: t, certificate: c });
                }
            }
        }
    }

    let d4 = vec![
        mat(["1", "1", "-1/2", "1/2"]),
        mat(["0", "1", "-1", "0"]),
        mat(["1/2", "-i/2", "-i", "1"]),
        mat(["i", "1", "-1/2", "-i/2"]),
    ];
    out.push(entry("cnot1-abcd", Tensor::gate(&CNOT1), d4, "1", upper(4, &["i/2", "-i", "-i/4", "-2", "1/2", "-1"])));

    let w = swap_bases();
    out.push(entry(
        "swap-cnot12-abcd",
        Tensor::gate(&CNOT12),
        vec![w.a, w.b, w.c.clone(), w.d.clone()],
        "1",
        upper(4, &["0", "-1/4", "0", "0", "4", "0"]),
    ));
    out.push(entry(
        "swap-cnot1-ghij",
        Tensor::gate(&CNOT1),
        vec![w.g.clone(), w.h.clone(), w.i, w.j],
        "1",
        upper(4, &["1", "-2", "i", "-1/2", "-i/4", "i/2"]),
    ));
    out.push(entry(
        "swap-top-cogate-deg",
        Tensor::cogate(&["100", "010", "001", "111"]),
        vec![w.d, w.e, w.g],
        "1",
        upper(3, &["-1/2", "8", "-1/4"]),
    ));
    out.push(entry(
        "swap-bottom-cogate-cfh",
        Tensor::cogate(&["000", "010", "101"]),
        vec![w.c, w.f, w.h],
        "1",
        upper(3, &["-i", "i/4", "1"]),
    ));

    let p = decomp_bases();
    out.push(entry("decomp-eq2-cogate", eq(Kind::Cogate, 2), vec![p.a.clone(), p.a.clone()], "-sqrt(2)", upper(2, &["1/2"])));
    out.push(entry("decomp-eq3-gate", eq(Kind::Gate, 3), vec![p.a, p.b.clone(), p.b], "i*root4(2)", uniform(3, "1/2")));
    out.push(entry(
        "decomp-eq4-gate",
        eq(Kind::Gate, 4),
        vec![p.c.clone(), p.d.clone(), p.d, p.c],
        "1",
        upper(4, &["1/2", "1/2", "-1/2", "-1/2", "1/2", "1/2"]),
    ));
    out
}

pub fn lookup(name: &str) -> Option<RegistryEntry> {
    registry().into_iter().find(|e| e.name == name)
}

/// The EQUAL_4 decomposition into two EQUAL_3 gates joined by an EQUAL_2 cogate.
#[derive(Clone, Debug)]
pub struct DecompositionExample {
    pub target: Tensor,
    pub target_cert: Certificate,
    pub fragment: CertifiedNetwork,
    pub sigma: Vec<EdgeId>,
    /// Printed `sPf(Ξ̃_σ)` over the layout `(5, 1, 2, 6, 3, 4)`.
    pub printed_intermediate: Tensor,
}

pub const DECOMPOSITION_INTERMEDIATE: &str = "|000000> + 1/2|110000> - 1/2|101000> + 1/2|011000> + 1/2|000110> - 1/2|000101> \
     + 1/2|000011> + 1/4|110110> - 1/4|110101> + 1/4|110011> - 1/4|101110> + 1/4|101101> - 1/4|101011> \
     + 1/4|011110> - 1/4|011101> + 1/4|011011>";

pub fn decomposition_example() -> DecompositionExample {
    let eq3 = lookup("decomp-eq3-gate").expect("registry entry");
    let eq2 = lookup("decomp-eq2-cogate").expect("registry entry");
    let eq4 = lookup("decomp-eq4-gate").expect("registry entry");
    let mut net = Network::new((1..=6).collect());
    net.add_gate("left", eq3.tensor.with_wires(vec![5, 1, 2]));
    net.add_gate("right", eq3.tensor.with_wires(vec![6, 3, 4]));
    net.add_cogate("join", eq2.tensor.with_wires(vec![5, 6]));
    let cn = CertifiedNetwork {
        network: net,
        gate_certs: vec![eq3.certificate.clone(), eq3.certificate],
        cogate_certs: vec![eq2.certificate],
    };
    let network = cn.to_network();
    let printed = Tensor::parse(DECOMPOSITION_INTERMEDIATE).expect("printed tensor").with_wires(vec![5, 1, 2, 6, 3, 4]);
    DecompositionExample {
        target: eq4.tensor,
        target_cert: eq4.certificate,
        fragment: CertifiedNetwork { network, ..cn },
        sigma: vec![5, 2, 1, 6, 4, 3],
        printed_intermediate: printed,
    }
}
