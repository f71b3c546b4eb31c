use std::collections::BTreeSet;

use pfk_core::certify::*;
use pfk_core::exec::Exec;
use pfk_core::network::{brute_force_value, pfaffian_value, CertifiedNetwork, Network};
use pfk_core::pfaffian::{sub_pfaffian, SkewMatrix};
use pfk_core::random::basis_cap;
use pfk_core::registry::*;
use pfk_core::scalar::Scalar;
use pfk_core::tensor::{contract, mask_to_bits, BasisMatrix, Contraction, EdgeId, Kind, Mask, Tensor};
use proptest::prelude::*;

fn support_key(t: &Tensor) -> String {
    let mut bits: Vec<String> = t.support().into_iter().map(|m| mask_to_bits(m, t.arity())).collect();
    bits.sort();
    bits.join(" ")
}

fn appendix() -> BTreeSet<String> {
    include_str!("data/appendix_a.txt")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let terms: Vec<&str> = l.split('+').map(|k| k.trim().trim_start_matches('|').trim_end_matches('>')).collect();
            support_key(&Tensor::gate(&terms))
        })
        .collect()
}

#[test]
fn registry_certificates_verify() {
    for e in registry() {
        let r = certificate_residual(&e.tensor, &e.certificate).unwrap();
        assert!(r < 1e-9, "{} residual {r:e}", e.name);
    }
}

#[test]
fn reference_suite_passes() {
    for r in run_reference_suite() {
        assert!(r.pass, "{r}");
    }
}

#[test]
fn or_gate_fails_under_identity() {
    let or = Tensor::gate(&["01", "10", "11"]);
    let c = Certificate::new(vec![BasisMatrix::identity(); 2], Scalar::one(), SkewMatrix::from_upper(vec![1, 2], &[(0, 1, Scalar::one())]));
    assert!(!check_certificate(&or, &c).unwrap());
    assert!(find_certificate_given_bases(&or, &[BasisMatrix::identity(), BasisMatrix::identity()]).unwrap().is_none());
}

#[test]
fn eq3_gate_certificate_recovered_under_tree_bases() {
    let (a, b) = (hadamard(), tree_b());
    let c = find_certificate_given_bases(&Tensor::equal(Kind::Gate, 3), &[a, b.clone(), b]).unwrap().unwrap();
    assert!(c.scale.approx_eq(&Scalar::from_int(2)));
    let h = Scalar::ratio(1, 2);
    let want = SkewMatrix::from_upper(vec![1, 2, 3], &[(0, 1, h.clone()), (0, 2, h), (1, 2, Scalar::ratio(1, 4))]);
    assert!(c.matrix.approx_eq(&want));
}

#[test]
fn unit_gate_has_trivial_certificate() {
    let t = Tensor::gate(&["0000"]);
    let c = find_certificate_given_bases(&t, &vec![BasisMatrix::identity(); 4]).unwrap().unwrap();
    assert!(c.scale.is_one());
    assert!(c.matrix.approx_eq(&SkewMatrix::zero(vec![1, 2, 3, 4])));
}

#[test]
fn swap_is_not_pfaffian_under_identity() {
    assert!(find_certificate_given_bases(&Tensor::gate(&SWAP), &vec![BasisMatrix::identity(); 4]).unwrap().is_none());
}

#[test]
fn arity_mismatch_reported() {
    let r = find_certificate_given_bases(&Tensor::equal(Kind::Gate, 3), &[hadamard()]);
    assert_eq!(r.unwrap_err(), CertError::ArityMismatch { expected: 3, found: 1 });
}

#[test]
fn census_matches_listed_gates() {
    let listed: [&[&[&str]]; 3] = [
        &[&["0", "1"]],
        &[&["00", "11"], &["10", "01"], &["00", "10", "01", "11"]],
        &[
            &["000", "111"],
            &["100", "011"],
            &["010", "101"],
            &["001", "110"],
            &["000", "100", "011", "111"],
            &["000", "010", "101", "111"],
            &["000", "001", "110", "111"],
            &["100", "010", "101", "011"],
            &["100", "001", "110", "011"],
            &["010", "001", "110", "101"],
            &["000", "100", "010", "101", "011", "111"],
            &["000", "100", "001", "110", "011", "111"],
            &["000", "010", "001", "110", "101", "111"],
            &["100", "010", "001", "110", "101", "011"],
            &["000", "100", "010", "001", "110", "101", "011", "111"],
        ],
    ];
    for (k, list) in listed.iter().enumerate() {
        let n = k + 1;
        let found = census_under_fixed_bases(n, Kind::Gate, &vec![hadamard(); n], Exec::default()).unwrap();
        let got: BTreeSet<String> = found.iter().map(|e| support_key(&e.tensor)).collect();
        let want: BTreeSet<String> = list.iter().map(|ts| support_key(&Tensor::gate(ts))).collect();
        assert_eq!(got, want, "arity {n}");
    }
}

#[test]
fn census_arity_four_matches_appendix() {
    let found = census_under_fixed_bases(4, Kind::Gate, &vec![hadamard(); 4], Exec::default()).unwrap();
    let got: BTreeSet<String> = found.iter().map(|e| support_key(&e.tensor)).collect();
    let want = appendix();
    assert_eq!(want.len(), 117);
    assert_eq!(got, want);
}

#[test]
fn census_is_sequentially_reproducible() {
    let bases = vec![hadamard(); 3];
    let par = census_under_fixed_bases(3, Kind::Gate, &bases, Exec::Parallel).unwrap();
    let seq = census_under_fixed_bases(3, Kind::Gate, &bases, Exec::Sequential).unwrap();
    assert_eq!(par, seq);
}

#[test]
fn census_size_limit() {
    let r = census_under_fixed_bases(5, Kind::Gate, &vec![hadamard(); 5], Exec::Sequential);
    assert_eq!(r.unwrap_err(), CertError::SizeLimit { arity: 5, limit: CENSUS_MAX_ARITY });
}

/// Census gate sealed by `⟨1|A` caps, padded with one capped edge when the arity is odd.
fn closure(entry: &CensusEntry, a: &BasisMatrix) -> CertifiedNetwork {
    let n = entry.tensor.arity() as EdgeId;
    let mut net = Network::default();
    let mut gate_certs = vec![entry.certificate.clone()];
    let mut cogate_certs = Vec::new();
    net.add_gate("g", entry.tensor.clone());
    let (cap, cap_cert) = basis_cap(Kind::Cogate, a);
    for w in 1..=n {
        net.add_cogate(&format!("c{w}"), cap.with_wires(vec![w]));
        cogate_certs.push(cap_cert.clone());
    }
    let mut edges: Vec<EdgeId> = (1..=n).collect();
    if n % 2 == 1 {
        let (pad, pad_cert) = basis_cap(Kind::Gate, a);
        net.add_gate("pad", pad.with_wires(vec![n + 1]));
        gate_certs.push(pad_cert);
        net.add_cogate("padc", cap.with_wires(vec![n + 1]));
        cogate_certs.push(cap_cert.clone());
        edges.push(n + 1);
    }
    net.edges = edges;
    CertifiedNetwork { network: net, gate_certs, cogate_certs }
}

#[test]
fn census_members_are_complement_invariant_and_evaluate() {
    let a = hadamard();
    for n in 1..=4 {
        for kind in [Kind::Gate, Kind::Cogate] {
            for e in census_under_fixed_bases(n, kind, &vec![a.clone(); n], Exec::default()).unwrap() {
                assert!(e.tensor.complement_invariant(), "{}", e.tensor);
                assert!(check_certificate(&e.tensor, &e.certificate).unwrap());
                if kind == Kind::Gate {
                    let cn = closure(&e, &a);
                    let bf = brute_force_value(&cn.network).unwrap();
                    let pv = pfaffian_value(&cn, &cn.network.edges.clone()).unwrap();
                    assert!(pv.dist(&bf) <= 1e-9 * bf.abs().max(1.0), "{}: {pv} vs {bf}", e.tensor);
                }
            }
        }
    }
}

#[test]
fn census_cogate_counts_under_hadamard() {
    let counts: Vec<usize> =
        (1..=4).map(|n| census_under_fixed_bases(n, Kind::Cogate, &vec![hadamard(); n], Exec::default()).unwrap().len()).collect();
    assert_eq!(counts, vec![0, 2, 0, 64]);
}

#[test]
fn complement_failure_gate_has_no_registered_certificate() {
    let g = Tensor::gate(&COMPLEMENT_FAILURE);
    assert!(g.complement_invariant());
    let mut tuples: Vec<Vec<BasisMatrix>> = Vec::new();
    let mut singles: Vec<BasisMatrix> = Vec::new();
    for e in registry() {
        if e.certificate.arity() == 4 {
            tuples.push(e.certificate.bases.clone());
        }
        for b in &e.certificate.bases {
            if !singles.iter().any(|s| s.approx_eq(b)) {
                singles.push(b.clone());
            }
        }
    }
    let d = decomposition_example();
    tuples.push(d.target_cert.bases.clone());
    tuples.extend(singles.iter().map(|b| vec![b.clone(); 4]));
    assert!(tuples.len() > 10);
    for bases in tuples {
        assert!(find_certificate_given_bases(&g, &bases).unwrap().is_none());
    }
}

#[test]
fn equal_six_matches_general_form() {
    let e = lookup("eq6-gate-hadamard").unwrap();
    let lhs = sub_pfaffian(&e.certificate.matrix).unwrap();
    let rhs = Tensor::equal(Kind::Gate, 6).apply_basis_change(&vec![hadamard(); 6]).unwrap().scale(&Scalar::ratio(1, 2));
    assert!(lhs.approx_eq(&rhs));
}

#[test]
fn certificate_text_round_trips() {
    for e in registry() {
        let text = e.certificate.to_string();
        let back = Certificate::parse(&text).unwrap();
        assert!(check_certificate(&e.tensor, &back).unwrap(), "{}\n{text}", e.name);
    }
}

#[test]
fn certificate_parse_errors_carry_lines() {
    let r = Certificate::parse("basis [[1, 0], [0, 1]]\nscale 1\nmatrix [[0, 1], [-1, 0]]\n");
    assert!(matches!(r, Err(CertError::ArityMismatch { expected: 1, found: 2 })));
    let r = Certificate::parse("basis [[1, 0], [0, 1]]\nscalar 1\n");
    assert!(matches!(r, Err(CertError::Parse { line: 2, .. })));
}

#[test]
fn single_leaf_tree_is_a_plus_cogate() {
    let tree = build_boolean_tree(1);
    assert!(tree.verify());
    let t = fragment_tensor(&tree.network).unwrap();
    let want = Tensor::cogate(&["0", "1"]).with_wires(t.wires().to_vec());
    assert!(t.approx_eq(&want), "{t}");
}

#[test]
fn two_leaf_tree_pairs_with_equal_gate() {
    let tree = build_boolean_tree(2);
    assert!(tree.verify());
    let t = fragment_tensor(&tree.network).unwrap();
    let eq = Tensor::equal(Kind::Gate, 2).with_wires(t.wires().to_vec());
    match contract(&t, &eq).unwrap() {
        Contraction::Scalar(s) => assert!(s.approx_eq(&Scalar::from_int(2))),
        Contraction::Tensor(t) => panic!("{t}"),
    }
}

#[test]
fn five_leaf_tree_is_an_equal_cogate() {
    let tree = build_boolean_tree(5);
    assert!(tree.verify());
    assert_eq!(tree.network.dangling().len(), 5);
    let t = fragment_tensor(&tree.network).unwrap();
    assert!(t.approx_eq(&Tensor::equal(Kind::Cogate, 5).with_wires(t.wires().to_vec())));
}

#[test]
fn decomposition_reproduces_printed_intermediate() {
    let d = decomposition_example();
    let rep = check_decomposition(&d.target, &d.target_cert, &d.fragment, &d.sigma, FlipRule::Checkerboard).unwrap();
    assert!(rep.holds, "residual {}", rep.residual);
    assert!(rep.intermediate.max_residual(&d.printed_intermediate) < 1e-9);
}

#[test]
fn perturbed_basis_breaks_decomposition() {
    let d = decomposition_example();
    let mut cert = d.target_cert.clone();
    let b = &cert.bases[0];
    cert.bases[0] = BasisMatrix::new(b.get(0, 0).clone() + Scalar::ratio(1, 10), b.get(0, 1).clone(), b.get(1, 0).clone(), b.get(1, 1).clone());
    let rep = check_decomposition(&d.target, &cert, &d.fragment, &d.sigma, FlipRule::Checkerboard).unwrap();
    assert!(!rep.holds);
    let mut fragment = d.fragment.clone();
    let b = &fragment.gate_certs[0].bases[1];
    fragment.gate_certs[0].bases[1] = BasisMatrix::new(b.get(0, 0).clone() + Scalar::ratio(1, 10), b.get(0, 1).clone(), b.get(1, 0).clone(), b.get(1, 1).clone());
    let rep = check_decomposition(&d.target, &d.target_cert, &fragment, &d.sigma, FlipRule::Checkerboard).unwrap();
    assert!(!rep.holds);
}

#[test]
fn single_gate_decomposes_into_itself() {
    for name in ["eq3-gate-hadamard", "tree-eq3-gate", "cnot1-abcd", "eq4-gate-hadamard"] {
        let e = lookup(name).unwrap();
        let mut net = Network::default();
        net.add_gate("g", e.tensor.clone());
        net.edges = e.tensor.wires().to_vec();
        let fragment = CertifiedNetwork { network: net, gate_certs: vec![e.certificate.clone()], cogate_certs: vec![] };
        for rule in [FlipRule::Checkerboard, FlipRule::Exact] {
            let rep = check_decomposition(&e.tensor, &e.certificate, &fragment, e.tensor.wires(), rule).unwrap();
            assert!(rep.holds, "{name} {rule:?} residual {}", rep.residual);
        }
    }
}

#[test]
fn exact_rule_agrees_with_brute_force() {
    let d = decomposition_example();
    let rep = check_decomposition(&d.target, &d.target_cert, &d.fragment, &d.sigma, FlipRule::Exact).unwrap();
    let net = &d.fragment.network;
    let raw = fragment_tensor(net).unwrap().reorder(d.target.wires()).unwrap();
    let bases: Vec<BasisMatrix> = d
        .target
        .wires()
        .iter()
        .map(|w| {
            let (g, c) = net.gates.iter().zip(&d.fragment.gate_certs).find(|(g, _)| g.tensor.wires().contains(w)).unwrap();
            c.bases[g.tensor.position_of(*w).unwrap()].clone()
        })
        .collect();
    let oracle = raw.apply_basis_change(&bases).unwrap();
    assert!(rep.contraction.max_residual(&oracle) < 1e-9, "{}", rep.contraction.max_residual(&oracle));
}

#[test]
fn decomposition_wire_mismatch() {
    let d = decomposition_example();
    let target = d.target.with_wires(vec![1, 2, 3, 9]);
    let r = check_decomposition(&target, &d.target_cert, &d.fragment, &d.sigma, FlipRule::Checkerboard);
    assert!(matches!(r, Err(CertError::WireMismatch { .. })));
}

fn bases_strategy(n: usize) -> impl Strategy<Value = Vec<BasisMatrix>> {
    let pool = vec![hadamard(), tree_b(), BasisMatrix::identity(), BasisMatrix::from_ints([[1, 2], [0, 1]]), BasisMatrix::from_ints([[0, 1], [1, 1]])];
    prop::collection::vec(prop::sample::select(pool), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn find_agrees_with_forced_matrix(n in 1usize..=4, table in any::<u16>(), cogate in any::<bool>(), bases in bases_strategy(4)) {
        let kind = if cogate { Kind::Cogate } else { Kind::Gate };
        let dim = 1u64 << n;
        let terms = (0..dim).filter(|m| table >> m & 1 == 1).map(|m| (m as Mask, Scalar::one()));
        let t = Tensor::new(kind, (1..=n as EdgeId).collect(), terms);
        let bases = &bases[..n];
        let found = find_certificate_given_bases(&t, bases).unwrap();
        let (tp, flip) = match kind {
            Kind::Gate => (t.apply_basis_change(bases).unwrap(), 0),
            Kind::Cogate => (t.apply_inverse_basis_change(bases).unwrap(), dim - 1),
        };
        let scale = tp.coeff(flip);
        let forced = if scale.is_zero() {
            None
        } else {
            let mut entries = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    entries.push((i, j, tp.coeff((1 << i | 1 << j) ^ flip) / &scale));
                }
            }
            Some(Certificate::new(bases.to_vec(), scale, SkewMatrix::from_upper(t.wires().to_vec(), &entries)))
        };
        let forced_ok = forced.as_ref().is_some_and(|c| check_certificate(&t, c).unwrap());
        prop_assert_eq!(found.is_some(), forced_ok);
        if let Some(c) = found {
            prop_assert!(check_certificate(&t, &c).unwrap());
        }
    }
}
