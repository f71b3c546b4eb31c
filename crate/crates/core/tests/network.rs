use pfk_core::network::*;
use pfk_core::pfaffian::{pfaffian, sign_flip, PfMethod};
use pfk_core::random::random_certified_network;
use pfk_core::scalar::Scalar;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TWO_SAT: &str = include_str!("../../cli/examples/two_sat.net");

const TANGLED: &str = "\
edges 6
gate G1 on 4 5 6 { |000> + |111> }
gate G2 on 1 2 3 { |101> + |011> + |111> }
cogate C1 on 3 6 { <01| + <10| }
cogate C2 on 2 5 { <01| + <10| }
cogate C3 on 1 4 { <11| }
";

fn close(a: &Scalar, b: f64, tol: f64) -> bool {
    (a.to_complex() - num_complex::Complex64::new(b, 0.0)).norm() <= tol
}

#[test]
fn two_sat_brute_force_counts_four() {
    let net = Network::parse(TWO_SAT).unwrap();
    let v = brute_force_value(&net).unwrap();
    assert!(close(&v, 4.0, 1e-9), "{v}");
}

#[test]
fn two_sat_pfaffian_matches_printed_values() {
    let net = Network::parse(TWO_SAT).unwrap();
    let cn = net.certified().unwrap();
    assert!(cn.verify());
    let sigma: Vec<u32> = (1..=6).collect();
    let (xi, theta, scale) = assemble(&cn, &sigma).unwrap();
    let pf = pfaffian(&sign_flip(&theta).add(&xi).unwrap(), PfMethod::Elimination).unwrap();
    assert!(close(&pf, 8.0 + 4.0 * 5f64.sqrt(), 1e-9), "{pf}");
    let beta = 5f64.sqrt() / 2.0 - 0.5;
    assert!(close(&scale, beta.powi(3), 1e-9));
    assert!(close(&pfaffian_value(&cn, &sigma).unwrap(), 4.0, 1e-9));
}

#[test]
fn two_sat_planar_order_is_valid() {
    let net = Network::parse(TWO_SAT).unwrap();
    let sigma = planar_spanning_tree_edge_order(&net).unwrap();
    validate_order(&net, &sigma).unwrap();
    let v = pfaffian_value(&net.certified().unwrap(), &sigma).unwrap();
    assert!(close(&v, 4.0, 1e-9));
}

#[test]
fn tangled_network_has_value_zero() {
    let net = Network::parse(TANGLED).unwrap();
    assert!(brute_force_value(&net).unwrap().is_zero());
}

#[test]
fn single_pair_counts_matching_terms() {
    let net = Network::parse("edges 2\ngate G on 1 2 { |00> + |11> }\ncogate C on 1 2 { <00| + <11| }\n").unwrap();
    assert!(close(&brute_force_value(&net).unwrap(), 2.0, 0.0));
}

#[test]
fn odd_edge_count_rejected() {
    let src = "edges 1\ngate G on 1 { |0> + |1> }\ncogate C on 1 { <1| }\nbasis 1 = [[1, 0], [0, 1]]\n\
               certificate G alpha 1 xi = [[0]]\ncertificate C beta 1 theta = [[0]]\n";
    let net = Network::parse(src).unwrap();
    let cn = net.certified().unwrap();
    assert_eq!(pfaffian_value(&cn, &[1]), Err(NetError::OddEdgeCount(1)));
}

#[test]
fn order_rejects_repeats_and_crossings() {
    let net = Network::parse(TWO_SAT).unwrap();
    assert!(validate_order(&net, &[1, 2, 3, 4, 5]).is_err());
    assert!(validate_order(&net, &[1, 1, 2, 3, 4, 5]).is_err());
    let bad = Network::parse(
        "edges 4\ngate G on 1 2 { |00> + |11> }\ngate H on 3 4 { |00> + |11> }\n\
         cogate C on 1 3 { <00| + <11| }\ncogate D on 2 4 { <00| + <11| }\n",
    )
    .unwrap();
    assert!(validate_order(&bad, &[1, 3, 2, 4]).is_err());
    assert!(validate_order(&bad, &[1, 2, 4, 3]).is_ok());
}

#[test]
fn corpus_files_round_trip() {
    for src in [TWO_SAT, TANGLED] {
        let net = Network::parse(src).unwrap();
        let again = Network::parse(&net.to_string()).unwrap();
        assert_eq!(net, again);
    }
}

#[test]
fn certified_networks_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let cn = random_certified_network(&mut rng, 10);
        let text = cn.network.to_string();
        let back = Network::parse(&text).unwrap();
        assert_eq!(back, cn.network);
        assert!(back.certified().unwrap().verify());
    }
}

#[test]
fn budget_exceeded_is_reported() {
    let net = Network::parse(TWO_SAT).unwrap();
    assert!(matches!(brute_force_value_limited(&net, 1), Err(NetError::BudgetExceeded(1))));
}

#[test]
fn random_networks_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..60 {
        let cn = random_certified_network(&mut rng, 12);
        let net = &cn.network;
        let bf = brute_force_value(net).unwrap();
        let tol = 1e-6 * bf.abs().max(1.0);
        let sigma = planar_spanning_tree_edge_order(net).unwrap();
        let pv = pfaffian_value(&cn, &sigma).unwrap();
        assert!(pv.dist(&bf) <= tol, "{pv} vs {bf}\n{net}");
        let mut shuffled = net.edges.clone();
        for _ in 0..20 {
            shuffled.shuffle(&mut rng);
            if validate_order(net, &shuffled).is_err() {
                continue;
            }
            match pfaffian_value(&cn, &shuffled) {
                Ok(v) => assert!(v.dist(&bf) <= tol, "{v} vs {bf} at {shuffled:?}\n{net}"),
                Err(NetError::UnsupportedWireOrder(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn value_is_invariant_under_edge_basis_changes() {
    use pfk_core::tensor::BasisMatrix;
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let mut net = random_certified_network(&mut rng, 10).network;
        let before = brute_force_value(&net).unwrap();
        let bases: std::collections::HashMap<u32, BasisMatrix> = net
            .edges
            .iter()
            .map(|&e| {
                let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
                let v = if (v[0] * v[3] - v[1] * v[2]).abs() < 0.2 { [1.0, v[1], 0.0, 1.0] } else { v };
                (e, BasisMatrix::new(Scalar::float(v[0], 0.0), Scalar::float(v[1], 0.0), Scalar::float(v[2], 0.0), Scalar::float(v[3], 0.0)))
            })
            .collect();
        for n in net.gates.iter_mut() {
            let ms: Vec<BasisMatrix> = n.tensor.wires().iter().map(|e| bases[e].clone()).collect();
            n.tensor = n.tensor.apply_basis_change(&ms).unwrap();
        }
        for n in net.cogates.iter_mut() {
            let ms: Vec<BasisMatrix> = n.tensor.wires().iter().map(|e| bases[e].clone()).collect();
            n.tensor = n.tensor.apply_inverse_basis_change(&ms).unwrap();
        }
        let after = brute_force_value(&net).unwrap();
        assert!(after.dist(&before) <= 1e-8 * before.abs().max(1.0), "{before} vs {after}");
    }
}
