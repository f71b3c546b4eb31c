use num_traits::Zero;
use pfk_core::polysys::*;
use pfk_core::registry::{hadamard, registry, tree_b, CNOT1};
use pfk_core::tensor::{BasisMatrix, Kind, Tensor};
use pfk_groebner::{GbConfig, GenTag, MonomialOrder, PolySystem, Rational};
use proptest::prelude::*;

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn gb_trivial(sys: &PolySystem) -> bool {
    sys.groebner(&GbConfig::new(MonomialOrder::Degrevlex)).unwrap().0.is_trivial()
}

#[test]
fn generator_counts_per_arity() {
    for n in 1..=6 {
        let t = Tensor::equal(Kind::Gate, n);
        let consistency: usize = (4..=n).step_by(2).map(|k| binom(n, k)).sum();
        for (mode, w) in [(Mode::Homogeneous, 1), (Mode::Heterogeneous, n)] {
            let sys = gate_ideal(&t, mode, &IdealOptions::default()).unwrap();
            assert_eq!(sys.count(GenTag::Parity), 1 << (n - 1), "n={n}");
            assert_eq!(sys.count(GenTag::Consistency), consistency, "n={n}");
            assert_eq!(sys.count(GenTag::Empty), 1);
            assert_eq!(sys.count(GenTag::Inversion), 1 + 2 * w, "n={n} {mode:?}");
            assert_eq!(sys.nvars(), 6 * w + 2);
        }
    }
}

#[test]
fn fixed_bases_remove_their_unknowns() {
    let mut opts = IdealOptions::reduced();
    opts.fixed.insert(1, hadamard());
    opts.fixed.insert(2, tree_b());
    let sys = gate_ideal(&Tensor::gate(&["000", "110", "111"]), Mode::Heterogeneous, &opts).unwrap();
    assert!(sys.vars.iter().all(|v| !v.starts_with("a1_") && !v.starts_with("a2_")));
    assert!(sys.vars.iter().any(|v| v == "a3_00"));
}

#[test]
fn registry_witnesses_satisfy_their_systems() {
    let mut checked = 0;
    for e in registry() {
        let Some(scale) = e.certificate.scale.as_rational() else { continue };
        let bases = &e.certificate.bases;
        let homogeneous = bases.iter().all(|b| b.approx_eq(&bases[0]));
        for mode in [Mode::Heterogeneous, Mode::Homogeneous] {
            if mode == Mode::Homogeneous && !homogeneous {
                continue;
            }
            for opts in [IdealOptions::default(), IdealOptions::reduced()] {
                let Ok(sys) = gate_ideal(&e.tensor, mode, &opts) else { continue };
                let Some(point) = witness(&sys, &e.tensor, mode, bases, &scale) else { continue };
                for g in &sys.gens {
                    assert!(g.poly.eval(&point).is_zero(), "{} {mode:?} {} generator", e.name, g.tag);
                }
                checked += 1;
            }
        }
    }
    assert!(checked >= 20, "only {checked} rational registry systems");
}

#[test]
fn witness_of_wrong_basis_fails() {
    let t = Tensor::equal(Kind::Gate, 3);
    let sys = gate_ideal(&t, Mode::Homogeneous, &IdealOptions::default()).unwrap();
    let point = witness(&sys, &t, Mode::Homogeneous, &vec![tree_b(); 3], &Rational::from_integer(2.into())).unwrap();
    assert!(sys.gens.iter().any(|g| !g.poly.eval(&point).is_zero()));
}

fn rational_basis() -> impl Strategy<Value = [[i64; 2]; 2]> {
    prop::array::uniform4(-4i64..=4).prop_filter("invertible", |v| v[0] * v[3] - v[1] * v[2] != 0).prop_map(|v| [[v[0], v[1]], [v[2], v[3]]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linkage_vanishes_on_true_inverses(m in rational_basis(), n in rational_basis()) {
        let parts = vec![
            (Tensor::equal(Kind::Gate, 2), vec![1, 2]),
            (Tensor::equal(Kind::Cogate, 2), vec![1, 2]),
        ];
        let sys = circuit_ideal(&parts, &IdealOptions::default()).unwrap();
        prop_assert_eq!(sys.count(GenTag::Linkage), 8);
        let mut point = vec![Rational::zero(); sys.nvars()];
        for (k, mat) in [(1, m), (2, n)] {
            let a = BasisMatrix::from_ints(mat);
            let inv = a.inverse().unwrap();
            for r in 0..2 {
                for c in 0..2 {
                    point[sys.var_index(&format!("a{k}_{r}{c}")).unwrap()] = a.get(r, c).as_rational().unwrap();
                    point[sys.var_index(&format!("b{k}_{r}{c}")).unwrap()] = inv.get(r, c).as_rational().unwrap();
                }
            }
        }
        for g in sys.gens.iter().filter(|g| g.tag == GenTag::Linkage) {
            prop_assert!(g.poly.eval(&point).is_zero());
        }
    }
}

#[test]
fn cogate_only_indices_get_their_own_determinant() {
    let parts = vec![(Tensor::equal(Kind::Gate, 2), vec![1, 2]), (Tensor::equal(Kind::Cogate, 2), vec![2, 3])];
    let sys = circuit_ideal(&parts, &IdealOptions::default()).unwrap();
    assert!(sys.var_index("dB3").is_some());
    assert!(sys.var_index("dB2").is_none());
    assert_eq!(sys.count(GenTag::Linkage), 4);
}

#[test]
fn or_gate_singular_export() {
    let or = Tensor::gate(&["01", "10", "11"]);
    let sys = gate_ideal(&or, Mode::Heterogeneous, &IdealOptions::default()).unwrap();
    let text = sys.to_singular();
    let ring = text.lines().next().unwrap();
    assert!(ring.starts_with("ring r = 0, (a1_00, a1_01, a1_10, a1_11, a2_00"), "{ring}");
    assert!(ring.ends_with("g0, g0v), dp;"), "{ring}");
    assert_eq!(ring.matches(',').count(), 14 + 1);
    assert_eq!(text.matches(",\n").count() + 1, 8);
    assert!(text.trim_end().ends_with("std(i);"));
}

#[test]
fn empty_system_exports() {
    let sys = PolySystem::new(Vec::new());
    assert_eq!(sys.to_singular(), "ring r = 0, (x), dp;\nideal i = 0;\nstd(i);\n");
}

#[test]
fn neutral_round_trip() {
    let sys = cnot_chain_ideal(&IdealOptions::default()).unwrap();
    let back = PolySystem::from_neutral(&sys.to_neutral()).unwrap();
    assert_eq!(back, sys);
}

#[test]
fn cnot_chain_covers_twelve_indices() {
    let sys = cnot_chain_ideal(&IdealOptions::default()).unwrap();
    for k in 1..=12 {
        assert!(sys.vars.iter().any(|v| v.starts_with(&format!("a{k}_")) || v.starts_with(&format!("b{k}_"))), "index {k}");
    }
    for t in 1..=7 {
        assert!(sys.var_index(&format!("g0_t{t}")).is_some());
    }
}

#[test]
fn or_gate_system_is_feasible() {
    let or = Tensor::gate(&["01", "10", "11"]);
    assert!(!gb_trivial(&gate_ideal(&or, Mode::Heterogeneous, &IdealOptions::default()).unwrap()));
}

#[test]
fn homogeneous_tree_is_infeasible() {
    let parts = vec![
        (Tensor::equal(Kind::Gate, 3), vec![1, 1, 1]),
        (Tensor::equal(Kind::Cogate, 2), vec![1, 1]),
        (Tensor::equal(Kind::Gate, 1), vec![1]),
        (Tensor::equal(Kind::Cogate, 1), vec![1]),
    ];
    assert!(gb_trivial(&circuit_ideal(&parts, &IdealOptions::default()).unwrap()));
}

#[test]
fn cnot1_homogeneous_is_infeasible() {
    let sys = gate_ideal(&Tensor::gate(&CNOT1), Mode::Homogeneous, &IdealOptions::reduced()).unwrap();
    assert!(gb_trivial(&sys));
}

#[test]
fn irrational_tensor_rejected() {
    let t = Tensor::new(Kind::Gate, vec![1], [(0, pfk_core::scalar::Scalar::float(0.3, 0.0))]);
    assert!(matches!(gate_ideal(&t, Mode::Homogeneous, &IdealOptions::default()), Err(PolysysError::NotRational(_))));
}

#[test]
fn boolean_tree_elimination_keeps_scales_first() {
    let (sys, k) = boolean_tree_elimination_ideal();
    assert_eq!(k, 4);
    assert_eq!(&sys.vars[..4], ["g0_t1", "g0v_t1", "g0_t2", "g0v_t2"]);
}
