use proptest::prelude::*;
use swssb::correlators::{cw_alpha, fidelity_correlator, wightman, wightman_tfd};
use swssb::diagnostics::{decohered_ising_state, verify_bounds};
use swssb::lattice::LatticeSpec;
use swssb::operator::{pauli_string, Operator, Pauli};
use swssb::rbim::{exact_rbim, nishimori_beta, BetaConvention};
use swssb::states::random_density_matrix;

fn pauli_pair(n: usize, i: usize, gap: usize, a: usize, b: usize) -> (Operator, Operator) {
    let j = (i + gap) % n;
    (
        pauli_string(n, &[(i, Pauli::ALL[a])]).unwrap(),
        pauli_string(n, &[(j, Pauli::ALL[b])]).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bound_chain(n in 2usize..=4, rank_seed in 0usize..64, seed in any::<u64>(), i in 0usize..4, a in 0usize..3, b in 0usize..3) {
        let rank = 1 + rank_seed % (1 << n);
        let rho = random_density_matrix(n, rank, seed).unwrap();
        let (oi, oj) = pauli_pair(n, i % n, 1 + i % (n - 1), a, b);
        let r = verify_bounds(&rho, &oi, &oj).unwrap();
        prop_assert!(r.bound1_ok && r.bound2_ok, "{:?}", r);
        prop_assert!(r.f * r.f <= r.cw + 1e-10);
    }

    #[test]
    fn purification_route_agrees(n in 2usize..=3, seed in any::<u64>(), a in 0usize..3, b in 0usize..3) {
        let rho = random_density_matrix(n, 1 << n, seed).unwrap();
        let (oi, oj) = pauli_pair(n, 0, 1, a, b);
        prop_assert!((wightman(&rho, &oi, &oj).unwrap() - wightman_tfd(&rho, &oi, &oj).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn cw_alpha_is_symmetric_for_pauli_pairs(seed in any::<u64>(), alpha in 0.05f64..0.95, a in 0usize..3, b in 0usize..3) {
        let rho = random_density_matrix(3, 5, seed).unwrap();
        let (oi, oj) = pauli_pair(3, 0, 2, a, b);
        let x = cw_alpha(&rho, &oi, &oj, alpha).unwrap();
        let y = cw_alpha(&rho, &oi, &oj, 1.0 - alpha).unwrap();
        prop_assert!((x - y).abs() < 1e-10);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&x));
    }

    #[test]
    fn decohered_state_fidelity_equals_wightman(p in 0.0f64..=0.5) {
        // the decohered state is diagonal in the x basis, where both reduce to Σ√(w w')
        let lat = LatticeSpec::new(2, false).unwrap();
        let rho = decohered_ising_state(&lat, p).unwrap();
        let (zi, zj) = (pauli_string(4, &[(0, Pauli::Z)]).unwrap(), pauli_string(4, &[(3, Pauli::Z)]).unwrap());
        prop_assert!((wightman(&rho, &zi, &zj).unwrap() - fidelity_correlator(&rho, &zi, &zj).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn nishimori_line_identity(p in 0.01f64..0.5) {
        let lat = LatticeSpec::new(2, true).unwrap();
        let beta = nishimori_beta(p, BetaConvention::Nishimori).unwrap();
        let r = exact_rbim(&lat, p, beta, (0, 3)).unwrap();
        prop_assert!((r.m1 - r.m2).abs() < 1e-12);
    }
}
