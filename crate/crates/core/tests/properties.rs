//! Property tests for the structural invariants: basis bijectivity,
//! generator hermiticity, drive linearity and budget algebra.

use dotbus::evolve::propagate_static;
use dotbus::hamiltonian::{
    apply_block, chain_hamiltonian, drive_hamiltonian, BlockSpec, DriveSpec, Envelope,
};
use dotbus::linalg::hermiticity_deviation;
use dotbus::model::{BasisIndex, ChainSpec, DotSpec, Sector, StateVector};
use dotbus::protocol::{fidelity_budget, FidelityFactors};
use proptest::prelude::*;

fn sector_strategy(n: usize) -> impl Strategy<Value = Sector> {
    prop_oneof![
        Just(Sector::All),
        (0..=n as u32).prop_map(Sector::Exactly),
        (0..=n as u32).prop_map(Sector::AtMost),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_round_trips(n in 1usize..=10, sector_seed in 0u32..3, k in 0u32..=10) {
        let sector = match sector_seed {
            0 => Sector::All,
            1 => Sector::Exactly(k.min(n as u32)),
            _ => Sector::AtMost(k.min(n as u32)),
        };
        let basis = BasisIndex::build(n, sector).unwrap();
        for j in 0..basis.dim() {
            prop_assert_eq!(basis.index_of(basis.word(j)), Some(j));
        }
    }

    #[test]
    fn random_sector_words_are_sorted(n in 2usize..=10, sector in sector_strategy(8)) {
        if let Ok(basis) = BasisIndex::build(n, sector) {
            let words: Vec<u64> = basis.words().collect();
            prop_assert!(words.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn chain_generators_are_hermitian(
        n in 2usize..=6,
        energies in proptest::collection::vec(-2.0f64..2.0, 6),
        couplings in proptest::collection::vec(0.01f64..1.0, 5),
        shift in -5.0f64..5.0,
    ) {
        let dots: Vec<DotSpec> = energies[..n]
            .iter()
            .map(|&e| DotSpec::new(e, 0.0).unwrap())
            .collect();
        let chain = ChainSpec::new(dots, couplings[..n - 1].to_vec()).unwrap();
        let basis = BasisIndex::build(n, Sector::All).unwrap();
        let h = chain_hamiltonian(&chain, &basis).unwrap();
        prop_assert!(hermiticity_deviation(h.array()) <= 1e-12);
        let blocked = apply_block(&h, &basis, &BlockSpec::interior(n, shift)).unwrap();
        prop_assert!(hermiticity_deviation(blocked.array()) <= 1e-12);
    }

    #[test]
    fn drive_scales_linearly_in_rabi(
        n in 1usize..=4,
        omega in 0.01f64..5.0,
        factor in 1.0f64..10.0,
        t in 0.0f64..1.0,
    ) {
        let basis = BasisIndex::build(n, Sector::All).unwrap();
        let sites: Vec<usize> = (0..n).collect();
        let base = DriveSpec::new(sites.clone(), omega, vec![0.0; n], Envelope::Rect, 0.0, 1.0).unwrap();
        let scaled = DriveSpec::new(sites, omega * factor, vec![0.0; n], Envelope::Rect, 0.0, 1.0).unwrap();
        let h1 = drive_hamiltonian(&base, &basis, t).unwrap();
        let h2 = drive_hamiltonian(&scaled, &basis, t).unwrap();
        let dev = (h2.array() - h1.scaled(factor).array())
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        prop_assert!(dev < 1e-12);
    }

    #[test]
    fn static_evolution_preserves_overlap_bounds(
        n in 2usize..=6,
        coupling in 0.05f64..0.6,
        start in 0usize..6,
        t in 0.0f64..40.0,
    ) {
        let start = start % n;
        let chain = ChainSpec::uniform(n, coupling).unwrap();
        let basis = BasisIndex::build(n, Sector::Exactly(1)).unwrap();
        let h = chain_hamiltonian(&chain, &basis).unwrap();
        let psi0 = StateVector::basis_state(&basis, 1 << start).unwrap();
        let psi = propagate_static(&h, &psi0, t).unwrap();
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-9);
        let total: f64 = (0..n).map(|s| psi.site_population(s)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn budget_product_is_monotone_and_bounded(
        a in 0.0f64..=1.0,
        b in 0.0f64..=1.0,
        c in 0.0f64..=1.0,
        d in 0.0f64..=1.0,
        bump in 0.0f64..=1.0,
    ) {
        let base = FidelityFactors { chain_transfer: a, blocking: b, swap_gate: c, decay: d };
        let total = fidelity_budget(&base).unwrap();
        prop_assert!((0.0..=1.0).contains(&total));
        let raised = FidelityFactors { chain_transfer: a.max(bump), ..base };
        prop_assert!(fidelity_budget(&raised).unwrap() >= total - 1e-15);
    }
}
