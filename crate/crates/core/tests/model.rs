use darkstate::fockspace::{materialize, Basis, FockVector, SectorSpec};
use darkstate::model::{build_interaction, build_v, chain_coupling, excited_number, project_chain};
use darkstate::{decompose_chains, Algebra, Execution, ModelConfig, Statistics};
use proptest::prelude::*;

#[test]
fn interaction_is_hermitian_on_a_closed_sector() {
    for (tr, algebra) in [
        ("1:1", Algebra::bose()),
        ("3/2:3/2", Algebra::fermi()),
        ("2:1", Algebra::bose()),
    ] {
        let cfg = ModelConfig::new(tr.parse().unwrap()).with_algebra(algebra);
        let space = cfg.mode_space();
        let h = build_interaction(&cfg).unwrap();
        for atoms in 1..=2 {
            let spec = SectorSpec::new(atoms, 2 + atoms, 2 + atoms).with_excitations(2);
            let basis = Basis::enumerate(space.clone(), &spec).unwrap();
            let m = materialize(&h, &basis, &basis, Execution::default()).unwrap();
            assert!(
                m.sub(&m.adjoint()).unwrap().max_abs() < 1e-14,
                "{tr} atoms={atoms}"
            );
            assert!(m.nnz() > 0);
        }
    }
}

#[test]
fn chain_projections_sum_to_the_full_coupling() {
    for tr in ["2:1", "3/2:3/2", "1:2", "5/2:3/2"] {
        let cfg = ModelConfig::new(tr.parse().unwrap());
        let v = build_v(&cfg).unwrap();
        let mut sum = darkstate::OperatorPolynomial::zero();
        for c in decompose_chains(cfg.transition).unwrap() {
            let p = project_chain(&cfg, &v, &c).unwrap();
            assert!(
                p.approx_eq(&chain_coupling(&c, cfg.rabi, 1), &cfg.algebra, 1e-14),
                "{tr} {}",
                c.site_list()
            );
            sum = sum.add(&p);
        }
        assert!(sum.approx_eq(&v, &cfg.algebra, 1e-14), "{tr}");
    }
}

#[test]
fn statistics_follow_the_ground_momentum() {
    assert_eq!(
        ModelConfig::new("1/2:3/2".parse().unwrap())
            .algebra
            .statistics,
        Statistics::Fermi
    );
    assert_eq!(
        ModelConfig::new("1:1".parse().unwrap()).algebra.statistics,
        Statistics::Bose
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coupling_conserves_excitations_and_helicity(pick in 0usize..1000, atoms in 1u32..3, tr in 0usize..4) {
        let name = ["1:1", "2:1", "3/2:3/2", "1:2"][tr];
        let cfg = ModelConfig::new(name.parse().unwrap());
        let space = cfg.mode_space();
        let basis = Basis::enumerate(space.clone(), &SectorSpec::new(atoms, 2, 2)).unwrap();
        let occ = basis.state(pick % basis.len()).clone();
        let image = FockVector::basis_state(space.clone(), occ.clone()).apply(&build_interaction(&cfg).unwrap()).unwrap();
        for o in image.amplitudes().keys() {
            prop_assert_eq!(o.excitations(&space), occ.excitations(&space));
            prop_assert_eq!(o.twice_helicity(&space), occ.twice_helicity(&space));
            prop_assert_eq!(o.atoms_per_class(&space), occ.atoms_per_class(&space));
        }
        let ne = FockVector::basis_state(space.clone(), occ.clone()).apply(&excited_number(&cfg)).unwrap();
        let expected = f64::from(occ.excited(&space));
        prop_assert!((ne.norm() - expected).abs() < 1e-14);
    }
}
