use std::sync::Arc;

use darkstate::fockspace::{
    materialize, Algebra, Basis, Factor, FermiOrdering, FockVector, ModeId, ModeSpace, Monomial,
    Occupation, OperatorPolynomial, Polarization, SectorSpec, StateRecord, StateVector,
};
use darkstate::{Error, Execution, ModelConfig};
use num_complex::Complex64;
use proptest::prelude::*;

fn small_space(algebra: Algebra) -> Arc<ModeSpace> {
    ModelConfig::new("1:1".parse().unwrap())
        .with_algebra(algebra)
        .mode_space()
}

fn random_poly(
    space: &ModeSpace,
    picks: &[(usize, bool, f64)],
    arity: usize,
) -> OperatorPolynomial {
    let mut p = OperatorPolynomial::zero();
    for chunk in picks.chunks(arity) {
        let coeff = chunk.iter().map(|c| c.2).sum::<f64>();
        let factors = chunk
            .iter()
            .map(|&(i, create, _)| {
                let mode = space.modes()[i % space.len()];
                if create {
                    Factor::create(mode)
                } else {
                    Factor::annihilate(mode)
                }
            })
            .collect();
        p.push(Monomial::new(coeff, factors));
    }
    p
}

fn random_state(space: &Arc<ModeSpace>, seeds: &[(u8, f64, f64)]) -> FockVector {
    let fermi = space.algebra().is_fermionic(&space.modes()[0]);
    let mut v = FockVector::zero(space.clone());
    for (k, &(s, re, im)) in seeds.iter().enumerate() {
        let occ: Vec<u8> = space
            .modes()
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let bits = (u32::from(s) >> (i % 8)) as u8 ^ (k as u8);
                if m.is_atomic() && fermi {
                    bits & 1
                } else {
                    bits % 3
                }
            })
            .collect();
        v.insert(Occupation(occ), Complex64::new(re, im));
    }
    v
}

fn distance(a: &FockVector, b: &FockVector) -> f64 {
    let mut d = a.clone();
    d.add_scaled(b, Complex64::new(-1.0, 0.0));
    d.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_acts_like_the_raw_product(
        picks in prop::collection::vec((0usize..16, any::<bool>(), -1.0f64..1.0), 3..12),
        seeds in prop::collection::vec((any::<u8>(), -1.0f64..1.0, -1.0f64..1.0), 1..5),
        fermi in any::<bool>(),
    ) {
        let algebra = if fermi { Algebra::fermi() } else { Algebra::bose() };
        let space = small_space(algebra);
        let raw = random_poly(&space, &picks, 3);
        let canon = raw.canonicalize(&algebra);
        let state = random_state(&space, &seeds);
        let a = state.apply(&raw).unwrap();
        let b = state.apply(&canon).unwrap();
        prop_assert!(distance(&a, &b) <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn adjoint_reverses_inner_products(
        picks in prop::collection::vec((0usize..16, any::<bool>(), -1.0f64..1.0), 2..8),
        left in prop::collection::vec((any::<u8>(), -1.0f64..1.0, -1.0f64..1.0), 1..4),
        right in prop::collection::vec((any::<u8>(), -1.0f64..1.0, -1.0f64..1.0), 1..4),
        fermi in any::<bool>(),
    ) {
        let algebra = if fermi { Algebra::fermi() } else { Algebra::bose() };
        let space = small_space(algebra);
        let op = random_poly(&space, &picks, 2);
        let x = random_state(&space, &left);
        let y = random_state(&space, &right);
        let lhs = x.inner(&y.apply(&op).unwrap());
        let rhs = x.apply(&op.adjoint()).unwrap().inner(&y);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn sector_enumeration_respects_its_constraints(atoms in 0u32..3, cp in 0u32..3, cm in 0u32..3, fermi in any::<bool>()) {
        let algebra = if fermi { Algebra::fermi() } else { Algebra::bose() };
        let space = small_space(algebra);
        let spec = SectorSpec::new(atoms, cp, cm);
        let basis = Basis::enumerate(space.clone(), &spec).unwrap();
        for occ in basis.states() {
            prop_assert_eq!(occ.atoms(&space), atoms);
            prop_assert!(occ.photons(&space, Polarization::Plus) <= cp);
            prop_assert!(occ.photons(&space, Polarization::Minus) <= cm);
            prop_assert!(spec.admits(occ, &space));
        }
        let mut sorted = basis.states().to_vec();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), basis.len());
    }
}

#[test]
fn bose_commutator_and_fermi_anticommutator() {
    let b = small_space(Algebra::bose());
    let mode = b.modes()[0];
    let a = OperatorPolynomial::annihilate(mode);
    let ad = OperatorPolynomial::create(mode);
    let comm = a.mul(&ad).sub(&ad.mul(&a)).canonicalize(&Algebra::bose());
    assert!(comm.approx_eq(&OperatorPolynomial::identity(), &Algebra::bose(), 1e-14));

    let fermi = Algebra::fermi();
    let anti = a.mul(&ad).add(&ad.mul(&a)).canonicalize(&fermi);
    assert!(anti.approx_eq(&OperatorPolynomial::identity(), &fermi, 1e-14));
    assert!(ad.mul(&ad).canonicalize(&fermi).is_empty());
}

#[test]
fn fermion_orderings_differ_only_across_manifolds() {
    let split = Algebra::fermi();
    let global = Algebra {
        ordering: FermiOrdering::Global,
        ..split
    };
    let space = small_space(split);
    let g = space
        .modes()
        .iter()
        .copied()
        .find(|m| matches!(m, ModeId::Ground { .. }))
        .unwrap();
    let e = space
        .modes()
        .iter()
        .copied()
        .find(|m| matches!(m, ModeId::Excited { .. }))
        .unwrap();
    let gd = OperatorPolynomial::create(g);
    let ed = OperatorPolynomial::create(e);
    let comm = ed.mul(&gd).sub(&gd.mul(&ed));
    let anti = ed.mul(&gd).add(&gd.mul(&ed));
    assert!(comm.canonicalize(&split).is_empty());
    assert!(anti.canonicalize(&global).is_empty());
}

#[test]
fn materialized_adjoint_matches_adjoint_polynomial() {
    let cfg = ModelConfig::new("1:1".parse().unwrap());
    let space = cfg.mode_space();
    let v = darkstate::model::build_v(&cfg).unwrap();
    let zero = Basis::enumerate(
        space.clone(),
        &SectorSpec::new(1, 3, 3).zero_excited().with_excitations(2),
    )
    .unwrap();
    let one =
        Basis::enumerate(space.clone(), &SectorSpec::new(1, 3, 3).with_excitations(2)).unwrap();
    for exec in [Execution::Sequential, Execution::Parallel] {
        let m = materialize(&v, &zero, &one, exec).unwrap();
        let md = materialize(&v.adjoint(), &one, &zero, exec).unwrap();
        assert!(m.adjoint().sub(&md).unwrap().max_abs() < 1e-14);
    }
}

#[test]
fn state_record_round_trip_is_exact() {
    let space = small_space(Algebra::bose());
    let basis = Arc::new(Basis::enumerate(space, &SectorSpec::new(1, 1, 1)).unwrap());
    let amps = (0..basis.len())
        .map(|k| Complex64::new(1.0 / (k as f64 + 3.0), (k as f64).sin()))
        .collect();
    let state = StateVector::new(basis, amps).unwrap();
    let text = StateRecord::from_state(&state, Default::default())
        .to_json_string()
        .unwrap();
    let back = StateRecord::from_json_str(&text)
        .unwrap()
        .to_state()
        .unwrap();
    assert_eq!(back.amplitudes(), state.amplitudes());
}

#[test]
fn signatures_parse_back() {
    let space = small_space(Algebra::bose());
    let occ = Occupation::parse_signature(&space, "g0(-1)=1 a+=2").unwrap();
    assert_eq!(
        Occupation::parse_signature(&space, &occ.signature(&space)).unwrap(),
        occ
    );
    assert!(matches!(
        Occupation::parse_signature(&space, "x=1"),
        Err(Error::Parse(_))
    ));
}

#[test]
fn capacity_limit_is_reported() {
    let space = small_space(Algebra::bose());
    let err = Basis::enumerate(space, &SectorSpec::new(3, 6, 6).with_capacity(10)).unwrap_err();
    assert!(matches!(err, Error::Capacity { .. }));
}
