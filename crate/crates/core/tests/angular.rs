use darkstate::angular::{dipole_cg, ChainKind, HalfInt, Polarization, SiteRole, Transition};
use darkstate::{clebsch_gordan, decompose_chains, Error};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn h(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}

#[test]
fn known_values() {
    let c = clebsch_gordan(h(2), h(2), h(2), h(-2), h(0), h(0)).unwrap();
    assert_eq!(c.sign(), 1);
    assert_eq!(c.square(), &BigRational::new(1.into(), 3.into()));
    let c = clebsch_gordan(h(1), h(1), h(1), h(-1), h(0), h(0)).unwrap();
    assert_eq!(c.to_string(), "sqrt(1/2)");
    let c = clebsch_gordan(h(1), h(-1), h(1), h(1), h(0), h(0)).unwrap();
    assert_eq!(c.to_string(), "-sqrt(1/2)");
    assert!(clebsch_gordan(h(2), h(0), h(2), h(0), h(2), h(0))
        .unwrap()
        .is_zero());
}

#[test]
fn invalid_arguments_are_rejected() {
    assert!(matches!(
        clebsch_gordan(h(2), h(4), h(2), h(0), h(2), h(4)),
        Err(Error::InvalidAngularMomentum(_))
    ));
    assert!(matches!(
        clebsch_gordan(h(2), h(1), h(2), h(0), h(2), h(1)),
        Err(Error::InvalidAngularMomentum(_))
    ));
    assert!("1:3".parse::<Transition>().is_err());
    assert!("0:0".parse::<Transition>().is_err());
    assert!("1/2:1".parse::<Transition>().is_err());
}

#[test]
fn chains_partition_every_substate() {
    for tr in Transition::all_up_to(7) {
        let chains = decompose_chains(tr).unwrap();
        let mut grounds: Vec<i32> = Vec::new();
        let mut exciteds: Vec<i32> = Vec::new();
        for c in &chains {
            for s in &c.sites {
                match s.role {
                    SiteRole::Ground => grounds.push(s.mu.twice()),
                    SiteRole::Excited => exciteds.push(s.mu.twice()),
                }
            }
            for link in &c.couplings {
                let dm = c.excited_mu(link.excited).unwrap().twice()
                    - c.ground_mu(link.ground).unwrap().twice();
                assert_eq!(dm, 2 * link.polarization.sign());
                assert!(!link.g.is_zero());
            }
        }
        grounds.sort();
        exciteds.sort();
        assert_eq!(
            grounds,
            tr.fg.projections().map(|m| m.twice()).collect::<Vec<_>>(),
            "{tr}"
        );
        assert_eq!(
            exciteds,
            tr.fe.projections().map(|m| m.twice()).collect::<Vec<_>>(),
            "{tr}"
        );
    }
}

#[test]
fn chain_kinds_for_small_transitions() {
    let kinds = |s: &str| {
        let mut k: Vec<(ChainKind, u32)> = decompose_chains(s.parse().unwrap())
            .unwrap()
            .iter()
            .map(|c| (c.kind, c.links))
            .collect();
        k.sort_by_key(|x| format!("{x:?}"));
        k
    };
    assert_eq!(
        kinds("1:1"),
        vec![(ChainKind::Lambda, 1), (ChainKind::V, 0)]
    );
    assert_eq!(
        kinds("0:1"),
        vec![(ChainKind::IsolatedExcited, 0), (ChainKind::V, 0)]
    );
    assert_eq!(
        kinds("2:1"),
        vec![(ChainKind::Lambda, 1), (ChainKind::Lambda, 2)]
    );
    assert_eq!(kinds("1:2"), vec![(ChainKind::V, 0), (ChainKind::V, 1)]);
    assert_eq!(
        kinds("1/2:1/2"),
        vec![(ChainKind::NMinus, 0), (ChainKind::NPlus, 0)]
    );
}

#[test]
fn lambda_chain_labels_are_odd_ground_even_excited() {
    for tr in Transition::all_up_to(7) {
        for c in decompose_chains(tr).unwrap() {
            for s in &c.sites {
                let odd = s.label % 2 == 1;
                assert_eq!(odd, s.role == SiteRole::Ground, "{tr} {}", c.site_list());
            }
            if c.kind == ChainKind::Lambda {
                let labels: Vec<u32> = c.ground_sites().map(|s| s.label).collect();
                assert_eq!(labels, (0..=c.links).map(|j| 2 * j + 1).collect::<Vec<_>>());
            }
        }
    }
}

proptest! {
    #[test]
    fn exchange_symmetry(tj1 in 0i32..5, tj2 in 0i32..5, a in 0i32..5, b in 0i32..5, k in 0i32..5) {
        let tj = (tj1 - tj2).abs() + 2 * k;
        prop_assume!(tj <= tj1 + tj2);
        let tm1 = -tj1 + 2 * (a % (tj1 + 1));
        let tm2 = -tj2 + 2 * (b % (tj2 + 1));
        let tm = tm1 + tm2;
        prop_assume!(tm.abs() <= tj);
        let x = clebsch_gordan(h(tj1), h(tm1), h(tj2), h(tm2), h(tj), h(tm)).unwrap();
        let y = clebsch_gordan(h(tj2), h(tm2), h(tj1), h(tm1), h(tj), h(tm)).unwrap();
        prop_assert_eq!(x.square(), y.square());
        let phase = if ((tj1 + tj2 - tj) / 2) % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(x.sign(), phase * y.sign());
        let z = clebsch_gordan(h(tj1), h(-tm1), h(tj2), h(-tm2), h(tj), h(-tm)).unwrap();
        prop_assert_eq!(x.square(), z.square());
        prop_assert_eq!(x.sign(), phase * z.sign());
    }

    #[test]
    fn rows_are_normalized(tj1 in 0i32..6, tj2 in 0i32..4, k in 0i32..4, c in 0i32..12) {
        let tj = (tj1 - tj2).abs() + 2 * k;
        prop_assume!(tj <= tj1 + tj2);
        let tm = -tj + 2 * (c % (tj + 1));
        let mut sum = BigRational::zero();
        let mut tm1 = -tj1;
        while tm1 <= tj1 {
            let tm2 = tm - tm1;
            if tm2.abs() <= tj2 {
                sum += clebsch_gordan(h(tj1), h(tm1), h(tj2), h(tm2), h(tj), h(tm)).unwrap().square().clone();
            }
            tm1 += 2;
        }
        prop_assert_eq!(sum, BigRational::one());
    }

    #[test]
    fn dipole_cg_vanishes_off_selection(tfg in 0i32..5, dfe in -1i32..2, a in 0i32..6, b in 0i32..6, q in -2i32..3) {
        let tfe = tfg + 2 * dfe;
        prop_assume!(tfe >= 0 && tfe + tfg > 0);
        let mg = -tfg + 2 * (a % (tfg + 1));
        let me = -tfe + 2 * (b % (tfe + 1));
        let r = dipole_cg(h(tfg), h(mg), h(tfe), h(me), q);
        if q.abs() > 1 {
            prop_assert!(r.is_err() || r.unwrap().is_zero());
        } else if me != mg + 2 * q {
            prop_assert!(r.unwrap().is_zero());
        }
    }
}

#[test]
fn polarization_helpers() {
    assert_eq!(Polarization::Plus.opposite(), Polarization::Minus);
    assert_eq!(Polarization::Minus.sign(), -1);
    assert_eq!(h(3).to_string(), "3/2");
    assert_eq!("-1/2".parse::<HalfInt>().unwrap(), h(-1));
}
