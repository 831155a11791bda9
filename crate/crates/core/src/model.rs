//! Free Hamiltonians and the rotating-wave atom-photon coupling as operator
//! polynomials, plus their restrictions to single chains.
//!
//! Units: ħ = 1. All builders are pure and replicate atomic terms over the
//! configured momentum classes; the two photon modes are shared.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::{dipole_cg, Chain, Polarization, SiteRole, Transition};
use crate::error::{Error, Result};
use crate::fockspace::{
    Algebra, Factor, ModeId, ModeSpace, Monomial, OperatorPolynomial, Statistics,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub transition: Transition,
    /// Optical transition frequency.
    pub omega0: f64,
    /// Field frequency.
    pub omega: f64,
    /// Single-photon Rabi frequency.
    pub rabi: f64,
    pub algebra: Algebra,
    pub momentum_classes: u32,
}

impl ModelConfig {
    /// Resonant, unit coupling, one momentum class, statistics from the parity
    /// of `2 F_g`.
    pub fn new(transition: Transition) -> Self {
        ModelConfig {
            transition,
            omega0: 1.0,
            omega: 1.0,
            rabi: 1.0,
            algebra: Algebra::new(Statistics::default_for(transition.fg)),
            momentum_classes: 1,
        }
    }

    pub fn with_statistics(mut self, statistics: Statistics) -> Self {
        self.algebra.statistics = statistics;
        self
    }

    pub fn with_algebra(mut self, algebra: Algebra) -> Self {
        self.algebra = algebra;
        self
    }

    pub fn with_classes(mut self, classes: u32) -> Self {
        self.momentum_classes = classes;
        self
    }

    pub fn with_rabi(mut self, rabi: f64) -> Self {
        self.rabi = rabi;
        self
    }

    pub fn with_frequencies(mut self, omega0: f64, omega: f64) -> Self {
        self.omega0 = omega0;
        self.omega = omega;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rabi == 0.0 || !self.rabi.is_finite() {
            return Err(Error::Config(
                "the Rabi frequency must be finite and nonzero".into(),
            ));
        }
        if self.momentum_classes == 0 {
            return Err(Error::Config(
                "at least one momentum class is required".into(),
            ));
        }
        Ok(())
    }

    pub fn mode_space(&self) -> Arc<ModeSpace> {
        Arc::new(ModeSpace::full(
            self.transition,
            self.momentum_classes,
            self.algebra,
        ))
    }
}

/// `omega0 * sum c^+ c` over excited modes.
pub fn build_ha(cfg: &ModelConfig) -> OperatorPolynomial {
    let mut p = OperatorPolynomial::zero();
    for class in 0..cfg.momentum_classes {
        for mu in cfg.transition.fe.projections() {
            let m = ModeId::excited(class, mu);
            p.push(Monomial::new(
                cfg.omega0,
                vec![Factor::create(m), Factor::annihilate(m)],
            ));
        }
    }
    p
}

/// `omega * sum_s a_s^+ a_s`.
pub fn build_hph(cfg: &ModelConfig) -> OperatorPolynomial {
    let mut p = OperatorPolynomial::zero();
    for s in Polarization::BOTH {
        let m = ModeId::photon(s);
        p.push(Monomial::new(
            cfg.omega,
            vec![Factor::create(m), Factor::annihilate(m)],
        ));
    }
    p
}

/// Absorption part of the coupling: `Omega * sum C c^+_{mu_e} b_{mu_g} a_s`
/// with `mu_e = mu_g + s`.
pub fn build_v(cfg: &ModelConfig) -> Result<OperatorPolynomial> {
    let Transition { fg, fe } = cfg.transition;
    let mut p = OperatorPolynomial::zero();
    for class in 0..cfg.momentum_classes {
        for mu_g in fg.projections() {
            for s in Polarization::BOTH {
                let mu_e = mu_g + crate::angular::HalfInt::from_int(s.sign());
                if mu_e.twice().abs() > fe.twice() {
                    continue;
                }
                let cg = dipole_cg(fg, mu_g, fe, mu_e, s.sign())?;
                if cg.is_zero() {
                    continue;
                }
                p.push(absorption(cfg.rabi * cg.to_f64(), class, mu_g, mu_e, s));
            }
        }
    }
    Ok(p)
}

/// Full coupling `V + V^+`.
pub fn build_interaction(cfg: &ModelConfig) -> Result<OperatorPolynomial> {
    let v = build_v(cfg)?;
    Ok(v.add(&v.adjoint()))
}

/// Total excited-atom number `sum c^+ c`.
pub fn excited_number(cfg: &ModelConfig) -> OperatorPolynomial {
    let mut p = OperatorPolynomial::zero();
    for class in 0..cfg.momentum_classes {
        for mu in cfg.transition.fe.projections() {
            p = p.add(&OperatorPolynomial::number(ModeId::excited(class, mu)));
        }
    }
    p
}

fn absorption(
    coeff: f64,
    class: u32,
    mu_g: crate::angular::HalfInt,
    mu_e: crate::angular::HalfInt,
    s: Polarization,
) -> Monomial {
    Monomial::new(
        Complex64::new(coeff, 0.0),
        vec![
            Factor::create(ModeId::excited(class, mu_e)),
            Factor::annihilate(ModeId::ground(class, mu_g)),
            Factor::annihilate(ModeId::photon(s)),
        ],
    )
}

fn atomic_modes_in_chain(term: &Monomial, chain: &Chain) -> bool {
    term.factors.iter().all(|f| match f.mode {
        ModeId::Ground { mu, .. } => chain.contains_ground(mu),
        ModeId::Excited { mu, .. } => chain.contains_excited(mu),
        ModeId::Photon(_) => true,
    })
}

/// Keeps exactly the monomials of `vfull` whose atomic modes lie in `chain`.
pub fn project_chain(
    cfg: &ModelConfig,
    vfull: &OperatorPolynomial,
    chain: &Chain,
) -> Result<OperatorPolynomial> {
    if chain.transition != cfg.transition {
        return Err(Error::ChainMismatch(format!(
            "chain belongs to {} but the model is {}",
            chain.transition, cfg.transition
        )));
    }
    Ok(vfull.filter(|t| atomic_modes_in_chain(t, chain)))
}

/// The coupling generated from `chain.couplings` directly, so overridden
/// coefficients take effect. Equals [`project_chain`] for unmodified chains.
pub fn chain_coupling(chain: &Chain, rabi: f64, classes: u32) -> OperatorPolynomial {
    coupling_from(chain, rabi, classes, |_| true)
}

/// `V_Λ`: the part of the chain coupling on its maximal Λ-sub-chain
/// (excited labels `2..=2L`).
pub fn lambda_coupling(chain: &Chain, rabi: f64, classes: u32) -> OperatorPolynomial {
    let top = 2 * chain.links;
    coupling_from(chain, rabi, classes, move |excited| {
        excited >= 2 && excited <= top
    })
}

fn coupling_from(
    chain: &Chain,
    rabi: f64,
    classes: u32,
    keep: impl Fn(u32) -> bool,
) -> OperatorPolynomial {
    let mut p = OperatorPolynomial::zero();
    for class in 0..classes {
        for c in chain.couplings.iter().filter(|c| keep(c.excited)) {
            let mu_g = chain.ground_mu(c.ground).expect("coupling ground site");
            let mu_e = chain.excited_mu(c.excited).expect("coupling excited site");
            p.push(absorption(
                rabi * c.g.to_f64(),
                class,
                mu_g,
                mu_e,
                c.polarization,
            ));
        }
    }
    p
}

/// Atomic modes of a chain for one momentum class, in site order.
pub fn chain_modes(chain: &Chain, class: u32) -> Vec<ModeId> {
    chain
        .sites
        .iter()
        .map(|s| match s.role {
            SiteRole::Ground => ModeId::ground(class, s.mu),
            SiteRole::Excited => ModeId::excited(class, s.mu),
        })
        .collect()
}
