//! Analytical dark-state recipes.
//!
//! Everything is built from the chain operator
//!
//! ```text
//! Ψ_NC = Σ_{j=0..L} A_{2j+1} b^+_{2j+1},
//! A_{2j+1} = (-1)^j a_+^j a_-^{L-j} Π_{q=1..j} G^{2q}_{2q-1} Π_{q=j+1..L} G^{2q}_{2q+1}
//! ```
//!
//! which satisfies `V_Λ Ψ_NC = ±Ψ_NC V_Λ` (upper sign Bose). Powers of Ψ_NC
//! applied to any photon state then stay annihilated by `V_Λ`. The N- and
//! V-chain recipes add bounds on the photon numbers so the extra links stay
//! dark too.
//!
//! Built states are normalized; the norm before normalization is kept in the
//! output metadata.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::angular::{Chain, ChainKind, ExactCG, HalfInt, SiteRole};
use crate::error::{Error, Result};
use crate::fockspace::{
    materialize_onto_image, Algebra, Basis, Factor, FockVector, ModeId, ModeSpace, Monomial,
    Occupation, OperatorPolynomial, Polarization, SectorSpec, StateRecord, StateVector, Statistics,
};
use crate::model::lambda_coupling;
use crate::par::Execution;

/// Below this norm a constructed vector counts as identically zero.
pub const ZERO_NORM: f64 = 1e-12;
/// Largest neglected coherent-state probability accepted by [`build_polariton`].
pub const TAIL_LIMIT: f64 = 1e-10;

/// One term `A_{2j+1} b^+_{2j+1}` of Ψ_NC.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiTerm {
    pub ground_label: u32,
    pub mu: HalfInt,
    pub plus_power: u32,
    pub minus_power: u32,
    pub coeff: ExactCG,
}

/// Exact coefficients of Ψ_NC for a chain, ordered by ground label.
pub fn psi_terms(chain: &Chain) -> Result<Vec<PsiTerm>> {
    if !chain.has_lambda_part() {
        return Err(Error::ChainMismatch(format!(
            "{} chain has no ground sites",
            chain.kind
        )));
    }
    let l = chain.links;
    let g = |k: u32, q: u32| -> Result<ExactCG> {
        chain
            .g(k, q)
            .cloned()
            .ok_or_else(|| Error::ChainMismatch(format!("missing coupling G^{k}_{q}")))
    };
    let mut terms = Vec::with_capacity(l as usize + 1);
    for j in 0..=l {
        let mut c = if j % 2 == 0 {
            ExactCG::one()
        } else {
            -ExactCG::one()
        };
        for q in 1..=j {
            c = c * g(2 * q, 2 * q - 1)?;
        }
        for q in j + 1..=l {
            c = c * g(2 * q, 2 * q + 1)?;
        }
        let label = 2 * j + 1;
        terms.push(PsiTerm {
            ground_label: label,
            mu: chain.ground_mu(label).expect("ground label inside chain"),
            plus_power: j,
            minus_power: l - j,
            coeff: c,
        });
    }
    Ok(terms)
}

/// Ψ_NC for momentum class `class` from explicit terms.
pub fn psi_from_terms(
    terms: &[PsiTerm],
    coeffs: impl Fn(&PsiTerm) -> f64,
    class: u32,
) -> OperatorPolynomial {
    let mut p = OperatorPolynomial::zero();
    for t in terms {
        let mut factors = vec![Factor::create(ModeId::ground(class, t.mu))];
        factors.extend(
            (0..t.plus_power).map(|_| Factor::annihilate(ModeId::photon(Polarization::Plus))),
        );
        factors.extend(
            (0..t.minus_power).map(|_| Factor::annihilate(ModeId::photon(Polarization::Minus))),
        );
        p.push(Monomial::new(coeffs(t), factors));
    }
    p
}

/// Ψ_NC of a chain for one momentum class.
pub fn psi_nc(chain: &Chain, class: u32) -> Result<OperatorPolynomial> {
    Ok(psi_from_terms(
        &psi_terms(chain)?,
        |t| t.coeff.to_f64(),
        class,
    ))
}

/// Matrix norm of `V_Λ Ψ ∓ Ψ V_Λ` (minus for Bose, plus for Fermi) over the
/// given domain basis, with `psi` supplied by the caller.
pub fn fund_relation_residual(
    chain: &Chain,
    psi: &OperatorPolynomial,
    domain: &Basis,
    exec: Execution,
) -> Result<f64> {
    let algebra = domain.space().algebra();
    let classes = domain.space().classes().max(1);
    let v = lambda_coupling(chain, 1.0, classes);
    let sign = match algebra.statistics {
        Statistics::Bose => -1.0,
        Statistics::Fermi => 1.0,
    };
    let op = v
        .mul(psi)
        .add(&psi.mul(&v).scale(Complex64::new(sign, 0.0)));
    let (m, _) = materialize_onto_image(&op, domain, exec)?;
    Ok(m.frobenius_norm())
}

/// `‖V_Λ Ψ_NC ∓ Ψ_NC V_Λ‖` over every configuration of `sector` in the chain's
/// mode space (momentum class 0).
pub fn verify_fund_relation(
    chain: &Chain,
    algebra: Algebra,
    sector: &SectorSpec,
    exec: Execution,
) -> Result<f64> {
    let space = Arc::new(ModeSpace::for_chain(chain, 1, algebra));
    let domain = Basis::enumerate(space, sector)?;
    fund_relation_residual(chain, &psi_nc(chain, 0)?, &domain, exec)
}

/// The photon functional Φ{a^+} acting on the vacuum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum PhiSpec {
    /// `(a^+_+)^plus (a^+_-)^minus`.
    Fock { plus: u32, minus: u32 },
    /// `(a^+_weak)^m exp(Z a^+_strong)`, truncated at `truncation` strong photons.
    CoherentTimesFock {
        z: Complex64,
        m: u32,
        weak: Polarization,
        truncation: u32,
    },
    /// `exp(Z_+ a^+_+ + Z_- a^+_-)`, each mode truncated at `truncation`.
    TwoModeCoherent {
        z_plus: Complex64,
        z_minus: Complex64,
        truncation: u32,
    },
}

/// Probability outside the first `truncation + 1` Fock states of a coherent
/// state of amplitude `|z|`.
pub fn coherent_tail_mass(z: f64, truncation: u32) -> f64 {
    let x = z * z;
    let mut term = (-x).exp();
    let mut kept = 0.0;
    for k in 0..=truncation {
        if k > 0 {
            term *= x / f64::from(k);
        }
        kept += term;
    }
    // Sum the tail directly when it is tiny, to avoid cancellation in 1 - kept.
    let mut tail = 0.0;
    let mut t = term;
    let mut k = truncation + 1;
    loop {
        t *= x / f64::from(k);
        tail += t;
        if t < tail * 1e-17 || k > truncation + 10_000 {
            break;
        }
        k += 1;
    }
    if tail < 1e-6 {
        tail
    } else {
        (1.0 - kept).max(0.0)
    }
}

/// Amplitude bound `|z|^{T+1}/sqrt((T+1)!)` on the first neglected term.
pub fn coherent_truncation_bound(z: f64, truncation: u32) -> f64 {
    let mut b = 1.0;
    for k in 1..=truncation + 1 {
        b *= z / f64::from(k).sqrt();
    }
    b
}

fn coherent_amplitudes(z: Complex64, truncation: u32) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(truncation as usize + 1);
    let mut a = Complex64::new(1.0, 0.0);
    for k in 0..=truncation {
        if k > 0 {
            a = a * z / f64::from(k).sqrt();
        }
        out.push(a);
    }
    out
}

impl PhiSpec {
    /// Photon count in mode `s` if it is fixed.
    pub fn fixed_count(&self, s: Polarization) -> Option<u32> {
        match *self {
            PhiSpec::Fock { plus, minus } => {
                Some(if s == Polarization::Plus { plus } else { minus })
            }
            PhiSpec::CoherentTimesFock { m, weak, .. } => (s == weak).then_some(m),
            PhiSpec::TwoModeCoherent { .. } => None,
        }
    }

    /// Neglected coherent-state probability (0 for Fock).
    pub fn tail_mass(&self) -> f64 {
        match *self {
            PhiSpec::Fock { .. } => 0.0,
            PhiSpec::CoherentTimesFock { z, truncation, .. } => {
                coherent_tail_mass(z.norm(), truncation)
            }
            PhiSpec::TwoModeCoherent {
                z_plus,
                z_minus,
                truncation,
            } => {
                let a = coherent_tail_mass(z_plus.norm(), truncation);
                let b = coherent_tail_mass(z_minus.norm(), truncation);
                a + b - a * b
            }
        }
    }

    /// `Φ|0>` over `space`, unnormalized for Fock (amplitude `sqrt(n!)` etc.)
    /// and with the coherent factors in their truncated exponential form.
    pub fn apply_to_vacuum(&self, space: &Arc<ModeSpace>) -> Result<FockVector> {
        let plus = space
            .photon_index(Polarization::Plus)
            .ok_or_else(|| Error::UnknownMode("a+".into()))?;
        let minus = space
            .photon_index(Polarization::Minus)
            .ok_or_else(|| Error::UnknownMode("a-".into()))?;
        let fact_sqrt = |n: u32| (1..=n).map(|k| f64::from(k).sqrt()).product::<f64>();
        let put = |v: &mut FockVector, np: u32, nm: u32, amp: Complex64| -> Result<()> {
            if np > 255 || nm > 255 {
                return Err(Error::CapOverflow {
                    mode: "photon".into(),
                    requested: np.max(nm),
                    cap: 255,
                });
            }
            let mut occ = space.vacuum();
            occ.0[plus] = np as u8;
            occ.0[minus] = nm as u8;
            v.insert(occ, amp);
            Ok(())
        };
        let mut v = FockVector::zero(space.clone());
        match *self {
            PhiSpec::Fock { plus: p, minus: m } => {
                put(
                    &mut v,
                    p,
                    m,
                    Complex64::new(fact_sqrt(p) * fact_sqrt(m), 0.0),
                )?;
            }
            PhiSpec::CoherentTimesFock {
                z,
                m,
                weak,
                truncation,
            } => {
                let w = fact_sqrt(m);
                for (k, a) in coherent_amplitudes(z, truncation).into_iter().enumerate() {
                    let k = k as u32;
                    let (np, nm) = if weak == Polarization::Plus {
                        (m, k)
                    } else {
                        (k, m)
                    };
                    put(&mut v, np, nm, a * w)?;
                }
            }
            PhiSpec::TwoModeCoherent {
                z_plus,
                z_minus,
                truncation,
            } => {
                let ap = coherent_amplitudes(z_plus, truncation);
                let am = coherent_amplitudes(z_minus, truncation);
                for (i, a) in ap.iter().enumerate() {
                    for (k, b) in am.iter().enumerate() {
                        put(&mut v, i as u32, k as u32, a * b)?;
                    }
                }
            }
        }
        Ok(v)
    }
}

/// Photons beyond Φ required by N- and V-chain recipes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ExtraPhotons {
    #[default]
    None,
    /// `(a^+_c)^m` in the constrained mode of an N-chain.
    Constrained { m: u32 },
    /// `(a^+_+)^m (a^+_-)^{m'}` for a V-chain.
    Pair { m: u32, mprime: u32 },
}

#[derive(Clone, Debug, Serialize)]
pub struct GdsRecipe {
    pub chain: Chain,
    pub algebra: Algebra,
    /// Power of Ψ_NC(p) for every momentum class `p`.
    pub n_per_class: Vec<u32>,
    pub phi: PhiSpec,
    pub extra: ExtraPhotons,
}

impl GdsRecipe {
    pub fn new(chain: Chain, algebra: Algebra, n_per_class: Vec<u32>, phi: PhiSpec) -> Self {
        GdsRecipe {
            chain,
            algebra,
            n_per_class,
            phi,
            extra: ExtraPhotons::None,
        }
    }

    pub fn with_extra(mut self, extra: ExtraPhotons) -> Self {
        self.extra = extra;
        self
    }

    pub fn classes(&self) -> u32 {
        self.n_per_class.len().max(1) as u32
    }

    pub fn atoms(&self) -> u32 {
        self.n_per_class.iter().sum()
    }

    fn check_statistics(&self) -> Result<()> {
        if self.algebra.statistics == Statistics::Fermi && self.n_per_class.iter().any(|&n| n > 1) {
            return Err(Error::ConstraintViolation(
                "fermionic atoms allow only n = 0 or 1 per momentum class".into(),
            ));
        }
        Ok(())
    }
}

/// A built dark state with its bookkeeping.
#[derive(Clone, Debug)]
pub struct GdsState {
    pub state: StateVector,
    pub raw_norm: f64,
    pub tail_mass: f64,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl GdsState {
    pub fn record(&self) -> StateRecord {
        StateRecord::from_state(&self.state, self.metadata.clone())
    }

    pub fn fock(&self) -> FockVector {
        self.state.to_fock()
    }
}

/// `Π_p Ψ_NC(p)^{n_p}` applied to `start`.
fn apply_psi_powers(
    chain: &Chain,
    n_per_class: &[u32],
    start: FockVector,
    exec: Execution,
) -> Result<FockVector> {
    let terms = psi_terms(chain)?;
    let mut v = start;
    for (class, &n) in n_per_class.iter().enumerate() {
        let psi = psi_from_terms(&terms, |t| t.coeff.to_f64(), class as u32);
        for _ in 0..n {
            v = v.apply_with(&psi, exec)?;
        }
    }
    Ok(v)
}

fn photon_power(v: FockVector, s: Polarization, m: u32) -> Result<FockVector> {
    let op = OperatorPolynomial::create(ModeId::photon(s)).pow(m);
    v.apply(&op)
}

/// Smallest sector holding every configuration of `v`: zero excited atoms,
/// photon caps at the largest occupations present, and the photon-plus-excited
/// number and helicity fixed whenever they are uniform over the support.
pub fn enclosing_sector(v: &FockVector) -> SectorSpec {
    let space = v.space();
    let occs: Vec<&Occupation> = v.amplitudes().keys().collect();
    let cap = |s| occs.iter().map(|o| o.photons(space, s)).max().unwrap_or(0);
    let atoms = occs.first().map_or(0, |o| o.atoms(space));
    let mut spec =
        SectorSpec::new(atoms, cap(Polarization::Plus), cap(Polarization::Minus)).zero_excited();
    let uniform = |f: &dyn Fn(&Occupation) -> i64| occs.windows(2).all(|w| f(w[0]) == f(w[1]));
    if let Some(first) = occs.first() {
        if uniform(&|o| i64::from(o.excitations(space))) {
            spec = spec.with_excitations(first.excitations(space));
        }
        if uniform(&|o| i64::from(o.twice_helicity(space))) {
            spec = spec.with_helicity(first.twice_helicity(space));
        }
    }
    spec
}

fn finish(
    v: FockVector,
    tail_mass: f64,
    recipe_echo: serde_json::Value,
    context: &str,
) -> Result<GdsState> {
    let raw_norm = v.norm();
    if raw_norm < ZERO_NORM {
        return Err(Error::ZeroState(context.to_string()));
    }
    let spec = enclosing_sector(&v);
    let basis = Arc::new(Basis::enumerate(v.space().clone(), &spec)?);
    let state = StateVector::from_fock(basis, &v)?.normalized()?;
    let mut metadata = BTreeMap::new();
    metadata.insert("recipe".to_string(), recipe_echo);
    metadata.insert("norm_before_normalization".to_string(), json!(raw_norm));
    metadata.insert("truncation_tail_mass".to_string(), json!(tail_mass));
    Ok(GdsState {
        state,
        raw_norm,
        tail_mass,
        metadata,
    })
}

fn chain_space(recipe: &GdsRecipe) -> Arc<ModeSpace> {
    Arc::new(ModeSpace::for_chain(
        &recipe.chain,
        recipe.classes(),
        recipe.algebra,
    ))
}

/// `[Π_p Ψ_NC(p)^{n_p}] Φ |0>` for a Λ-chain.
pub fn build_lambda_gds(recipe: &GdsRecipe, exec: Execution) -> Result<GdsState> {
    if recipe.chain.kind != ChainKind::Lambda {
        return Err(Error::ChainMismatch(format!(
            "expected a Lambda chain, got {}",
            recipe.chain.kind
        )));
    }
    recipe.check_statistics()?;
    let space = chain_space(recipe);
    let phi = recipe.phi.apply_to_vacuum(&space)?;
    let v = apply_psi_powers(&recipe.chain, &recipe.n_per_class, phi, exec)?;
    finish(
        v,
        recipe.phi.tail_mass(),
        serde_json::to_value(recipe)?,
        "Ψ_NC powers annihilate Φ|0>",
    )
}

/// The constrained photon mode of an N-chain: `+` for N+, `-` for N-.
pub fn constrained_polarization(chain: &Chain) -> Result<Polarization> {
    match chain.kind {
        ChainKind::NPlus => Ok(Polarization::Plus),
        ChainKind::NMinus => Ok(Polarization::Minus),
        k => Err(Error::ChainMismatch(format!(
            "expected an N chain, got {k}"
        ))),
    }
}

/// `[Π_p Ψ_NC(p)^{n_p}] (a^+_c)^m Φ{a^+_{-c}} |0>` for an N-chain, `m ≤ L`.
pub fn build_n_gds(recipe: &GdsRecipe, exec: Execution) -> Result<GdsState> {
    let c = constrained_polarization(&recipe.chain)?;
    recipe.check_statistics()?;
    let m = match recipe.extra {
        ExtraPhotons::Constrained { m } => m,
        ExtraPhotons::None => 0,
        ExtraPhotons::Pair { .. } => {
            return Err(Error::ConstraintViolation(
                "N chains take a single constrained photon number".into(),
            ))
        }
    };
    let in_phi = recipe.phi.fixed_count(c).ok_or_else(|| {
        Error::ConstraintViolation(format!(
            "Φ must not populate the constrained {} mode with a coherent state",
            c.symbol()
        ))
    })?;
    let total = m + in_phi;
    let l = recipe.chain.links;
    if total > l {
        return Err(Error::ConstraintViolation(format!(
            "no dark state: constrained-mode photon number m = {total} exceeds L = {l}; require (m ≤ L)"
        )));
    }
    let space = chain_space(recipe);
    let phi = photon_power(recipe.phi.apply_to_vacuum(&space)?, c, m)?;
    let v = apply_psi_powers(&recipe.chain, &recipe.n_per_class, phi, exec)?;
    finish(
        v,
        recipe.phi.tail_mass(),
        serde_json::to_value(recipe)?,
        "Ψ_NC powers annihilate the photon state",
    )
}

/// `Ψ_NC (a^+_+)^m (a^+_-)^{m'} |0>` with one atom on a V-chain.
pub fn build_v_gds(
    chain: &Chain,
    algebra: Algebra,
    m: u32,
    mprime: u32,
    exec: Execution,
) -> Result<GdsState> {
    if chain.kind != ChainKind::V {
        return Err(Error::ChainMismatch(format!(
            "expected a V chain, got {}",
            chain.kind
        )));
    }
    let l = chain.links;
    if m > l || mprime > l {
        return Err(Error::ConstraintViolation(format!(
            "no dark state: m = {m}, m′ = {mprime} with L = {l}; require (m,m′ ≤ L)"
        )));
    }
    if m + mprime <= l {
        return Err(Error::ZeroState(format!(
            "m + m′ = {} ≤ L = {l}: no photon survives; a nontrivial state needs (m+m′) > L",
            m + mprime
        )));
    }
    let recipe = GdsRecipe::new(
        chain.clone(),
        algebra,
        vec![1],
        PhiSpec::Fock {
            plus: m,
            minus: mprime,
        },
    )
    .with_extra(ExtraPhotons::Pair { m, mprime });
    let space = chain_space(&recipe);
    let phi = recipe.phi.apply_to_vacuum(&space)?;
    let v = apply_psi_powers(chain, &[1], phi, exec)?;
    finish(
        v,
        0.0,
        serde_json::to_value(&recipe)?,
        "Ψ_NC annihilates the photon state",
    )
}

/// Outcome of applying `Ψ_NC^n` to `(a^+_+)^m (a^+_-)^{m'} |0>` on a V-chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vanishing {
    pub n: u32,
    pub m: u32,
    pub mprime: u32,
    pub norm: f64,
    pub vanishes: bool,
    /// `<n_+ + n_->` of the normalized result, 0 when it vanishes.
    pub mean_photons: f64,
}

pub fn vanishing_check(
    chain: &Chain,
    algebra: Algebra,
    n: u32,
    m: u32,
    mprime: u32,
) -> Result<Vanishing> {
    if chain.kind != ChainKind::V {
        return Err(Error::ChainMismatch(format!(
            "expected a V chain, got {}",
            chain.kind
        )));
    }
    let space = Arc::new(ModeSpace::for_chain(chain, 1, algebra));
    let phi = PhiSpec::Fock {
        plus: m,
        minus: mprime,
    }
    .apply_to_vacuum(&space)?;
    let v = apply_psi_powers(chain, &[n], phi, Execution::Sequential)?;
    let norm = v.norm();
    let vanishes = norm < ZERO_NORM;
    let mean_photons = if vanishes {
        0.0
    } else {
        v.mean_photons(Polarization::Plus) + v.mean_photons(Polarization::Minus)
    };
    Ok(Vanishing {
        n,
        m,
        mprime,
        norm,
        vanishes,
        mean_photons,
    })
}

/// Polariton parameters: `Ψ_NC^n (a^+_weak)^m exp(Z a^+_strong) |0>` on an
/// `L = 1` Λ-chain.
#[derive(Clone, Debug, Serialize)]
pub struct PolaritonSpec {
    pub n: u32,
    pub m: u32,
    pub z: Complex64,
    pub weak: Polarization,
    pub truncation: u32,
    /// Replace both coupling magnitudes by `sqrt((G_1^2 + G_3^2)/2)` before
    /// forming Ψ_NC.
    pub force_equal_g: bool,
}

/// The chain with every coupling magnitude replaced by the root mean square of
/// the magnitudes. Signs are kept.
pub fn equalize_couplings(chain: &Chain) -> Chain {
    let mut mean = num_rational::BigRational::from_integer(0.into());
    for c in &chain.couplings {
        mean += c.g.square().clone();
    }
    let k = num_rational::BigRational::from_integer((chain.couplings.len().max(1) as i64).into());
    let common = mean / k;
    let mut out = chain.clone();
    for c in &mut out.couplings {
        c.g = ExactCG::from_signed_square(c.g.sign(), common.clone());
    }
    out
}

pub fn build_polariton(
    chain: &Chain,
    algebra: Algebra,
    spec: &PolaritonSpec,
    exec: Execution,
) -> Result<GdsState> {
    if chain.kind != ChainKind::Lambda || chain.links != 1 {
        return Err(Error::ChainMismatch(format!(
            "polaritons need a Lambda chain with L = 1, got {} with L = {}",
            chain.kind, chain.links
        )));
    }
    let phi = PhiSpec::CoherentTimesFock {
        z: spec.z,
        m: spec.m,
        weak: spec.weak,
        truncation: spec.truncation,
    };
    let tail = phi.tail_mass();
    if tail > TAIL_LIMIT {
        return Err(Error::TruncationTooSmall {
            tail_mass: tail,
            limit: TAIL_LIMIT,
        });
    }
    let chain = if spec.force_equal_g {
        equalize_couplings(chain)
    } else {
        chain.clone()
    };
    let recipe = GdsRecipe::new(chain, algebra, vec![spec.n], phi);
    recipe.check_statistics()?;
    let space = chain_space(&recipe);
    let start = recipe.phi.apply_to_vacuum(&space)?;
    let v = apply_psi_powers(&recipe.chain, &recipe.n_per_class, start, exec)?;
    let mut out = finish(
        v,
        tail,
        serde_json::to_value(&recipe)?,
        "Ψ_NC powers annihilate the photon state",
    )?;
    out.metadata.insert(
        "truncation_bound".into(),
        json!(coherent_truncation_bound(spec.z.norm(), spec.truncation)),
    );
    out.metadata
        .insert("polariton".into(), serde_json::to_value(spec)?);
    Ok(out)
}

/// Population of every chain ground site in a state (sum over classes).
pub fn ground_populations(chain: &Chain, v: &FockVector) -> Vec<(u32, f64)> {
    let space = v.space();
    let n2 = v.norm().powi(2);
    chain
        .sites
        .iter()
        .filter(|s| s.role == SiteRole::Ground)
        .map(|s| {
            let idx: Vec<usize> = space
                .modes()
                .iter()
                .enumerate()
                .filter(|(_, m)| matches!(m, ModeId::Ground { mu, .. } if *mu == s.mu))
                .map(|(i, _)| i)
                .collect();
            let pop = v.expectation(|o| idx.iter().map(|&i| f64::from(o.get(i))).sum());
            (s.label, if n2 > 0.0 { pop / n2 } else { 0.0 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::decompose_chains;

    fn chains(t: &str) -> Vec<Chain> {
        decompose_chains(t.parse().unwrap()).unwrap()
    }

    fn first(t: &str, kind: ChainKind) -> Chain {
        chains(t).into_iter().find(|c| c.kind == kind).unwrap()
    }

    #[test]
    fn psi_single_link() {
        let chain = first("2:1", ChainKind::Lambda);
        let terms = psi_terms(&chain).unwrap();
        let l = chain.links;
        assert_eq!(terms.len(), l as usize + 1);
        let c = first("1:1", ChainKind::Lambda);
        let t = psi_terms(&c).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].coeff, c.g(2, 3).unwrap().clone());
        assert_eq!(t[1].coeff, -c.g(2, 1).unwrap().clone());
        assert_eq!((t[0].plus_power, t[0].minus_power), (0, 1));
        assert_eq!((t[1].plus_power, t[1].minus_power), (1, 0));
    }

    #[test]
    fn psi_without_links_is_bare_creator() {
        let v = first("1:2", ChainKind::V);
        let center = chains("1:2")
            .into_iter()
            .find(|c| c.kind == ChainKind::V && c.links == 0)
            .unwrap();
        assert!(v.links >= 1 || center.links == 0);
        let t = psi_terms(&center).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].coeff, ExactCG::one());
    }

    #[test]
    fn tail_mass_values() {
        let t = coherent_tail_mass(1.0, 12);
        assert!(t > 6.0e-11 && t < 7.0e-11, "{t}");
        assert!((coherent_tail_mass(1.0, 0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!(coherent_tail_mass(0.0, 0) == 0.0);
    }

    #[test]
    fn fock_phi_only() {
        let chain = first("2:1", ChainKind::Lambda);
        let r = GdsRecipe::new(
            chain,
            Algebra::bose(),
            vec![0],
            PhiSpec::Fock { plus: 2, minus: 1 },
        );
        let out = build_lambda_gds(&r, Execution::Sequential).unwrap();
        assert_eq!(out.state.basis().len(), 1);
        assert!((out.raw_norm - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn n_gds_rejects_m_above_l() {
        let chain = first("3/2:3/2", ChainKind::NPlus);
        let r = GdsRecipe::new(
            chain,
            Algebra::fermi(),
            vec![1],
            PhiSpec::Fock { plus: 0, minus: 3 },
        )
        .with_extra(ExtraPhotons::Constrained { m: 2 });
        let err = build_n_gds(&r, Execution::Sequential).unwrap_err();
        assert!(err.to_string().contains("(m ≤ L)"));
    }

    #[test]
    fn v_gds_boundaries() {
        let chain = chains("1:2")
            .into_iter()
            .find(|c| c.kind == ChainKind::V && c.links == 1)
            .unwrap();
        let e = build_v_gds(&chain, Algebra::bose(), 1, 0, Execution::Sequential).unwrap_err();
        assert!(matches!(e, Error::ZeroState(_)));
        assert!(e.to_string().contains("(m+m′) > L"));
        assert!(matches!(
            build_v_gds(&chain, Algebra::bose(), 2, 1, Execution::Sequential),
            Err(Error::ConstraintViolation(_))
        ));
        let s = build_v_gds(&chain, Algebra::bose(), 1, 1, Execution::Sequential).unwrap();
        assert_eq!(s.fock().len(), 2);
    }
}
