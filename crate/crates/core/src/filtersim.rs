//! Quantum-jump trajectories of a few atoms exposed to the two photon modes.
//!
//! Between jumps the state follows
//! `H_eff = Δ N_e + V + V^+ - (i Γ / 2) N_e` with `Δ = ω0 - ω`, written in the
//! frame rotating at the field frequency. The dropped `ω (N_e + n_+ + n_-)`
//! term is a constant on every trajectory segment because that number only
//! changes at jumps. A jump `√Γ C b^+_{μg} c_{μe}` removes an excited atom and
//! the emitted photon leaves the system, so every jump lowers
//! `N_e + n_+ + n_-` by one.
//!
//! Time stepping is first order in the jump decision: each step jumps with
//! probability `Γ dt <N_e>`, otherwise the state is advanced by one RK4 step of
//! `H_eff` and renormalized.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::angular::{clebsch_gordan, HalfInt, Polarization, Transition};
use crate::error::{Error, Result};
use crate::fockspace::{
    materialize, Algebra, Basis, CsrMatrix, FockVector, ModeId, ModeSpace, Occupation,
    OperatorPolynomial, SectorSpec, StateVector, Statistics,
};
use crate::model::{build_v, excited_number, ModelConfig};
use crate::oracle::{self, DarkSubspaceReport};
use crate::par::{self, Execution};

/// Largest allowed `dt * ‖H_eff‖`.
pub const STEP_GUARD: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub transition: Transition,
    pub statistics: Statistics,
    /// Ground projection of each atom at `t = 0`.
    pub atom_mu: Vec<HalfInt>,
    pub n_plus: u32,
    pub n_minus: u32,
    /// The photon mode whose final occupation is reported.
    pub weak: Polarization,
    pub gamma: f64,
    pub rabi: f64,
    pub omega: f64,
    pub omega0: f64,
    pub t_max: f64,
    pub dt: f64,
    pub trajectories: u32,
    pub seed: u64,
    /// Record a time-series sample every this many steps.
    pub sample_every: u32,
    /// Darkness tolerance for the convergence flag.
    pub tolerance: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            transition: Transition::new(HalfInt::from_twice(3), HalfInt::from_twice(3))
                .expect("valid"),
            statistics: Statistics::Fermi,
            atom_mu: vec![HalfInt::from_twice(-3)],
            n_plus: 3,
            n_minus: 5,
            weak: Polarization::Plus,
            gamma: 1.0,
            rabi: 1.0,
            omega: 1.0,
            omega0: 1.0,
            t_max: 50.0,
            dt: 0.005,
            trajectories: 200,
            seed: 2024,
            sample_every: 100,
            tolerance: 1e-8,
        }
    }
}

const KEYS: &[&str] = &[
    "transition",
    "statistics",
    "atom_mu",
    "n_plus",
    "n_minus",
    "weak",
    "gamma",
    "rabi",
    "omega",
    "omega0",
    "t_max",
    "dt",
    "trajectories",
    "seed",
    "sample_every",
    "tolerance",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("bad value for {key}: {value:?}")))
}

impl FilterConfig {
    /// Parses `key = value` lines. `#` starts a comment; unknown keys are
    /// errors; missing keys keep their defaults. `statistics` defaults to the
    /// transition's natural choice when not given.
    pub fn from_kv_str(text: &str) -> Result<FilterConfig> {
        let mut cfg = FilterConfig::default();
        let mut statistics_given = false;
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), lineno).is_some() {
                return Err(Error::Parse(format!(
                    "line {}: duplicate key {key}",
                    lineno + 1
                )));
            }
            match key {
                "transition" => cfg.transition = parse_value(key, value)?,
                "statistics" => {
                    cfg.statistics = parse_value(key, value)?;
                    statistics_given = true;
                }
                "atom_mu" => {
                    cfg.atom_mu = if value.is_empty() {
                        Vec::new()
                    } else {
                        value
                            .split(',')
                            .map(|v| parse_value(key, v.trim()))
                            .collect::<Result<_>>()?
                    }
                }
                "n_plus" => cfg.n_plus = parse_value(key, value)?,
                "n_minus" => cfg.n_minus = parse_value(key, value)?,
                "weak" => cfg.weak = parse_value(key, value)?,
                "gamma" => cfg.gamma = parse_value(key, value)?,
                "rabi" => cfg.rabi = parse_value(key, value)?,
                "omega" => cfg.omega = parse_value(key, value)?,
                "omega0" => cfg.omega0 = parse_value(key, value)?,
                "t_max" => cfg.t_max = parse_value(key, value)?,
                "dt" => cfg.dt = parse_value(key, value)?,
                "trajectories" => cfg.trajectories = parse_value(key, value)?,
                "seed" => cfg.seed = parse_value(key, value)?,
                "sample_every" => cfg.sample_every = parse_value(key, value)?,
                "tolerance" => cfg.tolerance = parse_value(key, value)?,
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key {other:?} (known: {})",
                        lineno + 1,
                        KEYS.join(", ")
                    )))
                }
            }
        }
        if !statistics_given {
            cfg.statistics = Statistics::default_for(cfg.transition.fg);
        }
        Ok(cfg)
    }

    /// The inverse of [`FilterConfig::from_kv_str`].
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let mus: Vec<String> = self.atom_mu.iter().map(|m| m.to_string()).collect();
        let stat = match self.statistics {
            Statistics::Bose => "bose",
            Statistics::Fermi => "fermi",
        };
        let _ = writeln!(s, "transition = {}", self.transition);
        let _ = writeln!(s, "statistics = {stat}");
        let _ = writeln!(s, "atom_mu = {}", mus.join(","));
        let _ = writeln!(s, "n_plus = {}", self.n_plus);
        let _ = writeln!(s, "n_minus = {}", self.n_minus);
        let _ = writeln!(s, "weak = {}", self.weak.symbol());
        let _ = writeln!(s, "gamma = {:?}", self.gamma);
        let _ = writeln!(s, "rabi = {:?}", self.rabi);
        let _ = writeln!(s, "omega = {:?}", self.omega);
        let _ = writeln!(s, "omega0 = {:?}", self.omega0);
        let _ = writeln!(s, "t_max = {:?}", self.t_max);
        let _ = writeln!(s, "dt = {:?}", self.dt);
        let _ = writeln!(s, "trajectories = {}", self.trajectories);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "sample_every = {}", self.sample_every);
        let _ = writeln!(s, "tolerance = {:?}", self.tolerance);
        s
    }

    pub fn model(&self) -> ModelConfig {
        ModelConfig::new(self.transition)
            .with_algebra(Algebra::new(self.statistics))
            .with_rabi(self.rabi)
            .with_frequencies(self.omega0, self.omega)
    }

    fn validate(&self) -> Result<()> {
        if self.trajectories == 0 {
            return Err(Error::Config("trajectories must be at least 1".into()));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite")))
            }
        };
        positive("gamma", self.gamma)?;
        positive("dt", self.dt)?;
        positive("tolerance", self.tolerance)?;
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::Config(
                "t_max must be non-negative and finite".into(),
            ));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be at least 1".into()));
        }
        for mu in &self.atom_mu {
            if mu.twice().abs() > self.transition.fg.twice()
                || (mu.twice() - self.transition.fg.twice()) % 2 != 0
            {
                return Err(Error::Config(format!(
                    "atom_mu {mu} is not a projection of F_g = {}",
                    self.transition.fg
                )));
            }
        }
        self.model().validate()
    }
}

/// One spontaneous decay channel `√Γ C b^+_{μg} c_{μe}` with `q = μe - μg`.
#[derive(Clone, Debug)]
struct Channel {
    mu_e: HalfInt,
    mu_g: HalfInt,
    q: i32,
    op: CsrMatrix,
}

/// Everything a trajectory needs, shared across the ensemble.
pub struct FilterSystem {
    pub cfg: FilterConfig,
    pub model: ModelConfig,
    pub basis: Arc<Basis>,
    h_eff: CsrMatrix,
    v: CsrMatrix,
    excited: Vec<f64>,
    weak: Vec<u32>,
    channels: Vec<Channel>,
    initial: Vec<Complex64>,
    pub h_bound: f64,
}

impl FilterSystem {
    pub fn new(cfg: &FilterConfig) -> Result<FilterSystem> {
        cfg.validate()?;
        let model = cfg.model();
        let space: Arc<ModeSpace> = model.mode_space();
        let mut initial_occ = space.vacuum();
        for mu in &cfg.atom_mu {
            let idx = space
                .index(&ModeId::ground(0, *mu))
                .expect("validated projection");
            initial_occ.0[idx] += 1;
        }
        initial_occ.0[space.photon_index(Polarization::Plus).expect("photon mode")] =
            cfg.n_plus as u8;
        initial_occ.0[space
            .photon_index(Polarization::Minus)
            .expect("photon mode")] = cfg.n_minus as u8;
        let doubled = space
            .modes()
            .iter()
            .zip(&initial_occ.0)
            .any(|(m, &n)| m.is_atomic() && n > 1);
        if model.algebra.statistics == Statistics::Fermi && doubled {
            return Err(Error::Config(
                "fermionic atoms cannot share a ground substate".into(),
            ));
        }

        let v = build_v(&model)?;
        let jump_ops = jump_operators(cfg)?;
        let mut generators = v.add(&v.adjoint());
        for (_, _, _, op) in &jump_ops {
            generators = generators.add(op);
        }
        let limit = SectorSpec::new(0, 0, 0).capacity;
        let basis = Arc::new(reachable_basis(
            space.clone(),
            initial_occ.clone(),
            &generators,
            limit,
        )?);
        let start = basis
            .index_of(&initial_occ)
            .expect("initial configuration is reachable");
        let mut initial = vec![Complex64::new(0.0, 0.0); basis.len()];
        initial[start] = Complex64::new(1.0, 0.0);

        let exec = Execution::Sequential;
        let ne = excited_number(&model);
        let detuning = cfg.omega0 - cfg.omega;
        let h = v
            .add(&v.adjoint())
            .add(&ne.scale(Complex64::new(detuning, -cfg.gamma / 2.0)));
        let h_mat = materialize(&h, &basis, &basis, exec)?.to_csr();
        let h_bound = h_mat.max_row_sum();
        if cfg.dt * h_bound > STEP_GUARD {
            return Err(Error::Config(format!(
                "step too large: dt * ‖H_eff‖ = {:.4} > {STEP_GUARD}; use dt ≤ {:.3e}",
                cfg.dt * h_bound,
                STEP_GUARD / h_bound
            )));
        }
        let v_mat = materialize(&v, &basis, &basis, exec)?.to_csr();

        let mut channels = Vec::with_capacity(jump_ops.len());
        for (mu_e, mu_g, q, op) in jump_ops {
            let mat = materialize(&op, &basis, &basis, exec)?.to_csr();
            channels.push(Channel {
                mu_e,
                mu_g,
                q,
                op: mat,
            });
        }

        let weak_idx = space.photon_index(cfg.weak).expect("photon mode");
        let excited = basis
            .states()
            .iter()
            .map(|o| f64::from(o.excited(&space)))
            .collect();
        let weak = basis
            .states()
            .iter()
            .map(|o| u32::from(o.get(weak_idx)))
            .collect();
        Ok(FilterSystem {
            cfg: cfg.clone(),
            model,
            basis,
            h_eff: h_mat,
            v: v_mat,
            excited,
            weak,
            channels,
            initial,
            h_bound,
        })
    }

    /// Replaces the initial configuration by an arbitrary state whose support
    /// lies in the reachable basis. The state is normalized.
    pub fn set_initial_state(&mut self, v: &FockVector) -> Result<()> {
        let mapped = v.remap(self.basis.space().clone())?;
        let state = StateVector::from_fock(self.basis.clone(), &mapped)?.normalized()?;
        self.initial = state.amplitudes().to_vec();
        Ok(())
    }

    fn mean_excited(&self, psi: &[Complex64]) -> f64 {
        psi.iter()
            .zip(&self.excited)
            .map(|(a, n)| a.norm_sqr() * n)
            .sum()
    }

    fn mean_weak(&self, psi: &[Complex64]) -> f64 {
        psi.iter()
            .zip(&self.weak)
            .map(|(a, &n)| a.norm_sqr() * f64::from(n))
            .sum()
    }

    fn residual(&self, psi: &[Complex64], scratch: &mut [Complex64]) -> f64 {
        self.v.mul_into(psi, scratch);
        norm(scratch)
    }

    fn rk4(&self, psi: &mut [Complex64], k: &mut [Vec<Complex64>; 5]) {
        let dt = self.cfg.dt;
        let minus_i = Complex64::new(0.0, -1.0);
        let n = psi.len();
        let [k1, k2, k3, k4, tmp] = k;
        self.h_eff.mul_into(psi, k1);
        k1.iter_mut().for_each(|x| *x *= minus_i);
        for i in 0..n {
            tmp[i] = psi[i] + k1[i] * (dt / 2.0);
        }
        self.h_eff.mul_into(tmp, k2);
        k2.iter_mut().for_each(|x| *x *= minus_i);
        for i in 0..n {
            tmp[i] = psi[i] + k2[i] * (dt / 2.0);
        }
        self.h_eff.mul_into(tmp, k3);
        k3.iter_mut().for_each(|x| *x *= minus_i);
        for i in 0..n {
            tmp[i] = psi[i] + k3[i] * dt;
        }
        self.h_eff.mul_into(tmp, k4);
        k4.iter_mut().for_each(|x| *x *= minus_i);
        for i in 0..n {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
        normalize(psi);
    }

    fn excitation_range(&self, psi: &[Complex64]) -> (u32, u32) {
        let space = self.basis.space();
        let vals = psi
            .iter()
            .zip(self.basis.states())
            .filter(|(a, _)| a.norm_sqr() > 1e-28)
            .map(|(_, o)| o.excitations(space));
        vals.fold((u32::MAX, 0), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    fn helicity_range(&self, psi: &[Complex64]) -> (i32, i32) {
        let space = self.basis.space();
        psi.iter()
            .zip(self.basis.states())
            .filter(|(a, _)| a.norm_sqr() > 1e-28)
            .map(|(_, o)| o.twice_helicity(space))
            .fold((i32::MAX, i32::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

type JumpOperator = (HalfInt, HalfInt, i32, OperatorPolynomial);

/// `√Γ C b^+_{μg} c_{μe}` for every allowed `(μe, μg)` pair, `q = μe - μg`.
fn jump_operators(cfg: &FilterConfig) -> Result<Vec<JumpOperator>> {
    let Transition { fg, fe } = cfg.transition;
    let mut out = Vec::new();
    for mu_e in fe.projections() {
        for mu_g in fg.projections() {
            let dq = (mu_e - mu_g).twice();
            if dq.abs() > 2 {
                continue;
            }
            let q = dq / 2;
            let cg = clebsch_gordan(
                fg,
                mu_g,
                HalfInt::from_int(1),
                HalfInt::from_int(q),
                fe,
                mu_e,
            )?;
            if cg.is_zero() {
                continue;
            }
            let op = OperatorPolynomial::create(ModeId::ground(0, mu_g))
                .mul(&OperatorPolynomial::annihilate(ModeId::excited(0, mu_e)))
                .scale(Complex64::new(cfg.gamma.sqrt() * cg.to_f64(), 0.0));
            out.push((mu_e, mu_g, q, op));
        }
    }
    Ok(out)
}

/// Every configuration connected to `start` by the monomials of `generators`.
fn reachable_basis(
    space: Arc<ModeSpace>,
    start: Occupation,
    generators: &OperatorPolynomial,
    limit: usize,
) -> Result<Basis> {
    let mut seen = std::collections::BTreeSet::new();
    let mut queue = vec![start.clone()];
    seen.insert(start);
    while let Some(occ) = queue.pop() {
        for term in &generators.terms {
            if let Some((next, _)) = term.apply(&space, &occ)? {
                if seen.insert(next.clone()) {
                    if seen.len() > limit {
                        return Err(Error::Capacity {
                            size: seen.len(),
                            limit,
                        });
                    }
                    queue.push(next);
                }
            }
        }
    }
    Ok(Basis::from_states(space, seen.into_iter().collect()))
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter()
        .map(|a| a.norm_sqr())
        .fold(0.0, |s, x| s + x)
        .sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|a| *a /= n);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Jump {
    pub t: f64,
    pub mu_e: HalfInt,
    pub mu_g: HalfInt,
    pub q: i32,
    /// `N_e + n_+ + n_-` before and after (each uniform over the state).
    pub excitations_before: u32,
    pub excitations_after: u32,
    /// Doubled helicity before and after.
    pub helicity_before: i32,
    pub helicity_after: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub residual: f64,
    pub mean_weak: f64,
    pub mean_excited: f64,
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub index: u32,
    pub jumps: Vec<Jump>,
    pub samples: Vec<Sample>,
    pub final_state: StateVector,
    /// `P(n_weak = k)` for `k = 0..=cap`.
    pub final_weak_distribution: Vec<f64>,
    pub final_residual: f64,
    pub final_excited: f64,
    /// Time at which the state became exactly stationary, if it did.
    pub stationary_at: Option<f64>,
    /// Final state dark within the configured tolerance.
    pub converged: bool,
    /// Residual samples after the last jump never increase.
    pub monotone_after_last_jump: bool,
    /// Every jump lowered the excitation number by exactly one.
    pub exact_excitation_loss: bool,
    /// Every jump changed the doubled helicity by `-2q`.
    pub helicity_bookkeeping: bool,
}

impl TrajectoryRecord {
    pub fn jump_count(&self) -> usize {
        self.jumps.len()
    }

    /// Largest weak-mode occupation carrying probability above `eps`.
    pub fn max_weak_support(&self, eps: f64) -> u32 {
        self.final_weak_distribution
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > eps)
            .map(|(k, _)| k as u32)
            .max()
            .unwrap_or(0)
    }
}

/// Runs trajectory `index`; its random stream is `(cfg.seed, index)`.
pub fn run_trajectory(sys: &FilterSystem, index: u32) -> Result<TrajectoryRecord> {
    let cfg = &sys.cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::from(index));
    let n = sys.basis.len();
    let mut psi = sys.initial.clone();
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut k: [Vec<Complex64>; 5] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]);
    let steps = (cfg.t_max / cfg.dt).round() as u64;
    let mut jumps = Vec::new();
    let mut samples = Vec::new();
    let mut stationary_at = None;
    let mut exact_loss = true;
    let mut helicity_ok = true;
    let mut last_jump_sample = 0usize;

    let sample = |psi: &[Complex64], t: f64, scratch: &mut [Complex64]| Sample {
        t,
        residual: sys.residual(psi, scratch),
        mean_weak: sys.mean_weak(psi),
        mean_excited: sys.mean_excited(psi),
    };
    samples.push(sample(&psi, 0.0, &mut scratch));

    for step in 0..steps {
        let t = (step + 1) as f64 * cfg.dt;
        let ne = sys.mean_excited(&psi);
        let p_jump = cfg.gamma * cfg.dt * ne;
        let r: f64 = rng.random();
        if r < p_jump {
            let weights: Vec<f64> = sys
                .channels
                .iter()
                .map(|c| {
                    c.op.mul_into(&psi, &mut scratch);
                    norm(&scratch).powi(2)
                })
                .collect();
            let total: f64 = weights.iter().sum();
            let mut pick: f64 = rng.random::<f64>() * total;
            let mut chosen = weights.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if pick < *w {
                    chosen = i;
                    break;
                }
                pick -= w;
            }
            let ch = &sys.channels[chosen];
            let (exc_lo, exc_hi) = sys.excitation_range(&psi);
            let (hel_lo, hel_hi) = sys.helicity_range(&psi);
            ch.op.mul_into(&psi, &mut scratch);
            psi.copy_from_slice(&scratch);
            normalize(&mut psi);
            let (after_lo, after_hi) = sys.excitation_range(&psi);
            let (hel_after_lo, hel_after_hi) = sys.helicity_range(&psi);
            if exc_lo != exc_hi || after_lo != after_hi || after_lo + 1 != exc_lo {
                exact_loss = false;
            }
            if hel_lo != hel_hi || hel_after_lo != hel_after_hi || hel_after_lo != hel_lo - 2 * ch.q
            {
                helicity_ok = false;
            }
            jumps.push(Jump {
                t,
                mu_e: ch.mu_e,
                mu_g: ch.mu_g,
                q: ch.q,
                excitations_before: exc_hi,
                excitations_after: after_hi,
                helicity_before: hel_hi,
                helicity_after: hel_after_hi,
            });
            samples.push(sample(&psi, t, &mut scratch));
            last_jump_sample = samples.len() - 1;
            continue;
        }
        sys.rk4(&mut psi, &mut k);
        if (step + 1) % u64::from(cfg.sample_every) == 0 || step + 1 == steps {
            let s = sample(&psi, t, &mut scratch);
            let stationary = s.residual == 0.0 && s.mean_excited == 0.0;
            samples.push(s);
            if stationary {
                stationary_at = Some(t);
                break;
            }
        }
    }

    let final_residual = sys.residual(&psi, &mut scratch);
    let final_excited = sys.mean_excited(&psi);
    let cap = sys.weak.iter().copied().max().unwrap_or(0);
    let mut dist = vec![0.0; cap as usize + 1];
    for (a, &w) in psi.iter().zip(&sys.weak) {
        dist[w as usize] += a.norm_sqr();
    }
    let monotone = samples[last_jump_sample..]
        .windows(2)
        .all(|w| w[1].residual <= w[0].residual * (1.0 + 1e-9) + 1e-300);
    let final_state = StateVector::new(sys.basis.clone(), psi)?;
    Ok(TrajectoryRecord {
        index,
        jumps,
        samples,
        final_state,
        final_weak_distribution: dist,
        final_residual,
        final_excited,
        stationary_at,
        converged: final_residual <= cfg.tolerance && final_excited <= cfg.tolerance,
        monotone_after_last_jump: monotone,
        exact_excitation_loss: exact_loss,
        helicity_bookkeeping: helicity_ok,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleSummary {
    pub schema_version: u32,
    pub config: FilterConfig,
    pub trajectories: u32,
    pub converged: u32,
    pub convergence_fraction: f64,
    pub mean_jumps: f64,
    pub jump_counts: Vec<usize>,
    /// Average final `P(n_weak = k)` over all trajectories.
    pub weak_histogram: Vec<f64>,
    /// Same, over converged trajectories only.
    pub weak_histogram_converged: Vec<f64>,
    /// Converged endpoints that pass an independent darkness check.
    pub converged_dark: u32,
    /// Converged endpoints inside the brute-force dark subspace.
    pub converged_in_dark_subspace: u32,
    pub all_jumps_exact: bool,
    pub all_helicity_consistent: bool,
    pub monotone_after_last_jump: u32,
    pub max_final_residual: f64,
    pub median_final_residual: f64,
}

pub struct Ensemble {
    pub records: Vec<TrajectoryRecord>,
    pub summary: EnsembleSummary,
}

/// Dark subspace of the zero-excited states reachable by the filter, for
/// containment checks of endpoints.
pub fn endpoint_dark_subspace(sys: &FilterSystem, exec: Execution) -> Result<DarkSubspaceReport> {
    let space = sys.basis.space();
    let cap = |p| {
        sys.basis
            .states()
            .iter()
            .map(|o| o.photons(space, p))
            .max()
            .unwrap_or(0)
    };
    let spec = SectorSpec::new(
        sys.cfg.atom_mu.len() as u32,
        cap(Polarization::Plus),
        cap(Polarization::Minus),
    )
    .with_max_excitations(sys.cfg.n_plus + sys.cfg.n_minus);
    oracle::dark_subspace(&sys.model, sys.basis.space().clone(), &spec, exec)
}

pub fn run_ensemble(cfg: &FilterConfig, exec: Execution) -> Result<Ensemble> {
    run_ensemble_on(&FilterSystem::new(cfg)?, exec)
}

/// Ensemble over a prepared system, e.g. one with a custom initial state.
pub fn run_ensemble_on(sys: &FilterSystem, exec: Execution) -> Result<Ensemble> {
    let cfg = &sys.cfg;
    let records = par::map_range(exec, cfg.trajectories as usize, |i| {
        run_trajectory(sys, i as u32)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let report = endpoint_dark_subspace(sys, exec)?;
    let mut converged_dark = 0;
    let mut in_subspace = 0;
    for r in records.iter().filter(|r| r.converged) {
        let fock = r.final_state.to_fock();
        if oracle::is_dark(&sys.model, &fock, cfg.tolerance)?.dark {
            converged_dark += 1;
        }
        if oracle::projection_defect(&zero_excited_part(&fock), &report)? <= cfg.tolerance {
            in_subspace += 1;
        }
    }
    let summary = summarize(cfg, &records, converged_dark, in_subspace);
    Ok(Ensemble { records, summary })
}

/// The state with excited configurations dropped, mapped onto the same modes.
pub fn zero_excited_part(v: &FockVector) -> FockVector {
    let space = v.space().clone();
    let mut out = FockVector::zero(space.clone());
    for (occ, a) in v.amplitudes() {
        if occ.excited(&space) == 0 {
            out.insert(occ.clone(), *a);
        }
    }
    if out.is_empty() {
        out = v.clone();
    }
    out
}

fn summarize(
    cfg: &FilterConfig,
    records: &[TrajectoryRecord],
    converged_dark: u32,
    in_subspace: u32,
) -> EnsembleSummary {
    let n = records.len().max(1) as f64;
    let cap = records
        .first()
        .map_or(0, |r| r.final_weak_distribution.len());
    let mut hist = vec![0.0; cap];
    let mut hist_conv = vec![0.0; cap];
    let converged: Vec<&TrajectoryRecord> = records.iter().filter(|r| r.converged).collect();
    for r in records {
        for (h, p) in hist.iter_mut().zip(&r.final_weak_distribution) {
            *h += p / n;
        }
    }
    for r in &converged {
        for (h, p) in hist_conv.iter_mut().zip(&r.final_weak_distribution) {
            *h += p / converged.len() as f64;
        }
    }
    let jump_counts: Vec<usize> = records.iter().map(|r| r.jumps.len()).collect();
    let mut residuals: Vec<f64> = records.iter().map(|r| r.final_residual).collect();
    residuals.sort_by(f64::total_cmp);
    EnsembleSummary {
        schema_version: crate::SCHEMA_VERSION,
        config: cfg.clone(),
        trajectories: records.len() as u32,
        converged: converged.len() as u32,
        convergence_fraction: converged.len() as f64 / n,
        mean_jumps: jump_counts.iter().sum::<usize>() as f64 / n,
        jump_counts,
        weak_histogram: hist,
        weak_histogram_converged: hist_conv,
        converged_dark,
        converged_in_dark_subspace: in_subspace,
        all_jumps_exact: records.iter().all(|r| r.exact_excitation_loss),
        all_helicity_consistent: records.iter().all(|r| r.helicity_bookkeeping),
        monotone_after_last_jump: records
            .iter()
            .filter(|r| r.monotone_after_last_jump)
            .count() as u32,
        max_final_residual: residuals.last().copied().unwrap_or(0.0),
        median_final_residual: residuals.get(residuals.len() / 2).copied().unwrap_or(0.0),
    }
}

/// Time-series rows `(trajectory, t, residual, mean_weak, mean_excited)`.
pub fn time_series_rows(records: &[TrajectoryRecord]) -> Vec<(u32, Sample)> {
    records
        .iter()
        .flat_map(|r| r.samples.iter().map(move |s| (r.index, *s)))
        .collect()
}

/// Weak-mode occupation of a configuration, for external analysis.
pub fn weak_occupation(space: &ModeSpace, occ: &Occupation, weak: Polarization) -> u32 {
    occ.photons(space, weak)
}
