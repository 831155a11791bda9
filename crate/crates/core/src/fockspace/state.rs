use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Algebra, Basis, ModeId, ModeSpace, Occupation, OperatorPolynomial, Polarization};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A state as a sparse map from configurations to amplitudes, not tied to any
/// enumerated basis. Operator recipes are applied in this form.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    space: Arc<ModeSpace>,
    amps: BTreeMap<Occupation, Complex64>,
}

impl FockVector {
    pub fn zero(space: Arc<ModeSpace>) -> Self {
        FockVector {
            space,
            amps: BTreeMap::new(),
        }
    }

    /// The atom and photon vacuum with amplitude 1.
    pub fn vacuum(space: Arc<ModeSpace>) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(space.vacuum(), Complex64::new(1.0, 0.0));
        FockVector { space, amps }
    }

    pub fn basis_state(space: Arc<ModeSpace>, occ: Occupation) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(occ, Complex64::new(1.0, 0.0));
        FockVector { space, amps }
    }

    pub fn space(&self) -> &Arc<ModeSpace> {
        &self.space
    }

    pub fn amplitudes(&self) -> &BTreeMap<Occupation, Complex64> {
        &self.amps
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex64 {
        self.amps.get(occ).copied().unwrap_or(ZERO)
    }

    pub fn insert(&mut self, occ: Occupation, amp: Complex64) {
        *self.amps.entry(occ).or_insert(ZERO) += amp;
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amps
            .values()
            .map(|a| a.norm_sqr())
            .fold(0.0, |s, x| s + x)
            .sqrt()
    }

    /// Largest amplitude magnitude.
    pub fn max_abs(&self) -> f64 {
        self.amps.values().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, c: Complex64) {
        for a in self.amps.values_mut() {
            *a *= c;
        }
    }

    pub fn add_scaled(&mut self, other: &FockVector, c: Complex64) {
        for (occ, a) in &other.amps {
            self.insert(occ.clone(), a * c);
        }
    }

    /// Removes entries with `|amp| <= tol`.
    pub fn prune(&mut self, tol: f64) {
        self.amps.retain(|_, a| a.norm() > tol);
    }

    /// `<self|other>` over the union of supports.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amps
            .iter()
            .map(|(occ, a)| a.conj() * other.amplitude(occ))
            .sum()
    }

    pub fn apply(&self, poly: &OperatorPolynomial) -> Result<FockVector> {
        self.apply_with(poly, Execution::Sequential)
    }

    /// Applies `poly`. Contributions are computed per input configuration
    /// (optionally in parallel) and merged in configuration order.
    pub fn apply_with(&self, poly: &OperatorPolynomial, exec: Execution) -> Result<FockVector> {
        let entries: Vec<(&Occupation, &Complex64)> = self.amps.iter().collect();
        let pieces = par::map_slice(
            exec,
            &entries,
            |(occ, amp)| -> Result<Vec<(Occupation, Complex64)>> {
                let mut out = Vec::with_capacity(poly.len());
                for term in &poly.terms {
                    if let Some((next, factor)) = term.apply(&self.space, occ)? {
                        out.push((next, term.coeff * **amp * factor));
                    }
                }
                Ok(out)
            },
        );
        let mut result = FockVector::zero(self.space.clone());
        for piece in pieces {
            for (occ, amp) in piece? {
                result.insert(occ, amp);
            }
        }
        result.amps.retain(|_, a| *a != ZERO);
        Ok(result)
    }

    /// `sum |amp|^2 * f(config)`.
    pub fn expectation(&self, f: impl Fn(&Occupation) -> f64) -> f64 {
        self.amps.iter().map(|(occ, a)| a.norm_sqr() * f(occ)).sum()
    }

    pub fn mean_photons(&self, s: Polarization) -> f64 {
        let n2 = self.norm().powi(2);
        if n2 == 0.0 {
            return 0.0;
        }
        self.expectation(|o| f64::from(o.photons(&self.space, s))) / n2
    }

    pub fn mean_excited(&self) -> f64 {
        let n2 = self.norm().powi(2);
        if n2 == 0.0 {
            return 0.0;
        }
        self.expectation(|o| f64::from(o.excited(&self.space))) / n2
    }

    /// Re-expresses the vector over another mode space that contains every
    /// occupied mode.
    pub fn remap(&self, target: Arc<ModeSpace>) -> Result<FockVector> {
        let mut out = FockVector::zero(target.clone());
        for (occ, a) in &self.amps {
            let mut mapped = target.vacuum();
            for (mode, &n) in self.space.modes().iter().zip(&occ.0) {
                if n == 0 {
                    continue;
                }
                let idx = target
                    .index(mode)
                    .ok_or_else(|| Error::UnknownMode(mode.to_string()))?;
                mapped.0[idx] = n;
            }
            out.insert(mapped, *a);
        }
        Ok(out)
    }
}

/// A dense amplitude list over an enumerated [`Basis`].
#[derive(Clone, Debug)]
pub struct StateVector {
    basis: Arc<Basis>,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(basis: Arc<Basis>, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != basis.len() {
            return Err(Error::BasisMismatch(format!(
                "{} amplitudes for a basis of {} states",
                amps.len(),
                basis.len()
            )));
        }
        Ok(StateVector { basis, amps })
    }

    pub fn from_fock(basis: Arc<Basis>, v: &FockVector) -> Result<Self> {
        if v.space() != basis.space() && **v.space() != **basis.space() {
            return Err(Error::BasisMismatch("mode spaces differ".into()));
        }
        let mut amps = vec![ZERO; basis.len()];
        for (occ, a) in v.amplitudes() {
            let i = basis.index_of(occ).ok_or_else(|| basis.missing(occ))?;
            amps[i] += a;
        }
        Ok(StateVector { basis, amps })
    }

    pub fn to_fock(&self) -> FockVector {
        let mut v = FockVector::zero(self.basis.space().clone());
        for (occ, a) in self.basis.states().iter().zip(&self.amps) {
            if *a != ZERO {
                v.insert(occ.clone(), *a);
            }
        }
        v
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn space(&self) -> &Arc<ModeSpace> {
        self.basis.space()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold(0.0, |s, x| s + x)
            .sqrt()
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(StateVector {
            basis: self.basis.clone(),
            amps: self.amps.iter().map(|a| a / n).collect(),
        })
    }

    /// `<self|other>`, matching configurations when the bases differ.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        if Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis {
            return self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a.conj() * b)
                .sum();
        }
        self.to_fock().inner(&other.to_fock())
    }

    pub fn mean_photons(&self, s: Polarization) -> f64 {
        self.to_fock().mean_photons(s)
    }

    pub fn mean_excited(&self) -> f64 {
        self.to_fock().mean_excited()
    }
}

/// JSON form of a state: occupation signatures with amplitudes plus free-form
/// metadata. `parse(emit(record)) == record`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub schema_version: u32,
    pub modes: Vec<String>,
    pub algebra: Algebra,
    /// `(signature, re, im)` for every nonzero amplitude.
    pub entries: Vec<(String, f64, f64)>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl StateRecord {
    pub fn from_state(state: &StateVector, metadata: BTreeMap<String, serde_json::Value>) -> Self {
        let space = state.space();
        let entries = state
            .basis()
            .states()
            .iter()
            .zip(state.amplitudes())
            .filter(|(_, a)| **a != ZERO)
            .map(|(occ, a)| (occ.signature(space), a.re, a.im))
            .collect();
        StateRecord {
            schema_version: crate::SCHEMA_VERSION,
            modes: space.modes().iter().map(|m| m.to_string()).collect(),
            algebra: space.algebra(),
            entries,
            metadata,
        }
    }

    /// Rebuilds the state over a basis made of the recorded configurations.
    pub fn to_state(&self) -> Result<StateVector> {
        let modes = self
            .modes
            .iter()
            .map(|m| m.parse::<ModeId>())
            .collect::<Result<Vec<_>>>()?;
        let space = Arc::new(ModeSpace::new(modes, self.algebra)?);
        let mut v = FockVector::zero(space.clone());
        for (sig, re, im) in &self.entries {
            v.insert(
                Occupation::parse_signature(&space, sig)?,
                Complex64::new(*re, *im),
            );
        }
        let basis = Arc::new(Basis::from_states(
            space,
            v.amplitudes().keys().cloned().collect(),
        ));
        StateVector::from_fock(basis, &v)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
