use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ModeId, ModeSpace, Polarization, Statistics};
use crate::error::{Error, Result};

/// Default limit on the number of enumerated basis states.
pub const DEFAULT_CAPACITY: usize = 200_000;

/// Occupation numbers, one entry per mode of a [`ModeSpace`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Occupation(pub Vec<u8>);

impl Occupation {
    pub fn vacuum(len: usize) -> Self {
        Occupation(vec![0; len])
    }

    pub fn get(&self, index: usize) -> u8 {
        self.0[index]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| u32::from(n)).sum()
    }

    fn sum_where(&self, space: &ModeSpace, pred: impl Fn(&ModeId) -> bool) -> u32 {
        space
            .modes()
            .iter()
            .zip(&self.0)
            .filter(|(m, _)| pred(m))
            .map(|(_, &n)| u32::from(n))
            .sum()
    }

    pub fn atoms(&self, space: &ModeSpace) -> u32 {
        self.sum_where(space, ModeId::is_atomic)
    }

    pub fn excited(&self, space: &ModeSpace) -> u32 {
        self.sum_where(space, |m| matches!(m, ModeId::Excited { .. }))
    }

    pub fn photons(&self, space: &ModeSpace, s: Polarization) -> u32 {
        space
            .photon_index(s)
            .map(|i| u32::from(self.0[i]))
            .unwrap_or(0)
    }

    /// `N_excited + n_+ + n_-`, conserved by the coupling.
    pub fn excitations(&self, space: &ModeSpace) -> u32 {
        self.excited(space)
            + self.photons(space, Polarization::Plus)
            + self.photons(space, Polarization::Minus)
    }

    /// `2 * (sum_mu mu n_mu + n_+ - n_-)`, conserved by the coupling.
    pub fn twice_helicity(&self, space: &ModeSpace) -> i32 {
        space
            .modes()
            .iter()
            .zip(&self.0)
            .map(|(m, &n)| m.twice_projection() * i32::from(n))
            .sum()
    }

    /// Atom counts per momentum class (ground plus excited).
    pub fn atoms_per_class(&self, space: &ModeSpace) -> Vec<u32> {
        let mut out = vec![0; space.classes() as usize];
        for (m, &n) in space.modes().iter().zip(&self.0) {
            if let ModeId::Ground { class, .. } | ModeId::Excited { class, .. } = m {
                out[*class as usize] += u32::from(n);
            }
        }
        out
    }

    /// Compact label such as `g0(-1/2)=1 a+=2`, or `vac`.
    pub fn signature(&self, space: &ModeSpace) -> String {
        let parts: Vec<String> = space
            .modes()
            .iter()
            .zip(&self.0)
            .filter(|(_, &n)| n > 0)
            .map(|(m, n)| format!("{m}={n}"))
            .collect();
        if parts.is_empty() {
            "vac".to_string()
        } else {
            parts.join(" ")
        }
    }

    pub fn parse_signature(space: &ModeSpace, text: &str) -> Result<Self> {
        let mut occ = Occupation::vacuum(space.len());
        let text = text.trim();
        if text == "vac" {
            return Ok(occ);
        }
        for part in text.split_whitespace() {
            let (mode, n) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("`{part}` is not `mode=count`")))?;
            let mode: ModeId = mode.parse()?;
            let idx = space
                .index(&mode)
                .ok_or_else(|| Error::UnknownMode(mode.to_string()))?;
            occ.0[idx] = n
                .parse()
                .map_err(|_| Error::Parse(format!("bad count in `{part}`")))?;
        }
        Ok(occ)
    }

    pub(crate) fn display<'a>(&'a self, space: &'a ModeSpace) -> impl fmt::Display + 'a {
        struct D<'a>(&'a Occupation, &'a ModeSpace);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "|{}>", self.0.signature(self.1))
            }
        }
        D(self, space)
    }
}

/// Constraints selecting a sector of the occupation-number space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub n_atoms: u32,
    pub photon_cap_plus: u32,
    pub photon_cap_minus: u32,
    #[serde(default)]
    pub restrict_excited_to_zero: bool,
    /// Fixed `2 * (M_atoms + n_+ - n_-)`.
    #[serde(default)]
    pub helicity: Option<i32>,
    /// Fixed `N_excited + n_+ + n_-`.
    #[serde(default)]
    pub excitations: Option<u32>,
    #[serde(default)]
    pub max_excitations: Option<u32>,
    /// Keep only states with at least this many photons.
    #[serde(default)]
    pub min_photons: u32,
    #[serde(default = "default_capacity")]
    pub capacity: usize,
}

fn default_capacity() -> usize {
    DEFAULT_CAPACITY
}

impl SectorSpec {
    pub fn new(n_atoms: u32, photon_cap_plus: u32, photon_cap_minus: u32) -> Self {
        SectorSpec {
            n_atoms,
            photon_cap_plus,
            photon_cap_minus,
            restrict_excited_to_zero: false,
            helicity: None,
            excitations: None,
            max_excitations: None,
            min_photons: 0,
            capacity: DEFAULT_CAPACITY,
        }
    }

    pub fn zero_excited(mut self) -> Self {
        self.restrict_excited_to_zero = true;
        self
    }

    pub fn with_helicity(mut self, twice_helicity: i32) -> Self {
        self.helicity = Some(twice_helicity);
        self
    }

    pub fn with_excitations(mut self, n: u32) -> Self {
        self.excitations = Some(n);
        self
    }

    pub fn with_max_excitations(mut self, n: u32) -> Self {
        self.max_excitations = Some(n);
        self
    }

    pub fn with_min_photons(mut self, n: u32) -> Self {
        self.min_photons = n;
        self
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn cap(&self, s: Polarization) -> u32 {
        match s {
            Polarization::Plus => self.photon_cap_plus,
            Polarization::Minus => self.photon_cap_minus,
        }
    }

    pub fn admits(&self, occ: &Occupation, space: &ModeSpace) -> bool {
        let n_plus = occ.photons(space, Polarization::Plus);
        let n_minus = occ.photons(space, Polarization::Minus);
        if occ.atoms(space) != self.n_atoms
            || n_plus > self.photon_cap_plus
            || n_minus > self.photon_cap_minus
        {
            return false;
        }
        if n_plus + n_minus < self.min_photons {
            return false;
        }
        if self.restrict_excited_to_zero && occ.excited(space) > 0 {
            return false;
        }
        if space.statistics() == Statistics::Fermi
            && space
                .modes()
                .iter()
                .zip(&occ.0)
                .any(|(m, &n)| m.is_atomic() && n > 1)
        {
            return false;
        }
        let exc = occ.excitations(space);
        if self.excitations.is_some_and(|e| e != exc)
            || self.max_excitations.is_some_and(|e| exc > e)
        {
            return false;
        }
        self.helicity.is_none_or(|h| h == occ.twice_helicity(space))
    }
}

/// An ordered list of occupation configurations over a mode space.
#[derive(Clone, Debug)]
pub struct Basis {
    space: Arc<ModeSpace>,
    sector: Option<SectorSpec>,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.states == other.states
    }
}

impl Basis {
    /// Enumerates every configuration allowed by `spec`, in lexicographic order
    /// of the occupation vectors (modes in global order, counts ascending).
    pub fn enumerate(space: Arc<ModeSpace>, spec: &SectorSpec) -> Result<Basis> {
        let fermi = space.statistics() == Statistics::Fermi;
        if fermi && spec.n_atoms as usize > space.atomic_mode_count() {
            return Err(Error::SectorMismatch(format!(
                "{} fermions do not fit into {} atomic modes",
                spec.n_atoms,
                space.atomic_mode_count()
            )));
        }
        let mut states = Vec::new();
        let mut current = vec![0u8; space.len()];
        let mut walker = Walker {
            space: &space,
            spec,
            fermi,
            states: &mut states,
            current: &mut current,
        };
        walker.visit(0, spec.n_atoms, 0, 0)?;
        Ok(Basis::from_sorted(space, Some(spec.clone()), states))
    }

    /// A basis holding exactly `states` (deduplicated, lexicographically sorted).
    pub fn from_states(space: Arc<ModeSpace>, mut states: Vec<Occupation>) -> Basis {
        states.sort();
        states.dedup();
        Basis::from_sorted(space, None, states)
    }

    fn from_sorted(
        space: Arc<ModeSpace>,
        sector: Option<SectorSpec>,
        states: Vec<Occupation>,
    ) -> Basis {
        let index = states
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        Basis {
            space,
            sector,
            states,
            index,
        }
    }

    pub fn space(&self) -> &Arc<ModeSpace> {
        &self.space
    }

    pub fn sector(&self) -> Option<&SectorSpec> {
        self.sector.as_ref()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &Occupation {
        &self.states[i]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, occ: &Occupation) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Error for a configuration that is missing from this basis.
    pub(crate) fn missing(&self, occ: &Occupation) -> Error {
        if let Some(spec) = &self.sector {
            for s in Polarization::BOTH {
                let n = occ.photons(&self.space, s);
                if n > spec.cap(s) {
                    return Error::CapOverflow {
                        mode: ModeId::Photon(s).to_string(),
                        requested: n,
                        cap: spec.cap(s),
                    };
                }
            }
        }
        Error::OutOfSector(format!("{} is not in the basis", occ.display(&self.space)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": crate::SCHEMA_VERSION,
            "modes": self.space.modes().iter().map(|m| m.to_string()).collect::<Vec<_>>(),
            "algebra": self.space.algebra(),
            "sector": self.sector,
            "states": self.states,
        })
    }
}

struct Walker<'a> {
    space: &'a ModeSpace,
    spec: &'a SectorSpec,
    fermi: bool,
    states: &'a mut Vec<Occupation>,
    current: &'a mut Vec<u8>,
}

impl Walker<'_> {
    fn visit(&mut self, mode: usize, atoms_left: u32, excited: u32, twice_m: i32) -> Result<()> {
        let modes = self.space.modes();
        if mode == modes.len() || !modes[mode].is_atomic() {
            if atoms_left > 0 {
                return Ok(());
            }
            return self.photons(mode, excited, twice_m);
        }
        let id = modes[mode];
        let is_excited = matches!(id, ModeId::Excited { .. });
        let max = if is_excited && self.spec.restrict_excited_to_zero {
            0
        } else if self.fermi {
            atoms_left.min(1)
        } else {
            atoms_left
        };
        for n in 0..=max {
            self.current[mode] = n as u8;
            let exc = excited + if is_excited { n } else { 0 };
            self.visit(
                mode + 1,
                atoms_left - n,
                exc,
                twice_m + id.twice_projection() * n as i32,
            )?;
        }
        self.current[mode] = 0;
        Ok(())
    }

    fn photons(&mut self, first_photon: usize, excited: u32, twice_m: i32) -> Result<()> {
        let plus = self.space.photon_index(Polarization::Plus);
        let minus = self.space.photon_index(Polarization::Minus);
        let cap_p = if plus.is_some() {
            self.spec.photon_cap_plus
        } else {
            0
        };
        let cap_m = if minus.is_some() {
            self.spec.photon_cap_minus
        } else {
            0
        };
        debug_assert!(plus.is_none_or(|i| i >= first_photon));
        for np in 0..=cap_p {
            for nm in 0..=cap_m {
                let exc = excited + np + nm;
                if self.spec.excitations.is_some_and(|e| e != exc)
                    || self.spec.max_excitations.is_some_and(|e| exc > e)
                    || np + nm < self.spec.min_photons
                {
                    continue;
                }
                if self
                    .spec
                    .helicity
                    .is_some_and(|h| h != twice_m + 2 * (np as i32 - nm as i32))
                {
                    continue;
                }
                if let Some(i) = plus {
                    self.current[i] = np as u8;
                }
                if let Some(i) = minus {
                    self.current[i] = nm as u8;
                }
                if self.states.len() >= self.spec.capacity {
                    return Err(Error::Capacity {
                        size: self.states.len() + 1,
                        limit: self.spec.capacity,
                    });
                }
                self.states.push(Occupation(self.current.clone()));
            }
        }
        if let Some(i) = plus {
            self.current[i] = 0;
        }
        if let Some(i) = minus {
            self.current[i] = 0;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::HalfInt;
    use crate::fockspace::Algebra;

    fn two_ground_space(stat: Statistics) -> Arc<ModeSpace> {
        let half = HalfInt::from_twice(1);
        let modes = vec![
            ModeId::ground(0, -half),
            ModeId::ground(0, half),
            ModeId::photon(Polarization::Plus),
            ModeId::photon(Polarization::Minus),
        ];
        Arc::new(ModeSpace::new(modes, Algebra::new(stat)).unwrap())
    }

    #[test]
    fn one_bose_atom_two_modes_caps_one() {
        let b = Basis::enumerate(
            two_ground_space(Statistics::Bose),
            &SectorSpec::new(1, 1, 1).zero_excited(),
        )
        .unwrap();
        assert_eq!(b.len(), 8);
    }

    #[test]
    fn photons_only() {
        let b = Basis::enumerate(
            two_ground_space(Statistics::Bose),
            &SectorSpec::new(0, 2, 0),
        )
        .unwrap();
        assert_eq!(b.len(), 3);
        let space = b.space().clone();
        let counts: Vec<u32> = b
            .states()
            .iter()
            .map(|s| s.photons(&space, Polarization::Plus))
            .collect();
        assert_eq!(counts, vec![0, 1, 2]);
    }

    #[test]
    fn pauli_exclusion() {
        let b = Basis::enumerate(
            two_ground_space(Statistics::Fermi),
            &SectorSpec::new(2, 0, 0),
        )
        .unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.state(0).0, vec![1, 1, 0, 0]);
        assert!(Basis::enumerate(
            two_ground_space(Statistics::Fermi),
            &SectorSpec::new(3, 0, 0)
        )
        .is_err());
    }

    #[test]
    fn enumeration_is_sorted_and_admitted() {
        let space = two_ground_space(Statistics::Bose);
        let spec = SectorSpec::new(2, 2, 3).with_helicity(0);
        let b = Basis::enumerate(space.clone(), &spec).unwrap();
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        assert!(b.states().iter().all(|s| spec.admits(s, &space)));
        assert!(!b.is_empty());
    }

    #[test]
    fn capacity_limit() {
        let spec = SectorSpec::new(1, 10, 10).with_capacity(50);
        let err = Basis::enumerate(two_ground_space(Statistics::Bose), &spec).unwrap_err();
        assert!(matches!(err, Error::Capacity { limit: 50, .. }));
    }

    #[test]
    fn signature_round_trip() {
        let space = two_ground_space(Statistics::Bose);
        let b = Basis::enumerate(space.clone(), &SectorSpec::new(1, 2, 2)).unwrap();
        for s in b.states() {
            let sig = s.signature(&space);
            assert_eq!(&Occupation::parse_signature(&space, &sig).unwrap(), s);
        }
        assert_eq!(Occupation::vacuum(4).signature(&space), "vac");
    }
}
