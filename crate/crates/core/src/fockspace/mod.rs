//! Occupation-number machinery: modes, bases, operator polynomials, states
//! and sparse matrices.
//!
//! Mode order is global and fixed: ground modes ascending by `(class, mu)`,
//! then excited modes ascending by `(class, mu)`, then the photon modes `s=+1`
//! and `s=-1`. Fermionic signs are counted against this order; see
//! [`FermiOrdering`] for which atomic modes share a sign string.

mod basis;
mod polynomial;
mod sparse;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use crate::angular::Polarization;
use crate::angular::{Chain, HalfInt, SiteRole, Transition};
use crate::error::{Error, Result};

pub use basis::{Basis, Occupation, SectorSpec, DEFAULT_CAPACITY};
pub use polynomial::{Factor, Ladder, Monomial, OperatorPolynomial};
pub use sparse::{materialize, materialize_onto_image, CsrMatrix, SparseOperator};
pub use state::{FockVector, StateRecord, StateVector};

/// Quantum statistics of the atoms. Photons are always bosons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Statistics {
    Bose,
    Fermi,
}

impl Statistics {
    /// Fermi for half-integer ground momentum, Bose otherwise.
    pub fn default_for(fg: HalfInt) -> Statistics {
        if fg.is_integer() {
            Statistics::Bose
        } else {
            Statistics::Fermi
        }
    }
}

impl FromStr for Statistics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bose" | "boson" | "bosons" => Ok(Statistics::Bose),
            "fermi" | "fermion" | "fermions" => Ok(Statistics::Fermi),
            other => Err(Error::Parse(format!("unknown statistics `{other}`"))),
        }
    }
}

/// Which fermionic atomic operators anticommute with each other.
///
/// `SplitManifolds` treats ground and excited operators as two species that
/// anticommute within a manifold and commute across manifolds. `Global` puts
/// every atomic mode on one sign string. The two representations are related
/// by a diagonal unitary inside each atom-number sector, so spectra and dark
/// subspaces coincide; they differ in whether `V Ψ = -Ψ V` or `V Ψ = Ψ V`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FermiOrdering {
    #[default]
    SplitManifolds,
    Global,
}

/// Statistics plus sign convention: everything normal ordering needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Algebra {
    pub statistics: Statistics,
    #[serde(default)]
    pub ordering: FermiOrdering,
}

impl Algebra {
    pub fn bose() -> Self {
        Algebra {
            statistics: Statistics::Bose,
            ordering: FermiOrdering::default(),
        }
    }

    pub fn fermi() -> Self {
        Algebra {
            statistics: Statistics::Fermi,
            ordering: FermiOrdering::default(),
        }
    }

    pub fn new(statistics: Statistics) -> Self {
        Algebra {
            statistics,
            ordering: FermiOrdering::default(),
        }
    }

    /// Sign string a mode belongs to, or `None` for bosonic modes.
    pub fn sign_group(&self, mode: &ModeId) -> Option<u8> {
        if self.statistics == Statistics::Bose {
            return None;
        }
        match (mode, self.ordering) {
            (ModeId::Photon(_), _) => None,
            (ModeId::Ground { .. }, _) => Some(0),
            (ModeId::Excited { .. }, FermiOrdering::SplitManifolds) => Some(1),
            (ModeId::Excited { .. }, FermiOrdering::Global) => Some(0),
        }
    }

    pub fn is_fermionic(&self, mode: &ModeId) -> bool {
        self.sign_group(mode).is_some()
    }
}

/// A single-particle mode. The derived order is the documented global order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeId {
    Ground { class: u32, mu: HalfInt },
    Excited { class: u32, mu: HalfInt },
    Photon(Polarization),
}

impl ModeId {
    pub fn ground(class: u32, mu: HalfInt) -> Self {
        ModeId::Ground { class, mu }
    }

    pub fn excited(class: u32, mu: HalfInt) -> Self {
        ModeId::Excited { class, mu }
    }

    pub fn photon(s: Polarization) -> Self {
        ModeId::Photon(s)
    }

    pub fn is_atomic(&self) -> bool {
        !matches!(self, ModeId::Photon(_))
    }

    /// Twice the angular-momentum projection carried by one quantum of the mode.
    pub fn twice_projection(&self) -> i32 {
        match self {
            ModeId::Ground { mu, .. } | ModeId::Excited { mu, .. } => mu.twice(),
            ModeId::Photon(s) => 2 * s.sign(),
        }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sgn = |mu: &HalfInt| if mu.twice() > 0 { "+" } else { "" };
        match self {
            ModeId::Ground { class, mu } => write!(f, "g{class}({}{mu})", sgn(mu)),
            ModeId::Excited { class, mu } => write!(f, "e{class}({}{mu})", sgn(mu)),
            ModeId::Photon(s) => write!(f, "a{}", s.symbol()),
        }
    }
}

impl FromStr for ModeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("`{s}` is not a mode label"));
        match s {
            "a+" => return Ok(ModeId::Photon(Polarization::Plus)),
            "a-" => return Ok(ModeId::Photon(Polarization::Minus)),
            _ => {}
        }
        let kind = s.chars().next().ok_or_else(bad)?;
        let rest = &s[1..];
        let (class, mu) = rest.split_once('(').ok_or_else(bad)?;
        let mu = mu.strip_suffix(')').ok_or_else(bad)?;
        let class: u32 = class.parse().map_err(|_| bad())?;
        let mu: HalfInt = mu.trim_start_matches('+').parse()?;
        match kind {
            'g' => Ok(ModeId::Ground { class, mu }),
            'e' => Ok(ModeId::Excited { class, mu }),
            _ => Err(bad()),
        }
    }
}

/// An ordered set of modes together with the algebra acting on them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSpace {
    modes: Vec<ModeId>,
    algebra: Algebra,
}

impl ModeSpace {
    /// Builds a mode space; modes are sorted into the global order.
    pub fn new(mut modes: Vec<ModeId>, algebra: Algebra) -> Result<Self> {
        modes.sort();
        let before = modes.len();
        modes.dedup();
        if modes.len() != before {
            return Err(Error::Config("duplicate modes in mode space".into()));
        }
        Ok(ModeSpace { modes, algebra })
    }

    /// All Zeeman substates of `transition`, replicated over momentum classes,
    /// plus both photon modes.
    pub fn full(transition: Transition, classes: u32, algebra: Algebra) -> Self {
        let mut modes = Vec::new();
        for class in 0..classes {
            modes.extend(
                transition
                    .fg
                    .projections()
                    .map(|mu| ModeId::ground(class, mu)),
            );
        }
        for class in 0..classes {
            modes.extend(
                transition
                    .fe
                    .projections()
                    .map(|mu| ModeId::excited(class, mu)),
            );
        }
        modes.extend(Polarization::BOTH.map(ModeId::photon));
        ModeSpace::new(modes, algebra).expect("modes are distinct")
    }

    /// The substates of one chain, replicated over momentum classes, plus photons.
    pub fn for_chain(chain: &Chain, classes: u32, algebra: Algebra) -> Self {
        let mut modes = Vec::new();
        for class in 0..classes {
            for site in &chain.sites {
                modes.push(match site.role {
                    SiteRole::Ground => ModeId::ground(class, site.mu),
                    SiteRole::Excited => ModeId::excited(class, site.mu),
                });
            }
        }
        modes.extend(Polarization::BOTH.map(ModeId::photon));
        ModeSpace::new(modes, algebra).expect("chain sites are distinct")
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn algebra(&self) -> Algebra {
        self.algebra
    }

    pub fn statistics(&self) -> Statistics {
        self.algebra.statistics
    }

    pub fn index(&self, mode: &ModeId) -> Option<usize> {
        self.modes.binary_search(mode).ok()
    }

    pub fn photon_index(&self, s: Polarization) -> Option<usize> {
        self.index(&ModeId::Photon(s))
    }

    pub fn atomic_mode_count(&self) -> usize {
        self.modes.iter().filter(|m| m.is_atomic()).count()
    }

    /// Number of distinct momentum classes among the atomic modes.
    pub fn classes(&self) -> u32 {
        self.modes
            .iter()
            .filter_map(|m| match m {
                ModeId::Ground { class, .. } | ModeId::Excited { class, .. } => Some(*class + 1),
                ModeId::Photon(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn vacuum(&self) -> Occupation {
        Occupation::vacuum(self.modes.len())
    }
}
