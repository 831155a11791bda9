//! Brute-force dark subspaces.
//!
//! The coupling `V` maps zero-excited configurations to one-excited ones, so the
//! dark states of a sector are the null space of a rectangular matrix. That
//! matrix is block diagonal in the conserved quantities (atoms per momentum
//! class, photon-plus-excited number, helicity), and each block is handled by a
//! dense complex SVD. Blocks are independent and may run in parallel; the
//! merged report is ordered by block key and does not depend on scheduling.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::angular::Chain;
use crate::error::{Error, Result};
use crate::fockspace::{
    materialize_onto_image, Basis, FockVector, ModeSpace, Occupation, OperatorPolynomial,
    SectorSpec, StateRecord, StateVector,
};
use crate::model::{build_v, ModelConfig};
use crate::par::{self, Execution};

/// Relative singular-value cutoff.
pub const SVD_RELATIVE: f64 = 1e-10;
/// Absolute cutoff used when every singular value is zero.
pub const SVD_ABSOLUTE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct DarkSubspaceReport {
    pub sector: SectorSpec,
    pub dimension: usize,
    /// Orthonormal basis over `domain`.
    pub basis: Vec<StateVector>,
    /// Largest `‖V v‖` over the basis vectors.
    pub max_residual: f64,
    /// Singular-value threshold actually applied.
    pub threshold: f64,
    pub sigma_max: f64,
    pub blocks: usize,
    pub domain: Arc<Basis>,
}

impl DarkSubspaceReport {
    pub fn to_json(&self) -> serde_json::Value {
        let space = self.domain.space();
        json!({
            "schema_version": crate::SCHEMA_VERSION,
            "modes": space.modes().iter().map(|m| m.to_string()).collect::<Vec<_>>(),
            "sector": self.sector,
            "domain_size": self.domain.len(),
            "blocks": self.blocks,
            "dimension": self.dimension,
            "threshold": self.threshold,
            "sigma_max": self.sigma_max,
            "max_residual": self.max_residual,
            "basis": self.basis.iter().map(|v| StateRecord::from_state(v, BTreeMap::new())).collect::<Vec<_>>(),
        })
    }

    /// Summary row `(transition, chain, sector, dimension, max residual)`.
    pub fn csv_row(&self, transition: &str, chain: &str) -> Vec<String> {
        vec![
            transition.to_string(),
            chain.to_string(),
            sector_label(&self.sector),
            self.dimension.to_string(),
            format!("{:.3e}", self.max_residual),
        ]
    }
}

/// Compact text form of a sector for tables.
pub fn sector_label(s: &SectorSpec) -> String {
    let mut out = format!(
        "N={} caps=({},{})",
        s.n_atoms, s.photon_cap_plus, s.photon_cap_minus
    );
    if let Some(n) = s.excitations {
        out.push_str(&format!(" Nexc={n}"));
    }
    if let Some(h) = s.helicity {
        out.push_str(&format!(" 2h={h}"));
    }
    if s.min_photons > 0 {
        out.push_str(&format!(" nph>={}", s.min_photons));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct BlockKey {
    atoms_per_class: Vec<u32>,
    excitations: u32,
    helicity: i32,
}

struct BlockSvd {
    cols: Vec<usize>,
    matrix: DMatrix<Complex64>,
    singular: Vec<f64>,
    /// Right singular vectors as columns, one per entry of `singular`, then the
    /// directions beyond the row count.
    right: DMatrix<Complex64>,
}

fn block_svd(
    v: &OperatorPolynomial,
    domain: &Basis,
    cols: Vec<usize>,
    exec: Execution,
) -> Result<BlockSvd> {
    let space = domain.space().clone();
    let sub = Basis::from_states(
        space,
        cols.iter().map(|&j| domain.state(j).clone()).collect(),
    );
    let (op, _) = materialize_onto_image(v, &sub, exec)?;
    let matrix = op.to_dense();
    let n = matrix.ncols();
    let (singular, right) = if matrix.nrows() == 0 {
        (Vec::new(), DMatrix::identity(n, n))
    } else {
        // Pad with zero rows so the SVD returns a complete set of right vectors.
        let rows = matrix.nrows().max(n);
        let mut padded = DMatrix::zeros(rows, n);
        padded
            .view_mut((0, 0), (matrix.nrows(), n))
            .copy_from(&matrix);
        let svd = padded.svd(false, true);
        let vt = svd.v_t.expect("right singular vectors requested");
        let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
        // Singular values from padding rows are genuine zeros of the real block.
        s.truncate(matrix.nrows().min(n));
        (s, vt.adjoint())
    };
    Ok(BlockSvd {
        cols,
        matrix,
        singular,
        right,
    })
}

/// Orthonormal basis of the dark states in the zero-excited part of `sector`.
pub fn dark_subspace(
    cfg: &ModelConfig,
    space: Arc<ModeSpace>,
    sector: &SectorSpec,
    exec: Execution,
) -> Result<DarkSubspaceReport> {
    let sector = sector.clone().zero_excited();
    let domain = Arc::new(Basis::enumerate(space.clone(), &sector)?);
    let v = build_v(&ModelConfig {
        momentum_classes: space.classes().max(1),
        ..cfg.clone()
    })?;

    let mut groups: BTreeMap<BlockKey, Vec<usize>> = BTreeMap::new();
    for (j, occ) in domain.states().iter().enumerate() {
        let key = BlockKey {
            atoms_per_class: occ.atoms_per_class(&space),
            excitations: occ.excitations(&space),
            helicity: occ.twice_helicity(&space),
        };
        groups.entry(key).or_default().push(j);
    }
    let groups: Vec<Vec<usize>> = groups.into_values().collect();
    let blocks = par::map_slice(exec, &groups, |cols| {
        block_svd(&v, &domain, cols.clone(), Execution::Sequential)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let sigma_max = blocks
        .iter()
        .flat_map(|b| b.singular.iter().copied())
        .fold(0.0, f64::max);
    let threshold = if sigma_max > 0.0 {
        SVD_RELATIVE * sigma_max
    } else {
        SVD_ABSOLUTE
    };

    let mut basis = Vec::new();
    let mut max_residual = 0.0f64;
    for b in &blocks {
        let n = b.cols.len();
        for k in 0..n {
            let dark = b.singular.get(k).is_none_or(|&s| s <= threshold);
            if !dark {
                continue;
            }
            let local = b.right.column(k);
            if b.matrix.nrows() > 0 {
                max_residual = max_residual.max((&b.matrix * local).norm());
            }
            let mut amps = vec![Complex64::new(0.0, 0.0); domain.len()];
            for (i, &j) in b.cols.iter().enumerate() {
                amps[j] = local[i];
            }
            basis.push(StateVector::new(domain.clone(), amps)?);
        }
    }
    Ok(DarkSubspaceReport {
        sector,
        dimension: basis.len(),
        basis,
        max_residual,
        threshold,
        sigma_max,
        blocks: blocks.len(),
        domain,
    })
}

/// Sector reached by `Ψ_NC^n (a^+_+)^m (a^+_-)^{m'} |0>` on a chain, with the
/// chain's mode space. `None` when the photon budget cannot pay for `n` atoms.
pub fn chain_block(chain: &Chain, n_atoms: u32, m: u32, mprime: u32) -> Option<SectorSpec> {
    let cost = n_atoms * chain.links;
    if m + mprime < cost {
        return None;
    }
    let mu1 = chain.ground_sites().next()?.mu.twice();
    let helicity = 2 * (m as i32 - mprime as i32) + n_atoms as i32 * (mu1 + 2 * chain.links as i32);
    Some(
        SectorSpec::new(n_atoms, m, mprime)
            .zero_excited()
            .with_excitations(m + mprime - cost)
            .with_helicity(helicity),
    )
}

/// Outcome of [`is_dark`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Darkness {
    pub dark: bool,
    pub residual: f64,
    pub excited_occupancy: f64,
}

/// `‖V state‖ / ‖state‖` and the excited occupancy, compared against `tol`.
pub fn is_dark(cfg: &ModelConfig, state: &FockVector, tol: f64) -> Result<Darkness> {
    let norm = state.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let classes = state.space().classes().max(1);
    let v = build_v(&ModelConfig {
        momentum_classes: classes,
        ..cfg.clone()
    })?;
    let residual = state.apply(&v)?.norm() / norm;
    let excited_occupancy = state.mean_excited();
    Ok(Darkness {
        dark: residual <= tol && excited_occupancy <= tol,
        residual,
        excited_occupancy,
    })
}

/// `‖op state‖ / ‖state‖` for an arbitrary coupling polynomial, e.g. a chain
/// coupling with overridden coefficients.
pub fn residual_under(op: &OperatorPolynomial, state: &FockVector) -> Result<f64> {
    let norm = state.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(state.apply(op)?.norm() / norm)
}

/// Relative distance of `state` from the span of `report.basis`.
pub fn projection_defect(state: &FockVector, report: &DarkSubspaceReport) -> Result<f64> {
    if **state.space() != **report.domain.space() {
        return Err(Error::BasisMismatch(
            "state and report use different mode spaces".into(),
        ));
    }
    let norm = state.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut diff = state.clone();
    for b in &report.basis {
        let fb = b.to_fock();
        let c = fb.inner(state);
        diff.add_scaled(&fb, -c);
    }
    Ok(diff.norm() / norm)
}

/// True when `state` lies in the reported subspace within `tol`.
pub fn contains(state: &FockVector, report: &DarkSubspaceReport, tol: f64) -> Result<bool> {
    for occ in state.amplitudes().keys() {
        if report.domain.index_of(occ).is_none() && state.amplitude(occ).norm() > 0.0 {
            return Ok(false);
        }
    }
    Ok(projection_defect(state, report)? <= tol)
}

/// Domain configurations of a report, for callers that build their own vectors.
pub fn domain_states(report: &DarkSubspaceReport) -> &[Occupation] {
    report.domain.states()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{decompose_chains, ChainKind};
    use crate::fockspace::Algebra;

    #[test]
    fn photons_only_are_all_dark() {
        let cfg = ModelConfig::new("1:1".parse().unwrap());
        let r = dark_subspace(
            &cfg,
            cfg.mode_space(),
            &SectorSpec::new(0, 2, 2),
            Execution::default(),
        )
        .unwrap();
        assert_eq!(r.dimension, 9);
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn v_chain_single_dark_state() {
        let cfg = ModelConfig::new("1:2".parse().unwrap());
        let chain = decompose_chains(cfg.transition)
            .unwrap()
            .into_iter()
            .find(|c| c.kind == ChainKind::V && c.links == 1)
            .unwrap();
        let space = Arc::new(ModeSpace::for_chain(&chain, 1, Algebra::bose()));
        let spec = chain_block(&chain, 1, 1, 1).unwrap();
        let r = dark_subspace(&cfg, space, &spec, Execution::Sequential).unwrap();
        assert_eq!(r.dimension, 1);
    }

    #[test]
    fn bright_single_configuration() {
        let cfg = ModelConfig::new("1:1".parse().unwrap());
        let space = cfg.mode_space();
        let occ = Occupation::parse_signature(&space, "g0(-1)=1 a+=1").unwrap();
        let d = is_dark(&cfg, &FockVector::basis_state(space.clone(), occ), 1e-10).unwrap();
        assert!(!d.dark && d.residual > 0.1);
        let d = is_dark(&cfg, &FockVector::vacuum(space), 1e-10).unwrap();
        assert!(d.dark && d.residual == 0.0);
    }
}
