use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Basis, Occupation, OperatorPolynomial, StateVector};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

const DROP_BELOW: f64 = 1e-15;

/// A complex matrix in coordinate form, sorted by `(row, col)` with no
/// duplicates and no entries below `1e-15` in magnitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseOperator {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOperator {
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut entries: Vec<(usize, usize, Complex64)>,
    ) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2.norm() >= DROP_BELOW);
        SparseOperator {
            rows,
            cols,
            entries: merged,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(
            n,
            n,
            (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect(),
        )
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn adjoint(&self) -> SparseOperator {
        Self::from_triplets(
            self.cols,
            self.rows,
            self.entries
                .iter()
                .map(|&(r, c, v)| (c, r, v.conj()))
                .collect(),
        )
    }

    pub fn sub(&self, other: &SparseOperator) -> Result<SparseOperator> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::SectorMismatch(format!(
                "{}x{} minus {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().map(|&(r, c, v)| (r, c, -v)));
        Ok(Self::from_triplets(self.rows, self.cols, entries))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.2.norm_sqr())
            .fold(0.0, |s, x| s + x)
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut row_ptr = vec![0usize; self.rows + 1];
        for &(r, _, _) in &self.entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..self.rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            row_ptr,
            col_idx: self.entries.iter().map(|e| e.1).collect(),
            values: self.entries.iter().map(|e| e.2).collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": crate::SCHEMA_VERSION,
            "rows": self.rows,
            "cols": self.cols,
            "entries": self.entries.iter().map(|(r, c, v)| (r, c, v.re, v.im)).collect::<Vec<_>>(),
        })
    }
}

/// Compressed sparse rows, for repeated matrix-vector products.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub rows: usize,
    pub cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    /// `y = self * x`.
    pub fn mul_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.rows) {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    /// Largest absolute row sum, an upper bound on the spectral norm of a
    /// Hermitian matrix.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.rows)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|k| self.values[k].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

fn column(
    poly: &OperatorPolynomial,
    domain: &Basis,
    j: usize,
) -> Result<Vec<(Occupation, Complex64)>> {
    let space = domain.space();
    let occ = domain.state(j);
    let mut out = Vec::new();
    for term in &poly.terms {
        if let Some((next, factor)) = term.apply(space, occ)? {
            out.push((next, term.coeff * factor));
        }
    }
    Ok(out)
}

/// Matrix of `poly` from `domain` into `codomain`. Column `j` is `poly` applied
/// to the `j`-th basis configuration. Columns may be built in parallel; the
/// result does not depend on the thread count.
pub fn materialize(
    poly: &OperatorPolynomial,
    domain: &Basis,
    codomain: &Basis,
    exec: Execution,
) -> Result<SparseOperator> {
    if domain.space() != codomain.space() && **domain.space() != **codomain.space() {
        return Err(Error::SectorMismatch(
            "domain and codomain use different mode spaces".into(),
        ));
    }
    let cols = par::map_range(
        exec,
        domain.len(),
        |j| -> Result<Vec<(usize, usize, Complex64)>> {
            column(poly, domain, j)?
                .into_iter()
                .map(|(occ, v)| {
                    let i = codomain
                        .index_of(&occ)
                        .ok_or_else(|| codomain.missing(&occ))?;
                    Ok((i, j, v))
                })
                .collect()
        },
    );
    let mut entries = Vec::new();
    for col in cols {
        entries.extend(col?);
    }
    Ok(SparseOperator::from_triplets(
        codomain.len(),
        domain.len(),
        entries,
    ))
}

/// Like [`materialize`], with the codomain made of exactly the configurations
/// reached from `domain`.
pub fn materialize_onto_image(
    poly: &OperatorPolynomial,
    domain: &Basis,
    exec: Execution,
) -> Result<(SparseOperator, Basis)> {
    let cols = par::map_range(exec, domain.len(), |j| column(poly, domain, j));
    let cols = cols.into_iter().collect::<Result<Vec<_>>>()?;
    let image: Vec<Occupation> = cols
        .iter()
        .flat_map(|c| c.iter().map(|(o, _)| o.clone()))
        .collect();
    let codomain = Basis::from_states(domain.space().clone(), image);
    let mut entries = Vec::new();
    for (j, col) in cols.into_iter().enumerate() {
        for (occ, v) in col {
            entries.push((codomain.index_of(&occ).expect("image configuration"), j, v));
        }
    }
    Ok((
        SparseOperator::from_triplets(codomain.len(), domain.len(), entries),
        codomain,
    ))
}

impl StateVector {
    /// `op * self`, with `op` a matrix from this state's basis into `codomain`.
    pub fn apply_matrix(&self, op: &SparseOperator, codomain: Arc<Basis>) -> Result<StateVector> {
        if op.cols != self.basis().len() || op.rows != codomain.len() {
            return Err(Error::BasisMismatch(
                "operator shape does not match the bases".into(),
            ));
        }
        StateVector::new(codomain, op.matvec(self.amplitudes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{HalfInt, Polarization};
    use crate::fockspace::{Algebra, ModeId, ModeSpace, SectorSpec};

    #[test]
    fn identity_polynomial_is_identity_matrix() {
        let modes = vec![
            ModeId::ground(0, HalfInt::ZERO),
            ModeId::photon(Polarization::Plus),
            ModeId::photon(Polarization::Minus),
        ];
        let space = Arc::new(ModeSpace::new(modes, Algebra::bose()).unwrap());
        let b = Basis::enumerate(space, &SectorSpec::new(1, 2, 2)).unwrap();
        let m = materialize(
            &OperatorPolynomial::identity(),
            &b,
            &b,
            Execution::default(),
        )
        .unwrap();
        assert_eq!(m, SparseOperator::identity(b.len()));
    }

    #[test]
    fn triplets_merge_and_drop() {
        let m = SparseOperator::from_triplets(
            2,
            2,
            vec![
                (1, 0, Complex64::new(1.0, 0.0)),
                (0, 1, Complex64::new(2.0, 0.0)),
                (1, 0, Complex64::new(-1.0, 0.0)),
            ],
        );
        assert_eq!(m.entries, vec![(0, 1, Complex64::new(2.0, 0.0))]);
        let csr = m.to_csr();
        let mut y = vec![Complex64::new(0.0, 0.0); 2];
        csr.mul_into(
            &[Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)],
            &mut y,
        );
        assert_eq!(
            y,
            m.matvec(&[Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)])
        );
    }

    #[test]
    fn out_of_sector_and_cap_overflow() {
        let modes = vec![
            ModeId::photon(Polarization::Plus),
            ModeId::photon(Polarization::Minus),
        ];
        let space = Arc::new(ModeSpace::new(modes, Algebra::bose()).unwrap());
        let b = Basis::enumerate(space, &SectorSpec::new(0, 2, 0)).unwrap();
        let raise = OperatorPolynomial::create(ModeId::photon(Polarization::Plus));
        assert!(matches!(
            materialize(&raise, &b, &b, Execution::Sequential),
            Err(Error::CapOverflow {
                requested: 3,
                cap: 2,
                ..
            })
        ));
        let other = OperatorPolynomial::create(ModeId::photon(Polarization::Minus));
        assert!(materialize(&other, &b, &b, Execution::Sequential).is_err());
    }
}
