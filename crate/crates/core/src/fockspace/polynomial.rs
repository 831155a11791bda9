use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Algebra, ModeId, ModeSpace, Occupation};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// One creation or annihilation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub mode: ModeId,
    pub op: Ladder,
}

impl Factor {
    pub fn create(mode: ModeId) -> Self {
        Factor {
            mode,
            op: Ladder::Create,
        }
    }

    pub fn annihilate(mode: ModeId) -> Self {
        Factor {
            mode,
            op: Ladder::Annihilate,
        }
    }

    pub fn adjoint(self) -> Self {
        let op = match self.op {
            Ladder::Create => Ladder::Annihilate,
            Ladder::Annihilate => Ladder::Create,
        };
        Factor {
            mode: self.mode,
            op,
        }
    }

    // Normal order: creations before annihilations, modes ascending in each group.
    fn order_key(&self) -> (Ladder, ModeId) {
        (self.op, self.mode)
    }
}

impl PartialOrd for Factor {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Factor {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op {
            Ladder::Create => write!(f, "{}^+", self.mode),
            Ladder::Annihilate => write!(f, "{}", self.mode),
        }
    }
}

/// `coeff * f_1 f_2 ... f_k`, factors written left to right as in operator notation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: Complex64,
    pub factors: Vec<Factor>,
}

impl Monomial {
    pub fn new(coeff: impl Into<Complex64>, factors: Vec<Factor>) -> Self {
        Monomial {
            coeff: coeff.into(),
            factors,
        }
    }

    pub fn adjoint(&self) -> Monomial {
        Monomial {
            coeff: self.coeff.conj(),
            factors: self.factors.iter().rev().map(|f| f.adjoint()).collect(),
        }
    }

    /// Acts on one configuration. Returns `None` when the result vanishes.
    ///
    /// Factors act right to left. Bosonic factors contribute `sqrt(n)` or
    /// `sqrt(n+1)`; fermionic ones the parity of occupied modes that precede
    /// them on the same sign string.
    pub fn apply(&self, space: &ModeSpace, occ: &Occupation) -> Result<Option<(Occupation, f64)>> {
        let algebra = space.algebra();
        let mut out = occ.clone();
        let mut amp = 1.0f64;
        for factor in self.factors.iter().rev() {
            let Some(idx) = space.index(&factor.mode) else {
                match factor.op {
                    Ladder::Annihilate => return Ok(None),
                    Ladder::Create => return Err(Error::UnknownMode(factor.mode.to_string())),
                }
            };
            let n = out.0[idx];
            match algebra.sign_group(&factor.mode) {
                None => match factor.op {
                    Ladder::Annihilate => {
                        if n == 0 {
                            return Ok(None);
                        }
                        amp *= f64::from(n).sqrt();
                        out.0[idx] = n - 1;
                    }
                    Ladder::Create => {
                        if n == u8::MAX {
                            return Err(Error::CapOverflow {
                                mode: factor.mode.to_string(),
                                requested: u32::from(n) + 1,
                                cap: u32::from(u8::MAX),
                            });
                        }
                        amp *= f64::from(n + 1).sqrt();
                        out.0[idx] = n + 1;
                    }
                },
                Some(group) => {
                    let target = match factor.op {
                        Ladder::Annihilate if n == 1 => 0,
                        Ladder::Create if n == 0 => 1,
                        _ => return Ok(None),
                    };
                    let parity: u32 = space.modes()[..idx]
                        .iter()
                        .zip(&out.0[..idx])
                        .filter(|(m, _)| algebra.sign_group(m) == Some(group))
                        .map(|(_, &k)| u32::from(k))
                        .sum();
                    if parity % 2 == 1 {
                        amp = -amp;
                    }
                    out.0[idx] = target;
                }
            }
        }
        Ok(Some((out, amp)))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:+.6}{:+.6}i)", self.coeff.re, self.coeff.im)?;
        for factor in &self.factors {
            write!(f, " {factor}")?;
        }
        Ok(())
    }
}

/// A sum of monomials. Products keep raw operator order until
/// [`OperatorPolynomial::canonicalize`] brings them into normal order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OperatorPolynomial {
    pub terms: Vec<Monomial>,
}

impl OperatorPolynomial {
    pub fn zero() -> Self {
        OperatorPolynomial { terms: Vec::new() }
    }

    pub fn identity() -> Self {
        Self::scalar(Complex64::new(1.0, 0.0))
    }

    pub fn scalar(c: Complex64) -> Self {
        OperatorPolynomial {
            terms: vec![Monomial::new(c, Vec::new())],
        }
    }

    pub fn monomial(coeff: impl Into<Complex64>, factors: Vec<Factor>) -> Self {
        OperatorPolynomial {
            terms: vec![Monomial::new(coeff, factors)],
        }
    }

    pub fn create(mode: ModeId) -> Self {
        Self::monomial(1.0, vec![Factor::create(mode)])
    }

    pub fn annihilate(mode: ModeId) -> Self {
        Self::monomial(1.0, vec![Factor::annihilate(mode)])
    }

    /// `a^+ a` for one mode.
    pub fn number(mode: ModeId) -> Self {
        Self::monomial(1.0, vec![Factor::create(mode), Factor::annihilate(mode)])
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: Monomial) {
        self.terms.push(term);
    }

    pub fn add(&self, other: &OperatorPolynomial) -> OperatorPolynomial {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        OperatorPolynomial { terms }
    }

    pub fn sub(&self, other: &OperatorPolynomial) -> OperatorPolynomial {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> OperatorPolynomial {
        OperatorPolynomial {
            terms: self
                .terms
                .iter()
                .map(|t| Monomial::new(t.coeff * c, t.factors.clone()))
                .collect(),
        }
    }

    /// Operator product `self * other` (self to the left).
    pub fn mul(&self, other: &OperatorPolynomial) -> OperatorPolynomial {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                factors.extend_from_slice(&b.factors);
                terms.push(Monomial::new(a.coeff * b.coeff, factors));
            }
        }
        OperatorPolynomial { terms }
    }

    pub fn pow(&self, n: u32) -> OperatorPolynomial {
        (0..n).fold(OperatorPolynomial::identity(), |acc, _| acc.mul(self))
    }

    pub fn adjoint(&self) -> OperatorPolynomial {
        OperatorPolynomial {
            terms: self.terms.iter().map(Monomial::adjoint).collect(),
        }
    }

    /// Keeps the monomials for which `keep` holds.
    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> OperatorPolynomial {
        OperatorPolynomial {
            terms: self.terms.iter().filter(|t| keep(t)).cloned().collect(),
        }
    }

    /// Normal-ordered form with like terms merged and exact zeros dropped.
    ///
    /// Adjacent out-of-order factors are swapped with the (anti)commutation
    /// sign dictated by `algebra`; `a_k a_k^+` additionally spawns the
    /// contraction term. Repeated fermionic factors kill the monomial.
    /// Canonicalizing twice gives the same polynomial.
    pub fn canonicalize(&self, algebra: &Algebra) -> OperatorPolynomial {
        let mut merged: BTreeMap<Vec<Factor>, Complex64> = BTreeMap::new();
        let mut pending: Vec<(Complex64, Vec<Factor>)> = self
            .terms
            .iter()
            .map(|t| (t.coeff, t.factors.clone()))
            .collect();
        while let Some((coeff, mut factors)) = pending.pop() {
            if coeff == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut swapped = false;
            let mut dead = false;
            for i in 0..factors.len().saturating_sub(1) {
                let (a, b) = (factors[i], factors[i + 1]);
                if a == b && algebra.is_fermionic(&a.mode) {
                    dead = true;
                    break;
                }
                if a <= b {
                    continue;
                }
                let both_fermi = matches!(
                    (algebra.sign_group(&a.mode), algebra.sign_group(&b.mode)),
                    (Some(x), Some(y)) if x == y
                );
                let sign = if both_fermi { -1.0 } else { 1.0 };
                if a.mode == b.mode && a.op == Ladder::Annihilate && b.op == Ladder::Create {
                    let mut contracted = factors.clone();
                    contracted.drain(i..i + 2);
                    pending.push((coeff, contracted));
                }
                factors.swap(i, i + 1);
                pending.push((coeff * sign, factors.clone()));
                swapped = true;
                break;
            }
            if dead || swapped {
                continue;
            }
            *merged.entry(factors).or_insert(Complex64::new(0.0, 0.0)) += coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(factors, coeff)| Monomial { coeff, factors })
            .collect();
        OperatorPolynomial { terms }
    }

    /// Drops monomials with `|coeff| <= tol`.
    pub fn prune(&self, tol: f64) -> OperatorPolynomial {
        self.filter(|t| t.coeff.norm() > tol)
    }

    /// Largest coefficient magnitude after canonicalization.
    pub fn max_coeff(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.norm())
            .fold(0.0, f64::max)
    }

    /// True when `self - other` canonicalizes to coefficients all `<= tol`.
    pub fn approx_eq(&self, other: &OperatorPolynomial, algebra: &Algebra, tol: f64) -> bool {
        self.sub(other).canonicalize(algebra).max_coeff() <= tol
    }

    /// Modes touched by any factor, sorted.
    pub fn modes(&self) -> Vec<ModeId> {
        let mut out: Vec<ModeId> = self
            .terms
            .iter()
            .flat_map(|t| t.factors.iter().map(|f| f.mode))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for OperatorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
