//! Spectral measures on finite sample spaces.
//!
//! A measure is stored atom by atom: one orthogonal projection per point of
//! the sample space, mutually orthogonal and summing to the identity. The
//! measure of any subset is the sum of its atoms' projections.

mod integral;
mod normal;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{operator_norm, ComplexMatrix, Tolerances, C64};

pub use integral::{push_forward, scalar_measure, spectral_integral, ScalarMeasure};
pub use normal::{
    chi, chi_inv, function_calculus, spectral_measure_of_normal, try_function_calculus, CLUSTER_TOL,
};

/// Name of a sample-space point.
///
/// Spectra use complex labels, joint evaluations use tuples of values, and
/// user-supplied spaces usually use strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomLabel {
    Name(String),
    Value(C64),
    Tuple(Vec<C64>),
}

impl AtomLabel {
    pub fn as_value(&self) -> Option<C64> {
        match self {
            AtomLabel::Value(z) => Some(*z),
            _ => None,
        }
    }
}

impl From<&str> for AtomLabel {
    fn from(s: &str) -> Self {
        AtomLabel::Name(s.to_owned())
    }
}

impl fmt::Display for AtomLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomLabel::Name(s) => write!(f, "{s}"),
            AtomLabel::Value(z) => write!(f, "{}", format_complex(*z)),
            AtomLabel::Tuple(zs) => {
                let parts: Vec<String> = zs.iter().map(|z| format_complex(*z)).collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

/// Round-trip precision rendering `re+imi`.
pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { "-" } else { "+" };
    format!("{:?}{sign}{:?}i", z.re, z.im.abs())
}

/// Ordered, pairwise distinct atom labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpace {
    labels: Vec<AtomLabel>,
}

impl SampleSpace {
    pub fn new(labels: Vec<AtomLabel>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput("sample space needs at least one atom".into()));
        }
        for i in 0..labels.len() {
            if labels[..i].contains(&labels[i]) {
                return Err(Error::InvalidInput(format!("duplicate atom label `{}`", labels[i])));
            }
        }
        Ok(Self { labels })
    }

    /// Atoms named `"0"`, `"1"`, ...
    pub fn indexed(m: usize) -> Result<Self> {
        Self::new((0..m).map(|i| AtomLabel::Name(i.to_string())).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[AtomLabel] {
        &self.labels
    }

    pub fn index_of(&self, label: &AtomLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownAtom(label.to_string()))
    }
}

/// Projection-valued measure on a finite sample space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    space: SampleSpace,
    dim: usize,
    projections: Vec<ComplexMatrix>,
}

impl SpectralMeasure {
    /// Builds a measure after checking that the atoms are mutually orthogonal
    /// projections resolving the identity.
    pub fn new(space: SampleSpace, projections: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        if projections.len() != space.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms but {} projections",
                space.len(),
                projections.len()
            )));
        }
        let dim = projections[0].dim();
        let eps = tol.residual_tol;
        let mut total = ComplexMatrix::zeros(dim);
        for (i, p) in projections.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i} has dimension {} instead of {dim}",
                    p.dim()
                )));
            }
            if p.hermitian_defect() > eps {
                return Err(Error::InvalidMeasure(format!("atom {i} is not self-adjoint")));
            }
            if (&(p * p) - p).frobenius_norm() > eps {
                return Err(Error::InvalidMeasure(format!("atom {i} is not idempotent")));
            }
            for (j, q) in projections.iter().enumerate().take(i) {
                if (p * q).frobenius_norm() > eps {
                    return Err(Error::InvalidMeasure(format!(
                        "atoms {j} and {i} are not orthogonal"
                    )));
                }
            }
            total = &total + p;
        }
        if (&total - &ComplexMatrix::identity(dim)).frobenius_norm() > eps {
            return Err(Error::InvalidMeasure(
                "atom projections do not sum to the identity".into(),
            ));
        }
        Ok(Self {
            space,
            dim,
            projections,
        })
    }

    /// Rank-one coordinate projections `diag(e_i)` on `C^n`, atoms `"0".."n-1"`.
    pub fn coordinate(n: usize) -> Result<Self> {
        let projections = (0..n).map(|i| ComplexMatrix::unit(n, i, i)).collect();
        Self::new(SampleSpace::indexed(n)?, projections, &Tolerances::default())
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atom_count(&self) -> usize {
        self.projections.len()
    }

    pub fn projections(&self) -> &[ComplexMatrix] {
        &self.projections
    }

    pub fn projection(&self, atom: usize) -> &ComplexMatrix {
        &self.projections[atom]
    }

    /// `E(A)` for a set of atom labels.
    pub fn measure_of_set(&self, atoms: &[AtomLabel]) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(self.dim);
        let mut seen = Vec::with_capacity(atoms.len());
        for a in atoms {
            let i = self.space.index_of(a)?;
            if !seen.contains(&i) {
                seen.push(i);
                out = &out + &self.projections[i];
            }
        }
        Ok(out)
    }

    /// Operator norms of the atom projections.
    pub fn atom_norms(&self, tol: &Tolerances) -> Result<Vec<f64>> {
        self.projections.iter().map(|p| operator_norm(p, tol)).collect()
    }

    /// Atoms whose projection has operator norm at most `rank_tol`.
    pub fn null_atoms(&self, tol: &Tolerances) -> Result<Vec<usize>> {
        Ok(self
            .atom_norms(tol)?
            .into_iter()
            .enumerate()
            .filter(|(_, n)| *n <= tol.rank_tol)
            .map(|(i, _)| i)
            .collect())
    }

    /// Complement of [`null_atoms`](Self::null_atoms).
    pub fn support(&self, tol: &Tolerances) -> Result<Vec<usize>> {
        Ok(self
            .atom_norms(tol)?
            .into_iter()
            .enumerate()
            .filter(|(_, n)| *n > tol.rank_tol)
            .map(|(i, _)| i)
            .collect())
    }

    /// Non-null atoms whose norm is within a factor ten of the null cutoff.
    pub fn near_threshold_atoms(&self, tol: &Tolerances) -> Result<Vec<usize>> {
        Ok(self
            .atom_norms(tol)?
            .into_iter()
            .enumerate()
            .filter(|(_, n)| *n > tol.rank_tol && *n <= 10.0 * tol.rank_tol)
            .map(|(i, _)| i)
            .collect())
    }
}

/// Complex function on the atoms of a sample space, possibly undefined at
/// some atoms (admissible only where the paired measure vanishes).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurableFunction {
    space: SampleSpace,
    values: Vec<Option<C64>>,
}

impl MeasurableFunction {
    pub fn new(space: SampleSpace, values: Vec<Option<C64>>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                found: values.len(),
            });
        }
        if values.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("function values must be finite".into()));
        }
        Ok(Self { space, values })
    }

    /// Everywhere-defined function from a value table.
    pub fn defined(space: SampleSpace, values: Vec<C64>) -> Result<Self> {
        Self::new(space, values.into_iter().map(Some).collect())
    }

    pub fn real(space: SampleSpace, values: &[f64]) -> Result<Self> {
        Self::defined(space, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn constant(space: SampleSpace, c: C64) -> Self {
        let values = vec![Some(c); space.len()];
        Self { space, values }
    }

    pub fn from_labels(space: SampleSpace, f: impl Fn(&AtomLabel) -> Option<C64>) -> Result<Self> {
        let values = space.labels().iter().map(f).collect();
        Self::new(space, values)
    }

    /// Identity on complex labels; undefined on any other label kind.
    pub fn label_identity(space: SampleSpace) -> Self {
        let values = space.labels().iter().map(AtomLabel::as_value).collect();
        Self { space, values }
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn values(&self) -> &[Option<C64>] {
        &self.values
    }

    pub fn value(&self, atom: usize) -> Option<C64> {
        self.values[atom]
    }

    pub fn is_defined(&self, atom: usize) -> bool {
        self.values[atom].is_some()
    }

    /// Pointwise combination, undefined wherever either side is undefined.
    pub fn zip_with(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.check_same_space(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| Some(op((*a)?, (*b)?)))
            .collect();
        Ok(Self {
            space: self.space.clone(),
            values,
        })
    }

    pub fn map(&self, op: impl Fn(C64) -> C64) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(|v| v.map(&op)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// `self ∘ φ` where `map[i]` is the index in `self`'s space of `φ(i)`.
    pub fn compose(&self, domain: SampleSpace, map: &[usize]) -> Result<Self> {
        if map.len() != domain.len() {
            return Err(Error::DimensionMismatch {
                expected: domain.len(),
                found: map.len(),
            });
        }
        let values = map
            .iter()
            .map(|&j| {
                self.values
                    .get(j)
                    .copied()
                    .ok_or_else(|| Error::UnknownAtom(format!("target index {j}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { space: domain, values })
    }

    pub(crate) fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::InvalidInput(
                "functions are defined on different sample spaces".into(),
            ));
        }
        Ok(())
    }
}
