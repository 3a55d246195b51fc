//! Kernels of rectangular complex matrices and Hilbert–Schmidt
//! orthonormalization.
//!
//! The kernel is read off a one-sided (Hestenes) Jacobi SVD. Tall inputs are
//! first reduced to a square triangular factor with Householder reflections,
//! which keeps the commutant systems (`|X|·n²` rows, `n²` columns) cheap.

use super::matrix::{vec_dot, vec_norm, ComplexMatrix, C64, ONE, ZERO};
use super::Tolerances;
use crate::error::{Error, Result};

const SVD_SWEEPS: usize = 60;

/// On the unit-scaled matrix, couplings below this, or columns with squared
/// norm below it, cannot move any singular value by more than rounding.
const ROTATION_FLOOR: f64 = f64::EPSILON * f64::EPSILON;

/// Dense rectangular complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RectMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl RectMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {rows}x{cols} matrix, found {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(cols: usize, rows: &[Vec<C64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::InvalidMatrix(format!(
                    "row of length {} in a matrix with {cols} columns",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.cols + j] = z;
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        self.data
            .chunks(self.cols.max(1))
            .take(self.rows)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).collect())
            .collect()
    }
}

/// Singular values with right singular vectors, ordered ascending by value.
#[derive(Debug, Clone)]
pub struct RightSingular {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

/// One-sided Jacobi SVD returning singular values and right singular vectors.
pub fn right_singular(l: &RectMatrix) -> RightSingular {
    let n = l.cols;
    let mut w = if l.rows > n {
        householder_r(l)
    } else {
        l.columns()
    };
    // Unit Frobenius scale keeps every inner product far from the subnormal
    // range, where the rotation phase stops being unimodular.
    let scale = w.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale > 0.0 {
        w.iter_mut().flatten().for_each(|z| *z /= scale);
    }
    // Rounding noise of a length-m inner product.
    let orth_tol = f64::EPSILON * (w.first().map_or(1, Vec::len) as f64).sqrt();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|i| (0..n).map(|k| if k == i { ONE } else { ZERO }).collect())
        .collect();

    for _ in 0..SVD_SWEEPS {
        let mut rotated = false;
        let mut norms: Vec<f64> = w.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect();
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta) = (norms[p], norms[q]);
                let gamma = vec_dot(&w[p], &w[q]);
                let g = gamma.norm();
                if g <= ROTATION_FLOOR
                    || alpha.min(beta) <= ROTATION_FLOOR
                    || g <= orth_tol * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, p, q, c, s, phase);
                norms[p] = (alpha - t * g).max(0.0);
                norms[q] = beta + t * g;
                rotate_pair(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = w.iter().map(|c| vec_norm(c) * scale).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[a].total_cmp(&sigma[b]).then(a.cmp(&b)));
    RightSingular {
        values: order.iter().map(|&j| sigma[j]).collect(),
        vectors: order.iter().map(|&j| v[j].clone()).collect(),
    }
}

fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let (left, right) = cols.split_at_mut(q);
    let (wp, wq) = (&mut left[p], &mut right[0]);
    for (x, y) in wp.iter_mut().zip(wq.iter_mut()) {
        let yq = *y * phase;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Upper-triangular factor of a tall matrix, returned column by column.
fn householder_r(l: &RectMatrix) -> Vec<Vec<C64>> {
    let (m, n) = (l.rows, l.cols);
    let mut cols = l.columns();
    for k in 0..n {
        let norm = cols[k][k..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = cols[k][k];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in cols.iter_mut().skip(k) {
            let tau = vec_dot(&v, &col[k..m]) * (2.0 / vnorm2);
            for (dst, vi) in col[k..m].iter_mut().zip(&v) {
                *dst -= vi * tau;
            }
        }
    }
    cols.into_iter().map(|c| c[..n].to_vec()).collect()
}

/// Orthonormal basis of `ker(L)`: right singular vectors whose singular
/// value is at most `rank_tol · (1 + σ_max)`, ordered by singular value.
pub fn nullspace(l: &RectMatrix, tol: &Tolerances) -> Vec<Vec<C64>> {
    let svd = right_singular(l);
    let cutoff = rank_cutoff(&svd, tol);
    svd.values
        .iter()
        .zip(svd.vectors)
        .filter(|(s, _)| **s <= cutoff)
        .map(|(_, v)| v)
        .collect()
}

/// Numerical rank under the same cutoff `nullspace` uses.
pub fn rank(l: &RectMatrix, tol: &Tolerances) -> usize {
    let svd = right_singular(l);
    let cutoff = rank_cutoff(&svd, tol);
    svd.values.iter().filter(|s| **s > cutoff).count()
}

fn rank_cutoff(svd: &RightSingular, tol: &Tolerances) -> f64 {
    let sigma_max = svd.values.last().copied().unwrap_or(0.0);
    tol.rank_tol * (1.0 + sigma_max)
}

/// Gram–Schmidt (two passes) under the Hilbert–Schmidt inner product;
/// members whose residual is at most `rank_tol · (1 + ‖M‖)` are dropped.
pub fn orthonormalize_hs(mats: &[ComplexMatrix], tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
    let Some(first) = mats.first() else {
        return Ok(Vec::new());
    };
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    for m in mats {
        first.check_same_dim(m)?;
        let mut r = m.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.hs_inner(&r);
                r = &r - &b.scale(c);
            }
        }
        let norm = r.frobenius_norm();
        if norm > tol.rank_tol * (1.0 + m.frobenius_norm()) {
            basis.push(r.scale_real(1.0 / norm));
        }
    }
    Ok(basis)
}
