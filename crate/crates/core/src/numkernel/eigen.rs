//! Hermitian eigendecomposition by cyclic Jacobi rotations, the operator
//! norm, and simultaneous diagonalization of commuting Hermitian families.

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use super::Tolerances;
use crate::error::{Error, Result};

/// Sweep budget for the cyclic Jacobi eigensolver.
pub const JACOBI_SWEEPS: usize = 30;

/// Eigenvalues in ascending order with the matching unitary eigenvector matrix
/// (eigenvector `k` is column `k`).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(λ) V*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d: Vec<C64> = self.values.iter().map(|&x| C64::new(x, 0.0)).collect();
        let vd = &self.vectors * &ComplexMatrix::from_diag(&d);
        &vd * &self.vectors.adjoint()
    }
}

/// Pivots this small (on the unit-scaled matrix) are left alone.
const PIVOT_FLOOR: f64 = 1e-3 * f64::EPSILON;

pub fn herm_eig(a: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    let scale = a.frobenius_norm();
    let asymmetry = a.hermitian_defect();
    if asymmetry > tol.residual_tol * (1.0 + scale) {
        return Err(Error::NotHermitian { asymmetry });
    }
    let n = a.dim();
    // Work at unit Frobenius scale so pivots never reach subnormal range.
    let unit = if scale > 0.0 { 1.0 / scale } else { 1.0 };
    let mut w = (a + &a.adjoint()).scale_real(0.5 * unit);
    for i in 0..n {
        w[(i, i)] = C64::new(w[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);

    // Rotations stop near machine precision; the residual tolerance is only
    // the acceptance bar once the sweep budget runs out.
    let target = 4.0 * f64::EPSILON;
    let mut converged = false;
    for _ in 0..JACOBI_SWEEPS {
        if w.off_diagonal_norm() <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
    }
    if !converged && w.off_diagonal_norm() > tol.residual_tol {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(i, i)].re.total_cmp(&w[(j, j)].re));
    let values = order.iter().map(|&i| w[(i, i)].re / unit).collect();
    let cols: Vec<Vec<C64>> = order.iter().map(|&i| v.column(i)).collect();
    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix::from_columns(&cols),
    })
}

/// One complex Jacobi rotation annihilating `w[(p, q)]`, accumulated into `v`.
fn rotate(w: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    let r = apq.norm();
    if r <= PIVOT_FLOOR {
        return;
    }
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    // The phase makes the pivot real; the real rotation then follows the
    // classical symmetric Jacobi step.
    let phase = apq.conj() / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = w.dim();

    let gp_q = -phase * s; // column p of the rotation: c e_p + gp_q e_q
    let gq_q = phase * c; // column q of the rotation: s e_p + gq_q e_q
    for k in 0..n {
        let x = w[(k, p)];
        let y = w[(k, q)];
        w[(k, p)] = x * c + y * gp_q;
        w[(k, q)] = x * s + y * gq_q;
    }
    for k in 0..n {
        let x = w[(p, k)];
        let y = w[(q, k)];
        w[(p, k)] = x * c + y * gp_q.conj();
        w[(q, k)] = x * s + y * gq_q.conj();
    }
    for k in 0..n {
        let x = v[(k, p)];
        let y = v[(k, q)];
        v[(k, p)] = x * c + y * gp_q;
        v[(k, q)] = x * s + y * gq_q;
    }
    w[(p, q)] = ZERO;
    w[(q, p)] = ZERO;
    w[(p, p)] = C64::new(w[(p, p)].re, 0.0);
    w[(q, q)] = C64::new(w[(q, q)].re, 0.0);
}

/// Largest singular value, from the top eigenvalue of `A* A`.
pub fn operator_norm(a: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let gram = &a.adjoint() * a;
    let eig = herm_eig(&gram, tol)?;
    Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Unitary `V` such that `V* A V` is diagonal for every member of a commuting
/// Hermitian family. An empty family yields the identity on `C^dim`.
pub fn joint_diagonalize(
    dim: usize,
    family: &[ComplexMatrix],
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    for a in family {
        if a.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: a.dim(),
            });
        }
        let asymmetry = a.hermitian_defect();
        if asymmetry > tol.residual_tol * (1.0 + a.frobenius_norm()) {
            return Err(Error::NotHermitian { asymmetry });
        }
    }
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            let (a, b) = (&family[i], &family[j]);
            let defect = a.commutator(b).frobenius_norm();
            if defect > tol.residual_tol * (1.0 + a.frobenius_norm() * b.frobenius_norm()) {
                return Err(Error::NotCommuting {
                    first: i,
                    second: j,
                });
            }
        }
    }

    let start: Vec<Vec<C64>> = (0..dim)
        .map(|i| (0..dim).map(|k| if k == i { ONE } else { ZERO }).collect())
        .collect();
    let mut columns = Vec::with_capacity(dim);
    split_eigenspaces(start, family, tol, &mut columns)?;
    Ok(ComplexMatrix::from_columns(&columns))
}

/// Diagonalizes the compression of `ops[0]` to span(`basis`) and recurses on
/// each eigenvalue cluster with the remaining operators.
fn split_eigenspaces(
    basis: Vec<Vec<C64>>,
    ops: &[ComplexMatrix],
    tol: &Tolerances,
    out: &mut Vec<Vec<C64>>,
) -> Result<()> {
    let Some((head, rest)) = ops.split_first() else {
        out.extend(basis);
        return Ok(());
    };
    if basis.len() == 1 {
        out.extend(basis);
        return Ok(());
    }
    let k = basis.len();
    let images: Vec<Vec<C64>> = basis.iter().map(|b| head.mul_vec(b)).collect();
    let mut compressed = ComplexMatrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            compressed[(i, j)] = super::matrix::vec_dot(&basis[i], &images[j]);
        }
    }
    let eig = herm_eig(&compressed, tol)?;
    let gap = tol.residual_tol * (1.0 + head.frobenius_norm());

    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && eig.values[end] - eig.values[end - 1] < gap {
            end += 1;
        }
        let cluster: Vec<Vec<C64>> = (start..end)
            .map(|c| {
                let coeffs = eig.vectors.column(c);
                let n = basis[0].len();
                (0..n)
                    .map(|row| (0..k).map(|j| basis[j][row] * coeffs[j]).sum())
                    .collect()
            })
            .collect();
        split_eigenspaces(cluster, rest, tol, out)?;
        start = end;
    }
    Ok(())
}
