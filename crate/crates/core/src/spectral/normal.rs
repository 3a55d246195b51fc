//! Spectral measures of normal matrices and the bounded functional calculus.

use super::{spectral_integral, AtomLabel, MeasurableFunction, SampleSpace, SpectralMeasure};
use crate::error::{Error, Result};
use crate::numkernel::{joint_diagonalize, operator_norm, vec_dot, ComplexMatrix, Tolerances, C64};

/// Eigenvalues closer than `CLUSTER_TOL · (1 + ‖T‖)` share one atom.
pub const CLUSTER_TOL: f64 = 1e-7;

/// Spectral measure `E_T` on the spectrum of a normal matrix, one atom per
/// eigenvalue cluster, labelled by the cluster mean and ordered by
/// (real, imaginary) part.
pub fn spectral_measure_of_normal(t: &ComplexMatrix, tol: &Tolerances) -> Result<SpectralMeasure> {
    let norm = operator_norm(t, tol)?;
    let defect = t.normality_defect();
    if defect > tol.residual_tol * (1.0 + norm * norm) {
        return Err(Error::NotNormal { defect });
    }
    let n = t.dim();
    let adj = t.adjoint();
    let re_part = (t + &adj).scale_real(0.5);
    let im_part = (t - &adj).scale(C64::new(0.0, -0.5));
    let v = joint_diagonalize(n, &[re_part, im_part], tol)?;

    let vectors: Vec<Vec<C64>> = (0..n).map(|k| v.column(k)).collect();
    let eigenvalues: Vec<C64> = vectors.iter().map(|x| vec_dot(x, &t.mul_vec(x))).collect();

    // Greedy union of every pair within the cluster radius.
    let radius = CLUSTER_TOL * (1.0 + norm);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if (eigenvalues[a] - eigenvalues[b]).norm() <= radius {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for k in 0..n {
        let r = find(&mut parent, k);
        match roots.iter().position(|&x| x == r) {
            Some(pos) => clusters[pos].push(k),
            None => {
                roots.push(r);
                clusters.push(vec![k]);
            }
        }
    }

    let mut atoms: Vec<(C64, ComplexMatrix)> = clusters
        .iter()
        .map(|members| {
            let mean = members.iter().map(|&k| eigenvalues[k]).sum::<C64>() / members.len() as f64;
            let mut p = ComplexMatrix::zeros(n);
            for &k in members {
                p = &p + &ComplexMatrix::outer(&vectors[k], &vectors[k]);
            }
            (mean, p)
        })
        .collect();
    atoms.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));

    let (labels, projections): (Vec<_>, Vec<_>) = atoms
        .into_iter()
        .map(|(z, p)| (AtomLabel::Value(z), p))
        .unzip();
    SpectralMeasure::new(SampleSpace::new(labels)?, projections, tol)
}

/// `f(T)` for a normal matrix, evaluating `f` on the eigenvalue labels.
pub fn function_calculus(
    t: &ComplexMatrix,
    f: impl Fn(C64) -> C64,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    try_function_calculus(t, |z| Ok(f(z)), tol)
}

/// As [`function_calculus`] for a symbol that may reject some eigenvalues.
pub fn try_function_calculus(
    t: &ComplexMatrix,
    f: impl Fn(C64) -> Result<C64>,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let e = spectral_measure_of_normal(t, tol)?;
    let values = e
        .space()
        .labels()
        .iter()
        .map(|l| l.as_value().map(&f).transpose())
        .collect::<Result<Vec<_>>>()?;
    let symbol = MeasurableFunction::new(e.space().clone(), values)?;
    spectral_integral(&e, &symbol, tol)
}

/// `z / (|z| + 1)`, a bijection of the plane onto the open unit disc.
pub fn chi(z: C64) -> C64 {
    z / (z.norm() + 1.0)
}

/// `z / (1 - |z|)` on the open unit disc.
pub fn chi_inv(z: C64, tol: &Tolerances) -> Result<C64> {
    let r = z.norm();
    if r >= 1.0 - tol.value_tol {
        return Err(Error::OutOfDisc { modulus: r });
    }
    Ok(z / (1.0 - r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn diagonal_with_repetition() {
        let t = Tolerances::default();
        let e = spectral_measure_of_normal(&ComplexMatrix::from_real_diag(&[1.0, 1.0, 3.0]), &t).unwrap();
        assert_eq!(e.atom_count(), 2);
        assert_eq!(e.space().labels()[0], AtomLabel::Value(c(1.0)));
        assert_eq!(e.space().labels()[1], AtomLabel::Value(c(3.0)));
        assert!((e.projection(0) - &ComplexMatrix::from_real_diag(&[1.0, 1.0, 0.0])).frobenius_norm() < 1e-14);
        assert!((e.projection(1) - &ComplexMatrix::from_real_diag(&[0.0, 0.0, 1.0])).frobenius_norm() < 1e-14);
    }

    #[test]
    fn pauli_x_projections() {
        let t = Tolerances::default();
        let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let i2 = ComplexMatrix::identity(2);
        let e = spectral_measure_of_normal(&sx, &t).unwrap();
        let labels: Vec<C64> = e.space().labels().iter().map(|l| l.as_value().unwrap()).collect();
        assert!((labels[0] - c(-1.0)).norm() < 1e-14 && (labels[1] - c(1.0)).norm() < 1e-14);
        assert!((e.projection(0) - &(&i2 - &sx).scale_real(0.5)).frobenius_norm() < 1e-14);
        assert!((e.projection(1) - &(&i2 + &sx).scale_real(0.5)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn scalar_non_hermitian_is_one_atom() {
        let t = Tolerances::default();
        let e = spectral_measure_of_normal(&ComplexMatrix::scalar(2, C64::new(0.0, 1.0)), &t).unwrap();
        assert_eq!(e.atom_count(), 1);
        assert_eq!(e.space().labels()[0], AtomLabel::Value(C64::new(0.0, 1.0)));
        assert_eq!(e.projection(0), &ComplexMatrix::identity(2));
    }

    #[test]
    fn non_normal_is_rejected() {
        let t = Tolerances::default();
        let nil = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(spectral_measure_of_normal(&nil, &t), Err(Error::NotNormal { .. })));
    }

    #[test]
    fn function_calculus_examples() {
        let t = Tolerances::default();
        let m = ComplexMatrix::from_rows(vec![
            vec![C64::new(1.0, 1.0), c(0.0)],
            vec![c(0.0), C64::new(-2.0, 0.5)],
        ])
        .unwrap();
        assert!((&function_calculus(&m, |z| z, &t).unwrap() - &m).frobenius_norm() < 1e-14);

        let d = ComplexMatrix::from_real_diag(&[0.0, 2f64.ln()]);
        let e = function_calculus(&d, |z| z.exp(), &t).unwrap();
        assert!((&e - &ComplexMatrix::from_real_diag(&[1.0, 2.0])).frobenius_norm() < 1e-14);

        let k = function_calculus(&m, |_| C64::new(3.0, -1.0), &t).unwrap();
        assert!((&k - &ComplexMatrix::scalar(2, C64::new(3.0, -1.0))).frobenius_norm() < 1e-14);
    }

    #[test]
    fn chi_examples() {
        let t = Tolerances::default();
        assert_eq!(chi(c(0.0)), c(0.0));
        assert_eq!(chi(c(3.0)), c(0.75));
        assert_eq!(chi_inv(c(0.75), &t).unwrap(), c(3.0));
        assert_eq!(chi(c(-1.0)), c(-0.5));
        assert!(matches!(chi_inv(c(1.0), &t), Err(Error::OutOfDisc { .. })));
        let z = C64::new(-4.0, 7.5);
        assert!((chi_inv(chi(z), &t).unwrap() - z).norm() < 1e-13);
    }
}
