use serde::Serialize;

use super::{MeasurableFunction, SampleSpace, SpectralMeasure};
use crate::error::{Error, Result};
use crate::numkernel::{vec_dot, ComplexMatrix, Tolerances, C64};

/// Scalar measure `A ↦ ⟨E(A)ψ, ψ⟩`, stored atom by atom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarMeasure {
    pub space: SampleSpace,
    pub masses: Vec<f64>,
}

impl ScalarMeasure {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

pub fn scalar_measure(e: &SpectralMeasure, psi: &[C64]) -> Result<ScalarMeasure> {
    if psi.len() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: psi.len(),
        });
    }
    // Masses are real and nonnegative up to rounding; clamp the noise.
    let masses = e
        .projections()
        .iter()
        .map(|p| vec_dot(psi, &p.mul_vec(psi)).re.max(0.0))
        .collect();
    Ok(ScalarMeasure {
        space: e.space().clone(),
        masses,
    })
}

/// `J^E_f = Σ f(i) P_i` over the non-null atoms of `E`.
pub fn spectral_integral(
    e: &SpectralMeasure,
    f: &MeasurableFunction,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    if f.space() != e.space() {
        return Err(Error::InvalidInput(
            "function and measure live on different sample spaces".into(),
        ));
    }
    let norms = e.atom_norms(tol)?;
    let mut out = ComplexMatrix::zeros(e.dim());
    for (i, p) in e.projections().iter().enumerate() {
        if norms[i] <= tol.rank_tol {
            continue;
        }
        let v = f.value(i).ok_or(Error::UndefinedOnSupport { atom: i })?;
        out = &out + &p.scale(v);
    }
    Ok(out)
}

/// Push-forward `φ_* E`: the atom at target `t` carries `Σ_{φ(s)=t} P_s`.
/// `map[s]` is the index in `target` of `φ(s)`.
pub fn push_forward(
    e: &SpectralMeasure,
    target: SampleSpace,
    map: &[usize],
    tol: &Tolerances,
) -> Result<SpectralMeasure> {
    if map.len() != e.atom_count() {
        return Err(Error::DimensionMismatch {
            expected: e.atom_count(),
            found: map.len(),
        });
    }
    let mut projections = vec![ComplexMatrix::zeros(e.dim()); target.len()];
    for (s, &t) in map.iter().enumerate() {
        let slot = projections
            .get_mut(t)
            .ok_or_else(|| Error::UnknownAtom(format!("target index {t}")))?;
        *slot = &*slot + e.projection(s);
    }
    SpectralMeasure::new(target, projections, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::AtomLabel;

    fn pauli_measure() -> (SpectralMeasure, ComplexMatrix) {
        let i2 = ComplexMatrix::identity(2);
        let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = SpectralMeasure::new(
            SampleSpace::new(vec!["+".into(), "-".into()]).unwrap(),
            vec![(&i2 + &sx).scale_real(0.5), (&i2 - &sx).scale_real(0.5)],
            &Tolerances::default(),
        )
        .unwrap();
        (e, sx)
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn scalar_measure_examples() {
        let e2 = SpectralMeasure::coordinate(2).unwrap();
        let zero = scalar_measure(&e2, &[c(0.0), c(0.0)]).unwrap();
        assert_eq!(zero.masses, vec![0.0, 0.0]);
        assert_eq!(scalar_measure(&e2, &[c(1.0), c(0.0)]).unwrap().masses, vec![1.0, 0.0]);

        let (e, _) = pauli_measure();
        let m = scalar_measure(&e, &[c(1.0), c(0.0)]).unwrap();
        assert!((m.masses[0] - 0.5).abs() < 1e-15 && (m.masses[1] - 0.5).abs() < 1e-15);

        let psi = [C64::new(0.3, -1.0), C64::new(2.0, 0.5)];
        let m = scalar_measure(&e, &psi).unwrap();
        assert!((m.total() - (0.09 + 1.0 + 4.0 + 0.25)).abs() < 1e-12);
        assert!(scalar_measure(&e, &[c(1.0)]).is_err());
    }

    #[test]
    fn spectral_integral_examples() {
        let t = Tolerances::default();
        let e3 = SpectralMeasure::coordinate(3).unwrap();
        let one = MeasurableFunction::constant(e3.space().clone(), c(1.0));
        assert_eq!(spectral_integral(&e3, &one, &t).unwrap(), ComplexMatrix::identity(3));
        let f = MeasurableFunction::real(e3.space().clone(), &[5.0, 5.0, 7.0]).unwrap();
        assert_eq!(
            spectral_integral(&e3, &f, &t).unwrap(),
            ComplexMatrix::from_real_diag(&[5.0, 5.0, 7.0])
        );

        let (e, sx) = pauli_measure();
        let f = MeasurableFunction::real(e.space().clone(), &[1.0, -1.0]).unwrap();
        assert!((&spectral_integral(&e, &f, &t).unwrap() - &sx).frobenius_norm() < 1e-15);
    }

    #[test]
    fn undefined_values_only_allowed_on_null_atoms() {
        let t = Tolerances::default();
        let e = SpectralMeasure::new(
            SampleSpace::indexed(3).unwrap(),
            vec![ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 1, 1), ComplexMatrix::zeros(2)],
            &t,
        )
        .unwrap();
        let ok = MeasurableFunction::new(e.space().clone(), vec![Some(c(2.0)), Some(c(3.0)), None]).unwrap();
        assert_eq!(
            spectral_integral(&e, &ok, &t).unwrap(),
            ComplexMatrix::from_real_diag(&[2.0, 3.0])
        );
        let bad = MeasurableFunction::new(e.space().clone(), vec![Some(c(2.0)), None, None]).unwrap();
        assert_eq!(
            spectral_integral(&e, &bad, &t),
            Err(Error::UndefinedOnSupport { atom: 1 })
        );
    }

    #[test]
    fn push_forward_examples() {
        let t = Tolerances::default();
        let e = SpectralMeasure::coordinate(3).unwrap();
        let same = push_forward(&e, e.space().clone(), &[0, 1, 2], &t).unwrap();
        assert_eq!(same, e);

        let target = SampleSpace::new(vec!["a".into(), "b".into()]).unwrap();
        let pf = push_forward(&e, target, &[0, 1, 1], &t).unwrap();
        assert_eq!(pf.projection(0), &ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0]));
        assert_eq!(pf.projection(1), &ComplexMatrix::from_real_diag(&[0.0, 1.0, 1.0]));
        assert_eq!(pf.space().labels()[1], AtomLabel::from("b"));

        let target = SampleSpace::indexed(1).unwrap();
        assert!(matches!(push_forward(&e, target, &[0, 0, 3], &t), Err(Error::UnknownAtom(_))));
    }

    #[test]
    fn pushforward_composition_on_fixed_instance() {
        // J^{φ*E}_f against J^E_{f∘φ}, both computed from scratch.
        let t = Tolerances::default();
        let e = SpectralMeasure::coordinate(4).unwrap();
        let target = SampleSpace::indexed(3).unwrap();
        let phi = [2, 0, 2, 1];
        let f = MeasurableFunction::defined(target.clone(), vec![C64::new(1.0, 2.0), c(-3.0), c(0.5)]).unwrap();
        let lhs = spectral_integral(&push_forward(&e, target, &phi, &t).unwrap(), &f, &t).unwrap();
        let rhs = spectral_integral(&e, &f.compose(e.space().clone(), &phi).unwrap(), &t).unwrap();
        assert!((&lhs - &rhs).frobenius_norm() < 1e-15);
        let expected = ComplexMatrix::from_diag(&[c(0.5), C64::new(1.0, 2.0), c(0.5), c(-3.0)]);
        assert_eq!(lhs, expected);
    }
}
