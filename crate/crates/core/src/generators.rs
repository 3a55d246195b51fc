//! Deciding whether a set of operators generates the algebra of a spectral
//! measure.
//!
//! The criterion has two parts: every operator must be a spectral integral
//! `J^E_f`, and the recovered symbols must separate the non-null atoms. The
//! verdict is always cross-checked against the direct computation
//! `A(X) == A(P_E)` with bicommutants.

use serde::Serialize;

use crate::algebra::{algebra_equal, generated_algebra, AlgebraBasis, OperatorSet};
use crate::error::{Error, Result};
use crate::numkernel::{operator_norm, ComplexMatrix, Tolerances, C64};
use crate::spectral::{
    function_calculus, push_forward, spectral_integral, AtomLabel, MeasurableFunction, SampleSpace,
    SpectralMeasure,
};

/// Outcome of trying to write one operator as `J^E_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolRecovery {
    /// Trace-ratio candidate `tr(P_i T) / tr(P_i)`, undefined on null atoms.
    pub candidate: MeasurableFunction,
    /// Operator-norm distance `‖T − J^E_candidate‖`.
    pub residual: f64,
    pub expressible: bool,
}

impl SymbolRecovery {
    pub fn symbol(&self) -> Option<&MeasurableFunction> {
        self.expressible.then_some(&self.candidate)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationReport {
    pub separating: bool,
    /// The null set removed before separation is tested.
    pub null_atoms_used: Vec<usize>,
    /// Lexicographically first pair of support atoms no function separates.
    pub witness_pair: Option<(usize, usize)>,
    /// Support atoms with projection norm in `(rank_tol, 10·rank_tol]`.
    pub near_threshold_atoms: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationVerdict {
    pub cond1: Vec<SymbolRecovery>,
    pub cond2: SeparationReport,
    pub criterion_generates: bool,
    pub oracle_generates: bool,
    /// `(dim A(X), dim A(P_E))`.
    pub algebra_dims: (usize, usize),
}

impl GenerationVerdict {
    pub fn agrees(&self) -> bool {
        self.criterion_generates == self.oracle_generates
    }
}

fn check_dim(e: &SpectralMeasure, found: usize) -> Result<()> {
    if e.dim() != found {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found,
        });
    }
    Ok(())
}

pub fn recover_symbol(e: &SpectralMeasure, t: &ComplexMatrix, tol: &Tolerances) -> Result<SymbolRecovery> {
    check_dim(e, t.dim())?;
    let norms = e.atom_norms(tol)?;
    let values = e
        .projections()
        .iter()
        .zip(&norms)
        .map(|(p, &norm)| {
            (norm > tol.rank_tol).then(|| {
                let pt = p * t;
                pt.trace() / p.trace().re
            })
        })
        .collect();
    let candidate = MeasurableFunction::new(e.space().clone(), values)?;
    let rebuilt = spectral_integral(e, &candidate, tol)?;
    let residual = operator_norm(&(t - &rebuilt), tol)?;
    let expressible = residual <= tol.residual_tol * (1.0 + operator_norm(t, tol)?);
    Ok(SymbolRecovery {
        candidate,
        residual,
        expressible,
    })
}

/// Returns the support indices after checking that every function lives on
/// `E`'s space and is defined on the support.
fn checked_support(e: &SpectralMeasure, family: &[MeasurableFunction], tol: &Tolerances) -> Result<Vec<usize>> {
    let support = e.support(tol)?;
    for f in family {
        if f.space() != e.space() {
            return Err(Error::InvalidInput(
                "function and measure live on different sample spaces".into(),
            ));
        }
        if let Some(&atom) = support.iter().find(|&&i| !f.is_defined(i)) {
            return Err(Error::UndefinedOnSupport { atom });
        }
    }
    Ok(support)
}

/// Per-function separation thresholds `value_tol · (1 + max_support |f|)`.
fn thresholds(family: &[MeasurableFunction], support: &[usize], tol: &Tolerances) -> Vec<f64> {
    family
        .iter()
        .map(|f| {
            let max = support
                .iter()
                .filter_map(|&i| f.value(i))
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            tol.value_tol * (1.0 + max)
        })
        .collect()
}

fn separated(family: &[MeasurableFunction], cut: &[f64], i: usize, j: usize) -> bool {
    family.iter().zip(cut).any(|(f, &c)| match (f.value(i), f.value(j)) {
        (Some(a), Some(b)) => (a - b).norm() > c,
        _ => false,
    })
}

/// Checks that the family separates every pair of distinct non-null atoms,
/// with the null set taken to be exactly the null atoms.
pub fn is_separating(
    e: &SpectralMeasure,
    family: &[MeasurableFunction],
    tol: &Tolerances,
) -> Result<SeparationReport> {
    let support = checked_support(e, family, tol)?;
    let cut = thresholds(family, &support, tol);
    let mut witness_pair = None;
    'pairs: for (a, &i) in support.iter().enumerate() {
        for &j in &support[a + 1..] {
            if !separated(family, &cut, i, j) {
                witness_pair = Some((i, j));
                break 'pairs;
            }
        }
    }
    Ok(SeparationReport {
        separating: witness_pair.is_none(),
        null_atoms_used: e.null_atoms(tol)?,
        witness_pair,
        near_threshold_atoms: e.near_threshold_atoms(tol)?,
    })
}

/// `A(P_E)`, computed as the algebra generated by the atom projections.
pub fn target_algebra(e: &SpectralMeasure, tol: &Tolerances) -> Result<AlgebraBasis> {
    let atoms = OperatorSet::new(e.dim(), e.projections().to_vec())?;
    generated_algebra(&atoms, tol)
}

fn oracle_with_dims(e: &SpectralMeasure, x: &OperatorSet, tol: &Tolerances) -> Result<(bool, (usize, usize))> {
    check_dim(e, x.dim())?;
    let ax = generated_algebra(x, tol)?;
    let ape = target_algebra(e, tol)?;
    Ok((algebra_equal(&ax, &ape, tol)?, (ax.dimension(), ape.dimension())))
}

/// Direct test `A(X) == A(P_E)` by bicommutants.
pub fn oracle_generates(e: &SpectralMeasure, x: &OperatorSet, tol: &Tolerances) -> Result<bool> {
    Ok(oracle_with_dims(e, x, tol)?.0)
}

/// Runs both conditions of the criterion on every member and the
/// bicommutant oracle, and reports all of it.
pub fn check_generates(e: &SpectralMeasure, x: &OperatorSet, tol: &Tolerances) -> Result<GenerationVerdict> {
    check_dim(e, x.dim())?;
    let cond1 = x
        .members()
        .iter()
        .map(|t| recover_symbol(e, t, tol))
        .collect::<Result<Vec<_>>>()?;
    let symbols: Vec<MeasurableFunction> = cond1.iter().filter_map(|r| r.symbol().cloned()).collect();
    let cond2 = is_separating(e, &symbols, tol)?;
    let criterion_generates = cond1.iter().all(|r| r.expressible) && cond2.separating;
    let (oracle_generates, algebra_dims) = oracle_with_dims(e, x, tol)?;
    Ok(GenerationVerdict {
        cond1,
        cond2,
        criterion_generates,
        oracle_generates,
        algebra_dims,
    })
}

/// Quotient of the support by the joint values of a function family.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEvaluation {
    /// Push-forward of `E` onto the value classes, labelled by value tuples.
    pub measure: SpectralMeasure,
    /// Class index of each atom; `None` for null atoms.
    pub class_of: Vec<Option<usize>>,
}

impl JointEvaluation {
    /// Whether every support atom sits in its own class.
    pub fn is_injective(&self) -> bool {
        self.measure.atom_count() == self.class_of.iter().flatten().count()
    }
}

/// Push-forward of `E` (restricted to its support) under `s ↦ (f_1(s), f_2(s), ...)`.
/// Atoms whose values agree within tolerance, directly or through a chain,
/// land in the same class.
pub fn joint_evaluation_pushforward(
    e: &SpectralMeasure,
    family: &[MeasurableFunction],
    tol: &Tolerances,
) -> Result<JointEvaluation> {
    let support = checked_support(e, family, tol)?;
    let cut = thresholds(family, &support, tol);

    let mut class_of: Vec<Option<usize>> = vec![None; e.atom_count()];
    let mut reps: Vec<usize> = Vec::new();
    for (a, &i) in support.iter().enumerate() {
        if class_of[i].is_some() {
            continue;
        }
        let class = reps.len();
        reps.push(i);
        class_of[i] = Some(class);
        let mut frontier = vec![i];
        while let Some(k) = frontier.pop() {
            for &j in &support[a + 1..] {
                if class_of[j].is_none() && !separated(family, &cut, k, j) {
                    class_of[j] = Some(class);
                    frontier.push(j);
                }
            }
        }
    }

    let labels = reps
        .iter()
        .map(|&r| AtomLabel::Tuple(family.iter().map(|f| f.value(r).unwrap_or_default()).collect()))
        .collect();
    let target = SampleSpace::new(labels)?;
    // Null atoms carry (numerically) zero projections; parking them on the
    // first class leaves the push-forward unchanged.
    let map: Vec<usize> = class_of.iter().map(|c| c.unwrap_or(0)).collect();
    let measure = push_forward(e, target, &map, tol)?;
    Ok(JointEvaluation { measure, class_of })
}

/// A real symbol, injective on the support with values evenly spaced in
/// `[0, 1]` in atom order, undefined on null atoms. Its spectral integral is
/// a single self-adjoint generator of `A(P_E)`.
pub fn single_selfadjoint_generator(e: &SpectralMeasure, tol: &Tolerances) -> Result<MeasurableFunction> {
    let support = e.support(tol)?;
    let k = support.len();
    let mut values = vec![None; e.atom_count()];
    for (rank, &i) in support.iter().enumerate() {
        let v = if k > 1 { rank as f64 / (k - 1) as f64 } else { 0.0 };
        values[i] = Some(C64::new(v, 0.0));
    }
    MeasurableFunction::new(e.space().clone(), values)
}

/// `{ e^{λT} : λ ∈ Λ }` for a normal `T`.
pub fn exponential_family(t: &ComplexMatrix, lambdas: &[C64], tol: &Tolerances) -> Result<OperatorSet> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("exponent set must be nonempty".into()));
    }
    let members = lambdas
        .iter()
        .map(|&l| function_calculus(t, |z| (l * z).exp(), tol))
        .collect::<Result<Vec<_>>>()?;
    OperatorSet::new(t.dim(), members)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn integrals(e: &SpectralMeasure, symbols: &[&[f64]]) -> OperatorSet {
        let t = tol();
        let ms = symbols
            .iter()
            .map(|s| {
                let f = MeasurableFunction::real(e.space().clone(), s).unwrap();
                spectral_integral(e, &f, &t).unwrap()
            })
            .collect();
        OperatorSet::new(e.dim(), ms).unwrap()
    }

    fn with_null_atom() -> SpectralMeasure {
        SpectralMeasure::new(
            SampleSpace::indexed(3).unwrap(),
            vec![ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 1, 1), ComplexMatrix::zeros(2)],
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn recover_symbol_examples() {
        let t = tol();
        let e = SpectralMeasure::coordinate(3).unwrap();
        let r = recover_symbol(&e, &ComplexMatrix::from_real_diag(&[5.0, 5.0, 7.0]), &t).unwrap();
        assert!(r.expressible);
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.candidate.values(), &[Some(c(5.0)), Some(c(5.0)), Some(c(7.0))]);

        let block = ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]).unwrap();
        let r = recover_symbol(&e, &block, &t).unwrap();
        assert!(!r.expressible);
        assert!(r.symbol().is_none());
        assert!((r.residual - 1.0).abs() < 1e-14);

        let i2 = ComplexMatrix::identity(2);
        let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let pauli = SpectralMeasure::new(
            SampleSpace::new(vec!["+".into(), "-".into()]).unwrap(),
            vec![(&i2 + &sx).scale_real(0.5), (&i2 - &sx).scale_real(0.5)],
            &t,
        )
        .unwrap();
        let r = recover_symbol(&pauli, &sx, &t).unwrap();
        assert!(r.expressible);
        let v: Vec<C64> = r.candidate.values().iter().map(|z| z.unwrap()).collect();
        assert!((v[0] - c(1.0)).norm() < 1e-15 && (v[1] - c(-1.0)).norm() < 1e-15);

        assert!(recover_symbol(&pauli, &ComplexMatrix::identity(3), &t).is_err());
    }

    #[test]
    fn null_atoms_get_no_symbol_value() {
        let t = tol();
        let e = with_null_atom();
        let r = recover_symbol(&e, &ComplexMatrix::from_real_diag(&[2.0, -1.0]), &t).unwrap();
        assert!(r.expressible);
        assert_eq!(r.candidate.value(2), None);
    }

    #[test]
    fn separation_examples() {
        let t = tol();
        let single = SpectralMeasure::coordinate(1).unwrap();
        let rep = is_separating(&single, &[], &t).unwrap();
        assert!(rep.separating && rep.witness_pair.is_none());

        let e = SpectralMeasure::coordinate(3).unwrap();
        let fam = [
            MeasurableFunction::real(e.space().clone(), &[1.0, 1.0, 0.0]).unwrap(),
            MeasurableFunction::real(e.space().clone(), &[0.0, 1.0, 1.0]).unwrap(),
        ];
        assert!(is_separating(&e, &fam, &t).unwrap().separating);
        let rep = is_separating(&e, &fam[1..], &t).unwrap();
        assert_eq!(rep.witness_pair, Some((1, 2)));

        let e = with_null_atom();
        let f = MeasurableFunction::new(e.space().clone(), vec![Some(c(0.0)), Some(c(1.0)), None]).unwrap();
        let rep = is_separating(&e, &[f], &t).unwrap();
        assert!(rep.separating);
        assert_eq!(rep.null_atoms_used, vec![2]);
        let g = MeasurableFunction::new(e.space().clone(), vec![Some(c(0.0)), None, None]).unwrap();
        assert_eq!(is_separating(&e, &[g], &t), Err(Error::UndefinedOnSupport { atom: 1 }));
    }

    #[test]
    fn separation_is_pairwise_not_clustered() {
        // 0 ≈ tol/2 ≈ tol, but 0 and tol·1.2 are separated: only adjacent
        // pairs fail, and the first such pair is reported.
        let t = tol();
        let e = SpectralMeasure::coordinate(3).unwrap();
        let step = 0.6 * t.value_tol;
        let f = MeasurableFunction::real(e.space().clone(), &[0.0, step, 2.0 * step]).unwrap();
        let rep = is_separating(&e, &[f], &t).unwrap();
        assert_eq!(rep.witness_pair, Some((0, 1)));
    }

    #[test]
    fn check_generates_examples() {
        let t = tol();
        let e = SpectralMeasure::coordinate(3).unwrap();
        let v = check_generates(&e, &integrals(&e, &[&[0.0, 1.0, 1.0]]), &t).unwrap();
        assert!(!v.criterion_generates && !v.oracle_generates);
        assert_eq!(v.cond2.witness_pair, Some((1, 2)));
        assert_eq!(v.algebra_dims, (2, 3));

        let v = check_generates(&e, &integrals(&e, &[&[0.0, 1.0, 2.0]]), &t).unwrap();
        assert!(v.criterion_generates && v.oracle_generates);
        assert_eq!(v.algebra_dims, (3, 3));

        let block = ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 2.0]]).unwrap();
        let x = OperatorSet::new(3, vec![block]).unwrap();
        let v = check_generates(&e, &x, &t).unwrap();
        assert!(!v.cond1[0].expressible);
        assert!(!v.criterion_generates && !v.oracle_generates);
    }

    #[test]
    fn oracle_examples() {
        let t = tol();
        let e = SpectralMeasure::coordinate(3).unwrap();
        let atoms = OperatorSet::new(3, e.projections().to_vec()).unwrap();
        assert!(oracle_generates(&e, &atoms, &t).unwrap());
        assert!(!oracle_generates(&e, &OperatorSet::empty(3), &t).unwrap());
        assert!(oracle_generates(&e, &integrals(&e, &[&[0.3, -2.0, 5.5]]), &t).unwrap());
        assert!(oracle_generates(&e, &OperatorSet::empty(2), &t).is_err());
    }

    #[test]
    fn joint_evaluation_examples() {
        let t = tol();
        let e = SpectralMeasure::coordinate(3).unwrap();
        let sep = [MeasurableFunction::real(e.space().clone(), &[0.0, 1.0, 2.0]).unwrap()];
        let j = joint_evaluation_pushforward(&e, &sep, &t).unwrap();
        assert_eq!(j.measure.atom_count(), 3);
        assert!(j.is_injective());

        let f = [MeasurableFunction::real(e.space().clone(), &[0.0, 1.0, 1.0]).unwrap()];
        let j = joint_evaluation_pushforward(&e, &f, &t).unwrap();
        assert_eq!(j.measure.atom_count(), 2);
        assert_eq!(j.measure.projection(1), &ComplexMatrix::from_real_diag(&[0.0, 1.0, 1.0]));
        assert_eq!(j.class_of, vec![Some(0), Some(1), Some(1)]);
        assert_eq!(j.measure.space().labels()[1], AtomLabel::Tuple(vec![c(1.0)]));
        assert!(!j.is_injective());

        let j = joint_evaluation_pushforward(&e, &[], &t).unwrap();
        assert_eq!(j.measure.atom_count(), 1);
        assert_eq!(j.measure.projection(0), &ComplexMatrix::identity(3));
    }

    #[test]
    fn joint_evaluation_drops_null_atoms() {
        let t = tol();
        let e = with_null_atom();
        let f = [MeasurableFunction::new(e.space().clone(), vec![Some(c(4.0)), Some(c(4.0)), None]).unwrap()];
        let j = joint_evaluation_pushforward(&e, &f, &t).unwrap();
        assert_eq!(j.class_of, vec![Some(0), Some(0), None]);
        assert_eq!(j.measure.projection(0), &ComplexMatrix::identity(2));
    }

    #[test]
    fn single_generator_examples() {
        let t = tol();
        let e = SpectralMeasure::coordinate(3).unwrap();
        let f = single_selfadjoint_generator(&e, &t).unwrap();
        assert_eq!(f.values(), &[Some(c(0.0)), Some(c(0.5)), Some(c(1.0))]);
        let one = SpectralMeasure::coordinate(1).unwrap();
        assert_eq!(single_selfadjoint_generator(&one, &t).unwrap().values(), &[Some(c(0.0))]);
        let e = with_null_atom();
        let f = single_selfadjoint_generator(&e, &t).unwrap();
        assert_eq!(f.values(), &[Some(c(0.0)), Some(c(1.0)), None]);
        let x = OperatorSet::new(2, vec![spectral_integral(&e, &f, &t).unwrap()]).unwrap();
        let v = check_generates(&e, &x, &t).unwrap();
        assert!(v.criterion_generates && v.oracle_generates);
    }

    #[test]
    fn exponential_family_examples() {
        let t = tol();
        let d = ComplexMatrix::from_real_diag(&[0.0, 2f64.ln()]);
        let x = exponential_family(&d, &[c(0.0)], &t).unwrap();
        assert!((&x.members()[0] - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-14);
        let x = exponential_family(&d, &[c(1.0)], &t).unwrap();
        assert!((&x.members()[0] - &ComplexMatrix::from_real_diag(&[1.0, 2.0])).frobenius_norm() < 1e-14);
        assert!(exponential_family(&d, &[], &t).is_err());

        let spec = ComplexMatrix::from_real_diag(&[0.0, 1.0, 2.0]);
        let e_t = crate::spectral::spectral_measure_of_normal(&spec, &t).unwrap();
        let x = exponential_family(&spec, &[c(1.0)], &t).unwrap();
        let v = check_generates(&e_t, &x, &t).unwrap();
        assert!(v.criterion_generates && v.oracle_generates);

        let nil = ComplexMatrix::unit(2, 0, 1);
        assert!(matches!(exponential_family(&nil, &[c(1.0)], &t), Err(Error::NotNormal { .. })));
    }
}
