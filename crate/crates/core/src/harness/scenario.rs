use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{child_seed, gaussian_matrix, random_pvm, rng_for, InstanceSpec, Scenario};
use crate::algebra::OperatorSet;
use crate::error::{Error, Result};
use crate::generators::{exponential_family, single_selfadjoint_generator};
use crate::numkernel::{operator_norm, ComplexMatrix, Tolerances, C64};
use crate::spectral::{spectral_integral, MeasurableFunction, SpectralMeasure};

/// Operator norm of the off-algebra perturbation in non-integral members.
const PERTURBATION_NORM: f64 = 0.5;

/// A measure, a generator candidate set, and the verdict the construction
/// guarantees (`None` when only agreement of the two tests is required).
#[derive(Debug, Clone)]
pub struct ScenarioInstance {
    pub measure: SpectralMeasure,
    pub operators: OperatorSet,
    pub expected: Option<bool>,
}

pub fn make_scenario(spec: &InstanceSpec, tol: &Tolerances) -> Result<ScenarioInstance> {
    spec.validate()?;
    let k = spec.support_count();
    match spec.scenario {
        Scenario::NonSeparatingIntegrals if k < 2 => {
            return Err(Error::InfeasibleSpec(
                "a non-separating family needs at least two support atoms".into(),
            ))
        }
        Scenario::NonIntegralMember if spec.dim < 2 => {
            return Err(Error::InfeasibleSpec(
                "every operator on C^1 is a spectral integral".into(),
            ))
        }
        _ => {}
    }

    let e = random_pvm(child_seed(spec.seed, 1), spec.dim, spec.atom_count, spec.null_atom_count)?;
    let support = e.support(tol)?;
    let mut rng = rng_for(child_seed(spec.seed, 2));
    let mut members: Vec<ComplexMatrix> = Vec::new();

    let expected = match spec.scenario {
        Scenario::GeneratingIntegrals => {
            for f in separating_family(&mut rng, &e, &support)? {
                members.push(spectral_integral(&e, &f, tol)?);
            }
            if rng.random_bool(0.3) {
                members.push(ComplexMatrix::scalar(e.dim(), random_complex(&mut rng, 2.0)));
            }
            Some(true)
        }
        Scenario::NonSeparatingIntegrals => {
            let r = rng.random_range(1..=3);
            let mut codes: Vec<Vec<u32>> = (0..k)
                .map(|_| (0..r).map(|_| rng.random_range(0..3)).collect())
                .collect();
            let mut pick: Vec<usize> = (0..k).collect();
            pick.shuffle(&mut rng);
            codes[pick[1]] = codes[pick[0]].clone();
            for f in coded_functions(&mut rng, &e, &support, &codes, r)? {
                members.push(spectral_integral(&e, &f, tol)?);
            }
            Some(false)
        }
        Scenario::NonIntegralMember => {
            for f in separating_family(&mut rng, &e, &support)? {
                members.push(spectral_integral(&e, &f, tol)?);
            }
            let victim = rng.random_range(0..members.len());
            let delta = off_algebra_perturbation(&mut rng, &e, tol)?;
            members[victim] = &members[victim] + &delta;
            Some(false)
        }
        Scenario::Mixed => {
            let count = rng.random_range(0..=3);
            for _ in 0..count {
                let roll: f64 = rng.random();
                if roll < 0.6 {
                    let codes: Vec<Vec<u32>> = (0..k).map(|_| vec![rng.random_range(0..2)]).collect();
                    let f = coded_functions(&mut rng, &e, &support, &codes, 1)?.remove(0);
                    members.push(spectral_integral(&e, &f, tol)?);
                } else if roll < 0.8 && e.dim() >= 2 {
                    let codes: Vec<Vec<u32>> = (0..k).map(|_| vec![rng.random_range(0..3)]).collect();
                    let f = coded_functions(&mut rng, &e, &support, &codes, 1)?.remove(0);
                    let delta = off_algebra_perturbation(&mut rng, &e, tol)?;
                    members.push(&spectral_integral(&e, &f, tol)? + &delta);
                } else {
                    members.push(ComplexMatrix::scalar(e.dim(), random_complex(&mut rng, 2.0)));
                }
            }
            None
        }
        Scenario::ExponentialFamily => {
            // Distinct real parts on a 0.5 grid, imaginary parts in (-0.9, 0.9):
            // e^{λz} with real λ > 0 is then injective on the spectrum.
            let mut grid: Vec<f64> = (0..9).map(|i| -2.0 + 0.5 * i as f64).collect();
            grid.shuffle(&mut rng);
            let mut values = vec![None; e.atom_count()];
            for (slot, &i) in support.iter().enumerate() {
                let im = rng.random_range(-0.9..0.9);
                values[i] = Some(C64::new(grid[slot], im));
            }
            let phi = MeasurableFunction::new(e.space().clone(), values)?;
            let t = spectral_integral(&e, &phi, tol)?;
            let mut lambdas = vec![C64::new(rng.random_range(0.5..1.5), 0.0)];
            if rng.random_bool(0.3) {
                lambdas.push(C64::new(0.0, 0.0));
            }
            members.extend(exponential_family(&t, &lambdas, tol)?.members().iter().cloned());
            Some(true)
        }
        Scenario::SingleGenerator => {
            let f = single_selfadjoint_generator(&e, tol)?;
            members.push(spectral_integral(&e, &f, tol)?);
            Some(true)
        }
    };

    members.shuffle(&mut rng);
    Ok(ScenarioInstance {
        operators: OperatorSet::new(e.dim(), members)?,
        measure: e,
        expected,
    })
}

fn random_complex(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    C64::new(rng.random_range(-radius..radius), rng.random_range(-radius..radius))
}

/// Functions `f_l = scale_l · code_l + offset_l` on the support; null atoms
/// get either a random value or no value.
fn coded_functions(
    rng: &mut ChaCha8Rng,
    e: &SpectralMeasure,
    support: &[usize],
    codes: &[Vec<u32>],
    r: usize,
) -> Result<Vec<MeasurableFunction>> {
    (0..r)
        .map(|l| {
            let modulus = rng.random_range(0.5..2.0);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let scale = C64::from_polar(modulus, angle);
            let offset = random_complex(rng, 1.0);
            let mut values: Vec<Option<C64>> = (0..e.atom_count())
                .map(|_| rng.random_bool(0.5).then(|| random_complex(rng, 3.0)))
                .collect();
            for (slot, &i) in support.iter().enumerate() {
                values[i] = Some(scale * codes[slot][l] as f64 + offset);
            }
            MeasurableFunction::new(e.space().clone(), values)
        })
        .collect()
}

/// A family whose joint value tuples are distinct on the support, built from
/// base-3 codes so individual members are usually not separating.
fn separating_family(
    rng: &mut ChaCha8Rng,
    e: &SpectralMeasure,
    support: &[usize],
) -> Result<Vec<MeasurableFunction>> {
    let k = support.len();
    let mut r = 1;
    while 3usize.pow(r as u32) < k {
        r += 1;
    }
    if r < 3 && rng.random_bool(0.5) {
        r += 1;
    }
    let mut tuples: Vec<usize> = (0..3usize.pow(r as u32)).collect();
    tuples.shuffle(rng);
    let codes: Vec<Vec<u32>> = tuples[..k]
        .iter()
        .map(|&t| (0..r).map(|l| ((t / 3usize.pow(l as u32)) % 3) as u32).collect())
        .collect();
    coded_functions(rng, e, support, &codes, r)
}

/// Random matrix HS-orthogonal to every atom projection, scaled to a fixed
/// operator norm. Its trace against each atom vanishes, so adding it to a
/// spectral integral leaves the recovered symbol unchanged while moving the
/// operator off the algebra.
fn off_algebra_perturbation(rng: &mut ChaCha8Rng, e: &SpectralMeasure, tol: &Tolerances) -> Result<ComplexMatrix> {
    loop {
        let mut g = gaussian_matrix(rng, e.dim());
        for p in e.projections() {
            let rank = p.trace().re;
            if rank > 0.5 {
                g = &g - &p.scale(p.hs_inner(&g) / rank);
            }
        }
        let norm = operator_norm(&g, tol)?;
        if norm > 1e-3 {
            return Ok(g.scale_real(PERTURBATION_NORM / norm));
        }
    }
}
