//! Seeded random instances and the property campaign.

mod campaign;
mod scenario;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{vec_dot, vec_norm, ComplexMatrix, Tolerances, C64};
use crate::spectral::{AtomLabel, SampleSpace, SpectralMeasure};

pub use campaign::{default_specs, run_campaign, run_instance, CampaignReport, Failure, InstanceRecord};
pub use scenario::{make_scenario, ScenarioInstance};

pub const MAX_DIM: usize = 8;
pub const MAX_ATOMS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    GeneratingIntegrals,
    NonSeparatingIntegrals,
    NonIntegralMember,
    Mixed,
    ExponentialFamily,
    SingleGenerator,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::GeneratingIntegrals,
        Scenario::NonSeparatingIntegrals,
        Scenario::NonIntegralMember,
        Scenario::Mixed,
        Scenario::ExponentialFamily,
        Scenario::SingleGenerator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::GeneratingIntegrals => "generating-integrals",
            Scenario::NonSeparatingIntegrals => "non-separating-integrals",
            Scenario::NonIntegralMember => "non-integral-member",
            Scenario::Mixed => "mixed",
            Scenario::ExponentialFamily => "exponential-family",
            Scenario::SingleGenerator => "single-generator",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scenario `{s}`")))
    }
}

/// Parameters of one random instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub dim: usize,
    pub atom_count: usize,
    pub null_atom_count: usize,
    pub scenario: Scenario,
}

impl InstanceSpec {
    pub fn support_count(&self) -> usize {
        self.atom_count.saturating_sub(self.null_atom_count)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_DIM).contains(&self.dim) {
            return Err(Error::InfeasibleSpec(format!("dimension {} outside [1, {MAX_DIM}]", self.dim)));
        }
        if !(1..=MAX_ATOMS).contains(&self.atom_count) {
            return Err(Error::InfeasibleSpec(format!(
                "atom count {} outside [1, {MAX_ATOMS}]",
                self.atom_count
            )));
        }
        check_pvm_shape(self.dim, self.atom_count, self.null_atom_count)
    }
}

fn check_pvm_shape(n: usize, m: usize, null_count: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InfeasibleSpec("dimension and atom count must be positive".into()));
    }
    if null_count >= m {
        return Err(Error::InfeasibleSpec(format!(
            "{null_count} null atoms leave no support among {m} atoms"
        )));
    }
    if n < m - null_count {
        return Err(Error::InfeasibleSpec(format!(
            "dimension {n} cannot host {} non-null atoms",
            m - null_count
        )));
    }
    Ok(())
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` of a parent seed; independent of any
/// execution order.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian_complex(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub(crate) fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let data = (0..n * n).map(|_| gaussian_complex(rng)).collect();
    ComplexMatrix::from_vec(n, data).expect("gaussian entries are finite")
}

/// Gram–Schmidt orthonormalization of a complex Gaussian matrix.
pub fn random_unitary(seed: u64, n: usize) -> ComplexMatrix {
    let mut rng = rng_for(seed);
    loop {
        let g = gaussian_matrix(&mut rng, n);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = g.column(j);
            for _ in 0..2 {
                for q in &cols {
                    let c = vec_dot(q, &v);
                    for (x, y) in v.iter_mut().zip(q) {
                        *x -= c * y;
                    }
                }
            }
            let norm = vec_norm(&v);
            if norm < 1e-6 {
                break;
            }
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
        if cols.len() == n {
            return ComplexMatrix::from_columns(&cols);
        }
    }
}

/// Random spectral measure on atoms `s0..s{m-1}`: a random orthonormal basis
/// split into `m - null_count` nonempty groups; null atoms get zero.
pub fn random_pvm(seed: u64, n: usize, m: usize, null_count: usize) -> Result<SpectralMeasure> {
    check_pvm_shape(n, m, null_count)?;
    let mut rng = rng_for(seed);
    let u = random_unitary(child_seed(seed, 0), n);

    let mut atoms: Vec<usize> = (0..m).collect();
    atoms.shuffle(&mut rng);
    let mut live: Vec<usize> = atoms[null_count..].to_vec();
    live.sort_unstable();

    let mut columns: Vec<usize> = (0..n).collect();
    columns.shuffle(&mut rng);
    let mut owner = vec![0usize; n];
    for (slot, &col) in columns.iter().enumerate() {
        owner[col] = if slot < live.len() {
            live[slot]
        } else {
            live[rng.random_range(0..live.len())]
        };
    }

    let mut projections = vec![ComplexMatrix::zeros(n); m];
    for (col, &atom) in owner.iter().enumerate() {
        let v = u.column(col);
        projections[atom] = &projections[atom] + &ComplexMatrix::outer(&v, &v);
    }
    let space = SampleSpace::new((0..m).map(|i| AtomLabel::Name(format!("s{i}"))).collect())?;
    SpectralMeasure::new(space, projections, &Tolerances::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_examples() {
        let u = random_unitary(7, 1);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert_eq!(random_unitary(42, 5), random_unitary(42, 5));
        let u = random_unitary(3, 6);
        let uu = &u.adjoint() * &u;
        assert!((&uu - &ComplexMatrix::identity(6)).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn pvm_examples() {
        let t = Tolerances::default();
        let e = random_pvm(1, 4, 4, 0).unwrap();
        for p in e.projections() {
            assert!((p.trace().re - 1.0).abs() < 1e-12);
        }
        let e = random_pvm(2, 3, 1, 0).unwrap();
        assert!((e.projection(0) - &ComplexMatrix::identity(3)).frobenius_norm() < 1e-12);

        let e = random_pvm(3, 4, 3, 1).unwrap();
        let mut ranks: Vec<i64> = e.projections().iter().map(|p| p.trace().re.round() as i64).collect();
        ranks.sort_unstable();
        assert!(ranks == vec![0, 1, 3] || ranks == vec![0, 2, 2]);
        assert_eq!(e.null_atoms(&t).unwrap().len(), 1);
    }

    #[test]
    fn infeasible_pvm_shapes() {
        assert!(matches!(random_pvm(0, 2, 3, 0), Err(Error::InfeasibleSpec(_))));
        assert!(matches!(random_pvm(0, 2, 2, 2), Err(Error::InfeasibleSpec(_))));
        assert!(matches!(random_pvm(0, 0, 1, 0), Err(Error::InfeasibleSpec(_))));
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("bogus".parse::<Scenario>().is_err());
    }

    #[test]
    fn child_seeds_differ() {
        assert_ne!(child_seed(1, 0), child_seed(1, 1));
        assert_ne!(child_seed(1, 0), child_seed(2, 0));
        assert_eq!(child_seed(9, 4), child_seed(9, 4));
    }
}
