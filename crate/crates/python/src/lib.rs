//! Python module `pvm_algebra`. Matrices cross the boundary as nested lists
//! of Python `complex` (rows first); functions on a sample space as lists
//! with `None` marking an undefined value.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pvm_algebra::algebra::{self, OperatorSet};
use pvm_algebra::generators;
use pvm_algebra::harness::{self, Scenario};
use pvm_algebra::spectral::{self, AtomLabel, MeasurableFunction, SampleSpace};
use pvm_algebra::{ComplexMatrix, Error, Tolerances, C64};

create_exception!(pvm_algebra, PvmError, PyValueError);

type Rows = Vec<Vec<C64>>;

fn err(e: Error) -> PyErr {
    PvmError::new_err(e.to_string())
}

fn matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(rows).map_err(err)
}

fn operator_set(members: Vec<Rows>, dim: Option<usize>) -> PyResult<OperatorSet> {
    let members = members.into_iter().map(matrix).collect::<PyResult<Vec<_>>>()?;
    let dim = match (dim, members.first()) {
        (Some(d), _) => d,
        (None, Some(m)) => m.dim(),
        (None, None) => return Err(PvmError::new_err("empty operator set needs an explicit dim")),
    };
    OperatorSet::new(dim, members).map_err(err)
}

fn tolerances(tol: Option<PyRef<'_, PyTolerances>>) -> Tolerances {
    tol.map(|t| t.0).unwrap_or_default()
}

#[pyclass(name = "Tolerances", frozen)]
pub struct PyTolerances(Tolerances);

#[pymethods]
impl PyTolerances {
    #[new]
    #[pyo3(signature = (rank_tol = 1e-9, residual_tol = 1e-8, value_tol = 1e-9))]
    fn new(rank_tol: f64, residual_tol: f64, value_tol: f64) -> PyResult<Self> {
        Tolerances::new(rank_tol, residual_tol, value_tol).map(Self).map_err(err)
    }

    #[getter]
    fn rank_tol(&self) -> f64 {
        self.0.rank_tol
    }

    #[getter]
    fn residual_tol(&self) -> f64 {
        self.0.residual_tol
    }

    #[getter]
    fn value_tol(&self) -> f64 {
        self.0.value_tol
    }

    fn __repr__(&self) -> String {
        format!(
            "Tolerances(rank_tol={:?}, residual_tol={:?}, value_tol={:?})",
            self.0.rank_tol, self.0.residual_tol, self.0.value_tol
        )
    }
}

#[derive(IntoPyObject)]
enum Label {
    Name(String),
    Value(C64),
    Tuple(Vec<C64>),
}

impl From<&AtomLabel> for Label {
    fn from(l: &AtomLabel) -> Self {
        match l {
            AtomLabel::Name(s) => Label::Name(s.clone()),
            AtomLabel::Value(z) => Label::Value(*z),
            AtomLabel::Tuple(zs) => Label::Tuple(zs.clone()),
        }
    }
}

/// Projection-valued measure on a finite sample space.
#[pyclass(name = "SpectralMeasure", frozen)]
pub struct PySpectralMeasure(spectral::SpectralMeasure);

impl PySpectralMeasure {
    fn function(&self, values: Vec<Option<C64>>) -> PyResult<MeasurableFunction> {
        MeasurableFunction::new(self.0.space().clone(), values).map_err(err)
    }
}

#[pymethods]
impl PySpectralMeasure {
    #[new]
    #[pyo3(signature = (labels, projections, tol = None))]
    fn new(labels: Vec<String>, projections: Vec<Rows>, tol: Option<PyRef<'_, PyTolerances>>) -> PyResult<Self> {
        let space = SampleSpace::new(labels.into_iter().map(AtomLabel::Name).collect()).map_err(err)?;
        let projections = projections.into_iter().map(matrix).collect::<PyResult<Vec<_>>>()?;
        spectral::SpectralMeasure::new(space, projections, &tolerances(tol))
            .map(Self)
            .map_err(err)
    }

    /// Coordinate projections `e_i e_i*` on C^n.
    #[staticmethod]
    fn coordinate(n: usize) -> PyResult<Self> {
        spectral::SpectralMeasure::coordinate(n).map(Self).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn atom_count(&self) -> usize {
        self.0.atom_count()
    }

    #[getter]
    fn labels(&self) -> Vec<Label> {
        self.0.space().labels().iter().map(Label::from).collect()
    }

    fn projections(&self) -> Vec<Rows> {
        self.0.projections().iter().map(ComplexMatrix::rows).collect()
    }

    #[pyo3(signature = (tol = None))]
    fn support(&self, tol: Option<PyRef<'_, PyTolerances>>) -> PyResult<Vec<usize>> {
        self.0.support(&tolerances(tol)).map_err(err)
    }

    #[pyo3(signature = (tol = None))]
    fn null_atoms(&self, tol: Option<PyRef<'_, PyTolerances>>) -> PyResult<Vec<usize>> {
        self.0.null_atoms(&tolerances(tol)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("SpectralMeasure(dim={}, atoms={})", self.0.dim(), self.0.atom_count())
    }
}

/// Basis of the commutant `X'`.
#[pyfunction]
#[pyo3(signature = (members, dim = None, tol = None))]
fn commutant(members: Vec<Rows>, dim: Option<usize>, tol: Option<PyRef<'_, PyTolerances>>) -> PyResult<Vec<Rows>> {
    let x = operator_set(members, dim)?;
    let a = algebra::commutant(&x, &tolerances(tol)).map_err(err)?;
    Ok(a.basis().iter().map(ComplexMatrix::rows).collect())
}

/// Basis of the von Neumann algebra generated by `X`.
#[pyfunction]
#[pyo3(signature = (members, dim = None, tol = None))]
fn generated_algebra(
    members: Vec<Rows>,
    dim: Option<usize>,
    tol: Option<PyRef<'_, PyTolerances>>,
) -> PyResult<Vec<Rows>> {
    let x = operator_set(members, dim)?;
    let a = algebra::generated_algebra(&x, &tolerances(tol)).map_err(err)?;
    Ok(a.basis().iter().map(ComplexMatrix::rows).collect())
}

#[pyfunction]
#[pyo3(signature = (measure, members, tol = None))]
fn check_generates<'py>(
    py: Python<'py>,
    measure: PyRef<'_, PySpectralMeasure>,
    members: Vec<Rows>,
    tol: Option<PyRef<'_, PyTolerances>>,
) -> PyResult<Bound<'py, PyDict>> {
    let x = operator_set(members, Some(measure.0.dim()))?;
    let v = generators::check_generates(&measure.0, &x, &tolerances(tol)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("criterion_generates", v.criterion_generates)?;
    out.set_item("oracle_generates", v.oracle_generates)?;
    out.set_item("algebra_dims", v.algebra_dims)?;
    out.set_item("expressible", v.cond1.iter().map(|r| r.expressible).collect::<Vec<_>>())?;
    out.set_item("residuals", v.cond1.iter().map(|r| r.residual).collect::<Vec<_>>())?;
    out.set_item("separating", v.cond2.separating)?;
    out.set_item("witness_pair", v.cond2.witness_pair)?;
    out.set_item("null_atoms", v.cond2.null_atoms_used)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (t, tol = None))]
fn spectral_measure_of_normal(t: Rows, tol: Option<PyRef<'_, PyTolerances>>) -> PyResult<PySpectralMeasure> {
    spectral::spectral_measure_of_normal(&matrix(t)?, &tolerances(tol))
        .map(PySpectralMeasure)
        .map_err(err)
}

/// `Σ f(i) P_i` over the non-null atoms.
#[pyfunction]
#[pyo3(signature = (measure, values, tol = None))]
fn spectral_integral(
    measure: PyRef<'_, PySpectralMeasure>,
    values: Vec<Option<C64>>,
    tol: Option<PyRef<'_, PyTolerances>>,
) -> PyResult<Rows> {
    let f = measure.function(values)?;
    spectral::spectral_integral(&measure.0, &f, &tolerances(tol))
        .map(|m| m.rows())
        .map_err(err)
}

/// `(separating, witness_pair)` for a family of functions on the atoms.
#[pyfunction]
#[pyo3(signature = (measure, functions, tol = None))]
fn is_separating(
    measure: PyRef<'_, PySpectralMeasure>,
    functions: Vec<Vec<Option<C64>>>,
    tol: Option<PyRef<'_, PyTolerances>>,
) -> PyResult<(bool, Option<(usize, usize)>)> {
    let family = functions
        .into_iter()
        .map(|v| measure.function(v))
        .collect::<PyResult<Vec<_>>>()?;
    let r = generators::is_separating(&measure.0, &family, &tolerances(tol)).map_err(err)?;
    Ok((r.separating, r.witness_pair))
}

/// Seeded campaign; returns the serialized report.
#[pyfunction]
#[pyo3(signature = (seed = 0, count = 200, scenarios = None, tol = None))]
fn run_campaign(
    seed: u64,
    count: usize,
    scenarios: Option<Vec<String>>,
    tol: Option<PyRef<'_, PyTolerances>>,
) -> PyResult<String> {
    let scenarios = scenarios
        .unwrap_or_default()
        .iter()
        .map(|s| s.parse::<Scenario>().map_err(err))
        .collect::<PyResult<Vec<_>>>()?;
    let specs = harness::default_specs(seed, count, &scenarios);
    let report = harness::run_campaign(&specs, &tolerances(tol));
    serde_json::to_string(&report).map_err(|e| PvmError::new_err(e.to_string()))
}

#[pymodule]
#[pyo3(name = "pvm_algebra")]
fn pvm_algebra_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PvmError", m.py().get_type::<PvmError>())?;
    m.add_class::<PyTolerances>()?;
    m.add_class::<PySpectralMeasure>()?;
    m.add_function(wrap_pyfunction!(commutant, m)?)?;
    m.add_function(wrap_pyfunction!(generated_algebra, m)?)?;
    m.add_function(wrap_pyfunction!(check_generates, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_measure_of_normal, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_integral, m)?)?;
    m.add_function(wrap_pyfunction!(is_separating, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    Ok(())
}
