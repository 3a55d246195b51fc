//! Named-object JSON documents.
//!
//! ```json
//! {
//!   "version": "1",
//!   "objects": {
//!     "T": {"kind": "matrix", "rows": [[[1, 0], [0, 0]], [[0, 0], [2, 0]]]},
//!     "X": {"kind": "operator_set", "dim": 2, "members": [ <rows>, ... ]},
//!     "E": {"kind": "spectral_measure", "atoms": [{"label": "a", "projection": <rows>}, ...]},
//!     "f": {"kind": "function", "atoms": [{"label": "a", "value": [1, 0]}, {"label": "b", "value": "undefined"}]}
//!   }
//! }
//! ```
//!
//! Complex scalars are `[re, im]`; matrices are row-major arrays of rows.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use pvm_algebra::algebra::OperatorSet;
use pvm_algebra::spectral::{AtomLabel, MeasurableFunction, SampleSpace, SpectralMeasure};
use pvm_algebra::{ComplexMatrix, Tolerances, C64};

use crate::CliError;

pub const VERSION: &str = "1";

pub type Rows = Vec<Vec<C64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub version: String,
    pub objects: BTreeMap<String, Payload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Payload {
    Matrix { rows: Rows },
    OperatorSet { dim: usize, members: Vec<Rows> },
    SpectralMeasure { atoms: Vec<MeasureAtom> },
    Function { atoms: Vec<FunctionAtom> },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Matrix { .. } => "matrix",
            Payload::OperatorSet { .. } => "operator_set",
            Payload::SpectralMeasure { .. } => "spectral_measure",
            Payload::Function { .. } => "function",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureAtom {
    pub label: AtomLabel,
    pub projection: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionAtom {
    pub label: AtomLabel,
    pub value: FunctionValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionValue {
    Defined(C64),
    Undefined(UndefinedMarker),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UndefinedMarker {
    #[serde(rename = "undefined")]
    Undefined,
}

impl From<Option<C64>> for FunctionValue {
    fn from(v: Option<C64>) -> Self {
        v.map_or(FunctionValue::Undefined(UndefinedMarker::Undefined), FunctionValue::Defined)
    }
}

impl FunctionValue {
    pub fn value(self) -> Option<C64> {
        match self {
            FunctionValue::Defined(z) => Some(z),
            FunctionValue::Undefined(_) => None,
        }
    }
}

impl Document {
    pub fn new() -> Self {
        Document {
            version: VERSION.to_owned(),
            objects: BTreeMap::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: Document = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        if doc.version != VERSION {
            return Err(CliError::Schema(format!(
                "unsupported document version `{}` (expected `{VERSION}`)",
                doc.version
            )));
        }
        for (name, payload) in &doc.objects {
            check_shape(name, payload)?;
        }
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical text: sorted object names, fixed field order, shortest
    /// round-trip floats.
    pub fn dump(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    fn get(&self, name: &str, kind: &str) -> Result<&Payload, CliError> {
        let p = self
            .objects
            .get(name)
            .ok_or_else(|| CliError::Schema(format!("no object named `{name}`")))?;
        if p.kind() != kind {
            return Err(CliError::Schema(format!(
                "object `{name}` is a {}, expected a {kind}",
                p.kind()
            )));
        }
        Ok(p)
    }

    pub fn matrix(&self, name: &str) -> Result<ComplexMatrix, CliError> {
        match self.get(name, "matrix")? {
            Payload::Matrix { rows } => to_matrix(name, rows),
            _ => unreachable!(),
        }
    }

    /// An operator set, or a single matrix read as a one-member set.
    pub fn operator_set(&self, name: &str) -> Result<OperatorSet, CliError> {
        match self.objects.get(name) {
            Some(Payload::Matrix { rows }) => {
                let m = to_matrix(name, rows)?;
                Ok(OperatorSet::new(m.dim(), vec![m])?)
            }
            _ => match self.get(name, "operator_set")? {
                Payload::OperatorSet { dim, members } => {
                    let mats = members
                        .iter()
                        .map(|rows| to_matrix(name, rows))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(OperatorSet::new(*dim, mats)?)
                }
                _ => unreachable!(),
            },
        }
    }

    /// Loads and validates a measure; a failed validation is an invariant error.
    pub fn spectral_measure(&self, name: &str, tol: &Tolerances) -> Result<SpectralMeasure, CliError> {
        match self.get(name, "spectral_measure")? {
            Payload::SpectralMeasure { atoms } => {
                let space = SampleSpace::new(atoms.iter().map(|a| a.label.clone()).collect())
                    .map_err(|e| CliError::Schema(format!("`{name}`: {e}")))?;
                let projections = atoms
                    .iter()
                    .map(|a| to_matrix(name, &a.projection))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SpectralMeasure::new(space, projections, tol)?)
            }
            _ => unreachable!(),
        }
    }

    /// Loads a function on the sample space of `e`; atoms are matched by label.
    pub fn function(&self, name: &str, e: &SpectralMeasure) -> Result<MeasurableFunction, CliError> {
        match self.get(name, "function")? {
            Payload::Function { atoms } => {
                let mut values = vec![None; e.atom_count()];
                let mut seen = vec![false; e.atom_count()];
                for a in atoms {
                    let i = e
                        .space()
                        .index_of(&a.label)
                        .map_err(|_| CliError::Schema(format!("`{name}`: unknown atom `{}`", a.label)))?;
                    if std::mem::replace(&mut seen[i], true) {
                        return Err(CliError::Schema(format!("`{name}`: atom `{}` listed twice", a.label)));
                    }
                    values[i] = a.value.value();
                }
                if let Some(i) = seen.iter().position(|s| !s) {
                    return Err(CliError::Schema(format!(
                        "`{name}`: no value for atom `{}`",
                        e.space().labels()[i]
                    )));
                }
                MeasurableFunction::new(e.space().clone(), values).map_err(|e| CliError::Schema(e.to_string()))
            }
            _ => unreachable!(),
        }
    }

    pub fn insert_matrix(&mut self, name: &str, m: &ComplexMatrix) {
        self.objects.insert(name.to_owned(), Payload::Matrix { rows: m.rows() });
    }

    pub fn insert_measure(&mut self, name: &str, e: &SpectralMeasure) {
        self.objects.insert(name.to_owned(), measure_payload(e));
    }

    pub fn insert_function(&mut self, name: &str, f: &MeasurableFunction) {
        let atoms = f
            .space()
            .labels()
            .iter()
            .zip(f.values())
            .map(|(label, v)| FunctionAtom {
                label: label.clone(),
                value: (*v).into(),
            })
            .collect();
        self.objects.insert(name.to_owned(), Payload::Function { atoms });
    }

    pub fn insert_operator_set(&mut self, name: &str, x: &OperatorSet) {
        self.objects.insert(
            name.to_owned(),
            Payload::OperatorSet {
                dim: x.dim(),
                members: x.members().iter().map(|m| m.rows()).collect(),
            },
        );
    }
}

impl Default for Document {
    fn default() -> Self {
        Self::new()
    }
}

pub fn measure_payload(e: &SpectralMeasure) -> Payload {
    Payload::SpectralMeasure {
        atoms: e
            .space()
            .labels()
            .iter()
            .zip(e.projections())
            .map(|(label, p)| MeasureAtom {
                label: label.clone(),
                projection: p.rows(),
            })
            .collect(),
    }
}

fn check_square(name: &str, rows: &Rows, dim: Option<usize>) -> Result<usize, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::Schema(format!("`{name}`: empty matrix")));
    }
    if let Some(d) = dim {
        if d != n {
            return Err(CliError::Schema(format!("`{name}`: expected a {d}x{d} matrix, found {n} rows")));
        }
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::Schema(format!(
                "`{name}`: row {i} has length {}, expected {n}",
                row.len()
            )));
        }
        if row.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CliError::Schema(format!("`{name}`: non-finite entry in row {i}")));
        }
    }
    Ok(n)
}

fn check_shape(name: &str, payload: &Payload) -> Result<(), CliError> {
    match payload {
        Payload::Matrix { rows } => check_square(name, rows, None).map(|_| ()),
        Payload::OperatorSet { dim, members } => {
            if *dim == 0 {
                return Err(CliError::Schema(format!("`{name}`: dimension must be positive")));
            }
            members
                .iter()
                .try_for_each(|rows| check_square(name, rows, Some(*dim)).map(|_| ()))
        }
        Payload::SpectralMeasure { atoms } => {
            let first = atoms
                .first()
                .ok_or_else(|| CliError::Schema(format!("`{name}`: a measure needs at least one atom")))?;
            let n = check_square(name, &first.projection, None)?;
            atoms
                .iter()
                .try_for_each(|a| check_square(name, &a.projection, Some(n)).map(|_| ()))
        }
        Payload::Function { atoms } => {
            if atoms.iter().any(|a| matches!(a.value, FunctionValue::Defined(z) if !z.re.is_finite() || !z.im.is_finite())) {
                return Err(CliError::Schema(format!("`{name}`: non-finite function value")));
            }
            Ok(())
        }
    }
}

fn to_matrix(name: &str, rows: &Rows) -> Result<ComplexMatrix, CliError> {
    check_square(name, rows, None)?;
    ComplexMatrix::from_rows(rows.clone()).map_err(|e| CliError::Schema(format!("`{name}`: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
      "version": "1",
      "objects": {
        "E": {"kind": "spectral_measure", "atoms": [
          {"label": "a", "projection": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
          {"label": "b", "projection": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]}
        ]},
        "f": {"kind": "function", "atoms": [
          {"label": "b", "value": "undefined"},
          {"label": "a", "value": [0.5, -1e-3]}
        ]},
        "X": {"kind": "operator_set", "dim": 2, "members": []}
      }
    }"#;

    #[test]
    fn load_dump_is_idempotent() {
        let doc = Document::parse(SAMPLE).unwrap();
        let once = doc.dump();
        let twice = Document::parse(&once).unwrap().dump();
        assert_eq!(once, twice);
    }

    #[test]
    fn typed_accessors() {
        let doc = Document::parse(SAMPLE).unwrap();
        let t = Tolerances::default();
        let e = doc.spectral_measure("E", &t).unwrap();
        let f = doc.function("f", &e).unwrap();
        assert_eq!(f.values(), &[Some(C64::new(0.5, -1e-3)), None]);
        assert!(doc.operator_set("X").unwrap().is_empty());
        assert!(matches!(doc.matrix("E"), Err(CliError::Schema(_))));
        assert!(matches!(doc.matrix("nope"), Err(CliError::Schema(_))));
    }

    #[test]
    fn ragged_rows_are_schema_errors() {
        let bad = r#"{"version": "1", "objects": {"T": {"kind": "matrix", "rows": [[[1, 0], [0, 0]], [[0, 0]]]}}}"#;
        assert!(matches!(Document::parse(bad), Err(CliError::Schema(_))));
        let bad = r#"{"version": "1", "objects": {"T": {"kind": "tensor", "rows": []}}}"#;
        assert!(matches!(Document::parse(bad), Err(CliError::Schema(_))));
    }

    #[test]
    fn invalid_measure_is_an_invariant_error() {
        let doc = r#"{"version": "1", "objects": {"E": {"kind": "spectral_measure", "atoms": [
            {"label": "a", "projection": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
            {"label": "b", "projection": [[[0.5, 0], [0.5, 0]], [[0.5, 0], [0.5, 0]]]}]}}}"#;
        let doc = Document::parse(doc).unwrap();
        assert!(matches!(
            doc.spectral_measure("E", &Tolerances::default()),
            Err(CliError::Invariant(_))
        ));
    }

    #[test]
    fn insert_round_trips() {
        let t = Tolerances::default();
        let e = SpectralMeasure::coordinate(3).unwrap();
        let f = MeasurableFunction::new(e.space().clone(), vec![Some(C64::new(1.0, 2.0)), None, Some(C64::new(0.1, 0.0))]).unwrap();
        let mut doc = Document::new();
        doc.insert_measure("E", &e);
        doc.insert_function("f", &f);
        let back = Document::parse(&doc.dump()).unwrap();
        let e2 = back.spectral_measure("E", &t).unwrap();
        assert_eq!(e2, e);
        assert_eq!(back.function("f", &e2).unwrap(), f);
    }
}
