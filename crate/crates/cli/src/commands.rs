//! One function per subcommand. Each returns a [`Report`] carrying both
//! renderings and the exit code; `main` only picks a format and prints.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use pvm_algebra::algebra::{bicommutant, commutant, AlgebraBasis};
use pvm_algebra::generators::{check_generates, is_separating, joint_evaluation_pushforward, GenerationVerdict};
use pvm_algebra::harness::{default_specs, run_campaign, CampaignReport, Scenario};
use pvm_algebra::numkernel::operator_norm;
use pvm_algebra::spectral::{format_complex, spectral_measure_of_normal, AtomLabel, MeasurableFunction, SpectralMeasure};
use pvm_algebra::{ComplexMatrix, Tolerances};

use crate::document::{measure_payload, Document};
use crate::{CliError, EXIT_DISAGREEMENT, EXIT_NEGATIVE, EXIT_OK};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub json: Value,
    pub exit: i32,
}

impl Report {
    fn new(command: &str, tol: &Tolerances, text: String, body: Value, exit: i32) -> Self {
        let mut json = json!({ "command": command, "tolerances": tol });
        if let (Value::Object(out), Value::Object(extra)) = (&mut json, body) {
            out.extend(extra);
        }
        let text = format!("{}{text}", tolerance_line(tol));
        Report { text, json, exit }
    }
}

fn tolerance_line(tol: &Tolerances) -> String {
    format!(
        "tolerances: rank_tol={:?} residual_tol={:?} value_tol={:?}\n",
        tol.rank_tol, tol.residual_tol, tol.value_tol
    )
}

fn render_matrix(out: &mut String, m: &ComplexMatrix, indent: &str) {
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|z| format_complex(*z)).collect();
        let _ = writeln!(out, "{indent}[{}]", cells.join(", "));
    }
}

fn basis_report(command: &str, a: &AlgebraBasis, tol: &Tolerances) -> Report {
    let mut text = format!("dimension {}\nstar_closed {}\n", a.dimension(), a.is_star_closed());
    for (k, b) in a.basis().iter().enumerate() {
        let _ = writeln!(text, "basis[{k}]:");
        render_matrix(&mut text, b, "  ");
    }
    let body = json!({
        "dim": a.dim(),
        "dimension": a.dimension(),
        "star_closed": a.is_star_closed(),
        "basis": a.basis().iter().map(ComplexMatrix::rows).collect::<Vec<_>>(),
    });
    Report::new(command, tol, text, body, EXIT_OK)
}

pub fn cmd_commutant(input: &Path, set: &str, tol: &Tolerances) -> Result<Report, CliError> {
    let doc = Document::load(input)?;
    let x = doc.operator_set(set)?;
    Ok(basis_report("commutant", &commutant(&x, tol)?, tol))
}

pub fn cmd_bicommutant(input: &Path, set: &str, adjoint_close: bool, tol: &Tolerances) -> Result<Report, CliError> {
    let doc = Document::load(input)?;
    let mut x = doc.operator_set(set)?;
    if adjoint_close {
        x = x.adjoint_closure(tol);
    }
    Ok(basis_report("bicommutant", &bicommutant(&x, tol)?, tol))
}

fn label_of(e: &SpectralMeasure, i: usize) -> String {
    e.space().labels()[i].to_string()
}

fn verdict_exit(v: &GenerationVerdict) -> i32 {
    if !v.agrees() {
        EXIT_DISAGREEMENT
    } else if v.criterion_generates {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

pub fn cmd_check_generates(input: &Path, measure: &str, set: &str, tol: &Tolerances) -> Result<Report, CliError> {
    let doc = Document::load(input)?;
    let e = doc.spectral_measure(measure, tol)?;
    let x = doc.operator_set(set)?;
    let v = check_generates(&e, &x, tol)?;

    let mut text = String::from("cond1 (member: expressible, residual):\n");
    for (k, r) in v.cond1.iter().enumerate() {
        let _ = writeln!(text, "  {k}: {} {:?}", r.expressible, r.residual);
    }
    let _ = writeln!(text, "cond2 separating: {}", v.cond2.separating);
    if let Some((i, j)) = v.cond2.witness_pair {
        let _ = writeln!(text, "  witness pair: ({i}, {j}) = ({}, {})", label_of(&e, i), label_of(&e, j));
    }
    if !v.cond2.null_atoms_used.is_empty() {
        let _ = writeln!(text, "  null atoms: {:?}", v.cond2.null_atoms_used);
    }
    if !v.cond2.near_threshold_atoms.is_empty() {
        let _ = writeln!(text, "  near-threshold atoms: {:?}", v.cond2.near_threshold_atoms);
    }
    let _ = writeln!(text, "criterion generates: {}", v.criterion_generates);
    let _ = writeln!(text, "oracle generates: {}", v.oracle_generates);
    let _ = writeln!(text, "dim A(X) = {}, dim A(P_E) = {}", v.algebra_dims.0, v.algebra_dims.1);
    if !v.agrees() {
        text.push_str("ALARM: criterion and oracle disagree\n");
    }

    let body = json!({
        "cond1": v.cond1.iter().map(|r| json!({
            "expressible": r.expressible,
            "residual": r.residual,
            "symbol": r.candidate.values(),
        })).collect::<Vec<_>>(),
        "cond2": v.cond2,
        "criterion_generates": v.criterion_generates,
        "oracle_generates": v.oracle_generates,
        "algebra_dims": v.algebra_dims,
    });
    Ok(Report::new("check-generates", tol, text, body, verdict_exit(&v)))
}

fn load_functions(doc: &Document, e: &SpectralMeasure, names: &[String]) -> Result<Vec<MeasurableFunction>, CliError> {
    names.iter().map(|n| doc.function(n, e)).collect()
}

pub fn cmd_separate(input: &Path, measure: &str, functions: &[String], tol: &Tolerances) -> Result<Report, CliError> {
    let doc = Document::load(input)?;
    let e = doc.spectral_measure(measure, tol)?;
    let family = load_functions(&doc, &e, functions)?;
    let r = is_separating(&e, &family, tol)?;
    let mut text = format!("separating: {}\n", r.separating);
    if let Some((i, j)) = r.witness_pair {
        let _ = writeln!(text, "witness pair: ({i}, {j}) = ({}, {})", label_of(&e, i), label_of(&e, j));
    }
    let _ = writeln!(text, "null atoms: {:?}", r.null_atoms_used);
    let exit = if r.separating { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Report::new("separate", tol, text, serde_json::to_value(&r).expect("serializable"), exit))
}

pub fn cmd_spectral_measure(input: &Path, matrix: &str, tol: &Tolerances) -> Result<Report, CliError> {
    let doc = Document::load(input)?;
    let t = doc.matrix(matrix)?;
    let e = spectral_measure_of_normal(&t, tol)?;
    let mut rebuilt = ComplexMatrix::zeros(t.dim());
    for (label, p) in e.space().labels().iter().zip(e.projections()) {
        if let Some(z) = label.as_value() {
            rebuilt = &rebuilt + &p.scale(z);
        }
    }
    let residual = operator_norm(&(&t - &rebuilt), tol)?;

    let mut text = String::new();
    let mut atoms = Vec::new();
    for (label, p) in e.space().labels().iter().zip(e.projections()) {
        let mult = p.trace().re.round() as usize;
        let _ = writeln!(text, "eigenvalue {label} (multiplicity {mult}):");
        render_matrix(&mut text, p, "  ");
        atoms.push(json!({ "label": label, "multiplicity": mult }));
    }
    let _ = writeln!(text, "residual ‖T − Σ λ P‖ = {residual:?}");

    let mut out = Document::new();
    out.insert_measure(matrix, &e);
    let body = json!({ "atoms": atoms, "residual": residual, "document": out });
    Ok(Report::new("spectral-measure", tol, text, body, EXIT_OK))
}

pub fn cmd_pushforward(input: &Path, measure: &str, functions: &[String], tol: &Tolerances) -> Result<Report, CliError> {
    let doc = Document::load(input)?;
    let e = doc.spectral_measure(measure, tol)?;
    let family = load_functions(&doc, &e, functions)?;
    let joint = joint_evaluation_pushforward(&e, &family, tol)?;

    let mut text = format!("classes: {} (injective: {})\n", joint.measure.atom_count(), joint.is_injective());
    let mut classes = Vec::new();
    for (c, (label, p)) in joint.measure.space().labels().iter().zip(joint.measure.projections()).enumerate() {
        let members: Vec<&AtomLabel> = joint
            .class_of
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == Some(c))
            .map(|(i, _)| &e.space().labels()[i])
            .collect();
        let names: Vec<String> = members.iter().map(|l| l.to_string()).collect();
        let rank = p.trace().re.round() as usize;
        let _ = writeln!(text, "  {label} <- {{{}}} rank {rank}", names.join(", "));
        classes.push(json!({ "label": label, "atoms": members, "rank": rank }));
    }
    let body = json!({
        "injective": joint.is_injective(),
        "classes": classes,
        "measure": measure_payload(&joint.measure),
    });
    Ok(Report::new("pushforward", tol, text, body, EXIT_OK))
}

#[derive(Debug, Serialize)]
struct CampaignSummary<'a> {
    seed: u64,
    instances_run: usize,
    failures: usize,
    passed: bool,
    elapsed_secs: f64,
    failing_properties: Vec<&'a str>,
}

pub fn parse_scenarios(list: Option<&str>) -> Result<Vec<Scenario>, CliError> {
    match list {
        None => Ok(Scenario::ALL.to_vec()),
        Some(s) => s
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<Scenario>().map_err(CliError::from))
            .collect(),
    }
}

/// Serialized report; excludes wall-clock time, so equal seeds give equal bytes.
pub fn campaign_json(report: &CampaignReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
    s.push('\n');
    s
}

pub fn cmd_campaign(
    seed: u64,
    count: usize,
    scenarios: &[Scenario],
    out: Option<&Path>,
    tol: &Tolerances,
) -> Result<Report, CliError> {
    let specs = default_specs(seed, count, scenarios);
    let report = run_campaign(&specs, tol);
    if let Some(path) = out {
        std::fs::write(path, campaign_json(&report))
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut failing: Vec<&str> = report.failures.iter().map(|f| f.property.as_str()).collect();
    failing.sort_unstable();
    failing.dedup();

    let mut text = format!(
        "seed {seed}: {} instances, {} failures, {:.2} s\n",
        report.instances_run,
        report.failures.len(),
        report.elapsed_secs
    );
    for f in report.failures.iter().take(20) {
        let _ = writeln!(text, "  #{} [{}] {}: {}", f.index, f.spec.scenario, f.property, f.diagnostic);
    }
    if let Some(path) = out {
        let _ = writeln!(text, "report written to {}", path.display());
    }
    let summary = CampaignSummary {
        seed,
        instances_run: report.instances_run,
        failures: report.failures.len(),
        passed: report.passed(),
        elapsed_secs: report.elapsed_secs,
        failing_properties: failing,
    };
    let exit = if report.passed() { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Report::new(
        "campaign",
        tol,
        text,
        serde_json::to_value(&summary).expect("serializable"),
        exit,
    ))
}
