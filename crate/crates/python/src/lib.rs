//! Python bindings for the pupflow scanner.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pupflow::report::{finding_json, report_json};
use pupflow::{OutputFormat, ParseErrorPolicy, PatternSet, ResourceTaxonomy, RunConfig, ScanMode};

fn mode_of(name: &str) -> PyResult<ScanMode> {
    match name {
        "taint" => Ok(ScanMode::Taint),
        "pattern" => Ok(ScanMode::Pattern),
        other => Err(PyValueError::new_err(format!("unknown mode `{other}` (expected taint or pattern)"))),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Finding", module = "pupflow_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyFinding {
    #[pyo3(get)]
    category: String,
    #[pyo3(get)]
    manifest: String,
    #[pyo3(get)]
    line: u32,
    #[pyo3(get)]
    column: u32,
    #[pyo3(get)]
    name: String,
    #[pyo3(get)]
    sink_resource_type: Option<String>,
    #[pyo3(get)]
    sink_resource_title: Option<String>,
    #[pyo3(get)]
    sink_attribute: Option<String>,
    #[pyo3(get)]
    sink_line: Option<u32>,
    /// `(label, line, column)` from taint to sink.
    #[pyo3(get)]
    path: Vec<(String, u32, u32)>,
    json: String,
}

impl From<&pupflow::Finding> for PyFinding {
    fn from(f: &pupflow::Finding) -> Self {
        PyFinding {
            category: f.category.to_string(),
            manifest: f.manifest_path.to_string(),
            line: f.weakness_location.line,
            column: f.weakness_location.column,
            name: f.weakness_name.clone(),
            sink_resource_type: f.sink.as_ref().map(|s| s.resource_type.clone()),
            sink_resource_title: f.sink.as_ref().map(|s| s.resource_title.clone()),
            sink_attribute: f.sink.as_ref().map(|s| s.attribute.clone()),
            sink_line: f.sink.as_ref().map(|s| s.location.line),
            path: f
                .path
                .iter()
                .map(|s| (s.label.clone(), s.location.line, s.location.column))
                .collect(),
            json: finding_json(f).to_string(),
        }
    }
}

#[pymethods]
impl PyFinding {
    fn to_json(&self) -> String {
        self.json.clone()
    }

    fn __repr__(&self) -> String {
        match (&self.sink_resource_type, &self.sink_resource_title, &self.sink_attribute) {
            (Some(ty), Some(title), Some(attr)) => format!(
                "Finding({} {} at {}:{} -> {ty}[{title}].{attr})",
                self.category, self.name, self.manifest, self.line
            ),
            _ => format!("Finding({} {} at {}:{})", self.category, self.name, self.manifest, self.line),
        }
    }
}

#[pyclass(name = "Report", module = "pupflow_py", frozen)]
pub struct PyReport {
    inner: pupflow::Report,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode.as_str()
    }

    #[getter]
    fn manifests_scanned(&self) -> usize {
        self.inner.manifests_scanned
    }

    #[getter]
    fn findings(&self) -> Vec<PyFinding> {
        self.inner.findings.iter().map(PyFinding::from).collect()
    }

    #[getter]
    fn total_resources(&self) -> usize {
        self.inner.stats.total_resources
    }

    #[getter]
    fn impacted_resources(&self) -> usize {
        self.inner.stats.impacted_resources
    }

    /// `None` when no resource was scanned.
    #[getter]
    fn impacted_pct(&self) -> Option<f64> {
        self.inner.stats.impacted_pct
    }

    /// `(precision, recall, f_measure)`, each `None` when undefined, or
    /// `None` without ground truth.
    #[getter]
    fn evaluation(&self) -> Option<(Option<f64>, Option<f64>, Option<f64>)> {
        self.inner
            .evaluation
            .as_ref()
            .map(|e| (e.overall.precision, e.overall.recall, e.overall.f_measure))
    }

    fn to_json(&self) -> String {
        report_json(&self.inner).to_string()
    }

    #[pyo3(signature = (format = "json"))]
    fn render(&self, format: &str) -> PyResult<String> {
        let format: OutputFormat = format.parse().map_err(value_err)?;
        String::from_utf8(pupflow::render_report(&self.inner, format)).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.inner.findings.len()
    }
}

/// Scans files and directories, as the `scan` command does.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (paths, mode = "taint", jobs = 0, ground_truth = None, taxonomy = None, patterns = None, on_parse_error = "skip"))]
fn scan(
    py: Python<'_>,
    paths: Vec<PathBuf>,
    mode: &str,
    jobs: usize,
    ground_truth: Option<PathBuf>,
    taxonomy: Option<PathBuf>,
    patterns: Option<PathBuf>,
    on_parse_error: &str,
) -> PyResult<PyReport> {
    let on_parse_error = match on_parse_error {
        "skip" => ParseErrorPolicy::Skip,
        "abort" => ParseErrorPolicy::Abort,
        other => return Err(PyValueError::new_err(format!("unknown parse error policy `{other}`"))),
    };
    let config = RunConfig {
        paths,
        mode: mode_of(mode)?,
        jobs,
        ground_truth,
        taxonomy,
        patterns,
        on_parse_error,
        ..RunConfig::default()
    };
    let report = py
        .detach(|| pupflow::scan(&config))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(PyReport { inner: report })
}

/// Findings for one manifest given as text.
#[pyfunction]
#[pyo3(signature = (text, path = "<memory>.pp", mode = "taint"))]
fn scan_source(text: &str, path: &str, mode: &str) -> PyResult<Vec<PyFinding>> {
    let analysis =
        pupflow::analyze_source(text, path, mode_of(mode)?, &PatternSet::default()).map_err(value_err)?;
    Ok(analysis.findings.iter().map(PyFinding::from).collect())
}

#[pyfunction]
fn evaluate_predicate(predicate: &str, text: &str) -> PyResult<bool> {
    pupflow::evaluate_predicate(predicate, text, &PatternSet::default()).map_err(value_err)
}

#[pyfunction]
fn impacted_resource_pct(impacted: usize, total: usize) -> PyResult<f64> {
    pupflow::impacted_resource_pct(impacted, total).map_err(value_err)
}

#[pyfunction]
fn categorize_resource(resource_type: &str, resource_title: &str) -> String {
    pupflow::categorize_resource(resource_type, resource_title, &ResourceTaxonomy::default())
}

#[pymodule]
fn pupflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFinding>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(scan_source, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_predicate, m)?)?;
    m.add_function(wrap_pyfunction!(impacted_resource_pct, m)?)?;
    m.add_function(wrap_pyfunction!(categorize_resource, m)?)?;
    Ok(())
}
