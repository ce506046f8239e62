//! Python bindings: load models, run protocols and benchmark suites.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fsdb::bench;
use fsdb::element::Formulation;
use fsdb::model_io::{self, ModelSpec, Overrides, RunOutput};
use fsdb::FsdbError;

fn to_py(e: FsdbError) -> PyErr {
    match e {
        FsdbError::Parse { .. } | FsdbError::Validation(_) | FsdbError::InvalidInput(_) => {
            PyValueError::new_err(e.to_string())
        }
        FsdbError::Io { .. } | FsdbError::MalformedResults { .. } => {
            PyOSError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn formulation(name: Option<&str>) -> PyResult<Option<Formulation>> {
    match name.map(str::to_ascii_lowercase).as_deref() {
        None => Ok(None),
        Some("fsdb") => Ok(Some(Formulation::Fsdb)),
        Some("db") => Ok(Some(Formulation::Db)),
        Some(other) => Err(PyValueError::new_err(format!(
            "unknown formulation '{other}', expected 'fsdb' or 'db'"
        ))),
    }
}

fn overrides(
    f: Option<&str>,
    integration_points: Option<usize>,
    elements: Option<usize>,
    axial_eq: Option<bool>,
    steps: Option<usize>,
) -> PyResult<Overrides> {
    Ok(Overrides {
        formulation: formulation(f)?,
        integration_points,
        elements,
        axial_eq,
        steps,
    })
}

/// A parsed model file.
#[pyclass(name = "Model", module = "pyfsdb", frozen)]
struct PyModel {
    spec: ModelSpec,
}

#[pymethods]
impl PyModel {
    /// Parse model text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        model_io::parse_model(text)
            .map(|spec| Self { spec })
            .map_err(to_py)
    }

    /// Load a model file path or the name of a built-in model.
    #[staticmethod]
    fn load(name_or_path: &str) -> PyResult<Self> {
        model_io::load_model(name_or_path)
            .map(|spec| Self { spec })
            .map_err(to_py)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.spec.name
    }

    #[getter]
    fn description(&self) -> &str {
        &self.spec.description
    }

    #[getter]
    fn source_hash(&self) -> &str {
        &self.spec.source_hash
    }

    #[getter]
    fn protocols(&self) -> Vec<String> {
        self.spec.protocols.keys().cloned().collect()
    }

    #[getter]
    fn nodes(&self) -> Vec<(f64, f64)> {
        self.spec.nodes.iter().map(|n| (n[0], n[1])).collect()
    }

    /// Run a protocol. The GIL is released while the analysis runs.
    #[pyo3(signature = (protocol = "pushover", *, formulation = None, integration_points = None,
                        elements = None, axial_eq = None, steps = None))]
    #[allow(clippy::too_many_arguments)]
    fn run(
        &self,
        py: Python<'_>,
        protocol: &str,
        formulation: Option<&str>,
        integration_points: Option<usize>,
        elements: Option<usize>,
        axial_eq: Option<bool>,
        steps: Option<usize>,
    ) -> PyResult<PyRun> {
        let ov = overrides(formulation, integration_points, elements, axial_eq, steps)?;
        let spec = &self.spec;
        py.detach(|| spec.run(protocol, &ov))
            .map(|out| PyRun { out })
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(name={:?}, nodes={}, members={})",
            self.spec.name,
            self.spec.nodes.len(),
            self.spec.members.len()
        )
    }
}

/// Outcome of one protocol run.
#[pyclass(name = "Run", module = "pyfsdb", frozen)]
struct PyRun {
    out: RunOutput,
}

#[pymethods]
impl PyRun {
    #[getter]
    fn converged(&self) -> bool {
        self.out.result.converged()
    }

    #[getter]
    fn failure(&self) -> Option<String> {
        self.out.result.failure.clone()
    }

    /// Largest positive reaction, kN.
    #[getter]
    fn peak_positive_kn(&self) -> f64 {
        self.out.result.peak_positive() / 1e3
    }

    /// Most negative reaction, kN.
    #[getter]
    fn peak_negative_kn(&self) -> f64 {
        self.out.result.peak_negative() / 1e3
    }

    #[getter]
    fn steps(&self) -> usize {
        self.out.result.steps.len()
    }

    /// Capacity curve as a dict of equal-length lists.
    fn capacity<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = &self.out.result.steps;
        let d = PyDict::new(py);
        d.set_item("step", s.iter().map(|r| r.step).collect::<Vec<_>>())?;
        d.set_item(
            "control_disp_m",
            s.iter().map(|r| r.control_disp).collect::<Vec<_>>(),
        )?;
        d.set_item(
            "reaction_kn",
            s.iter().map(|r| r.reaction / 1e3).collect::<Vec<_>>(),
        )?;
        d.set_item(
            "axial_disp_m",
            s.iter().map(|r| r.axial_disp).collect::<Vec<_>>(),
        )?;
        Ok(d)
    }

    /// Gauss-point records of element `element` at step index `index`,
    /// as a list of dicts.
    #[pyo3(signature = (index, element = 0))]
    fn fields<'py>(
        &self,
        py: Python<'py>,
        index: usize,
        element: usize,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let recs = self
            .out
            .result
            .steps
            .get(index)
            .and_then(|s| s.fields.get(element))
            .ok_or_else(|| PyValueError::new_err("step or element index out of range"))?;
        recs.iter()
            .map(|g| {
                let d = PyDict::new(py);
                d.set_item("x_over_l", g.x_over_l)?;
                d.set_item("eps0", g.eps0)?;
                d.set_item("chi", g.chi)?;
                d.set_item("n", g.n)?;
                d.set_item("m", g.m)?;
                d.set_item("beta_x", g.beta_x)?;
                d.set_item("beta_z", g.beta_z)?;
                Ok(d)
            })
            .collect()
    }

    fn metadata<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let m = &self.out.metadata;
        let d = PyDict::new(py);
        d.set_item("model", &m.model)?;
        d.set_item("model_hash", &m.model_hash)?;
        d.set_item("protocol", &m.protocol)?;
        d.set_item("formulation", &m.formulation)?;
        d.set_item("integration_points", m.integration_points)?;
        d.set_item("elements", m.elements)?;
        d.set_item("axial_equilibration", m.axial_equilibration)?;
        d.set_item("converged", m.converged)?;
        d.set_item("failure", m.failure.clone())?;
        Ok(d)
    }

    /// Write capacity.csv, fields.csv and metadata.toml into `dir`.
    fn write(&self, dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        model_io::write_results(&self.out.bundle(), &dir).map_err(to_py)
    }
}

/// Names of the built-in models.
#[pyfunction]
fn builtin_models() -> Vec<&'static str> {
    model_io::builtin_names().collect()
}

/// Run a benchmark suite ("table1" or "benchmark1"). Returns one dict per
/// case with the measured and reference peaks in kN.
#[pyfunction]
#[pyo3(signature = (suite = "table1", *, integration_points = None, elements = None,
                    axial_eq = None, steps = None))]
fn run_bench<'py>(
    py: Python<'py>,
    suite: &str,
    integration_points: Option<usize>,
    elements: Option<usize>,
    axial_eq: Option<bool>,
    steps: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let ov = overrides(None, integration_points, elements, axial_eq, steps)?;
    let cases = match suite {
        "table1" => py.detach(|| bench::table1(&ov)),
        "benchmark1" => py.detach(|| bench::benchmark1(&ov)),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown suite '{other}', expected 'table1' or 'benchmark1'"
            )))
        }
    };
    cases
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("label", &c.label)?;
            d.set_item("formulation", c.formulation.to_string())?;
            d.set_item("measured_kn", c.measured.as_ref().ok().copied())?;
            d.set_item("error", c.measured.as_ref().err().cloned())?;
            d.set_item("reference_kn", c.reference)?;
            d.set_item("fb_reference_kn", c.fb)?;
            d.set_item("deviation_pct", c.deviation_pct())?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn pyfsdb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyRun>()?;
    m.add_function(wrap_pyfunction!(builtin_models, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    Ok(())
}
