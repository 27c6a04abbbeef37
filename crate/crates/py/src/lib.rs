//! Python bindings: the spectral workspace operators, reduction
//! classification, the global-existence threshold, config-driven runs, and
//! the verification suites.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use gchlab_core::config::parse_config;
use gchlab_core::diagnostics;
use gchlab_core::model::{classify_reduction as classify, Field, Grid, ModelParams, Reduction};
use gchlab_core::run::simulate as run_simulate;
use gchlab_core::spectral::SpectralWorkspace;
use gchlab_core::verify;
use gchlab_core::GchError;

fn err(e: GchError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Periodic grid plus the Fourier operator tables for one nonlinearity
/// order.
#[pyclass]
struct Workspace {
    ws: SpectralWorkspace,
}

impl Workspace {
    fn field(&self, values: Vec<f64>) -> PyResult<Field> {
        if values.len() != self.ws.grid.nx {
            return Err(PyValueError::new_err(format!(
                "field length {} does not match nx = {}",
                values.len(),
                self.ws.grid.nx
            )));
        }
        Ok(Field::new(values))
    }
}

#[pymethods]
impl Workspace {
    #[new]
    fn new(half_length: f64, nx: usize, n_order: u32) -> PyResult<Self> {
        let grid = Grid::new(half_length, nx).map_err(err)?;
        Ok(Workspace {
            ws: SpectralWorkspace::new(grid, n_order),
        })
    }

    fn nodes(&self) -> Vec<f64> {
        self.ws.grid.nodes()
    }

    fn dx(&self) -> f64 {
        self.ws.grid.dx()
    }

    fn derivative(&self, values: Vec<f64>, order: u32) -> PyResult<Vec<f64>> {
        Ok(self
            .ws
            .derivative(&self.field(values)?, order)
            .into_values())
    }

    fn helmholtz_solve(&self, values: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.ws.helmholtz_solve(&self.field(values)?).into_values())
    }

    fn green_convolve_oracle(&self, values: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self
            .ws
            .green_convolve_oracle(&self.field(values)?)
            .into_values())
    }

    fn momentum(&self, values: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.ws.momentum(&self.field(values)?).into_values())
    }

    fn dealias(&self, values: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.ws.dealias(&self.field(values)?).into_values())
    }

    fn sobolev_norm(&self, values: Vec<f64>, s: f64) -> PyResult<f64> {
        Ok(self.ws.sobolev_norm(&self.field(values)?, s))
    }

    fn lp_norm(&self, values: Vec<f64>, p: f64) -> PyResult<f64> {
        Ok(self.ws.lp_norm(&self.field(values)?, p))
    }
}

/// Names the (N, beta) reduction: camassa_holm, degasperis_procesi,
/// novikov, or generic.
#[pyfunction]
fn classify_reduction(n: u32, beta: f64) -> PyResult<String> {
    let p = ModelParams::new(n, beta, 0.0, 0.0).map_err(err)?;
    Ok(match classify(&p) {
        Reduction::CamassaHolm => "camassa_holm",
        Reduction::DegasperisProcesi => "degasperis_procesi",
        Reduction::Novikov => "novikov",
        Reduction::Generic => "generic",
    }
    .to_string())
}

/// L^2 smallness threshold on the initial momentum for global existence.
#[pyfunction]
fn small_momentum_threshold(n: u32, beta: f64, lambda: f64) -> PyResult<f64> {
    let p = ModelParams::new(n, beta, 0.0, lambda).map_err(err)?;
    diagnostics::small_momentum_threshold(&p).map_err(err)
}

/// Runs a JSON config (same schema as `gchlab simulate`) and returns the
/// summary JSON. Artifacts are written into out_dir.
#[pyfunction]
fn simulate(config_json: &str, out_dir: &str) -> PyResult<String> {
    let cfg = parse_config(config_json).map_err(err)?;
    let art = run_simulate(&cfg, out_dir).map_err(err)?;
    serde_json::to_string_pretty(&art.summary).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs a named verification suite; returns (passed, rendered_report).
#[pyfunction]
fn verify_suite(name: &str) -> PyResult<(bool, String)> {
    let report = verify::run_suite(name).map_err(err)?;
    Ok((report.passed(), report.render()))
}

#[pymodule]
fn gchlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Workspace>()?;
    m.add_function(wrap_pyfunction!(classify_reduction, m)?)?;
    m.add_function(wrap_pyfunction!(small_momentum_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_suite, m)?)?;
    m.add("suite_names", verify::SUITE_NAMES.to_vec())?;
    Ok(())
}
