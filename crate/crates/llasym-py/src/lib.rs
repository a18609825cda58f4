use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use llasym::asymptote::{assemble_expansion, evaluate_rho, Amplitude, Numerics};
use llasym::cli::{run_checks, RunConfig};
use llasym::dressing::dress_all;
use llasym::excitations::{default_scan_range, find_saddle};
use llasym::model::ModelParams;
use llasym::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParam(_) | Error::Domain(..) | Error::RatioMismatch(..) | Error::Configuration(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn params(c: f64, h: f64) -> PyResult<ModelParams> {
    ModelParams::new(c, h).map_err(to_py)
}

/// Dressed quantities: q, density, pF, vF, det_IK and the node tables.
#[pyfunction]
#[pyo3(signature = (c, h, n_nodes = 96))]
fn dress<'py>(py: Python<'py>, c: f64, h: f64, n_nodes: usize) -> PyResult<Bound<'py, PyDict>> {
    let d = dress_all(&params(c, h)?, n_nodes, 1e-12).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("q", d.q)?;
    out.set_item("density", d.density)?;
    out.set_item("p_f", d.p_f)?;
    out.set_item("v_f", d.v_f)?;
    out.set_item("det_ik", d.det_ik)?;
    out.set_item("lambda", d.grid.nodes.clone())?;
    out.set_item("p", d.p_nodes.clone())?;
    out.set_item("eps", d.eps.values().to_vec())?;
    out.set_item("z", d.z.values().to_vec())?;
    out.set_item("z_identity_residual", d.z_identity_residual().map_err(to_py)?)?;
    Ok(out)
}

/// Saddle point of u = p - (t/x) eps.
#[pyfunction]
#[pyo3(signature = (c, h, ratio_t_over_x, n_nodes = 96))]
fn saddle<'py>(py: Python<'py>, c: f64, h: f64, ratio_t_over_x: f64, n_nodes: usize) -> PyResult<Bound<'py, PyDict>> {
    let d = dress_all(&params(c, h)?, n_nodes, 1e-12).map_err(to_py)?;
    let s = find_saddle(ratio_t_over_x, &d, default_scan_range(ratio_t_over_x, d.q)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("lambda0", s.lambda0)?;
    out.set_item("regime", s.regime.name())?;
    out.set_item("u_prime", s.u_prime)?;
    out.set_item("u_second", s.u_second)?;
    Ok(out)
}

#[pyclass(module = "llasym_py", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct Term {
    label: String,
    frequency: f64,
    exponent_plus: f64,
    exponent_minus: f64,
    extra_power: f64,
    amplitude: Option<f64>,
    active: bool,
}

#[pymethods]
impl Term {
    fn __repr__(&self) -> String {
        format!(
            "Term({}, frequency={:.6}, exponents=({:.6}, {:.6}), amplitude={:?})",
            self.label, self.frequency, self.exponent_plus, self.exponent_minus, self.amplitude
        )
    }
}

/// Asymptotic terms and rho(x, t) at points on the ray t = ratio * x.
#[pyfunction]
#[pyo3(signature = (c, h, ratio_t_over_x, points = Vec::new(), max_abs_ell = 2, n_nodes = 96, contour_nodes = 256))]
fn expansion(
    py: Python<'_>,
    c: f64,
    h: f64,
    ratio_t_over_x: f64,
    points: Vec<(f64, f64)>,
    max_abs_ell: i64,
    n_nodes: usize,
    contour_nodes: usize,
) -> PyResult<(Vec<Term>, Vec<Complex64>)> {
    let p = params(c, h)?;
    let numerics = Numerics { n_nodes, contour_nodes, ..Numerics::default() };
    py.detach(|| {
        let rep = assemble_expansion(&p, ratio_t_over_x, max_abs_ell, &numerics)?;
        let values = points.iter().map(|&(x, t)| evaluate_rho(&rep, x, t).map(|e| e.value)).collect::<llasym::Result<Vec<_>>>()?;
        let terms = rep
            .terms
            .iter()
            .map(|t| Term {
                label: t.label.name(),
                frequency: t.frequency,
                exponent_plus: t.exponent_plus,
                exponent_minus: t.exponent_minus,
                extra_power: t.extra_power,
                amplitude: match t.amplitude {
                    Amplitude::Known(a) => Some(a.re),
                    Amplitude::Unknown => None,
                },
                active: t.active,
            })
            .collect();
        Ok((terms, values))
    })
    .map_err(to_py)
}

/// The verification suite as (name, value, tolerance, passed) tuples.
#[pyfunction]
#[pyo3(signature = (perturb = 0.0))]
fn verify(py: Python<'_>, perturb: f64) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let cfg = RunConfig { perturb, ..RunConfig::default() };
    let checks = py.detach(|| run_checks(&cfg)).map_err(|e| PyRuntimeError::new_err(e.message))?;
    Ok(checks.into_iter().map(|c| (c.name.clone(), c.value, c.tolerance, c.passed())).collect())
}

#[pymodule]
fn llasym_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Term>()?;
    m.add_function(wrap_pyfunction!(dress, m)?)?;
    m.add_function(wrap_pyfunction!(saddle, m)?)?;
    m.add_function(wrap_pyfunction!(expansion, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
