//! Python bindings for `entgame`.
//!
//! Generators are passed as lists of rows (the diagonal is checked against
//! the row sums), distributions and weights as flat lists, and divergences by
//! name (`"kl"`, `"alpha:2"`, `"tv"`, ...). Results come back as dicts.

use ::entgame as core;
use core::{
    CentroidResult, Distribution, DivergenceSpec, EquilibriumReport, Generator, GeneratorFamily, GenericOptions,
    GridSpec, PowerExponent, SolveOptions, WeightVector,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(entgame, EntgameError, PyValueError, "Invalid input or unsupported operation.");
create_exception!(entgame, NotConvergedError, EntgameError, "An iterative routine missed its tolerance.");

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::NotConverged { .. } | core::Error::ToleranceNotReached(_) | core::Error::NonFiniteIterate(_) => {
            NotConvergedError::new_err(e.to_string())
        }
        _ => EntgameError::new_err(e.to_string()),
    }
}

fn spec(kind: &str) -> PyResult<DivergenceSpec> {
    kind.parse().map_err(err)
}

fn dist(pi: Vec<f64>, tol: f64) -> PyResult<Distribution> {
    Distribution::with_tol(pi, tol).map_err(err)
}

fn generator(rows: &[Vec<f64>], tol: f64) -> PyResult<Generator> {
    Generator::from_rows(rows, tol).map_err(err)
}

fn family(members: &[Vec<Vec<f64>>], tol: f64) -> PyResult<GeneratorFamily> {
    let gens = members.iter().map(|g| generator(g, tol)).collect::<PyResult<Vec<_>>>()?;
    GeneratorFamily::new(gens).map_err(err)
}

fn weights(w: Option<Vec<f64>>, n: usize) -> PyResult<WeightVector> {
    match w {
        Some(w) => WeightVector::new(w),
        None => WeightVector::uniform(n),
    }
    .map_err(err)
}

fn centroid_dict<'py>(py: Python<'py>, r: &CentroidResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("centroid", r.centroid.to_rows())?;
    d.set_item("divergences", r.per_member_divergence.iter().map(|v| v.value()).collect::<Vec<_>>())?;
    match &r.flat_interval {
        Some(f) => d.set_item("flat_interval", (f.lower.to_rows(), f.upper.to_rows()))?,
        None => d.set_item("flat_interval", py.None())?,
    }
    Ok(d)
}

fn report_dict<'py>(py: Python<'py>, r: &EquilibriumReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("weights", r.weights_avg.as_slice().to_vec())?;
    d.set_item("weights_last", r.weights_last.as_slice().to_vec())?;
    d.set_item("centroid", r.centroid.to_rows())?;
    d.set_item("value", r.value)?;
    d.set_item("chebyshev_radius", r.chebyshev_radius)?;
    d.set_item("gap", r.gap)?;
    d.set_item("initial_gap", r.initial_gap)?;
    d.set_item("divergences", r.divergences.clone())?;
    d.set_item("slackness", r.slackness.clone())?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("stepsize", r.stepsize)?;
    d.set_item("b_estimate", r.b_estimate)?;
    d.set_item("b_doublings", r.b_doublings)?;
    let trace: Vec<(usize, f64, f64, f64)> = r.trace.iter().map(|t| (t.iteration, t.dual, t.primal, t.gap)).collect();
    d.set_item("trace", trace)?;
    Ok(d)
}

/// `D_f(M || L)` with respect to `pi`; `inf` when unbounded.
#[pyfunction]
#[pyo3(signature = (kind, m, l, pi, tol = core::DEFAULT_TOL))]
fn divergence(kind: &str, m: Vec<Vec<f64>>, l: Vec<Vec<f64>>, pi: Vec<f64>, tol: f64) -> PyResult<f64> {
    let v = core::divergence(&spec(kind)?, &generator(&m, tol)?, &generator(&l, tol)?, &dist(pi, tol)?).map_err(err)?;
    Ok(v.value())
}

/// The pi-dual `L_pi(x, y) = pi(y) L(y, x) / pi(x)`.
#[pyfunction]
#[pyo3(signature = (l, pi, tol = core::DEFAULT_TOL))]
fn pi_dual(l: Vec<Vec<f64>>, pi: Vec<f64>, tol: f64) -> PyResult<Vec<Vec<f64>>> {
    Ok(core::pi_dual(&generator(&l, tol)?, &dist(pi, tol)?).map_err(err)?.to_rows())
}

#[pyfunction]
#[pyo3(signature = (l, pi, tol = core::DEFAULT_TOL))]
fn is_reversible(l: Vec<Vec<f64>>, pi: Vec<f64>, tol: f64) -> PyResult<bool> {
    core::is_reversible(&generator(&l, tol)?, &dist(pi, tol)?, tol).map_err(err)
}

/// Power-mean reversiblization; `p` may be `float("inf")` or `-inf`.
#[pyfunction]
#[pyo3(signature = (l, pi, p, tol = core::DEFAULT_TOL))]
fn reversiblize(l: Vec<Vec<f64>>, pi: Vec<f64>, p: f64, tol: f64) -> PyResult<Vec<Vec<f64>>> {
    if p.is_nan() {
        return Err(EntgameError::new_err("p must not be NaN"));
    }
    let g = core::power_mean_reversiblization(&generator(&l, tol)?, &dist(pi, tol)?, PowerExponent::new(p))
        .map_err(err)?;
    Ok(g.to_rows())
}

/// f-projection of `l` onto the pi-reversible generators.
#[pyfunction]
#[pyo3(signature = (kind, l, pi, tol = core::DEFAULT_TOL))]
fn f_projection<'py>(
    py: Python<'py>,
    kind: &str,
    l: Vec<Vec<f64>>,
    pi: Vec<f64>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = core::f_projection_result(&spec(kind)?, &generator(&l, tol)?, &dist(pi, tol)?).map_err(err)?;
    centroid_dict(py, &r)
}

/// Weighted information centroid. `method` is `"auto"`, `"closed"` or `"generic"`.
#[pyfunction]
#[pyo3(signature = (kind, generators, pi, weights = None, method = "auto", tol = core::DEFAULT_TOL))]
fn weighted_centroid<'py>(
    py: Python<'py>,
    kind: &str,
    generators: Vec<Vec<Vec<f64>>>,
    pi: Vec<f64>,
    weights: Option<Vec<f64>>,
    method: &str,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = spec(kind)?;
    let fam = family(&generators, tol)?;
    let pi = dist(pi, tol)?;
    let w = self::weights(weights, fam.len())?;
    let r = match method {
        "auto" => core::weighted_centroid(&s, &fam, &pi, &w),
        "closed" => core::weighted_centroid_closed(&s, &fam, &pi, &w),
        "generic" => core::weighted_centroid_generic(&s, &fam, &pi, &w, &GenericOptions::default()),
        other => return Err(EntgameError::new_err(format!("unknown method {other:?}"))),
    }
    .map_err(err)?;
    centroid_dict(py, &r)
}

/// Euclidean projection onto the probability simplex.
#[pyfunction]
fn simplex_project(v: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(core::simplex_project(&v).map_err(err)?.as_slice().to_vec())
}

/// Projected subgradient search for the mixed equilibrium.
#[pyfunction]
#[pyo3(signature = (
    kind, generators, pi, iters = 1000, eta = None, w0 = None, epsilon = None,
    trace_every = 0, ref_index = None, tol = core::DEFAULT_TOL
))]
#[allow(clippy::too_many_arguments)]
fn solve_game<'py>(
    py: Python<'py>,
    kind: &str,
    generators: Vec<Vec<Vec<f64>>>,
    pi: Vec<f64>,
    iters: usize,
    eta: Option<f64>,
    w0: Option<Vec<f64>>,
    epsilon: Option<f64>,
    trace_every: usize,
    ref_index: Option<usize>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = spec(kind)?;
    let fam = family(&generators, tol)?;
    let pi = dist(pi, tol)?;
    let w0 = w0.map(|w| weights(Some(w), fam.len())).transpose()?;
    let opts = SolveOptions { iters, eta, w0, ref_index, trace_every, epsilon, ..SolveOptions::default() };
    let r = py.detach(|| core::solve_game(&s, &fam, &pi, &opts)).map_err(err)?;
    report_dict(py, &r)
}

/// Decides whether the pure-strategy game has a saddle point.
#[pyfunction]
#[pyo3(signature = (kind, generators, pi, iters = 10000, nash_tol = core::PURE_NASH_TOL, tol = core::DEFAULT_TOL))]
fn pure_nash_check<'py>(
    py: Python<'py>,
    kind: &str,
    generators: Vec<Vec<Vec<f64>>>,
    pi: Vec<f64>,
    iters: usize,
    nash_tol: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = spec(kind)?;
    let fam = family(&generators, tol)?;
    let pi = dist(pi, tol)?;
    let opts = SolveOptions { trace_every: 0, ..SolveOptions::with_iters(iters) };
    let r = py.detach(|| core::pure_nash_check(&s, &fam, &pi, nash_tol, &opts)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("exists", r.exists)?;
    match &r.saddle {
        Some((m, l)) => d.set_item("saddle", (m.to_rows(), *l))?,
        None => d.set_item("saddle", py.None())?,
    }
    d.set_item("maximizers", r.maximizers)?;
    d.set_item("maximin", r.maximin)?;
    d.set_item("minimax", r.minimax)?;
    d.set_item("per_index", r.per_index)?;
    Ok(d)
}

/// Grid maximization of the dual objective (at most three members).
#[pyfunction]
#[pyo3(signature = (kind, generators, pi, resolution = 1e-3, tol = core::DEFAULT_TOL))]
fn oracle_dual_max<'py>(
    py: Python<'py>,
    kind: &str,
    generators: Vec<Vec<Vec<f64>>>,
    pi: Vec<f64>,
    resolution: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = spec(kind)?;
    let fam = family(&generators, tol)?;
    let pi = dist(pi, tol)?;
    let grid = GridSpec::new(resolution).map_err(err)?;
    let r = py.detach(|| core::oracle_dual_max(&s, &fam, &pi, &grid)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("weights", r.weights.as_slice().to_vec())?;
    d.set_item("value", r.value)?;
    d.set_item("grid_points", r.grid_points)?;
    Ok(d)
}

/// Dense per-edge scan for the weighted centroid.
#[pyfunction]
#[pyo3(signature = (kind, generators, pi, weights = None, resolution = 1e-5, tol = core::DEFAULT_TOL))]
fn oracle_edge_scan<'py>(
    py: Python<'py>,
    kind: &str,
    generators: Vec<Vec<Vec<f64>>>,
    pi: Vec<f64>,
    weights: Option<Vec<f64>>,
    resolution: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = spec(kind)?;
    let fam = family(&generators, tol)?;
    let pi = dist(pi, tol)?;
    let w = self::weights(weights, fam.len())?;
    let grid = GridSpec::new(resolution).map_err(err)?;
    let r = py.detach(|| core::oracle_edge_scan(&s, &fam, &pi, &w, &grid)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("argmin", r.argmin.to_rows())?;
    d.set_item("plateau", (r.plateau_lower.to_rows(), r.plateau_upper.to_rows()))?;
    Ok(d)
}

/// Maximin value of the pure game and the per-member self-projection values.
#[pyfunction]
#[pyo3(signature = (kind, generators, pi, tol = core::DEFAULT_TOL))]
fn oracle_pure_values(
    kind: &str,
    generators: Vec<Vec<Vec<f64>>>,
    pi: Vec<f64>,
    tol: f64,
) -> PyResult<(f64, Vec<f64>)> {
    let r = core::oracle_pure_values(&spec(kind)?, &family(&generators, tol)?, &dist(pi, tol)?).map_err(err)?;
    Ok((r.v_underline, r.per_index))
}

#[pymodule]
fn entgame(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("EntgameError", m.py().get_type::<EntgameError>())?;
    m.add("NotConvergedError", m.py().get_type::<NotConvergedError>())?;
    m.add("DEFAULT_TOL", core::DEFAULT_TOL)?;
    m.add_function(wrap_pyfunction!(divergence, m)?)?;
    m.add_function(wrap_pyfunction!(pi_dual, m)?)?;
    m.add_function(wrap_pyfunction!(is_reversible, m)?)?;
    m.add_function(wrap_pyfunction!(reversiblize, m)?)?;
    m.add_function(wrap_pyfunction!(f_projection, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_centroid, m)?)?;
    m.add_function(wrap_pyfunction!(simplex_project, m)?)?;
    m.add_function(wrap_pyfunction!(solve_game, m)?)?;
    m.add_function(wrap_pyfunction!(pure_nash_check, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_dual_max, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_edge_scan, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_pure_values, m)?)?;
    Ok(())
}
