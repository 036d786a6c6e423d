//! Python module `isce2d`.
//!
//! Grid functions cross the boundary as nested lists indexed `[l2][l1]`, lag
//! arrays as nested lists indexed `[k2 + n2][k1 + n1]`, and dual variables as
//! flat lists in half-index order. Reports come back as dicts.

use isce2d_core::continuation::{continue_solve, ContinuationOptions, HomotopyProblem};
use isce2d_core::covariance::{covariances_from_spectrum, estimate_covariances, FieldData};
use isce2d_core::dual::DualProblem;
use isce2d_core::freq_est::{self, MonteCarloConfig, ResolutionCase};
use isce2d_core::grid::{evaluate_coeffs, fourier_coeffs, CoeffArray, HalfVector, C64};
use isce2d_core::linalg::bench_tbt;
use isce2d_core::newton::{newton_solve, HessianKind, LineSearch, NewtonOptions};
use isce2d_core::sys_id::{self, Preset, SolverKind};
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: isce2d_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix<T: Clone + nalgebra::Scalar>(rows: Vec<Vec<T>>) -> PyResult<DMatrix<T>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("expected a non-empty rectangular nested list"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j].clone()))
}

fn to_rows<T: Clone + nalgebra::Scalar>(m: &DMatrix<T>) -> Vec<Vec<T>> {
    (0..m.nrows()).map(|i| m.row(i).iter().cloned().collect()).collect()
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyDict>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))?.cast_into::<PyDict>().map_err(Into::into)
}

#[pyclass(module = "isce2d", frozen, skip_from_py_object)]
#[derive(Clone)]
struct GridSpec {
    inner: isce2d_core::grid::GridSpec,
}

#[pymethods]
impl GridSpec {
    #[new]
    fn new(n1_grid: usize, n2_grid: usize, n1: usize, n2: usize) -> PyResult<Self> {
        Ok(Self {
            inner: isce2d_core::grid::GridSpec::new(n1_grid, n2_grid, n1, n2).map_err(err)?,
        })
    }

    #[getter]
    fn dims(&self) -> [usize; 2] {
        self.inner.dims()
    }

    #[getter]
    fn orders(&self) -> [usize; 2] {
        self.inner.orders()
    }

    fn half_len(&self) -> usize {
        self.inner.half_len()
    }

    fn half_indices(&self) -> Vec<[i64; 2]> {
        self.inner.half_indices()
    }

    fn frequency(&self, l1: usize, l2: usize) -> [f64; 2] {
        self.inner.frequency(l1, l2)
    }

    fn refined(&self, factor: usize) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.refined(factor).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        let [a, b] = self.inner.dims();
        let [c, d] = self.inner.orders();
        format!("GridSpec({a}, {b}, {c}, {d})")
    }
}

fn spectrum(values: Vec<Vec<f64>>) -> PyResult<isce2d_core::grid::Spectrum> {
    Ok(isce2d_core::grid::Spectrum::new(to_matrix(values)?))
}

fn coeffs(values: Vec<Vec<C64>>) -> PyResult<CoeffArray> {
    CoeffArray::from_matrix(to_matrix(values)?).map_err(err)
}

fn half(orders: [usize; 2], q: Vec<C64>) -> PyResult<HalfVector> {
    HalfVector::from_vec(orders, DVector::from_vec(q)).map_err(err)
}

/// Biased lag estimates from field samples `[t2][t1]`.
#[pyfunction]
fn estimate_lags(samples: Vec<Vec<C64>>, grid: &GridSpec) -> PyResult<Vec<Vec<C64>>> {
    let y = FieldData::new(to_matrix(samples)?).map_err(err)?;
    Ok(to_rows(estimate_covariances(&y, &grid.inner).map_err(err)?.values()))
}

/// Exact lags of a grid function.
#[pyfunction]
fn spectrum_lags(phi: Vec<Vec<f64>>, grid: &GridSpec) -> PyResult<Vec<Vec<C64>>> {
    Ok(to_rows(covariances_from_spectrum(&spectrum(phi)?, &grid.inner).map_err(err)?.values()))
}

/// Symmetric trigonometric polynomial on the grid.
#[pyfunction]
fn evaluate(lags: Vec<Vec<C64>>, grid: &GridSpec) -> PyResult<Vec<Vec<f64>>> {
    Ok(to_rows(evaluate_coeffs(&coeffs(lags)?, &grid.inner).map_err(err)?.values()))
}

#[pyfunction]
fn fourier(phi: Vec<Vec<f64>>, grid: &GridSpec) -> PyResult<Vec<Vec<C64>>> {
    Ok(to_rows(fourier_coeffs(&spectrum(phi)?, &grid.inner).map_err(err)?.values()))
}

#[pyclass(module = "isce2d", frozen)]
struct Problem {
    inner: DualProblem,
}

#[pymethods]
impl Problem {
    /// Dual problem for lags `sigma` and prior grid values `psi`.
    #[new]
    fn new(sigma: Vec<Vec<C64>>, psi: Vec<Vec<f64>>, grid: &GridSpec) -> PyResult<Self> {
        Ok(Self {
            inner: DualProblem::new(coeffs(sigma)?, spectrum(psi)?, grid.inner).map_err(err)?,
        })
    }

    fn value(&self, q: Vec<C64>) -> PyResult<f64> {
        self.inner.dual_value(&half(self.inner.orders(), q)?).map_err(err)
    }

    fn gradient(&self, q: Vec<C64>) -> PyResult<Vec<C64>> {
        let g = self.inner.dual_gradient(&half(self.inner.orders(), q)?).map_err(err)?;
        Ok(g.values().iter().cloned().collect())
    }

    fn spectrum(&self, q: Vec<C64>) -> PyResult<Vec<Vec<f64>>> {
        let s = self.inner.primal_spectrum(&half(self.inner.orders(), q)?).map_err(err)?;
        Ok(to_rows(s.values()))
    }

    fn feasible(&self, q: Vec<C64>) -> PyResult<bool> {
        Ok(self.inner.feasible(&half(self.inner.orders(), q)?).map_err(err)?.feasible)
    }

    /// Newton's method from `q = 0`.
    #[pyo3(signature = (grad_tol = 1e-3, max_iters = 100, hessian = "full", pure = false))]
    fn solve<'py>(
        &self,
        py: Python<'py>,
        grad_tol: f64,
        max_iters: usize,
        hessian: &str,
        pure: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let opts = newton_options(grad_tol, max_iters, hessian, pure)?;
        let r = newton_solve(&self.inner, &HalfVector::zeros(self.inner.orders()), &opts).map_err(err)?;
        to_dict(py, &r)
    }
}

fn newton_options(grad_tol: f64, max_iters: usize, hessian: &str, pure: bool) -> PyResult<NewtonOptions> {
    Ok(NewtonOptions {
        grad_tol,
        max_iters,
        hessian: hessian.parse::<HessianKind>().map_err(err)?,
        line_search: if pure { LineSearch::Pure } else { LineSearch::Armijo },
        ..NewtonOptions::default()
    })
}

/// Continuation from the prior `psi0` to `psi1`.
#[pyfunction]
#[pyo3(signature = (sigma, psi0, psi1, grid, dt = 0.5, grad_tol = 1e-3))]
fn continuation<'py>(
    py: Python<'py>,
    sigma: Vec<Vec<C64>>,
    psi0: Vec<Vec<f64>>,
    psi1: Vec<Vec<f64>>,
    grid: &GridSpec,
    dt: f64,
    grad_tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let hp = HomotopyProblem::new(coeffs(sigma)?, spectrum(psi0)?, spectrum(psi1)?, grid.inner).map_err(err)?;
    let opts = ContinuationOptions {
        dt,
        newton: NewtonOptions {
            grad_tol,
            ..NewtonOptions::default()
        },
        ..ContinuationOptions::default()
    };
    to_dict(py, &continue_solve(&hp, &opts).map_err(err)?)
}

/// Model approximation of a preset system; returns the relative error and
/// convergence.
#[pyfunction]
#[pyo3(signature = (preset, n = 1, grid_size = 30, solver = "newton"))]
fn sysid<'py>(py: Python<'py>, preset: &str, n: usize, grid_size: usize, solver: &str) -> PyResult<Bound<'py, PyDict>> {
    let p: Preset = preset.parse().map_err(err)?;
    let kind: SolverKind = solver.parse().map_err(err)?;
    let g = isce2d_core::grid::GridSpec::new(grid_size, grid_size, n, n).map_err(err)?;
    let e = sys_id::approx_experiment(&sys_id::preset_model(p), n, &g, kind, &ContinuationOptions::default())
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("model", p.to_string())?;
    d.set_item("relative_error", e.relative_error)?;
    d.set_item("converged", e.converged)?;
    d.set_item("phi", to_rows(e.phi.values()))?;
    d.set_item("phi_hat", to_rows(e.phi_hat.values()))?;
    Ok(d)
}

/// Frequencies of the `nu` highest local maxima of a grid function.
#[pyfunction]
fn find_peaks(phi: Vec<Vec<f64>>, nu: usize) -> PyResult<Vec<[f64; 2]>> {
    freq_est::find_peaks(&spectrum(phi)?, nu).map_err(err)
}

#[pyfunction]
fn frequency_error(theta_hat: Vec<[f64; 2]>, theta_true: Vec<[f64; 2]>) -> PyResult<f64> {
    freq_est::frequency_error(&theta_hat, &theta_true).map_err(err)
}

/// Monte-Carlo trials at the default setting, or one resolution case
/// (`"A"`, `"B"`, `"C"`) when `case` is given.
#[pyfunction]
#[pyo3(signature = (trials, seed, case = None))]
fn monte_carlo<'py>(py: Python<'py>, trials: usize, seed: u64, case: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = match case {
        Some(c) => c.parse::<ResolutionCase>().map_err(err)?.config(),
        None => MonteCarloConfig::default(),
    };
    let results = py.detach(|| freq_est::run_monte_carlo(&cfg, trials, seed)).map_err(err)?;
    let s = serde_json::to_string(&results).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

/// Mean structured and dense solve times per size.
#[pyfunction]
#[pyo3(name = "bench", signature = (sizes, trials = 1, seed = 0))]
fn bench_sizes<'py>(py: Python<'py>, sizes: Vec<usize>, trials: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let records = py.detach(|| bench_tbt(&sizes, trials, seed)).map_err(err)?;
    let s = serde_json::to_string(&records).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

#[pymodule(name = "isce2d")]
fn isce2d(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<GridSpec>()?;
    m.add_class::<Problem>()?;
    m.add_function(wrap_pyfunction!(estimate_lags, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_lags, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(fourier, m)?)?;
    m.add_function(wrap_pyfunction!(continuation, m)?)?;
    m.add_function(wrap_pyfunction!(sysid, m)?)?;
    m.add_function(wrap_pyfunction!(find_peaks, m)?)?;
    m.add_function(wrap_pyfunction!(frequency_error, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(bench_sizes, m)?)?;
    Ok(())
}
