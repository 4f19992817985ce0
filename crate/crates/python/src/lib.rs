//! Python bindings. Signals are lists of `complex`, intensities lists of `float`.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use phaseret::bench::{self, BenchConfig, Method};
use phaseret::cli::{run_suite, Suite};
use phaseret::sdp::SdpConfig;
use phaseret::{certificates, Complex64, ComplexVector, EnsembleKind, IntensityVector, Rng};

fn to_py(e: phaseret::Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn kind(name: &str) -> PyResult<EnsembleKind> {
    name.parse().map_err(to_py)
}

fn vector(x: Vec<Complex64>) -> PyResult<ComplexVector> {
    ComplexVector::new(x).map_err(to_py)
}

#[pyclass(name = "Ensemble", frozen)]
struct PyEnsemble(phaseret::Ensemble);

#[pymethods]
impl PyEnsemble {
    /// Deterministic ensemble of kind "phi" or "psi" for dimension `n`.
    #[new]
    fn new(kind_name: &str, n: usize) -> PyResult<Self> {
        Ok(Self(phaseret::Ensemble::build(kind(kind_name)?, n).map_err(to_py)?))
    }

    /// `l` i.i.d. complex Gaussian vectors.
    #[staticmethod]
    #[pyo3(signature = (n, l, seed=0))]
    fn random(n: usize, l: usize, seed: u64) -> PyResult<Self> {
        Ok(Self(phaseret::Ensemble::random(&mut Rng::new(seed, 0), n, l).map_err(to_py)?))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn vectors(&self) -> Vec<Vec<Complex64>> {
        self.0.vectors().iter().map(|v| v.as_slice().to_vec()).collect()
    }

    fn measure(&self, x: Vec<Complex64>) -> PyResult<Vec<f64>> {
        Ok(self.0.measure(&vector(x)?).map_err(to_py)?.into_values())
    }

    fn __repr__(&self) -> String {
        format!("Ensemble(kind='{}', dim={}, len={})", self.0.kind(), self.0.dim(), self.0.len())
    }
}

#[pyclass(name = "RecoveryReport", frozen, get_all)]
struct PyRecoveryReport {
    x_hat: Vec<Complex64>,
    degenerate_count: usize,
    broken: Vec<usize>,
}

#[pyclass(name = "SdpResult", frozen, get_all)]
struct PySdpResult {
    x_hat: Vec<Complex64>,
    iterations: usize,
    residual: f64,
    converged: bool,
    rank1_gap: f64,
}

/// Adds Gaussian noise of variance `noise_var` to each intensity.
#[pyfunction]
#[pyo3(signature = (b, noise_var, seed=0))]
fn add_noise(b: Vec<f64>, noise_var: f64, seed: u64) -> PyResult<Vec<f64>> {
    let out = phaseret::add_noise(&IntensityVector::new(b), noise_var, &mut Rng::new(seed, 1)).map_err(to_py)?;
    Ok(out.into_values())
}

/// Block-wise algebraic recovery from `4(n-1)` intensities.
#[pyfunction]
fn recover(kind_name: &str, b: Vec<f64>, n: usize) -> PyResult<PyRecoveryReport> {
    let r = phaseret::recover(kind(kind_name)?, &IntensityVector::new(b), n).map_err(to_py)?;
    Ok(PyRecoveryReport { x_hat: r.x_hat.into_vec(), degenerate_count: r.degenerate_count, broken: r.broken })
}

/// Lifted convex recovery. Releases the GIL while iterating.
#[pyfunction]
#[pyo3(signature = (ensemble, b, max_iter=5000, tol=1e-7, epsilon=0.0))]
fn solve_phaselift(
    py: Python<'_>,
    ensemble: &PyEnsemble,
    b: Vec<f64>,
    max_iter: usize,
    tol: f64,
    epsilon: f64,
) -> PyResult<PySdpResult> {
    let cfg = SdpConfig { max_iter, tol, epsilon, ..SdpConfig::default() };
    let b = IntensityVector::new(b);
    let r = py.detach(|| phaseret::sdp::solve_phaselift(&ensemble.0, &b, &cfg)).map_err(to_py)?;
    Ok(PySdpResult {
        x_hat: r.x_hat.into_vec(),
        iterations: r.iterations,
        residual: r.residual,
        converged: r.converged,
        rank1_gap: r.rank1_gap,
    })
}

/// `min_c ||x - c y||^2` over unit-modulus `c`.
#[pyfunction]
fn aligned_error(x: Vec<Complex64>, y: Vec<Complex64>) -> PyResult<f64> {
    phaseret::aligned_error(&vector(x)?, &vector(y)?).map_err(to_py)
}

/// Intensities of the DFT mask realization.
#[pyfunction]
fn mask_measure(kind_name: &str, x: Vec<Complex64>) -> PyResult<Vec<f64>> {
    let x = vector(x)?;
    let set = phaseret::build_masks(kind(kind_name)?, x.len()).map_err(to_py)?;
    Ok(phaseret::mask_measure(&x, &set).map_err(to_py)?.into_values())
}

/// Recovers `x` from mask intensities.
#[pyfunction]
fn recover_masked(kind_name: &str, b: Vec<f64>, n: usize) -> PyResult<Vec<Complex64>> {
    let set = phaseret::build_masks(kind(kind_name)?, n).map_err(to_py)?;
    let r = phaseret::recover_masked(&IntensityVector::new(b), &set).map_err(to_py)?;
    Ok(r.x_hat.into_vec())
}

/// Spectrum (descending) of the dual certificate for `x`.
#[pyfunction]
fn certificate_spectrum(kind_name: &str, x: Vec<Complex64>) -> PyResult<Vec<f64>> {
    let c = certificates::build_certificate(kind(kind_name)?, &vector(x)?).map_err(to_py)?;
    Ok(c.spectrum)
}

/// Returns `(high, low, threshold_db, crossing_db)`.
#[pyfunction]
#[pyo3(signature = (snr, sigma_x2=1.0, mu=1.0, gamma=0.5))]
fn bound_psi(snr: f64, sigma_x2: f64, mu: f64, gamma: f64) -> (f64, f64, f64, f64) {
    let b = bench::bound_psi(snr, sigma_x2, mu, gamma);
    (b.high, b.low, b.threshold_db, b.crossing_db)
}

#[pyfunction]
#[pyo3(signature = (snr, n, mu=1.0, gamma=0.5))]
fn bound_phi(snr: f64, n: usize, mu: f64, gamma: f64) -> f64 {
    bench::bound_phi(snr, n, mu, gamma)
}

/// Monte Carlo sweep; returns the CSV text.
#[pyfunction]
#[pyo3(signature = (kind_name, n, snr_db, trials=1000, method="algebraic", l=None, fix_first=false, sigma_x2=1.0, seed=0, jobs=0))]
#[allow(clippy::too_many_arguments)]
fn run_bench(
    py: Python<'_>,
    kind_name: &str,
    n: usize,
    snr_db: Vec<f64>,
    trials: usize,
    method: &str,
    l: Option<usize>,
    fix_first: bool,
    sigma_x2: f64,
    seed: u64,
    jobs: usize,
) -> PyResult<String> {
    let method: Method = method.parse().map_err(to_py)?;
    let cfg = BenchConfig {
        l,
        snr_grid_db: snr_db,
        trials,
        fix_first,
        sigma_x2,
        seed,
        jobs,
        ..BenchConfig::new(kind(kind_name)?, method, n)
    };
    let r = py.detach(|| bench::run_bench(&cfg)).map_err(to_py)?;
    Ok(r.to_csv())
}

/// Runs a verification suite; returns `(passed, check, params, metric)` tuples.
#[pyfunction]
#[pyo3(signature = (suite, kind_name="phi", n=8, trials=20, seed=0))]
fn verify(
    suite: &str,
    kind_name: &str,
    n: usize,
    trials: usize,
    seed: u64,
) -> PyResult<Vec<(bool, String, String, f64)>> {
    let suite: Suite = suite.parse().map_err(to_py)?;
    let checks = run_suite(suite, kind(kind_name)?, n, trials, seed).map_err(to_py)?;
    Ok(checks.into_iter().map(|c| (c.pass, c.name, c.params, c.metric)).collect())
}

#[pymodule]
fn phaseret_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyRecoveryReport>()?;
    m.add_class::<PySdpResult>()?;
    m.add_function(wrap_pyfunction!(add_noise, m)?)?;
    m.add_function(wrap_pyfunction!(recover, m)?)?;
    m.add_function(wrap_pyfunction!(solve_phaselift, m)?)?;
    m.add_function(wrap_pyfunction!(aligned_error, m)?)?;
    m.add_function(wrap_pyfunction!(mask_measure, m)?)?;
    m.add_function(wrap_pyfunction!(recover_masked, m)?)?;
    m.add_function(wrap_pyfunction!(certificate_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(bound_psi, m)?)?;
    m.add_function(wrap_pyfunction!(bound_phi, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
