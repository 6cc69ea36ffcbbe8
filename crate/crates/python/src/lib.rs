use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use szilard_core::collision::{run_thermalization, run_work_extraction, ThermalizationConfig, WorkCollisionConfig};
use szilard_core::engine::{self, gibbs_state};
use szilard_core::game::{self, DemonStrategy, GameConfig, GameMode};
use szilard_core::lhs::{self, HiddenStateEnsemble, Member, SearchConfig};
use szilard_core::{BlochVector, EngineParams};

fn py_err(e: szilard_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(mode: &str) -> PyResult<GameMode> {
    match mode {
        "analytic" => Ok(GameMode::Analytic),
        "sampled" => Ok(GameMode::Sampled),
        other => Err(PyValueError::new_err(format!("unknown mode `{other}`; use analytic or sampled"))),
    }
}

#[pyfunction]
fn classical_bound(eta: f64) -> PyResult<f64> {
    engine::check_eta(eta).map_err(py_err)?;
    Ok(engine::classical_bound(eta))
}

#[pyfunction]
#[pyo3(signature = (eta, q=1.0))]
fn quantum_work(eta: f64, q: f64) -> PyResult<f64> {
    EngineParams::new(eta, q).map_err(py_err)?;
    Ok(engine::quantum_work(eta, q))
}

#[pyfunction]
fn violation_threshold_eta() -> f64 {
    engine::violation_threshold_eta()
}

/// Smallest `q` that beats the classical bound, or `None` if none does.
#[pyfunction]
fn violation_boundary_q(eta: f64) -> PyResult<Option<f64>> {
    engine::check_eta(eta).map_err(py_err)?;
    Ok(engine::violation_boundary_q(eta))
}

#[pyfunction]
fn eta_from_beta(beta: f64) -> PyResult<f64> {
    engine::eta_from_beta(beta).map_err(py_err)
}

/// Local hidden-state ensemble: weighted Bloch vectors averaging to `(0, 0, η)`.
#[pyclass(name = "Ensemble", frozen, from_py_object)]
#[derive(Clone)]
struct PyEnsemble {
    inner: HiddenStateEnsemble,
}

#[pymethods]
impl PyEnsemble {
    /// `members` is a list of `(p, x, y, z)`.
    #[new]
    fn new(eta: f64, members: Vec<(f64, f64, f64, f64)>) -> PyResult<Self> {
        let members = members.into_iter().map(|(p, x, y, z)| Member { p, x, y, z }).collect();
        let inner = HiddenStateEnsemble::new(eta, members).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn saturating(eta: f64) -> PyResult<Self> {
        Ok(Self { inner: lhs::saturating_ensemble(eta).map_err(py_err)? })
    }

    #[staticmethod]
    fn energy_eigenstates(eta: f64) -> PyResult<Self> {
        Ok(Self { inner: lhs::energy_eigenstate_ensemble(eta).map_err(py_err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (eta, n, seed=0))]
    fn random(eta: f64, n: usize, seed: u64) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self { inner: lhs::random_ensemble(eta, n, &mut rng).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        let inner = HiddenStateEnsemble::from_json(s).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta()
    }

    #[getter]
    fn members(&self) -> Vec<(f64, f64, f64, f64)> {
        self.inner.members().iter().map(|m| (m.p, m.x, m.y, m.z)).collect()
    }

    /// Alice's best `(W_z, W_x)` with full knowledge of the hidden state.
    fn component_works(&self) -> (f64, f64) {
        lhs::alice_component_works(&self.inner)
    }

    #[pyo3(signature = (c=None))]
    fn optimal_work(&self, c: Option<f64>) -> f64 {
        let c = c.unwrap_or_else(|| engine::default_ratio(self.inner.eta()));
        lhs::alice_optimal_work(&self.inner, c)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Ensemble(eta={}, members={})", self.inner.eta(), self.inner.len())
    }
}

#[pyclass(name = "GameSummary", frozen, get_all)]
struct PyGameSummary {
    eta: f64,
    q: Option<f64>,
    c: f64,
    n_red: usize,
    n_blue: usize,
    mean_work: f64,
    std_error: f64,
    red_mean: f64,
    blue_mean: f64,
    ratio_weighted_work: f64,
    allocation_bias_bound: f64,
    bound: f64,
    violation: bool,
    verdict_void: bool,
    json: String,
}

#[pymethods]
impl PyGameSummary {
    fn __repr__(&self) -> String {
        format!(
            "GameSummary(eta={}, mean_work={}, std_error={}, bound={}, violation={})",
            self.eta, self.mean_work, self.std_error, self.bound, self.violation
        )
    }
}

/// Plays the game with a quantum demon, or with `ensemble` as a classical one.
#[pyfunction]
#[pyo3(signature = (eta, q=1.0, cells=100_000, mode="analytic", seed=0, ensemble=None, c=None))]
fn run_game(
    eta: f64,
    q: f64,
    cells: usize,
    mode: &str,
    seed: u64,
    ensemble: Option<PyEnsemble>,
    c: Option<f64>,
) -> PyResult<PyGameSummary> {
    let mut params = EngineParams::new(eta, q).map_err(py_err)?;
    if let Some(c) = c {
        params = params.with_ratio(c).map_err(py_err)?;
    }
    let strategy = match ensemble {
        Some(e) => DemonStrategy::ClassicalLhs(e.inner),
        None => DemonStrategy::Quantum { q },
    };
    let cfg = GameConfig::new(params, cells, strategy, parse_mode(mode)?, seed).map_err(py_err)?;
    let s = game::run_game(&cfg).map_err(py_err)?;
    Ok(PyGameSummary {
        eta: s.eta,
        q: s.q,
        c: s.c,
        n_red: s.n_red,
        n_blue: s.n_blue,
        mean_work: s.mean_work,
        std_error: s.std_error,
        red_mean: s.red_mean,
        blue_mean: s.blue_mean,
        ratio_weighted_work: s.ratio_weighted_work,
        allocation_bias_bound: s.allocation_bias_bound,
        bound: s.bound,
        violation: s.violation,
        verdict_void: s.verdict_void,
        json: s.to_json(),
    })
}

/// Returns `(max_work_found, best_ensemble, evaluations)`.
#[pyfunction]
#[pyo3(signature = (eta, budget=10_000, seed=0, workers=8))]
fn lhs_search(py: Python<'_>, eta: f64, budget: usize, seed: u64, workers: usize) -> PyResult<(f64, PyEnsemble, usize)> {
    let cfg = SearchConfig { workers, ..SearchConfig::new(budget, seed) };
    let r = py.detach(|| lhs::search_max_classical_work(eta, &cfg)).map_err(py_err)?;
    Ok((r.value, PyEnsemble { inner: r.best }, r.evaluations))
}

/// Rotates `bloch` through `phi` with `steps` ancilla collisions. Returns
/// `(total_mean_work, system_energy_drop, final_bloch)`.
#[pyfunction]
#[pyo3(signature = (bloch=(0.0, 0.0, 1.0), phi=std::f64::consts::PI, steps=10_000))]
fn collide_work(bloch: (f64, f64, f64), phi: f64, steps: usize) -> PyResult<(f64, f64, (f64, f64, f64))> {
    let rho = BlochVector::new(bloch.0, bloch.1, bloch.2).map_err(py_err)?.to_density();
    let cfg = WorkCollisionConfig::new(phi, steps).map_err(py_err)?;
    let run = run_work_extraction(&rho, &cfg).map_err(py_err)?;
    let r = run.final_state.bloch().map_err(py_err)?;
    Ok((run.total_mean_work, run.system_energy_drop, (r.x, r.y, r.z)))
}

/// Thermalizes the product of Gibbs marginals toward the entangled fixed
/// point. Returns `(converged_at, trace_distances)`.
#[pyfunction]
#[pyo3(signature = (eta, theta=0.1, steps=10_000, tol=1e-6))]
fn thermalize(eta: f64, theta: f64, steps: usize, tol: f64) -> PyResult<(Option<usize>, Vec<f64>)> {
    let cfg = ThermalizationConfig::new(eta, theta, steps).map_err(py_err)?;
    let g = gibbs_state(eta).map_err(py_err)?;
    let rho0 = g.tensor(&g).map_err(py_err)?;
    let run = run_thermalization(&rho0, &cfg, tol).map_err(py_err)?;
    Ok((run.converged_at, run.trajectory.iter().map(|s| s.trace_distance).collect()))
}

#[pymodule]
fn szilard_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyGameSummary>()?;
    m.add_function(wrap_pyfunction!(classical_bound, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_work, m)?)?;
    m.add_function(wrap_pyfunction!(violation_threshold_eta, m)?)?;
    m.add_function(wrap_pyfunction!(violation_boundary_q, m)?)?;
    m.add_function(wrap_pyfunction!(eta_from_beta, m)?)?;
    m.add_function(wrap_pyfunction!(run_game, m)?)?;
    m.add_function(wrap_pyfunction!(lhs_search, m)?)?;
    m.add_function(wrap_pyfunction!(collide_work, m)?)?;
    m.add_function(wrap_pyfunction!(thermalize, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_parse() {
        assert_eq!(parse_mode("analytic").unwrap(), GameMode::Analytic);
        assert_eq!(parse_mode("sampled").unwrap(), GameMode::Sampled);
        assert!(parse_mode("exact").is_err());
    }
}
