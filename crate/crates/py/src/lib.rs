//! Python bindings: the main types and operations of the recursion engines.
//!
//! Exact rationals cross the boundary as `p/q` strings; polynomials as the
//! JSON schema or LaTeX in the monomial-symmetric basis.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use ribbonrec_core::fnflip::{self, FnPoint04, FnPoint11};
use ribbonrec_core::pants;
use ribbonrec_core::poly::{render_symmetric, sym_terms_to_latex};
use ribbonrec_core::rational::{parse_rat, rat_to_f64, rat_to_string};
use ribbonrec_core::ribbon;
use ribbonrec_core::stablegraphs;
use ribbonrec_core::table1;
use ribbonrec_core::trengine;
use ribbonrec_core::{curves, Metric, Rat};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_metric(graph: &ribbon::RibbonGraph, lengths: Vec<String>) -> PyResult<Metric> {
    if lengths.len() != graph.n_edges() {
        return Err(PyValueError::new_err(format!(
            "expected {} edge lengths, got {}",
            graph.n_edges(),
            lengths.len()
        )));
    }
    let lengths: Result<Vec<Rat>, _> = lengths.iter().map(|s| parse_rat(s)).collect();
    Metric::new(lengths.map_err(value_err)?).map_err(value_err)
}

/// A labelled metric-less ribbon graph.
#[pyclass(name = "RibbonGraph")]
struct PyRibbonGraph {
    inner: ribbon::RibbonGraph,
}

#[pymethods]
impl PyRibbonGraph {
    /// Builds a graph from its JSON description.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(value_err)?;
        Ok(PyRibbonGraph {
            inner: ribbon::RibbonGraph::from_json(&value).map_err(value_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn genus(&self) -> usize {
        self.inner.genus()
    }

    #[getter]
    fn boundaries(&self) -> usize {
        self.inner.n_boundaries()
    }

    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.n_edges()
    }

    #[getter]
    fn aut_order(&self) -> u64 {
        self.inner.aut_order()
    }

    fn is_trivalent(&self) -> bool {
        self.inner.is_trivalent()
    }

    /// Perimeters of the labelled boundaries as `p/q` strings.
    fn perimeters(&self, lengths: Vec<String>) -> PyResult<Vec<String>> {
        let metric = parse_metric(&self.inner, lengths)?;
        Ok(self
            .inner
            .perimeters(&metric)
            .iter()
            .map(rat_to_string)
            .collect())
    }

    /// The Mirzakhani-McShane sum on boundary 1 (must be `1`).
    fn mcshane(&self, lengths: Vec<String>) -> PyResult<String> {
        let metric = parse_metric(&self.inner, lengths)?;
        let total = pants::mcshane_check(&self.inner, &metric).map_err(value_err)?;
        Ok(rat_to_string(&total))
    }

    /// Number of multicurves of length at most `t`.
    fn count_multicurves(&self, lengths: Vec<String>, t: &str) -> PyResult<u64> {
        let metric = parse_metric(&self.inner, lengths)?;
        let t = parse_rat(t).map_err(value_err)?;
        curves::count_multicurves(&self.inner, &metric, &t).map_err(value_err)
    }

    /// Automorphism-weighted number of positive integer metrics with the
    /// given perimeters, as a `p/q` string.
    fn integer_metric_count(&self, boundary: Vec<i64>) -> PyResult<String> {
        if boundary.len() != self.inner.n_boundaries() {
            return Err(PyValueError::new_err("boundary arity mismatch"));
        }
        let solutions = ribbon::count_integer_solutions(&self.inner, &boundary);
        let weighted = Rat::new(solutions.into(), self.inner.aut_order().into());
        Ok(rat_to_string(&weighted))
    }
}

/// All labelled trivalent ribbon graph classes of type `(g, n)`.
#[pyfunction]
fn enumerate_trivalent(
    py: Python<'_>,
    genus: usize,
    boundaries: usize,
) -> PyResult<Vec<Py<PyRibbonGraph>>> {
    let list = ribbon::enumerate_trivalent(genus, boundaries).map_err(value_err)?;
    list.into_iter()
        .map(|(graph, _)| Py::new(py, PyRibbonGraph { inner: graph }))
        .collect()
}

/// Kontsevich volume polynomial in the monomial-symmetric basis (LaTeX).
#[pyfunction]
fn vk_latex(genus: usize, boundaries: usize) -> PyResult<String> {
    let p = trengine::vk(genus, boundaries).map_err(value_err)?;
    let terms = render_symmetric(&p, boundaries).map_err(value_err)?;
    Ok(sym_terms_to_latex(&terms))
}

/// Kontsevich volume polynomial as JSON.
#[pyfunction]
fn vk_json(genus: usize, boundaries: usize) -> PyResult<String> {
    Ok(trengine::vk(genus, boundaries)
        .map_err(value_err)?
        .to_json()
        .to_string())
}

/// Average multicurve-count polynomial `VN_{g,n}(L; t)` (LaTeX).
#[pyfunction]
fn vn_latex(genus: usize, boundaries: usize) -> PyResult<String> {
    let (_, vn) = trengine::twisted_vn(genus, boundaries).map_err(value_err)?;
    let terms = render_symmetric(&vn, boundaries).map_err(value_err)?;
    Ok(sym_terms_to_latex(&terms))
}

/// One-parameter Masur-Veech polynomial as JSON.
#[pyfunction]
fn mv_poly_json(genus: usize, boundaries: usize) -> PyResult<String> {
    let (mv, _) = trengine::twisted_vn(genus, boundaries).map_err(value_err)?;
    Ok(mv.to_json().to_string())
}

/// Masur-Veech volume as `(rational multiple of pi^(6g-6+2n), float)`;
/// computed through two independent routes that must agree.
#[pyfunction]
fn mv_volume(genus: usize, boundaries: usize) -> PyResult<(String, f64)> {
    let p = stablegraphs::mv_volume(genus, boundaries)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let coeff = p
        .terms()
        .next()
        .map(|(_, c)| rat_to_string(c))
        .unwrap_or_else(|| "0".to_string());
    Ok((coeff, stablegraphs::pisq_poly_to_f64(&p)))
}

/// Lattice point count `N_{g,n}(L)` as a `p/q` string.
#[pyfunction]
fn lattice_count(genus: usize, boundaries: usize, lengths: Vec<i64>) -> PyResult<String> {
    let count = trengine::discrete_n(genus, boundaries, &lengths).map_err(value_err)?;
    Ok(rat_to_string(&count))
}

/// Number of stable graphs of type `(g, n)`.
#[pyfunction]
fn stable_graph_count(genus: usize, boundaries: usize) -> PyResult<usize> {
    Ok(stablegraphs::enumerate_stable_graphs(genus, boundaries)
        .map_err(value_err)?
        .len())
}

/// Combinatorial Fenchel-Nielsen flip; `surface` is `"0,4"` or `"1,1"`.
/// Returns `(ell', tau')` as `p/q` strings.
#[pyfunction]
fn comb_flip(
    surface: &str,
    lengths: Vec<String>,
    ell: &str,
    tau: &str,
) -> PyResult<(String, String)> {
    let lengths: Result<Vec<Rat>, _> = lengths.iter().map(|s| parse_rat(s)).collect();
    let lengths = lengths.map_err(value_err)?;
    let ell = parse_rat(ell).map_err(value_err)?;
    let tau = parse_rat(tau).map_err(value_err)?;
    let (lp, tp) = match surface {
        "0,4" => {
            if lengths.len() != 4 {
                return Err(PyValueError::new_err("need 4 boundary lengths"));
            }
            let p = FnPoint04 {
                boundary: [
                    lengths[0].clone(),
                    lengths[1].clone(),
                    lengths[2].clone(),
                    lengths[3].clone(),
                ],
                ell,
                tau,
            };
            fnflip::comb_flip_04(&p).map_err(value_err)?
        }
        "1,1" => {
            if lengths.len() != 1 {
                return Err(PyValueError::new_err("need 1 boundary length"));
            }
            let p = FnPoint11 {
                boundary: lengths[0].clone(),
                ell,
                tau,
            };
            fnflip::comb_flip_11(&p).map_err(value_err)?
        }
        other => return Err(PyValueError::new_err(format!("unknown surface {other:?}"))),
    };
    Ok((rat_to_string(&lp), rat_to_string(&tp)))
}

/// Hyperbolic flip at inputs scaled by `beta`; returns raw `(ell', tau')`.
#[pyfunction]
fn hyp_flip(
    surface: &str,
    lengths: Vec<String>,
    ell: &str,
    tau: &str,
    beta: u32,
) -> PyResult<(f64, f64)> {
    let lengths: Result<Vec<Rat>, _> = lengths.iter().map(|s| parse_rat(s)).collect();
    let lengths = lengths.map_err(value_err)?;
    let ell = parse_rat(ell).map_err(value_err)?;
    let tau = parse_rat(tau).map_err(value_err)?;
    match surface {
        "0,4" => {
            let p = FnPoint04 {
                boundary: [
                    lengths[0].clone(),
                    lengths[1].clone(),
                    lengths[2].clone(),
                    lengths[3].clone(),
                ],
                ell,
                tau,
            };
            fnflip::hyp_flip_04(&p, beta).map_err(|e| PyRuntimeError::new_err(e.to_string()))
        }
        "1,1" => {
            let p = FnPoint11 {
                boundary: lengths[0].clone(),
                ell,
                tau,
            };
            fnflip::hyp_flip_11(&p, beta).map_err(|e| PyRuntimeError::new_err(e.to_string()))
        }
        other => Err(PyValueError::new_err(format!("unknown surface {other:?}"))),
    }
}

/// Monte-Carlo moduli integral; observable is the multicurve count at `t`,
/// or the constant 1 when `t` is `None`. Returns `(value, stderr, exact)`.
#[pyfunction]
#[pyo3(signature = (surface, lengths, t=None, samples=100_000, seed=1))]
fn mc_average(
    surface: &str,
    lengths: Vec<String>,
    t: Option<f64>,
    samples: u64,
    seed: u64,
) -> PyResult<(f64, f64, bool)> {
    let (g, n) = match surface {
        "1,1" => (1, 1),
        "0,4" => (0, 4),
        other => {
            return Err(PyValueError::new_err(format!(
                "unsupported surface {other:?}"
            )))
        }
    };
    let lengths: Result<Vec<Rat>, _> = lengths.iter().map(|s| parse_rat(s)).collect();
    let lengths = lengths.map_err(value_err)?;
    let obs = match t {
        Some(t) => trengine::Observable::MulticurveCount(t),
        None => trengine::Observable::One,
    };
    let est = trengine::mc_average(g, n, &lengths, obs, samples, seed).map_err(value_err)?;
    Ok((est.value, est.stderr, est.exact))
}

/// Evaluates a boundary length times the flow noise comparison helper.
#[pyfunction]
fn eval_vk(genus: usize, boundaries: usize, lengths: Vec<String>) -> PyResult<String> {
    let p = trengine::vk(genus, boundaries).map_err(value_err)?;
    let lengths: Result<Vec<Rat>, _> = lengths.iter().map(|s| parse_rat(s)).collect();
    let lengths = lengths.map_err(value_err)?;
    Ok(rat_to_string(&trengine::eval_vk(&p, &lengths)))
}

/// Evaluates `VN_{g,n}(L; t)` as a float.
#[pyfunction]
fn eval_vn(genus: usize, boundaries: usize, lengths: Vec<f64>, t: f64) -> PyResult<f64> {
    let (_, vn) = trengine::twisted_vn(genus, boundaries).map_err(value_err)?;
    Ok(trengine::eval_vn_f64(&vn, &lengths, t))
}

/// Verifies every row of the embedded reference table; true when all match.
#[pyfunction]
fn table1_verify() -> PyResult<bool> {
    let rows = table1::verify_all().map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(rows.iter().all(|r| r.pass))
}

/// Exact zeta(2k) coefficient: the rational `q` with `zeta(2k) = q pi^{2k}`.
#[pyfunction]
fn zeta_even(k: u32) -> PyResult<String> {
    if k == 0 {
        return Err(PyValueError::new_err("k must be at least 1"));
    }
    Ok(rat_to_string(&ribbonrec_core::zeta::zeta_even_coeff(k)))
}

/// Float value of a `p/q` string, for convenience on the Python side.
#[pyfunction]
fn rat_to_float(value: &str) -> PyResult<f64> {
    Ok(rat_to_f64(&parse_rat(value).map_err(value_err)?))
}

#[pymodule]
fn ribbonrec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRibbonGraph>()?;
    m.add_function(wrap_pyfunction!(enumerate_trivalent, m)?)?;
    m.add_function(wrap_pyfunction!(vk_latex, m)?)?;
    m.add_function(wrap_pyfunction!(vk_json, m)?)?;
    m.add_function(wrap_pyfunction!(vn_latex, m)?)?;
    m.add_function(wrap_pyfunction!(mv_poly_json, m)?)?;
    m.add_function(wrap_pyfunction!(mv_volume, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_count, m)?)?;
    m.add_function(wrap_pyfunction!(stable_graph_count, m)?)?;
    m.add_function(wrap_pyfunction!(comb_flip, m)?)?;
    m.add_function(wrap_pyfunction!(hyp_flip, m)?)?;
    m.add_function(wrap_pyfunction!(mc_average, m)?)?;
    m.add_function(wrap_pyfunction!(eval_vk, m)?)?;
    m.add_function(wrap_pyfunction!(eval_vn, m)?)?;
    m.add_function(wrap_pyfunction!(table1_verify, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_even, m)?)?;
    m.add_function(wrap_pyfunction!(rat_to_float, m)?)?;
    Ok(())
}
