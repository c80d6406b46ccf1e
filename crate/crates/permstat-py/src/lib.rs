//! Python bindings: permutations, statistics, the forward and inverse maps,
//! distributions, checks and diagrams.

use std::collections::BTreeMap;

use permstat::distribution::{joint_distribution_jobs, verify_identity_jobs};
use permstat::forward::capacities;
use permstat::render::diagram;
use permstat::stats::{Stat, StatVector};
use permstat::verify::Check;
use permstat::{DiagramKind, Error, Format, Permutation};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Validation(_) | Error::UnknownToken { .. } | Error::Capacity { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A permutation of `1..=n` in one-line notation.
#[pyclass(name = "Permutation", module = "permstat", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyPermutation {
    inner: Permutation,
}

#[pymethods]
impl PyPermutation {
    #[new]
    fn new(word: Vec<usize>) -> PyResult<Self> {
        Ok(PyPermutation { inner: Permutation::new(word).map_err(py_err)? })
    }

    /// Digit form (n <= 9) or comma-separated values.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyPermutation { inner: text.parse().map_err(py_err)? })
    }

    #[getter]
    fn word(&self) -> Vec<usize> {
        self.inner.word().to_vec()
    }

    fn inverse(&self) -> Self {
        PyPermutation { inner: self.inner.inverse() }
    }

    /// Value of a named statistic (`des`, `maj2`, `des2t`, ...).
    fn stat(&self, name: &str) -> PyResult<usize> {
        let s: Stat = name.parse().map_err(py_err)?;
        Ok(s.eval(&self.inner))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __getitem__(&self, i: usize) -> PyResult<usize> {
        self.inner
            .word()
            .get(i)
            .copied()
            .ok_or_else(|| pyo3::exceptions::PyIndexError::new_err("position out of range"))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Permutation({:?})", self.inner.word())
    }
}

/// Accepts a `Permutation`, a string or a list of integers.
fn perm_arg(obj: &Bound<'_, PyAny>) -> PyResult<Permutation> {
    if let Ok(p) = obj.extract::<PyRef<'_, PyPermutation>>() {
        return Ok(p.inner.clone());
    }
    if let Ok(s) = obj.extract::<String>() {
        return s.parse().map_err(py_err);
    }
    let word: Vec<usize> = obj.extract()?;
    Permutation::new(word).map_err(py_err)
}

fn wrap(inner: Permutation) -> PyPermutation {
    PyPermutation { inner }
}

#[pyfunction]
fn parse_permutation(text: &str) -> PyResult<PyPermutation> {
    PyPermutation::parse(text)
}

/// The forward map.
#[pyfunction]
fn phi(p: &Bound<'_, PyAny>) -> PyResult<PyPermutation> {
    permstat::phi(&perm_arg(p)?).map(wrap).map_err(py_err)
}

/// The inverse map; raises when no preimage is found.
#[pyfunction]
fn phi_inverse(t: &Bound<'_, PyAny>) -> PyResult<PyPermutation> {
    permstat::phi_inverse(&perm_arg(t)?).map(wrap).map_err(py_err)
}

/// Forward-map trace as a JSON string.
#[pyfunction]
fn phi_trace(p: &Bound<'_, PyAny>) -> PyResult<String> {
    let tr = permstat::phi_trace(&perm_arg(p)?).map_err(py_err)?;
    serde_json::to_string(&tr).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Inverse-map trace as a JSON string.
#[pyfunction]
fn phi_inverse_trace(t: &Bound<'_, PyAny>) -> PyResult<String> {
    let tr = permstat::phi_inverse_trace(&perm_arg(t)?).map_err(py_err)?;
    serde_json::to_string(&tr).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// `(x, y, z)` under `lhs`, `rhs` or `hl`.
#[pyfunction]
fn stat_vector(p: &Bound<'_, PyAny>, vector: &str) -> PyResult<(usize, usize, usize)> {
    let v: StatVector = vector.parse().map_err(py_err)?;
    Ok(permstat::stat_vector(&perm_arg(p)?, v).as_tuple())
}

/// Capacity sequence `(c_k)` of the forward map.
#[pyfunction]
fn capacity_sequence(p: &Bound<'_, PyAny>) -> PyResult<Vec<usize>> {
    Ok(capacities(&perm_arg(p)?).map_err(py_err)?.values)
}

/// `{(a, b, c): count}` over `S_n`.
#[pyfunction]
#[pyo3(signature = (n, vector, jobs = 1))]
fn joint_distribution(n: usize, vector: &str, jobs: usize) -> PyResult<BTreeMap<(usize, usize, usize), u64>> {
    let v: StatVector = vector.parse().map_err(py_err)?;
    let table = joint_distribution_jobs(n, v, jobs)
        .and_then(|p| p.to_table(n, v))
        .map_err(py_err)?;
    Ok(table
        .terms
        .into_iter()
        .map(|[a, b, c, k]| ((a as usize, b as usize, c as usize), k))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (n, lhs, rhs, jobs = 1))]
fn verify_identity(n: usize, lhs: &str, rhs: &str, jobs: usize) -> PyResult<bool> {
    let a: StatVector = lhs.parse().map_err(py_err)?;
    let b: StatVector = rhs.parse().map_err(py_err)?;
    Ok(verify_identity_jobs(n, a, b, jobs).map_err(py_err)?.equal)
}

/// One exhaustive check; returns a dict with `pass`, `detail` and
/// optionally `counterexample`.
#[pyfunction]
#[pyo3(signature = (n, check, jobs = 1))]
fn run_check<'py>(py: Python<'py>, n: usize, check: &str, jobs: usize) -> PyResult<Bound<'py, PyDict>> {
    let c: Check = check.parse().map_err(py_err)?;
    let r = permstat::run_check(n, c, jobs).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("check", c.token())?;
    d.set_item("n", r.n)?;
    d.set_item("pass", r.pass)?;
    d.set_item("detail", r.detail)?;
    d.set_item("counterexample", r.counterexample)?;
    Ok(d)
}

/// Diagram document; `kind` is `linear` or `planar`, `format` `svg` or `ascii`.
#[pyfunction]
fn render(p: &Bound<'_, PyAny>, kind: &str, format: &str) -> PyResult<String> {
    let kind: DiagramKind = kind.parse().map_err(py_err)?;
    let format: Format = format.parse().map_err(py_err)?;
    Ok(diagram(&perm_arg(p)?, kind).render(format))
}

#[pymodule]
#[pyo3(name = "permstat")]
fn permstat_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPermutation>()?;
    m.add_function(wrap_pyfunction!(parse_permutation, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(phi_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(phi_trace, m)?)?;
    m.add_function(wrap_pyfunction!(phi_inverse_trace, m)?)?;
    m.add_function(wrap_pyfunction!(stat_vector, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(joint_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(verify_identity, m)?)?;
    m.add_function(wrap_pyfunction!(run_check, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_module<F: FnOnce(&Bound<'_, PyModule>) -> PyResult<()>>(f: F) {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "permstat").unwrap();
            permstat_module(&m).unwrap();
            f(&m).unwrap();
        });
    }

    #[test]
    fn forward_and_inverse() {
        with_module(|m| {
            let t = m.getattr("phi")?.call1(("425736981",))?;
            assert_eq!(t.str()?.to_string(), "9,5,6,3,8,2,4,7,1");
            let s = m.getattr("phi_inverse")?.call1((t,))?;
            assert_eq!(s.getattr("word")?.extract::<Vec<usize>>()?, vec![4, 2, 5, 7, 3, 6, 9, 8, 1]);
            let v: (usize, usize, usize) = m.getattr("stat_vector")?.call1((vec![3, 4, 2, 5, 1], "lhs"))?.extract()?;
            assert_eq!(v, (6, 3, 2));
            Ok(())
        });
    }

    #[test]
    fn errors_map_to_python_exceptions() {
        with_module(|m| {
            let py = m.py();
            let e = m.getattr("parse_permutation")?.call1(("1,2,2",)).unwrap_err();
            assert!(e.is_instance_of::<PyValueError>(py));
            let e = m.getattr("phi_inverse")?.call1(("652134",)).unwrap_err();
            assert!(e.is_instance_of::<PyRuntimeError>(py));
            Ok(())
        });
    }
}
