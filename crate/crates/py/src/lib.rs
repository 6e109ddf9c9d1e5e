//! Python bindings for `lagmesh`.
//!
//! ```python
//! import pylagmesh as lm
//! p = lm.Problem(lm.Kinetics.dimensionless(), lm.Potential.gaussian(15.0, 1.0), l=0, n=20, h=0.5)
//! ground = p.solve()[0]
//! ground.energy, ground.observables()["mean_r"]
//! ```

use std::cell::RefCell;
use std::sync::Arc;

use lagmesh::config_oracle::{config_observables, solve_config, ConfigProblem, ConfigState};
use lagmesh::observables::{
    build_position_calculus, expval_momentum, reduced_wavefunction_momentum,
    reduced_wavefunction_position, wavefunction_momentum, wavefunction_position,
};
use lagmesh::tables::report;
use lagmesh::{
    assemble_hamiltonian, solve, BoundState, Error, Kinetics, LaguerreMesh, Potential, Problem,
};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Numerical { .. } => PyArithmeticError::new_err(err.to_string()),
        Error::Io(_) => PyOSError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// Gauss-Laguerre Lagrange mesh with scale `h`.
#[pyclass(name = "Mesh", module = "pylagmesh", frozen)]
struct PyMesh {
    inner: Arc<LaguerreMesh>,
}

#[pymethods]
impl PyMesh {
    #[new]
    fn new(n: usize, h: f64) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(LaguerreMesh::new(n, h).map_err(to_py)?),
        })
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.inner.scale()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Regularized Lagrange function `f_i(x)`, zero-based `i`.
    fn lagrange_function(&self, i: usize, x: f64) -> PyResult<f64> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!(
                "index {i} out of range for N = {}",
                self.inner.len()
            )));
        }
        Ok(self.inner.lagrange_function(i, x))
    }

    /// `Σ λ_i g(x_i)` for a Python callable `g`.
    fn quadrature(&self, g: Bound<'_, PyAny>) -> PyResult<f64> {
        let mut s = 0.0;
        for (x, w) in self.inner.nodes().iter().zip(self.inner.weights()) {
            s += w * g.call1((*x,))?.extract::<f64>()?;
        }
        Ok(s)
    }

    fn __repr__(&self) -> String {
        format!("Mesh(n={}, h={})", self.inner.len(), self.inner.scale())
    }
}

#[pyclass(name = "Potential", module = "pylagmesh", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPotential {
    inner: Potential,
}

#[pymethods]
impl PyPotential {
    /// `V(r) = -a exp(-b² r²)`.
    #[staticmethod]
    fn gaussian(a: f64, b: f64) -> PyResult<Self> {
        Ok(Self {
            inner: Potential::gaussian(a, b).map_err(to_py)?,
        })
    }

    /// `V(r) = -a exp(-b r) / r`.
    #[staticmethod]
    fn yukawa(a: f64, b: f64) -> PyResult<Self> {
        Ok(Self {
            inner: Potential::yukawa(a, b).map_err(to_py)?,
        })
    }

    /// Potential given by its Fourier transform `v_ft(k)` (and optionally
    /// `V(r)`) as Python callables. Partial waves are integrated numerically.
    #[staticmethod]
    #[pyo3(signature = (v_ft, v_r=None))]
    fn custom(v_ft: Py<PyAny>, v_r: Option<Py<PyAny>>) -> Self {
        let call = |f: Py<PyAny>| {
            move |x: f64| {
                Python::attach(|py| {
                    f.bind(py)
                        .call1((x,))
                        .and_then(|v| v.extract::<f64>())
                        .unwrap_or(f64::NAN)
                })
            }
        };
        let inner = match v_r {
            Some(g) => Potential::custom_with_radial(call(v_ft), call(g)),
            None => Potential::custom(call(v_ft)),
        };
        Self { inner }
    }

    /// Fourier transform `v(k)`.
    fn fourier(&self, k: f64) -> f64 {
        self.inner.fourier(k)
    }

    /// `V(r)`.
    fn radial(&self, r: f64) -> PyResult<f64> {
        self.inner.radial_value(r).map_err(to_py)
    }

    /// Partial-wave kernel `V_l(p, q)`.
    fn kernel(&self, py: Python<'_>, l: usize, p: f64, q: f64) -> PyResult<f64> {
        let k = self.inner.kernel(l);
        py.detach(|| k.evaluate(p, q)).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "Kinetics", module = "pylagmesh", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyKinetics {
    inner: Kinetics,
}

#[pymethods]
impl PyKinetics {
    /// `T = p²` (unit masses).
    #[staticmethod]
    fn dimensionless() -> Self {
        Self {
            inner: Kinetics::dimensionless(),
        }
    }

    #[staticmethod]
    fn nonrelativistic(m1: f64, m2: f64) -> PyResult<Self> {
        Ok(Self {
            inner: Kinetics::nonrelativistic(m1, m2).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn salpeter(m1: f64, m2: f64) -> PyResult<Self> {
        Ok(Self {
            inner: Kinetics::salpeter(m1, m2).map_err(to_py)?,
        })
    }

    fn value(&self, p: f64) -> f64 {
        self.inner.value(p)
    }

    #[getter]
    fn reduced_mass(&self) -> Option<f64> {
        self.inner.reduced_mass()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "Problem", module = "pylagmesh", frozen)]
struct PyProblem {
    inner: Problem,
}

#[pymethods]
impl PyProblem {
    #[new]
    #[pyo3(signature = (kinetics, potential, l, n, h))]
    fn new(
        kinetics: &PyKinetics,
        potential: &PyPotential,
        l: usize,
        n: usize,
        h: f64,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: Problem::new(kinetics.inner.clone(), potential.inner.clone(), l, n, h)
                .map_err(to_py)?,
        })
    }

    #[getter]
    fn l(&self) -> usize {
        self.inner.l
    }

    #[getter]
    fn mesh(&self) -> PyMesh {
        PyMesh {
            inner: Arc::clone(self.inner.mesh()),
        }
    }

    /// Dense Hamiltonian as a list of rows.
    fn hamiltonian(&self, py: Python<'_>) -> PyResult<Vec<Vec<f64>>> {
        let h = py
            .detach(|| assemble_hamiltonian(&self.inner))
            .map_err(to_py)?;
        let n = h.order();
        Ok((0..n)
            .map(|i| (0..n).map(|j| h.get(i, j)).collect())
            .collect())
    }

    /// Bound states ordered by energy.
    fn solve(&self, py: Python<'_>) -> PyResult<Vec<PyBoundState>> {
        let states = py.detach(|| solve(&self.inner)).map_err(to_py)?;
        Ok(states
            .into_iter()
            .map(|s| PyBoundState {
                inner: s,
                problem: self.inner.clone(),
            })
            .collect())
    }
}

#[pyclass(name = "BoundState", module = "pylagmesh", frozen)]
struct PyBoundState {
    inner: BoundState,
    problem: Problem,
}

#[pymethods]
impl PyBoundState {
    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients.clone()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn l(&self) -> usize {
        self.inner.l
    }

    /// `P(p)`.
    fn wavefunction_momentum(&self, p: f64) -> f64 {
        wavefunction_momentum(&self.inner, p)
    }

    /// `u(p) = p P(p)`.
    fn reduced_wavefunction_momentum(&self, p: f64) -> f64 {
        reduced_wavefunction_momentum(&self.inner, p)
    }

    /// `R(r)` by the mesh Fourier-Bessel sum.
    fn wavefunction_position(&self, r: f64) -> f64 {
        wavefunction_position(&self.inner, r)
    }

    /// `u(r) = r R(r)`.
    fn reduced_wavefunction_position(&self, r: f64) -> f64 {
        reduced_wavefunction_position(&self.inner, r)
    }

    /// `<U(p)>` for a Python callable `U`.
    fn expval_momentum(&self, u: Bound<'_, PyAny>) -> PyResult<f64> {
        let mut s = 0.0;
        for (c, p) in self
            .inner
            .coefficients
            .iter()
            .zip(self.inner.mesh.scaled_nodes())
        {
            s += c * c * u.call1((p,))?.extract::<f64>()?;
        }
        Ok(s)
    }

    /// `<K(r)>` for a Python callable `K`, through the mesh `r²` matrix.
    fn expval_radial(&self, k: Bound<'_, PyAny>) -> PyResult<f64> {
        let calculus = build_position_calculus(&self.inner.mesh, self.inner.l).map_err(to_py)?;
        let err: RefCell<Option<PyErr>> = RefCell::new(None);
        let value = lagmesh::expval_radial(&self.inner, &calculus, |r| {
            match k.call1((r,)).and_then(|v| v.extract::<f64>()) {
                Ok(v) => v,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        })
        .map_err(to_py)?;
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }

    /// Energy, `<p²>`, `<p⁴>`, `<r>`, `<V>`, `<T>`, `<T> + <V>`.
    fn observables<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = py
            .detach(|| report(&self.inner, &self.problem))
            .map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("energy", r.energy)?;
        d.set_item("mean_p2", r.mean_p2)?;
        d.set_item("mean_p4", r.mean_p4)?;
        d.set_item("mean_r", r.mean_r)?;
        d.set_item("mean_potential", r.mean_potential)?;
        d.set_item("mean_kinetic", r.mean_kinetic)?;
        d.set_item("mean_hamiltonian", r.mean_hamiltonian())?;
        d.set_item(
            "norm",
            expval_momentum(&self.inner, |_| 1.0).map_err(to_py)?,
        )?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "BoundState(n={}, l={}, energy={})",
            self.inner.n, self.inner.l, self.inner.energy
        )
    }
}

/// Configuration-space reference solver (nonrelativistic only).
#[pyclass(name = "ConfigProblem", module = "pylagmesh", frozen)]
struct PyConfigProblem {
    inner: ConfigProblem,
}

#[pymethods]
impl PyConfigProblem {
    #[new]
    #[pyo3(signature = (potential, l, mu, n, h_r))]
    fn new(potential: &PyPotential, l: usize, mu: f64, n: usize, h_r: f64) -> PyResult<Self> {
        Ok(Self {
            inner: ConfigProblem::new(potential.inner.clone(), l, mu, n, h_r).map_err(to_py)?,
        })
    }

    /// States with negative energy, ordered by energy.
    fn solve(&self, py: Python<'_>) -> PyResult<Vec<PyConfigState>> {
        let sol = py.detach(|| solve_config(&self.inner)).map_err(to_py)?;
        Ok(sol
            .states
            .into_iter()
            .map(|s| PyConfigState {
                inner: s,
                problem: self.inner.clone(),
            })
            .collect())
    }
}

#[pyclass(name = "ConfigState", module = "pylagmesh", frozen)]
struct PyConfigState {
    inner: ConfigState,
    problem: ConfigProblem,
}

#[pymethods]
impl PyConfigState {
    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients.clone()
    }

    fn reduced_wavefunction(&self, r: f64) -> f64 {
        self.inner.reduced_wavefunction(r)
    }

    /// `<r>`, `<V>`, `<p²>` and `<p²>/2μ + <V>`.
    fn observables<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let o = config_observables(&self.inner, &self.problem).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("energy", self.inner.energy)?;
        d.set_item("mean_r", o.mean_r)?;
        d.set_item("mean_potential", o.mean_potential)?;
        d.set_item("mean_p2", o.mean_p2)?;
        d.set_item("mean_hamiltonian", o.mean_hamiltonian(self.problem.mu))?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "ConfigState(n={}, l={}, energy={})",
            self.inner.n, self.inner.l, self.inner.energy
        )
    }
}

/// Benchmark table `which` (1, 2 or 3) as `(quantity, column, value)` rows.
#[pyfunction]
fn table(py: Python<'_>, which: u8) -> PyResult<Vec<(String, String, f64)>> {
    let cells = py.detach(|| lagmesh::tables::table(which)).map_err(to_py)?;
    Ok(cells
        .into_iter()
        .map(|c| (c.quantity.to_string(), c.column, c.value))
        .collect())
}

#[pymodule]
pub fn pylagmesh(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyPotential>()?;
    m.add_class::<PyKinetics>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyBoundState>()?;
    m.add_class::<PyConfigProblem>()?;
    m.add_class::<PyConfigState>()?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    Ok(())
}
