//! Python bindings: `import kbl`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use kbl_core::bl::{self, BLDatum, Budget, GaussianOptions, LwConstant, TruncationWindow};
use kbl_core::fremlin::{self, FremlinOptions, NonnegTensor};
use kbl_core::geometry::{self, SeminormBall};
use kbl_core::harness::{self, AffineFamily, AffineSubspace};
use kbl_core::polysurf::{self, Cube, MeshOptions, PolyNVars};

fn err(e: kbl_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Brascamp-Lieb datum: subspaces given by spanning rows, one exponent each.
#[pyclass(name = "Datum", module = "kbl", skip_from_py_object)]
#[derive(Clone)]
pub struct PyDatum {
    inner: BLDatum,
}

#[pymethods]
impl PyDatum {
    #[new]
    fn new(n: usize, subspaces: Vec<Vec<Vec<f64>>>, exponents: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: BLDatum::from_rows(n, &subspaces, exponents).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn scaling_exponent(&self) -> f64 {
        self.inner.scaling_exponent()
    }

    /// `(kappa, kappa_tilde)` over the default subspace lattice.
    fn exponents(&self) -> PyResult<(f64, f64)> {
        let lat = bl::default_lattice(&self.inner).map_err(err)?;
        Ok((bl::kappa(&self.inner, &lat).value, bl::kappa_tilde(&self.inner, &lat).value))
    }

    fn is_loomis_whitney(&self) -> bool {
        bl::is_loomis_whitney(&self.inner)
    }

    /// Closed-form constant for Loomis-Whitney data (`inf` when infinite).
    fn lw_constant(&self) -> PyResult<f64> {
        Ok(match bl::lw_constant(&self.inner).map_err(err)? {
            LwConstant::Finite(v) => v,
            LwConstant::Infinite => f64::INFINITY,
        })
    }

    /// Gaussian constant, or `None` when divergent or not applicable.
    #[pyo3(signature = (seed=0))]
    fn gaussian(&self, seed: u64) -> Option<f64> {
        bl::bl_gaussian(
            &self.inner,
            GaussianOptions {
                seed,
                ..Default::default()
            },
        )
        .value()
    }

    /// Lower estimate of the truncated constant at scales `(r, R)`.
    fn truncated_estimate(&self, r: f64, big_r: f64) -> PyResult<f64> {
        let w = TruncationWindow::new(r, big_r).map_err(err)?;
        Ok(bl::bl_truncated_estimate(&self.inner, &w, Budget::default()).map_err(err)?.value)
    }
}

/// Fremlin norm of a row-major tensor with unit weights.
#[pyfunction]
#[pyo3(signature = (shape, entries, q, seed=0))]
fn fremlin_norm(shape: Vec<usize>, entries: Vec<f64>, q: Vec<f64>, seed: u64) -> PyResult<f64> {
    let t = NonnegTensor::from_shape(&shape, entries).map_err(err)?;
    let opts = FremlinOptions {
        seed,
        ..Default::default()
    };
    Ok(fremlin::fremlin_norm(&t, &q, opts).map_err(err)?.value)
}

/// Seminorm `v -> Σ w |<v, u>|` and its unit ball.
#[pyclass(name = "Seminorm", module = "kbl")]
pub struct PySeminorm {
    inner: SeminormBall,
}

#[pymethods]
impl PySeminorm {
    #[new]
    fn new(directions: Vec<Vec<f64>>, weights: Vec<f64>) -> PyResult<Self> {
        if directions.len() != weights.len() || directions.is_empty() {
            return Err(PyValueError::new_err("need one weight per direction"));
        }
        let n = directions[0].len();
        let atoms: Vec<(Vec<f64>, f64)> = directions.into_iter().zip(weights).collect();
        Ok(Self {
            inner: SeminormBall::from_directions(n, &atoms).map_err(err)?,
        })
    }

    fn __call__(&self, v: Vec<f64>) -> PyResult<f64> {
        self.inner.eval(&v).map_err(err)
    }

    fn is_bounded(&self) -> bool {
        self.inner.is_bounded()
    }

    #[pyo3(signature = (samples=200_000, seed=0))]
    fn volume(&self, samples: usize, seed: u64) -> PyResult<f64> {
        Ok(geometry::body_volume(&self.inner, samples, seed).map_err(err)?.value)
    }

    #[pyo3(signature = (samples=200_000, seed=0))]
    fn visibility(&self, samples: usize, seed: u64) -> PyResult<f64> {
        geometry::visibility(&self.inner, samples, seed).map_err(err)
    }
}

/// Polynomial from `(exponents, coefficient)` terms.
#[pyclass(name = "Polynomial", module = "kbl", skip_from_py_object)]
#[derive(Clone)]
pub struct PyPolynomial {
    inner: PolyNVars,
}

#[pymethods]
impl PyPolynomial {
    #[new]
    fn new(n: usize, terms: Vec<(Vec<u32>, f64)>) -> PyResult<Self> {
        Ok(Self {
            inner: PolyNVars::new(n, terms).map_err(err)?,
        })
    }

    /// The grid polynomial vanishing on every half-integer coordinate
    /// hyperplane with `|c| <= R + 1`.
    #[staticmethod]
    fn grid(big_r: f64, n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: polysurf::build_p0(big_r, n).map_err(err)?,
        })
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn __call__(&self, x: Vec<f64>) -> f64 {
        self.inner.eval(&x)
    }

    /// Area (length in the plane) of the zero set in the centred cube.
    #[pyo3(signature = (side=2.0, cells=32))]
    fn zero_set_area(&self, side: f64, cells: usize) -> PyResult<f64> {
        let q = Cube::centered(self.inner.dim(), side);
        let m = polysurf::mesh_zero_set(&self.inner, &q, MeshOptions { cells, ..Default::default() }).map_err(err)?;
        Ok(m.total_area())
    }

    /// `∫ |<v, n>|` over the zero set in the centred cube.
    #[pyo3(signature = (v, side=2.0, cells=32))]
    fn directional_area(&self, v: Vec<f64>, side: f64, cells: usize) -> PyResult<f64> {
        let q = Cube::centered(self.inner.dim(), side);
        let m = polysurf::mesh_zero_set(&self.inner, &q, MeshOptions { cells, ..Default::default() }).map_err(err)?;
        Ok(polysurf::directional_area(&m, &v))
    }

    /// Distinct roots of `t -> p(a + t d)` on `[lo, hi]`.
    fn line_roots(&self, a: Vec<f64>, d: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
        polysurf::line_roots(&self.inner, &a, &d, lo, hi).roots
    }
}

fn families(raw: Vec<Vec<(Vec<f64>, Vec<Vec<f64>>)>>) -> PyResult<Vec<AffineFamily>> {
    raw.into_iter()
        .map(|members| {
            let n = members.first().map(|m| m.0.len()).unwrap_or(0);
            let k = members.first().map(|m| m.1.len()).unwrap_or(0);
            let ms = members
                .into_iter()
                .map(|(p, b)| AffineSubspace::new(p, &b))
                .collect::<kbl_core::Result<Vec<_>>>()
                .map_err(err)?;
            AffineFamily::new(n, k, ms).map_err(err)
        })
        .collect()
}

/// Endpoint Kakeya-BL sum. Each family is a list of `(point, basis)`.
/// Returns `(lhs, rhs)`.
#[pyfunction]
fn lw_kakeya(fams: Vec<Vec<(Vec<f64>, Vec<Vec<f64>>)>>, big_r: f64) -> PyResult<(f64, f64)> {
    let rep = harness::lw_kakeya(&families(fams)?, big_r).map_err(err)?;
    Ok((rep.lhs, rep.rhs))
}

/// `(lhs, rhs)` of the endpoint sum on the `N x N` grid of lines.
#[pyfunction]
fn grid_lines(count: usize, big_r: f64) -> PyResult<(f64, f64)> {
    let fams = harness::grid_lines_instance(count).map_err(err)?;
    let rep = harness::lw_kakeya(&fams, big_r).map_err(err)?;
    Ok((rep.lhs, rep.rhs))
}

/// `(c1, converse_holds, forward_holds, holder_ratio)`.
#[pyfunction]
fn duality_check(g: Vec<f64>, m: Vec<f64>, p: Vec<f64>, degs: Vec<f64>) -> PyResult<(f64, bool, bool, f64)> {
    let r = harness::duality_check(&g, &m, &p, &degs).map_err(err)?;
    Ok((r.converse.c1, r.converse.holds, r.forward.holds, r.converse.holder_ratio))
}

/// `[(suite, cases, failures)]` for the randomised invariant suites.
#[pyfunction]
#[pyo3(signature = (budget=20, seed=0))]
fn run_suites(budget: usize, seed: u64) -> Vec<(String, usize, usize)> {
    kbl_core::suites::run_suites(kbl_core::suites::SuiteOptions {
        budget,
        seed,
        inject_bad_tolerance: false,
    })
    .into_iter()
    .map(|s| (s.name, s.cases, s.failures))
    .collect()
}

#[pymodule]
fn kbl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDatum>()?;
    m.add_class::<PySeminorm>()?;
    m.add_class::<PyPolynomial>()?;
    m.add_function(wrap_pyfunction!(fremlin_norm, m)?)?;
    m.add_function(wrap_pyfunction!(lw_kakeya, m)?)?;
    m.add_function(wrap_pyfunction!(grid_lines, m)?)?;
    m.add_function(wrap_pyfunction!(duality_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_suites, m)?)?;
    Ok(())
}
