//! Python bindings: step functions plus the main operations (norms,
//! rearrangement, dilation, associate search, covering, approximation,
//! series summation, divergence witnesses).
//!
//! Exact rationals cross the boundary as (numerator, denominator) tuples;
//! norm values are floats, like everywhere else in the library.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use qbfs_core::approximation::{approximate_simple, dyadic_cover, CompactDyadicSet};
use qbfs_core::associate::{associate_norm, second_associate_check, SearchClass};
use qbfs_core::quasinorm::{check_axioms, disjoint_equal_norm_pair, AxiomCheckConfig, QuasinormSpec};
use qbfs_core::rearrangement::rearrangement;
use qbfs_core::sampling::Sampler;
use qbfs_core::series::{
    resonance_witness, riesz_fischer_sum, Functional, ResonanceGenerator, SeriesGenerator,
};
use qbfs_core::{Rat, RatBox, StepFunction};

fn core_err(e: qbfs_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rat_in(t: (i64, i64)) -> PyResult<Rat> {
    if t.1 == 0 {
        return Err(PyValueError::new_err("zero denominator"));
    }
    Ok(Rat::new(t.0.into(), t.1.into()))
}

fn rat_out(x: &Rat) -> PyResult<(i64, i64)> {
    let n = x
        .numer()
        .to_string()
        .parse()
        .map_err(|_| PyValueError::new_err(format!("numerator of {x} exceeds i64")))?;
    let d = x
        .denom()
        .to_string()
        .parse()
        .map_err(|_| PyValueError::new_err(format!("denominator of {x} exceeds i64")))?;
    Ok((n, d))
}

type PySides = Vec<((i64, i64), (i64, i64))>;

fn box_in(sides: PySides) -> PyResult<RatBox> {
    let sides = sides
        .into_iter()
        .map(|(lo, hi)| Ok((rat_in(lo)?, rat_in(hi)?)))
        .collect::<PyResult<Vec<_>>>()?;
    RatBox::new(sides).map_err(core_err)
}

/// A finitely supported step function with exact rational pieces.
#[pyclass(name = "StepFunction", skip_from_py_object)]
#[derive(Clone)]
struct PyStepFunction {
    inner: StepFunction,
}

#[pymethods]
impl PyStepFunction {
    /// pieces: list of (sides, value) with sides = [((lo_n, lo_d), (hi_n, hi_d)), ...]
    /// and value = (num, den).
    #[new]
    fn new(dim: usize, pieces: Vec<(PySides, (i64, i64))>) -> PyResult<Self> {
        let pieces = pieces
            .into_iter()
            .map(|(sides, v)| Ok((box_in(sides)?, qbfs_core::Scalar::real(rat_in(v)?))))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyStepFunction {
            inner: StepFunction::from_pieces(dim, pieces).map_err(core_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyStepFunction {
            inner: StepFunction::from_json_str(text).map_err(core_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json_string().map_err(core_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn piece_count(&self) -> usize {
        self.inner.pieces().len()
    }

    /// Exact integral of the function as (num, den); real-valued inputs only.
    fn integral(&self) -> PyResult<(i64, i64)> {
        let v = self.inner.integral();
        if !v.is_real() {
            return Err(PyValueError::new_err("integral is not real"));
        }
        rat_out(&v.re)
    }

    /// Exact measure of the support as (num, den).
    fn support_measure(&self) -> PyResult<(i64, i64)> {
        rat_out(&self.inner.support_measure())
    }

    /// Exact pointwise value at a rational point; real-valued inputs only.
    fn value_at(&self, point: Vec<(i64, i64)>) -> PyResult<(i64, i64)> {
        let xs = point.into_iter().map(rat_in).collect::<PyResult<Vec<_>>>()?;
        let v = self.inner.eval(&xs);
        if !v.is_real() {
            return Err(PyValueError::new_err("value is not real"));
        }
        rat_out(&v.re)
    }

    fn __repr__(&self) -> String {
        format!(
            "StepFunction(dim={}, pieces={})",
            self.inner.dim(),
            self.inner.pieces().len()
        )
    }
}

/// Evaluate a norm chosen by selector (lp:p=<r>, lorentz:p=<r>,q=<r>, sup).
#[pyfunction]
fn norm(selector: &str, f: &PyStepFunction) -> PyResult<f64> {
    let spec = QuasinormSpec::parse(selector).map_err(core_err)?;
    spec.eval(&f.inner).map_err(core_err)
}

/// Decreasing rearrangement as (breakpoints, values), both lists of (num, den).
#[pyfunction]
fn rearrangement_profile(
    f: &PyStepFunction,
) -> PyResult<(Vec<(i64, i64)>, Vec<(i64, i64)>)> {
    let star = rearrangement(&f.inner).map_err(core_err)?;
    let bp = star.breakpoints().iter().map(rat_out).collect::<PyResult<Vec<_>>>()?;
    let vs = star.values().iter().map(rat_out).collect::<PyResult<Vec<_>>>()?;
    Ok((bp, vs))
}

/// Decreasing rearrangement realized as a step function on the half line.
#[pyfunction]
fn rearrangement_step(f: &PyStepFunction) -> PyResult<PyStepFunction> {
    Ok(PyStepFunction {
        inner: rearrangement(&f.inner).map_err(core_err)?.to_step(),
    })
}

/// Scale the argument: (D_a f)(x) = f(ax), a > 0 rational.
#[pyfunction]
fn dilate(f: &PyStepFunction, a: (i64, i64)) -> PyResult<PyStepFunction> {
    Ok(PyStepFunction {
        inner: qbfs_core::dilation::dilate(&f.inner, &rat_in(a)?).map_err(core_err)?,
    })
}

/// Certified norm bound for the dilation operator at scale a on dimension n.
#[pyfunction]
fn dilation_bound(n: u32, c: f64, a: f64) -> PyResult<f64> {
    qbfs_core::dilation::dilation_norm_bound(n, c, a).map_err(core_err)
}

/// Searched associate-norm lower bound for f under the selected norm.
#[pyfunction]
fn associate_value(selector: &str, f: &PyStepFunction) -> PyResult<f64> {
    let spec = QuasinormSpec::parse(selector).map_err(core_err)?;
    Ok(associate_norm(&spec, &f.inner, &SearchClass::default())
        .map_err(core_err)?
        .value)
}

/// (norm of f, searched second-associate value, embedding holds).
#[pyfunction]
fn second_associate(selector: &str, f: &PyStepFunction) -> PyResult<(f64, f64, bool)> {
    let spec = QuasinormSpec::parse(selector).map_err(core_err)?;
    let check =
        second_associate_check(&spec, &f.inner, &SearchClass::default()).map_err(core_err)?;
    Ok((check.x_norm, check.second_norm, check.embedding_holds(1e-9)))
}

/// Cover the union of closed boxes `compact` by dyadic cubes inside the open
/// union `open_boxes`, excess below eps. Returns (excess, order, cube count).
#[pyfunction]
fn cover(
    compact: Vec<PySides>,
    open_boxes: Vec<PySides>,
    eps: (i64, i64),
    k0: i32,
) -> PyResult<((i64, i64), i32, usize)> {
    let k_set = CompactDyadicSet::from_boxes(
        compact.into_iter().map(box_in).collect::<PyResult<Vec<_>>>()?,
    )
    .map_err(core_err)?;
    let g: Vec<RatBox> = open_boxes.into_iter().map(box_in).collect::<PyResult<Vec<_>>>()?;
    let cov = dyadic_cover(&k_set, &g, &rat_in(eps)?, k0).map_err(core_err)?;
    Ok((rat_out(&cov.outer_excess)?, cov.order, cov.cube_count))
}

/// Approximate f by a dyadic simple function within the certified multiple
/// of eps. Returns (simple function, measured error, certified bound).
#[pyfunction]
fn approximate(
    selector: &str,
    f: &PyStepFunction,
    eps: (i64, i64),
) -> PyResult<(PyStepFunction, f64, f64)> {
    let spec = QuasinormSpec::parse(selector).map_err(core_err)?;
    let approx = approximate_simple(&spec, &f.inner, &rat_in(eps)?).map_err(core_err)?;
    Ok((
        PyStepFunction { inner: approx.step },
        approx.trace.measured,
        approx.trace.certified_bound,
    ))
}

/// Sum a generated series exactly up to `prefix` terms and certify the
/// residuals. Returns (converges, weighted prefix, analytic tail, failures).
#[pyfunction]
fn riesz_fischer(
    selector: &str,
    generator: &str,
    prefix: usize,
) -> PyResult<(bool, f64, f64, Vec<String>)> {
    let spec = QuasinormSpec::parse(selector).map_err(core_err)?;
    let gen = SeriesGenerator::parse(generator).map_err(core_err)?;
    let (_, cert) = riesz_fischer_sum(&spec, &gen, prefix).map_err(core_err)?;
    Ok((
        cert.converges,
        cert.weighted_prefix_sum,
        cert.weighted_tail_bound,
        cert.failures,
    ))
}

/// Build a divergence witness from calibrated spikes. Returns
/// (functional trace, witness norm, norm bound, all checks passed).
#[pyfunction]
fn resonance(selector: &str, prefix: usize) -> PyResult<(Vec<f64>, f64, f64, bool)> {
    let spec = QuasinormSpec::parse(selector).map_err(core_err)?;
    let (_, w) = resonance_witness(
        &spec,
        &ResonanceGenerator::CalibratedSpikes,
        &Functional::Integral,
        prefix,
    )
    .map_err(core_err)?;
    let passed = w.passed();
    Ok((w.witness_trace, w.witness_norm, w.rf_bound, passed))
}

/// Sampled axiom check. Returns (empirical C, stored C, all axioms passed).
#[pyfunction]
fn axiom_summary(selector: &str, seed: u64, samples: usize) -> PyResult<(f64, f64, bool)> {
    let spec = QuasinormSpec::parse(selector).map_err(core_err)?;
    let mut s = Sampler::new(seed);
    let fs: Vec<StepFunction> = (0..samples).map(|_| s.step_function(1, 3)).collect();
    let pinned = [disjoint_equal_norm_pair()];
    let report =
        check_axioms(&spec, &fs, &pinned, &AxiomCheckConfig::default()).map_err(core_err)?;
    Ok((
        report.empirical_concavity,
        report.stored_concavity,
        report.passed(),
    ))
}

#[pymodule]
fn qbfs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStepFunction>()?;
    m.add_function(wrap_pyfunction!(norm, m)?)?;
    m.add_function(wrap_pyfunction!(rearrangement_profile, m)?)?;
    m.add_function(wrap_pyfunction!(rearrangement_step, m)?)?;
    m.add_function(wrap_pyfunction!(dilate, m)?)?;
    m.add_function(wrap_pyfunction!(dilation_bound, m)?)?;
    m.add_function(wrap_pyfunction!(associate_value, m)?)?;
    m.add_function(wrap_pyfunction!(second_associate, m)?)?;
    m.add_function(wrap_pyfunction!(cover, m)?)?;
    m.add_function(wrap_pyfunction!(approximate, m)?)?;
    m.add_function(wrap_pyfunction!(riesz_fischer, m)?)?;
    m.add_function(wrap_pyfunction!(resonance, m)?)?;
    m.add_function(wrap_pyfunction!(axiom_summary, m)?)?;
    Ok(())
}
