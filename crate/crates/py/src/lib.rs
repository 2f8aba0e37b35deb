//! Python bindings: the rank-profile type plus the curve, mapping,
//! fitting and analysis operations, with plain lists and dicts at the
//! boundary.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hitsample::analysis;
use hitsample::dist;
use hitsample::mapping;
use hitsample::metrics;
use hitsample::profile;

fn to_py_err(e: hitsample::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_scheme(label: &str, effective_n: Option<Vec<u32>>) -> PyResult<metrics::SamplingScheme> {
    match (label, effective_n) {
        ("binom", None) => Ok(metrics::SamplingScheme::WithReplacement),
        ("hyper", None) => Ok(metrics::SamplingScheme::WithoutReplacement),
        ("actual", Some(per_user_catalog)) => {
            Ok(metrics::SamplingScheme::IrrelevantOnly { per_user_catalog })
        }
        ("actual", None) => Err(PyValueError::new_err(
            "scheme `actual` needs effective_n, one entry per user",
        )),
        (other, _) => Err(PyValueError::new_err(format!(
            "unknown scheme `{other}` (expected binom, hyper or actual)"
        ))),
    }
}

fn catalog(total_items: usize, sample_size: usize) -> PyResult<profile::CatalogSpec> {
    profile::CatalogSpec::new(total_items, sample_size).map_err(to_py_err)
}

fn curve_from(values: Vec<f64>) -> PyResult<profile::HitRatioCurve> {
    profile::HitRatioCurve::from_values(values).map_err(to_py_err)
}

fn table_from(values: Vec<f64>, total_items: usize) -> PyResult<mapping::MappingTable> {
    let spec = catalog(total_items, values.len())?;
    mapping::MappingTable::new(values, spec).map_err(to_py_err)
}

/// Per-user global ranks over a fixed catalog.
#[pyclass]
struct RankProfile {
    inner: profile::RankProfile,
}

#[pymethods]
impl RankProfile {
    #[new]
    fn new(ranks: Vec<u32>, total_items: usize) -> PyResult<Self> {
        Ok(RankProfile {
            inner: profile::RankProfile::new(ranks, total_items).map_err(to_py_err)?,
        })
    }

    /// Loads a `user_id,rank` CSV file.
    #[staticmethod]
    fn load(path: std::path::PathBuf, total_items: usize) -> PyResult<Self> {
        Ok(RankProfile {
            inner: profile::load_rank_profile(&path, total_items).map_err(to_py_err)?,
        })
    }

    /// Draws a synthetic profile from the Beta(a, 1) rank model.
    #[staticmethod]
    fn simulate(a: f64, users: usize, total_items: usize, seed: u64) -> PyResult<Self> {
        Ok(RankProfile {
            inner: metrics::simulate_profile(a, users, total_items, seed).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn ranks(&self) -> Vec<u32> {
        self.inner.ranks().to_vec()
    }

    #[getter]
    fn user_count(&self) -> usize {
        self.inner.user_count()
    }

    #[getter]
    fn total_items(&self) -> usize {
        self.inner.total_items()
    }

    fn __len__(&self) -> usize {
        self.inner.user_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "RankProfile(users={}, total_items={})",
            self.inner.user_count(),
            self.inner.total_items()
        )
    }
}

/// Outcome of the Beta-shape fit.
#[pyclass]
struct FitResult {
    #[pyo3(get)]
    iterates: Vec<f64>,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    final_a: f64,
}

#[pymethods]
impl FitResult {
    fn __repr__(&self) -> String {
        format!(
            "FitResult(final_a={}, converged={}, updates={})",
            self.final_a,
            self.converged,
            self.iterates.len().saturating_sub(1)
        )
    }
}

/// Global hit-ratio curve HR@K for K = 1..=N.
#[pyfunction]
fn hr_curve(profile: &RankProfile) -> Vec<f64> {
    metrics::hr_curve(&profile.inner).values().to_vec()
}

/// Exact E[SHR@k] for k = 1..=n under `binom` or `hyper` sampling.
#[pyfunction]
fn expected_shr_curve(
    profile: &RankProfile,
    sample_size: usize,
    scheme: &str,
) -> PyResult<Vec<f64>> {
    let spec = catalog(profile.inner.total_items(), sample_size)?;
    let scheme = parse_scheme(scheme, None)?;
    let hist = profile::histogram(&profile.inner);
    Ok(metrics::expected_shr_curve(&hist, &scheme, &spec)
        .map_err(to_py_err)?
        .values()
        .to_vec())
}

/// Exact Var[SHR@k] for k = 1..=n.
#[pyfunction]
fn shr_variance_curve(
    profile: &RankProfile,
    sample_size: usize,
    scheme: &str,
) -> PyResult<Vec<f64>> {
    let spec = catalog(profile.inner.total_items(), sample_size)?;
    let scheme = parse_scheme(scheme, None)?;
    let hist = profile::histogram(&profile.inner);
    metrics::shr_variance_curve(&hist, &scheme, &spec, profile.inner.user_count())
        .map_err(to_py_err)
}

/// Seeded Monte Carlo SHR@k: the mean curve and, for runs > 1, the
/// per-cutoff standard error.
#[pyfunction]
#[pyo3(signature = (profile, sample_size, scheme, seed=0, runs=1, effective_n=None))]
fn shr_monte_carlo(
    profile: &RankProfile,
    sample_size: usize,
    scheme: &str,
    seed: u64,
    runs: usize,
    effective_n: Option<Vec<u32>>,
) -> PyResult<(Vec<f64>, Option<Vec<f64>>)> {
    let spec = catalog(profile.inner.total_items(), sample_size)?;
    let scheme = parse_scheme(scheme, effective_n)?;
    let cfg = metrics::MonteCarloConfig { seed, runs };
    let mc = metrics::shr_curve_monte_carlo(&profile.inner, &scheme, &spec, &cfg)
        .map_err(to_py_err)?;
    Ok((mc.mean.values().to_vec(), mc.stderr))
}

/// One pass of per-user sampled ranks for a given run index.
#[pyfunction]
#[pyo3(signature = (profile, sample_size, scheme, seed=0, run=0, effective_n=None))]
fn sample_ranks(
    profile: &RankProfile,
    sample_size: usize,
    scheme: &str,
    seed: u64,
    run: u64,
    effective_n: Option<Vec<u32>>,
) -> PyResult<Vec<u32>> {
    let spec = catalog(profile.inner.total_items(), sample_size)?;
    let scheme = parse_scheme(scheme, effective_n)?;
    metrics::sample_all_ranks(&profile.inner, &scheme, &spec, seed, run).map_err(to_py_err)
}

/// Evaluates a mapping family as the list f(1..=n). Labels: `linear`,
/// `bound`, `beta@<a>`, or `beta@P` with `sampled` ranks to fit on.
#[pyfunction]
#[pyo3(signature = (label, total_items, sample_size, sampled=None))]
fn mapping_table(
    label: &str,
    total_items: usize,
    sample_size: usize,
    sampled: Option<Vec<u32>>,
) -> PyResult<Vec<f64>> {
    let spec = mapping::MappingSpec::parse(label).map_err(to_py_err)?;
    let cat = catalog(total_items, sample_size)?;
    let record = sampled
        .map(|rs| profile::SampledRankRecord::new(rs, sample_size).map_err(to_py_err))
        .transpose()?;
    let (table, _) = spec.build(&cat, record.as_ref()).map_err(to_py_err)?;
    Ok(table.values().to_vec())
}

/// Fits the Beta shape from sampled ranks.
#[pyfunction]
#[pyo3(signature = (sampled, total_items, sample_size, init_a=0.5, tol=1e-6, max_iter=100))]
fn fit_beta(
    sampled: Vec<u32>,
    total_items: usize,
    sample_size: usize,
    init_a: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<FitResult> {
    let record = profile::SampledRankRecord::new(sampled, sample_size).map_err(to_py_err)?;
    let cat = catalog(total_items, sample_size)?;
    let cfg = mapping::FitConfig {
        init_a,
        tol,
        max_iter,
    };
    let trace = mapping::fit_beta_param(&record, &cat, &cfg).map_err(to_py_err)?;
    Ok(FitResult {
        iterates: trace.iterates,
        converged: trace.converged,
        final_a: trace.final_a,
    })
}

/// Reads a global curve at the mapped location floor(f(k)).
#[pyfunction]
fn evaluate_mapped_hr(global: Vec<f64>, table: Vec<f64>, k: usize) -> PyResult<f64> {
    let total = global.len();
    let global = curve_from(global)?;
    let table = table_from(table, total)?;
    mapping::evaluate_mapped_hr(&global, &table, k).map_err(to_py_err)
}

/// Alignment errors between a sampled curve and the mapped global one.
#[pyfunction]
fn error_report<'py>(
    py: Python<'py>,
    global: Vec<f64>,
    sampled: Vec<f64>,
    table: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let total = global.len();
    let global = curve_from(global)?;
    let sampled = curve_from(sampled)?;
    let table = table_from(table, total)?;
    let report = analysis::error_report(&global, &sampled, &table).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("abs", report.abs)?;
    out.set_item("rel", report.rel)?;
    out.set_item("abs_at_1", report.abs_at_1)?;
    out.set_item("rel_at_1", report.rel_at_1)?;
    out.set_item("abs_2_10", report.abs_2_10)?;
    out.set_item("rel_2_10", report.rel_2_10)?;
    Ok(out)
}

/// Pointwise order of two curves: `tie`, `first`, `second` or
/// `incomparable`.
#[pyfunction]
fn dominance(first: Vec<f64>, second: Vec<f64>) -> PyResult<&'static str> {
    let first = curve_from(first)?;
    let second = curve_from(second)?;
    Ok(
        match analysis::dominance(&first, &second).map_err(to_py_err)? {
            analysis::Dominance::Tie => "tie",
            analysis::Dominance::FirstDominates => "first",
            analysis::Dominance::SecondDominates => "second",
            analysis::Dominance::Incomparable => "incomparable",
        },
    )
}

/// Cutoffs where the dominated profile's expected curve overtook the
/// dominant one's, as (k, dominant, dominated) triples.
type Violations = Vec<(usize, f64, f64)>;

/// Checks that dominance of global curves survives sampling in
/// expectation; returns (hypothesis_met, violations).
#[pyfunction]
fn sampling_theorem_check(
    dominant: &RankProfile,
    dominated: &RankProfile,
    sample_size: usize,
    scheme: &str,
) -> PyResult<(bool, Violations)> {
    let spec = catalog(dominant.inner.total_items(), sample_size)?;
    let scheme = parse_scheme(scheme, None)?;
    let check =
        analysis::sampling_theorem_check(&dominant.inner, &dominated.inner, &scheme, &spec)
            .map_err(to_py_err)?;
    Ok((
        check.hypothesis_met,
        check
            .violations
            .iter()
            .map(|v| (v.k, v.dominant, v.dominated))
            .collect(),
    ))
}

/// Binomial tail Pr(r <= k) under sampling with replacement.
#[pyfunction]
fn binom_tail_prob(k: usize, rank: usize, total_items: usize, sample_size: usize) -> PyResult<f64> {
    dist::binom_tail_prob(k, rank, &catalog(total_items, sample_size)?).map_err(to_py_err)
}

/// Hypergeometric tail Pr(r <= k) under sampling without replacement.
#[pyfunction]
fn hyper_tail_prob(k: usize, rank: usize, total_items: usize, sample_size: usize) -> PyResult<f64> {
    dist::hyper_tail_prob(k, rank, &catalog(total_items, sample_size)?).map_err(to_py_err)
}

/// Population bound 2 exp(-2 M t^2).
#[pyfunction]
fn hoeffding_bound(users: usize, threshold: f64) -> PyResult<f64> {
    Ok(dist::hoeffding_population_bound(users, threshold)
        .map_err(to_py_err)?
        .bound)
}

#[pymodule]
fn hitsample_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<RankProfile>()?;
    m.add_class::<FitResult>()?;
    m.add_function(wrap_pyfunction!(hr_curve, m)?)?;
    m.add_function(wrap_pyfunction!(expected_shr_curve, m)?)?;
    m.add_function(wrap_pyfunction!(shr_variance_curve, m)?)?;
    m.add_function(wrap_pyfunction!(shr_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(sample_ranks, m)?)?;
    m.add_function(wrap_pyfunction!(mapping_table, m)?)?;
    m.add_function(wrap_pyfunction!(fit_beta, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_mapped_hr, m)?)?;
    m.add_function(wrap_pyfunction!(error_report, m)?)?;
    m.add_function(wrap_pyfunction!(dominance, m)?)?;
    m.add_function(wrap_pyfunction!(sampling_theorem_check, m)?)?;
    m.add_function(wrap_pyfunction!(binom_tail_prob, m)?)?;
    m.add_function(wrap_pyfunction!(hyper_tail_prob, m)?)?;
    m.add_function(wrap_pyfunction!(hoeffding_bound, m)?)?;
    Ok(())
}
