use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dnasearch::distributed::{run_distributed_traced, DistributedMode};
use dnasearch::generator::{build_scenario_parallel, ScenarioParams};
use dnasearch::parallel::{search_all_parallel_with_work, Accumulation, Decomposition, Strategy};
use dnasearch::{oracle, report, PatternSet, SearchReport, Sequence, WorkCounter};

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_inputs(seq: &str, patterns: Vec<String>) -> PyResult<(Sequence, PatternSet)> {
    Ok((
        seq.parse().map_err(value_error)?,
        PatternSet::parse(&patterns).map_err(value_error)?,
    ))
}

/// The 64-bit LCG with O(log n) skip-ahead.
#[pyclass(name = "Lcg", from_py_object)]
#[derive(Clone)]
struct PyLcg {
    inner: dnasearch::Lcg,
}

#[pymethods]
impl PyLcg {
    #[new]
    fn new(seed: u64) -> Self {
        PyLcg {
            inner: dnasearch::Lcg::new(seed),
        }
    }

    #[staticmethod]
    fn from_state(state: u64) -> Self {
        PyLcg {
            inner: dnasearch::Lcg::from_state(state),
        }
    }

    #[getter]
    fn state(&self) -> u64 {
        self.inner.state()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn skip(&mut self, n: u64) {
        self.inner.skip(n);
    }

    fn uniform(&mut self, bound: u64) -> PyResult<u64> {
        self.inner.uniform(bound).map_err(value_error)
    }

    fn __eq__(&self, other: &PyLcg) -> bool {
        self.inner == other.inner
    }
}

/// A finalized search report. `pat_found` uses -1 for patterns not found.
#[pyclass(name = "Report", frozen)]
struct PyReport {
    inner: SearchReport,
    work: WorkCounter,
    #[pyo3(get)]
    trace: Vec<String>,
}

impl PyReport {
    fn new(inner: SearchReport, work: WorkCounter) -> Self {
        PyReport {
            inner,
            work,
            trace: Vec::new(),
        }
    }
}

#[pymethods]
impl PyReport {
    #[getter]
    fn pat_found(&self) -> Vec<i64> {
        self.inner.pat_found_signed()
    }

    #[getter]
    fn seq_matches(&self) -> Vec<u32> {
        self.inner.seq_matches.clone()
    }

    #[getter]
    fn matches(&self) -> usize {
        self.inner.pat_matches
    }

    #[getter]
    fn checksum(&self) -> u64 {
        self.inner.checksum_found
    }

    #[getter]
    fn multi(&self) -> usize {
        self.inner.multi_match_positions
    }

    #[getter]
    fn comparisons(&self) -> u64 {
        self.work.comparisons
    }

    #[getter]
    fn positions_tested(&self) -> u64 {
        self.work.positions_tested
    }

    #[pyo3(signature = (verbose = false))]
    fn to_text(&self, verbose: bool) -> String {
        report::to_text(&self.inner, verbose)
    }

    /// Name of the first differing field, or None when the reports are equal.
    fn first_difference(&self, other: &PyReport) -> Option<String> {
        self.inner.first_difference(&other.inner)
    }

    fn __eq__(&self, other: &PyReport) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Report(matches={}, checksum={}, multi={})",
            self.inner.pat_matches, self.inner.checksum_found, self.inner.multi_match_positions
        )
    }
}

/// First match position of `pattern` in `seq`, or -1.
#[pyfunction]
fn find_first(seq: &str, pattern: &str) -> PyResult<i64> {
    let (seq, pats) = parse_inputs(seq, vec![pattern.to_string()])?;
    let pos = oracle::find_first(
        seq.as_slice(),
        pats[0].as_slice(),
        &mut WorkCounter::default(),
    );
    Ok(pos.map_or(-1, |p| p as i64))
}

#[pyfunction]
fn search_sequential(seq: &str, patterns: Vec<String>) -> PyResult<PyReport> {
    let (seq, pats) = parse_inputs(seq, patterns)?;
    let (report, work) = oracle::search_all_sequential_with_work(&seq, &pats);
    Ok(PyReport::new(report, work))
}

#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (seq, patterns, strategy = "positions", workers = 4, chunk = 4096, accumulation = "serialized", cancellation = true))]
fn search_parallel(
    py: Python<'_>,
    seq: &str,
    patterns: Vec<String>,
    strategy: &str,
    workers: usize,
    chunk: usize,
    accumulation: &str,
    cancellation: bool,
) -> PyResult<PyReport> {
    let (seq, pats) = parse_inputs(seq, patterns)?;
    let decomposition: Decomposition = strategy.parse().map_err(value_error)?;
    let accumulation: Accumulation = accumulation.parse().map_err(value_error)?;
    let mut strategy =
        Strategy::new(decomposition, workers, chunk, accumulation).map_err(value_error)?;
    if !cancellation {
        strategy = strategy.without_cancellation();
    }
    let (report, work) = py.detach(|| search_all_parallel_with_work(&seq, &pats, &strategy));
    Ok(PyReport::new(report, work))
}

/// Runs the rank simulation. The report's `trace` lists every continuation
/// message as `src -> dst p=<p> s=<s> k=<k>`.
#[pyfunction]
#[pyo3(signature = (seq, patterns, ranks = 4, mode = "distributed"))]
fn run_distributed(
    py: Python<'_>,
    seq: &str,
    patterns: Vec<String>,
    ranks: usize,
    mode: &str,
) -> PyResult<PyReport> {
    let (seq, pats) = parse_inputs(seq, patterns)?;
    let mode: DistributedMode = mode.parse().map_err(value_error)?;
    let run = py
        .detach(|| run_distributed_traced(&seq, &pats, ranks, mode))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(PyReport {
        trace: run.trace_lines(),
        inner: run.report,
        work: run.work,
    })
}

/// Generates a scenario; returns the sequence and the patterns as strings.
#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (
    seq_length, prob_a = 0.25, prob_c = 0.25, prob_g = 0.25,
    n_rand = 0, rand_len_mean = 1, rand_len_dev = 0,
    n_samp = 0, samp_len_mean = 1, samp_len_dev = 0, samp_loc_mean = 0, samp_loc_dev = 0,
    seed = 0, workers = 1
))]
fn build_scenario(
    seq_length: usize,
    prob_a: f64,
    prob_c: f64,
    prob_g: f64,
    n_rand: usize,
    rand_len_mean: usize,
    rand_len_dev: usize,
    n_samp: usize,
    samp_len_mean: usize,
    samp_len_dev: usize,
    samp_loc_mean: usize,
    samp_loc_dev: usize,
    seed: u64,
    workers: usize,
) -> PyResult<(String, Vec<String>)> {
    let params = ScenarioParams {
        seq_length,
        prob_a,
        prob_c,
        prob_g,
        n_random_patterns: n_rand,
        rand_len_mean,
        rand_len_dev,
        n_sample_patterns: n_samp,
        samp_len_mean,
        samp_len_dev,
        samp_loc_mean,
        samp_loc_dev,
        seed,
    };
    let sc = build_scenario_parallel(&params, workers.max(1)).map_err(value_error)?;
    Ok((
        sc.sequence.to_string(),
        sc.patterns.iter().map(ToString::to_string).collect(),
    ))
}

#[pymodule]
fn pydnasearch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLcg>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(find_first, m)?)?;
    m.add_function(wrap_pyfunction!(search_sequential, m)?)?;
    m.add_function(wrap_pyfunction!(search_parallel, m)?)?;
    m.add_function(wrap_pyfunction!(run_distributed, m)?)?;
    m.add_function(wrap_pyfunction!(build_scenario, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_inputs_rejects_bad_symbols() {
        assert!(parse_inputs("GATTACA", vec!["TTA".into()]).is_ok());
        assert!(parse_inputs("GATXACA", vec![]).is_err());
        assert!(parse_inputs("GATTACA", vec![String::new()]).is_err());
    }
}
