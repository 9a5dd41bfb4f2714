//! Python bindings, importable as `qrcensus`.
//!
//! Invalid arguments raise `ValueError`; exceeding the memory budget or
//! `k_max` raises `qrcensus.ResourceError` (a `MemoryError`). Long-running
//! calls release the GIL.

use pyo3::create_exception;
use pyo3::exceptions::{PyMemoryError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qrcensus::analysis::{
    self, bound_table, scan_records, AnalysisError, ScanRecord, DEFAULT_SHDS_CAP,
};
use qrcensus::patterns::census_audit as core_census_audit;
use qrcensus::{
    ApKind, CharacterValue, Mod4Class, NtError, Pattern, PatternError, TableError,
    DEFAULT_K_MAX, DEFAULT_MEMORY_BUDGET,
};

create_exception!(qrcensus, ResourceError, PyMemoryError);

fn nt_err(e: NtError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pattern_err(e: PatternError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn table_err(e: TableError) -> PyErr {
    ResourceError::new_err(e.to_string())
}

fn analysis_err(e: AnalysisError) -> PyErr {
    match e {
        AnalysisError::Table(e) => table_err(e),
        AnalysisError::KStarTooLarge { .. } | AnalysisError::AboveCap { .. } => {
            ResourceError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn modulus(p: u64) -> PyResult<qrcensus::PrimeModulus> {
    qrcensus::PrimeModulus::new(p).map_err(nt_err)
}

fn class_filter(class_mod4: Option<u64>) -> PyResult<Option<Mod4Class>> {
    match class_mod4 {
        None => Ok(None),
        Some(c) => match Mod4Class::of(c) {
            Some(m) if c < 4 => Ok(Some(m)),
            _ => Err(PyValueError::new_err(format!("class_mod4 must be 1 or 3, got {c}"))),
        },
    }
}

fn parse_pattern(s: &str) -> PyResult<Pattern> {
    s.parse().map_err(pattern_err)
}

/// An odd prime modulus.
#[pyclass(frozen, eq, ord, hash, from_py_object, module = "qrcensus")]
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct PrimeModulus(qrcensus::PrimeModulus);

#[pymethods]
impl PrimeModulus {
    #[new]
    fn new(p: u64) -> PyResult<Self> {
        modulus(p).map(PrimeModulus)
    }

    #[getter]
    fn p(&self) -> u64 {
        self.0.get()
    }

    #[getter]
    fn class_mod4(&self) -> u64 {
        self.0.class_mod4().value()
    }

    #[getter]
    fn class_mod8(&self) -> u8 {
        self.0.class_mod8()
    }

    /// `⌈log₂ p⌉`
    #[getter]
    fn ceil_log2(&self) -> u32 {
        self.0.ceil_log2()
    }

    fn __int__(&self) -> u64 {
        self.0.get()
    }

    fn __repr__(&self) -> String {
        format!("PrimeModulus({})", self.0)
    }
}

/// Bit-packed quadratic character of `Z_p`.
#[pyclass(frozen, module = "qrcensus")]
struct CharacterTable(qrcensus::CharacterTable);

#[pymethods]
impl CharacterTable {
    #[new]
    #[pyo3(signature = (p, memory_budget = DEFAULT_MEMORY_BUDGET))]
    fn new(py: Python<'_>, p: u64, memory_budget: u64) -> PyResult<Self> {
        let p = modulus(p)?;
        py.detach(|| qrcensus::CharacterTable::build(p, memory_budget))
            .map(CharacterTable)
            .map_err(table_err)
    }

    #[getter]
    fn p(&self) -> u64 {
        self.0.p()
    }

    /// Legendre symbol `(a/p)` as -1, 0 or 1.
    fn chi(&self, a: i64) -> i8 {
        self.0.chi(a).as_i8()
    }

    fn is_residue(&self, a: i64) -> bool {
        self.0.chi(a) == CharacterValue::Residue
    }

    fn residue_count(&self) -> u64 {
        self.0.residue_count()
    }

    fn residues(&self) -> Vec<u64> {
        self.0.residues().collect()
    }

    #[pyo3(signature = (k, k_max = DEFAULT_K_MAX))]
    fn census(&self, py: Python<'_>, k: u32, k_max: u32) -> PyResult<PatternCensus> {
        py.detach(|| qrcensus::census_with_cap(&self.0, k, k_max))
            .map(PatternCensus)
            .map_err(pattern_err)
    }

    /// Occurrences of one pattern, given as an `r`/`n` string.
    fn count_pattern(&self, py: Python<'_>, pattern: &str) -> PyResult<u64> {
        let pat = parse_pattern(pattern)?;
        py.detach(|| qrcensus::count_pattern(&self.0, pat)).map_err(pattern_err)
    }

    /// Starts `a` whose progression `a, a+d, …, a+(k-1)d` is all residues
    /// (`kind="residue"`) or all nonresidues (`kind="nonresidue"`).
    fn count_ap(&self, py: Python<'_>, k: u64, d: u64, kind: &str) -> PyResult<u64> {
        let kind: ApKind = kind.parse().map_err(PyValueError::new_err)?;
        py.detach(|| qrcensus::count_ap(&self.0, k, d, kind))
            .map(|c| c.count)
            .map_err(pattern_err)
    }

    fn __len__(&self) -> usize {
        self.0.p() as usize
    }

    fn __repr__(&self) -> String {
        format!("CharacterTable(p={})", self.0.p())
    }
}

/// Counts of every length-k residue pattern among consecutive windows.
#[pyclass(frozen, module = "qrcensus")]
struct PatternCensus(qrcensus::PatternCensus);

#[pymethods]
impl PatternCensus {
    #[getter]
    fn p(&self) -> u64 {
        self.0.p()
    }

    #[getter]
    fn k(&self) -> u32 {
        self.0.k()
    }

    /// Counts indexed by pattern code (earliest element in the high bit,
    /// residue = 1).
    #[getter]
    fn counts(&self) -> Vec<u64> {
        self.0.counts().to_vec()
    }

    fn count(&self, pattern: &str) -> PyResult<u64> {
        let pat = parse_pattern(pattern)?;
        if pat.len() != self.0.k() {
            return Err(PyValueError::new_err(format!(
                "pattern {pat} has length {}, census is for k = {}",
                pat.len(),
                self.0.k()
            )));
        }
        Ok(self.0.count(pat))
    }

    fn total(&self) -> u64 {
        self.0.total()
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (pat, n) in self.0.iter() {
            d.set_item(pat.to_string(), n)?;
        }
        Ok(d)
    }

    /// Range check `|count - p/2^k| <= k(3 + √p)` over all patterns.
    fn peralta<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = analysis::peralta_check(&self.0);
        let d = PyDict::new(py);
        d.set_item("all_in_range", r.all_in_range)?;
        d.set_item("worst_deviation", r.worst_deviation_f64())?;
        d.set_item("worst_pattern", r.worst_pattern.to_string())?;
        d.set_item("bound", r.bound)?;
        let out: Vec<String> = r.out_of_range.iter().map(Pattern::to_string).collect();
        d.set_item("out_of_range", out)?;
        Ok(d)
    }

    fn deviations<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = analysis::deviations(&self.0).map_err(analysis_err)?;
        let d = PyDict::new(py);
        d.set_item("baseline_floor", r.baseline_floor)?;
        d.set_item("type_sums", r.type_sums.to_vec())?;
        d.set_item("e_sum_per_type", r.e_sum_per_type.to_vec())?;
        d.set_item("e_min", r.e_min)?;
        d.set_item("e_max", r.e_max)?;
        d.set_item("pair_count", r.pair_count)?;
        d.set_item("s1_discrepancy", r.s1_discrepancy)?;
        d.set_item("s4_discrepancy", r.s4_discrepancy)?;
        d.set_item("edge_bracket_ok", r.edge_bracket_ok())?;
        Ok(d)
    }

    fn duality_ok(&self) -> PyResult<bool> {
        analysis::duality_check(&self.0).map_err(analysis_err)
    }

    fn dichotomy_ok(&self) -> PyResult<bool> {
        analysis::dichotomy_check(&self.0).map_err(analysis_err)
    }

    fn __len__(&self) -> usize {
        self.0.counts().len()
    }

    fn __repr__(&self) -> String {
        format!("PatternCensus(p={}, k={})", self.0.p(), self.0.k())
    }
}

fn scan_dict<'py>(py: Python<'py>, r: &ScanRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("p", r.p.get())?;
    d.set_item("n_p", r.n_p)?;
    d.set_item("k_star", r.k_star)?;
    d.set_item("ratio", r.ratio)?;
    d.set_item("gauss_bound", r.gauss_bound)?;
    d.set_item("vinogradov_bound", r.vinogradov_bound)?;
    d.set_item("ankeny_shape", r.ankeny_shape)?;
    d.set_item("burgess_shape", r.burgess_shape)?;
    Ok(d)
}

#[pyfunction]
fn is_prime(n: u64) -> bool {
    qrcensus::is_prime(n)
}

/// Legendre symbol by Euler's criterion (`method="euler"`) or by
/// reciprocity (`method="reciprocity"`).
#[pyfunction]
#[pyo3(signature = (a, p, method = "euler"))]
fn legendre(a: i64, p: u64, method: &str) -> PyResult<i8> {
    let p = modulus(p)?;
    let v = match method {
        "euler" => qrcensus::legendre_euler(a, p),
        "reciprocity" => qrcensus::legendre_reciprocity(a, p),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    Ok(v.as_i8())
}

/// Primes in `[lo, hi]`, optionally only those `≡ class_mod4 (mod 4)`.
#[pyfunction]
#[pyo3(signature = (lo, hi, class_mod4 = None))]
fn primes(py: Python<'_>, lo: u64, hi: u64, class_mod4: Option<u64>) -> PyResult<Vec<u64>> {
    let filter = class_filter(class_mod4)?;
    py.detach(|| qrcensus::primes_in_range(lo, hi, filter).map(Iterator::collect))
        .map_err(nt_err)
}

#[pyfunction]
fn least_nonresidue(p: u64) -> PyResult<u64> {
    Ok(qrcensus::least_nonresidue(modulus(p)?))
}

/// Census of all length-k patterns mod p.
#[pyfunction]
#[pyo3(signature = (p, k, k_max = DEFAULT_K_MAX, memory_budget = DEFAULT_MEMORY_BUDGET))]
fn census(py: Python<'_>, p: u64, k: u32, k_max: u32, memory_budget: u64) -> PyResult<PatternCensus> {
    CharacterTable::new(py, p, memory_budget)?.census(py, k, k_max)
}

/// Brute-force skew Hadamard difference set check for `p ≡ 3 (mod 4)`.
#[pyfunction]
#[pyo3(signature = (p, cap = DEFAULT_SHDS_CAP))]
fn verify_shds<'py>(py: Python<'py>, p: u64, cap: u64) -> PyResult<Bound<'py, PyDict>> {
    let p = modulus(p)?;
    let r = py.detach(|| analysis::verify_shds(p, cap)).map_err(analysis_err)?;
    let d = PyDict::new(py);
    d.set_item("is_shds", r.is_shds)?;
    d.set_item("lambda_expected", r.lambda_expected)?;
    d.set_item("multiset_min", r.multiset_min)?;
    d.set_item("multiset_max", r.multiset_max)?;
    d.set_item("partition_ok", r.partition_ok)?;
    Ok(d)
}

/// Census at `k = ⌈log₂ p⌉`, summarized as a count histogram.
#[pyfunction]
#[pyo3(signature = (p, k_max = DEFAULT_K_MAX, memory_budget = DEFAULT_MEMORY_BUDGET))]
fn threshold<'py>(
    py: Python<'py>,
    p: u64,
    k_max: u32,
    memory_budget: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = modulus(p)?;
    let r = py
        .detach(|| analysis::threshold_experiment_with(p, k_max, memory_budget))
        .map_err(analysis_err)?;
    let d = PyDict::new(py);
    d.set_item("k_star", r.k_star)?;
    d.set_item("baseline_floor", r.baseline_floor)?;
    d.set_item("census_max", r.census_max)?;
    d.set_item("census_nonzero", r.census_nonzero)?;
    d.set_item("histogram", r.histogram.clone())?;
    d.set_item("histogram_mass", r.histogram_mass())?;
    Ok(d)
}

/// Least nonresidue and bound columns for every odd prime in `[lo, hi]`.
#[pyfunction]
#[pyo3(signature = (lo, hi, class_mod4 = None))]
fn scan<'py>(
    py: Python<'py>,
    lo: u64,
    hi: u64,
    class_mod4: Option<u64>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let filter = class_filter(class_mod4)?;
    let records = py.detach(|| scan_records(lo, hi, filter)).map_err(analysis_err)?;
    records.iter().map(|r| scan_dict(py, r)).collect()
}

/// Ratio maxima and Gauss-bound check over a scan of `[lo, hi]`.
#[pyfunction]
#[pyo3(signature = (lo, hi, class_mod4 = None))]
fn bound_summary<'py>(
    py: Python<'py>,
    lo: u64,
    hi: u64,
    class_mod4: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let filter = class_filter(class_mod4)?;
    let s = py
        .detach(|| scan_records(lo, hi, filter).and_then(|r| bound_table(&r)))
        .map_err(analysis_err)?;
    let d = PyDict::new(py);
    d.set_item("records", s.records)?;
    d.set_item("max_ratio", s.max_ratio)?;
    d.set_item("max_ratio_p", s.max_ratio_p)?;
    d.set_item("max_ratio_n_p", s.max_ratio_n_p)?;
    d.set_item("gauss_checked", s.gauss_checked)?;
    d.set_item("violations_gauss", s.violations_gauss)?;
    let decades: Vec<(u32, u64, u64)> =
        s.decade_maxima.iter().map(|m| (m.decade, m.p, m.n_p)).collect();
    d.set_item("decade_maxima", decades)?;
    Ok(d)
}

/// `(runs, conservation_failures)` over every census in this process.
#[pyfunction]
fn census_audit() -> (u64, u64) {
    let a = core_census_audit();
    (a.runs, a.conservation_failures)
}

#[pymodule]
#[pyo3(name = "qrcensus")]
pub fn qrcensus_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ResourceError", m.py().get_type::<ResourceError>())?;
    m.add("DEFAULT_MEMORY_BUDGET", DEFAULT_MEMORY_BUDGET)?;
    m.add("DEFAULT_K_MAX", DEFAULT_K_MAX)?;
    m.add_class::<PrimeModulus>()?;
    m.add_class::<CharacterTable>()?;
    m.add_class::<PatternCensus>()?;
    m.add_function(wrap_pyfunction!(is_prime, m)?)?;
    m.add_function(wrap_pyfunction!(legendre, m)?)?;
    m.add_function(wrap_pyfunction!(primes, m)?)?;
    m.add_function(wrap_pyfunction!(least_nonresidue, m)?)?;
    m.add_function(wrap_pyfunction!(census, m)?)?;
    m.add_function(wrap_pyfunction!(verify_shds, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(bound_summary, m)?)?;
    m.add_function(wrap_pyfunction!(census_audit, m)?)?;
    Ok(())
}
