//! Command-line front end for the `qrcensus` library.
//!
//! Exit status: 0 on success, 1 when a verification check fails, 2 on a
//! usage or configuration error, 3 on a resource error (memory budget,
//! `--k-max`, I/O).

pub mod config;
pub mod error;
pub mod report;
pub mod scan;
pub mod verify;

use std::fs;
use std::io::Write;

use clap::Parser;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qrcensus::analysis::{threshold_experiment_with, ThresholdReport};
use qrcensus::{
    census_with_cap, count_ap, count_pattern, primes_in_range, CharacterTable, Mod4Class,
    Pattern, PrimeModulus,
};

pub use config::{Command, Common, Format, KindArg, RunConfig, Suite};
pub use error::CliError;
pub use report::{Cell, Report};

pub const TOOL_NAME: &str = "qrcensus";

type Out<'a> = &'a mut (dyn Write + Send);

/// Parses `args` (including the program name) and runs, returning the exit
/// status.
pub fn main_with_args<I, T>(args: I, stdout: Out<'_>, stderr: Out<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(&cfg, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Exit status and captured output of one invocation.
#[derive(Debug, Clone)]
pub struct Captured {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_captured<I, T>(args: I) -> Captured
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with_args(args, &mut out, &mut err);
    Captured {
        code,
        stdout: String::from_utf8(out).expect("reports are UTF-8"),
        stderr: String::from_utf8(err).expect("diagnostics are UTF-8"),
    }
}

pub fn run(cfg: &RunConfig, stdout: Out<'_>, stderr: Out<'_>) -> Result<(), CliError> {
    let threads = match cfg.common.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Resource(e.to_string()))?;
    pool.install(|| dispatch(cfg, stdout, stderr))
}

fn emit(report: &Report, cfg: &RunConfig, stdout: Out<'_>) -> Result<(), CliError> {
    let text = match cfg.common.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(meta(cfg)),
    };
    match &cfg.common.out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn meta(cfg: &RunConfig) -> serde_json::Value {
    serde_json::json!({
        "tool": TOOL_NAME,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
    })
}

fn modulus(p: u64) -> Result<PrimeModulus, CliError> {
    PrimeModulus::new(p).map_err(|e| CliError::Usage(e.to_string()))
}

fn check_k_max(k: u32, k_max: u32) -> Result<(), CliError> {
    if k > k_max {
        return Err(CliError::Resource(format!(
            "census length {k} exceeds --k-max {k_max}"
        )));
    }
    Ok(())
}

fn dispatch(cfg: &RunConfig, stdout: Out<'_>, stderr: Out<'_>) -> Result<(), CliError> {
    let common = &cfg.common;
    match &cfg.command {
        Command::Census { p, k, pattern } => {
            let report = census_report(*p, *k, pattern.as_deref(), common)?;
            emit(&report, cfg, stdout)
        }
        Command::ApCount { p, k, d, kind } => {
            let table = CharacterTable::build(modulus(*p)?, common.memory_budget)?;
            let ap = count_ap(&table, *k, *d, (*kind).into())?;
            let mut report = Report::new(&["p", "k", "d", "kind", "count"]);
            report.push(vec![
                ap.p.get().into(),
                ap.k.into(),
                ap.d.into(),
                ap.kind.as_str().into(),
                ap.count.into(),
            ]);
            emit(&report, cfg, stdout)
        }
        Command::Verify {
            max_p,
            suite,
            shds_cap,
        } => {
            let run = verify_report(*max_p, *suite, *shds_cap, common, stderr)?;
            for row in run.failed_rows() {
                let fields: Vec<String> = verify::VERIFY_COLUMNS
                    .iter()
                    .zip(row)
                    .take(8)
                    .map(|(c, v)| format!("{c}={}", v.render()))
                    .collect();
                writeln!(stderr, "FAIL {}", fields.join(" "))?;
            }
            emit(&run.report, cfg, stdout)?;
            if run.failures > 0 {
                return Err(CliError::VerificationFailed {
                    failures: run.failures,
                });
            }
            Ok(())
        }
        Command::ScanNonresidue {
            min,
            max,
            class3_only,
            checkpoint,
        } => {
            let filter = class3_only.then_some(Mod4Class::Three);
            let records = match checkpoint {
                Some(cp) => {
                    let Some(out) = &common.out else {
                        return Err(CliError::Usage("--checkpoint requires --out".into()));
                    };
                    if common.format != Format::Csv {
                        return Err(CliError::Usage(
                            "--checkpoint is only supported with --format csv".into(),
                        ));
                    }
                    scan::scan_to_csv_file(*min, *max, filter, out, Some(cp))?
                }
                None => {
                    let (report, records) = scan::scan_report(*min, *max, filter)?;
                    emit(&report, cfg, stdout)?;
                    records
                }
            };
            let (summary, text) = scan::summary_lines(&records);
            stderr.write_all(text.as_bytes())?;
            if let Some(s) = summary.filter(|s| s.violations_gauss > 0) {
                return Err(CliError::VerificationFailed {
                    failures: s.violations_gauss as usize,
                });
            }
            Ok(())
        }
        Command::Threshold {
            p,
            range,
            sample,
            seed,
            class3_only,
        } => {
            let primes = match (p, range, sample) {
                (Some(p), None, None) => vec![modulus(*p)?],
                (None, Some(r), Some(n)) => {
                    let filter = class3_only.then_some(Mod4Class::Three);
                    sample_primes(r[0], r[1], filter, *n, *seed)?
                }
                _ => {
                    return Err(CliError::Usage(
                        "threshold needs either --p P or --range A B --sample N".into(),
                    ))
                }
            };
            let report = threshold_report(&primes, common)?;
            emit(&report, cfg, stdout)
        }
    }
}

pub const CENSUS_COLUMNS: [&str; 4] = ["pattern", "count", "expected", "deviation"];

fn census_row(pat: Pattern, count: u64, p: u64) -> report::Row {
    let expected = p as f64 / (pat.len() as f64).exp2();
    vec![
        pat.to_string().into(),
        count.into(),
        expected.into(),
        (count as f64 - expected).into(),
    ]
}

/// Full census rows in ascending code order, or a single pattern's row.
pub fn census_report(
    p: u64,
    k: Option<u32>,
    pattern: Option<&str>,
    common: &Common,
) -> Result<Report, CliError> {
    let p = modulus(p)?;
    let mut report = Report::new(&CENSUS_COLUMNS);
    match pattern {
        Some(s) => {
            let pat: Pattern = s.parse()?;
            if k.is_some_and(|k| k != pat.len()) {
                return Err(CliError::Usage(format!(
                    "--k {} disagrees with pattern length {}",
                    k.unwrap(),
                    pat.len()
                )));
            }
            let table = CharacterTable::build(p, common.memory_budget)?;
            report.push(census_row(pat, count_pattern(&table, pat)?, p.get()));
        }
        None => {
            let k = k.ok_or_else(|| CliError::Usage("census needs --k or --pattern".into()))?;
            check_k_max(k, common.k_max)?;
            let table = CharacterTable::build(p, common.memory_budget)?;
            let c = census_with_cap(&table, k, common.k_max)?;
            for (pat, n) in c.iter() {
                report.push(census_row(pat, n, p.get()));
            }
        }
    }
    Ok(report)
}

/// Runs the selected suites over every qualifying prime up to `max_p`.
pub fn verify_report(
    max_p: u64,
    suite: Suite,
    shds_cap: u64,
    common: &Common,
    stderr: Out<'_>,
) -> Result<verify::SuiteRun, CliError> {
    let odd: Vec<PrimeModulus> = if max_p >= 3 {
        primes_in_range(3, max_p, None)?.moduli().collect()
    } else {
        Vec::new()
    };
    let class3: Vec<PrimeModulus> = odd
        .iter()
        .copied()
        .filter(|p| p.class_mod4() == Mod4Class::Three)
        .collect();
    let wants = |s: Suite| suite == s || suite == Suite::All;
    let mut run = verify::SuiteRun {
        report: Report::new(&verify::VERIFY_COLUMNS),
        failures: 0,
    };
    if wants(Suite::Shds) {
        if max_p > shds_cap {
            writeln!(
                stderr,
                "note: shds suite limited to p <= {shds_cap} (--shds-cap)"
            )?;
        }
        let ps: Vec<PrimeModulus> = class3.iter().copied().filter(|p| p.get() <= shds_cap).collect();
        run.append(verify::shds_suite(&ps, shds_cap)?);
    }
    if wants(Suite::Ap) {
        let ps: Vec<PrimeModulus> = class3.iter().copied().filter(|p| p.get() >= 7).collect();
        run.append(verify::ap_suite(&ps, common.memory_budget)?);
    }
    if wants(Suite::Dichotomy) {
        check_k_max(3, common.k_max)?;
        run.append(verify::dichotomy_suite(&class3, common.memory_budget, common.k_max)?);
    }
    if wants(Suite::Peralta) {
        check_k_max(*verify::SWEEP_K.end(), common.k_max)?;
        run.append(verify::peralta_suite(
            &odd,
            verify::SWEEP_K,
            common.memory_budget,
            common.k_max,
        )?);
    }
    if wants(Suite::Duality) {
        check_k_max(*verify::SWEEP_K.end(), common.k_max)?;
        run.append(verify::duality_suite(
            &class3,
            verify::SWEEP_K,
            common.memory_budget,
            common.k_max,
        )?);
    }
    Ok(run)
}

/// `n` distinct primes drawn uniformly from `[lo, hi]` with a seeded
/// ChaCha8 stream, returned in ascending order.
pub fn sample_primes(
    lo: u64,
    hi: u64,
    filter: Option<Mod4Class>,
    n: usize,
    seed: u64,
) -> Result<Vec<PrimeModulus>, CliError> {
    let pool: Vec<PrimeModulus> = primes_in_range(lo.max(2), hi, filter)?.moduli().collect();
    if n > pool.len() {
        return Err(CliError::Usage(format!(
            "cannot sample {n} primes from {} available in [{lo}, {hi}]",
            pool.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<PrimeModulus> = rand::seq::index::sample(&mut rng, pool.len(), n)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    picked.sort();
    Ok(picked)
}

pub const THRESHOLD_COLUMNS: [&str; 7] = [
    "p",
    "k_star",
    "windows",
    "baseline_floor",
    "census_max",
    "census_nonzero",
    "histogram",
];

fn histogram_text(r: &ThresholdReport) -> String {
    r.histogram
        .iter()
        .map(|(v, f)| format!("{v}:{f}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn threshold_rows(
    primes: &[PrimeModulus],
    common: &Common,
) -> Result<Vec<ThresholdReport>, CliError> {
    use rayon::prelude::*;
    for p in primes {
        check_k_max(p.ceil_log2(), common.k_max)?;
    }
    Ok(primes
        .par_iter()
        .map(|&p| threshold_experiment_with(p, common.k_max, common.memory_budget))
        .collect::<Result<Vec<_>, _>>()?)
}

pub fn threshold_report(primes: &[PrimeModulus], common: &Common) -> Result<Report, CliError> {
    let mut report = Report::new(&THRESHOLD_COLUMNS);
    for r in threshold_rows(primes, common)? {
        report.push(vec![
            r.p.get().into(),
            r.k_star.into(),
            (r.p.get() - r.k_star as u64).into(),
            r.baseline_floor.into(),
            r.census_max.into(),
            r.census_nonzero.into(),
            histogram_text(&r).into(),
        ]);
    }
    Ok(report)
}

/// Default options, as if no global flags were given.
pub fn default_common() -> Common {
    Common {
        format: Format::Csv,
        out: None,
        threads: None,
        memory_budget: qrcensus::DEFAULT_MEMORY_BUDGET,
        k_max: qrcensus::DEFAULT_K_MAX,
    }
}
