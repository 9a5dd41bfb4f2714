//! Least-nonresidue scans with segment-level checkpointing.
//!
//! The checkpoint file holds the last prime whose row is durably in the
//! output, as plain decimal text. It is rewritten (write + rename) after
//! each segment. On resume the output is first trimmed back to that prime,
//! so an interruption between the two writes cannot duplicate rows.

use std::fs::{self, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qrcensus::analysis::{bound_table, scan_records, BoundSummary, ScanRecord};
use qrcensus::{Mod4Class, PrimeModulus};

use crate::error::CliError;
use crate::report::{Report, Row};

pub const SCAN_COLUMNS: [&str; 8] = [
    "p",
    "n_p",
    "k_star",
    "ratio",
    "gauss_bound",
    "vinogradov_bound",
    "ankeny_shape",
    "burgess_shape",
];

/// Integers covered between checkpoints.
pub const CHECKPOINT_SEGMENT: u64 = 1 << 22;

pub fn scan_row(r: &ScanRecord) -> Row {
    vec![
        r.p.get().into(),
        r.n_p.into(),
        r.k_star.into(),
        r.ratio.into(),
        r.gauss_bound.into(),
        r.vinogradov_bound.into(),
        r.ankeny_shape.into(),
        r.burgess_shape.into(),
    ]
}

pub fn read_checkpoint(path: &Path) -> Result<u64, CliError> {
    let text = fs::read_to_string(path)?;
    text.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("malformed checkpoint file {}", path.display())))
}

pub fn write_checkpoint(path: &Path, last_prime: u64) -> Result<(), CliError> {
    let mut tmp = PathBuf::from(path);
    tmp.as_mut_os_string().push(".tmp");
    fs::write(&tmp, format!("{last_prime}\n"))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Splits `[lo, hi]` into checkpoint segments.
fn segments(lo: u64, hi: u64) -> impl Iterator<Item = (u64, u64)> {
    let mut next = Some(lo).filter(|&l| l <= hi);
    std::iter::from_fn(move || {
        let a = next?;
        let b = a.saturating_add(CHECKPOINT_SEGMENT - 1).min(hi);
        next = b.checked_add(1).filter(|&n| n <= hi);
        Some((a, b))
    })
}

/// Keeps the header and the rows with `p <= last`; returns the records
/// reconstructed from the kept rows.
fn trim_output(path: &Path, last: u64) -> Result<Vec<ScanRecord>, CliError> {
    let header = Report::new(&SCAN_COLUMNS).csv_header();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(e.into()),
    };
    let mut kept = header.clone();
    let mut records = Vec::new();
    for line in text.lines().skip(1) {
        let mut fields = line.split(',');
        let parsed = fields
            .next()
            .and_then(|p| p.parse::<u64>().ok())
            .zip(fields.next().and_then(|n| n.parse::<u64>().ok()));
        let Some((p, n_p)) = parsed else {
            return Err(CliError::Usage(format!(
                "cannot resume: unexpected row {line:?} in {}",
                path.display()
            )));
        };
        if p <= last {
            let p = PrimeModulus::new(p)?;
            records.push(ScanRecord::with_nonresidue(p, n_p));
            kept.push_str(line);
            kept.push('\n');
        }
    }
    let mut tmp = PathBuf::from(path);
    tmp.as_mut_os_string().push(".tmp");
    fs::write(&tmp, kept)?;
    fs::rename(&tmp, path)?;
    Ok(records)
}

/// Streams CSV rows for `[min, max]` to `out`, checkpointing after each
/// segment. Returns every record of the range, including resumed ones.
pub fn scan_to_csv_file(
    min: u64,
    max: u64,
    class_filter: Option<Mod4Class>,
    out: &Path,
    checkpoint: Option<&Path>,
) -> Result<Vec<ScanRecord>, CliError> {
    if min > max {
        return Err(CliError::Usage(format!("empty range: min {min} > max {max}")));
    }
    let resume = match checkpoint {
        Some(cp) if cp.exists() => Some(read_checkpoint(cp)?),
        _ => None,
    };
    let (mut records, start) = match resume {
        Some(last) => (trim_output(out, last)?, min.max(last.saturating_add(1))),
        None => {
            fs::write(out, Report::new(&SCAN_COLUMNS).csv_header())?;
            (Vec::new(), min)
        }
    };
    let mut file = BufWriter::new(OpenOptions::new().append(true).open(out)?);
    if resume.is_some_and(|last| last >= max) {
        return Ok(records);
    }
    for (a, b) in segments(start, max) {
        let recs = scan_records(a, b, class_filter)?;
        let mut seg = Report::new(&SCAN_COLUMNS);
        recs.iter().for_each(|r| seg.push(scan_row(r)));
        file.write_all(seg.csv_rows().as_bytes())?;
        file.flush()?;
        file.get_ref().sync_data()?;
        if let (Some(cp), Some(last)) = (checkpoint, recs.last()) {
            write_checkpoint(cp, last.p.get())?;
        }
        records.extend(recs);
    }
    Ok(records)
}

pub fn scan_report(
    min: u64,
    max: u64,
    class_filter: Option<Mod4Class>,
) -> Result<(Report, Vec<ScanRecord>), CliError> {
    if min > max {
        return Err(CliError::Usage(format!("empty range: min {min} > max {max}")));
    }
    let records = scan_records(min, max, class_filter)?;
    let mut report = Report::new(&SCAN_COLUMNS);
    records.iter().for_each(|r| report.push(scan_row(r)));
    Ok((report, records))
}

/// Human-readable summary lines for stderr.
pub fn summary_lines(records: &[ScanRecord]) -> (Option<BoundSummary>, String) {
    let Ok(s) = bound_table(records) else {
        return (None, "summary: no primes in range\n".to_string());
    };
    let mut text = format!(
        "summary: records={} max_ratio={} at p={} (n_p={}) gauss_checked={} gauss_violations={}\n",
        s.records,
        crate::report::fmt_sig6(s.max_ratio),
        s.max_ratio_p,
        s.max_ratio_n_p,
        s.gauss_checked,
        s.violations_gauss
    );
    for d in &s.decade_maxima {
        text.push_str(&format!(
            "summary: decade 10^{} max n_p={} at p={}\n",
            d.decade, d.n_p, d.p
        ));
    }
    (Some(s), text)
}
