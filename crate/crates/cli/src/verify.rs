//! Verification suites over lists of primes. Every suite emits rows in the
//! shared schema `suite,p,k,d,kind,pattern,expected,actual,pass`, ordered by
//! prime and then by the suite's own parameters regardless of thread count.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rayon::prelude::*;

use qrcensus::analysis::{
    dichotomy_values, duality_violations, expected_ap_count, peralta_check, verify_shds,
};
use qrcensus::{census_with_cap, count_ap, ApKind, CharacterTable, Pattern, PrimeModulus};

use crate::error::CliError;
use crate::report::{fmt_sig6, Cell, Report, Row};

pub const VERIFY_COLUMNS: [&str; 9] = [
    "suite", "p", "k", "d", "kind", "pattern", "expected", "actual", "pass",
];

/// Length range swept by the Peralta and duality suites.
pub const SWEEP_K: RangeInclusive<u32> = 2..=12;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub report: Report,
    pub failures: usize,
}

impl SuiteRun {
    fn from_rows(rows: Vec<Row>) -> Self {
        let mut report = Report::new(&VERIFY_COLUMNS);
        let mut failures = 0;
        for r in rows {
            failures += (r[8] == Cell::Bool(false)) as usize;
            report.push(r);
        }
        SuiteRun { report, failures }
    }

    pub fn append(&mut self, other: SuiteRun) {
        self.report.rows.extend(other.report.rows);
        self.failures += other.failures;
    }

    pub fn failed_rows(&self) -> impl Iterator<Item = &Row> {
        self.report.rows.iter().filter(|r| r[8] == Cell::Bool(false))
    }
}

struct Check {
    suite: &'static str,
    p: u64,
    k: Option<u64>,
    d: Option<u64>,
    kind: Option<ApKind>,
    pattern: Option<Pattern>,
}

impl Check {
    fn new(suite: &'static str, p: PrimeModulus) -> Self {
        Check {
            suite,
            p: p.get(),
            k: None,
            d: None,
            kind: None,
            pattern: None,
        }
    }

    fn k(mut self, k: impl Into<u64>) -> Self {
        self.k = Some(k.into());
        self
    }

    fn row(&self, expected: String, actual: String, pass: bool) -> Row {
        vec![
            self.suite.into(),
            self.p.into(),
            self.k.into(),
            self.d.into(),
            self.kind.map(|k| k.as_str()).into(),
            self.pattern.map(|p| p.to_string()).into(),
            expected.into(),
            actual.into(),
            pass.into(),
        ]
    }
}

fn per_prime<F>(primes: &[PrimeModulus], f: F) -> Result<SuiteRun, CliError>
where
    F: Fn(PrimeModulus) -> Result<Vec<Row>, CliError> + Sync,
{
    let parts: Vec<Vec<Row>> = primes
        .par_iter()
        .map(|&p| f(p))
        .collect::<Result<_, _>>()?;
    Ok(SuiteRun::from_rows(parts.into_iter().flatten().collect()))
}

fn table(p: PrimeModulus, budget: u64) -> Result<CharacterTable, CliError> {
    Ok(CharacterTable::build(p, budget)?)
}

pub fn shds_suite(primes: &[PrimeModulus], cap: u64) -> Result<SuiteRun, CliError> {
    per_prime(primes, |p| {
        let r = verify_shds(p, cap)?;
        let check = Check::new("shds", p);
        let mut actual = format!("{}..{}", r.multiset_min, r.multiset_max);
        if !r.partition_ok {
            actual.push_str(" partition-broken");
        }
        Ok(vec![check.row(
            format!("{0}..{0}", r.lambda_expected),
            actual,
            r.is_shds,
        )])
    })
}

/// The common differences checked for each prime.
pub fn ap_differences(p: PrimeModulus) -> Vec<u64> {
    let n = p.get();
    let set: BTreeSet<u64> = [1, 2, 5, (n - 1) / 2, n - 1]
        .into_iter()
        .filter(|&d| d % n != 0)
        .collect();
    set.into_iter().collect()
}

pub fn ap_suite(primes: &[PrimeModulus], budget: u64) -> Result<SuiteRun, CliError> {
    per_prime(primes, |p| {
        let t = table(p, budget)?;
        let mut rows = Vec::new();
        for k in [2u64, 3] {
            let expected = expected_ap_count(p, k)?;
            for d in ap_differences(p) {
                for kind in [ApKind::Residue, ApKind::Nonresidue] {
                    let got = count_ap(&t, k, d, kind)?.count;
                    let check = Check {
                        d: Some(d),
                        kind: Some(kind),
                        ..Check::new("ap", p).k(k)
                    };
                    rows.push(check.row(expected.to_string(), got.to_string(), got == expected));
                }
            }
        }
        Ok(rows)
    })
}

pub fn dichotomy_suite(
    primes: &[PrimeModulus],
    budget: u64,
    k_max: u32,
) -> Result<SuiteRun, CliError> {
    per_prime(primes, |p| {
        let t = table(p, budget)?;
        let mut rows = Vec::new();
        for k in [2u32, 3] {
            if k as u64 > p.get() - 2 {
                continue;
            }
            let c = census_with_cap(&t, k, k_max)?;
            let (lo, hi) = dichotomy_values(p, k)?;
            let expected = format!("{lo}..{hi}");
            let min = c.counts().iter().min().unwrap();
            let max = c.counts().iter().max().unwrap();
            let bad: Vec<(Pattern, u64)> =
                c.iter().filter(|&(_, n)| n != lo && n != hi).collect();
            rows.push(Check::new("dichotomy", p).k(k).row(
                expected.clone(),
                format!("{min}..{max}"),
                bad.is_empty(),
            ));
            for (pat, n) in bad {
                let check = Check {
                    pattern: Some(pat),
                    ..Check::new("dichotomy", p).k(k)
                };
                rows.push(check.row(expected.clone(), n.to_string(), false));
            }
        }
        Ok(rows)
    })
}

pub fn peralta_suite(
    primes: &[PrimeModulus],
    ks: RangeInclusive<u32>,
    budget: u64,
    k_max: u32,
) -> Result<SuiteRun, CliError> {
    per_prime(primes, |p| {
        let t = table(p, budget)?;
        let mut rows = Vec::new();
        for k in ks.clone() {
            if k as u64 > p.get() - 2 {
                break;
            }
            let c = census_with_cap(&t, k, k_max)?;
            let r = peralta_check(&c);
            let bound = fmt_sig6(r.bound);
            rows.push(Check::new("peralta", p).k(k).row(
                bound.clone(),
                fmt_sig6(r.worst_deviation_f64()),
                r.all_in_range,
            ));
            for pat in r.out_of_range {
                let check = Check {
                    pattern: Some(pat),
                    ..Check::new("peralta", p).k(k)
                };
                rows.push(check.row(bound.clone(), c.count(pat).to_string(), false));
            }
        }
        Ok(rows)
    })
}

pub fn duality_suite(
    primes: &[PrimeModulus],
    ks: RangeInclusive<u32>,
    budget: u64,
    k_max: u32,
) -> Result<SuiteRun, CliError> {
    per_prime(primes, |p| {
        let t = table(p, budget)?;
        let mut rows = Vec::new();
        for k in ks.clone() {
            if k as u64 > p.get() - 2 {
                break;
            }
            let c = census_with_cap(&t, k, k_max)?;
            let bad = duality_violations(&c)?;
            rows.push(Check::new("duality", p).k(k).row(
                "0".into(),
                bad.len().to_string(),
                bad.is_empty(),
            ));
            for (pat, n, partner) in bad {
                let check = Check {
                    pattern: Some(pat),
                    ..Check::new("duality", p).k(k)
                };
                rows.push(check.row(partner.to_string(), n.to_string(), false));
            }
        }
        Ok(rows)
    })
}
