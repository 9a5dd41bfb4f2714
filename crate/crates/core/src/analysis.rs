//! Checks and measurements over character tables and censuses: the
//! difference-set structure of the residues, Peralta's window, the
//! length-2/3 dichotomies, pattern types and deviations, negation duality,
//! the `k = ⌈log₂ p⌉` threshold census and least-nonresidue bound columns.
//!
//! Every pass/fail decision is made in integer or rational arithmetic;
//! floating point only appears in report columns.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::chartab::{CharacterTable, TableError, DEFAULT_MEMORY_BUDGET};
use crate::ntcore::{primes_in_range, Mod4Class, NtError, PrimeModulus};
use crate::patterns::{
    census_with_cap, least_nonresidue, Pattern, PatternCensus, PatternError, DEFAULT_K_MAX,
};

/// Largest prime accepted by the O(p²) difference-set check by default.
pub const DEFAULT_SHDS_CAP: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("p = {p} is not 3 mod 4")]
    NotClassThree { p: u64 },
    #[error("p = {p} exceeds the brute-force cap {cap}")]
    AboveCap { p: u64, cap: u64 },
    #[error("pattern length k = {k} not supported here ({why})")]
    UnsupportedLength { k: u32, why: &'static str },
    #[error("⌈log₂ p⌉ = {k_star} exceeds k_max = {k_max}")]
    KStarTooLarge { k_star: u32, k_max: u32 },
    #[error("threshold experiment needs p >= 5 (got {0})")]
    PrimeTooSmall(u64),
    #[error("no scan records to summarize")]
    EmptyStream,
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Nt(#[from] NtError),
}

fn require_class_three(p: PrimeModulus) -> Result<(), AnalysisError> {
    if p.class_mod4() == Mod4Class::Three {
        Ok(())
    } else {
        Err(AnalysisError::NotClassThree { p: p.get() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShdsReport {
    pub p: PrimeModulus,
    pub is_shds: bool,
    pub lambda_expected: u64,
    pub multiset_min: u64,
    pub multiset_max: u64,
    pub partition_ok: bool,
}

/// Brute-force check that the residues of `Z_p` form a skew Hadamard
/// difference set with `λ = (p-3)/4`.
pub fn verify_shds(p: PrimeModulus, cap: u64) -> Result<ShdsReport, AnalysisError> {
    require_class_three(p)?;
    if p.get() > cap {
        return Err(AnalysisError::AboveCap { p: p.get(), cap });
    }
    let table = CharacterTable::build(p, DEFAULT_MEMORY_BUDGET)?;
    let n = p.get();
    let residues: Vec<u64> = table.residues().collect();
    let mut mult = vec![0u64; n as usize];
    for &x in &residues {
        for &y in &residues {
            if x != y {
                mult[((x + n - y) % n) as usize] += 1;
            }
        }
    }
    let nonzero = &mult[1..];
    let multiset_min = nonzero.iter().copied().min().unwrap_or(0);
    let multiset_max = nonzero.iter().copied().max().unwrap_or(0);
    let partition_ok = (1..n).all(|x| table.is_residue(x) != table.is_residue(n - x));
    let lambda_expected = (n - 3) / 4;
    Ok(ShdsReport {
        p,
        is_shds: multiset_min == lambda_expected
            && multiset_max == lambda_expected
            && partition_ok,
        lambda_expected,
        multiset_min,
        multiset_max,
        partition_ok,
    })
}

/// Exact test of `|count - p/2^k| <= k(3 + √p)`.
pub fn within_peralta(count: u64, p: u64, k: u32) -> bool {
    // Scaled by 2^k: |count·2^k - p| <= k·2^k·3 + k·2^k·√p.
    let scale = 1u128 << k;
    let dev = (count as u128 * scale).abs_diff(p as u128);
    let a = k as u128 * scale;
    let Some(linear) = a.checked_mul(3) else {
        return peralta_float_fallback(count, p, k);
    };
    if dev <= linear {
        return true;
    }
    let excess = dev - linear;
    match (
        excess.checked_mul(excess),
        a.checked_mul(a).and_then(|a2| a2.checked_mul(p as u128)),
    ) {
        (Some(lhs), Some(rhs)) => lhs <= rhs,
        _ => peralta_float_fallback(count, p, k),
    }
}

// Outward-rounded comparison for operands past 128 bits: widen the bound
// by a relative 1e-12 so rounding can only favour "in range".
fn peralta_float_fallback(count: u64, p: u64, k: u32) -> bool {
    let dev = (count as f64 - p as f64 / (k as f64).exp2()).abs();
    dev <= peralta_bound(p, k) * (1.0 + 1e-12)
}

pub fn peralta_bound(p: u64, k: u32) -> f64 {
    k as f64 * (3.0 + (p as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeraltaReport {
    pub p: PrimeModulus,
    pub k: u32,
    pub all_in_range: bool,
    /// `max |count - p/2^k|` over all patterns, exact.
    pub worst_deviation: Ratio<u128>,
    pub worst_pattern: Pattern,
    pub bound: f64,
    pub out_of_range: Vec<Pattern>,
}

impl PeraltaReport {
    pub fn worst_deviation_f64(&self) -> f64 {
        *self.worst_deviation.numer() as f64 / *self.worst_deviation.denom() as f64
    }
}

pub fn peralta_check(census: &PatternCensus) -> PeraltaReport {
    let (p, k) = (census.p(), census.k());
    let scale = 1u128 << k;
    let mut worst = (0u128, Pattern::new(k, 0).unwrap());
    let mut out_of_range = Vec::new();
    for (pat, c) in census.iter() {
        let dev = (c as u128 * scale).abs_diff(p as u128);
        if dev > worst.0 {
            worst = (dev, pat);
        }
        if !within_peralta(c, p, k) {
            out_of_range.push(pat);
        }
    }
    PeraltaReport {
        p: census.modulus(),
        k,
        all_in_range: out_of_range.is_empty(),
        worst_deviation: Ratio::new(worst.0, scale),
        worst_pattern: worst.1,
        bound: peralta_bound(p, k),
        out_of_range,
    }
}

/// Pattern type by first and last symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternType {
    ResidueResidue = 1,
    ResidueNonresidue = 2,
    NonresidueResidue = 3,
    NonresidueNonresidue = 4,
}

impl PatternType {
    pub fn number(self) -> u8 {
        self as u8
    }

    fn index(self) -> usize {
        self as usize - 1
    }
}

pub fn classify_type(pat: Pattern) -> Result<PatternType, AnalysisError> {
    if pat.len() < 2 {
        return Err(AnalysisError::UnsupportedLength {
            k: pat.len(),
            why: "pattern types need k >= 2",
        });
    }
    Ok(match (pat.starts_with_residue(), pat.ends_with_residue()) {
        (true, true) => PatternType::ResidueResidue,
        (true, false) => PatternType::ResidueNonresidue,
        (false, true) => PatternType::NonresidueResidue,
        (false, false) => PatternType::NonresidueNonresidue,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub p: PrimeModulus,
    pub k: u32,
    pub baseline_floor: u64,
    pub baseline_exact: Ratio<u64>,
    /// S₁..S₄: total count per pattern type.
    pub type_sums: [u64; 4],
    /// Per-type `(pattern, count - ⌊p/2^k⌋)` in code order.
    pub e_values: [Vec<(Pattern, i64)>; 4],
    pub e_sum_per_type: [i64; 4],
    pub e_min: i64,
    pub e_max: i64,
    /// `(p-3)/4`, only for `p ≡ 3 (mod 4)`.
    pub pair_count: Option<u64>,
    /// `S₁ - (p-3)/4` and `S₄ - (p-3)/4`, only for `p ≡ 3 (mod 4)`.
    pub s1_discrepancy: Option<i64>,
    pub s4_discrepancy: Option<i64>,
}

impl DeviationReport {
    /// The lost-window bracket `[-(k-2), 0]` holds for both S₁ and S₄.
    pub fn edge_bracket_ok(&self) -> Option<bool> {
        let lo = -(self.k as i64 - 2);
        Some(
            (lo..=0).contains(&self.s1_discrepancy?) && (lo..=0).contains(&self.s4_discrepancy?),
        )
    }
}

pub fn deviations(census: &PatternCensus) -> Result<DeviationReport, AnalysisError> {
    let (p, k) = (census.p(), census.k());
    if k < 2 {
        return Err(AnalysisError::UnsupportedLength {
            k,
            why: "pattern types need k >= 2",
        });
    }
    let baseline_floor = p >> k;
    let mut type_sums = [0u64; 4];
    let mut e_values: [Vec<(Pattern, i64)>; 4] = Default::default();
    for (pat, c) in census.iter() {
        let t = classify_type(pat)?.index();
        type_sums[t] += c;
        e_values[t].push((pat, c as i64 - baseline_floor as i64));
    }
    let e_sum_per_type = e_values
        .each_ref()
        .map(|v| v.iter().map(|&(_, e)| e).sum::<i64>());
    let all_e = e_values.iter().flatten().map(|&(_, e)| e);
    let e_min = all_e.clone().min().unwrap();
    let e_max = all_e.max().unwrap();
    let pair_count = (census.modulus().class_mod4() == Mod4Class::Three).then_some((p - 3) / 4);
    Ok(DeviationReport {
        p: census.modulus(),
        k,
        baseline_floor,
        baseline_exact: Ratio::new(p, 1u64 << k),
        type_sums,
        e_values,
        e_sum_per_type,
        e_min,
        e_max,
        pair_count,
        s1_discrepancy: pair_count.map(|l| type_sums[0] as i64 - l as i64),
        s4_discrepancy: pair_count.map(|l| type_sums[3] as i64 - l as i64),
    })
}

/// Patterns whose count differs from that of their reverse complement, as
/// `(pattern, count, partner count)`.
pub fn duality_violations(
    census: &PatternCensus,
) -> Result<Vec<(Pattern, u64, u64)>, AnalysisError> {
    require_class_three(census.modulus())?;
    Ok(census
        .iter()
        .filter_map(|(pat, c)| {
            let partner = census.count(pat.reverse_complement());
            (c != partner).then_some((pat, c, partner))
        })
        .collect())
}

pub fn duality_check(census: &PatternCensus) -> Result<bool, AnalysisError> {
    Ok(duality_violations(census)?.is_empty())
}

/// The admissible count range `[lo, hi]` for `k ∈ {2, 3}` and `p ≡ 3 (mod 4)`.
pub fn dichotomy_values(p: PrimeModulus, k: u32) -> Result<(u64, u64), AnalysisError> {
    require_class_three(p)?;
    let n = p.get() - 3;
    match k {
        2 => Ok((n / 4, n / 4 + 1)),
        3 => Ok((n / 8, n.div_ceil(8))),
        _ => Err(AnalysisError::UnsupportedLength {
            k,
            why: "the dichotomy is only stated for k = 2 and k = 3",
        }),
    }
}

pub fn dichotomy_violations(census: &PatternCensus) -> Result<Vec<(Pattern, u64)>, AnalysisError> {
    let (lo, hi) = dichotomy_values(census.modulus(), census.k())?;
    Ok(census
        .iter()
        .filter(|&(_, c)| c != lo && c != hi)
        .collect())
}

pub fn dichotomy_check(census: &PatternCensus) -> Result<bool, AnalysisError> {
    Ok(dichotomy_violations(census)?.is_empty())
}

/// Expected number of residue (or nonresidue) APs of length `k` for any
/// nonzero difference, when `p ≡ 3 (mod 4)` and `k ∈ {2, 3}`.
pub fn expected_ap_count(p: PrimeModulus, k: u64) -> Result<u64, AnalysisError> {
    require_class_three(p)?;
    match k {
        2 => Ok((p.get() - 3) / 4),
        3 => Ok((p.get() - 3) / 8),
        _ => Err(AnalysisError::UnsupportedLength {
            k: k as u32,
            why: "exact AP counts are only known for k = 2 and k = 3",
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdReport {
    pub p: PrimeModulus,
    pub k_star: u32,
    pub baseline_floor: u64,
    pub census_max: u64,
    pub census_nonzero: u64,
    /// count value -> number of patterns with that count
    pub histogram: BTreeMap<u64, u64>,
}

impl ThresholdReport {
    pub fn histogram_mass(&self) -> u64 {
        self.histogram.iter().map(|(v, f)| v * f).sum()
    }
}

pub fn threshold_experiment(p: PrimeModulus) -> Result<ThresholdReport, AnalysisError> {
    threshold_experiment_with(p, DEFAULT_K_MAX, DEFAULT_MEMORY_BUDGET)
}

/// Census at `k = ⌈log₂ p⌉`, summarized as a count histogram. Measures only.
pub fn threshold_experiment_with(
    p: PrimeModulus,
    k_max: u32,
    memory_budget: u64,
) -> Result<ThresholdReport, AnalysisError> {
    if p.get() < 5 {
        return Err(AnalysisError::PrimeTooSmall(p.get()));
    }
    let k_star = p.ceil_log2();
    if k_star > k_max {
        return Err(AnalysisError::KStarTooLarge { k_star, k_max });
    }
    let table = CharacterTable::build(p, memory_budget)?;
    let census = census_with_cap(&table, k_star, k_max)?;
    let mut histogram = BTreeMap::new();
    for &c in census.counts() {
        *histogram.entry(c).or_insert(0) += 1;
    }
    Ok(ThresholdReport {
        p,
        k_star,
        baseline_floor: p.get() >> k_star,
        census_max: census.counts().iter().copied().max().unwrap_or(0),
        census_nonzero: census.counts().iter().filter(|&&c| c > 0).count() as u64,
        histogram,
    })
}

/// One prime's least nonresidue with classical bound columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    pub p: PrimeModulus,
    pub n_p: u64,
    pub k_star: u32,
    pub ratio: f64,
    /// `2√p + 1`, only for `p ≡ 1 (mod 8)`.
    pub gauss_bound: Option<f64>,
    pub vinogradov_bound: f64,
    pub ankeny_shape: f64,
    pub burgess_shape: f64,
}

impl ScanRecord {
    pub fn for_prime(p: PrimeModulus) -> Self {
        Self::with_nonresidue(p, least_nonresidue(p))
    }

    pub fn with_nonresidue(p: PrimeModulus, n_p: u64) -> Self {
        let x = p.get() as f64;
        let ln = x.ln();
        let e = std::f64::consts::E;
        let k_star = p.ceil_log2();
        ScanRecord {
            p,
            n_p,
            k_star,
            ratio: n_p as f64 / k_star as f64,
            gauss_bound: (p.class_mod8() == 1).then(|| 2.0 * x.sqrt() + 1.0),
            vinogradov_bound: x.powf(1.0 / (2.0 * e).sqrt()) * ln * ln,
            ankeny_shape: ln * ln,
            burgess_shape: x.powf(1.0 / (4.0 * e.sqrt())),
        }
    }

    /// `n(p) >= 2√p + 1` for `p ≡ 1 (mod 8)`, decided exactly.
    pub fn violates_gauss(&self) -> bool {
        self.p.class_mod8() == 1 && {
            let m = self.n_p as u128 - 1;
            m * m >= 4 * self.p.get() as u128
        }
    }
}

// Primes per parallel work unit in a scan.
const SCAN_CHUNK: u64 = 1 << 16;

/// Scan records for every odd prime in `[lo, hi]`, ascending, computed on
/// the rayon pool over disjoint sub-ranges.
pub fn scan_records(
    lo: u64,
    hi: u64,
    class_filter: Option<Mod4Class>,
) -> Result<Vec<ScanRecord>, AnalysisError> {
    if lo > hi {
        return Err(NtError::EmptyRange { lo, hi }.into());
    }
    let lo = lo.max(3);
    if lo > hi {
        return Ok(Vec::new());
    }
    let pieces: Vec<(u64, u64)> = (0..=(hi - lo) / SCAN_CHUNK)
        .map(|i| {
            let a = lo + i * SCAN_CHUNK;
            (a, (a + SCAN_CHUNK - 1).min(hi))
        })
        .collect();
    let parts: Vec<Vec<ScanRecord>> = pieces
        .into_par_iter()
        .map(|(a, b)| {
            primes_in_range(a, b, class_filter)
                .expect("sub-range is nonempty")
                .moduli()
                .map(ScanRecord::for_prime)
                .collect()
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecadeMax {
    /// `⌊log₁₀ p⌋`
    pub decade: u32,
    pub p: u64,
    pub n_p: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundSummary {
    pub records: u64,
    pub max_ratio: f64,
    pub max_ratio_p: u64,
    pub max_ratio_n_p: u64,
    pub gauss_checked: u64,
    pub violations_gauss: u64,
    pub decade_maxima: Vec<DecadeMax>,
}

/// Folds scan records into ratio and bound statistics. Ties keep the
/// first record seen, so ascending input gives the smallest such `p`.
pub fn bound_table<'a>(
    records: impl IntoIterator<Item = &'a ScanRecord>,
) -> Result<BoundSummary, AnalysisError> {
    let mut best: Option<&ScanRecord> = None;
    let mut records_seen = 0;
    let mut gauss_checked = 0;
    let mut violations_gauss = 0;
    let mut decades: BTreeMap<u32, DecadeMax> = BTreeMap::new();
    for r in records {
        records_seen += 1;
        // compare n/k exactly
        if best.is_none_or(|b| r.n_p * b.k_star as u64 > b.n_p * r.k_star as u64) {
            best = Some(r);
        }
        if r.p.class_mod8() == 1 {
            gauss_checked += 1;
            violations_gauss += r.violates_gauss() as u64;
        }
        let decade = r.p.get().ilog10();
        let slot = decades.entry(decade).or_insert(DecadeMax {
            decade,
            p: r.p.get(),
            n_p: r.n_p,
        });
        if r.n_p > slot.n_p {
            *slot = DecadeMax {
                decade,
                p: r.p.get(),
                n_p: r.n_p,
            };
        }
    }
    let best = best.ok_or(AnalysisError::EmptyStream)?;
    Ok(BoundSummary {
        records: records_seen,
        max_ratio: best.ratio,
        max_ratio_p: best.p.get(),
        max_ratio_n_p: best.n_p,
        gauss_checked,
        violations_gauss,
        decade_maxima: decades.into_values().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::census;

    fn pm(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    fn census_of(p: u64, k: u32) -> PatternCensus {
        census(&CharacterTable::with_default_budget(pm(p)).unwrap(), k).unwrap()
    }

    fn pat(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    #[test]
    fn shds_examples() {
        let r = verify_shds(pm(7), DEFAULT_SHDS_CAP).unwrap();
        assert!(r.is_shds);
        assert_eq!((r.lambda_expected, r.multiset_min, r.multiset_max), (1, 1, 1));
        let r = verify_shds(pm(11), DEFAULT_SHDS_CAP).unwrap();
        assert!(r.is_shds && r.lambda_expected == 2);
        let r = verify_shds(pm(3), DEFAULT_SHDS_CAP).unwrap();
        assert!(r.is_shds && r.lambda_expected == 0 && r.multiset_max == 0);
        assert_eq!(
            verify_shds(pm(13), DEFAULT_SHDS_CAP),
            Err(AnalysisError::NotClassThree { p: 13 })
        );
        assert_eq!(
            verify_shds(pm(10_007), DEFAULT_SHDS_CAP),
            Err(AnalysisError::AboveCap { p: 10_007, cap: DEFAULT_SHDS_CAP })
        );
    }

    #[test]
    fn shds_brute_force_over_class_three() {
        for p in primes_in_range(3, 499, Some(Mod4Class::Three)).unwrap().moduli() {
            let r = verify_shds(p, DEFAULT_SHDS_CAP).unwrap();
            assert!(r.is_shds, "p = {p}");
            assert_eq!(r.lambda_expected, (p.get() - 3) / 4);
        }
    }

    #[test]
    fn peralta_examples() {
        let r = peralta_check(&census_of(11, 3));
        assert!(r.all_in_range);
        assert_eq!(r.worst_deviation, Ratio::new(3, 8));
        assert!((r.bound - 3.0 * (3.0 + 11f64.sqrt())).abs() < 1e-12);

        // counts (1, 2, 1, 1) against 7/4: the extreme is |1 - 7/4|
        let r = peralta_check(&census_of(7, 2));
        assert!(r.all_in_range);
        assert_eq!(r.worst_deviation, Ratio::new(3, 4));

        // a count of p is out of range once p(1 - 2^-k) > k(3 + √p)
        let mut counts = census_of(1009, 3).counts().to_vec();
        counts[0] = 1009;
        let bad = PatternCensus::from_counts(pm(1009), 3, counts).unwrap();
        let r = peralta_check(&bad);
        assert!(!r.all_in_range);
        assert_eq!(r.out_of_range, vec![Pattern::new(3, 0).unwrap()]);
    }

    #[test]
    fn peralta_exact_test_at_the_boundary() {
        // p = 7, k = 2: bound 2(3 + √7) ≈ 11.29; p/4 = 1.75, so counts up
        // to 13 are inside and 14 is outside.
        assert!(within_peralta(13, 7, 2));
        assert!(!within_peralta(14, 7, 2));
        // p = 9 (not prime, arithmetic only): bound 2·6 = 12 is exact.
        // 9/4 + 12 = 14.25 -> 14 inside, 15 outside
        assert!(within_peralta(14, 9, 2));
        assert!(!within_peralta(15, 9, 2));
        assert!(within_peralta(1 << 39, 1 << 40, 1));
        assert!(!within_peralta(0, 1 << 40, 1));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_type(pat("rrr")).unwrap(), PatternType::ResidueResidue);
        assert_eq!(classify_type(pat("rn")).unwrap(), PatternType::ResidueNonresidue);
        assert_eq!(classify_type(pat("nrn")).unwrap().number(), 4);
        assert_eq!(classify_type(pat("nr")).unwrap().number(), 3);
        assert!(classify_type(pat("r")).is_err());
    }

    #[test]
    fn deviation_examples() {
        let r = deviations(&census_of(19, 3)).unwrap();
        assert_eq!(r.type_sums[0], 4);
        assert_eq!(r.pair_count, Some(4));
        assert_eq!(r.s1_discrepancy, Some(0));
        let r = deviations(&census_of(11, 3)).unwrap();
        assert_eq!(r.type_sums[0], 2);
        let r = deviations(&census_of(7, 2)).unwrap();
        assert_eq!(r.type_sums, [1, 2, 1, 1]);
        assert_eq!(r.baseline_floor, 1);
        assert_eq!(r.baseline_exact, Ratio::new(7, 4));
        assert_eq!(r.e_min, 0);
        assert_eq!(r.e_max, 1);
        assert!(deviations(&census_of(7, 1)).is_err());
    }

    #[test]
    fn deviation_accounting() {
        for p in primes_in_range(5, 2000, None).unwrap().moduli() {
            for k in 2..=(p.get() - 2).min(9) as u32 {
                let r = deviations(&census_of(p.get(), k)).unwrap();
                assert_eq!(r.type_sums.iter().sum::<u64>(), p.get() - k as u64);
                assert!(r.e_values.iter().all(|v| v.len() == 1 << (k - 2)));
                if p.class_mod4() == Mod4Class::Three {
                    assert_eq!(r.edge_bracket_ok(), Some(true), "p = {p}, k = {k}");
                } else {
                    assert_eq!(r.edge_bracket_ok(), None);
                }
            }
        }
    }

    #[test]
    fn duality_examples() {
        assert!(duality_check(&census_of(7, 2)).unwrap());
        assert!(duality_check(&census_of(11, 3)).unwrap());
        let c = census_of(19, 3);
        assert!(duality_check(&c).unwrap());
        assert_eq!(c.count(pat("rrr")), 2);
        assert_eq!(c.count(pat("nnn")), 2);
        assert!(duality_check(&census_of(13, 3)).is_err());
    }

    #[test]
    fn dichotomy_examples() {
        assert!(dichotomy_check(&census_of(7, 2)).unwrap());
        assert!(dichotomy_check(&census_of(7, 3)).unwrap());
        let c = census_of(19, 3);
        assert_eq!(dichotomy_values(pm(19), 3).unwrap(), (2, 2));
        assert!(dichotomy_check(&c).unwrap());
        assert!(c.counts().iter().all(|&n| n == 2));
        assert!(dichotomy_check(&census_of(19, 4)).is_err());
        assert!(dichotomy_check(&census_of(13, 2)).is_err());
    }

    #[test]
    fn threshold_examples() {
        let r = threshold_experiment(pm(11)).unwrap();
        assert_eq!(r.k_star, 4);
        assert_eq!(r.histogram_mass(), 7);
        assert!(r.census_max >= 1);
        let r = threshold_experiment(pm(7)).unwrap();
        assert_eq!((r.k_star, r.census_max), (3, 1));
        let r = threshold_experiment(pm(19)).unwrap();
        assert_eq!(r.k_star, 5);
        assert_eq!(r.histogram_mass(), 14);
        assert!(r.census_nonzero <= 14);
        assert_eq!(
            threshold_experiment_with(pm(1_000_003), 16, DEFAULT_MEMORY_BUDGET),
            Err(AnalysisError::KStarTooLarge { k_star: 20, k_max: 16 })
        );
        assert_eq!(threshold_experiment(pm(3)), Err(AnalysisError::PrimeTooSmall(3)));
    }

    #[test]
    fn bound_table_examples() {
        let recs: Vec<ScanRecord> = [3, 7, 11].map(|p| ScanRecord::for_prime(pm(p))).into();
        let s = bound_table(&recs).unwrap();
        assert_eq!((s.max_ratio, s.max_ratio_p), (1.0, 3));
        let s = bound_table(&[ScanRecord::for_prime(pm(23))]).unwrap();
        assert_eq!(s.max_ratio, 1.0);
        let r17 = ScanRecord::for_prime(pm(17));
        assert_eq!(r17.n_p, 3);
        assert!((r17.gauss_bound.unwrap() - (2.0 * 17f64.sqrt() + 1.0)).abs() < 1e-12);
        let s = bound_table(&[r17]).unwrap();
        assert_eq!((s.gauss_checked, s.violations_gauss), (1, 0));
        assert_eq!(bound_table(&[]), Err(AnalysisError::EmptyStream));
        // synthetic violation: n = 10 >= 2√17 + 1
        assert!(ScanRecord::with_nonresidue(pm(17), 10).violates_gauss());
        assert!(!ScanRecord::with_nonresidue(pm(17), 9).violates_gauss());
    }

    #[test]
    fn scan_records_in_order() {
        let recs = scan_records(3, 23, Some(Mod4Class::Three)).unwrap();
        let got: Vec<(u64, u64)> = recs.iter().map(|r| (r.p.get(), r.n_p)).collect();
        assert_eq!(got, [(3, 2), (7, 3), (11, 2), (19, 2), (23, 5)]);
        let all = scan_records(2, 300_000, None).unwrap();
        assert!(all.windows(2).all(|w| w[0].p < w[1].p));
        assert_eq!(all.len() as u64, primes_in_range(3, 300_000, None).unwrap().count() as u64);
    }
}
