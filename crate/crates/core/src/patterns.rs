//! Residue/nonresidue patterns over consecutive elements, the full pattern
//! census, arithmetic-progression counts and the least nonresidue.
//!
//! Window convention: a pattern of length `k` occurs at start `a` for
//! `a ∈ [1, p-k]`, i.e. the window `a, a+1, …, a+k-1` never wraps and never
//! contains zero. Codes store the earliest element in the most significant
//! bit, residue = 1, so `"rrn"` is `0b110`.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::chartab::CharacterTable;
use crate::ntcore::{legendre_euler, CharacterValue, PrimeModulus};

/// Longest pattern representable by a 64-bit code.
pub const MAX_PATTERN_LEN: u32 = 64;
/// Default cap on census length (2^k counters).
pub const DEFAULT_K_MAX: u32 = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern string is empty")]
    Empty,
    #[error("pattern length {0} exceeds {MAX_PATTERN_LEN}")]
    TooLong(usize),
    #[error("invalid pattern character {0:?}, expected 'r' or 'n'")]
    BadChar(char),
    #[error("code {code} does not fit in {len} bits")]
    CodeOutOfRange { len: u32, code: u64 },
    #[error("length k = {k} out of range for p = {p} (need 1 <= k <= {max})")]
    KOutOfRange { p: u64, k: u32, max: u64 },
    #[error("AP length must be at least 2 (got {0})")]
    ApTooShort(u64),
    #[error("common difference {d} is divisible by p = {p}")]
    ZeroDifference { p: u64, d: u64 },
}

/// A word over `{r, n}` of length `1..=64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    len: u32,
    code: u64,
}

#[inline]
fn low_mask(len: u32) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl Pattern {
    pub fn new(len: u32, code: u64) -> Result<Self, PatternError> {
        if len == 0 {
            return Err(PatternError::Empty);
        }
        if len > MAX_PATTERN_LEN {
            return Err(PatternError::TooLong(len as usize));
        }
        if code & !low_mask(len) != 0 {
            return Err(PatternError::CodeOutOfRange { len, code });
        }
        Ok(Pattern { len, code })
    }

    #[inline]
    // never empty, so no is_empty
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> u32 {
        self.len
    }

    #[inline]
    pub fn code(self) -> u64 {
        self.code
    }

    /// Symbol at position `j` (0 = earliest); `true` for residue.
    pub fn is_residue_at(self, j: u32) -> bool {
        assert!(j < self.len);
        self.code >> (self.len - 1 - j) & 1 == 1
    }

    pub fn starts_with_residue(self) -> bool {
        self.is_residue_at(0)
    }

    pub fn ends_with_residue(self) -> bool {
        self.code & 1 == 1
    }

    /// Reverse the word and swap `r`/`n`: the image of a window under `x ↦ p - x`
    /// when `-1` is a nonresidue.
    pub fn reverse_complement(self) -> Pattern {
        let rev = self.code.reverse_bits() >> (64 - self.len);
        Pattern {
            len: self.len,
            code: !rev & low_mask(self.len),
        }
    }

    /// All `2^len` patterns in code order.
    pub fn all(len: u32) -> impl Iterator<Item = Pattern> {
        assert!((1..MAX_PATTERN_LEN).contains(&len));
        (0..1u64 << len).map(move |code| Pattern { len, code })
    }
}

impl FromStr for Pattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n = s.chars().count();
        if n == 0 {
            return Err(PatternError::Empty);
        }
        if n > MAX_PATTERN_LEN as usize {
            return Err(PatternError::TooLong(n));
        }
        let mut code = 0u64;
        for c in s.chars() {
            code = code << 1
                | match c {
                    'r' => 1,
                    'n' => 0,
                    other => return Err(PatternError::BadChar(other)),
                };
        }
        Ok(Pattern {
            len: n as u32,
            code,
        })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len {
            f.write_str(if self.is_residue_at(j) { "r" } else { "n" })?;
        }
        Ok(())
    }
}

pub fn pattern_from_string(s: &str) -> Result<Pattern, PatternError> {
    s.parse()
}

/// Occurrence counts of every length-`k` pattern, indexed by code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternCensus {
    p: PrimeModulus,
    k: u32,
    counts: Vec<u64>,
}

impl PatternCensus {
    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn p(&self) -> u64 {
        self.p.get()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, pat: Pattern) -> u64 {
        assert_eq!(pat.len(), self.k, "pattern length differs from census length");
        self.counts[pat.code() as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn windows(&self) -> u64 {
        self.p() - self.k as u64
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pattern, u64)> + '_ {
        Pattern::all(self.k).zip(self.counts.iter().copied())
    }

    /// Builds a census from externally supplied counts. No conservation
    /// check is applied; used for fault injection in report tests.
    pub fn from_counts(p: PrimeModulus, k: u32, counts: Vec<u64>) -> Result<Self, PatternError> {
        if k == 0 || k >= MAX_PATTERN_LEN || counts.len() as u64 != 1u64 << k {
            return Err(PatternError::KOutOfRange {
                p: p.get(),
                k,
                max: counts.len() as u64,
            });
        }
        Ok(PatternCensus { p, k, counts })
    }
}

static CENSUS_RUNS: AtomicU64 = AtomicU64::new(0);
static CENSUS_CONSERVATION_FAILURES: AtomicU64 = AtomicU64::new(0);

/// Process-wide tally of censuses computed and of those whose total
/// differed from `p - k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CensusAudit {
    pub runs: u64,
    pub conservation_failures: u64,
}

pub fn census_audit() -> CensusAudit {
    CensusAudit {
        runs: CENSUS_RUNS.load(Ordering::Relaxed),
        conservation_failures: CENSUS_CONSERVATION_FAILURES.load(Ordering::Relaxed),
    }
}

fn check_window_len(p: u64, k: u32, k_max: u32) -> Result<(), PatternError> {
    let max = (k_max as u64).min(p.saturating_sub(2));
    if k == 0 || k as u64 > max {
        return Err(PatternError::KOutOfRange { p, k, max });
    }
    Ok(())
}

// Chunks below this many window starts are not worth a parallel split.
const PAR_MIN_STARTS: u64 = 1 << 17;

/// Census with the default length cap.
pub fn census(table: &CharacterTable, k: u32) -> Result<PatternCensus, PatternError> {
    census_with_cap(table, k, DEFAULT_K_MAX)
}

/// One rolling pass over `1..p` counting every length-`k` window.
///
/// Large primes with a small `2^k` are split into chunks overlapping by
/// `k - 1` elements and merged by addition on the rayon pool, which gives the
/// same counts as the sequential pass.
pub fn census_with_cap(
    table: &CharacterTable,
    k: u32,
    k_max: u32,
) -> Result<PatternCensus, PatternError> {
    let p = table.p();
    check_window_len(p, k, k_max.min(MAX_PATTERN_LEN - 1))?;
    let starts = p - k as u64;
    let size = 1usize << k;
    let threads = rayon::current_num_threads() as u64;
    let counts = if threads > 1 && starts >= PAR_MIN_STARTS && (size as u64) * 16 <= starts {
        let chunk = starts.div_ceil(threads * 4).max(PAR_MIN_STARTS / 4);
        let bounds: Vec<(u64, u64)> = (0..starts.div_ceil(chunk))
            .map(|i| (1 + i * chunk, (1 + (i + 1) * chunk).min(starts + 1)))
            .collect();
        bounds
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut c = vec![0u64; size];
                count_windows(table, k, lo, hi, &mut c);
                c
            })
            .reduce(
                || vec![0u64; size],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    } else {
        let mut c = vec![0u64; size];
        count_windows(table, k, 1, starts + 1, &mut c);
        c
    };
    let census = PatternCensus {
        p: table.modulus(),
        k,
        counts,
    };
    CENSUS_RUNS.fetch_add(1, Ordering::Relaxed);
    if census.total() != starts {
        CENSUS_CONSERVATION_FAILURES.fetch_add(1, Ordering::Relaxed);
    }
    Ok(census)
}

/// Counts windows starting in `[lo, hi)`.
fn count_windows(table: &CharacterTable, k: u32, lo: u64, hi: u64, counts: &mut [u64]) {
    let mask = low_mask(k);
    let mut code = 0u64;
    for a in lo..lo + k as u64 - 1 {
        code = code << 1 | table.is_residue(a) as u64;
    }
    for a in lo..hi {
        code = (code << 1 | table.is_residue(a + k as u64 - 1) as u64) & mask;
        counts[code as usize] += 1;
    }
}

/// Occurrences of one pattern, found by a rolling comparison without
/// allocating `2^k` counters. Accepts any length up to 64 (and `p - 2`).
pub fn count_pattern(table: &CharacterTable, pat: Pattern) -> Result<u64, PatternError> {
    let p = table.p();
    let k = pat.len();
    check_window_len(p, k, MAX_PATTERN_LEN)?;
    let mask = low_mask(k);
    let mut code = 0u64;
    let mut hits = 0;
    for a in 1..p {
        code = (code << 1 | table.is_residue(a) as u64) & mask;
        if a >= k as u64 && code == pat.code() {
            hits += 1;
        }
    }
    Ok(hits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ApKind {
    Residue,
    Nonresidue,
}

impl ApKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ApKind::Residue => "residue",
            ApKind::Nonresidue => "nonresidue",
        }
    }
}

impl FromStr for ApKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "residue" | "r" => Ok(ApKind::Residue),
            "nonresidue" | "n" => Ok(ApKind::Nonresidue),
            other => Err(format!("unknown AP kind {other:?}")),
        }
    }
}

impl fmt::Display for ApKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApCount {
    pub p: PrimeModulus,
    pub k: u64,
    pub d: u64,
    pub kind: ApKind,
    pub count: u64,
}

/// Number of starts `a ∈ Z_p` whose progression `a, a+d, …, a+(k-1)d` has
/// only nonzero terms, all of the requested kind.
///
/// Walks `Z_p` in the order `d, 2d, …, (p-1)d`; since the walk is bounded by
/// zero at both ends, an admissible progression is exactly a run of `k`
/// consecutive steps of that walk.
pub fn count_ap(
    table: &CharacterTable,
    k: u64,
    d: u64,
    kind: ApKind,
) -> Result<ApCount, PatternError> {
    let p = table.p();
    if k < 2 {
        return Err(PatternError::ApTooShort(k));
    }
    let step = d % p;
    if step == 0 {
        return Err(PatternError::ZeroDifference { p, d });
    }
    let want = kind == ApKind::Residue;
    let mut x = 0u64;
    let mut run = 0u64;
    let mut count = 0u64;
    for _ in 1..p {
        x += step;
        if x >= p {
            x -= p;
        }
        // branchless: the residue bit is close to a coin flip
        let hit = (table.is_residue(x) == want) as u64;
        run = (run + 1) * hit;
        count += (run >= k) as u64;
    }
    Ok(ApCount {
        p: table.modulus(),
        k,
        d: step,
        kind,
        count,
    })
}

/// Smallest `n >= 2` with `(n/p) = -1`, by Euler's criterion.
pub fn least_nonresidue(p: PrimeModulus) -> u64 {
    (2..p.get())
        .find(|&n| legendre_euler(n, p) == CharacterValue::Nonresidue)
        .expect("every odd prime has a nonresidue below it")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntcore::{primes_in_range, Mod4Class};
    use proptest::prelude::*;

    fn table(p: u64) -> CharacterTable {
        CharacterTable::with_default_budget(PrimeModulus::new(p).unwrap()).unwrap()
    }

    fn pat(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    /// Independent census: render the residue word as a string and slide.
    fn brute_census(p: u64, k: usize) -> std::collections::HashMap<String, u64> {
        let squares: std::collections::HashSet<u64> = (1..p).map(|x| x * x % p).collect();
        let word: Vec<char> = (1..p)
            .map(|a| if squares.contains(&a) { 'r' } else { 'n' })
            .collect();
        let mut m = std::collections::HashMap::new();
        for w in word.windows(k) {
            *m.entry(w.iter().collect::<String>()).or_insert(0) += 1;
        }
        m
    }

    fn brute_ap(p: u64, k: u64, d: u64, residue: bool) -> u64 {
        let squares: std::collections::HashSet<u64> = (1..p).map(|x| x * x % p).collect();
        (0..p)
            .filter(|&a| {
                (0..k).all(|i| {
                    let t = (a + i * d) % p;
                    t != 0 && squares.contains(&t) == residue
                })
            })
            .count() as u64
    }

    #[test]
    fn pattern_strings() {
        assert_eq!(pat("rr"), Pattern::new(2, 3).unwrap());
        assert_eq!(pat("nnn"), Pattern::new(3, 0).unwrap());
        assert_eq!(pat("rnr"), Pattern::new(3, 5).unwrap());
        assert_eq!(pat("rrn").code(), 0b110);
        assert_eq!(pat("rrn").to_string(), "rrn");
        assert_eq!("".parse::<Pattern>(), Err(PatternError::Empty));
        assert_eq!("rxn".parse::<Pattern>(), Err(PatternError::BadChar('x')));
        assert_eq!(
            "r".repeat(65).parse::<Pattern>(),
            Err(PatternError::TooLong(65))
        );
        assert!("r".repeat(64).parse::<Pattern>().is_ok());
        assert!(Pattern::new(3, 8).is_err());
    }

    #[test]
    fn reverse_complement_examples() {
        assert_eq!(pat("rr").reverse_complement(), pat("nn"));
        assert_eq!(pat("rn").reverse_complement(), pat("rn"));
        assert_eq!(pat("nr").reverse_complement(), pat("nr"));
        assert_eq!(pat("rrn").reverse_complement(), pat("rnn"));
        let long = pat(&"r".repeat(64));
        assert_eq!(long.reverse_complement(), pat(&"n".repeat(64)));
    }

    #[test]
    fn census_examples() {
        let c = census(&table(7), 2).unwrap();
        assert_eq!(c.count(pat("rr")), 1);
        assert_eq!(c.count(pat("rn")), 2);
        assert_eq!(c.count(pat("nr")), 1);
        assert_eq!(c.count(pat("nn")), 1);
        assert_eq!(c.total(), 5);

        let c = census(&table(11), 3).unwrap();
        assert!(c.counts().iter().all(|&n| n == 1));

        let c = census(&table(19), 3).unwrap();
        assert_eq!(c.count(pat("rrr")), 2);
    }

    #[test]
    fn census_rejects_bad_lengths() {
        let t = table(7);
        assert!(census(&t, 0).is_err());
        assert!(census(&t, 5).is_ok());
        assert!(matches!(census(&t, 6), Err(PatternError::KOutOfRange { .. })));
        let t = table(1_000_003);
        assert!(census_with_cap(&t, 10, 8).is_err());
        assert!(census(&t, 27).is_err());
    }

    #[test]
    fn census_matches_brute_force() {
        for p in primes_in_range(3, 400, None).unwrap().moduli() {
            let t = CharacterTable::with_default_budget(p).unwrap();
            for k in 1..=(p.get() - 2).min(8) as u32 {
                let c = census(&t, k).unwrap();
                let brute = brute_census(p.get(), k as usize);
                for (pt, n) in c.iter() {
                    assert_eq!(n, brute.get(&pt.to_string()).copied().unwrap_or(0));
                }
                assert_eq!(c.total(), p.get() - k as u64);
            }
        }
    }

    #[test]
    fn parallel_census_matches_sequential() {
        let t = table(2_000_003);
        for k in [1, 4, 12] {
            let par = census(&t, k).unwrap();
            let seq = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap()
                .install(|| census(&t, k).unwrap());
            assert_eq!(par, seq);
            assert_eq!(par.total(), 2_000_003 - k as u64);
        }
    }

    #[test]
    fn count_pattern_examples() {
        assert_eq!(count_pattern(&table(7), pat("rr")).unwrap(), 1);
        assert_eq!(count_pattern(&table(7), pat("rn")).unwrap(), 2);
        assert_eq!(count_pattern(&table(11), pat("nnn")).unwrap(), 1);
        assert!(count_pattern(&table(7), pat("rrrrrr")).is_err());
        // lengths beyond the census cap
        let t = table(1_000_003);
        let long = pat(&"rn".repeat(20));
        let direct = (1..=1_000_003 - 40u64)
            .filter(|&a| (0..40).all(|j| t.is_residue(a + j) == (j % 2 == 0)))
            .count() as u64;
        assert_eq!(count_pattern(&t, long).unwrap(), direct);
    }

    #[test]
    fn ap_examples() {
        let ap = count_ap(&table(7), 2, 1, ApKind::Residue).unwrap();
        assert_eq!(ap.count, 1);
        assert_eq!(count_ap(&table(7), 3, 2, ApKind::Residue).unwrap().count, 0);
        assert_eq!(count_ap(&table(11), 3, 4, ApKind::Residue).unwrap().count, 1);
        assert_eq!(
            count_ap(&table(7), 2, 14, ApKind::Residue),
            Err(PatternError::ZeroDifference { p: 7, d: 14 })
        );
        assert_eq!(
            count_ap(&table(7), 1, 1, ApKind::Residue),
            Err(PatternError::ApTooShort(1))
        );
        assert_eq!(count_ap(&table(7), 9, 1, ApKind::Residue).unwrap().count, 0);
    }

    #[test]
    fn ap_matches_brute_force() {
        for p in primes_in_range(3, 200, None).unwrap().moduli() {
            let t = CharacterTable::with_default_budget(p).unwrap();
            let n = p.get();
            for d in 1..n {
                for k in 2..=5 {
                    for kind in [ApKind::Residue, ApKind::Nonresidue] {
                        let got = count_ap(&t, k, d, kind).unwrap().count;
                        assert_eq!(got, brute_ap(n, k, d, kind == ApKind::Residue));
                    }
                }
            }
        }
    }

    #[test]
    fn least_nonresidue_examples() {
        let n = |p| least_nonresidue(PrimeModulus::new(p).unwrap());
        assert_eq!(n(3), 2);
        assert_eq!(n(7), 3);
        assert_eq!(n(23), 5);
        assert_eq!(n(17), 3);
    }

    #[test]
    fn census_structure() {
        for p in primes_in_range(5, 3000, None).unwrap().moduli() {
            let t = CharacterTable::with_default_budget(p).unwrap();
            let n = p.get();
            let c2 = census(&t, 2).unwrap();
            let ap = count_ap(&t, 2, 1, ApKind::Residue).unwrap();
            assert_eq!(c2.count(pat("rr")), ap.count);
            for k in 1..=(n - 2).min(10) as u32 {
                let c = census(&t, k).unwrap();
                // marginal over a fixed leading residue
                let lead: u64 = c.iter().filter(|(q, _)| q.starts_with_residue()).map(|x| x.1).sum();
                let brute = (1..=n - k as u64).filter(|&a| t.is_residue(a)).count() as u64;
                assert_eq!(lead, brute);
                if p.class_mod4() == Mod4Class::Three {
                    for (q, m) in c.iter() {
                        assert_eq!(m, c.count(q.reverse_complement()));
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn pattern_string_round_trip(len in 1u32..=64, raw in any::<u64>()) {
            let pt = Pattern::new(len, raw & low_mask(len)).unwrap();
            prop_assert_eq!(pt.to_string().parse::<Pattern>().unwrap(), pt);
            prop_assert_eq!(pt.reverse_complement().reverse_complement(), pt);
        }

        #[test]
        fn direct_count_agrees_with_census(idx in 0usize..1229, k in 1u32..=10, raw in any::<u64>()) {
            let p = primes_in_range(3, 10_000, None).unwrap().moduli().nth(idx % 1228).unwrap();
            prop_assume!(k as u64 <= p.get() - 2);
            let t = CharacterTable::with_default_budget(p).unwrap();
            let pt = Pattern::new(k, raw & low_mask(k)).unwrap();
            prop_assert_eq!(count_pattern(&t, pt).unwrap(), census(&t, k).unwrap().count(pt));
        }
    }
}
