//! Word-sized number theory: modular arithmetic, deterministic primality,
//! two independent Legendre-symbol routes and a segmented prime sieve.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NtError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("empty range: lo = {lo} > hi = {hi}")]
    EmptyRange { lo: u64, hi: u64 },
    #[error("range must start at 2 or above (got lo = {0})")]
    RangeBelowTwo(u64),
}

/// Residue class of an odd prime modulo 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mod4Class {
    One,
    Three,
}

impl Mod4Class {
    pub fn of(n: u64) -> Option<Self> {
        match n % 4 {
            1 => Some(Mod4Class::One),
            3 => Some(Mod4Class::Three),
            _ => None,
        }
    }

    pub fn value(self) -> u64 {
        match self {
            Mod4Class::One => 1,
            Mod4Class::Three => 3,
        }
    }
}

/// An odd prime modulus that has passed the deterministic primality test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self, NtError> {
        if p >= 3 && p % 2 == 1 && is_prime(p) {
            Ok(PrimeModulus(p))
        } else {
            Err(NtError::NotOddPrime(p))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    pub fn class_mod4(self) -> Mod4Class {
        if self.0 % 4 == 1 {
            Mod4Class::One
        } else {
            Mod4Class::Three
        }
    }

    pub fn class_mod8(self) -> u8 {
        (self.0 % 8) as u8
    }

    /// Reduces an arbitrary integer into `[0, p)`.
    #[inline]
    pub fn reduce(self, a: i128) -> u64 {
        a.rem_euclid(self.0 as i128) as u64
    }

    /// `⌈log₂ p⌉`; for an odd prime this is the bit length of `p`.
    pub fn ceil_log2(self) -> u32 {
        64 - (self.0 - 1).leading_zeros()
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<u64> for PrimeModulus {
    type Error = NtError;

    fn try_from(p: u64) -> Result<Self, Self::Error> {
        PrimeModulus::new(p)
    }
}

/// Value of the quadratic character at one element of `Z_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CharacterValue {
    Zero,
    Residue,
    Nonresidue,
}

impl CharacterValue {
    pub fn as_i8(self) -> i8 {
        match self {
            CharacterValue::Zero => 0,
            CharacterValue::Residue => 1,
            CharacterValue::Nonresidue => -1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            0 => Some(CharacterValue::Zero),
            1 => Some(CharacterValue::Residue),
            -1 => Some(CharacterValue::Nonresidue),
            _ => None,
        }
    }
}

impl std::ops::Mul for CharacterValue {
    type Output = CharacterValue;

    fn mul(self, rhs: Self) -> Self {
        CharacterValue::from_i8(self.as_i8() * rhs.as_i8()).unwrap()
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `base^exp mod m` by square-and-multiply with 128-bit intermediates.
pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    assert!(m >= 2, "modulus must be at least 2");
    let mut result = 1 % m;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(result, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    result
}

// First twelve primes: a complete Miller-Rabin witness set below 3.3 * 10^24.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &MR_WITNESSES {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Legendre symbol by Euler's criterion, `a^((p-1)/2) mod p`.
pub fn legendre_euler(a: impl Into<i128>, p: PrimeModulus) -> CharacterValue {
    let a = p.reduce(a.into());
    if a == 0 {
        return CharacterValue::Zero;
    }
    if mod_pow(a, (p.get() - 1) / 2, p.get()) == 1 {
        CharacterValue::Residue
    } else {
        CharacterValue::Nonresidue
    }
}

/// Legendre symbol by the binary Jacobi algorithm (reciprocity plus the
/// supplementary law for 2). No exponentiation is involved, so this serves
/// as an independent check on [`legendre_euler`].
pub fn legendre_reciprocity(a: impl Into<i128>, p: PrimeModulus) -> CharacterValue {
    let mut a = p.reduce(a.into());
    let mut n = p.get();
    let mut sign = 1i8;
    while a != 0 {
        let twos = a.trailing_zeros();
        a >>= twos;
        if twos % 2 == 1 && matches!(n % 8, 3 | 5) {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    if n == 1 {
        CharacterValue::from_i8(sign).unwrap()
    } else {
        CharacterValue::Zero
    }
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

/// Odd numbers covered by one sieve segment.
const SEGMENT_ODDS: u64 = 1 << 18;

/// Increasing stream of the primes in `[lo, hi]`, produced by a segmented
/// sieve over odd numbers. Working memory is one fixed-size segment plus the
/// sieving primes up to `√hi`.
#[derive(Debug, Clone)]
pub struct PrimeRange {
    hi: u64,
    filter: Option<Mod4Class>,
    base: Vec<u64>,
    // next odd number not yet sieved; None once past hi
    next_odd: Option<u64>,
    emit_two: bool,
    buf: Vec<u64>,
    pos: usize,
    composite: Vec<u64>,
}

pub fn primes_in_range(
    lo: u64,
    hi: u64,
    class_filter: Option<Mod4Class>,
) -> Result<PrimeRange, NtError> {
    if lo > hi {
        return Err(NtError::EmptyRange { lo, hi });
    }
    if lo < 2 {
        return Err(NtError::RangeBelowTwo(lo));
    }
    let first_odd = if lo <= 3 { 3 } else { lo | 1 };
    let base = small_primes(isqrt(hi));
    Ok(PrimeRange {
        hi,
        filter: class_filter,
        base,
        next_odd: (first_odd <= hi).then_some(first_odd),
        emit_two: lo == 2 && class_filter.is_none(),
        buf: Vec::new(),
        pos: 0,
        composite: vec![0; (SEGMENT_ODDS / 64) as usize],
    })
}

impl PrimeRange {
    /// Adapts the stream to odd-prime moduli (drops 2).
    pub fn moduli(self) -> impl Iterator<Item = PrimeModulus> {
        self.filter(|&p| p != 2).map(PrimeModulus)
    }

    fn fill_segment(&mut self) -> bool {
        let Some(start) = self.next_odd else {
            return false;
        };
        let span = ((self.hi - start) / 2 + 1).min(SEGMENT_ODDS);
        let last = start + 2 * (span - 1);
        self.composite.iter_mut().for_each(|w| *w = 0);
        for &q in self.base.iter().skip(1) {
            let qq = q * q;
            if qq > last {
                break;
            }
            // first odd multiple of q that is >= max(start, q*q)
            let mut m = if qq >= start {
                qq
            } else {
                let r = start.div_ceil(q) * q;
                if r % 2 == 0 {
                    r + q
                } else {
                    r
                }
            };
            while m <= last {
                let idx = (m - start) / 2;
                self.composite[(idx / 64) as usize] |= 1 << (idx % 64);
                m += 2 * q;
            }
        }
        self.buf.clear();
        self.pos = 0;
        for idx in 0..span {
            if self.composite[(idx / 64) as usize] >> (idx % 64) & 1 == 0 {
                let n = start + 2 * idx;
                if n < 3 {
                    continue;
                }
                if self.filter.is_none_or(|c| n % 4 == c.value()) {
                    self.buf.push(n);
                }
            }
        }
        self.next_odd = last.checked_add(2).filter(|&n| n <= self.hi);
        true
    }
}

impl Iterator for PrimeRange {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.emit_two {
            self.emit_two = false;
            return Some(2);
        }
        loop {
            if self.pos < self.buf.len() {
                self.pos += 1;
                return Some(self.buf[self.pos - 1]);
            }
            if !self.fill_segment() {
                return None;
            }
        }
    }
}

/// Plain Eratosthenes up to `limit` (inclusive); used for sieving primes.
fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            for j in (i * i..=n).step_by(i) {
                sieve[j] = false;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i as u64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    fn pm(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    #[test]
    fn mod_pow_examples() {
        assert_eq!(mod_pow(2, 3, 7), 1);
        assert_eq!(mod_pow(5, 0, 11), 1);
        assert_eq!(mod_pow(3, 3, 7), 6);
        assert_eq!(mod_pow(u64::MAX - 1, u64::MAX, u64::MAX), u64::MAX - 1);
    }

    #[test]
    fn is_prime_examples() {
        assert!(is_prime(7));
        assert!(!is_prime(0));
        assert!(!is_prime(1));
        assert!(!is_prime(561));
        // strong pseudoprime to bases 2..=37 except the full set
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn is_prime_matches_trial_division() {
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn prime_modulus_rejects_non_odd_primes() {
        assert_eq!(PrimeModulus::new(2), Err(NtError::NotOddPrime(2)));
        assert_eq!(PrimeModulus::new(9), Err(NtError::NotOddPrime(9)));
        let p = pm(23);
        assert_eq!(p.class_mod4(), Mod4Class::Three);
        assert_eq!(p.class_mod8(), 7);
        assert_eq!(p.ceil_log2(), 5);
        assert_eq!(pm(17).ceil_log2(), 5);
        assert_eq!(pm(3).ceil_log2(), 2);
    }

    #[test]
    fn legendre_examples() {
        use CharacterValue::*;
        assert_eq!(legendre_euler(2, pm(7)), Residue);
        assert_eq!(legendre_euler(14, pm(7)), Zero);
        assert_eq!(legendre_euler(-3, pm(7)), Residue);
        assert_eq!(legendre_reciprocity(2, pm(7)), Residue);
        assert_eq!(legendre_reciprocity(0, pm(11)), Zero);
        assert_eq!(legendre_reciprocity(3, pm(7)), Nonresidue);
        for p in [3u64, 7, 11, 19, 23, 1_000_003] {
            assert_eq!(legendre_euler(p - 1, pm(p)), Nonresidue);
            assert_eq!(legendre_reciprocity(p - 1, pm(p)), Nonresidue);
        }
    }

    #[test]
    fn legendre_matches_squares_for_small_primes() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43] {
            let squares: Vec<u64> = (1..p).map(|x| x * x % p).collect();
            for a in 1..p {
                let expect = if squares.contains(&a) {
                    CharacterValue::Residue
                } else {
                    CharacterValue::Nonresidue
                };
                assert_eq!(legendre_euler(a, pm(p)), expect);
                assert_eq!(legendre_reciprocity(a, pm(p)), expect);
            }
        }
    }

    #[test]
    fn prime_range_examples() {
        let v: Vec<u64> = primes_in_range(2, 12, None).unwrap().collect();
        assert_eq!(v, [2, 3, 5, 7, 11]);
        let v: Vec<u64> = primes_in_range(2, 25, Some(Mod4Class::Three)).unwrap().collect();
        assert_eq!(v, [3, 7, 11, 19, 23]);
        assert_eq!(primes_in_range(90, 96, None).unwrap().count(), 0);
        assert_eq!(primes_in_range(3, 3, None).unwrap().collect::<Vec<_>>(), [3]);
        assert_eq!(primes_in_range(2, 2, None).unwrap().collect::<Vec<_>>(), [2]);
        assert!(matches!(primes_in_range(10, 5, None), Err(NtError::EmptyRange { .. })));
        assert!(primes_in_range(0, 5, None).is_err());
    }

    #[test]
    fn prime_range_matches_trial_division() {
        let expect: Vec<u64> = (2..=100_000).filter(|&n| trial_division(n)).collect();
        let got: Vec<u64> = primes_in_range(2, 100_000, None).unwrap().collect();
        assert_eq!(got, expect);
        // spans several segments with an unaligned start
        let expect: Vec<u64> = (1_000_001..=1_600_000u64)
            .filter(|&n| is_prime(n) && n % 4 == 1)
            .collect();
        let got: Vec<u64> = primes_in_range(1_000_001, 1_600_000, Some(Mod4Class::One))
            .unwrap()
            .collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn prime_range_high_window() {
        let lo = (1u64 << 40) - 5000;
        let hi = 1u64 << 40;
        let expect: Vec<u64> = (lo..=hi).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes_in_range(lo, hi, None).unwrap().collect::<Vec<_>>(), expect);
    }

    proptest! {
        #[test]
        fn character_is_multiplicative(idx in 0usize..200, a in 1u64..1_000_000, b in 1u64..1_000_000) {
            let p = pm(primes_in_range(3, 1300, None).unwrap().nth(idx % 200).unwrap());
            let (a, b) = (a % p.get(), b % p.get());
            prop_assume!(a != 0 && b != 0);
            let ab = mul_mod(a, b, p.get());
            prop_assert_eq!(legendre_euler(ab, p), legendre_euler(a, p) * legendre_euler(b, p));
            prop_assert_eq!(legendre_reciprocity(ab, p), legendre_reciprocity(a, p) * legendre_reciprocity(b, p));
        }

        #[test]
        fn negation_symmetry_by_class(idx in 0usize..200, a in 1u64..1_000_000) {
            let p = pm(primes_in_range(3, 1300, None).unwrap().nth(idx % 200).unwrap());
            let a = a % p.get();
            prop_assume!(a != 0);
            let x = legendre_euler(a, p);
            let neg = legendre_euler(p.get() - a, p);
            match p.class_mod4() {
                Mod4Class::Three => prop_assert_eq!(neg.as_i8(), -x.as_i8()),
                Mod4Class::One => prop_assert_eq!(neg, x),
            }
        }

        #[test]
        fn two_routes_agree_on_word_sized_primes(seed in any::<u64>(), a in any::<i64>()) {
            let mut p = seed | 1;
            while !is_prime(p) || p < 3 {
                p = p.wrapping_add(2) | 1;
            }
            let p = pm(p);
            prop_assert_eq!(legendre_euler(a, p), legendre_reciprocity(a, p));
        }
    }
}
