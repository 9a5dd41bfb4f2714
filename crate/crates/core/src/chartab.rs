//! Bit-packed quadratic character table of `Z_p`.

use thiserror::Error;

use crate::ntcore::{CharacterValue, PrimeModulus};

/// 2^31 bits, enough to tabulate any prime below about 2.1 * 10^9.
pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("character table for p = {p} needs {required} bytes, budget is {budget}")]
    BudgetExceeded { p: u64, required: u64, budget: u64 },
}

/// Residue indicator for every element of `Z_p`: bit `a` is set iff `a` is a
/// nonzero quadratic residue. Bit 0 is always clear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterTable {
    p: PrimeModulus,
    words: Box<[u64]>,
}

/// Bytes needed to tabulate `p`.
pub fn table_bytes(p: PrimeModulus) -> u64 {
    p.get().div_ceil(64) * 8 + std::mem::size_of::<CharacterTable>() as u64
}

impl CharacterTable {
    /// Tabulates residuosity by marking `x² mod p` for `x = 1..=(p-1)/2`.
    pub fn build(p: PrimeModulus, memory_budget: u64) -> Result<Self, TableError> {
        let required = table_bytes(p);
        if required > memory_budget {
            return Err(TableError::BudgetExceeded {
                p: p.get(),
                required,
                budget: memory_budget,
            });
        }
        let n = p.get();
        let mut words = vec![0u64; n.div_ceil(64) as usize].into_boxed_slice();
        // (x+1)^2 = x^2 + (2x + 1); both terms kept reduced below p
        let mut square = 0u64;
        let mut step = 1u64;
        for _ in 0..(n - 1) / 2 {
            square = add_mod(square, step, n);
            step = add_mod(step, 2, n);
            words[(square / 64) as usize] |= 1 << (square % 64);
        }
        Ok(CharacterTable { p, words })
    }

    pub fn with_default_budget(p: PrimeModulus) -> Result<Self, TableError> {
        Self::build(p, DEFAULT_MEMORY_BUDGET)
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p.get()
    }

    /// Raw residue bit for `a < p`.
    #[inline]
    pub fn is_residue(&self, a: u64) -> bool {
        debug_assert!(a < self.p());
        self.words[(a / 64) as usize] >> (a % 64) & 1 == 1
    }

    pub fn chi(&self, a: impl Into<i128>) -> CharacterValue {
        let a = self.p.reduce(a.into());
        if a == 0 {
            CharacterValue::Zero
        } else if self.is_residue(a) {
            CharacterValue::Residue
        } else {
            CharacterValue::Nonresidue
        }
    }

    pub fn residue_count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Nonzero residues in increasing order.
    pub fn residues(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let base = i as u64 * 64;
            BitIter(w).map(move |b| base + b as u64)
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

#[inline]
fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let t = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntcore::{legendre_euler, primes_in_range, Mod4Class};

    fn table(p: u64) -> CharacterTable {
        CharacterTable::with_default_budget(PrimeModulus::new(p).unwrap()).unwrap()
    }

    #[test]
    fn residue_sets() {
        assert_eq!(table(7).residues().collect::<Vec<_>>(), [1, 2, 4]);
        assert_eq!(table(11).residues().collect::<Vec<_>>(), [1, 3, 4, 5, 9]);
        assert_eq!(
            table(19).residues().collect::<Vec<_>>(),
            [1, 4, 5, 6, 7, 9, 11, 16, 17]
        );
    }

    #[test]
    fn chi_examples() {
        let t = table(7);
        assert_eq!(t.chi(2), CharacterValue::Residue);
        assert_eq!(t.chi(0), CharacterValue::Zero);
        assert_eq!(t.chi(3), CharacterValue::Nonresidue);
        assert_eq!(t.chi(-5), CharacterValue::Residue);
        assert_eq!(t.chi(700), CharacterValue::Zero);
    }

    #[test]
    fn budget_exceeded_reports_required_size() {
        let p = PrimeModulus::new(1_000_003).unwrap();
        let err = CharacterTable::build(p, 1000).unwrap_err();
        assert_eq!(
            err,
            TableError::BudgetExceeded {
                p: 1_000_003,
                required: table_bytes(p),
                budget: 1000
            }
        );
        assert!(CharacterTable::build(p, table_bytes(p)).is_ok());
    }

    #[test]
    fn table_invariants_and_euler_sweep() {
        for p in primes_in_range(3, 3000, None).unwrap().moduli() {
            let t = CharacterTable::with_default_budget(p).unwrap();
            let n = p.get();
            assert_eq!(t.residue_count(), (n - 1) / 2);
            assert!(t.is_residue(1));
            assert!(!t.is_residue(0));
            for a in 0..n {
                assert_eq!(t.chi(a), legendre_euler(a, p), "p = {n}, a = {a}");
            }
            if p.class_mod4() == Mod4Class::Three {
                for a in 1..n {
                    assert!(t.is_residue(a) ^ t.is_residue(n - a));
                }
            }
        }
    }
}
