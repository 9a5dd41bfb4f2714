//! Quadratic-residue character data modulo primes: character tables,
//! residue/nonresidue pattern censuses, arithmetic-progression counts,
//! least-nonresidue scans and the verification suites built on them.

pub mod analysis;
pub mod chartab;
pub mod ntcore;
pub mod patterns;

pub use chartab::{CharacterTable, TableError, DEFAULT_MEMORY_BUDGET};
pub use ntcore::{
    is_prime, legendre_euler, legendre_reciprocity, mod_pow, primes_in_range, CharacterValue,
    Mod4Class, NtError, PrimeModulus, PrimeRange,
};
pub use patterns::{
    census, census_with_cap, count_ap, count_pattern, least_nonresidue, pattern_from_string,
    ApCount, ApKind, Pattern, PatternCensus, PatternError, DEFAULT_K_MAX,
};
