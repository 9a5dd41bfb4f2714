use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qrcensus::{ApKind, DEFAULT_K_MAX, DEFAULT_MEMORY_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Shds,
    Ap,
    Dichotomy,
    Peralta,
    Duality,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Residue,
    Nonresidue,
}

impl From<KindArg> for ApKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Residue => ApKind::Residue,
            KindArg::Nonresidue => ApKind::Nonresidue,
        }
    }
}

/// Quadratic-residue pattern censuses, AP counts, verification suites and
/// least-nonresidue scans.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "qrcensus", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Report encoding.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,

    /// Report destination (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Byte budget for a single character table.
    #[arg(long, default_value_t = DEFAULT_MEMORY_BUDGET, global = true)]
    pub memory_budget: u64,

    /// Largest census length (2^k counters).
    #[arg(long, default_value_t = DEFAULT_K_MAX, global = true)]
    pub k_max: u32,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Occurrence counts of every length-k pattern (or of one pattern).
    Census {
        /// Odd prime modulus.
        #[arg(long)]
        p: u64,
        /// Pattern length (required without --pattern).
        #[arg(long)]
        k: Option<u32>,
        /// Count a single pattern over {r, n} instead of the full census.
        #[arg(long)]
        pattern: Option<String>,
    },
    /// Number of residue or nonresidue APs of length k with difference d.
    ApCount {
        /// Odd prime modulus.
        #[arg(long)]
        p: u64,
        /// Progression length.
        #[arg(long)]
        k: u64,
        /// Common difference (nonzero mod p).
        #[arg(long)]
        d: u64,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Run verification suites over every qualifying prime up to --max-p.
    Verify {
        /// Largest prime checked.
        #[arg(long)]
        max_p: u64,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Largest prime for the O(p^2) difference-set check.
        #[arg(long, default_value_t = qrcensus::analysis::DEFAULT_SHDS_CAP)]
        shds_cap: u64,
    },
    /// Least nonresidue of every prime in [min, max] with bound columns.
    ScanNonresidue {
        #[arg(long)]
        min: u64,
        #[arg(long)]
        max: u64,
        /// Only primes p ≡ 3 (mod 4).
        #[arg(long)]
        class3_only: bool,
        /// Resume file holding the last completed prime.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Census at k = ceil(log2 p) summarized as a count histogram.
    Threshold {
        /// A single prime.
        #[arg(long, conflicts_with_all = ["range", "sample"])]
        p: Option<u64>,
        /// Draw primes from [A, B] (with --sample).
        #[arg(long, num_args = 2, value_names = ["A", "B"], requires = "sample")]
        range: Option<Vec<u64>>,
        /// Number of distinct primes to draw.
        #[arg(long)]
        sample: Option<usize>,
        /// Seed for the ChaCha8 sampler.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Only primes p ≡ 3 (mod 4).
        #[arg(long)]
        class3_only: bool,
    },
}
