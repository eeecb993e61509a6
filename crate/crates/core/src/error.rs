use std::io;

use thiserror::Error;

/// Errors surfaced by the library. Each variant is a distinct failure class so
/// callers (and the CLI exit-code mapping) can match on them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("secret key rank deficient: rank {rank} < {rows} after {attempts} attempts")]
    RankDeficient { rank: usize, rows: usize, attempts: usize },
    #[error("list cap {cap} exceeds the {available} available combinations")]
    CapTooLarge { cap: u128, available: u128 },
    #[error("no recovered dual vectors; rerun with larger list caps")]
    EmptyRecovered,
    #[error("no duplicate row pairs to test")]
    EmptyPairs,
    #[error("no weak key among {0} scanned keys")]
    NoWeakKey(usize),
    #[error("information set decoding gave up after {0} iterations")]
    IsdExhausted(u64),
    #[error("overlay weight {needed} does not fit in {available} free positions")]
    OverlayTooLarge { needed: usize, available: usize },
    #[error("no overlay rate separates adversarial from random noise: {0}")]
    NoOverlayGap(String),
    #[error("odd number of targets ({0}); pairwise differencing needs an even count")]
    OddTargets(usize),
    #[error("budget {requested} exceeds the {available} weight-{weight} vectors")]
    BudgetTooLarge { requested: u128, available: u128, weight: usize },
    #[error("t = {t} outside the supported range {min}..={max}")]
    TOutOfRange { t: usize, min: usize, max: usize },
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("key invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
