use thiserror::Error;

/// Errors raised by state construction, matrix assembly, and the channel
/// pipeline. Numerical tolerance violations carry the offending value so
/// callers can report how far off the input was.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode count D={0} outside supported range 1..=63")]
    BadModeCount(usize),

    #[error("mode index {mode} out of range for D={d}")]
    ModeOutOfRange { mode: usize, d: usize },

    #[error("duplicate mode index {0}")]
    DuplicateMode(usize),

    #[error("index tuple not strictly increasing at position {0}")]
    UnsortedTuple(usize),

    #[error("subset index {index} out of range: binom({d},{m}) = {count}")]
    SubsetIndexOutOfRange {
        index: usize,
        d: usize,
        m: usize,
        count: u64,
    },

    #[error("binomial ({n} choose {k}) overflows u64")]
    BinomialOverflow { n: usize, k: usize },

    #[error("fermion number N={n} exceeds mode count D={d}")]
    BadFermionNumber { n: usize, d: usize },

    #[error("mask {mask:#b} has {got} fermions, sector requires {want}")]
    WrongSector { mask: u64, got: u32, want: usize },

    #[error("mask {mask:#b} has bits set at or above mode count D={d}")]
    MaskOutOfRange { mask: u64, d: usize },

    #[error("alpha mask {alpha:#b} is not a subset of union mask {union:#b}")]
    NotSubmask { alpha: u64, union: u64 },

    #[error("body order M={m} outside 0..={n}")]
    BodyOrderOutOfRange { m: usize, n: usize },

    #[error("Schmidt decomposition requires 1 <= M <= N-1, got M={m} with N={n}")]
    SchmidtOrderOutOfRange { m: usize, n: usize },

    #[error("annihilation order L={l} outside 1..={n}")]
    AnnihilationOrderOutOfRange { l: usize, n: usize },

    #[error("binom({d},{m}) = {rows} rows exceeds the {limit}-row guard")]
    DimensionGuard {
        d: usize,
        m: usize,
        rows: u64,
        limit: u64,
    },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("coefficient matrix not antisymmetric (max deviation {0:.3e})")]
    NotAntisymmetric(f64),

    #[error("mode count D={0} is odd, pair construction requires even D")]
    OddModeCount(usize),

    #[error("pair count k={k} out of range 0..={max}")]
    PairCountOutOfRange { k: usize, max: usize },

    #[error("sector mismatch: (D={d1}, N={n1}) vs (D={d2}, N={n2})")]
    SectorMismatch {
        d1: usize,
        n1: usize,
        d2: usize,
        n2: usize,
    },

    #[error("matrix not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix not positive semidefinite (eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("matrix not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("Kraus blocks violate completeness sum_r T_r^dag T_r = I (max deviation {0:.3e})")]
    IncompleteKraus(f64),

    #[error("Kraus block {index} is {rows}x{cols}, expected {want_rows}x{want_cols}")]
    KrausShape {
        index: usize,
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },

    #[error("register size D_A={d_a} smaller than body order M={m}")]
    SubsystemTooSmall { d_a: usize, m: usize },

    #[error("spectrum entry {0:.3e} below the negative-eigenvalue clamp tolerance")]
    NegativeSpectrumEntry(f64),

    #[error("spectrum traces differ beyond tolerance: {0:.12} vs {1:.12}")]
    TraceMismatch(f64, f64),

    #[error("coefficient vector not normalized: sum of squares {0:.12}")]
    UnnormalizedCoefficients(f64),

    #[error("coefficient vector has {got} entries, expected binom({d},{m}) = {want}")]
    CoefficientLength {
        got: usize,
        d: usize,
        m: usize,
        want: usize,
    },

    #[error("measurement on the vacuum: no fermion to annihilate")]
    VacuumInput,

    #[error("zero-probability branch has no post state")]
    ZeroProbabilityBranch,

    #[error("mixed-state channel path limited to D<={limit}, got D={d}")]
    MixedPathTooLarge { d: usize, limit: usize },

    #[error("density operator trace {0:.12} is not 1 within tolerance")]
    NotUnitTrace(f64),

    #[error("analytic spectrum for M={m} not available at D={d}")]
    UnsupportedAnalyticOrder { m: usize, d: usize },

    #[error("state parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
