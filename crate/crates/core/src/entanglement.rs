//! Spectra, majorization comparison, entropy functionals, and the
//! two-fermion concurrence.

use crate::dm::rho_m;
use crate::error::{Error, Result};
use crate::fock::{binom_f64, NSectorDensityOperator, PureState};
use num_complex::Complex64;

/// Default absolute tolerance for majorization prefix comparisons; override
/// with the `MBODY_TOL` environment variable.
pub const DEFAULT_MAJORIZATION_TOL: f64 = 1e-9;

/// Read the majorization tolerance from `MBODY_TOL`, falling back to
/// [`DEFAULT_MAJORIZATION_TOL`] when unset or unparseable.
pub fn majorization_tol() -> f64 {
    std::env::var("MBODY_TOL")
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0)
        .unwrap_or(DEFAULT_MAJORIZATION_TOL)
}

/// Nonincreasing nonnegative eigenvalue list.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sort nonincreasing and clamp small negative entries (within
    /// `1e-10 * max(1, |sum|)`) to zero; larger negatives are rejected.
    pub fn new(values: Vec<f64>) -> Result<Spectrum> {
        let sum: f64 = values.iter().sum();
        let floor = -1e-10 * sum.abs().max(1.0);
        let mut cleaned = Vec::with_capacity(values.len());
        for v in values {
            if v < floor {
                return Err(Error::NegativeSpectrumEntry(v));
            }
            cleaned.push(v.max(0.0));
        }
        cleaned.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(Spectrum { values: cleaned })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Outcome of a two-sided majorization comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MajorizationVerdict {
    /// The first spectrum is majorized by the second (first is more mixed).
    FirstMoreMixed,
    /// The second spectrum is majorized by the first.
    SecondMoreMixed,
    /// Each majorizes the other within tolerance.
    Equivalent,
    /// Neither majorizes the other.
    Incomparable,
}

impl std::fmt::Display for MajorizationVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MajorizationVerdict::FirstMoreMixed => "first-more-mixed",
            MajorizationVerdict::SecondMoreMixed => "second-more-mixed",
            MajorizationVerdict::Equivalent => "equivalent",
            MajorizationVerdict::Incomparable => "incomparable",
        };
        f.write_str(s)
    }
}

/// Full evidence for a majorization comparison: prefix-sum tables for both
/// spectra (zero-padded to common length) and, per direction, the first
/// prefix index that breaks it.
#[derive(Debug, Clone)]
pub struct MajorizationReport {
    pub verdict: MajorizationVerdict,
    /// First k (1-based) with sum_a(k) > sum_b(k) + tol, breaking "a is
    /// majorized by b"; None when that direction holds.
    pub first_violation_a_under_b: Option<usize>,
    /// First k breaking "b is majorized by a".
    pub first_violation_b_under_a: Option<usize>,
    pub prefix_a: Vec<f64>,
    pub prefix_b: Vec<f64>,
    pub tol: f64,
}

/// Compare two spectra of equal total weight under majorization.
pub fn majorize_compare(a: &Spectrum, b: &Spectrum, tol: f64) -> Result<MajorizationReport> {
    let (ta, tb) = (a.sum(), b.sum());
    if (ta - tb).abs() > tol * ta.abs().max(tb.abs()).max(1.0) {
        return Err(Error::TraceMismatch(ta, tb));
    }
    let len = a.len().max(b.len());
    let mut prefix_a = Vec::with_capacity(len);
    let mut prefix_b = Vec::with_capacity(len);
    let (mut ca, mut cb) = (0.0f64, 0.0f64);
    for i in 0..len {
        ca += a.values().get(i).copied().unwrap_or(0.0);
        cb += b.values().get(i).copied().unwrap_or(0.0);
        prefix_a.push(ca);
        prefix_b.push(cb);
    }
    let mut first_violation_a_under_b = None;
    let mut first_violation_b_under_a = None;
    for i in 0..len {
        if first_violation_a_under_b.is_none() && prefix_a[i] > prefix_b[i] + tol {
            first_violation_a_under_b = Some(i + 1);
        }
        if first_violation_b_under_a.is_none() && prefix_b[i] > prefix_a[i] + tol {
            first_violation_b_under_a = Some(i + 1);
        }
    }
    let verdict = match (first_violation_a_under_b, first_violation_b_under_a) {
        (None, None) => MajorizationVerdict::Equivalent,
        (None, Some(_)) => MajorizationVerdict::FirstMoreMixed,
        (Some(_), None) => MajorizationVerdict::SecondMoreMixed,
        (Some(_), Some(_)) => MajorizationVerdict::Incomparable,
    };
    Ok(MajorizationReport {
        verdict,
        first_violation_a_under_b,
        first_violation_b_under_a,
        prefix_a,
        prefix_b,
        tol,
    })
}

/// Schur-concave entropy functionals on spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyFunctional {
    /// `-sum lambda log2 lambda`.
    VonNeumann,
    /// `sum [-lambda ln lambda + (1 + lambda) ln(1 + lambda)]`, natural log.
    BosonicLike,
    /// `sum lambda (1 - lambda)`.
    Linear,
}

impl EntropyFunctional {
    fn term(self, x: f64) -> f64 {
        match self {
            EntropyFunctional::VonNeumann => {
                if x > 0.0 {
                    -x * x.log2()
                } else {
                    0.0
                }
            }
            EntropyFunctional::BosonicLike => {
                let up = (1.0 + x) * (1.0 + x).ln();
                if x > 0.0 {
                    -x * x.ln() + up
                } else {
                    up
                }
            }
            EntropyFunctional::Linear => x * (1.0 - x),
        }
    }
}

/// Entropy of a spectrum under the chosen functional.
pub fn entropy(spectrum: &Spectrum, functional: EntropyFunctional) -> f64 {
    spectrum.values().iter().map(|&x| functional.term(x)).sum()
}

/// Von Neumann entropy of the trace-1 rescaling of rho^(M):
/// `S(rho^(M)) / binom(N,M) + log2 binom(N,M)`.
pub fn normalized_entropy(spectrum: &Spectrum, n: usize, m: usize) -> Result<f64> {
    let c = binom_f64(n, m)?;
    let scaled = Spectrum::new(spectrum.values().iter().map(|&x| x / c).collect())?;
    Ok(entropy(&scaled, EntropyFunctional::VonNeumann))
}

/// Concurrence of a two-fermion state in four modes:
/// `C = 2 |G_01 G_23 - G_02 G_13 + G_03 G_12|` on the normalized coefficient
/// matrix. The (unnormalized) rho^(1) spectrum is `{l+, l+, l-, l-}` with
/// `l_pm = (1 pm sqrt(1 - C^2)) / 2`.
pub fn concurrence_d4(state: &PureState) -> Result<f64> {
    if state.d() != 4 || state.n() != 2 {
        return Err(Error::SectorMismatch {
            d1: 4,
            n1: 2,
            d2: state.d(),
            n2: state.n(),
        });
    }
    let g = |i: usize, j: usize| state.amplitude((1u64 << i) | (1u64 << j));
    let pf = g(0, 1) * g(2, 3) - g(0, 2) * g(1, 3) + g(0, 3) * g(1, 2);
    Ok(2.0 * pf.norm())
}

/// rho^(M) spectrum of a pure state as a [`Spectrum`].
pub fn rho_m_spectrum(state: &PureState, m: usize) -> Result<Spectrum> {
    Spectrum::new(rho_m(state, m)?.spectrum())
}

/// rho^(M) spectrum of a mixed state as a [`Spectrum`].
pub fn rho_m_mixed_spectrum(op: &NSectorDensityOperator, m: usize) -> Result<Spectrum> {
    Spectrum::new(crate::dm::rho_m_mixed(op, m)?.spectrum())
}

/// Eigenvalues of a sum of Hermitian matrices are majorized by the entrywise
/// sum of the summands' individually sorted eigenvalue vectors (both sides
/// share the same trace). Used to verify measurement-mixture majorization.
pub fn mixture_majorization_report(
    parts: &[nalgebra::DMatrix<Complex64>],
    tol: f64,
) -> Result<MajorizationReport> {
    let mut total = parts[0].clone();
    for p in &parts[1..] {
        total += p;
    }
    let sum_spec = Spectrum::new(crate::linalg::eigvalsh(&total))?;
    let mut combined = vec![0.0f64; total.nrows()];
    for p in parts {
        for (slot, v) in combined.iter_mut().zip(crate::linalg::eigvalsh(p)) {
            *slot += v;
        }
    }
    let part_spec = Spectrum::new(combined)?;
    majorize_compare(&sum_spec, &part_spec, tol)
}
