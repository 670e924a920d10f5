//! Fermionic Fock-space plumbing: occupation masks, lexicographic subset
//! indexing, Jordan-Wigner parities, sparse pure states, and N-sector density
//! operators.
//!
//! Conventions fixed here and relied on by every other module:
//!
//! - Modes are zero-based, `0..D` with `D <= 63`. An occupation mask is a
//!   `u64` with bit `i` set iff single-particle mode `i` is occupied.
//! - The basis Slater determinant for mask `m = {i1 < i2 < ... < iN}` is the
//!   ascending creation string `c^dag_{i1} c^dag_{i2} ... c^dag_{iN} |0>`;
//!   amplitudes are always stored against this ordering. Any other operator
//!   ordering picks up the permutation parity, see [`split_sign`].
//! - M-element mode subsets are indexed by their lexicographic rank among
//!   sorted index tuples ([`subset_rank`] / [`subset_unrank`]); this rank
//!   orders every matrix row and column in the crate.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Amplitudes with magnitude below this are dropped after arithmetic.
pub const PRUNE_EPSILON: f64 = 1e-14;

/// Refuse to build matrices with more rows than this.
pub const DIMENSION_GUARD: u64 = 50_000;

/// Largest supported mode count (masks are u64 bit-sets).
pub const MAX_MODES: usize = 63;

/// Occupation mask: bit `i` set iff mode `i` is occupied.
pub type Mask = u64;

pub(crate) fn check_mode_count(d: usize) -> Result<()> {
    if d == 0 || d > MAX_MODES {
        return Err(Error::BadModeCount(d));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Binomials and lexicographic subset indexing
// ---------------------------------------------------------------------------

/// Exact binomial coefficient, with overflow detection.
pub fn binom(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let kk = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=kk {
        acc = acc
            .checked_mul((n - kk + i) as u128)
            .ok_or(Error::BinomialOverflow { n, k })?
            / i as u128;
    }
    u64::try_from(acc).map_err(|_| Error::BinomialOverflow { n, k })
}

/// `binom` as f64, for trace comparisons.
pub fn binom_f64(n: usize, k: usize) -> Result<f64> {
    Ok(binom(n, k)? as f64)
}

fn check_tuple(modes: &[usize], d: usize) -> Result<()> {
    check_mode_count(d)?;
    for (t, &c) in modes.iter().enumerate() {
        if c >= d {
            return Err(Error::ModeOutOfRange { mode: c, d });
        }
        if t > 0 && modes[t - 1] >= c {
            return Err(Error::UnsortedTuple(t));
        }
    }
    Ok(())
}

/// Lexicographic rank of a strictly increasing index tuple among all
/// `binom(D, M)` subsets of `{0, ..., D-1}` with `M = modes.len()`.
pub fn subset_rank(modes: &[usize], d: usize) -> Result<usize> {
    check_tuple(modes, d)?;
    let m = modes.len();
    let mut rank: u64 = 0;
    let mut next = 0usize;
    for (t, &c) in modes.iter().enumerate() {
        for j in next..c {
            rank += binom(d - 1 - j, m - 1 - t)?;
        }
        next = c + 1;
    }
    Ok(rank as usize)
}

/// Lexicographic rank of the set bits of `mask` (see [`subset_rank`]).
pub fn subset_rank_mask(mask: Mask, d: usize) -> Result<usize> {
    subset_rank(&modes_from_mask(mask), d)
}

/// Inverse of [`subset_rank`]: the `index`-th M-subset of `{0, ..., D-1}` in
/// lexicographic order, as a sorted tuple.
pub fn subset_unrank(index: usize, d: usize, m: usize) -> Result<Vec<usize>> {
    check_mode_count(d)?;
    let count = binom(d, m)?;
    if index as u64 >= count {
        return Err(Error::SubsetIndexOutOfRange { index, d, m, count });
    }
    let mut rank = index as u64;
    let mut modes = Vec::with_capacity(m);
    let mut c = 0usize;
    for t in 0..m {
        loop {
            let below = binom(d - 1 - c, m - 1 - t)?;
            if rank < below {
                break;
            }
            rank -= below;
            c += 1;
        }
        modes.push(c);
        c += 1;
    }
    Ok(modes)
}

/// All M-subsets of `{0, ..., D-1}` as masks, in lexicographic tuple order
/// (i.e. by ascending [`subset_rank`]). This is the canonical basis order of
/// every M-indexed matrix axis.
pub fn sector_masks(d: usize, m: usize) -> Result<Vec<Mask>> {
    check_mode_count(d)?;
    if m > d {
        return Err(Error::BadFermionNumber { n: m, d });
    }
    let count = binom(d, m)? as usize;
    let mut out = Vec::with_capacity(count);
    if m == 0 {
        out.push(0);
        return Ok(out);
    }
    let mut tuple: Vec<usize> = (0..m).collect();
    loop {
        out.push(mask_from_sorted(&tuple));
        // advance to the lexicographic successor
        let mut i = m;
        while i > 0 {
            i -= 1;
            if tuple[i] < d - (m - i) {
                tuple[i] += 1;
                for j in i + 1..m {
                    tuple[j] = tuple[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                debug_assert_eq!(out.len(), count);
                return Ok(out);
            }
        }
    }
}

fn mask_from_sorted(modes: &[usize]) -> Mask {
    modes.iter().fold(0u64, |acc, &i| acc | 1 << i)
}

/// Mask from a list of distinct modes (any order); rejects duplicates and
/// out-of-range entries.
pub fn mask_from_modes(modes: &[usize], d: usize) -> Result<Mask> {
    check_mode_count(d)?;
    let mut mask = 0u64;
    for &i in modes {
        if i >= d {
            return Err(Error::ModeOutOfRange { mode: i, d });
        }
        if mask >> i & 1 == 1 {
            return Err(Error::DuplicateMode(i));
        }
        mask |= 1 << i;
    }
    Ok(mask)
}

/// Set bits of `mask` as an ascending mode list.
pub fn modes_from_mask(mask: Mask) -> Vec<usize> {
    let mut modes = Vec::with_capacity(mask.count_ones() as usize);
    let mut rest = mask;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        modes.push(i);
        rest &= rest - 1;
    }
    modes
}

/// All K-element submasks of `mask`, in lexicographic order of their mode
/// tuples.
pub fn k_submasks(mask: Mask, k: usize) -> Vec<Mask> {
    let modes = modes_from_mask(mask);
    let n = modes.len();
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    if k == 0 {
        out.push(0);
        return out;
    }
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        out.push(pick.iter().fold(0u64, |acc, &p| acc | 1 << modes[p]));
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pick[i] < n - (k - i) {
                pick[i] += 1;
                for j in i + 1..k {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Jordan-Wigner signs
// ---------------------------------------------------------------------------

#[inline]
fn parity_sign(count: u32) -> i32 {
    1 - 2 * ((count & 1) as i32)
}

#[inline]
fn bits_below(mask: Mask, mode: usize) -> u32 {
    (mask & ((1u64 << mode) - 1)).count_ones()
}

/// `c^dag_mode |mask>`: `None` if the mode is already occupied, otherwise the
/// new mask and the parity `(-1)^(occupied modes below `mode`)`.
pub fn apply_create(d: usize, mode: usize, mask: Mask) -> Result<Option<(Mask, i32)>> {
    check_mode_count(d)?;
    if mode >= d {
        return Err(Error::ModeOutOfRange { mode, d });
    }
    if mask >> mode & 1 == 1 {
        return Ok(None);
    }
    Ok(Some((
        mask | 1 << mode,
        parity_sign(bits_below(mask, mode)),
    )))
}

/// `c_mode |mask>`: `None` if the mode is empty, otherwise the new mask and
/// the same parity convention as [`apply_create`].
pub fn apply_annihilate(d: usize, mode: usize, mask: Mask) -> Result<Option<(Mask, i32)>> {
    check_mode_count(d)?;
    if mode >= d {
        return Err(Error::ModeOutOfRange { mode, d });
    }
    if mask >> mode & 1 == 0 {
        return Ok(None);
    }
    Ok(Some((
        mask & !(1 << mode),
        parity_sign(bits_below(mask, mode)),
    )))
}

/// Parity of the permutation taking the ascending union tuple to the
/// concatenation (sorted alpha, sorted beta) with `beta = union \ alpha`:
/// `(-1)^K` with `K = sum_{a in alpha} |{b in beta : b < a}|`.
pub fn split_sign(union: Mask, alpha: Mask) -> Result<i32> {
    if alpha & !union != 0 {
        return Err(Error::NotSubmask { alpha, union });
    }
    let beta = union ^ alpha;
    let mut crossings = 0u32;
    let mut rest = alpha;
    while rest != 0 {
        let a = rest.trailing_zeros() as usize;
        crossings += bits_below(beta, a);
        rest &= rest - 1;
    }
    Ok(parity_sign(crossings))
}

// ---------------------------------------------------------------------------
// Pure states
// ---------------------------------------------------------------------------

/// One creation or annihilation operator in a product string.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderOp {
    Create(usize),
    Annihilate(usize),
}

/// Sparse N-fermion pure state over D modes. Amplitudes are stored per
/// occupation mask against the ascending creation-string convention; entries
/// below [`PRUNE_EPSILON`] are dropped. Construction does not normalize; the
/// factory functions and channel outputs do.
#[derive(Clone, Debug)]
pub struct PureState {
    d: usize,
    n: usize,
    amps: BTreeMap<Mask, Complex64>,
}

impl PureState {
    /// Build a state from (mask, amplitude) pairs; amplitudes on repeated
    /// masks accumulate. Every mask must have popcount `n` and no bits at or
    /// above `d`.
    pub fn new(
        d: usize,
        n: usize,
        amplitudes: impl IntoIterator<Item = (Mask, Complex64)>,
    ) -> Result<Self> {
        check_mode_count(d)?;
        if n > d {
            return Err(Error::BadFermionNumber { n, d });
        }
        let mut amps = BTreeMap::new();
        for (mask, a) in amplitudes {
            if mask >> d != 0 {
                return Err(Error::MaskOutOfRange { mask, d });
            }
            let got = mask.count_ones();
            if got as usize != n {
                return Err(Error::WrongSector { mask, got, want: n });
            }
            *amps.entry(mask).or_insert(Complex64::ZERO) += a;
        }
        let mut state = PureState { d, n, amps };
        state.prune();
        Ok(state)
    }

    /// The vacuum over `d` modes.
    pub fn vacuum(d: usize) -> Result<Self> {
        PureState::new(d, 0, [(0u64, Complex64::ONE)])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Amplitude of `mask` (zero when absent).
    pub fn amplitude(&self, mask: Mask) -> Complex64 {
        self.amps.get(&mask).copied().unwrap_or(Complex64::ZERO)
    }

    /// Stored (mask, amplitude) pairs in ascending mask order.
    pub fn amplitudes(&self) -> impl Iterator<Item = (Mask, Complex64)> + '_ {
        self.amps.iter().map(|(&m, &a)| (m, a))
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Drop amplitudes below [`PRUNE_EPSILON`].
    pub fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= PRUNE_EPSILON);
    }

    /// Scale so that the squared norm is 1.
    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm < PRUNE_EPSILON {
            return Err(Error::ZeroNorm);
        }
        let inv = Complex64::new(1.0 / norm, 0.0);
        for a in self.amps.values_mut() {
            *a *= inv;
        }
        self.prune();
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        for a in self.amps.values_mut() {
            *a *= factor;
        }
        self.prune();
        self
    }

    fn check_same_sector(&self, other: &PureState) -> Result<()> {
        if self.d != other.d || self.n != other.n {
            return Err(Error::SectorMismatch {
                d1: self.d,
                n1: self.n,
                d2: other.d,
                n2: other.n,
            });
        }
        Ok(())
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn dot(&self, other: &PureState) -> Result<Complex64> {
        self.check_same_sector(other)?;
        let (small, large) = if self.amps.len() <= other.amps.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = Complex64::ZERO;
        for &mask in small.amps.keys() {
            acc += self.amplitude(mask).conj() * other.amplitude(mask);
        }
        let _ = large;
        Ok(acc)
    }

    /// `sum_t coeff_t |state_t>`, all in the same sector.
    pub fn linear_combination(terms: &[(Complex64, &PureState)]) -> Result<Self> {
        let (_, first) = terms.first().ok_or(Error::ZeroNorm)?;
        let mut amps: BTreeMap<Mask, Complex64> = BTreeMap::new();
        for (coeff, state) in terms {
            first.check_same_sector(state)?;
            for (mask, a) in state.amplitudes() {
                *amps.entry(mask).or_insert(Complex64::ZERO) += coeff * a;
            }
        }
        let mut out = PureState {
            d: first.d,
            n: first.n,
            amps,
        };
        out.prune();
        Ok(out)
    }

    /// State-vector coordinates in the canonical N-sector basis order.
    pub fn sector_vector(&self, basis: &[Mask]) -> nalgebra::DVector<Complex64> {
        nalgebra::DVector::from_iterator(basis.len(), basis.iter().map(|&m| self.amplitude(m)))
    }
}

/// Apply a product of ladder operators to a state. Operators act in list
/// order: `ops[0]` hits the state first, so the list `[Annihilate(i1), ...,
/// Annihilate(iM)]` with ascending modes implements the subset annihilator
/// `C^(M)_alpha = (c^dag_{i1} ... c^dag_{iM})^dag`, and descending creations
/// build `C^(M)dag_alpha`. The result is unnormalized; an empty result (all
/// amplitudes cancelled or blocked) is allowed.
pub fn apply_operator_string(ops: &[LadderOp], state: &PureState) -> Result<PureState> {
    let d = state.d;
    let mut n = state.n as isize;
    for op in ops {
        match op {
            LadderOp::Create(_) => n += 1,
            LadderOp::Annihilate(_) => n -= 1,
        }
    }
    if n < 0 || n as usize > d {
        return Err(Error::BadFermionNumber {
            n: n.unsigned_abs(),
            d,
        });
    }
    let mut cur: BTreeMap<Mask, Complex64> = state.amps.clone();
    for op in ops {
        let mut next: BTreeMap<Mask, Complex64> = BTreeMap::new();
        for (&mask, &a) in &cur {
            let hop = match *op {
                LadderOp::Create(i) => apply_create(d, i, mask)?,
                LadderOp::Annihilate(i) => apply_annihilate(d, i, mask)?,
            };
            if let Some((new_mask, sign)) = hop {
                *next.entry(new_mask).or_insert(Complex64::ZERO) += a * sign as f64;
            }
        }
        cur = next;
    }
    let mut out = PureState {
        d,
        n: n as usize,
        amps: cur,
    };
    out.prune();
    Ok(out)
}

/// Ladder string for `C^(M)dag_alpha` acting on a ket (descending creations).
pub fn creation_string(alpha: Mask) -> Vec<LadderOp> {
    let mut modes = modes_from_mask(alpha);
    modes.reverse();
    modes.into_iter().map(LadderOp::Create).collect()
}

/// Ladder string for `C^(M)_alpha` acting on a ket (ascending annihilations).
pub fn annihilation_string(alpha: Mask) -> Vec<LadderOp> {
    modes_from_mask(alpha)
        .into_iter()
        .map(LadderOp::Annihilate)
        .collect()
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct StateJson {
    #[serde(rename = "D")]
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    amplitudes: Vec<AmplitudeJson>,
}

#[derive(Serialize, Deserialize)]
struct AmplitudeJson {
    mask: u64,
    re: f64,
    im: f64,
}

impl PureState {
    /// Serialize to the canonical JSON schema
    /// `{"D": int, "N": int, "amplitudes": [{"mask", "re", "im"}, ...]}`
    /// with amplitudes in ascending mask order.
    pub fn to_json(&self) -> String {
        let doc = StateJson {
            d: self.d,
            n: self.n,
            amplitudes: self
                .amplitudes()
                .map(|(mask, a)| AmplitudeJson {
                    mask,
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("state serialization cannot fail")
    }

    /// Parse the canonical JSON schema. Amplitudes are validated against the
    /// (D, N) sector but not renormalized, so serialize -> parse -> serialize
    /// is the identity.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: StateJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        PureState::new(
            doc.d,
            doc.n,
            doc.amplitudes
                .into_iter()
                .map(|a| (a.mask, Complex64::new(a.re, a.im))),
        )
    }
}

// ---------------------------------------------------------------------------
// N-sector density operators
// ---------------------------------------------------------------------------

/// Dense density operator on the N-fermion sector, stored over the canonical
/// lexicographic basis of all `binom(D, N)` masks. Hermitian and positive
/// semidefinite; the trace is whatever the constructor produced (mixtures of
/// normalized states have trace 1, contraction outputs do not) — use
/// [`NSectorDensityOperator::normalized`] before feeding channels that
/// require unit trace.
#[derive(Clone, Debug)]
pub struct NSectorDensityOperator {
    d: usize,
    n: usize,
    basis: Vec<Mask>,
    matrix: DMatrix<Complex64>,
}

impl NSectorDensityOperator {
    /// Projector onto a pure state (trace = squared norm).
    pub fn from_pure(state: &PureState) -> Result<Self> {
        Self::mixture(&[(1.0, state)])
    }

    /// `sum_i w_i |psi_i><psi_i|` over states in one (D, N) sector.
    pub fn mixture(parts: &[(f64, &PureState)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or(Error::ZeroNorm)?;
        let d = first.d();
        let n = first.n();
        let basis = guarded_sector_basis(d, n)?;
        let dim = basis.len();
        let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
        for (w, state) in parts {
            first.check_same_sector(state)?;
            let v = state.sector_vector(&basis);
            matrix += (&v * v.adjoint()).scale(*w);
        }
        Ok(NSectorDensityOperator {
            d,
            n,
            basis,
            matrix,
        })
    }

    /// Wrap an explicit sector matrix (canonical basis order); validates
    /// hermiticity and positive semidefiniteness.
    pub fn from_matrix(d: usize, n: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let basis = guarded_sector_basis(d, n)?;
        let dim = basis.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::SectorMismatch {
                d1: d,
                n1: n,
                d2: matrix.nrows(),
                n2: matrix.ncols(),
            });
        }
        let herm_dev = linalg::hermiticity_deviation(&matrix);
        if herm_dev > 1e-10 {
            return Err(Error::NotHermitian(herm_dev));
        }
        let trace = matrix.trace().re;
        let eigs = linalg::eigh(&matrix).0;
        if let Some(&min) = eigs.last() {
            if min < -1e-10 * trace.abs().max(1.0) {
                return Err(Error::NotPositiveSemidefinite(min));
            }
        }
        Ok(NSectorDensityOperator {
            d,
            n,
            basis,
            matrix,
        })
    }

    /// Wrap a sector matrix known-valid by construction (e.g. conjugation of
    /// a valid operator by Kraus blocks); skips the eigensolve validation.
    pub(crate) fn from_matrix_unchecked(
        d: usize,
        n: usize,
        matrix: DMatrix<Complex64>,
    ) -> Result<Self> {
        let basis = guarded_sector_basis(d, n)?;
        debug_assert_eq!(matrix.nrows(), basis.len());
        debug_assert_eq!(matrix.ncols(), basis.len());
        Ok(NSectorDensityOperator {
            d,
            n,
            basis,
            matrix,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[Mask] {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Scale to unit trace.
    pub fn normalize(&mut self) -> Result<()> {
        let tr = self.trace();
        if tr < PRUNE_EPSILON {
            return Err(Error::ZeroNorm);
        }
        self.matrix.scale_mut(1.0 / tr);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Row/column index of a sector mask in the canonical basis.
    pub fn index_of(&self, mask: Mask) -> Result<usize> {
        subset_rank_mask(mask, self.d)
    }
}

pub(crate) fn guarded_sector_basis(d: usize, n: usize) -> Result<Vec<Mask>> {
    check_mode_count(d)?;
    if n > d {
        return Err(Error::BadFermionNumber { n, d });
    }
    let rows = binom(d, n)?;
    if rows > DIMENSION_GUARD {
        return Err(Error::DimensionGuard {
            d,
            m: n,
            rows,
            limit: DIMENSION_GUARD,
        });
    }
    sector_masks(d, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent lexicographic enumeration: recursive generation of all
    // sorted M-tuples over {0..D-1}, in the order a dictionary would list
    // them.
    fn lex_tuples(d: usize, m: usize) -> Vec<Vec<usize>> {
        fn rec(
            d: usize,
            m: usize,
            start: usize,
            prefix: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if prefix.len() == m {
                out.push(prefix.clone());
                return;
            }
            for c in start..d {
                prefix.push(c);
                rec(d, m, c + 1, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(d, m, 0, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn binom_matches_pascal_triangle() {
        let mut row = vec![1u64];
        for n in 0..=20 {
            for (k, &expect) in row.iter().enumerate() {
                assert_eq!(binom(n, k).unwrap(), expect, "binom({n},{k})");
            }
            let mut next = vec![1u64];
            for k in 1..row.len() {
                next.push(row[k - 1] + row[k]);
            }
            next.push(1);
            row = next;
        }
        assert_eq!(binom(5, 9).unwrap(), 0);
        assert_eq!(binom(63, 31).unwrap(), 916_312_070_471_295_267);
    }

    #[test]
    fn binom_overflow_detected() {
        assert!(matches!(
            binom(200, 100),
            Err(Error::BinomialOverflow { .. })
        ));
    }

    #[test]
    fn subset_rank_examples() {
        assert_eq!(subset_rank(&[0, 1], 4).unwrap(), 0);
        assert_eq!(subset_rank(&[2, 3], 4).unwrap(), 5);
        // frozen from the enumeration oracle: lex order of 3-subsets of {0..3}
        // is (0,1,2), (0,1,3), (0,2,3), (1,2,3)
        assert_eq!(subset_rank(&[0, 2, 3], 4).unwrap(), 2);
        assert_eq!(subset_rank(&[1, 2], 5).unwrap(), 4);
    }

    #[test]
    fn subset_unrank_examples() {
        assert_eq!(subset_unrank(0, 4, 2).unwrap(), vec![0, 1]);
        assert_eq!(subset_unrank(5, 4, 2).unwrap(), vec![2, 3]);
        // frozen from the enumeration oracle: lex order of 2-subsets of {0..4}
        // starts (0,1), (0,2), (0,3), (0,4), (1,2)
        assert_eq!(subset_unrank(3, 5, 2).unwrap(), vec![0, 4]);
        assert!(matches!(
            subset_unrank(6, 4, 2),
            Err(Error::SubsetIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn rank_unrank_match_enumeration_oracle() {
        for d in 1..=8 {
            for m in 0..=d {
                let tuples = lex_tuples(d, m);
                assert_eq!(tuples.len() as u64, binom(d, m).unwrap());
                for (rank, tuple) in tuples.iter().enumerate() {
                    assert_eq!(subset_rank(tuple, d).unwrap(), rank);
                    assert_eq!(&subset_unrank(rank, d, m).unwrap(), tuple);
                }
                let masks = sector_masks(d, m).unwrap();
                for (rank, tuple) in tuples.iter().enumerate() {
                    assert_eq!(masks[rank], mask_from_sorted(tuple));
                }
            }
        }
    }

    #[test]
    fn rank_rejects_bad_tuples() {
        assert!(matches!(
            subset_rank(&[1, 1], 4),
            Err(Error::UnsortedTuple(1))
        ));
        assert!(matches!(
            subset_rank(&[2, 1], 4),
            Err(Error::UnsortedTuple(1))
        ));
        assert!(matches!(
            subset_rank(&[0, 4], 4),
            Err(Error::ModeOutOfRange { .. })
        ));
    }

    #[test]
    fn k_submasks_enumerates_in_lex_order() {
        let mask = 0b101101u64; // modes 0, 2, 3, 5
        let subs = k_submasks(mask, 2);
        let expect: Vec<Mask> = vec![
            0b000101, // (0,2)
            0b001001, // (0,3)
            0b100001, // (0,5)
            0b001100, // (2,3)
            0b100100, // (2,5)
            0b101000, // (3,5)
        ];
        assert_eq!(subs, expect);
        assert_eq!(k_submasks(mask, 0), vec![0]);
        assert!(k_submasks(mask, 5).is_empty());
    }

    #[test]
    fn create_annihilate_examples() {
        assert_eq!(apply_create(4, 0, 0).unwrap(), Some((0b1, 1)));
        assert_eq!(apply_create(4, 1, 0b101).unwrap(), Some((0b111, -1)));
        assert_eq!(apply_create(4, 2, 0b100).unwrap(), None);
        assert_eq!(apply_annihilate(4, 0, 0b1).unwrap(), Some((0, 1)));
        assert_eq!(apply_annihilate(4, 2, 0b101).unwrap(), Some((0b1, -1)));
        assert_eq!(apply_annihilate(4, 1, 0b101).unwrap(), None);
        assert!(matches!(
            apply_create(4, 4, 0),
            Err(Error::ModeOutOfRange { .. })
        ));
    }

    #[test]
    fn create_anticommutes() {
        for d in 2..=6usize {
            for mask in 0u64..1 << d {
                for i in 0..d {
                    for j in 0..d {
                        if i == j {
                            // c^dag_i twice is always blocked
                            if let Some((m1, _)) = apply_create(d, i, mask).unwrap() {
                                assert_eq!(apply_create(d, i, m1).unwrap(), None);
                            }
                            continue;
                        }
                        let ij = apply_create(d, i, mask).unwrap().and_then(|(m1, s1)| {
                            apply_create(d, j, m1)
                                .unwrap()
                                .map(|(m2, s2)| (m2, s1 * s2))
                        });
                        let ji = apply_create(d, j, mask).unwrap().and_then(|(m1, s1)| {
                            apply_create(d, i, m1)
                                .unwrap()
                                .map(|(m2, s2)| (m2, s1 * s2))
                        });
                        match (ij, ji) {
                            (Some((m1, s1)), Some((m2, s2))) => {
                                assert_eq!(m1, m2);
                                assert_eq!(s1, -s2);
                            }
                            (None, None) => {}
                            _ => panic!("asymmetric blocking"),
                        }
                    }
                }
            }
        }
    }

    // Bubble-count oracle: inversions of the concatenated (alpha, beta) list
    // relative to ascending order.
    fn bubble_parity(union: Mask, alpha: Mask) -> i32 {
        let mut seq = modes_from_mask(alpha);
        seq.extend(modes_from_mask(union ^ alpha));
        let mut inversions = 0u32;
        for i in 0..seq.len() {
            for j in i + 1..seq.len() {
                if seq[i] > seq[j] {
                    inversions += 1;
                }
            }
        }
        parity_sign(inversions)
    }

    #[test]
    fn split_sign_examples() {
        assert_eq!(split_sign(0b11, 0b01).unwrap(), 1);
        assert_eq!(split_sign(0b11, 0b10).unwrap(), -1);
        assert_eq!(split_sign(0b111, 0b100).unwrap(), 1);
        assert!(matches!(
            split_sign(0b11, 0b100),
            Err(Error::NotSubmask { .. })
        ));
    }

    #[test]
    fn split_sign_matches_bubble_count_oracle() {
        for d in 1..=8usize {
            for union in 0u64..1 << d {
                for alpha in k_submasks(union, 0)
                    .into_iter()
                    .chain((1..=union.count_ones() as usize).flat_map(|k| k_submasks(union, k)))
                {
                    assert_eq!(
                        split_sign(union, alpha).unwrap(),
                        bubble_parity(union, alpha),
                        "union {union:#b} alpha {alpha:#b}"
                    );
                }
            }
        }
    }

    #[test]
    fn operator_string_annihilates_slater_to_vacuum() {
        let sd = PureState::new(2, 2, [(0b11u64, Complex64::ONE)]).unwrap();
        let out = apply_operator_string(&[LadderOp::Annihilate(0), LadderOp::Annihilate(1)], &sd)
            .unwrap();
        assert_eq!(out.n(), 0);
        assert!((out.amplitude(0) - Complex64::ONE).norm() < 1e-15);
    }

    #[test]
    fn operator_string_on_empty_mode_gives_zero_state() {
        let sd = PureState::new(4, 2, [(0b101u64, Complex64::ONE)]).unwrap();
        let out = apply_operator_string(&[LadderOp::Annihilate(1)], &sd).unwrap();
        assert_eq!(out.support_len(), 0);
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn creation_string_builds_canonical_slater() {
        // C^dag_alpha |0> must be the +1 basis state for every alpha
        let d = 6;
        for mask in sector_masks(d, 3).unwrap() {
            let out = apply_operator_string(&creation_string(mask), &PureState::vacuum(d).unwrap())
                .unwrap();
            assert_eq!(out.support_len(), 1);
            assert!((out.amplitude(mask) - Complex64::ONE).norm() < 1e-15);
        }
    }

    #[test]
    fn annihilation_string_is_adjoint_of_creation() {
        // <0| C_alpha |alpha> = 1
        let d = 6;
        for mask in sector_masks(d, 3).unwrap() {
            let sd = PureState::new(d, 3, [(mask, Complex64::ONE)]).unwrap();
            let out = apply_operator_string(&annihilation_string(mask), &sd).unwrap();
            assert!((out.amplitude(0) - Complex64::ONE).norm() < 1e-15);
        }
    }

    #[test]
    fn inner_product_basics() {
        let a = PureState::new(4, 2, [(0b0011u64, Complex64::ONE)]).unwrap();
        let b = PureState::new(4, 2, [(0b1100u64, Complex64::ONE)]).unwrap();
        assert_eq!(a.dot(&b).unwrap(), Complex64::ZERO);
        assert_eq!(a.dot(&a).unwrap(), Complex64::ONE);
        let c = PureState::new(
            4,
            2,
            [
                (0b0011u64, Complex64::new(0.0, 0.6)),
                (0b1100u64, Complex64::new(0.8, 0.0)),
            ],
        )
        .unwrap();
        assert!((c.dot(&c).unwrap().re - 1.0).abs() < 1e-15);
        let ab = a.dot(&c).unwrap();
        assert!((ab - Complex64::new(0.0, 0.6)).norm() < 1e-15);
    }

    #[test]
    fn state_validation_rejects_wrong_sector() {
        assert!(matches!(
            PureState::new(4, 2, [(0b111u64, Complex64::ONE)]),
            Err(Error::WrongSector { .. })
        ));
        assert!(matches!(
            PureState::new(4, 2, [(0b110000u64, Complex64::ONE)]),
            Err(Error::MaskOutOfRange { .. })
        ));
        assert!(matches!(
            PureState::new(0, 0, []),
            Err(Error::BadModeCount(0))
        ));
        assert!(matches!(
            PureState::new(64, 1, []),
            Err(Error::BadModeCount(64))
        ));
    }

    #[test]
    fn json_round_trip_is_identity() {
        let state = PureState::new(
            5,
            2,
            [
                (0b00011u64, Complex64::new(0.6, 0.0)),
                (0b10001u64, Complex64::new(0.0, -0.8)),
            ],
        )
        .unwrap();
        let text = state.to_json();
        let parsed = PureState::from_json(&text).unwrap();
        assert_eq!(parsed.to_json(), text);
        assert_eq!(parsed.d(), 5);
        assert_eq!(parsed.n(), 2);
        assert!((parsed.amplitude(0b10001) - Complex64::new(0.0, -0.8)).norm() < 1e-15);
    }

    #[test]
    fn json_rejects_inconsistent_sector() {
        let bad = r#"{"D": 4, "N": 2, "amplitudes": [{"mask": 7, "re": 1.0, "im": 0.0}]}"#;
        assert!(PureState::from_json(bad).is_err());
        assert!(matches!(
            PureState::from_json("not json"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn density_operator_mixture_and_normalize() {
        let a = PureState::new(4, 1, [(0b0001u64, Complex64::ONE)]).unwrap();
        let b = PureState::new(4, 1, [(0b0010u64, Complex64::ONE)]).unwrap();
        let op = NSectorDensityOperator::mixture(&[(0.5, &a), (0.5, &b)]).unwrap();
        assert!((op.trace() - 1.0).abs() < 1e-14);
        assert_eq!(op.basis().len(), 4);
        let i0 = op.index_of(0b0001).unwrap();
        let i1 = op.index_of(0b0010).unwrap();
        assert!((op.matrix()[(i0, i0)].re - 0.5).abs() < 1e-14);
        assert!((op.matrix()[(i1, i1)].re - 0.5).abs() < 1e-14);
        assert_eq!(op.matrix()[(i0, i1)], Complex64::ZERO);
    }

    #[test]
    fn density_operator_rejects_non_hermitian_and_negative() {
        let mut m = DMatrix::<Complex64>::zeros(4, 4);
        m[(0, 1)] = Complex64::ONE;
        assert!(matches!(
            NSectorDensityOperator::from_matrix(4, 1, m),
            Err(Error::NotHermitian(_))
        ));
        let mut neg = DMatrix::<Complex64>::zeros(4, 4);
        neg[(0, 0)] = Complex64::new(1.0, 0.0);
        neg[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(matches!(
            NSectorDensityOperator::from_matrix(4, 1, neg),
            Err(Error::NotPositiveSemidefinite(_))
        ));
    }
}
