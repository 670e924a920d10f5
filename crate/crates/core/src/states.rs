//! Constructors for the concrete state families: Slater determinants, pair
//! condensates (even and odd), GHZ-like states, general two-fermion states,
//! and seeded random sector states. Pairs are the contiguous mode pairs
//! `(2i, 2i+1)`; the odd condensate appends its unpaired fermion as the
//! highest mode.

use crate::error::{Error, Result};
use crate::fock::{self, apply_operator_string, guarded_sector_basis, LadderOp, Mask, PureState};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Slater determinant with the given occupied modes; amplitude +1.
pub fn make_slater(d: usize, occupied: &[usize]) -> Result<PureState> {
    let mask = fock::mask_from_modes(occupied, d)?;
    PureState::new(d, occupied.len(), [(mask, Complex64::ONE)])
}

pub(crate) fn check_even(d: usize) -> Result<usize> {
    if d == 0 || !d.is_multiple_of(2) {
        return Err(Error::OddModeCount(d));
    }
    Ok(d / 2)
}

/// Masks with k of the D/2 contiguous pairs occupied, in canonical order.
fn pair_masks(d: usize, k: usize) -> Result<Vec<Mask>> {
    let half = check_even(d)?;
    if k > half {
        return Err(Error::PairCountOutOfRange { k, max: half });
    }
    Ok(fock::sector_masks(half, k)?
        .into_iter()
        .map(|sel| {
            let mut mask: Mask = 0;
            let mut rest = sel;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                mask |= 0b11 << (2 * i);
                rest &= rest - 1;
            }
            mask
        })
        .collect())
}

/// Uniform superposition of all binom(D/2, k) k-pair configurations;
/// N = 2k fermions on D modes, each amplitude 1/sqrt(binom(D/2, k)).
pub fn make_pair_condensate(d: usize, k: usize) -> Result<PureState> {
    let masks = pair_masks(d, k)?;
    let amp = Complex64::new(1.0 / (masks.len() as f64).sqrt(), 0.0);
    PureState::new(d, 2 * k, masks.into_iter().map(|m| (m, amp)))
}

/// The pair condensate embedded in D+1 modes with one extra fermion created
/// in the top mode; N = 2k+1.
pub fn make_odd_pair_condensate(d: usize, k: usize) -> Result<PureState> {
    let even = make_pair_condensate(d, k)?;
    let embedded = PureState::new(d + 1, 2 * k, even.amplitudes())?;
    apply_operator_string(&[LadderOp::Create(d)], &embedded)
}

/// Equal superposition of the lower-half and upper-half Slater determinants;
/// N = D/2.
pub fn make_ghz(d: usize) -> Result<PureState> {
    let half = check_even(d)?;
    let low: Mask = (1u64 << half) - 1;
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    PureState::new(d, half, [(low, amp), (low << half, amp)])
}

/// Two-fermion state with amplitudes `gamma[(i, j)]` for `i < j`, from a
/// D x D antisymmetric coefficient matrix. The result is normalized.
pub fn make_two_fermion(d: usize, gamma: &DMatrix<Complex64>) -> Result<PureState> {
    if gamma.nrows() != d || gamma.ncols() != d {
        return Err(Error::CoefficientLength {
            got: gamma.nrows().max(gamma.ncols()),
            d,
            m: 2,
            want: d,
        });
    }
    let scale = gamma.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let mut dev = 0.0f64;
    for i in 0..d {
        for j in i..d {
            dev = dev.max((gamma[(i, j)] + gamma[(j, i)]).norm());
        }
    }
    if dev > 1e-10 * scale {
        return Err(Error::NotAntisymmetric(dev));
    }
    let mut amps = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            amps.push((1u64 << i | 1u64 << j, gamma[(i, j)]));
        }
    }
    PureState::new(d, 2, amps)?.normalized()
}

/// Normalized state with i.i.d. complex Gaussian amplitudes over the whole
/// (D, N) sector; deterministic under the seed.
pub fn make_random(d: usize, n: usize, seed: u64) -> Result<PureState> {
    let basis = guarded_sector_basis(d, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<(Mask, Complex64)> = basis
        .iter()
        .map(|&m| {
            (
                m,
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
            )
        })
        .collect();
    PureState::new(d, n, amps)?.normalized()
}

/// Apply the normalized collective pair raising operator
/// `A^dag = sum_i c^dag_{2i} c^dag_{2i+1} / sqrt(floor(D/2))`.
/// On `make_pair_condensate(D, k)` this yields
/// `sqrt((k+1)(1 - 2k/D)) * make_pair_condensate(D, k+1)`.
pub fn pair_raising(state: &PureState) -> Result<PureState> {
    pair_ladder(state, true)
}

/// Adjoint of [`pair_raising`]: `A = sum_i c_{2i+1} c_{2i} / sqrt(floor(D/2))`.
pub fn pair_lowering(state: &PureState) -> Result<PureState> {
    pair_ladder(state, false)
}

fn pair_ladder(state: &PureState, raise: bool) -> Result<PureState> {
    let half = state.d() / 2;
    if half == 0 {
        return Err(Error::OddModeCount(state.d()));
    }
    let coeff = Complex64::new(1.0 / (half as f64).sqrt(), 0.0);
    let mut terms = Vec::with_capacity(half);
    for i in 0..half {
        let ops = if raise {
            // string c^dag_{2i} c^dag_{2i+1}: the right factor acts first
            [LadderOp::Create(2 * i + 1), LadderOp::Create(2 * i)]
        } else {
            [LadderOp::Annihilate(2 * i), LadderOp::Annihilate(2 * i + 1)]
        };
        terms.push(apply_operator_string(&ops, state)?);
    }
    let refs: Vec<(Complex64, &PureState)> = terms.iter().map(|t| (coeff, t)).collect();
    PureState::linear_combination(&refs)
}
