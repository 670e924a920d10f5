//! The (M, N-M) coefficient matrix, M-body density matrices for pure and
//! mixed states, Schmidt decomposition, M-body density operators, and the
//! annihilation contraction that generalizes the partial trace.
//!
//! All matrix axes over M-mode subsets use the lexicographic subset rank as
//! the index; `Gamma^(M)` rows run over M-subsets and columns over
//! (N-M)-subsets of the same D modes.

use crate::error::{Error, Result};
use crate::fock::{
    binom, binom_f64, guarded_sector_basis, k_submasks, split_sign, subset_rank_mask, Mask,
    NSectorDensityOperator, PureState, DIMENSION_GUARD,
};
use crate::linalg;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;

fn guarded_subset_count(d: usize, m: usize) -> Result<usize> {
    let rows = binom(d, m)?;
    if rows > DIMENSION_GUARD {
        return Err(Error::DimensionGuard {
            d,
            m,
            rows,
            limit: DIMENSION_GUARD,
        });
    }
    Ok(rows as usize)
}

/// Coefficient matrix of the (M, N-M) representation: entry (alpha, beta) is
/// `split_sign(alpha u beta, alpha) * amplitude(alpha u beta)` when the two
/// subsets are disjoint, zero otherwise.
pub struct GammaMatrix {
    d: usize,
    n: usize,
    m: usize,
    matrix: DMatrix<Complex64>,
}

impl GammaMatrix {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Squared Frobenius norm; equals binom(N, M) on normalized states.
    pub fn frobenius_sqr(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub fn gamma_matrix(state: &PureState, m: usize) -> Result<GammaMatrix> {
    let d = state.d();
    let n = state.n();
    if m > n {
        return Err(Error::BodyOrderOutOfRange { m, n });
    }
    let rows = guarded_subset_count(d, m)?;
    let cols = guarded_subset_count(d, n - m)?;
    let mut matrix = DMatrix::<Complex64>::zeros(rows, cols);
    for (mask, amp) in state.amplitudes() {
        for alpha in k_submasks(mask, m) {
            let beta = mask & !alpha;
            let sign = split_sign(mask, alpha)? as f64;
            matrix[(subset_rank_mask(alpha, d)?, subset_rank_mask(beta, d)?)] = amp * sign;
        }
    }
    Ok(GammaMatrix { d, n, m, matrix })
}

/// Rebuild the pure state from its coefficient matrix:
/// `amp(mask) = binom(N,M)^{-1} * sum_{alpha subset mask} split_sign * Gamma_{alpha, mask\alpha}`.
pub fn state_from_gamma(gamma: &GammaMatrix) -> Result<PureState> {
    state_from_gamma_parts(gamma.d, gamma.n, gamma.m, &gamma.matrix)
}

fn state_from_gamma_parts(
    d: usize,
    n: usize,
    m: usize,
    matrix: &DMatrix<Complex64>,
) -> Result<PureState> {
    let basis = guarded_sector_basis(d, n)?;
    let inv = 1.0 / binom_f64(n, m)?;
    let mut amps = Vec::with_capacity(basis.len());
    for &mask in &basis {
        let mut acc = Complex64::ZERO;
        for alpha in k_submasks(mask, m) {
            let beta = mask & !alpha;
            let sign = split_sign(mask, alpha)? as f64;
            acc += matrix[(subset_rank_mask(alpha, d)?, subset_rank_mask(beta, d)?)] * sign;
        }
        amps.push((mask, acc * inv));
    }
    PureState::new(d, n, amps)
}

/// Hermitian PSD M-body density matrix; trace binom(N, M) when unnormalized.
pub struct MBodyDM {
    d: usize,
    n: usize,
    m: usize,
    matrix: DMatrix<Complex64>,
    normalized: bool,
}

impl MBodyDM {
    pub(crate) fn new(
        d: usize,
        n: usize,
        m: usize,
        matrix: DMatrix<Complex64>,
        normalized: bool,
    ) -> Self {
        MBodyDM {
            d,
            n,
            m,
            matrix,
            normalized,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Divide by binom(N, M) so the trace becomes 1.
    pub fn normalized(&self) -> Result<MBodyDM> {
        if self.normalized {
            return Ok(self.clone_dm());
        }
        let scale = 1.0 / binom_f64(self.n, self.m)?;
        Ok(MBodyDM {
            d: self.d,
            n: self.n,
            m: self.m,
            matrix: self.matrix.scale(scale),
            normalized: true,
        })
    }

    fn clone_dm(&self) -> MBodyDM {
        MBodyDM {
            d: self.d,
            n: self.n,
            m: self.m,
            matrix: self.matrix.clone(),
            normalized: self.normalized,
        }
    }

    /// Eigenvalues sorted nonincreasing.
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    /// Eigendecomposition, eigenvalues nonincreasing.
    pub fn eigh(&self) -> (Vec<f64>, DMatrix<Complex64>) {
        linalg::eigh(&self.matrix)
    }
}

/// `rho^(M) = Gamma^(M) Gamma^(M)^dag` of a pure state.
pub fn rho_m(state: &PureState, m: usize) -> Result<MBodyDM> {
    let gamma = gamma_matrix(state, m)?;
    let matrix = &gamma.matrix * gamma.matrix.adjoint();
    Ok(MBodyDM::new(gamma.d, gamma.n, m, matrix, false))
}

/// M-body density matrix of a mixed N-fermion state: entries
/// `Tr[rho C^(M)dag_{alpha'} C^(M)_alpha]`. Convex in the input.
pub fn rho_m_mixed(op: &NSectorDensityOperator, m: usize) -> Result<MBodyDM> {
    let n = op.n();
    if m > n {
        return Err(Error::BodyOrderOutOfRange { m, n });
    }
    let contracted = contract(op, n - m)?;
    Ok(MBodyDM::new(
        op.d(),
        n,
        m,
        contracted.matrix().clone(),
        false,
    ))
}

/// `sum_beta C^(L)_beta rho C^(L)dag_beta` over L-subsets: the annihilation
/// contraction taking an N-fermion operator to an unnormalized (N-L)-fermion
/// operator, with trace binom(N, L) * trace(rho).
pub fn contract(op: &NSectorDensityOperator, l: usize) -> Result<NSectorDensityOperator> {
    let d = op.d();
    let n = op.n();
    if l > n {
        return Err(Error::AnnihilationOrderOutOfRange { l, n });
    }
    let out_basis = guarded_sector_basis(d, n - l)?;
    let dim = out_basis.len();
    // group input basis elements by the annihilated subset beta:
    // mask = remainder u beta contributes at (row(remainder), sign)
    let mut groups: BTreeMap<Mask, Vec<(usize, usize, f64)>> = BTreeMap::new();
    for (idx, &mask) in op.basis().iter().enumerate() {
        for beta in k_submasks(mask, l) {
            let rest = mask & !beta;
            let row = subset_rank_mask(rest, d)?;
            let sign = split_sign(mask, beta)? as f64;
            groups.entry(beta).or_default().push((row, idx, sign));
        }
    }
    let input = op.matrix();
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    for members in groups.values() {
        for &(row, p, sp) in members {
            for &(col, q, sq) in members {
                matrix[(row, col)] += input[(p, q)] * (sp * sq);
            }
        }
    }
    NSectorDensityOperator::from_matrix_unchecked(d, n - l, matrix)
}

/// Reinterpret an M-body density matrix as a density operator on the
/// M-fermion sector (the two share the same matrix in the canonical basis).
pub fn mbody_density_operator(dm: &MBodyDM) -> Result<NSectorDensityOperator> {
    NSectorDensityOperator::from_matrix(dm.d, dm.m, dm.matrix.clone())
}

/// `<Psi| A^dag A |Psi>` for the collective operator
/// `A^dag = sum_alpha coeffs_alpha C^(M)dag_alpha` with normalized
/// coefficients; equals `coeffs^dag rho^(M) coeffs`.
pub fn collective_average(state: &PureState, m: usize, coeffs: &[Complex64]) -> Result<f64> {
    let d = state.d();
    let want = guarded_subset_count(d, m)?;
    if coeffs.len() != want {
        return Err(Error::CoefficientLength {
            got: coeffs.len(),
            d,
            m,
            want,
        });
    }
    let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > 1e-10 {
        return Err(Error::UnnormalizedCoefficients(norm_sqr));
    }
    let gamma = gamma_matrix(state, m)?;
    let v = nalgebra::DVector::from_column_slice(coeffs);
    Ok((gamma.matrix.adjoint() * v).norm_squared())
}

/// Schmidt form of the (M, N-M) representation: `Gamma^(M) = U S V^dag` with
/// square unitary factors. Column nu of U holds the coefficients of the
/// collective M-fermion creation operator `A^(M)dag_nu`; the conjugate of
/// column nu of V holds those of `B^(N-M)dag_nu`.
pub struct SchmidtDecomposition {
    d: usize,
    n: usize,
    m: usize,
    u: DMatrix<Complex64>,
    v: DMatrix<Complex64>,
    singular_values: Vec<f64>,
}

impl SchmidtDecomposition {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn u(&self) -> &DMatrix<Complex64> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<Complex64> {
        &self.v
    }

    /// Singular values, nonincreasing; length min(binom(D,M), binom(D,N-M)).
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Squared singular values zero-padded to binom(D, M): the spectrum of
    /// rho^(M), nonincreasing.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self.singular_values.iter().map(|s| s * s).collect();
        vals.resize(self.u.nrows(), 0.0);
        vals
    }

    /// Number of singular values above `1e-12 * s_max`.
    pub fn rank(&self) -> usize {
        let cut = self.singular_values.first().copied().unwrap_or(0.0) * 1e-12;
        self.singular_values.iter().filter(|&&s| s > cut).count()
    }

    /// Normalized M-fermion state created by `A^(M)dag_nu`.
    pub fn collective_state_a(&self, nu: usize) -> Result<PureState> {
        column_state(self.d, self.m, &self.u.column(nu).into_owned(), false)
    }

    /// Normalized (N-M)-fermion state created by `B^(N-M)dag_nu`.
    pub fn collective_state_b(&self, nu: usize) -> Result<PureState> {
        column_state(
            self.d,
            self.n - self.m,
            &self.v.column(nu).into_owned(),
            true,
        )
    }

    /// Rebuild the original state from `U S V^dag`.
    pub fn reconstruct(&self) -> Result<PureState> {
        let rows = self.u.nrows();
        let cols = self.v.nrows();
        let mut s = DMatrix::<Complex64>::zeros(rows, cols);
        for (i, &val) in self.singular_values.iter().enumerate() {
            s[(i, i)] = Complex64::new(val, 0.0);
        }
        let gamma = &self.u * s * self.v.adjoint();
        state_from_gamma_parts(self.d, self.n, self.m, &gamma)
    }
}

fn column_state(
    d: usize,
    m: usize,
    column: &nalgebra::DVector<Complex64>,
    conjugate: bool,
) -> Result<PureState> {
    let basis = guarded_sector_basis(d, m)?;
    let amps = basis.iter().enumerate().map(|(i, &mask)| {
        let c = column[i];
        (mask, if conjugate { c.conj() } else { c })
    });
    PureState::new(d, m, amps)
}

pub fn schmidt_decompose(state: &PureState, m: usize) -> Result<SchmidtDecomposition> {
    let n = state.n();
    if m == 0 || m >= n {
        return Err(Error::SchmidtOrderOutOfRange { m, n });
    }
    let gamma = gamma_matrix(state, m)?;
    let svd = linalg::svd_full(&gamma.matrix);
    Ok(SchmidtDecomposition {
        d: gamma.d,
        n,
        m,
        u: svd.u,
        v: svd.v,
        singular_values: svd.singular_values,
    })
}

/// Compare the nonzero spectra of rho^(M) and rho^(N-M): returns
/// (agree within 1e-10, max deviation).
pub fn partner_spectrum_check(state: &PureState, m: usize) -> Result<(bool, f64)> {
    let n = state.n();
    if m > n {
        return Err(Error::BodyOrderOutOfRange { m, n });
    }
    let a = rho_m(state, m)?.spectrum();
    let b = rho_m(state, n - m)?.spectrum();
    let len = a.len().max(b.len());
    let mut dev = 0.0f64;
    for i in 0..len {
        let x = a.get(i).copied().unwrap_or(0.0);
        let y = b.get(i).copied().unwrap_or(0.0);
        dev = dev.max((x - y).abs());
    }
    Ok((dev < 1e-10, dev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock;
    use crate::linalg::max_abs_diff;
    use crate::states::{
        make_ghz, make_pair_condensate, make_random, make_slater, make_two_fermion,
    };

    fn two_fermion_08() -> PureState {
        let mut gamma = DMatrix::<Complex64>::zeros(4, 4);
        let a = Complex64::new(0.8f64.sqrt(), 0.0);
        let b = Complex64::new(0.2f64.sqrt(), 0.0);
        gamma[(0, 1)] = a;
        gamma[(1, 0)] = -a;
        gamma[(2, 3)] = b;
        gamma[(3, 2)] = -b;
        make_two_fermion(4, &gamma).unwrap()
    }

    #[test]
    fn gamma_of_two_mode_slater() {
        let sd = make_slater(2, &[0, 1]).unwrap();
        let g = gamma_matrix(&sd, 1).unwrap();
        assert_eq!(g.matrix().shape(), (2, 2));
        assert_eq!(g.matrix()[(0, 1)], Complex64::ONE);
        assert_eq!(g.matrix()[(1, 0)], -Complex64::ONE);
        assert_eq!(g.matrix()[(0, 0)], Complex64::ZERO);
        assert_eq!(g.matrix()[(1, 1)], Complex64::ZERO);
    }

    #[test]
    fn gamma_edge_orders_are_amplitude_vectors() {
        let psi = make_random(6, 3, 11).unwrap();
        let row = gamma_matrix(&psi, 0).unwrap();
        assert_eq!(row.matrix().shape(), (1, 20));
        let col = gamma_matrix(&psi, 3).unwrap();
        assert_eq!(col.matrix().shape(), (20, 1));
        let basis = fock::sector_masks(6, 3).unwrap();
        for (i, &mask) in basis.iter().enumerate() {
            assert!((row.matrix()[(0, i)] - psi.amplitude(mask)).norm() < 1e-15);
            assert!((col.matrix()[(i, 0)] - psi.amplitude(mask)).norm() < 1e-15);
        }
    }

    #[test]
    fn gamma_frobenius_and_transpose_relation() {
        let psi = make_random(8, 4, 3).unwrap();
        for m in 0..=4usize {
            let g = gamma_matrix(&psi, m).unwrap();
            assert!((g.frobenius_sqr() - binom_f64(4, m).unwrap()).abs() < 1e-10);
            // Gamma^(N-M) = (-1)^(M(N-M)) (Gamma^(M))^T
            let partner = gamma_matrix(&psi, 4 - m).unwrap();
            let sign = if (m * (4 - m)) % 2 == 1 { -1.0 } else { 1.0 };
            let transposed = g.matrix().transpose().scale(sign);
            assert!(max_abs_diff(partner.matrix(), &transposed) < 1e-14);
        }
    }

    #[test]
    fn rho_examples_from_closed_forms() {
        // pair condensate: rho^(1) = (2k/D) I
        let pc = make_pair_condensate(12, 3).unwrap();
        let rho1 = rho_m(&pc, 1).unwrap();
        let want = DMatrix::<Complex64>::identity(12, 12).scale(0.5);
        assert!(max_abs_diff(rho1.matrix(), &want) < 1e-12);

        // Slater determinant: rho^(2) idempotent with binom(4,2) unit eigenvalues
        let sd = make_slater(8, &[0, 2, 4, 6]).unwrap();
        let spec = rho_m(&sd, 2).unwrap().spectrum();
        assert_eq!(spec.len(), 28);
        for (i, &v) in spec.iter().enumerate() {
            let want = if i < 6 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }

        // GHZ at D=8: twelve eigenvalues 1/2 at M=2
        let ghz = make_ghz(8).unwrap();
        let spec = rho_m(&ghz, 2).unwrap().spectrum();
        for (i, &v) in spec.iter().enumerate() {
            let want = if i < 12 { 0.5 } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn rho_trace_rule_and_psd() {
        for (d, n, seed) in [(6usize, 2usize, 1u64), (7, 3, 2), (8, 4, 3)] {
            let psi = make_random(d, n, seed).unwrap();
            for m in 0..=n {
                let rho = rho_m(&psi, m).unwrap();
                assert!((rho.trace() - binom_f64(n, m).unwrap()).abs() < 1e-10);
                let spec = rho.spectrum();
                assert!(*spec.last().unwrap() > -1e-10 * binom_f64(n, m).unwrap());
            }
        }
    }

    #[test]
    fn rho_m_mixed_matches_pure_and_is_linear() {
        let psi = make_random(6, 3, 21).unwrap();
        let op = NSectorDensityOperator::from_pure(&psi).unwrap();
        for m in 0..=3usize {
            let direct = rho_m(&psi, m).unwrap();
            let via_op = rho_m_mixed(&op, m).unwrap();
            assert!(max_abs_diff(direct.matrix(), via_op.matrix()) < 1e-12);
        }

        // equal mixture of two SDs on disjoint modes, M=1: average projector
        let sd1 = make_slater(6, &[0, 1, 2]).unwrap();
        let sd2 = make_slater(6, &[3, 4, 5]).unwrap();
        let mix = NSectorDensityOperator::mixture(&[(0.5, &sd1), (0.5, &sd2)]).unwrap();
        let rho1 = rho_m_mixed(&mix, 1).unwrap();
        let want = DMatrix::<Complex64>::identity(6, 6).scale(0.5);
        assert!(max_abs_diff(rho1.matrix(), &want) < 1e-14);

        // trace rule for a random mixture
        let a = make_random(6, 3, 22).unwrap();
        let b = make_random(6, 3, 23).unwrap();
        let mix = NSectorDensityOperator::mixture(&[(0.3, &a), (0.7, &b)]).unwrap();
        for m in 0..=3usize {
            let rho = rho_m_mixed(&mix, m).unwrap();
            assert!((rho.trace() - binom_f64(3, m).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn state_from_gamma_round_trips() {
        let psi = make_random(7, 3, 31).unwrap();
        for m in 0..=3usize {
            let g = gamma_matrix(&psi, m).unwrap();
            let back = state_from_gamma(&g).unwrap();
            let overlap = psi.dot(&back).unwrap();
            assert!((overlap.re - 1.0).abs() < 1e-12 && overlap.im.abs() < 1e-12);
            assert!((back.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_of_slater_and_two_fermion() {
        let sd = make_slater(5, &[0, 2, 4]).unwrap();
        let sc = schmidt_decompose(&sd, 1).unwrap();
        let sv = sc.singular_values();
        assert!((sv[0] - 1.0).abs() < 1e-12);
        assert!((sv[1] - 1.0).abs() < 1e-12);
        assert!((sv[2] - 1.0).abs() < 1e-12);
        assert!(sv[3].abs() < 1e-12);

        let tf = two_fermion_08();
        let sc = schmidt_decompose(&tf, 1).unwrap();
        let want = [0.8f64.sqrt(), 0.8f64.sqrt(), 0.2f64.sqrt(), 0.2f64.sqrt()];
        for (s, w) in sc.singular_values().iter().zip(want) {
            assert!((s - w).abs() < 1e-12);
        }

        let pc = make_pair_condensate(12, 3).unwrap();
        let sc = schmidt_decompose(&pc, 2).unwrap();
        assert!((sc.singular_values()[0] - 2f64.sqrt()).abs() < 1e-12);

        assert!(matches!(
            schmidt_decompose(&sd, 0),
            Err(Error::SchmidtOrderOutOfRange { m: 0, n: 3 })
        ));
        assert!(matches!(
            schmidt_decompose(&sd, 3),
            Err(Error::SchmidtOrderOutOfRange { m: 3, n: 3 })
        ));
    }

    #[test]
    fn schmidt_reconstructs_and_diagonalizes() {
        for (d, n, m, seed) in [
            (6usize, 3usize, 1usize, 41u64),
            (7, 3, 2, 42),
            (8, 4, 2, 43),
        ] {
            let psi = make_random(d, n, seed).unwrap();
            let sc = schmidt_decompose(&psi, m).unwrap();

            // U^dag Gamma V is the rectangular diagonal of singular values
            let g = gamma_matrix(&psi, m).unwrap();
            let diag = sc.u().adjoint() * g.matrix() * sc.v();
            for i in 0..diag.nrows() {
                for j in 0..diag.ncols() {
                    let want = if i == j {
                        Complex64::new(sc.singular_values()[i], 0.0)
                    } else {
                        Complex64::ZERO
                    };
                    assert!((diag[(i, j)] - want).norm() < 1e-10);
                }
            }

            // spectrum matches rho^(M), state reconstructs with unit fidelity
            let spec_rho = rho_m(&psi, m).unwrap().spectrum();
            for (a, b) in sc.spectrum().iter().zip(&spec_rho) {
                assert!((a - b).abs() < 1e-10);
            }
            let back = sc.reconstruct().unwrap();
            assert!(psi.dot(&back).unwrap().norm() > 1.0 - 1e-10);

            // cross terms: <0| B_nu' A_nu |Psi> = s_nu delta_{nu nu'}
            for nu in 0..3usize {
                let a_nu = sc.collective_state_a(nu).unwrap();
                for nu2 in 0..3usize {
                    let b_nu2 = sc.collective_state_b(nu2).unwrap();
                    // A_nu |Psi> then overlap with the B_nu2 creation state
                    let mut acc = Complex64::ZERO;
                    for (alpha_mask, coeff) in a_nu.amplitudes() {
                        let ops = fock::annihilation_string(alpha_mask);
                        let dropped = fock::apply_operator_string(&ops, &psi).unwrap();
                        acc += coeff.conj() * b_nu2.dot(&dropped).unwrap();
                    }
                    let want = if nu == nu2 {
                        sc.singular_values()[nu]
                    } else {
                        0.0
                    };
                    assert!(
                        (acc - Complex64::new(want, 0.0)).norm() < 1e-10,
                        "cross term ({nu},{nu2}) = {acc}"
                    );
                }
            }
        }
    }

    #[test]
    fn partner_spectra_agree() {
        let psi = make_random(8, 4, 51).unwrap();
        for m in 0..=4usize {
            let (ok, dev) = partner_spectrum_check(&psi, m).unwrap();
            assert!(ok, "partner deviation {dev:.3e} at M={m}");
        }
        let ghz = make_ghz(8).unwrap();
        let (ok, _) = partner_spectrum_check(&ghz, 1).unwrap();
        assert!(ok);
    }

    #[test]
    fn density_operator_round_trip_and_contraction() {
        let psi = make_random(6, 3, 61).unwrap();
        let rho2 = rho_m(&psi, 2).unwrap();
        let op = mbody_density_operator(&rho2).unwrap();
        let back = rho_m_mixed(&op, 2).unwrap();
        assert!(max_abs_diff(rho2.matrix(), back.matrix()) < 1e-12);

        // SD: rho^(1) as a density operator is the rank-N projector onto the
        // occupied modes
        let sd = make_slater(6, &[1, 3, 5]).unwrap();
        let op1 = mbody_density_operator(&rho_m(&sd, 1).unwrap()).unwrap();
        assert!((op1.trace() - 3.0).abs() < 1e-12);
        for (i, &mask) in op1.basis().iter().enumerate() {
            let occupied = [0b10u64, 0b1000, 0b100000].contains(&mask);
            let want = if occupied { 1.0 } else { 0.0 };
            assert!((op1.matrix()[(i, i)].re - want).abs() < 1e-12);
        }

        // contract: L = N on a pure state leaves the vacuum with weight 1
        let full = contract(&NSectorDensityOperator::from_pure(&psi).unwrap(), 3).unwrap();
        assert_eq!(full.matrix().shape(), (1, 1));
        assert!((full.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);

        // trace rule and composition
        let op = NSectorDensityOperator::from_pure(&psi).unwrap();
        let c1 = contract(&op, 1).unwrap();
        assert!((c1.trace() - 3.0).abs() < 1e-12);
        let c11 = contract(&c1, 1).unwrap();
        let c2 = contract(&op, 2).unwrap();
        let double = c2.matrix().scale(2.0);
        assert!(max_abs_diff(c11.matrix(), &double) < 1e-12);

        // contract(pure, N-M) reproduces rho^(M) entrywise
        let via_contract = contract(&op, 1).unwrap();
        let rho2_direct = rho_m(&psi, 2).unwrap();
        assert!(max_abs_diff(via_contract.matrix(), rho2_direct.matrix()) < 1e-12);
    }

    #[test]
    fn pair_condensate_density_operator_top_eigenvector_is_uniform() {
        let pc = make_pair_condensate(8, 2).unwrap();
        let rho2 = rho_m(&pc, 2).unwrap();
        let (vals, vecs) = rho2.eigh();
        assert!(vals[0] > vals[1] + 1e-9);
        // top eigenvector: uniform over the 4 contiguous-pair subsets
        let top = vecs.column(0);
        let pair_rows: Vec<usize> = (0..4)
            .map(|i| subset_rank_mask(0b11u64 << (2 * i), 8).unwrap())
            .collect();
        let reference = top[pair_rows[0]];
        assert!(reference.norm() > 1e-8);
        for i in 0..top.len() {
            let want = if pair_rows.contains(&i) {
                reference
            } else {
                Complex64::ZERO
            };
            assert!((top[i] - want).norm() < 1e-10);
        }
    }

    #[test]
    fn collective_average_saturation_and_bounds() {
        // top eigenvector saturates at lambda_max
        let psi = make_random(6, 3, 71).unwrap();
        let rho2 = rho_m(&psi, 2).unwrap();
        let (vals, vecs) = rho2.eigh();
        let top: Vec<Complex64> = vecs.column(0).iter().copied().collect();
        let avg = collective_average(&psi, 2, &top).unwrap();
        assert!((avg - vals[0]).abs() < 1e-10);

        // uniform contiguous-pair coefficients on the condensate hit 2.0
        let pc = make_pair_condensate(12, 3).unwrap();
        let mut coeffs = vec![Complex64::ZERO; binom(12, 2).unwrap() as usize];
        for i in 0..6 {
            coeffs[subset_rank_mask(0b11u64 << (2 * i), 12).unwrap()] =
                Complex64::new(1.0 / 6f64.sqrt(), 0.0);
        }
        let avg = collective_average(&pc, 2, &coeffs).unwrap();
        assert!((avg - 2.0).abs() < 1e-12);

        // on a Slater determinant every collective average stays at or below 1
        let sd = make_slater(6, &[0, 1, 4]).unwrap();
        for m in 1..=3usize {
            let dim = binom(6, m).unwrap() as usize;
            for seed in 0..5u64 {
                let probe = make_random(6, m, 100 + seed).unwrap();
                let basis = fock::sector_masks(6, m).unwrap();
                let coeffs: Vec<Complex64> =
                    basis.iter().map(|&mask| probe.amplitude(mask)).collect();
                assert_eq!(coeffs.len(), dim);
                let avg = collective_average(&sd, m, &coeffs).unwrap();
                assert!(avg <= 1.0 + 1e-10);
            }
        }

        // validation errors
        assert!(matches!(
            collective_average(&psi, 2, &[Complex64::ONE]),
            Err(Error::CoefficientLength { .. })
        ));
        let bad = vec![Complex64::new(0.5, 0.0); binom(6, 2).unwrap() as usize];
        assert!(matches!(
            collective_average(&psi, 2, &bad),
            Err(Error::UnnormalizedCoefficients(_))
        ));
    }
}
