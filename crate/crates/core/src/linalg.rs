//! Dense linear algebra over `Complex64`: Hermitian eigendecomposition with a
//! fixed sort order, SVD with square (completed) unitary factors, and
//! seed-deterministic random unitaries/isometries.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Hermitian eigendecomposition; eigenvalues sorted nonincreasing, columns of
/// the returned matrix are the matching eigenvectors.
pub fn eigh(matrix: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let se = matrix.clone().symmetric_eigen();
    // nalgebra's QL iteration can emit NaN on extremely degenerate spectra
    // (e.g. large rank-one projectors); fall back to cyclic Jacobi, which is
    // unconditionally convergent for Hermitian input.
    let finite = se.eigenvalues.iter().all(|v| v.is_finite())
        && se
            .eigenvectors
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite());
    let (raw_values, raw_vectors) = if finite {
        (
            se.eigenvalues.iter().copied().collect::<Vec<f64>>(),
            se.eigenvectors,
        )
    } else {
        jacobi_hermitian(matrix)
    };
    let mut order: Vec<usize> = (0..raw_values.len()).collect();
    order.sort_by(|&a, &b| raw_values[b].partial_cmp(&raw_values[a]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| raw_values[i]).collect();
    let columns: Vec<_> = order
        .iter()
        .map(|&i| raw_vectors.column(i).into_owned())
        .collect();
    (values, DMatrix::from_columns(&columns))
}

/// Hermitian eigenvalues only, sorted nonincreasing.
pub fn eigvalsh(matrix: &DMatrix<Complex64>) -> Vec<f64> {
    eigh(matrix).0
}

/// Cyclic Jacobi for Hermitian matrices: each rotation zeroes one off-diagonal
/// entry with a phased Givens rotation, and the off-diagonal mass decreases
/// monotonically, so the sweep loop always terminates.
pub(crate) fn jacobi_hermitian(matrix: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    let mut q = DMatrix::<Complex64>::identity(n, n);
    let scale = a
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let stop = 1e-15 * scale;
    let skip = 1e-19 * scale;
    let mut converged = false;
    for _ in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for r in p + 1..n {
                off += 2.0 * a[(p, r)].norm_sqr();
            }
        }
        if off.sqrt() <= stop {
            converged = true;
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let apr = a[(p, r)];
                let mag = apr.norm();
                if mag <= skip {
                    continue;
                }
                let alpha = a[(p, p)].re;
                let beta = a[(r, r)].re;
                // phase u makes the pivot real: apr * u = |apr|
                let u = apr.conj() / mag;
                let tau = (beta - alpha) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let us = u * s;
                let uc = u * c;
                for i in 0..n {
                    let aip = a[(i, p)];
                    let air = a[(i, r)];
                    a[(i, p)] = aip * c - air * us;
                    a[(i, r)] = aip * s + air * uc;
                }
                let ub = u.conj();
                let ubs = ub * s;
                let ubc = ub * c;
                for j in 0..n {
                    let apj = a[(p, j)];
                    let arj = a[(r, j)];
                    a[(p, j)] = apj * c - arj * ubs;
                    a[(r, j)] = apj * s + arj * ubc;
                }
                for i in 0..n {
                    let qip = q[(i, p)];
                    let qir = q[(i, r)];
                    q[(i, p)] = qip * c - qir * us;
                    q[(i, r)] = qip * s + qir * uc;
                }
            }
        }
    }
    assert!(converged, "Jacobi eigensolver exhausted its sweep budget");
    let values: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    (values, q)
}

/// SVD with both factors completed to square unitaries: `matrix = u * S * v^dag`
/// where `S` is the rows x cols rectangular diagonal of `singular_values`.
pub struct FullSvd {
    pub u: DMatrix<Complex64>,
    /// min(rows, cols) singular values, nonincreasing.
    pub singular_values: Vec<f64>,
    pub v: DMatrix<Complex64>,
}

pub fn svd_full(matrix: &DMatrix<Complex64>) -> FullSvd {
    let svd = matrix.clone().svd(true, true);
    let u_thin = svd.u.expect("u requested");
    let v_thin = svd.v_t.expect("v_t requested").adjoint();
    let singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    FullSvd {
        u: complete_unitary(&u_thin),
        singular_values,
        v: complete_unitary(&v_thin),
    }
}

/// Extend orthonormal columns to a full square unitary by orthogonalizing
/// standard basis vectors against them. A single sweep with acceptance
/// threshold 0.5/sqrt(n) always fills the complement: the skipped residual
/// norms cannot sum to a full missing dimension.
fn complete_unitary(cols: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = cols.nrows();
    let threshold = 0.5 / (n as f64).sqrt();
    let mut basis: Vec<DVector<Complex64>> = (0..cols.ncols())
        .map(|j| cols.column(j).into_owned())
        .collect();
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = DVector::<Complex64>::zeros(n);
        v[e] = Complex64::ONE;
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
        }
        let norm = v.norm();
        if norm > threshold {
            v.unscale_mut(norm);
            basis.push(v);
        }
    }
    assert_eq!(basis.len(), n, "unitary completion fell short");
    DMatrix::from_columns(&basis)
}

/// `u * S * v^dag` with the rectangular diagonal rebuilt from the values.
pub fn svd_reconstruct(svd: &FullSvd) -> DMatrix<Complex64> {
    let rows = svd.u.nrows();
    let cols = svd.v.nrows();
    let mut s = DMatrix::<Complex64>::zeros(rows, cols);
    for (i, &val) in svd.singular_values.iter().enumerate() {
        s[(i, i)] = Complex64::new(val, 0.0);
    }
    &svd.u * s * svd.v.adjoint()
}

/// Max-norm of `m - m^dag`.
pub fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Max-norm of `u^dag u - I`.
pub fn unitarity_deviation(u: &DMatrix<Complex64>) -> f64 {
    let gram = u.adjoint() * u;
    let mut dev = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let want = if i == j {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            dev = dev.max((gram[(i, j)] - want).norm());
        }
    }
    dev
}

/// Elementwise max-norm difference.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let mut dev = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            dev = dev.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    dev
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn random_gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-ish random unitary: QR of a complex Gaussian with the R-diagonal
/// phases absorbed into the columns.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    random_isometry(n, n, rng)
}

/// rows x cols matrix (rows >= cols) with orthonormal columns.
pub fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let qr = random_gaussian(rows, cols, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let phase = rjj / rjj.norm();
            for i in 0..rows {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hermitian_fixture(n: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_gaussian(n, n, &mut rng);
        &g * g.adjoint()
    }

    #[test]
    fn eigh_sorts_and_reconstructs() {
        let h = hermitian_fixture(7, 1);
        let (vals, vecs) = eigh(&h);
        for w in vals.windows(2) {
            assert!(w[0] >= w[1]);
        }
        let lam = DMatrix::from_diagonal(&DVector::from_iterator(
            7,
            vals.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        let recon = &vecs * lam * vecs.adjoint();
        assert!(max_abs_diff(&recon, &h) < 1e-10);
        assert!(unitarity_deviation(&vecs) < 1e-10);
        assert_eq!(eigvalsh(&h), vals);
    }

    #[test]
    fn jacobi_agrees_with_primary_solver() {
        for seed in 0..4u64 {
            let h = hermitian_fixture(9, 30 + seed);
            let (vals, vecs) = eigh(&h);
            let (mut jvals, jvecs) = jacobi_hermitian(&h);
            jvals.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (a, b) in vals.iter().zip(&jvals) {
                assert!((a - b).abs() < 1e-10);
            }
            assert!(unitarity_deviation(&jvecs) < 1e-10);
            let lam = DMatrix::from_diagonal(&DVector::from_iterator(
                9,
                vals.iter().map(|&v| Complex64::new(v, 0.0)),
            ));
            assert!(max_abs_diff(&(&vecs * lam * vecs.adjoint()), &h) < 1e-10);
        }
    }

    #[test]
    fn rank_one_projector_spectrum_is_clean() {
        // large rank-one matrices are exactly the shape that used to drive the
        // primary solver to NaN
        let n = 495;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = random_gaussian(n, 1, &mut rng);
        let v = &g / Complex64::new(g.norm(), 0.0);
        let proj = &v * v.adjoint();
        let vals = eigvalsh(&proj);
        assert!(vals.iter().all(|x| x.is_finite()));
        assert!((vals[0] - 1.0).abs() < 1e-10);
        assert!(vals[1].abs() < 1e-10);
        assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn svd_full_completes_both_orientations() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (rows, cols) in [(3usize, 5usize), (5, 3), (4, 4)] {
            let g = random_gaussian(rows, cols, &mut rng);
            let svd = svd_full(&g);
            assert_eq!(svd.u.shape(), (rows, rows));
            assert_eq!(svd.v.shape(), (cols, cols));
            assert!(unitarity_deviation(&svd.u) < 1e-10);
            assert!(unitarity_deviation(&svd.v) < 1e-10);
            for w in svd.singular_values.windows(2) {
                assert!(w[0] >= w[1]);
            }
            assert!(max_abs_diff(&svd_reconstruct(&svd), &g) < 1e-10);
        }
    }

    #[test]
    fn random_unitary_is_unitary_and_seeded() {
        let u1 = random_unitary(6, &mut ChaCha8Rng::seed_from_u64(7));
        let u2 = random_unitary(6, &mut ChaCha8Rng::seed_from_u64(7));
        assert!(unitarity_deviation(&u1) < 1e-12);
        assert_eq!(u1, u2);
        let iso = random_isometry(9, 4, &mut ChaCha8Rng::seed_from_u64(8));
        assert!(unitarity_deviation(&iso) < 1e-12);
    }
}
