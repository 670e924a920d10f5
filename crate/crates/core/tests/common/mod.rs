#![allow(dead_code)]

use mbody::fock::{annihilation_string, apply_operator_string, sector_masks};
use mbody::PureState;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Independent M-body density oracle: every entry computed as the operator
/// average `<C_alpha' Psi, C_alpha Psi>` through annihilation strings alone,
/// sharing no code with the coefficient-matrix construction.
pub fn rho_by_operator_averages(state: &PureState, m: usize) -> DMatrix<Complex64> {
    let basis = sector_masks(state.d(), m).unwrap();
    let branches: Vec<PureState> = basis
        .iter()
        .map(|&alpha| apply_operator_string(&annihilation_string(alpha), state).unwrap())
        .collect();
    let dim = basis.len();
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            rho[(i, j)] = branches[j].dot(&branches[i]).unwrap();
        }
    }
    rho
}

/// Rotating pool of (D, N) sectors used by the random-state suites.
pub const SECTOR_POOL: [(usize, usize); 8] = [
    (4, 2),
    (5, 2),
    (5, 3),
    (6, 3),
    (7, 3),
    (7, 4),
    (8, 4),
    (8, 3),
];

/// Print one pass/fail line for an acceptance criterion and panic on
/// failure, listing the first few recorded failures.
pub fn report(number: usize, description: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("criterion {number:02} PASS: {description}");
    } else {
        println!(
            "criterion {number:02} FAIL: {description} ({} failures)",
            failures.len()
        );
        for f in failures.iter().take(5) {
            println!("  - {f}");
        }
        panic!("criterion {number:02} failed");
    }
}
