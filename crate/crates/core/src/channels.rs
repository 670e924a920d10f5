//! Measurement channels (single-fermion, L-body, mode occupancy), one-body
//! unitaries, bipartite transfer maps, and the verification routines for the
//! mixture-majorization statements that govern them.

use crate::dm::{rho_m, MBodyDM};
use crate::entanglement::{
    entropy, majorization_tol, majorize_compare, EntropyFunctional, MajorizationReport,
    MajorizationVerdict, Spectrum,
};
use crate::error::{Error, Result};
use crate::fock::{
    apply_create, binom, binom_f64, guarded_sector_basis, sector_masks, split_sign,
    subset_rank_mask, Mask, NSectorDensityOperator, PureState,
};
use crate::linalg::{self, random_isometry, unitarity_deviation};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Branches with probability below this are dropped from outcome lists.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// Mode-count ceiling for density-operator (mixed-state) channel paths.
pub const MIXED_PATH_LIMIT: usize = 10;

/// Maximum allowed deviation of a pure input from unit norm, and of a mixed
/// input from unit trace.
const UNIT_TRACE_TOL: f64 = 1e-10;

/// Entrywise tolerance for the exact mixture identities.
const MIXTURE_IDENTITY_TOL: f64 = 1e-12;

fn check_normalized_pure(state: &PureState) -> Result<()> {
    let tr = state.norm_sqr();
    if (tr - 1.0).abs() > UNIT_TRACE_TOL {
        return Err(Error::NotUnitTrace(tr));
    }
    Ok(())
}

fn check_normalized_mixed(op: &NSectorDensityOperator) -> Result<()> {
    let tr = op.trace();
    if (tr - 1.0).abs() > UNIT_TRACE_TOL {
        return Err(Error::NotUnitTrace(tr));
    }
    Ok(())
}

fn check_mixed_path(d: usize) -> Result<()> {
    if d > MIXED_PATH_LIMIT {
        return Err(Error::MixedPathTooLarge {
            d,
            limit: MIXED_PATH_LIMIT,
        });
    }
    Ok(())
}

fn check_nonvacuum(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::VacuumInput);
    }
    Ok(())
}

/// Which branch of a measurement an outcome belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeLabel {
    /// Single fermion detected in this mode.
    Mode(usize),
    /// L fermions detected in this mode subset.
    Subset(Mask),
    /// Occupancy probe found the mode occupied.
    Occupied(usize),
    /// Occupancy probe found the mode empty.
    Empty(usize),
    /// Transfer-map Kraus branch index.
    Kraus(usize),
}

impl std::fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OutcomeLabel::Mode(j) => write!(f, "mode={j}"),
            OutcomeLabel::Subset(mask) => write!(f, "subset={mask:#b}"),
            OutcomeLabel::Occupied(j) => write!(f, "occupied={j}"),
            OutcomeLabel::Empty(j) => write!(f, "empty={j}"),
            OutcomeLabel::Kraus(r) => write!(f, "kraus={r}"),
        }
    }
}

/// One measurement branch: label, probability, post-measurement state.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome<S> {
    pub label: OutcomeLabel,
    pub probability: f64,
    pub post: S,
}

/// Detect one fermion: Kraus operators `c_j / sqrt(N)`. Branch j has
/// probability `<n_j>/N` and an (N-1)-fermion post state.
pub fn measure_single_fermion(state: &PureState) -> Result<Vec<MeasurementOutcome<PureState>>> {
    check_nonvacuum(state.n())?;
    check_normalized_pure(state)?;
    let outcomes = measure_l_body(state, 1)?;
    Ok(outcomes
        .into_iter()
        .map(|o| MeasurementOutcome {
            label: match o.label {
                OutcomeLabel::Subset(mask) => OutcomeLabel::Mode(mask.trailing_zeros() as usize),
                other => other,
            },
            ..o
        })
        .collect())
}

/// Detect L fermions jointly: Kraus operators `C^(L)_beta / sqrt(binom(N,L))`
/// over all L-subsets beta. Branch beta has probability
/// `rho^(L)_{beta beta} / binom(N,L)` and an (N-L)-fermion post state.
pub fn measure_l_body(state: &PureState, l: usize) -> Result<Vec<MeasurementOutcome<PureState>>> {
    let n = state.n();
    check_nonvacuum(n)?;
    check_normalized_pure(state)?;
    if l == 0 || l > n {
        return Err(Error::AnnihilationOrderOutOfRange { l, n });
    }
    let d = state.d();
    let norm = binom_f64(n, l)?;
    let mut outcomes = Vec::new();
    for beta in sector_masks(d, l)? {
        let ops = crate::fock::annihilation_string(beta);
        let branch = crate::fock::apply_operator_string(&ops, state)?;
        let weight = branch.norm_sqr();
        let probability = weight / norm;
        if probability < ZERO_PROBABILITY {
            continue;
        }
        outcomes.push(MeasurementOutcome {
            label: OutcomeLabel::Subset(beta),
            probability,
            post: branch.normalized()?,
        });
    }
    Ok(outcomes)
}

/// Projectively probe the occupancy of one mode: branches `n_j` (occupied)
/// and `1 - n_j` (empty), both keeping all N fermions.
pub fn measure_occupancy(
    state: &PureState,
    mode: usize,
) -> Result<Vec<MeasurementOutcome<PureState>>> {
    let d = state.d();
    let n = state.n();
    check_nonvacuum(n)?;
    check_normalized_pure(state)?;
    if mode >= d {
        return Err(Error::ModeOutOfRange { mode, d });
    }
    let bit = 1u64 << mode;
    let mut occupied = Vec::new();
    let mut empty = Vec::new();
    for (mask, amp) in state.amplitudes() {
        if mask & bit != 0 {
            occupied.push((mask, amp));
        } else {
            empty.push((mask, amp));
        }
    }
    let mut outcomes = Vec::new();
    for (label, amps) in [
        (OutcomeLabel::Occupied(mode), occupied),
        (OutcomeLabel::Empty(mode), empty),
    ] {
        let branch = PureState::new(d, n, amps)?;
        let probability = branch.norm_sqr();
        if probability < ZERO_PROBABILITY {
            continue;
        }
        outcomes.push(MeasurementOutcome {
            label,
            probability,
            post: branch.normalized()?,
        });
    }
    Ok(outcomes)
}

/// `C_beta rho C_beta^dag` on the (N - |beta|)-fermion sector.
fn annihilate_conjugate(op: &NSectorDensityOperator, beta: Mask) -> Result<NSectorDensityOperator> {
    let d = op.d();
    let n = op.n();
    let l = beta.count_ones() as usize;
    let out_basis = guarded_sector_basis(d, n - l)?;
    let dim = out_basis.len();
    let input = op.matrix();
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    let mut members = Vec::with_capacity(dim);
    for (row, &mask) in out_basis.iter().enumerate() {
        if mask & beta != 0 {
            continue;
        }
        let union = mask | beta;
        let sign = split_sign(union, beta)? as f64;
        members.push((row, op.index_of(union)?, sign));
    }
    for &(row, p, sp) in &members {
        for &(col, q, sq) in &members {
            matrix[(row, col)] = input[(p, q)] * (sp * sq);
        }
    }
    NSectorDensityOperator::from_matrix_unchecked(d, n - l, matrix)
}

/// Mixed-state single-fermion detection; D is capped at
/// [`MIXED_PATH_LIMIT`].
pub fn measure_single_fermion_mixed(
    op: &NSectorDensityOperator,
) -> Result<Vec<MeasurementOutcome<NSectorDensityOperator>>> {
    let outcomes = measure_l_body_mixed(op, 1)?;
    Ok(outcomes
        .into_iter()
        .map(|o| MeasurementOutcome {
            label: match o.label {
                OutcomeLabel::Subset(mask) => OutcomeLabel::Mode(mask.trailing_zeros() as usize),
                other => other,
            },
            ..o
        })
        .collect())
}

/// Mixed-state L-body detection; D is capped at [`MIXED_PATH_LIMIT`].
pub fn measure_l_body_mixed(
    op: &NSectorDensityOperator,
    l: usize,
) -> Result<Vec<MeasurementOutcome<NSectorDensityOperator>>> {
    let d = op.d();
    let n = op.n();
    check_nonvacuum(n)?;
    check_mixed_path(d)?;
    check_normalized_mixed(op)?;
    if l == 0 || l > n {
        return Err(Error::AnnihilationOrderOutOfRange { l, n });
    }
    let norm = binom_f64(n, l)?;
    let mut outcomes = Vec::new();
    for beta in sector_masks(d, l)? {
        let branch = annihilate_conjugate(op, beta)?;
        let probability = branch.trace() / norm;
        if probability < ZERO_PROBABILITY {
            continue;
        }
        outcomes.push(MeasurementOutcome {
            label: OutcomeLabel::Subset(beta),
            probability,
            post: branch.normalized()?,
        });
    }
    Ok(outcomes)
}

/// Mixed-state occupancy probe; D is capped at [`MIXED_PATH_LIMIT`].
pub fn measure_occupancy_mixed(
    op: &NSectorDensityOperator,
    mode: usize,
) -> Result<Vec<MeasurementOutcome<NSectorDensityOperator>>> {
    let d = op.d();
    check_nonvacuum(op.n())?;
    check_mixed_path(d)?;
    check_normalized_mixed(op)?;
    if mode >= d {
        return Err(Error::ModeOutOfRange { mode, d });
    }
    let bit = 1u64 << mode;
    let basis = op.basis().to_vec();
    let mut outcomes = Vec::new();
    for (label, keep) in [
        (OutcomeLabel::Occupied(mode), true),
        (OutcomeLabel::Empty(mode), false),
    ] {
        let mut matrix = op.matrix().clone();
        for (i, &mask) in basis.iter().enumerate() {
            if (mask & bit != 0) != keep {
                matrix.fill_row(i, Complex64::ZERO);
                matrix.fill_column(i, Complex64::ZERO);
            }
        }
        let branch = NSectorDensityOperator::from_matrix_unchecked(d, op.n(), matrix)?;
        let probability = branch.trace();
        if probability < ZERO_PROBABILITY {
            continue;
        }
        outcomes.push(MeasurementOutcome {
            label,
            probability,
            post: branch.normalized()?,
        });
    }
    Ok(outcomes)
}

fn check_one_body_unitary(u: &DMatrix<Complex64>, d: usize) -> Result<()> {
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::KrausShape {
            index: 0,
            rows: u.nrows(),
            cols: u.ncols(),
            want_rows: d,
            want_cols: d,
        });
    }
    let dev = unitarity_deviation(u);
    if dev > UNIT_TRACE_TOL {
        return Err(Error::NotUnitary(dev));
    }
    Ok(())
}

/// Apply the number-conserving one-body unitary `c_i^dag -> sum_j U_ji
/// c_j^dag` to a pure state.
pub fn one_body_unitary_pure(state: &PureState, u: &DMatrix<Complex64>) -> Result<PureState> {
    let d = state.d();
    check_one_body_unitary(u, d)?;
    let mut total: BTreeMap<Mask, Complex64> = BTreeMap::new();
    for (mask, amp) in state.amplitudes() {
        // expand the creation string right to left (largest mode first) so
        // each factor acts on already-built configurations
        let mut current: BTreeMap<Mask, Complex64> = BTreeMap::new();
        current.insert(0, amp);
        let modes = crate::fock::modes_from_mask(mask);
        for &i in modes.iter().rev() {
            let mut next: BTreeMap<Mask, Complex64> = BTreeMap::new();
            for (&partial, &coeff) in &current {
                for j in 0..d {
                    let uji = u[(j, i)];
                    if uji.norm_sqr() == 0.0 {
                        continue;
                    }
                    if let Some((created, sign)) = apply_create(d, j, partial)? {
                        *next.entry(created).or_insert(Complex64::ZERO) +=
                            coeff * uji * sign as f64;
                    }
                }
            }
            current = next;
        }
        for (m, c) in current {
            *total.entry(m).or_insert(Complex64::ZERO) += c;
        }
    }
    let mut out = PureState::new(d, state.n(), total)?;
    out.prune();
    Ok(out)
}

/// Matrix of the induced unitary on the N-fermion sector: entry
/// (alpha, alpha') is the determinant of the N x N minor of U with rows
/// alpha and columns alpha'.
pub fn induced_subset_unitary(u: &DMatrix<Complex64>, n: usize) -> Result<DMatrix<Complex64>> {
    let d = u.nrows();
    check_one_body_unitary(u, d)?;
    let basis = guarded_sector_basis(d, n)?;
    let dim = basis.len();
    let mode_lists: Vec<Vec<usize>> = basis
        .iter()
        .map(|&mask| crate::fock::modes_from_mask(mask))
        .collect();
    let mut w = DMatrix::<Complex64>::zeros(dim, dim);
    let mut minor = DMatrix::<Complex64>::zeros(n, n);
    for (col, cols) in mode_lists.iter().enumerate() {
        for (row, rows) in mode_lists.iter().enumerate() {
            for (a, &i) in rows.iter().enumerate() {
                for (b, &j) in cols.iter().enumerate() {
                    minor[(a, b)] = u[(i, j)];
                }
            }
            w[(row, col)] = minor.determinant();
        }
    }
    Ok(w)
}

/// Apply a one-body unitary to a mixed state by conjugating with the induced
/// sector unitary; D is capped at [`MIXED_PATH_LIMIT`].
pub fn one_body_unitary_mixed(
    op: &NSectorDensityOperator,
    u: &DMatrix<Complex64>,
) -> Result<NSectorDensityOperator> {
    check_mixed_path(op.d())?;
    check_one_body_unitary(u, op.d())?;
    let w = induced_subset_unitary(u, op.n())?;
    let matrix = &w * op.matrix() * w.adjoint();
    NSectorDensityOperator::from_matrix_unchecked(op.d(), op.n(), matrix)
}

/// CPTP transfer of M-body coherence onto a D_A-mode subsystem: Kraus blocks
/// T^r act on the M-subset axis of the (M, N-M) representation, with the
/// coefficient completeness relation `sum_r T^r^dag T^r = I`.
pub struct TransferMap {
    d: usize,
    d_a: usize,
    m: usize,
    kraus: Vec<DMatrix<Complex64>>,
}

impl TransferMap {
    pub fn new(
        d: usize,
        d_a: usize,
        m: usize,
        kraus: Vec<DMatrix<Complex64>>,
    ) -> Result<TransferMap> {
        if d_a < m {
            return Err(Error::SubsystemTooSmall { d_a, m });
        }
        let rows = binom(d_a, m)? as usize;
        let cols = binom(d, m)? as usize;
        for (index, t) in kraus.iter().enumerate() {
            if t.nrows() != rows || t.ncols() != cols {
                return Err(Error::KrausShape {
                    index,
                    rows: t.nrows(),
                    cols: t.ncols(),
                    want_rows: rows,
                    want_cols: cols,
                });
            }
        }
        let mut sum = DMatrix::<Complex64>::zeros(cols, cols);
        for t in &kraus {
            sum += t.adjoint() * t;
        }
        let dev = linalg::max_abs_diff(&sum, &DMatrix::<Complex64>::identity(cols, cols));
        if dev > UNIT_TRACE_TOL {
            return Err(Error::IncompleteKraus(dev));
        }
        Ok(TransferMap { d, d_a, m, kraus })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kraus(&self) -> &[DMatrix<Complex64>] {
        &self.kraus
    }

    /// Single identity Kraus block: copies the full M-body coherence onto a
    /// same-size subsystem deterministically.
    pub fn uniform(d: usize, m: usize) -> Result<TransferMap> {
        let dim = binom(d, m)? as usize;
        Ok(TransferMap {
            d,
            d_a: d,
            m,
            kraus: vec![DMatrix::identity(dim, dim)],
        })
    }

    /// One-body map with D single-row blocks: branch r tags the fermion
    /// found in mode r, collapsing the subsystem to one mode.
    pub fn mode_tagged(d: usize) -> Result<TransferMap> {
        binom(d, 1)?;
        let kraus = (0..d)
            .map(|r| {
                let mut t = DMatrix::<Complex64>::zeros(1, d);
                t[(0, r)] = Complex64::ONE;
                t
            })
            .collect();
        Ok(TransferMap {
            d,
            d_a: 1,
            m: 1,
            kraus,
        })
    }

    /// Haar-style random map: a random isometry stacked from `n_kraus`
    /// blocks, so completeness holds exactly. Requires
    /// `n_kraus * binom(D_A, M) >= binom(D, M)`.
    pub fn random(
        d: usize,
        d_a: usize,
        m: usize,
        n_kraus: usize,
        seed: u64,
    ) -> Result<TransferMap> {
        use rand::SeedableRng;
        if d_a < m {
            return Err(Error::SubsystemTooSmall { d_a, m });
        }
        let rows = binom(d_a, m)? as usize;
        let cols = binom(d, m)? as usize;
        if n_kraus * rows < cols {
            return Err(Error::IncompleteKraus(1.0));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let stacked = random_isometry(n_kraus * rows, cols, &mut rng);
        let kraus = (0..n_kraus)
            .map(|r| stacked.rows(r * rows, rows).into_owned())
            .collect();
        Ok(TransferMap { d, d_a, m, kraus })
    }
}

/// Post-transfer joint state: modes 0..D_B carry the residual (N-M)-fermion
/// system, modes D_B..D_B+D_A the transferred M fermions.
pub struct BipartiteState {
    d_b: usize,
    d_a: usize,
    m: usize,
    joint: PureState,
}

impl BipartiteState {
    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn joint(&self) -> &PureState {
        &self.joint
    }

    /// Trace out the B modes: the reduced M-fermion density operator on the
    /// transferred subsystem, unit trace.
    pub fn reduced_state_a(&self) -> Result<MBodyDM> {
        let rows = binom(self.d_a, self.m)? as usize;
        let cols = binom(self.d_b, self.joint.n() - self.m)? as usize;
        let low = (1u64 << self.d_b) - 1;
        let mut g = DMatrix::<Complex64>::zeros(rows, cols);
        for (mask, amp) in self.joint.amplitudes() {
            let row = subset_rank_mask(mask >> self.d_b, self.d_a)?;
            let col = subset_rank_mask(mask & low, self.d_b)?;
            g[(row, col)] = amp;
        }
        let matrix = &g * g.adjoint();
        Ok(MBodyDM::new(self.d_a, self.m, self.m, matrix, true))
    }
}

/// Run a transfer map on a pure N-fermion state: branch r keeps probability
/// `|T^r Gamma|_F^2 / binom(N,M)` and a normalized joint state on
/// D_B + D_A modes.
pub fn apply_transfer_map(
    map: &TransferMap,
    state: &PureState,
) -> Result<Vec<MeasurementOutcome<BipartiteState>>> {
    let d = state.d();
    let n = state.n();
    check_nonvacuum(n)?;
    check_normalized_pure(state)?;
    if map.d != d {
        return Err(Error::SectorMismatch {
            d1: map.d,
            n1: map.m,
            d2: d,
            n2: n,
        });
    }
    let gamma = crate::dm::gamma_matrix(state, map.m)?;
    let norm = binom_f64(n, map.m)?;
    let b_basis = sector_masks(d, n - map.m)?;
    let a_basis = sector_masks(map.d_a, map.m)?;
    let sign = if (map.m * (n - map.m)) % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    let mut outcomes = Vec::new();
    for (r, t) in map.kraus.iter().enumerate() {
        let g = t * gamma.matrix();
        let weight: f64 = g.iter().map(|z| z.norm_sqr()).sum();
        let probability = weight / norm;
        if probability < ZERO_PROBABILITY {
            continue;
        }
        let scale = sign / weight.sqrt();
        let mut amps = Vec::new();
        for (i, &mu) in a_basis.iter().enumerate() {
            for (j, &beta) in b_basis.iter().enumerate() {
                let z = g[(i, j)];
                if z.norm_sqr() > 0.0 {
                    amps.push((beta | (mu << d), z * scale));
                }
            }
        }
        let joint = PureState::new(d + map.d_a, n, amps)?;
        outcomes.push(MeasurementOutcome {
            label: OutcomeLabel::Kraus(r),
            probability,
            post: BipartiteState {
                d_b: d,
                d_a: map.d_a,
                m: map.m,
                joint,
            },
        });
    }
    Ok(outcomes)
}

/// One entropy inequality `S(original) >= sum_b p_b S(branch)` checked on
/// trace-1 spectra.
#[derive(Debug, Clone, Copy)]
pub struct EntropyCheck {
    pub functional: EntropyFunctional,
    pub original: f64,
    pub branch_average: f64,
    pub holds: bool,
}

fn entropy_checks(original: &Spectrum, branches: &[(f64, Spectrum)]) -> Vec<EntropyCheck> {
    [
        EntropyFunctional::VonNeumann,
        EntropyFunctional::BosonicLike,
    ]
    .into_iter()
    .map(|functional| {
        let lhs = entropy(original, functional);
        let rhs: f64 = branches
            .iter()
            .map(|(p, s)| p * entropy(s, functional))
            .sum();
        EntropyCheck {
            functional,
            original: lhs,
            branch_average: rhs,
            holds: lhs >= rhs - 1e-9,
        }
    })
    .collect()
}

/// Entrywise `sum_b p_b lambda_sorted(branch_b)`, padded to `dim`.
fn average_branch_spectrum(branches: &[(f64, Spectrum)], dim: usize) -> Vec<f64> {
    let mut avg = vec![0.0f64; dim];
    for (p, s) in branches {
        for (slot, v) in avg.iter_mut().zip(s.values()) {
            *slot += p * v;
        }
    }
    avg
}

/// Evidence for the L-body measurement statement: the original normalized
/// rho^(M) equals the probability mixture of the branch rho^(M)'s and is
/// majorized by their averaged sorted spectra, hence no Schur-concave
/// entropy decreases on average.
#[derive(Debug)]
pub struct TheoremReport {
    pub l: usize,
    pub m: usize,
    /// Largest entry deviation of `sum_b p_b rho_b^(M)` from the original
    /// normalized rho^(M).
    pub mixture_deviation: f64,
    pub majorization: MajorizationReport,
    pub entropy_checks: Vec<EntropyCheck>,
    pub holds: bool,
}

pub fn verify_lbody_majorization(state: &PureState, l: usize, m: usize) -> Result<TheoremReport> {
    let n = state.n();
    let outcomes = measure_l_body(state, l)?;
    if m > n - l {
        return Err(Error::BodyOrderOutOfRange { m, n: n - l });
    }
    let original = rho_m(state, m)?.normalized()?;
    let branches: Vec<(f64, MBodyDM)> = outcomes
        .iter()
        .map(|o| Ok((o.probability, rho_m(&o.post, m)?.normalized()?)))
        .collect::<Result<_>>()?;

    let mut mixture =
        DMatrix::<Complex64>::zeros(original.matrix().nrows(), original.matrix().ncols());
    for (p, dm) in &branches {
        mixture += dm.matrix().scale(*p);
    }
    let mixture_deviation = linalg::max_abs_diff(&mixture, original.matrix());

    let branch_spectra: Vec<(f64, Spectrum)> = branches
        .iter()
        .map(|(p, dm)| Ok((*p, Spectrum::new(dm.spectrum())?)))
        .collect::<Result<_>>()?;
    let original_spec = Spectrum::new(original.spectrum())?;
    let avg = average_branch_spectrum(&branch_spectra, original_spec.len());
    let majorization = majorize_compare(&original_spec, &Spectrum::new(avg)?, majorization_tol())?;
    let entropy_checks = entropy_checks(&original_spec, &branch_spectra);

    let majorized = matches!(
        majorization.verdict,
        MajorizationVerdict::FirstMoreMixed | MajorizationVerdict::Equivalent
    );
    let holds = mixture_deviation <= MIXTURE_IDENTITY_TOL
        && majorized
        && entropy_checks.iter().all(|c| c.holds);
    Ok(TheoremReport {
        l,
        m,
        mixture_deviation,
        majorization,
        entropy_checks,
        holds,
    })
}

/// Evidence for the occupancy-measurement comparison at order M. The
/// mixture identity is only guaranteed at M = 1; the report records the
/// actual deviation, the branch eigenvalue tops (unnormalized scale), and
/// whether the averaged branch spectra still majorize the original.
#[derive(Debug)]
pub struct OccupancyReport {
    pub mode: usize,
    pub m: usize,
    pub occupied_prob: f64,
    /// Largest rho^(M) eigenvalue of the occupied branch, trace binom(N,M).
    pub occupied_top: f64,
    pub empty_top: f64,
    pub average_top: f64,
    pub original_top: f64,
    pub mixture_deviation: f64,
    pub majorization: MajorizationReport,
    /// True when the post-measurement average majorizes the original.
    pub theorem_holds: bool,
}

pub fn verify_occupancy_majorization(
    state: &PureState,
    mode: usize,
    m: usize,
) -> Result<OccupancyReport> {
    let n = state.n();
    if m > n {
        return Err(Error::BodyOrderOutOfRange { m, n });
    }
    let outcomes = measure_occupancy(state, mode)?;
    let original = rho_m(state, m)?.normalized()?;
    let scale = binom_f64(n, m)?;

    let mut occupied_prob = 0.0;
    let mut occupied_top = 0.0;
    let mut empty_top = 0.0;
    let mut branches: Vec<(f64, MBodyDM)> = Vec::new();
    for o in &outcomes {
        let dm = rho_m(&o.post, m)?.normalized()?;
        let top = dm.spectrum()[0] * scale;
        match o.label {
            OutcomeLabel::Occupied(_) => {
                occupied_prob = o.probability;
                occupied_top = top;
            }
            _ => empty_top = top,
        }
        branches.push((o.probability, dm));
    }
    let average_top = branches
        .iter()
        .map(|(p, dm)| p * dm.spectrum()[0] * scale)
        .sum();
    let original_top = original.spectrum()[0] * scale;

    let mut mixture =
        DMatrix::<Complex64>::zeros(original.matrix().nrows(), original.matrix().ncols());
    for (p, dm) in &branches {
        mixture += dm.matrix().scale(*p);
    }
    let mixture_deviation = linalg::max_abs_diff(&mixture, original.matrix());

    let branch_spectra: Vec<(f64, Spectrum)> = branches
        .iter()
        .map(|(p, dm)| Ok((*p, Spectrum::new(dm.spectrum())?)))
        .collect::<Result<_>>()?;
    let original_spec = Spectrum::new(original.spectrum())?;
    let avg = average_branch_spectrum(&branch_spectra, original_spec.len());
    let majorization = majorize_compare(&original_spec, &Spectrum::new(avg)?, majorization_tol())?;
    let theorem_holds = matches!(
        majorization.verdict,
        MajorizationVerdict::FirstMoreMixed | MajorizationVerdict::Equivalent
    );
    Ok(OccupancyReport {
        mode,
        m,
        occupied_prob,
        occupied_top,
        empty_top,
        average_top,
        original_top,
        mixture_deviation,
        majorization,
        theorem_holds,
    })
}

/// Evidence for the transfer-map statement: branch subsystem states, taken
/// with their probabilities, majorize the original normalized rho^(M).
#[derive(Debug)]
pub struct TransferReport {
    pub m: usize,
    pub probabilities: Vec<f64>,
    pub majorization: MajorizationReport,
    pub holds: bool,
}

pub fn verify_transfer_majorization(
    map: &TransferMap,
    state: &PureState,
) -> Result<TransferReport> {
    let outcomes = apply_transfer_map(map, state)?;
    let original = rho_m(state, map.m)?.normalized()?;
    let original_spec = Spectrum::new(original.spectrum())?;
    let mut probabilities = Vec::with_capacity(outcomes.len());
    let mut branch_spectra = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        probabilities.push(o.probability);
        let dm = o.post.reduced_state_a()?;
        branch_spectra.push((o.probability, Spectrum::new(dm.spectrum())?));
    }
    let dim = original_spec.len().max(
        branch_spectra
            .iter()
            .map(|(_, s)| s.len())
            .max()
            .unwrap_or(0),
    );
    let avg = average_branch_spectrum(&branch_spectra, dim);
    let majorization = majorize_compare(&original_spec, &Spectrum::new(avg)?, majorization_tol())?;
    let holds = matches!(
        majorization.verdict,
        MajorizationVerdict::FirstMoreMixed | MajorizationVerdict::Equivalent
    );
    Ok(TransferReport {
        m: map.m,
        probabilities,
        majorization,
        holds,
    })
}
