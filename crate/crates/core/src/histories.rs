//! Finite-dimensional consistent-histories checks.
//!
//! A two-event history is legitimate when inserting the first measurement
//! does not alter the statistics of the second. The non-selective update
//! ρ → ρ′ = P₁ρP₁ + P₁′ρP₁′ leaves Tr P₂ρ′P₂ equal to Tr P₂ρP₂ exactly
//! when the consistency functional Tr P₂[P₁,[ρ,P₁]] vanishes; the identity
//!
//! ```text
//! Tr P₂[P₁,[ρ,P₁]] = Tr P₂ρ′P₂ − Tr P₂ρP₂ = Tr([P₂,P₁][ρ,P₁])
//! ```
//!
//! holds for any projector pair, so commuting projectors can never show a
//! disturbance. The track-level check therefore conjugates the second
//! window projector with the free evolution covering the flight between
//! the two molecules; that is where the separation dependence lives.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{CoreError, Result};

type CMatrix = DMatrix<Complex64>;

const MATRIX_TOL: f64 = 1e-10;

/// Density matrix plus the two projectors of a candidate history.
#[derive(Debug, Clone)]
pub struct HistoryProblem {
    rho: CMatrix,
    p1: CMatrix,
    p2: CMatrix,
}

fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

fn check_density_matrix(rho: &CMatrix) -> Result<()> {
    if rho.nrows() != rho.ncols() {
        return Err(CoreError::InvalidDensityMatrix("not square".into()));
    }
    if hermitian_defect(rho) > MATRIX_TOL {
        return Err(CoreError::InvalidDensityMatrix("not Hermitian".into()));
    }
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > MATRIX_TOL || trace.im.abs() > MATRIX_TOL {
        return Err(CoreError::InvalidDensityMatrix(format!(
            "trace {trace} != 1"
        )));
    }
    let eig = rho.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if min < -MATRIX_TOL {
        return Err(CoreError::InvalidDensityMatrix(format!(
            "negative eigenvalue {min}"
        )));
    }
    Ok(())
}

fn check_projector(p: &CMatrix, name: &str) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(CoreError::InvalidProjector(format!("{name} not square")));
    }
    if hermitian_defect(p) > MATRIX_TOL {
        return Err(CoreError::InvalidProjector(format!("{name} not Hermitian")));
    }
    if (p * p - p).norm() > MATRIX_TOL * (1.0 + p.norm()) {
        return Err(CoreError::InvalidProjector(format!("{name} not idempotent")));
    }
    Ok(())
}

impl HistoryProblem {
    pub fn new(rho: CMatrix, p1: CMatrix, p2: CMatrix) -> Result<Self> {
        check_density_matrix(&rho)?;
        check_projector(&p1, "P1")?;
        check_projector(&p2, "P2")?;
        let dim = rho.nrows();
        if p1.nrows() != dim || p2.nrows() != dim {
            return Err(CoreError::Invalid("dimension mismatch".into()));
        }
        Ok(HistoryProblem { rho, p1, p2 })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }
}

/// Non-selective measurement update ρ′ = P₁ρP₁ + (1−P₁)ρ(1−P₁).
pub fn lueders_update(hp: &HistoryProblem) -> CMatrix {
    let p1 = &hp.p1;
    let dim = hp.dim();
    let complement = CMatrix::identity(dim, dim) - p1;
    p1 * &hp.rho * p1 + &complement * &hp.rho * &complement
}

/// The consistency functional and the two probabilities it compares.
#[derive(Debug, Clone, Copy)]
pub struct ConsistencyReport {
    /// Tr P₂[P₁,[ρ,P₁]], real part.
    pub residual: f64,
    /// Imaginary part of the trace; must be numerical noise.
    pub imag: f64,
    /// Tr P₂ρP₂ — without the intervening measurement.
    pub prob_without_p1: f64,
    /// Tr P₂ρ′P₂ — after the Lüders update.
    pub prob_with_p1: f64,
}

/// Evaluate Tr P₂[P₁,[ρ,P₁]] together with both P₂ probabilities.
pub fn consistency_residual(hp: &HistoryProblem) -> Result<ConsistencyReport> {
    let inner = &hp.rho * &hp.p1 - &hp.p1 * &hp.rho;
    let outer = &hp.p1 * &inner - &inner * &hp.p1;
    let tr = (&hp.p2 * outer).trace();
    if tr.im.abs() > MATRIX_TOL {
        return Err(CoreError::Invalid(format!(
            "consistency residual has imaginary part {}",
            tr.im
        )));
    }
    let prob_without = (&hp.p2 * &hp.rho * &hp.p2).trace().re;
    let rho_prime = lueders_update(hp);
    let prob_with = (&hp.p2 * rho_prime * &hp.p2).trace().re;
    Ok(ConsistencyReport {
        residual: tr.re,
        imag: tr.im,
        prob_without_p1: prob_without,
        prob_with_p1: prob_with,
    })
}

/// Random dim×dim density matrix: normalized mixture of random pure states.
pub fn random_density<R: Rng>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    let mut rho = CMatrix::zeros(dim, dim);
    let mut weights = Vec::with_capacity(rank);
    for _ in 0..rank {
        weights.push(rng.random_range(0.01..1.0));
    }
    let wsum: f64 = weights.iter().sum();
    for w in &weights {
        let mut v = DMatrix::from_fn(dim, 1, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        rho += &v * v.adjoint() * Complex64::new(w / wsum, 0.0);
    }
    // Symmetrize away accumulation noise.
    let herm = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = herm.trace().re;
    herm / Complex64::new(tr, 0.0)
}

/// Random rank-r projector from the QR frame of a random complex matrix.
pub fn random_projector<R: Rng>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    let m = DMatrix::from_fn(dim, rank, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let qr = m.qr();
    let q = qr.q();
    &q * q.adjoint()
}

// ── Track-level consistency sweep ────────────────────────────────────────

/// One pure component of the reduced track state: a Gaussian packet
/// envelope in the frame co-moving with the beam. Lengths are measured in
/// units of d_long.
#[derive(Debug, Clone, Copy)]
pub struct TrackComponent {
    pub weight: f64,
    pub center: f64,
    pub sigma: f64,
}

/// Reduced track state for the history check.
#[derive(Debug, Clone)]
pub struct TrackCoherenceState {
    pub components: Vec<TrackComponent>,
    /// When true the grid state is fully decohered (off-diagonal elements
    /// dropped) before the check.
    pub decohere_fully: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct TrackHistoryOptions {
    /// Grid points; capped at 512 for dense matrix work.
    pub grid_n: usize,
    /// Half extent of the co-moving grid, units of d_long.
    pub grid_half_span: f64,
    /// Window half width, units of d_long; must satisfy 2w < min L.
    pub window_half_width: f64,
    /// Effective mass in (d_long, d_long/v) units; scales how much
    /// dispersion accumulates between the two events.
    pub effective_mass: f64,
}

impl Default for TrackHistoryOptions {
    fn default() -> Self {
        TrackHistoryOptions {
            grid_n: 512,
            grid_half_span: 20.0,
            window_half_width: 0.8,
            effective_mass: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrackHistoryPoint {
    pub l_over_dlong: f64,
    pub residual: f64,
    pub prob_without_p1: f64,
    pub prob_with_p1: f64,
}

/// Heisenberg image of the second window under the exact free propagator.
///
/// In the frame co-moving with the beam the second window back-translates
/// onto the first, so only dispersion over the flight time Δt remains:
///
/// ```text
/// ⟨z|U†P₂U|z'⟩ = (m/2πΔt)·e^{im(z−z')(z+z')/2Δt}·2·sin(mw(z−z')/Δt)/(m(z−z')/Δt)
/// ```
///
/// The continuum kernel avoids the revival artifacts a periodic grid
/// propagator would inject at large Δt.
fn evolved_window_kernel(zs: &[f64], dz: f64, w: f64, mass: f64, dt: f64) -> CMatrix {
    let n = zs.len();
    let amp = mass / (std::f64::consts::TAU * dt);
    CMatrix::from_fn(n, n, |i, j| {
        let d = zs[i] - zs[j];
        let s = zs[i] + zs[j];
        let envelope = if d.abs() < 1e-300 {
            2.0 * w
        } else {
            let k = mass * d / dt;
            2.0 * (k * w).sin() / k
        };
        Complex64::from_polar(amp * envelope * dz, mass * d * s / (2.0 * dt))
    })
}

/// Consistency residual of the two-window history as a function of the
/// molecule separation L (units of d_long, beam speed 1).
///
/// The second window is not an exact projector on the grid (it is the
/// sampled continuum kernel), but the identity residual = ΔTr(P₂·) only
/// needs P₁ to be one, so the reported probabilities stay consistent.
pub fn track_history_check(
    state: &TrackCoherenceState,
    opts: &TrackHistoryOptions,
    l_over_dlong: &[f64],
) -> Result<Vec<TrackHistoryPoint>> {
    if opts.grid_n > 512 {
        return Err(CoreError::Resolution(format!(
            "grid_n {} exceeds the dense-matrix cap 512",
            opts.grid_n
        )));
    }
    if opts.grid_n < 16 {
        return Err(CoreError::Resolution("grid_n < 16".into()));
    }
    let n = opts.grid_n;
    let dz = 2.0 * opts.grid_half_span / n as f64;
    if dz > opts.window_half_width {
        return Err(CoreError::Resolution(format!(
            "grid step {dz} cannot resolve window half width {}",
            opts.window_half_width
        )));
    }
    let zs: Vec<f64> = (0..n)
        .map(|i| -opts.grid_half_span + dz * (i as f64 + 0.5))
        .collect();

    // Mixture of normalized discrete packets.
    let mut rho = CMatrix::zeros(n, n);
    let wsum: f64 = state.components.iter().map(|c| c.weight).sum();
    if !(wsum > 0.0) {
        return Err(CoreError::Invalid("track state has no weight".into()));
    }
    for comp in &state.components {
        let mut g = DMatrix::from_fn(n, 1, |i, _| {
            let arg = (zs[i] - comp.center) / (2.0 * comp.sigma);
            Complex64::new((-arg * arg).exp(), 0.0)
        });
        let norm = g.norm();
        g /= Complex64::new(norm, 0.0);
        rho += &g * g.adjoint() * Complex64::new(comp.weight / wsum, 0.0);
    }
    if state.decohere_fully {
        let diag = rho.diagonal();
        rho = CMatrix::from_diagonal(&diag);
    }
    // Exact re-normalization after construction.
    let tr = rho.trace().re;
    rho /= Complex64::new(tr, 0.0);

    let p1 = CMatrix::from_fn(n, n, |i, j| {
        if i == j && zs[i].abs() <= opts.window_half_width {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let complement = CMatrix::identity(n, n) - &p1;
    let rho_prime = &p1 * &rho * &p1 + &complement * &rho * &complement;
    let inner = &rho * &p1 - &p1 * &rho;
    let outer = &p1 * &inner - &inner * &p1;

    let mut out = Vec::with_capacity(l_over_dlong.len());
    for &l in l_over_dlong {
        if l < 2.0 * opts.window_half_width {
            return Err(CoreError::OverlappingWindows);
        }
        let p2h = evolved_window_kernel(&zs, dz, opts.window_half_width, opts.effective_mass, l);
        let residual = (&p2h * &outer).trace();
        if residual.im.abs() > 1e-9 {
            return Err(CoreError::Invalid(format!(
                "track residual has imaginary part {}",
                residual.im
            )));
        }
        out.push(TrackHistoryPoint {
            l_over_dlong: l,
            residual: residual.re,
            prob_without_p1: (&p2h * &rho).trace().re,
            prob_with_p1: (&p2h * &rho_prime).trace().re,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qubit(m: [[f64; 2]; 2]) -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| Complex64::new(m[i][j], 0.0))
    }

    #[test]
    fn lueders_qubit_plus_state() {
        // ρ = |+⟩⟨+|, P₁ = |0⟩⟨0| → ρ′ = ½|0⟩⟨0| + ½|1⟩⟨1|.
        let rho = qubit([[0.5, 0.5], [0.5, 0.5]]);
        let p1 = qubit([[1.0, 0.0], [0.0, 0.0]]);
        let p2 = qubit([[0.0, 0.0], [0.0, 1.0]]);
        let hp = HistoryProblem::new(rho, p1, p2).unwrap();
        let rho_prime = lueders_update(&hp);
        let expect = qubit([[0.5, 0.0], [0.0, 0.5]]);
        assert!((rho_prime - expect).norm() < 1e-14);
    }

    #[test]
    fn identity_projector_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_density(6, 3, &mut rng);
        let id = CMatrix::identity(6, 6);
        let p2 = random_projector(6, 2, &mut rng);
        let hp = HistoryProblem::new(rho.clone(), id, p2).unwrap();
        assert!((lueders_update(&hp) - rho).norm() < 1e-12);
        assert!(consistency_residual(&hp).unwrap().residual.abs() < 1e-12);
    }

    #[test]
    fn commuting_state_gives_zero_residual() {
        // [ρ, P₁] = 0 (both diagonal) → ρ′ = ρ and residual 0.
        let rho = qubit([[0.3, 0.0], [0.0, 0.7]]);
        let p1 = qubit([[1.0, 0.0], [0.0, 0.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p2 = random_projector(2, 1, &mut rng);
        let hp = HistoryProblem::new(rho.clone(), p1, p2).unwrap();
        assert!((lueders_update(&hp) - rho).norm() < 1e-13);
        let rep = consistency_residual(&hp).unwrap();
        assert!(rep.residual.abs() < 1e-13);
        assert!((rep.prob_with_p1 - rep.prob_without_p1).abs() < 1e-13);
    }

    #[test]
    fn commuting_projectors_cannot_disturb() {
        // Tr P₂[P₁,[ρ,P₁]] = Tr([P₂,P₁][ρ,P₁]) vanishes identically for
        // commuting projectors, whatever ρ: diagonal window pairs never
        // show a disturbance.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..16 {
            let rho = random_density(3, 3, &mut rng);
            let p1 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ]));
            let p2 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ]));
            let hp = HistoryProblem::new(rho, p1, p2).unwrap();
            let rep = consistency_residual(&hp).unwrap();
            assert!(rep.residual.abs() < 1e-13);
        }
    }

    #[test]
    fn residual_equals_probability_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let dim = rng.random_range(2..9);
            let rho = random_density(dim, dim, &mut rng);
            let p1 = random_projector(dim, rng.random_range(1..dim), &mut rng);
            let p2 = random_projector(dim, rng.random_range(1..dim), &mut rng);
            let hp = HistoryProblem::new(rho, p1, p2).unwrap();
            let rep = consistency_residual(&hp).unwrap();
            let diff = rep.prob_with_p1 - rep.prob_without_p1;
            assert!(
                (rep.residual - diff).abs() < 1e-12,
                "residual {} vs probability difference {}",
                rep.residual,
                diff
            );
        }
    }

    #[test]
    fn residual_is_bilinear_in_rho() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let dim = 5;
        let rho_a = random_density(dim, 2, &mut rng);
        let rho_b = random_density(dim, 4, &mut rng);
        let p1 = random_projector(dim, 2, &mut rng);
        let p2 = random_projector(dim, 3, &mut rng);
        let lam = 0.37;
        let mixed = &rho_a * Complex64::new(lam, 0.0) + &rho_b * Complex64::new(1.0 - lam, 0.0);
        let r = |rho: &CMatrix| {
            consistency_residual(&HistoryProblem::new(rho.clone(), p1.clone(), p2.clone()).unwrap())
                .unwrap()
                .residual
        };
        let lhs = r(&mixed);
        let rhs = lam * r(&rho_a) + (1.0 - lam) * r(&rho_b);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn trivial_projectors_give_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dim = 4;
        let rho = random_density(dim, 3, &mut rng);
        let p2 = random_projector(dim, 2, &mut rng);
        for p1 in [CMatrix::zeros(dim, dim), CMatrix::identity(dim, dim)] {
            let hp = HistoryProblem::new(rho.clone(), p1, p2.clone()).unwrap();
            assert!(consistency_residual(&hp).unwrap().residual.abs() < 1e-13);
        }
    }

    #[test]
    fn lueders_preserves_trace_and_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..32 {
            let dim = rng.random_range(2..8);
            let rho = random_density(dim, dim, &mut rng);
            let p1 = random_projector(dim, rng.random_range(1..dim), &mut rng);
            let p2 = random_projector(dim, 1, &mut rng);
            let hp = HistoryProblem::new(rho, p1, p2).unwrap();
            let rho_prime = lueders_update(&hp);
            assert!((rho_prime.trace().re - 1.0).abs() < 1e-12);
            let eig = rho_prime.symmetric_eigen();
            let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
            assert!(min >= -1e-10);
        }
    }

    #[test]
    fn invalid_inputs_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(3, 2, &mut rng);
        let not_projector = &random_projector(3, 1, &mut rng) * Complex64::new(0.5, 0.0);
        let p2 = random_projector(3, 1, &mut rng);
        assert!(matches!(
            HistoryProblem::new(rho.clone(), not_projector, p2.clone()),
            Err(CoreError::InvalidProjector(_))
        ));
        let unnormalized = &rho * Complex64::new(2.0, 0.0);
        let p1 = random_projector(3, 1, &mut rng);
        assert!(matches!(
            HistoryProblem::new(unnormalized, p1, p2),
            Err(CoreError::InvalidDensityMatrix(_))
        ));
    }

    fn default_track_state() -> TrackCoherenceState {
        TrackCoherenceState {
            components: (0..5)
                .map(|i| TrackComponent {
                    weight: 1.0,
                    center: -8.0 + 4.0 * i as f64,
                    sigma: 2.5,
                })
                .collect(),
            decohere_fully: false,
        }
    }

    #[test]
    fn track_residual_decays_with_separation() {
        let opts = TrackHistoryOptions::default();
        let ls: Vec<f64> = vec![2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
        let pts = track_history_check(&default_track_state(), &opts, &ls).unwrap();
        for w in pts.windows(2) {
            assert!(
                w[1].residual.abs() <= w[0].residual.abs() * 1.05 + 1e-14,
                "residual grew from {} (L={}) to {} (L={})",
                w[0].residual,
                w[0].l_over_dlong,
                w[1].residual,
                w[1].l_over_dlong
            );
        }
        // The long mean-free-path end is an order of magnitude more
        // consistent than the short one.
        assert!(pts.last().unwrap().residual.abs() < 0.2 * pts[0].residual.abs().max(1e-300));
    }

    #[test]
    fn track_overlapping_windows_rejected() {
        let opts = TrackHistoryOptions::default();
        let err = track_history_check(&default_track_state(), &opts, &[1.0]);
        assert!(matches!(err, Err(CoreError::OverlappingWindows)));
    }

    #[test]
    fn track_decohered_state_is_consistent_at_all_separations() {
        let mut state = default_track_state();
        state.decohere_fully = true;
        let opts = TrackHistoryOptions::default();
        let pts = track_history_check(&state, &opts, &[2.0, 10.0, 100.0]).unwrap();
        for p in pts {
            assert!(p.residual.abs() < 1e-12, "L={} residual={}", p.l_over_dlong, p.residual);
        }
    }
}
