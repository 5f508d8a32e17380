//! Local-hidden-variable models, CHSH evaluation and a quantum oracle.
//!
//! An LHV model assigns each particle pair hidden values (λ₁, λ₂) with a
//! joint density ρ, and each detector a response probability w(λ; a, ±1).
//! Whatever the density and responses, the CHSH combination of joint
//! correlations stays within ±2; the 4×4 quantum oracle shows the singlet
//! reaching 2√2 at the standard settings.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::exec;

/// Apparatus orientation: a unit vector.
#[derive(Debug, Clone, Copy)]
pub struct Setting {
    v: [f64; 3],
}

impl Setting {
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(CoreError::Invalid(format!("setting norm {norm} != 1")));
        }
        Ok(Setting { v })
    }

    /// Unit vector in the x–z plane at angle θ from the z axis.
    pub fn from_angle_deg(theta_deg: f64) -> Self {
        let t = theta_deg.to_radians();
        Setting {
            v: [t.sin(), 0.0, t.cos()],
        }
    }

    pub fn x(&self) -> f64 {
        self.v[0]
    }
    pub fn y(&self) -> f64 {
        self.v[1]
    }
    pub fn z(&self) -> f64 {
        self.v[2]
    }

    pub fn dot(&self, other: &Setting) -> f64 {
        self.v[0] * other.v[0] + self.v[1] * other.v[1] + self.v[2] * other.v[2]
    }

    fn random<R: Rng>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 3] = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            if n2 > 0.04 && n2 <= 1.0 {
                let n = n2.sqrt();
                return Setting {
                    v: [v[0] / n, v[1] / n, v[2] / n],
                };
            }
        }
    }
}

/// Detector response: probability of the +1 outcome given the hidden value
/// and the setting. Must land in [0, 1]; the −1 probability is 1 − w₊.
pub trait Response: Send + Sync {
    fn prob_plus(&self, lambda: f64, setting: &Setting) -> f64;
}

/// w ≡ ½: completely undecided detector.
pub struct UniformHalf;

impl Response for UniformHalf {
    fn prob_plus(&self, _lambda: f64, _setting: &Setting) -> f64 {
        0.5
    }
}

/// Deterministic readout of sign(λ·a_z).
pub struct DeterministicSign;

impl Response for DeterministicSign {
    fn prob_plus(&self, lambda: f64, setting: &Setting) -> f64 {
        if lambda * setting.z() > 0.0 {
            1.0
        } else if lambda * setting.z() < 0.0 {
            0.0
        } else {
            0.5
        }
    }
}

/// Constant-in-λ deterministic response: +1 exactly when a_z > 0.
pub struct ConstantIndicator;

impl Response for ConstantIndicator {
    fn prob_plus(&self, _lambda: f64, setting: &Setting) -> f64 {
        if setting.z() > 0.0 {
            1.0
        } else {
            0.0
        }
    }
}

/// Clipped smooth random field over (λ, a); any such response is a valid
/// LHV ingredient.
pub struct SmoothRandom {
    c: [f64; 5],
    omega: f64,
    phase: f64,
}

impl SmoothRandom {
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        let mut c = [0.0; 5];
        for ci in &mut c {
            *ci = rng.random_range(-0.6..0.6);
        }
        SmoothRandom {
            c,
            omega: rng.random_range(0.5..4.0),
            phase: rng.random_range(0.0..std::f64::consts::TAU),
        }
    }
}

impl Response for SmoothRandom {
    fn prob_plus(&self, lambda: f64, a: &Setting) -> f64 {
        let raw = 0.5
            + self.c[0] * lambda * a.z()
            + self.c[1] * (self.omega * lambda + self.phase).sin() * a.x()
            + self.c[2] * lambda * lambda * a.y()
            + self.c[3] * (lambda * a.z()).cos() * self.c[4];
        raw.clamp(0.0, 1.0)
    }
}

/// Discretized local-hidden-variable model: atoms for λ₁ and λ₂, a joint
/// density on their product, and a response shared by both wings.
pub struct LHVModel {
    lambda1: Vec<f64>,
    lambda2: Vec<f64>,
    /// Row-major joint weights, len = |λ₁|·|λ₂|.
    rho: Vec<f64>,
    response: Box<dyn Response>,
}

impl LHVModel {
    pub fn new(
        lambda1: Vec<f64>,
        lambda2: Vec<f64>,
        rho: Vec<f64>,
        response: Box<dyn Response>,
    ) -> Result<Self> {
        if rho.len() != lambda1.len() * lambda2.len() || lambda1.is_empty() || lambda2.is_empty() {
            return Err(CoreError::InvalidModel("density size mismatch".into()));
        }
        if rho.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(CoreError::InvalidModel("negative density".into()));
        }
        Ok(LHVModel {
            lambda1,
            lambda2,
            rho,
            response,
        })
    }

    fn check_normalized(&self) -> Result<()> {
        let sum: f64 = self.rho.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CoreError::InvalidModel(format!("density sums to {sum}")));
        }
        Ok(())
    }

    /// Normalize the joint density in place.
    pub fn normalized(mut self) -> Self {
        let sum: f64 = self.rho.iter().sum();
        for w in &mut self.rho {
            *w /= sum;
        }
        self
    }

    /// Uniform grid over [−1, 1]² with the given response.
    pub fn uniform_grid(n: usize, response: Box<dyn Response>) -> Self {
        let lambdas: Vec<f64> = (0..n)
            .map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / n as f64)
            .collect();
        let rho = vec![1.0 / (n * n) as f64; n * n];
        LHVModel {
            lambda1: lambdas.clone(),
            lambda2: lambdas,
            rho,
            response,
        }
    }

    /// λ₁ = −λ₂ = ±1 equiprobable with deterministic sign readout.
    pub fn two_point_anticorrelated() -> Self {
        LHVModel {
            lambda1: vec![1.0, -1.0],
            lambda2: vec![1.0, -1.0],
            // pairs: (+1,−1) and (−1,+1) at ½ each
            rho: vec![0.0, 0.5, 0.5, 0.0],
            response: Box::new(DeterministicSign),
        }
    }

    /// λ₁ = λ₂ = ±1 equiprobable with deterministic sign readout.
    pub fn two_point_correlated() -> Self {
        LHVModel {
            lambda1: vec![1.0, -1.0],
            lambda2: vec![1.0, -1.0],
            rho: vec![0.5, 0.0, 0.0, 0.5],
            response: Box::new(DeterministicSign),
        }
    }

    /// Random model: density from normalized non-negative noise, responses
    /// from a clipped smooth random field.
    pub fn random(grid_n: usize, rng: &mut ChaCha8Rng) -> Self {
        let lambdas: Vec<f64> = (0..grid_n)
            .map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / grid_n as f64)
            .collect();
        let mut rho: Vec<f64> = (0..grid_n * grid_n)
            .map(|_| {
                let u: f64 = rng.random_range(0.0..1.0);
                u * u + 0.01
            })
            .collect();
        let sum: f64 = rho.iter().sum();
        for w in &mut rho {
            *w /= sum;
        }
        LHVModel {
            lambda1: lambdas.clone(),
            lambda2: lambdas,
            rho,
            response: Box::new(SmoothRandom::sample(rng)),
        }
    }

    fn w(&self, lambda: f64, setting: &Setting, outcome: i8) -> f64 {
        let plus = self.response.prob_plus(lambda, setting);
        if outcome > 0 {
            plus
        } else {
            1.0 - plus
        }
    }

    /// Single-site mean ⟨a; λ⟩ = w(λ; a, +) − w(λ; a, −).
    fn site_mean(&self, lambda: f64, setting: &Setting) -> f64 {
        2.0 * self.response.prob_plus(lambda, setting) - 1.0
    }
}

/// Joint probability W(a, α; b, β) over the discretized hidden variables.
pub fn joint_probability(
    m: &LHVModel,
    a: &Setting,
    alpha: i8,
    b: &Setting,
    beta: i8,
) -> Result<f64> {
    m.check_normalized()?;
    let n2 = m.lambda2.len();
    let mut total = 0.0;
    for (i, &l1) in m.lambda1.iter().enumerate() {
        let wa = m.w(l1, a, alpha);
        if wa == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for (j, &l2) in m.lambda2.iter().enumerate() {
            row += m.rho[i * n2 + j] * m.w(l2, b, beta);
        }
        total += wa * row;
    }
    Ok(total)
}

/// Two-wing correlation ⟨a; b⟩ via single-site means.
pub fn correlation(m: &LHVModel, a: &Setting, b: &Setting) -> Result<f64> {
    m.check_normalized()?;
    let n2 = m.lambda2.len();
    let mb: Vec<f64> = m.lambda2.iter().map(|&l| m.site_mean(l, b)).collect();
    let mut total = 0.0;
    for (i, &l1) in m.lambda1.iter().enumerate() {
        let ma = m.site_mean(l1, a);
        let mut row = 0.0;
        for (j, mbv) in mb.iter().enumerate() {
            row += m.rho[i * n2 + j] * mbv;
        }
        total += ma * row;
    }
    Ok(total)
}

/// CHSH combination and its four correlations.
#[derive(Debug, Clone, Copy)]
pub struct ChshResult {
    pub s: f64,
    pub corr_ab: f64,
    pub corr_ab_prime: f64,
    pub corr_a_prime_b: f64,
    pub corr_a_prime_b_prime: f64,
}

/// S = |⟨a;b⟩ + ⟨a;b′⟩ + ⟨a′;b⟩ − ⟨a′;b′⟩|.
pub fn chsh(
    m: &LHVModel,
    a: &Setting,
    a_prime: &Setting,
    b: &Setting,
    b_prime: &Setting,
) -> Result<ChshResult> {
    let corr_ab = correlation(m, a, b)?;
    let corr_ab_prime = correlation(m, a, b_prime)?;
    let corr_a_prime_b = correlation(m, a_prime, b)?;
    let corr_a_prime_b_prime = correlation(m, a_prime, b_prime)?;
    Ok(ChshResult {
        s: (corr_ab + corr_ab_prime + corr_a_prime_b - corr_a_prime_b_prime).abs(),
        corr_ab,
        corr_ab_prime,
        corr_a_prime_b,
        corr_a_prime_b_prime,
    })
}

/// Max CHSH value over random LHV models and random settings. The λ-sums
/// are exact on the discrete atoms, so the model class satisfies S ≤ 2 up
/// to floating-point roundoff (reported as `eps`).
pub struct SweepResult {
    pub max_s: f64,
    pub eps: f64,
    pub models: usize,
}

/// One CHSH draw: random model, random settings.
fn random_chsh_draw(seed: u64, index: usize, grid_n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index as u64 + 1)));
    let m = LHVModel::random(grid_n, &mut rng);
    let a = Setting::random(&mut rng);
    let ap = Setting::random(&mut rng);
    let b = Setting::random(&mut rng);
    let bp = Setting::random(&mut rng);
    chsh(&m, &a, &ap, &b, &bp).expect("random model is normalized").s
}

/// Sweep `n_models` random LHV models (data-parallel).
pub fn chsh_random_sweep(n_models: usize, grid_n: usize, seed: u64) -> SweepResult {
    let values = exec::map_indexed(n_models, |i| random_chsh_draw(seed, i, grid_n));
    let max_s = values.iter().cloned().fold(0.0, f64::max);
    SweepResult {
        max_s,
        eps: 1e-12,
        models: n_models,
    }
}

// ── Quantum oracle ───────────────────────────────────────────────────────

type CMatrix = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// a·σ for a unit vector a.
fn pauli_dot(a: &Setting) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c(a.z(), 0.0),
            c(a.x(), -a.y()),
            c(a.x(), a.y()),
            c(-a.z(), 0.0),
        ],
    )
}

fn check_two_qubit_state(rho: &CMatrix) -> Result<()> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(CoreError::InvalidDensityMatrix("state must be 4×4".into()));
    }
    if (rho - rho.adjoint()).norm() > 1e-10 {
        return Err(CoreError::InvalidDensityMatrix("not Hermitian".into()));
    }
    if (rho.trace().re - 1.0).abs() > 1e-10 {
        return Err(CoreError::InvalidDensityMatrix("trace != 1".into()));
    }
    let eig = rho.clone().symmetric_eigen();
    if eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min) < -1e-10 {
        return Err(CoreError::InvalidDensityMatrix("not positive".into()));
    }
    Ok(())
}

/// Tr(ρ (a·σ)⊗(b·σ)) by direct 4×4 linear algebra.
pub fn quantum_correlation(rho: &CMatrix, a: &Setting, b: &Setting) -> Result<f64> {
    check_two_qubit_state(rho)?;
    let op = pauli_dot(a).kronecker(&pauli_dot(b));
    let tr = (rho * op).trace();
    if tr.im.abs() > 1e-10 {
        return Err(CoreError::Invalid(format!(
            "correlation has imaginary part {}",
            tr.im
        )));
    }
    Ok(tr.re)
}

/// Quantum CHSH with the same combination as the LHV evaluator.
pub fn chsh_quantum(
    rho: &CMatrix,
    a: &Setting,
    a_prime: &Setting,
    b: &Setting,
    b_prime: &Setting,
) -> Result<f64> {
    let e = |x: &Setting, y: &Setting| quantum_correlation(rho, x, y);
    Ok((e(a, b)? + e(a, b_prime)? + e(a_prime, b)? - e(a_prime, b_prime)?).abs())
}

/// Singlet state (|01⟩ − |10⟩)/√2.
pub fn singlet() -> CMatrix {
    let mut psi = DMatrix::zeros(4, 1);
    psi[(1, 0)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[(2, 0)] = c(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
    &psi * psi.adjoint()
}

/// Product state |0⟩⟨0| ⊗ |0⟩⟨0|.
pub fn product_zz() -> CMatrix {
    let mut rho = DMatrix::zeros(4, 4);
    rho[(0, 0)] = c(1.0, 0.0);
    rho
}

/// Maximally mixed two-qubit state.
pub fn maximally_mixed() -> CMatrix {
    CMatrix::identity(4, 4) * c(0.25, 0.0)
}

/// Planar settings maximizing the singlet CHSH for the combination
/// ⟨a;b⟩+⟨a;b′⟩+⟨a′;b⟩−⟨a′;b′⟩: angles 0°, 90°, 45°, −45° from z.
pub fn standard_angles() -> (Setting, Setting, Setting, Setting) {
    (
        Setting::from_angle_deg(0.0),
        Setting::from_angle_deg(90.0),
        Setting::from_angle_deg(45.0),
        Setting::from_angle_deg(-45.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn uniform_response_gives_quarter_probabilities() {
        let m = LHVModel::uniform_grid(16, Box::new(UniformHalf));
        let a = Setting::from_angle_deg(10.0);
        let b = Setting::from_angle_deg(70.0);
        for alpha in [1i8, -1] {
            for beta in [1i8, -1] {
                let w = joint_probability(&m, &a, alpha, &b, beta).unwrap();
                assert!((w - 0.25).abs() < TOL);
            }
        }
        assert!(correlation(&m, &a, &b).unwrap().abs() < TOL);
    }

    #[test]
    fn constant_deterministic_model_factorizes() {
        let m = LHVModel::uniform_grid(8, Box::new(ConstantIndicator));
        let up = Setting::from_angle_deg(0.0);
        let down = Setting::from_angle_deg(180.0);
        assert!((joint_probability(&m, &up, 1, &down, -1).unwrap() - 1.0).abs() < TOL);
        assert!(joint_probability(&m, &up, -1, &down, -1).unwrap().abs() < TOL);
    }

    #[test]
    fn anticorrelated_two_point_model() {
        let m = LHVModel::two_point_anticorrelated();
        let a = Setting::from_angle_deg(30.0);
        assert!(joint_probability(&m, &a, 1, &a, 1).unwrap().abs() < TOL);
        assert!((correlation(&m, &a, &a).unwrap() + 1.0).abs() < TOL);
        let c = LHVModel::two_point_correlated();
        assert!((correlation(&c, &a, &a).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn correlation_matches_four_term_combination() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..20 {
            let m = LHVModel::random(24, &mut rng);
            let a = Setting::random(&mut rng);
            let b = Setting::random(&mut rng);
            let corr = correlation(&m, &a, &b).unwrap();
            let mut four = 0.0;
            for alpha in [1i8, -1] {
                for beta in [1i8, -1] {
                    let sign = (alpha * beta) as f64;
                    four += sign * joint_probability(&m, &a, alpha, &b, beta).unwrap();
                }
            }
            assert!((corr - four).abs() < TOL, "corr {corr} vs four-term {four}");
        }
    }

    #[test]
    fn outcomes_complete_and_no_signalling() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let m = LHVModel::random(16, &mut rng);
            let a = Setting::random(&mut rng);
            let b = Setting::random(&mut rng);
            let b2 = Setting::random(&mut rng);
            let total: f64 = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
                .iter()
                .map(|&(al, be)| joint_probability(&m, &a, al, &b, be).unwrap())
                .sum();
            assert!((total - 1.0).abs() < TOL);
            // Alice's marginal cannot depend on Bob's setting.
            for alpha in [1i8, -1] {
                let m1: f64 = joint_probability(&m, &a, alpha, &b, 1).unwrap()
                    + joint_probability(&m, &a, alpha, &b, -1).unwrap();
                let m2: f64 = joint_probability(&m, &a, alpha, &b2, 1).unwrap()
                    + joint_probability(&m, &a, alpha, &b2, -1).unwrap();
                assert!((m1 - m2).abs() < TOL);
            }
        }
    }

    #[test]
    fn chsh_bounded_for_random_models() {
        let sweep = chsh_random_sweep(1000, 16, 2024);
        assert!(
            sweep.max_s <= 2.0 + sweep.eps,
            "LHV model violated CHSH: {}",
            sweep.max_s
        );
        // The deterministic family can reach the bound.
        let m = LHVModel::two_point_correlated();
        let a = Setting::from_angle_deg(0.0);
        let r = chsh(&m, &a, &a, &a, &a).unwrap();
        assert!((r.s - 2.0).abs() < TOL);
    }

    #[test]
    fn degenerate_settings_collapse_to_twice_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = LHVModel::random(16, &mut rng);
        let a = Setting::random(&mut rng);
        let b = Setting::random(&mut rng);
        let r = chsh(&m, &a, &a, &b, &b).unwrap();
        assert!((r.s - 2.0 * r.corr_ab.abs()).abs() < TOL);
    }

    #[test]
    fn unnormalized_density_rejected() {
        let m = LHVModel::new(
            vec![1.0, -1.0],
            vec![1.0, -1.0],
            vec![0.5, 0.5, 0.5, 0.5],
            Box::new(UniformHalf),
        )
        .unwrap();
        let a = Setting::from_angle_deg(0.0);
        assert!(matches!(
            joint_probability(&m, &a, 1, &a, 1),
            Err(CoreError::InvalidModel(_))
        ));
        let ok = m.normalized();
        assert!(joint_probability(&ok, &a, 1, &a, 1).is_ok());
    }

    #[test]
    fn singlet_quantum_oracle() {
        let rho = singlet();
        let a = Setting::from_angle_deg(33.0);
        assert!((quantum_correlation(&rho, &a, &a).unwrap() + 1.0).abs() < TOL);
        // ⟨a·σ ⊗ b·σ⟩ = −a·b for the singlet.
        let b = Setting::from_angle_deg(71.0);
        let got = quantum_correlation(&rho, &a, &b).unwrap();
        assert!((got + a.dot(&b)).abs() < TOL);
    }

    #[test]
    fn singlet_reaches_two_sqrt_two() {
        let (a, ap, b, bp) = standard_angles();
        let s = chsh_quantum(&singlet(), &a, &ap, &b, &bp).unwrap();
        assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12, "S = {s}");
    }

    #[test]
    fn mixed_and_product_states() {
        let a = Setting::from_angle_deg(12.0);
        let b = Setting::from_angle_deg(-57.0);
        assert!(quantum_correlation(&maximally_mixed(), &a, &b).unwrap().abs() < TOL);
        let z = Setting::from_angle_deg(0.0);
        assert!((quantum_correlation(&product_zz(), &z, &z).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn invalid_quantum_state_rejected() {
        let bad = CMatrix::identity(4, 4);
        let a = Setting::from_angle_deg(0.0);
        assert!(quantum_correlation(&bad, &a, &a).is_err());
    }
}
