//! Exact algebra of one-dimensional Gaussian statistical matrices.
//!
//! The same mixed state admits two very different decompositions: a mixture
//! of momentum-sharp packets (parameters α, β, γ) and a mixture of
//! position-sharp packets (parameters α′, β′). Both integrate to a kernel
//! of the canonical form
//!
//! ```text
//! ρ(x, x') = N · exp[ −cs·s² − cd·(x−x')² + i·p̂·(x−x') ],   s = (x+x')/2
//! ```
//!
//! with unit trace (N = sqrt(cs/π)). Starting from the momentum mixture,
//! the p̄- and x̄-integrals give
//!
//! ```text
//! cs = 1/(2α+γ),   cd = 1/(2β′),   1/β′ = 1/β + 1/(2γ);
//! ```
//!
//! starting from the position mixture of packets exp[−(x−x̄)²/β′ + ip̂x]
//! weighted by exp[−x̄²/(2α′)],
//!
//! ```text
//! cs = 1/(2α′ + β′/2),   cd = 1/(2β′).
//! ```
//!
//! The two states coincide exactly when 2α+γ = 2α′+β′/2. Closed-form
//! coefficients are primary; grid sampling is the independent check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{CoreError, Result};
use crate::physconst::UnitSystem;

/// Canonical Gaussian kernel, normalized to unit trace.
#[derive(Debug, Clone, Copy)]
pub struct GaussianKernel {
    /// Coefficient of s² = ((x+x')/2)², cm⁻².
    pub cs: f64,
    /// Coefficient of (x−x')², cm⁻².
    pub cd: f64,
    /// Mean momentum, enters as a pure phase in (x−x').
    pub p_hat: f64,
    /// Trace normalization sqrt(cs/π).
    pub norm: f64,
}

impl GaussianKernel {
    fn from_coeffs(cs: f64, cd: f64, p_hat: f64) -> Self {
        GaussianKernel {
            cs,
            cd,
            p_hat,
            norm: (cs / std::f64::consts::PI).sqrt(),
        }
    }

    pub fn eval(&self, x: f64, xp: f64) -> Complex64 {
        let s = 0.5 * (x + xp);
        let d = x - xp;
        let mag = self.norm * (-self.cs * s * s - self.cd * d * d).exp();
        mag * Complex64::new(0.0, self.p_hat * d).exp()
    }

    /// Tr ρ² in closed form: (1/2)·sqrt(cs/cd).
    pub fn purity(&self) -> f64 {
        0.5 * (self.cs / self.cd).sqrt()
    }

    /// Variance of the position density ρ(x, x).
    pub fn position_variance(&self) -> f64 {
        1.0 / (2.0 * self.cs)
    }

    /// Off-diagonal 1/e decay length in (x−x'): the effective coherence
    /// length of the state.
    pub fn coherence_length(&self) -> f64 {
        1.0 / self.cd.sqrt()
    }

    /// Sample the kernel on a grid.
    pub fn sample(&self, xs: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(xs.len(), xs.len(), |i, j| self.eval(xs[i], xs[j]))
    }

    /// Trace of the grid-sampled kernel (midpoint rule).
    pub fn sampled_trace(&self, xs: &[f64]) -> f64 {
        let dx = xs[1] - xs[0];
        xs.iter().map(|&x| self.eval(x, x).re).sum::<f64>() * dx
    }
}

/// The two decompositions of the appendix family.
#[derive(Debug, Clone, Copy)]
pub enum GaussianEnsemble {
    /// Momentum-sharp packets e^{−(x−x̄)²/(2γ)+ip̄x} mixed over x̄ and p̄
    /// with weight e^{−x̄²/(2α) − β(p̄−p̂)²/2}.
    MomentumMixture { alpha: f64, beta: f64, gamma: f64, p_hat: f64 },
    /// Position-sharp packets e^{−(x−x̄)²/β′+ip̂x} mixed over x̄ with
    /// weight e^{−x̄²/(2α′)}.
    PositionMixture { alpha_prime: f64, beta_prime: f64, p_hat: f64 },
}

impl GaussianEnsemble {
    fn validate(&self) -> Result<()> {
        let params: Vec<(&'static str, f64)> = match *self {
            GaussianEnsemble::MomentumMixture { alpha, beta, gamma, .. } => {
                vec![("alpha", alpha), ("beta", beta), ("gamma", gamma)]
            }
            GaussianEnsemble::PositionMixture { alpha_prime, beta_prime, .. } => {
                vec![("alpha'", alpha_prime), ("beta'", beta_prime)]
            }
        };
        for (name, v) in params {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::non_positive(name, v));
            }
        }
        Ok(())
    }

    /// β′ of the state: derived for the momentum mixture, stored for the
    /// position mixture.
    pub fn beta_prime(&self) -> f64 {
        match *self {
            GaussianEnsemble::MomentumMixture { beta, gamma, .. } => {
                1.0 / (1.0 / beta + 1.0 / (2.0 * gamma))
            }
            GaussianEnsemble::PositionMixture { beta_prime, .. } => beta_prime,
        }
    }

    pub fn kernel(&self) -> Result<GaussianKernel> {
        self.validate()?;
        Ok(match *self {
            GaussianEnsemble::MomentumMixture { alpha, gamma, p_hat, .. } => {
                GaussianKernel::from_coeffs(
                    1.0 / (2.0 * alpha + gamma),
                    1.0 / (2.0 * self.beta_prime()),
                    p_hat,
                )
            }
            GaussianEnsemble::PositionMixture { alpha_prime, beta_prime, p_hat } => {
                GaussianKernel::from_coeffs(
                    1.0 / (2.0 * alpha_prime + 0.5 * beta_prime),
                    1.0 / (2.0 * beta_prime),
                    p_hat,
                )
            }
        })
    }
}

/// Kernel of the momentum-packet mixture ρ₁.
pub fn build_rho1(alpha: f64, beta: f64, gamma: f64, p_hat: f64) -> Result<GaussianKernel> {
    GaussianEnsemble::MomentumMixture { alpha, beta, gamma, p_hat }.kernel()
}

/// Kernel of the position-packet mixture ρ₂.
pub fn build_rho2(alpha_prime: f64, beta_prime: f64, p_hat: f64) -> Result<GaussianKernel> {
    GaussianEnsemble::PositionMixture { alpha_prime, beta_prime, p_hat }.kernel()
}

/// The (α′, β′) that make the position mixture reproduce the momentum
/// mixture exactly: 1/β′ = 1/β + 1/(2γ) and 2α+γ = 2α′+β′/2.
pub fn matched_position_mixture(alpha: f64, beta: f64, gamma: f64) -> (f64, f64) {
    let beta_prime = 1.0 / (1.0 / beta + 1.0 / (2.0 * gamma));
    let alpha_prime = 0.5 * (2.0 * alpha + gamma - 0.5 * beta_prime);
    (alpha_prime, beta_prime)
}

/// Outcome of the state-equality check.
#[derive(Debug, Clone, Copy)]
pub struct EqualityCheck {
    pub equal: bool,
    /// Max relative coefficient discrepancy across (cs, cd, p̂).
    pub residual: f64,
}

const EQUALITY_TOL: f64 = 1e-10;

/// Compare two ensembles through their normalized kernel coefficients.
pub fn equality_check(e1: &GaussianEnsemble, e2: &GaussianEnsemble) -> Result<EqualityCheck> {
    let k1 = e1.kernel()?;
    let k2 = e2.kernel()?;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    let p_scale = k1.cd.sqrt().max(k2.cd.sqrt());
    let residual = rel(k1.cs, k2.cs)
        .max(rel(k1.cd, k2.cd))
        .max((k1.p_hat - k2.p_hat).abs() / p_scale);
    Ok(EqualityCheck {
        equal: residual <= EQUALITY_TOL,
        residual,
    })
}

/// Max pointwise kernel discrepancy over sampled (x, x′) pairs, relative to
/// the peak value. The independent verification path for [`equality_check`].
pub fn sampled_discrepancy<R: Rng>(
    k1: &GaussianKernel,
    k2: &GaussianKernel,
    pairs: usize,
    rng: &mut R,
) -> f64 {
    let span = 3.0 / (2.0 * k1.cs.min(k2.cs)).sqrt();
    let peak = k1.eval(0.0, 0.0).norm().max(k2.eval(0.0, 0.0).norm());
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let x = rng.random_range(-span..span);
        let xp = rng.random_range(-span..span);
        worst = worst.max((k1.eval(x, xp) - k2.eval(x, xp)).norm() / peak);
    }
    worst
}

/// Thermal repackaging report.
#[derive(Debug, Clone, Copy)]
pub struct BoltzmannReport {
    /// Packet extension a = sqrt(β′/2) in the sharp-momentum limit, cm.
    pub a_cm: f64,
    /// β = 1/(m·kB·T): the Boltzmann momentum-prior width, cm².
    pub beta: f64,
    /// β′ at the finite pure-component width γ used for the demonstration.
    pub beta_prime_finite_gamma: f64,
    /// Matched α′ for that finite-γ instance.
    pub alpha_prime: f64,
    /// Relative departure of the finite-γ β′ from the limit β.
    pub finite_gamma_residual: f64,
}

/// Instantiate the appendix machinery with thermal parameters.
///
/// The Boltzmann distribution of momenta maps onto the p̄-prior through
/// β = 1/(m·kB·T). In the sharp-momentum limit (γ → ∞) the effective
/// packet width of the position decomposition is β′ = β, so the packet
/// extension is a = sqrt(β/2) = (2·m·kB·T)^(−1/2).
pub fn boltzmann_repackaging(us: &UnitSystem, mass_ev: f64, temperature_k: f64) -> Result<BoltzmannReport> {
    if !(mass_ev > 0.0) {
        return Err(CoreError::non_positive("mass", mass_ev));
    }
    if !(temperature_k > 0.0) {
        return Err(CoreError::non_positive("temperature", temperature_k));
    }
    let m = us.mass_ev_to_natural(mass_ev);
    let kbt = us.thermal_energy(temperature_k);
    let beta = 1.0 / (m * kbt);
    // Demonstration instance: pure components 10³× sharper in momentum
    // than the thermal spread, vessel scale α = 10⁶·γ.
    let gamma = 1.0e6 * beta;
    let alpha = 1.0e6 * gamma;
    let (alpha_prime, beta_prime) = matched_position_mixture(alpha, beta, gamma);
    Ok(BoltzmannReport {
        a_cm: (beta / 2.0).sqrt(),
        beta,
        beta_prime_finite_gamma: beta_prime,
        alpha_prime,
        finite_gamma_residual: (beta - beta_prime).abs() / beta,
    })
}
