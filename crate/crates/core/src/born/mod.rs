//! First-order ionization: matrix element, gapped profile, finite-time
//! amplitude and golden-rule rate.
//!
//! # Conventions
//!
//! Momentum eigenfunctions are ⟨x|p⟩ = (2π)^(−3/2) e^(ip·x). The ejected
//! electron is treated in the plane-wave (first Born) approximation, so the
//! bound→continuum matrix element is the hydrogenic 1s momentum transform
//!
//! ```text
//! ⟨q|e^{ik·ξ}|φ₀⟩ = φ̃₀(q − k),   φ̃₀(p) = (2√2/π)·a^{3/2}/(1 + a²p²)²,
//! ```
//!
//! normalized to ∫|φ̃₀|² d³p = 1. This is an approximation to the Coulomb
//! continuum state; it keeps the momentum-transfer structure that controls
//! localization while staying verifiable against closed forms.
//!
//! The printed matrix element keeps the loose normalization,
//!
//! ```text
//! M(dp, q) = (2π)³ · (2e²/|dp|²) · φ̃₀(q − dp) · e^{i dp·X},   dp = p − p₁,
//! ```
//!
//! i.e. the momentum lost by the α-particle is transferred to the electron
//! and the target position X enters only as a phase. The properly
//! normalized interaction matrix element used in every probability is
//!
//! ```text
//! ⟨p₁ q₁|V|p φ₀⟩ = [4π/(2π)⁶] · M(dp, q),
//! ```
//!
//! which follows from V = 2e²/|x−X−ξ'| with the Fourier kernel
//! 1/r = ∫ d³k/(2π)³ (4π/k²) e^{ik·r} and the basis convention above. All
//! 2π bookkeeping lives in this one place.
//!
//! First order in V, with E = p²/2m_α − |E0| and E₁ = p₁²/2m_α + q₁²/2m_e:
//!
//! ```text
//! ψ̂₊(p₁,q₁,t₁) = −i ∫₀^{t₁} dt ∫ d³p ⟨p₁q₁|V|pφ₀⟩ ψ₀(p) e^{i(E₁−E)t};
//! ```
//!
//! the t-integral is analytic per node, (e^{iΔE t₁} − 1)/(iΔE).

mod amplitude;
mod gapped;
mod rate;

pub use amplitude::{
    first_order_amplitude, ionization_probability, sigma_from_saturation, CylQuadBudget,
    CylQuadrature, LongitudinalPacket, NormCurve,
};
pub(crate) use amplitude::time_factor;
pub use gapped::{gap_width_law, gapped_profile, log_log_slope, GapGridSpec, GappedProfile};
pub use rate::{default_bin, rate_convergence_sweep, rate_w, RateResult};

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::physconst::{Species, UnitSystem};

/// Normalization relating the printed M to ⟨p₁q₁|V|pφ₀⟩: 4π/(2π)⁶.
pub const KERNEL_PREFACTOR: f64 = {
    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
    4.0 * std::f64::consts::PI / (TWO_PI * TWO_PI * TWO_PI * TWO_PI * TWO_PI * TWO_PI)
};

/// Target atom: position, binding energy and the hydrogenic length
/// parameter of the electron to be ejected.
#[derive(Debug, Clone, Copy)]
pub struct TargetAtom {
    /// Position of the atomic center, cm.
    pub x: [f64; 3],
    /// Binding energy, eV.
    pub e0_ev: f64,
    /// Binding energy, natural units (s⁻¹).
    pub e0_nat: f64,
    /// Ground-state length parameter, cm.
    pub bohr_a: f64,
    /// Nominal atomic radius, cm (an input to estimates, never computed).
    pub r_cm: f64,
}

impl TargetAtom {
    /// Alkali-like one-electron atom with bohr_a fixed by the binding
    /// energy: E0 = 1/(2 m_e a²).
    pub fn alkali(us: &UnitSystem, x: [f64; 3], e0_ev: f64, r_cm: f64) -> Result<Self> {
        if !(e0_ev > 0.0) {
            return Err(CoreError::non_positive("E0", e0_ev));
        }
        let e0_nat = crate::physconst::convert(
            e0_ev,
            crate::physconst::Unit::Ev,
            crate::physconst::Unit::InvSec,
        )?;
        let me = us.mass_natural(Species::Electron);
        let bohr_a = 1.0 / (2.0 * me * e0_nat).sqrt();
        Ok(TargetAtom {
            x,
            e0_ev,
            e0_nat,
            bohr_a,
            r_cm,
        })
    }

    pub fn with_position(mut self, x: [f64; 3]) -> Self {
        self.x = x;
        self
    }
}

/// Incident-beam transverse structure.
#[derive(Debug, Clone, Copy)]
pub enum TransverseProfile {
    /// Plane wave carrying the declared current density (particles per
    /// cm² per s).
    PlaneWave { current_density: f64 },
    /// δ(p_⊥) × Gaussian longitudinal packet of coherence length l_c.
    DeltaTransverse,
}

/// Incident α-particle beam.
#[derive(Debug, Clone, Copy)]
pub struct BeamSpec {
    /// Mean momentum, cm⁻¹; reduced operations assume it along +z.
    pub p_mean: [f64; 3],
    /// Mass, natural units (s/cm²).
    pub mass: f64,
    /// Coherence length l_c in cm; `None` = unbounded (plane-wave limit).
    pub coherence_length: Option<f64>,
    pub profile: TransverseProfile,
}

impl BeamSpec {
    /// α beam along +z at the given speed.
    pub fn alpha_along_z(
        us: &UnitSystem,
        speed_cm_s: f64,
        coherence_length: Option<f64>,
    ) -> Result<Self> {
        if !(speed_cm_s > 0.0) {
            return Err(CoreError::non_positive("speed", speed_cm_s));
        }
        if let Some(lc) = coherence_length {
            if !(lc > 0.0) {
                return Err(CoreError::non_positive("l_c", lc));
            }
        }
        let mass = us.mass_natural(Species::Alpha);
        Ok(BeamSpec {
            p_mean: [0.0, 0.0, mass * speed_cm_s],
            mass,
            coherence_length,
            profile: TransverseProfile::DeltaTransverse,
        })
    }

    pub fn with_profile(mut self, profile: TransverseProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn p_mag(&self) -> f64 {
        let p = self.p_mean;
        (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
    }

    pub fn speed(&self) -> f64 {
        self.p_mag() / self.mass
    }

    /// Beam kinetic energy p²/2m, natural units.
    pub fn kinetic_energy(&self) -> f64 {
        let p = self.p_mag();
        p * p / (2.0 * self.mass)
    }
}

/// Momentum transfer/ejection pair for the bound-free form factor.
#[derive(Debug, Clone, Copy)]
pub struct FormFactorQuery {
    pub k: [f64; 3],
    pub q: [f64; 3],
}

/// Per-axis minimal momentum transfer.
#[derive(Debug, Clone, Copy)]
pub struct MomentumGap {
    pub delta: [f64; 3],
}

impl MomentumGap {
    pub fn isotropic(delta: f64) -> Self {
        MomentumGap {
            delta: [delta, delta, delta],
        }
    }
}

pub(crate) fn norm_sq(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// Normalized hydrogenic 1s momentum wave function φ̃₀ at |p|² = p_sq.
pub fn hydrogenic_momentum(atom: &TargetAtom, p_sq: f64) -> f64 {
    let a = atom.bohr_a;
    let denom = 1.0 + a * a * p_sq;
    (2.0 * std::f64::consts::SQRT_2 / std::f64::consts::PI) * a.powf(1.5) / (denom * denom)
}

/// Bound→continuum matrix element ⟨q|e^{ik·ξ}|φ₀⟩ = φ̃₀(q − k) in the
/// plane-wave final-state approximation. Real, and a function of q − k
/// only.
pub fn bound_free_form_factor(query: &FormFactorQuery, atom: &TargetAtom) -> Complex64 {
    let d = [
        query.q[0] - query.k[0],
        query.q[1] - query.k[1],
        query.q[2] - query.k[2],
    ];
    Complex64::new(hydrogenic_momentum(atom, norm_sq(d)), 0.0)
}

/// The loosely normalized matrix element M(dp, q) with its positional
/// phase.
///
/// Errors on |dp| = 0: the bare Coulomb factor diverges there and the
/// caller must impose a gap or stay on the energy shell, where the
/// transfer is bounded away from zero by the binding energy.
pub fn matrix_element_m(
    us: &UnitSystem,
    atom: &TargetAtom,
    dp: [f64; 3],
    q: [f64; 3],
) -> Result<Complex64> {
    let dp2 = norm_sq(dp);
    if dp2 == 0.0 {
        return Err(CoreError::CoulombSingularity);
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let coulomb = 2.0 * us.e2_natural() / dp2;
    let ff = bound_free_form_factor(&FormFactorQuery { k: dp, q }, atom);
    let phase = dp[0] * atom.x[0] + dp[1] * atom.x[1] + dp[2] * atom.x[2];
    Ok(ff * coulomb * two_pi.powi(3) * Complex64::from_polar(1.0, phase))
}

/// Properly normalized ⟨p₁q₁|V|pφ₀⟩ used inside every probability.
pub fn born_kernel(
    us: &UnitSystem,
    atom: &TargetAtom,
    dp: [f64; 3],
    q: [f64; 3],
) -> Result<Complex64> {
    Ok(matrix_element_m(us, atom, dp, q)? * KERNEL_PREFACTOR)
}

/// Same kernel without the |dp| = 0 check, for hot loops that guarantee a
/// momentum gap themselves.
#[inline]
pub(crate) fn born_kernel_unchecked(
    e2_nat: f64,
    atom: &TargetAtom,
    dp: [f64; 3],
    q: [f64; 3],
) -> Complex64 {
    let dp2 = norm_sq(dp);
    let a = atom.bohr_a;
    let d = [q[0] - dp[0], q[1] - dp[1], q[2] - dp[2]];
    let denom = 1.0 + a * a * norm_sq(d);
    let ff =
        (2.0 * std::f64::consts::SQRT_2 / std::f64::consts::PI) * a.powf(1.5) / (denom * denom);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mag = two_pi.powi(3) * KERNEL_PREFACTOR * 2.0 * e2_nat / dp2 * ff;
    let phase = dp[0] * atom.x[0] + dp[1] * atom.x[1] + dp[2] * atom.x[2];
    Complex64::from_polar(mag, phase)
}
