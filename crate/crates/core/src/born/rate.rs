//! Golden-rule ionization rate and cross section for a plane-wave beam.
//!
//! W = 2π ∫ d³p₁ d³q₁ |⟨p₁q₁|V|p̄φ₀⟩|² δ_ε(E₁ − Ē), with the δ realized
//! as a top-hat energy bin of width ε. The bin is applied analytically in
//! the longitudinal-transfer integration: for fixed (p₁⊥, q) the condition
//! |ΔE(κ)| < ε/2 is a quadratic bracket in κ = p̄ − p₁z, solved exactly
//! and integrated with a short Gauss rule. No κ grid exists, so the bin
//! width never collides with a grid resolution; it must only stay below
//! the binding energy, which keeps the |dp| → 0 Coulomb divergence
//! outside the bin.
//!
//! With the ⟨x|p⟩ = (2π)^(−3/2) convention the intrinsic plane-wave
//! current is J₀ = v·(2π)⁻³, so σ = W/J₀; the returned W is rescaled to
//! the declared beam current density.

use super::amplitude::CylQuadrature;
use super::{born_kernel_unchecked, BeamSpec, TargetAtom, TransverseProfile};
use crate::error::{CoreError, Result};
use crate::exec;
use crate::physconst::{Species, UnitSystem};
use crate::quad::GaussRule;

/// Rate and cross section at a given energy-bin width.
#[derive(Debug, Clone, Copy)]
pub struct RateResult {
    /// Ionization probability per unit time at the declared current.
    pub w: f64,
    /// Cross section, cm².
    pub sigma_cm2: f64,
    /// Energy-bin width used, natural units.
    pub eps_e: f64,
}

/// Default bin: 10⁻³ of the binding energy. Anything approaching 2·E0
/// would let the top-hat reach the unphysical |dp| → 0 region.
pub fn default_bin(atom: &TargetAtom) -> f64 {
    1.0e-3 * atom.e0_nat
}

/// Golden-rule rate on the reduced shell quadrature.
pub fn rate_w(
    us: &UnitSystem,
    beam: &BeamSpec,
    atom: &TargetAtom,
    quad: &CylQuadrature,
    eps_e: f64,
) -> Result<RateResult> {
    let current = match beam.profile {
        TransverseProfile::PlaneWave { current_density } => {
            if !(current_density > 0.0) {
                return Err(CoreError::non_positive("current_density", current_density));
            }
            current_density
        }
        TransverseProfile::DeltaTransverse => {
            return Err(CoreError::Invalid(
                "rate_w needs a plane-wave beam with a declared current density".into(),
            ))
        }
    };
    if !(eps_e > 0.0) {
        return Err(CoreError::non_positive("eps_e", eps_e));
    }
    if eps_e >= atom.e0_nat {
        return Err(CoreError::Resolution(format!(
            "energy bin {eps_e:.3e} reaches the κ ≤ 0 Coulomb divergence; keep it below E0 = {:.3e}",
            atom.e0_nat
        )));
    }
    let e_bar = beam.kinetic_energy();
    let min_bin = 64.0 * f64::EPSILON * e_bar;
    if eps_e < min_bin {
        return Err(CoreError::RateBinTooNarrow {
            bin: eps_e,
            min: min_bin,
        });
    }

    let e2 = us.e2_natural();
    let me = us.mass_natural(Species::Electron);
    let mass = beam.mass;
    let v = beam.speed();
    let e0 = atom.e0_nat;

    let inner = GaussRule::new(8);
    let n = quad.p1perp.len() * quad.qz.len() * quad.qperp.len() * quad.phi.len();
    let nphi = quad.phi.len();
    let nqp = quad.qperp.len();
    let nqz = quad.qz.len();

    let shell_sum = exec::sum_indexed(n, |i| {
        let mut rem = i;
        let iphi = rem % nphi;
        rem /= nphi;
        let iqp = rem % nqp;
        rem /= nqp;
        let iqz = rem % nqz;
        rem /= nqz;
        let ipp = rem;
        let (p1perp, wp) = quad.p1perp[ipp];
        let (qz, wqz) = quad.qz[iqz];
        let (qperp, wqp) = quad.qperp[iqp];
        let (phi, wphi) = quad.phi[iphi];

        // ΔE(κ) = κ²/2m − vκ + R; bracket |ΔE| < ε/2 around the small root.
        let r = p1perp * p1perp / (2.0 * mass)
            + (qz * qz + qperp * qperp) / (2.0 * me)
            + e0;
        let root = |delta: f64| -> Option<f64> {
            let disc = (mass * v) * (mass * v) - 2.0 * mass * (r - delta);
            if disc < 0.0 {
                None
            } else {
                Some(mass * v - disc.sqrt())
            }
        };
        let (Some(k_lo), Some(k_hi)) = (root(-0.5 * eps_e), root(0.5 * eps_e)) else {
            return 0.0;
        };
        let q = [qperp * phi.cos(), qperp * phi.sin(), qz];
        let mut bin = 0.0;
        for (kappa, wk) in inner.mapped(k_lo, k_hi) {
            let k = born_kernel_unchecked(e2, atom, [-p1perp, 0.0, kappa], q);
            bin += wk * k.norm_sqr();
        }
        wp * wqz * wqp * wphi * bin / eps_e
    });

    // 2π (golden rule) × 2π (overall azimuth).
    let w_intrinsic = std::f64::consts::TAU * std::f64::consts::TAU * shell_sum;
    let j_intrinsic = v / (2.0 * std::f64::consts::PI).powi(3);
    let sigma = w_intrinsic / j_intrinsic;
    Ok(RateResult {
        w: sigma * current,
        sigma_cm2: sigma,
        eps_e,
    })
}

/// σ(ε) over a list of bin widths — the declared convergence criterion is
/// that halving ε moves σ by < 5%.
pub fn rate_convergence_sweep(
    us: &UnitSystem,
    beam: &BeamSpec,
    atom: &TargetAtom,
    quad: &CylQuadrature,
    bins: &[f64],
) -> Result<Vec<RateResult>> {
    bins.iter()
        .map(|&eps| rate_w(us, beam, atom, quad, eps))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::born::amplitude::CylQuadBudget;
    use crate::physconst::UnitSystem;

    fn setup(j: f64) -> (UnitSystem, BeamSpec, TargetAtom, CylQuadrature) {
        let us = UnitSystem::paper();
        let beam = BeamSpec::alpha_along_z(&us, 1.0e9, None)
            .unwrap()
            .with_profile(TransverseProfile::PlaneWave { current_density: j });
        let atom = TargetAtom::alkali(&us, [0.0; 3], 2.0, 1.0e-8).unwrap();
        let quad = CylQuadrature::build(&beam, &atom, &CylQuadBudget::fast(), 1.0e-15).unwrap();
        (us, beam, atom, quad)
    }

    #[test]
    fn sigma_independent_of_current() {
        let (us, beam1, atom, quad) = setup(1.0);
        let beam2 = beam1.with_profile(TransverseProfile::PlaneWave { current_density: 2.0 });
        let eps = default_bin(&atom);
        let r1 = rate_w(&us, &beam1, &atom, &quad, eps).unwrap();
        let r2 = rate_w(&us, &beam2, &atom, &quad, eps).unwrap();
        assert!((r2.w / r1.w - 2.0).abs() < 1e-12);
        assert!((r2.sigma_cm2 - r1.sigma_cm2).abs() < 1e-12 * r1.sigma_cm2);
    }

    #[test]
    fn sigma_has_atomic_scale() {
        // The Born ionization cross section for a 2 eV alkali electron
        // under a fast α should land well inside atomic dimensions.
        let (us, beam, atom, quad) = setup(1.0);
        let r = rate_w(&us, &beam, &atom, &quad, default_bin(&atom)).unwrap();
        assert!(
            r.sigma_cm2 > 1.0e-18 && r.sigma_cm2 < 1.0e-12,
            "sigma = {}",
            r.sigma_cm2
        );
    }

    #[test]
    fn bin_halving_is_converged() {
        let (us, beam, atom, quad) = setup(1.0);
        let eps = default_bin(&atom);
        let rs = rate_convergence_sweep(&us, &beam, &atom, &quad, &[eps, 0.5 * eps]).unwrap();
        let drift = (rs[1].sigma_cm2 - rs[0].sigma_cm2).abs() / rs[0].sigma_cm2;
        assert!(drift < 0.05, "bin-halving drift {drift}");
    }

    #[test]
    fn invalid_bins_rejected() {
        let (us, beam, atom, quad) = setup(1.0);
        assert!(matches!(
            rate_w(&us, &beam, &atom, &quad, 2.0 * atom.e0_nat),
            Err(CoreError::Resolution(_))
        ));
        assert!(matches!(
            rate_w(&us, &beam, &atom, &quad, 1.0e-30),
            Err(CoreError::RateBinTooNarrow { .. })
        ));
    }

    #[test]
    fn delta_transverse_beam_rejected() {
        let (us, _beam, atom, quad) = setup(1.0);
        let beam = BeamSpec::alpha_along_z(&us, 1.0e9, Some(2.0e-7)).unwrap();
        assert!(rate_w(&us, &beam, &atom, &quad, default_bin(&atom)).is_err());
    }
}
