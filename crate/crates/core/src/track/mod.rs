//! Event formation: filament slicing of the incident packet, time-stamped
//! ionization mixtures, the two-ionization amplitude and its
//! factorization, and many-atom pairing weights.
//!
//! Track-level dynamics runs in the 1D longitudinal reduction
//! ([`crate::oned`]); the full cylindrical machinery stays in
//! [`crate::born`] where absolute cross sections are needed.

mod filament;
mod pairing;
mod second_order;

pub use filament::{
    event_time_distribution, filament_mixture, momentum_saturation, EventTimeDistribution,
    Filament, FilamentDecomposition, FilamentOptions, SaturationReport, WindowKind,
};
pub use pairing::{
    classify_pair, pairing_weights, CoherenceClass, PairAtom, PairBeam, PairingScenario,
    PairingTable, PairingWeight,
};
pub use second_order::{second_order_probabilities, SecondOrderOutcome, SecondOrderProblem};

use crate::born::{gapped_profile, BeamSpec, GapGridSpec, MomentumGap, TargetAtom};
use crate::error::Result;
use crate::physconst::{Species, UnitSystem};

/// Length and time scales of one ionization event.
#[derive(Debug, Clone, Copy)]
pub struct TrackScales {
    /// Transverse minimal momentum transfer, sqrt(2·m_e·E0).
    pub delta_tr: f64,
    /// Measured transverse event extent (90% mass radius of |M̃|).
    pub d_tr: f64,
    /// Longitudinal extent, a few times the transverse one.
    pub d_long: f64,
    /// Event duration scale τ = filament_factor·d_long/v.
    pub tau: f64,
    /// Filament slice length, filament_factor·d_long.
    pub filament_length: f64,
}

impl TrackScales {
    /// Derive from the gapped-profile machinery: Δ_tr = sqrt(2·m_e·E0),
    /// d_tr measured, d_long = `dlong_factor`·d_tr (a few), filaments of
    /// `filament_factor`·d_long.
    pub fn derive(
        us: &UnitSystem,
        beam: &BeamSpec,
        atom: &TargetAtom,
        dlong_factor: f64,
        filament_factor: f64,
        grid: &GapGridSpec,
    ) -> Result<Self> {
        let me = us.mass_natural(Species::Electron);
        let delta_tr = (2.0 * me * atom.e0_nat).sqrt();
        let prof = gapped_profile(
            us,
            &atom.with_position([0.0; 3]),
            [0.0; 3],
            &MomentumGap::isotropic(delta_tr),
            grid,
        )?;
        let d_tr = prof.extent90_cm[0];
        Ok(Self::from_measured(
            delta_tr,
            d_tr,
            dlong_factor,
            filament_factor,
            beam.speed(),
        ))
    }

    /// Bypass the measurement (tests, explicit overrides).
    pub fn from_measured(
        delta_tr: f64,
        d_tr: f64,
        dlong_factor: f64,
        filament_factor: f64,
        speed: f64,
    ) -> Self {
        let d_long = dlong_factor * d_tr;
        let filament_length = filament_factor * d_long;
        TrackScales {
            delta_tr,
            d_tr,
            d_long,
            tau: filament_length / speed,
            filament_length,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_have_event_magnitudes() {
        let us = UnitSystem::paper();
        let beam = BeamSpec::alpha_along_z(&us, 1.0e9, Some(2.0e-7)).unwrap();
        let atom = TargetAtom::alkali(&us, [0.0; 3], 2.0, 1.0e-8).unwrap();
        let scales =
            TrackScales::derive(&us, &beam, &atom, 3.0, 5.0, &GapGridSpec::fast()).unwrap();
        // Δ_tr·a = 1 for an alkali atom, so d_tr ~ π·a ~ 4e-8 cm.
        assert!((scales.delta_tr * atom.bohr_a - 1.0).abs() < 1e-10);
        assert!(
            scales.d_tr > 1.0e-8 && scales.d_tr < 2.0e-7,
            "d_tr = {}",
            scales.d_tr
        );
        assert!((scales.d_long / scales.d_tr - 3.0).abs() < 1e-12);
        assert!((scales.tau - scales.filament_length / 1.0e9).abs() < 1e-30);
    }
}
