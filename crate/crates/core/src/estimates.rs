//! Closed-form order-of-magnitude estimators: classical transverse range,
//! thermal-Doppler coherence length, passage time and thermal minimal-packet
//! width.

use crate::error::{CoreError, Result};
use crate::physconst::UnitSystem;

/// Order-of-magnitude decade of |x|.
pub fn decade(x: f64) -> i32 {
    x.abs().log10().floor() as i32
}

/// Same order of magnitude: within half a decade of the reference value.
pub fn decade_match(computed: f64, reference: f64) -> bool {
    if !(computed.is_finite() && reference.is_finite()) || computed == 0.0 || reference == 0.0 {
        return false;
    }
    (computed / reference).abs().log10().abs() <= 0.5
}

/// Inputs for the classical transverse-range bound.
#[derive(Debug, Clone)]
pub struct ClassicalRangeInput {
    /// Binding energy in eV.
    pub e0_ev: f64,
    /// Atomic radius in cm.
    pub r_cm: f64,
    /// Charge product as a multiple of e² (2 for α–electron).
    pub charge_product: f64,
}

impl ClassicalRangeInput {
    pub fn new(e0_ev: f64, r_cm: f64) -> Self {
        ClassicalRangeInput {
            e0_ev,
            r_cm,
            charge_product: 2.0,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("E0", self.e0_ev),
            ("R", self.r_cm),
            ("charge_product", self.charge_product),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::non_positive(name, v));
            }
        }
        Ok(())
    }
}

/// Classical transverse localization: beyond `d_max` the force cannot
/// transfer the binding energy, so ionization is impossible.
#[derive(Debug, Clone)]
pub struct ClassicalRange {
    /// Strict bound d_max = sqrt(charge_product·e²·R/E0), cm.
    pub d_max_cm: f64,
    /// d_max²/R = charge_product·e²/E0, cm — the quantity quoted as an
    /// effective range.
    pub d2_over_r_cm: f64,
    /// The quoted reference value 4·10⁻⁷ cm for E0 = 2 eV.
    pub quoted_d2_over_r_cm: f64,
    /// The quoted value exceeds the bound following from the printed
    /// inequality by a factor ≈ 2; flagged, decade still matches.
    pub factor_two_discrepancy: bool,
}

/// d_max from force·displacement ≥ E0 along a straight-line pass.
pub fn classical_transverse_range(us: &UnitSystem, input: &ClassicalRangeInput) -> Result<ClassicalRange> {
    input.validate()?;
    let e2 = us.e2_cm_ev();
    let d2_over_r = input.charge_product * e2 / input.e0_ev;
    let d_max = (d2_over_r * input.r_cm).sqrt();
    let quoted = 4.0e-7;
    Ok(ClassicalRange {
        d_max_cm: d_max,
        d2_over_r_cm: d2_over_r,
        quoted_d2_over_r_cm: quoted,
        factor_two_discrepancy: !decade_match(d2_over_r, quoted)
            || (d2_over_r / quoted - 1.0).abs() > 0.25,
    })
}

/// Inputs for the thermal-Doppler coherence length.
#[derive(Debug, Clone)]
pub struct ThermalSourceInput {
    /// Source-atom thermal speed, cm/s (≥ 0; zero means no broadening).
    pub v_source: f64,
    /// Emitted-particle speed, cm/s.
    pub v_particle: f64,
    /// de Broglie wavelength in cm, if supplied directly.
    pub wavelength_cm: Option<f64>,
    /// Particle mass in eV/c², if supplied.
    pub mass_ev: Option<f64>,
}

impl ThermalSourceInput {
    fn validate(&self, us: &UnitSystem) -> Result<f64> {
        if !(self.v_particle > 0.0) {
            return Err(CoreError::non_positive("v_particle", self.v_particle));
        }
        if self.v_source < 0.0 {
            return Err(CoreError::non_positive("v_source", self.v_source));
        }
        let p_from_mass = self
            .mass_ev
            .map(|m| us.mass_ev_to_natural(m) * self.v_particle);
        let p_from_wavelength = self.wavelength_cm.map(|l| std::f64::consts::TAU / l);
        match (p_from_mass, p_from_wavelength) {
            (Some(pm), Some(pw)) => {
                let rel = (pm - pw).abs() / pm.max(pw);
                if rel > 1e-6 {
                    return Err(CoreError::InconsistentWavelength {
                        wavelength: self.wavelength_cm.unwrap(),
                        expected: std::f64::consts::TAU / pm,
                    });
                }
                Ok(pm)
            }
            (Some(p), None) | (None, Some(p)) => Ok(p),
            (None, None) => Err(CoreError::Invalid(
                "thermal source needs a wavelength or a mass".into(),
            )),
        }
    }
}

/// Coherence length in both phase conventions.
///
/// The Doppler spread gives Δp/p = v_source/v_particle exactly. The
/// radian convention is l_c = 1/Δp (ℏ = 1) = λ/(2π·Δp/p); the cycle
/// convention drops the 2π, l_c = λ/(Δp/p). Quoted coherence lengths in
/// the source material follow the cycle convention.
#[derive(Debug, Clone)]
pub struct ThermalCoherence {
    pub delta_p_over_p: f64,
    /// Momentum spread Δp, cm⁻¹ (0 when unbounded).
    pub delta_p_inv_cm: f64,
    /// l_c = 1/Δp.
    pub l_c_radian_cm: f64,
    /// l_c = λ/(Δp/p) = 2π/Δp.
    pub l_c_cycle_cm: f64,
    /// v_source = 0: no Doppler broadening, l_c unbounded.
    pub unbounded: bool,
    pub momentum_inv_cm: f64,
    pub wavelength_cm: f64,
}

pub fn thermal_coherence_length(us: &UnitSystem, input: &ThermalSourceInput) -> Result<ThermalCoherence> {
    let p = input.validate(us)?;
    let lambda = std::f64::consts::TAU / p;
    let ratio = input.v_source / input.v_particle;
    if ratio == 0.0 {
        return Ok(ThermalCoherence {
            delta_p_over_p: 0.0,
            delta_p_inv_cm: 0.0,
            l_c_radian_cm: f64::INFINITY,
            l_c_cycle_cm: f64::INFINITY,
            unbounded: true,
            momentum_inv_cm: p,
            wavelength_cm: lambda,
        });
    }
    let dp = p * ratio;
    Ok(ThermalCoherence {
        delta_p_over_p: ratio,
        delta_p_inv_cm: dp,
        l_c_radian_cm: 1.0 / dp,
        l_c_cycle_cm: std::f64::consts::TAU / dp,
        unbounded: false,
        momentum_inv_cm: p,
        wavelength_cm: lambda,
    })
}

/// Minimal-packet width a = (2·m·kB·T)^(-1/2) in cm.
pub fn thermal_packet_width(us: &UnitSystem, mass_ev: f64, temperature_k: f64) -> Result<f64> {
    if !(mass_ev > 0.0) {
        return Err(CoreError::non_positive("mass", mass_ev));
    }
    if !(temperature_k > 0.0) {
        return Err(CoreError::non_positive("temperature", temperature_k));
    }
    let m = us.mass_ev_to_natural(mass_ev);
    let kbt = us.thermal_energy(temperature_k);
    Ok(1.0 / (2.0 * m * kbt).sqrt())
}

/// Time to cross `extent` at `speed`.
pub fn passage_time(extent_cm: f64, speed_cm_s: f64) -> Result<f64> {
    if extent_cm < 0.0 {
        return Err(CoreError::non_positive("extent", extent_cm));
    }
    if !(speed_cm_s > 0.0) {
        return Err(CoreError::non_positive("speed", speed_cm_s));
    }
    Ok(extent_cm / speed_cm_s)
}
