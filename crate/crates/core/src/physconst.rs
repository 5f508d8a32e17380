//! Physical constants and the unit conventions used throughout.
//!
//! Everything internal runs in natural units with ℏ = 1, lengths in cm and
//! times in s. Energies are then frequencies (s⁻¹), momenta inverse lengths
//! (cm⁻¹) and masses carry s/cm². Inputs and outputs in eV, erg or Kelvin
//! are converted at the boundary.
//!
//! The Coulomb constant e² defaults to the pinned value 2·10⁻⁷ cm·eV used
//! for the order-of-magnitude arithmetic this crate reproduces; the CODATA
//! value (α·ℏc ≈ 1.44·10⁻⁷ cm·eV) is available as an override.

use std::collections::BTreeMap;

use crate::error::{CoreError, Result};

/// ℏ in eV·s (CODATA 2018).
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// Conversion factor eV → s⁻¹ under ℏ = 1.
pub const EV_TO_INVSEC: f64 = 1.0 / HBAR_EV_S;

/// Speed of light in cm/s (exact).
pub const C_CM_PER_S: f64 = 2.997_924_58e10;

/// Boltzmann constant in eV/K (exact since the 2019 SI).
pub const KB_EV_PER_K: f64 = 8.617_333_262e-5;

/// 1 eV in erg (exact: elementary charge in C × 10⁷).
pub const ERG_PER_EV: f64 = 1.602_176_634e-12;

/// Pinned Coulomb constant e² in cm·eV.
pub const E2_PINNED_CM_EV: f64 = 2.0e-7;

/// CODATA Coulomb constant e² = α·ℏc in cm·eV.
pub const E2_CODATA_CM_EV: f64 = 1.439_964_5e-7;

/// Electron mass, eV/c².
pub const M_ELECTRON_EV: f64 = 510_998.950_00;

/// Proton mass, eV/c².
pub const M_PROTON_EV: f64 = 938.272_088_16e6;

/// α-particle mass, eV/c².
pub const M_ALPHA_EV: f64 = 3.727_379_406_6e9;

/// Atomic mass unit, eV/c².
pub const AMU_EV: f64 = 931.494_102_42e6;

/// H₂ molecule mass, eV/c² (2.01588 u).
pub const M_H2_EV: f64 = 2.015_88 * AMU_EV;

/// Particle species with built-in default masses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Species {
    Electron,
    Proton,
    Alpha,
    H2,
}

impl Species {
    pub fn name(&self) -> &'static str {
        match self {
            Species::Electron => "electron",
            Species::Proton => "proton",
            Species::Alpha => "alpha",
            Species::H2 => "H2",
        }
    }

    fn default_mass_ev(&self) -> f64 {
        match self {
            Species::Electron => M_ELECTRON_EV,
            Species::Proton => M_PROTON_EV,
            Species::Alpha => M_ALPHA_EV,
            Species::H2 => M_H2_EV,
        }
    }
}

/// Dimension tag for unit conversions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Length,
    Time,
    Speed,
    Temperature,
    Momentum,
}

/// The unit tags this artifact needs; nothing more.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Ev,
    Erg,
    /// Natural energy unit under ℏ = 1.
    InvSec,
    Cm,
    Sec,
    CmPerSec,
    /// Speed as a fraction of c.
    Beta,
    Kelvin,
    /// Natural momentum unit under ℏ = 1.
    InvCm,
}

impl Unit {
    pub fn dimension(&self) -> Dimension {
        match self {
            Unit::Ev | Unit::Erg | Unit::InvSec => Dimension::Energy,
            Unit::Cm => Dimension::Length,
            Unit::Sec => Dimension::Time,
            Unit::CmPerSec | Unit::Beta => Dimension::Speed,
            Unit::Kelvin => Dimension::Temperature,
            Unit::InvCm => Dimension::Momentum,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Unit::Ev => "eV",
            Unit::Erg => "erg",
            Unit::InvSec => "1/s",
            Unit::Cm => "cm",
            Unit::Sec => "s",
            Unit::CmPerSec => "cm/s",
            Unit::Beta => "v/c",
            Unit::Kelvin => "K",
            Unit::InvCm => "1/cm",
        }
    }

    /// Scale factor to the natural base unit of this dimension.
    fn to_natural(&self) -> f64 {
        match self {
            Unit::Ev => EV_TO_INVSEC,
            Unit::Erg => EV_TO_INVSEC / ERG_PER_EV,
            Unit::InvSec => 1.0,
            Unit::Cm => 1.0,
            Unit::Sec => 1.0,
            Unit::CmPerSec => 1.0,
            Unit::Beta => C_CM_PER_S,
            Unit::Kelvin => 1.0,
            Unit::InvCm => 1.0,
        }
    }
}

/// Exact dimensional conversion between compatible unit tags. Pure.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(CoreError::IncompatibleUnits {
            from: from.name(),
            to: to.name(),
        });
    }
    Ok(value * from.to_natural() / to.to_natural())
}

/// Immutable bundle of the constants a run works with.
///
/// e² is stored in cm·eV, masses in eV/c²; accessors hand out natural-unit
/// values. Construct once, share freely.
#[derive(Debug, Clone)]
pub struct UnitSystem {
    e2_cm_ev: f64,
    kb_ev_per_k: f64,
    masses_ev: BTreeMap<Species, f64>,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::paper()
    }
}

impl UnitSystem {
    /// Pinned constants: e² = 2·10⁻⁷ cm·eV.
    pub fn paper() -> Self {
        Self::with_e2(E2_PINNED_CM_EV)
    }

    /// CODATA constants: e² = α·ℏc.
    pub fn codata() -> Self {
        Self::with_e2(E2_CODATA_CM_EV)
    }

    pub fn with_e2(e2_cm_ev: f64) -> Self {
        let mut masses_ev = BTreeMap::new();
        for sp in [Species::Electron, Species::Proton, Species::Alpha, Species::H2] {
            masses_ev.insert(sp, sp.default_mass_ev());
        }
        UnitSystem {
            e2_cm_ev,
            kb_ev_per_k: KB_EV_PER_K,
            masses_ev,
        }
    }

    /// Replace a particle mass (toy-model runs). Consumes and returns the
    /// system so constructed values stay immutable.
    pub fn override_mass(mut self, species: Species, mass_ev: f64) -> Self {
        self.masses_ev.insert(species, mass_ev);
        self
    }

    pub fn e2_cm_ev(&self) -> f64 {
        self.e2_cm_ev
    }

    /// e² in natural units (energy·length = cm/s under ℏ = 1).
    pub fn e2_natural(&self) -> f64 {
        self.e2_cm_ev * EV_TO_INVSEC
    }

    pub fn kb_ev_per_k(&self) -> f64 {
        self.kb_ev_per_k
    }

    /// kB·T as a natural energy (s⁻¹).
    pub fn thermal_energy(&self, temperature_k: f64) -> f64 {
        self.kb_ev_per_k * temperature_k * EV_TO_INVSEC
    }

    pub fn mass_ev(&self, species: Species) -> f64 {
        self.masses_ev[&species]
    }

    /// Mass in natural units (s/cm²): m = (mc²)/c² with mc² in s⁻¹.
    pub fn mass_natural(&self, species: Species) -> f64 {
        self.mass_ev(species) * EV_TO_INVSEC / (C_CM_PER_S * C_CM_PER_S)
    }

    /// Same conversion for an explicit mass in eV/c².
    pub fn mass_ev_to_natural(&self, mass_ev: f64) -> f64 {
        mass_ev * EV_TO_INVSEC / (C_CM_PER_S * C_CM_PER_S)
    }

    /// Momentum (cm⁻¹) of a species moving at `speed` cm/s.
    pub fn momentum(&self, species: Species, speed_cm_s: f64) -> f64 {
        self.mass_natural(species) * speed_cm_s
    }

    /// de Broglie wavelength λ = 2π/p in cm.
    pub fn de_broglie(&self, momentum_inv_cm: f64) -> f64 {
        std::f64::consts::TAU / momentum_inv_cm
    }

    /// Rows for the constants dump: (name, value, unit).
    pub fn dump(&self) -> Vec<(String, f64, &'static str)> {
        let mut rows = vec![
            ("hbar".to_string(), 1.0, "natural"),
            ("hbar_ev_s".to_string(), HBAR_EV_S, "eV*s"),
            ("c".to_string(), C_CM_PER_S, "cm/s"),
            ("e2".to_string(), self.e2_cm_ev, "cm*eV"),
            ("kB".to_string(), self.kb_ev_per_k, "eV/K"),
            ("ev_to_inv_s".to_string(), EV_TO_INVSEC, "1/(s*eV)"),
            ("erg_per_ev".to_string(), ERG_PER_EV, "erg/eV"),
        ];
        for (sp, m) in &self.masses_ev {
            rows.push((format!("mass_{}", sp.name()), *m, "eV/c^2"));
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REL: f64 = 1e-12;

    fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(a.abs())
    }

    #[test]
    fn ev_to_erg_matches_codata() {
        // 1 eV = 1.602...e-12 erg, cross-checked against the independent
        // (charge × 1e7) route rather than the stored constant chain.
        let got = convert(1.0, Unit::Ev, Unit::Erg).unwrap();
        let independent = 1.602_176_634e-19 * 1.0e7;
        assert!(rel_eq(got, independent, REL), "got {got}");
    }

    #[test]
    fn identity_conversion() {
        let x = 3.25e-8;
        assert_eq!(convert(x, Unit::Cm, Unit::Cm).unwrap(), x);
    }

    #[test]
    fn speed_to_beta() {
        let beta = convert(1.0e9, Unit::CmPerSec, Unit::Beta).unwrap();
        assert!(rel_eq(beta, 1.0e9 / C_CM_PER_S, REL));
        assert!((beta - 0.0333).abs() < 5e-4, "beta = {beta}");
    }

    #[test]
    fn incompatible_dimensions_rejected() {
        assert!(matches!(
            convert(1.0, Unit::Ev, Unit::Cm),
            Err(CoreError::IncompatibleUnits { .. })
        ));
    }

    #[test]
    fn conversion_composition() {
        let chains: &[(Unit, Unit, Unit)] = &[
            (Unit::Ev, Unit::Erg, Unit::InvSec),
            (Unit::Erg, Unit::InvSec, Unit::Ev),
            (Unit::CmPerSec, Unit::Beta, Unit::CmPerSec),
        ];
        for &(a, b, c) in chains {
            for &x in &[1.0, 2.5e-7, 9.81e13] {
                let two_step = convert(convert(x, a, b).unwrap(), b, c).unwrap();
                let one_step = convert(x, a, c).unwrap();
                assert!(rel_eq(two_step, one_step, REL));
            }
        }
    }

    #[test]
    fn roundtrip_to_natural() {
        for &u in &[Unit::Ev, Unit::Erg, Unit::Beta, Unit::Kelvin] {
            let x = 7.77e3;
            let nat = convert(x, u, natural_of(u)).unwrap();
            let back = convert(nat, natural_of(u), u).unwrap();
            assert!(rel_eq(back, x, REL));
        }
    }

    fn natural_of(u: Unit) -> Unit {
        match u.dimension() {
            Dimension::Energy => Unit::InvSec,
            Dimension::Length => Unit::Cm,
            Dimension::Time => Unit::Sec,
            Dimension::Speed => Unit::CmPerSec,
            Dimension::Temperature => Unit::Kelvin,
            Dimension::Momentum => Unit::InvCm,
        }
    }

    #[test]
    fn alpha_kinematics_sanity() {
        // v = 1e9 cm/s must reproduce the familiar α numbers: λ ≈ 1e-12 cm
        // and E ≈ 3e21 s⁻¹.
        let us = UnitSystem::paper();
        let p = us.momentum(Species::Alpha, 1.0e9);
        let lambda = us.de_broglie(p);
        assert!(lambda > 0.9e-12 && lambda < 1.1e-12, "lambda = {lambda}");
        let m = us.mass_natural(Species::Alpha);
        let energy = p * p / (2.0 * m);
        assert!(energy > 1.0e21 && energy < 1.0e22, "E = {energy}");
    }

    #[test]
    fn mass_override() {
        let us = UnitSystem::paper().override_mass(Species::H2, 4.0 * M_H2_EV);
        assert!(rel_eq(us.mass_ev(Species::H2), 4.0 * M_H2_EV, REL));
    }
}
