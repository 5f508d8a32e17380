//! Finite-time first-order amplitude and its squared-norm growth.
//!
//! The beam is δ(p_⊥)·g(p_z), so the p-integral collapses to one
//! dimension, and the remaining (p₁, q₁) dependence is cylindrically
//! symmetric about the beam axis: nodes live on
//! (κ = p̄−p₁z, p₁⊥, q_z, q_⊥, φ) with the overall azimuth contributing
//! 2π. The transverse-transfer axis is sinh-mapped: on the energy shell
//! the Coulomb factor peaks at p₁⊥ ≈ κ_shell ~ E0/v, three decades below
//! the form-factor scale 1/a, and a plain grid cannot resolve both.

use num_complex::Complex64;

use super::{born_kernel_unchecked, BeamSpec, TargetAtom};
use crate::error::{CoreError, Result};
use crate::exec;
use crate::field::{AmplitudeField, Axis, Basis};
use crate::physconst::{Species, UnitSystem};
use crate::quad::{GaussRule, MAX_CYCLES_PER_CELL};

/// (e^{iΔE·t} − 1)/(iΔE) with a stable small-argument branch.
#[inline]
pub(crate) fn time_factor(de: f64, t: f64) -> Complex64 {
    let x = de * t;
    if x.abs() < 1e-6 {
        Complex64::new(t * (1.0 - x * x / 6.0), t * (x / 2.0 - x * x * x / 24.0))
    } else {
        (Complex64::new(0.0, x).exp() - Complex64::new(1.0, 0.0)) / Complex64::new(0.0, de)
    }
}

/// Tabulated longitudinal beam wave function on quadrature nodes.
#[derive(Debug, Clone)]
pub struct LongitudinalPacket {
    /// (p_z, weight, ψ₀(p_z)) — weights are plain dp_z measures.
    pub nodes: Vec<(f64, f64, Complex64)>,
}

impl LongitudinalPacket {
    /// Gaussian packet g(p_z) = (2l_c²/π)^¼ e^{−(p_z−p̄)²l_c²}, sampled
    /// densely enough that e^{iΔE(p_z)t} stays within the cycle budget
    /// for all t ≤ t_max.
    pub fn gaussian(beam: &BeamSpec, t_max: f64) -> Result<Self> {
        let lc = beam.coherence_length.ok_or_else(|| {
            CoreError::Coverage("unbounded coherence length: use the plane-wave rate route".into())
        })?;
        let p_bar = beam.p_mean[2];
        let sigma_amp = 1.0 / (std::f64::consts::SQRT_2 * lc);
        let half = 5.0 * sigma_amp;
        let v = beam.speed();
        let cycles = v * 2.0 * half * t_max / std::f64::consts::TAU;
        let panels = ((cycles / MAX_CYCLES_PER_CELL).ceil() as usize).max(2);
        let rule = GaussRule::new(16);
        let norm = (2.0 * lc * lc / std::f64::consts::PI).powf(0.25);
        let mut nodes = Vec::with_capacity(panels * 16);
        let lo = p_bar - half;
        let step = 2.0 * half / panels as f64;
        for i in 0..panels {
            let a = lo + step * i as f64;
            for (pz, w) in rule.mapped(a, a + step) {
                let arg = (pz - p_bar) * lc;
                nodes.push((pz, w, Complex64::new(norm * (-arg * arg).exp(), 0.0)));
            }
        }
        Ok(LongitudinalPacket { nodes })
    }

    /// Gaussian packet whose envelope is centered at z₀ at t = 0 (a pure
    /// phase e^{−i p_z z₀} in momentum space).
    pub fn gaussian_centered(beam: &BeamSpec, t_max: f64, z0: f64) -> Result<Self> {
        let mut packet = Self::gaussian(beam, t_max)?;
        for (pz, _, v) in &mut packet.nodes {
            *v *= Complex64::from_polar(1.0, -*pz * z0);
        }
        Ok(packet)
    }

    /// Packet from explicit samples (filament windows, emanating waves).
    pub fn from_values(nodes: Vec<(f64, f64, Complex64)>) -> Self {
        LongitudinalPacket { nodes }
    }

    /// ∫|ψ₀|² dp_z on the tabulated nodes.
    pub fn norm_sq(&self) -> f64 {
        self.nodes.iter().map(|(_, w, v)| w * v.norm_sqr()).sum()
    }

    /// Linear combination on identical node layouts.
    pub fn linear_combination(a: Complex64, pa: &Self, b: Complex64, pb: &Self) -> Self {
        assert_eq!(pa.nodes.len(), pb.nodes.len());
        let nodes = pa
            .nodes
            .iter()
            .zip(&pb.nodes)
            .map(|(&(x, w, va), &(x2, _, vb))| {
                debug_assert!((x - x2).abs() <= 1e-9 * x.abs().max(1.0));
                (x, w, a * va + b * vb)
            })
            .collect();
        LongitudinalPacket { nodes }
    }
}

/// Amplitude at one reduced node; the inner p_z quadrature.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn amplitude_at(
    e2: f64,
    atom: &TargetAtom,
    mass_alpha: f64,
    mass_e: f64,
    packet: &LongitudinalPacket,
    p1perp: f64,
    p1z: f64,
    qz: f64,
    qperp: f64,
    phi: f64,
    t: f64,
) -> Complex64 {
    let q = [qperp * phi.cos(), qperp * phi.sin(), qz];
    let e1 = (p1perp * p1perp + p1z * p1z) / (2.0 * mass_alpha)
        + (qperp * qperp + qz * qz) / (2.0 * mass_e);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(pz, w, g) in &packet.nodes {
        let dp = [-p1perp, 0.0, pz - p1z];
        let e_in = pz * pz / (2.0 * mass_alpha) - atom.e0_nat;
        let de = e1 - e_in;
        acc += born_kernel_unchecked(e2, atom, dp, q) * g * time_factor(de, t) * w;
    }
    // −i from first-order perturbation theory
    Complex64::new(acc.im, -acc.re)
}

/// Node counts and reaches of the reduced quadrature.
#[derive(Debug, Clone, Copy)]
pub struct CylQuadBudget {
    /// Off-shell energy reach in units of 1/t_max.
    pub energy_tail: f64,
    /// Gauss order per κ panel (panels obey the cycle budget).
    pub kappa_order: usize,
    pub p1perp_nodes: usize,
    /// Transverse reach as a multiple of the shell transfer scale.
    pub p1perp_reach: f64,
    /// q reach in units of 1/bohr_a.
    pub q_reach: f64,
    pub qz_nodes: usize,
    pub qperp_nodes: usize,
    pub phi_nodes: usize,
}

impl CylQuadBudget {
    /// Production accuracy (acceptance runs).
    pub fn reference() -> Self {
        CylQuadBudget {
            energy_tail: 200.0,
            kappa_order: 16,
            p1perp_nodes: 28,
            p1perp_reach: 25.0,
            q_reach: 4.0,
            qz_nodes: 32,
            qperp_nodes: 24,
            phi_nodes: 12,
        }
    }

    /// Cheap smoke-test accuracy.
    pub fn fast() -> Self {
        CylQuadBudget {
            energy_tail: 60.0,
            kappa_order: 12,
            p1perp_nodes: 16,
            p1perp_reach: 18.0,
            q_reach: 3.0,
            qz_nodes: 16,
            qperp_nodes: 12,
            phi_nodes: 8,
        }
    }
}

/// Precomputed node/weight lists for the reduced five-dimensional grid.
/// Weights carry their jacobians (p₁⊥ and q_⊥ measures, doubled φ).
#[derive(Debug, Clone)]
pub struct CylQuadrature {
    pub(crate) kappa: Vec<(f64, f64)>,
    pub(crate) p1perp: Vec<(f64, f64)>,
    pub(crate) qz: Vec<(f64, f64)>,
    pub(crate) qperp: Vec<(f64, f64)>,
    pub(crate) phi: Vec<(f64, f64)>,
    pub(crate) p_ref: f64,
}

impl CylQuadrature {
    /// Build for a beam/atom pair; `t_max` fixes the oscillation budget of
    /// the longitudinal-transfer axis.
    pub fn build(
        beam: &BeamSpec,
        atom: &TargetAtom,
        budget: &CylQuadBudget,
        t_max: f64,
    ) -> Result<Self> {
        if !(t_max > 0.0) {
            return Err(CoreError::non_positive("t_max", t_max));
        }
        let v = beam.speed();
        let a = atom.bohr_a;
        let me = mass_e_static();
        // Shell transfer scale at q ~ 1/a where the form factor lives;
        // 1/(2 m_e a²) equals E0 for an alkali atom by construction.
        let kappa_char = (atom.e0_nat + 1.0 / (2.0 * me * a * a)) / v;

        let tail = budget.energy_tail / (v * t_max);
        let q_max = budget.q_reach / a;
        let shell_max = (atom.e0_nat
            + q_max * q_max / (2.0 * me)
            + (budget.p1perp_reach * kappa_char).powi(2) / (2.0 * beam.mass))
            / v;
        let kappa_lo = -tail;
        let kappa_hi = shell_max + tail;

        let cycles = v * (kappa_hi - kappa_lo) * t_max / std::f64::consts::TAU;
        let panels = ((cycles / MAX_CYCLES_PER_CELL).ceil() as usize).max(4);
        let rule = GaussRule::new(budget.kappa_order);
        let mut kappa = Vec::with_capacity(panels * budget.kappa_order);
        let step = (kappa_hi - kappa_lo) / panels as f64;
        for i in 0..panels {
            let lo = kappa_lo + step * i as f64;
            for (k, w) in rule.mapped(lo, lo + step) {
                kappa.push((k, w));
            }
        }

        // sinh-mapped transverse transfer, weight includes p⊥·dp⊥.
        let u_max = (budget.p1perp_reach.max(1.2 / (a * kappa_char))).asinh();
        let rule_p = GaussRule::new(budget.p1perp_nodes);
        let p1perp: Vec<(f64, f64)> = rule_p
            .mapped(0.0, u_max)
            .map(|(u, w)| {
                let p = kappa_char * u.sinh();
                let jac = kappa_char * u.cosh();
                (p, w * jac * p)
            })
            .collect();

        let rule_qz = GaussRule::new(budget.qz_nodes);
        let qz: Vec<(f64, f64)> = rule_qz.mapped(-q_max, q_max).collect();

        let rule_qp = GaussRule::new(budget.qperp_nodes);
        let qperp: Vec<(f64, f64)> = rule_qp
            .mapped(0.0, q_max)
            .map(|(q, w)| (q, w * q))
            .collect();

        // Integrand is even in φ: integrate [0, π] and double.
        let rule_phi = GaussRule::new(budget.phi_nodes);
        let phi: Vec<(f64, f64)> = rule_phi
            .mapped(0.0, std::f64::consts::PI)
            .map(|(x, w)| (x, 2.0 * w))
            .collect();

        Ok(CylQuadrature {
            kappa,
            p1perp,
            qz,
            qperp,
            phi,
            p_ref: beam.p_mean[2],
        })
    }

    pub fn outer_len(&self) -> usize {
        self.kappa.len() * self.p1perp.len() * self.qz.len() * self.qperp.len() * self.phi.len()
    }

    fn unravel(&self, mut i: usize) -> (usize, usize, usize, usize, usize) {
        let np = self.phi.len();
        let iphi = i % np;
        i /= np;
        let nqp = self.qperp.len();
        let iqp = i % nqp;
        i /= nqp;
        let nqz = self.qz.len();
        let iqz = i % nqz;
        i /= nqz;
        let npp = self.p1perp.len();
        let ipp = i % npp;
        i /= npp;
        (i, ipp, iqz, iqp, iphi)
    }
}

fn mass_e_static() -> f64 {
    // electron mass in natural units; fixed by CODATA, not overridable
    // through UnitSystem mass tables for the hydrogenic form factor.
    crate::physconst::M_ELECTRON_EV * crate::physconst::EV_TO_INVSEC
        / (crate::physconst::C_CM_PER_S * crate::physconst::C_CM_PER_S)
}

/// ‖ψ₊⁽¹⁾(t)‖² for the δ(p_⊥)·packet beam: the total first-order
/// ionization probability per (2π)⁻² of transverse fluence.
pub fn ionization_probability(
    us: &UnitSystem,
    beam: &BeamSpec,
    atom: &TargetAtom,
    packet: &LongitudinalPacket,
    quad: &CylQuadrature,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(CoreError::non_positive("t", t));
    }
    let e2 = us.e2_natural();
    let me = us.mass_natural(Species::Electron);
    let mass = beam.mass;
    let n = quad.outer_len();
    let total = exec::sum_indexed(n, |i| {
        let (ik, ipp, iqz, iqp, iphi) = quad.unravel(i);
        let (kappa, wk) = quad.kappa[ik];
        let (p1perp, wp) = quad.p1perp[ipp];
        let (qz, wqz) = quad.qz[iqz];
        let (qperp, wqp) = quad.qperp[iqp];
        let (phi, wphi) = quad.phi[iphi];
        let p1z = quad.p_ref - kappa;
        let amp = amplitude_at(e2, atom, mass, me, packet, p1perp, p1z, qz, qperp, phi, t);
        wk * wp * wqz * wqp * wphi * amp.norm_sqr()
    });
    Ok(std::f64::consts::TAU * total)
}

/// Norm growth curve ‖ψ₊(t)‖² over a time list.
#[derive(Debug, Clone)]
pub struct NormCurve {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
}

impl NormCurve {
    pub fn compute(
        us: &UnitSystem,
        beam: &BeamSpec,
        atom: &TargetAtom,
        packet: &LongitudinalPacket,
        quad: &CylQuadrature,
        times: &[f64],
    ) -> Result<Self> {
        let mut norms = Vec::with_capacity(times.len());
        for &t in times {
            norms.push(ionization_probability(us, beam, atom, packet, quad, t)?);
        }
        Ok(NormCurve {
            times: times.to_vec(),
            norms,
        })
    }

    /// Mean slope between two stored samples.
    pub fn slope(&self, i: usize, j: usize) -> f64 {
        (self.norms[j] - self.norms[i]) / (self.times[j] - self.times[i])
    }
}

/// Cross section from the saturated norm: after the packet has fully
/// passed the atom, ‖ψ₊‖² = σ × (2π)⁻² (the transverse fluence of the
/// δ(p_⊥) beam in this normalization), so σ = (2π)²·‖ψ₊‖².
pub fn sigma_from_saturation(
    us: &UnitSystem,
    beam: &BeamSpec,
    atom: &TargetAtom,
    quad: &CylQuadrature,
    t_end: f64,
) -> Result<(f64, f64)> {
    let packet = LongitudinalPacket::gaussian(beam, t_end)?;
    let n_end = ionization_probability(us, beam, atom, &packet, quad, t_end)?;
    let two_pi = std::f64::consts::TAU;
    Ok((n_end * two_pi * two_pi, n_end))
}

/// ψ̂₊⁽¹⁾ sampled on a user grid over (p₁z, p₁⊥, q_z, q_⊥, φ).
///
/// Preconditions: t₁ > 0; the p₁z axis must cover the energy shell to at
/// least ±5/t₁ in energy; axis steps must keep e^{iΔE t₁} within the
/// cycle budget per cell.
pub fn first_order_amplitude(
    us: &UnitSystem,
    beam: &BeamSpec,
    atom: &TargetAtom,
    t1: f64,
    axes: [Axis; 5],
) -> Result<AmplitudeField> {
    if !(t1 > 0.0) {
        return Err(CoreError::non_positive("t1", t1));
    }
    let v = beam.speed();
    let p_shell = beam.p_mean[2] - atom.e0_nat / v;
    let reach = 5.0 / (v * t1);
    let p1z_axis = &axes[0];
    if p1z_axis.min > p_shell - reach || p1z_axis.max() < p_shell + reach {
        return Err(CoreError::Coverage(format!(
            "p1z axis [{:.3e}, {:.3e}] must cover the energy shell {:.3e} ± {:.3e}",
            p1z_axis.min,
            p1z_axis.max(),
            p_shell,
            reach
        )));
    }
    let cycles_per_step = v * p1z_axis.step * t1 / std::f64::consts::TAU;
    if cycles_per_step > MAX_CYCLES_PER_CELL {
        return Err(CoreError::Resolution(format!(
            "p1z step carries {cycles_per_step:.1} phase cycles at t1; refine the axis"
        )));
    }

    let packet = LongitudinalPacket::gaussian(beam, t1)?;
    let e2 = us.e2_natural();
    let me = us.mass_natural(Species::Electron);
    let mass = beam.mass;

    let dims: Vec<usize> = axes.iter().map(|a| a.n).collect();
    let total: usize = dims.iter().product();
    let values = exec::map_indexed(total, |flat| {
        let mut rem = flat;
        let mut idx = [0usize; 5];
        for k in (0..5).rev() {
            idx[k] = rem % dims[k];
            rem /= dims[k];
        }
        let p1z = axes[0].at(idx[0]);
        let p1perp = axes[1].at(idx[1]);
        let qz = axes[2].at(idx[2]);
        let qperp = axes[3].at(idx[3]);
        let phi = axes[4].at(idx[4]);
        amplitude_at(e2, atom, mass, me, &packet, p1perp, p1z, qz, qperp, phi, t1)
    });
    AmplitudeField::new(axes.to_vec(), values, Basis::Momentum, t1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physconst::UnitSystem;

    fn setup() -> (UnitSystem, BeamSpec, TargetAtom) {
        let us = UnitSystem::paper();
        let beam = BeamSpec::alpha_along_z(&us, 1.0e9, Some(2.0e-7)).unwrap();
        let atom = TargetAtom::alkali(&us, [0.0, 0.0, 8.0e-7], 2.0, 1.0e-8).unwrap();
        (us, beam, atom)
    }

    #[test]
    fn packet_is_normalized() {
        let (_us, beam, _atom) = setup();
        let p = LongitudinalPacket::gaussian(&beam, 1.0e-15).unwrap();
        assert!((p.norm_sq() - 1.0).abs() < 1e-9, "norm {}", p.norm_sq());
    }

    #[test]
    fn amplitude_vanishes_linearly_at_small_t() {
        let (us, beam, atom) = setup();
        let atom0 = atom.with_position([0.0; 3]);
        let packet = LongitudinalPacket::gaussian(&beam, 1.0e-18).unwrap();
        let e2 = us.e2_natural();
        let me = us.mass_natural(Species::Electron);
        let p_bar = beam.p_mean[2];
        let kappa = 4.0e6;
        let a1 = amplitude_at(
            e2, &atom0, beam.mass, me, &packet, 2.0e6, p_bar - kappa, 3.0e7, 2.0e7, 0.7, 1.0e-18,
        );
        let a2 = amplitude_at(
            e2, &atom0, beam.mass, me, &packet, 2.0e6, p_bar - kappa, 3.0e7, 2.0e7, 0.7, 2.0e-18,
        );
        assert!(
            (a2.norm() / a1.norm() - 2.0).abs() < 1e-3,
            "ratio {}",
            a2.norm() / a1.norm()
        );
    }

    #[test]
    fn on_shell_growth_matches_static_overlap() {
        // At an exactly on-shell node |amp| = t·|Σ w g K| while the
        // packet still looks time-stationary.
        let (us, beam, atom) = setup();
        let atom0 = atom.with_position([0.0; 3]);
        let packet = LongitudinalPacket::gaussian(&beam, 2.0e-18).unwrap();
        let e2 = us.e2_natural();
        let me = us.mass_natural(Species::Electron);
        let v = beam.speed();
        // q = 0 shell: κ = E0/v at p1perp → 0.
        let kappa = atom0.e0_nat / v;
        let p1z = beam.p_mean[2] - kappa;
        let t = 1.0e-18;
        let amp = amplitude_at(e2, &atom0, beam.mass, me, &packet, 1.0e3, p1z, 0.0, 1.0e3, 0.0, t);
        let mut overlap = Complex64::new(0.0, 0.0);
        for &(pz, w, g) in &packet.nodes {
            let dp = [-1.0e3, 0.0, pz - p1z];
            overlap += born_kernel_unchecked(e2, &atom0, dp, [1.0e3, 0.0, 0.0]) * g * w;
        }
        let expect = overlap.norm() * t;
        assert!(
            (amp.norm() - expect).abs() / expect < 1e-4,
            "amp {} vs t·overlap {}",
            amp.norm(),
            expect
        );
    }

    #[test]
    fn amplitude_is_linear_in_the_packet() {
        let (us, beam, atom) = setup();
        let packet1 = LongitudinalPacket::gaussian(&beam, 1.0e-16).unwrap();
        // second packet: same nodes, shifted envelope
        let packet2 = LongitudinalPacket::from_values(
            packet1
                .nodes
                .iter()
                .map(|&(p, w, v)| (p, w, v * Complex64::new(0.4, 0.1)))
                .collect(),
        );
        let ca = Complex64::new(0.7, -0.2);
        let cb = Complex64::new(-0.3, 0.9);
        let combo = LongitudinalPacket::linear_combination(ca, &packet1, cb, &packet2);
        let e2 = us.e2_natural();
        let me = us.mass_natural(Species::Electron);
        let p1z = beam.p_mean[2] - 5.0e6;
        let t = 1.0e-16;
        let f = |p: &LongitudinalPacket| {
            amplitude_at(e2, &atom, beam.mass, me, p, 3.0e6, p1z, 1.0e7, 2.0e7, 1.1, t)
        };
        let lhs = f(&combo);
        let rhs = ca * f(&packet1) + cb * f(&packet2);
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
    }

    #[test]
    fn norm_grows_then_saturates() {
        let (us, beam, atom) = setup();
        let t_end = 1.6e-15;
        let quad = CylQuadrature::build(&beam, &atom, &CylQuadBudget::fast(), t_end).unwrap();
        let packet = LongitudinalPacket::gaussian(&beam, t_end).unwrap();
        // atom sits at z = 8e-7 cm; passage time ≈ 8e-16 s.
        let early = ionization_probability(&us, &beam, &atom, &packet, &quad, 2.0e-16).unwrap();
        let mid = ionization_probability(&us, &beam, &atom, &packet, &quad, 8.0e-16).unwrap();
        let late = ionization_probability(&us, &beam, &atom, &packet, &quad, 1.4e-15).unwrap();
        let later = ionization_probability(&us, &beam, &atom, &packet, &quad, 1.6e-15).unwrap();
        assert!(early < mid && mid < late, "{early} {mid} {late}");
        // saturation: relative growth over the last stretch is small
        let growth = (later - late) / later;
        assert!(growth.abs() < 0.08, "growth {growth}");
        assert!(later > 0.0);
    }

    #[test]
    fn field_export_checks_coverage() {
        let (us, beam, atom) = setup();
        let p_bar = beam.p_mean[2];
        let bad = [
            Axis::spanning("p1z", p_bar + 1.0e8, p_bar + 2.0e8, 8).unwrap(),
            Axis::new("p1perp", 1.0e3, 1.0e6, 2).unwrap(),
            Axis::spanning("qz", -1.0e7, 1.0e7, 3).unwrap(),
            Axis::new("qperp", 1.0e3, 1.0e7, 2).unwrap(),
            Axis::new("phi", 0.0, 1.0, 2).unwrap(),
        ];
        assert!(matches!(
            first_order_amplitude(&us, &beam, &atom, 1.0e-16, bad),
            Err(CoreError::Coverage(_))
        ));
    }

    #[test]
    fn field_export_small_grid() {
        let (us, beam, atom) = setup();
        let v = beam.speed();
        let t1 = 2.0e-16;
        let p_shell = beam.p_mean[2] - atom.e0_nat / v;
        let reach = 8.0 / (v * t1);
        let axes = [
            Axis::spanning("p1z", p_shell - reach, p_shell + reach, 24).unwrap(),
            Axis::new("p1perp", 1.0e5, 3.0e6, 3).unwrap(),
            Axis::spanning("qz", -2.0e7, 2.0e7, 5).unwrap(),
            Axis::new("qperp", 1.0e5, 1.0e7, 3).unwrap(),
            Axis::new("phi", 0.0, 1.0471975511965976, 3).unwrap(),
        ];
        let field = first_order_amplitude(&us, &beam, &atom, t1, axes).unwrap();
        assert_eq!(field.len(), 24 * 3 * 5 * 3 * 3);
        assert!(field.values().iter().any(|v| v.norm() > 0.0));
    }
}
