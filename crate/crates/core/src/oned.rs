//! One-dimensional longitudinal reduction of the ionization problem.
//!
//! Track-level operations (filament mixtures, two-ionization amplitudes,
//! pairing weights) and the stationary-phase comparison run in a reduced
//! model with all motion along the beam axis: the transverse structure is
//! frozen at the transfer scale μ, regularizing the Coulomb factor, and
//! the bound electron becomes a 1D exponential orbital with the same
//! length parameter as its 3D parent:
//!
//! ```text
//! M₁(κ, q; Z) = (2e²/(κ² + μ²)) · φ̃(q − κ) · e^{iκZ},
//! φ̃(s) = sqrt(2a/π)/(1 + a²s²),   ∫ φ̃² ds = 1,
//! μ = sqrt(2 m_e E0) (the minimal-transfer scale; μ·a = 1 for an
//! alkali atom).
//! ```
//!
//! Probabilities in this model are internally consistent; only ratios and
//! shapes are compared against the three-dimensional machinery.

use num_complex::Complex64;

use crate::born::{BeamSpec, LongitudinalPacket, TargetAtom};
use crate::error::{CoreError, Result};
use crate::exec;
use crate::physconst::{Species, UnitSystem};
use crate::quad::{GaussRule, MAX_CYCLES_PER_CELL};

use crate::born::time_factor;

/// Reduced 1D model parameters (all natural units).
#[derive(Debug, Clone, Copy)]
pub struct OneDModel {
    pub mass_alpha: f64,
    pub mass_e: f64,
    /// Binding energy.
    pub e0: f64,
    /// Coulomb constant.
    pub e2: f64,
    /// Frozen transverse transfer scale.
    pub mu: f64,
    /// Orbital length parameter, cm.
    pub a: f64,
}

impl OneDModel {
    pub fn new(us: &UnitSystem, beam: &BeamSpec, atom: &TargetAtom) -> Self {
        let mass_e = us.mass_natural(Species::Electron);
        OneDModel {
            mass_alpha: beam.mass,
            mass_e,
            e0: atom.e0_nat,
            e2: us.e2_natural(),
            mu: (2.0 * mass_e * atom.e0_nat).sqrt(),
            a: atom.bohr_a,
        }
    }

    /// Normalized 1D orbital momentum transform.
    pub fn orbital(&self, s: f64) -> f64 {
        (2.0 * self.a / std::f64::consts::PI).sqrt() / (1.0 + self.a * self.a * s * s)
    }

    /// Reduced matrix element with the positional phase of the target at z.
    #[inline]
    pub fn m1(&self, kappa: f64, q: f64, z_atom: f64) -> Complex64 {
        let coulomb = 2.0 * self.e2 / (kappa * kappa + self.mu * self.mu);
        Complex64::from_polar(coulomb * self.orbital(q - kappa), kappa * z_atom)
    }

    /// Beam energy including the bound electron: p²/2m_α − E0.
    pub fn e_beam(&self, pz: f64) -> f64 {
        pz * pz / (2.0 * self.mass_alpha) - self.e0
    }

    /// One-ion final energy: p₁²/2m_α + q₁²/2m_e.
    pub fn e1(&self, p1: f64, q1: f64) -> f64 {
        p1 * p1 / (2.0 * self.mass_alpha) + q1 * q1 / (2.0 * self.mass_e)
    }

    /// First-order amplitude over the window [t_a, t_b].
    pub fn amp1(
        &self,
        packet: &LongitudinalPacket,
        z_atom: f64,
        p1: f64,
        q1: f64,
        t_a: f64,
        t_b: f64,
    ) -> Complex64 {
        let e1 = self.e1(p1, q1);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(pz, w, g) in &packet.nodes {
            let de = e1 - self.e_beam(pz);
            let t = if t_a == 0.0 {
                time_factor(de, t_b)
            } else {
                Complex64::from_polar(1.0, de * t_a) * time_factor(de, t_b - t_a)
            };
            acc += self.m1(pz - p1, q1, z_atom) * g * t * w;
        }
        Complex64::new(acc.im, -acc.re)
    }
}

/// Quadrature grid over the one-ion final state (p₁, q₁).
#[derive(Debug, Clone)]
pub struct Grid1D {
    pub p1: Vec<(f64, f64)>,
    pub q1: Vec<(f64, f64)>,
}

/// Node-count budget for [`Grid1D`].
#[derive(Debug, Clone, Copy)]
pub struct Grid1DBudget {
    /// Off-shell energy reach in units of 1/t_max.
    pub energy_tail: f64,
    /// Momentum reach around the shell in units of μ.
    pub mu_reach: f64,
    /// q reach in units of 1/a.
    pub q_reach: f64,
    pub p1_order: usize,
    pub q1_nodes: usize,
}

impl Default for Grid1DBudget {
    fn default() -> Self {
        Grid1DBudget {
            energy_tail: 150.0,
            mu_reach: 6.0,
            q_reach: 5.0,
            p1_order: 16,
            q1_nodes: 48,
        }
    }
}

impl Grid1D {
    /// Final-state grid for a beam with mean momentum p̄: p₁ spans the
    /// shell neighborhood plus the finite-time energy tail, with panels
    /// respecting the oscillation budget at t_max.
    pub fn build(model: &OneDModel, p_bar: f64, t_max: f64, budget: &Grid1DBudget) -> Result<Self> {
        if !(t_max > 0.0) {
            return Err(CoreError::non_positive("t_max", t_max));
        }
        let v = p_bar / model.mass_alpha;
        let tail = budget.energy_tail / (v * t_max);
        let reach = budget.mu_reach * model.mu;
        let p_lo = p_bar - reach - tail;
        let p_hi = p_bar + reach + tail;
        let cycles = v * (p_hi - p_lo) * t_max / std::f64::consts::TAU;
        let panels = ((cycles / MAX_CYCLES_PER_CELL).ceil() as usize).max(4);
        let rule = GaussRule::new(budget.p1_order);
        let mut p1 = Vec::with_capacity(panels * budget.p1_order);
        let step = (p_hi - p_lo) / panels as f64;
        for i in 0..panels {
            let lo = p_lo + step * i as f64;
            for node in rule.mapped(lo, lo + step) {
                p1.push(node);
            }
        }
        let q_max = budget.q_reach / model.a;
        let rule_q = GaussRule::new(budget.q1_nodes);
        let q1: Vec<(f64, f64)> = rule_q.mapped(-q_max, q_max).collect();
        Ok(Grid1D { p1, q1 })
    }

    pub fn len(&self) -> usize {
        self.p1.len() * self.q1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p1.is_empty() || self.q1.is_empty()
    }
}

/// ‖ψ₊⁽¹⁾(t)‖² in the reduced model.
pub fn norm1(
    model: &OneDModel,
    packet: &LongitudinalPacket,
    z_atom: f64,
    grid: &Grid1D,
    t: f64,
) -> f64 {
    let nq = grid.q1.len();
    exec::sum_indexed(grid.len(), |i| {
        let (ip, iq) = (i / nq, i % nq);
        let (p1, wp) = grid.p1[ip];
        let (q1, wq) = grid.q1[iq];
        wp * wq * model.amp1(packet, z_atom, p1, q1, 0.0, t).norm_sqr()
    })
}

/// Normalized q₁-marginal of |ψ₊⁽¹⁾(t)|² on the grid's q nodes.
pub fn q_marginal(
    model: &OneDModel,
    packet: &LongitudinalPacket,
    z_atom: f64,
    grid: &Grid1D,
    t: f64,
) -> Vec<f64> {
    let nq = grid.q1.len();
    let values = exec::map_indexed(grid.len(), |i| {
        let (ip, iq) = (i / nq, i % nq);
        let (p1, wp) = grid.p1[ip];
        let (q1, _wq) = grid.q1[iq];
        (iq, wp * model.amp1(packet, z_atom, p1, q1, 0.0, t).norm_sqr())
    });
    let mut marginal = vec![0.0; nq];
    for (iq, v) in values {
        marginal[iq] += v;
    }
    let total: f64 = marginal
        .iter()
        .zip(&grid.q1)
        .map(|(m, (_, w))| m * w)
        .sum();
    for m in &mut marginal {
        *m /= total;
    }
    marginal
}

/// Normalized on-shell reference marginal |M₁(κ_s(q), q)|²/v over the same
/// q nodes: the distribution the time-dependent route saturates to.
pub fn shell_marginal(model: &OneDModel, p_bar: f64, grid: &Grid1D) -> Vec<f64> {
    let v = p_bar / model.mass_alpha;
    let mut reference: Vec<f64> = grid
        .q1
        .iter()
        .map(|&(q1, _)| {
            let r = q1 * q1 / (2.0 * model.mass_e) + model.e0;
            let disc = (model.mass_alpha * v).powi(2) - 2.0 * model.mass_alpha * r;
            if disc <= 0.0 {
                return 0.0;
            }
            let kappa_s = model.mass_alpha * v - disc.sqrt();
            let jac = 1.0 / (v - kappa_s / model.mass_alpha);
            model.m1(kappa_s, q1, 0.0).norm_sqr() * jac
        })
        .collect();
    let total: f64 = reference
        .iter()
        .zip(&grid.q1)
        .map(|(m, (_, w))| m * w)
        .sum();
    for m in &mut reference {
        *m /= total;
    }
    reference
}

/// Weighted L¹ distance between two normalized marginals on the grid.
pub fn marginal_distance(grid: &Grid1D, a: &[f64], b: &[f64]) -> f64 {
    0.5 * grid
        .q1
        .iter()
        .zip(a.iter().zip(b))
        .map(|((_, w), (x, y))| w * (x - y).abs())
        .sum::<f64>()
}

/// Stable ∫₀^t e^{i·de2·τ}·(e^{i·de1·τ} − 1)/(i·de1) dτ.
///
/// This is the nested two-step time integral: de1 is the first-step
/// off-shellness, de2 the second. Closed form with guarded branches for
/// both small arguments.
pub fn nested_time_factor(de1: f64, de2: f64, t: f64) -> Complex64 {
    if (de1 * t).abs() > 1e-4 {
        (time_factor(de1 + de2, t) - time_factor(de2, t)) / Complex64::new(0.0, de1)
    } else {
        // → ∫ τ e^{i·de2·τ} dτ, itself guarded
        let x = de2 * t;
        if x.abs() < 1e-4 {
            Complex64::new(0.5 * t * t, x * t * t / 3.0)
        } else {
            let eix = Complex64::from_polar(1.0, x);
            let ia = Complex64::new(0.0, de2);
            eix * t / ia + (Complex64::new(1.0, 0.0) - eix) / (ia * ia)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::born::TransverseProfile;

    fn setup() -> (UnitSystem, BeamSpec, TargetAtom, OneDModel) {
        let us = UnitSystem::paper();
        let beam = BeamSpec::alpha_along_z(&us, 1.0e9, Some(6.0e-7)).unwrap();
        let atom = TargetAtom::alkali(&us, [0.0, 0.0, 0.0], 2.0, 1.0e-8).unwrap();
        let model = OneDModel::new(&us, &beam, &atom);
        (us, beam, atom, model)
    }

    #[test]
    fn orbital_normalized() {
        let (_, _, _, m) = setup();
        let rule = GaussRule::new(64);
        let total: f64 = rule
            .mapped(-80.0 / m.a, 80.0 / m.a)
            .map(|(s, w)| w * m.orbital(s) * m.orbital(s))
            .sum();
        assert!((total - 1.0).abs() < 1e-4, "norm {total}");
    }

    #[test]
    fn mu_equals_inverse_a_for_alkali() {
        let (_, _, _, m) = setup();
        assert!((m.mu * m.a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amp1_windows_compose() {
        // [0,t1] + [t1,t2] = [0,t2] exactly.
        let (_, beam, _, model) = setup();
        let packet = LongitudinalPacket::gaussian(&beam, 1.0e-15).unwrap();
        let p1 = beam.p_mean[2] - 4.0e6;
        let q1 = 2.0e7;
        let (ta, tb) = (4.0e-16, 9.0e-16);
        let full = model.amp1(&packet, 0.0, p1, q1, 0.0, tb);
        let first = model.amp1(&packet, 0.0, p1, q1, 0.0, ta);
        let second = model.amp1(&packet, 0.0, p1, q1, ta, tb);
        assert!((full - first - second).norm() < 1e-12 * full.norm());
    }

    #[test]
    fn norm_saturates_after_passage() {
        let (_, _, _, model) = setup();
        let us = UnitSystem::paper();
        // packet centered at z=0 at t=0; atom downstream at 4 l_c
        let lc = 6.0e-7;
        let beam = BeamSpec::alpha_along_z(&us, 1.0e9, Some(lc)).unwrap();
        let atom_z = 4.0 * lc;
        let t_end = 2.0 * atom_z / 1.0e9;
        let packet = LongitudinalPacket::gaussian(&beam, t_end).unwrap();
        let grid = Grid1D::build(&model, beam.p_mean[2], t_end, &Grid1DBudget::default()).unwrap();
        let early = norm1(&model, &packet, atom_z, &grid, 0.3 * t_end);
        let mid = norm1(&model, &packet, atom_z, &grid, 0.55 * t_end);
        let late = norm1(&model, &packet, atom_z, &grid, 0.9 * t_end);
        let later = norm1(&model, &packet, atom_z, &grid, t_end);
        assert!(early < mid && mid < late);
        assert!(((later - late) / later).abs() < 0.05, "tail growth {}", (later - late) / later);
    }

    #[test]
    fn saturated_marginal_matches_shell_reference() {
        let (_, _, _, model) = setup();
        let us = UnitSystem::paper();
        let lc = 6.0e-7;
        let beam = BeamSpec::alpha_along_z(&us, 1.0e9, Some(lc)).unwrap();
        let atom_z = 4.0 * lc;
        let t_end = 2.0 * atom_z / 1.0e9;
        let packet = LongitudinalPacket::gaussian(&beam, t_end).unwrap();
        let grid = Grid1D::build(&model, beam.p_mean[2], t_end, &Grid1DBudget::default()).unwrap();
        let marg = q_marginal(&model, &packet, atom_z, &grid, t_end);
        let reference = shell_marginal(&model, beam.p_mean[2], &grid);
        let dist = marginal_distance(&grid, &marg, &reference);
        assert!(dist < 0.05, "L1 distance {dist}");
    }

    #[test]
    fn nested_factor_reduces_to_derivative_limit() {
        // de1 → 0 branch must agree with a tiny-but-finite de1.
        let t = 1.0e-15;
        let de2 = 3.0e15;
        let small = nested_time_factor(1.0e10, de2, t);
        let tiny = nested_time_factor(1.0e7, de2, t);
        assert!(
            (small - tiny).norm() < 1e-3 * small.norm(),
            "{small} vs {tiny}"
        );
        // and the full branch is continuous across the threshold
        let just_above = nested_time_factor(1.2e11, de2, t);
        let just_below = nested_time_factor(0.8e11, de2, t);
        assert!((just_above - just_below).norm() < 2e-2 * just_above.norm());
    }

    #[test]
    fn plane_wave_profile_is_not_used_here() {
        // Reduced ops need a packet; unbounded coherence length errors.
        let us = UnitSystem::paper();
        let beam = BeamSpec::alpha_along_z(&us, 1.0e9, None)
            .unwrap()
            .with_profile(TransverseProfile::PlaneWave { current_density: 1.0 });
        assert!(LongitudinalPacket::gaussian(&beam, 1.0e-15).is_err());
    }
}
