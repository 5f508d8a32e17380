//! Filament decomposition of the incident packet and the event-time
//! mixture it generates.
//!
//! The longitudinal envelope is sliced into windows of one filament
//! length. Each windowed piece passes the atom at its own mean time and
//! ionizes independently; dropping the cross-filament interference is the
//! declared decoherence step, and the dropped amount is reported as the
//! overlap correction rather than silently ignored.
//!
//! Window shapes: half-overlapping Hann windows form an exact partition
//! of unity of the amplitude (smooth momentum tails, right choice for
//! distribution-shape checks) but neighboring slices are not orthogonal,
//! so their incoherent weights undercount the total by the reported
//! correction. Hard cuts are orthogonal — weights add to the total up to
//! genuine transients — at the price of ringing momentum tails.

use num_complex::Complex64;

use super::TrackScales;
use crate::born::{BeamSpec, LongitudinalPacket, TargetAtom};
use crate::error::{CoreError, Result};
use crate::oned::{
    marginal_distance, norm1, q_marginal, shell_marginal, Grid1D, Grid1DBudget, OneDModel,
};
use crate::physconst::UnitSystem;

/// Filament window shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    /// cos² windows, 50% overlap: exact amplitude partition of unity.
    #[default]
    Hann,
    /// Disjoint indicator windows: exact initial orthogonality.
    Hard,
}

/// Options for the decomposition.
#[derive(Debug, Clone, Copy)]
pub struct FilamentOptions {
    pub window: WindowKind,
    pub budget: Grid1DBudget,
    /// Evolution end time; geometric default (full passage) when None.
    pub t_end: Option<f64>,
}

impl Default for FilamentOptions {
    fn default() -> Self {
        FilamentOptions {
            window: WindowKind::Hann,
            budget: Grid1DBudget::default(),
            t_end: None,
        }
    }
}

/// One filament of the decomposition.
#[derive(Debug, Clone)]
pub struct Filament {
    pub index: usize,
    /// Initial window center along the beam, cm.
    pub center_z: f64,
    /// Mean passage time of this slice at the atom.
    pub mean_time: f64,
    /// ‖Ψ₊₍ᵢ₎‖² at t_end.
    pub weight: f64,
    /// Scattered-packet center at t_end: v·(t_end − t̄ᵢ) relative to the
    /// atom.
    pub scattered_center: f64,
    pub packet: LongitudinalPacket,
}

/// The filament mixture and its bookkeeping.
#[derive(Debug, Clone)]
pub struct FilamentDecomposition {
    pub filaments: Vec<Filament>,
    pub tau: f64,
    pub filament_length: f64,
    /// Σᵢ ‖Ψ₊₍ᵢ₎‖² — the incoherent mixture total.
    pub weight_sum: f64,
    /// ‖Σᵢ KΨᵢ‖² − Σᵢ‖KΨᵢ‖²: the interference dropped by the mixture.
    pub interference_correction: f64,
    /// weight_sum + interference_correction (= coherent total, identity).
    pub total_probability: f64,
    /// ‖ψ₊⁽¹⁾‖² of the original unsliced packet.
    pub undecomposed_norm: f64,
    /// Relative L² error of Σψᵢ against the original packet on the nodes.
    pub reconstruction_error: f64,
    /// l_c ≤ filament length: nothing to slice.
    pub degenerate_single: bool,
    pub t_end: f64,
}

/// Hann window transform H(s) = π²·sin(sh)/(s(π²−s²h²)), with removable
/// singularities at s = 0 and s = ±π/h.
fn hann_transform(s: f64, h: f64) -> f64 {
    let sh = s * h;
    if sh.abs() < 1e-8 {
        return h;
    }
    let denom = std::f64::consts::PI * std::f64::consts::PI - sh * sh;
    if denom.abs() < 1e-8 {
        return 0.5 * h;
    }
    std::f64::consts::PI * std::f64::consts::PI * sh.sin() / (s * denom)
}

/// Hard window transform over [−h/2, h/2]: 2 sin(sh/2)/s.
fn hard_transform(s: f64, h: f64) -> f64 {
    if (s * h).abs() < 1e-8 {
        return h;
    }
    2.0 * (0.5 * s * h).sin() / s
}

/// Windowed packet ψᵢ(p) = (1/2π)∫ g(p′)·ŵ(p−p′)·e^{−i(p−p′)zᵢ} dp′ on
/// the parent's nodes.
fn windowed_packet(
    parent: &LongitudinalPacket,
    center: f64,
    h: f64,
    kind: WindowKind,
) -> LongitudinalPacket {
    let transform = |s: f64| match kind {
        WindowKind::Hann => hann_transform(s, h),
        WindowKind::Hard => hard_transform(s, h),
    };
    let nodes: Vec<(f64, f64, Complex64)> = parent
        .nodes
        .iter()
        .map(|&(p, w, _)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(pp, wp, g) in &parent.nodes {
                let s = p - pp;
                acc += g * Complex64::from_polar(wp * transform(s), -s * center);
            }
            (p, w, acc / (2.0 * std::f64::consts::PI))
        })
        .collect();
    LongitudinalPacket::from_values(nodes)
}

/// Slice the beam packet into filaments and evolve each through the
/// first-order dynamics at the given atom.
pub fn filament_mixture(
    us: &UnitSystem,
    beam: &BeamSpec,
    atom: &TargetAtom,
    scales: &TrackScales,
    opts: &FilamentOptions,
) -> Result<FilamentDecomposition> {
    let lc = beam.coherence_length.ok_or_else(|| {
        CoreError::Coverage("filament slicing needs a finite coherence length".into())
    })?;
    let model = OneDModel::new(us, beam, atom);
    let v = beam.speed();
    let z_atom = atom.x[2];
    if z_atom <= 4.0 * lc {
        return Err(CoreError::Coverage(format!(
            "atom at z = {z_atom:.3e} must sit downstream of the packet support (≥ 4·l_c)"
        )));
    }
    let h = scales.filament_length;
    let t_end = opts
        .t_end
        .unwrap_or_else(|| (z_atom + 4.0 * lc + 2.0 * h) / v * 1.15);
    let parent = LongitudinalPacket::gaussian(beam, t_end)?;
    let grid = Grid1D::build(&model, beam.p_mean[2], t_end, &opts.budget)?;

    let undecomposed_norm = norm1(&model, &parent, z_atom, &grid, t_end);

    let degenerate = lc <= h;
    let centers: Vec<f64> = if degenerate {
        vec![0.0]
    } else {
        let spacing = match opts.window {
            WindowKind::Hann => h,
            WindowKind::Hard => h,
        };
        let reach = 4.0 * lc + h;
        let n_side = (reach / spacing).ceil() as i64;
        (-n_side..=n_side).map(|i| i as f64 * spacing).collect()
    };

    let mut filaments = Vec::with_capacity(centers.len());
    let mut sum_nodes: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); parent.nodes.len()];
    for (index, &center) in centers.iter().enumerate() {
        let packet = if degenerate {
            parent.clone()
        } else {
            windowed_packet(&parent, center, h, opts.window)
        };
        for (acc, &(_, _, v)) in sum_nodes.iter_mut().zip(&packet.nodes) {
            *acc += v;
        }
        let weight = norm1(&model, &packet, z_atom, &grid, t_end);
        let mean_time = (z_atom - center) / v;
        filaments.push(Filament {
            index,
            center_z: center,
            mean_time,
            weight,
            scattered_center: v * (t_end - mean_time),
            packet,
        });
    }

    // Reconstruction error of Σψᵢ against the parent.
    let (mut num, mut den) = (0.0, 0.0);
    for (acc, &(_, w, g)) in sum_nodes.iter().zip(&parent.nodes) {
        num += w * (acc - g).norm_sqr();
        den += w * g.norm_sqr();
    }
    let reconstruction_error = (num / den).sqrt();

    // Coherent total of the reconstructed sum.
    let sum_packet = LongitudinalPacket::from_values(
        parent
            .nodes
            .iter()
            .zip(&sum_nodes)
            .map(|(&(p, w, _), &v)| (p, w, v))
            .collect(),
    );
    let coherent_total = if degenerate {
        undecomposed_norm
    } else {
        norm1(&model, &sum_packet, z_atom, &grid, t_end)
    };
    let weight_sum: f64 = filaments.iter().map(|f| f.weight).sum();

    Ok(FilamentDecomposition {
        filaments,
        tau: scales.tau,
        filament_length: h,
        weight_sum,
        interference_correction: coherent_total - weight_sum,
        total_probability: coherent_total,
        undecomposed_norm,
        reconstruction_error,
        degenerate_single: degenerate,
        t_end,
    })
}

/// Normalized event-time histogram, or the stationary rate mode for an
/// unbounded coherence length.
#[derive(Debug, Clone)]
pub struct EventTimeDistribution {
    /// (t̄ᵢ, probability), total mass 1. Empty in rate mode.
    pub entries: Vec<(f64, f64)>,
    /// Reduced-model ionization rate when the beam is a plane wave: the
    /// flow is stationary and no normalizable histogram exists.
    pub rate_mode: Option<f64>,
}

/// Event-time mixture of a decomposition, or the rate mode for an
/// unbounded l_c.
pub fn event_time_distribution(
    us: &UnitSystem,
    beam: &BeamSpec,
    atom: &TargetAtom,
    scales: &TrackScales,
    opts: &FilamentOptions,
) -> Result<EventTimeDistribution> {
    if beam.coherence_length.is_none() {
        // Stationary flow: report the reduced-model shell rate instead.
        let model = OneDModel::new(us, beam, atom);
        let grid = Grid1D::build(&model, beam.p_mean[2], 1.0e-15, &opts.budget)?;
        let v = beam.speed();
        let rate: f64 = grid
            .q1
            .iter()
            .map(|&(q1, w)| {
                let r = q1 * q1 / (2.0 * model.mass_e) + model.e0;
                let disc = (model.mass_alpha * v).powi(2) - 2.0 * model.mass_alpha * r;
                if disc <= 0.0 {
                    return 0.0;
                }
                let kappa_s = model.mass_alpha * v - disc.sqrt();
                let jac = 1.0 / (v - kappa_s / model.mass_alpha);
                w * model.m1(kappa_s, q1, 0.0).norm_sqr() * jac
            })
            .sum::<f64>()
            * std::f64::consts::TAU;
        return Ok(EventTimeDistribution {
            entries: Vec::new(),
            rate_mode: Some(rate),
        });
    }
    let fd = filament_mixture(us, beam, atom, scales, opts)?;
    let total = fd.weight_sum;
    let entries = fd
        .filaments
        .iter()
        .map(|f| (f.mean_time, f.weight / total))
        .collect();
    Ok(EventTimeDistribution {
        entries,
        rate_mode: None,
    })
}

/// Distance of the evolved momentum distribution from the on-shell
/// M-shape.
#[derive(Debug, Clone, Copy)]
pub struct SaturationReport {
    /// L¹ distance between the normalized q-marginal and the shell
    /// reference.
    pub l1_distance: f64,
    pub lc_over_dlong: f64,
}

/// Saturation of the final momentum distribution: for l_c well above the
/// event length the evolved q-marginal reaches the M-shape; short packets
/// smear the shell and deviate toward the semiclassical profile.
pub fn momentum_saturation(
    us: &UnitSystem,
    beam: &BeamSpec,
    atom: &TargetAtom,
    scales: &TrackScales,
    budget: &Grid1DBudget,
) -> Result<SaturationReport> {
    let lc = beam.coherence_length.ok_or_else(|| {
        CoreError::Coverage("saturation check needs a finite coherence length".into())
    })?;
    let model = OneDModel::new(us, beam, atom);
    let v = beam.speed();
    let z_atom = atom.x[2];
    let t_end = (z_atom + 4.0 * lc) / v * 1.3;
    let packet = LongitudinalPacket::gaussian(beam, t_end)?;
    let grid = Grid1D::build(&model, beam.p_mean[2], t_end, budget)?;
    let marg = q_marginal(&model, &packet, z_atom, &grid, t_end);
    let reference = shell_marginal(&model, beam.p_mean[2], &grid);
    Ok(SaturationReport {
        l1_distance: marginal_distance(&grid, &marg, &reference),
        lc_over_dlong: lc / scales.d_long,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(lc: f64) -> (UnitSystem, BeamSpec, TargetAtom, TrackScales) {
        let us = UnitSystem::paper();
        let beam = BeamSpec::alpha_along_z(&us, 1.0e9, Some(lc)).unwrap();
        let atom = TargetAtom::alkali(&us, [0.0, 0.0, 5.0 * lc], 2.0, 1.0e-8).unwrap();
        // representative measured d_tr for the 2 eV alkali
        let scales = TrackScales::from_measured(1.0 / atom.bohr_a, 4.0e-8, 3.0, 5.0, 1.0e9);
        (us, beam, atom, scales)
    }

    fn fast_opts(window: WindowKind) -> FilamentOptions {
        FilamentOptions {
            window,
            budget: Grid1DBudget {
                energy_tail: 80.0,
                mu_reach: 5.0,
                q_reach: 4.0,
                p1_order: 12,
                q1_nodes: 24,
            },
            t_end: None,
        }
    }

    #[test]
    fn hann_windows_partition_unity() {
        // Σᵢ wᵢ(z) = 1 ⇒ Σᵢ ψᵢ = ψ exactly; check via reconstruction.
        let (us, beam, atom, scales) = setup(8.0e-7);
        let fd = filament_mixture(&us, &beam, &atom, &scales, &fast_opts(WindowKind::Hann)).unwrap();
        assert!(!fd.degenerate_single);
        assert!(fd.filaments.len() >= 3);
        assert!(
            fd.reconstruction_error < 1e-6,
            "reconstruction {}",
            fd.reconstruction_error
        );
        // identity: total = Σwᵢ + interference, and matches the parent
        let identity = (fd.weight_sum + fd.interference_correction - fd.total_probability).abs();
        assert!(identity < 1e-12 * fd.total_probability);
        assert!(
            (fd.total_probability - fd.undecomposed_norm).abs() / fd.undecomposed_norm < 1e-3,
            "coherent total {} vs undecomposed {}",
            fd.total_probability,
            fd.undecomposed_norm
        );
    }

    #[test]
    fn hard_windows_are_incoherent() {
        // Disjoint slices: the interference correction is a genuine
        // transient, far below the Hann overlap.
        let (us, beam, atom, scales) = setup(8.0e-7);
        let hard = filament_mixture(&us, &beam, &atom, &scales, &fast_opts(WindowKind::Hard)).unwrap();
        let hann = filament_mixture(&us, &beam, &atom, &scales, &fast_opts(WindowKind::Hann)).unwrap();
        let rel_hard = hard.interference_correction.abs() / hard.total_probability;
        let rel_hann = hann.interference_correction.abs() / hann.total_probability;
        assert!(rel_hard < 0.02, "hard-window interference {rel_hard}");
        assert!(rel_hard < 0.2 * rel_hann, "hard {rel_hard} vs hann {rel_hann}");
    }

    #[test]
    fn mean_times_decrease_along_the_beam() {
        let (us, beam, atom, scales) = setup(8.0e-7);
        let fd = filament_mixture(&us, &beam, &atom, &scales, &fast_opts(WindowKind::Hann)).unwrap();
        for w in fd.filaments.windows(2) {
            assert!(w[1].center_z > w[0].center_z);
            assert!(w[1].mean_time < w[0].mean_time);
        }
        // z₁ᵢ ≈ v(t_end − t̄ᵢ) by construction; spread within τ·v of the
        // geometric value
        for f in &fd.filaments {
            let recon = 1.0e9 * (fd.t_end - f.mean_time);
            assert!((f.scattered_center - recon).abs() <= fd.tau * 1.0e9);
        }
    }

    #[test]
    fn short_coherence_is_degenerate() {
        let (us, _, _, scales) = setup(8.0e-7);
        let lc = 0.5 * scales.filament_length;
        let beam = BeamSpec::alpha_along_z(&us, 1.0e9, Some(lc)).unwrap();
        let atom = TargetAtom::alkali(&us, [0.0, 0.0, 8.0 * scales.filament_length], 2.0, 1.0e-8)
            .unwrap();
        let fd = filament_mixture(&us, &beam, &atom, &scales, &fast_opts(WindowKind::Hann)).unwrap();
        assert!(fd.degenerate_single);
        assert_eq!(fd.filaments.len(), 1);
        assert!((fd.total_probability - fd.undecomposed_norm).abs() < 1e-12);
    }

    #[test]
    fn event_times_normalize_and_spread_uniformly() {
        let (us, beam, atom, scales) = setup(8.0e-7);
        let etd =
            event_time_distribution(&us, &beam, &atom, &scales, &fast_opts(WindowKind::Hann))
                .unwrap();
        assert!(etd.rate_mode.is_none());
        let total: f64 = etd.entries.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // symmetric beam envelope → symmetric histogram around the center
        let mean_t: f64 = etd.entries.iter().map(|(t, p)| t * p).sum();
        let center = (atom.x[2]) / 1.0e9;
        assert!(
            (mean_t - center).abs() < scales.tau,
            "mean {mean_t} vs center {center}"
        );
    }

    #[test]
    fn plane_wave_switches_to_rate_mode() {
        let (us, _, atom, scales) = setup(8.0e-7);
        let beam = BeamSpec::alpha_along_z(&us, 1.0e9, None).unwrap();
        let etd =
            event_time_distribution(&us, &beam, &atom, &scales, &fast_opts(WindowKind::Hann))
                .unwrap();
        assert!(etd.entries.is_empty());
        assert!(etd.rate_mode.unwrap() > 0.0);
    }

    #[test]
    fn per_filament_marginals_unchanged_by_the_mixture() {
        // The mixture stores each filament's packet; evolving it in
        // isolation reproduces the stored weight exactly.
        let (us, beam, atom, scales) = setup(8.0e-7);
        let opts = fast_opts(WindowKind::Hann);
        let fd = filament_mixture(&us, &beam, &atom, &scales, &opts).unwrap();
        let model = OneDModel::new(&us, &beam, &atom);
        let grid = Grid1D::build(&model, beam.p_mean[2], fd.t_end, &opts.budget).unwrap();
        let f = &fd.filaments[fd.filaments.len() / 2];
        let isolated = norm1(&model, &f.packet, atom.x[2], &grid, fd.t_end);
        assert!((isolated - f.weight).abs() < 1e-12 * f.weight);
    }

    #[test]
    fn saturation_improves_with_coherence_length() {
        let (us, _, _, scales) = setup(8.0e-7);
        let budget = fast_opts(WindowKind::Hann).budget;
        // long packet: beyond the saturation threshold
        let lc_long = 1.2 * scales.filament_length;
        let beam_long = BeamSpec::alpha_along_z(&us, 1.0e9, Some(lc_long)).unwrap();
        let atom_long =
            TargetAtom::alkali(&us, [0.0, 0.0, 5.0 * lc_long], 2.0, 1.0e-8).unwrap();
        let long = momentum_saturation(&us, &beam_long, &atom_long, &scales, &budget).unwrap();
        // short packet: below one event length
        let lc_short = 0.8 * scales.d_long;
        let beam_short = BeamSpec::alpha_along_z(&us, 1.0e9, Some(lc_short)).unwrap();
        let atom_short =
            TargetAtom::alkali(&us, [0.0, 0.0, 6.0 * scales.filament_length], 2.0, 1.0e-8)
                .unwrap();
        let short = momentum_saturation(&us, &beam_short, &atom_short, &scales, &budget).unwrap();
        assert!(long.l1_distance < 0.05, "saturated distance {}", long.l1_distance);
        assert!(
            short.l1_distance > long.l1_distance,
            "short {} vs long {}",
            short.l1_distance,
            long.l1_distance
        );
        assert!(short.l1_distance > 0.05, "short-packet distance {}", short.l1_distance);
    }
}
