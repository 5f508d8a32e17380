//! Many-atom, many-beam pairing weights and their coherence classes.
//!
//! First order pairs each beam particle with one atom; the state becomes
//! an incoherent sum over pairings with weight W_iρ = ‖Ψ₊(i,ρ)‖². In the
//! reduced model W factorizes into the transverse overlap of the beam
//! tube with the atom's packet times the single-pair ionization
//! probability. At second order, index pairs related by permuting which
//! atom goes with which beam are coherent (the intensity-interferometry
//! pair); repeated beam indices form one track; everything else is
//! incoherent.

use super::TrackScales;
use crate::born::{BeamSpec, LongitudinalPacket, TargetAtom};
use crate::error::{CoreError, Result};
use crate::oned::{norm1, Grid1D, Grid1DBudget, OneDModel};
use crate::physconst::UnitSystem;

/// Atom with a center-of-mass packet spread and transverse position.
#[derive(Debug, Clone, Copy)]
pub struct PairAtom {
    pub atom: TargetAtom,
    /// Center-of-mass packet spread A_i, cm.
    pub spread: f64,
}

/// Beam with a transverse tube position and radius.
#[derive(Debug, Clone, Copy)]
pub struct PairBeam {
    pub beam: BeamSpec,
    /// Tube axis offset in the transverse plane, cm.
    pub axis: [f64; 2],
    /// Gaussian tube radius, cm.
    pub tube_radius: f64,
}

/// Scenario: every beam sees every atom.
#[derive(Debug, Clone)]
pub struct PairingScenario {
    pub atoms: Vec<PairAtom>,
    pub beams: Vec<PairBeam>,
    pub scales: TrackScales,
}

/// Coherence class of a second-order pairing pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceClass {
    /// Same beam index: two events of one track.
    SameTrack,
    /// All four indices distinct: the permuted partner (k,ρ),(i,σ)
    /// interferes coherently.
    CoherentHbt,
    /// Same atom, different beams (or any remaining repetition).
    Incoherent,
}

/// Classify the pair of pairings (i,ρ) then (k,σ).
pub fn classify_pair(first: (usize, usize), second: (usize, usize)) -> CoherenceClass {
    let ((i, rho), (k, sigma)) = (first, second);
    if rho == sigma {
        CoherenceClass::SameTrack
    } else if i != k {
        CoherenceClass::CoherentHbt
    } else {
        CoherenceClass::Incoherent
    }
}

/// One pairing and its weight.
#[derive(Debug, Clone, Copy)]
pub struct PairingWeight {
    pub atom: usize,
    pub beam: usize,
    /// W_iρ = overlap × single-pair probability.
    pub weight: f64,
    pub overlap: f64,
    pub p_single: f64,
}

/// All pairings plus the consistency total.
#[derive(Debug, Clone)]
pub struct PairingTable {
    pub entries: Vec<PairingWeight>,
    /// Σ W_iρ.
    pub total: f64,
    /// Total first-order ionization probability of the combined scenario,
    /// computed in one pass on a finer shared grid.
    pub combined_total: f64,
}

fn transverse_overlap(atom: &PairAtom, beam: &PairBeam) -> f64 {
    let dx = beam.axis[0];
    let dy = beam.axis[1];
    let d2 = dx * dx + dy * dy;
    let width = atom.spread * atom.spread + beam.tube_radius * beam.tube_radius;
    (-d2 / (2.0 * width)).exp()
}

/// Pairing weights for the scenario.
pub fn pairing_weights(
    us: &UnitSystem,
    scenario: &PairingScenario,
    budget: &Grid1DBudget,
) -> Result<PairingTable> {
    if scenario.atoms.is_empty() || scenario.beams.is_empty() {
        return Err(CoreError::Invalid(
            "pairing scenario needs at least one atom and one beam".into(),
        ));
    }
    for (i, a) in scenario.atoms.iter().enumerate() {
        if !(a.spread > 0.0) {
            return Err(CoreError::non_positive("atom spread", a.spread));
        }
        if a.atom.x[2] <= 0.0 {
            return Err(CoreError::Scenario {
                key: format!("atoms[{i}].z"),
                reason: "atoms must sit downstream of the packet launch".into(),
            });
        }
    }

    let mut entries = Vec::new();
    let mut total = 0.0;
    for (rho, pb) in scenario.beams.iter().enumerate() {
        let lc = pb.beam.coherence_length.ok_or_else(|| {
            CoreError::Coverage("pairing weights need finite coherence lengths".into())
        })?;
        if !(pb.tube_radius > 0.0) {
            return Err(CoreError::non_positive("tube_radius", pb.tube_radius));
        }
        let v = pb.beam.speed();
        let z_max = scenario
            .atoms
            .iter()
            .map(|a| a.atom.x[2])
            .fold(0.0f64, f64::max);
        let t_end = (z_max + 5.0 * lc) / v * 1.2;
        let packet = LongitudinalPacket::gaussian(&pb.beam, t_end)?;
        // packet normalization is part of the model contract
        let pnorm = packet.norm_sq();
        if (pnorm - 1.0).abs() > 1e-6 {
            return Err(CoreError::InvalidModel(format!(
                "beam packet norm {pnorm} != 1"
            )));
        }
        for (i, pa) in scenario.atoms.iter().enumerate() {
            let model = OneDModel::new(us, &pb.beam, &pa.atom);
            let grid = Grid1D::build(&model, pb.beam.p_mean[2], t_end, budget)?;
            let p_single = norm1(&model, &packet, pa.atom.x[2], &grid, t_end);
            let overlap = transverse_overlap(pa, pb);
            let weight = overlap * p_single;
            total += weight;
            entries.push(PairingWeight {
                atom: i,
                beam: rho,
                weight,
                overlap,
                p_single,
            });
        }
    }

    // Combined pass on a finer grid: final states of different pairings
    // are orthogonal, so the scenario total is the sum of per-pairing
    // norms; recomputing it with different quadrature makes the
    // reduced-model consistency check non-trivial.
    let fine = Grid1DBudget {
        energy_tail: budget.energy_tail * 1.5,
        mu_reach: budget.mu_reach + 1.0,
        q_reach: budget.q_reach + 0.5,
        p1_order: budget.p1_order + 4,
        q1_nodes: budget.q1_nodes + 8,
    };
    let mut combined_total = 0.0;
    for pb in &scenario.beams {
        let lc = pb.beam.coherence_length.expect("checked above");
        let v = pb.beam.speed();
        let z_max = scenario
            .atoms
            .iter()
            .map(|a| a.atom.x[2])
            .fold(0.0f64, f64::max);
        let t_end = (z_max + 5.0 * lc) / v * 1.2;
        let packet = LongitudinalPacket::gaussian(&pb.beam, t_end)?;
        for pa in &scenario.atoms {
            let model = OneDModel::new(us, &pb.beam, &pa.atom);
            let grid = Grid1D::build(&model, pb.beam.p_mean[2], t_end, &fine)?;
            combined_total +=
                transverse_overlap(pa, pb) * norm1(&model, &packet, pa.atom.x[2], &grid, t_end);
        }
    }

    Ok(PairingTable {
        entries,
        total,
        combined_total,
    })
}
