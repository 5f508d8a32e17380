//! Two successive ionizations: the nested second-order amplitude and its
//! factorization into event × conditional event.
//!
//! Nested (exact at second order):
//!
//! ```text
//! ψ̂₊₊⁽²⁾(p₂,q₂,q₁,t₂) = ∫₀^{t₂} dt₁ ∫dp₁ M₂(p₂−p₁,q₂) e^{iΔE₂t₁} ψ̂₊⁽¹⁾(p₁,q₁,t₁)
//! ```
//!
//! with the t₁ integral analytic per node (see
//! [`crate::oned::nested_time_factor`]). Factorized: freeze ψ̂₊⁽¹⁾ at its
//! asymptotic value t_as (first event completed), normalize it, and treat
//! the second step as an independent first-order process over
//! [t_as, t₂]. Valid when the second molecule sits many event lengths
//! downstream; the route declares its own error 5·d_long/L (capped), and
//! the breakdown test expects the disagreement to exceed the declaration
//! once the molecules are only a couple of event lengths apart.

use num_complex::Complex64;

use super::TrackScales;
use crate::born::{BeamSpec, LongitudinalPacket, TargetAtom};
use crate::error::{CoreError, Result};
use crate::exec;
use crate::oned::{nested_time_factor, norm1, Grid1D, Grid1DBudget, OneDModel};
use crate::physconst::UnitSystem;
use crate::quad::{GaussRule, MAX_CYCLES_PER_CELL};

/// Two-ionization setup along the beam axis.
#[derive(Debug, Clone)]
pub struct SecondOrderProblem {
    pub beam: BeamSpec,
    /// First atom; its z position fixes the first event.
    pub atom1: TargetAtom,
    /// Separation L = Z₂ − Z₁ > 0, cm.
    pub separation: f64,
    /// Final time.
    pub t2: f64,
    pub scales: TrackScales,
}

/// Probabilities from the two routes plus diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct SecondOrderOutcome {
    pub p_nested: f64,
    pub p_factorized: f64,
    /// First-event probability at the freeze time.
    pub p_first: f64,
    /// Conditional second-event probability from the normalized
    /// emanating wave.
    pub p_conditional: f64,
    /// ∫|u|² of the normalized conditional input; 1 by construction.
    pub conditional_norm: f64,
    /// Self-declared relative error of the factorized route.
    pub declared_error: f64,
    pub relative_disagreement: f64,
    /// t₂ too small for the events to complete.
    pub regime_warning: bool,
    pub t_freeze: f64,
}

struct Axes {
    p_nodes: Vec<(f64, f64)>,
    q1_nodes: Vec<(f64, f64)>,
    q2_nodes: Vec<(f64, f64)>,
}

fn build_axes(
    model: &OneDModel,
    p_bar: f64,
    t2: f64,
    z2: f64,
    budget: &Grid1DBudget,
) -> Axes {
    let v = p_bar / model.mass_alpha;
    let tail = budget.energy_tail / (v * t2);
    let reach = budget.mu_reach * model.mu;
    let p_lo = p_bar - reach - tail;
    let p_hi = p_bar + reach + tail;
    // The second-event position enters as e^{−ip₁·Z₂}; panels must hold
    // both that phase and the evolution phase within the cycle budget.
    let rate = z2 + v * t2;
    let cycles = rate * (p_hi - p_lo) / std::f64::consts::TAU;
    let panels = ((cycles / MAX_CYCLES_PER_CELL).ceil() as usize).max(4);
    let rule = GaussRule::new(budget.p1_order);
    let mut p_nodes = Vec::with_capacity(panels * budget.p1_order);
    let step = (p_hi - p_lo) / panels as f64;
    for i in 0..panels {
        let lo = p_lo + step * i as f64;
        p_nodes.extend(rule.mapped(lo, lo + step));
    }
    let q_max = budget.q_reach / model.a;
    let rule_q = GaussRule::new(budget.q1_nodes);
    let q1_nodes: Vec<(f64, f64)> = rule_q.mapped(-q_max, q_max).collect();
    let q2_nodes = q1_nodes.clone();
    Axes {
        p_nodes,
        q1_nodes,
        q2_nodes,
    }
}

/// Evaluate both routes. The probability is Σ over (q₁, p₂, q₂) of
/// |amp₂|²; the global e^{ip₂Z₂} phase is dropped (it cancels in the
/// modulus), leaving e^{−ip₁Z₂} inside the p₁ sum.
pub fn second_order_probabilities(
    us: &UnitSystem,
    problem: &SecondOrderProblem,
    budget: &Grid1DBudget,
) -> Result<SecondOrderOutcome> {
    if !(problem.separation > 0.0) {
        return Err(CoreError::non_positive("separation", problem.separation));
    }
    let beam = &problem.beam;
    let atom1 = &problem.atom1;
    let model = OneDModel::new(us, beam, atom1);
    let v = beam.speed();
    let p_bar = beam.p_mean[2];
    let z1 = atom1.x[2];
    let z2 = z1 + problem.separation;
    let t2 = problem.t2;
    let lc = beam.coherence_length.ok_or_else(|| {
        CoreError::Coverage("second-order run needs a finite coherence length".into())
    })?;

    let regime_warning = v * t2 < z2 + problem.scales.filament_length;

    let packet = LongitudinalPacket::gaussian(beam, t2)?;
    let axes = build_axes(&model, p_bar, t2, z2, budget);

    // ── Nested route ────────────────────────────────────────────────
    let np = axes.p_nodes.len();
    let nq1 = axes.q1_nodes.len();
    let nq2 = axes.q2_nodes.len();
    let outer = nq1 * np * nq2;
    let e0 = model.e0;
    let p_nested = exec::sum_indexed(outer, |i| {
            let mut rem = i;
            let iq2 = rem % nq2;
            rem /= nq2;
            let ip2 = rem % np;
            rem /= np;
            let iq1 = rem;
            let (q1, wq1) = axes.q1_nodes[iq1];
            let (p2, wp2) = axes.p_nodes[ip2];
            let (q2, wq2) = axes.q2_nodes[iq2];
            let e1_of = |p1: f64| model.e1(p1, q1) - e0; // E₁tot with atom2 bound
            let e2tot = model.e1(p2, q2) + q1 * q1 / (2.0 * model.mass_e);
            let mut amp = Complex64::new(0.0, 0.0);
            for &(p1, wp1) in &axes.p_nodes {
                let m2 = model.m1(p2 - p1, q2, 0.0);
                let de2 = e2tot - e1_of(p1);
                // inner first step: Σ_pz g·M₁·NTF
                let mut inner = Complex64::new(0.0, 0.0);
                for &(pz, wz, g) in &packet.nodes {
                    let de1 = e1_of(p1) - (model.e_beam(pz) - e0);
                    inner += model.m1(pz - p1, q1, z1)
                        * g
                        * nested_time_factor(de1, de2, t2)
                        * wz;
                }
                amp += m2 * Complex64::from_polar(wp1, -p1 * z2) * inner;
        }
        wq1 * wp2 * wq2 * amp.norm_sqr()
    });

    // ── Factorized route ────────────────────────────────────────────
    // Freeze time: first event completed (packet fully past Z₁).
    let t_freeze = (z1 + 4.0 * lc + problem.scales.filament_length) / v;
    if t_freeze >= t2 {
        return Err(CoreError::Coverage(format!(
            "t2 = {t2:.3e} s leaves no window after the first event completes at {t_freeze:.3e} s"
        )));
    }
    let grid1 = Grid1D::build(&model, p_bar, t2, budget)?;
    let p_first = norm1(&model, &packet, z1, &grid1, t_freeze);

    // Normalized emanating wave on the (p₁, q₁) axes.
    let inv_sqrt = 1.0 / p_first.sqrt();
    let u: Vec<Complex64> = exec::map_indexed(np * nq1, |i| {
        let (ip, iq) = (i / nq1, i % nq1);
        let (p1, _) = axes.p_nodes[ip];
        let (q1, _) = axes.q1_nodes[iq];
        model.amp1(&packet, z1, p1, q1, 0.0, t_freeze) * inv_sqrt
    });
    let conditional_norm: f64 = (0..np * nq1)
        .map(|i| {
            let (ip, iq) = (i / nq1, i % nq1);
            axes.p_nodes[ip].1 * axes.q1_nodes[iq].1 * u[i].norm_sqr()
        })
        .sum();

    let p_conditional = exec::sum_indexed(outer, |i| {
        let mut rem = i;
        let iq2 = rem % nq2;
        rem /= nq2;
        let ip2 = rem % np;
        rem /= np;
        let iq1 = rem;
        let (q1, wq1) = axes.q1_nodes[iq1];
        let (p2, wp2) = axes.p_nodes[ip2];
        let (q2, wq2) = axes.q2_nodes[iq2];
        let e2tot = model.e1(p2, q2) + q1 * q1 / (2.0 * model.mass_e);
        let mut amp = Complex64::new(0.0, 0.0);
        for (ip1, &(p1, wp1)) in axes.p_nodes.iter().enumerate() {
            let de2 = e2tot - (model.e1(p1, q1) - e0);
            let t_fac = Complex64::from_polar(1.0, de2 * t_freeze)
                * crate::born::time_factor(de2, t2 - t_freeze);
            amp += model.m1(p2 - p1, q2, 0.0)
                * Complex64::from_polar(wp1, -p1 * z2)
                * u[ip1 * nq1 + iq1]
                * t_fac;
        }
        wq1 * wp2 * wq2 * amp.norm_sqr()
    });
    let p_factorized = p_first * p_conditional;

    let declared_error = (problem.scales.filament_length / problem.separation).min(0.9);
    let relative_disagreement = (p_factorized - p_nested).abs() / p_nested.max(1e-300);

    Ok(SecondOrderOutcome {
        p_nested,
        p_factorized,
        p_first,
        p_conditional,
        conditional_norm,
        declared_error,
        relative_disagreement,
        regime_warning,
        t_freeze,
    })
}
