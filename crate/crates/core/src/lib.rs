//! Desk-scale numerical laboratory for the localization of quantum events.
//!
//! An α-particle crossing a dilute medium ionizes atoms one by one; each
//! ionization is an *event* with an approximate extension in space and time.
//! This crate computes that extension from first-order perturbation theory
//! and the surrounding bookkeeping:
//!
//! - [`physconst`]: the ℏ = 1 (cm, s, eV) unit system used throughout;
//! - [`estimates`]: closed-form order-of-magnitude estimators (classical
//!   transverse range, thermal coherence length, passage time, thermal
//!   packet width);
//! - [`born`]: the first-order ionization matrix element, its gapped
//!   position-space profile, the finite-time amplitude and the golden-rule
//!   rate/cross-section pair;
//! - [`stationary`]: stationary-phase localization of the position-space
//!   amplitude (event widths Δp, Δq, Δt) and its comparison against direct
//!   quadrature;
//! - [`track`]: the event-formation layer — filament decomposition of the
//!   incident packet, event-time mixtures, the two-ionization second-order
//!   amplitude and its factorization check, and many-atom pairing weights;
//! - [`histories`]: Lüders update and the consistency functional for
//!   finite-dimensional history checks;
//! - [`bell`]: local-hidden-variable models, CHSH evaluation and a small
//!   quantum oracle for the violating case;
//! - [`gaussmix`]: the exact algebra of Gaussian mixed-state decompositions
//!   and their non-uniqueness.
//!
//! Heavy grid sweeps are data-parallel through [`exec`]; disabling the
//! default `parallel` feature swaps in sequential loops with identical
//! results (reductions always run in a fixed order).

pub mod bell;
pub mod born;
pub mod error;
pub mod estimates;
pub mod exec;
pub mod field;
pub mod gaussmix;
pub mod histories;
pub mod oned;
pub mod physconst;
pub mod quad;
pub mod scenario;
pub mod stationary;
pub mod track;

pub use error::{CoreError, Result};
