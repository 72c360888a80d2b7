//! Exact geometric phase, quantum-vacuum phase and helicity evolution of
//! photons travelling along a curved optical fiber.
//!
//! The photon polarization obeys i∂ₜ|ψ⟩ = (k̂ × k̂̇)·J|ψ⟩. Its Lewis-Riesenfeld
//! invariant k̂·J is diagonalized by V(t) = exp[βJ₊ − β*J₋], which turns the
//! propagator into V(t)·exp(−iΦ(t)J₃)·V(0)† with Φ(t) = ∫γ̇(1 − cosλ)dt, free
//! of time ordering. The crate computes that solution, checks it against a
//! brute-force time-ordered product, and evaluates the curved-fiber helicity.

pub mod commands;
pub mod config;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod helicity;
pub mod quadrature;
pub mod report;
pub mod spin_algebra;
pub mod spline;
pub mod tolerances;

pub use error::{FiberError, Result};
pub use geometry::{
    effective_field, helix_frequency, trajectory_from_path, EffectiveField, FiberPath, FramePolicy,
    MomentumTrajectory, OmegaConvention, Segment,
};
pub use spin_algebra::{build_rep, build_v, direction_operator, mat_exp, AngularMomentumRep, ComplexMatrix, Spin};
pub use tolerances::Tolerances;
