//! Phase defects of determinantal wave functions built from evolving random matrices.
//!
//! The central object is `Ψ(x, y; t) = det(M(t) − Λ_ξ)` where `M(t) = M₀ + t·S` and
//! `Λ_ξ = diag(λ, …, λ, λ*, …, λ*)` with `λ = x + iy` in the first `ξ` slots.
//! Zeros of `Ψ` are vortices and anti-vortices; critical points of the phase
//! `Φ = arg Ψ` are saddles, maxima and minima. The crate locates and classifies
//! all of them, follows them through time as defect lines, checks the
//! conservation of total charge `w = Σm` and total index `χ = Σn` at every
//! interaction, and measures the lifetime of the off-plane quaternionic roots
//! that appear between annihilation and re-creation in the 2×2 case.
//!
//! Module map:
//! - [`linalg`]: complex matrices, quaternions, Ginibre sampling, the evolution law.
//! - [`wavefield`]: the determinantal field and the built-in analytic fields.
//! - [`rootfind`]: plane zeros, phase critical points, quaternionic roots.
//! - [`topology`]: winding/index numbers, classification, the defect group.
//! - [`tracker`]: defect lines, events, velocities, transient lifetimes.
//! - [`ensemble`]: the σ-sweep of transient lifetimes.
//! - [`io`]: run configuration and CSV/JSON export.

pub mod ensemble;
pub mod error;
pub mod exec;
pub mod io;
pub mod linalg;
pub mod rootfind;
pub mod topology;
pub mod tracker;
pub mod wavefield;

pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::{ComplexMatrix, EvolutionLaw, Quaternion, C64};
pub use wavefield::{PhaseField, WaveField};
