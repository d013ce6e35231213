//! Defect lines through time, their events, eigenvalue velocities, and the
//! lifetimes of the off-plane state of 2×2 fields.

mod lifetime;
mod track;
mod velocity;

pub use lifetime::{is_quaternion_pair, measure_lifetime, measure_lifetime_with, LifetimeOptions, LifetimeRecord};
pub use track::{track, track_with, DefectLine, LineEnd, StepTotals, TopologicalEvent, Track, TrackOptions};
pub use velocity::{velocity_closed_form_n2, velocity_closed_form_n3, velocity_general};
