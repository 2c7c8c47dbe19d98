//! Quantitative checks of the blow-up argument on discrete solutions.

mod blowup;
mod constants;
mod energy;
mod triangle;

pub use blowup::{blowup_report, blowup_verdict, BlowupReport, HatMonitor, InvSSample, Verdict, VerdictReport};
pub use constants::{compute_constants, TheoremConstants};
pub use energy::{energy, trapezoid_between, EnergyObserver, EnergySample};
pub use triangle::{triangle_identity, TriangleReport};
