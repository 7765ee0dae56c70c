//! Ambiguity-free perturbations of matrix paths.
//!
//! [`rip`] replaces the path inside a small window around every collision
//! cluster by the path plus a random smooth bump, redrawing the bump until
//! the eigenvalues inside the window stay apart and follow the requested
//! splice. [`bernstein_fit`], [`detour`] and [`swap_path`] are the
//! standalone building blocks.

mod bernstein;
mod bump;
mod detour;
mod rip;
mod swap;

pub use bernstein::bernstein_fit;
pub use bump::Shape as BumpShape;
pub use detour::detour;
pub use rip::{rip, rip_preserving_endpoints, rip_to_pairing, rip_with, RipOptions, RipResult, RipWindow};
pub use swap::swap_path;
