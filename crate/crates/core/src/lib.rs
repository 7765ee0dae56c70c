//! Eigenvalue paths of parameterized complex matrices.
//!
//! A [`MatrixPath`] maps `α ∈ [0, 1]` to a square complex matrix. The
//! [`tracker`] follows its eigenvalues, reports collisions, and the remaining
//! modules enumerate eigenpairings, transform paths, classify the 2×2 convex
//! case in closed form, build collision-free perturbations, and mirror all of
//! it for monic polynomial paths through companion matrices.

pub mod config;
pub mod construct;
pub mod error;
pub mod matrix;
pub mod pairings;
pub mod polypaths;
pub mod path;
pub mod spectra;
pub mod tracker;
pub mod twobytwo;
pub mod types;

pub use config::TrackConfig;
pub use error::{Error, Result};
pub use matrix::{CMatrix, ComplexScalar};
pub use num_complex::Complex64;
pub use path::{evaluate, sup_distance, uniform_grid, Basis, Builtin, MatrixPath, PathEval, RealFn};
pub use spectra::{char_poly, discriminant_path_2x2, eigenvalues, poly_roots, MonicPoly};
pub use tracker::{classify_ambiguity, match_spectra, step_bound, splice_witness_experiment, track, Tracked};
pub use types::{Ambiguity, AmbiguityReport, Cluster, EigenPathSet, Eigenpairing, Spectrum};
pub use pairings::{convex_reduction_check, enumerate_pairings, pairing_from_paths, pairings_of, PairingSet, ReductionReport};
pub use tracker::bottleneck_assign;
pub use twobytwo::{classify, reduce, Canonical2x2, PairingVerdict, Verdict};
pub use construct::{bernstein_fit, detour, rip, rip_preserving_endpoints, rip_to_pairing, rip_with, swap_path, RipOptions, RipResult};
pub use polypaths::{companion, companion_path, rip_poly, track_roots, track_roots_direct, PolyPath, PolyRipResult};
