//! Exact-arithmetic constructions over lattices and symmetric convex
//! bodies: successive minima with witnesses, coverings of `L ∩ K` by
//! linear and affine subspaces, subspace-evasive point sets over finite
//! fields and grids, extremal point-hyperplane incidence configurations,
//! and brute-force oracles that certify everything at desk scale.

pub mod body;
pub mod covering;
pub mod enumerate;
pub mod error;
pub mod evasive;
pub mod flats;
pub mod incidence;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod minima;
pub mod oracle;
pub mod rational;
pub mod rng;

pub use body::{ball_volume_f64, body_form, transform_to_ball, Body};
pub use covering::{build_dual_box, cover_affine, cover_linear, cover_linear_simple, project_along_minima, verify_cover, CoverFlats, CoverResult, DualBox};
pub use enumerate::enumerate_points;
pub use error::{Error, Result};
pub use evasive::{build_affine_evasive, build_flat_evasive, build_linear_evasive, gaussian_binomial, largest_valid_prime, lift_to_body, verify_flat_evasive, EvasiveSet, PrimeField, PrimePolicy};
pub use flats::{canonical_affine_flat, canonical_linear_flat, AffineFlat, LinearFlat};
pub use incidence::{build_incidence_config, check_krr_free, count_incidences, diagonal_exponent, exponent_table, fit_exponent, nondiagonal_exponents, Hyperplane, IncidenceConfig};
pub use lattice::{LatticeBasis, MAX_DIM};
pub use minima::{alpha_beta, check_minkowski2, check_transference, point_count_check, reduce_basis, successive_minima, AlphaBeta, MinimaProfile, PowerVal};
pub use oracle::{candidate_flats, max_evasive_exact, min_cover_exact, CoverInstance, FlatKind, OracleResult};
pub use rational::{parse_rat, Int, Rat};
