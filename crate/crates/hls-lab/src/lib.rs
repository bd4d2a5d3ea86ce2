//! Desk-scale numerical laboratory for the stability theory of critical
//! points of the sharp Hardy-Littlewood-Sobolev (HLS) and fractional Sobolev
//! inequalities, posed on the sphere S^n in the zonal (axially symmetric)
//! sector.
//!
//! The crate implements the spherical fractional integral operator and its
//! inverse, the bubble manifolds with free and critical amplitude,
//! nearest-bubble projections in the non-Hilbert L^{2n/(n+2s)} metric and in
//! the Hilbert H^{-s} metric, stability quotients against the explicit local
//! constant, synthetic Palais-Smale sequences with single-bubble extraction,
//! the duality map between the two Euler-Lagrange equations, and a set of
//! independent brute-force oracles. Every explicit constant, identity, and
//! inequality is checked at desk scale (double precision, seconds to
//! minutes) by the `acceptance` integration suite.
//!
//! Module map:
//! * [`specialfuncs`] -- log-gamma, Gegenbauer polynomials, Gauss-Jacobi rules;
//! * [`sphere`] -- zonal grids, fields, L^p norms, spectral transform;
//! * [`operators`] -- P_2s (spectral and direct kernel), A_2s, deficits,
//!   residual fields;
//! * [`bubbles`] -- sharp constants, bubble manifolds, stereographic transfer;
//! * [`distance`] -- nearest-bubble projections and the comparison lemma;
//! * [`stability`] -- local-expansion slopes, stability quotients, surveys,
//!   Palais-Smale demos, sign-split identities, the duality chain;
//! * [`oracles`] -- Stirling log-gamma, scalar-inequality scans, Richardson
//!   finite differences;
//! * [`cli`] -- verification subcommands and JSON/CSV report emission.

pub mod bubbles;
pub mod cli;
pub mod distance;
pub mod error;
pub mod operators;
pub mod oracles;
pub mod report;
pub mod specialfuncs;
pub mod sphere;
pub mod stability;

pub use error::{Error, Result};
pub use sphere::{Params, ZonalField, ZonalGrid};
