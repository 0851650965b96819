//! Numerical toolkit for Brascamp-Lieb data and Kakeya-Brascamp-Lieb incidence
//! inequalities.
//!
//! The crate is organised bottom-up:
//!
//! * [`exterior`]: dense exterior algebra over `R^n` and atomic measures on
//!   simple blades modulo sign.
//! * [`bl`]: Brascamp-Lieb data, growth exponents, the closed Loomis-Whitney
//!   form and truncated / Gaussian constant estimation.
//! * [`fremlin`]: the Fremlin projective tensor norm on finite weighted index
//!   sets.
//! * [`geometry`]: direction-measure seminorms, their unit balls, visibility,
//!   John ellipsoids and the volume inequalities built on them.
//! * [`polysurf`]: polynomial zero sets, their normal measures and the
//!   integral-geometry checks.
//! * [`harness`]: affine families, the unit cube grid and both sides of the
//!   Kakeya-Brascamp-Lieb inequalities.

pub mod bl;
pub mod error;
pub mod exterior;
pub mod fremlin;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod polysurf;
pub mod rng;
pub mod suites;

pub use error::{Error, Result};
