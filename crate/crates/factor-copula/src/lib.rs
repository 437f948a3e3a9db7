//! Factor-copula modelling toolkit.
//!
//! This crate implements extended one-factor copulas and their nested,
//! multi-layer generalisation: a latent factor (or a chain of latent layers)
//! links the coordinates through bivariate *linking* copulas, while an *inner*
//! copula captures dependence that remains once the factors are accounted for.
//! The classical one-factor copula is the special case of an independence
//! inner copula with a single layer.
//!
//! Functionality is organised in layers:
//!
//! * [`bicop`] — bivariate copula families with `cdf`/`pdf`/`hfunc`/`hinv`
//!   and Kendall-tau parameter maps;
//! * [`innercop`] — inner (conditional) copula families, factor-dependent
//!   parameter mappings, and latent-factor laws;
//! * [`factor_model`] — the factor-copula model itself: conditional
//!   transforms, densities, distribution functions, marginalisation;
//! * [`quadrature`] — deterministic and Monte-Carlo integration over the unit
//!   cube used by densities and distribution functions;
//! * [`sampling`] — exact simulation of single-layer and nested models;
//! * [`inference`] — pseudo-observations, maximum pseudo-likelihood fitting,
//!   and numerical Fisher information;
//! * [`citest`] — a bootstrap test of conditional independence given the
//!   factor, plus the associated power study and a scan comparing the outer
//!   and inner copulas;
//! * [`modelspec`] — a small sectioned text format describing models, used by
//!   the command-line front end and round-trippable via `parse`/`print`.

pub mod bicop;
pub mod citest;
pub mod error;
pub mod factor_model;
pub mod inference;
pub mod innercop;
pub mod modelspec;
pub mod normal;
pub mod quadrature;
pub mod sampling;
pub mod stats;

pub use error::{FcError, Result};

/// Version of this crate, embedded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
