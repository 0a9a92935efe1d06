//! Forward and inverse solvers for the 1-D wave equation `ε_r(x) u_tt = u_xx`
//! with single-measurement backscattering data.
//!
//! Two inversion methods are provided: [`agcm`], layer stripping in the Laplace
//! pseudo-frequency with tail iterations, and [`glk`], the Gelfand–Levitan–Krein
//! integral equation in the travel-time coordinate. [`forward`] produces synthetic
//! data, [`preprocess`] prepares measured traces and [`harness`] runs comparisons.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agcm;
pub mod config;
pub mod error;
pub mod forward;
pub mod glk;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod preprocess;
pub mod traveltime;
pub mod types;

pub use config::Config;
pub use error::{Error, Result};
pub use traveltime::TravelTimeMap;
pub use types::{Bounds, MediumProfile, SpatialGrid, SpectralSeries, TimeSeries};
