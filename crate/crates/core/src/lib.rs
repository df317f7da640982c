//! Solar production classification toolkit.
//!
//! The crate covers the whole modelling path for hourly PV data: a
//! timestamp-indexed frame with CSV ingestion ([`timeseries`]), the
//! preprocessing operators that turn it into supervised windows
//! ([`preprocess`]), EDA statistics and plot-data emission ([`analytics`]),
//! a synthetic weather/PV generator ([`synth`]), three classifiers built from
//! first principles ([`models`]) and sliding-window temporal validation with
//! the usual classification metrics ([`evaluation`]). [`pipeline`] wires the
//! stages together from a declarative configuration.

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod error;
pub mod evaluation;
pub mod models;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod synth;
pub mod timeseries;

pub use error::{Error, Result};
