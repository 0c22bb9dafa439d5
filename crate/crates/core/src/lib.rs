//! Privacy profiles and privacy amplification by subsampling.
//!
//! The crate is organised bottom-up:
//!
//! * [`measure`] and [`divergence`]: finite measures, hockey-stick divergences,
//!   maximal couplings and the advanced joint convexity identity.
//! * [`profiles`]: closed-form, tabulated and empirical privacy profiles plus
//!   group-privacy profiles.
//! * [`amplification`]: amplified `(ε', δ')` bounds for Poisson, without
//!   replacement and with replacement subsampling.
//! * [`oracle`]: exact enumeration of subsample distributions, exact
//!   subsampled divergences, optimal transport and distance-compatibility.
//! * [`mgf`]: privacy loss distributions and the profile/MGF identity.

// `!(x > 0.0)` is the NaN-rejecting form throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplification;
pub mod divergence;
mod error;
pub mod measure;
pub mod mgf;
pub mod numeric;
pub mod oracle;
pub mod profiles;
pub mod quadrature;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{DiscreteMeasure, Outcome};
pub use profiles::{Curve, GroupMode, GroupProfile, PrivacyProfile};
