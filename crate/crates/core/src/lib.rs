//! Confluent Heun functions and the closed-form radial solutions of massless
//! Dirac and Klein–Gordon fields on two Halilsoy–Badawi backgrounds.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod closed_form;
pub mod dirac;
pub mod error;
pub mod figures;
pub mod heun;
pub mod kg;
pub mod ode;
pub mod residual;
pub mod spacetimes;
pub mod verify;

pub use closed_form::{Branch, ClosedForm, PowerFactor};
pub use error::{Error, Result};
pub use heun::{ConfluentHeunParams, EvalResult};
