//! Anonymous identity-based encryption where a designated manager can learn the recipient.

pub mod aibeir;
pub mod anonymous;
pub mod error;
pub mod games;
mod kdf;
pub mod pairing;
pub mod testable;
pub mod wire;

pub use error::{Error, Result};
pub use pairing::{generate_params, CurveParams, GroupElement, GtElement, Scalar, SecurityLabel};
