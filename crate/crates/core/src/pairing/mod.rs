//! Symmetric pairing group: field arithmetic, the supersingular curve `y² = x³ + x`, and
//! the distorted reduced Tate pairing.

mod curve;
mod field;
mod fq2;
mod params;
mod tate;

pub use curve::{GroupElement, GtElement, Scalar, MAX_HASH_ATTEMPTS};
pub use params::{
    generate_params, is_probable_prime, CurveParams, SecurityLabel, MAX_SUBGROUP_BITS,
    MIN_SUBGROUP_BITS,
};
