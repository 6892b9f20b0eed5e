use std::fmt;
use std::sync::Arc;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::curve::{Curve, GroupElement};
use super::field::{PrimeField, MAX_LIMBS};
use crate::error::{Error, Result};
use crate::wire::{ObjectKind, Reader, Writer};

/// Smallest subgroup size accepted by [`generate_params`].
pub const MIN_SUBGROUP_BITS: usize = 8;
/// Largest subgroup size that still leaves room for the cofactor in the limb budget.
pub const MAX_SUBGROUP_BITS: usize = 64 * MAX_LIMBS - 32;

const PRIME_CANDIDATES: usize = 256;
const COFACTOR_CANDIDATES: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SecurityLabel {
    Toy,
    Desk,
    Demo,
}

impl SecurityLabel {
    fn for_subgroup_bits(bits: u64) -> Self {
        match bits {
            0..=31 => SecurityLabel::Toy,
            32..=191 => SecurityLabel::Desk,
            _ => SecurityLabel::Demo,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SecurityLabel::Toy => "toy",
            SecurityLabel::Desk => "desk",
            SecurityLabel::Demo => "demo",
        }
    }
}

impl fmt::Display for SecurityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub(crate) struct ParamsInner {
    pub(crate) q: BigUint,
    pub(crate) p: BigUint,
    pub(crate) cofactor: BigUint,
    pub(crate) label: SecurityLabel,
    pub(crate) curve: Curve,
    pub(crate) generator: GroupElement,
}

/// Supersingular curve `y² = x³ + x` over `F_q` with a subgroup of prime order `p`.
///
/// Cheap to clone; all derived tables live behind an `Arc`.
#[derive(Clone)]
pub struct CurveParams(pub(crate) Arc<ParamsInner>);

impl PartialEq for CurveParams {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.q == other.0.q
                && self.0.p == other.0.p
                && self.0.cofactor == other.0.cofactor)
    }
}

impl Eq for CurveParams {}

impl fmt::Debug for CurveParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurveParams")
            .field("q", &self.0.q)
            .field("p", &self.0.p)
            .field("cofactor", &self.0.cofactor)
            .field("label", &self.0.label)
            .finish()
    }
}

impl CurveParams {
    /// Validates `(q, p, cofactor)` and precomputes the field and curve tables.
    pub fn new(q: BigUint, p: BigUint, cofactor: BigUint) -> Result<Self> {
        if &q % 4u8 != BigUint::from(3u8) {
            return Err(Error::InvalidParameter("q must be 3 mod 4".into()));
        }
        if p < BigUint::from(5u8) || !is_probable_prime(&p) {
            return Err(Error::InvalidParameter(
                "p must be a prime of at least 5".into(),
            ));
        }
        if &p * &cofactor != &q + 1u8 {
            return Err(Error::InvalidParameter(
                "p * cofactor must equal q + 1".into(),
            ));
        }
        if cofactor.is_multiple_of(&p) {
            return Err(Error::InvalidParameter(
                "p must not divide the cofactor".into(),
            ));
        }
        if !is_probable_prime(&q) {
            return Err(Error::InvalidParameter("q must be prime".into()));
        }
        let field = PrimeField::new(&q)?;
        let curve = Curve::new(field, &p, &cofactor);
        let generator = curve.hash_to_group(b"AIBE-GENERATOR", b"symmetric pairing group")?;
        let label = SecurityLabel::for_subgroup_bits(p.bits());
        Ok(CurveParams(Arc::new(ParamsInner {
            q,
            p,
            cofactor,
            label,
            curve,
            generator,
        })))
    }

    pub fn q(&self) -> &BigUint {
        &self.0.q
    }

    /// Prime order of the pairing subgroup.
    pub fn p(&self) -> &BigUint {
        &self.0.p
    }

    pub fn cofactor(&self) -> &BigUint {
        &self.0.cofactor
    }

    /// Byte width of one base-field coordinate.
    pub fn field_width(&self) -> usize {
        self.0.curve.field.width()
    }

    /// Byte width of an encoded exponent.
    pub fn scalar_width(&self) -> usize {
        (self.0.p.bits() as usize).div_ceil(8)
    }

    pub fn security_label(&self) -> SecurityLabel {
        self.0.label
    }

    /// Fixed generator of the order-`p` subgroup, derived by hashing a constant label.
    pub fn generator(&self) -> GroupElement {
        self.0.generator
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new(ObjectKind::CurveParams);
        w.field(&self.0.q.to_bytes_be());
        w.field(&self.0.p.to_bytes_be());
        w.field(&self.0.cofactor.to_bytes_be());
        w.finish()
            .expect("parameter integers fit a u16 length prefix")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, ObjectKind::CurveParams)?;
        let params = Self::read_fields(&mut r)?;
        r.finish()?;
        Ok(params)
    }

    pub(crate) fn read_fields(r: &mut Reader<'_>) -> Result<Self> {
        let q = BigUint::from_bytes_be(r.field()?);
        let p = BigUint::from_bytes_be(r.field()?);
        let cofactor = BigUint::from_bytes_be(r.field()?);
        Self::new(q, p, cofactor)
    }

    /// Short hex fingerprint of the serialized parameters.
    pub fn digest(&self) -> String {
        hex::encode(&Sha256::digest(self.to_bytes())[..8])
    }
}

/// Deterministically searches for parameters whose subgroup order has `subgroup_bits` bits.
///
/// A random prime `p` of the requested size is drawn from a seeded stream, then cofactors
/// `c = 4k` are tried until `q = c·p − 1` is prime; `c ≡ 0 mod 4` forces `q ≡ 3 mod 4`.
pub fn generate_params(subgroup_bits: usize, seed: &[u8]) -> Result<CurveParams> {
    if !(MIN_SUBGROUP_BITS..=MAX_SUBGROUP_BITS).contains(&subgroup_bits) {
        return Err(Error::InvalidParameter(format!(
            "subgroup_bits must lie in {MIN_SUBGROUP_BITS}..={MAX_SUBGROUP_BITS}, got {subgroup_bits}"
        )));
    }
    let mut hasher = Sha256::new();
    hasher.update(b"AIBE-PARAMS");
    hasher.update((subgroup_bits as u32).to_be_bytes());
    hasher.update(seed);
    let mut rng = ChaCha20Rng::from_seed(hasher.finalize().into());

    let mut tried = 0usize;
    for _ in 0..PRIME_CANDIDATES {
        let mut p = rng.gen_biguint(subgroup_bits as u64);
        p.set_bit(subgroup_bits as u64 - 1, true);
        p.set_bit(0, true);
        tried += 1;
        if !is_probable_prime(&p) {
            continue;
        }
        for k in 1..=COFACTOR_CANDIDATES {
            tried += 1;
            let cofactor = BigUint::from(4 * k);
            if cofactor.is_multiple_of(&p) {
                continue;
            }
            let q = &cofactor * &p - 1u8;
            if is_probable_prime(&q) {
                return CurveParams::new(q, p, cofactor);
            }
        }
    }
    Err(Error::SearchExhausted(tried))
}

const SMALL_PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Miller–Rabin with the first 24 primes as bases (deterministic below 2^81, probabilistic above).
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u8);
    if n < &two {
        return false;
    }
    for &sp in &SMALL_PRIMES {
        let sp = BigUint::from(sp);
        if n == &sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u8;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
