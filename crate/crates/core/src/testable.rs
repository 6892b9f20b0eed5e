//! Waters identity-based encryption with a public `Test` predicate.
//!
//! A ciphertext splits into an identity part `c0 = (g^t, (u′∏u_i)^t)`, which carries the
//! recipient but nothing about the message, and a message part `c1`, which carries the
//! message but nothing about the recipient. `tibe_test` works on `c0` alone.
//!
//! Besides the native mode (messages in `G_T`) there is a byte mode where `c1` is the
//! plaintext XORed with a SHAKE256 stream keyed by `e(g1, g2)^t`.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::kdf;
use crate::pairing::{CurveParams, GroupElement, GtElement, Scalar};
use crate::wire::{ObjectKind, Reader, Writer};

pub const DEFAULT_IDENTITY_BITS: usize = 128;
pub const MAX_IDENTITY_BITS: usize = 1024;
/// Largest byte-mode plaintext.
pub const MAX_BYTE_MESSAGE: usize = u16::MAX as usize;

const MODE_NATIVE: u8 = 0x00;
const MODE_BYTES: u8 = 0x01;

/// An `n`-bit identity string.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitIdentity {
    bits: Vec<bool>,
}

impl BitIdentity {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitIdentity { bits }
    }

    /// Maps an arbitrary identity string to `n` bits: the first `n` bits (MSB first) of
    /// `SHAKE256("TIBE-ID" ‖ id)`. Distinct strings collide with probability about `2^-n`.
    pub fn from_identity(id: &[u8], n: usize) -> Self {
        let mut digest = vec![0u8; n.div_ceil(8)];
        kdf::expand(b"TIBE-ID", &[id], &mut digest);
        let bits = (0..n)
            .map(|i| (digest[i / 8] >> (7 - i % 8)) & 1 == 1)
            .collect();
        BitIdentity { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// The 1-based positions set to one.
    pub fn index_set(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WatersPublicKey {
    params: CurveParams,
    g: GroupElement,
    g1: GroupElement,
    g2: GroupElement,
    u_prime: GroupElement,
    u_vec: Vec<GroupElement>,
    /// `e(g1, g2)`, recomputed on construction.
    blinding_base: GtElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WatersMasterKey {
    pub g2_alpha: GroupElement,
    /// Kept only so tests can check the definitional relations.
    pub alpha: Option<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WatersUserKey {
    pub d1: GroupElement,
    pub d2: GroupElement,
}

/// `c0 = (C2, C3) = (g^t, (u′∏u_i)^t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdentityPart {
    pub randomizer: GroupElement,
    pub identity_term: GroupElement,
}

/// `c1`, the message-carrying part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MessagePart {
    /// `e(g1, g2)^t · M`
    Native(GtElement),
    /// plaintext ⊕ KDF(`e(g1, g2)^t`)
    Masked(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Plaintext {
    Native(GtElement),
    Bytes(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WatersCiphertext {
    pub c0: IdentityPart,
    pub c1: MessagePart,
}

impl WatersPublicKey {
    fn assemble(
        params: CurveParams,
        g: GroupElement,
        g1: GroupElement,
        g2: GroupElement,
        u_prime: GroupElement,
        u_vec: Vec<GroupElement>,
    ) -> Self {
        let blinding_base = params.pairing(&g1, &g2);
        WatersPublicKey {
            params,
            g,
            g1,
            g2,
            u_prime,
            u_vec,
            blinding_base,
        }
    }

    pub fn params(&self) -> &CurveParams {
        &self.params
    }

    pub fn g(&self) -> &GroupElement {
        &self.g
    }

    pub fn g1(&self) -> &GroupElement {
        &self.g1
    }

    pub fn g2(&self) -> &GroupElement {
        &self.g2
    }

    pub fn u_prime(&self) -> &GroupElement {
        &self.u_prime
    }

    pub fn u_vec(&self) -> &[GroupElement] {
        &self.u_vec
    }

    /// Identity bit length `n`.
    pub fn identity_bits(&self) -> usize {
        self.u_vec.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.params;
        let mut w = Writer::new(ObjectKind::WatersPublicKey);
        w.field(&p.to_bytes());
        for e in [&self.g, &self.g1, &self.g2, &self.u_prime] {
            w.field(&p.serialize_g(e));
        }
        w.field(&(self.u_vec.len() as u16).to_be_bytes());
        for u in &self.u_vec {
            w.field(&p.serialize_g(u));
        }
        w.finish().expect("public key fields fit u16 lengths")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, ObjectKind::WatersPublicKey)?;
        let params = CurveParams::from_bytes(r.field()?)?;
        let point = |r: &mut Reader<'_>| params.deserialize_g(r.field()?);
        let g = point(&mut r)?;
        let g1 = point(&mut r)?;
        let g2 = point(&mut r)?;
        let u_prime = point(&mut r)?;
        let n_field = r.field()?;
        if n_field.len() != 2 {
            return Err(Error::framing("identity length field must be 2 bytes"));
        }
        let n = u16::from_be_bytes([n_field[0], n_field[1]]) as usize;
        if n == 0 || n > MAX_IDENTITY_BITS {
            return Err(Error::framing(format!("identity length {n} out of range")));
        }
        let u_vec = (0..n).map(|_| point(&mut r)).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        if g.is_identity() {
            return Err(Error::framing("generator is the identity"));
        }
        Ok(Self::assemble(params, g, g1, g2, u_prime, u_vec))
    }
}

impl WatersMasterKey {
    /// Encodes `g2^α`, and `α` itself when `include_alpha` is set.
    pub fn to_bytes(&self, params: &CurveParams, include_alpha: bool) -> Vec<u8> {
        let mut w = Writer::new(ObjectKind::WatersMasterKey);
        w.field(&params.serialize_g(&self.g2_alpha));
        match (&self.alpha, include_alpha) {
            (Some(a), true) => w.field(&params.serialize_scalar(a)),
            _ => w.field(&[]),
        }
        w.finish().expect("master key fields fit u16 lengths")
    }

    pub fn from_bytes(bytes: &[u8], params: &CurveParams) -> Result<Self> {
        let mut r = Reader::new(bytes, ObjectKind::WatersMasterKey)?;
        let g2_alpha = params.deserialize_g(r.field()?)?;
        let alpha_bytes = r.field()?;
        let alpha = if alpha_bytes.is_empty() {
            None
        } else {
            Some(params.deserialize_scalar(alpha_bytes)?)
        };
        r.finish()?;
        Ok(WatersMasterKey { g2_alpha, alpha })
    }
}

impl WatersUserKey {
    pub fn to_bytes(&self, params: &CurveParams) -> Vec<u8> {
        let mut w = Writer::new(ObjectKind::WatersUserKey);
        w.field(&params.serialize_g(&self.d1));
        w.field(&params.serialize_g(&self.d2));
        w.finish().expect("user key fields fit u16 lengths")
    }

    pub fn from_bytes(bytes: &[u8], params: &CurveParams) -> Result<Self> {
        let mut r = Reader::new(bytes, ObjectKind::WatersUserKey)?;
        let d1 = params.deserialize_g(r.field()?)?;
        let d2 = params.deserialize_g(r.field()?)?;
        r.finish()?;
        Ok(WatersUserKey { d1, d2 })
    }
}

impl IdentityPart {
    /// `serialize_g(C2) ‖ serialize_g(C3)`.
    pub fn to_bytes(&self, params: &CurveParams) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 * params.point_len());
        params.write_g(&self.randomizer, &mut out);
        params.write_g(&self.identity_term, &mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &CurveParams) -> Result<Self> {
        let (randomizer, rest) = params.split_g(bytes)?;
        let (identity_term, rest) = params.split_g(rest)?;
        if !rest.is_empty() {
            return Err(Error::MalformedLength {
                expected: bytes.len() - rest.len(),
                found: bytes.len(),
            });
        }
        Ok(IdentityPart {
            randomizer,
            identity_term,
        })
    }
}

impl MessagePart {
    /// Byte-mode wire form `u16 length ‖ mask`; native parts have no standalone encoding.
    pub fn masked_to_bytes(mask: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 + mask.len());
        out.extend_from_slice(&(mask.len() as u16).to_be_bytes());
        out.extend_from_slice(mask);
        out
    }

    pub fn masked_from_bytes(bytes: &[u8]) -> Result<Vec<u8>> {
        let mut r = Reader::bare(bytes);
        let mask = r.field()?.to_vec();
        r.finish()?;
        Ok(mask)
    }
}

impl WatersCiphertext {
    pub fn to_bytes(&self, params: &CurveParams) -> Vec<u8> {
        let mut w = Writer::new(ObjectKind::WatersCiphertext);
        w.field(&params.serialize_g(&self.c0.randomizer));
        w.field(&params.serialize_g(&self.c0.identity_term));
        match &self.c1 {
            MessagePart::Native(m) => {
                w.field(&[MODE_NATIVE]);
                w.field(&params.serialize_gt(m));
            }
            MessagePart::Masked(mask) => {
                w.field(&[MODE_BYTES]);
                w.field(mask);
            }
        }
        w.finish()
            .expect("byte messages are bounded by MAX_BYTE_MESSAGE")
    }

    pub fn from_bytes(bytes: &[u8], params: &CurveParams) -> Result<Self> {
        let mut r = Reader::new(bytes, ObjectKind::WatersCiphertext)?;
        let randomizer = params.deserialize_g(r.field()?)?;
        let identity_term = params.deserialize_g(r.field()?)?;
        let c1 = match r.field()? {
            [MODE_NATIVE] => MessagePart::Native(params.deserialize_gt(r.field()?)?),
            [MODE_BYTES] => MessagePart::Masked(r.field()?.to_vec()),
            _ => return Err(Error::framing("unknown message mode")),
        };
        r.finish()?;
        Ok(WatersCiphertext {
            c0: IdentityPart {
                randomizer,
                identity_term,
            },
            c1,
        })
    }
}

fn check_identity(pk: &WatersPublicKey, v: &BitIdentity) -> Result<()> {
    if v.len() != pk.identity_bits() {
        return Err(Error::IdentityLengthMismatch {
            expected: pk.identity_bits(),
            found: v.len(),
        });
    }
    Ok(())
}

/// Samples public parameters for `n`-bit identities. Group elements come from hashing
/// fresh random labels; `α` is drawn from `Z_p \ {0}`.
pub fn tibe_setup<R: RngCore + ?Sized>(
    params: &CurveParams,
    n: usize,
    rng: &mut R,
) -> Result<(WatersPublicKey, WatersMasterKey)> {
    if n == 0 || n > MAX_IDENTITY_BITS {
        return Err(Error::InvalidParameter(format!(
            "identity bits must lie in 1..={MAX_IDENTITY_BITS}"
        )));
    }
    let g = params.random_element(rng)?;
    let g2 = params.random_element(rng)?;
    let u_prime = params.random_element(rng)?;
    let u_vec = (0..n)
        .map(|_| params.random_element(rng))
        .collect::<Result<Vec<_>>>()?;
    let alpha = params.random_nonzero_scalar(rng);
    let g1 = params.point_mul(&g, &alpha);
    let g2_alpha = params.point_mul(&g2, &alpha);
    let pk = WatersPublicKey::assemble(params.clone(), g, g1, g2, u_prime, u_vec);
    Ok((
        pk,
        WatersMasterKey {
            g2_alpha,
            alpha: Some(alpha),
        },
    ))
}

/// `u′ · ∏_{i∈V} u_i`, written additively.
pub fn hash_product(pk: &WatersPublicKey, v: &BitIdentity) -> Result<GroupElement> {
    check_identity(pk, v)?;
    let terms = std::iter::once(&pk.u_prime).chain(v.index_set().map(|i| &pk.u_vec[i - 1]));
    Ok(pk.params.sum(terms))
}

pub fn tibe_extract<R: RngCore + ?Sized>(
    pk: &WatersPublicKey,
    msk: &WatersMasterKey,
    v: &BitIdentity,
    rng: &mut R,
) -> Result<WatersUserKey> {
    let r = pk.params.random_scalar(rng);
    tibe_extract_with(pk, msk, v, &r)
}

/// `d = (g2^α · H(v)^r, g^r)` with caller-chosen `r`.
pub fn tibe_extract_with(
    pk: &WatersPublicKey,
    msk: &WatersMasterKey,
    v: &BitIdentity,
    r: &Scalar,
) -> Result<WatersUserKey> {
    let h = hash_product(pk, v)?;
    let p = &pk.params;
    let d1 = p.add(&msk.g2_alpha, &p.point_mul(&h, r));
    let d2 = p.point_mul(&pk.g, r);
    Ok(WatersUserKey { d1, d2 })
}

/// `e(d1, g) = e(g1, g2) · e(H(v), d2)`.
pub fn key_sanity(pk: &WatersPublicKey, v: &BitIdentity, sk: &WatersUserKey) -> Result<bool> {
    let h = hash_product(pk, v)?;
    let p = &pk.params;
    let lhs = p.pairing(&sk.d1, &pk.g);
    let rhs = p.gt_mul(&pk.blinding_base, &p.pairing(&h, &sk.d2));
    Ok(lhs == rhs)
}

pub fn tibe_encrypt<R: RngCore + ?Sized>(
    pk: &WatersPublicKey,
    v: &BitIdentity,
    msg: &Plaintext,
    rng: &mut R,
) -> Result<WatersCiphertext> {
    let t = pk.params.random_nonzero_scalar(rng);
    tibe_encrypt_with(pk, v, msg, &t)
}

/// Encryption with caller-chosen `t`; `c0` depends only on `(pk, v, t)`.
pub fn tibe_encrypt_with(
    pk: &WatersPublicKey,
    v: &BitIdentity,
    msg: &Plaintext,
    t: &Scalar,
) -> Result<WatersCiphertext> {
    if let Plaintext::Bytes(b) = msg {
        if b.len() > MAX_BYTE_MESSAGE {
            return Err(Error::MessageTooLong {
                len: b.len(),
                max: MAX_BYTE_MESSAGE,
            });
        }
    }
    let h = hash_product(pk, v)?;
    let p = &pk.params;
    let c0 = IdentityPart {
        randomizer: p.point_mul(&pk.g, t),
        identity_term: p.point_mul(&h, t),
    };
    let blinding = p.gt_pow(&pk.blinding_base, t);
    let c1 = match msg {
        Plaintext::Native(m) => MessagePart::Native(p.gt_mul(&blinding, m)),
        Plaintext::Bytes(b) => MessagePart::Masked(apply_mask(p, &blinding, b)),
    };
    Ok(WatersCiphertext { c0, c1 })
}

fn apply_mask(params: &CurveParams, blinding: &GtElement, data: &[u8]) -> Vec<u8> {
    let mut out = data.to_vec();
    kdf::xor_stream(b"TIBE-MASK", &[&params.serialize_gt(blinding)], &mut out);
    out
}

/// Recovers the blinding factor `e(g1, g2)^t = e(d1, C2) / e(d2, C3)` and removes it.
/// A key for the wrong identity silently yields an unrelated plaintext.
pub fn tibe_decrypt(pk: &WatersPublicKey, sk: &WatersUserKey, ct: &WatersCiphertext) -> Plaintext {
    let p = &pk.params;
    let blinding = p.gt_div(
        &p.pairing(&sk.d1, &ct.c0.randomizer),
        &p.pairing(&sk.d2, &ct.c0.identity_term),
    );
    match &ct.c1 {
        MessagePart::Native(c) => Plaintext::Native(p.gt_div(c, &blinding)),
        MessagePart::Masked(mask) => Plaintext::Bytes(apply_mask(p, &blinding, mask)),
    }
}

/// `e(g, C3) == e(C2, H(v))`. Uses only public data and the identity part.
pub fn tibe_test(pk: &WatersPublicKey, v: &BitIdentity, c0: &IdentityPart) -> Result<bool> {
    let h = hash_product(pk, v)?;
    let p = &pk.params;
    Ok(p.pairing(&pk.g, &c0.identity_term) == p.pairing(&c0.randomizer, &h))
}
