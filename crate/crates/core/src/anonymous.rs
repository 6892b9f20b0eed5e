//! Boneh–Franklin style anonymous IBE over byte strings.
//!
//! `U = r·P` and `V = msg ⊕ SHAKE256("AIBE-MASK", U, e(H1(id), P_pub)^r)`. The ciphertext
//! layout depends only on the message length.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::kdf;
use crate::pairing::{CurveParams, GroupElement, Scalar};
use crate::wire::{ObjectKind, Reader, Writer};

/// Largest plaintext.
pub const MAX_MESSAGE: usize = u16::MAX as usize;

const H1_TAG: &[u8] = b"AIBE-H1";
const MASK_TAG: &[u8] = b"AIBE-MASK";
const GENERATOR_LABEL: &[u8] = b"anonymous generator P";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnonPublicKey {
    params: CurveParams,
    generator: GroupElement,
    p_pub: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnonMasterKey {
    pub s: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnonUserKey {
    pub d_id: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnonCiphertext {
    pub u: GroupElement,
    pub v: Vec<u8>,
}

impl AnonPublicKey {
    pub fn params(&self) -> &CurveParams {
        &self.params
    }

    pub fn generator(&self) -> &GroupElement {
        &self.generator
    }

    pub fn p_pub(&self) -> &GroupElement {
        &self.p_pub
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new(ObjectKind::AnonPublicKey);
        w.field(&self.params.to_bytes());
        w.field(&self.params.serialize_g(&self.generator));
        w.field(&self.params.serialize_g(&self.p_pub));
        w.finish().expect("public key fields fit u16 lengths")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, ObjectKind::AnonPublicKey)?;
        let params = CurveParams::from_bytes(r.field()?)?;
        let generator = params.deserialize_g(r.field()?)?;
        let p_pub = params.deserialize_g(r.field()?)?;
        r.finish()?;
        if generator.is_identity() {
            return Err(Error::framing("generator is the identity"));
        }
        Ok(AnonPublicKey {
            params,
            generator,
            p_pub,
        })
    }
}

impl AnonMasterKey {
    pub fn to_bytes(&self, params: &CurveParams) -> Vec<u8> {
        let mut w = Writer::new(ObjectKind::AnonMasterKey);
        w.field(&params.serialize_scalar(&self.s));
        w.finish().expect("scalar fits")
    }

    pub fn from_bytes(bytes: &[u8], params: &CurveParams) -> Result<Self> {
        let mut r = Reader::new(bytes, ObjectKind::AnonMasterKey)?;
        let s = params.deserialize_scalar(r.field()?)?;
        r.finish()?;
        Ok(AnonMasterKey { s })
    }
}

impl AnonUserKey {
    pub fn to_bytes(&self, params: &CurveParams) -> Vec<u8> {
        let mut w = Writer::new(ObjectKind::AnonUserKey);
        w.field(&params.serialize_g(&self.d_id));
        w.finish().expect("point fits")
    }

    pub fn from_bytes(bytes: &[u8], params: &CurveParams) -> Result<Self> {
        let mut r = Reader::new(bytes, ObjectKind::AnonUserKey)?;
        let d_id = params.deserialize_g(r.field()?)?;
        r.finish()?;
        Ok(AnonUserKey { d_id })
    }
}

impl AnonCiphertext {
    /// `header ‖ serialize_g(U) ‖ u16 len ‖ V`.
    pub fn to_bytes(&self, params: &CurveParams) -> Vec<u8> {
        let mut w = Writer::new(ObjectKind::AnonCiphertext);
        w.raw(&params.serialize_g(&self.u));
        w.field(&self.v);
        w.finish().expect("payload bounded by MAX_MESSAGE")
    }

    pub fn from_bytes(bytes: &[u8], params: &CurveParams) -> Result<Self> {
        let mut r = Reader::new(bytes, ObjectKind::AnonCiphertext)?;
        let point_bytes = r.take(params.point_len().min(r.remaining()))?;
        let u = params.deserialize_g(point_bytes)?;
        let v = r.field()?.to_vec();
        r.finish()?;
        Ok(AnonCiphertext { u, v })
    }
}

pub fn aibe_setup<R: RngCore + ?Sized>(
    params: &CurveParams,
    rng: &mut R,
) -> Result<(AnonPublicKey, AnonMasterKey)> {
    let generator = params.hash_to_group(H1_TAG, GENERATOR_LABEL)?;
    let s = params.random_nonzero_scalar(rng);
    let p_pub = params.point_mul(&generator, &s);
    Ok((
        AnonPublicKey {
            params: params.clone(),
            generator,
            p_pub,
        },
        AnonMasterKey { s },
    ))
}

fn h1(params: &CurveParams, id: &[u8]) -> Result<GroupElement> {
    params.hash_to_group(H1_TAG, id)
}

/// `d_id = s·H1(id)`; deterministic.
pub fn aibe_extract(pk: &AnonPublicKey, msk: &AnonMasterKey, id: &[u8]) -> Result<AnonUserKey> {
    let q = h1(&pk.params, id)?;
    Ok(AnonUserKey {
        d_id: pk.params.point_mul(&q, &msk.s),
    })
}

/// `e(d_id, P) = e(H1(id), P_pub)`.
pub fn key_sanity(pk: &AnonPublicKey, id: &[u8], sk: &AnonUserKey) -> Result<bool> {
    let p = &pk.params;
    Ok(p.pairing(&sk.d_id, &pk.generator) == p.pairing(&h1(p, id)?, &pk.p_pub))
}

pub fn aibe_encrypt<R: RngCore + ?Sized>(
    pk: &AnonPublicKey,
    id: &[u8],
    msg: &[u8],
    rng: &mut R,
) -> Result<AnonCiphertext> {
    let r = pk.params.random_nonzero_scalar(rng);
    aibe_encrypt_with(pk, id, msg, &r)
}

pub fn aibe_encrypt_with(
    pk: &AnonPublicKey,
    id: &[u8],
    msg: &[u8],
    r: &Scalar,
) -> Result<AnonCiphertext> {
    if msg.len() > MAX_MESSAGE {
        return Err(Error::MessageTooLong {
            len: msg.len(),
            max: MAX_MESSAGE,
        });
    }
    let p = &pk.params;
    let u = p.point_mul(&pk.generator, r);
    let shared = p.gt_pow(&p.pairing(&h1(p, id)?, &pk.p_pub), r);
    let mut v = msg.to_vec();
    mask(p, &u, &shared, &mut v);
    Ok(AnonCiphertext { u, v })
}

/// A key for another identity yields unrelated bytes of the same length.
pub fn aibe_decrypt(pk: &AnonPublicKey, sk: &AnonUserKey, ct: &AnonCiphertext) -> Vec<u8> {
    let p = &pk.params;
    let shared = p.pairing(&sk.d_id, &ct.u);
    let mut out = ct.v.clone();
    mask(p, &ct.u, &shared, &mut out);
    out
}

fn mask(params: &CurveParams, u: &GroupElement, shared: &crate::GtElement, data: &mut [u8]) {
    kdf::xor_stream(
        MASK_TAG,
        &[&params.serialize_g(u), &params.serialize_gt(shared)],
        data,
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::generate_params;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fixture(bits: usize) -> (AnonPublicKey, AnonMasterKey, ChaCha20Rng) {
        let params = generate_params(bits, b"anon-unit").unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (pk, msk) = aibe_setup(&params, &mut rng).unwrap();
        (pk, msk, rng)
    }

    #[test]
    fn setup_and_extract_relations() {
        let (pk, msk, _) = fixture(32);
        assert_eq!(*pk.p_pub(), pk.params().point_mul(pk.generator(), &msk.s));
        let a = aibe_extract(&pk, &msk, b"alice").unwrap();
        assert_eq!(a, aibe_extract(&pk, &msk, b"alice").unwrap());
        assert!(key_sanity(&pk, b"alice", &a).unwrap());
        assert!(!key_sanity(&pk, b"bob", &a).unwrap());
    }

    #[test]
    fn distinct_setups_and_ids() {
        let params = generate_params(64, b"anon-distinct").unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..100 {
            let (_, msk) = aibe_setup(&params, &mut rng).unwrap();
            assert!(seen.insert(msk.s.value().clone()));
        }
        let (pk, msk) = aibe_setup(&params, &mut rng).unwrap();
        let mut keys = std::collections::HashSet::new();
        for i in 0..100u32 {
            let k = aibe_extract(&pk, &msk, format!("user-{i}").as_bytes()).unwrap();
            assert!(keys.insert(params.serialize_g(&k.d_id)));
        }
    }

    #[test]
    fn round_trips() {
        let (pk, msk, mut rng) = fixture(32);
        let sk = aibe_extract(&pk, &msk, b"carol").unwrap();
        for msg in [&b""[..], b"\x00", b"hello world", &[0x5a; 3000]] {
            let ct = aibe_encrypt(&pk, b"carol", msg, &mut rng).unwrap();
            assert_eq!(ct.v.len(), msg.len());
            assert_eq!(aibe_decrypt(&pk, &sk, &ct), msg);
        }
    }

    #[test]
    fn mismatched_keys_give_garbage() {
        let (pk, msk, mut rng) = fixture(64);
        let wrong = aibe_extract(&pk, &msk, b"mallory").unwrap();
        let msg = b"sixteen byte msg";
        for i in 0..100u32 {
            let ct = aibe_encrypt(&pk, format!("victim-{i}").as_bytes(), msg, &mut rng).unwrap();
            assert_ne!(aibe_decrypt(&pk, &wrong, &ct), msg);
        }
    }

    #[test]
    fn mask_is_deterministic_in_randomness() {
        let (pk, _, mut rng) = fixture(32);
        let r = pk.params().random_nonzero_scalar(&mut rng);
        let a = aibe_encrypt_with(&pk, b"id", &[0; 40], &r).unwrap();
        let b = aibe_encrypt_with(&pk, b"id", &[0; 40], &r).unwrap();
        assert_eq!(a, b);
        let c = aibe_encrypt_with(&pk, b"other", &[0; 40], &r).unwrap();
        assert_eq!(a.u, c.u);
        assert_ne!(a.v, c.v);
    }

    #[test]
    fn layout_depends_only_on_length() {
        let (pk, _, mut rng) = fixture(64);
        let p = pk.params().clone();
        for len in [0usize, 1, 77] {
            let a = aibe_encrypt(&pk, b"x", &vec![1; len], &mut rng)
                .unwrap()
                .to_bytes(&p);
            let b = aibe_encrypt(&pk, b"a much longer identity", &vec![1; len], &mut rng)
                .unwrap()
                .to_bytes(&p);
            assert_eq!(a.len(), b.len());
            assert_eq!(a.len(), 6 + p.point_len() + 2 + len);
            assert_eq!(&a[..6], &b[..6]);
            assert_eq!(
                &a[6 + p.point_len()..8 + p.point_len()],
                &b[6 + p.point_len()..8 + p.point_len()]
            );
        }
    }

    #[test]
    fn identity_part_fits_message_space() {
        for bits in [8, 64, 160] {
            let p = generate_params(bits, b"fit").unwrap();
            assert!(2 * p.point_len() <= MAX_MESSAGE);
        }
        // eight 64-bit limbs is the widest field the backend supports
        const { assert!(2 * (1 + 2 * 64) <= MAX_MESSAGE) };
    }

    #[test]
    fn encodings_round_trip_and_reject() {
        let (pk, msk, mut rng) = fixture(32);
        let p = pk.params().clone();
        assert_eq!(AnonPublicKey::from_bytes(&pk.to_bytes()).unwrap(), pk);
        assert_eq!(
            AnonMasterKey::from_bytes(&msk.to_bytes(&p), &p).unwrap(),
            msk
        );
        let sk = aibe_extract(&pk, &msk, b"dan").unwrap();
        assert_eq!(AnonUserKey::from_bytes(&sk.to_bytes(&p), &p).unwrap(), sk);
        let ct = aibe_encrypt(&pk, b"dan", b"payload", &mut rng).unwrap();
        let bytes = ct.to_bytes(&p);
        assert_eq!(AnonCiphertext::from_bytes(&bytes, &p).unwrap(), ct);
        assert_eq!(bytes.len(), 6 + p.point_len() + 2 + 7);
        assert!(AnonCiphertext::from_bytes(&bytes[..bytes.len() - 1], &p).is_err());
        let mut extended = bytes.clone();
        extended.push(0);
        assert!(AnonCiphertext::from_bytes(&extended, &p).is_err());
        assert!(matches!(
            aibe_encrypt(&pk, b"dan", &vec![0; MAX_MESSAGE + 1], &mut rng),
            Err(Error::MessageTooLong { .. })
        ));
    }

    /// Per-bit contingency test between ciphertexts for two identities. A smoke test only.
    #[test]
    fn ciphertext_bits_do_not_track_identity() {
        let (pk, _, mut rng) = fixture(64);
        let msg = [0u8; 16];
        let samples = 1000;
        let mut ones = [[0u32; 128]; 2];
        for (slot, id) in [&b"id-zero"[..], b"id-one"].iter().enumerate() {
            for _ in 0..samples {
                let ct = aibe_encrypt(&pk, id, &msg, &mut rng).unwrap();
                for (bit, count) in ones[slot].iter_mut().enumerate() {
                    *count += u32::from((ct.v[bit / 8] >> (bit % 8)) & 1);
                }
            }
        }
        let n = samples as f64;
        for bit in 0..128 {
            let (a, b) = (ones[0][bit] as f64, ones[1][bit] as f64);
            let pooled = (a + b) / (2.0 * n);
            let expected_one = n * pooled;
            let expected_zero = n * (1.0 - pooled);
            let chi2 = [
                (a, expected_one),
                (b, expected_one),
                (n - a, expected_zero),
                (n - b, expected_zero),
            ]
            .iter()
            .map(|(o, e)| (o - e) * (o - e) / e)
            .sum::<f64>();
            // one degree of freedom; 24 is past the 1e-6 tail
            assert!(chi2 < 24.0, "bit {bit}: chi2 {chi2}");
            assert!((pooled - 0.5).abs() < 0.06, "bit {bit} biased: {pooled}");
        }
    }
}
