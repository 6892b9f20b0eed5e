//! The composed scheme: an anonymous payload layer plus an escrowed recipient tag.
//!
//! A ciphertext is `(c1, c2, c3)`:
//! * `(c0, c1)` is a testable-IBE encryption of the message under `id` (byte mode),
//! * `c2` is an anonymous-IBE encryption of the serialized `c0` under `id`,
//! * `c3` is a testable-IBE encryption of `id` itself under the reserved identity `id_ε`.
//!
//! The recovery manager holds the anonymous master key and the testable key for `id_ε`.
//! It can open `c3`, re-derive the anonymous key for the claimed identity, open `c2` and run
//! the public test on `c0`, without ever touching `c1`.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::RngCore;

use crate::anonymous::{
    aibe_decrypt, aibe_encrypt_with, aibe_extract, aibe_setup, key_sanity as anon_key_sanity,
    AnonCiphertext, AnonMasterKey, AnonPublicKey, AnonUserKey,
};
use crate::error::{Error, Result};
use crate::pairing::{CurveParams, Scalar};
use crate::testable::{
    key_sanity as testable_key_sanity, tibe_decrypt, tibe_encrypt_with, tibe_extract, tibe_setup,
    tibe_test, BitIdentity, IdentityPart, MessagePart, Plaintext, WatersCiphertext,
    WatersMasterKey, WatersPublicKey, WatersUserKey,
};
use crate::wire::{ObjectKind, Reader, Writer};

pub const MAX_IDENTITY_LEN: usize = 255;
/// The `c1` segment is `u16 len ‖ mask` inside a `u16`-prefixed field, so two bytes are lost.
pub const MAX_MESSAGE: usize = u16::MAX as usize - 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AibeirPublicKey {
    pub anonymous: AnonPublicKey,
    pub testable: WatersPublicKey,
    pub id_epsilon: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AibeirMasterKey {
    pub anonymous: AnonMasterKey,
    pub testable: WatersMasterKey,
}

/// `sk_IRM`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrmKey {
    pub anonymous: AnonMasterKey,
    pub escrow: WatersUserKey,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AibeirUserKey {
    pub id: Vec<u8>,
    pub anonymous: AnonUserKey,
    pub testable: WatersUserKey,
}

/// Raw segments, each in its own module's encoding. Parsing is deferred so that
/// structurally framed but cryptographically bogus ciphertexts can still be handled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AibeirCiphertext {
    pub c1: Vec<u8>,
    pub c2: Vec<u8>,
    pub c3: Vec<u8>,
}

/// The three independent randomness draws of one encryption.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptionRandomness {
    pub message: Scalar,
    pub anonymous: Scalar,
    pub escrow: Scalar,
}

impl EncryptionRandomness {
    pub fn sample<R: RngCore + ?Sized>(params: &CurveParams, rng: &mut R) -> Self {
        EncryptionRandomness {
            message: params.random_nonzero_scalar(rng),
            anonymous: params.random_nonzero_scalar(rng),
            escrow: params.random_nonzero_scalar(rng),
        }
    }
}

impl AibeirPublicKey {
    pub fn params(&self) -> &CurveParams {
        self.testable.params()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new(ObjectKind::AibeirPublicKey);
        w.field(&self.id_epsilon);
        w.field(&self.anonymous.to_bytes());
        w.field(&self.testable.to_bytes());
        w.finish().expect("public key fits u16 fields")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, ObjectKind::AibeirPublicKey)?;
        let mpk = Self::read(&mut r)?;
        r.finish()?;
        Ok(mpk)
    }

    fn read(r: &mut Reader<'_>) -> Result<Self> {
        let id_epsilon = r.field()?.to_vec();
        if id_epsilon.is_empty() || id_epsilon.len() > MAX_IDENTITY_LEN {
            return Err(Error::framing("recovery identity length out of range"));
        }
        let anonymous = AnonPublicKey::from_bytes(r.field()?)?;
        let testable = WatersPublicKey::from_bytes(r.field()?)?;
        if anonymous.params() != testable.params() {
            return Err(Error::ParamsMismatch);
        }
        Ok(AibeirPublicKey {
            anonymous,
            testable,
            id_epsilon,
        })
    }

    fn bit_identity(&self, id: &[u8]) -> BitIdentity {
        BitIdentity::from_identity(id, self.testable.identity_bits())
    }
}

impl AibeirMasterKey {
    pub fn to_bytes(&self, mpk: &AibeirPublicKey) -> Vec<u8> {
        let p = mpk.params();
        let mut w = Writer::new(ObjectKind::AibeirMasterKey);
        w.field(&self.anonymous.to_bytes(p));
        w.field(&self.testable.to_bytes(p, true));
        w.finish().expect("master key fits u16 fields")
    }

    pub fn from_bytes(bytes: &[u8], mpk: &AibeirPublicKey) -> Result<Self> {
        let p = mpk.params();
        let mut r = Reader::new(bytes, ObjectKind::AibeirMasterKey)?;
        let anonymous = AnonMasterKey::from_bytes(r.field()?, p)?;
        let testable = WatersMasterKey::from_bytes(r.field()?, p)?;
        r.finish()?;
        check_anonymous_master(mpk, &anonymous)?;
        let w = &mpk.testable;
        let alpha_ok = match &testable.alpha {
            Some(a) => {
                p.point_mul(w.g2(), a) == testable.g2_alpha && p.point_mul(w.g(), a) == *w.g1()
            }
            None => p.pairing(w.g(), &testable.g2_alpha) == p.pairing(w.g1(), w.g2()),
        };
        if !alpha_ok {
            return Err(Error::KeyMismatch);
        }
        Ok(AibeirMasterKey {
            anonymous,
            testable,
        })
    }
}

fn check_anonymous_master(mpk: &AibeirPublicKey, msk: &AnonMasterKey) -> Result<()> {
    let p = mpk.params();
    if p.point_mul(mpk.anonymous.generator(), &msk.s) != *mpk.anonymous.p_pub() {
        return Err(Error::KeyMismatch);
    }
    Ok(())
}

impl IrmKey {
    pub fn to_bytes(&self, mpk: &AibeirPublicKey) -> Vec<u8> {
        let p = mpk.params();
        let mut w = Writer::new(ObjectKind::IrmKey);
        w.field(&self.anonymous.to_bytes(p));
        w.field(&self.escrow.to_bytes(p));
        w.finish().expect("recovery key fits u16 fields")
    }

    pub fn from_bytes(bytes: &[u8], mpk: &AibeirPublicKey) -> Result<Self> {
        let p = mpk.params();
        let mut r = Reader::new(bytes, ObjectKind::IrmKey)?;
        let anonymous = AnonMasterKey::from_bytes(r.field()?, p)?;
        let escrow = WatersUserKey::from_bytes(r.field()?, p)?;
        r.finish()?;
        check_anonymous_master(mpk, &anonymous)?;
        if !testable_key_sanity(&mpk.testable, &mpk.bit_identity(&mpk.id_epsilon), &escrow)? {
            return Err(Error::KeyMismatch);
        }
        Ok(IrmKey { anonymous, escrow })
    }
}

impl AibeirUserKey {
    /// The key file bundles the public key so it can decrypt on its own.
    pub fn to_bytes(&self, mpk: &AibeirPublicKey) -> Vec<u8> {
        let p = mpk.params();
        let mut w = Writer::new(ObjectKind::AibeirUserKey);
        w.field(&mpk.to_bytes());
        w.field(&self.id);
        w.field(&self.anonymous.to_bytes(p));
        w.field(&self.testable.to_bytes(p));
        w.finish().expect("user key fits u16 fields")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<(AibeirPublicKey, Self)> {
        let mut r = Reader::new(bytes, ObjectKind::AibeirUserKey)?;
        let mpk = AibeirPublicKey::from_bytes(r.field()?)?;
        let p = mpk.params();
        let id = r.field()?.to_vec();
        let anonymous = AnonUserKey::from_bytes(r.field()?, p)?;
        let testable = WatersUserKey::from_bytes(r.field()?, p)?;
        r.finish()?;
        if !anon_key_sanity(&mpk.anonymous, &id, &anonymous)?
            || !testable_key_sanity(&mpk.testable, &mpk.bit_identity(&id), &testable)?
        {
            return Err(Error::KeyMismatch);
        }
        let key = AibeirUserKey {
            id,
            anonymous,
            testable,
        };
        Ok((mpk, key))
    }
}

impl AibeirCiphertext {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = Writer::new(ObjectKind::AibeirCiphertext);
        w.field(&self.c1);
        w.field(&self.c2);
        w.field(&self.c3);
        w.finish()
    }

    /// Structural parse only: header plus three length-prefixed segments.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, ObjectKind::AibeirCiphertext)?;
        let c1 = r.field()?.to_vec();
        let c2 = r.field()?.to_vec();
        let c3 = r.field()?.to_vec();
        r.finish()?;
        Ok(AibeirCiphertext { c1, c2, c3 })
    }
}

/// Segment access used by `recover`, so tests can watch which parts are read.
pub trait CiphertextSegments {
    fn c1(&self) -> &[u8];
    fn c2(&self) -> &[u8];
    fn c3(&self) -> &[u8];
}

impl CiphertextSegments for AibeirCiphertext {
    fn c1(&self) -> &[u8] {
        &self.c1
    }
    fn c2(&self) -> &[u8] {
        &self.c2
    }
    fn c3(&self) -> &[u8] {
        &self.c3
    }
}

/// Per-segment read counters, shareable across threads.
#[derive(Debug, Default)]
pub struct AccessLog {
    c1: AtomicU64,
    c2: AtomicU64,
    c3: AtomicU64,
}

impl AccessLog {
    pub fn counts(&self) -> [u64; 3] {
        [&self.c1, &self.c2, &self.c3].map(|c| c.load(Ordering::Relaxed))
    }
}

pub struct InstrumentedCiphertext<'a> {
    inner: &'a AibeirCiphertext,
    log: &'a AccessLog,
}

impl<'a> InstrumentedCiphertext<'a> {
    pub fn new(inner: &'a AibeirCiphertext, log: &'a AccessLog) -> Self {
        InstrumentedCiphertext { inner, log }
    }
}

impl CiphertextSegments for InstrumentedCiphertext<'_> {
    fn c1(&self) -> &[u8] {
        self.log.c1.fetch_add(1, Ordering::Relaxed);
        &self.inner.c1
    }
    fn c2(&self) -> &[u8] {
        self.log.c2.fetch_add(1, Ordering::Relaxed);
        &self.inner.c2
    }
    fn c3(&self) -> &[u8] {
        self.log.c3.fetch_add(1, Ordering::Relaxed);
        &self.inner.c3
    }
}

fn check_identity(mpk: &AibeirPublicKey, id: &[u8]) -> Result<()> {
    if id.len() > MAX_IDENTITY_LEN {
        return Err(Error::IdentityTooLong {
            len: id.len(),
            max: MAX_IDENTITY_LEN,
        });
    }
    if id == mpk.id_epsilon.as_slice() {
        return Err(Error::ReservedIdentity);
    }
    Ok(())
}

/// Runs both sub-setups and hands back the recovery manager's key separately.
pub fn setup<R: RngCore + ?Sized>(
    params: &CurveParams,
    n: usize,
    id_epsilon: &[u8],
    rng: &mut R,
) -> Result<(AibeirPublicKey, AibeirMasterKey, IrmKey)> {
    if id_epsilon.is_empty() {
        return Err(Error::InvalidParameter(
            "recovery identity must be non-empty".into(),
        ));
    }
    if id_epsilon.len() > MAX_IDENTITY_LEN {
        return Err(Error::IdentityTooLong {
            len: id_epsilon.len(),
            max: MAX_IDENTITY_LEN,
        });
    }
    let (anon_pk, anon_msk) = aibe_setup(params, rng)?;
    let (waters_pk, waters_msk) = tibe_setup(params, n, rng)?;
    let mpk = AibeirPublicKey {
        anonymous: anon_pk,
        testable: waters_pk,
        id_epsilon: id_epsilon.to_vec(),
    };
    let escrow = tibe_extract(
        &mpk.testable,
        &waters_msk,
        &mpk.bit_identity(id_epsilon),
        rng,
    )?;
    let irm = IrmKey {
        anonymous: anon_msk.clone(),
        escrow,
    };
    Ok((
        mpk,
        AibeirMasterKey {
            anonymous: anon_msk,
            testable: waters_msk,
        },
        irm,
    ))
}

pub fn extract<R: RngCore + ?Sized>(
    mpk: &AibeirPublicKey,
    msk: &AibeirMasterKey,
    id: &[u8],
    rng: &mut R,
) -> Result<AibeirUserKey> {
    check_identity(mpk, id)?;
    Ok(AibeirUserKey {
        id: id.to_vec(),
        anonymous: aibe_extract(&mpk.anonymous, &msk.anonymous, id)?,
        testable: tibe_extract(&mpk.testable, &msk.testable, &mpk.bit_identity(id), rng)?,
    })
}

pub fn encrypt<R: RngCore + ?Sized>(
    mpk: &AibeirPublicKey,
    id: &[u8],
    msg: &[u8],
    rng: &mut R,
) -> Result<AibeirCiphertext> {
    let randomness = EncryptionRandomness::sample(mpk.params(), rng);
    encrypt_with_randomness(mpk, id, msg, &randomness)
}

/// Deterministic encryption; also used to re-encrypt from a disclosed witness.
pub fn encrypt_with_randomness(
    mpk: &AibeirPublicKey,
    id: &[u8],
    msg: &[u8],
    randomness: &EncryptionRandomness,
) -> Result<AibeirCiphertext> {
    check_identity(mpk, id)?;
    if msg.len() > MAX_MESSAGE {
        return Err(Error::MessageTooLong {
            len: msg.len(),
            max: MAX_MESSAGE,
        });
    }
    let p = mpk.params();
    let inner = tibe_encrypt_with(
        &mpk.testable,
        &mpk.bit_identity(id),
        &Plaintext::Bytes(msg.to_vec()),
        &randomness.message,
    )?;
    let MessagePart::Masked(mask) = &inner.c1 else {
        unreachable!("byte plaintext gives a masked part")
    };
    let c1 = MessagePart::masked_to_bytes(mask);
    let c2 = aibe_encrypt_with(
        &mpk.anonymous,
        id,
        &inner.c0.to_bytes(p),
        &randomness.anonymous,
    )?
    .to_bytes(p);
    let escrow = tibe_encrypt_with(
        &mpk.testable,
        &mpk.bit_identity(&mpk.id_epsilon),
        &Plaintext::Bytes(id.to_vec()),
        &randomness.escrow,
    )?;
    Ok(AibeirCiphertext {
        c1,
        c2,
        c3: escrow.to_bytes(p),
    })
}

/// Opens `c2` to get `c0`, then decrypts `c0 ‖ c1`. `c3` is not consulted.
pub fn decrypt(
    mpk: &AibeirPublicKey,
    sk: &AibeirUserKey,
    ct: &AibeirCiphertext,
) -> Result<Vec<u8>> {
    let p = mpk.params();
    let c2 =
        AnonCiphertext::from_bytes(&ct.c2, p).map_err(|e| Error::framing(format!("c2: {e}")))?;
    let mask =
        MessagePart::masked_from_bytes(&ct.c1).map_err(|e| Error::framing(format!("c1: {e}")))?;
    let c0_bytes = aibe_decrypt(&mpk.anonymous, &sk.anonymous, &c2);
    let c0 = IdentityPart::from_bytes(&c0_bytes, p).map_err(|_| Error::MalformedC0)?;
    let inner = WatersCiphertext {
        c0,
        c1: MessagePart::Masked(mask),
    };
    match tibe_decrypt(&mpk.testable, &sk.testable, &inner) {
        Plaintext::Bytes(m) => Ok(m),
        Plaintext::Native(_) => unreachable!("masked part decrypts to bytes"),
    }
}

/// Returns the recipient identity, or `None` for every kind of failure. Only `c2` and `c3`
/// are read.
pub fn recover<C: CiphertextSegments + ?Sized>(
    mpk: &AibeirPublicKey,
    irm: &IrmKey,
    ct: &C,
) -> Option<Vec<u8>> {
    let p = mpk.params();
    let escrow = WatersCiphertext::from_bytes(ct.c3(), p).ok()?;
    if !matches!(escrow.c1, MessagePart::Masked(_)) {
        return None;
    }
    let Plaintext::Bytes(id) = tibe_decrypt(&mpk.testable, &irm.escrow, &escrow) else {
        return None;
    };
    if id.len() > MAX_IDENTITY_LEN || id == mpk.id_epsilon {
        return None;
    }
    let sk_a = aibe_extract(&mpk.anonymous, &irm.anonymous, &id).ok()?;
    let c2 = AnonCiphertext::from_bytes(ct.c2(), p).ok()?;
    let c0 = IdentityPart::from_bytes(&aibe_decrypt(&mpk.anonymous, &sk_a, &c2), p).ok()?;
    // (identity, identity) would pass the test for every identity
    if c0.randomizer.is_identity() {
        return None;
    }
    tibe_test(&mpk.testable, &mpk.bit_identity(&id), &c0)
        .ok()?
        .then_some(id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::generate_params;
    use crate::testable::key_sanity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fixture() -> (AibeirPublicKey, AibeirMasterKey, IrmKey, ChaCha20Rng) {
        let params = generate_params(32, b"aibeir-unit").unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (mpk, msk, irm) = setup(&params, 16, b"IRM", &mut rng).unwrap();
        (mpk, msk, irm, rng)
    }

    #[test]
    fn escrow_key_is_valid() {
        let (mpk, _, irm, _) = fixture();
        assert!(key_sanity(&mpk.testable, &mpk.bit_identity(b"IRM"), &irm.escrow).unwrap());
    }

    #[test]
    fn pipeline_round_trip() {
        let (mpk, msk, irm, mut rng) = fixture();
        let sk = extract(&mpk, &msk, b"alice", &mut rng).unwrap();
        for msg in [&b""[..], b"hi", &[7u8; 500]] {
            let ct = encrypt(&mpk, b"alice", msg, &mut rng).unwrap();
            assert_eq!(decrypt(&mpk, &sk, &ct).unwrap(), msg);
            assert_eq!(recover(&mpk, &irm, &ct).as_deref(), Some(&b"alice"[..]));
        }
    }

    #[test]
    fn reserved_and_oversize_inputs() {
        let (mpk, msk, _, mut rng) = fixture();
        assert_eq!(
            extract(&mpk, &msk, b"IRM", &mut rng),
            Err(Error::ReservedIdentity)
        );
        assert_eq!(
            encrypt(&mpk, b"IRM", b"x", &mut rng),
            Err(Error::ReservedIdentity)
        );
        assert!(matches!(
            encrypt(&mpk, &[b'a'; 256], b"x", &mut rng),
            Err(Error::IdentityTooLong { .. })
        ));
        assert!(matches!(
            encrypt(&mpk, b"a", &vec![0; MAX_MESSAGE + 1], &mut rng),
            Err(Error::MessageTooLong { .. })
        ));
        assert!(encrypt(&mpk, b"a", &vec![0; MAX_MESSAGE], &mut rng)
            .unwrap()
            .to_bytes()
            .is_ok());
        assert!(setup(mpk.params(), 8, b"", &mut rng).is_err());
    }

    #[test]
    fn wrong_key_and_truncation() {
        let (mpk, msk, _, mut rng) = fixture();
        let bob = extract(&mpk, &msk, b"bob", &mut rng).unwrap();
        let ct = encrypt(&mpk, b"alice", b"for alice", &mut rng).unwrap();
        assert_eq!(decrypt(&mpk, &bob, &ct), Err(Error::MalformedC0));
        let mut cut = ct.clone();
        cut.c2.pop();
        assert!(matches!(decrypt(&mpk, &bob, &cut), Err(Error::Framing(_))));
    }

    #[test]
    fn frankenstein_is_rejected() {
        let (mpk, _, irm, mut rng) = fixture();
        let a = encrypt(&mpk, b"alice", b"m", &mut rng).unwrap();
        let b = encrypt(&mpk, b"bob", b"m", &mut rng).unwrap();
        let spliced = AibeirCiphertext {
            c3: b.c3.clone(),
            ..a.clone()
        };
        assert_eq!(recover(&mpk, &irm, &spliced), None);
        let spliced = AibeirCiphertext { c2: b.c2, ..a };
        assert_eq!(recover(&mpk, &irm, &spliced), None);
    }

    #[test]
    fn recover_never_reads_c1() {
        let (mpk, _, irm, mut rng) = fixture();
        let ct = encrypt(&mpk, b"carol", b"secret", &mut rng).unwrap();
        let log = AccessLog::default();
        let got = recover(&mpk, &irm, &InstrumentedCiphertext::new(&ct, &log));
        assert_eq!(got.as_deref(), Some(&b"carol"[..]));
        let [c1, c2, c3] = log.counts();
        assert_eq!(c1, 0);
        assert!(c2 > 0 && c3 > 0);
    }

    #[test]
    fn length_depends_on_sizes_only() {
        let (mpk, _, _, mut rng) = fixture();
        let a = encrypt(&mpk, b"ann", b"same length", &mut rng)
            .unwrap()
            .to_bytes()
            .unwrap();
        let b = encrypt(&mpk, b"bob", b"same length", &mut rng)
            .unwrap()
            .to_bytes()
            .unwrap();
        assert_eq!(a.len(), b.len());
    }

    #[test]
    fn object_encodings_round_trip() {
        let (mpk, msk, irm, mut rng) = fixture();
        assert_eq!(AibeirPublicKey::from_bytes(&mpk.to_bytes()).unwrap(), mpk);
        assert_eq!(
            AibeirMasterKey::from_bytes(&msk.to_bytes(&mpk), &mpk).unwrap(),
            msk
        );
        assert_eq!(IrmKey::from_bytes(&irm.to_bytes(&mpk), &mpk).unwrap(), irm);
        let sk = extract(&mpk, &msk, b"dora", &mut rng).unwrap();
        let (mpk2, sk2) = AibeirUserKey::from_bytes(&sk.to_bytes(&mpk)).unwrap();
        assert_eq!((mpk2, sk2), (mpk.clone(), sk));
        let ct = encrypt(&mpk, b"dora", b"x", &mut rng).unwrap();
        assert_eq!(
            AibeirCiphertext::from_bytes(&ct.to_bytes().unwrap()).unwrap(),
            ct
        );
    }
}
