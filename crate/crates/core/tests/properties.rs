use std::sync::OnceLock;

use aibeir::aibeir::{self as scheme, AibeirCiphertext, AibeirMasterKey, AibeirPublicKey, IrmKey};
use aibeir::anonymous::{
    aibe_decrypt, aibe_encrypt_with, aibe_extract, aibe_setup, AnonCiphertext,
};
use aibeir::testable::{
    hash_product, key_sanity, tibe_decrypt, tibe_encrypt_with, tibe_extract, tibe_setup, tibe_test,
    BitIdentity, Plaintext, WatersCiphertext, WatersMasterKey, WatersPublicKey,
};
use aibeir::{generate_params, CurveParams};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn params() -> &'static CurveParams {
    static P: OnceLock<CurveParams> = OnceLock::new();
    P.get_or_init(|| generate_params(48, b"property suite").unwrap())
}

fn waters() -> &'static (WatersPublicKey, WatersMasterKey) {
    static W: OnceLock<(WatersPublicKey, WatersMasterKey)> = OnceLock::new();
    W.get_or_init(|| tibe_setup(params(), 24, &mut ChaCha20Rng::seed_from_u64(1)).unwrap())
}

fn system() -> &'static (AibeirPublicKey, AibeirMasterKey, IrmKey) {
    static S: OnceLock<(AibeirPublicKey, AibeirMasterKey, IrmKey)> = OnceLock::new();
    S.get_or_init(|| {
        scheme::setup(params(), 32, b"IRM", &mut ChaCha20Rng::seed_from_u64(2)).unwrap()
    })
}

fn scalar(seed: u64) -> aibeir::Scalar {
    let p = params();
    let v = BigUint::from(seed) % (p.p() - 1u32) + 1u32;
    p.scalar(&v)
}

fn identity() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(any::<u8>(), 0..40).prop_filter("reserved", |id| id != b"IRM")
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn waters_round_trip(bits in prop::collection::vec(any::<bool>(), 24), msg in prop::collection::vec(any::<u8>(), 0..200), t in any::<u64>(), r in any::<u64>()) {
        let (pk, msk) = waters();
        let v = BitIdentity::from_bits(bits);
        let sk = aibeir::testable::tibe_extract_with(pk, msk, &v, &scalar(r)).unwrap();
        prop_assert!(key_sanity(pk, &v, &sk).unwrap());
        let ct = tibe_encrypt_with(pk, &v, &Plaintext::Bytes(msg.clone()), &scalar(t)).unwrap();
        prop_assert!(tibe_test(pk, &v, &ct.c0).unwrap());
        prop_assert_eq!(tibe_decrypt(pk, &sk, &ct), Plaintext::Bytes(msg));
        let p = params();
        prop_assert_eq!(WatersCiphertext::from_bytes(&ct.to_bytes(p), p).unwrap(), ct);
    }

    #[test]
    fn waters_test_rejects_other_identities(bits in prop::collection::vec(any::<bool>(), 24), flip in 0usize..24, t in any::<u64>()) {
        let (pk, _) = waters();
        let v = BitIdentity::from_bits(bits.clone());
        let mut other = bits;
        other[flip] = !other[flip];
        let w = BitIdentity::from_bits(other);
        prop_assert_ne!(hash_product(pk, &v).unwrap(), hash_product(pk, &w).unwrap());
        let ct = tibe_encrypt_with(pk, &v, &Plaintext::Bytes(vec![]), &scalar(t)).unwrap();
        prop_assert!(!tibe_test(pk, &w, &ct.c0).unwrap());
    }

    #[test]
    fn anonymous_round_trip_and_shape(id in identity(), other in identity(), msg in prop::collection::vec(any::<u8>(), 0..300), r in any::<u64>()) {
        let p = params();
        let (pk, msk) = aibe_setup(p, &mut ChaCha20Rng::seed_from_u64(r)).unwrap();
        let ct = aibe_encrypt_with(&pk, &id, &msg, &scalar(r)).unwrap();
        let sk = aibe_extract(&pk, &msk, &id).unwrap();
        prop_assert_eq!(&aibe_decrypt(&pk, &sk, &ct), &msg);
        let bytes = ct.to_bytes(p);
        prop_assert_eq!(AnonCiphertext::from_bytes(&bytes, p).unwrap(), ct);
        let alt = aibe_encrypt_with(&pk, &other, &msg, &scalar(r ^ 1)).unwrap().to_bytes(p);
        prop_assert_eq!(bytes.len(), alt.len());
    }

    #[test]
    fn aibeir_correctness(id in identity(), msg in prop::collection::vec(any::<u8>(), 0..256), seed in any::<u64>()) {
        let (mpk, msk, irm) = system();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let sk = scheme::extract(mpk, msk, &id, &mut rng).unwrap();
        let ct = scheme::encrypt(mpk, &id, &msg, &mut rng).unwrap();
        prop_assert_eq!(scheme::decrypt(mpk, &sk, &ct).unwrap(), msg);
        prop_assert_eq!(scheme::recover(mpk, irm, &ct), Some(id));
        let bytes = ct.to_bytes().unwrap();
        prop_assert_eq!(AibeirCiphertext::from_bytes(&bytes).unwrap(), ct);
    }

    #[test]
    fn ciphertext_length_ignores_identity_content((a, b) in (1usize..40).prop_flat_map(|n| (prop::collection::vec(b'a'..=b'z', n), prop::collection::vec(b'a'..=b'z', n))), len in 0usize..100, seed in any::<u64>()) {
        let (mpk, _, _) = system();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x = scheme::encrypt(mpk, &a, &vec![1; len], &mut rng).unwrap().to_bytes().unwrap();
        let y = scheme::encrypt(mpk, &b, &vec![2; len], &mut rng).unwrap().to_bytes().unwrap();
        prop_assert_eq!(x.len(), y.len());
    }

    #[test]
    fn mutated_ciphertexts_never_recover_wrong_identity(id in identity(), seed in any::<u64>(), at in any::<prop::sample::Index>(), bit in 0u8..8) {
        let (mpk, _, irm) = system();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let ct = scheme::encrypt(mpk, &id, b"payload", &mut rng).unwrap();
        let mut bytes = ct.to_bytes().unwrap();
        let i = at.index(bytes.len());
        bytes[i] ^= 1 << bit;
        if let Ok(mutated) = AibeirCiphertext::from_bytes(&bytes) {
            let got = scheme::recover(mpk, irm, &mutated);
            // flipping a bit of c1 leaves recovery intact; anything else must give ⊥
            if mutated.c2 == ct.c2 && mutated.c3 == ct.c3 {
                prop_assert_eq!(got, Some(id));
            } else {
                prop_assert_eq!(got, None);
            }
        }
    }

    #[test]
    fn point_encoding_round_trip(k in any::<u64>()) {
        let p = params();
        let pt = p.point_mul(&p.generator(), &scalar(k));
        let bytes = p.serialize_g(&pt);
        prop_assert_eq!(bytes.len(), p.point_len());
        prop_assert_eq!(p.deserialize_g(&bytes).unwrap(), pt);
        let e = p.pairing(&pt, &p.generator());
        prop_assert_eq!(p.deserialize_gt(&p.serialize_gt(&e)).unwrap(), e);
    }

    #[test]
    fn extraction_is_consistent(id in identity(), seed in any::<u64>()) {
        let (pk, msk) = waters();
        let v = BitIdentity::from_identity(&id, 24);
        let sk = tibe_extract(pk, msk, &v, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(key_sanity(pk, &v, &sk).unwrap());
    }
}
