//! Reference adversaries used by the self-tests and the estimator.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{
    random_identity, recover_logged, AnonymityAdversary, AnonymityChallenge, Oracle,
    RecoveryAdversary, RecoveryChallenge, SemanticAdversary, SemanticChallenge, ValidityWitness,
};
use crate::aibeir::{
    self, AccessLog, AibeirCiphertext, AibeirMasterKey, AibeirPublicKey, EncryptionRandomness,
    IrmKey,
};

const MESSAGE_LEN: usize = 32;

fn zeros_and_ones() -> [Vec<u8>; 2] {
    [vec![0x00; MESSAGE_LEN], vec![0xff; MESSAGE_LEN]]
}

/// Picks equal-length messages and guesses uniformly.
#[derive(Clone, Debug, Default)]
pub struct RandomGuesser;

impl AnonymityAdversary for RandomGuesser {
    fn challenge(&mut self, rng: &mut dyn RngCore) -> AnonymityChallenge {
        AnonymityChallenge {
            messages: zeros_and_ones(),
            identities: [
                random_identity("guess-0", rng),
                random_identity("guess-1", rng),
            ],
        }
    }

    fn guess(&mut self, rng: &mut dyn RngCore) -> (bool, bool) {
        (rng.gen(), rng.gen())
    }
}

impl SemanticAdversary for RandomGuesser {
    fn challenge(&mut self, rng: &mut dyn RngCore) -> SemanticChallenge {
        SemanticChallenge {
            messages: zeros_and_ones(),
            identity: random_identity("guess", rng),
        }
    }

    fn guess(&mut self, rng: &mut dyn RngCore) -> bool {
        rng.gen()
    }
}

/// Harness self-test: given the master key out of band it decrypts the challenge.
/// Without the leak it degrades to random guessing.
#[derive(Clone, Debug, Default)]
pub struct CheatingAdversary {
    keys: Option<(AibeirPublicKey, AibeirMasterKey)>,
    messages: [Vec<u8>; 2],
    identities: Vec<Vec<u8>>,
    ciphertext: Option<AibeirCiphertext>,
}

impl CheatingAdversary {
    /// `(b, γ)` read off the first identity key that decrypts to a challenge message.
    fn open(&self, rng: &mut dyn RngCore) -> Option<(bool, bool)> {
        let (mpk, msk) = self.keys.as_ref()?;
        let ct = self.ciphertext.as_ref()?;
        for (gi, id) in self.identities.iter().enumerate() {
            let sk = aibeir::extract(mpk, msk, id, &mut *rng).ok()?;
            if let Ok(m) = aibeir::decrypt(mpk, &sk, ct) {
                if let Some(bi) = self.messages.iter().position(|c| *c == m) {
                    return Some((bi == 1, gi == 1));
                }
            }
        }
        None
    }
}

impl AnonymityAdversary for CheatingAdversary {
    fn leak(&mut self, mpk: &AibeirPublicKey, msk: &AibeirMasterKey) {
        self.keys = Some((mpk.clone(), msk.clone()));
    }

    fn challenge(&mut self, rng: &mut dyn RngCore) -> AnonymityChallenge {
        self.messages = zeros_and_ones();
        self.identities = vec![
            random_identity("cheat-0", rng),
            random_identity("cheat-1", rng),
        ];
        AnonymityChallenge {
            messages: self.messages.clone(),
            identities: [self.identities[0].clone(), self.identities[1].clone()],
        }
    }

    fn phase2(&mut self, ct: &AibeirCiphertext, _oracle: &mut Oracle<'_>, _rng: &mut dyn RngCore) {
        self.ciphertext = Some(ct.clone());
    }

    fn guess(&mut self, rng: &mut dyn RngCore) -> (bool, bool) {
        self.open(rng).unwrap_or_else(|| (rng.gen(), rng.gen()))
    }
}

impl SemanticAdversary for CheatingAdversary {
    fn leak(&mut self, mpk: &AibeirPublicKey, msk: &AibeirMasterKey) {
        self.keys = Some((mpk.clone(), msk.clone()));
    }

    fn challenge(&mut self, rng: &mut dyn RngCore) -> SemanticChallenge {
        self.messages = zeros_and_ones();
        self.identities = vec![random_identity("cheat", rng)];
        SemanticChallenge {
            messages: self.messages.clone(),
            identity: self.identities[0].clone(),
        }
    }

    fn phase2(&mut self, ct: &AibeirCiphertext, _oracle: &mut Oracle<'_>, _rng: &mut dyn RngCore) {
        self.ciphertext = Some(ct.clone());
    }

    fn guess(&mut self, rng: &mut dyn RngCore) -> bool {
        match self.open(rng) {
            Some((b, _)) => b,
            None => rng.gen(),
        }
    }
}

/// Holds `sk_IRM`, recovers the challenge identity, then guesses the message bit from the
/// Hamming weight of `c1` (all-zero versus all-one plaintexts).
#[derive(Clone, Debug, Default)]
pub struct IrmAdversary {
    keys: Option<(AibeirPublicKey, IrmKey)>,
    target: Vec<u8>,
    ciphertext: Option<AibeirCiphertext>,
    access_log: Option<Arc<AccessLog>>,
    recoveries: Option<Arc<AtomicUsize>>,
}

impl IrmAdversary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Route recover calls through an instrumented ciphertext.
    pub fn with_access_log(mut self, log: Arc<AccessLog>) -> Self {
        self.access_log = Some(log);
        self
    }

    /// Counts challenges whose identity was recovered correctly.
    pub fn with_recovery_counter(mut self, counter: Arc<AtomicUsize>) -> Self {
        self.recoveries = Some(counter);
        self
    }
}

impl SemanticAdversary for IrmAdversary {
    fn setup(&mut self, mpk: &AibeirPublicKey, irm: &IrmKey, _rng: &mut dyn RngCore) {
        self.keys = Some((mpk.clone(), irm.clone()));
    }

    fn challenge(&mut self, rng: &mut dyn RngCore) -> SemanticChallenge {
        self.target = random_identity("irm-target", rng);
        SemanticChallenge {
            messages: zeros_and_ones(),
            identity: self.target.clone(),
        }
    }

    fn phase2(&mut self, ct: &AibeirCiphertext, _oracle: &mut Oracle<'_>, _rng: &mut dyn RngCore) {
        if let Some((mpk, irm)) = &self.keys {
            let got = recover_logged(self.access_log.as_deref(), mpk, irm, ct);
            if got.as_deref() == Some(self.target.as_slice()) {
                if let Some(c) = &self.recoveries {
                    c.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
        self.ciphertext = Some(ct.clone());
    }

    fn guess(&mut self, rng: &mut dyn RngCore) -> bool {
        let Some(ct) = &self.ciphertext else {
            return rng.gen();
        };
        let mask = ct.c1.get(2..).unwrap_or_default();
        let weight: u32 = mask.iter().map(|b| b.count_ones()).sum();
        let half = 4 * mask.len() as u32;
        if weight == half {
            rng.gen()
        } else {
            weight > half
        }
    }
}

/// Submits a genuine encryption together with its witness.
#[derive(Clone, Debug, Default)]
pub struct HonestAdversary {
    mpk: Option<AibeirPublicKey>,
}

impl RecoveryAdversary for HonestAdversary {
    fn setup(&mut self, mpk: &AibeirPublicKey, _rng: &mut dyn RngCore) {
        self.mpk = Some(mpk.clone());
    }

    fn challenge(&mut self, rng: &mut dyn RngCore) -> RecoveryChallenge {
        let mpk = self.mpk.as_ref().expect("setup runs first");
        let identity = random_identity("honest", rng);
        let mut message = vec![0u8; 24];
        rng.fill_bytes(&mut message);
        let randomness = EncryptionRandomness::sample(mpk.params(), rng);
        let ciphertext = aibeir::encrypt_with_randomness(mpk, &identity, &message, &randomness)
            .expect("fresh identity is never reserved");
        RecoveryChallenge {
            ciphertext,
            witness: Some(ValidityWitness {
                message,
                identity,
                randomness,
            }),
        }
    }
}

/// Splices segments of encryptions under two different identities.
#[derive(Clone, Debug, Default)]
pub struct FrankensteinAdversary {
    mpk: Option<AibeirPublicKey>,
}

impl RecoveryAdversary for FrankensteinAdversary {
    fn setup(&mut self, mpk: &AibeirPublicKey, _rng: &mut dyn RngCore) {
        self.mpk = Some(mpk.clone());
    }

    fn challenge(&mut self, rng: &mut dyn RngCore) -> RecoveryChallenge {
        let mpk = self.mpk.as_ref().expect("setup runs first");
        let id1 = random_identity("victim", rng);
        let id2 = random_identity("decoy", rng);
        let msg = b"spliced ciphertext body".to_vec();
        let a = aibeir::encrypt(mpk, &id1, &msg, &mut *rng).expect("valid inputs");
        let b = aibeir::encrypt(mpk, &id2, &msg, &mut *rng).expect("valid inputs");
        // either the escrow or the anonymous layer comes from the other identity
        let ciphertext = if rng.gen() {
            AibeirCiphertext { c3: b.c3, ..a }
        } else {
            AibeirCiphertext { c2: b.c2, ..a }
        };
        RecoveryChallenge {
            ciphertext,
            witness: None,
        }
    }
}

/// Takes a genuine encryption and overwrites segment contents with random bytes, keeping
/// every header and length prefix so the ciphertext still frames correctly.
#[derive(Clone, Debug)]
pub struct RandomBytes {
    mpk: Option<AibeirPublicKey>,
    escrow_only: bool,
}

impl RandomBytes {
    /// Randomizes all three segments.
    pub fn whole() -> Self {
        RandomBytes {
            mpk: None,
            escrow_only: false,
        }
    }

    /// Randomizes only `c3`.
    pub fn escrow_only() -> Self {
        RandomBytes {
            mpk: None,
            escrow_only: true,
        }
    }
}

impl Default for RandomBytes {
    fn default() -> Self {
        Self::whole()
    }
}

/// Overwrites the payload of each `u16`-prefixed field after a `header`-byte prefix.
fn scramble_fields(bytes: &mut [u8], header: usize, rng: &mut dyn RngCore) {
    let mut at = header;
    while at + 2 <= bytes.len() {
        let len = u16::from_be_bytes([bytes[at], bytes[at + 1]]) as usize;
        let end = (at + 2 + len).min(bytes.len());
        rng.fill_bytes(&mut bytes[at + 2..end]);
        at = end;
    }
}

impl RecoveryAdversary for RandomBytes {
    fn setup(&mut self, mpk: &AibeirPublicKey, _rng: &mut dyn RngCore) {
        self.mpk = Some(mpk.clone());
    }

    fn challenge(&mut self, rng: &mut dyn RngCore) -> RecoveryChallenge {
        let mpk = self.mpk.as_ref().expect("setup runs first");
        let id = random_identity("fuzz", rng);
        let mut ct = aibeir::encrypt(mpk, &id, b"fuzzed", &mut *rng).expect("valid inputs");
        scramble_fields(&mut ct.c3, 6, rng);
        if !self.escrow_only {
            scramble_fields(&mut ct.c1, 0, rng);
            let header = 6;
            rng.fill_bytes(&mut ct.c2[header..]);
        }
        RecoveryChallenge {
            ciphertext: ct,
            witness: None,
        }
    }
}
