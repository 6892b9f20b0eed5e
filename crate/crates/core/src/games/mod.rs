//! Challengers for the anonymity, stronger semantic security and recovery experiments.
//!
//! Each run is sequential and deterministic in the supplied rng. Adversaries talk to the
//! challenger only through an [`Oracle`], which enforces the identity restrictions and a
//! per-phase query cap. A restricted query forfeits the run rather than aborting it.

mod adversaries;
mod estimate;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::aibeir::{
    self, AccessLog, AibeirCiphertext, AibeirMasterKey, AibeirPublicKey, AibeirUserKey,
    EncryptionRandomness, InstrumentedCiphertext, IrmKey,
};
use crate::anonymous::{aibe_decrypt, aibe_extract, AnonCiphertext};
use crate::error::Result;
use crate::pairing::CurveParams;
use crate::testable::{
    tibe_decrypt, tibe_test, BitIdentity, IdentityPart, MessagePart, Plaintext, WatersCiphertext,
};

pub use adversaries::{
    CheatingAdversary, FrankensteinAdversary, HonestAdversary, IrmAdversary, RandomBytes,
    RandomGuesser,
};
pub use estimate::{estimate_advantage, AdvantageEstimate, Contestant, Execution};

pub const DEFAULT_QUERY_CAP: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Game {
    Anonymity,
    StrongerSemantic,
    Recovery,
}

impl Game {
    /// Win rate of a trivial adversary.
    pub fn baseline(self) -> f64 {
        match self {
            Game::Anonymity => 0.25,
            Game::StrongerSemantic => 0.5,
            Game::Recovery => 0.0,
        }
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Game::Anonymity => "ANON",
            Game::StrongerSemantic => "SSS",
            Game::Recovery => "RECOVERY",
        })
    }
}

#[derive(Clone, Debug)]
pub struct GameParams {
    pub curve: CurveParams,
    pub identity_bits: usize,
    pub id_epsilon: Vec<u8>,
    pub query_cap: usize,
    /// When set, every recover run by the challenger goes through an instrumented ciphertext.
    pub access_log: Option<Arc<AccessLog>>,
}

impl GameParams {
    pub fn new(curve: CurveParams) -> Self {
        GameParams {
            curve,
            identity_bits: crate::testable::DEFAULT_IDENTITY_BITS,
            id_epsilon: b"IRM".to_vec(),
            query_cap: DEFAULT_QUERY_CAP,
            access_log: None,
        }
    }

    fn recover(
        &self,
        mpk: &AibeirPublicKey,
        irm: &IrmKey,
        ct: &AibeirCiphertext,
    ) -> Option<Vec<u8>> {
        recover_logged(self.access_log.as_deref(), mpk, irm, ct)
    }
}

/// `recover`, counted against `log` when one is given.
pub fn recover_logged(
    log: Option<&AccessLog>,
    mpk: &AibeirPublicKey,
    irm: &IrmKey,
    ct: &AibeirCiphertext,
) -> Option<Vec<u8>> {
    match log {
        Some(log) => aibeir::recover(mpk, irm, &InstrumentedCiphertext::new(ct, log)),
        None => aibeir::recover(mpk, irm, ct),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Setup,
    Leak,
    Extract,
    Recover,
    Challenge,
    Response,
    Guess,
    Violation,
    Outcome,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Setup => "SETUP",
            EventKind::Leak => "LEAK",
            EventKind::Extract => "EXTRACT",
            EventKind::Recover => "RECOVER",
            EventKind::Challenge => "CHALLENGE",
            EventKind::Response => "RESPONSE",
            EventKind::Guess => "GUESS",
            EventKind::Violation => "VIOLATION",
            EventKind::Outcome => "OUTCOME",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub kind: EventKind,
    pub identity: Vec<u8>,
    pub digest: [u8; 8],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameTranscript {
    pub game: Game,
    pub events: Vec<Event>,
    /// Identities the adversary may not extract (empty outside the challenge phases).
    pub restricted: Vec<Vec<u8>>,
    /// `(b, γ)` for anonymity, `b` for semantic security, empty for recovery.
    pub hidden: Vec<bool>,
    pub guess: Vec<bool>,
    pub violation: Option<String>,
    pub won: bool,
}

fn digest(bytes: &[u8]) -> [u8; 8] {
    let full = Sha256::digest(bytes);
    let mut out = [0u8; 8];
    out.copy_from_slice(&full[..8]);
    out
}

impl GameTranscript {
    fn new(game: Game) -> Self {
        GameTranscript {
            game,
            events: Vec::new(),
            restricted: Vec::new(),
            hidden: Vec::new(),
            guess: Vec::new(),
            violation: None,
            won: false,
        }
    }

    fn record(&mut self, kind: EventKind, identity: &[u8], payload: &[u8]) {
        self.events.push(Event {
            kind,
            identity: identity.to_vec(),
            digest: digest(payload),
        });
    }

    fn forfeit(&mut self, identity: &[u8], reason: impl Into<String>) {
        let reason = reason.into();
        self.record(EventKind::Violation, identity, reason.as_bytes());
        self.violation.get_or_insert(reason);
        self.won = false;
    }

    pub fn forfeited(&self) -> bool {
        self.violation.is_some()
    }

    pub fn extracted(&self) -> impl Iterator<Item = &[u8]> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Extract)
            .map(|e| e.identity.as_slice())
    }

    /// Post-hoc audit: no answered extraction touches a restricted identity.
    pub fn restrictions_hold(&self) -> bool {
        self.extracted()
            .all(|id| !self.restricted.iter().any(|r| r == id))
    }

    /// One line per event: `event-type \t identity-hex \t digest-hex`.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                e.kind.as_str(),
                hex::encode(&e.identity),
                hex::encode(e.digest)
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleError {
    /// Restricted identity; the run is forfeited.
    Forbidden,
    /// Per-phase cap reached; the run is forfeited.
    CapReached,
    /// Query type not offered in this game.
    Unavailable,
    /// The run was already forfeited.
    Closed,
}

/// The adversary's only channel to the challenger's secrets.
pub struct Oracle<'a> {
    mpk: &'a AibeirPublicKey,
    msk: &'a AibeirMasterKey,
    irm: Option<&'a IrmKey>,
    params: &'a GameParams,
    transcript: &'a mut GameTranscript,
    rng: &'a mut dyn RngCore,
    queries: usize,
}

impl Oracle<'_> {
    pub fn queries(&self) -> usize {
        self.queries
    }

    fn admit(&mut self, id: &[u8]) -> std::result::Result<(), OracleError> {
        if self.transcript.forfeited() {
            return Err(OracleError::Closed);
        }
        if self.queries >= self.params.query_cap {
            self.transcript.forfeit(id, "query cap reached");
            return Err(OracleError::CapReached);
        }
        self.queries += 1;
        Ok(())
    }

    /// Key extraction. Asking for a restricted identity or for `id_ε` forfeits.
    pub fn extract(&mut self, id: &[u8]) -> std::result::Result<AibeirUserKey, OracleError> {
        self.admit(id)?;
        if self.transcript.restricted.iter().any(|r| r == id) {
            self.transcript
                .forfeit(id, "extraction of a challenge identity");
            return Err(OracleError::Forbidden);
        }
        match aibeir::extract(self.mpk, self.msk, id, &mut *self.rng) {
            Ok(sk) => {
                self.transcript
                    .record(EventKind::Extract, id, &sk.to_bytes(self.mpk));
                Ok(sk)
            }
            Err(e) => {
                self.transcript
                    .forfeit(id, format!("extraction refused: {e}"));
                Err(OracleError::Forbidden)
            }
        }
    }

    /// Recovery queries; offered only in the recovery game.
    pub fn recover(
        &mut self,
        ct: &AibeirCiphertext,
    ) -> std::result::Result<Option<Vec<u8>>, OracleError> {
        let Some(irm) = self.irm else {
            return Err(OracleError::Unavailable);
        };
        self.admit(&[])?;
        let out = self.params.recover(self.mpk, irm, ct);
        let id = out.clone().unwrap_or_default();
        self.transcript
            .record(EventKind::Recover, &id, &ct.to_bytes().unwrap_or_default());
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnonymityChallenge {
    pub messages: [Vec<u8>; 2],
    pub identities: [Vec<u8>; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemanticChallenge {
    pub messages: [Vec<u8>; 2],
    pub identity: Vec<u8>,
}

/// Disclosed encryption inputs that let the challenger re-encrypt and compare.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityWitness {
    pub message: Vec<u8>,
    pub identity: Vec<u8>,
    pub randomness: EncryptionRandomness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryChallenge {
    pub ciphertext: AibeirCiphertext,
    pub witness: Option<ValidityWitness>,
}

pub trait AnonymityAdversary {
    fn setup(&mut self, _mpk: &AibeirPublicKey, _rng: &mut dyn RngCore) {}
    fn phase1(&mut self, _oracle: &mut Oracle<'_>, _rng: &mut dyn RngCore) {}
    fn challenge(&mut self, rng: &mut dyn RngCore) -> AnonymityChallenge;
    fn phase2(&mut self, _ct: &AibeirCiphertext, _oracle: &mut Oracle<'_>, _rng: &mut dyn RngCore) {
    }
    /// `(b′, γ′)`.
    fn guess(&mut self, rng: &mut dyn RngCore) -> (bool, bool);
    /// Called only by [`run_anonymity_game_with_leaked_master_key`].
    fn leak(&mut self, _mpk: &AibeirPublicKey, _msk: &AibeirMasterKey) {}
}

pub trait SemanticAdversary {
    fn setup(&mut self, _mpk: &AibeirPublicKey, _irm: &IrmKey, _rng: &mut dyn RngCore) {}
    fn phase1(&mut self, _oracle: &mut Oracle<'_>, _rng: &mut dyn RngCore) {}
    fn challenge(&mut self, rng: &mut dyn RngCore) -> SemanticChallenge;
    fn phase2(&mut self, _ct: &AibeirCiphertext, _oracle: &mut Oracle<'_>, _rng: &mut dyn RngCore) {
    }
    fn guess(&mut self, rng: &mut dyn RngCore) -> bool;
    /// Called only by [`run_stronger_semantic_game_with_leaked_master_key`].
    fn leak(&mut self, _mpk: &AibeirPublicKey, _msk: &AibeirMasterKey) {}
}

pub trait RecoveryAdversary {
    fn setup(&mut self, _mpk: &AibeirPublicKey, _rng: &mut dyn RngCore) {}
    fn monitor(&mut self, _oracle: &mut Oracle<'_>, _rng: &mut dyn RngCore) {}
    fn challenge(&mut self, rng: &mut dyn RngCore) -> RecoveryChallenge;
}

fn adversary_rng<R: RngCore + ?Sized>(rng: &mut R) -> ChaCha20Rng {
    let mut seed = [0u8; 32];
    rng.fill_bytes(&mut seed);
    ChaCha20Rng::from_seed(seed)
}

fn check_challenge_identity(
    params: &GameParams,
    t: &GameTranscript,
    id: &[u8],
) -> std::result::Result<(), &'static str> {
    if id == params.id_epsilon.as_slice() {
        return Err("challenge identity is the recovery identity");
    }
    if id.len() > aibeir::MAX_IDENTITY_LEN {
        return Err("challenge identity too long");
    }
    if t.extracted().any(|q| q == id) {
        return Err("challenge identity was extracted in phase 1");
    }
    Ok(())
}

fn check_messages(messages: &[Vec<u8>; 2]) -> std::result::Result<(), &'static str> {
    if messages[0].len() != messages[1].len() {
        return Err("challenge messages differ in length");
    }
    if messages[0].len() > aibeir::MAX_MESSAGE {
        return Err("challenge message too long");
    }
    Ok(())
}

fn finish(mut t: GameTranscript, won: bool) -> GameTranscript {
    t.won = won && !t.forfeited();
    let outcome: &[u8] = if t.won { b"won" } else { b"lost" };
    t.record(EventKind::Outcome, &[], outcome);
    t
}

pub fn run_anonymity_game<A, R>(
    adversary: &mut A,
    params: &GameParams,
    rng: &mut R,
) -> Result<GameTranscript>
where
    A: AnonymityAdversary + ?Sized,
    R: RngCore,
{
    anonymity(adversary, params, rng, false)
}

/// Self-test variant: the adversary also receives the master key and a LEAK event is logged.
pub fn run_anonymity_game_with_leaked_master_key<A, R>(
    adversary: &mut A,
    params: &GameParams,
    rng: &mut R,
) -> Result<GameTranscript>
where
    A: AnonymityAdversary + ?Sized,
    R: RngCore,
{
    anonymity(adversary, params, rng, true)
}

fn anonymity<A, R>(
    adv: &mut A,
    params: &GameParams,
    rng: &mut R,
    leak: bool,
) -> Result<GameTranscript>
where
    A: AnonymityAdversary + ?Sized,
    R: RngCore,
{
    let mut t = GameTranscript::new(Game::Anonymity);
    let (mpk, msk, _irm) =
        aibeir::setup(&params.curve, params.identity_bits, &params.id_epsilon, rng)?;
    t.record(EventKind::Setup, &[], &mpk.to_bytes());
    let mut arng = adversary_rng(rng);
    if leak {
        t.record(EventKind::Leak, &[], &msk.to_bytes(&mpk));
        adv.leak(&mpk, &msk);
    }
    adv.setup(&mpk, &mut arng);

    let mut oracle = Oracle {
        mpk: &mpk,
        msk: &msk,
        irm: None,
        params,
        transcript: &mut t,
        rng,
        queries: 0,
    };
    adv.phase1(&mut oracle, &mut arng);
    if t.forfeited() {
        return Ok(finish(t, false));
    }

    let ch = adv.challenge(&mut arng);
    let checks = check_messages(&ch.messages)
        .and_then(|_| check_challenge_identity(params, &t, &ch.identities[0]))
        .and_then(|_| check_challenge_identity(params, &t, &ch.identities[1]));
    if let Err(reason) = checks {
        t.forfeit(&[], reason);
        return Ok(finish(t, false));
    }
    let b: bool = rng.gen();
    let gamma: bool = rng.gen();
    let ct = aibeir::encrypt(
        &mpk,
        &ch.identities[gamma as usize],
        &ch.messages[b as usize],
        rng,
    )?;
    t.hidden = vec![b, gamma];
    t.restricted = ch.identities.to_vec();
    t.record(EventKind::Challenge, &[], &ct.to_bytes()?);

    let mut oracle = Oracle {
        mpk: &mpk,
        msk: &msk,
        irm: None,
        params,
        transcript: &mut t,
        rng,
        queries: 0,
    };
    adv.phase2(&ct, &mut oracle, &mut arng);
    if t.forfeited() {
        return Ok(finish(t, false));
    }

    let (gb, gg) = adv.guess(&mut arng);
    t.guess = vec![gb, gg];
    t.record(EventKind::Guess, &[], &[gb as u8, gg as u8]);
    Ok(finish(t, gb == b && gg == gamma))
}

pub fn run_stronger_semantic_game<A, R>(
    adversary: &mut A,
    params: &GameParams,
    rng: &mut R,
) -> Result<GameTranscript>
where
    A: SemanticAdversary + ?Sized,
    R: RngCore,
{
    semantic(adversary, params, rng, false)
}

/// Self-test variant: the adversary also receives the master key and a LEAK event is logged.
pub fn run_stronger_semantic_game_with_leaked_master_key<A, R>(
    adversary: &mut A,
    params: &GameParams,
    rng: &mut R,
) -> Result<GameTranscript>
where
    A: SemanticAdversary + ?Sized,
    R: RngCore,
{
    semantic(adversary, params, rng, true)
}

fn semantic<A, R>(
    adv: &mut A,
    params: &GameParams,
    rng: &mut R,
    leak: bool,
) -> Result<GameTranscript>
where
    A: SemanticAdversary + ?Sized,
    R: RngCore,
{
    let mut t = GameTranscript::new(Game::StrongerSemantic);
    let (mpk, msk, irm) =
        aibeir::setup(&params.curve, params.identity_bits, &params.id_epsilon, rng)?;
    t.record(EventKind::Setup, &[], &mpk.to_bytes());
    let mut arng = adversary_rng(rng);
    if leak {
        t.record(EventKind::Leak, &[], &msk.to_bytes(&mpk));
        adv.leak(&mpk, &msk);
    }
    adv.setup(&mpk, &irm, &mut arng);

    let mut oracle = Oracle {
        mpk: &mpk,
        msk: &msk,
        irm: None,
        params,
        transcript: &mut t,
        rng,
        queries: 0,
    };
    adv.phase1(&mut oracle, &mut arng);
    if t.forfeited() {
        return Ok(finish(t, false));
    }

    let ch = adv.challenge(&mut arng);
    if let Err(reason) = check_messages(&ch.messages)
        .and_then(|_| check_challenge_identity(params, &t, &ch.identity))
    {
        t.forfeit(&ch.identity, reason);
        return Ok(finish(t, false));
    }
    let b: bool = rng.gen();
    let ct = aibeir::encrypt(&mpk, &ch.identity, &ch.messages[b as usize], rng)?;
    t.hidden = vec![b];
    t.restricted = vec![ch.identity.clone()];
    t.record(EventKind::Challenge, &ch.identity, &ct.to_bytes()?);

    let mut oracle = Oracle {
        mpk: &mpk,
        msk: &msk,
        irm: None,
        params,
        transcript: &mut t,
        rng,
        queries: 0,
    };
    adv.phase2(&ct, &mut oracle, &mut arng);
    if t.forfeited() {
        return Ok(finish(t, false));
    }

    let g = adv.guess(&mut arng);
    t.guess = vec![g];
    t.record(EventKind::Guess, &[], &[g as u8]);
    Ok(finish(t, g == b))
}

/// How the challenger classified the submitted ciphertext.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    /// Valid under the given identity.
    Valid(Vec<u8>),
    Invalid,
}

/// Decides validity of a submitted ciphertext.
///
/// A witness that re-encrypts to exactly the submitted bytes proves validity. Without one
/// (or with one that does not match) the challenger falls back to checking, with its own
/// master keys, that all three segments are well-formed encryptions under one identity.
pub fn adjudicate(
    mpk: &AibeirPublicKey,
    msk: &AibeirMasterKey,
    irm: &IrmKey,
    challenge: &RecoveryChallenge,
) -> Validity {
    if let Some(w) = &challenge.witness {
        if let Ok(ct) = aibeir::encrypt_with_randomness(mpk, &w.identity, &w.message, &w.randomness)
        {
            if ct == challenge.ciphertext {
                return Validity::Valid(w.identity.clone());
            }
        }
    }
    structural_validity(mpk, msk, irm, &challenge.ciphertext)
        .map_or(Validity::Invalid, Validity::Valid)
}

fn structural_validity(
    mpk: &AibeirPublicKey,
    msk: &AibeirMasterKey,
    irm: &IrmKey,
    ct: &AibeirCiphertext,
) -> Option<Vec<u8>> {
    let p = mpk.params();
    let n = mpk.testable.identity_bits();
    MessagePart::masked_from_bytes(&ct.c1).ok()?;

    let escrow = WatersCiphertext::from_bytes(&ct.c3, p).ok()?;
    let MessagePart::Masked(_) = escrow.c1 else {
        return None;
    };
    if escrow.c0.randomizer.is_identity()
        || !tibe_test(
            &mpk.testable,
            &BitIdentity::from_identity(&mpk.id_epsilon, n),
            &escrow.c0,
        )
        .ok()?
    {
        return None;
    }
    let Plaintext::Bytes(id) = tibe_decrypt(&mpk.testable, &irm.escrow, &escrow) else {
        return None;
    };
    if id.len() > aibeir::MAX_IDENTITY_LEN || id == mpk.id_epsilon {
        return None;
    }

    let c2 = AnonCiphertext::from_bytes(&ct.c2, p).ok()?;
    if c2.u.is_identity() {
        return None;
    }
    let sk_a = aibe_extract(&mpk.anonymous, &msk.anonymous, &id).ok()?;
    let c0 = IdentityPart::from_bytes(&aibe_decrypt(&mpk.anonymous, &sk_a, &c2), p).ok()?;
    if c0.randomizer.is_identity() {
        return None;
    }
    tibe_test(&mpk.testable, &BitIdentity::from_identity(&id, n), &c0)
        .ok()?
        .then_some(id)
}

pub fn run_recovery_game<A, R>(
    adv: &mut A,
    params: &GameParams,
    rng: &mut R,
) -> Result<GameTranscript>
where
    A: RecoveryAdversary + ?Sized,
    R: RngCore,
{
    let mut t = GameTranscript::new(Game::Recovery);
    let (mpk, msk, irm) =
        aibeir::setup(&params.curve, params.identity_bits, &params.id_epsilon, rng)?;
    t.record(EventKind::Setup, &[], &mpk.to_bytes());
    let mut arng = adversary_rng(rng);
    adv.setup(&mpk, &mut arng);

    let mut oracle = Oracle {
        mpk: &mpk,
        msk: &msk,
        irm: Some(&irm),
        params,
        transcript: &mut t,
        rng,
        queries: 0,
    };
    adv.monitor(&mut oracle, &mut arng);
    if t.forfeited() {
        return Ok(finish(t, false));
    }

    let ch = adv.challenge(&mut arng);
    let bytes = ch.ciphertext.to_bytes().unwrap_or_default();
    t.record(EventKind::Challenge, &[], &bytes);
    let validity = adjudicate(&mpk, &msk, &irm, &ch);
    let recovered = params.recover(&mpk, &irm, &ch.ciphertext);
    t.record(
        EventKind::Response,
        recovered.as_deref().unwrap_or_default(),
        recovered.as_deref().unwrap_or(b"BOTTOM"),
    );

    let won = match (&validity, &recovered) {
        (Validity::Valid(expected), got) => got.as_ref() != Some(expected),
        (Validity::Invalid, Some(id)) => !t.extracted().any(|q| q == id.as_slice()),
        (Validity::Invalid, None) => false,
    };
    Ok(finish(t, won))
}

/// Shared helper: a fresh identity string unlikely to clash with anything else in a run.
pub(crate) fn random_identity(prefix: &str, rng: &mut dyn RngCore) -> Vec<u8> {
    format!("{prefix}-{:016x}", rng.next_u64()).into_bytes()
}

#[cfg(test)]
mod tests;
