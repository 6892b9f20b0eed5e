use super::*;
use crate::pairing::generate_params;

fn small() -> GameParams {
    let mut gp = GameParams::new(generate_params(32, b"games-unit").unwrap());
    gp.identity_bits = 16;
    gp
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Queries whatever it is told to, at the phase it is told to.
struct Scripted {
    phase1: Vec<Vec<u8>>,
    phase2: Vec<Vec<u8>>,
    messages: [Vec<u8>; 2],
    errors: Vec<OracleError>,
}

impl Scripted {
    fn new() -> Self {
        Scripted {
            phase1: vec![],
            phase2: vec![],
            messages: [b"aa".to_vec(), b"bb".to_vec()],
            errors: vec![],
        }
    }

    fn ask(&mut self, oracle: &mut Oracle<'_>, ids: Vec<Vec<u8>>) {
        for id in ids {
            if let Err(e) = oracle.extract(&id) {
                self.errors.push(e);
            }
        }
    }
}

impl AnonymityAdversary for Scripted {
    fn phase1(&mut self, oracle: &mut Oracle<'_>, _rng: &mut dyn RngCore) {
        let ids = std::mem::take(&mut self.phase1);
        self.ask(oracle, ids);
    }
    fn challenge(&mut self, _rng: &mut dyn RngCore) -> AnonymityChallenge {
        AnonymityChallenge {
            messages: self.messages.clone(),
            identities: [b"id0".to_vec(), b"id1".to_vec()],
        }
    }
    fn phase2(&mut self, _ct: &AibeirCiphertext, oracle: &mut Oracle<'_>, _rng: &mut dyn RngCore) {
        let ids = std::mem::take(&mut self.phase2);
        self.ask(oracle, ids);
    }
    fn guess(&mut self, _rng: &mut dyn RngCore) -> (bool, bool) {
        (false, false)
    }
}

#[test]
fn cheating_adversary_always_wins() {
    let gp = small();
    for seed in 0..20 {
        let t = run_anonymity_game_with_leaked_master_key(
            &mut CheatingAdversary::default(),
            &gp,
            &mut rng(seed),
        )
        .unwrap();
        assert!(t.won, "anonymity seed {seed}");
        assert_eq!(t.events[1].kind, EventKind::Leak);
        let t = run_stronger_semantic_game_with_leaked_master_key(
            &mut CheatingAdversary::default(),
            &gp,
            &mut rng(seed),
        )
        .unwrap();
        assert!(t.won, "semantic seed {seed}");
    }
}

#[test]
fn restricted_queries_forfeit() {
    let gp = small();
    let mut adv = Scripted::new();
    adv.phase1 = vec![b"carol".to_vec()];
    adv.phase2 = vec![b"dave".to_vec(), b"id0".to_vec(), b"erin".to_vec()];
    let t = run_anonymity_game(&mut adv, &gp, &mut rng(1)).unwrap();
    assert!(t.forfeited());
    assert!(!t.won);
    assert_eq!(
        adv.errors,
        vec![OracleError::Forbidden, OracleError::Closed]
    );
    assert!(t.restrictions_hold());
    assert_eq!(
        t.extracted().collect::<Vec<_>>(),
        vec![&b"carol"[..], b"dave"]
    );
    assert!(t
        .events
        .iter()
        .any(|e| e.kind == EventKind::Violation && e.identity == b"id0"));
}

#[test]
fn phase1_challenge_identity_and_reserved_identity_forfeit() {
    let gp = small();
    let mut adv = Scripted::new();
    adv.phase1 = vec![b"id1".to_vec()];
    let t = run_anonymity_game(&mut adv, &gp, &mut rng(2)).unwrap();
    assert!(t.forfeited());

    let mut adv = Scripted::new();
    adv.phase1 = vec![b"IRM".to_vec()];
    let t = run_anonymity_game(&mut adv, &gp, &mut rng(2)).unwrap();
    assert!(t.forfeited());
    assert_eq!(adv.errors, vec![OracleError::Forbidden]);
}

#[test]
fn unequal_messages_forfeit() {
    let gp = small();
    let mut adv = Scripted::new();
    adv.messages = [b"a".to_vec(), b"bb".to_vec()];
    let t = run_anonymity_game(&mut adv, &gp, &mut rng(3)).unwrap();
    assert_eq!(
        t.violation.as_deref(),
        Some("challenge messages differ in length")
    );
}

#[test]
fn query_cap_is_enforced() {
    let mut gp = small();
    gp.query_cap = 2;
    let mut adv = Scripted::new();
    adv.phase1 = vec![b"u1".to_vec(), b"u2".to_vec(), b"u3".to_vec()];
    let t = run_anonymity_game(&mut adv, &gp, &mut rng(4)).unwrap();
    assert_eq!(adv.errors, vec![OracleError::CapReached]);
    assert!(t.forfeited());

    // the cap is per phase
    let mut adv = Scripted::new();
    adv.phase1 = vec![b"u1".to_vec(), b"u2".to_vec()];
    adv.phase2 = vec![b"u3".to_vec(), b"u4".to_vec()];
    let t = run_anonymity_game(&mut adv, &gp, &mut rng(4)).unwrap();
    assert!(!t.forfeited());
}

struct RecoverProbe(Option<OracleError>);

impl AnonymityAdversary for RecoverProbe {
    fn phase1(&mut self, oracle: &mut Oracle<'_>, _rng: &mut dyn RngCore) {
        let ct = AibeirCiphertext {
            c1: vec![],
            c2: vec![],
            c3: vec![],
        };
        self.0 = oracle.recover(&ct).err();
    }
    fn challenge(&mut self, rng: &mut dyn RngCore) -> AnonymityChallenge {
        AnonymityAdversary::challenge(&mut RandomGuesser, rng)
    }
    fn guess(&mut self, _rng: &mut dyn RngCore) -> (bool, bool) {
        (true, true)
    }
}

#[test]
fn recover_oracle_only_in_recovery_game() {
    let mut probe = RecoverProbe(None);
    run_anonymity_game(&mut probe, &small(), &mut rng(5)).unwrap();
    assert_eq!(probe.0, Some(OracleError::Unavailable));
}

#[test]
fn recovery_game_reference_adversaries_lose() {
    let gp = small();
    for seed in 0..10 {
        let t = run_recovery_game(&mut HonestAdversary::default(), &gp, &mut rng(seed)).unwrap();
        assert!(!t.won);
        let t =
            run_recovery_game(&mut FrankensteinAdversary::default(), &gp, &mut rng(seed)).unwrap();
        assert!(!t.won);
        let t = run_recovery_game(&mut RandomBytes::whole(), &gp, &mut rng(seed)).unwrap();
        assert!(!t.won);
        let t = run_recovery_game(&mut RandomBytes::escrow_only(), &gp, &mut rng(seed)).unwrap();
        assert!(!t.won);
    }
}

#[test]
fn adjudication_uses_witness_then_structure() {
    let gp = small();
    let mut r = rng(6);
    let (mpk, msk, irm) = aibeir::setup(&gp.curve, gp.identity_bits, b"IRM", &mut r).unwrap();
    let randomness = EncryptionRandomness::sample(mpk.params(), &mut r);
    let ct = aibeir::encrypt_with_randomness(&mpk, b"alice", b"m", &randomness).unwrap();
    let good = ValidityWitness {
        message: b"m".to_vec(),
        identity: b"alice".to_vec(),
        randomness,
    };
    let ch = RecoveryChallenge {
        ciphertext: ct.clone(),
        witness: Some(good.clone()),
    };
    assert_eq!(
        adjudicate(&mpk, &msk, &irm, &ch),
        Validity::Valid(b"alice".to_vec())
    );

    // a bogus witness does not make a valid ciphertext invalid
    let bogus = ValidityWitness {
        message: b"x".to_vec(),
        ..good
    };
    let ch = RecoveryChallenge {
        ciphertext: ct.clone(),
        witness: Some(bogus),
    };
    assert_eq!(
        adjudicate(&mpk, &msk, &irm, &ch),
        Validity::Valid(b"alice".to_vec())
    );

    let other = aibeir::encrypt(&mpk, b"bob", b"m", &mut r).unwrap();
    let spliced = AibeirCiphertext { c3: other.c3, ..ct };
    let ch = RecoveryChallenge {
        ciphertext: spliced,
        witness: None,
    };
    assert_eq!(adjudicate(&mpk, &msk, &irm, &ch), Validity::Invalid);
}

#[test]
fn runs_are_reproducible() {
    let gp = small();
    let a = run_anonymity_game(&mut RandomGuesser, &gp, &mut rng(9)).unwrap();
    let b = run_anonymity_game(&mut RandomGuesser, &gp, &mut rng(9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.export(), b.export());
    let c = run_anonymity_game(&mut RandomGuesser, &gp, &mut rng(10)).unwrap();
    assert_ne!(a.export(), c.export());
}

#[test]
fn export_format() {
    let t = run_stronger_semantic_game(&mut RandomGuesser, &small(), &mut rng(12)).unwrap();
    let text = t.export();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), t.events.len());
    assert!(lines[0].starts_with("SETUP\t\t"));
    for line in lines {
        let fields: Vec<_> = line.split('\t').collect();
        assert_eq!(fields.len(), 3);
        assert_eq!(fields[2].len(), 16);
        assert!(hex::decode(fields[1]).is_ok());
    }
    assert!(text.contains(&format!("CHALLENGE\t{}\t", hex::encode(&t.restricted[0]))));
}

#[test]
fn estimator_preconditions_and_modes() {
    let gp = small();
    assert!(estimate_advantage(
        || RandomGuesser,
        Game::Anonymity,
        0,
        &gp,
        1,
        Execution::Sequential
    )
    .is_err());
    assert!(estimate_advantage(
        || RandomGuesser,
        Game::Anonymity,
        99,
        &gp,
        1,
        Execution::Sequential
    )
    .is_err());
    assert!(estimate_advantage(
        || RandomGuesser,
        Game::Recovery,
        100,
        &gp,
        1,
        Execution::Sequential
    )
    .is_err());
    let seq = estimate_advantage(
        || RandomGuesser,
        Game::StrongerSemantic,
        100,
        &gp,
        7,
        Execution::Sequential,
    )
    .unwrap();
    let par = estimate_advantage(
        || RandomGuesser,
        Game::StrongerSemantic,
        100,
        &gp,
        7,
        Execution::Parallel,
    )
    .unwrap();
    assert_eq!(seq, par);
    let cheat = estimate_advantage(
        CheatingAdversary::default,
        Game::StrongerSemantic,
        100,
        &gp,
        7,
        Execution::Parallel,
    )
    .unwrap();
    assert_eq!(cheat.point_estimate, 1.0);
    assert_eq!(cheat.bound_99, 0.0);
}

#[test]
fn estimate_display_and_bound() {
    let e = AdvantageEstimate::from_counts(Game::Anonymity, 4000, 1000);
    assert_eq!(e.to_string(), "ANON 4000 1000 0.250000 0.250000 0.017637");
    // independent check of the half-width: 2.576 * sqrt(0.25 * 0.75 / 4000)
    assert!((e.bound_99 - 0.017_636_67).abs() < 1e-7);
    assert!(e.consistent_with_baseline());
}
