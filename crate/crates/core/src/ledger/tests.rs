use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::*;
use crate::crypto::{ring_sign, KeyPair};

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn keys(rng: &mut ChaCha20Rng, n: usize) -> Vec<KeyPair> {
    (0..n).map(|_| KeyPair::generate(rng)).collect()
}

fn send(ledger: &mut Ledger, who: &KeyPair, call: Call) -> Result<Receipt, LedgerError> {
    let tx = call.sign(who.secret()).unwrap();
    ledger.submit(&tx)
}

fn proof(
    verdict: Verdict,
    fog: &Address,
    members: &[KeyPair],
    signer: usize,
    rng: &mut ChaCha20Rng,
) -> AuditProof {
    let audit_id = random_audit_id(rng);
    let ring: Vec<_> = members.iter().map(|k| *k.public()).collect();
    let statement = audit_statement(verdict, fog, &audit_id);
    AuditProof {
        audit_id,
        ring: ring_sign(&statement, &ring, signer, members[signer].secret(), rng).unwrap(),
    }
}

/// A ledger with `n_iot` funded devices, one fog node and one oracle whose
/// IoT identity is the first device.
struct World {
    ledger: Ledger,
    iots: Vec<KeyPair>,
    fog: KeyPair,
    oracle: KeyPair,
    rng: ChaCha20Rng,
}

impl World {
    fn new(params: Params, n_iot: usize) -> Self {
        let mut rng = rng(7);
        let mut ledger = Ledger::initialize(params).unwrap();
        let iots = keys(&mut rng, n_iot);
        for k in &iots {
            send(&mut ledger, k, Call::IotRegistration { deposit: 1_000 }).unwrap();
        }
        let fog = KeyPair::generate(&mut rng);
        send(&mut ledger, &fog, Call::FogRegistration { deposit: 8 }).unwrap();
        let oracle = KeyPair::generate(&mut rng);
        send(&mut ledger, &oracle, Call::OracleRegistration).unwrap();
        Self {
            ledger,
            iots,
            fog,
            oracle,
            rng,
        }
    }

    fn verdict(&mut self, verdict: Verdict) -> Result<Receipt, LedgerError> {
        let fog = self.fog.address();
        let p = proof(verdict, &fog, &self.iots[..3], 0, &mut self.rng);
        let call = match verdict {
            Verdict::Passed => Call::FogReward { fog, proof: p },
            Verdict::Failed => Call::FogPenalize { fog, proof: p },
        };
        send(&mut self.ledger, &self.oracle, call)
    }

    fn set_reputation(&mut self, r: Reputation) {
        self.ledger.fogs.get_mut(&self.fog.address()).unwrap().reputation = r;
    }

    fn fog_record(&self) -> Option<&FogRecord> {
        self.ledger.fog(&self.fog.address())
    }
}

#[test]
fn initialize_empty_and_validated() {
    let l = Ledger::initialize(Params::default()).unwrap();
    assert_eq!((l.iot_count(), l.fog_count(), l.oracle_count()), (0, 0, 0));
    assert_eq!(l.fee_pool(), 0);
    let bad = Params {
        r_init: 11,
        ..Params::default()
    };
    assert!(matches!(Ledger::initialize(bad), Err(LedgerError::InvalidParams(_))));
    let bad = Params {
        r_plus: 2,
        r_minus: 2,
        ..Params::default()
    };
    assert!(matches!(Ledger::initialize(bad), Err(LedgerError::InvalidParams(_))));
}

#[test]
fn iot_registration_rules() {
    let mut r = rng(1);
    let mut l = Ledger::initialize(Params::default()).unwrap();
    let k = KeyPair::generate(&mut r);
    send(&mut l, &k, Call::IotRegistration { deposit: 100 }).unwrap();
    let rec = l.iot(&k.address()).unwrap();
    assert_eq!(rec.avail_funds, 100);
    assert_eq!(rec.public_key, Some(*k.public()));
    assert_eq!(
        send(&mut l, &k, Call::IotRegistration { deposit: 5 }),
        Err(LedgerError::AlreadyRegistered)
    );
    let other = KeyPair::generate(&mut r);
    assert_eq!(
        send(&mut l, &other, Call::IotRegistration { deposit: 0 }),
        Err(LedgerError::InvalidAmount)
    );
    l.check_conservation().unwrap();
}

#[test]
fn fog_registration_splits_deposit() {
    let mut r = rng(2);
    let mut l = Ledger::initialize(Params::default()).unwrap();
    let ks = keys(&mut r, 3);
    send(&mut l, &ks[0], Call::FogRegistration { deposit: 8 }).unwrap();
    let f = l.fog(&ks[0].address()).unwrap();
    assert_eq!((f.deposit, f.avail_funds, f.reputation), (3, 5, 10));
    send(&mut l, &ks[1], Call::FogRegistration { deposit: 3 }).unwrap();
    assert_eq!(l.fog(&ks[1].address()).unwrap().avail_funds, 0);
    assert_eq!(
        send(&mut l, &ks[2], Call::FogRegistration { deposit: 2 }),
        Err(LedgerError::InsufficientDeposit {
            required: 3,
            offered: 2
        })
    );
    assert_eq!(
        send(&mut l, &ks[0], Call::FogRegistration { deposit: 9 }),
        Err(LedgerError::AlreadyRegistered)
    );
    l.check_conservation().unwrap();
}

#[test]
fn oracle_registration_and_bad_signature() {
    let mut r = rng(3);
    let mut l = Ledger::initialize(Params::default()).unwrap();
    let k = KeyPair::generate(&mut r);
    l.oracle_registration(&crypto::sign(&Call::OracleRegistration.message(), k.secret()).unwrap())
        .unwrap();
    assert_eq!(l.oracle_count(), 1);
    assert_eq!(
        send(&mut l, &k, Call::OracleRegistration),
        Err(LedgerError::AlreadyRegistered)
    );
    let before = l.clone();
    let mut garbage = Signature::from_bytes(&[0u8; 65]);
    assert_eq!(l.oracle_registration(&garbage), Err(LedgerError::BadSignature));
    garbage.r = [0xff; 32];
    garbage.s = [0x01; 32];
    assert_eq!(l.oracle_registration(&garbage), Err(LedgerError::BadSignature));
    assert_eq!(l, before);
}

#[test]
fn iot_funds_management() {
    let mut r = rng(4);
    let mut l = Ledger::initialize(Params::default()).unwrap();
    let k = KeyPair::generate(&mut r);
    send(&mut l, &k, Call::IotRegistration { deposit: 10 }).unwrap();
    send(&mut l, &k, Call::IotAddFunds { amount: 5 }).unwrap();
    assert_eq!(l.iot(&k.address()).unwrap().avail_funds, 15);
    send(&mut l, &k, Call::IotWithdrawFunds { amount: 5 }).unwrap();
    let out = send(&mut l, &k, Call::IotWithdrawFunds { amount: 10 }).unwrap();
    assert_eq!(out.payout, 10);
    assert_eq!(l.iot(&k.address()).unwrap().avail_funds, 0);
    send(&mut l, &k, Call::IotAddFunds { amount: 10 }).unwrap();
    assert_eq!(
        send(&mut l, &k, Call::IotWithdrawFunds { amount: 11 }),
        Err(LedgerError::InsufficientFunds)
    );
    assert_eq!(
        send(&mut l, &k, Call::IotAddFunds { amount: 0 }),
        Err(LedgerError::InvalidAmount)
    );
    let stranger = KeyPair::generate(&mut r);
    assert_eq!(
        send(&mut l, &stranger, Call::IotAddFunds { amount: 1 }),
        Err(LedgerError::NotRegistered)
    );
    assert_eq!(l.flows().deposited, 25);
    assert_eq!(l.flows().paid_out, 15);
    l.check_conservation().unwrap();
}

#[test]
fn fog_withdraw_leaves_deposit() {
    let mut r = rng(5);
    let mut l = Ledger::initialize(Params::default()).unwrap();
    let ks = keys(&mut r, 3);
    send(&mut l, &ks[0], Call::FogRegistration { deposit: 10 }).unwrap();
    assert_eq!(
        send(&mut l, &ks[0], Call::FogWithdrawFunds { amount: 3 }).unwrap().payout,
        3
    );
    let f = l.fog(&ks[0].address()).unwrap();
    assert_eq!((f.deposit, f.avail_funds), (3, 4));
    send(&mut l, &ks[1], Call::FogRegistration { deposit: 3 }).unwrap();
    assert_eq!(
        send(&mut l, &ks[1], Call::FogWithdrawFunds { amount: 1 }),
        Err(LedgerError::InsufficientFunds)
    );
    assert_eq!(
        send(&mut l, &ks[2], Call::FogWithdrawFunds { amount: 1 }),
        Err(LedgerError::NotRegistered)
    );
}

#[test]
fn removal_payouts() {
    let mut r = rng(6);
    let mut l = Ledger::initialize(Params::default()).unwrap();
    let ks = keys(&mut r, 3);
    send(&mut l, &ks[0], Call::FogRegistration { deposit: 7 }).unwrap();
    l.fogs.get_mut(&ks[0].address()).unwrap().deposit = 2;
    l.fogs.get_mut(&ks[0].address()).unwrap().avail_funds = 5;
    assert_eq!(send(&mut l, &ks[0], Call::FogRemove).unwrap().payout, 7);
    assert!(l.fog(&ks[0].address()).is_none());

    send(&mut l, &ks[1], Call::FogRegistration { deposit: 7 }).unwrap();
    l.fogs.get_mut(&ks[1].address()).unwrap().deposit = 0;
    let removal = l
        .force_remove_fog(&ks[1].address(), RemovalReason::DepositExhausted)
        .unwrap();
    assert_eq!(removal.payout, 4);
    assert_eq!(
        l.force_remove_fog(&ks[2].address(), RemovalReason::ReputationFloor),
        Err(LedgerError::NotRegistered)
    );
    assert_eq!(send(&mut l, &ks[2], Call::IotRemove), Err(LedgerError::NotRegistered));

    send(&mut l, &ks[2], Call::IotRegistration { deposit: 9 }).unwrap();
    assert_eq!(send(&mut l, &ks[2], Call::IotRemove).unwrap().payout, 9);
    assert_eq!(l.iot_count(), 0);
}

#[test]
fn payment_splits_fee() {
    let mut r = rng(8);
    let mut l = Ledger::initialize(Params::default()).unwrap();
    let (iot, fog) = (KeyPair::generate(&mut r), KeyPair::generate(&mut r));
    send(&mut l, &iot, Call::IotRegistration { deposit: 150 }).unwrap();
    send(&mut l, &fog, Call::FogRegistration { deposit: 3 }).unwrap();
    let pay = |amount| Call::IotFogPayment {
        fog: fog.address(),
        amount,
        request_digest: [9; 32],
    };
    send(&mut l, &iot, pay(100)).unwrap();
    assert_eq!(l.iot(&iot.address()).unwrap().avail_funds, 50);
    assert_eq!(l.fog(&fog.address()).unwrap().avail_funds, 99);
    assert_eq!(l.fee_pool(), 1);
    assert_eq!(l.request_counter(), 1);

    let before = l.clone();
    assert_eq!(send(&mut l, &iot, pay(51)), Err(LedgerError::InsufficientFunds));
    assert_eq!(l, before);
    assert_eq!(
        send(&mut l, &fog, pay(1)),
        Err(LedgerError::NotRegistered),
        "payer must be an IoT device"
    );
    l.check_conservation().unwrap();

    let mut l = Ledger::initialize(Params {
        fee_rate_ppm: 0,
        ..Params::default()
    })
    .unwrap();
    send(&mut l, &iot, Call::IotRegistration { deposit: 150 }).unwrap();
    send(&mut l, &fog, Call::FogRegistration { deposit: 3 }).unwrap();
    send(&mut l, &iot, pay(100)).unwrap();
    assert_eq!(l.fog(&fog.address()).unwrap().avail_funds, 100);
    assert_eq!(l.fee_pool(), 0);
}

#[test]
fn reward_caps_at_max() {
    let mut w = World::new(Params::default(), 4);
    w.set_reputation(9);
    w.verdict(Verdict::Passed).unwrap();
    assert_eq!(w.fog_record().unwrap().reputation, 10);
    w.verdict(Verdict::Passed).unwrap();
    assert_eq!(w.fog_record().unwrap().reputation, 10);
}

#[test]
fn reward_rejects_unregistered_ring_member() {
    let mut w = World::new(Params::default(), 4);
    w.set_reputation(5);
    let outsider = KeyPair::generate(&mut w.rng);
    let members = [w.iots[0], w.iots[1], outsider];
    let fog = w.fog.address();
    let p = proof(Verdict::Passed, &fog, &members, 0, &mut w.rng);
    let before = w.ledger.clone();
    assert_eq!(
        send(&mut w.ledger, &w.oracle, Call::FogReward { fog, proof: p }),
        Err(LedgerError::RingMemberNotInIoTTable(outsider.address()))
    );
    assert_eq!(w.ledger, before);
}

#[test]
fn verdict_proof_checks() {
    let mut w = World::new(Params::default(), 4);
    let fog = w.fog.address();
    // Proof signed for the opposite verdict.
    let p = proof(Verdict::Passed, &fog, &w.iots[..3], 1, &mut w.rng);
    assert_eq!(
        send(&mut w.ledger, &w.oracle, Call::FogPenalize { fog, proof: p.clone() }),
        Err(LedgerError::InvalidRingSignature)
    );
    // Non-oracle caller.
    assert_eq!(
        send(&mut w.ledger, &w.iots[0], Call::FogReward { fog, proof: p.clone() }),
        Err(LedgerError::UnknownOracle)
    );
    let ghost = Address::synthetic("fog", 99);
    assert_eq!(
        send(&mut w.ledger, &w.oracle, Call::FogReward { fog: ghost, proof: p.clone() }),
        Err(LedgerError::UnknownFog)
    );
    send(&mut w.ledger, &w.oracle, Call::FogReward { fog, proof: p.clone() }).unwrap();
    assert_eq!(
        send(&mut w.ledger, &w.oracle, Call::FogReward { fog, proof: p }),
        Err(LedgerError::ReplayedAudit)
    );
}

#[test]
fn penalize_updates_and_distributes() {
    let mut w = World::new(Params::default(), 4);
    w.set_reputation(5);
    let funds_before: Vec<_> = w.iots.iter().map(|k| w.ledger.iot(&k.address()).unwrap().avail_funds).collect();
    w.verdict(Verdict::Failed).unwrap();
    let f = w.fog_record().unwrap();
    assert_eq!((f.reputation, f.deposit), (3, 2));
    // One unit over four devices: all of it lands in the pool as remainder.
    assert_eq!(w.ledger.fee_pool(), 1);
    for (k, before) in w.iots.iter().zip(funds_before) {
        assert_eq!(w.ledger.iot(&k.address()).unwrap().avail_funds, before);
    }
    w.ledger.check_conservation().unwrap();
}

#[test]
fn penalize_exhausting_deposit_removes() {
    let mut w = World::new(Params::default(), 3);
    w.ledger.fogs.get_mut(&w.fog.address()).unwrap().deposit = 1;
    // Keep the books balanced after the manual edit.
    w.ledger.flows.paid_out += 2;
    let receipt = w.verdict(Verdict::Failed).unwrap();
    let removal = receipt.fog_removed.unwrap();
    assert_eq!(removal.reason, RemovalReason::DepositExhausted);
    assert_eq!(removal.payout, 5, "remaining funds are returned");
    assert!(w.fog_record().is_none());
    w.ledger.check_conservation().unwrap();
}

#[test]
fn penalize_below_floor_removes() {
    let mut w = World::new(Params::default(), 3);
    w.set_reputation(0);
    let receipt = w.verdict(Verdict::Failed).unwrap();
    assert_eq!(receipt.fog_removed.unwrap().reason, RemovalReason::ReputationFloor);
    assert!(w.fog_record().is_none());
}

#[test]
fn removal_after_ceil_deposit_over_deduction_failures() {
    for (deposit, deduction) in [(3, 1), (3, 2), (5, 2), (4, 4), (2, 5)] {
        let params = Params {
            deposit,
            deposit_deduction: deduction,
            r_min: -1_000,
            ..Params::default()
        };
        let expected = params.penalties_to_exhaust_deposit();
        let mut w = World::new(params, 3);
        let mut failures = 0;
        while w.fog_record().is_some() {
            w.verdict(Verdict::Failed).unwrap();
            failures += 1;
        }
        assert_eq!(failures, expected, "D={deposit} d-={deduction}");
        w.ledger.check_conservation().unwrap();
    }
}

#[test]
fn distribute_deposit_cases() {
    let mut r = rng(9);
    let mut l = Ledger::initialize(Params::default()).unwrap();
    l.distribute_deposit(10);
    assert_eq!(l.fee_pool(), 10);

    let ks = keys(&mut r, 5);
    for k in &ks {
        send(&mut l, k, Call::IotRegistration { deposit: 1 }).unwrap();
    }
    l.distribute_deposit(10);
    assert!(ks.iter().all(|k| l.iot(&k.address()).unwrap().avail_funds == 3));
    assert_eq!(l.fee_pool(), 10);

    for k in &ks[3..] {
        send(&mut l, k, Call::IotRemove).unwrap();
    }
    l.distribute_deposit(10);
    assert!(ks[..3].iter().all(|k| l.iot(&k.address()).unwrap().avail_funds == 6));
    assert_eq!(l.fee_pool(), 11);
}

#[test]
fn oracle_paid_from_pool() {
    let params = Params {
        oracle_reimbursement: 100,
        oracle_bounty: 5,
        ..Params::default()
    };
    let mut w = World::new(params, 3);
    w.ledger.fee_pool = 50;
    w.ledger.flows.deposited += 50;
    let receipt = w.verdict(Verdict::Passed).unwrap();
    assert_eq!(receipt.oracle_payout, 50, "capped by the pool");
    assert_eq!(w.ledger.fee_pool(), 0);
    let receipt = w.verdict(Verdict::Passed).unwrap();
    assert_eq!(receipt.oracle_payout, 0);
    w.ledger.check_conservation().unwrap();
}

#[test]
fn snapshot_round_trip_and_events() {
    let mut w = World::new(Params::default(), 3);
    w.verdict(Verdict::Failed).unwrap();
    let text = w.ledger.to_snapshot_json();
    let back = Ledger::from_snapshot_json(&text).unwrap();
    assert_eq!(back, w.ledger);

    let seqs: Vec<_> = w.ledger.events().iter().map(|e| e.seq).collect();
    assert!(seqs.windows(2).all(|p| p[1] == p[0] + 1));
    let mut csv = Vec::new();
    write_events_csv(w.ledger.events(), &mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert_eq!(csv.lines().next().unwrap(), EVENT_CSV_HEADER);
    assert_eq!(csv.lines().count(), w.ledger.events().len() + 1);
    assert!(csv.contains(",fog_penalize,"));

    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["fee_pool"] = serde_json::json!(2);
    let tampered = value.to_string();
    assert!(matches!(
        Ledger::from_snapshot_json(&tampered),
        Err(LedgerError::ConservationViolated { .. })
    ));
}

#[test]
fn preverified_path_matches_submit() {
    let mut r = rng(10);
    let (iot, fog) = (KeyPair::generate(&mut r), KeyPair::generate(&mut r));
    let ops = [
        (iot, Op::IotRegistration { deposit: 500 }),
        (fog, Op::FogRegistration { deposit: 4 }),
        (
            iot,
            Op::IotFogPayment {
                fog: fog.address(),
                amount: 230,
            },
        ),
        (fog, Op::FogWithdrawFunds { amount: 100 }),
    ];
    let mut fast = Ledger::initialize(Params::default()).unwrap();
    for (k, op) in ops {
        fast.apply_preverified(k.address(), op).unwrap();
    }
    let mut slow = Ledger::initialize(Params::default()).unwrap();
    send(&mut slow, &iot, Call::IotRegistration { deposit: 500 }).unwrap();
    send(&mut slow, &fog, Call::FogRegistration { deposit: 4 }).unwrap();
    send(
        &mut slow,
        &iot,
        Call::IotFogPayment {
            fog: fog.address(),
            amount: 230,
            request_digest: [0; 32],
        },
    )
    .unwrap();
    send(&mut slow, &fog, Call::FogWithdrawFunds { amount: 100 }).unwrap();
    assert_eq!(fast.fog(&fog.address()), slow.fog(&fog.address()));
    assert_eq!(fast.fee_pool(), slow.fee_pool());
    assert_eq!(
        fast.iot(&iot.address()).unwrap().avail_funds,
        slow.iot(&iot.address()).unwrap().avail_funds
    );
}
