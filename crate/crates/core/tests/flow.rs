mod common;

use common::*;
use fourfa_core::crypto::Block64;
use fourfa_core::factors::{render_template, FaceTemplate, GeoPoint};
use fourfa_core::flow::{
    apply_event, assemble_payload, begin_session, finalize_transaction, parse_payload,
    serialize_payload, DenyReason, FactorEvent, FlowContext, FlowError, FlowPolicy, SealKeys,
    Session, SessionState, TransactionPayload,
};
use fourfa_core::merchant::{process_envelope, Reason};
use fourfa_core::raster::RasterImage;
use fourfa_core::store::MemoryStore;
use proptest::prelude::*;
use rand::{rngs::StdRng, SeedableRng};

const T0: u64 = 1_700_000_000;

struct Harness {
    store: MemoryStore,
    sms: MockSms,
    rng: StdRng,
    policy: FlowPolicy,
    keys: SealKeys,
}

impl Harness {
    fn new() -> Self {
        Harness {
            store: store_with_alice(),
            sms: MockSms::default(),
            rng: StdRng::seed_from_u64(42),
            policy: FlowPolicy::default(),
            keys: SealKeys {
                mac_pass: b"bank-mac".to_vec(),
                key_pass: b"bank-key".to_vec(),
            },
        }
    }

    fn begin(&mut self) -> Session {
        begin_session("alice", T0, &mut self.rng).unwrap()
    }

    fn apply(&mut self, s: &mut Session, e: FactorEvent) -> Result<Option<RasterImage>, FlowError> {
        let mut ctx = FlowContext {
            store: &self.store,
            transport: &self.sms,
            rng: &mut self.rng,
            policy: &self.policy,
            keys: &self.keys,
        };
        apply_event(s, e, &mut ctx, T0 + 10)
    }

    fn through_otp(&mut self) -> Session {
        let mut s = self.begin();
        self.apply(&mut s, FactorEvent::PasswordSubmitted(PASSWORD.into()))
            .unwrap();
        self.apply(&mut s, FactorEvent::OtpRequested).unwrap();
        let code = self.sms.last_code().unwrap();
        self.apply(&mut s, FactorEvent::OtpSubmitted(code)).unwrap();
        s
    }

    fn authenticated(&mut self) -> Session {
        let mut s = self.through_otp();
        self.apply(&mut s, FactorEvent::FaceSubmitted(face_image()))
            .unwrap();
        self.apply(&mut s, FactorEvent::LocationReported(home()))
            .unwrap();
        assert_eq!(s.state(), SessionState::Authenticated);
        s
    }
}

#[test]
fn sessions_start_waiting_for_password() {
    let mut h = Harness::new();
    let a = h.begin();
    let b = h.begin();
    assert_eq!(a.state(), SessionState::AwaitPassword);
    assert_ne!(a.id(), b.id());
    assert_eq!(a.id().as_str().len(), 22);
    assert!(a
        .id()
        .as_str()
        .bytes()
        .all(|c| c.is_ascii_alphanumeric() || c == b'-' || c == b'_'));
    assert_eq!(
        begin_session("a\nb", T0, &mut h.rng).unwrap_err(),
        FlowError::InvalidUsername
    );
}

#[test]
fn password_step() {
    let mut h = Harness::new();
    let mut s = h.begin();
    h.apply(&mut s, FactorEvent::PasswordSubmitted(PASSWORD.into()))
        .unwrap();
    assert_eq!(s.state(), SessionState::AwaitOtp);

    let mut s = h.begin();
    h.apply(&mut s, FactorEvent::PasswordSubmitted("nope".into()))
        .unwrap();
    assert_eq!(s.state(), SessionState::Denied(DenyReason::Password));

    let mut ghost = begin_session("mallory", T0, &mut h.rng).unwrap();
    h.apply(&mut ghost, FactorEvent::PasswordSubmitted(PASSWORD.into()))
        .unwrap();
    assert_eq!(ghost.state(), SessionState::Denied(DenyReason::Password));
}

#[test]
fn otp_goes_to_the_session_and_wrong_code_stops() {
    let mut h = Harness::new();
    let mut s = h.begin();
    h.apply(&mut s, FactorEvent::PasswordSubmitted(PASSWORD.into()))
        .unwrap();
    h.apply(&mut s, FactorEvent::OtpRequested).unwrap();
    assert_eq!(s.state(), SessionState::OtpPending);
    assert!(s.challenge().is_some());
    let (dest, _) = h.sms.sent.borrow().last().cloned().unwrap();
    assert_eq!(dest, s.id().as_str());

    let code = h.sms.last_code().unwrap();
    let wrong = if code == "000000" { "000001" } else { "000000" };
    h.apply(&mut s, FactorEvent::OtpSubmitted(wrong.into()))
        .unwrap();
    assert_eq!(s.state(), SessionState::Denied(DenyReason::Otp));
}

#[test]
fn transport_failure_leaves_session_unchanged() {
    let mut h = Harness::new();
    let mut s = h.begin();
    h.apply(&mut s, FactorEvent::PasswordSubmitted(PASSWORD.into()))
        .unwrap();
    h.sms.down.set(true);
    let before = s.clone();
    assert!(matches!(
        h.apply(&mut s, FactorEvent::OtpRequested),
        Err(FlowError::Transport(_))
    ));
    assert!(s == before);
    h.sms.down.set(false);
    h.apply(&mut s, FactorEvent::OtpRequested).unwrap();
    assert_eq!(s.state(), SessionState::OtpPending);
}

#[test]
fn out_of_order_events_are_rejected() {
    let mut h = Harness::new();
    let mut s = h.begin();
    let before = s.clone();
    let err = h
        .apply(&mut s, FactorEvent::FaceSubmitted(face_image()))
        .unwrap_err();
    assert_eq!(
        err,
        FlowError::InvalidTransition {
            state: "await_password",
            event: "face_submitted"
        }
    );
    assert!(s == before);
    assert!(h.apply(&mut s, FactorEvent::OtpRequested).is_err());
    assert!(h
        .apply(&mut s, FactorEvent::LocationReported(home()))
        .is_err());

    let mut s = h.through_otp();
    h.apply(&mut s, FactorEvent::FaceSubmitted(face_image()))
        .unwrap();
    // A second face submission is not accepted.
    assert!(h
        .apply(&mut s, FactorEvent::FaceSubmitted(face_image()))
        .is_err());
    assert_eq!(
        s.state(),
        SessionState::ParallelChecks {
            face_done: true,
            geo_done: false
        }
    );
}

#[test]
fn face_and_location_failures_stop() {
    let mut h = Harness::new();
    let mut s = h.through_otp();
    let other = render_template(&perturbed(&face_template(), 410), 2);
    h.apply(&mut s, FactorEvent::FaceSubmitted(other)).unwrap();
    assert_eq!(s.state(), SessionState::Denied(DenyReason::Face));

    let mut s = h.through_otp();
    h.apply(
        &mut s,
        FactorEvent::LocationReported(north_of(home(), 600.0)),
    )
    .unwrap();
    assert_eq!(s.state(), SessionState::Denied(DenyReason::Geolocation));
    assert_eq!(s.reported_location(), Some(north_of(home(), 600.0)));
}

#[test]
fn face_and_location_commute() {
    let mut h1 = Harness::new();
    let mut a = h1.through_otp();
    h1.apply(&mut a, FactorEvent::FaceSubmitted(face_image()))
        .unwrap();
    h1.apply(&mut a, FactorEvent::LocationReported(home()))
        .unwrap();

    let mut h2 = Harness::new();
    let mut b = h2.through_otp();
    h2.apply(&mut b, FactorEvent::LocationReported(home()))
        .unwrap();
    assert_eq!(
        b.state(),
        SessionState::ParallelChecks {
            face_done: false,
            geo_done: true
        }
    );
    h2.apply(&mut b, FactorEvent::FaceSubmitted(face_image()))
        .unwrap();

    // Same seed, same events apart from order: identical sessions.
    assert!(a == b);
    assert_eq!(a.state(), SessionState::Authenticated);
}

#[test]
fn terminal_states_absorb() {
    let mut h = Harness::new();
    let mut denied = h.begin();
    h.apply(&mut denied, FactorEvent::PasswordSubmitted("bad".into()))
        .unwrap();
    let events = [
        FactorEvent::PasswordSubmitted(PASSWORD.into()),
        FactorEvent::OtpRequested,
        FactorEvent::OtpSubmitted("123456".into()),
        FactorEvent::FaceSubmitted(face_image()),
        FactorEvent::LocationReported(home()),
        FactorEvent::FinalizeRequested(noise_cover(128, 128, 1)),
    ];
    for e in events.iter().cloned() {
        let before = denied.clone();
        assert_eq!(
            h.apply(&mut denied, e).unwrap_err(),
            FlowError::TerminalSession
        );
        assert!(denied == before);
    }

    let mut done = h.authenticated();
    assert!(h
        .apply(
            &mut done,
            FactorEvent::FinalizeRequested(noise_cover(128, 128, 2))
        )
        .unwrap()
        .is_some());
    assert_eq!(done.state(), SessionState::Completed);
    for e in events.iter().cloned() {
        assert_eq!(
            h.apply(&mut done, e).unwrap_err(),
            FlowError::TerminalSession
        );
    }
}

#[test]
fn sessions_expire() {
    let mut h = Harness::new();
    let mut s = h.begin();
    let mut ctx = FlowContext {
        store: &h.store,
        transport: &h.sms,
        rng: &mut h.rng,
        policy: &h.policy,
        keys: &h.keys,
    };
    let late = T0 + 15 * 60 + 1;
    let err = apply_event(
        &mut s,
        FactorEvent::PasswordSubmitted(PASSWORD.into()),
        &mut ctx,
        late,
    )
    .unwrap_err();
    assert_eq!(err, FlowError::TerminalSession);
    apply_event(
        &mut s,
        FactorEvent::PasswordSubmitted(PASSWORD.into()),
        &mut ctx,
        T0 + 15 * 60,
    )
    .unwrap();
}

#[test]
fn payload_assembly() {
    let mut h = Harness::new();
    let s = h.authenticated();
    let p = assemble_payload(&s, &h.store, PASSWORD).unwrap();
    assert_eq!(p.username(), "alice");
    assert_eq!(p.password(), PASSWORD);
    assert_eq!(p.face(), &face_template());
    assert_eq!(p.geo(), home());
    assert_eq!(
        assemble_payload(&s, &h.store, "forged").unwrap_err(),
        FlowError::CredentialMismatch
    );

    let mut partial = h.through_otp();
    h.apply(&mut partial, FactorEvent::FaceSubmitted(face_image()))
        .unwrap();
    assert_eq!(
        assemble_payload(&partial, &h.store, PASSWORD).unwrap_err(),
        FlowError::NotAuthenticated
    );
}

#[test]
fn finalize_rules() {
    let mut h = Harness::new();
    let mut s = h.authenticated();
    let payload = assemble_payload(&s, &h.store, PASSWORD).unwrap();
    let tiny = noise_cover(16, 16, 3);
    let err = finalize_transaction(&mut s, &payload, &tiny, b"m", b"k", Block64::ZERO).unwrap_err();
    assert!(matches!(
        err,
        FlowError::Envelope(fourfa_core::EnvelopeError::CapacityExceeded { available: 96, .. })
    ));
    assert_eq!(s.state(), SessionState::Authenticated);

    let cover = noise_cover(128, 128, 4);
    finalize_transaction(&mut s, &payload, &cover, b"m", b"k", Block64::ZERO).unwrap();
    assert_eq!(s.state(), SessionState::Completed);
    let again =
        finalize_transaction(&mut s, &payload, &cover, b"m", b"k", Block64::ZERO).unwrap_err();
    assert_eq!(again, FlowError::TerminalSession);

    let mut early = h.through_otp();
    assert_eq!(
        finalize_transaction(&mut early, &payload, &cover, b"m", b"k", Block64::ZERO).unwrap_err(),
        FlowError::NotAuthenticated
    );
}

#[test]
fn honest_flow_is_approved_by_the_merchant() {
    let mut h = Harness::new();
    let mut s = h.authenticated();
    let stego = h
        .apply(
            &mut s,
            FactorEvent::FinalizeRequested(noise_cover(128, 128, 5)),
        )
        .unwrap()
        .unwrap();
    let decision = process_envelope(&stego, b"bank-mac", b"bank-key", &h.store, 500.0, 0.85);
    assert!(decision.is_approved());
    assert_eq!(decision.reason(), Reason::Ok);
}

fn payload_strategy() -> impl Strategy<Value = TransactionPayload> {
    (
        "[a-zA-Z0-9_.@ -]{1,64}",
        "[ -~]{0,40}",
        proptest::collection::vec(0usize..10, 2048),
        -90_000_000i64..=90_000_000,
        -179_999_999i64..=180_000_000,
    )
        .prop_map(|(user, pass, idx, lat, lon)| {
            let face = FaceTemplate::from_cells(
                idx.into_iter()
                    .map(|i| fourfa_core::factors::RAMP[i])
                    .collect(),
            )
            .unwrap();
            let geo = GeoPoint::new(lat as f64 / 1e6, lon as f64 / 1e6).unwrap();
            TransactionPayload::new(&user, &pass, face, geo).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn payload_roundtrip(p in payload_strategy()) {
        let bytes = serialize_payload(&p);
        let geo = format!("{:.6},{:.6}", p.geo().lat(), p.geo().lon());
        prop_assert_eq!(bytes.len(), 15 + 6 + p.username().len() + 6 + p.password().len() + 5 + geo.len() + 11 + 32 * 65);
        let back = parse_payload(&bytes).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(serialize_payload(&back), bytes);
    }
}
