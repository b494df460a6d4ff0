//! Per-transaction state machine: password, then one-time code, then face
//! and location in either order, then payload assembly and sealing.

mod machine;
mod payload;
mod session;

pub use machine::{
    apply_event, assemble_payload, begin_session, finalize_transaction, FactorEvent, FlowContext,
    FlowError, FlowPolicy, SealKeys, DEFAULT_SESSION_TTL_S,
};
pub use payload::{parse_payload, serialize_payload, PayloadError, TransactionPayload};
pub use session::{DenyReason, Session, SessionId, SessionState};
