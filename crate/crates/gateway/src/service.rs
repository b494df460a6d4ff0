//! HTTP adapter over the session state machine and the merchant check.
//!
//! Every session endpoint maps to exactly one [`FactorEvent`]; the handlers
//! do no flow logic of their own.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{post, put};
use axum::{Json, Router};
use fourfa_core::factors::GeoPoint;
use fourfa_core::flow::{
    apply_event, begin_session, FactorEvent, FlowContext, FlowError, FlowPolicy, SealKeys, Session,
    SessionState,
};
use fourfa_core::merchant::{process_envelope, Decision, Outcome};
use fourfa_core::raster::RasterImage;
use fourfa_core::transport::SmsTransport;
use fourfa_core::EnvelopeError;
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use crate::config::Config;
use crate::image_io::{decode_png, encode_png, ImageError};
use crate::sms::transport_from_config;
use crate::store::{FileUserStore, StorageError};

const MAX_BODY: usize = 64 * 1024 * 1024;

type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

/// Shared state of a running gateway: store, transport, policy and live sessions.
pub struct Gateway {
    store: Arc<FileUserStore>,
    transport: Arc<dyn SmsTransport + Send + Sync>,
    policy: FlowPolicy,
    keys: SealKeys,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    clock: Clock,
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("unknown session")]
    UnknownSession,
    #[error("unknown user")]
    UnknownUser,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("invalid location")]
    InvalidLocation,
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error("internal error")]
    Internal,
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownSession | ApiError::UnknownUser => StatusCode::NOT_FOUND,
            ApiError::Flow(e) => match e {
                FlowError::InvalidUsername | FlowError::Factor(_) | FlowError::Payload(_) => {
                    StatusCode::BAD_REQUEST
                }
                FlowError::InvalidTransition { .. }
                | FlowError::TerminalSession
                | FlowError::NotAuthenticated
                | FlowError::CredentialMismatch => StatusCode::CONFLICT,
                FlowError::Envelope(EnvelopeError::CapacityExceeded { .. }) => {
                    StatusCode::UNPROCESSABLE_ENTITY
                }
                FlowError::Transport(_) => StatusCode::BAD_GATEWAY,
                FlowError::Envelope(_) | FlowError::Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
            },
            ApiError::Image(_) | ApiError::InvalidLocation => StatusCode::BAD_REQUEST,
            ApiError::Storage(_) | ApiError::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            warn!(error = %self, "request failed");
        }
        (
            status,
            Json(serde_json::json!({ "error": self.to_string() })),
        )
            .into_response()
    }
}

/// What the client sees after each step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateView {
    pub state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_done: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geo_done: Option<bool>,
}

impl From<SessionState> for StateView {
    fn from(state: SessionState) -> Self {
        let mut view = StateView {
            state: state.name().into(),
            reason: None,
            face_done: None,
            geo_done: None,
        };
        match state {
            SessionState::Denied(r) => view.reason = Some(r.as_str().into()),
            SessionState::ParallelChecks {
                face_done,
                geo_done,
            } => {
                view.face_done = Some(face_done);
                view.geo_done = Some(geo_done);
            }
            _ => {}
        }
        view
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionView {
    pub outcome: String,
    pub reason: String,
}

impl From<Decision> for DecisionView {
    fn from(d: Decision) -> Self {
        let outcome = match d.outcome() {
            Outcome::Approve => "approve",
            Outcome::Deny => "deny",
        };
        DecisionView {
            outcome: outcome.into(),
            reason: d.reason().as_str().into(),
        }
    }
}

impl Gateway {
    pub fn new(
        store: Arc<FileUserStore>,
        transport: Arc<dyn SmsTransport + Send + Sync>,
        policy: FlowPolicy,
        keys: SealKeys,
    ) -> Self {
        Gateway {
            store,
            transport,
            policy,
            keys,
            sessions: Mutex::new(HashMap::new()),
            clock: Arc::new(crate::unix_now),
        }
    }

    pub fn from_config(config: &Config) -> Result<Self, StorageError> {
        let store = Arc::new(FileUserStore::open(&config.store_path)?);
        let transport: Arc<dyn SmsTransport + Send + Sync> =
            Arc::from(transport_from_config(config));
        Ok(Gateway::new(
            store,
            transport,
            config.policy(),
            config.seal_keys(),
        ))
    }

    /// Replaces the wall clock (seconds since the epoch).
    pub fn with_clock(mut self, clock: impl Fn() -> u64 + Send + Sync + 'static) -> Self {
        self.clock = Arc::new(clock);
        self
    }

    pub fn store(&self) -> &FileUserStore {
        &self.store
    }

    pub fn policy(&self) -> &FlowPolicy {
        &self.policy
    }

    pub fn begin(&self, username: &str) -> Result<Session, ApiError> {
        let now = (self.clock)();
        let session = begin_session(username, now, &mut rand::rng())?;
        let mut sessions = self.sessions.lock().map_err(|_| ApiError::Internal)?;
        let horizon = self.policy.session_ttl_s;
        sessions.retain(|_, s| {
            s.lock()
                .map(|s| now <= s.created_at().saturating_add(horizon))
                .unwrap_or(false)
        });
        sessions.insert(
            session.id().as_str().into(),
            Arc::new(Mutex::new(session.clone())),
        );
        info!(session = %session.id(), user = session.username(), "session started");
        Ok(session)
    }

    /// Applies one event to a live session, serialized per session.
    pub fn apply(
        &self,
        id: &str,
        event: FactorEvent,
    ) -> Result<(SessionState, Option<RasterImage>), ApiError> {
        let slot = self
            .sessions
            .lock()
            .map_err(|_| ApiError::Internal)?
            .get(id)
            .cloned()
            .ok_or(ApiError::UnknownSession)?;
        let mut session = slot.lock().map_err(|_| ApiError::Internal)?;
        let name = event.name();
        let mut rng = rand::rng();
        let mut ctx = FlowContext {
            store: &*self.store,
            transport: &*self.transport,
            rng: &mut rng,
            policy: &self.policy,
            keys: &self.keys,
        };
        let out = apply_event(&mut session, event, &mut ctx, (self.clock)());
        match &out {
            Ok(_) => info!(
                session = id,
                event = name,
                state = session.state().name(),
                "event applied"
            ),
            Err(e) => info!(session = id, event = name, error = %e, "event rejected"),
        }
        Ok((session.state(), out?))
    }

    pub fn session_state(&self, id: &str) -> Option<SessionState> {
        let slot = self.sessions.lock().ok()?.get(id).cloned()?;
        let state = slot.lock().ok()?.state();
        Some(state)
    }

    pub fn verify(&self, image: &RasterImage) -> Decision {
        let d = process_envelope(
            image,
            &self.keys.mac_pass,
            &self.keys.key_pass,
            &*self.store,
            self.policy.geofence_radius_m,
            self.policy.face_threshold,
        );
        info!(outcome = ?d.outcome(), reason = %d.reason(), "merchant decision");
        d
    }
}

#[derive(Deserialize)]
struct BeginBody {
    username: String,
}

#[derive(Deserialize)]
struct PasswordBody {
    password: String,
}

#[derive(Deserialize)]
struct CodeBody {
    code: String,
}

#[derive(Deserialize)]
struct LocationBody {
    lat: f64,
    lon: f64,
}

impl LocationBody {
    fn point(&self) -> Result<GeoPoint, ApiError> {
        GeoPoint::new(self.lat, self.lon).map_err(|_| ApiError::InvalidLocation)
    }
}

type Shared = Arc<Gateway>;

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|_| ApiError::Internal)?
}

async fn step(gw: Shared, id: String, event: FactorEvent) -> Result<Json<StateView>, ApiError> {
    let (state, _) = blocking(move || gw.apply(&id, event)).await?;
    Ok(Json(state.into()))
}

async fn start(
    State(gw): State<Shared>,
    Json(body): Json<BeginBody>,
) -> Result<impl IntoResponse, ApiError> {
    let session = gw.begin(&body.username)?;
    let view =
        serde_json::json!({ "session_id": session.id().as_str(), "state": session.state().name() });
    Ok((StatusCode::CREATED, Json(view)))
}

async fn password(
    State(gw): State<Shared>,
    Path(id): Path<String>,
    Json(b): Json<PasswordBody>,
) -> Result<Json<StateView>, ApiError> {
    step(gw, id, FactorEvent::PasswordSubmitted(b.password)).await
}

async fn otp_request(
    State(gw): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<StateView>, ApiError> {
    step(gw, id, FactorEvent::OtpRequested).await
}

async fn otp_verify(
    State(gw): State<Shared>,
    Path(id): Path<String>,
    Json(b): Json<CodeBody>,
) -> Result<Json<StateView>, ApiError> {
    step(gw, id, FactorEvent::OtpSubmitted(b.code)).await
}

async fn face(
    State(gw): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<StateView>, ApiError> {
    let image = blocking(move || Ok(decode_png(&body)?)).await?;
    step(gw, id, FactorEvent::FaceSubmitted(image)).await
}

async fn location(
    State(gw): State<Shared>,
    Path(id): Path<String>,
    Json(b): Json<LocationBody>,
) -> Result<Json<StateView>, ApiError> {
    let point = b.point()?;
    step(gw, id, FactorEvent::LocationReported(point)).await
}

async fn finalize(
    State(gw): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let png = blocking(move || {
        let cover = decode_png(&body)?;
        let (_, stego) = gw.apply(&id, FactorEvent::FinalizeRequested(cover))?;
        Ok(encode_png(&stego.ok_or(ApiError::Internal)?)?)
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn merchant_verify(
    State(gw): State<Shared>,
    body: Bytes,
) -> Result<Json<DecisionView>, ApiError> {
    let decision = blocking(move || Ok(gw.verify(&decode_png(&body)?))).await?;
    Ok(Json(decision.into()))
}

async fn update_location(
    State(gw): State<Shared>,
    Path(name): Path<String>,
    Json(b): Json<LocationBody>,
) -> Result<StatusCode, ApiError> {
    let point = b.point()?;
    let found = blocking(move || Ok(gw.store().update_location(&name, point)?)).await?;
    if found {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::UnknownUser)
    }
}

pub fn router(gateway: Arc<Gateway>) -> Router {
    Router::new()
        .route("/session", post(start))
        .route("/session/{id}/password", post(password))
        .route("/session/{id}/otp/request", post(otp_request))
        .route("/session/{id}/otp/verify", post(otp_verify))
        .route("/session/{id}/face", post(face))
        .route("/session/{id}/location", post(location))
        .route("/session/{id}/finalize", post(finalize))
        .route("/merchant/verify", post(merchant_verify))
        .route("/users/{name}/location", put(update_location))
        .layer(DefaultBodyLimit::max(MAX_BODY))
        .with_state(gateway)
}

/// Serves on an already-bound listener until the task is dropped.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    gateway: Arc<Gateway>,
) -> std::io::Result<()> {
    axum::serve(listener, router(gateway)).await
}

/// Binds `config.listen_addr` and serves until Ctrl-C.
pub async fn serve(config: &Config) -> anyhow::Result<()> {
    let gateway = Arc::new(Gateway::from_config(config)?);
    let listener = tokio::net::TcpListener::bind(&config.listen_addr).await?;
    info!(addr = %listener.local_addr()?, users = gateway.store().len(), "gateway listening");
    axum::serve(listener, router(gateway))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
