//! HTTP/JSON service over sessions of frames, with recommendations streamed
//! as server-sent events.

use std::collections::HashMap;
use std::convert::Infallible;
use std::net::SocketAddr;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use futures::Stream;
use luxen_core::{Engine, Frame, Transform, Value};
use serde::{Deserialize, Serialize};
use serde_json::json;
use serde_json::value::{to_raw_value, RawValue};
use tokio::sync::watch;

use crate::load::{load_csv, CsvOptions};
use crate::schedule::{run_dashboard, Delivery};
use crate::session::{Lookup, SharedFrame, Store};
use crate::wire::{self, DoneEvent, RecommendationEvent, TransformBody, WarningOut, MAX_K};

pub const DEFAULT_TABLE_LIMIT: usize = 50;
const MAX_TABLE_LIMIT: usize = 10_000;
const POLL_TIMEOUT: Duration = Duration::from_secs(20);

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    diagnostics: Vec<String>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into(), diagnostics: Vec::new() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        let message = message.into();
        ApiError { status: StatusCode::BAD_REQUEST, diagnostics: vec![message.clone()], message }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message, "diagnostics": self.diagnostics }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// One named SSE event.
#[derive(Debug, Clone, Serialize)]
pub struct StreamEvent {
    pub event: &'static str,
    /// Serialized once so every subscriber sees identical bytes.
    pub data: Box<RawValue>,
}

impl StreamEvent {
    fn new(event: &'static str, data: &impl Serialize) -> StreamEvent {
        StreamEvent { event, data: to_raw_value(data).expect("event payloads serialize") }
    }

    fn terminal(&self) -> bool {
        self.event != "recommendation"
    }
}

/// A recommendation computation that any number of streams can follow.
/// Late subscribers replay from the start.
#[derive(Debug)]
struct Flight {
    events: Mutex<Vec<StreamEvent>>,
    len: watch::Sender<usize>,
}

impl Flight {
    fn new() -> Arc<Flight> {
        Arc::new(Flight { events: Mutex::new(Vec::new()), len: watch::channel(0).0 })
    }

    fn finished(events: Vec<StreamEvent>) -> Arc<Flight> {
        let n = events.len();
        Arc::new(Flight { events: Mutex::new(events), len: watch::channel(n).0 })
    }

    fn push(&self, event: StreamEvent) {
        let mut events = self.events.lock().unwrap();
        events.push(event);
        self.len.send_replace(events.len());
    }

    fn get(&self, i: usize) -> Option<StreamEvent> {
        self.events.lock().unwrap().get(i).cloned()
    }

    /// Events from `from` on, waiting up to `timeout` for at least one.
    async fn wait_from(&self, from: usize, timeout: Duration) -> Vec<StreamEvent> {
        let mut rx = self.len.subscribe();
        let _ = tokio::time::timeout(timeout, rx.wait_for(|n| *n > from)).await;
        let events = self.events.lock().unwrap();
        events.get(from..).map(<[StreamEvent]>::to_vec).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct FlightKey {
    frame: u64,
    version: u64,
    intent_version: u64,
    k: usize,
}

pub struct AppState {
    engine: Arc<Engine>,
    workers: usize,
    default_k: usize,
    store: Mutex<Store>,
    flights: Mutex<HashMap<FlightKey, Arc<Flight>>>,
    /// Last k streamed per frame, so vis ids resolve against that dashboard.
    last_k: Mutex<HashMap<u64, usize>>,
}

impl AppState {
    pub fn new(engine: Engine, workers: usize, frames_per_session: usize) -> Arc<AppState> {
        let default_k = engine.config.k;
        Arc::new(AppState {
            engine: Arc::new(engine),
            workers: workers.max(1),
            default_k,
            store: Mutex::new(Store::new(frames_per_session)),
            flights: Mutex::new(HashMap::new()),
            last_k: Mutex::new(HashMap::new()),
        })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    fn frame(&self, id: u64) -> ApiResult<SharedFrame> {
        match self.store.lock().unwrap().get(id) {
            Lookup::Live(f) => Ok(f),
            Lookup::Evicted => Err(ApiError::new(StatusCode::CONFLICT, format!("frame {id} was evicted from its session"))),
            Lookup::Unknown => Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown frame {id}"))),
        }
    }

    fn position(&self, action: &str) -> Option<usize> {
        self.engine.registry().iter().position(|a| a.name == action)
    }

    fn resolve_k(&self, k: Option<usize>) -> ApiResult<usize> {
        let k = k.unwrap_or(self.default_k);
        if k == 0 || k > MAX_K {
            return Err(ApiError::bad_request(format!("k must be between 1 and {MAX_K}, got {k}")));
        }
        Ok(k)
    }

    /// The flight producing (or replaying) recommendations for `id` at `k`.
    fn flight(self: &Arc<Self>, id: u64, k: usize) -> ApiResult<Arc<Flight>> {
        let shared = self.frame(id)?;
        self.last_k.lock().unwrap().insert(id, k);
        let frame = shared.lock().unwrap();
        if let Some(d) = frame.fresh_dashboard(k) {
            let mut events: Vec<StreamEvent> = wire::replay(d, &|a| self.position(a))
                .into_iter()
                .map(|e| StreamEvent::new("recommendation", &e))
                .collect();
            events.push(StreamEvent::new("done", &DoneEvent::new(id, d, true)));
            return Ok(Flight::finished(events));
        }
        let stamp = frame.stamp();
        drop(frame);
        let key = FlightKey { frame: id, version: stamp.version, intent_version: stamp.intent_version, k };
        let mut flights = self.flights.lock().unwrap();
        if let Some(f) = flights.get(&key) {
            return Ok(f.clone());
        }
        let flight = Flight::new();
        flights.insert(key, flight.clone());
        drop(flights);
        let state = self.clone();
        let f = flight.clone();
        tokio::task::spawn_blocking(move || {
            let outcome = catch_unwind(AssertUnwindSafe(|| state.compute(id, &shared, k, &f)));
            if let Err(panic) = outcome {
                let message = panic.downcast_ref::<&str>().map(|s| s.to_string()).unwrap_or_else(|| "computation failed".into());
                f.push(StreamEvent::new("error", &json!({ "error": message })));
            }
            state.flights.lock().unwrap().remove(&key);
        });
        Ok(flight)
    }

    fn compute(&self, id: u64, shared: &SharedFrame, k: usize, flight: &Flight) {
        let engine = &self.engine;
        let prepared = {
            let mut frame = shared.lock().unwrap();
            // a flight that finished between lookup and registration filled the cache
            if let Some(d) = frame.fresh_dashboard(k) {
                for e in wire::replay(d, &|a| self.position(a)) {
                    flight.push(StreamEvent::new("recommendation", &e));
                }
                flight.push(StreamEvent::new("done", &DoneEvent::new(id, d, true)));
                return;
            }
            let meta = engine.ensure_metadata(&mut frame);
            let sample = engine.ensure_sample(&mut frame);
            engine.prepare(&frame, meta, sample, k)
        };
        if let Some(v) = &prepared.current_vis {
            flight.push(StreamEvent::new("recommendation", &RecommendationEvent::current(v)));
        }
        let sink = |d: Delivery| {
            let e = RecommendationEvent::new(&d.recommendation, d.position, d.started);
            flight.push(StreamEvent::new("recommendation", &e));
        };
        let dashboard = Arc::new(run_dashboard(engine, &prepared, self.workers, &sink));
        {
            let mut frame = shared.lock().unwrap();
            // cache fills are idempotent; a frame that moved on keeps its own state
            if frame.stamp() == prepared.stamp {
                frame.store_dashboard(prepared.stamp, k, dashboard.clone());
            }
        }
        flight.push(StreamEvent::new("done", &DoneEvent::new(id, &dashboard, false)));
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))?
}

async fn create_session(State(state): State<Arc<AppState>>) -> impl IntoResponse {
    let id = state.store.lock().unwrap().create_session();
    (StatusCode::CREATED, Json(json!({ "session_id": id })))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(s): Path<u64>) -> ApiResult<Json<serde_json::Value>> {
    let store = state.store.lock().unwrap();
    let frames = store.frame_ids(s).ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown session {s}")))?;
    Ok(Json(json!({ "session_id": s, "frames": frames })))
}

#[derive(Debug, Deserialize)]
struct UploadParams {
    delimiter: Option<char>,
    header: Option<bool>,
    name: Option<String>,
}

async fn upload_frame(
    State(state): State<Arc<AppState>>,
    Path(s): Path<u64>,
    Query(params): Query<UploadParams>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    if !state.store.lock().unwrap().has_session(s) {
        return Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown session {s}")));
    }
    let delimiter = match params.delimiter {
        Some(c) if c.is_ascii() => c as u8,
        Some(c) => return Err(ApiError::bad_request(format!("delimiter must be ASCII, got {c:?}"))),
        None => b',',
    };
    let options = CsvOptions { delimiter, has_header: params.header.unwrap_or(true) };
    let name = params.name.unwrap_or_else(|| "upload".into());
    let frame = blocking(move || load_csv(&body[..], options, &name).map_err(|e| ApiError::bad_request(e.to_string()))).await?;
    let summary = frame_summary(&frame);
    let id = state
        .store
        .lock()
        .unwrap()
        .insert(s, frame, None)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown session {s}")))?;
    Ok((StatusCode::CREATED, Json(json!({ "frame_id": id, "frame": summary }))))
}

fn frame_summary(f: &Frame) -> serde_json::Value {
    let columns: Vec<_> = f.columns().map(|c| json!({ "name": c.name, "storage_type": c.data.storage_type() })).collect();
    json!({
        "version": f.version(),
        "intent_version": f.intent_version(),
        "rows": f.row_count(),
        "columns": columns,
        "pre_aggregated": f.is_pre_aggregated(),
        "history": f.history().iter().map(|h| json!({ "seq": h.seq, "kind": h.kind, "params": h.params })).collect::<Vec<_>>(),
    })
}

async fn get_frame(State(state): State<Arc<AppState>>, Path(f): Path<u64>) -> ApiResult<Json<serde_json::Value>> {
    let shared = state.frame(f)?;
    let frame = shared.lock().unwrap();
    Ok(Json(frame_summary(&frame)))
}

#[derive(Debug, Deserialize)]
struct TableParams {
    offset: Option<usize>,
    limit: Option<usize>,
}

async fn table(
    State(state): State<Arc<AppState>>,
    Path(f): Path<u64>,
    Query(p): Query<TableParams>,
) -> ApiResult<Json<serde_json::Value>> {
    let shared = state.frame(f)?;
    let frame = shared.lock().unwrap();
    let offset = p.offset.unwrap_or(0).min(frame.row_count());
    let limit = p.limit.unwrap_or(DEFAULT_TABLE_LIMIT).min(MAX_TABLE_LIMIT);
    let end = (offset + limit).min(frame.row_count());
    let rows: Vec<Vec<Option<Value>>> =
        (offset..end).map(|r| frame.columns().map(|c| c.data.value(r)).collect()).collect();
    let index: Vec<Value> = (offset..end).map(|r| frame.index().label(r)).collect();
    Ok(Json(json!({
        "frame_id": f,
        "version": frame.version(),
        "columns": frame.column_names(),
        "row_count": frame.row_count(),
        "offset": offset,
        "limit": limit,
        "index": index,
        "rows": rows,
    })))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum IntentBody {
    Clauses(Vec<String>),
    Wrapped { clauses: Vec<String> },
}

async fn put_intent(State(state): State<Arc<AppState>>, Path(f): Path<u64>, body: Bytes) -> ApiResult<Json<serde_json::Value>> {
    let clauses = match serde_json::from_slice::<IntentBody>(&body) {
        Ok(IntentBody::Clauses(c) | IntentBody::Wrapped { clauses: c }) => c,
        Err(e) => return Err(ApiError::bad_request(format!("intent body must be a list of clause strings: {e}"))),
    };
    let shared = state.frame(f)?;
    let engine = state.engine.clone();
    blocking(move || {
        let mut frame = shared.lock().unwrap();
        let warnings: Vec<WarningOut> = if clauses.is_empty() {
            frame.set_intent(None);
            Vec::new()
        } else {
            let v = engine.set_intent(&mut frame, &clauses).map_err(|e| ApiError::bad_request(e.to_string()))?;
            v.warnings.iter().map(WarningOut::from).collect()
        };
        Ok(Json(json!({
            "frame_id": f,
            "version": frame.version(),
            "intent_version": frame.intent_version(),
            "warnings": warnings,
        })))
    })
    .await
}

async fn transform(
    State(state): State<Arc<AppState>>,
    Path(f): Path<u64>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let shared = state.frame(f)?;
    let body: TransformBody =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("malformed transform: {e}")))?;
    let t = Transform::try_from(body.transform).map_err(ApiError::bad_request)?;
    if body.in_place {
        let mut frame = shared.lock().unwrap();
        frame.apply_in_place(&t).map_err(|e| ApiError::bad_request(e.to_string()))?;
        return Ok((StatusCode::OK, Json(json!({ "frame_id": f, "version": frame.version() }))));
    }
    let derived = {
        let frame = shared.lock().unwrap();
        frame.transform(&t).map_err(|e| ApiError::bad_request(e.to_string()))?
    };
    let version = derived.version();
    let mut store = state.store.lock().unwrap();
    let session = store.session_of(f).ok_or_else(|| ApiError::new(StatusCode::CONFLICT, format!("frame {f} was evicted")))?;
    let id = store.insert(session, derived, Some(f)).ok_or_else(|| ApiError::internal("session vanished"))?;
    Ok((StatusCode::CREATED, Json(json!({ "frame_id": id, "parent": f, "version": version }))))
}

#[derive(Debug, Deserialize)]
struct RecParams {
    k: Option<usize>,
    after: Option<usize>,
}

fn sse_event(e: &StreamEvent) -> Event {
    Event::default().event(e.event).data(e.data.get())
}

async fn recommendations(
    State(state): State<Arc<AppState>>,
    Path(f): Path<u64>,
    Query(p): Query<RecParams>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let k = state.resolve_k(p.k)?;
    let flight = state.flight(f, k)?;
    let rx = flight.len.subscribe();
    let stream = futures::stream::unfold((flight, rx, 0usize, false), |(flight, mut rx, i, ended)| async move {
        if ended {
            return None;
        }
        loop {
            if let Some(e) = flight.get(i) {
                let terminal = e.terminal();
                return Some((Ok(sse_event(&e)), (flight, rx, i + 1, terminal)));
            }
            if rx.changed().await.is_err() {
                return None;
            }
        }
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

/// Long-poll fallback: events after index `after`, waiting briefly for new ones.
async fn poll_recommendations(
    State(state): State<Arc<AppState>>,
    Path(f): Path<u64>,
    Query(p): Query<RecParams>,
) -> ApiResult<Json<serde_json::Value>> {
    let k = state.resolve_k(p.k)?;
    let after = p.after.unwrap_or(0);
    let flight = state.flight(f, k)?;
    let events = flight.wait_from(after, POLL_TIMEOUT).await;
    let done = events.last().is_some_and(StreamEvent::terminal);
    Ok(Json(json!({ "events": events, "next": after + events.len(), "done": done })))
}

#[derive(Debug, Deserialize)]
struct VisParams {
    k: Option<usize>,
}

async fn vis_spec(
    State(state): State<Arc<AppState>>,
    Path((f, i)): Path<(u64, u64)>,
    Query(p): Query<VisParams>,
) -> ApiResult<Response> {
    let k = match p.k {
        Some(k) => state.resolve_k(Some(k))?,
        None => state.last_k.lock().unwrap().get(&f).copied().unwrap_or(state.default_k),
    };
    let shared = state.frame(f)?;
    let st = state.clone();
    blocking(move || {
        let mut frame = shared.lock().unwrap();
        let d = st.engine.lookup_or_compute(&mut frame, k);
        let vis = wire::find_vis(&d, &|a| st.position(a), i)
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no vis {i} on frame {f}")))?;
        let body = serde_json::to_vec(&luxen_core::vis::to_spec_doc(vis)).map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(([(axum::http::header::CONTENT_TYPE, "application/json")], body).into_response())
    })
    .await
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{s}", get(get_session))
        .route("/sessions/{s}/frames", post(upload_frame))
        .route("/frames/{f}", get(get_frame))
        .route("/frames/{f}/table", get(table))
        .route("/frames/{f}/intent", put(put_intent))
        .route("/frames/{f}/transform", post(transform))
        .route("/frames/{f}/recommendations", get(recommendations))
        .route("/frames/{f}/recommendations/poll", get(poll_recommendations))
        .route("/frames/{f}/vis/{i}/spec", get(vis_spec))
        .with_state(state)
}

/// Binds `addr` and serves until the process ends. Returns the bound address
/// through `bound` before accepting connections.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>, bound: impl FnOnce(SocketAddr)) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    bound(listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
