//! Human-evaluation HTTP service.
//!
//! Each session gets an achievable goal and one of the loaded policies
//! (round-robin over a fresh random permutation per block of sessions). Every
//! event is written to `<store>/sessions/<id>.json` before the response is
//! sent, and the store is reloaded on start.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use nusbench::acts::{SystemAct, SystemActType};
use nusbench::decoder::SemanticDecoder;
use nusbench::goal::{sample_achievable_goal, GoalConfig};
use nusbench::harness::{DialogueRecord, LiveDialogue};
use nusbench::ontology::{Constraints, Ontology};
use nusbench::render::render_system_acts;
use nusbench::rng::{domain, stream};
use nusbench::system::Learner;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("unknown session {0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error(transparent)]
    Internal(#[from] nusbench::Error),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Open,
    Ended,
    Judged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredSession {
    pub id: String,
    pub index: u64,
    pub policy: String,
    pub status: Status,
    pub dialogue: LiveDialogue,
    /// The person's verdict, which scores the record.
    #[serde(default)]
    pub verdict: Option<bool>,
    /// Whether the goal was objectively met, kept for comparison.
    #[serde(default)]
    pub objective_success: Option<bool>,
    #[serde(default)]
    pub record: Option<DialogueRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GoalPayload {
    pub constraints: Constraints,
    pub requests: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OpenResponse {
    pub session_id: String,
    pub goal: GoalPayload,
    pub system_text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TurnRequest {
    pub user_text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TurnResponse {
    pub system_text: String,
    pub ended: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JudgeRequest {
    pub success: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JudgeResponse {
    pub stored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub n_judged: usize,
    pub success_rate: f64,
    pub avg_reward: f64,
    pub avg_turns: f64,
    pub objective_success_rate: f64,
}

pub struct ServiceConfig {
    pub ontology: Ontology,
    pub decoder: SemanticDecoder,
    /// Named policies; at least one.
    pub policies: Vec<(String, Learner)>,
    pub store: PathBuf,
    pub seed: u64,
    pub goals: GoalConfig,
}

pub struct Service {
    ontology: Ontology,
    decoder: SemanticDecoder,
    policies: Vec<(String, Learner)>,
    store: PathBuf,
    seed: u64,
    goals: GoalConfig,
    sessions: Mutex<HashMap<String, Arc<Mutex<StoredSession>>>>,
    next_index: Mutex<u64>,
}

fn write_atomic(path: &Path, text: &str) -> nusbench::Result<()> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, text).map_err(|e| nusbench::Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| nusbench::Error::io(path, e))
}

impl Service {
    /// Opens the store, reloading sessions written by earlier runs.
    pub fn new(config: ServiceConfig) -> nusbench::Result<Self> {
        if config.policies.is_empty() {
            return Err(nusbench::Error::Config("the service needs at least one policy".into()));
        }
        let dir = config.store.join("sessions");
        std::fs::create_dir_all(&dir).map_err(|e| nusbench::Error::io(&dir, e))?;
        let mut sessions = HashMap::new();
        let mut next = 0;
        let entries = std::fs::read_dir(&dir).map_err(|e| nusbench::Error::io(&dir, e))?;
        for entry in entries.flatten() {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|e| nusbench::Error::io(&path, e))?;
            let s: StoredSession = serde_json::from_str(&text)
                .map_err(|e| nusbench::Error::parse(path.display().to_string(), e))?;
            next = next.max(s.index + 1);
            sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
        }
        Ok(Self {
            ontology: config.ontology,
            decoder: config.decoder,
            policies: config.policies,
            store: config.store,
            seed: config.seed,
            goals: config.goals,
            sessions: Mutex::new(sessions),
            next_index: Mutex::new(next),
        })
    }

    /// Policy for the `index`-th session: blocks of `n` sessions each use a
    /// random permutation of the `n` policies.
    pub fn policy_for(&self, index: u64) -> usize {
        let n = self.policies.len() as u64;
        let mut order: Vec<usize> = (0..self.policies.len()).collect();
        order.shuffle(&mut stream(self.seed, domain::SESSION - 1 - index / n));
        order[(index % n) as usize]
    }

    fn persist(&self, s: &StoredSession) -> nusbench::Result<()> {
        let path = self.store.join("sessions").join(format!("{}.json", s.id));
        write_atomic(&path, &serde_json::to_string_pretty(s).expect("session serializes"))
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<StoredSession>>, ApiError> {
        self.sessions
            .lock()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    pub fn open(&self) -> Result<OpenResponse, ApiError> {
        let index = {
            let mut next = self.next_index.lock().expect("index lock");
            let i = *next;
            *next += 1;
            i
        };
        let stream_id = domain::SESSION + index;
        let goal = sample_achievable_goal(&self.ontology, &self.goals, &mut stream(self.seed, stream_id))?;
        let (dialogue, system_text) = LiveDialogue::open(goal.clone(), self.seed, stream_id)?;
        let id = format!("s{index:06}");
        let stored = StoredSession {
            id: id.clone(),
            index,
            policy: self.policies[self.policy_for(index)].0.clone(),
            status: Status::Open,
            dialogue,
            verdict: None,
            objective_success: None,
            record: None,
        };
        self.persist(&stored)?;
        self.sessions
            .lock()
            .expect("session map lock")
            .insert(id.clone(), Arc::new(Mutex::new(stored)));
        Ok(OpenResponse {
            session_id: id,
            goal: GoalPayload {
                constraints: goal.constraints,
                requests: goal.requests,
            },
            system_text,
        })
    }

    pub fn turn(&self, id: &str, user_text: &str) -> Result<TurnResponse, ApiError> {
        let cell = self.session(id)?;
        let mut s = cell.lock().expect("session lock");
        if s.status != Status::Open {
            return Err(ApiError::Conflict(format!("session {id} has ended")));
        }
        let policy = &self
            .policies
            .iter()
            .find(|(name, _)| *name == s.policy)
            .ok_or_else(|| nusbench::Error::Config(format!("policy {} is not loaded", s.policy)))?
            .1;
        let mut rng = stream(self.seed, domain::SYSTEM + s.index);
        let reply = s.dialogue.user_turn(user_text, policy, &self.ontology, &self.decoder, &mut rng)?;
        let ended = s.dialogue.ended;
        if ended {
            s.status = Status::Ended;
            s.objective_success = Some(s.dialogue.objective_success(&self.ontology));
        }
        self.persist(&s)?;
        let system_text = match reply {
            Some(t) => t,
            None => render_system_acts(&[SystemAct::bare(SystemActType::Bye)])?,
        };
        Ok(TurnResponse { system_text, ended })
    }

    pub fn judge(&self, id: &str, success: bool) -> Result<JudgeResponse, ApiError> {
        let cell = self.session(id)?;
        let mut s = cell.lock().expect("session lock");
        match s.status {
            Status::Open => return Err(ApiError::Conflict(format!("session {id} has not ended"))),
            Status::Judged => return Err(ApiError::Conflict(format!("session {id} was already judged"))),
            Status::Ended => {}
        }
        let record = s.dialogue.clone().into_record(success)?;
        s.record = Some(record);
        s.verdict = Some(success);
        s.status = Status::Judged;
        self.persist(&s)?;
        Ok(JudgeResponse { stored: true })
    }

    /// Aggregates over judged sessions, keyed by policy name.
    pub fn report(&self) -> BTreeMap<String, PolicyReport> {
        let sessions: Vec<Arc<Mutex<StoredSession>>> = self.sessions.lock().expect("session map lock").values().cloned().collect();
        let mut acc: BTreeMap<String, Vec<(bool, f64, usize, bool)>> = self.policies.iter().map(|(n, _)| (n.clone(), Vec::new())).collect();
        for cell in sessions {
            let s = cell.lock().expect("session lock");
            if let (Some(r), Some(obj)) = (&s.record, s.objective_success) {
                acc.entry(s.policy.clone())
                    .or_default()
                    .push((r.success, r.total_reward(), r.n_turns(), obj));
            }
        }
        acc.into_iter()
            .map(|(name, rows)| {
                let n = rows.len();
                let d = n.max(1) as f64;
                let report = PolicyReport {
                    n_judged: n,
                    success_rate: 100.0 * rows.iter().filter(|r| r.0).count() as f64 / d,
                    avg_reward: rows.iter().map(|r| r.1).sum::<f64>() / d,
                    avg_turns: rows.iter().map(|r| r.2 as f64).sum::<f64>() / d,
                    objective_success_rate: 100.0 * rows.iter().filter(|r| r.3).count() as f64 / d,
                };
                (name, report)
            })
            .collect()
    }
}

async fn open_session(State(svc): State<Arc<Service>>) -> Result<Json<OpenResponse>, ApiError> {
    tokio::task::spawn_blocking(move || svc.open()).await.expect("open task").map(Json)
}

async fn post_turn(
    State(svc): State<Arc<Service>>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<TurnRequest>,
) -> Result<Json<TurnResponse>, ApiError> {
    tokio::task::spawn_blocking(move || svc.turn(&id, &req.user_text))
        .await
        .expect("turn task")
        .map(Json)
}

async fn post_judge(
    State(svc): State<Arc<Service>>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<JudgeRequest>,
) -> Result<Json<JudgeResponse>, ApiError> {
    tokio::task::spawn_blocking(move || svc.judge(&id, req.success))
        .await
        .expect("judge task")
        .map(Json)
}

async fn get_report(State(svc): State<Arc<Service>>) -> Json<BTreeMap<String, PolicyReport>> {
    Json(svc.report())
}

/// Routes of the wire protocol, plus static files from `assets` at `/`.
pub fn router(service: Arc<Service>, assets: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/session", post(open_session))
        .route("/api/session/{id}/turn", post(post_turn))
        .route("/api/session/{id}/judge", post(post_judge))
        .route("/api/report", get(get_report))
        .with_state(service);
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}
