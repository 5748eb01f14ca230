//! Instances, runs and their on-disk copies.
//!
//! Layout under the run directory:
//!
//! ```text
//! instances/<id>.json     instance document
//! runs/<id>/status.json   latest run summary
//! runs/<id>/plan.json     best plan so far (constructed, then improved)
//! runs/<id>/run.json      parameters, summary and trace once finished
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use hopper_core::annealing::{anneal_observed, AnnealObserver, AnnealParams, Progress, StopReason};
use hopper_core::insertion::{build_initial, InsertionParams};
use hopper_core::io::{self, RunDoc, RunSummary};
use hopper_core::model::Instance;
use hopper_core::objective::{objective_of, scalarize, Objective};
use hopper_core::plan::Plan;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Queued,
    Constructing,
    Annealing,
    Done,
    Cancelled,
    Failed,
}

impl Phase {
    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Done | Phase::Cancelled | Phase::Failed)
    }
}

/// What a client polls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStatus {
    pub id: String,
    pub instance: String,
    pub seq: u64,
    pub phase: Phase,
    pub created_unix: u64,
    pub iteration: u64,
    pub max_iterations: u64,
    pub elapsed_secs: f64,
    pub initial_scalar: Option<f64>,
    pub current_scalar: Option<f64>,
    pub best_scalar: Option<f64>,
    pub best_objective: Option<Objective>,
    pub best_distance_km: Option<f64>,
    pub improvement_pct: f64,
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunRequest {
    pub instance: String,
    pub insertion: InsertionParams,
    pub anneal: AnnealParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub id: String,
    pub name: String,
    pub customers: usize,
    pub orders: usize,
    pub trucks: usize,
    pub total_ordered: f64,
}

pub struct Run {
    pub request: RunRequest,
    instance: Arc<Instance>,
    status: Mutex<RunStatus>,
    plan: Mutex<Option<Plan>>,
    doc: Mutex<Option<RunDoc>>,
    cancel: AtomicBool,
}

impl Run {
    pub fn status(&self) -> RunStatus {
        self.status.lock().unwrap().clone()
    }

    pub fn plan(&self) -> Option<Plan> {
        self.plan.lock().unwrap().clone()
    }

    pub fn doc(&self) -> Option<RunDoc> {
        self.doc.lock().unwrap().clone()
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    fn update(&self, f: impl FnOnce(&mut RunStatus)) {
        f(&mut self.status.lock().unwrap());
    }
}

pub struct Store {
    dir: PathBuf,
    instances: RwLock<BTreeMap<String, Arc<Instance>>>,
    runs: RwLock<BTreeMap<String, Arc<Run>>>,
    next_seq: AtomicU64,
    slots: Arc<Semaphore>,
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn short_id() -> String {
    uuid::Uuid::new_v4().simple().to_string()[..12].to_string()
}

impl Store {
    /// Opens `dir`, reloading every instance and run persisted there. Runs
    /// that were still active when the previous process stopped are marked
    /// failed; their last persisted plan stays available.
    pub fn open(dir: impl Into<PathBuf>, max_concurrent: usize) -> std::io::Result<Arc<Self>> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("instances"))?;
        fs::create_dir_all(dir.join("runs"))?;
        let store = Store {
            dir,
            instances: RwLock::default(),
            runs: RwLock::default(),
            next_seq: AtomicU64::new(0),
            slots: Arc::new(Semaphore::new(max_concurrent.max(1))),
        };
        store.reload()?;
        Ok(Arc::new(store))
    }

    fn reload(&self) -> std::io::Result<()> {
        for entry in fs::read_dir(self.dir.join("instances"))? {
            let path = entry?.path();
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else { continue };
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            match fs::read_to_string(&path).map(|t| io::parse_instance(&t)) {
                Ok(Ok(inst)) => {
                    self.instances.write().unwrap().insert(id, Arc::new(inst));
                }
                Ok(Err(e)) => tracing::warn!("skipping instance {}: {e}", path.display()),
                Err(e) => tracing::warn!("skipping instance {}: {e}", path.display()),
            }
        }
        let mut max_seq = 0;
        for entry in fs::read_dir(self.dir.join("runs"))? {
            let run_dir = entry?.path();
            match self.load_run(&run_dir) {
                Ok(run) => {
                    let status = run.status();
                    max_seq = max_seq.max(status.seq + 1);
                    self.runs.write().unwrap().insert(status.id.clone(), run);
                }
                Err(e) => tracing::warn!("skipping run {}: {e}", run_dir.display()),
            }
        }
        self.next_seq.store(max_seq, Ordering::SeqCst);
        Ok(())
    }

    fn load_run(&self, run_dir: &Path) -> Result<Arc<Run>, String> {
        let text = fs::read_to_string(run_dir.join("status.json")).map_err(|e| e.to_string())?;
        let saved: SavedStatus = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        let instance = self
            .instances
            .read()
            .unwrap()
            .get(&saved.status.instance)
            .cloned()
            .ok_or_else(|| format!("unknown instance {}", saved.status.instance))?;
        let plan = match fs::read_to_string(run_dir.join("plan.json")) {
            Ok(t) => Some(io::parse_plan(&t).map_err(|e| e.to_string())?.plan()),
            Err(_) => None,
        };
        let doc = match fs::read_to_string(run_dir.join("run.json")) {
            Ok(t) => Some(io::parse_run(&t).map_err(|e| e.to_string())?),
            Err(_) => None,
        };
        let mut status = saved.status;
        if !status.phase.is_terminal() {
            status.phase = Phase::Failed;
            status.error = Some("interrupted by a service restart".into());
        }
        Ok(Arc::new(Run {
            request: saved.request,
            instance,
            status: Mutex::new(status),
            plan: Mutex::new(plan),
            doc: Mutex::new(doc),
            cancel: AtomicBool::new(false),
        }))
    }

    pub fn add_instance(&self, text: &str) -> Result<InstanceInfo, ApiError> {
        let inst = io::parse_instance(text).map_err(|e| ApiError::unprocessable(e.to_string()))?;
        let id = short_id();
        write_atomic(&self.dir.join("instances").join(format!("{id}.json")), &io::instance_to_json(inst.data()))
            .map_err(ApiError::internal)?;
        let info = info(&id, &inst);
        self.instances.write().unwrap().insert(id, Arc::new(inst));
        Ok(info)
    }

    pub fn instance(&self, id: &str) -> Result<Arc<Instance>, ApiError> {
        self.instances
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no instance {id}")))
    }

    pub fn instances(&self) -> Vec<InstanceInfo> {
        self.instances.read().unwrap().iter().map(|(id, i)| info(id, i)).collect()
    }

    pub fn run(&self, id: &str) -> Result<Arc<Run>, ApiError> {
        self.runs.read().unwrap().get(id).cloned().ok_or_else(|| ApiError::not_found(format!("no run {id}")))
    }

    /// Runs in submission order.
    pub fn runs(&self) -> Vec<RunStatus> {
        let mut all: Vec<RunStatus> = self.runs.read().unwrap().values().map(|r| r.status()).collect();
        all.sort_by_key(|s| s.seq);
        all
    }

    /// Queues a run. It starts when a slot frees up, in submission order.
    pub fn start_run(self: &Arc<Self>, request: RunRequest) -> Result<RunStatus, ApiError> {
        let instance = self.instance(&request.instance)?;
        request.anneal.validate().map_err(|e| ApiError::unprocessable(e.to_string()))?;
        let id = short_id();
        let status = RunStatus {
            id: id.clone(),
            instance: request.instance.clone(),
            seq: self.next_seq.fetch_add(1, Ordering::SeqCst),
            phase: Phase::Queued,
            created_unix: now_unix(),
            iteration: 0,
            max_iterations: request.anneal.max_iterations,
            elapsed_secs: 0.0,
            initial_scalar: None,
            current_scalar: None,
            best_scalar: None,
            best_objective: None,
            best_distance_km: None,
            improvement_pct: 0.0,
            temperature: None,
            error: None,
        };
        let run = Arc::new(Run {
            request,
            instance,
            status: Mutex::new(status.clone()),
            plan: Mutex::new(None),
            doc: Mutex::new(None),
            cancel: AtomicBool::new(false),
        });
        self.runs.write().unwrap().insert(id, run.clone());
        self.persist_status(&run);

        let store = Arc::clone(self);
        let slots = Arc::clone(&self.slots);
        tokio::spawn(async move {
            let Ok(_permit) = slots.acquire_owned().await else { return };
            if run.cancel.load(Ordering::SeqCst) {
                return;
            }
            let worker = {
                let store = Arc::clone(&store);
                let run = Arc::clone(&run);
                tokio::task::spawn_blocking(move || store.execute(&run))
            };
            if let Err(e) = worker.await {
                run.update(|s| {
                    s.phase = Phase::Failed;
                    s.error = Some(format!("worker crashed: {e}"));
                });
                store.persist_status(&run);
            }
        });
        Ok(status)
    }

    /// Asks a run to stop. A queued run ends without a plan; an active one
    /// keeps the best plan found so far.
    pub fn cancel(&self, id: &str) -> Result<RunStatus, ApiError> {
        let run = self.run(id)?;
        run.cancel.store(true, Ordering::SeqCst);
        let mut became_cancelled = false;
        run.update(|s| {
            if s.phase == Phase::Queued {
                s.phase = Phase::Cancelled;
                became_cancelled = true;
            }
        });
        if became_cancelled {
            self.persist_status(&run);
        }
        Ok(run.status())
    }

    fn run_dir(&self, id: &str) -> PathBuf {
        self.dir.join("runs").join(id)
    }

    fn persist_status(&self, run: &Run) {
        let saved = SavedStatus { status: run.status(), request: run.request.clone() };
        let path = self.run_dir(&saved.status.id).join("status.json");
        let text = serde_json::to_string_pretty(&saved).expect("status serializes");
        if let Err(e) = write_atomic(&path, &text) {
            tracing::error!("persisting {}: {e}", path.display());
        }
    }

    fn persist_plan(&self, run: &Run, plan: &Plan) {
        let id = run.status().id;
        let path = self.run_dir(&id).join("plan.json");
        if let Err(e) = write_atomic(&path, &io::plan_to_json(plan, &run.instance)) {
            tracing::error!("persisting {}: {e}", path.display());
        }
    }

    fn execute(&self, run: &Run) {
        let inst = &*run.instance;
        run.update(|s| s.phase = Phase::Constructing);
        self.persist_status(run);

        let (initial, report) = build_initial(inst, &run.request.insertion);
        let obj = objective_of(&initial, inst);
        let scalar = scalarize(&obj, inst);
        *run.plan.lock().unwrap() = Some(initial.clone());
        self.persist_plan(run, &initial);
        run.update(|s| {
            s.initial_scalar = Some(scalar);
            s.current_scalar = Some(scalar);
            s.best_scalar = Some(scalar);
            s.best_objective = Some(obj);
            s.best_distance_km = Some(initial.total_distance(inst));
        });
        if !report.is_complete() {
            run.update(|s| {
                s.phase = Phase::Failed;
                s.error = Some(format!(
                    "construction left {} orders unserved and {} late",
                    report.unserved.len(),
                    report.late.len()
                ));
            });
            self.persist_status(run);
            return;
        }
        if run.cancel.load(Ordering::SeqCst) {
            run.update(|s| s.phase = Phase::Cancelled);
            self.persist_status(run);
            return;
        }

        run.update(|s| s.phase = Phase::Annealing);
        self.persist_status(run);
        let mut observer = LiveStatus { run };
        match anneal_observed(&initial, inst, &run.request.anneal, &mut observer) {
            Ok(out) => {
                *run.plan.lock().unwrap() = Some(out.best.clone());
                self.persist_plan(run, &out.best);
                let doc = RunDoc {
                    format_version: io::FORMAT_VERSION,
                    instance: inst.name().to_string(),
                    insertion: Some(run.request.insertion),
                    build: Some(report),
                    anneal: run.request.anneal.clone(),
                    summary: RunSummary::of(&out),
                    trace: out.trace.clone(),
                    plan_file: Some("plan.json".into()),
                };
                let path = self.run_dir(&run.status().id).join("run.json");
                if let Err(e) = write_atomic(&path, &io::run_to_json(&doc)) {
                    tracing::error!("persisting {}: {e}", path.display());
                }
                *run.doc.lock().unwrap() = Some(doc);
                run.update(|s| {
                    s.phase = if out.stop == StopReason::Cancelled { Phase::Cancelled } else { Phase::Done };
                    s.iteration = out.iterations;
                    s.elapsed_secs = out.elapsed_secs;
                    s.best_scalar = Some(out.best_scalar);
                    s.best_objective = Some(out.best_objective);
                    s.best_distance_km = Some(out.best.total_distance(inst));
                    s.improvement_pct = out.improvement_pct();
                });
            }
            Err(e) => run.update(|s| {
                s.phase = Phase::Failed;
                s.error = Some(e.to_string());
            }),
        }
        self.persist_status(run);
    }
}

fn info(id: &str, inst: &Instance) -> InstanceInfo {
    InstanceInfo {
        id: id.to_string(),
        name: inst.name().to_string(),
        customers: inst.customers().len(),
        orders: inst.orders().len(),
        trucks: inst.trucks().len(),
        total_ordered: inst.total_ordered(),
    }
}

#[derive(Serialize, Deserialize)]
struct SavedStatus {
    status: RunStatus,
    request: RunRequest,
}

struct LiveStatus<'a> {
    run: &'a Run,
}

impl AnnealObserver for LiveStatus<'_> {
    fn on_progress(&mut self, p: &Progress) {
        self.run.update(|s| {
            s.iteration = p.iteration;
            s.elapsed_secs = p.elapsed;
            s.current_scalar = Some(p.current);
            s.best_scalar = Some(p.best);
            s.best_objective = Some(p.best_objective);
            s.improvement_pct = p.improvement_pct();
            s.temperature = Some(p.temperature);
        });
    }

    fn should_stop(&self) -> bool {
        self.run.cancel.load(Ordering::SeqCst)
    }
}
