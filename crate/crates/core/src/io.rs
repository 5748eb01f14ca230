//! JSON documents for instances, plans and annealing runs.
//!
//! Every document carries `format_version`. Readers reject unknown fields
//! and versions newer than they understand, and report the JSON path of the
//! first offending field.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annealing::{AnnealOutcome, AnnealParams, StopReason, Trace};
use crate::cost::{evaluate_cost, total_delivered, CostBreakdown};
use crate::error::ValidationError;
use crate::insertion::{BuildReport, InsertionParams};
use crate::model::{
    CostParams, Customer, CustomerId, Feed, Hopper, Instance, InstanceData, Matrix, ObjectiveMode, Order, RateBand,
    Truck, TruckId, DEFAULT_HORIZON_DAYS, DEFAULT_MAX_DAILY_HOURS,
};
use crate::objective::{objective_of, Objective};
use crate::plan::{DayPlan, Plan};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {message}")]
    Json { path: String, message: String },
    #[error("format_version {found} is newer than the supported version {supported}")]
    UnsupportedVersion { found: u64, supported: u32 },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixDoc {
    Full(Vec<Vec<f64>>),
    /// Row `i` starts at the diagonal.
    Upper(Vec<Vec<f64>>),
    /// Travel time only: distance divided by a constant speed.
    FromDistance { speed_kmh: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruckDoc {
    pub id: TruckId,
    pub hoppers: Vec<Hopper>,
    /// Defaults to the summed hopper capacity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_load: Option<f64>,
    #[serde(default = "default_hours")]
    pub max_daily_hours: f64,
    pub max_daily_km: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reachable: Option<Vec<CustomerId>>,
}

fn default_hours() -> f64 {
    DEFAULT_MAX_DAILY_HOURS
}

fn default_horizon() -> u32 {
    DEFAULT_HORIZON_DAYS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostDoc {
    pub unload_fee: f64,
    pub per_ton_fixed: f64,
    pub rate_bands: Vec<RateBand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shortfall_penalty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub format_version: u32,
    pub name: String,
    #[serde(default)]
    pub objective: ObjectiveMode,
    #[serde(default = "default_horizon")]
    pub horizon_days: u32,
    #[serde(default)]
    pub service_time: f64,
    pub feeds: Vec<Feed>,
    pub customers: Vec<Customer>,
    pub orders: Vec<Order>,
    pub trucks: Vec<TruckDoc>,
    pub distance: MatrixDoc,
    pub travel_time: MatrixDoc,
    pub cost: CostDoc,
}

impl InstanceDoc {
    pub fn from_data(data: &InstanceData) -> Self {
        let matrix = |m: &Matrix| {
            if m.is_symmetric() {
                MatrixDoc::Upper(m.rows().iter().enumerate().map(|(i, r)| r[i..].to_vec()).collect())
            } else {
                MatrixDoc::Full(m.rows())
            }
        };
        Self {
            format_version: FORMAT_VERSION,
            name: data.name.clone(),
            objective: data.objective,
            horizon_days: data.horizon_days,
            service_time: data.service_time,
            feeds: data.feeds.clone(),
            customers: data.customers.clone(),
            orders: data.orders.clone(),
            trucks: data
                .trucks
                .iter()
                .map(|t| TruckDoc {
                    id: t.id,
                    hoppers: t.hoppers.clone(),
                    max_load: Some(t.max_load),
                    max_daily_hours: t.max_daily_hours,
                    max_daily_km: t.max_daily_km,
                    reachable: t.reachable.clone(),
                })
                .collect(),
            distance: matrix(&data.distance),
            travel_time: matrix(&data.travel_time),
            cost: CostDoc {
                unload_fee: data.cost.unload_fee,
                per_ton_fixed: data.cost.per_ton_fixed,
                rate_bands: data.cost.rate_bands.clone(),
                shortfall_penalty: data.cost.shortfall_penalty,
            },
        }
    }

    pub fn into_data(self) -> Result<InstanceData, ValidationError> {
        let distance = match self.distance {
            MatrixDoc::Full(rows) => Matrix::from_rows(&rows),
            MatrixDoc::Upper(rows) => Matrix::from_upper_triangle(&rows),
            MatrixDoc::FromDistance { .. } => {
                return Err(ValidationError::invalid("distance", "from_distance only applies to travel_time"))
            }
        }
        .map_err(|m| ValidationError::invalid("distance", m))?;
        let travel_time = match self.travel_time {
            MatrixDoc::Full(rows) => Matrix::from_rows(&rows),
            MatrixDoc::Upper(rows) => Matrix::from_upper_triangle(&rows),
            MatrixDoc::FromDistance { speed_kmh } => {
                if !(speed_kmh > 0.0 && speed_kmh.is_finite()) {
                    return Err(ValidationError::invalid(
                        "travel_time.from_distance.speed_kmh",
                        format!("speed must be positive, got {speed_kmh}"),
                    ));
                }
                Ok(distance.scaled(1.0 / speed_kmh))
            }
        }
        .map_err(|m| ValidationError::invalid("travel_time", m))?;
        Ok(InstanceData {
            name: self.name,
            customers: self.customers,
            feeds: self.feeds,
            orders: self.orders,
            trucks: self
                .trucks
                .into_iter()
                .map(|t| Truck {
                    max_load: t.max_load.unwrap_or_else(|| t.hoppers.iter().map(|h| h.capacity).sum()),
                    id: t.id,
                    hoppers: t.hoppers,
                    max_daily_hours: t.max_daily_hours,
                    max_daily_km: t.max_daily_km,
                    reachable: t.reachable,
                })
                .collect(),
            distance,
            travel_time,
            service_time: self.service_time,
            cost: CostParams {
                unload_fee: self.cost.unload_fee,
                per_ton_fixed: self.cost.per_ton_fixed,
                rate_bands: self.cost.rate_bands,
                shortfall_penalty: self.cost.shortfall_penalty,
            },
            objective: self.objective,
            horizon_days: self.horizon_days,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSummary {
    pub days: usize,
    pub journeys: usize,
    pub stops: usize,
    pub distance_km: f64,
    pub total_ordered: f64,
    pub cost: CostBreakdown,
    pub objective: Objective,
}

impl PlanSummary {
    pub fn of(plan: &Plan, instance: &Instance) -> Self {
        Self {
            days: plan.days.len(),
            journeys: plan.journey_count(),
            stops: plan.stop_count(),
            distance_km: plan.total_distance(instance),
            total_ordered: instance.total_ordered(),
            cost: evaluate_cost(plan, instance),
            objective: objective_of(plan, instance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDoc {
    pub format_version: u32,
    pub instance: String,
    pub days: Vec<DayPlan>,
    /// Written for readers; ignored and recomputed on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PlanSummary>,
}

impl PlanDoc {
    pub fn new(plan: &Plan, instance: &Instance) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            instance: instance.name().to_string(),
            days: plan.days.clone(),
            summary: Some(PlanSummary::of(plan, instance)),
        }
    }

    pub fn plan(&self) -> Plan {
        Plan { days: self.days.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub initial_objective: Objective,
    pub best_objective: Objective,
    pub initial_scalar: f64,
    pub best_scalar: f64,
    pub improvement_pct: f64,
    pub iterations: u64,
    pub accepted: u64,
    pub null_moves: u64,
    pub initial_temp: f64,
    pub elapsed_secs: f64,
    pub stop: StopReason,
}

impl RunSummary {
    pub fn of(outcome: &AnnealOutcome) -> Self {
        Self {
            initial_objective: outcome.initial_objective,
            best_objective: outcome.best_objective,
            initial_scalar: outcome.initial_scalar,
            best_scalar: outcome.best_scalar,
            improvement_pct: outcome.improvement_pct(),
            iterations: outcome.iterations,
            accepted: outcome.accepted,
            null_moves: outcome.null_moves,
            initial_temp: outcome.initial_temp,
            elapsed_secs: outcome.elapsed_secs,
            stop: outcome.stop,
        }
    }
}

/// Parameters, reports and sampled trace of one construct-and-improve run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDoc {
    pub format_version: u32,
    pub instance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub insertion: Option<InsertionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub build: Option<BuildReport>,
    pub anneal: AnnealParams,
    pub summary: RunSummary,
    pub trace: Trace,
    /// Where the best plan was written, if anywhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_file: Option<String>,
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| FormatError::Json { path: ".".into(), message: e.to_string() })?;
    match value.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v > u64::from(FORMAT_VERSION) => {
            return Err(FormatError::UnsupportedVersion { found: v, supported: FORMAT_VERSION })
        }
        _ => {}
    }
    serde_path_to_error::deserialize(value).map_err(|e| FormatError::Json {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

fn to_pretty<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let doc: InstanceDoc = parse(text)?;
    Ok(Instance::new(doc.into_data()?)?)
}

pub fn instance_to_json(data: &InstanceData) -> String {
    to_pretty(&InstanceDoc::from_data(data))
}

pub fn parse_plan(text: &str) -> Result<PlanDoc, FormatError> {
    parse(text)
}

pub fn plan_to_json(plan: &Plan, instance: &Instance) -> String {
    to_pretty(&PlanDoc::new(plan, instance))
}

pub fn parse_run(text: &str) -> Result<RunDoc, FormatError> {
    parse(text)
}

pub fn run_to_json(run: &RunDoc) -> String {
    to_pretty(run)
}

/// Delivered tons, in the same units the plan summary uses.
pub fn delivered(plan: &Plan) -> f64 {
    total_delivered(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn instance_round_trips() {
        let data = synth::cooperative_example_data();
        let text = instance_to_json(&data);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back.data(), &data);
        assert_eq!(instance_to_json(back.data()), text);
    }

    #[test]
    fn asymmetric_matrix_written_in_full() {
        let mut data = synth::cooperative_example_data();
        data.travel_time = Matrix::from_fn(data.distance.size(), |i, j| if i == j { 0.0 } else { (i * 7 + j) as f64 * 0.1 });
        let text = instance_to_json(&data);
        assert!(text.contains("\"full\""));
        assert_eq!(parse_instance(&text).unwrap().data(), &data);
    }

    #[test]
    fn unknown_field_reports_path() {
        let text = instance_to_json(&synth::cooperative_example_data())
            .replacen("\"max_daily_km\"", "\"max_daily_kms\"", 1);
        match parse_instance(&text) {
            Err(FormatError::Json { path, .. }) => assert!(path.starts_with("trucks[0]"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn newer_version_refused() {
        let text = instance_to_json(&synth::cooperative_example_data()).replacen(
            "\"format_version\": 1",
            "\"format_version\": 2",
            1,
        );
        assert!(matches!(parse_instance(&text), Err(FormatError::UnsupportedVersion { found: 2, .. })));
    }

    #[test]
    fn validation_error_cites_field() {
        let mut data = synth::cooperative_example_data();
        data.orders[2].quantity = -1.0;
        let err = parse_instance(&instance_to_json(&data)).unwrap_err();
        assert!(err.to_string().starts_with("orders[2]"), "{err}");
    }

    #[test]
    fn plan_round_trips_and_is_stable() {
        let inst = synth::cooperative_example();
        let plan = synth::cooperative_printed_solution();
        let text = plan_to_json(&plan, &inst);
        let doc = parse_plan(&text).unwrap();
        assert_eq!(doc.plan(), plan);
        assert_eq!(plan_to_json(&doc.plan(), &inst), text);
        assert_eq!(doc.summary.unwrap().distance_km, 221.0);
    }
}
