//! Transport cost of a plan.
//!
//! Drivers are paid a fee per unloading plus, per journey, a rate times the
//! journey distance times the tons loaded at the depot. The rate is that of
//! the band containing the journey's total distance. A fixed per-ton term is
//! reported but left out of the optimized total.

use serde::{Deserialize, Serialize};

use crate::model::Instance;
use crate::plan::{Journey, Plan};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub unloading: f64,
    pub variable_transport: f64,
    pub fixed_transport: f64,
    /// `unloading + variable_transport`.
    pub total_optimized: f64,
}

pub fn journey_variable_cost(journey: &Journey, instance: &Instance) -> f64 {
    let km = journey.distance(instance);
    instance.cost_params().rate_for(km) * km * journey.load()
}

pub fn evaluate_cost(plan: &Plan, instance: &Instance) -> CostBreakdown {
    let params = instance.cost_params();
    let mut stops = 0usize;
    let mut variable = 0.0;
    let mut tons = 0.0;
    for (_, journey) in plan.journeys() {
        stops += journey.stops.len();
        variable += journey_variable_cost(journey, instance);
        tons += journey.load();
    }
    let unloading = params.unload_fee * stops as f64;
    CostBreakdown {
        unloading,
        variable_transport: variable,
        fixed_transport: params.per_ton_fixed * tons,
        total_optimized: unloading + variable,
    }
}

/// Tons over every hopper assignment in the plan.
pub fn total_delivered(plan: &Plan) -> f64 {
    plan.journeys().map(|(_, j)| j.load()).sum()
}
