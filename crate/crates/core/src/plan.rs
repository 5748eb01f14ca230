//! Delivery plans: days of journeys, each journey a depot-to-depot circuit
//! of one truck with its hopper loading.

use serde::{Deserialize, Serialize};

use crate::model::{CustomerId, HopperId, Instance, Node, OrderId, TruckId, DEPOT};

/// Feed for one order carried in one hopper on one journey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopperAssignment {
    pub hopper: HopperId,
    pub order: OrderId,
    pub tons: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Journey {
    pub truck: TruckId,
    /// Visiting order; the depot is implicit at both ends.
    pub stops: Vec<CustomerId>,
    pub loads: Vec<HopperAssignment>,
}

impl Journey {
    pub fn new(truck: TruckId) -> Self {
        Self { truck, stops: Vec::new(), loads: Vec::new() }
    }

    /// Tons loaded at the depot.
    pub fn load(&self) -> f64 {
        self.loads.iter().map(|a| a.tons).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty() && self.loads.is_empty()
    }

    /// Node sequence including the depot at both ends. Unknown customers
    /// are skipped; callers validate structure first.
    pub fn route_nodes(&self, instance: &Instance) -> Vec<Node> {
        let mut nodes = Vec::with_capacity(self.stops.len() + 2);
        nodes.push(DEPOT);
        nodes.extend(self.stops.iter().filter_map(|c| instance.node_of(*c)));
        nodes.push(DEPOT);
        nodes
    }

    pub fn distance(&self, instance: &Instance) -> f64 {
        route_length(instance, &self.route_nodes(instance), Instance::distance)
    }

    /// Driving time plus service time at each stop.
    pub fn hours(&self, instance: &Instance) -> f64 {
        route_length(instance, &self.route_nodes(instance), Instance::travel_time)
            + instance.service_time() * self.stops.len() as f64
    }
}

pub(crate) fn route_length(
    instance: &Instance,
    nodes: &[Node],
    leg: impl Fn(&Instance, Node, Node) -> f64,
) -> f64 {
    nodes.windows(2).map(|w| leg(instance, w[0], w[1])).sum()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DayPlan {
    /// Journeys in execution order; a truck's journeys run in the order they
    /// appear here.
    pub journeys: Vec<Journey>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    /// `days[0]` is planning day 1.
    pub days: Vec<DayPlan>,
}

impl Plan {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn journeys(&self) -> impl Iterator<Item = (u32, &Journey)> {
        self.days
            .iter()
            .enumerate()
            .flat_map(|(d, day)| day.journeys.iter().map(move |j| (d as u32 + 1, j)))
    }

    pub fn journey_count(&self) -> usize {
        self.days.iter().map(|d| d.journeys.len()).sum()
    }

    pub fn stop_count(&self) -> usize {
        self.journeys().map(|(_, j)| j.stops.len()).sum()
    }

    pub fn total_distance(&self, instance: &Instance) -> f64 {
        self.journeys().map(|(_, j)| j.distance(instance)).sum()
    }

    /// Drops journeys without stops or loads and trailing empty days.
    pub fn normalize(&mut self) {
        for day in &mut self.days {
            day.journeys.retain(|j| !j.is_empty());
        }
        while self.days.last().is_some_and(|d| d.journeys.is_empty()) {
            self.days.pop();
        }
    }

    /// Mutable access to a day, creating empty days up to it.
    pub fn day_mut(&mut self, day_index: usize) -> &mut DayPlan {
        if self.days.len() <= day_index {
            self.days.resize_with(day_index + 1, DayPlan::default);
        }
        &mut self.days[day_index]
    }
}
