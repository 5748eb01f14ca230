//! Constraint checking for plans.
//!
//! [`check_feasibility`] lists every violated constraint; an unknown id in
//! the plan is a [`StructuralError`] instead, since no meaningful check can
//! be made against an entity the instance does not define.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::StructuralError;
use crate::model::{CustomerId, HopperId, Instance, OrderId, TruckId};
use crate::plan::Plan;

/// Slack on ton quantities. Loads copied from solver printouts carry
/// rounding around the sixth decimal.
pub const TONS_TOLERANCE: f64 = 1e-5;
/// Slack on kilometre and hour budgets.
pub const BUDGET_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Assignment exceeds its hopper's capacity.
    HopperOverflow,
    /// Two assignments share one hopper on the same journey.
    HopperShared,
    /// Journey load exceeds the truck's legal maximum.
    MaxLoad,
    DailyHours,
    DailyKm,
    /// Stop at a customer the truck cannot access.
    Unreachable,
    /// Customer listed twice in one journey.
    DuplicateStop,
    /// Stop without any feed for that customer.
    StopWithoutLoad,
    /// Feed loaded for a customer the journey never visits.
    LoadWithoutStop,
    EmptyJourney,
    NonPositiveLoad,
    /// More delivered than ordered.
    OverDelivery,
    /// Piece delivered after its order's deadline day.
    LateDelivery,
    /// Order not complete by its deadline day.
    DeadlineShortfall,
    BeyondHorizon,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::HopperOverflow => "hopper-overflow",
            Self::HopperShared => "hopper-shared",
            Self::MaxLoad => "max-load",
            Self::DailyHours => "daily-hours",
            Self::DailyKm => "daily-km",
            Self::Unreachable => "unreachable",
            Self::DuplicateStop => "duplicate-stop",
            Self::StopWithoutLoad => "stop-without-load",
            Self::LoadWithoutStop => "load-without-stop",
            Self::EmptyJourney => "empty-journey",
            Self::NonPositiveLoad => "non-positive-load",
            Self::OverDelivery => "over-delivery",
            Self::LateDelivery => "late-delivery",
            Self::DeadlineShortfall => "deadline-shortfall",
            Self::BeyondHorizon => "beyond-horizon",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "id", rename_all = "snake_case")]
pub enum Entity {
    Customer(CustomerId),
    Order(OrderId),
    Hopper(HopperId),
    Truck(TruckId),
    Journey,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// 1-based planning day.
    pub day: u32,
    pub truck: Option<TruckId>,
    /// Position of the journey within its day.
    pub journey: Option<usize>,
    pub entity: Entity,
    /// Offending measured value and the limit it broke, where meaningful.
    pub value: f64,
    pub limit: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on day {}", self.kind.as_str(), self.day)?;
        if let Some(t) = self.truck {
            write!(f, ", truck {t}")?;
        }
        if let Some(j) = self.journey {
            write!(f, ", journey {}", j + 1)?;
        }
        match self.entity {
            Entity::Customer(c) => write!(f, ", customer {c}")?,
            Entity::Order(o) => write!(f, ", order {o}")?,
            Entity::Hopper(h) => write!(f, ", hopper {h}")?,
            Entity::Truck(_) | Entity::Journey => {}
        }
        if self.value != 0.0 || self.limit != 0.0 {
            write!(f, " ({:.4} vs limit {:.4})", self.value, self.limit)?;
        }
        Ok(())
    }
}

/// Every violated constraint of `plan`, in plan order followed by
/// order-level checks. Empty iff the plan is feasible.
pub fn check_feasibility(plan: &Plan, instance: &Instance) -> Result<Vec<Violation>, StructuralError> {
    let mut found = Vec::new();
    walk(plan, instance, &mut |v| found.push(v))?;
    Ok(found)
}

pub fn is_feasible(plan: &Plan, instance: &Instance) -> Result<bool, StructuralError> {
    let mut count = 0usize;
    walk(plan, instance, &mut |_| count += 1)?;
    Ok(count == 0)
}

fn walk(
    plan: &Plan,
    instance: &Instance,
    report: &mut dyn FnMut(Violation),
) -> Result<(), StructuralError> {
    let orders = instance.orders();
    let trucks = instance.trucks();
    let mut delivered = vec![0.0; orders.len()];
    let mut delivered_in_time = vec![0.0; orders.len()];
    let mut day_km = vec![0.0; trucks.len()];
    let mut day_hours = vec![0.0; trucks.len()];

    let mut nodes = Vec::new();
    let mut hopper_uses: Vec<(HopperId, u32)> = Vec::new();
    let mut stop_served = Vec::new();

    for (d, day_plan) in plan.days.iter().enumerate() {
        let day = d as u32 + 1;
        day_km.iter_mut().for_each(|v| *v = 0.0);
        day_hours.iter_mut().for_each(|v| *v = 0.0);
        let mut touched = vec![false; trucks.len()];

        for (ji, journey) in day_plan.journeys.iter().enumerate() {
            let truck_id = journey.truck;
            let t = instance
                .truck_idx(truck_id)
                .ok_or(StructuralError::UnknownTruck { day, truck: truck_id })?;
            let truck = &trucks[t];
            touched[t] = true;
            let at = |kind, entity, value, limit| Violation {
                kind,
                day,
                truck: Some(truck_id),
                journey: Some(ji),
                entity,
                value,
                limit,
            };

            if day > instance.horizon_days() {
                report(at(
                    ViolationKind::BeyondHorizon,
                    Entity::Journey,
                    day as f64,
                    instance.horizon_days() as f64,
                ));
            }
            if journey.stops.is_empty() {
                report(at(ViolationKind::EmptyJourney, Entity::Journey, 0.0, 0.0));
            }

            nodes.clear();
            for (k, &c) in journey.stops.iter().enumerate() {
                let node = instance.node_of(c).ok_or(StructuralError::UnknownCustomer {
                    day,
                    truck: truck_id,
                    customer: c,
                })?;
                if journey.stops[..k].contains(&c) {
                    report(at(ViolationKind::DuplicateStop, Entity::Customer(c), 0.0, 0.0));
                }
                if !instance.reachable(t, node) {
                    report(at(ViolationKind::Unreachable, Entity::Customer(c), 0.0, 0.0));
                }
                nodes.push(node);
            }

            hopper_uses.clear();
            stop_served.clear();
            stop_served.resize(journey.stops.len(), false);
            let mut load = 0.0;
            for a in &journey.loads {
                let hopper = truck.hopper(a.hopper).ok_or(StructuralError::UnknownHopper {
                    day,
                    truck: truck_id,
                    hopper: a.hopper,
                })?;
                let oi = instance.order_idx(a.order).ok_or(StructuralError::UnknownOrder {
                    day,
                    truck: truck_id,
                    order: a.order,
                })?;
                let order = &orders[oi];
                if !(a.tons > 0.0) {
                    report(at(ViolationKind::NonPositiveLoad, Entity::Order(a.order), a.tons, 0.0));
                }
                if a.tons > hopper.capacity + TONS_TOLERANCE {
                    report(at(
                        ViolationKind::HopperOverflow,
                        Entity::Hopper(a.hopper),
                        a.tons,
                        hopper.capacity,
                    ));
                }
                match hopper_uses.iter_mut().find(|(h, _)| *h == a.hopper) {
                    Some((_, n)) => {
                        *n += 1;
                        if *n == 2 {
                            report(at(ViolationKind::HopperShared, Entity::Hopper(a.hopper), 0.0, 0.0));
                        }
                    }
                    None => hopper_uses.push((a.hopper, 1)),
                }
                match journey.stops.iter().position(|&c| c == order.customer) {
                    Some(k) => stop_served[k] = true,
                    None => report(at(
                        ViolationKind::LoadWithoutStop,
                        Entity::Customer(order.customer),
                        a.tons,
                        0.0,
                    )),
                }
                if day > order.deadline_day() {
                    report(at(
                        ViolationKind::LateDelivery,
                        Entity::Order(a.order),
                        day as f64,
                        order.deadline_day() as f64,
                    ));
                } else {
                    delivered_in_time[oi] += a.tons;
                }
                delivered[oi] += a.tons;
                load += a.tons;
            }
            for (k, served) in stop_served.iter().enumerate() {
                if !served {
                    report(at(
                        ViolationKind::StopWithoutLoad,
                        Entity::Customer(journey.stops[k]),
                        0.0,
                        0.0,
                    ));
                }
            }
            if load > truck.max_load + TONS_TOLERANCE {
                report(at(ViolationKind::MaxLoad, Entity::Truck(truck_id), load, truck.max_load));
            }

            let mut km = 0.0;
            let mut hours = instance.service_time() * nodes.len() as f64;
            let mut prev = crate::model::DEPOT;
            for &n in nodes.iter().chain(std::iter::once(&crate::model::DEPOT)) {
                km += instance.distance(prev, n);
                hours += instance.travel_time(prev, n);
                prev = n;
            }
            day_km[t] += km;
            day_hours[t] += hours;
        }

        for (t, truck) in trucks.iter().enumerate() {
            if !touched[t] {
                continue;
            }
            let at = |kind, value, limit| Violation {
                kind,
                day,
                truck: Some(truck.id),
                journey: None,
                entity: Entity::Truck(truck.id),
                value,
                limit,
            };
            if day_km[t] > truck.max_daily_km + BUDGET_TOLERANCE {
                report(at(ViolationKind::DailyKm, day_km[t], truck.max_daily_km));
            }
            if day_hours[t] > truck.max_daily_hours + BUDGET_TOLERANCE {
                report(at(ViolationKind::DailyHours, day_hours[t], truck.max_daily_hours));
            }
        }
    }

    for (oi, order) in orders.iter().enumerate() {
        let at = |kind, value, limit| Violation {
            kind,
            day: order.deadline_day(),
            truck: None,
            journey: None,
            entity: Entity::Order(order.id),
            value,
            limit,
        };
        if delivered[oi] > order.quantity + TONS_TOLERANCE {
            report(at(ViolationKind::OverDelivery, delivered[oi], order.quantity));
        }
        if delivered_in_time[oi] < order.quantity - TONS_TOLERANCE {
            report(at(ViolationKind::DeadlineShortfall, delivered_in_time[oi], order.quantity));
        }
    }
    Ok(())
}
