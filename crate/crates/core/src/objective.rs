//! Two-tier objective: deliver as many tons as possible, then spend as
//! little as possible doing it.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::cost::{evaluate_cost, total_delivered};
use crate::model::{Instance, ObjectiveMode};
use crate::plan::Plan;

/// Delivered tons are compared at this resolution (one kilogram) so that
/// summation noise never flips the first tier.
const DELIVERED_RESOLUTION: f64 = 1e-3;
/// Same idea for the second tier: costs equal to a nano-euro (or
/// nano-kilometre) are ties.
const COST_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    /// Tons.
    pub delivered: f64,
    /// Euros in cost mode, kilometres in distance mode.
    pub cost: f64,
}

impl Objective {
    fn delivered_key(&self) -> i64 {
        (self.delivered / DELIVERED_RESOLUTION).round() as i64
    }

    fn cost_key(&self) -> i64 {
        (self.cost / COST_RESOLUTION).round() as i64
    }

    /// Lexicographic comparison: `Less` means `self` is the better plan.
    pub fn compare(&self, other: &Objective) -> Ordering {
        other
            .delivered_key()
            .cmp(&self.delivered_key())
            .then_with(|| self.cost_key().cmp(&other.cost_key()))
    }

    pub fn is_better_than(&self, other: &Objective) -> bool {
        self.compare(other) == Ordering::Less
    }
}

pub fn compare(a: &Objective, b: &Objective) -> Ordering {
    a.compare(b)
}

pub fn objective_of(plan: &Plan, instance: &Instance) -> Objective {
    let cost = match instance.objective_mode() {
        ObjectiveMode::Cost => evaluate_cost(plan, instance).total_optimized,
        ObjectiveMode::Distance => plan.total_distance(instance),
    };
    Objective { delivered: total_delivered(plan), cost }
}

/// Collapses an objective to one number, lower is better:
/// `W * (ordered - delivered) + cost`.
///
/// Agrees with [`compare`] whenever the cost gap between two objectives is
/// smaller than `W` times their delivered gap. With `W` above
/// [`Instance::shortfall_weight_bound`], that covers every pair that differs
/// by at least one ton of delivery per journey of cost swing.
pub fn scalarize(obj: &Objective, instance: &Instance) -> f64 {
    scalarize_with(obj, instance.total_ordered(), instance.shortfall_weight())
}

pub fn scalarize_with(obj: &Objective, total_ordered: f64, weight: f64) -> f64 {
    // Same resolution as the delivered tier of `compare`.
    let shortfall = ((total_ordered - obj.delivered) / DELIVERED_RESOLUTION).round().max(0.0) * DELIVERED_RESOLUTION;
    weight * shortfall + obj.cost
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(delivered: f64, cost: f64) -> Objective {
        Objective { delivered, cost }
    }

    #[test]
    fn more_delivery_wins() {
        assert_eq!(compare(&obj(10.0, 500.0), &obj(9.0, 100.0)), Ordering::Less);
    }

    #[test]
    fn cheaper_wins_on_equal_delivery() {
        assert_eq!(compare(&obj(10.0, 500.0), &obj(10.0, 499.0)), Ordering::Greater);
    }

    #[test]
    fn identical_objectives_tie() {
        assert_eq!(compare(&obj(10.0, 500.0), &obj(10.0, 500.0)), Ordering::Equal);
    }

    #[test]
    fn scalarize_formula() {
        assert_eq!(scalarize_with(&obj(9.0, 100.0), 10.0, 1e6), 1_000_100.0);
        assert_eq!(scalarize_with(&obj(10.0, 321.5), 10.0, 1e6), 321.5);
    }
}
