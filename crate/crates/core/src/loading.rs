//! Greedy hopper packing.
//!
//! Pieces are taken largest first. Each goes whole into the smallest free
//! hopper that holds it; a piece no free hopper can hold fills the largest
//! free hopper and the remainder is placed the same way. The journey's
//! legal load limit caps how much of each piece is taken at all.

use std::cmp::Ordering;

use crate::model::{Hopper, OrderId, Truck};
use crate::plan::HopperAssignment;

/// Amounts below this are treated as nothing left to place.
pub const LOAD_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Loading {
    /// Sorted by hopper id.
    pub assignments: Vec<HopperAssignment>,
    /// Tons that could not be loaded.
    pub leftover: f64,
}

impl Loading {
    pub fn loaded(&self) -> f64 {
        self.assignments.iter().map(|a| a.tons).sum()
    }

    /// Tons loaded for one order.
    pub fn loaded_for(&self, order: OrderId) -> f64 {
        self.assignments.iter().filter(|a| a.order == order).map(|a| a.tons).sum()
    }
}

/// Packs `pending` (order, tons) pieces into the `free` hoppers, loading at
/// most `max_load` tons in total.
pub fn load_hoppers(pending: &[(OrderId, f64)], free: &[Hopper], max_load: f64) -> Loading {
    let mut pieces: Vec<(OrderId, f64)> = pending.iter().copied().filter(|&(_, t)| t > 0.0).collect();
    pieces.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut hoppers: Vec<&Hopper> = free.iter().collect();
    hoppers.sort_by(|a, b| match b.capacity.total_cmp(&a.capacity) {
        Ordering::Equal => b.id.cmp(&a.id),
        other => other,
    });

    let mut out = Loading::default();
    let mut room = max_load.max(0.0);
    for (order, tons) in pieces {
        let mut amount = tons.min(room);
        let mut loaded = 0.0;
        while amount > LOAD_EPSILON && !hoppers.is_empty() {
            // Hoppers are sorted by decreasing capacity, so the last one that
            // fits is the smallest fit, lowest id among equals.
            match hoppers.iter().rposition(|h| h.capacity + LOAD_EPSILON >= amount) {
                Some(k) => {
                    let h = hoppers.remove(k);
                    let put = amount.min(h.capacity);
                    out.assignments.push(HopperAssignment { hopper: h.id, order, tons: put });
                    loaded += put;
                    amount = 0.0;
                }
                None => {
                    // Largest free hopper, lowest id among equals.
                    let k = hoppers.iter().rposition(|h| h.capacity == hoppers[0].capacity).unwrap_or(0);
                    let h = hoppers.remove(k);
                    out.assignments.push(HopperAssignment { hopper: h.id, order, tons: h.capacity });
                    loaded += h.capacity;
                    amount -= h.capacity;
                }
            }
        }
        room -= loaded;
        out.leftover += tons - loaded;
    }
    out.assignments.sort_by_key(|a| a.hopper);
    out
}

/// Packs into every hopper of `truck` under its load limit.
pub fn load_truck(pending: &[(OrderId, f64)], truck: &Truck) -> Loading {
    load_hoppers(pending, &truck.hoppers, truck.max_load)
}
