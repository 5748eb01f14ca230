//! The seven neighbourhood moves.
//!
//! A "block" is one customer's stop on a journey together with every hopper
//! assignment carrying feed for that customer on that journey. Relocations
//! and swaps move blocks whole, then repack the hoppers of every journey
//! they touched. A draw that cannot produce a distinct candidate is a null
//! move and yields `None`; feasibility of a produced candidate is the
//! caller's business.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::feasibility::TONS_TOLERANCE;
use crate::insertion::insertion_cost;
use crate::loading::load_truck;
use crate::model::{CustomerId, Instance, OrderId, TruckId};
use crate::plan::{Journey, Plan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    /// Block to a random (day, truck, journey) elsewhere.
    RelocateAnywhere,
    /// Block to another journey of the same truck and day.
    RelocateSameTruckDay,
    /// Block to a random truck and journey on the same day.
    RelocateSameDay,
    /// Swap with a block on another journey of the same truck and day.
    SwapSameTruckDay,
    /// Swap two blocks on any two journeys.
    SwapAnywhere,
    /// Exchange the visiting order of two stops on one journey.
    SwapVisitOrder,
    /// Swap blocks between journeys of two different trucks on one day.
    SwapBetweenTrucks,
}

impl MoveKind {
    pub const ALL: [MoveKind; 7] = [
        MoveKind::RelocateAnywhere,
        MoveKind::RelocateSameTruckDay,
        MoveKind::RelocateSameDay,
        MoveKind::SwapSameTruckDay,
        MoveKind::SwapAnywhere,
        MoveKind::SwapVisitOrder,
        MoveKind::SwapBetweenTrucks,
    ];

    /// 1-based move number.
    pub fn number(self) -> usize {
        self as usize + 1
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "move{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    day: usize,
    journey: usize,
    pos: usize,
}

enum Target {
    Existing(usize),
    New(TruckId),
}

/// Candidate neighbour of `plan`, or `None` for a null move.
pub fn propose<R: Rng + ?Sized>(kind: MoveKind, plan: &Plan, instance: &Instance, rng: &mut R) -> Option<Plan> {
    let mut candidate = match kind {
        MoveKind::RelocateAnywhere => relocate_anywhere(plan, instance, rng),
        MoveKind::RelocateSameTruckDay => relocate_same_truck_day(plan, instance, rng),
        MoveKind::RelocateSameDay => relocate_same_day(plan, instance, rng),
        MoveKind::SwapSameTruckDay => swap_same_truck_day(plan, instance, rng),
        MoveKind::SwapAnywhere => swap_anywhere(plan, instance, rng),
        MoveKind::SwapVisitOrder => swap_visit_order(plan, rng),
        MoveKind::SwapBetweenTrucks => swap_between_trucks(plan, instance, rng),
    }?;
    candidate.normalize();
    (candidate != *plan).then_some(candidate)
}

fn random_slot<R: Rng + ?Sized>(plan: &Plan, rng: &mut R) -> Option<Slot> {
    let total = plan.stop_count();
    if total == 0 {
        return None;
    }
    let mut k = rng.gen_range(0..total);
    for (day, d) in plan.days.iter().enumerate() {
        for (journey, j) in d.journeys.iter().enumerate() {
            if k < j.stops.len() {
                return Some(Slot { day, journey, pos: k });
            }
            k -= j.stops.len();
        }
    }
    None
}

fn journeys_of(plan: &Plan, day: usize, truck: TruckId) -> Vec<usize> {
    plan.days
        .get(day)
        .map(|d| {
            d.journeys
                .iter()
                .enumerate()
                .filter(|(_, j)| j.truck == truck)
                .map(|(i, _)| i)
                .collect()
        })
        .unwrap_or_default()
}

/// Days a relocation may target: every planned day and every day up to the
/// latest deadline.
fn day_span(plan: &Plan, instance: &Instance) -> usize {
    plan.days.len().max(instance.last_deadline_day() as usize).max(1)
}

fn pick_journey<R: Rng + ?Sized>(plan: &Plan, day: usize, truck: TruckId, rng: &mut R) -> Target {
    let existing = journeys_of(plan, day, truck);
    let k = rng.gen_range(0..=existing.len());
    match existing.get(k) {
        Some(&j) => Target::Existing(j),
        None => Target::New(truck),
    }
}

fn random_truck<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> TruckId {
    let trucks = instance.trucks();
    trucks[rng.gen_range(0..trucks.len())].id
}

/// Removes a block, returning its customer and per-order tons.
fn take_block(plan: &mut Plan, slot: Slot, instance: &Instance) -> (CustomerId, Vec<(OrderId, f64)>) {
    let journey = &mut plan.days[slot.day].journeys[slot.journey];
    let customer = journey.stops.remove(slot.pos);
    let mut pieces: BTreeMap<OrderId, f64> = BTreeMap::new();
    journey.loads.retain(|a| {
        let mine = instance.order(a.order).is_some_and(|o| o.customer == customer);
        if mine {
            *pieces.entry(a.order).or_default() += a.tons;
        }
        !mine
    });
    (customer, pieces.into_iter().collect())
}

/// Adds a block's feed to a journey. A customer already on the journey
/// keeps its stop; otherwise the stop goes at `pos`, or at the cheapest
/// position when `pos` is `None`.
fn put_block(
    journey: &mut Journey,
    customer: CustomerId,
    pieces: &[(OrderId, f64)],
    pos: Option<usize>,
    instance: &Instance,
) {
    if !journey.stops.contains(&customer) {
        let at = pos.map(|p| p.min(journey.stops.len())).unwrap_or_else(|| {
            (0..=journey.stops.len())
                .min_by(|&a, &b| {
                    let ca = insertion_cost(journey, customer, a, instance).unwrap_or(f64::INFINITY);
                    let cb = insertion_cost(journey, customer, b, instance).unwrap_or(f64::INFINITY);
                    ca.total_cmp(&cb)
                })
                .unwrap_or(0)
        });
        journey.stops.insert(at, customer);
    }
    // Placeholder hopper ids; `reload` reassigns every piece.
    journey.loads.extend(pieces.iter().map(|&(order, tons)| crate::plan::HopperAssignment {
        hopper: crate::model::HopperId(u32::MAX),
        order,
        tons,
    }));
}

/// Repacks a journey's hoppers from scratch. False if its feed no longer
/// fits.
fn reload(journey: &mut Journey, instance: &Instance) -> bool {
    if journey.stops.is_empty() {
        return journey.loads.is_empty();
    }
    let Some(truck) = instance.truck(journey.truck) else {
        return false;
    };
    let mut totals: BTreeMap<OrderId, f64> = BTreeMap::new();
    for a in &journey.loads {
        *totals.entry(a.order).or_default() += a.tons;
    }
    let pieces: Vec<(OrderId, f64)> = totals.into_iter().collect();
    let loading = load_truck(&pieces, truck);
    if loading.leftover > TONS_TOLERANCE * 0.1 {
        return false;
    }
    journey.loads = loading.assignments;
    true
}

fn relocate(plan: &Plan, instance: &Instance, src: Slot, day: usize, target: Target) -> Option<Plan> {
    let mut cand = plan.clone();
    let (customer, pieces) = take_block(&mut cand, src, instance);
    let dst = match target {
        Target::Existing(j) => j,
        Target::New(truck) => {
            let d = cand.day_mut(day);
            d.journeys.push(Journey::new(truck));
            d.journeys.len() - 1
        }
    };
    if day == src.day && dst == src.journey {
        return None;
    }
    put_block(&mut cand.days[day].journeys[dst], customer, &pieces, None, instance);
    let ok = reload(&mut cand.days[src.day].journeys[src.journey], instance)
        && reload(&mut cand.days[day].journeys[dst], instance);
    ok.then_some(cand)
}

fn is_lone_stop(plan: &Plan, slot: Slot) -> bool {
    plan.days[slot.day].journeys[slot.journey].stops.len() == 1
}

fn relocate_anywhere<R: Rng + ?Sized>(plan: &Plan, instance: &Instance, rng: &mut R) -> Option<Plan> {
    let src = random_slot(plan, rng)?;
    let day = rng.gen_range(0..day_span(plan, instance));
    let truck = random_truck(instance, rng);
    let target = pick_journey(plan, day, truck, rng);
    let src_truck = plan.days[src.day].journeys[src.journey].truck;
    if matches!(target, Target::New(_)) && day == src.day && truck == src_truck && is_lone_stop(plan, src) {
        return None;
    }
    relocate(plan, instance, src, day, target)
}

fn relocate_same_truck_day<R: Rng + ?Sized>(plan: &Plan, instance: &Instance, rng: &mut R) -> Option<Plan> {
    let src = random_slot(plan, rng)?;
    let truck = plan.days[src.day].journeys[src.journey].truck;
    let others: Vec<usize> =
        journeys_of(plan, src.day, truck).into_iter().filter(|&j| j != src.journey).collect();
    let k = rng.gen_range(0..=others.len());
    let target = match others.get(k) {
        Some(&j) => Target::Existing(j),
        None if is_lone_stop(plan, src) => return None,
        None => Target::New(truck),
    };
    relocate(plan, instance, src, src.day, target)
}

fn relocate_same_day<R: Rng + ?Sized>(plan: &Plan, instance: &Instance, rng: &mut R) -> Option<Plan> {
    let src = random_slot(plan, rng)?;
    let truck = random_truck(instance, rng);
    let target = pick_journey(plan, src.day, truck, rng);
    let src_truck = plan.days[src.day].journeys[src.journey].truck;
    if matches!(target, Target::New(_)) && truck == src_truck && is_lone_stop(plan, src) {
        return None;
    }
    relocate(plan, instance, src, src.day, target)
}

/// Exchanges two blocks on different journeys, each taking the other's
/// position.
fn swap_blocks(plan: &Plan, instance: &Instance, a: Slot, b: Slot) -> Option<Plan> {
    if a.day == b.day && a.journey == b.journey {
        return None;
    }
    let ca = plan.days[a.day].journeys[a.journey].stops[a.pos];
    let cb = plan.days[b.day].journeys[b.journey].stops[b.pos];
    if ca == cb {
        return None;
    }
    let mut cand = plan.clone();
    let (_, pieces_a) = take_block(&mut cand, a, instance);
    let (_, pieces_b) = take_block(&mut cand, b, instance);
    put_block(&mut cand.days[a.day].journeys[a.journey], cb, &pieces_b, Some(a.pos), instance);
    put_block(&mut cand.days[b.day].journeys[b.journey], ca, &pieces_a, Some(b.pos), instance);
    let ok = reload(&mut cand.days[a.day].journeys[a.journey], instance)
        && reload(&mut cand.days[b.day].journeys[b.journey], instance);
    ok.then_some(cand)
}

fn random_stop_of<R: Rng + ?Sized>(plan: &Plan, day: usize, journey: usize, rng: &mut R) -> Option<Slot> {
    let n = plan.days[day].journeys[journey].stops.len();
    (n > 0).then(|| Slot { day, journey, pos: rng.gen_range(0..n) })
}

fn swap_same_truck_day<R: Rng + ?Sized>(plan: &Plan, instance: &Instance, rng: &mut R) -> Option<Plan> {
    let a = random_slot(plan, rng)?;
    let truck = plan.days[a.day].journeys[a.journey].truck;
    let others: Vec<usize> =
        journeys_of(plan, a.day, truck).into_iter().filter(|&j| j != a.journey).collect();
    if others.is_empty() {
        return None;
    }
    let j = others[rng.gen_range(0..others.len())];
    let b = random_stop_of(plan, a.day, j, rng)?;
    swap_blocks(plan, instance, a, b)
}

fn swap_anywhere<R: Rng + ?Sized>(plan: &Plan, instance: &Instance, rng: &mut R) -> Option<Plan> {
    let a = random_slot(plan, rng)?;
    let b = random_slot(plan, rng)?;
    swap_blocks(plan, instance, a, b)
}

fn swap_visit_order<R: Rng + ?Sized>(plan: &Plan, rng: &mut R) -> Option<Plan> {
    let multi: Vec<(usize, usize)> = plan
        .days
        .iter()
        .enumerate()
        .flat_map(|(d, day)| {
            day.journeys.iter().enumerate().filter(|(_, j)| j.stops.len() >= 2).map(move |(i, _)| (d, i))
        })
        .collect();
    if multi.is_empty() {
        return None;
    }
    let (d, j) = multi[rng.gen_range(0..multi.len())];
    let mut cand = plan.clone();
    let stops = &mut cand.days[d].journeys[j].stops;
    let a = rng.gen_range(0..stops.len());
    let mut b = rng.gen_range(0..stops.len() - 1);
    if b >= a {
        b += 1;
    }
    stops.swap(a, b);
    Some(cand)
}

fn swap_between_trucks<R: Rng + ?Sized>(plan: &Plan, instance: &Instance, rng: &mut R) -> Option<Plan> {
    let days: Vec<(usize, Vec<TruckId>)> = plan
        .days
        .iter()
        .enumerate()
        .filter_map(|(d, day)| {
            let mut trucks: Vec<TruckId> = day.journeys.iter().map(|j| j.truck).collect();
            trucks.sort();
            trucks.dedup();
            (trucks.len() >= 2).then_some((d, trucks))
        })
        .collect();
    if days.is_empty() {
        return None;
    }
    let (day, trucks) = &days[rng.gen_range(0..days.len())];
    let t1 = rng.gen_range(0..trucks.len());
    let mut t2 = rng.gen_range(0..trucks.len() - 1);
    if t2 >= t1 {
        t2 += 1;
    }
    let j1 = journeys_of(plan, *day, trucks[t1]);
    let j2 = journeys_of(plan, *day, trucks[t2]);
    let a = random_stop_of(plan, *day, j1[rng.gen_range(0..j1.len())], rng)?;
    let b = random_stop_of(plan, *day, j2[rng.gen_range(0..j2.len())], rng)?;
    swap_blocks(plan, instance, a, b)
}
