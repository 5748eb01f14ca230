//! Construction of an initial plan by cheapest insertion.
//!
//! Journeys are built one at a time. A journey opens with a seed customer
//! and a seed truck, goes depot -> seed -> depot, and then repeatedly takes
//! the unserved customer and position with the smallest added distance
//! until nothing more fits. When no truck can start another journey today
//! the next day begins with every truck empty. Orders too big for the
//! remaining room are split: what fits is loaded, the rest stays pending.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::feasibility::BUDGET_TOLERANCE;
use crate::loading::{load_hoppers, Loading};
use crate::model::{CustomerId, Hopper, Instance, Node, OrderId, TruckId, DEPOT};
use crate::plan::{Journey, Plan};

/// Pending quantities at or below this count as served.
const PENDING_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedStrategy {
    /// Unserved customer farthest from the depot.
    Farthest,
    /// Customer with the most orders still pending.
    #[default]
    MostPendingOrders,
    Random,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruckStrategy {
    /// Truck with the fewest kilometres planned so far.
    LowestMileage,
    /// Truck with the largest total hopper volume.
    HighestCapacity,
    #[default]
    Random,
}

macro_rules! str_enum {
    ($ty:ty { $($variant:ident => $s:literal),* $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $s),* })
            }
        }
        impl std::str::FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($s => Ok(Self::$variant),)*
                    other => Err(format!("unknown strategy `{other}`")),
                }
            }
        }
    };
}

str_enum!(SeedStrategy { Farthest => "farthest", MostPendingOrders => "most_pending_orders", Random => "random" });
str_enum!(TruckStrategy { LowestMileage => "lowest_mileage", HighestCapacity => "highest_capacity", Random => "random" });

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InsertionParams {
    pub seed_strategy: SeedStrategy,
    pub truck_strategy: TruckStrategy,
    /// Drives both random strategies.
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnservedOrder {
    pub order: OrderId,
    pub remaining: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub days_used: u32,
    pub journeys: usize,
    /// Orders with feed still pending when construction stopped.
    pub unserved: Vec<UnservedOrder>,
    /// Orders no truck can ever deliver (no access, or the round trip alone
    /// exceeds every truck's daily budget).
    pub unservable: Vec<OrderId>,
    /// Orders that received feed after their deadline day.
    pub late: Vec<OrderId>,
}

impl BuildReport {
    /// Everything delivered, on time.
    pub fn is_complete(&self) -> bool {
        self.unserved.is_empty() && self.late.is_empty()
    }
}

/// Progress notifications from [`build_initial_observed`].
#[derive(Debug, Clone, PartialEq)]
pub enum BuildEvent {
    JourneyOpened { day: u32, truck: TruckId, seed: CustomerId, day_km: f64, day_hours: f64 },
    CustomerInserted { day: u32, truck: TruckId, customer: CustomerId, position: usize, day_km: f64, day_hours: f64 },
    JourneyClosed { day: u32, truck: TruckId, km: f64, hours: f64 },
    DayAdvanced { day: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum InsertionError {
    #[error("customer {0} is already on the journey")]
    AlreadyVisited(CustomerId),
    #[error("position {position} is outside 0..={len}")]
    BadPosition { position: usize, len: usize },
    #[error("unknown customer {0}")]
    UnknownCustomer(CustomerId),
}

/// Added distance from placing `customer` before stop `position`
/// (`position == stops.len()` appends before the return to the depot).
pub fn insertion_cost(
    journey: &Journey,
    customer: CustomerId,
    position: usize,
    instance: &Instance,
) -> Result<f64, InsertionError> {
    if journey.stops.contains(&customer) {
        return Err(InsertionError::AlreadyVisited(customer));
    }
    if position > journey.stops.len() {
        return Err(InsertionError::BadPosition { position, len: journey.stops.len() });
    }
    let node_of = |c: CustomerId| instance.node_of(c).ok_or(InsertionError::UnknownCustomer(c));
    let c = node_of(customer)?;
    let prev = if position == 0 { DEPOT } else { node_of(journey.stops[position - 1])? };
    let next = if position == journey.stops.len() { DEPOT } else { node_of(journey.stops[position])? };
    Ok(added(instance, Instance::distance, prev, c, next))
}

#[inline]
fn added(instance: &Instance, leg: impl Fn(&Instance, Node, Node) -> f64, prev: Node, c: Node, next: Node) -> f64 {
    leg(instance, prev, c) + leg(instance, c, next) - leg(instance, prev, next)
}

/// What the seed strategies look at for one customer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedCandidate {
    pub customer: CustomerId,
    pub depot_km: f64,
    pub pending_orders: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruckCandidate {
    pub truck: TruckId,
    pub mileage: f64,
    pub capacity: f64,
}

/// Picks a seed customer. Ties go to the smallest id; `None` only for an
/// empty candidate list.
pub fn pick_seed_customer<R: Rng + ?Sized>(
    candidates: &[SeedCandidate],
    strategy: SeedStrategy,
    rng: &mut R,
) -> Option<CustomerId> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by_key(|c| c.customer);
    let chosen = match strategy {
        SeedStrategy::Farthest => sorted
            .iter()
            .fold(None::<&SeedCandidate>, |best, c| match best {
                Some(b) if b.depot_km >= c.depot_km => Some(b),
                _ => Some(c),
            }),
        SeedStrategy::MostPendingOrders => sorted
            .iter()
            .fold(None::<&SeedCandidate>, |best, c| match best {
                Some(b) if b.pending_orders >= c.pending_orders => Some(b),
                _ => Some(c),
            }),
        SeedStrategy::Random => {
            if sorted.is_empty() {
                None
            } else {
                Some(&sorted[rng.gen_range(0..sorted.len())])
            }
        }
    };
    chosen.map(|c| c.customer)
}

pub fn pick_truck<R: Rng + ?Sized>(
    candidates: &[TruckCandidate],
    strategy: TruckStrategy,
    rng: &mut R,
) -> Option<TruckId> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by_key(|c| c.truck);
    let chosen = match strategy {
        TruckStrategy::LowestMileage => sorted
            .iter()
            .fold(None::<&TruckCandidate>, |best, c| match best {
                Some(b) if b.mileage <= c.mileage => Some(b),
                _ => Some(c),
            }),
        TruckStrategy::HighestCapacity => sorted
            .iter()
            .fold(None::<&TruckCandidate>, |best, c| match best {
                Some(b) if b.capacity >= c.capacity => Some(b),
                _ => Some(c),
            }),
        TruckStrategy::Random => {
            if sorted.is_empty() {
                None
            } else {
                Some(&sorted[rng.gen_range(0..sorted.len())])
            }
        }
    };
    chosen.map(|c| c.truck)
}

pub fn build_initial(instance: &Instance, params: &InsertionParams) -> (Plan, BuildReport) {
    build_initial_observed(instance, params, &mut |_| {})
}

/// [`build_initial`] with a callback fired at every construction step.
pub fn build_initial_observed(
    instance: &Instance,
    params: &InsertionParams,
    observer: &mut dyn FnMut(&BuildEvent),
) -> (Plan, BuildReport) {
    Builder::new(instance, params, observer).run()
}

struct Builder<'a, 'o> {
    inst: &'a Instance,
    params: InsertionParams,
    observer: &'o mut dyn FnMut(&BuildEvent),
    rng: ChaCha8Rng,
    pending: Vec<f64>,
    unservable: Vec<bool>,
    late: BTreeSet<OrderId>,
    day: u32,
    day_km: Vec<f64>,
    day_hours: Vec<f64>,
    mileage: Vec<f64>,
    plan: Plan,
}

impl<'a, 'o> Builder<'a, 'o> {
    fn new(inst: &'a Instance, params: &InsertionParams, observer: &'o mut dyn FnMut(&BuildEvent)) -> Self {
        let n_trucks = inst.trucks().len();
        let nodes = inst.customers().len() + 1;
        let mut unservable = vec![false; nodes];
        for (node, flag) in unservable.iter_mut().enumerate().skip(1) {
            *flag = !(0..n_trucks).any(|t| {
                let truck = &inst.trucks()[t];
                let (km, hours) = round_trip(inst, node);
                inst.reachable(t, node)
                    && km <= truck.max_daily_km + BUDGET_TOLERANCE
                    && hours <= truck.max_daily_hours + BUDGET_TOLERANCE
            });
        }
        Self {
            inst,
            params: *params,
            observer,
            rng: ChaCha8Rng::seed_from_u64(params.rng_seed),
            pending: inst.orders().iter().map(|o| o.quantity).collect(),
            unservable,
            late: BTreeSet::new(),
            day: 0,
            day_km: vec![0.0; n_trucks],
            day_hours: vec![0.0; n_trucks],
            mileage: vec![0.0; n_trucks],
            plan: Plan::empty(),
        }
    }

    fn pending_pieces(&self, node: Node) -> Vec<(OrderId, f64)> {
        self.inst
            .orders_at(node)
            .iter()
            .filter(|&&oi| self.pending[oi] > PENDING_EPSILON)
            .map(|&oi| (self.inst.orders()[oi].id, self.pending[oi]))
            .collect()
    }

    fn has_pending(&self, node: Node) -> bool {
        self.inst.orders_at(node).iter().any(|&oi| self.pending[oi] > PENDING_EPSILON)
    }

    /// Earliest deadline among the node's pending orders.
    fn urgency(&self, node: Node) -> u32 {
        self.inst
            .orders_at(node)
            .iter()
            .filter(|&&oi| self.pending[oi] > PENDING_EPSILON)
            .map(|&oi| self.inst.orders()[oi].days_left)
            .min()
            .unwrap_or(u32::MAX)
    }

    fn fits_today(&self, t: usize, extra_km: f64, extra_hours: f64) -> bool {
        let truck = &self.inst.trucks()[t];
        self.day_km[t] + extra_km <= truck.max_daily_km + BUDGET_TOLERANCE
            && self.day_hours[t] + extra_hours <= truck.max_daily_hours + BUDGET_TOLERANCE
    }

    fn can_open(&self, t: usize, node: Node) -> bool {
        let (km, hours) = round_trip(self.inst, node);
        self.inst.reachable(t, node) && self.fits_today(t, km, hours)
    }

    fn run(mut self) -> (Plan, BuildReport) {
        let nodes = self.inst.customers().len() + 1;
        let n_trucks = self.inst.trucks().len();
        loop {
            let open: Vec<Node> = (1..nodes).filter(|&n| !self.unservable[n] && self.has_pending(n)).collect();
            if open.is_empty() {
                break;
            }
            let startable: Vec<Node> =
                open.into_iter().filter(|&n| (0..n_trucks).any(|t| self.can_open(t, n))).collect();
            if startable.is_empty() {
                self.day += 1;
                if self.day >= self.inst.horizon_days() {
                    break;
                }
                self.day_km.iter_mut().for_each(|v| *v = 0.0);
                self.day_hours.iter_mut().for_each(|v| *v = 0.0);
                (self.observer)(&BuildEvent::DayAdvanced { day: self.day + 1 });
                continue;
            }

            let tier = startable.iter().map(|&n| self.urgency(n)).min().unwrap_or(0);
            let seeds: Vec<SeedCandidate> = startable
                .iter()
                .filter(|&&n| self.urgency(n) == tier)
                .map(|&n| SeedCandidate {
                    customer: self.inst.customer_at(n).id,
                    depot_km: self.inst.distance(DEPOT, n),
                    pending_orders: self.pending_pieces(n).len(),
                })
                .collect();
            let seed_id = pick_seed_customer(&seeds, self.params.seed_strategy, &mut self.rng)
                .expect("non-empty seed candidates");
            let seed = self.inst.node_of(seed_id).expect("seed is a known customer");

            let trucks: Vec<TruckCandidate> = (0..n_trucks)
                .filter(|&t| self.can_open(t, seed))
                .map(|t| TruckCandidate {
                    truck: self.inst.trucks()[t].id,
                    mileage: self.mileage[t],
                    capacity: self.inst.trucks()[t].total_hopper_capacity(),
                })
                .collect();
            let truck_id = pick_truck(&trucks, self.params.truck_strategy, &mut self.rng)
                .expect("seed was startable by some truck");
            let t = self.inst.truck_idx(truck_id).expect("known truck");
            self.build_journey(t, seed);
        }
        self.finish()
    }

    fn take(&mut self, loading: &Loading) {
        for a in &loading.assignments {
            let oi = self.inst.order_idx(a.order).expect("loaded order exists");
            self.pending[oi] -= a.tons;
            if self.day + 1 > self.inst.orders()[oi].deadline_day() {
                self.late.insert(a.order);
            }
        }
    }

    fn build_journey(&mut self, t: usize, seed: Node) {
        let inst = self.inst;
        let truck = &inst.trucks()[t];
        let day = self.day + 1;
        let mut journey = Journey::new(truck.id);
        journey.stops.push(inst.customer_at(seed).id);
        let first = load_hoppers(&self.pending_pieces(seed), &truck.hoppers, truck.max_load);
        self.take(&first);
        journey.loads = first.assignments;
        let mut nodes = vec![seed];
        let (mut km, mut hours) = round_trip(inst, seed);
        (self.observer)(&BuildEvent::JourneyOpened {
            day,
            truck: truck.id,
            seed: inst.customer_at(seed).id,
            day_km: self.day_km[t] + km,
            day_hours: self.day_hours[t] + hours,
        });

        let n_nodes = inst.customers().len() + 1;
        loop {
            let free: Vec<Hopper> = truck
                .hoppers
                .iter()
                .filter(|h| !journey.loads.iter().any(|a| a.hopper == h.id))
                .cloned()
                .collect();
            let room = truck.max_load - journey.load();
            if free.is_empty() || room <= PENDING_EPSILON {
                break;
            }

            let mut candidates: Vec<(f64, CustomerId, usize, Node)> = Vec::new();
            for c in 1..n_nodes {
                if self.unservable[c] || !inst.reachable(t, c) || nodes.contains(&c) || !self.has_pending(c) {
                    continue;
                }
                let id = inst.customer_at(c).id;
                for pos in 0..=nodes.len() {
                    let prev = if pos == 0 { DEPOT } else { nodes[pos - 1] };
                    let next = if pos == nodes.len() { DEPOT } else { nodes[pos] };
                    candidates.push((added(inst, Instance::distance, prev, c, next), id, pos, c));
                }
            }
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

            let mut rejected: Vec<Node> = Vec::new();
            let mut inserted = false;
            for &(delta_km, id, pos, c) in &candidates {
                if rejected.contains(&c) {
                    continue;
                }
                let prev = if pos == 0 { DEPOT } else { nodes[pos - 1] };
                let next = if pos == nodes.len() { DEPOT } else { nodes[pos] };
                let delta_hours = added(inst, Instance::travel_time, prev, c, next) + inst.service_time();
                if !self.fits_today(t, km + delta_km, hours + delta_hours) {
                    continue;
                }
                let loading = load_hoppers(&self.pending_pieces(c), &free, room);
                if loading.loaded() <= PENDING_EPSILON {
                    rejected.push(c);
                    continue;
                }
                self.take(&loading);
                journey.loads.extend(loading.assignments);
                journey.loads.sort_by_key(|a| a.hopper);
                journey.stops.insert(pos, id);
                nodes.insert(pos, c);
                km += delta_km;
                hours += delta_hours;
                (self.observer)(&BuildEvent::CustomerInserted {
                    day,
                    truck: truck.id,
                    customer: id,
                    position: pos,
                    day_km: self.day_km[t] + km,
                    day_hours: self.day_hours[t] + hours,
                });
                inserted = true;
                break;
            }
            if !inserted {
                break;
            }
        }

        self.day_km[t] += km;
        self.day_hours[t] += hours;
        self.mileage[t] += km;
        (self.observer)(&BuildEvent::JourneyClosed { day, truck: truck.id, km, hours });
        self.plan.day_mut(self.day as usize).journeys.push(journey);
    }

    fn finish(self) -> (Plan, BuildReport) {
        let orders = self.inst.orders();
        let unserved = orders
            .iter()
            .enumerate()
            .filter(|&(oi, _)| self.pending[oi] > PENDING_EPSILON)
            .map(|(oi, o)| UnservedOrder { order: o.id, remaining: self.pending[oi] })
            .collect();
        let unservable = orders
            .iter()
            .filter(|o| self.inst.node_of(o.customer).is_some_and(|n| self.unservable[n]))
            .map(|o| o.id)
            .collect();
        let mut plan = self.plan;
        plan.normalize();
        let report = BuildReport {
            days_used: plan.days.len() as u32,
            journeys: plan.journey_count(),
            unserved,
            unservable,
            late: self.late.into_iter().collect(),
        };
        (plan, report)
    }
}

/// Kilometres and hours of depot -> node -> depot, service included.
fn round_trip(inst: &Instance, node: Node) -> (f64, f64) {
    (
        inst.distance(DEPOT, node) + inst.distance(node, DEPOT),
        inst.travel_time(DEPOT, node) + inst.travel_time(node, DEPOT) + inst.service_time(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::check_feasibility;
    use crate::model::{Customer, Feed, FeedId, Matrix, Order};
    use crate::synth;

    fn journey(stops: &[u32]) -> Journey {
        Journey {
            truck: TruckId(1),
            stops: stops.iter().map(|&c| CustomerId(c)).collect(),
            loads: Vec::new(),
        }
    }

    #[test]
    fn insertion_cost_after_single_stop() {
        let inst = synth::cooperative_example();
        let cost = insertion_cost(&journey(&[5]), CustomerId(4), 1, &inst).unwrap();
        assert_eq!(cost, 35.0);
    }

    #[test]
    fn insertion_into_empty_journey_is_round_trip() {
        let inst = synth::cooperative_example();
        assert_eq!(insertion_cost(&journey(&[]), CustomerId(2), 0, &inst).unwrap(), 138.0);
    }

    #[test]
    fn insertion_of_visited_customer_rejected() {
        let inst = synth::cooperative_example();
        assert_eq!(
            insertion_cost(&journey(&[5, 3]), CustomerId(3), 0, &inst),
            Err(InsertionError::AlreadyVisited(CustomerId(3)))
        );
        assert!(insertion_cost(&journey(&[5]), CustomerId(3), 2, &inst).is_err());
    }

    #[test]
    fn insertion_next_to_colocated_stop_can_be_negative() {
        let mut data = synth::cooperative_example().into_data();
        // Customer 3 at distance 0 from both customer 2 and the depot.
        let mut rows = data.distance.rows();
        rows[2][3] = 0.0;
        rows[3][2] = 0.0;
        rows[3][0] = 0.0;
        rows[0][3] = 0.0;
        data.distance = Matrix::from_rows(&rows).unwrap();
        let inst = Instance::new(data).unwrap();
        let cost = insertion_cost(&journey(&[2]), CustomerId(3), 1, &inst).unwrap();
        assert_eq!(cost, -69.0);
    }

    #[test]
    fn farthest_seed_in_example() {
        let inst = synth::cooperative_example();
        let cands: Vec<SeedCandidate> = (1..=5)
            .map(|n| SeedCandidate {
                customer: inst.customer_at(n).id,
                depot_km: inst.distance(DEPOT, n),
                pending_orders: 1,
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(pick_seed_customer(&cands, SeedStrategy::Farthest, &mut rng), Some(CustomerId(2)));
    }

    #[test]
    fn pending_order_ties_go_to_smallest_id() {
        let cands = [
            SeedCandidate { customer: CustomerId(2), depot_km: 1.0, pending_orders: 2 },
            SeedCandidate { customer: CustomerId(3), depot_km: 1.0, pending_orders: 1 },
            SeedCandidate { customer: CustomerId(1), depot_km: 1.0, pending_orders: 2 },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            pick_seed_customer(&cands, SeedStrategy::MostPendingOrders, &mut rng),
            Some(CustomerId(1))
        );
    }

    #[test]
    fn single_candidate_always_chosen() {
        let seed = [SeedCandidate { customer: CustomerId(9), depot_km: 3.0, pending_orders: 1 }];
        let truck = [TruckCandidate { truck: TruckId(4), mileage: 10.0, capacity: 2.0 }];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in [SeedStrategy::Farthest, SeedStrategy::MostPendingOrders, SeedStrategy::Random] {
            assert_eq!(pick_seed_customer(&seed, s, &mut rng), Some(CustomerId(9)));
        }
        for s in [TruckStrategy::LowestMileage, TruckStrategy::HighestCapacity, TruckStrategy::Random] {
            assert_eq!(pick_truck(&truck, s, &mut rng), Some(TruckId(4)));
        }
        assert_eq!(pick_truck(&[], TruckStrategy::Random, &mut rng), None);
    }

    #[test]
    fn truck_strategies() {
        let cands = [
            TruckCandidate { truck: TruckId(2), mileage: 50.0, capacity: 17.2 },
            TruckCandidate { truck: TruckId(1), mileage: 80.0, capacity: 16.2 },
            TruckCandidate { truck: TruckId(3), mileage: 50.0, capacity: 17.2 },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(pick_truck(&cands, TruckStrategy::LowestMileage, &mut rng), Some(TruckId(2)));
        assert_eq!(pick_truck(&cands, TruckStrategy::HighestCapacity, &mut rng), Some(TruckId(2)));
    }

    fn one_customer(quantity: f64) -> Instance {
        let mut data = synth::cooperative_example_data();
        data.customers = vec![Customer { id: CustomerId(1), name: "only".into(), coordinates: None }];
        data.feeds = vec![Feed { id: FeedId(1), name: "feed".into() }];
        data.orders =
            vec![Order { id: OrderId(1), customer: CustomerId(1), feed: FeedId(1), quantity, days_left: 0 }];
        data.trucks.truncate(1);
        data.distance = Matrix::from_upper_triangle(&[vec![0.0, 28.0], vec![0.0]]).unwrap();
        data.travel_time = data.distance.scaled(1.0 / 50.0);
        Instance::new(data).unwrap()
    }

    #[test]
    fn lone_order_gets_lone_journey() {
        let inst = one_customer(2.0);
        let (plan, report) = build_initial(&inst, &InsertionParams::default());
        assert!(report.is_complete());
        assert_eq!(plan.journey_count(), 1);
        assert_eq!(plan.days[0].journeys[0].stops, vec![CustomerId(1)]);
        assert_eq!(plan.days[0].journeys[0].load(), 2.0);
    }

    #[test]
    fn oversized_order_is_split_across_journeys() {
        let inst = one_customer(12.0);
        let (plan, report) = build_initial(&inst, &InsertionParams::default());
        assert!(report.is_complete(), "{report:?}");
        assert_eq!(plan.days.len(), 1);
        let loads: Vec<f64> = plan.days[0].journeys.iter().map(Journey::load).collect();
        assert_eq!(loads.len(), 2);
        assert!((loads[0] - 11.6).abs() < 1e-9);
        assert!((loads[1] - 0.4).abs() < 1e-9);
        assert!(check_feasibility(&plan, &inst).unwrap().is_empty());
    }

    #[test]
    fn example_serves_all_urgent_orders_on_day_one() {
        let inst = synth::cooperative_example();
        for rng_seed in 0..5 {
            let params = InsertionParams {
                seed_strategy: SeedStrategy::MostPendingOrders,
                truck_strategy: TruckStrategy::HighestCapacity,
                rng_seed,
            };
            let (plan, report) = build_initial(&inst, &params);
            assert!(report.is_complete());
            assert_eq!(plan.days.len(), 1);
            assert!(check_feasibility(&plan, &inst).unwrap().is_empty());
            assert!(plan.total_distance(&inst) >= 221.0);
        }
    }

    #[test]
    fn unreachable_customer_reported() {
        let mut data = synth::cooperative_example_data();
        for t in &mut data.trucks {
            t.reachable = Some(vec![CustomerId(1), CustomerId(2), CustomerId(3), CustomerId(4)]);
        }
        let inst = Instance::new(data).unwrap();
        let (_, report) = build_initial(&inst, &InsertionParams::default());
        assert_eq!(report.unservable, vec![OrderId(5)]);
        assert_eq!(report.unserved.len(), 1);
        assert!(!report.is_complete());
    }

    #[test]
    fn build_is_deterministic() {
        let inst = synth::random_instance(&synth::SynthConfig::moderate(), 3);
        let params = InsertionParams {
            seed_strategy: SeedStrategy::Random,
            truck_strategy: TruckStrategy::Random,
            rng_seed: 99,
        };
        assert_eq!(build_initial(&inst, &params), build_initial(&inst, &params));
    }
}
