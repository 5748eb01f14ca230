//! Built-in instances: the five-stockbreeder cooperative example and a
//! seeded generator for synthetic test and benchmark instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    CostParams, Customer, CustomerId, Feed, FeedId, Hopper, HopperId, Instance, InstanceData, Matrix,
    ObjectiveMode, Order, OrderId, RateBand, Truck, TruckId, DEFAULT_HORIZON_DAYS, DEFAULT_MAX_DAILY_HOURS,
};
use crate::plan::{DayPlan, HopperAssignment, Journey, Plan};

/// Hopper capacities of the cooperative's smaller truck, tons.
pub const SMALL_TRUCK_HOPPERS: [f64; 5] = [3.0, 3.7, 3.8, 3.7, 3.0];
/// Hopper capacities of the larger truck, tons.
pub const LARGE_TRUCK_HOPPERS: [f64; 5] = [4.0, 3.0, 1.7, 4.5, 3.0];

const EXAMPLE_ORDERS: [f64; 5] = [3.300, 2.951, 3.003, 3.016, 2.496];
const EXAMPLE_DISTANCES: [&[f64]; 6] = [
    &[0.0, 28.0, 69.0, 64.0, 27.0, 17.0],
    &[0.0, 67.0, 62.0, 20.0, 20.0],
    &[0.0, 7.0, 74.0, 58.0],
    &[0.0, 69.0, 53.0],
    &[0.0, 25.0],
    &[0.0],
];

/// Average road speed used to derive travel times where none are given.
pub const DEFAULT_SPEED_KMH: f64 = 50.0;

pub fn default_cost_params() -> CostParams {
    CostParams {
        unload_fee: 6.0,
        per_ton_fixed: 2.0,
        rate_bands: vec![
            RateBand { upper_km: Some(50.0), rate: 0.12 },
            RateBand { upper_km: Some(100.0), rate: 0.10 },
            RateBand { upper_km: None, rate: 0.08 },
        ],
        shortfall_penalty: None,
    }
}

fn hoppers(caps: &[f64]) -> Vec<Hopper> {
    caps.iter()
        .enumerate()
        .map(|(i, &capacity)| Hopper { id: HopperId(i as u32 + 1), capacity })
        .collect()
}

/// Five urgent single-feed orders, two identical five-hopper trucks limited
/// to 11.6 t, distances from the cooperative's survey. The objective is
/// plain distance.
pub fn cooperative_example_data() -> InstanceData {
    let customers = (1..=5)
        .map(|i| Customer { id: CustomerId(i), name: format!("Stockbreeder {i}"), coordinates: None })
        .collect();
    let orders = EXAMPLE_ORDERS
        .iter()
        .enumerate()
        .map(|(i, &quantity)| Order {
            id: OrderId(i as u32 + 1),
            customer: CustomerId(i as u32 + 1),
            feed: FeedId(1),
            quantity,
            days_left: 0,
        })
        .collect();
    let trucks = (1..=2)
        .map(|t| Truck {
            id: TruckId(t),
            hoppers: hoppers(&SMALL_TRUCK_HOPPERS),
            max_load: 11.6,
            max_daily_hours: DEFAULT_MAX_DAILY_HOURS,
            max_daily_km: 400.0,
            reachable: None,
        })
        .collect();
    let rows: Vec<Vec<f64>> = EXAMPLE_DISTANCES.iter().map(|r| r.to_vec()).collect();
    let distance = Matrix::from_upper_triangle(&rows).expect("static triangle");
    let travel_time = distance.scaled(1.0 / DEFAULT_SPEED_KMH);
    InstanceData {
        name: "cooperative-5".into(),
        customers,
        feeds: vec![Feed { id: FeedId(1), name: "Feed 1".into() }],
        orders,
        trucks,
        distance,
        travel_time,
        service_time: 0.0,
        cost: default_cost_params(),
        objective: ObjectiveMode::Distance,
        horizon_days: DEFAULT_HORIZON_DAYS,
    }
}

pub fn cooperative_example() -> Instance {
    Instance::new(cooperative_example_data()).expect("built-in example is valid")
}

/// The split-load plan an interior-point solver reported for the example,
/// loads exactly as printed (221 km in total).
pub fn cooperative_printed_solution() -> Plan {
    let a = |hopper: u32, order: u32, tons: f64| HopperAssignment {
        hopper: HopperId(hopper),
        order: OrderId(order),
        tons,
    };
    Plan {
        days: vec![DayPlan {
            journeys: vec![
                Journey {
                    truck: TruckId(1),
                    stops: vec![CustomerId(5), CustomerId(3), CustomerId(2)],
                    loads: vec![
                        a(1, 2, 1.475499),
                        a(2, 5, 2.496),
                        a(3, 3, 1.5505862),
                        a(4, 3, 1.4524165),
                        a(5, 2, 1.475499),
                    ],
                },
                Journey {
                    truck: TruckId(2),
                    stops: vec![CustomerId(4), CustomerId(1)],
                    loads: vec![a(1, 4, 1.508001), a(3, 1, 3.2999998), a(5, 4, 1.508001)],
                },
            ],
        }],
    }
}

/// Knobs for [`random_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub customers: usize,
    pub trucks: usize,
    /// Customers are scattered uniformly in a disc of this radius around
    /// the depot; road distance is 1.25x the straight line.
    pub radius_km: f64,
    pub order_tons: (f64, f64),
    pub max_orders_per_customer: usize,
    pub feeds: usize,
    pub max_days_left: u32,
    /// `None` sets each truck's limit to its total hopper volume.
    pub max_load: Option<f64>,
    pub max_daily_km: f64,
    pub max_daily_hours: f64,
    /// Chance that a given truck cannot access a given customer.
    pub unreachable_prob: f64,
    pub objective: ObjectiveMode,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            customers: 6,
            trucks: 2,
            radius_km: 30.0,
            order_tons: (0.5, 3.0),
            max_orders_per_customer: 1,
            feeds: 4,
            max_days_left: 0,
            max_load: None,
            max_daily_km: 600.0,
            max_daily_hours: DEFAULT_MAX_DAILY_HOURS * 2.0,
            unreachable_prob: 0.0,
            objective: ObjectiveMode::Cost,
        }
    }
}

impl SynthConfig {
    /// About the size of one day's work for two trucks: seventeen
    /// customers with mixed urgency.
    pub fn moderate() -> Self {
        Self {
            customers: 17,
            trucks: 2,
            radius_km: 35.0,
            order_tons: (1.0, 3.5),
            max_orders_per_customer: 1,
            feeds: 4,
            max_days_left: 3,
            max_load: Some(15.3),
            max_daily_km: 450.0,
            max_daily_hours: DEFAULT_MAX_DAILY_HOURS,
            unreachable_prob: 0.0,
            objective: ObjectiveMode::Cost,
        }
    }
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (v * f).round() / f
}

pub fn random_instance(cfg: &SynthConfig, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![[0.0, 0.0]];
    let mut customers = Vec::with_capacity(cfg.customers);
    for i in 0..cfg.customers {
        let r = cfg.radius_km * rng.gen::<f64>().sqrt();
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        let p = [round_to(r * theta.cos(), 3), round_to(r * theta.sin(), 3)];
        points.push(p);
        customers.push(Customer {
            id: CustomerId(i as u32 + 1),
            name: format!("Customer {}", i + 1),
            coordinates: Some(p),
        });
    }
    let n = points.len();
    let distance = Matrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            round_to(1.25 * (dx * dx + dy * dy).sqrt(), 1)
        }
    });
    let travel_time = distance.scaled(1.0 / DEFAULT_SPEED_KMH);

    let feeds: Vec<Feed> = (1..=cfg.feeds.max(1) as u32)
        .map(|f| Feed { id: FeedId(f), name: format!("Feed {f}") })
        .collect();
    let mut orders = Vec::new();
    for c in &customers {
        let count = rng.gen_range(1..=cfg.max_orders_per_customer.max(1));
        let mut feed_pool: Vec<u32> = (1..=feeds.len() as u32).collect();
        for _ in 0..count.min(feed_pool.len()) {
            let feed = feed_pool.remove(rng.gen_range(0..feed_pool.len()));
            let (lo, hi) = cfg.order_tons;
            orders.push(Order {
                id: OrderId(orders.len() as u32 + 1),
                customer: c.id,
                feed: FeedId(feed),
                quantity: round_to(rng.gen_range(lo..=hi), 3).max(0.001),
                days_left: rng.gen_range(0..=cfg.max_days_left),
            });
        }
    }

    let trucks = (0..cfg.trucks)
        .map(|t| {
            let caps: &[f64] = if t % 2 == 0 { &SMALL_TRUCK_HOPPERS } else { &LARGE_TRUCK_HOPPERS };
            let reachable = (cfg.unreachable_prob > 0.0).then(|| {
                customers
                    .iter()
                    .filter(|_| rng.gen::<f64>() >= cfg.unreachable_prob)
                    .map(|c| c.id)
                    .collect()
            });
            Truck {
                id: TruckId(t as u32 + 1),
                hoppers: hoppers(caps),
                max_load: cfg.max_load.unwrap_or_else(|| caps.iter().sum()),
                max_daily_hours: cfg.max_daily_hours,
                max_daily_km: cfg.max_daily_km,
                reachable,
            }
        })
        .collect();

    Instance::new(InstanceData {
        name: format!("synthetic-{}c-{}t-{seed}", cfg.customers, cfg.trucks),
        customers,
        feeds,
        orders,
        trucks,
        distance,
        travel_time,
        service_time: 0.0,
        cost: default_cost_params(),
        objective: cfg.objective,
        horizon_days: DEFAULT_HORIZON_DAYS,
    })
    .expect("generated instance is valid")
}
