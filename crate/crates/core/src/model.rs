//! Domain types for the feed-distribution routing problem.
//!
//! An [`Instance`] is validated once at construction and is immutable
//! afterwards, so it can be shared freely between worker threads. Distances
//! and travel times are indexed by [`Node`]: index 0 is the depot and
//! customer `i` (in declaration order) lives at index `i + 1`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Identifier of a kind of feed.
    FeedId
);
id_type!(
    /// Identifier of a customer (stockbreeder).
    CustomerId
);
id_type!(
    /// Identifier of an order.
    OrderId
);
id_type!(
    /// Identifier of a truck in the fleet.
    TruckId
);
id_type!(
    /// Identifier of a hopper, unique within its truck.
    HopperId
);

/// Index into the distance and travel-time matrices.
pub type Node = usize;

/// The depot always sits at matrix index 0.
pub const DEPOT: Node = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feed {
    pub id: FeedId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    pub id: CustomerId,
    pub name: String,
    /// Display-only position. Never consulted by the solvers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Order {
    pub id: OrderId,
    pub customer: CustomerId,
    pub feed: FeedId,
    /// Tons ordered.
    pub quantity: f64,
    /// Zero means urgent: the order must be complete on planning day 1.
    pub days_left: u32,
}

impl Order {
    /// Last planning day (1-based) on which this order may still be served.
    pub fn deadline_day(&self) -> u32 {
        self.days_left + 1
    }

    pub fn is_urgent(&self) -> bool {
        self.days_left == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hopper {
    pub id: HopperId,
    /// Tons.
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truck {
    pub id: TruckId,
    pub hoppers: Vec<Hopper>,
    /// Legal weight limit per journey, tons. May be below the hopper volume.
    pub max_load: f64,
    pub max_daily_hours: f64,
    pub max_daily_km: f64,
    /// Customers this truck can physically access; `None` means all of them.
    pub reachable: Option<Vec<CustomerId>>,
}

impl Truck {
    pub fn total_hopper_capacity(&self) -> f64 {
        self.hoppers.iter().map(|h| h.capacity).sum()
    }

    pub fn hopper(&self, id: HopperId) -> Option<&Hopper> {
        self.hoppers.iter().find(|h| h.id == id)
    }
}

/// Per ton-kilometre rate applied to journeys whose total distance is at
/// most `upper_km` (and above the previous band's bound).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBand {
    /// `None` stands for an unbounded final band.
    pub upper_km: Option<f64>,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostParams {
    /// Euros per unloading stop.
    pub unload_fee: f64,
    /// Euros per delivered ton. Reported, never optimized.
    pub per_ton_fixed: f64,
    pub rate_bands: Vec<RateBand>,
    /// Euros charged per ton of undelivered feed when the two-tier objective
    /// is collapsed into a single number. `None` selects the default.
    pub shortfall_penalty: Option<f64>,
}

impl CostParams {
    /// Rate of the band containing `km`. The whole journey is priced at it.
    pub fn rate_for(&self, km: f64) -> f64 {
        self.rate_bands
            .iter()
            .find(|band| band.upper_km.is_none_or(|upper| km <= upper))
            .or(self.rate_bands.last())
            .map(|band| band.rate)
            .unwrap_or(0.0)
    }

    pub fn max_rate(&self) -> f64 {
        self.rate_bands.iter().map(|b| b.rate).fold(0.0, f64::max)
    }
}

/// Secondary criterion ranked after total delivered tons.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    /// Unloading fees plus distance- and load-dependent transport cost.
    #[default]
    Cost,
    /// Total kilometres travelled.
    Distance,
}

/// Square matrix over `{depot} ∪ customers`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, String> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(format!("row {i} has {} entries, expected {n}", row.len()));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    /// Builds a symmetric matrix from upper-triangular rows; row `i` holds
    /// the entries `(i, i)..(i, n-1)`, diagonal included.
    pub fn from_upper_triangle(rows: &[Vec<f64>]) -> Result<Self, String> {
        let n = rows.len();
        let mut data = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n - i {
                return Err(format!(
                    "triangular row {i} has {} entries, expected {}",
                    row.len(),
                    n - i
                ));
            }
            for (k, &v) in row.iter().enumerate() {
                let j = i + k;
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn get(&self, from: Node, to: Node) -> f64 {
        self.data[from * self.n + to]
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Everything needed to build an [`Instance`]. Plain data, validated by
/// [`Instance::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceData {
    pub name: String,
    pub customers: Vec<Customer>,
    pub feeds: Vec<Feed>,
    pub orders: Vec<Order>,
    pub trucks: Vec<Truck>,
    pub distance: Matrix,
    pub travel_time: Matrix,
    /// Hours spent at each unloading stop.
    pub service_time: f64,
    pub cost: CostParams,
    pub objective: ObjectiveMode,
    pub horizon_days: u32,
}

pub const DEFAULT_HORIZON_DAYS: u32 = 365;
pub const DEFAULT_MAX_DAILY_HOURS: f64 = 9.0;

/// A validated, immutable problem instance.
#[derive(Debug, Clone)]
pub struct Instance {
    data: InstanceData,
    customer_node: HashMap<CustomerId, Node>,
    order_index: HashMap<OrderId, usize>,
    truck_index: HashMap<TruckId, usize>,
    /// `reach[t][node]`, depot included as always reachable.
    reach: Vec<Vec<bool>>,
    /// Order indices per node.
    orders_at: Vec<Vec<usize>>,
    shortfall_weight: f64,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
    }
}

impl Instance {
    pub fn new(data: InstanceData) -> Result<Self, ValidationError> {
        let mut customer_node = HashMap::new();
        for (i, c) in data.customers.iter().enumerate() {
            if customer_node.insert(c.id, i + 1).is_some() {
                return Err(ValidationError::duplicate(format!("customers[{i}].id"), c.id));
            }
        }
        let mut feeds = HashMap::new();
        for (i, f) in data.feeds.iter().enumerate() {
            if feeds.insert(f.id, i).is_some() {
                return Err(ValidationError::duplicate(format!("feeds[{i}].id"), f.id));
            }
        }

        let mut order_index = HashMap::new();
        let mut orders_at = vec![Vec::new(); data.customers.len() + 1];
        for (i, o) in data.orders.iter().enumerate() {
            let path = format!("orders[{i}]");
            if order_index.insert(o.id, i).is_some() {
                return Err(ValidationError::duplicate(format!("{path}.id"), o.id));
            }
            if !(o.quantity.is_finite() && o.quantity > 0.0) {
                return Err(ValidationError::NonPositiveQuantity {
                    path: format!("{path}.quantity"),
                    order: o.id,
                    value: o.quantity,
                });
            }
            let Some(&node) = customer_node.get(&o.customer) else {
                return Err(ValidationError::unknown(format!("{path}.customer"), "customer", o.customer));
            };
            if !feeds.contains_key(&o.feed) {
                return Err(ValidationError::unknown(format!("{path}.feed"), "feed", o.feed));
            }
            orders_at[node].push(i);
        }

        let n = data.customers.len() + 1;
        for (label, m) in [("distance", &data.distance), ("travel_time", &data.travel_time)] {
            if m.size() != n {
                return Err(ValidationError::MatrixShape {
                    path: label.to_string(),
                    expected: n,
                    found: m.size(),
                });
            }
            for i in 0..n {
                for j in 0..n {
                    let v = m.get(i, j);
                    let bad = !v.is_finite() || v < 0.0 || (i == j && v != 0.0);
                    if bad {
                        return Err(ValidationError::MatrixEntry {
                            path: format!("{label}[{i}][{j}]"),
                            value: v,
                        });
                    }
                }
            }
        }
        if !(data.service_time.is_finite() && data.service_time >= 0.0) {
            return Err(ValidationError::invalid("service_time", "must be a nonnegative number"));
        }
        if data.horizon_days == 0 {
            return Err(ValidationError::invalid("horizon_days", "must be at least 1"));
        }

        let mut truck_index = HashMap::new();
        let mut reach = Vec::with_capacity(data.trucks.len());
        for (t, truck) in data.trucks.iter().enumerate() {
            let path = format!("trucks[{t}]");
            if truck_index.insert(truck.id, t).is_some() {
                return Err(ValidationError::duplicate(format!("{path}.id"), truck.id));
            }
            if truck.hoppers.is_empty() {
                return Err(ValidationError::invalid(format!("{path}.hoppers"), "a truck needs at least one hopper"));
            }
            let mut seen = Vec::new();
            for (h, hopper) in truck.hoppers.iter().enumerate() {
                if seen.contains(&hopper.id) {
                    return Err(ValidationError::duplicate(format!("{path}.hoppers[{h}].id"), hopper.id));
                }
                seen.push(hopper.id);
                if !(hopper.capacity.is_finite() && hopper.capacity > 0.0) {
                    return Err(ValidationError::invalid(
                        format!("{path}.hoppers[{h}].capacity"),
                        "must be a positive number",
                    ));
                }
            }
            for (field, v) in [
                ("max_load", truck.max_load),
                ("max_daily_hours", truck.max_daily_hours),
                ("max_daily_km", truck.max_daily_km),
            ] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(ValidationError::invalid(format!("{path}.{field}"), "must be a positive number"));
                }
            }
            let mut row = vec![truck.reachable.is_none(); n];
            row[DEPOT] = true;
            if let Some(list) = &truck.reachable {
                for (k, c) in list.iter().enumerate() {
                    let Some(&node) = customer_node.get(c) else {
                        return Err(ValidationError::unknown(format!("{path}.reachable[{k}]"), "customer", c));
                    };
                    row[node] = true;
                }
            }
            reach.push(row);
        }

        validate_cost(&data.cost)?;

        let bound = shortfall_weight_bound(&data);
        let shortfall_weight = match data.cost.shortfall_penalty {
            Some(w) if !(w.is_finite() && w > bound) => {
                return Err(ValidationError::ShortfallPenaltyTooLow { value: w, bound });
            }
            Some(w) => w,
            None => 10.0 * bound.max(1.0),
        };

        Ok(Self {
            data,
            customer_node,
            order_index,
            truck_index,
            reach,
            orders_at,
            shortfall_weight,
        })
    }

    pub fn data(&self) -> &InstanceData {
        &self.data
    }

    pub fn into_data(self) -> InstanceData {
        self.data
    }

    pub fn name(&self) -> &str {
        &self.data.name
    }

    pub fn customers(&self) -> &[Customer] {
        &self.data.customers
    }

    pub fn feeds(&self) -> &[Feed] {
        &self.data.feeds
    }

    pub fn orders(&self) -> &[Order] {
        &self.data.orders
    }

    pub fn trucks(&self) -> &[Truck] {
        &self.data.trucks
    }

    pub fn cost_params(&self) -> &CostParams {
        &self.data.cost
    }

    pub fn objective_mode(&self) -> ObjectiveMode {
        self.data.objective
    }

    pub fn service_time(&self) -> f64 {
        self.data.service_time
    }

    pub fn horizon_days(&self) -> u32 {
        self.data.horizon_days
    }

    pub fn distance_matrix(&self) -> &Matrix {
        &self.data.distance
    }

    pub fn travel_time_matrix(&self) -> &Matrix {
        &self.data.travel_time
    }

    #[inline]
    pub fn distance(&self, from: Node, to: Node) -> f64 {
        self.data.distance.get(from, to)
    }

    #[inline]
    pub fn travel_time(&self, from: Node, to: Node) -> f64 {
        self.data.travel_time.get(from, to)
    }

    pub fn node_of(&self, customer: CustomerId) -> Option<Node> {
        self.customer_node.get(&customer).copied()
    }

    /// Customer at a (non-depot) node.
    pub fn customer_at(&self, node: Node) -> &Customer {
        &self.data.customers[node - 1]
    }

    pub fn order_idx(&self, order: OrderId) -> Option<usize> {
        self.order_index.get(&order).copied()
    }

    pub fn order(&self, order: OrderId) -> Option<&Order> {
        self.order_idx(order).map(|i| &self.data.orders[i])
    }

    pub fn truck_idx(&self, truck: TruckId) -> Option<usize> {
        self.truck_index.get(&truck).copied()
    }

    pub fn truck(&self, truck: TruckId) -> Option<&Truck> {
        self.truck_idx(truck).map(|i| &self.data.trucks[i])
    }

    /// Whether truck (by index) may visit the node.
    #[inline]
    pub fn reachable(&self, truck: usize, node: Node) -> bool {
        self.reach[truck][node]
    }

    /// Indices of the orders placed by the customer at `node`.
    pub fn orders_at(&self, node: Node) -> &[usize] {
        &self.orders_at[node]
    }

    pub fn total_ordered(&self) -> f64 {
        self.data.orders.iter().map(|o| o.quantity).sum()
    }

    /// Latest deadline day (1-based) over all orders, capped by the horizon.
    pub fn last_deadline_day(&self) -> u32 {
        self.data
            .orders
            .iter()
            .map(Order::deadline_day)
            .max()
            .unwrap_or(1)
            .min(self.data.horizon_days)
    }

    /// Weight applied per ton of shortfall when scalarizing an objective.
    pub fn shortfall_weight(&self) -> f64 {
        self.shortfall_weight
    }

    /// Lower bound the shortfall weight must exceed; see [`shortfall_weight_bound`].
    pub fn shortfall_weight_bound(&self) -> f64 {
        shortfall_weight_bound(&self.data)
    }
}

fn validate_cost(cost: &CostParams) -> Result<(), ValidationError> {
    for (field, v) in [("cost.unload_fee", cost.unload_fee), ("cost.per_ton_fixed", cost.per_ton_fixed)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(ValidationError::invalid(field, "must be a nonnegative number"));
        }
    }
    if cost.rate_bands.is_empty() {
        return Err(ValidationError::RateBands("at least one rate band is required".into()));
    }
    let last = cost.rate_bands.len() - 1;
    let mut previous = f64::NEG_INFINITY;
    for (i, band) in cost.rate_bands.iter().enumerate() {
        if !(band.rate.is_finite() && band.rate > 0.0) {
            return Err(ValidationError::RateBands(format!("band {i}: rate must be positive")));
        }
        match band.upper_km {
            None if i != last => {
                return Err(ValidationError::RateBands(format!(
                    "band {i}: only the last band may be unbounded"
                )))
            }
            None => {}
            Some(_) if i == last => {
                return Err(ValidationError::RateBands("the last band must be unbounded".into()))
            }
            Some(upper) => {
                if !(upper.is_finite() && upper > previous && upper >= 0.0) {
                    return Err(ValidationError::RateBands(format!(
                        "band {i}: upper_km must be strictly increasing"
                    )));
                }
                previous = upper;
            }
        }
    }
    Ok(())
}

/// One ton of extra delivery must outweigh the largest secondary-criterion
/// swing a single journey can cause: `unload_fee + max_rate * max_daily_km`
/// in cost mode, `max_daily_km` in distance mode.
pub fn shortfall_weight_bound(data: &InstanceData) -> f64 {
    let max_km = data.trucks.iter().map(|t| t.max_daily_km).fold(0.0, f64::max);
    match data.objective {
        ObjectiveMode::Cost => data.cost.unload_fee + data.cost.max_rate() * max_km,
        ObjectiveMode::Distance => max_km,
    }
}
