//! Exhaustive solver for desk-sized single-day instances.
//!
//! Every customer is served by exactly one journey. The search enumerates
//! all partitions of the customers into journeys, every visiting order of
//! each journey, and every assignment of journeys to trucks, keeping the
//! cheapest plan that respects hopper packing, load limits, access and the
//! trucks' daily budgets. Hopper packability is decided by complete search,
//! not by the greedy loader.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feasibility::{BUDGET_TOLERANCE, TONS_TOLERANCE};
use crate::model::{Instance, Node, OrderId, DEPOT};
use crate::objective::Objective;
use crate::par::Execution;
use crate::plan::{DayPlan, HopperAssignment, Journey, Plan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleLimits {
    pub max_customers: usize,
    pub max_trucks: usize,
    pub single_day_only: bool,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_customers: 7, max_trucks: 3, single_day_only: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// Total kilometres.
    #[default]
    MinDistance,
    /// Full delivery, then the instance's optimized cost.
    Lexicographic,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance has {found} {what}, the exact search accepts at most {limit}")]
    LimitExceeded { what: &'static str, found: usize, limit: usize },
    #[error("order {0} is not urgent; the exact search plans a single day")]
    NotSingleDay(OrderId),
    #[error("the exact search only supports single-day planning")]
    MultiDayUnsupported,
    #[error("no plan serves every customer on day 1")]
    NoFeasiblePlan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub plan: Plan,
    /// Kilometres in distance mode, optimized euros in lexicographic mode.
    pub value: f64,
    pub objective: Objective,
    pub distance_km: f64,
    pub partitions: usize,
}

/// One visiting order of a customer subset.
#[derive(Debug, Clone)]
struct Tour {
    nodes: Vec<Node>,
    km: f64,
    hours: f64,
    value: f64,
}

/// Tours of one subset that a particular truck can run, with its packing.
#[derive(Debug, Clone)]
struct TruckOptions {
    tours: Vec<usize>,
    packing: Vec<(OrderId, Vec<usize>)>,
}

struct Subset {
    tours: Vec<Tour>,
    per_truck: Vec<Option<TruckOptions>>,
    min_value: f64,
}

pub fn solve_exact(instance: &Instance, limits: &OracleLimits, mode: OracleMode) -> Result<OracleSolution, OracleError> {
    solve_exact_with(instance, limits, mode, Execution::default())
}

pub fn solve_exact_with(
    instance: &Instance,
    limits: &OracleLimits,
    mode: OracleMode,
    exec: Execution,
) -> Result<OracleSolution, OracleError> {
    if !limits.single_day_only {
        return Err(OracleError::MultiDayUnsupported);
    }
    let nodes: Vec<Node> = (1..=instance.customers().len())
        .filter(|&n| !instance.orders_at(n).is_empty())
        .collect();
    if nodes.len() > limits.max_customers {
        return Err(OracleError::LimitExceeded {
            what: "customers with orders",
            found: nodes.len(),
            limit: limits.max_customers,
        });
    }
    if instance.trucks().len() > limits.max_trucks {
        return Err(OracleError::LimitExceeded {
            what: "trucks",
            found: instance.trucks().len(),
            limit: limits.max_trucks,
        });
    }
    if let Some(o) = instance.orders().iter().find(|o| !o.is_urgent()) {
        return Err(OracleError::NotSingleDay(o.id));
    }
    if nodes.is_empty() {
        return Ok(OracleSolution {
            plan: Plan::empty(),
            value: 0.0,
            objective: Objective { delivered: 0.0, cost: 0.0 },
            distance_km: 0.0,
            partitions: 1,
        });
    }

    let symmetric = instance.distance_matrix().is_symmetric() && instance.travel_time_matrix().is_symmetric();
    let masks: Vec<usize> = (0..1usize << nodes.len()).collect();
    let subsets: Vec<Subset> = exec.map(&masks, |&mask| build_subset(instance, &nodes, mask, mode, symmetric));

    let partitions = set_partitions(nodes.len());
    let best = exec
        .map(&partitions, |blocks| best_assignment(instance, &subsets, blocks))
        .into_iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|(v, a)| (v, i, a)))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .ok_or(OracleError::NoFeasiblePlan)?;
    let (value, index, assignment) = best;

    let mut journeys: Vec<(usize, usize, Journey)> = Vec::new();
    for (k, (&mask, &(t, tour_idx))) in partitions[index].iter().zip(&assignment).enumerate() {
        let subset = &subsets[mask];
        let opts = subset.per_truck[t].as_ref().expect("assigned truck can run the subset");
        let tour = &subset.tours[tour_idx];
        let truck = &instance.trucks()[t];
        let mut loads = Vec::new();
        for (order, hoppers) in &opts.packing {
            let mut left = instance.order(*order).expect("known order").quantity;
            for &h in hoppers {
                let hopper = &truck.hoppers[h];
                let tons = left.min(hopper.capacity);
                loads.push(HopperAssignment { hopper: hopper.id, order: *order, tons });
                left -= tons;
            }
        }
        loads.sort_by_key(|a| a.hopper);
        let stops = tour.nodes.iter().map(|&n| instance.customer_at(n).id).collect();
        journeys.push((t, k, Journey { truck: truck.id, stops, loads }));
    }
    journeys.sort_by_key(|(t, k, _)| (*t, *k));
    let plan = Plan {
        days: vec![DayPlan { journeys: journeys.into_iter().map(|(_, _, j)| j).collect() }],
    };
    let distance_km = plan.total_distance(instance);
    let delivered = crate::cost::total_delivered(&plan);
    Ok(OracleSolution {
        objective: Objective { delivered, cost: value },
        plan,
        value,
        distance_km,
        partitions: partitions.len(),
    })
}

fn build_subset(instance: &Instance, nodes: &[Node], mask: usize, mode: OracleMode, symmetric: bool) -> Subset {
    let members: Vec<Node> = (0..nodes.len()).filter(|i| mask >> i & 1 == 1).map(|i| nodes[i]).collect();
    let empty = Subset { tours: Vec::new(), per_truck: vec![None; instance.trucks().len()], min_value: f64::INFINITY };
    if members.is_empty() {
        return empty;
    }
    let orders: Vec<(OrderId, f64)> = members
        .iter()
        .flat_map(|&n| instance.orders_at(n).iter().map(|&oi| &instance.orders()[oi]))
        .map(|o| (o.id, o.quantity))
        .collect();
    let load: f64 = orders.iter().map(|o| o.1).sum();
    let params = instance.cost_params();

    let mut tours = Vec::new();
    permutations(&members, &mut |perm| {
        if symmetric && perm.len() >= 2 && perm[0] > perm[perm.len() - 1] {
            return;
        }
        let mut km = 0.0;
        let mut hours = instance.service_time() * perm.len() as f64;
        let mut prev = DEPOT;
        for &n in perm.iter().chain(std::iter::once(&DEPOT)) {
            km += instance.distance(prev, n);
            hours += instance.travel_time(prev, n);
            prev = n;
        }
        let value = match mode {
            OracleMode::MinDistance => km,
            OracleMode::Lexicographic => match instance.objective_mode() {
                crate::model::ObjectiveMode::Distance => km,
                crate::model::ObjectiveMode::Cost => {
                    params.unload_fee * perm.len() as f64 + params.rate_for(km) * km * load
                }
            },
        };
        tours.push(Tour { nodes: perm.to_vec(), km, hours, value });
    });
    // Keep tours not dominated in (value, km, hours).
    tours.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.km.total_cmp(&b.km))
            .then(a.hours.total_cmp(&b.hours))
            .then(a.nodes.cmp(&b.nodes))
    });
    let mut pareto: Vec<Tour> = Vec::new();
    for t in tours {
        if !pareto.iter().any(|p| p.km <= t.km && p.hours <= t.hours) {
            pareto.push(t);
        }
    }

    let mut min_value = f64::INFINITY;
    let per_truck = instance
        .trucks()
        .iter()
        .enumerate()
        .map(|(ti, truck)| {
            if load > truck.max_load + TONS_TOLERANCE || !members.iter().all(|&n| instance.reachable(ti, n)) {
                return None;
            }
            let caps: Vec<f64> = truck.hoppers.iter().map(|h| h.capacity).collect();
            let quantities: Vec<f64> = orders.iter().map(|o| o.1).collect();
            let cover = pack_exact(&quantities, &caps)?;
            let fits: Vec<usize> = pareto
                .iter()
                .enumerate()
                .filter(|(_, t)| {
                    t.km <= truck.max_daily_km + BUDGET_TOLERANCE && t.hours <= truck.max_daily_hours + BUDGET_TOLERANCE
                })
                .map(|(i, _)| i)
                .collect();
            if fits.is_empty() {
                return None;
            }
            min_value = min_value.min(pareto[fits[0]].value);
            Some(TruckOptions {
                tours: fits,
                packing: orders.iter().map(|o| o.0).zip(cover).collect(),
            })
        })
        .collect();
    Subset { tours: pareto, per_truck, min_value }
}

/// Cheapest assignment of the partition's blocks to (truck, tour) pairs.
fn best_assignment(instance: &Instance, subsets: &[Subset], blocks: &[usize]) -> Option<(f64, Vec<(usize, usize)>)> {
    if blocks.iter().any(|&b| subsets[b].min_value.is_infinite()) {
        return None;
    }
    // Suffix sums of per-block lower bounds.
    let mut rest = vec![0.0; blocks.len() + 1];
    for k in (0..blocks.len()).rev() {
        rest[k] = rest[k + 1] + subsets[blocks[k]].min_value;
    }
    let n_trucks = instance.trucks().len();
    let mut state = Search {
        instance,
        subsets,
        blocks,
        rest,
        km: vec![0.0; n_trucks],
        hours: vec![0.0; n_trucks],
        chosen: Vec::with_capacity(blocks.len()),
        best: None,
    };
    state.dfs(0, 0.0);
    state.best
}

struct Search<'a> {
    instance: &'a Instance,
    subsets: &'a [Subset],
    blocks: &'a [usize],
    rest: Vec<f64>,
    km: Vec<f64>,
    hours: Vec<f64>,
    chosen: Vec<(usize, usize)>,
    best: Option<(f64, Vec<(usize, usize)>)>,
}

impl Search<'_> {
    fn dfs(&mut self, k: usize, cost: f64) {
        if let Some((b, _)) = &self.best {
            if cost + self.rest[k] >= *b {
                return;
            }
        }
        if k == self.blocks.len() {
            self.best = Some((cost, self.chosen.clone()));
            return;
        }
        let subset = &self.subsets[self.blocks[k]];
        for (t, truck) in self.instance.trucks().iter().enumerate() {
            let Some(opts) = &subset.per_truck[t] else { continue };
            for &ti in &opts.tours {
                let tour = &subset.tours[ti];
                if self.km[t] + tour.km > truck.max_daily_km + BUDGET_TOLERANCE
                    || self.hours[t] + tour.hours > truck.max_daily_hours + BUDGET_TOLERANCE
                {
                    continue;
                }
                self.km[t] += tour.km;
                self.hours[t] += tour.hours;
                self.chosen.push((t, ti));
                self.dfs(k + 1, cost + tour.value);
                self.chosen.pop();
                self.km[t] -= tour.km;
                self.hours[t] -= tour.hours;
            }
        }
    }
}

/// Decides whether `pieces` fit into `hoppers`, one piece per hopper, a
/// piece possibly spread over several hoppers. Returns the hopper indices
/// used by each piece.
pub fn pack_exact(pieces: &[f64], hoppers: &[f64]) -> Option<Vec<Vec<usize>>> {
    if pieces.len() > hoppers.len() {
        return None;
    }
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&a, &b| pieces[b].total_cmp(&pieces[a]).then(a.cmp(&b)));
    let mut used = vec![false; hoppers.len()];
    let mut cover = vec![Vec::new(); pieces.len()];
    if pack_dfs(pieces, hoppers, &order, 0, &mut used, &mut cover) {
        Some(cover)
    } else {
        None
    }
}

fn pack_dfs(
    pieces: &[f64],
    hoppers: &[f64],
    order: &[usize],
    k: usize,
    used: &mut [bool],
    cover: &mut [Vec<usize>],
) -> bool {
    if k == order.len() {
        return true;
    }
    let free: Vec<usize> = (0..hoppers.len()).filter(|&h| !used[h]).collect();
    let remaining: f64 = order[k..].iter().map(|&p| pieces[p]).sum();
    let room: f64 = free.iter().map(|&h| hoppers[h]).sum();
    if room + TONS_TOLERANCE < remaining || free.len() < order.len() - k {
        return false;
    }
    let piece = pieces[order[k]];
    for bits in 1usize..1 << free.len() {
        let set: Vec<usize> = (0..free.len()).filter(|i| bits >> i & 1 == 1).map(|i| free[i]).collect();
        let total: f64 = set.iter().map(|&h| hoppers[h]).sum();
        if total + TONS_TOLERANCE < piece {
            continue;
        }
        // Only minimal covers: dropping any hopper must leave too little.
        if set.iter().any(|&h| total - hoppers[h] + TONS_TOLERANCE >= piece) {
            continue;
        }
        for &h in &set {
            used[h] = true;
        }
        cover[order[k]] = set.clone();
        if pack_dfs(pieces, hoppers, order, k + 1, used, cover) {
            return true;
        }
        for &h in &set {
            used[h] = false;
        }
    }
    false
}

fn permutations(items: &[Node], visit: &mut dyn FnMut(&[Node])) {
    fn rec(buf: &mut Vec<Node>, k: usize, visit: &mut dyn FnMut(&[Node])) {
        if k == buf.len() {
            visit(buf);
            return;
        }
        for i in k..buf.len() {
            buf.swap(k, i);
            rec(buf, k + 1, visit);
            buf.swap(k, i);
        }
    }
    let mut buf = items.to_vec();
    rec(&mut buf, 0, visit);
}

/// All partitions of `0..n` into blocks, each block a bitmask.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, blocks: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b] |= 1 << i;
            rec(i + 1, n, blocks, out);
            blocks[b] &= !(1 << i);
        }
        blocks.push(1 << i);
        rec(i + 1, n, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

impl OracleSolution {
    /// Customer sets of the journeys, each sorted, for order-free comparison.
    pub fn tour_sets(&self) -> Vec<Vec<u32>> {
        let mut sets: Vec<Vec<u32>> = self
            .plan
            .journeys()
            .map(|(_, j)| {
                let mut s: Vec<u32> = j.stops.iter().map(|c| c.0).collect();
                s.sort();
                s
            })
            .collect();
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)).reverse());
        sets
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::check_feasibility;
    use crate::synth;

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (1..=7).map(|n| set_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 15, 52, 203, 877]);
    }

    #[test]
    fn exact_packing_splits_when_forced() {
        assert_eq!(pack_exact(&[3.3], &[3.0, 3.0]), Some(vec![vec![0, 1]]));
        assert!(pack_exact(&[3.3, 3.0], &[3.0, 3.0]).is_none());
        // Greedy first-fit would put 2.0 in the 2.5 hopper and strand 2.4.
        assert!(pack_exact(&[2.0, 2.4], &[2.5, 2.1]).is_some());
    }

    #[test]
    fn cooperative_example_optimum() {
        let inst = synth::cooperative_example();
        let sol = solve_exact(&inst, &OracleLimits::default(), OracleMode::MinDistance).unwrap();
        assert_eq!(sol.value, 221.0);
        assert_eq!(sol.distance_km, 221.0);
        assert_eq!(sol.tour_sets(), vec![vec![2, 3, 5], vec![1, 4]]);
        assert!(check_feasibility(&sol.plan, &inst).unwrap().is_empty());
    }

    #[test]
    fn limits_refused() {
        let inst = synth::random_instance(&synth::SynthConfig { customers: 9, ..Default::default() }, 1);
        assert!(matches!(
            solve_exact(&inst, &OracleLimits::default(), OracleMode::MinDistance),
            Err(OracleError::LimitExceeded { found: 9, .. })
        ));
        let limits = OracleLimits { single_day_only: false, ..Default::default() };
        assert_eq!(
            solve_exact(&synth::cooperative_example(), &limits, OracleMode::MinDistance),
            Err(OracleError::MultiDayUnsupported)
        );
    }

    #[test]
    fn lone_customer_is_a_round_trip() {
        let mut data = synth::cooperative_example_data();
        data.orders.truncate(1);
        let inst = Instance::new(data).unwrap();
        let sol = solve_exact(&inst, &OracleLimits::default(), OracleMode::MinDistance).unwrap();
        assert_eq!(sol.value, 56.0);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let cfg = synth::SynthConfig { customers: 6, ..Default::default() };
        for seed in 0..4 {
            let inst = synth::random_instance(&cfg, seed);
            let a = solve_exact_with(&inst, &OracleLimits::default(), OracleMode::Lexicographic, Execution::Sequential);
            let b = solve_exact_with(&inst, &OracleLimits::default(), OracleMode::Lexicographic, Execution::Parallel);
            assert_eq!(a, b);
        }
    }
}
