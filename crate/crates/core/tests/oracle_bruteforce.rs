//! The exact solver against a naive enumeration written independently of
//! it: every labelling of customers into journeys, every visiting order,
//! every truck choice, each candidate judged by the feasibility checker.

use hopper_core::feasibility::check_feasibility;
use hopper_core::model::{Instance, ObjectiveMode};
use hopper_core::objective::objective_of;
use hopper_core::oracle::{solve_exact, OracleLimits, OracleMode};
use hopper_core::plan::{DayPlan, HopperAssignment, Journey, Plan};
use hopper_core::synth::{random_instance, SynthConfig};

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Restricted growth strings: label[i] <= max(label[..i]) + 1.
fn labellings(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for l in out {
            let top = l.iter().copied().max().map_or(0, |m| m + 1);
            for v in 0..=top {
                let mut l2 = l.clone();
                l2.push(v);
                next.push(l2);
            }
        }
        out = next;
    }
    out
}

fn journey(inst: &Instance, truck: usize, order: &[usize]) -> Journey {
    let t = &inst.trucks()[truck];
    let stops: Vec<_> = order.iter().map(|&c| inst.customers()[c].id).collect();
    let mut loads = Vec::new();
    let mut k = 0;
    for &c in order {
        for &oi in inst.orders_at(c + 1) {
            let o = &inst.orders()[oi];
            // Test instances keep every order below the smallest hopper.
            if let Some(h) = t.hoppers.get(k) {
                loads.push(HopperAssignment { hopper: h.id, order: o.id, tons: o.quantity });
            }
            k += 1;
        }
    }
    Journey { truck: t.id, stops, loads }
}

/// Lowest (km, objective cost) over all feasible single-day plans.
fn brute_force(inst: &Instance) -> (f64, f64) {
    let n = inst.customers().len();
    let nt = inst.trucks().len();
    let mut best_km = f64::INFINITY;
    let mut best_cost = f64::INFINITY;
    for labels in labellings(n) {
        let blocks = labels.iter().max().map_or(0, |m| m + 1);
        let members: Vec<Vec<usize>> =
            (0..blocks).map(|b| (0..n).filter(|&c| labels[c] == b).collect()).collect();
        let perms: Vec<Vec<Vec<usize>>> = members.iter().map(|m| permutations(m)).collect();
        // Mixed-radix counter over (truck, permutation) per block.
        let radix: Vec<usize> = perms.iter().map(|p| p.len() * nt).collect();
        let mut digit = vec![0usize; blocks];
        loop {
            let mut journeys: Vec<(usize, Journey)> = Vec::new();
            for b in 0..blocks {
                let truck = digit[b] % nt;
                let p = &perms[b][digit[b] / nt];
                journeys.push((truck, journey(inst, truck, p)));
            }
            journeys.sort_by_key(|(t, _)| *t);
            let plan = Plan { days: vec![DayPlan { journeys: journeys.into_iter().map(|(_, j)| j).collect() }] };
            if check_feasibility(&plan, inst).unwrap().is_empty() {
                best_km = best_km.min(plan.total_distance(inst));
                best_cost = best_cost.min(objective_of(&plan, inst).cost);
            }
            let mut i = 0;
            while i < blocks {
                digit[i] += 1;
                if digit[i] < radix[i] {
                    break;
                }
                digit[i] = 0;
                i += 1;
            }
            if i == blocks {
                break;
            }
        }
    }
    (best_km, best_cost)
}

fn config(customers: usize, max_daily_km: f64, objective: ObjectiveMode) -> SynthConfig {
    SynthConfig {
        customers,
        trucks: 2,
        order_tons: (0.5, 1.7),
        max_daily_km,
        max_load: Some(6.0),
        objective,
        ..Default::default()
    }
}

#[test]
fn distance_optimum_matches_enumeration() {
    for seed in 0..12 {
        let inst = random_instance(&config(4 + (seed as usize % 2), 140.0, ObjectiveMode::Distance), seed);
        let (km, _) = brute_force(&inst);
        let sol = solve_exact(&inst, &OracleLimits::default(), OracleMode::MinDistance);
        match sol {
            Ok(sol) => {
                assert!((sol.value - km).abs() < 1e-6, "seed {seed}: oracle {} vs brute force {km}", sol.value);
                assert!(check_feasibility(&sol.plan, &inst).unwrap().is_empty());
            }
            Err(e) => assert!(km.is_infinite(), "seed {seed}: oracle failed ({e}) but {km} km exists"),
        }
    }
}

#[test]
fn cost_optimum_matches_enumeration() {
    for seed in 100..110 {
        let inst = random_instance(&config(4, 600.0, ObjectiveMode::Cost), seed);
        let (_, cost) = brute_force(&inst);
        let sol = solve_exact(&inst, &OracleLimits::default(), OracleMode::Lexicographic).unwrap();
        assert!((sol.value - cost).abs() < 1e-6, "seed {seed}: oracle {} vs brute force {cost}", sol.value);
        assert!((objective_of(&sol.plan, &inst).cost - sol.value).abs() < 1e-6);
    }
}

#[test]
fn asymmetric_travel_matches_enumeration() {
    use hopper_core::model::Matrix;
    for seed in 200..206 {
        let mut data = random_instance(&config(4, 600.0, ObjectiveMode::Distance), seed).into_data();
        let n = data.distance.size();
        let d = data.distance.clone();
        data.distance = Matrix::from_fn(n, |i, j| if i < j { d.get(i, j) + 3.0 } else { d.get(i, j) });
        let inst = Instance::new(data).unwrap();
        let (km, _) = brute_force(&inst);
        let sol = solve_exact(&inst, &OracleLimits::default(), OracleMode::MinDistance).unwrap();
        assert!((sol.value - km).abs() < 1e-6, "seed {seed}: oracle {} vs brute force {km}", sol.value);
    }
}
