use std::cmp::Ordering;

use hopper_core::annealing::moves::{propose, MoveKind};
use hopper_core::annealing::acceptance_probability;
use hopper_core::cost::evaluate_cost;
use hopper_core::feasibility::{check_feasibility, ViolationKind};
use hopper_core::insertion::{build_initial, InsertionParams, SeedStrategy, TruckStrategy};
use hopper_core::io::{instance_to_json, parse_instance, parse_plan, plan_to_json};
use hopper_core::model::{Instance, ObjectiveMode};
use hopper_core::objective::{compare, scalarize_with, Objective};
use hopper_core::plan::Plan;
use hopper_core::synth::{random_instance, SynthConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, customers: usize, days: u32) -> Instance {
    let cfg = SynthConfig {
        customers,
        max_days_left: days,
        max_orders_per_customer: 2,
        order_tons: (0.5, 5.0),
        max_load: Some(12.0),
        max_daily_km: 250.0,
        max_daily_hours: 6.0,
        unreachable_prob: 0.15,
        ..Default::default()
    };
    random_instance(&cfg, seed)
}

fn params(seed: u64) -> InsertionParams {
    let seeds = [SeedStrategy::Farthest, SeedStrategy::MostPendingOrders, SeedStrategy::Random];
    let trucks = [TruckStrategy::LowestMileage, TruckStrategy::HighestCapacity, TruckStrategy::Random];
    InsertionParams { seed_strategy: seeds[seed as usize % 3], truck_strategy: trucks[seed as usize / 3 % 3], rng_seed: seed }
}

/// Cost recomputed straight from the matrix and the band table.
fn reference_cost(plan: &Plan, inst: &Instance) -> f64 {
    let p = inst.cost_params();
    let mut total = 0.0;
    for day in &plan.days {
        for j in &day.journeys {
            let mut nodes = vec![0];
            for c in &j.stops {
                nodes.push(1 + inst.customers().iter().position(|x| x.id == *c).unwrap());
            }
            nodes.push(0);
            let km: f64 = nodes.windows(2).map(|w| inst.distance_matrix().get(w[0], w[1])).sum();
            let mut rate = p.rate_bands.last().unwrap().rate;
            for b in &p.rate_bands {
                if b.upper_km.is_none() || km <= b.upper_km.unwrap() {
                    rate = b.rate;
                    break;
                }
            }
            let tons: f64 = j.loads.iter().map(|a| a.tons).sum();
            total += p.unload_fee * j.stops.len() as f64 + rate * km * tons;
        }
    }
    total
}

fn perturbed(plan: &Plan, inst: &Instance, seed: u64, steps: usize) -> Plan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plan = plan.clone();
    for i in 0..steps {
        if let Some(next) = propose(MoveKind::ALL[i % 7], &plan, inst, &mut rng) {
            if check_feasibility(&next, inst).unwrap().is_empty() {
                plan = next;
            }
        }
    }
    plan
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn insertion_output_is_feasible(seed in 0u64..10_000, n in 3usize..14, days in 0u32..3) {
        let inst = instance(seed, n, days);
        let (plan, report) = build_initial(&inst, &params(seed));
        let violations = check_feasibility(&plan, &inst).unwrap();
        // Lateness is reported, never hidden.
        let late = violations.iter().filter(|v| v.kind == ViolationKind::LateDelivery).count();
        prop_assert_eq!(late > 0, !report.late.is_empty());
        for v in &violations {
            prop_assert!(matches!(v.kind, ViolationKind::LateDelivery | ViolationKind::DeadlineShortfall), "{}", v);
        }
    }

    #[test]
    fn cost_matches_reference(seed in 0u64..10_000, n in 2usize..12) {
        let inst = instance(seed, n, 2);
        let (plan, _) = build_initial(&inst, &params(seed));
        let plan = perturbed(&plan, &inst, seed, 40);
        let c = evaluate_cost(&plan, &inst);
        let r = reference_cost(&plan, &inst);
        prop_assert!((c.total_optimized - r).abs() <= 1e-9 * r.max(1.0), "{} vs {}", c.total_optimized, r);
        prop_assert!((c.unloading + c.variable_transport - c.total_optimized).abs() < 1e-9);
    }

    #[test]
    fn moves_never_change_delivery(seed in 0u64..10_000, n in 3usize..12) {
        let inst = instance(seed, n, 2);
        let (plan, _) = build_initial(&inst, &params(seed));
        let before: f64 = plan.journeys().map(|(_, j)| j.load()).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        for kind in MoveKind::ALL {
            for _ in 0..5 {
                if let Some(next) = propose(kind, &plan, &inst, &mut rng) {
                    let after: f64 = next.journeys().map(|(_, j)| j.load()).sum();
                    prop_assert!((after - before).abs() < 1e-6, "{kind}: {before} -> {after}");
                    prop_assert!(next.journeys().all(|(_, j)| !j.stops.is_empty()));
                }
            }
        }
    }

    #[test]
    fn compare_is_a_total_order(a in 0u32..20, b in 0u32..20, c in 0u32..20, x in 0.0..500.0f64, y in 0.0..500.0f64, z in 0.0..500.0f64) {
        let o = |d: u32, k: f64| Objective { delivered: f64::from(d) * 0.5, cost: k };
        let (p, q, r) = (o(a, x), o(b, y), o(c, z));
        prop_assert_eq!(compare(&p, &q), compare(&q, &p).reverse());
        prop_assert_eq!(compare(&p, &p), Ordering::Equal);
        if compare(&p, &q) != Ordering::Greater && compare(&q, &r) != Ordering::Greater {
            prop_assert_ne!(compare(&p, &r), Ordering::Greater);
        }
        // More tons always wins.
        if a > b {
            prop_assert_eq!(compare(&p, &q), Ordering::Less);
        }
    }

    #[test]
    fn scalarize_agrees_with_compare(seed in 0u64..10_000, da in 0u32..30, db in 0u32..30, ca in 0.0..1.0f64, cb in 0.0..1.0f64) {
        let inst = instance(seed, 6, 1);
        let w = inst.shortfall_weight();
        let bound = inst.shortfall_weight_bound();
        prop_assert!(w > bound);
        // Whole-ton delivery gaps, cost gaps within one journey's swing.
        let total = 40.0;
        let a = Objective { delivered: f64::from(da), cost: ca * bound };
        let b = Objective { delivered: f64::from(db), cost: cb * bound };
        let sa = scalarize_with(&a, total, w);
        let sb = scalarize_with(&b, total, w);
        match compare(&a, &b) {
            Ordering::Less => prop_assert!(sa < sb),
            Ordering::Greater => prop_assert!(sa > sb),
            Ordering::Equal => prop_assert_eq!(sa, sb),
        }
    }

    #[test]
    fn documents_round_trip(seed in 0u64..10_000, n in 1usize..10, distance in any::<bool>()) {
        let mut cfg = SynthConfig { customers: n, max_days_left: 2, unreachable_prob: 0.2, ..Default::default() };
        if distance {
            cfg.objective = ObjectiveMode::Distance;
        }
        let inst = random_instance(&cfg, seed);
        let text = instance_to_json(inst.data());
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(back.data(), inst.data());
        let (plan, _) = build_initial(&inst, &params(seed));
        let doc = parse_plan(&plan_to_json(&plan, &inst)).unwrap();
        prop_assert_eq!(doc.plan(), plan);
    }
}

/// Worsening moves are taken with probability exp(-delta / T); check the
/// empirical rate stays within three standard deviations.
#[test]
fn metropolis_rate_within_three_sigma() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 200_000;
    for (delta, temp) in [(1.0, 1.0), (5.0, 2.0), (0.1, 3.0), (40.0, 10.0)] {
        let p: f64 = (-delta / temp as f64).exp();
        let accepted = (0..n).filter(|_| rng.gen::<f64>() < acceptance_probability(delta, temp)).count();
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        let dev = (accepted as f64 - n as f64 * p).abs();
        assert!(dev <= 3.0 * sigma, "delta {delta} T {temp}: {accepted} accepted, expected {}", n as f64 * p);
    }
    assert_eq!(acceptance_probability(-3.0, 1.0), 1.0);
}
