//! Simulated annealing over plans.
//!
//! Each iteration draws one of the seven moves by weight, builds the
//! neighbour, and rejects it outright if it breaks any constraint. A feasible
//! neighbour whose scalarized objective is worse by `delta` is accepted with
//! probability `exp(-delta / T)`. The temperature decays geometrically every
//! `steps_per_temp` iterations.

pub mod moves;
pub mod trace;

use std::time::Instant;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::StructuralError;
use crate::feasibility::{check_feasibility, is_feasible, Violation};
use crate::model::Instance;
use crate::objective::{objective_of, scalarize, Objective};
use crate::par::Execution;
use crate::plan::Plan;

pub use moves::{propose, MoveKind};
pub use trace::{Trace, TraceRow};

/// Wall-clock and observer checks happen once per this many iterations.
pub const CHECK_INTERVAL: u64 = 256;

/// Share of the median sampled uphill step accepted at the start.
const CALIBRATION_ACCEPTANCE: f64 = 0.8;
const CALIBRATION_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealParams {
    pub max_iterations: u64,
    pub max_wall_time_secs: f64,
    /// `None` calibrates from sampled moves of the initial plan.
    pub initial_temp: Option<f64>,
    pub cooling_factor: f64,
    /// `None` means `max_iterations / 500`, at least 1.
    pub steps_per_temp: Option<u64>,
    pub rng_seed: u64,
    pub move_weights: [f64; 7],
    /// Record every n-th iteration in the trace (plus every new best).
    /// `None` keeps about ten thousand rows.
    pub trace_stride: Option<u64>,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self {
            max_iterations: 750_000,
            max_wall_time_secs: 300.0,
            initial_temp: None,
            cooling_factor: 0.95,
            steps_per_temp: None,
            rng_seed: 0,
            move_weights: [1.0; 7],
            trace_stride: None,
        }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<(), AnnealError> {
        let bad = |m: &str| Err(AnnealError::InvalidParams(m.to_string()));
        if let Some(t) = self.initial_temp {
            if !(t.is_finite() && t > 0.0) {
                return bad("initial_temp must be positive");
            }
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return bad("cooling_factor must lie in (0, 1)");
        }
        if !(self.max_wall_time_secs > 0.0) {
            return bad("max_wall_time_secs must be positive");
        }
        if self.steps_per_temp == Some(0) {
            return bad("steps_per_temp must be at least 1");
        }
        if self.trace_stride == Some(0) {
            return bad("trace_stride must be at least 1");
        }
        if self.move_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("move weights must be nonnegative");
        }
        if self.move_weights.iter().all(|w| *w == 0.0) {
            return bad("at least one move weight must be positive");
        }
        Ok(())
    }

    pub fn effective_steps_per_temp(&self) -> u64 {
        self.steps_per_temp.unwrap_or((self.max_iterations / 500).max(1))
    }

    fn effective_trace_stride(&self) -> u64 {
        self.trace_stride.unwrap_or((self.max_iterations / 10_000).max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnealError {
    #[error("initial plan is infeasible ({} violations, first: {})", .0.len(), .0[0])]
    InfeasibleInitial(Vec<Violation>),
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error("invalid annealing parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Iterations,
    WallTime,
    Cancelled,
}

/// Snapshot handed to an [`AnnealObserver`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub iteration: u64,
    pub elapsed: f64,
    pub initial: f64,
    pub current: f64,
    pub best: f64,
    pub best_objective: Objective,
    pub temperature: f64,
}

impl Progress {
    pub fn improvement_pct(&self) -> f64 {
        improvement_pct(self.initial, self.best)
    }
}

/// Relative gain of `best` over `initial`, in percent.
pub fn improvement_pct(initial: f64, best: f64) -> f64 {
    if initial == 0.0 {
        0.0
    } else {
        100.0 * (initial - best) / initial
    }
}

pub trait AnnealObserver {
    fn on_progress(&mut self, _progress: &Progress) {}
    fn should_stop(&self) -> bool {
        false
    }
    /// Called with every accepted candidate, right after acceptance.
    fn on_accept(&mut self, _iteration: u64, _plan: &Plan) {}
}

pub struct NoObserver;

impl AnnealObserver for NoObserver {}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome {
    pub best: Plan,
    pub best_objective: Objective,
    pub best_scalar: f64,
    pub initial_objective: Objective,
    pub initial_scalar: f64,
    pub trace: Trace,
    pub iterations: u64,
    pub accepted: u64,
    pub null_moves: u64,
    pub initial_temp: f64,
    pub elapsed_secs: f64,
    pub stop: StopReason,
}

impl AnnealOutcome {
    pub fn improvement_pct(&self) -> f64 {
        improvement_pct(self.initial_scalar, self.best_scalar)
    }
}

/// Probability of accepting a step that changes the scalar by `delta` at
/// temperature `temp`.
pub fn acceptance_probability(delta: f64, temp: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else if temp <= 0.0 {
        0.0
    } else {
        (-delta / temp).exp()
    }
}

pub fn anneal(initial: &Plan, instance: &Instance, params: &AnnealParams) -> Result<AnnealOutcome, AnnealError> {
    anneal_observed(initial, instance, params, &mut NoObserver)
}

/// Starting temperature at which the median uphill step among sampled
/// moves of `plan` is accepted with probability 0.8.
pub fn calibrate_temperature(plan: &Plan, instance: &Instance, params: &AnnealParams) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed ^ 0x9e37_79b9_7f4a_7c15);
    let dist = WeightedIndex::new(params.move_weights).expect("validated weights");
    let base = scalarize(&objective_of(plan, instance), instance);
    let mut deltas: Vec<f64> = (0..CALIBRATION_SAMPLES)
        .filter_map(|_| {
            let kind = MoveKind::ALL[dist.sample(&mut rng)];
            let cand = propose(kind, plan, instance, &mut rng)?;
            if !is_feasible(&cand, instance).ok()? {
                return None;
            }
            let d = (scalarize(&objective_of(&cand, instance), instance) - base).abs();
            (d > 0.0).then_some(d)
        })
        .collect();
    if deltas.is_empty() {
        return if base > 0.0 { base * 0.01 } else { 1.0 };
    }
    deltas.sort_by(f64::total_cmp);
    let median = deltas[deltas.len() / 2];
    -median / CALIBRATION_ACCEPTANCE.ln()
}

pub fn anneal_observed(
    initial: &Plan,
    instance: &Instance,
    params: &AnnealParams,
    observer: &mut dyn AnnealObserver,
) -> Result<AnnealOutcome, AnnealError> {
    params.validate()?;
    let violations = check_feasibility(initial, instance)?;
    if !violations.is_empty() {
        return Err(AnnealError::InfeasibleInitial(violations));
    }

    let started = Instant::now();
    let initial_objective = objective_of(initial, instance);
    let initial_scalar = scalarize(&initial_objective, instance);
    let mut out = AnnealOutcome {
        best: initial.clone(),
        best_objective: initial_objective,
        best_scalar: initial_scalar,
        initial_objective,
        initial_scalar,
        trace: Trace::default(),
        iterations: 0,
        accepted: 0,
        null_moves: 0,
        initial_temp: 0.0,
        elapsed_secs: 0.0,
        stop: StopReason::Iterations,
    };
    if params.max_iterations == 0 {
        return Ok(out);
    }

    let mut temp = params
        .initial_temp
        .unwrap_or_else(|| calibrate_temperature(initial, instance, params));
    out.initial_temp = temp;
    let steps = params.effective_steps_per_temp();
    let stride = params.effective_trace_stride();
    let dist = WeightedIndex::new(params.move_weights).expect("validated weights");
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);

    let mut current = initial.clone();
    let mut current_scalar = initial_scalar;

    for it in 1..=params.max_iterations {
        if it % CHECK_INTERVAL == 0 {
            let elapsed = started.elapsed().as_secs_f64();
            observer.on_progress(&Progress {
                iteration: it,
                elapsed,
                initial: initial_scalar,
                current: current_scalar,
                best: out.best_scalar,
                best_objective: out.best_objective,
                temperature: temp,
            });
            if observer.should_stop() {
                out.stop = StopReason::Cancelled;
                break;
            }
            if elapsed >= params.max_wall_time_secs {
                out.stop = StopReason::WallTime;
                break;
            }
        }
        out.iterations = it;

        let kind = MoveKind::ALL[dist.sample(&mut rng)];
        let candidate = propose(kind, &current, instance, &mut rng)
            .filter(|c| is_feasible(c, instance).unwrap_or(false));
        let mut accepted = false;
        let mut improved = false;
        match candidate {
            None => out.null_moves += 1,
            Some(cand) => {
                let obj = objective_of(&cand, instance);
                let scalar = scalarize(&obj, instance);
                let delta = scalar - current_scalar;
                accepted = delta <= 0.0 || rng.gen::<f64>() < acceptance_probability(delta, temp);
                if accepted {
                    out.accepted += 1;
                    observer.on_accept(it, &cand);
                    if obj.is_better_than(&out.best_objective) && scalar <= out.best_scalar {
                        out.best = cand.clone();
                        out.best_objective = obj;
                        out.best_scalar = scalar;
                        improved = true;
                    }
                    current = cand;
                    current_scalar = scalar;
                }
            }
        }

        if improved || it % stride == 0 || it == params.max_iterations {
            out.trace.rows.push(TraceRow {
                iteration: it,
                elapsed: started.elapsed().as_secs_f64(),
                current: current_scalar,
                best: out.best_scalar,
                temperature: temp,
                kind,
                accepted,
            });
        }
        if it % steps == 0 {
            temp *= params.cooling_factor;
        }
    }

    out.elapsed_secs = started.elapsed().as_secs_f64();
    observer.on_progress(&Progress {
        iteration: out.iterations,
        elapsed: out.elapsed_secs,
        initial: initial_scalar,
        current: current_scalar,
        best: out.best_scalar,
        best_objective: out.best_objective,
        temperature: temp,
    });
    Ok(out)
}

/// Independent annealing runs from the same initial plan, one per seed.
/// Returns the seed and outcome of the lexicographically best run (earliest
/// seed on ties).
pub fn anneal_restarts(
    initial: &Plan,
    instance: &Instance,
    params: &AnnealParams,
    seeds: &[u64],
    exec: Execution,
) -> Result<(u64, AnnealOutcome), AnnealError> {
    params.validate()?;
    if seeds.is_empty() {
        return Err(AnnealError::InvalidParams("at least one restart seed is required".into()));
    }
    let results = exec.map(seeds, |&seed| {
        let p = AnnealParams { rng_seed: seed, ..params.clone() };
        anneal(initial, instance, &p).map(|o| (seed, o))
    });
    let mut best: Option<(u64, AnnealOutcome)> = None;
    for r in results {
        let (seed, o) = r?;
        let better = match &best {
            None => true,
            Some((_, b)) => o.best_objective.is_better_than(&b.best_objective),
        };
        if better {
            best = Some((seed, o));
        }
    }
    Ok(best.expect("non-empty seeds"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::insertion::{build_initial, InsertionParams};
    use crate::synth;

    fn quick(iterations: u64, seed: u64) -> AnnealParams {
        AnnealParams { max_iterations: iterations, rng_seed: seed, ..AnnealParams::default() }
    }

    #[test]
    fn zero_iterations_is_identity() {
        let inst = synth::cooperative_example();
        let (plan, _) = build_initial(&inst, &InsertionParams::default());
        let out = anneal(&plan, &inst, &quick(0, 1)).unwrap();
        assert_eq!(out.best, plan);
        assert!(out.trace.is_empty());
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn infeasible_start_rejected() {
        let inst = synth::cooperative_example();
        let err = anneal(&Plan::empty(), &inst, &quick(10, 1)).unwrap_err();
        assert!(matches!(err, AnnealError::InfeasibleInitial(v) if v.len() == 5));
    }

    #[test]
    fn bad_params_rejected() {
        let inst = synth::cooperative_example();
        let plan = synth::cooperative_printed_solution();
        for p in [
            AnnealParams { cooling_factor: 1.0, ..quick(10, 0) },
            AnnealParams { initial_temp: Some(0.0), ..quick(10, 0) },
            AnnealParams { move_weights: [0.0; 7], ..quick(10, 0) },
        ] {
            assert!(matches!(anneal(&plan, &inst, &p), Err(AnnealError::InvalidParams(_))));
        }
    }

    #[test]
    fn acceptance_limits() {
        assert_eq!(acceptance_probability(-1.0, 5.0), 1.0);
        assert_eq!(acceptance_probability(0.0, 0.0), 1.0);
        assert!(acceptance_probability(1.0, 1e-300) < 1e-300);
        assert_eq!(acceptance_probability(1.0, 0.0), 0.0);
        assert!((acceptance_probability(2.0, 4.0) - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn best_never_worsens_and_run_is_reproducible() {
        let inst = synth::random_instance(&synth::SynthConfig::moderate(), 5);
        let (plan, _) = build_initial(&inst, &InsertionParams::default());
        let p = AnnealParams { trace_stride: Some(1), ..quick(3000, 42) };
        let a = anneal(&plan, &inst, &p).unwrap();
        let b = anneal(&plan, &inst, &p).unwrap();
        assert_eq!(a.best, b.best);
        let strip = |t: &Trace| t.rows.iter().map(|r| (r.iteration, r.current, r.best, r.kind, r.accepted)).collect::<Vec<_>>();
        assert_eq!(strip(&a.trace), strip(&b.trace));
        assert_eq!(a.trace.len(), 3000);
        for w in a.trace.rows.windows(2) {
            assert!(w[1].best <= w[0].best);
        }
        assert!(a.best_scalar <= a.initial_scalar);
        assert!(crate::feasibility::check_feasibility(&a.best, &inst).unwrap().is_empty());
    }

    struct StopAfter(u64, u64);
    impl AnnealObserver for StopAfter {
        fn on_progress(&mut self, p: &Progress) {
            self.1 = p.iteration;
        }
        fn should_stop(&self) -> bool {
            self.1 >= self.0
        }
    }

    #[test]
    fn observer_can_cancel() {
        let inst = synth::cooperative_example();
        let (plan, _) = build_initial(&inst, &InsertionParams::default());
        let mut obs = StopAfter(512, 0);
        let out = anneal_observed(&plan, &inst, &quick(100_000, 3), &mut obs).unwrap();
        assert_eq!(out.stop, StopReason::Cancelled);
        assert_eq!(out.iterations, 511);
    }

    #[test]
    fn restarts_pick_best_seed() {
        let inst = synth::random_instance(&synth::SynthConfig::moderate(), 2);
        let (plan, _) = build_initial(&inst, &InsertionParams::default());
        let p = quick(2000, 0);
        let seeds = [1, 2, 3, 4];
        let (seed, best) = anneal_restarts(&plan, &inst, &p, &seeds, Execution::Parallel).unwrap();
        let (seed_seq, best_seq) = anneal_restarts(&plan, &inst, &p, &seeds, Execution::Sequential).unwrap();
        assert_eq!(seed, seed_seq);
        assert_eq!(best.best, best_seq.best);
        for s in seeds {
            let o = anneal(&plan, &inst, &AnnealParams { rng_seed: s, ..p.clone() }).unwrap();
            assert!(!o.best_objective.is_better_than(&best.best_objective));
        }
    }
}
