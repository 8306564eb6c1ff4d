//! Seeded benchmark trials: plan, execute under action noise, replan on
//! deviation, and aggregate.
//!
//! Execution runs on a simulated clock: each executed action costs its
//! slide (or push) duration plus [`REPOSITION_SECONDS`] for the robot to
//! move to the next contact. Planning time comes from the planner (wall
//! clock, or the iteration clock under an iteration budget).
//!
//! Trial `i` of a benchmark with master seed `m` uses seed
//! `mix_seed(m, i)`, where `mix_seed` is the SplitMix64 finalizer applied to
//! `m + (i + 1) * 0x9E3779B97F4A7C15`. Inside a trial, the initial plan uses
//! `mix_seed(seed, 0)`, replan `k` uses `mix_seed(seed, k)` and the noise
//! stream uses `mix_seed(seed, u64::MAX)`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{check_pick_and_place, GraspSpec, PickPlaceFailure, PushAction};
use crate::dynamics::{PokeAction, SlideOutcome};
use crate::geometry::{se2_distance, Pose2};
use crate::planner::{Plan, PlanFailure, Planner, PlannerConfig, Primitive};
use crate::scenarios::Scenario;

/// Robot repositioning time charged per executed action, seconds.
pub const REPOSITION_SECONDS: f64 = 2.0;

/// Nominal open-loop pick-and-place execution time, seconds.
pub const PICK_PLACE_SECONDS: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerChoice {
    Poke,
    Push,
    PickPlace,
}

impl fmt::Display for PlannerChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlannerChoice::Poke => "poke",
            PlannerChoice::Push => "push",
            PlannerChoice::PickPlace => "pick_place",
        })
    }
}

impl FromStr for PlannerChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "poke" => Ok(PlannerChoice::Poke),
            "push" => Ok(PlannerChoice::Push),
            "pick_place" => Ok(PlannerChoice::PickPlace),
            _ => Err(format!("unknown planner `{s}` (expected poke, push or pick_place)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation of the multiplicative speed error.
    pub sigma_v: f64,
    /// Standard deviation of the strike direction error, radians.
    pub sigma_dir: f64,
    /// SE(2) deviation from the planned pose that triggers a replan, meters.
    pub tracking_tolerance: f64,
    pub max_replans: u32,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_v: 0.05,
            sigma_dir: 0.03,
            tracking_tolerance: 0.03,
            max_replans: 10,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            sigma_v: 0.0,
            sigma_dir: 0.0,
            ..Self::default()
        }
    }

    pub fn is_valid(&self) -> bool {
        self.sigma_v >= 0.0 && self.sigma_dir >= 0.0 && self.tracking_tolerance >= 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    Timeout,
    FellOffSurface,
    MaxReplansExceeded,
    InvalidStart,
}

impl From<PlanFailure> for FailureReason {
    fn from(f: PlanFailure) -> Self {
        match f {
            PlanFailure::Timeout => FailureReason::Timeout,
            PlanFailure::InvalidStart => FailureReason::InvalidStart,
        }
    }
}

impl From<PickPlaceFailure> for FailureReason {
    /// A goal no single robot can reach is a plan that cannot be found; an
    /// object that cannot be grasped or reached cannot be started on.
    fn from(f: PickPlaceFailure) -> Self {
        match f {
            PickPlaceFailure::GoalUnreachable => FailureReason::Timeout,
            PickPlaceFailure::Ungraspable | PickPlaceFailure::StartUnreachable => {
                FailureReason::InvalidStart
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scenario_id: String,
    pub planner: PlannerChoice,
    pub seed: u64,
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
    pub planning_time: f64,
    pub execution_time: f64,
    pub replanning_time: f64,
    /// Always `planning_time + execution_time + replanning_time`.
    pub task_time: f64,
    pub num_pokes: u32,
    pub num_replans: u32,
}

/// SplitMix64-based seed derivation for trial and sub-stream seeds.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// What happened to the object during execution, for rendering.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExecutionTrace {
    /// Every executed swept pose, in order.
    pub poses: Vec<Pose2>,
}

struct Tally {
    planning_time: f64,
    execution_time: f64,
    replanning_time: f64,
    num_pokes: u32,
    num_replans: u32,
}

struct Draw {
    speed: Normal<f64>,
    direction: Normal<f64>,
    rng: ChaCha8Rng,
}

impl Draw {
    fn next(&mut self) -> (f64, f64) {
        let ev = self.speed.sample(&mut self.rng);
        let ed = self.direction.sample(&mut self.rng);
        (1.0 + ev, ed)
    }
}

/// Keeps the executed prefix of a noisy outcome. The object halts at the
/// last swept pose before it would touch an obstacle. Returns the kept
/// samples and whether any of them left the support surface.
fn execute_samples(scenario: &Scenario, outcome: &SlideOutcome) -> (Vec<Pose2>, bool) {
    let mut kept = Vec::with_capacity(outcome.swept_samples.len());
    for p in &outcome.swept_samples {
        if scenario.collides(p) {
            break;
        }
        kept.push(*p);
        if !scenario.on_surface(p) {
            return (kept, true);
        }
    }
    (kept, false)
}

fn execute<A: Primitive>(
    scenario: &Scenario,
    config: &PlannerConfig,
    noise: &NoiseModel,
    seed: u64,
    trace: &mut ExecutionTrace,
) -> (Tally, Result<(), FailureReason>) {
    let mut tally = Tally {
        planning_time: 0.0,
        execution_time: 0.0,
        replanning_time: 0.0,
        num_pokes: 0,
        num_replans: 0,
    };
    let plan_from = |start: Pose2, k: u64| -> (Result<Plan<A>, PlanFailure>, f64) {
        let cfg = PlannerConfig {
            rng_seed: mix_seed(seed, k),
            ..config.clone()
        };
        let mut planner = Planner::<A>::from_start(scenario, start, cfg);
        let result = planner.plan();
        (result, planner.stats().planning_time)
    };
    let mut draw = Draw {
        speed: Normal::new(0.0, noise.sigma_v).expect("non-negative sigma"),
        direction: Normal::new(0.0, noise.sigma_dir).expect("non-negative sigma"),
        rng: ChaCha8Rng::seed_from_u64(mix_seed(seed, u64::MAX)),
    };

    let mut state = *scenario.start();
    trace.poses.push(state);
    let (result, t) = plan_from(state, 0);
    tally.planning_time = t;
    let mut plan = match result {
        Ok(p) => p,
        Err(e) => return (tally, Err(e.into())),
    };
    let mut next = 0;

    loop {
        if scenario.in_goal(&state) {
            return (tally, Ok(()));
        }
        let on_track = if next < plan.steps.len() {
            let step = &plan.steps[next];
            next += 1;
            let (speed_factor, direction_offset) = draw.next();
            let outcome = step
                .action
                .perturbed(scenario.object(), &state, speed_factor, direction_offset);
            tally.num_pokes += 1;
            tally.execution_time += outcome.duration + REPOSITION_SECONDS;
            let (kept, fell) = execute_samples(scenario, &outcome);
            trace.poses.extend_from_slice(&kept[1..]);
            state = *kept.last().expect("the start sample is always kept");
            if fell {
                return (tally, Err(FailureReason::FellOffSurface));
            }
            if scenario.in_goal(&state) {
                return (tally, Ok(()));
            }
            se2_distance(&state, &step.outcome.end_pose, config.w_theta) <= noise.tracking_tolerance
                && next < plan.steps.len()
        } else {
            false
        };
        if on_track {
            continue;
        }
        if tally.num_replans >= noise.max_replans {
            return (tally, Err(FailureReason::MaxReplansExceeded));
        }
        tally.num_replans += 1;
        let (result, t) = plan_from(state, u64::from(tally.num_replans));
        tally.replanning_time += t;
        plan = match result {
            Ok(p) => p,
            Err(e) => return (tally, Err(e.into())),
        };
        next = 0;
    }
}

/// Runs one trial and also returns the executed trace.
pub fn run_trial_traced(
    scenario: &Scenario,
    choice: PlannerChoice,
    config: &PlannerConfig,
    noise: &NoiseModel,
    seed: u64,
) -> (TrialRecord, ExecutionTrace) {
    let mut trace = ExecutionTrace::default();
    let (tally, outcome) = match choice {
        PlannerChoice::Poke => execute::<PokeAction>(scenario, config, noise, seed, &mut trace),
        PlannerChoice::Push => execute::<PushAction>(scenario, config, noise, seed, &mut trace),
        PlannerChoice::PickPlace => {
            trace.poses.push(*scenario.start());
            let result = check_pick_and_place(scenario, &GraspSpec::default());
            let execution_time = if result.is_ok() { PICK_PLACE_SECONDS } else { 0.0 };
            if result.is_ok() {
                let c = scenario.goal().center();
                trace.poses.push(Pose2::new(c.x, c.y, scenario.start().theta));
            }
            (
                Tally {
                    planning_time: 0.0,
                    execution_time,
                    replanning_time: 0.0,
                    num_pokes: 0,
                    num_replans: 0,
                },
                result.map_err(FailureReason::from),
            )
        }
    };
    let record = TrialRecord {
        scenario_id: scenario.id().to_string(),
        planner: choice,
        seed,
        success: outcome.is_ok(),
        failure_reason: outcome.err(),
        planning_time: tally.planning_time,
        execution_time: tally.execution_time,
        replanning_time: tally.replanning_time,
        task_time: tally.planning_time + tally.execution_time + tally.replanning_time,
        num_pokes: tally.num_pokes,
        num_replans: tally.num_replans,
    };
    (record, trace)
}

pub fn run_trial(
    scenario: &Scenario,
    choice: PlannerChoice,
    config: &PlannerConfig,
    noise: &NoiseModel,
    seed: u64,
) -> TrialRecord {
    run_trial_traced(scenario, choice, config, noise, seed).0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCounts {
    pub timeout: usize,
    pub fell_off_surface: usize,
    pub max_replans_exceeded: usize,
    pub invalid_start: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub scenario_id: String,
    pub planner: PlannerChoice,
    pub n_trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Task-time statistics over successful trials; absent without successes.
    pub task_time_mean: Option<f64>,
    pub task_time_std: Option<f64>,
    pub task_time_median: Option<f64>,
    /// Mean initial planning time over all trials.
    pub planning_time_mean: f64,
    pub total_replans: u64,
    pub failures: FailureCounts,
}

/// Aggregates records. The result does not depend on record order.
pub fn summarize(scenario_id: &str, planner: PlannerChoice, records: &[TrialRecord]) -> BenchSummary {
    let n = records.len();
    let mut times: Vec<f64> = records
        .iter()
        .filter(|r| r.success)
        .map(|r| r.task_time)
        .collect();
    times.sort_by(f64::total_cmp);
    let successes = times.len();
    let (mean, std, median) = if times.is_empty() {
        (None, None, None)
    } else {
        let k = times.len() as f64;
        let mean = times.iter().sum::<f64>() / k;
        let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / k;
        let mid = times.len() / 2;
        let median = if times.len() % 2 == 1 {
            times[mid]
        } else {
            0.5 * (times[mid - 1] + times[mid])
        };
        (Some(mean), Some(var.sqrt()), Some(median))
    };
    let mut planning: Vec<f64> = records.iter().map(|r| r.planning_time).collect();
    planning.sort_by(f64::total_cmp);
    let mut failures = FailureCounts::default();
    for r in records {
        match r.failure_reason {
            Some(FailureReason::Timeout) => failures.timeout += 1,
            Some(FailureReason::FellOffSurface) => failures.fell_off_surface += 1,
            Some(FailureReason::MaxReplansExceeded) => failures.max_replans_exceeded += 1,
            Some(FailureReason::InvalidStart) => failures.invalid_start += 1,
            None => {}
        }
    }
    BenchSummary {
        scenario_id: scenario_id.to_string(),
        planner,
        n_trials: n,
        successes,
        success_rate: if n == 0 { 0.0 } else { successes as f64 / n as f64 },
        task_time_mean: mean,
        task_time_std: std,
        task_time_median: median,
        planning_time_mean: if n == 0 {
            0.0
        } else {
            planning.iter().sum::<f64>() / n as f64
        },
        total_replans: records.iter().map(|r| u64::from(r.num_replans)).sum(),
        failures,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Trials spread over the rayon thread pool.
    Parallel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub summary: BenchSummary,
    /// Ordered by trial index regardless of how trials were scheduled.
    pub records: Vec<TrialRecord>,
}

pub const DEFAULT_TRIALS: usize = 250;

pub fn run_benchmark(
    scenario: &Scenario,
    choice: PlannerChoice,
    config: &PlannerConfig,
    noise: &NoiseModel,
    n_trials: usize,
    master_seed: u64,
    execution: Execution,
) -> BenchReport {
    let trial = |i: usize| run_trial(scenario, choice, config, noise, mix_seed(master_seed, i as u64));
    let records: Vec<TrialRecord> = match execution {
        Execution::Sequential => (0..n_trials).map(trial).collect(),
        Execution::Parallel => (0..n_trials).into_par_iter().map(trial).collect(),
    };
    BenchReport {
        summary: summarize(scenario.id(), choice, &records),
        records,
    }
}

/// One JSON object per line.
pub fn records_to_jsonl(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records always serialize"));
        out.push('\n');
    }
    out
}
