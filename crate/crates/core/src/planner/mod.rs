//! Kinodynamic RRT over object poses.
//!
//! The tree grows by forward-simulating motion primitives from the node
//! nearest to a random sample. An edge is kept only if the acting robot can
//! reach the contact, and every swept pose stays on the support surface and
//! clear of obstacles. The search stops as soon as a node lands in the goal
//! disc or the budget runs out.
//!
//! The same skeleton drives the poke planner and the quasistatic push
//! baseline; they differ only in their [`Primitive`].

pub mod tree;

use std::f64::consts::PI;
use std::fmt::Debug;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{
    contact_frame, forward_poke_perturbed, ObjectBody, PokeAction, SlideOutcome, DEFAULT_V_MAX,
    DEFAULT_V_MIN,
};
use crate::geometry::{wrap_angle, Pose2, Region, Vec2, DEFAULT_W_THETA};
use crate::scenarios::Scenario;

pub use tree::{NodeId, PlanNode, PlanTree, Target};

/// Default planning budget, seconds.
pub const DEFAULT_MAX_TIME: f64 = 240.0;

/// Planning time charged per iteration when an iteration budget replaces
/// the wall clock. Keeps reported times deterministic.
pub const ITERATION_SECONDS: f64 = 1e-4;

/// Tolerance used when re-simulating stored outcomes.
pub const REPLAY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlannerConfig {
    /// Wall-clock budget, seconds. Ignored when `max_iterations` is set.
    pub max_time: f64,
    /// Deterministic budget: number of extend iterations.
    pub max_iterations: Option<u64>,
    pub goal_bias: f64,
    /// Candidate actions simulated per extension.
    pub candidates_per_extend: usize,
    pub w_theta: f64,
    pub rng_seed: u64,
    pub v_min: f64,
    pub v_max: f64,
    /// Longest single push for the quasistatic baseline, meters.
    pub max_push_distance: f64,
    /// When set, the goal also requires the orientation to be within this
    /// many radians of the start orientation.
    pub goal_theta_tolerance: Option<f64>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            max_time: DEFAULT_MAX_TIME,
            max_iterations: None,
            goal_bias: 0.1,
            candidates_per_extend: 10,
            w_theta: DEFAULT_W_THETA,
            rng_seed: 0,
            v_min: DEFAULT_V_MIN,
            v_max: DEFAULT_V_MAX,
            max_push_distance: crate::baselines::DEFAULT_MAX_PUSH_DISTANCE,
            goal_theta_tolerance: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConfigError {
    #[error("max_time must be positive")]
    MaxTime,
    #[error("goal_bias must lie in [0, 1]")]
    GoalBias,
    #[error("candidates_per_extend must be at least 1")]
    Candidates,
    #[error("w_theta must be non-negative")]
    WTheta,
    #[error("speed bounds must satisfy 0 <= v_min <= v_max")]
    SpeedBounds,
    #[error("max_push_distance must be positive")]
    PushDistance,
    #[error("max_iterations must be at least 1")]
    Iterations,
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_time.is_nan() || self.max_time <= 0.0 {
            return Err(ConfigError::MaxTime);
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return Err(ConfigError::GoalBias);
        }
        if self.candidates_per_extend < 1 {
            return Err(ConfigError::Candidates);
        }
        if self.w_theta.is_nan() || self.w_theta < 0.0 {
            return Err(ConfigError::WTheta);
        }
        if !(0.0 <= self.v_min && self.v_min <= self.v_max && self.v_max.is_finite()) {
            return Err(ConfigError::SpeedBounds);
        }
        if !(self.max_push_distance > 0.0 && self.max_push_distance.is_finite()) {
            return Err(ConfigError::PushDistance);
        }
        if self.max_iterations == Some(0) {
            return Err(ConfigError::Iterations);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanFailure {
    #[error("timeout")]
    Timeout,
    #[error("invalid_start")]
    InvalidStart,
}

/// A motion primitive the tree can be grown with.
pub trait Primitive: Copy + Debug + PartialEq + Serialize {
    fn sample<R: Rng + ?Sized>(rng: &mut R, config: &PlannerConfig) -> Self;

    /// Forward simulation with the speed (or length) scaled by
    /// `speed_factor` and the contact direction rotated by `direction_offset`.
    fn perturbed(
        &self,
        body: &ObjectBody,
        state: &Pose2,
        speed_factor: f64,
        direction_offset: f64,
    ) -> SlideOutcome;

    fn simulate(&self, body: &ObjectBody, state: &Pose2) -> SlideOutcome {
        self.perturbed(body, state, 1.0, 0.0)
    }

    /// Whether the robot can hold the contact this primitive needs over
    /// `outcome`.
    fn reachable(&self, body: &ObjectBody, outcome: &SlideOutcome, reach: &Region) -> bool;
}

impl Primitive for PokeAction {
    fn sample<R: Rng + ?Sized>(rng: &mut R, config: &PlannerConfig) -> Self {
        let contact = rng.random_range(0.0..1.0);
        let speed = if config.v_max > config.v_min {
            rng.random_range(config.v_min..=config.v_max)
        } else {
            config.v_min
        };
        PokeAction { contact, speed }
    }

    fn perturbed(
        &self,
        body: &ObjectBody,
        state: &Pose2,
        speed_factor: f64,
        direction_offset: f64,
    ) -> SlideOutcome {
        forward_poke_perturbed(body, state, self, speed_factor, direction_offset)
    }

    /// Only the pre-poke contact needs to be reachable; the object may slide
    /// out of reach afterwards.
    fn reachable(&self, body: &ObjectBody, outcome: &SlideOutcome, reach: &Region) -> bool {
        let start = outcome.swept_samples[0];
        let contact = start.apply(contact_frame(body.shape(), self.contact).point);
        reach.contains(contact)
    }
}

/// Every validity condition for an edge: reachable contact, swept poses on
/// the surface and collision-free.
pub fn edge_valid<A: Primitive>(scenario: &Scenario, action: &A, outcome: &SlideOutcome) -> bool {
    action.reachable(scenario.object(), outcome, &scenario.acting_robot().reachable)
        && outcome.swept_samples.iter().all(|p| scenario.pose_valid(p))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanStep<A> {
    pub action: A,
    pub outcome: SlideOutcome,
}

/// An action sequence from `start` into the goal region.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plan<A> {
    pub start: Pose2,
    pub steps: Vec<PlanStep<A>>,
    pub total_duration: f64,
}

impl<A> Plan<A> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_state(&self) -> Pose2 {
        self.steps.last().map_or(self.start, |s| s.outcome.end_pose)
    }

    /// Start followed by every end pose.
    pub fn states(&self) -> Vec<Pose2> {
        std::iter::once(self.start)
            .chain(self.steps.iter().map(|s| s.outcome.end_pose))
            .collect()
    }
}

fn poses_match(a: &Pose2, b: &Pose2) -> bool {
    (a.x - b.x).abs() <= REPLAY_TOLERANCE
        && (a.y - b.y).abs() <= REPLAY_TOLERANCE
        && wrap_angle(a.theta - b.theta).abs() <= REPLAY_TOLERANCE
}

/// Re-simulates a plan and checks every edge condition and goal containment.
pub fn validate_plan<A: Primitive>(plan: &Plan<A>, scenario: &Scenario) -> bool {
    if !scenario.pose_valid(&plan.start) {
        return false;
    }
    let mut state = plan.start;
    let mut total = 0.0;
    for step in &plan.steps {
        let replay = step.action.simulate(scenario.object(), &state);
        if !poses_match(&replay.end_pose, &step.outcome.end_pose) {
            return false;
        }
        if !edge_valid(scenario, &step.action, &replay) {
            return false;
        }
        total += replay.duration;
        state = replay.end_pose;
    }
    (total - plan.total_duration).abs() <= REPLAY_TOLERANCE && scenario.in_goal(&state)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PlanStats {
    pub iterations: u64,
    pub nodes: usize,
    /// Measured wall-clock seconds.
    pub wall_time: f64,
    /// Seconds charged to the planner: wall-clock time, or
    /// `iterations * ITERATION_SECONDS` under an iteration budget.
    pub planning_time: f64,
}

fn goal_target(scenario: &Scenario, start: &Pose2, config: &PlannerConfig) -> Target {
    let c = scenario.goal().center();
    match config.goal_theta_tolerance {
        Some(_) => Target::Pose(Pose2::new(c.x, c.y, start.theta)),
        None => Target::Point(c),
    }
}

fn random_pose<R: Rng + ?Sized>(rng: &mut R, workspace: &Region) -> Pose2 {
    let (min, max) = match *workspace {
        Region::Rectangle { min, max } => (min, max),
        _ => {
            let c = workspace.center();
            (c, c + Vec2::new(f64::EPSILON, f64::EPSILON))
        }
    };
    Pose2::new(
        rng.random_range(min.x..=max.x),
        rng.random_range(min.y..=max.y),
        rng.random_range(-PI..PI),
    )
}

/// One RRT extension toward `sample`: simulate K candidate actions from the
/// nearest node and keep the valid one ending closest to the sample.
pub fn extend<A: Primitive, R: Rng + ?Sized>(
    tree: &mut PlanTree<A>,
    sample: &Target,
    scenario: &Scenario,
    config: &PlannerConfig,
    rng: &mut R,
) -> Option<NodeId> {
    let near = tree.nearest(sample, config.w_theta);
    let state = tree.node(near).state;
    let candidates: Vec<A> = (0..config.candidates_per_extend)
        .map(|_| A::sample(rng, config))
        .collect();

    let mut best: Option<(f64, A, SlideOutcome)> = None;
    for action in candidates {
        let outcome = action.simulate(scenario.object(), &state);
        if !edge_valid(scenario, &action, &outcome) {
            continue;
        }
        let d = sample.distance(&outcome.end_pose, config.w_theta);
        if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
            best = Some((d, action, outcome));
        }
    }
    best.map(|(_, action, outcome)| tree.add_child(near, action, outcome))
}

/// Single-use search instance. Holds its tree so callers can inspect or
/// render it after [`Planner::plan`] returns.
pub struct Planner<'a, A> {
    scenario: &'a Scenario,
    config: PlannerConfig,
    start: Pose2,
    tree: PlanTree<A>,
    rng: ChaCha8Rng,
    stats: PlanStats,
}

impl<'a, A: Primitive> Planner<'a, A> {
    pub fn new(scenario: &'a Scenario, config: PlannerConfig) -> Self {
        Self::from_start(scenario, *scenario.start(), config)
    }

    /// Plans from `start` instead of the scenario's start pose (replanning).
    pub fn from_start(scenario: &'a Scenario, start: Pose2, config: PlannerConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        Self {
            scenario,
            config,
            start,
            tree: PlanTree::new(start),
            rng,
            stats: PlanStats::default(),
        }
    }

    pub fn tree(&self) -> &PlanTree<A> {
        &self.tree
    }

    pub fn stats(&self) -> PlanStats {
        self.stats
    }

    fn in_goal(&self, pose: &Pose2) -> bool {
        self.scenario.in_goal(pose)
            && self
                .config
                .goal_theta_tolerance
                .is_none_or(|tol| wrap_angle(pose.theta - self.start.theta).abs() <= tol)
    }

    fn extract(&self, id: NodeId) -> Plan<A> {
        let steps = self
            .tree
            .path_to(id)
            .into_iter()
            .skip(1)
            .map(|n| {
                let node = self.tree.node(n);
                PlanStep {
                    action: node.incoming_action.expect("non-root nodes carry an action"),
                    outcome: node.incoming_outcome.clone().expect("non-root nodes carry an outcome"),
                }
            })
            .collect();
        Plan {
            start: self.start,
            steps,
            total_duration: self.tree.node(id).cumulative_duration,
        }
    }

    fn exhausted(&self, clock: &Instant) -> bool {
        match self.config.max_iterations {
            Some(max) => self.stats.iterations >= max,
            None => clock.elapsed().as_secs_f64() >= self.config.max_time,
        }
    }

    pub fn plan(&mut self) -> Result<Plan<A>, PlanFailure> {
        let clock = Instant::now();
        let result = self.search(&clock);
        self.stats.nodes = self.tree.len();
        self.stats.wall_time = clock.elapsed().as_secs_f64();
        self.stats.planning_time = match self.config.max_iterations {
            Some(_) => self.stats.iterations as f64 * ITERATION_SECONDS,
            None => self.stats.wall_time,
        };
        result
    }

    fn search(&mut self, clock: &Instant) -> Result<Plan<A>, PlanFailure> {
        if !self.scenario.pose_valid(&self.start) {
            return Err(PlanFailure::InvalidStart);
        }
        if self.in_goal(&self.start) {
            return Ok(self.extract(0));
        }
        let goal = goal_target(self.scenario, &self.start, &self.config);
        while !self.exhausted(clock) {
            self.stats.iterations += 1;
            let sample = if self.rng.random_bool(self.config.goal_bias) {
                goal
            } else {
                Target::Pose(random_pose(&mut self.rng, self.scenario.workspace()))
            };
            if let Some(id) = extend(&mut self.tree, &sample, self.scenario, &self.config, &mut self.rng) {
                if self.in_goal(&self.tree.node(id).state) {
                    return Ok(self.extract(id));
                }
            }
        }
        Err(PlanFailure::Timeout)
    }
}

/// Plans a poke sequence from the scenario's start.
pub fn plan(scenario: &Scenario, config: &PlannerConfig) -> Result<Plan<PokeAction>, PlanFailure> {
    Planner::<PokeAction>::new(scenario, config.clone()).plan()
}
