//! Comparison methods: a quasistatic push planner and an open-loop
//! pick-and-place feasibility check.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{contact_frame, ObjectBody, SlideOutcome};
use crate::geometry::{Pose2, Region};
use crate::planner::{Plan, PlanFailure, Planner, PlannerConfig, Primitive};
use crate::scenarios::Scenario;

pub const DEFAULT_MAX_PUSH_DISTANCE: f64 = 0.10;
pub const DEFAULT_GRIPPER_WIDTH: f64 = 0.085;

/// Nominal pushing speed used for timing, m/s.
pub const PUSH_SPEED: f64 = 0.05;

/// Time step between swept samples of a push, seconds (5 mm at [`PUSH_SPEED`]).
pub const PUSH_SAMPLE_DT: f64 = 0.1;

/// A straight quasistatic push along the inward normal at the contact.
/// The object moves only while the robot is in contact and never rotates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushAction {
    /// Counter-clockwise perimeter fraction measured from vertex 0.
    pub contact: f64,
    /// Meters.
    pub distance: f64,
}

impl Primitive for PushAction {
    fn sample<R: Rng + ?Sized>(rng: &mut R, config: &PlannerConfig) -> Self {
        let contact = rng.random_range(0.0..1.0);
        // (0, L_max]
        let distance = config.max_push_distance * (1.0 - rng.random_range(0.0..1.0));
        PushAction { contact, distance }
    }

    fn perturbed(
        &self,
        body: &ObjectBody,
        state: &Pose2,
        speed_factor: f64,
        direction_offset: f64,
    ) -> SlideOutcome {
        let frame = contact_frame(body.shape(), self.contact);
        let dir = frame.normal.rotate(direction_offset).rotate(state.theta);
        let distance = self.distance * speed_factor;
        let duration = distance / PUSH_SPEED;
        let origin = state.position();
        let at = |d: f64| {
            let p = origin + dir * d;
            Pose2::new(p.x, p.y, state.theta)
        };
        let end_pose = at(distance);
        let mut swept_samples = vec![*state];
        let mut k = 1u32;
        while f64::from(k) * PUSH_SAMPLE_DT < duration {
            swept_samples.push(at(f64::from(k) * PUSH_SAMPLE_DT * PUSH_SPEED));
            k += 1;
        }
        if duration > 0.0 {
            swept_samples.push(end_pose);
        }
        SlideOutcome {
            end_pose,
            swept_samples,
            duration,
        }
    }

    /// Contact is held for the whole push, so it must stay reachable at
    /// every swept pose.
    fn reachable(&self, body: &ObjectBody, outcome: &SlideOutcome, reach: &Region) -> bool {
        let local = contact_frame(body.shape(), self.contact).point;
        outcome
            .swept_samples
            .iter()
            .all(|p| reach.contains(p.apply(local)))
    }
}

/// Push planner: the same RRT skeleton with quasistatic push edges.
pub fn plan_push(scenario: &Scenario, config: &PlannerConfig) -> Result<Plan<PushAction>, PlanFailure> {
    Planner::<PushAction>::new(scenario, config.clone()).plan()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspSpec {
    /// Widest opening of the parallel gripper, meters.
    pub max_gripper_width: f64,
}

impl Default for GraspSpec {
    fn default() -> Self {
        Self {
            max_gripper_width: DEFAULT_GRIPPER_WIDTH,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PickPlaceFailure {
    #[error("ungraspable")]
    Ungraspable,
    #[error("start_unreachable")]
    StartUnreachable,
    #[error("goal_unreachable")]
    GoalUnreachable,
}

/// Open-loop pick-and-place: a predefined grasp lifts the object over any
/// obstacles. Feasible when the object fits the gripper and a single robot
/// reaches both the start centroid and the goal center.
pub fn check_pick_and_place(scenario: &Scenario, grasp: &GraspSpec) -> Result<(), PickPlaceFailure> {
    if scenario.object().shape().min_width() > grasp.max_gripper_width {
        return Err(PickPlaceFailure::Ungraspable);
    }
    let start = scenario.start().position();
    let goal = scenario.goal().center();
    let mut reaches_start = scenario
        .robots()
        .iter()
        .filter(|r| r.reachable.contains(start))
        .peekable();
    if reaches_start.peek().is_none() {
        return Err(PickPlaceFailure::StartUnreachable);
    }
    if reaches_start.any(|r| r.reachable.contains(goal)) {
        Ok(())
    } else {
        Err(PickPlaceFailure::GoalUnreachable)
    }
}
