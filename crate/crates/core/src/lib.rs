//! Kinodynamic poke planning for planar objects.
//!
//! Objects are moved by pokes: short impulses after which the object slides
//! to rest under Coulomb friction. A sampling-based tree search strings pokes
//! together to reach a goal region while avoiding obstacles and respecting
//! the robot's reach. A quasistatic push planner and a pick-and-place check
//! serve as baselines, and [`bench`] runs seeded trials with noisy execution
//! and replanning.
//!
//! ```
//! use pokerrt::planner::{plan, validate_plan, PlannerConfig};
//! use pokerrt::scenarios::builtin_scenario;
//!
//! let scenario = builtin_scenario("S1").unwrap();
//! let config = PlannerConfig { rng_seed: 42, max_iterations: Some(20_000), ..Default::default() };
//! let plan = plan(&scenario, &config).unwrap();
//! assert!(validate_plan(&plan, &scenario));
//! ```

pub mod baselines;
pub mod bench;
pub mod dynamics;
pub mod geometry;
pub mod planner;
pub mod render;
pub mod scenarios;

pub use dynamics::{ObjectBody, PokeAction, SlideOutcome};
pub use geometry::{ConvexPolygon, Pose2, Region, Vec2};
pub use planner::{Plan, PlanFailure, PlannerConfig};
pub use scenarios::Scenario;
