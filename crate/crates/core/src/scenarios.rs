//! Benchmark scenarios and the scenario document format.
//!
//! A scenario document is JSON with these top-level keys (lengths in meters,
//! angles in radians, mass in kilograms):
//!
//! ```text
//! id               string
//! workspace        {min: [x, y], max: [x, y]}
//! support_surface  {min: [x, y], max: [x, y]}
//! obstacles        [{vertices: [[x, y], ...], pose: {x, y, theta}}, ...]
//! object           {vertices: [[x, y], ...], mass, mu}
//! start            {x, y, theta}
//! goal             {center: [x, y], radius}
//! robots           [{name, reachable: {variant: "disc" | "annulus" | "rectangle", ...}}, ...]
//! ```
//!
//! Polygon vertices are counter-clockwise and centered on the polygon's
//! centroid. Reachable regions use `center` + `radius` (disc), `center` +
//! `r_min` + `r_max` (annulus) or `min` + `max` (rectangle). Unknown keys are
//! rejected. The first robot listed is the one that manipulates the object.

use std::fmt;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::dynamics::{BodyError, ObjectBody};
use crate::geometry::{
    polygons_intersect, transform_polygon, ConvexPolygon, PolygonError, Pose2, Region,
    RegionError, Vec2,
};

/// Identifiers of the built-in scenarios, in order.
pub const BUILTIN_IDS: [&str; 6] = ["S1", "S2", "S3", "S4", "S5", "S6"];

const BUILTIN_DOCS: [&str; 6] = [
    include_str!("../scenarios/S1.json"),
    include_str!("../scenarios/S2.json"),
    include_str!("../scenarios/S3.json"),
    include_str!("../scenarios/S4.json"),
    include_str!("../scenarios/S5.json"),
    include_str!("../scenarios/S6.json"),
];

/// Short description of each built-in scenario.
pub fn builtin_description(id: &str) -> Option<&'static str> {
    Some(match id {
        "S1" => "no obstacles",
        "S2" => "2 obstacles",
        "S3" => "4 obstacles",
        "S4" => "wide object",
        "S5" => "tunnel",
        "S6" => "non-overlapping shared workspace",
        _ => return None,
    })
}

/// Violated scenario invariant.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum InvariantKind {
    #[error("invalid_polygon ({0})")]
    InvalidPolygon(PolygonError),
    #[error("invalid_region ({0})")]
    InvalidRegion(RegionError),
    #[error("invalid_body ({0})")]
    InvalidBody(BodyError),
    #[error("non_finite")]
    NonFinite,
    #[error("empty_id")]
    EmptyId,
    #[error("no_robots")]
    NoRobots,
    #[error("obstacle_outside_workspace")]
    ObstacleOutsideWorkspace,
    #[error("start_off_surface")]
    StartOffSurface,
    #[error("start_in_collision")]
    StartInCollision,
    #[error("goal_outside_workspace")]
    GoalOutsideWorkspace,
}

impl InvariantKind {
    /// Stable machine name of the violation class.
    pub fn name(&self) -> &'static str {
        match self {
            InvariantKind::InvalidPolygon(_) => "invalid_polygon",
            InvariantKind::InvalidRegion(_) => "invalid_region",
            InvariantKind::InvalidBody(_) => "invalid_body",
            InvariantKind::NonFinite => "non_finite",
            InvariantKind::EmptyId => "empty_id",
            InvariantKind::NoRobots => "no_robots",
            InvariantKind::ObstacleOutsideWorkspace => "obstacle_outside_workspace",
            InvariantKind::StartOffSurface => "start_off_surface",
            InvariantKind::StartInCollision => "start_in_collision",
            InvariantKind::GoalOutsideWorkspace => "goal_outside_workspace",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ScenarioError {
    #[error("unknown_scenario: {0}")]
    UnknownScenario(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing_field: {0}")]
    MissingField(String),
    #[error("unknown_field: {0}")]
    UnknownField(String),
    #[error("wrong_type: {path} (expected {expected})")]
    WrongType { path: String, expected: &'static str },
    #[error("invariant: {kind} at {path}")]
    Invariant { path: String, kind: InvariantKind },
}

fn invariant(path: impl Into<String>, kind: InvariantKind) -> ScenarioError {
    ScenarioError::Invariant {
        path: path.into(),
        kind,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Obstacle {
    shape: ConvexPolygon,
    pose: Pose2,
    world: Vec<Vec2>,
}

impl Obstacle {
    pub fn new(shape: ConvexPolygon, pose: Pose2) -> Self {
        let world = transform_polygon(&shape, &pose);
        Self { shape, pose, world }
    }

    pub fn shape(&self) -> &ConvexPolygon {
        &self.shape
    }

    pub fn pose(&self) -> &Pose2 {
        &self.pose
    }

    /// World-frame vertices.
    pub fn world(&self) -> &[Vec2] {
        &self.world
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Robot {
    pub name: String,
    pub reachable: Region,
}

/// A planar manipulation task: table, obstacles, object, start, goal and robots.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    id: String,
    workspace: Region,
    support_surface: Region,
    obstacles: Vec<Obstacle>,
    object: ObjectBody,
    start: Pose2,
    goal: Region,
    robots: Vec<Robot>,
}

impl Scenario {
    /// Builds a scenario and checks every invariant. Region arguments must be
    /// rectangles (workspace, support surface) and a disc (goal).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        workspace: Region,
        support_surface: Region,
        obstacles: Vec<Obstacle>,
        object: ObjectBody,
        start: Pose2,
        goal: Region,
        robots: Vec<Robot>,
    ) -> Result<Self, ScenarioError> {
        let scenario = Self {
            id: id.into(),
            workspace,
            support_surface,
            obstacles,
            object,
            start,
            goal,
            robots,
        };
        scenario.check()?;
        Ok(scenario)
    }

    fn check(&self) -> Result<(), ScenarioError> {
        if self.id.is_empty() {
            return Err(invariant("id", InvariantKind::EmptyId));
        }
        for (name, region) in [
            ("workspace", &self.workspace),
            ("support_surface", &self.support_surface),
        ] {
            if !matches!(region, Region::Rectangle { .. }) {
                return Err(ScenarioError::WrongType {
                    path: name.into(),
                    expected: "rectangle",
                });
            }
            region
                .validated()
                .map_err(|e| invariant(name, InvariantKind::InvalidRegion(e)))?;
        }
        for (i, obstacle) in self.obstacles.iter().enumerate() {
            if !obstacle.pose.is_finite() {
                return Err(invariant(format!("obstacles[{i}].pose"), InvariantKind::NonFinite));
            }
            if !self.workspace.contains_polygon(&obstacle.world) {
                return Err(invariant(
                    format!("obstacles[{i}]"),
                    InvariantKind::ObstacleOutsideWorkspace,
                ));
            }
        }
        if !matches!(self.goal, Region::Disc { .. }) {
            return Err(ScenarioError::WrongType {
                path: "goal".into(),
                expected: "disc",
            });
        }
        self.goal
            .validated()
            .map_err(|e| invariant("goal", InvariantKind::InvalidRegion(e)))?;
        if !self.workspace.contains(self.goal.center()) {
            return Err(invariant("goal.center", InvariantKind::GoalOutsideWorkspace));
        }
        if self.robots.is_empty() {
            return Err(invariant("robots", InvariantKind::NoRobots));
        }
        for (i, robot) in self.robots.iter().enumerate() {
            robot
                .reachable
                .validated()
                .map_err(|e| invariant(format!("robots[{i}].reachable"), InvariantKind::InvalidRegion(e)))?;
        }
        if !self.start.is_finite() {
            return Err(invariant("start", InvariantKind::NonFinite));
        }
        if !self.on_surface(&self.start) {
            return Err(invariant("start", InvariantKind::StartOffSurface));
        }
        if self.collides(&self.start) {
            return Err(invariant("start", InvariantKind::StartInCollision));
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn workspace(&self) -> &Region {
        &self.workspace
    }

    pub fn support_surface(&self) -> &Region {
        &self.support_surface
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn object(&self) -> &ObjectBody {
        &self.object
    }

    pub fn start(&self) -> &Pose2 {
        &self.start
    }

    pub fn goal(&self) -> &Region {
        &self.goal
    }

    pub fn robots(&self) -> &[Robot] {
        &self.robots
    }

    /// The robot that manipulates the object.
    pub fn acting_robot(&self) -> &Robot {
        &self.robots[0]
    }

    /// Same scenario with a different start pose, re-validated.
    pub fn with_start(&self, start: Pose2) -> Result<Self, ScenarioError> {
        let mut s = self.clone();
        s.start = start;
        s.check()?;
        Ok(s)
    }

    /// Same scenario with a different object, re-validated.
    pub fn with_object(&self, object: ObjectBody) -> Result<Self, ScenarioError> {
        let mut s = self.clone();
        s.object = object;
        s.check()?;
        Ok(s)
    }

    pub fn object_world(&self, pose: &Pose2) -> Vec<Vec2> {
        transform_polygon(self.object.shape(), pose)
    }

    /// Object polygon entirely on the support surface.
    pub fn on_surface(&self, pose: &Pose2) -> bool {
        self.support_surface.contains_polygon(&self.object_world(pose))
    }

    /// Object polygon touches or overlaps an obstacle.
    pub fn collides(&self, pose: &Pose2) -> bool {
        let world = self.object_world(pose);
        self.obstacles
            .iter()
            .any(|o| polygons_intersect(&world, &o.world))
    }

    /// On the surface and collision-free.
    pub fn pose_valid(&self, pose: &Pose2) -> bool {
        let world = self.object_world(pose);
        self.support_surface.contains_polygon(&world)
            && !self.obstacles.iter().any(|o| polygons_intersect(&world, &o.world))
    }

    /// Positional goal test on the object centroid.
    pub fn in_goal(&self, pose: &Pose2) -> bool {
        self.goal.contains(pose.position())
    }
}

/// Loads one of the built-in scenarios `S1`..`S6`.
pub fn builtin_scenario(id: &str) -> Result<Scenario, ScenarioError> {
    let idx = BUILTIN_IDS
        .iter()
        .position(|b| *b == id)
        .ok_or_else(|| ScenarioError::UnknownScenario(id.to_string()))?;
    parse_scenario(BUILTIN_DOCS[idx])
}

// ---------------------------------------------------------------------------
// Parsing

struct Fields<'a> {
    map: &'a Map<String, Value>,
    path: String,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl<'a> Fields<'a> {
    fn of(value: &'a Value, path: &str, allowed: &[&str]) -> Result<Self, ScenarioError> {
        let map = value.as_object().ok_or_else(|| ScenarioError::WrongType {
            path: path.to_string(),
            expected: "object",
        })?;
        if let Some(extra) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ScenarioError::UnknownField(join(path, extra)));
        }
        Ok(Self {
            map,
            path: path.to_string(),
        })
    }

    fn get(&self, key: &str) -> Result<(&'a Value, String), ScenarioError> {
        let path = join(&self.path, key);
        match self.map.get(key) {
            Some(v) => Ok((v, path)),
            None => Err(ScenarioError::MissingField(path)),
        }
    }

    fn number(&self, key: &str) -> Result<f64, ScenarioError> {
        let (v, path) = self.get(key)?;
        number(v, &path)
    }

    fn point(&self, key: &str) -> Result<Vec2, ScenarioError> {
        let (v, path) = self.get(key)?;
        point(v, &path)
    }

    fn array(&self, key: &str) -> Result<(&'a Vec<Value>, String), ScenarioError> {
        let (v, path) = self.get(key)?;
        match v.as_array() {
            Some(a) => Ok((a, path)),
            None => Err(ScenarioError::WrongType {
                path,
                expected: "array",
            }),
        }
    }
}

fn number(v: &Value, path: &str) -> Result<f64, ScenarioError> {
    let x = v.as_f64().ok_or_else(|| ScenarioError::WrongType {
        path: path.to_string(),
        expected: "number",
    })?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invariant(path, InvariantKind::NonFinite))
    }
}

fn point(v: &Value, path: &str) -> Result<Vec2, ScenarioError> {
    match v.as_array().map(Vec::as_slice) {
        Some([x, y]) => Ok(Vec2::new(
            number(x, &format!("{path}[0]"))?,
            number(y, &format!("{path}[1]"))?,
        )),
        _ => Err(ScenarioError::WrongType {
            path: path.to_string(),
            expected: "[x, y]",
        }),
    }
}

fn parse_polygon(f: &Fields) -> Result<ConvexPolygon, ScenarioError> {
    let (items, path) = f.array("vertices")?;
    let vertices = items
        .iter()
        .enumerate()
        .map(|(i, v)| point(v, &format!("{path}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    ConvexPolygon::new(vertices).map_err(|e| invariant(path, InvariantKind::InvalidPolygon(e)))
}

fn parse_pose(v: &Value, path: &str) -> Result<Pose2, ScenarioError> {
    let f = Fields::of(v, path, &["x", "y", "theta"])?;
    Ok(Pose2::new(f.number("x")?, f.number("y")?, f.number("theta")?))
}

fn parse_rectangle(v: &Value, path: &str) -> Result<Region, ScenarioError> {
    let f = Fields::of(v, path, &["min", "max"])?;
    Region::rectangle(f.point("min")?, f.point("max")?)
        .map_err(|e| invariant(path, InvariantKind::InvalidRegion(e)))
}

fn parse_region(v: &Value, path: &str) -> Result<Region, ScenarioError> {
    let variant_path = join(path, "variant");
    let variant = v
        .as_object()
        .ok_or_else(|| ScenarioError::WrongType {
            path: path.to_string(),
            expected: "object",
        })?
        .get("variant")
        .ok_or_else(|| ScenarioError::MissingField(variant_path.clone()))?
        .as_str()
        .ok_or_else(|| ScenarioError::WrongType {
            path: variant_path.clone(),
            expected: "string",
        })?;
    let region = match variant {
        "disc" => {
            let f = Fields::of(v, path, &["variant", "center", "radius"])?;
            Region::disc(f.point("center")?, f.number("radius")?)
        }
        "annulus" => {
            let f = Fields::of(v, path, &["variant", "center", "r_min", "r_max"])?;
            Region::annulus(f.point("center")?, f.number("r_min")?, f.number("r_max")?)
        }
        "rectangle" => {
            let f = Fields::of(v, path, &["variant", "min", "max"])?;
            Region::rectangle(f.point("min")?, f.point("max")?)
        }
        _ => {
            return Err(ScenarioError::WrongType {
                path: variant_path,
                expected: "\"disc\", \"annulus\" or \"rectangle\"",
            })
        }
    };
    region.map_err(|e| invariant(path, InvariantKind::InvalidRegion(e)))
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let top = Fields::of(
        &root,
        "",
        &[
            "id",
            "workspace",
            "support_surface",
            "obstacles",
            "object",
            "start",
            "goal",
            "robots",
        ],
    )?;

    let (id, id_path) = top.get("id")?;
    let id = id.as_str().ok_or(ScenarioError::WrongType {
        path: id_path,
        expected: "string",
    })?;

    let (v, p) = top.get("workspace")?;
    let workspace = parse_rectangle(v, &p)?;
    let (v, p) = top.get("support_surface")?;
    let support_surface = parse_rectangle(v, &p)?;

    let (items, obstacles_path) = top.array("obstacles")?;
    let mut obstacles = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let path = format!("{obstacles_path}[{i}]");
        let f = Fields::of(item, &path, &["vertices", "pose"])?;
        let shape = parse_polygon(&f)?;
        let (pv, pp) = f.get("pose")?;
        obstacles.push(Obstacle::new(shape, parse_pose(pv, &pp)?));
    }

    let (v, p) = top.get("object")?;
    let f = Fields::of(v, &p, &["vertices", "mass", "mu"])?;
    let shape = parse_polygon(&f)?;
    let object = ObjectBody::new(shape, f.number("mass")?, f.number("mu")?)
        .map_err(|e| invariant(p, InvariantKind::InvalidBody(e)))?;

    let (v, p) = top.get("start")?;
    let start = parse_pose(v, &p)?;

    let (v, p) = top.get("goal")?;
    let f = Fields::of(v, &p, &["center", "radius"])?;
    let goal = Region::disc(f.point("center")?, f.number("radius")?)
        .map_err(|e| invariant(p, InvariantKind::InvalidRegion(e)))?;

    let (items, robots_path) = top.array("robots")?;
    let mut robots = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let path = format!("{robots_path}[{i}]");
        let f = Fields::of(item, &path, &["name", "reachable"])?;
        let (nv, np) = f.get("name")?;
        let name = nv.as_str().ok_or(ScenarioError::WrongType {
            path: np,
            expected: "string",
        })?;
        let (rv, rp) = f.get("reachable")?;
        robots.push(Robot {
            name: name.to_string(),
            reachable: parse_region(rv, &rp)?,
        });
    }

    Scenario::new(id, workspace, support_surface, obstacles, object, start, goal, robots)
}

// ---------------------------------------------------------------------------
// Serialization

#[derive(Serialize)]
struct RectDoc {
    min: [f64; 2],
    max: [f64; 2],
}

#[derive(Serialize)]
struct PoseDoc {
    x: f64,
    y: f64,
    theta: f64,
}

#[derive(Serialize)]
struct ObstacleDoc {
    vertices: Vec<[f64; 2]>,
    pose: PoseDoc,
}

#[derive(Serialize)]
struct ObjectDoc {
    vertices: Vec<[f64; 2]>,
    mass: f64,
    mu: f64,
}

#[derive(Serialize)]
struct GoalDoc {
    center: [f64; 2],
    radius: f64,
}

#[derive(Serialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
enum RegionDoc {
    Disc { center: [f64; 2], radius: f64 },
    Annulus { center: [f64; 2], r_min: f64, r_max: f64 },
    Rectangle { min: [f64; 2], max: [f64; 2] },
}

#[derive(Serialize)]
struct RobotDoc {
    name: String,
    reachable: RegionDoc,
}

#[derive(Serialize)]
struct ScenarioDoc {
    id: String,
    workspace: RectDoc,
    support_surface: RectDoc,
    obstacles: Vec<ObstacleDoc>,
    object: ObjectDoc,
    start: PoseDoc,
    goal: GoalDoc,
    robots: Vec<RobotDoc>,
}

fn rect_doc(r: &Region) -> RectDoc {
    match *r {
        Region::Rectangle { min, max } => RectDoc {
            min: min.into(),
            max: max.into(),
        },
        _ => unreachable!("validated scenarios hold rectangles here"),
    }
}

fn region_doc(r: &Region) -> RegionDoc {
    match *r {
        Region::Disc { center, radius } => RegionDoc::Disc {
            center: center.into(),
            radius,
        },
        Region::Annulus {
            center,
            r_min,
            r_max,
        } => RegionDoc::Annulus {
            center: center.into(),
            r_min,
            r_max,
        },
        Region::Rectangle { min, max } => RegionDoc::Rectangle {
            min: min.into(),
            max: max.into(),
        },
    }
}

fn pose_doc(p: &Pose2) -> PoseDoc {
    PoseDoc {
        x: p.x,
        y: p.y,
        theta: p.theta,
    }
}

fn vertices_doc(poly: &ConvexPolygon) -> Vec<[f64; 2]> {
    poly.vertices().iter().map(|&v| v.into()).collect()
}

/// Canonical pretty-printed document. Floats use shortest round-trip form.
pub fn serialize_scenario(s: &Scenario) -> String {
    let (center, radius) = match s.goal {
        Region::Disc { center, radius } => (center, radius),
        _ => unreachable!("validated scenarios hold a disc goal"),
    };
    let doc = ScenarioDoc {
        id: s.id.clone(),
        workspace: rect_doc(&s.workspace),
        support_surface: rect_doc(&s.support_surface),
        obstacles: s
            .obstacles
            .iter()
            .map(|o| ObstacleDoc {
                vertices: vertices_doc(&o.shape),
                pose: pose_doc(&o.pose),
            })
            .collect(),
        object: ObjectDoc {
            vertices: vertices_doc(s.object.shape()),
            mass: s.object.mass(),
            mu: s.object.mu(),
        },
        start: pose_doc(&s.start),
        goal: GoalDoc {
            center: center.into(),
            radius,
        },
        robots: s
            .robots
            .iter()
            .map(|r| RobotDoc {
                name: r.name.clone(),
                reachable: region_doc(&r.reachable),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("scenario documents always serialize");
    out.push('\n');
    out
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "id: {}", self.id)?;
        if let Some(desc) = builtin_description(&self.id) {
            writeln!(f, "description: {desc}")?;
        }
        writeln!(f, "obstacles: {}", self.obstacles.len())?;
        writeln!(
            f,
            "object: {} vertices, mass {} kg, mu {}, min width {:.3} m",
            self.object.shape().len(),
            self.object.mass(),
            self.object.mu(),
            self.object.shape().min_width()
        )?;
        writeln!(f, "start: {}", self.start)?;
        let c = self.goal.center();
        writeln!(f, "goal: center ({:.4}, {:.4})", c.x, c.y)?;
        for r in &self.robots {
            writeln!(f, "robot: {} ({:?})", r.name, r.reachable)?;
        }
        Ok(())
    }
}
