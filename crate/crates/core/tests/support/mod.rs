//! Shared helpers for integration tests: an RK4 slide integrator used as an
//! independent oracle, a brute-force polygon overlap test, random shapes and
//! scenarios, and a catalogue of invalid scenario documents.

#![allow(dead_code)]

use std::f64::consts::TAU;

use pokerrt::geometry::{wrap_angle, ConvexPolygon, Pose2, Region, Vec2};
use pokerrt::scenarios::{builtin_scenario, serialize_scenario, Obstacle, Robot, ScenarioError};
use pokerrt::{ObjectBody, Scenario};
use rand::Rng;
use serde_json::{json, Value};

pub const RK4_DT: f64 = 1e-5;

/// State of a sliding body: pose and planar twist.
#[derive(Clone, Copy, Debug)]
pub struct SlideState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl SlideState {
    fn add(&self, k: &SlideState, h: f64) -> SlideState {
        SlideState {
            x: self.x + h * k.x,
            y: self.y + h * k.y,
            theta: self.theta + h * k.theta,
            vx: self.vx + h * k.vx,
            vy: self.vy + h * k.vy,
            omega: self.omega + h * k.omega,
        }
    }
}

/// Coulomb sliding with decoupled friction: the linear speed decays at
/// mu*g along -v, the spin at mu*g/kappa against omega.
fn derivative(s: &SlideState, lin: f64, ang: f64) -> SlideState {
    let speed = (s.vx * s.vx + s.vy * s.vy).sqrt();
    let (ax, ay) = if speed > 0.0 {
        (-lin * s.vx / speed, -lin * s.vy / speed)
    } else {
        (0.0, 0.0)
    };
    let alpha = if s.omega != 0.0 { -ang * s.omega.signum() } else { 0.0 };
    SlideState {
        x: s.vx,
        y: s.vy,
        theta: s.omega,
        vx: ax,
        vy: ay,
        omega: alpha,
    }
}

/// Integrates until both speeds are zero. Friction cannot reverse motion:
/// once a speed is within one step of deceleration from zero, it comes to
/// rest during that step (covering half the distance of a constant-speed
/// step, an O(h^2) error). Returns the final state and the state after
/// every `sample_every` steps.
pub fn rk4_slide(
    body: &ObjectBody,
    start: &Pose2,
    v: Vec2,
    omega: f64,
    sample_every: usize,
) -> (SlideState, Vec<SlideState>) {
    let lin = body.mu() * body.gravity();
    let ang = lin / (body.inertia() / body.mass()).sqrt();
    let h = RK4_DT;
    let mut s = SlideState {
        x: start.x,
        y: start.y,
        theta: start.theta,
        vx: v.x,
        vy: v.y,
        omega,
    };
    let mut samples = Vec::new();
    let mut step = 0usize;
    while s.vx != 0.0 || s.vy != 0.0 || s.omega != 0.0 {
        let stop_linear = (s.vx * s.vx + s.vy * s.vy).sqrt() <= lin * h;
        let stop_spin = s.omega.abs() <= ang * h;
        if stop_linear || stop_spin {
            let mut next = s;
            if stop_linear {
                next.x += s.vx * h / 2.0;
                next.y += s.vy * h / 2.0;
                next.vx = 0.0;
                next.vy = 0.0;
            }
            if stop_spin {
                next.theta += s.omega * h / 2.0;
                next.omega = 0.0;
            }
            // The component still moving advances by a regular step.
            let moving = rk4_step(&s, h, lin, ang);
            if !stop_linear {
                next.x = moving.x;
                next.y = moving.y;
                next.vx = moving.vx;
                next.vy = moving.vy;
            }
            if !stop_spin {
                next.theta = moving.theta;
                next.omega = moving.omega;
            }
            s = next;
        } else {
            s = rk4_step(&s, h, lin, ang);
        }
        step += 1;
        if sample_every > 0 && step.is_multiple_of(sample_every) {
            samples.push(s);
        }
    }
    (s, samples)
}

fn rk4_step(s: &SlideState, h: f64, lin: f64, ang: f64) -> SlideState {
    let k1 = derivative(s, lin, ang);
    let k2 = derivative(&s.add(&k1, h / 2.0), lin, ang);
    let k3 = derivative(&s.add(&k2, h / 2.0), lin, ang);
    let k4 = derivative(&s.add(&k3, h), lin, ang);
    let mut next = *s;
    for (dst, a, b, c, d) in [
        (&mut next.x, k1.x, k2.x, k3.x, k4.x),
        (&mut next.y, k1.y, k2.y, k3.y, k4.y),
        (&mut next.theta, k1.theta, k2.theta, k3.theta, k4.theta),
        (&mut next.vx, k1.vx, k2.vx, k3.vx, k4.vx),
        (&mut next.vy, k1.vy, k2.vy, k3.vy, k4.vy),
        (&mut next.omega, k1.omega, k2.omega, k3.omega, k4.omega),
    ] {
        *dst += h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    }
    next
}

pub fn angle_error(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Closed-set containment of a point in a counter-clockwise convex polygon.
fn point_in_convex(p: Vec2, poly: &[Vec2]) -> bool {
    (0..poly.len()).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        (b - a).cross(p - a) >= 0.0
    })
}

fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = (q2 - q1).cross(p1 - q1);
    let d2 = (q2 - q1).cross(p2 - q1);
    let d3 = (p2 - p1).cross(q1 - p1);
    let d4 = (p2 - p1).cross(q2 - p1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Dense sampling of `a` (vertices, edge points and an interior grid of
/// convex combinations) tested against `b` and vice versa, plus every pair
/// of edges tested for a proper crossing.
pub fn brute_force_overlap(a: &[Vec2], b: &[Vec2]) -> bool {
    fn samples(poly: &[Vec2]) -> Vec<Vec2> {
        let n = poly.len();
        let c = poly.iter().fold(Vec2::ZERO, |acc, p| acc + *p) * (1.0 / n as f64);
        let mut pts = vec![c];
        for i in 0..n {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            for k in 0..=20 {
                let t = k as f64 / 20.0;
                let edge = p + (q - p) * t;
                for j in 0..=10 {
                    let u = j as f64 / 10.0;
                    pts.push(c + (edge - c) * u);
                }
            }
        }
        pts
    }
    if samples(a).iter().any(|p| point_in_convex(*p, b)) || samples(b).iter().any(|p| point_in_convex(*p, a)) {
        return true;
    }
    for i in 0..a.len() {
        for j in 0..b.len() {
            if segments_intersect(a[i], a[(i + 1) % a.len()], b[j], b[(j + 1) % b.len()]) {
                return true;
            }
        }
    }
    false
}

/// Convex polygon from points on an ellipse at the given angles, centered
/// on its centroid. Returns `None` for degenerate angle sets.
pub fn ellipse_polygon(angles: &[f64], rx: f64, ry: f64) -> Option<ConvexPolygon> {
    let mut a: Vec<f64> = angles.iter().map(|t| t.rem_euclid(TAU)).collect();
    a.sort_by(f64::total_cmp);
    a.dedup_by(|x, y| (*x - *y).abs() < 0.05);
    if a.len() >= 2 && (a[0] + TAU - a[a.len() - 1]) < 0.05 {
        a.pop();
    }
    if a.len() < 3 {
        return None;
    }
    let pts: Vec<Vec2> = a.iter().map(|t| Vec2::new(rx * t.cos(), ry * t.sin())).collect();
    ConvexPolygon::centered(pts).ok().map(|(p, _)| p)
}

pub fn random_polygon<R: Rng>(rng: &mut R) -> ConvexPolygon {
    loop {
        let n = rng.random_range(3..9);
        let angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
        let rx = rng.random_range(0.02..0.2);
        let ry = rng.random_range(0.02..0.2);
        if let Some(p) = ellipse_polygon(&angles, rx, ry) {
            return p;
        }
    }
}

pub fn random_body<R: Rng>(rng: &mut R) -> ObjectBody {
    let shape = random_polygon(rng);
    ObjectBody::new(shape, rng.random_range(0.1..2.0), rng.random_range(0.1..1.0)).unwrap()
}

pub fn random_pose<R: Rng>(rng: &mut R) -> Pose2 {
    Pose2::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-3.0..3.0),
    )
}

pub fn random_region<R: Rng>(rng: &mut R, around: Vec2) -> Region {
    let c = around + Vec2::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
    match rng.random_range(0..3) {
        0 => Region::disc(c, rng.random_range(0.05..1.0)).unwrap(),
        1 => {
            let r_min = rng.random_range(0.0..0.3);
            Region::annulus(c, r_min, r_min + rng.random_range(0.05..1.0)).unwrap()
        }
        _ => {
            let half = Vec2::new(rng.random_range(0.05..0.8), rng.random_range(0.05..0.8));
            Region::rectangle(c - half, c + half).unwrap()
        }
    }
}

/// A valid scenario with random table, obstacles, object, start, goal and
/// robots. Draws again until every invariant holds.
pub fn random_scenario<R: Rng>(rng: &mut R, id: &str) -> Scenario {
    loop {
        let center = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let half = Vec2::new(rng.random_range(0.3..1.0), rng.random_range(0.2..0.8));
        let workspace = Region::rectangle(center - half, center + half).unwrap();
        let margin = Vec2::new(rng.random_range(0.0..0.05), rng.random_range(0.0..0.05));
        let surface = Region::rectangle(center - half + margin, center + half - margin).unwrap();
        let in_table = |rng: &mut R, slack: f64| {
            Pose2::new(
                center.x + rng.random_range(-1.0..1.0) * (half.x - slack).max(0.0),
                center.y + rng.random_range(-1.0..1.0) * (half.y - slack).max(0.0),
                rng.random_range(-3.2..3.2),
            )
        };
        let object = random_body(rng);
        let start = in_table(rng, object.shape().circumradius() + 0.05);
        let mut obstacles = Vec::new();
        for _ in 0..rng.random_range(0..5) {
            let shape = random_polygon(rng);
            let pose = in_table(rng, shape.circumradius());
            obstacles.push(Obstacle::new(shape, pose));
        }
        let goal_center = in_table(rng, 0.0).position();
        let goal = Region::disc(goal_center, rng.random_range(0.02..0.2)).unwrap();
        let robots = (0..rng.random_range(1..4))
            .map(|i| Robot {
                name: format!("robot_{i}"),
                reachable: random_region(rng, center),
            })
            .collect();
        if let Ok(s) = Scenario::new(id, workspace, surface, obstacles, object, start, goal, robots) {
            return s;
        }
    }
}

/// Short class name of a scenario error, as printed before the colon.
pub fn error_class(e: &ScenarioError) -> &'static str {
    match e {
        ScenarioError::UnknownScenario(_) => "unknown_scenario",
        ScenarioError::Syntax { .. } => "syntax",
        ScenarioError::MissingField(_) => "missing_field",
        ScenarioError::UnknownField(_) => "unknown_field",
        ScenarioError::WrongType { .. } => "wrong_type",
        ScenarioError::Invariant { kind, .. } => kind.name(),
    }
}

/// Field path attached to a scenario error, if any.
pub fn error_path(e: &ScenarioError) -> Option<&str> {
    match e {
        ScenarioError::MissingField(p) | ScenarioError::UnknownField(p) => Some(p),
        ScenarioError::WrongType { path, .. } | ScenarioError::Invariant { path, .. } => Some(path),
        _ => None,
    }
}

pub struct Violation {
    pub label: &'static str,
    pub document: String,
    pub class: &'static str,
    pub path: Option<&'static str>,
}

/// One invalid document per violation class, each a single edit of S2.
pub fn violations() -> Vec<Violation> {
    let base: Value = serde_json::from_str(&serialize_scenario(&builtin_scenario("S2").unwrap())).unwrap();
    let edit = |f: &dyn Fn(&mut Value)| {
        let mut v = base.clone();
        f(&mut v);
        serde_json::to_string_pretty(&v).unwrap()
    };
    let case = |label, document, class, path| Violation {
        label,
        document,
        class,
        path,
    };
    let mut out = vec![
        case("truncated document", "{\"id\": \"S2\",".to_string(), "syntax", None),
        case("trailing garbage", format!("{base} x"), "syntax", None),
        case(
            "missing goal",
            edit(&|v| {
                v.as_object_mut().unwrap().remove("goal");
            }),
            "missing_field",
            Some("goal"),
        ),
        case(
            "missing obstacle pose field",
            edit(&|v| {
                v["obstacles"][1]["pose"].as_object_mut().unwrap().remove("theta");
            }),
            "missing_field",
            Some("obstacles[1].pose.theta"),
        ),
        case(
            "unknown top-level key",
            edit(&|v| v["color"] = json!("blue")),
            "unknown_field",
            Some("color"),
        ),
        case(
            "unknown robot key",
            edit(&|v| v["robots"][0]["speed"] = json!(1.0)),
            "unknown_field",
            Some("robots[0].speed"),
        ),
        case(
            "string where number expected",
            edit(&|v| v["start"]["x"] = json!("left")),
            "wrong_type",
            Some("start.x"),
        ),
        case(
            "unknown region variant",
            edit(&|v| v["robots"][0]["reachable"]["variant"] = json!("cone")),
            "wrong_type",
            Some("robots[0].reachable.variant"),
        ),
        case(
            "concave obstacle",
            edit(&|v| {
                v["obstacles"][0]["vertices"] = json!([[0.1, 0.1], [-0.1, 0.1], [0.0, 0.0], [-0.1, -0.1], [0.1, -0.1]])
            }),
            "invalid_polygon",
            Some("obstacles[0].vertices"),
        ),
        case(
            "two-vertex object",
            edit(&|v| v["object"]["vertices"] = json!([[0.01, 0.0], [-0.01, 0.0]])),
            "invalid_polygon",
            Some("object.vertices"),
        ),
        case(
            "negative goal radius",
            edit(&|v| v["goal"]["radius"] = json!(-0.1)),
            "invalid_region",
            Some("goal"),
        ),
        case(
            "inverted workspace",
            edit(&|v| v["workspace"] = json!({"min": [0.6, 0.4], "max": [-0.6, -0.4]})),
            "invalid_region",
            Some("workspace"),
        ),
        case(
            "zero mass",
            edit(&|v| v["object"]["mass"] = json!(0.0)),
            "invalid_body",
            Some("object"),
        ),
        case("empty id", edit(&|v| v["id"] = json!("")), "empty_id", Some("id")),
        case("no robots", edit(&|v| v["robots"] = json!([])), "no_robots", Some("robots")),
        case(
            "obstacle outside workspace",
            edit(&|v| v["obstacles"][0]["pose"]["x"] = json!(5.0)),
            "obstacle_outside_workspace",
            Some("obstacles[0]"),
        ),
        case(
            "start off the table",
            edit(&|v| v["start"]["x"] = json!(0.59)),
            "start_off_surface",
            Some("start"),
        ),
        case(
            "start inside an obstacle",
            edit(&|v| v["start"] = v["obstacles"][0]["pose"].clone()),
            "start_in_collision",
            Some("start"),
        ),
        case(
            "goal outside workspace",
            edit(&|v| v["goal"]["center"] = json!([3.0, 0.0])),
            "goal_outside_workspace",
            Some("goal.center"),
        ),
    ];
    // Non-finite numbers cannot be written in JSON; overflowing literals are
    // rejected by the parser.
    out.push(case(
        "overflowing number",
        edit(&|v| v["start"]["x"] = json!(0.0)).replacen("\"x\": 0.0", "\"x\": 1e999", 1),
        "syntax",
        None,
    ));
    out
}
