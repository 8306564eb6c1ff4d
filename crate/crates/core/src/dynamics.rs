//! Poke forward model.
//!
//! A poke is an instantaneous impulse applied at a boundary point along the
//! inward edge normal. After contact breaks the object slides freely and
//! Coulomb friction brings it to rest. Linear and angular decay are decoupled:
//! the centroid decelerates at `mu * g` and the spin at `mu * g / kappa`,
//! where `kappa = sqrt(I / m)` is the radius of gyration. Both trajectories
//! are quadratic in time, so the slide has a closed form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConvexPolygon, Pose2, Vec2};

pub const DEFAULT_GRAVITY: f64 = 9.81;
pub const DEFAULT_MASS: f64 = 0.5;
pub const DEFAULT_MU: f64 = 0.3;
pub const DEFAULT_V_MIN: f64 = 0.1;
pub const DEFAULT_V_MAX: f64 = 1.5;

/// Time step between swept samples of a slide, in seconds.
pub const SAMPLE_DT: f64 = 0.02;

/// Perimeter fraction within which a contact parameter is considered to sit
/// on a vertex and gets moved onto the following edge.
pub const CONTACT_NUDGE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum BodyError {
    #[error("mass must be positive and finite, got {0}")]
    Mass(f64),
    #[error("friction coefficient must lie in (0, 2], got {0}")]
    Friction(f64),
    #[error("gravity must be positive and finite, got {0}")]
    Gravity(f64),
}

/// The manipulated rigid body. Inertia is derived from the shape assuming
/// uniform density.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectBody {
    shape: ConvexPolygon,
    mass: f64,
    inertia: f64,
    mu: f64,
    gravity: f64,
}

impl ObjectBody {
    pub fn new(shape: ConvexPolygon, mass: f64, mu: f64) -> Result<Self, BodyError> {
        Self::with_gravity(shape, mass, mu, DEFAULT_GRAVITY)
    }

    pub fn with_gravity(
        shape: ConvexPolygon,
        mass: f64,
        mu: f64,
        gravity: f64,
    ) -> Result<Self, BodyError> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(BodyError::Mass(mass));
        }
        if !(mu > 0.0 && mu <= 2.0) {
            return Err(BodyError::Friction(mu));
        }
        if !(gravity.is_finite() && gravity > 0.0) {
            return Err(BodyError::Gravity(gravity));
        }
        let inertia = mass * shape.polar_second_moment() / shape.area();
        Ok(Self {
            shape,
            mass,
            inertia,
            mu,
            gravity,
        })
    }

    pub fn shape(&self) -> &ConvexPolygon {
        &self.shape
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Moment of inertia about the centroid, kg·m².
    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gravity(&self) -> f64 {
        self.gravity
    }

    pub fn radius_of_gyration(&self) -> f64 {
        (self.inertia / self.mass).sqrt()
    }

    /// Linear friction deceleration, m/s².
    pub fn linear_deceleration(&self) -> f64 {
        self.mu * self.gravity
    }

    /// Angular friction deceleration, rad/s².
    pub fn angular_deceleration(&self) -> f64 {
        self.mu * self.gravity / self.radius_of_gyration()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ActionError {
    #[error("contact parameter must lie in [0, 1), got {0}")]
    ContactParam(f64),
    #[error("poke speed {speed} outside [{min}, {max}]")]
    Speed { speed: f64, min: f64, max: f64 },
}

/// A poke: where on the perimeter to strike and how fast.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PokeAction {
    /// Counter-clockwise perimeter fraction measured from vertex 0.
    pub contact: f64,
    /// Normal speed imparted at the contact point, m/s.
    pub speed: f64,
}

impl PokeAction {
    pub fn new(contact: f64, speed: f64, v_min: f64, v_max: f64) -> Result<Self, ActionError> {
        if !(0.0..1.0).contains(&contact) {
            return Err(ActionError::ContactParam(contact));
        }
        if !(v_min <= speed && speed <= v_max) {
            return Err(ActionError::Speed {
                speed,
                min: v_min,
                max: v_max,
            });
        }
        Ok(Self { contact, speed })
    }
}

/// Result of a forward simulation: the rest pose and the poses visited on the way.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlideOutcome {
    pub end_pose: Pose2,
    /// Poses at uniform time steps from the start, always ending with `end_pose`.
    pub swept_samples: Vec<Pose2>,
    /// Seconds until the object is at rest.
    pub duration: f64,
}

/// Contact point on a polygon boundary with its inward unit normal, both in
/// the polygon's local frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactFrame {
    pub point: Vec2,
    pub normal: Vec2,
}

pub fn contact_frame(shape: &ConvexPolygon, s: f64) -> ContactFrame {
    let n = shape.len();
    let lengths: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = shape.edge(i);
            (b - a).norm()
        })
        .collect();
    let perimeter: f64 = lengths.iter().sum();

    let s = s.rem_euclid(1.0);
    let mut vertex_fraction = 0.0;
    let mut on_vertex = s < CONTACT_NUDGE || 1.0 - s < CONTACT_NUDGE;
    for len in &lengths[..n - 1] {
        vertex_fraction += len / perimeter;
        if (s - vertex_fraction).abs() < CONTACT_NUDGE {
            on_vertex = true;
        }
    }
    let s = if on_vertex {
        (s + CONTACT_NUDGE).rem_euclid(1.0)
    } else {
        s
    };

    let mut arc = s * perimeter;
    let mut edge = n - 1;
    for (i, len) in lengths.iter().enumerate() {
        if arc < *len {
            edge = i;
            break;
        }
        arc -= len;
    }
    let (a, b) = shape.edge(edge);
    let dir = (b - a) * (1.0 / lengths[edge]);
    ContactFrame {
        point: a + dir * arc.min(lengths[edge]),
        normal: dir.perp(),
    }
}

/// Velocity state right after a poke, in the body's local frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImpulseResponse {
    pub v_com: Vec2,
    pub omega: f64,
}

/// Impulse at `contact` along unit `direction` sized so that the contact
/// point's velocity along `direction` becomes exactly `speed`.
pub fn impulse_along(body: &ObjectBody, contact: Vec2, direction: Vec2, speed: f64) -> ImpulseResponse {
    let lever = contact.cross(direction);
    let m_eff = 1.0 / (1.0 / body.mass + lever * lever / body.inertia);
    let impulse = m_eff * speed;
    ImpulseResponse {
        v_com: direction * (impulse / body.mass),
        omega: impulse * lever / body.inertia,
    }
}

pub fn impulse_response(body: &ObjectBody, poke: &PokeAction) -> ImpulseResponse {
    let frame = contact_frame(&body.shape, poke.contact);
    impulse_along(body, frame.point, frame.normal, poke.speed)
}

/// Closed-form friction slide from `start` with world-frame centroid velocity
/// `v_com` and spin `omega0`.
pub fn simulate_slide(body: &ObjectBody, start: &Pose2, v_com: Vec2, omega0: f64) -> SlideOutcome {
    let lin_decel = body.linear_deceleration();
    let ang_decel = body.angular_deceleration();

    let speed = v_com.norm();
    let dir = if speed > 0.0 {
        v_com * (1.0 / speed)
    } else {
        Vec2::ZERO
    };
    let t_lin = speed / lin_decel;
    let spin = omega0.abs();
    let spin_sign = omega0.signum();
    let t_rot = spin / ang_decel;
    let duration = t_lin.max(t_rot);

    let origin = start.position();
    let pose_at = |t: f64| {
        let tl = t.min(t_lin);
        let tr = t.min(t_rot);
        let p = origin + dir * (speed * tl - 0.5 * lin_decel * tl * tl);
        let dtheta = spin_sign * (spin * tr - 0.5 * ang_decel * tr * tr);
        Pose2::new(p.x, p.y, start.theta + dtheta)
    };

    let distance = speed * speed / (2.0 * lin_decel);
    let rotation = spin_sign * spin * spin / (2.0 * ang_decel);
    let end = origin + dir * distance;
    let end_pose = Pose2::new(end.x, end.y, start.theta + rotation);

    let mut swept_samples = Vec::with_capacity((duration / SAMPLE_DT) as usize + 2);
    if duration > 0.0 {
        swept_samples.push(*start);
        let mut k = 1u32;
        while f64::from(k) * SAMPLE_DT < duration {
            swept_samples.push(pose_at(f64::from(k) * SAMPLE_DT));
            k += 1;
        }
    }
    swept_samples.push(end_pose);

    SlideOutcome {
        end_pose,
        swept_samples,
        duration,
    }
}

/// Simulates `poke` with the speed scaled by `speed_factor` and the strike
/// direction rotated by `direction_offset` radians away from the edge normal.
/// With `(1.0, 0.0)` this is exactly [`forward_poke`].
pub fn forward_poke_perturbed(
    body: &ObjectBody,
    state: &Pose2,
    poke: &PokeAction,
    speed_factor: f64,
    direction_offset: f64,
) -> SlideOutcome {
    let frame = contact_frame(&body.shape, poke.contact);
    let direction = frame.normal.rotate(direction_offset);
    let response = impulse_along(body, frame.point, direction, poke.speed * speed_factor);
    simulate_slide(body, state, response.v_com.rotate(state.theta), response.omega)
}

/// Edge propagator: contact frame at the current pose, impulse, then slide.
pub fn forward_poke(body: &ObjectBody, state: &Pose2, poke: &PokeAction) -> SlideOutcome {
    let frame = contact_frame(&body.shape, poke.contact);
    let response = impulse_along(body, frame.point, frame.normal, poke.speed);
    simulate_slide(body, state, response.v_com.rotate(state.theta), response.omega)
}
