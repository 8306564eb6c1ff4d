//! SVG rendering of scenarios, search trees, plans and executed traces.
//!
//! Output is drawn to scale (see [`RenderStyle::pixels_per_meter`]) with the
//! y axis pointing up. Identical inputs give byte-identical documents.

use std::fmt::Write;

use crate::geometry::{transform_polygon, Pose2, Region, Vec2};
use crate::planner::{Plan, PlanTree};
use crate::scenarios::Scenario;

#[derive(Clone, Debug, PartialEq)]
pub struct RenderStyle {
    pub obstacle_fill: String,
    pub object_fill: String,
    pub tree_stroke: String,
    pub execution_path_stroke: String,
    pub goal_fill: String,
    /// Fill per robot, cycled when there are more robots than colors.
    pub reachable_region_fills: Vec<String>,
    pub pixels_per_meter: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            obstacle_fill: "red".into(),
            object_fill: "blue".into(),
            tree_stroke: "blue".into(),
            execution_path_stroke: "green".into(),
            goal_fill: "green".into(),
            reachable_region_fills: vec!["orange".into(), "green".into()],
            pixels_per_meter: 500.0,
        }
    }
}

const MARGIN: f64 = 20.0;

struct Canvas {
    origin: Vec2,
    top: f64,
    scale: f64,
    out: String,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl Canvas {
    fn px(&self, p: Vec2) -> (f64, f64) {
        (
            (p.x - self.origin.x) * self.scale + MARGIN,
            (self.top - p.y) * self.scale + MARGIN,
        )
    }

    fn points(&self, pts: &[Vec2]) -> String {
        let mut s = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.px(*p);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.2},{y:.2}");
        }
        s
    }

    fn polygon(&mut self, class: &str, pts: &[Vec2], attrs: &str) {
        let points = self.points(pts);
        let _ = writeln!(self.out, r#"  <polygon class="{class}" points="{points}" {attrs}/>"#);
    }

    fn polyline(&mut self, class: &str, pts: &[Vec2], attrs: &str) {
        if pts.len() < 2 {
            return;
        }
        let points = self.points(pts);
        let _ = writeln!(
            self.out,
            r#"  <polyline class="{class}" points="{points}" fill="none" {attrs}/>"#
        );
    }

    fn region(&mut self, class: &str, region: &Region, attrs: &str) {
        match *region {
            Region::Disc { center, radius } => {
                let (cx, cy) = self.px(center);
                let _ = writeln!(
                    self.out,
                    r#"  <circle class="{class}" cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" {attrs}/>"#,
                    radius * self.scale
                );
            }
            Region::Annulus {
                center,
                r_min,
                r_max,
            } => {
                let (cx, cy) = self.px(center);
                let ring = |r: f64| {
                    let r = r * self.scale;
                    format!(
                        "M {:.2},{cy:.2} A {r:.2},{r:.2} 0 1 0 {:.2},{cy:.2} A {r:.2},{r:.2} 0 1 0 {:.2},{cy:.2} Z",
                        cx - r,
                        cx + r,
                        cx - r
                    )
                };
                let d = if r_min > 0.0 {
                    format!("{} {}", ring(r_max), ring(r_min))
                } else {
                    ring(r_max)
                };
                let _ = writeln!(
                    self.out,
                    r#"  <path class="{class}" d="{d}" fill-rule="evenodd" {attrs}/>"#
                );
            }
            Region::Rectangle { min, max } => {
                let (x0, y1) = self.px(min);
                let (x1, y0) = self.px(max);
                let _ = writeln!(
                    self.out,
                    r#"  <rect class="{class}" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" {attrs}/>"#,
                    x1 - x0,
                    y1 - y0
                );
            }
        }
    }
}

/// Renders a scenario with optional search tree, plan and executed trace.
pub fn render_svg<A>(
    scenario: &Scenario,
    tree: Option<&PlanTree<A>>,
    plan: Option<&Plan<A>>,
    trace: Option<&[Pose2]>,
    style: &RenderStyle,
) -> String {
    let (min, max) = match *scenario.workspace() {
        Region::Rectangle { min, max } => (min, max),
        ref other => {
            let c = other.center();
            (c, c)
        }
    };
    let scale = style.pixels_per_meter;
    let width = (max.x - min.x) * scale + 2.0 * MARGIN;
    let height = (max.y - min.y) * scale + 2.0 * MARGIN;
    let mut c = Canvas {
        origin: min,
        top: max.y,
        scale,
        out: String::new(),
    };

    let _ = writeln!(c.out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        c.out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.2} {height:.2}">"#
    );
    let _ = writeln!(c.out, "  <title>{}</title>", escape(scenario.id()));
    let _ = writeln!(c.out, "  <desc>meters-to-pixels: {scale}</desc>");

    c.region("workspace", scenario.workspace(), r##"fill="white" stroke="#444" stroke-width="1""##);
    c.region("support-surface", scenario.support_surface(), r##"fill="#f0ead6" stroke="#888" stroke-width="1""##);
    for (i, robot) in scenario.robots().iter().enumerate() {
        let fill = match style.reachable_region_fills.len() {
            0 => "none",
            n => style.reachable_region_fills[i % n].as_str(),
        };
        c.region(
            "reachable",
            &robot.reachable,
            &format!(r#"fill="{}" fill-opacity="0.25""#, escape(fill)),
        );
    }
    let obstacle_attrs = format!(r#"fill="{}""#, escape(&style.obstacle_fill));
    for o in scenario.obstacles() {
        c.polygon("obstacle", o.world(), &obstacle_attrs);
    }

    if let Some(tree) = tree {
        let attrs = format!(r#"stroke="{}" stroke-width="0.6""#, escape(&style.tree_stroke));
        for node in tree.nodes().iter().skip(1) {
            if let Some(outcome) = &node.incoming_outcome {
                let pts: Vec<Vec2> = outcome.swept_samples.iter().map(Pose2::position).collect();
                c.polyline("tree-edge", &pts, &attrs);
            }
        }
    }

    let path_attrs = format!(r#"stroke="{}" stroke-width="2.5""#, escape(&style.execution_path_stroke));
    if let Some(plan) = plan {
        let mut pts = vec![plan.start.position()];
        for step in &plan.steps {
            pts.extend(step.outcome.swept_samples.iter().skip(1).map(Pose2::position));
        }
        c.polyline("plan-path", &pts, &path_attrs);
    }
    if let Some(trace) = trace {
        let pts: Vec<Vec2> = trace.iter().map(Pose2::position).collect();
        c.polyline("executed-trace", &pts, &format!(r#"{path_attrs} stroke-dasharray="6,3""#));
    }

    let object_attrs = format!(r#"fill="{}" fill-opacity="0.85""#, escape(&style.object_fill));
    let start = *scenario.start();
    let final_pose = trace
        .and_then(|t| t.last().copied())
        .or_else(|| plan.map(Plan::final_state));
    c.polygon(
        "object-start",
        &transform_polygon(scenario.object().shape(), &start),
        &object_attrs,
    );
    if let Some(f) = final_pose {
        c.polygon(
            "object-final",
            &transform_polygon(scenario.object().shape(), &f),
            &object_attrs,
        );
    }

    c.region(
        "goal",
        scenario.goal(),
        &format!(r#"fill="{}" fill-opacity="0.35""#, escape(&style.goal_fill)),
    );
    c.out.push_str("</svg>\n");
    c.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::PokeAction;
    use crate::scenarios::builtin_scenario;

    fn count(svg: &str, needle: &str) -> usize {
        svg.matches(needle).count()
    }

    #[test]
    fn obstacle_counts_follow_scenarios() {
        let style = RenderStyle::default();
        let s1 = render_svg::<PokeAction>(&builtin_scenario("S1").unwrap(), None, None, None, &style);
        assert_eq!(count(&s1, r#"class="obstacle""#), 0);
        assert_eq!(count(&s1, r#"fill="red""#), 0);
        let s2 = render_svg::<PokeAction>(&builtin_scenario("S2").unwrap(), None, None, None, &style);
        assert_eq!(count(&s2, r#"class="obstacle""#), 2);
        assert_eq!(count(&s2, r#"fill="red""#), 2);
    }

    #[test]
    fn deterministic_bytes() {
        let s = builtin_scenario("S6").unwrap();
        let style = RenderStyle::default();
        assert_eq!(
            render_svg::<PokeAction>(&s, None, None, None, &style),
            render_svg::<PokeAction>(&s, None, None, None, &style)
        );
    }

    #[test]
    fn escapes_text() {
        assert_eq!(escape(r#"a<b>&"c""#), "a&lt;b&gt;&amp;&quot;c&quot;");
    }
}
