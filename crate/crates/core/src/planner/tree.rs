//! Search tree and nearest-neighbor queries.

use std::collections::HashMap;

use serde::Serialize;

use crate::dynamics::SlideOutcome;
use crate::geometry::{se2_distance, Pose2, Vec2};

pub type NodeId = usize;

/// Grid cell edge for the nearest-neighbor index, meters.
const CELL: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanNode<A> {
    pub state: Pose2,
    pub parent: Option<NodeId>,
    pub incoming_action: Option<A>,
    pub incoming_outcome: Option<SlideOutcome>,
    /// Sum of slide durations from the root, seconds.
    pub cumulative_duration: f64,
}

/// What a nearest-neighbor query measures distance to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    /// Full SE(2) distance with the configured orientation weight.
    Pose(Pose2),
    /// Centroid position only.
    Point(Vec2),
}

impl Target {
    pub fn distance(&self, state: &Pose2, w_theta: f64) -> f64 {
        match self {
            Target::Pose(p) => se2_distance(state, p, w_theta),
            Target::Point(p) => (state.position() - *p).norm(),
        }
    }

    fn position(&self) -> Vec2 {
        match self {
            Target::Pose(p) => p.position(),
            Target::Point(p) => *p,
        }
    }
}

/// Kinodynamic search tree rooted at the start pose.
///
/// Nodes are never removed, so ids are stable indices.
#[derive(Clone, Debug)]
pub struct PlanTree<A> {
    nodes: Vec<PlanNode<A>>,
    grid: HashMap<(i64, i64), Vec<NodeId>>,
    cell_min: (i64, i64),
    cell_max: (i64, i64),
}

impl<A: PartialEq> PartialEq for PlanTree<A> {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
    }
}

fn cell_of(p: Vec2) -> (i64, i64) {
    ((p.x / CELL).floor() as i64, (p.y / CELL).floor() as i64)
}

impl<A> PlanTree<A> {
    pub fn new(root: Pose2) -> Self {
        let c = cell_of(root.position());
        let mut tree = Self {
            nodes: Vec::new(),
            grid: HashMap::new(),
            cell_min: c,
            cell_max: c,
        };
        tree.insert(PlanNode {
            state: root,
            parent: None,
            incoming_action: None,
            incoming_outcome: None,
            cumulative_duration: 0.0,
        });
        tree
    }

    fn insert(&mut self, node: PlanNode<A>) -> NodeId {
        let id = self.nodes.len();
        let c = cell_of(node.state.position());
        self.cell_min = (self.cell_min.0.min(c.0), self.cell_min.1.min(c.1));
        self.cell_max = (self.cell_max.0.max(c.0), self.cell_max.1.max(c.1));
        self.grid.entry(c).or_default().push(id);
        self.nodes.push(node);
        id
    }

    /// Appends a child reached from `parent` by `action`.
    pub fn add_child(&mut self, parent: NodeId, action: A, outcome: SlideOutcome) -> NodeId {
        let cumulative_duration = self.nodes[parent].cumulative_duration + outcome.duration;
        self.insert(PlanNode {
            state: outcome.end_pose,
            parent: Some(parent),
            incoming_action: Some(action),
            incoming_outcome: Some(outcome),
            cumulative_duration,
        })
    }

    pub fn root(&self) -> &PlanNode<A> {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &PlanNode<A> {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[PlanNode<A>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node ids from the root down to `id`.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Reference nearest-neighbor query: exhaustive scan, ties broken by the
    /// lowest node id.
    pub fn nearest_linear(&self, target: &Target, w_theta: f64) -> NodeId {
        let mut best = (f64::INFINITY, 0);
        for (id, node) in self.nodes.iter().enumerate() {
            let d = target.distance(&node.state, w_theta);
            if d < best.0 {
                best = (d, id);
            }
        }
        best.1
    }

    /// Nearest node under `target`'s metric. Returns the same node as
    /// [`PlanTree::nearest_linear`], using a uniform position grid to prune.
    /// Both metrics are bounded below by centroid distance, which is what
    /// the grid rings bound.
    pub fn nearest(&self, target: &Target, w_theta: f64) -> NodeId {
        let tc = cell_of(target.position());
        let mut best = (f64::INFINITY, usize::MAX);
        let max_ring = [
            tc.0 - self.cell_min.0,
            self.cell_max.0 - tc.0,
            tc.1 - self.cell_min.1,
            self.cell_max.1 - tc.1,
        ]
        .into_iter()
        .max()
        .unwrap_or(0)
        .max(0);

        for ring in 0..=max_ring {
            if ring > 0 && (ring - 1) as f64 * CELL > best.0 {
                break;
            }
            let mut visit = |cx: i64, cy: i64| {
                if let Some(ids) = self.grid.get(&(cx, cy)) {
                    for &id in ids {
                        let d = target.distance(&self.nodes[id].state, w_theta);
                        if d < best.0 || (d == best.0 && id < best.1) {
                            best = (d, id);
                        }
                    }
                }
            };
            if ring == 0 {
                visit(tc.0, tc.1);
                continue;
            }
            for dx in -ring..=ring {
                visit(tc.0 + dx, tc.1 - ring);
                visit(tc.0 + dx, tc.1 + ring);
            }
            for dy in (-ring + 1)..ring {
                visit(tc.0 - ring, tc.1 + dy);
                visit(tc.0 + ring, tc.1 + dy);
            }
        }
        best.1
    }
}
