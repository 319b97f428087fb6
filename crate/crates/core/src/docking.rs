//! Approach phase: localize the detected target, pick the destination pose,
//! and drive there along a shortest pose-graph path, replanning whenever a
//! fresh detection arrives.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::domain::{Action, CandidateId, CandidateSet, Pose, PoseGraph, PoseId, VisibilityMatrix};
use crate::perception::Detection;

const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum DockingError {
    #[error("no pose sees candidate {0:?}")]
    NoVantagePoint(CandidateId),
    #[error("pose {to:?} is unreachable from {from:?}")]
    Unreachable { from: PoseId, to: PoseId },
}

/// How "closest" is measured when picking the destination pose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DestinationMetric {
    /// Straight-line distance from the pose cell to the target cell.
    #[default]
    Euclidean,
    /// Shortest-path length from the agent's current pose.
    PathLength,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DockingConfig {
    pub metric: DestinationMetric,
    /// Radius (cells) within which a seeing pose counts as a success.
    pub d_success: f64,
}

impl Default for DockingConfig {
    fn default() -> Self {
        Self { metric: DestinationMetric::Euclidean, d_success: 2.0 }
    }
}

fn sq_dist(a: (usize, usize), b: (usize, usize)) -> i64 {
    let dx = a.0 as i64 - b.0 as i64;
    let dy = a.1 as i64 - b.1 as i64;
    dx * dx + dy * dy
}

fn abs_bearing(graph: &PoseGraph, p: PoseId, target: (usize, usize)) -> f64 {
    let pose = graph.pose(p);
    crate::domain::bearing_offset(pose, graph.headings(), target.0, target.1).abs()
}

fn cmp_f64(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= TIE_EPS {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Nearest pose (Euclidean) that sees `target`; ties go to the most frontal
/// heading, then to the lowest pose index.
pub fn destination_pose(
    graph: &PoseGraph,
    vis: &VisibilityMatrix,
    candidates: &CandidateSet,
    target: CandidateId,
) -> Result<PoseId, DockingError> {
    let cell = candidates.cell(target);
    vis.poses_seeing(target)
        .min_by(|&a, &b| {
            sq_dist(graph.cell(a), cell)
                .cmp(&sq_dist(graph.cell(b), cell))
                .then_with(|| cmp_f64(abs_bearing(graph, a, cell), abs_bearing(graph, b, cell)))
                .then_with(|| a.cmp(&b))
        })
        .ok_or(DockingError::NoVantagePoint(target))
}

/// Seeing pose with the shortest path from `from`; ties as in
/// [`destination_pose`].
pub fn destination_pose_by_path(
    graph: &PoseGraph,
    vis: &VisibilityMatrix,
    candidates: &CandidateSet,
    target: CandidateId,
    from: PoseId,
) -> Result<PoseId, DockingError> {
    let cell = candidates.cell(target);
    let dist = distances_from(graph, from);
    let mut any = false;
    let best =
        vis.poses_seeing(target).inspect(|_| any = true).filter(|p| dist[p.index()].is_some()).min_by(|&a, &b| {
            dist[a.index()]
                .cmp(&dist[b.index()])
                .then_with(|| sq_dist(graph.cell(a), cell).cmp(&sq_dist(graph.cell(b), cell)))
                .then_with(|| cmp_f64(abs_bearing(graph, a, cell), abs_bearing(graph, b, cell)))
                .then_with(|| a.cmp(&b))
        });
    match best {
        Some(p) => Ok(p),
        None if any => Err(DockingError::Unreachable { from, to: vis.poses_seeing(target).next().unwrap() }),
        None => Err(DockingError::NoVantagePoint(target)),
    }
}

/// Unit-weight single-source distances (rotations and translations cost 1).
pub fn distances_from(graph: &PoseGraph, from: PoseId) -> Vec<Option<u32>> {
    dijkstra(graph, from, |_| 1, false)
}

/// Dijkstra over pose-graph edges. With `reverse`, distances are *to*
/// `source` along forward edges.
fn dijkstra(graph: &PoseGraph, source: PoseId, weight: impl Fn(Action) -> u32, reverse: bool) -> Vec<Option<u32>> {
    let mut dist: Vec<Option<u32>> = vec![None; graph.len()];
    let mut heap = BinaryHeap::new();
    dist[source.index()] = Some(0);
    heap.push(Reverse((0u32, source)));
    while let Some(Reverse((d, p))) = heap.pop() {
        if dist[p.index()].is_some_and(|best| d > best) {
            continue;
        }
        let mut relax = |q: PoseId, a: Action| {
            let nd = d + weight(a);
            if dist[q.index()].is_none_or(|old| nd < old) {
                dist[q.index()] = Some(nd);
                heap.push(Reverse((nd, q)));
            }
        };
        if reverse {
            for &(q, a) in graph.predecessors(p) {
                relax(q, a);
            }
        } else {
            for a in Action::ALL {
                if let Some(q) = graph.successor(p, a) {
                    relax(q, a);
                }
            }
        }
    }
    dist
}

/// Shortest path under action weights `weight`.
///
/// Distances are computed backward from `to`; the path then follows, from
/// each pose, the lowest-index successor that stays on a shortest path. Any
/// suffix of a returned path is therefore the path this function returns
/// from that suffix's first pose.
pub fn shortest_path_weighted(
    graph: &PoseGraph,
    from: PoseId,
    to: PoseId,
    weight: impl Fn(Action) -> u32 + Copy,
) -> Result<Vec<PoseId>, DockingError> {
    let dist = dijkstra(graph, to, weight, true);
    let Some(mut left) = dist[from.index()] else {
        return Err(DockingError::Unreachable { from, to });
    };
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        let next = Action::ALL
            .iter()
            .filter_map(|&a| graph.successor(cur, a).map(|q| (q, a)))
            .filter(|&(q, a)| dist[q.index()].is_some_and(|dq| dq + weight(a) == left))
            .map(|(q, _)| q)
            .min()
            .expect("a shortest-path successor exists");
        left = dist[next.index()].expect("successor is reachable");
        path.push(next);
        cur = next;
    }
    Ok(path)
}

/// Unit-weight shortest path; see [`shortest_path_weighted`].
pub fn shortest_path(graph: &PoseGraph, from: PoseId, to: PoseId) -> Result<Vec<PoseId>, DockingError> {
    shortest_path_weighted(graph, from, to, |_| 1)
}

/// Action that moves `from` to `to` along one edge.
pub fn edge_action(graph: &PoseGraph, from: PoseId, to: PoseId) -> Option<Action> {
    Action::ALL.into_iter().find(|&a| graph.successor(from, a) == Some(to))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DockingPlan {
    pub destination: PoseId,
    /// Current pose first, destination last.
    pub path: Vec<PoseId>,
    pub target_estimate: CandidateId,
}

/// Static inputs of the approach phase.
#[derive(Debug, Clone, Copy)]
pub struct Docking<'a> {
    pub graph: &'a PoseGraph,
    pub vis: &'a VisibilityMatrix,
    pub candidates: &'a CandidateSet,
    pub cfg: DockingConfig,
}

impl Docking<'_> {
    pub fn destination(&self, target: CandidateId, from: PoseId) -> Result<PoseId, DockingError> {
        match self.cfg.metric {
            DestinationMetric::Euclidean => destination_pose(self.graph, self.vis, self.candidates, target),
            DestinationMetric::PathLength => {
                destination_pose_by_path(self.graph, self.vis, self.candidates, target, from)
            }
        }
    }

    /// Plan from `current` toward the best vantage point on `target`.
    pub fn plan(&self, current: PoseId, target: CandidateId) -> Result<DockingPlan, DockingError> {
        let destination = self.destination(target, current)?;
        let path = shortest_path(self.graph, current, destination)?;
        Ok(DockingPlan { destination, path, target_estimate: target })
    }

    /// One approach step.
    ///
    /// A fresh detection rebuilds the plan from the current pose first. The
    /// returned action realizes the next edge, and the returned plan has its
    /// head advanced past it. `None` means the agent already stands at the
    /// destination.
    pub fn approach_step(
        &self,
        plan: &DockingPlan,
        fresh: &Detection,
    ) -> Result<(Option<Action>, DockingPlan), DockingError> {
        let current = plan.path[0];
        let mut plan = match (fresh.detected, fresh.estimated_cell) {
            (true, Some(cell)) => self.plan(current, cell)?,
            _ => plan.clone(),
        };
        if plan.path.len() < 2 {
            return Ok((None, plan));
        }
        let action = edge_action(self.graph, plan.path[0], plan.path[1]).expect("consecutive path poses share an edge");
        plan.path.remove(0);
        Ok((Some(action), plan))
    }

    /// Seeing poses within `d_success` of the true target. Evaluation only.
    pub fn ground_truth_destinations(&self, target: CandidateId) -> Vec<PoseId> {
        ground_truth_destinations(self.graph, self.vis, self.candidates, target, self.cfg.d_success)
    }
}

/// Seeing poses within `d_success` cells of `target`.
pub fn ground_truth_destinations(
    graph: &PoseGraph,
    vis: &VisibilityMatrix,
    candidates: &CandidateSet,
    target: CandidateId,
    d_success: f64,
) -> Vec<PoseId> {
    let cell = candidates.cell(target);
    let r2 = d_success * d_success + TIE_EPS;
    vis.poses_seeing(target).filter(|&p| sq_dist(graph.cell(p), cell) as f64 <= r2).collect()
}

/// Pose helper for callers holding coordinates.
pub fn pose_id(graph: &PoseGraph, pose: Pose) -> Option<PoseId> {
    graph.id_of(pose)
}
