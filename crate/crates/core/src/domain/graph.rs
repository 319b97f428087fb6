use std::f64::consts::TAU;
use std::fmt;

use super::{Cell, DomainError, GridMap};

/// Discrete agent pose: cell plus heading index.
///
/// Heading `t` of `D` points at angle `t * 360 / D` degrees, counter-clockwise
/// from east (+x), with north toward row 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pose {
    pub x: usize,
    pub y: usize,
    pub theta: usize,
}

impl Pose {
    pub fn new(x: usize, y: usize, theta: usize) -> Self {
        Self { x, y, theta }
    }
}

impl fmt::Display for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Forward,
    Backward,
    RotateCw,
    RotateCcw,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Forward, Action::Backward, Action::RotateCw, Action::RotateCcw];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Forward => "forward",
            Action::Backward => "backward",
            Action::RotateCw => "cw",
            Action::RotateCcw => "ccw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PoseId(pub u32);

impl PoseId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// All valid poses of a map and the single-action edges between them.
#[derive(Debug, Clone)]
pub struct PoseGraph {
    width: usize,
    headings: usize,
    /// Empty cells in row-major order; slot `i` owns poses `i*D .. (i+1)*D`.
    slots: Vec<(usize, usize)>,
    slot_of_cell: Vec<Option<u32>>,
    deltas: Vec<(i64, i64)>,
    edges: Vec<[Option<PoseId>; 4]>,
    incoming: Vec<Vec<(PoseId, Action)>>,
}

/// Unit step for heading `theta`: the heading vector rounded per axis.
fn heading_delta(theta: usize, headings: usize) -> (i64, i64) {
    let a = TAU * theta as f64 / headings as f64;
    (a.cos().round() as i64, (-a.sin()).round() as i64)
}

/// Builds the pose graph over every (Empty cell, heading) pair.
///
/// Rotations always exist. Forward and backward move one step along the
/// heading and exist only when the destination is an in-bounds Empty cell.
pub fn build_pose_graph(map: &GridMap, headings: usize) -> Result<PoseGraph, DomainError> {
    if headings == 0 {
        return Err(DomainError::NoHeadings);
    }
    let mut slots = Vec::new();
    let mut slot_of_cell = vec![None; map.width() * map.height()];
    for y in 0..map.height() {
        for x in 0..map.width() {
            if map.get(x, y) == Cell::Empty {
                slot_of_cell[y * map.width() + x] = Some(slots.len() as u32);
                slots.push((x, y));
            }
        }
    }
    if slots.is_empty() {
        return Err(DomainError::NoEmptyCell);
    }
    let deltas: Vec<_> = (0..headings).map(|t| heading_delta(t, headings)).collect();
    let n = slots.len() * headings;
    let mut edges = vec![[None; 4]; n];
    let mut incoming = vec![Vec::new(); n];
    let id = |slot: u32, theta: usize| PoseId(slot * headings as u32 + theta as u32);

    for (slot, &(x, y)) in slots.iter().enumerate() {
        for (theta, &(dx, dy)) in deltas.iter().enumerate() {
            let from = id(slot as u32, theta);
            let mut set = |action: Action, to: PoseId| {
                edges[from.index()][action.index()] = Some(to);
                incoming[to.index()].push((from, action));
            };
            for (action, sign) in [(Action::Forward, 1), (Action::Backward, -1)] {
                let (nx, ny) = (x as i64 + sign * dx, y as i64 + sign * dy);
                if map.get_signed(nx, ny) == Some(Cell::Empty) {
                    let s = slot_of_cell[ny as usize * map.width() + nx as usize].expect("empty cell has a slot");
                    set(action, id(s, theta));
                }
            }
            set(Action::RotateCw, id(slot as u32, (theta + headings - 1) % headings));
            set(Action::RotateCcw, id(slot as u32, (theta + 1) % headings));
        }
    }
    Ok(PoseGraph { width: map.width(), headings, slots, slot_of_cell, deltas, edges, incoming })
}

impl PoseGraph {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn headings(&self) -> usize {
        self.headings
    }

    pub fn pose(&self, id: PoseId) -> Pose {
        let (x, y) = self.slots[id.index() / self.headings];
        Pose { x, y, theta: id.index() % self.headings }
    }

    pub fn id_of(&self, pose: Pose) -> Option<PoseId> {
        if pose.theta >= self.headings || pose.x >= self.width {
            return None;
        }
        let slot = (*self.slot_of_cell.get(pose.y * self.width + pose.x)?)?;
        Some(PoseId(slot * self.headings as u32 + pose.theta as u32))
    }

    pub fn cell(&self, id: PoseId) -> (usize, usize) {
        self.slots[id.index() / self.headings]
    }

    /// Heading angle in radians, counter-clockwise from east.
    pub fn heading_angle(&self, theta: usize) -> f64 {
        TAU * theta as f64 / self.headings as f64
    }

    pub fn heading_delta(&self, theta: usize) -> (i64, i64) {
        self.deltas[theta]
    }

    pub fn successor(&self, id: PoseId, action: Action) -> Option<PoseId> {
        self.edges[id.index()][action.index()]
    }

    /// Edges that lead into `id`, as (source, action).
    pub fn predecessors(&self, id: PoseId) -> &[(PoseId, Action)] {
        &self.incoming[id.index()]
    }

    /// Feasible actions from `id`, in `[Forward, Backward, Cw, Ccw]` order.
    pub fn legal_actions_into(&self, id: PoseId, out: &mut Vec<Action>) {
        out.clear();
        for a in Action::ALL {
            if self.edges[id.index()][a.index()].is_some() {
                out.push(a);
            }
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = PoseId> {
        (0..self.len() as u32).map(PoseId)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(|e| e.iter().flatten().count()).sum()
    }
}

/// Feasible actions from `pose`; empty if the pose is not in the graph.
pub fn legal_actions(pose: Pose, graph: &PoseGraph) -> Vec<Action> {
    let mut out = Vec::new();
    if let Some(id) = graph.id_of(pose) {
        graph.legal_actions_into(id, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Enumerates every (pose, action) pair straight from the map rules.
    fn oracle_edges(map: &GridMap, d: usize) -> Vec<(Pose, Action, Pose)> {
        let mut out = Vec::new();
        for y in 0..map.height() {
            for x in 0..map.width() {
                if map.get(x, y) != Cell::Empty {
                    continue;
                }
                for t in 0..d {
                    let p = Pose::new(x, y, t);
                    let ang = TAU * t as f64 / d as f64;
                    let (dx, dy) = (ang.cos().round() as i64, -(ang.sin().round() as i64));
                    for (a, s) in [(Action::Forward, 1i64), (Action::Backward, -1)] {
                        let (nx, ny) = (x as i64 + s * dx, y as i64 + s * dy);
                        if map.get_signed(nx, ny) == Some(Cell::Empty) {
                            out.push((p, a, Pose::new(nx as usize, ny as usize, t)));
                        }
                    }
                    out.push((p, Action::RotateCw, Pose::new(x, y, (t + d - 1) % d)));
                    out.push((p, Action::RotateCcw, Pose::new(x, y, (t + 1) % d)));
                }
            }
        }
        out
    }

    fn graph_edges(g: &PoseGraph) -> Vec<(Pose, Action, Pose)> {
        let mut out = Vec::new();
        for id in g.ids() {
            for a in Action::ALL {
                if let Some(to) = g.successor(id, a) {
                    out.push((g.pose(id), a, g.pose(to)));
                }
            }
        }
        out
    }

    fn same_edges(map: &GridMap, d: usize) {
        let g = build_pose_graph(map, d).unwrap();
        let mut a = graph_edges(&g);
        let mut b = oracle_edges(map, d);
        let key = |e: &(Pose, Action, Pose)| (e.0.y, e.0.x, e.0.theta, e.1.index());
        a.sort_by_key(key);
        b.sort_by_key(key);
        assert_eq!(a, b);
    }

    #[test]
    fn single_cell_map() {
        let map = GridMap::from_rows(&["."]).unwrap();
        let g = build_pose_graph(&map, 4).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.edge_count(), 8);
        assert_eq!(legal_actions(Pose::new(0, 0, 0), &g), vec![Action::RotateCw, Action::RotateCcw]);
    }

    #[test]
    fn open_corridor_matches_enumeration() {
        let map = GridMap::from_rows(&["..."]).unwrap();
        let g = build_pose_graph(&map, 4).unwrap();
        assert_eq!(g.len(), 12);
        same_edges(&map, 4);
        // east/west-facing poses translate; north/south-facing ones cannot
        let translations =
            graph_edges(&g).into_iter().filter(|e| matches!(e.1, Action::Forward | Action::Backward)).count();
        assert_eq!(translations, 8);
    }

    #[test]
    fn blocked_corridor() {
        let map = GridMap::from_rows(&[".#."]).unwrap();
        let g = build_pose_graph(&map, 4).unwrap();
        assert_eq!(g.len(), 8);
        assert!(g.ids().all(|id| g.successor(id, Action::Forward).is_none()));
        same_edges(&map, 4);
    }

    #[test]
    fn diagonal_headings() {
        let map = GridMap::from_rows(&["...", "...", "..."]).unwrap();
        let g = build_pose_graph(&map, 8).unwrap();
        // heading 1 = 45 degrees = north-east
        let from = g.id_of(Pose::new(1, 1, 1)).unwrap();
        assert_eq!(g.pose(g.successor(from, Action::Forward).unwrap()), Pose::new(2, 0, 1));
        same_edges(&map, 8);
        same_edges(&map, 6);
    }

    #[test]
    fn legal_action_order() {
        let map = GridMap::from_rows(&["###", "#.#", "#.#", "###"]).unwrap();
        let g = build_pose_graph(&map, 4).unwrap();
        // facing north from the top cell: wall ahead, free behind
        assert_eq!(legal_actions(Pose::new(1, 1, 1), &g), vec![Action::Backward, Action::RotateCw, Action::RotateCcw]);
        let open = GridMap::from_rows(&["...", "...", "..."]).unwrap();
        let g = build_pose_graph(&open, 4).unwrap();
        assert_eq!(legal_actions(Pose::new(1, 1, 0), &g), Action::ALL.to_vec());
    }

    #[test]
    fn no_empty_cells() {
        let map = GridMap::from_rows(&["#C"]).unwrap();
        assert_eq!(build_pose_graph(&map, 4).unwrap_err(), DomainError::NoEmptyCell);
    }

    fn arb_map() -> impl Strategy<Value = GridMap> {
        (1usize..7, 1usize..7).prop_flat_map(|(w, h)| {
            prop::collection::vec(
                prop_oneof![3 => Just(Cell::Empty), 1 => Just(Cell::Occlusion), 1 => Just(Cell::Candidate)],
                w * h,
            )
            .prop_filter("needs an empty cell", |c| c.contains(&Cell::Empty))
            .prop_map(move |cells| GridMap::new(w, h, cells).unwrap())
        })
    }

    proptest! {
        #[test]
        fn rotation_closure(map in arb_map(), d in 1usize..13) {
            let g = build_pose_graph(&map, d).unwrap();
            for id in g.ids() {
                let mut cur = id;
                for _ in 0..d {
                    cur = g.successor(cur, Action::RotateCw).unwrap();
                }
                prop_assert_eq!(cur, id);
                let back = g.successor(g.successor(id, Action::RotateCw).unwrap(), Action::RotateCcw).unwrap();
                prop_assert_eq!(back, id);
            }
        }

        #[test]
        fn forward_backward_inverse(map in arb_map(), d in prop::sample::select(vec![4usize, 8, 12])) {
            let g = build_pose_graph(&map, d).unwrap();
            for id in g.ids() {
                if let Some(f) = g.successor(id, Action::Forward) {
                    prop_assert_eq!(g.successor(f, Action::Backward), Some(id));
                }
            }
        }

        #[test]
        fn matches_enumeration(map in arb_map(), d in 1usize..9) {
            same_edges(&map, d);
        }
    }
}
