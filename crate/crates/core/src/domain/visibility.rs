use std::f64::consts::{PI, TAU};

use super::{CandidateId, CandidateSet, Cell, DomainError, GridMap, Pose, PoseGraph, PoseId};

const ANGLE_EPS: f64 = 1e-9;

/// Sensor cone: total field-of-view angle and maximum range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisConfig {
    /// Degrees, `0 < fov <= 360`.
    pub fov: f64,
    /// Cells, center to center.
    pub max_range: f64,
}

impl Default for VisConfig {
    fn default() -> Self {
        Self { fov: 90.0, max_range: 6.0 }
    }
}

impl VisConfig {
    pub fn validate(&self) -> Result<(), DomainError> {
        if !(self.fov > 0.0 && self.fov <= 360.0) {
            return Err(DomainError::InvalidVisConfig(format!("fov {} outside (0, 360]", self.fov)));
        }
        if self.max_range.is_nan() || self.max_range < 1.0 {
            return Err(DomainError::InvalidVisConfig(format!("max_range {} below 1", self.max_range)));
        }
        Ok(())
    }
}

/// Integer line between two cells, endpoints included (Bresenham).
pub fn trace_line(x0: i64, y0: i64, x1: i64, y1: i64) -> Vec<(i64, i64)> {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (x0, y0);
    let mut out = Vec::with_capacity((dx - dy) as usize + 1);
    loop {
        out.push((x, y));
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}

/// Signed angle from heading `theta` to the direction of `(tx, ty)`, in
/// `(-pi, pi]`.
pub fn bearing_offset(pose: Pose, headings: usize, tx: usize, ty: usize) -> f64 {
    let dx = tx as f64 - pose.x as f64;
    let dy = pose.y as f64 - ty as f64;
    let bearing = dy.atan2(dx);
    let heading = TAU * pose.theta as f64 / headings as f64;
    let mut d = (bearing - heading) % TAU;
    if d > PI {
        d -= TAU;
    } else if d <= -PI {
        d += TAU;
    }
    d
}

/// Whether `cell` is seen from `pose`: within range, inside the cone, and no
/// Occlusion cell strictly between the two on the traced line.
pub fn visibility(map: &GridMap, pose: Pose, headings: usize, cell: (usize, usize), cfg: &VisConfig) -> bool {
    let (tx, ty) = cell;
    if (tx, ty) == (pose.x, pose.y) {
        return false;
    }
    let dx = tx as f64 - pose.x as f64;
    let dy = ty as f64 - pose.y as f64;
    if (dx * dx + dy * dy).sqrt() > cfg.max_range + ANGLE_EPS {
        return false;
    }
    if cfg.fov < 360.0 {
        let half = cfg.fov.to_radians() / 2.0;
        if bearing_offset(pose, headings, tx, ty).abs() > half + ANGLE_EPS {
            return false;
        }
    }
    let line = trace_line(pose.x as i64, pose.y as i64, tx as i64, ty as i64);
    line[1..line.len() - 1].iter().all(|&(x, y)| map.get_signed(x, y) != Some(Cell::Occlusion))
}

/// Pose-by-candidate bit matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VisibilityMatrix {
    poses: usize,
    candidates: usize,
    words: usize,
    bits: Vec<u64>,
}

impl VisibilityMatrix {
    pub fn new(poses: usize, candidates: usize) -> Self {
        let words = candidates.div_ceil(64).max(1);
        Self { poses, candidates, words, bits: vec![0; poses * words] }
    }

    pub fn poses(&self) -> usize {
        self.poses
    }

    pub fn candidates(&self) -> usize {
        self.candidates
    }

    pub fn get(&self, pose: PoseId, cand: CandidateId) -> bool {
        let c = cand.index();
        self.bits[pose.index() * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, pose: PoseId, cand: CandidateId, value: bool) {
        let c = cand.index();
        let w = &mut self.bits[pose.index() * self.words + c / 64];
        if value {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    /// Raw bit words for `pose`; bit `c` of the row is candidate `c`.
    pub fn row(&self, pose: PoseId) -> &[u64] {
        let start = pose.index() * self.words;
        &self.bits[start..start + self.words]
    }

    pub fn visible_from(&self, pose: PoseId) -> impl Iterator<Item = CandidateId> + '_ {
        (0..self.candidates as u32).map(CandidateId).filter(move |&c| self.get(pose, c))
    }

    pub fn poses_seeing(&self, cand: CandidateId) -> impl Iterator<Item = PoseId> + '_ {
        (0..self.poses as u32).map(PoseId).filter(move |&p| self.get(p, cand))
    }

    /// True when some pose sees every candidate.
    pub fn every_column_covered(&self) -> bool {
        (0..self.candidates as u32).all(|c| self.poses_seeing(CandidateId(c)).next().is_some())
    }
}

/// Evaluates `visibility` for every (pose, candidate) pair.
pub fn build_visibility_matrix(
    map: &GridMap,
    graph: &PoseGraph,
    candidates: &CandidateSet,
    cfg: &VisConfig,
) -> VisibilityMatrix {
    let mut m = VisibilityMatrix::new(graph.len(), candidates.len());
    for p in graph.ids() {
        let pose = graph.pose(p);
        for (c, cell) in candidates.iter() {
            if visibility(map, pose, graph.headings(), cell, cfg) {
                m.set(p, c, true);
            }
        }
    }
    m
}
