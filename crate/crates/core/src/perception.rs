//! Parametric stand-in for the object detector and depth localization.
//!
//! Ground-truth visibility goes in, a possibly wrong detection comes out:
//! true sightings are dropped at `miss_rate`, and when the target is out of
//! view a visible distractor is reported as the target at `fp_rate`.

use rand::Rng;

use crate::domain::{CandidateId, CandidateSet, ObjectLayout, PoseId, VisibilityMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorProfile {
    pub miss_rate: f64,
    pub fp_rate: f64,
    /// Max per-axis cell offset applied to true detections.
    pub localization_noise: usize,
}

impl DetectorProfile {
    pub const PERFECT: DetectorProfile = DetectorProfile { miss_rate: 0.0, fp_rate: 0.0, localization_noise: 0 };

    /// Recall 0.53 operating point of a real detector.
    pub fn realistic(fp_rate: f64) -> Self {
        Self { miss_rate: 0.47, fp_rate, localization_noise: 0 }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.miss_rate) {
            return Err(format!("miss_rate {} outside [0, 1]", self.miss_rate));
        }
        if !(0.0..=1.0).contains(&self.fp_rate) {
            return Err(format!("fp_rate {} outside [0, 1]", self.fp_rate));
        }
        Ok(())
    }
}

impl Default for DetectorProfile {
    fn default() -> Self {
        Self::PERFECT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionSource {
    TrueTarget,
    FalsePositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Detection {
    pub detected: bool,
    pub estimated_cell: Option<CandidateId>,
    pub source: Option<DetectionSource>,
}

impl Detection {
    pub const NONE: Detection = Detection { detected: false, estimated_cell: None, source: None };

    fn hit(cell: CandidateId, source: DetectionSource) -> Self {
        Self { detected: true, estimated_cell: Some(cell), source: Some(source) }
    }
}

/// Nearest candidate to `(x, y)` by squared distance, lowest index on ties.
fn nearest_candidate(candidates: &CandidateSet, x: i64, y: i64) -> CandidateId {
    candidates
        .iter()
        .min_by_key(|&(c, (cx, cy))| {
            let (dx, dy) = (cx as i64 - x, cy as i64 - y);
            (dx * dx + dy * dy, c)
        })
        .map(|(c, _)| c)
        .expect("candidate set is non-empty")
}

/// One glance from `pose`.
///
/// Always draws the detection coin before anything else, so two calls that
/// share an RNG stream stay coupled across different profiles.
pub fn observe<R: Rng + ?Sized>(
    candidates: &CandidateSet,
    pose: PoseId,
    layout: &ObjectLayout,
    vis: &VisibilityMatrix,
    profile: &DetectorProfile,
    rng: &mut R,
) -> Detection {
    let coin: f64 = rng.gen();
    let target = layout.target_cell();
    if vis.get(pose, target) {
        if coin >= 1.0 - profile.miss_rate {
            return Detection::NONE;
        }
        let cell = if profile.localization_noise == 0 {
            target
        } else {
            let r = profile.localization_noise as i64;
            let (tx, ty) = candidates.cell(target);
            let ox = rng.gen_range(-r..=r);
            let oy = rng.gen_range(-r..=r);
            nearest_candidate(candidates, tx as i64 + ox, ty as i64 + oy)
        };
        return Detection::hit(cell, DetectionSource::TrueTarget);
    }
    match layout.distractors().find(|&(_, c)| vis.get(pose, c)) {
        Some((_, cell)) if coin < profile.fp_rate => Detection::hit(cell, DetectionSource::FalsePositive),
        _ => Detection::NONE,
    }
}

/// The single bit the planner's belief update consumes.
pub fn planner_observation(detection: &Detection) -> u8 {
    u8::from(detection.detected)
}
