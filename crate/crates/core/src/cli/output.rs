//! CSV artifacts. Fixed column order, LF line endings.

use crate::harness::{EpisodeRecord, MetricsSummary, Policy, SweepRow};

pub const EPISODE_HEADER: [&str; 9] =
    ["scenario", "policy", "target", "start", "seed", "success", "path_length", "exploration_length", "failure_kind"];
pub const SWEEP_HEADER: [&str; 6] = ["axis", "ratio", "sr", "apl", "asppl_mean", "asppl_std"];
pub const SUMMARY_HEADER: [&str; 7] = ["policy", "episodes", "successes", "sr", "apl", "asppl_mean", "asppl_std"];

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("csv output is UTF-8")
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn episodes_csv(records: &[EpisodeRecord]) -> String {
    let mut w = writer();
    w.write_record(EPISODE_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.scenario.clone(),
            r.policy.to_string(),
            r.target.to_string(),
            r.start.clone(),
            r.seed.to_string(),
            r.result.success.to_string(),
            r.result.path_length.to_string(),
            r.result.exploration_length.to_string(),
            r.result.failure_kind.to_string(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = writer();
    w.write_record(SWEEP_HEADER).expect("in-memory write");
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.axis.to_string(),
            r.ratio.to_string(),
            num(m.sr),
            opt(m.apl),
            opt(m.asppl_mean),
            opt(m.asppl_std),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn summary_csv(policy: Policy, m: &MetricsSummary) -> String {
    let mut w = writer();
    w.write_record(SUMMARY_HEADER).expect("in-memory write");
    w.write_record([
        policy.to_string(),
        m.episodes.to_string(),
        m.successes.to_string(),
        num(m.sr),
        opt(m.apl),
        opt(m.asppl_mean),
        opt(m.asppl_std),
    ])
    .expect("in-memory write");
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Axis;

    fn metrics(sr: f64, apl: Option<f64>) -> MetricsSummary {
        MetricsSummary { episodes: 4, successes: 2, sr, apl, asppl_mean: apl.map(|_| 0.5), asppl_std: apl.map(|_| 0.1) }
    }

    #[test]
    fn sweep_rows_and_absent_values() {
        let rows = vec![
            SweepRow { axis: Axis::Miss, ratio: 0.0, metrics: metrics(0.5, Some(12.25)) },
            SweepRow { axis: Axis::Miss, ratio: 0.2, metrics: metrics(0.0, None) },
        ];
        assert_eq!(
            sweep_csv(&rows),
            "axis,ratio,sr,apl,asppl_mean,asppl_std\n\
             miss,0,0.500000,12.250000,0.500000,0.100000\n\
             miss,0.2,0.000000,,,\n"
        );
    }

    #[test]
    fn summary_has_one_row() {
        let text = summary_csv(Policy::RandomWalk, &metrics(0.5, Some(3.0)));
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().starts_with("random,4,2,0.500000,3.000000"));
    }
}
