use brnet_core::dynamics::TrajectoryRecord;

/// Most points kept per agent trace.
pub const TRACE_POINT_CAP: usize = 2000;

/// Per-agent `(t, value)` traces from a full record, starting at `t = 0`.
/// Returns `None` for records without per-step data.
pub fn agent_traces(rec: &TrajectoryRecord, cap: usize) -> Option<Vec<Vec<(u64, f64)>>> {
    if rec.step_count > 0 && rec.steps.is_empty() {
        return None;
    }
    let mut traces: Vec<Vec<(u64, f64)>> = rec
        .initial
        .as_slice()
        .iter()
        .map(|&v| vec![(0, v)])
        .collect();
    for s in &rec.steps {
        traces[s.agent].push((s.t, s.value));
    }
    Some(traces.into_iter().map(|t| decimate(&t, cap)).collect())
}

/// Thins a trace to about `cap` points. The first and last points and every
/// point where the value crosses between zero and positive are always kept,
/// even if that exceeds `cap`; the rest are spread evenly.
pub fn decimate(trace: &[(u64, f64)], cap: usize) -> Vec<(u64, f64)> {
    if trace.len() <= cap {
        return trace.to_vec();
    }
    let last = trace.len() - 1;
    let keep: Vec<bool> = (0..trace.len())
        .map(|k| k == 0 || k == last || (trace[k].1 > 0.0) != (trace[k - 1].1 > 0.0))
        .collect();
    let mandatory = keep.iter().filter(|&&k| k).count();
    let others: Vec<usize> = (0..trace.len()).filter(|&k| !keep[k]).collect();
    let budget = cap.saturating_sub(mandatory).min(others.len());
    let mut chosen = keep;
    for j in 0..budget {
        chosen[others[j * others.len() / budget]] = true;
    }
    trace
        .iter()
        .zip(chosen)
        .filter(|(_, c)| *c)
        .map(|(p, _)| *p)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use brnet_core::dynamics::{run, DynamicsConfig, RecordLevel};
    use brnet_core::Graph;

    #[test]
    fn short_traces_untouched() {
        let t = vec![(0, 0.5), (3, 0.0), (7, 0.2)];
        assert_eq!(decimate(&t, 10), t);
    }

    #[test]
    fn keeps_sign_changes_and_ends() {
        let mut t: Vec<(u64, f64)> = (0..10_000).map(|k| (k, 0.5 + 1e-6 * k as f64)).collect();
        t[4321].1 = 0.0;
        t[8000].1 = 0.0;
        let d = decimate(&t, 100);
        assert!(d.len() <= 100);
        for k in [0, 4321, 4322, 8000, 8001, 9999] {
            assert!(d.contains(&t[k]), "missing {k}");
        }
        assert!(d.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn mandatory_points_win_over_cap() {
        let t: Vec<(u64, f64)> = (0..50).map(|k| (k, (k % 2) as f64)).collect();
        assert_eq!(decimate(&t, 10).len(), 50);
    }

    #[test]
    fn traces_follow_the_record() {
        let g = Graph::path(4).unwrap();
        let cfg = DynamicsConfig::new(0.7).with_seed(3).with_record(RecordLevel::Full);
        let rec = run(&g, &cfg).unwrap();
        let traces = agent_traces(&rec, TRACE_POINT_CAP).unwrap();
        assert_eq!(traces.len(), 4);
        for (i, tr) in traces.iter().enumerate() {
            assert_eq!(tr[0], (0, rec.initial[i]));
            assert_eq!(tr.last().unwrap().1, rec.terminal[i]);
        }
        let summary = run(&g, &cfg.with_record(RecordLevel::Summary)).unwrap();
        assert!(agent_traces(&summary, TRACE_POINT_CAP).is_none());
    }
}
