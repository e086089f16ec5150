use std::collections::BTreeMap;

use super::ExperimentRecord;

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    /// `graph/cluster/algorithm`.
    pub group: String,
    pub metric: String,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// First quartile, median and third quartile with linear interpolation
/// between order statistics (position `p (n - 1)`). `None` for empty input.
pub fn quartiles(values: &[f64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    Some((at(0.25), at(0.5), at(0.75)))
}

/// Quartiles of conductance, precision, recall, F1 and touched volume per
/// (graph, cluster, algorithm). Metrics missing from every record in a group
/// are omitted.
type Metric = fn(&ExperimentRecord) -> Option<f64>;

pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, String, super::Algorithm), Vec<&ExperimentRecord>> =
        BTreeMap::new();
    for r in records {
        groups
            .entry((r.graph.clone(), r.cluster.clone(), r.algorithm))
            .or_default()
            .push(r);
    }
    let mut rows = Vec::new();
    for ((graph, cluster, algorithm), members) in groups {
        let group = format!("{graph}/{cluster}/{algorithm}");
        let metrics: [(&str, Metric); 5] = [
            ("conductance", |r| Some(r.conductance)),
            ("precision", |r| r.precision),
            ("recall", |r| r.recall),
            ("f1", |r| r.f1),
            ("touched_volume", |r| Some(r.touched_volume as f64)),
        ];
        for (name, get) in metrics {
            let values: Vec<f64> = members.iter().filter_map(|r| get(r)).collect();
            if let Some((q1, median, q3)) = quartiles(&values) {
                rows.push(SummaryRow {
                    group: group.clone(),
                    metric: name.to_string(),
                    q1,
                    median,
                    q3,
                });
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn medians() {
        assert_eq!(quartiles(&[0.2, 0.4, 0.6]).unwrap().1, 0.4);
        assert!((quartiles(&[0.2, 0.4]).unwrap().1 - 0.3).abs() < 1e-15);
        assert_eq!(quartiles(&[]), None);
        assert_eq!(quartiles(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), (2.0, 3.0, 4.0));
    }

    #[test]
    fn uniform_draws() {
        let mut rng = stream(2024);
        let draws: Vec<f64> = (0..4000).map(|_| rng.gen::<f64>()).collect();
        let (q1, _, q3) = quartiles(&draws).unwrap();
        assert!((q1 - 0.25).abs() < 0.03, "q1 = {q1}");
        assert!((q3 - 0.75).abs() < 0.03, "q3 = {q3}");
    }

    proptest! {
        #[test]
        fn ordered(values in prop::collection::vec(-1e6f64..1e6, 1..60)) {
            let (q1, m, q3) = quartiles(&values).unwrap();
            prop_assert!(q1 <= m && m <= q3);
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= q1 && q3 <= hi);
        }
    }
}
