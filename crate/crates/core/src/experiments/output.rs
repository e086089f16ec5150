use std::io::Write;

use super::{ExperimentRecord, LevelMean, SummaryRow};
use crate::Result;

pub const RECORD_HEADER: [&str; 11] = [
    "graph",
    "cluster",
    "algorithm",
    "seed_node",
    "trial",
    "conductance",
    "precision",
    "recall",
    "f1",
    "touched_volume",
    "micros",
];

pub const SUMMARY_HEADER: [&str; 5] = ["group", "metric", "q1", "median", "q3"];

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub fn write_records<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.graph.clone(),
            r.cluster.clone(),
            r.algorithm.to_string(),
            r.seed_node.to_string(),
            r.trial.to_string(),
            r.conductance.to_string(),
            opt(r.precision),
            opt(r.recall),
            opt(r.f1),
            r.touched_volume.to_string(),
            r.micros.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.group.clone(),
            r.metric.clone(),
            r.q1.to_string(),
            r.median.to_string(),
            r.q3.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_level_means<W: Write>(out: W, rows: &[LevelMean]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["noise", "algorithm", "mean_conductance", "cells"])?;
    for r in rows {
        w.write_record([
            r.noise.to_string(),
            r.algorithm.to_string(),
            r.mean_conductance.to_string(),
            r.cells.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
