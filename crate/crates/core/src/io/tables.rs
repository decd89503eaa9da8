//! CSV tables.
//!
//! Every table starts with a comment line `# <schema>` naming its layout,
//! followed by a header row. Floats use the shortest representation that
//! round-trips, and a missing error (estimated count differs from the truth)
//! is written as `inf`, so output bytes depend only on the values.

use std::fmt::Display;

use crate::error::{Error, Result};
use crate::harness::{CellSummary, TrialReport};
use crate::nbs::DetectionResult;
use crate::refine::RefineResult;

pub const DETECTIONS_SCHEMA: &str = "netcp-detections/1";
pub const REFINEMENTS_SCHEMA: &str = "netcp-refinements/1";
pub const CELLS_SCHEMA: &str = "netcp-cells/1";
pub const TRIALS_SCHEMA: &str = "netcp-trials/1";

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

fn opt<T: Display>(x: Option<T>) -> String {
    x.map_or_else(|| "inf".into(), |v| v.to_string())
}

fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "inf".into(), num)
}

fn list(values: &[usize]) -> String {
    values
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(schema: &str, header: &[&str]) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(format!("# {schema}\n").as_bytes());
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(buf);
        writer.write_record(header).expect("write to memory");
        Self { writer }
    }

    fn row(&mut self, fields: Vec<String>) {
        self.writer.write_record(&fields).expect("write to memory");
    }

    fn finish(self) -> String {
        let bytes = self.writer.into_inner().expect("flush to memory");
        String::from_utf8(bytes).expect("ascii table")
    }
}

pub fn detections_csv(result: &DetectionResult) -> String {
    let mut t = Table::new(
        DETECTIONS_SCHEMA,
        &["estimate", "score", "s", "e", "depth", "interval"],
    );
    for d in &result.detections {
        t.row(vec![
            d.estimate.to_string(),
            num(d.score),
            d.s.to_string(),
            d.e.to_string(),
            d.depth.to_string(),
            d.interval.to_string(),
        ]);
    }
    t.finish()
}

pub fn refinements_csv(result: &RefineResult) -> String {
    let mut t = Table::new(
        REFINEMENTS_SCHEMA,
        &[
            "prelim",
            "estimate",
            "s",
            "e",
            "delta_tilde",
            "direction_norm",
            "refined",
            "fallback",
        ],
    );
    for r in &result.estimates {
        t.row(vec![
            r.prelim.to_string(),
            r.estimate.to_string(),
            r.s.to_string(),
            r.e.to_string(),
            num(r.delta_tilde),
            num(r.direction_norm),
            (!r.fallback).to_string(),
            r.fallback.to_string(),
        ]);
    }
    t.finish()
}

pub fn cells_csv(cells: &[CellSummary]) -> String {
    let mut t = Table::new(
        CELLS_SCHEMA,
        &[
            "cell",
            "n",
            "horizon",
            "spacing",
            "k",
            "rho",
            "kappa0",
            "r",
            "m",
            "tau1_mult",
            "self_loops",
            "rho_eff",
            "kappa0_eff",
            "snr",
            "signal_budget",
            "rate_coordinate",
            "reps",
            "successes",
            "success_rate",
            "baseline_successes",
            "baseline_rate",
            "exact_count",
            "mean_k_hat",
            "median_error",
            "median_prelim_error",
            "mean_error_matched",
            "mean_prelim_error_matched",
            "refine_fallbacks",
            "refine_failures",
        ],
    );
    for c in cells {
        let s = &c.spec;
        t.row(vec![
            c.cell.to_string(),
            s.n.to_string(),
            s.horizon.to_string(),
            s.spacing.to_string(),
            s.k.to_string(),
            num(s.rho),
            num(s.kappa0),
            s.r.to_string(),
            s.m.map_or_else(String::new, |m| m.to_string()),
            num(s.tau1_mult),
            s.self_loops.to_string(),
            num(c.rho_eff),
            num(c.kappa0_eff),
            num(c.snr),
            num(c.signal_budget),
            num(c.rate_coordinate),
            c.reps.to_string(),
            c.successes.to_string(),
            num(c.success_rate),
            c.baseline_successes.to_string(),
            num(c.baseline_rate),
            c.exact_count.to_string(),
            num(c.mean_k_hat),
            opt_num(c.median_error),
            opt_num(c.median_prelim_error),
            opt_num(c.mean_error_matched),
            opt_num(c.mean_prelim_error_matched),
            c.refine_fallbacks.to_string(),
            c.refine_failures.to_string(),
        ]);
    }
    t.finish()
}

pub fn trials_csv(trials: &[TrialReport]) -> String {
    let mut t = Table::new(
        TRIALS_SCHEMA,
        &[
            "cell",
            "rep",
            "seed",
            "n",
            "horizon",
            "k",
            "delta",
            "rho",
            "k_hat",
            "false_positives",
            "estimates",
            "prelim_estimates",
            "max_loc_error",
            "prelim_loc_error",
            "hausdorff",
            "success",
            "baseline_estimates",
            "baseline_success",
            "tau1",
            "refine_fallbacks",
            "refine_failed",
            "scenario_hash",
        ],
    );
    for r in trials {
        t.row(vec![
            r.cell.to_string(),
            r.rep.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.horizon.to_string(),
            r.k.to_string(),
            r.delta.to_string(),
            num(r.rho),
            r.k_hat.to_string(),
            r.false_positives.to_string(),
            list(&r.estimates),
            r.prelim_estimates.as_deref().map_or_else(String::new, list),
            opt(r.max_loc_error),
            opt(r.prelim_loc_error),
            opt(r.hausdorff),
            r.success.to_string(),
            list(&r.baseline_estimates),
            r.baseline_success.to_string(),
            num(r.tau1),
            r.refine_fallbacks.to_string(),
            r.refine_failed.to_string(),
            r.scenario_hash.clone(),
        ]);
    }
    t.finish()
}

/// Reads the `estimate` column of a detections or refinements table, or a
/// bare list with one integer per line.
pub fn read_estimates(text: &str, source: &str) -> Result<Vec<usize>> {
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes());
    let mut rows = reader.records();
    let first = match rows.next() {
        None => return Ok(Vec::new()),
        Some(r) => r.map_err(|e| Error::format(source, e.to_string()))?,
    };
    let (column, mut out) = match first.iter().position(|f| f.trim() == "estimate") {
        Some(c) => (c, Vec::new()),
        None if first.len() == 1 => (0, vec![parse_estimate(&first[0], 1, source)?]),
        None => return Err(Error::format(source, "header has no `estimate` column")),
    };
    for (k, row) in rows.enumerate() {
        let row = row.map_err(|e| Error::format(source, e.to_string()))?;
        let field = row.get(column).ok_or_else(|| {
            Error::format(source, format!("row {}: missing `estimate` field", k + 2))
        })?;
        out.push(parse_estimate(field, k + 2, source)?);
    }
    Ok(out)
}

fn parse_estimate(field: &str, row: usize, source: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::format(source, format!("row {row}: `{field}` is not a time index")))
}
