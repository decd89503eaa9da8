//! The `sweep` subcommand: config files, per-cell checkpoints and reports.
//!
//! A config looks like
//!
//! ```toml
//! schema = "netcp-sweep/1"
//! reps = 50
//! base_seed = 7
//!
//! [base]
//! family = { kind = "sbm_swap" }
//! n = 30
//! horizon = 60
//! spacing = 20
//! k = 2
//! rho = 0.5
//! kappa0 = 0.5
//! r = 2
//!
//! [[axes]]
//! axis = "rho"
//! values = [0.1, 0.2, 0.4]
//!
//! [trial]
//! pipeline = "nbs_refine"
//! ```
//!
//! The run directory receives `config.toml` (the config with every default
//! filled in), `cells.csv`, `trials.csv`, `summary.json`, `manifest.json` and
//! one checkpoint per finished cell under `checkpoints/`.

use std::path::Path;

use netcp::harness::stats::{Regression, Spearman};
use netcp::harness::sweep::CurvePoint;
use netcp::harness::{
    assemble, localization_from, run_cell, summarize_cell, Axis, CellSpec, CellSummary, Scaling,
    SweepGrid, TrialConfig, TrialReport,
};
use netcp::io::{
    cells_csv, sha256_hex, to_json_pretty, trials_csv, write_atomic, FileDigest, Manifest,
};
use serde::{Deserialize, Serialize};

use crate::args::SweepArgs;
use crate::commands::{init_threads, Output};
use crate::error::{CliError, CliResult, Context};

pub const SWEEP_SCHEMA: &str = "netcp-sweep/1";
const CHECKPOINT_SCHEMA: &str = "netcp-checkpoint/1";
const SUMMARY_SCHEMA: &str = "netcp-sweep-summary/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub schema: String,
    pub reps: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub scaling: Scaling,
    pub base: CellSpec,
    #[serde(default)]
    pub axes: Vec<Axis>,
    pub trial: TrialConfig,
}

impl SweepFile {
    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        let file: SweepFile =
            toml::from_str(text).map_err(|e| CliError::config(format!("{source}: {e}")))?;
        if file.schema != SWEEP_SCHEMA {
            return Err(CliError::config(format!(
                "{source}: field `schema`: expected \"{SWEEP_SCHEMA}\", got \"{}\"",
                file.schema
            )));
        }
        Ok(file)
    }

    pub fn grid(&self) -> SweepGrid {
        SweepGrid {
            base: self.base.clone(),
            axes: self.axes.clone(),
            scaling: self.scaling,
            reps: self.reps,
            base_seed: self.base_seed,
            trial: self.trial.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sweep config serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    schema: String,
    version: String,
    grid_sha256: String,
    cell: usize,
    summary: CellSummary,
    trials: Vec<TrialReport>,
}

#[derive(Serialize)]
struct Localization<'a> {
    points: &'a [CurvePoint],
    dropped: &'a [(usize, String)],
    slope_fit: Option<Regression>,
    mean_error_matched: Option<f64>,
    mean_prelim_error_matched: Option<f64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema: &'static str,
    version: &'a str,
    grid: &'a SweepGrid,
    cells: &'a [CellSummary],
    /// Spearman association of success rate with `sqrt(rho) kappa0`.
    trend: Spearman,
    localization: Localization<'a>,
}

fn load_checkpoint(path: &Path, grid_hash: &str, cell: usize) -> Option<Checkpoint> {
    let text = std::fs::read_to_string(path).ok()?;
    let ck: Checkpoint = serde_json::from_str(&text).ok()?;
    (ck.schema == CHECKPOINT_SCHEMA
        && ck.version == netcp::VERSION
        && ck.grid_sha256 == grid_hash
        && ck.cell == cell)
        .then_some(ck)
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    let threads = init_threads(&args.common)?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::config(format!("{}: {e}", args.config.display())))?;
    let source = args.config.display().to_string();
    let mut file = SweepFile::parse(&text, &source)?;
    if let Some(seed) = args.seed {
        file.base_seed = seed;
    }
    let grid = file.grid();
    let specs = grid.cells().or_config()?;
    let grid_hash = sha256_hex(&serde_json::to_vec(&grid).expect("grid serializes"));

    let mut out = Output::create(&args.common.out)?;
    out.write("config.toml", file.to_toml().as_bytes())?;
    let ck_dir = out.path("checkpoints");
    std::fs::create_dir_all(&ck_dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", ck_dir.display())))?;

    let mut cells = Vec::with_capacity(specs.len());
    let mut trials = Vec::new();
    let mut resumed = 0;
    for (i, spec) in specs.iter().enumerate() {
        let ck_path = ck_dir.join(format!("cell-{i:05}.json"));
        let ck = match args
            .resume
            .then(|| load_checkpoint(&ck_path, &grid_hash, i))
            .flatten()
        {
            Some(ck) => {
                resumed += 1;
                ck
            }
            None => {
                let reports = run_cell(&grid, i, spec).or_runtime()?;
                let ck = Checkpoint {
                    schema: CHECKPOINT_SCHEMA.into(),
                    version: netcp::VERSION.into(),
                    grid_sha256: grid_hash.clone(),
                    cell: i,
                    summary: summarize_cell(i, spec, &reports).or_runtime()?,
                    trials: reports,
                };
                write_atomic(&ck_path, to_json_pretty(&ck).as_bytes()).or_runtime()?;
                ck
            }
        };
        eprintln!(
            "cell {}/{}: success rate {}",
            i + 1,
            specs.len(),
            ck.summary.success_rate
        );
        cells.push(ck.summary);
        trials.extend(ck.trials);
    }
    if resumed > 0 {
        eprintln!(
            "resumed {resumed} of {} cells from checkpoints",
            specs.len()
        );
    }

    let report = localization_from(assemble(&grid, cells, trials));
    let sweep = &report.sweep;
    let summary = Summary {
        schema: SUMMARY_SCHEMA,
        version: &sweep.version,
        grid: &sweep.grid,
        cells: &sweep.cells,
        trend: sweep.trend,
        localization: Localization {
            points: &report.points,
            dropped: &report.dropped,
            slope_fit: report.fit,
            mean_error_matched: report.mean_error_matched,
            mean_prelim_error_matched: report.mean_prelim_error_matched,
        },
    };
    out.write("cells.csv", cells_csv(&sweep.cells).as_bytes())?;
    out.write("trials.csv", trials_csv(&sweep.trials).as_bytes())?;
    out.write("summary.json", to_json_pretty(&summary).as_bytes())?;

    let mut manifest = Manifest::new("sweep", Some(grid.base_seed), threads);
    manifest.parameters = serde_json::to_value(&grid).expect("grid serializes");
    manifest
        .inputs
        .push(FileDigest::of_bytes(&source, text.as_bytes()));
    manifest.notes.insert("cells".into(), specs.len().into());
    manifest
        .notes
        .insert("grid_sha256".into(), grid_hash.into());
    out.finish(manifest)?;
    println!(
        "{} cells x {} reps, trend rho {:.3} (p = {:.3e})",
        specs.len(),
        grid.reps,
        sweep.trend.rho,
        sweep.trend.p_increasing
    );
    Ok(())
}
