use std::path::{Path, PathBuf};

use netcp::harness::{Stream, TrialSeeds};
use netcp::intervals::{draw_intervals, recommended_m, IntervalSet};
use netcp::io::{
    decode_sequence, detections_csv, encode_bitset, encode_triples, read_estimates,
    refinements_csv, write_atomic, FileDigest, Manifest, ScenarioFile, SCENARIO_SCHEMA,
};
use netcp::nbs::{default_tau1, nbs_detect, DetectionResult, NbsConfig};
use netcp::net_model::{generate_sequence, split_sample, NetworkSequence};
use netcp::refine::{
    default_refine_params_with, default_spectral_constant, local_refine, RefineConfig, RefineResult,
};
use serde_json::json;

use crate::args::{Common, DetectArgs, Format, RefineArgs, SimulateArgs, ValidateArgs};
use crate::error::{CliError, CliResult, Context, Kind};
use crate::sweep::{SweepFile, SWEEP_SCHEMA};

/// Output directory plus the digests of everything written into it.
pub struct Output {
    dir: PathBuf,
    pub digests: Vec<FileDigest>,
}

impl Output {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            digests: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        write_atomic(&self.path(name), bytes).or_runtime()?;
        self.digests.push(FileDigest::of_bytes(name, bytes));
        Ok(())
    }

    pub fn finish(mut self, mut manifest: Manifest) -> CliResult<()> {
        manifest.outputs = std::mem::take(&mut self.digests);
        write_atomic(&self.path("manifest.json"), manifest.to_json().as_bytes()).or_runtime()
    }
}

/// Sets up the global thread pool and returns its size.
pub fn init_threads(common: &Common) -> CliResult<usize> {
    let threads = common
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(CliError::config("--threads must be at least 1"));
    }
    // a pool already installed (tests running commands in-process) is fine
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(threads)
}

fn read_bytes(path: &Path, kind: Kind) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::new(kind, format!("{}: {e}", path.display())))
}

fn read_text(path: &Path, kind: Kind) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new(kind, format!("{}: {e}", path.display())))
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let threads = init_threads(&args.common)?;
    let text = read_text(&args.scenario, Kind::Config)?;
    let source = args.scenario.display().to_string();
    let file = ScenarioFile::parse(&text, &source).or_config()?;
    let seeds = TrialSeeds::new(args.seed, 0, 0);
    let scenario = file
        .build(&source, &mut seeds.rng(Stream::Scenario))
        .or_config()?;

    let mut out = Output::create(&args.common.out)?;
    let streams = [Stream::SampleA, Stream::SampleB];
    let names: &[&str] = if args.samples == 1 {
        &["sequence.bin"]
    } else {
        &["sequence_a.bin", "sequence_b.bin"]
    };
    for (name, stream) in names.iter().zip(streams) {
        let seq = generate_sequence(&scenario, &mut seeds.rng(stream));
        let bytes = match args.format {
            Format::Bitset => encode_bitset(&seq),
            Format::Triples => encode_triples(&seq),
        };
        out.write(name, &bytes)?;
    }
    out.write("scenario.toml", file.to_toml().as_bytes())?;

    let mut manifest = Manifest::new("simulate", Some(args.seed), threads);
    manifest.parameters = json!({
        "scenario": source,
        "samples": args.samples,
        "format": format!("{:?}", args.format).to_lowercase(),
    });
    manifest
        .inputs
        .push(FileDigest::of_bytes(&source, text.as_bytes()));
    manifest
        .notes
        .insert("k".into(), scenario.change_points().len().into());
    manifest
        .notes
        .insert("change_points".into(), json!(scenario.change_points()));
    if let Some(sign) = scenario.hard_instance_sign() {
        manifest
            .notes
            .insert("hard_instance_sign".into(), json!(sign));
    }
    out.finish(manifest)?;
    println!(
        "wrote {} sequence(s) with T={}, n={}, K={} to {}",
        names.len(),
        scenario.horizon(),
        scenario.n(),
        scenario.change_points().len(),
        args.common.out.display()
    );
    Ok(())
}

/// The two samples the detectors work on.
struct Samples {
    a: NetworkSequence,
    b: NetworkSequence,
    /// 2 when a single input was split by parity, so working time `t` is `2t`.
    scale: usize,
    inputs: Vec<FileDigest>,
}

fn load_samples(paths: &[PathBuf]) -> CliResult<Samples> {
    let mut seqs = Vec::new();
    let mut inputs = Vec::new();
    for p in paths {
        let bytes = read_bytes(p, Kind::Data)?;
        let name = p.display().to_string();
        seqs.push(decode_sequence(&bytes, &name).or_data()?);
        inputs.push(FileDigest::of_bytes(name, &bytes));
    }
    let (a, b, scale) = match <[NetworkSequence; 2]>::try_from(seqs) {
        Ok([a, b]) => {
            if (a.n(), a.len()) != (b.n(), b.len()) || a.self_loops() != b.self_loops() {
                return Err(CliError::data(format!(
                    "samples differ in shape: (T={}, n={}) vs (T={}, n={})",
                    a.len(),
                    a.n(),
                    b.len(),
                    b.n()
                )));
            }
            (a, b, 1)
        }
        Err(mut one) => {
            let split = split_sample(&one.remove(0)).or_data()?;
            (split.first, split.second, 2)
        }
    };
    Ok(Samples {
        a,
        b,
        scale,
        inputs,
    })
}

impl Samples {
    fn horizon(&self) -> usize {
        self.a.len()
    }

    fn rho_hat(&self) -> f64 {
        self.a.max_density().max(self.b.max_density())
    }
}

fn to_original(mut result: DetectionResult, scale: usize) -> DetectionResult {
    result.horizon *= scale;
    for d in &mut result.detections {
        d.estimate *= scale;
        d.s *= scale;
        d.e *= scale;
    }
    result
}

pub fn detect(args: &DetectArgs) -> CliResult<()> {
    let threads = init_threads(&args.common)?;
    let samples = load_samples(&args.data)?;
    let horizon = samples.horizon();
    let rho_hat = samples.rho_hat();
    let n = samples.a.n();

    let intervals = match &args.intervals {
        Some(path) => {
            let text = read_text(path, Kind::Data)?;
            let set = IntervalSet::from_table(&text, &path.display().to_string()).or_data()?;
            if set.horizon != horizon {
                return Err(CliError::data(format!(
                    "{}: intervals drawn for horizon {}, working horizon is {horizon}",
                    path.display(),
                    set.horizon
                )));
            }
            set
        }
        None => {
            let m = match args.m {
                Some(m) => m,
                None => {
                    let spacing = args
                        .min_spacing
                        .map_or(horizon / 4, |s| s / samples.scale)
                        .clamp(1, horizon.max(1));
                    recommended_m(horizon.max(1), spacing)
                }
            };
            let seed = args.seed.expect("clap requires --seed without --intervals");
            let mut rng = TrialSeeds::new(seed, 0, 0).rng(Stream::Intervals);
            draw_intervals(horizon, m, args.length_cap, &mut rng).or_config()?
        }
    };

    let tau1 = args
        .tau1
        .unwrap_or_else(|| default_tau1(n, rho_hat, horizon, args.c_tau));
    let tau1 = if tau1 > 0.0 { tau1 } else { f64::MIN_POSITIVE };
    let cfg = NbsConfig::new(tau1, args.delta, intervals).or_config()?;
    let result = nbs_detect(&samples.a, &samples.b, 0, horizon, &cfg).or_runtime()?;
    let result = to_original(result, samples.scale);

    let mut out = Output::create(&args.common.out)?;
    out.write("detections.csv", detections_csv(&result).as_bytes())?;
    out.write("intervals.txt", cfg.intervals.to_table().as_bytes())?;
    let mut manifest = Manifest::new("detect", args.seed, threads);
    manifest.parameters = json!({
        "split": samples.scale == 2,
        "time_scale": samples.scale,
        "working_horizon": horizon,
        "n": n,
        "rho_hat": rho_hat,
        "tau1": tau1,
        "c_tau": args.c_tau,
        "delta": args.delta,
        "m": cfg.intervals.len(),
        "length_cap": cfg.intervals.cap,
        "intervals": cfg.intervals.pairs,
    });
    manifest.inputs = samples.inputs;
    manifest.notes.insert("k_hat".into(), result.len().into());
    out.finish(manifest)?;
    println!("estimates: {:?}", result.estimates());
    Ok(())
}

pub fn refine(args: &RefineArgs) -> CliResult<()> {
    let threads = init_threads(&args.common)?;
    let samples = load_samples(&args.data)?;
    let prelim_text = read_text(&args.prelim, Kind::Data)?;
    let prelim_source = args.prelim.display().to_string();
    let prelim_original = read_estimates(&prelim_text, &prelim_source).or_data()?;
    let prelim: Vec<usize> = prelim_original.iter().map(|t| t / samples.scale).collect();

    let horizon = samples.horizon();
    let rho_hat = samples.rho_hat();
    let n = samples.a.n();
    let c = args.c.unwrap_or_else(default_spectral_constant);
    let mut cfg = default_refine_params_with(n, rho_hat, horizon, c, args.c_eps);
    cfg.delta = args.delta;
    if let Some(t2) = args.tau2 {
        cfg.tau2 = t2;
    }
    if let Some(t3) = args.tau3 {
        cfg.tau3 = t3;
    }
    let cfg = RefineConfig::new(cfg.delta, cfg.tau2, cfg.tau3).or_config()?;
    let result = local_refine(&samples.a, &samples.b, &prelim, &cfg).map_err(|e| match e {
        netcp::Error::EigenFailure(_) => CliError::runtime(e),
        other => CliError::data(format!("{prelim_source}: {other}")),
    })?;
    let result = scale_refined(result, samples.scale);

    let mut out = Output::create(&args.common.out)?;
    out.write("refinements.csv", refinements_csv(&result).as_bytes())?;
    let mut manifest = Manifest::new("refine", None, threads);
    manifest.parameters = json!({
        "split": samples.scale == 2,
        "time_scale": samples.scale,
        "working_horizon": horizon,
        "n": n,
        "rho_hat": rho_hat,
        "c": c,
        "c_eps": args.c_eps,
        "delta": cfg.delta,
        "tau2": cfg.tau2,
        "tau3": cfg.tau3,
        "prelim": prelim_original,
    });
    manifest.inputs = samples.inputs;
    manifest
        .inputs
        .push(FileDigest::of_bytes(prelim_source, prelim_text.as_bytes()));
    manifest.notes.insert(
        "fallbacks".into(),
        result
            .estimates
            .iter()
            .filter(|r| r.fallback)
            .count()
            .into(),
    );
    out.finish(manifest)?;
    println!("refined: {:?}", result.values());
    Ok(())
}

fn scale_refined(mut result: RefineResult, scale: usize) -> RefineResult {
    result.horizon *= scale;
    for r in &mut result.estimates {
        r.prelim *= scale;
        r.estimate *= scale;
        r.s *= scale;
        r.e *= scale;
    }
    result
}

/// Describes a valid file, or says what is wrong with it.
fn validate_one(path: &Path) -> CliResult<String> {
    let bytes = read_bytes(path, Kind::Data)?;
    let source = path.display().to_string();
    if bytes.starts_with(b"NETCP") {
        let seq = decode_sequence(&bytes, &source).or_data()?;
        return Ok(format!(
            "adjacency sequence, T={}, n={}, self_loops={}",
            seq.len(),
            seq.n(),
            seq.self_loops()
        ));
    }
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::data(format!("{source}: neither text nor a netcp binary")))?;
    if text.trim_start().starts_with('{') {
        let m = Manifest::parse(&text, &source).or_data()?;
        return Ok(format!(
            "manifest of `{}` with {} outputs",
            m.command,
            m.outputs.len()
        ));
    }
    let table: toml::Table =
        toml::from_str(&text).map_err(|e| CliError::config(format!("{source}: {e}")))?;
    match table.get("schema").and_then(|v| v.as_str()) {
        Some(SCENARIO_SCHEMA) => {
            let file = ScenarioFile::parse(&text, &source).or_config()?;
            let mut rng = TrialSeeds::new(0, 0, 0).rng(Stream::Scenario);
            let sc = file.build(&source, &mut rng).or_config()?;
            Ok(format!(
                "scenario, T={}, n={}, K={}",
                sc.horizon(),
                sc.n(),
                sc.change_points().len()
            ))
        }
        Some(SWEEP_SCHEMA) => {
            let file = SweepFile::parse(&text, &source)?;
            let cells = file.grid().cells().or_config()?;
            Ok(format!(
                "sweep config, {} cells x {} reps",
                cells.len(),
                file.reps
            ))
        }
        Some(other) => Err(CliError::config(format!(
            "{source}: field `schema`: unknown schema \"{other}\""
        ))),
        None => Err(CliError::config(format!(
            "{source}: field `schema` is missing"
        ))),
    }
}

pub fn validate(args: &ValidateArgs) -> CliResult<()> {
    let mut first_err = None;
    for path in &args.files {
        match validate_one(path) {
            Ok(desc) => println!("ok {}: {desc}", path.display()),
            Err(e) => {
                eprintln!("invalid {}: {e}", path.display());
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}
