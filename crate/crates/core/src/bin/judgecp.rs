use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use judgecp::conformal::{parse_methods, AdjustDirection};
use judgecp::domain::{LabeledSample, RatingScale};
use judgecp::error::{Error, Result};
use judgecp::extract::{extract_all, ExtractionRecord, ExtractorConfig};
use judgecp::harness::{
    emit_report, fuse, generate, load_report, load_samples, render_summary, run_experiment,
    ExperimentConfig, Generator, SyntheticSpec,
};
use judgecp::io::{read_jsonl, write_jsonl};

/// Calibrated prediction intervals for automated judge scores.
#[derive(Parser)]
#[command(name = "judgecp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn judge transcripts into score-token feature vectors.
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Log-probability assigned to rating tokens missing from the top-k list.
        #[arg(long)]
        floor: Option<f64>,
        #[arg(long, default_value_t = 5)]
        scale: i32,
    },
    /// Generate synthetic labeled samples with a known generator.
    Synth {
        #[arg(long, default_value = "peaked_logprob")]
        generator: String,
        #[arg(long, default_value_t = 4000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the generator's per-sample oracle rows.
        #[arg(long)]
        oracle: Option<PathBuf>,
    },
    /// Run a multi-seed experiment and write report files.
    Run(RunArgs),
    /// Inner-join several judges' samples and stack their features.
    Fuse {
        /// `judge=path`, repeated; order fixes the feature block order.
        #[arg(long = "input", required = true)]
        inputs: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        scale: i32,
    },
    /// Re-render report files from a saved `report.json`.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sample files (JSON lines), repeated.
    #[arg(long = "input")]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Seed list: `0-9`, `1,4,7`, or a mix.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    cal_fraction: Option<f64>,
    /// Comma-separated method ids, or `all`.
    #[arg(long)]
    methods: Option<String>,
    /// Partition name (`difficulty-tiers`, `group_tag`) or partition file.
    #[arg(long)]
    mondrian: Option<String>,
    #[arg(long)]
    adjust: Option<AdjustDirection>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("bad seed list {s:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) =
                    (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn read_records<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let (ok, bad) = read_jsonl::<T>(path)?;
    for e in &bad {
        eprintln!("{}:{}: {}", path.display(), e.line, e.message);
    }
    if ok.is_empty() {
        return Err(Error::Data(format!(
            "no usable lines in {}",
            path.display()
        )));
    }
    Ok(ok.into_iter().map(|(_, v)| v).collect())
}

fn load(path: &Path, scale: &RatingScale) -> Result<Vec<LabeledSample>> {
    let loaded = load_samples(path, scale)?;
    for e in &loaded.errors {
        eprintln!("{}:{}: {}", path.display(), e.line, e.message);
    }
    Ok(loaded.samples)
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if !args.inputs.is_empty() {
        cfg.inputs = args.inputs;
    }
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    if let Some(s) = &args.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(f) = args.cal_fraction {
        cfg.cal_fraction = f;
    }
    if let Some(m) = &args.methods {
        cfg.methods = if m.trim().is_empty() {
            Vec::new()
        } else {
            parse_methods(m)?
        };
    }
    if args.mondrian.is_some() {
        cfg.mondrian = args.mondrian;
    }
    if let Some(a) = args.adjust {
        cfg.adjust = a;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| Error::Config("no output directory (--out)".into()))?;
    if cfg.inputs.is_empty() {
        return Err(Error::Config("no input files (--input)".into()));
    }
    let mut samples = Vec::new();
    for p in &cfg.inputs {
        samples.extend(load(p, &cfg.scale)?);
    }
    let result = run_experiment(&cfg, &samples)?;
    emit_report(&result.report, &out)?;
    write_jsonl(&out.join("intervals.jsonl"), &result.intervals)?;
    print!("{}", render_summary(&result.report));
    Ok(())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Extract {
            input,
            out,
            floor,
            scale,
        } => {
            let scale = RatingScale::new(scale)?;
            let mut cfg = ExtractorConfig::default();
            if let Some(f) = floor {
                cfg.floor = f;
            }
            let records: Vec<ExtractionRecord> = read_records(&input)?;
            let (lines, summary) = extract_all(&records, &scale, &cfg);
            write_jsonl(&out, &lines)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if lines.is_empty() {
                return Err(Error::Data("no transcript yielded a score".into()));
            }
            Ok(())
        }
        Command::Synth {
            generator,
            n,
            seed,
            out,
            oracle,
        } => {
            let data = generate(&SyntheticSpec {
                n,
                generator: Generator::by_name(&generator)?,
                seed,
                scale: RatingScale::default(),
            })?;
            write_jsonl(&out, &data.samples)?;
            if let Some(p) = oracle {
                write_jsonl(&p, &data.oracle)?;
            }
            Ok(())
        }
        Command::Run(args) => run(args),
        Command::Fuse { inputs, out, scale } => {
            let scale = RatingScale::new(scale)?;
            let mut judges = Vec::new();
            for spec in &inputs {
                let (name, path) = spec
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("expected judge=path, got {spec:?}")))?;
                judges.push((name.to_string(), load(Path::new(path), &scale)?));
            }
            let fused = fuse(&judges, &scale)?;
            write_jsonl(&out, &fused.samples)?;
            eprintln!(
                "fused {} samples, dropped {} ids",
                fused.samples.len(),
                fused.dropped
            );
            Ok(())
        }
        Command::Report { input, out } => {
            let report = load_report(&input)?;
            if let Some(dir) = out {
                emit_report(&report, &dir)?;
            }
            print!("{}", render_summary(&report));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
