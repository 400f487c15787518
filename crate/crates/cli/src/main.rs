use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};
use sstecg::pipeline::{cmd_detect, cmd_quality, cmd_trainval, PipelineConfig};
use sstecg::synth::{generate, write_csv, AnhSpec};
use sstecg::wfdb::{list_records, read_record, split_ds};
use sstecg::Error;

/// ECG beat detection, phase features and beat classification on WFDB records.
#[derive(Parser, Debug)]
#[command(name = "sstecg", version)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// `key = value` configuration file applied before the flags.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Directory holding the `.hea`/`.dat`/`.atr` files.
    #[arg(long, global = true, env = "SSTECG_DATA_DIR")]
    data_dir: Option<PathBuf>,

    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// primary, secondary or both.
    #[arg(long, global = true)]
    leads: Option<String>,

    /// Comma-separated record ids (default: all).
    #[arg(long, global = true)]
    records: Option<String>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Beat matching window in ms.
    #[arg(long, global = true)]
    tolerance_ms: Option<f64>,

    /// Any configuration key, e.g. `--set detector.beta=0.1`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    show_config: bool,

    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect R-peaks with and without phase-based recovery and score them.
    Detect,
    /// Extract features, fit on DS1 and evaluate on DS2.
    Trainval,
    /// Cross-validate KNN beat-quality classification.
    Quality {
        /// CSV with record_id, beat_index, quality (LQ/MQ/HQ).
        #[arg(long)]
        labels: PathBuf,
    },
    /// Check the DS1/DS2 beat counts of the records in the data directory.
    Split,
    /// Write a synthetic ECG with ground-truth peaks as CSV.
    Synth {
        #[arg(long, default_value_t = 1.2)]
        rate: f64,
        #[arg(long, default_value_t = 60.0)]
        duration: f64,
        #[arg(long, default_value_t = 360.0)]
        fs: f64,
        #[arg(long, default_value_t = 0.0)]
        noise_variance: f64,
        #[arg(long)]
        output: PathBuf,
    },
}

fn build_config(c: &Common) -> anyhow::Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &c.config {
        cfg.apply_file(path)?;
    }
    if let Some(d) = &c.data_dir {
        cfg.data_dir = d.clone();
    }
    if let Some(d) = &c.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(l) = &c.leads {
        cfg.set("leads", l)?;
    }
    if let Some(r) = &c.records {
        cfg.set("records", r)?;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(t) = c.tolerance_ms {
        cfg.tolerance_ms = t;
    }
    for kv in &c.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("--set expects KEY=VALUE, got '{kv}'"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Integrity(_)) => 3,
        Some(Error::Convergence(_)) => 4,
        _ => 2,
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let cfg = build_config(&cli.common)?;
    if cli.common.show_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(0);
    }
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    info!("config fingerprint {}", cfg.fingerprint());
    match &cli.command {
        Command::Detect => {
            let report = cmd_detect(&cfg)?;
            for l in &report.leads {
                println!(
                    "{:<9} base      TP {:>7} FN {:>5} FP {:>5}  Se {:6.2}%  +P {:6.2}%",
                    l.lead, l.base.tp, l.base.fn_, l.base.fp, l.base.se, l.base.ppv
                );
                println!(
                    "{:<9} recovery  TP {:>7} FN {:>5} FP {:>5}  Se {:6.2}%  +P {:6.2}%",
                    l.lead, l.recovery.tp, l.recovery.fn_, l.recovery.fp, l.recovery.se, l.recovery.ppv
                );
            }
            if !report.skipped.is_empty() {
                for s in &report.skipped {
                    error!("skipped {}: {}", s.record, s.reason);
                }
                return Ok(2);
            }
        }
        Command::Trainval => {
            let report = cmd_trainval(&cfg)?;
            for t in &report.tasks {
                let se: Vec<String> = t
                    .test
                    .classes
                    .iter()
                    .zip(&t.test.se)
                    .map(|(c, s)| format!("{c} {}", s.map_or("-".to_string(), |v| format!("{:.2}", 100.0 * v))))
                    .collect();
                println!(
                    "{:<10} {:<9} ACC {:6.2}%  Se: {}",
                    t.task.name(),
                    t.lead,
                    100.0 * t.test.acc,
                    se.join(", ")
                );
            }
        }
        Command::Quality { labels } => {
            let q = cmd_quality(&cfg, labels)?;
            println!("quality KNN (k={}, {} folds): ACC {:.2}%", q.k, q.folds, 100.0 * q.report.acc);
        }
        Command::Split => {
            let summaries = list_records(&cfg.data_dir)?
                .iter()
                .map(|p| read_record(p).map(|r| r.summary()))
                .collect::<Result<Vec<_>, _>>()?;
            let split = split_ds(&summaries)?;
            println!("DS1: {}", split.ds1_records.join(" "));
            println!("DS2: {}", split.ds2_records.join(" "));
            println!("beat counts match the reference table");
        }
        Command::Synth {
            rate,
            duration,
            fs,
            noise_variance,
            output,
        } => {
            let spec = AnhSpec::ecg(*rate).with_noise(*noise_variance);
            let truth = generate(&spec, *fs, *duration, cfg.seed)?;
            write_csv(&truth, output)?;
            println!("{} samples, {} peaks -> {}", truth.signal.len(), truth.true_peaks.len(), output.display());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
