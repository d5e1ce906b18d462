//! `spoofaug` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or per-file failure, 2 configuration or
//! usage error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audio::read_wav;
use crate::error::{Error, Result};
use crate::eval::{
    compute_eer, fuse_score_sets, load_scores, pooled_eer, write_report, write_scores, EvalReport,
    FusionInfo, GroupBy, PooledTable, ScoreSet,
};
use crate::pipeline::{run_augment_pipeline, PipelineConfig, PipelineMode, RunOptions};
use crate::stft::{compute_stft, StftConfig, Window};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "spoofaug", version, about = "Audio augmentation and anti-spoofing evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Augment a corpus of WAV files (codec, LPF, MaskedSpec stages)
    Augment(PipelineArgs),
    /// Augment feature files (.safm / .csv) with MaskedFeature and normalization
    Features(PipelineArgs),
    /// Equal error rate of a score file
    Eer { scores: PathBuf },
    /// Fuse score files by normalized weighted mean
    Fuse {
        #[arg(required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Per-attack or per-codec pooled EER
    Pooled {
        scores: PathBuf,
        #[arg(long, value_enum)]
        by: GroupArg,
    },
    /// JSON report: overall EER, pooled tables, fusion composition
    Report {
        /// One score file, or several to fuse first
        #[arg(required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Dump STFT magnitudes of a WAV file as CSV
    Inspect {
        wav: PathBuf,
        #[arg(long)]
        stft_csv: PathBuf,
        #[arg(long, default_value_t = 512)]
        frame_size: usize,
        #[arg(long, default_value_t = 256)]
        hop: usize,
        #[arg(long, value_enum, default_value_t = WindowArg::Hann)]
        window: WindowArg,
    },
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub emit_provenance: bool,
    /// Overrides the config's worker count
    #[arg(long)]
    pub parallelism: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GroupArg {
    Attack,
    Codec,
}

impl From<GroupArg> for GroupBy {
    fn from(g: GroupArg) -> Self {
        match g {
            GroupArg::Attack => GroupBy::Attack,
            GroupArg::Codec => GroupBy::Codec,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WindowArg {
    Hann,
    Rectangular,
}

/// Percentage with two decimals, e.g. `4.37%`.
pub fn format_percent(rate: f64) -> String {
    format!("{:.2}%", rate * 100.0)
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing normal output to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<ScoreSet>> {
    paths.iter().map(load_scores).collect()
}

fn print_table(out: &mut dyn Write, table: &PooledTable) -> Result<()> {
    for (group, row) in table {
        match &row.result {
            Some(r) => writeln!(out, "{group}\t{}", format_percent(r.eer))?,
            None => writeln!(out, "{group}\tundefined")?,
        }
    }
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Augment(args) => run_pipeline(args, PipelineMode::Audio, out),
        Command::Features(args) => run_pipeline(args, PipelineMode::Features, out),
        Command::Eer { scores } => {
            let r = compute_eer(&load_scores(scores)?)?;
            writeln!(out, "EER: {}", format_percent(r.eer))?;
            writeln!(out, "threshold: {}", r.threshold)?;
            Ok(EXIT_OK)
        }
        Command::Fuse {
            inputs,
            weights,
            output,
        } => {
            let fused = fuse_score_sets(&load_all(&inputs)?, weights.as_deref())?;
            write_scores(&fused, &output)?;
            writeln!(out, "fused {} sets into {}", inputs.len(), output.display())?;
            Ok(EXIT_OK)
        }
        Command::Pooled { scores, by } => {
            print_table(out, &pooled_eer(&load_scores(scores)?, by.into())?)?;
            Ok(EXIT_OK)
        }
        Command::Report {
            inputs,
            weights,
            seed,
            output,
        } => {
            let sets = load_all(&inputs)?;
            let (set, fusion) = if sets.len() > 1 {
                let w = weights.clone().unwrap_or_else(|| vec![1.0; sets.len()]);
                let fused = fuse_score_sets(&sets, Some(&w))?;
                let info = FusionInfo {
                    inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
                    weights: w,
                    method: "min-max normalized weighted mean".into(),
                };
                (fused, Some(info))
            } else {
                (sets.into_iter().next().unwrap(), None)
            };
            let mut report = EvalReport::new(compute_eer(&set)?);
            report.pooled_by_attack = optional_table(&set, GroupBy::Attack)?;
            report.pooled_by_codec = optional_table(&set, GroupBy::Codec)?;
            report.fusion = fusion;
            if let Some(seed) = seed {
                report = report.with_provenance("seed", seed)?;
            }
            write_report(&report, &output)?;
            writeln!(out, "EER: {}", format_percent(report.overall.eer))?;
            Ok(EXIT_OK)
        }
        Command::Inspect {
            wav,
            stft_csv,
            frame_size,
            hop,
            window,
        } => {
            let window = match window {
                WindowArg::Hann => Window::Hann,
                WindowArg::Rectangular => Window::Rectangular,
            };
            let cfg = StftConfig::new(frame_size, hop, window)?;
            let spec = compute_stft(&read_wav(&wav)?, &cfg)?;
            let mut w = BufWriter::new(File::create(&stft_csv)?);
            spec.write_magnitude_csv(&mut w)?;
            w.flush()?;
            writeln!(out, "{} frames x {} bins", spec.frames(), spec.bin_count())?;
            Ok(EXIT_OK)
        }
    }
}

fn optional_table(set: &ScoreSet, by: GroupBy) -> Result<Option<PooledTable>> {
    match pooled_eer(set, by) {
        Ok(t) => Ok(Some(t)),
        Err(Error::MissingTag(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn run_pipeline(args: PipelineArgs, mode: PipelineMode, out: &mut dyn Write) -> Result<i32> {
    let mut config = PipelineConfig::load(&args.config)?;
    if let Some(p) = args.parallelism {
        config.parallelism = p;
    }
    let summary = run_augment_pipeline(
        &config,
        RunOptions {
            mode,
            emit_provenance: args.emit_provenance,
        },
    )?;
    writeln!(
        out,
        "processed {} files: {} ok, {} failed; manifest {}",
        summary.processed,
        summary.succeeded,
        summary.failed,
        summary.manifest.display()
    )?;
    Ok(summary.exit_code())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_format() {
        assert_eq!(format_percent(0.0), "0.00%");
        assert_eq!(format_percent(1.0), "100.00%");
        assert_eq!(format_percent(0.0437), "4.37%");
    }

    #[test]
    fn usage_error_exit_code() {
        let mut out = Vec::new();
        assert_eq!(run(["spoofaug", "bogus"], &mut out), EXIT_USAGE);
        assert_eq!(run(["spoofaug", "pooled", "x.tsv", "--by", "speaker"], &mut out), EXIT_USAGE);
    }

    #[test]
    fn missing_scores_is_failure() {
        let mut out = Vec::new();
        assert_eq!(run(["spoofaug", "eer", "/no/such.tsv"], &mut out), EXIT_FAILURE);
    }

    #[test]
    fn missing_config_is_usage_error() {
        let mut out = Vec::new();
        assert_eq!(run(["spoofaug", "augment", "--config", "/no/such.toml"], &mut out), EXIT_USAGE);
    }
}
