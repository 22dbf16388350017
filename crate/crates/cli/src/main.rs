use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use treeuq::data::{make_paper_mixture, sample_mixture};
use treeuq::experiment::{emit_report, run_experiment_traced, ExperimentConfig, Preset, ReportFormat};
use treeuq_cli::fetch::{self, FetchOptions};

#[derive(Parser)]
#[command(name = "treeuq", version, about = "Randomised and Bayesian decision-tree ensembles with uncertainty envelopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Desk,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        /// Overrides the master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "markdown")]
        format: FormatArg,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Extra confidence levels to tabulate, e.g. `0.9,0.95,0.999`.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<f64>,
        /// Write the Bayesian chain trace (restart, step, leaves, log posterior).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print the resolved config and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Download a benchmark dataset and convert it to CSV.
    Fetch {
        dataset: String,
        /// Source URL (repeat for multi-file datasets); `file://` works.
        #[arg(long = "url")]
        urls: Vec<String>,
        /// Expected SHA-256 of the raw download.
        #[arg(long)]
        sha256: Option<String>,
        #[arg(long, env = fetch::CACHE_ENV)]
        cache_dir: Option<PathBuf>,
    },
    /// Sample the synthetic Gaussian mixture to CSV.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            preset,
            seed,
            format,
            out,
            sweep,
            trace,
            print_config,
        } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path)?,
                None if print_config => ExperimentConfig::default(),
                None => anyhow::bail!("--config is required"),
            };
            if let Some(p) = preset {
                cfg.apply_preset(match p {
                    PresetArg::Desk => Preset::Desk,
                    PresetArg::Paper => Preset::Paper,
                });
            }
            if let Some(s) = seed {
                cfg.experiment.seed = s;
            }
            if !sweep.is_empty() {
                cfg.experiment.sweep = sweep;
            }
            if print_config {
                print!("{}", cfg.to_toml());
                return Ok(());
            }
            let mut trace_file = match &trace {
                Some(path) => Some(std::io::BufWriter::new(
                    fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
                )),
                None => None,
            };
            let report = run_experiment_traced(&cfg, trace_file.as_mut().map(|w| w as &mut dyn Write))?;
            if let Some(mut w) = trace_file {
                w.flush().context("writing chain trace")?;
            }
            let format = match format {
                FormatArg::Csv => ReportFormat::Csv,
                FormatArg::Markdown => ReportFormat::Markdown,
            };
            let text = emit_report(&report, format);
            match out {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
            eprintln!("finished in {:.1}s", report.elapsed.as_secs_f64());
            Ok(())
        }
        Command::Fetch {
            dataset,
            urls,
            sha256,
            cache_dir,
        } => {
            let cache = cache_dir.unwrap_or_else(fetch::default_cache_dir);
            let info = fetch::lookup(&dataset)?;
            let got = fetch::fetch_dataset(&dataset, &cache, &FetchOptions { urls, sha256 })?;
            println!(
                "{} {} rows{} sha256={}",
                got.path.display(),
                got.rows,
                if got.from_cache { " (cached)" } else { "" },
                got.sha256
            );
            println!(
                "[dataset]\nkind = \"csv\"\nname = \"{}\"\npath = \"{}\"\ntrain = {}\ntest = {}",
                info.id,
                got.path.display(),
                info.train,
                info.test
            );
            Ok(())
        }
        Command::Synth { n, seed, out } => {
            let data = sample_mixture(&make_paper_mixture(), n, seed)?;
            let file = fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            data.write_csv(std::io::BufWriter::new(file))?;
            Ok(())
        }
    }
}
