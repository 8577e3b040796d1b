use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};

use sst_core::metrics::{MetricId, RankingId};
use sst_core::pipeline::{self, PartialConfig, RunConfig};
use sst_core::synth::SynthConfig;

/// Superspreader ranking, dismantling and cohort analysis for retweet corpora.
///
/// Settings resolve as: flag, then SST_* environment variable, then the
/// --config TOML file, then the built-in default.
#[derive(Debug, Parser)]
#[command(name = "sst", version)]
struct Cli {
    /// TOML file with defaults for any run setting.
    #[arg(long, global = true, env = "SST_CONFIG")]
    config: Option<PathBuf>,

    /// Worker thread cap.
    #[arg(long, short = 'j', global = true, env = "SST_JOBS")]
    jobs: Option<usize>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(flatten)]
    run: RunArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Retweet records, JSON lines or `.csv`.
    #[arg(long, short, global = true, env = "SST_INPUT")]
    input: Option<PathBuf>,
    #[arg(long, short, global = true, env = "SST_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true, env = "SST_CONSPIRACY_THRESHOLD")]
    conspiracy_threshold: Option<f64>,
    #[arg(long, global = true, env = "SST_BOT_THRESHOLD")]
    bot_threshold: Option<f64>,
    /// Superspreader share of the H-index ranking.
    #[arg(long, global = true, env = "SST_SS_FRACTION")]
    ss_fraction: Option<f64>,
    /// `ceil` or `floor` for the superspreader cutoff.
    #[arg(long, global = true, env = "SST_ROUNDING")]
    rounding: Option<String>,
    /// CSV of `hashtag,orientation` rows.
    #[arg(long, global = true, env = "SST_ORIENTATION_LEXICON")]
    orientation_lexicon: Option<PathBuf>,
    /// One conspiracy hashtag per line.
    #[arg(long, global = true, env = "SST_CONSPIRACY_HASHTAGS")]
    conspiracy_hashtags: Option<PathBuf>,
    /// One stop word per line.
    #[arg(long, global = true, env = "SST_STOPWORDS")]
    stopwords: Option<PathBuf>,
    #[arg(long, global = true, env = "SST_SEED")]
    seed: Option<u64>,
    /// Removal steps compared when testing curve distributions.
    #[arg(long, global = true, env = "SST_CVM_WINDOW")]
    cvm_window: Option<usize>,
    /// Minimum co-occurrence count for exported hashtag edges.
    #[arg(long, global = true, env = "SST_EDGE_FLOOR")]
    edge_floor: Option<u64>,
    /// Length of hashtag and word tables.
    #[arg(long, global = true, env = "SST_TOP_N")]
    top_n: Option<usize>,
    /// Rank every original tweeter, not only conspiracy endorsers.
    #[arg(long, global = true, env = "SST_SKIP_FILTER")]
    skip_filter: bool,
}

impl RunArgs {
    fn into_partial(self, jobs: Option<usize>) -> PartialConfig {
        PartialConfig {
            input: self.input,
            output_dir: self.output_dir,
            conspiracy_threshold: self.conspiracy_threshold,
            bot_threshold: self.bot_threshold,
            ss_fraction: self.ss_fraction,
            rounding: self.rounding,
            orientation_lexicon: self.orientation_lexicon,
            conspiracy_hashtags: self.conspiracy_hashtags,
            stopwords: self.stopwords,
            seed: self.seed,
            cvm_window: self.cvm_window,
            edge_floor: self.edge_floor,
            top_n: self.top_n,
            skip_filter: self.skip_filter.then_some(true),
            jobs,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate, deduplicate and canonicalize the input corpus.
    Ingest,
    /// Compute all 27 influence metrics.
    Rank,
    /// Remove users in ranking order and compare the resulting curves.
    Dismantle {
        /// Metrics to dismantle by (all when omitted; pass the flag with no
        /// values for the optimal curve only).
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        metrics: Option<Vec<MetricId>>,
        /// Curve pair `a:b` to difference and compare; repeatable.
        #[arg(long = "pair", value_parser = parse_pair)]
        pairs: Vec<(RankingId, RankingId)>,
    },
    /// Label cohorts and compare their content.
    Analyze,
    /// Write a seeded synthetic corpus.
    Synth {
        #[arg(long, default_value_t = 1000)]
        users: usize,
        #[arg(long, default_value_t = 1.5)]
        zipf_exponent: f64,
        #[arg(long, default_value_t = 60)]
        max_tweets: u32,
        #[arg(long, default_value_t = 0.13)]
        bot_fraction: f64,
        #[arg(long)]
        max_records: Option<usize>,
    },
    /// Ingest, rank, dismantle and analyze in one go.
    Report,
}

fn parse_pair(s: &str) -> Result<(RankingId, RankingId), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected `a:b`, got {s:?}"))?;
    let a = a.parse::<RankingId>().map_err(|e| e.to_string())?;
    let b = b.parse::<RankingId>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .parse_env("SST_LOG")
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => PartialConfig::load(p)?,
        None => PartialConfig::default(),
    };
    let layered = cli.run.into_partial(cli.jobs).over(file);
    if let Some(jobs) = layered.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker pool")?;
    }
    let cfg = layered.resolve()?;

    match cli.command {
        Command::Ingest => {
            let ingested = pipeline::cmd_ingest(&cfg)?;
            let s = &ingested.summary;
            eprintln!(
                "{} read, {} retained, {} duplicates, {} dropped",
                s.records_read,
                s.retained,
                s.duplicates,
                s.dropped()
            );
        }
        Command::Rank => {
            let corpus = load(&cfg)?;
            let tables = pipeline::cmd_rank(&corpus, &cfg)?;
            log::info!("wrote {} metric tables", tables.len());
        }
        Command::Dismantle { metrics, pairs } => {
            let corpus = load(&cfg)?;
            let metrics = metrics.unwrap_or_else(MetricId::all);
            let pairs = (!pairs.is_empty()).then_some(pairs.as_slice());
            let outcome = pipeline::cmd_dismantle(&corpus, &cfg, &metrics, pairs)?;
            log::info!(
                "{} curves, {} superspreaders",
                outcome.curves.len(),
                outcome.superspreaders.len()
            );
        }
        Command::Analyze => {
            let corpus = load(&cfg)?;
            pipeline::cmd_analyze(&corpus, &cfg)?;
        }
        Command::Synth {
            users,
            zipf_exponent,
            max_tweets,
            bot_fraction,
            max_records,
        } => {
            let synth = SynthConfig {
                users,
                zipf_exponent,
                max_tweets,
                bot_fraction,
                seed: cfg.seed,
                max_records,
                ..Default::default()
            };
            let path = pipeline::cmd_synth(&cfg, &synth)?;
            log::info!("wrote {}", path.display());
        }
        Command::Report => {
            pipeline::cmd_report(&cfg)?;
        }
    }
    Ok(())
}

fn load(cfg: &RunConfig) -> Result<sst_core::corpus::Corpus> {
    let input = cfg.input().context("--input is required")?.to_path_buf();
    let ingested = pipeline::load_input(cfg).with_context(|| format!("reading {}", input.display()))?;
    Ok(ingested.corpus)
}
