//! Command-line definitions and the merge of config file, environment and
//! flags into one [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use uidlab_core::measures::Measure;

use crate::commands::{self, Context, Summary};
use crate::config::{ComponentArg, HeldOutArg, RunConfig};
use crate::error::CliError;

pub const DEFAULT_OUT: &str = "uidlab-out";

/// Surprisal uniformity measures, MT metrics, MBR reranking and GA decoding.
#[derive(Debug, Parser)]
#[command(name = "uidlab", version)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, env = "UIDLAB_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "UIDLAB_SEED")]
    pub seed: Option<u64>,
    /// External scorer, `[id=]cmd:<command>` or `[id=]http:<url>`. Repeatable;
    /// the environment variable takes a `;`-separated list.
    #[arg(long = "scorer", global = true, env = "UIDLAB_SCORER", value_delimiter = ';')]
    pub scorers: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, env = "UIDLAB_OUT")]
    pub out: Option<PathBuf>,
    /// Per-batch scorer timeout in seconds.
    #[arg(long, global = true, env = "UIDLAB_SCORER_TIMEOUT")]
    pub scorer_timeout: Option<f64>,
    /// Bearer token for HTTP scorers.
    #[arg(long, global = true, env = "UIDLAB_HTTP_TOKEN", hide_env_values = true)]
    pub http_token: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-sequence uniformity measures and per-group summaries.
    Measure(MeasureArgs),
    /// Measure correlations between groups and quality threshold curves.
    Correlate(CorrelateArgs),
    /// Tally held-out scores of GA output against both baselines.
    Compare(InputArgs),
    /// Rank candidates by expected utility against each other.
    Mbr(MbrArgs),
    /// Genetic-algorithm decoding with robustness report.
    Ga(GaArgs),
    /// `ga` with a required negative-weight (adversarial) component.
    Adversarial(GaArgs),
    /// InfoNCE losses and a finite-difference gradient check.
    #[command(name = "infonce-check")]
    InfonceCheck(InfoNceArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct MeasureOpts {
    /// Comma-separated measure names (lv, cv, gv, sl, slor, gini, effort_uid, effort_linear).
    #[arg(long, value_delimiter = ',', env = "UIDLAB_MEASURES")]
    pub measures: Option<Vec<Measure>>,
    #[arg(long, env = "UIDLAB_K")]
    pub k: Option<f64>,
    /// Per-token constant of the UID effort.
    #[arg(long, env = "UIDLAB_C")]
    pub c: Option<f64>,
    /// Unigram corpus for SLOR (surprisal JSONL or plain text).
    #[arg(long)]
    pub unigram: Option<PathBuf>,
    #[arg(long)]
    pub smoothing: Option<f64>,
    /// One corpus mean for all groups.
    #[arg(long)]
    pub global_mean: bool,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Surprisal JSONL, or plain text with `--lm`.
    pub input: PathBuf,
    #[command(flatten)]
    pub opts: MeasureOpts,
    /// Comma-separated exponents for the superlinear-mean sweep.
    #[arg(long, value_delimiter = ',')]
    pub k_grid: Option<Vec<f64>>,
    /// Fetch surprisals for each input line from this HTTP endpoint.
    #[arg(long, env = "UIDLAB_LM")]
    pub lm: Option<String>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    pub input: PathBuf,
    /// Quality-score JSONL for the threshold curves.
    #[arg(long)]
    pub quality: Option<PathBuf>,
    #[command(flatten)]
    pub opts: MeasureOpts,
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    #[arg(long)]
    pub quality_system: Option<String>,
}

#[derive(Debug, Args)]
pub struct MbrArgs {
    pub input: PathBuf,
    /// Built-in metric or registered scorer id.
    #[arg(long, env = "UIDLAB_METRIC")]
    pub metric: Option<String>,
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long)]
    pub include_self: bool,
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct GaArgs {
    pub input: PathBuf,
    /// Fitness component `metric[:weight[:mode]]`, mode one of ref, src, mbr.
    /// Repeatable; replaces the configured components.
    #[arg(long = "fitness")]
    pub fitness: Vec<ComponentArg>,
    /// Held-out metric `metric[:mode]`.
    #[arg(long)]
    pub held_out: Option<HeldOutArg>,
    #[arg(long, env = "UIDLAB_GENERATIONS")]
    pub generations: Option<usize>,
    #[arg(long = "population", env = "UIDLAB_POPULATION")]
    pub population_size: Option<usize>,
    #[arg(long)]
    pub crossover_rate: Option<f64>,
    #[arg(long)]
    pub mutation_rate: Option<f64>,
    #[arg(long)]
    pub tournament_size: Option<usize>,
    #[arg(long)]
    pub elitism: Option<usize>,
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    #[arg(long)]
    pub wordlist: Option<PathBuf>,
    #[arg(long)]
    pub margin_optimized: Option<f64>,
    #[arg(long)]
    pub margin_held_out: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub adversarial_weight: Option<f64>,
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub evolving_pool: bool,
}

#[derive(Debug, Args)]
pub struct InfoNceArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Treat target embeddings as constants.
    #[arg(long)]
    pub frozen: bool,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_measure_opts(config: &mut RunConfig, o: &MeasureOpts) {
    let m = &mut config.measure;
    if o.measures.is_some() {
        m.measures = o.measures.clone();
    }
    set(&mut m.k, o.k);
    set(&mut m.c, o.c);
    if o.unigram.is_some() {
        m.unigram = o.unigram.clone();
    }
    set(&mut m.smoothing, o.smoothing);
    m.global_mean |= o.global_mean;
}

impl Cli {
    /// Loads the config file (if any) and applies environment and flag
    /// overrides. Flags and environment variables win over the file.
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if self.seed.is_some() {
            config.seed = self.seed;
        }
        if !self.scorers.is_empty() {
            config.scorers = self.scorers.clone();
        }
        if self.out.is_some() {
            config.out = self.out.clone();
        }
        set(&mut config.scorer_options.timeout_secs, self.scorer_timeout);
        if self.http_token.is_some() {
            config.scorer_options.http_token = self.http_token.clone();
        }
        match &self.command {
            Command::Measure(a) => {
                apply_measure_opts(&mut config, &a.opts);
                if a.k_grid.is_some() {
                    config.measure.k_grid = a.k_grid.clone();
                }
            }
            Command::Correlate(a) => {
                apply_measure_opts(&mut config, &a.opts);
                if a.thresholds.is_some() {
                    config.correlate.thresholds = a.thresholds.clone();
                }
                if a.quality_system.is_some() {
                    config.correlate.quality_system = a.quality_system.clone();
                }
            }
            Command::Compare(_) => {}
            Command::Mbr(a) => {
                set(&mut config.mbr.metric, a.metric.clone());
                if a.top_n.is_some() {
                    config.mbr.top_n = a.top_n;
                }
                config.mbr.include_self |= a.include_self;
                config.mbr.parallel |= a.parallel;
            }
            Command::Ga(a) | Command::Adversarial(a) => {
                let ga = &mut config.ga;
                if !a.fitness.is_empty() {
                    ga.fitness = a.fitness.iter().map(|c| c.0.clone()).collect();
                }
                if let Some(h) = &a.held_out {
                    ga.held_out = Some(h.0.clone());
                }
                let s = &mut ga.search;
                set(&mut s.generations, a.generations);
                set(&mut s.population_size, a.population_size);
                set(&mut s.crossover_rate, a.crossover_rate);
                set(&mut s.mutation_rate, a.mutation_rate);
                set(&mut s.tournament_size, a.tournament_size);
                set(&mut s.elitism, a.elitism);
                if a.dictionary.is_some() {
                    ga.dictionary = a.dictionary.clone();
                }
                if a.wordlist.is_some() {
                    ga.wordlist = a.wordlist.clone();
                }
                set(&mut ga.margins.margin_optimized, a.margin_optimized);
                set(&mut ga.margins.margin_held_out, a.margin_held_out);
                set(&mut ga.adversarial_weight, a.adversarial_weight);
                ga.parallel |= a.parallel;
                ga.evolving_pool |= a.evolving_pool;
            }
            Command::InfonceCheck(a) => {
                set(&mut config.infonce.h, a.h);
                set(&mut config.infonce.tolerance, a.tolerance);
                config.infonce.frozen_targets |= a.frozen;
            }
        }
        if let Some(seed) = config.seed {
            config.ga.search.seed = seed;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Runs the parsed command line.
pub fn execute(cli: &Cli) -> Result<Summary, CliError> {
    let config = cli.resolve_config()?;
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    match &cli.command {
        Command::Measure(a) => {
            let ctx = Context::local(config, out);
            match &a.lm {
                Some(url) => {
                    let fetched = commands::measure::fetch_input(url, &a.input, &ctx.out, &commands::http_options(&ctx.config))?;
                    commands::measure::run(&ctx, &fetched)
                }
                None => commands::measure::run(&ctx, &a.input),
            }
        }
        Command::Correlate(a) => commands::correlate::run(&Context::local(config, out), &a.input, a.quality.as_deref()),
        Command::Compare(a) => commands::compare::run(&Context::local(config, out), &a.input),
        Command::Mbr(a) => commands::mbr::run(&Context::connect(config, out)?, &a.input),
        Command::Ga(a) => commands::ga::run(&Context::connect(config, out)?, &a.input, false),
        Command::Adversarial(a) => commands::ga::run(&Context::connect(config, out)?, &a.input, true),
        Command::InfonceCheck(a) => commands::infonce::run(&Context::local(config, out), &a.input),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = std::env::temp_dir().join(format!("uidlab-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("config.json");
        std::fs::write(
            &path,
            r#"{"version":1,"seed":3,"ga":{"search":{"generations":7,"population_size":9}}}"#,
        )
        .unwrap();
        let cli = Cli::try_parse_from([
            "uidlab",
            "--config",
            path.to_str().unwrap(),
            "ga",
            "in.jsonl",
            "--generations",
            "11",
            "--fitness",
            "overlap:1:ref",
            "--adversarial-weight",
            "-0.5",
        ])
        .unwrap();
        let c = cli.resolve_config().unwrap();
        assert_eq!(c.ga.search.generations, 11);
        assert_eq!(c.ga.search.population_size, 9);
        assert_eq!(c.ga.search.seed, 3);
        assert_eq!(c.ga.adversarial_weight, -0.5);
        assert_eq!(c.ga.fitness.len(), 1);
        std::fs::remove_dir_all(&dir).ok();
    }
}
