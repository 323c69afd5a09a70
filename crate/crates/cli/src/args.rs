use crate::config::{parse_list, parse_rates, ChannelSpec, Command, Format, RunConfig};
use crate::error::{CliError, CliResult};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "softcover",
    version,
    about = "Soft-covering exponents of discrete memoryless channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BaseArg {
    Bits,
    Nats,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Iid,
    Cc,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON file `{"input": [...], "channel": [[...], ...]}`.
    #[arg(long)]
    pub channel: String,
    /// Logarithm base for rates and reported values.
    #[arg(long, value_enum, default_value = "bits")]
    pub base: BaseArg,
    /// Output path, `-` for stdout.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Evaluate exponents at one rate.
    Exponent {
        #[command(flatten)]
        common: Common,
        /// Comma-separated exponents, e.g. `alpha,half_zeta` (default: all).
        #[arg(long, value_delimiter = ',')]
        which: Vec<String>,
        #[arg(long)]
        rate: f64,
    },
    /// Tabulate exponents over a rate grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        which: Vec<String>,
        /// `start:stop:step` (inclusive) or a comma list.
        #[arg(long)]
        rates: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Mutual information and related measures.
    Mi {
        #[command(flatten)]
        common: Common,
        /// Also report Sibson and Csiszár measures of this order.
        #[arg(long)]
        order: Option<f64>,
    },
    /// Finite-blocklength exponent by type enumeration, with its constants.
    FiniteN {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value = "iid")]
        kind: KindArg,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Defaults to the midpoint between the exponent and R/2.
        #[arg(long)]
        r: Option<f64>,
        /// Use the constants for M = ⌈exp(nR)⌉.
        #[arg(long)]
        integer_m: bool,
    },
    /// Monte Carlo estimate of the expected total variation.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 200)]
        replicas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "iid")]
        kind: KindArg,
        #[arg(long)]
        poisson: bool,
        /// Deviation thresholds for a concentration table, comma separated.
        #[arg(long)]
        t_grid: Option<String>,
    },
    /// Run the inequality suite.
    CheckBounds {
        #[arg(long)]
        out: Option<String>,
    },
    /// Re-run the configuration echoed in a previous output.
    Replay {
        file: String,
        #[arg(long)]
        out: Option<String>,
    },
}

impl BaseArg {
    fn name(self) -> String {
        match self {
            BaseArg::Bits => "bits".into(),
            BaseArg::Nats => "nats".into(),
        }
    }
}

impl KindArg {
    fn name(self) -> String {
        match self {
            KindArg::Iid => "iid".into(),
            KindArg::Cc => "cc".into(),
        }
    }
}

fn base_config(command: Command, common: &Common) -> CliResult<RunConfig> {
    Ok(RunConfig {
        command,
        channel_path: Some(common.channel.clone()),
        channel: Some(ChannelSpec::load(&common.channel)?),
        base: common.base.name(),
        rates: Vec::new(),
        which: Vec::new(),
        n: None,
        replicas: None,
        seed: None,
        kind: None,
        poisson: false,
        delta: None,
        r: None,
        integer_m: false,
        order: None,
        t_grid: Vec::new(),
        format: Format::Json,
        out: common.out.clone(),
    })
}

impl Cli {
    /// Turns parsed flags into a validated [`RunConfig`].
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let cfg = match &self.command {
            Cmd::Exponent {
                common,
                which,
                rate,
            } => RunConfig {
                which: which.clone(),
                rates: vec![*rate],
                ..base_config(Command::Exponent, common)?
            },
            Cmd::Sweep {
                common,
                which,
                rates,
                format,
            } => RunConfig {
                which: which.clone(),
                rates: parse_rates(rates)?,
                format: match format {
                    FormatArg::Json => Format::Json,
                    FormatArg::Csv => Format::Csv,
                },
                ..base_config(Command::Sweep, common)?
            },
            Cmd::Mi { common, order } => RunConfig {
                order: *order,
                ..base_config(Command::Mi, common)?
            },
            Cmd::FiniteN {
                common,
                rate,
                n,
                kind,
                delta,
                r,
                integer_m,
            } => RunConfig {
                rates: vec![*rate],
                n: Some(*n),
                kind: Some(kind.name()),
                delta: Some(*delta),
                r: *r,
                integer_m: *integer_m,
                ..base_config(Command::FiniteN, common)?
            },
            Cmd::Simulate {
                common,
                rate,
                n,
                replicas,
                seed,
                kind,
                poisson,
                t_grid,
            } => RunConfig {
                rates: vec![*rate],
                n: Some(*n),
                replicas: Some(*replicas),
                seed: Some(*seed),
                kind: Some(kind.name()),
                poisson: *poisson,
                t_grid: match t_grid {
                    Some(s) => parse_list("--t-grid", s)?,
                    None => Vec::new(),
                },
                ..base_config(Command::Simulate, common)?
            },
            Cmd::CheckBounds { out } => RunConfig {
                command: Command::CheckBounds,
                channel_path: None,
                channel: None,
                base: "bits".into(),
                rates: Vec::new(),
                which: Vec::new(),
                n: None,
                replicas: None,
                seed: None,
                kind: None,
                poisson: false,
                delta: None,
                r: None,
                integer_m: false,
                order: None,
                t_grid: Vec::new(),
                format: Format::Json,
                out: out.clone(),
            },
            Cmd::Replay { file, out } => {
                let mut cfg = load_replay(file)?;
                if out.is_some() {
                    cfg.out = out.clone();
                }
                cfg
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reads a configuration either bare or from the `config` field of an output.
pub fn load_replay(path: &str) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation("replay file", format!("cannot read {path}: {e}")))?;
    let parse_err = |e: serde_json::Error| CliError::Parse {
        path: path.to_string(),
        message: format!("line {} column {}: {e}", e.line(), e.column()),
    };
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(parse_err)?;
    let inner = doc.get("config").cloned().unwrap_or(doc);
    let mut cfg: RunConfig = serde_json::from_value(inner).map_err(parse_err)?;
    if cfg.channel.is_none() {
        if let Some(p) = &cfg.channel_path {
            cfg.channel = Some(ChannelSpec::load(p)?);
        }
    }
    Ok(cfg)
}
