use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use softcover::exponents::Selection;
use softcover::simulator::CodebookKind;
use softcover::{Channel64, Distribution64, LogBase};
use std::path::Path;

/// Tolerance on row sums accepted from channel files before renormalizing.
pub const FILE_TOLERANCE: f64 = 1e-9;

/// On-disk channel description: `{"input": [...], "channel": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub input: Vec<f64>,
    pub channel: Vec<Vec<f64>>,
}

impl ChannelSpec {
    pub fn load(path: &str) -> CliResult<Self> {
        let text = std::fs::read_to_string(Path::new(path))
            .map_err(|e| CliError::validation("--channel", format!("cannot read {path}: {e}")))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_string(),
            message: format!("line {} column {}: {e}", e.line(), e.column()),
        })
    }

    pub fn build(&self) -> CliResult<(Distribution64, Channel64)> {
        let p = Distribution64::with_tolerance(self.input.clone(), FILE_TOLERANCE)
            .map_err(|e| CliError::validation("input", e.to_string()))?;
        let w = Channel64::with_tolerance(self.channel.clone(), FILE_TOLERANCE)
            .map_err(|e| CliError::validation("channel", e.to_string()))?;
        if p.len() != w.input_size() {
            return Err(CliError::validation(
                "input",
                format!(
                    "{} symbols but the channel has {} rows",
                    p.len(),
                    w.input_size()
                ),
            ));
        }
        Ok((p, w))
    }
}

/// Parses `start:stop:step` (endpoints inclusive within 1e-12), a comma
/// list, or a single value.
pub fn parse_rates(spec: &str) -> CliResult<Vec<f64>> {
    let num = |s: &str| -> CliResult<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::validation("--rates", format!("`{s}` is not a finite number")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err(CliError::validation(
                    "--rates",
                    "need stop >= start and step > 0",
                ));
            }
            let count = ((stop - start) / step).ceil() as usize + 1;
            if count > 1_000_000 {
                return Err(CliError::validation("--rates", "more than 10^6 rates"));
            }
            Ok((0..=count)
                .map(|i| start + i as f64 * step)
                .filter(|&r| r <= stop + 1e-12)
                .collect())
        }
        [_] => spec.split(',').map(num).collect(),
        _ => Err(CliError::validation(
            "--rates",
            "expected start:stop:step or a comma list",
        )),
    }
}

pub fn parse_list(flag: &'static str, spec: &str) -> CliResult<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::validation(flag, format!("`{s}` is not a finite number")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Exponent,
    Sweep,
    Mi,
    FiniteN,
    Simulate,
    CheckBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Fully resolved invocation. Every output echoes it, and `replay` accepts
/// it back, so a run can be repeated exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub channel_path: Option<String>,
    #[serde(default)]
    pub channel: Option<ChannelSpec>,
    pub base: String,
    #[serde(default)]
    pub rates: Vec<f64>,
    #[serde(default)]
    pub which: Vec<String>,
    #[serde(default)]
    pub n: Option<u32>,
    #[serde(default)]
    pub replicas: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub poisson: bool,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub integer_m: bool,
    #[serde(default)]
    pub order: Option<f64>,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    pub format: Format,
    #[serde(default)]
    pub out: Option<String>,
}

impl RunConfig {
    pub fn base(&self) -> CliResult<LogBase> {
        self.base.parse().map_err(|_| {
            CliError::validation("--base", format!("`{}` (expected bits or nats)", self.base))
        })
    }

    pub fn kind(&self) -> CliResult<CodebookKind> {
        self.kind
            .as_deref()
            .unwrap_or("iid")
            .parse()
            .map_err(|e: softcover::Error| CliError::validation("--kind", e.to_string()))
    }

    pub fn selections(&self) -> CliResult<Vec<Selection>> {
        if self.which.is_empty() {
            return Ok(Selection::standard());
        }
        self.which
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|e: softcover::Error| CliError::validation("--which", e.to_string()))
            })
            .collect()
    }

    pub fn channel(&self) -> CliResult<(Distribution64, Channel64)> {
        self.channel
            .as_ref()
            .ok_or_else(|| CliError::validation("--channel", "a channel file is required"))?
            .build()
    }

    pub fn single_rate(&self) -> CliResult<f64> {
        match self.rates.as_slice() {
            [r] => Ok(*r),
            _ => Err(CliError::validation(
                "--rate",
                "exactly one rate is required",
            )),
        }
    }

    pub fn require_n(&self) -> CliResult<u32> {
        self.n
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::validation("--n", "a block length n >= 1 is required"))
    }

    /// Checks everything that does not need the numerics.
    pub fn validate(&self) -> CliResult<()> {
        self.base()?;
        self.selections()?;
        self.kind()?;
        if self.format == Format::Csv && self.command != Command::Sweep {
            return Err(CliError::validation(
                "--format",
                "csv output is only available for sweep",
            ));
        }
        if self.command != Command::CheckBounds {
            self.channel()?;
        }
        if self.rates.iter().any(|r| !(*r > 0.0)) {
            return Err(CliError::validation("--rate", "rates must be positive"));
        }
        match self.command {
            Command::Exponent | Command::FiniteN | Command::Simulate => {
                self.single_rate()?;
            }
            Command::Sweep if self.rates.is_empty() => {
                return Err(CliError::validation(
                    "--rates",
                    "at least one rate is required",
                ));
            }
            _ => {}
        }
        if matches!(self.command, Command::FiniteN | Command::Simulate) {
            self.require_n()?;
        }
        if let Some(o) = self.order {
            if !(o > 0.0) {
                return Err(CliError::validation("--order", "order must be positive"));
            }
        }
        Ok(())
    }
}
