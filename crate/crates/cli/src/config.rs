//! Run configuration: command-line flags over a flat `key = value` file over
//! defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use peakload::data::AggregationMode;
use peakload::{Error, IsoWeek};

/// How future weather is obtained for hybrid forecasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FutureExog {
    /// Weather observed over the forecast span, read from the dataset.
    #[default]
    Observed,
    /// Week-of-year means of the training weather.
    Climatology,
}

impl fmt::Display for FutureExog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FutureExog::Observed => "observed",
            FutureExog::Climatology => "climatology",
        })
    }
}

impl FromStr for FutureExog {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "observed" => Ok(FutureExog::Observed),
            "climatology" => Ok(FutureExog::Climatology),
            other => Err(Error::Config(format!(
                "future-exog {other:?}; expected observed or climatology"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub period: usize,
    pub max_order_sum: usize,
    /// Two-sided forecast interval coverage.
    pub level: f64,
    pub agg_mode: AggregationMode,
    pub seed: u64,
    pub train_end: IsoWeek,
    pub test_len: usize,
    pub horizon: usize,
    pub future_exog: FutureExog,
    pub out_dir: PathBuf,
    /// Search orders and weather terms together instead of in sequence.
    pub joint: bool,
    /// Regular differencing order replacing the KPSS-based suggestion.
    pub d: Option<usize>,
    /// Seasonal differencing order replacing the suggestion.
    pub seasonal_d: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            period: 52,
            max_order_sum: 5,
            level: 0.99,
            agg_mode: AggregationMode::Sum,
            seed: 0,
            train_end: IsoWeek::new(2016, 52).expect("valid week"),
            test_len: 52,
            horizon: 52,
            future_exog: FutureExog::Observed,
            out_dir: PathBuf::from("out"),
            joint: false,
            d: None,
            seasonal_d: None,
        }
    }
}

/// Options shared by every subcommand. Unset flags fall back to the config
/// file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seasonal period in weeks [default: 52].
    #[arg(long, global = true)]
    pub period: Option<usize>,
    /// Largest p + q + P + Q searched [default: 5].
    #[arg(long, global = true)]
    pub max_order_sum: Option<usize>,
    /// Forecast interval coverage [default: 0.99].
    #[arg(long, global = true)]
    pub level: Option<f64>,
    /// Weekly combination of daily peaks: sum or max [default: sum].
    #[arg(long, global = true)]
    pub agg_mode: Option<String>,
    /// Random seed for simulation and fixtures [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Last training week, YYYY-Www [default: 2016-W52].
    #[arg(long, global = true)]
    pub train_end: Option<String>,
    /// Test span in weeks [default: 52].
    #[arg(long, global = true)]
    pub test_len: Option<usize>,
    /// Forecast horizon in weeks [default: 52].
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Future weather for hybrid forecasts: observed or climatology
    /// [default: observed].
    #[arg(long, global = true)]
    pub future_exog: Option<String>,
    /// Output directory [default: out].
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Joint order and weather-term search.
    #[arg(long, global = true)]
    pub joint: bool,
    /// Regular differencing order, overriding the suggestion.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Seasonal differencing order, overriding the suggestion.
    #[arg(long, global = true)]
    pub seasonal_d: Option<usize>,
}

const KEYS: [&str; 13] = [
    "period",
    "max-order-sum",
    "level",
    "agg-mode",
    "seed",
    "train-end",
    "test-len",
    "horizon",
    "future-exog",
    "out-dir",
    "joint",
    "d",
    "seasonal-d",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, Error> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key} = {value:?} is not valid")))
}

impl RunConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        match key {
            "period" => self.period = parse_value(key, value)?,
            "max-order-sum" => self.max_order_sum = parse_value(key, value)?,
            "level" => self.level = parse_value(key, value)?,
            "agg-mode" => self.agg_mode = value.parse()?,
            "seed" => self.seed = parse_value(key, value)?,
            "train-end" => {
                self.train_end = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("train-end {value:?} is not a YYYY-Www week")))?
            }
            "test-len" => self.test_len = parse_value(key, value)?,
            "horizon" => self.horizon = parse_value(key, value)?,
            "future-exog" => self.future_exog = value.parse()?,
            "out-dir" => self.out_dir = PathBuf::from(value.trim()),
            "joint" => self.joint = parse_value(key, value)?,
            "d" => self.d = Some(parse_value(key, value)?),
            "seasonal-d" => self.seasonal_d = Some(parse_value(key, value)?),
            other => {
                return Err(Error::Config(format!(
                    "unknown configuration key {other:?}; known keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a configuration file's `key = value` lines. Keys may use `-`
    /// or `_`; `#` starts a comment.
    pub fn apply_file_text(&mut self, text: &str, origin: &Path) -> Result<(), Error> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("{}:{}: expected key = value", origin.display(), i + 1))
            })?;
            let key = key.trim().replace('_', "-");
            self.set(&key, value.trim().trim_matches('"'))
                .map_err(|e| Error::Config(format!("{}:{}: {e}", origin.display(), i + 1)))?;
        }
        Ok(())
    }

    pub fn resolve(args: &ConfigArgs) -> Result<Self, Error> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            cfg.apply_file_text(&text, path)?;
        }
        let flags: [(&str, Option<String>); 12] = [
            ("period", args.period.map(|v| v.to_string())),
            ("max-order-sum", args.max_order_sum.map(|v| v.to_string())),
            ("level", args.level.map(|v| v.to_string())),
            ("agg-mode", args.agg_mode.clone()),
            ("seed", args.seed.map(|v| v.to_string())),
            ("train-end", args.train_end.clone()),
            ("test-len", args.test_len.map(|v| v.to_string())),
            ("horizon", args.horizon.map(|v| v.to_string())),
            ("future-exog", args.future_exog.clone()),
            ("out-dir", args.out_dir.as_ref().map(|p| p.display().to_string())),
            ("d", args.d.map(|v| v.to_string())),
            ("seasonal-d", args.seasonal_d.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if args.joint {
            cfg.joint = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!("level {} must lie strictly between 0 and 1", self.level)));
        }
        if self.period == 0 {
            return Err(Error::Config("period must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1 week".into()));
        }
        if self.d.is_some_and(|d| d > 2) || self.seasonal_d.is_some_and(|d| d > 1) {
            return Err(Error::Config("differencing overrides are capped at d <= 2 and seasonal-d <= 1".into()));
        }
        if self.test_len == 0 {
            return Err(Error::Config("test-len must be at least 1 week".into()));
        }
        Ok(())
    }

    /// Settings line printed at the top of every report.
    pub fn header(&self) -> String {
        let mut line = format!(
            "aggregation={} period={} max-order-sum={} level={} future-exog={} search={}",
            self.agg_mode,
            self.period,
            self.max_order_sum,
            self.level,
            self.future_exog,
            if self.joint { "joint" } else { "sequential" }
        );
        if let Some(d) = self.d {
            line.push_str(&format!(" d={d}"));
        }
        if let Some(d) = self.seasonal_d {
            line.push_str(&format!(" seasonal-d={d}"));
        }
        line
    }
}
