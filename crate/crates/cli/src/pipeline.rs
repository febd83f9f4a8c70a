//! Stages shared by the single-step commands and `reproduce`.

use std::fmt::Write as _;
use std::path::Path;

use peakload::data::AlignedDataset;
use peakload::evaluation::residual_diagnostics;
use peakload::selection::{self, SearchReport};
use peakload::stationarity::{kpss_test, KpssResult};
use peakload::{
    difference, pacf, suggest_differencing, DesignMatrix, DifferencingOrders, Error, FittedModel, Forecast, IsoWeek,
    TimeSeries, Weather,
};

use crate::config::{FutureExog, RunConfig};
use crate::report::{self, full};
use crate::CliError;

/// Training series re-labelled with the configured seasonal period.
pub fn training_series(ds: &AlignedDataset, cfg: &RunConfig) -> Result<TimeSeries, Error> {
    ds.train_wpd().with_period(cfg.period)
}

pub struct KpssStage {
    pub original: KpssResult,
    pub orders: DifferencingOrders,
    pub differenced: KpssResult,
}

/// Suggested differencing orders with any configured overrides applied.
pub fn differencing_orders(train: &TimeSeries, cfg: &RunConfig) -> Result<DifferencingOrders, Error> {
    let (d, seasonal_d) = match (cfg.d, cfg.seasonal_d) {
        (Some(d), Some(sd)) => (d, sd),
        _ => {
            let s = suggest_differencing(train, cfg.period)?;
            (cfg.d.unwrap_or(s.d), cfg.seasonal_d.unwrap_or(s.seasonal_d))
        }
    };
    DifferencingOrders::new(d, seasonal_d, cfg.period)
}

pub fn kpss_stage(train: &TimeSeries, cfg: &RunConfig) -> Result<KpssStage, Error> {
    let original = kpss_test(train)?;
    let orders = differencing_orders(train, cfg)?;
    let differenced = kpss_test(&difference(train, &orders)?)?;
    Ok(KpssStage {
        original,
        orders,
        differenced,
    })
}

fn plot_lags(n: usize, period: usize) -> usize {
    (2 * period).min(n.saturating_sub(1) / 2).max(1)
}

/// `series,lag,acf,pacf` rows for the original and differenced series.
pub fn acf_pacf_csv(train: &TimeSeries, orders: &DifferencingOrders) -> Result<String, Error> {
    let mut out = String::from("series,lag,acf,pacf\n");
    let differenced = difference(train, orders)?;
    for (name, s) in [("original", train), ("differenced", &differenced)] {
        let lags = plot_lags(s.len(), train.period());
        let acf = peakload::acf(s, lags)?;
        let pacf = pacf(s, lags)?;
        for lag in 1..=lags {
            let _ = writeln!(out, "{name},{lag},{},{}", full(acf[lag]), full(pacf[lag - 1]));
        }
    }
    Ok(out)
}

pub struct SearchStage {
    pub crude: FittedModel,
    pub orders_report: SearchReport,
    pub hybrid: Option<(FittedModel, SearchReport)>,
}

pub fn search_stage(train: &TimeSeries, weather: Option<&Weather>, cfg: &RunConfig) -> Result<SearchStage, Error> {
    let orders = differencing_orders(train, cfg)?;
    let (crude, orders_report) = selection::select_sarima(train, orders, cfg.max_order_sum)?;
    let hybrid = match weather {
        Some(w) if cfg.joint => Some(selection::select_joint(train, orders, cfg.max_order_sum, w)?),
        Some(w) => Some(selection::select_exog(train, &crude.spec, w)?),
        None => None,
    };
    Ok(SearchStage {
        crude,
        orders_report,
        hybrid,
    })
}

/// Writes a model file plus its residual ACF and QQ data.
pub fn save_model(model: &FittedModel, dir: &Path, name: &str) -> Result<(), CliError> {
    peakload::model_file::save(model, &dir.join(format!("{name}.toml")))?;
    let n = model.residuals.len();
    let diag = residual_diagnostics(&model.residuals, plot_lags(n, model.spec.period()))?;
    report::write(&dir.join(format!("residuals_{name}_acf.csv")), &diag.acf_csv())?;
    report::write(&dir.join(format!("residuals_{name}_qq.csv")), &diag.qq_csv())
}

pub fn save_report(report: &SearchReport, dir: &Path, stem: &str, header: &str) -> Result<(), CliError> {
    report::write(&dir.join(format!("{stem}.txt")), &format!("{header}\n{}", report.to_table()))?;
    report::write(&dir.join(format!("{stem}.csv")), &report.to_csv())
}

fn weeks_after(model: &FittedModel, horizon: usize) -> Vec<IsoWeek> {
    let last = model.series.end();
    (1..=horizon as i64).map(|h| last.offset(h)).collect()
}

/// Future design for a hybrid model under the configured weather policy.
pub fn future_design(
    model: &FittedModel,
    dataset: Option<&AlignedDataset>,
    cfg: &RunConfig,
) -> Result<Option<DesignMatrix>, CliError> {
    if model.beta.is_empty() {
        return Ok(None);
    }
    let exog = model.exog.as_ref().ok_or_else(|| {
        CliError::config("model has regression coefficients but no weather-term description")
    })?;
    let Some(weather) = dataset.and_then(|d| d.weather.as_ref()) else {
        return Err(CliError::config(format!(
            "model uses weather terms {}; pass --dataset with weather columns (future weather policy --future-exog {})",
            exog.spec.formula(),
            cfg.future_exog
        )));
    };
    let w = &weather.weather;
    let weeks = weeks_after(model, cfg.horizon);
    let future = match cfg.future_exog {
        FutureExog::Observed => {
            let from = w.start().weeks_until(weeks[0]);
            let to = from + cfg.horizon as i64;
            if from < 0 || to as usize > w.len() {
                return Err(CliError::config(format!(
                    "observed weather for {}..{} is not in the dataset (covers {}..{}); use --future-exog climatology",
                    weeks[0],
                    weeks[weeks.len() - 1],
                    w.start(),
                    w.max.end()
                )));
            }
            w.slice(from as usize, to as usize)?
        }
        FutureExog::Climatology => {
            let from = w.start().weeks_until(model.series.start());
            let to = from + model.series.len() as i64;
            if from < 0 || to as usize > w.len() {
                return Err(CliError::config(
                    "dataset weather does not cover the model's training span; climatology needs it",
                ));
            }
            w.slice(from as usize, to as usize)?.climatology(&weeks)?
        }
    };
    Ok(Some(future.design(&exog.spec, &exog.centering)?))
}

pub fn forecast_csv(f: &Forecast) -> String {
    let mut out = String::from("iso_week,point,lower,upper\n");
    for i in 0..f.horizon() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            f.week_at(i),
            full(f.point[i]),
            full(f.lower[i]),
            full(f.upper[i])
        );
    }
    out
}

pub fn run_forecast(model: &FittedModel, dataset: Option<&AlignedDataset>, cfg: &RunConfig) -> Result<Forecast, CliError> {
    let design = future_design(model, dataset, cfg)?;
    Ok(peakload::forecast(model, cfg.horizon, design.as_ref(), cfg.level)?)
}
