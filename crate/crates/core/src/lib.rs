//! Weekly peak electricity demand forecasting with seasonal ARIMA models and
//! weather regressors.
//!
//! The crate covers the whole pipeline: turning interval demand records into
//! a weekly series ([`data`]), choosing differencing orders
//! ([`stationarity`]), exact maximum-likelihood SARIMA estimation with an
//! optional regression mean ([`sarima`], [`exog`]), AICc model search
//! ([`selection`]) and forecast scoring ([`evaluation`]).
//!
//! ```
//! use peakload::{fit, forecast, simulate, SarimaParams, SarimaSpec};
//!
//! let spec = SarimaSpec::arima(1, 0, 0);
//! let truth = SarimaParams { phi: vec![0.7], ..SarimaParams::zeros(&spec) };
//! let series = simulate(&spec, &truth, 400, 1).unwrap();
//! let model = fit(&series, &spec, None).unwrap();
//! assert!((model.params.phi[0] - 0.7).abs() < 0.15);
//! let f = forecast(&model, 4, None, 0.95).unwrap();
//! assert_eq!(f.point.len(), 4);
//! ```

mod error;
mod linalg;

pub mod data;
pub mod evaluation;
pub mod exog;
pub mod model_file;
pub mod sarima;
pub mod selection;
pub mod series;
pub mod stationarity;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use evaluation::{improvement_pct, mae, mape, residual_diagnostics, AccuracyReport, ResidualDiagnostics};
pub use exog::{DesignMatrix, ExogFit, ExogSpec, TermLevel, Weather};
pub use sarima::{fit, forecast, loglikelihood, simulate, Forecast, FittedModel, SarimaParams, SarimaSpec};
pub use selection::{aicc, enumerate_orders, select_exog, select_sarima, SearchReport};
pub use series::{acf, difference, integrate, pacf, DifferencingOrders, IsoWeek, TimeSeries};
pub use stationarity::{kpss_test, suggest_differencing, KpssResult};
