//! Versioned TOML persistence for fitted models.
//!
//! Coefficients are stored under readable names (`phi1`, `Phi1`, `theta1`,
//! `Theta1`, `delta`, `sigma2`, and one entry per regression column). The
//! training data travels with the model so that forecasts can be produced
//! from the file alone. Floats are written in shortest round-trip form, so
//! saving and loading reproduces the model exactly.

use std::path::Path;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::exog::{Centering, DesignMatrix, ExogFit, ExogSpec};
use crate::sarima::{FittedModel, SarimaParams, SarimaSpec};
use crate::series::{DifferencingOrders, IsoWeek, TimeSeries};

pub const FORMAT_VERSION: i64 = 1;

fn floats(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|v| Value::Float(*v)).collect())
}

fn series_table(series: &TimeSeries) -> Table {
    let mut t = Table::new();
    t.insert("start".into(), Value::String(series.start().to_string()));
    t.insert("period".into(), Value::Integer(series.period() as i64));
    t.insert("values".into(), floats(series.values()));
    t
}

/// Serializes a model to TOML text.
pub fn to_toml_string(model: &FittedModel) -> String {
    let spec = &model.spec;
    let mut root = Table::new();
    root.insert("format_version".into(), Value::Integer(FORMAT_VERSION));
    root.insert("model".into(), Value::String(spec.to_string()));

    let mut s = Table::new();
    for (key, v) in [
        ("p", spec.p),
        ("d", spec.orders.d),
        ("q", spec.q),
        ("P", spec.seasonal_p),
        ("D", spec.orders.seasonal_d),
        ("Q", spec.seasonal_q),
        ("S", spec.orders.period),
    ] {
        s.insert(key.into(), Value::Integer(v as i64));
    }
    s.insert("intercept".into(), Value::Boolean(spec.include_intercept));
    root.insert("spec".into(), Value::Table(s));

    let p = &model.params;
    let mut c = Table::new();
    for (stem, values) in [
        ("phi", &p.phi),
        ("Phi", &p.seasonal_phi),
        ("theta", &p.theta),
        ("Theta", &p.seasonal_theta),
    ] {
        for (i, v) in values.iter().enumerate() {
            c.insert(format!("{stem}{}", i + 1), Value::Float(*v));
        }
    }
    if spec.include_intercept {
        c.insert("delta".into(), Value::Float(p.delta));
    }
    c.insert("sigma2".into(), Value::Float(p.sigma2));
    root.insert("coefficients".into(), Value::Table(c));

    if !model.beta.is_empty() {
        let mut r = Table::new();
        for (name, b) in model.beta_names.iter().zip(&model.beta) {
            r.insert(name.clone(), Value::Float(*b));
        }
        root.insert("regression".into(), Value::Table(r));
    }
    if let Some(exog) = &model.exog {
        let mut e = Table::new();
        e.insert("terms".into(), Value::String(exog.spec.to_string()));
        e.insert("formula".into(), Value::String(exog.spec.formula()));
        let mut centering = Table::new();
        centering.insert("max".into(), Value::Float(exog.centering.max));
        centering.insert("min".into(), Value::Float(exog.centering.min));
        centering.insert("sol".into(), Value::Float(exog.centering.sol));
        e.insert("centering".into(), Value::Table(centering));
        root.insert("exog".into(), Value::Table(e));
    }

    let mut f = Table::new();
    f.insert("loglik".into(), Value::Float(model.loglik));
    f.insert("aicc".into(), Value::Float(model.aicc));
    f.insert("n_effective".into(), Value::Integer(model.n_effective as i64));
    f.insert("converged".into(), Value::Boolean(model.converged));
    f.insert("iterations".into(), Value::Integer(model.iterations as i64));
    root.insert("fit".into(), Value::Table(f));

    let mut data = series_table(&model.series);
    if let Some(design) = &model.design {
        let mut d = Table::new();
        for (name, col) in design.names().iter().zip(design.columns()) {
            d.insert(name.clone(), floats(col));
        }
        data.insert("design".into(), Value::Table(d));
    }
    root.insert("data".into(), Value::Table(data));
    root.insert("residuals".into(), Value::Table(series_table(&model.residuals)));
    toml::to_string(&root).expect("model tables serialize")
}

struct Reader<'a> {
    table: &'a Table,
    path: String,
}

impl<'a> Reader<'a> {
    fn err(&self, key: &str, what: &str) -> Error {
        Error::Config(format!("model file: {}{key} {what}", self.path))
    }

    fn get(&self, key: &str) -> Result<&'a Value> {
        self.table.get(key).ok_or_else(|| self.err(key, "is missing"))
    }

    fn sub(&self, key: &str) -> Result<Reader<'a>> {
        let table = self.get(key)?.as_table().ok_or_else(|| self.err(key, "must be a table"))?;
        Ok(Reader {
            table,
            path: format!("{}{key}.", self.path),
        })
    }

    fn opt_sub(&self, key: &str) -> Result<Option<Reader<'a>>> {
        if self.table.contains_key(key) {
            self.sub(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn float(&self, key: &str) -> Result<f64> {
        match self.get(key)? {
            Value::Float(v) => Ok(*v),
            Value::Integer(v) => Ok(*v as f64),
            _ => Err(self.err(key, "must be a number")),
        }
    }

    fn uint(&self, key: &str) -> Result<usize> {
        self.get(key)?
            .as_integer()
            .and_then(|v| usize::try_from(v).ok())
            .ok_or_else(|| self.err(key, "must be a nonnegative integer"))
    }

    fn boolean(&self, key: &str) -> Result<bool> {
        self.get(key)?.as_bool().ok_or_else(|| self.err(key, "must be a boolean"))
    }

    fn string(&self, key: &str) -> Result<&'a str> {
        self.get(key)?.as_str().ok_or_else(|| self.err(key, "must be a string"))
    }

    fn floats_at(&self, key: &str) -> Result<Vec<f64>> {
        let arr = self.get(key)?.as_array().ok_or_else(|| self.err(key, "must be an array"))?;
        arr.iter()
            .map(|v| match v {
                Value::Float(f) => Ok(*f),
                Value::Integer(i) => Ok(*i as f64),
                _ => Err(self.err(key, "must contain numbers")),
            })
            .collect()
    }

    fn series(&self) -> Result<TimeSeries> {
        let start: IsoWeek = self.string("start")?.parse()?;
        TimeSeries::new(self.floats_at("values")?, start, self.uint("period")?)
    }

    fn indexed(&self, stem: &str, count: usize) -> Result<Vec<f64>> {
        (1..=count).map(|i| self.float(&format!("{stem}{i}"))).collect()
    }
}

/// Parses TOML text written by [`to_toml_string`].
pub fn from_toml_str(text: &str) -> Result<FittedModel> {
    let root: Table = toml::from_str(text).map_err(|e| Error::Parse {
        line: 0,
        message: format!("model file is not valid TOML: {e}"),
    })?;
    let r = Reader {
        table: &root,
        path: String::new(),
    };
    let version = r.get("format_version")?.as_integer();
    if version != Some(FORMAT_VERSION) {
        return Err(Error::Config(format!(
            "model file format version {version:?} is not supported (expected {FORMAT_VERSION})"
        )));
    }
    let s = r.sub("spec")?;
    let orders = DifferencingOrders::new(s.uint("d")?, s.uint("D")?, s.uint("S")?)?;
    let spec = SarimaSpec::with_orders(orders, s.uint("p")?, s.uint("q")?, s.uint("P")?, s.uint("Q")?)
        .with_intercept(s.boolean("intercept")?);
    spec.validate()?;

    let c = r.sub("coefficients")?;
    let expected = spec.order_sum() + usize::from(spec.include_intercept) + 1;
    if c.table.len() != expected {
        return Err(Error::Config(format!(
            "model file: coefficients has {} entries but {spec} needs {expected}",
            c.table.len()
        )));
    }
    let params = SarimaParams {
        phi: c.indexed("phi", spec.p)?,
        theta: c.indexed("theta", spec.q)?,
        seasonal_phi: c.indexed("Phi", spec.seasonal_p)?,
        seasonal_theta: c.indexed("Theta", spec.seasonal_q)?,
        delta: if spec.include_intercept { c.float("delta")? } else { 0.0 },
        sigma2: c.float("sigma2")?,
    };
    params.validate(&spec)?;

    let (beta_names, beta) = match r.opt_sub("regression")? {
        Some(reg) => {
            let mut names = Vec::new();
            let mut values = Vec::new();
            for key in reg.table.keys() {
                names.push(key.clone());
                values.push(reg.float(key)?);
            }
            (names, values)
        }
        None => (Vec::new(), Vec::new()),
    };

    let exog = match r.opt_sub("exog")? {
        Some(e) => {
            let spec: ExogSpec = e.string("terms")?.parse()?;
            let c = e.sub("centering")?;
            Some(ExogFit {
                spec,
                centering: Centering {
                    max: c.float("max")?,
                    min: c.float("min")?,
                    sol: c.float("sol")?,
                },
            })
        }
        None => None,
    };

    let f = r.sub("fit")?;
    let data = r.sub("data")?;
    let series = data.series()?;
    let design = match data.opt_sub("design")? {
        Some(d) => {
            let names: Vec<String> = d.table.keys().cloned().collect();
            let columns = names.iter().map(|n| d.floats_at(n)).collect::<Result<Vec<_>>>()?;
            Some(DesignMatrix::new(series.start(), series.len(), names, columns)?)
        }
        None => None,
    };
    let design_names = design.as_ref().map(|d| d.names().to_vec()).unwrap_or_default();
    if design_names != beta_names {
        return Err(Error::Config(format!(
            "model file: regression coefficients {beta_names:?} do not match design columns {design_names:?}"
        )));
    }
    if let Some(e) = &exog {
        if e.spec.labels() != beta_names {
            return Err(Error::Config(format!(
                "model file: exog terms {} imply columns {:?}, found {beta_names:?}",
                e.spec,
                e.spec.labels()
            )));
        }
    }
    Ok(FittedModel {
        spec,
        params,
        beta,
        beta_names,
        loglik: f.float("loglik")?,
        aicc: f.float("aicc")?,
        n_effective: f.uint("n_effective")?,
        residuals: r.sub("residuals")?.series()?,
        converged: f.boolean("converged")?,
        iterations: f.uint("iterations")?,
        series,
        design,
        exog,
    })
}

pub fn save(model: &FittedModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_toml_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<FittedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_toml_str(&text).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
