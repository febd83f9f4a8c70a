//! Environmental regressors: per-variable term levels and design matrices.
//!
//! Each of the three weather variables (maximum temperature, minimum
//! temperature, solar exposure) enters the regression mean at one of three
//! levels: absent, linear, or linear plus quadratic. Regressors are centered
//! on their training means before squaring; the centering constants travel
//! with the fitted model so forecasts reuse them.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{IsoWeek, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TermLevel {
    #[default]
    None,
    Linear,
    /// Linear and squared terms together.
    Quadratic,
}

impl TermLevel {
    pub const ALL: [TermLevel; 3] = [TermLevel::None, TermLevel::Linear, TermLevel::Quadratic];

    pub fn columns(self) -> usize {
        match self {
            TermLevel::None => 0,
            TermLevel::Linear => 1,
            TermLevel::Quadratic => 2,
        }
    }
}

/// The three weather variables, in design-column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvVariable {
    MaxTemp,
    MinTemp,
    Solar,
}

impl EnvVariable {
    pub const ALL: [EnvVariable; 3] = [EnvVariable::MaxTemp, EnvVariable::MinTemp, EnvVariable::Solar];

    /// Column label stem.
    pub fn label(self) -> &'static str {
        match self {
            EnvVariable::MaxTemp => "max",
            EnvVariable::MinTemp => "min",
            EnvVariable::Solar => "sol",
        }
    }

    fn display(self) -> &'static str {
        match self {
            EnvVariable::MaxTemp => "Max_t",
            EnvVariable::MinTemp => "Min_t",
            EnvVariable::Solar => "Sol_t",
        }
    }
}

/// Term level for each weather variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct ExogSpec {
    pub max_temp: TermLevel,
    pub min_temp: TermLevel,
    pub solar: TermLevel,
}

impl ExogSpec {
    pub fn new(max_temp: TermLevel, min_temp: TermLevel, solar: TermLevel) -> Self {
        Self {
            max_temp,
            min_temp,
            solar,
        }
    }

    /// No regressors: the crude SARIMA model.
    pub fn none() -> Self {
        Self::default()
    }

    pub fn level(&self, var: EnvVariable) -> TermLevel {
        match var {
            EnvVariable::MaxTemp => self.max_temp,
            EnvVariable::MinTemp => self.min_temp,
            EnvVariable::Solar => self.solar,
        }
    }

    pub fn is_none(&self) -> bool {
        self.columns() == 0
    }

    pub fn columns(&self) -> usize {
        EnvVariable::ALL.iter().map(|&v| self.level(v).columns()).sum()
    }

    /// Design-column labels in order, e.g. `["max", "max^2", "sol"]`.
    pub fn labels(&self) -> Vec<String> {
        let mut labels = Vec::new();
        for var in EnvVariable::ALL {
            let level = self.level(var);
            if level.columns() >= 1 {
                labels.push(var.label().to_string());
            }
            if level.columns() == 2 {
                labels.push(format!("{}^2", var.label()));
            }
        }
        labels
    }

    /// Schematic regression formula, e.g. `Max_t + Max_t^2 + Min_t`.
    pub fn formula(&self) -> String {
        let mut terms = Vec::new();
        for var in EnvVariable::ALL {
            let level = self.level(var);
            if level.columns() >= 1 {
                terms.push(var.display().to_string());
            }
            if level.columns() == 2 {
                terms.push(format!("{}^2", var.display()));
            }
        }
        if terms.is_empty() {
            "(none)".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// Compact form `max=quadratic,min=linear,sol=none`.
impl fmt::Display for ExogSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |l: TermLevel| match l {
            TermLevel::None => "none",
            TermLevel::Linear => "linear",
            TermLevel::Quadratic => "quadratic",
        };
        write!(
            f,
            "max={},min={},sol={}",
            name(self.max_temp),
            name(self.min_temp),
            name(self.solar)
        )
    }
}

impl FromStr for ExogSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut spec = ExogSpec::none();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad exogenous term {part:?}")))?;
            let level = match value.trim() {
                "none" | "0" => TermLevel::None,
                "linear" | "1" => TermLevel::Linear,
                "quadratic" | "2" => TermLevel::Quadratic,
                other => return Err(Error::Config(format!("unknown term level {other:?}"))),
            };
            match key.trim() {
                "max" => spec.max_temp = level,
                "min" => spec.min_temp = level,
                "sol" => spec.solar = level,
                other => return Err(Error::Config(format!("unknown variable {other:?}"))),
            }
        }
        Ok(spec)
    }
}

/// All 27 combinations, ordered by max level, then min, then solar.
pub fn enumerate_specs() -> Vec<ExogSpec> {
    let mut specs = Vec::with_capacity(27);
    for max_temp in TermLevel::ALL {
        for min_temp in TermLevel::ALL {
            for solar in TermLevel::ALL {
                specs.push(ExogSpec::new(max_temp, min_temp, solar));
            }
        }
    }
    specs
}

/// Named regressor columns aligned to a series index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    start: IsoWeek,
    rows: usize,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl DesignMatrix {
    pub fn new(start: IsoWeek, rows: usize, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Arity(format!(
                "{} column names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for (name, col) in names.iter().zip(&columns) {
            if !seen.insert(name.as_str()) {
                return Err(Error::Arity(format!("duplicate design column {name:?}")));
            }
            if col.len() != rows {
                return Err(Error::Arity(format!(
                    "design column {name:?} has {} rows, expected {rows}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("non-finite entry in design column {name:?}")));
            }
        }
        Ok(Self {
            start,
            rows,
            names,
            columns,
        })
    }

    /// A design with no columns.
    pub fn empty(start: IsoWeek, rows: usize) -> Self {
        Self {
            start,
            rows,
            names: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn start(&self) -> IsoWeek {
        self.start
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    /// Row-wise linear combination `Z beta`.
    pub fn mul(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (col, b) in self.columns.iter().zip(beta) {
            for (o, v) in out.iter_mut().zip(col) {
                *o += b * v;
            }
        }
        out
    }

    /// Rows `[from, to)`.
    pub fn rows_slice(&self, from: usize, to: usize) -> Result<Self> {
        if from > to || to > self.rows {
            return Err(Error::Span(format!(
                "rows {from}..{to} invalid for design with {} rows",
                self.rows
            )));
        }
        Ok(Self {
            start: self.start.offset(from as i64),
            rows: to - from,
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c[from..to].to_vec()).collect(),
        })
    }
}

/// Training-sample means subtracted from each weather variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Centering {
    pub max: f64,
    pub min: f64,
    pub sol: f64,
}

impl Centering {
    pub fn from_series(max_t: &TimeSeries, min_t: &TimeSeries, sol_t: &TimeSeries) -> Self {
        Self {
            max: max_t.mean(),
            min: min_t.mean(),
            sol: sol_t.mean(),
        }
    }

    fn of(&self, var: EnvVariable) -> f64 {
        match var {
            EnvVariable::MaxTemp => self.max,
            EnvVariable::MinTemp => self.min,
            EnvVariable::Solar => self.sol,
        }
    }
}

/// Exogenous structure attached to a fitted hybrid model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExogFit {
    pub spec: ExogSpec,
    pub centering: Centering,
}

fn check_aligned(max_t: &TimeSeries, min_t: &TimeSeries, sol_t: &TimeSeries) -> Result<()> {
    for (name, s) in [("min", min_t), ("sol", sol_t)] {
        if s.start() != max_t.start() || s.len() != max_t.len() {
            return Err(Error::Alignment(format!(
                "{name} series spans {}..{} but max spans {}..{}",
                s.start(),
                s.end(),
                max_t.start(),
                max_t.end()
            )));
        }
    }
    Ok(())
}

/// Builds the design for `spec`, centering on the means of the given series.
pub fn build_design(
    spec: &ExogSpec,
    max_t: &TimeSeries,
    min_t: &TimeSeries,
    sol_t: &TimeSeries,
) -> Result<DesignMatrix> {
    check_aligned(max_t, min_t, sol_t)?;
    let centering = Centering::from_series(max_t, min_t, sol_t);
    build_design_centered(spec, max_t, min_t, sol_t, &centering)
}

/// Builds the design for `spec` with fixed centering constants, e.g. the
/// training means when constructing future regressors.
pub fn build_design_centered(
    spec: &ExogSpec,
    max_t: &TimeSeries,
    min_t: &TimeSeries,
    sol_t: &TimeSeries,
    centering: &Centering,
) -> Result<DesignMatrix> {
    check_aligned(max_t, min_t, sol_t)?;
    let mut names = Vec::new();
    let mut columns = Vec::new();
    for (var, series) in EnvVariable::ALL.into_iter().zip([max_t, min_t, sol_t]) {
        let level = spec.level(var);
        if level == TermLevel::None {
            continue;
        }
        let c = centering.of(var);
        let centered: Vec<f64> = series.values().iter().map(|v| v - c).collect();
        if level == TermLevel::Quadratic {
            let squared = centered.iter().map(|v| v * v).collect();
            names.push(var.label().to_string());
            columns.push(centered);
            names.push(format!("{}^2", var.label()));
            columns.push(squared);
        } else {
            names.push(var.label().to_string());
            columns.push(centered);
        }
    }
    DesignMatrix::new(max_t.start(), max_t.len(), names, columns)
}

/// The three weather series on a shared weekly index.
#[derive(Debug, Clone, PartialEq)]
pub struct Weather {
    pub max: TimeSeries,
    pub min: TimeSeries,
    pub sol: TimeSeries,
}

impl Weather {
    pub fn new(max: TimeSeries, min: TimeSeries, sol: TimeSeries) -> Result<Self> {
        check_aligned(&max, &min, &sol)?;
        Ok(Self { max, min, sol })
    }

    pub fn len(&self) -> usize {
        self.max.len()
    }

    pub fn is_empty(&self) -> bool {
        self.max.is_empty()
    }

    pub fn start(&self) -> IsoWeek {
        self.max.start()
    }

    pub fn centering(&self) -> Centering {
        Centering::from_series(&self.max, &self.min, &self.sol)
    }

    pub fn design(&self, spec: &ExogSpec, centering: &Centering) -> Result<DesignMatrix> {
        build_design_centered(spec, &self.max, &self.min, &self.sol, centering)
    }

    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        Ok(Self {
            max: self.max.slice(from, to)?,
            min: self.min.slice(from, to)?,
            sol: self.sol.slice(from, to)?,
        })
    }

    /// Week-of-year means of the training weather for `weeks`.
    pub fn climatology(&self, weeks: &[IsoWeek]) -> Result<Self> {
        Self::new(
            climatology(&self.max, weeks)?,
            climatology(&self.min, weeks)?,
            climatology(&self.sol, weeks)?,
        )
    }
}

/// Same-week-of-year training means for each of `weeks`, the fallback for
/// forecasting without observed future weather.
pub fn climatology(training: &TimeSeries, weeks: &[IsoWeek]) -> Result<TimeSeries> {
    let mut sums = [0.0; 52];
    let mut counts = [0usize; 52];
    for (i, v) in training.values().iter().enumerate() {
        let w = training.week_at(i).week() as usize - 1;
        sums[w] += v;
        counts[w] += 1;
    }
    let overall = training.mean();
    let values = weeks
        .iter()
        .map(|wk| {
            let w = wk.week() as usize - 1;
            if counts[w] > 0 {
                sums[w] / counts[w] as f64
            } else {
                overall
            }
        })
        .collect();
    let start = weeks
        .first()
        .copied()
        .ok_or_else(|| Error::Config("climatology requested for zero weeks".into()))?;
    TimeSeries::new(values, start, training.period())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64]) -> TimeSeries {
        TimeSeries::from_values(values.to_vec()).unwrap()
    }

    #[test]
    fn twenty_seven_distinct_specs() {
        let specs = enumerate_specs();
        assert_eq!(specs.len(), 27);
        let unique: HashSet<_> = specs.iter().collect();
        assert_eq!(unique.len(), 27);
        assert_eq!(specs[0], ExogSpec::none());
        use TermLevel::*;
        assert!(specs.contains(&ExogSpec::new(Quadratic, Quadratic, None)));
    }

    #[test]
    fn empty_design_for_none() {
        let s = series(&[1., 2., 3.]);
        let d = build_design(&ExogSpec::none(), &s, &s, &s).unwrap();
        assert_eq!(d.ncols(), 0);
        assert_eq!(d.nrows(), 3);
    }

    #[test]
    fn full_quadratic_labels() {
        let s = series(&[1., 2., 3.]);
        let full = ExogSpec::new(TermLevel::Quadratic, TermLevel::Quadratic, TermLevel::Quadratic);
        let d = build_design(&full, &s, &s, &s).unwrap();
        assert_eq!(d.names(), &["max", "max^2", "min", "min^2", "sol", "sol^2"]);
    }

    #[test]
    fn linear_column_is_centered() {
        let max = series(&[10., 20., 30.]);
        let other = series(&[0., 0., 0.]);
        let spec = ExogSpec::new(TermLevel::Linear, TermLevel::None, TermLevel::None);
        let d = build_design(&spec, &max, &other, &other).unwrap();
        assert_eq!(d.columns(), &[vec![-10., 0., 10.]]);
    }

    #[test]
    fn misaligned_series_named() {
        let a = series(&[1., 2., 3.]);
        let b = series(&[1., 2.]);
        let err = build_design(&ExogSpec::none(), &a, &a, &b).unwrap_err();
        assert!(matches!(err, Error::Alignment(ref m) if m.starts_with("sol")));
    }

    #[test]
    fn spec_text_round_trip() {
        for spec in enumerate_specs() {
            assert_eq!(spec.to_string().parse::<ExogSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn formula_text() {
        let sa = ExogSpec::new(TermLevel::Quadratic, TermLevel::Quadratic, TermLevel::None);
        assert_eq!(sa.formula(), "Max_t + Max_t^2 + Min_t + Min_t^2");
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = DesignMatrix::new(IsoWeek::default(), 1, vec!["a".into(), "a".into()], vec![vec![1.], vec![2.]]);
        assert!(err.is_err());
    }

    #[test]
    fn climatology_uses_same_week() {
        let start = IsoWeek::new(2010, 1).unwrap();
        let values: Vec<f64> = (0..104).map(|i| (i % 52) as f64 + if i >= 52 { 2.0 } else { 0.0 }).collect();
        let train = TimeSeries::new(values, start, 52).unwrap();
        let weeks = [IsoWeek::new(2012, 1).unwrap(), IsoWeek::new(2012, 2).unwrap()];
        let clim = climatology(&train, &weeks).unwrap();
        assert_eq!(clim.values(), &[1.0, 2.0]);
    }
}
