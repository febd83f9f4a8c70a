//! Ingestion of interval demand and weekly weather records, weekly peak
//! aggregation, alignment and the train/test split.
//!
//! File formats (comma separated, UTF-8, header row required):
//!
//! - demand: `timestamp,region,demand_mw` with `YYYY-MM-DDTHH:MM` timestamps
//!   on 15-minute boundaries;
//! - weather: `iso_week,max_temp_c,min_temp_c,solar_mj_m2`, blank fields
//!   marking missing values;
//! - aligned dataset: `iso_week,split,wpd` optionally followed by
//!   `max,max_missing_flag,min,min_missing_flag,sol,sol_missing_flag`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exog::Weather;
use crate::series::{parse_raw_iso_week, IsoWeek, TimeSeries, WEEKS_PER_YEAR};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "NSW")]
    Nsw,
    #[serde(rename = "VIC")]
    Vic,
    #[serde(rename = "SA")]
    Sa,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Nsw, Region::Vic, Region::Sa];

    pub fn code(self) -> &'static str {
        match self {
            Region::Nsw => "NSW",
            Region::Vic => "VIC",
            Region::Sa => "SA",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NSW" | "NSW1" => Ok(Region::Nsw),
            "VIC" | "VIC1" => Ok(Region::Vic),
            "SA" | "SA1" => Ok(Region::Sa),
            other => Err(Error::Config(format!("unknown region {other:?}; expected NSW, VIC or SA"))),
        }
    }
}

/// One interval demand reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandRecord {
    pub timestamp: NaiveDateTime,
    pub region: Region,
    /// Megawatts.
    pub demand: f64,
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input)
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<csv::StringRecord> {
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let found: Vec<&str> = header.iter().collect();
    if found.len() < expected.len() || found[..expected.len()] != *expected {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}, found {}", expected.join(","), found.join(",")),
        });
    }
    Ok(header)
}

fn rows<R: Read>(rdr: &mut csv::Reader<R>) -> impl Iterator<Item = Result<(usize, csv::StringRecord)>> + '_ {
    rdr.records().map(|r| {
        r.map(|rec| (rec.position().map_or(0, |p| p.line() as usize), rec))
            .map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })
    })
}

/// Parses demand records, sorted by timestamp (then region). Duplicate
/// timestamp/region pairs, non-positive demand and timestamps off the
/// 15-minute grid are rejected.
pub fn parse_demand<R: Read>(input: R) -> Result<Vec<DemandRecord>> {
    let mut rdr = reader(input);
    check_header(&mut rdr, &["timestamp", "region", "demand_mw"])?;
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for row in rows(&mut rdr) {
        let (line, rec) = row?;
        let parse_err = |message: String| Error::Parse { line, message };
        if rec.len() != 3 {
            return Err(parse_err(format!("expected 3 fields, found {}", rec.len())));
        }
        let timestamp = NaiveDateTime::parse_from_str(&rec[0], TIMESTAMP_FORMAT)
            .map_err(|e| parse_err(format!("bad timestamp {:?}: {e}", &rec[0])))?;
        if timestamp.minute() % 15 != 0 || timestamp.second() != 0 {
            return Err(parse_err(format!("timestamp {} is not on a 15-minute boundary", &rec[0])));
        }
        let region: Region = rec[1].parse().map_err(|e: Error| parse_err(e.to_string()))?;
        let demand: f64 = rec[2]
            .parse()
            .map_err(|_| parse_err(format!("bad demand value {:?}", &rec[2])))?;
        if !(demand > 0.0) || !demand.is_finite() {
            return Err(parse_err(format!("demand must be positive, got {demand}")));
        }
        if !seen.insert((timestamp, region)) {
            return Err(Error::Duplicate(format!("{region} at {}", timestamp.format(TIMESTAMP_FORMAT))));
        }
        records.push(DemandRecord {
            timestamp,
            region,
            demand,
        });
    }
    records.sort_by_key(|r| (r.timestamp, r.region));
    Ok(records)
}

pub fn load_demand(path: &Path) -> Result<Vec<DemandRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_demand(std::io::BufReader::new(file)).map_err(|e| with_path(e, path))
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

pub fn write_demand<W: Write>(records: &[DemandRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::Io {
        path: "<demand output>".into(),
        message: e.to_string(),
    };
    w.write_record(["timestamp", "region", "demand_mw"]).map_err(fail)?;
    for r in records {
        w.write_record([
            r.timestamp.format(TIMESTAMP_FORMAT).to_string(),
            r.region.to_string(),
            r.demand.to_string(),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<demand output>".into(),
        message: e.to_string(),
    })
}

/// Groups records by region, preserving timestamp order.
pub fn split_regions(records: &[DemandRecord]) -> BTreeMap<Region, Vec<DemandRecord>> {
    let mut map: BTreeMap<Region, Vec<DemandRecord>> = BTreeMap::new();
    for r in records {
        map.entry(r.region).or_default().push(*r);
    }
    map
}

/// How the seven daily peaks of a week combine into one value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationMode {
    #[default]
    Sum,
    Max,
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggregationMode::Sum => "sum",
            AggregationMode::Max => "max",
        })
    }
}

impl FromStr for AggregationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sum" => Ok(AggregationMode::Sum),
            "max" => Ok(AggregationMode::Max),
            other => Err(Error::Config(format!("aggregation mode {other:?}; expected sum or max"))),
        }
    }
}

/// Weekly peak demand and the number of incomplete boundary weeks dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct WeeklyPeaks {
    pub series: TimeSeries,
    pub dropped_weeks: usize,
}

fn folded(year: i32, week: u32) -> IsoWeek {
    IsoWeek::new(year, week.min(WEEKS_PER_YEAR as u32)).expect("week within 1..=52")
}

/// Daily maxima combined per ISO week.
///
/// Incomplete first and last weeks are dropped and counted; a missing day
/// anywhere else is a gap error. ISO week 53 is merged into week 52: in sum
/// mode the two weekly sums are averaged, in max mode the larger is kept.
pub fn weekly_peak_demand(records: &[DemandRecord], mode: AggregationMode) -> Result<WeeklyPeaks> {
    if let Some(first) = records.first() {
        if let Some(other) = records.iter().find(|r| r.region != first.region) {
            return Err(Error::Config(format!(
                "weekly aggregation needs one region, found {} and {}",
                first.region, other.region
            )));
        }
    }
    let mut daily: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    for r in records {
        let peak = daily.entry(r.timestamp.date()).or_insert(f64::NEG_INFINITY);
        *peak = peak.max(r.demand);
    }
    let (Some((&first_day, _)), Some((&last_day, _))) = (daily.first_key_value(), daily.last_key_value()) else {
        return Err(Error::TooShort {
            context: "weekly aggregation",
            required: 7,
            actual: 0,
        });
    };
    let first_monday = first_day - Duration::days(first_day.weekday().num_days_from_monday() as i64);
    let last_sunday = last_day + Duration::days(6 - last_day.weekday().num_days_from_monday() as i64);
    let total_weeks = ((last_sunday - first_monday).num_days() + 1) / 7;

    // (raw ISO year, raw ISO week, value) for complete weeks.
    let mut weeks: Vec<(i32, u32, f64)> = Vec::new();
    let mut dropped = 0;
    for w in 0..total_weeks {
        let monday = first_monday + Duration::weeks(w);
        let days: Vec<NaiveDate> = (0..7).map(|d| monday + Duration::days(d)).collect();
        let peaks: Vec<Option<f64>> = days.iter().map(|d| daily.get(d).copied()).collect();
        if let Some(missing) = peaks.iter().position(Option::is_none) {
            if w == 0 || w == total_weeks - 1 {
                dropped += 1;
                continue;
            }
            return Err(Error::Gap(days[missing].to_string()));
        }
        let peaks = peaks.into_iter().flatten();
        let value = match mode {
            AggregationMode::Sum => peaks.sum(),
            AggregationMode::Max => peaks.fold(f64::NEG_INFINITY, f64::max),
        };
        let iso = monday.iso_week();
        weeks.push((iso.year(), iso.week(), value));
    }

    let mut values: Vec<f64> = Vec::with_capacity(weeks.len());
    let mut start = None;
    let mut last_label: Option<IsoWeek> = None;
    for (year, week, value) in weeks {
        let label = folded(year, week);
        if week == 53 && last_label == Some(label) {
            let prev = values.last_mut().unwrap();
            *prev = match mode {
                AggregationMode::Sum => (*prev + value) / 2.0,
                AggregationMode::Max => prev.max(value),
            };
            continue;
        }
        start.get_or_insert(label);
        values.push(value);
        last_label = Some(label);
    }
    let Some(start) = start else {
        return Err(Error::TooShort {
            context: "weekly aggregation (complete weeks)",
            required: 1,
            actual: 0,
        });
    };
    Ok(WeeklyPeaks {
        series: TimeSeries::new(values, start, WEEKS_PER_YEAR as usize)?,
        dropped_weeks: dropped,
    })
}

/// One weekly weather row; `None` marks a missing value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeeklyEnvRecord {
    /// Raw ISO year and week (week 53 allowed).
    pub year: i32,
    pub week: u32,
    pub max_temp: Option<f64>,
    pub min_temp: Option<f64>,
    pub solar: Option<f64>,
}

pub fn parse_env<R: Read>(input: R) -> Result<Vec<WeeklyEnvRecord>> {
    let mut rdr = reader(input);
    check_header(&mut rdr, &["iso_week", "max_temp_c", "min_temp_c", "solar_mj_m2"])?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for row in rows(&mut rdr) {
        let (line, rec) = row?;
        let parse_err = |message: String| Error::Parse { line, message };
        if rec.len() != 4 {
            return Err(parse_err(format!("expected 4 fields, found {}", rec.len())));
        }
        let (year, week) = parse_raw_iso_week(&rec[0]).map_err(|_| parse_err(format!("bad iso_week {:?}", &rec[0])))?;
        let field = |i: usize| -> Result<Option<f64>> {
            let s = &rec[i];
            if s.is_empty() || s.eq_ignore_ascii_case("na") {
                return Ok(None);
            }
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| parse_err(format!("bad number {s:?}")))
        };
        let (max_temp, min_temp, solar) = (field(1)?, field(2)?, field(3)?);
        if let (Some(hi), Some(lo)) = (max_temp, min_temp) {
            if hi < lo {
                return Err(parse_err(format!("max temperature {hi} below min temperature {lo}")));
            }
        }
        if solar.is_some_and(|s| s < 0.0) {
            return Err(parse_err(format!("negative solar exposure {}", solar.unwrap())));
        }
        if !seen.insert((year, week)) {
            return Err(Error::Duplicate(format!("weather week {}", &rec[0])));
        }
        out.push(WeeklyEnvRecord {
            year,
            week,
            max_temp,
            min_temp,
            solar,
        });
    }
    out.sort_by_key(|r| (r.year, r.week));
    Ok(out)
}

pub fn load_env(path: &Path) -> Result<Vec<WeeklyEnvRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_env(std::io::BufReader::new(file)).map_err(|e| with_path(e, path))
}

pub fn write_env<W: Write>(records: &[WeeklyEnvRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::Io {
        path: "<weather output>".into(),
        message: e.to_string(),
    };
    w.write_record(["iso_week", "max_temp_c", "min_temp_c", "solar_mj_m2"]).map_err(fail)?;
    let cell = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
    for r in records {
        w.write_record([
            format!("{:04}-W{:02}", r.year, r.week),
            cell(r.max_temp),
            cell(r.min_temp),
            cell(r.solar),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<weather output>".into(),
        message: e.to_string(),
    })
}

/// Weekly weather with per-value flags for interpolated entries.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherData {
    pub weather: Weather,
    /// Missing-value flags for max, min and solar.
    pub missing: [Vec<bool>; 3],
}

impl WeatherData {
    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        Ok(Self {
            weather: self.weather.slice(from, to)?,
            missing: self.missing.clone().map(|m| m[from..to].to_vec()),
        })
    }
}

fn interpolate(values: &mut [Option<f64>]) -> Option<Vec<bool>> {
    let known: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    let (&first, &last) = (known.first()?, known.last()?);
    let flags = values.iter().map(Option::is_none).collect();
    for i in 0..values.len() {
        if values[i].is_some() {
            continue;
        }
        values[i] = Some(if i < first {
            values[first].unwrap()
        } else if i > last {
            values[last].unwrap()
        } else {
            let hi = known[known.partition_point(|&k| k < i)];
            let lo = known[known.partition_point(|&k| k < i) - 1];
            let (a, b) = (values[lo].unwrap(), values[hi].unwrap());
            a + (b - a) * (i - lo) as f64 / (hi - lo) as f64
        });
    }
    Some(flags)
}

/// Builds weekly weather series: week 53 averaged into week 52, missing
/// values linearly interpolated (held constant beyond the ends) and flagged.
/// Weeks absent from the file inside the covered range are a gap error.
pub fn weekly_env(records: &[WeeklyEnvRecord]) -> Result<WeatherData> {
    let mut merged: BTreeMap<IsoWeek, [Vec<f64>; 3]> = BTreeMap::new();
    let mut absent: BTreeMap<IsoWeek, [bool; 3]> = BTreeMap::new();
    for r in records {
        let label = folded(r.year, r.week);
        let slot = merged.entry(label).or_default();
        let miss = absent.entry(label).or_insert([true; 3]);
        for (k, v) in [r.max_temp, r.min_temp, r.solar].into_iter().enumerate() {
            if let Some(v) = v {
                slot[k].push(v);
                miss[k] = false;
            }
        }
    }
    let (Some(&start), Some(&end)) = (merged.keys().next(), merged.keys().next_back()) else {
        return Err(Error::TooShort {
            context: "weather records",
            required: 1,
            actual: 0,
        });
    };
    let n = (start.weeks_until(end) + 1) as usize;
    if merged.len() != n {
        let missing = (0..n as i64).map(|i| start.offset(i)).find(|w| !merged.contains_key(w)).unwrap();
        return Err(Error::Gap(format!("weather week {missing}")));
    }
    let mut columns: [Vec<Option<f64>>; 3] = Default::default();
    for (_, slot) in merged {
        for k in 0..3 {
            let v = &slot[k];
            columns[k].push((!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64));
        }
    }
    let names = ["max_temp_c", "min_temp_c", "solar_mj_m2"];
    let mut flags: [Vec<bool>; 3] = Default::default();
    let mut series = Vec::new();
    for k in 0..3 {
        flags[k] = interpolate(&mut columns[k])
            .ok_or_else(|| Error::Degenerate(format!("{} has no observed values", names[k])))?;
        let values = columns[k].iter().map(|v| v.unwrap()).collect();
        series.push(TimeSeries::new(values, start, WEEKS_PER_YEAR as usize)?);
    }
    let sol = series.pop().unwrap();
    let min = series.pop().unwrap();
    let max = series.pop().unwrap();
    Ok(WeatherData {
        weather: Weather::new(max, min, sol)?,
        missing: flags,
    })
}

/// Weekly demand and weather on a shared index with a train/test boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDataset {
    pub wpd: TimeSeries,
    pub weather: Option<WeatherData>,
    /// Number of leading training weeks; the rest is the test span.
    pub train_len: usize,
}

impl AlignedDataset {
    pub fn len(&self) -> usize {
        self.wpd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wpd.is_empty()
    }

    pub fn test_len(&self) -> usize {
        self.wpd.len() - self.train_len
    }

    pub fn train_end(&self) -> IsoWeek {
        self.wpd.week_at(self.train_len - 1)
    }

    pub fn train_wpd(&self) -> TimeSeries {
        self.wpd.slice(0, self.train_len).expect("nonempty training span")
    }

    pub fn test_wpd(&self) -> Option<TimeSeries> {
        self.wpd.slice(self.train_len, self.len()).ok()
    }

    pub fn train_weather(&self) -> Option<Weather> {
        self.weather.as_ref().map(|w| w.weather.slice(0, self.train_len).unwrap())
    }

    pub fn test_weather(&self) -> Option<Weather> {
        if self.test_len() == 0 {
            return None;
        }
        self.weather.as_ref().map(|w| w.weather.slice(self.train_len, self.len()).unwrap())
    }

    /// Writes the dataset file.
    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fail = |e: csv::Error| Error::Io {
            path: "<dataset output>".into(),
            message: e.to_string(),
        };
        let mut header = vec!["iso_week", "split", "wpd"];
        if self.weather.is_some() {
            header.extend(["max", "max_missing_flag", "min", "min_missing_flag", "sol", "sol_missing_flag"]);
        }
        w.write_record(&header).map_err(fail)?;
        for i in 0..self.len() {
            let split = if i < self.train_len { "train" } else { "test" };
            let mut row = vec![self.wpd.week_at(i).to_string(), split.to_string(), self.wpd.values()[i].to_string()];
            if let Some(data) = &self.weather {
                let w = &data.weather;
                for (k, s) in [&w.max, &w.min, &w.sol].into_iter().enumerate() {
                    row.push(s.values()[i].to_string());
                    row.push(u8::from(data.missing[k][i]).to_string());
                }
            }
            w.write_record(&row).map_err(fail)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<dataset output>".into(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(file))
    }

    /// Reads a dataset file. Splits must be a run of `train` rows followed by
    /// `test` rows on consecutive weeks.
    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut rdr = reader(input);
        let header = check_header(&mut rdr, &["iso_week", "split", "wpd"])?;
        let with_weather = match header.len() {
            3 => false,
            9 if header.iter().skip(3).eq(["max", "max_missing_flag", "min", "min_missing_flag", "sol", "sol_missing_flag"]) => true,
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: "dataset header must be iso_week,split,wpd with optional weather columns".into(),
                })
            }
        };
        let mut weeks = Vec::new();
        let mut wpd = Vec::new();
        let mut env: [Vec<f64>; 3] = Default::default();
        let mut flags: [Vec<bool>; 3] = Default::default();
        let mut train_len = 0;
        let mut in_test = false;
        for row in rows(&mut rdr) {
            let (line, rec) = row?;
            let parse_err = |message: String| Error::Parse { line, message };
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(format!("bad number in column {}", i + 1)))
            };
            let week: IsoWeek = rec[0].parse().map_err(|_| parse_err(format!("bad iso_week {:?}", &rec[0])))?;
            if let Some(prev) = weeks.last() {
                if IsoWeek::weeks_until(*prev, week) != 1 {
                    return Err(parse_err(format!("week {week} does not follow {prev}")));
                }
            }
            match &rec[1] {
                "train" if !in_test => train_len += 1,
                "train" => return Err(parse_err("train row after test rows".into())),
                "test" => in_test = true,
                other => return Err(parse_err(format!("split must be train or test, got {other:?}"))),
            }
            weeks.push(week);
            wpd.push(num(2)?);
            if with_weather {
                for k in 0..3 {
                    env[k].push(num(3 + 2 * k)?);
                    flags[k].push(match rec.get(4 + 2 * k) {
                        Some("1") => true,
                        Some("0") => false,
                        _ => return Err(parse_err("missing flags must be 0 or 1".into())),
                    });
                }
            }
        }
        let start = *weeks.first().ok_or(Error::TooShort {
            context: "dataset file",
            required: 1,
            actual: 0,
        })?;
        if train_len == 0 {
            return Err(Error::Span("dataset has no training rows".into()));
        }
        let period = WEEKS_PER_YEAR as usize;
        let weather = if with_weather {
            let [max, min, sol] = env.map(|v| TimeSeries::new(v, start, period));
            Some(WeatherData {
                weather: Weather::new(max?, min?, sol?)?,
                missing: flags,
            })
        } else {
            None
        };
        Ok(Self {
            wpd: TimeSeries::new(wpd, start, period)?,
            weather,
            train_len,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file)).map_err(|e| with_path(e, path))
    }
}

/// Trims demand and weather to their common weeks, ending `test_len` weeks
/// after `train_end`.
pub fn align_and_split(
    wpd: &TimeSeries,
    weather: Option<&WeatherData>,
    train_end: IsoWeek,
    test_len: usize,
) -> Result<AlignedDataset> {
    if test_len == 0 {
        return Err(Error::Config("test span must contain at least one week".into()));
    }
    let mut start = wpd.start();
    let mut end = wpd.end();
    if let Some(w) = weather {
        start = start.max(w.weather.start());
        end = end.min(w.weather.max.end());
    }
    if start > train_end {
        return Err(Error::Span(format!(
            "common data starts at {start}, after the training end {train_end}"
        )));
    }
    let want_end = train_end.offset(test_len as i64);
    if end < want_end {
        let missing = end.weeks_until(want_end).min(test_len as i64);
        return Err(Error::Span(format!(
            "test span {}..{want_end} needs {test_len} weeks after {train_end}; data ends at {end}, {missing} week(s) short",
            train_end.offset(1)
        )));
    }
    let cut = |s: &TimeSeries| -> Result<TimeSeries> {
        let from = s.start().weeks_until(start) as usize;
        let to = s.start().weeks_until(want_end) as usize + 1;
        s.slice(from, to)
    };
    let weather = match weather {
        Some(w) => {
            let from = w.weather.start().weeks_until(start) as usize;
            let to = w.weather.start().weeks_until(want_end) as usize + 1;
            Some(w.slice(from, to)?)
        }
        None => None,
    };
    Ok(AlignedDataset {
        wpd: cut(wpd)?,
        weather,
        train_len: start.weeks_until(train_end) as usize + 1,
    })
}

/// First Monday of an ISO week (raw week numbering).
pub fn iso_week_monday(year: i32, week: u32) -> Option<NaiveDate> {
    NaiveDate::from_isoywd_opt(year, week, Weekday::Mon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT).unwrap()
    }

    fn records_for(days: std::ops::Range<i64>, start: NaiveDate, value: impl Fn(i64, i64) -> f64) -> Vec<DemandRecord> {
        let mut out = Vec::new();
        for d in days {
            for slot in 0..96 {
                out.push(DemandRecord {
                    timestamp: (start + Duration::days(d)).and_hms_opt(0, 0, 0).unwrap() + Duration::minutes(15 * slot),
                    region: Region::Nsw,
                    demand: value(d, slot),
                });
            }
        }
        out
    }

    #[test]
    fn parses_and_sorts() {
        let text = "timestamp,region,demand_mw\n\
                    2017-01-02T00:30,NSW,7000\n\
                    2017-01-02T00:00,NSW,7100.5\n\
                    2017-01-02T00:15,NSW,7050\n\
                    2017-01-02T00:45,NSW,6900\n";
        let recs = parse_demand(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 4);
        assert_eq!(recs[0].timestamp, ts("2017-01-02T00:00"));
        assert!(recs.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
    }

    #[test]
    fn empty_file_is_empty() {
        assert!(parse_demand("timestamp,region,demand_mw\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_named() {
        let text = "timestamp,region,demand_mw\n2017-01-02T00:00,NSW,1\n2017-01-02T00:00,NSW,2\n";
        let err = parse_demand(text.as_bytes()).unwrap_err();
        assert_eq!(err, Error::Duplicate("NSW at 2017-01-02T00:00".into()));
    }

    #[test]
    fn malformed_row_has_line() {
        let text = "timestamp,region,demand_mw\n2017-01-02T00:00,NSW,1\n2017-01-02T00:15,NSW,abc\n";
        assert!(matches!(parse_demand(text.as_bytes()), Err(Error::Parse { line: 3, .. })));
        let text = "timestamp,region,demand_mw\n2017-01-02T00:00,NSW,-5\n";
        assert!(matches!(parse_demand(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let text = "timestamp,region,demand_mw\n2017-01-02T00:07,NSW,5\n";
        assert!(matches!(parse_demand(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn constant_week() {
        // 2017-01-02 is the Monday of ISO week 2017-W01.
        let monday = NaiveDate::from_ymd_opt(2017, 1, 2).unwrap();
        let recs = records_for(0..7, monday, |_, _| 100.0);
        let sum = weekly_peak_demand(&recs, AggregationMode::Sum).unwrap();
        assert_eq!(sum.series.values(), &[700.0]);
        assert_eq!(sum.series.start(), IsoWeek::new(2017, 1).unwrap());
        let max = weekly_peak_demand(&recs, AggregationMode::Max).unwrap();
        assert_eq!(max.series.values(), &[100.0]);
    }

    #[test]
    fn spike_sets_daily_peak() {
        let monday = NaiveDate::from_ymd_opt(2017, 1, 2).unwrap();
        let recs = records_for(0..7, monday, |d, s| if d == 3 && s == 50 { 5000.0 } else { 90.0 });
        let max = weekly_peak_demand(&recs, AggregationMode::Max).unwrap();
        assert_eq!(max.series.values(), &[5000.0]);
        let sum = weekly_peak_demand(&recs, AggregationMode::Sum).unwrap();
        assert_eq!(sum.series.values(), &[6.0 * 90.0 + 5000.0]);
    }

    #[test]
    fn boundary_weeks_dropped_interior_gap_fails() {
        let monday = NaiveDate::from_ymd_opt(2017, 1, 2).unwrap();
        let recs = records_for(3..24, monday, |_, _| 1.0);
        let w = weekly_peak_demand(&recs, AggregationMode::Sum).unwrap();
        assert_eq!(w.dropped_weeks, 2);
        assert_eq!(w.series.values(), &[7.0, 7.0]);
        let mut gappy = records_for(0..21, monday, |_, _| 1.0);
        gappy.retain(|r| r.timestamp.date() != monday + Duration::days(9));
        assert_eq!(
            weekly_peak_demand(&gappy, AggregationMode::Sum).unwrap_err(),
            Error::Gap("2017-01-11".into())
        );
    }

    #[test]
    fn week_53_merged() {
        // 2015 has 53 ISO weeks; 2015-W52 starts 2015-12-21.
        let monday = NaiveDate::from_ymd_opt(2015, 12, 21).unwrap();
        let recs = records_for(0..21, monday, |d, _| if d < 7 { 10.0 } else if d < 14 { 20.0 } else { 30.0 });
        let sum = weekly_peak_demand(&recs, AggregationMode::Sum).unwrap();
        assert_eq!(sum.series.values(), &[105.0, 210.0]);
        assert_eq!(sum.series.start(), IsoWeek::new(2015, 52).unwrap());
        let max = weekly_peak_demand(&recs, AggregationMode::Max).unwrap();
        assert_eq!(max.series.values(), &[20.0, 30.0]);
    }

    #[test]
    fn env_interpolation_and_merge() {
        let text = "iso_week,max_temp_c,min_temp_c,solar_mj_m2\n\
                    2015-W51,20,10,15\n\
                    2015-W52,22,,17\n\
                    2015-W53,24,12,19\n\
                    2016-W01,,14,21\n\
                    2016-W02,30,16,\n";
        let data = weekly_env(&parse_env(text.as_bytes()).unwrap()).unwrap();
        assert_eq!(data.weather.max.values(), &[20.0, 23.0, 26.5, 30.0]);
        assert_eq!(data.weather.min.values(), &[10.0, 12.0, 14.0, 16.0]);
        assert_eq!(data.weather.sol.values(), &[15.0, 18.0, 21.0, 21.0]);
        assert_eq!(data.missing[0], vec![false, false, true, false]);
        assert_eq!(data.missing[2], vec![false, false, false, true]);
    }

    #[test]
    fn env_rejects_inverted_temperatures() {
        let text = "iso_week,max_temp_c,min_temp_c,solar_mj_m2\n2016-W01,10,12,3\n";
        assert!(matches!(parse_env(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    fn weekly(start: IsoWeek, n: usize) -> TimeSeries {
        TimeSeries::new((0..n).map(|i| i as f64 + 1.0).collect(), start, 52).unwrap()
    }

    fn weather(start: IsoWeek, n: usize) -> WeatherData {
        let s = weekly(start, n);
        WeatherData {
            weather: Weather::new(s.clone(), s.clone(), s).unwrap(),
            missing: [vec![false; n], vec![false; n], vec![false; n]],
        }
    }

    #[test]
    fn split_six_years() {
        let start = IsoWeek::new(2011, 1).unwrap();
        let n = 7 * 52;
        let ds = align_and_split(&weekly(start, n), Some(&weather(start, n)), IsoWeek::new(2016, 52).unwrap(), 52).unwrap();
        assert_eq!(ds.train_len, 312);
        assert_eq!(ds.test_len(), 52);
        let mut joined = ds.train_wpd().into_values();
        joined.extend(ds.test_wpd().unwrap().into_values());
        assert_eq!(joined, weekly(start, n).into_values());
    }

    #[test]
    fn short_weather_is_span_error() {
        let start = IsoWeek::new(2011, 1).unwrap();
        let n = 7 * 52;
        let err = align_and_split(&weekly(start, n), Some(&weather(start, n - 1)), IsoWeek::new(2016, 52).unwrap(), 52);
        assert!(matches!(err, Err(Error::Span(m)) if m.contains("1 week(s) short")));
        assert!(matches!(
            align_and_split(&weekly(start, n), None, IsoWeek::new(2016, 52).unwrap(), 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn dataset_file_round_trip() {
        let start = IsoWeek::new(2011, 1).unwrap();
        let mut w = weather(start, 60);
        w.missing[1][5] = true;
        let ds = align_and_split(&weekly(start, 60), Some(&w), IsoWeek::new(2011, 50).unwrap(), 10).unwrap();
        let mut buf = Vec::new();
        ds.write(&mut buf).unwrap();
        assert_eq!(AlignedDataset::read(buf.as_slice()).unwrap(), ds);
        let bare = align_and_split(&weekly(start, 60), None, IsoWeek::new(2011, 50).unwrap(), 10).unwrap();
        let mut buf = Vec::new();
        bare.write(&mut buf).unwrap();
        assert_eq!(AlignedDataset::read(buf.as_slice()).unwrap(), bare);
    }
}
