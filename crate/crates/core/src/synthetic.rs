//! Synthetic weekly demand with known weather effects.
//!
//! Real interval demand and station weather cannot be redistributed, so the
//! test suite and the guide run on generated data. Each region gets an
//! annual weather cycle with weekly anomalies, and weekly peak demand equal
//! to a base level plus quadratic responses to maximum and minimum
//! temperature plus autocorrelated noise. Solar exposure is generated but has
//! no effect on demand.

use chrono::Duration;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{iso_week_monday, DemandRecord, Region, WeatherData, WeeklyEnvRecord};
use crate::error::Result;
use crate::exog::Weather;
use crate::series::{IsoWeek, TimeSeries, WEEKS_PER_YEAR};

/// Demand-generating parameters of one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionProfile {
    /// Weekly peak demand at the centering temperatures.
    pub level: f64,
    /// Temperatures at which the quadratic responses bottom out.
    pub max_comfort: f64,
    pub min_comfort: f64,
    pub max_linear: f64,
    pub max_quadratic: f64,
    pub min_quadratic: f64,
    /// Standard deviation of the AR(1) noise innovations.
    pub noise_sd: f64,
    pub noise_ar: f64,
    /// Mean summer maximum and winter-summer swing of the weather cycle.
    pub max_temp_mean: f64,
    pub temp_swing: f64,
}

impl RegionProfile {
    pub fn for_region(region: Region) -> Self {
        match region {
            Region::Nsw => Self {
                level: 60_000.0,
                max_comfort: 22.0,
                min_comfort: 12.0,
                max_linear: 250.0,
                max_quadratic: 110.0,
                min_quadratic: 90.0,
                noise_sd: 600.0,
                noise_ar: 0.5,
                max_temp_mean: 22.5,
                temp_swing: 5.5,
            },
            Region::Vic => Self {
                level: 45_000.0,
                max_comfort: 20.0,
                min_comfort: 10.0,
                max_linear: 200.0,
                max_quadratic: 90.0,
                min_quadratic: 80.0,
                noise_sd: 500.0,
                noise_ar: 0.5,
                max_temp_mean: 20.0,
                temp_swing: 6.0,
            },
            Region::Sa => Self {
                level: 14_000.0,
                max_comfort: 22.0,
                min_comfort: 12.0,
                max_linear: 60.0,
                max_quadratic: 30.0,
                min_quadratic: 25.0,
                noise_sd: 150.0,
                noise_ar: 0.4,
                max_temp_mean: 22.0,
                temp_swing: 6.5,
            },
        }
    }
}

/// Weekly demand and weather for one region.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub wpd: TimeSeries,
    pub weather: Weather,
}

/// Seed for one region of a multi-region fixture, so that regions draw
/// independent weather.
pub fn region_seed(seed: u64, region: Region) -> u64 {
    let index = Region::ALL.iter().position(|r| *r == region).expect("listed region") as u64;
    seed.wrapping_mul(31).wrapping_add(index)
}

/// Generates `weeks` consecutive weeks starting at `start`.
pub fn generate(profile: &RegionProfile, start: IsoWeek, weeks: usize, seed: u64) -> Result<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let mut draw = |sd: f64| std.sample(&mut rng) * sd;
    let (mut max, mut min, mut sol, mut wpd) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut noise = 0.0;
    for i in 0..weeks {
        let week = start.offset(i as i64).week() as f64;
        // Southern-hemisphere cycle: warmest around week 4.
        let cycle = (2.0 * std::f64::consts::PI * (week - 4.0) / WEEKS_PER_YEAR as f64).cos();
        let hi = profile.max_temp_mean + profile.temp_swing * cycle + draw(2.5);
        let lo = (hi - 10.0 + 1.5 * cycle + draw(1.5)).min(hi - 1.0);
        let sun = (17.0 + 7.0 * cycle + draw(2.5)).max(0.5);
        noise = profile.noise_ar * noise + draw(profile.noise_sd);
        let dx = hi - profile.max_comfort;
        let dn = lo - profile.min_comfort;
        wpd.push(profile.level + profile.max_linear * dx + profile.max_quadratic * dx * dx + profile.min_quadratic * dn * dn + noise);
        max.push(hi);
        min.push(lo);
        sol.push(sun);
    }
    let period = WEEKS_PER_YEAR as usize;
    Ok(Fixture {
        wpd: TimeSeries::new(wpd, start, period)?,
        weather: Weather::new(
            TimeSeries::new(max, start, period)?,
            TimeSeries::new(min, start, period)?,
            TimeSeries::new(sol, start, period)?,
        )?,
    })
}

/// Expands weekly peak demand into 15-minute records whose daily peaks sum
/// to the weekly value. Each folded week maps to its ISO week; week 52 of a
/// 53-week year is written to both weeks 52 and 53, so summed aggregation
/// returns the weekly value unchanged.
pub fn demand_records(wpd: &TimeSeries, region: Region) -> Vec<DemandRecord> {
    let mut out = Vec::new();
    for (i, value) in wpd.values().iter().enumerate() {
        let week = wpd.week_at(i);
        let mut raw_weeks = vec![week.week()];
        if week.week() == 52 && iso_week_monday(week.year(), 53).is_some() {
            raw_weeks.push(53);
        }
        let daily_peak = value / 7.0;
        for raw in raw_weeks {
            let monday = iso_week_monday(week.year(), raw).expect("valid ISO week");
            for day in 0..7 {
                let midnight = (monday + Duration::days(day)).and_hms_opt(0, 0, 0).expect("midnight");
                for slot in 0..96i64 {
                    // Daily shape with its maximum of 1 at slot 70 (17:30).
                    let shape = 0.7 + 0.3 * (-((slot - 70) as f64 / 18.0).powi(2)).exp();
                    out.push(DemandRecord {
                        timestamp: midnight + Duration::minutes(15 * slot),
                        region,
                        demand: daily_peak * shape,
                    });
                }
            }
        }
    }
    out
}

/// Weather rows for the weather file, one per folded week; week 52 of a
/// 53-week year is repeated as week 53.
pub fn env_records(weather: &Weather) -> Vec<WeeklyEnvRecord> {
    let mut out = Vec::new();
    for i in 0..weather.len() {
        let week = weather.max.week_at(i);
        let mut raw = vec![week.week()];
        if week.week() == 52 && iso_week_monday(week.year(), 53).is_some() {
            raw.push(53);
        }
        for w in raw {
            out.push(WeeklyEnvRecord {
                year: week.year(),
                week: w,
                max_temp: Some(weather.max.values()[i]),
                min_temp: Some(weather.min.values()[i]),
                solar: Some(weather.sol.values()[i]),
            });
        }
    }
    out
}

/// Wraps generated weather with all-false missing flags.
pub fn weather_data(weather: &Weather) -> WeatherData {
    let n = weather.len();
    WeatherData {
        weather: weather.clone(),
        missing: [vec![false; n], vec![false; n], vec![false; n]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{weekly_env, weekly_peak_demand, AggregationMode};

    #[test]
    fn deterministic_and_sane() {
        let p = RegionProfile::for_region(Region::Sa);
        let start = IsoWeek::new(2011, 1).unwrap();
        let a = generate(&p, start, 104, 4).unwrap();
        assert_eq!(a, generate(&p, start, 104, 4).unwrap());
        let w = &a.weather;
        assert!((0..104).all(|i| w.max.values()[i] > w.min.values()[i] && w.sol.values()[i] > 0.0));
        assert!(a.wpd.values().iter().all(|v| *v > 0.0));
    }

    #[test]
    fn records_aggregate_back() {
        let p = RegionProfile::for_region(Region::Vic);
        // 2015 has an ISO week 53.
        let start = IsoWeek::new(2015, 50).unwrap();
        let f = generate(&p, start, 5, 1).unwrap();
        let recs = demand_records(&f.wpd, Region::Vic);
        let back = weekly_peak_demand(&recs, AggregationMode::Sum).unwrap();
        assert_eq!(back.dropped_weeks, 0);
        for (a, b) in back.series.values().iter().zip(f.wpd.values()) {
            assert!((a - b).abs() < 1e-9 * b);
        }
        let env = weekly_env(&env_records(&f.weather)).unwrap();
        assert_eq!(env.weather, f.weather);
    }
}
