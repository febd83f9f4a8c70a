use chrono::{Duration, NaiveDate};
use proptest::prelude::*;

use peakload::data::{self, AggregationMode, DemandRecord, Region};
use peakload::stationarity::kpss_p_value;
use peakload::{
    acf, aicc, difference, evaluation, fit, forecast, integrate, kpss_test, mae, mape, pacf, residual_diagnostics,
    simulate, DifferencingOrders, FittedModel, IsoWeek, SarimaParams, SarimaSpec, TimeSeries,
};

fn start() -> IsoWeek {
    IsoWeek::new(2010, 1).unwrap()
}

fn values(min_len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-100.0f64..100.0, min_len..min_len + 60)
}

prop_compose! {
    fn orders()(d in 0usize..=2, seasonal_d in 0usize..=1, period in prop::sample::select(vec![1usize, 4, 12, 52]))
        -> DifferencingOrders {
        let seasonal_d = if period == 1 { 0 } else { seasonal_d };
        DifferencingOrders::new(d, seasonal_d, period).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn difference_integrate_round_trip(o in orders(), v in values(110)) {
        let x = TimeSeries::new(v.clone(), start(), o.period).unwrap();
        let dx = difference(&x, &o).unwrap();
        prop_assert_eq!(dx.len(), x.len() - o.d - o.seasonal_d * o.period);
        let back = integrate(&dx, &o, &v[..o.lost()]).unwrap();
        prop_assert_eq!(back.start(), x.start());
        // Rounding in the stored differences compounds through d + D
        // integrations, so the highest combined order gets a wider bound.
        let rel = if o.d + o.seasonal_d <= 2 { 1e-12 } else { 1e-11 };
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for (a, b) in back.values().iter().zip(&v) {
            prop_assert!((a - b).abs() <= rel * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn integer_round_trip_is_exact(o in orders(), v in proptest::collection::vec(-10_000i32..10_000, 110..170)) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let x = TimeSeries::new(v.clone(), start(), o.period).unwrap();
        let back = integrate(&difference(&x, &o).unwrap(), &o, &v[..o.lost()]).unwrap();
        prop_assert_eq!(back.values(), &v[..]);
    }

    #[test]
    fn acf_and_pacf_bounded(v in values(20)) {
        let x = TimeSeries::from_values(v).unwrap();
        let lags = x.len() / 2;
        let r = acf(&x, lags).unwrap();
        let p = pacf(&x, lags).unwrap();
        prop_assert!(r.iter().all(|c| c.abs() <= 1.0 + 1e-12));
        prop_assert!(p.iter().all(|c| c.abs() <= 1.0 + 1e-12));
        prop_assert_eq!(p[0], r[1]);
    }

    #[test]
    fn kpss_shift_and_scale_invariant(v in values(30), shift in -1e3f64..1e3, scale in 0.01f64..100.0) {
        let base = kpss_test(&TimeSeries::from_values(v.clone()).unwrap()).unwrap().statistic;
        let moved: Vec<f64> = v.iter().map(|x| scale * x + shift).collect();
        let other = kpss_test(&TimeSeries::from_values(moved).unwrap()).unwrap().statistic;
        prop_assert!((base - other).abs() <= 1e-8 * base.max(1e-3));
    }

    #[test]
    fn kpss_p_value_nonincreasing(a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(kpss_p_value(lo) >= kpss_p_value(hi));
    }

    #[test]
    fn metric_scaling(pairs in proptest::collection::vec((1.0f64..1e4, 1.0f64..1e4), 1..40), c in 0.01f64..100.0) {
        let (f, x): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let (fc, xc): (Vec<f64>, Vec<f64>) = (f.iter().map(|v| v * c).collect(), x.iter().map(|v| v * c).collect());
        let (m, p) = (mae(&f, &x).unwrap(), mape(&f, &x).unwrap());
        prop_assert!(m >= 0.0 && p >= 0.0);
        prop_assert!((mape(&fc, &xc).unwrap() - p).abs() <= 1e-9 * p.max(1.0));
        prop_assert!((mae(&fc, &xc).unwrap() - c * m).abs() <= 1e-9 * (c * m).max(1.0));
        prop_assert_eq!(mae(&x, &x).unwrap(), 0.0);
        prop_assert_eq!(mape(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn improvement_recovers_hybrid(crude in 1e-3f64..1e5, hybrid in 0.0f64..1e5) {
        let imp = evaluation::improvement_pct(crude, hybrid).unwrap();
        prop_assert!((crude * (1.0 - imp / 100.0) - hybrid).abs() <= 1e-10 * crude.max(hybrid).max(1.0));
    }

    #[test]
    fn ar_forecast_follows_recurrence(
        phi1 in -0.6f64..0.6,
        phi2 in -0.3f64..0.3,
        delta in -5.0f64..5.0,
        seed in 0u64..1000,
    ) {
        let spec = SarimaSpec::arima(2, 0, 0);
        let params = SarimaParams { phi: vec![phi1, phi2], delta, sigma2: 1.0, ..SarimaParams::zeros(&spec) };
        let y = simulate(&spec, &params, 80, seed).unwrap();
        let model = FittedModel::from_params(&y, &spec, &params, None, None).unwrap();
        let f = forecast(&model, 10, None, 0.95).unwrap();
        let mut hist = y.values().to_vec();
        for h in 0..10 {
            let n = hist.len();
            let next = delta + phi1 * hist[n - 1] + phi2 * hist[n - 2];
            prop_assert!((f.point[h] - next).abs() <= 1e-10 * next.abs().max(1.0));
            hist.push(next);
        }
        for h in 0..10 {
            prop_assert!(f.lower[h] <= f.point[h] && f.point[h] <= f.upper[h]);
            if h > 0 {
                prop_assert!(f.upper[h] - f.lower[h] >= f.upper[h - 1] - f.lower[h - 1] - 1e-12);
            }
        }
    }

    #[test]
    fn sum_mode_dominates_max_mode(peaks in proptest::collection::vec(100.0f64..1e4, 14..=28)) {
        let monday = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let days = peaks.len() / 7 * 7;
        let records: Vec<DemandRecord> = (0..days * 96)
            .map(|i| DemandRecord {
                timestamp: monday + Duration::minutes(15 * i as i64),
                region: Region::Nsw,
                demand: peaks[i / 96] * (0.5 + 0.5 * ((i % 96) as f64 / 95.0)),
            })
            .collect();
        let sum = data::weekly_peak_demand(&records, AggregationMode::Sum).unwrap().series;
        let max = data::weekly_peak_demand(&records, AggregationMode::Max).unwrap().series;
        prop_assert_eq!(sum.len(), days / 7);
        for (s, m) in sum.values().iter().zip(max.values()) {
            prop_assert!(s >= m);
        }
    }

    #[test]
    fn split_concatenates_back(v in proptest::collection::vec(1.0f64..1e4, 60..120), test_len in 1usize..30) {
        let wpd = TimeSeries::new(v.clone(), start(), 52).unwrap();
        let train_end = start().offset((v.len() - test_len - 1) as i64);
        let ds = data::align_and_split(&wpd, None, train_end, test_len).unwrap();
        let mut joined = ds.train_wpd().values().to_vec();
        joined.extend_from_slice(ds.test_wpd().unwrap().values());
        prop_assert_eq!(joined, v);
        prop_assert_eq!(ds.test_len(), test_len);
    }
}

#[test]
fn aicc_recomputes_from_fitted_models() {
    let cases = [
        (SarimaSpec::arima(1, 0, 0), vec![0.5], vec![]),
        (SarimaSpec::arima(0, 1, 1), vec![], vec![0.4]),
        (SarimaSpec::arima(1, 0, 1).seasonal(1, 0, 0, 4), vec![0.3], vec![0.2]),
    ];
    for (i, (spec, phi, theta)) in cases.into_iter().enumerate() {
        let mut params = SarimaParams::zeros(&spec);
        params.phi = phi;
        params.theta = theta;
        if spec.seasonal_p > 0 {
            params.seasonal_phi = vec![0.4];
        }
        let y = simulate(&spec, &params, 150, i as u64).unwrap();
        let m = fit(&y, &spec, None).unwrap();
        assert_eq!(m.aicc, aicc(m.loglik, m.num_params(), m.n_effective).unwrap());
        assert_eq!(m.n_effective, y.len() - spec.orders.lost());
    }
}

#[test]
fn well_specified_residuals_pass_band_check() {
    let spec = SarimaSpec::arima(1, 0, 1);
    let params = SarimaParams {
        phi: vec![0.6],
        theta: vec![0.3],
        sigma2: 1.0,
        ..SarimaParams::zeros(&spec)
    };
    let seeds = 20;
    let passed = (0..seeds)
        .filter(|&seed| {
            let y = simulate(&spec, &params, 400, seed).unwrap();
            let m = fit(&y, &spec, None).unwrap();
            // Two of twenty lags outside a 95% band is within chance.
            residual_diagnostics(&m.residuals, 20).unwrap().lags_outside_band.len() <= 2
        })
        .count();
    assert!(passed * 10 >= seeds as usize * 9, "{passed}/{seeds}");
}
