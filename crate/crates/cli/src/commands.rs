use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use peakload::data::{self, AlignedDataset, Region};
use peakload::synthetic::{self, RegionProfile};
use peakload::{
    evaluation, mae, mape, model_file, simulate, DifferencingOrders, Error, FittedModel, IsoWeek, SarimaParams,
    SarimaSpec,
};

use crate::config::RunConfig;
use crate::pipeline::{self, KpssStage};
use crate::report::{self, full, Table};
use crate::{CliError, Command};

pub fn dispatch(cfg: &RunConfig, command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest {
            demand,
            env,
            region,
            output,
        } => ingest(cfg, &demand, env.as_deref(), region.as_deref(), output),
        Command::Kpss { dataset } => kpss(cfg, &dataset),
        Command::Search { dataset } => search(cfg, &dataset),
        Command::Forecast { model, dataset, output } => forecast(cfg, &model, dataset.as_deref(), output),
        Command::Evaluate { forecasts, actuals } => evaluate(cfg, &forecasts, &actuals),
        Command::Simulate {
            order,
            seasonal_order,
            phi,
            theta,
            seasonal_phi,
            seasonal_theta,
            delta,
            sigma2,
            n,
            start,
            output,
        } => {
            let args = SimulateArgs {
                order,
                seasonal_order,
                phi,
                theta,
                seasonal_phi,
                seasonal_theta,
                delta,
                sigma2,
                n,
                start,
            };
            simulate_cmd(cfg, &args, output)
        }
        Command::Fixture { start_year, years } => fixture(cfg, start_year, years),
        Command::Reproduce { demand, envs } => reproduce(cfg, &demand, &envs),
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::io(&cfg.out_dir, e))?;
    Ok(&cfg.out_dir)
}

fn output_path(cfg: &RunConfig, explicit: Option<PathBuf>, default_name: &str) -> Result<PathBuf, CliError> {
    match explicit {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            Ok(p)
        }
        None => Ok(out_dir(cfg)?.join(default_name)),
    }
}

fn build_dataset(
    cfg: &RunConfig,
    records: &[data::DemandRecord],
    env: Option<&Path>,
) -> Result<(AlignedDataset, usize), CliError> {
    let weekly = data::weekly_peak_demand(records, cfg.agg_mode)?;
    let weather = match env {
        Some(path) => Some(data::weekly_env(&data::load_env(path)?)?),
        None => None,
    };
    let ds = data::align_and_split(&weekly.series, weather.as_ref(), cfg.train_end, cfg.test_len)?;
    Ok((ds, weekly.dropped_weeks))
}

fn pick_region(records: Vec<data::DemandRecord>, region: Option<&str>) -> Result<(Region, Vec<data::DemandRecord>), CliError> {
    let mut by_region = data::split_regions(&records);
    match region {
        Some(code) => {
            let r: Region = code.parse()?;
            let recs = by_region
                .remove(&r)
                .ok_or_else(|| CliError::input(format!("demand file has no records for region {r}")))?;
            Ok((r, recs))
        }
        None if by_region.len() == 1 => Ok(by_region.pop_first().unwrap()),
        None if by_region.is_empty() => Err(CliError::input("demand file has no records")),
        None => Err(CliError::config(format!(
            "demand file holds regions {}; choose one with --region",
            by_region.keys().map(|r| r.code()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn interpolated_count(ds: &AlignedDataset) -> usize {
    ds.weather
        .as_ref()
        .map_or(0, |w| w.missing.iter().map(|m| m.iter().filter(|f| **f).count()).sum())
}

fn ingest(
    cfg: &RunConfig,
    demand: &Path,
    env: Option<&Path>,
    region: Option<&str>,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let (region, records) = pick_region(data::load_demand(demand)?, region)?;
    let (ds, dropped) = build_dataset(cfg, &records, env)?;
    let path = output_path(cfg, output, "dataset.csv")?;
    ds.save(&path)?;
    println!(
        "{region}: {} weeks {}..{} ({} train, {} test), aggregation {}",
        ds.len(),
        ds.wpd.start(),
        ds.wpd.end(),
        ds.train_len,
        ds.test_len(),
        cfg.agg_mode
    );
    if dropped > 0 {
        println!("warning: dropped {dropped} incomplete boundary week(s)");
    }
    let filled = interpolated_count(&ds);
    if filled > 0 {
        println!("warning: interpolated {filled} missing weather value(s)");
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn p_value_text(p: f64) -> String {
    if p <= 0.01 {
        "<=0.01".into()
    } else if p >= 0.10 {
        ">=0.10".into()
    } else {
        format!("{p:.3}")
    }
}

fn kpss_table() -> Table {
    Table::new(
        "KPSS test of weekly peak demand (training span)",
        &["State", "KPSS", "p-value", "d", "D", "KPSS differenced", "p-value differenced"],
    )
}

fn kpss_row(table: &mut Table, label: &str, stage: &KpssStage) {
    let o = &stage.original;
    let f = &stage.differenced;
    let text = vec![
        label.to_string(),
        format!("{:.4}", o.statistic),
        p_value_text(o.p_value_band),
        stage.orders.d.to_string(),
        stage.orders.seasonal_d.to_string(),
        format!("{:.4}", f.statistic),
        p_value_text(f.p_value_band),
    ];
    let csv = vec![
        label.to_string(),
        full(o.statistic),
        full(o.p_value_band),
        stage.orders.d.to_string(),
        stage.orders.seasonal_d.to_string(),
        full(f.statistic),
        full(f.p_value_band),
    ];
    table.row(text, csv);
}

fn kpss(cfg: &RunConfig, dataset: &Path) -> Result<(), CliError> {
    let ds = AlignedDataset::load(dataset)?;
    let train = pipeline::training_series(&ds, cfg)?;
    let stage = pipeline::kpss_stage(&train, cfg)?;
    let dir = out_dir(cfg)?;
    let mut table = kpss_table();
    kpss_row(&mut table, "series", &stage);
    table.save(dir, "kpss")?;
    report::write(&dir.join("acf_pacf.csv"), &pipeline::acf_pacf_csv(&train, &stage.orders)?)?;
    print!("{}", table.to_text());
    Ok(())
}

fn model_label(spec: &SarimaSpec) -> String {
    format!(
        "SARIMA({},{},{})({},{},{}){}",
        spec.p,
        spec.orders.d,
        spec.q,
        spec.seasonal_p,
        spec.orders.seasonal_d,
        spec.seasonal_q,
        spec.period()
    )
}

fn search(cfg: &RunConfig, dataset: &Path) -> Result<(), CliError> {
    let ds = AlignedDataset::load(dataset)?;
    let train = pipeline::training_series(&ds, cfg)?;
    let weather = ds.train_weather();
    let stage = pipeline::search_stage(&train, weather.as_ref(), cfg)?;
    let dir = out_dir(cfg)?;
    let header = cfg.header();
    pipeline::save_model(&stage.crude, dir, "crude")?;
    pipeline::save_report(&stage.orders_report, dir, "search_orders", &header)?;
    println!(
        "crude: {} AICc {:.3} ({} candidates)",
        model_label(&stage.crude.spec),
        stage.crude.aicc,
        stage.orders_report.candidates.len()
    );
    if let Some((hybrid, report)) = &stage.hybrid {
        pipeline::save_model(hybrid, dir, "hybrid")?;
        pipeline::save_report(report, dir, "search_exog", &header)?;
        println!(
            "hybrid: {} + {} AICc {:.3} ({} candidates)",
            model_label(&hybrid.spec),
            hybrid.exog.map_or_else(|| "(none)".into(), |e| e.spec.formula()),
            hybrid.aicc,
            report.candidates.len()
        );
    }
    Ok(())
}

fn forecast(cfg: &RunConfig, model: &Path, dataset: Option<&Path>, output: Option<PathBuf>) -> Result<(), CliError> {
    let model = model_file::load(model)?;
    let ds = dataset.map(AlignedDataset::load).transpose()?;
    let f = pipeline::run_forecast(&model, ds.as_ref(), cfg)?;
    let path = output_path(cfg, output, "forecast.csv")?;
    report::write(&path, &pipeline::forecast_csv(&f))?;
    println!(
        "{} weeks {}..{} at level {} written to {}",
        f.horizon(),
        f.week_at(0),
        f.week_at(f.horizon() - 1),
        f.level,
        path.display()
    );
    Ok(())
}

fn read_weekly_column(path: &Path, column_index: usize) -> Result<BTreeMap<IsoWeek, f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| CliError::input(format!("{}:{}: {m}", path.display(), i + 1));
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let week = cells[0].parse::<IsoWeek>().map_err(|_| bad("bad iso_week"))?;
        let value = cells
            .get(column_index)
            .and_then(|c| c.parse::<f64>().ok())
            .ok_or_else(|| bad("bad value"))?;
        if out.insert(week, value).is_some() {
            return Err(bad(&format!("duplicate week {week}")));
        }
    }
    Ok(out)
}

/// Actual values keyed by week: test rows of a dataset file, or the second
/// column of any `iso_week,...` file.
fn read_actuals(path: &Path) -> Result<BTreeMap<IsoWeek, f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let header = text.lines().next().unwrap_or("");
    if header.starts_with("iso_week,split,wpd") {
        let ds = AlignedDataset::read(text.as_bytes())?;
        let test = ds
            .test_wpd()
            .ok_or_else(|| CliError::input(format!("{}: dataset has no test rows", path.display())))?;
        return Ok((0..test.len()).map(|i| (test.week_at(i), test.values()[i])).collect());
    }
    if !header.starts_with("iso_week,") {
        return Err(CliError::input(format!("{}: expected an iso_week column first", path.display())));
    }
    read_weekly_column(path, 1)
}

fn paired(name: &str, forecast: &BTreeMap<IsoWeek, f64>, actual: &BTreeMap<IsoWeek, f64>) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let missing: Vec<String> = forecast.keys().filter(|w| !actual.contains_key(w)).map(|w| w.to_string()).collect();
    if missing.len() == forecast.len() {
        return Err(CliError::input(format!("forecast {name} has no weeks in common with the actual values")));
    }
    if !missing.is_empty() {
        return Err(CliError::input(format!(
            "forecast {name} weeks without actual values: {}",
            missing.join(", ")
        )));
    }
    Ok(forecast.iter().map(|(w, f)| (*f, actual[w])).unzip())
}

fn accuracy_tables(states: &[(String, [f64; 2], [f64; 2])], labels: [&str; 2]) -> Result<(Table, Table), CliError> {
    let mut mae_t = Table::new(
        "Comparison of MAE (MW)",
        &["State", &format!("{} MAE", labels[0]), &format!("{} MAE", labels[1]), "Improvement (%)"],
    );
    let mut mape_t = Table::new(
        "Comparison of MAPE (%)",
        &["State", &format!("{} MAPE", labels[0]), &format!("{} MAPE", labels[1]), "Improvement (%)"],
    );
    let mut shown_mape = [Vec::new(), Vec::new(), Vec::new()];
    for (state, maes, mapes) in states {
        let imp_mae = evaluation::improvement_pct(maes[0], maes[1])?;
        let imp_mape = evaluation::improvement_pct(mapes[0], mapes[1])?;
        mae_t.row(
            vec![state.clone(), format!("{:.0}", maes[0]), format!("{:.0}", maes[1]), format!("{imp_mae:.1}")],
            vec![state.clone(), full(maes[0]), full(maes[1]), full(imp_mae)],
        );
        mape_t.row(
            vec![state.clone(), format!("{:.2}", mapes[0]), format!("{:.2}", mapes[1]), format!("{imp_mape:.1}")],
            vec![state.clone(), full(mapes[0]), full(mapes[1]), full(imp_mape)],
        );
        // Averages are taken over the values as displayed.
        shown_mape[0].push(format!("{:.2}", mapes[0]).parse::<f64>().unwrap());
        shown_mape[1].push(format!("{:.2}", mapes[1]).parse::<f64>().unwrap());
        shown_mape[2].push(format!("{imp_mape:.1}").parse::<f64>().unwrap());
    }
    if states.len() > 1 {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        mape_t.row(
            vec![
                "Average".into(),
                evaluation::rounded_mean(&shown_mape[0], 2),
                evaluation::rounded_mean(&shown_mape[1], 2),
                evaluation::rounded_mean(&shown_mape[2], 1),
            ],
            vec![
                "Average".into(),
                full(mean(&shown_mape[0])),
                full(mean(&shown_mape[1])),
                full(mean(&shown_mape[2])),
            ],
        );
    }
    Ok((mae_t, mape_t))
}

fn evaluate(cfg: &RunConfig, forecasts: &[String], actuals: &Path) -> Result<(), CliError> {
    let actual = read_actuals(actuals)?;
    let mut table = Table::new("Forecast accuracy", &["Model", "h", "MAE", "MAPE", "MAE improvement (%)", "MAPE improvement (%)"]);
    let mut baseline: Option<(f64, f64)> = None;
    for (i, spec) in forecasts.iter().enumerate() {
        let (name, path) = match spec.split_once('=') {
            Some((n, p)) => (n.to_string(), PathBuf::from(p)),
            None => (format!("forecast{}", i + 1), PathBuf::from(spec)),
        };
        let points = read_weekly_column(&path, 1)?;
        let (f, x) = paired(&name, &points, &actual)?;
        let m = mae(&f, &x)?;
        let p = mape(&f, &x)?;
        let (imp_text, imp_csv) = match baseline {
            None => {
                baseline = Some((m, p));
                (vec![String::new(), String::new()], vec![String::new(), String::new()])
            }
            Some((bm, bp)) => {
                let (a, b) = (evaluation::improvement_pct(bm, m)?, evaluation::improvement_pct(bp, p)?);
                (vec![format!("{a:.1}"), format!("{b:.1}")], vec![full(a), full(b)])
            }
        };
        let mut text = vec![name.clone(), f.len().to_string(), format!("{m:.0}"), format!("{p:.2}")];
        text.extend(imp_text);
        let mut csv = vec![name, f.len().to_string(), full(m), full(p)];
        csv.extend(imp_csv);
        table.row(text, csv);
    }
    let dir = out_dir(cfg)?;
    table.save(dir, "evaluation")?;
    print!("{}", table.to_text());
    Ok(())
}

struct SimulateArgs {
    order: String,
    seasonal_order: String,
    phi: String,
    theta: String,
    seasonal_phi: String,
    seasonal_theta: String,
    delta: f64,
    sigma2: f64,
    n: usize,
    start: String,
}

fn parse_list(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| CliError::config(format!("--{name}: {s:?} is not a number"))))
        .collect()
}

fn parse_triple(name: &str, text: &str) -> Result<[usize; 3], CliError> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::config(format!("--{name} must be three comma-separated integers")))?;
    parts
        .try_into()
        .map_err(|_| CliError::config(format!("--{name} must be three comma-separated integers")))
}

fn simulate_cmd(cfg: &RunConfig, args: &SimulateArgs, output: Option<PathBuf>) -> Result<(), CliError> {
    let [p, d, q] = parse_triple("order", &args.order)?;
    let [sp, sd, sq] = parse_triple("seasonal-order", &args.seasonal_order)?;
    let as_config = |e: Error| CliError::config(e.to_string());
    let orders = DifferencingOrders::new(d, sd, cfg.period).map_err(as_config)?;
    let spec = SarimaSpec::with_orders(orders, p, q, sp, sq).with_intercept(args.delta != 0.0);
    let params = SarimaParams {
        phi: parse_list("phi", &args.phi)?,
        theta: parse_list("theta", &args.theta)?,
        seasonal_phi: parse_list("seasonal-phi", &args.seasonal_phi)?,
        seasonal_theta: parse_list("seasonal-theta", &args.seasonal_theta)?,
        delta: args.delta,
        sigma2: args.sigma2,
    };
    params.validate(&spec).map_err(as_config)?;
    let start: IsoWeek = args.start.parse().map_err(as_config)?;
    let series = simulate(&spec, &params, args.n, cfg.seed).map_err(as_config)?;
    let series = peakload::TimeSeries::new(series.into_values(), start, 52)?;
    let ds = AlignedDataset {
        train_len: series.len(),
        wpd: series,
        weather: None,
    };
    let path = output_path(cfg, output, "simulated.csv")?;
    ds.save(&path)?;
    println!("{spec} with seed {}: {} weeks written to {}", cfg.seed, args.n, path.display());
    Ok(())
}

fn fixture(cfg: &RunConfig, start_year: i32, years: usize) -> Result<(), CliError> {
    if years == 0 {
        return Err(CliError::config("--years must be positive"));
    }
    let dir = out_dir(cfg)?;
    let start = IsoWeek::new(start_year, 1)?;
    let mut records = Vec::new();
    for region in Region::ALL {
        let profile = RegionProfile::for_region(region);
        let f = synthetic::generate(&profile, start, years * 52, synthetic::region_seed(cfg.seed, region))?;
        records.extend(synthetic::demand_records(&f.wpd, region));
        let path = dir.join(format!("env_{}.csv", region.code().to_ascii_lowercase()));
        let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        data::write_env(&synthetic::env_records(&f.weather), std::io::BufWriter::new(file))?;
    }
    records.sort_by_key(|r| (r.timestamp, r.region));
    let path = dir.join("demand.csv");
    let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    data::write_demand(&records, std::io::BufWriter::new(file))?;
    println!(
        "wrote {} demand records and weather for NSW, VIC, SA to {}",
        records.len(),
        dir.display()
    );
    Ok(())
}

struct RegionResult {
    region: Region,
    kpss: KpssStage,
    crude: FittedModel,
    hybrid: FittedModel,
    mae: [f64; 2],
    mape: [f64; 2],
}

fn parse_env_args(envs: &[String]) -> Result<BTreeMap<Region, PathBuf>, CliError> {
    let mut out = BTreeMap::new();
    for e in envs {
        let (region, path) = e
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--env {e:?} must look like REGION=PATH")))?;
        let region: Region = region.parse()?;
        if out.insert(region, PathBuf::from(path)).is_some() {
            return Err(CliError::config(format!("--env given twice for {region}")));
        }
    }
    Ok(out)
}

fn reproduce_region(
    cfg: &RunConfig,
    region: Region,
    records: &[data::DemandRecord],
    env: &Path,
    dir: &Path,
) -> Result<RegionResult, CliError> {
    let (ds, _) = build_dataset(cfg, records, Some(env)).map_err(|e| e.at(&format!("ingest ({region})")))?;
    ds.save(&dir.join("dataset.csv"))?;
    let train = pipeline::training_series(&ds, cfg)?;
    let test = ds.test_wpd().expect("test span is nonempty");
    let stage = |name: &str| format!("{name} ({region})");

    let kpss = pipeline::kpss_stage(&train, cfg).map_err(|e| CliError::from(e).at(&stage("kpss")))?;
    report::write(
        &dir.join("acf_pacf.csv"),
        &pipeline::acf_pacf_csv(&train, &kpss.orders).map_err(|e| CliError::from(e).at(&stage("kpss")))?,
    )?;

    let weather = ds.train_weather().expect("dataset built with weather");
    let (crude, orders_report) = peakload::selection::select_sarima(&train, kpss.orders, cfg.max_order_sum)
        .map_err(|e| CliError::from(e).at(&stage("order search")))?;
    let (hybrid, exog_report) = if cfg.joint {
        peakload::selection::select_joint(&train, kpss.orders, cfg.max_order_sum, &weather)
    } else {
        peakload::selection::select_exog(&train, &crude.spec, &weather)
    }
    .map_err(|e| CliError::from(e).at(&stage("exog search")))?;
    let header = cfg.header();
    pipeline::save_model(&crude, dir, "crude")?;
    pipeline::save_model(&hybrid, dir, "hybrid")?;
    pipeline::save_report(&orders_report, dir, "search_orders", &header)?;
    pipeline::save_report(&exog_report, dir, "search_exog", &header)?;

    let fcfg = RunConfig {
        horizon: ds.test_len(),
        ..cfg.clone()
    };
    let fc = pipeline::run_forecast(&crude, Some(&ds), &fcfg).map_err(|e| e.at(&stage("forecast")))?;
    let fh = pipeline::run_forecast(&hybrid, Some(&ds), &fcfg).map_err(|e| e.at(&stage("forecast")))?;
    report::write(&dir.join("forecast_crude.csv"), &pipeline::forecast_csv(&fc))?;
    report::write(&dir.join("forecast_hybrid.csv"), &pipeline::forecast_csv(&fh))?;

    let x = test.values();
    let score = |f: &[f64]| -> Result<(f64, f64), CliError> {
        Ok((mae(f, x)?, mape(f, x)?))
    };
    let (mc, pc) = score(&fc.point).map_err(|e| e.at(&stage("evaluate")))?;
    let (mh, ph) = score(&fh.point).map_err(|e| e.at(&stage("evaluate")))?;
    Ok(RegionResult {
        region,
        kpss,
        crude,
        hybrid,
        mae: [mc, mh],
        mape: [pc, ph],
    })
}

fn reproduce(cfg: &RunConfig, demand: &Path, envs: &[String]) -> Result<(), CliError> {
    let envs = parse_env_args(envs)?;
    let records = data::load_demand(demand).map_err(|e| CliError::from(e).at("ingest"))?;
    let mut by_region = data::split_regions(&records);
    let dir = out_dir(cfg)?.to_path_buf();
    let mut results = Vec::new();
    for (region, env) in &envs {
        let recs = by_region
            .remove(region)
            .ok_or_else(|| CliError::input(format!("demand file has no records for {region}")).at("ingest"))?;
        let region_dir = dir.join(region.code());
        std::fs::create_dir_all(&region_dir).map_err(|e| CliError::io(&region_dir, e))?;
        results.push(reproduce_region(cfg, *region, &recs, env, &region_dir)?);
    }

    let mut t2 = kpss_table();
    let mut t3 = Table::new("Selected SARIMA models", &["State", "Model", "AICc"]);
    let mut t4 = Table::new(
        "Selected combination of environmental variables",
        &["State", "Combination", "Model", "AICc"],
    );
    for r in &results {
        let code = r.region.code();
        kpss_row(&mut t2, code, &r.kpss);
        t3.row(
            vec![code.into(), model_label(&r.crude.spec), format!("{:.2}", r.crude.aicc)],
            vec![code.into(), model_label(&r.crude.spec), full(r.crude.aicc)],
        );
        let combo = r.hybrid.exog.map_or_else(|| "(none)".into(), |e| e.spec.formula());
        t4.row(
            vec![code.into(), combo.clone(), model_label(&r.hybrid.spec), format!("{:.2}", r.hybrid.aicc)],
            vec![code.into(), combo, model_label(&r.hybrid.spec), full(r.hybrid.aicc)],
        );
    }
    let states: Vec<(String, [f64; 2], [f64; 2])> =
        results.iter().map(|r| (r.region.code().to_string(), r.mae, r.mape)).collect();
    let (t5, t6) = accuracy_tables(&states, ["Crude", "Hybrid"])?;

    let mut text = String::new();
    let _ = writeln!(text, "settings: {}", cfg.header());
    let _ = writeln!(text, "train end: {}  test weeks: {}", cfg.train_end, cfg.test_len);
    for (stem, table) in [
        ("table2_kpss", &t2),
        ("table3_orders", &t3),
        ("table4_exog", &t4),
        ("table5_mae", &t5),
        ("table6_mape", &t6),
    ] {
        table.save(&dir, stem)?;
        let _ = writeln!(text, "\n{}", table.to_text());
    }
    report::write(&dir.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_layout() {
        let states = vec![
            ("NSW".to_string(), [3742.0, 1724.0], [5.0, 2.59]),
            ("VIC".to_string(), [1000.0, 900.0], [6.0, 3.37]),
            ("SA".to_string(), [888.0, 504.0], [7.0, 4.38]),
        ];
        let (mae_t, mape_t) = accuracy_tables(&states, ["Crude", "Hybrid"]).unwrap();
        assert!(mae_t.to_text().contains("53.9"));
        assert!(mae_t.to_text().contains("43.2"));
        let last = mape_t.to_text().lines().last().unwrap().to_string();
        assert!(last.starts_with("Average") && last.contains("3.45"), "{last}");
    }

    #[test]
    fn triples_and_lists() {
        assert_eq!(parse_triple("order", "1,0,2").unwrap(), [1, 0, 2]);
        assert!(parse_triple("order", "1,0").is_err());
        assert_eq!(parse_list("phi", "0.5, -0.2").unwrap(), vec![0.5, -0.2]);
        assert!(parse_list("phi", "").unwrap().is_empty());
    }

    #[test]
    fn p_values() {
        assert_eq!(p_value_text(0.01), "<=0.01");
        assert_eq!(p_value_text(0.1), ">=0.10");
        assert_eq!(p_value_text(0.05), "0.050");
    }
}
