//! The experiments behind each subcommand. Every experiment returns the JSON
//! `results` of its summary and writes its tables into the run directory.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use zetalab::approximants::{p_from_log, theta_from_log, z_n_line, SmoothedEulerProduct};
use zetalab::arith::divisor_table;
use zetalab::constants::{arithmetic_factor, barnes_g_factor, dk_series, dk_tail, ks_prediction, MomentPrediction};
use zetalab::meanvalue::{besicovitch_dist2, fourier_coeff, moment};
use zetalab::stats::{
    density_profile, mass_on_set, phase_exceedance, sin2_identity_residual, write_histogram_csv, zero_one_ratio,
};
use zetalab::zeros::{neighborhoods, IntervalSet, ZeroTable};
use zetalab::zeta_eval::{pow_line, zeta_line_chunked, LineSeries, TGrid};

use crate::config::{Config, Experiment};
use crate::error::CliError;
use crate::output::{input_hash, lib_write, num, RunDir};

/// Tolerance for the limiting constants quoted next to measured means.
const SERIES_TOL: f64 = 1e-8;

/// Resolves inputs, runs the experiment and writes the run directory.
/// Returns the summary.
pub fn run(cfg: &Config) -> Result<Value, CliError> {
    let mut inputs: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    if let Some(path) = &cfg.zeros {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        inputs.push((path.clone(), bytes));
    }
    let zeros = match inputs.first() {
        Some((path, bytes)) => Some(ZeroTable::parse(&bytes[..], path.display().to_string())?),
        None => None,
    };
    let borrowed: Vec<(&Path, &[u8])> = inputs.iter().map(|(p, b)| (p.as_path(), b.as_slice())).collect();
    let hash = input_hash(cfg, &borrowed);

    let mut cfg = cfg.clone();
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("zetalab_runs").join(format!("{}-{}", cfg.experiment.name(), &hash[..12])));
    cfg.out = Some(out.clone());
    let mut dir = RunDir::create(out)?;
    let zeros = zeros.as_ref();
    let results = match cfg.experiment {
        Experiment::Moments => moments(&cfg, &mut dir)?,
        Experiment::Fourier => fourier(&cfg, &mut dir)?,
        Experiment::Besicovitch => besicovitch(&cfg, &mut dir)?,
        Experiment::Phase => phase(&cfg, &mut dir, zeros.ok_or(CliError::MissingZeroTable("phase"))?)?,
        Experiment::ZeroOne => zero_one(&cfg, &mut dir, zeros)?,
        Experiment::Constants => constants(&cfg)?,
        Experiment::Mass => mass(&cfg, &mut dir, zeros.ok_or(CliError::MissingZeroTable("mass"))?)?,
        Experiment::Identity => identity(&cfg, &mut dir, zeros)?,
    };
    dir.finish(&cfg, &hash, results)
}

fn grid(cfg: &Config) -> Result<TGrid, CliError> {
    Ok(TGrid::new(cfg.sigma, cfg.t0, cfg.big_t, cfg.h)?)
}

fn zeta(cfg: &Config, dir: &mut RunDir) -> Result<LineSeries, CliError> {
    let z = zeta_line_chunked(&grid(cfg)?, cfg.tol, cfg.chunk)?;
    if cfg.write_series {
        series_csv(dir, "zeta.csv", &z)?;
    }
    Ok(z)
}

fn series_csv(dir: &mut RunDir, name: &str, s: &LineSeries) -> Result<(), CliError> {
    let path = dir.path().join(name);
    dir.write(name, |w| s.write_csv(w).map_err(lib_write(&path)))
}

fn log_p(cfg: &Config, big_n: u64, grid: &TGrid) -> Result<LineSeries, CliError> {
    Ok(SmoothedEulerProduct::new(big_n, cfg.sigma)?.log_line(grid, cfg.chunk)?)
}

/// One entry per `delta`, or a single unmasked entry without a zero table.
fn masks(cfg: &Config, zeros: Option<&ZeroTable>) -> Result<Vec<(Option<f64>, Option<IntervalSet>)>, CliError> {
    match zeros {
        None => Ok(vec![(None, None)]),
        Some(z) => cfg
            .delta
            .iter()
            .map(|&d| Ok((Some(d), Some(neighborhoods(z, d, cfg.t0, cfg.big_t)?))))
            .collect(),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

fn histogram(cfg: &Config, dir: &mut RunDir, zeta: &LineSeries) -> Result<(), CliError> {
    let bins = density_profile(cfg.k, zeta, cfg.bins)?;
    let path = dir.path().join("histogram.csv");
    dir.write("histogram.csv", |w| write_histogram_csv(&bins, w).map_err(lib_write(&path)))
}

fn moments(cfg: &Config, dir: &mut RunDir) -> Result<Value, CliError> {
    let zeta = zeta(cfg, dir)?;
    let m = moment(cfg.k, &zeta)?;
    histogram(cfg, dir, &zeta)?;
    let limit = if cfg.sigma > 0.5 {
        match dk_series(cfg.k, cfg.sigma, SERIES_TOL) {
            Ok(s) => json!(s),
            Err(e) => json!({ "unavailable": e.to_string() }),
        }
    } else {
        Value::Null
    };
    let conjectured = if cfg.sigma == 0.5 { Some(ks_prediction(cfg.k, cfg.big_t)?) } else { None };
    Ok(json!({
        "integral": m.integral,
        "mean": m.normalized,
        "limit_of_mean": limit,
        "conjectured_integral": conjectured,
    }))
}

fn fourier(cfg: &Config, dir: &mut RunDir) -> Result<Value, CliError> {
    let power = pow_line(&zeta(cfg, dir)?, cfg.k)?;
    let n_max = cfg.n.iter().copied().max().unwrap_or(1);
    let d = divisor_table(cfg.k, usize::try_from(n_max).map_err(|_| CliError::Config("n too large".into()))?)?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &n in &cfg.n {
        let lambda = -(n as f64).ln();
        let e = fourier_coeff(&power, lambda)?;
        let predicted = d.get(n as usize) as f64 * (n as f64).powf(-cfg.sigma);
        let abs_error = (e.value() - predicted).norm();
        rows.push(vec![n.to_string(), num(lambda), num(e.value_re), num(e.value_im), num(predicted), num(abs_error), num(e.error_proxy)]);
        records.push(json!({ "n": n, "lambda": lambda, "estimate": e, "predicted": predicted, "abs_error": abs_error }));
    }
    dir.csv("fourier.csv", &["n", "lambda", "re", "im", "predicted", "abs_error", "error_proxy"], &rows)?;
    Ok(json!({ "coefficients": records }))
}

fn besicovitch(cfg: &Config, dir: &mut RunDir) -> Result<Value, CliError> {
    let zeta = zeta(cfg, dir)?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &big_n in &cfg.big_n {
        let e = besicovitch_dist2(cfg.k, big_n, &zeta)?;
        let predicted = dk_tail(cfg.k, cfg.sigma, big_n, SERIES_TOL).ok();
        rows.push(vec![big_n.to_string(), num(e.value_re), opt(predicted), num(e.error_proxy)]);
        records.push(json!({ "N": big_n, "estimate": e, "predicted": predicted }));
    }
    dir.csv("besicovitch.csv", &["N", "dist2", "predicted", "error_proxy"], &rows)?;
    Ok(json!({ "distances": records }))
}

fn phase(cfg: &Config, dir: &mut RunDir, zeros: &ZeroTable) -> Result<Value, CliError> {
    let zeta = zeta(cfg, dir)?;
    let power = pow_line(&zeta, cfg.k)?;
    let masks = masks(cfg, Some(zeros))?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &big_n in &cfg.big_n {
        let log_p = log_p(cfg, big_n, &zeta.grid)?;
        let p = p_from_log(&log_p, cfg.k);
        for (i, (delta, mask)) in masks.iter().enumerate() {
            let (_, theta) = z_n_line(&power, &p, mask.as_ref())?;
            let e = phase_exceedance(&theta, cfg.eps)?;
            if cfg.write_series {
                let name = format!("theta_N{big_n}_d{i}.csv");
                let path = dir.path().join(&name);
                dir.write(&name, |w| theta.write_csv(w).map_err(lib_write(&path)))?;
            }
            rows.push(vec![
                big_n.to_string(),
                opt(*delta),
                num(e.eps),
                num(e.fraction),
                e.retained_points.to_string(),
                e.masked_points.to_string(),
                num(e.masked_measure),
            ]);
            records.push(json!({ "N": big_n, "delta": delta, "exceedance": e }));
        }
    }
    dir.csv(
        "phase.csv",
        &["N", "delta", "eps", "fraction", "retained_points", "masked_points", "masked_measure"],
        &rows,
    )?;
    Ok(json!({ "zeros": zeros.len(), "exceedance": records }))
}

fn zero_one(cfg: &Config, dir: &mut RunDir, zeros: Option<&ZeroTable>) -> Result<Value, CliError> {
    let zeta = zeta(cfg, dir)?;
    let masks = masks(cfg, zeros)?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &big_n in &cfg.big_n {
        let log_p = log_p(cfg, big_n, &zeta.grid)?;
        for (delta, mask) in &masks {
            let theta = theta_from_log(&log_p, 1).with_mask(mask.clone())?;
            let e = zero_one_ratio(cfg.k, big_n, &zeta, &theta)?;
            rows.push(vec![big_n.to_string(), opt(*delta), num(e.value_re), num(e.error_proxy), num(e.retained_measure)]);
            records.push(json!({ "N": big_n, "delta": delta, "ratio": e }));
        }
    }
    dir.csv("zero_one.csv", &["N", "delta", "ratio", "error_proxy", "retained_measure"], &rows)?;
    Ok(json!({ "ratios": records }))
}

fn identity(cfg: &Config, dir: &mut RunDir, zeros: Option<&ZeroTable>) -> Result<Value, CliError> {
    let zeta = zeta(cfg, dir)?;
    let masks = masks(cfg, zeros)?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &big_n in &cfg.big_n {
        let log_p = log_p(cfg, big_n, &zeta.grid)?;
        let p = p_from_log(&log_p, 1);
        for (delta, mask) in &masks {
            let theta = theta_from_log(&log_p, 1).with_mask(mask.clone())?;
            let r = sin2_identity_residual(cfg.k, &zeta, &p, &theta)?;
            rows.push(vec![
                big_n.to_string(),
                opt(*delta),
                num(r.moment),
                num(r.cos_term),
                num(r.sin2_term),
                num(r.residual),
                num(r.relative()),
            ]);
            records.push(json!({ "N": big_n, "delta": delta, "identity": r, "relative": r.relative() }));
        }
    }
    dir.csv("identity.csv", &["N", "delta", "moment", "cos_term", "sin2_term", "residual", "relative"], &rows)?;
    Ok(json!({ "residuals": records }))
}

fn mass(cfg: &Config, dir: &mut RunDir, zeros: &ZeroTable) -> Result<Value, CliError> {
    let zeta = zeta(cfg, dir)?;
    let power = pow_line(&zeta, cfg.k)?;
    histogram(cfg, dir, &zeta)?;
    let span = cfg.big_t - cfg.t0;
    let in_range = zeros.between(cfg.t0, cfg.big_t).len();
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (delta, set) in masks(cfg, Some(zeros))? {
        let set = set.expect("a zero table gives a set per delta");
        let m = mass_on_set(&power, &set)?;
        let fraction = set.total_measure() / span;
        rows.push(vec![opt(delta), num(m), num(fraction)]);
        records.push(json!({ "delta": delta, "mass": m, "measure_fraction": fraction }));
    }
    dir.csv("mass.csv", &["delta", "mass", "measure_fraction"], &rows)?;
    Ok(json!({ "zeros_in_range": in_range, "mass": records }))
}

fn constants(cfg: &Config) -> Result<Value, CliError> {
    let a = arithmetic_factor(cfg.k, cfg.p_max, cfg.a_tol)?;
    let g = barnes_g_factor(cfg.k)?;
    let prediction = MomentPrediction { k: cfg.k, a_k: a.value, g_k: g.clone() };
    Ok(json!({
        "k": cfg.k,
        "a_k": a.value,
        "a_k_tail_estimate": a.tail_estimate,
        "p_max": a.p_max,
        "g_k_num": g.numer().to_string(),
        "g_k_den": g.denom().to_string(),
        "g_k": prediction.g_k_f64(),
        "a_k_g_k": prediction.leading_constant(),
    }))
}
