//! Least-squares decay fits on sweep rows.

use std::str::FromStr;

use varjac_core::Error;

use crate::error::HarnessError;
use crate::sweep::{Route, SweepRow};

const MIN_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    /// `ln|v|` against `ln n` on the local maxima of `|v|`.
    EnvelopeMaxima,
    /// `ln|v|` against `ln n` on every row.
    AllPoints,
    /// `ln|v|` against `n`: the per-step exponential rate.
    LogRate,
}

impl FitMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FitMethod::EnvelopeMaxima => "envelope_maxima",
            FitMethod::AllPoints => "all_points",
            FitMethod::LogRate => "log_rate",
        }
    }
}

impl FromStr for FitMethod {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "envelope" | "envelope_maxima" => Ok(FitMethod::EnvelopeMaxima),
            "all" | "all_points" => Ok(FitMethod::AllPoints),
            "lograte" | "log_rate" => Ok(FitMethod::LogRate),
            other => Err(HarnessError::Config(format!("unknown fit method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub points_used: usize,
    pub method: FitMethod,
}

/// Ordinary least squares `y = c + s x`; returns `(s, stderr(s), c)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let c = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - c - slope * a).powi(2)).sum();
    let stderr = if x.len() > 2 { (ssr / (m - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, stderr, c)
}

/// Fits the decay of `route` across `rows` (taken in `n` order).
pub fn fit_decay_exponent(rows: &[SweepRow], route: Route, method: FitMethod) -> Result<FitReport, Error> {
    let mut pts: Vec<(u64, i8, f64)> = rows
        .iter()
        .filter(|r| r.n > 0)
        .filter_map(|r| {
            let v = r.value(route)?;
            (v.sign != 0).then_some((r.n, v.sign, v.ln_abs())).filter(|p| p.2.is_finite())
        })
        .collect();
    pts.sort_by_key(|p| p.0);

    let (x, y): (Vec<f64>, Vec<f64>) = match method {
        FitMethod::AllPoints => pts.iter().map(|p| ((p.0 as f64).ln(), p.2)).unzip(),
        FitMethod::LogRate => pts.iter().map(|p| (p.0 as f64, p.2)).unzip(),
        FitMethod::EnvelopeMaxima => {
            if !pts.windows(2).any(|w| w[0].1 != w[1].1) {
                return Err(Error::InsufficientData(format!(
                    "route {route}: no sign changes, envelope maxima need an oscillating sequence"
                )));
            }
            pts.windows(3)
                .filter(|w| w[1].2 > w[0].2 && w[1].2 >= w[2].2)
                .map(|w| ((w[1].0 as f64).ln(), w[1].2))
                .unzip()
        }
    };
    if x.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "route {route}: {} usable points for {}, need {MIN_POINTS}",
            x.len(),
            method.as_str()
        )));
    }
    let (fitted_slope, slope_stderr, intercept) = least_squares(&x, &y);
    Ok(FitReport { fitted_slope, slope_stderr, intercept, points_used: x.len(), method })
}
