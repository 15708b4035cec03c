use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Domain(format!(
            "slope fit needs two or more paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("slope fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    Ok(ls_slope(&lx, &ly))
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Budget point of a rate experiment: iteration count and the metric
/// observed for each seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Slope of the log of the per-`T` seed mean against `log T`.
    pub slope: f64,
    pub intercept: f64,
    /// 95% percentile band from resampling seeds (degenerate for one seed).
    pub band: (f64, f64),
}

const BOOTSTRAP_ROUNDS: usize = 1000;

/// Fits `metric ~ C T^slope`. Needs at least three points spanning a factor
/// of 16 in `T` and the same number of seeds at every point; the band comes
/// from a paired bootstrap over seeds with a fixed resampling stream.
pub fn rate_fit(points: &[RatePoint]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::Domain(format!("rate fit needs >= 3 budget points, got {}", points.len())));
    }
    let tmin = points.iter().map(|p| p.t).fold(f64::INFINITY, f64::min);
    let tmax = points.iter().map(|p| p.t).fold(0.0, f64::max);
    if !(tmax >= 16.0 * tmin) {
        return Err(Error::Domain(format!("budget points must span >= 16x, got {tmin}..{tmax}")));
    }
    let seeds = points[0].values.len();
    if seeds == 0 || points.iter().any(|p| p.values.len() != seeds) {
        return Err(Error::Domain("every budget point needs the same nonzero number of seeds".into()));
    }
    let ts: Vec<f64> = points.iter().map(|p| p.t).collect();
    let mean_at = |idx: &[usize]| -> Vec<f64> {
        points.iter().map(|p| idx.iter().map(|&i| p.values[i]).sum::<f64>() / idx.len() as f64).collect()
    };
    let all: Vec<usize> = (0..seeds).collect();
    let means = mean_at(&all);
    let slope = log_log_slope(&ts, &means)?;
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let intercept = ly.iter().sum::<f64>() / ly.len() as f64 - slope * lx.iter().sum::<f64>() / lx.len() as f64;

    let band = if seeds == 1 {
        (slope, slope)
    } else {
        let mut r = rng::derive(0, "rate_fit_bootstrap");
        let mut slopes: Vec<f64> = (0..BOOTSTRAP_ROUNDS)
            .map(|_| {
                let idx: Vec<usize> = (0..seeds).map(|_| r.random_range(0..seeds)).collect();
                let m = mean_at(&idx);
                let ly: Vec<f64> = m.iter().map(|v| v.ln()).collect();
                ls_slope(&lx, &ly)
            })
            .collect();
        slopes.sort_by(f64::total_cmp);
        let at = |q: f64| slopes[((q * (BOOTSTRAP_ROUNDS - 1) as f64).round()) as usize];
        (at(0.025), at(0.975))
    };
    Ok(RateFit { slope, intercept, band })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<RatePoint> =
            [1e2, 4e2, 1.6e3, 6.4e3].iter().map(|&t: &f64| RatePoint { t, values: vec![3.0 * t.powf(-0.5)] }).collect();
        let fit = rate_fit(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() <= 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() <= 1e-10);
        assert_eq!(fit.band, (fit.slope, fit.slope));
    }

    #[test]
    fn preconditions() {
        let p = |t| RatePoint { t, values: vec![1.0] };
        assert!(rate_fit(&[p(1.0), p(100.0)]).is_err());
        assert!(rate_fit(&[p(1.0), p(2.0), p(8.0)]).is_err());
        assert!(rate_fit(&[p(1.0), p(4.0), p(16.0)]).is_ok());
    }

    #[test]
    fn band_contains_slope() {
        let pts: Vec<RatePoint> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&t: &f64| RatePoint {
                t,
                values: (0..8).map(|s| (1.0 + 0.1 * s as f64) * t.powf(-1.0 / 3.0)).collect(),
            })
            .collect();
        let fit = rate_fit(&pts).unwrap();
        assert!(fit.band.0 <= fit.slope && fit.slope <= fit.band.1);
        assert!((fit.slope + 1.0 / 3.0).abs() < 1e-12);
    }
}
