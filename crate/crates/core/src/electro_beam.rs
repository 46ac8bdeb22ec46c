//! Electricity-to-beam conversion at the transmitter.
//!
//! Beam power follows a square-root law in the source power above the
//! lasing threshold and is zero below it. The fitting routines recover
//! that law (or a straight line, for comparison) from measured samples.

use crate::error::{Error, Result};
use crate::model::{Efficiency, PowerW, SqrtFitCoeffs};
use crate::search::golden_section_min;

/// One measured `(source power, beam power)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredSample {
    pub source_power: PowerW,
    pub beam_power: PowerW,
}

impl MeasuredSample {
    pub fn new(source_w: f64, beam_w: f64) -> Result<Self> {
        Ok(MeasuredSample {
            source_power: PowerW::new(source_w)?,
            beam_power: PowerW::new(beam_w)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFitCoeffs {
    pub slope: f64,
    pub intercept: f64,
}

/// A fitted beam-power model used to compute residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamModel {
    Sqrt(SqrtFitCoeffs),
    Linear(LinearFitCoeffs),
}

impl BeamModel {
    pub fn predict(&self, ps: PowerW) -> f64 {
        match self {
            BeamModel::Sqrt(c) => beam_power(ps, c).get(),
            BeamModel::Linear(l) => l.slope * ps.get() + l.intercept,
        }
    }
}

/// Source power below which no beam is generated: the root of
/// `a1 * sqrt(b1 + P) + c1`, clamped at zero.
pub fn lasing_threshold(coeffs: &SqrtFitCoeffs) -> PowerW {
    if coeffs.c1 >= 0.0 {
        return PowerW::ZERO;
    }
    let r = coeffs.c1 / coeffs.a1;
    PowerW::clamped(r * r - coeffs.b1)
}

/// Intra-cavity beam power at the transmitter for source power `ps`.
pub fn beam_power(ps: PowerW, coeffs: &SqrtFitCoeffs) -> PowerW {
    if ps <= lasing_threshold(coeffs) {
        return PowerW::ZERO;
    }
    PowerW::clamped(coeffs.a1 * (coeffs.b1 + ps.get()).sqrt() + coeffs.c1)
}

/// Electricity-to-beam conversion efficiency `P_bt / P_s`.
pub fn eta_eb(ps: PowerW, coeffs: &SqrtFitCoeffs) -> Result<Efficiency> {
    if ps.get() == 0.0 {
        return Err(Error::Domain(
            "conversion efficiency is undefined at zero source power".into(),
        ));
    }
    Efficiency::new(beam_power(ps, coeffs).get() / ps.get())
}

/// Source power maximising the conversion efficiency, and that efficiency.
///
/// With `t = sqrt(b1 + P_s)` the efficiency is `(a1 t + c1) / (t^2 - b1)`;
/// its derivative vanishes where `a1 t^2 + 2 c1 t + a1 b1 = 0`. The roots
/// multiply to `b1`, so exactly one lies above `sqrt(b1)` when they are
/// real, distinct and positive.
pub fn peak_eta_eb(coeffs: &SqrtFitCoeffs) -> Result<(PowerW, Efficiency)> {
    let SqrtFitCoeffs { a1, b1, c1 } = *coeffs;
    let disc = c1 * c1 - a1 * a1 * b1;
    if c1 >= 0.0 || disc <= 0.0 {
        return Err(Error::Model("no interior peak".into()));
    }
    let t = (-c1 + disc.sqrt()) / a1;
    if t <= b1.sqrt() {
        return Err(Error::Model("no interior peak".into()));
    }
    let ps = PowerW::new(t * t - b1)?;
    Ok((ps, eta_eb(ps, coeffs)?))
}

/// Per-sample squared residual of the model against measured beam power.
pub fn squared_errors(samples: &[MeasuredSample], model: &BeamModel) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::Domain("no samples".into()));
    }
    Ok(samples
        .iter()
        .map(|s| {
            let r = model.predict(s.source_power) - s.beam_power.get();
            r * r
        })
        .collect())
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn mse_of(samples: &[MeasuredSample], model: &BeamModel) -> Result<f64> {
    Ok(mean(&squared_errors(samples, model)?))
}

fn distinct_source_powers(samples: &[MeasuredSample]) -> usize {
    let mut ps: Vec<f64> = samples.iter().map(|s| s.source_power.get()).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    ps.len()
}

/// Ordinary least squares of `y` on `x`. Centred sums for stability.
fn ols(x: impl Iterator<Item = f64> + Clone, y: impl Iterator<Item = f64> + Clone) -> Option<(f64, f64)> {
    let n = x.clone().count() as f64;
    let mx = x.clone().sum::<f64>() / n;
    let my = y.clone().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (xi, yi) in x.zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Fits `P_bt = slope * P_s + intercept`. Returns the coefficients and MSE.
pub fn fit_linear(samples: &[MeasuredSample]) -> Result<(LinearFitCoeffs, f64)> {
    if distinct_source_powers(samples) < 2 {
        return Err(Error::Fit(
            "linear fit needs at least 2 distinct source powers".into(),
        ));
    }
    let (slope, intercept) = ols(
        samples.iter().map(|s| s.source_power.get()),
        samples.iter().map(|s| s.beam_power.get()),
    )
    .ok_or_else(|| Error::Fit("degenerate source powers".into()))?;
    let coeffs = LinearFitCoeffs { slope, intercept };
    let mse = mse_of(samples, &BeamModel::Linear(coeffs))?;
    Ok((coeffs, mse))
}

pub const B1_BRACKET: (f64, f64) = (1e-3, 1e3);
pub const B1_TOLERANCE: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 200;
const B1_SCAN_POINTS: usize = 241;

/// Best `(a1, c1)` for a fixed `b1`, and the unclamped sum of squared residuals.
fn profile(samples: &[MeasuredSample], b1: f64) -> (f64, f64, f64) {
    let x = samples.iter().map(|s| (b1 + s.source_power.get()).sqrt());
    let y = samples.iter().map(|s| s.beam_power.get());
    let Some((a1, c1)) = ols(x.clone(), y.clone()) else {
        return (f64::NAN, f64::NAN, f64::INFINITY);
    };
    let sse = x.zip(y).map(|(xi, yi)| (a1 * xi + c1 - yi).powi(2)).sum();
    (a1, c1, sse)
}

/// Fits the square-root law by variable projection.
///
/// For fixed `b1` the model is linear in `(a1, c1)`, solved by least
/// squares. The outer search over `b1` first scans the bracket on a log
/// grid, then refines by golden section between the neighbours of the
/// best grid point. Returns the coefficients and MSE.
pub fn fit_sqrt(samples: &[MeasuredSample]) -> Result<(SqrtFitCoeffs, f64)> {
    if samples.len() < 4 {
        return Err(Error::Fit(format!(
            "square-root fit needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    if distinct_source_powers(samples) < 3 {
        return Err(Error::Fit(
            "square-root fit needs at least 3 distinct source powers".into(),
        ));
    }
    if let Some(s) = samples.iter().find(|s| s.beam_power.get() <= 0.0) {
        return Err(Error::Fit(format!(
            "sample at P_s = {} W has no beam power; only lasing samples can be fitted",
            s.source_power.get()
        )));
    }

    let (lo, hi) = B1_BRACKET;
    let (log_lo, log_hi) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..B1_SCAN_POINTS)
        .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / (B1_SCAN_POINTS - 1) as f64).exp())
        .collect();
    let best = grid
        .iter()
        .enumerate()
        .map(|(i, &b1)| (i, profile(samples, b1).2))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .expect("grid is non-empty");
    let left = grid[best.saturating_sub(1)];
    let right = grid[(best + 1).min(grid.len() - 1)];

    let search = golden_section_min(
        |b1| profile(samples, b1).2,
        left,
        right,
        B1_TOLERANCE,
        MAX_ITERATIONS,
    );
    let (a1, c1, _) = profile(samples, search.x);
    let coeffs = SqrtFitCoeffs {
        a1,
        b1: search.x,
        c1,
    };
    let mse = mse_of(samples, &BeamModel::Sqrt(coeffs))?;

    if !search.converged {
        return Err(Error::NoConvergence {
            iterations: search.iterations,
            best_mse: mse,
        });
    }
    let on_edge = |b: f64| (b - lo).abs() <= B1_TOLERANCE || (b - hi).abs() <= B1_TOLERANCE * hi;
    if on_edge(coeffs.b1) {
        return Err(Error::Fit(format!(
            "b1 ran to the edge of its bracket [{lo}, {hi}] (mse {mse}); data is not square-root shaped"
        )));
    }
    if a1.is_nan() || a1 <= 0.0 {
        return Err(Error::Fit(format!("fitted a1 = {a1} is not positive")));
    }
    Ok((coeffs, mse))
}
