//! Sweep axis syntax: `start:stop:step` (inclusive), `a,b,c`, or a single value.

use crate::error::CliError;

/// Slack, in steps, for an inclusive stop that is not an exact multiple.
const STOP_SLACK: f64 = 1e-9;
const MAX_POINTS: f64 = 1e7;

pub fn parse_axis(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Input(format!("invalid axis '{text}': {why}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));

    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad("expected start:stop:step"));
        };
        let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(bad("bounds must be finite"));
        }
        if step <= 0.0 {
            return Err(bad("step must be positive"));
        }
        if stop < start {
            return Err(bad("stop is below start"));
        }
        let steps = ((stop - start) / step + STOP_SLACK).floor();
        if steps >= MAX_POINTS {
            return Err(bad("too many points"));
        }
        let count = steps as usize + 1;
        return Ok((0..count).map(|i| (start + i as f64 * step).min(stop)).collect());
    }

    let values = text
        .split(',')
        .map(number)
        .collect::<Result<Vec<_>, _>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}
