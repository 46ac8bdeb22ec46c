//! End-to-end link: source power to battery charging power.
//!
//! With the PV panel held at its maximum power point the output power is
//!
//! ```text
//! P_m = a2 * eta_bt * (a1 * sqrt(b1 + P_s) + c1) + b2
//! ```
//!
//! and the overall efficiency `eta_om = P_m / P_s * eta_dc * eta_ce`.
//! Writing `t = sqrt(b1 + P_s)`, `d eta_om / d P_s` has the sign of
//!
//! ```text
//! g(t) = -(a1 / 2) t^2 - (c1 + b2 / (a2 eta_bt)) t - a1 b1 / 2
//! ```
//!
//! whose roots multiply to `b1`. When `g(sqrt(b1)) > 0` exactly one root
//! `xi` lies above `sqrt(b1)`, and `P_s = xi^2 - b1` is the unique optimum.

use rayon::prelude::*;

use crate::channel::ChannelSpec;
use crate::electro_beam::beam_power;
use crate::error::{Error, Result};
use crate::model::{CelsiusTemp, Efficiency, LinkConfig, MppLinearCoeffs, PowerW, SqrtFitCoeffs};

/// Relative step used to confirm the optimum is a strict local maximum.
const OPTIMUM_PROBE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub source_power: PowerW,
    pub eta_bt: Efficiency,
    pub temp: CelsiusTemp,
}

impl OperatingPoint {
    pub fn new(source_w: f64, eta_bt: f64, temp_c: f64) -> Result<Self> {
        Ok(OperatingPoint {
            source_power: PowerW::new(source_w)?,
            eta_bt: Efficiency::new(eta_bt)?,
            temp: CelsiusTemp::new(temp_c)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumResult {
    pub ps_star: PowerW,
    pub eta_opt: Efficiency,
    pub pm_star: PowerW,
    pub pb_star: PowerW,
    /// Root of `g` in `t = sqrt(b1 + P_s)` space.
    pub xi: f64,
}

fn require_transmission(eta_bt: Efficiency) -> Result<()> {
    if eta_bt.get() > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain("beam transmission efficiency must be positive".into()))
    }
}

/// `c1 + b2 / (a2 * eta_bt)`: the linear coefficient of `-g`.
fn shifted_offset(sqrt: &SqrtFitCoeffs, mpp: &MppLinearCoeffs, eta_bt: f64) -> f64 {
    sqrt.c1 + mpp.b2 / (mpp.a2 * eta_bt)
}

/// PV output power at the maximum power point, clamped at zero.
pub fn output_power_pm(point: &OperatingPoint, config: &LinkConfig) -> Result<PowerW> {
    let mpp = config.mpp_coeffs_at(point.temp)?;
    let pbr = point.eta_bt.get() * beam_power(point.source_power, &config.sqrt_coeffs).get();
    Ok(PowerW::clamped(mpp.a2 * pbr + mpp.b2))
}

/// Battery charging power after the DC-DC converter and charger.
pub fn battery_power(pm: PowerW, config: &LinkConfig) -> PowerW {
    PowerW::clamped(pm.get() * config.eta_dc * config.eta_ce)
}

/// Smallest source power with positive output at `(eta_bt, temp)`; the
/// efficiency is defined on the open interval above it.
pub fn feasible_min_source_power(eta_bt: Efficiency, temp: CelsiusTemp, config: &LinkConfig) -> Result<f64> {
    require_transmission(eta_bt)?;
    let sq = &config.sqrt_coeffs;
    let mpp = config.mpp_coeffs_at(temp)?;
    let k = shifted_offset(sq, &mpp, eta_bt.get());
    let threshold = crate::electro_beam::lasing_threshold(sq).get();
    if k >= 0.0 {
        return Ok(threshold);
    }
    let t0 = -k / sq.a1;
    Ok((t0 * t0 - sq.b1).max(threshold))
}

/// Closed-form efficiency without feasibility checks. Negative below the
/// feasible interval.
fn eta_om_raw(ps: f64, eta_bt: f64, sq: &SqrtFitCoeffs, mpp: &MppLinearCoeffs, chain: f64) -> f64 {
    (sq.a1 * mpp.a2 * eta_bt * (sq.b1 + ps).sqrt() + (mpp.a2 * sq.c1 * eta_bt + mpp.b2)) / ps * chain
}

/// Overall source-to-battery efficiency.
pub fn eta_om(point: &OperatingPoint, config: &LinkConfig) -> Result<Efficiency> {
    let min = feasible_min_source_power(point.eta_bt, point.temp, config)?;
    let ps = point.source_power.get();
    if ps <= min {
        return Err(Error::Infeasible { ps, min });
    }
    let mpp = config.mpp_coeffs_at(point.temp)?;
    let eta = eta_om_raw(ps, point.eta_bt.get(), &config.sqrt_coeffs, &mpp, config.output_chain());
    Efficiency::new(eta)
}

/// The quadratic `g(t)` whose sign is that of `d eta_om / d P_s`.
pub fn g_quadratic(t: f64, eta_bt: f64, sqrt: &SqrtFitCoeffs, mpp: &MppLinearCoeffs) -> f64 {
    let k = shifted_offset(sqrt, mpp, eta_bt);
    -0.5 * sqrt.a1 * t * t - k * t - 0.5 * sqrt.a1 * sqrt.b1
}

/// Real roots of `g`, ascending. Empty when the discriminant is negative.
pub fn g_roots(eta_bt: f64, sqrt: &SqrtFitCoeffs, mpp: &MppLinearCoeffs) -> Vec<f64> {
    let k = shifted_offset(sqrt, mpp, eta_bt);
    let disc = k * k - sqrt.a1 * sqrt.a1 * sqrt.b1;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    // Product of roots is b1; take the large-magnitude one directly.
    let big = (-k + k.signum() * -s) / sqrt.a1;
    if big == 0.0 {
        return vec![0.0, 0.0];
    }
    let small = sqrt.b1 / big;
    let mut roots = vec![small, big];
    roots.sort_by(f64::total_cmp);
    roots
}

/// Source power maximising the end-to-end efficiency at fixed `eta_bt`
/// and PV temperature.
pub fn optimal_source_power(eta_bt: Efficiency, temp: CelsiusTemp, config: &LinkConfig) -> Result<OptimumResult> {
    require_transmission(eta_bt)?;
    let sq = &config.sqrt_coeffs;
    let mpp = config.mpp_coeffs_at(temp)?;
    let floor = sq.b1.sqrt();

    let above: Vec<f64> = g_roots(eta_bt.get(), sq, &mpp)
        .into_iter()
        .filter(|&t| t > floor)
        .collect();
    let xi = match above.as_slice() {
        [xi] => *xi,
        _ => {
            return Err(Error::Model(format!(
                "g has {} roots above sqrt(b1) = {floor}; no unique optimum",
                above.len()
            )))
        }
    };

    let ps_star = PowerW::new(xi * xi - sq.b1)?;
    let point = OperatingPoint {
        source_power: ps_star,
        eta_bt,
        temp,
    };
    let eta_opt = eta_om(&point, config)?;
    for factor in [1.0 - OPTIMUM_PROBE, 1.0 + OPTIMUM_PROBE] {
        let probe = OperatingPoint {
            source_power: PowerW::new(ps_star.get() * factor)?,
            ..point
        };
        if let Ok(e) = eta_om(&probe, config) {
            if e >= eta_opt {
                return Err(Error::Model(format!(
                    "efficiency at {} W is not a strict maximum",
                    ps_star.get()
                )));
            }
        }
    }
    let pm_star = output_power_pm(&point, config)?;
    Ok(OptimumResult {
        ps_star,
        eta_opt,
        pm_star,
        pb_star: battery_power(pm_star, config),
        xi,
    })
}

/// Beam transmission axis of a sweep: given directly or derived from
/// channel ranges.
#[derive(Debug, Clone, PartialEq)]
pub enum EtaBtAxis {
    Direct(Vec<f64>),
    Ranges { channel: ChannelSpec, ranges_km: Vec<f64> },
}

impl EtaBtAxis {
    pub fn values(&self) -> Result<Vec<Efficiency>> {
        match self {
            EtaBtAxis::Direct(v) => v.iter().map(|&e| Efficiency::new(e)).collect(),
            EtaBtAxis::Ranges { channel, ranges_km } => ranges_km
                .iter()
                .map(|&r| channel.with_range(r).eta_bt())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub source_powers: Vec<f64>,
    pub eta_bt: EtaBtAxis,
    pub temps: Vec<f64>,
}

/// One sweep row. `eta_om` is `None` where output power is not positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub ps: f64,
    pub eta_bt: f64,
    pub temp: f64,
    pub pm: f64,
    pub pb: f64,
    pub eta_om: Option<f64>,
    pub ps_star: f64,
    pub eta_opt: f64,
}

/// Evaluates the grid `eta_bt x temp x P_s`, rows ordered by axis index
/// with `P_s` varying fastest.
pub fn sweep(spec: &SweepSpec, config: &LinkConfig) -> Result<Vec<SweepRow>> {
    if spec.source_powers.is_empty() || spec.temps.is_empty() {
        return Err(Error::Config("sweep axes must not be empty".into()));
    }
    let etas = spec.eta_bt.values()?;
    if etas.is_empty() {
        return Err(Error::Config("sweep axes must not be empty".into()));
    }
    let powers = spec
        .source_powers
        .iter()
        .map(|&p| PowerW::new(p))
        .collect::<Result<Vec<_>>>()?;
    let temps = spec
        .temps
        .iter()
        .map(|&t| {
            let t = CelsiusTemp::new(t)?;
            config.mpp_coeffs_at(t)?;
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = etas.iter().find(|e| e.get() <= 0.0) {
        return Err(Error::Config(format!(
            "beam transmission efficiency {bad} on sweep axis must be positive"
        )));
    }

    let curves: Vec<(Efficiency, CelsiusTemp)> = etas
        .iter()
        .flat_map(|&e| temps.iter().map(move |&t| (e, t)))
        .collect();
    let blocks = curves
        .par_iter()
        .map(|&(eta_bt, temp)| {
            let opt = optimal_source_power(eta_bt, temp, config)?;
            powers
                .iter()
                .map(|&ps| {
                    let point = OperatingPoint {
                        source_power: ps,
                        eta_bt,
                        temp,
                    };
                    let pm = output_power_pm(&point, config)?;
                    let eta_om = match eta_om(&point, config) {
                        Ok(e) => Some(e.get()),
                        Err(Error::Infeasible { .. }) => None,
                        Err(e) => return Err(e),
                    };
                    Ok(SweepRow {
                        ps: ps.get(),
                        eta_bt: eta_bt.get(),
                        temp: temp.get(),
                        pm: pm.get(),
                        pb: battery_power(pm, config).get(),
                        eta_om,
                        ps_star: opt.ps_star.get(),
                        eta_opt: opt.eta_opt.get(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(blocks.into_iter().flatten().collect())
}
