//! Beam-to-electricity conversion in the receiver's PV panel.
//!
//! The panel is an ideal single-diode string (no series or shunt
//! resistance) of `n_series` identical cells:
//!
//! ```text
//! I(V) = I_ph - I_0(T) * (exp(V / (N * n * V_t(T))) - 1)
//! ```
//!
//! `I_ph` scales linearly with irradiance, which is the received beam power
//! times `area_factor`. `I_0` is fixed from the reference short-circuit
//! current and open-circuit voltage at `t_ref` and translated to the cell
//! temperature with the usual diode law. `P(V) = V * I(V)` is strictly
//! concave, so the maximum power point is unique.

use crate::error::{Error, Result};
use crate::model::{CelsiusTemp, Efficiency, MppLinearCoeffs, PowerW};
use crate::search::golden_section_max;

const BOLTZMANN: f64 = 1.380_649e-23; // J/K
const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19; // C
const KELVIN_OFFSET: f64 = 273.15;

pub const MPP_TOLERANCE_V: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 200;

/// Thermal voltage `kT/q` in volts.
pub fn thermal_voltage(kelvin: f64) -> f64 {
    BOLTZMANN * kelvin / ELEMENTARY_CHARGE
}

/// Electrical constants of a PV panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiodeParams {
    /// Cell short-circuit current at reference irradiance (A).
    pub isc_ref: f64,
    /// Cell open-circuit voltage at reference irradiance (V).
    pub voc_ref: f64,
    /// Irradiance at which `isc_ref` and `voc_ref` were measured (W/cm^2).
    pub ir0: f64,
    /// Diode quality factor.
    pub ideality: f64,
    pub n_series: u32,
    /// Temperature of the reference measurement (C).
    pub t_ref: f64,
    /// Band gap used in the saturation-current temperature law (eV).
    pub bandgap_ev: f64,
    /// Temperature exponent of the saturation current, divided by the
    /// quality factor when applied.
    pub isat_temp_exponent: f64,
    /// Irradiance per watt of received beam power (cm^-2).
    pub area_factor: f64,
    /// Beam frequency (Hz). Informational; the model does not use it.
    pub beam_frequency_hz: f64,
}

impl Default for DiodeParams {
    /// GaSb panel constants. `area_factor` is a placeholder of 1 cm^-2;
    /// see [`DiodeParams::calibrated`].
    fn default() -> Self {
        DiodeParams {
            isc_ref: 0.305,
            voc_ref: 0.464,
            ir0: 2.7187,
            ideality: 1.1,
            n_series: 72,
            t_ref: 120.0,
            bandgap_ev: 1.11,
            isat_temp_exponent: 3.0,
            area_factor: 1.0,
            beam_frequency_hz: 1.9355e14,
        }
    }
}

/// Panel MPP to reproduce when calibrating `area_factor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTarget {
    pub pbr: f64,
    pub temp_c: f64,
    pub power: f64,
}

impl Default for CalibrationTarget {
    /// 12.19 W at 25 W received and 25 C.
    fn default() -> Self {
        CalibrationTarget {
            pbr: 25.0,
            temp_c: 25.0,
            power: 12.19,
        }
    }
}

pub const AREA_FACTOR_BRACKET: (f64, f64) = (1e-4, 1e2);

impl DiodeParams {
    /// Default constants with `area_factor` calibrated to the default target.
    pub fn calibrated() -> Self {
        calibrate_area_factor(&CalibrationTarget::default(), &DiodeParams::default())
            .expect("default panel calibrates")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("isc_ref", self.isc_ref),
            ("voc_ref", self.voc_ref),
            ("ir0", self.ir0),
            ("ideality", self.ideality),
            ("bandgap_ev", self.bandgap_ev),
            ("area_factor", self.area_factor),
            ("beam_frequency_hz", self.beam_frequency_hz),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("diode.{name} must be positive, got {v}")));
            }
        }
        if !self.isat_temp_exponent.is_finite() {
            return Err(Error::Config("diode.isat_temp_exponent must be finite".into()));
        }
        if self.n_series == 0 {
            return Err(Error::Config("diode.n_series must be at least 1".into()));
        }
        if !(self.t_ref.is_finite() && self.t_ref + KELVIN_OFFSET > 0.0) {
            return Err(Error::Config("diode.t_ref must be above absolute zero".into()));
        }
        Ok(())
    }

    /// Photocurrent for a received beam power.
    pub fn photocurrent(&self, pbr: PowerW) -> f64 {
        self.isc_ref * pbr.get() * self.area_factor / self.ir0
    }

    /// Per-cell saturation current at `temp`.
    pub fn saturation_current(&self, temp: CelsiusTemp) -> f64 {
        let t_ref = self.t_ref + KELVIN_OFFSET;
        let t = temp.kelvin();
        let i0_ref = self.isc_ref / (self.voc_ref / (self.ideality * thermal_voltage(t_ref))).exp_m1();
        let n = self.ideality;
        let q_over_k = ELEMENTARY_CHARGE / BOLTZMANN;
        i0_ref
            * (t / t_ref).powf(self.isat_temp_exponent / n)
            * (self.bandgap_ev * q_over_k / n * (1.0 / t_ref - 1.0 / t)).exp()
    }

    /// Panel-level diode voltage scale `N * n * V_t`.
    fn voltage_scale(&self, temp: CelsiusTemp) -> f64 {
        f64::from(self.n_series) * self.ideality * thermal_voltage(temp.kelvin())
    }
}

/// Panel operating point at maximum power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MppResult {
    pub voltage: f64,
    pub current: f64,
    pub power: f64,
}

/// Panel current at terminal voltage `v_panel`, clamped at zero past
/// open circuit.
pub fn cell_current(v_panel: f64, pbr: PowerW, temp: CelsiusTemp, params: &DiodeParams) -> f64 {
    let iph = params.photocurrent(pbr);
    let i0 = params.saturation_current(temp);
    (iph - i0 * (v_panel / params.voltage_scale(temp)).exp_m1()).max(0.0)
}

fn require_positive(pbr: PowerW) -> Result<()> {
    if pbr.get() > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "received beam power must be positive, got {} W",
            pbr.get()
        )))
    }
}

pub fn open_circuit_voltage(pbr: PowerW, temp: CelsiusTemp, params: &DiodeParams) -> Result<f64> {
    require_positive(pbr)?;
    let ratio = params.photocurrent(pbr) / params.saturation_current(temp);
    Ok(params.voltage_scale(temp) * ratio.ln_1p())
}

/// Maximum power point by golden-section search over `[0, V_oc]`.
pub fn mpp(pbr: PowerW, temp: CelsiusTemp, params: &DiodeParams) -> Result<MppResult> {
    let voc = open_circuit_voltage(pbr, temp, params)?;
    let r = golden_section_max(
        |v| v * cell_current(v, pbr, temp, params),
        0.0,
        voc,
        MPP_TOLERANCE_V,
        MAX_ITERATIONS,
    );
    if !r.converged {
        return Err(Error::Model(format!(
            "MPP search did not converge in {} iterations",
            r.iterations
        )));
    }
    let current = cell_current(r.x, pbr, temp, params);
    Ok(MppResult {
        voltage: r.x,
        current,
        power: r.x * current,
    })
}

pub fn mpp_sweep(
    pbr_list: &[PowerW],
    temp: CelsiusTemp,
    params: &DiodeParams,
) -> Result<Vec<(PowerW, MppResult)>> {
    pbr_list
        .iter()
        .map(|&p| Ok((p, mpp(p, temp, params)?)))
        .collect()
}

/// Least-squares line `P_m = a2 * P_br + b2` through sweep output.
/// Sign constraints on the coefficients are not enforced here.
pub fn fit_mpp_linear(sweep: &[(PowerW, MppResult)]) -> Result<MppLinearCoeffs> {
    let n = sweep.len();
    if n < 2 {
        return Err(Error::Fit(format!("MPP line needs at least 2 points, got {n}")));
    }
    let nf = n as f64;
    let mx = sweep.iter().map(|(p, _)| p.get()).sum::<f64>() / nf;
    let my = sweep.iter().map(|(_, m)| m.power).sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (p, m) in sweep {
        let dx = p.get() - mx;
        sxx += dx * dx;
        sxy += dx * (m.power - my);
    }
    if sxx <= 0.0 {
        return Err(Error::Fit("MPP line needs distinct received powers".into()));
    }
    let a2 = sxy / sxx;
    Ok(MppLinearCoeffs {
        a2,
        b2: my - a2 * mx,
    })
}

/// Maximum panel conversion efficiency `P_m / P_br = a2 + b2 / P_br`.
pub fn eta_bem(pbr: PowerW, coeffs: &MppLinearCoeffs) -> Result<Efficiency> {
    let zero = coeffs.zero_power_input();
    if pbr.get() <= 0.0 || pbr.get() < zero {
        return Err(Error::Domain(format!(
            "received beam power {} W is below the positive-output threshold {zero} W",
            pbr.get()
        )));
    }
    Efficiency::new((coeffs.a2 + coeffs.b2 / pbr.get()).max(0.0))
}

/// Returns `params` with `area_factor` chosen so the MPP at the target
/// received power and temperature equals the target power.
///
/// MPP power is increasing in `area_factor`, so bisection (in log space)
/// on [`AREA_FACTOR_BRACKET`] is enough.
pub fn calibrate_area_factor(target: &CalibrationTarget, params: &DiodeParams) -> Result<DiodeParams> {
    let pbr = PowerW::new(target.pbr)?;
    require_positive(pbr)?;
    let temp = CelsiusTemp::new(target.temp_c)?;
    let power_at = |area: f64| -> Result<f64> {
        let p = DiodeParams {
            area_factor: area,
            ..*params
        };
        Ok(mpp(pbr, temp, &p)?.power)
    };

    let (lo, hi) = AREA_FACTOR_BRACKET;
    let (p_lo, p_hi) = (power_at(lo)?, power_at(hi)?);
    if !(p_lo <= target.power && target.power <= p_hi) {
        return Err(Error::Calibration { lo, hi, p_lo, p_hi });
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (a + b);
        if power_at(mid.exp())? < target.power {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    Ok(DiodeParams {
        area_factor: (0.5 * (a + b)).exp(),
        ..*params
    })
}
