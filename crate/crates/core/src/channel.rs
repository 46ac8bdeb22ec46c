//! Atmospheric beam transmission.
//!
//! The beam diameter is taken as constant, so the only loss is
//! visibility-dependent scattering, exponential in the range.

use crate::error::{Error, Result};
use crate::model::{Efficiency, Violation};

/// Extinction constant in `exp(-(BETA / visibility) * (lambda / LAMBDA_REF)^-chi * range)`.
pub const BETA: f64 = 3.91;
/// Reference wavelength (nm) of the visibility definition.
pub const LAMBDA_REF_NM: f64 = 550.0;
pub const MAX_VISIBILITY_KM: f64 = 50.0;

/// Named visibility regimes with their representative visibilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    High,
    Average,
    Low,
}

impl Visibility {
    pub fn km(self) -> f64 {
        match self {
            Visibility::High => 30.0,
            Visibility::Average => 11.0,
            Visibility::Low => 4.0,
        }
    }
}

impl std::str::FromStr for Visibility {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(Visibility::High),
            "average" => Ok(Visibility::Average),
            "low" => Ok(Visibility::Low),
            other => Err(Error::Config(format!(
                "unknown visibility scenario '{other}' (expected high, average or low)"
            ))),
        }
    }
}

/// Scattering size-distribution exponent for a visibility in km.
///
/// 1.6 on `[21, 50]`, 1.3 on `[6, 21)`, `0.585 * v^(1/3)` below 6 km.
/// Jumps at 21 km.
pub fn chi(visibility_km: f64) -> Result<f64> {
    if !(visibility_km > 0.0 && visibility_km <= MAX_VISIBILITY_KM) {
        return Err(Error::Range {
            what: "visibility (km)",
            value: visibility_km,
            min: 0.0,
            max: MAX_VISIBILITY_KM,
        });
    }
    Ok(if visibility_km >= 21.0 {
        1.6
    } else if visibility_km >= 6.0 {
        1.3
    } else {
        0.585 * visibility_km.cbrt()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub wavelength_nm: f64,
    pub visibility_km: f64,
    pub range_km: f64,
    pub beta: f64,
    pub lambda_ref_nm: f64,
}

impl Default for ChannelSpec {
    /// 1550 nm beam, high visibility, zero range.
    fn default() -> Self {
        ChannelSpec::new(1550.0, Visibility::High.km(), 0.0)
    }
}

impl ChannelSpec {
    pub fn new(wavelength_nm: f64, visibility_km: f64, range_km: f64) -> Self {
        ChannelSpec {
            wavelength_nm,
            visibility_km,
            range_km,
            beta: BETA,
            lambda_ref_nm: LAMBDA_REF_NM,
        }
    }

    pub fn with_range(self, range_km: f64) -> Self {
        ChannelSpec { range_km, ..self }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.wavelength_nm.is_finite() && self.wavelength_nm > 0.0) {
            out.push(Violation::new("channel", "wavelength_nm", "wavelength must be positive"));
        }
        if chi(self.visibility_km).is_err() {
            out.push(Violation::new(
                "channel",
                "visibility_km",
                format!("visibility out of (0,{MAX_VISIBILITY_KM}] km"),
            ));
        }
        if !(self.range_km.is_finite() && self.range_km >= 0.0) {
            out.push(Violation::new("channel", "range_km", "range must be non-negative"));
        }
        if self.beta != BETA {
            out.push(Violation::new("channel", "beta", format!("beta is fixed at {BETA}")));
        }
        if self.lambda_ref_nm != LAMBDA_REF_NM {
            out.push(Violation::new(
                "channel",
                "lambda_ref_nm",
                format!("reference wavelength is fixed at {LAMBDA_REF_NM} nm"),
            ));
        }
        out
    }

    fn check(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::Config(v.to_string())),
        }
    }

    /// Attenuation per km of range.
    fn extinction_per_km(&self) -> Result<f64> {
        let chi = chi(self.visibility_km)?;
        Ok(self.beta / self.visibility_km * (self.wavelength_nm / self.lambda_ref_nm).powf(-chi))
    }

    /// Fraction of beam power surviving the path.
    pub fn eta_bt(&self) -> Result<Efficiency> {
        // chi errors carry the range information, so surface them first.
        let k = self.extinction_per_km()?;
        self.check()?;
        Efficiency::new((-k * self.range_km).exp())
    }

    /// Longest range at which the transmission efficiency is still
    /// `target`. `self.range_km` is ignored.
    pub fn max_range(&self, target: f64) -> Result<f64> {
        if !(target > 0.0 && target <= 1.0) {
            return Err(Error::Domain(format!(
                "target transmission efficiency must lie in (0, 1], got {target}"
            )));
        }
        let k = self.extinction_per_km()?;
        self.with_range(0.0).check()?;
        Ok(target.ln().abs() / k)
    }
}
