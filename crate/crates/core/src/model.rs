//! Shared domain types and the link parameter bundle.
//!
//! Efficiencies are always fractions in `[0, 1]`. Power is in watts, range in
//! kilometres, wavelength in nanometres and temperature in degrees Celsius.

use std::fmt;

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};

/// Non-negative, finite power in watts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct PowerW(f64);

impl PowerW {
    pub const ZERO: PowerW = PowerW(0.0);

    pub fn new(watts: f64) -> Result<Self> {
        if watts.is_finite() && watts >= 0.0 {
            Ok(PowerW(watts))
        } else {
            Err(Error::Domain(format!(
                "power must be finite and non-negative, got {watts} W"
            )))
        }
    }

    /// Clamps negative values to zero. `watts` must not be NaN.
    pub(crate) fn clamped(watts: f64) -> Self {
        debug_assert!(!watts.is_nan());
        PowerW(watts.max(0.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for PowerW {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} W", self.0)
    }
}

/// Dimensionless efficiency in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Efficiency(f64);

impl Efficiency {
    pub const ONE: Efficiency = Efficiency(1.0);

    pub fn new(fraction: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&fraction) {
            Ok(Efficiency(fraction))
        } else {
            Err(Error::Range {
                what: "efficiency",
                value: fraction,
                min: 0.0,
                max: 1.0,
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn percent(self) -> f64 {
        self.0 * 100.0
    }
}

impl fmt::Display for Efficiency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub const ABSOLUTE_ZERO_C: f64 = -273.15;

/// Temperature in degrees Celsius, never below absolute zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CelsiusTemp(f64);

impl CelsiusTemp {
    pub fn new(celsius: f64) -> Result<Self> {
        if celsius.is_finite() && celsius >= ABSOLUTE_ZERO_C {
            Ok(CelsiusTemp(celsius))
        } else {
            Err(Error::Domain(format!(
                "temperature must be finite and >= {ABSOLUTE_ZERO_C} C, got {celsius}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn kelvin(self) -> f64 {
        self.0 - ABSOLUTE_ZERO_C
    }
}

/// Square-root model of beam power against source power:
/// `P_bt = a1 * sqrt(b1 + P_s) + c1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtFitCoeffs {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
}

impl Default for SqrtFitCoeffs {
    /// Coefficients fitted to the 1550 nm transmitter measurements.
    fn default() -> Self {
        SqrtFitCoeffs {
            a1: 3.331,
            b1: 10.2,
            c1: -11.99,
        }
    }
}

impl SqrtFitCoeffs {
    pub fn new(a1: f64, b1: f64, c1: f64) -> Result<Self> {
        let coeffs = SqrtFitCoeffs { a1, b1, c1 };
        match coeffs.violations("transmitter").into_iter().next() {
            None => Ok(coeffs),
            Some(v) => Err(Error::Config(v.to_string())),
        }
    }

    pub fn violations(&self, prefix: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.a1.is_finite() && self.a1 > 0.0) {
            out.push(Violation::new(prefix, "a1", "a1 must be positive"));
        }
        if !(self.b1.is_finite() && self.b1 > 0.0) {
            out.push(Violation::new(prefix, "b1", "b1 must be positive"));
        }
        if !self.c1.is_finite() {
            out.push(Violation::new(prefix, "c1", "c1 must be finite"));
        }
        out
    }
}

/// Linear approximation of the PV maximum power point: `P_m = a2 * P_br + b2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MppLinearCoeffs {
    pub a2: f64,
    pub b2: f64,
}

impl MppLinearCoeffs {
    pub fn new(a2: f64, b2: f64) -> Result<Self> {
        let coeffs = MppLinearCoeffs { a2, b2 };
        match coeffs.violations("receiver.mpp").into_iter().next() {
            None => Ok(coeffs),
            Some(v) => Err(Error::Config(v.to_string())),
        }
    }

    pub fn violations(&self, prefix: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.a2 > 0.0 && self.a2 < 1.0) {
            out.push(Violation::new(prefix, "a2", "a2 out of (0,1)"));
        }
        if !(self.b2.is_finite() && self.b2 < 0.0) {
            out.push(Violation::new(prefix, "b2", "b2 must be negative"));
        }
        out
    }

    /// Received beam power at which the linear MPP model crosses zero.
    pub fn zero_power_input(&self) -> f64 {
        (-self.b2 / self.a2).max(0.0)
    }
}

/// MPP coefficients tabulated by PV-cell temperature, sorted by temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct MppTable {
    rows: Vec<(f64, MppLinearCoeffs)>,
}

impl Default for MppTable {
    /// Coefficients for the GaSb panel at 0, 25 and 50 C.
    fn default() -> Self {
        MppTable {
            rows: vec![
                (0.0, MppLinearCoeffs { a2: 0.5434, b2: -0.2761 }),
                (25.0, MppLinearCoeffs { a2: 0.4979, b2: -0.2989 }),
                (50.0, MppLinearCoeffs { a2: 0.4525, b2: -0.3209 }),
            ],
        }
    }
}

impl MppTable {
    /// Builds a table from `(temperature C, coefficients)` rows in any order.
    /// Duplicate temperatures are rejected.
    pub fn from_rows(mut rows: Vec<(f64, MppLinearCoeffs)>) -> Result<Self> {
        if rows.iter().any(|(t, _)| !t.is_finite()) {
            return Err(Error::Config("MPP table temperatures must be finite".into()));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Config("duplicate temperature in MPP table".into()));
        }
        Ok(MppTable { rows })
    }

    pub fn rows(&self) -> &[(f64, MppLinearCoeffs)] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Supported temperature interval `(min, max)`.
    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.rows.first()?.0, self.rows.last()?.0))
    }

    /// Coefficients at `temp`: exact at tabulated temperatures, piecewise
    /// linear between them. No extrapolation.
    pub fn at(&self, temp: CelsiusTemp) -> Result<MppLinearCoeffs> {
        let t = temp.get();
        let (min, max) = self
            .span()
            .ok_or_else(|| Error::Config("MPP table is empty".into()))?;
        if !(min..=max).contains(&t) {
            return Err(Error::Range {
                what: "PV temperature (C)",
                value: t,
                min,
                max,
            });
        }
        if let Some((_, c)) = self.rows.iter().find(|(key, _)| *key == t) {
            return Ok(*c);
        }
        let upper = self.rows.partition_point(|(key, _)| *key < t);
        let (t0, c0) = self.rows[upper - 1];
        let (t1, c1) = self.rows[upper];
        let w = (t - t0) / (t1 - t0);
        Ok(MppLinearCoeffs {
            a2: c0.a2 + w * (c1.a2 - c0.a2),
            b2: c0.b2 + w * (c1.b2 - c0.b2),
        })
    }
}

/// One failed invariant, tagged with the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub(crate) fn new(prefix: &str, field: &str, message: impl Into<String>) -> Self {
        let field = if prefix.is_empty() {
            field.to_string()
        } else {
            format!("{prefix}.{field}")
        };
        Violation {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every parameter of the end-to-end link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub sqrt_coeffs: SqrtFitCoeffs,
    pub mpp_table: MppTable,
    /// DC-DC converter efficiency.
    pub eta_dc: f64,
    /// Battery charging efficiency.
    pub eta_ce: f64,
    pub channel: ChannelSpec,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            sqrt_coeffs: SqrtFitCoeffs::default(),
            mpp_table: MppTable::default(),
            eta_dc: 0.90,
            eta_ce: 0.99,
            channel: ChannelSpec::default(),
        }
    }
}

impl LinkConfig {
    pub fn mpp_coeffs_at(&self, temp: CelsiusTemp) -> Result<MppLinearCoeffs> {
        self.mpp_table.at(temp)
    }

    /// Combined DC-DC and battery charging efficiency.
    pub fn output_chain(&self) -> f64 {
        self.eta_dc * self.eta_ce
    }

    /// Returns every invariant violation; empty means the config is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.sqrt_coeffs.violations("transmitter");
        if self.mpp_table.is_empty() {
            out.push(Violation::new("receiver", "mpp", "MPP table must not be empty"));
        }
        for (t, c) in self.mpp_table.rows() {
            if *t < ABSOLUTE_ZERO_C {
                out.push(Violation::new(
                    &format!("receiver.mpp.{t}"),
                    "temperature",
                    "below absolute zero",
                ));
            }
            out.extend(c.violations(&format!("receiver.mpp.{t}")));
        }
        for (name, value) in [("eta_dc", self.eta_dc), ("eta_ce", self.eta_ce)] {
            if !(value > 0.0 && value <= 1.0) {
                out.push(Violation::new("", name, format!("{name} out of (0,1]")));
            }
        }
        out.extend(self.channel.violations());
        out
    }

    pub fn validated(self) -> Result<Self> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(self)
        } else {
            let joined: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            Err(Error::Config(joined.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn celsius(t: f64) -> CelsiusTemp {
        CelsiusTemp::new(t).unwrap()
    }

    #[test]
    fn mpp_coeffs_at_tabulated_temperatures() {
        let cfg = LinkConfig::default();
        assert_eq!(
            cfg.mpp_coeffs_at(celsius(25.0)).unwrap(),
            MppLinearCoeffs { a2: 0.4979, b2: -0.2989 }
        );
        assert_eq!(
            cfg.mpp_coeffs_at(celsius(0.0)).unwrap(),
            MppLinearCoeffs { a2: 0.5434, b2: -0.2761 }
        );
    }

    #[test]
    fn mpp_coeffs_interpolate_midpoint() {
        let c = LinkConfig::default().mpp_coeffs_at(celsius(12.5)).unwrap();
        assert!((c.a2 - 0.52065).abs() < 1e-12);
        assert!((c.b2 - -0.2875).abs() < 1e-12);
    }

    #[test]
    fn mpp_coeffs_reject_extrapolation() {
        let cfg = LinkConfig::default();
        for t in [-0.1, 50.5, -40.0] {
            match cfg.mpp_coeffs_at(celsius(t)) {
                Err(Error::Range { min, max, .. }) => {
                    assert_eq!((min, max), (0.0, 50.0));
                }
                other => panic!("expected range error at {t}, got {other:?}"),
            }
        }
    }

    #[test]
    fn interpolation_is_monotone() {
        let cfg = LinkConfig::default();
        let mut prev = cfg.mpp_coeffs_at(celsius(0.0)).unwrap();
        for i in 1..=500 {
            let c = cfg.mpp_coeffs_at(celsius(i as f64 * 0.1)).unwrap();
            assert!(c.a2 < prev.a2);
            assert!(c.b2 < prev.b2);
            prev = c;
        }
    }

    #[test]
    fn default_config_is_valid() {
        assert!(LinkConfig::default().validate().is_empty());
    }

    #[test]
    fn eta_dc_above_one_is_reported() {
        let cfg = LinkConfig {
            eta_dc: 1.2,
            ..LinkConfig::default()
        };
        let v = cfg.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "eta_dc");
        assert_eq!(v[0].message, "eta_dc out of (0,1]");
    }

    #[test]
    fn negative_a1_is_reported() {
        let mut cfg = LinkConfig::default();
        cfg.sqrt_coeffs.a1 = -1.0;
        let v = cfg.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "transmitter.a1");
        assert_eq!(v[0].message, "a1 must be positive");
    }

    #[test]
    fn all_violations_are_collected() {
        let mut cfg = LinkConfig {
            eta_dc: 0.0,
            eta_ce: 1.5,
            ..LinkConfig::default()
        };
        cfg.sqrt_coeffs.b1 = -3.0;
        cfg.channel.visibility_km = -1.0;
        let fields: Vec<String> = cfg.validate().into_iter().map(|v| v.field).collect();
        assert_eq!(
            fields,
            ["transmitter.b1", "eta_dc", "eta_ce", "channel.visibility_km"]
        );
    }

    #[test]
    fn newtypes_reject_invalid_values() {
        assert!(PowerW::new(-1.0).is_err());
        assert!(PowerW::new(f64::NAN).is_err());
        assert!(PowerW::new(f64::INFINITY).is_err());
        assert!(Efficiency::new(1.0001).is_err());
        assert!(Efficiency::new(-0.0001).is_err());
        assert!(CelsiusTemp::new(-274.0).is_err());
        assert_eq!(CelsiusTemp::new(25.0).unwrap().kelvin(), 298.15);
    }

    #[test]
    fn table_rows_are_sorted_and_unique() {
        let c = MppLinearCoeffs { a2: 0.5, b2: -0.3 };
        let t = MppTable::from_rows(vec![(50.0, c), (0.0, c)]).unwrap();
        assert_eq!(t.span(), Some((0.0, 50.0)));
        assert!(MppTable::from_rows(vec![(1.0, c), (1.0, c)]).is_err());
    }
}
