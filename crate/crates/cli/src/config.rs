//! Flat `section.key = value` configuration files.
//!
//! Missing keys fall back to the built-in defaults, so an empty file is a
//! valid configuration. If any `receiver.mpp.*` key is present the whole
//! MPP table is replaced by the rows given in the file. If
//! `diode.area_factor_per_cm2` is absent the panel is calibrated against
//! the reference MPP at load time.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rbc_core::pv::{calibrate_area_factor, CalibrationTarget};
use rbc_core::{ChannelSpec, DiodeParams, LinkConfig, MppLinearCoeffs, MppTable};

use crate::error::CliError;

/// Everything a command may need: the link and the PV panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub link: LinkConfig,
    pub diode: DiodeParams,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            link: LinkConfig::default(),
            diode: DiodeParams::calibrated(),
        }
    }
}

/// Environment variable naming a config file when `--config` is not given.
pub const CONFIG_ENV: &str = "RBC_CONFIG";

fn parse_line(line: &str, lineno: usize) -> Result<Option<(String, String)>, CliError> {
    let line = line.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return Ok(None);
    }
    let (key, value) = line.split_once('=').ok_or_else(|| {
        CliError::Input(format!("config line {lineno}: expected 'key = value', got '{line}'"))
    })?;
    let (key, value) = (key.trim(), value.trim());
    if key.is_empty() || value.is_empty() {
        return Err(CliError::Input(format!("config line {lineno}: empty key or value")));
    }
    Ok(Some((key.to_string(), value.to_string())))
}

/// Parses `key = value` lines into an ordered map, rejecting duplicates.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, (usize, String)>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if let Some((k, v)) = parse_line(line, i + 1)? {
            if out.insert(k.clone(), (i + 1, v)).is_some() {
                return Err(CliError::Input(format!("config line {}: duplicate key '{k}'", i + 1)));
            }
        }
    }
    Ok(out)
}

fn number(key: &str, line: usize, value: &str) -> Result<f64, CliError> {
    value
        .parse::<f64>()
        .map_err(|_| CliError::Input(format!("config line {line}: '{key}' expects a number, got '{value}'")))
}

impl Settings {
    pub fn parse(text: &str) -> Result<Settings, CliError> {
        Settings::from_pairs(parse_pairs(text)?)
    }

    pub fn from_pairs(pairs: BTreeMap<String, (usize, String)>) -> Result<Settings, CliError> {
        let mut link = LinkConfig::default();
        let mut diode = DiodeParams::default();
        let mut area_factor = None;
        let mut mpp_rows: BTreeMap<String, (Option<f64>, Option<f64>)> = BTreeMap::new();

        for (key, (line, value)) in &pairs {
            let line = *line;
            // Manifest metadata, so a manifest can be passed back as a config.
            if key.starts_with("run.") {
                continue;
            }
            if let Some(rest) = key.strip_prefix("receiver.mpp.") {
                let (temp, field) = rest.rsplit_once('.').ok_or_else(|| {
                    CliError::Input(format!("config line {line}: malformed MPP key '{key}'"))
                })?;
                let slot = mpp_rows.entry(temp.to_string()).or_default();
                match field {
                    "a2" => slot.0 = Some(number(key, line, value)?),
                    "b2" => slot.1 = Some(number(key, line, value)?),
                    _ => return Err(CliError::Input(format!("config line {line}: unknown key '{key}'"))),
                }
                continue;
            }
            if key == "diode.n_series" {
                diode.n_series = value.parse().map_err(|_| {
                    CliError::Input(format!("config line {line}: '{key}' expects a positive integer"))
                })?;
                continue;
            }
            let x = number(key, line, value)?;
            let target: &mut f64 = match key.as_str() {
                "transmitter.a1" => &mut link.sqrt_coeffs.a1,
                "transmitter.b1" => &mut link.sqrt_coeffs.b1,
                "transmitter.c1" => &mut link.sqrt_coeffs.c1,
                "converter.eta_dc" => &mut link.eta_dc,
                "battery.eta_ce" => &mut link.eta_ce,
                "channel.wavelength_nm" => &mut link.channel.wavelength_nm,
                "channel.visibility_km" => &mut link.channel.visibility_km,
                "channel.range_km" => &mut link.channel.range_km,
                "channel.beta" => &mut link.channel.beta,
                "channel.lambda_ref_nm" => &mut link.channel.lambda_ref_nm,
                "diode.isc_a" => &mut diode.isc_ref,
                "diode.voc_v" => &mut diode.voc_ref,
                "diode.ir0_w_per_cm2" => &mut diode.ir0,
                "diode.ideality" => &mut diode.ideality,
                "diode.t_ref_c" => &mut diode.t_ref,
                "diode.bandgap_ev" => &mut diode.bandgap_ev,
                "diode.isat_temp_exponent" => &mut diode.isat_temp_exponent,
                "diode.beam_frequency_hz" => &mut diode.beam_frequency_hz,
                "diode.area_factor_per_cm2" => {
                    area_factor = Some(x);
                    continue;
                }
                _ => return Err(CliError::Input(format!("config line {line}: unknown key '{key}'"))),
            };
            *target = x;
        }

        if !mpp_rows.is_empty() {
            let mut rows = Vec::with_capacity(mpp_rows.len());
            for (temp, (a2, b2)) in mpp_rows {
                let t: f64 = temp
                    .parse()
                    .map_err(|_| CliError::Input(format!("MPP temperature '{temp}' is not a number")))?;
                let (Some(a2), Some(b2)) = (a2, b2) else {
                    return Err(CliError::Input(format!("MPP row at {temp} C needs both a2 and b2")));
                };
                rows.push((t, MppLinearCoeffs { a2, b2 }));
            }
            link.mpp_table = MppTable::from_rows(rows)?;
        }

        let violations = link.validate();
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(CliError::Input(format!("invalid configuration: {}", msgs.join("; "))));
        }

        diode = match area_factor {
            Some(a) => DiodeParams {
                area_factor: a,
                ..diode
            },
            None => {
                diode.validate()?;
                calibrate_area_factor(&CalibrationTarget::default(), &diode)?
            }
        };
        diode.validate()?;
        Ok(Settings { link, diode })
    }

    /// Renders every key, so the output re-parses to an equal value.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let LinkConfig {
            sqrt_coeffs: sq,
            mpp_table,
            eta_dc,
            eta_ce,
            channel,
        } = &self.link;
        let ChannelSpec {
            wavelength_nm,
            visibility_km,
            range_km,
            beta,
            lambda_ref_nm,
        } = channel;
        let d = &self.diode;
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("transmitter.a1", sq.a1.to_string());
        kv("transmitter.b1", sq.b1.to_string());
        kv("transmitter.c1", sq.c1.to_string());
        for (t, c) in mpp_table.rows() {
            kv(&format!("receiver.mpp.{t}.a2"), c.a2.to_string());
            kv(&format!("receiver.mpp.{t}.b2"), c.b2.to_string());
        }
        kv("converter.eta_dc", eta_dc.to_string());
        kv("battery.eta_ce", eta_ce.to_string());
        kv("channel.wavelength_nm", wavelength_nm.to_string());
        kv("channel.visibility_km", visibility_km.to_string());
        kv("channel.range_km", range_km.to_string());
        kv("channel.beta", beta.to_string());
        kv("channel.lambda_ref_nm", lambda_ref_nm.to_string());
        kv("diode.isc_a", d.isc_ref.to_string());
        kv("diode.voc_v", d.voc_ref.to_string());
        kv("diode.ir0_w_per_cm2", d.ir0.to_string());
        kv("diode.ideality", d.ideality.to_string());
        kv("diode.n_series", d.n_series.to_string());
        kv("diode.t_ref_c", d.t_ref.to_string());
        kv("diode.bandgap_ev", d.bandgap_ev.to_string());
        kv("diode.isat_temp_exponent", d.isat_temp_exponent.to_string());
        kv("diode.area_factor_per_cm2", d.area_factor.to_string());
        kv("diode.beam_frequency_hz", d.beam_frequency_hz.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Settings::parse("").unwrap(), Settings::default());
        assert_eq!(Settings::parse("# nothing\n\n").unwrap(), Settings::default());
    }

    #[test]
    fn text_round_trips() {
        let s = Settings::default();
        assert_eq!(Settings::parse(&s.to_text()).unwrap(), s);

        let mut custom = Settings::default();
        custom.link.eta_dc = 0.8;
        custom.link.mpp_table = MppTable::from_rows(vec![
            (12.5, MppLinearCoeffs { a2: 0.51, b2: -0.29 }),
            (-5.0, MppLinearCoeffs { a2: 0.55, b2: -0.27 }),
        ])
        .unwrap();
        custom.diode.area_factor = 0.1 + 0.2;
        assert_eq!(Settings::parse(&custom.to_text()).unwrap(), custom);
    }

    #[test]
    fn overrides_apply() {
        let s = Settings::parse("transmitter.a1 = 3.5  # tweaked\nconverter.eta_dc=0.95\n").unwrap();
        assert_eq!(s.link.sqrt_coeffs.a1, 3.5);
        assert_eq!(s.link.eta_dc, 0.95);
        assert_eq!(s.link.eta_ce, 0.99);
    }

    #[test]
    fn mpp_keys_replace_the_table() {
        let s = Settings::parse("receiver.mpp.20.a2 = 0.5\nreceiver.mpp.20.b2 = -0.3\n").unwrap();
        assert_eq!(s.link.mpp_table.rows().len(), 1);
        assert!(Settings::parse("receiver.mpp.20.a2 = 0.5\n").is_err());
    }

    #[test]
    fn bad_input_is_rejected() {
        for text in [
            "transmitter.a1 3.3",
            "transmitter.a1 = abc",
            "nope.key = 1",
            "transmitter.a1 = 1\ntransmitter.a1 = 2",
            "converter.eta_dc = 1.2",
            "diode.n_series = 0",
            "diode.n_series = 7.5",
        ] {
            assert!(matches!(Settings::parse(text), Err(CliError::Input(_))), "{text}");
        }
    }

    #[test]
    fn errors_name_the_line() {
        let err = Settings::parse("\n\ntransmitter.b1 = x").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
