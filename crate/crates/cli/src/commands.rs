use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use rbc_core::electro_beam::{fit_linear, fit_sqrt, squared_errors};
use rbc_core::link::{optimal_source_power, sweep, EtaBtAxis};
use rbc_core::pv::{calibrate_area_factor, cell_current, mpp, open_circuit_voltage, CalibrationTarget};
use rbc_core::{BeamModel, CelsiusTemp, ChannelSpec, Efficiency, PowerW, SweepSpec, Visibility};

use crate::axis::parse_axis;
use crate::config::{Settings, CONFIG_ENV};
use crate::error::CliError;
use crate::manifest::{sidecar_path, RunManifest};
use crate::table::{num, read_samples, write_table};

pub const SWEEP_HEADER: [&str; 8] = [
    "ps_W", "eta_bt", "temp_C", "pm_W", "pb_W", "eta_om", "ps_star_W", "eta_opt",
];
pub const CURVE_HEADER: [&str; 3] = ["voltage_V", "current_A", "power_W"];
pub const FIT_HEADER: [&str; 4] = ["ps_W", "pbt_W", "fitted_W", "squared_error"];

/// Resonant beam charging link model.
#[derive(Debug, Parser)]
#[command(name = "rbc", version)]
pub struct Cli {
    /// Configuration file (defaults to $RBC_CONFIG, then built-in values).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the transmitter beam-power model to measured samples.
    #[command(allow_negative_numbers = true)]
    Fit(FitArgs),
    /// Beam transmission efficiency, or the range reaching a target efficiency.
    #[command(allow_negative_numbers = true)]
    Channel(ChannelArgs),
    /// PV panel I-V curve, maximum power point, or calibration.
    #[command(allow_negative_numbers = true)]
    Pv(PvArgs),
    /// Optimal source power for one transmission efficiency and temperature.
    #[command(allow_negative_numbers = true)]
    Optimize(OptimizeArgs),
    /// Grid of operating points as CSV.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FitMethod {
    Sqrt,
    Linear,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with header `ps_W,pbt_W`.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "sqrt")]
    pub method: FitMethod,
    /// Write fitted values and residuals to this CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChannelFlags {
    /// Beam wavelength (nm); defaults to the configured channel.
    #[arg(long = "lambda")]
    pub lambda_nm: Option<f64>,
    /// Visibility (km).
    #[arg(long, conflicts_with = "scenario")]
    pub visibility: Option<f64>,
    /// Named visibility: high, average or low.
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Option<Visibility>,
}

fn parse_scenario(s: &str) -> Result<Visibility, String> {
    s.parse::<Visibility>().map_err(|e| e.to_string())
}

impl ChannelFlags {
    fn apply(&self, base: ChannelSpec) -> ChannelSpec {
        let mut spec = base;
        if let Some(l) = self.lambda_nm {
            spec.wavelength_nm = l;
        }
        if let Some(v) = self.visibility {
            spec.visibility_km = v;
        }
        if let Some(s) = self.scenario {
            spec.visibility_km = s.km();
        }
        spec
    }
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    #[command(flatten)]
    pub channel: ChannelFlags,
    /// Transmission range (km).
    #[arg(long, conflicts_with = "target_eta")]
    pub range: Option<f64>,
    /// Report the range at which transmission falls to this efficiency.
    #[arg(long)]
    pub target_eta: Option<f64>,
}

#[derive(Debug, Args)]
#[group(id = "pv_mode", required = true, multiple = false)]
pub struct PvMode {
    /// Maximum power point at this received beam power (W).
    #[arg(long, value_name = "PBR", group = "pv_mode")]
    pub mpp: Option<f64>,
    /// I-V / P-V curve over [0, V_oc] at this received beam power (W).
    #[arg(long, value_name = "PBR", group = "pv_mode")]
    pub curve: Option<f64>,
    /// Recalibrate the irradiance mapping to a reference MPP.
    #[arg(long, group = "pv_mode")]
    pub calibrate: bool,
}

#[derive(Debug, Args)]
pub struct PvArgs {
    #[command(flatten)]
    pub mode: PvMode,
    /// PV-cell temperature (C).
    #[arg(long, default_value_t = 25.0)]
    pub temp: f64,
    /// Number of curve points.
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Calibration: received beam power of the reference MPP (W).
    #[arg(long, default_value_t = 25.0)]
    pub ref_pbr: f64,
    /// Calibration: MPP power to reproduce (W).
    #[arg(long, default_value_t = 12.19)]
    pub ref_power: f64,
    /// Output file: the curve CSV, or the calibrated config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Beam transmission efficiency (fraction).
    #[arg(long, conflicts_with = "range")]
    pub eta_bt: Option<f64>,
    /// Derive the transmission efficiency from this range (km).
    #[arg(long)]
    pub range: Option<f64>,
    #[command(flatten)]
    pub channel: ChannelFlags,
    /// PV-cell temperature (C).
    #[arg(long, default_value_t = 25.0)]
    pub temp: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Source power axis (W): start:stop:step, a,b,c or a single value.
    #[arg(long)]
    pub ps: String,
    /// Beam transmission efficiency axis.
    #[arg(long, conflicts_with = "range", required_unless_present = "range")]
    pub eta_bt: Option<String>,
    /// Range axis (km); transmission efficiency is derived from the channel.
    #[arg(long)]
    pub range: Option<String>,
    #[command(flatten)]
    pub channel: ChannelFlags,
    /// PV-cell temperature axis (C).
    #[arg(long, default_value = "25")]
    pub temp: String,
    /// Output CSV; a manifest is written next to it. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_settings(path: Option<&Path>) -> Result<Settings, CliError> {
    let path = path
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    match path {
        None => Ok(Settings::default()),
        Some(p) => {
            let text = fs::read_to_string(&p)
                .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", p.display())))?;
            Settings::parse(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))
}

fn write_manifest(command: &str, inputs: Vec<String>, output: &Path, settings: &Settings) -> Result<(), CliError> {
    let m = RunManifest::new(command, inputs, &output.display().to_string(), settings)?;
    let mut f = create(&sidecar_path(output))?;
    f.write_all(m.to_text().as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let settings = load_settings(cli.config.as_deref())?;
    match cli.command {
        Command::Fit(a) => cmd_fit(a, &settings, out),
        Command::Channel(a) => cmd_channel(a, &settings, out),
        Command::Pv(a) => cmd_pv(a, &settings, out),
        Command::Optimize(a) => cmd_optimize(a, &settings, out),
        Command::Sweep(a) => cmd_sweep(a, &settings, out),
    }
}

fn cmd_fit(args: FitArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let file = File::open(&args.input)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", args.input.display())))?;
    let samples = read_samples(file)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.input.display())))?;

    let (model, mse) = match args.method {
        FitMethod::Sqrt => {
            let (c, mse) = fit_sqrt(&samples)?;
            writeln!(out, "method = sqrt")?;
            writeln!(out, "a1 = {}", num(c.a1))?;
            writeln!(out, "b1 = {}", num(c.b1))?;
            writeln!(out, "c1 = {}", num(c.c1))?;
            (BeamModel::Sqrt(c), mse)
        }
        FitMethod::Linear => {
            let (c, mse) = fit_linear(&samples)?;
            writeln!(out, "method = linear")?;
            writeln!(out, "slope = {}", num(c.slope))?;
            writeln!(out, "intercept = {}", num(c.intercept))?;
            (BeamModel::Linear(c), mse)
        }
    };
    let errors = squared_errors(&samples, &model)?;
    writeln!(out, "mse = {}", num(mse))?;
    writeln!(out, "samples = {}", samples.len())?;
    writeln!(out, "squared_errors:")?;
    for (s, e) in samples.iter().zip(&errors) {
        writeln!(out, "  {} W: {}", num(s.source_power.get()), num(*e))?;
    }

    if let Some(path) = &args.out {
        let rows: Vec<Vec<String>> = samples
            .iter()
            .zip(&errors)
            .map(|(s, e)| {
                vec![
                    num(s.source_power.get()),
                    num(s.beam_power.get()),
                    num(model.predict(s.source_power)),
                    num(*e),
                ]
            })
            .collect();
        let mut f = create(path)?;
        write_table(&mut f, &FIT_HEADER, &rows)?;
        let method = match args.method {
            FitMethod::Sqrt => "sqrt",
            FitMethod::Linear => "linear",
        };
        write_manifest(
            "fit",
            vec![format!("input={}", args.input.display()), format!("method={method}")],
            path,
            settings,
        )?;
    }
    Ok(())
}

fn cmd_channel(args: ChannelArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = args.channel.apply(settings.link.channel);
    writeln!(out, "wavelength_nm = {}", num(spec.wavelength_nm))?;
    writeln!(out, "visibility_km = {}", num(spec.visibility_km))?;
    writeln!(out, "chi = {}", num(rbc_core::chi(spec.visibility_km)?))?;
    if let Some(target) = args.target_eta {
        let r = spec.max_range(target)?;
        writeln!(out, "target_eta = {}", num(target))?;
        writeln!(out, "range_km = {}", num(r))?;
    } else {
        let spec = match args.range {
            Some(r) => spec.with_range(r),
            None => spec,
        };
        let eta = spec.eta_bt()?;
        writeln!(out, "range_km = {}", num(spec.range_km))?;
        writeln!(out, "eta_bt = {}", num(eta.get()))?;
        writeln!(out, "eta_bt_percent = {}", num(eta.percent()))?;
    }
    Ok(())
}

fn cmd_pv(args: PvArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let temp = CelsiusTemp::new(args.temp)?;
    let params = &settings.diode;

    if args.mode.calibrate {
        let target = CalibrationTarget {
            pbr: args.ref_pbr,
            temp_c: args.temp,
            power: args.ref_power,
        };
        let calibrated = calibrate_area_factor(&target, params)?;
        let check = mpp(PowerW::new(target.pbr)?, temp, &calibrated)?;
        writeln!(out, "area_factor_per_cm2 = {}", num(calibrated.area_factor))?;
        writeln!(out, "mpp_power_W = {}", num(check.power))?;
        writeln!(out, "mpp_voltage_V = {}", num(check.voltage))?;
        writeln!(out, "mpp_current_A = {}", num(check.current))?;
        if let Some(path) = &args.out {
            let updated = Settings {
                diode: calibrated,
                ..settings.clone()
            };
            let mut f = create(path)?;
            f.write_all(updated.to_text().as_bytes())?;
            f.flush()?;
            write_manifest(
                "pv-calibrate",
                vec![
                    format!("ref_pbr={}", num(args.ref_pbr)),
                    format!("ref_power={}", num(args.ref_power)),
                    format!("temp={}", num(args.temp)),
                ],
                path,
                &updated,
            )?;
        }
        return Ok(());
    }

    if let Some(pbr) = args.mode.mpp {
        let pbr = PowerW::new(pbr)?;
        let m = mpp(pbr, temp, params)?;
        writeln!(out, "pbr_W = {}", num(pbr.get()))?;
        writeln!(out, "temp_C = {}", num(temp.get()))?;
        writeln!(out, "voltage_V = {}", num(m.voltage))?;
        writeln!(out, "current_A = {}", num(m.current))?;
        writeln!(out, "power_W = {}", num(m.power))?;
        writeln!(out, "eta_bem = {}", num(m.power / pbr.get()))?;
        writeln!(out, "voc_V = {}", num(open_circuit_voltage(pbr, temp, params)?))?;
        return Ok(());
    }

    let pbr = PowerW::new(args.mode.curve.expect("clap requires one pv mode"))?;
    if args.points < 2 {
        return Err(CliError::Input("--points must be at least 2".into()));
    }
    let voc = open_circuit_voltage(pbr, temp, params)?;
    let n = args.points - 1;
    let rows: Vec<Vec<String>> = (0..=n)
        .map(|i| {
            let v = voc * i as f64 / n as f64;
            let current = cell_current(v, pbr, temp, params);
            vec![num(v), num(current), num(v * current)]
        })
        .collect();
    match &args.out {
        Some(path) => {
            let mut f = create(path)?;
            write_table(&mut f, &CURVE_HEADER, &rows)?;
            write_manifest(
                "pv-curve",
                vec![
                    format!("pbr={}", num(pbr.get())),
                    format!("temp={}", num(temp.get())),
                    format!("points={}", args.points),
                ],
                path,
                settings,
            )?;
        }
        None => write_table(out, &CURVE_HEADER, &rows)?,
    }
    Ok(())
}

fn cmd_optimize(args: OptimizeArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let temp = CelsiusTemp::new(args.temp)?;
    let eta_bt = match (args.eta_bt, args.range) {
        (Some(e), _) => Efficiency::new(e)?,
        (None, Some(r)) => args.channel.apply(settings.link.channel).with_range(r).eta_bt()?,
        (None, None) => args.channel.apply(settings.link.channel).eta_bt()?,
    };
    let r = optimal_source_power(eta_bt, temp, &settings.link)?;
    writeln!(out, "eta_bt = {}", num(eta_bt.get()))?;
    writeln!(out, "temp_C = {}", num(temp.get()))?;
    writeln!(out, "xi = {}", num(r.xi))?;
    writeln!(out, "ps_star_W = {}", num(r.ps_star.get()))?;
    writeln!(out, "eta_opt = {}", num(r.eta_opt.get()))?;
    writeln!(out, "eta_opt_percent = {}", num(r.eta_opt.percent()))?;
    writeln!(out, "pm_star_W = {}", num(r.pm_star.get()))?;
    writeln!(out, "pb_star_W = {}", num(r.pb_star.get()))?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let eta_bt = match (&args.eta_bt, &args.range) {
        (Some(e), _) => EtaBtAxis::Direct(parse_axis(e)?),
        (None, Some(r)) => EtaBtAxis::Ranges {
            channel: args.channel.apply(settings.link.channel),
            ranges_km: parse_axis(r)?,
        },
        (None, None) => unreachable!("clap requires --eta-bt or --range"),
    };
    let spec = SweepSpec {
        source_powers: parse_axis(&args.ps)?,
        eta_bt,
        temps: parse_axis(&args.temp)?,
    };
    let rows: Vec<Vec<String>> = sweep(&spec, &settings.link)?
        .into_iter()
        .map(|r| {
            vec![
                num(r.ps),
                num(r.eta_bt),
                num(r.temp),
                num(r.pm),
                num(r.pb),
                r.eta_om.map(num).unwrap_or_default(),
                num(r.ps_star),
                num(r.eta_opt),
            ]
        })
        .collect();

    match &args.out {
        Some(path) => {
            let mut f = create(path)?;
            write_table(&mut f, &SWEEP_HEADER, &rows)?;
            let mut inputs = vec![format!("ps={}", args.ps), format!("temp={}", args.temp)];
            if let Some(e) = &args.eta_bt {
                inputs.push(format!("eta_bt={e}"));
            }
            if let Some(r) = &args.range {
                let ch = args.channel.apply(settings.link.channel);
                inputs.push(format!("range={r}"));
                inputs.push(format!("lambda={}", num(ch.wavelength_nm)));
                inputs.push(format!("visibility={}", num(ch.visibility_km)));
            }
            write_manifest("sweep", inputs, path, settings)?;
            writeln!(out, "rows = {}", rows.len())?;
            writeln!(out, "output = {}", path.display())?;
        }
        None => write_table(out, &SWEEP_HEADER, &rows)?,
    }
    Ok(())
}
