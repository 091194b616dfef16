use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use optosqueeze::params::hz_to_rad_s;
use optosqueeze::sweep::{
    calibrate_baseline, coupling_family_spectra, linear_grid, optimal_phase, phase_grid, phase_sweep, r_family_minima,
    stability_map, CalibrationBox, MapAxis,
};
use optosqueeze::{
    assemble_energy_with, energy_decomposition, resolve_operating_point, Error, Execution, OperatingPoint,
    SpectralKernel, TempConvention,
};

use crate::config::{resolve, ConfigFile, RunConfig};
use crate::output::{num, open, provenance, Report};
use crate::{CliError, Exit};

#[derive(Debug, Parser)]
#[command(name = "optosqueeze", version, about = "Squeezed-light cooling of an optomechanical oscillator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file.
    #[arg(short, long)]
    pub config: PathBuf,
    /// Override a setting, e.g. `--set squeeze.r=1`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
    /// Output file; `-` or absent writes to stdout unless the config names one.
    #[arg(short, long)]
    pub output: Option<String>,
    /// Force single-threaded evaluation.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    /// Energy over φ at the configured r.
    Phase,
    /// Minimum over φ for each r in `numerics.r_values`.
    RFamily,
    /// Spectra for each coupling in `--couplings-hz`.
    Coupling,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Displacement spectrum and its components on a frequency grid (CSV).
    Spectrum(Common),
    /// Energy decomposition, effective temperature and occupancy.
    Energy(Common),
    /// Phase, squeezing or coupling sweeps (CSV).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "phase")]
        kind: SweepKind,
        /// Coupling values in Hz for `--kind coupling`.
        #[arg(long, value_delimiter = ',')]
        couplings_hz: Vec<f64>,
    },
    /// Stability verdicts over two parameters (CSV).
    StabilityMap {
        #[command(flatten)]
        common: Common,
        /// Horizontal axis as NAME_UNIT=MIN:MAX:POINTS, e.g. coupling_hz=0:6e6:64.
        #[arg(long)]
        x: String,
        /// Vertical axis, same form.
        #[arg(long)]
        y: String,
    },
    /// Find (κ, Δ, G) whose unsqueezed T_eff matches a target.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Target effective temperature in K.
        #[arg(long = "target-K")]
        target_k: f64,
        /// κ range in units of ω_m, LO:HI.
        #[arg(long = "kappa-wm", default_value = "0.5:2.0")]
        kappa: String,
        /// Δ range in units of ω_m, LO:HI.
        #[arg(long = "delta-wm", default_value = "0.25:1.5")]
        delta: String,
        /// G range in units of ω_m, LO:HI.
        #[arg(long = "coupling-wm", default_value = "0.05:0.35")]
        coupling: String,
        /// Coarse grid points per axis.
        #[arg(long, default_value_t = 5)]
        grid: usize,
        /// Largest acceptable relative residual.
        #[arg(long, default_value_t = 0.1)]
        residual_tol: f64,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Spectrum(c) | Command::Energy(c) => c,
            Command::Sweep { common, .. } | Command::StabilityMap { common, .. } | Command::Calibrate { common, .. } => {
                common
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Energy(_) => "energy",
            Command::Sweep { .. } => "sweep",
            Command::StabilityMap { .. } => "stability-map",
            Command::Calibrate { .. } => "calibrate",
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", common.config.display())))?;
    let mut file = ConfigFile::parse(&text)?;
    for spec in &common.set {
        file.apply_override(spec)?;
    }
    let mut cfg = resolve(&file)?;
    if common.serial {
        cfg.numerics.execution = Execution::Serial;
        cfg.resolved.push(("numerics.parallel (--serial)".into(), "false".into()));
    }
    if let Some(o) = &common.output {
        cfg.output_path = Some(o.clone()).filter(|p| p != "-");
    }
    Ok(cfg)
}

fn stable_point(cfg: &RunConfig) -> Result<OperatingPoint, CliError> {
    let op = resolve_operating_point(&cfg.params)?;
    if !op.is_stable() {
        let ev: Vec<String> = op
            .stability
            .eigenvalues
            .iter()
            .map(|z| format!("{:.6e}{:+.6e}i", z.re, z.im))
            .collect();
        eprintln!(
            "operating point is unstable: G = {:.6e} rad/s, Δ = {:.6e} rad/s, eigenvalues [{}]",
            op.coupling,
            op.delta,
            ev.join(", ")
        );
        return Err(Error::Unstable {
            max_real: op.stability.max_real,
        }
        .into());
    }
    Ok(op)
}

fn stability_label(stable: bool) -> &'static str {
    if stable {
        "stable"
    } else {
        "unstable"
    }
}

/// Run one subcommand; artifacts go to the configured output.
pub fn run(cli: &Cli) -> Result<Exit, CliError> {
    let cfg = load(cli.command.common())?;
    let mut out = open(cfg.output_path.as_deref())?;
    let command = cli.command.name();
    match &cli.command {
        Command::Spectrum(_) => spectrum(&cfg, &mut *out, command)?,
        Command::Energy(_) => energy(&cfg, &mut *out, command)?,
        Command::Sweep { kind, couplings_hz, .. } => match kind {
            SweepKind::Phase => sweep_phase(&cfg, &mut *out)?,
            SweepKind::RFamily => sweep_r_family(&cfg, &mut *out)?,
            SweepKind::Coupling => sweep_coupling(&cfg, couplings_hz, &mut *out)?,
        },
        Command::StabilityMap { x, y, .. } => map(&cfg, x, y, &mut *out)?,
        Command::Calibrate {
            target_k,
            kappa,
            delta,
            coupling,
            grid,
            residual_tol,
            ..
        } => {
            let bx = CalibrationBox {
                grid: *grid,
                ..CalibrationBox::scaled(cfg.params.omega_m, range(kappa)?, range(delta)?, range(coupling)?)
            };
            calibrate(&cfg, *target_k, &bx, *residual_tol, &mut *out)?
        }
    }
    out.flush()?;
    Ok(Exit::Ok)
}

fn range(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("range `{s}` must look like LO:HI"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn spectrum(cfg: &RunConfig, out: &mut dyn Write, command: &str) -> Result<(), CliError> {
    let op = stable_point(cfg)?;
    let kernel = SpectralKernel::new(&op, &cfg.params);
    let sq = cfg.squeeze_field();
    provenance(out, command, cfg, &op_summary(&op))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["omega_rad_s", "s_th", "s_ba", "s_n_coeff", "s_mc_coeff", "s_ms_coeff", "s_q_total"])?;
    let g = cfg.spectrum_grid;
    for omega in linear_grid(g.min, g.max, g.points) {
        let p = kernel.spectrum_point(omega, &sq);
        w.write_record([p.omega, p.s_th, p.s_ba, p.s_n, p.s_mc, p.s_ms, p.s_q_total].map(num))?;
    }
    w.flush()?;
    Ok(())
}

fn op_summary(op: &OperatingPoint) -> Vec<(&'static str, String)> {
    vec![
        ("coupling_rad_s", num(op.coupling)),
        ("detuning_rad_s", num(op.delta)),
        ("stability", stability_label(op.is_stable()).to_string()),
        ("max_re_lambda_rad_s", num(op.stability.max_real)),
    ]
}

fn energy(cfg: &RunConfig, out: &mut dyn Write, command: &str) -> Result<(), CliError> {
    let op = stable_point(cfg)?;
    let dec = energy_decomposition(&op, &cfg.params, &cfg.numerics)?;
    let rep = assemble_energy_with(&dec, &cfg.squeeze_field(), cfg.convention);
    let alt_convention = match cfg.convention {
        TempConvention::HalfKbT => TempConvention::Equipartition,
        TempConvention::Equipartition => TempConvention::HalfKbT,
    };
    let alt = rep.in_convention(alt_convention);
    provenance(out, command, cfg, &[])?;
    let mut r = Report::new(out);
    r.num("e_th_J", dec.e_th)?;
    r.num("e_n_J", dec.e_n)?;
    r.num("e_mc_J", dec.e_mc)?;
    r.num("e_ms_J", dec.e_ms)?;
    r.num("e_m_J", rep.e_m)?;
    r.num("delta_e_J", rep.delta_e)?;
    r.num("t_eff_K", rep.t_eff)?;
    r.num("n_eff", rep.n_eff)?;
    r.text("convention", cfg.convention.name())?;
    r.num(&format!("t_eff_{}_K", alt_convention.name()), alt.t_eff)?;
    r.num(&format!("n_eff_{}", alt_convention.name()), alt.n_eff)?;
    match optimal_phase(&dec) {
        Ok(phi) => r.num("phi_optimal_rad", phi)?,
        Err(_) => r.text("phi_optimal_rad", "undefined")?,
    }
    r.text("stability", stability_label(op.is_stable()))?;
    r.num("max_re_lambda_rad_s", op.stability.max_real)?;
    r.num("coupling_rad_s", op.coupling)?;
    r.num("detuning_rad_s", op.delta)?;
    r.num("quadrature_error_J", dec.quadrature_error)?;
    r.num("e_thermal_only_J", dec.e_thermal_only)?;
    r.num("e_backaction_J", dec.e_backaction)?;
    Ok(())
}

fn sweep_phase(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let op = stable_point(cfg)?;
    let r = cfg.squeeze_field().r;
    let phis = phase_grid(cfg.phi_points);
    let s = phase_sweep(r, &phis, &op, &cfg.params, &cfg.numerics, cfg.convention)?;
    let mut extra = op_summary(&op);
    extra.push(("r", num(r)));
    extra.push(("argmin_phi_rad", num(s.argmin_phase())));
    extra.push(("argmax_phi_rad", num(s.phis[s.argmax])));
    extra.push((
        "phi_optimal_rad",
        optimal_phase(&s.decomposition).map_or("undefined".into(), num),
    ));
    provenance(out, "sweep --kind phase", cfg, &extra)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["phi_rad", "e_m_J", "delta_e_J", "t_eff_K", "n_eff", "argmin", "stability"])?;
    for (i, (phi, rep)) in s.phis.iter().zip(&s.reports).enumerate() {
        let mut row: Vec<String> = [*phi, rep.e_m, rep.delta_e, rep.t_eff, rep.n_eff].map(num).to_vec();
        row.push((i == s.argmin).to_string());
        row.push(stability_label(s.stability.stable).into());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn sweep_r_family(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let op = stable_point(cfg)?;
    let phis = phase_grid(cfg.phi_points);
    let fam = r_family_minima(&cfg.r_values, &phis, &op, &cfg.params, &cfg.numerics, cfg.convention)?;
    provenance(out, "sweep --kind r-family", cfg, &op_summary(&op))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "r",
        "phi_min_rad",
        "e_min_J",
        "t_eff_min_K",
        "n_eff_min",
        "phi_optimal_rad",
        "e_min_closed_J",
        "stability",
    ])?;
    for row in std::iter::once(&fam.baseline).chain(&fam.rows) {
        let mut rec: Vec<String> = [row.r, row.phi_min, row.min_report.e_m, row.min_report.t_eff, row.min_report.n_eff]
            .map(num)
            .to_vec();
        rec.push(row.phi_optimal.map_or("undefined".into(), num));
        rec.push(num(row.e_min_closed));
        rec.push(stability_label(fam.stability.stable).into());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn sweep_coupling(cfg: &RunConfig, couplings_hz: &[f64], out: &mut dyn Write) -> Result<(), CliError> {
    if couplings_hz.is_empty() {
        return Err(CliError::Usage("--kind coupling needs --couplings-hz".into()));
    }
    let gs: Vec<f64> = couplings_hz.iter().map(|&g| hz_to_rad_s(g)).collect();
    let g = cfg.spectrum_grid;
    let omegas = linear_grid(g.min, g.max, g.points);
    let fam = coupling_family_spectra(&gs, &omegas, &cfg.params, &cfg.squeeze_field(), cfg.numerics.execution)?;
    let extra: Vec<(&str, String)> = fam
        .iter()
        .map(|m| {
            let v = match (m.peak_omega, m.peak_height, &m.skipped) {
                (Some(w), Some(h), _) => format!("G = {} rad/s, peak at {} rad/s, height {}", num(m.coupling), num(w), num(h)),
                (_, _, Some(why)) => format!("G = {} rad/s skipped: {why}", num(m.coupling)),
                _ => format!("G = {} rad/s", num(m.coupling)),
            };
            ("member", v)
        })
        .collect();
    provenance(out, "sweep --kind coupling", cfg, &extra)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "coupling_rad_s",
        "stability",
        "omega_rad_s",
        "s_th",
        "s_ba",
        "s_n_coeff",
        "s_mc_coeff",
        "s_ms_coeff",
        "s_q_total",
    ])?;
    for m in &fam {
        if m.points.is_empty() {
            let mut rec = vec![num(m.coupling), "unstable".into()];
            rec.extend(std::iter::repeat_n(String::new(), 7));
            w.write_record(&rec)?;
            continue;
        }
        for p in &m.points {
            let mut rec = vec![num(m.coupling), "stable".into()];
            rec.extend([p.omega, p.s_th, p.s_ba, p.s_n, p.s_mc, p.s_ms, p.s_q_total].map(num));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

struct AxisSpec {
    axis: MapAxis,
    column: String,
    values: Vec<f64>,
}

fn axis_spec(spec: &str) -> Result<AxisSpec, CliError> {
    let bad = |why: &str| CliError::Usage(format!("axis `{spec}`: {why} (expected NAME_UNIT=MIN:MAX:POINTS)"));
    let (key, range) = spec.split_once('=').ok_or_else(|| bad("missing `=`"))?;
    let parts: Vec<&str> = range.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad("range needs three fields"));
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad("bad minimum"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad("bad maximum"))?;
    let n: usize = n.trim().parse().map_err(|_| bad("bad point count"))?;
    let (name, unit) = ["_rad_s", "_hz", "_W"]
        .iter()
        .find_map(|u| key.strip_suffix(u).map(|b| (b, &u[1..])))
        .ok_or_else(|| bad("missing unit suffix"))?;
    let axis: MapAxis = name.parse().map_err(|e: String| bad(&e))?;
    let scale = match (axis, unit) {
        (MapAxis::Power, "W") => 1.0,
        (MapAxis::Power, _) => return Err(bad("power takes _W")),
        (_, "W") => return Err(bad("frequency axes take _hz or _rad_s")),
        (_, "hz") => hz_to_rad_s(1.0),
        _ => 1.0,
    };
    let values = linear_grid(lo * scale, hi * scale, n);
    Ok(AxisSpec {
        axis,
        column: format!("{}_{}", axis.name(), axis.unit().replace('/', "_")),
        values,
    })
}

fn map(cfg: &RunConfig, x: &str, y: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let (x, y) = (axis_spec(x)?, axis_spec(y)?);
    let m = stability_map(x.axis, &x.values, y.axis, &y.values, &cfg.params, cfg.numerics.execution)?;
    let stable = m.cells.iter().filter(|c| c.stable).count();
    provenance(
        out,
        "stability-map",
        cfg,
        &[("cells", format!("{} stable of {}", stable, m.cells.len()))],
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        x.column.as_str(),
        y.column.as_str(),
        "stability",
        "routh_hurwitz",
        "marginal",
        "max_re_lambda_rad_s",
    ])?;
    for c in &m.cells {
        w.write_record([
            num(c.x),
            num(c.y),
            stability_label(c.stable).into(),
            stability_label(c.routh_hurwitz_stable).into(),
            c.marginal.to_string(),
            num(c.max_real),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn calibrate(
    cfg: &RunConfig,
    target: f64,
    bx: &CalibrationBox,
    residual_tol: f64,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let cal = match calibrate_baseline(target, bx, &cfg.params, &cfg.numerics, cfg.convention, residual_tol) {
        Ok(c) => c,
        Err(e @ Error::Calibration { .. }) => {
            if let Error::Calibration { best_t_eff, residual, .. } = &e {
                eprintln!("best achieved T_eff = {} K, relative residual {}", num(*best_t_eff), num(*residual));
            }
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    let wm = cfg.params.omega_m;
    let box_text = |(a, b): (f64, f64)| format!("[{}, {}] rad/s", num(a), num(b));
    provenance(
        out,
        "calibrate",
        cfg,
        &[
            ("box kappa", box_text(bx.kappa)),
            ("box delta", box_text(bx.delta)),
            ("box coupling", box_text(bx.coupling)),
            ("grid", bx.grid.to_string()),
        ],
    )?;
    let mut r = Report::new(out);
    r.num("target_t_eff_K", cal.target_t_eff)?;
    r.num("achieved_t_eff_K", cal.achieved_t_eff)?;
    r.num("residual", cal.residual)?;
    r.num("kappa_rad_s", cal.kappa)?;
    r.num("delta_rad_s", cal.delta)?;
    r.num("coupling_rad_s", cal.coupling)?;
    r.num("kappa_over_omega_m", cal.kappa / wm)?;
    r.num("delta_over_omega_m", cal.delta / wm)?;
    r.num("coupling_over_omega_m", cal.coupling / wm)?;
    r.text("evaluations", cal.evaluations)?;
    r.text("convention", cal.convention.name())?;
    r.text(
        "overrides",
        format!(
            "--set cavity.kappa_rad_s={} --set drive.mode=direct --set drive.coupling_rad_s={} --set drive.detuning_rad_s={}",
            num(cal.kappa),
            num(cal.coupling),
            num(cal.delta)
        ),
    )?;
    Ok(())
}
