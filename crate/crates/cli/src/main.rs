use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nakao::experiments::{fit_sweep, fmt12, plot_data, run_sweep, sweep_csv, EpsGrid, SweepConfig};
use nakao::exponents::{blowup_condition_with_margin, curve_values};
use nakao::iteration::{
    closed_form_exponents, constants_ledger, iterate, predicted_blowup_time, IterationConstants,
};
use nakao::solver::{bump_phi_integrals, run, SimConfig};
use nakao::testfn::{asymptotic_flatness, c1_estimate, ln_phi, verify_laplacian_eigen};
use nakao::{Error, ProblemParams};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const VERSION: &str = concat!("nakao ", env!("CARGO_PKG_VERSION"));

#[derive(Parser)]
#[command(
    name = "nakao",
    version,
    about = "Blow-up and lifespan toolkit for a damped-wave/wave system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Region membership and critical curves for (p, q, n).
    Region {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        n: u32,
        /// Require pq below the Glassey exponent by at least this much.
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Exponent sequences, constants and predicted blow-up time.
    Iterate {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        n: u32,
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 9)]
        j_max: u32,
        /// Horizon of the grid used to estimate C1.
        #[arg(long, default_value_t = 50.0)]
        c1_t_max: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// ln Φ (and ln Ψ when --t is given) at the requested radii.
    Phi {
        #[arg(long)]
        n: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<f64>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Eigen-relation residual, C1 estimate and asymptotic flatness of Φ.
    VerifyTestfn {
        #[arg(long)]
        n: u32,
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 50.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
    },
    /// One simulation from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ε-sweep and power-law fit; runs the default n = 1, p = q = 2 sweep without --config.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateFile {
    simulation: SimConfig,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    sweep: SweepConfig,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

/// Marks failures caused by user input (unreadable or malformed config).
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return if e.is_numerical() { 3 } else { 2 };
        }
        if cause.is::<InputError>() || cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Region { p, q, n, margin } => cmd_region(p, q, n, margin),
        Command::Iterate {
            p,
            q,
            n,
            r,
            eps,
            j_max,
            c1_t_max,
            out,
        } => cmd_iterate(ProblemParams::new(p, q, n, r, eps)?, j_max, c1_t_max, &out),
        Command::Phi { n, r, t } => cmd_phi(n, &r, t),
        Command::VerifyTestfn { n, r, t_max, h } => cmd_verify_testfn(n, r, t_max, h),
        Command::Simulate { config, out } => cmd_simulate(&config, out),
        Command::Sweep { config, out } => cmd_sweep(config.as_deref(), out),
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    write_file(dir, name, &(serde_json::to_string_pretty(value)? + "\n"))
}

/// `# version` and `# config {...}` lines heading every CSV.
fn csv_header(config: &impl Serialize) -> Result<String> {
    Ok(format!(
        "# {VERSION}\n# config {}\n",
        serde_json::to_string(config)?
    ))
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| InputError(format!("invalid config {}: {e}", path.display())).into())
}

fn cmd_region(p: f64, q: f64, n: u32, margin: Option<f64>) -> Result<()> {
    let params = ProblemParams::exponents_only(p, q, n)?;
    let mut report = curve_values(&params)?;
    if let Some(m) = margin {
        report.blowup_condition_holds = blowup_condition_with_margin(&params, m)?;
        if !report.blowup_condition_holds {
            report.lifespan_exponent = None;
        }
    }
    print_json(&report)
}

fn cmd_iterate(params: ProblemParams, j_max: u32, c1_t_max: f64, out: &Path) -> Result<()> {
    if j_max == 0 {
        return Err(Error::InvalidParameter("j_max must be at least 1".into()).into());
    }
    let c1 = c1_estimate(params.n, params.r, c1_t_max)?;
    let data = bump_phi_integrals(&params)?;
    let constants = constants_ledger(&params, c1.c1, &data)?;
    let rows = iterate(&params, &constants, j_max)?;
    let config = json!({ "params": params, "j_max": j_max, "c1_t_max": c1_t_max, "data": "bump" });

    let mut csv = csv_header(&config)?;
    csv.push_str("j,alpha_j,a_j,beta_j,b_j,logD_j,logQ_j,L_j,alpha_cf,a_cf,beta_cf,b_cf\n");
    for row in &rows {
        let cf = closed_form_exponents(row.j, &params)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            row.j,
            fmt12(row.alpha),
            fmt12(row.a),
            fmt12(row.beta),
            fmt12(row.b),
            fmt12(row.log_d.ln()),
            fmt12(row.log_q.ln()),
            fmt12(row.l_j),
            fmt12(cf.alpha),
            fmt12(cf.a),
            fmt12(cf.beta),
            fmt12(cf.b),
        );
    }
    write_file(out, "iterate.csv", &csv)?;

    let report = constants_report(&params, &constants, &config, c1.c1, c1.tail_variation);
    write_json(out, "constants.json", &report)?;
    print_json(&report)
}

fn constants_report(
    params: &ProblemParams,
    constants: &IterationConstants,
    config: &Value,
    c1: f64,
    c1_tail_variation: f64,
) -> Value {
    let (predicted, note) = match predicted_blowup_time(params, constants) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(format!("predicted blow-up time omitted: {e}"))),
    };
    json!({
        "version": VERSION,
        "config": config,
        "c1": c1,
        "c1_tail_variation": c1_tail_variation,
        "constants": constants,
        "eps0": constants.log_eps0.exp(),
        "predicted_blowup_time": predicted,
        "note": note,
    })
}

fn cmd_phi(n: u32, radii: &[f64], t: Option<f64>) -> Result<()> {
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let l = ln_phi(n, r)?;
        let mut row = json!({ "r": r, "ln_phi": l, "phi": l.exp() });
        if let Some(t) = t {
            if t.is_nan() || t < 0.0 {
                return Err(
                    Error::InvalidParameter(format!("time must be nonnegative, got {t}")).into(),
                );
            }
            row["t"] = json!(t);
            row["ln_psi"] = json!(l - t);
        }
        rows.push(row);
    }
    print_json(&rows)
}

const EIGEN_RADII: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];

fn cmd_verify_testfn(n: u32, r: f64, t_max: f64, h: f64) -> Result<()> {
    let residual = verify_laplacian_eigen(n, &EIGEN_RADII, h)?;
    let c1 = c1_estimate(n, r, t_max)?;
    let flat = asymptotic_flatness(n)?;
    print_json(&json!({
        "version": VERSION,
        "config": { "n": n, "R": r, "t_max": t_max, "h": h, "radii": EIGEN_RADII },
        "c1": c1.c1,
        "c1_t_at_sup": c1.t_at_sup,
        "c1_tail_variation": c1.tail_variation,
        "max_eigen_residual": residual,
        "asymptotic_flatness": flat,
    }))
}

fn cmd_simulate(config_path: &Path, out: Option<PathBuf>) -> Result<()> {
    let file: SimulateFile = read_config(config_path)?;
    let sim = &file.simulation;
    sim.validate()?;
    let dir = out
        .or_else(|| file.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let trace = run(sim)?;

    let mut csv = csv_header(&file)?;
    csv.push_str("t,F1,F2,sup_ut,sup_vt,support_radius\n");
    for s in &trace.samples {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt12(s.t),
            fmt12(s.f1),
            fmt12(s.f2),
            fmt12(s.sup_ut),
            fmt12(s.sup_vt),
            fmt12(s.support_radius)
        );
    }
    write_file(&dir, "trace.csv", &csv)?;

    let (drift_u, drift_v) = trace.energy_drift();
    let verdict = json!({
        "version": VERSION,
        "config": file,
        "blown_up": trace.blowup.is_some(),
        "T_num": trace.blowup.map(|b| b.t_num),
        "trigger": trace.blowup.map(|b| b.trigger),
        "threshold": sim.blowup_threshold,
        "threshold_robust": sim.robust_threshold,
        "T_num_robust": trace.blowup_robust.map(|b| b.t_num),
        "robust": trace.threshold_robust(),
        "stop": trace.stop,
        "steps": trace.steps,
        "dx": trace.dx,
        "dt": trace.dt,
        "energy_drift": { "u": drift_u, "v": drift_v },
    });
    write_json(&dir, "verdict.json", &verdict)?;
    print_json(&verdict)
}

fn default_sweep() -> Result<SweepConfig> {
    let params = ProblemParams::new(2.0, 2.0, 1, 1.0, 0.8)?;
    Ok(SweepConfig {
        base: SimConfig::new(params, 2048, 60.0),
        eps_values: EpsGrid {
            count: 7,
            min: 0.2,
            max: 0.8,
        },
        repeats_per_eps: 2,
        slack: 0.5,
    })
}

fn cmd_sweep(config_path: Option<&Path>, out: Option<PathBuf>) -> Result<()> {
    let file: SweepFile = match config_path {
        Some(path) => read_config(path)?,
        None => SweepFile {
            sweep: default_sweep()?,
            output_dir: None,
        },
    };
    let cfg = &file.sweep;
    let dir = out
        .or_else(|| file.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let result = run_sweep(cfg)?;
    let outcome = fit_sweep(&result, cfg)?;

    let header = csv_header(&file)?;
    write_file(&dir, "sweep.csv", &(header.clone() + &sweep_csv(&result)))?;
    write_file(
        &dir,
        "plot.dat",
        &(header + "# ln(1/eps) ln(T_num)\n" + &plot_data(&result)),
    )?;

    let fit = outcome.fit;
    let report = json!({
        "version": VERSION,
        "config": file,
        "slope": fit.map(|f| f.slope),
        "intercept": fit.map(|f| f.intercept),
        "r_squared": fit.map(|f| f.r_squared),
        "theoretical_exponent": outcome.theoretical_exponent,
        "consistent": outcome.consistent,
        "slack": cfg.slack,
        "points_used": fit.map(|f| f.points_used).unwrap_or(0),
        "reason": outcome.reason,
        "thresholds": result.thresholds,
        "points": result.points,
        "monotone_violations": result.monotone_violations,
        "censoring_violations": result.censoring_violations,
    });
    write_json(&dir, "fit.json", &report)?;
    print_json(&report)
}
