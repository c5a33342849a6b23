//! Command-line front end: `sql`, `budget`, `optimum`, `sweep` and `verify`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 when any reported
//! result carries a validity flag, 3 when verification fails.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::input_states::InputStateSpec;
use crate::interferometer::{phase_uncertainty, phase_uncertainty_from_moments, Observable};
use crate::noise_model::{
    budget_for_spec, budget_from_phase_variance, budget_heisenberg_limited, budget_squeezed,
    loss_threshold_check, optimize_family, sql, BudgetFamily, BudgetFlag, DetectorConfig,
    NoiseBudget, Optimum, SqueezeMode, DEFAULT_NBAR_BOUNDS,
};
use crate::su2_fock::{IrrepLabel, C64};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FLAGGED: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// Directory searched for `<name>.json` presets before the built-in ones.
pub const PRESET_DIR_ENV: &str = "QNOISE_PRESET_DIR";

#[derive(Debug, Parser)]
#[command(name = "qnoise", version, about = "Quantum-noise budgets for interferometric position meters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Detector config: a JSON file or a preset name.
    #[arg(long, global = true, default_value = "initial-ligo")]
    pub config: String,
    #[arg(long, global = true, value_enum)]
    pub family: Option<Family>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub r: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub n: Option<u32>,
    #[arg(long, global = true)]
    pub j2: Option<u32>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub m0x2: Option<i32>,
    #[arg(long, global = true)]
    pub nbar: Option<f64>,
    /// `var:min:max:points:scale` with var in nbar|r|eta|phi|gamma and scale lin|log.
    #[arg(long, global = true)]
    pub sweep: Option<SweepSpec>,
    #[arg(long, global = true, value_enum)]
    pub observable: Option<ObservableArg>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Standard quantum limit and derived detector quantities.
    Sql,
    /// Noise budget for one input state.
    Budget,
    /// Optimum photon number and light power for a family.
    Optimum,
    /// Budgets over a one-dimensional parameter grid (needs --sweep).
    Sweep,
    /// Run the oracle verification suite.
    Verify {
        #[arg(value_enum, default_value = "quick")]
        level: LevelArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Coherent,
    Squeezed,
    TwinFock,
    Intelligent,
    Heisenberg,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Coherent => "coherent",
            Family::Squeezed => "squeezed",
            Family::TwinFock => "twin-fock",
            Family::Intelligent => "intelligent",
            Family::Heisenberg => "heisenberg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObservableArg {
    Qdiff,
    Sqdiff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Nbar,
    R,
    Eta,
    Phi,
    Gamma,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Nbar => "nbar",
            SweepVariable::R => "r",
            SweepVariable::Eta => "eta",
            SweepVariable::Phi => "phi",
            SweepVariable::Gamma => "gamma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: Scale,
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let t = k as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + t * (self.max - self.min),
                    Scale::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

impl FromStr for SweepSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Config(format!("sweep spec '{s}': {why}"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 5 {
            return Err(bad("expected var:min:max:points:scale"));
        }
        let variable = match parts[0] {
            "nbar" => SweepVariable::Nbar,
            "r" => SweepVariable::R,
            "eta" => SweepVariable::Eta,
            "phi" => SweepVariable::Phi,
            "gamma" => SweepVariable::Gamma,
            _ => return Err(bad("variable must be one of nbar, r, eta, phi, gamma")),
        };
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad(&format!("'{t}' is not a number")));
        let (min, max) = (num(parts[1])?, num(parts[2])?);
        let points: usize = parts[3].parse().map_err(|_| bad("points must be an integer"))?;
        let scale = match parts[4] {
            "lin" | "linear" => Scale::Linear,
            "log" => Scale::Log,
            _ => return Err(bad("scale must be lin or log")),
        };
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(bad("need finite min < max"));
        }
        if points < 2 {
            return Err(bad("need at least 2 points"));
        }
        if scale == Scale::Log && min <= 0.0 {
            return Err(bad("log scale needs min > 0"));
        }
        Ok(Self {
            variable,
            min,
            max,
            points,
            scale,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub value: f64,
    pub dz_pc: f64,
    pub dz_rp: f64,
    pub dz_total: f64,
    pub power_w: f64,
    pub flags: Vec<BudgetFlag>,
}

impl ReportRow {
    fn from_budget(value: f64, b: &NoiseBudget) -> Self {
        Self {
            value,
            dz_pc: b.dz_pc,
            dz_rp: b.dz_rp,
            dz_total: b.dz_total,
            power_w: b.power_w,
            flags: b.flags.clone(),
        }
    }

    fn invalid(value: f64, flag: BudgetFlag) -> Self {
        Self {
            value,
            dz_pc: f64::NAN,
            dz_rp: f64::NAN,
            dz_total: f64::NAN,
            power_w: f64::NAN,
            flags: vec![flag],
        }
    }
}

/// Scientific notation with 9 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.8e}")
}

fn flags_field(flags: &[BudgetFlag]) -> String {
    flags.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(";")
}

/// Resolves `--config`: an existing file, a preset in `$QNOISE_PRESET_DIR`, or a built-in preset.
pub fn load_config(arg: &str) -> Result<DetectorConfig> {
    let path = Path::new(arg);
    if path.is_file() {
        return read_config(path);
    }
    if let Some(dir) = std::env::var_os(PRESET_DIR_ENV) {
        let candidate = Path::new(&dir).join(format!("{arg}.json"));
        if candidate.is_file() {
            return read_config(&candidate);
        }
    }
    DetectorConfig::preset(arg)
        .ok_or_else(|| Error::Config(format!("'{arg}' is neither a config file nor a known preset")))
}

fn read_config(path: &Path) -> Result<DetectorConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
    DetectorConfig::from_json(&text)
}

/// Report produced by a command, before formatting.
struct Output {
    csv: Vec<Vec<String>>,
    json: serde_json::Value,
    flagged: bool,
    failed: bool,
    notes: Vec<String>,
}

impl Output {
    fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut text = serde_json::to_vec_pretty(&self.json)
                    .map_err(|e| Error::Config(format!("JSON output: {e}")))?;
                text.push(b'\n');
                Ok(text)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for rec in &self.csv {
                    w.write_record(rec)
                        .map_err(|e| Error::Config(format!("CSV output: {e}")))?;
                }
                w.into_inner().map_err(|e| Error::Config(format!("CSV output: {e}")))
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command; returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    run(&cli)
}

pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(out) => {
            for n in &out.notes {
                eprintln!("note: {n}");
            }
            let bytes = match out.render(cli.format) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_USAGE;
                }
            };
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &bytes)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => std::io::stdout()
                    .write_all(&bytes)
                    .map_err(|e| format!("cannot write stdout: {e}")),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
            if out.failed {
                EXIT_VERIFY_FAILED
            } else if out.flagged {
                EXIT_FLAGGED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli) -> Result<Output> {
    let config = load_config(&cli.config)?;
    match cli.command {
        Command::Sql => cmd_sql(&config),
        Command::Budget => cmd_budget(cli, &config),
        Command::Optimum => cmd_optimum(cli, &config),
        Command::Sweep => cmd_sweep(cli, &config),
        Command::Verify { level } => Ok(cmd_verify(level, cli.seed)),
    }
}

fn cmd_sql(config: &DetectorConfig) -> Result<Output> {
    let sql_m = sql(config);
    let strain = sql_m / config.arm_length_m;
    let quantities = [
        ("sql", sql_m, "m"),
        ("tau", config.tau(), "s"),
        ("bounces", config.bounces(), "1"),
        ("omega", config.omega(), "rad/s"),
        ("a_pc", config.a_pc(), "m^2"),
        ("a_rp", config.a_rp(), "m^2"),
        ("momentum_factor", config.momentum_factor(), "kg m/s"),
        ("strain_scale", strain, "1"),
    ];
    let mut csv = vec![vec!["quantity".into(), "value".into(), "unit".into()]];
    csv.extend(
        quantities
            .iter()
            .map(|(q, v, u)| vec![q.to_string(), sci(*v), u.to_string()]),
    );
    let mut obj = serde_json::Map::new();
    obj.insert("command".into(), json!("sql"));
    obj.insert("config".into(), json!(config));
    for (q, v, _) in quantities {
        obj.insert(q.into(), json!(v));
    }
    Ok(Output {
        csv,
        json: serde_json::Value::Object(obj),
        flagged: false,
        failed: false,
        notes: vec![format!(
            "gravitational-wave amplitudes h ~ dz/L down to {strain:.3e} are resolvable at the SQL"
        )],
    })
}

fn require<T: Copy>(v: Option<T>, flag: &str, family: Family) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("--{flag} is required for family {}", family.name())))
}

fn family_of(cli: &Cli) -> Result<Family> {
    cli.family
        .ok_or_else(|| Error::Config("--family is required for this command".into()))
}

/// Coherent amplitude from `--alpha` or `--nbar` (minus the squeezed-vacuum photons).
fn carrier_alpha(cli: &Cli, family: Family, squeezed_photons: f64) -> Result<f64> {
    match (cli.alpha, cli.nbar) {
        (Some(a), None) => Ok(a),
        (None, Some(n)) => {
            let carrier = n - squeezed_photons;
            if carrier < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "nbar = {n} is below the squeezed-vacuum photon number {squeezed_photons}"
                )));
            }
            Ok(carrier.sqrt())
        }
        (Some(_), Some(_)) => Err(Error::Config("give either --alpha or --nbar, not both".into())),
        (None, None) => Err(Error::Config(format!(
            "--alpha or --nbar is required for family {}",
            family.name()
        ))),
    }
}

/// Input state selected by the family flags, at an optional override of `r` or `eta`.
fn spec_from_cli(cli: &Cli, family: Family, r: Option<f64>, eta: Option<f64>) -> Result<InputStateSpec> {
    let spec = match family {
        Family::Coherent => InputStateSpec::CoherentVacuum {
            alpha: C64::new(carrier_alpha(cli, family, 0.0)?, 0.0),
        },
        Family::Squeezed => {
            let r = match r {
                Some(r) => r,
                None => require(cli.r, "r", family)?,
            };
            InputStateSpec::CoherentSqueezed {
                alpha: C64::new(carrier_alpha(cli, family, r.sinh().powi(2))?, 0.0),
                r,
                theta: cli.theta.unwrap_or(0.0),
            }
        }
        Family::TwinFock => InputStateSpec::TwinFock {
            n: require(cli.n, "n", family)?,
        },
        Family::Intelligent => InputStateSpec::Intelligent {
            label: IrrepLabel::from_twice_j(require(cli.j2, "j2", family)?),
            eta: match eta {
                Some(e) => e,
                None => cli.eta.unwrap_or(0.0),
            },
            twice_m0: cli.m0x2.unwrap_or(0),
        },
        Family::Heisenberg => {
            return Err(Error::Config(
                "heisenberg is an asymptotic budget family, not an input state".into(),
            ))
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// Budget of the state selected on the command line, honouring `--observable`.
fn budget_at(cli: &Cli, family: Family, config: &DetectorConfig, r: Option<f64>, eta: Option<f64>) -> Result<NoiseBudget> {
    if family == Family::Heisenberg {
        return budget_heisenberg_limited(require(cli.nbar, "nbar", family)?, config);
    }
    let spec = spec_from_cli(cli, family, r, eta)?;
    match (cli.observable, &spec) {
        (Some(ObservableArg::Sqdiff), s) if !matches!(s, InputStateSpec::TwinFock { .. }) => {
            let state = crate::input_states::spec_to_state(s, None)?;
            let m = crate::su2_fock::moments_of(&state)?;
            let u = phase_uncertainty(&state, Observable::SquaredDifference, 0.0)?;
            Ok(budget_from_phase_variance(u.variance(), m.var_jx, m.nbar, config))
        }
        _ => budget_for_spec(&spec, config),
    }
}

fn with_loss(mut b: NoiseBudget, gamma: Option<f64>) -> Result<NoiseBudget> {
    if let Some(g) = gamma {
        let check = loss_threshold_check(b.nbar, g)?;
        if !check.ok && !b.flags.contains(&BudgetFlag::LossThresholdViolated) {
            b.flags.push(BudgetFlag::LossThresholdViolated);
        }
    }
    Ok(b)
}

fn rows_csv(variable: &str, rows: &[ReportRow]) -> Vec<Vec<String>> {
    let mut csv = vec![vec![
        variable.to_string(),
        "dz_pc_m".into(),
        "dz_rp_m".into(),
        "dz_total_m".into(),
        "power_w".into(),
        "flags".into(),
    ]];
    csv.extend(rows.iter().map(|r| {
        vec![
            sci(r.value),
            sci(r.dz_pc),
            sci(r.dz_rp),
            sci(r.dz_total),
            sci(r.power_w),
            flags_field(&r.flags),
        ]
    }));
    csv
}

fn cmd_budget(cli: &Cli, config: &DetectorConfig) -> Result<Output> {
    let family = family_of(cli)?;
    let b = with_loss(budget_at(cli, family, config, None, None)?, cli.gamma)?;
    let row = ReportRow::from_budget(b.nbar, &b);
    Ok(Output {
        csv: rows_csv("nbar", std::slice::from_ref(&row)),
        json: json!({
            "command": "budget",
            "family": family.name(),
            "config": config,
            "budget": b,
        }),
        flagged: !b.flags.is_empty(),
        failed: false,
        notes: b.notes.clone(),
    })
}

fn optimum_family(cli: &Cli, family: Family, r: Option<f64>) -> Result<BudgetFamily> {
    Ok(match family {
        Family::Coherent => BudgetFamily::Coherent,
        Family::Squeezed => BudgetFamily::Squeezed {
            r: match r {
                Some(r) => r,
                None => require(cli.r, "r", family)?,
            },
            mode: SqueezeMode::Asymptotic,
        },
        Family::Heisenberg => BudgetFamily::Heisenberg,
        Family::TwinFock => BudgetFamily::TwinFock,
        Family::Intelligent => BudgetFamily::IntelligentLimit {
            twice_m0: cli.m0x2.unwrap_or(0),
        },
    })
}

fn cmd_optimum(cli: &Cli, config: &DetectorConfig) -> Result<Output> {
    let family = family_of(cli)?;
    let bf = optimum_family(cli, family, None)?;
    let opt = optimize_family(bf, config, DEFAULT_NBAR_BOUNDS)?;
    let base = optimize_family(BudgetFamily::Coherent, config, DEFAULT_NBAR_BOUNDS)?;
    let power_reduction = base.power_opt / opt.power_opt;
    let dz_ratio = opt.dz_opt / base.dz_opt;
    let mut notes = Vec::new();
    if matches!(bf, BudgetFamily::Squeezed { .. }) {
        notes.push("squeezed optimum uses the alpha^2 >> sinh^2 r asymptotic budget".to_string());
    }
    if family == Family::Intelligent {
        notes.push("intelligent optimum uses the eta -> 0 family with nbar = 2j".to_string());
    }
    let loss = match cli.gamma {
        Some(g) => Some(loss_threshold_check(opt.nbar_opt, g)?),
        None => None,
    };
    let flagged = !opt.budget.flags.is_empty() || loss.is_some_and(|l| !l.ok);
    let mut flags = opt.budget.flags.clone();
    if loss.is_some_and(|l| !l.ok) {
        flags.push(BudgetFlag::LossThresholdViolated);
    }
    let csv = vec![
        vec![
            "family".into(),
            "nbar_opt".into(),
            "power_opt_w".into(),
            "dz_opt_m".into(),
            "method".into(),
            "power_reduction_vs_coherent".into(),
            "dz_ratio_vs_coherent".into(),
            "flags".into(),
        ],
        vec![
            family.name().into(),
            sci(opt.nbar_opt),
            sci(opt.power_opt),
            sci(opt.dz_opt),
            "numerical-minimization".into(),
            sci(power_reduction),
            sci(dz_ratio),
            flags_field(&flags),
        ],
    ];
    Ok(Output {
        csv,
        json: json!({
            "command": "optimum",
            "family": family.name(),
            "config": config,
            "optimum": opt,
            "coherent_baseline": base,
            "power_reduction_vs_coherent": power_reduction,
            "dz_ratio_vs_coherent": dz_ratio,
            "loss_check": loss,
        }),
        flagged,
        failed: false,
        notes,
    })
}

fn sweep_row(cli: &Cli, family: Family, config: &DetectorConfig, var: SweepVariable, x: f64) -> Result<ReportRow> {
    let gamma = if var == SweepVariable::Gamma { Some(x) } else { cli.gamma };
    let b = match var {
        SweepVariable::Nbar => {
            let bf = match family {
                Family::Squeezed => BudgetFamily::Squeezed {
                    r: require(cli.r, "r", family)?,
                    mode: SqueezeMode::Exact,
                },
                f => optimum_family(cli, f, None)?,
            };
            bf.budget(x, config)
        }
        SweepVariable::R => {
            if family != Family::Squeezed {
                return Err(Error::Config("an r sweep needs --family squeezed".into()));
            }
            match (cli.alpha, cli.nbar) {
                (None, None) => {
                    let opt: Optimum = optimize_family(
                        optimum_family(cli, family, Some(x))?,
                        config,
                        DEFAULT_NBAR_BOUNDS,
                    )?;
                    Ok(opt.budget)
                }
                _ => {
                    let spec = spec_from_cli(cli, family, Some(x), None)?;
                    match spec {
                        InputStateSpec::CoherentSqueezed { alpha, r, .. } => {
                            budget_squeezed(alpha.re, r, config, SqueezeMode::Exact)
                        }
                        _ => unreachable!("squeezed family"),
                    }
                }
            }
        }
        SweepVariable::Eta => {
            if family != Family::Intelligent {
                return Err(Error::Config("an eta sweep needs --family intelligent".into()));
            }
            budget_at(cli, family, config, None, Some(x))
        }
        SweepVariable::Phi => {
            let spec = spec_from_cli(cli, family, None, None)?;
            let observable = match (cli.observable, &spec) {
                (Some(ObservableArg::Sqdiff), _) | (None, InputStateSpec::TwinFock { .. }) => {
                    Observable::SquaredDifference
                }
                _ => Observable::PhotonDifference,
            };
            let m = spec.moments()?;
            let u = match observable {
                Observable::PhotonDifference => phase_uncertainty_from_moments(&m, x),
                Observable::SquaredDifference => {
                    phase_uncertainty(&crate::input_states::spec_to_state(&spec, None)?, observable, x)
                }
            };
            match u {
                Ok(u) => Ok(budget_from_phase_variance(u.variance(), m.var_jx, m.nbar, config)),
                Err(Error::DerivativeVanishes { .. }) | Err(Error::ZeroFringeDerivative(_)) => {
                    return Ok(ReportRow::invalid(x, BudgetFlag::DerivativeVanishes))
                }
                Err(e) => Err(e),
            }
        }
        SweepVariable::Gamma => budget_at(cli, family, config, None, None),
    };
    let b = match b {
        Ok(b) => b,
        Err(Error::ZeroFringeDerivative(_)) => {
            return Ok(ReportRow::invalid(x, BudgetFlag::DerivativeVanishes))
        }
        Err(e) => return Err(e),
    };
    Ok(ReportRow::from_budget(x, &with_loss(b, gamma)?))
}

fn cmd_sweep(cli: &Cli, config: &DetectorConfig) -> Result<Output> {
    let spec = cli
        .sweep
        .ok_or_else(|| Error::Config("--sweep var:min:max:points:scale is required".into()))?;
    let family = family_of(cli)?;
    if spec.variable == SweepVariable::Gamma && spec.min < 0.0 {
        return Err(Error::Config("gamma sweep must start at >= 0".into()));
    }
    let grid = spec.grid();
    let rows: Vec<ReportRow> = grid
        .par_iter()
        .map(|&x| sweep_row(cli, family, config, spec.variable, x))
        .collect::<Result<_>>()?;
    let flagged = rows.iter().any(|r| !r.flags.is_empty());
    Ok(Output {
        csv: rows_csv(spec.variable.name(), &rows),
        json: json!({
            "command": "sweep",
            "family": family.name(),
            "config": config,
            "sweep": spec,
            "seed": cli.seed,
            "rows": rows,
        }),
        flagged,
        failed: false,
        notes: Vec::new(),
    })
}

fn cmd_verify(level: LevelArg, seed: u64) -> Output {
    let level = match level {
        LevelArg::Quick => verify::Level::Quick,
        LevelArg::Full => verify::Level::Full,
    };
    let report = verify::run(level, seed);
    let mut csv = vec![vec![
        "check".into(),
        "passed".into(),
        "max_error".into(),
        "tolerance".into(),
        "error".into(),
    ]];
    csv.extend(report.checks.iter().map(|c| {
        vec![
            c.name.clone(),
            c.passed.to_string(),
            sci(c.max_error),
            sci(c.tolerance),
            c.error.clone().unwrap_or_default(),
        ]
    }));
    let failed = !report.all_passed();
    let mut notes = vec![format!("prng {} seed {}", report.prng, report.seed)];
    notes.extend(
        report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("FAILED {}", c.name)),
    );
    Output {
        csv,
        json: json!({ "command": "verify", "report": report }),
        flagged: false,
        failed,
        notes,
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scale = match self.scale {
            Scale::Linear => "lin",
            Scale::Log => "log",
        };
        write!(f, "{}:{}:{}:{}:{}", self.variable.name(), self.min, self.max, self.points, scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_spec_parsing() {
        let s: SweepSpec = "nbar:1e18:1e24:7:log".parse().unwrap();
        assert_eq!(s.points, 7);
        let g = s.grid();
        assert!((g[0] - 1e18).abs() / 1e18 < 1e-12 && (g[6] - 1e24).abs() / 1e24 < 1e-12);
        assert!((g[3] - 1e21).abs() / 1e21 < 1e-12);
        let lin: SweepSpec = "phi:0:1:3:lin".parse().unwrap();
        assert_eq!(lin.grid(), vec![0.0, 0.5, 1.0]);
        for bad in ["nbar:1:2:1:log", "nbar:0:1:3:log", "x:1:2:3:lin", "nbar:2:1:3:lin", "nbar:1:2"] {
            assert!(bad.parse::<SweepSpec>().is_err(), "{bad}");
        }
        assert_eq!(s.to_string().parse::<SweepSpec>().unwrap(), s);
    }

    #[test]
    fn sci_format() {
        assert_eq!(sci(191234.5), "1.91234500e5");
        assert_eq!(sci(-1.0), "-1.00000000e0");
    }

    #[test]
    fn unknown_preset() {
        assert!(load_config("no-such-preset").is_err());
        assert_eq!(load_config("initial-ligo").unwrap(), DetectorConfig::initial_ligo());
    }
}
