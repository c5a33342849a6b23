//! Position-noise budgets, the standard quantum limit and optimum light power.
//!
//! With the photon-difference readout on its dark fringe,
//!
//! ```text
//! (dz)^2_pc = A_pc (dJy)^2 / <Jz>^2,   A_pc = (L / (omega tau))^2
//! (dz)^2_rp = A_rp (2 dJx)^2,          A_rp = (hbar omega tau^2 / (m L))^2
//! ```
//!
//! and the two contributions add in quadrature. All quantities are SI.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::input_states::{
    coherent_squeezed_moments, coherent_vacuum_moments, intelligent_limit_variance,
    solve_intelligent_state, twin_fock_state, InputStateSpec,
};
use crate::interferometer::{phase_uncertainty, Observable, SQDIFF_DARK_FRINGE};
use crate::optimize::minimize_log;
use crate::su2_fock::{moments_of, IrrepLabel, MomentSet};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light, m/s.
pub const C_LIGHT: f64 = 2.997_924_58e8;

/// Default optimization bounds on the mean photon number.
pub const DEFAULT_NBAR_BOUNDS: (f64, f64) = (1.0, 1e26);
/// Golden-section tolerance in `ln nbar`.
pub const OPTIMIZER_LN_TOL: f64 = 1e-8;
/// Numerical and closed-form optima must agree to this relative tolerance.
pub const OPTIMUM_AGREEMENT: f64 = 1e-6;

fn default_hbar() -> f64 {
    HBAR
}

fn is_default_hbar(h: &f64) -> bool {
    *h == HBAR
}

/// Physical interferometer parameters.
///
/// Derived quantities (`omega`, `tau`, bounce count, noise constants) are
/// computed on demand from the four primary fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub mirror_mass_kg: f64,
    pub arm_length_m: f64,
    pub finesse: f64,
    pub wavelength_m: f64,
    /// Overridable for dimensional checks only.
    #[serde(default = "default_hbar", skip_serializing_if = "is_default_hbar")]
    pub hbar: f64,
}

impl DetectorConfig {
    pub fn new(mirror_mass_kg: f64, arm_length_m: f64, finesse: f64, wavelength_m: f64) -> Result<Self> {
        let cfg = Self {
            mirror_mass_kg,
            arm_length_m,
            finesse,
            wavelength_m,
            hbar: HBAR,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 11 kg mirrors, 4 km arms, finesse 200, 1.064 um light.
    pub fn initial_ligo() -> Self {
        Self {
            mirror_mass_kg: 11.0,
            arm_length_m: 4000.0,
            finesse: 200.0,
            wavelength_m: 1.064e-6,
            hbar: HBAR,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "initial-ligo" => Some(Self::initial_ligo()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mirror_mass_kg", self.mirror_mass_kg),
            ("arm_length_m", self.arm_length_m),
            ("finesse", self.finesse),
            ("wavelength_m", self.wavelength_m),
            ("hbar", self.hbar),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    /// Angular frequency `2 pi c / lambda`.
    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * C_LIGHT / self.wavelength_m
    }

    /// Cavity storage time `L F / (pi c)`.
    pub fn tau(&self) -> f64 {
        self.arm_length_m * self.finesse / (std::f64::consts::PI * C_LIGHT)
    }

    /// Effective bounce number `tau c / (2 L)`.
    pub fn bounces(&self) -> f64 {
        self.tau() * C_LIGHT / (2.0 * self.arm_length_m)
    }

    pub fn a_pc(&self) -> f64 {
        (self.arm_length_m / (self.omega() * self.tau())).powi(2)
    }

    pub fn a_rp(&self) -> f64 {
        (self.hbar * self.omega() * self.tau().powi(2) / (self.mirror_mass_kg * self.arm_length_m))
            .powi(2)
    }

    /// Factor `2 hbar omega tau / L` in the transferred momentum difference `P = factor * Jx`.
    pub fn momentum_factor(&self) -> f64 {
        2.0 * self.hbar * self.omega() * self.tau() / self.arm_length_m
    }

    /// Light power `hbar omega nbar / tau`.
    pub fn power_from_nbar(&self, nbar: f64) -> f64 {
        self.hbar * self.omega() * nbar / self.tau()
    }

    pub fn nbar_from_power(&self, power_w: f64) -> f64 {
        power_w * self.tau() / (self.hbar * self.omega())
    }
}

/// Standard quantum limit `sqrt(2 hbar tau / m)`.
pub fn sql(config: &DetectorConfig) -> f64 {
    (2.0 * config.hbar * config.tau() / config.mirror_mass_kg).sqrt()
}

/// Reasons a budget value should not be trusted as-is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetFlag {
    /// An asymptotic closed form is used outside its regime of validity.
    OutsideAsymptoticRegime,
    /// `nbar * Gamma >= 1/2`: losses destroy Heisenberg-limited operation.
    LossThresholdViolated,
    /// The readout has no phase sensitivity at the operating point.
    DerivativeVanishes,
}

impl fmt::Display for BudgetFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BudgetFlag::OutsideAsymptoticRegime => "outside-asymptotic-regime",
            BudgetFlag::LossThresholdViolated => "loss-threshold-violated",
            BudgetFlag::DerivativeVanishes => "derivative-vanishes",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseBudget {
    pub dz_pc: f64,
    pub dz_rp: f64,
    pub dz_total: f64,
    pub nbar: f64,
    pub power_w: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<BudgetFlag>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl NoiseBudget {
    /// Builds a budget from the two position variances.
    pub fn from_variances(var_pc: f64, var_rp: f64, nbar: f64, config: &DetectorConfig) -> Self {
        Self {
            dz_pc: var_pc.max(0.0).sqrt(),
            dz_rp: var_rp.max(0.0).sqrt(),
            dz_total: (var_pc + var_rp).max(0.0).sqrt(),
            nbar,
            power_w: config.power_from_nbar(nbar),
            flags: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn total_variance(&self) -> f64 {
        self.dz_total * self.dz_total
    }

    fn flag(mut self, flag: BudgetFlag) -> Self {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
        self
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    fn scaled(mut self, factor: f64) -> Self {
        let s = factor.sqrt();
        self.dz_pc *= s;
        self.dz_rp *= s;
        self.dz_total *= s;
        self
    }
}

fn check_nbar(nbar: f64) -> Result<()> {
    if nbar.is_finite() && nbar > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("nbar = {nbar} must be positive")))
    }
}

/// Photon-difference budget at the dark fringe from any moment set.
pub fn budget_from_moments(m: &MomentSet, config: &DetectorConfig) -> Result<NoiseBudget> {
    if m.mean_jz.abs() <= 1e-12 * m.nbar.max(1.0) {
        return Err(Error::ZeroFringeDerivative(m.mean_jz));
    }
    let var_pc = config.a_pc() * m.var_jy / (m.mean_jz * m.mean_jz);
    let var_rp = config.a_rp() * 4.0 * m.var_jx;
    Ok(NoiseBudget::from_variances(var_pc, var_rp, m.nbar, config))
}

/// Budget from a readout phase variance and the input `Jx` variance.
pub fn budget_from_phase_variance(
    phase_variance: f64,
    var_jx: f64,
    nbar: f64,
    config: &DetectorConfig,
) -> NoiseBudget {
    NoiseBudget::from_variances(
        config.a_pc() * phase_variance,
        config.a_rp() * 4.0 * var_jx,
        nbar,
        config,
    )
}

/// `A_pc / nbar + A_rp nbar`.
pub fn budget_coherent(nbar: f64, config: &DetectorConfig) -> Result<NoiseBudget> {
    check_nbar(nbar)?;
    Ok(NoiseBudget::from_variances(
        config.a_pc() / nbar,
        config.a_rp() * nbar,
        nbar,
        config,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SqueezeMode {
    /// Full matched-phase moments.
    Exact,
    /// `A_pc e^{-2r} / nbar + A_rp e^{2r} nbar`, valid for `alpha^2 >> sinh^2 r`.
    Asymptotic,
}

/// `|alpha>|xi = r>` at matched phase.
pub fn budget_squeezed(
    alpha: f64,
    r: f64,
    config: &DetectorConfig,
    mode: SqueezeMode,
) -> Result<NoiseBudget> {
    let m = coherent_squeezed_moments(alpha, r)?;
    match mode {
        SqueezeMode::Exact => budget_from_moments(&m, config),
        SqueezeMode::Asymptotic => {
            check_nbar(m.nbar)?;
            let e2r = (2.0 * r).exp();
            let b = NoiseBudget::from_variances(
                config.a_pc() / (e2r * m.nbar),
                config.a_rp() * e2r * m.nbar,
                m.nbar,
                config,
            );
            if alpha * alpha < 10.0 * r.sinh().powi(2) {
                Ok(b.flag(BudgetFlag::OutsideAsymptoticRegime)
                    .note("alpha^2 < 10 sinh^2 r: asymptotic squeezed form is unreliable"))
            } else {
                Ok(b)
            }
        }
    }
}

/// Squeezed budget parametrized by the total photon number `nbar = alpha^2 + sinh^2 r`.
pub fn budget_squeezed_nbar(
    nbar: f64,
    r: f64,
    config: &DetectorConfig,
    mode: SqueezeMode,
) -> Result<NoiseBudget> {
    let carrier = nbar - r.sinh().powi(2);
    if carrier.is_nan() || carrier <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "nbar = {nbar} does not exceed the squeezed-vacuum photon number sinh^2 r"
        )));
    }
    budget_squeezed(carrier.sqrt(), r, config, mode)
}

/// Carrier with `<a1+^2 + a1^2> = 0` against squeezed vacuum:
/// `(A_pc / nbar1 + A_rp nbar1) cosh 2r`.
pub fn budget_mismatch_quadrature(nbar1: f64, r: f64, config: &DetectorConfig) -> Result<NoiseBudget> {
    check_nbar(nbar1)?;
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidParameter(format!("squeeze r = {r} must be >= 0")));
    }
    let b = budget_coherent(nbar1, config)?.scaled((2.0 * r).cosh());
    if nbar1 < 100.0 * r.sinh().powi(2) {
        Ok(b.flag(BudgetFlag::OutsideAsymptoticRegime))
    } else {
        Ok(b)
    }
}

/// Arbitrary carrier against a phase-insensitive second port:
/// `(2 N1 N2 + N1 + N2) [A_pc (N1 - N2)^-2 + A_rp]`.
pub fn budget_phase_insensitive_port(
    nbar1: f64,
    nbar2: f64,
    config: &DetectorConfig,
) -> Result<NoiseBudget> {
    if !(nbar1 >= 0.0 && nbar2 >= 0.0 && nbar1.is_finite() && nbar2.is_finite()) {
        return Err(Error::InvalidParameter("photon numbers must be >= 0".into()));
    }
    if nbar1 == nbar2 {
        return Err(Error::DegeneratePorts(nbar1));
    }
    let k = 2.0 * nbar1 * nbar2 + nbar1 + nbar2;
    let diff = nbar1 - nbar2;
    Ok(NoiseBudget::from_variances(
        k * config.a_pc() / (diff * diff),
        k * config.a_rp(),
        nbar1 + nbar2,
        config,
    ))
}

/// Below this photon number the Heisenberg-limited asymptotic form is flagged.
pub const HEISENBERG_MIN_NBAR: f64 = 100.0;

/// `2 A_pc / nbar^2 + A_rp nbar^2 / 2`.
pub fn budget_heisenberg_limited(nbar: f64, config: &DetectorConfig) -> Result<NoiseBudget> {
    check_nbar(nbar)?;
    let b = NoiseBudget::from_variances(
        2.0 * config.a_pc() / (nbar * nbar),
        0.5 * config.a_rp() * nbar * nbar,
        nbar,
        config,
    );
    if nbar < HEISENBERG_MIN_NBAR {
        Ok(b.flag(BudgetFlag::OutsideAsymptoticRegime))
    } else {
        Ok(b)
    }
}

/// Intelligent-state form `A_pc (2 dJx)^-2 + A_rp (2 dJx)^2`.
pub fn budget_intelligent_closed(two_djx_sq: f64, nbar: f64, config: &DetectorConfig) -> NoiseBudget {
    NoiseBudget::from_variances(
        config.a_pc() / two_djx_sq,
        config.a_rp() * two_djx_sq,
        nbar,
        config,
    )
}

/// `eta -> 0` intelligent family with `(2 dJx)^2 = 2 (j^2 - m0^2 + j)`.
pub fn budget_intelligent_limit(label: IrrepLabel, twice_m0: i32, config: &DetectorConfig) -> NoiseBudget {
    let v = intelligent_limit_variance(label, twice_m0);
    budget_intelligent_closed(v, label.twice_j() as f64, config)
}

/// Twin-Fock input read out with `S = q_out^2` at its dark fringe `phi = 0`.
pub fn budget_twin_fock(n: u32, config: &DetectorConfig) -> Result<NoiseBudget> {
    let state = twin_fock_state(n);
    let m = moments_of(&state)?;
    let u = phase_uncertainty(&state, Observable::SquaredDifference, SQDIFF_DARK_FRINGE)?;
    Ok(budget_from_phase_variance(u.variance(), m.var_jx, m.nbar, config))
}

/// Budget for any input family; twin-Fock inputs are read out with `S`.
pub fn budget_for_spec(spec: &InputStateSpec, config: &DetectorConfig) -> Result<NoiseBudget> {
    match spec {
        InputStateSpec::TwinFock { n } => Ok(budget_twin_fock(*n, config)?.note(
            "twin-Fock input has no photon-difference signal; squared-difference readout at phi = 0 used",
        )),
        InputStateSpec::Intelligent {
            label,
            eta,
            twice_m0,
        } if *eta == 0.0 => Ok(budget_intelligent_limit(*label, *twice_m0, config)
            .note("eta -> 0 limit evaluated in closed form")),
        InputStateSpec::Intelligent {
            label,
            eta,
            twice_m0,
        } => {
            let sol = solve_intelligent_state(*label, *eta, *twice_m0)?;
            budget_from_moments(&moments_of(&sol.state)?, config)
        }
        other => budget_from_moments(&other.moments()?, config),
    }
}

// ---------------------------------------------------------------------------
// Optimization

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum BudgetFamily {
    Coherent,
    Squeezed { r: f64, mode: SqueezeMode },
    Heisenberg,
    /// Twin-Fock with `S` readout, photon number treated as continuous.
    TwinFock,
    /// `eta -> 0` intelligent states with fixed `m0`, `nbar = 2j` continuous.
    IntelligentLimit { twice_m0: i32 },
    MismatchQuadrature { r: f64 },
    PhaseInsensitive { nbar2: f64 },
}

impl BudgetFamily {
    pub fn name(&self) -> &'static str {
        match self {
            BudgetFamily::Coherent => "coherent",
            BudgetFamily::Squeezed { .. } => "squeezed",
            BudgetFamily::Heisenberg => "heisenberg",
            BudgetFamily::TwinFock => "twin-fock",
            BudgetFamily::IntelligentLimit { .. } => "intelligent",
            BudgetFamily::MismatchQuadrature { .. } => "mismatch-quadrature",
            BudgetFamily::PhaseInsensitive { .. } => "phase-insensitive",
        }
    }

    /// Budget at total photon number `nbar` (for `PhaseInsensitive`, the carrier number).
    pub fn budget(&self, nbar: f64, config: &DetectorConfig) -> Result<NoiseBudget> {
        match *self {
            BudgetFamily::Coherent => budget_coherent(nbar, config),
            BudgetFamily::Squeezed { r, mode } => budget_squeezed_nbar(nbar, r, config, mode),
            BudgetFamily::Heisenberg => budget_heisenberg_limited(nbar, config),
            BudgetFamily::TwinFock => {
                check_nbar(nbar)?;
                // 2j(j+1) with j = nbar/2; phase variance 1/(2j(j+1)), (2 dJx)^2 = 2j(j+1).
                let x = nbar * (nbar / 2.0 + 1.0);
                Ok(budget_intelligent_closed(x, nbar, config))
            }
            BudgetFamily::IntelligentLimit { twice_m0 } => {
                check_nbar(nbar)?;
                let j = nbar / 2.0;
                let m0 = twice_m0 as f64 / 2.0;
                let x = 2.0 * (j * j - m0 * m0 + j);
                if x.is_nan() || x <= 0.0 {
                    return Err(Error::InvalidParameter(format!("nbar = {nbar} below 2|m0|")));
                }
                Ok(budget_intelligent_closed(x, nbar, config))
            }
            BudgetFamily::MismatchQuadrature { r } => budget_mismatch_quadrature(nbar, r, config),
            BudgetFamily::PhaseInsensitive { nbar2 } => {
                budget_phase_insensitive_port(nbar, nbar2, config)
            }
        }
    }

    /// Analytic `(nbar_opt, dz_opt)` where the family has one.
    pub fn closed_form_optimum(&self, config: &DetectorConfig) -> Option<(f64, f64)> {
        let balance = (config.a_pc() / config.a_rp()).sqrt();
        match *self {
            BudgetFamily::Coherent => Some((coherent_optimum_nbar(config), sql(config))),
            BudgetFamily::Squeezed {
                r,
                mode: SqueezeMode::Asymptotic,
            } => Some((balance * (-2.0 * r).exp(), sql(config))),
            BudgetFamily::Heisenberg => Some((heisenberg_optimum_nbar(config), sql(config))),
            BudgetFamily::MismatchQuadrature { r } => {
                Some((balance, sql(config) * (2.0 * r).cosh().sqrt()))
            }
            _ => None,
        }
    }
}

/// `m L^2 / (hbar omega^2 tau^3)`.
pub fn coherent_optimum_nbar(config: &DetectorConfig) -> f64 {
    config.mirror_mass_kg * config.arm_length_m.powi(2)
        / (config.hbar * config.omega().powi(2) * config.tau().powi(3))
}

/// `m L^2 / (omega tau^4)`.
pub fn coherent_optimum_power(config: &DetectorConfig) -> f64 {
    config.mirror_mass_kg * config.arm_length_m.powi(2) / (config.omega() * config.tau().powi(4))
}

/// `(2 m L^2 / (hbar omega^2 tau^3))^{1/2}`.
pub fn heisenberg_optimum_nbar(config: &DetectorConfig) -> f64 {
    (2.0 * coherent_optimum_nbar(config)).sqrt()
}

/// `(2 hbar m L^2 / tau^5)^{1/2}`.
pub fn heisenberg_optimum_power(config: &DetectorConfig) -> f64 {
    (2.0 * config.hbar * config.mirror_mass_kg * config.arm_length_m.powi(2) / config.tau().powi(5))
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimumMethod {
    ClosedForm,
    NumericalMinimization,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub nbar_opt: f64,
    pub power_opt: f64,
    pub dz_opt: f64,
    pub method: OptimumMethod,
    pub budget: NoiseBudget,
    /// Analytic counterpart `(nbar_opt, dz_opt)` when the family has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<(f64, f64)>,
}

/// Numerically minimizes `budget(nbar)` (total variance) over `bounds` in `ln nbar`.
pub fn optimize_budget<F>(budget: F, config: &DetectorConfig, bounds: (f64, f64)) -> Result<Optimum>
where
    F: Fn(f64) -> Result<NoiseBudget>,
{
    let m = minimize_log(
        |n| budget(n).map(|b| b.total_variance()).unwrap_or(f64::INFINITY),
        bounds.0,
        bounds.1,
        OPTIMIZER_LN_TOL,
    )?;
    let b = budget(m.x)?;
    Ok(Optimum {
        nbar_opt: m.x,
        power_opt: config.power_from_nbar(m.x),
        dz_opt: b.dz_total,
        method: OptimumMethod::NumericalMinimization,
        budget: b,
        closed_form: None,
    })
}

/// Numerical optimum of a family, checked against its closed form when one exists.
pub fn optimize_family(
    family: BudgetFamily,
    config: &DetectorConfig,
    bounds: (f64, f64),
) -> Result<Optimum> {
    let bounds = match family {
        // Below N1 ~ N2 the carrier no longer dominates and the budget has a pole at N1 = N2.
        BudgetFamily::PhaseInsensitive { nbar2 } => (bounds.0.max(10.0 * (nbar2 + 1.0)), bounds.1),
        _ => bounds,
    };
    let mut opt = optimize_budget(|n| family.budget(n, config), config, bounds)?;
    if let Some((n_cf, dz_cf)) = family.closed_form_optimum(config) {
        let dn = (opt.nbar_opt - n_cf).abs() / n_cf;
        let dz = (opt.dz_opt - dz_cf).abs() / dz_cf;
        if dn > OPTIMUM_AGREEMENT || dz > OPTIMUM_AGREEMENT {
            return Err(Error::BracketFailure(format!(
                "{} optimum disagrees with closed form: nbar rel err {dn:e}, dz rel err {dz:e}",
                family.name()
            )));
        }
        opt.closed_form = Some((n_cf, dz_cf));
    }
    Ok(opt)
}

/// Closed-form optimum of a family, where one exists.
pub fn closed_form_optimum(family: BudgetFamily, config: &DetectorConfig) -> Result<Optimum> {
    let (n, _) = family.closed_form_optimum(config).ok_or_else(|| {
        Error::Unsupported(format!("{} has no closed-form optimum", family.name()))
    })?;
    let b = family.budget(n, config)?;
    Ok(Optimum {
        nbar_opt: n,
        power_opt: config.power_from_nbar(n),
        dz_opt: b.dz_total,
        method: OptimumMethod::ClosedForm,
        budget: b,
        closed_form: family.closed_form_optimum(config),
    })
}

// ---------------------------------------------------------------------------
// Losses

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossModel {
    pub gamma: f64,
}

impl LossModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("loss Gamma = {gamma} must be >= 0")));
        }
        Ok(Self { gamma })
    }

    /// `nbar e^{-Gamma}`.
    pub fn output_nbar(&self, nbar: f64) -> f64 {
        nbar * (-self.gamma).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossCheck {
    pub ok: bool,
    /// `nbar * Gamma`.
    pub product: f64,
    pub nbar_out: f64,
}

/// Heisenberg-limited operation requires `nbar * Gamma < 1/2`.
pub fn loss_threshold_check(nbar: f64, gamma: f64) -> Result<LossCheck> {
    let model = LossModel::new(gamma)?;
    let product = nbar * gamma;
    Ok(LossCheck {
        ok: product < 0.5,
        product,
        nbar_out: model.output_nbar(nbar),
    })
}

/// Coherent budget evaluated through the generic moment path.
pub fn budget_coherent_via_moments(nbar: f64, config: &DetectorConfig) -> Result<NoiseBudget> {
    budget_from_moments(&coherent_vacuum_moments(nbar)?, config)
}
