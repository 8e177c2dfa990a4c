//! Run configuration: one TOML file, one section per experiment plus shared
//! `[numerics]`. Every field has a default, so an empty file reproduces the
//! reference figures. Complex numbers are written `[re, im]`.

use catpump::analysis::{CatSearchSpec, WignerGridSpec};
use catpump::dynamics::AdiabaticParams;
use catpump::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub type Pair = [f64; 2];

pub fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub numerics: Numerics,
    pub phi_sweep: PhiSweep,
    pub trajectory: Trajectory,
    pub loss_sweep: LossSweep,
    pub wigner: Wigner,
    pub effective_loss: EffectiveLoss,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config("toml", e.message().to_string()))
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub signal_dim: usize,
    pub pump_dim: usize,
    /// Longest integrating-factor step for lossy cycles.
    pub lossy_max_step: f64,
    /// Adiabatic RK4 step as a fraction of the stability limit.
    pub adiabatic_step_fraction: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub n_mag: usize,
    pub n_phase: usize,
    pub refine: bool,
}

impl Default for Numerics {
    fn default() -> Self {
        let s = CatSearchSpec::default();
        Self {
            signal_dim: 40,
            pump_dim: 20,
            lossy_max_step: catpump::dynamics::LOSSY_MAX_STEP,
            adiabatic_step_fraction: 0.2,
            alpha_min: s.alpha_min,
            alpha_max: s.alpha_max,
            n_mag: s.n_mag,
            n_phase: s.n_phase,
            refine: s.refine,
        }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.signal_dim < 2 {
            return Err(CliError::config("numerics.signal_dim", "needs at least 2 levels"));
        }
        if self.pump_dim < 2 {
            return Err(CliError::config("numerics.pump_dim", "needs at least 2 levels"));
        }
        positive("numerics.lossy_max_step", self.lossy_max_step)?;
        if !(self.adiabatic_step_fraction > 0.0 && self.adiabatic_step_fraction <= 1.0) {
            return Err(CliError::config("numerics.adiabatic_step_fraction", "must lie in (0, 1]"));
        }
        self.search_spec()
            .validate()
            .map_err(|e| CliError::config("numerics.alpha_min/alpha_max/n_mag/n_phase", e.to_string()))
    }

    /// Search grid, with `alpha_max` lowered to what `signal_dim` supports.
    pub fn search_spec(&self) -> CatSearchSpec {
        CatSearchSpec {
            alpha_min: self.alpha_min,
            alpha_max: self.alpha_max,
            n_mag: self.n_mag,
            n_phase: self.n_phase,
            refine: self.refine,
        }
        .clamped_to(self.signal_dim)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PhiSweep {
    pub phi_inv: Vec<f64>,
    /// `alpha_p / phi`, so `alpha_p` scales with the coupling strength.
    pub pump_ratio: Pair,
    pub cycle_ratio: f64,
    /// Cycle count is `ceil(cycles_per_phi_inv * phi_inv)`.
    pub cycles_per_phi_inv: f64,
}

impl Default for PhiSweep {
    fn default() -> Self {
        Self {
            phi_inv: (1..=15).map(f64::from).collect(),
            pump_ratio: [0.0, -2.0],
            cycle_ratio: 1.0,
            cycles_per_phi_inv: 30.0,
        }
    }
}

impl PhiSweep {
    pub fn validate(&self) -> Result<(), CliError> {
        grid("phi_sweep.phi_inv", &self.phi_inv)?;
        finite_pair("phi_sweep.pump_ratio", self.pump_ratio)?;
        at_least_one("phi_sweep.cycle_ratio", self.cycle_ratio)?;
        positive("phi_sweep.cycles_per_phi_inv", self.cycles_per_phi_inv)
    }
}

pub fn cycle_count(cycles_per_phi_inv: f64, phi_inv: f64) -> usize {
    ((cycles_per_phi_inv * phi_inv) - 1e-9).ceil().max(1.0) as usize
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Synchronous,
    Adiabatic,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Trajectory {
    pub mode: Mode,
    pub t_final: f64,

    // synchronous mode
    pub phi_inv: f64,
    pub pump_ratio: Pair,
    pub cycle_ratio: f64,
    pub gamma_s_signal: f64,
    pub gamma_s_pump: f64,

    // adiabatic mode: give `s` and `gamma_d`, or `cat_alpha` and `gamma_d`,
    // or the pump triple `omega_p`, `g_nl`, `gamma_p`
    pub s: Option<Pair>,
    pub gamma_d: Option<f64>,
    pub cat_alpha: Option<Pair>,
    pub omega_p: Option<f64>,
    pub g_nl: Option<f64>,
    pub gamma_p: Option<f64>,
    pub sample_interval: f64,
}

impl Default for Trajectory {
    fn default() -> Self {
        Self {
            mode: Mode::Synchronous,
            t_final: 10.0,
            phi_inv: 2.0,
            pump_ratio: [0.0, -2.0],
            cycle_ratio: 1.0,
            gamma_s_signal: 0.0,
            gamma_s_pump: 0.0,
            s: None,
            gamma_d: None,
            cat_alpha: None,
            omega_p: None,
            g_nl: None,
            gamma_p: None,
            sample_interval: 0.05,
        }
    }
}

impl Trajectory {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("trajectory.t_final", self.t_final)?;
        match self.mode {
            Mode::Synchronous => {
                positive("trajectory.phi_inv", self.phi_inv)?;
                finite_pair("trajectory.pump_ratio", self.pump_ratio)?;
                at_least_one("trajectory.cycle_ratio", self.cycle_ratio)?;
                nonnegative("trajectory.gamma_s_signal", self.gamma_s_signal)?;
                nonnegative("trajectory.gamma_s_pump", self.gamma_s_pump)
            }
            Mode::Adiabatic => {
                positive("trajectory.sample_interval", self.sample_interval)?;
                sample_count(self.t_final, self.sample_interval, "trajectory.sample_interval")?;
                self.adiabatic_params().map(|_| ())
            }
        }
    }

    /// Resolves whichever adiabatic parametrisation was given.
    pub fn adiabatic_params(&self) -> Result<AdiabaticParams, CliError> {
        let pump = [self.omega_p, self.g_nl, self.gamma_p];
        let has_pump = pump.iter().any(Option::is_some);
        let given = usize::from(self.s.is_some()) + usize::from(self.cat_alpha.is_some()) + usize::from(has_pump);
        if given > 1 {
            return Err(CliError::config(
                "trajectory.s/cat_alpha/omega_p",
                "give exactly one of s, cat_alpha or (omega_p, g_nl, gamma_p)",
            ));
        }
        let field = "trajectory";
        if has_pump {
            if self.gamma_d.is_some() {
                return Err(CliError::config("trajectory.gamma_d", "implied by the pump parameters"));
            }
            let [Some(omega), Some(g), Some(gamma)] = pump else {
                return Err(CliError::config("trajectory.omega_p/g_nl/gamma_p", "all three are required"));
            };
            return catpump::dynamics::adiabatic_params_from_pump(omega, g, gamma)
                .map_err(|e| CliError::config(field, e.to_string()));
        }
        let gamma_d = self.gamma_d.unwrap_or(0.064);
        positive("trajectory.gamma_d", gamma_d)?;
        match self.s {
            Some(s) => {
                finite_pair("trajectory.s", s)?;
                AdiabaticParams::new(complex(s), gamma_d)
            }
            None => {
                let alpha = self.cat_alpha.unwrap_or([0.0, 2.0]);
                finite_pair("trajectory.cat_alpha", alpha)?;
                AdiabaticParams::for_cat(complex(alpha), gamma_d)
            }
        }
        .map_err(|e| CliError::config(field, e.to_string()))
    }

    /// Replaces the adiabatic inputs by the resolved `(s, gamma_d)` so the
    /// written header reruns exactly.
    pub fn resolved(&self) -> Result<Self, CliError> {
        let mut out = self.clone();
        if self.mode == Mode::Adiabatic {
            let p = self.adiabatic_params()?;
            out.s = Some([p.s().re, p.s().im]);
            out.gamma_d = Some(p.gamma_d());
            out.cat_alpha = None;
            out.omega_p = None;
            out.g_nl = None;
            out.gamma_p = None;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LossSweep {
    pub phi_inv: Vec<f64>,
    pub gamma_s_signal: Vec<f64>,
    pub gamma_s_pump: Vec<f64>,
    pub pump_ratio: Pair,
    pub cycle_ratio: f64,
    pub cycles_per_phi_inv: f64,
    /// Fixed cat used for the `f_at_alpha2` column.
    pub reference_alpha: Pair,
}

impl Default for LossSweep {
    fn default() -> Self {
        Self {
            phi_inv: vec![1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0],
            gamma_s_signal: vec![0.1],
            gamma_s_pump: vec![0.0, 0.05, 0.1, 0.2],
            pump_ratio: [0.0, -2.0],
            cycle_ratio: 1.0,
            cycles_per_phi_inv: 30.0,
            reference_alpha: [0.0, 2.0],
        }
    }
}

impl LossSweep {
    pub fn validate(&self) -> Result<(), CliError> {
        grid("loss_sweep.phi_inv", &self.phi_inv)?;
        nonnegative_grid("loss_sweep.gamma_s_signal", &self.gamma_s_signal)?;
        nonnegative_grid("loss_sweep.gamma_s_pump", &self.gamma_s_pump)?;
        finite_pair("loss_sweep.pump_ratio", self.pump_ratio)?;
        finite_pair("loss_sweep.reference_alpha", self.reference_alpha)?;
        at_least_one("loss_sweep.cycle_ratio", self.cycle_ratio)?;
        positive("loss_sweep.cycles_per_phi_inv", self.cycles_per_phi_inv)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Wigner {
    pub phi_inv: f64,
    pub pump_ratio: Pair,
    pub cycle_ratio: f64,
    pub gamma_s_signal: f64,
    pub gamma_s_pump: f64,
    /// Simulated horizon; snapshots must lie on a cycle boundary within it.
    /// A snapshot at 0 is the initial vacuum.
    pub t_final: f64,
    pub snapshots: Vec<f64>,
    /// Half-width of the square phase-space window.
    pub extent: f64,
    pub points: usize,
}

impl Default for Wigner {
    fn default() -> Self {
        Self {
            phi_inv: 2.0,
            pump_ratio: [0.0, -2.0],
            cycle_ratio: 1.0,
            gamma_s_signal: 0.0,
            gamma_s_pump: 0.0,
            t_final: 10.0,
            snapshots: vec![0.5, 4.0],
            extent: 4.0,
            points: 81,
        }
    }
}

impl Wigner {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("wigner.phi_inv", self.phi_inv)?;
        finite_pair("wigner.pump_ratio", self.pump_ratio)?;
        at_least_one("wigner.cycle_ratio", self.cycle_ratio)?;
        nonnegative("wigner.gamma_s_signal", self.gamma_s_signal)?;
        nonnegative("wigner.gamma_s_pump", self.gamma_s_pump)?;
        positive("wigner.t_final", self.t_final)?;
        if self.snapshots.is_empty() {
            return Err(CliError::config("wigner.snapshots", "grid is empty"));
        }
        let period = self.cycle_ratio / self.phi_inv;
        for &t in &self.snapshots {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(CliError::config("wigner.snapshots", format!("{t} is not a valid time")));
            }
            if t > self.t_final * (1.0 + 1e-12) {
                return Err(CliError::config(
                    "wigner.snapshots",
                    format!("{t} lies beyond the simulated horizon {}", self.t_final),
                ));
            }
            let k = (t / period).round();
            if (k * period - t).abs() > 1e-9 * t.max(1.0) {
                return Err(CliError::config(
                    "wigner.snapshots",
                    format!("{t} is not a cycle boundary (period {period})"),
                ));
            }
        }
        self.grid_spec()
            .validate()
            .map_err(|e| CliError::config("wigner.extent/points", e.to_string()))
    }

    pub fn grid_spec(&self) -> WignerGridSpec {
        WignerGridSpec::square(self.extent, self.points)
    }

    /// Snapshot cycle indices, in the order given.
    pub fn snapshot_cycles(&self) -> Vec<usize> {
        let period = self.cycle_ratio / self.phi_inv;
        self.snapshots.iter().map(|t| (t / period).round() as usize).collect()
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EffectiveLoss {
    pub g_loss_hz: Vec<f64>,
    pub gamma_re_hz: Vec<f64>,
    pub delta_hz: Vec<f64>,
    pub g_nl_hz: f64,
}

impl Default for EffectiveLoss {
    fn default() -> Self {
        Self {
            g_loss_hz: vec![10e6],
            gamma_re_hz: vec![10e6],
            delta_hz: vec![-1e9, -30e6, 0.0, 30e6, 1e9],
            g_nl_hz: 100e3,
        }
    }
}

impl EffectiveLoss {
    pub fn validate(&self) -> Result<(), CliError> {
        nonnegative_grid("effective_loss.g_loss_hz", &self.g_loss_hz)?;
        grid("effective_loss.gamma_re_hz", &self.gamma_re_hz)?;
        if self.delta_hz.is_empty() {
            return Err(CliError::config("effective_loss.delta_hz", "grid is empty"));
        }
        if self.delta_hz.iter().any(|d| !d.is_finite()) {
            return Err(CliError::config("effective_loss.delta_hz", "values must be finite"));
        }
        positive("effective_loss.g_nl_hz", self.g_nl_hz)
    }
}

/// Number of whole `interval`s in `t_final`.
pub fn sample_count(t_final: f64, interval: f64, field: &str) -> Result<usize, CliError> {
    let n = (t_final / interval).round();
    if n < 1.0 || (n * interval - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(CliError::config(field, format!("must divide t_final = {t_final}")));
    }
    Ok(n as usize)
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(field, format!("{v} must be positive and finite")))
    }
}

fn nonnegative(field: &str, v: f64) -> Result<(), CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(field, format!("{v} must be nonnegative and finite")))
    }
}

fn at_least_one(field: &str, v: f64) -> Result<(), CliError> {
    if v >= 1.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(field, format!("{v} must be at least 1")))
    }
}

fn finite_pair(field: &str, p: Pair) -> Result<(), CliError> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CliError::config(field, "components must be finite"))
    }
}

fn grid(field: &str, values: &[f64]) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::config(field, "grid is empty"));
    }
    values.iter().try_for_each(|&v| positive(field, v))
}

fn nonnegative_grid(field: &str, values: &[f64]) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::config(field, "grid is empty"));
    }
    values.iter().try_for_each(|&v| nonnegative(field, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.phi_sweep.phi_inv.len(), 15);
        cfg.numerics.validate().unwrap();
        cfg.phi_sweep.validate().unwrap();
        cfg.trajectory.validate().unwrap();
        cfg.loss_sweep.validate().unwrap();
        cfg.wigner.validate().unwrap();
        cfg.effective_loss.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml("[phi_sweep]\nphi_invv = [1.0]\n").unwrap_err();
        assert!(err.to_string().contains("phi_invv"), "{err}");
    }

    #[test]
    fn empty_grid_names_the_field() {
        let cfg = RunConfig::from_toml("[phi_sweep]\nphi_inv = []\n").unwrap();
        let err = cfg.phi_sweep.validate().unwrap_err();
        assert_eq!(err.field(), Some("phi_sweep.phi_inv"));
    }

    #[test]
    fn cycle_counts() {
        assert_eq!(cycle_count(30.0, 1.0), 30);
        assert_eq!(cycle_count(30.0, 2.5), 75);
        assert_eq!(cycle_count(30.0, 1.0 / 3.0), 10);
    }

    #[test]
    fn adiabatic_parametrisations() {
        let mut t = Trajectory {
            mode: Mode::Adiabatic,
            ..Trajectory::default()
        };
        let p = t.adiabatic_params().unwrap();
        assert!((p.cat_amplitude() - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        assert_eq!(p.gamma_d(), 0.064);

        t.s = Some([-0.0896, 0.0]);
        let p = t.adiabatic_params().unwrap();
        assert_eq!(p.s(), Complex64::new(-0.0896, 0.0));

        t.omega_p = Some(1.0);
        assert!(t.adiabatic_params().is_err());
        t.s = None;
        assert!(t.adiabatic_params().is_err(), "incomplete pump triple");
        t.g_nl = Some(1.0);
        t.gamma_p = Some(10.0);
        t.gamma_d = None;
        let p = t.adiabatic_params().unwrap();
        assert!((p.gamma_d() - 0.4).abs() < 1e-15);

        let r = t.resolved().unwrap();
        assert!(r.omega_p.is_none() && r.s.is_some());
        assert_eq!(r.adiabatic_params().unwrap(), p);
    }

    #[test]
    fn snapshot_checks() {
        let mut w = Wigner::default();
        assert_eq!(w.snapshot_cycles(), vec![1, 8]);
        w.snapshots = vec![0.25];
        assert_eq!(w.validate().unwrap_err().field(), Some("wigner.snapshots"));
        w.snapshots = vec![12.0];
        let err = w.validate().unwrap_err();
        assert!(err.to_string().contains("horizon"), "{err}");
        w.snapshots = vec![0.0];
        w.validate().unwrap();
    }

    #[test]
    fn sample_counts() {
        assert_eq!(sample_count(10.0, 0.05, "f").unwrap(), 200);
        assert!(sample_count(10.0, 0.3, "f").is_err());
    }
}
