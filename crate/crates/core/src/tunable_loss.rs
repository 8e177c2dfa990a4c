//! Switchable pump loss for standing-mode synchronous pumping.
//!
//! A lossy resonator detuned by `delta` from the pump mode and coupled at
//! `g_loss` is eliminated adiabatically, leaving an effective pump loss and
//! frequency shift. The switched cycle couples signal and pump with the
//! loss switched off, evacuates the pump with the loss switched on, then
//! displaces the pump back to a coherent drive.

use num_complex::Complex64;

use crate::dynamics::CycleConfig;
use crate::fock::{displacement, CMatrix, DensityMatrix};
use crate::propagate::{amplitude_damping, JointPropagator};
use crate::{Error, Result, PUMP, SIGNAL};

/// Loss-resonator parameters, all in Hz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossChannelParams {
    pub g_loss: f64,
    pub gamma_re: f64,
    pub delta: f64,
}

impl LossChannelParams {
    pub fn new(g_loss: f64, gamma_re: f64, delta: f64) -> Result<Self> {
        let p = Self { g_loss, gamma_re, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_loss >= 0.0) || !self.g_loss.is_finite() {
            return Err(Error::param("g_loss", self.g_loss, "coupling must be nonnegative"));
        }
        if !(self.gamma_re > 0.0) || !self.gamma_re.is_finite() {
            return Err(Error::param("gamma_re", self.gamma_re, "resonator loss must be positive"));
        }
        if !self.delta.is_finite() {
            return Err(Error::param("delta", self.delta, "detuning must be finite"));
        }
        Ok(())
    }
}

/// `(g^2 Gamma / (Delta^2 + Gamma^2), -g^2 Delta / (Delta^2 + Gamma^2))`.
pub fn effective_loss_shift(p: &LossChannelParams) -> (f64, f64) {
    let g2 = p.g_loss * p.g_loss;
    let den = p.delta * p.delta + p.gamma_re * p.gamma_re;
    (g2 * p.gamma_re / den, -g2 * p.delta / den)
}

/// Default pump loss while coupling, in units of `g_nl`.
pub const DEFAULT_KAPPA_OFF: f64 = 0.01;
/// Default pump loss during reset, in units of `g_nl`.
pub const DEFAULT_KAPPA_ON: f64 = 10.0;
/// Default residual pump population tolerated before repumping.
pub const DEFAULT_RESIDUAL_THRESHOLD: f64 = 1e-3;
/// Default minimum `kappa_on * t_reset`.
pub const DEFAULT_MIN_RESET: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwitchedCycleConfig {
    /// Coupling phase, initial pump amplitude and signal loss. The pump loss
    /// during coupling is `kappa_off`; `base.gamma_s_pump` is not used.
    pub base: CycleConfig,
    pub kappa_off: f64,
    pub kappa_on: f64,
    pub t_reset: f64,
    /// Displacement applied to the evacuated pump.
    pub repump_alpha: Complex64,
    /// Largest pump population accepted after the reset; `None` disables the check.
    pub residual_threshold: Option<f64>,
    /// Smallest accepted `kappa_on * t_reset`; `None` disables the guard.
    pub min_reset: Option<f64>,
}

impl SwitchedCycleConfig {
    /// Defaults: `kappa_off = 0.01`, `kappa_on = 10`, `kappa_on * t_reset = 10`,
    /// repump to `base.alpha_p`.
    pub fn new(base: CycleConfig) -> Result<Self> {
        let cfg = Self {
            base,
            kappa_off: DEFAULT_KAPPA_OFF,
            kappa_on: DEFAULT_KAPPA_ON,
            t_reset: 10.0 / DEFAULT_KAPPA_ON,
            repump_alpha: base.alpha_p,
            residual_threshold: Some(DEFAULT_RESIDUAL_THRESHOLD),
            min_reset: Some(DEFAULT_MIN_RESET),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        for (name, v) in [("kappa_off", self.kappa_off), ("kappa_on", self.kappa_on), ("t_reset", self.t_reset)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(name, v, "must be nonnegative and finite"));
            }
        }
        if let Some(min) = self.min_reset {
            if self.reset_strength() < min {
                return Err(Error::param(
                    "kappa_on_t_reset",
                    self.reset_strength(),
                    "reset too weak to evacuate the pump",
                ));
            }
        }
        if let Some(th) = self.residual_threshold {
            if !(th > 0.0) {
                return Err(Error::param("residual_threshold", th, "must be positive"));
            }
        }
        Ok(())
    }

    /// `kappa_on * t_reset`.
    pub fn reset_strength(&self) -> f64 {
        self.kappa_on * self.t_reset
    }
}

/// Joint (signal, pump) state after `cycles` switched cycles from the signal
/// state `rho` and a fresh pump in `|base.alpha_p>`. The result carries
/// whatever pump population survived the last reset plus the repump
/// displacement.
pub fn run_switched_cycles(
    rho: &DensityMatrix,
    cfg: &SwitchedCycleConfig,
    pump_dim: usize,
    cycles: usize,
) -> Result<DensityMatrix> {
    let mut joint = fresh_joint(rho, cfg, pump_dim)?;
    for _ in 0..cycles {
        joint = switched_cycle_joint(&joint, cfg)?;
    }
    Ok(joint)
}

/// One switched cycle from `rho` with a fresh pump; returns the signal state.
pub fn run_switched_cycle(rho: &DensityMatrix, cfg: &SwitchedCycleConfig, pump_dim: usize) -> Result<DensityMatrix> {
    let joint = run_switched_cycles(rho, cfg, pump_dim, 1)?;
    crate::fock::partial_trace(&joint, SIGNAL)
}

fn fresh_joint(rho: &DensityMatrix, cfg: &SwitchedCycleConfig, pump_dim: usize) -> Result<DensityMatrix> {
    if rho.dims().len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: vec![rho.dim()],
            found: rho.dims().to_vec(),
        });
    }
    cfg.validate()?;
    let pump = crate::fock::coherent_state(cfg.base.alpha_p, pump_dim)?;
    Ok(DensityMatrix::from_raw(
        rho.data().kronecker(&pump.to_density().into_data()),
        vec![rho.dim(), pump_dim],
    ))
}

/// One switched cycle on a joint (signal, pump) state:
/// coupling for `phi` with pump loss `kappa_off`, reset with the interaction
/// off, residual check, then displacement of the pump by `repump_alpha`.
pub fn switched_cycle_joint(joint: &DensityMatrix, cfg: &SwitchedCycleConfig) -> Result<DensityMatrix> {
    cfg.validate()?;
    let dims = joint.dims().to_vec();
    if dims.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: vec![joint.dim(), 1],
            found: dims,
        });
    }
    let (ds, dp) = (dims[SIGNAL], dims[PUMP]);
    if ds < 2 || dp < 2 {
        return Err(Error::InvalidDimension { dim: ds.min(dp) });
    }
    crate::fock::check_truncation(cfg.base.alpha_p, dp)?;
    crate::fock::check_truncation(cfg.repump_alpha, dp)?;

    let base = &cfg.base;
    let prop = JointPropagator::new(
        ds,
        dp,
        base.phi,
        base.gamma_s_signal,
        cfg.kappa_off,
        crate::dynamics::LOSSY_MAX_STEP,
    );
    let basis = prop.basis();
    let coupled = basis.from_blocked(&prop.evolve_blocked(&basis.to_blocked(joint.data())));

    let mut reset = amplitude_damping(&coupled, &dims, PUMP, (-cfg.reset_strength()).exp());
    if base.gamma_s_signal > 0.0 {
        reset = amplitude_damping(&reset, &dims, SIGNAL, (-base.gamma_s_signal * cfg.t_reset).exp());
    }
    let residual = pump_population(&reset, ds, dp);
    if let Some(th) = cfg.residual_threshold {
        if residual >= th {
            return Err(Error::IncompleteReset { residual, threshold: th });
        }
    }
    let d = displacement(cfg.repump_alpha, dp)?;
    Ok(DensityMatrix::from_raw(displace_pump(&reset, d.data(), ds, dp), dims))
}

/// `<b^dagger b>` of a Kronecker-ordered joint matrix.
pub fn pump_population(x: &CMatrix, ds: usize, dp: usize) -> f64 {
    let mut s = 0.0;
    for n in 0..ds {
        for k in 1..dp {
            s += k as f64 * x[(n * dp + k, n * dp + k)].re;
        }
    }
    s
}

/// `(1 (x) D) X (1 (x) D)^dagger`, block by block.
fn displace_pump(x: &CMatrix, d: &CMatrix, ds: usize, dp: usize) -> CMatrix {
    let dd = d.adjoint();
    let mut out = CMatrix::zeros(ds * dp, ds * dp);
    for n in 0..ds {
        for m in 0..ds {
            let block = x.view((n * dp, m * dp), (dp, dp));
            let y = d * block * &dd;
            out.view_mut((n * dp, m * dp), (dp, dp)).copy_from(&y);
        }
    }
    out
}
