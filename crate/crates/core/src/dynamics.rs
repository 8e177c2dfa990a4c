//! Density-matrix propagation for the adiabatic two-photon master equation
//! and for the synchronous-pump cycle map.
//!
//! Time is measured in units of `1/g_nl` and every rate in units of `g_nl`.
//! One synchronous-pump cycle couples the signal to a freshly prepared
//! coherent pump for the scaled time `phi = g_nl t_nl`, then discards the
//! pump; the cycle period is `phi * cycle_ratio`.

use num_complex::Complex64;

use crate::analysis::{CatSearch, CatSearchSpec, FidelityResult};
use crate::fock::{
    annihilation, coherent_state, interaction_hamiltonian, CMatrix, DensityMatrix, Operator,
};
use crate::propagate::{
    apply_kraus, kraus_by_rk4, kraus_from_blocks, rk4_evolve, BlockBasis, JointPropagator,
    SparseLiouvillian, RK4_STABILITY,
};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default largest integrating-factor step for lossy cycles, in `1/g_nl`.
pub const LOSSY_MAX_STEP: f64 = 0.05;

/// Minimum number of RK4 steps per coupling interval on the plain RK4 route.
pub const RK4_STEPS_PER_CYCLE: usize = 200;

/// Effective two-photon pump `S` and two-photon loss `Gamma_d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdiabaticParams {
    s: Complex64,
    gamma_d: f64,
}

impl AdiabaticParams {
    pub fn new(s: Complex64, gamma_d: f64) -> Result<Self> {
        if !(gamma_d >= 0.0) || !gamma_d.is_finite() {
            return Err(Error::param("gamma_d", gamma_d, "two-photon loss must be nonnegative"));
        }
        if !s.re.is_finite() || !s.im.is_finite() {
            return Err(Error::param("s", s.norm(), "pump rate must be finite"));
        }
        Ok(Self { s, gamma_d })
    }

    /// Parameters whose steady state is `cat(alpha)`: `S = -alpha^2 Gamma_d / 2`.
    pub fn for_cat(alpha: Complex64, gamma_d: f64) -> Result<Self> {
        Self::new(-alpha * alpha * (0.5 * gamma_d), gamma_d)
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    pub fn gamma_d(&self) -> f64 {
        self.gamma_d
    }

    /// Steady-state cat amplitude `i sqrt(2 S / Gamma_d)` (principal root).
    pub fn cat_amplitude(&self) -> Complex64 {
        if self.gamma_d == 0.0 {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        I * (self.s * 2.0 / self.gamma_d).sqrt()
    }

    /// Hamiltonian `i (S* a^2 - S (a^dagger)^2)` and the channel `a^2` at rate
    /// `Gamma_d`, so that the generator reads
    /// `-S[(a^dagger)^2 - a^2, rho] + (Gamma_d/2) L(a^2, rho)` for real `S`.
    pub fn generator(&self, dim: usize) -> Result<(Operator, Vec<LindbladChannel>)> {
        let a = annihilation(dim)?;
        let a2 = a.compose(&a)?;
        let a2_dag = a2.adjoint();
        let h = a2.scale(I * self.s.conj()).add(&a2_dag.scale(-I * self.s))?;
        Ok((h, vec![LindbladChannel::new(self.gamma_d, a2)?]))
    }
}

/// `S = 2 Omega_p g_nl / gamma_p`, `Gamma_d = 4 g_nl^2 / gamma_p`.
pub fn adiabatic_params_from_pump(omega_p: f64, g_nl: f64, gamma_p: f64) -> Result<AdiabaticParams> {
    if !(gamma_p > 0.0) || !gamma_p.is_finite() {
        return Err(Error::param("gamma_p", gamma_p, "pump loss must be positive"));
    }
    AdiabaticParams::new(
        Complex64::from(2.0 * omega_p * g_nl / gamma_p),
        4.0 * g_nl * g_nl / gamma_p,
    )
}

/// A dissipator `(rate/2) (2 A rho A^dagger - A^dagger A rho - rho A^dagger A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladChannel {
    rate: f64,
    operator: Operator,
}

impl LindbladChannel {
    pub fn new(rate: f64, operator: Operator) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::param("rate", rate, "channel rate must be nonnegative"));
        }
        Ok(Self { rate, operator })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }
}

/// `-i[H, rho] + sum_k (rate_k/2) (2 A rho A^dagger - A^dagger A rho - rho A^dagger A)`.
pub fn lindblad_rhs(rho: &DensityMatrix, h: &Operator, channels: &[LindbladChannel]) -> Result<CMatrix> {
    let dims = rho.dims();
    if h.dims() != dims {
        return Err(Error::DimensionMismatch {
            expected: dims.to_vec(),
            found: h.dims().to_vec(),
        });
    }
    let r = rho.data();
    let hm = h.data();
    let mut out = (hm * r - r * hm) * (-I);
    for ch in channels {
        let a = ch.operator.data();
        if ch.operator.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims.to_vec(),
                found: ch.operator.dims().to_vec(),
            });
        }
        let ad = a.adjoint();
        let ada = &ad * a;
        let term = (a * r * &ad) * Complex64::from(2.0) - &ada * r - r * &ada;
        out += term * Complex64::from(0.5 * ch.rate);
    }
    Ok(out)
}

fn sparse_generator(h: &Operator, channels: &[LindbladChannel]) -> SparseLiouvillian {
    let ch: Vec<(f64, CMatrix)> = channels
        .iter()
        .map(|c| (c.rate, c.operator.data().clone()))
        .collect();
    SparseLiouvillian::new(h.data(), &ch)
}

/// Largest RK4 step accepted by [`evolve_adiabatic`] for this truncation.
pub fn max_stable_dt(params: &AdiabaticParams, dim: usize) -> Result<f64> {
    let (h, ch) = params.generator(dim)?;
    Ok(RK4_STABILITY / sparse_generator(&h, &ch).stability_bound())
}

/// Step used when the caller does not choose one: a fifth of
/// [`max_stable_dt`], which keeps near-pure states positive to about 1e-7.
pub fn recommended_dt(params: &AdiabaticParams, dim: usize) -> Result<f64> {
    Ok(0.2 * max_stable_dt(params, dim)?)
}

/// Evolves a single-mode state under the adiabatic master equation up to
/// `t_final` with fixed RK4 steps no longer than `dt`.
pub fn evolve_adiabatic(
    rho0: &DensityMatrix,
    params: &AdiabaticParams,
    t_final: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    evolve_adiabatic_observed(rho0, params, t_final, dt, |_, _, _| Ok(()))
}

/// As [`evolve_adiabatic`], calling `observer(step, t, rho)` after every step.
pub fn evolve_adiabatic_observed(
    rho0: &DensityMatrix,
    params: &AdiabaticParams,
    t_final: f64,
    dt: f64,
    mut observer: impl FnMut(usize, f64, &DensityMatrix) -> Result<()>,
) -> Result<DensityMatrix> {
    if rho0.dims().len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: vec![rho0.dim()],
            found: rho0.dims().to_vec(),
        });
    }
    let dims = rho0.dims().to_vec();
    let (h, ch) = params.generator(rho0.dim())?;
    let l = sparse_generator(&h, &ch);
    let out = rk4_evolve(&l, rho0.data().clone(), t_final, dt, |step, t, m| {
        observer(step, t, &DensityMatrix::from_raw(m.clone(), dims.clone()))
    })?;
    Ok(DensityMatrix::from_raw(out, dims))
}

/// Synchronous-pump cycle parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleConfig {
    /// `phi = g_nl t_nl`.
    pub phi: f64,
    /// Coherent amplitude of each fresh pump mode.
    pub alpha_p: Complex64,
    /// `T_cycle / t_nl`, at least 1.
    pub cycle_ratio: f64,
    /// Single-photon loss on the signal during coupling.
    pub gamma_s_signal: f64,
    /// Single-photon loss on the pump during coupling.
    pub gamma_s_pump: f64,
    pub n_cycles: usize,
}

/// `ceil(30 / phi)` cycles.
pub fn default_cycles(phi: f64) -> usize {
    ((30.0 / phi) - 1e-9).ceil().max(1.0) as usize
}

/// `ceil(4 |alpha_p|^2) + 15` pump levels.
pub fn default_pump_dim(alpha_p: Complex64) -> usize {
    (4.0 * alpha_p.norm_sqr()).ceil() as usize + 15
}

impl CycleConfig {
    /// Lossless config with `T_cycle = t_nl` and the default cycle count.
    pub fn new(phi: f64, alpha_p: Complex64) -> Result<Self> {
        let cfg = Self {
            phi,
            alpha_p,
            cycle_ratio: 1.0,
            gamma_s_signal: 0.0,
            gamma_s_pump: 0.0,
            n_cycles: if phi > 0.0 && phi.is_finite() { default_cycles(phi) } else { 1 },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Config with `alpha_p = pump_ratio * phi`, i.e. `alpha_p / phi = pump_ratio`.
    pub fn from_phi_inv(phi_inv: f64, pump_ratio: Complex64) -> Result<Self> {
        if !(phi_inv > 0.0) || !phi_inv.is_finite() {
            return Err(Error::param("phi_inv", phi_inv, "must be positive"));
        }
        let phi = 1.0 / phi_inv;
        Self::new(phi, pump_ratio * phi)
    }

    pub fn with_cycle_ratio(mut self, ratio: f64) -> Result<Self> {
        self.cycle_ratio = ratio;
        self.validate()?;
        Ok(self)
    }

    pub fn with_losses(mut self, gamma_s_signal: f64, gamma_s_pump: f64) -> Result<Self> {
        self.gamma_s_signal = gamma_s_signal;
        self.gamma_s_pump = gamma_s_pump;
        self.validate()?;
        Ok(self)
    }

    pub fn with_cycles(mut self, n_cycles: usize) -> Result<Self> {
        self.n_cycles = n_cycles;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0) || !self.phi.is_finite() {
            return Err(Error::param("phi", self.phi, "coupling phase must be positive"));
        }
        if !(self.cycle_ratio >= 1.0) || !self.cycle_ratio.is_finite() {
            return Err(Error::param(
                "cycle_ratio",
                self.cycle_ratio,
                "the cycle period cannot be shorter than the coupling time",
            ));
        }
        for (name, v) in [("gamma_s_signal", self.gamma_s_signal), ("gamma_s_pump", self.gamma_s_pump)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(name, v, "loss rate must be nonnegative"));
            }
        }
        if !self.alpha_p.re.is_finite() || !self.alpha_p.im.is_finite() {
            return Err(Error::param("alpha_p", self.alpha_p.norm(), "pump amplitude must be finite"));
        }
        if self.n_cycles == 0 {
            return Err(Error::param("n_cycles", 0.0, "at least one cycle is required"));
        }
        Ok(())
    }

    /// Cycle period in units of `1/g_nl`.
    pub fn cycle_period(&self) -> f64 {
        self.phi * self.cycle_ratio
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma_s_signal == 0.0 && self.gamma_s_pump == 0.0
    }
}

/// Effective `S` and `Gamma_d` from the second-order expansion of one cycle:
/// `S = i phi alpha_p / T`, `Gamma_d = phi^2 / T` with `T = phi * cycle_ratio`.
pub fn second_order_params(cfg: &CycleConfig) -> AdiabaticParams {
    let period = cfg.cycle_period();
    AdiabaticParams {
        s: I * cfg.phi * cfg.alpha_p / period,
        gamma_d: cfg.phi * cfg.phi / period,
    }
}

/// Generator of the second-order cycle expansion. With `pump_correction`,
/// the channel `alpha_p* a^2 + alpha_p (a^dagger)^2` at rate `phi^2 / T` is
/// added; it is dropped from [`second_order_params`].
pub fn second_order_generator(
    cfg: &CycleConfig,
    dim: usize,
    pump_correction: bool,
) -> Result<(Operator, Vec<LindbladChannel>)> {
    let params = second_order_params(cfg);
    let (h, mut channels) = params.generator(dim)?;
    if pump_correction {
        let a = annihilation(dim)?;
        let a2 = a.compose(&a)?;
        let op = a2.scale(cfg.alpha_p.conj()).add(&a2.adjoint().scale(cfg.alpha_p))?;
        channels.push(LindbladChannel::new(cfg.phi * cfg.phi / cfg.cycle_period(), op)?);
    }
    Ok((h, channels))
}

/// How a cycle map integrates the joint (signal, pump) evolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Propagation {
    /// Exact excitation-block exponentials; single-photon jumps (if any) by
    /// integrating-factor RK4 with steps no longer than `max_step`.
    Blocked { max_step: f64 },
    /// Classical RK4 in the Kronecker basis with at least
    /// `steps_per_cycle` steps per coupling interval (pure states for the
    /// lossless map, full density matrices otherwise).
    Rk4 { steps_per_cycle: usize },
}

impl Default for Propagation {
    fn default() -> Self {
        Propagation::Blocked {
            max_step: LOSSY_MAX_STEP,
        }
    }
}

#[derive(Debug)]
enum MapKind {
    Kraus(Vec<CMatrix>),
    Blocked {
        prop: JointPropagator,
        pump: nalgebra::DVector<Complex64>,
    },
    Rk4 {
        generator: SparseLiouvillian,
        pump: DensityMatrix,
        dt: f64,
    },
}

/// One synchronous-pump cycle as a reusable linear map on signal states.
#[derive(Debug)]
pub struct CycleMap {
    cfg: CycleConfig,
    signal_dim: usize,
    pump_dim: usize,
    kind: MapKind,
}

impl CycleMap {
    /// Lossless cycles become a Kraus map; lossy cycles keep a joint
    /// propagator.
    pub fn new(cfg: &CycleConfig, signal_dim: usize, pump_dim: usize) -> Result<Self> {
        Self::with_propagation(cfg, signal_dim, pump_dim, Propagation::default())
    }

    pub fn with_propagation(
        cfg: &CycleConfig,
        signal_dim: usize,
        pump_dim: usize,
        propagation: Propagation,
    ) -> Result<Self> {
        cfg.validate()?;
        let pump = coherent_state(cfg.alpha_p, pump_dim)?;
        if signal_dim < 2 {
            return Err(Error::InvalidDimension { dim: signal_dim });
        }
        let kind = match propagation {
            Propagation::Blocked { max_step } => {
                if !(max_step > 0.0) {
                    return Err(Error::param("max_step", max_step, "step must be positive"));
                }
                if cfg.is_lossless() {
                    let basis = BlockBasis::new(signal_dim, pump_dim);
                    MapKind::Kraus(kraus_from_blocks(&basis, &basis.unitary_blocks(cfg.phi), pump.data()))
                } else {
                    MapKind::Blocked {
                        prop: JointPropagator::new(
                            signal_dim,
                            pump_dim,
                            cfg.phi,
                            cfg.gamma_s_signal,
                            cfg.gamma_s_pump,
                            max_step,
                        ),
                        pump: pump.data().clone(),
                    }
                }
            }
            Propagation::Rk4 { steps_per_cycle } => {
                let steps_per_cycle = steps_per_cycle.max(1);
                let h = interaction_hamiltonian(signal_dim, pump_dim)?;
                if cfg.is_lossless() {
                    MapKind::Kraus(kraus_by_rk4(h.data(), signal_dim, pump_dim, pump.data(), cfg.phi, steps_per_cycle))
                } else {
                    let dims = [signal_dim, pump_dim];
                    let a = crate::fock::embed(&annihilation(signal_dim)?, 0, &dims)?;
                    let b = crate::fock::embed(&annihilation(pump_dim)?, 1, &dims)?;
                    let channels = vec![
                        LindbladChannel::new(cfg.gamma_s_signal, a)?,
                        LindbladChannel::new(cfg.gamma_s_pump, b)?,
                    ];
                    let generator = sparse_generator(&h, &channels);
                    let stable = RK4_STABILITY / generator.stability_bound();
                    let dt = (cfg.phi / steps_per_cycle as f64).min(0.5 * stable);
                    MapKind::Rk4 {
                        generator,
                        pump: pump.to_density(),
                        dt,
                    }
                }
            }
        };
        Ok(Self {
            cfg: *cfg,
            signal_dim,
            pump_dim,
            kind,
        })
    }

    pub fn config(&self) -> &CycleConfig {
        &self.cfg
    }

    pub fn signal_dim(&self) -> usize {
        self.signal_dim
    }

    pub fn pump_dim(&self) -> usize {
        self.pump_dim
    }

    /// Kraus operators `<j|_pump U |alpha_p>` of a lossless map.
    pub fn kraus_operators(&self) -> Option<&[CMatrix]> {
        match &self.kind {
            MapKind::Kraus(k) => Some(k),
            _ => None,
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dims() != [self.signal_dim] {
            return Err(Error::DimensionMismatch {
                expected: vec![self.signal_dim],
                found: rho.dims().to_vec(),
            });
        }
        let out = match &self.kind {
            MapKind::Kraus(k) => apply_kraus(k, rho.data()),
            MapKind::Blocked { prop, pump } => {
                let basis = prop.basis();
                let joint = prop.evolve_blocked(&basis.product_state(rho.data(), pump));
                basis.trace_pump(&joint)
            }
            MapKind::Rk4 { generator, pump, dt } => {
                let joint = rho.data().kronecker(pump.data());
                let joint = rk4_evolve(generator, joint, self.cfg.phi, *dt, |_, _, _| Ok(()))?;
                crate::fock::partial_trace(
                    &DensityMatrix::from_raw(joint, vec![self.signal_dim, self.pump_dim]),
                    0,
                )?
                .into_data()
            }
        };
        Ok(DensityMatrix::from_raw(out, vec![self.signal_dim]))
    }
}

/// One lossless cycle `Tr_b{U (rho (x) |alpha_p><alpha_p|) U^dagger}`.
pub fn unitary_cycle(rho: &DensityMatrix, cfg: &CycleConfig, pump_dim: usize) -> Result<DensityMatrix> {
    if !cfg.is_lossless() {
        return Err(Error::param(
            "gamma_s",
            cfg.gamma_s_signal.max(cfg.gamma_s_pump),
            "unitary cycle requires zero loss rates; use lossy_cycle",
        ));
    }
    CycleMap::new(cfg, rho.dim(), pump_dim)?.apply(rho)
}

/// One cycle with single-photon loss on signal and pump during coupling.
pub fn lossy_cycle(rho: &DensityMatrix, cfg: &CycleConfig, pump_dim: usize) -> Result<DensityMatrix> {
    let basis_cfg = *cfg;
    cfg.validate()?;
    let map = CycleMap {
        cfg: basis_cfg,
        signal_dim: rho.dim(),
        pump_dim,
        kind: MapKind::Blocked {
            prop: JointPropagator::new(
                rho.dim(),
                pump_dim,
                cfg.phi,
                cfg.gamma_s_signal,
                cfg.gamma_s_pump,
                LOSSY_MAX_STEP,
            ),
            pump: coherent_state(cfg.alpha_p, pump_dim)?.data().clone(),
        },
    };
    map.apply(rho)
}

/// Diagnostics recorded after every cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub cycle: usize,
    /// `n * T_cycle` in units of `1/g_nl`.
    pub time: f64,
    pub f_max: f64,
    pub alpha_opt: Complex64,
    pub hit_lower_bound: bool,
    pub parity: f64,
    pub purity: f64,
}

impl TrajectoryRecord {
    pub fn new(cycle: usize, time: f64, fit: FidelityResult, rho: &DensityMatrix) -> Self {
        Self {
            cycle,
            time,
            f_max: fit.f_max,
            alpha_opt: fit.alpha_opt,
            hit_lower_bound: fit.hit_lower_bound,
            parity: rho.signal_parity(),
            purity: rho.purity(),
        }
    }
}

/// Runs `cfg.n_cycles` cycles from the signal vacuum with the default cat
/// search.
pub fn run_synchronous(cfg: &CycleConfig, signal_dim: usize, pump_dim: usize) -> Result<Vec<TrajectoryRecord>> {
    let search = CatSearch::new(signal_dim, CatSearchSpec::default().clamped_to(signal_dim))?;
    run_synchronous_with(cfg, signal_dim, pump_dim, &search, |_, _| Ok(()))
}

/// Runs the cycle map from vacuum, evaluating `search` after every cycle and
/// handing each record and state to `observer`.
pub fn run_synchronous_with(
    cfg: &CycleConfig,
    signal_dim: usize,
    pump_dim: usize,
    search: &CatSearch,
    observer: impl FnMut(&TrajectoryRecord, &DensityMatrix) -> Result<()>,
) -> Result<Vec<TrajectoryRecord>> {
    let map = CycleMap::new(cfg, signal_dim, pump_dim)?;
    run_map(&map, search, observer)
}

/// Runs an already built cycle map from the signal vacuum.
pub fn run_map(
    map: &CycleMap,
    search: &CatSearch,
    mut observer: impl FnMut(&TrajectoryRecord, &DensityMatrix) -> Result<()>,
) -> Result<Vec<TrajectoryRecord>> {
    let cfg = map.config();
    let mut rho = DensityMatrix::vacuum(&[map.signal_dim()])?;
    let mut records = Vec::with_capacity(cfg.n_cycles);
    for cycle in 1..=cfg.n_cycles {
        rho = map.apply(&rho)?;
        let fit = search.search(&rho)?;
        let rec = TrajectoryRecord::new(cycle, cycle as f64 * cfg.cycle_period(), fit, &rho);
        observer(&rec, &rho)?;
        records.push(rec);
    }
    Ok(records)
}

/// Record with the highest `f_max`; ties keep the earliest.
pub fn best_record(records: &[TrajectoryRecord]) -> Option<&TrajectoryRecord> {
    records
        .iter()
        .fold(None, |best: Option<&TrajectoryRecord>, r| match best {
            Some(b) if b.f_max >= r.f_max => Some(b),
            _ => Some(r),
        })
}

/// First time at which `f_max` reaches `threshold`, linearly interpolated
/// between samples. `samples` are `(t, f)` pairs in increasing time, and the
/// curve is taken to start at `start`.
pub fn first_crossing(start: (f64, f64), samples: &[(f64, f64)], threshold: f64) -> Option<f64> {
    let mut prev = start;
    if prev.1 >= threshold {
        return Some(prev.0);
    }
    for &s in samples {
        if s.1 >= threshold {
            let w = (threshold - prev.1) / (s.1 - prev.1);
            return Some(prev.0 + w * (s.0 - prev.0));
        }
        prev = s;
    }
    None
}
