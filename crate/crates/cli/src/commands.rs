//! The five experiments. Each returns a table whose rows are sorted by the
//! swept parameters, so output does not depend on the worker count.

use catpump::analysis::{fidelity, wigner, CatSearch};
use catpump::dynamics::{
    best_record, evolve_adiabatic, max_stable_dt, run_map, CycleConfig, CycleMap, Propagation, TrajectoryRecord,
};
use catpump::fock::DensityMatrix;
use catpump::tunable_loss::{effective_loss_shift, LossChannelParams};
use catpump::Complex64;
use rayon::prelude::*;

use crate::config::{complex, cycle_count, sample_count, Mode, Numerics, Pair, RunConfig};
use crate::error::CliError;
use crate::output::{header, section, Cell, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    PhiSweep,
    Trajectory,
    LossSweep,
    Wigner,
    EffectiveLoss,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::PhiSweep => "phi-sweep",
            Command::Trajectory => "trajectory",
            Command::LossSweep => "loss-sweep",
            Command::Wigner => "wigner",
            Command::EffectiveLoss => "effective-loss",
        }
    }

    /// Whether the command depends on the Fock truncation.
    pub fn uses_truncation(self) -> bool {
        self != Command::EffectiveLoss
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub header: String,
    pub table: Table,
}

impl Output {
    pub fn to_csv(&self) -> String {
        self.table.to_csv(&self.header)
    }
}

/// Validates the relevant sections and runs `command` on `workers` threads.
pub fn run(command: Command, cfg: &RunConfig, workers: usize) -> Result<Output, CliError> {
    if workers == 0 {
        return Err(CliError::config("workers", "must be at least 1"));
    }
    if command.uses_truncation() {
        cfg.numerics.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config("workers", e.to_string()))?;
    let num = section("numerics", &cfg.numerics)?;
    pool.install(|| match command {
        Command::PhiSweep => {
            cfg.phi_sweep.validate()?;
            let table = phi_sweep(cfg)?;
            Ok(Output {
                header: header(command.name(), &[("numerics", num), ("phi_sweep", section("phi_sweep", &cfg.phi_sweep)?)]),
                table,
            })
        }
        Command::Trajectory => {
            cfg.trajectory.validate()?;
            let resolved = cfg.trajectory.resolved()?;
            let table = trajectory(&cfg.numerics, &resolved)?;
            Ok(Output {
                header: header(command.name(), &[("numerics", num), ("trajectory", section("trajectory", &resolved)?)]),
                table,
            })
        }
        Command::LossSweep => {
            cfg.loss_sweep.validate()?;
            let table = loss_sweep(cfg)?;
            Ok(Output {
                header: header(command.name(), &[("numerics", num), ("loss_sweep", section("loss_sweep", &cfg.loss_sweep)?)]),
                table,
            })
        }
        Command::Wigner => {
            cfg.wigner.validate()?;
            let table = wigner_snapshots(cfg)?;
            Ok(Output {
                header: header(command.name(), &[("numerics", num), ("wigner", section("wigner", &cfg.wigner)?)]),
                table,
            })
        }
        Command::EffectiveLoss => {
            cfg.effective_loss.validate()?;
            let table = effective_loss(cfg)?;
            Ok(Output {
                header: header(command.name(), &[("effective_loss", section("effective_loss", &cfg.effective_loss)?)]),
                table,
            })
        }
    })
}

/// Evaluates `f` on every point in parallel and keeps the input order; the
/// first failing point (in that order) decides the error.
fn map_points<P: Sync, R: Send>(points: &[P], f: impl Fn(&P) -> Result<R, CliError> + Sync + Send) -> Result<Vec<R>, CliError> {
    let results: Vec<Result<R, CliError>> = points.par_iter().map(f).collect();
    results.into_iter().collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn cycle_config(phi_inv: f64, pump_ratio: Pair, cycle_ratio: f64, losses: (f64, f64)) -> Result<CycleConfig, CliError> {
    Ok(CycleConfig::from_phi_inv(phi_inv, complex(pump_ratio))?
        .with_cycle_ratio(cycle_ratio)?
        .with_losses(losses.0, losses.1)?)
}

/// Summary of one synchronous run from vacuum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub best: TrajectoryRecord,
    /// Largest fidelity with the reference cat over the run, if one was given.
    pub reference_fidelity: Option<f64>,
}

pub fn sweep_point(num: &Numerics, cfg: &CycleConfig, reference: Option<Complex64>) -> Result<SweepPoint, CliError> {
    let map = CycleMap::with_propagation(
        cfg,
        num.signal_dim,
        num.pump_dim,
        Propagation::Blocked {
            max_step: num.lossy_max_step,
        },
    )?;
    let search = CatSearch::new(num.signal_dim, num.search_spec())?;
    let mut reference_fidelity: Option<f64> = None;
    let records = run_map(&map, &search, |_, rho| {
        if let Some(alpha) = reference {
            let f = fidelity(rho, alpha)?;
            reference_fidelity = Some(reference_fidelity.map_or(f, |r| r.max(f)));
        }
        Ok(())
    })?;
    let best = *best_record(&records).ok_or_else(|| CliError::config("n_cycles", "no cycles were run"))?;
    Ok(SweepPoint {
        best,
        reference_fidelity,
    })
}

pub const PHI_SWEEP_COLUMNS: [&str; 7] =
    ["phi_inv", "f_max", "alpha_opt_mag", "alpha_opt_phase", "n_cycles", "signal_dim", "pump_dim"];

fn phi_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let s = &cfg.phi_sweep;
    let num = &cfg.numerics;
    let points = sorted(s.phi_inv.clone());
    let rows = map_points(&points, |&phi_inv| {
        let n = cycle_count(s.cycles_per_phi_inv, phi_inv);
        let c = cycle_config(phi_inv, s.pump_ratio, s.cycle_ratio, (0.0, 0.0))?.with_cycles(n)?;
        let p = sweep_point(num, &c, None)?;
        Ok(vec![
            Cell::Float(phi_inv),
            Cell::Float(p.best.f_max),
            Cell::Float(p.best.alpha_opt.norm()),
            Cell::Float(p.best.alpha_opt.arg()),
            Cell::Int(n as u64),
            Cell::Int(num.signal_dim as u64),
            Cell::Int(num.pump_dim as u64),
        ])
    })?;
    Ok(Table {
        columns: PHI_SWEEP_COLUMNS.to_vec(),
        rows,
    })
}

pub const TRAJECTORY_COLUMNS: [&str; 5] = ["g_nl_t", "f_max", "alpha_opt_mag", "parity", "purity"];

fn trajectory_row(t: f64, search: &CatSearch, rho: &DensityMatrix) -> Result<Vec<Cell>, CliError> {
    let fit = search.search(rho)?;
    Ok(vec![
        Cell::Float(t),
        Cell::Float(fit.f_max),
        Cell::Float(fit.alpha_opt.norm()),
        Cell::Float(rho.signal_parity()),
        Cell::Float(rho.purity()),
    ])
}

fn trajectory(num: &Numerics, t: &crate::config::Trajectory) -> Result<Table, CliError> {
    let search = CatSearch::new(num.signal_dim, num.search_spec())?;
    let rho0 = DensityMatrix::vacuum(&[num.signal_dim])?;
    let mut rows = vec![trajectory_row(0.0, &search, &rho0)?];
    match t.mode {
        Mode::Synchronous => {
            let c = cycle_config(t.phi_inv, t.pump_ratio, t.cycle_ratio, (t.gamma_s_signal, t.gamma_s_pump))?;
            let n = ((t.t_final / c.cycle_period()) - 1e-9).ceil().max(1.0) as usize;
            let c = c.with_cycles(n)?;
            let map = CycleMap::with_propagation(
                &c,
                num.signal_dim,
                num.pump_dim,
                Propagation::Blocked {
                    max_step: num.lossy_max_step,
                },
            )?;
            run_map(&map, &search, |rec, rho| {
                rows.push(vec![
                    Cell::Float(rec.time),
                    Cell::Float(rec.f_max),
                    Cell::Float(rec.alpha_opt.norm()),
                    Cell::Float(rho.signal_parity()),
                    Cell::Float(rec.purity),
                ]);
                Ok(())
            })?;
        }
        Mode::Adiabatic => {
            let p = t.adiabatic_params()?;
            let dt = num.adiabatic_step_fraction * max_stable_dt(&p, num.signal_dim)?;
            let n = sample_count(t.t_final, t.sample_interval, "trajectory.sample_interval")?;
            let mut rho = rho0;
            for i in 1..=n {
                rho = evolve_adiabatic(&rho, &p, t.sample_interval, dt)?;
                rows.push(trajectory_row(i as f64 * t.sample_interval, &search, &rho)?);
            }
        }
    }
    Ok(Table {
        columns: TRAJECTORY_COLUMNS.to_vec(),
        rows,
    })
}

pub const LOSS_SWEEP_COLUMNS: [&str; 6] =
    ["phi_inv", "gamma_s_signal", "gamma_s_pump", "f_max", "alpha_opt_mag", "f_at_alpha2"];

fn loss_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let s = &cfg.loss_sweep;
    let num = &cfg.numerics;
    let mut points = Vec::new();
    for &phi_inv in &sorted(s.phi_inv.clone()) {
        for &gs in &sorted(s.gamma_s_signal.clone()) {
            for &gp in &sorted(s.gamma_s_pump.clone()) {
                points.push((phi_inv, gs, gp));
            }
        }
    }
    let rows = map_points(&points, |&(phi_inv, gs, gp)| {
        let n = cycle_count(s.cycles_per_phi_inv, phi_inv);
        let c = cycle_config(phi_inv, s.pump_ratio, s.cycle_ratio, (gs, gp))?.with_cycles(n)?;
        let p = sweep_point(num, &c, Some(complex(s.reference_alpha)))?;
        Ok(vec![
            Cell::Float(phi_inv),
            Cell::Float(gs),
            Cell::Float(gp),
            Cell::Float(p.best.f_max),
            Cell::Float(p.best.alpha_opt.norm()),
            Cell::Float(p.reference_fidelity.unwrap_or(f64::NAN)),
        ])
    })?;
    Ok(Table {
        columns: LOSS_SWEEP_COLUMNS.to_vec(),
        rows,
    })
}

pub const WIGNER_COLUMNS: [&str; 4] = ["g_nl_t", "x", "p", "w"];

fn wigner_snapshots(cfg: &RunConfig) -> Result<Table, CliError> {
    let w = &cfg.wigner;
    let num = &cfg.numerics;
    let mut snaps: Vec<(f64, usize)> = w.snapshots.iter().copied().zip(w.snapshot_cycles()).collect();
    snaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    snaps.dedup_by(|a, b| a.1 == b.1);
    let last = snaps.last().map_or(0, |s| s.1);

    let mut states = Vec::with_capacity(snaps.len());
    let mut rho = DensityMatrix::vacuum(&[num.signal_dim])?;
    let mut next = snaps.iter().peekable();
    while next.peek().is_some_and(|s| s.1 == 0) {
        states.push((next.next().unwrap().0, rho.clone()));
    }
    if last > 0 {
        let c = cycle_config(w.phi_inv, w.pump_ratio, w.cycle_ratio, (w.gamma_s_signal, w.gamma_s_pump))?;
        let map = CycleMap::with_propagation(
            &c,
            num.signal_dim,
            num.pump_dim,
            Propagation::Blocked {
                max_step: num.lossy_max_step,
            },
        )?;
        for cycle in 1..=last {
            rho = map.apply(&rho)?;
            while next.peek().is_some_and(|s| s.1 == cycle) {
                states.push((next.next().unwrap().0, rho.clone()));
            }
        }
    }

    let spec = w.grid_spec();
    let grids = map_points(&states, |(_, rho)| Ok(wigner(rho, &spec)?))?;
    let mut rows = Vec::new();
    for ((t, _), g) in states.iter().zip(&grids) {
        for (ix, &x) in g.x.iter().enumerate() {
            for (ip, &p) in g.p.iter().enumerate() {
                rows.push(vec![Cell::Float(*t), Cell::Float(x), Cell::Float(p), Cell::Float(g.values[(ix, ip)])]);
            }
        }
    }
    Ok(Table {
        columns: WIGNER_COLUMNS.to_vec(),
        rows,
    })
}

pub const EFFECTIVE_LOSS_COLUMNS: [&str; 6] =
    ["g_loss_hz", "gamma_re_hz", "delta_hz", "kappa_eff_hz", "delta_shift_hz", "kappa_eff_over_gnl"];

fn effective_loss(cfg: &RunConfig) -> Result<Table, CliError> {
    let e = &cfg.effective_loss;
    let mut rows = Vec::new();
    for &g in &sorted(e.g_loss_hz.clone()) {
        for &gamma in &sorted(e.gamma_re_hz.clone()) {
            for &delta in &sorted(e.delta_hz.clone()) {
                let (kappa, shift) = effective_loss_shift(&LossChannelParams::new(g, gamma, delta)?);
                rows.push(vec![
                    Cell::Float(g),
                    Cell::Float(gamma),
                    Cell::Float(delta),
                    Cell::Float(kappa),
                    Cell::Float(shift),
                    Cell::Float(kappa / e.g_nl_hz),
                ]);
            }
        }
    }
    Ok(Table {
        columns: EFFECTIVE_LOSS_COLUMNS.to_vec(),
        rows,
    })
}

/// Truncation used by `--convergence`.
pub const CONVERGENCE_DIMS: (usize, usize) = (60, 30);

/// Reruns `command` with the given truncation and returns the largest
/// deviation from `base` with the column where it occurs.
pub fn convergence(
    command: Command,
    cfg: &RunConfig,
    workers: usize,
    base: &Output,
    dims: (usize, usize),
) -> Result<Option<(f64, &'static str)>, CliError> {
    if !command.uses_truncation() {
        return Ok(None);
    }
    let mut fine = cfg.clone();
    fine.numerics.signal_dim = dims.0;
    fine.numerics.pump_dim = dims.1;
    let out = run(command, &fine, workers)?;
    Ok(base.table.max_deviation(&out.table))
}
