//! Deterministic amplitude dynamics of the adiabatically eliminated
//! two-photon oscillator: `dA/dt = (-2 g^2 |A|^2 A - 2 g Omega_p A*) / gamma_p`.

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldParams {
    g_nl: f64,
    omega_p: f64,
    gamma_p: f64,
}

impl MeanFieldParams {
    pub fn new(g_nl: f64, omega_p: f64, gamma_p: f64) -> Result<Self> {
        if !(g_nl > 0.0) || !g_nl.is_finite() {
            return Err(Error::param("g_nl", g_nl, "coupling must be positive"));
        }
        if !(gamma_p > 0.0) || !gamma_p.is_finite() {
            return Err(Error::param("gamma_p", gamma_p, "pump loss must be positive"));
        }
        if !omega_p.is_finite() {
            return Err(Error::param("omega_p", omega_p, "drive must be finite"));
        }
        Ok(Self { g_nl, omega_p, gamma_p })
    }

    pub fn g_nl(&self) -> f64 {
        self.g_nl
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }

    pub fn gamma_p(&self) -> f64 {
        self.gamma_p
    }
}

pub fn amplitude_rhs(a: Complex64, p: &MeanFieldParams) -> Complex64 {
    let g = p.g_nl;
    (a * (-2.0 * g * g * a.norm_sqr()) - a.conj() * (2.0 * g * p.omega_p)) / p.gamma_p
}

/// `[0, i sqrt(Omega_p/g), -i sqrt(Omega_p/g)]`.
pub fn fixed_points(p: &MeanFieldParams) -> Result<[Complex64; 3]> {
    if p.omega_p < 0.0 {
        return Err(Error::param(
            "omega_p",
            p.omega_p,
            "negative drive rotates the stable axis; outside the modelled phase convention",
        ));
    }
    let r = (p.omega_p / p.g_nl).sqrt();
    Ok([Complex64::new(0.0, 0.0), Complex64::new(0.0, r), Complex64::new(0.0, -r)])
}

/// Linear relaxation rate `4 g Omega_p / gamma_p` of the stable nonzero
/// fixed point.
pub fn relaxation_rate(p: &MeanFieldParams) -> Result<f64> {
    if !(p.omega_p > 0.0) {
        return Err(Error::param("omega_p", p.omega_p, "relaxation needs a positive drive"));
    }
    Ok(4.0 * p.g_nl * p.omega_p / p.gamma_p)
}

/// The same rate written as `|alpha|^2 Gamma_d` with the effective
/// two-photon parameters `S = 2 Omega_p g / gamma_p`, `Gamma_d = 4 g^2 / gamma_p`.
pub fn relaxation_rate_from_cat(p: &MeanFieldParams) -> Result<f64> {
    let params = crate::dynamics::adiabatic_params_from_pump(p.omega_p, p.g_nl, p.gamma_p)?;
    Ok(params.cat_amplitude().norm_sqr() * params.gamma_d())
}

/// Derivative of `Im(dA/dt)` with respect to `Im(A)` at `a`, by central
/// differences along the imaginary axis.
pub fn imaginary_axis_slope(a: Complex64, p: &MeanFieldParams, h: f64) -> f64 {
    let up = amplitude_rhs(a + Complex64::new(0.0, h), p);
    let down = amplitude_rhs(a - Complex64::new(0.0, h), p);
    (up.im - down.im) / (2.0 * h)
}

/// Fixed-step RK4 for the amplitude equation. Returns samples at every step,
/// starting with `(0, a0)`.
pub fn integrate(a0: Complex64, p: &MeanFieldParams, t_final: f64, dt: f64) -> Result<Vec<(f64, Complex64)>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", dt, "step must be positive"));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::param("t_final", t_final, "must be nonnegative"));
    }
    let steps = (t_final / dt).ceil() as usize;
    let h = if steps > 0 { t_final / steps as f64 } else { 0.0 };
    let f = |a: Complex64| amplitude_rhs(a, p);
    let mut out = Vec::with_capacity(steps + 1);
    let mut a = a0;
    out.push((0.0, a));
    for i in 1..=steps {
        let k1 = f(a);
        let k2 = f(a + k1 * (0.5 * h));
        let k3 = f(a + k2 * (0.5 * h));
        let k4 = f(a + k3 * h);
        a += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(Error::Integrator(format!("amplitude diverged at t = {}", i as f64 * h)));
        }
        out.push((i as f64 * h, a));
    }
    Ok(out)
}

/// Least-squares slope of `-ln|A(t) - target|` against `t`, over the samples
/// whose deviation stays above `floor`.
pub fn fit_decay_rate(samples: &[(f64, Complex64)], target: Complex64, floor: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|&(t, a)| {
            let d = (a - target).norm();
            (d > floor).then(|| (t, d.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return Err(Error::param("samples", pts.len() as f64, "too few points above the floor"));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    Ok(-sxy / sxx)
}

/// Integrates from `A_+ + i delta` with step `1e-3 gamma_p/(g Omega_p)` to
/// `10/rate` and fits the decay of the deviation.
pub fn fitted_relaxation_rate(p: &MeanFieldParams, delta: f64) -> Result<f64> {
    let rate = relaxation_rate(p)?;
    let target = fixed_points(p)?[1];
    let dt = 1e-3 * p.gamma_p / (p.g_nl * p.omega_p);
    let samples = integrate(target + Complex64::new(0.0, delta), p, 10.0 / rate, dt)?;
    fit_decay_rate(&samples, target, 1e-12)
}
