//! Cat-state fidelity search and Wigner functions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::fock::{cat_state, displacement, CMatrix, DensityMatrix};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Search grid for the best-matching even cat state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatSearchSpec {
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Number of magnitudes, evenly spaced over `[alpha_min, alpha_max]`.
    pub n_mag: usize,
    /// Number of phases, evenly spaced over `[0, pi)`.
    pub n_phase: usize,
    /// Golden-section refinement of the magnitude at the best phase.
    pub refine: bool,
}

impl Default for CatSearchSpec {
    fn default() -> Self {
        Self {
            alpha_min: 1.2,
            alpha_max: 4.0,
            n_mag: 141,
            n_phase: 12,
            refine: true,
        }
    }
}

impl CatSearchSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_min > 0.0) || !self.alpha_min.is_finite() {
            return Err(Error::param("alpha_min", self.alpha_min, "must be positive"));
        }
        if !(self.alpha_max >= self.alpha_min) || !self.alpha_max.is_finite() {
            return Err(Error::param("alpha_max", self.alpha_max, "must be at least alpha_min"));
        }
        if self.n_mag == 0 || (self.n_mag == 1 && self.alpha_max > self.alpha_min) {
            return Err(Error::param("n_mag", self.n_mag as f64, "too few magnitudes for the range"));
        }
        if self.n_phase == 0 {
            return Err(Error::param("n_phase", 0.0, "at least one phase is required"));
        }
        Ok(())
    }

    /// Magnitude grid spacing.
    pub fn step(&self) -> f64 {
        if self.n_mag > 1 {
            (self.alpha_max - self.alpha_min) / (self.n_mag - 1) as f64
        } else {
            0.0
        }
    }

    /// Lowers `alpha_max` to the largest amplitude representable in `dim`
    /// levels (`|alpha|^2 <= dim/4`), keeping the grid spacing.
    pub fn clamped_to(self, dim: usize) -> Self {
        let cap = (dim as f64 / 4.0).sqrt();
        if self.alpha_max <= cap {
            return self;
        }
        let step = self.step();
        let alpha_max = cap.max(self.alpha_min);
        let n_mag = if step > 0.0 {
            ((alpha_max - self.alpha_min) / step + 1e-9).floor() as usize + 1
        } else {
            1
        };
        let alpha_max = if step > 0.0 {
            self.alpha_min + (n_mag - 1) as f64 * step
        } else {
            self.alpha_min
        };
        Self {
            alpha_max,
            n_mag,
            ..self
        }
    }

    fn magnitude(&self, i: usize) -> f64 {
        if i + 1 == self.n_mag {
            self.alpha_max
        } else {
            self.alpha_min + i as f64 * self.step()
        }
    }

    fn phase(&self, j: usize) -> f64 {
        std::f64::consts::PI * j as f64 / self.n_phase as f64
    }
}

/// Best cat fidelity and the amplitude attaining it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityResult {
    pub f_max: f64,
    pub alpha_opt: Complex64,
    /// The optimum sits on `alpha_min`, so the state is not yet a resolved cat.
    pub hit_lower_bound: bool,
}

/// `<cat(alpha)| rho |cat(alpha)>` with the truncated, renormalised cat.
pub fn fidelity(rho: &DensityMatrix, alpha: Complex64) -> Result<f64> {
    single_mode(rho)?;
    let cat = cat_state(alpha, rho.dim())?;
    let v = cat.data();
    Ok((v.adjoint() * rho.data() * v)[(0, 0)].re)
}

fn single_mode(rho: &DensityMatrix) -> Result<()> {
    if rho.dims().len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: vec![rho.dim()],
            found: rho.dims().to_vec(),
        });
    }
    Ok(())
}

/// Precomputed cat states for repeated searches at one truncation.
#[derive(Clone, Debug)]
pub struct CatSearch {
    spec: CatSearchSpec,
    dim: usize,
    /// Even Fock amplitudes of each grid cat, indexed `[mag * n_phase + phase]`.
    grid: Vec<Vec<Complex64>>,
}

impl CatSearch {
    pub fn new(dim: usize, spec: CatSearchSpec) -> Result<Self> {
        spec.validate()?;
        let mut grid = Vec::with_capacity(spec.n_mag * spec.n_phase);
        for i in 0..spec.n_mag {
            for j in 0..spec.n_phase {
                let alpha = Complex64::from_polar(spec.magnitude(i), spec.phase(j));
                grid.push(even_part(&cat_state(alpha, dim)?.data().as_slice().to_vec()));
            }
        }
        Ok(Self { spec, dim, grid })
    }

    pub fn spec(&self) -> &CatSearchSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn search(&self, rho: &DensityMatrix) -> Result<FidelityResult> {
        single_mode(rho)?;
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: vec![self.dim],
                found: rho.dims().to_vec(),
            });
        }
        let even = even_block(rho.data());
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for i in 0..self.spec.n_mag {
            for j in 0..self.spec.n_phase {
                let f = quadratic_form(&even, &self.grid[i * self.spec.n_phase + j]);
                if f > best.0 {
                    best = (f, i, j);
                }
            }
        }
        let (mut f_max, i, j) = best;
        let theta = self.spec.phase(j);
        let mut r_opt = self.spec.magnitude(i);
        if self.spec.refine && self.spec.n_mag > 1 {
            let step = self.spec.step();
            let lo = (r_opt - step).max(self.spec.alpha_min);
            let hi = (r_opt + step).min(self.spec.alpha_max);
            let eval = |r: f64| -> Result<f64> {
                let v = cat_state(Complex64::from_polar(r, theta), self.dim)?;
                Ok(quadratic_form(&even, &even_part(v.data().as_slice())))
            };
            let (r, f) = golden_max(eval, lo, hi, 1e-7)?;
            if f > f_max {
                f_max = f;
                r_opt = r;
            }
        }
        Ok(FidelityResult {
            f_max,
            alpha_opt: Complex64::from_polar(r_opt, theta),
            hit_lower_bound: r_opt <= self.spec.alpha_min + 1e-9,
        })
    }
}

/// Best cat fidelity of `rho` over the grid `spec`.
pub fn optimal_cat(rho: &DensityMatrix, spec: CatSearchSpec) -> Result<FidelityResult> {
    CatSearch::new(rho.dim(), spec)?.search(rho)
}

fn even_part(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().step_by(2).copied().collect()
}

fn even_block(rho: &CMatrix) -> CMatrix {
    let m = rho.nrows().div_ceil(2);
    CMatrix::from_fn(m, m, |i, j| rho[(2 * i, 2 * j)])
}

fn quadratic_form(m: &CMatrix, v: &[Complex64]) -> f64 {
    let n = v.len();
    let mut acc = ZERO;
    for j in 0..n {
        let mut col = ZERO;
        for i in 0..n {
            col += v[i].conj() * m[(i, j)];
        }
        acc += col * v[j];
    }
    acc.re
}

/// Maximises a unimodal `f` on `[lo, hi]`; endpoints are candidates too.
fn golden_max(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for r in [lo, hi] {
        let fr = f(r)?;
        if fr > best.1 {
            best = (r, fr);
        }
    }
    Ok(best)
}

/// Rectangular phase-space grid; `x = Re(beta)`, `p = Im(beta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl WignerGridSpec {
    /// `n x n` grid over `[-extent, extent]^2`.
    pub fn square(extent: f64, n: usize) -> Self {
        Self {
            x_min: -extent,
            x_max: extent,
            nx: n,
            p_min: -extent,
            p_max: extent,
            np: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi, n) in [("x", self.x_min, self.x_max, self.nx), ("p", self.p_min, self.p_max, self.np)] {
            if !lo.is_finite() || !hi.is_finite() || !(hi > lo) {
                return Err(Error::param(
                    if name == "x" { "x_range" } else { "p_range" },
                    hi - lo,
                    "range must be finite and nonempty",
                ));
            }
            if n < 2 {
                return Err(Error::param(
                    if name == "x" { "nx" } else { "np" },
                    n as f64,
                    "at least two points per axis",
                ));
            }
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }

    fn max_radius(&self) -> f64 {
        let x = self.x_min.abs().max(self.x_max.abs());
        let p = self.p_min.abs().max(self.p_max.abs());
        x.hypot(p)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Wigner function sampled on a grid, normalised so that
/// `integral W d(Re beta) d(Im beta) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// `values[(i, j)] = W(x[i] + i p[j])`.
    pub values: DMatrix<f64>,
}

impl WignerGrid {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let wx = trapezoid_weights(&self.x);
        let wp = trapezoid_weights(&self.p);
        let mut s = 0.0;
        for (i, a) in wx.iter().enumerate() {
            for (j, b) in wp.iter().enumerate() {
                s += a * b * self.values[(i, j)];
            }
        }
        s
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] - x[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Margin, in amplitude, beyond `sqrt(dim)` that the grid may reach.
const WIGNER_RADIUS_MARGIN: f64 = 5.0;

fn check_radius(dim: usize, radius: f64) -> Result<()> {
    let limit = (dim as f64).sqrt() + WIGNER_RADIUS_MARGIN;
    if radius > limit {
        let needed = (radius - WIGNER_RADIUS_MARGIN).powi(2).ceil() as usize;
        return Err(Error::TruncationInadequate {
            alpha_sq: radius * radius,
            dim,
            required_dim: needed,
        });
    }
    Ok(())
}

/// Wigner function on a grid via the Laguerre-polynomial recursion over
/// Fock matrix elements.
pub fn wigner(rho: &DensityMatrix, spec: &WignerGridSpec) -> Result<WignerGrid> {
    single_mode(rho)?;
    spec.validate()?;
    check_radius(rho.dim(), spec.max_radius())?;
    let xs = spec.xs();
    let ps = spec.ps();
    let points: Vec<Complex64> = ps
        .iter()
        .flat_map(|&p| xs.iter().map(move |&x| Complex64::new(x, p)))
        .collect();
    let w = wigner_points(rho.data(), &points);
    let values = DMatrix::from_fn(xs.len(), ps.len(), |i, j| w[j * xs.len() + i]);
    Ok(WignerGrid { x: xs, p: ps, values })
}

/// Wigner function at a single phase-space point.
pub fn wigner_at(rho: &DensityMatrix, beta: Complex64) -> Result<f64> {
    single_mode(rho)?;
    check_radius(rho.dim(), beta.norm())?;
    Ok(wigner_points(rho.data(), &[beta])[0])
}

/// `W(beta) = (2/pi) sum_{m,n} rho_{mn} W_{nm}(beta)`, with the Laguerre
/// kernels generated row by row: `W_{0,n} = (2 beta)^n e^{-2|beta|^2} / sqrt(n!)`,
/// `W_{m,m} = (2 beta* W_{m-1,m} - sqrt(m) W_{m-1,m-1}) / sqrt(m)` and
/// `W_{m,n} = (2 beta W_{m,n-1} - sqrt(m) W_{m-1,n}) / sqrt(n)` for `n > m`.
fn wigner_points(rho: &CMatrix, points: &[Complex64]) -> Vec<f64> {
    let dim = rho.nrows();
    let npts = points.len();
    let two_b: Vec<Complex64> = points.iter().map(|b| b * 2.0).collect();
    let mut w: Vec<Vec<Complex64>> = vec![vec![ZERO; npts]; dim];
    let mut acc = vec![0.0; npts];
    for (k, b) in points.iter().enumerate() {
        w[0][k] = Complex64::from((-2.0 * b.norm_sqr()).exp());
        acc[k] = (rho[(0, 0)] * w[0][k]).re;
    }
    for n in 1..dim {
        let s = 1.0 / (n as f64).sqrt();
        let (head, tail) = w.split_at_mut(n);
        for k in 0..npts {
            tail[0][k] = two_b[k] * head[n - 1][k] * s;
            acc[k] += 2.0 * (rho[(0, n)] * tail[0][k]).re;
        }
    }
    let mut temp = vec![ZERO; npts];
    for m in 1..dim {
        let sm = (m as f64).sqrt();
        temp.copy_from_slice(&w[m]);
        {
            let (head, tail) = w.split_at_mut(m);
            for k in 0..npts {
                tail[0][k] = (two_b[k].conj() * temp[k] - head[m - 1][k] * sm) / sm;
                acc[k] += (rho[(m, m)] * tail[0][k]).re;
            }
        }
        for n in m + 1..dim {
            let sn = 1.0 / (n as f64).sqrt();
            let (head, tail) = w.split_at_mut(n);
            for k in 0..npts {
                let next = (two_b[k] * head[n - 1][k] - temp[k] * sm) * sn;
                temp[k] = tail[0][k];
                tail[0][k] = next;
                acc[k] += 2.0 * (rho[(m, n)] * next).re;
            }
        }
    }
    acc.into_iter().map(|v| v * 2.0 / std::f64::consts::PI).collect()
}

/// Wigner function as a displaced-parity expectation
/// `(2/pi) Tr[rho D(beta) P D(beta)^dagger]`, with the displacement built
/// on `dim + extra` levels and projected back. Returns the complex value so
/// that the imaginary residue can be inspected.
pub fn wigner_displaced_parity(rho: &DensityMatrix, beta: Complex64, extra: usize) -> Result<Complex64> {
    single_mode(rho)?;
    let k = rho.dim();
    let big = k + extra;
    let d = displacement(-beta, big)?;
    // M = D(-beta) restricted to columns < k: (M rho M^dagger)_{jj} summed with parity.
    let m = d.data().columns(0, k).into_owned();
    let t = &m * rho.data() * m.adjoint();
    let mut s = ZERO;
    for j in 0..big {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        s += t[(j, j)] * sign;
    }
    Ok(s * (2.0 / std::f64::consts::PI))
}
