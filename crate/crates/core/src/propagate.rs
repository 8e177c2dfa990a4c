//! Propagation kernels shared by the cycle maps and the adiabatic solver.
//!
//! Two independent routes exist for every joint evolution:
//!
//! * plain fixed-step RK4 on the (sparse) Liouvillian or Schrödinger
//!   equation in the Kronecker basis;
//! * an excitation-block route. `b^dagger a^2 + b (a^dagger)^2` conserves
//!   `N = n + 2k` and single-photon damping only lowers `N`, so the
//!   Hamiltonian plus the no-jump damping is block diagonal in `N`. Blocks
//!   are exponentiated exactly and the jump part is integrated with an
//!   integrating-factor (Lawson) RK4.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::fock::{CMatrix, CVector};
use crate::sparse::Csr;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `|h| * bound` above which classical RK4 is treated as unstable.
pub(crate) const RK4_STABILITY: f64 = 2.5;

/// Sparse Lindblad generator `-i[H, .] + sum_k r_k (A rho A^dagger - {A^dagger A, rho}/2)`,
/// stored as an effective non-Hermitian Hamiltonian plus jump operators.
pub(crate) struct SparseLiouvillian {
    h_eff: Csr,
    jumps: Vec<(f64, Csr)>,
    bound: f64,
}

impl std::fmt::Debug for SparseLiouvillian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLiouvillian").field("dim", &self.dim()).finish()
    }
}

impl SparseLiouvillian {
    pub fn new(h: &CMatrix, channels: &[(f64, CMatrix)]) -> Self {
        let mut h_eff = h.clone();
        let mut bound = 0.0;
        let mut jumps = Vec::with_capacity(channels.len());
        for (rate, op) in channels {
            if *rate == 0.0 {
                continue;
            }
            h_eff -= (op.adjoint() * op) * Complex64::new(0.0, 0.5 * rate);
            let csr = Csr::from_dense(op);
            bound += rate * csr.norm_bound().powi(2);
            jumps.push((*rate, csr));
        }
        let h_eff = Csr::from_dense(&h_eff);
        bound += 2.0 * h_eff.norm_bound();
        Self { h_eff, jumps, bound }
    }

    pub fn dim(&self) -> usize {
        self.h_eff.dim()
    }

    /// Upper bound on the spectral radius of the generator.
    pub fn stability_bound(&self) -> f64 {
        self.bound
    }

    /// `out = L(rho)`; `tmp` is scratch of the same shape.
    pub fn apply(&self, rho: &CMatrix, out: &mut CMatrix, tmp: &mut CMatrix) {
        out.fill(ZERO);
        self.h_eff.left_mul_acc(rho, -I, out);
        self.h_eff.right_mul_adjoint_acc(rho, I, out);
        for (rate, op) in &self.jumps {
            op.sandwich_acc(rho, Complex64::from(*rate), tmp, out);
        }
    }
}

/// Fixed-step RK4 for `d rho/dt = L rho` over `[0, t_final]` with `ceil(t_final/dt)`
/// equal steps. `observer` sees `(step, t, rho)` after every step.
/// `dst += coef * src` for equally shaped matrices.
fn add_scaled(dst: &mut CMatrix, coef: Complex64, src: &CMatrix) {
    for (d, s) in dst.as_mut_slice().iter_mut().zip(src.as_slice()) {
        *d += coef * s;
    }
}

pub(crate) fn rk4_evolve(
    l: &SparseLiouvillian,
    rho0: CMatrix,
    t_final: f64,
    dt: f64,
    mut observer: impl FnMut(usize, f64, &CMatrix) -> Result<()>,
) -> Result<CMatrix> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", dt, "step must be positive and finite"));
    }
    if t_final < 0.0 || !t_final.is_finite() {
        return Err(Error::param("t_final", t_final, "final time must be nonnegative"));
    }
    let steps = (t_final / dt - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(rho0);
    }
    let h = t_final / steps as f64;
    let bound = l.stability_bound();
    if h * bound > RK4_STABILITY {
        return Err(Error::Integrator(format!(
            "step {h:.3e} exceeds the RK4 stability limit {:.3e} (generator bound {bound:.3e})",
            RK4_STABILITY / bound
        )));
    }
    let n = l.dim();
    let mut rho = rho0;
    let mut k1 = CMatrix::zeros(n, n);
    let mut k2 = CMatrix::zeros(n, n);
    let mut k3 = CMatrix::zeros(n, n);
    let mut k4 = CMatrix::zeros(n, n);
    let mut stage = CMatrix::zeros(n, n);
    let mut tmp = CMatrix::zeros(n, n);
    let hc = Complex64::from(h);
    for step in 1..=steps {
        l.apply(&rho, &mut k1, &mut tmp);
        stage.copy_from(&rho);
        add_scaled(&mut stage, hc * 0.5, &k1);
        l.apply(&stage, &mut k2, &mut tmp);
        stage.copy_from(&rho);
        add_scaled(&mut stage, hc * 0.5, &k2);
        l.apply(&stage, &mut k3, &mut tmp);
        stage.copy_from(&rho);
        add_scaled(&mut stage, hc, &k3);
        l.apply(&stage, &mut k4, &mut tmp);
        add_scaled(&mut rho, hc / 6.0, &k1);
        add_scaled(&mut rho, hc / 3.0, &k2);
        add_scaled(&mut rho, hc / 3.0, &k3);
        add_scaled(&mut rho, hc / 6.0, &k4);
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Integrator(format!(
                "non-finite state at step {step} of {steps} (h = {h:.3e})"
            )));
        }
        observer(step, step as f64 * h, &rho)?;
    }
    Ok(rho)
}

/// Joint (signal, pump) basis regrouped into blocks of constant `N = n + 2k`.
#[derive(Clone, Debug)]
pub(crate) struct BlockBasis {
    pub ds: usize,
    pub dp: usize,
    /// Block position -> (n, k).
    pub states: Vec<(usize, usize)>,
    /// Kronecker index `n * dp + k` -> block position.
    pub position: Vec<usize>,
    /// (start, len) of each nonempty block, ascending in `N`.
    pub blocks: Vec<(usize, usize)>,
}

impl BlockBasis {
    pub fn new(ds: usize, dp: usize) -> Self {
        let mut states = Vec::with_capacity(ds * dp);
        let mut position = vec![0; ds * dp];
        let mut blocks = Vec::new();
        let n_max = (ds - 1) + 2 * (dp - 1);
        for total in 0..=n_max {
            let start = states.len();
            for k in 0..dp {
                if 2 * k > total {
                    break;
                }
                let n = total - 2 * k;
                if n < ds {
                    position[n * dp + k] = states.len();
                    states.push((n, k));
                }
            }
            let len = states.len() - start;
            if len > 0 {
                blocks.push((start, len));
            }
        }
        Self {
            ds,
            dp,
            states,
            position,
            blocks,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Real symmetric interaction Hamiltonian restricted to one block.
    fn hamiltonian_block(&self, start: usize, len: usize) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(len, len);
        for r in 0..len {
            let (n, k) = self.states[start + r];
            // b^dagger a^2 |n, k> = sqrt(n (n-1)) sqrt(k+1) |n-2, k+1>
            if n >= 2 && k + 1 < self.dp && r + 1 < len {
                debug_assert_eq!(self.states[start + r + 1], (n - 2, k + 1));
                let v = ((n * (n - 1)) as f64).sqrt() * ((k + 1) as f64).sqrt();
                h[(r + 1, r)] = v;
                h[(r, r + 1)] = v;
            }
        }
        h
    }

    /// `exp(-i H t)` per block, from the symmetric eigendecomposition.
    pub fn unitary_blocks(&self, t: f64) -> Vec<CMatrix> {
        self.blocks
            .iter()
            .map(|&(start, len)| {
                let h = self.hamiltonian_block(start, len);
                let eig = SymmetricEigen::new(h);
                let q = eig.eigenvectors.map(Complex64::from);
                let phases = CVector::from_iterator(
                    len,
                    eig.eigenvalues.iter().map(|&l| (-I * l * t).exp()),
                );
                let scaled = CMatrix::from_fn(len, len, |i, j| q[(i, j)] * phases[j]);
                scaled * q.transpose()
            })
            .collect()
    }

    /// `exp(-i H_eff t)` per block with `H_eff = H - (i/2)(gs a^dagger a + gp b^dagger b)`,
    /// via Padé scaling and squaring.
    pub fn damped_blocks(&self, t: f64, gamma_signal: f64, gamma_pump: f64) -> Vec<CMatrix> {
        self.blocks
            .iter()
            .map(|&(start, len)| {
                let h = self.hamiltonian_block(start, len);
                let mut gen = h.map(|v| Complex64::new(0.0, -v * t));
                for r in 0..len {
                    let (n, k) = self.states[start + r];
                    gen[(r, r)] -= Complex64::from(0.5 * t * (gamma_signal * n as f64 + gamma_pump * k as f64));
                }
                gen.exp()
            })
            .collect()
    }

    /// Kronecker-ordered matrix -> block-ordered matrix.
    pub fn to_blocked(&self, x: &CMatrix) -> CMatrix {
        let d = self.dim();
        let dp = self.dp;
        CMatrix::from_fn(d, d, |p, q| {
            let (n1, k1) = self.states[p];
            let (n2, k2) = self.states[q];
            x[(n1 * dp + k1, n2 * dp + k2)]
        })
    }

    pub fn from_blocked(&self, x: &CMatrix) -> CMatrix {
        let d = self.dim();
        let dp = self.dp;
        let mut out = CMatrix::zeros(d, d);
        for q in 0..d {
            let (n2, k2) = self.states[q];
            for p in 0..d {
                let (n1, k1) = self.states[p];
                out[(n1 * dp + k1, n2 * dp + k2)] = x[(p, q)];
            }
        }
        out
    }

    /// Block-ordered `rho (x) |pump><pump|`.
    pub fn product_state(&self, rho: &CMatrix, pump: &CVector) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |p, q| {
            let (n1, k1) = self.states[p];
            let (n2, k2) = self.states[q];
            rho[(n1, n2)] * pump[k1] * pump[k2].conj()
        })
    }

    /// Signal reduced matrix of a block-ordered joint matrix.
    pub fn trace_pump(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.ds, self.ds);
        // group positions by pump index
        let mut by_k: Vec<Vec<usize>> = vec![Vec::new(); self.dp];
        for (p, &(_, k)) in self.states.iter().enumerate() {
            by_k[k].push(p);
        }
        for group in &by_k {
            for &q in group {
                let n2 = self.states[q].0;
                for &p in group {
                    let n1 = self.states[p].0;
                    out[(n1, n2)] += x[(p, q)];
                }
            }
        }
        out
    }
}

/// `sum_j K_j rho K_j^dagger`.
pub(crate) fn apply_kraus(kraus: &[CMatrix], rho: &CMatrix) -> CMatrix {
    let n = rho.nrows();
    let mut out = CMatrix::zeros(n, n);
    let mut tmp = CMatrix::zeros(n, n);
    for k in kraus {
        tmp.gemm(ONE, k, rho, ZERO);
        out.gemm(ONE, &tmp, &k.adjoint(), ONE);
    }
    out
}

/// Kraus operators `K_j = <j|_pump U |pump>` of the lossless cycle, from
/// per-block unitaries.
pub(crate) fn kraus_from_blocks(basis: &BlockBasis, unitaries: &[CMatrix], pump: &CVector) -> Vec<CMatrix> {
    let (ds, dp) = (basis.ds, basis.dp);
    let mut block_of = vec![0usize; basis.dim()];
    for (b, &(start, len)) in basis.blocks.iter().enumerate() {
        for p in start..start + len {
            block_of[p] = b;
        }
    }
    let mut kraus = vec![CMatrix::zeros(ds, ds); dp];
    for m in 0..ds {
        for k in 0..dp {
            let c = pump[k];
            if c == ZERO {
                continue;
            }
            let p = basis.position[m * dp + k];
            let b = block_of[p];
            let (start, len) = basis.blocks[b];
            let u = &unitaries[b];
            let col = p - start;
            for r in 0..len {
                let (n_out, j) = basis.states[start + r];
                kraus[j][(n_out, m)] += u[(r, col)] * c;
            }
        }
    }
    kraus
}

/// Same Kraus operators by RK4 integration of `|m> (x) |pump>` under the
/// Kronecker-basis Hamiltonian `h` for time `t` with at least `min_steps` steps.
pub(crate) fn kraus_by_rk4(
    h: &CMatrix,
    ds: usize,
    dp: usize,
    pump: &CVector,
    t: f64,
    min_steps: usize,
) -> Vec<CMatrix> {
    let csr = Csr::from_dense(h);
    // Keep |h| * ||H|| well inside the stability region so the truncated
    // high-excitation blocks stay accurate as well.
    let steps = min_steps.max((t * csr.norm_bound() / 0.25).ceil() as usize).max(1);
    let dt = t / steps as f64;
    let d = ds * dp;
    let mut kraus = vec![CMatrix::zeros(ds, ds); dp];
    let mut k1 = CVector::zeros(d);
    let mut k2 = CVector::zeros(d);
    let mut k3 = CVector::zeros(d);
    let mut k4 = CVector::zeros(d);
    let coef = Complex64::new(0.0, -1.0);
    for m in 0..ds {
        let mut psi = CVector::zeros(d);
        for k in 0..dp {
            psi[m * dp + k] = pump[k];
        }
        for _ in 0..steps {
            k1.fill(ZERO);
            csr.mul_vec_acc(&psi, coef, &mut k1);
            let s: DVector<Complex64> = &psi + &k1 * Complex64::from(0.5 * dt);
            k2.fill(ZERO);
            csr.mul_vec_acc(&s, coef, &mut k2);
            let s: DVector<Complex64> = &psi + &k2 * Complex64::from(0.5 * dt);
            k3.fill(ZERO);
            csr.mul_vec_acc(&s, coef, &mut k3);
            let s: DVector<Complex64> = &psi + &k3 * Complex64::from(dt);
            k4.fill(ZERO);
            csr.mul_vec_acc(&s, coef, &mut k4);
            psi += (&k1 + &k2 * Complex64::from(2.0) + &k3 * Complex64::from(2.0) + &k4)
                * Complex64::from(dt / 6.0);
        }
        for n in 0..ds {
            for j in 0..dp {
                kraus[j][(n, m)] = psi[n * dp + j];
            }
        }
    }
    kraus
}

/// Integrating-factor RK4 for the joint Lindblad evolution with Hamiltonian
/// `b^dagger a^2 + h.c.` and single-photon damping on either mode.
#[derive(Clone, Debug)]
pub(crate) struct JointPropagator {
    basis: BlockBasis,
    half_step: Vec<CMatrix>,
    steps: usize,
    h: f64,
    gamma_signal: f64,
    gamma_pump: f64,
    signal_src: Vec<Option<(usize, f64)>>,
    pump_src: Vec<Option<(usize, f64)>>,
}

impl JointPropagator {
    pub fn new(ds: usize, dp: usize, t: f64, gamma_signal: f64, gamma_pump: f64, max_step: f64) -> Self {
        let basis = BlockBasis::new(ds, dp);
        let lossless = gamma_signal == 0.0 && gamma_pump == 0.0;
        let steps = if lossless {
            1
        } else {
            ((t / max_step) - 1e-9).ceil().max(1.0) as usize
        };
        let h = t / steps as f64;
        let half_step = if lossless {
            basis.unitary_blocks(0.5 * h)
        } else {
            basis.damped_blocks(0.5 * h, gamma_signal, gamma_pump)
        };
        let mut signal_src = vec![None; basis.dim()];
        let mut pump_src = vec![None; basis.dim()];
        for (p, &(n, k)) in basis.states.iter().enumerate() {
            if n + 1 < ds {
                signal_src[p] = Some((basis.position[(n + 1) * dp + k], ((n + 1) as f64).sqrt()));
            }
            if k + 1 < dp {
                pump_src[p] = Some((basis.position[n * dp + k + 1], ((k + 1) as f64).sqrt()));
            }
        }
        Self {
            basis,
            half_step,
            steps,
            h,
            gamma_signal,
            gamma_pump,
            signal_src,
            pump_src,
        }
    }

    pub fn basis(&self) -> &BlockBasis {
        &self.basis
    }

    /// `V X V^dagger` for the block-diagonal half-step propagator `V`.
    fn sandwich(&self, x: &CMatrix, tmp: &mut CMatrix, out: &mut CMatrix) {
        let d = self.basis.dim();
        let xs = x.as_slice();
        let ts = tmp.as_mut_slice();
        // tmp = V X, column by column
        for c in 0..d {
            let col = &xs[c * d..(c + 1) * d];
            let tcol = &mut ts[c * d..(c + 1) * d];
            for (v, &(start, len)) in self.half_step.iter().zip(&self.basis.blocks) {
                let seg = &col[start..start + len];
                for (k, &xk) in seg.iter().enumerate() {
                    let vk = &v.as_slice()[k * len..(k + 1) * len];
                    let tseg = &mut tcol[start..start + len];
                    if k == 0 {
                        for (t, &vi) in tseg.iter_mut().zip(vk) {
                            *t = vi * xk;
                        }
                    } else {
                        for (t, &vi) in tseg.iter_mut().zip(vk) {
                            *t += vi * xk;
                        }
                    }
                }
            }
        }
        // out = tmp V^dagger: out[:, s + j] = sum_k tmp[:, s + k] conj(V[j, k])
        let ts = tmp.as_slice();
        let os = out.as_mut_slice();
        for (v, &(start, len)) in self.half_step.iter().zip(&self.basis.blocks) {
            for j in 0..len {
                let ocol = &mut os[(start + j) * d..(start + j + 1) * d];
                for k in 0..len {
                    let w = v[(j, k)].conj();
                    let tcol = &ts[(start + k) * d..(start + k + 1) * d];
                    if k == 0 {
                        for (o, &t) in ocol.iter_mut().zip(tcol) {
                            *o = t * w;
                        }
                    } else {
                        for (o, &t) in ocol.iter_mut().zip(tcol) {
                            *o += t * w;
                        }
                    }
                }
            }
        }
    }

    /// Jump part `gs a X a^dagger + gp b X b^dagger`.
    fn jumps(&self, x: &CMatrix, out: &mut CMatrix) {
        let d = self.basis.dim();
        for q in 0..d {
            for p in 0..d {
                let mut acc = ZERO;
                if self.gamma_signal != 0.0 {
                    if let (Some((sp, cp)), Some((sq, cq))) = (self.signal_src[p], self.signal_src[q]) {
                        acc += x[(sp, sq)] * (self.gamma_signal * cp * cq);
                    }
                }
                if self.gamma_pump != 0.0 {
                    if let (Some((sp, cp)), Some((sq, cq))) = (self.pump_src[p], self.pump_src[q]) {
                        acc += x[(sp, sq)] * (self.gamma_pump * cp * cq);
                    }
                }
                out[(p, q)] = acc;
            }
        }
    }

    /// Evolves a block-ordered joint matrix over the full interval.
    pub fn evolve_blocked(&self, x0: &CMatrix) -> CMatrix {
        let d = self.basis.dim();
        let mut x = x0.clone();
        let mut tmp = CMatrix::zeros(d, d);
        if self.gamma_signal == 0.0 && self.gamma_pump == 0.0 {
            let mut y = CMatrix::zeros(d, d);
            self.sandwich(&x, &mut tmp, &mut y);
            self.sandwich(&y, &mut tmp, &mut x);
            return x;
        }
        let h = Complex64::from(self.h);
        let mut k1 = CMatrix::zeros(d, d);
        let mut k2 = CMatrix::zeros(d, d);
        let mut k3 = CMatrix::zeros(d, d);
        let mut k4 = CMatrix::zeros(d, d);
        let mut vx = CMatrix::zeros(d, d);
        let mut vk1 = CMatrix::zeros(d, d);
        let mut stage = CMatrix::zeros(d, d);
        let mut vstage = CMatrix::zeros(d, d);
        for _ in 0..self.steps {
            // Lawson RK4 with V = exp(h/2 L0):
            // k1 = J(x); k2 = J(Vx + h/2 V k1); k3 = J(Vx + h/2 k2);
            // k4 = J(V(Vx + h k3)); x' = V(Vx + h/6 V k1 + h/3 (k2 + k3)) + h/6 k4
            self.jumps(&x, &mut k1);
            self.sandwich(&x, &mut tmp, &mut vx);
            self.sandwich(&k1, &mut tmp, &mut vk1);
            stage.copy_from(&vx);
            add_scaled(&mut stage, h * 0.5, &vk1);
            self.jumps(&stage, &mut k2);
            stage.copy_from(&vx);
            add_scaled(&mut stage, h * 0.5, &k2);
            self.jumps(&stage, &mut k3);
            stage.copy_from(&vx);
            add_scaled(&mut stage, h, &k3);
            self.sandwich(&stage, &mut tmp, &mut vstage);
            self.jumps(&vstage, &mut k4);
            stage.copy_from(&vx);
            add_scaled(&mut stage, h / 6.0, &vk1);
            add_scaled(&mut stage, h / 3.0, &k2);
            add_scaled(&mut stage, h / 3.0, &k3);
            self.sandwich(&stage, &mut tmp, &mut x);
            add_scaled(&mut x, h / 6.0, &k4);
        }
        x
    }
}

/// Amplitude-damping channel with transmissivity `eta` on `mode` of a
/// Kronecker-ordered matrix with dims `dims` (one or two modes).
pub(crate) fn amplitude_damping(x: &CMatrix, dims: &[usize], mode: usize, eta: f64) -> CMatrix {
    let d_mode = dims[mode];
    let inner: usize = dims[mode + 1..].iter().product();
    let outer: usize = dims[..mode].iter().product();
    // e[l][n] = <n-l| E_l |n> = sqrt(C(n, l) eta^(n-l) (1-eta)^l)
    let mut e = vec![vec![0.0; d_mode]; d_mode];
    for n in 0..d_mode {
        for l in 0..=n {
            let ln_binom = ln_factorial(n) - ln_factorial(l) - ln_factorial(n - l);
            let mut ln = ln_binom;
            if n > l {
                ln += (n - l) as f64 * eta.ln();
            }
            if l > 0 {
                ln += l as f64 * (1.0 - eta).ln();
            }
            e[l][n] = (0.5 * ln).exp();
        }
    }
    let idx = |o: usize, n: usize, i: usize| (o * d_mode + n) * inner + i;
    let dim = x.nrows();
    let mut out = CMatrix::zeros(dim, dim);
    for o2 in 0..outer {
        for i2 in 0..inner {
            for n2 in 0..d_mode {
                let col = idx(o2, n2, i2);
                for o1 in 0..outer {
                    for i1 in 0..inner {
                        for n1 in 0..d_mode {
                            let v = x[(idx(o1, n1, i1), col)];
                            if v == ZERO {
                                continue;
                            }
                            for l in 0..=n1.min(n2) {
                                let w = e[l][n1] * e[l][n2];
                                if w != 0.0 {
                                    out[(idx(o1, n1 - l, i1), idx(o2, n2 - l, i2))] += v * w;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}
