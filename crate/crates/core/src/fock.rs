//! Truncated Fock-space operators and states for one or two bosonic modes.
//!
//! Matrices are dense. Joint states use the Kronecker convention with the
//! signal mode first: basis index `n * pump_dim + k` for `|n>_signal |k>_pump`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Hermiticity tolerance accepted by [`DensityMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Trace tolerance accepted by [`DensityMatrix::new`].
pub const TRACE_TOL: f64 = 1e-8;
/// Lowest eigenvalue accepted by [`DensityMatrix::new`].
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Norm tolerance accepted by [`StateVector::new`].
pub const NORM_TOL: f64 = 1e-10;

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidDimension { dim: 0 });
    }
    for &d in dims {
        if d < 2 {
            return Err(Error::InvalidDimension { dim: d });
        }
    }
    Ok(dims.iter().product())
}

/// Smallest truncation for which a coherent amplitude passes the guard
/// `|alpha|^2 <= dim / 4`.
pub fn required_dim(alpha: Complex64) -> usize {
    ((4.0 * alpha.norm_sqr()).ceil() as usize).max(2)
}

pub(crate) fn check_truncation(alpha: Complex64, dim: usize) -> Result<()> {
    let alpha_sq = alpha.norm_sqr();
    if 4.0 * alpha_sq > dim as f64 {
        return Err(Error::TruncationInadequate {
            alpha_sq,
            dim,
            required_dim: required_dim(alpha),
        });
    }
    Ok(())
}

/// A dense operator on a (tensor product of) truncated Fock space(s).
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    data: CMatrix,
    dims: Vec<usize>,
}

impl Operator {
    pub fn new(data: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let edge = check_dims(&dims)?;
        if data.nrows() != edge || data.ncols() != edge {
            return Err(Error::DimensionMismatch {
                expected: vec![edge, edge],
                found: vec![data.nrows(), data.ncols()],
            });
        }
        Ok(Self { data, dims })
    }

    pub(crate) fn from_raw(data: CMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(data.nrows(), dims.iter().product::<usize>());
        Self { data, dims }
    }

    pub fn identity(dims: &[usize]) -> Result<Self> {
        let edge = check_dims(dims)?;
        Ok(Self::from_raw(CMatrix::identity(edge, edge), dims.to_vec()))
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_data(self) -> CMatrix {
        self.data
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Edge length of the matrix.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_raw(self.data.adjoint(), self.dims.clone())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_raw(&self.data * factor, self.dims.clone())
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    /// Matrix product; fails when the operands act on different spaces.
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self::from_raw(&self.data * &other.data, self.dims.clone()))
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self::from_raw(&self.data + &other.data, self.dims.clone()))
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self::from_raw(
            &self.data * &other.data - &other.data * &self.data,
            self.dims.clone(),
        ))
    }

    /// Matrix exponential (Padé scaling and squaring).
    pub fn exp(&self) -> Self {
        Self::from_raw(self.data.exp(), self.dims.clone())
    }

    pub(crate) fn same_space(&self, other: &Operator) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.clone(),
                found: other.dims.clone(),
            });
        }
        Ok(())
    }
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    data: CVector,
    dims: Vec<usize>,
}

impl StateVector {
    pub fn new(data: CVector, dims: Vec<usize>) -> Result<Self> {
        let edge = check_dims(&dims)?;
        if data.len() != edge {
            return Err(Error::DimensionMismatch {
                expected: vec![edge],
                found: vec![data.len()],
            });
        }
        let norm = data.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { data, dims })
    }

    /// Normalizes `data`; fails on a zero vector.
    pub fn normalized(data: CVector, dims: Vec<usize>) -> Result<Self> {
        let norm = data.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(data / Complex64::from(norm), dims)
    }

    pub fn data(&self) -> &CVector {
        &self.data
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.clone(),
                found: other.dims.clone(),
            });
        }
        Ok(self.data.dotc(&other.data))
    }

    /// `<self|op|self>`.
    pub fn expect(&self, op: &Operator) -> Result<Complex64> {
        if self.dims != op.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.clone(),
                found: op.dims.clone(),
            });
        }
        Ok(self.data.dotc(&(op.data() * &self.data)))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_raw(&self.data * self.data.adjoint(), self.dims.clone())
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    data: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity at the module tolerances.
    pub fn new(data: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let edge = check_dims(&dims)?;
        if data.nrows() != edge || data.ncols() != edge {
            return Err(Error::DimensionMismatch {
                expected: vec![edge, edge],
                found: vec![data.nrows(), data.ncols()],
            });
        }
        let rho = Self { data, dims };
        rho.validate(HERMITIAN_TOL, TRACE_TOL, POSITIVITY_TOL)?;
        Ok(rho)
    }

    pub(crate) fn from_raw(data: CMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(data.nrows(), dims.iter().product::<usize>());
        Self { data, dims }
    }

    pub fn vacuum(dims: &[usize]) -> Result<Self> {
        let edge = check_dims(dims)?;
        let mut data = CMatrix::zeros(edge, edge);
        data[(0, 0)] = ONE;
        Ok(Self::from_raw(data, dims.to_vec()))
    }

    pub fn maximally_mixed(dims: &[usize]) -> Result<Self> {
        let edge = check_dims(dims)?;
        let data = CMatrix::identity(edge, edge) / Complex64::from(edge as f64);
        Ok(Self::from_raw(data, dims.to_vec()))
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_data(self) -> CMatrix {
        self.data
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum |rho_ij|^2 for Hermitian rho.
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Tr(rho op)`.
    pub fn expect(&self, op: &Operator) -> Result<Complex64> {
        if self.dims != op.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.clone(),
                found: op.dims.clone(),
            });
        }
        let n = self.dim();
        let mut acc = ZERO;
        for j in 0..n {
            for i in 0..n {
                acc += self.data[(i, j)] * op.data[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Expectation of the signal parity `(-1)^{a^dagger a}` (the first mode).
    pub fn signal_parity(&self) -> f64 {
        let inner: usize = self.dims[1..].iter().product();
        (0..self.dim())
            .map(|i| {
                let n = i / inner;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign * self.data[(i, i)].re
            })
            .sum()
    }

    /// Largest `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.data + self.data.adjoint()) * Complex64::from(0.5);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `||rho - sigma||_1 / 2`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.clone(),
                found: other.dims.clone(),
            });
        }
        let diff = &self.data - &other.data;
        let herm = (&diff + diff.adjoint()) * Complex64::from(0.5);
        Ok(0.5 * herm.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>())
    }

    pub fn validate(&self, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<()> {
        if self.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NotADensityMatrix("non-finite entries".into()));
        }
        let herm = self.hermiticity_error();
        if herm > herm_tol {
            return Err(Error::NotADensityMatrix(format!(
                "hermiticity error {herm:.3e} > {herm_tol:.1e}"
            )));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > trace_tol {
            return Err(Error::NotADensityMatrix(format!(
                "trace {tr} differs from 1 by more than {trace_tol:.1e}"
            )));
        }
        let min_ev = self.min_eigenvalue();
        if min_ev < -pos_tol {
            return Err(Error::NotADensityMatrix(format!(
                "minimum eigenvalue {min_ev:.3e} < -{pos_tol:.1e}"
            )));
        }
        Ok(())
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.clone(),
                found: other.dims.clone(),
            });
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::param("w", w, "mixing weight must lie in [0, 1]"));
        }
        let data = &self.data * Complex64::from(w) + &other.data * Complex64::from(1.0 - w);
        Ok(Self::from_raw(data, self.dims.clone()))
    }
}

/// Amplitude and normalization correction of an even cat state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatParams {
    pub alpha: Complex64,
    epsilon: f64,
}

impl CatParams {
    pub fn new(alpha: Complex64) -> Self {
        Self {
            alpha,
            epsilon: 2.0 * (-2.0 * alpha.norm_sqr()).exp(),
        }
    }

    /// `2 exp(-2|alpha|^2)`, which makes `1/sqrt(2 + epsilon)` the exact
    /// normalization of `|alpha> + |-alpha>`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Probability of the vacuum in the untruncated cat state.
    pub fn vacuum_overlap(&self) -> f64 {
        let a2 = self.alpha.norm_sqr();
        4.0 * (-a2).exp() / (2.0 + self.epsilon)
    }
}

/// Single-mode annihilation operator: `<n-1|a|n> = sqrt(n)`.
pub fn annihilation(dim: usize) -> Result<Operator> {
    check_dims(&[dim])?;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = Complex64::from((n as f64).sqrt());
    }
    Ok(Operator::from_raw(m, vec![dim]))
}

pub fn creation(dim: usize) -> Result<Operator> {
    Ok(annihilation(dim)?.adjoint())
}

/// `a^dagger a`.
pub fn number(dim: usize) -> Result<Operator> {
    check_dims(&[dim])?;
    let diag = CVector::from_fn(dim, |n, _| Complex64::from(n as f64));
    Ok(Operator::from_raw(CMatrix::from_diagonal(&diag), vec![dim]))
}

/// Photon-number parity `(-1)^{a^dagger a}`.
pub fn parity(dim: usize) -> Result<Operator> {
    check_dims(&[dim])?;
    let diag = CVector::from_fn(dim, |n, _| if n % 2 == 0 { ONE } else { -ONE });
    Ok(Operator::from_raw(CMatrix::from_diagonal(&diag), vec![dim]))
}

pub fn fock_state(n: usize, dim: usize) -> Result<StateVector> {
    check_dims(&[dim])?;
    if n >= dim {
        return Err(Error::InvalidDimension { dim });
    }
    let mut v = CVector::zeros(dim);
    v[n] = ONE;
    Ok(StateVector {
        data: v,
        dims: vec![dim],
    })
}

/// Unnormalized coefficients `alpha^n / sqrt(n!)` for `n < len`.
fn poisson_amplitudes(alpha: Complex64, len: usize) -> CVector {
    let mut v = CVector::zeros(len);
    let mut c = ONE;
    for n in 0..len {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        v[n] = c;
    }
    v
}

/// Coherent state `|alpha>`, renormalized after truncation.
pub fn coherent_state(alpha: Complex64, dim: usize) -> Result<StateVector> {
    check_dims(&[dim])?;
    check_truncation(alpha, dim)?;
    StateVector::normalized(poisson_amplitudes(alpha, dim), vec![dim])
}

/// Even cat state `(|alpha> + |-alpha>) / sqrt(2 + epsilon)`.
///
/// Only even Fock components are populated; the truncated vector is
/// renormalized.
pub fn cat_state(alpha: Complex64, dim: usize) -> Result<StateVector> {
    check_dims(&[dim])?;
    check_truncation(alpha, dim)?;
    let mut v = poisson_amplitudes(alpha, dim);
    for n in (1..dim).step_by(2) {
        v[n] = ZERO;
    }
    StateVector::normalized(v, vec![dim])
}

/// Displacement operator `D(alpha) = exp(alpha a^dagger - alpha* a)` with the
/// matrix elements of the untruncated operator, restricted to `dim` levels.
///
/// Columns follow `D|n+1> = (a^dagger - alpha*) D|n> / sqrt(n+1)` started from
/// the coherent column `D|0>`, evaluated on `2 * dim` rows so that the top
/// `dim` rows are exact.
pub fn displacement(alpha: Complex64, dim: usize) -> Result<Operator> {
    check_dims(&[dim])?;
    let rows = 2 * dim + 8;
    let mut col = poisson_amplitudes(alpha, rows) * Complex64::from((-0.5 * alpha.norm_sqr()).exp());
    let mut m = CMatrix::zeros(dim, dim);
    let ac = alpha.conj();
    for n in 0..dim {
        for r in 0..dim {
            m[(r, n)] = col[r];
        }
        if n + 1 < dim {
            let scale = 1.0 / ((n + 1) as f64).sqrt();
            let mut next = CVector::zeros(rows);
            for r in 0..rows - 1 {
                let up = if r > 0 { col[r - 1] * (r as f64).sqrt() } else { ZERO };
                next[r] = (up - ac * col[r]) * scale;
            }
            col = next;
        }
    }
    Ok(Operator::from_raw(m, vec![dim]))
}

/// Kronecker product with dimension lists concatenated (left factor first).
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Operator::from_raw(self.data.kronecker(&other.data), dims)
    }
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        StateVector {
            data: self.data.kronecker(&other.data),
            dims,
        }
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix::from_raw(self.data.kronecker(&other.data), dims)
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Reduced state of mode `keep` of a two-mode density matrix.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    if rho.dims.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: vec![0, 0],
            found: rho.dims.clone(),
        });
    }
    if keep > 1 {
        return Err(Error::ModeIndex { index: keep, modes: 2 });
    }
    let (d0, d1) = (rho.dims[0], rho.dims[1]);
    let data = &rho.data;
    let out = if keep == 0 {
        CMatrix::from_fn(d0, d0, |i, j| {
            (0..d1).map(|k| data[(i * d1 + k, j * d1 + k)]).sum()
        })
    } else {
        CMatrix::from_fn(d1, d1, |i, j| {
            (0..d0).map(|n| data[(n * d1 + i, n * d1 + j)]).sum()
        })
    };
    Ok(DensityMatrix::from_raw(out, vec![rho.dims[keep]]))
}

/// `op` acting on one factor of a (signal, pump) space.
pub fn embed(op: &Operator, mode: usize, dims: &[usize]) -> Result<Operator> {
    if dims.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: vec![0, 0],
            found: dims.to_vec(),
        });
    }
    if mode > 1 {
        return Err(Error::ModeIndex { index: mode, modes: 2 });
    }
    if op.dims != [dims[mode]] {
        return Err(Error::DimensionMismatch {
            expected: vec![dims[mode]],
            found: op.dims.clone(),
        });
    }
    let other = Operator::identity(&[dims[1 - mode]])?;
    Ok(if mode == 0 {
        op.tensor(&other)
    } else {
        other.tensor(op)
    })
}

/// Nonlinear interaction `b^dagger a^2 + b (a^dagger)^2` on (signal, pump),
/// in units of `g_nl`.
pub fn interaction_hamiltonian(signal_dim: usize, pump_dim: usize) -> Result<Operator> {
    let dims = [signal_dim, pump_dim];
    let a = embed(&annihilation(signal_dim)?, 0, &dims)?;
    let b = embed(&annihilation(pump_dim)?, 1, &dims)?;
    let a2 = a.compose(&a)?;
    let term = b.adjoint().compose(&a2)?;
    term.add(&term.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn annihilation_dim_two() {
        let a = annihilation(2).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert_eq!(a.data(), &expected);
    }

    #[test]
    fn rejects_small_dims() {
        assert_eq!(annihilation(1), Err(Error::InvalidDimension { dim: 1 }));
        assert!(Operator::identity(&[3, 1]).is_err());
    }

    #[test]
    fn number_operator_diagonal() {
        let a = annihilation(7).unwrap();
        let n = a.adjoint().compose(&a).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let want = if i == j { i as f64 } else { 0.0 };
                assert!((n.data()[(i, j)] - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn truncated_commutator() {
        let dim = 6;
        let a = annihilation(dim).unwrap();
        let comm = a.commutator(&a.adjoint()).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                let want = match (i == j, i == dim - 1) {
                    (true, true) => -((dim - 1) as f64),
                    (true, false) => 1.0,
                    _ => 0.0,
                };
                assert!((comm.data()[(i, j)] - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn coherent_vacuum_and_mean_photon_number() {
        let v = coherent_state(ZERO, 5).unwrap();
        assert_eq!(v.data(), fock_state(0, 5).unwrap().data());

        let alpha = c(1.3, -0.7);
        let dim = (4.0 * alpha.norm_sqr()).ceil() as usize + 20;
        let psi = coherent_state(alpha, dim).unwrap();
        let n = psi.expect(&number(dim).unwrap()).unwrap();
        assert!((n.re - alpha.norm_sqr()).abs() < 1e-6);
    }

    #[test]
    fn coherent_overlap_is_gaussian() {
        let (a, b) = (c(0.8, 0.4), c(-0.5, 1.1));
        let dim = 40;
        let pa = coherent_state(a, dim).unwrap();
        let pb = coherent_state(b, dim).unwrap();
        let ov = pa.inner(&pb).unwrap().norm_sqr();
        assert!((ov - (-(a - b).norm_sqr()).exp()).abs() < 1e-6);
    }

    #[test]
    fn truncation_guard_names_required_dim() {
        let err = coherent_state(c(3.0, 0.0), 20).unwrap_err();
        assert_eq!(
            err,
            Error::TruncationInadequate {
                alpha_sq: 9.0,
                dim: 20,
                required_dim: 36
            }
        );
        assert!(cat_state(c(0.0, 3.0), 35).is_err());
        assert!(cat_state(c(0.0, 3.0), 36).is_ok());
    }

    #[test]
    fn cat_state_examples() {
        assert_eq!(
            cat_state(ZERO, 8).unwrap().data(),
            fock_state(0, 8).unwrap().data()
        );
        let cat = cat_state(c(0.0, 2.0), 40).unwrap();
        for n in (1..40).step_by(2) {
            assert_eq!(cat.data()[n], ZERO);
        }
        let cat2 = cat_state(c(2.0, 0.0), 40).unwrap();
        let p0 = cat2.data()[0].norm_sqr();
        assert!((p0 - 0.03664).abs() < 1e-4);
        assert!((p0 - CatParams::new(c(2.0, 0.0)).vacuum_overlap()).abs() < 1e-12);
        let par = cat2.expect(&parity(40).unwrap()).unwrap();
        assert!((par.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cat_epsilon_is_exact_normalization() {
        let p = CatParams::new(c(0.3, 0.9));
        let a2 = p.alpha.norm_sqr();
        assert_eq!(p.epsilon(), 2.0 * (-2.0 * a2).exp());
        // <alpha|alpha> + <-alpha|-alpha> + 2 Re<alpha|-alpha> = 2 + 2 e^{-2|alpha|^2}
        let dim = 30;
        let plus = coherent_state(p.alpha, dim).unwrap();
        let minus = coherent_state(-p.alpha, dim).unwrap();
        let overlap = plus.inner(&minus).unwrap().re;
        assert!((2.0 + 2.0 * overlap - (2.0 + p.epsilon())).abs() < 1e-12);
    }

    #[test]
    fn tensor_examples() {
        let i3 = Operator::identity(&[3]).unwrap();
        let i4 = Operator::identity(&[4]).unwrap();
        let i12 = i3.tensor(&i4);
        assert_eq!(i12.dims(), &[3, 4]);
        assert_eq!(i12.data(), &CMatrix::identity(12, 12));

        let dims = [4, 3];
        let a = embed(&annihilation(4).unwrap(), 0, &dims).unwrap();
        let b = embed(&annihilation(3).unwrap(), 1, &dims).unwrap();
        assert!(a.commutator(&b).unwrap().data().norm() < 1e-15);

        let x = number(4).unwrap().add(&creation(4).unwrap()).unwrap();
        let y = parity(3).unwrap().scale(c(0.5, 2.0));
        let xy = x.tensor(&y);
        assert!((xy.trace() - x.trace() * y.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_pair() {
        let mut v = CVector::zeros(4);
        v[0] = ONE;
        v[3] = ONE;
        let psi = StateVector::normalized(v, vec![2, 2]).unwrap();
        let red = partial_trace(&psi.to_density(), 0).unwrap();
        let want = CMatrix::from_diagonal(&CVector::from_element(2, c(0.5, 0.0)));
        assert!((red.data() - want).norm() < 1e-12);
        assert_eq!(
            partial_trace(&psi.to_density(), 2),
            Err(Error::ModeIndex { index: 2, modes: 2 })
        );
    }

    #[test]
    fn displacement_of_vacuum_is_coherent() {
        let alpha = c(0.6, -0.9);
        let d = displacement(alpha, 25).unwrap();
        let col = d.data().column(0).into_owned();
        let coh = coherent_state(alpha, 25).unwrap();
        // Untruncated components carry exp(-|alpha|^2/2); the tail beyond 25 is negligible.
        assert!((col - coh.data()).norm() < 1e-10);
    }

    #[test]
    fn displacement_matches_exponential_on_enlarged_space() {
        let alpha = c(-0.7, 0.5);
        let dim = 12;
        let big = 60;
        let a = annihilation(big).unwrap();
        let gen = a.adjoint().scale(alpha).add(&a.scale(-alpha.conj())).unwrap();
        let d_big = gen.exp();
        let d = displacement(alpha, dim).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                assert!((d.data()[(i, j)] - d_big.data()[(i, j)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = CMatrix::identity(3, 3) / Complex64::from(3.0);
        assert!(DensityMatrix::new(m.clone(), vec![3]).is_ok());
        m[(0, 1)] = c(0.0, 0.1);
        assert!(DensityMatrix::new(m.clone(), vec![3]).is_err());
        let neg = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.1, 0.0), c(-0.1, 0.0)]));
        assert!(DensityMatrix::new(neg, vec![2]).is_err());
    }

    #[test]
    fn interaction_hamiltonian_is_hermitian_and_parity_symmetric() {
        let h = interaction_hamiltonian(6, 4).unwrap();
        assert!((h.data() - h.data().adjoint()).norm() < 1e-14);
        let p = embed(&parity(6).unwrap(), 0, &[6, 4]).unwrap();
        assert!(h.commutator(&p).unwrap().data().norm() < 1e-13);
    }
}
