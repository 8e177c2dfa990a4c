use catpump::analysis::{
    fidelity, wigner, wigner_at, wigner_displaced_parity, CatSearch, CatSearchSpec, WignerGridSpec,
};
use catpump::dynamics::{
    evolve_adiabatic, lindblad_rhs, lossy_cycle, recommended_dt, unitary_cycle, AdiabaticParams, CycleConfig,
    LindbladChannel,
};
use catpump::fock::{
    annihilation, cat_state, coherent_state, creation, parity, partial_trace, tensor, CMatrix, DensityMatrix,
    Operator,
};
use catpump::meanfield::{amplitude_rhs, fixed_points, MeanFieldParams};
use catpump::tunable_loss::{effective_loss_shift, LossChannelParams};
use catpump::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(100)
}

/// `G G^dagger / tr` from `2 n^2` reals; with `even_only` the odd rows of `G`
/// are cleared so the state has even photon-number parity.
fn density_from(raw: &[f64], n: usize, even_only: bool) -> DensityMatrix {
    let g = CMatrix::from_fn(n, n, |i, j| {
        if even_only && i % 2 == 1 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(raw[2 * (i * n + j)], raw[2 * (i * n + j) + 1])
        }
    });
    let mut m = &g * g.adjoint();
    // keeps the all-zero draw normalisable
    for i in (0..n).step_by(if even_only { 2 } else { 1 }) {
        m[(i, i)] += Complex64::new(1e-3, 0.0);
    }
    let tr = m.trace();
    DensityMatrix::new(m / tr, vec![n]).unwrap()
}

fn raw(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 2 * n * n)
}

/// Photon support restricted to the lowest `support` levels of `n`.
fn low_density(raw: &[f64], n: usize, support: usize, even_only: bool) -> DensityMatrix {
    let small = density_from(raw, support, even_only);
    let mut m = CMatrix::zeros(n, n);
    m.view_mut((0, 0), (support, support)).copy_from(small.data());
    DensityMatrix::new(m, vec![n]).unwrap()
}

fn check_physical(rho: &DensityMatrix, trace_tol: f64) {
    assert!((rho.trace().re - 1.0).abs() < trace_tol, "trace {}", rho.trace());
    assert!(rho.hermiticity_error() < 1e-8, "hermiticity {}", rho.hermiticity_error());
    assert!(rho.min_eigenvalue() > -1e-6, "min eigenvalue {}", rho.min_eigenvalue());
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn partial_trace_keeps_trace_and_positivity(r1 in raw(4), r2 in raw(3)) {
        let a = density_from(&r1, 4, false);
        let b = density_from(&r2, 3, false);
        let joint = tensor(&a, &b);
        prop_assert_eq!(joint.dims(), &[4, 3][..]);
        let ra = partial_trace(&joint, 0).unwrap();
        let rb = partial_trace(&joint, 1).unwrap();
        prop_assert!((ra.data() - a.data()).norm() < 1e-12);
        prop_assert!((rb.data() - b.data()).norm() < 1e-12);
        check_physical(&ra, 1e-12);
    }

    #[test]
    fn coherent_and_cat_states_are_normalised(re in -1.5..1.5f64, im in -1.5..1.5f64) {
        let alpha = Complex64::new(re, im);
        let c = coherent_state(alpha, 40).unwrap();
        prop_assert!((c.data().norm() - 1.0).abs() < 1e-10);
        let cat = cat_state(alpha, 40).unwrap().to_density();
        prop_assert!((cat.trace().re - 1.0).abs() < 1e-12);
        prop_assert!((cat.signal_parity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_commutator_is_identity_below_top(n in 3usize..20) {
        let a = annihilation(n).unwrap();
        let ad = creation(n).unwrap();
        let c = a.commutator(&ad).unwrap();
        for i in 0..n - 1 {
            prop_assert!((c.data()[(i, i)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        prop_assert!((c.data()[(n - 1, n - 1)] + Complex64::new((n - 1) as f64, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn lindblad_rhs_is_traceless_and_hermitian(r in raw(6), h in raw(6), c1 in raw(6), rate in 0.0..3.0f64) {
        let rho = density_from(&r, 6, false);
        let hm = CMatrix::from_fn(6, 6, |i, j| Complex64::new(h[2 * (i * 6 + j)], h[2 * (i * 6 + j) + 1]));
        let herm = Operator::new((&hm + hm.adjoint()) * Complex64::new(0.5, 0.0), vec![6]).unwrap();
        let op = Operator::new(CMatrix::from_fn(6, 6, |i, j| Complex64::new(c1[2 * (i * 6 + j)], c1[2 * (i * 6 + j) + 1])), vec![6]).unwrap();
        let ch = vec![LindbladChannel::new(rate, op).unwrap(), LindbladChannel::new(0.5, annihilation(6).unwrap()).unwrap()];
        let out = lindblad_rhs(&rho, &herm, &ch).unwrap();
        prop_assert!(out.trace().norm() < 1e-10);
        prop_assert!((&out - out.adjoint()).norm() < 1e-10);
    }

    #[test]
    fn unitary_cycle_is_physical_and_keeps_parity(r in raw(6), inv in 1.8..6.0f64, ph in 0.0..(2.0 * PI)) {
        let rho = low_density(&r, 16, 6, true);
        let cfg = CycleConfig::new(1.0 / inv, Complex64::from_polar(2.0 / inv, ph)).unwrap();
        let out = unitary_cycle(&rho, &cfg, 12).unwrap();
        check_physical(&out, 1e-7);
        prop_assert!((out.signal_parity() - rho.signal_parity()).abs() < 1e-7);
    }

    #[test]
    fn adiabatic_evolution_is_physical_and_keeps_parity(r in raw(4), s_re in -0.3..0.3f64, s_im in -0.3..0.3f64, gd in 0.01..0.3f64) {
        let rho = low_density(&r, 14, 4, true);
        let p = AdiabaticParams::new(Complex64::new(s_re, s_im), gd).unwrap();
        let dt = recommended_dt(&p, 14).unwrap();
        let out = evolve_adiabatic(&rho, &p, 1.0, dt).unwrap();
        check_physical(&out, 1e-7);
        prop_assert!((out.signal_parity() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn lossy_cycle_is_physical(r in raw(4), gs in 0.0..0.3f64, gp in 0.0..0.3f64) {
        let rho = low_density(&r, 10, 4, false);
        let cfg = CycleConfig::new(0.5, Complex64::new(0.0, -1.0)).unwrap().with_losses(gs, gp).unwrap();
        let out = lossy_cycle(&rho, &cfg, 9).unwrap();
        check_physical(&out, 1e-7);
    }

    #[test]
    fn wigner_is_bounded_and_real(r in raw(5), bx in -3.0..3.0f64, by in -3.0..3.0f64) {
        let rho = low_density(&r, 12, 5, false);
        let beta = Complex64::new(bx, by);
        let w = wigner_at(&rho, beta).unwrap();
        prop_assert!(w.abs() <= 2.0 / PI + 1e-6);
        let reference = wigner_displaced_parity(&rho, beta, 80).unwrap();
        prop_assert!(reference.im.abs() < 1e-10);
        prop_assert!((reference.re - w).abs() < 1e-9);
    }

    #[test]
    fn wigner_origin_is_parity(r in raw(5)) {
        let rho = low_density(&r, 10, 5, false);
        let p = rho.expect(&parity(10).unwrap()).unwrap().re;
        prop_assert!((wigner_at(&rho, Complex64::new(0.0, 0.0)).unwrap() - 2.0 / PI * p).abs() < 1e-12);
    }

    #[test]
    fn wigner_grid_normalised(r in raw(4)) {
        let rho = low_density(&r, 10, 4, false);
        let g = wigner(&rho, &WignerGridSpec::square(5.0, 51)).unwrap();
        prop_assert!((g.integral() - 1.0).abs() < 1e-3);
        prop_assert!(g.max() <= 2.0 / PI + 1e-6 && g.min() >= -2.0 / PI - 1e-6);
    }

    #[test]
    fn fidelity_symmetric_and_linear(r1 in raw(5), r2 in raw(5), mag in 0.3..2.5f64, ph in 0.0..(2.0 * PI)) {
        let a = low_density(&r1, 30, 5, false);
        let b = low_density(&r2, 30, 5, false);
        let alpha = Complex64::from_polar(mag, ph);
        let fa = fidelity(&a, alpha).unwrap();
        prop_assert!((fa - fidelity(&a, -alpha).unwrap()).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-10).contains(&fa));
        let fb = fidelity(&b, alpha).unwrap();
        let mix = a.mix(&b, 0.5).unwrap();
        prop_assert!((fidelity(&mix, alpha).unwrap() - 0.5 * (fa + fb)).abs() < 1e-12);
    }

    #[test]
    fn search_grid_refinement_never_lowers_fmax(r in raw(6), k in 3usize..12, np in 2usize..6) {
        let rho = low_density(&r, 24, 6, true);
        let coarse = CatSearchSpec { alpha_min: 1.2, alpha_max: 2.4, n_mag: k, n_phase: np, refine: false };
        let fine = CatSearchSpec { n_mag: 2 * k - 1, n_phase: 2 * np, ..coarse };
        let fc = CatSearch::new(24, coarse).unwrap().search(&rho).unwrap();
        let ff = CatSearch::new(24, fine).unwrap().search(&rho).unwrap();
        prop_assert!(ff.f_max >= fc.f_max - 1e-12);
        prop_assert!(ff.alpha_opt.norm() >= 1.2 - 1e-12);
    }

    #[test]
    fn effective_loss_identities(g in 0.0..1e8f64, gamma in 1e3..1e8f64, delta in -1e9..1e9f64) {
        let p = LossChannelParams::new(g, gamma, delta).unwrap();
        let (k, s) = effective_loss_shift(&p);
        let den = delta * delta + gamma * gamma;
        prop_assert!((k * den - g * g * gamma).abs() <= 1e-12 * (g * g * gamma).max(1e-300));
        let (k2, s2) = effective_loss_shift(&LossChannelParams::new(g, gamma, -delta).unwrap());
        prop_assert_eq!(k, k2);
        prop_assert_eq!(s, -s2);
    }

    #[test]
    fn meanfield_fixed_points_are_stationary(g in 0.1..3.0f64, omega in 0.0..5.0f64, gamma in 0.5..50.0f64) {
        let p = MeanFieldParams::new(g, omega, gamma).unwrap();
        for z in fixed_points(&p).unwrap() {
            prop_assert!(amplitude_rhs(z, &p).norm() < 1e-12 * (1.0 + omega * omega));
        }
    }
}

#[test]
fn cat_wigner_has_negative_fringes() {
    let rho = cat_state(Complex64::new(0.0, 2.0), 40).unwrap().to_density();
    let w0 = wigner_at(&rho, Complex64::new(0.0, 0.0)).unwrap();
    assert!((w0 - 2.0 / PI).abs() < 1e-10);
    // fringes run along the real axis between the lobes on the imaginary axis
    let fringe = wigner_at(&rho, Complex64::new(PI / 8.0, 0.0)).unwrap();
    assert!(fringe < -0.4);
}
