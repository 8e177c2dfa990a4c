//! One synchronous-pump cycle with small coupling phase against the
//! effective two-photon generator.

use catpump::dynamics::{lindblad_rhs, second_order_generator, unitary_cycle, CycleConfig};
use catpump::fock::{CMatrix, DensityMatrix};
use catpump::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_even_state(rng: &mut ChaCha8Rng, dim: usize, support: usize) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, dim, |i, _| {
        if i % 2 == 0 && i < support {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m / tr, vec![dim]).unwrap()
}

fn relative_error(rho: &DensityMatrix, phi: f64, alpha_p: Complex64, correction: bool) -> f64 {
    let dim = rho.dim();
    let cfg = CycleConfig::new(phi, alpha_p).unwrap();
    let next = unitary_cycle(rho, &cfg, 8).unwrap();
    let fd = (next.data() - rho.data()) / Complex64::from(cfg.cycle_period());
    let (h, ch) = second_order_generator(&cfg, dim, correction).unwrap();
    let g = lindblad_rhs(rho, &h, &ch).unwrap();
    (fd - &g).norm() / g.norm()
}

#[test]
fn first_order_agreement_and_convergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let rho = random_even_state(&mut rng, 20, 7);
        let e1 = relative_error(&rho, 0.01, Complex64::new(0.0, -0.02), false);
        let e2 = relative_error(&rho, 0.005, Complex64::new(0.0, -0.01), false);
        assert!(e1 <= 1e-2, "error {e1}");
        assert!(e1 / e2 >= 1.8, "ratio {}", e1 / e2);
    }
}

/// With the pump amplitude held finite the pump-noise channel is the
/// leading dropped term, so restoring it must reduce the error.
#[test]
fn pump_correction_matters_at_finite_amplitude() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let rho = random_even_state(&mut rng, 20, 7);
        let alpha_p = Complex64::new(0.0, -0.5);
        let plain = relative_error(&rho, 0.01, alpha_p, false);
        let corrected = relative_error(&rho, 0.01, alpha_p, true);
        assert!(corrected < 0.5 * plain, "plain {plain} corrected {corrected}");
    }
}
