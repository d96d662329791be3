use proptest::prelude::*;

use semistab::admissibility::{admissibility_constant_estimate, carleson_sum_general, phi_sums};
use semistab::comparison::{ComparisonFunction, FunctionClass};
use semistab::iss::{bilinear_envelope, verify_envelope, EnvelopeRun};
use semistab::scenarios::{random_input, Scenario};
use semistab::trajectory::{time_grid, ControlSystem, SemilinearOptions};
use semistab::{DiagonalGenerator, InputOperator, SpectralVector, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn eigenvalues(max: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-3.0f64..0.7, -40.0f64..40.0), 1..max)
        .prop_map(|v| v.into_iter().map(|(a, y)| c(-(10f64.powf(a)), y)).collect())
}

fn coefficients(n: usize) -> impl Strategy<Value = SpectralVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_map(|v| SpectralVector::new(v.into_iter().map(|(a, b)| c(a, b)).collect()))
}

fn system(max: usize) -> impl Strategy<Value = (DiagonalGenerator, SpectralVector, SpectralVector)> {
    eigenvalues(max).prop_flat_map(|l| {
        let n = l.len();
        (Just(DiagonalGenerator::from_list(l).unwrap()), coefficients(n), coefficients(n))
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semigroup_is_a_contraction_on_coordinates((gen, x, _) in system(32), t in 0.0f64..50.0) {
        let y = gen.semigroup_apply(t, &x).unwrap();
        prop_assert!(y.norm() <= x.norm() * (1.0 + 1e-15));
    }

    #[test]
    fn decay_norm_is_the_sup_over_basis_vectors((gen, _, _) in system(32), t in 0.0f64..20.0) {
        let d = gen.operator_decay_norm(1.0, t).unwrap();
        let brute = (0..gen.len())
            .map(|k| {
                let e = SpectralVector::unit(gen.len(), k);
                let y = gen.fractional_power_apply(-1.0, &e).unwrap();
                gen.semigroup_apply(t, &y).unwrap().norm()
            })
            .fold(0.0, f64::max);
        prop_assert!(close(d.value, brute, 1e-12));
        prop_assert!(d.lower <= d.value && d.value <= d.upper);
    }

    #[test]
    fn carleson_quantities_scale_quadratically((gen, b, _) in system(24), s in 0.1f64..10.0) {
        let sb = b.scale(c(s, 0.0));
        let (p, ps) = (phi_sums(&gen, &b).unwrap(), phi_sums(&gen, &sb).unwrap());
        prop_assert!(close(ps.sum, s * s * p.sum, 1e-12));
        let (g, gs) = (carleson_sum_general(&gen, &b).unwrap(), carleson_sum_general(&gen, &sb).unwrap());
        prop_assert!(close(gs.value, s * s * g.value, 1e-12));
        prop_assert!(p.sum <= g.value * (1.0 + 1e-12));
    }

    #[test]
    fn sandwich_holds_when_separated((gen, b, _) in system(24)) {
        let p = phi_sums(&gen, &b).unwrap();
        if let (Some(d), Some(upper)) = (p.gap, p.sandwich_upper) {
            prop_assume!(d > 0.0);
            let g = carleson_sum_general(&gen, &b).unwrap().value;
            prop_assert!(g <= upper * (1.0 + 1e-12));
        }
    }

    #[test]
    fn theta_dominates_identity(r in 0.0f64..50.0) {
        let env = bilinear_envelope(1.0, 0.0, 0.0, ComparisonFunction::identity(), 1.0).unwrap();
        if let semistab::iss::Envelope::Iiss { theta, .. } = env {
            prop_assert!(theta.eval(r) >= r);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn estimate_bounds_scale_linearly((gen, b, _) in system(8), s in 0.2f64..5.0) {
        let op = InputOperator::rank_one(b.clone());
        let scaled = InputOperator::rank_one(b.scale(c(s, 0.0)));
        let e = admissibility_constant_estimate(&gen, &op, 20.0, 2, 3).unwrap();
        let es = admissibility_constant_estimate(&gen, &scaled, 20.0, 2, 3).unwrap();
        prop_assert!(close(es.upper, s * e.upper, 1e-9));
        prop_assert!(close(es.lower, s * e.lower, 1e-9));
        prop_assert!(e.lower <= e.upper * (1.0 + 1e-12));
    }

    #[test]
    fn semi_iss_pass_implies_ugs_pass(seed in 0u64..1000) {
        let s = Scenario::builtin("powerlaw").unwrap().spec.with_truncation(128).unwrap().build().unwrap();
        let env = s.envelope().unwrap().unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let u = random_input(&mut rng, 1, 30.0, 1.0).unwrap();
        let x0 = SpectralVector::unit(128, (seed % 128) as usize).scale(c(0.5, 0.0));
        let sys: &ControlSystem = &s.system;
        let grid = time_grid(30.0, 120, Some(&u)).unwrap();
        let tr = sys.simulate(&u, &x0, &grid, &SemilinearOptions::default()).unwrap();
        let run = EnvelopeRun::new("r", sys, tr, u, &x0).unwrap();
        let iss = verify_envelope(&env, std::slice::from_ref(&run)).unwrap();
        prop_assume!(iss.pass);
        let ugs = verify_envelope(&env.to_ugs().unwrap(), &[run]).unwrap();
        prop_assert!(ugs.pass);
    }
}

#[test]
fn comparison_classes_validate() {
    let th = ComparisonFunction::bilinear_theta();
    assert!(th.validate(FunctionClass::KInfinity).is_ok());
    assert!(ComparisonFunction::Saturating { a: 1.0 }.validate(FunctionClass::KInfinity).is_err());
}
