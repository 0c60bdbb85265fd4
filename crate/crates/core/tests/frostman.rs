use std::f64::consts::PI;
use std::sync::Arc;

use logpot::equilibrium::{solve_equilibrium, DiscreteMeasure, MassModel, SolverOptions};
use logpot::frostman::*;
use logpot::geometry::{sample_curve, CurveSpec, GraphFunction, SampledCurve};
use logpot::kernels::{assemble_kernel_matrix, DiagonalPolicy, KernelKind};
use logpot::Error;
use proptest::prelude::*;

fn equilibrium(spec: &CurveSpec, n: usize) -> DiscreteMeasure {
    let curve = Arc::new(sample_curve(spec, n).unwrap());
    let k = assemble_kernel_matrix(&curve, &KernelKind::Log, DiagonalPolicy::CellAverage).unwrap();
    let eq = solve_equilibrium(&k, 1.0, 1e-10, &SolverOptions::default()).unwrap();
    DiscreteMeasure::new(curve, eq.weights, MassModel::Cells).unwrap()
}

fn dyadic(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

fn circle_curve(n: usize) -> Arc<SampledCurve> {
    Arc::new(sample_curve(&CurveSpec::circle([0.0, 0.0], 1.0), n).unwrap())
}

#[test]
fn arcsine_exponent_is_one_half() {
    let mu = equilibrium(&CurveSpec::segment(-1.0, 1.0), 800);
    let prof = ball_mass_profile(&mu, &dyadic(3, 9)).unwrap();
    let fit = frostman_exponent(&prof, 0..prof.len()).unwrap();
    assert!((fit.exponent - 0.5).abs() < 0.05, "{fit:?}");
}

#[test]
fn circle_exponent_is_one() {
    let curve = circle_curve(512);
    let mu = DiscreteMeasure::uniform_length(curve.clone(), 1.0).unwrap();
    let radii = default_radii(&curve).unwrap();
    assert_eq!(radii.len(), 12);
    let prof = ball_mass_profile(&mu, &radii).unwrap();
    let fit = frostman_exponent(&prof, 0..prof.len()).unwrap();
    assert!((fit.exponent - 1.0).abs() < 0.05, "{fit:?}");
}

#[test]
fn circle_ball_is_arc_fraction() {
    // The chord ball of radius r covers the arc of angle 4 asin(r/2).
    let n = 400;
    let curve = circle_curve(n);
    let mu = DiscreteMeasure::uniform_length(curve, 1.0).unwrap();
    let r = 2f64.sqrt();
    let prof = ball_mass_profile(&mu, &[r]).unwrap();
    let expect = 4.0 * (r / 2.0).asin() / (2.0 * PI);
    assert!((prof.masses[0] - expect).abs() <= 1.0 / n as f64, "{} vs {expect}", prof.masses[0]);
}

#[test]
fn point_mass_profile_is_flat() {
    let curve = Arc::new(sample_curve(&CurveSpec::segment(-1.0, 1.0), 41).unwrap());
    let mu = DiscreteMeasure::point_mass(curve, 20, 2.5).unwrap();
    let prof = ball_mass_profile(&mu, &dyadic(1, 8)).unwrap();
    assert!(prof.masses.iter().all(|m| *m == 2.5));
    let fit = frostman_exponent(&prof, 0..prof.len()).unwrap();
    assert!(fit.exponent.abs() < 1e-9);
}

#[test]
fn profile_rejects_bad_radii() {
    let curve = circle_curve(64);
    let mu = DiscreteMeasure::uniform_length(curve, 1.0).unwrap();
    assert!(ball_mass_profile(&mu, &[]).is_err());
    assert!(ball_mass_profile(&mu, &[0.5, 1.0]).is_err());
    assert!(ball_mass_profile(&mu, &[3.0]).is_err());
    assert!(ball_mass_profile(&mu, &[0.5, 0.0]).is_err());
}

#[test]
fn degenerate_fits() {
    let prof = BallMassProfile {
        radii: vec![0.5, 0.4, 0.3, 0.2],
        masses: vec![0.5, 0.4, 0.3, 0.2],
    };
    assert!(matches!(frostman_exponent(&prof, 0..4), Err(Error::DegenerateFit(_))));
    assert!(matches!(frostman_exponent(&prof, 0..3), Err(Error::DegenerateFit(_))));
    let wide = BallMassProfile {
        radii: vec![1.0, 0.1, 0.01, 0.001],
        masses: vec![1.0, 0.1, 0.01, 0.001],
    };
    let fit = frostman_exponent(&wide, 0..4).unwrap();
    assert!((fit.exponent - 1.0).abs() < 1e-12 && fit.residual < 1e-12);
}

#[test]
fn profile_csv() {
    let prof = BallMassProfile {
        radii: vec![0.5, 0.25],
        masses: vec![0.75, 0.5],
    };
    assert_eq!(prof.to_csv(), "r,mass\n5e-1,7.5e-1\n2.5e-1,5e-1\n");
}

#[test]
fn arcsine_constant_is_refinement_stable() {
    let mu = equilibrium(&CurveSpec::segment(-1.0, 1.0), 800);
    let rep = frostman_inequality_check(&mu, 0.4, 4.0, &dyadic(3, 8)).unwrap();
    assert!(!rep.divergent, "{:?}", rep.norms_by_level);
    assert!(rep.constant.is_finite() && rep.constant > 0.0);
    assert!(rep.refinement_change < 0.1, "{:?}", rep.constant_by_level);
    let first = (rep.constant_by_level[1] - rep.constant_by_level[0]).abs() / rep.constant_by_level[0];
    assert!(first < 0.1, "{:?}", rep.constant_by_level);
    assert!(rep.bounded, "{:?}", rep.ratios);
    assert!(rep.to_csv().starts_with("alpha,p,C,exponent,residual\n4e-1,4e0,"));
}

#[test]
fn point_mass_norm_diverges() {
    let curve = Arc::new(sample_curve(&CurveSpec::segment(-1.0, 1.0), 41).unwrap());
    let mu = DiscreteMeasure::point_mass(curve, 20, 1.0).unwrap();
    // αp > 1 is required, and then |x|^{−αp} is not integrable at the atom.
    for (alpha, p) in [(0.6, 2.0), (0.4, 4.0)] {
        let rep = frostman_inequality_check(&mu, alpha, p, &dyadic(2, 6)).unwrap();
        assert!(rep.divergent, "{:?}", rep.norms_by_level);
        assert!(!rep.bounded);
    }
    assert!(frostman_inequality_check(&mu, 0.5, 2.0, &dyadic(2, 6)).is_err());
}

#[test]
fn sup_norm_is_supported() {
    let mu = equilibrium(&CurveSpec::segment(-1.0, 1.0), 200);
    // The arcsine potential of order 1−α behaves like |1−x|^{1/2−α} at the
    // endpoints, so it is bounded exactly when α ≤ 1/2.
    let rep = frostman_inequality_check(&mu, 0.4, f64::INFINITY, &dyadic(2, 5)).unwrap();
    assert!(rep.norm.is_finite() && !rep.divergent, "{:?}", rep.norms_by_level);
    let rep = frostman_inequality_check(&mu, 0.8, f64::INFINITY, &dyadic(2, 5)).unwrap();
    assert!(rep.divergent, "{:?}", rep.norms_by_level);
}

#[test]
fn vacuous_exponents_are_rejected() {
    let mu = equilibrium(&CurveSpec::segment(-1.0, 1.0), 64);
    assert!(frostman_inequality_check(&mu, 0.4, 2.0, &[0.5]).is_err());
    assert!(frostman_inequality_check(&mu, 1.0, 4.0, &[0.5]).is_err());
    assert!(frostman_inequality_check(&mu, 0.5, 0.5, &[0.5]).is_err());
}

#[test]
fn constant_is_homogeneous_in_mass() {
    let mu = equilibrium(&CurveSpec::segment(-1.0, 1.0), 200);
    let radii = dyadic(2, 6);
    let base = frostman_inequality_check(&mu, 0.4, 4.0, &radii).unwrap().constant;
    for m in [0.5, 2.0, 10.0] {
        let c = frostman_inequality_check(&mu.scaled(m), 0.4, 4.0, &radii).unwrap().constant;
        assert!((c - base).abs() < 1e-12 * base, "m={m}: {c} vs {base}");
    }
}

#[test]
fn smoothing_does_not_lower_exponent() {
    let mu = equilibrium(&CurveSpec::segment(-1.0, 1.0), 400);
    let radii = default_radii(&mu.curve).unwrap();
    let before = frostman_exponent(&ball_mass_profile(&mu, &radii).unwrap(), 0..12).unwrap();
    let w = &mu.weights;
    let n = w.len();
    let smoothed: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            w[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let nu = DiscreteMeasure::new(mu.curve.clone(), smoothed, MassModel::Cells).unwrap();
    let after = frostman_exponent(&ball_mass_profile(&nu, &radii).unwrap(), 0..12).unwrap();
    assert!(after.exponent >= before.exponent - before.residual, "{before:?} → {after:?}");
}

#[test]
fn smooth_graph_has_near_linear_growth() {
    let spec = CurveSpec::graph(GraphFunction::sine(0.05, 1.0), -1.0, 1.0);
    let mu = equilibrium(&spec, 600);
    let radii = default_radii(&mu.curve).unwrap();
    let opts = ProfileOptions {
        center_window: Some((0.25, 0.75)),
    };
    let prof = ball_mass_profile_with(&mu, &radii, &opts).unwrap();
    let fit = frostman_exponent(&prof, 0..prof.len()).unwrap();
    assert!(fit.exponent >= 0.9, "{fit:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn profile_invariants(seed in prop::collection::vec(0.0f64..1.0, 64), scale in 0.1f64..10.0) {
        let curve = circle_curve(64);
        let mut w = seed;
        w[0] += 1e-3;
        let mu = DiscreteMeasure::new(curve.clone(), w.iter().map(|x| x * scale).collect(), MassModel::Cells).unwrap();
        let prof = ball_mass_profile(&mu, &default_radii(&curve).unwrap()).unwrap();
        for pair in prof.masses.windows(2) {
            prop_assert!(pair[1] <= pair[0]);
        }
        for m in &prof.masses {
            prop_assert!(*m > 0.0 && *m <= mu.mass * (1.0 + 1e-12));
        }
    }
}
