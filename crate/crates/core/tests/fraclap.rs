use std::f64::consts::PI;
use std::sync::Arc;

use logpot::equilibrium::{solve_equilibrium, DiscreteMeasure, MassModel, SolverOptions};
use logpot::fraclap::*;
use logpot::geometry::{sample_curve, CurveSpec, GraphFunction};
use logpot::kernels::{assemble_kernel_matrix, DiagonalPolicy, KernelKind};
use proptest::prelude::*;

// Γ(1/4) and Γ(3/4) to 16 digits.
const GAMMA_QUARTER: f64 = 3.625_609_908_221_908;
const GAMMA_THREE_QUARTERS: f64 = 1.225_416_702_465_178;

fn unit() -> GaussianSpec {
    GaussianSpec::new(1.0, 0.0, 1.0).unwrap()
}

#[test]
fn constants_at_one_half() {
    assert_eq!(FracConstants::new(0.5).c, 1.0);
    for beta in [0.1, 0.5, 1.3] {
        assert_eq!(FracConstants::new(beta).b1, 0.0);
    }
    // σ(1) = π/Γ(1).
    assert!((sigma(1.0) - PI).abs() < 1e-13);
}

#[test]
fn oracle_identity_multiplier() {
    let f = GaussianSpec::new(1.7, 0.3, 0.8).unwrap();
    for x in [-1.0, 0.0, 0.45, 2.0] {
        let v = fourier_multiplier_oracle(&f, 0.0, x).unwrap();
        assert!((v - f.value(x)).abs() < 1e-10, "{x}: {v} vs {}", f.value(x));
    }
}

#[test]
fn oracle_second_derivative_identity() {
    // |ξ|² is the symbol of −(2π)^{−2} d²/dx².
    let f = unit();
    for x in [0.0, 0.7] {
        let v = fourier_multiplier_oracle(&f, 2.0, x).unwrap();
        let expect = -f.second_derivative(x) / (4.0 * PI * PI);
        assert!((v - expect).abs() < 1e-8, "{v} vs {expect}");
    }
    assert!((fourier_multiplier_oracle(&f, 2.0, 0.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-8);
}

#[test]
fn oracle_is_linear() {
    let f = GaussianSpec::new(1.0, 0.2, 1.3).unwrap();
    for (beta, x) in [(0.5, 0.0), (1.5, 1.1), (0.25, -2.0)] {
        let a = fourier_multiplier_oracle(&f, beta, x).unwrap();
        let b = fourier_multiplier_oracle(&f.scaled(2.5), beta, x).unwrap();
        assert!((b - 2.5 * a).abs() < 1e-12);
    }
}

#[test]
fn pointwise_matches_oracle() {
    let f = unit();
    for beta in [0.25, 0.5, 0.75, 1.5] {
        for x in [0.0, 1.0, 2.0] {
            let v = frac_laplacian(&f, beta, x).unwrap();
            let o = fourier_multiplier_oracle(&f, beta, x).unwrap();
            assert!((v - o).abs() < 1e-4, "β={beta} x={x}: {v} vs {o}");
        }
    }
}

#[test]
fn pointwise_matches_oracle_off_center() {
    let f = GaussianSpec::new(0.7, 0.5, 0.6).unwrap();
    for beta in [0.3, 1.0, 1.8] {
        for x in [-0.4, 0.5, 1.9] {
            let v = frac_laplacian(&f, beta, x).unwrap();
            let o = fourier_multiplier_oracle(&f, beta, x).unwrap();
            assert!((v - o).abs() < 1e-4, "β={beta} x={x}: {v} vs {o}");
        }
    }
}

#[test]
fn small_beta_approaches_identity() {
    let v = frac_laplacian(&unit(), 1e-3, 0.0).unwrap();
    assert!((v - 1.0).abs() < 5e-3, "{v}");
}

#[test]
fn branches_agree() {
    let f = unit();
    for beta in [0.15, 0.4, 0.6, 0.85] {
        for x in [0.0, 0.8, 3.0] {
            let a = frac_laplacian_with(&f, beta, x, Branch::SecondOrder).unwrap().value;
            let b = frac_laplacian_with(&f, beta, x, Branch::FirstOrder).unwrap().value;
            assert!((a - b).abs() <= 1e-6 * a.abs(), "β={beta} x={x}: {a} vs {b}");
        }
    }
    assert!(frac_laplacian_with(&f, 1.2, 0.0, Branch::FirstOrder).is_err());
}

#[test]
fn parameter_range() {
    let f = unit();
    for beta in [0.0, 2.0, -0.5, f64::NAN] {
        assert!(frac_laplacian(&f, beta, 0.0).is_err());
    }
    assert!(riesz_potential(&GridFunction::sample(|x| x, 0.0, 0.1, 20).unwrap(), 1.0, 0.5).is_err());
    assert!(fourier_multiplier_oracle(&f, -1.0, 0.0).is_err());
    assert!(GaussianSpec::new(1.0, 0.0, 0.0).is_err());
}

#[test]
fn decay_envelope() {
    let f = unit();
    for beta in [0.5, 1.5] {
        let at = |x: f64| frac_laplacian(&f, beta, x).unwrap().abs();
        let c = at(4.0) * 5f64.powf(1.0 + beta);
        for x in [8.0f64, 16.0] {
            let bound = c * (1.0 + x).powf(-1.0 - beta);
            assert!(at(x) <= bound, "β={beta} x={x}: {} > {bound}", at(x));
        }
    }
}

#[test]
fn zero_mean() {
    // Simpson on [−L, L] plus the two-term far-field expansion
    // C'(|x|^{−1−β} + (1+β)(2+β)/2·m₂|x|^{−3−β}), m₂ = ∫y²f = 1/(2π).
    let f = unit();
    let l = 8.0;
    let m = 256;
    let h = 2.0 * l / m as f64;
    for beta in [0.3, 0.5, 0.8] {
        let vals: Vec<f64> = (0..=m).map(|i| frac_laplacian(&f, beta, -l + i as f64 * h).unwrap()).collect();
        let mut body = vals[0] + vals[m];
        for (i, v) in vals.iter().enumerate().take(m).skip(1) {
            body += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        body *= h / 3.0;
        let cp = sigma(-1.0 - beta) / sigma(beta);
        let m2 = 1.0 / (2.0 * PI);
        let tail = cp * (l.powf(-beta) / beta + (1.0 + beta) * (2.0 + beta) / 2.0 * m2 * l.powf(-2.0 - beta) / (2.0 + beta));
        let total = body + 2.0 * tail;
        assert!(total.abs() < 1e-6, "β={beta}: {total}");
    }
}

#[test]
fn riesz_point_mass() {
    let curve = Arc::new(sample_curve(&CurveSpec::segment(-1.0, 1.0), 21).unwrap());
    let mid = 10;
    assert_eq!(curve.point(mid)[0], 0.0);
    let mu = DiscreteMeasure::point_mass(curve, mid, 1.0).unwrap();
    assert!((riesz_potential(&mu, 0.5, 4.0).unwrap() - 0.5).abs() < 1e-15);
    for beta in [0.2, 0.7] {
        let c = riesz_constant(beta);
        for x in [-3.0, 0.25] {
            let v = riesz_potential(&mu, beta, x).unwrap();
            assert!((v - c * x.abs().powf(beta - 1.0)).abs() < 1e-13 * v.abs());
        }
    }
    assert!(riesz_potential(&mu, 0.5, 0.0).is_err());
}

#[test]
fn riesz_of_arcsine_equilibrium() {
    // ∫|y|^{−1/2}/(π√(1−y²)) dy = B(1/4, 1/2)/π.
    let oracle = GAMMA_QUARTER * PI.sqrt() / GAMMA_THREE_QUARTERS / PI;
    let curve = Arc::new(sample_curve(&CurveSpec::segment(-1.0, 1.0), 800).unwrap());
    let k = assemble_kernel_matrix(&curve, &KernelKind::Log, DiagonalPolicy::CellAverage).unwrap();
    let eq = solve_equilibrium(&k, 1.0, 1e-10, &SolverOptions::default()).unwrap();
    let mu = DiscreteMeasure::new(curve, eq.weights, MassModel::Cells).unwrap();
    let v = riesz_potential(&mu, 0.5, 0.0).unwrap();
    assert!((v - oracle).abs() < 1e-3, "{v} vs {oracle}");
}

fn gaussian_grid() -> GridFunction {
    let f = unit();
    GridFunction::sample(|x| f.value(x), -12.0, 1.0 / 64.0, 1537).unwrap()
}

#[test]
fn riesz_matches_extended_oracle() {
    // Δ^{−β/2} is the multiplier |ξ|^{−β}.
    let g = gaussian_grid();
    for beta in [0.25, 0.5, 0.75] {
        for x in [0.0, 0.5, 2.0] {
            let v = riesz_potential(&g, beta, x).unwrap();
            let o = fourier_multiplier_oracle(&unit(), -beta, x).unwrap();
            assert!((v - o).abs() < 1e-4, "β={beta} x={x}: {v} vs {o}");
        }
    }
}

#[test]
fn riesz_inversion() {
    let f = unit();
    let pot = riesz_potential_on_grid(&gaussian_grid(), 0.5).unwrap().with_decay(0.5).unwrap();
    for x in [0.0, 0.5, 1.0, 2.0] {
        let eval = frac_laplacian_with(&pot, 0.5, x, Branch::SecondOrder).unwrap();
        assert!(eval.derivatives_from_differences);
        assert!((eval.value - f.value(x)).abs() < 1e-3, "x={x}: {} vs {}", eval.value, f.value(x));
    }
}

#[test]
fn grid_decay_model_is_checked() {
    let bad = GridFunction::sample(|x| (-x * x).exp(), -8.0, 0.25, 65).unwrap();
    assert!(bad.clone().with_decay(1.0).is_err());
    let good = GridFunction::sample(|x| 1.0 / (1.0 + x * x), -8.0, 0.25, 65).unwrap();
    assert!(good.with_decay(2.0).is_ok());
}

#[test]
fn grid_input_matches_closed_form() {
    let f = unit();
    let g = GridFunction::sample(|x| f.value(x), -12.0, 1.0 / 128.0, 3073).unwrap();
    for beta in [0.5, 1.5] {
        let a = frac_laplacian(&g, beta, 0.3).unwrap();
        let b = frac_laplacian(&f, beta, 0.3).unwrap();
        assert!((a - b).abs() < 1e-4, "β={beta}: {a} vs {b}");
    }
}

#[test]
fn log_fourier_identity_for_unit_gaussian() {
    let (lhs, rhs) = log_fourier_identity(&unit());
    assert_eq!(rhs, -0.5);
    assert!((lhs - rhs).abs() < 1e-3, "{lhs}");
    let (l3, r3) = log_fourier_identity(&unit().scaled(3.0));
    assert!((l3 - 3.0 * lhs).abs() < 1e-10);
    assert_eq!(r3, -1.5);
}

#[test]
fn log_fourier_identity_off_center() {
    let f = GaussianSpec::new(1.0, 0.7, 0.5).unwrap();
    let (lhs, rhs) = log_fourier_identity(&f);
    assert!((lhs - rhs).abs() < 1e-3, "{lhs} vs {rhs}");
}

#[test]
fn flat_pairing_converges() {
    let f = unit();
    let a = GraphFunction::flat(2);
    let opts = PairingOptions::default();
    let target = 0.5 * 0.5f64.sqrt();
    let devs: Vec<f64> = [(1e-1, 10.0), (1e-2, 1e2), (1e-3, 1e3)]
        .iter()
        .map(|&(e, r)| {
            let p = truncated_graph_pairing(&a, 0.5, e, r, &f, &f, &opts).unwrap();
            assert!((p.target - target).abs() < 1e-15);
            p.abs_error
        })
        .collect();
    assert!(devs[1] < 0.1 * target, "{devs:?}");
    assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
}

#[test]
fn flat_pairing_is_beta_independent() {
    let f = unit();
    let a = GraphFunction::flat(2);
    let vals: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&b| truncated_graph_pairing(&a, b, 1e-2, 1e2, &f, &f, &PairingOptions::default()).unwrap().value)
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    for v in &vals {
        assert!((v - mean).abs() < 0.02 * mean.abs(), "{vals:?}");
    }
}

#[test]
fn direct_and_fft_pairings_agree() {
    let f = unit();
    let g = GaussianSpec::new(1.0, 0.3, 0.8).unwrap();
    let a = GraphFunction::flat(2);
    let fft = truncated_graph_pairing(&a, 0.5, 0.1, 2.0, &f, &g, &PairingOptions::default()).unwrap();
    let direct = truncated_graph_pairing(
        &a,
        0.5,
        0.1,
        2.0,
        &f,
        &g,
        &PairingOptions {
            force_direct: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(!fft.direct && direct.direct);
    assert!((fft.value - direct.value).abs() < 1e-4, "{} vs {}", fft.value, direct.value);
}

#[test]
fn curved_graph_pairing_is_finite() {
    let f = unit();
    let a = GraphFunction::sine(0.05, 1.0);
    let p = truncated_graph_pairing(&a, 0.5, 0.1, 2.0, &f, &f, &PairingOptions::default()).unwrap();
    assert!(p.direct && p.value.is_finite());
    let flat = truncated_graph_pairing(&GraphFunction::flat(2), 0.5, 0.1, 2.0, &f, &f, &PairingOptions::default()).unwrap();
    // A small Lipschitz perturbation changes the kernel by O(‖A′‖²).
    assert!((p.value - flat.value).abs() < 0.05);
}

#[test]
fn pairing_rejects_bad_parameters() {
    let f = unit();
    let a = GraphFunction::flat(2);
    let o = PairingOptions::default();
    assert!(truncated_graph_pairing(&a, 1.5, 0.1, 2.0, &f, &f, &o).is_err());
    assert!(truncated_graph_pairing(&a, 0.5, 2.0, 1.5, &f, &f, &o).is_err());
    assert!(truncated_graph_pairing(&a, 0.5, 0.1, 0.5, &f, &f, &o).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frac_laplacian_is_linear_and_translation_covariant(
        amp in 0.2f64..3.0, center in -2.0f64..2.0, beta in 0.1f64..1.9, dx in -1.5f64..1.5,
    ) {
        let f = GaussianSpec::new(1.0, 0.0, 1.0).unwrap();
        let g = GaussianSpec::new(amp, center, 1.0).unwrap();
        let a = frac_laplacian(&f, beta, dx).unwrap();
        let b = frac_laplacian(&g, beta, center + dx).unwrap();
        prop_assert!((b - amp * a).abs() < 1e-9 * amp.max(1.0));
    }

    #[test]
    fn frac_laplacian_scales_homogeneously(beta in 0.1f64..1.9, s in 0.5f64..2.0, x in -1.0f64..1.0) {
        // f(·/s) has Δ^{β/2} equal to s^{−β}(Δ^{β/2}f)(·/s).
        let f = GaussianSpec::new(1.0, 0.0, 1.0).unwrap();
        let g = GaussianSpec::new(1.0, 0.0, s).unwrap();
        let a = frac_laplacian(&f, beta, x).unwrap();
        let b = frac_laplacian(&g, beta, s * x).unwrap();
        prop_assert!((b - s.powf(-beta) * a).abs() < 5e-5, "{} vs {}", b, s.powf(-beta) * a);
    }

    #[test]
    fn grid_csv_round_trips(vals in prop::collection::vec(-1e3f64..1e3, 16..64), origin in -5.0f64..5.0) {
        let g = GridFunction::new(origin, 0.125, vals, None).unwrap();
        let back = GridFunction::from_csv(&g.to_csv()).unwrap();
        prop_assert_eq!(back.len(), g.len());
        for (a, b) in back.samples.iter().zip(&g.samples) {
            prop_assert_eq!(a, b);
        }
    }
}
