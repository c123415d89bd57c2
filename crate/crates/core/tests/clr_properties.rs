mod common;

use clrspline_core::clr::*;
use clrspline_core::linalg::SolveOptions;
use clrspline_core::smoothing::{fit_zero_integral, SmoothingProblem};
use clrspline_core::spline::{KnotConfig, Spline, SplineSpace};
use common::*;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;

const MIDPOINTS: [f64; 9] =
    [6574.0, 19591.0, 32608.0, 45625.0, 58641.0, 71658.0, 84675.0, 97692.0, 110709.0];
const PIEMONTE_PROPORTIONS: [f64; 9] =
    [0.067, 0.385, 0.323, 0.134, 0.052, 0.022, 0.009, 0.005, 0.003];
const PIEMONTE_CLR: [f64; 9] = [0.587, 2.331, 2.154, 1.271, 0.331, -0.550, -1.437, -1.997, -2.690];
const VALLE_D_AOSTA_CLR: [f64; 9] =
    [0.015, 2.094, 2.030, 1.624, 0.015, -0.946, -1.919, -0.966, -1.946];

fn income_space() -> SplineSpace {
    SplineSpace::new(KnotConfig::new(0.0, 110709.0, vec![30000.0, 70000.0], 3).unwrap())
}

fn income_interval() -> Interval {
    Interval::new(0.0, 110709.0).unwrap()
}

fn fitted(clr_row: &[f64]) -> Spline {
    let problem =
        SmoothingProblem::with_unit_weights(income_space(), MIDPOINTS.to_vec(), clr_row.to_vec(), 1.0, 2)
            .unwrap();
    fit_zero_integral(&problem, &SolveOptions::default()).unwrap().spline
}

/// `∫ exp(s − shift)` with 40 nodes on each of 64 pieces per knot span.
fn fine_normalizer(s: &Spline, shift: f64) -> f64 {
    let breaks = s.space().breakpoints();
    let mut fine = Vec::new();
    for w in breaks.windows(2) {
        for j in 0..64 {
            fine.push(w[0] + (w[1] - w[0]) * j as f64 / 64.0);
        }
    }
    fine.push(*breaks.last().unwrap());
    clrspline_core::quadrature::SpanQuadrature::new(40)
        .integrate(&fine, |x| (s.evaluate(x).unwrap() - shift).exp())
}

/// Range of `clr_i` over proportions within ±5e-4 of the rounded table values.
fn rounding_range(y: &[f64], i: usize) -> (f64, f64) {
    let n = y.len() as f64;
    let lo: Vec<f64> = y.iter().map(|v| (v - 5e-4).ln()).collect();
    let hi: Vec<f64> = y.iter().map(|v| (v + 5e-4).ln()).collect();
    let (sum_lo, sum_hi): (f64, f64) = (lo.iter().sum(), hi.iter().sum());
    let max = hi[i] - (hi[i] + sum_lo - lo[i]) / n;
    let min = lo[i] - (lo[i] + sum_hi - hi[i]) / n;
    (min, max)
}

#[test]
fn piemonte_clr_is_consistent_with_rounded_proportions() {
    let sample = HistogramSample::new(MIDPOINTS.to_vec(), PIEMONTE_PROPORTIONS.to_vec()).unwrap();
    let z = clr_discrete(&sample);
    assert!(z.as_slice().iter().sum::<f64>().abs() <= 1e-12);
    for (i, (got, want)) in z.as_slice().iter().zip(PIEMONTE_CLR).enumerate() {
        let (min, max) = rounding_range(&PIEMONTE_PROPORTIONS, i);
        assert!(min <= *got && *got <= max);
        // published values are rounded to three decimals
        assert!(min - 5e-4 <= want && want <= max + 5e-4, "class {i}: {want} not in [{min}, {max}]");
        if PIEMONTE_PROPORTIONS[i] >= 0.01 {
            assert!((got - want).abs() <= 6e-2, "{got} vs {want}");
        }
    }
}

#[test]
fn published_clr_rounds_back_to_piemonte_proportions() {
    let back = clr_discrete_inverse(&ClrVector(PIEMONTE_CLR.to_vec())).unwrap();
    for (got, want) in back.iter().zip(PIEMONTE_PROPORTIONS) {
        // ±5e-4 from the proportions, about 1e-3 relative from the rounded clr values
        assert!((got - want).abs() <= 5e-4 + 1e-3 * want, "{got} vs {want}");
    }
}

proptest! {
    #[test]
    fn clr_is_centred_and_scale_invariant(
        values in prop::collection::vec(1e-6f64..1e3, 2..20),
        scale in 1e-6f64..1e6,
    ) {
        let z = clr(&values).unwrap();
        prop_assert!(z.as_slice().iter().sum::<f64>().abs() <= 1e-12 * values.len() as f64);
        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let zs = clr(&scaled).unwrap();
        for (a, b) in z.as_slice().iter().zip(zs.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn discrete_round_trip(raw in prop::collection::vec(-5.0f64..5.0, 2..20)) {
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let z: Vec<f64> = raw.iter().map(|v| v - mean).collect();
        let p = clr_discrete_inverse(&ClrVector(z.clone())).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|v| *v > 0.0));
        let again = clr(&p).unwrap();
        for (a, b) in again.as_slice().iter().zip(&z) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn inverse_clr_survives_huge_coordinates() {
    let p = clr_discrete_inverse(&ClrVector(vec![800.0, -400.0, -400.0])).unwrap();
    assert!((p[0] - 1.0).abs() < 1e-15 && p.iter().all(|v| v.is_finite()));
}

#[test]
fn functional_clr_integrates_to_zero() {
    let mut r = rng(41);
    let interval = Interval::new(-1.0, 3.0).unwrap();
    let grid = interval.grid(301);
    for _ in 0..20 {
        let (a, b, c) = (r.random_range(-2.0..2.0), r.random_range(0.1..4.0), r.random_range(0.0..6.0));
        let values: Vec<f64> = grid.iter().map(|x| (a * x).exp() * (1.1 + (b * x + c).sin())).collect();
        let fc = clr_functional(&grid, &values, interval).unwrap();
        let total = DensityCurve { grid: grid.clone(), values: fc }.trapezoid_integral();
        assert!(total.abs() <= 1e-8, "{total}");
    }
}

#[test]
fn back_transformed_fits_have_unit_integral() {
    for row in [PIEMONTE_CLR, VALLE_D_AOSTA_CLR] {
        let s = fitted(&row);
        let curve = inverse_clr_spline(&s, 500, income_interval()).unwrap();
        assert!(curve.values.iter().all(|v| *v > 0.0));
        let norm = fine_normalizer(&s, 0.0);
        // the emitted values are exp(s)/∫exp(s); compare with the refined normalizer
        for (x, v) in curve.grid.iter().zip(&curve.values) {
            let exact = s.evaluate(*x).unwrap().exp() / norm;
            assert!((v - exact).abs() <= 1e-6 * exact, "x={x}: {v} vs {exact}");
        }
        let dense = inverse_clr_spline(&s, 2000, income_interval()).unwrap();
        assert!((dense.trapezoid_integral() - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn arbitrary_splines_back_transform_to_densities() {
    let mut r = rng(42);
    for _ in 0..30 {
        let k = r.random_range(1..=4);
        let g = r.random_range(0..=5);
        let space = random_space(&mut r, k, g);
        // large negative tails included
        let b = random_vector(&mut r, space.dim()) * 30.0;
        let s = Spline::new(space.clone(), b).unwrap();
        let interval = Interval::new(space.a(), space.b()).unwrap();
        let curve = inverse_clr_spline(&s, 200, interval).unwrap();
        assert!(curve.values.iter().all(|v| *v > 0.0 && v.is_finite()));
        let shift = curve.grid.iter().map(|x| s.evaluate(*x).unwrap()).fold(f64::MIN, f64::max);
        let norm = fine_normalizer(&s, shift);
        for (x, v) in curve.grid.iter().zip(&curve.values) {
            let exact = (s.evaluate(*x).unwrap() - shift).exp() / norm;
            assert!((v - exact).abs() <= 1e-6 * exact.max(1e-300));
        }
    }
}

#[test]
fn functional_clr_recovers_the_spline() {
    for row in [PIEMONTE_CLR, VALLE_D_AOSTA_CLR] {
        let s = fitted(&row);
        for m in [500, 5000] {
            let curve = inverse_clr_spline(&s, m, income_interval()).unwrap();
            let fc = clr_functional(&curve.grid, &curve.values, income_interval()).unwrap();
            let sv: Vec<f64> = curve.grid.iter().map(|x| s.evaluate(*x).unwrap()).collect();
            // centring the spline samples by the same trapezoid rule makes the round trip exact
            let mean = DensityCurve { grid: curve.grid.clone(), values: sv.clone() }.trapezoid_integral()
                / 110709.0;
            for (v, want) in fc.iter().zip(&sv) {
                assert!((v - (want - mean)).abs() <= 1e-12);
            }
            // against the exactly centred spline, only the trapezoid error of the mean remains
            if m == 5000 {
                for (v, want) in fc.iter().zip(&sv) {
                    assert!((v - want).abs() <= 1e-6, "{v} vs {want}");
                }
            }
        }
    }
}

#[test]
fn zero_clr_row_is_uniform() {
    let s = Spline::new(income_space(), DVector::zeros(6)).unwrap();
    let curve = inverse_clr_spline(&s, 500, income_interval()).unwrap();
    assert!(curve.values.iter().all(|v| (v * 110709.0 - 1.0).abs() <= 1e-12));
}
