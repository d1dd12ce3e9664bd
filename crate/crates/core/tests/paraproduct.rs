use std::f64::consts::PI;

use anisolab::lab::{make_indicator, random_trig_polynomial, IndicatorSpec, KernelConfig};
use anisolab::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn grid2(n: usize) -> GridSpec {
    make_grid(2, 1, n, PI / 2.0, PI / 8.0).unwrap()
}

fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn wave(g: GridSpec, xi: f64) -> GridFunction {
    GridFunction::from_fn(g, move |x| Complex64::from_polar(1.0, xi * x[0]))
}

#[test]
fn constants_land_in_the_resonant_term() {
    let g = grid2(128);
    let one = GridFunction::constant(g, Complex64::new(1.0, 0.0));
    let t = paraproduct_split(&one, &one, g.n_max()).unwrap();
    assert!(t.pi1.sup_norm() < 1e-15 && t.pi3.sup_norm() < 1e-15);
    assert!(max_diff(&t.pi2, &one) < 1e-14);
    assert!(t.residual < 1e-14);
}

#[test]
fn separated_bands_land_in_the_low_high_term() {
    let g = make_grid(1, 1, 256, 2.0 * PI, PI / 2.0).unwrap();
    assert_eq!(g.n_max(), 5);
    let f = wave(g, 2.0);
    let h = wave(g, 32.0);
    let t = paraproduct_split(&f, &h, 5).unwrap();
    assert!(max_diff(&t.pi1, &f.mul(&h).unwrap()) < 1e-12);
    assert!(t.pi2.sup_norm() < 1e-12 && t.pi3.sup_norm() < 1e-12);
    let swapped = paraproduct_split(&h, &f, 5).unwrap();
    assert!(max_diff(&swapped.pi3, &t.pi1) < 1e-14);
    assert!(paraproduct_split(&f, &h, 6).is_err());
}

#[test]
fn reconstruction_of_random_pairs() {
    let g = grid2(256);
    let j = g.n_max();
    let radius = (j as f64).exp2();
    for seed in 0..5 {
        let f = random_trig_polynomial(&g, radius, 2 * seed);
        let h = random_trig_polynomial(&g, radius, 2 * seed + 1);
        let t = paraproduct_split(&f, &h, j).unwrap();
        assert!(t.relative_residual <= 1e-8, "seed {seed}: {}", t.relative_residual);
        let u = paraproduct_split(&h, &f, j).unwrap();
        assert!(max_diff(&t.pi1, &u.pi3) < 1e-12 && max_diff(&t.pi2, &u.pi2) < 1e-12);
    }
}

#[test]
fn support_facts() {
    let g = grid2(256);
    let f = random_trig_polynomial(&g, g.nyquist(), 1);
    let h = random_trig_polynomial(&g, g.nyquist(), 2);
    for k in 2..=g.n_max() {
        if let Ok(v) = support_check(SupportFact::LowHigh, k, &f, &h) {
            assert!(v <= 1e-10, "low-high k = {k}: {v}");
        }
    }
    for k in 0..g.n_max() {
        if let Ok(v) = support_check(SupportFact::HighHigh, k, &f, &h) {
            assert!(v <= 1e-10, "high-high k = {k}: {v}");
        }
    }
    assert!(support_check(SupportFact::LowHigh, 1, &f, &h).is_err());
    assert!(support_check(SupportFact::HighHigh, g.n_max(), &f, &h).is_err());
}

#[test]
fn single_coordinate_exactness() {
    let g = grid2(256);
    for eps in [0.0, g.h()] {
        let ind = make_indicator(&IndicatorSpec::strip(vec![1.0, 0.0], g.support_radius() / 2.0, eps), &g).unwrap();
        assert!(single_coordinate_deviation(&ind).unwrap() <= 1e-12);
    }
    let w = GridFunction::from_real_fn(g, |x| (4.0 * x[0]).sin() + (12.0 * x[0]).cos());
    assert!(single_coordinate_deviation(&w).unwrap() <= 1e-12);
    assert_eq!(coordinate_variation(&w), 0.0);
    let across = GridFunction::from_real_fn(g, |x| (4.0 * x[1]).sin());
    assert!(single_coordinate_deviation(&across).unwrap() > 0.5);
    assert!(single_coordinate_deviation(&wave(make_grid(1, 1, 128, PI, PI / 4.0).unwrap(), 2.0)).is_err());
    let profile = first_coordinate_profile(&w).unwrap();
    assert_eq!(profile.spec().d(), 1);
    assert!((profile.sup_norm() - w.sup_norm()).abs() < 1e-15);
}

#[test]
fn product_probe() {
    let g = grid2(128);
    let f = random_trig_polynomial(&g, 30.0, 4);
    let one = GridFunction::constant(g, Complex64::new(1.0, 0.0));
    let probe = product_inequality_ratio(&f, &one, -0.3, 2.0).unwrap();
    assert!(probe.in_lemma_range);
    assert!(probe.ratio <= 1.0 && probe.ratio > 0.0);
    assert!((probe.numerator - probe.f_norm).abs() < 1e-12 * probe.f_norm);
    assert!(!product_inequality_ratio(&f, &one, -0.6, 2.0).unwrap().in_lemma_range);
    let across = GridFunction::from_real_fn(g, |x| x[1].cos());
    assert!(product_inequality_ratio(&f, &across, -0.3, 2.0).is_err());
    assert!(product_inequality_ratio(&f, &one, -0.3, 1.0).is_err());
}

#[test]
fn envelope_values() {
    assert_eq!(envelope(0, &[0.5, 0.0]), 1.0);
    assert_eq!(envelope(2, &[0.0, 0.0]), 16.0);
    assert!((envelope(1, &[1.0, 0.0]) - 4.0 * 2f64.powi(-3)).abs() < 1e-15);
    assert!((envelope(3, &[1.0]) - 8.0 * 8f64.powi(-2)).abs() < 1e-15);
}

#[test]
fn kernel_vanishes_on_flat_leaves_and_decays_on_curved_ones() {
    let cfg = KernelConfig::default();
    let g = cfg.grid().unwrap();
    let leaves = cfg.build_leaves().unwrap();
    let flat: Vec<_> = leaves.iter().filter(|l| matches!(l.shape(), LeafShape::Horizontal | LeafShape::Affine { .. })).cloned().collect();
    let k = 2;
    let c0 = calibrate_separation(k, &flat, &g).unwrap();
    for l in &flat {
        let dec = kernel_decay(k, l, &g, c0).unwrap();
        assert!(dec.max_separated <= 1e-10, "{:?}: {}", l.shape(), dec.max_separated);
    }
    let curved = leaves.iter().find(|l| matches!(l.shape(), LeafShape::Sinusoidal { .. })).unwrap();
    let dec = kernel_decay(k, curved, &g, c0).unwrap();
    assert!(dec.exponent.unwrap() >= 2.5, "{:?}", dec.exponent);
    assert!(wave_packet_kernel(k, k + c0, curved, &g, c0).is_err());
}

#[test]
fn young_inequality() {
    let g = grid2(128);
    let cone = UnstableCone::vertical(1, 1, 30f64.to_radians()).unwrap();
    let fam = sample_leaf_family(&LeafFamilyConfig::default(), &cone, &g, 1).unwrap();
    let f = random_trig_polynomial(&g, 40.0, 8);
    let mut delta = vec![Complex64::new(0.0, 0.0); g.len()];
    delta[g.len() / 2 + g.n() / 2] = Complex64::new(g.h().powi(-2), 0.0);
    let delta = GridFunction::new(g, delta).unwrap();
    assert!(max_diff(&convolve(&delta, &f).unwrap(), &f) < 1e-12);
    let r = leafwise_young_check(&delta, &f, &fam, -0.4, 2.0).unwrap();
    assert!((r - 1.0).abs() < 1e-10, "{r}");
    let kernel = lp_block(3, &delta).unwrap();
    let a = leafwise_young_check(&kernel, &f, &fam, -0.4, 2.0).unwrap();
    let b = leafwise_young_check(&kernel.scale(Complex64::new(-3.0, 1.0)), &f, &fam, -0.4, 2.0).unwrap();
    assert!(a <= 1.1);
    assert!((a - b).abs() < 1e-12 * a);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn paraproducts_are_bilinear(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let g = grid2(128);
        let j = g.n_max();
        let f = random_trig_polynomial(&g, 30.0, seed);
        let h = random_trig_polynomial(&g, 30.0, seed ^ 1);
        let q = random_trig_polynomial(&g, 30.0, seed ^ 2);
        let a = Complex64::new(re, im);
        let lhs = paraproduct_split(&f.scale(a).add(&h).unwrap(), &q, j).unwrap();
        let tf = paraproduct_split(&f, &q, j).unwrap();
        let th = paraproduct_split(&h, &q, j).unwrap();
        let scale = 1.0 + a.norm();
        for (l, (x, y)) in [(&lhs.pi1, (&tf.pi1, &th.pi1)), (&lhs.pi2, (&tf.pi2, &th.pi2)), (&lhs.pi3, (&tf.pi3, &th.pi3))] {
            let want = x.scale(a).add(y).unwrap();
            prop_assert!(max_diff(l, &want) <= 1e-11 * scale * (1.0 + want.sup_norm()));
        }
    }
}
