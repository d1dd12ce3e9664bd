use std::f64::consts::PI;

use anisolab::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn cone() -> UnstableCone {
    UnstableCone::vertical(1, 1, 30f64.to_radians()).unwrap()
}

fn grid(n: usize) -> GridSpec {
    make_grid(2, 1, n, PI, PI / 4.0).unwrap()
}

fn bounds() -> LeafBounds {
    LeafBounds { c_f: 64.0, r: 3.0, half_width: PI / 2.0 }
}

fn leaf(shape: LeafShape) -> Result<AdmissibleLeaf> {
    make_graph_leaf(shape, &cone(), bounds(), vec![0.0, 0.0])
}

fn sinusoid(a: f64, k: f64, phase: f64) -> LeafShape {
    LeafShape::Sinusoidal { amplitude: vec![a], wavevector: vec![k], phase }
}

fn plane_wave(g: GridSpec, xi: [f64; 2]) -> GridFunction {
    GridFunction::from_fn(g, move |x| Complex64::from_polar(1.0, xi[0] * x[0] + xi[1] * x[1]))
}

#[test]
fn cone_examples() {
    let c = cone();
    assert!(c.contains_direction(&[0.0, 1.0]).unwrap());
    assert!(!c.contains_direction(&[1.0, 0.0]).unwrap());
    let edge = 30f64.to_radians();
    assert!(c.contains_direction(&[edge.sin(), edge.cos()]).unwrap());
    let out = 30.5f64.to_radians();
    assert!(!c.contains_direction(&[out.sin(), out.cos()]).unwrap());
    assert!(c.contains_direction(&[0.0, 0.0]).is_err());
    assert!(c.contains_direction(&[1.0]).is_err());
    assert!(UnstableCone::vertical(1, 1, 89.9f64.to_radians()).is_err());
    assert!(UnstableCone::vertical(1, 1, 0.0).is_err());
    assert!(make_cone(1, 1, vec![vec![0.0, 1.0]], 30f64.to_radians()).is_ok());
    assert!((c.max_slope() - 25f64.to_radians().tan()).abs() < 1e-15);
}

#[test]
fn flat_and_affine_leaves() {
    let h = leaf(LeafShape::Horizontal).unwrap();
    assert_eq!(h.weight(&[0.3]), 1.0);
    assert!(h.chord_failure(&cone(), 200).is_none());
    let a = 0.3;
    let tilt = leaf(LeafShape::Affine { slope: vec![a], intercept: vec![0.0] }).unwrap();
    for z in [-1.0, 0.0, 0.7] {
        assert!((tilt.weight(&[z]) - (1.0 + a * a).sqrt()).abs() < 1e-15);
        let mut y = [0.0];
        tilt.gamma(&[z], &mut y);
        assert!((y[0] - a * z).abs() < 1e-15);
    }
    assert!(leaf(LeafShape::Affine { slope: vec![0.5], intercept: vec![0.0] }).is_err());
}

#[test]
fn sinusoid_rejection_threshold() {
    let ok = |a: f64| leaf(sinusoid(a, 1.0, 0.0)).is_ok();
    let (mut lo, mut hi) = (0.0, 2.0);
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if ok(m) {
            lo = m
        } else {
            hi = m
        }
    }
    // a unit-wavevector sinusoid has peak slope equal to its amplitude
    let oracle = 25f64.to_radians().tan();
    assert!(lo >= oracle * (1.0 - 1e-6) && lo <= oracle * (1.0 + 1e-6), "{lo} vs {oracle}");
    assert!((lo - 0.466_307_661_093_707_3).abs() < 1e-9, "{lo:.17}");
}

#[test]
fn restriction_of_plane_waves_is_exact() {
    let g = grid(128);
    let xi = [3.0, -2.0];
    let f = plane_wave(g, xi);
    let shapes = [
        LeafShape::Horizontal,
        LeafShape::Affine { slope: vec![0.2], intercept: vec![0.1] },
        sinusoid(0.1, 2.0, 0.4),
    ];
    for shape in shapes {
        let l = leaf(shape.clone()).unwrap();
        let lf = restrict_to_leaf(&f, &l).unwrap();
        let chart = *lf.chart();
        assert_eq!(chart.d(), 1);
        let mut z = [0.0];
        let mut y = [0.0];
        let mut err = 0.0f64;
        for (i, v) in lf.samples.iter().enumerate() {
            chart.point(i, &mut z);
            l.gamma(&z, &mut y);
            let want = Complex64::from_polar(1.0, xi[0] * z[0] + xi[1] * y[0]);
            err = err.max((v - want).norm());
            assert!((lf.weights[i] - l.weight(&z)).abs() < 1e-15);
        }
        assert!(err < 1e-10, "{shape:?}: {err}");
    }
}

#[test]
fn restriction_follows_translation() {
    let g = grid(128);
    let f = GridFunction::from_real_fn(g, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1]) * 4.0).exp());
    let l = leaf(sinusoid(0.1, 2.0, 0.0)).unwrap();
    let shift = 3i64;
    let moved = f.shifted(&[0, shift]);
    let up = l.translated(&[0.0, shift as f64 * g.h()]);
    let a = restrict_to_leaf(&moved, &l).unwrap();
    let b = restrict_to_leaf(&f, &up).unwrap();
    let err = a.samples.iter().zip(&b.samples).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(err < 1e-10, "{err}");
}

#[test]
fn leaf_outside_box_is_rejected() {
    let g = grid(128);
    let far = leaf(LeafShape::Horizontal).unwrap().translated(&[0.0, PI]);
    assert!(far.check_in_box(&g).is_err());
    assert!(restrict_to_leaf(&GridFunction::zeros(g), &far).is_err());
}

#[test]
fn sampled_family_contents() {
    let g = make_grid(2, 1, 128, PI / 2.0, PI / 8.0).unwrap();
    let cfg = LeafFamilyConfig::default();
    let a = sample_leaf_family(&cfg, &cone(), &g, 1).unwrap();
    let b = sample_leaf_family(&cfg, &cone(), &g, 1).unwrap();
    assert_eq!(a.len(), b.len());
    assert!(a.members.iter().zip(&b.members).all(|(x, y)| x.leaf.shape() == y.leaf.shape() && x.translation == y.translation));
    assert_eq!(a.len(), 68);
    assert_eq!(a.representatives[0].shape(), &LeafShape::Horizontal);
    for m in &a.members {
        assert!(m.leaf.chord_failure(&cone(), 64).is_none(), "member {}", m.id);
        assert!(m.leaf.check_in_box(&g).is_ok());
    }
    let c = sample_leaf_family(&cfg, &cone(), &g, 2).unwrap();
    assert_ne!(a.representatives[1].shape(), c.representatives[1].shape());

    let flat = LeafFamilyConfig { affine: 0, sinusoidal: 0, quadratic: 0, ..cfg.clone() };
    let f = sample_leaf_family(&flat, &cone(), &g, 1).unwrap();
    assert_eq!(f.representatives.len(), 1);
    assert_eq!(f.len(), 2 * cfg.translations_per_side + 1);
    assert!(f.members.iter().all(|m| m.representative == 0));
}

#[test]
fn explicit_family_with_translations() {
    let l = leaf(LeafShape::Horizontal).unwrap();
    let fam = LeafFamily::from_leaves(vec![l]).with_translations(0, &[vec![0.1], vec![-0.1]]);
    assert_eq!(fam.len(), 3);
    let mut y = [0.0];
    fam.members[1].leaf.gamma(&[0.5], &mut y);
    assert!((y[0] - 0.1).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn admitted_sinusoids_have_admissible_chords(a in 0.0f64..0.6, k in 1.0f64..4.0, phase in 0.0f64..6.0) {
        if let Ok(l) = leaf(sinusoid(a / k, k, phase)) {
            prop_assert!(a <= cone().max_slope() * (1.0 + 1e-9));
            prop_assert!(l.chord_failure(&cone(), 128).is_none());
        } else {
            prop_assert!(a > cone().max_slope() * (1.0 - 1e-9));
        }
    }
}
