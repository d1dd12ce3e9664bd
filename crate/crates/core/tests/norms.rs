use std::f64::consts::PI;

use anisolab::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(d: usize, n: usize) -> GridSpec {
    make_grid(d, 1, n, PI, PI / 4.0).unwrap()
}

fn plane_wave(g: GridSpec, xi: &[f64]) -> GridFunction {
    let xi = xi.to_vec();
    GridFunction::from_fn(g, move |x| Complex64::from_polar(1.0, x.iter().zip(&xi).map(|(a, b)| a * b).sum()))
}

fn random_band_limited(g: GridSpec, radius: f64, seed: u64) -> GridFunction {
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let f = GridFunction::new(g, (0..g.len()).map(|_| Complex64::new(next(), next())).collect()).unwrap();
    let cut = SampledSymbol::radial(&g, g.d(), |r| if r <= radius { 1.0 } else { 0.0 });
    apply_multiplier(&cut, &f).unwrap()
}

#[test]
fn lp_norm_examples() {
    for d in [1, 2] {
        let g = grid(d, 128);
        let l = g.box_length();
        let one = GridFunction::constant(g, Complex64::new(1.0, 0.0));
        assert!((lp_norm(&one, 2.0).unwrap() - l.powf(d as f64 / 2.0)).abs() < 1e-12);
        let wave = plane_wave(g, &vec![2.0; d]);
        assert!((lp_norm(&wave, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        let half = GridFunction::from_real_fn(g, |x| if x[0] > 0.0 { 1.0 } else { 0.0 });
        let cell = g.h().powi(d as i32);
        let row = g.h() * l.powi(d as i32 - 1);
        let v = lp_norm(&half, 1.0).unwrap();
        assert!((v - l.powi(d as i32) / 2.0).abs() <= row + cell, "d = {d}: {v}");
    }
    assert!(lp_norm(&GridFunction::zeros(grid(1, 128)), 0.5).is_err());
}

#[test]
fn besov_examples() {
    let g = grid(1, 256);
    let wave = plane_wave(g, &[2.0]);
    for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
        for s in [-0.4, 0.0, 0.3] {
            let rep = besov_norm(&wave, s, p).unwrap();
            assert_eq!(rep.band, 1);
            let want = s.exp2() * lp_norm(&wave, p).unwrap();
            assert!((rep.value - want).abs() < 1e-12 * want, "p = {p}, s = {s}");
        }
    }
    let one = GridFunction::constant(g, Complex64::new(1.0, 0.0));
    let rep = besov_norm(&one, 0.7, 2.0).unwrap();
    assert_eq!(rep.band, 0);
    assert!((rep.value - PI.sqrt()).abs() < 1e-12);
    assert_eq!(rep.n_max, g.n_max());
}

#[test]
fn strip_indicator_besov_is_resolution_stable() {
    let values: Vec<f64> = [128, 256, 512]
        .iter()
        .map(|&n| {
            let g = grid(1, n);
            let k = g.support_radius();
            let tie = 1e-9 * g.h();
            let strip = GridFunction::from_real_fn(g, |x| {
                let step = |t: f64| if t > tie { 1.0 } else if t < -tie { 0.0 } else { 0.5 };
                step(x[0]) - step(x[0] - k / 2.0)
            });
            besov_norm(&strip, 0.4, 2.0).unwrap().value
        })
        .collect();
    let drift = values.iter().fold(0.0f64, |m, v| m.max((v / values[0] - 1.0).abs()));
    assert!(drift < 0.10, "{values:?}");
}

#[test]
fn sobolev_examples() {
    let g = grid(2, 128);
    let one = GridFunction::constant(g, Complex64::new(1.0, 0.0));
    for t in [-1.0, 0.5, 2.0] {
        assert!((sobolev_norm(&one, t, 1.5).unwrap() - lp_norm(&one, 1.5).unwrap()).abs() < 1e-12);
    }
    let wave = plane_wave(g, &[2.0, 4.0]);
    let t = 0.6;
    let want = (1.0f64 + 20.0).powf(t / 2.0) * lp_norm(&wave, 3.0).unwrap();
    assert!((sobolev_norm(&wave, t, 3.0).unwrap() - want).abs() < 1e-12 * want);
    let f = random_band_limited(g, 40.0, 1);
    assert!((sobolev_norm(&f, 0.0, 1.7).unwrap() - lp_norm(&f, 1.7).unwrap()).abs() < 1e-12);
}

#[test]
fn conjugate_exponents() {
    assert_eq!(conjugate(2.0), 2.0);
    assert_eq!(conjugate(4.0), 4.0 / 3.0);
    assert_eq!(conjugate(f64::INFINITY), 1.0);
    assert_eq!(conjugate(1.0), f64::INFINITY);
    let q = NormParams::new(1.5, -0.3, 0.2, 3.0).unwrap();
    assert!((q.p_prime() - 3.0).abs() < 1e-15);
}

#[test]
fn admissibility_predicate() {
    assert!(NormParams::new(2.0, -0.4, 0.2, 3.0).unwrap().is_admissible());
    assert!(NormParams::new(1.5, -0.3, 0.2, 3.0).unwrap().is_admissible());
    assert!(NormParams::new(4.0, -0.5, 0.3, 3.0).unwrap().is_admissible());
    // s must stay below -t
    let bad = NormParams { p: 2.0, s: -0.1, t: 0.2, r: 3.0 };
    assert!(!bad.is_admissible());
    assert!(bad.check_admissible().unwrap_err().to_string().contains("inadmissible parameters"));
    // s must stay above -1 + 1/p
    assert!(!NormParams { p: 2.0, s: -0.6, t: 0.2, r: 3.0 }.is_admissible());
    // p = inf is outside the theorem
    assert!(!NormParams { p: f64::INFINITY, s: -0.4, t: 0.2, r: 3.0 }.is_admissible());
}

#[test]
fn nikolskij_examples() {
    let g = grid(1, 1024);
    let wave = plane_wave(g, &[8.0]);
    let m = 16.0;
    let r = nikolskij_ratio(&wave, 2.0, 1.0, m).unwrap();
    // unimodular: ||f||_2 / ||f||_1 = L^{-1/2}
    let want = PI.powf(-0.5) / m.powf(0.5);
    assert!((r - want).abs() < 1e-12);
    let wide = plane_wave(g, &[64.0]);
    assert!(matches!(nikolskij_ratio(&wide, 2.0, 1.0, m), Err(Error::NotBandLimited(_))));
    assert!(nikolskij_ratio(&wave, 1.0, 2.0, m).is_err());
}

#[test]
fn nikolskij_dirichlet_family_is_flat() {
    let g = make_grid(1, 1, 4096, 2.0 * PI, PI / 2.0).unwrap();
    let mut delta = vec![Complex64::new(0.0, 0.0); g.len()];
    delta[g.n() / 2] = Complex64::new(1.0 / g.h(), 0.0);
    let delta = GridFunction::new(g, delta).unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 3..g.n_max() {
        let m = (j as f64 + 1.0).exp2();
        let f = lp_partial_sum(j as i64, &delta).unwrap();
        let r = nikolskij_ratio(&f, 2.0, 1.0, m).unwrap();
        xs.push(m.log2());
        ys.push(r.log2());
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!(slope.abs() < 0.05, "slope {slope}");
    let max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max).exp2();
    assert!((max - 0.2408).abs() < 5e-3, "constant {max}");
}

#[test]
fn besov_and_sobolev_at_zero_smoothness_are_comparable() {
    let g = grid(2, 128);
    for seed in 0..20 {
        let f = random_band_limited(g, 60.0, seed);
        let b = besov_norm(&f, 0.0, 2.0).unwrap().value;
        let h = sobolev_norm(&f, 0.0, 2.0).unwrap();
        assert!(b <= 4.0 * h && h <= 4.0 * b, "seed {seed}: {b} vs {h}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn norms_are_homogeneous(seed in any::<u64>(), re in -4.0f64..4.0, im in -4.0f64..4.0, p in 1.0f64..6.0) {
        let g = grid(1, 256);
        let f = random_band_limited(g, 50.0, seed);
        let a = Complex64::new(re, im);
        let fa = f.scale(a);
        let m = a.norm();
        let pairs = [
            (lp_norm(&fa, p).unwrap(), lp_norm(&f, p).unwrap()),
            (besov_norm(&fa, -0.3, p).unwrap().value, besov_norm(&f, -0.3, p).unwrap().value),
            (sobolev_norm(&fa, 0.4, p).unwrap(), sobolev_norm(&f, 0.4, p).unwrap()),
        ];
        for (x, y) in pairs {
            prop_assert!((x - m * y).abs() <= 1e-12 * (1.0 + m * y));
        }
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>(), p in 1.0f64..6.0, s in -0.8f64..0.8) {
        let g = grid(2, 128);
        let f = random_band_limited(g, 50.0, seed);
        let h = random_band_limited(g, 30.0, seed.wrapping_add(1));
        let sum = f.add(&h).unwrap();
        prop_assert!(lp_norm(&sum, p).unwrap() <= lp_norm(&f, p).unwrap() + lp_norm(&h, p).unwrap() + 1e-10);
        prop_assert!(
            besov_norm(&sum, s, p).unwrap().value
                <= besov_norm(&f, s, p).unwrap().value + besov_norm(&h, s, p).unwrap().value + 1e-10
        );
        prop_assert!(sobolev_norm(&sum, s, p).unwrap() <= sobolev_norm(&f, s, p).unwrap() + sobolev_norm(&h, s, p).unwrap() + 1e-10);
    }
}
