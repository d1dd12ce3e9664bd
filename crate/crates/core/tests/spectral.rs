use std::f64::consts::PI;

use anisolab::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn grid1(n: usize) -> GridSpec {
    make_grid(1, 1, n, PI, PI / 4.0).unwrap()
}

fn grid2(n: usize) -> GridSpec {
    make_grid(2, 1, n, PI, PI / 4.0).unwrap()
}

fn plane_wave(grid: GridSpec, xi: &[f64]) -> GridFunction {
    let xi = xi.to_vec();
    GridFunction::from_fn(grid, move |x| Complex64::from_polar(1.0, x.iter().zip(&xi).map(|(a, b)| a * b).sum()))
}

fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn random_function(grid: GridSpec, seed: u64) -> GridFunction {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let values = (0..grid.len()).map(|_| Complex64::new(next(), next())).collect();
    GridFunction::new(grid, values).unwrap()
}

/// Band-limited to `|xi| <= radius` by zeroing higher modes of a random spectrum.
fn band_limited(grid: GridSpec, radius: f64, seed: u64) -> GridFunction {
    let f = random_function(grid, seed);
    let a = SampledSymbol::radial(&grid, grid.d(), |r| if r <= radius { 1.0 } else { 0.0 });
    apply_multiplier(&a, &f).unwrap()
}

#[test]
fn make_grid_rejects_bad_input() {
    assert!(make_grid(1, 1, 500, 16.0, 4.0).is_err());
    assert!(make_grid(2, 1, 512, 16.0, 4.5).is_err());
    // pi N / (2L) = 32 leaves five bands 0..=4
    let e = make_grid(1, 1, 512, 8.0 * PI, 2.0 * PI).unwrap_err();
    assert!(e.to_string().contains("bands"));
    assert!(make_grid(2, 1, 512, 16.0, 4.0).is_err());
    assert!(make_grid(2, 1, 1024, 16.0, 4.0).is_ok());
}

#[test]
fn n_max_is_largest_band_below_guard() {
    for (n, l) in [(128usize, PI), (256, PI), (512, PI / 2.0), (1024, 8.0 * PI), (4096, 2.0 * PI)] {
        let g = make_grid(1, 1, n, l, l / 4.0).unwrap();
        let guard = PI * n as f64 / (2.0 * l);
        let mut want = 0;
        while ((want + 2) as f64).exp2() <= guard + 1e-9 {
            want += 1;
        }
        assert_eq!(g.n_max(), want, "N = {n}, L = {l}");
    }
}

#[test]
fn chi_values() {
    assert_eq!(chi(0.0), 1.0);
    assert_eq!(chi(0.5), 1.0);
    assert_eq!(chi(1.0), 1.0);
    assert_eq!(chi(2.0), 0.0);
    assert_eq!(chi(3.0), 0.0);
    assert_eq!(chi(CHI_EDGE), 0.0);
    // symmetric transition: the midpoint of [1, CHI_EDGE] maps to 1/2
    assert!((chi(1.25) - 0.5).abs() < 1e-15);
    let h = |u: f64| (-1.0 / u).exp();
    let oracle = h(0.8) / (h(0.8) + h(0.2));
    assert!((chi(1.1) - oracle).abs() < 1e-15);
    assert!((chi(1.1) - 0.977_022_630_089_974_4).abs() < 1e-12);
}

#[test]
fn window_examples() {
    assert_eq!(psi(0, 0.0), 1.0);
    assert_eq!(psi(1, 2.0), 1.0);
    assert_eq!(psi(2, 2.0), 0.0);
    assert_eq!(psi(0, 2.0), 0.0);
    assert_eq!(psi_support(0), (0.0, CHI_EDGE));
    assert_eq!(psi_support(3), (4.0, 8.0 * CHI_EDGE));
}

#[test]
fn window_values_respect_support() {
    let g = grid2(128);
    for n in 0..=g.n_max() {
        let w = make_dyadic_window(n, 2, &g).unwrap();
        let (lo, hi) = psi_support(n);
        let (wlo, whi) = (if n == 0 { 0.0 } else { (n as f64 - 1.0).exp2() }, (n as f64 + 1.0).exp2());
        assert!(lo >= wlo && hi <= whi);
        for (v, r) in w.values().iter().zip(g.freq_norms(2)) {
            assert!((0.0..=1.0).contains(v));
            if r < lo || r > hi {
                assert_eq!(*v, 0.0);
            }
        }
    }
    assert!(make_dyadic_window(g.n_max() + 1, 2, &g).is_err());
}

#[test]
fn forward_transform_matches_naive_sum() {
    for g in [make_grid(1, 1, 64, PI / 2.0, PI / 8.0).unwrap(), make_grid(2, 1, 64, PI / 2.0, PI / 8.0).unwrap()] {
        let f = random_function(g, 3);
        let spec = dft_forward(&f);
        let n = g.n();
        let d = g.d();
        let cell = g.h().powi(d as i32);
        let mut x = vec![0.0; d];
        for probe in [vec![0i64; d], vec![1; d], vec![-3; d], vec![5; d], vec![-(n as i64) / 2; d]] {
            let xi: Vec<f64> = probe.iter().map(|k| *k as f64 * g.dk()).collect();
            let mut want = Complex64::new(0.0, 0.0);
            for (j, v) in f.values().iter().enumerate() {
                g.point(j, &mut x);
                let phase: f64 = x.iter().zip(&xi).map(|(a, b)| a * b).sum();
                want += v * Complex64::from_polar(cell, -phase);
            }
            assert!((spec.at(&probe) - want).norm() < 1e-11 * want.norm().max(1.0), "{probe:?}");
        }
    }
}

#[test]
fn constant_spectrum_sits_at_origin() {
    let g = grid2(128);
    let c = Complex64::new(0.7, -0.2);
    let s = dft_forward(&GridFunction::constant(g, c));
    let l2 = g.box_length().powi(2);
    assert!((s.at(&[0, 0]) - c * l2).norm() < 1e-12);
    let rest = s.coeffs().iter().skip(1).map(|v| v.norm()).fold(0.0, f64::max);
    assert!(rest < 1e-12);
}

#[test]
fn lattice_plane_wave_has_one_coefficient() {
    let g = grid2(128);
    let s = dft_forward(&plane_wave(g, &[3.0 * g.dk(), -2.0 * g.dk()]));
    let peak = s.at(&[3, -2]).norm();
    assert!((peak - g.box_length().powi(2)).abs() < 1e-10);
    let others = s.coeffs().iter().map(|v| v.norm()).filter(|v| *v < peak / 2.0).fold(0.0, f64::max);
    assert!(others < 1e-10);
}

#[test]
fn multiplier_examples() {
    let g = grid1(128);
    let f = random_function(g, 11);
    let one = SampledSymbol::radial(&g, 1, |_| 1.0);
    assert!(max_diff(&apply_multiplier(&one, &f).unwrap(), &f) < 1e-14);

    let xi0 = 6.0;
    let wave = plane_wave(g, &[xi0]);
    let a = SampledSymbol::radial(&g, 1, |r| 1.0 / (1.0 + r));
    let want = wave.scale(Complex64::new(1.0 / (1.0 + xi0), 0.0));
    assert!(max_diff(&apply_multiplier(&a, &wave).unwrap(), &want) < 1e-14);

    let two = plane_wave(g, &[2.0]);
    let w1 = make_dyadic_window(1, 1, &g).unwrap();
    assert!(max_diff(&apply_multiplier(&w1, &two).unwrap(), &two) < 1e-14);

    let other = grid1(256);
    assert!(apply_multiplier(&make_dyadic_window(1, 1, &other).unwrap(), &two).is_err());
}

#[test]
fn blocks_of_constant() {
    let g = grid2(128);
    let one = GridFunction::constant(g, Complex64::new(1.0, 0.0));
    assert!(max_diff(&lp_block(0, &one).unwrap(), &one) < 1e-14);
    for k in 1..=g.n_max() as i64 {
        assert!(lp_block(k, &one).unwrap().sup_norm() < 1e-14);
    }
    assert_eq!(lp_block(-1, &one).unwrap().sup_norm(), 0.0);
    assert!(lp_block(g.n_max() as i64 + 1, &one).is_err());
}

#[test]
fn partial_sums() {
    let g = grid2(128);
    let top = (g.n_max() as f64).exp2();
    let f = band_limited(g, top, 5);
    assert!(max_diff(&lp_partial_sum(g.n_max() as i64, &f).unwrap(), &f) < 1e-12 * f.sup_norm());

    let wave = plane_wave(g, &[2.0, 0.0]);
    assert!(lp_partial_sum(0, &wave).unwrap().sup_norm() < 1e-14);

    let rnd = random_function(g, 8);
    for j in 0..g.n_max() {
        let s = lp_partial_sum(j as i64, &rnd).unwrap();
        assert!(RawSpectrum::of(&s).energy_outside((j as f64 + 1.0).exp2()) < 1e-28);
        let mut acc = GridFunction::zeros(g);
        for k in 0..=j {
            acc = acc.add(&lp_block(k as i64, &rnd).unwrap()).unwrap();
        }
        assert!(max_diff(&acc, &s) < 1e-12 * rnd.sup_norm());
    }
}

#[test]
fn almost_orthogonality() {
    let g = grid2(128);
    for seed in 0..10 {
        let f = random_function(g, seed);
        let blocks = lp_blocks(&f);
        for m in 0..blocks.len() {
            for n in 0..blocks.len() {
                if (n as i64 - m as i64).abs() >= 2 {
                    let v = lp_block(n as i64, &blocks[m]).unwrap().sup_norm();
                    assert!(v <= 1e-10 * f.sup_norm(), "n = {n}, m = {m}: {v}");
                }
            }
        }
    }
}

#[test]
fn binary_format_header() {
    let g = grid2(128);
    let f = random_function(g, 2);
    let mut buf = Vec::new();
    f.write_to(&mut buf).unwrap();
    assert_eq!(buf.len(), 64 + 16 * g.len());
    assert_eq!(&buf[..8], b"ANISOGRD");
    assert_eq!(f64::from_le_bytes(buf[24..32].try_into().unwrap()), PI);
    assert_eq!(f64::from_le_bytes(buf[64..72].try_into().unwrap()), f.values()[0].re);
    assert_eq!(GridFunction::read_from(&buf[..]).unwrap(), f);
    buf[0] = b'X';
    assert!(GridFunction::read_from(&buf[..]).is_err());
}

fn parseval(f: &GridFunction) -> (f64, f64) {
    let g = f.spec();
    let cell = g.h().powi(g.d() as i32);
    let space: f64 = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * cell;
    let freq: f64 = dft_forward(f).coeffs().iter().map(|v| v.norm_sqr()).sum::<f64>() / g.box_length().powi(g.d() as i32);
    (space, freq)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partition_of_unity(r in 0.0f64..1e4, n in 0usize..14) {
        let total = partition_sum(n, r);
        prop_assert!((total - chi(r / (n as f64).exp2())).abs() < 1e-12);
        if r <= (n as f64).exp2() {
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_parseval(seed in any::<u64>(), two_d in any::<bool>()) {
        let g = if two_d { grid2(128) } else { grid1(256) };
        let f = random_function(g, seed);
        let back = dft_inverse(&dft_forward(&f));
        prop_assert!(max_diff(&back, &f) <= 1e-12 * f.sup_norm());
        let (a, b) = parseval(&f);
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn multiplier_is_linear(seed in any::<u64>(), al in -3.0f64..3.0, be in -3.0f64..3.0) {
        let g = grid2(128);
        let f = random_function(g, seed);
        let h = random_function(g, seed ^ 0xabcdef);
        let (a, b) = (Complex64::new(al, 0.5), Complex64::new(be, -1.0));
        let sym = SampledSymbol::radial(&g, 2, |r| (1.0 + r * r).powf(-0.3));
        let lhs = apply_multiplier(&sym, &f.scale(a).add(&h.scale(b)).unwrap()).unwrap();
        let rhs = apply_multiplier(&sym, &f).unwrap().scale(a).add(&apply_multiplier(&sym, &h).unwrap().scale(b)).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12 * (1.0 + lhs.sup_norm()));
    }

    #[test]
    fn blocks_sum_to_band_limited_input(seed in any::<u64>()) {
        let g = grid1(512);
        let f = band_limited(g, (g.n_max() as f64).exp2(), seed);
        let mut acc = GridFunction::zeros(g);
        for b in lp_blocks(&f) {
            acc = acc.add(&b).unwrap();
        }
        prop_assert!(max_diff(&acc, &f) <= 1e-12 * f.sup_norm());
    }
}
