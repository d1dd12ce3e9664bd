//! Numerical checks of the dyadic partition itself.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid_spectral::{dft_forward, dft_inverse, lp_block, lp_blocks, psi, GridFunction, GridSpec};

use super::corpus::random_trig_polynomial;

fn sup_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `||sum_n S_n f - f||_inf / ||f||_inf` for a random `f` band-limited to `|xi| <= 2^{n_max}`.
pub fn partition_defect(grid: &GridSpec, seed: u64) -> f64 {
    let f = random_trig_polynomial(grid, (grid.n_max() as f64).exp2(), seed);
    let mut acc = GridFunction::zeros(*grid);
    for b in lp_blocks(&f) {
        acc = acc.add(&b).expect("same grid");
    }
    sup_diff(&acc, &f) / f.sup_norm()
}

/// `max ||S_n S_m f||_inf / ||f||_inf` over `|n - m| >= 2` and `trials` random `f`.
pub fn orthogonality_defect(grid: &GridSpec, trials: usize, seed: u64) -> Result<f64> {
    let radius = grid.nyquist();
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let f = random_trig_polynomial(grid, radius, seed.wrapping_add(trial as u64));
        let scale = f.sup_norm();
        let blocks = lp_blocks(&f);
        for (m, bm) in blocks.iter().enumerate() {
            for n in (m + 2)..blocks.len() {
                let g = lp_block(n as i64, bm)?;
                worst = worst.max(g.sup_norm() / scale);
            }
        }
    }
    Ok(worst)
}

/// `||F^{-1} F f - f||_inf / ||f||_inf`.
pub fn round_trip_error(f: &GridFunction) -> f64 {
    let back = dft_inverse(&dft_forward(f));
    let scale = f.sup_norm();
    if scale == 0.0 {
        return sup_diff(&back, f);
    }
    sup_diff(&back, f) / scale
}

/// Discrete `L_1` norm of the periodised kernel `F^{-1} psi_n`.
pub fn kernel_l1_mass(grid: &GridSpec, n: usize) -> Result<f64> {
    if n > grid.n_max() {
        return Err(Error::BandOutOfRange { band: n as i64, n_max: grid.n_max() });
    }
    let mut data: Vec<Complex64> = grid.freq_norms(grid.d()).iter().map(|r| Complex64::new(psi(n, *r), 0.0)).collect();
    fft::transform(&mut data, grid.n(), grid.d(), true);
    Ok(data.iter().map(|v| v.norm()).sum::<f64>() / grid.len() as f64)
}

/// `max` over the lattice of the centred difference of `psi_n` along the first frequency axis,
/// for every `n` in `bands`.
pub fn derivative_decay(grid: &GridSpec, bands: std::ops::RangeInclusive<usize>) -> Result<Vec<(usize, f64)>> {
    let dk = grid.dk();
    let n_grid = grid.n();
    let half = (n_grid / 2) as i64;
    let mut out = Vec::new();
    for n in bands {
        if n > grid.n_max() {
            return Err(Error::BandOutOfRange { band: n as i64, n_max: grid.n_max() });
        }
        let mut best = 0.0f64;
        let rest = grid.len() / n_grid;
        for j in 0..rest {
            let mut tail2 = 0.0;
            let mut rem = j;
            for _ in 1..grid.d() {
                let k = (rem % n_grid) as i64 - half;
                tail2 += (k as f64 * dk).powi(2);
                rem /= n_grid;
            }
            for k in -half + 1..half - 1 {
                let at = |m: i64| psi(n, ((m as f64 * dk).powi(2) + tail2).sqrt());
                best = best.max(((at(k + 1) - at(k - 1)) / (2.0 * dk)).abs());
            }
        }
        out.push((n, best));
    }
    Ok(out)
}
