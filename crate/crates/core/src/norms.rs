//! Quadrature L_p norms, B^s_{p,inf} and H^t_p norms, and the Nikol'skij probe.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid_spectral::{lp_blocks, psi, GridFunction, LatticeSymbol, RawSpectrum, SampledSymbol};

/// Out-of-band energy fraction tolerated by [`nikolskij_ratio`].
pub const BAND_LIMIT_TOL: f64 = 1e-10;

/// Exponent triple `(p, s, t)` with smoothness budget `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormParams {
    pub p: f64,
    pub s: f64,
    pub t: f64,
    pub r: f64,
}

impl NormParams {
    pub fn new(p: f64, s: f64, t: f64, r: f64) -> Result<Self> {
        if !(p > 1.0) || p.is_nan() {
            return Err(Error::InvalidParameter(format!("p = {p} must lie in (1, inf]")));
        }
        if !(s.is_finite() && t.is_finite()) {
            return Err(Error::InvalidParameter("s and t must be finite".into()));
        }
        if !(r > 1.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("r = {r} must exceed 1")));
        }
        Ok(NormParams { p, s, t, r })
    }

    /// Conjugate exponent; 1 when `p` is infinite.
    pub fn p_prime(&self) -> f64 {
        conjugate(self.p)
    }

    /// `p in (1, inf)` and `max{t - (r-1), -1 + 1/p} < s < -t < 0`.
    pub fn is_admissible(&self) -> bool {
        self.p.is_finite()
            && self.p > 1.0
            && (self.t - (self.r - 1.0)).max(-1.0 + 1.0 / self.p) < self.s
            && self.s < -self.t
            && -self.t < 0.0
    }

    /// The weaker range `t - (r-1) < s < -t < 0` on which the anisotropic norm is defined.
    pub fn in_norm_range(&self) -> bool {
        self.t - (self.r - 1.0) < self.s && self.s < -self.t && -self.t < 0.0
    }

    pub fn check_admissible(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(Error::Inadmissible(format!(
                "(p, s, t, r) = ({}, {}, {}, {}) violates max(t-(r-1), -1+1/p) < s < -t < 0",
                self.p, self.s, self.t, self.r
            )))
        }
    }
}

/// `p / (p - 1)`, with the conventions `1' = inf` and `inf' = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p = {p} must be at least 1")))
    }
}

/// Weighted rectangle rule `(cell * sum w |v|^p)^{1/p}`; the lattice max for `p = inf`.
pub(crate) fn weighted_lp(values: &[Complex64], weights: Option<&[f64]>, cell: f64, p: f64) -> f64 {
    let m = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return m;
    }
    let sum: f64 = match weights {
        Some(w) => values.iter().zip(w).map(|(v, w)| w * (v.norm() / m).powf(p)).sum(),
        None if p == 2.0 => values.iter().map(|v| v.norm_sqr()).sum::<f64>() / (m * m),
        None => values.iter().map(|v| (v.norm() / m).powf(p)).sum(),
    };
    m * (cell * sum).powf(1.0 / p)
}

pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    let cell = f.spec().h().powi(f.spec().d() as i32);
    Ok(weighted_lp(f.values(), None, cell, p))
}

/// Value of a dyadic max-norm together with the band attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesovReport {
    pub value: f64,
    pub band: usize,
    pub n_max: usize,
}

/// `max_{l <= n_max} 2^{l s} ||S_l f||_p`.
pub fn besov_norm(f: &GridFunction, s: f64, p: f64) -> Result<BesovReport> {
    check_p(p)?;
    if f.spec().n_max() < 2 {
        return Err(Error::InvalidGrid("band budget exhausted".into()));
    }
    let table = band_norms(f, p)?;
    Ok(besov_from_table(&table, s, f.spec().n_max()))
}

/// `||S_l f||_p` for every band.
pub fn band_norms(f: &GridFunction, p: f64) -> Result<Vec<f64>> {
    check_p(p)?;
    lp_blocks(f).iter().map(|b| lp_norm(b, p)).collect()
}

pub(crate) fn besov_from_table(table: &[f64], s: f64, n_max: usize) -> BesovReport {
    let mut best = BesovReport { value: 0.0, band: 0, n_max };
    for (l, v) in table.iter().enumerate() {
        let w = (l as f64 * s).exp2() * v;
        if w > best.value {
            best.value = w;
            best.band = l;
        }
    }
    best
}

/// `||(1 + |xi|^2)^{t/2} f||_p`.
pub fn sobolev_norm(f: &GridFunction, t: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    let a = SampledSymbol::radial(f.spec(), f.spec().d(), |r| (1.0 + r * r).powf(t / 2.0));
    let g = RawSpectrum::of(f).apply(a.symbol_values());
    lp_norm(&g, p)
}

/// `||f||_p / (M^{D (1/p1 - 1/p)} ||f||_{p1})` for `f` band-limited to `|xi| <= M`.
pub fn nikolskij_ratio(f: &GridFunction, p: f64, p1: f64, m: f64) -> Result<f64> {
    check_p(p1)?;
    if !(p > p1) {
        return Err(Error::InvalidParameter(format!("need p > p1, got p = {p}, p1 = {p1}")));
    }
    if !(m > 0.0) {
        return Err(Error::InvalidParameter(format!("band radius M = {m} must be positive")));
    }
    let leak = RawSpectrum::of(f).energy_outside(m);
    if leak >= BAND_LIMIT_TOL {
        return Err(Error::NotBandLimited(leak));
    }
    let dim = f.spec().d() as f64;
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let scale = m.powf(dim * (1.0 / p1 - inv_p));
    let denom = scale * lp_norm(f, p1)?;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(lp_norm(f, p)? / denom)
}

/// Sum of `psi_l(|xi|)` over `l <= n`; equals `chi(2^{-n}|xi|)`.
pub fn partition_sum(n: usize, r: f64) -> f64 {
    (0..=n).map(|l| psi(l, r)).sum()
}
