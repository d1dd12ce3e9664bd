//! Periodic grids, physical-unit Fourier transforms and dyadic Littlewood-Paley blocks.
//!
//! The box `[-L/2, L/2)^d` is sampled at `x_j = (j - N/2) h` with `h = L/N`; frequencies live on
//! `xi_k = 2 pi k / L` for `k` in `-N/2..N/2`. Spectra are stored in FFT index order.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;

/// Upper end of the transition interval of [`chi`]; `chi` is 1 on `[0, 1]` and 0 from here on.
pub const CHI_EDGE: f64 = 1.5;

/// Minimum number of dyadic bands a grid must resolve.
pub const MIN_BANDS: usize = 6;

const MAGIC: &[u8; 8] = b"ANISOGRD";
const HEADER_LEN: usize = 64;

/// Validated description of a periodic grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    d: usize,
    d_s: usize,
    n: usize,
    l: f64,
    k_rad: f64,
    n_max: usize,
}

/// Build a grid, checking the padding and band-count guards.
pub fn make_grid(d: usize, d_s: usize, n: usize, l: f64, k_rad: f64) -> Result<GridSpec> {
    GridSpec::new(d, d_s, n, l, k_rad)
}

impl GridSpec {
    pub fn new(d: usize, d_s: usize, n: usize, l: f64, k_rad: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension {d} not in 1..=3")));
        }
        if d_s > d {
            return Err(Error::InvalidGrid(format!("stable dimension {d_s} exceeds d = {d}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("N = {n} is not a power of two")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("box length {l} must be positive")));
        }
        if !(k_rad.is_finite() && k_rad > 0.0) {
            return Err(Error::InvalidGrid(format!("support radius {k_rad} must be positive")));
        }
        if k_rad > l / 4.0 {
            return Err(Error::InvalidGrid(format!("support radius {k_rad} exceeds L/4 = {}", l / 4.0)));
        }
        let guard = PI * n as f64 / (2.0 * l);
        if guard < (1u64 << MIN_BANDS) as f64 {
            return Err(Error::InvalidGrid(format!(
                "only {} dyadic bands fit below pi N / (2L) = {guard:.3}; need {MIN_BANDS}",
                band_count(guard)
            )));
        }
        let n_max = band_count(guard) - 1;
        Ok(GridSpec { d, d_s, n, l, k_rad, n_max })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn d_s(&self) -> usize {
        self.d_s
    }
    pub fn d_u(&self) -> usize {
        self.d - self.d_s
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn box_length(&self) -> f64 {
        self.l
    }
    pub fn support_radius(&self) -> f64 {
        self.k_rad
    }
    /// Largest band `n` with `2^{n+1} <= pi N / (2L)`.
    pub fn n_max(&self) -> usize {
        self.n_max
    }
    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }
    /// Frequency lattice spacing `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.l
    }
    pub fn guard(&self) -> f64 {
        PI * self.n as f64 / (2.0 * self.l)
    }
    pub fn nyquist(&self) -> f64 {
        PI * self.n as f64 / self.l
    }
    /// Number of lattice points.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn coord(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.h()
    }
    /// Signed frequency index of FFT slot `k`.
    pub fn signed(&self, k: usize) -> i64 {
        signed_index(k, self.n)
    }
    pub fn freq(&self, k: usize) -> f64 {
        self.dk() * self.signed(k) as f64
    }

    /// Same grid with a different resolution.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        GridSpec::new(self.d, self.d_s, n, self.l, self.k_rad)
    }

    /// Same box and resolution in another dimension.
    pub fn with_dims(&self, d: usize, d_s: usize) -> Result<Self> {
        GridSpec::new(d, d_s, self.n, self.l, self.k_rad)
    }

    /// Spatial coordinates of the flat lattice index `flat`.
    pub fn point(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for a in (0..self.d).rev() {
            out[a] = self.coord(rem % self.n);
            rem /= self.n;
        }
    }

    /// Euclidean frequency norms on the `dims`-dimensional lattice of this grid.
    pub fn freq_norms(&self, dims: usize) -> Vec<f64> {
        let len = self.n.pow(dims as u32);
        let mut out = vec![0.0; len];
        let axis: Vec<f64> = (0..self.n).map(|k| self.freq(k)).collect();
        for (flat, v) in out.iter_mut().enumerate() {
            let mut rem = flat;
            let mut acc = 0.0;
            for _ in 0..dims {
                let x = axis[rem % self.n];
                acc += x * x;
                rem /= self.n;
            }
            *v = acc.sqrt();
        }
        out
    }

    fn check_band(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            Err(Error::BandOutOfRange { band: n as i64, n_max: self.n_max })
        } else {
            Ok(())
        }
    }
}

fn band_count(guard: f64) -> usize {
    let mut count = 0;
    while ((1u64 << (count + 1)) as f64) <= guard {
        count += 1;
    }
    count
}

pub(crate) fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn smooth_h(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// The C-infinity cutoff: 1 on `[0, 1]`, 0 on `[CHI_EDGE, inf)`, monotone in between.
pub fn chi(x: f64) -> f64 {
    if x <= 1.0 {
        return 1.0;
    }
    if x >= CHI_EDGE {
        return 0.0;
    }
    let w = CHI_EDGE - 1.0;
    let a = smooth_h((CHI_EDGE - x) / w);
    let b = smooth_h((x - 1.0) / w);
    a / (a + b)
}

/// Dyadic window `psi_n` as a function of `|xi|`.
pub fn psi(n: usize, r: f64) -> f64 {
    if n == 0 {
        chi(r)
    } else {
        let s = (n as f64).exp2();
        chi(r / s) - chi(2.0 * r / s)
    }
}

/// Support of `psi_n` in `|xi|`: the closed interval outside which it vanishes.
pub fn psi_support(n: usize) -> (f64, f64) {
    if n == 0 {
        (0.0, CHI_EDGE)
    } else {
        let s = (n as f64).exp2();
        (0.5 * s, CHI_EDGE * s)
    }
}

/// Real symbol sampled on a `dim`-dimensional frequency lattice.
pub trait LatticeSymbol {
    fn lattice(&self) -> (usize, f64, usize);
    fn symbol_values(&self) -> &[f64];
}

/// `psi_n` sampled on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWindow {
    pub band: usize,
    pub dim: usize,
    n: usize,
    l: f64,
    values: Vec<f64>,
}

impl SpectralWindow {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    /// The annulus (ball for band 0) outside which the window vanishes.
    pub fn support(&self) -> (f64, f64) {
        psi_support(self.band)
    }
}

impl LatticeSymbol for SpectralWindow {
    fn lattice(&self) -> (usize, f64, usize) {
        (self.n, self.l, self.dim)
    }
    fn symbol_values(&self) -> &[f64] {
        &self.values
    }
}

/// Arbitrary real symbol on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSymbol {
    pub dim: usize,
    n: usize,
    l: f64,
    values: Vec<f64>,
}

impl SampledSymbol {
    /// Sample a radial symbol `a(|xi|)` on the `dim`-dimensional lattice of `spec`.
    pub fn radial(spec: &GridSpec, dim: usize, a: impl Fn(f64) -> f64) -> Self {
        let values = spec.freq_norms(dim).into_iter().map(a).collect();
        SampledSymbol { dim, n: spec.n, l: spec.l, values }
    }

    pub fn from_values(spec: &GridSpec, dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.n.pow(dim as u32) {
            return Err(Error::SpecMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("symbol values must be finite".into()));
        }
        Ok(SampledSymbol { dim, n: spec.n, l: spec.l, values })
    }
}

impl LatticeSymbol for SampledSymbol {
    fn lattice(&self) -> (usize, f64, usize) {
        (self.n, self.l, self.dim)
    }
    fn symbol_values(&self) -> &[f64] {
        &self.values
    }
}

/// Sample `psi_n` on the `dim`-dimensional lattice of `spec`.
pub fn make_dyadic_window(n: usize, dim: usize, spec: &GridSpec) -> Result<SpectralWindow> {
    spec.check_band(n)?;
    let values = spec.freq_norms(dim).into_iter().map(|r| psi(n, r)).collect();
    Ok(SpectralWindow { band: n, dim, n: spec.n, l: spec.l, values })
}

/// Complex samples on the spatial lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::SpecMismatch);
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter("grid values must be finite".into()));
        }
        Ok(GridFunction { spec, values })
    }

    pub(crate) fn from_raw(spec: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        GridFunction { spec, values }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        GridFunction { spec, values: vec![Complex64::new(0.0, 0.0); spec.len()] }
    }

    pub fn constant(spec: GridSpec, c: Complex64) -> Self {
        GridFunction { spec, values: vec![c; spec.len()] }
    }

    /// Sample `f` at every lattice point.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut x = vec![0.0; spec.d];
        let values = (0..spec.len())
            .map(|i| {
                spec.point(i, &mut x);
                f(&x)
            })
            .collect();
        GridFunction { spec, values }
    }

    pub fn from_real_fn(spec: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(spec, |x| Complex64::new(f(x), 0.0))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus outside the ball of radius `K_rad`.
    pub fn support_leak(&self) -> f64 {
        let r2 = self.spec.k_rad * self.spec.k_rad;
        let mut x = vec![0.0; self.spec.d];
        let mut leak = 0.0f64;
        for (i, v) in self.values.iter().enumerate() {
            self.spec.point(i, &mut x);
            if x.iter().map(|c| c * c).sum::<f64>() > r2 {
                leak = leak.max(v.norm());
            }
        }
        leak
    }

    pub fn is_supported_in_k(&self) -> bool {
        self.support_leak() < 1e-12
    }

    pub fn scale(&self, a: Complex64) -> Self {
        GridFunction { spec: self.spec, values: self.values.iter().map(|v| v * a).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    fn zip(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect();
        Ok(GridFunction { spec: self.spec, values })
    }

    /// Cyclic lattice shift: `result(x) = self(x + shift * h)`.
    pub fn shifted(&self, shift: &[i64]) -> Self {
        let n = self.spec.n;
        let d = self.spec.d;
        let mut values = vec![Complex64::new(0.0, 0.0); self.values.len()];
        let mut idx = vec![0usize; d];
        for (flat, out) in values.iter_mut().enumerate() {
            let mut rem = flat;
            for a in (0..d).rev() {
                idx[a] = rem % n;
                rem /= n;
            }
            let mut src = 0usize;
            for a in 0..d {
                let j = (idx[a] as i64 + shift[a]).rem_euclid(n as i64) as usize;
                src = src * n + j;
            }
            *out = self.values[src];
        }
        GridFunction { spec: self.spec, values }
    }

    /// Write the binary grid format: 64-byte header then little-endian `(re, im)` pairs.
    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        let mut header = [0u8; HEADER_LEN];
        header[..8].copy_from_slice(MAGIC);
        header[8..12].copy_from_slice(&(self.spec.d as u32).to_le_bytes());
        header[12..16].copy_from_slice(&(self.spec.d_s as u32).to_le_bytes());
        header[16..24].copy_from_slice(&(self.spec.n as u64).to_le_bytes());
        header[24..32].copy_from_slice(&self.spec.l.to_le_bytes());
        header[32..40].copy_from_slice(&self.spec.k_rad.to_le_bytes());
        w.write_all(&header)?;
        let mut buf = Vec::with_capacity(self.values.len() * 16);
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header).map_err(|e| Error::Format(e.to_string()))?;
        if &header[..8] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let n = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
        let spec = GridSpec::new(u32_at(8), u32_at(12), n, f64_at(24), f64_at(32))?;
        let mut bytes = vec![0u8; spec.len() * 16];
        r.read_exact(&mut bytes).map_err(|e| Error::Format(e.to_string()))?;
        let values = bytes
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        GridFunction::new(spec, values)
    }
}

/// Physical-unit spectrum `F(xi_k)`, FFT index order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFunction {
    spec: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectrumFunction {
    pub fn new(spec: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != spec.len() {
            return Err(Error::SpecMismatch);
        }
        Ok(SpectrumFunction { spec, coeffs })
    }
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    /// Coefficient at the signed frequency multi-index `k`.
    pub fn at(&self, k: &[i64]) -> Complex64 {
        let n = self.spec.n as i64;
        let flat = k.iter().fold(0usize, |acc, &ki| acc * self.spec.n + ki.rem_euclid(n) as usize);
        self.coeffs[flat]
    }
}

fn parity_sign(flat: usize, n: usize, dims: usize) -> f64 {
    let mut rem = flat;
    let mut s = 0usize;
    for _ in 0..dims {
        s += rem % n;
        rem /= n;
    }
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `F(f)(xi) = sum_x h^d f(x) e^{-i x xi}`.
pub fn dft_forward(f: &GridFunction) -> SpectrumFunction {
    let spec = f.spec;
    let mut data = f.values.clone();
    fft::transform(&mut data, spec.n, spec.d, false);
    let cell = spec.h().powi(spec.d as i32);
    for (k, v) in data.iter_mut().enumerate() {
        *v *= cell * parity_sign(k, spec.n, spec.d);
    }
    SpectrumFunction { spec, coeffs: data }
}

/// `f(x) = (2 pi)^{-d} sum_xi (2 pi / L)^d F(xi) e^{i x xi}`.
pub fn dft_inverse(spec_fn: &SpectrumFunction) -> GridFunction {
    let spec = spec_fn.spec;
    let mut data: Vec<Complex64> = spec_fn
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, v)| v * parity_sign(k, spec.n, spec.d))
        .collect();
    fft::transform(&mut data, spec.n, spec.d, true);
    let norm = spec.l.powi(-(spec.d as i32));
    for v in &mut data {
        *v *= norm;
    }
    GridFunction { spec, values: data }
}

/// Unnormalised FFT of the samples; multipliers act on it directly since real symbols commute
/// with the parity factors.
#[derive(Debug, Clone)]
pub struct RawSpectrum {
    spec: GridSpec,
    data: Vec<Complex64>,
}

impl RawSpectrum {
    pub fn of(f: &GridFunction) -> Self {
        let mut data = f.values.clone();
        fft::transform(&mut data, f.spec.n, f.spec.d, false);
        RawSpectrum { spec: f.spec, data }
    }

    pub(crate) fn from_data(spec: GridSpec, data: Vec<Complex64>) -> Self {
        RawSpectrum { spec, data }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub(crate) fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Inverse transform of `a * self`.
    pub fn apply(&self, a: &[f64]) -> GridFunction {
        let mut data: Vec<Complex64> = self.data.iter().zip(a).map(|(v, s)| v * s).collect();
        fft::transform(&mut data, self.spec.n, self.spec.d, true);
        let norm = 1.0 / self.spec.len() as f64;
        for v in &mut data {
            *v *= norm;
        }
        GridFunction { spec: self.spec, values: data }
    }

    /// Fraction of spectral energy at `|xi| > radius`.
    pub fn energy_outside(&self, radius: f64) -> f64 {
        let norms = self.spec.freq_norms(self.spec.d);
        let mut total = 0.0;
        let mut outside = 0.0;
        for (v, r) in self.data.iter().zip(&norms) {
            let e = v.norm_sqr();
            total += e;
            if *r > radius {
                outside += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }
}

/// `F^{-1}(a F f)` for a real symbol sampled on `f`'s lattice.
pub fn apply_multiplier(a: &impl LatticeSymbol, f: &GridFunction) -> Result<GridFunction> {
    let (n, l, dim) = a.lattice();
    if n != f.spec.n || l != f.spec.l || dim != f.spec.d {
        return Err(Error::SpecMismatch);
    }
    Ok(RawSpectrum::of(f).apply(a.symbol_values()))
}

/// `S_n f`; band `-1` gives zero.
pub fn lp_block(n: i64, f: &GridFunction) -> Result<GridFunction> {
    if n < 0 {
        return Ok(GridFunction::zeros(f.spec));
    }
    let w = make_dyadic_window(n as usize, f.spec.d, &f.spec)?;
    apply_multiplier(&w, f)
}

/// `S^j f = sum_{k <= j} S_k f`, computed with the single symbol `chi(2^{-j} |xi|)`.
pub fn lp_partial_sum(j: i64, f: &GridFunction) -> Result<GridFunction> {
    if j < 0 {
        return Ok(GridFunction::zeros(f.spec));
    }
    f.spec.check_band(j as usize)?;
    let s = (j as f64).exp2();
    let a = SampledSymbol::radial(&f.spec, f.spec.d, |r| chi(r / s));
    apply_multiplier(&a, f)
}

/// All blocks `S_0 f, ..., S_{n_max} f` from one forward transform.
pub fn lp_blocks(f: &GridFunction) -> Vec<GridFunction> {
    let raw = RawSpectrum::of(f);
    let norms = f.spec.freq_norms(f.spec.d);
    (0..=f.spec.n_max)
        .map(|n| {
            let a: Vec<f64> = norms.iter().map(|&r| psi(n, r)).collect();
            raw.apply(&a)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2() -> GridSpec {
        make_grid(2, 1, 64, PI / 4.0, PI / 16.0).unwrap()
    }

    #[test]
    fn chi_plateaus() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(CHI_EDGE), 0.0);
        assert_eq!(chi(3.0), 0.0);
        // midpoint of the transition is exactly one half by symmetry
        assert!((chi(1.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn n_max_formula() {
        // pi * 512 / (2 * 8 pi) = 32, so 2^{n+1} <= 32 gives 4: too few bands
        assert!(make_grid(1, 1, 512, 8.0 * PI, 2.0 * PI).is_err());
        let g = make_grid(1, 1, 256, PI, PI / 4.0).unwrap();
        assert_eq!(g.n_max(), 6);
        assert!(make_grid(1, 1, 500, 16.0, 4.0).is_err());
    }

    #[test]
    fn shift_is_cyclic() {
        let g = grid2();
        let f = GridFunction::from_fn(g, |x| Complex64::new(x[0], x[1]));
        let s = f.shifted(&[1, -2]);
        let h = g.h();
        let v = s.values()[0];
        assert!((v.re - (g.coord(1))).abs() < 1e-12 && (v.re - (-g.box_length() / 2.0 + h)).abs() < 1e-12);
        assert!((v.im - g.coord(g.n() - 2)).abs() < 1e-12);
    }

    #[test]
    fn binary_round_trip() {
        let g = grid2();
        let f = GridFunction::from_fn(g, |x| Complex64::new(x[0].sin(), x[1] * x[0]));
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 64 + g.len() * 16);
        assert_eq!(&buf[..8], b"ANISOGRD");
        let back = GridFunction::read_from(&buf[..]).unwrap();
        assert_eq!(back, f);
    }
}
