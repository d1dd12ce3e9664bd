//! Paraproduct decomposition and the probes built on it.

use num_complex::Complex64;
use serde::Serialize;

use crate::aniso::leaf_block_norms;
use crate::error::{Error, Result};
use crate::grid_spectral::{dft_forward, dft_inverse, lp_blocks, psi, GridFunction, GridSpec, RawSpectrum, SpectrumFunction};
use crate::leaves::{AdmissibleLeaf, LeafFamily, LeafStack};
use crate::norms::{besov_norm, conjugate, lp_norm};

/// Relative kernel magnitude treated as numerically zero.
pub const KERNEL_ZERO: f64 = 1e-10;

/// Relative kernel magnitude below which values are round-off.
pub const KERNEL_FLOOR: f64 = 1e-14;

/// Low-high, high-high and high-low parts of `f g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParaproductTerms {
    pub pi1: GridFunction,
    pub pi2: GridFunction,
    pub pi3: GridFunction,
    pub j_max: usize,
    /// `||Pi1 + Pi2 + Pi3 - f g||_inf`.
    pub residual: f64,
    /// `residual / (||f||_inf ||g||_inf)`.
    pub relative_residual: f64,
}

fn accumulate(acc: &mut [Complex64], a: &GridFunction, b: &GridFunction) {
    for ((o, x), y) in acc.iter_mut().zip(a.values()).zip(b.values()) {
        *o += x * y;
    }
}

/// `sum_{k=2}^{j_max} S^{k-2} a . S_k b` from precomputed blocks.
fn low_high(a: &[GridFunction], b: &[GridFunction], j_max: usize) -> GridFunction {
    let spec = *a[0].spec();
    let mut out = vec![Complex64::new(0.0, 0.0); spec.len()];
    let mut low = vec![Complex64::new(0.0, 0.0); spec.len()];
    for k in 2..=j_max {
        for (o, v) in low.iter_mut().zip(a[k - 2].values()) {
            *o += v;
        }
        for ((o, x), y) in out.iter_mut().zip(&low).zip(b[k].values()) {
            *o += x * y;
        }
    }
    GridFunction::from_raw(spec, out)
}

fn block_or_zero(blocks: &[GridFunction], k: i64) -> Option<&GridFunction> {
    if k < 0 {
        None
    } else {
        blocks.get(k as usize)
    }
}

/// Split `f g` into the three paraproducts truncated at `j_max`.
pub fn paraproduct_split(f: &GridFunction, g: &GridFunction, j_max: usize) -> Result<ParaproductTerms> {
    if f.spec() != g.spec() {
        return Err(Error::SpecMismatch);
    }
    let spec = *f.spec();
    if j_max > spec.n_max() {
        return Err(Error::BandOutOfRange { band: j_max as i64, n_max: spec.n_max() });
    }
    let fb = lp_blocks(f);
    let gb = lp_blocks(g);
    let pi1 = low_high(&fb, &gb, j_max);
    let pi3 = low_high(&gb, &fb, j_max);
    let mut acc = vec![Complex64::new(0.0, 0.0); spec.len()];
    for k in 0..=j_max as i64 {
        for j in k - 1..=k + 1 {
            if let Some(fj) = block_or_zero(&fb, j) {
                accumulate(&mut acc, fj, &gb[k as usize]);
            }
        }
    }
    let pi2 = GridFunction::from_raw(spec, acc);
    let fg = f.mul(g)?;
    let residual = pi1
        .values()
        .iter()
        .zip(pi2.values())
        .zip(pi3.values())
        .zip(fg.values())
        .map(|(((a, b), c), d)| (a + b + c - d).norm())
        .fold(0.0, f64::max);
    let scale = f.sup_norm() * g.sup_norm();
    let relative_residual = if scale > 0.0 { residual / scale } else { residual };
    Ok(ParaproductTerms { pi1, pi2, pi3, j_max, residual, relative_residual })
}

/// Which spectral support fact to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportFact {
    /// `S^{k-2} f . S_k g` lives in `2^{k-3} <= |xi| <= 2^{k+1}`.
    LowHigh,
    /// `(S_{k-1} + S_k + S_{k+1}) f . S_k g` lives in `|xi| <= 5 . 2^k`.
    HighHigh,
}

/// Fraction of spectral energy of the relevant product outside its predicted region.
pub fn support_check(kind: SupportFact, k: usize, f: &GridFunction, g: &GridFunction) -> Result<f64> {
    if f.spec() != g.spec() {
        return Err(Error::SpecMismatch);
    }
    let spec = *f.spec();
    let kf = k as f64;
    let (inner, outer, top_band) = match kind {
        SupportFact::LowHigh => {
            if k < 2 {
                return Err(Error::InvalidParameter("the low-high fact needs k >= 2".into()));
            }
            ((kf - 3.0).exp2(), (kf + 1.0).exp2(), k)
        }
        SupportFact::HighHigh => (0.0, 5.0 * kf.exp2(), k + 1),
    };
    if outer > spec.nyquist() || top_band > spec.n_max() {
        return Err(Error::InvalidParameter(format!(
            "region up to |xi| = {outer} (band {top_band}) exceeds the resolved range of this grid"
        )));
    }
    let fb = lp_blocks(f);
    let gb = lp_blocks(g);
    let mut acc = vec![Complex64::new(0.0, 0.0); spec.len()];
    match kind {
        SupportFact::LowHigh => {
            for j in 0..=k - 2 {
                accumulate(&mut acc, &fb[j], &gb[k]);
            }
        }
        SupportFact::HighHigh => {
            for j in k as i64 - 1..=k as i64 + 1 {
                if let Some(fj) = block_or_zero(&fb, j) {
                    accumulate(&mut acc, fj, &gb[k]);
                }
            }
        }
    }
    let raw = RawSpectrum::of(&GridFunction::from_raw(spec, acc));
    let norms = spec.freq_norms(spec.d());
    let tol = 1e-9 * outer;
    let (mut total, mut outside) = (0.0, 0.0);
    for (v, r) in raw.data().iter().zip(&norms) {
        let e = v.norm_sqr();
        total += e;
        if *r < inner - tol || *r > outer + tol {
            outside += e;
        }
    }
    Ok(if total > 0.0 { outside / total } else { 0.0 })
}

/// `max_k max_x |S_k f(x) - S_k f(x_1, x_2 = .. = -L/2)| / ||f||_inf`.
pub fn single_coordinate_deviation(f: &GridFunction) -> Result<f64> {
    let spec = *f.spec();
    if spec.d() < 2 {
        return Err(Error::InvalidParameter("needs d >= 2".into()));
    }
    let scale = f.sup_norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let stride = spec.len() / spec.n();
    let mut dev = 0.0f64;
    for block in lp_blocks(f) {
        let v = block.values();
        for (i, x) in v.iter().enumerate() {
            let base = v[(i / stride) * stride];
            dev = dev.max((x - base).norm());
        }
    }
    Ok(dev / scale)
}

/// Largest variation of the samples themselves along `x_2, .., x_d`, relative to `||f||_inf`.
pub fn coordinate_variation(f: &GridFunction) -> f64 {
    let spec = *f.spec();
    let scale = f.sup_norm();
    if spec.d() < 2 || scale == 0.0 {
        return 0.0;
    }
    let stride = spec.len() / spec.n();
    let v = f.values();
    v.iter().enumerate().map(|(i, x)| (x - v[(i / stride) * stride]).norm()).fold(0.0, f64::max) / scale
}

/// The `x_1` profile of `g` as a one-dimensional grid function.
pub fn first_coordinate_profile(g: &GridFunction) -> Result<GridFunction> {
    let spec = *g.spec();
    let line = GridSpec::new(1, 1, spec.n(), spec.box_length(), spec.support_radius())?;
    let stride = spec.len() / spec.n();
    let values = (0..spec.n()).map(|j| g.values()[j * stride]).collect();
    GridFunction::new(line, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductProbe {
    pub ratio: f64,
    /// Whether `-1 + 1/p < s < 0`.
    pub in_lemma_range: bool,
    pub numerator: f64,
    pub f_norm: f64,
    pub g_besov: f64,
    pub g_sup: f64,
}

/// `||f g||_{B^s_{p,inf}} / (||f||_{B^s_{p,inf}} (||g||_{B^{1/p'}_{p',inf}(R)} + ||g||_inf))`
/// for `g` depending on `x_1` only.
pub fn product_inequality_ratio(f: &GridFunction, g: &GridFunction, s: f64, p: f64) -> Result<ProductProbe> {
    if f.spec() != g.spec() {
        return Err(Error::SpecMismatch);
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (1, inf)")));
    }
    let var = coordinate_variation(g);
    if var > 1e-12 {
        return Err(Error::InvalidParameter(format!("g varies along x_2.. by {var:e}")));
    }
    let pp = conjugate(p);
    let numerator = besov_norm(&f.mul(g)?, s, p)?.value;
    let f_norm = besov_norm(f, s, p)?.value;
    let g_besov = besov_norm(&first_coordinate_profile(g)?, 1.0 / pp, pp)?.value;
    let g_sup = g.sup_norm();
    let den = f_norm * (g_besov + g_sup);
    Ok(ProductProbe {
        ratio: if den > 0.0 { numerator / den } else { 0.0 },
        in_lemma_range: -1.0 + 1.0 / p < s && s < 0.0,
        numerator,
        f_norm,
        g_besov,
        g_sup,
    })
}

/// Kernel of `phi -> S~_{k_s}((S_k phi) o pi_Gamma^{-1})` probed on delta columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelProbe {
    pub k: usize,
    pub k_s: usize,
    pub c0: usize,
    pub coupled: bool,
    /// `max_{x,y} |V(x, y)|`.
    pub max_abs: f64,
    /// `max |V|` divided by `max_{x,y} |(S_k delta_y) o pi_Gamma^{-1}(x)|`.
    pub relative: f64,
    /// `max |V(x,y)| / (2^{-k_s r} b_k(pi_Gamma^{-1}(x) - y))`.
    pub envelope_ratio: f64,
    /// Ambient probe points `y`.
    pub probe_points: Vec<Vec<f64>>,
    /// `|V(x, y)|` on a chart sub-lattice of at most 64 points per axis, one row per probe point.
    pub kernel: Vec<Vec<f64>>,
}

/// `b_k(x) = 2^{dk} b(2^k x)` with `b = 1` on the unit ball and `|x|^{-d-1}` outside.
pub fn envelope(k: usize, x: &[f64]) -> f64 {
    let d = x.len() as i32;
    let s = (k as f64).exp2();
    let r = s * x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b = if r <= 1.0 { 1.0 } else { r.powi(-d - 1) };
    s.powi(d) * b
}

fn probe_points(spec: &GridSpec, leaf: &AdmissibleLeaf, k: usize) -> Vec<Vec<usize>> {
    let (d_s, d_u) = (spec.d_s(), spec.d_u());
    let h = spec.h();
    let n = spec.n();
    let kr = spec.support_radius();
    let per_axis = 5usize;
    let mut out = Vec::new();
    let idx = |x: f64| ((x / h).round() as i64 + (n / 2) as i64).rem_euclid(n as i64) as usize;
    let offsets: Vec<f64> = [-1.0, 0.0, 1.0].iter().map(|v| v * (-(k as f64)).exp2()).collect();
    let chart_count = per_axis.pow(d_s as u32);
    let mut z = vec![0.0; d_s];
    let mut g = vec![0.0; d_u];
    for c in 0..chart_count {
        let mut rem = c;
        for zi in z.iter_mut().rev() {
            *zi = -0.5 * kr + kr * (rem % per_axis) as f64 / (per_axis - 1) as f64;
            rem /= per_axis;
        }
        leaf.gamma(&z, &mut g);
        for o in 0..offsets.len().pow(d_u as u32) {
            let mut rem = o;
            let mut p: Vec<usize> = z.iter().map(|&v| idx(v)).collect();
            for gi in g.iter() {
                p.push(idx(gi + offsets[rem % offsets.len()]));
                rem /= offsets.len();
            }
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

fn delta_band(spec: &GridSpec, k: usize, at: &[usize]) -> RawSpectrum {
    let n = spec.n();
    let norms = spec.freq_norms(spec.d());
    let mass = spec.h().powi(-(spec.d() as i32));
    let data = norms
        .iter()
        .enumerate()
        .map(|(flat, r)| {
            let w = psi(k, *r);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut rem = flat;
            let mut phase = 0usize;
            for a in (0..spec.d()).rev() {
                phase += (rem % n) * at[a];
                rem /= n;
            }
            let ang = -2.0 * std::f64::consts::PI * (phase % n) as f64 / n as f64;
            Complex64::from_polar(w * mass, ang)
        })
        .collect();
    RawSpectrum::from_data(*spec, data)
}

/// Kernel magnitudes for every `k_s` in `k_s_list`, with the shared normaliser.
fn kernel_sweep(k: usize, k_s_list: &[usize], leaf: &AdmissibleLeaf, spec: &GridSpec, r: f64) -> Result<(f64, Vec<KernelProbe>)> {
    if k > spec.n_max() {
        return Err(Error::BandOutOfRange { band: k as i64, n_max: spec.n_max() });
    }
    leaf.check_in_box(spec)?;
    let points = probe_points(spec, leaf, k);
    let chart = crate::leaves::chart_spec(spec)?;
    let sub = (chart.n() / 64).max(1);
    let d_u = spec.d_u();
    let zero_b = vec![0.0; d_u];
    let mut normaliser = 0.0f64;
    let mut probes: Vec<KernelProbe> = k_s_list
        .iter()
        .map(|&k_s| KernelProbe {
            k,
            k_s,
            c0: 0,
            coupled: false,
            max_abs: 0.0,
            relative: 0.0,
            envelope_ratio: 0.0,
            probe_points: Vec::new(),
            kernel: Vec::new(),
        })
        .collect();
    let mut z = vec![0.0; chart.d()];
    let mut gz = vec![0.0; d_u];
    for p in &points {
        let y: Vec<f64> = p.iter().map(|&j| spec.coord(j)).collect();
        let raw = delta_band(spec, k, p);
        let stack = LeafStack::build(&raw, leaf)?;
        let restricted = stack.samples(&zero_b);
        normaliser = normaliser.max(restricted.iter().map(|v| v.norm()).fold(0.0, f64::max));
        for probe in probes.iter_mut() {
            if probe.k_s > chart.n_max() {
                return Err(Error::BandOutOfRange { band: probe.k_s as i64, n_max: chart.n_max() });
            }
            let v = stack.block(probe.k_s, &zero_b);
            let mut row = Vec::new();
            for (i, val) in v.iter().enumerate() {
                let a = val.norm();
                probe.max_abs = probe.max_abs.max(a);
                chart.point(i, &mut z);
                leaf.gamma(&z, &mut gz);
                let diff: Vec<f64> = z.iter().chain(gz.iter()).zip(&y).map(|(a, b)| a - b).collect();
                let env = (-(probe.k_s as f64) * r).exp2() * envelope(k, &diff);
                probe.envelope_ratio = probe.envelope_ratio.max(a / env);
                let on_sub = {
                    let mut rem = i;
                    let mut ok = true;
                    for _ in 0..chart.d() {
                        ok &= (rem % chart.n()) % sub == 0;
                        rem /= chart.n();
                    }
                    ok
                };
                if on_sub {
                    row.push(a);
                }
            }
            probe.kernel.push(row);
            probe.probe_points.push(y.clone());
        }
    }
    for probe in probes.iter_mut() {
        probe.relative = if normaliser > 0.0 { probe.max_abs / normaliser } else { 0.0 };
    }
    Ok((normaliser, probes))
}

/// Kernel probe at one band pair; requires `k_s > k + c0`.
pub fn wave_packet_kernel(k: usize, k_s: usize, leaf: &AdmissibleLeaf, spec: &GridSpec, c0: usize) -> Result<KernelProbe> {
    if k_s <= k + c0 {
        return Err(Error::InvalidParameter(format!("band separation k_s = {k_s} <= k + C0 = {}", k + c0)));
    }
    let (_, mut probes) = kernel_sweep(k, &[k_s], leaf, spec, leaf.bounds().r)?;
    let mut probe = probes.remove(0);
    probe.c0 = c0;
    Ok(probe)
}

/// Smallest separation `c` such that every leaf gives a numerically zero kernel for all
/// `k + c < k_s <= n_max`.
pub fn calibrate_separation(k: usize, leaves: &[AdmissibleLeaf], spec: &GridSpec) -> Result<usize> {
    let n_max = crate::leaves::chart_spec(spec)?.n_max();
    let list: Vec<usize> = (k + 1..=n_max).collect();
    let mut c0 = 0;
    for leaf in leaves {
        let (_, probes) = kernel_sweep(k, &list, leaf, spec, leaf.bounds().r)?;
        for probe in probes.iter().rev() {
            if probe.relative > KERNEL_ZERO {
                c0 = c0.max(probe.k_s - k);
                break;
            }
        }
    }
    Ok(c0)
}

/// Decay of `max |V|` in `k_s` for one leaf at fixed `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelDecay {
    pub k: usize,
    pub c0: usize,
    pub probes: Vec<KernelProbe>,
    /// Largest relative kernel over the separated bands.
    pub max_separated: f64,
    /// Minus the least-squares slope of `log2 max |V|` against `k_s`, if at least two points
    /// remain above the round-off floor.
    pub exponent: Option<f64>,
}

/// Sweep `k_s = k + 1 ..= n_max`, flagging `k_s <= k + c0` as coupled and fitting the rest.
pub fn kernel_decay(k: usize, leaf: &AdmissibleLeaf, spec: &GridSpec, c0: usize) -> Result<KernelDecay> {
    let n_max = crate::leaves::chart_spec(spec)?.n_max();
    let list: Vec<usize> = (k + 1..=n_max).collect();
    let (_, mut probes) = kernel_sweep(k, &list, leaf, spec, leaf.bounds().r)?;
    for p in probes.iter_mut() {
        p.c0 = c0;
        p.coupled = p.k_s <= k + c0;
    }
    let separated: Vec<&KernelProbe> = probes.iter().filter(|p| !p.coupled).collect();
    let max_separated = separated.iter().map(|p| p.relative).fold(0.0, f64::max);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in &separated {
        let v = p.relative.max(KERNEL_FLOOR);
        xs.push(p.k_s as f64);
        ys.push(v.log2());
        if p.relative <= KERNEL_FLOOR {
            break;
        }
    }
    let exponent = if xs.len() >= 2 && separated.first().is_some_and(|p| p.relative > KERNEL_FLOOR) {
        Some(-least_squares_slope(&xs, &ys))
    } else {
        None
    };
    Ok(KernelDecay { k, c0, probes, max_separated, exponent })
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Periodic convolution `kernel * f` with the physical normalisation.
pub fn convolve(kernel: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
    if kernel.spec() != f.spec() {
        return Err(Error::SpecMismatch);
    }
    let a = dft_forward(kernel);
    let b = dft_forward(f);
    let prod = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x * y).collect();
    Ok(dft_inverse(&SpectrumFunction::new(*f.spec(), prod)?))
}

fn family_sup(f: &GridFunction, family: &LeafFamily, s: f64, p: f64) -> Result<f64> {
    let raw = RawSpectrum::of(f);
    let tables = leaf_block_norms(&raw, family, &[p])?;
    Ok(tables[0]
        .iter()
        .flat_map(|row| row.iter().enumerate().map(move |(ls, v)| (ls as f64 * s).exp2() * v))
        .fold(0.0, f64::max))
}

/// `sup_Gamma ||kernel * f||^s_{p,Gamma} / (||kernel||_1 sup_Gamma ||f||^s_{p,Gamma})`.
pub fn leafwise_young_check(kernel: &GridFunction, f: &GridFunction, family: &LeafFamily, s: f64, p: f64) -> Result<f64> {
    let mass = lp_norm(kernel, 1.0)?;
    let num = family_sup(&convolve(kernel, f)?, family, s, p)?;
    let den = mass * family_sup(f, family, s, p)?;
    Ok(if den > 0.0 { num / den } else { 0.0 })
}
