use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid_spectral::{GridFunction, GridSpec};

use super::indicator::smooth_step;

/// Families of test functions. All kinds except `X1Profile` are supported in the ball of
/// radius `K_rad`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    Gaussian,
    BandLimited,
    PacketAligned,
    PacketTransverse,
    PlaneWaveMixture,
    CompactBump,
    /// Hermite packets across an indicator boundary, with widths of 1, 2, 4 and 8 lattice cells.
    EdgePacket,
    /// Wide bumps centred on an indicator boundary.
    BoundaryBump,
    /// Functions of `x_1` alone, constant in the other coordinates.
    X1Profile,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 9] = [
        CorpusKind::Gaussian,
        CorpusKind::BandLimited,
        CorpusKind::PacketAligned,
        CorpusKind::PacketTransverse,
        CorpusKind::PlaneWaveMixture,
        CorpusKind::CompactBump,
        CorpusKind::EdgePacket,
        CorpusKind::X1Profile,
        CorpusKind::BoundaryBump,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CorpusKind::Gaussian => "gaussian",
            CorpusKind::BandLimited => "band_limited",
            CorpusKind::PacketAligned => "packet_aligned",
            CorpusKind::PacketTransverse => "packet_transverse",
            CorpusKind::PlaneWaveMixture => "plane_wave_mixture",
            CorpusKind::CompactBump => "compact_bump",
            CorpusKind::EdgePacket => "edge_packet",
            CorpusKind::X1Profile => "x1_profile",
            CorpusKind::BoundaryBump => "boundary_bump",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        CorpusKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown corpus kind {s:?}")))
    }

    fn stream(&self) -> u64 {
        CorpusKind::ALL.iter().position(|k| k == self).unwrap() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSpec {
    pub kinds: Vec<CorpusKind>,
    /// Members per kind.
    pub count: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            kinds: vec![
                CorpusKind::Gaussian,
                CorpusKind::BandLimited,
                CorpusKind::PacketAligned,
                CorpusKind::PacketTransverse,
                CorpusKind::PlaneWaveMixture,
                CorpusKind::CompactBump,
            ],
            count: 2,
        }
    }
}

/// Geometry some kinds orient themselves by.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusContext {
    /// Direction for aligned packets; defaults to the last coordinate axis.
    pub cone_axis: Option<Vec<f64>>,
    /// Boundary normal and positions along it, for edge packets.
    pub boundary: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusMember {
    pub kind: CorpusKind,
    pub index: usize,
    pub function: GridFunction,
}

fn ball_point(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return v.into_iter().map(|x| x * radius).collect();
        }
    }
}

fn dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// C-infinity bump, 1 at the centre and 0 from radius `r` on.
fn bump(x: &[f64], c: &[f64], r: f64) -> f64 {
    let q = dist2(x, c) / (r * r);
    if q >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - q)).exp()
    }
}

/// Physicists' Hermite polynomial.
fn hermite(m: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * x);
    if m == 0 {
        return a;
    }
    for k in 1..m {
        let next = 2.0 * x * b - 2.0 * k as f64 * a;
        a = b;
        b = next;
    }
    b
}

fn member(kind: CorpusKind, index: usize, grid: &GridSpec, seed: u64, ctx: &CorpusContext) -> Result<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(kind.stream() * 1_000_003 + index as u64);
    let d = grid.d();
    let k = grid.support_radius();
    let f = match kind {
        CorpusKind::Gaussian => {
            let c = ball_point(&mut rng, d, k / 4.0);
            let sigma = rng.random_range(k / 16.0..k / 11.0);
            GridFunction::from_real_fn(*grid, |x| (-dist2(x, &c) / (2.0 * sigma * sigma)).exp())
        }
        CorpusKind::BandLimited => {
            let sigma = k / 8.0;
            let waves: Vec<(Vec<f64>, Complex64)> = (0..4)
                .map(|_| {
                    let xi: Vec<f64> = ball_point(&mut rng, d, 8.0 / k);
                    let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    (xi, a)
                })
                .collect();
            GridFunction::from_fn(*grid, |x| {
                let env = (-dot(x, x) / (2.0 * sigma * sigma)).exp();
                waves.iter().map(|(xi, a)| a * Complex64::from_polar(env, dot(xi, x))).sum()
            })
        }
        CorpusKind::PacketAligned | CorpusKind::PacketTransverse => {
            let dir = if kind == CorpusKind::PacketAligned {
                ctx.cone_axis.clone().unwrap_or_else(|| {
                    let mut v = vec![0.0; d];
                    v[d - 1] = 1.0;
                    v
                })
            } else {
                let mut v = vec![0.0; d];
                v[0] = 1.0;
                v
            };
            if dir.len() != d {
                return Err(Error::InvalidParameter("cone axis has wrong length".into()));
            }
            let c = ball_point(&mut rng, d, k / 8.0);
            let sigma = rng.random_range(k / 12.0..k / 8.0);
            let freq = rng.random_range(4.0 / k..16.0 / k);
            let phase = rng.random_range(0.0..2.0 * PI);
            GridFunction::from_fn(*grid, |x| {
                let env = (-dist2(x, &c) / (2.0 * sigma * sigma)).exp();
                Complex64::from_polar(env, freq * dot(&dir, x) + phase)
            })
        }
        CorpusKind::PlaneWaveMixture => {
            let c = ball_point(&mut rng, d, k / 4.0);
            let waves: Vec<(Vec<f64>, Complex64)> = (0..3)
                .map(|_| {
                    let xi = ball_point(&mut rng, d, 16.0 / k);
                    let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    (xi, a)
                })
                .collect();
            GridFunction::from_fn(*grid, |x| {
                let env = bump(x, &c, k / 2.0);
                if env == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                waves.iter().map(|(xi, a)| a * Complex64::from_polar(env, dot(xi, x))).sum()
            })
        }
        CorpusKind::CompactBump => {
            let c = ball_point(&mut rng, d, k / 4.0);
            let r = rng.random_range(k / 4.0..k / 2.0);
            GridFunction::from_real_fn(*grid, |x| bump(x, &c, r))
        }
        CorpusKind::EdgePacket => {
            let (normal, offsets) = ctx
                .boundary
                .clone()
                .ok_or_else(|| Error::InvalidParameter("edge packets need a boundary".into()))?;
            if normal.len() != d || offsets.is_empty() {
                return Err(Error::InvalidParameter("boundary normal has wrong length".into()));
            }
            let w = grid.h() * (1usize << (index % 4)) as f64;
            let order = (index / 4) % 2;
            let b = offsets[(index / 8) % offsets.len()];
            let sigma_t = k / 8.0;
            let _ = &mut rng;
            GridFunction::from_real_fn(*grid, |x| {
                let tau = dot(x, &normal) - b;
                let along = (dot(x, x) - dot(x, &normal).powi(2)).max(0.0);
                let cut = 1.0 - smooth_step(dot(x, x).sqrt() - 0.75 * k, 0.25 * k, 0.0);
                let u = tau / w;
                hermite(order, u) * (-0.5 * u * u).exp() * (-along / (2.0 * sigma_t * sigma_t)).exp() * cut
            })
        }
        CorpusKind::BoundaryBump => {
            let (normal, offsets) = ctx
                .boundary
                .clone()
                .ok_or_else(|| Error::InvalidParameter("boundary bumps need a boundary".into()))?;
            if normal.len() != d || offsets.is_empty() {
                return Err(Error::InvalidParameter("boundary normal has wrong length".into()));
            }
            let b = offsets[index % offsets.len()];
            let c: Vec<f64> = normal.iter().map(|u| u * b).collect();
            let r = (k - b.abs()) * rng.random_range(0.75..1.0);
            if !(r > 0.0) {
                return Err(Error::InvalidParameter("boundary lies outside the support ball".into()));
            }
            GridFunction::from_real_fn(*grid, |x| bump(x, &c, r))
        }
        CorpusKind::X1Profile => {
            let c = rng.random_range(-k / 4.0..k / 4.0);
            let r = rng.random_range(k / 4.0..k / 2.0);
            let freq = rng.random_range(0.0..8.0 / k);
            GridFunction::from_fn(*grid, |x| Complex64::from_polar(bump(&x[..1], &[c], r), freq * x[0]))
        }
    };
    Ok(f)
}

/// Deterministic corpus: `count` members of each kind, independent of the grid resolution except
/// for edge packets, whose widths are tied to the lattice.
pub fn make_corpus(spec: &CorpusSpec, grid: &GridSpec, seed: u64, ctx: &CorpusContext) -> Result<Vec<CorpusMember>> {
    let mut out = Vec::new();
    for &kind in &spec.kinds {
        for index in 0..spec.count {
            out.push(CorpusMember { kind, index, function: member(kind, index, grid, seed, ctx)? });
        }
    }
    Ok(out)
}

/// Random trigonometric polynomial with every lattice frequency `|xi| <= radius` active.
pub fn random_trig_polynomial(grid: &GridSpec, radius: f64, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norms = grid.freq_norms(grid.d());
    let mut data: Vec<Complex64> = norms
        .iter()
        .map(|r| {
            let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if *r <= radius {
                a
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    fft::transform(&mut data, grid.n(), grid.d(), true);
    let scale = 1.0 / (data.iter().map(|v| v.norm()).fold(0.0, f64::max)).max(f64::MIN_POSITIVE);
    GridFunction::from_raw(*grid, data.into_iter().map(|v| v * scale).collect())
}
