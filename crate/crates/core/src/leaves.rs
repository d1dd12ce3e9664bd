//! Unstable cones, admissible graph leaves, leaf families and restriction to leaves.
//!
//! A leaf is a graph `x_+ = gamma(z)` over the stable chart `z = x_-`. Restriction writes
//! `gamma(z) = A z + beta(z) + b` with `beta` periodic on the chart box. Each unstable Fourier
//! column of the ambient function then restricts to a chart-periodic function times the
//! exponential `e^{i z . A^T eta}`, so chart multipliers act exactly at the shifted frequencies
//! `xi_- + A^T eta` rather than on a wrapped periodic chart.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid_spectral::{psi, GridFunction, GridSpec, RawSpectrum};
use crate::norms::{besov_from_table, check_p, weighted_lp, BesovReport};

/// Default angular safety margin between cone and horizontal subspace, and for chords.
pub const CONE_MARGIN: f64 = 5.0 * PI / 180.0;

/// Number of chord pairs sampled when validating a leaf.
pub const CHORD_SAMPLES: usize = 10_000;

const CHORD_SEED: u64 = 0x00c4_0bd5;

/// Closed cone of directions within angle `theta` of an axis subspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnstableCone {
    d_s: usize,
    d_u: usize,
    axis: Vec<Vec<f64>>,
    theta: f64,
    margin: f64,
}

/// Validate a cone given an orthonormal basis of its axis subspace.
pub fn make_cone(d_s: usize, d_u: usize, axis: Vec<Vec<f64>>, theta: f64) -> Result<UnstableCone> {
    UnstableCone::with_margin(d_s, d_u, axis, theta, CONE_MARGIN)
}

impl UnstableCone {
    pub fn with_margin(d_s: usize, d_u: usize, axis: Vec<Vec<f64>>, theta: f64, margin: f64) -> Result<Self> {
        if d_s == 0 || d_u == 0 {
            return Err(Error::InvalidCone("need d_s >= 1 and d_u >= 1".into()));
        }
        let d = d_s + d_u;
        if axis.len() != d_u || axis.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidCone(format!("axis must hold {d_u} vectors of length {d}")));
        }
        for (i, a) in axis.iter().enumerate() {
            for (j, b) in axis.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-10 {
                    return Err(Error::InvalidCone("axis basis is not orthonormal".into()));
                }
            }
        }
        if !(theta > 0.0 && theta < PI / 2.0) {
            return Err(Error::InvalidCone(format!("aperture {theta} not in (0, pi/2)")));
        }
        let cone = UnstableCone { d_s, d_u, axis, theta, margin };
        let phi = cone.horizontal_angle();
        if theta + margin >= phi {
            return Err(Error::InvalidCone(format!(
                "aperture {:.3} deg plus margin {:.3} deg reaches the horizontal subspace at {:.3} deg",
                theta.to_degrees(),
                margin.to_degrees(),
                phi.to_degrees()
            )));
        }
        Ok(cone)
    }

    /// Cone around the span of the last `d_u` coordinate vectors.
    pub fn vertical(d_s: usize, d_u: usize, theta: f64) -> Result<Self> {
        let d = d_s + d_u;
        let axis = (0..d_u)
            .map(|j| {
                let mut v = vec![0.0; d];
                v[d_s + j] = 1.0;
                v
            })
            .collect();
        make_cone(d_s, d_u, axis, theta)
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }
    pub fn d_u(&self) -> usize {
        self.d_u
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn margin(&self) -> f64 {
        self.margin
    }
    pub fn axis(&self) -> &[Vec<f64>] {
        &self.axis
    }

    /// Smallest principal angle between the axis subspace and `R^{d_s} x {0}`.
    pub fn horizontal_angle(&self) -> f64 {
        let b = DMatrix::from_fn(self.d_s, self.d_u, |i, j| self.axis[j][i]);
        let sigma = b.singular_values().iter().cloned().fold(0.0, f64::max);
        sigma.min(1.0).acos()
    }

    fn axis_projection_norm(&self, v: &[f64]) -> f64 {
        self.axis
            .iter()
            .map(|a| a.iter().zip(v).map(|(x, y)| x * y).sum::<f64>().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Whether `v` lies within angle `theta` of the axis subspace.
    pub fn contains_direction(&self, v: &[f64]) -> Result<bool> {
        if v.len() != self.d_s + self.d_u {
            return Err(Error::InvalidParameter("direction has wrong length".into()));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero direction".into()));
        }
        Ok(self.axis_projection_norm(v) / norm >= self.theta.cos() - 1e-12)
    }

    /// Largest admissible `|P_axis c|` for a unit chord `c`.
    pub fn chord_bound(&self) -> f64 {
        (self.theta - self.margin).max(0.0).sin()
    }

    /// Largest admissible chord slope for a vertical cone.
    pub fn max_slope(&self) -> f64 {
        (self.theta - self.margin).max(0.0).tan()
    }
}

/// Closed-form graph maps `gamma: R^{d_s} -> R^{d_u}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeafShape {
    Horizontal,
    /// `gamma(z) = slope z + intercept`, slope stored row-major `d_u x d_s`.
    Affine { slope: Vec<f64>, intercept: Vec<f64> },
    /// `gamma(z) = amplitude sin(wavevector . z + phase)`.
    Sinusoidal { amplitude: Vec<f64>, wavevector: Vec<f64>, phase: f64 },
    /// `gamma_i(z) = curvature_i |z|^2`.
    Quadratic { curvature: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafKind {
    Horizontal,
    Affine,
    Sinusoidal,
    Quadratic,
}

impl LeafKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "horizontal" => Ok(LeafKind::Horizontal),
            "affine" => Ok(LeafKind::Affine),
            "sinusoidal" => Ok(LeafKind::Sinusoidal),
            "quadratic" => Ok(LeafKind::Quadratic),
            other => Err(Error::InvalidLeaf(format!("unknown leaf kind {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LeafKind::Horizontal => "horizontal",
            LeafKind::Affine => "affine",
            LeafKind::Sinusoidal => "sinusoidal",
            LeafKind::Quadratic => "quadratic",
        }
    }
}

impl LeafShape {
    pub fn kind(&self) -> LeafKind {
        match self {
            LeafShape::Horizontal => LeafKind::Horizontal,
            LeafShape::Affine { .. } => LeafKind::Affine,
            LeafShape::Sinusoidal { .. } => LeafKind::Sinusoidal,
            LeafShape::Quadratic { .. } => LeafKind::Quadratic,
        }
    }

    /// Build a shape from a flat coefficient list.
    ///
    /// affine: `d_u*d_s` slope entries then optionally `d_u` intercepts; sinusoidal: `d_u`
    /// amplitudes, `d_s` wavevector entries, phase; quadratic: `d_u` curvatures.
    pub fn from_coefficients(kind: LeafKind, d_s: usize, d_u: usize, c: &[f64]) -> Result<Self> {
        let bad = |want: &str| Error::InvalidLeaf(format!("{} leaf expects {want} coefficients, got {}", kind.name(), c.len()));
        match kind {
            LeafKind::Horizontal => {
                if c.is_empty() {
                    Ok(LeafShape::Horizontal)
                } else {
                    Err(bad("0"))
                }
            }
            LeafKind::Affine => {
                let m = d_u * d_s;
                if c.len() == m {
                    Ok(LeafShape::Affine { slope: c.to_vec(), intercept: vec![0.0; d_u] })
                } else if c.len() == m + d_u {
                    Ok(LeafShape::Affine { slope: c[..m].to_vec(), intercept: c[m..].to_vec() })
                } else {
                    Err(bad(&format!("{m} or {}", m + d_u)))
                }
            }
            LeafKind::Sinusoidal => {
                if c.len() != d_u + d_s + 1 {
                    return Err(bad(&format!("{}", d_u + d_s + 1)));
                }
                Ok(LeafShape::Sinusoidal {
                    amplitude: c[..d_u].to_vec(),
                    wavevector: c[d_u..d_u + d_s].to_vec(),
                    phase: c[d_u + d_s],
                })
            }
            LeafKind::Quadratic => {
                if c.len() != d_u {
                    return Err(bad(&format!("{d_u}")));
                }
                Ok(LeafShape::Quadratic { curvature: c.to_vec() })
            }
        }
    }

    fn check_dims(&self, d_s: usize, d_u: usize) -> Result<()> {
        let ok = match self {
            LeafShape::Horizontal => true,
            LeafShape::Affine { slope, intercept } => slope.len() == d_s * d_u && intercept.len() == d_u,
            LeafShape::Sinusoidal { amplitude, wavevector, .. } => amplitude.len() == d_u && wavevector.len() == d_s,
            LeafShape::Quadratic { curvature } => curvature.len() == d_u,
        };
        let finite = match self {
            LeafShape::Horizontal => true,
            LeafShape::Affine { slope, intercept } => slope.iter().chain(intercept).all(|v| v.is_finite()),
            LeafShape::Sinusoidal { amplitude, wavevector, phase } => {
                amplitude.iter().chain(wavevector).all(|v| v.is_finite()) && phase.is_finite()
            }
            LeafShape::Quadratic { curvature } => curvature.iter().all(|v| v.is_finite()),
        };
        if ok && finite {
            Ok(())
        } else {
            Err(Error::InvalidLeaf("coefficient dimensions do not match (d_s, d_u)".into()))
        }
    }

    fn eval(&self, z: &[f64], out: &mut [f64]) {
        match self {
            LeafShape::Horizontal => out.iter_mut().for_each(|o| *o = 0.0),
            LeafShape::Affine { slope, intercept } => {
                let d_s = z.len();
                for (i, o) in out.iter_mut().enumerate() {
                    *o = intercept[i] + (0..d_s).map(|j| slope[i * d_s + j] * z[j]).sum::<f64>();
                }
            }
            LeafShape::Sinusoidal { amplitude, wavevector, phase } => {
                let arg: f64 = wavevector.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + phase;
                let s = arg.sin();
                for (o, a) in out.iter_mut().zip(amplitude) {
                    *o = a * s;
                }
            }
            LeafShape::Quadratic { curvature } => {
                let r2: f64 = z.iter().map(|x| x * x).sum();
                for (o, c) in out.iter_mut().zip(curvature) {
                    *o = c * r2;
                }
            }
        }
    }

    /// Jacobian `d gamma / d z`, row-major `d_u x d_s`.
    fn jacobian(&self, z: &[f64], d_u: usize) -> Vec<f64> {
        let d_s = z.len();
        match self {
            LeafShape::Horizontal => vec![0.0; d_u * d_s],
            LeafShape::Affine { slope, .. } => slope.clone(),
            LeafShape::Sinusoidal { amplitude, wavevector, phase } => {
                let arg: f64 = wavevector.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + phase;
                let c = arg.cos();
                let mut j = vec![0.0; d_u * d_s];
                for i in 0..d_u {
                    for k in 0..d_s {
                        j[i * d_s + k] = amplitude[i] * wavevector[k] * c;
                    }
                }
                j
            }
            LeafShape::Quadratic { curvature } => {
                let mut j = vec![0.0; d_u * d_s];
                for i in 0..d_u {
                    for k in 0..d_s {
                        j[i * d_s + k] = 2.0 * curvature[i] * z[k];
                    }
                }
                j
            }
        }
    }

    /// `max_{1 <= |alpha| <= ceil(r)} sup |D^alpha gamma|` over the chart box of half-width `half`.
    fn chart_norm(&self, r: f64, half: f64, d_s: usize) -> f64 {
        let orders = r.ceil().max(1.0) as i32;
        let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        match self {
            LeafShape::Horizontal => 0.0,
            LeafShape::Affine { slope, .. } => max_abs(slope),
            LeafShape::Sinusoidal { amplitude, wavevector, .. } => {
                let a = max_abs(amplitude);
                let w = max_abs(wavevector);
                (1..=orders).map(|k| a * w.powi(k)).fold(0.0, f64::max)
            }
            LeafShape::Quadratic { curvature } => {
                let c = max_abs(curvature);
                let first = 2.0 * c * half;
                let _ = d_s;
                if orders >= 2 {
                    first.max(2.0 * c)
                } else {
                    first
                }
            }
        }
    }
}

/// Regularity budget and validation domain for a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeafBounds {
    pub c_f: f64,
    pub r: f64,
    /// Half-width of the chart box on which the graph is validated.
    pub half_width: f64,
}

/// A validated graph leaf translated by `x0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleLeaf {
    shape: LeafShape,
    d_s: usize,
    d_u: usize,
    x0: Vec<f64>,
    bounds: LeafBounds,
    chart_norm: f64,
}

/// Validate `shape + x0` against the cone and the chart bound.
pub fn make_graph_leaf(shape: LeafShape, cone: &UnstableCone, bounds: LeafBounds, x0: Vec<f64>) -> Result<AdmissibleLeaf> {
    let (d_s, d_u) = (cone.d_s, cone.d_u);
    shape.check_dims(d_s, d_u)?;
    if x0.len() != d_s + d_u || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidLeaf("translation has wrong length".into()));
    }
    if !(bounds.r > 1.0 && bounds.c_f > 0.0 && bounds.half_width > 0.0) {
        return Err(Error::InvalidLeaf("bounds need r > 1, C_F > 0, half-width > 0".into()));
    }
    let chart_norm = shape.chart_norm(bounds.r, bounds.half_width, d_s);
    if chart_norm > bounds.c_f {
        return Err(Error::InvalidLeaf(format!("chart C^r norm {chart_norm:.4} exceeds C_F = {}", bounds.c_f)));
    }
    let leaf = AdmissibleLeaf { shape, d_s, d_u, x0, bounds, chart_norm };
    if let Some((z, zp)) = leaf.chord_failure(cone, CHORD_SAMPLES) {
        return Err(Error::InvalidLeaf(format!("chord transversality fails between z = {z:?} and z' = {zp:?}")));
    }
    Ok(leaf)
}

impl AdmissibleLeaf {
    pub fn shape(&self) -> &LeafShape {
        &self.shape
    }
    pub fn d_s(&self) -> usize {
        self.d_s
    }
    pub fn d_u(&self) -> usize {
        self.d_u
    }
    pub fn offset(&self) -> &[f64] {
        &self.x0
    }
    pub fn bounds(&self) -> LeafBounds {
        self.bounds
    }
    pub fn chart_norm(&self) -> f64 {
        self.chart_norm
    }

    /// `gamma(z - x0_-) + x0_+`.
    pub fn gamma(&self, z: &[f64], out: &mut [f64]) {
        let zs: Vec<f64> = z.iter().zip(&self.x0).map(|(a, b)| a - b).collect();
        self.shape.eval(&zs, out);
        for (o, b) in out.iter_mut().zip(&self.x0[self.d_s..]) {
            *o += b;
        }
    }

    /// Jacobian of the graph map at chart point `z`.
    pub fn jacobian(&self, z: &[f64]) -> Vec<f64> {
        let zs: Vec<f64> = z.iter().zip(&self.x0).map(|(a, b)| a - b).collect();
        self.shape.jacobian(&zs, self.d_u)
    }

    /// Riemannian volume density `sqrt(det(I + J^T J))`.
    pub fn weight(&self, z: &[f64]) -> f64 {
        let j = self.jacobian(z);
        let jm = DMatrix::from_row_slice(self.d_u, self.d_s, &j);
        let g = DMatrix::<f64>::identity(self.d_s, self.d_s) + jm.transpose() * &jm;
        g.determinant().sqrt()
    }

    /// The same leaf moved by `dx`; chart norms and chords are translation invariant.
    pub fn translated(&self, dx: &[f64]) -> AdmissibleLeaf {
        let mut out = self.clone();
        for (o, v) in out.x0.iter_mut().zip(dx) {
            *o += v;
        }
        out
    }

    /// Sample chord pairs and return the first violating pair, if any.
    pub fn chord_failure(&self, cone: &UnstableCone, pairs: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        let d = self.d_s + self.d_u;
        let half = self.bounds.half_width;
        let bound = cone.chord_bound();
        let mut rng = ChaCha8Rng::seed_from_u64(CHORD_SEED);
        let mut c = vec![0.0; d];
        let mut g1 = vec![0.0; self.d_u];
        let mut g2 = vec![0.0; self.d_u];
        for i in 0..pairs {
            let z: Vec<f64> = (0..self.d_s).map(|_| rng.random_range(-half..half)).collect();
            let zp: Vec<f64> = if i % 2 == 0 {
                (0..self.d_s).map(|_| rng.random_range(-half..half)).collect()
            } else {
                z.iter().map(|v| v + 1e-4 * half * rng.random_range(-1.0..1.0)).collect()
            };
            let zt: Vec<f64> = z.iter().zip(&self.x0).map(|(a, b)| a + b).collect();
            let zpt: Vec<f64> = zp.iter().zip(&self.x0).map(|(a, b)| a + b).collect();
            self.gamma(&zt, &mut g1);
            self.gamma(&zpt, &mut g2);
            for k in 0..self.d_s {
                c[k] = zt[k] - zpt[k];
            }
            for k in 0..self.d_u {
                c[self.d_s + k] = g1[k] - g2[k];
            }
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            if cone.axis_projection_norm(&c) / norm > bound + 1e-12 {
                return Some((zt, zpt));
            }
        }
        None
    }

    /// Split `gamma = A z + beta(z) + b` with `beta` periodic over the chart box.
    pub(crate) fn split(&self) -> LeafSplit {
        let (d_s, d_u) = (self.d_s, self.d_u);
        let (slope, mut offset) = match &self.shape {
            LeafShape::Affine { slope, intercept } => (slope.clone(), intercept.clone()),
            _ => (vec![0.0; d_u * d_s], vec![0.0; d_u]),
        };
        for i in 0..d_u {
            offset[i] += self.x0[d_s + i] - (0..d_s).map(|j| slope[i * d_s + j] * self.x0[j]).sum::<f64>();
        }
        let periodic = matches!(self.shape, LeafShape::Sinusoidal { .. } | LeafShape::Quadratic { .. });
        LeafSplit { slope, offset, periodic }
    }

    /// Periodic part `beta(z - x0_-)`; zero for affine leaves.
    pub(crate) fn periodic_part(&self, z: &[f64], out: &mut [f64]) {
        match self.shape {
            LeafShape::Sinusoidal { .. } | LeafShape::Quadratic { .. } => {
                let zs: Vec<f64> = z.iter().zip(&self.x0).map(|(a, b)| a - b).collect();
                self.shape.eval(&zs, out);
            }
            _ => out.iter_mut().for_each(|o| *o = 0.0),
        }
    }

    fn check_grid(&self, spec: &GridSpec) -> Result<()> {
        if spec.d_s() != self.d_s || spec.d_u() != self.d_u {
            return Err(Error::InvalidLeaf(format!(
                "leaf split ({}, {}) does not match grid split ({}, {})",
                self.d_s,
                self.d_u,
                spec.d_s(),
                spec.d_u()
            )));
        }
        Ok(())
    }

    /// Reject leaves whose part above the support shadow leaves the box.
    pub fn check_in_box(&self, spec: &GridSpec) -> Result<()> {
        self.check_grid(spec)?;
        let chart = chart_spec(spec)?;
        let half = spec.box_length() / 2.0;
        let k = spec.support_radius();
        let mut z = vec![0.0; self.d_s];
        let mut g = vec![0.0; self.d_u];
        for i in 0..chart.len() {
            chart.point(i, &mut z);
            if z.iter().all(|v| v.abs() <= k) {
                self.gamma(&z, &mut g);
                if g.iter().any(|v| v.abs() >= half) {
                    return Err(Error::InvalidLeaf(format!("leaf exits the padded box at z = {z:?}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LeafSplit {
    pub slope: Vec<f64>,
    pub offset: Vec<f64>,
    pub periodic: bool,
}

/// The `d_s`-dimensional chart lattice of an ambient grid.
pub fn chart_spec(spec: &GridSpec) -> Result<GridSpec> {
    if spec.d_s() == 0 {
        return Err(Error::InvalidLeaf("grid has no stable directions".into()));
    }
    spec.with_dims(spec.d_s(), spec.d_s())
}

/// Generation settings for a finite leaf family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafFamilyConfig {
    pub affine: usize,
    pub sinusoidal: usize,
    pub quadratic: usize,
    /// Translations along each unstable axis on either side of the representative.
    pub translations_per_side: usize,
    /// Translation step as a fraction of `K_rad`.
    pub translation_step: f64,
    /// Largest generated slope as a fraction of the cone's admissible slope.
    pub slope_fraction: f64,
    /// Highest chart harmonic used by sinusoidal leaves.
    pub max_harmonic: usize,
    pub c_f: f64,
    pub r: f64,
}

impl Default for LeafFamilyConfig {
    fn default() -> Self {
        LeafFamilyConfig {
            affine: 1,
            sinusoidal: 1,
            quadratic: 1,
            translations_per_side: 8,
            translation_step: 0.125,
            slope_fraction: 0.8,
            max_harmonic: 2,
            c_f: 64.0,
            r: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyMember {
    pub id: usize,
    pub representative: usize,
    pub translation: Vec<f64>,
    pub leaf: AdmissibleLeaf,
}

/// Representatives with their translates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafFamily {
    pub representatives: Vec<AdmissibleLeaf>,
    pub members: Vec<FamilyMember>,
    pub seed: u64,
    pub rejected: Vec<String>,
}

impl LeafFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// A family of explicit leaves, each its own representative.
    pub fn from_leaves(leaves: Vec<AdmissibleLeaf>) -> Self {
        let members = leaves
            .iter()
            .enumerate()
            .map(|(i, l)| FamilyMember { id: i, representative: i, translation: vec![0.0; l.d_u()], leaf: l.clone() })
            .collect();
        LeafFamily { representatives: leaves, members, seed: 0, rejected: Vec::new() }
    }

    /// Add explicit translates of representative `rep` along the unstable axes.
    pub fn with_translations(mut self, rep: usize, offsets: &[Vec<f64>]) -> Self {
        let base = self.representatives[rep].clone();
        for t in offsets {
            let mut dx = vec![0.0; base.d_s()];
            dx.extend_from_slice(t);
            let id = self.members.len();
            self.members.push(FamilyMember { id, representative: rep, translation: t.clone(), leaf: base.translated(&dx) });
        }
        self
    }

    /// Members grouped by representative, keeping member order.
    pub(crate) fn groups(&self) -> Vec<(usize, Vec<&FamilyMember>)> {
        (0..self.representatives.len())
            .map(|r| (r, self.members.iter().filter(|m| m.representative == r).collect::<Vec<_>>()))
            .filter(|(_, v)| !v.is_empty())
            .collect()
    }
}

/// Deterministic family: horizontal leaf plus seeded curved representatives, each translated
/// on a lattice along the unstable axes.
pub fn sample_leaf_family(config: &LeafFamilyConfig, cone: &UnstableCone, spec: &GridSpec, seed: u64) -> Result<LeafFamily> {
    let (d_s, d_u) = (cone.d_s(), cone.d_u());
    if spec.d_s() != d_s || spec.d_u() != d_u {
        return Err(Error::InvalidLeaf("cone and grid splits differ".into()));
    }
    if !(config.translation_step > 0.0) || !(config.slope_fraction > 0.0 && config.slope_fraction < 1.0) {
        return Err(Error::InvalidParameter("translation_step > 0 and slope_fraction in (0, 1) required".into()));
    }
    let bounds = LeafBounds { c_f: config.c_f, r: config.r, half_width: spec.box_length() / 2.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_slope = cone.max_slope() * config.slope_fraction;
    let half = spec.box_length() / 2.0;
    let dk = spec.dk();
    let mut reps = vec![make_graph_leaf(LeafShape::Horizontal, cone, bounds, vec![0.0; d_s + d_u])?];
    let mut rejected = Vec::new();
    let plan = [
        (LeafKind::Affine, config.affine),
        (LeafKind::Sinusoidal, config.sinusoidal),
        (LeafKind::Quadratic, config.quadratic),
    ];
    for (kind, count) in plan {
        let mut made = 0;
        let mut attempts = 0;
        while made < count && attempts < 50 * count.max(1) {
            attempts += 1;
            let u = rng.random_range(0.5..1.0) * max_slope;
            let dir = random_unit(&mut rng, d_u);
            let shape = match kind {
                LeafKind::Affine => {
                    let sdir = random_unit(&mut rng, d_s);
                    let slope = (0..d_u * d_s).map(|k| u * dir[k / d_s] * sdir[k % d_s]).collect();
                    LeafShape::Affine { slope, intercept: vec![0.0; d_u] }
                }
                LeafKind::Sinusoidal => {
                    let harmonic = rng.random_range(1..=config.max_harmonic.max(1)) as f64;
                    let axis = rng.random_range(0..d_s);
                    let mut wavevector = vec![0.0; d_s];
                    wavevector[axis] = harmonic * dk;
                    let amp = u / (harmonic * dk);
                    LeafShape::Sinusoidal {
                        amplitude: dir.iter().map(|v| v * amp).collect(),
                        wavevector,
                        phase: rng.random_range(0.0..2.0 * PI),
                    }
                }
                LeafKind::Quadratic => {
                    let c = u / (2.0 * half * (d_s as f64).sqrt());
                    LeafShape::Quadratic { curvature: dir.iter().map(|v| v * c).collect() }
                }
                LeafKind::Horizontal => unreachable!(),
            };
            match make_graph_leaf(shape, cone, bounds, vec![0.0; d_s + d_u]).and_then(|l| l.check_in_box(spec).map(|_| l)) {
                Ok(leaf) => {
                    reps.push(leaf);
                    made += 1;
                }
                Err(e) => rejected.push(format!("{}: {e}", kind.name())),
            }
        }
    }
    let step = config.translation_step * spec.support_radius();
    let t = config.translations_per_side as i64;
    let offsets = lattice_offsets(d_u, t, step);
    let mut members = Vec::new();
    for (r, rep) in reps.iter().enumerate() {
        for off in &offsets {
            let mut dx = vec![0.0; d_s];
            dx.extend_from_slice(off);
            let leaf = rep.translated(&dx);
            if let Err(e) = leaf.check_in_box(spec) {
                rejected.push(format!("translate {off:?} of representative {r}: {e}"));
                continue;
            }
            members.push(FamilyMember { id: members.len(), representative: r, translation: off.clone(), leaf });
        }
    }
    Ok(LeafFamily { representatives: reps, members, seed, rejected })
}

fn lattice_offsets(d_u: usize, t: i64, step: f64) -> Vec<Vec<f64>> {
    let side = (2 * t + 1) as usize;
    (0..side.pow(d_u as u32))
        .map(|flat| {
            let mut rem = flat;
            let mut v = vec![0.0; d_u];
            for o in v.iter_mut().rev() {
                *o = ((rem % side) as i64 - t) as f64 * step;
                rem /= side;
            }
            v
        })
        .collect()
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    if dim == 1 {
        return vec![if rng.random_bool(0.5) { 1.0 } else { -1.0 }];
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Restriction of one ambient function to a leaf shape, kept column by column.
///
/// Component `c` is the chart-periodic function with raw chart spectrum `spectra[c]`, carried by
/// the exponential `e^{i z . shifts[c]}` and the unstable frequency `etas[c]`.
#[derive(Debug, Clone)]
pub struct LeafStack {
    chart: GridSpec,
    shifts: Vec<Vec<f64>>,
    etas: Vec<Vec<f64>>,
    spectra: Vec<Vec<Complex64>>,
}

impl LeafStack {
    /// Build from the raw ambient spectrum of a band-limited function.
    pub(crate) fn build(raw: &RawSpectrum, leaf: &AdmissibleLeaf) -> Result<Self> {
        let spec = *raw.spec();
        leaf.check_grid(&spec)?;
        let chart = chart_spec(&spec)?;
        let (d_s, d_u, n) = (spec.d_s(), spec.d_u(), spec.n());
        let cols = n.pow(d_u as u32);
        let rows = n.pow(d_s as u32);
        let data = raw.data();
        let split = leaf.split();
        let beta: Option<Vec<Vec<f64>>> = if split.periodic {
            let mut z = vec![0.0; d_s];
            Some(
                (0..rows)
                    .map(|i| {
                        chart.point(i, &mut z);
                        let mut b = vec![0.0; d_u];
                        leaf.periodic_part(&z, &mut b);
                        b
                    })
                    .collect(),
            )
        } else {
            None
        };
        let inv_len = 1.0 / spec.len() as f64;
        let inv_cols = 1.0 / cols as f64;
        let mut stack = LeafStack { chart, shifts: Vec::new(), etas: Vec::new(), spectra: Vec::new() };
        for kappa in 0..cols {
            let column: Vec<Complex64> = (0..rows).map(|m| data[m * cols + kappa]).collect();
            if column.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let mut rem = kappa;
            let mut eta = vec![0.0; d_u];
            let mut parity = 0usize;
            for e in eta.iter_mut().rev() {
                parity += rem % n;
                *e = spec.freq(rem % n);
                rem /= n;
            }
            let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
            let constant: f64 = eta.iter().zip(&split.offset).map(|(e, b)| e * b).sum();
            let phase = Complex64::from_polar(sign, constant);
            let spectrum = match &beta {
                None => column.iter().map(|v| v * phase * inv_cols).collect(),
                Some(beta) => {
                    let mut c = column;
                    fft::transform(&mut c, n, d_s, true);
                    for (v, b) in c.iter_mut().zip(beta) {
                        let arg: f64 = b.iter().zip(&eta).map(|(x, e)| x * e).sum();
                        *v *= phase * Complex64::from_polar(inv_len, arg);
                    }
                    fft::transform(&mut c, n, d_s, false);
                    c
                }
            };
            let shift: Vec<f64> = (0..d_s).map(|j| (0..d_u).map(|i| split.slope[i * d_s + j] * eta[i]).sum()).collect();
            stack.shifts.push(shift);
            stack.etas.push(eta);
            stack.spectra.push(spectrum);
        }
        Ok(stack)
    }

    pub fn chart(&self) -> &GridSpec {
        &self.chart
    }

    pub fn components(&self) -> usize {
        self.spectra.len()
    }

    /// Each component after the chart multiplier `a(|xi_- + shift|)`, on the chart lattice.
    pub(crate) fn filtered(&self, a: impl Fn(f64) -> f64) -> Vec<Vec<Complex64>> {
        let chart = &self.chart;
        let (n, d_s) = (chart.n(), chart.d());
        let freqs: Vec<f64> = (0..n).map(|k| chart.freq(k)).collect();
        let rows = chart.len();
        let inv = 1.0 / rows as f64;
        let mut z = vec![0.0; d_s];
        self.spectra
            .iter()
            .zip(&self.shifts)
            .map(|(spec, shift)| {
                let mut buf: Vec<Complex64> = spec
                    .iter()
                    .enumerate()
                    .map(|(m, v)| {
                        let mut rem = m;
                        let mut r2 = 0.0;
                        for j in (0..d_s).rev() {
                            let x = freqs[rem % n] + shift[j];
                            r2 += x * x;
                            rem /= n;
                        }
                        let w = a(r2.sqrt());
                        if w == 0.0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            v * w
                        }
                    })
                    .collect();
                if buf.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                    return buf;
                }
                fft::transform(&mut buf, n, d_s, true);
                let moving = shift.iter().any(|s| *s != 0.0);
                for (i, v) in buf.iter_mut().enumerate() {
                    *v *= inv;
                    if moving {
                        chart.point(i, &mut z);
                        let arg: f64 = z.iter().zip(shift).map(|(a, b)| a * b).sum();
                        *v *= Complex64::from_polar(1.0, arg);
                    }
                }
                buf
            })
            .collect()
    }

    /// `sum_c e^{i b . eta_c} parts[c]` for an extra unstable translation `b`.
    pub(crate) fn combine(&self, parts: &[Vec<Complex64>], b: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.chart.len()];
        for (part, eta) in parts.iter().zip(&self.etas) {
            let arg: f64 = eta.iter().zip(b).map(|(e, x)| e * x).sum();
            let ph = Complex64::from_polar(1.0, arg);
            if part.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                continue;
            }
            for (o, v) in out.iter_mut().zip(part) {
                *o += ph * v;
            }
        }
        out
    }

    /// Chart block `psi_{l_s}` of the restriction, translated by `b` along the unstable axes.
    pub fn block(&self, l_s: usize, b: &[f64]) -> Vec<Complex64> {
        let parts = self.filtered(|r| psi(l_s, r));
        self.combine(&parts, b)
    }

    /// The restriction itself on the chart lattice.
    pub fn samples(&self, b: &[f64]) -> Vec<Complex64> {
        let parts = self.filtered(|_| 1.0);
        self.combine(&parts, b)
    }
}

/// Chart samples of a restricted function with their volume weights.
#[derive(Debug, Clone)]
pub struct LeafFunction {
    pub samples: Vec<Complex64>,
    pub weights: Vec<f64>,
    stack: LeafStack,
    r: f64,
}

impl LeafFunction {
    pub fn chart(&self) -> &GridSpec {
        &self.stack.chart
    }
    pub fn stack(&self) -> &LeafStack {
        &self.stack
    }
    /// Smoothness budget of the leaf this function lives on.
    pub fn smoothness(&self) -> f64 {
        self.r
    }

    /// `||g||_{L_p(mu_Gamma)}` for chart samples `g`.
    pub fn weighted_norm(&self, g: &[Complex64], p: f64) -> f64 {
        let cell = self.stack.chart.h().powi(self.stack.chart.d() as i32);
        weighted_lp(g, Some(&self.weights), cell, p)
    }
}

/// Chart volume weights of `leaf` on the chart lattice of `spec`.
pub fn leaf_weights(leaf: &AdmissibleLeaf, spec: &GridSpec) -> Result<Vec<f64>> {
    let chart = chart_spec(spec)?;
    let mut z = vec![0.0; chart.d()];
    Ok((0..chart.len())
        .map(|i| {
            chart.point(i, &mut z);
            leaf.weight(&z)
        })
        .collect())
}

/// Trigonometric interpolation of `f` along `leaf`, sampled on the chart lattice.
pub fn restrict_to_leaf(f: &GridFunction, leaf: &AdmissibleLeaf) -> Result<LeafFunction> {
    leaf.check_in_box(f.spec())?;
    let raw = RawSpectrum::of(f);
    let stack = LeafStack::build(&raw, leaf)?;
    let samples = stack.samples(&vec![0.0; leaf.d_u()]);
    let weights = leaf_weights(leaf, f.spec())?;
    Ok(LeafFunction { samples, weights, stack, r: leaf.bounds().r })
}

/// Leafwise `max_{l_s} 2^{l_s s} ||psi_{l_s}(restriction)||_{L_p(mu_Gamma)}`.
pub fn leaf_besov(lf: &LeafFunction, s: f64, p: f64) -> Result<BesovReport> {
    check_p(p)?;
    let n_max = lf.chart().n_max();
    let zero = vec![0.0; lf.stack.etas.first().map_or(0, |e| e.len())];
    let table: Vec<f64> = (0..=n_max).map(|ls| lf.weighted_norm(&lf.stack.block(ls, &zero), p)).collect();
    Ok(besov_from_table(&table, s, n_max))
}
