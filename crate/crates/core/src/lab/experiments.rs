//! Sweeps over resolutions and parameters, reduced to [`ResultRecord`]s.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::aniso::{aniso_tables, AnisoTables};
use crate::error::{Error, Result};
use crate::grid_spectral::{
    dft_inverse, lp_partial_sum, make_grid, psi, GridFunction, GridSpec, RawSpectrum, SpectrumFunction,
};
use crate::leaves::{
    make_graph_leaf, sample_leaf_family, AdmissibleLeaf, LeafBounds, LeafFamilyConfig, LeafKind, LeafShape, UnstableCone,
};
use crate::norms::{besov_norm, lp_norm, nikolskij_ratio, NormParams};
use crate::paraproduct::{
    calibrate_separation, kernel_decay, leafwise_young_check, paraproduct_split, product_inequality_ratio,
    single_coordinate_deviation, support_check, SupportFact,
};

use super::classify::{classify_boundedness, Verdict};
use super::corpus::{make_corpus, random_trig_polynomial, CorpusContext, CorpusKind, CorpusSpec};
use super::foundations::{derivative_decay, kernel_l1_mass, orthogonality_defect, partition_defect, round_trip_error};
use super::indicator::{make_indicator, IndicatorSpec};
use super::record::ResultRecord;

/// Pass/fail thresholds used by the lemma suite and the kernel sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub partition: f64,
    pub orthogonality: f64,
    pub support: f64,
    pub round_trip: f64,
    pub reconstruction: f64,
    pub single_coordinate: f64,
    /// Relative spread `max/min - 1` allowed for resolution sweeps.
    pub drift: f64,
    pub mass_variation: f64,
    pub mass_drift: f64,
    pub derivative_factor: f64,
    pub kernel_zero: f64,
    /// Allowed shortfall of the kernel decay exponent below `r`.
    pub decay_margin: f64,
    pub young: f64,
    pub growth_slope: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            partition: 1e-12,
            orthogonality: 1e-10,
            support: 1e-10,
            round_trip: 1e-12,
            reconstruction: 1e-8,
            single_coordinate: 1e-12,
            drift: 0.10,
            mass_variation: 1.25,
            mass_drift: 0.05,
            derivative_factor: 2.0,
            kernel_zero: 1e-10,
            decay_margin: 0.5,
            young: 1.1,
            growth_slope: 0.05,
        }
    }
}

/// Where `(p, t)` sits relative to the interval `-1 + 1/p < t < 1/p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Interior,
    Exterior,
    Boundary,
}

impl Expectation {
    pub fn name(&self) -> &'static str {
        match self {
            Expectation::Interior => "interior",
            Expectation::Exterior => "exterior",
            Expectation::Boundary => "boundary",
        }
    }
}

/// Classify `t` against the half-space multiplier interval with the given margin.
pub fn strichartz_expectation(p: f64, t: f64, margin: f64) -> Expectation {
    let lo = -1.0 + 1.0 / p;
    let hi = 1.0 / p;
    let eps = 1e-12;
    if t >= lo + margin - eps && t <= hi - margin + eps {
        Expectation::Interior
    } else if t <= lo - margin + eps || t >= hi + margin - eps {
        Expectation::Exterior
    } else {
        Expectation::Boundary
    }
}

fn check_sweep(ns: &[usize]) -> Result<()> {
    if ns.len() < 3 {
        return Err(Error::InvalidParameter(format!("a sweep needs at least 3 resolutions, got {}", ns.len())));
    }
    Ok(())
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    if min > 0.0 {
        max / min - 1.0
    } else {
        f64::INFINITY
    }
}

fn ratio_of(num: f64, den: f64) -> Option<f64> {
    if den > 0.0 {
        Some(num / den)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------------------------
// Half-space multiplier on H^t_p

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrichartzConfig {
    pub box_length: f64,
    pub support_radius: f64,
    pub ns: Vec<usize>,
    pub ps: Vec<f64>,
    pub ts: Vec<f64>,
    /// Distance from the interval ends at which a verdict is expected.
    pub margin: f64,
    pub indicator: IndicatorSpec,
    /// Mollification width of the indicator in lattice cells.
    pub epsilon_cells: f64,
    pub corpus: CorpusSpec,
    pub seed: u64,
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        StrichartzConfig {
            box_length: PI,
            support_radius: PI / 4.0,
            ns: vec![128, 256, 512, 1024],
            ps: vec![1.5, 2.0, 4.0],
            ts: (0..=16).map(|i| -1.0 + 0.125 * i as f64).collect(),
            margin: 0.125,
            indicator: IndicatorSpec::half_space(vec![1.0], 0.0),
            epsilon_cells: 0.0,
            corpus: CorpusSpec { kinds: vec![CorpusKind::Gaussian, CorpusKind::CompactBump, CorpusKind::BoundaryBump, CorpusKind::EdgePacket],
                count: 8, },
            seed: 1,
        }
    }
}

impl StrichartzConfig {
    pub fn validate(&self) -> Result<()> {
        check_sweep(&self.ns)?;
        if self.ps.iter().any(|p| !(*p > 1.0 && p.is_finite())) {
            return Err(Error::InvalidParameter("every p must lie in (1, inf)".into()));
        }
        if self.ts.is_empty() || self.ts.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("t list must be finite and nonempty".into()));
        }
        if !(self.epsilon_cells >= 0.0) {
            return Err(Error::InvalidParameter("epsilon_cells must be >= 0".into()));
        }
        for &n in &self.ns {
            let grid = make_grid(1, 1, n, self.box_length, self.support_radius)?;
            self.indicator.validate(&grid)?;
        }
        Ok(())
    }
}

/// `||(1 + |xi|^2)^{t/2} f||_p` for every `t` and `p`, indexed `[t][p]`.
fn sobolev_table(f: &GridFunction, ts: &[f64], ps: &[f64]) -> Result<Vec<Vec<f64>>> {
    let raw = RawSpectrum::of(f);
    let norms = f.spec().freq_norms(f.spec().d());
    ts.iter()
        .map(|&t| {
            let a: Vec<f64> = norms.iter().map(|r| (1.0 + r * r).powf(t / 2.0)).collect();
            let g = raw.apply(&a);
            ps.iter().map(|&p| lp_norm(&g, p)).collect()
        })
        .collect()
}

fn strichartz_cell(cfg: &StrichartzConfig, n: usize) -> Result<Vec<Vec<Option<f64>>>> {
    let grid = make_grid(1, 1, n, cfg.box_length, cfg.support_radius)?;
    let mut ind_spec = cfg.indicator.clone();
    ind_spec.epsilon = cfg.epsilon_cells * grid.h();
    let ind = make_indicator(&ind_spec, &grid)?;
    let ctx = CorpusContext { cone_axis: None, boundary: Some((ind_spec.normal.clone(), ind_spec.boundaries())) };
    let corpus = make_corpus(&cfg.corpus, &grid, cfg.seed, &ctx)?;
    let per_member: Vec<Result<Vec<Vec<Option<f64>>>>> = corpus
        .par_iter()
        .map(|m| {
            let den = sobolev_table(&m.function, &cfg.ts, &cfg.ps)?;
            let num = sobolev_table(&ind.mul(&m.function)?, &cfg.ts, &cfg.ps)?;
            Ok(den.iter().zip(&num).map(|(d, u)| d.iter().zip(u).map(|(a, b)| ratio_of(*b, *a)).collect()).collect())
        })
        .collect();
    let mut best = vec![vec![None; cfg.ps.len()]; cfg.ts.len()];
    for m in per_member {
        for (ti, row) in m?.into_iter().enumerate() {
            for (pi, v) in row.into_iter().enumerate() {
                if let Some(v) = v {
                    best[ti][pi] = Some(best[ti][pi].map_or(v, |b: f64| b.max(v)));
                }
            }
        }
    }
    Ok(best)
}

/// Max-over-corpus ratios `||1_L phi||_{H^t_p} / ||phi||_{H^t_p}` per resolution, their slope in
/// `log2 N`, and whether the verdict matches the interval.
pub fn run_strichartz_scan(cfg: &StrichartzConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let cells: Vec<Result<Vec<Vec<Option<f64>>>>> = cfg.ns.par_iter().map(|&n| strichartz_cell(cfg, n)).collect();
    let cells: Vec<Vec<Vec<Option<f64>>>> = cells.into_iter().collect::<Result<_>>()?;
    let u = Some(cfg.indicator.normal.clone());
    let mut out = Vec::new();
    for (pi, &p) in cfg.ps.iter().enumerate() {
        for (ti, &t) in cfg.ts.iter().enumerate() {
            let base = |q: &str, v: f64, verdict| {
                ResultRecord::new("strichartz", q, v, verdict, cfg.seed)
                    .with_pst(Some(p), None, Some(t), None)
                    .with_geometry(None, u.clone())
            };
            let mut series = Vec::new();
            for (ni, &n) in cfg.ns.iter().enumerate() {
                match cells[ni][ti][pi] {
                    Some(v) => {
                        out.push(base("ratio", v, Verdict::Measured).with_n(n));
                        series.push((n, v));
                    }
                    None => out.push(base("ratio", 0.0, Verdict::Degenerate).with_n(n)),
                }
            }
            let expectation = strichartz_expectation(p, t, cfg.margin);
            if series.len() < cfg.ns.len() {
                out.push(base(&format!("expect_{}", expectation.name()), 0.0, Verdict::Degenerate));
                continue;
            }
            let (slope, verdict) = classify_boundedness(&series)?;
            let last = series.last().map_or(0.0, |s| s.1);
            out.push(base("ratio_sweep", last, verdict).with_slope(slope));
            let check = match expectation {
                Expectation::Interior => Verdict::from_check(verdict == Verdict::Bounded),
                Expectation::Exterior => Verdict::from_check(verdict == Verdict::Divergent),
                Expectation::Boundary => Verdict::Measured,
            };
            out.push(base(&format!("expect_{}", expectation.name()), slope, check).with_slope(slope));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------------------------
// Indicator multipliers on the anisotropic space

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierConfig {
    pub d: usize,
    pub d_s: usize,
    pub box_length: f64,
    pub support_radius: f64,
    pub ns: Vec<usize>,
    pub params: Vec<NormParams>,
    /// Cone aperture in radians around the last `d - d_s` axes.
    pub cone_theta: f64,
    pub leaves: LeafFamilyConfig,
    pub indicator: IndicatorSpec,
    /// Mollification widths in lattice cells; each gets its own sweep.
    pub epsilon_cells: Vec<f64>,
    pub corpus: CorpusSpec,
    pub seed: u64,
}

impl Default for MultiplierConfig {
    fn default() -> Self {
        let k = PI / 8.0;
        MultiplierConfig {
            d: 2,
            d_s: 1,
            box_length: PI / 2.0,
            support_radius: k,
            ns: vec![64, 128, 256, 512],
            params: vec![
                NormParams { p: 2.0, s: -0.4, t: 0.2, r: 3.0 },
                NormParams { p: 1.5, s: -0.3, t: 0.2, r: 3.0 },
                NormParams { p: 4.0, s: -0.5, t: 0.3, r: 3.0 },
            ],
            cone_theta: 30f64.to_radians(),
            leaves: LeafFamilyConfig::default(),
            indicator: IndicatorSpec::strip(vec![1.0, 0.0], k / 2.0, 0.0),
            epsilon_cells: vec![0.0, 1.0, 4.0],
            corpus: CorpusSpec::default(),
            seed: 1,
        }
    }
}

impl MultiplierConfig {
    pub fn cone(&self) -> Result<UnstableCone> {
        UnstableCone::vertical(self.d_s, self.d - self.d_s, self.cone_theta)
    }

    pub fn validate(&self) -> Result<()> {
        check_sweep(&self.ns)?;
        if self.params.is_empty() {
            return Err(Error::InvalidParameter("no parameter tuples".into()));
        }
        for q in &self.params {
            NormParams::new(q.p, q.s, q.t, q.r)?;
            if !q.in_norm_range() {
                return Err(Error::Inadmissible(format!(
                    "(p, s, t, r) = ({}, {}, {}, {}): need t - (r-1) < s < -t < 0",
                    q.p, q.s, q.t, q.r
                )));
            }
            if !q.p.is_finite() {
                return Err(Error::InvalidParameter("p must be finite".into()));
            }
            if (q.r - self.leaves.r).abs() > 0.0 {
                return Err(Error::InvalidParameter(format!("r = {} differs from the leaf budget {}", q.r, self.leaves.r)));
            }
        }
        if self.epsilon_cells.is_empty() || self.epsilon_cells.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::InvalidParameter("epsilon_cells must be a nonempty list of values >= 0".into()));
        }
        self.cone()?;
        for &n in &self.ns {
            let grid = make_grid(self.d, self.d_s, n, self.box_length, self.support_radius)?;
            self.indicator.validate(&grid)?;
        }
        Ok(())
    }
}

fn ratio_tables(num: &AnisoTables, den: &AnisoTables, params: &[NormParams], ps: &[f64]) -> Vec<Option<f64>> {
    params
        .iter()
        .map(|q| {
            let pi = ps.iter().position(|p| *p == q.p).expect("p listed");
            ratio_of(num.report(pi, q.s, q.t).value, den.report(pi, q.s, q.t).value)
        })
        .collect()
}

/// `[epsilon][param]` max-over-corpus ratios at one resolution.
fn multiplier_cell(cfg: &MultiplierConfig, n: usize, ps: &[f64]) -> Result<Vec<Vec<Option<f64>>>> {
    let grid = make_grid(cfg.d, cfg.d_s, n, cfg.box_length, cfg.support_radius)?;
    let cone = cfg.cone()?;
    let family = sample_leaf_family(&cfg.leaves, &cone, &grid, cfg.seed)?;
    let indicators: Vec<GridFunction> = cfg
        .epsilon_cells
        .iter()
        .map(|e| {
            let mut spec = cfg.indicator.clone();
            spec.epsilon = e * grid.h();
            make_indicator(&spec, &grid)
        })
        .collect::<Result<_>>()?;
    let ctx = CorpusContext {
        cone_axis: Some(cone.axis()[0].clone()),
        boundary: Some((cfg.indicator.normal.clone(), cfg.indicator.boundaries())),
    };
    let corpus = make_corpus(&cfg.corpus, &grid, cfg.seed, &ctx)?;
    let mut best = vec![vec![None; cfg.params.len()]; indicators.len()];
    for m in &corpus {
        let den = aniso_tables(&m.function, &family, ps)?;
        for (ei, ind) in indicators.iter().enumerate() {
            let num = aniso_tables(&ind.mul(&m.function)?, &family, ps)?;
            for (qi, v) in ratio_tables(&num, &den, &cfg.params, ps).into_iter().enumerate() {
                if let Some(v) = v {
                    best[ei][qi] = Some(best[ei][qi].map_or(v, |b: f64| b.max(v)));
                }
            }
        }
    }
    Ok(best)
}

/// Max-over-corpus ratios `aniso(1_L phi) / aniso(phi)` per resolution and their verdicts.
///
/// Admissible tuples with a transversal normal carry a `contract_bounded` pass/fail row; other
/// tuples and normals are reported as `exploratory` rows only.
pub fn run_multiplier_scan(cfg: &MultiplierConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let cone = cfg.cone()?;
    let transversal = cfg.indicator.is_transversal(&cone)?;
    let mut ps: Vec<f64> = Vec::new();
    for q in &cfg.params {
        if !ps.contains(&q.p) {
            ps.push(q.p);
        }
    }
    let cells: Vec<Vec<Vec<Option<f64>>>> = cfg
        .ns
        .iter()
        .map(|&n| multiplier_cell(cfg, n, &ps))
        .collect::<Result<_>>()?;
    let theta = Some(cfg.cone_theta.to_degrees());
    let u = Some(cfg.indicator.normal.clone());
    let mut out = Vec::new();
    for (qi, q) in cfg.params.iter().enumerate() {
        let proven = q.is_admissible() && transversal;
        for (ei, e) in cfg.epsilon_cells.iter().enumerate() {
            let tag = format!("eps{e}h");
            let base = |quantity: String, v: f64, verdict| {
                ResultRecord::new("multiplier", &quantity, v, verdict, cfg.seed)
                    .with_pst(Some(q.p), Some(q.s), Some(q.t), Some(q.r))
                    .with_geometry(theta, u.clone())
            };
            let mut series = Vec::new();
            for (ni, &n) in cfg.ns.iter().enumerate() {
                match cells[ni][ei][qi] {
                    Some(v) => {
                        out.push(base(format!("ratio_{tag}"), v, Verdict::Measured).with_n(n));
                        series.push((n, v));
                    }
                    None => out.push(base(format!("ratio_{tag}"), 0.0, Verdict::Degenerate).with_n(n)),
                }
            }
            if series.len() < cfg.ns.len() {
                continue;
            }
            let (slope, verdict) = classify_boundedness(&series)?;
            let last = series.last().map_or(0.0, |s| s.1);
            out.push(base(format!("ratio_sweep_{tag}"), last, verdict).with_slope(slope));
            if proven {
                out.push(
                    base(format!("contract_bounded_{tag}"), slope, Verdict::from_check(verdict == Verdict::Bounded))
                        .with_slope(slope),
                );
            } else {
                out.push(base(format!("exploratory_{tag}"), slope, verdict).with_slope(slope));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------------------------
// Lemma suite

/// Individual checks of the lemma suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaCheck {
    Foundations,
    KernelMass,
    Paraproduct,
    SingleCoordinate,
    Product,
    IndicatorBesov,
    Nikolskij,
    Young,
}

impl LemmaCheck {
    pub const ALL: [LemmaCheck; 8] = [
        LemmaCheck::Foundations,
        LemmaCheck::KernelMass,
        LemmaCheck::Paraproduct,
        LemmaCheck::SingleCoordinate,
        LemmaCheck::Product,
        LemmaCheck::IndicatorBesov,
        LemmaCheck::Nikolskij,
        LemmaCheck::Young,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LemmaCheck::Foundations => "foundations",
            LemmaCheck::KernelMass => "kernel_mass",
            LemmaCheck::Paraproduct => "paraproduct",
            LemmaCheck::SingleCoordinate => "single_coordinate",
            LemmaCheck::Product => "product",
            LemmaCheck::IndicatorBesov => "indicator_besov",
            LemmaCheck::Nikolskij => "nikolskij",
            LemmaCheck::Young => "young",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        LemmaCheck::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown lemma check {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaConfig {
    pub checks: Vec<LemmaCheck>,
    /// Box for the two-dimensional checks.
    pub box_length: f64,
    pub support_radius: f64,
    /// Resolutions of the partition checks, run in one and two dimensions.
    pub foundation_ns: Vec<usize>,
    pub orthogonality_trials: usize,
    /// Resolution of the reconstruction and single-coordinate checks.
    pub n: usize,
    pub paraproduct_pairs: usize,
    /// Resolution sweep of the product and indicator checks.
    pub ns: Vec<usize>,
    pub product_p: f64,
    pub product_s: f64,
    /// Mollification of the product-lemma step, as a fraction of `K_rad`.
    pub product_step_width: f64,
    /// One-dimensional box for the kernel-mass checks.
    pub mass_box_length: f64,
    pub mass_ns: Vec<usize>,
    /// One-dimensional box and resolution for the Nikol'skij family.
    pub nikolskij_box_length: f64,
    pub nikolskij_n: usize,
    pub young_n: usize,
    pub young_bands: Vec<usize>,
    pub young_s: f64,
    pub young_p: f64,
    pub cone_theta: f64,
    pub leaves: LeafFamilyConfig,
    pub corpus: CorpusSpec,
    pub tolerance: Tolerance,
    pub seed: u64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            checks: LemmaCheck::ALL.to_vec(),
            box_length: PI / 2.0,
            support_radius: PI / 8.0,
            foundation_ns: vec![128, 256],
            orthogonality_trials: 50,
            n: 256,
            paraproduct_pairs: 20,
            ns: vec![128, 256, 512],
            product_p: 2.0,
            product_s: -0.3,
            product_step_width: 0.25,
            mass_box_length: 8.0 * PI,
            mass_ns: vec![1024, 2048],
            nikolskij_box_length: 2.0 * PI,
            nikolskij_n: 4096,
            young_n: 128,
            young_bands: vec![2, 4],
            young_s: -0.4,
            young_p: 2.0,
            cone_theta: 30f64.to_radians(),
            leaves: LeafFamilyConfig::default(),
            corpus: CorpusSpec::default(),
            tolerance: Tolerance::default(),
            seed: 1,
        }
    }
}

impl LemmaConfig {
    pub fn validate(&self) -> Result<()> {
        check_sweep(&self.ns)?;
        if self.foundation_ns.is_empty() || self.mass_ns.len() < 2 {
            return Err(Error::InvalidParameter("need foundation resolutions and two kernel-mass resolutions".into()));
        }
        if !(self.product_p > 1.0 && self.product_p.is_finite()) || !(self.young_p >= 1.0) {
            return Err(Error::InvalidParameter("product and Young exponents out of range".into()));
        }
        if !(self.product_step_width > 0.0) {
            return Err(Error::InvalidParameter("product_step_width must be positive".into()));
        }
        for &n in self.foundation_ns.iter().chain(&self.ns).chain([&self.n, &self.young_n]) {
            make_grid(2, 1, n, self.box_length, self.support_radius)?;
        }
        for &n in &self.mass_ns {
            make_grid(1, 1, n, self.mass_box_length, self.mass_box_length / 4.0)?;
        }
        make_grid(1, 1, self.nikolskij_n, self.nikolskij_box_length, self.nikolskij_box_length / 4.0)?;
        UnstableCone::vertical(1, 1, self.cone_theta)?;
        Ok(())
    }

    fn grid2(&self, n: usize) -> Result<GridSpec> {
        make_grid(2, 1, n, self.box_length, self.support_radius)
    }
}

fn lemma_record(name: &str, quantity: &str, value: f64, ok: bool, cfg: &LemmaConfig) -> ResultRecord {
    ResultRecord::new(&format!("lemmas/{name}"), quantity, value, Verdict::from_check(ok), cfg.seed)
}

fn lemma_foundations(cfg: &LemmaConfig) -> Result<Vec<ResultRecord>> {
    let tol = cfg.tolerance;
    let mut out = Vec::new();
    for d in [1usize, 2] {
        for &n in &cfg.foundation_ns {
            let grid = make_grid(d, 1, n, cfg.box_length, cfg.support_radius)?;
            let tag = |q: &str| format!("{q}_d{d}");
            let v = partition_defect(&grid, cfg.seed);
            out.push(lemma_record("foundations", &tag("partition_defect"), v, v <= tol.partition, cfg).with_n(n));
            let v = orthogonality_defect(&grid, cfg.orthogonality_trials, cfg.seed)?;
            out.push(lemma_record("foundations", &tag("orthogonality_defect"), v, v <= tol.orthogonality, cfg).with_n(n));
            let f = random_trig_polynomial(&grid, grid.nyquist(), cfg.seed);
            let v = round_trip_error(&f);
            out.push(lemma_record("foundations", &tag("round_trip_error"), v, v <= tol.round_trip, cfg).with_n(n));
            let top = grid.n_max();
            let g = random_trig_polynomial(&grid, grid.nyquist(), cfg.seed ^ 0x5eed);
            let (mut low_high, mut high_high) = (0.0f64, 0.0f64);
            for k in 2..=top {
                if let Ok(v) = support_check(SupportFact::LowHigh, k, &f, &g) {
                    low_high = low_high.max(v);
                }
            }
            for k in 0..top {
                if let Ok(v) = support_check(SupportFact::HighHigh, k, &f, &g) {
                    high_high = high_high.max(v);
                }
            }
            out.push(lemma_record("foundations", &tag("support_low_high"), low_high, low_high <= tol.support, cfg).with_n(n));
            out.push(lemma_record("foundations", &tag("support_high_high"), high_high, high_high <= tol.support, cfg).with_n(n));
        }
    }
    Ok(out)
}

fn lemma_kernel_mass(cfg: &LemmaConfig) -> Result<Vec<ResultRecord>> {
    let tol = cfg.tolerance;
    let mut out = Vec::new();
    let mut per_n: Vec<Vec<f64>> = Vec::new();
    for &n in &cfg.mass_ns {
        let grid = make_grid(1, 1, n, cfg.mass_box_length, cfg.mass_box_length / 4.0)?;
        let masses: Vec<f64> = (1..=grid.n_max()).map(|b| kernel_l1_mass(&grid, b)).collect::<Result<_>>()?;
        let variation = masses.iter().cloned().fold(0.0, f64::max) / masses.iter().cloned().fold(f64::MAX, f64::min);
        out.push(lemma_record("kernel_mass", "l1_mass_variation", variation, variation < tol.mass_variation, cfg).with_n(n));
        let decay = derivative_decay(&grid, 2..=grid.n_max())?;
        let scaled: Vec<f64> = decay.iter().map(|(b, v)| v * (*b as f64).exp2()).collect();
        let spread = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::MAX, f64::min);
        out.push(
            lemma_record("kernel_mass", "derivative_decay_spread", spread, spread <= tol.derivative_factor, cfg).with_n(n),
        );
        per_n.push(masses);
    }
    for w in per_n.windows(2).zip(cfg.mass_ns.windows(2)) {
        let (a, b, ns) = (&w.0[0], &w.0[1], w.1);
        let drift = a.iter().zip(b.iter()).map(|(x, y)| (y / x - 1.0).abs()).fold(0.0, f64::max);
        out.push(lemma_record("kernel_mass", "l1_mass_drift", drift, drift < tol.mass_drift, cfg).with_n(ns[1]));
    }
    Ok(out)
}

fn lemma_paraproduct(cfg: &LemmaConfig) -> Result<Vec<ResultRecord>> {
    let grid = cfg.grid2(cfg.n)?;
    let j_max = grid.n_max();
    let radius = (j_max as f64).exp2();
    let mut worst = 0.0f64;
    for i in 0..cfg.paraproduct_pairs as u64 {
        let f = random_trig_polynomial(&grid, radius, cfg.seed.wrapping_add(2 * i));
        let g = random_trig_polynomial(&grid, radius, cfg.seed.wrapping_add(2 * i + 1));
        worst = worst.max(paraproduct_split(&f, &g, j_max)?.relative_residual);
    }
    Ok(vec![lemma_record("paraproduct", "reconstruction_residual", worst, worst <= cfg.tolerance.reconstruction, cfg)
        .with_n(cfg.n)])
}

fn lemma_single_coordinate(cfg: &LemmaConfig) -> Result<Vec<ResultRecord>> {
    let grid = cfg.grid2(cfg.n)?;
    let tol = cfg.tolerance.single_coordinate;
    let mut worst = 0.0f64;
    for eps in [0.0, grid.h()] {
        let spec = IndicatorSpec::strip(vec![1.0, 0.0], cfg.support_radius / 2.0, eps);
        worst = worst.max(single_coordinate_deviation(&make_indicator(&spec, &grid)?)?);
    }
    let profiles = make_corpus(
        &CorpusSpec { kinds: vec![CorpusKind::X1Profile], count: 4 },
        &grid,
        cfg.seed,
        &CorpusContext::default(),
    )?;
    for m in &profiles {
        worst = worst.max(single_coordinate_deviation(&m.function)?);
    }
    Ok(vec![lemma_record("single_coordinate", "deviation", worst, worst <= tol, cfg).with_n(cfg.n)])
}

fn lemma_product(cfg: &LemmaConfig) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    let mut series = Vec::new();
    for &n in &cfg.ns {
        let grid = cfg.grid2(n)?;
        let step = IndicatorSpec::half_space(vec![1.0, 0.0], cfg.product_step_width * cfg.support_radius);
        let g = make_indicator(&step, &grid)?;
        let corpus = make_corpus(&cfg.corpus, &grid, cfg.seed, &CorpusContext::default())?;
        let ratios: Vec<f64> = corpus
            .par_iter()
            .map(|m| product_inequality_ratio(&m.function, &g, cfg.product_s, cfg.product_p).map(|r| r.ratio))
            .collect::<Result<_>>()?;
        let v = ratios.iter().cloned().fold(0.0, f64::max);
        out.push(
            ResultRecord::new("lemmas/product", "product_ratio", v, Verdict::Measured, cfg.seed)
                .with_pst(Some(cfg.product_p), Some(cfg.product_s), None, None)
                .with_n(n),
        );
        series.push(v);
    }
    let drift = spread(&series);
    out.push(
        lemma_record("product", "product_ratio_drift", drift, drift < cfg.tolerance.drift, cfg).with_pst(
            Some(cfg.product_p),
            Some(cfg.product_s),
            None,
            None,
        ),
    );
    Ok(out)
}

fn lemma_indicator_besov(cfg: &LemmaConfig) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for s in [0.4, 0.5] {
        let mut series = Vec::new();
        for &n in &cfg.ns {
            let grid = make_grid(1, 1, n, 2.0 * cfg.box_length, 2.0 * cfg.support_radius)?;
            let spec = IndicatorSpec::strip(vec![1.0], cfg.support_radius, 0.0);
            let v = besov_norm(&make_indicator(&spec, &grid)?, s, 2.0)?.value;
            out.push(
                ResultRecord::new("lemmas/indicator_besov", "strip_besov", v, Verdict::Measured, cfg.seed)
                    .with_pst(Some(2.0), Some(s), None, None)
                    .with_n(n),
            );
            series.push(v);
        }
        let drift = spread(&series);
        out.push(
            lemma_record("indicator_besov", "strip_besov_drift", drift, drift < cfg.tolerance.drift, cfg)
                .with_pst(Some(2.0), Some(s), None, None),
        );
    }
    Ok(out)
}

fn lemma_nikolskij(cfg: &LemmaConfig) -> Result<Vec<ResultRecord>> {
    let grid = make_grid(1, 1, cfg.nikolskij_n, cfg.nikolskij_box_length, cfg.nikolskij_box_length / 4.0)?;
    let mut delta = vec![Complex64::new(0.0, 0.0); grid.len()];
    delta[grid.n() / 2] = Complex64::new(1.0 / grid.h(), 0.0);
    let delta = GridFunction::new(grid, delta)?;
    let mut out = Vec::new();
    let mut xs = Vec::new();
    for j in 3..=grid.n_max() {
        let f = lp_partial_sum(j as i64, &delta)?;
        let m = ((j + 1) as f64).exp2();
        let v = nikolskij_ratio(&f, 2.0, 1.0, m)?;
        out.push(
            ResultRecord::new("lemmas/nikolskij", &format!("ratio_M{m}"), v, Verdict::Measured, cfg.seed)
                .with_pst(Some(2.0), None, None, None)
                .with_n(grid.n()),
        );
        xs.push((m as usize, v));
    }
    let (slope, _) = classify_boundedness(&xs)?;
    let max = xs.iter().map(|x| x.1).fold(0.0, f64::max);
    out.push(
        lemma_record("nikolskij", "ratio_growth_slope", slope, slope.abs() < cfg.tolerance.growth_slope, cfg)
            .with_pst(Some(2.0), None, None, None)
            .with_n(grid.n())
            .with_slope(slope),
    );
    out.push(
        ResultRecord::new("lemmas/nikolskij", "ratio_constant", max, Verdict::Measured, cfg.seed)
            .with_pst(Some(2.0), None, None, None)
            .with_n(grid.n()),
    );
    Ok(out)
}

/// `F^{-1} psi_k` as a grid function.
fn band_kernel(grid: &GridSpec, k: usize) -> Result<GridFunction> {
    let coeffs = grid.freq_norms(grid.d()).iter().map(|r| Complex64::new(psi(k, *r), 0.0)).collect();
    Ok(dft_inverse(&SpectrumFunction::new(*grid, coeffs)?))
}

fn lemma_young(cfg: &LemmaConfig) -> Result<Vec<ResultRecord>> {
    let grid = cfg.grid2(cfg.young_n)?;
    let cone = UnstableCone::vertical(1, 1, cfg.cone_theta)?;
    let family = sample_leaf_family(&cfg.leaves, &cone, &grid, cfg.seed)?;
    let ctx = CorpusContext { cone_axis: Some(cone.axis()[0].clone()), boundary: None };
    let corpus = make_corpus(&cfg.corpus, &grid, cfg.seed, &ctx)?;
    let mut worst = 0.0f64;
    for &k in &cfg.young_bands {
        let kernel = band_kernel(&grid, k)?;
        for m in &corpus {
            worst = worst.max(leafwise_young_check(&kernel, &m.function, &family, cfg.young_s, cfg.young_p)?);
        }
    }
    Ok(vec![lemma_record("young", "young_ratio", worst, worst <= cfg.tolerance.young, cfg)
        .with_pst(Some(cfg.young_p), Some(cfg.young_s), None, Some(cfg.leaves.r))
        .with_geometry(Some(cfg.cone_theta.to_degrees()), None)
        .with_n(cfg.young_n)])
}

/// Run the selected checks, one record per check, parameter point and resolution.
pub fn run_lemma_suite(cfg: &LemmaConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for check in &cfg.checks {
        let recs = match check {
            LemmaCheck::Foundations => lemma_foundations(cfg)?,
            LemmaCheck::KernelMass => lemma_kernel_mass(cfg)?,
            LemmaCheck::Paraproduct => lemma_paraproduct(cfg)?,
            LemmaCheck::SingleCoordinate => lemma_single_coordinate(cfg)?,
            LemmaCheck::Product => lemma_product(cfg)?,
            LemmaCheck::IndicatorBesov => lemma_indicator_besov(cfg)?,
            LemmaCheck::Nikolskij => lemma_nikolskij(cfg)?,
            LemmaCheck::Young => lemma_young(cfg)?,
        };
        out.extend(recs);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------------------------
// Kernel decay

/// A named leaf for the kernel sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelLeaf {
    pub name: String,
    pub shape: LeafShape,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelConfig {
    pub box_length: f64,
    pub support_radius: f64,
    pub n: usize,
    pub cone_theta: f64,
    pub bands: Vec<usize>,
    pub leaves: Vec<KernelLeaf>,
    pub c_f: f64,
    pub r: f64,
    pub tolerance: Tolerance,
    pub seed: u64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        let sin = |name: &str, a: f64, w: f64| KernelLeaf {
            name: name.into(),
            shape: LeafShape::Sinusoidal { amplitude: vec![a], wavevector: vec![w], phase: 0.0 },
        };
        KernelConfig {
            box_length: PI / 2.0,
            support_radius: PI / 8.0,
            n: 512,
            cone_theta: 30f64.to_radians(),
            bands: vec![2, 3],
            leaves: vec![
                KernelLeaf { name: "horizontal".into(), shape: LeafShape::Horizontal },
                KernelLeaf { name: "affine_up".into(), shape: LeafShape::Affine { slope: vec![0.37], intercept: vec![0.0] } },
                KernelLeaf {
                    name: "affine_down".into(),
                    shape: LeafShape::Affine { slope: vec![-0.2], intercept: vec![0.05] },
                },
                sin("sin_w8", 0.05, 8.0),
                sin("sin_w12", 0.035, 12.0),
                sin("sin_w4", 0.1, 4.0),
            ],
            c_f: 64.0,
            r: 3.0,
            tolerance: Tolerance::default(),
            seed: 1,
        }
    }
}

impl KernelConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        make_grid(2, 1, self.n, self.box_length, self.support_radius)
    }

    /// Validated leaves, in config order.
    pub fn build_leaves(&self) -> Result<Vec<AdmissibleLeaf>> {
        let grid = self.grid()?;
        let cone = UnstableCone::vertical(1, 1, self.cone_theta)?;
        let bounds = LeafBounds { c_f: self.c_f, r: self.r, half_width: self.box_length / 2.0 };
        self.leaves
            .iter()
            .map(|l| {
                let leaf = make_graph_leaf(l.shape.clone(), &cone, bounds, vec![0.0, 0.0])?;
                leaf.check_in_box(&grid)?;
                Ok(leaf)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands.is_empty() || self.leaves.is_empty() {
            return Err(Error::InvalidParameter("kernel sweep needs bands and leaves".into()));
        }
        let grid = self.grid()?;
        if let Some(k) = self.bands.iter().find(|k| **k + 1 >= grid.n_max()) {
            return Err(Error::BandOutOfRange { band: *k as i64, n_max: grid.n_max() });
        }
        self.build_leaves()?;
        Ok(())
    }
}

/// Calibrate the separation on the flat leaves, then sweep every leaf.
///
/// Flat leaves must give a numerically zero kernel past the separation; curved leaves must show
/// a fitted decay exponent of at least `r - decay_margin`.
pub fn run_kernel_decay(cfg: &KernelConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let leaves = cfg.build_leaves()?;
    let tol = cfg.tolerance;
    let theta = Some(cfg.cone_theta.to_degrees());
    let flat: Vec<AdmissibleLeaf> = leaves
        .iter()
        .filter(|l| matches!(l.shape().kind(), LeafKind::Horizontal | LeafKind::Affine))
        .cloned()
        .collect();
    let rec = |name: &str, q: String, v: f64, verdict| {
        ResultRecord::new(&format!("kernel_decay/{name}"), &q, v, verdict, cfg.seed)
            .with_pst(None, None, None, Some(cfg.r))
            .with_geometry(theta, None)
            .with_n(cfg.n)
    };
    let mut out = Vec::new();
    for &k in &cfg.bands {
        let c0 = calibrate_separation(k, &flat, &grid)?;
        out.push(rec("calibration", format!("c0_k{k}"), c0 as f64, Verdict::Measured));
        let per_leaf: Vec<Result<Vec<ResultRecord>>> = leaves
            .par_iter()
            .zip(&cfg.leaves)
            .map(|(leaf, named)| {
                let decay = kernel_decay(k, leaf, &grid, c0)?;
                let mut rows = Vec::new();
                for p in &decay.probes {
                    rows.push(rec(&named.name, format!("relative_kernel_k{k}_ks{}", p.k_s), p.relative, Verdict::Measured));
                }
                match leaf.shape().kind() {
                    LeafKind::Horizontal | LeafKind::Affine => {
                        let v = decay.max_separated;
                        rows.push(rec(&named.name, format!("separated_kernel_k{k}"), v, Verdict::from_check(v <= tol.kernel_zero)));
                    }
                    _ => {
                        let (v, ok) = match decay.exponent {
                            Some(e) => (e, e >= cfg.r - tol.decay_margin),
                            None => (f64::INFINITY, decay.max_separated <= tol.kernel_zero),
                        };
                        rows.push(rec(&named.name, format!("decay_exponent_k{k}"), v, Verdict::from_check(ok)));
                    }
                }
                Ok(rows)
            })
            .collect();
        for rows in per_leaf {
            out.extend(rows?);
        }
    }
    Ok(out)
}
