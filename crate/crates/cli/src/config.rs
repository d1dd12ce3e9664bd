//! TOML experiment files. Every key is optional and overrides the experiment's default.

use std::path::Path;

use serde::Deserialize;

use anisolab::lab::{
    CorpusKind, CorpusSpec, IndicatorShape, IndicatorSpec, KernelConfig, KernelLeaf, LemmaCheck, LemmaConfig,
    MultiplierConfig, StrichartzConfig,
};
use anisolab::{LeafFamilyConfig, LeafKind, LeafShape, NormParams};

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub norm: NormSection,
    #[serde(default)]
    pub cone: ConeSection,
    #[serde(default)]
    pub leaves: LeavesSection,
    #[serde(default)]
    pub indicator: IndicatorSection,
    #[serde(default)]
    pub corpus: CorpusSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

/// `[grid]`: lattice geometry.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Ambient dimension.
    pub d: Option<usize>,
    /// Stable dimension.
    pub d_s: Option<usize>,
    /// Side length `L` of the periodic box.
    pub box_length: Option<f64>,
    /// Radius `K_rad` of the support ball.
    pub support_radius: Option<f64>,
    /// Single resolution for experiments that do not sweep.
    pub n: Option<usize>,
}

/// One `(p, s, t)` point.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tuple {
    pub p: f64,
    pub s: f64,
    pub t: f64,
}

/// `[norm]`: exponents.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSection {
    /// Parameter points of the multiplier scan.
    pub tuples: Option<Vec<Tuple>>,
    /// Smoothness budget `r` of the leaves.
    pub r: Option<f64>,
    /// `p` list of the Strichartz scan.
    pub ps: Option<Vec<f64>>,
    /// `t` list of the Strichartz scan.
    pub ts: Option<Vec<f64>>,
    /// `(p, s)` of the product-lemma probe.
    pub product_p: Option<f64>,
    pub product_s: Option<f64>,
}

/// `[cone]`: vertical unstable cone.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSection {
    /// Aperture in degrees.
    pub theta_deg: Option<f64>,
}

/// An explicit leaf for the kernel sweep.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafEntry {
    pub name: String,
    /// `horizontal`, `affine`, `sinusoidal` or `quadratic`.
    pub kind: String,
    /// Flat coefficient list, see `LeafShape::from_coefficients`.
    #[serde(default)]
    pub coefficients: Vec<f64>,
}

/// `[leaves]`: sampled family and explicit kernel-sweep leaves.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeavesSection {
    pub affine: Option<usize>,
    pub sinusoidal: Option<usize>,
    pub quadratic: Option<usize>,
    pub translations_per_side: Option<usize>,
    pub translation_step: Option<f64>,
    pub slope_fraction: Option<f64>,
    pub max_harmonic: Option<usize>,
    pub c_f: Option<f64>,
    /// Leaves of the kernel-decay sweep.
    pub explicit: Option<Vec<LeafEntry>>,
    /// Ambient bands `k` of the kernel-decay sweep.
    pub bands: Option<Vec<usize>>,
}

/// `[indicator]`: half-space or strip.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorSection {
    pub normal: Option<Vec<f64>>,
    /// `half_space` or `strip`.
    pub shape: Option<String>,
    pub offset: Option<f64>,
    /// Strip width as a fraction of `K_rad`.
    pub width: Option<f64>,
    /// Mollification widths in lattice cells.
    pub epsilon_cells: Option<Vec<f64>>,
}

/// `[corpus]`: test functions.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub kinds: Option<Vec<String>>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
}

/// `[sweep]`: resolutions and experiment-specific knobs.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub ns: Option<Vec<usize>>,
    /// Verdict margin of the Strichartz scan.
    pub margin: Option<f64>,
    /// Lemma checks to run.
    pub checks: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    fn corpus(&self, mut base: CorpusSpec) -> Result<CorpusSpec, CliError> {
        if let Some(kinds) = &self.corpus.kinds {
            base.kinds = kinds.iter().map(|k| CorpusKind::parse(k)).collect::<Result<_, _>>().map_err(cfg_err)?;
        }
        if let Some(c) = self.corpus.count {
            base.count = c;
        }
        Ok(base)
    }

    fn seed(&self, cli: Option<u64>, default: u64) -> u64 {
        cli.or(self.corpus.seed).unwrap_or(default)
    }

    fn indicator(&self, mut base: IndicatorSpec, k_rad: f64) -> Result<IndicatorSpec, CliError> {
        let ind = &self.indicator;
        if let Some(n) = &ind.normal {
            let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(CliError::Config("indicator normal must be nonzero".into()));
            }
            base.normal = n.iter().map(|x| x / norm).collect();
        }
        let (old_offset, old_width) = match base.shape {
            IndicatorShape::HalfSpace { offset } => (offset, k_rad / 2.0),
            IndicatorShape::Strip { offset, width } => (offset, width),
        };
        let offset = ind.offset.unwrap_or(old_offset);
        let width = ind.width.map_or(old_width, |w| w * k_rad);
        let shape = match ind.shape.as_deref() {
            None => match base.shape {
                IndicatorShape::HalfSpace { .. } => "half_space",
                IndicatorShape::Strip { .. } => "strip",
            },
            Some(s) => s,
        };
        base.shape = match shape {
            "half_space" => IndicatorShape::HalfSpace { offset },
            "strip" => IndicatorShape::Strip { offset, width },
            other => return Err(CliError::Config(format!("unknown indicator shape {other:?}"))),
        };
        Ok(base)
    }

    fn leaves(&self, mut base: LeafFamilyConfig) -> LeafFamilyConfig {
        let l = &self.leaves;
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = l.$f { base.$f = v; } )* };
        }
        set!(affine, sinusoidal, quadratic, translations_per_side, translation_step, slope_fraction, max_harmonic, c_f);
        if let Some(r) = self.norm.r {
            base.r = r;
        }
        base
    }

    pub fn strichartz(&self, seed: Option<u64>) -> Result<StrichartzConfig, CliError> {
        let mut c = StrichartzConfig::default();
        self.reject_dims(1)?;
        if let Some(v) = self.grid.box_length {
            c.box_length = v;
        }
        if let Some(v) = self.grid.support_radius {
            c.support_radius = v;
        }
        if let Some(v) = &self.sweep.ns {
            c.ns = v.clone();
        }
        if let Some(v) = &self.norm.ps {
            c.ps = v.clone();
        }
        if let Some(v) = &self.norm.ts {
            c.ts = v.clone();
        }
        if let Some(v) = self.sweep.margin {
            c.margin = v;
        }
        c.indicator = self.indicator(c.indicator, c.support_radius)?;
        if let Some(e) = &self.indicator.epsilon_cells {
            match e.as_slice() {
                [one] => c.epsilon_cells = *one,
                _ => return Err(CliError::Config("the Strichartz scan takes a single epsilon_cells value".into())),
            }
        }
        c.corpus = self.corpus(c.corpus)?;
        c.seed = self.seed(seed, c.seed);
        c.validate().map_err(cfg_err)?;
        Ok(c)
    }

    pub fn multiplier(&self, seed: Option<u64>) -> Result<MultiplierConfig, CliError> {
        let mut c = MultiplierConfig::default();
        if let Some(v) = self.grid.d {
            c.d = v;
        }
        if let Some(v) = self.grid.d_s {
            c.d_s = v;
        }
        if let Some(v) = self.grid.box_length {
            c.box_length = v;
        }
        if let Some(v) = self.grid.support_radius {
            c.support_radius = v;
        }
        if let Some(v) = &self.sweep.ns {
            c.ns = v.clone();
        }
        c.leaves = self.leaves(c.leaves);
        if let Some(tuples) = &self.norm.tuples {
            c.params = tuples.iter().map(|q| NormParams { p: q.p, s: q.s, t: q.t, r: c.leaves.r }).collect();
        } else {
            for q in &mut c.params {
                q.r = c.leaves.r;
            }
        }
        if let Some(v) = self.cone.theta_deg {
            c.cone_theta = v.to_radians();
        }
        let mut ind = c.indicator.clone();
        if self.indicator.normal.is_none() && c.d != ind.normal.len() {
            ind.normal = (0..c.d).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        }
        c.indicator = self.indicator(ind, c.support_radius)?;
        if let Some(e) = &self.indicator.epsilon_cells {
            c.epsilon_cells = e.clone();
        }
        c.corpus = self.corpus(c.corpus)?;
        c.seed = self.seed(seed, c.seed);
        c.validate().map_err(cfg_err)?;
        Ok(c)
    }

    pub fn lemmas(&self, seed: Option<u64>) -> Result<LemmaConfig, CliError> {
        let mut c = LemmaConfig::default();
        self.reject_dims(2)?;
        if let Some(v) = self.grid.box_length {
            c.box_length = v;
        }
        if let Some(v) = self.grid.support_radius {
            c.support_radius = v;
        }
        if let Some(v) = self.grid.n {
            c.n = v;
            c.young_n = v;
        }
        if let Some(v) = &self.sweep.ns {
            c.ns = v.clone();
        }
        if let Some(v) = &self.sweep.checks {
            c.checks = v.iter().map(|s| LemmaCheck::parse(s)).collect::<Result<_, _>>().map_err(cfg_err)?;
        }
        if let Some(v) = self.norm.product_p {
            c.product_p = v;
        }
        if let Some(v) = self.norm.product_s {
            c.product_s = v;
        }
        if let Some(v) = self.cone.theta_deg {
            c.cone_theta = v.to_radians();
        }
        c.leaves = self.leaves(c.leaves);
        c.corpus = self.corpus(c.corpus)?;
        c.seed = self.seed(seed, c.seed);
        c.validate().map_err(cfg_err)?;
        Ok(c)
    }

    pub fn kernel(&self, seed: Option<u64>) -> Result<KernelConfig, CliError> {
        let mut c = KernelConfig::default();
        self.reject_dims(2)?;
        if let Some(v) = self.grid.box_length {
            c.box_length = v;
        }
        if let Some(v) = self.grid.support_radius {
            c.support_radius = v;
        }
        if let Some(v) = self.grid.n {
            c.n = v;
        }
        if let Some(v) = self.cone.theta_deg {
            c.cone_theta = v.to_radians();
        }
        if let Some(v) = self.norm.r {
            c.r = v;
        }
        if let Some(v) = self.leaves.c_f {
            c.c_f = v;
        }
        if let Some(v) = &self.leaves.bands {
            c.bands = v.clone();
        }
        if let Some(list) = &self.leaves.explicit {
            c.leaves = list
                .iter()
                .map(|e| {
                    let kind = LeafKind::parse(&e.kind)?;
                    let shape = LeafShape::from_coefficients(kind, 1, 1, &e.coefficients)?;
                    Ok(KernelLeaf { name: e.name.clone(), shape })
                })
                .collect::<Result<_, anisolab::Error>>()
                .map_err(cfg_err)?;
        }
        c.seed = self.seed(seed, c.seed);
        c.validate().map_err(cfg_err)?;
        Ok(c)
    }

    /// Grid for the `corpus` subcommand.
    pub fn corpus_grid(&self) -> Result<anisolab::GridSpec, CliError> {
        let g = &self.grid;
        anisolab::make_grid(
            g.d.unwrap_or(2),
            g.d_s.unwrap_or(1),
            g.n.unwrap_or(128),
            g.box_length.unwrap_or(std::f64::consts::FRAC_PI_2),
            g.support_radius.unwrap_or(std::f64::consts::PI / 8.0),
        )
        .map_err(cfg_err)
    }

    pub fn corpus_spec(&self, seed: Option<u64>) -> Result<(CorpusSpec, u64), CliError> {
        Ok((self.corpus(CorpusSpec::default())?, self.seed(seed, 1)))
    }

    pub fn corpus_indicator(&self, d: usize, k_rad: f64) -> Result<IndicatorSpec, CliError> {
        let normal = (0..d).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        self.indicator(IndicatorSpec::strip(normal, k_rad / 2.0, 0.0), k_rad)
    }

    fn reject_dims(&self, d: usize) -> Result<(), CliError> {
        if self.grid.d.is_some_and(|v| v != d) || self.grid.d_s.is_some_and(|v| v != 1) {
            return Err(CliError::Config(format!("this experiment runs with d = {d}, d_s = 1")));
        }
        Ok(())
    }
}

fn cfg_err(e: anisolab::Error) -> CliError {
    CliError::Config(e.to_string())
}
