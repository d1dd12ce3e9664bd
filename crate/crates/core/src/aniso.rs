//! Leafwise Besov norms and the anisotropic norm over a leaf family.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid_spectral::{psi, GridFunction, RawSpectrum};
use crate::leaves::{chart_spec, leaf_besov, leaf_weights, restrict_to_leaf, AdmissibleLeaf, LeafFamily, LeafStack};
use crate::norms::{check_p, weighted_lp, BesovReport, NormParams};

/// `max_{l_s} 2^{l_s s} ||psi_{l_s}^{Op(Gamma)} f||_{L_p(mu_Gamma)}`.
pub fn leafwise_besov_norm(f: &GridFunction, leaf: &AdmissibleLeaf, s: f64, p: f64) -> Result<BesovReport> {
    let r = leaf.bounds().r;
    if s.abs() >= r - 1.0 {
        return Err(Error::InvalidParameter(format!("|s| = {} must stay below r - 1 = {}", s.abs(), r - 1.0)));
    }
    let lf = restrict_to_leaf(f, leaf)?;
    leaf_besov(&lf, s, p)
}

/// Value and argmax of the anisotropic norm, with the `(leaf, l)` table behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnisoNormReport {
    pub value: f64,
    pub leaf_id: usize,
    pub l_outer: usize,
    pub l_inner: usize,
    /// `band_table[leaf][l] = 2^{l t} ||S_l f||^s_{p, Gamma}`.
    pub band_table: Vec<Vec<f64>>,
    pub n_max: usize,
    pub chart_n_max: usize,
}

/// Unweighted band norms `||psi_{l_s}^{Op(Gamma)} S_l f||_{L_p(mu_Gamma)}` for several `p`.
///
/// Indexed `[p][member][l][l_s]`; any `(s, t)` pair is then a cheap reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisoTables {
    pub ps: Vec<f64>,
    pub leaf_ids: Vec<usize>,
    pub n_max: usize,
    pub chart_n_max: usize,
    data: Vec<Vec<Vec<Vec<f64>>>>,
}

impl AnisoTables {
    pub fn norm(&self, p_index: usize, member: usize, l: usize, l_s: usize) -> f64 {
        self.data[p_index][member][l][l_s]
    }

    /// Reduce to the anisotropic norm for exponent `ps[p_index]` and weights `(s, t)`.
    pub fn report(&self, p_index: usize, s: f64, t: f64) -> AnisoNormReport {
        let mut rep = AnisoNormReport {
            value: 0.0,
            leaf_id: self.leaf_ids.first().copied().unwrap_or(0),
            l_outer: 0,
            l_inner: 0,
            band_table: Vec::with_capacity(self.leaf_ids.len()),
            n_max: self.n_max,
            chart_n_max: self.chart_n_max,
        };
        for (m, per_leaf) in self.data[p_index].iter().enumerate() {
            let mut row = Vec::with_capacity(per_leaf.len());
            for (l, inner) in per_leaf.iter().enumerate() {
                let wl = (l as f64 * t).exp2();
                let mut best = 0.0f64;
                let mut best_ls = 0;
                for (ls, v) in inner.iter().enumerate() {
                    let w = (ls as f64 * s).exp2() * v;
                    if w > best {
                        best = w;
                        best_ls = ls;
                    }
                }
                let val = wl * best;
                if val > rep.value {
                    rep.value = val;
                    rep.leaf_id = self.leaf_ids[m];
                    rep.l_outer = l;
                    rep.l_inner = best_ls;
                }
                row.push(val);
            }
            rep.band_table.push(row);
        }
        rep
    }
}

/// Raw spectrum of `S_l f` for every band, from one transform of `f`.
pub(crate) fn banded_spectra(f: &GridFunction) -> Vec<RawSpectrum> {
    let raw = RawSpectrum::of(f);
    let norms = f.spec().freq_norms(f.spec().d());
    (0..=f.spec().n_max())
        .map(|l| {
            let data = raw.data().iter().zip(&norms).map(|(v, r)| v * psi(l, *r)).collect();
            RawSpectrum::from_data(*f.spec(), data)
        })
        .collect()
}

/// Leafwise block norms of `g` (one raw spectrum) for every family member, `[p][member][l_s]`.
pub(crate) fn leaf_block_norms(raw: &RawSpectrum, family: &LeafFamily, ps: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    let spec = *raw.spec();
    let chart = chart_spec(&spec)?;
    let chart_n_max = chart.n_max();
    let cell = chart.h().powi(chart.d() as i32);
    let mut out = vec![vec![Vec::new(); family.len()]; ps.len()];
    let groups = family.groups();
    let per_group: Vec<Result<Vec<(usize, Vec<Vec<f64>>)>>> = groups
        .par_iter()
        .map(|(rep, members)| {
            let leaf = &family.representatives[*rep];
            let stack = LeafStack::build(raw, leaf)?;
            let weights = leaf_weights(leaf, &spec)?;
            let mut rows: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; chart_n_max + 1]; ps.len()]; members.len()];
            for ls in 0..=chart_n_max {
                let parts = stack.filtered(|r| psi(ls, r));
                for (k, m) in members.iter().enumerate() {
                    let block = stack.combine(&parts, &m.translation);
                    for (pi, &p) in ps.iter().enumerate() {
                        rows[k][pi][ls] = weighted_lp(&block, Some(&weights), cell, p);
                    }
                }
            }
            Ok(members.iter().map(|m| m.id).zip(rows).collect())
        })
        .collect();
    for group in per_group {
        for (id, rows) in group? {
            let idx = family.members.iter().position(|m| m.id == id).expect("member id");
            for (pi, row) in rows.into_iter().enumerate() {
                out[pi][idx] = row;
            }
        }
    }
    Ok(out)
}

/// Tables of leafwise block norms of every `S_l f` over the family.
pub fn aniso_tables(f: &GridFunction, family: &LeafFamily, ps: &[f64]) -> Result<AnisoTables> {
    for &p in ps {
        check_p(p)?;
    }
    if family.is_empty() {
        return Err(Error::InvalidLeaf("empty leaf family".into()));
    }
    let spec = *f.spec();
    let chart_n_max = chart_spec(&spec)?.n_max();
    let bands = banded_spectra(f);
    let per_band: Vec<Result<Vec<Vec<Vec<f64>>>>> = bands.par_iter().map(|raw| leaf_block_norms(raw, family, ps)).collect();
    let mut data = vec![vec![Vec::with_capacity(bands.len()); family.len()]; ps.len()];
    for band in per_band {
        let band = band?;
        for (pi, per_p) in band.into_iter().enumerate() {
            for (m, row) in per_p.into_iter().enumerate() {
                data[pi][m].push(row);
            }
        }
    }
    Ok(AnisoTables {
        ps: ps.to_vec(),
        leaf_ids: family.members.iter().map(|m| m.id).collect(),
        n_max: spec.n_max(),
        chart_n_max,
        data,
    })
}

/// `max_{Gamma, l} 2^{l t} ||S_l f||^s_{p, Gamma}` over the family.
pub fn aniso_norm(f: &GridFunction, family: &LeafFamily, params: &NormParams) -> Result<AnisoNormReport> {
    if !params.in_norm_range() {
        return Err(Error::Inadmissible(format!(
            "(s, t, r) = ({}, {}, {}) violates t - (r-1) < s < -t < 0",
            params.s, params.t, params.r
        )));
    }
    let leak = f.support_leak();
    if leak >= 1e-12 {
        return Err(Error::Unsupported(format!("function leaks {leak:e} outside the support ball")));
    }
    let tables = aniso_tables(f, family, &[params.p])?;
    Ok(tables.report(0, params.s, params.t))
}
