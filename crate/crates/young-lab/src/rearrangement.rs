//! Distribution functions, superlevel sets, symmetric decreasing
//! rearrangement, layer-cake reconstruction, and the Riesz–Sobolev
//! comparison `⟨f*g,h⟩ ≤ ⟨f^⋆*g^⋆,h^⋆⟩`.
//!
//! Rearrangement is exact at cell resolution: the sample multiset is
//! preserved, samples are sorted in decreasing modulus and placed back in
//! cells ordered by distance to the origin (ties by flat index). This makes
//! equimeasurability and norm preservation identities rather than
//! approximations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{pairwise_sum, trilinear_form, Grid, SampledFunction, ValueKind};

/// A superlevel set `{ |f| > t }` at cell resolution.
#[derive(Debug, Clone)]
pub struct LevelSet {
    pub threshold: f64,
    pub grid: Grid,
    pub mask: Vec<bool>,
    /// popcount · cell_volume
    pub measure: f64,
}

impl LevelSet {
    /// Build from an explicit mask.
    pub fn from_mask(grid: Grid, mask: Vec<bool>, threshold: f64) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::GridMismatch("mask length does not match grid".into()));
        }
        let count = mask.iter().filter(|&&b| b).count();
        let measure = count as f64 * grid.cell_volume();
        Ok(LevelSet { threshold, grid, mask, measure })
    }

    /// Indicator function of the set.
    pub fn indicator(&self) -> SampledFunction {
        let values = self
            .mask
            .iter()
            .map(|&b| Complex64::new(if b { 1.0 } else { 0.0 }, 0.0))
            .collect();
        SampledFunction::new(self.grid.clone(), values, ValueKind::RealNonNegative)
            .expect("indicator samples are valid")
    }

    /// Maximal runs of consecutive set cells, as `(start, end)` inclusive
    /// flat-index pairs. Meaningful for d = 1.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, &b) in self.mask.iter().enumerate() {
            match (b, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    out.push((s, i - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, self.mask.len() - 1));
        }
        out
    }
}

/// Lebesgue measure (cell resolution) of `{ |f| > t }`; requires `t > 0`.
pub fn distribution_function(f: &SampledFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("distribution_function requires t > 0, got {t}")));
    }
    let count = f.values().iter().filter(|v| v.norm() > t).count();
    Ok(count as f64 * f.grid().cell_volume())
}

/// The superlevel set `{ |f| > t }` (strict inequality); requires `t > 0`.
pub fn superlevel_set(f: &SampledFunction, t: f64) -> Result<LevelSet> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("superlevel_set requires t > 0, got {t}")));
    }
    let mask: Vec<bool> = f.values().iter().map(|v| v.norm() > t).collect();
    LevelSet::from_mask(f.grid().clone(), mask, t)
}

/// Cell indices ordered by distance to the origin, ties by flat index.
fn cells_by_distance(grid: &Grid) -> Vec<usize> {
    let mut order: Vec<usize> = (0..grid.len()).collect();
    let dist: Vec<f64> = (0..grid.len()).map(|i| grid.dist_sq_to_origin(i)).collect();
    order.sort_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap().then(a.cmp(&b)));
    order
}

/// Symmetric decreasing rearrangement of |f|: equimeasurable with |f| and
/// nonincreasing along rays from the origin, exact at cell resolution.
pub fn symmetric_rearrangement(f: &SampledFunction) -> Result<SampledFunction> {
    let mut sorted: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let order = cells_by_distance(f.grid());
    let mut values = vec![Complex64::new(0.0, 0.0); f.len()];
    for (rank, &cell) in order.iter().enumerate() {
        values[cell] = Complex64::new(sorted[rank], 0.0);
    }
    SampledFunction::new(f.grid().clone(), values, ValueKind::RealNonNegative)
}

/// `⟨f^⋆*g^⋆, h^⋆⟩ − ⟨f*g, h⟩` for nonnegative f, g, h on a shared grid.
pub fn riesz_sobolev_gap(
    f: &SampledFunction,
    g: &SampledFunction,
    h: &SampledFunction,
) -> Result<f64> {
    for func in [f, g, h] {
        if func.values().iter().any(|v| v.re < 0.0 || v.im != 0.0) {
            return Err(Error::NegativeInput);
        }
    }
    let plain = trilinear_form(f, g, h)?.re;
    let fs = symmetric_rearrangement(f)?;
    let gs = symmetric_rearrangement(g)?;
    let hs = symmetric_rearrangement(h)?;
    let star = trilinear_form(&fs, &gs, &hs)?.re;
    Ok(star - plain)
}

/// Layer-cake reconstruction `Σ Δt · 1_{f ≥ t_k}` from an increasing
/// positive threshold sequence, with the top slab `max f − t_K` added so
/// that sample-adapted thresholds reconstruct exactly.
pub fn layer_cake(f: &SampledFunction, thresholds: &[f64]) -> Result<SampledFunction> {
    if thresholds.is_empty() {
        return Err(Error::UnsortedThresholds);
    }
    for w in thresholds.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::UnsortedThresholds);
        }
    }
    if thresholds[0] <= 0.0 {
        return Err(Error::UnsortedThresholds);
    }
    if f.values().iter().any(|v| v.re < 0.0 || v.im != 0.0) {
        return Err(Error::NegativeInput);
    }
    let max = f.max_abs();
    let mut out = vec![0.0f64; f.len()];
    let mut prev = 0.0f64;
    for (k, &t) in thresholds.iter().enumerate() {
        let weight = t - prev;
        let top = if k + 1 == thresholds.len() { (max - t).max(0.0) } else { 0.0 };
        for (i, v) in f.values().iter().enumerate() {
            if v.re >= t {
                out[i] += weight + top;
            }
        }
        prev = t;
    }
    let values = out.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    SampledFunction::new(f.grid().clone(), values, ValueKind::RealNonNegative)
}

/// ‖min(f, cap)‖_s by the rectangle rule; used for tail-mass reports.
pub(crate) fn clipped_low_norm(f: &SampledFunction, cap: f64, s: f64) -> f64 {
    let vals = f.values();
    let total = pairwise_sum(vals.len(), &|i| vals[i].norm().min(cap).powf(s));
    (total * f.grid().cell_volume()).powf(1.0 / s)
}

/// ‖max(0, f − floor)‖_s by the rectangle rule.
pub(crate) fn clipped_high_norm(f: &SampledFunction, floor: f64, s: f64) -> f64 {
    let vals = f.values();
    let total = pairwise_sum(vals.len(), &|i| (vals[i].norm() - floor).max(0.0).powf(s));
    (total * f.grid().cell_volume()).powf(1.0 / s)
}
