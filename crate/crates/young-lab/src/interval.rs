//! Interval fitting of superlevel sets and hypothesis/conclusion checks for
//! the inverse Riesz–Sobolev theorem.
//!
//! The best-interval fit minimizes the symmetric difference |A △ I| over all
//! cell-aligned intervals. Writing +1 for cells in A and −1 outside, an
//! interval's score 2|A∩I| − |I| is the sum of its signed cells, so the
//! optimal interval is a maximum-subarray problem and the optimum is exact.

use crate::error::{Error, Result};
use crate::grid::{trilinear_form, SampledFunction};
use crate::rearrangement::{superlevel_set, symmetric_rearrangement, LevelSet};

/// An interval fitted to a set, with symmetric-difference quality measures.
#[derive(Debug, Clone)]
pub struct IntervalFit {
    /// Left endpoint in length units.
    pub lo: f64,
    /// Right endpoint in length units (exclusive cell edge).
    pub hi: f64,
    pub lo_cell: usize,
    pub hi_cell: usize,
    /// |A △ I| in measure units.
    pub symdiff: f64,
    /// |A △ I| / |A| ∈ [0, 2].
    pub relative: f64,
}

/// Best interval under symmetric difference, solved exactly by
/// maximum-subarray over the signed cell sequence. Requires d = 1 and a
/// nonempty set.
pub fn best_interval(set: &LevelSet) -> Result<IntervalFit> {
    if set.grid.dim() != 1 {
        return Err(Error::Domain("best_interval requires d = 1".into()));
    }
    let count_a: i64 = set.mask.iter().map(|&b| b as i64).sum();
    if count_a == 0 {
        return Err(Error::EmptySet);
    }
    // Kadane with indices; first maximal run wins ties.
    let mut best_score = i64::MIN;
    let mut best = (0usize, 0usize);
    let mut run_score = 0i64;
    let mut run_start = 0usize;
    for (i, &b) in set.mask.iter().enumerate() {
        let w = if b { 1 } else { -1 };
        if run_score <= 0 {
            run_score = w;
            run_start = i;
        } else {
            run_score += w;
        }
        if run_score > best_score {
            best_score = run_score;
            best = (run_start, i);
        }
    }
    let cv = set.grid.cell_volume();
    let symdiff_cells = count_a - best_score;
    Ok(IntervalFit {
        lo: set.grid.axis_position(0, best.0),
        hi: set.grid.axis_position(0, best.1) + cv,
        lo_cell: best.0,
        hi_cell: best.1,
        symdiff: symdiff_cells as f64 * cv,
        relative: symdiff_cells as f64 / count_a as f64,
    })
}

/// Per-clause report for the inverse-theorem hypothesis set.
#[derive(Debug, Clone)]
pub struct InverseHypothesisReport {
    /// max(|A|,|B|) ≤ (2−ρ)·min(|A|,|B|)
    pub ratio_ok: bool,
    /// Feasible window for the witness measure t, if any: t must satisfy
    /// t ≥ ρ·max, 3t ≤ (1−ρ)(|A|+|B|), ||E|−t| ≤ τ·max, ||E′|−3t| ≤ τ·max.
    pub t_window: Option<(f64, f64)>,
    /// The t used for reporting (window midpoint, or |E| when infeasible).
    pub t: f64,
    pub measure_a: f64,
    pub measure_b: f64,
    pub measure_e: f64,
    pub measure_e2: f64,
    /// ⟨1_A*1_B, 1_E⟩ − (⟨1_{A^⋆}*1_{B^⋆}, 1_{E^⋆}⟩ − τ·max²); nonnegative
    /// when the functional clause holds.
    pub functional_slack_e: f64,
    pub functional_slack_e2: f64,
    /// All clauses hold.
    pub verdict: bool,
}

/// Evaluate every hypothesis of the inverse theorem for the sets
/// (A, B, E, E′) at parameters (ρ, τ) and report pass/fail per clause.
pub fn inverse_hypothesis_check(
    a: &LevelSet,
    b: &LevelSet,
    e: &LevelSet,
    e2: &LevelSet,
    rho: f64,
    tau: f64,
) -> Result<InverseHypothesisReport> {
    for s in [a, b, e, e2] {
        if s.measure == 0.0 {
            return Err(Error::EmptySet);
        }
    }
    if !(rho > 0.0 && rho < 1.0 && tau >= 0.0 && tau < 1.0) {
        return Err(Error::Domain("inverse_hypothesis_check requires rho in (0,1), tau in [0,1)".into()));
    }
    let (ma, mb) = (a.measure, b.measure);
    let max = ma.max(mb);
    let min = ma.min(mb);
    let ratio_ok = max <= (2.0 - rho) * min;

    let t_lo = (rho * max).max(e.measure - tau * max).max((e2.measure - tau * max) / 3.0);
    let t_hi = ((1.0 - rho) * (ma + mb) / 3.0)
        .min(e.measure + tau * max)
        .min((e2.measure + tau * max) / 3.0);
    let t_window = if t_lo <= t_hi { Some((t_lo, t_hi)) } else { None };
    let t = t_window.map(|(lo, hi)| 0.5 * (lo + hi)).unwrap_or(e.measure);

    let ia = a.indicator();
    let ib = b.indicator();
    let slack = |set: &LevelSet| -> Result<f64> {
        let lhs = trilinear_form(&ia, &ib, &set.indicator())?.re;
        let ras = symmetric_rearrangement(&ia)?;
        let rbs = symmetric_rearrangement(&ib)?;
        let res = symmetric_rearrangement(&set.indicator())?;
        let rhs = trilinear_form(&ras, &rbs, &res)?.re;
        Ok(lhs - (rhs - tau * max * max))
    };
    let functional_slack_e = slack(e)?;
    let functional_slack_e2 = slack(e2)?;

    let quad_tol = 1e-8 * max * max;
    let verdict = ratio_ok
        && t_window.is_some()
        && functional_slack_e >= -quad_tol
        && functional_slack_e2 >= -quad_tol;
    Ok(InverseHypothesisReport {
        ratio_ok,
        t_window,
        t,
        measure_a: ma,
        measure_b: mb,
        measure_e: e.measure,
        measure_e2: e2.measure,
        functional_slack_e,
        functional_slack_e2,
        verdict,
    })
}

/// Best-interval fits across a threshold sweep `α ∈ [eta, max|f| − eta]`.
pub fn level_interval_profile(
    f: &SampledFunction,
    eta: f64,
    steps: usize,
) -> Result<Vec<(f64, IntervalFit)>> {
    if f.grid().dim() != 1 {
        return Err(Error::Domain("level_interval_profile requires d = 1".into()));
    }
    if steps < 1 {
        return Err(Error::Domain("need at least one step".into()));
    }
    let max = f.max_abs();
    if !(eta > 0.0 && 2.0 * eta < max) {
        return Err(Error::Domain(format!("eta must satisfy 0 < eta < max/2, got {eta}")));
    }
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let alpha = if steps == 1 {
            eta
        } else {
            eta + (max - 2.0 * eta) * k as f64 / (steps - 1) as f64
        };
        let set = superlevel_set(f, alpha)?;
        out.push((alpha, best_interval(&set)?));
    }
    Ok(out)
}

/// The two tail masses of the rearranged function against a Gaussian
/// reference with peak `reference_sup`:
/// `(‖min(f^⋆, η)‖_p, ‖max(0, f^⋆ − (reference_sup − η))‖_p)`.
pub fn tail_mass_report(
    f: &SampledFunction,
    reference_sup: f64,
    eta: f64,
    p: f64,
) -> Result<(f64, f64)> {
    if !(eta > 0.0) || !(reference_sup > 0.0) {
        return Err(Error::Domain("tail_mass_report requires positive eta and reference".into()));
    }
    let star = symmetric_rearrangement(f)?;
    let low = crate::rearrangement::clipped_low_norm(&star, eta, p);
    let high = crate::rearrangement::clipped_high_norm(&star, (reference_sup - eta).max(0.0), p);
    Ok((low, high))
}
