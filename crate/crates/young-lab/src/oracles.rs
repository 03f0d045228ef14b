//! Independent brute-force references used by tests: direct convolution,
//! closed-form Gaussian integrals, exhaustive interval search, and
//! grid-search Gaussian fitting.
//!
//! Oracles favor obviousness over speed and share no kernels with the fast
//! paths they check; cost guards prevent accidental use at scale.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{SampledFunction, ValueKind};
use crate::interval::IntervalFit;
use crate::rearrangement::LevelSet;

const DIRECT_LIMIT: usize = 4096;

/// O(n²) double-sum convolution with zero padding outside the box.
pub fn convolve_direct(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch("convolve_direct requires a shared grid".into()));
    }
    let grid = f.grid();
    let n_cells = grid.len();
    if n_cells > DIRECT_LIMIT {
        return Err(Error::TooLarge { cells: n_cells, limit: DIRECT_LIMIT });
    }
    let d = grid.dim();
    let n = grid.samples_per_axis().to_vec();
    // Integer offsets of the origin on the sample lattice, per axis.
    let mut shifts = Vec::with_capacity(d);
    for a in 0..d {
        let h = (grid.hi()[a] - grid.lo()[a]) / n[a] as f64;
        let s = -grid.lo()[a] / h;
        if (s - s.round()).abs() > 1e-6 {
            return Err(Error::GridMismatch(format!("axis {a} is not convolution-aligned")));
        }
        shifts.push(s.round() as i64);
    }
    let cv = grid.cell_volume();
    let mut out = vec![Complex64::new(0.0, 0.0); n_cells];
    for (m, slot) in out.iter_mut().enumerate() {
        let mi = grid.multi_index(m);
        let mut acc = Complex64::new(0.0, 0.0);
        'inner: for j in 0..n_cells {
            let ji = grid.multi_index(j);
            let mut fi = Vec::with_capacity(d);
            for a in 0..d {
                // f is evaluated at x_m − x_j, which sits at index m − j + shift.
                let k = mi[a] as i64 - ji[a] as i64 + shifts[a];
                if k < 0 || k >= n[a] as i64 {
                    continue 'inner;
                }
                fi.push(k as usize);
            }
            acc += f.values()[grid.flat_index(&fi)] * g.values()[j];
        }
        *slot = acc * cv;
    }
    let kind = match (f.kind(), g.kind()) {
        (ValueKind::RealNonNegative, ValueKind::RealNonNegative) => ValueKind::RealNonNegative,
        (ValueKind::Complex, _) | (_, ValueKind::Complex) => ValueKind::Complex,
        _ => ValueKind::Real,
    };
    let out = match kind {
        ValueKind::RealNonNegative => {
            out.into_iter().map(|v| Complex64::new(v.re.max(0.0), 0.0)).collect()
        }
        ValueKind::Real => out.into_iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
        ValueKind::Complex => out,
    };
    SampledFunction::new(grid.clone(), out, kind)
}

/// `‖e^{-a|x|²}‖_s = (π/(sa))^{d/(2s)}` for a centered unit-amplitude
/// Gaussian in dimension d.
pub fn gaussian_lp_norm(a: f64, s: f64, d: usize) -> f64 {
    (std::f64::consts::PI / (s * a)).powf(d as f64 / (2.0 * s))
}

/// `⟨e^{-a|·|²} * e^{-b|·|²}, e^{-c|·|²}⟩ = π^d / (ab+bc+ca)^{d/2}` for
/// centered unit-amplitude Gaussians in dimension d.
pub fn gaussian_trilinear(a: f64, b: f64, c: f64, d: usize) -> Result<f64> {
    if a <= 0.0 || b <= 0.0 || c <= 0.0 || !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::Domain("gaussian_trilinear requires positive finite scales".into()));
    }
    let s = a * b + b * c + c * a;
    Ok(std::f64::consts::PI.powi(d as i32) / s.powf(d as f64 / 2.0))
}

/// `(e^{-a·²} * e^{-b·²})(x) = √(π/(a+b)) · e^{-(ab/(a+b)) x²}` in one
/// dimension.
pub fn gaussian_convolution_value(a: f64, b: f64, x: f64) -> f64 {
    (std::f64::consts::PI / (a + b)).sqrt() * (-(a * b / (a + b)) * x * x).exp()
}

/// Exact deficit of the centered Gaussian triple with scales `(a, b, c)`
/// computed entirely from closed forms.
pub fn gaussian_deficit_closed_form(
    triple: &crate::exponents::ExponentTriple,
    d: usize,
    a: f64,
    b: f64,
    c: f64,
) -> Result<f64> {
    let value = gaussian_trilinear(a, b, c, d)?;
    let norms = gaussian_lp_norm(a, triple.p(), d)
        * gaussian_lp_norm(b, triple.q(), d)
        * gaussian_lp_norm(c, triple.r(), d);
    let sharp = crate::exponents::sharp_constant(triple, d)?;
    Ok(1.0 - value / (sharp.a_pow_d * norms))
}

/// O(n²) scan over every cell-aligned interval; global optimum for the
/// symmetric-difference fit.
pub fn exhaustive_interval(set: &LevelSet) -> Result<IntervalFit> {
    let n = set.mask.len();
    if n > DIRECT_LIMIT {
        return Err(Error::TooLarge { cells: n, limit: DIRECT_LIMIT });
    }
    if set.grid.dim() != 1 {
        return Err(Error::Domain("exhaustive_interval requires d = 1".into()));
    }
    let count_a: i64 = set.mask.iter().map(|&b| b as i64).sum();
    if count_a == 0 {
        return Err(Error::EmptySet);
    }
    let mut best_score = i64::MIN;
    let mut best = (0usize, 0usize);
    for start in 0..n {
        let mut inter = 0i64;
        for end in start..n {
            if set.mask[end] {
                inter += 1;
            }
            let len = (end - start + 1) as i64;
            let score = 2 * inter - len;
            if score > best_score {
                best_score = score;
                best = (start, end);
            }
        }
    }
    let cv = set.grid.cell_volume();
    let symdiff_cells = count_a - best_score;
    let h = cv; // d = 1: cell volume equals cell width
    Ok(IntervalFit {
        lo: set.grid.axis_position(0, best.0),
        hi: set.grid.axis_position(0, best.1) + h,
        lo_cell: best.0,
        hi_cell: best.1,
        symdiff: symdiff_cells as f64 * cv,
        relative: symdiff_cells as f64 / count_a as f64,
    })
}

/// Best Gaussian parameters found by exhaustive coarse search over
/// (scale, center) with one zoomed refinement pass; amplitude is optimized
/// per candidate by golden-section.
pub struct GridSearchFit {
    pub scale: f64,
    pub center: f64,
    pub amplitude: f64,
    pub residual: f64,
}

pub fn grid_search_gaussian(
    f: &SampledFunction,
    s: f64,
    scale_range: (f64, f64),
    center_range: (f64, f64),
) -> Result<GridSearchFit> {
    if f.grid().dim() != 1 {
        return Err(Error::Domain("grid_search_gaussian requires d = 1".into()));
    }
    if !(scale_range.0 > 0.0 && scale_range.1 > scale_range.0 && center_range.1 > center_range.0) {
        return Err(Error::EmptySearchBox);
    }
    let norm = f.lp_norm(s)?;
    if norm == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let grid = f.grid().clone();
    let xs: Vec<f64> = (0..grid.len()).map(|i| grid.axis_position(0, i)).collect();
    let moduli: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let cv = grid.cell_volume();

    // Plain-loop residual evaluation, independent of the fitting module.
    let residual = |scale: f64, center: f64, amp: f64| -> f64 {
        let mut acc = 0.0;
        for (x, m) in xs.iter().zip(&moduli) {
            let g = amp * (-scale * (x - center) * (x - center)).exp();
            acc += (m - g).abs().powf(s);
        }
        (acc * cv).powf(1.0 / s) / norm
    };
    let best_amp = |scale: f64, center: f64| -> (f64, f64) {
        let peak = moduli.iter().cloned().fold(0.0, f64::max);
        let (mut lo, mut hi) = (0.0, 2.0 * peak.max(1e-300));
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut f1 = residual(scale, center, x1);
        let mut f2 = residual(scale, center, x2);
        for _ in 0..60 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = residual(scale, center, x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = residual(scale, center, x2);
            }
        }
        let amp = 0.5 * (lo + hi);
        (amp, residual(scale, center, amp))
    };

    let search = |s_lo: f64, s_hi: f64, c_lo: f64, c_hi: f64, k: usize| -> GridSearchFit {
        let mut out = GridSearchFit { scale: s_lo, center: c_lo, amplitude: 0.0, residual: f64::MAX };
        for i in 0..k {
            let scale = s_lo * (s_hi / s_lo).powf(i as f64 / (k - 1) as f64);
            for j in 0..k {
                let center = c_lo + (c_hi - c_lo) * j as f64 / (k - 1) as f64;
                let (amp, res) = best_amp(scale, center);
                if res < out.residual {
                    out = GridSearchFit { scale, center, amplitude: amp, residual: res };
                }
            }
        }
        out
    };

    let coarse = search(scale_range.0, scale_range.1, center_range.0, center_range.1, 24);
    // One refinement pass around the coarse winner.
    let refined = search(
        (coarse.scale / 2.0).max(scale_range.0),
        (coarse.scale * 2.0).min(scale_range.1),
        coarse.center - (center_range.1 - center_range.0) / 12.0,
        coarse.center + (center_range.1 - center_range.0) / 12.0,
        24,
    );
    Ok(if refined.residual < coarse.residual { refined } else { coarse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn trilinear_symmetric_unit_scales() {
        let got = gaussian_trilinear(1.0, 1.0, 1.0, 1).unwrap();
        let want = std::f64::consts::PI / 3.0f64.sqrt();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn trilinear_scaling_law() {
        // value(sa, sb, sc) = s^{−d} value(a,b,c)
        for d in 1..=3usize {
            let base = gaussian_trilinear(1.0, 2.0, 0.7, d).unwrap();
            let scaled = gaussian_trilinear(3.0, 6.0, 2.1, d).unwrap();
            assert!((scaled - base / 3.0f64.powi(d as i32)).abs() < 1e-12 * base);
        }
    }

    #[test]
    fn trilinear_rejects_nonpositive_scale() {
        assert!(gaussian_trilinear(0.0, 1.0, 1.0, 1).is_err());
        assert!(gaussian_trilinear(1.0, -2.0, 1.0, 1).is_err());
    }

    #[test]
    fn direct_convolution_of_delta_translates() {
        let n = 32;
        let g = Grid::symmetric(1.0, n, 1).unwrap();
        let cv = g.cell_volume();
        let mut fv = vec![Complex64::new(0.0, 0.0); n];
        fv[n / 2] = Complex64::new(1.0, 0.0); // delta at the origin cell
        let f = SampledFunction::new(g.clone(), fv, ValueKind::RealNonNegative).unwrap();
        let w = SampledFunction::sample_real(g, |x| (1.0 - x[0].abs()).max(0.0)).unwrap();
        let conv = convolve_direct(&f, &w).unwrap();
        for i in 0..n {
            let want = w.values()[i].re * cv;
            assert!((conv.values()[i].re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn direct_convolution_commutes() {
        let g = Grid::symmetric(2.0, 64, 1).unwrap();
        let f = SampledFunction::sample_real(g.clone(), |x| (x[0] * 3.0).cos().abs()).unwrap();
        let w = SampledFunction::sample_real(g, |x| (-x[0] * x[0]).exp()).unwrap();
        let fw = convolve_direct(&f, &w).unwrap();
        let wf = convolve_direct(&w, &f).unwrap();
        for i in 0..fw.len() {
            assert!((fw.values()[i] - wf.values()[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn direct_convolution_cost_guard() {
        let g = Grid::symmetric(1.0, 8192, 1).unwrap();
        let f = SampledFunction::sample_real(g, |_| 0.0).unwrap();
        assert!(matches!(convolve_direct(&f, &f), Err(Error::TooLarge { .. })));
    }
}
