//! Sampled functions on uniform grids: norms, convolution, and the trilinear
//! Young functional.
//!
//! A [`Grid`] covers a box in ℝᵈ with `n[a]` cells per axis. Samples sit at
//! the left edge of each cell, `x = lo + i·h`, and quadrature is the
//! rectangle rule `Σ f(x_i) · cell_volume`. This choice commutes exactly with
//! the level-set and rearrangement machinery, which is piecewise constant by
//! nature.
//!
//! Convolution is computed by FFT after zero-padding every axis to twice its
//! length, which suppresses periodic wraparound; the result lives on the same
//! grid. The trilinear form `⟨f*g, h⟩` pairs without conjugation.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::exponents::{sharp_constant, ExponentTriple};

/// Uniform grid over a box in ℝᵈ.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    n: Vec<usize>,
}

impl Grid {
    /// A grid with `n[a]` cells per axis over the box `[lo, hi)`.
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, n: Vec<usize>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.len() != n.len() {
            return Err(Error::Domain("grid axis lists must be nonempty and of equal length".into()));
        }
        for a in 0..lo.len() {
            if !lo[a].is_finite() || !hi[a].is_finite() {
                return Err(Error::NonFinite("grid corner".into()));
            }
            if hi[a] <= lo[a] {
                return Err(Error::Domain(format!("axis {a}: hi must exceed lo")));
            }
            if n[a] < 2 {
                return Err(Error::Domain(format!("axis {a}: need at least 2 samples")));
            }
        }
        Ok(Grid { lo, hi, n })
    }

    /// A symmetric box `[-half, half)^dim` with `n` cells per axis.
    pub fn symmetric(half: f64, n: usize, dim: usize) -> Result<Self> {
        Grid::new(vec![-half; dim], vec![half; dim], vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn samples_per_axis(&self) -> &[usize] {
        &self.n
    }

    /// Cell width along each axis.
    pub fn cell_sizes(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| (self.hi[a] - self.lo[a]) / self.n[a] as f64).collect()
    }

    pub fn max_cell_size(&self) -> f64 {
        self.cell_sizes().into_iter().fold(0.0, f64::max)
    }

    /// Volume of a single cell, ∏ (hi−lo)/n.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| (self.hi[a] - self.lo[a]) / self.n[a] as f64).product()
    }

    /// Total number of grid cells.
    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position of axis sample `i` on axis `a` (left cell edge).
    pub fn axis_position(&self, a: usize, i: usize) -> f64 {
        let h = (self.hi[a] - self.lo[a]) / self.n[a] as f64;
        self.lo[a] + i as f64 * h
    }

    /// Position of a flat index. Row-major, last axis fastest.
    pub fn position(&self, flat: usize) -> Vec<f64> {
        let idx = self.multi_index(flat);
        (0..self.dim()).map(|a| self.axis_position(a, idx[a])).collect()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut f = 0usize;
        for a in 0..self.dim() {
            f = f * self.n[a] + idx[a];
        }
        f
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let d = self.dim();
        let mut idx = vec![0usize; d];
        for a in (0..d).rev() {
            idx[a] = flat % self.n[a];
            flat /= self.n[a];
        }
        idx
    }

    /// Squared Euclidean distance of a cell position from the origin.
    pub fn dist_sq_to_origin(&self, flat: usize) -> f64 {
        self.position(flat).iter().map(|x| x * x).sum()
    }

    /// Integer offsets `s_a = -lo_a / h_a` used to place convolution output
    /// back on the grid. Errors when the box is not convolution-aligned
    /// (the origin must sit on the sample lattice).
    pub(crate) fn conv_shifts(&self) -> Result<Vec<i64>> {
        let mut shifts = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let h = (self.hi[a] - self.lo[a]) / self.n[a] as f64;
            let s = -self.lo[a] / h;
            let r = s.round();
            if (s - r).abs() > 1e-6 {
                return Err(Error::GridMismatch(format!(
                    "axis {a} is not convolution-aligned: lo/h = {} is not an integer",
                    -s
                )));
            }
            shifts.push(r as i64);
        }
        Ok(shifts)
    }
}

/// Sample classification, tracked so that nonnegativity and realness can be
/// relied on downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    RealNonNegative,
    Real,
    Complex,
}

impl ValueKind {
    fn combine(self, other: ValueKind) -> ValueKind {
        use ValueKind::*;
        match (self, other) {
            (RealNonNegative, RealNonNegative) => RealNonNegative,
            (Complex, _) | (_, Complex) => Complex,
            _ => Real,
        }
    }
}

/// A complex- or real-valued function sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
    kind: ValueKind,
}

impl SampledFunction {
    /// Wrap raw samples. Rejects NaN/∞ anywhere and kind violations.
    pub fn new(grid: Grid, values: Vec<Complex64>, kind: ValueKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "value count {} does not match grid cell count {}",
                values.len(),
                grid.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite(format!("sample {i}")));
            }
            match kind {
                ValueKind::RealNonNegative => {
                    if v.im != 0.0 || v.re < 0.0 {
                        return Err(Error::Domain(format!(
                            "sample {i} violates real-nonnegative kind"
                        )));
                    }
                }
                ValueKind::Real => {
                    if v.im != 0.0 {
                        return Err(Error::Domain(format!("sample {i} violates real kind")));
                    }
                }
                ValueKind::Complex => {}
            }
        }
        Ok(SampledFunction { grid, values, kind })
    }

    /// Sample a real-valued closure; kind is inferred from the sign.
    pub fn sample_real(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        let mut nonneg = true;
        for i in 0..grid.len() {
            let x = grid.position(i);
            let v = f(&x);
            if v < 0.0 {
                nonneg = false;
            }
            values.push(Complex64::new(v, 0.0));
        }
        let kind = if nonneg { ValueKind::RealNonNegative } else { ValueKind::Real };
        SampledFunction::new(grid, values, kind)
    }

    /// Sample a complex-valued closure.
    pub fn sample_complex(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        SampledFunction::new(grid, values, ValueKind::Complex)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise modulus |f|, kind real-nonnegative.
    pub fn modulus(&self) -> SampledFunction {
        let values = self.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect();
        SampledFunction { grid: self.grid.clone(), values, kind: ValueKind::RealNonNegative }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Multiply by a constant.
    pub fn scaled(&self, c: Complex64) -> SampledFunction {
        let kind = if c.im == 0.0 && c.re >= 0.0 {
            self.kind
        } else if c.im == 0.0 {
            self.kind.combine(ValueKind::Real)
        } else {
            ValueKind::Complex
        };
        let values = self.values.iter().map(|v| v * c).collect();
        SampledFunction { grid: self.grid.clone(), values, kind }
    }

    /// Multiply by the unimodular phase e^{i(v·x + c)}.
    pub fn modulated(&self, freq: &[f64], constant: f64) -> Result<SampledFunction> {
        if freq.len() != self.grid.dim() {
            return Err(Error::Domain("frequency dimension mismatch".into()));
        }
        let mut values = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let x = self.grid.position(i);
            let phase: f64 = freq.iter().zip(&x).map(|(v, xi)| v * xi).sum::<f64>() + constant;
            values.push(self.values[i] * Complex64::new(0.0, phase).exp());
        }
        Ok(SampledFunction { grid: self.grid.clone(), values, kind: ValueKind::Complex })
    }

    /// Shift by whole cells along each axis; cells shifted in from outside
    /// the box are zero.
    pub fn translated_cells(&self, shifts: &[i64]) -> Result<SampledFunction> {
        if shifts.len() != self.grid.dim() {
            return Err(Error::Domain("shift dimension mismatch".into()));
        }
        let g = &self.grid;
        let mut values = vec![Complex64::new(0.0, 0.0); self.len()];
        'outer: for (out, slot) in values.iter_mut().enumerate() {
            let idx = g.multi_index(out);
            let mut src = Vec::with_capacity(g.dim());
            for a in 0..g.dim() {
                let s = idx[a] as i64 - shifts[a];
                if s < 0 || s >= g.n[a] as i64 {
                    continue 'outer;
                }
                src.push(s as usize);
            }
            *slot = self.values[g.flat_index(&src)];
        }
        Ok(SampledFunction { grid: self.grid.clone(), values, kind: self.kind })
    }

    /// L^s norm by the rectangle rule, `(Σ |f_i|^s · cell_volume)^{1/s}`.
    pub fn lp_norm(&self, s: f64) -> Result<f64> {
        lp_norm(self, s)
    }
}

/// Deterministic pairwise summation; run-to-run identical regardless of
/// batching.
pub(crate) fn pairwise_sum(n: usize, f: &dyn Fn(usize) -> f64) -> f64 {
    fn rec(lo: usize, hi: usize, f: &dyn Fn(usize) -> f64) -> f64 {
        if hi - lo <= 64 {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, f) + rec(mid, hi, f)
        }
    }
    if n == 0 {
        0.0
    } else {
        rec(0, n, f)
    }
}

pub(crate) fn pairwise_sum_complex(n: usize, f: &dyn Fn(usize) -> Complex64) -> Complex64 {
    fn rec(lo: usize, hi: usize, f: &dyn Fn(usize) -> Complex64) -> Complex64 {
        if hi - lo <= 64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in lo..hi {
                acc += f(i);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, f) + rec(mid, hi, f)
        }
    }
    if n == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        rec(0, n, f)
    }
}

/// L^s norm of a sampled function, `(Σ |f_i|^s · cell_volume)^{1/s}`.
///
/// Requires `s ∈ [1, ∞)`. Zero exactly when all samples are zero.
pub fn lp_norm(f: &SampledFunction, s: f64) -> Result<f64> {
    if !(s >= 1.0) || !s.is_finite() {
        return Err(Error::Domain(format!("lp_norm requires s in [1, inf), got {s}")));
    }
    let vals = f.values();
    let total = pairwise_sum(vals.len(), &|i| vals[i].norm().powf(s));
    Ok((total * f.grid().cell_volume()).powf(1.0 / s))
}

/// Result of [`convolve`]: the convolution plus a flag recording whether the
/// inputs failed the boundary-decay precondition (mass above `1e-12 · max|f|`
/// on the outermost cells means wraparound-free convolution is not faithful
/// to a function on ℝᵈ; the result is still returned).
#[derive(Debug, Clone)]
pub struct Convolution {
    pub function: SampledFunction,
    pub boundary_flagged: bool,
}

fn boundary_decays(f: &SampledFunction) -> bool {
    let g = f.grid();
    let max = f.max_abs();
    if max == 0.0 {
        return true;
    }
    for i in 0..f.len() {
        let idx = g.multi_index(i);
        let on_boundary = (0..g.dim()).any(|a| idx[a] == 0 || idx[a] == g.n[a] - 1);
        if on_boundary && f.values()[i].norm() > 1e-12 * max {
            return false;
        }
    }
    true
}

/// In-place FFT along every axis of a row-major array with shape `dims`.
fn fft_all_axes(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let total: usize = dims.iter().product();
    for a in 0..dims.len() {
        let len = dims[a];
        let stride: usize = dims[a + 1..].iter().product();
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        let block = stride * len;
        let blocks = total / block;
        for b in 0..blocks {
            for off in 0..stride {
                let base = b * block + off;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
}

/// Discrete convolution `(f*g)(x_m) = Σ_j f(x_m − x_j) g(x_j) · cell_volume`
/// on the shared grid, computed by FFT with zero-padding to double extent.
pub fn convolve(f: &SampledFunction, g: &SampledFunction) -> Result<Convolution> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch("convolve requires a shared grid".into()));
    }
    let grid = f.grid();
    let shifts = grid.conv_shifts()?;
    let boundary_flagged = !(boundary_decays(f) && boundary_decays(g));

    let d = grid.dim();
    let padded: Vec<usize> = grid.n.iter().map(|&n| 2 * n).collect();
    let ptotal: usize = padded.iter().product();

    let embed = |src: &SampledFunction| -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); ptotal];
        for i in 0..src.len() {
            let idx = grid.multi_index(i);
            let mut flat = 0usize;
            for a in 0..d {
                flat = flat * padded[a] + idx[a];
            }
            buf[flat] = src.values()[i];
        }
        buf
    };

    let mut fa = embed(f);
    let mut fb = embed(g);
    fft_all_axes(&mut fa, &padded, false);
    fft_all_axes(&mut fb, &padded, false);
    for (x, y) in fa.iter_mut().zip(fb.iter()) {
        *x *= *y;
    }
    fft_all_axes(&mut fa, &padded, true);
    let scale = 1.0 / ptotal as f64;
    let cv = grid.cell_volume();

    let kind = f.kind().combine(g.kind());
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (m, slot) in out.iter_mut().enumerate() {
        let idx = grid.multi_index(m);
        let mut flat: i64 = 0;
        let mut in_range = true;
        for a in 0..d {
            let src = idx[a] as i64 + shifts[a];
            if src < 0 || src >= padded[a] as i64 {
                in_range = false;
                break;
            }
            flat = flat * padded[a] as i64 + src;
        }
        if !in_range {
            continue;
        }
        let mut v = fa[flat as usize] * scale * cv;
        match kind {
            ValueKind::RealNonNegative => {
                v = Complex64::new(v.re.max(0.0), 0.0);
            }
            ValueKind::Real => {
                v = Complex64::new(v.re, 0.0);
            }
            ValueKind::Complex => {}
        }
        *slot = v;
    }

    Ok(Convolution {
        function: SampledFunction { grid: grid.clone(), values: out, kind },
        boundary_flagged,
    })
}

/// The trilinear Young functional `⟨f*g, h⟩ = Σ (f*g)_i h_i · cell_volume`.
/// No conjugation: the pairing is `∫ (f*g) h`.
pub fn trilinear_form(
    f: &SampledFunction,
    g: &SampledFunction,
    h: &SampledFunction,
) -> Result<Complex64> {
    if f.grid() != h.grid() {
        return Err(Error::GridMismatch("trilinear_form requires a shared grid".into()));
    }
    let conv = convolve(f, g)?;
    let u = conv.function.values();
    let v = h.values();
    let cv = h.grid().cell_volume();
    Ok(pairwise_sum_complex(u.len(), &|i| u[i] * v[i]) * cv)
}

/// Deficit of a triple against the sharp Young bound.
#[derive(Debug, Clone)]
pub struct Deficit {
    /// The trilinear functional ⟨f*g, h⟩.
    pub value: Complex64,
    /// The sharp bound A_{p,q,r}^d · ‖f‖_p ‖g‖_q ‖h‖_r.
    pub bound: f64,
    /// `1 − |value| / bound`; zero exactly on extremizers.
    pub delta: f64,
}

/// `delta = 1 − |⟨f*g,h⟩| / (A^d ‖f‖_p ‖g‖_q ‖h‖_r)`.
pub fn deficit(
    f: &SampledFunction,
    g: &SampledFunction,
    h: &SampledFunction,
    triple: &ExponentTriple,
) -> Result<Deficit> {
    let nf = lp_norm(f, triple.p())?;
    let ng = lp_norm(g, triple.q())?;
    let nh = lp_norm(h, triple.r())?;
    if nf == 0.0 || ng == 0.0 || nh == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let value = trilinear_form(f, g, h)?;
    let a = sharp_constant(triple, f.grid().dim())?;
    let bound = a.a_pow_d * nf * ng * nh;
    Ok(Deficit { value, bound, delta: 1.0 - value.norm() / bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::validate_triple;
    use crate::oracles;

    fn grid1(half: f64, n: usize) -> Grid {
        Grid::symmetric(half, n, 1).unwrap()
    }

    #[test]
    fn cell_volume_and_positions() {
        let g = Grid::new(vec![0.0, -1.0], vec![2.0, 1.0], vec![4, 8]).unwrap();
        assert!((g.cell_volume() - 0.5 * 0.25).abs() < 1e-15);
        assert_eq!(g.len(), 32);
        let p = g.position(g.flat_index(&[1, 2]));
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_nan_samples() {
        let g = grid1(1.0, 4);
        let mut vals = vec![Complex64::new(0.0, 0.0); 4];
        vals[2] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            SampledFunction::new(g, vals, ValueKind::Complex),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn unit_interval_indicator_l2_norm() {
        let g = grid1(2.0, 1024);
        let f = SampledFunction::sample_real(g, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 })
            .unwrap();
        let n2 = lp_norm(&f, 2.0).unwrap();
        assert!((n2 - 1.0).abs() < 4.0 / 1024.0, "norm {n2}");
    }

    #[test]
    fn gaussian_lp_norm_matches_closed_form() {
        // ‖e^{-x²}‖_p = (π/p)^{1/(2p)} on a box wide enough to hold all mass.
        let g = grid1(20.0, 4096);
        let f = SampledFunction::sample_real(g, |x| (-x[0] * x[0]).exp()).unwrap();
        for p in [1.0, 1.5, 2.0, 3.7] {
            let got = lp_norm(&f, p).unwrap();
            let want = oracles::gaussian_lp_norm(1.0, p, 1);
            assert!((got - want).abs() / want < 1e-8, "p={p}: {got} vs {want}");
        }
    }

    #[test]
    fn zero_function_norm_is_zero() {
        let g = grid1(1.0, 16);
        let f = SampledFunction::sample_real(g, |_| 0.0).unwrap();
        assert_eq!(lp_norm(&f, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn lp_norm_rejects_s_below_one() {
        let g = grid1(1.0, 16);
        let f = SampledFunction::sample_real(g, |_| 1.0).unwrap();
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn indicator_convolution_is_triangular_hat() {
        let n = 512;
        let g = grid1(2.0, n);
        let ind = SampledFunction::sample_real(g.clone(), |x| {
            if (0.0..1.0).contains(&x[0]) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let conv = convolve(&ind, &ind).unwrap();
        let h = 4.0 / n as f64;
        for i in 0..n {
            let x = g.axis_position(0, i);
            let want = if (0.0..=2.0).contains(&x) { 1.0 - (x - 1.0).abs() } else { 0.0 };
            let got = conv.function.values()[i].re;
            assert!((got - want).abs() <= 2.0 * h, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn gaussian_convolution_matches_closed_form() {
        let n = 2048;
        let g = grid1(20.0, n);
        let f = SampledFunction::sample_real(g.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
        let conv = convolve(&f, &f).unwrap();
        assert!(!conv.boundary_flagged);
        let mut sup = 0.0f64;
        for i in 0..n {
            let x = g.axis_position(0, i);
            let want = oracles::gaussian_convolution_value(1.0, 1.0, x);
            sup = sup.max((conv.function.values()[i].re - want).abs());
        }
        assert!(sup < 1e-6, "sup error {sup}");
    }

    #[test]
    fn fast_convolution_matches_direct_oracle() {
        let g = Grid::new(vec![-1.5], vec![2.5], vec![128]).unwrap();
        let f = SampledFunction::sample_real(g.clone(), |x| (1.0 + x[0]).sin().abs()).unwrap();
        let w = SampledFunction::sample_real(g, |x| (-3.0 * x[0] * x[0]).exp()).unwrap();
        let fast = convolve(&f, &w).unwrap().function;
        let direct = oracles::convolve_direct(&f, &w).unwrap();
        let scale = direct.max_abs();
        for i in 0..fast.len() {
            let d = (fast.values()[i] - direct.values()[i]).norm();
            assert!(d <= 1e-10 * scale, "cell {i}: diff {d}");
        }
    }

    #[test]
    fn convolution_2d_matches_direct_oracle() {
        let g = Grid::symmetric(2.0, 16, 2).unwrap();
        let f = SampledFunction::sample_real(g.clone(), |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp())
            .unwrap();
        let w = SampledFunction::sample_real(g, |x| (-(x[0] - 0.3).powi(2) - x[1] * x[1]).exp())
            .unwrap();
        let fast = convolve(&f, &w).unwrap().function;
        let direct = oracles::convolve_direct(&f, &w).unwrap();
        let scale = direct.max_abs();
        for i in 0..fast.len() {
            assert!((fast.values()[i] - direct.values()[i]).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn trilinear_gaussians_match_closed_form() {
        let g = grid1(20.0, 4096);
        let fa = SampledFunction::sample_real(g.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
        let fb = SampledFunction::sample_real(g.clone(), |x| (-2.0 * x[0] * x[0]).exp()).unwrap();
        let fc = SampledFunction::sample_real(g, |x| (-0.5 * x[0] * x[0]).exp()).unwrap();
        let got = trilinear_form(&fa, &fb, &fc).unwrap();
        let want = oracles::gaussian_trilinear(1.0, 2.0, 0.5, 1).unwrap();
        assert!((got.re - want).abs() / want < 1e-6);
        assert!(got.im.abs() < 1e-12);
    }

    #[test]
    fn trilinear_with_zero_h_is_zero() {
        let g = grid1(5.0, 64);
        let f = SampledFunction::sample_real(g.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
        let z = SampledFunction::sample_real(g, |_| 0.0).unwrap();
        let v = trilinear_form(&f, &f, &z).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn deficit_scale_invariant() {
        let t = validate_triple(1.5, 1.5, 1.5).unwrap();
        let g = grid1(10.0, 512);
        let f = SampledFunction::sample_real(g.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
        let d0 = deficit(&f, &f, &f, &t).unwrap().delta;
        let d1 = deficit(
            &f.scaled(Complex64::new(3.7, 0.0)),
            &f.scaled(Complex64::new(0.01, 0.0)),
            &f.scaled(Complex64::new(250.0, 0.0)),
            &t,
        )
        .unwrap()
        .delta;
        assert!((d0 - d1).abs() < 1e-12, "{d0} vs {d1}");
    }

    #[test]
    fn deficit_zero_function_errors() {
        let t = validate_triple(1.5, 1.5, 1.5).unwrap();
        let g = grid1(5.0, 64);
        let f = SampledFunction::sample_real(g.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
        let z = SampledFunction::sample_real(g, |_| 0.0).unwrap();
        assert!(matches!(deficit(&f, &f, &z, &t), Err(Error::ZeroFunction)));
    }

    #[test]
    fn translation_covariance_exact_for_grid_shifts() {
        let t = validate_triple(1.5, 1.5, 1.5).unwrap();
        let g = grid1(16.0, 512);
        let f = SampledFunction::sample_real(g.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
        let h = SampledFunction::sample_real(g, |x| (-1.3 * x[0] * x[0]).exp()).unwrap();
        let base = trilinear_form(&f, &f, &h).unwrap();
        let (a, b) = (17i64, -9i64);
        let fa = f.translated_cells(&[a]).unwrap();
        let gb = f.translated_cells(&[b]).unwrap();
        let hab = h.translated_cells(&[a + b]).unwrap();
        let shifted = trilinear_form(&fa, &gb, &hab).unwrap();
        assert!((base - shifted).norm() <= 1e-12 * base.norm());
        let _ = deficit(&fa, &gb, &hab, &t).unwrap();
    }

    #[test]
    fn modulus_bound_on_trilinear() {
        // |⟨f*g,h⟩| ≤ ⟨|f|*|g|,|h|⟩ for complex samples.
        let g = grid1(8.0, 256);
        let f = SampledFunction::sample_complex(g.clone(), |x| {
            Complex64::new(0.0, 1.7 * x[0]).exp() * (-x[0] * x[0]).exp()
        })
        .unwrap();
        let h = SampledFunction::sample_complex(g, |x| {
            Complex64::new(0.0, -0.4 * x[0] + 1.0).exp() * (-0.8 * x[0] * x[0]).exp()
        })
        .unwrap();
        let lhs = trilinear_form(&f, &f, &h).unwrap().norm();
        let rhs = trilinear_form(&f.modulus(), &f.modulus(), &h.modulus()).unwrap().re;
        assert!(lhs <= rhs + 1e-12 * rhs.abs());
    }

    #[test]
    fn boundary_warning_flagged() {
        let g = grid1(1.0, 64);
        // A Gaussian too wide for the box leaves visible boundary mass.
        let f = SampledFunction::sample_real(g, |x| (-0.1 * x[0] * x[0]).exp()).unwrap();
        let conv = convolve(&f, &f).unwrap();
        assert!(conv.boundary_flagged);
    }

    #[test]
    fn misaligned_grid_rejected() {
        let g = Grid::new(vec![-1.05], vec![2.0], vec![100]).unwrap();
        let f = SampledFunction::sample_real(g, |x| (-x[0] * x[0]).exp()).unwrap();
        assert!(matches!(convolve(&f, &f), Err(Error::GridMismatch(_))));
    }
}
