//! Stability of approximate homomorphisms: recover linear, character, or
//! affine structure from functions satisfying `f(x) + f(y) ≈ f(x+y)` (or the
//! multiplicative analogue) on most pairs.
//!
//! The recovery follows the constructive proof route rather than a global
//! least-squares fit: rich-point filtering, approximate well-definedness of
//! pairwise sums, an averaged extension φ built first on the eighth-ball and
//! then on the whole sample box through 32-fold decompositions, an anchor at
//! ρ = R/d per coordinate, and a torus-averaged additivity diagnostic. The
//! payoff is robustness to arbitrary corruption on a small fraction of
//! samples, which no single least-squares pass provides.
//!
//! Samples live on a uniform node grid over the box `[−2R, 2R]^d` with an
//! odd node count per axis, so sums of sample points are again sample points
//! and all pair arithmetic is exact index arithmetic.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants;
use crate::error::{Error, Result};

const MC_REPS: usize = 256;
const RICH_QUORUM: f64 = 0.5;
const GAMMA_FLOOR: f64 = 0.01;
const EXACT_PAIR_LIMIT: usize = 4096;
const PAIR_SUBSAMPLE: usize = 2048;

/// Node grid over `[−2R, 2R]^d`, odd nodes per axis so the origin is a node.
#[derive(Debug, Clone, PartialEq)]
pub struct BallGrid {
    radius: f64,
    dim: usize,
    per_axis: usize,
}

impl BallGrid {
    /// `per_axis` must be odd and at least 33 (the 32-fold decomposition of
    /// the extension step needs pieces that stay inside the eighth-ball).
    pub fn new(radius: f64, dim: usize, per_axis: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain("ball radius must be positive".into()));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if per_axis < 33 || per_axis % 2 == 0 {
            return Err(Error::Domain(format!(
                "per_axis must be odd and >= 33, got {per_axis}"
            )));
        }
        Ok(BallGrid { radius, dim, per_axis })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    /// Node spacing: the box [−2R, 2R] spans per_axis − 1 gaps.
    pub fn spacing(&self) -> f64 {
        4.0 * self.radius / (self.per_axis - 1) as f64
    }

    fn center(&self) -> i64 {
        (self.per_axis as i64 - 1) / 2
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of an offset vector (integer multiples of the spacing).
    pub fn flat(&self, offset: &[i64]) -> usize {
        let c = self.center();
        let m = self.per_axis as i64;
        let mut f: i64 = 0;
        for &o in offset {
            debug_assert!((-c..=c).contains(&o));
            f = f * m + (o + c);
        }
        f as usize
    }

    pub fn offset(&self, mut flat: usize) -> Vec<i64> {
        let c = self.center();
        let m = self.per_axis;
        let mut out = vec![0i64; self.dim];
        for a in (0..self.dim).rev() {
            out[a] = (flat % m) as i64 - c;
            flat /= m;
        }
        out
    }

    pub fn position(&self, offset: &[i64]) -> Vec<f64> {
        let h = self.spacing();
        offset.iter().map(|&o| o as f64 * h).collect()
    }

    /// Flat index of the sum of two nodes. The flat map is affine in the
    /// offset, so the sum index is `fx + fy − flat(0)`.
    pub fn sum_flat(&self, fx: usize, fy: usize) -> usize {
        fx + fy - self.flat(&vec![0; self.dim])
    }

    fn norm_sq_units(&self, flat: usize) -> f64 {
        self.offset(flat).iter().map(|&o| (o * o) as f64).sum()
    }

    /// Flat indices of all nodes with |position| ≤ frac · R (closed ball).
    pub fn ball_flats(&self, frac: f64) -> Vec<usize> {
        let h = self.spacing();
        let r_units_sq = (frac * self.radius / h).powi(2) * (1.0 + 1e-12);
        (0..self.len()).filter(|&i| self.norm_sq_units(i) <= r_units_sq).collect()
    }
}

/// Function samples on a [`BallGrid`] together with the hypothesis
/// parameters: additive tolerance τ and claimed exceptional-pair fraction δ.
#[derive(Debug, Clone)]
pub struct PairSampleSet {
    pub grid: BallGrid,
    pub samples: Vec<Complex64>,
    pub tau: f64,
    pub delta: f64,
}

impl PairSampleSet {
    pub fn new(grid: BallGrid, samples: Vec<Complex64>, tau: f64, delta: f64) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch("sample count does not match ball grid".into()));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Domain("tau must be positive".into()));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Domain("delta must lie in [0, 1)".into()));
        }
        for (i, v) in samples.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite(format!("sample {i}")));
            }
        }
        Ok(PairSampleSet { grid, samples, tau, delta })
    }

    pub fn from_fn(
        grid: BallGrid,
        f: impl Fn(&[f64]) -> Complex64,
        tau: f64,
        delta: f64,
    ) -> Result<Self> {
        let samples = (0..grid.len()).map(|i| f(&grid.position(&grid.offset(i)))).collect();
        PairSampleSet::new(grid, samples, tau, delta)
    }
}

/// Per-node richness: x is γ-rich when the fraction of partners y ∈ B_R
/// violating the additive relation stays below γ.
#[derive(Debug, Clone)]
pub struct RichPointMap {
    pub gamma: f64,
    /// Indexed by box flat index; nodes outside B_R are false.
    pub rich: Vec<bool>,
    pub ball: Vec<usize>,
    pub rich_fraction: f64,
    pub subsampled: bool,
}

fn additive_violation(samples: &[Complex64], fx: usize, fy: usize, fsum: usize, tau: f64) -> bool {
    (samples[fx] + samples[fy] - samples[fsum]).norm() > tau
}

fn multiplicative_violation(
    samples: &[Complex64],
    fx: usize,
    fy: usize,
    fsum: usize,
    tau: f64,
) -> bool {
    (samples[fx] * samples[fy] / samples[fsum] - 1.0).norm() > tau
}

fn rich_map_generic(
    grid: &BallGrid,
    ball: &[usize],
    gamma: f64,
    seed: u64,
    violates: &dyn Fn(usize, usize, usize) -> bool,
) -> (Vec<bool>, f64, bool) {
    let zero = grid.flat(&vec![0; grid.dim()]);
    let n = ball.len();
    let subsampled = n > EXACT_PAIR_LIMIT;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x52_49_43_48);
    let mut rich = vec![false; grid.len()];
    let mut rich_count = 0usize;
    for &fx in ball {
        let mut bad = 0usize;
        let total = if subsampled { PAIR_SUBSAMPLE } else { n };
        if subsampled {
            for _ in 0..total {
                let fy = ball[rng.gen_range(0..n)];
                if violates(fx, fy, fx + fy - zero) {
                    bad += 1;
                }
            }
        } else {
            for &fy in ball {
                if violates(fx, fy, fx + fy - zero) {
                    bad += 1;
                }
            }
        }
        if (bad as f64) < gamma * total as f64 {
            rich[fx] = true;
            rich_count += 1;
        }
    }
    (rich, rich_count as f64 / n as f64, subsampled)
}

/// Exact (or flagged subsampled) per-point richness by pair enumeration.
pub fn rich_points(s: &PairSampleSet, gamma: f64, seed: u64) -> Result<RichPointMap> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain("gamma must lie in (0, 1)".into()));
    }
    let ball = s.grid.ball_flats(1.0);
    let samples = s.samples.clone();
    let tau = s.tau;
    let (rich, rich_fraction, subsampled) =
        rich_map_generic(&s.grid, &ball, gamma, seed, &|fx, fy, fs| {
            additive_violation(&samples, fx, fy, fs, tau)
        });
    Ok(RichPointMap { gamma, rich, ball, rich_fraction, subsampled })
}

/// Empirical fraction of violating pairs over B_R².
fn empirical_delta(
    grid: &BallGrid,
    ball: &[usize],
    seed: u64,
    violates: &dyn Fn(usize, usize, usize) -> bool,
) -> f64 {
    let zero = grid.flat(&vec![0; grid.dim()]);
    let n = ball.len();
    let mut bad = 0usize;
    let mut total = 0usize;
    if n * n <= 1 << 22 {
        for &fx in ball {
            for &fy in ball {
                if violates(fx, fy, fx + fy - zero) {
                    bad += 1;
                }
                total += 1;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x44_45_4c_54);
        for _ in 0..(1 << 20) {
            let fx = ball[rng.gen_range(0..n)];
            let fy = ball[rng.gen_range(0..n)];
            if violates(fx, fy, fx + fy - zero) {
                bad += 1;
            }
            total += 1;
        }
    }
    bad as f64 / total as f64
}

/// Shared state for the φ construction.
struct PhiMachine<'a> {
    grid: &'a BallGrid,
    /// φ on the eighth-ball, directly averaged over rich pairs.
    direct: HashMap<usize, Complex64>,
    /// Memoized Monte-Carlo extension values.
    ext: HashMap<usize, Complex64>,
    /// Eighth-ball offsets, reused to draw representation noise.
    eighth_offsets: Vec<Vec<i64>>,
    eighth_units_sq: f64,
    rng: ChaCha8Rng,
    multiplicative: bool,
}

impl<'a> PhiMachine<'a> {
    fn build(
        grid: &'a BallGrid,
        samples: &[Complex64],
        rich: &[bool],
        seed: u64,
        multiplicative: bool,
    ) -> Result<Self> {
        let h = grid.spacing();
        let zero = grid.flat(&vec![0; grid.dim()]);
        let eighth: Vec<usize> = grid.ball_flats(0.125);
        let mut direct = HashMap::new();
        for &fz in &eighth {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut count = 0usize;
            for &fu in &eighth {
                if !rich[fu] {
                    continue;
                }
                // z − u must be a node in the eighth-ball and rich.
                let fv = (fz + zero).wrapping_sub(fu);
                if fv >= grid.len() {
                    continue;
                }
                let same_ball = grid.norm_sq_units(fv)
                    <= (0.125 * grid.radius() / h).powi(2) * (1.0 + 1e-12);
                // Guard against index wraparound across axes.
                let ok_offset = {
                    let oz = grid.offset(fz);
                    let ou = grid.offset(fu);
                    let ov = grid.offset(fv);
                    (0..grid.dim()).all(|a| oz[a] - ou[a] == ov[a])
                };
                if !same_ball || !ok_offset || !rich[fv] {
                    continue;
                }
                if multiplicative {
                    acc += samples[fu] * samples[fv];
                } else {
                    acc += samples[fu] + samples[fv];
                }
                count += 1;
            }
            if count > 0 {
                direct.insert(fz, acc / count as f64);
            }
        }
        if direct.is_empty() {
            return Err(Error::InsufficientRichPoints { rich_fraction: 0.0, quorum: RICH_QUORUM });
        }
        let eighth_offsets: Vec<Vec<i64>> = eighth.iter().map(|&f| grid.offset(f)).collect();
        Ok(PhiMachine {
            grid,
            direct,
            ext: HashMap::new(),
            eighth_offsets,
            eighth_units_sq: (0.125 * grid.radius() / h).powi(2) * (1.0 + 1e-12),
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x50_48_49),
            multiplicative,
        })
    }

    fn offset_in_eighth(&self, offset: &[i64]) -> bool {
        let s: f64 = offset.iter().map(|&o| (o * o) as f64).sum();
        s <= self.eighth_units_sq
    }

    /// φ extended to an arbitrary box node via averaged 32-fold
    /// decompositions z = Σ x_j with every x_j in the eighth-ball.
    fn phi(&mut self, offset: &[i64]) -> Result<Complex64> {
        let flat = self.grid.flat(offset);
        if self.offset_in_eighth(offset) {
            if let Some(&v) = self.direct.get(&flat) {
                return Ok(v);
            }
        }
        if let Some(&v) = self.ext.get(&flat) {
            return Ok(v);
        }
        let d = self.grid.dim();
        // Base decomposition into 32 near-equal integer offsets.
        let mut bases = vec![vec![0i64; d]; 32];
        for a in 0..d {
            let o = offset[a];
            let q = o.div_euclid(32);
            let rem = o.rem_euclid(32);
            for (j, base) in bases.iter_mut().enumerate() {
                base[a] = q + if (j as i64) < rem { 1 } else { 0 };
            }
        }
        // Spread the representations over as much of the eighth-ball as the
        // base decomposition leaves room for: paired ± noise keeps the sum
        // exact, and wide noise averages the per-node error of φ down.
        let base_norm = bases
            .iter()
            .map(|b| b.iter().map(|&o| (o * o) as f64).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let room = (self.eighth_units_sq.sqrt() - base_norm).max(0.0);
        let room_sq = room * room * (1.0 - 1e-12);
        let noise: Vec<&Vec<i64>> = self
            .eighth_offsets
            .iter()
            .filter(|o| o.iter().map(|&v| (v * v) as f64).sum::<f64>() <= room_sq)
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut valid = 0usize;
        for _ in 0..MC_REPS {
            let mut parts = bases.clone();
            if noise.len() > 1 {
                for k in 0..16 {
                    let w = noise[self.rng.gen_range(0..noise.len())];
                    for a in 0..d {
                        parts[2 * k][a] += w[a];
                        parts[2 * k + 1][a] -= w[a];
                    }
                }
            }
            let mut ok = true;
            let mut rep = if self.multiplicative {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for part in &parts {
                let inside = self.offset_in_eighth(part);
                let value = if inside { self.direct.get(&self.grid.flat(part)) } else { None };
                match value {
                    Some(&v) => {
                        if self.multiplicative {
                            rep *= v;
                        } else {
                            rep += v;
                        }
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                acc += rep;
                valid += 1;
            }
        }
        if valid < 32 {
            return Err(Error::OptimizationFailure(format!(
                "phi extension failed at offset {offset:?}: {valid} valid representations"
            )));
        }
        let v = acc / valid as f64;
        self.ext.insert(flat, v);
        Ok(v)
    }
}

/// Residual summary against the recovered structure.
#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    /// The threshold C·τ used for the exceedance count.
    pub threshold: f64,
    /// Fraction of B_R sample points with residual above the threshold.
    pub exceed_fraction: f64,
    pub max_residual: f64,
    pub median_residual: f64,
}

/// A recovered affine map `x ↦ linear·x + constant` with residual report.
#[derive(Debug, Clone)]
pub struct AffineRecovery {
    pub linear: Vec<Complex64>,
    pub constant: Complex64,
    pub residual: ResidualReport,
    pub rich_fraction: f64,
    pub gamma: f64,
    /// Mean |Ψ(x) − Ψ(x+y) + Ψ(y)| over the torus pair sample (additive
    /// recovery only).
    pub torus_additivity: Option<f64>,
    pub subsampled: bool,
}

impl AffineRecovery {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut v = self.constant;
        for (s, xi) in self.linear.iter().zip(x) {
            v += s * *xi;
        }
        v
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn complex_median(vals: &[Complex64]) -> Complex64 {
    Complex64::new(
        median(vals.iter().map(|v| v.re).collect()),
        median(vals.iter().map(|v| v.im).collect()),
    )
}

fn gamma_from_delta(delta_hat: f64) -> f64 {
    delta_hat.max(GAMMA_FLOOR * GAMMA_FLOOR).min(0.2).sqrt()
}

/// Recover a linear map from an approximate additive homomorphism.
///
/// Follows the constructive route: empirical δ, richness at γ = δ^{1/2},
/// pairwise-averaged φ on the eighth-ball, Monte-Carlo 32-fold extension,
/// coordinate anchors `L(ρ e_j) = φ(ρ e_j)` at ρ = R/d, and a torus-averaged
/// additivity diagnostic for ψ = φ − L.
pub fn recover_linear(s: &PairSampleSet, seed: u64) -> Result<AffineRecovery> {
    let ball = s.grid.ball_flats(1.0);
    let samples = &s.samples;
    let tau = s.tau;
    let violates =
        |fx: usize, fy: usize, fs: usize| additive_violation(samples, fx, fy, fs, tau);
    let delta_hat = empirical_delta(&s.grid, &ball, seed, &violates);
    let gamma = gamma_from_delta(delta_hat.max(s.delta));
    let (rich, rich_fraction, subsampled) =
        rich_map_generic(&s.grid, &ball, gamma, seed, &violates);
    if rich_fraction < RICH_QUORUM {
        return Err(Error::InsufficientRichPoints { rich_fraction, quorum: RICH_QUORUM });
    }

    let mut phi = PhiMachine::build(&s.grid, samples, &rich, seed, false)?;
    let d = s.grid.dim();
    let h = s.grid.spacing();
    let rho_units = ((s.grid.radius() / d as f64) / h).round().max(1.0) as i64;

    let mut linear = Vec::with_capacity(d);
    for j in 0..d {
        let mut anchor = vec![0i64; d];
        anchor[j] = rho_units;
        let value = phi.phi(&anchor)?;
        linear.push(value / (rho_units as f64 * h));
    }

    // Torus diagnostic: ψ = φ − L on the lattice torus of side ρ, wrapped
    // with exact index arithmetic.
    let torus_additivity = {
        let k = rho_units;
        let mut psi = |off: &[i64]| -> Result<Complex64> {
            let mut l = Complex64::new(0.0, 0.0);
            for (a, &o) in off.iter().enumerate() {
                l += linear[a] * (o as f64 * h);
            }
            Ok(phi.phi(off)? - l)
        };
        let mut probes: Vec<Vec<i64>> = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x54_4f_52);
        for _ in 0..24 {
            let off: Vec<i64> = (0..d).map(|_| rng.gen_range(0..k)).collect();
            probes.push(off);
        }
        let mut acc = 0.0;
        let mut count = 0usize;
        'outer: for i in 0..probes.len() {
            for jj in (i + 1)..probes.len() {
                let x = &probes[i];
                let y = &probes[jj];
                let wrapped: Vec<i64> = (0..d).map(|a| (x[a] + y[a]).rem_euclid(k)).collect();
                let (px, py, pw) = (psi(x), psi(y), psi(&wrapped));
                match (px, py, pw) {
                    (Ok(px), Ok(py), Ok(pw)) => {
                        acc += (px - pw + py).norm();
                        count += 1;
                    }
                    _ => continue,
                }
                if count >= 128 {
                    break 'outer;
                }
            }
        }
        if count > 0 {
            Some(acc / count as f64)
        } else {
            None
        }
    };

    let factor = constants::LINEAR_RESIDUAL_FACTOR[(d - 1).min(2)];
    let threshold = factor * tau;
    let mut residuals = Vec::with_capacity(ball.len());
    for &fx in &ball {
        let x = s.grid.position(&s.grid.offset(fx));
        let mut l = Complex64::new(0.0, 0.0);
        for (a, xi) in x.iter().enumerate() {
            l += linear[a] * *xi;
        }
        residuals.push((samples[fx] - l).norm());
    }
    let exceed = residuals.iter().filter(|&&r| r > threshold).count();
    let report = ResidualReport {
        threshold,
        exceed_fraction: exceed as f64 / residuals.len() as f64,
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        median_residual: median(residuals),
    };
    Ok(AffineRecovery {
        linear,
        constant: Complex64::new(0.0, 0.0),
        residual: report,
        rich_fraction,
        gamma,
        torus_additivity,
        subsampled,
    })
}

/// Recover the linear exponent of an approximate character
/// (`f(x)f(y) ≈ f(x+y)` multiplicatively): returns L with
/// `f ≈ e^{L + constant}`.
///
/// The anchor walks outward along each axis accumulating principal
/// logarithms of successive φ ratios, so frequencies are recovered without
/// branch ambiguity as long as each step rotates the phase by less than π.
pub fn recover_character(s: &PairSampleSet, seed: u64) -> Result<AffineRecovery> {
    if s.samples.iter().any(|v| v.norm() == 0.0) {
        return Err(Error::ZeroSamples);
    }
    let ball = s.grid.ball_flats(1.0);
    let samples = &s.samples;
    let tau = s.tau;
    let violates =
        |fx: usize, fy: usize, fs: usize| multiplicative_violation(samples, fx, fy, fs, tau);
    let delta_hat = empirical_delta(&s.grid, &ball, seed, &violates);
    let gamma = gamma_from_delta(delta_hat.max(s.delta));
    let (rich, rich_fraction, subsampled) =
        rich_map_generic(&s.grid, &ball, gamma, seed, &violates);
    if rich_fraction < RICH_QUORUM {
        return Err(Error::InsufficientRichPoints { rich_fraction, quorum: RICH_QUORUM });
    }

    let mut phi = PhiMachine::build(&s.grid, samples, &rich, seed, true)?;
    let d = s.grid.dim();
    let h = s.grid.spacing();
    let rho_units = ((s.grid.radius() / d as f64) / h).round().max(1.0) as i64;

    let mut linear = Vec::with_capacity(d);
    for j in 0..d {
        // Walk to the anchor in steps, accumulating unwrapped logarithms.
        let steps = 16.min(rho_units) as usize;
        let mut log_acc = Complex64::new(0.0, 0.0);
        let mut prev = Complex64::new(1.0, 0.0);
        for t in 1..=steps {
            let k = ((t as f64 / steps as f64) * rho_units as f64).round() as i64;
            let mut off = vec![0i64; d];
            off[j] = k;
            let v = phi.phi(&off)?;
            if v.norm() == 0.0 {
                return Err(Error::ZeroSamples);
            }
            log_acc += (v / prev).ln();
            prev = v;
        }
        linear.push(log_acc / (rho_units as f64 * h));
    }

    // Multiplicative constant from the rich-point average of f·e^{−L}.
    let mut acc = Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    for &fx in &ball {
        if !rich[fx] {
            continue;
        }
        let x = s.grid.position(&s.grid.offset(fx));
        let mut l = Complex64::new(0.0, 0.0);
        for (a, xi) in x.iter().enumerate() {
            l += linear[a] * *xi;
        }
        acc += samples[fx] * (-l).exp();
        count += 1;
    }
    let constant = if count > 0 { (acc / count as f64).ln() } else { Complex64::new(0.0, 0.0) };

    let threshold = constants::CHARACTER_RESIDUAL_FACTOR * tau;
    let mut residuals = Vec::with_capacity(ball.len());
    for &fx in &ball {
        let x = s.grid.position(&s.grid.offset(fx));
        let mut l = constant;
        for (a, xi) in x.iter().enumerate() {
            l += linear[a] * *xi;
        }
        residuals.push((samples[fx] * (-l).exp() - 1.0).norm());
    }
    let exceed = residuals.iter().filter(|&&r| r > threshold).count();
    let report = ResidualReport {
        threshold,
        exceed_fraction: exceed as f64 / residuals.len() as f64,
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        median_residual: median(residuals),
    };
    Ok(AffineRecovery {
        linear,
        constant,
        residual: report,
        rich_fraction,
        gamma,
        torus_additivity: None,
        subsampled,
    })
}

/// Outcome of the three-function affine recovery.
#[derive(Debug, Clone)]
pub struct ThreeAffineRecovery {
    pub alpha: AffineRecovery,
    pub beta: AffineRecovery,
    pub gamma: AffineRecovery,
    /// max over a pair sample of |A·L_α(x) + B·L_β(y) + C·L_γ(x+y)|.
    pub consistency_max: f64,
}

/// The shift-and-reduce chain for the function occupying the x-slot of
/// `F1(x) + F3(x+y) ≈ −F2(y)`: choose a shift z by empirical additivity
/// score, reduce to an approximate homomorphism on a sub-ball, and recover
/// its linear part.
fn first_slot_chain(
    grid: &BallGrid,
    first: &[Complex64],
    radius_scale: f64,
    tau: f64,
    seed: u64,
) -> Result<AffineRecovery> {
    let h = grid.spacing();
    let r_work = radius_scale * grid.radius();

    // Sub-ball grid of radius R'/… : nodes out to twice the chain radius / 8.
    let sub_c = ((r_work / 4.0) / h).floor() as i64;
    let sub_m = (2 * sub_c + 1) as usize;
    if sub_m < 33 {
        return Err(Error::Domain(format!(
            "ball grid too coarse for the three-function chain: sub-grid {sub_m} nodes per axis"
        )));
    }
    let d = grid.dim();
    let sub_radius = sub_c as f64 * h / 2.0;
    let sub_grid = BallGrid::new(sub_radius, d, sub_m)?;

    // Candidate shifts in B_{R/16}; score = additivity hit count of
    // x ↦ first(x + z) − first(z) over a seeded pair sample.
    let eighth: Vec<usize> = grid
        .ball_flats(radius_scale * 0.125)
        .into_iter()
        .collect();
    let mut candidates: Vec<usize> = grid.ball_flats(radius_scale / 16.0);
    candidates.sort_unstable();
    if candidates.len() > 33 {
        let stride = candidates.len() / 33 + 1;
        candidates = candidates.into_iter().step_by(stride).collect();
    }
    let zero = grid.flat(&vec![0; d]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x53_48_46);
    let n8 = eighth.len();
    let pair_count = (n8 * n8).min(4096);
    let pairs: Vec<(usize, usize)> = (0..pair_count)
        .map(|_| (eighth[rng.gen_range(0..n8)], eighth[rng.gen_range(0..n8)]))
        .collect();
    let mut best_z = zero;
    let mut best_score = -1i64;
    for &fz in &candidates {
        let shift = |f: usize| f + fz - zero;
        let base = first[fz];
        let mut score = 0i64;
        for &(fx, fy) in &pairs {
            let a = first[shift(fx)] - base;
            let b = first[shift(fy)] - base;
            let c = first[shift(fx + fy - zero)] - base;
            if (c - a - b).norm() <= 4.0 * tau {
                score += 1;
            }
        }
        if score > best_score || (score == best_score && fz < best_z) {
            best_score = score;
            best_z = fz;
        }
    }

    // Build the reduced sample set first♮(x) = first(x + z) − first(z) on
    // the sub-grid and recover its linear part.
    let base = first[best_z];
    let mut sub_samples = Vec::with_capacity(sub_grid.len());
    for i in 0..sub_grid.len() {
        let off = sub_grid.offset(i);
        let shifted = grid.flat(&off) + best_z - zero;
        sub_samples.push(first[shifted] - base);
    }
    let sub_set = PairSampleSet::new(sub_grid, sub_samples, 4.0 * tau, 0.0)?;
    let mut rec = recover_linear(&sub_set, seed ^ 0x53_55_42)?;

    // Affine constant on the working ball, median for corruption robustness.
    let work_ball = grid.ball_flats(radius_scale);
    let devs: Vec<Complex64> = work_ball
        .iter()
        .map(|&fx| {
            let x = grid.position(&grid.offset(fx));
            let mut l = Complex64::new(0.0, 0.0);
            for (a, xi) in x.iter().enumerate() {
                l += rec.linear[a] * *xi;
            }
            first[fx] - l
        })
        .collect();
    rec.constant = complex_median(&devs);

    let threshold = rec.residual.threshold;
    let residuals: Vec<f64> = work_ball
        .iter()
        .map(|&fx| {
            let x = grid.position(&grid.offset(fx));
            (first[fx] - rec.eval(&x)).norm()
        })
        .collect();
    let exceed = residuals.iter().filter(|&&r| r > threshold).count();
    rec.residual = ResidualReport {
        threshold,
        exceed_fraction: exceed as f64 / residuals.len() as f64,
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        median_residual: median(residuals),
    };
    Ok(rec)
}

/// Recover affine functions (L_α, L_β, L_γ) from samples satisfying
/// `|A·α(x) + B·β(y) + C·γ(x+y)| ≤ τ` on most pairs of B_R².
///
/// All three sample arrays live on the same box grid over B_{2R}.
pub fn recover_affine_three(
    grid: &BallGrid,
    alpha: &[Complex64],
    beta: &[Complex64],
    gamma_fn: &[Complex64],
    coefficients: [Complex64; 3],
    tau: f64,
    seed: u64,
) -> Result<ThreeAffineRecovery> {
    let [ca, cb, cc] = coefficients;
    if ca.norm() < 1e-9 || cb.norm() < 1e-9 || cc.norm() < 1e-9 {
        return Err(Error::DegenerateCoefficients);
    }
    for arr in [alpha, beta, gamma_fn] {
        if arr.len() != grid.len() {
            return Err(Error::GridMismatch("sample count does not match ball grid".into()));
        }
    }
    // Normalize to A = B = C = 1.
    let beta_n: Vec<Complex64> = beta.iter().map(|v| v * cb / ca).collect();
    let gamma_n: Vec<Complex64> = gamma_fn.iter().map(|v| v * cc / ca).collect();
    let tau_n = tau / ca.norm();

    let mut rec_a = first_slot_chain(grid, alpha, 1.0, tau_n, seed)?;
    let mut rec_b = first_slot_chain(grid, &beta_n, 1.0, tau_n, seed ^ 1)?;
    // γ occupies the sum slot; substituting u = x+y, v = −y turns it into
    // the x-slot of an equivalent relation at half the radius.
    let mut rec_g = first_slot_chain(grid, &gamma_n, 0.5, tau_n, seed ^ 2)?;

    // Undo the coefficient normalization.
    for v in rec_b.linear.iter_mut() {
        *v = *v * ca / cb;
    }
    rec_b.constant = rec_b.constant * ca / cb;
    for v in rec_g.linear.iter_mut() {
        *v = *v * ca / cc;
    }
    rec_g.constant = rec_g.constant * ca / cc;

    // Consistency of the recovered affine triple over a pair sample.
    let ball = grid.ball_flats(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x43_4f_4e);
    let mut consistency_max = 0.0f64;
    for _ in 0..4096 {
        let fx = ball[rng.gen_range(0..ball.len())];
        let fy = ball[rng.gen_range(0..ball.len())];
        let x = grid.position(&grid.offset(fx));
        let y = grid.position(&grid.offset(fy));
        let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let v = ca * rec_a.eval(&x) + cb * rec_b.eval(&y) + cc * rec_g.eval(&xy);
        consistency_max = consistency_max.max(v.norm());
    }
    Ok(ThreeAffineRecovery {
        alpha: rec_a,
        beta: rec_b,
        gamma: rec_g,
        consistency_max,
    })
}

/// Parameters of the corruption model used by experiment drivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionModel {
    pub noise_amp: f64,
    pub corrupt_frac: f64,
    pub seed: u64,
    pub tau: f64,
    pub gamma: f64,
}

impl CorruptionModel {
    /// Apply the model to exact samples: iid uniform noise of amplitude
    /// `noise_amp` everywhere plus arbitrary ±1e6 corruption on a
    /// `corrupt_frac` fraction of nodes. Deterministic given the seed.
    pub fn apply(&self, samples: &mut [Complex64]) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for v in samples.iter_mut() {
            let u: f64 = rng.gen_range(-1.0..1.0);
            *v += Complex64::new(u * self.noise_amp, 0.0);
            let roll: f64 = rng.gen();
            if roll < self.corrupt_frac {
                let junk: f64 = rng.gen_range(-1e6..1e6);
                *v = Complex64::new(junk, 0.0);
            }
        }
    }
}
