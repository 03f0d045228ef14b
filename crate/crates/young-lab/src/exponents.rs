//! Exponent triples, sharp Young constants, and extremal Gaussian shape
//! ratios.
//!
//! Admissible triples satisfy `p, q, r ∈ (1, ∞)` and `1/p + 1/q + 1/r = 2`.
//! The sharp constant on ℝᵈ is `A_{p,q,r}^d` with `A = C_p C_q C_r` and
//! `C_s² = s^{1/s} / (s′)^{1/s′}`. Every admissible triple has `0 < A < 1`.
//!
//! The trilinear functional restricted to centered Gaussians
//! `(e^{-x²}, e^{-σx²}, e^{-τx²})` attains its maximum `A` at a unique pair
//! of positive ratios `(σ, τ)`; [`extremal_ratios`] locates it by Newton
//! iteration on the strictly concave log-objective built from closed-form
//! Gaussian integrals.

use crate::error::{Error, Result, TripleRejection};
use crate::oracles;

const IDENTITY_TOL: f64 = 1e-12;

/// Conjugate exponent `s′ = s / (s − 1)`.
pub fn conjugate(s: f64) -> f64 {
    s / (s - 1.0)
}

/// A validated exponent triple with conjugates populated.
///
/// Constructed only through [`validate_triple`]; no unvalidated triple
/// circulates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentTriple {
    p: f64,
    q: f64,
    r: f64,
    p_conj: f64,
    q_conj: f64,
    r_conj: f64,
}

impl ExponentTriple {
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn p_conj(&self) -> f64 {
        self.p_conj
    }
    pub fn q_conj(&self) -> f64 {
        self.q_conj
    }
    pub fn r_conj(&self) -> f64 {
        self.r_conj
    }
    /// The convolution target exponent ρ = r′ with 1/ρ = 1/p + 1/q − 1.
    pub fn rho(&self) -> f64 {
        self.r_conj
    }
    /// Exponents in slot order (p, q, r).
    pub fn as_array(&self) -> [f64; 3] {
        [self.p, self.q, self.r]
    }
}

/// Validate `(p, q, r)`: each exponent strictly in (1, ∞) and
/// `1/p + 1/q + 1/r = 2` within 1e-12.
pub fn validate_triple(p: f64, q: f64, r: f64) -> Result<ExponentTriple> {
    for s in [p, q, r] {
        if !s.is_finite() || s <= 1.0 {
            return Err(Error::RejectedTriple(
                "exponents must lie strictly in (1, inf)",
                TripleRejection::OutOfRange,
            ));
        }
    }
    let sum = 1.0 / p + 1.0 / q + 1.0 / r;
    if (sum - 2.0).abs() > IDENTITY_TOL {
        return Err(Error::RejectedTriple(
            "reciprocals must sum to 2",
            TripleRejection::ScalingIdentity,
        ));
    }
    Ok(ExponentTriple {
        p,
        q,
        r,
        p_conj: conjugate(p),
        q_conj: conjugate(q),
        r_conj: conjugate(r),
    })
}

/// The per-exponent sharp factor `C_s = (s^{1/s} / (s′)^{1/s′})^{1/2}`.
pub fn sharp_factor(s: f64) -> Result<f64> {
    if !s.is_finite() || s <= 1.0 {
        return Err(Error::Domain(format!("sharp_factor requires s in (1, inf), got {s}")));
    }
    let t = conjugate(s);
    Ok((s.powf(1.0 / s) / t.powf(1.0 / t)).sqrt())
}

/// The sharp constant for a triple in dimension `d`.
#[derive(Debug, Clone, Copy)]
pub struct SharpConstant {
    pub c_p: f64,
    pub c_q: f64,
    pub c_r: f64,
    /// A_{p,q,r} = C_p C_q C_r, strictly inside (0, 1).
    pub a: f64,
    pub d: usize,
    /// Aᵈ by repeated multiplication.
    pub a_pow_d: f64,
}

/// `A_{p,q,r} = C_p C_q C_r` and its d-th power.
pub fn sharp_constant(triple: &ExponentTriple, d: usize) -> Result<SharpConstant> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let c_p = sharp_factor(triple.p)?;
    let c_q = sharp_factor(triple.q)?;
    let c_r = sharp_factor(triple.r)?;
    let a = c_p * c_q * c_r;
    let mut a_pow_d = 1.0;
    for _ in 0..d {
        a_pow_d *= a;
    }
    Ok(SharpConstant { c_p, c_q, c_r, a, d, a_pow_d })
}

/// Scale ratios (σ, τ) of the extremal centered Gaussian triple
/// `(e^{-x²}, e^{-σx²}, e^{-τx²})`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianShapeRatios {
    pub sigma: f64,
    pub tau: f64,
}

/// Normalized trilinear objective on centered Gaussians with scales
/// `(a, b, c)` in one dimension:
/// `J = ⟨e^{-a·²} * e^{-b·²}, e^{-c·²}⟩ / (‖e^{-a·²}‖_p ‖e^{-b·²}‖_q ‖e^{-c·²}‖_r)`.
pub fn gaussian_objective(triple: &ExponentTriple, a: f64, b: f64, c: f64) -> f64 {
    let num = oracles::gaussian_trilinear(a, b, c, 1).expect("positive scales");
    let den = oracles::gaussian_lp_norm(a, triple.p, 1)
        * oracles::gaussian_lp_norm(b, triple.q, 1)
        * oracles::gaussian_lp_norm(c, triple.r, 1);
    num / den
}

/// Maximize `J(1, σ, τ)` over positive ratios by Newton iteration in
/// log-coordinates. The maximized value equals the sharp constant
/// `A_{p,q,r}` within 1e-8 relative.
pub fn extremal_ratios(triple: &ExponentTriple) -> Result<GaussianShapeRatios> {
    // ln J(e^u, e^v) = const − ½ ln(e^u + e^v + e^{u+v}) + u/(2q) + v/(2r);
    // strictly concave, so the stationary point is the global maximum.
    let (q, r) = (triple.q, triple.r);
    let mut u = 0.0f64;
    let mut v = 0.0f64;
    let mut converged = false;
    for _ in 0..200 {
        let eu = u.exp();
        let ev = v.exp();
        let euv = (u + v).exp();
        let s = eu + ev + euv;
        let p_term = eu + euv;
        let q_term = ev + euv;
        let gu = -0.5 * p_term / s + 0.5 / q;
        let gv = -0.5 * q_term / s + 0.5 / r;
        // Hessian of the log-objective; the cross term uses
        // p_term·q_term = e^{u+v}(1 + s).
        let huu = -0.5 * p_term * ev / (s * s);
        let hvv = -0.5 * q_term * eu / (s * s);
        let huv = 0.5 * euv / (s * s);
        let det = huu * hvv - huv * huv;
        if det.abs() < 1e-300 {
            return Err(Error::OptimizationFailure("singular Hessian".into()));
        }
        let du = -(hvv * gu - huv * gv) / det;
        let dv = -(huu * gv - huv * gu) / det;
        u += du;
        v += dv;
        if gu.abs() < 1e-14 && gv.abs() < 1e-14 {
            converged = true;
            break;
        }
    }
    if !converged {
        // Re-check the gradient at the final iterate.
        let eu = u.exp();
        let ev = v.exp();
        let euv = (u + v).exp();
        let s = eu + ev + euv;
        let gu = -0.5 * (eu + euv) / s + 0.5 / q;
        let gv = -0.5 * (ev + euv) / s + 0.5 / r;
        if gu.abs() > 1e-10 || gv.abs() > 1e-10 {
            return Err(Error::OptimizationFailure(format!(
                "extremal ratio search did not converge (grad = {gu}, {gv})"
            )));
        }
    }
    let sigma = u.exp();
    let tau = v.exp();
    let value = gaussian_objective(triple, 1.0, sigma, tau);
    let a = sharp_constant(triple, 1)?.a;
    if ((value - a) / a).abs() > 1e-8 {
        return Err(Error::OptimizationFailure(format!(
            "objective {value} does not match sharp constant {a}"
        )));
    }
    Ok(GaussianShapeRatios { sigma, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Closed-form optimum derived by solving the stationarity conditions
    /// ab : bc : ca = 1/r′ : 1/p′ : 1/q′ with a = 1. Kept test-side as an
    /// independent oracle for the Newton search.
    fn closed_form_ratios(t: &ExponentTriple) -> (f64, f64) {
        (t.q_conj() / t.p_conj(), t.r_conj() / t.p_conj())
    }

    fn random_triple(x: f64, y: f64) -> Option<ExponentTriple> {
        // Map (x, y) in (0,1)² to reciprocals summing to 2 with each in (0,1).
        let ip = 1.0 / (1.0 + x); // in (1/2, 1)
        let iq_max = (1.0 - (2.0 - ip - 1.0)).min(0.999) - 1e-6; // keep ir < 1
        let iq_min = (2.0 - ip - 0.999).max(0.001) + 1e-6;
        if iq_max <= iq_min {
            return None;
        }
        let iq = iq_min + y * (iq_max - iq_min);
        let ir = 2.0 - ip - iq;
        if !(0.001..0.999).contains(&ir) {
            return None;
        }
        validate_triple(1.0 / ip, 1.0 / iq, 1.0 / ir).ok()
    }

    #[test]
    fn symmetric_triple_is_valid_with_conjugate_three() {
        let t = validate_triple(1.5, 1.5, 1.5).unwrap();
        assert!((t.p_conj() - 3.0).abs() < 1e-12);
        assert!((t.rho() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn all_twos_rejected_for_scaling_identity() {
        match validate_triple(2.0, 2.0, 2.0) {
            Err(Error::RejectedTriple(_, TripleRejection::ScalingIdentity)) => {}
            other => panic!("expected scaling-identity rejection, got {other:?}"),
        }
    }

    #[test]
    fn endpoint_exponents_rejected() {
        for bad in [(1.0, 2.0, 2.0), (0.5, 1.5, 1.5), (f64::INFINITY, 1.5, 1.5)] {
            match validate_triple(bad.0, bad.1, bad.2) {
                Err(Error::RejectedTriple(_, TripleRejection::OutOfRange)) => {}
                other => panic!("expected out-of-range rejection, got {other:?}"),
            }
        }
    }

    #[test]
    fn solved_third_exponent_accepted() {
        // 1/r = 2 − 1/2 − 2/3 = 5/6, so r = 1.2.
        let t = validate_triple(2.0, 1.5, 1.2).unwrap();
        assert!((t.r() - 1.2).abs() < 1e-12);
        assert!((t.p_conj() - 2.0).abs() < 1e-12);
        assert!((t.q_conj() - 3.0).abs() < 1e-12);
        assert!((t.r_conj() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn sharp_factor_self_conjugate_is_one() {
        assert!((sharp_factor(2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sharp_factor_at_one_point_five() {
        // C_{1.5} = ((1.5)^{2/3} / 3^{1/3})^{1/2}
        let want = ((1.5f64.powf(2.0 / 3.0)) / 3.0f64.powf(1.0 / 3.0)).sqrt();
        assert!((sharp_factor(1.5).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn sharp_factor_limit_near_one() {
        let c = sharp_factor(1.0 + 1e-6).unwrap();
        assert!((c - 1.0).abs() < 1e-3, "C near s=1 was {c}");
    }

    #[test]
    fn sharp_factor_rejects_bad_domain() {
        assert!(sharp_factor(1.0).is_err());
        assert!(sharp_factor(f64::NAN).is_err());
    }

    #[test]
    fn symmetric_sharp_constant_is_sqrt3_over_2() {
        // C_{1.5}³ simplifies to (3/2)/√3 = √3/2.
        let t = validate_triple(1.5, 1.5, 1.5).unwrap();
        let sc = sharp_constant(&t, 1).unwrap();
        let golden = 3.0f64.sqrt() / 2.0;
        assert!(((sc.a - golden) / golden).abs() < 1e-12);
        let sc3 = sharp_constant(&t, 3).unwrap();
        assert!((sc3.a_pow_d - sc.a * sc.a * sc.a).abs() < 1e-15);
    }

    #[test]
    fn extremal_ratios_symmetric_case() {
        let t = validate_triple(1.5, 1.5, 1.5).unwrap();
        let gs = extremal_ratios(&t).unwrap();
        assert!((gs.sigma - 1.0).abs() < 1e-8);
        assert!((gs.tau - 1.0).abs() < 1e-8);
    }

    #[test]
    fn extremal_ratios_asymmetric_case_matches_oracle() {
        let t = validate_triple(2.0, 1.5, 1.2).unwrap();
        let gs = extremal_ratios(&t).unwrap();
        let (sig, tau) = closed_form_ratios(&t);
        assert!((gs.sigma - sig).abs() < 1e-7, "sigma {} vs {}", gs.sigma, sig);
        assert!((gs.tau - tau).abs() < 1e-7, "tau {} vs {}", gs.tau, tau);
        let j = gaussian_objective(&t, 1.0, gs.sigma, gs.tau);
        let a = sharp_constant(&t, 1).unwrap().a;
        assert!(((j - a) / a).abs() < 1e-8);
    }

    #[test]
    fn objective_never_exceeds_sharp_constant() {
        let t = validate_triple(2.0, 1.5, 1.2).unwrap();
        let a = sharp_constant(&t, 1).unwrap().a;
        for (s, tt) in [(0.3, 0.8), (1.0, 1.0), (2.5, 0.4), (10.0, 3.0), (1.5, 3.0)] {
            let j = gaussian_objective(&t, 1.0, s, tt);
            assert!(j <= a * (1.0 + 1e-12), "J({s},{tt}) = {j} exceeds A = {a}");
        }
    }

    proptest! {
        #[test]
        fn prop_sharp_constant_in_unit_interval(x in 1e-3..0.999f64, y in 0.0..1.0f64) {
            if let Some(t) = random_triple(x, y) {
                let sc = sharp_constant(&t, 1).unwrap();
                prop_assert!(sc.a > 0.0 && sc.a < 1.0);
            }
        }

        #[test]
        fn prop_permutation_symmetry(x in 1e-3..0.999f64, y in 0.0..1.0f64) {
            if let Some(t) = random_triple(x, y) {
                let a0 = sharp_constant(&t, 1).unwrap().a;
                for (p, q, r) in [
                    (t.q(), t.p(), t.r()),
                    (t.r(), t.q(), t.p()),
                    (t.q(), t.r(), t.p()),
                ] {
                    let tp = validate_triple(p, q, r).unwrap();
                    let a1 = sharp_constant(&tp, 1).unwrap().a;
                    prop_assert!((a0 - a1).abs() < 1e-14);
                }
            }
        }

        #[test]
        fn prop_conjugate_involution(s in 1.0001..200.0f64) {
            prop_assert!((conjugate(conjugate(s)) - s).abs() < 1e-12 * s.max(1.0));
        }

        #[test]
        fn prop_extremal_ratios_match_closed_form(x in 0.05..0.95f64, y in 0.05..0.95f64) {
            if let Some(t) = random_triple(x, y) {
                let gs = extremal_ratios(&t).unwrap();
                let (sig, tau) = closed_form_ratios(&t);
                prop_assert!((gs.sigma - sig).abs() < 1e-6 * sig.max(1.0));
                prop_assert!((gs.tau - tau).abs() < 1e-6 * tau.max(1.0));
            }
        }
    }

    #[test]
    fn thousand_random_triples_have_a_in_unit_interval() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut count = 0;
        while count < 1000 {
            let x: f64 = rng.gen_range(1e-3..0.999);
            let y: f64 = rng.gen_range(0.0..1.0);
            if let Some(t) = random_triple(x, y) {
                let sc = sharp_constant(&t, 1).unwrap();
                assert!(sc.a > 0.0 && sc.a < 1.0, "A out of range for {t:?}");
                count += 1;
            }
        }
    }
}
