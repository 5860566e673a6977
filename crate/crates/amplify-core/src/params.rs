//! Parameter engine: the Γ function and the four rounds of parameter choices,
//! bias and rate certification in log₂ domain, and list-decoding thresholds.
//!
//! A bias ε is always carried as x = log₂(1/ε), so ε = 2^{−x} for x up to 2^64 and beyond
//! stays representable.

use thiserror::Error;

use crate::Rational;

/// Smallest width accepted in paper mode.
pub const PAPER_MIN_WIDTH: u64 = 128;

/// Default value of the constants K and K′ of the list-decoding framework, as log₂.
pub const DEFAULT_LOG2_K: f64 = 30.0;

/// Exponent c of the base-code block length n = O(D/ε0^c).
pub const BASE_LENGTH_EXPONENT: f64 = 2.001;

const LOG_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("bad alpha: {0}")]
    BadAlpha(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// s ≥ 128 enforced; nothing is instantiated.
    #[default]
    Paper,
    /// Any power-of-two width; intended for instances small enough to build.
    Desk,
}

/// Graph-side parameters at width s and multiplier Q, all as log₂ values.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpanderParams {
    pub s: u64,
    pub q: u64,
    pub log2_d2: f64,
    pub b2: f64,
    pub log2_lambda2: f64,
    pub log2_eps0: f64,
    pub log2_theta: f64,
    pub log2_d1: f64,
    pub log2_lambda1_bound: f64,
}

/// d2 = s^{4s²Q}, b2 = 4s·log₂ d2, λ2 = b2/√d2, ε0 = 1/d2², θ = λ2⁴/6, d1 = d2⁴, λ1 ≤ 2√2/√d1.
pub fn expander_params(s: u64, q: u64) -> Result<ExpanderParams, ParamError> {
    check_width(s)?;
    if q == 0 {
        return Err(ParamError::Infeasible("Q must be positive".into()));
    }
    let (sf, qf) = (s as f64, q as f64);
    let log2_d2 = 4.0 * sf * sf * qf * sf.log2();
    let b2 = 4.0 * sf * log2_d2;
    let log2_lambda2 = b2.log2() - log2_d2 / 2.0;
    let log2_d1 = 4.0 * log2_d2;
    Ok(ExpanderParams {
        s,
        q,
        log2_d2,
        b2,
        log2_lambda2,
        log2_eps0: -2.0 * log2_d2,
        log2_theta: 4.0 * log2_lambda2 - 6f64.log2(),
        log2_d1,
        log2_lambda1_bound: 1.5 - log2_d1 / 2.0,
    })
}

fn check_width(s: u64) -> Result<(), ParamError> {
    if s < 2 || !s.is_power_of_two() {
        return Err(ParamError::BadAlpha(format!("1/α = {s} is not a power of two ≥ 2")));
    }
    Ok(())
}

/// s = 1/α, checking that 1/α is a power of two (and ≥ 128 in paper mode).
pub fn width_of(alpha: Rational, mode: Mode) -> Result<u64, ParamError> {
    if *alpha.numer() != 1 || *alpha.denom() < 2 {
        return Err(ParamError::BadAlpha(format!("α = {alpha} is not 1/s")));
    }
    let s = *alpha.denom() as u64;
    check_width(s)?;
    if mode == Mode::Paper && s < PAPER_MIN_WIDTH {
        return Err(ParamError::BadAlpha(format!("paper mode needs α ≤ 1/{PAPER_MIN_WIDTH}, got 1/{s}")));
    }
    Ok(s)
}

/// α⁵/(4 log₂(1/α)) ≥ 1/log₂(1/ε) with ε = 2^{−x}.
pub fn alpha_feasible(alpha: Rational, x: f64, mode: Mode) -> Result<bool, ParamError> {
    let s = width_of(alpha, mode)?;
    Ok(alpha_feasible_width(s, x))
}

fn alpha_feasible_width(s: u64, x: f64) -> bool {
    let j = (s as f64).log2();
    x > 0.0 && x.log2() >= 5.0 * j + 2.0 + j.log2() - LOG_TOL
}

/// Every parameter of one construction; the walk fields are filled by [`gamma`] and the rounds.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSet {
    pub mode: Mode,
    pub s: u64,
    pub alpha: Rational,
    pub q: u64,
    pub log2_dim: f64,
    /// x with ε = 2^{−x}.
    pub log2_inv_eps: f64,
    pub graphs: ExpanderParams,
    pub walk: Option<WalkSchedule>,
    pub log2_n: f64,
    /// Marks a base code that comes from the Round II construction.
    pub base_from_round_two: bool,
    /// β = 26α.
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkSchedule {
    /// Number of walk vertices t.
    pub t: u128,
    pub ell: Option<u32>,
    pub zeta_ratio: Option<f64>,
    pub top_arity: Option<u128>,
    pub t_prime: Option<u128>,
    pub log2_big_n: f64,
    pub rate_exponent: f64,
    /// Graph parameters of the second Γ application in Round II.
    pub final_graphs: Option<ExpanderParams>,
}

fn walk_coefficient(s: u64, log2_lambda2: f64, extra: f64) -> f64 {
    let a = 1.0 / s as f64;
    (1.0 - 5.0 * a) * (1.0 - a) * extra * (-2.0 * log2_lambda2)
}

fn log2_block_length(log2_n: f64, g: &ExpanderParams, walk_vertices: u128) -> f64 {
    log2_n + g.s as f64 * g.log2_d1 + 2.0 * (walk_vertices.saturating_sub(1)) as f64 * g.log2_d2
}

/// Γ(D, ε, α, Q): t is the smallest integer with (λ2²)^{(1−5α)(1−α)(t−1)} ≤ ε.
pub fn gamma(log2_dim: f64, x: f64, alpha: Rational, q: u64, mode: Mode) -> Result<ParamSet, ParamError> {
    gamma_with_factor(log2_dim, x, alpha, q, mode, 1.0)
}

fn gamma_with_factor(
    log2_dim: f64,
    x: f64,
    alpha: Rational,
    q: u64,
    mode: Mode,
    extra: f64,
) -> Result<ParamSet, ParamError> {
    let s = width_of(alpha, mode)?;
    if !alpha_feasible_width(s, x) {
        return Err(ParamError::Infeasible(format!(
            "α = 1/{s} fails α⁵/(4 log₂(1/α)) ≥ 1/log₂(1/ε) at log₂(1/ε) = {x}"
        )));
    }
    let graphs = expander_params(s, q)?;
    let c = walk_coefficient(s, graphs.log2_lambda2, extra);
    if c <= 0.0 {
        return Err(ParamError::Infeasible(format!("walk exponent is non-positive at s = {s}")));
    }
    let steps = (x / c).ceil();
    if !(steps.is_finite() && steps < 1e36) {
        return Err(ParamError::Infeasible("walk length overflows".into()));
    }
    let steps = steps as u128;
    if steps < (s as u128) * (s as u128) {
        return Err(ParamError::Infeasible(format!("t − 1 = {steps} < s² = {}", s * s)));
    }
    let t = steps + 1;
    let log2_n = log2_dim + BASE_LENGTH_EXPONENT * -graphs.log2_eps0;
    let log2_big_n = log2_block_length(log2_n, &graphs, t);
    Ok(ParamSet {
        mode,
        s,
        alpha,
        q,
        log2_dim,
        log2_inv_eps: x,
        walk: Some(WalkSchedule {
            t,
            ell: None,
            zeta_ratio: None,
            top_arity: None,
            t_prime: None,
            log2_big_n,
            rate_exponent: (log2_big_n - log2_dim) / x,
            final_graphs: None,
        }),
        graphs,
        log2_n,
        base_from_round_two: false,
        beta: 26.0 / s as f64,
    })
}

/// Bias sandwich of the chosen t: (λ2²)^{c(t−1)} ≤ ε and (λ2²)^{c(1−α)(t−1)} ≥ ε, c = (1−5α)(1−α).
pub fn bias_certificate(p: &ParamSet) -> Option<(bool, bool)> {
    let w = p.walk.as_ref()?;
    let a = 1.0 / p.s as f64;
    let c = walk_coefficient(p.s, p.graphs.log2_lambda2, 1.0);
    let steps = (w.t - 1) as f64;
    Some((c * steps >= p.log2_inv_eps * (1.0 - 1e-12), c * (1.0 - a) * steps <= p.log2_inv_eps * (1.0 + 1e-12)))
}

/// The inequality chain behind the rate claim, in log₂ domain.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCertificate {
    /// d2^{2(t−1)} ≤ (1/ε)^{2(1+10α)}.
    pub walk_cost: bool,
    /// d2^{1−2α} ≤ 1/σ₂(H²) = d2/b2².
    pub inner_expansion: bool,
    /// (log₂ N − log₂ D)/log₂(1/ε) ≤ 2 + 26α (up to lower-order terms in D-independent factors).
    pub rate: bool,
    pub rate_exponent: f64,
    pub rate_exponent_bound: f64,
}

impl RateCertificate {
    pub fn holds(&self) -> bool {
        self.walk_cost && self.inner_expansion && self.rate
    }
}

pub fn rate_certificate(p: &ParamSet) -> Option<RateCertificate> {
    let w = p.walk.as_ref()?;
    let a = 1.0 / p.s as f64;
    let g = &p.graphs;
    let x = p.log2_inv_eps;
    let steps = (w.t - 1) as f64;
    let walk_cost = 2.0 * steps * g.log2_d2 <= 2.0 * (1.0 + 10.0 * a) * x * (1.0 + 1e-12);
    let inner_expansion = (1.0 - 2.0 * a) * g.log2_d2 <= g.log2_d2 - 2.0 * g.b2.log2() + LOG_TOL;
    let bound = 2.0 + 26.0 * a;
    let exponent = (w.log2_big_n - p.log2_dim) / x;
    Some(RateCertificate {
        walk_cost,
        inner_expansion,
        rate: exponent <= bound,
        rate_exponent: exponent,
        rate_exponent_bound: bound,
    })
}

/// True when every link of the rate chain holds.
pub fn rate_certify(p: &ParamSet) -> bool {
    rate_certificate(p).is_some_and(|c| c.holds())
}

/// Round II walk choice: Γ with Q = s and the extra (1−2α) factor in the walk exponent,
/// followed by [`round_two_adjust`] and the second Γ application with Q = 1.
pub fn round_two(log2_dim: f64, x: f64, alpha: Rational, mode: Mode) -> Result<ParamSet, ParamError> {
    let s = width_of(alpha, mode)?;
    let a = 1.0 / s as f64;
    let p = gamma_with_factor(log2_dim, x, alpha, s, mode, 1.0 - 2.0 * a)?;
    round_two_adjust(&p)
}

/// ℓ smallest with s^ℓ ≥ t; ζ = t/s^{ℓ−1}; P the integer in [Q, sQ] with 0 ≤ P/Q − ζ ≤ 1/Q;
/// t′ = P·s^{ℓ−1}. When s^ℓ = t the input comes back unchanged with t′ = t.
pub fn round_two_adjust(p: &ParamSet) -> Result<ParamSet, ParamError> {
    let w = p.walk.as_ref().ok_or_else(|| ParamError::Infeasible("no walk length to adjust".into()))?;
    let (s, t, q) = (p.s as u128, w.t, p.q as u128);
    if t <= s {
        return Err(ParamError::Infeasible(format!("t = {t} ≤ s = {s}")));
    }
    let mut ell = 1u32;
    let mut power = s;
    while power < t {
        power = power.checked_mul(s).ok_or_else(|| ParamError::Infeasible("s^ℓ overflows".into()))?;
        ell += 1;
    }
    let mut out = p.clone();
    let walk = out.walk.as_mut().expect("checked above");
    walk.ell = Some(ell);
    if power == t {
        walk.zeta_ratio = Some(s as f64);
        walk.top_arity = Some(s);
        walk.t_prime = Some(t);
        return Ok(out);
    }
    let below = power / s;
    let top_arity = (t * q).div_ceil(below);
    let t_prime = top_arity * below;
    if !(q <= top_arity && top_arity <= s * q) {
        return Err(ParamError::Infeasible(format!("P = {top_arity} outside [Q, sQ]")));
    }
    let final_graphs = expander_params(p.s, 1)?;
    let log2_big_n = log2_block_length(p.log2_n, &final_graphs, t_prime);
    walk.zeta_ratio = Some(t as f64 / below as f64);
    walk.top_arity = Some(top_arity);
    walk.t_prime = Some(t_prime);
    walk.log2_big_n = log2_big_n;
    walk.rate_exponent = (log2_big_n - p.log2_dim) / p.log2_inv_eps;
    walk.final_graphs = Some(final_graphs);
    Ok(out)
}

/// t − 1 ≤ (t′−1)/Q ≤ (1+2α)(t−1), for an adjusted schedule.
pub fn round_two_sandwich(p: &ParamSet) -> Option<bool> {
    let w = p.walk.as_ref()?;
    let t_prime = w.t_prime?;
    let steps = (w.t - 1) as f64;
    let scaled = (t_prime - 1) as f64 / p.q as f64;
    Some(steps <= scaled && scaled <= (1.0 + 2.0 / p.s as f64) * steps)
}

/// (λ2′)^Q ≤ λ2^{1−2α} with λ2 at multiplier Q and λ2′ at multiplier 1.
pub fn round_two_lambda_check(s: u64, q: u64) -> Result<bool, ParamError> {
    let first = expander_params(s, q)?;
    let second = expander_params(s, 1)?;
    let a = 1.0 / s as f64;
    Ok(q as f64 * second.log2_lambda2 <= (1.0 - 2.0 * a) * first.log2_lambda2 + LOG_TOL)
}

/// Rate bound 2 + 40α of the adjusted Round II schedule.
pub fn round_two_rate_holds(p: &ParamSet) -> Option<bool> {
    let w = p.walk.as_ref()?;
    Some(w.rate_exponent <= 2.0 + 40.0 / p.s as f64)
}

/// Round III: s is the smallest power of two ≥ c3·x^{1/6}; the Round II pipeline runs at that
/// s when it is feasible, otherwise the walk schedule is `None`.
pub fn round_three(log2_dim: f64, x: f64, c3: f64) -> Result<ParamSet, ParamError> {
    if !(x > 0.0 && c3 > 0.0) {
        return Err(ParamError::Infeasible("need ε < 1 and a positive constant".into()));
    }
    let target = c3 * x.powf(1.0 / 6.0);
    let mut s = 2u64;
    while (s as f64) < target * (1.0 - 1e-12) {
        s = s.checked_mul(2).ok_or_else(|| ParamError::Infeasible("width overflows".into()))?;
    }
    let alpha = Rational::new(1, s as i128);
    let mode = if s >= PAPER_MIN_WIDTH { Mode::Paper } else { Mode::Desk };
    let mut p = match round_two(log2_dim, x, alpha, mode) {
        Ok(p) => p,
        Err(ParamError::Infeasible(_)) => {
            let graphs = expander_params(s, s)?;
            ParamSet {
                mode,
                s,
                alpha,
                q: s,
                log2_dim,
                log2_inv_eps: x,
                log2_n: log2_dim + BASE_LENGTH_EXPONENT * -graphs.log2_eps0,
                graphs,
                walk: None,
                base_from_round_two: true,
                beta: 26.0 / s as f64,
            }
        }
        Err(e) => return Err(e),
    };
    p.base_from_round_two = true;
    Ok(p)
}

/// Largest e ∈ (0, c·s] with e ≤ s/κ and 8e ≤ s²·log₂ s − 2s² − 2 log₂ s − 1, by bisection;
/// returns η = 2^{−e} as log₂ η = −e.
pub fn round_four_radius(s: u64, c: f64, kappa: f64) -> Result<f64, ParamError> {
    if s < 4 {
        return Err(ParamError::Infeasible(format!("s = {s} < 4")));
    }
    if !(c > 0.0 && kappa > 0.0) {
        return Err(ParamError::Infeasible("constants must be positive".into()));
    }
    let sf = s as f64;
    let ls = sf.log2();
    let feasible = |e: f64| e <= sf / kappa && 8.0 * e <= sf * sf * ls - 2.0 * sf * sf - 2.0 * ls - 1.0;
    let hi = c * sf;
    if feasible(hi) {
        return Ok(-hi);
    }
    let (mut lo, mut hi) = (0.0, hi);
    if !feasible(f64::MIN_POSITIVE) {
        return Err(ParamError::Infeasible(format!("no η = 2^(−e) with e > 0 meets the constraints at s = {s}")));
    }
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(-lo)
}

/// List-decoding thresholds for radius 1/2 − √η and arity k.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSet {
    pub k0: f64,
    pub k0_prime: f64,
    pub log2_tau0: f64,
    pub log2_l: f64,
    pub log2_k_const: f64,
    pub log2_k_prime_const: f64,
    /// s²(s/16)^{−s²} ≤ η⁸/(4K) evaluated at s = k.
    pub splittability_gate: bool,
}

pub fn thresholds(log2_eta: f64, k: u64) -> ThresholdSet {
    thresholds_with_constants(log2_eta, k, DEFAULT_LOG2_K, DEFAULT_LOG2_K)
}

pub fn thresholds_with_constants(log2_eta: f64, k: u64, log2_k_const: f64, log2_k_prime_const: f64) -> ThresholdSet {
    let ln_inv_eta = -log2_eta * std::f64::consts::LN_2;
    let kf = k as f64;
    let lk = kf.log2();
    ThresholdSet {
        k0: 2.0 * (1.0 + ln_inv_eta / (4.0f64 / 3.0).ln()),
        k0_prime: 2.0 * (1.0 + ln_inv_eta / (16.0f64 / 15.0).ln()),
        log2_tau0: 8.0 * log2_eta - log2_k_const - lk - 4.0 * kf,
        log2_l: log2_k_prime_const + 4.0 * lk + 4.0 * kf - 32.0 * log2_eta,
        log2_k_const,
        log2_k_prime_const,
        splittability_gate: 2.0 * lk - kf * kf * (lk - 4.0) <= 8.0 * log2_eta - 2.0 - log2_k_const,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn alpha_examples() {
        let a = Rational::new(1, 128);
        assert!(alpha_feasible(a, 2f64.powi(40), Mode::Paper).unwrap());
        assert!(!alpha_feasible(a, 1.0, Mode::Paper).unwrap());
        assert!(matches!(alpha_feasible(Rational::new(1, 100), 1e9, Mode::Paper), Err(ParamError::BadAlpha(_))));
        assert!(matches!(alpha_feasible(Rational::new(1, 64), 1e9, Mode::Paper), Err(ParamError::BadAlpha(_))));
        assert!(alpha_feasible(Rational::new(1, 64), 1e12, Mode::Desk).unwrap());
    }

    #[test]
    fn expander_block_at_width_two() {
        let g = expander_params(2, 1).unwrap();
        assert_eq!(g.log2_d2, 16.0);
        assert_eq!(g.b2, 128.0);
        assert_eq!(g.log2_lambda2, -1.0);
        assert_eq!(g.log2_eps0, -32.0);
        assert!(close(g.log2_theta, -(96f64.log2()), 1e-12));
        assert_eq!(g.log2_d1, 64.0);
    }

    #[test]
    fn gamma_identities_and_certificates() {
        for (s, x) in [(128u64, 2f64.powi(40)), (128, 2f64.powi(50)), (256, 2f64.powi(50))] {
            let p = gamma(10.0, x, Rational::new(1, s as i128), 1, Mode::Paper).unwrap();
            let g = &p.graphs;
            assert!(close(g.log2_d1, 4.0 * g.log2_d2, 1e-9));
            assert!(close(g.log2_eps0, -2.0 * g.log2_d2, 1e-9));
            assert!(close(g.log2_lambda2, g.b2.log2() - g.log2_d2 / 2.0, 1e-9));
            assert!(close(g.b2, 4.0 * s as f64 * g.log2_d2, 1e-6));
            let w = p.walk.as_ref().unwrap();
            assert!(w.t > (s * s) as u128);
            assert_eq!(bias_certificate(&p), Some((true, true)));
            let expected = p.log2_n + s as f64 * g.log2_d1 + 2.0 * (w.t - 1) as f64 * g.log2_d2;
            assert!(close(w.log2_big_n, expected, 1e-6 * expected));
            assert!(rate_certify(&p));
        }
        assert!(matches!(gamma(10.0, 1e6, Rational::new(1, 128), 1, Mode::Paper), Err(ParamError::Infeasible(_))));
        assert!(matches!(gamma(10.0, 1e9, Rational::new(1, 4), 1, Mode::Desk), Err(ParamError::Infeasible(_))));
    }

    #[test]
    fn inflated_walk_fails_rate() {
        let mut p = gamma(10.0, 2f64.powi(40), Rational::new(1, 128), 1, Mode::Paper).unwrap();
        let w = p.walk.as_mut().unwrap();
        w.t *= 3;
        let g = &p.graphs;
        w.log2_big_n = p.log2_n + 128.0 * g.log2_d1 + 2.0 * (w.t - 1) as f64 * g.log2_d2;
        assert!(!rate_certify(&p));
    }

    #[test]
    fn round_two_examples() {
        let mut p = gamma(10.0, 2f64.powi(40), Rational::new(1, 128), 1, Mode::Paper).unwrap();
        p.s = 2;
        p.q = 2;
        p.walk.as_mut().unwrap().t = 6;
        let adj = round_two_adjust(&p).unwrap();
        let w = adj.walk.unwrap();
        assert_eq!(w.ell, Some(3));
        assert_eq!(w.zeta_ratio, Some(1.5));
        assert_eq!(w.top_arity, Some(3));
        assert_eq!(w.t_prime, Some(12));

        p.walk.as_mut().unwrap().t = 8;
        let exact = round_two_adjust(&p).unwrap();
        assert_eq!(exact.walk.as_ref().unwrap().t_prime, Some(8));
        assert_eq!(exact.walk.as_ref().unwrap().log2_big_n, p.walk.as_ref().unwrap().log2_big_n);

        p.walk.as_mut().unwrap().t = 2;
        assert!(matches!(round_two_adjust(&p), Err(ParamError::Infeasible(_))));
    }

    #[test]
    fn round_two_pipeline_at_paper_scale() {
        for x in [2f64.powi(45), 2f64.powi(50)] {
            let p = round_two(10.0, x, Rational::new(1, 128), Mode::Paper).unwrap();
            assert_eq!(round_two_sandwich(&p), Some(true));
            assert_eq!(round_two_rate_holds(&p), Some(true));
        }
        for s in [8u64, 16, 128, 256] {
            assert!(round_two_lambda_check(s, s).unwrap());
        }
    }

    #[test]
    fn round_three_examples() {
        assert_eq!(round_three(10.0, 64.0, 1.0).unwrap().s, 2);
        assert!(round_three(10.0, 64.0, 1.0).unwrap().walk.is_none());
        assert_eq!(round_three(10.0, 1e12, 1.0).unwrap().s, 128);
        let p = round_three(10.0, 2f64.powi(64), 1.0).unwrap();
        assert_eq!(p.s, 2048);
        assert!(p.base_from_round_two);
        assert!(close(p.beta, 26.0 / 2048.0, 1e-15));
    }

    #[test]
    fn round_four_examples() {
        assert_eq!(round_four_radius(128, 1.0, 1.0).unwrap(), -128.0);
        assert!(matches!(round_four_radius(4, 1.0, 1.0), Err(ParamError::Infeasible(_))));
        assert!(matches!(round_four_radius(2, 1.0, 1.0), Err(ParamError::Infeasible(_))));
        // At s = 8 the second constraint binds: 8e ≤ 192 − 128 − 6 − 1.
        assert!(close(round_four_radius(8, 1.0, 1.0).unwrap(), -57.0 / 8.0, 1e-9));
    }

    #[test]
    fn threshold_examples() {
        let th = thresholds((0.01f64).log2(), 35);
        assert_eq!((th.k0 * 100.0).round() / 100.0, 34.02);
        assert_eq!((th.k0_prime * 10.0).round() / 10.0, 144.7);
        assert!(close(th.log2_tau0, -8.0 * 100f64.log2() - 30.0 - 35f64.log2() - 140.0, 1e-9));
        assert!(close(th.log2_l, 30.0 + 4.0 * 35f64.log2() + 140.0 + 32.0 * 100f64.log2(), 1e-9));
    }

    proptest! {
        #[test]
        fn sandwich_on_random_inputs(j in 1u32..8, q in 1u64..200, extra in 1u64..100_000) {
            let s = 1u64 << j;
            let q = q.max(s);
            let t = s as u128 + 1 + extra as u128;
            let mut p = gamma(10.0, 2f64.powi(40), Rational::new(1, 128), 1, Mode::Paper).unwrap();
            p.s = s;
            p.q = q;
            p.walk.as_mut().unwrap().t = t;
            let adj = round_two_adjust(&p).unwrap();
            let w = adj.walk.as_ref().unwrap();
            if w.t_prime != Some(t) {
                prop_assert_eq!(round_two_sandwich(&adj), Some(true));
                let top = w.top_arity.unwrap();
                prop_assert!(q as u128 <= top && top <= s as u128 * q as u128);
            }
        }

        #[test]
        fn gamma_is_monotone(e in 40.0f64..60.0, d in 0.0f64..5.0) {
            let a = gamma(10.0, 2f64.powf(e), Rational::new(1, 128), 1, Mode::Paper).unwrap();
            let b = gamma(10.0, 2f64.powf(e + d), Rational::new(1, 128), 1, Mode::Paper).unwrap();
            prop_assert!(a.walk.unwrap().t <= b.walk.unwrap().t);
        }
    }
}
