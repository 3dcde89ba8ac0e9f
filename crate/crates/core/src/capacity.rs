//! Closed-form capacity and achievable-rate evaluators.
//!
//! Every evaluator is total: instead of refusing parameters outside the
//! regime where a formula is proven, it returns the formula's value with a
//! [`Regime`] flag and a textual report of the checked inequalities. Logs are
//! base 2 and `β = L / log2 M`.

use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::SamplingSpec;
use crate::scalar::Real;

/// Tail mass at which capacity series over the draw-count law stop.
pub const CAPACITY_SERIES_TAIL: f64 = 1e-9;

/// Absolute tolerance of the scalar root finder.
pub const ROOT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Proven,
    Zero,
    Conjectured,
    OutsideProvenRegime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult<T> {
    pub rate: T,
    pub regime: Regime,
    pub conditions: String,
}

impl<T: Real> CapacityResult<T> {
    fn new(rate: T, regime: Regime, conditions: String) -> Self {
        let rate = if regime == Regime::Zero { T::zero() } else { rate.positive_part() };
        CapacityResult { rate, regime, conditions }
    }

    fn zero(conditions: String) -> Self {
        CapacityResult { rate: T::zero(), regime: Regime::Zero, conditions }
    }
}

/// Storage rate (bits per synthesised base) and recovery rate (bits per
/// sequenced base).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePair<T> {
    pub storage: T,
    pub recovery: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Bsc,
    Bec,
}

fn two<T: Real>() -> T {
    T::lit(2.0)
}

/// `H(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy<T: Real>(p: T) -> Result<T> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::Domain(format!("entropy argument {p} outside [0,1]")));
    }
    Ok(h2(p))
}

fn h2<T: Real>(p: T) -> T {
    let term = |x: T| if x > T::zero() { -x * x.log2() } else { T::zero() };
    term(p) + term(T::one() - p)
}

/// Number of multisets of size `b` over `a` symbols, `C(a+b-1, b)`, exactly.
pub fn count_multisets(a: u64, b: u64) -> BigUint {
    assert!(a >= 1, "need at least one symbol");
    // C(a+b-1, b) = prod_{i=1..b} (a-1+i)/i, exact at every step
    let mut acc = BigUint::from(1u32);
    for i in 1..=b {
        acc *= BigUint::from(a - 1 + i);
        acc /= BigUint::from(i);
    }
    acc
}

/// Noise-free shuffling-sampling channel: `(1-q0)(1-1/β)` for `β > 1`, zero otherwise.
pub fn cap_noise_free<T: Real>(q0: T, beta: T) -> CapacityResult<T> {
    let mut c = String::new();
    let _ = write!(c, "beta={beta} > 1: {}", beta > T::one());
    if beta <= T::one() {
        return CapacityResult::zero(c);
    }
    CapacityResult::new((T::one() - q0) * (T::one() - beta.recip()), Regime::Proven, c)
}

/// BSC shuffling-sampling channel with single draws.
pub fn cap_bsc<T: Real>(q: T, p: T, beta: T) -> CapacityResult<T> {
    let cond = T::one() - h2(two::<T>() * p) - two::<T>() / beta;
    let proven = p < T::lit(0.25) && cond > T::zero();
    let c = format!(
        "beta={beta} > 1: {}; p={p} < 1/4: {}; 1-H(2p)-2/beta={cond} > 0: {}",
        beta > T::one(),
        p < T::lit(0.25),
        cond > T::zero()
    );
    if beta <= T::one() {
        return CapacityResult::zero(c);
    }
    let rate = (T::one() - q) * (T::one() - h2(p) - beta.recip()).positive_part();
    CapacityResult::new(rate, if proven { Regime::Proven } else { Regime::OutsideProvenRegime }, c)
}

/// BEC shuffling-sampling channel with single draws.
pub fn cap_bec<T: Real>(q: T, p: T, beta: T) -> CapacityResult<T> {
    let cond = T::one() - two::<T>() * p - two::<T>() / beta;
    let c = format!("beta={beta} > 1: {}; 1-2p-2/beta={cond} > 0: {}", beta > T::one(), cond > T::zero());
    if beta <= T::one() {
        return CapacityResult::zero(c);
    }
    let rate = (T::one() - q) * (T::one() - p - beta.recip()).positive_part();
    CapacityResult::new(rate, if cond > T::zero() { Regime::Proven } else { Regime::OutsideProvenRegime }, c)
}

/// Capacity of a BSC(p) observed through `n` independent draws:
/// `1 + Σ_k C(n,k) p^k (1-p)^(n-k) log2 1/(1 + p^(n-2k) (1-p)^(2k-n))`.
pub fn multi_draw_bsc_capacity<T: Real>(p: T, n: u32) -> T {
    let half = T::lit(0.5);
    if p >= half {
        // p = 1/2 carries nothing; p > 1/2 mirrors p' = 1 - p
        return if p == half { T::zero() } else { multi_draw_bsc_capacity(T::one() - p, n) };
    }
    if p <= T::zero() || n == 0 {
        return if n == 0 { T::zero() } else { T::one() };
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let ln_ratio = ln_p - ln_q; // ln(p/(1-p)) < 0
    let ln2 = T::LN_2();
    let mut ln_binom = T::zero();
    let mut total = T::one();
    let nn = T::from_u32(n).expect("u32 fits");
    for k in 0..=n {
        if k > 0 {
            ln_binom = ln_binom + (nn - T::from_u32(k - 1).expect("fits")).ln() - T::from_u32(k).expect("fits").ln();
        }
        let kk = T::from_u32(k).expect("fits");
        let weight = (ln_binom + kk * ln_p + (nn - kk) * ln_q).exp();
        // log2(1 + e^u) with u = (n-2k) ln(p/(1-p)), evaluated stably
        let u = (nn - two::<T>() * kk) * ln_ratio;
        let softplus = if u > T::zero() { u + (-u).exp().ln_1p() } else { u.exp().ln_1p() };
        total = total - weight * softplus / ln2;
    }
    total.max(T::zero()).min(T::one())
}

fn multi_draw_bec_capacity<T: Real>(p: T, n: u32) -> T {
    T::one() - p.powi(n as i32)
}

fn draw_capacity<T: Real>(kind: ChannelKind, p: T, n: u32) -> T {
    match kind {
        ChannelKind::Bsc => multi_draw_bsc_capacity(p, n),
        ChannelKind::Bec => multi_draw_bec_capacity(p, n),
    }
}

/// `Σ_{n≥1} q_n C_n`, truncated once the remaining mass is below the
/// capacity-series tail (every `C_n ≤ 1`, so this bounds the error).
fn expected_draw_capacity<T: Real>(sampling: &SamplingSpec<T>, kind: ChannelKind, p: T) -> T {
    let mut sum = T::zero();
    sampling.for_each_mass(T::lit(CAPACITY_SERIES_TAIL), |n, q| {
        if n >= 1 && q > T::zero() {
            sum = sum + q * draw_capacity(kind, p, n as u32);
        }
    });
    sum
}

/// BEC multi-draw channel: `(1-q0)(1-p_eff-1/β)⁺`.
pub fn cap_multi_bec<T: Real>(sampling: &SamplingSpec<T>, p: T, beta: T) -> Result<CapacityResult<T>> {
    sampling.validate()?;
    let q0 = sampling.q0();
    let cond = T::one() - two::<T>() * p - two::<T>() / beta;
    let c = format!(
        "q0={q0}; beta={beta} > 1: {}; 1-2p-2/beta={cond} > 0: {}",
        beta > T::one(),
        cond > T::zero()
    );
    if q0 >= T::one() || beta <= T::one() {
        return Ok(CapacityResult::zero(c));
    }
    let p_eff = sampling.effective_erasure(p)?;
    let rate = (T::one() - q0) * (T::one() - p_eff - beta.recip()).positive_part();
    Ok(CapacityResult::new(rate, if cond > T::zero() { Regime::Proven } else { Regime::OutsideProvenRegime }, c))
}

/// Closed form of the BEC multi-draw capacity under Poisson(λ) sampling:
/// `(1 - e^{-λ(1-p)} - (1-e^{-λ})/β)⁺`.
pub fn cap_multi_bec_poisson_closed<T: Real>(lambda: T, p: T, beta: T) -> T {
    (T::one() - (-lambda * (T::one() - p)).exp() - (T::one() - (-lambda).exp()) / beta).positive_part()
}

/// BSC multi-draw channel: `(Σ_{n≥1} q_n C_{p,n} - (1-q0)/β)⁺`. Proven for
/// Poisson sampling when `p < 1/8` and `1-H(4p)-2/β > 0`; for laws supported
/// on `{0,1}` the single-draw conditions apply; otherwise conjectured.
pub fn cap_multi_bsc<T: Real>(sampling: &SamplingSpec<T>, p: T, beta: T) -> Result<CapacityResult<T>> {
    sampling.validate()?;
    if !(p >= T::zero() && p < T::lit(0.5)) {
        return Err(Error::Domain(format!("crossover probability {p} outside [0, 1/2)")));
    }
    let q0 = sampling.q0();
    if beta <= T::one() || q0 >= T::one() {
        return Ok(CapacityResult::zero(format!("q0={q0}; beta={beta} > 1: {}", beta > T::one())));
    }
    let rate = expected_draw_capacity(sampling, ChannelKind::Bsc, p) - (T::one() - q0) / beta;
    let single_draw = sampling.max_support().is_some_and(|m| m <= 1);
    let (regime, c) = if single_draw {
        let r = cap_bsc(q0, p, beta);
        (r.regime, r.conditions)
    } else if matches!(sampling, SamplingSpec::Poisson { .. }) {
        let cond = T::one() - h2(T::lit(4.0) * p) - two::<T>() / beta;
        let proven = p < T::lit(0.125) && cond > T::zero();
        (
            if proven { Regime::Proven } else { Regime::OutsideProvenRegime },
            format!("p={p} < 1/8: {}; 1-H(4p)-2/beta={cond} > 0: {}", p < T::lit(0.125), cond > T::zero()),
        )
    } else {
        (Regime::Conjectured, "general sampling law: unified multi-draw expression".to_string())
    };
    Ok(CapacityResult::new(rate, regime, c))
}

/// Parameters of one torn-paper channel family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TornCase<T> {
    /// Geometric tearing, `β = 1/(p_n log n)`, no deletions.
    Geometric { beta: T },
    /// Geometric tearing with constant deletion profile `ε`.
    GeometricConst { beta: T, eps: T },
    /// Geometric tearing with deletion profile `e^{-γ ξ}`.
    GeometricExp { beta: T, gamma: T },
    /// Lengths uniform on `[0, γ log n]`.
    Uniform { gamma: T },
    /// Deterministic length `ℓ_n = β log n`.
    Fixed { beta: T },
}

pub fn cap_torn<T: Real>(case: TornCase<T>) -> Result<CapacityResult<T>> {
    let proven = |rate: T, c: String| Ok(CapacityResult::new(rate, Regime::Proven, c));
    match case {
        TornCase::Geometric { beta } => proven((-beta.recip()).exp(), format!("geometric, beta={beta}")),
        TornCase::GeometricConst { beta, eps } => {
            proven((T::one() - eps) * (-beta.recip()).exp(), format!("geometric, beta={beta}, const deletion {eps}"))
        }
        TornCase::GeometricExp { beta, gamma } => {
            let inv = beta.recip();
            let denom = (inv + gamma) * (inv + gamma);
            let rate = (-inv).exp() * (T::one() - inv * inv * (-gamma).exp() / denom);
            proven(rate, format!("geometric, beta={beta}, exp deletion rate {gamma}"))
        }
        TornCase::Uniform { gamma } => {
            if gamma < T::one() {
                return Err(Error::Domain(format!("uniform tearing needs gamma >= 1, got {gamma}")));
            }
            let f = (gamma - T::one()) / gamma;
            proven(f * f, format!("uniform on [0, {gamma} log n]"))
        }
        TornCase::Fixed { beta } => {
            let r = cap_noise_free(T::zero(), beta);
            Ok(CapacityResult { conditions: format!("fixed length, {}", r.conditions), ..r })
        }
    }
}

/// Achievable `(R_s, R_r)` at Poisson coverage depth `λ`.
pub fn tradeoff_region<T: Real>(lambda: T, beta: T) -> RatePair<T> {
    if beta <= T::one() {
        return RatePair { storage: T::zero(), recovery: T::zero() };
    }
    let storage = (T::one() - (-lambda).exp()) * (T::one() - beta.recip());
    RatePair { storage, recovery: storage / lambda }
}

/// Bracketed bisection for an increasing-through-zero `f` on `[lo, hi]`.
pub fn bisect<T: Real>(mut lo: T, mut hi: T, tol: T, f: impl Fn(T) -> T) -> T {
    let f_lo = f(lo);
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) / two::<T>();
        let fm = f(mid);
        if (fm > T::zero()) == (f_lo > T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / two::<T>()
}

/// Coverage `λ*` minimising the synthesis+sequencing cost per bit
/// `(q+λ)/((1-e^{-λ})(1-1/β))`, where `q` is the synthesis/sequencing cost
/// ratio. Returns `(λ*, cost at λ*)`.
pub fn optimal_coverage<T: Real>(cost_ratio: T, beta: T) -> Result<(T, T)> {
    if cost_ratio < T::zero() {
        return Err(Error::Domain("cost ratio must be non-negative".into()));
    }
    if beta <= T::one() {
        return Err(Error::Domain("cost per bit is unbounded for beta <= 1".into()));
    }
    let shuffle = T::one() - beta.recip();
    if cost_ratio == T::zero() {
        // infimum approached as λ → 0
        return Ok((T::zero(), shuffle.recip()));
    }
    // stationarity: e^λ = 1 + q + λ
    let g = |l: T| l.exp() - T::one() - cost_ratio - l;
    let mut hi = T::one();
    while g(hi) <= T::zero() {
        hi = hi * two::<T>();
    }
    let lambda = bisect(T::zero(), hi, T::lit(ROOT_TOL), g);
    let cost = (cost_ratio + lambda) / ((T::one() - (-lambda).exp()) * shuffle);
    Ok((lambda, cost))
}

/// Rate of naive index-based coding over a multi-draw channel: the index is
/// protected for single draws, so it costs `γ/β` with `γ = E[C_N|N≥1]/C_1`.
pub fn index_rate_multidraw<T: Real>(sampling: &SamplingSpec<T>, p: T, beta: T, kind: ChannelKind) -> Result<T> {
    sampling.validate()?;
    let q0 = sampling.q0();
    let c1 = draw_capacity(kind, p, 1);
    if q0 >= T::one() || c1 <= T::zero() {
        return Ok(T::zero());
    }
    let conditional = expected_draw_capacity(sampling, kind, p) / (T::one() - q0);
    let gamma = conditional / c1;
    Ok(((T::one() - q0) * (conditional - gamma / beta)).positive_part())
}

/// Conjectured storage rate in the short-molecule regime `β < 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortMoleculeRate<T> {
    pub result: CapacityResult<T>,
    /// Approximate total stored bits `((1-β)/(2β)) M^β L` with `L = β log2 M`.
    pub total_bits: T,
}

pub fn short_molecule_rate<T: Real>(beta: T, m: T) -> Result<ShortMoleculeRate<T>> {
    if !(beta > T::zero() && beta < T::one()) {
        return Err(Error::Domain(format!("short-molecule regime needs beta in (0,1), got {beta}")));
    }
    if m < two::<T>() {
        return Err(Error::Domain("need at least two molecules".into()));
    }
    let factor = (T::one() - beta) / (two::<T>() * beta);
    let rate = factor * m.powf(beta - T::one());
    let l = beta * m.log2();
    Ok(ShortMoleculeRate {
        result: CapacityResult {
            rate,
            regime: Regime::Conjectured,
            conditions: format!("beta={beta} in (0,1); M={m}"),
        },
        total_bits: factor * m.powf(beta) * l,
    })
}

/// `γ = -β log2(1 - (1-p)²/2)`; the consistency-graph analysis needs `γ > 1`.
pub fn cluster_gamma<T: Real>(p: T, beta: T) -> T {
    let a = (T::one() - p) * (T::one() - p) / two::<T>();
    -beta * (T::one() - a).log2()
}

/// Index-based rate over a general alphabet, `(1-q0)(C_noisy - 1/β)⁺`.
/// Proven only for the noiseless binary and quaternary cases
/// (`C_noisy ∈ {1, 2}`); conjectured otherwise.
pub fn general_alphabet_rate<T: Real>(q0: T, beta: T, c_noisy: T) -> CapacityResult<T> {
    let rate = (T::one() - q0) * (c_noisy - beta.recip()).positive_part();
    let noiseless = c_noisy == T::one() || c_noisy == two::<T>();
    let c = format!("C_noisy={c_noisy}; beta={beta}");
    if noiseless && rate <= T::zero() {
        return CapacityResult::zero(c);
    }
    CapacityResult::new(rate, if noiseless { Regime::Proven } else { Regime::Conjectured }, c)
}

/// Smallest β at which the single-draw BSC capacity is proven, `2/(1-H(2p))`
/// (`∞` once `p ≥ 1/4` or the denominator vanishes).
pub fn bsc_proven_boundary<T: Real>(p: T) -> T {
    let d = T::one() - h2(two::<T>() * p.min(T::lit(0.5)));
    if p >= T::lit(0.25) || d <= T::zero() {
        T::infinity()
    } else {
        two::<T>() / d
    }
}

/// Smallest β at which the index scheme has positive BSC rate, `1/(1-H(p))`.
pub fn bsc_positive_boundary<T: Real>(p: T) -> T {
    let d = T::one() - h2(p);
    if d <= T::zero() {
        T::infinity()
    } else {
        d.recip()
    }
}

/// Outer-bound condition of the multi-draw BEC capacity: `β > 1/(1/2-p)`.
pub fn bec_multi_proven_boundary<T: Real>(p: T) -> T {
    let d = T::lit(0.5) - p;
    if d <= T::zero() {
        T::infinity()
    } else {
        d.recip()
    }
}

/// Inner-bound condition of the linear scheme: β at which `cluster_gamma = 1`.
pub fn cluster_gamma_boundary<T: Real>(p: T) -> T {
    let g = cluster_gamma(p, T::one());
    if g <= T::zero() {
        T::infinity()
    } else {
        g.recip()
    }
}
