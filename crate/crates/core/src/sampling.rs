//! The draw-count law `Q` of the sampling stage: how many times each stored
//! sequence shows up at the output.
//!
//! Parameterisations:
//! - `NegBinomial { r, s }` has mass `C(n+r-1, n) (1-s)^r s^n`.
//! - `PoissonPcr { alpha, lambda }` draws an amplification count
//!   `A ~ Poisson(alpha)` and then `N ~ Poisson(lambda * A / alpha)`.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative tail mass at which series accessors stop summing.
pub const SERIES_TAIL: f64 = 1e-12;

const EMPIRICAL_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplingSpec<T> {
    /// One draw with probability `1 - q`, none otherwise.
    SingleDraw { q: T },
    Poisson { lambda: T },
    Fixed { n: u32 },
    NegBinomial { r: T, s: T },
    /// `weights[n]` is the probability of exactly `n` draws.
    Empirical { weights: Vec<T> },
    PoissonPcr { alpha: T, lambda: T },
}

/// Per-sequence draw counts `N_1..N_M` of one channel use.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawCounts {
    pub counts: Vec<u32>,
    pub total: u64,
}

impl DrawCounts {
    pub fn new(counts: Vec<u32>) -> Self {
        let total = counts.iter().map(|&c| c as u64).sum();
        DrawCounts { counts, total }
    }

    /// Fraction of inputs drawn at least once.
    pub fn seen_fraction(&self) -> f64 {
        if self.counts.is_empty() {
            return 0.0;
        }
        self.counts.iter().filter(|&&c| c > 0).count() as f64 / self.counts.len() as f64
    }
}

fn poisson_pmf<T: Real>(lambda: T, n: usize) -> T {
    if lambda == T::zero() {
        return if n == 0 { T::one() } else { T::zero() };
    }
    // log-domain keeps large n finite
    let mut log = -lambda + T::from_usize_lossy(n) * lambda.ln();
    for k in 2..=n {
        log = log - T::from_usize_lossy(k).ln();
    }
    log.exp()
}

impl<T: Real> SamplingSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, x: T| {
            if x >= T::zero() && x <= T::one() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name}={x} outside [0,1]")))
            }
        };
        let positive = |name: &str, x: T| {
            if x > T::zero() && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name}={x} must be positive and finite")))
            }
        };
        match self {
            SamplingSpec::SingleDraw { q } => unit("q", *q),
            SamplingSpec::Poisson { lambda } => positive("lambda", *lambda),
            SamplingSpec::Fixed { .. } => Ok(()),
            SamplingSpec::NegBinomial { r, s } => {
                positive("r", *r)?;
                if *s > T::zero() && *s < T::one() {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("s={s} outside (0,1)")))
                }
            }
            SamplingSpec::Empirical { weights } => {
                if weights.is_empty() {
                    return Err(Error::Domain("empty empirical law".into()));
                }
                if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
                    return Err(Error::Domain("empirical weights must be finite and non-negative".into()));
                }
                let sum = weights.iter().fold(T::zero(), |a, &w| a + w);
                if (sum - T::one()).abs().to_f64_lossy() > EMPIRICAL_SUM_TOL.max(T::epsilon().to_f64_lossy() * 16.0) {
                    return Err(Error::Domain(format!("empirical weights sum to {sum}, not 1")));
                }
                Ok(())
            }
            SamplingSpec::PoissonPcr { alpha, lambda } => {
                positive("alpha", *alpha)?;
                positive("lambda", *lambda)
            }
        }
    }

    /// Largest count with non-zero mass, if the support is finite.
    pub fn max_support(&self) -> Option<usize> {
        match self {
            SamplingSpec::SingleDraw { .. } => Some(1),
            SamplingSpec::Fixed { n } => Some(*n as usize),
            SamplingSpec::Empirical { weights } => {
                Some(weights.iter().rposition(|w| *w > T::zero()).unwrap_or(0))
            }
            _ => None,
        }
    }

    /// Probability of exactly `n` draws.
    pub fn pmf(&self, n: usize) -> T {
        match self {
            SamplingSpec::SingleDraw { q } => match n {
                0 => *q,
                1 => T::one() - *q,
                _ => T::zero(),
            },
            SamplingSpec::Poisson { lambda } => poisson_pmf(*lambda, n),
            SamplingSpec::Fixed { n: fixed } => {
                if n == *fixed as usize {
                    T::one()
                } else {
                    T::zero()
                }
            }
            SamplingSpec::NegBinomial { r, s } => {
                // C(n+r-1, n) = prod_{k=1..n} (r+k-1)/k
                let mut log = *r * (T::one() - *s).ln();
                if n > 0 {
                    log = log + T::from_usize_lossy(n) * s.ln();
                }
                for k in 1..=n {
                    let kk = T::from_usize_lossy(k);
                    log = log + (*r + kk - T::one()).ln() - kk.ln();
                }
                log.exp()
            }
            SamplingSpec::Empirical { weights } => weights.get(n).copied().unwrap_or_else(T::zero),
            SamplingSpec::PoissonPcr { alpha, lambda } => {
                // sum over amplification counts a, stopping once Poisson(alpha) tail is negligible
                let mut total = if n == 0 { poisson_pmf(*alpha, 0) } else { T::zero() };
                let mut mass = poisson_pmf(*alpha, 0);
                let mut a = 1usize;
                while T::one() - mass > T::lit(1e-16) && a < 100_000 {
                    let pa = poisson_pmf(*alpha, a);
                    mass = mass + pa;
                    let rate = *lambda * T::from_usize_lossy(a) / *alpha;
                    total = total + pa * poisson_pmf(rate, n);
                    a += 1;
                    if pa == T::zero() && T::from_usize_lossy(a) > *alpha {
                        break;
                    }
                }
                total
            }
        }
    }

    /// Mass at zero: the expected fraction of inputs never seen.
    pub fn q0(&self) -> T {
        match self {
            SamplingSpec::SingleDraw { q } => *q,
            SamplingSpec::Poisson { lambda } => (-*lambda).exp(),
            SamplingSpec::Fixed { n } => {
                if *n == 0 {
                    T::one()
                } else {
                    T::zero()
                }
            }
            SamplingSpec::NegBinomial { r, s } => (*r * (T::one() - *s).ln()).exp(),
            SamplingSpec::Empirical { weights } => weights[0],
            SamplingSpec::PoissonPcr { alpha, lambda } => {
                (-*alpha * (T::one() - (-*lambda / *alpha).exp())).exp()
            }
        }
    }

    /// `(E[N], E[N^2])`.
    pub fn moments(&self) -> (T, T) {
        match self {
            SamplingSpec::SingleDraw { q } => (T::one() - *q, T::one() - *q),
            SamplingSpec::Poisson { lambda } => (*lambda, *lambda + *lambda * *lambda),
            SamplingSpec::Fixed { n } => {
                let n = T::from_u32(*n).expect("u32 fits");
                (n, n * n)
            }
            SamplingSpec::NegBinomial { r, s } => {
                let one_minus = T::one() - *s;
                let mean = *r * *s / one_minus;
                let var = mean / one_minus;
                (mean, var + mean * mean)
            }
            SamplingSpec::Empirical { weights } => {
                weights.iter().enumerate().fold((T::zero(), T::zero()), |(m1, m2), (n, &w)| {
                    let n = T::from_usize_lossy(n);
                    (m1 + w * n, m2 + w * n * n)
                })
            }
            SamplingSpec::PoissonPcr { alpha, lambda } => {
                let l2 = *lambda * *lambda;
                (*lambda, *lambda + l2 + l2 / *alpha)
            }
        }
    }

    /// Calls `f(n, q_n)` for `n = 0, 1, ...` until the accumulated mass
    /// reaches `1 - tail` (or the finite support ends).
    pub fn for_each_mass(&self, tail: T, mut f: impl FnMut(usize, T)) {
        if let Some(max) = self.max_support() {
            for n in 0..=max {
                f(n, self.pmf(n));
            }
            return;
        }
        let mut mass = T::zero();
        let mut n = 0usize;
        let (mean, m2) = self.moments();
        let sd = (m2 - mean * mean).positive_part().sqrt();
        // hard stop far beyond any sensible tail
        let hard = (mean + T::lit(60.0) * sd + T::lit(200.0)).to_f64_lossy() as usize;
        while T::one() - mass > tail && n <= hard {
            let q = self.pmf(n);
            mass = mass + q;
            f(n, q);
            n += 1;
        }
    }

    /// `E[p^N | N >= 1]`, the erasure rate left after merging every copy of a
    /// sequence. Closed forms are used where the generating function is known.
    pub fn effective_erasure(&self, p: T) -> Result<T> {
        check_unit("p", p)?;
        let q0 = self.q0();
        if q0 >= T::one() {
            return Err(Error::UndefinedConditional("q0 = 1, no sequence is ever drawn".into()));
        }
        let pgf = match self {
            SamplingSpec::Poisson { lambda } => Some((-*lambda * (T::one() - p)).exp()),
            SamplingSpec::PoissonPcr { alpha, lambda } => {
                let inner = (-*lambda * (T::one() - p) / *alpha).exp();
                Some((*alpha * (inner - T::one())).exp())
            }
            SamplingSpec::NegBinomial { r, s } => {
                Some(((T::one() - *s) / (T::one() - *s * p)).powf(*r))
            }
            _ => None,
        };
        match pgf {
            Some(g) => Ok(((g - q0) / (T::one() - q0)).max(T::zero()).min(T::one())),
            None => self.effective_erasure_series(p),
        }
    }

    /// Series evaluation of [`Self::effective_erasure`], truncated at relative
    /// tail mass [`SERIES_TAIL`].
    pub fn effective_erasure_series(&self, p: T) -> Result<T> {
        check_unit("p", p)?;
        let q0 = self.q0();
        if q0 >= T::one() {
            return Err(Error::UndefinedConditional("q0 = 1, no sequence is ever drawn".into()));
        }
        let mut num = T::zero();
        let mut den = T::zero();
        self.for_each_mass(T::lit(SERIES_TAIL), |n, q| {
            if n >= 1 {
                num = num + q * p.powi(n as i32);
                den = den + q;
            }
        });
        Ok(num / den)
    }

    /// `M` independent draws from the law.
    pub fn sample_counts<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<DrawCounts> {
        self.validate()?;
        let sampler = Sampler::new(self)?;
        Ok(DrawCounts::new((0..m).map(|_| sampler.draw(rng)).collect()))
    }

    /// Converts the parameters to another scalar type.
    pub fn cast<U: Real>(&self) -> SamplingSpec<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        match self {
            SamplingSpec::SingleDraw { q } => SamplingSpec::SingleDraw { q: c(*q) },
            SamplingSpec::Poisson { lambda } => SamplingSpec::Poisson { lambda: c(*lambda) },
            SamplingSpec::Fixed { n } => SamplingSpec::Fixed { n: *n },
            SamplingSpec::NegBinomial { r, s } => SamplingSpec::NegBinomial { r: c(*r), s: c(*s) },
            SamplingSpec::Empirical { weights } => {
                SamplingSpec::Empirical { weights: weights.iter().map(|&w| c(w)).collect() }
            }
            SamplingSpec::PoissonPcr { alpha, lambda } => {
                SamplingSpec::PoissonPcr { alpha: c(*alpha), lambda: c(*lambda) }
            }
        }
    }
}

fn check_unit<T: Real>(name: &str, x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name}={x} outside [0,1]")))
    }
}

/// Exact samplers for each law; infinite-support laws are never truncated.
enum Sampler {
    Bernoulli(f64),
    Poisson(Poisson<f64>),
    Fixed(u32),
    GammaPoisson(Gamma<f64>),
    Weighted(WeightedIndex<f64>),
    Pcr { amp: Poisson<f64>, ratio: f64 },
}

impl Sampler {
    fn new<T: Real>(spec: &SamplingSpec<T>) -> Result<Self> {
        let f = |x: T| x.to_f64_lossy();
        let bad = |e: &dyn std::fmt::Display| Error::Domain(e.to_string());
        Ok(match spec {
            SamplingSpec::SingleDraw { q } => Sampler::Bernoulli(1.0 - f(*q)),
            SamplingSpec::Poisson { lambda } => Sampler::Poisson(Poisson::new(f(*lambda)).map_err(|e| bad(&e))?),
            SamplingSpec::Fixed { n } => Sampler::Fixed(*n),
            SamplingSpec::NegBinomial { r, s } => {
                let (r, s) = (f(*r), f(*s));
                Sampler::GammaPoisson(Gamma::new(r, s / (1.0 - s)).map_err(|e| bad(&e))?)
            }
            SamplingSpec::Empirical { weights } => Sampler::Weighted(
                WeightedIndex::new(weights.iter().map(|&w| f(w))).map_err(|e| bad(&e))?,
            ),
            SamplingSpec::PoissonPcr { alpha, lambda } => Sampler::Pcr {
                amp: Poisson::new(f(*alpha)).map_err(|e| bad(&e))?,
                ratio: f(*lambda) / f(*alpha),
            },
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        fn poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u32 {
            if rate <= 0.0 {
                return 0;
            }
            Poisson::new(rate).expect("positive rate").sample(rng) as u32
        }
        match self {
            Sampler::Bernoulli(p) => rng.random_bool(p.clamp(0.0, 1.0)) as u32,
            Sampler::Poisson(d) => d.sample(rng) as u32,
            Sampler::Fixed(n) => *n,
            Sampler::GammaPoisson(g) => poisson(g.sample(rng), rng),
            Sampler::Weighted(w) => w.sample(rng) as u32,
            Sampler::Pcr { amp, ratio } => {
                let a = amp.sample(rng);
                poisson(a * ratio, rng)
            }
        }
    }
}

/// Reads an empirical law: one weight per line, line index = draw count.
/// Weights are normalised to sum to one.
pub fn load_empirical(path: impl AsRef<Path>) -> Result<SamplingSpec<f64>> {
    let text = fs::read_to_string(path)?;
    parse_empirical_weights(text.lines().filter(|l| !l.trim().is_empty()))
}

fn parse_empirical_weights<'a>(items: impl Iterator<Item = &'a str>) -> Result<SamplingSpec<f64>> {
    let raw = items
        .map(|l| l.trim().parse::<f64>().map_err(|e| Error::Parse(format!("weight '{l}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let sum: f64 = raw.iter().sum();
    if sum.is_nan() || sum <= 0.0 {
        return Err(Error::Domain("empirical weights must have positive sum".into()));
    }
    let spec = SamplingSpec::Empirical { weights: raw.iter().map(|w| w / sum).collect() };
    spec.validate()?;
    Ok(spec)
}

impl FromStr for SamplingSpec<f64> {
    type Err = Error;

    /// Compact forms: `single:0.1`, `poisson:2`, `fixed:1`, `negbin:3,0.4`,
    /// `pcr:2,2` (alpha, lambda), `empirical:0.5,0,0.5` or `empirical:@file`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = |n: usize| -> Result<Vec<f64>> {
            let v = args
                .split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|e| Error::Parse(format!("'{a}' in '{s}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != n {
                return Err(Error::Parse(format!("'{s}' expects {n} parameter(s)")));
            }
            Ok(v)
        };
        let spec = match kind.to_ascii_lowercase().as_str() {
            "single" | "singledraw" | "bernoulli" => SamplingSpec::SingleDraw { q: nums(1)?[0] },
            "poisson" => SamplingSpec::Poisson { lambda: nums(1)?[0] },
            "fixed" => {
                let n = args.trim().parse::<u32>().map_err(|e| Error::Parse(format!("'{s}': {e}")))?;
                SamplingSpec::Fixed { n }
            }
            "negbin" | "negbinomial" => {
                let v = nums(2)?;
                SamplingSpec::NegBinomial { r: v[0], s: v[1] }
            }
            "pcr" | "poissonpcr" => {
                let v = nums(2)?;
                SamplingSpec::PoissonPcr { alpha: v[0], lambda: v[1] }
            }
            "empirical" => match args.strip_prefix('@') {
                Some(path) => return load_empirical(path),
                None => return parse_empirical_weights(args.split(',')),
            },
            other => return Err(Error::Parse(format!("unknown sampling law '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}
