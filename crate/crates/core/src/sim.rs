//! Seeded, order-independent Monte Carlo trials.
//!
//! Trial `t` of a run with master seed `seed` draws from ChaCha20 keyed by
//! `seed_from_u64(seed)` on stream `t`. Each trial owns its stream, so the
//! result of a run does not depend on how trials are scheduled across threads.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::fields::check_unit;

/// Identifier of the per-trial generator, embedded in every report.
pub const RNG_ID: &str = "chacha20/seed_from_u64(seed)/stream=trial";

/// Two-sided 95% normal quantile used for Wilson intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

pub type TrialRng = ChaCha20Rng;

/// The generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Bernoulli sampler comparing a 64-bit uniform against `floor(p * 2^64)`.
///
/// `p = 1` maps to `2^64`, so it always fires; the sampled probability is
/// within `2^-64` of `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bernoulli {
    threshold: u128,
}

impl Bernoulli {
    pub fn new(p: &BigRational) -> Result<Self> {
        check_unit(p)?;
        let scaled = (p * BigRational::from_integer(BigInt::one() << 64)).floor();
        Ok(Bernoulli {
            threshold: scaled.to_integer().to_u128().expect("p <= 1"),
        })
    }

    #[inline]
    pub fn fires(&self, uniform: u64) -> bool {
        (uniform as u128) < self.threshold
    }

    #[inline]
    pub fn sample(&self, rng: &mut impl RngCore) -> bool {
        self.fires(rng.next_u64())
    }
}

/// Positions `0..n` that fire, drawing one uniform per position in order.
pub fn sample_subset(n: usize, p: &Bernoulli, rng: &mut impl RngCore) -> Vec<usize> {
    (0..n).filter(|_| p.sample(rng)).collect()
}

/// Wilson score interval at 95% for `events` out of `trials`.
pub fn wilson_interval(events: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = events as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if events == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if events == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// A Monte Carlo proportion with its Wilson interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub trials: u64,
    pub events: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
    pub rng_id: &'static str,
}

impl TrialReport {
    pub fn new(events: u64, trials: u64, seed: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(events, trials);
        TrialReport {
            trials,
            events,
            p_hat: if trials == 0 {
                0.0
            } else {
                events as f64 / trials as f64
            },
            ci_lo,
            ci_hi,
            seed,
            rng_id: RNG_ID,
        }
    }

    /// Larger of the two distances from the estimate to the interval ends.
    pub fn half_width(&self) -> f64 {
        (self.p_hat - self.ci_lo).max(self.ci_hi - self.p_hat)
    }
}

/// Runs `f(trial)` for every trial and returns the results in trial order.
///
/// `threads = None` uses the global rayon pool; `Some(k)` a dedicated pool of
/// `k` workers. The output is identical for every choice.
pub fn run_trials<T, F>(trials: u64, threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let work = || (0..trials).into_par_iter().map(&f).collect();
    match threads {
        None => work(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .expect("thread pool")
            .install(work),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| trial_rng(9, 3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(trial_rng(9, 3).next_u64(), trial_rng(9, 4).next_u64());
        assert_ne!(trial_rng(9, 3).next_u64(), trial_rng(10, 3).next_u64());
    }

    #[test]
    fn bernoulli_extremes() {
        let never = Bernoulli::new(&q(0, 1)).unwrap();
        let always = Bernoulli::new(&q(1, 1)).unwrap();
        for u in [0, 1, u64::MAX] {
            assert!(!never.fires(u));
            assert!(always.fires(u));
        }
        let half = Bernoulli::new(&q(1, 2)).unwrap();
        assert!(half.fires((1 << 63) - 1));
        assert!(!half.fires(1 << 63));
        assert!(Bernoulli::new(&q(3, 2)).is_err());
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        let (lo, hi) = wilson_interval(0, 1000);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);
        let (lo, hi) = wilson_interval(1000, 1000);
        assert!(lo > 0.99 && (hi - 1.0).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn run_trials_is_thread_count_invariant() {
        let f = |t: u64| trial_rng(5, t).next_u64();
        let one = run_trials(200, Some(1), f);
        let four = run_trials(200, Some(4), f);
        assert_eq!(one, four);
        assert_eq!(one, run_trials(200, None, f));
    }
}
