//! Special functions and the exact per-user tail probabilities
//! `Pr(r_u <= k)` under each sampling scheme, plus the population
//! concentration bound.
//!
//! Tail sums are evaluated in log space with one exponentiation per
//! term and compensated accumulation; naive products underflow long
//! before `n = 1000`, and binomial coefficients go through `log_gamma`
//! rather than factorial tables because `N` can reach the 10^5 range.

use crate::profile::{CatalogSpec, KahanSum};
use crate::{Error, Result};

/// Natural log of the Gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// Natural log of the Beta function `B(a, b)` for `a, b > 0`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Beta function `B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)`.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    Ok(ln_beta(a, b)?.exp())
}

/// Table of `ln(i!)` for `i = 0..=max`, so that `ln C(n, k)` costs three
/// lookups inside the per-rank curve loops.
#[derive(Debug, Clone)]
pub(crate) struct LogCombTable {
    ln_fact: Vec<f64>,
}

impl LogCombTable {
    pub(crate) fn new(max: usize) -> Self {
        let mut ln_fact = Vec::with_capacity(max + 1);
        for i in 0..=max {
            // ln Gamma(i + 1) = ln(i!)
            ln_fact.push(statrs::function::gamma::ln_gamma(i as f64 + 1.0));
        }
        LogCombTable { ln_fact }
    }

    pub(crate) fn ln_choose(&self, n: usize, k: usize) -> f64 {
        debug_assert!(k <= n && n < self.ln_fact.len());
        self.ln_fact[n] - self.ln_fact[k] - self.ln_fact[n - k]
    }
}

fn validate_cutoff_and_rank(k: usize, rank: usize, catalog: &CatalogSpec) -> Result<()> {
    let n = catalog.sample_size();
    let total = catalog.total_items();
    if k < 1 || k > n {
        return Err(Error::Domain(format!(
            "cutoff k={k} outside [1, {n}]"
        )));
    }
    if rank < 1 || rank > total {
        return Err(Error::Domain(format!(
            "rank R={rank} outside [1, {total}]"
        )));
    }
    Ok(())
}

/// `Pr(r_u <= k)` under sampling with replacement: the Binomial(n-1,
/// (R-1)/(N-1)) CDF at `k - 1`, overridden to 1 whenever `R < k`.
pub fn binom_tail_prob(k: usize, rank: usize, catalog: &CatalogSpec) -> Result<f64> {
    validate_cutoff_and_rank(k, rank, catalog)?;
    let n = catalog.sample_size();
    let total = catalog.total_items();
    if rank < k {
        return Ok(1.0);
    }
    let draws = n - 1;
    let p = (rank - 1) as f64 / (total - 1) as f64;
    if p == 0.0 {
        return Ok(1.0); // zero successes surely, r_u = 1
    }
    if p == 1.0 {
        // every draw outranks the target, r_u = n surely
        return Ok(if k >= n { 1.0 } else { 0.0 });
    }
    let table = LogCombTable::new(draws);
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut sum = KahanSum::default();
    for successes in 0..k {
        let ln_term = table.ln_choose(draws, successes)
            + successes as f64 * ln_p
            + (draws - successes) as f64 * ln_q;
        sum.add(ln_term.exp());
    }
    Ok(sum.value().clamp(0.0, 1.0))
}

/// `Pr(r_u <= k)` under sampling without replacement: the
/// Hypergeometric(N-1, R-1, n-1) CDF at `k - 1`, overridden to 1
/// whenever `R < k`.
pub fn hyper_tail_prob(k: usize, rank: usize, catalog: &CatalogSpec) -> Result<f64> {
    validate_cutoff_and_rank(k, rank, catalog)?;
    let n = catalog.sample_size();
    let total = catalog.total_items();
    if rank < k || k == n {
        return Ok(1.0);
    }
    let draws = n - 1;
    let above = rank - 1; // items that outrank the target
    let below = total - rank;
    let table = LogCombTable::new(total);
    let ln_denom = table.ln_choose(total - 1, draws);
    let lo = draws.saturating_sub(below);
    let hi = above.min(k - 1);
    let mut sum = KahanSum::default();
    for successes in lo..=hi {
        let ln_term = table.ln_choose(above, successes)
            + table.ln_choose(below, draws - successes)
            - ln_denom;
        sum.add(ln_term.exp());
    }
    Ok(sum.value().clamp(0.0, 1.0))
}

/// Per-user sampling probabilities: the per-draw chance of drawing an
/// item that outranks the target, and the tail `Pr(r_u <= k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeProbability {
    pub per_draw: f64,
    pub tail: f64,
}

impl SchemeProbability {
    pub fn with_replacement(k: usize, rank: usize, catalog: &CatalogSpec) -> Result<Self> {
        Ok(SchemeProbability {
            per_draw: (rank - 1) as f64 / (catalog.total_items() - 1) as f64,
            tail: binom_tail_prob(k, rank, catalog)?,
        })
    }

    pub fn without_replacement(k: usize, rank: usize, catalog: &CatalogSpec) -> Result<Self> {
        Ok(SchemeProbability {
            per_draw: (rank - 1) as f64 / (catalog.total_items() - 1) as f64,
            tail: hyper_tail_prob(k, rank, catalog)?,
        })
    }
}

/// Hoeffding bound on the deviation of a mean of `users` indicators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationBound {
    pub users: usize,
    pub threshold: f64,
    pub bound: f64,
}

/// `Pr(|SHR@k - E[SHR@k]| >= t) <= 2 exp(-2 M t^2)`.
pub fn hoeffding_population_bound(users: usize, threshold: f64) -> Result<ConcentrationBound> {
    if users < 1 {
        return Err(Error::Domain("user count must be at least 1".into()));
    }
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::Domain(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    Ok(ConcentrationBound {
        users,
        threshold,
        bound: 2.0 * (-2.0 * users as f64 * threshold * threshold).exp(),
    })
}
