//! Global and sampled hit-ratio curves: exact expectation and variance,
//! seeded Monte Carlo under three sampling schemes, and synthetic rank
//! generation from a Beta(a, 1) rank model.
//!
//! Determinism contract: every sampling result is a pure function of
//! (inputs, master seed), independent of execution order and thread
//! count. Per-user generators are derived as stream(master seed, user
//! index, run index), so parallel scheduling cannot reorder draws.

use rand::Rng;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::dist::LogCombTable;
use crate::profile::{
    CatalogSpec, HitRatioCurve, KahanSum, RankHistogram, RankProfile,
};
use crate::{Error, Result};

/// The deterministic per-user generator type.
pub type StreamRng = rand_chacha::ChaCha8Rng;

/// How the `n - 1` negatives are drawn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SamplingScheme {
    /// `binom`: draws with replacement from the `N - 1` non-target items.
    WithReplacement,
    /// `hyper`: a uniform (n-1)-subset of the `N - 1` non-target items.
    WithoutReplacement,
    /// `actual`: without replacement over only the items the user never
    /// interacted with; `per_user_catalog[u]` is that user's effective
    /// catalog size, aligned with the profile's user order.
    IrrelevantOnly { per_user_catalog: Vec<u32> },
}

impl SamplingScheme {
    pub fn label(&self) -> &'static str {
        match self {
            SamplingScheme::WithReplacement => "binom",
            SamplingScheme::WithoutReplacement => "hyper",
            SamplingScheme::IrrelevantOnly { .. } => "actual",
        }
    }
}

/// Seed and repetition count for Monte Carlo estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub seed: u64,
    pub runs: usize,
}

impl Default for MonteCarloConfig {
    // A single run matches common reporting practice; raise `runs` to
    // get standard errors.
    fn default() -> Self {
        MonteCarloConfig { seed: 0, runs: 1 }
    }
}

fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn derive_key(master: u64, domain: u64, user: u64, run: u64) -> [u8; 32] {
    let mut state = mix64(master ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(domain.wrapping_add(1)));
    state = mix64(state ^ 0xD1B5_4A32_D192_ED03u64.wrapping_mul(user.wrapping_add(1)));
    state = mix64(state ^ 0x8CB9_2BA7_2F3D_8DD7u64.wrapping_mul(run.wrapping_add(1)));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = mix64(state.wrapping_add(0x9E37_79B9_7F4A_7C15));
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// Generator for user `user_index` in repetition `run_index` of a
/// sampling experiment with the given master seed.
pub fn sampling_stream(master_seed: u64, user_index: u64, run_index: u64) -> StreamRng {
    StreamRng::from_seed(derive_key(master_seed, 0, user_index, run_index))
}

/// Generator for user `user_index` of a synthetic-profile draw. Kept in
/// a separate key domain so simulating ranks and then sampling them
/// with the same master seed never reuses a stream.
pub fn simulation_stream(master_seed: u64, user_index: u64) -> StreamRng {
    StreamRng::from_seed(derive_key(master_seed, 1, user_index, 0))
}

/// Deterministically derives a sub-seed, e.g. one per algorithm in a
/// multi-algorithm comparison.
pub fn mix_seed(master: u64, salt: u64) -> u64 {
    mix64(master ^ 0xA24B_AED4_963E_E407u64.wrapping_mul(salt.wrapping_add(1)))
}

/// Global hit-ratio curve: `HR@K = #{u : R_u <= K} / M` for `K = 1..=N`.
pub fn hr_curve(profile: &RankProfile) -> HitRatioCurve {
    let total = profile.total_items();
    let mut counts = vec![0u64; total];
    for &r in profile.ranks() {
        counts[r as usize - 1] += 1;
    }
    let m = profile.user_count() as f64;
    let mut values = Vec::with_capacity(total);
    let mut cum = 0u64;
    for c in counts {
        cum += c;
        values.push(cum as f64 / m);
    }
    HitRatioCurve::from_values(values).expect("cumulative counts form a valid curve")
}

/// Walks `Pr(r <= k), k = 1..=n` for every rank with positive mass.
/// The row is rebuilt in one O(n) pass per rank: an incremental
/// log-space PMF accumulated into a CDF, with the override to 1 when
/// the rank is inside the cutoff, and the terminal value pinned to 1.
fn visit_tail_rows<F>(
    hist: &RankHistogram,
    scheme: &SamplingScheme,
    catalog: &CatalogSpec,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, f64, &[f64]),
{
    if hist.total_items() != catalog.total_items() {
        return Err(Error::Config(format!(
            "histogram covers {} items but catalog has {}",
            hist.total_items(),
            catalog.total_items()
        )));
    }
    let with_replacement = match scheme {
        SamplingScheme::WithReplacement => true,
        SamplingScheme::WithoutReplacement => false,
        SamplingScheme::IrrelevantOnly { .. } => {
            return Err(Error::Config(
                "exact expectation needs per-user catalogs for the `actual` scheme; \
                 use Monte Carlo estimation instead"
                    .into(),
            ))
        }
    };
    let total = catalog.total_items();
    let n = catalog.sample_size();
    let draws = n - 1;
    let table = if with_replacement {
        LogCombTable::new(draws)
    } else {
        LogCombTable::new(total)
    };
    let mut row = vec![0.0f64; n];
    for rank in 1..=total {
        let weight = hist.weight_at(rank);
        if weight == 0.0 {
            continue;
        }
        if with_replacement {
            let p = (rank - 1) as f64 / (total - 1) as f64;
            if p == 0.0 {
                row.fill(1.0);
            } else if p == 1.0 {
                row[..n - 1].fill(0.0);
                row[n - 1] = 1.0;
            } else {
                let ln_p = p.ln();
                let ln_q = (-p).ln_1p();
                let mut acc = KahanSum::default();
                for k in 1..=n {
                    let successes = k - 1;
                    let ln_term = table.ln_choose(draws, successes)
                        + successes as f64 * ln_p
                        + (draws - successes) as f64 * ln_q;
                    acc.add(ln_term.exp());
                    row[k - 1] = if k == n || k > rank {
                        1.0
                    } else {
                        acc.value().min(1.0)
                    };
                }
            }
        } else {
            let above = rank - 1;
            let below = total - rank;
            let lo = draws.saturating_sub(below);
            let hi = above.min(draws);
            let ln_denom = table.ln_choose(total - 1, draws);
            let mut acc = KahanSum::default();
            for k in 1..=n {
                let successes = k - 1;
                if successes >= lo && successes <= hi {
                    let ln_term = table.ln_choose(above, successes)
                        + table.ln_choose(below, draws - successes)
                        - ln_denom;
                    acc.add(ln_term.exp());
                }
                row[k - 1] = if k == n || k > rank {
                    1.0
                } else {
                    acc.value().min(1.0)
                };
            }
        }
        visit(rank, weight, &row);
    }
    Ok(())
}

/// Exact `E[SHR@k] = sum_R W_R Pr(r <= k | R)` for `k = 1..=n`. Only
/// the with/without-replacement schemes have a closed per-rank kernel;
/// the `actual` scheme needs per-user catalogs and is served by
/// [`shr_curve_monte_carlo`].
pub fn expected_shr_curve(
    hist: &RankHistogram,
    scheme: &SamplingScheme,
    catalog: &CatalogSpec,
) -> Result<HitRatioCurve> {
    let n = catalog.sample_size();
    let mut deltas = vec![0.0f64; n];
    visit_tail_rows(hist, scheme, catalog, |_rank, weight, row| {
        let mut prev = 0.0;
        for k in 0..n {
            deltas[k] += weight * (row[k] - prev);
            prev = row[k];
        }
    })?;
    // Normalizing by the accumulated total mass keeps the curve
    // monotone and pins the terminal value to exactly 1 even when the
    // histogram mass sums to 1 only within tolerance.
    let mut cum = Vec::with_capacity(n);
    let mut acc = 0.0f64;
    for d in &deltas {
        acc += d;
        cum.push(acc);
    }
    let total = acc;
    let values: Vec<f64> = cum.into_iter().map(|c| c / total).collect();
    HitRatioCurve::from_values(values)
}

/// Exact `Var[SHR@k] = (1/M) sum_R W_R p^R (1 - p^R)` for `k = 1..=n`.
pub fn shr_variance_curve(
    hist: &RankHistogram,
    scheme: &SamplingScheme,
    catalog: &CatalogSpec,
    users: usize,
) -> Result<Vec<f64>> {
    if users < 1 {
        return Err(Error::Domain("user count must be at least 1".into()));
    }
    let n = catalog.sample_size();
    let mut var = vec![0.0f64; n];
    visit_tail_rows(hist, scheme, catalog, |_rank, weight, row| {
        for k in 0..n {
            var[k] += weight * row[k] * (1.0 - row[k]);
        }
    })?;
    let m = users as f64;
    for v in &mut var {
        *v /= m;
    }
    Ok(var)
}

/// Draws one sampled rank for a user whose relevant item has global
/// rank `rank`. `user_index` selects the per-user effective catalog for
/// the `actual` scheme and is ignored otherwise.
pub fn sample_rank(
    rank: u32,
    scheme: &SamplingScheme,
    catalog: &CatalogSpec,
    user_index: usize,
    rng: &mut StreamRng,
) -> Result<u32> {
    let n = catalog.sample_size();
    let draws = (n - 1) as u64;
    let (pool, above) = match scheme {
        SamplingScheme::WithReplacement | SamplingScheme::WithoutReplacement => {
            let total = catalog.total_items();
            if rank < 1 || rank as usize > total {
                return Err(Error::Domain(format!(
                    "rank {rank} outside [1, {total}]"
                )));
            }
            ((total - 1) as u64, (rank - 1) as u64)
        }
        SamplingScheme::IrrelevantOnly { per_user_catalog } => {
            let effective = *per_user_catalog.get(user_index).ok_or_else(|| {
                Error::Config(format!(
                    "no effective catalog size for user index {user_index}"
                ))
            })? as usize;
            if effective < n {
                return Err(Error::Config(format!(
                    "effective catalog {effective} of user index {user_index} \
                     is smaller than the sample size {n}"
                )));
            }
            if rank < 1 || rank as usize > effective {
                return Err(Error::Domain(format!(
                    "rank {rank} outside [1, {effective}]"
                )));
            }
            ((effective - 1) as u64, (rank - 1) as u64)
        }
    };
    let successes = match scheme {
        SamplingScheme::WithReplacement => {
            let mut hits = 0u64;
            for _ in 0..draws {
                if rng.random_range(0..pool) < above {
                    hits += 1;
                }
            }
            hits
        }
        _ => {
            // sequential urn draw; exactly hypergeometric
            let mut hits = 0u64;
            let mut remaining_above = above;
            let mut remaining = pool;
            for _ in 0..draws {
                if rng.random_range(0..remaining) < remaining_above {
                    hits += 1;
                    remaining_above -= 1;
                }
                remaining -= 1;
            }
            hits
        }
    };
    Ok(successes as u32 + 1)
}

/// Monte Carlo estimate of the sampled hit-ratio curve: the mean over
/// runs, plus the per-cutoff standard error of that mean when more than
/// one run was requested.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloCurve {
    pub mean: HitRatioCurve,
    pub stderr: Option<Vec<f64>>,
}

/// Samples every user `cfg.runs` times and averages the per-run curves
/// `SHR@k = #{u : r_u <= k} / M`. Output is a pure function of
/// (profile, scheme, catalog, cfg) regardless of thread count.
pub fn shr_curve_monte_carlo(
    profile: &RankProfile,
    scheme: &SamplingScheme,
    catalog: &CatalogSpec,
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloCurve> {
    if cfg.runs < 1 {
        return Err(Error::Domain("Monte Carlo requires at least one run".into()));
    }
    if profile.total_items() != catalog.total_items() {
        return Err(Error::Config(format!(
            "profile covers {} items but catalog has {}",
            profile.total_items(),
            catalog.total_items()
        )));
    }
    if let SamplingScheme::IrrelevantOnly { per_user_catalog } = scheme {
        if per_user_catalog.len() != profile.user_count() {
            return Err(Error::Config(format!(
                "{} effective catalog sizes for {} users",
                per_user_catalog.len(),
                profile.user_count()
            )));
        }
    }
    let n = catalog.sample_size();
    let users = profile.user_count();
    let m = users as f64;
    let mut run_curves: Vec<Vec<f64>> = Vec::with_capacity(cfg.runs);
    for run in 0..cfg.runs {
        let sampled = sample_all_ranks(profile, scheme, catalog, cfg.seed, run as u64)?;
        let mut counts = vec![0u64; n];
        for r in sampled {
            counts[r as usize - 1] += 1;
        }
        let mut values = Vec::with_capacity(n);
        let mut cum = 0u64;
        for c in counts {
            cum += c;
            values.push(cum as f64 / m);
        }
        run_curves.push(values);
    }
    let runs = cfg.runs as f64;
    let mut mean = vec![0.0f64; n];
    for curve in &run_curves {
        for (mk, v) in mean.iter_mut().zip(curve) {
            *mk += v;
        }
    }
    for mk in &mut mean {
        *mk /= runs;
    }
    let stderr = if cfg.runs > 1 {
        let mut se = Vec::with_capacity(n);
        for k in 0..n {
            let mut ss = 0.0f64;
            for curve in &run_curves {
                let d = curve[k] - mean[k];
                ss += d * d;
            }
            se.push((ss / (runs - 1.0)).sqrt() / runs.sqrt());
        }
        Some(se)
    } else {
        None
    };
    Ok(MonteCarloCurve {
        mean: HitRatioCurve::from_values(mean)?,
        stderr,
    })
}

/// One full pass of per-user sampled ranks for a given run index.
pub fn sample_all_ranks(
    profile: &RankProfile,
    scheme: &SamplingScheme,
    catalog: &CatalogSpec,
    seed: u64,
    run_index: u64,
) -> Result<Vec<u32>> {
    profile
        .ranks()
        .par_iter()
        .enumerate()
        .map(|(u, &rank)| {
            let mut rng = sampling_stream(seed, u as u64, run_index);
            sample_rank(rank, scheme, catalog, u, &mut rng)
        })
        .collect()
}

/// Inverse-CDF draw from the Beta(a, 1) rank model, discretized to an
/// integer rank by round-and-clamp.
fn rank_from_uniform(uniform: f64, shape: f64, total_items: usize) -> u32 {
    let x = uniform.powf(1.0 / shape);
    let raw = 1.0 + (x * (total_items - 1) as f64).round();
    raw.clamp(1.0, total_items as f64) as u32
}

/// Synthesizes a rank profile whose rank distribution follows a
/// discretized Beta(a, 1) law: per user, `x = u^(1/a)` and
/// `R = clamp(1 + round(x (N-1)), 1, N)`.
pub fn simulate_profile(
    shape: f64,
    users: usize,
    total_items: usize,
    seed: u64,
) -> Result<RankProfile> {
    if !shape.is_finite() || shape <= 0.0 {
        return Err(Error::Domain(format!(
            "Beta shape must be positive, got {shape}"
        )));
    }
    if users < 1 {
        return Err(Error::Domain("user count must be at least 1".into()));
    }
    if total_items < 2 {
        return Err(Error::Domain(format!(
            "catalog must contain at least 2 items, got {total_items}"
        )));
    }
    let ranks: Vec<u32> = (0..users)
        .into_par_iter()
        .map(|u| {
            let mut rng = simulation_stream(seed, u as u64);
            rank_from_uniform(rng.random::<f64>(), shape, total_items)
        })
        .collect();
    RankProfile::new(ranks, total_items)
}
