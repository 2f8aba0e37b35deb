//! Exact-rational cross-checks that are too heavy for in-module unit
//! tests: the hypergeometric tail at a nearly-full sample, where the
//! subset space is far beyond enumeration.

use num::integer::binomial;
use num::traits::ToPrimitive;
use num::{BigInt, BigRational, Zero};

use hitsample::dist::hyper_tail_prob;
use hitsample::profile::CatalogSpec;

fn choose(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::ZERO;
    }
    binomial(BigInt::from(n), BigInt::from(k))
}

/// Exact hypergeometric CDF with the same rank-inside-cutoff override
/// as the operation contract.
fn hyper_oracle(k: usize, rank: usize, total: usize, sample: usize) -> f64 {
    if rank < k {
        return 1.0;
    }
    let above = rank - 1;
    let below = total - rank;
    let draws = sample - 1;
    let denom = choose(total - 1, draws);
    let mut sum = BigRational::zero();
    for successes in 0..k {
        let ways = choose(above, successes) * choose(below, draws - successes);
        sum += BigRational::new(ways, denom.clone());
    }
    sum.to_f64().unwrap()
}

#[test]
fn hyper_tail_matches_exact_cdf_at_nearly_full_sample() {
    // N=50, n=45: C(49, 44) ~ 1.9 million subsets, so enumeration is
    // out; the rational CDF is still exact.
    let total = 50usize;
    let sample = 45usize;
    let catalog = CatalogSpec::new(total, sample).unwrap();
    let mut worst = 0.0f64;
    for k in 1..=sample {
        for rank in 1..=total {
            let got = hyper_tail_prob(k, rank, &catalog).unwrap();
            let want = hyper_oracle(k, rank, total, sample);
            worst = worst.max((got - want).abs());
        }
    }
    assert!(worst <= 1e-12, "max |tail - exact| = {worst:.3e}");
}

#[test]
fn hyper_tail_matches_exact_cdf_on_wide_catalog() {
    let total = 200usize;
    let sample = 12usize;
    let catalog = CatalogSpec::new(total, sample).unwrap();
    let mut worst = 0.0f64;
    for k in 1..=sample {
        for rank in (1..=total).step_by(7) {
            let got = hyper_tail_prob(k, rank, &catalog).unwrap();
            let want = hyper_oracle(k, rank, total, sample);
            worst = worst.max((got - want).abs());
        }
    }
    assert!(worst <= 1e-12, "max |tail - exact| = {worst:.3e}");
}
