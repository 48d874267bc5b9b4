//! Instance families: the two-arrival worst case, the two-scenario layout
//! that defeats fixing `k` in advance, and seeded random instances.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::harness::rng::SplitMix64;
use crate::line::{LineArrivals, LineInstance};
use crate::metric::MetricInstance;

/// Points `ℓ` and `ℓ + 1 − ε` for `ℓ = 1..n`, with arrivals at `1 − ε` and
/// `n + 1`, all scaled by the denominator of `ε`.
pub fn gen_fig1(n: usize, eps_num: i64, eps_den: i64) -> Result<(LineInstance, LineArrivals)> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    if !(0 < eps_num && eps_num < eps_den) {
        return Err(Error::Parameter(format!("need 0 < eps < 1, got {eps_num}/{eps_den}")));
    }
    let mut points = Vec::with_capacity(2 * n);
    for l in 1..=n as i64 {
        points.push(l * eps_den);
        points.push(l * eps_den + eps_den - eps_num);
    }
    let arrivals = vec![eps_den - eps_num, (n as i64 + 1) * eps_den];
    Ok((LineInstance::new(points)?, LineArrivals::new(arrivals)?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fig3 {
    pub beta: i64,
    pub line: LineInstance,
    /// One arrival `c₂` beyond each end of the line.
    pub scenario_a: LineArrivals,
    /// One arrival a unit outside each endpoint of every long edge.
    pub scenario_b: LineArrivals,
}

/// `β + 1` optimal pairs of length `c₁`, with `β² + β` pairs of length `c₃`
/// between consecutive long pairs. Consecutive optimal pairs are `c₂` apart.
pub fn gen_fig3(beta: i64, c1: i64, c2: i64, c3: i64) -> Result<Fig3> {
    if beta < 1 {
        return Err(Error::Parameter("beta must be at least 1".into()));
    }
    if c3 < 1 || c2 <= 1 {
        return Err(Error::Parameter("need c3 ≥ 1 and c2 > 1".into()));
    }
    let sep = beta
        .checked_pow(6)
        .and_then(|b| b.checked_mul(8))
        .ok_or_else(|| Error::Parameter("beta too large".into()))?;
    let ok = |big: i64, small: i64| small.checked_mul(sep).is_some_and(|need| big >= need);
    if !ok(c2, c3) || !ok(c1, c2) {
        return Err(Error::Parameter(format!(
            "need c1 ≥ 8β⁶·c2 and c2 ≥ 8β⁶·c3 (8β⁶ = {sep})"
        )));
    }
    let mut points = Vec::new();
    let mut long = Vec::new();
    let mut x = c2;
    for group in 0..=beta {
        if group > 0 {
            for _ in 0..beta * beta + beta {
                x += c2;
                points.push(x);
                x += c3;
                points.push(x);
            }
            x += c2;
        }
        long.push((x, x + c1));
        points.push(x);
        x += c1;
        points.push(x);
    }
    let first = points[0];
    let last = *points.last().expect("non-empty");
    let scenario_a = LineArrivals::new(vec![first - c2, last + c2])?;
    let scenario_b = LineArrivals::new(long.iter().flat_map(|&(a, b)| [a - 1, b + 1]).collect())?;
    Ok(Fig3 { beta, line: LineInstance::new(points)?, scenario_a, scenario_b })
}

/// Default separations for [`gen_fig3`]: `c₃ = 1`, then factors of `8β⁶`.
pub fn fig3_default_costs(beta: i64) -> (i64, i64, i64) {
    let sep = 8 * beta.pow(6);
    (sep * sep, sep, 1)
}

/// `2·n_pairs` distinct sorted points and `2k` arrivals in `[0, range]`.
pub fn gen_random(
    seed: u64,
    n_pairs: usize,
    range: i64,
    k: usize,
) -> Result<(LineInstance, LineArrivals)> {
    if n_pairs == 0 || k == 0 {
        return Err(Error::Parameter("need n_pairs ≥ 1 and k ≥ 1".into()));
    }
    if range < 0 || (2 * n_pairs) as u64 > range as u64 + 1 {
        return Err(Error::InfeasibleSize { pairs: n_pairs, vertices: (range.max(-1) + 1) as usize });
    }
    let mut rng = SplitMix64::new(seed);
    let mut points = BTreeSet::new();
    while points.len() < 2 * n_pairs {
        points.insert(rng.in_range(0, range));
    }
    let arrivals = (0..2 * k).map(|_| rng.in_range(0, range)).collect();
    Ok((LineInstance::new(points.into_iter().collect())?, LineArrivals::new(arrivals)?))
}

/// Random metric on `n + 2k` vertices: random symmetric weights closed
/// under shortest paths. The first `n` vertices form the first stage.
#[allow(clippy::needless_range_loop)]
pub fn gen_random_metric(
    seed: u64,
    n: usize,
    k: usize,
    max_weight: i64,
) -> Result<(MetricInstance, MetricInstance)> {
    if n == 0 || !n.is_multiple_of(2) || k == 0 || max_weight < 1 {
        return Err(Error::Parameter("need even n ≥ 2, k ≥ 1 and max_weight ≥ 1".into()));
    }
    let total = n + 2 * k;
    let mut rng = SplitMix64::new(seed);
    let mut d = vec![vec![0i64; total]; total];
    for a in 0..total {
        for b in a + 1..total {
            let w = rng.in_range(1, max_weight);
            d[a][b] = w;
            d[b][a] = w;
        }
    }
    for via in 0..total {
        for a in 0..total {
            for b in 0..total {
                let through = d[a][via] + d[via][b];
                if through < d[a][b] {
                    d[a][b] = through;
                }
            }
        }
    }
    let g1 = MetricInstance::new(d[..n].iter().map(|row| row[..n].to_vec()).collect())?;
    let g2 = MetricInstance::new(d)?;
    Ok((g1, g2))
}
