//! Enumeration and counting of admissible `(alpha, m)` configurations.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::Serialize;

use crate::codes::distinct_guaranteed;
use crate::config::{chi, tuple_len, Regime, SymmetryConfig, MAX_ALPHA};
use crate::error::{Error, Result};
use crate::layout::CoordinateLayout;

/// Family sizes up to this bound get an exact maximum pairwise-distinct subset.
pub const EXACT_FAMILY_LIMIT: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct ConfigFamily {
    pub n: usize,
    pub regime: Regime,
    pub alpha_max: u32,
    pub configs: Vec<SymmetryConfig>,
    /// `pairwise_distinct[i][k]`: whether configs `i` and `k` are guaranteed distinct.
    pub pairwise_distinct: Vec<Vec<bool>>,
}

/// Canonical order: by `alpha`, then by `m` compared from the last entry
/// backwards. Under this order `m ≲ n` implies `m < n`.
pub fn canonical_cmp(a: &SymmetryConfig, b: &SymmetryConfig) -> Ordering {
    a.alpha.cmp(&b.alpha).then_with(|| a.m.iter().rev().cmp(b.m.iter().rev()))
}

fn check_n(n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidParams(format!("dimension n = {n} must be at least 4")));
    }
    Ok(())
}

/// All tuples `m` of length `k(n)` with `sum m_j (j+1) <= cap`.
fn tuples_up_to(k: usize, cap: usize, allowed: &dyn Fn(usize) -> bool) -> Vec<Vec<u32>> {
    fn rec(j: usize, k: usize, left: usize, cur: &mut Vec<u32>, allowed: &dyn Fn(usize) -> bool, out: &mut Vec<Vec<u32>>) {
        if j > k {
            out.push(cur.clone());
            return;
        }
        let w = j + 1;
        let max = if allowed(j) { left / w } else { 0 };
        for mj in 0..=max {
            cur[j - 1] = mj as u32;
            rec(j + 1, k, left - mj * w, cur, allowed, out);
        }
        cur[j - 1] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0; k];
    rec(1, k, cap, &mut cur, allowed, &mut out);
    out
}

/// Every `(alpha, m)` with `alpha <= alpha_max` admissible in `regime`.
pub fn enumerate(n: usize, regime: Regime, alpha_max: u32) -> Result<ConfigFamily> {
    check_n(n)?;
    if alpha_max > MAX_ALPHA {
        return Err(Error::InvalidParams(format!("alpha_max = {alpha_max} exceeds {MAX_ALPHA}")));
    }
    let k = tuple_len(n);
    let mut configs = Vec::new();
    for alpha in 0..=alpha_max {
        let reserved = 2 * chi(alpha) as usize;
        if reserved > n / 2 {
            continue;
        }
        for m in tuples_up_to(k, n / 2 - reserved, &|_| true) {
            let cfg = SymmetryConfig::unchecked(n, alpha, m, regime);
            if cfg.validate().is_ok() {
                configs.push(cfg);
            }
        }
    }
    configs.sort_by(canonical_cmp);
    ConfigFamily::from_configs(n, regime, alpha_max, configs)
}

impl ConfigFamily {
    /// Wraps an explicit list, filling in the pairwise predicate.
    pub fn from_configs(n: usize, regime: Regime, alpha_max: u32, configs: Vec<SymmetryConfig>) -> Result<Self> {
        let pairwise_distinct = configs
            .iter()
            .map(|a| {
                configs
                    .iter()
                    .map(|b| distinct_guaranteed(a, b).map(|d| d.guaranteed()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConfigFamily { n, regime, alpha_max, configs, pairwise_distinct })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Plain-text table, one row per configuration.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:>4}  {:>5}  {:<24}  {:>6}  {:>4}  {:>5}  layout", "#", "alpha", "m", "weight", "tail", "orbit")
            .unwrap();
        for (i, c) in self.configs.iter().enumerate() {
            let m: Vec<String> = c.m.iter().map(u32::to_string).collect();
            let layout = CoordinateLayout::for_group(c).map(|l| l.summary()).unwrap_or_default();
            writeln!(
                out,
                "{:>4}  {:>5}  {:<24}  {:>6}  {:>4}  {:>5}  {}",
                i + 1,
                c.alpha,
                format!("({})", m.join(",")),
                c.weight(),
                c.tail_dim(),
                if c.orbit_condition() { "ok" } else { "fails" },
                layout
            )
            .unwrap();
        }
        out
    }
}

/// Number of `m` with `0 < sum m_j (j+1) <= cap` (and, when `exclude` is
/// given, `sum != exclude`), counted with an unbounded knapsack over the
/// allowed part sizes.
fn knapsack_count(k: usize, cap: usize, exclude: Option<usize>, allowed: &dyn Fn(usize) -> bool) -> u128 {
    let mut ways = vec![0u128; cap + 1];
    ways[0] = 1;
    for j in 1..=k {
        if !allowed(j) {
            continue;
        }
        let w = j + 1;
        for s in w..=cap {
            ways[s] += ways[s - w];
        }
    }
    (1..=cap).filter(|&s| Some(s) != exclude).map(|s| ways[s]).sum()
}

fn weight_cap_and_exclusion(n: usize, regime: Regime, alpha: u32) -> (Option<usize>, Option<usize>) {
    let reserved = 2 * chi(alpha) as usize;
    let cap = (n / 2).checked_sub(reserved);
    // orbit condition 2s + 1 != n, s = reserved + knapsack sum
    let exclude = (regime.requires_infinite_orbits() && n % 2 == 1)
        .then(|| ((n - 1) / 2).checked_sub(reserved))
        .flatten();
    (cap, exclude)
}

/// Number of admissible `m` for a fixed `alpha`, by dynamic programming.
pub fn count_configs(n: usize, regime: Regime, alpha: u32) -> Result<u128> {
    check_n(n)?;
    let (cap, exclude) = weight_cap_and_exclusion(n, regime, alpha);
    let Some(cap) = cap else { return Ok(0) };
    if regime.requires_infinite_orbits() && n == 5 {
        return Ok(0);
    }
    let mut count = knapsack_count(tuple_len(n), cap, exclude, &|_| true);
    if alpha > 0 && exclude != Some(0) {
        // m = 0 is admissible when alpha > 0
        count += 1;
    }
    Ok(count)
}

/// Same count by explicit enumeration and validation of every tuple.
pub fn count_configs_brute_force(n: usize, regime: Regime, alpha: u32) -> Result<u128> {
    check_n(n)?;
    let k = tuple_len(n);
    let bound = |j: usize| n / (2 * (j + 1));
    let mut count = 0u128;
    let mut m = vec![0u32; k];
    loop {
        if SymmetryConfig::unchecked(n, alpha, m.clone(), regime).validate().is_ok() {
            count += 1;
        }
        // odometer increment
        let mut i = 0;
        while i < k {
            if (m[i] as usize) < bound(i + 1) {
                m[i] += 1;
                break;
            }
            m[i] = 0;
            i += 1;
        }
        if i == k {
            return Ok(count);
        }
    }
}

pub fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimeCount {
    pub n: usize,
    pub exact: u128,
    /// `exp(pi sqrt(2n) / sqrt(3 ln(n/2)))`.
    pub asymptotic: f64,
    /// `ln(exact) / ln(asymptotic)`.
    pub log_ratio: f64,
}

/// `S(n)`: the number of `m` supported on indices `j` with `j + 1` prime
/// satisfying both the fit and the orbit conditions, with `alpha = 0`.
pub fn prime_restricted_count(n: usize) -> Result<PrimeCount> {
    check_n(n)?;
    let (cap, exclude) = weight_cap_and_exclusion(n, Regime::AEqBNonzero, 0);
    let exact = knapsack_count(tuple_len(n), cap.unwrap_or(0), exclude, &|j| is_prime(j + 1));
    let nf = n as f64;
    let asymptotic = (std::f64::consts::PI * (2.0 * nf).sqrt() / (3.0 * (nf / 2.0).ln()).sqrt()).exp();
    let log_ratio = (exact as f64).ln() / asymptotic.ln();
    Ok(PrimeCount { n, exact, asymptotic, log_ratio })
}

/// Explicit list of the tuples counted by [`prime_restricted_count`].
pub fn prime_restricted_configs(n: usize) -> Result<Vec<SymmetryConfig>> {
    check_n(n)?;
    let mut out: Vec<_> = tuples_up_to(tuple_len(n), n / 2, &|j| is_prime(j + 1))
        .into_iter()
        .map(|m| SymmetryConfig::unchecked(n, 0, m, Regime::AEqBNonzero))
        .filter(|c| c.fit_condition() && c.orbit_condition())
        .collect();
    out.sort_by(canonical_cmp);
    Ok(out)
}

/// A largest subset of the family whose members are pairwise guaranteed
/// distinct. Exact (maximum clique, first in index order) for families of
/// at most [`EXACT_FAMILY_LIMIT`] members, greedy in family order otherwise.
pub fn max_distinct_family(family: &ConfigFamily) -> Result<Vec<SymmetryConfig>> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("family is empty".into()));
    }
    let adj = &family.pairwise_distinct;
    let size = family.len();
    let chosen: Vec<usize> = if size <= EXACT_FAMILY_LIMIT {
        let mut best = Vec::new();
        let mut cur = Vec::new();
        max_clique(adj, 0, &mut cur, &mut best);
        best
    } else {
        let mut picked: Vec<usize> = Vec::new();
        for i in 0..size {
            if picked.iter().all(|&p| adj[p][i]) {
                picked.push(i);
            }
        }
        picked
    };
    Ok(chosen.into_iter().map(|i| family.configs[i].clone()).collect())
}

fn max_clique(adj: &[Vec<bool>], next: usize, cur: &mut Vec<usize>, best: &mut Vec<usize>) {
    if cur.len() > best.len() {
        *best = cur.clone();
    }
    if cur.len() + (adj.len() - next) <= best.len() {
        return;
    }
    for i in next..adj.len() {
        if cur.iter().all(|&c| adj[c][i]) {
            cur.push(i);
            max_clique(adj, i + 1, cur, best);
            cur.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(f: &ConfigFamily) -> Vec<(u32, Vec<u32>)> {
        f.configs.iter().map(|c| (c.alpha, c.m.clone())).collect()
    }

    #[test]
    fn small_families() {
        let f = enumerate(4, Regime::ALessB, 0).unwrap();
        assert_eq!(ms(&f), vec![(0, vec![1])]);
        let f = enumerate(8, Regime::ALessB, 0).unwrap();
        assert_eq!(
            ms(&f),
            vec![(0, vec![1, 0, 0]), (0, vec![2, 0, 0]), (0, vec![0, 1, 0]), (0, vec![0, 0, 1])]
        );
        let f = enumerate(4, Regime::AEqBNonzero, 2).unwrap();
        assert_eq!(ms(&f), vec![(0, vec![1]), (1, vec![0]), (2, vec![0])]);
        assert!(enumerate(3, Regime::ALessB, 0).is_err());
    }

    #[test]
    fn n5_nonzero_regime_is_empty() {
        assert!(enumerate(5, Regime::AEqBNonzero, 3).unwrap().is_empty());
        assert_eq!(count_configs(5, Regime::AEqBNonzero, 0).unwrap(), 0);
    }

    #[test]
    fn dp_matches_brute_force() {
        for n in 4..=20 {
            for regime in Regime::ALL {
                for alpha in 0..=2 {
                    assert_eq!(
                        count_configs(n, regime, alpha).unwrap(),
                        count_configs_brute_force(n, regime, alpha).unwrap(),
                        "n={n} {regime:?} alpha={alpha}"
                    );
                }
            }
        }
    }

    #[test]
    fn prime_counts() {
        assert_eq!(prime_restricted_count(8).unwrap().exact, 3);
        assert_eq!(prime_restricted_count(4).unwrap().exact, 1);
        for n in 4..=30 {
            assert_eq!(prime_restricted_count(n).unwrap().exact, prime_restricted_configs(n).unwrap().len() as u128);
        }
    }

    #[test]
    fn distinct_family_n8() {
        let f = enumerate(8, Regime::ALessB, 0).unwrap();
        let best = max_distinct_family(&f).unwrap();
        let m: Vec<_> = best.iter().map(|c| c.m.clone()).collect();
        assert_eq!(m, vec![vec![1, 0, 0], vec![2, 0, 0], vec![0, 1, 0]]);
    }

    #[test]
    fn varying_alpha_is_all_distinct() {
        let configs: Vec<_> = (1..=4).map(|a| SymmetryConfig::new(8, a, vec![0, 0, 0], Regime::ALessB).unwrap()).collect();
        let fam = ConfigFamily::from_configs(8, Regime::ALessB, 4, configs.clone()).unwrap();
        assert_eq!(max_distinct_family(&fam).unwrap(), configs);
    }

    #[test]
    fn rerun_is_identical() {
        let a = enumerate(14, Regime::AEqBNonzero, 2).unwrap();
        let b = enumerate(14, Regime::AEqBNonzero, 2).unwrap();
        assert_eq!(a.to_table(), b.to_table());
    }
}
