use std::fmt;

use serde::{Serialize, Serializer};

use super::{positive, solve_levels, Check};
use crate::dynamics::check_delta;
use crate::error::{domain, input, Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::spectral::path_lambda_min_closed_form;

/// Largest path length accepted by [`enumerate_path_configurations`].
pub const PATH_ENUMERATION_CAP: usize = 64;

/// Block lengths `a_1..a_k` of active runs on a path, separated by single inactive vertices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathConfiguration {
    pub blocks: Vec<usize>,
}

impl PathConfiguration {
    pub fn new(blocks: Vec<usize>) -> Self {
        PathConfiguration { blocks }
    }

    /// Length of the path this configuration covers, `Σ a_i + k − 1`.
    pub fn path_len(&self) -> usize {
        self.blocks.iter().sum::<usize>() + self.blocks.len() - 1
    }

    pub fn active_set(&self) -> VertexSet {
        let mut members = Vec::new();
        let mut start = 0;
        for &a in &self.blocks {
            members.extend(start..start + a);
            start += a + 1;
        }
        VertexSet::from_sorted(members)
    }
}

impl fmt::Display for PathConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join("-"))
    }
}

impl Serialize for PathConfiguration {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn path_threshold(k: usize) -> f64 {
    if k == 1 {
        f64::INFINITY
    } else {
        1.0 / path_lambda_min_closed_form(k).abs()
    }
}

/// Endpoint activity `b(δ,k)` of the all-active equilibrium on a path of `k` vertices.
pub fn b_endpoint(delta: f64, k: usize) -> Result<f64> {
    check_delta(delta)?;
    if k == 0 {
        return input("block length must be positive");
    }
    if delta >= path_threshold(k) {
        return domain(format!(
            "delta = {delta} is not below the all-active threshold {} of a {k}-path",
            path_threshold(k)
        ));
    }
    let g = Graph::path(k)?;
    match solve_levels(&g, delta, &VertexSet::all(k)) {
        Some(x) => Ok(x[0]),
        None => domain(format!("singular block system for k={k}, delta={delta}")),
    }
}

#[derive(Debug, Clone, Copy)]
struct Block {
    check: Check,
    b: f64,
}

fn block_info(delta: f64, k: usize) -> Result<Block> {
    let own = positive(path_threshold(k) - delta);
    if own != Check::Pass {
        return Ok(Block { check: own, b: f64::NAN });
    }
    let g = Graph::path(k)?;
    let Some(x) = solve_levels(&g, delta, &VertexSet::all(k)) else {
        return Ok(Block {
            check: Check::Boundary,
            b: f64::NAN,
        });
    };
    let mut check = Check::Pass;
    for &v in &x {
        match positive(v) {
            Check::Fail => check = Check::Fail,
            Check::Boundary if check == Check::Pass => check = Check::Boundary,
            _ => {}
        }
    }
    Ok(Block { check, b: x[0] })
}

/// Separator between blocks `a` and `a'` is strictly inactive iff `δ(b(δ,a) + b(δ,a')) > 1`.
fn pair_check(delta: f64, left: Block, right: Block) -> Check {
    if left.b.is_nan() || right.b.is_nan() {
        return Check::Boundary;
    }
    positive(delta * (left.b + right.b) - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathEnumeration {
    pub n: usize,
    pub delta: f64,
    pub configurations: Vec<PathConfiguration>,
    /// Configurations left out because some condition sits within the strictness tolerance.
    pub boundary_warnings: Vec<String>,
}

impl PathEnumeration {
    pub fn active_sets(&self) -> Vec<VertexSet> {
        self.configurations.iter().map(|c| c.active_set()).collect()
    }
}

struct Search<'a> {
    n: usize,
    delta: f64,
    blocks: &'a [Block],
    current: Vec<usize>,
    found: Vec<PathConfiguration>,
    warnings: Vec<String>,
}

impl Search<'_> {
    fn extend(&mut self, used: usize, boundary: bool) {
        if used == self.n {
            let config = PathConfiguration::new(self.current.clone());
            if boundary {
                self.warnings.push(format!(
                    "configuration {config} is at a boundary for delta = {}",
                    self.delta
                ));
            } else {
                self.found.push(config);
            }
            return;
        }
        let start = if self.current.is_empty() { 0 } else { used + 1 };
        if start >= self.n {
            return;
        }
        for a in 1..=self.n - start {
            let block = self.blocks[a];
            if block.check == Check::Fail {
                continue;
            }
            let mut at_boundary = boundary || block.check == Check::Boundary;
            if let Some(&prev) = self.current.last() {
                match pair_check(self.delta, self.blocks[prev], block) {
                    Check::Fail => continue,
                    Check::Boundary => at_boundary = true,
                    Check::Pass => {}
                }
            }
            self.current.push(a);
            self.extend(start + a, at_boundary);
            self.current.pop();
        }
    }
}

/// All block configurations on the `n`-path that support a stable equilibrium:
/// every block below its all-active threshold with a positive solve, every
/// separator strictly inactive, and `Σ a_i = n − k + 1`.
pub fn enumerate_path_configurations(n: usize, delta: f64) -> Result<PathEnumeration> {
    check_delta(delta)?;
    if n == 0 {
        return input("path length must be positive");
    }
    if n > PATH_ENUMERATION_CAP {
        return Err(Error::Guard(format!(
            "path configuration enumeration needs n <= {PATH_ENUMERATION_CAP}, got {n}"
        )));
    }
    let mut blocks = vec![Block { check: Check::Fail, b: f64::NAN }];
    for k in 1..=n {
        blocks.push(block_info(delta, k)?);
    }
    let mut search = Search {
        n,
        delta,
        blocks: &blocks,
        current: Vec::new(),
        found: Vec::new(),
        warnings: Vec::new(),
    };
    search.extend(0, false);
    let mut configurations = search.found;
    configurations.sort();
    Ok(PathEnumeration {
        n,
        delta,
        configurations,
        boundary_warnings: search.warnings,
    })
}

/// Admissible adjacent block pairs when `δ ∈ (1/|λ_min(P_{2m+2})|, 1/|λ_min(P_{2m})|)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockPairRule {
    pub m: usize,
    pub lower: f64,
    pub upper: f64,
    pub pairs: Vec<(usize, usize)>,
}

impl BlockPairRule {
    pub fn allows(&self, left: usize, right: usize) -> bool {
        self.pairs.contains(&(left, right))
    }
}

fn pair_interval(m: usize) -> (f64, f64) {
    (path_threshold(2 * m + 2), path_threshold(2 * m))
}

pub fn allowed_block_pairs(delta: f64, m: usize) -> Result<BlockPairRule> {
    if m == 0 {
        return input("m must be positive");
    }
    let (lower, upper) = pair_interval(m);
    if !(delta > lower && delta < upper) {
        return domain(format!("delta = {delta} outside ({lower}, {upper}) for m = {m}"));
    }
    Ok(BlockPairRule {
        m,
        lower,
        upper,
        pairs: vec![(1, 1), (1, 2 * m), (2 * m, 1)],
    })
}

/// The `m` whose pair-rule interval contains `δ`, if any.
pub fn block_pair_regime(delta: f64) -> Option<usize> {
    if !(delta > 0.5 && delta < 1.0) {
        return None;
    }
    (1..=100_000).find(|&m| {
        let (lower, upper) = pair_interval(m);
        delta > lower && delta < upper
    })
}

/// `e_n = e_{n−2} + e_{n−5}` with `e_1..e_5 = 1, 1, 1, 2, 1`: the number of
/// stable path configurations for `δ ∈ (1/φ, 1)`.
pub fn count_path_equilibria_golden(n: usize) -> Result<u128> {
    const INITIAL: [u128; 5] = [1, 1, 1, 2, 1];
    if n == 0 {
        return input("path length must be positive");
    }
    if n <= 5 {
        return Ok(INITIAL[n - 1]);
    }
    let mut e: Vec<u128> = INITIAL.to_vec();
    for k in 5..n {
        let next = e[k - 2]
            .checked_add(e[k - 5])
            .ok_or_else(|| Error::Domain(format!("count overflows u128 at n = {}", k + 1)))?;
        e.push(next);
    }
    Ok(e[n - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn configs(n: usize, delta: f64) -> Vec<String> {
        enumerate_path_configurations(n, delta)
            .unwrap()
            .configurations
            .iter()
            .map(|c| c.to_string())
            .collect()
    }

    #[test]
    fn b_endpoint_examples() {
        for d in [0.0, 0.3, 0.9, 1.0] {
            assert_eq!(b_endpoint(d, 1).unwrap(), 1.0);
        }
        for d in [0.2, 0.5, 0.95] {
            assert!((b_endpoint(d, 2).unwrap() - 1.0 / (1.0 + d)).abs() < 1e-12);
        }
        assert!((b_endpoint(0.4, 3).unwrap() - 15.0 / 17.0).abs() < 1e-12);
        assert!(b_endpoint(0.75, 3).is_err());
        assert!(b_endpoint(1.0, 2).is_err());
    }

    #[test]
    fn b_endpoint_matches_trig_closed_form() {
        // Endpoint of (I + δP_k)^{-1} 1 via the eigenbasis of P_k.
        fn oracle(delta: f64, k: usize) -> f64 {
            let h = k as f64 + 1.0;
            let pi = std::f64::consts::PI;
            (1..=k)
                .map(|j| {
                    let j = j as f64;
                    let lambda = 2.0 * (j * pi / h).cos();
                    let v0 = (j * pi / h).sin();
                    let sum: f64 = (1..=k).map(|i| (i as f64 * j * pi / h).sin()).sum();
                    (2.0 / h) * v0 * sum / (1.0 + delta * lambda)
                })
                .sum()
        }
        for k in 1..=10 {
            let limit = path_threshold(k).min(1.0);
            for t in [0.1, 0.4, 0.7, 0.95] {
                let delta = t * limit;
                let got = b_endpoint(delta, k).unwrap();
                assert!((got - oracle(delta, k)).abs() < 1e-10, "k={k} delta={delta}");
            }
        }
    }

    #[test]
    fn configuration_examples() {
        assert_eq!(configs(5, 0.7), vec!["1-1-1"]);
        assert_eq!(configs(7, 0.7), vec!["1-1-1-1", "2-1-2"]);
        assert_eq!(configs(4, 0.7), vec!["1-2", "2-1"]);
    }

    #[test]
    fn small_delta_keeps_everyone_active() {
        for n in 1..=10 {
            assert_eq!(configs(n, 0.3), vec![n.to_string()]);
        }
    }

    #[test]
    fn configuration_active_set() {
        let c = PathConfiguration::new(vec![2, 1, 2]);
        assert_eq!(c.path_len(), 7);
        assert_eq!(c.active_set().members(), &[0, 1, 3, 5, 6]);
    }

    #[test]
    fn boundary_is_reported_not_listed() {
        let e = enumerate_path_configurations(2, 1.0).unwrap();
        assert!(e.configurations.is_empty());
        assert_eq!(e.boundary_warnings.len(), 1);
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(
            enumerate_path_configurations(65, 0.5),
            Err(Error::Guard(_))
        ));
    }

    #[test]
    fn pair_rule_intervals() {
        let r = allowed_block_pairs(0.8, 1).unwrap();
        assert!((r.lower - 0.618_033_988_749_895).abs() < 1e-12);
        assert!((r.upper - 1.0).abs() < 1e-12);
        assert_eq!(r.pairs, vec![(1, 1), (1, 2), (2, 1)]);
        let r = allowed_block_pairs(0.58, 2).unwrap();
        assert!((r.lower - 0.554_958).abs() < 1e-6);
        assert_eq!(r.pairs, vec![(1, 1), (1, 4), (4, 1)]);
        assert!(allowed_block_pairs(0.58, 1).is_err());
        assert_eq!(block_pair_regime(0.58), Some(2));
        assert_eq!(block_pair_regime(0.9), Some(1));
        assert_eq!(block_pair_regime(0.4), None);
    }

    #[test]
    fn golden_recurrence() {
        let first: Vec<u128> = (1..=10).map(|n| count_path_equilibria_golden(n).unwrap()).collect();
        assert_eq!(first, vec![1, 1, 1, 2, 1, 3, 2, 4, 4, 5]);
        assert_eq!(
            count_path_equilibria_golden(200).unwrap(),
            1_710_979_310_592_123_991
        );
        assert!(count_path_equilibria_golden(0).is_err());
        assert!(count_path_equilibria_golden(2000).is_err());
    }
}
