use rand::Rng;

use super::Graph;
use crate::error::{input, Error, Result};
use crate::rng::seeded;

/// Restarts allowed for the random-regular pairing before giving up.
pub const MAX_REGULAR_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RandomModel {
    /// G(n, p): each pair independently with probability `p`.
    ErdosRenyi { p: f64 },
    /// Preferential attachment: seed clique on `m` vertices, then `m` edges per new vertex.
    BarabasiAlbert { m: usize },
    /// Approximately uniform `d`-regular graph from the pairing model.
    RandomRegular { d: usize },
}

/// Samples a graph; identical `(model, n, seed)` yields an identical graph.
pub fn generate_random(model: RandomModel, n: usize, seed: u64) -> Result<Graph> {
    if n == 0 {
        return input("random graph needs at least one vertex");
    }
    match model {
        RandomModel::ErdosRenyi { p } => erdos_renyi(n, p, seed),
        RandomModel::BarabasiAlbert { m } => barabasi_albert(n, m, seed),
        RandomModel::RandomRegular { d } => random_regular(n, d, seed),
    }
}

fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return input(format!("edge probability {p} not in [0,1]"));
    }
    let mut rng = seeded(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Ok(Graph::from_canonical(n, edges))
}

fn barabasi_albert(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m == 0 || m >= n {
        return input(format!("barabasi-albert needs 1 <= m < n, got m={m}, n={n}"));
    }
    let mut rng = seeded(seed);
    let mut edges = Vec::new();
    // Each edge endpoint appears once, so uniform picks are degree-proportional.
    let mut endpoints: Vec<usize> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            edges.push((i, j));
            endpoints.extend([i, j]);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for v in m..n {
        targets.clear();
        while targets.len() < m {
            // A one-vertex seed clique has no degree mass yet; fall back to uniform.
            let t = if endpoints.is_empty() {
                rng.random_range(0..v)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    Ok(Graph::from_canonical(n, edges))
}

fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n || (n * d) % 2 == 1 {
        return input(format!("no {d}-regular graph on {n} vertices"));
    }
    // Dense degrees are sampled as the complement of a sparse regular graph.
    let complement = d > (n - 1) / 2;
    let target = if complement { n - 1 - d } else { d };
    let mut rng = seeded(seed);
    for _ in 0..MAX_REGULAR_ATTEMPTS {
        if let Some(edges) = pairing_attempt(n, target, &mut rng) {
            let g = Graph::from_canonical(n, edges);
            return Ok(if complement { complement_of(&g) } else { g });
        }
    }
    Err(Error::Generation(format!(
        "pairing method failed {MAX_REGULAR_ATTEMPTS} times for n={n}, d={d}"
    )))
}

/// One pass of the pairing model that pairs random points, refusing pairs that would
/// create a loop or a repeated edge; gives up when no admissible pair remains.
fn pairing_attempt(n: usize, d: usize, rng: &mut impl Rng) -> Option<Vec<(usize, usize)>> {
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut adjacent = vec![false; n * n];
    let mut edges = Vec::with_capacity(n * d / 2);
    while !points.is_empty() {
        let mut failures = 0;
        loop {
            let a = rng.random_range(0..points.len());
            let b = rng.random_range(0..points.len());
            let (u, v) = (points[a], points[b]);
            if a != b && u != v && !adjacent[u * n + v] {
                adjacent[u * n + v] = true;
                adjacent[v * n + u] = true;
                edges.push((u.min(v), u.max(v)));
                let (hi, lo) = (a.max(b), a.min(b));
                points.swap_remove(hi);
                points.swap_remove(lo);
                break;
            }
            failures += 1;
            if failures > 64 && !has_admissible_pair(&points, &adjacent, n) {
                return None;
            }
        }
    }
    Some(edges)
}

fn has_admissible_pair(points: &[usize], adjacent: &[bool], n: usize) -> bool {
    let mut open: Vec<usize> = points.to_vec();
    open.sort_unstable();
    open.dedup();
    open.iter()
        .enumerate()
        .any(|(k, &u)| open[k + 1..].iter().any(|&v| !adjacent[u * n + v]))
}

fn complement_of(g: &Graph) -> Graph {
    let n = g.n();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !g.has_edge(i, j) {
                edges.push((i, j));
            }
        }
    }
    Graph::from_canonical(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erdos_renyi_extremes() {
        let empty = generate_random(RandomModel::ErdosRenyi { p: 0.0 }, 10, 1).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let full = generate_random(RandomModel::ErdosRenyi { p: 1.0 }, 5, 1).unwrap();
        assert_eq!(full, Graph::clique(5).unwrap());
        assert!(generate_random(RandomModel::ErdosRenyi { p: 1.5 }, 5, 1).is_err());
    }

    #[test]
    fn erdos_renyi_edge_count_mean() {
        let (n, p, runs) = (30usize, 0.2, 400u64);
        let pairs = (n * (n - 1) / 2) as f64;
        let total: usize = (0..runs)
            .map(|s| generate_random(RandomModel::ErdosRenyi { p }, n, s).unwrap().edge_count())
            .sum();
        let mean = total as f64 / runs as f64;
        let sd_of_mean = (pairs * p * (1.0 - p) / runs as f64).sqrt();
        assert!((mean - p * pairs).abs() < 5.0 * sd_of_mean, "mean {mean}");
    }

    #[test]
    fn regular_degrees_exact() {
        let g = generate_random(RandomModel::RandomRegular { d: 2 }, 6, 3).unwrap();
        assert!(g.degree_sequence().iter().all(|&d| d == 2));
        for (n, d) in [(100, 10), (100, 5), (100, 80), (50, 49), (20, 0)] {
            let g = generate_random(RandomModel::RandomRegular { d }, n, 11).unwrap();
            assert!(g.degree_sequence().iter().all(|&k| k == d), "n={n} d={d}");
        }
    }

    #[test]
    fn regular_infeasible() {
        assert!(generate_random(RandomModel::RandomRegular { d: 3 }, 5, 0).is_err());
        assert!(generate_random(RandomModel::RandomRegular { d: 5 }, 5, 0).is_err());
    }

    #[test]
    fn barabasi_albert_shape() {
        let (n, m) = (100, 5);
        let g = generate_random(RandomModel::BarabasiAlbert { m }, n, 9).unwrap();
        assert_eq!(g.edge_count(), m * (m - 1) / 2 + (n - m) * m);
        assert!((m..n).all(|v| g.neighbors(v).iter().filter(|&&u| u < v).count() == m));
        let tree = generate_random(RandomModel::BarabasiAlbert { m: 1 }, 50, 2).unwrap();
        assert_eq!(tree.edge_count(), 49);
        assert!(generate_random(RandomModel::BarabasiAlbert { m: 5 }, 5, 0).is_err());
    }

    #[test]
    fn reproducible_per_seed() {
        for model in [
            RandomModel::ErdosRenyi { p: 0.3 },
            RandomModel::BarabasiAlbert { m: 2 },
            RandomModel::RandomRegular { d: 4 },
        ] {
            let a = generate_random(model, 40, 77).unwrap();
            let b = generate_random(model, 40, 77).unwrap();
            assert_eq!(a, b);
            let c = generate_random(model, 40, 78).unwrap();
            assert_ne!(a, c);
        }
    }
}
