//! Search tree storage and the PUCT rules.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::env::EnvState;
use crate::error::{Error, Result};

/// Statistics of one (state, action) edge.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Edge {
    pub n: u64,
    pub w: f64,
    pub q: f64,
    pub p: f64,
}

impl Edge {
    pub fn record(&mut self, v: f64) {
        self.n += 1;
        self.w += v;
        self.q = self.w / self.n as f64;
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub state: EnvState,
    pub edges: Vec<Edge>,
    pub children: Vec<Option<usize>>,
    /// Network priors before any root noise.
    pub clean_priors: Vec<f64>,
    pub expanded: bool,
    pub terminal: bool,
    /// Terminal fidelity, set on first evaluation of a terminal node.
    pub terminal_value: Option<f64>,
    /// Simulations that reached this node, including its expansion.
    pub visits: u64,
    /// Node in the exhaustion trie with the same action prefix, if any.
    pub trie: Option<usize>,
}

impl Node {
    pub fn new(state: EnvState, actions: usize, terminal: bool) -> Self {
        Self {
            state,
            edges: vec![Edge::default(); actions],
            children: vec![None; actions],
            clean_priors: Vec::new(),
            expanded: false,
            terminal,
            terminal_value: None,
            visits: 0,
            trie: None,
        }
    }

    /// Installs priors from per-action network outputs, normalized by their sum.
    pub fn install_priors(&mut self, outputs: &[f64]) -> Result<()> {
        if self.expanded {
            return Err(Error::InvalidInput("node already expanded".into()));
        }
        if outputs.len() != self.edges.len() {
            return Err(Error::Dimension(format!(
                "{} prior outputs for {} actions",
                outputs.len(),
                self.edges.len()
            )));
        }
        let sum: f64 = outputs.iter().sum();
        let priors: Vec<f64> = if sum > 0.0 && sum.is_finite() {
            outputs.iter().map(|p| p / sum).collect()
        } else {
            vec![1.0 / outputs.len() as f64; outputs.len()]
        };
        for (e, &p) in self.edges.iter_mut().zip(&priors) {
            *e = Edge {
                p,
                ..Edge::default()
            };
        }
        self.clean_priors = priors;
        self.expanded = true;
        Ok(())
    }

    pub fn child_visits(&self) -> u64 {
        self.edges.iter().map(|e| e.n).sum()
    }
}

/// PUCT selection over actions allowed by `allowed`:
/// `argmax Q + c P sqrt(sum N) / (1 + N)`, ties to the lowest index.
pub fn select_child(edges: &[Edge], c_puct: f64, allowed: impl Fn(usize) -> bool) -> Result<usize> {
    let total: u64 = edges.iter().map(|e| e.n).sum();
    let sqrt_total = (total as f64).sqrt();
    let mut best: Option<(usize, f64)> = None;
    for (a, e) in edges.iter().enumerate() {
        if !allowed(a) {
            continue;
        }
        let score = e.q + c_puct * e.p * sqrt_total / (1.0 + e.n as f64);
        if best.map_or(true, |(_, s)| score > s) {
            best = Some((a, score));
        }
    }
    best.map(|(a, _)| a).ok_or(Error::ExhaustedNode)
}

/// Adds `v` to every edge on the path.
pub fn backup(edges: &mut [&mut Edge], v: f64) {
    for e in edges.iter_mut() {
        e.record(v);
    }
}

/// Visit-count policy `N^(1/tau)` over allowed actions; one-hot on the most
/// visited allowed action when `deterministic`.
pub fn root_policy(visits: &[u64], tau: f64, deterministic: bool, allowed: impl Fn(usize) -> bool) -> Result<Vec<f64>> {
    let mut pi = vec![0.0; visits.len()];
    let candidates: Vec<usize> = (0..visits.len()).filter(|&a| allowed(a)).collect();
    if candidates.is_empty() {
        return Err(Error::ExhaustedNode);
    }
    let total: u64 = candidates.iter().map(|&a| visits[a]).sum();
    if total == 0 {
        return Err(Error::InvalidInput("root policy needs at least one visit".into()));
    }
    if deterministic {
        let mut best = candidates[0];
        for &a in &candidates {
            if visits[a] > visits[best] {
                best = a;
            }
        }
        pi[best] = 1.0;
        return Ok(pi);
    }
    // Work relative to the largest count so large exponents stay finite.
    let max = candidates.iter().map(|&a| visits[a]).max().unwrap() as f64;
    let inv_tau = 1.0 / tau;
    for &a in &candidates {
        pi[a] = (visits[a] as f64 / max).powf(inv_tau);
    }
    let sum: f64 = pi.iter().sum();
    for x in &mut pi {
        *x /= sum;
    }
    Ok(pi)
}

/// Symmetric Dirichlet sample. Small concentrations are drawn in log space
/// (`G = G' U^(1/alpha)` with `G' ~ Gamma(alpha + 1)`) so that no component
/// underflows to an all-zero vector.
pub fn dirichlet<R: Rng + ?Sized>(alpha: f64, k: usize, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(alpha + 1.0, 1.0).expect("positive shape");
    let logs: Vec<f64> = (0..k)
        .map(|_| {
            let g: f64 = gamma.sample(rng);
            let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
            g.ln() + u.ln() / alpha
        })
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = w.iter().sum();
    w.into_iter().map(|x| x / sum).collect()
}

/// Replaces the node's priors by `(1 - eps) clean + eps eta`.
pub fn add_root_noise<R: Rng + ?Sized>(node: &mut Node, alpha: f64, epsilon: f64, rng: &mut R) {
    if epsilon == 0.0 {
        for (e, &p) in node.edges.iter_mut().zip(&node.clean_priors) {
            e.p = p;
        }
        return;
    }
    let eta = dirichlet(alpha, node.edges.len(), rng);
    for ((e, &p), n) in node.edges.iter_mut().zip(&node.clean_priors).zip(eta) {
        e.p = (1.0 - epsilon) * p + epsilon * n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(q: &[f64], n: &[u64], p: &[f64]) -> Vec<Edge> {
        q.iter()
            .zip(n)
            .zip(p)
            .map(|((&q, &n), &p)| Edge {
                n,
                w: q * n as f64,
                q,
                p,
            })
            .collect()
    }

    #[test]
    fn fresh_node_picks_lowest_index() {
        let e = edges(&[0.0; 4], &[0; 4], &[0.25; 4]);
        assert_eq!(select_child(&e, 1.0, |_| true).unwrap(), 0);
        assert_eq!(select_child(&e, 1.0, |a| a >= 2).unwrap(), 2);
        assert!(matches!(select_child(&e, 1.0, |_| false), Err(Error::ExhaustedNode)));
    }

    #[test]
    fn q_dominates_at_equal_u() {
        let e = edges(&[0.9, 0.1], &[2, 2], &[0.5, 0.5]);
        assert_eq!(select_child(&e, 1.0, |_| true).unwrap(), 0);
    }

    #[test]
    fn backup_mean() {
        let mut e = Edge::default();
        backup(&mut [&mut e], 0.7);
        assert_eq!((e.n, e.w, e.q), (1, 0.7, 0.7));
        let mut e = Edge::default();
        e.record(0.4);
        e.record(0.8);
        assert!((e.q - 0.6).abs() < 1e-15);
    }

    #[test]
    fn policy_examples() {
        let mut n = vec![0u64; 60];
        n[0] = 10;
        n[1] = 30;
        let pi = root_policy(&n, 1.0, false, |_| true).unwrap();
        assert_eq!((pi[0], pi[1], pi[2]), (0.25, 0.75, 0.0));
        let pi = root_policy(&n, 1.0, true, |_| true).unwrap();
        assert_eq!(pi[1], 1.0);
        assert_eq!(pi.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn tiny_alpha_dirichlet_is_a_distribution() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        for _ in 0..100 {
            let d = dirichlet(0.03, 60, &mut rng);
            assert!(d.iter().all(|x| x.is_finite() && *x >= 0.0));
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
