//! Exact graph edit distance with unit costs.
//!
//! Nodes of the first graph are assigned in index order to a distinct node of
//! the second graph or to deletion; unassigned nodes of the second graph are
//! inserted at the end. Induced edge costs follow from the assignment. The
//! search is depth-first with a label-multiset lower bound on the unassigned
//! remainder.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::ConceptError;

/// Largest graph the exact search accepts.
pub const MAX_GED_NODES: usize = 12;

/// Directed graph with labeled nodes and at most one labeled edge per
/// ordered node pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledGraph<N, E> {
    pub nodes: Vec<N>,
    pub edges: Vec<(usize, usize, E)>,
}

impl<N, E> LabeledGraph<N, E> {
    /// Chain `n0 → n1 → …` with edge `k` labeled `edge_labels[k]`.
    pub fn chain(nodes: Vec<N>, edge_labels: Vec<E>) -> Self {
        assert_eq!(
            edge_labels.len() + 1,
            nodes.len().max(1),
            "a chain of n nodes has n - 1 edges"
        );
        let edges = edge_labels
            .into_iter()
            .enumerate()
            .map(|(k, e)| (k, k + 1, e))
            .collect();
        Self { nodes, edges }
    }
}

struct Prepared<'a, E> {
    adj: HashMap<(usize, usize), &'a E>,
    incident: Vec<Vec<usize>>,
}

fn prepare<N, E>(g: &LabeledGraph<N, E>) -> Prepared<'_, E> {
    let mut adj = HashMap::new();
    let mut incident = vec![Vec::new(); g.nodes.len()];
    for (k, (a, b, e)) in g.edges.iter().enumerate() {
        adj.insert((*a, *b), e);
        incident[*a].push(k);
        if a != b {
            incident[*b].push(k);
        }
    }
    Prepared { adj, incident }
}

fn multiset_gap<T: Ord>(a: impl Iterator<Item = T>, b: impl Iterator<Item = T>) -> usize {
    let mut counts: BTreeMap<T, (usize, usize)> = BTreeMap::new();
    let (mut na, mut nb) = (0, 0);
    for x in a {
        counts.entry(x).or_default().0 += 1;
        na += 1;
    }
    for x in b {
        counts.entry(x).or_default().1 += 1;
        nb += 1;
    }
    let common: usize = counts.values().map(|(p, q)| p.min(q)).sum();
    na.max(nb) - common
}

struct Search<'a, N, E> {
    g1: &'a LabeledGraph<N, E>,
    g2: &'a LabeledGraph<N, E>,
    p1: Prepared<'a, E>,
    p2: Prepared<'a, E>,
    /// Image of each assigned g1 node; `None` = deleted.
    map: Vec<Option<usize>>,
    used: Vec<bool>,
    best: usize,
}

impl<N: Ord + Eq, E: Ord + Eq + Hash> Search<'_, N, E> {
    /// Extra cost of mapping g1 node `u` to `x`, given nodes `0..u` assigned.
    fn step_cost(&self, u: usize, x: Option<usize>) -> usize {
        let mut cost = match x {
            None => 1,
            Some(x) => usize::from(self.g1.nodes[u] != self.g2.nodes[x]),
        };
        for &k in &self.p1.incident[u] {
            let (a, b, e) = &self.g1.edges[k];
            let other = if *a == u { *b } else { *a };
            if other > u {
                continue;
            }
            let img = |v: usize| if v == u { x } else { self.map[v] };
            cost += match (img(*a), img(*b)) {
                (Some(ia), Some(ib)) => match self.p2.adj.get(&(ia, ib)) {
                    Some(e2) => usize::from(*e2 != e),
                    None => 1,
                },
                _ => 1,
            };
        }
        if let Some(x) = x {
            // g2 edges between x and already-used images with no g1 preimage.
            for &k in &self.p2.incident[x] {
                let (a, b, _) = &self.g2.edges[k];
                let other = if *a == x { *b } else { *a };
                let pre = |y: usize| -> Option<usize> {
                    if y == x {
                        Some(u)
                    } else {
                        (0..u).find(|&v| self.map[v] == Some(y))
                    }
                };
                if other != x && !self.used[other] {
                    continue;
                }
                if let (Some(pa), Some(pb)) = (pre(*a), pre(*b)) {
                    if !self.p1.adj.contains_key(&(pa, pb)) {
                        cost += 1;
                    }
                }
            }
        }
        cost
    }

    /// Lower bound on the cost still to come once nodes `0..u` are assigned.
    fn lower_bound(&self, u: usize) -> usize {
        let r2 = || (0..self.g2.nodes.len()).filter(|&y| !self.used[y]);
        let nodes = multiset_gap(self.g1.nodes[u..].iter(), r2().map(|y| &self.g2.nodes[y]));
        let e1 = self
            .g1
            .edges
            .iter()
            .filter(|(a, b, _)| *a >= u || *b >= u)
            .map(|(_, _, e)| e);
        let e2 = self
            .g2
            .edges
            .iter()
            .filter(|(a, b, _)| !self.used[*a] || !self.used[*b])
            .map(|(_, _, e)| e);
        nodes + multiset_gap(e1, e2)
    }

    fn completion_cost(&self) -> usize {
        let free = |y: usize| !self.used[y];
        let nodes = (0..self.g2.nodes.len()).filter(|&y| free(y)).count();
        let edges = self
            .g2
            .edges
            .iter()
            .filter(|(a, b, _)| free(*a) || free(*b))
            .count();
        nodes + edges
    }

    fn run(&mut self, u: usize, acc: usize) {
        if acc + self.lower_bound(u) >= self.best {
            return;
        }
        if u == self.g1.nodes.len() {
            self.best = self.best.min(acc + self.completion_cost());
            return;
        }
        let mut options: Vec<(usize, Option<usize>)> = (0..self.g2.nodes.len())
            .filter(|&y| !self.used[y])
            .map(|y| (self.step_cost(u, Some(y)), Some(y)))
            .collect();
        options.push((self.step_cost(u, None), None));
        options.sort_by_key(|&(c, x)| (c, x.is_none(), x));
        for (c, x) in options {
            self.map[u] = x;
            if let Some(y) = x {
                self.used[y] = true;
            }
            self.run(u + 1, acc + c);
            if let Some(y) = x {
                self.used[y] = false;
            }
            self.map[u] = None;
        }
    }
}

/// Minimum number of unit-cost node and edge insertions, deletions and
/// relabelings turning `g1` into `g2`.
pub fn graph_edit_distance<N: Ord + Eq, E: Ord + Eq + Hash>(
    g1: &LabeledGraph<N, E>,
    g2: &LabeledGraph<N, E>,
) -> Result<usize, ConceptError> {
    for g in [g1, g2] {
        if g.nodes.len() > MAX_GED_NODES {
            return Err(ConceptError::TooLarge {
                nodes: g.nodes.len(),
                limit: MAX_GED_NODES,
            });
        }
    }
    // Deleting g1 entirely and inserting g2 is always feasible.
    let upper = g1.nodes.len() + g1.edges.len() + g2.nodes.len() + g2.edges.len();
    let mut s = Search {
        g1,
        g2,
        p1: prepare(g1),
        p2: prepare(g2),
        map: vec![None; g1.nodes.len()],
        used: vec![false; g2.nodes.len()],
        best: upper + 1,
    };
    s.run(0, 0);
    Ok(s.best)
}

#[cfg(test)]
mod tests {
    use super::*;

    type G = LabeledGraph<u8, u8>;

    fn chain(nodes: &[u8], edges: &[u8]) -> G {
        LabeledGraph::chain(nodes.to_vec(), edges.to_vec())
    }

    fn plain(nodes: &[u8]) -> G {
        chain(nodes, &vec![0; nodes.len().saturating_sub(1)])
    }

    /// Enumerates every partial injection explicitly and scores it from
    /// scratch.
    fn brute_force(g1: &G, g2: &G) -> usize {
        fn score(g1: &G, g2: &G, map: &[Option<usize>]) -> usize {
            let mut cost = 0;
            for (u, &x) in map.iter().enumerate() {
                cost += match x {
                    None => 1,
                    Some(x) => usize::from(g1.nodes[u] != g2.nodes[x]),
                };
            }
            let used: Vec<bool> = (0..g2.nodes.len())
                .map(|y| map.contains(&Some(y)))
                .collect();
            cost += used.iter().filter(|&&b| !b).count();
            let e2: HashMap<(usize, usize), u8> =
                g2.edges.iter().map(|&(a, b, e)| ((a, b), e)).collect();
            let mut matched = std::collections::HashSet::new();
            for &(a, b, e) in &g1.edges {
                match (map[a], map[b]) {
                    (Some(x), Some(y)) if e2.contains_key(&(x, y)) => {
                        matched.insert((x, y));
                        cost += usize::from(e2[&(x, y)] != e);
                    }
                    _ => cost += 1,
                }
            }
            cost + g2.edges.len() - matched.len()
        }
        fn rec(g1: &G, g2: &G, map: &mut Vec<Option<usize>>, best: &mut usize) {
            if map.len() == g1.nodes.len() {
                *best = (*best).min(score(g1, g2, map));
                return;
            }
            for x in (0..g2.nodes.len()).map(Some).chain([None]) {
                if x.is_some() && map.contains(&x) {
                    continue;
                }
                map.push(x);
                rec(g1, g2, map, best);
                map.pop();
            }
        }
        let mut best = usize::MAX;
        rec(g1, g2, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn examples() {
        let a = plain(&[0, 1, 2]);
        assert_eq!(graph_edit_distance(&a, &a).unwrap(), 0);
        assert_eq!(graph_edit_distance(&a, &plain(&[0, 2, 2])).unwrap(), 1);
        let long = plain(&[0, 1, 2, 1, 0]);
        assert_eq!(graph_edit_distance(&a, &long).unwrap(), 4);
        assert_eq!(
            graph_edit_distance(&chain(&[0, 1], &[0]), &chain(&[0, 1], &[1])).unwrap(),
            1
        );
    }

    #[test]
    fn label_disjoint_chains_cost_every_component() {
        for (n, m) in [(2, 2), (2, 4), (3, 5), (4, 4)] {
            let a = chain(&vec![0; n], &vec![0; n - 1]);
            let b = chain(&vec![1; m], &vec![1; m - 1]);
            let max = n.max(m);
            assert_eq!(graph_edit_distance(&a, &b).unwrap(), 2 * max - 1);
            assert_eq!(brute_force(&a, &b), 2 * max - 1);
        }
    }

    #[test]
    fn edge_direction_matters() {
        let a = chain(&[0, 0], &[0]);
        let mut rev = a.clone();
        rev.edges = vec![(1, 0, 0)];
        assert_eq!(graph_edit_distance(&a, &rev).unwrap(), 0);
        let b = chain(&[0, 1], &[0]);
        let mut brev = b.clone();
        brev.edges = vec![(1, 0, 0)];
        assert_eq!(graph_edit_distance(&b, &brev).unwrap(), 2);
        assert_eq!(brute_force(&b, &brev), 2);
    }

    #[test]
    fn capacity_limit() {
        let big = plain(&[0; 13]);
        assert!(matches!(
            graph_edit_distance(&big, &plain(&[0])),
            Err(ConceptError::TooLarge { nodes: 13, .. })
        ));
        let a = plain(&[0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2]);
        let b = plain(&[2, 1, 0, 2, 1, 0, 2, 1, 0, 2, 1, 0]);
        let d = graph_edit_distance(&a, &b).unwrap();
        assert!(d <= 8 && d > 0);
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let random_graph = |rng: &mut rand_chacha::ChaCha8Rng| {
                let n = rng.random_range(0..5usize);
                let nodes = (0..n).map(|_| rng.random_range(0..3u8)).collect();
                let mut edges = Vec::new();
                for a in 0..n {
                    for b in 0..n {
                        if a != b && rng.random_bool(0.3) {
                            edges.push((a, b, rng.random_range(0..2u8)));
                        }
                    }
                }
                LabeledGraph { nodes, edges }
            };
            let (g1, g2) = (random_graph(&mut rng), random_graph(&mut rng));
            assert_eq!(
                graph_edit_distance(&g1, &g2).unwrap(),
                brute_force(&g1, &g2),
                "{g1:?} {g2:?}"
            );
        }
    }

    #[test]
    fn metric_on_short_chains() {
        let mut chains = Vec::new();
        for len in 1..=4u32 {
            for code in 0..3usize.pow(len) {
                let mut c = code;
                let nodes: Vec<u8> = (0..len)
                    .map(|_| {
                        let l = (c % 3) as u8;
                        c /= 3;
                        l
                    })
                    .collect();
                chains.push(plain(&nodes));
            }
        }
        let n = chains.len();
        let mut d = vec![0usize; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = graph_edit_distance(&chains[i], &chains[j]).unwrap();
            }
        }
        for i in 0..n {
            assert_eq!(d[i * n + i], 0);
            for j in 0..n {
                assert_eq!(d[i * n + j], d[j * n + i]);
                assert_eq!(d[i * n + j] == 0, chains[i] == chains[j]);
                for k in 0..n {
                    assert!(d[i * n + k] <= d[i * n + j] + d[j * n + k]);
                }
            }
        }
    }
}
