//! Exhaustive reference implementations for testing.
//!
//! Everything here works on plain data (edge triples and float vectors) and
//! shares no code with `topofc-core`. Each search is exponential and guarded
//! by a hard size cap.

/// Undirected edge `(u, v, weight)`.
pub type EdgeTriple = (usize, usize, f64);

pub const MAX_TRANSPORT_LEN: usize = 8;
pub const MAX_TREE_NODES: usize = 8;
pub const MAX_PARTITION_ITEMS: usize = 12;

struct Components {
    parent: Vec<usize>,
}

impl Components {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn root(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn join(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.root(a), self.root(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }

    fn count(&self) -> usize {
        (0..self.parent.len()).filter(|&x| self.parent[x] == x).count()
    }
}

/// Betti numbers of the graph keeping edges with weight strictly above `eps`:
/// component count and cycle rank `|E_eps| - M + beta0`.
pub fn betti_oracle(n_nodes: usize, edges: &[EdgeTriple], eps: f64) -> (usize, usize) {
    let kept: Vec<&EdgeTriple> = edges.iter().filter(|e| e.2 > eps).collect();
    let mut comps = Components::new(n_nodes);
    for &&(u, v, _) in &kept {
        comps.join(u, v);
    }
    let beta0 = comps.count();
    (beta0, kept.len() + beta0 - n_nodes)
}

fn permutations(n: usize, mut visit: impl FnMut(&[usize])) {
    // Heap's algorithm
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Minimum over all bijections of `(sum |x_i - y_s(i)|^p)^(1/p)`;
/// `p = None` is the bottleneck (max) cost. Inputs need not be sorted.
pub fn transport_oracle(x: &[f64], y: &[f64], p: Option<f64>) -> f64 {
    assert_eq!(x.len(), y.len(), "transport oracle needs equal lengths");
    assert!(x.len() <= MAX_TRANSPORT_LEN, "transport oracle capped at {MAX_TRANSPORT_LEN}");
    let mut best = f64::INFINITY;
    permutations(x.len(), |perm| {
        let cost = match p {
            None => x
                .iter()
                .zip(perm)
                .map(|(a, &j)| (a - y[j]).abs())
                .fold(0.0, f64::max),
            Some(p) => x
                .iter()
                .zip(perm)
                .map(|(a, &j)| (a - y[j]).abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p),
        };
        best = best.min(cost);
    });
    best
}

/// Enumerates every spanning tree (every acyclic `M-1`-edge subset) and
/// returns the ascending weight multiset of one with maximum total weight.
/// `None` if the graph is disconnected.
pub fn mst_weight_oracle(n_nodes: usize, edges: &[EdgeTriple]) -> Option<Vec<f64>> {
    assert!(n_nodes <= MAX_TREE_NODES, "tree enumeration capped at {MAX_TREE_NODES} nodes");
    let need = n_nodes.saturating_sub(1);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut chosen = Vec::with_capacity(need);
    fn recurse(
        n_nodes: usize,
        edges: &[EdgeTriple],
        start: usize,
        need: usize,
        chosen: &mut Vec<usize>,
        best: &mut Option<(f64, Vec<f64>)>,
    ) {
        if chosen.len() == need {
            let mut comps = Components::new(n_nodes);
            if chosen.iter().all(|&i| comps.join(edges[i].0, edges[i].1)) {
                let mut ws: Vec<f64> = chosen.iter().map(|&i| edges[i].2).collect();
                ws.sort_by(f64::total_cmp);
                let total: f64 = ws.iter().sum();
                if best.as_ref().is_none_or(|(t, _)| total > *t) {
                    *best = Some((total, ws));
                }
            }
            return;
        }
        let remaining = need - chosen.len();
        for i in start..=edges.len().saturating_sub(remaining) {
            if i >= edges.len() {
                break;
            }
            chosen.push(i);
            recurse(n_nodes, edges, i + 1, need, chosen, best);
            chosen.pop();
        }
    }
    recurse(n_nodes, edges, 0, need, &mut chosen, &mut best);
    best.map(|(_, ws)| ws)
}

/// Edge weights not in `tree` (as multisets), ascending.
pub fn complement_weights(edges: &[EdgeTriple], tree: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = edges.iter().map(|e| e.2).collect();
    all.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(all.len().saturating_sub(tree.len()));
    let mut t = tree.iter().peekable();
    for w in all {
        if t.peek().is_some_and(|&&x| x == w) {
            t.next();
        } else {
            out.push(w);
        }
    }
    assert!(t.next().is_none(), "tree weights are not a sub-multiset of the edges");
    out
}

fn within_sum_sq(points: &[&[f64]]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let dim = points[0].len();
    let n = points.len() as f64;
    (0..dim)
        .map(|d| {
            let mean = points.iter().map(|p| p[d]).sum::<f64>() / n;
            points.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>()
        })
        .sum()
}

/// Smallest within-cluster sum of squared Euclidean deviations over all
/// splits of `points` into two nonempty groups, with the optimal labels.
pub fn best_two_partition(points: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = points.len();
    assert!((2..=MAX_PARTITION_ITEMS).contains(&n), "partition search needs 2..={MAX_PARTITION_ITEMS} items");
    let mut best = (f64::INFINITY, Vec::new());
    // item 0 is pinned to group 0 so each split is visited once
    for mask in 0u32..(1 << (n - 1)) {
        let labels: Vec<usize> = (0..n)
            .map(|i| if i == 0 { 0 } else { ((mask >> (i - 1)) & 1) as usize })
            .collect();
        if labels.iter().all(|&l| l == 0) {
            continue;
        }
        let group = |g: usize| -> Vec<&[f64]> {
            points
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == g)
                .map(|(p, _)| p.as_slice())
                .collect()
        };
        let cost = within_sum_sq(&group(0)) + within_sum_sq(&group(1));
        if cost < best.0 {
            best = (cost, labels);
        }
    }
    best
}
