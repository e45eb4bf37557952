//! Leiden optimisation of the Constant Potts Model on weighted graphs with
//! node sizes.
//!
//! Moving node `v` (size `s`) into community `X` (not containing `v`) has
//! value `w(v, X) - gamma * s * n_X`; the difference between two targets is
//! the change in quality.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Adjacency;
use crate::seeds::rng_for;

/// Randomness of the refinement merge choice.
const THETA: f64 = 0.01;
/// Minimum improvement for a move to count.
const MOVE_EPS: f64 = 1e-12;
/// Pass-level convergence threshold.
const PASS_EPS: f64 = 1e-9;

/// One aggregation level: CSR adjacency without self loops, plus the
/// weight folded into each node and its size in original nodes.
#[derive(Debug, Clone)]
pub(crate) struct LevelGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    self_w: Vec<f64>,
    size: Vec<f64>,
}

impl LevelGraph {
    pub(crate) fn from_adjacency(adj: &Adjacency) -> Self {
        let n = adj.node_count();
        Self {
            offsets: adj.offsets.clone(),
            targets: adj.targets.clone(),
            weights: adj.weights.clone(),
            self_w: vec![0.0; n],
            size: vec![1.0; n],
        }
    }

    #[inline]
    fn n(&self) -> usize {
        self.size.len()
    }

    #[inline]
    fn nbrs(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()]
            .iter()
            .map(|&t| t as usize)
            .zip(self.weights[r].iter().copied())
    }

    fn quality(&self, comm: &[u32], gamma: f64) -> f64 {
        let n = self.n();
        let mut internal = vec![0.0; n];
        let mut csize = vec![0.0; n];
        for v in 0..n {
            let c = comm[v] as usize;
            internal[c] += self.self_w[v];
            csize[c] += self.size[v];
            for (u, w) in self.nbrs(v) {
                if u > v && comm[u] as usize == c {
                    internal[c] += w;
                }
            }
        }
        internal
            .iter()
            .zip(&csize)
            .map(|(e, s)| e - gamma * s * (s - 1.0) / 2.0)
            .sum()
    }
}

/// Scratch accumulator of edge weight from one node to each community.
struct NeighborWeights {
    w: Vec<f64>,
    seen: Vec<bool>,
    list: Vec<u32>,
}

impl NeighborWeights {
    fn new(n: usize) -> Self {
        Self {
            w: vec![0.0; n],
            seen: vec![false; n],
            list: Vec::new(),
        }
    }

    #[inline]
    fn add(&mut self, c: u32, w: f64) {
        let i = c as usize;
        if !self.seen[i] {
            self.seen[i] = true;
            self.list.push(c);
        }
        self.w[i] += w;
    }

    #[inline]
    fn get(&self, c: u32) -> f64 {
        self.w[c as usize]
    }

    fn clear(&mut self) {
        for &c in &self.list {
            self.w[c as usize] = 0.0;
            self.seen[c as usize] = false;
        }
        self.list.clear();
    }
}

/// Community bookkeeping shared by local moving and polishing.
struct Communities {
    size: Vec<f64>,
    count: Vec<u32>,
    empty: Vec<u32>,
}

impl Communities {
    fn new(g: &LevelGraph, comm: &[u32]) -> Self {
        let n = g.n();
        let mut size = vec![0.0; n];
        let mut count = vec![0u32; n];
        for v in 0..n {
            size[comm[v] as usize] += g.size[v];
            count[comm[v] as usize] += 1;
        }
        let empty = (0..n as u32)
            .rev()
            .filter(|&c| count[c as usize] == 0)
            .collect();
        Self { size, count, empty }
    }

    fn relocate(&mut self, from: u32, to: u32, s: f64) {
        self.size[from as usize] -= s;
        self.count[from as usize] -= 1;
        if self.count[from as usize] == 0 {
            self.size[from as usize] = 0.0;
            self.empty.push(from);
        }
        self.size[to as usize] += s;
        self.count[to as usize] += 1;
    }

    fn take_empty(&mut self) -> u32 {
        loop {
            let c = self.empty.pop().expect("some community is empty");
            if self.count[c as usize] == 0 {
                return c;
            }
        }
    }
}

/// The best target for `v`: `None` if staying is at least as good as any
/// move. Among equal-valued targets the smallest community id wins; a new
/// singleton is only chosen when strictly better than every existing one.
#[allow(clippy::too_many_arguments)]
fn best_move(
    g: &LevelGraph,
    v: usize,
    comm: &[u32],
    comms: &Communities,
    nw: &mut NeighborWeights,
    gamma: f64,
    eps: f64,
) -> Option<(Option<u32>, f64)> {
    let cur = comm[v];
    let s = g.size[v];
    for (u, w) in g.nbrs(v) {
        nw.add(comm[u], w);
    }
    let stay = nw.get(cur) - gamma * s * (comms.size[cur as usize] - s);
    nw.list.sort_unstable();
    let mut best: Option<(Option<u32>, f64)> = None;
    for &c in &nw.list {
        if c == cur {
            continue;
        }
        let val = nw.get(c) - gamma * s * comms.size[c as usize];
        if best.is_none_or(|(_, b)| val > b) {
            best = Some((Some(c), val));
        }
    }
    if comms.size[cur as usize] - s > 0.0 && best.is_none_or(|(_, b)| 0.0 > b) {
        best = Some((None, 0.0));
    }
    nw.clear();
    best.filter(|&(_, val)| val > stay + eps)
        .map(|(c, val)| (c, val - stay))
}

/// Queue-based local moving. Returns whether any node moved.
fn move_nodes_fast(g: &LevelGraph, comm: &mut [u32], gamma: f64, rng: &mut ChaCha8Rng) -> bool {
    let n = g.n();
    let mut comms = Communities::new(g, comm);
    let mut nw = NeighborWeights::new(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut queue: VecDeque<usize> = order.into();
    let mut queued = vec![true; n];
    let mut moved = false;
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let Some((target, _)) = best_move(g, v, comm, &comms, &mut nw, gamma, MOVE_EPS) else {
            continue;
        };
        let to = target.unwrap_or_else(|| comms.take_empty());
        comms.relocate(comm[v], to, g.size[v]);
        comm[v] = to;
        moved = true;
        for (u, _) in g.nbrs(v) {
            if !queued[u] && comm[u] != to {
                queued[u] = true;
                queue.push_back(u);
            }
        }
    }
    moved
}

/// Leiden refinement: inside each community of `comm`, merge well-connected
/// singletons into well-connected sub-communities, picking the target at
/// random with probability proportional to `exp(gain / THETA)`.
fn refine(g: &LevelGraph, comm: &[u32], gamma: f64, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let n = g.n();
    let mut csize = vec![0.0; n];
    for v in 0..n {
        csize[comm[v] as usize] += g.size[v];
    }
    let mut w_in = vec![0.0; n];
    for v in 0..n {
        for (u, w) in g.nbrs(v) {
            if comm[u] == comm[v] {
                w_in[v] += w;
            }
        }
    }
    let mut refined: Vec<u32> = (0..n as u32).collect();
    let mut rsize = g.size.clone();
    let mut rcount = vec![1u32; n];
    let mut rext = w_in.clone();
    let mut nw = NeighborWeights::new(n);
    let mut cands: Vec<(u32, f64)> = Vec::new();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for v in order {
        let own = refined[v];
        if rcount[own as usize] != 1 {
            continue;
        }
        let c = comm[v] as usize;
        let s = g.size[v];
        if w_in[v] < gamma * s * (csize[c] - s) {
            continue;
        }
        for (u, w) in g.nbrs(v) {
            if comm[u] as usize == c {
                nw.add(refined[u], w);
            }
        }
        nw.list.sort_unstable();
        cands.clear();
        cands.push((own, 0.0));
        for &t in &nw.list {
            if t == own {
                continue;
            }
            let ts = rsize[t as usize];
            if rext[t as usize] < gamma * ts * (csize[c] - ts) {
                continue;
            }
            let gain = nw.get(t) - gamma * s * ts;
            if gain >= 0.0 {
                cands.push((t, gain));
            }
        }
        let chosen = if cands.len() == 1 {
            own
        } else {
            let top = cands.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
            let probs: Vec<f64> = cands.iter().map(|x| ((x.1 - top) / THETA).exp()).collect();
            let total: f64 = probs.iter().sum();
            let mut r = rng.random::<f64>() * total;
            let mut pick = cands[cands.len() - 1].0;
            for (i, p) in probs.iter().enumerate() {
                if r < *p {
                    pick = cands[i].0;
                    break;
                }
                r -= p;
            }
            pick
        };
        if chosen != own {
            let w_vt = nw.get(chosen);
            let t = chosen as usize;
            rext[t] = rext[t] + rext[own as usize] - 2.0 * w_vt;
            rsize[t] += s;
            rcount[t] += 1;
            rcount[own as usize] = 0;
            refined[v] = chosen;
        }
        nw.clear();
    }
    refined
}

/// Dense relabel by first appearance; returns the number of labels.
fn densify(labels: &mut [u32]) -> usize {
    let mut map = vec![u32::MAX; labels.len().max(1)];
    let mut next = 0u32;
    for l in labels.iter_mut() {
        let slot = &mut map[*l as usize];
        if *slot == u32::MAX {
            *slot = next;
            next += 1;
        }
        *l = *slot;
    }
    next as usize
}

/// Collapses each group of `groups` (dense labels) into one node.
fn aggregate(g: &LevelGraph, groups: &[u32], n_groups: usize) -> LevelGraph {
    let mut size = vec![0.0; n_groups];
    let mut self_w = vec![0.0; n_groups];
    let mut pairs: Vec<(u32, u32, f64)> = Vec::new();
    for v in 0..g.n() {
        let cv = groups[v];
        size[cv as usize] += g.size[v];
        self_w[cv as usize] += g.self_w[v];
        for (u, w) in g.nbrs(v) {
            let cu = groups[u];
            if cu == cv {
                if u > v {
                    self_w[cv as usize] += w;
                }
            } else {
                pairs.push((cv, cu, w));
            }
        }
    }
    pairs.sort_unstable_by_key(|p| (p.0, p.1));
    let mut offsets = vec![0usize; n_groups + 1];
    let mut targets = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut last: Option<(u32, u32)> = None;
    for (a, b, w) in pairs {
        if last == Some((a, b)) {
            *weights.last_mut().unwrap() += w;
        } else {
            targets.push(b);
            weights.push(w);
            offsets[a as usize + 1] += 1;
            last = Some((a, b));
        }
    }
    for i in 0..n_groups {
        offsets[i + 1] += offsets[i];
    }
    LevelGraph {
        offsets,
        targets,
        weights,
        self_w,
        size,
    }
}

/// Deterministic sweeps in node order until no single node can improve the
/// partition by moving. Returns whether anything moved.
fn polish(g: &LevelGraph, comm: &mut [u32], gamma: f64) -> bool {
    let n = g.n();
    let mut comms = Communities::new(g, comm);
    let mut nw = NeighborWeights::new(n);
    let mut any = false;
    loop {
        let mut moved = false;
        for v in 0..n {
            if let Some((target, _)) = best_move(g, v, comm, &comms, &mut nw, gamma, 1e-10) {
                let to = target.unwrap_or_else(|| comms.take_empty());
                comms.relocate(comm[v], to, g.size[v]);
                comm[v] = to;
                moved = true;
            }
        }
        if !moved {
            return any;
        }
        any = true;
    }
}

/// Splits every community into its connected components. Returns whether
/// any community was split; labels are left dense.
fn split_disconnected(g: &LevelGraph, comm: &mut [u32]) -> bool {
    let n = g.n();
    let before = densify(comm);
    let mut out = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..n {
        if out[start] != u32::MAX {
            continue;
        }
        out[start] = next;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for (u, _) in g.nbrs(v) {
                if out[u] == u32::MAX && comm[u] == comm[v] {
                    out[u] = next;
                    stack.push(u);
                }
            }
        }
        next += 1;
    }
    comm.copy_from_slice(&out);
    next as usize != before
}

/// Runs Leiden from singletons and returns dense labels (first appearance
/// in node order). The result is node-move optimal and every community is
/// connected.
/// One full Leiden iteration from `labels`: local moving, refinement and
/// aggregation repeated until every aggregate node is its own community.
fn iterate(base: &LevelGraph, labels: &mut [u32], gamma: f64, rng: &mut ChaCha8Rng) {
    let mut g = base.clone();
    let mut comm = labels.to_vec();
    let mut node_of: Vec<u32> = (0..base.n() as u32).collect();
    loop {
        move_nodes_fast(&g, &mut comm, gamma, rng);
        let n_comm = densify(&mut comm);
        if n_comm == g.n() {
            break;
        }
        let mut refined = refine(&g, &comm, gamma, rng);
        let mut n_ref = densify(&mut refined);
        if n_ref == g.n() {
            refined.copy_from_slice(&comm);
            n_ref = n_comm;
        }
        let agg = aggregate(&g, &refined, n_ref);
        let mut next_comm = vec![0u32; n_ref];
        for v in 0..g.n() {
            next_comm[refined[v] as usize] = comm[v];
        }
        for x in node_of.iter_mut() {
            *x = refined[*x as usize];
        }
        g = agg;
        comm = next_comm;
    }
    for (l, x) in labels.iter_mut().zip(&node_of) {
        *l = comm[*x as usize];
    }
}

pub(crate) fn leiden_labels(adj: &Adjacency, gamma: f64, seed: u64, max_passes: usize) -> Vec<u32> {
    let n0 = adj.node_count();
    if n0 == 0 {
        return Vec::new();
    }
    let base = LevelGraph::from_adjacency(adj);
    let mut rng = rng_for(seed, &[0x4c45_4944_454e]);
    let mut labels: Vec<u32> = (0..n0 as u32).collect();
    let mut q_prev = base.quality(&labels, gamma);
    for _ in 0..max_passes {
        iterate(&base, &mut labels, gamma, &mut rng);
        densify(&mut labels);
        let q = base.quality(&labels, gamma);
        if q - q_prev < PASS_EPS {
            break;
        }
        q_prev = q;
    }
    loop {
        polish(&base, &mut labels, gamma);
        if !split_disconnected(&base, &mut labels) {
            break;
        }
    }
    densify(&mut labels);
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AugmentedGraph;

    fn adj(edges: &[(&str, &str, f64)]) -> Adjacency {
        AugmentedGraph::from_weighted([], edges.iter().copied())
            .unwrap()
            .adjacency()
    }

    #[test]
    fn aggregation_preserves_quality() {
        let a = adj(&[
            ("a", "b", 1.0),
            ("b", "c", 2.0),
            ("c", "d", 0.5),
            ("a", "c", 1.5),
        ]);
        let g = LevelGraph::from_adjacency(&a);
        let groups = vec![0, 0, 1, 1];
        let agg = aggregate(&g, &groups, 2);
        let q1 = g.quality(&[0, 0, 0, 0], 0.3);
        let q2 = agg.quality(&[0, 0], 0.3);
        assert!((q1 - q2).abs() < 1e-12);
        let q3 = g.quality(&groups, 0.3);
        let q4 = agg.quality(&[0, 1], 0.3);
        assert!((q3 - q4).abs() < 1e-12);
    }

    #[test]
    fn disconnected_communities_are_split() {
        let a = adj(&[("a", "b", 1.0), ("c", "d", 1.0)]);
        let g = LevelGraph::from_adjacency(&a);
        let mut labels = vec![0, 0, 0, 0];
        assert!(split_disconnected(&g, &mut labels));
        assert_eq!(labels, vec![0, 0, 1, 1]);
    }

    #[test]
    fn same_seed_same_labels() {
        let mut edges = Vec::new();
        let names: Vec<String> = (0..60).map(|i| format!("n{i:02}")).collect();
        for i in 0..60 {
            for j in [1, 2, 7, 13] {
                edges.push((
                    names[i].as_str(),
                    names[(i + j) % 60].as_str(),
                    1.0 / j as f64,
                ));
            }
        }
        let a = AugmentedGraph::from_weighted([], edges)
            .unwrap()
            .adjacency();
        assert_eq!(
            leiden_labels(&a, 0.05, 3, 10),
            leiden_labels(&a, 0.05, 3, 10)
        );
    }
}
