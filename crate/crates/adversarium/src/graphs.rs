//! Small undirected graphs on at most 64 vertices, stored as adjacency bitmasks.
//!
//! Edge variables of graph-encoded functions are numbered lexicographically
//! over pairs `(i, j)` with `i < j`.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimpleGraph {
    pub n: usize,
    adj: Vec<u64>,
}

/// Index of the pair `(i, j)` among all pairs of `n` vertices in lexicographic order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    assert!(a != b && b < n, "pair ({i},{j}) invalid for n = {n}");
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

impl SimpleGraph {
    pub fn empty(n: usize) -> Self {
        assert!(n <= 64, "at most 64 vertices supported");
        SimpleGraph { n, adj: vec![0; n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        Self::from_edges(n, &all_pairs(n))
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges)
    }

    /// Graph whose edges are the set bits of `mask` over `all_pairs(n)`.
    pub fn from_pair_mask(n: usize, mask: u64) -> Self {
        let mut g = Self::empty(n);
        for (k, (i, j)) in all_pairs(n).into_iter().enumerate() {
            if mask >> k & 1 == 1 {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn pair_mask(&self) -> u64 {
        let mut m = 0u64;
        for (k, (i, j)) in all_pairs(self.n).into_iter().enumerate() {
            if self.has_edge(i, j) {
                m |= 1 << k;
            }
        }
        m
    }

    /// Edge indicator bits in pair order, suitable as a function input.
    pub fn edge_bits(&self) -> Vec<u8> {
        all_pairs(self.n).into_iter().map(|(i, j)| self.has_edge(i, j) as u8).collect()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v && u < self.n && v < self.n, "bad edge ({u},{v})");
        self.adj[u] |= 1 << v;
        self.adj[v] |= 1 << u;
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    pub fn neighbours(&self, u: usize) -> u64 {
        self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].count_ones() as usize
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        all_pairs(self.n).into_iter().filter(|&(i, j)| self.has_edge(i, j)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
    }

    /// BFS distances from `s`, `None` for unreachable vertices.
    pub fn bfs(&self, s: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for v in bits(self.adj[u]) {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn connected(&self, s: usize, t: usize) -> bool {
        self.bfs(s)[t].is_some()
    }

    /// Connected component label per vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            for (v, d) in self.bfs(s).into_iter().enumerate() {
                if d.is_some() {
                    label[v] = next;
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_forest(&self) -> bool {
        let comps = self.components();
        let k = comps.iter().copied().max().map_or(0, |m| m + 1);
        self.edge_count() + k == self.n
    }

    /// Whether the vertex subset `set` induces a connected subgraph.
    pub fn induces_connected(&self, set: u64) -> bool {
        if set == 0 {
            return false;
        }
        let start = set.trailing_zeros() as usize;
        let mut seen = 1u64 << start;
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0;
            for u in bits(frontier) {
                next |= self.adj[u] & set & !seen;
            }
            seen |= next;
            frontier = next;
        }
        seen == set
    }

    pub fn independence_number(&self) -> usize {
        fn rec(g: &SimpleGraph, cand: u64) -> usize {
            if cand == 0 {
                return 0;
            }
            let v = cand.trailing_zeros() as usize;
            let with = 1 + rec(g, cand & !(1 << v) & !g.adj[v]);
            let without = rec(g, cand & !(1 << v));
            with.max(without)
        }
        rec(self, mask_of(self.n))
    }

    pub fn relabel(&self, perm: &[usize]) -> SimpleGraph {
        let mut g = SimpleGraph::empty(self.n);
        for (u, v) in self.edges() {
            g.add_edge(perm[u], perm[v]);
        }
        g
    }

    /// Whether the graph contains `t` as a subgraph (not necessarily induced).
    pub fn contains_subgraph(&self, t: &SimpleGraph) -> bool {
        let mut map = vec![usize::MAX; t.n];
        fn rec(g: &SimpleGraph, t: &SimpleGraph, map: &mut [usize], used: u64, k: usize) -> bool {
            if k == t.n {
                return true;
            }
            for v in 0..g.n {
                if used >> v & 1 == 1 {
                    continue;
                }
                let ok = (0..k).all(|a| !t.has_edge(a, k) || g.has_edge(map[a], v));
                if ok {
                    map[k] = v;
                    if rec(g, t, map, used | 1 << v, k + 1) {
                        return true;
                    }
                }
            }
            false
        }
        t.n <= self.n && rec(self, t, &mut map, 0, 0)
    }

    /// Whether some `t`-subgraph maps each vertex `a` of `t` to a vertex coloured `a`.
    pub fn contains_coloured_subgraph(&self, t: &SimpleGraph, colour: &[usize]) -> bool {
        let mut map = vec![usize::MAX; t.n];
        fn rec(g: &SimpleGraph, t: &SimpleGraph, colour: &[usize], map: &mut [usize], k: usize) -> bool {
            if k == t.n {
                return true;
            }
            for v in (0..g.n).filter(|&v| colour[v] == k) {
                if (0..k).all(|a| !t.has_edge(a, k) || g.has_edge(map[a], v)) {
                    map[k] = v;
                    if rec(g, t, colour, map, k + 1) {
                        return true;
                    }
                }
            }
            false
        }
        rec(self, t, colour, &mut map, 0)
    }

    /// Exhaustive minor test: searches disjoint connected branch sets.
    /// Practical for `n <= 10` and `t.n <= 5`.
    pub fn has_minor(&self, t: &SimpleGraph) -> bool {
        if t.n == 0 {
            return true;
        }
        if t.n > self.n || t.edge_count() > self.edge_count() {
            return false;
        }
        minor_by_partitions(self, t)
    }
}

/// Minor search over set partitions of `V ∪ {*}`: the block containing `*`
/// is the unused vertex set; the remaining blocks are matched to `t` in every order.
fn minor_by_partitions(g: &SimpleGraph, t: &SimpleGraph) -> bool {
    let n = g.n;
    let h = t.n;
    let mut block = vec![0usize; n + 1];
    let perms = permutations(h);
    fn rec(
        g: &SimpleGraph,
        t: &SimpleGraph,
        perms: &[Vec<usize>],
        block: &mut [usize],
        pos: usize,
        used: usize,
        h: usize,
    ) -> bool {
        let n = g.n;
        let remaining = n + 1 - pos;
        if used + remaining < h + 1 {
            return false;
        }
        if pos == n + 1 {
            if used != h + 1 {
                return false;
            }
            // element n is '*'; its block is unused
            let star = block[n];
            let mut sets = Vec::with_capacity(h);
            for b in 0..=h {
                if b == star {
                    continue;
                }
                let s = (0..n).filter(|&u| block[u] == b).fold(0u64, |m, u| m | 1 << u);
                if !g.induces_connected(s) {
                    return false;
                }
                sets.push(s);
            }
            let touch = |a: u64, b: u64| bits(a).any(|u| g.adj[u] & b != 0);
            let mut quotient = SimpleGraph::empty(h);
            for a in 0..h {
                for b in a + 1..h {
                    if touch(sets[a], sets[b]) {
                        quotient.add_edge(a, b);
                    }
                }
            }
            return perms.iter().any(|p| t.edges().into_iter().all(|(a, b)| quotient.has_edge(p[a], p[b])));
        }
        for b in 0..=used.min(h) {
            block[pos] = b;
            let nu = if b == used { used + 1 } else { used };
            if rec(g, t, perms, block, pos + 1, nu, h) {
                return true;
            }
        }
        false
    }
    rec(g, t, &perms, &mut block, 0, 0, h)
}

pub fn permutations(h: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = vec![];
    rec(&mut vec![], &mut vec![false; h], &mut out);
    out
}

pub fn mask_of(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterator over set-bit positions.
pub fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// One representative per isomorphism class of graphs on `n` vertices (n <= 7).
pub fn graphs_up_to_isomorphism(n: usize) -> Vec<SimpleGraph> {
    assert!(n <= 7, "isomorphism enumeration is limited to 7 vertices");
    let pairs = all_pairs(n);
    let perms = permutations(n);
    let relabel_mask = |mask: u64, p: &[usize]| -> u64 {
        let mut out = 0u64;
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                out |= 1 << pair_index(n, p[i], p[j]);
            }
        }
        out
    };
    let total = 1u64 << pairs.len();
    let mut seen = vec![false; total as usize];
    let mut reps = vec![];
    for mask in 0..total {
        if seen[mask as usize] {
            continue;
        }
        for p in &perms {
            seen[relabel_mask(mask, p) as usize] = true;
        }
        reps.push(SimpleGraph::from_pair_mask(n, mask));
    }
    reps
}

/// Adjacency-matrix text: first line `n`, then `n` lines of 0/1 entries.
pub fn parse_adjacency(text: &str) -> Result<SimpleGraph, String> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let n: usize = lines
        .next()
        .ok_or("empty graph file")?
        .parse()
        .map_err(|e| format!("bad vertex count: {e}"))?;
    let mut g = SimpleGraph::empty(n);
    for i in 0..n {
        let row = lines.next().ok_or_else(|| format!("missing row {i}"))?;
        let entries: Vec<&str> = row.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        let entries: Vec<&str> = if entries.len() == 1 && n > 1 {
            row.split("").filter(|s| !s.is_empty()).collect()
        } else {
            entries
        };
        if entries.len() != n {
            return Err(format!("row {i} has {} entries, expected {n}", entries.len()));
        }
        for (j, e) in entries.iter().enumerate() {
            match *e {
                "0" => {}
                "1" if i != j => {
                    if i < j {
                        g.add_edge(i, j)
                    }
                }
                _ => return Err(format!("bad entry {e:?} at ({i},{j})")),
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indices_are_lexicographic() {
        let n = 5;
        for (k, (i, j)) in all_pairs(n).into_iter().enumerate() {
            assert_eq!(pair_index(n, i, j), k);
            assert_eq!(pair_index(n, j, i), k);
        }
    }

    #[test]
    fn forests_and_components() {
        assert!(SimpleGraph::path(5).is_forest());
        assert!(!SimpleGraph::complete(3).is_forest());
        assert!(SimpleGraph::empty(4).is_forest());
        let g = SimpleGraph::from_edges(4, &[(0, 1), (2, 3)]);
        assert!(g.connected(0, 1) && !g.connected(1, 2));
    }

    #[test]
    fn independence_numbers() {
        assert_eq!(SimpleGraph::complete(5).independence_number(), 1);
        assert_eq!(SimpleGraph::path(4).independence_number(), 2);
        assert_eq!(SimpleGraph::empty(3).independence_number(), 3);
    }

    #[test]
    fn minors_of_small_graphs() {
        let claw = SimpleGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let k3 = SimpleGraph::complete(3);
        assert!(!SimpleGraph::path(6).has_minor(&claw));
        let spider = SimpleGraph::from_edges(7, &[(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)]);
        assert!(spider.has_minor(&claw));
        let c5 = SimpleGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        assert!(c5.has_minor(&k3) && !c5.contains_subgraph(&k3));
        assert!(SimpleGraph::complete(5).has_minor(&SimpleGraph::complete(5)));
        assert!(!SimpleGraph::complete(5).has_minor(&SimpleGraph::complete(6)));
    }

    fn minor_by_labelling(g: &SimpleGraph, t: &SimpleGraph) -> bool {
        let h = t.n;
        let total = (h + 1).pow(g.n as u32);
        (0..total).any(|mut code| {
            let mut sets = vec![0u64; h];
            for u in 0..g.n {
                let l = code % (h + 1);
                code /= h + 1;
                if l < h {
                    sets[l] |= 1 << u;
                }
            }
            sets.iter().all(|&s| g.induces_connected(s))
                && t.edges().into_iter().all(|(a, b)| bits(sets[a]).any(|u| g.neighbours(u) & sets[b] != 0))
        })
    }

    #[test]
    fn partition_search_agrees_with_labelling_search() {
        let k4 = SimpleGraph::complete(4);
        let claw = SimpleGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        for mask in [0u64, 0b1111_1111_1111, 0b1010_1101_0111, 0b0110_0101_1011, 0b0000_1100_0110] {
            let g = SimpleGraph::from_pair_mask(6, mask);
            assert_eq!(g.has_minor(&k4), minor_by_labelling(&g, &k4));
            assert_eq!(g.has_minor(&claw), minor_by_labelling(&g, &claw));
        }
    }

    #[test]
    fn isomorphism_class_counts() {
        let counts: Vec<usize> = (1..=5).map(|n| graphs_up_to_isomorphism(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34]);
    }

    #[test]
    fn adjacency_text_round_trip() {
        let g = parse_adjacency("3\n0 1 0\n1 0 1\n0 1 0\n").unwrap();
        assert_eq!(g, SimpleGraph::path(3));
        let g = parse_adjacency("3\n010\n101\n010\n").unwrap();
        assert_eq!(g, SimpleGraph::path(3));
        assert!(parse_adjacency("2\n0 2\n2 0\n").is_err());
    }
}
