//! Electric networks: effective resistance, hitting and commute times, the
//! bipartite double cover, the electric quantum walk, and learning graphs run
//! as walks on their subset lattice.

use crate::functions::PartialFunction;
use crate::graphs::bits;
use crate::learning_graphs::LearningGraph;
use crate::numerics::{solve_linear, Mat, Vector};
use crate::quantum_sim::{phase_detection, CVec, WalkConstants, C64, DIM_BUDGET};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("marked set is empty")]
    NoMarked,
    #[error("marked set unreachable from vertex {0}")]
    Unreachable(usize),
    #[error("walk space of dimension {0} exceeds the budget of {1}")]
    Budget(usize, usize),
    #[error("parse error on line {0}: {1}")]
    Parse(usize, String),
}

/// Undirected graph with positive edge weights and an optional bipartition
/// (`part_a[u]` true for vertices of part A).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub part_a: Option<Vec<bool>>,
}

/// Edge flows oriented along `edges[e] = (u, v, _)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowAssignment {
    pub flows: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self, WalkError> {
        for &(u, v, w) in &edges {
            if u >= n || v >= n || u == v {
                return Err(WalkError::Invalid(format!("bad edge {u}-{v}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(WalkError::Invalid(format!("edge {u}-{v} has weight {w}")));
            }
        }
        Ok(WeightedGraph { n, edges, part_a: None })
    }

    pub fn with_bipartition(mut self, part_a: Vec<bool>) -> Result<Self, WalkError> {
        if part_a.len() != self.n || self.edges.iter().any(|&(u, v, _)| part_a[u] == part_a[v]) {
            return Err(WalkError::Invalid("not a bipartition".into()));
        }
        self.part_a = Some(part_a);
        Ok(self)
    }

    /// Two-colours the graph from vertex 0 of each component, if possible.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let mut side = vec![None; self.n];
        let adj = self.adjacency();
        for s in 0..self.n {
            if side[s].is_some() {
                continue;
            }
            side[s] = Some(true);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &(v, _, _) in &adj[u] {
                    match side[v] {
                        None => {
                            side[v] = Some(!side[u].unwrap());
                            queue.push_back(v);
                        }
                        Some(c) if c == side[u].unwrap() => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(side.into_iter().map(|c| c.unwrap()).collect())
    }

    /// A bipartition with the support of `σ` on side A, flipping components
    /// as needed. `None` if the graph is not bipartite or some component has
    /// σ-mass on both sides.
    pub fn bipartition_for(&self, sigma: &[f64]) -> Option<Vec<bool>> {
        let mut side = self.bipartition()?;
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                for &(v, _, _) in &adj[comp[i]] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
                i += 1;
            }
            let on = |a: bool| comp.iter().any(|&u| sigma[u] > 0.0 && side[u] == a);
            match (on(true), on(false)) {
                (true, true) => return None,
                (false, true) => comp.iter().for_each(|&u| side[u] = !side[u]),
                _ => {}
            }
        }
        Some(side)
    }

    /// `u v w` lines; blank lines and `#` comments are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self, WalkError> {
        let mut edges = vec![];
        let mut n = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(WalkError::Parse(i + 1, "expected `u v w`".into()));
            }
            let u: usize = parts[0].parse().map_err(|e| WalkError::Parse(i + 1, format!("{e}")))?;
            let v: usize = parts[1].parse().map_err(|e| WalkError::Parse(i + 1, format!("{e}")))?;
            let w: f64 = parts[2].parse().map_err(|e| WalkError::Parse(i + 1, format!("{e}")))?;
            n = n.max(u + 1).max(v + 1);
            edges.push((u, v, w));
        }
        WeightedGraph::new(n, edges)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Per vertex: `(neighbour, edge index, weight)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize, f64)>> {
        let mut adj = vec![vec![]; self.n];
        for (e, &(u, v, w)) in self.edges.iter().enumerate() {
            adj[u].push((v, e, w));
            adj[v].push((u, e, w));
        }
        adj
    }

    pub fn vertex_weight(&self, u: usize) -> f64 {
        self.edges.iter().filter(|e| e.0 == u || e.1 == u).map(|e| e.2).sum()
    }

    fn reaching(&self, marked: &[usize]) -> Vec<bool> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut queue: VecDeque<usize> = marked.iter().copied().collect();
        for &m in marked {
            seen[m] = true;
        }
        while let Some(u) = queue.pop_front() {
            for &(v, _, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    fn check_inputs(&self, sigma: &[f64], marked: &[usize]) -> Result<(Vec<bool>, Vec<bool>), WalkError> {
        if sigma.len() != self.n || sigma.iter().any(|&s| s < 0.0) || (sigma.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(WalkError::Invalid("σ must be a distribution on the vertices".into()));
        }
        if marked.is_empty() {
            return Err(WalkError::NoMarked);
        }
        if let Some(&m) = marked.iter().find(|&&m| m >= self.n) {
            return Err(WalkError::Invalid(format!("marked vertex {m} out of range")));
        }
        let reach = self.reaching(marked);
        if let Some(u) = (0..self.n).find(|&u| sigma[u] > 0.0 && !reach[u]) {
            return Err(WalkError::Unreachable(u));
        }
        let mut is_marked = vec![false; self.n];
        for &m in marked {
            is_marked[m] = true;
        }
        Ok((reach, is_marked))
    }

    /// Grounded system over the free vertices (reaching M, unmarked).
    fn free_vertices(&self, reach: &[bool], is_marked: &[bool]) -> (Vec<usize>, Vec<Option<usize>>) {
        let free: Vec<usize> = (0..self.n).filter(|&u| reach[u] && !is_marked[u]).collect();
        let mut pos = vec![None; self.n];
        for (i, &u) in free.iter().enumerate() {
            pos[u] = Some(i);
        }
        (free, pos)
    }
}

/// Effective resistance from `σ` to `M` and the optimal (electric) flow:
/// potentials solve the weighted Laplacian with `M` grounded and currents `σ`
/// injected; the energy `Σ p²/w` equals `σ·φ`.
pub fn effective_resistance(g: &WeightedGraph, sigma: &[f64], marked: &[usize]) -> Result<(f64, FlowAssignment), WalkError> {
    let (reach, is_marked) = g.check_inputs(sigma, marked)?;
    let (free, pos) = g.free_vertices(&reach, &is_marked);
    let k = free.len();
    let mut lap = Mat::zeros(k, k);
    for &(u, v, w) in &g.edges {
        if let Some(i) = pos[u] {
            lap[(i, i)] += w;
        }
        if let Some(j) = pos[v] {
            lap[(j, j)] += w;
        }
        if let (Some(i), Some(j)) = (pos[u], pos[v]) {
            lap[(i, j)] -= w;
            lap[(j, i)] -= w;
        }
    }
    let rhs = Vector::from_iterator(k, free.iter().map(|&u| sigma[u]));
    let phi = if k == 0 {
        Vector::zeros(0)
    } else {
        solve_linear(&lap, &rhs, 1e-14).map_err(|e| WalkError::Invalid(e.to_string()))?.0
    };
    let pot = |u: usize| pos[u].map_or(0.0, |i| phi[i]);
    let flows: Vec<f64> = g.edges.iter().map(|&(u, v, w)| w * (pot(u) - pot(v))).collect();
    let flow = FlowAssignment { flows };
    Ok((flow_energy(g, &flow), flow))
}

pub fn flow_energy(g: &WeightedGraph, flow: &FlowAssignment) -> f64 {
    g.edges.iter().zip(&flow.flows).map(|(e, p)| p * p / e.2).sum()
}

/// Largest violation of `σ_u = Σ_v p_uv` over unmarked vertices.
pub fn conservation_violation(g: &WeightedGraph, flow: &FlowAssignment, sigma: &[f64], marked: &[usize]) -> f64 {
    let mut out = vec![0.0; g.n];
    for (&(u, v, _), &p) in g.edges.iter().zip(&flow.flows) {
        out[u] += p;
        out[v] -= p;
    }
    (0..g.n).filter(|u| !marked.contains(u)).map(|u| (out[u] - sigma[u]).abs()).fold(0.0, f64::max)
}

/// Per-vertex hitting times `H_{u,M}` of the weighted random walk
/// (`None` where `M` is unreachable).
pub fn hitting_times(g: &WeightedGraph, marked: &[usize]) -> Result<Vec<Option<f64>>, WalkError> {
    if marked.is_empty() {
        return Err(WalkError::NoMarked);
    }
    let reach = g.reaching(marked);
    let mut is_marked = vec![false; g.n];
    for &m in marked {
        is_marked[m] = true;
    }
    let (free, pos) = g.free_vertices(&reach, &is_marked);
    let k = free.len();
    let mut m = Mat::identity(k, k);
    for (i, &u) in free.iter().enumerate() {
        let wu = g.vertex_weight(u);
        for &(v, _, w) in &g.adjacency()[u] {
            if let Some(j) = pos[v] {
                m[(i, j)] -= w / wu;
            }
        }
    }
    let h = if k == 0 {
        Vector::zeros(0)
    } else {
        solve_linear(&m, &Vector::from_element(k, 1.0), 1e-14).map_err(|e| WalkError::Invalid(e.to_string()))?.0
    };
    Ok((0..g.n).map(|u| if is_marked[u] { Some(0.0) } else { pos[u].map(|i| h[i]) }).collect())
}

/// `H_{σ,M} = Σ σ_u H_{u,M}`.
pub fn hitting_time(g: &WeightedGraph, sigma: &[f64], marked: &[usize]) -> Result<f64, WalkError> {
    g.check_inputs(sigma, marked)?;
    let h = hitting_times(g, marked)?;
    Ok((0..g.n).filter(|&u| sigma[u] > 0.0).map(|u| sigma[u] * h[u].expect("reachable")).sum())
}

fn point(n: usize, s: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[s] = 1.0;
    v
}

/// `(H_{s,t} + H_{t,s}, 2W·R_{s,t})`.
pub fn commute_identity_check(g: &WeightedGraph, s: usize, t: usize) -> Result<(f64, f64), WalkError> {
    let lhs = hitting_time(g, &point(g.n, s), &[t])? + hitting_time(g, &point(g.n, t), &[s])?;
    let (r, _) = effective_resistance(g, &point(g.n, s), &[t])?;
    Ok((lhs, 2.0 * g.total_weight() * r))
}

/// Double cover `V × {0,1}` with vertex `(u, i)` numbered `2u + i`; σ moves
/// to copy 0, both copies of marked vertices are marked, part A is copy 0.
pub fn bipartite_double(g: &WeightedGraph, sigma: &[f64], marked: &[usize]) -> Result<(WeightedGraph, Vec<f64>, Vec<usize>), WalkError> {
    if let Some(u) = (0..g.n).find(|&u| g.vertex_weight(u) == 0.0) {
        return Err(WalkError::Invalid(format!("vertex {u} is isolated")));
    }
    let mut edges = vec![];
    for &(u, v, w) in &g.edges {
        edges.push((2 * u, 2 * v + 1, w));
        edges.push((2 * u + 1, 2 * v, w));
    }
    let doubled = WeightedGraph::new(2 * g.n, edges)?.with_bipartition((0..2 * g.n).map(|x| x % 2 == 0).collect())?;
    let mut s2 = vec![0.0; 2 * g.n];
    for u in 0..g.n {
        s2[2 * u] = sigma[u];
    }
    let m2 = marked.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    Ok((doubled, s2, m2))
}

/// Instance ready for [`electric_walk_run`]: the graph itself with σ on part
/// A when possible, else its bipartite double. The flag reports doubling.
pub fn walk_instance(g: &WeightedGraph, sigma: &[f64], marked: &[usize]) -> Result<(WeightedGraph, Vec<f64>, Vec<usize>, bool), WalkError> {
    if sigma.len() != g.n {
        return Err(WalkError::Invalid(format!("σ has {} entries for {} vertices", sigma.len(), g.n)));
    }
    if let Some(part) = g.part_a.clone().filter(|p| (0..g.n).all(|u| sigma[u] <= 0.0 || p[u])).or_else(|| g.bipartition_for(sigma)) {
        let h = WeightedGraph::new(g.n, g.edges.clone())?.with_bipartition(part)?;
        return Ok((h, sigma.to_vec(), marked.to_vec(), false));
    }
    let (h, s, m) = bipartite_double(g, sigma, marked)?;
    Ok((h, s, m, true))
}

/// The electric quantum walk `R_B R_A` on `span{|u⟩ : u ∈ S} ⊕ span{|e⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectricWalk {
    /// Support of σ; basis index `i` for `support[i]`, edges follow.
    pub support: Vec<usize>,
    pub sigma: Vec<f64>,
    pub r_bound: f64,
    pub c1: f64,
    pub edge_count: usize,
    /// Per vertex: basis indices and amplitudes of `ψ_u`.
    psi: Vec<Vec<(usize, f64)>>,
    part_a: Vec<bool>,
    marked: Vec<bool>,
}

impl ElectricWalk {
    pub fn new(g: &WeightedGraph, sigma: &[f64], marked: &[usize], r_bound: f64, c1: f64) -> Result<Self, WalkError> {
        let part_a = g.part_a.clone().ok_or_else(|| WalkError::Invalid("graph has no bipartition".into()))?;
        if sigma.len() != g.n || (0..g.n).any(|u| sigma[u] > 0.0 && !part_a[u]) {
            return Err(WalkError::Invalid("σ must be supported on part A".into()));
        }
        if !(r_bound > 0.0) {
            return Err(WalkError::Invalid("resistance bound must be positive".into()));
        }
        let support: Vec<usize> = (0..g.n).filter(|&u| sigma[u] > 0.0).collect();
        let dim = support.len() + g.edges.len();
        if dim > DIM_BUDGET {
            return Err(WalkError::Budget(dim, DIM_BUDGET));
        }
        let mut psi = vec![vec![]; g.n];
        for (i, &u) in support.iter().enumerate() {
            psi[u].push((i, (sigma[u] / (c1 * r_bound)).sqrt()));
        }
        for (e, &(u, v, w)) in g.edges.iter().enumerate() {
            psi[u].push((support.len() + e, w.sqrt()));
            psi[v].push((support.len() + e, w.sqrt()));
        }
        let mut is_marked = vec![false; g.n];
        for &m in marked {
            is_marked[m] = true;
        }
        Ok(ElectricWalk { support, sigma: sigma.to_vec(), r_bound, c1, edge_count: g.edges.len(), psi, part_a, marked: is_marked })
    }

    pub fn dim(&self) -> usize {
        self.support.len() + self.edge_count
    }

    fn diffuse(&self, v: &mut CVec, side_a: bool) {
        for (u, psi) in self.psi.iter().enumerate() {
            if self.part_a[u] != side_a || self.marked[u] || psi.is_empty() {
                continue;
            }
            let norm2: f64 = psi.iter().map(|p| p.1 * p.1).sum();
            let c: C64 = psi.iter().map(|&(i, a)| v[i] * a).sum::<C64>() / norm2;
            for &(i, a) in psi {
                v[i] -= c * (2.0 * a);
            }
        }
    }

    pub fn step(&self, v: &CVec) -> CVec {
        let mut w = v.clone();
        self.diffuse(&mut w, true);
        self.diffuse(&mut w, false);
        w
    }

    pub fn dense_step(&self) -> Mat {
        let d = self.dim();
        let mut m = Mat::zeros(d, d);
        for c in 0..d {
            let mut e = CVec::zeros(d);
            e[c] = C64::new(1.0, 0.0);
            let col = self.step(&e);
            for r in 0..d {
                m[(r, c)] = col[r].re;
            }
        }
        m
    }

    /// `ς = Σ √σ_u |u⟩`.
    pub fn initial_state(&self) -> Vector {
        let mut v = Vector::zeros(self.dim());
        for (i, &u) in self.support.iter().enumerate() {
            v[i] = self.sigma[u].sqrt();
        }
        v
    }

    /// `√(C₁R) Σ √σ_u |u⟩ − Σ p_e/√w_e |e⟩` for a flow oriented from A to B.
    pub fn flow_vector(&self, g: &WeightedGraph, flow: &FlowAssignment) -> Vector {
        let mut v = self.initial_state() * (self.c1 * self.r_bound).sqrt();
        for (e, &(u, _, w)) in g.edges.iter().enumerate() {
            let p = if self.part_a[u] { flow.flows[e] } else { -flow.flows[e] };
            v[self.support.len() + e] = -p / w.sqrt();
        }
        v
    }

    /// `√(C₁R)(Σ √(σ_u/(C₁R)) |u⟩ + Σ √w_e |e⟩)`.
    pub fn negative_witness(&self, g: &WeightedGraph) -> Vector {
        let s = (self.c1 * self.r_bound).sqrt();
        let mut v = self.initial_state();
        for (e, &(_, _, w)) in g.edges.iter().enumerate() {
            v[self.support.len() + e] = s * w.sqrt();
        }
        v
    }

    /// Phase-detection precision `1/(C₂√(1 + C₁RW))`.
    pub fn delta(&self, total_weight: f64, c2: f64) -> f64 {
        1.0 / (c2 * (1.0 + self.c1 * self.r_bound * total_weight).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkOutcome {
    pub accept: bool,
    /// Walk steps applied (controlled applications of `R_B R_A`).
    pub steps: usize,
    /// Exact probability of accepting.
    pub p_accept: f64,
    pub caught_by_check: bool,
}

/// Measures the check register on `σ` first (accepting on a marked vertex),
/// then runs phase detection of `R_B R_A` from the collapsed state and accepts
/// iff phase 0 is detected.
pub fn electric_walk_run<R: Rng + ?Sized>(
    g: &WeightedGraph,
    sigma: &[f64],
    marked: &[usize],
    r_bound: f64,
    consts: WalkConstants,
    rng: &mut R,
) -> Result<WalkOutcome, WalkError> {
    let walk = ElectricWalk::new(g, sigma, marked, r_bound, consts.c1)?;
    let p_marked: f64 = marked.iter().map(|&m| sigma[m]).sum();
    let delta = walk.delta(g.total_weight(), consts.c2);
    if p_marked >= 1.0 - 1e-12 {
        return Ok(WalkOutcome { accept: true, steps: 0, p_accept: 1.0, caught_by_check: true });
    }
    let mut state = walk.initial_state();
    for (i, &u) in walk.support.iter().enumerate() {
        if walk.marked[u] {
            state[i] = 0.0;
        }
    }
    let state = crate::quantum_sim::to_complex(&state.normalize());
    let mut step = |v: &CVec| walk.step(v);
    let round = phase_detection(&mut step, delta, &state).map_err(|e| WalkError::Invalid(e.to_string()))?;
    let p_accept = p_marked + (1.0 - p_marked) * round.p_zero;
    if rng.gen::<f64>() < p_marked {
        return Ok(WalkOutcome { accept: true, steps: 0, p_accept, caught_by_check: true });
    }
    let accept = rng.gen::<f64>() < round.p_zero;
    Ok(WalkOutcome { accept, steps: round.controlled_applications, p_accept, caught_by_check: false })
}

/// A learning graph as a weighted graph on its vertices, part A holding the
/// even-cardinality sets, `σ` on the root.
#[derive(Debug, Clone, PartialEq)]
pub struct LgWalk {
    pub graph: WeightedGraph,
    pub sigma: Vec<f64>,
    /// Learning-graph vertex of each walk vertex.
    pub origin: Vec<usize>,
    pub r_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LgWalkOutcome {
    pub accept: bool,
    pub queries: usize,
    pub p_accept: f64,
}

/// Whether `set` holds a 1-certificate for `z`.
pub fn contains_certificate(f: &PartialFunction, z: &[u8], set: u64) -> bool {
    let idx: Vec<usize> = bits(set).collect();
    f.domain.iter().zip(&f.values).all(|(y, &v)| v || idx.iter().any(|&i| y[i] != z[i]))
}

impl LgWalk {
    /// Builds the walk; `R` is the largest effective resistance from the root
    /// to the marked sets over the positive inputs of `f`.
    pub fn new(lg: &LearningGraph, f: &PartialFunction) -> Result<Self, WalkError> {
        if lg.is_adaptive() {
            return Err(WalkError::Invalid("walk needs constant arc weights".into()));
        }
        let root = lg.find(0, 0).ok_or_else(|| WalkError::Invalid("learning graph has no root".into()))?;
        let mut reach = vec![false; lg.vertices.len()];
        reach[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for a in lg.arcs.iter().filter(|a| a.from == u && a.weight.nominal() > 0.0) {
                if !reach[a.to] {
                    reach[a.to] = true;
                    queue.push_back(a.to);
                }
            }
        }
        let origin: Vec<usize> = (0..lg.vertices.len()).filter(|&v| reach[v]).collect();
        let mut pos = vec![usize::MAX; lg.vertices.len()];
        for (i, &v) in origin.iter().enumerate() {
            pos[v] = i;
        }
        let edges = lg
            .arcs
            .iter()
            .filter(|a| reach[a.from] && a.weight.nominal() > 0.0)
            .map(|a| (pos[a.from], pos[a.to], a.weight.nominal()))
            .collect();
        let part_a = origin.iter().map(|&v| lg.vertices[v].set.count_ones() % 2 == 0).collect();
        let graph = WeightedGraph::new(origin.len(), edges)?.with_bipartition(part_a)?;
        let mut sigma = vec![0.0; origin.len()];
        sigma[pos[root]] = 1.0;
        let mut walk = LgWalk { graph, sigma, origin, r_bound: 0.0 };
        for x in f.positives() {
            let marked = walk.marked(lg, f, &f.domain[x]);
            let (r, _) = effective_resistance(&walk.graph, &walk.sigma, &marked)?;
            walk.r_bound = walk.r_bound.max(r);
        }
        if walk.r_bound == 0.0 {
            walk.r_bound = 1.0;
        }
        Ok(walk)
    }

    pub fn marked(&self, lg: &LearningGraph, f: &PartialFunction, z: &[u8]) -> Vec<usize> {
        (0..self.origin.len()).filter(|&i| contains_certificate(f, z, lg.vertices[self.origin[i]].set)).collect()
    }

    /// One run on input `z`; two queries are charged per walk step.
    pub fn run<R: Rng + ?Sized>(&self, lg: &LearningGraph, f: &PartialFunction, z: &[u8], consts: WalkConstants, rng: &mut R) -> Result<LgWalkOutcome, WalkError> {
        let marked = self.marked(lg, f, z);
        let out = electric_walk_run(&self.graph, &self.sigma, &marked, self.r_bound, consts, rng)?;
        Ok(LgWalkOutcome { accept: out.accept, queries: 2 * out.steps, p_accept: out.p_accept })
    }
}

/// Runs a learning graph as an electric walk on input `z`.
pub fn lg_as_walk<R: Rng + ?Sized>(
    lg: &LearningGraph,
    f: &PartialFunction,
    z: &[u8],
    consts: WalkConstants,
    rng: &mut R,
) -> Result<LgWalkOutcome, WalkError> {
    LgWalk::new(lg, f)?.run(lg, f, z, consts, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{make_named, Family};
    use crate::learning_graphs::{or_lg, trivial_lg};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path3() -> WeightedGraph {
        WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn resistances() {
        let g = WeightedGraph::new(2, vec![(0, 1, 4.0)]).unwrap();
        assert!((effective_resistance(&g, &[1.0, 0.0], &[1]).unwrap().0 - 0.25).abs() < 1e-12);
        let (r, flow) = effective_resistance(&path3(), &[1.0, 0.0, 0.0], &[2]).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        assert!(conservation_violation(&path3(), &flow, &[1.0, 0.0, 0.0], &[2]) < 1e-12);
        let tri = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert!((effective_resistance(&tri, &[1.0, 0.0, 0.0], &[1]).unwrap().0 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(effective_resistance(&tri, &[1.0, 0.0, 0.0], &[]), Err(WalkError::NoMarked));
    }

    #[test]
    fn hitting_and_commute() {
        assert_eq!(hitting_time(&path3(), &[0.0, 0.0, 1.0], &[2]).unwrap(), 0.0);
        assert!((hitting_time(&path3(), &[1.0, 0.0, 0.0], &[2]).unwrap() - 4.0).abs() < 1e-12);
        let (l, r) = commute_identity_check(&path3(), 0, 2).unwrap();
        assert!((l - 8.0).abs() < 1e-9 && (r - 8.0).abs() < 1e-9);
        let g = WeightedGraph::new(2, vec![(0, 1, 3.0)]).unwrap();
        let (l, r) = commute_identity_check(&g, 0, 1).unwrap();
        assert!((l - 2.0).abs() < 1e-12 && (r - 2.0).abs() < 1e-12);
        let k4 = WeightedGraph::new(4, vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]).unwrap();
        let pi = vec![0.25; 4];
        let h = hitting_time(&k4, &pi, &[3]).unwrap();
        let r = effective_resistance(&k4, &pi, &[3]).unwrap().0;
        assert!((h - 2.0 * 6.0 * r).abs() < 1e-9);
        let disc = WeightedGraph::new(3, vec![(0, 1, 1.0)]).unwrap();
        assert_eq!(hitting_time(&disc, &[0.0, 0.0, 1.0], &[0]), Err(WalkError::Unreachable(2)));
    }

    #[test]
    fn doubling() {
        let tri = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let (d, s, m) = bipartite_double(&tri, &[1.0, 0.0, 0.0], &[1]).unwrap();
        assert_eq!(d.edges.len(), 6);
        assert!((0..6).all(|u| d.adjacency()[u].len() == 2));
        assert!(d.bipartition().is_some());
        assert_eq!(d.total_weight(), 2.0 * tri.total_weight());
        let r = effective_resistance(&tri, &[1.0, 0.0, 0.0], &[1]).unwrap().0;
        assert!(effective_resistance(&d, &s, &m).unwrap().0 <= r + 1e-12);
        assert!(bipartite_double(&WeightedGraph::new(1, vec![]).unwrap(), &[1.0], &[0]).is_err());
    }

    #[test]
    fn walk_instances() {
        let p = path3();
        let (h, _, _, doubled) = walk_instance(&p, &[0.0, 1.0, 0.0], &[0]).unwrap();
        assert!(!doubled && h.part_a.as_ref().unwrap()[1]);
        let two = WeightedGraph::new(4, vec![(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let part = two.bipartition_for(&[0.0, 0.5, 0.5, 0.0]).unwrap();
        assert!(part[1] && part[2] && !part[0] && !part[3]);
        assert!(p.bipartition_for(&[0.5, 0.5, 0.0]).is_none());
        let (h, s, m, doubled) = walk_instance(&p, &[0.5, 0.5, 0.0], &[2]).unwrap();
        assert!(doubled && h.n == 6 && s[0] == 0.5 && s[2] == 0.5 && m == vec![4, 5]);
        let tri = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert!(walk_instance(&tri, &[1.0, 0.0, 0.0], &[2]).unwrap().3);
    }

    fn star(leaves: usize) -> WeightedGraph {
        let mut part = vec![false; leaves + 1];
        part[0] = true;
        WeightedGraph::new(leaves + 1, (1..=leaves).map(|l| (0, l, 1.0)).collect()).unwrap().with_bipartition(part).unwrap()
    }

    #[test]
    fn walk_on_star() {
        let g = star(4);
        let mut sigma = vec![0.0; 5];
        sigma[0] = 1.0;
        let consts = WalkConstants::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pos = electric_walk_run(&g, &sigma, &[3], 1.0, consts, &mut rng).unwrap();
        assert!(pos.p_accept > 2.0 / 3.0, "{}", pos.p_accept);
        let neg = electric_walk_run(&g, &sigma, &[], 1.0, consts, &mut rng).unwrap();
        assert!(neg.p_accept < 1.0 / 3.0, "{}", neg.p_accept);
        let caught = electric_walk_run(&g, &sigma, &[0], 1.0, consts, &mut rng).unwrap();
        assert!(caught.accept && caught.caught_by_check && caught.steps == 0);
        let walk = ElectricWalk::new(&g, &sigma, &[3], 1.0, consts.c1).unwrap();
        let (_, flow) = effective_resistance(&g, &sigma, &[3]).unwrap();
        let phi = crate::quantum_sim::to_complex(&walk.flow_vector(&g, &flow));
        assert!((walk.step(&phi) - &phi).norm() < 1e-9);
    }

    #[test]
    fn learning_graph_walks() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let consts = WalkConstants::default();
        let or3 = make_named(&Family::Or { n: 3 }).unwrap();
        let (lg, _) = or_lg(3);
        let walk = LgWalk::new(&lg, &or3).unwrap();
        let pos = walk.run(&lg, &or3, &[0, 1, 0], consts, &mut rng).unwrap();
        let neg = walk.run(&lg, &or3, &[0, 0, 0], consts, &mut rng).unwrap();
        assert!(pos.p_accept > 2.0 / 3.0 && neg.p_accept < 1.0 / 3.0);
        assert_eq!(pos.queries % 2, 0);
        let and2 = make_named(&Family::And { n: 2 }).unwrap();
        let (lg, _) = trivial_lg(2);
        for (z, v) in and2.domain.iter().zip(&and2.values) {
            let out = lg_as_walk(&lg, &and2, z, consts, &mut rng).unwrap();
            assert_eq!(out.p_accept > 0.5, *v, "{z:?}");
        }
    }
}
