//! Span programs: evaluation, minimal witnesses, witness sizes, the
//! free-vector and canonical-form transformations, and the graph
//! constructions (st-connectivity, subdivided stars, triangles versus
//! forests, closed-walk traversals).

use crate::functions::{Input, PartialFunction};
use crate::graphs::{pair_index, SimpleGraph};
use crate::numerics::{kernel_basis, min_norm_solution, range_basis, sym_eigen, Mat, Vector};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

/// Residual under which the target counts as spanned.
pub const SPAN_TOL: f64 = 1e-8;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpanError {
    #[error("target vector is zero")]
    ZeroTarget,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("input {0:?} has no {1:?} witness")]
    WrongKind(Input, WitnessKind),
    #[error("program value {got} disagrees with f = {want} on {input:?}")]
    Mismatch { input: Input, got: bool, want: bool },
    #[error("missing stored {1:?} witness for {0:?}")]
    MissingWitness(Input, WitnessKind),
    #[error("free vectors span the target")]
    Degenerate,
    #[error("rebalancing factor must be positive, got {0}")]
    BadFactor(f64),
    #[error("program is not canonical: {0}")]
    NotCanonical(String),
    #[error("invalid construction: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Var { j: usize, b: u8 },
    Always,
    Never,
}

impl Label {
    pub fn available(&self, z: &[u8]) -> bool {
        match *self {
            Label::Var { j, b } => z[j] == b,
            Label::Always => true,
            Label::Never => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputVector {
    pub v: Vec<f64>,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WitnessKind {
    Positive,
    Negative,
}

/// Positive: coefficients over all input vectors. Negative: an ambient vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub input: Input,
    pub kind: WitnessKind,
    pub vector: Vec<f64>,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanProgram {
    /// Number of input variables.
    pub n: usize,
    pub dim: usize,
    pub target: Vec<f64>,
    pub inputs: Vec<InputVector>,
    pub free: Vec<Vec<f64>>,
    #[serde(default)]
    pub stored: Vec<WitnessRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessSizes {
    pub w0: f64,
    pub w1: f64,
    pub wsize: f64,
}

fn columns(vs: &[&Vec<f64>], dim: usize) -> Mat {
    let mut m = Mat::zeros(dim, vs.len());
    for (c, v) in vs.iter().enumerate() {
        for (r, &x) in v.iter().enumerate() {
            m[(r, c)] = x;
        }
    }
    m
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SpanProgram {
    pub fn new(n: usize, target: Vec<f64>, inputs: Vec<InputVector>, free: Vec<Vec<f64>>) -> Result<Self, SpanError> {
        let dim = target.len();
        if target.iter().all(|&x| x == 0.0) {
            return Err(SpanError::ZeroTarget);
        }
        for v in inputs.iter().map(|i| &i.v).chain(free.iter()) {
            if v.len() != dim {
                return Err(SpanError::Dimension(format!("vector of length {} in dimension {dim}", v.len())));
            }
        }
        for i in &inputs {
            if let Label::Var { j, .. } = i.label {
                if j >= n {
                    return Err(SpanError::Dimension(format!("label variable {j} >= n = {n}")));
                }
            }
        }
        Ok(SpanProgram { n, dim, target, inputs, free, stored: vec![] })
    }

    pub fn available(&self, z: &[u8]) -> Vec<usize> {
        (0..self.inputs.len()).filter(|&i| self.inputs[i].label.available(z)).collect()
    }

    fn input_matrix(&self, idx: &[usize]) -> Mat {
        columns(&idx.iter().map(|&i| &self.inputs[i].v).collect::<Vec<_>>(), self.dim)
    }

    fn all_inputs(&self) -> Mat {
        columns(&self.inputs.iter().map(|i| &i.v).collect::<Vec<_>>(), self.dim)
    }

    fn free_matrix(&self) -> Mat {
        columns(&self.free.iter().collect::<Vec<_>>(), self.dim)
    }

    fn target_vector(&self) -> Vector {
        Vector::from_column_slice(&self.target)
    }

    /// Projector onto the orthogonal complement of the free span.
    fn free_complement(&self) -> Mat {
        let q = range_basis(&self.free_matrix(), RANK_TOL);
        Mat::identity(self.dim, self.dim) - &q * q.transpose()
    }

    pub fn stored_witness(&self, z: &[u8], kind: WitnessKind) -> Option<&WitnessRecord> {
        self.stored.iter().find(|w| w.kind == kind && w.input == z)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("program serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SpanError> {
        let p: SpanProgram = serde_json::from_str(text).map_err(|e| SpanError::Invalid(e.to_string()))?;
        let stored = p.stored.clone();
        let mut q = SpanProgram::new(p.n, p.target, p.inputs, p.free)?;
        q.stored = stored;
        Ok(q)
    }
}

/// Distance from `τ` to the span of the available and free vectors.
pub fn span_residual(p: &SpanProgram, z: &[u8]) -> f64 {
    let avail = p.available(z);
    let mut vs: Vec<&Vec<f64>> = avail.iter().map(|&i| &p.inputs[i].v).collect();
    vs.extend(p.free.iter());
    let u = range_basis(&columns(&vs, p.dim), RANK_TOL);
    let t = p.target_vector();
    (&t - &u * (u.transpose() * &t)).norm()
}

pub fn evaluate(p: &SpanProgram, z: &[u8]) -> bool {
    let scale = p.target_vector().norm().max(1.0);
    span_residual(p, z) <= SPAN_TOL * scale
}

/// Least-norm `w` supported on available vectors with `V w ≡ τ` modulo the free span.
pub fn positive_witness(p: &SpanProgram, z: &[u8]) -> Result<WitnessRecord, SpanError> {
    let avail = p.available(z);
    let pi = p.free_complement();
    let a = &pi * p.input_matrix(&avail);
    let b = &pi * p.target_vector();
    let scale = p.target_vector().norm().max(1.0);
    let w = min_norm_solution(&a, &b, RANK_TOL)
        .filter(|w| (&a * w - &b).norm() <= SPAN_TOL * scale)
        .ok_or_else(|| SpanError::WrongKind(z.to_vec(), WitnessKind::Positive))?;
    let mut coeff = vec![0.0; p.inputs.len()];
    for (k, &i) in avail.iter().enumerate() {
        coeff[i] = w[k];
    }
    let size = w.norm_squared();
    Ok(WitnessRecord { input: z.to_vec(), kind: WitnessKind::Positive, vector: coeff, size })
}

/// Minimises `‖V* w'‖²` over `w'` orthogonal to the available and free
/// vectors with `⟨τ, w'⟩ = 1`; among minimisers the least-norm one.
pub fn negative_witness(p: &SpanProgram, z: &[u8]) -> Result<WitnessRecord, SpanError> {
    let avail = p.available(z);
    let mut vs: Vec<&Vec<f64>> = avail.iter().map(|&i| &p.inputs[i].v).collect();
    vs.extend(p.free.iter());
    let k = kernel_basis(&columns(&vs, p.dim).transpose(), RANK_TOL);
    let tau = p.target_vector();
    let t = k.transpose() * &tau;
    if t.norm() <= SPAN_TOL * tau.norm().max(1.0) {
        return Err(SpanError::WrongKind(z.to_vec(), WitnessKind::Negative));
    }
    let vk = p.all_inputs().transpose() * &k;
    let g = vk.transpose() * &vk;
    let (vals, vecs) = sym_eigen(&g, 1e-8).map_err(|e| SpanError::Invalid(e.to_string()))?;
    let top = vals.last().copied().unwrap_or(0.0).max(1.0);
    let mut kern = Vector::zeros(t.len());
    let mut pinv_t = Vector::zeros(t.len());
    for (i, &l) in vals.iter().enumerate() {
        let col = vecs.column(i);
        let c = col.dot(&t);
        if l <= 1e-12 * top {
            kern += col * c;
        } else {
            pinv_t += col * (c / l);
        }
    }
    let c = if kern.norm() > 1e-6 * t.norm() {
        &kern / kern.norm_squared()
    } else {
        let denom = t.dot(&pinv_t);
        &pinv_t / denom
    };
    let w = &k * c;
    let size = (p.all_inputs().transpose() * &w).norm_squared();
    Ok(WitnessRecord { input: z.to_vec(), kind: WitnessKind::Negative, vector: w.iter().copied().collect(), size })
}

/// Residual of a witness against its defining constraints.
pub fn witness_residual(p: &SpanProgram, w: &WitnessRecord) -> f64 {
    match w.kind {
        WitnessKind::Positive => {
            let avail = p.available(&w.input);
            let off: f64 = (0..p.inputs.len()).filter(|i| !avail.contains(i)).map(|i| w.vector[i].abs()).sum();
            let mut v = Vector::zeros(p.dim);
            for (i, &c) in w.vector.iter().enumerate() {
                if c != 0.0 {
                    v += Vector::from_column_slice(&p.inputs[i].v) * c;
                }
            }
            let r = p.free_complement() * (v - p.target_vector());
            r.norm() + off
        }
        WitnessKind::Negative => {
            let mut worst = (dot(&p.target, &w.vector) - 1.0).abs();
            for i in p.available(&w.input) {
                worst = worst.max(dot(&p.inputs[i].v, &w.vector).abs());
            }
            for f in &p.free {
                worst = worst.max(dot(f, &w.vector).abs());
            }
            worst
        }
    }
}

/// Size recomputed from the witness vector.
pub fn witness_vector_size(p: &SpanProgram, w: &WitnessRecord) -> f64 {
    match w.kind {
        WitnessKind::Positive => w.vector.iter().map(|x| x * x).sum(),
        WitnessKind::Negative => p.inputs.iter().map(|i| dot(&i.v, &w.vector).powi(2)).sum(),
    }
}

/// `(W0, W1, √(W0·W1))` over the domain of `f`, from minimal witnesses or
/// from the stored ones.
pub fn witness_size(p: &SpanProgram, f: &PartialFunction, use_stored: bool) -> Result<WitnessSizes, SpanError> {
    let mut w = [0.0f64; 2];
    for (z, &v) in f.domain.iter().zip(&f.values) {
        let kind = if v { WitnessKind::Positive } else { WitnessKind::Negative };
        let size = if use_stored {
            p.stored_witness(z, kind).ok_or_else(|| SpanError::MissingWitness(z.clone(), kind))?.size
        } else {
            let got = evaluate(p, z);
            if got != v {
                return Err(SpanError::Mismatch { input: z.clone(), got, want: v });
            }
            if v {
                positive_witness(p, z)?.size
            } else {
                negative_witness(p, z)?.size
            }
        };
        w[v as usize] = w[v as usize].max(size);
    }
    Ok(WitnessSizes { w0: w[0], w1: w[1], wsize: (w[0] * w[1]).sqrt() })
}

/// Stores minimal witnesses for every domain input.
pub fn with_minimal_witnesses(p: &SpanProgram, f: &PartialFunction) -> Result<SpanProgram, SpanError> {
    let mut q = p.clone();
    q.stored.clear();
    for (z, &v) in f.domain.iter().zip(&f.values) {
        let w = if v { positive_witness(p, z)? } else { negative_witness(p, z)? };
        q.stored.push(w);
    }
    Ok(q)
}

/// Target scaled by `alpha`; stored witnesses follow.
pub fn rebalance(p: &SpanProgram, alpha: f64) -> Result<SpanProgram, SpanError> {
    if !(alpha > 0.0) {
        return Err(SpanError::BadFactor(alpha));
    }
    let mut q = p.clone();
    q.target.iter_mut().for_each(|x| *x *= alpha);
    for w in &mut q.stored {
        let s = match w.kind {
            WitnessKind::Positive => alpha,
            WitnessKind::Negative => 1.0 / alpha,
        };
        w.vector.iter_mut().for_each(|x| *x *= s);
        w.size *= s * s;
    }
    Ok(q)
}

/// Rewrites the program in coordinates of the orthogonal complement of the free span.
pub fn eliminate_free(p: &SpanProgram) -> Result<SpanProgram, SpanError> {
    if p.free.is_empty() {
        return Ok(p.clone());
    }
    let b = kernel_basis(&p.free_matrix().transpose(), RANK_TOL);
    let project = |v: &[f64]| -> Vec<f64> { (b.transpose() * Vector::from_column_slice(v)).iter().copied().collect() };
    let target = project(&p.target);
    if target.iter().map(|x| x * x).sum::<f64>().sqrt() <= SPAN_TOL * p.target_vector().norm().max(1.0) {
        return Err(SpanError::Degenerate);
    }
    let inputs = p.inputs.iter().map(|i| InputVector { v: project(&i.v), label: i.label }).collect();
    let mut q = SpanProgram::new(p.n, target, inputs, vec![])?;
    q.stored = p
        .stored
        .iter()
        .map(|w| match w.kind {
            WitnessKind::Positive => w.clone(),
            WitnessKind::Negative => WitnessRecord { vector: project(&w.vector), ..w.clone() },
        })
        .collect();
    Ok(q)
}

/// Applies `A = Σ_y e_y w'_y*` built from the stored negative witnesses:
/// the result lives on the negative inputs of `f`, has the all-ones target,
/// and keeps every witness size.
pub fn canonicalize(p: &SpanProgram, f: &PartialFunction) -> Result<SpanProgram, SpanError> {
    let negs = f.negatives();
    let mut rows = vec![];
    for &y in &negs {
        let z = &f.domain[y];
        rows.push(
            p.stored_witness(z, WitnessKind::Negative)
                .ok_or_else(|| SpanError::MissingWitness(z.clone(), WitnessKind::Negative))?
                .vector
                .clone(),
        );
    }
    let image = |v: &[f64]| -> Vec<f64> { rows.iter().map(|w| dot(w, v)).collect() };
    let target = image(&p.target);
    let inputs = p.inputs.iter().map(|i| InputVector { v: image(&i.v), label: i.label }).collect();
    let mut q = SpanProgram::new(p.n, target, inputs, vec![])?;
    for w in &p.stored {
        match w.kind {
            WitnessKind::Positive => q.stored.push(w.clone()),
            WitnessKind::Negative => {
                let k = negs.iter().position(|&y| f.domain[y] == w.input).expect("negative of f");
                let mut e = vec![0.0; negs.len()];
                e[k] = 1.0;
                let size = q.inputs.iter().map(|i| i.v[k] * i.v[k]).sum();
                q.stored.push(WitnessRecord { vector: e, size, ..w.clone() });
            }
        }
    }
    Ok(q)
}

/// Largest violation of the canonical-form conditions: all-ones target over
/// the negative inputs, no free vectors, and `v_i[y] = 0` whenever `v_i` is
/// available on `y`.
pub fn canonical_violation(p: &SpanProgram, f: &PartialFunction) -> Result<f64, SpanError> {
    let negs = f.negatives();
    if p.dim != negs.len() {
        return Err(SpanError::NotCanonical(format!("dimension {} but {} negative inputs", p.dim, negs.len())));
    }
    let mut worst: f64 = p.target.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    for fv in &p.free {
        worst = worst.max(fv.iter().map(|x| x.abs()).fold(0.0, f64::max));
    }
    for (k, &y) in negs.iter().enumerate() {
        let z = &f.domain[y];
        for i in p.available(z) {
            worst = worst.max(p.inputs[i].v[k].abs());
        }
    }
    Ok(worst)
}

pub fn is_canonical(p: &SpanProgram, f: &PartialFunction, tol: f64) -> bool {
    canonical_violation(p, f).map_or(false, |v| v <= tol)
}

/// OR of `n` bits: the one-dimensional program with `v_j = 1` available when `z_j = 1`.
pub fn or_program(n: usize) -> SpanProgram {
    let inputs = (0..n).map(|j| InputVector { v: vec![1.0], label: Label::Var { j, b: 1 } }).collect();
    SpanProgram::new(n, vec![1.0], inputs, vec![]).expect("valid program")
}

/// Name of an ambient basis vector of a graph program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisName {
    S,
    T,
    /// Graph vertex with a copy index (`h_u^{(b)}`, `e_u^{(b)}`, walk positions).
    Vertex { u: usize, copy: usize },
}

/// A span program over the adjacency-matrix variables of a graph, with the
/// edges each vector contributes to the auxiliary graph `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphProgram {
    pub vertices: usize,
    pub program: SpanProgram,
    pub basis: Vec<BasisName>,
    pub input_edges: Vec<Vec<(usize, usize)>>,
    pub free_edges: Vec<Vec<(usize, usize)>>,
}

struct GraphProgramBuilder {
    vertices: usize,
    basis: Vec<BasisName>,
    inputs: Vec<(Vec<(usize, f64)>, Label, Vec<(usize, usize)>)>,
    free: Vec<(Vec<(usize, f64)>, Vec<(usize, usize)>)>,
}

impl GraphProgramBuilder {
    fn new(vertices: usize) -> Self {
        GraphProgramBuilder { vertices, basis: vec![BasisName::S, BasisName::T], inputs: vec![], free: vec![] }
    }

    fn add_basis(&mut self, name: BasisName) -> usize {
        self.basis.push(name);
        self.basis.len() - 1
    }

    /// Vector `Σ (to − from)` over the given arcs.
    fn arcs_vector(arcs: &[(usize, usize)]) -> Vec<(usize, f64)> {
        arcs.iter().flat_map(|&(a, b)| [(b, 1.0), (a, -1.0)]).collect()
    }

    fn edge_input(&mut self, u: usize, v: usize, arcs: Vec<(usize, usize)>) {
        let j = pair_index(self.vertices, u.min(v), u.max(v));
        self.inputs.push((Self::arcs_vector(&arcs), Label::Var { j, b: 1 }, arcs));
    }

    fn free_vector(&mut self, arcs: Vec<(usize, usize)>) {
        self.free.push((Self::arcs_vector(&arcs), arcs));
    }

    fn build(self) -> GraphProgram {
        let dim = self.basis.len();
        let dense = |sparse: &[(usize, f64)]| {
            let mut v = vec![0.0; dim];
            for &(i, x) in sparse {
                v[i] += x;
            }
            v
        };
        let mut target = vec![0.0; dim];
        target[0] = -1.0;
        target[1] = 1.0;
        let n = self.vertices * self.vertices.saturating_sub(1) / 2;
        let inputs = self.inputs.iter().map(|(v, l, _)| InputVector { v: dense(v), label: *l }).collect();
        let free = self.free.iter().map(|(v, _)| dense(v)).collect();
        GraphProgram {
            vertices: self.vertices,
            program: SpanProgram::new(n, target, inputs, free).expect("graph programs have target t - s"),
            basis: self.basis,
            input_edges: self.inputs.into_iter().map(|(_, _, e)| e).collect(),
            free_edges: self.free.into_iter().map(|(_, e)| e).collect(),
        }
    }
}

impl GraphProgram {
    pub fn evaluate(&self, g: &SimpleGraph) -> bool {
        evaluate(&self.program, &g.edge_bits())
    }

    /// Adjacency lists of `H` on input `g`: edges of available and free vectors.
    pub fn h_graph(&self, g: &SimpleGraph) -> Vec<Vec<usize>> {
        let z = g.edge_bits();
        let mut adj = vec![vec![]; self.basis.len()];
        let avail = self.program.available(&z);
        for (a, b) in avail.iter().flat_map(|&i| self.input_edges[i].iter()).chain(self.free_edges.iter().flatten()) {
            adj[*a].push(*b);
            adj[*b].push(*a);
        }
        adj
    }
}

fn check_vertex_count(n: usize) -> Result<(), SpanError> {
    if n * n.saturating_sub(1) / 2 > 64 {
        return Err(SpanError::Invalid(format!("{n} vertices exceed the 64 edge variables")));
    }
    Ok(())
}

/// st-connectivity: target `e_t − e_s`, one vector `e_u − e_v` per vertex pair.
pub fn st_connectivity_program(n: usize, s: usize, t: usize) -> Result<SpanProgram, SpanError> {
    if s == t || s >= n || t >= n {
        return Err(SpanError::Invalid(format!("need distinct s, t < n (s={s}, t={t}, n={n})")));
    }
    check_vertex_count(n)?;
    let mut inputs = vec![];
    for u in 0..n {
        for v in u + 1..n {
            let mut vec = vec![0.0; n];
            vec[u] = 1.0;
            vec[v] = -1.0;
            inputs.push(InputVector { v: vec, label: Label::Var { j: pair_index(n, u, v), b: 1 } });
        }
    }
    let mut target = vec![0.0; n];
    target[t] = 1.0;
    target[s] = -1.0;
    SpanProgram::new(n * (n - 1) / 2, target, inputs, vec![])
}

/// Negative witness of st-connectivity: the indicator of the component of `t`.
pub fn st_component_witness(g: &SimpleGraph, t: usize) -> Vec<f64> {
    let dist = g.bfs(t);
    dist.iter().map(|d| if d.is_some() { 1.0 } else { 0.0 }).collect()
}

/// A star with legs of the given positive lengths. Vertex 0 is the root;
/// leg `j` (0-based) at depth `i` (1-based) is `1 + Σ_{j'<j} ℓ_{j'} + i − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdividedStar {
    pub legs: Vec<usize>,
}

impl SubdividedStar {
    pub fn new(legs: Vec<usize>) -> Result<Self, SpanError> {
        if legs.is_empty() || legs.contains(&0) {
            return Err(SpanError::Invalid("legs must be non-empty with positive lengths".into()));
        }
        Ok(SubdividedStar { legs })
    }

    pub fn claw() -> Self {
        SubdividedStar { legs: vec![1, 1, 1] }
    }

    pub fn vertex_count(&self) -> usize {
        1 + self.legs.iter().sum::<usize>()
    }

    pub fn leg_vertex(&self, j: usize, i: usize) -> usize {
        1 + self.legs[..j].iter().sum::<usize>() + i - 1
    }

    /// `(leg, depth)` of a non-root vertex.
    pub fn position(&self, v: usize) -> Option<(usize, usize)> {
        let mut base = 1;
        for (j, &l) in self.legs.iter().enumerate() {
            if v < base + l && v >= base {
                return Some((j, v - base + 1));
            }
            base += l;
        }
        None
    }

    pub fn graph(&self) -> SimpleGraph {
        let mut g = SimpleGraph::empty(self.vertex_count());
        for (j, &l) in self.legs.iter().enumerate() {
            g.add_edge(0, self.leg_vertex(j, 1));
            for i in 1..l {
                g.add_edge(self.leg_vertex(j, i), self.leg_vertex(j, i + 1));
            }
        }
        g
    }
}

/// Star program together with the index maps needed for its negative witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarProgram {
    pub star: SubdividedStar,
    pub colouring: Vec<usize>,
    pub graph: GraphProgram,
    /// `h[u][b]` for root-coloured `u`, `b = 0..=d`.
    pub h: Vec<Vec<usize>>,
    /// `(e_u^{(1)}, e_u^{(2)})` for leg-coloured `u`; equal at leaves.
    pub e: Vec<Option<(usize, usize)>>,
}

/// Subdivided-star detector for a coloured `n`-vertex graph: paths of `H`
/// from `s` to `t` go out and back along each leg, with the four-term vectors
/// forcing the return through the same root copy.
pub fn star_program(star: &SubdividedStar, n: usize, colouring: &[usize]) -> Result<StarProgram, SpanError> {
    check_vertex_count(n)?;
    if colouring.len() != n || colouring.iter().any(|&c| c >= star.vertex_count()) {
        return Err(SpanError::Invalid("colouring must map every vertex to a star vertex".into()));
    }
    let d = star.legs.len();
    let mut b = GraphProgramBuilder::new(n);
    let mut h = vec![vec![]; n];
    let mut e = vec![None; n];
    for u in 0..n {
        match star.position(colouring[u]) {
            None => h[u] = (0..=d).map(|c| b.add_basis(BasisName::Vertex { u, copy: c })).collect(),
            Some((j, i)) => {
                let e1 = b.add_basis(BasisName::Vertex { u, copy: 1 });
                let e2 = if i < star.legs[j] { b.add_basis(BasisName::Vertex { u, copy: 2 }) } else { e1 };
                e[u] = Some((e1, e2));
            }
        }
    }
    let of_colour = |c: usize| (0..n).filter(move |&u| colouring[u] == c);
    for (j, &l) in star.legs.iter().enumerate() {
        for i in 1..l {
            for u in of_colour(star.leg_vertex(j, i)) {
                for v in of_colour(star.leg_vertex(j, i + 1)) {
                    let (u1, u2) = e[u].expect("leg vertex");
                    let (v1, v2) = e[v].expect("leg vertex");
                    b.edge_input(u, v, vec![(u1, v1)]);
                    b.edge_input(u, v, vec![(v2, u2)]);
                }
            }
        }
        for u in of_colour(0) {
            for v in of_colour(star.leg_vertex(j, 1)) {
                let (v1, v2) = e[v].expect("leg vertex");
                b.edge_input(u, v, vec![(h[u][j], v1), (v2, h[u][j + 1])]);
            }
        }
    }
    for u in of_colour(0) {
        b.free_vector(vec![(0, h[u][0])]);
        b.free_vector(vec![(h[u][d], 1)]);
    }
    Ok(StarProgram { star: star.clone(), colouring: colouring.to_vec(), graph: b.build(), h, e })
}

fn components_within(adj: &[Vec<usize>], inside: &[bool]) -> Vec<Option<usize>> {
    let mut comp = vec![None; adj.len()];
    let mut next = 0;
    for s in 0..adj.len() {
        if !inside[s] || comp[s].is_some() {
            continue;
        }
        comp[s] = Some(next);
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if inside[y] && comp[y].is_none() {
                    comp[y] = Some(next);
                    queue.push_back(y);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Negative witness of the star program built from the auxiliary graph `H'`:
/// for each leg, root copies joined through the leg get a direct edge and leg
/// vertices reaching both neighbouring root layers are removed; the witness
/// is the indicator of the component of `t`. Fails when `s` still reaches `t`.
pub fn star_negative_witness(sp: &StarProgram, g: &SimpleGraph) -> Result<WitnessRecord, SpanError> {
    let adj = sp.graph.h_graph(g);
    let dim = sp.graph.basis.len();
    let roots: Vec<usize> = (0..sp.colouring.len()).filter(|&u| sp.colouring[u] == 0).collect();
    let mut removed = vec![false; dim];
    let mut extra: Vec<(usize, usize)> = vec![];
    for j in 0..sp.star.legs.len() {
        let mut inside = vec![false; dim];
        for (u, e) in sp.e.iter().enumerate() {
            if let Some((e1, e2)) = *e {
                if sp.star.position(sp.colouring[u]).map(|p| p.0) == Some(j) {
                    inside[e1] = true;
                    inside[e2] = true;
                }
            }
        }
        let before: Vec<usize> = roots.iter().map(|&u| sp.h[u][j]).collect();
        let after: Vec<usize> = roots.iter().map(|&u| sp.h[u][j + 1]).collect();
        let comp = components_within(&adj, &inside);
        let ncomp = comp.iter().flatten().max().map_or(0, |m| m + 1);
        let mut touch_before = vec![false; ncomp];
        let mut touch_after = vec![false; ncomp];
        for x in 0..dim {
            if let Some(c) = comp[x] {
                if adj[x].iter().any(|y| before.contains(y)) {
                    touch_before[c] = true;
                }
                if adj[x].iter().any(|y| after.contains(y)) {
                    touch_after[c] = true;
                }
            }
        }
        for x in 0..dim {
            if let Some(c) = comp[x] {
                if touch_before[c] && touch_after[c] {
                    removed[x] = true;
                }
            }
        }
        for &u in &roots {
            let hb = sp.h[u][j];
            if adj[hb].iter().any(|&y| comp[y].map_or(false, |c| touch_after[c])) {
                extra.push((hb, sp.h[u][j + 1]));
            }
        }
    }
    let mut adj2: Vec<Vec<usize>> = adj
        .iter()
        .enumerate()
        .map(|(x, ys)| if removed[x] { vec![] } else { ys.iter().copied().filter(|&y| !removed[y]).collect() })
        .collect();
    for &(a, b) in &extra {
        adj2[a].push(b);
        adj2[b].push(a);
    }
    let inside = vec![true; dim];
    let comp = components_within(&adj2, &inside);
    if comp[0] == comp[1] {
        return Err(SpanError::WrongKind(g.edge_bits(), WitnessKind::Negative));
    }
    let w: Vec<f64> = (0..dim).map(|x| if !removed[x] && comp[x] == comp[1] { 1.0 } else { 0.0 }).collect();
    let rec = WitnessRecord { input: g.edge_bits(), kind: WitnessKind::Negative, vector: w, size: 0.0 };
    let size = witness_vector_size(&sp.graph.program, &rec);
    Ok(WitnessRecord { size, ..rec })
}

/// Triangle detector for forests: basis `s, t, e_u^{(c(u))}` and an extra
/// `e_u^{(3)}` for colour-0 vertices; free vectors `t − s + e_u^{(0)} − e_u^{(3)}`;
/// edge vectors `e_v^{(j+1)} − e_u^{(j)}` between consecutive colours.
pub fn triangle_forest_program(n: usize, colouring: &[usize]) -> Result<GraphProgram, SpanError> {
    check_vertex_count(n)?;
    if colouring.len() != n || colouring.iter().any(|&c| c > 2) {
        return Err(SpanError::Invalid("colouring must map into {0, 1, 2}".into()));
    }
    let mut b = GraphProgramBuilder::new(n);
    let main: Vec<usize> = (0..n).map(|u| b.add_basis(BasisName::Vertex { u, copy: colouring[u] })).collect();
    let closing: Vec<Option<usize>> =
        (0..n).map(|u| (colouring[u] == 0).then(|| b.add_basis(BasisName::Vertex { u, copy: 3 }))).collect();
    for u in 0..n {
        for v in 0..n {
            let (cu, cv) = (colouring[u], colouring[v]);
            if (cu + 1) % 3 != cv {
                continue;
            }
            let head = if cv == 0 { closing[v].expect("colour 0 has a closing copy") } else { main[v] };
            b.edge_input(u, v, vec![(main[u], head)]);
        }
    }
    for u in 0..n {
        if let Some(c) = closing[u] {
            b.free_vector(vec![(0, 1), (c, main[u])]);
        }
    }
    Ok(b.build())
}

/// Level witness of the triangle program on a forest: `t` gets 1, `s` gets
/// 0, and along `H'` the value rises by one across each `e^{(0)} → e^{(3)}`
/// edge, starting from 0 at the vertex of least depth in each component.
pub fn triangle_forest_witness(gp: &GraphProgram, g: &SimpleGraph) -> Result<WitnessRecord, SpanError> {
    if !g.is_forest() {
        return Err(SpanError::Invalid("level witness needs a forest".into()));
    }
    let dim = gp.basis.len();
    let z = g.edge_bits();
    // H' = available edge vectors plus e^{(0)}e^{(3)} links (arc direction 0 → 3 adds 1)
    let mut adj: Vec<Vec<(usize, f64)>> = vec![vec![]; dim];
    for i in gp.program.available(&z) {
        for &(a, b) in &gp.input_edges[i] {
            adj[a].push((b, 0.0));
            adj[b].push((a, 0.0));
        }
    }
    for edges in &gp.free_edges {
        let (e0, e3) = (edges[1].1, edges[1].0);
        adj[e0].push((e3, 1.0));
        adj[e3].push((e0, -1.0));
    }
    let mut depth = vec![usize::MAX; g.n];
    for r in 0..g.n {
        if depth[r] == usize::MAX {
            for (v, d) in g.bfs(r).into_iter().enumerate() {
                if let Some(d) = d {
                    depth[v] = d;
                }
            }
        }
    }
    let vertex_of = |x: usize| match gp.basis[x] {
        BasisName::Vertex { u, .. } => Some(u),
        _ => None,
    };
    let mut order: Vec<usize> = (2..dim).collect();
    order.sort_by_key(|&x| (depth[vertex_of(x).expect("graph vertex")], x));
    let mut level: Vec<Option<f64>> = vec![None; dim];
    level[0] = Some(0.0);
    level[1] = Some(1.0);
    for &r in &order {
        if level[r].is_some() {
            continue;
        }
        level[r] = Some(0.0);
        let mut queue = VecDeque::from([r]);
        while let Some(x) = queue.pop_front() {
            let lx = level[x].expect("visited");
            for &(y, step) in &adj[x] {
                match level[y] {
                    None => {
                        level[y] = Some(lx + step);
                        queue.push_back(y);
                    }
                    Some(ly) if (ly - lx - step).abs() > 1e-12 => {
                        return Err(SpanError::Invalid("H' has an inconsistent cycle".into()));
                    }
                    _ => {}
                }
            }
        }
    }
    let w: Vec<f64> = level.into_iter().map(|l| l.expect("all levelled")).collect();
    let rec = WitnessRecord { input: z, kind: WitnessKind::Negative, vector: w, size: 0.0 };
    let size = witness_vector_size(&gp.program, &rec);
    Ok(WitnessRecord { size, ..rec })
}

/// Skew product with `Z_2`: vertex `(v, i)` is `2v + i`; a signed edge
/// `uv` becomes `(u,i)(v,i+s)` for both `i`.
pub fn skew_product(t: &SimpleGraph, signs: &[((usize, usize), u8)]) -> Result<SimpleGraph, SpanError> {
    let mut g = SimpleGraph::empty(2 * t.n);
    for &((u, v), s) in signs {
        if !t.has_edge(u, v) {
            return Err(SpanError::Invalid(format!("{u}{v} is not an edge")));
        }
        for i in 0..2 {
            g.add_edge(2 * u + i, 2 * v + ((i + s as usize) % 2));
        }
    }
    if signs.len() != t.edge_count() {
        return Err(SpanError::Invalid("every edge needs exactly one sign".into()));
    }
    Ok(g)
}

/// The K₅ signing whose skew product is planar: the pentagon `i(i+1)` gets
/// sign 0 and the pentagram `i(i+2)` sign 1.
pub fn k5_skew_signing() -> Vec<((usize, usize), u8)> {
    (0..5)
        .flat_map(|i| [((i, (i + 1) % 5), 0u8), ((i, (i + 2) % 5), 1u8)])
        .map(|((a, b), s)| ((a.min(b), a.max(b)), s))
        .collect()
}

/// Closed walk through every edge once (Hierholzer), starting at `start`.
pub fn euler_circuit(t: &SimpleGraph, start: usize) -> Result<Vec<usize>, SpanError> {
    if (0..t.n).any(|v| t.degree(v) % 2 == 1) {
        return Err(SpanError::Invalid("graph has odd-degree vertices".into()));
    }
    let mut left: Vec<u64> = (0..t.n).map(|v| t.neighbours(v)).collect();
    let mut stack = vec![start];
    let mut walk = vec![];
    while let Some(&v) = stack.last() {
        if left[v] != 0 {
            let w = left[v].trailing_zeros() as usize;
            left[v] &= !(1 << w);
            left[w] &= !(1 << v);
            stack.push(w);
        } else {
            walk.push(v);
            stack.pop();
        }
    }
    walk.reverse();
    if walk.len() != t.edge_count() + 1 {
        return Err(SpanError::Invalid("edges are not connected".into()));
    }
    Ok(walk)
}

/// Traversal detector along a closed walk `W` of a pattern graph: basis
/// copies `e_u^{(i)}` for walk positions with `c(u) = W_i`, edge vectors
/// `e_w^{(i+1)} − e_u^{(i)}` per step, and free vectors
/// `t − s + e_u^{(0)} − e_u^{(m)}` tying the start and end copies.
pub fn traversal_program(walk: &[usize], n: usize, colouring: &[usize]) -> Result<GraphProgram, SpanError> {
    check_vertex_count(n)?;
    if walk.len() < 2 || walk.first() != walk.last() || colouring.len() != n {
        return Err(SpanError::Invalid("walk must be closed and the colouring total".into()));
    }
    let m = walk.len() - 1;
    let mut b = GraphProgramBuilder::new(n);
    let mut copy = vec![vec![None; m + 1]; n];
    for i in 0..=m {
        for u in (0..n).filter(|&u| colouring[u] == walk[i]) {
            copy[u][i] = Some(b.add_basis(BasisName::Vertex { u, copy: i }));
        }
    }
    for i in 0..m {
        for u in (0..n).filter(|&u| colouring[u] == walk[i]) {
            for w in (0..n).filter(|&w| w != u && colouring[w] == walk[i + 1]) {
                b.edge_input(u, w, vec![(copy[u][i].expect("copy"), copy[w][i + 1].expect("copy"))]);
            }
        }
    }
    for u in (0..n).filter(|&u| colouring[u] == walk[0]) {
        b.free_vector(vec![(0, 1), (copy[u][m].expect("copy"), copy[u][0].expect("copy"))]);
    }
    Ok(b.build())
}
