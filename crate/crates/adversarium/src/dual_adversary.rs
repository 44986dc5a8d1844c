//! Feasible solutions of the dual adversary program, stored as Gram factors:
//! `X_j = F_j F_j^T`, one row of `F_j` per domain input.

use crate::functions::{
    binomial, certificate_complexity, combinations, minimal_certificate, FunctionError, Input, PartialFunction,
};
use crate::graphs::{bits, SimpleGraph};
use crate::numerics::{psd_sqrt_factor, Mat};
use crate::span_programs::{
    canonical_violation, positive_witness, InputVector, Label, SpanError, SpanProgram, WitnessKind, WitnessRecord,
};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualError {
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("promise violated: {0}")]
    Promise(String),
    #[error("function error: {0}")]
    Function(#[from] FunctionError),
    #[error("span program error: {0}")]
    Span(#[from] SpanError),
    #[error("factor error: {0}")]
    Factor(String),
}

/// Exact solutions satisfy `Σ_{j: x_j≠y_j} X_j[x,y] = 1`; relaxed ones only `≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionKind {
    Exact,
    Relaxed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub max_violation: f64,
    /// Domain indices `(x, y)` of the worst pair.
    pub worst: Option<(usize, usize)>,
}

impl Feasibility {
    pub fn feasible(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualAdversarySolution {
    pub f: PartialFunction,
    pub factors: Vec<Mat>,
    pub kind: SolutionKind,
}

#[derive(Serialize, Deserialize)]
struct SolutionJson {
    n: usize,
    q: usize,
    domain_hash: String,
    kind: SolutionKind,
    factors: Vec<Vec<Vec<f64>>>,
}

/// FNV-1a over the domain and its values.
pub fn domain_hash(f: &PartialFunction) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |b: u8| {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    };
    for (z, &v) in f.domain.iter().zip(&f.values) {
        z.iter().for_each(|&s| eat(s));
        eat(0xff);
        eat(v as u8);
    }
    format!("{h:016x}")
}

impl DualAdversarySolution {
    pub fn new(f: PartialFunction, factors: Vec<Mat>, kind: SolutionKind) -> Self {
        debug_assert_eq!(factors.len(), f.n);
        debug_assert!(factors.iter().all(|m| m.nrows() == f.len()));
        DualAdversarySolution { f, factors, kind }
    }

    /// Factors each `X_j` by an eigen square root.
    pub fn from_gram(f: PartialFunction, grams: &[Mat], kind: SolutionKind) -> Result<Self, DualError> {
        if grams.len() != f.n || grams.iter().any(|g| g.shape() != (f.len(), f.len())) {
            return Err(DualError::Invalid("need one |D|×|D| matrix per variable".into()));
        }
        let factors = grams
            .iter()
            .map(|g| psd_sqrt_factor(g, 1e-12).map_err(|e| DualError::Factor(e.to_string())))
            .collect::<Result<_, _>>()?;
        Ok(DualAdversarySolution::new(f, factors, kind))
    }

    pub fn gram(&self, j: usize) -> Mat {
        &self.factors[j] * self.factors[j].transpose()
    }

    fn inner(&self, j: usize, a: usize, b: usize) -> f64 {
        self.factors[j].row(a).dot(&self.factors[j].row(b))
    }

    /// `Σ_{j: x_j≠y_j} X_j[x,y]` for domain indices.
    pub fn constraint(&self, x: usize, y: usize) -> f64 {
        let (zx, zy) = (&self.f.domain[x], &self.f.domain[y]);
        (0..self.f.n).filter(|&j| zx[j] != zy[j]).map(|j| self.inner(j, x, y)).sum()
    }

    /// Worst deviation over all positive/negative pairs (shortfall only for
    /// relaxed solutions).
    pub fn check_feasible(&self) -> Feasibility {
        let mut out = Feasibility { max_violation: 0.0, worst: None };
        for x in self.f.positives() {
            for y in self.f.negatives() {
                let s = self.constraint(x, y);
                let v = match self.kind {
                    SolutionKind::Exact => (s - 1.0).abs(),
                    SolutionKind::Relaxed => (1.0 - s).max(0.0),
                };
                if out.worst.is_none() || v > out.max_violation {
                    out = Feasibility { max_violation: v, worst: Some((x, y)) };
                }
            }
        }
        out
    }

    pub fn diagonal(&self, z: usize) -> f64 {
        (0..self.f.n).map(|j| self.factors[j].row(z).norm_squared()).sum()
    }

    /// `max_z Σ_j ‖ψ_{j,z}‖²`.
    pub fn objective(&self) -> f64 {
        (0..self.f.len()).map(|z| self.diagonal(z)).fold(0.0, f64::max)
    }

    /// Same vectors on a subset of the domain.
    pub fn restrict_domain(&self, keep: &[Input]) -> Result<Self, DualError> {
        let idx: Vec<usize> = keep
            .iter()
            .map(|z| self.f.index_of(z).ok_or_else(|| DualError::Invalid(format!("{z:?} not in the domain"))))
            .collect::<Result<_, _>>()?;
        let values = idx.iter().map(|&i| self.f.values[i]).collect();
        let f = PartialFunction::new(self.f.n, self.f.q, keep.to_vec(), values)?;
        let factors = self.factors.iter().map(|m| Mat::from_fn(idx.len(), m.ncols(), |r, c| m[(idx[r], c)])).collect();
        Ok(DualAdversarySolution::new(f, factors, self.kind))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = SolutionJson {
            n: self.f.n,
            q: self.f.q,
            domain_hash: domain_hash(&self.f),
            kind: self.kind,
            factors: self
                .factors
                .iter()
                .map(|m| (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect())
                .collect(),
        };
        serde_json::to_value(j).expect("solution serializes")
    }

    /// Reads factors for `f`; the stored domain hash must match.
    pub fn from_json(text: &str, f: &PartialFunction) -> Result<Self, DualError> {
        let j: SolutionJson = serde_json::from_str(text).map_err(|e| DualError::Invalid(e.to_string()))?;
        if j.n != f.n || j.q != f.q || j.domain_hash != domain_hash(f) || j.factors.len() != f.n {
            return Err(DualError::Invalid("solution belongs to a different function".into()));
        }
        let mut factors = vec![];
        for rows in &j.factors {
            if rows.len() != f.len() {
                return Err(DualError::Invalid("one row per domain input is required".into()));
            }
            let d = rows.first().map_or(0, |r| r.len());
            if rows.iter().any(|r| r.len() != d) {
                return Err(DualError::Invalid("ragged factor".into()));
            }
            factors.push(Mat::from_fn(rows.len(), d, |r, c| rows[r][c]));
        }
        Ok(DualAdversarySolution::new(f.clone(), factors, j.kind))
    }
}

fn bit_string(s: &str) -> Input {
    s.bytes().map(|c| c - b'0').collect()
}

/// Majority of three with the explicit matrices of the worked example.
pub fn maj3_solution() -> DualAdversarySolution {
    let f = PartialFunction::tabulate(3, 2, |z| Some(z.iter().filter(|&&b| b == 1).count() >= 2)).expect("valid");
    let block6 = |a: usize, b: usize| -> f64 {
        // inputs 0,1,3 agree with the first row; 2,4,5 with the third
        let g = |i: usize| matches!(i, 0 | 1 | 3);
        if g(a) == g(b) {
            1.0
        } else {
            0.5
        }
    };
    let x1 = ["111", "110", "101", "010", "001", "000"];
    let x2 = ["111", "110", "011", "100", "001", "000"];
    let x3 = ["101", "011", "100", "010"];
    let mut grams = vec![Mat::zeros(8, 8); 3];
    for (j, rows) in [&x1[..], &x2[..]].iter().enumerate() {
        for (a, sa) in rows.iter().enumerate() {
            for (b, sb) in rows.iter().enumerate() {
                let (ia, ib) = (f.index_of(&bit_string(sa)).unwrap(), f.index_of(&bit_string(sb)).unwrap());
                grams[j][(ia, ib)] = block6(a, b);
            }
        }
    }
    for (a, sa) in x3.iter().enumerate() {
        for (b, sb) in x3.iter().enumerate() {
            let (ia, ib) = (f.index_of(&bit_string(sa)).unwrap(), f.index_of(&bit_string(sb)).unwrap());
            grams[2][(ia, ib)] = if a % 2 == b % 2 { 1.0 } else { 0.5 };
        }
    }
    DualAdversarySolution::from_gram(f, &grams, SolutionKind::Exact).expect("explicit matrices are PSD")
}

/// Optimal solution for the `k`-threshold on `n` bits with objective
/// `√(k(n−k+1))`: `X_j = D ∘ B_j` with `B_j[z,w] = 1/(k − A_j[z,w])`, where
/// `A_j` counts shared ones outside `j` of the trimmed inputs.
pub fn threshold_dual(k: usize, n: usize) -> Result<DualAdversarySolution, DualError> {
    if k == 0 || k > n || n > 10 {
        return Err(DualError::Invalid(format!("need 1 <= k <= n <= 10, got k={k}, n={n}")));
    }
    let f = PartialFunction::tabulate(n, 2, |z| Some(z.iter().filter(|&&b| b == 1).count() >= k))?;
    // positives keep their first k ones; negatives keep their first n−k+1 zeros
    let trimmed: Vec<u64> = f
        .domain
        .iter()
        .zip(&f.values)
        .map(|(z, &v)| {
            if v {
                (0..n).filter(|&i| z[i] == 1).take(k).fold(0, |m, i| m | 1 << i)
            } else {
                let zeros: u64 = (0..n).filter(|&i| z[i] == 0).take(n - k + 1).fold(0, |m, i| m | 1 << i);
                !zeros & ((1u64 << n) - 1)
            }
        })
        .collect();
    let a = (((n - k + 1) as f64) / k as f64).powf(0.25);
    let d: Vec<f64> = f.values.iter().map(|&v| if v { a } else { 1.0 / a }).collect();
    let mut grams = vec![];
    for j in 0..n {
        let used: Vec<usize> = (0..f.len())
            .filter(|&z| if f.values[z] { trimmed[z] >> j & 1 == 1 } else { trimmed[z] >> j & 1 == 0 })
            .collect();
        let mut m = Mat::zeros(f.len(), f.len());
        let outside = !(1u64 << j);
        for &z in &used {
            for &w in &used {
                let shared = (trimmed[z] & trimmed[w] & outside).count_ones() as f64;
                m[(z, w)] = d[z] * d[w] / (k as f64 - shared);
            }
        }
        grams.push(m);
    }
    DualAdversarySolution::from_gram(f, &grams, SolutionKind::Exact)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BarrierVariant {
    /// `√(n·C)` with `C` the smaller one-sided certificate complexity.
    Certificate,
    /// `√(C₀C₁)` for total functions.
    TwoSided,
    /// `1/ε` under a relative Hamming-distance promise `ε`.
    Distance,
}

/// Least Hamming distance between a positive and a negative input, over `n`.
pub fn relative_distance(f: &PartialFunction) -> f64 {
    let mut best = f.n;
    for x in f.positives() {
        for y in f.negatives() {
            let d = f.domain[x].iter().zip(&f.domain[y]).filter(|(a, b)| a != b).count();
            best = best.min(d);
        }
    }
    best as f64 / f.n as f64
}

/// Relaxed solutions with scalar `ψ_{j,z}`. `eps` is the promised relative
/// distance for the distance variant (computed when absent).
pub fn barrier_solution(f: &PartialFunction, variant: BarrierVariant, eps: Option<f64>) -> Result<DualAdversarySolution, DualError> {
    let n = f.n;
    if f.positives().is_empty() || f.negatives().is_empty() {
        return Err(DualError::Invalid("function must take both values".into()));
    }
    let on_certificate = |z: usize, val: f64| -> Vec<f64> {
        let m = minimal_certificate(f, z);
        (0..n).map(|j| if m >> j & 1 == 1 { val } else { 0.0 }).collect()
    };
    let rows: Vec<Vec<f64>> = match variant {
        BarrierVariant::Certificate => {
            let (_, c0, c1) = certificate_complexity(f);
            let (side, c) = if c1 <= c0 { (true, c1) } else { (false, c0) };
            let c = c as f64;
            (0..f.len())
                .map(|z| {
                    if f.values[z] == side {
                        on_certificate(z, (n as f64 / c).powf(0.25))
                    } else {
                        vec![(c / n as f64).powf(0.25); n]
                    }
                })
                .collect()
        }
        BarrierVariant::TwoSided => {
            if f.len() != f.q.pow(n as u32) {
                return Err(DualError::Promise("two-sided barrier needs a total function".into()));
            }
            let (_, c0, c1) = certificate_complexity(f);
            let r = (c0 as f64 / c1 as f64).powf(0.25);
            (0..f.len()).map(|z| on_certificate(z, if f.values[z] { r } else { 1.0 / r })).collect()
        }
        BarrierVariant::Distance => {
            let actual = relative_distance(f);
            let e = eps.unwrap_or(actual);
            if !(e > 0.0) || e > actual + 1e-12 {
                return Err(DualError::Promise(format!("relative distance {actual} is below the promised {e}")));
            }
            vec![vec![1.0 / (e * n as f64).sqrt(); n]; f.len()]
        }
    };
    let factors = (0..n).map(|j| Mat::from_fn(f.len(), 1, |z, _| rows[z][j])).collect();
    Ok(DualAdversarySolution::new(f.clone(), factors, SolutionKind::Relaxed))
}

/// Graph collision restricted to inputs with at most `2α` ones.
pub fn graph_collision_function(g: &SimpleGraph) -> Result<PartialFunction, DualError> {
    let alpha = g.independence_number();
    let edges = g.edges();
    Ok(PartialFunction::tabulate(g.n, 2, |z| {
        let ones = z.iter().filter(|&&b| b == 1).count();
        (ones <= 2 * alpha).then(|| edges.iter().any(|&(a, b)| z[a] == 1 && z[b] == 1))
    })?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum CollisionArc {
    /// `ℓ`-th load of the path for `R`.
    Load { set: u64, step: usize },
    /// Loading `a` on top of `R`.
    First { set: u64, j: usize },
    /// Loading `b` on top of `S'`.
    Second { set: u64, j: usize },
}

impl CollisionArc {
    fn source(&self) -> u64 {
        match *self {
            CollisionArc::Load { set, step } => bits(set).take(step).fold(0, |m, i| m | 1 << i),
            CollisionArc::First { set, .. } | CollisionArc::Second { set, .. } => set,
        }
    }

    fn var(&self) -> usize {
        match *self {
            CollisionArc::Load { set, step } => bits(set).nth(step).expect("step < |R|"),
            CollisionArc::First { j, .. } | CollisionArc::Second { j, .. } => j,
        }
    }
}

struct CollisionScheme {
    n: usize,
    r: usize,
    p: f64,
    /// `(w0, w1)` for the load stage and the two final stages.
    weights: [(f64, f64); 3],
}

impl CollisionScheme {
    fn new(g: &SimpleGraph, r: usize) -> Result<Self, DualError> {
        let n = g.n;
        if n > 8 || n < 2 || r + 1 >= n {
            return Err(DualError::Invalid(format!("need 2 <= n <= 8 and r < n - 1, got n={n}, r={r}")));
        }
        let alpha = g.independence_number() as f64;
        let nf = n as f64;
        Ok(CollisionScheme {
            n,
            r,
            p: 1.0 / binomial(n - 2, r) as f64,
            weights: [
                ((nf / alpha).sqrt(), (alpha / nf).sqrt()),
                (0.0, 1.0 / nf.sqrt()),
                (0.0, (r as f64).sqrt().max(1.0) / nf),
            ],
        })
    }

    fn arcs(&self) -> Vec<CollisionArc> {
        let full = (1u64 << self.n) - 1;
        let mut out = vec![];
        for set in combinations(self.n, self.r) {
            out.extend((0..self.r).map(|step| CollisionArc::Load { set, step }));
            out.extend(bits(full & !set).map(|j| CollisionArc::First { set, j }));
        }
        for set in combinations(self.n, self.r + 1) {
            out.extend(bits(full & !set).map(|j| CollisionArc::Second { set, j }));
        }
        out
    }

    fn stage(arc: &CollisionArc) -> usize {
        match arc {
            CollisionArc::Load { .. } => 0,
            CollisionArc::First { .. } => 1,
            CollisionArc::Second { .. } => 2,
        }
    }

    /// Whether a positive input with first colliding edge `(a, b)` uses the arc.
    fn taken(arc: &CollisionArc, (a, b): (usize, usize)) -> bool {
        let ab = 1u64 << a | 1u64 << b;
        match *arc {
            CollisionArc::Load { set, .. } => set & ab == 0,
            CollisionArc::First { set, j } => set & ab == 0 && j == a,
            CollisionArc::Second { set, j } => set >> a & 1 == 1 && j == b && (set & !(1 << a)) & ab == 0,
        }
    }

    /// `(ψ, φ)` of input `z` on the arc, before the `√p` factor.
    fn entries(&self, arc: &CollisionArc, z: &[u8], edge: Option<(usize, usize)>) -> (f64, f64) {
        let (w0, w1) = self.weights[Self::stage(arc)];
        let one = z[arc.var()] == 1;
        match edge {
            Some(e) if Self::taken(arc, e) => {
                if one {
                    (1.0 / w1.sqrt(), 0.0)
                } else {
                    (0.0, 1.0 / w0.sqrt())
                }
            }
            Some(_) => (0.0, 0.0),
            None if one => (0.0, w0.sqrt()),
            None => (w1.sqrt(), 0.0),
        }
    }
}

fn first_edge(g: &SimpleGraph, z: &[u8]) -> Option<(usize, usize)> {
    g.edges().into_iter().find(|&(a, b)| z[a] == 1 && z[b] == 1)
}

/// Solution for graph collision on `g`: uniform flow over the paths that load
/// an `r`-subset avoiding the first colliding edge `ab`, then `a`, then `b`.
pub fn graph_collision_dual(g: &SimpleGraph, r: usize) -> Result<DualAdversarySolution, DualError> {
    let scheme = CollisionScheme::new(g, r)?;
    let f = graph_collision_function(g)?;
    let arcs = scheme.arcs();
    let sp = scheme.p.sqrt();
    let mut cols: Vec<HashMap<(usize, u64, bool), usize>> = vec![HashMap::new(); g.n];
    let mut entries: Vec<Vec<(usize, usize, f64)>> = vec![vec![]; g.n];
    for (zi, z) in f.domain.iter().enumerate() {
        let edge = if f.values[zi] { Some(first_edge(g, z).expect("positive has an edge")) } else { None };
        for (e, arc) in arcs.iter().enumerate() {
            let (psi, phi) = scheme.entries(arc, z, edge);
            let j = arc.var();
            let code = arc.source() & bits_mask(z);
            for (val, tag) in [(psi, false), (phi, true)] {
                if val != 0.0 {
                    let next = cols[j].len();
                    let c = *cols[j].entry((e, code, tag)).or_insert(next);
                    entries[j].push((zi, c, sp * val));
                }
            }
        }
    }
    let factors = (0..g.n)
        .map(|j| {
            let mut m = Mat::zeros(f.len(), cols[j].len());
            for &(r, c, v) in &entries[j] {
                m[(r, c)] = v;
            }
            m
        })
        .collect();
    Ok(DualAdversarySolution::new(f, factors, SolutionKind::Exact))
}

fn bits_mask(z: &[u8]) -> u64 {
    z.iter().enumerate().fold(0, |m, (i, &b)| if b == 1 { m | 1 << i } else { m })
}

/// Contribution of the path for `R` to `Σ_{j: x_j≠y_j} X_j[x,y]`; equals
/// `1/C(n−2, r)` when `R` avoids the first colliding edge of `x`.
pub fn collision_sum(g: &SimpleGraph, r: usize, x: &[u8], y: &[u8], set: u64) -> Result<f64, DualError> {
    let scheme = CollisionScheme::new(g, r)?;
    let (a, b) = first_edge(g, x).ok_or_else(|| DualError::Invalid("x has no colliding edge".into()))?;
    if first_edge(g, y).is_some() {
        return Err(DualError::Invalid("y has a colliding edge".into()));
    }
    if set.count_ones() as usize != r || set >> g.n != 0 {
        return Err(DualError::Invalid(format!("R must be an {r}-subset")));
    }
    let mut path: Vec<CollisionArc> = (0..r).map(|step| CollisionArc::Load { set, step }).collect();
    path.push(CollisionArc::First { set, j: a });
    path.push(CollisionArc::Second { set: set | 1 << a, j: b });
    let (mx, my) = (bits_mask(x), bits_mask(y));
    let mut total = 0.0;
    for arc in &path {
        let j = arc.var();
        if x[j] == y[j] || (mx ^ my) & arc.source() != 0 {
            continue;
        }
        let (px, fx) = scheme.entries(arc, x, Some((a, b)));
        let (py, fy) = scheme.entries(arc, y, None);
        total += scheme.p * (px * py + fx * fy);
    }
    Ok(total)
}

/// Canonical span program of a Boolean solution: coordinates are the
/// negative inputs, the target is all ones, and `v_{j,b,i}[y] = ψ_{j,y}[i]`
/// when `y_j ≠ b`. Stored witnesses reproduce the solution's diagonal.
pub fn to_span_program(s: &DualAdversarySolution) -> Result<SpanProgram, DualError> {
    let f = &s.f;
    if f.q != 2 {
        return Err(DualError::Invalid("span programs need a Boolean alphabet".into()));
    }
    let negs = f.negatives();
    let mut inputs = vec![];
    let mut index: HashMap<(usize, u8, usize), usize> = HashMap::new();
    for j in 0..f.n {
        for b in 0..2u8 {
            for i in 0..s.factors[j].ncols() {
                let v = negs.iter().map(|&y| if f.domain[y][j] != b { s.factors[j][(y, i)] } else { 0.0 }).collect();
                index.insert((j, b, i), inputs.len());
                inputs.push(InputVector { v, label: Label::Var { j, b } });
            }
        }
    }
    let mut p = SpanProgram::new(f.n, vec![1.0; negs.len()], inputs, vec![])?;
    for x in f.positives() {
        let z = &f.domain[x];
        let mut w = vec![0.0; p.inputs.len()];
        for j in 0..f.n {
            for i in 0..s.factors[j].ncols() {
                w[index[&(j, z[j], i)]] = s.factors[j][(x, i)];
            }
        }
        let size = w.iter().map(|c| c * c).sum();
        p.stored.push(WitnessRecord { input: z.clone(), kind: WitnessKind::Positive, vector: w, size });
    }
    for (k, &y) in negs.iter().enumerate() {
        let mut e = vec![0.0; negs.len()];
        e[k] = 1.0;
        let size = p.inputs.iter().map(|i| i.v[k] * i.v[k]).sum();
        p.stored.push(WitnessRecord { input: f.domain[y].clone(), kind: WitnessKind::Negative, vector: e, size });
    }
    Ok(p)
}

/// Inverse of [`to_span_program`] on canonical programs: `ψ_{j,y}` reads the
/// `y`-entries of the vectors labelled by `j`, `ψ_{j,x}` the matching part of
/// the positive witness (stored, else minimal).
pub fn from_canonical_span_program(p: &SpanProgram, f: &PartialFunction) -> Result<DualAdversarySolution, DualError> {
    if p.n != f.n || f.q != 2 {
        return Err(DualError::Invalid("program and function disagree".into()));
    }
    let viol = canonical_violation(p, f)?;
    if viol > 1e-9 {
        return Err(SpanError::NotCanonical(format!("violation {viol:.3e}")).into());
    }
    for iv in &p.inputs {
        if matches!(iv.label, Label::Always | Label::Never) && iv.v.iter().any(|&x| x.abs() > 1e-9) {
            return Err(SpanError::NotCanonical("nonzero vector with a constant label".into()).into());
        }
    }
    let negs = f.negatives();
    let neg_pos: HashMap<usize, usize> = negs.iter().enumerate().map(|(k, &y)| (y, k)).collect();
    let per_var: Vec<Vec<usize>> = (0..f.n)
        .map(|j| (0..p.inputs.len()).filter(|&i| matches!(p.inputs[i].label, Label::Var { j: jj, .. } if jj == j)).collect())
        .collect();
    let mut factors: Vec<Mat> = per_var.iter().map(|ij| Mat::zeros(f.len(), ij.len())).collect();
    for z in 0..f.len() {
        let input = &f.domain[z];
        if f.values[z] {
            let w = match p.stored_witness(input, WitnessKind::Positive) {
                Some(w) => w.vector.clone(),
                None => positive_witness(p, input)?.vector,
            };
            for j in 0..f.n {
                for (c, &i) in per_var[j].iter().enumerate() {
                    if let Label::Var { b, .. } = p.inputs[i].label {
                        if b == input[j] {
                            factors[j][(z, c)] = w[i];
                        }
                    }
                }
            }
        } else {
            let k = neg_pos[&z];
            for j in 0..f.n {
                for (c, &i) in per_var[j].iter().enumerate() {
                    factors[j][(z, c)] = p.inputs[i].v[k];
                }
            }
        }
    }
    Ok(DualAdversarySolution::new(f.clone(), factors, SolutionKind::Exact))
}
