//! Learning graphs: arc-weighted DAGs over loaded subsets, flows per
//! certificate member, complexity calculus, the named constructions, the
//! conversions into dual adversary solutions and span programs, and dual
//! certificates for lower bounds.

use crate::dual_adversary::{DualAdversarySolution, SolutionKind};
use crate::functions::{
    binomial, combinations, is_b_certificate, Assignment, CertificateStructure, Input, PartialFunction,
};
use crate::graphs::{bits, pair_index};
use crate::numerics::Mat;
use crate::span_programs::{InputVector, Label, SpanProgram, WitnessKind, WitnessRecord};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

const FLOW_TOL: f64 = 1e-9;
/// Largest ambient dimension `to_span_program` will build.
pub const SPAN_DIM_BUDGET: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LgError {
    #[error("invalid parameters: {0}")]
    Range(String),
    #[error("invalid flow: {0}")]
    Flow(String),
    #[error("flow {flow:.3e} through zero-weight arc {arc}")]
    ZeroWeight { arc: usize, flow: f64 },
    #[error("no flow member certifies input {0:?}")]
    CertificateMismatch(Input),
    #[error("operation needs a Boolean function")]
    NotBoolean,
    #[error("value-dependent weights are not supported here")]
    Adaptive,
    #[error("size {0} exceeds the budget of {1}")]
    Budget(usize, usize),
    #[error("alpha is nonzero on marked set {set:#b} of member {member}")]
    AlphaOnMarked { set: u64, member: usize },
}

/// Arc weight, either fixed or gated on the source assignment: `OnesOnly(w)`
/// is `w` when every loaded variable is 1 and 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Weight {
    Constant(f64),
    OnesOnly(f64),
}

impl Weight {
    pub fn nominal(&self) -> f64 {
        match *self {
            Weight::Constant(w) | Weight::OnesOnly(w) => w,
        }
    }

    /// Weight seen by input `z` on an arc leaving `set`; `None` gives the nominal value.
    pub fn on(&self, set: u64, z: Option<&[u8]>) -> f64 {
        match (*self, z) {
            (Weight::Constant(w), _) | (Weight::OnesOnly(w), None) => w,
            (Weight::OnesOnly(w), Some(z)) => {
                if bits(set).all(|i| z[i] == 1) {
                    w
                } else {
                    0.0
                }
            }
        }
    }

    fn scaled(self, a: f64) -> Weight {
        match self {
            Weight::Constant(w) => Weight::Constant(w * a),
            Weight::OnesOnly(w) => Weight::OnesOnly(w * a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LgVertex {
    pub set: u64,
    pub tag: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgArc {
    pub from: usize,
    pub to: usize,
    pub j: usize,
    pub weight: Weight,
    pub stage: usize,
}

/// Symmetric-flow metadata of one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageInfo {
    pub name: String,
    pub length: f64,
    pub speciality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningGraph {
    pub n: usize,
    pub vertices: Vec<LgVertex>,
    pub arcs: Vec<LgArc>,
    pub stages: Vec<StageInfo>,
    #[serde(skip)]
    index: HashMap<LgVertex, usize>,
}

impl LearningGraph {
    /// Graph holding only the root `∅`.
    pub fn new(n: usize) -> Self {
        let mut g = LearningGraph { n, vertices: vec![], arcs: vec![], stages: vec![], index: HashMap::new() };
        g.vertex(0, 0);
        g
    }

    pub fn vertex(&mut self, set: u64, tag: u64) -> usize {
        let key = LgVertex { set, tag };
        if let Some(&v) = self.index.get(&key) {
            return v;
        }
        self.vertices.push(key);
        self.index.insert(key, self.vertices.len() - 1);
        self.vertices.len() - 1
    }

    pub fn find(&self, set: u64, tag: u64) -> Option<usize> {
        self.index.get(&LgVertex { set, tag }).copied()
    }

    /// Adds the arc from vertex `from` loading `j` into `(from ∪ {j}, to_tag)`.
    pub fn add_arc(&mut self, from: usize, j: usize, to_tag: u64, weight: Weight, stage: usize) -> Result<usize, LgError> {
        let s = self.vertices[from].set;
        if j >= self.n || s >> j & 1 == 1 {
            return Err(LgError::Range(format!("arc loads {j} from {s:#b}")));
        }
        let to = self.vertex(s | 1 << j, to_tag);
        self.arcs.push(LgArc { from, to, j, weight, stage });
        Ok(self.arcs.len() - 1)
    }

    pub fn is_adaptive(&self) -> bool {
        self.arcs.iter().any(|a| matches!(a.weight, Weight::OnesOnly(_)))
    }

    pub fn arc_source(&self, e: usize) -> u64 {
        self.vertices[self.arcs[e].from].set
    }

    pub fn weight_on(&self, e: usize, z: Option<&[u8]>) -> f64 {
        self.arcs[e].weight.on(self.arc_source(e), z)
    }

    /// Negative complexity `Σ_e w_e` seen by `z` (nominal when `None`).
    pub fn negative_complexity(&self, z: Option<&[u8]>) -> f64 {
        (0..self.arcs.len()).map(|e| self.weight_on(e, z)).sum()
    }

    /// All weights multiplied by `a`.
    pub fn rebalanced(&self, a: f64) -> Self {
        let mut g = self.clone();
        for arc in &mut g.arcs {
            arc.weight = arc.weight.scaled(a);
        }
        g
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LgError> {
        let mut g: LearningGraph = serde_json::from_str(text).map_err(|e| LgError::Range(e.to_string()))?;
        g.index = g.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        if g.vertices.first() != Some(&LgVertex { set: 0, tag: 0 }) {
            return Err(LgError::Range("vertex 0 must be the root".into()));
        }
        for a in &g.arcs {
            let (s, t) = (g.vertices[a.from].set, g.vertices[a.to].set);
            if s >> a.j & 1 == 1 || t != s | 1 << a.j {
                return Err(LgError::Range("arc does not load its element".into()));
            }
        }
        Ok(g)
    }
}

/// Flow for one certificate member, dense over arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberFlow {
    pub generators: Vec<u64>,
    pub p: Vec<f64>,
}

impl MemberFlow {
    pub fn is_marked(&self, set: u64) -> bool {
        self.generators.iter().any(|&g| g & set == g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub members: Vec<MemberFlow>,
}

impl Flow {
    /// Checks unit value out of the root and conservation at unmarked
    /// vertices; returns the worst residual.
    pub fn validate(&self, g: &LearningGraph) -> Result<f64, LgError> {
        let mut worst: f64 = 0.0;
        for (mi, m) in self.members.iter().enumerate() {
            if m.p.len() != g.arcs.len() {
                return Err(LgError::Flow(format!("member {mi} has {} arc values", m.p.len())));
            }
            let mut net = vec![0.0; g.vertices.len()];
            for (a, &p) in g.arcs.iter().zip(&m.p) {
                net[a.from] -= p;
                net[a.to] += p;
            }
            let root = (net[0] + 1.0).abs();
            worst = worst.max(root);
            if root > FLOW_TOL {
                return Err(LgError::Flow(format!("member {mi}: root emits {}", -net[0])));
            }
            for (v, &x) in net.iter().enumerate().skip(1) {
                if !m.is_marked(g.vertices[v].set) {
                    worst = worst.max(x.abs());
                    if x.abs() > FLOW_TOL {
                        return Err(LgError::Flow(format!("member {mi}: imbalance {x:.3e} at unmarked vertex {v}")));
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Index of the first member all of whose generators restrict `x` to a
    /// 1-certificate of `f`.
    pub fn member_for(&self, f: &PartialFunction, x: &[u8]) -> Option<usize> {
        self.members.iter().position(|m| {
            m.generators.iter().all(|&s| is_b_certificate(f, &Assignment::restrict(x, s), true))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complexities {
    pub negative: f64,
    pub positive: f64,
    /// `√(C_N·C_P)`.
    pub total: f64,
}

impl Complexities {
    fn new(negative: f64, positive: f64) -> Self {
        Complexities { negative, positive, total: (negative * positive).sqrt() }
    }

    pub fn max(&self) -> f64 {
        self.negative.max(self.positive)
    }
}

fn positive_sum(g: &LearningGraph, p: &[f64], z: Option<&[u8]>) -> Result<f64, LgError> {
    let mut s = 0.0;
    for (e, &pe) in p.iter().enumerate() {
        if pe == 0.0 {
            continue;
        }
        let w = g.weight_on(e, z);
        if w <= 0.0 {
            return Err(LgError::ZeroWeight { arc: e, flow: pe });
        }
        s += pe * pe / w;
    }
    Ok(s)
}

/// `(C_N, C_P, √(C_N·C_P))` with nominal weights.
pub fn complexities(g: &LearningGraph, flow: &Flow) -> Result<Complexities, LgError> {
    flow.validate(g)?;
    let neg = g.negative_complexity(None);
    let mut pos: f64 = 0.0;
    for m in &flow.members {
        pos = pos.max(positive_sum(g, &m.p, None)?);
    }
    Ok(Complexities::new(neg, pos))
}

/// Complexities with value-dependent weights, maximised over the domain of `f`.
pub fn adaptive_complexities(g: &LearningGraph, flow: &Flow, f: &PartialFunction) -> Result<Complexities, LgError> {
    flow.validate(g)?;
    let mut neg: f64 = 0.0;
    let mut pos: f64 = 0.0;
    for (z, &v) in f.domain.iter().zip(&f.values) {
        if v {
            let m = flow.member_for(f, z).ok_or_else(|| LgError::CertificateMismatch(z.clone()))?;
            pos = pos.max(positive_sum(g, &flow.members[m].p, Some(z))?);
        } else {
            neg = neg.max(g.negative_complexity(Some(z)));
        }
    }
    Ok(Complexities::new(neg, pos))
}

/// Merges vertices with equal subsets; parallel arcs get summed weights and flows.
pub fn merge_duplicates(g: &LearningGraph, flow: &Flow) -> Result<(LearningGraph, Flow), LgError> {
    let mut h = LearningGraph::new(g.n);
    h.stages = g.stages.clone();
    let mut arc_of: HashMap<(u64, usize), usize> = HashMap::new();
    let mut map = vec![0usize; g.arcs.len()];
    for (e, a) in g.arcs.iter().enumerate() {
        let s = g.vertices[a.from].set;
        let key = (s, a.j);
        let id = match arc_of.get(&key) {
            Some(&id) => {
                let w = &mut h.arcs[id].weight;
                *w = match (*w, a.weight) {
                    (Weight::Constant(x), Weight::Constant(y)) => Weight::Constant(x + y),
                    (Weight::OnesOnly(x), Weight::OnesOnly(y)) => Weight::OnesOnly(x + y),
                    _ => return Err(LgError::Adaptive),
                };
                id
            }
            None => {
                let from = h.vertex(s, 0);
                let id = h.add_arc(from, a.j, 0, a.weight, a.stage)?;
                arc_of.insert(key, id);
                id
            }
        };
        map[e] = id;
    }
    let members = flow
        .members
        .iter()
        .map(|m| {
            let mut p = vec![0.0; h.arcs.len()];
            for (e, &x) in m.p.iter().enumerate() {
                p[map[e]] += x;
            }
            MemberFlow { generators: m.generators.clone(), p }
        })
        .collect();
    Ok((h, Flow { members }))
}

/// Complexity `L·√T` of a symmetric stage with length `L` and speciality `T`.
pub fn stage_complexity(length: f64, speciality: f64) -> f64 {
    length * speciality.sqrt()
}

/// One choice of internal randomness: its probability and the elements
/// loaded on each stage, in loading order.
pub type ProcedureRun = (f64, Vec<Vec<usize>>);

/// Builds a learning graph from a randomised loading procedure. Transitions
/// are keyed by (before, after, stage); internal path vertices are tagged by
/// the transition. Each stage is one symmetric class weighted by
/// `flow value / √speciality`.
pub fn from_procedure(
    n: usize,
    stage_names: &[&str],
    generators: &[Vec<u64>],
    runs: impl Fn(usize) -> Vec<ProcedureRun>,
) -> Result<(LearningGraph, Flow), LgError> {
    struct Transition {
        before: u64,
        order: Vec<usize>,
        stage: usize,
    }
    let stages = stage_names.len();
    let mut trans: Vec<Transition> = vec![];
    let mut key: HashMap<(u64, u64, usize), usize> = HashMap::new();
    let mut tflow: Vec<HashMap<usize, f64>> = vec![];
    for mi in 0..generators.len() {
        let mut used: HashMap<usize, f64> = HashMap::new();
        for (prob, loads) in runs(mi) {
            if loads.len() != stages {
                return Err(LgError::Range("procedure run has the wrong number of stages".into()));
            }
            let mut s = 0u64;
            for (st, order) in loads.iter().enumerate() {
                if order.is_empty() {
                    continue;
                }
                let after = order.iter().fold(s, |m, &j| m | 1 << j);
                let id = *key.entry((s, after, st)).or_insert_with(|| {
                    trans.push(Transition { before: s, order: order.clone(), stage: st });
                    trans.len() - 1
                });
                *used.entry(id).or_insert(0.0) += prob;
                s = after;
            }
        }
        tflow.push(used);
    }
    let mut info = vec![];
    let mut weight = vec![0.0; stages];
    for (st, name) in stage_names.iter().enumerate() {
        let total = trans.iter().filter(|t| t.stage == st).count();
        if total == 0 {
            info.push(StageInfo { name: name.to_string(), length: 0.0, speciality: 1.0 });
            continue;
        }
        let mut min_used = usize::MAX;
        let mut q: f64 = 0.0;
        for used in &tflow {
            let u: Vec<f64> = used.iter().filter(|(&t, _)| trans[t].stage == st).map(|(_, &p)| p).collect();
            min_used = min_used.min(u.len());
            q = u.iter().fold(q, |a, &b| a.max(b));
        }
        let speciality = total as f64 / min_used.max(1) as f64;
        weight[st] = q / speciality.sqrt();
        let length = tflow[0]
            .iter()
            .filter(|(&t, _)| trans[t].stage == st)
            .map(|(&t, &p)| p * trans[t].order.len() as f64)
            .sum();
        info.push(StageInfo { name: name.to_string(), length, speciality });
    }
    let mut g = LearningGraph::new(n);
    g.stages = info;
    let mut arcs_of = vec![vec![]; trans.len()];
    for (t, tr) in trans.iter().enumerate() {
        let mut v = g.vertex(tr.before, 0);
        let len = tr.order.len();
        for (i, &j) in tr.order.iter().enumerate() {
            let tag = if i + 1 == len { 0 } else { t as u64 + 1 };
            let e = g.add_arc(v, j, tag, Weight::Constant(weight[tr.stage]), tr.stage)?;
            arcs_of[t].push(e);
            v = g.arcs[e].to;
        }
    }
    let members = generators
        .iter()
        .zip(&tflow)
        .map(|(gens, used)| {
            let mut p = vec![0.0; g.arcs.len()];
            for (&t, &x) in used {
                for &e in &arcs_of[t] {
                    p[e] = x;
                }
            }
            MemberFlow { generators: gens.clone(), p }
        })
        .collect();
    Ok((g, Flow { members }))
}

/// Path loading `0, 1, …, n−1` with unit weights, for the trivial structure.
pub fn trivial_lg(n: usize) -> (LearningGraph, Flow) {
    let mut g = LearningGraph::new(n);
    let mut v = 0;
    for j in 0..n {
        let e = g.add_arc(v, j, 0, Weight::Constant(1.0), 0).expect("fresh element");
        v = g.arcs[e].to;
    }
    let full = crate::graphs::mask_of(n);
    (g, Flow { members: vec![MemberFlow { generators: vec![full], p: vec![1.0; n] }] })
}

/// Star of unit arcs `∅ → {j}`, for the OR structure.
pub fn or_lg(n: usize) -> (LearningGraph, Flow) {
    let mut g = LearningGraph::new(n);
    for j in 0..n {
        g.add_arc(0, j, 0, Weight::Constant(1.0), 0).expect("fresh element");
    }
    let members = (0..n)
        .map(|j| {
            let mut p = vec![0.0; n];
            p[j] = 1.0;
            MemberFlow { generators: vec![1 << j], p }
        })
        .collect();
    (g, Flow { members })
}

/// k-subset learning graph: load `r` unmarked elements at random, then the
/// marked elements one by one in increasing order.
pub fn ksubset_lg(n: usize, k: usize, r: usize) -> Result<(LearningGraph, Flow), LgError> {
    if k == 0 || r + k > n || n > 24 {
        return Err(LgError::Range(format!("ksubset_lg needs 1 <= k, r + k <= n <= 24 (n={n}, k={k}, r={r})")));
    }
    let members = combinations(n, k);
    let generators: Vec<Vec<u64>> = members.iter().map(|&a| vec![a]).collect();
    let mut names = vec!["I".to_string()];
    names.extend((1..=k).map(|i| format!("II.{i}")));
    let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let prob = 1.0 / binomial(n - k, r) as f64;
    from_procedure(n, &names, &generators, |mi| {
        let a = members[mi];
        let rest: Vec<usize> = (0..n).filter(|&i| a >> i & 1 == 0).collect();
        combinations(rest.len(), r)
            .into_iter()
            .map(|pick| {
                let mut loads = vec![bits(pick).map(|i| rest[i]).collect::<Vec<_>>()];
                loads.extend(bits(a).map(|j| vec![j]));
                (prob, loads)
            })
            .collect()
    })
}

/// Near-perfect matchings used as representative collision members: `i`
/// partners `r + i` for `i < r`, the remaining elements pair up in order;
/// when `r ≥ 2` a second member keeps the pair `{0, 1}` inside `[r]`.
pub fn collision_representatives(n: usize, r: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = vec![];
    if 2 * r <= n {
        let mut m: Vec<(usize, usize)> = (0..r).map(|i| (i, r + i)).collect();
        let mut k = 2 * r;
        while k + 1 < n {
            m.push((k, k + 1));
            k += 2;
        }
        out.push(m);
    }
    if r >= 2 {
        let mut m = vec![(0, 1)];
        let mut k = 2;
        while k + 1 < n {
            m.push((k, k + 1));
            k += 2;
        }
        out.push(m);
    }
    out
}

/// Collision learning graph: a path to `[r]` of weight `n/r` per arc, then
/// unit arcs from `[r]` to each `(r+1)`-superset.
pub fn collision_lg(n: usize, r: usize) -> Result<(LearningGraph, Flow), LgError> {
    collision_lg_for(n, r, &collision_representatives(n, r))
}

/// Collision learning graph with flows for the members generated by the given matchings.
pub fn collision_lg_for(n: usize, r: usize, matchings: &[Vec<(usize, usize)>]) -> Result<(LearningGraph, Flow), LgError> {
    if r == 0 || r >= n || n > 63 {
        return Err(LgError::Range(format!("collision_lg needs 1 <= r < n <= 63 (n={n}, r={r})")));
    }
    let w = n as f64 / r as f64;
    let mut g = LearningGraph::new(n);
    let mut v = 0;
    for j in 0..r {
        let e = g.add_arc(v, j, 0, Weight::Constant(w), 0)?;
        v = g.arcs[e].to;
    }
    let mut second = vec![usize::MAX; n];
    for j in r..n {
        second[j] = g.add_arc(v, j, 0, Weight::Constant(1.0), 1)?;
    }
    g.stages = vec![
        StageInfo { name: "I".into(), length: r as f64, speciality: 1.0 },
        StageInfo { name: "II".into(), length: 1.0, speciality: (n - r) as f64 / r as f64 },
    ];
    let prefix = crate::graphs::mask_of(r);
    let mut members = vec![];
    for m in matchings {
        let generators: Vec<u64> = m.iter().map(|&(a, b)| 1 << a | 1 << b).collect();
        let mut p = vec![0.0; g.arcs.len()];
        p[..r].iter_mut().for_each(|x| *x = 1.0);
        if !generators.iter().any(|&s| s & prefix == s) {
            for i in 0..r {
                let partner = m
                    .iter()
                    .find_map(|&(a, b)| if a == i { Some(b) } else if b == i { Some(a) } else { None })
                    .ok_or_else(|| LgError::Range(format!("element {i} of the prefix is unmatched")))?;
                p[second[partner]] = 1.0 / r as f64;
            }
        }
        members.push(MemberFlow { generators, p });
    }
    Ok((g, Flow { members }))
}

/// Triangle learning graph over the edge variables of a `vertices`-vertex
/// graph: the six stages A×B, a×B, b×(A∪a), c×L, bc, ac with roles
/// `a < b < c`.
pub fn triangle_lg(vertices: usize, r1: usize, r2: usize, l: usize) -> Result<(LearningGraph, Flow), LgError> {
    let nv = vertices;
    if nv < 3 || r1 == 0 || r2 == 0 || r1 + r2 + 3 > nv || l > r2 || nv * (nv - 1) / 2 > 63 {
        return Err(LgError::Range(format!("triangle_lg(vertices={nv}, r1={r1}, r2={r2}, l={l})")));
    }
    let n = nv * (nv - 1) / 2;
    let e = |u: usize, v: usize| pair_index(nv, u.min(v), u.max(v));
    let triples = combinations(nv, 3);
    let generators: Vec<Vec<u64>> = triples
        .iter()
        .map(|&t| {
            let v: Vec<usize> = bits(t).collect();
            vec![1 << e(v[0], v[1]) | 1 << e(v[0], v[2]) | 1 << e(v[1], v[2])]
        })
        .collect();
    let prob = 1.0 / (binomial(nv - 3, r1) * binomial(nv - 3 - r1, r2) * binomial(r2, l)) as f64;
    let sorted = |mut x: Vec<usize>| {
        x.sort_unstable();
        x
    };
    from_procedure(n, &["I", "II", "III", "IV", "V", "VI"], &generators, |mi| {
        let v: Vec<usize> = bits(triples[mi]).collect();
        let (a, b, c) = (v[0], v[1], v[2]);
        let rest: Vec<usize> = (0..nv).filter(|x| !v.contains(x)).collect();
        let mut runs = vec![];
        for pa in combinations(rest.len(), r1) {
            let aset: Vec<usize> = bits(pa).map(|i| rest[i]).collect();
            let rest2: Vec<usize> = rest.iter().copied().filter(|x| !aset.contains(x)).collect();
            for pb in combinations(rest2.len(), r2) {
                let bset: Vec<usize> = bits(pb).map(|i| rest2[i]).collect();
                let s1 = sorted(aset.iter().flat_map(|&x| bset.iter().map(move |&y| e(x, y))).collect());
                let s2 = sorted(bset.iter().map(|&y| e(a, y)).collect());
                let s3 = sorted(aset.iter().chain([a].iter()).map(|&x| e(b, x)).collect());
                for pl in combinations(r2, l) {
                    let s4 = sorted(bits(pl).map(|i| e(c, bset[i])).collect());
                    runs.push((prob, vec![s1.clone(), s2.clone(), s3.clone(), s4, vec![e(b, c)], vec![e(a, c)]]));
                }
            }
        }
        runs
    })
}

/// Optimal step weights `w_i = [C(k,i)·C(k+d,i)·(k+d−i)]^{-1/2}` of the adaptive threshold graph.
pub fn adaptive_threshold_weights(k: usize, d: usize) -> Vec<f64> {
    (0..=k)
        .map(|i| 1.0 / ((binomial(k, i) * binomial(k + d, i) * (k + d - i)) as f64).sqrt())
        .collect()
}

/// The two closed-form sums `(Σ_i C(k,i)(n−i)w_i, Σ_i [C(k+d,i)(k+d−i)w_i]^{-1})`.
pub fn adaptive_threshold_sums(n: usize, k: usize, d: usize) -> (f64, f64) {
    let w = adaptive_threshold_weights(k, d);
    let neg = (0..=k).map(|i| binomial(k, i) as f64 * (n - i) as f64 * w[i]).sum();
    let pos = (0..=k).map(|i| 1.0 / (binomial(k + d, i) as f64 * (k + d - i) as f64 * w[i])).sum();
    (neg, pos)
}

/// Adaptive learning graph for the promise threshold (0 if `|z| ≤ k`, 1 if
/// `|z| ≥ k+d`): all arcs from subsets of size at most `k`, weight gated on
/// all loaded values being 1; one flow member per positive input, spreading
/// flow uniformly over arcs that load a 1.
pub fn adaptive_threshold_lg(n: usize, k: usize, d: usize) -> Result<(LearningGraph, Flow, PartialFunction), LgError> {
    if k == 0 || d == 0 || k + d > n || n > 14 {
        return Err(LgError::Range(format!("adaptive_threshold_lg(n={n}, k={k}, d={d})")));
    }
    let f = PartialFunction::tabulate(n, 2, |z| {
        let h = crate::functions::hamming_weight(z);
        if h <= k {
            Some(false)
        } else if h >= k + d {
            Some(true)
        } else {
            None
        }
    })
    .map_err(|e| LgError::Range(e.to_string()))?;
    let w = adaptive_threshold_weights(k, d);
    let mut g = LearningGraph::new(n);
    for size in 0..=k {
        for s in combinations(n, size) {
            let v = g.vertex(s, 0);
            for j in (0..n).filter(|&j| s >> j & 1 == 0) {
                g.add_arc(v, j, 0, Weight::OnesOnly(w[size]), size)?;
            }
        }
    }
    let mut out: HashMap<usize, Vec<usize>> = HashMap::new();
    for (e, a) in g.arcs.iter().enumerate() {
        out.entry(a.from).or_default().push(e);
    }
    let mut members = vec![];
    for &xi in &f.positives() {
        let x = &f.domain[xi];
        let ones = x.iter().enumerate().filter(|(_, &b)| b == 1).fold(0u64, |m, (i, _)| m | 1 << i);
        let h = ones.count_ones() as usize;
        let mut p = vec![0.0; g.arcs.len()];
        let mut inflow = vec![0.0; g.vertices.len()];
        inflow[0] = 1.0;
        // vertices were created in size order, so one pass suffices
        for v in 0..g.vertices.len() {
            let s = g.vertices[v].set;
            if inflow[v] == 0.0 || s.count_ones() as usize > k {
                continue;
            }
            let share = inflow[v] / (h - s.count_ones() as usize) as f64;
            for &e in out.get(&v).map(|x| x.as_slice()).unwrap_or(&[]) {
                if ones >> g.arcs[e].j & 1 == 1 {
                    p[e] = share;
                    inflow[g.arcs[e].to] += share;
                }
            }
        }
        let generators = combinations(n, k + 1).into_iter().filter(|&s| s & ones == s).collect();
        members.push(MemberFlow { generators, p });
    }
    g.stages = (0..=k).map(|i| StageInfo { name: format!("step {i}"), length: 1.0, speciality: 1.0 }).collect();
    Ok((g, Flow { members }, f))
}

fn assignment_code(z: &[u8], set: u64, q: usize) -> u64 {
    bits(set).fold(0u64, |c, i| c * q as u64 + z[i] as u64)
}

/// Dual adversary solution of a constant-weight learning graph: for each arc
/// and assignment `α` on its source, one coordinate holding `p_e/√w_e` for
/// positive inputs satisfying `α` and `√w_e` for negative ones.
pub fn to_dual_adversary(g: &LearningGraph, flow: &Flow, f: &PartialFunction) -> Result<DualAdversarySolution, LgError> {
    if g.is_adaptive() {
        return Err(LgError::Adaptive);
    }
    flow.validate(g)?;
    let member: Vec<Option<usize>> = f
        .domain
        .iter()
        .zip(&f.values)
        .map(|(z, &v)| if v { flow.member_for(f, z).ok_or_else(|| LgError::CertificateMismatch(z.clone())).map(Some) } else { Ok(None) })
        .collect::<Result<_, _>>()?;
    let mut cols: Vec<HashMap<(usize, u64), usize>> = vec![HashMap::new(); g.n];
    let mut entries: Vec<Vec<(usize, usize, f64)>> = vec![vec![]; g.n];
    for (e, arc) in g.arcs.iter().enumerate() {
        let w = arc.weight.nominal();
        let s = g.vertices[arc.from].set;
        for (zi, z) in f.domain.iter().enumerate() {
            let val = match member[zi] {
                Some(m) => {
                    let p = flow.members[m].p[e];
                    if p == 0.0 {
                        continue;
                    }
                    if w <= 0.0 {
                        return Err(LgError::ZeroWeight { arc: e, flow: p });
                    }
                    p / w.sqrt()
                }
                None => w.sqrt(),
            };
            if val == 0.0 {
                continue;
            }
            let key = (e, assignment_code(z, s, f.q));
            let next = cols[arc.j].len();
            let c = *cols[arc.j].entry(key).or_insert(next);
            entries[arc.j].push((zi, c, val));
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
    Ok(DualAdversarySolution::new(f.clone(), factors, SolutionKind::Exact))
}

/// Span program of a constant-weight learning graph on a Boolean function:
/// one basis vector per (vertex, assignment on its set), target the root
/// vector, free vectors at 1-certificates, and for each arc and assignment
/// the two vectors `√w_e (t_α − t_{α∪{j↦b}})`. Stores the witnesses of the
/// construction (negative: indicator of agreeing assignments; positive:
/// coefficients `p_e/√w_e`).
pub fn to_span_program(g: &LearningGraph, flow: &Flow, f: &PartialFunction) -> Result<SpanProgram, LgError> {
    if f.q != 2 {
        return Err(LgError::NotBoolean);
    }
    if g.is_adaptive() {
        return Err(LgError::Adaptive);
    }
    flow.validate(g)?;
    let mut offset = vec![0usize; g.vertices.len()];
    let mut dim = 0usize;
    for (v, vx) in g.vertices.iter().enumerate() {
        offset[v] = dim;
        dim += 1usize << vx.set.count_ones();
        if dim > SPAN_DIM_BUDGET {
            return Err(LgError::Budget(dim, SPAN_DIM_BUDGET));
        }
    }
    let code_of = |set: u64, z: &dyn Fn(usize) -> u8| assignment_code(&(0..g.n).map(|i| if set >> i & 1 == 1 { z(i) } else { 0 }).collect::<Vec<u8>>(), set, 2);
    let unit = |i: usize| {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v
    };
    let mut free = vec![];
    for (v, vx) in g.vertices.iter().enumerate() {
        let els: Vec<usize> = bits(vx.set).collect();
        for code in 0..1u64 << els.len() {
            let mut a = Assignment { values: vec![None; g.n] };
            for (r, &i) in els.iter().enumerate() {
                a.values[i] = Some((code >> (els.len() - 1 - r) & 1) as u8);
            }
            if !f.positives().is_empty() && is_b_certificate(f, &a, true) && f.domain.iter().any(|z| a.agrees_with(z)) {
                free.push(unit(offset[v] + code as usize));
            }
        }
    }
    let mut inputs = vec![];
    let mut vec_of: HashMap<(usize, u64, u8), usize> = HashMap::new();
    for (e, arc) in g.arcs.iter().enumerate() {
        let w = arc.weight.nominal();
        let s = g.vertices[arc.from].set;
        let t = g.vertices[arc.to].set;
        let els: Vec<usize> = bits(s).collect();
        for code in 0..1u64 << els.len() {
            let val = |i: usize| {
                let r = els.iter().position(|&x| x == i).expect("element of source");
                (code >> (els.len() - 1 - r) & 1) as u8
            };
            for b in 0..2u8 {
                let tcode = code_of(t, &|i| if i == arc.j { b } else { val(i) });
                let mut vv = vec![0.0; dim];
                vv[offset[arc.from] + code as usize] += w.sqrt();
                vv[offset[arc.to] + tcode as usize] -= w.sqrt();
                vec_of.insert((e, code, b), inputs.len());
                inputs.push(InputVector { v: vv, label: Label::Var { j: arc.j, b } });
            }
        }
    }
    let mut target = vec![0.0; dim];
    target[0] = 1.0;
    let mut stored = vec![];
    for (z, &val) in f.domain.iter().zip(&f.values) {
        if val {
            let m = flow.member_for(f, z).ok_or_else(|| LgError::CertificateMismatch(z.clone()))?;
            let mut coeff = vec![0.0; inputs.len()];
            let mut size = 0.0;
            for (e, arc) in g.arcs.iter().enumerate() {
                let p = flow.members[m].p[e];
                if p == 0.0 {
                    continue;
                }
                let w = arc.weight.nominal();
                if w <= 0.0 {
                    return Err(LgError::ZeroWeight { arc: e, flow: p });
                }
                let code = assignment_code(z, g.vertices[arc.from].set, 2);
                coeff[vec_of[&(e, code, z[arc.j])]] = p / w.sqrt();
                size += p * p / w;
            }
            stored.push(WitnessRecord { input: z.clone(), kind: WitnessKind::Positive, vector: coeff, size });
        } else {
            let mut wv = vec![0.0; dim];
            for (v, vx) in g.vertices.iter().enumerate() {
                wv[offset[v] + assignment_code(z, vx.set, 2) as usize] = 1.0;
            }
            let size = g.negative_complexity(None);
            stored.push(WitnessRecord { input: z.clone(), kind: WitnessKind::Negative, vector: wv, size });
        }
    }
    Ok(SpanProgram { n: g.n, dim, target, inputs, free, stored })
}

/// Sparse dual certificate `α_S(M)`, dense over members for each stored set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualLGCertificate {
    pub n: usize,
    pub members: usize,
    values: HashMap<u64, Vec<f64>>,
}

impl DualLGCertificate {
    pub fn zero(n: usize, members: usize) -> Self {
        DualLGCertificate { n, members, values: HashMap::new() }
    }

    /// Tabulates `value(S, M)` over all `S` with `|S| ≤ max_size`, leaving
    /// zero on marked sets.
    pub fn from_fn(cert: &CertificateStructure, max_size: usize, value: impl Fn(u64, usize) -> f64) -> Self {
        let mut a = Self::zero(cert.n, cert.len());
        for size in 0..=max_size.min(cert.n) {
            for s in combinations(cert.n, size) {
                for m in 0..cert.len() {
                    if !cert.contains(m, s) {
                        a.set(s, m, value(s, m));
                    }
                }
            }
        }
        a
    }

    /// `C(n,k)^{-1/2}·max(n^{k/(k+1)} − |S|, 0)` on the k-subset structure.
    pub fn ksubset(cert: &CertificateStructure, k: usize) -> Self {
        let n = cert.n;
        let radius = (n as f64).powf(k as f64 / (k as f64 + 1.0));
        let scale = 1.0 / (binomial(n, k) as f64).sqrt();
        Self::from_fn(cert, radius.floor() as usize, |s, _| scale * (radius - s.count_ones() as f64).max(0.0))
    }

    /// `n^{-1/2}·max(n^{1/3} − |S|, 0)` on the hidden-shift structure.
    pub fn hidden_shift(cert: &CertificateStructure) -> Self {
        let n = cert.n as f64;
        let radius = n.cbrt();
        Self::from_fn(cert, radius.floor() as usize, |s, _| (radius - s.count_ones() as f64).max(0.0) / n.sqrt())
    }

    pub fn get(&self, set: u64, member: usize) -> f64 {
        self.values.get(&set).map_or(0.0, |v| v[member])
    }

    pub fn set(&mut self, set: u64, member: usize, value: f64) {
        if value == 0.0 && !self.values.contains_key(&set) {
            return;
        }
        let m = self.members;
        self.values.entry(set).or_insert_with(|| vec![0.0; m])[member] = value;
    }

    /// Sets carrying a stored value, in increasing order.
    pub fn support(&self) -> Vec<u64> {
        let mut s: Vec<u64> = self.values.keys().copied().collect();
        s.sort_unstable();
        s
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut c = self.clone();
        c.values.values_mut().for_each(|v| v.iter_mut().for_each(|x| *x *= a));
        c
    }

    /// `(S-bitmask, member, value)` triples of the nonzero entries.
    pub fn to_triples(&self) -> Vec<(u64, usize, f64)> {
        let mut out = vec![];
        for s in self.support() {
            for (m, &x) in self.values[&s].iter().enumerate() {
                if x != 0.0 {
                    out.push((s, m, x));
                }
            }
        }
        out
    }

    pub fn from_triples(n: usize, members: usize, triples: &[(u64, usize, f64)]) -> Self {
        let mut a = Self::zero(n, members);
        for &(s, m, x) in triples {
            a.set(s, m, x);
        }
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    /// `√(Σ_M α_∅(M)²)`.
    pub objective: f64,
    /// Largest `Σ_M (α_S(M) − α_{S∪{j}}(M))²` over lattice arcs.
    pub max_constraint: f64,
    pub worst_arc: Option<(u64, usize)>,
}

impl DualReport {
    /// Objective after scaling `α` so that the worst constraint is 1.
    pub fn normalized_objective(&self) -> f64 {
        if self.max_constraint > 0.0 {
            self.objective / self.max_constraint.sqrt()
        } else {
            self.objective
        }
    }
}

/// Exact scan of every lattice arc touching the support of `α`.
pub fn check_dual_certificate(cert: &CertificateStructure, a: &DualLGCertificate) -> Result<DualReport, LgError> {
    if a.members != cert.len() || a.n != cert.n {
        return Err(LgError::Range("certificate and structure sizes differ".into()));
    }
    for s in a.support() {
        for m in 0..a.members {
            if a.get(s, m) != 0.0 && cert.contains(m, s) {
                return Err(LgError::AlphaOnMarked { set: s, member: m });
            }
        }
    }
    let mut arcs: HashSet<(u64, usize)> = HashSet::new();
    for s in a.support() {
        for j in 0..a.n {
            if s >> j & 1 == 1 {
                arcs.insert((s & !(1 << j), j));
            } else {
                arcs.insert((s, j));
            }
        }
    }
    let mut worst = 0.0;
    let mut at = None;
    for &(s, j) in &arcs {
        let t = s | 1 << j;
        let c: f64 = (0..a.members).map(|m| (a.get(s, m) - a.get(t, m)).powi(2)).sum();
        if c > worst || (c == worst && at.map_or(true, |w| (s, j) < w)) {
            worst = c;
            at = Some((s, j));
        }
    }
    let objective = (0..a.members).map(|m| a.get(0, m).powi(2)).sum::<f64>().sqrt();
    Ok(DualReport { objective, max_constraint: worst, worst_arc: at })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityCheck {
    pub dual: f64,
    pub primal: f64,
    pub holds: bool,
}

/// Normalized dual objective against the primal total `√(C_N·C_P)`.
pub fn weak_lg_duality_check(
    g: &LearningGraph,
    flow: &Flow,
    a: &DualLGCertificate,
    cert: &CertificateStructure,
) -> Result<DualityCheck, LgError> {
    let primal = complexities(g, flow)?.total;
    let dual = check_dual_certificate(cert, a)?.normalized_objective();
    Ok(DualityCheck { dual, primal, holds: dual <= primal * (1.0 + 1e-9) + 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{make_named, Family};

    #[test]
    fn trivial_and_or_complexities() {
        let (g, f) = trivial_lg(5);
        let c = complexities(&g, &f).unwrap();
        assert_eq!((c.negative, c.positive, c.total), (5.0, 5.0, 5.0));
        let (g, f) = or_lg(7);
        let c = complexities(&g, &f).unwrap();
        assert_eq!((c.negative, c.positive), (7.0, 1.0));
        assert!((c.total - 7f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn collision_at_27() {
        let (g, f) = collision_lg(27, 3).unwrap();
        let c = complexities(&g, &f).unwrap();
        assert!((c.negative - 51.0).abs() < 1e-12);
        assert!((c.positive - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.total - 34f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ksubset_figure_graph() {
        let (g, f) = ksubset_lg(5, 2, 2).unwrap();
        assert!(f.validate(&g).unwrap() < 1e-12);
        for m in &f.members {
            for &p in &m.p {
                assert!(p == 0.0 || (p - 1.0 / 3.0).abs() < 1e-12);
            }
        }
        // key vertices: ∅, ten 2-sets, nine 3-sets, five 4-sets; {2,3,4} is
        // unreachable since a_1 < a_2 are loaded in ascending order
        let keys = g.vertices.iter().filter(|v| v.tag == 0).count();
        assert_eq!(keys, 1 + 10 + 9 + 5);
        assert!(g.find(0b11100, 0).is_none());
    }

    #[test]
    fn merge_parallel_arcs() {
        let mut g = LearningGraph::new(1);
        g.add_arc(0, 0, 0, Weight::Constant(1.0), 0).unwrap();
        g.add_arc(0, 0, 1, Weight::Constant(1.0), 0).unwrap();
        let f = Flow { members: vec![MemberFlow { generators: vec![1], p: vec![0.5, 0.5] }] };
        let (h, hf) = merge_duplicates(&g, &f).unwrap();
        assert_eq!(h.arcs.len(), 1);
        assert_eq!(h.arcs[0].weight, Weight::Constant(2.0));
        assert_eq!(hf.members[0].p, vec![1.0]);
        assert!(complexities(&h, &hf).unwrap().positive <= complexities(&g, &f).unwrap().positive + 1e-15);
    }

    #[test]
    fn or_lg_dual_and_span() {
        let f = make_named(&Family::Or { n: 3 }).unwrap();
        let (g, fl) = or_lg(3);
        let s = to_dual_adversary(&g, &fl, &f).unwrap();
        assert!(s.check_feasible().max_violation < 1e-12);
        assert!((s.objective() - 3.0).abs() < 1e-12);
        let f2 = make_named(&Family::Or { n: 2 }).unwrap();
        let (g2, fl2) = or_lg(2);
        let p = to_span_program(&g2, &fl2, &f2).unwrap();
        assert_eq!(p.dim, 5);
    }

    #[test]
    fn dual_certificates() {
        let cert = CertificateStructure::k_subset(8, 2);
        let a = DualLGCertificate::ksubset(&cert, 2);
        let r = check_dual_certificate(&cert, &a).unwrap();
        assert!((r.objective - 4.0).abs() < 1e-12);
        assert!(r.max_constraint >= 1.0 && r.max_constraint < 4.0);
        let z = DualLGCertificate::zero(8, cert.len());
        let r = check_dual_certificate(&cert, &z).unwrap();
        assert_eq!((r.objective, r.max_constraint), (0.0, 0.0));
        let mut bad = DualLGCertificate::zero(8, cert.len());
        bad.set(0b11, 0, 1.0);
        assert!(check_dual_certificate(&cert, &bad).is_err());
    }

    #[test]
    fn adaptive_threshold_matches_closed_forms() {
        let (g, fl, f) = adaptive_threshold_lg(6, 2, 2).unwrap();
        let c = adaptive_complexities(&g, &fl, &f).unwrap();
        let (neg, pos) = adaptive_threshold_sums(6, 2, 2);
        assert!((c.negative - neg).abs() < 1e-9, "{} vs {neg}", c.negative);
        assert!((c.positive - pos).abs() < 1e-9, "{} vs {pos}", c.positive);
    }
}
