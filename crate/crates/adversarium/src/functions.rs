//! Explicit partial functions `[q]^n ⊇ D → {0,1}`, named families and
//! certificate machinery.
//!
//! Symbols are 0-based: the alphabet is `0..q`. Subsets of variables are `u64`
//! bitmasks.

use crate::graphs::{all_pairs, bits, mask_of, SimpleGraph};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub type Input = Vec<u8>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("function has no positive input")]
    NoPositiveInput,
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialFunction {
    pub n: usize,
    pub q: usize,
    pub domain: Vec<Input>,
    pub values: Vec<bool>,
    index: HashMap<Input, usize>,
}

impl PartialFunction {
    pub fn new(n: usize, q: usize, domain: Vec<Input>, values: Vec<bool>) -> Result<Self, FunctionError> {
        if n > 64 {
            return Err(FunctionError::InvalidParams(format!("n = {n} exceeds 64")));
        }
        if !(1..=256).contains(&q) {
            return Err(FunctionError::InvalidParams(format!("alphabet size {q} out of range")));
        }
        if domain.len() != values.len() {
            return Err(FunctionError::InvalidTable(format!(
                "{} inputs but {} values",
                domain.len(),
                values.len()
            )));
        }
        let mut index = HashMap::with_capacity(domain.len());
        for (i, z) in domain.iter().enumerate() {
            if z.len() != n {
                return Err(FunctionError::InvalidTable(format!("input {z:?} has length {}", z.len())));
            }
            if z.iter().any(|&s| s as usize >= q) {
                return Err(FunctionError::InvalidTable(format!("input {z:?} has a symbol >= {q}")));
            }
            if index.insert(z.clone(), i).is_some() {
                return Err(FunctionError::InvalidTable(format!("duplicate input {z:?}")));
            }
        }
        Ok(PartialFunction { n, q, domain, values, index })
    }

    /// Tabulates `rule` over all of `[q]^n`, keeping inputs where it returns `Some`.
    pub fn tabulate(n: usize, q: usize, rule: impl Fn(&[u8]) -> Option<bool>) -> Result<Self, FunctionError> {
        let total = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if total > 1 << 24 {
            return Err(FunctionError::InvalidParams(format!("[{q}]^{n} is too large to tabulate")));
        }
        let mut domain = vec![];
        let mut values = vec![];
        for z in all_strings(n, q) {
            if let Some(v) = rule(&z) {
                domain.push(z);
                values.push(v);
            }
        }
        Self::new(n, q, domain, values)
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn index_of(&self, z: &[u8]) -> Option<usize> {
        self.index.get(z).copied()
    }

    pub fn value(&self, z: &[u8]) -> Option<bool> {
        self.index_of(z).map(|i| self.values[i])
    }

    /// Domain indices with value `b`, in domain order.
    pub fn preimage(&self, b: bool) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.values[i] == b).collect()
    }

    pub fn positives(&self) -> Vec<usize> {
        self.preimage(true)
    }

    pub fn negatives(&self) -> Vec<usize> {
        self.preimage(false)
    }

    pub fn is_boolean(&self) -> bool {
        self.q == 2
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<TableRow> = self
            .domain
            .iter()
            .zip(&self.values)
            .map(|(z, &v)| TableRow { input: z.clone(), value: v as u8 })
            .collect();
        serde_json::to_value(FunctionTable { n: self.n, q: self.q, rows }).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FunctionError> {
        let t: FunctionTable = serde_json::from_str(text).map_err(|e| FunctionError::Parse(e.to_string()))?;
        let mut domain = vec![];
        let mut values = vec![];
        for r in t.rows {
            if r.value > 1 {
                return Err(FunctionError::InvalidTable(format!("value {} is not 0/1", r.value)));
            }
            domain.push(r.input);
            values.push(r.value == 1);
        }
        Self::new(t.n, t.q, domain, values)
    }

    /// CSV with header `x1,...,xn,f`. The alphabet size is inferred unless given.
    pub fn from_csv(text: &str, q: Option<usize>) -> Result<Self, FunctionError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| FunctionError::Parse(e.to_string()))?.clone();
        let n = header.len().checked_sub(1).ok_or_else(|| FunctionError::Parse("empty header".into()))?;
        for (i, h) in header.iter().enumerate() {
            let expect = if i < n { format!("x{}", i + 1) } else { "f".to_string() };
            if h != expect {
                return Err(FunctionError::Parse(format!("header column {i} is {h:?}, expected {expect:?}")));
            }
        }
        let mut domain = vec![];
        let mut values = vec![];
        for rec in rdr.records() {
            let rec = rec.map_err(|e| FunctionError::Parse(e.to_string()))?;
            let parsed: Result<Vec<u8>, _> = rec.iter().map(|s| s.parse::<u8>()).collect();
            let parsed = parsed.map_err(|e| FunctionError::Parse(e.to_string()))?;
            if parsed.len() != n + 1 || parsed[n] > 1 {
                return Err(FunctionError::Parse(format!("bad row {parsed:?}")));
            }
            values.push(parsed[n] == 1);
            domain.push(parsed[..n].to_vec());
        }
        let q = q.unwrap_or_else(|| domain.iter().flatten().map(|&s| s as usize + 1).max().unwrap_or(1).max(2));
        Self::new(n, q, domain, values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = (1..=self.n).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",");
        out.push_str(",f\n");
        for (z, &v) in self.domain.iter().zip(&self.values) {
            for s in z {
                out.push_str(&format!("{s},"));
            }
            out.push_str(if v { "1\n" } else { "0\n" });
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct TableRow {
    input: Vec<u8>,
    value: u8,
}

#[derive(Serialize, Deserialize)]
struct FunctionTable {
    n: usize,
    q: usize,
    rows: Vec<TableRow>,
}

/// All strings of `[q]^n` in lexicographic order (position 0 most significant).
pub fn all_strings(n: usize, q: usize) -> impl Iterator<Item = Input> {
    let total = (q as u64).pow(n as u32);
    (0..total).map(move |mut code| {
        let mut z = vec![0u8; n];
        for i in (0..n).rev() {
            z[i] = (code % q as u64) as u8;
            code /= q as u64;
        }
        z
    })
}

pub fn hamming_weight(z: &[u8]) -> usize {
    z.iter().filter(|&&s| s != 0).count()
}

/// Bitmask of positions where `x` and `y` agree.
pub fn agreement(x: &[u8], y: &[u8]) -> u64 {
    x.iter().zip(y).enumerate().fold(0, |m, (i, (a, b))| if a == b { m | 1 << i } else { m })
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-subsets of `[n]` as bitmasks, in colex order.
pub fn combinations(n: usize, k: usize) -> Vec<u64> {
    let mut out = vec![];
    fn rec(start: usize, n: usize, k: usize, cur: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(cur);
            return;
        }
        for i in start..n {
            if n - i < k {
                break;
            }
            rec(i + 1, n, k - 1, cur | 1 << i, out);
        }
    }
    rec(0, n, k, 0, &mut out);
    out
}

/// Named problem families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Threshold { k: usize, n: usize },
    Or { n: usize },
    And { n: usize },
    Parity { n: usize },
    Ambainis,
    KDistinctness { k: usize, n: usize, q: usize },
    ElementDistinctness { n: usize, q: usize },
    KSum { k: usize, n: usize, q: usize },
    GraphCollision { graph: SimpleGraph },
    /// `n` variables (even), 1-to-1 versus 2-to-1.
    Collision { n: usize, q: usize },
    /// `2m` variables; positives pair every `i < m` with a partner in the second half.
    SetEquality { m: usize, q: usize },
    /// Weight at most `k` maps to 0, weight at least `k + d` maps to 1.
    PromiseThreshold { n: usize, k: usize, d: usize },
    /// Edge variables of a graph on `vertices` vertices.
    Triangle { vertices: usize },
    Identity,
    Constant { n: usize, value: bool },
}

pub fn make_named(family: &Family) -> Result<PartialFunction, FunctionError> {
    use Family::*;
    let bad = |m: &str| Err(FunctionError::InvalidParams(m.to_string()));
    match family {
        Threshold { k, n } => {
            if *k > *n || *n == 0 {
                return bad("threshold needs 0 < n and k <= n");
            }
            let k = *k;
            PartialFunction::tabulate(*n, 2, |z| Some(hamming_weight(z) >= k))
        }
        Or { n } => make_named(&Threshold { k: 1, n: *n }),
        And { n } => make_named(&Threshold { k: *n, n: *n }),
        Parity { n } => PartialFunction::tabulate(*n, 2, |z| Some(hamming_weight(z) % 2 == 1)),
        Ambainis => PartialFunction::tabulate(4, 2, |z| {
            let up = z.windows(2).all(|w| w[0] <= w[1]);
            let down = z.windows(2).all(|w| w[0] >= w[1]);
            Some(up || down)
        }),
        KDistinctness { k, n, q } => {
            if *k < 2 || *k > *n {
                return bad("k-distinctness needs 2 <= k <= n");
            }
            let k = *k;
            let q = *q;
            PartialFunction::tabulate(*n, q, |z| {
                let mut counts = vec![0usize; q];
                for &s in z {
                    counts[s as usize] += 1;
                }
                Some(counts.iter().any(|&c| c >= k))
            })
        }
        ElementDistinctness { n, q } => make_named(&KDistinctness { k: 2, n: *n, q: *q }),
        KSum { k, n, q } => {
            if *k == 0 || *k > *n || *q < 2 {
                return bad("k-sum needs 1 <= k <= n and q >= 2");
            }
            let subsets = combinations(*n, *k);
            let q = *q;
            PartialFunction::tabulate(*n, q, |z| {
                Some(subsets.iter().any(|&s| bits(s).map(|i| z[i] as usize).sum::<usize>() % q == 0))
            })
        }
        GraphCollision { graph } => {
            let edges = graph.edges();
            PartialFunction::tabulate(graph.n, 2, |z| Some(edges.iter().any(|&(a, b)| z[a] == 1 && z[b] == 1)))
        }
        Collision { n, q } => {
            if n % 2 != 0 || *n == 0 || *q < *n {
                return bad("collision needs even n > 0 and q >= n");
            }
            let half = n / 2;
            PartialFunction::tabulate(*n, *q, |z| {
                let mut counts = HashMap::new();
                for &s in z {
                    *counts.entry(s).or_insert(0usize) += 1;
                }
                if counts.values().all(|&c| c == 1) {
                    Some(false)
                } else if counts.len() == half && counts.values().all(|&c| c == 2) {
                    Some(true)
                } else {
                    None
                }
            })
        }
        SetEquality { m, q } => {
            if *m == 0 || *q < 2 * m {
                return bad("set equality needs m > 0 and q >= 2m");
            }
            let m = *m;
            PartialFunction::tabulate(2 * m, *q, |z| {
                let (a, b) = z.split_at(m);
                let distinct = |s: &[u8]| {
                    let mut v = s.to_vec();
                    v.sort_unstable();
                    v.windows(2).all(|w| w[0] != w[1])
                };
                if !distinct(a) || !distinct(b) {
                    return None;
                }
                let mut sa = a.to_vec();
                let mut sb = b.to_vec();
                sa.sort_unstable();
                sb.sort_unstable();
                if sa == sb {
                    Some(true)
                } else if sa.iter().all(|s| !sb.contains(s)) {
                    Some(false)
                } else {
                    None
                }
            })
        }
        PromiseThreshold { n, k, d } => {
            if *d == 0 || k + d > *n {
                return bad("promise threshold needs d >= 1 and k + d <= n");
            }
            let (k, d) = (*k, *d);
            PartialFunction::tabulate(*n, 2, |z| {
                let w = hamming_weight(z);
                if w <= k {
                    Some(false)
                } else if w >= k + d {
                    Some(true)
                } else {
                    None
                }
            })
        }
        Triangle { vertices } => {
            let nv = *vertices;
            if nv == 0 || nv > 11 {
                return bad("triangle supports 1..=11 vertices");
            }
            let pairs = all_pairs(nv);
            PartialFunction::tabulate(pairs.len(), 2, |z| {
                let mask = z.iter().enumerate().fold(0u64, |m, (i, &s)| m | (s as u64) << i);
                Some(SimpleGraph::from_pair_mask(nv, mask).contains_subgraph(&SimpleGraph::complete(3)))
            })
        }
        Identity => PartialFunction::tabulate(1, 2, |z| Some(z[0] == 1)),
        Constant { n, value } => {
            let v = *value;
            PartialFunction::tabulate(*n, 2, |_| Some(v))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub values: Vec<Option<u8>>,
}

impl Assignment {
    pub fn restrict(z: &[u8], support: u64) -> Self {
        Assignment {
            values: z.iter().enumerate().map(|(i, &s)| (support >> i & 1 == 1).then_some(s)).collect(),
        }
    }

    pub fn support(&self) -> u64 {
        self.values.iter().enumerate().fold(0, |m, (i, v)| if v.is_some() { m | 1 << i } else { m })
    }

    pub fn agrees_with(&self, z: &[u8]) -> bool {
        self.values.iter().zip(z).all(|(v, &s)| v.map_or(true, |v| v == s))
    }
}

/// Whether every domain input consistent with `a` has value 1.
pub fn is_certificate(f: &PartialFunction, a: &Assignment) -> bool {
    is_b_certificate(f, a, true)
}

pub fn is_b_certificate(f: &PartialFunction, a: &Assignment, b: bool) -> bool {
    f.domain.iter().zip(&f.values).all(|(z, &v)| v == b || !a.agrees_with(z))
}

/// Upward-closed families of subsets, each the closure of a generator antichain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateStructure {
    pub n: usize,
    pub members: Vec<Vec<u64>>,
}

impl CertificateStructure {
    pub fn new(n: usize, members: Vec<Vec<u64>>) -> Result<Self, FunctionError> {
        for (k, gens) in members.iter().enumerate() {
            if gens.is_empty() {
                return Err(FunctionError::InvalidParams(format!("member {k} has no generators")));
            }
            for (i, &a) in gens.iter().enumerate() {
                if a & !mask_of(n) != 0 {
                    return Err(FunctionError::InvalidParams(format!("member {k} generator outside [n]")));
                }
                for (j, &b) in gens.iter().enumerate() {
                    if i != j && a & b == a {
                        return Err(FunctionError::InvalidParams(format!(
                            "member {k}: generator {a:#b} is contained in {b:#b}"
                        )));
                    }
                }
            }
        }
        Ok(CertificateStructure { n, members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Whether `set` belongs to member `m`.
    pub fn contains(&self, m: usize, set: u64) -> bool {
        self.members[m].iter().any(|&g| g & set == g)
    }

    /// Member `a` is a subset of member `b`.
    pub fn member_subset(&self, a: usize, b: usize) -> bool {
        self.members[a].iter().all(|&g| self.contains(b, g))
    }

    pub fn generated_by(n: usize, sets: Vec<u64>) -> Self {
        Self::new(n, sets.into_iter().map(|s| vec![s]).collect()).expect("single generators form antichains")
    }

    pub fn k_subset(n: usize, k: usize) -> Self {
        Self::generated_by(n, combinations(n, k))
    }

    pub fn or(n: usize) -> Self {
        Self::k_subset(n, 1)
    }

    pub fn trivial(n: usize) -> Self {
        Self::generated_by(n, vec![mask_of(n)])
    }

    /// Collision structure on `2m` variables: one member per perfect matching.
    pub fn collision(m: usize) -> Self {
        let mut members = vec![];
        fn rec(left: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            let a = left.trailing_zeros() as usize;
            for b in bits(left & !(1 << a)) {
                cur.push(1 << a | 1 << b);
                rec(left & !(1 << a) & !(1 << b), cur, out);
                cur.pop();
            }
        }
        rec(mask_of(2 * m), &mut vec![], &mut members);
        Self::new(2 * m, members).expect("matchings are antichains")
    }

    /// Set equality structure: matchings between the two halves.
    pub fn set_equality(m: usize) -> Self {
        let members = crate::graphs::permutations(m)
            .into_iter()
            .map(|p| (0..m).map(|i| 1u64 << i | 1u64 << (m + p[i])).collect())
            .collect();
        Self::new(2 * m, members).expect("matchings are antichains")
    }

    /// Hidden shift structure on `2m` variables: member `d` pairs `i` with `m + (i + d) mod m`.
    pub fn hidden_shift(m: usize) -> Self {
        let members = (0..m)
            .map(|d| (0..m).map(|i| 1u64 << i | 1u64 << (m + (i + d) % m)).collect())
            .collect();
        Self::new(2 * m, members).expect("shifts are antichains")
    }

    /// Triangle structure on the edge variables of `vertices` vertices.
    pub fn triangle(vertices: usize) -> Self {
        let n = vertices * vertices.saturating_sub(1) / 2;
        let idx = |a, b| crate::graphs::pair_index(vertices, a, b);
        let sets = combinations(vertices, 3)
            .into_iter()
            .map(|t| {
                let v: Vec<usize> = bits(t).collect();
                1u64 << idx(v[0], v[1]) | 1u64 << idx(v[0], v[2]) | 1u64 << idx(v[1], v[2])
            })
            .collect();
        Self::generated_by(n, sets)
    }

    /// Every member has exactly one generator.
    pub fn single_generators(&self) -> Option<Vec<u64>> {
        self.members.iter().map(|g| (g.len() == 1).then(|| g[0])).collect()
    }
}

/// Minimal certificate supports of positive input `x`, as an antichain.
fn certificate_generators(f: &PartialFunction, x: &[u8]) -> Vec<u64> {
    let masks: Vec<u64> = f.negatives().into_iter().map(|j| agreement(x, &f.domain[j])).collect();
    let mut by_size: Vec<u64> = (0..1u64 << f.n).collect();
    by_size.sort_by_key(|s| (s.count_ones(), *s));
    let mut gens: Vec<u64> = vec![];
    for s in by_size {
        if gens.iter().any(|&g| g & s == g) {
            continue;
        }
        if masks.iter().all(|&m| m & s != s) {
            gens.push(s);
        }
    }
    gens
}

pub fn certificate_structure_of(f: &PartialFunction) -> Result<CertificateStructure, FunctionError> {
    if f.n > 20 {
        return Err(FunctionError::InvalidParams("brute force limited to n <= 20".into()));
    }
    let pos = f.positives();
    if pos.is_empty() {
        return Err(FunctionError::NoPositiveInput);
    }
    let mut members: Vec<Vec<u64>> = vec![];
    for i in pos {
        let mut g = certificate_generators(f, &f.domain[i]);
        g.sort_unstable();
        if !members.contains(&g) {
            members.push(g);
        }
    }
    let all = CertificateStructure { n: f.n, members: members.clone() };
    let keep: Vec<Vec<u64>> = (0..members.len())
        .filter(|&a| !(0..members.len()).any(|b| b != a && all.member_subset(b, a) && !all.member_subset(a, b)))
        .map(|a| members[a].clone())
        .collect();
    CertificateStructure::new(f.n, keep)
}

/// Support of a smallest certificate of domain input `z` for its own value
/// (first in lexicographic bitmask order among the smallest).
pub fn minimal_certificate(f: &PartialFunction, z: usize) -> u64 {
    let x = &f.domain[z];
    let v = f.values[z];
    let masks: Vec<u64> = f.preimage(!v).into_iter().map(|j| agreement(x, &f.domain[j])).collect();
    (0..=f.n)
        .find_map(|k| combinations(f.n, k).into_iter().find(|&s| masks.iter().all(|&m| m & s != s)))
        .unwrap_or(mask_of(f.n))
}

/// Smallest certificate size of `z` for its own value.
pub fn certificate_size(f: &PartialFunction, z: usize) -> usize {
    minimal_certificate(f, z).count_ones() as usize
}

/// `(C, C0, C1)`.
pub fn certificate_complexity(f: &PartialFunction) -> (usize, usize, usize) {
    let mut c = [0usize; 2];
    for z in 0..f.len() {
        let b = f.values[z] as usize;
        c[b] = c[b].max(certificate_size(f, z));
    }
    (c[0].max(c[1]), c[0], c[1])
}

pub fn block_sensitivity(f: &PartialFunction) -> usize {
    let mut best = 0;
    for z in 0..f.len() {
        let x = &f.domain[z];
        let v = f.values[z];
        let mut blocks: Vec<u64> = f
            .preimage(!v)
            .into_iter()
            .map(|j| !agreement(x, &f.domain[j]) & mask_of(f.n))
            .collect();
        blocks.sort_unstable();
        blocks.dedup();
        let minimal: Vec<u64> = blocks
            .iter()
            .copied()
            .filter(|&b| !blocks.iter().any(|&c| c != b && c & b == c))
            .collect();
        fn pack(blocks: &[u64], used: u64) -> usize {
            let mut best = 0;
            for (i, &b) in blocks.iter().enumerate() {
                if b & used == 0 {
                    best = best.max(1 + pack(&blocks[i + 1..], used | b));
                }
            }
            best
        }
        best = best.max(pack(&minimal, 0));
    }
    best
}
