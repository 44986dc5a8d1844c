//! Adversary matrices on the bipartite layout (positive rows, negative
//! columns), the spectral ratio, norm lemmas, and the boundedly-generated
//! construction for sum problems.

use crate::functions::{all_strings, combinations, CertificateStructure, Family, Input, PartialFunction};
use crate::graphs::bits;
use crate::learning_graphs::{check_dual_certificate, DualLGCertificate};
use crate::numerics::{hadamard, spectral_norm, Mat};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversaryError {
    #[error("adversary matrix is zero")]
    ZeroMatrix,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("decomposition mismatch: max |A - B∘C| = {0:.3e}")]
    Decomposition(f64),
    #[error("dimension {0} exceeds the budget of {1}")]
    Budget(usize, usize),
    #[error("dual certificate infeasible: worst constraint {0:.6}")]
    Infeasible(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Real matrix with inline row and column input labels. Rows may repeat
/// inputs (stacked layouts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryMatrix {
    pub rows: Vec<Input>,
    pub cols: Vec<Input>,
    #[serde(with = "mat_serde")]
    pub m: Mat,
}

pub(crate) mod mat_serde {
    use crate::numerics::Mat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
    }
}

impl AdversaryMatrix {
    pub fn new(rows: Vec<Input>, cols: Vec<Input>, m: Mat) -> Result<Self, AdversaryError> {
        if m.shape() != (rows.len(), cols.len()) {
            return Err(AdversaryError::Shape(format!(
                "matrix {:?} vs {} row labels and {} column labels",
                m.shape(),
                rows.len(),
                cols.len()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(AdversaryError::Invalid("non-finite entry".into()));
        }
        Ok(AdversaryMatrix { rows, cols, m })
    }

    /// Full bipartite layout of `f`: rows `f^{-1}(1)`, columns `f^{-1}(0)`, in domain order.
    pub fn bipartite(f: &PartialFunction, m: Mat) -> Result<Self, AdversaryError> {
        let rows = f.positives().into_iter().map(|i| f.domain[i].clone()).collect();
        let cols = f.negatives().into_iter().map(|i| f.domain[i].clone()).collect();
        Self::new(rows, cols, m)
    }

    pub fn n(&self) -> usize {
        self.rows.first().or(self.cols.first()).map_or(0, |z| z.len())
    }

    /// Checks the labels against `f`: rows positive, columns negative.
    pub fn validate_against(&self, f: &PartialFunction) -> Result<(), AdversaryError> {
        for z in &self.rows {
            if f.value(z) != Some(true) {
                return Err(AdversaryError::Invalid(format!("row label {z:?} is not a positive input")));
            }
        }
        for z in &self.cols {
            if f.value(z) != Some(false) {
                return Err(AdversaryError::Invalid(format!("column label {z:?} is not a negative input")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("matrix serializes")
    }

    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        let m = Mat::from_fn(self.m.nrows(), self.m.ncols(), |i, j| self.m[(row_perm[i], col_perm[j])]);
        AdversaryMatrix {
            rows: row_perm.iter().map(|&i| self.rows[i].clone()).collect(),
            cols: col_perm.iter().map(|&j| self.cols[j].clone()).collect(),
            m,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMask {
    pub j: usize,
    pub m: Mat,
}

pub fn delta_mask(g: &AdversaryMatrix, j: usize) -> DeltaMask {
    let m = Mat::from_fn(g.rows.len(), g.cols.len(), |a, b| (g.rows[a][j] != g.cols[b][j]) as u8 as f64);
    DeltaMask { j, m }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvRatio {
    pub norm: f64,
    pub masked_norms: Vec<f64>,
    /// `+inf` when every masked norm vanishes.
    pub ratio: f64,
    pub infinite: bool,
}

pub fn adv_ratio(g: &AdversaryMatrix) -> Result<AdvRatio, AdversaryError> {
    let norm = spectral_norm(&g.m);
    if norm == 0.0 {
        return Err(AdversaryError::ZeroMatrix);
    }
    let masked_norms: Vec<f64> = (0..g.n()).map(|j| spectral_norm(&hadamard(&g.m, &delta_mask(g, j).m))).collect();
    let worst = masked_norms.iter().copied().fold(0.0, f64::max);
    if worst <= 1e-14 * norm {
        return Ok(AdvRatio { norm, masked_norms, ratio: f64::INFINITY, infinite: true });
    }
    Ok(AdvRatio { norm, masked_norms, ratio: norm / worst, infinite: false })
}

/// 0/1 matrix on related pairs of `xs × ys`, embedded in the full bipartite layout.
pub fn relation_adversary(
    f: &PartialFunction,
    xs: &[Input],
    ys: &[Input],
    rel: impl Fn(&[u8], &[u8]) -> bool,
) -> Result<AdversaryMatrix, AdversaryError> {
    for x in xs {
        if f.value(x) != Some(true) {
            return Err(AdversaryError::Invalid(format!("{x:?} is not in f^-1(1)")));
        }
    }
    for y in ys {
        if f.value(y) != Some(false) {
            return Err(AdversaryError::Invalid(format!("{y:?} is not in f^-1(0)")));
        }
    }
    let pos = f.positives();
    let neg = f.negatives();
    let m = Mat::from_fn(pos.len(), neg.len(), |a, b| {
        let x = &f.domain[pos[a]];
        let y = &f.domain[neg[b]];
        (xs.contains(x) && ys.contains(y) && rel(x, y)) as u8 as f64
    });
    AdversaryMatrix::bipartite(f, m)
}

pub fn hamming_distance(x: &[u8], y: &[u8]) -> usize {
    x.iter().zip(y).filter(|(a, b)| a != b).count()
}

/// The relation adversary of `k`-threshold on `n` bits: weight-`k` rows,
/// weight-`(k-1)` columns, related at Hamming distance one.
pub fn threshold_relation_adversary(k: usize, n: usize) -> Result<AdversaryMatrix, AdversaryError> {
    let f = crate::functions::make_named(&Family::Threshold { k, n })
        .map_err(|e| AdversaryError::Invalid(e.to_string()))?;
    let weight = |z: &Input| z.iter().filter(|&&s| s == 1).count();
    let xs: Vec<Input> = f.domain.iter().filter(|z| weight(z) == k).cloned().collect();
    let ys: Vec<Input> = f.domain.iter().filter(|z| weight(z) + 1 == k).cloned().collect();
    relation_adversary(&f, &xs, &ys, |x, y| hamming_distance(x, y) == 1)
}

const AMBAINIS_ROWS: [&str; 8] = ["0000", "0001", "0011", "0111", "1111", "1110", "1100", "1000"];
const AMBAINIS_COLS: [&str; 8] = ["0010", "0101", "1011", "0110", "1101", "1010", "0100", "1001"];
const AMBAINIS_PATTERN: [&str; 8] =
    ["acdbdcab", "bacdbdca", "abacdbdc", "cabacdbd", "dcabacdb", "bdcabacd", "dbdcabac", "cdbdcaba"];

/// The weighted adversary matrix of the 4-bit monotone-sequence function,
/// with entries drawn from `(a, b, c, d)`.
pub fn ambainis_gamma(weights: [f64; 4]) -> AdversaryMatrix {
    let parse = |s: &str| -> Input { s.bytes().map(|b| b - b'0').collect() };
    let m = Mat::from_fn(8, 8, |i, j| weights[(AMBAINIS_PATTERN[i].as_bytes()[j] - b'a') as usize]);
    AdversaryMatrix {
        rows: AMBAINIS_ROWS.iter().map(|s| parse(s)).collect(),
        cols: AMBAINIS_COLS.iter().map(|s| parse(s)).collect(),
        m,
    }
}

/// `max r_i(B) c_j(C)` over the support of `A = B ∘ C`; dominates `‖A‖`.
pub fn mathias_bound(a: &Mat, b: &Mat, c: &Mat) -> Result<f64, AdversaryError> {
    if a.shape() != b.shape() || a.shape() != c.shape() {
        return Err(AdversaryError::Shape(format!("{:?}, {:?}, {:?}", a.shape(), b.shape(), c.shape())));
    }
    let err = (a - hadamard(b, c)).amax();
    if err > 1e-12 {
        return Err(AdversaryError::Decomposition(err));
    }
    let r: Vec<f64> = (0..b.nrows()).map(|i| b.row(i).norm()).collect();
    let cn: Vec<f64> = (0..c.ncols()).map(|j| c.column(j).norm()).collect();
    let mut best = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if a[(i, j)] != 0.0 {
                best = best.max(r[i] * cn[j]);
            }
        }
    }
    Ok(best)
}

/// `(‖A ∘ Δ_j‖, 2‖A‖)`.
pub fn hadamard_delta_check(a: &Mat, mask: &DeltaMask) -> Result<(f64, f64), AdversaryError> {
    if a.shape() != mask.m.shape() {
        return Err(AdversaryError::Shape(format!("{:?} vs mask {:?}", a.shape(), mask.m.shape())));
    }
    Ok((spectral_norm(&hadamard(a, &mask.m)), 2.0 * spectral_norm(a)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalArray {
    pub k: usize,
    pub q: usize,
    pub rows: Vec<Input>,
}

impl OrthogonalArray {
    /// Every coordinate is uniquely balanced: fixing the other `k - 1` symbols
    /// leaves exactly `|rows| / q^{k-1}` completions.
    pub fn check(&self) -> bool {
        let per = self.rows.len() as f64 / (self.q as f64).powi(self.k as i32 - 1);
        if per.fract() != 0.0 {
            return false;
        }
        let per = per as usize;
        for i in 0..self.k {
            let mut counts = std::collections::HashMap::new();
            for r in &self.rows {
                let mut key = r.clone();
                key.remove(i);
                *counts.entry(key).or_insert(0usize) += 1;
            }
            let full = (self.q as u64).pow(self.k as u32 - 1) as usize;
            if counts.len() != full || counts.values().any(|&c| c != per) {
                return false;
            }
        }
        true
    }

    pub fn contains(&self, t: &[u8]) -> bool {
        self.rows.iter().any(|r| r.as_slice() == t)
    }
}

/// All `k`-tuples over `[q]` summing to 0 mod `q`.
pub fn modular_sum_array(k: usize, q: usize) -> OrthogonalArray {
    assert!(k >= 1 && q >= 2, "modular_sum_array needs k >= 1, q >= 2");
    let rows = all_strings(k, q).filter(|t| t.iter().map(|&s| s as usize).sum::<usize>() % q == 0).collect();
    OrthogonalArray { k, q, rows }
}

/// `E_S = ⊗_i (E1 if i ∈ S else E0)` on `[q]^n`, with `E0 = J/q`, `E1 = I - J/q`.
pub fn e_projector(n: usize, q: usize, s: u64) -> Mat {
    e_projector_signed(n, q, s, None)
}

/// As [`e_projector`], but position `flip` (if in `s`) carries `-E0` instead of `E1`.
fn e_projector_signed(n: usize, q: usize, s: u64, flip: Option<usize>) -> Mat {
    let e0 = Mat::from_element(q, q, 1.0 / q as f64);
    let e1 = Mat::identity(q, q) - &e0;
    let mut out = Mat::from_element(1, 1, 1.0);
    for i in 0..n {
        let factor = if s >> i & 1 == 1 {
            if flip == Some(i) {
                -&e0
            } else {
                e1.clone()
            }
        } else {
            e0.clone()
        };
        out = out.kronecker(&factor);
    }
    out
}

#[derive(Debug, Clone)]
pub struct BoundedlyGenerated {
    pub gamma: AdversaryMatrix,
    /// For each `j`, the matrix with `E1 ↦ -E0` at position `j`; agrees with
    /// `Γ` on every pair differing at `j`.
    pub gamma_prime: Vec<Mat>,
    /// Member index of each row.
    pub row_member: Vec<usize>,
    pub function: PartialFunction,
}

pub const BOUNDEDLY_DIM_BUDGET: usize = 4096;

/// Adversary matrix for the `k`-sum function built from a feasible dual
/// learning-graph certificate over a structure with one `k`-set generator per member.
pub fn boundedly_generated_gamma(
    cert: &CertificateStructure,
    q: usize,
    alpha: &DualLGCertificate,
) -> Result<BoundedlyGenerated, AdversaryError> {
    let n = cert.n;
    let gens = cert
        .single_generators()
        .ok_or_else(|| AdversaryError::Invalid("every member needs exactly one generator".into()))?;
    let k = gens.first().map_or(0, |g| g.count_ones() as usize);
    if k == 0 || gens.iter().any(|g| g.count_ones() as usize != k) {
        return Err(AdversaryError::Invalid("generators must share a positive size k".into()));
    }
    if q < 2 * cert.len() {
        return Err(AdversaryError::Invalid(format!("q = {q} must be at least 2|cert| = {}", 2 * cert.len())));
    }
    let dim = (q as u128).pow(n as u32);
    if dim > BOUNDEDLY_DIM_BUDGET as u128 {
        return Err(AdversaryError::Budget(dim as usize, BOUNDEDLY_DIM_BUDGET));
    }
    let report = check_dual_certificate(cert, alpha).map_err(|e| AdversaryError::Invalid(e.to_string()))?;
    if report.max_constraint > 1.0 + 1e-9 {
        return Err(AdversaryError::Infeasible(report.max_constraint));
    }
    let f = crate::functions::make_named(&Family::KSum { k, n, q }).map_err(|e| AdversaryError::Invalid(e.to_string()))?;
    let strings: Vec<Input> = all_strings(n, q).collect();
    let ys: Vec<usize> = (0..strings.len()).filter(|&i| f.value(&strings[i]) == Some(false)).collect();
    let array = modular_sum_array(k, q);
    let qn = dim as f64;

    let subsets: Vec<u64> = (0..=n).flat_map(|s| combinations(n, s)).collect();
    let e_plain: Vec<Mat> = subsets.iter().map(|&s| e_projector(n, q, s)).collect();

    let mut rows = vec![];
    let mut row_member = vec![];
    let mut blocks: Vec<Mat> = vec![];
    let mut blocks_prime: Vec<Vec<Mat>> = vec![vec![]; n];
    for (mi, &a) in gens.iter().enumerate() {
        let pos: Vec<usize> = bits(a).collect();
        let xm: Vec<usize> = (0..strings.len())
            .filter(|&i| {
                let t: Vec<u8> = pos.iter().map(|&p| strings[i][p]).collect();
                array.contains(&t)
            })
            .collect();
        let scale = (qn / xm.len() as f64).sqrt();
        let mut g = Mat::zeros(strings.len(), strings.len());
        for (si, &s) in subsets.iter().enumerate() {
            let w = alpha.get(s, mi);
            if w != 0.0 {
                g += &e_plain[si] * w;
            }
        }
        let restrict = |g: &Mat| Mat::from_fn(xm.len(), ys.len(), |r, c| g[(xm[r], ys[c])] * scale);
        blocks.push(restrict(&g));
        for (j, bp) in blocks_prime.iter_mut().enumerate() {
            let mut gp = Mat::zeros(strings.len(), strings.len());
            for &s in &subsets {
                let w = alpha.get(s, mi);
                if w != 0.0 {
                    gp += e_projector_signed(n, q, s, Some(j)) * w;
                }
            }
            bp.push(restrict(&gp));
        }
        for &x in &xm {
            rows.push(strings[x].clone());
            row_member.push(mi);
        }
    }
    let stack = |bs: &[Mat]| {
        let total: usize = bs.iter().map(|b| b.nrows()).sum();
        let mut m = Mat::zeros(total, ys.len());
        let mut r0 = 0;
        for b in bs {
            m.view_mut((r0, 0), b.shape()).copy_from(b);
            r0 += b.nrows();
        }
        m
    };
    let gamma = AdversaryMatrix::new(rows, ys.iter().map(|&i| strings[i].clone()).collect(), stack(&blocks))?;
    let gamma_prime = blocks_prime.iter().map(|b| stack(b)).collect();
    Ok(BoundedlyGenerated { gamma, gamma_prime, row_member, function: f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::make_named;

    #[test]
    fn delta_mask_entries() {
        let f = make_named(&Family::Or { n: 2 }).unwrap();
        let g = AdversaryMatrix::bipartite(&f, Mat::from_element(3, 1, 1.0)).unwrap();
        let d = delta_mask(&g, 0);
        // rows 01, 10, 11; column 00
        assert_eq!(d.m[(1, 0)], 1.0);
        assert_eq!(d.m[(0, 0)], 0.0);
    }

    #[test]
    fn threshold_ratio_is_two() {
        let g = threshold_relation_adversary(2, 3).unwrap();
        for i in 0..g.m.nrows() {
            let s: f64 = g.m.row(i).sum();
            assert!(s == 0.0 || s == 2.0);
        }
        let r = adv_ratio(&g).unwrap();
        assert!((r.ratio - 2.0).abs() < 1e-9);
    }

    #[test]
    fn identity_and_zero() {
        let f = make_named(&Family::Identity).unwrap();
        let g = AdversaryMatrix::bipartite(&f, Mat::from_element(1, 1, 1.0)).unwrap();
        assert!((adv_ratio(&g).unwrap().ratio - 1.0).abs() < 1e-12);
        let z = AdversaryMatrix::bipartite(&f, Mat::zeros(1, 1)).unwrap();
        assert_eq!(adv_ratio(&z), Err(AdversaryError::ZeroMatrix));
        let f3 = make_named(&Family::Threshold { k: 2, n: 3 }).unwrap();
        let empty = relation_adversary(&f3, &[], &[], |_, _| true).unwrap();
        assert_eq!(adv_ratio(&empty), Err(AdversaryError::ZeroMatrix));
    }

    #[test]
    fn or_relation_norm() {
        let f = make_named(&Family::Or { n: 4 }).unwrap();
        let xs: Vec<Input> = (0..4).map(|i| (0..4).map(|j| (i == j) as u8).collect()).collect();
        let g = relation_adversary(&f, &xs, &[vec![0; 4]], |x, y| hamming_distance(x, y) == 1).unwrap();
        assert!((spectral_norm(&g.m) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ambainis_values() {
        let f = make_named(&Family::Ambainis).unwrap();
        let g = ambainis_gamma([0.75, 0.5, 0.0, 0.0]);
        g.validate_against(&f).unwrap();
        assert!((adv_ratio(&g).unwrap().ratio - 2.5).abs() < 1e-9);
        let g = ambainis_gamma([0.5788, 0.7065, 0.1834, -0.2120]);
        assert!(adv_ratio(&g).unwrap().ratio >= 2.513);
    }

    #[test]
    fn mathias_examples() {
        let i = Mat::identity(3, 3);
        assert!((mathias_bound(&i, &i, &i).unwrap() - 1.0).abs() < 1e-15);
        let h = 3f64.sqrt() / 2.0;
        let a = Mat::from_row_slice(4, 4, &[0., 0., 0., 0.5, 0.75, 0., 0.5, 0., 0., 0.5, 0., 0.75, 0.5, 0., 0., 0.]);
        let b = Mat::from_row_slice(4, 4, &[0., 0., 0., 1., h, 0., 0.5, 0., 0., 0.5, 0., h, 1., 0., 0., 0.]);
        let c = Mat::from_row_slice(4, 4, &[0., 0., 0., 0.5, h, 0., 1., 0., 0., 1., 0., h, 0.5, 0., 0., 0.]);
        assert!((mathias_bound(&a, &b, &c).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(mathias_bound(&a, &b, &b), Err(AdversaryError::Decomposition(_))));
    }

    #[test]
    fn lemma_gamma_on_threshold() {
        let g = threshold_relation_adversary(2, 3).unwrap();
        for j in 0..3 {
            let (lhs, rhs) = hadamard_delta_check(&g.m, &delta_mask(&g, j)).unwrap();
            assert!((lhs - 1.0).abs() < 1e-12 && lhs <= rhs);
        }
    }

    #[test]
    fn modular_arrays() {
        assert_eq!(modular_sum_array(2, 3).rows, vec![vec![0, 0], vec![1, 2], vec![2, 1]]);
        assert_eq!(modular_sum_array(1, 5).rows, vec![vec![0]]);
        let a = modular_sum_array(3, 4);
        assert_eq!(a.rows.len(), 16);
        assert!(a.check());
        let broken = OrthogonalArray { k: 2, q: 3, rows: vec![vec![0, 0], vec![1, 2]] };
        assert!(!broken.check());
    }

    #[test]
    fn e_projectors_are_orthogonal_family() {
        for (n, q) in [(2, 3), (3, 2), (2, 5)] {
            let subsets: Vec<u64> = (0..1u64 << n).collect();
            let es: Vec<Mat> = subsets.iter().map(|&s| e_projector(n, q, s)).collect();
            let mut total = Mat::zeros(es[0].nrows(), es[0].ncols());
            for (a, ea) in es.iter().enumerate() {
                total += ea;
                for (b, eb) in es.iter().enumerate() {
                    let want = if a == b { ea.clone() } else { Mat::zeros(ea.nrows(), ea.ncols()) };
                    assert!((ea * eb - want).amax() < 1e-12);
                }
            }
            assert!((total - Mat::identity(es[0].nrows(), es[0].nrows())).amax() < 1e-12);
        }
    }

    #[test]
    fn json_keeps_labels() {
        let g = ambainis_gamma([0.75, 0.5, 0.0, 0.0]);
        let back: AdversaryMatrix = serde_json::from_value(g.to_json()).unwrap();
        assert_eq!(back, g);
    }
}
