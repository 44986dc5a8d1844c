//! Dense statevector simulation of the query algorithms: phase detection,
//! amplitude amplification, Grover and Deutsch-Jozsa, the composed
//! reflection lemmas, and the walks evaluating span programs and dual
//! adversary solutions. Every oracle application is counted.

use crate::dual_adversary::DualAdversarySolution;
use crate::functions::Input;
use crate::numerics::{range_basis, singular_values, svd, sym_eigen, Mat, Vector};
use crate::span_programs::{eliminate_free, Label, SpanError, SpanProgram, WitnessSizes};
use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

/// Largest simulated walk space.
pub const DIM_BUDGET: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("state dimension {0} exceeds the budget of {1}")]
    Budget(usize, usize),
    #[error("not an isometry: max |A*A - I| = {0:.3e}")]
    NotIsometry(f64),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("span program error: {0}")]
    Span(#[from] SpanError),
}

/// Deterministic generator used by every simulated run.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_complex(v: &Vector) -> CVec {
    v.map(|x| C64::new(x, 0.0))
}

pub fn to_complex_mat(m: &Mat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amps: CVec,
}

impl QuantumState {
    pub fn new(amps: CVec) -> Result<Self, SimError> {
        if (amps.norm() - 1.0).abs() > 1e-9 {
            return Err(SimError::Invalid(format!("state has norm {}", amps.norm())));
        }
        Ok(QuantumState { amps })
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut amps = CVec::zeros(dim);
        amps[i] = C64::new(1.0, 0.0);
        QuantumState { amps }
    }

    pub fn uniform(dim: usize) -> Self {
        QuantumState { amps: CVec::from_element(dim, C64::new(1.0 / (dim as f64).sqrt(), 0.0)) }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Samples a computational-basis outcome.
    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample(&self.probabilities(), rng)
    }
}

fn sample<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut r = rng.gen::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        if r < p {
            return i;
        }
        r -= p;
    }
    probs.len() - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMode {
    /// `|j⟩ ↦ (−1)^{z_j} |j⟩` on Boolean strings.
    Phase,
    /// `|j⟩|v⟩ ↦ |j⟩|v + z_j mod q⟩`.
    Register,
}

/// Input oracle with a query counter; each forward or inverse application
/// counts once.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryOracle {
    pub z: Input,
    pub q: usize,
    pub mode: OracleMode,
    count: usize,
}

impl QueryOracle {
    pub fn new(z: Input, q: usize, mode: OracleMode) -> Result<Self, SimError> {
        if z.iter().any(|&s| s as usize >= q) {
            return Err(SimError::Invalid("symbol outside the alphabet".into()));
        }
        if mode == OracleMode::Phase && q != 2 {
            return Err(SimError::Invalid("phase oracles need a Boolean alphabet".into()));
        }
        Ok(QueryOracle { z, q, mode, count: 0 })
    }

    pub fn queries(&self) -> usize {
        self.count
    }

    pub fn reset(&mut self) {
        self.count = 0;
    }

    /// Phase oracle on an index register of dimension `n`.
    pub fn apply_phase(&mut self, state: &mut CVec) {
        assert_eq!(self.mode, OracleMode::Phase);
        assert_eq!(state.len(), self.z.len());
        self.count += 1;
        for (j, a) in state.iter_mut().enumerate() {
            if self.z[j] == 1 {
                *a = -*a;
            }
        }
    }

    /// Register oracle on `|i⟩|v⟩` (index `i·q + v`); `vars[i]` is the queried
    /// variable, `None` acting as a variable fixed to 0.
    pub fn apply_register(&mut self, state: &mut CVec, vars: &[Option<usize>], inverse: bool) {
        assert_eq!(self.mode, OracleMode::Register);
        assert_eq!(state.len(), vars.len() * self.q);
        self.count += 1;
        let q = self.q;
        for (i, var) in vars.iter().enumerate() {
            let Some(j) = *var else { continue };
            let a = self.z[j] as usize;
            let shift = if inverse { q - a } else { a } % q;
            if shift == 0 {
                continue;
            }
            let block: Vec<C64> = (0..q).map(|v| state[i * q + v]).collect();
            for v in 0..q {
                state[i * q + (v + shift) % q] = block[v];
            }
        }
    }

    /// Classical query of one variable.
    pub fn read(&mut self, j: usize) -> u8 {
        self.count += 1;
        self.z[j]
    }
}

/// One round of phase detection.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRound {
    pub levels: usize,
    pub controlled_applications: usize,
    /// Probability that the output qubit reads 0 (phase 0 detected).
    pub p_zero: f64,
    /// Normalised register state after reading 0.
    pub zero_state: Option<CVec>,
}

/// Phase detection with `K = ⌈8/δ⌉` counter levels: uniform superposition on
/// the counter, `U` applied to the branches with counter `≥ k` for
/// `k = 1..K−1`, inverse superposition, output 1 iff the counter is nonzero.
/// All branches start from `state`, so the branch with counter `k` holds `U^k`
/// of it and each ladder rung is one controlled application of `U`.
pub fn phase_detection(u: &mut dyn FnMut(&CVec) -> CVec, delta: f64, state: &CVec) -> Result<DetectionRound, SimError> {
    if !(delta > 0.0) {
        return Err(SimError::Invalid(format!("delta must be positive, got {delta}")));
    }
    let levels = (8.0 / delta).ceil() as usize;
    let mut cur = state.clone();
    let mut sum = state.clone();
    for _ in 1..levels {
        cur = u(&cur);
        sum += &cur;
    }
    let avg = sum / C64::new(levels as f64, 0.0);
    let p_zero = avg.norm_squared() / state.norm_squared();
    let zero_state = (p_zero > 1e-300).then(|| avg.normalize());
    Ok(DetectionRound { levels, controlled_applications: levels - 1, p_zero: p_zero.min(1.0), zero_state })
}

/// One-sided amplification: output 1 if any of `⌈log₂(1/ε)⌉` rounds reads 1.
pub fn detect_phase<R: Rng + ?Sized>(
    u: &mut dyn FnMut(&CVec) -> CVec,
    delta: f64,
    eps: f64,
    state: &CVec,
    rng: &mut R,
) -> Result<bool, SimError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SimError::Invalid(format!("error must lie in (0, 1), got {eps}")));
    }
    let rounds = (1.0 / eps).log2().ceil().max(1.0) as usize;
    for _ in 0..rounds {
        let r = phase_detection(u, delta, state)?;
        if rng.gen::<f64>() >= r.p_zero {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `(2ψψ* − I) v`.
fn reflect_about(psi: &CVec, v: &CVec) -> CVec {
    let c = psi.dotc(v);
    psi * (c * 2.0) - v
}

/// Detection mode: phase detection at `δ = √ε` on the step "check phase, then
/// reflect about ψ", starting from ψ. Returns the output bit.
pub fn amplitude_amplification_detect<R: Rng + ?Sized>(
    psi: &CVec,
    check: &mut dyn FnMut(&mut CVec),
    eps: f64,
    rng: &mut R,
) -> Result<bool, SimError> {
    let mut step = |v: &CVec| {
        let mut w = v.clone();
        check(&mut w);
        reflect_about(psi, &w)
    };
    let r = phase_detection(&mut step, eps.sqrt(), psi)?;
    Ok(rng.gen::<f64>() >= r.p_zero)
}

/// Geometric schedule of the search mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSchedule {
    pub factor: f64,
    pub repeats: usize,
    /// Largest number of walk steps tried.
    pub max_steps: usize,
}

impl SearchSchedule {
    pub fn for_size(n: usize) -> Self {
        SearchSchedule { factor: 1.5, repeats: 2, max_steps: ((std::f64::consts::PI / 4.0) * (n as f64).sqrt() * 1.5).ceil() as usize + 1 }
    }
}

/// Search mode: `⌊i⌋` steps from ψ, measure, check classically; `i` grows
/// geometrically until the schedule is exhausted.
pub fn amplitude_amplification_find<R: Rng + ?Sized>(
    psi: &CVec,
    check: &mut dyn FnMut(&mut CVec),
    is_marked: &mut dyn FnMut(usize) -> bool,
    schedule: SearchSchedule,
    rng: &mut R,
) -> Option<usize> {
    let mut i = 1.0f64;
    while i.floor() as usize <= schedule.max_steps {
        for _ in 0..schedule.repeats {
            let mut v = psi.clone();
            for _ in 0..i.floor() as usize {
                check(&mut v);
                v = reflect_about(psi, &v);
            }
            let x = QuantumState { amps: v }.measure(rng);
            if is_marked(x) {
                return Some(x);
            }
        }
        i *= schedule.factor;
    }
    None
}

/// Grover search for a 1 in a Boolean string through a phase oracle.
pub fn grover<R: Rng + ?Sized>(oracle: &mut QueryOracle, rng: &mut R) -> Option<usize> {
    let n = oracle.z.len();
    let psi = QuantumState::uniform(n).amps;
    let schedule = SearchSchedule::for_size(n);
    let cell = std::cell::RefCell::new(oracle);
    let mut check = |v: &mut CVec| cell.borrow_mut().apply_phase(v);
    let mut marked = |x: usize| cell.borrow_mut().read(x) == 1;
    amplitude_amplification_find(&psi, &mut check, &mut marked, schedule, rng)
}

/// One-query Deutsch-Jozsa: 0 for constant strings, 1 for balanced ones.
pub fn deutsch_jozsa<R: Rng + ?Sized>(oracle: &mut QueryOracle, rng: &mut R) -> bool {
    let n = oracle.z.len();
    let uniform = QuantumState::uniform(n).amps;
    let mut v = uniform.clone();
    oracle.apply_phase(&mut v);
    // the inverse uniform superposition maps ψ to e_0, so ⟨e_0|·⟩ = ⟨ψ|v⟩
    let p0 = uniform.dotc(&v).norm_sqr();
    rng.gen::<f64>() >= p0
}

/// Eigenphase comparison for `U = (2BB*−I)(2AA*−I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Sorted absolute eigenphases.
    pub phases: Vec<f64>,
    pub predicted: Vec<f64>,
    pub max_mismatch: f64,
    pub plus_one: usize,
    pub predicted_plus_one: usize,
    pub minus_one: usize,
    pub predicted_minus_one: usize,
    /// Singular values of `D = A*B`.
    pub singular_values: Vec<f64>,
}

fn isometry_defect(a: &Mat) -> f64 {
    (a.transpose() * a - Mat::identity(a.ncols(), a.ncols())).amax()
}

fn reflection(a: &Mat) -> Mat {
    let n = a.nrows();
    a * a.transpose() * 2.0 - Mat::identity(n, n)
}

/// The composed reflection `(2BB*−I)(2AA*−I)`.
pub fn composed_reflection(a: &Mat, b: &Mat) -> Mat {
    reflection(b) * reflection(a)
}

/// Absolute eigenphases `|θ|` of a real orthogonal matrix, sorted. The
/// symmetric part `H` has eigenvalues `cos θ` and the skew part `K` satisfies
/// `‖Kv‖ = |sin θ|` on them, so `atan2` stays accurate near 0 and π.
pub fn absolute_eigenphases(u: &Mat) -> Result<Vec<f64>, SimError> {
    let h = (u + u.transpose()) * 0.5;
    let k = (u - u.transpose()) * 0.5;
    let (_, vecs) = sym_eigen(&h, 1e-9).map_err(|e| SimError::Invalid(e.to_string()))?;
    let mut out: Vec<f64> = vecs
        .column_iter()
        .map(|v| {
            let c = v.dot(&(&h * v));
            (&k * v).norm().atan2(c)
        })
        .collect();
    out.sort_by(|x, y| x.partial_cmp(y).expect("finite phases"));
    Ok(out)
}

/// Computes the absolute eigenphases of the composed reflection and the
/// multiset predicted from the singular values `cos θ_j` of `D = A*B`. The
/// spectrum of a real orthogonal matrix is closed under conjugation, so the
/// signs carry no extra information.
pub fn reflection_spectrum_check(a: &Mat, b: &Mat) -> Result<SpectrumReport, SimError> {
    if a.nrows() != b.nrows() {
        return Err(SimError::Invalid("A and B need the same number of rows".into()));
    }
    for m in [a, b] {
        let d = isometry_defect(m);
        if d > 1e-9 {
            return Err(SimError::NotIsometry(d));
        }
    }
    let n = a.nrows();
    let u = composed_reflection(a, b);
    let pi = std::f64::consts::PI;
    let phases = absolute_eigenphases(&u)?;
    let d = a.transpose() * b;
    let sv = singular_values(&d);
    let tol = 1e-9;
    let ones = sv.iter().filter(|&&s| s > 1.0 - tol).count();
    let rank = sv.iter().filter(|&&s| s > tol).count();
    let (ca, cb) = (a.ncols(), b.ncols());
    let predicted_plus_one = ones + (n + ones) - ca - cb;
    let predicted_minus_one = (ca - rank) + (cb - rank);
    let mut predicted = vec![0.0; predicted_plus_one];
    predicted.extend(std::iter::repeat(pi).take(predicted_minus_one));
    for &s in sv.iter().filter(|&&s| s > tol && s < 1.0 - tol) {
        // the pair ±2θ, recorded by absolute value
        let t = 2.0 * s.min(1.0).acos();
        predicted.extend([t, t]);
    }
    predicted.sort_by(|x, y| x.partial_cmp(y).expect("finite phases"));
    let worst = if predicted.len() == phases.len() {
        phases.iter().zip(&predicted).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let plus_one = phases.iter().filter(|&&t| t.abs() < 1e-6).count();
    let minus_one = phases.iter().filter(|&&t| pi - t < 1e-6).count();
    Ok(SpectrumReport {
        phases,
        predicted,
        max_mismatch: worst,
        plus_one,
        predicted_plus_one,
        minus_one,
        predicted_minus_one,
        singular_values: sv,
    })
}

/// Projector onto eigenvectors of an orthogonal `U` with phase `|θ| ≤ δ`,
/// read off the symmetric part `(U + U*)/2` whose eigenvalues are `cos θ`.
pub fn small_phase_projector(u: &Mat, delta: f64) -> Result<Mat, SimError> {
    let h = (u + u.transpose()) * 0.5;
    let (vals, vecs) = sym_eigen(&h, 1e-9).map_err(|e| SimError::Invalid(e.to_string()))?;
    let cut = delta.min(std::f64::consts::PI).cos() - 1e-10;
    let n = u.nrows();
    let mut p = Mat::zeros(n, n);
    for (i, &l) in vals.iter().enumerate() {
        if l >= cut {
            let c = vecs.column(i);
            p += c * c.transpose();
        }
    }
    Ok(p)
}

/// `(‖P_δ Π_B u‖, (δ/2)‖u‖)` for `u` in the kernel of `Π_A`.
pub fn effective_gap_check(a: &Mat, b: &Mat, delta: f64, u: &Vector) -> Result<(f64, f64), SimError> {
    for m in [a, b] {
        let d = isometry_defect(m);
        if d > 1e-9 {
            return Err(SimError::NotIsometry(d));
        }
    }
    if (a * (a.transpose() * u)).norm() > 1e-9 * u.norm().max(1.0) {
        return Err(SimError::Invalid("u is not in the kernel of Π_A".into()));
    }
    let p = small_phase_projector(&composed_reflection(a, b), delta)?;
    let lhs = (p * (b * (b.transpose() * u))).norm();
    Ok((lhs, delta / 2.0 * u.norm()))
}

/// Vectors with `⟨μ_i, ν_j⟩ = 1 − δ_ij`: `μ_i = ρ(q^{-1/2}J + e_i)`,
/// `ν_j = ρ^{-1}(q^{-1/2}J − e_j)` with `ρ⁴ = (√q−1)/(√q+1)`, both of squared
/// norm `2√(1−1/q)`.
pub fn make_mu_nu(q: usize) -> Result<(Vec<Vector>, Vec<Vector>), SimError> {
    if q < 2 {
        return Err(SimError::Invalid("need q >= 2".into()));
    }
    let sq = (q as f64).sqrt();
    let rho = ((sq - 1.0) / (sq + 1.0)).powf(0.25);
    let base = Vector::from_element(q, 1.0 / sq);
    let mut mu = vec![];
    let mut nu = vec![];
    for i in 0..q {
        let mut m = base.clone();
        m[i] += 1.0;
        mu.push(m * rho);
        let mut v = base.clone();
        v[i] -= 1.0;
        nu.push(v / rho);
    }
    Ok((mu, nu))
}

/// Constants of the walk algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for WalkConstants {
    fn default() -> Self {
        WalkConstants { c1: 4.0, c2: 16.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub accept: bool,
    pub queries: usize,
    /// Exact acceptance probability of this run.
    pub p_accept: f64,
}

/// Walk of the span-program algorithm: basis `e_i` over the input vectors
/// plus `v_0 = τ/α`, `R_Λ` reflecting about the kernel of `[v_0 | V]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanWalk {
    pub alpha: f64,
    pub reflect_lambda: Mat,
    /// Index 0 is `v_0`.
    pub labels: Vec<Label>,
    pub delta: f64,
}

impl SpanWalk {
    pub fn new(p: &SpanProgram, sizes: WitnessSizes, consts: WalkConstants) -> Result<Self, SimError> {
        let p = eliminate_free(p)?;
        let dim = p.inputs.len() + 1;
        if dim > DIM_BUDGET {
            return Err(SimError::Budget(dim, DIM_BUDGET));
        }
        if !(sizes.w1 > 0.0 && sizes.wsize > 0.0) {
            return Err(SimError::Invalid("witness sizes must be positive".into()));
        }
        let alpha = consts.c1 * sizes.w1.sqrt();
        let mut vt = Mat::zeros(p.dim, dim);
        for r in 0..p.dim {
            vt[(r, 0)] = p.target[r] / alpha;
            for (c, iv) in p.inputs.iter().enumerate() {
                vt[(r, c + 1)] = iv.v[r];
            }
        }
        let q = range_basis(&vt.transpose(), 1e-10);
        let lambda = Mat::identity(dim, dim) - &q * q.transpose();
        let mut labels = vec![Label::Always];
        labels.extend(p.inputs.iter().map(|i| i.label));
        Ok(SpanWalk { alpha, reflect_lambda: lambda * 2.0 - Mat::identity(dim, dim), labels, delta: 1.0 / (consts.c2 * sizes.wsize) })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// `R_Π` through two register-oracle queries.
    pub fn reflect_pi(&self, state: &CVec, oracle: &mut QueryOracle) -> CVec {
        let q = oracle.q;
        let vars: Vec<Option<usize>> = self.labels.iter().map(|l| if let Label::Var { j, .. } = l { Some(*j) } else { None }).collect();
        let mut wide = CVec::zeros(self.dim() * q);
        for i in 0..self.dim() {
            wide[i * q] = state[i];
        }
        oracle.apply_register(&mut wide, &vars, false);
        for (i, l) in self.labels.iter().enumerate() {
            for v in 0..q {
                let flip = match *l {
                    Label::Var { b, .. } => v != b as usize,
                    Label::Always => false,
                    Label::Never => true,
                };
                if flip {
                    wide[i * q + v] = -wide[i * q + v];
                }
            }
        }
        oracle.apply_register(&mut wide, &vars, true);
        CVec::from_fn(self.dim(), |i, _| wide[i * q])
    }

    /// The walk step as a matrix for input `z` (no queries counted).
    pub fn unitary(&self, z: &[u8]) -> Mat {
        let mut pi = Mat::zeros(self.dim(), self.dim());
        for (i, l) in self.labels.iter().enumerate() {
            pi[(i, i)] = if l.available(z) { 1.0 } else { -1.0 };
        }
        pi * &self.reflect_lambda
    }

    pub fn run<R: Rng + ?Sized>(&self, oracle: &mut QueryOracle, rng: &mut R) -> Result<RunOutcome, SimError> {
        let lambda = to_complex_mat(&self.reflect_lambda);
        let start = oracle.queries();
        let e0 = QuantumState::basis(self.dim(), 0).amps;
        let mut step = |v: &CVec| self.reflect_pi(&(&lambda * v), oracle);
        let r = phase_detection(&mut step, self.delta, &e0)?;
        let queries = oracle.queries() - start;
        Ok(RunOutcome { accept: rng.gen::<f64>() < r.p_zero, queries, p_accept: r.p_zero })
    }
}

/// Span-program evaluation by phase detection on `R_Π R_Λ` from `e_0` at
/// `δ = 1/(C₂W)`; accepts iff phase 0 is detected.
pub fn run_span_program<R: Rng + ?Sized>(
    p: &SpanProgram,
    z: &[u8],
    sizes: WitnessSizes,
    consts: WalkConstants,
    rng: &mut R,
) -> Result<RunOutcome, SimError> {
    let walk = SpanWalk::new(p, sizes, consts)?;
    let mut oracle = QueryOracle::new(z.to_vec(), 2, OracleMode::Register)?;
    walk.run(&mut oracle, rng)
}

/// Walk of the dual-adversary algorithm on `ℂ ⊕ (ℂⁿ ⊗ ℂ^d ⊗ ℂ^q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualWalk {
    pub n: usize,
    pub d: usize,
    pub q: usize,
    pub alpha: f64,
    pub reflect_lambda: Mat,
    pub mu_hat: Vec<Vector>,
    pub delta: f64,
}

impl DualWalk {
    pub fn new(s: &DualAdversarySolution, consts: WalkConstants) -> Result<Self, SimError> {
        let f = &s.f;
        let (n, q) = (f.n, f.q);
        let d = s.factors.iter().map(|m| m.ncols()).max().unwrap_or(0).max(1);
        let dim = 1 + n * d * q;
        if dim > DIM_BUDGET {
            return Err(SimError::Budget(dim, DIM_BUDGET));
        }
        let w = s.objective();
        if !(w > 0.0) {
            return Err(SimError::Invalid("objective must be positive".into()));
        }
        let alpha = consts.c1 * w.sqrt();
        let (mu, _) = make_mu_nu(q)?;
        let negs = f.negatives();
        let mut vs = Mat::zeros(dim, negs.len());
        for (c, &y) in negs.iter().enumerate() {
            vs[(0, c)] = 1.0;
            for j in 0..n {
                let m = &mu[f.domain[y][j] as usize];
                for i in 0..s.factors[j].ncols() {
                    let psi = s.factors[j][(y, i)];
                    for k in 0..q {
                        vs[(1 + (j * d + i) * q + k, c)] = alpha * psi * m[k];
                    }
                }
            }
        }
        let basis = range_basis(&vs, 1e-10);
        let lambda = Mat::identity(dim, dim) - &basis * basis.transpose();
        Ok(DualWalk {
            n,
            d,
            q,
            alpha,
            reflect_lambda: lambda * 2.0 - Mat::identity(dim, dim),
            mu_hat: mu.iter().map(|m| m.normalize()).collect(),
            delta: 1.0 / (consts.c2 * w),
        })
    }

    pub fn dim(&self) -> usize {
        1 + self.n * self.d * self.q
    }

    fn reflect_block(&self, block: &mut [C64], sym: usize) {
        let m = &self.mu_hat[sym];
        let c: C64 = block.iter().zip(m.iter()).map(|(a, &b)| a * b).sum();
        for (a, &b) in block.iter_mut().zip(m.iter()) {
            *a -= c * (2.0 * b);
        }
    }

    /// `R_Π` via two register queries: the variable is loaded next to each
    /// `ℂ^q` block, which is reflected away from `μ_{z_j}`.
    pub fn reflect_pi(&self, state: &CVec, oracle: &mut QueryOracle) -> CVec {
        let q = self.q;
        // one oracle register per (j, i) block; the e_0 block is unqueried
        let blocks = 1 + self.n * self.d;
        let vars: Vec<Option<usize>> = (0..blocks).map(|b| if b == 0 { None } else { Some((b - 1) / self.d) }).collect();
        // layout: block b holds q amplitudes, each tensored with the q-dim oracle register
        let mut wide = CVec::zeros(blocks * q * q);
        let amp_index = |b: usize, k: usize| if b == 0 { 0 } else { 1 + (b - 1) * q + k };
        for b in 0..blocks {
            let ks = if b == 0 { 1 } else { q };
            for k in 0..ks {
                wide[(b * q + k) * q] = state[amp_index(b, k)];
            }
        }
        let wide_vars: Vec<Option<usize>> = vars.iter().flat_map(|&v| std::iter::repeat(v).take(q)).collect();
        oracle.apply_register(&mut wide, &wide_vars, false);
        for b in 1..blocks {
            for v in 0..q {
                let mut block: Vec<C64> = (0..q).map(|k| wide[(b * q + k) * q + v]).collect();
                self.reflect_block(&mut block, v);
                for k in 0..q {
                    wide[(b * q + k) * q + v] = block[k];
                }
            }
        }
        oracle.apply_register(&mut wide, &wide_vars, true);
        let mut out = CVec::zeros(self.dim());
        for b in 0..blocks {
            let ks = if b == 0 { 1 } else { q };
            for k in 0..ks {
                out[amp_index(b, k)] = wide[(b * q + k) * q];
            }
        }
        out
    }

    pub fn run<R: Rng + ?Sized>(&self, oracle: &mut QueryOracle, rng: &mut R) -> Result<RunOutcome, SimError> {
        let lambda = to_complex_mat(&self.reflect_lambda);
        let start = oracle.queries();
        let e0 = QuantumState::basis(self.dim(), 0).amps;
        let mut step = |v: &CVec| self.reflect_pi(&(&lambda * v), oracle);
        let r = phase_detection(&mut step, self.delta, &e0)?;
        let queries = oracle.queries() - start;
        Ok(RunOutcome { accept: rng.gen::<f64>() < r.p_zero, queries, p_accept: r.p_zero })
    }
}

/// Evaluates `f(z)` with the walk built from a dual adversary solution.
pub fn run_dual_adversary<R: Rng + ?Sized>(
    s: &DualAdversarySolution,
    z: &[u8],
    consts: WalkConstants,
    rng: &mut R,
) -> Result<RunOutcome, SimError> {
    let walk = DualWalk::new(s, consts)?;
    let mut oracle = QueryOracle::new(z.to_vec(), s.f.q, OracleMode::Register)?;
    walk.run(&mut oracle, rng)
}

/// Singular values of `D = A*B` (helper for the spectral lemma suites).
pub fn discriminant_singular_values(a: &Mat, b: &Mat) -> Vec<f64> {
    svd(&(a.transpose() * b), 0.0).singular_values
}
