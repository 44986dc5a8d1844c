//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

use adversarium::adversary::{
    adv_ratio, ambainis_gamma, boundedly_generated_gamma, delta_mask, hadamard_delta_check, mathias_bound,
    threshold_relation_adversary, AdversaryMatrix,
};
use adversarium::dual_adversary::{
    barrier_solution, collision_sum, from_canonical_span_program, graph_collision_function, maj3_solution,
    threshold_dual, to_span_program as dual_to_span, BarrierVariant, DualAdversarySolution, SolutionKind,
};
use adversarium::electric_walks::{
    commute_identity_check, effective_resistance, electric_walk_run, hitting_time, LgWalk, WeightedGraph,
};
use adversarium::functions::{binomial, combinations, make_named, CertificateStructure, Family, PartialFunction};
use adversarium::graphs::{graphs_up_to_isomorphism, SimpleGraph};
use adversarium::learning_graphs::{
    check_dual_certificate, collision_lg, complexities, ksubset_lg, or_lg, to_dual_adversary, to_span_program as lg_to_span,
    trivial_lg, weak_lg_duality_check, DualLGCertificate, Flow, LearningGraph,
};
use adversarium::numerics::{hadamard, spectral_norm, Mat, Vector};
use adversarium::quantum_sim::{
    effective_gap_check, make_mu_nu, reflection_spectrum_check, seeded_rng, DualWalk, OracleMode, QueryOracle, SpanWalk,
    WalkConstants,
};
use adversarium::span_programs::{
    canonicalize, euler_circuit, k5_skew_signing, or_program, skew_product, st_connectivity_program, star_program,
    traversal_program, triangle_forest_program, witness_size, SpanProgram, SubdividedStar, WitnessSizes,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn named(f: Family) -> PartialFunction {
    make_named(&f).expect("named family")
}

const RUNS: usize = 200;

/// Fraction of correct answers over `RUNS` seeded runs.
fn success_rate(runs: usize, mut run: impl FnMut(u64) -> bool) -> f64 {
    (0..runs).filter(|&i| run(i as u64)).count() as f64 / runs as f64
}

fn c1_threshold() -> Outcome {
    let ratio = adv_ratio(&threshold_relation_adversary(2, 3).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?.ratio;
    ensure((ratio - 2.0).abs() <= 1e-9, || format!("ratio {ratio}"))?;
    let s = threshold_dual(2, 3).map_err(|e| e.to_string())?;
    let viol = s.check_feasible().max_violation;
    ensure(viol <= 1e-8, || format!("dual violation {viol:e}"))?;
    ensure((s.objective() - 2.0).abs() <= 1e-8, || format!("dual objective {}", s.objective()))?;
    Ok(format!("ratio {ratio:.10}, dual objective {:.10}, violation {viol:.1e}", s.objective()))
}

fn c2_ambainis() -> Outcome {
    let f = named(Family::Ambainis);
    let pos = ambainis_gamma([0.75, 0.5, 0.0, 0.0]);
    pos.validate_against(&f).map_err(|e| e.to_string())?;
    let r1 = adv_ratio(&pos).map_err(|e| e.to_string())?.ratio;
    ensure((r1 - 2.5).abs() <= 1e-9, || format!("positive ratio {r1}"))?;
    let neg = ambainis_gamma([0.5788, 0.7065, 0.1834, -0.2120]);
    let r2 = adv_ratio(&neg).map_err(|e| e.to_string())?.ratio;
    ensure(r2 >= 2.513, || format!("negative-weight ratio {r2}"))?;
    Ok(format!("positive {r1:.10}, negative-weight {r2:.6}"))
}

fn lg_dual(g: &LearningGraph, flow: &Flow, f: &PartialFunction) -> Result<DualAdversarySolution, String> {
    to_dual_adversary(g, flow, f).map_err(|e| e.to_string())
}

fn c3_sandwich() -> Outcome {
    let mut checked = 0;
    let mut worst_gap = f64::INFINITY;
    let th = named(Family::Threshold { k: 2, n: 3 });
    let amb = named(Family::Ambainis);
    let cases: Vec<(PartialFunction, Vec<AdversaryMatrix>)> = vec![
        (th.clone(), vec![threshold_relation_adversary(2, 3).map_err(|e| e.to_string())?]),
        (amb.clone(), vec![ambainis_gamma([0.75, 0.5, 0.0, 0.0]), ambainis_gamma([0.5788, 0.7065, 0.1834, -0.2120])]),
    ];
    for (f, primals) in cases {
        let mut duals = vec![];
        if f == th {
            duals.push(threshold_dual(2, 3).map_err(|e| e.to_string())?);
            let (g, fl) = ksubset_lg(3, 2, 0).map_err(|e| e.to_string())?;
            duals.push(lg_dual(&g, &fl, &f)?);
        }
        let (g, fl) = trivial_lg(f.n);
        duals.push(lg_dual(&g, &fl, &f)?);
        for v in [BarrierVariant::Certificate, BarrierVariant::TwoSided, BarrierVariant::Distance] {
            duals.push(barrier_solution(&f, v, None).map_err(|e| e.to_string())?);
        }
        for d in &duals {
            let viol = d.check_feasible().max_violation;
            ensure(viol <= 1e-8, || format!("dual infeasible ({viol:e})"))?;
            for p in &primals {
                // relaxed duals (Σ ≥ 1) only bound nonnegative matrices
                if d.kind == SolutionKind::Relaxed && p.m.iter().any(|&x| x < 0.0) {
                    continue;
                }
                let r = adv_ratio(p).map_err(|e| e.to_string())?.ratio;
                let obj = d.objective();
                ensure(r <= obj + 1e-6, || format!("ratio {r} exceeds dual objective {obj}"))?;
                worst_gap = worst_gap.min(obj - r);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} primal/dual pairs, smallest gap {worst_gap:.3e}"))
}

fn close(a: &WitnessSizes, b: &WitnessSizes) -> bool {
    let ok = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(1.0);
    ok(a.w0, b.w0) && ok(a.w1, b.w1)
}

fn random_lg(rng: &mut ChaCha8Rng) -> (LearningGraph, Flow, PartialFunction) {
    let (g, fl, f) = match rng.gen_range(0..3) {
        0 => {
            let n = rng.gen_range(2..=5);
            let (g, fl) = or_lg(n);
            (g, fl, named(Family::Or { n }))
        }
        1 => {
            let n = rng.gen_range(2..=4);
            let (g, fl) = trivial_lg(n);
            (g, fl, named(Family::And { n }))
        }
        _ => {
            let n = rng.gen_range(3..=5);
            let k = rng.gen_range(1..=2);
            let r = rng.gen_range(0..=(n - k).min(2));
            let (g, fl) = ksubset_lg(n, k, r).expect("valid parameters");
            (g, fl, named(Family::Threshold { k, n }))
        }
    };
    (g.rebalanced(rng.gen_range(0.5..2.0)), fl, f)
}

fn c4_span_round_trip() -> Outcome {
    let s = threshold_dual(2, 3).map_err(|e| e.to_string())?;
    let p = dual_to_span(&s).map_err(|e| e.to_string())?;
    let w = witness_size(&p, &s.f, true).map_err(|e| e.to_string())?;
    ensure((w.wsize - 2.0).abs() <= 1e-9, || format!("wsize {}", w.wsize))?;
    let mut rng = seeded_rng(4);
    for i in 0..20 {
        let (g, fl, f) = random_lg(&mut rng);
        let p = lg_to_span(&g, &fl, &f).map_err(|e| e.to_string())?;
        let before = witness_size(&p, &f, true).map_err(|e| e.to_string())?;
        let c = canonicalize(&p, &f).map_err(|e| e.to_string())?;
        let canon = witness_size(&c, &f, true).map_err(|e| e.to_string())?;
        let back = dual_to_span(&from_canonical_span_program(&c, &f).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let after = witness_size(&back, &f, true).map_err(|e| e.to_string())?;
        ensure(close(&before, &canon) && close(&canon, &after), || {
            format!("program {i}: sizes {before:?} -> {canon:?} -> {after:?}")
        })?;
    }
    Ok(format!("wsize {:.10}; 20 learning-graph programs round-trip", w.wsize))
}

fn c5_lg_tables() -> Outcome {
    for n in 1..=8 {
        let (g, fl) = trivial_lg(n);
        let t = complexities(&g, &fl).map_err(|e| e.to_string())?.total;
        ensure(t == n as f64, || format!("trivial n={n}: {t}"))?;
        let (g, fl) = or_lg(n);
        let c = complexities(&g.rebalanced(1.0 / (n as f64).sqrt()), &fl).map_err(|e| e.to_string())?;
        let root = (n as f64).sqrt();
        ensure((c.negative - root).abs() < 1e-12 && (c.positive - root).abs() < 1e-12 && (c.total - root).abs() < 1e-12, || {
            format!("OR n={n}: {c:?}")
        })?;
    }
    let (g, fl) = collision_lg(27, 3).map_err(|e| e.to_string())?;
    let coll = complexities(&g, &fl).map_err(|e| e.to_string())?.total;
    let bound = 4.0 * 27f64.cbrt();
    ensure(coll <= bound, || format!("collision total {coll} > {bound}"))?;
    let (g, fl) = ksubset_lg(5, 2, 2).map_err(|e| e.to_string())?;
    fl.validate(&g).map_err(|e| e.to_string())?;
    let third = fl.members.iter().flat_map(|m| m.p.iter()).all(|&p| p == 0.0 || (p - 1.0 / 3.0).abs() < 1e-15);
    ensure(third, || "k-subset flow values differ from 1/3".into())?;
    Ok(format!("trivial = n, OR = sqrt(n), collision(27,3) = {coll:.4} <= {bound:.1}, k-subset flows 1/3"))
}

fn c6_lg_to_dual() -> Outcome {
    let mut pairs: Vec<(LearningGraph, Flow, PartialFunction)> = vec![];
    for n in 2..=4 {
        let (g, fl) = or_lg(n);
        pairs.push((g, fl, named(Family::Or { n })));
        let (g, fl) = trivial_lg(n);
        pairs.push((g, fl, named(Family::And { n })));
    }
    for (n, k, r, f) in [
        (4, 2, 0, Family::Threshold { k: 2, n: 4 }),
        (4, 2, 1, Family::Threshold { k: 2, n: 4 }),
        (4, 2, 1, Family::ElementDistinctness { n: 4, q: 4 }),
        (3, 1, 1, Family::Threshold { k: 1, n: 3 }),
    ] {
        let (g, fl) = ksubset_lg(n, k, r).map_err(|e| e.to_string())?;
        pairs.push((g, fl, named(f)));
    }
    let mut worst: f64 = 0.0;
    for (g, fl, f) in &pairs {
        let c = complexities(g, fl).map_err(|e| e.to_string())?;
        let s = lg_dual(g, fl, f)?;
        let want = c.negative.max(c.positive);
        let viol = s.check_feasible().max_violation;
        ensure((s.objective() - want).abs() <= 1e-9 && viol <= 1e-9, || {
            format!("objective {} vs max(C_N, C_P) {want}, violation {viol:e}", s.objective())
        })?;
        worst = worst.max(viol);
    }
    Ok(format!("{} pairs, worst residual {worst:.1e}", pairs.len()))
}

fn c7_dual_lg_certificate() -> Outcome {
    let cert = CertificateStructure::k_subset(8, 2);
    let a = DualLGCertificate::ksubset(&cert, 2);
    let r = check_dual_certificate(&cert, &a).map_err(|e| e.to_string())?;
    // exact up to the last bit of floating point
    ensure((r.objective - 4.0).abs() <= 1e-12, || format!("objective {}", r.objective))?;
    ensure(r.max_constraint <= 10.0, || format!("max constraint {}", r.max_constraint))?;
    let mut primal = f64::INFINITY;
    for rr in 0..=6 {
        let (g, fl) = ksubset_lg(8, 2, rr).map_err(|e| e.to_string())?;
        let d = weak_lg_duality_check(&g, &fl, &a, &cert).map_err(|e| e.to_string())?;
        ensure(d.holds, || format!("r={rr}: dual {} > primal {}", d.dual, d.primal))?;
        primal = primal.min(d.primal);
    }
    Ok(format!(
        "objective {}, C = {:.4}, normalized {:.4} <= best primal {primal:.4}",
        r.objective,
        r.max_constraint,
        r.normalized_objective()
    ))
}

fn c8_boundedly_generated() -> Outcome {
    let cert = CertificateStructure::k_subset(3, 2);
    let raw = DualLGCertificate::ksubset(&cert, 2);
    let rep = check_dual_certificate(&cert, &raw).map_err(|e| e.to_string())?;
    let alpha = raw.scaled(1.0 / rep.max_constraint.sqrt());
    let objective = check_dual_certificate(&cert, &alpha).map_err(|e| e.to_string())?.objective;
    let bg = boundedly_generated_gamma(&cert, 7, &alpha).map_err(|e| e.to_string())?;
    let k = 2.0;
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        let mask = delta_mask(&bg.gamma, j);
        let masked = spectral_norm(&hadamard(&bg.gamma.m, &mask.m));
        let prime = spectral_norm(&bg.gamma_prime[j]);
        let agree = (hadamard(&bg.gamma_prime[j], &mask.m) - hadamard(&bg.gamma.m, &mask.m)).amax();
        ensure(masked <= 2.0 * k + 1e-9 && prime <= k + 1e-9 && agree < 1e-9, || {
            format!("j={j}: |Γ∘Δ| {masked}, |Γ'| {prime}, mismatch {agree:e}")
        })?;
        worst = worst.max(masked);
    }
    let norm = spectral_norm(&bg.gamma.m);
    ensure(norm >= 0.5 * objective, || format!("|Γ| {norm} < 0.5 * {objective}"))?;
    Ok(format!("max |Γ∘Δ_j| {worst:.4} <= 4, |Γ| {norm:.4} >= {:.4}", 0.5 * objective))
}

fn random_isometry(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    let m = Mat::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q().columns(0, cols).into_owned()
}

fn c9_spectral() -> Outcome {
    let mut rng = seeded_rng(9);
    let mut worst_phase: f64 = 0.0;
    for i in 0..100 {
        let n = rng.gen_range(2..=8);
        let ac = rng.gen_range(1..=n);
        let a = random_isometry(&mut rng, n, ac);
        let bc = rng.gen_range(1..=n);
        let b = random_isometry(&mut rng, n, bc);
        let r = reflection_spectrum_check(&a, &b).map_err(|e| e.to_string())?;
        ensure(r.max_mismatch <= 1e-8 && r.plus_one == r.predicted_plus_one && r.minus_one == r.predicted_minus_one, || {
            format!("instance {i}: mismatch {:e}, ±1 counts {:?}", r.max_mismatch, (r.plus_one, r.predicted_plus_one, r.minus_one, r.predicted_minus_one))
        })?;
        worst_phase = worst_phase.max(r.max_mismatch);
    }
    for i in 0..100 {
        let n = rng.gen_range(2..=8);
        let ac = rng.gen_range(1..n);
        let a = random_isometry(&mut rng, n, ac);
        let bc = rng.gen_range(1..=n);
        let b = random_isometry(&mut rng, n, bc);
        let g = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let u = &g - &a * (a.transpose() * &g);
        let delta = rng.gen_range(0.01..3.0);
        let (lhs, rhs) = effective_gap_check(&a, &b, delta, &u).map_err(|e| e.to_string())?;
        ensure(lhs <= rhs + 1e-9, || format!("effective gap instance {i}: {lhs} > {rhs}"))?;
    }
    for i in 0..100 {
        let rows: Vec<Vec<u8>> = (0..8).map(|x| (0..3).map(|j| (x >> j & 1) as u8).collect()).collect();
        let m = Mat::from_fn(8, 8, |_, _| rng.gen_range(-1.0..1.0));
        let g = AdversaryMatrix { rows: rows.clone(), cols: rows, m };
        for j in 0..3 {
            let (lhs, rhs) = hadamard_delta_check(&g.m, &delta_mask(&g, j)).map_err(|e| e.to_string())?;
            ensure(lhs <= rhs + 1e-12, || format!("masked-norm instance {i}: {lhs} > {rhs}"))?;
        }
    }
    for i in 0..100 {
        let (r, c) = (rng.gen_range(1..=7), rng.gen_range(1..=7));
        let b = Mat::from_fn(r, c, |_, _| if rng.gen_bool(0.7) { rng.gen_range(-2.0..2.0) } else { 0.0 });
        let cm = Mat::from_fn(r, c, |_, _| rng.gen_range(-2.0..2.0));
        let a = hadamard(&b, &cm);
        let bound = mathias_bound(&a, &b, &cm).map_err(|e| e.to_string())?;
        let norm = spectral_norm(&a);
        ensure(norm <= bound * (1.0 + 1e-12) + 1e-12, || format!("factorization instance {i}: |A| {norm} > {bound}"))?;
    }
    Ok(format!("400 instances, worst eigenphase mismatch {worst_phase:.1e}"))
}

fn random_connected(rng: &mut ChaCha8Rng, n: usize) -> WeightedGraph {
    let mut edges = vec![];
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v, rng.gen_range(0.1..3.0)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.3) && !edges.iter().any(|e| (e.0, e.1) == (u, v)) {
                edges.push((u, v, rng.gen_range(0.1..3.0)));
            }
        }
    }
    WeightedGraph::new(n, edges).expect("valid edges")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn c10_electric() -> Outcome {
    let mut rng = seeded_rng(10);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let n = rng.gen_range(2..=10);
        let g = random_connected(&mut rng, n);
        let s = rng.gen_range(0..n);
        let t = (s + rng.gen_range(1..n)) % n;
        let (lhs, rhs) = commute_identity_check(&g, s, t).map_err(|e| e.to_string())?;
        ensure(rel(lhs, rhs) <= 1e-8, || format!("commute graph {i}: {lhs} vs {rhs}"))?;
        worst = worst.max(rel(lhs, rhs));
    }
    for i in 0..50 {
        let n = rng.gen_range(2..=10);
        let g = random_connected(&mut rng, n);
        let w = g.total_weight();
        let pi: Vec<f64> = (0..n).map(|u| g.vertex_weight(u) / (2.0 * w)).collect();
        let mut marked: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
        if marked.is_empty() {
            marked.push(rng.gen_range(0..n));
        }
        let h = hitting_time(&g, &pi, &marked).map_err(|e| e.to_string())?;
        let r = effective_resistance(&g, &pi, &marked).map_err(|e| e.to_string())?.0;
        ensure(rel(h, 2.0 * w * r) <= 1e-8, || format!("stationary graph {i}: {h} vs {}", 2.0 * w * r))?;
        worst = worst.max(rel(h, 2.0 * w * r));
    }
    Ok(format!("100 graphs, worst relative error {worst:.1e}"))
}

/// Runs a span walk `RUNS` times per domain input; returns the worst success
/// rate and the largest query count.
fn span_campaign(p: &SpanProgram, f: &PartialFunction, seed: u64) -> Result<(f64, usize, WitnessSizes), String> {
    let sizes = witness_size(p, f, false).map_err(|e| e.to_string())?;
    let walk = SpanWalk::new(p, sizes, WalkConstants::default()).map_err(|e| e.to_string())?;
    let stats: Vec<(f64, usize)> = f
        .domain
        .par_iter()
        .zip(&f.values)
        .enumerate()
        .map(|(zi, (z, &want))| {
            let mut rng = seeded_rng(seed ^ (zi as u64) << 20);
            let mut queries = 0;
            let rate = success_rate(RUNS, |_| {
                let mut oracle = QueryOracle::new(z.clone(), 2, OracleMode::Register).expect("Boolean input");
                let out = walk.run(&mut oracle, &mut rng).expect("walk runs");
                queries = queries.max(out.queries);
                out.accept == want
            });
            (rate, queries)
        })
        .collect();
    let worst = stats.iter().map(|s| s.0).fold(1.0, f64::min);
    let queries = stats.iter().map(|s| s.1).max().unwrap_or(0);
    Ok((worst, queries, sizes))
}

fn random_bipartite(rng: &mut ChaCha8Rng) -> (WeightedGraph, usize) {
    let (a, b) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
    let n = a + b;
    let mut order: Vec<usize> = (1..a).chain(a + 1..n).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut seen_a = vec![0];
    let mut seen_b = vec![a];
    let mut edges = vec![(0, a, rng.gen_range(0.5..2.0))];
    for v in order {
        if v < a {
            edges.push((v, seen_b[rng.gen_range(0..seen_b.len())], rng.gen_range(0.5..2.0)));
            seen_a.push(v);
        } else {
            edges.push((seen_a[rng.gen_range(0..seen_a.len())], v, rng.gen_range(0.5..2.0)));
            seen_b.push(v);
        }
    }
    for u in 0..a {
        for v in a..n {
            if rng.gen_bool(0.3) && !edges.iter().any(|e| (e.0, e.1) == (u, v)) {
                edges.push((u, v, rng.gen_range(0.5..2.0)));
            }
        }
    }
    let g = WeightedGraph::new(n, edges).expect("valid edges").with_bipartition((0..n).map(|v| v < a).collect()).expect("bipartite");
    (g, a)
}

fn c11_simulation() -> Outcome {
    let consts = WalkConstants::default();
    let c_fit = 16.0 * consts.c2 + 2.0;
    let mut notes = vec![];
    let mut programs: Vec<(String, SpanProgram, PartialFunction)> = vec![];
    for n in [2, 4, 8] {
        programs.push((format!("OR{n}"), or_program(n), named(Family::Or { n })));
    }
    let st = st_connectivity_program(4, 0, 3).map_err(|e| e.to_string())?;
    let stf = PartialFunction::tabulate(6, 2, |z| {
        let mask = z.iter().enumerate().fold(0u64, |m, (i, &b)| m | (b as u64) << i);
        Some(SimpleGraph::from_pair_mask(4, mask).connected(0, 3))
    })
    .map_err(|e| e.to_string())?;
    programs.push(("st-conn4".into(), st, stf));
    for (name, p, f) in &programs {
        let (rate, queries, sizes) = span_campaign(p, f, 11)?;
        let bound = c_fit * sizes.wsize * (f.n as f64).log2().max(1.0);
        ensure(rate >= 2.0 / 3.0, || format!("{name}: success {rate}"))?;
        ensure(queries as f64 <= bound, || format!("{name}: {queries} queries > {bound:.0}"))?;
        notes.push(format!("{name} {rate:.2}/{queries}q"));
    }

    let mut rng = seeded_rng(111);
    let mut worst: f64 = 1.0;
    for i in 0..20 {
        let (g, a) = random_bipartite(&mut rng);
        let n = g.n;
        let mut sigma: Vec<f64> = (0..n).map(|v| if v < a { rng.gen_range(0.1..1.0) } else { 0.0 }).collect();
        let total: f64 = sigma.iter().sum();
        sigma.iter_mut().for_each(|s| *s /= total);
        let r_bound = (a..n)
            .map(|b| effective_resistance(&g, &sigma, &[b]).map(|r| r.0))
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| e.to_string())?
            .into_iter()
            .fold(0.0, f64::max);
        let positive = i % 2 == 0;
        let marked: Vec<usize> = if positive {
            let mut m: Vec<usize> = (a..n).filter(|_| rng.gen_bool(0.4)).collect();
            if m.is_empty() {
                m.push(rng.gen_range(a..n));
            }
            m
        } else {
            vec![]
        };
        let rate = success_rate(RUNS, |_| {
            electric_walk_run(&g, &sigma, &marked, r_bound, consts, &mut rng).expect("walk runs").accept == positive
        });
        ensure(rate >= 2.0 / 3.0, || format!("electric instance {i} ({} marked): success {rate}", marked.len()))?;
        worst = worst.min(rate);
    }
    notes.push(format!("electric {worst:.2}"));

    let ed = named(Family::ElementDistinctness { n: 4, q: 4 });
    let (lg, _) = ksubset_lg(4, 2, 1).map_err(|e| e.to_string())?;
    let walk = LgWalk::new(&lg, &ed).map_err(|e| e.to_string())?;
    let rates: Vec<Result<f64, String>> = ed
        .domain
        .par_iter()
        .zip(&ed.values)
        .enumerate()
        .map(|(zi, (z, &want))| {
            let mut rng = seeded_rng(1111 + zi as u64);
            let mut err = None;
            let rate = success_rate(RUNS, |_| match walk.run(&lg, &ed, z, consts, &mut rng) {
                Ok(o) => o.accept == want,
                Err(e) => {
                    err = Some(e.to_string());
                    false
                }
            });
            err.map_or(Ok(rate), Err)
        })
        .collect();
    let mut worst: f64 = 1.0;
    for (zi, r) in rates.into_iter().enumerate() {
        let r = r?;
        ensure(r >= 2.0 / 3.0, || format!("element distinctness input {:?}: success {r}", ed.domain[zi]))?;
        worst = worst.min(r);
    }
    notes.push(format!("ED(4,4) {worst:.2} over {} inputs", ed.len()));
    Ok(notes.join(", "))
}

fn c12_mu_nu_and_maj3() -> Outcome {
    let mut worst: f64 = 0.0;
    for q in 2..=64 {
        let (mu, nu) = make_mu_nu(q).map_err(|e| e.to_string())?;
        for i in 0..q {
            ensure(mu[i].norm() <= 2f64.sqrt() + 1e-12 && nu[i].norm() <= 2f64.sqrt() + 1e-12, || format!("q={q}: norm too large"))?;
            for j in 0..q {
                let err = (mu[i].dot(&nu[j]) - if i == j { 0.0 } else { 1.0 }).abs();
                ensure(err <= 1e-12, || format!("q={q}, ({i},{j}): error {err:e}"))?;
                worst = worst.max(err);
            }
        }
    }
    let s = maj3_solution();
    let walk = DualWalk::new(&s, WalkConstants::default()).map_err(|e| e.to_string())?;
    let mut rng = seeded_rng(12);
    let mut rate_min: f64 = 1.0;
    for (z, &want) in s.f.domain.iter().zip(&s.f.values) {
        let rate = success_rate(RUNS, |_| {
            let mut oracle = QueryOracle::new(z.clone(), 2, OracleMode::Register).expect("Boolean input");
            walk.run(&mut oracle, &mut rng).expect("walk runs").accept == want
        });
        ensure(rate >= 2.0 / 3.0, || format!("maj3 input {z:?}: success {rate}"))?;
        rate_min = rate_min.min(rate);
    }
    Ok(format!("inner-product error {worst:.1e}; maj3 worst success {rate_min:.2}"))
}

fn c13_collision_sum() -> Outcome {
    let mut count = 0;
    for (g, r) in [(SimpleGraph::path(4), 0), (SimpleGraph::path(4), 1), (SimpleGraph::path(4), 2), (SimpleGraph::complete(3), 0), (SimpleGraph::complete(3), 1)] {
        let f = graph_collision_function(&g).map_err(|e| e.to_string())?;
        let p = 1.0 / binomial(g.n - 2, r) as f64;
        for &xi in &f.positives() {
            let x = &f.domain[xi];
            let (a, b) = g.edges().into_iter().find(|&(a, b)| x[a] == 1 && x[b] == 1).expect("colliding edge");
            for &yi in &f.negatives() {
                let y = &f.domain[yi];
                for set in combinations(g.n, r).into_iter().filter(|s| s >> a & 1 == 0 && s >> b & 1 == 0) {
                    let v = collision_sum(&g, r, x, y, set).map_err(|e| e.to_string())?;
                    ensure((v - p).abs() <= 1e-12, || format!("n={} r={r} x={x:?} y={y:?} R={set:b}: {v} vs {p}", g.n))?;
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} (x, y, R) triples"))
}

fn c14_detectors() -> Outcome {
    let claw = SubdividedStar::claw();
    let claw_g = claw.graph();
    let k3 = SimpleGraph::complete(3);
    let mut rng = seeded_rng(14);
    let (mut pos, mut neg) = (0, 0);
    for n in 1..=6 {
        for g in graphs_up_to_isomorphism(n) {
            let claw_minor = g.has_minor(&claw_g);
            let forest = g.is_forest();
            for _ in 0..50 {
                let colouring: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
                let sp = star_program(&claw, n, &colouring).map_err(|e| e.to_string())?;
                let acc = sp.graph.evaluate(&g);
                if g.contains_coloured_subgraph(&claw_g, &colouring) {
                    ensure(acc, || format!("claw missed on {:?} with {colouring:?}", g.edges()))?;
                    pos += 1;
                }
                if !claw_minor {
                    ensure(!acc, || format!("claw false positive on {:?} with {colouring:?}", g.edges()))?;
                    neg += 1;
                }
                let tri: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
                let acc = triangle_forest_program(n, &tri).map_err(|e| e.to_string())?.evaluate(&g);
                if g.contains_coloured_subgraph(&k3, &tri) {
                    ensure(acc, || format!("triangle missed on {:?} with {tri:?}", g.edges()))?;
                    pos += 1;
                }
                if forest {
                    ensure(!acc, || format!("triangle false positive on {:?} with {tri:?}", g.edges()))?;
                    neg += 1;
                }
            }
        }
    }
    let k5 = SimpleGraph::complete(5);
    let skew = skew_product(&k5, &k5_skew_signing()).map_err(|e| e.to_string())?;
    let walk = euler_circuit(&k5, 0).map_err(|e| e.to_string())?;
    let colouring: Vec<usize> = (0..10).map(|v| v / 2).collect();
    let accepts = traversal_program(&walk, 10, &colouring).map_err(|e| e.to_string())?.evaluate(&skew);
    let minor = skew.has_minor(&k5);
    ensure(accepts && !minor, || format!("skew(K5): accepts {accepts}, has K5 minor {minor}"))?;
    Ok(format!("{pos} coloured positives, {neg} minor-free negatives; skew(K5) accepted without a K5 minor"))
}

fn main() {
    let criteria: Vec<(usize, &str, f64, fn() -> Outcome)> = vec![
        (1, "threshold exactness", 1.0, c1_threshold),
        (2, "Ambainis function", 1.0, c2_ambainis),
        (3, "duality sandwich", f64::INFINITY, c3_sandwich),
        (4, "span-program round trip", f64::INFINITY, c4_span_round_trip),
        (5, "learning-graph tables", 5.0, c5_lg_tables),
        (6, "learning graph to dual objective", f64::INFINITY, c6_lg_to_dual),
        (7, "dual learning-graph certificate", 10.0, c7_dual_lg_certificate),
        (8, "boundedly-generated lower bound", 60.0, c8_boundedly_generated),
        (9, "spectral identities", f64::INFINITY, c9_spectral),
        (10, "electric identities", f64::INFINITY, c10_electric),
        (11, "end-to-end simulation", 600.0, c11_simulation),
        (12, "mu/nu contract and maj3 walk", f64::INFINITY, c12_mu_nu_and_maj3),
        (13, "graph-collision sums", f64::INFINITY, c13_collision_sum),
        (14, "subgraph detectors", f64::INFINITY, c14_detectors),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let out = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let out = out.and_then(|s| if secs <= limit { Ok(s) } else { Err(format!("{s}; took {secs:.1} s, limit {limit} s")) });
        match out {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{secs:.2} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {detail} [{secs:.2} s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
