//! Property suites for the invariants each module promises.

use adversarium::adversary::{adv_ratio, delta_mask, e_projector, hadamard_delta_check, mathias_bound, AdversaryMatrix};
use adversarium::dual_adversary::{threshold_dual, to_span_program as dual_to_span};
use adversarium::electric_walks::{
    commute_identity_check, conservation_violation, effective_resistance, flow_energy, FlowAssignment, WeightedGraph,
};
use adversarium::functions::{
    all_strings, block_sensitivity, certificate_complexity, certificate_structure_of, is_certificate, Assignment, Family,
    PartialFunction, make_named,
};
use adversarium::graphs::SimpleGraph;
use adversarium::learning_graphs::{
    complexities, ksubset_lg, or_lg, to_dual_adversary, to_span_program as lg_to_span, trivial_lg, Flow, LearningGraph,
};
use adversarium::numerics::{
    hadamard, kernel_basis, kernel_projector, min_norm_solution, singular_values, spectral_norm, svd, sym_eigen, Mat, Vector,
};
use adversarium::quantum_sim::{
    composed_reflection, make_mu_nu, phase_detection, to_complex, to_complex_mat, CVec, SpanWalk, WalkConstants,
};
use adversarium::span_programs::{
    canonicalize, evaluate, is_canonical, negative_witness, positive_witness, st_connectivity_program, with_minimal_witnesses,
    witness_size, InputVector, Label, SpanProgram,
};
use proptest::prelude::*;

fn matrix(rows: std::ops::RangeInclusive<usize>, cols: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Mat> {
    (rows, cols).prop_flat_map(|(r, c)| prop::collection::vec(-1.0..1.0f64, r * c).prop_map(move |v| Mat::from_vec(r, c, v)))
}

/// Matrix with a planted rank deficit, so kernels are nontrivial.
fn low_rank(n: usize) -> impl Strategy<Value = Mat> {
    (1..=n, 1..=n, 1..=n).prop_flat_map(|(r, c, k)| {
        (matrix(r..=r, k..=k), matrix(k..=k, c..=c)).prop_map(|(a, b)| a * b)
    })
}

fn orthonormal(m: &Mat) -> Mat {
    let c = m.ncols();
    m.clone().qr().q().columns(0, c).into_owned()
}

/// Boolean partial function on `n ≤ 4` bits with a random domain.
fn partial_function() -> impl Strategy<Value = PartialFunction> {
    (1..=4usize).prop_flat_map(|n| {
        let size = 1usize << n;
        (Just(n), prop::collection::vec(0..3u8, size)).prop_filter_map("needs both values", |(n, tags)| {
            let (mut dom, mut vals) = (vec![], vec![]);
            for (z, t) in all_strings(n, 2).zip(tags) {
                if t < 2 {
                    dom.push(z);
                    vals.push(t == 1);
                }
            }
            if !vals.contains(&true) || !vals.contains(&false) {
                return None;
            }
            PartialFunction::new(n, 2, dom, vals).ok()
        })
    })
}

fn small_lg() -> impl Strategy<Value = (LearningGraph, Flow, PartialFunction)> {
    prop_oneof![
        (2..=5usize).prop_map(|n| {
            let (g, fl) = or_lg(n);
            (g, fl, make_named(&Family::Or { n }).unwrap())
        }),
        (2..=4usize).prop_map(|n| {
            let (g, fl) = trivial_lg(n);
            (g, fl, make_named(&Family::And { n }).unwrap())
        }),
        (3..=5usize, 1..=2usize, 0..=2usize).prop_map(|(n, k, r)| {
            let r = r.min(n - k);
            let (g, fl) = ksubset_lg(n, k, r).unwrap();
            (g, fl, make_named(&Family::Threshold { k, n }).unwrap())
        }),
    ]
}

/// Connected weighted graph on `n` vertices: a random tree plus extra edges.
fn weighted_graph() -> impl Strategy<Value = WeightedGraph> {
    (2..=8usize).prop_flat_map(|n| {
        (
            prop::collection::vec((0.0..1.0f64, 0.1..3.0f64), n - 1),
            prop::collection::vec((0..n, 0..n, 0.1..3.0f64), 0..n),
        )
            .prop_map(move |(tree, extra)| {
                let mut edges: Vec<(usize, usize, f64)> =
                    tree.iter().enumerate().map(|(i, &(p, w))| (((i + 1) as f64 * p) as usize, i + 1, w)).collect();
                edges.extend(extra.into_iter().filter(|&(u, v, _)| u != v));
                WeightedGraph::new(n, edges).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_norm_is_top_singular_value(m in matrix(1..=7, 1..=7)) {
        let s = svd(&m, 0.0);
        let top = s.singular_values.first().copied().unwrap_or(0.0);
        prop_assert!((spectral_norm(&m) - top).abs() <= 1e-9);
        prop_assert!((s.reconstruct(m.nrows(), m.ncols()) - &m).amax() <= 1e-9);
    }

    #[test]
    fn kernel_projector_is_orthogonal_projector(m in low_rank(6)) {
        let p = kernel_projector(&m, 1e-9);
        prop_assert!((&m * &p).amax() <= 1e-9);
        prop_assert!((&p * &p - &p).amax() <= 1e-9);
        prop_assert!((&p - p.transpose()).amax() <= 1e-9);
    }

    #[test]
    fn min_norm_solution_avoids_kernel(m in low_rank(6), seed in prop::collection::vec(-1.0..1.0f64, 6)) {
        let x = Vector::from_iterator(m.ncols(), seed.into_iter().cycle().take(m.ncols()));
        let b = &m * &x;
        let w = min_norm_solution(&m, &b, 1e-9).expect("b is in the range");
        prop_assert!((&m * &w - &b).norm() <= 1e-8);
        let k = kernel_basis(&m, 1e-9);
        prop_assert!((k.transpose() * &w).amax() <= 1e-9);
    }

    #[test]
    fn symmetric_eigen_on_reflection_products(a in matrix(5..=5, 1..=4), b in matrix(5..=5, 1..=4)) {
        // clustered spectra at ±1 are where a loose deflation test breaks down
        let u = composed_reflection(&orthonormal(&a), &orthonormal(&b));
        let h = (&u + u.transpose()) * 0.5;
        let (vals, vecs) = sym_eigen(&h, 1e-9).unwrap();
        let resid = &h * &vecs - &vecs * Mat::from_diagonal(&Vector::from_vec(vals));
        prop_assert!(resid.amax() <= 1e-10);
        let sv = singular_values(&u);
        prop_assert!(sv.iter().all(|s| (s - 1.0).abs() <= 1e-10));
    }

    #[test]
    fn certificate_generators_certify(f in partial_function()) {
        let cs = certificate_structure_of(&f).unwrap();
        for (m, gens) in cs.members.iter().enumerate() {
            for &g in gens {
                prop_assert!(cs.contains(m, g));
                // upward closed: adding any index keeps membership
                for j in 0..f.n {
                    prop_assert!(cs.contains(m, g | 1 << j));
                }
                let witnessed = f.positives().into_iter().any(|i| {
                    let a = Assignment::restrict(&f.domain[i], g);
                    is_certificate(&f, &a)
                });
                prop_assert!(witnessed);
            }
            // antichain
            for &g in gens {
                for &h in gens {
                    prop_assert!(g == h || g & h != g);
                }
            }
        }
    }

    #[test]
    fn block_sensitivity_below_certificate_complexity(f in partial_function()) {
        prop_assert!(block_sensitivity(&f) <= certificate_complexity(&f).0);
    }

    #[test]
    fn ratio_is_permutation_invariant(seed in prop::collection::vec(-1.0..1.0f64, 16), rot in 0..4usize) {
        let f = make_named(&Family::Threshold { k: 2, n: 3 }).unwrap();
        let m = Mat::from_fn(f.positives().len(), f.negatives().len(), |i, j| seed[(i * 4 + j) % 16]);
        let g = AdversaryMatrix::bipartite(&f, m).unwrap();
        let rows: Vec<usize> = (0..g.rows.len()).map(|i| (i + rot) % g.rows.len()).collect();
        let cols: Vec<usize> = (0..g.cols.len()).rev().collect();
        let a = adv_ratio(&g).unwrap();
        let b = adv_ratio(&g.permuted(&rows, &cols)).unwrap();
        prop_assert!((a.ratio - b.ratio).abs() <= 1e-9 * a.ratio.max(1.0));
    }

    #[test]
    fn masked_norm_at_most_twice(seed in prop::collection::vec(-1.0..1.0f64, 64), j in 0..3usize) {
        let inputs: Vec<Vec<u8>> = all_strings(3, 2).collect();
        let g = AdversaryMatrix { rows: inputs.clone(), cols: inputs, m: Mat::from_vec(8, 8, seed) };
        let (lhs, rhs) = hadamard_delta_check(&g.m, &delta_mask(&g, j)).unwrap();
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn factorization_bound_dominates(b in matrix(1..=6, 1..=6), seed in prop::collection::vec(-2.0..2.0f64, 36)) {
        let c = Mat::from_fn(b.nrows(), b.ncols(), |i, j| seed[i * 6 + j]);
        let a = hadamard(&b, &c);
        let bound = mathias_bound(&a, &b, &c).unwrap();
        prop_assert!(spectral_norm(&a) <= bound * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn e_projectors_are_orthogonal(n in 1..=3usize, q in 2..=4usize) {
        let sets: Vec<u64> = (0..1u64 << n).collect();
        for &s in &sets {
            let es = e_projector(n, q, s);
            for &t in &sets {
                let prod = &es * e_projector(n, q, t);
                let want = if s == t { es.clone() } else { Mat::zeros(es.nrows(), es.ncols()) };
                prop_assert!((prod - want).amax() <= 1e-9);
            }
        }
    }

    #[test]
    fn threshold_duals_are_feasible(n in 1..=5usize, k in 1..=5usize) {
        prop_assume!(k <= n);
        let s = threshold_dual(k, n).unwrap();
        prop_assert!(s.check_feasible().max_violation <= 1e-9);
        let p = dual_to_span(&s).unwrap();
        let w = witness_size(&p, &s.f, true).unwrap();
        prop_assert!((w.wsize - s.objective()).abs() <= 1e-9 * s.objective().max(1.0));
    }

    #[test]
    fn evaluation_matches_witness_existence(
        dim in 1..=3usize,
        n in 1..=3usize,
        raw in prop::collection::vec((prop::collection::vec(-2i8..=2, 3), 0..3usize, 0..2u8), 1..6),
        target in prop::collection::vec(-2i8..=2, 3),
    ) {
        prop_assume!(target[..dim].iter().any(|&t| t != 0));
        let inputs = raw
            .iter()
            .map(|(v, j, b)| InputVector { v: v[..dim].iter().map(|&x| x as f64).collect(), label: Label::Var { j: j % n, b: *b } })
            .collect();
        let p = SpanProgram::new(n, target[..dim].iter().map(|&x| x as f64).collect(), inputs, vec![]).unwrap();
        for z in all_strings(n, 2) {
            if evaluate(&p, &z) {
                prop_assert!(positive_witness(&p, &z).is_ok());
                prop_assert!(negative_witness(&p, &z).is_err());
            } else {
                prop_assert!(negative_witness(&p, &z).is_ok());
                prop_assert!(positive_witness(&p, &z).is_err());
            }
        }
    }

    #[test]
    fn st_connectivity_matches_bfs(n in 2..=8usize, mask in any::<u64>(), t in 1..8usize) {
        let t = t % n;
        prop_assume!(t != 0);
        let pairs = n * (n - 1) / 2;
        let g = SimpleGraph::from_pair_mask(n, mask & ((1u64 << pairs) - 1));
        let p = st_connectivity_program(n, 0, t).unwrap();
        prop_assert_eq!(evaluate(&p, &g.edge_bits()), g.connected(0, t));
    }

    #[test]
    fn canonical_form_is_canonical((g, fl, f) in small_lg()) {
        let p = with_minimal_witnesses(&lg_to_span(&g, &fl, &f).unwrap(), &f).unwrap();
        let c = canonicalize(&p, &f).unwrap();
        prop_assert!(is_canonical(&c, &f, 1e-9));
    }

    #[test]
    fn rebalancing_trades_complexities((g, fl, _) in small_lg(), a in 0.25..4.0f64) {
        let c = complexities(&g, &fl).unwrap();
        let d = complexities(&g.rebalanced(a), &fl).unwrap();
        prop_assert!((d.negative - a * c.negative).abs() <= 1e-9 * d.negative.max(1.0));
        prop_assert!((d.positive - c.positive / a).abs() <= 1e-9 * d.positive.max(1.0));
        prop_assert!((d.total - c.total).abs() <= 1e-9 * c.total.max(1.0));
        prop_assert!(fl.validate(&g).unwrap() <= 1e-12);
    }

    #[test]
    fn lg_dual_objective_is_max_complexity((g, fl, f) in small_lg()) {
        let s = to_dual_adversary(&g, &fl, &f).unwrap();
        let c = complexities(&g, &fl).unwrap();
        prop_assert!((s.objective() - c.max()).abs() <= 1e-9 * c.max().max(1.0));
        prop_assert!(s.check_feasible().max_violation <= 1e-9);
    }

    #[test]
    fn mu_nu_contract(q in 2..=64usize) {
        let (mu, nu) = make_mu_nu(q).unwrap();
        for i in 0..q {
            prop_assert!(mu[i].norm() <= 2f64.sqrt() + 1e-12 && nu[i].norm() <= 2f64.sqrt() + 1e-12);
            for j in 0..q {
                let want = if i == j { 0.0 } else { 1.0 };
                prop_assert!((mu[i].dot(&nu[j]) - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn zero_phase_is_always_detected(a in matrix(6..=6, 1..=3), b in matrix(6..=6, 1..=3), delta in 0.01..1.0f64) {
        // a shared column lies in the +1 eigenspace of R_B R_A
        let shared = a.column(0).into_owned();
        let mut b = b;
        b.set_column(0, &shared);
        let (a, b) = (orthonormal(&a), orthonormal(&b));
        let u = composed_reflection(&a, &b);
        let v = a.column(0).into_owned();
        prop_assert!((&u * &v - &v).norm() <= 1e-9);
        let uc = to_complex_mat(&u);
        let mut apply = |x: &CVec| &uc * x;
        let round = phase_detection(&mut apply, delta, &to_complex(&v)).unwrap();
        prop_assert!(round.p_zero >= 1.0 - 1e-9);
    }

    #[test]
    fn span_walk_is_orthogonal((g, fl, f) in small_lg(), pick in any::<prop::sample::Index>()) {
        let p = lg_to_span(&g, &fl, &f).unwrap();
        let sizes = witness_size(&p, &f, false).unwrap();
        let walk = SpanWalk::new(&p, sizes, WalkConstants::default()).unwrap();
        let z = &f.domain[pick.index(f.len())];
        let u = walk.unitary(z);
        prop_assert!((u.transpose() * &u - Mat::identity(u.nrows(), u.ncols())).amax() <= 1e-9);
    }

    #[test]
    fn optimal_flow_has_least_energy(g in weighted_graph(), coeffs in prop::collection::vec(-1.0..1.0f64, 16)) {
        let n = g.n;
        let mut sigma = vec![0.0; n];
        sigma[0] = 1.0;
        let marked = [n - 1];
        let (r, opt) = effective_resistance(&g, &sigma, &marked).unwrap();
        prop_assert!((flow_energy(&g, &opt) - r).abs() <= 1e-9 * r.max(1.0));
        prop_assert!(conservation_violation(&g, &opt, &sigma, &marked) <= 1e-9);
        // any other feasible flow differs by a circulation on unmarked vertices
        let inc = Mat::from_fn(n - 1, g.edges.len(), |u, e| {
            let (a, b, _) = g.edges[e];
            (a == u) as u8 as f64 - (b == u) as u8 as f64
        });
        let k = kernel_basis(&inc, 1e-9);
        let mut other = opt.flows.clone();
        for c in 0..k.ncols() {
            for e in 0..other.len() {
                other[e] += coeffs[c % coeffs.len()] * k[(e, c)];
            }
        }
        let other = FlowAssignment { flows: other };
        prop_assert!(conservation_violation(&g, &other, &sigma, &marked) <= 1e-9);
        prop_assert!(flow_energy(&g, &other) >= r - 1e-9);
    }

    #[test]
    fn commute_time_is_twice_weight_times_resistance(g in weighted_graph()) {
        let (lhs, rhs) = commute_identity_check(&g, 0, g.n - 1).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.max(1.0));
    }
}
