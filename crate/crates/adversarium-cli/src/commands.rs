//! Command handlers: thin wrappers that load inputs, call the library and
//! assemble a report.

use std::path::Path;

use adversarium::adversary::{adv_ratio as adv_ratio_of, hamming_distance, relation_adversary, threshold_relation_adversary, ambainis_gamma, AdversaryError, AdversaryMatrix};
use adversarium::dual_adversary::{maj3_solution, threshold_dual, DualAdversarySolution, DualError};
use adversarium::electric_walks::{
    commute_identity_check, effective_resistance, electric_walk_run, flow_energy, conservation_violation, hitting_time, walk_instance,
    LgWalk, WalkError, WeightedGraph,
};
use adversarium::functions::{
    block_sensitivity, certificate_complexity, make_named, minimal_certificate, Assignment, CertificateStructure, Family,
    FunctionError, PartialFunction,
};
use adversarium::graphs::{parse_adjacency, SimpleGraph};
use adversarium::learning_graphs::{
    check_dual_certificate, collision_lg, complexities, ksubset_lg, or_lg, triangle_lg, trivial_lg, DualLGCertificate, Flow,
    LearningGraph, LgError,
};
use adversarium::quantum_sim::{run_span_program, seeded_rng, SimError, WalkConstants};
use adversarium::span_programs::{
    evaluate, or_program, span_residual, st_connectivity_program, witness_size, SpanError, SpanProgram,
};
use serde_json::json;

use crate::report::{parse_err, CliError, CliResult, Report};
use crate::{FunctionArgs, LgArgs, NetworkArgs, Params, ProgramArgs};

pub struct Ctx {
    pub seed: u64,
    pub tol: f64,
}

/// A report plus the error to exit with after printing it, if any.
pub struct Done {
    pub report: Report,
    pub status: Option<CliError>,
}

impl From<Report> for Done {
    fn from(report: Report) -> Self {
        Done { report, status: None }
    }
}

// Largest variable count for which a program's induced truth table is built.
const MAX_INDUCED_VARS: usize = 16;

impl From<FunctionError> for CliError {
    fn from(e: FunctionError) -> Self {
        match e {
            FunctionError::NoPositiveInput => CliError::Infeasible(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<AdversaryError> for CliError {
    fn from(e: AdversaryError) -> Self {
        match e {
            AdversaryError::ZeroMatrix | AdversaryError::Infeasible(_) => CliError::Infeasible(e.to_string()),
            AdversaryError::Budget(..) => CliError::Budget(e.to_string()),
            AdversaryError::Shape(_) | AdversaryError::Invalid(_) => CliError::Parse(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<SpanError> for CliError {
    fn from(e: SpanError) -> Self {
        match e {
            SpanError::ZeroTarget | SpanError::Dimension(_) | SpanError::Invalid(_) => CliError::Parse(e.to_string()),
            _ => CliError::Infeasible(e.to_string()),
        }
    }
}

impl From<DualError> for CliError {
    fn from(e: DualError) -> Self {
        match e {
            DualError::Function(e) => e.into(),
            DualError::Span(e) => e.into(),
            DualError::Invalid(_) => CliError::Parse(e.to_string()),
            DualError::Promise(_) => CliError::Infeasible(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<LgError> for CliError {
    fn from(e: LgError) -> Self {
        match e {
            LgError::Budget(..) => CliError::Budget(e.to_string()),
            LgError::Range(_) => CliError::Parse(e.to_string()),
            _ => CliError::Infeasible(e.to_string()),
        }
    }
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        match e {
            WalkError::Budget(..) => CliError::Budget(e.to_string()),
            WalkError::Parse(..) | WalkError::Invalid(_) => CliError::Parse(e.to_string()),
            WalkError::NoMarked | WalkError::Unreachable(_) => CliError::Infeasible(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Budget(..) => CliError::Budget(e.to_string()),
            SimError::Span(e) => e.into(),
            SimError::Invalid(_) => CliError::Parse(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn need(v: Option<usize>, name: &str) -> CliResult<usize> {
    v.ok_or_else(|| CliError::Parse(format!("--{name} is required here")))
}

/// `0110`-style strings, or comma-separated symbols when `q > 10`.
pub fn parse_input(s: &str, n: usize) -> CliResult<Vec<u8>> {
    let z: Vec<u8> = if s.contains(',') {
        s.split(',').map(|t| t.trim().parse::<u8>().map_err(parse_err)).collect::<CliResult<_>>()?
    } else {
        s.chars()
            .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| CliError::Parse(format!("bad symbol {c:?} in input"))))
            .collect::<CliResult<_>>()?
    };
    if z.len() != n {
        return Err(CliError::Parse(format!("input has {} symbols, expected {n}", z.len())));
    }
    Ok(z)
}

fn input_string(z: &[u8]) -> String {
    if z.iter().all(|&s| s < 10) {
        z.iter().map(|s| s.to_string()).collect()
    } else {
        z.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    }
}

fn graph_file(path: &Path) -> CliResult<SimpleGraph> {
    parse_adjacency(&read(path)?).map_err(CliError::Parse)
}

pub fn function(func: &FunctionArgs, p: &Params) -> CliResult<PartialFunction> {
    if let Some(path) = &func.table {
        let text = read(path)?;
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        return Ok(if is_csv { PartialFunction::from_csv(&text, p.q)? } else { PartialFunction::from_json(&text)? });
    }
    let name = func.function.as_deref().ok_or_else(|| CliError::Parse("a --function or --table is required".into()))?;
    let q = p.q.unwrap_or(2);
    let family = match name {
        "threshold" => Family::Threshold { k: need(p.k, "k")?, n: need(p.n, "n")? },
        "or" => Family::Or { n: need(p.n, "n")? },
        "and" => Family::And { n: need(p.n, "n")? },
        "parity" => Family::Parity { n: need(p.n, "n")? },
        "ambainis" => Family::Ambainis,
        "ed" | "element-distinctness" => Family::ElementDistinctness { n: need(p.n, "n")?, q },
        "k-distinctness" => Family::KDistinctness { k: need(p.k, "k")?, n: need(p.n, "n")?, q },
        "k-sum" => Family::KSum { k: need(p.k, "k")?, n: need(p.n, "n")?, q },
        "collision" => Family::Collision { n: need(p.n, "n")?, q },
        "set-equality" => Family::SetEquality { m: need(p.n, "n")?, q },
        "promise-threshold" => Family::PromiseThreshold { n: need(p.n, "n")?, k: need(p.k, "k")?, d: need(p.d, "d")? },
        "triangle" => Family::Triangle { vertices: need(p.vertices, "vertices")? },
        "graph-collision" => {
            let path = func.adjacency.as_deref().ok_or_else(|| CliError::Parse("graph-collision needs --adjacency".into()))?;
            Family::GraphCollision { graph: graph_file(path)? }
        }
        other => return Err(CliError::Parse(format!("unknown function {other:?}"))),
    };
    Ok(make_named(&family)?)
}

fn weights(s: &str) -> CliResult<[f64; 4]> {
    let w: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(parse_err)).collect::<CliResult<_>>()?;
    w.try_into().map_err(|_| CliError::Parse("--weights takes four numbers".into()))
}

fn matrix_rows(m: &adversarium::numerics::Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn adv_ratio(
    _ctx: &Ctx,
    func: &FunctionArgs,
    p: &Params,
    construction: Option<&str>,
    w: Option<&str>,
    matrix: Option<&Path>,
    emit_matrix: bool,
) -> CliResult<Done> {
    let g = if let Some(path) = matrix {
        let raw: AdversaryMatrix = serde_json::from_str(&read(path)?).map_err(parse_err)?;
        AdversaryMatrix::new(raw.rows, raw.cols, raw.m)?
    } else {
        let name = func.function.as_deref();
        match (name, construction, w) {
            (Some("ambainis"), None | Some("weights"), Some(w)) => ambainis_gamma(weights(w)?),
            (_, _, Some(_)) => return Err(CliError::Parse("--weights applies to the ambainis function".into())),
            (Some("threshold"), None | Some("relation"), None) => threshold_relation_adversary(need(p.k, "k")?, need(p.n, "n")?)?,
            (_, None | Some("relation"), None) => {
                let f = function(func, p)?;
                let xs: Vec<_> = f.positives().into_iter().map(|i| f.domain[i].clone()).collect();
                let ys: Vec<_> = f.negatives().into_iter().map(|i| f.domain[i].clone()).collect();
                relation_adversary(&f, &xs, &ys, |x, y| hamming_distance(x, y) == 1)?
            }
            (_, Some(c), None) => return Err(CliError::Parse(format!("unknown construction {c:?}"))),
        }
    };
    let r = adv_ratio_of(&g)?;
    let mut rep = Report::new("adv ratio");
    rep.set("norm", r.norm).set("masked_norms", &r.masked_norms).set("ratio", finite(r.ratio)).set("infinite", r.infinite);
    rep.set("rows", g.m.nrows()).set("cols", g.m.ncols());
    if emit_matrix {
        rep.set("matrix", matrix_rows(&g.m));
    }
    Ok(rep.into())
}

pub fn dual_check(ctx: &Ctx, path: Option<&Path>, builtin: Option<&str>, func: &FunctionArgs, p: &Params) -> CliResult<Done> {
    let s: DualAdversarySolution = match (path, builtin) {
        (Some(path), None) => DualAdversarySolution::from_json(&read(path)?, &function(func, p)?)?,
        (None, Some("threshold")) => threshold_dual(need(p.k, "k")?, need(p.n, "n")?)?,
        (None, Some("maj3")) => maj3_solution(),
        (None, Some(other)) => return Err(CliError::Parse(format!("unknown built-in solution {other:?}"))),
        _ => return Err(CliError::Parse("give a solution file or --builtin".into())),
    };
    let feas = s.check_feasible();
    let ok = feas.feasible(ctx.tol);
    let mut rep = Report::new("dual check");
    rep.set("kind", s.kind).set("objective", s.objective()).set("max_violation", feas.max_violation).set("feasible", ok);
    rep.set(
        "worst_pair",
        feas.worst.map(|(x, y)| [input_string(&s.f.domain[x]), input_string(&s.f.domain[y])]),
    );
    rep.set("variables", s.f.n).set("domain", s.f.len());
    let status = (!ok).then(|| CliError::Infeasible(format!("max violation {:e} exceeds {:e}", feas.max_violation, ctx.tol)));
    Ok(Done { report: rep, status })
}

pub fn program(prog: &ProgramArgs, p: &Params) -> CliResult<SpanProgram> {
    match (&prog.program, prog.builtin.as_deref()) {
        (Some(path), None) => Ok(SpanProgram::from_json(&read(path)?)?),
        (None, Some("or")) => Ok(or_program(need(p.n, "n")?)),
        (None, Some("st-conn")) => Ok(st_connectivity_program(need(p.n, "n")?, need(prog.s, "s")?, need(prog.t, "t")?)?),
        (None, Some(other)) => Err(CliError::Parse(format!("unknown built-in program {other:?}"))),
        _ => Err(CliError::Parse("give --program or --builtin".into())),
    }
}

fn program_input(prog: &SpanProgram, input: Option<&str>, graph: Option<&Path>) -> CliResult<Vec<u8>> {
    match (input, graph) {
        (Some(s), None) => parse_input(s, prog.n),
        (None, Some(path)) => {
            let z = graph_file(path)?.edge_bits();
            if z.len() != prog.n {
                return Err(CliError::Parse(format!("graph gives {} edge variables, program has {}", z.len(), prog.n)));
            }
            Ok(z)
        }
        _ => Err(CliError::Parse("give exactly one of --input and --graph".into())),
    }
}

/// The given function, or the total function the program computes.
fn program_function(prog: &SpanProgram, func: &FunctionArgs, p: &Params) -> CliResult<PartialFunction> {
    if func.function.is_some() || func.table.is_some() {
        return function(func, p);
    }
    if prog.n > MAX_INDUCED_VARS {
        return Err(CliError::Budget(format!("{} variables; pass --function or --table", prog.n)));
    }
    Ok(PartialFunction::tabulate(prog.n, 2, |z| Some(evaluate(prog, z)))?)
}

pub fn span_eval(ctx: &Ctx, prog: &ProgramArgs, p: &Params, input: Option<&str>, graph: Option<&Path>) -> CliResult<Done> {
    let sp = program(prog, p)?;
    let z = program_input(&sp, input, graph)?;
    let residual = span_residual(&sp, &z);
    let scale = sp.target.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let mut rep = Report::new("span eval");
    rep.set("input", input_string(&z)).set("accept", residual <= ctx.tol * scale).set("residual", residual);
    Ok(rep.into())
}

pub fn span_wsize(_ctx: &Ctx, prog: &ProgramArgs, p: &Params, func: &FunctionArgs) -> CliResult<Done> {
    let sp = program(prog, p)?;
    let f = program_function(&sp, func, p)?;
    let w = witness_size(&sp, &f, false)?;
    let mut rep = Report::new("span wsize");
    rep.set("W0", w.w0).set("W1", w.w1).set("wsize", w.wsize).set("domain", f.len());
    Ok(rep.into())
}

fn threads() -> usize {
    std::env::var("ADVERSARIUM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Seed of run `r`; independent of how runs are spread over threads.
fn run_seed(seed: u64, r: usize) -> u64 {
    seed ^ (r as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Evaluates `job` on `0..count` over worker threads, results in index order.
fn fan_out<T: Send>(count: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    if count == 0 {
        return vec![];
    }
    let workers = threads().min(count);
    let chunk = count.div_ceil(workers);
    let mut out: Vec<Option<T>> = (0..count).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (c, slots) in out.chunks_mut(chunk).enumerate() {
            let job = &job;
            scope.spawn(move || {
                for (k, slot) in slots.iter_mut().enumerate() {
                    *slot = Some(job(c * chunk + k));
                }
            });
        }
    });
    out.into_iter().map(|x| x.expect("every slot filled")).collect()
}

fn check_runs(runs: usize) -> CliResult<()> {
    if runs == 0 {
        return Err(CliError::Parse("--runs must be positive".into()));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn span_simulate(
    ctx: &Ctx,
    prog: &ProgramArgs,
    p: &Params,
    func: &FunctionArgs,
    input: Option<&str>,
    graph: Option<&Path>,
    runs: usize,
) -> CliResult<Done> {
    check_runs(runs)?;
    let sp = program(prog, p)?;
    let z = program_input(&sp, input, graph)?;
    let f = program_function(&sp, func, p)?;
    let sizes = witness_size(&sp, &f, false)?;
    let consts = WalkConstants::default();
    let outcomes = fan_out(runs, |r| run_span_program(&sp, &z, sizes, consts, &mut seeded_rng(run_seed(ctx.seed, r))));
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    let accepts = outcomes.iter().filter(|o| o.accept).count();
    let mut rep = Report::new("span simulate");
    rep.set("input", input_string(&z)).set("expected", f.value(&z)).set("runs", runs).set("accepts", accepts);
    rep.set("accept_rate", accepts as f64 / runs as f64).set("p_accept", outcomes[0].p_accept);
    rep.set("queries", outcomes.iter().map(|o| o.queries).max()).set("wsize", sizes.wsize).set("constants", consts);
    Ok(rep.into())
}

fn lg_of(lg: &LgArgs, p: &Params) -> CliResult<(LearningGraph, Flow)> {
    match (&lg.lg, lg.builtin.as_deref()) {
        (Some(path), None) => {
            let v: serde_json::Value = serde_json::from_str(&read(path)?).map_err(parse_err)?;
            let (Some(g), Some(flow)) = (v.get("graph"), v.get("flow")) else {
                return Err(CliError::Parse("learning-graph file needs `graph` and `flow`".into()));
            };
            let g = LearningGraph::from_json(&g.to_string())?;
            let flow: Flow = serde_json::from_value(flow.clone()).map_err(parse_err)?;
            Ok((g, flow))
        }
        (None, Some("trivial")) => Ok(trivial_lg(need(p.n, "n")?)),
        (None, Some("or")) => Ok(or_lg(need(p.n, "n")?)),
        (None, Some("ksubset")) => Ok(ksubset_lg(need(p.n, "n")?, need(p.k, "k")?, p.r.unwrap_or(0))?),
        (None, Some("collision")) => Ok(collision_lg(need(p.n, "n")?, need(p.r, "r")?)?),
        (None, Some("triangle")) => Ok(triangle_lg(need(p.vertices, "vertices")?, need(p.r1, "r1")?, need(p.r2, "r2")?, need(p.l, "l")?)?),
        (None, Some(other)) => Err(CliError::Parse(format!("unknown built-in learning graph {other:?}"))),
        _ => Err(CliError::Parse("give --lg or --builtin".into())),
    }
}

pub fn lg_complexity(_ctx: &Ctx, lg: &LgArgs, p: &Params) -> CliResult<Done> {
    let (g, flow) = lg_of(lg, p)?;
    let c = complexities(&g, &flow)?;
    let mut rep = Report::new("lg complexity");
    rep.set("negative", c.negative).set("positive", c.positive).set("total", c.total);
    rep.set("vertices", g.vertices.len()).set("arcs", g.arcs.len()).set("members", flow.members.len());
    Ok(rep.into())
}

fn cert_structure(name: &str, p: &Params) -> CliResult<CertificateStructure> {
    Ok(match name {
        "ksubset" => CertificateStructure::k_subset(need(p.n, "n")?, need(p.k, "k")?),
        "or" => CertificateStructure::or(need(p.n, "n")?),
        "trivial" => CertificateStructure::trivial(need(p.n, "n")?),
        "collision" => CertificateStructure::collision(need(p.n, "n")?),
        "set-equality" => CertificateStructure::set_equality(need(p.n, "n")?),
        "hidden-shift" => CertificateStructure::hidden_shift(need(p.n, "n")?),
        "triangle" => CertificateStructure::triangle(need(p.vertices, "vertices")?),
        other => return Err(CliError::Parse(format!("unknown certificate structure {other:?}"))),
    })
}

pub fn lg_dual_check(_ctx: &Ctx, cert: &str, alpha: &str, p: &Params) -> CliResult<Done> {
    let cs = cert_structure(cert, p)?;
    let a = match (alpha, cert) {
        ("builtin", "ksubset") => DualLGCertificate::ksubset(&cs, need(p.k, "k")?),
        ("builtin", "hidden-shift") => DualLGCertificate::hidden_shift(&cs),
        ("builtin", other) => return Err(CliError::Parse(format!("no built-in certificate for {other:?}"))),
        (path, _) => {
            let triples: Vec<(u64, usize, f64)> = serde_json::from_str(&read(Path::new(path))?).map_err(parse_err)?;
            DualLGCertificate::from_triples(cs.n, cs.len(), &triples)
        }
    };
    let r = check_dual_certificate(&cs, &a)?;
    let mut rep = Report::new("lg dual-check");
    rep.set("objective", r.objective).set("max_constraint", r.max_constraint).set("normalized_objective", r.normalized_objective());
    rep.set("worst_arc", r.worst_arc).set("members", cs.len()).set("support", a.support().len());
    Ok(rep.into())
}

pub fn lg_simulate(ctx: &Ctx, lg: &LgArgs, p: &Params, func: &FunctionArgs, input: Option<&str>, runs: usize) -> CliResult<Done> {
    check_runs(runs)?;
    let (g, _) = lg_of(lg, p)?;
    let f = function(func, p)?;
    let walk = LgWalk::new(&g, &f)?;
    let inputs: Vec<Vec<u8>> = match input {
        Some(s) => vec![parse_input(s, f.n)?],
        None => f.domain.clone(),
    };
    let consts = WalkConstants::default();
    let jobs = inputs.len() * runs;
    let outcomes = fan_out(jobs, |k| walk.run(&g, &f, &inputs[k / runs], consts, &mut seeded_rng(run_seed(ctx.seed, k))));
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut rows = vec![];
    let mut worst: f64 = 1.0;
    for (i, z) in inputs.iter().enumerate() {
        let chunk = &outcomes[i * runs..(i + 1) * runs];
        let accepts = chunk.iter().filter(|o| o.accept).count();
        let expected = f.value(z);
        let correct = match expected {
            Some(b) => chunk.iter().filter(|o| o.accept == b).count() as f64 / runs as f64,
            None => f64::NAN,
        };
        if correct.is_finite() {
            worst = worst.min(correct);
        }
        rows.push(json!({
            "input": input_string(z),
            "expected": expected,
            "accepts": accepts,
            "success": finite(correct),
            "p_accept": chunk[0].p_accept,
            "queries": chunk.iter().map(|o| o.queries).max(),
        }));
    }
    let mut rep = Report::new("lg simulate");
    rep.set("runs", runs).set("r_bound", walk.r_bound).set("constants", consts).set("worst_success", worst).set("inputs", rows);
    Ok(rep.into())
}

fn network(net: &NetworkArgs) -> CliResult<(WeightedGraph, Vec<f64>, Vec<usize>)> {
    let g = WeightedGraph::parse_edge_list(&read(&net.graph)?)?;
    let sigma = match (&net.sigma, net.s) {
        (Some(path), None) => {
            let s: Vec<f64> = serde_json::from_str(&read(path)?).map_err(parse_err)?;
            if s.len() != g.n {
                return Err(CliError::Parse(format!("sigma has {} entries for {} vertices", s.len(), g.n)));
            }
            s
        }
        (None, Some(s)) if s < g.n => (0..g.n).map(|u| (u == s) as u8 as f64).collect(),
        (None, Some(s)) => return Err(CliError::Parse(format!("vertex {s} is not in the graph"))),
        (None, None) => vec![],
        _ => return Err(CliError::Parse("give at most one of --sigma and --s".into())),
    };
    let marked: Vec<usize> = match (&net.marked, &net.t) {
        (Some(path), None) => serde_json::from_str(&read(path)?).map_err(parse_err)?,
        (None, Some(t)) => t.split(',').map(|x| x.trim().parse::<usize>().map_err(parse_err)).collect::<CliResult<_>>()?,
        (None, None) => vec![],
        _ => return Err(CliError::Parse("give at most one of --marked and --t".into())),
    };
    if let Some(&m) = marked.iter().find(|&&m| m >= g.n) {
        return Err(CliError::Parse(format!("marked vertex {m} is not in the graph")));
    }
    Ok((g, sigma, marked))
}

fn require_sigma(sigma: &[f64]) -> CliResult<()> {
    if sigma.is_empty() {
        return Err(CliError::Parse("give --sigma or --s".into()));
    }
    Ok(())
}

pub fn walk_resistance(_ctx: &Ctx, net: &NetworkArgs) -> CliResult<Done> {
    let (g, sigma, marked) = network(net)?;
    require_sigma(&sigma)?;
    let (r, flow) = effective_resistance(&g, &sigma, &marked)?;
    let mut rep = Report::new("walk resistance");
    rep.set("resistance", r).set("energy", flow_energy(&g, &flow));
    rep.set("conservation_violation", conservation_violation(&g, &flow, &sigma, &marked));
    let edges: Vec<_> = g.edges.iter().zip(&flow.flows).map(|(&(u, v, _), &x)| json!([u, v, x])).collect();
    rep.set("flow", edges);
    Ok(rep.into())
}

pub fn walk_hitting(_ctx: &Ctx, net: &NetworkArgs) -> CliResult<Done> {
    let (g, sigma, marked) = network(net)?;
    require_sigma(&sigma)?;
    let h = hitting_time(&g, &sigma, &marked)?;
    let (r, _) = effective_resistance(&g, &sigma, &marked)?;
    let w = g.total_weight();
    let mut rep = Report::new("walk hitting");
    rep.set("hitting_time", h).set("total_weight", w).set("resistance", r).set("electric", 2.0 * w * r);
    Ok(rep.into())
}

pub fn walk_commute(_ctx: &Ctx, net: &NetworkArgs) -> CliResult<Done> {
    let (g, _, marked) = network(net)?;
    let s = need(net.s, "s")?;
    let [t] = marked[..] else {
        return Err(CliError::Parse("commute needs a single --t".into()));
    };
    let (lhs, rhs) = commute_identity_check(&g, s, t)?;
    let mut rep = Report::new("walk commute");
    rep.set("s", s).set("t", t).set("lhs", lhs).set("rhs", rhs);
    Ok(rep.into())
}

pub fn walk_run(ctx: &Ctx, net: &NetworkArgs, r_bound: Option<f64>, runs: usize) -> CliResult<Done> {
    check_runs(runs)?;
    let (g, sigma, marked) = network(net)?;
    require_sigma(&sigma)?;
    let r_bound = match r_bound {
        Some(r) => r,
        None => effective_resistance(&g, &sigma, &marked)?.0,
    };
    let (g, sigma, marked, doubled) = walk_instance(&g, &sigma, &marked)?;
    let consts = WalkConstants::default();
    let outcomes = fan_out(runs, |r| electric_walk_run(&g, &sigma, &marked, r_bound, consts, &mut seeded_rng(run_seed(ctx.seed, r))));
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    let accepts = outcomes.iter().filter(|o| o.accept).count();
    let mut rep = Report::new("walk run");
    rep.set("runs", runs).set("accepts", accepts).set("accept_rate", accepts as f64 / runs as f64);
    rep.set("p_accept", outcomes[0].p_accept).set("steps", outcomes.iter().map(|o| o.steps).max());
    rep.set("r_bound", r_bound).set("constants", consts).set("doubled", doubled);
    Ok(rep.into())
}

pub fn cert_extract(_ctx: &Ctx, func: &FunctionArgs, p: &Params, input: Option<&str>) -> CliResult<Done> {
    let f = function(func, p)?;
    let mut rep = Report::new("cert extract");
    match input {
        Some(s) => {
            let z = parse_input(s, f.n)?;
            let idx = f.index_of(&z).ok_or_else(|| CliError::Parse(format!("{s} is outside the domain")))?;
            let support = minimal_certificate(&f, idx);
            let a = Assignment::restrict(&z, support);
            let shown: String = a.values.iter().map(|v| v.map_or("*".to_string(), |x| x.to_string())).collect();
            rep.set("input", input_string(&z)).set("value", f.values[idx]).set("support", support);
            rep.set("size", support.count_ones()).set("assignment", shown);
        }
        None => {
            let (c, c0, c1) = certificate_complexity(&f);
            rep.set("C", c).set("C0", c0).set("C1", c1).set("block_sensitivity", block_sensitivity(&f));
            rep.set("domain", f.len());
        }
    }
    Ok(rep.into())
}
