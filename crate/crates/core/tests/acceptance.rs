use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use vamkit::composite::{Composite, MultiplierAnalysis, Site};
use vamkit::copositivity::Options;
use vamkit::exec::Execution;
use vamkit::kkt::KktSite;
use vamkit::numeric::linalg::{self, from_ints, Vector};
use vamkit::numeric::scalar::pow2_inv;
use vamkit::numeric::{ExtScalar, Scalar};
use vamkit::optimality::ProblemSite;
use vamkit::oracle::{self, QuotientProbe};
use vamkit::polyhedra::json::from_json;
use vamkit::polyhedra::{Generators, Polyhedron};
use vamkit::problem::Problem;
use vamkit::report::{self, Command, ReportOptions};
use vamkit::suite::{self, Instance};
use vamkit::verdict::{Outcome, Witness};
use vamkit::verify;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> Problem {
    let path = fixtures_dir().join(format!("{name}.toml"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Problem::from_toml(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn cone(rows: &[&[i64]], eq_rows: &[&[i64]]) -> Polyhedron {
    let ineq: Vec<Vector> = rows.iter().map(|r| from_ints(r)).collect();
    let eq: Vec<Vector> = eq_rows.iter().map(|r| from_ints(r)).collect();
    Polyhedron::cone(rows.first().or(eq_rows.first()).map_or(0, |r| r.len()), &ineq, &eq).unwrap()
}

fn timed(limit: Duration, elapsed: Duration) -> std::result::Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn first_order_fixture(name: &str, limit: Duration, witness_cone: Polyhedron, method: &str) -> Check {
    let p = fixture(name);
    let start = Instant::now();
    let pt = p.point(None).map_err(err)?;
    let site = Site::new(&p.problem.composite, &pt.x, Options::default()).map_err(err)?;
    let mr = site.check_metric_regularity().map_err(err)?;
    let msqc = site.check_msqc().map_err(err)?;
    let elapsed = start.elapsed();
    ensure(mr.is_fails(), || "metric regularity does not fail".into())?;
    let w = mr.witness.as_ref().and_then(Witness::vector).ok_or("no vector witness")?;
    ensure(!linalg::is_zero(w) && witness_cone.contains(w).map_err(err)?, || format!("witness {w:?} outside the expected cone"))?;
    let reported = from_json(&mr.certificate.as_ref().ok_or("no certificate")?["cone"]).map_err(err)?;
    ensure(reported.set_eq(&witness_cone), || "reported singular cone differs".into())?;
    ensure(msqc.is_holds(), || format!("msqc is {:?}", msqc.outcome))?;
    let got = serde_json::to_value(msqc.method).map_err(err)?;
    ensure(got == method, || format!("msqc decided by {got}"))?;
    ensure(msqc.sub_verdicts.iter().all(|s| s.is_holds()), || "a sub-verdict does not hold".into())?;
    timed(limit, elapsed)?;
    Ok(format!("msqc by {method}, {} sub-verdicts, {elapsed:.2?}", msqc.sub_verdicts.len()))
}

fn criterion_1() -> Check {
    first_order_fixture("fmr_a", Duration::from_secs(1), cone(&[], &[&[1, 0]]), "auto_hoffman")
}

fn criterion_2() -> Check {
    let expected = cone(&[&[-1, 0, 0], &[0, -1, 0], &[0, 0, -1]], &[&[1, 1, -1]]);
    first_order_fixture("fmr_b", Duration::from_secs(5), expected, "gfrerer")
}

fn criterion_3() -> Check {
    let p = fixture("sof_b");
    let pt = p.point(None).map_err(err)?;
    let at = ProblemSite::new(&p.problem, &pt.x, Options::default()).map_err(err)?;
    let lambda = at.site.multiplier_set(&at.target()).map_err(err)?;
    let expected = Polyhedron::new(
        3,
        cone(&[&[-1, 0, 0], &[0, -1, 0], &[0, 0, -1]], &[]).ineqs().to_vec(),
        vec![vamkit::polyhedra::Constraint::new(from_ints(&[1, 1, -1]), Scalar::from_integer(1.into()))],
    )
    .map_err(err)?;
    ensure(lambda.set_eq(&expected), || "multiplier set differs".into())?;
    let g = lambda.generators();
    let mut vertices = g.vertices.clone();
    vertices.sort();
    ensure(vertices == vec![from_ints(&[0, 1, 0]), from_ints(&[1, 0, 0])], || format!("vertices {vertices:?}"))?;
    let recession =
        Polyhedron::from_generators(3, &Generators { vertices: vec![from_ints(&[0, 0, 0])], rays: g.rays.clone(), lineality: g.lineality.clone() })
            .map_err(err)?;
    ensure(recession.set_eq(&cone(&[&[-1, 0, 0], &[0, -1, 0], &[0, 0, -1]], &[&[1, 1, -1]])), || "recession cone differs".into())?;
    ensure(at.stationarity().map_err(err)?.is_holds(), || "not stationary".into())?;
    let soc = at.sufficient_soc().map_err(err)?;
    ensure(soc.verdict.is_holds(), || "sufficient condition does not hold".into())?;
    let detail = soc.verdict.detail.clone().unwrap_or_default();
    ensure(detail.contains("strict local minimizer"), || "no minimizer conclusion".into())?;
    let growth = soc.growth.ok_or("no growth constant")?;
    Ok(format!("2 vertices, 1 ray; {detail}, growth {growth}"))
}

/// Dimensions (n, m) cycled through by the random suites.
fn shapes(max: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 1..=max {
        for m in 1..=max {
            out.push((n, m));
        }
    }
    out
}

fn affine_suite() -> Vec<Instance> {
    let mut rng = suite::rng(2024);
    let shapes = shapes(4);
    (0..120).map(|i| {
        let (n, m) = shapes[i % shapes.len()];
        suite::affine_instance(&mut rng, n, m).unwrap()
    })
    .collect()
}

fn identity_suite() -> Vec<Instance> {
    let mut rng = suite::rng(77);
    (0..60).map(|i| suite::identity_instance(&mut rng, 1 + i % 3).unwrap()).collect()
}

fn polynomial_suite() -> Vec<Instance> {
    let mut rng = suite::rng(314);
    let shapes = shapes(3);
    (0..36).map(|i| {
        let (n, m) = shapes[i % shapes.len()];
        suite::polynomial_instance(&mut rng, n, m).unwrap()
    })
    .collect()
}

fn critical_directions(ma: &MultiplierAnalysis) -> std::result::Result<Vec<Vector>, String> {
    let mut out = Vec::new();
    for piece in &ma.critical_union().pieces {
        for d in suite::unit_directions(piece) {
            if !out.contains(&d) {
                out.push(d);
            }
        }
    }
    Ok(out)
}

fn criterion_4() -> Check {
    let instances = affine_suite();
    let mut directions = 0;
    for (i, inst) in instances.iter().enumerate() {
        let site = Site::new(&inst.composite, &inst.x, Options::default()).map_err(err)?;
        let ma = MultiplierAnalysis::new(&site, &inst.v).map_err(err)?;
        for w in critical_directions(&ma)? {
            let v = verify::primal_dual(&ma, &w).map_err(err)?;
            ensure(v.is_holds(), || format!("instance {i}, w = {w:?}: {:?}", v.certificate))?;
            directions += 1;
        }
    }
    Ok(format!("{} instances, {directions} directions", instances.len()))
}

fn criterion_5() -> Check {
    let instances = identity_suite();
    let exact = verify::exact_schedule();
    let probe = QuotientProbe::default();
    let (mut critical, mut off) = (0, 0);
    let mut rng = suite::rng(5);
    for (i, inst) in instances.iter().enumerate() {
        let theta = &inst.composite.theta;
        let phi = |y: &[Scalar]| theta.eval(y);
        let cc = theta.critical_cone(&inst.x, &inst.lambda).map_err(err)?;
        for w in suite::unit_directions(&cc.hull) {
            let d2 = theta.second_subderivative(&inst.x, &inst.lambda, &w).map_err(err)?;
            let est = oracle::dq_second_subderivative(phi, &inst.x, &inst.lambda, &w, &exact).map_err(err)?;
            ensure(est.samples.iter().all(|(_, q)| *q == d2), || format!("instance {i}, w = {w:?}: {} vs {:?}", d2.to_text(), est.samples))?;
            critical += 1;
        }
        for _ in 0..4 {
            let w: Vector = (0..inst.x.len()).map(|_| Scalar::from_integer(rand_int(&mut rng).into())).collect();
            if cc.contains(&w).map_err(err)? {
                continue;
            }
            let est = oracle::dq_second_subderivative(phi, &inst.x, &inst.lambda, &w, &probe).map_err(err)?;
            ensure(est.value.is_pos_inf(), || format!("instance {i}, w = {w:?}: estimate {}", est.value.to_text()))?;
            off += 1;
        }
    }
    Ok(format!("{} instances, {critical} critical and {off} non-critical directions", instances.len()))
}

fn rand_int(rng: &mut suite::SuiteRng) -> i64 {
    use rand::Rng;
    rng.gen_range(-2..=2)
}

fn criterion_6() -> Check {
    // the probe compares its two smallest steps, here 2^-10 and 2^-11
    let probe = QuotientProbe::with_schedule((3..=11).map(pow2_inv).collect()).map_err(err)?;
    let mut checked = 0;
    for name in ["sof_a", "sof_b"] {
        let p = fixture(name);
        let pt = p.point(None).map_err(err)?;
        let v = p.target(pt).map_err(err)?.ok_or("no target")?;
        let site = Site::new(&p.problem.composite, &pt.x, Options::default()).map_err(err)?;
        let ma = MultiplierAnalysis::new(&site, &v).map_err(err)?;
        let mut ws = critical_directions(&ma)?;
        ws.extend(pt.ws.iter().filter(|w| ma.is_critical(w).unwrap_or(false)).cloned());
        for w in ws {
            let r = verify::d2_oracle(&ma, &w, &probe).map_err(err)?;
            ensure(r.is_holds(), || format!("{name}, w = {w:?}: {:?}", r.certificate))?;
            checked += 1;
        }
    }
    let instances = polynomial_suite();
    let mut worst = 0f64;
    for (i, inst) in instances.iter().enumerate() {
        let site = Site::new(&inst.composite, &inst.x, Options::default()).map_err(err)?;
        let ma = MultiplierAnalysis::new(&site, &inst.v).map_err(err)?;
        for w in critical_directions(&ma)? {
            let r = verify::d2_oracle(&ma, &w, &probe).map_err(err)?;
            ensure(r.is_holds(), || format!("polynomial instance {i}, w = {w:?}: {:?} {:?} {:?}", r.outcome, r.detail, r.certificate))?;
            if let Some(c) = r.certificate.as_ref() {
                let allowed = c["allowed"].as_str().and_then(|a| ExtScalar::parse(a).ok()).map_or(1.0, |a| a.to_f64());
                for s in c["samples"].as_array().into_iter().flatten() {
                    let e = s["error"].as_str().and_then(|e| ExtScalar::parse(e).ok()).map_or(0.0, |e| e.to_f64());
                    worst = worst.max(e / allowed);
                }
            }
            checked += 1;
        }
    }
    Ok(format!("2 fixtures and {} polynomial instances, {checked} directions, worst error {:.0}% of the allowance", instances.len(), 100.0 * worst))
}

fn pwlq_relation(inst: &Instance, extra: &[Vector]) -> std::result::Result<usize, String> {
    let theta = &inst.composite.theta;
    let y = inst.composite.f.eval(&inst.x).map_err(err)?;
    let cc = theta.critical_cone(&y, &inst.lambda).map_err(err)?;
    let mut ds = suite::cone_directions(&cc.hull);
    ds.push(linalg::zeros(theta.dim()));
    ds.extend(extra.iter().cloned());
    for d in &ds {
        let v = verify::pwlq_proto_relation(theta, &y, &inst.lambda, d).map_err(err)?;
        ensure(v.is_holds(), || format!("d = {d:?}: {:?}", v.certificate))?;
    }
    Ok(ds.len())
}

fn criterion_7() -> Check {
    let mut rng = suite::rng(71);
    let (mut pwlq, mut composite) = (0, 0);
    let mut all: Vec<Instance> = affine_suite();
    all.extend(identity_suite());
    all.extend(polynomial_suite());
    for (i, inst) in all.iter().enumerate() {
        let extra: Vec<Vector> = (0..2).map(|_| (0..inst.composite.m()).map(|_| Scalar::from_integer(rand_int(&mut rng).into())).collect()).collect();
        pwlq += pwlq_relation(inst, &extra).map_err(|e| format!("suite instance {i}: {e}"))?;
    }
    for (i, inst) in affine_suite().iter().enumerate() {
        let site = Site::new(&inst.composite, &inst.x, Options::default()).map_err(err)?;
        let ma = MultiplierAnalysis::new(&site, &inst.v).map_err(err)?;
        let mut ws = critical_directions(&ma)?;
        ws.push(linalg::zeros(inst.composite.n()));
        ws.push((0..inst.composite.n()).map(|_| Scalar::from_integer(rand_int(&mut rng).into())).collect());
        for w in ws {
            let v = verify::composite_proto_relation(&ma, &w).map_err(err)?;
            ensure(v.is_holds(), || format!("affine instance {i}, w = {w:?}: {:?}", v.certificate))?;
            composite += 1;
        }
    }
    let p = fixture("exaproto");
    let pt = p.point(None).map_err(err)?;
    let v = p.target(pt).map_err(err)?.ok_or("no target")?;
    let site = Site::new(&p.problem.composite, &pt.x, Options::default()).map_err(err)?;
    let ma = MultiplierAnalysis::new(&site, &v).map_err(err)?;
    for w in &pt.ws {
        let r = verify::composite_proto_relation(&ma, w).map_err(err)?;
        ensure(r.is_holds(), || format!("exaproto, w = {w:?}: {:?}", r.certificate))?;
        composite += 1;
    }
    Ok(format!("{pwlq} piecewise and {composite} composite directions; fixture differences reported as discrepancies"))
}

struct KktTally {
    instances: usize,
    unique: usize,
    ssr_holds: usize,
    robinson_witnesses: usize,
}

fn kkt_suite() -> std::result::Result<&'static KktTally, String> {
    static TALLY: OnceLock<std::result::Result<KktTally, String>> = OnceLock::new();
    TALLY.get_or_init(run_kkt_suite).as_ref().map_err(|e| e.clone())
}

fn run_kkt_suite() -> std::result::Result<KktTally, String> {
    let mut rng = suite::rng(88);
    let shapes = shapes(3);
    let mut t = KktTally { instances: 0, unique: 0, ssr_holds: 0, robinson_witnesses: 0 };
    for i in 0..120 {
        let (n, m) = shapes[i % shapes.len()];
        let inst = suite::kkt_instance(&mut rng, n, m).map_err(err)?;
        let site = KktSite::new(&inst.problem, inst.point.clone(), Options::default()).map_err(err)?;
        let singleton = site.multipliers().map_err(err)?.is_singleton();
        let uniq = site.uniqueness_check().map_err(err)?;
        ensure(uniq.outcome != Outcome::Unknown, || format!("kkt instance {i}: uniqueness Unknown"))?;
        ensure(uniq.is_holds() == singleton, || format!("kkt instance {i}: verdict {:?}, singleton {singleton}", uniq.outcome))?;
        t.unique += singleton as usize;
        let ssr = site.kkt_ssr().map_err(err)?;
        if ssr.is_holds() {
            ensure(uniq.is_holds(), || format!("kkt instance {i}: ssr holds without uniqueness"))?;
            let soc = site.single_multiplier_soc().map_err(err)?;
            ensure(soc.is_holds(), || format!("kkt instance {i}: ssr holds without the strict condition"))?;
            t.ssr_holds += 1;
        }
        if ssr.is_fails() && site.strong_robinson().map_err(err)?.is_fails() {
            let probe = site.isos1_probe(&site.probe_directions().map_err(err)?).map_err(err)?;
            match &probe.witness {
                Some(Witness::Pair { w, u }) if linalg::is_zero(w) && !linalg::is_zero(u) => t.robinson_witnesses += 1,
                other => return Err(format!("kkt instance {i}: probe witness {other:?}")),
            }
        }
        t.instances += 1;
    }
    Ok(t)
}

fn criterion_8() -> Check {
    let t = kkt_suite()?;
    Ok(format!("{} instances, {} with a unique multiplier", t.instances, t.unique))
}

fn criterion_9() -> Check {
    let t = kkt_suite()?;
    Ok(format!("{} instances, ssr holds on {}, {} zero-direction witnesses", t.instances, t.ssr_holds, t.robinson_witnesses))
}

fn criterion_10() -> Check {
    let mut rng = suite::rng(10);
    let opts = Options::default();
    let mut directions = 0;
    let count = 60;
    for i in 0..count {
        let n = 1 + i % 3;
        let a = suite::affine_instance(&mut rng, n, 1 + (i / 3) % 3).map_err(err)?;
        let b = suite::affine_instance_at(&mut rng, a.x.clone(), 1 + i % 2).map_err(err)?;
        let parts: Vec<Composite> = vec![a.composite.clone(), b.composite.clone()];
        let first = verify::sum_rule_subdifferential(&parts, &a.x, &opts).map_err(err)?;
        ensure(first.is_holds(), || format!("pair {i}: {:?}", first.certificate))?;
        let v = linalg::add(&a.v, &b.v);
        let (stacked, _) = vamkit::composite::sum_compose(&parts).map_err(err)?;
        let site = Site::new(&stacked, &a.x, opts.clone()).map_err(err)?;
        let ma = MultiplierAnalysis::new(&site, &v).map_err(err)?;
        let mut ws = critical_directions(&ma)?;
        ws.push((0..n).map(|_| Scalar::from_integer(rand_int(&mut rng).into())).collect());
        let second = verify::sum_rule_d2(&parts, &a.x, &v, &ws, &opts).map_err(err)?;
        ensure(second.is_holds(), || format!("pair {i}: {:?}", second.certificate))?;
        directions += ws.len();
    }
    Ok(format!("{count} pairs, {directions} directions"))
}

fn criterion_11() -> Check {
    let mut names: Vec<String> = std::fs::read_dir(fixtures_dir())
        .map_err(err)?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.path().file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    names.sort();
    let sequential = ReportOptions {
        execution: Execution::Sequential,
        copositivity: Options { execution: Execution::Sequential, ..Options::default() },
        ..ReportOptions::default()
    };
    let mut reports = 0;
    for name in &names {
        let p = fixture(name);
        for point in p.points.keys() {
            for command in Command::ALL {
                let render = |opts: &ReportOptions| match report::run(command, &p, Some(point), &[], opts) {
                    Ok(v) => serde_json::to_string_pretty(&v).unwrap(),
                    Err(e) => format!("error: {e}"),
                };
                let first = render(&ReportOptions::default());
                let again = render(&ReportOptions::default());
                let serial = render(&sequential);
                ensure(first == again && first == serial, || format!("{name}/{point} {command}: output differs between runs"))?;
                reports += 1;
            }
        }
    }
    Ok(format!("{} fixtures, {reports} reports, identical across runs and execution modes", names.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("metric regularity fails and affine qualification holds (fmr_a)", criterion_1),
        ("metric regularity fails and the second-order qualification test holds (fmr_b)", criterion_2),
        ("multiplier set, stationarity and sufficient condition (sof_b)", criterion_3),
        ("primal-dual equality on the affine suite", criterion_4),
        ("exact quotients for piecewise functions", criterion_5),
        ("arc quotients for polynomial maps", criterion_6),
        ("proto-derivative equals half the subgradients of d2", criterion_7),
        ("strong Robinson verdict matches multiplier uniqueness", criterion_8),
        ("strong subregularity consistency", criterion_9),
        ("sum rule for pairs of affine composites", criterion_10),
        ("deterministic reports", criterion_11),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {:>2}  {title}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}  {title}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
