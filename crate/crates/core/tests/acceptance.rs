//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use brakkenet::analysis::{
    classify_junction, graph_decomposition, slope_variation_check, tangent_cone,
    w22_weak_derivative_check, AnalyzerConfig, ConeLabel, JunctionKind, Sheet,
};
use brakkenet::fixtures;
use brakkenet::flow::{
    check_discrete_brakke, drift, run, MemorySink, NullSink, TestFunctionBank, TrajectorySummary,
};
use brakkenet::io::bundled;
use brakkenet::mollify::{Kernel, Mollifier};
use brakkenet::network::{deformation_sweep, Network};
use brakkenet::varifold::{density_ratio, mass_in_ball, Varifold1};
use brakkenet::{FlowConfig, Point};

type Net = Network<f64>;
type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    check(took < limit, format!("took {took:.1?}, limit {limit:?}"))
}

/// Trajectories shared by several criteria.
#[derive(Default)]
struct Runs {
    all: Vec<(String, TrajectorySummary<f64>)>,
    frames: Vec<(String, Vec<(f64, Net)>)>,
}

impl Runs {
    fn record(
        &mut self,
        name: &str,
        summary: TrajectorySummary<f64>,
        sink: Option<MemorySink<f64>>,
    ) -> TrajectorySummary<f64> {
        if let Some(s) = sink {
            self.frames.push((name.into(), s.frames));
        }
        self.all.push((name.into(), summary.clone()));
        summary
    }
}

// 1. Mollifier fidelity

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels * 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

struct Wave {
    a0: Point,
    modes: Vec<(Point, Point, f64)>,
}

impl Wave {
    fn random(rng: &mut StdRng) -> Self {
        let mut p = |s: f64| Point::new(rng.gen_range(-s..s), rng.gen_range(-s..s));
        let a0 = p(1.0);
        let modes = (0..3).map(|_| (p(1.0), p(6.0), 0.0)).collect::<Vec<_>>();
        let modes = modes
            .into_iter()
            .map(|(a, w, _)| (a, w, rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        Wave { a0, modes }
    }

    fn at(&self, z: Point) -> Point {
        self.modes
            .iter()
            .fold(self.a0, |acc, (a, w, ph)| acc + *a * (w.dot(z) + ph).sin())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst_mass = 0.0f64;
    for eps in [0.1, 0.05, 0.02] {
        let k = Kernel::with_default_quadrature(eps).unwrap();
        let total = simpson(
            |r| 2.0 * std::f64::consts::PI * r * k.eval(Point::new(r, 0.0)),
            0.0,
            1.0,
            20_000,
        );
        worst_mass = worst_mass.max((total - 1.0).abs());
    }
    check(worst_mass <= 1e-6, format!("|∫Φ − 1| = {worst_mass:e}"))?;

    let eps = 0.05;
    let k = Kernel::with_default_quadrature(eps).unwrap();
    let net = fixtures::theta(0.3, 0.2, 16);
    let v = Varifold1::from_network(&net);
    let moll = Mollifier::new(&k, &v);

    let bb = net.bbox().unwrap().expanded(6.0 * eps);
    let h = eps / 8.0;
    let nx = (bb.width() / h).ceil() as i64;
    let ny = (bb.height() / h).ceil() as i64;
    let mut lattice = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let z = Point::new(bb.min.x + i as f64 * h, bb.min.y + j as f64 * h);
            let fv = moll.first_variation(z);
            if fv != Point::zero() {
                lattice.push((z, fv));
            }
        }
    }

    let hs = eps / 8.0;
    let m = (7.0 * eps / hs).ceil() as i64;
    let mut stencil = Vec::new();
    for j in -m..=m {
        for i in -m..=m {
            let o = Point::new(i as f64 * hs, j as f64 * hs);
            if o.norm() <= 7.0 * eps {
                stencil.push((o, k.eval(o) * hs * hs));
            }
        }
    }

    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let g = Wave::random(&mut rng);
        let lhs: f64 = lattice.iter().map(|(z, fv)| fv.dot(g.at(*z))).sum::<f64>() * h * h;
        let smoothed: Vec<Point> = net
            .vertices
            .iter()
            .map(|&p| {
                stencil
                    .iter()
                    .fold(Point::zero(), |acc, (o, w)| acc + g.at(p + *o) * *w)
            })
            .collect();
        let rhs: f64 = net
            .edges
            .iter()
            .map(|e| {
                let (a, b) = (net.vertices[e.a], net.vertices[e.b]);
                let tau = (b - a).normalized().unwrap();
                tau.dot(smoothed[e.b] - smoothed[e.a])
            })
            .sum();
        worst = worst.max((lhs - rhs).abs() / rhs.abs().max(lhs.abs()));
    }
    check(worst <= 1e-4, format!("duality relative error {worst:e}"))?;
    within_time(start, Duration::from_secs(10))?;
    Ok(format!(
        "|∫Φ − 1| ≤ {worst_mass:.1e}, duality error ≤ {worst:.1e} over 20 fields, {:.1?}",
        start.elapsed()
    ))
}

// 2. Curvature consistency

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let net = fixtures::circle(Point::zero(), 1.0, 720, 2, 1);
    let v = Varifold1::from_network(&net);
    let mut errors = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let k = Kernel::with_default_quadrature(eps).unwrap();
        let h = Mollifier::new(&k, &v).h_pointwise_many(&net.vertices);
        let err = net
            .vertices
            .iter()
            .zip(&h)
            .map(|(z, h)| (*h + *z).norm())
            .fold(0.0, f64::max);
        errors.push(err);
    }
    check(
        errors[1] <= 0.1,
        format!("error at ε = 0.05 is {:.3e}", errors[1]),
    )?;
    check(
        errors[0] > errors[1] && errors[1] > errors[2],
        format!("errors not decreasing: {errors:?}"),
    )?;
    within_time(start, Duration::from_secs(30))?;
    Ok(format!(
        "max |h + ν| at ε = 0.1, 0.05, 0.025: {:.2e}, {:.2e}, {:.2e}",
        errors[0], errors[1], errors[2]
    ))
}

// 3. Shrinking circle

fn criterion_3(runs: &mut Runs) -> Outcome {
    let start = Instant::now();
    let circle = bundled("circle").unwrap().network;
    let cfg = FlowConfig {
        diagnostics_every: 0,
        ..FlowConfig::default()
    };
    let coarse = run(&circle, &cfg, 0.6, &mut NullSink).map_err(|e| e.to_string())?;
    let coarse = runs.record("circle to extinction", coarse, None);
    let fine_cfg = FlowConfig {
        dt: cfg.dt / 2.0,
        l_min: cfg.l_min / 2.0,
        l_max: cfg.l_max / 2.0,
        ..cfg
    };
    let fine = run(&circle, &fine_cfg, 0.6, &mut NullSink).map_err(|e| e.to_string())?;
    let fine = runs.record("circle to extinction, refined", fine, None);
    let t0 = coarse
        .extinction_time
        .ok_or("no extinction at default config")?;
    let t1 = fine.extinction_time.ok_or("no extinction when refined")?;
    let oracle = 0.5;
    check(
        (t0 - oracle).abs() <= 0.05 * oracle,
        format!("extinction {t0} vs {oracle}"),
    )?;
    check(
        (t1 - t0).abs() < 0.02 * t0,
        format!("refinement moved extinction {t0} → {t1}"),
    )?;
    within_time(start, Duration::from_secs(120))?;
    Ok(format!(
        "extinction {t0:.4} (oracle 0.5), refined {t1:.4}, {:.1?}",
        start.elapsed()
    ))
}

// 4. Stationarity

fn criterion_4(runs: &mut Runs) -> Outcome {
    let cfg = FlowConfig {
        diagnostics_every: 0,
        ..FlowConfig::default()
    };
    let mut details = Vec::new();
    for (name, net) in [
        ("triple junction", bundled("triple").unwrap().network),
        ("straight line", fixtures::straight_line(2.0, 140)),
    ] {
        let s = run(&net, &cfg, 0.1, &mut NullSink).map_err(|e| e.to_string())?;
        let s = runs.record(name, s, None);
        let d = drift(&net, &s.final_network);
        check(d <= 1e-3, format!("{name} drifted {d:e}"))?;
        details.push(format!("{name} drift {d:.1e}"));
    }
    Ok(details.join(", "))
}

// 5. Cross instability (also feeds 6, 7 and 8)

fn census_is(net: &Net, want: &[(usize, usize)]) -> bool {
    net.junction_census() == want.iter().copied().collect::<BTreeMap<_, _>>()
}

fn criterion_5(runs: &mut Runs) -> Outcome {
    let cross = bundled("cross90").unwrap().network;
    let cfg = FlowConfig {
        frame_every: 10,
        ..FlowConfig::default()
    };
    let (swept, _) =
        deformation_sweep(&cross, &cfg.guard(), cfg.r_def).map_err(|e| e.to_string())?;
    let steiner = 2f64.sqrt() * (1.0 + 3f64.sqrt());
    check(
        census_is(&swept, &[(3, 2)]),
        format!("first sweep census {:?}", swept.junction_census()),
    )?;
    let len = swept.total_length();
    check(
        len <= steiner + 0.01,
        format!("length after sweep {len} > {}", steiner + 0.01),
    )?;

    let mut sink = MemorySink::default();
    let s = run(&cross, &cfg, 0.05, &mut sink).map_err(|e| e.to_string())?;
    check(
        census_is(&sink.frames[1].1, &[(3, 2)]),
        "cross did not split in the first step",
    )?;
    let mut classified = 0;
    for (t, net) in sink.frames.iter().skip(1) {
        let deg = net.degrees();
        for v in (0..net.vertices.len()).filter(|&v| deg[v] >= 3 && !net.is_frozen(v)) {
            let c = classify_junction(net, v, 5.0).map_err(|e| e.to_string())?;
            check(
                c.kind == JunctionKind::Triple120,
                format!(
                    "t = {t}: vertex {v} is {} with angles {:?}",
                    c.kind, c.angles
                ),
            )?;
            classified += 1;
        }
    }
    let frac = s.flagged_fraction();
    check(frac <= 0.05, format!("flagged fraction {frac}"))?;
    let s = runs.record("cross", s, Some(sink));
    Ok(format!(
        "length after first sweep {len:.4} ≤ {:.4}, {classified} junctions triple_120, flagged {}/{}",
        steiner + 0.01,
        s.flagged_frames,
        s.frames
    ))
}

// 6. Brakke residuals

fn criterion_6(runs: &mut Runs) -> Outcome {
    let cfg = FlowConfig {
        frame_every: 10,
        ..FlowConfig::default()
    };
    let circle = bundled("circle").unwrap().network;
    let mut sink = MemorySink::default();
    let s = run(&circle, &cfg, 0.1, &mut sink).map_err(|e| e.to_string())?;
    let reports = sink.reports.clone();
    runs.record("circle", s, Some(sink));
    let cross_max = runs
        .all
        .iter()
        .find(|r| r.0 == "cross")
        .and_then(|r| r.1.max_residual)
        .ok_or("cross run has no residuals")?;
    let sampled = reports
        .iter()
        .filter(|r| !r.brakke_residuals.is_empty())
        .count();
    check(sampled > 0, "circle run has no residuals")?;
    let circle_max = reports
        .iter()
        .filter_map(|r| r.max_residual())
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = cfg.residual_tol;
    check(circle_max <= tol, format!("circle residual {circle_max}"))?;
    check(cross_max <= tol, format!("cross residual {cross_max}"))?;

    let before = fixtures::circle(Point::zero(), 1.0, 720, 2, 1);
    let mut after = before.clone();
    for p in &mut after.vertices {
        *p = *p * (1.0 + cfg.dt);
    }
    let k = Kernel::with_default_quadrature(cfg.epsilon).unwrap();
    let bank = TestFunctionBank::for_network(&before, cfg.j, cfg.test_bank_size);
    let anti = check_discrete_brakke(&before, &after, cfg.dt, &k, &bank)
        .into_iter()
        .map(|r| r.1)
        .fold(f64::NEG_INFINITY, f64::max);
    check(
        anti > 0.0,
        format!("anti-flow pair residual {anti} not positive"),
    )?;
    Ok(format!(
        "max residual circle {circle_max:.3} ({sampled} samples), cross {cross_max:.3}; anti-flow pair {anti:.3} > 0"
    ))
}

// 7. Mass budget

fn criterion_7(runs: &mut Runs) -> Outcome {
    let cfg = FlowConfig {
        diagnostics_every: 0,
        ..FlowConfig::default()
    };
    for name in ["theta", "hexagon6", "two-circles"] {
        let s = bundled(name).unwrap();
        let mut sink = MemorySink::default();
        let sum =
            run(&s.network, &cfg, 100.0 * cfg.dt, &mut sink).map_err(|e| format!("{name}: {e}"))?;
        runs.record(name, sum, Some(sink));
    }
    let mut worst = (String::new(), f64::NEG_INFINITY);
    for (name, s) in &runs.all {
        if s.max_mass_excess > worst.1 {
            worst = (name.clone(), s.max_mass_excess);
        }
    }
    check(
        worst.1 <= 1e-2,
        format!("{} exceeds the budget by {}", worst.0, worst.1),
    )?;
    Ok(format!(
        "{} runs, largest excess {:.3e} ({})",
        runs.all.len(),
        worst.1,
        worst.0
    ))
}

// 8. Density bounds

fn criterion_8(runs: &Runs) -> Outcome {
    let cfg = FlowConfig::default();
    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    let mut lowest = f64::INFINITY;
    let mut frames = 0;
    for (name, list) in &runs.frames {
        for (t, net) in list.iter().skip(1) {
            if net.edges.is_empty() {
                continue;
            }
            frames += 1;
            let v = Varifold1::from_network(net);
            for _ in 0..10 {
                let e = rng.gen_range(0..net.edges.len());
                let (a, b) = net.edge_points(e);
                let z = a.lerp(b, rng.gen_range(0.0..1.0));
                let r = rng.gen_range(cfg.l_max..5.0 * cfg.l_max);
                let d = density_ratio(&v, z, r);
                check(
                    d >= 0.125,
                    format!("{name} at t = {t}: density {d} at {z:?}, r = {r}"),
                )?;
                lowest = lowest.min(d);
            }
        }
    }
    check(frames > 0, "no frames recorded")?;

    let deg = std::f64::consts::PI / 180.0;
    let cones: Vec<(&str, Net)> = vec![
        ("line", fixtures::straight_line(2.0, 40)),
        ("triple", fixtures::triple_junction(Point::zero(), 1.0, 10)),
        ("cross", fixtures::cross(Point::zero(), 1.0, 10)),
        (
            "two_lines_60",
            fixtures::star(
                Point::zero(),
                &[0.0, 60.0 * deg, 180.0 * deg, 240.0 * deg],
                1.0,
                10,
            ),
        ),
        (
            "three_lines_60",
            fixtures::star(
                Point::zero(),
                &(0..6).map(|k| 60.0 * k as f64 * deg).collect::<Vec<_>>(),
                1.0,
                10,
            ),
        ),
    ];
    let radii = [0.05, 0.1, 0.25, 0.5, 0.9];
    for (name, net) in &cones {
        let v = Varifold1::from_network(net);
        for &r in &radii {
            let m = mass_in_ball(&v, Point::zero(), r);
            check(
                m <= 2.0 * std::f64::consts::PI * r,
                format!("{name}: mass {m} in B_{r}"),
            )?;
        }
    }
    let v = Varifold1::from_network(&cones[1].1);
    for &r in &radii {
        let d = density_ratio(&v, Point::zero(), r);
        check(
            (d - 1.5).abs() <= 1e-12,
            format!("triple density {d} at r = {r}"),
        )?;
    }
    Ok(format!("{frames} frames, lowest sampled density {lowest:.3}; cone upper bounds hold; triple density 3/2"))
}

// 9. Graph decomposition

fn criterion_9() -> Outcome {
    let cfg = AnalyzerConfig::default();
    let net = fixtures::two_sheets(0.05, 3.0, 300);
    let patch =
        graph_decomposition(&net, Point::zero(), 1.0, Some(2), &cfg).map_err(|e| e.to_string())?;
    check(patch.nu == 2, format!("ν = {}", patch.nu))?;
    let rel = (patch.sheet_mass - patch.mass_in_ball).abs() / patch.mass_in_ball;
    check(rel <= 1e-3, format!("sheet length mismatch {rel:e}"))?;

    let f = |x: f64| 0.05 * x.sin();
    let sine = fixtures::graph_of(f, -3.0, 3.0, 600);
    let patch =
        graph_decomposition(&sine, Point::zero(), 1.0, Some(1), &cfg).map_err(|e| e.to_string())?;
    let oracle = simpson(
        |x| {
            let d1 = 0.05 * x.cos();
            let d2 = -0.05 * x.sin();
            d2 * d2 / (1.0 + d1 * d1).powf(2.5)
        },
        -1.0,
        1.0,
        2000,
    );
    let w22 = patch.w22_estimates[0];
    let err = (w22 - oracle).abs() / oracle;
    check(err <= 0.1, format!("W22 energy {w22} vs oracle {oracle}"))?;

    let corner = Sheet::from_fn(-1.0, 1.0, 41, |x: f64| if x < 0.0 { 0.0 } else { 0.5 * x });
    let slope = slope_variation_check(&corner, 0.0, 1.0, 0.01).map_err(|e| e.to_string())?;
    check(!slope.pass, "corner passed the slope check")?;
    let weak = w22_weak_derivative_check(&corner, 0.0, 1.0).map_err(|e| e.to_string())?;
    check(!weak.pass, "corner passed the weak derivative check")?;
    Ok(format!("two sheets ν = 2 (mass error {rel:.1e}); sine W22 {w22:.5} vs {oracle:.5}; corner rejected by both checks"))
}

// 10. Taxonomy soundness

fn criterion_10() -> Outcome {
    let deg = std::f64::consts::PI / 180.0;
    let radii = [0.4, 0.2, 0.1];
    let cases: Vec<(&str, Net, Point, ConeLabel)> = vec![
        (
            "circle",
            fixtures::circle(Point::zero(), 1.0, 2000, 2, 1),
            Point::new(1.0, 0.0),
            ConeLabel::Line,
        ),
        (
            "triple",
            fixtures::triple_junction(Point::zero(), 1.0, 10),
            Point::zero(),
            ConeLabel::TripleJunction,
        ),
        (
            "two_lines_60",
            fixtures::star(
                Point::zero(),
                &[0.0, 60.0 * deg, 180.0 * deg, 240.0 * deg],
                1.0,
                10,
            ),
            Point::zero(),
            ConeLabel::TwoLines60,
        ),
        (
            "three_lines_60",
            fixtures::star(
                Point::zero(),
                &(0..6)
                    .map(|k| (60.0 * k as f64 + 15.0) * deg)
                    .collect::<Vec<_>>(),
                1.0,
                10,
            ),
            Point::zero(),
            ConeLabel::ThreeLines60,
        ),
        (
            "cross",
            fixtures::cross(Point::zero(), 1.0, 10),
            Point::zero(),
            ConeLabel::Other,
        ),
    ];
    for (name, net, z, want) in &cases {
        let support = Varifold1::from_network(net).sample(0.002);
        let fit = tangent_cone(&support, *z, &radii).map_err(|e| e.to_string())?;
        check(
            fit.label == *want,
            format!(
                "{name}: {} instead of {}",
                fit.label.as_str(),
                want.as_str()
            ),
        )?;
    }
    Ok("line, triple_junction, two_lines_60, three_lines_60 recognised; cross is other".into())
}

fn main() -> ExitCode {
    let mut runs = Runs::default();
    let mut failed = 0;
    let mut report = |n: usize, title: &str, outcome: std::thread::Result<Outcome>| {
        let (ok, detail) = match outcome {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(p) => (
                false,
                format!(
                    "panicked: {}",
                    p.downcast_ref::<String>()
                        .cloned()
                        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_default()
                ),
            ),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {n:>2} {title}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    };
    report(1, "mollifier fidelity", catch_unwind(criterion_1));
    report(2, "curvature consistency", catch_unwind(criterion_2));
    report(
        3,
        "shrinking circle",
        catch_unwind(AssertUnwindSafe(|| criterion_3(&mut runs))),
    );
    report(
        4,
        "stationarity",
        catch_unwind(AssertUnwindSafe(|| criterion_4(&mut runs))),
    );
    report(
        5,
        "cross instability",
        catch_unwind(AssertUnwindSafe(|| criterion_5(&mut runs))),
    );
    report(
        6,
        "brakke residuals",
        catch_unwind(AssertUnwindSafe(|| criterion_6(&mut runs))),
    );
    report(
        7,
        "mass budget",
        catch_unwind(AssertUnwindSafe(|| criterion_7(&mut runs))),
    );
    report(
        8,
        "density bounds",
        catch_unwind(AssertUnwindSafe(|| criterion_8(&runs))),
    );
    report(9, "graph decomposition", catch_unwind(criterion_9));
    report(10, "taxonomy soundness", catch_unwind(criterion_10));
    if failed == 0 {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 10 criteria fail");
        ExitCode::FAILURE
    }
}
