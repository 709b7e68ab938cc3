use std::path::Path;

use brakkenet::io::{
    bundled, bundled_source, bundled_text, parse_scenario, scenario_to_json, BUNDLED,
};
use brakkenet::flow::{run, MemorySink};
use brakkenet::{validate, Network, Point};

/// Bundled files are the serialized fixture networks. Set
/// `BRAKKENET_BLESS=1` to regenerate them.
#[test]
fn bundled_files_are_golden() {
    let bless = std::env::var_os("BRAKKENET_BLESS").is_some();
    for name in BUNDLED {
        let expected = scenario_to_json(&bundled_source(name).unwrap());
        if bless {
            let path = Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("scenarios")
                .join(format!("{name}.json"));
            std::fs::write(path, &expected).unwrap();
        } else {
            assert_eq!(bundled_text(name).unwrap(), expected, "{name} is stale");
        }
    }
}

#[test]
fn bundled_scenarios_are_valid() {
    for name in BUNDLED {
        let s = bundled(name).unwrap();
        assert!(validate(&s.network).is_ok(), "{name}");
        assert!(
            s.network.vertices.iter().all(|p| s.bbox.contains(*p)),
            "{name}"
        );
        let again = parse_scenario(&scenario_to_json(&s)).unwrap();
        assert_eq!(again, s, "{name}");
    }
}

fn frozen_points(net: &Network) -> Vec<Point> {
    net.frozen.iter().map(|&v| net.vertices[v]).collect()
}

#[test]
fn bundled_scenarios_flow_for_a_hundred_steps() {
    for name in BUNDLED {
        let s = bundled(name).unwrap();
        let cfg = &s.flow;
        let mut sink = MemorySink { frames: Vec::new(), reports: Vec::new() };
        let summary = run(&s.network, cfg, 100.0 * cfg.dt, &mut sink).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(summary.energy_deficit_budget.is_finite(), "{name}");
        assert!(sink.reports.len() >= 100, "{name}: {} steps", sink.reports.len());
        let frozen = frozen_points(&s.network);
        for (t, net) in &sink.frames {
            assert_eq!(frozen_points(net), frozen, "{name} at t = {t}");
            assert!(net.vertices.iter().all(|p| s.bbox.contains(*p)), "{name} at t = {t}");
        }
        let growth = cfg.epsilon.powf(0.125);
        let mut prev = s.network.total_length();
        for r in &sink.reports {
            assert!(r.mass_total <= prev + growth * r.dt + cfg.residual_tol, "{name} at t = {}", r.t);
            prev = r.mass_total;
        }
    }
}
