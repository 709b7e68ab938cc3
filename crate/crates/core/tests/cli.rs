use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use brakkenet::io::bundled_text;

fn brakkenet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brakkenet"))
        .args(args)
        .env("BRAKKENET_THREADS", "1")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn exit_codes() {
    let ok = brakkenet(&["validate", "cross90"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(text(&ok).starts_with("ok: cross90"));

    assert_eq!(code(&brakkenet(&["frobnicate"])), 64);
    assert_eq!(code(&brakkenet(&["run"])), 64);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, bundled_text("triple").unwrap().replace("\"regions\":3", "\"regions\":2")).unwrap();
    assert_eq!(code(&brakkenet(&["validate", bad.to_str().unwrap()])), 2);
    let garbled = dir.path().join("garbled.json");
    fs::write(&garbled, "{\"schema\":1,").unwrap();
    assert_eq!(code(&brakkenet(&["validate", garbled.to_str().unwrap()])), 2);

    let out = dir.path().join("out");
    let neg = brakkenet(&["demo", "triple", "--T", "0.01", "--dt=-1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&neg), 2);
}

#[test]
fn shrinking_circle_goes_extinct() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("circle");
    let run = brakkenet(&["run", "circle", "--T", "0.6", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    assert!(!text(&run).contains("extinction time: none"));

    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,mass,deficit,energy,max_residual,junctions_deg3,junctions_deg4plus,flagged"
    );
    let last: f64 = lines.last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(last < 0.005, "{last}");

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["extinction_time"].as_f64().unwrap() <= 0.6);
}

#[test]
fn triple_demo_analyzes_as_balanced_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let run = brakkenet(&["demo", "triple", "--T", "0.01", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    }
    assert_eq!(read_tree(&a), read_tree(&b));

    let analyze = brakkenet(&["analyze", a.to_str().unwrap(), "--angles"]);
    assert_eq!(code(&analyze), 0);
    let csv = text(&analyze);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "frame,t,vertex,x,y,degree,kind,angles,k_r,k_l");
    let kinds: Vec<&str> = lines.map(|l| l.split(',').nth(6).unwrap()).collect();
    assert!(!kinds.is_empty());
    assert!(kinds.iter().all(|&k| k == "triple_120"), "{kinds:?}");
}
