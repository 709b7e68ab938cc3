//! Scenario documents, frame and metrics CSV files, and SVG export.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    classify_junction, graph_decomposition, tangent_cone, AnalyzerConfig, JunctionKind,
};
use crate::fixtures;
use crate::flow::{frame_flagged, FlowConfig, FrameSink, StepReport};
use crate::geometry::{Point, Rect};
use crate::network::{validate, Label, Network, ValidationReport};
use crate::varifold::Varifold1;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
    #[error("invalid network: {0}")]
    Invalid(ValidationReport),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("unknown bundled scenario '{0}'")]
    UnknownScenario(String),
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
}

impl IoError {
    /// Whether the error means the input was rejected, as opposed to an
    /// environmental failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, IoError::File { .. })
    }
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    schema: u32,
    name: String,
    regions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bbox: Option<[f64; 4]>,
    vertices: Vec<[f64; 2]>,
    edges: Vec<[u64; 4]>,
    #[serde(default)]
    frozen: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flow: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    analyzer: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub network: Network<f64>,
    pub bbox: Rect<f64>,
    pub flow: FlowConfig,
    pub analyzer: AnalyzerConfig,
}

impl Scenario {
    /// Scenario around `network` with default configuration and a bounding
    /// box 10% wider than the network.
    pub fn new(name: &str, network: Network<f64>) -> Self {
        let bb = network
            .bbox()
            .unwrap_or(Rect::new(Point::zero(), Point::zero()));
        let pad = 0.1 * bb.width().max(bb.height()).max(1.0);
        Scenario {
            name: name.into(),
            bbox: bb.expanded(pad),
            network,
            flow: FlowConfig::default(),
            analyzer: AnalyzerConfig::default(),
        }
    }
}

fn overrides<T: Serialize + for<'de> Deserialize<'de> + Default>(
    v: Option<serde_json::Value>,
    key: &str,
) -> Result<T, IoError> {
    match v {
        None => Ok(T::default()),
        Some(v) => serde_path_to_error::deserialize(v).map_err(|e| IoError::Schema {
            path: format!("{key}.{}", e.path()),
            message: e.inner().to_string(),
        }),
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ScenarioDoc = serde_path_to_error::deserialize(de).map_err(|e| IoError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if doc.schema != SCHEMA_VERSION {
        return Err(IoError::Version(doc.schema));
    }
    let mut net = Network::new(doc.regions);
    for p in &doc.vertices {
        net.add_vertex(Point::new(p[0], p[1]));
    }
    for (i, e) in doc.edges.iter().enumerate() {
        let lab = |x: u64| {
            Label::try_from(x)
                .map_err(|_| IoError::Scenario(format!("edges[{i}]: label {x} out of range")))
        };
        net.add_edge(e[0] as usize, e[1] as usize, lab(e[2])?, lab(e[3])?);
    }
    for &v in &doc.frozen {
        if v >= net.vertices.len() {
            return Err(IoError::Scenario(format!(
                "frozen vertex {v} does not exist"
            )));
        }
        net.frozen.insert(v);
    }
    let report = validate(&net);
    if !report.is_ok() {
        return Err(IoError::Invalid(report));
    }
    let used: BTreeSet<Label> = net.edges.iter().flat_map(|e| [e.left, e.right]).collect();
    if used.len() != doc.regions {
        return Err(IoError::Scenario(format!(
            "{} labels used but regions = {}",
            used.len(),
            doc.regions
        )));
    }
    let bbox = match doc.bbox {
        Some(b) => Rect::new(Point::new(b[0], b[1]), Point::new(b[2], b[3])),
        None => Scenario::new(&doc.name, net.clone()).bbox,
    };
    if net.vertices.iter().any(|p| !bbox.contains(*p)) {
        return Err(IoError::Scenario("vertex outside the bounding box".into()));
    }
    let flow: FlowConfig = overrides(doc.flow, "flow")?;
    flow.validate()
        .map_err(|e| IoError::Scenario(e.to_string()))?;
    let analyzer: AnalyzerConfig = overrides(doc.analyzer, "analyzer")?;
    Ok(Scenario {
        name: doc.name,
        network: net,
        bbox,
        flow,
        analyzer,
    })
}

/// Serializes a scenario; configuration blocks are written only when they
/// differ from the defaults.
pub fn scenario_to_json(s: &Scenario) -> String {
    let doc = ScenarioDoc {
        schema: SCHEMA_VERSION,
        name: s.name.clone(),
        regions: s.network.regions,
        bbox: Some([s.bbox.min.x, s.bbox.min.y, s.bbox.max.x, s.bbox.max.y]),
        vertices: s.network.vertices.iter().map(|p| [p.x, p.y]).collect(),
        edges: s
            .network
            .edges
            .iter()
            .map(|e| [e.a as u64, e.b as u64, e.left as u64, e.right as u64])
            .collect(),
        frozen: s.network.frozen.iter().copied().collect(),
        flow: (s.flow != FlowConfig::default())
            .then(|| serde_json::to_value(&s.flow).expect("config serializes")),
        analyzer: (s.analyzer != AnalyzerConfig::default())
            .then(|| serde_json::to_value(&s.analyzer).expect("config serializes")),
    };
    let mut out = serde_json::to_string(&doc).expect("scenario serializes");
    out.push('\n');
    out
}

pub const BUNDLED: [&str; 6] = [
    "cross90",
    "circle",
    "triple",
    "theta",
    "hexagon6",
    "two-circles",
];

pub fn bundled_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "cross90" => include_str!("../scenarios/cross90.json"),
        "circle" => include_str!("../scenarios/circle.json"),
        "triple" => include_str!("../scenarios/triple.json"),
        "theta" => include_str!("../scenarios/theta.json"),
        "hexagon6" => include_str!("../scenarios/hexagon6.json"),
        "two-circles" => include_str!("../scenarios/two-circles.json"),
        _ => return None,
    })
}

/// The networks the bundled scenario files are generated from.
pub fn bundled_source(name: &str) -> Option<Scenario> {
    let net = match name {
        "cross90" => fixtures::cross(Point::zero(), 1.0, 70),
        "circle" => fixtures::circle(Point::zero(), 1.0, 720, 2, 1),
        "triple" => fixtures::triple_junction(Point::zero(), 1.0, 70),
        "theta" => fixtures::theta(0.5, 0.4, 100),
        "hexagon6" => fixtures::hexagon6(0.5, 1.5, 40),
        "two-circles" => fixtures::two_circles(0.8, 0.5, 240),
        _ => return None,
    };
    Some(Scenario::new(name, net))
}

pub fn bundled(name: &str) -> Result<Scenario, IoError> {
    parse_scenario(bundled_text(name).ok_or_else(|| IoError::UnknownScenario(name.into()))?)
}

/// Reads `arg` as a file when it exists, otherwise as a bundled name
/// (with or without a `.json` suffix).
pub fn load_scenario(arg: &str) -> Result<Scenario, IoError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(file_err(path))?;
        return parse_scenario(&text);
    }
    let stem = path.file_name().and_then(|s| s.to_str()).unwrap_or(arg);
    bundled(stem.strip_suffix(".json").unwrap_or(stem))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameEdge {
    pub a: Point<f64>,
    pub b: Point<f64>,
    pub left: Label,
    pub right: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub edges: Vec<FrameEdge>,
}

pub const FRAME_HEADER: &str = "t,ax,ay,bx,by,left,right";

impl Frame {
    pub fn from_network(t: f64, net: &Network<f64>) -> Self {
        let edges = net
            .edges
            .iter()
            .map(|e| FrameEdge {
                a: net.vertices[e.a],
                b: net.vertices[e.b],
                left: e.left,
                right: e.right,
            })
            .collect();
        Frame { t, edges }
    }

    /// Rebuilds a network by merging bit-identical endpoints. Degree-one
    /// vertices are marked frozen.
    pub fn to_network(&self) -> Network<f64> {
        let regions = self
            .edges
            .iter()
            .map(|e| e.left.max(e.right))
            .max()
            .unwrap_or(0) as usize;
        let mut net = Network::new(regions);
        let mut ids: HashMap<(u64, u64), usize> = HashMap::new();
        let mut id = |net: &mut Network<f64>, p: Point<f64>| {
            *ids.entry((p.x.to_bits(), p.y.to_bits()))
                .or_insert_with(|| net.add_vertex(p))
        };
        for e in &self.edges {
            let a = id(&mut net, e.a);
            let b = id(&mut net, e.b);
            net.add_edge(a, b, e.left, e.right);
        }
        let deg = net.degrees();
        net.frozen = (0..net.vertices.len()).filter(|&v| deg[v] == 1).collect();
        net
    }

    pub fn census(&self) -> BTreeMap<usize, usize> {
        self.to_network().junction_census()
    }
}

pub fn frame_to_csv(frame: &Frame) -> String {
    let mut out = String::with_capacity(64 * (frame.edges.len() + 1));
    out.push_str(FRAME_HEADER);
    out.push('\n');
    for e in &frame.edges {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            frame.t, e.a.x, e.a.y, e.b.x, e.b.y, e.left, e.right
        );
    }
    out
}

pub fn parse_frame_csv(text: &str) -> Result<Frame, IoError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == FRAME_HEADER => {}
        _ => {
            return Err(IoError::Csv {
                line: 1,
                message: format!("expected header '{FRAME_HEADER}'"),
            })
        }
    }
    let mut t = None;
    let mut edges = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let bad = |m: String| IoError::Csv {
            line: i + 1,
            message: m,
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad(format!("expected 7 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("'{s}': {e}")));
        let lab = |s: &str| s.parse::<Label>().map_err(|e| bad(format!("'{s}': {e}")));
        let row_t = num(f[0])?;
        if *t.get_or_insert(row_t) != row_t {
            return Err(bad("time differs between rows".into()));
        }
        edges.push(FrameEdge {
            a: Point::new(num(f[1])?, num(f[2])?),
            b: Point::new(num(f[3])?, num(f[4])?),
            left: lab(f[5])?,
            right: lab(f[6])?,
        });
    }
    Ok(Frame {
        t: t.unwrap_or(0.0),
        edges,
    })
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn pair_color(l: Label, r: Label) -> &'static str {
    let (a, b) = (l.min(r) as usize, l.max(r) as usize);
    PALETTE[(a * 7 + b * 3) % PALETTE.len()]
}

/// SVG 1.1 drawing: one polyline per edge colored by its region pair, and
/// a circle for every unfrozen vertex of degree at least three, classed by
/// its junction kind.
pub fn frame_to_svg(net: &Network<f64>, t: f64, bbox: &Rect<f64>, angle_tol: f64) -> String {
    let w = bbox.width().max(1e-9);
    let h = bbox.height().max(1e-9);
    let stroke = 0.003 * w.max(h);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}" width="800" height="{}">"#,
        bbox.min.x,
        -bbox.max.y,
        w,
        h,
        (800.0 * h / w).round()
    );
    let _ = writeln!(out, "<title>t = {t}</title>");
    let _ = writeln!(
        out,
        r#"<g transform="scale(1,-1)" fill="none" stroke-width="{stroke}">"#
    );
    for e in &net.edges {
        let (a, b) = (net.vertices[e.a], net.vertices[e.b]);
        let _ = writeln!(
            out,
            r#"<polyline points="{},{} {},{}" stroke="{}"/>"#,
            a.x,
            a.y,
            b.x,
            b.y,
            pair_color(e.left, e.right)
        );
    }
    let deg = net.degrees();
    for v in 0..net.vertices.len() {
        if deg[v] < 3 || net.is_frozen(v) {
            continue;
        }
        let kind = classify_junction(net, v, angle_tol)
            .map(|c| c.kind)
            .unwrap_or(JunctionKind::Unstable);
        let p = net.vertices[v];
        let _ = writeln!(
            out,
            r#"<circle class="junction {kind}" cx="{}" cy="{}" r="{}" fill="black"/>"#,
            p.x,
            p.y,
            3.0 * stroke
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub const METRICS_HEADER: &str =
    "t,mass,deficit,energy,max_residual,junctions_deg3,junctions_deg4plus,flagged";

pub fn metrics_row(r: &StepReport<f64>, flagged: bool) -> String {
    let deg3 = r.junction_census.get(&3).copied().unwrap_or(0);
    let deg4: usize = r
        .junction_census
        .iter()
        .filter(|(d, _)| **d >= 4)
        .map(|(_, n)| n)
        .sum();
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{}",
        r.t,
        r.mass_total,
        r.deficit,
        opt(r.energy),
        opt(r.max_residual()),
        deg3,
        deg4,
        flagged as u8
    )
}

/// Writes `frames/frame_NNNNNN.{csv,svg}` and `metrics.csv` under a directory.
pub struct DirSink {
    dir: PathBuf,
    bbox: Rect<f64>,
    angle_tol: f64,
    frames: usize,
    metrics: String,
}

impl DirSink {
    pub fn create(dir: &Path, bbox: Rect<f64>, angle_tol: f64) -> Result<Self, IoError> {
        let frames = dir.join("frames");
        fs::create_dir_all(&frames).map_err(file_err(&frames))?;
        let mut metrics = String::from(METRICS_HEADER);
        metrics.push('\n');
        Ok(DirSink {
            dir: dir.to_path_buf(),
            bbox,
            angle_tol,
            frames: 0,
            metrics,
        })
    }

    pub fn frames_written(&self) -> usize {
        self.frames
    }

    /// Writes `metrics.csv`; call once the run is over.
    pub fn finish(&self) -> Result<(), IoError> {
        let path = self.dir.join("metrics.csv");
        fs::write(&path, &self.metrics).map_err(file_err(&path))
    }
}

impl FrameSink<f64> for DirSink {
    fn frame(&mut self, t: f64, net: &Network<f64>) -> Result<(), String> {
        let base = self
            .dir
            .join("frames")
            .join(format!("frame_{:06}", self.frames));
        fs::write(
            base.with_extension("csv"),
            frame_to_csv(&Frame::from_network(t, net)),
        )
        .map_err(|e| e.to_string())?;
        fs::write(
            base.with_extension("svg"),
            frame_to_svg(net, t, &self.bbox, self.angle_tol),
        )
        .map_err(|e| e.to_string())?;
        self.frames += 1;
        Ok(())
    }

    fn step(&mut self, report: &StepReport<f64>, net: &Network<f64>) -> Result<(), String> {
        let flagged = frame_flagged(net, self.angle_tol);
        self.metrics.push_str(&metrics_row(report, flagged));
        self.metrics.push('\n');
        Ok(())
    }
}

/// Sorted frame CSV files in `dir` or `dir/frames`.
pub fn frame_files(dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    let sub = dir.join("frames");
    let base = if sub.is_dir() { sub } else { dir.to_path_buf() };
    let mut out: Vec<PathBuf> = fs::read_dir(&base)
        .map_err(file_err(&base))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().map_or(false, |x| x == "csv")
                && p.file_name()
                    .map_or(false, |n| n.to_string_lossy().starts_with("frame_"))
        })
        .collect();
    out.sort();
    Ok(out)
}

pub fn read_frame(path: &Path) -> Result<Frame, IoError> {
    parse_frame_csv(&fs::read_to_string(path).map_err(file_err(path))?)
}

pub const ANGLES_HEADER: &str = "frame,t,vertex,x,y,degree,kind,angles,k_r,k_l";
pub const CONES_HEADER: &str = "frame,t,vertex,x,y,label,half_lines,density,residual,stable";
pub const GRAPHS_HEADER: &str =
    "frame,t,cx,cy,r,status,nu,scaled_energy,mass_in_ball,sheet_mass,max_w22";

fn junctions(net: &Network<f64>) -> Vec<usize> {
    let deg = net.degrees();
    (0..net.vertices.len())
        .filter(|&v| deg[v] >= 3 && !net.is_frozen(v))
        .collect()
}

fn csv_text(e: &dyn std::fmt::Display) -> String {
    e.to_string().replace(',', ";")
}

fn join<T: std::fmt::Display>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn report(
    header: &str,
    frames: &[Frame],
    row: impl Fn(usize, &Frame, &Network<f64>) -> Vec<String> + Sync,
) -> String {
    let rows: Vec<Vec<String>> = frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| row(i, f, &f.to_network()))
        .collect();
    let mut out = String::from(header);
    out.push('\n');
    for line in rows.into_iter().flatten() {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// One row per unfrozen junction of degree at least three.
pub fn angles_csv(frames: &[Frame], angle_tol: f64) -> String {
    report(ANGLES_HEADER, frames, |i, f, net| {
        let deg = net.degrees();
        junctions(net)
            .into_iter()
            .map(|v| {
                let p = net.vertices[v];
                match classify_junction(net, v, angle_tol) {
                    Ok(c) => format!(
                        "{i},{},{v},{},{},{},{},{},{},{}",
                        f.t,
                        p.x,
                        p.y,
                        deg[v],
                        c.kind,
                        join(c.angles),
                        c.k_r,
                        c.k_l
                    ),
                    Err(e) => format!(
                        "{i},{},{v},{},{},{},error: {},,,",
                        f.t,
                        p.x,
                        p.y,
                        deg[v],
                        csv_text(&e)
                    ),
                }
            })
            .collect()
    })
}

/// Tangent-cone fits at every junction over `radii`.
pub fn cones_csv(frames: &[Frame], radii: &[f64], sample: f64) -> String {
    report(CONES_HEADER, frames, |i, f, net| {
        let support = Varifold1::from_network(net).sample(sample);
        junctions(net)
            .into_iter()
            .map(|v| {
                let p = net.vertices[v];
                match tangent_cone(&support, p, radii) {
                    Ok(c) => format!(
                        "{i},{},{v},{},{},{},{},{},{},{}",
                        f.t,
                        p.x,
                        p.y,
                        c.label.as_str(),
                        join(c.half_lines.iter().map(|h| format!("{}x{}", h.0, h.1))),
                        c.density(),
                        c.residual,
                        c.stable
                    ),
                    Err(e) => format!(
                        "{i},{},{v},{},{},error: {},,,,",
                        f.t,
                        p.x,
                        p.y,
                        csv_text(&e)
                    ),
                }
            })
            .collect()
    })
}

/// Graph decomposition of every frame inside `B_r(center)`.
pub fn graphs_csv(frames: &[Frame], center: Point<f64>, r: f64, cfg: &AnalyzerConfig) -> String {
    report(GRAPHS_HEADER, frames, |i, f, net| {
        let head = format!("{i},{},{},{},{r}", f.t, center.x, center.y);
        vec![match graph_decomposition(net, center, r, None, cfg) {
            Ok(g) => format!(
                "{head},ok,{},{},{},{},{}",
                g.nu,
                g.scaled_energy,
                g.mass_in_ball,
                g.sheet_mass,
                g.w22_estimates.iter().copied().fold(0.0, f64::max)
            ),
            Err(e) => format!("{head},{},,,,,", csv_text(&e)),
        }]
    })
}
