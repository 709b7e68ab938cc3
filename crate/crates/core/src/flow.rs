//! Time-discrete curvature flow: a deformation sweep followed by motion
//! along the smoothed mean curvature, with Brakke-type residual checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::{classify_junction, JunctionKind};
use crate::error::FlowError;
use crate::geometry::{gauss_legendre_unit, segment_set_hausdorff, Point, Rect};
use crate::mollify::{HMode, Kernel, Mollifier, Quadrature};
use crate::network::{
    max_well_decay, remesh_known, sweep_valid, validate, AdmissibilityGuard, Network, Well,
};
use crate::scalar::{lit, to_f64, Scalar};
use crate::varifold::Varifold1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub j: u32,
    pub epsilon: f64,
    pub dt: f64,
    pub r_def: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub h_mode: HMode,
    pub angle_tol: f64,
    pub residual_tol: f64,
    pub quadrature: Quadrature,
    pub test_bank_size: usize,
    /// Energy and residuals are computed every this many steps; 0 disables them.
    pub diagnostics_every: usize,
    /// A frame is emitted every this many steps (plus the first and last).
    pub frame_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            j: 2,
            epsilon: 0.02,
            dt: 1e-4,
            r_def: 0.15,
            l_min: 0.005,
            l_max: 0.015,
            h_mode: HMode::Pointwise,
            angle_tol: 5.0,
            residual_tol: 1e-2,
            quadrature: Quadrature::default(),
            test_bank_size: 4,
            diagnostics_every: 50,
            frame_every: 50,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |m: String| Err(FlowError::Config(m));
        if self.j == 0 {
            return bad("j must be positive".into());
        }
        if !(self.epsilon > 0.0 && self.dt > 0.0 && self.r_def > 0.0) {
            return bad("epsilon, dt and r_def must be positive".into());
        }
        if self.dt > 0.25 * self.epsilon * self.epsilon * (1.0 + 1e-12) {
            return bad(format!(
                "dt = {} exceeds 0.25 epsilon^2 = {}",
                self.dt,
                0.25 * self.epsilon * self.epsilon
            ));
        }
        let jj = self.j as f64;
        if self.r_def > 1.0 / (jj * jj) * (1.0 + 1e-12) {
            return bad(format!(
                "r_def = {} exceeds 1/j^2 = {}",
                self.r_def,
                1.0 / (jj * jj)
            ));
        }
        if self.epsilon >= self.r_def / 5.0 {
            return bad(format!(
                "epsilon = {} must be below r_def/5 = {}",
                self.epsilon,
                self.r_def / 5.0
            ));
        }
        if !(self.l_min > 0.0 && self.l_min < self.epsilon) {
            return bad(format!("l_min = {} must lie in (0, epsilon)", self.l_min));
        }
        if !(self.l_max > self.l_min && self.l_max * (1.0 + 1e-12) >= 3.0 * self.l_min) {
            return bad(format!("l_max = {} must be at least 3 l_min", self.l_max));
        }
        if !(self.angle_tol > 0.0 && self.angle_tol < 30.0) {
            return bad("angle_tol must lie in (0, 30) degrees".into());
        }
        if !(self.residual_tol >= 0.0) {
            return bad("residual_tol must be non-negative".into());
        }
        if self.test_bank_size == 0 {
            return bad("test_bank_size must be positive".into());
        }
        if self.frame_every == 0 {
            return bad("frame_every must be positive".into());
        }
        self.quadrature.check().map_err(FlowError::Config)
    }

    /// How the configuration relates to the asymptotic regime of the
    /// existence scheme (`ε < j⁻⁶`, `dt ∈ (ε²³/2, ε²³]`). Reported only.
    pub fn asymptotic_notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        let bound = (self.j as f64).powi(-6);
        notes.push(format!(
            "epsilon = {} {} j^-6 = {:e}",
            self.epsilon,
            if self.epsilon < bound { "<" } else { ">=" },
            bound
        ));
        let p = self.epsilon.powi(23);
        let inside = self.dt > 0.5 * p && self.dt <= p;
        notes.push(format!(
            "dt = {:e} {} (eps^23/2, eps^23] = ({:e}, {:e}]",
            self.dt,
            if inside { "in" } else { "outside" },
            0.5 * p,
            p
        ));
        notes
    }

    pub fn guard<T: Scalar>(&self) -> AdmissibilityGuard<T> {
        AdmissibilityGuard::new(self.j).with_angle_tol(lit(self.angle_tol))
    }

    pub fn kernel<T: Scalar>(&self) -> Result<Kernel<T>, FlowError> {
        Kernel::new(lit(self.epsilon), self.quadrature).map_err(FlowError::Config)
    }

    fn ghost<T: Scalar>(&self) -> T {
        lit(self.epsilon * self.quadrature.truncation)
    }
}

/// A C² bump `(1 − |z − c|²/r²)³` on the disc `B_r(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump<T> {
    pub center: Point<T>,
    pub radius: T,
}

impl<T: Scalar> Bump<T> {
    pub fn value(&self, z: Point<T>) -> T {
        let s = (z - self.center).norm_sq() / (self.radius * self.radius);
        if s >= T::one() {
            return T::zero();
        }
        let u = T::one() - s;
        u * u * u
    }

    pub fn gradient(&self, z: Point<T>) -> Point<T> {
        let d = z - self.center;
        let r2 = self.radius * self.radius;
        let s = d.norm_sq() / r2;
        if s >= T::one() {
            return Point::zero();
        }
        let u = T::one() - s;
        d * (-lit::<T>(6.0) * u * u / r2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionBank<T> {
    pub aj_wells: Vec<Well<T>>,
    pub compact_bumps: Vec<Bump<T>>,
}

impl<T: Scalar> TestFunctionBank<T> {
    /// `size` wells and `size` bumps spread over the bounding box of `net`.
    pub fn for_network(net: &Network<T>, j: u32, size: usize) -> Self {
        let bb = net
            .bbox()
            .unwrap_or(Rect::new(Point::zero(), Point::zero()));
        let c = bb.min.midpoint(bb.max);
        let half = bb.width().max(bb.height()) * lit(0.5);
        let half = if half > T::zero() { half } else { T::one() };
        let lmax = max_well_decay::<T>(j);
        let golden = lit::<T>(2.399963229728653);
        let spot = |k: usize, scale: T| {
            if k == 0 {
                c
            } else {
                let r = scale * (lit::<T>(k as f64) / lit::<T>(size.max(2) as f64)).sqrt();
                c + Point::from_angle(golden * lit::<T>(k as f64)) * r
            }
        };
        let aj_wells = (0..size)
            .map(|k| {
                let decay = if k % 2 == 0 { lmax } else { lmax * lit(0.5) };
                Well::new(spot(k, half * lit(0.5)), decay, T::one())
            })
            .collect();
        let compact_bumps = (0..size)
            .map(|k| Bump {
                center: spot(k, half * lit(0.5)),
                radius: half * lit(0.75),
            })
            .collect();
        TestFunctionBank {
            aj_wells,
            compact_bumps,
        }
    }

    pub fn len(&self) -> usize {
        self.aj_wells.len() + self.compact_bumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn value(&self, id: usize, z: Point<T>) -> T {
        if id < self.aj_wells.len() {
            self.aj_wells[id].value(z)
        } else {
            self.compact_bumps[id - self.aj_wells.len()].value(z)
        }
    }

    fn gradient(&self, id: usize, z: Point<T>) -> Point<T> {
        if id < self.aj_wells.len() {
            self.aj_wells[id].gradient(z)
        } else {
            self.compact_bumps[id - self.aj_wells.len()].gradient(z)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport<T> {
    pub t: T,
    pub dt: T,
    pub mass_total: T,
    pub deficit: T,
    pub energy: Option<T>,
    /// `(bank index, residual)`; wells first, then bumps. Empty off diagnostics steps.
    pub brakke_residuals: Vec<(usize, T)>,
    pub junction_census: BTreeMap<usize, usize>,
    pub max_displacement: T,
    pub capped: usize,
    pub unresolved: usize,
    pub halved: bool,
}

impl<T: Scalar> StepReport<T> {
    pub fn max_residual(&self) -> Option<T> {
        self.brakke_residuals
            .iter()
            .map(|r| r.1)
            .fold(None, |m, r| Some(m.map_or(r, |m: T| m.max(r))))
    }
}

/// Prepared kernel and guard for repeated steps with one configuration.
pub struct Stepper<T> {
    cfg: FlowConfig,
    kernel: Kernel<T>,
    guard: AdmissibilityGuard<T>,
}

impl<T: Scalar> Stepper<T> {
    pub fn new(cfg: &FlowConfig) -> Result<Self, FlowError> {
        cfg.validate()?;
        Ok(Stepper {
            cfg: cfg.clone(),
            kernel: cfg.kernel()?,
            guard: cfg.guard(),
        })
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    /// One step from time `t`. Energy and residuals are filled when
    /// `diagnostics` is set.
    pub fn step(
        &self,
        state: &Network<T>,
        t: T,
        bank: &TestFunctionBank<T>,
        diagnostics: bool,
    ) -> Result<(Network<T>, StepReport<T>), FlowError> {
        let report = validate(state);
        if !report.is_ok() {
            return Err(FlowError::StepRejected {
                t: to_f64(t),
                report,
            });
        }
        self.advance(state, t, bank, diagnostics)
    }

    /// [`Stepper::step`] for a state known to be valid.
    fn advance(
        &self,
        state: &Network<T>,
        t: T,
        bank: &TestFunctionBank<T>,
        diagnostics: bool,
    ) -> Result<(Network<T>, StepReport<T>), FlowError> {
        let cfg = &self.cfg;
        let r_def = lit::<T>(cfg.r_def);
        let (swept, deficit) = sweep_valid(state, &self.guard, r_def)?;

        let movable: Vec<usize> = (0..swept.vertices.len())
            .filter(|v| !swept.is_frozen(*v))
            .collect();
        let pts: Vec<Point<T>> = movable.iter().map(|&v| swept.vertices[v]).collect();
        let field = Varifold1::from_network_with_far_field(&swept, cfg.ghost());
        let moll = Mollifier::new(&self.kernel, &field);
        let h = match cfg.h_mode {
            HMode::Pointwise => moll.h_pointwise_many(&pts),
            HMode::Full => moll.h_full_many(&pts),
        };

        let mut dt = lit::<T>(cfg.dt);
        let mut halved = false;
        let (moved, max_disp, capped) = loop {
            let mut moved = swept.clone();
            let mut max_disp = T::zero();
            let mut capped = 0;
            for (k, &v) in movable.iter().enumerate() {
                let mut d = h[k] * dt;
                let n = d.norm();
                if n > r_def {
                    d = d * (r_def / n);
                    capped += 1;
                }
                max_disp = max_disp.max(d.norm());
                moved.vertices[v] += d;
            }
            let rep = validate(&moved);
            if rep.is_ok() {
                break (moved, max_disp, capped);
            }
            if halved {
                return Err(FlowError::StepRejected {
                    t: to_f64(t),
                    report: rep,
                });
            }
            halved = true;
            dt = dt * lit(0.5);
        };
        let next = remesh_known(&moved, lit(cfg.l_min), lit(cfg.l_max), true)?;
        let t_next = t + dt;

        let (energy, brakke_residuals) = if diagnostics {
            let after_field = Varifold1::from_network_with_far_field(&next, cfg.ghost());
            let after = Mollifier::new(&self.kernel, &after_field);
            let window = next
                .bbox()
                .map(|w| w.expanded(self.kernel.effective_radius));
            let (energy, h) = match window {
                Some(w) => after.energy_and_h_full(&w, &next.vertices),
                None => (T::zero(), Vec::new()),
            };
            (
                Some(energy),
                residuals_with(&h, after.kernel().epsilon, state, &next, dt, bank),
            )
        } else {
            (None, Vec::new())
        };
        let report = StepReport {
            t: t_next,
            dt,
            mass_total: next.total_length(),
            deficit: deficit.deficit,
            energy,
            brakke_residuals,
            junction_census: next.junction_census(),
            max_displacement: max_disp,
            capped,
            unresolved: deficit.unresolved.len(),
            halved,
        };
        Ok((next, report))
    }
}

/// One step with diagnostics at time 0.
pub fn step<T: Scalar>(
    state: &Network<T>,
    cfg: &FlowConfig,
    bank: &TestFunctionBank<T>,
) -> Result<(Network<T>, StepReport<T>), FlowError> {
    Stepper::new(cfg)?.step(state, T::zero(), bank, true)
}

fn line_integral<T: Scalar>(net: &Network<T>, f: impl Fn(Point<T>) -> T) -> T {
    let gl = gauss_legendre_unit(4);
    let mut total = T::zero();
    for e in &net.edges {
        let (a, b) = (net.vertices[e.a], net.vertices[e.b]);
        let len = a.dist(b);
        let mut s = T::zero();
        for &(x, w) in &gl {
            s += f(a.lerp(b, lit(x))) * lit::<T>(w);
        }
        total += s * len;
    }
    total
}

fn residuals_with<T: Scalar>(
    h: &[Point<T>],
    epsilon: T,
    before: &Network<T>,
    after: &Network<T>,
    dt: T,
    bank: &TestFunctionBank<T>,
) -> Vec<(usize, T)> {
    let slack = epsilon.powf(lit(0.125));
    (0..bank.len())
        .map(|id| {
            let mb = line_integral(before, |z| bank.value(id, z));
            let ma = line_integral(after, |z| bank.value(id, z));
            let integrand = |v: usize| {
                let z = after.vertices[v];
                bank.gradient(id, z).dot(h[v]) - bank.value(id, z) * h[v].norm_sq()
            };
            let mut rhs = T::zero();
            for e in &after.edges {
                let len = after.vertices[e.a].dist(after.vertices[e.b]);
                rhs += (integrand(e.a) + integrand(e.b)) * lit(0.5) * len;
            }
            (id, (ma - mb) / dt - rhs - slack)
        })
        .collect()
}

/// Residuals of the discrete Brakke inequality for each bank function,
/// with `h_ε` in full mode on `after`. Non-positive means the inequality holds.
pub fn check_discrete_brakke<T: Scalar>(
    before: &Network<T>,
    after: &Network<T>,
    dt: T,
    kernel: &Kernel<T>,
    bank: &TestFunctionBank<T>,
) -> Vec<(usize, T)> {
    let ghost = kernel.epsilon * lit(kernel.quadrature.truncation);
    let field = Varifold1::from_network_with_far_field(after, ghost);
    let h = Mollifier::new(kernel, &field).h_full_many(&after.vertices);
    residuals_with(&h, kernel.epsilon, before, after, dt, bank)
}

/// Receives trajectory output.
pub trait FrameSink<T> {
    fn frame(&mut self, t: T, net: &Network<T>) -> Result<(), String>;
    fn step(&mut self, _report: &StepReport<T>, _net: &Network<T>) -> Result<(), String> {
        Ok(())
    }
}

/// Discards everything.
pub struct NullSink;

impl<T> FrameSink<T> for NullSink {
    fn frame(&mut self, _t: T, _net: &Network<T>) -> Result<(), String> {
        Ok(())
    }
}

/// Keeps frames and reports in memory.
#[derive(Debug, Clone, Default)]
pub struct MemorySink<T> {
    pub frames: Vec<(T, Network<T>)>,
    pub reports: Vec<StepReport<T>>,
}

impl<T: Clone> FrameSink<T> for MemorySink<T> {
    fn frame(&mut self, t: T, net: &Network<T>) -> Result<(), String> {
        self.frames.push((t, net.clone()));
        Ok(())
    }
    fn step(&mut self, report: &StepReport<T>, _net: &Network<T>) -> Result<(), String> {
        self.reports.push(report.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary<T> {
    pub steps: usize,
    pub final_time: T,
    pub extinction_time: Option<T>,
    pub initial_mass: T,
    pub final_mass: T,
    /// max over steps of `mass − (mass₀ + ε^{1/8} t)`.
    pub max_mass_excess: T,
    pub max_residual: Option<T>,
    /// max over steps of `Σ (energy·dt − deficit) / t`.
    pub energy_deficit_budget: T,
    pub frames: usize,
    pub flagged_frames: usize,
    pub capped: usize,
    pub halvings: usize,
    pub final_network: Network<T>,
}

impl<T: Scalar> TrajectorySummary<T> {
    pub fn flagged_fraction(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.flagged_frames as f64 / self.frames as f64
        }
    }
}

/// Whether some unfrozen junction of degree ≥ 3 classifies as unstable.
pub fn frame_flagged<T: Scalar>(net: &Network<T>, angle_tol: f64) -> bool {
    let deg = net.degrees();
    (0..net.vertices.len()).any(|v| {
        deg[v] >= 3
            && !net.is_frozen(v)
            && classify_junction(net, v, angle_tol)
                .map_or(true, |c| c.kind == JunctionKind::Unstable)
    })
}

/// Iterates [`Stepper::step`] up to time `duration`, stopping early when the
/// mass drops below `l_min`.
pub fn run<T: Scalar>(
    initial: &Network<T>,
    cfg: &FlowConfig,
    duration: T,
    sink: &mut dyn FrameSink<T>,
) -> Result<TrajectorySummary<T>, FlowError> {
    if !(duration > T::zero()) {
        return Err(FlowError::NonPositiveDuration);
    }
    let stepper = Stepper::new(cfg)?;
    let rep = validate(initial);
    if !rep.is_ok() {
        return Err(FlowError::StepRejected {
            t: 0.0,
            report: rep,
        });
    }
    let bank = TestFunctionBank::for_network(initial, cfg.j, cfg.test_bank_size);
    let slack = lit::<T>(cfg.epsilon).powf(lit(0.125));
    let l_min = lit::<T>(cfg.l_min);
    let sink_err = |e: String| FlowError::Sink(e);

    let mass0 = initial.total_length();
    let mut net = initial.clone();
    let mut t = T::zero();
    let mut steps = 0usize;
    let mut frames = 0usize;
    let mut flagged = 0usize;
    let mut capped = 0usize;
    let mut halvings = 0usize;
    let mut max_excess = T::neg_infinity();
    let mut max_residual: Option<T> = None;
    let mut budget_sum = T::zero();
    let mut budget = T::zero();
    let mut last_energy = T::zero();
    let mut extinction = None;

    sink.frame(t, &net).map_err(sink_err)?;
    frames += 1;
    if frame_flagged(&net, cfg.angle_tol) {
        flagged += 1;
    }
    let end = duration * (T::one() - lit(1e-12));
    while t < end {
        let diag = cfg.diagnostics_every > 0 && steps % cfg.diagnostics_every == 0;
        let (next, report) = stepper.advance(&net, t, &bank, diag)?;
        steps += 1;
        t = report.t;
        net = next;
        capped += report.capped;
        halvings += report.halved as usize;
        if let Some(e) = report.energy {
            last_energy = e;
        }
        if let Some(r) = report.max_residual() {
            max_residual = Some(max_residual.map_or(r, |m| m.max(r)));
        }
        max_excess = max_excess.max(report.mass_total - (mass0 + slack * t));
        budget_sum += last_energy * report.dt - report.deficit;
        budget = budget.max(budget_sum / t);
        sink.step(&report, &net).map_err(sink_err)?;

        let extinct = report.mass_total < l_min;
        if extinct {
            extinction = Some(t);
        }
        if extinct || steps % cfg.frame_every == 0 || t >= end {
            sink.frame(t, &net).map_err(sink_err)?;
            frames += 1;
            if frame_flagged(&net, cfg.angle_tol) {
                flagged += 1;
            }
        }
        if extinct {
            break;
        }
    }
    Ok(TrajectorySummary {
        steps,
        final_time: t,
        extinction_time: extinction,
        initial_mass: mass0,
        final_mass: net.total_length(),
        max_mass_excess: max_excess,
        max_residual,
        energy_deficit_budget: budget,
        frames,
        flagged_frames: flagged,
        capped,
        halvings,
        final_network: net,
    })
}

/// Hausdorff distance between the edge sets of two networks, sampled at
/// 16 points per edge.
pub fn drift<T: Scalar>(a: &Network<T>, b: &Network<T>) -> T {
    let pieces = |n: &Network<T>| {
        (0..n.edges.len())
            .map(|e| n.edge_points(e))
            .collect::<Vec<_>>()
    };
    segment_set_hausdorff(&pieces(a), &pieces(b), 16)
}
