//! Alternating successive convex approximation for the max-min variance
//! problem over a convex region.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::surrogate::{build_subproblem_x, build_subproblem_y, g_value, Axis, Subproblem};
use crate::array::{Geometry2D, PositionStats, SensingScene};
use crate::conic::{solve, SolveStatus};
use crate::error::{Error, Result};
use crate::region::Region;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    /// Full-aperture uniform grid scaled into the region.
    #[default]
    Upaf,
    /// Caller-supplied geometry.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaConfig {
    /// Outer stopping threshold on the increase of `delta`.
    pub epsilon: f64,
    pub epsilon_x: f64,
    pub epsilon_y: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Duality-gap tolerance of each subproblem solve.
    pub solver_tol: f64,
    pub init: InitScheme,
    /// Extra jittered starts run alongside the given one.
    pub restarts: usize,
    /// Jitter magnitude for restarts, in coordinate units.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            epsilon_x: 1e-2,
            epsilon_y: 1e-2,
            max_outer: 100,
            max_inner: 50,
            solver_tol: 1e-9,
            init: InitScheme::Upaf,
            restarts: 0,
            jitter: 0.1,
            seed: 0,
        }
    }
}

impl ScaConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("epsilon", self.epsilon),
            ("epsilon_x", self.epsilon_x),
            ("epsilon_y", self.epsilon_y),
            ("solver_tol", self.solver_tol),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::Config("iteration caps must be at least 1".into()));
        }
        if !(self.jitter >= 0.0) {
            return Err(Error::Config(format!("jitter must be >= 0, got {}", self.jitter)));
        }
        Ok(())
    }
}

/// One row per (outer iteration, phase).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaTraceRow {
    pub iteration: usize,
    /// True `delta` after the phase.
    pub delta: f64,
    pub phase: String,
    pub inner_iters: usize,
    pub solver_status: SolveStatus,
    /// `max(0, D - min pair distance)`.
    pub spacing_violation: f64,
    pub region_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScaTrace {
    /// `delta` of the start after antennas on a coordinate mean are nudged.
    pub initial_delta: f64,
    pub rows: Vec<ScaTraceRow>,
    pub subproblem_solves: usize,
    pub converged: bool,
}

impl ScaTrace {
    pub fn final_delta(&self) -> f64 {
        self.rows.last().map_or(self.initial_delta, |r| r.delta)
    }

    /// Largest drop between consecutive recorded `delta` values.
    pub fn max_decrease(&self) -> f64 {
        let mut prev = self.initial_delta;
        let mut worst: f64 = 0.0;
        for r in &self.rows {
            worst = worst.max(prev - r.delta);
            prev = r.delta;
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "delta", "phase", "inner_iters", "solver_status"])?;
        for r in &self.rows {
            w.write_record([
                r.iteration.to_string(),
                format!("{:.11e}", r.delta),
                r.phase.clone(),
                r.inner_iters.to_string(),
                r.solver_status.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<trace>".into(),
            source: e,
        })?;
        Ok(())
    }
}

/// `min(G(x,y), G(y,x))` of a layout.
pub fn delta_of(g: &Geometry2D) -> f64 {
    PositionStats::of_2d(g).delta()
}

/// Checks region membership and pairwise spacing with absolute slack `tol`.
pub fn check_feasible(g: &Geometry2D, region: &Region, d: f64, tol: f64) -> Result<()> {
    for (i, p) in g.points().enumerate() {
        let v = region.violation(p);
        if v > tol {
            return Err(Error::InfeasibleGeometry(format!(
                "antenna {i} at ({}, {}) lies {v} outside the region",
                p[0], p[1]
            )));
        }
    }
    let (dmin, k, l) = g.min_pair_distance();
    if dmin < d - tol {
        return Err(Error::InfeasibleGeometry(format!(
            "antennas {k} and {l} are {dmin} apart, below D = {d}"
        )));
    }
    Ok(())
}

fn violations(g: &Geometry2D, region: &Region, d: f64) -> (f64, f64) {
    let spacing = (d - g.min_pair_distance().0).max(0.0);
    let reg = g.points().map(|p| region.violation(p)).fold(0.0, f64::max);
    (spacing, reg)
}

/// Row-major grid of `n` points, `ceil(sqrt(n))` per row, starting at `origin`.
pub fn uniform_grid(n: usize, spacing: f64, origin: [f64; 2]) -> Result<Geometry2D> {
    let side = grid_side(n);
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            [
                origin[0] + (i % side) as f64 * spacing,
                origin[1] + (i / side) as f64 * spacing,
            ]
        })
        .collect();
    Geometry2D::from_points(&pts)
}

pub(crate) fn grid_side(n: usize) -> usize {
    let mut s = (n as f64).sqrt().ceil() as usize;
    while s * s < n {
        s += 1;
    }
    while s > 1 && (s - 1) * (s - 1) >= n {
        s -= 1;
    }
    s
}

/// Full-aperture grid: fills a square region exactly; other regions use the
/// square inscribed in their largest inscribed circle.
pub fn upaf_init(region: &Region, n: usize, d: f64) -> Result<Geometry2D> {
    if n < 3 {
        return Err(Error::TooFewAntennas(n));
    }
    let (origin, side) = match region {
        Region::Square { min, side } => (*min, *side),
        _ => {
            let c = region.enclosing_circles()?.inscribed;
            let s = c.radius * std::f64::consts::SQRT_2;
            ([c.center[0] - s / 2.0, c.center[1] - s / 2.0], s)
        }
    };
    let m = grid_side(n);
    let spacing = side / (m - 1) as f64;
    let g = uniform_grid(n, spacing, origin)?;
    check_feasible(&g, region, d, 1e-9 * side)?;
    Ok(g)
}

/// Runs the alternating scheme from `init`. Each phase repeatedly solves the
/// surrogate for one axis until its `delta` gains less than `epsilon_x`
/// (`epsilon_y`); the outer loop stops once a full x/y round gains less than
/// `epsilon`.
pub fn optimize_2d(
    scene: &SensingScene,
    region: &Region,
    config: &ScaConfig,
    init: &Geometry2D,
) -> Result<(Geometry2D, ScaTrace)> {
    config.validate()?;
    region.validate()?;
    let d = scene.min_spacing;
    let (lo, hi) = region.bounding_box();
    let feas_tol = 1e-9 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0);
    check_feasible(init, region, d, feas_tol)?;
    let stats = PositionStats::of_2d(init);
    if !(stats.var_x > 0.0 && stats.var_y > 0.0) {
        return Err(Error::Degenerate("initial layout has zero variance along an axis".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let start = nudge_off_mean(init, region, d, &mut rng);
    let mut xs = start.xs().to_vec();
    let mut ys = start.ys().to_vec();
    let mut trace = ScaTrace {
        initial_delta: delta_of(&start),
        ..Default::default()
    };
    let mut outer_delta = trace.initial_delta;

    for iteration in 1..=config.max_outer {
        for axis in [Axis::X, Axis::Y] {
            let eps = match axis {
                Axis::X => config.epsilon_x,
                Axis::Y => config.epsilon_y,
            };
            let last = Geometry2D::new(xs.clone(), ys.clone())?;
            let fail = |status: String| Error::SubproblemFailed {
                iteration,
                phase: axis.name(),
                status,
                last_feasible: Box::new(last.clone()),
            };
            let mut prev = delta_of(&last);
            let mut inner = 0;
            let mut status = SolveStatus::Optimal;
            while inner < config.max_inner {
                inner += 1;
                let (m, w) = match axis {
                    Axis::X => (&mut xs, &ys),
                    Axis::Y => (&mut ys, &xs),
                };
                let sub = build_with_guard(axis, m, w, region, d, &mut rng).map_err(|e| fail(e.to_string()))?;
                let here = g_value(&sub.reference, w).min(g_value(w, &sub.reference));
                let start = sub.point_at_reference(here - 1e-7 * here.abs().max(1.0));
                let res = solve(&sub.program, config.solver_tol, Some(&start))
                    .map_err(|e| fail(e.to_string()))?;
                trace.subproblem_solves += 1;
                if res.status != SolveStatus::Optimal {
                    return Err(fail(res.status.to_string()));
                }
                status = res.status;
                let (m_new, sub_delta) = sub.expand(res.x.as_slice());
                *m = m_new;
                let gain = sub_delta - prev;
                prev = sub_delta;
                if gain < eps {
                    break;
                }
            }
            let g = Geometry2D::new(xs.clone(), ys.clone())?;
            let (spacing_violation, region_violation) = violations(&g, region, d);
            trace.rows.push(ScaTraceRow {
                iteration,
                delta: delta_of(&g),
                phase: axis.name().to_string(),
                inner_iters: inner,
                solver_status: status,
                spacing_violation,
                region_violation,
            });
        }
        let now = trace.final_delta();
        let gain = now - outer_delta;
        outer_delta = now;
        if gain < config.epsilon {
            trace.converged = true;
            break;
        }
    }
    Ok((Geometry2D::new(xs, ys)?, trace))
}

/// Antennas sitting exactly on the mean of a coordinate have zero gradient in
/// the linearized variance and never move. Shift each by `D/100` along that
/// axis when the result stays feasible.
fn nudge_off_mean(g: &Geometry2D, region: &Region, d: f64, rng: &mut ChaCha8Rng) -> Geometry2D {
    let mut pts: Vec<[f64; 2]> = g.points().collect();
    let n = pts.len() as f64;
    let scale = pts.iter().fold(1.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
    for axis in 0..2 {
        let mean = pts.iter().map(|p| p[axis]).sum::<f64>() / n;
        for k in 0..pts.len() {
            if (pts[k][axis] - mean).abs() > 1e-12 * scale {
                continue;
            }
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            for s in [sign, -sign] {
                let mut trial = pts.clone();
                trial[k][axis] += s * d / 100.0;
                let ok = Geometry2D::from_points(&trial)
                    .is_ok_and(|t| check_feasible(&t, region, d, 0.0).is_ok());
                if ok {
                    pts = trial;
                    break;
                }
            }
        }
    }
    Geometry2D::from_points(&pts).expect("finite points")
}

fn build_with_guard(
    axis: Axis,
    m: &mut [f64],
    w: &[f64],
    region: &Region,
    d: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Subproblem> {
    let build = |m: &[f64]| match axis {
        Axis::X => build_subproblem_x(m, w, region, d),
        Axis::Y => build_subproblem_y(m, w, region, d),
    };
    match build(m) {
        Err(Error::CoincidentReference(k, _)) => {
            m[k] += d / 100.0 * if rng.random::<bool>() { 1.0 } else { -1.0 };
            build(m)
        }
        other => other,
    }
}

/// Builds the initial layout named by `config.init` (UPAF unless explicit).
pub fn initial_layout(
    region: &Region,
    n: usize,
    d: f64,
    config: &ScaConfig,
    explicit: Option<&Geometry2D>,
) -> Result<Geometry2D> {
    match (config.init, explicit) {
        (InitScheme::Explicit, Some(g)) => Ok(g.clone()),
        (InitScheme::Explicit, None) => Err(Error::Config("explicit init needs a geometry".into())),
        (InitScheme::Upaf, _) => upaf_init(region, n, d),
    }
}

/// Runs `init` plus `config.restarts` jittered copies in parallel and keeps
/// the layout with the largest final `delta` (ties go to the lower index).
pub fn optimize_2d_restarts(
    scene: &SensingScene,
    region: &Region,
    config: &ScaConfig,
    init: &Geometry2D,
) -> Result<(Geometry2D, ScaTrace)> {
    let d = scene.min_spacing;
    let starts: Vec<Geometry2D> = std::iter::once(init.clone())
        .chain((0..config.restarts).filter_map(|r| jittered(init, region, d, config, r as u64)))
        .collect();
    let runs: Vec<Result<(Geometry2D, ScaTrace)>> = starts
        .par_iter()
        .map(|s| optimize_2d(scene, region, config, s))
        .collect();
    let mut best: Option<(Geometry2D, ScaTrace)> = None;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.1.final_delta() > b.1.final_delta()) {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one start"))
}

fn jittered(init: &Geometry2D, region: &Region, d: f64, config: &ScaConfig, r: u64) -> Option<Geometry2D> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(r + 1);
    let mut mag = config.jitter;
    for _ in 0..20 {
        let pts: Vec<[f64; 2]> = init
            .points()
            .map(|p| {
                [
                    p[0] + mag * rng.random_range(-1.0..=1.0),
                    p[1] + mag * rng.random_range(-1.0..=1.0),
                ]
            })
            .collect();
        let g = Geometry2D::from_points(&pts).ok()?;
        if check_feasible(&g, region, d, 0.0).is_ok() {
            return Some(g);
        }
        mag /= 2.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::SpatialAngles;
    use crate::placement2d::circular_optimal;

    fn scene(d: f64) -> SensingScene {
        SensingScene::with_snr_db(SpatialAngles::new(0.35, 0.71).unwrap(), 15.0, d).unwrap()
    }

    #[test]
    fn grid_sides() {
        assert_eq!(grid_side(8), 3);
        assert_eq!(grid_side(9), 3);
        assert_eq!(grid_side(10), 4);
        assert_eq!(grid_side(36), 6);
    }

    #[test]
    fn circular_start_stays_optimal() {
        let g = circular_optimal(8, 1.0, 0.5).unwrap();
        let region = Region::circle([0.0, 0.0], 1.0).unwrap();
        let (out, trace) = optimize_2d(&scene(0.5), &region, &ScaConfig::default(), &g).unwrap();
        assert!((delta_of(&out) - 0.5).abs() < 1e-8);
        assert!(trace.converged);
        assert!(trace.max_decrease() <= 1e-8);
    }

    #[test]
    fn small_square_improves() {
        let region = Region::square_centered(3.0).unwrap();
        let init = upaf_init(&region, 8, 0.5).unwrap();
        let (out, trace) = optimize_2d(&scene(0.5), &region, &ScaConfig::default(), &init).unwrap();
        assert!(trace.max_decrease() <= 1e-8);
        assert!(delta_of(&out) >= delta_of(&init));
        assert!(delta_of(&out) <= 9.0 / 4.0 + 1e-9);
        check_feasible(&out, &region, 0.5, 1e-6).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("iteration,delta,phase,inner_iters,solver_status\n"));
    }

    #[test]
    fn rejects_infeasible_init() {
        let region = Region::square_cornered(1.0).unwrap();
        let g = Geometry2D::new(vec![0.0, 0.1, 0.5], vec![0.0, 0.0, 1.0]).unwrap();
        assert!(optimize_2d(&scene(0.5), &region, &ScaConfig::default(), &g).is_err());
    }
}
