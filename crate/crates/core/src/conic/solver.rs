//! Primal log-barrier interior-point method.
//!
//! Each constraint contributes a self-concordant barrier (`-ln` of its slack;
//! `-ln(st - ||z||^2)` for cones). Centering uses damped Newton steps with a
//! backtracking line search; the barrier weight grows tenfold per stage until
//! the duality-gap bound `m / t` falls below the tolerance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::program::{ConicProgram, Constraint};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    InfeasibleDetected,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::InfeasibleDetected => "infeasible-detected",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResiduals {
    /// `||c - sum_i lambda_i grad g_i||_inf` with the barrier multipliers.
    pub stationarity: f64,
    /// Largest violation of the original constraints.
    pub primal_feasibility: f64,
    /// Duality-gap bound `sum_i lambda_i * slack_i`.
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal_feasibility)
            .max(self.complementarity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub x: DVector<f64>,
    pub objective: f64,
    pub residuals: KktResiduals,
    pub newton_steps: usize,
    /// Objective value after each centering stage.
    pub stage_objectives: Vec<f64>,
}

/// Outcome of the feasibility phase.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    /// Every constraint holds with slack at least the requested margin.
    Point(DVector<f64>),
    /// Certified lower bound on the smallest achievable uniform relaxation.
    Infeasible { min_relaxation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub barrier_growth: f64,
    pub initial_weight: f64,
    pub max_stages: usize,
    pub max_newton_per_stage: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            barrier_growth: 10.0,
            initial_weight: 1.0,
            max_stages: 60,
            max_newton_per_stage: 200,
        }
    }
}

impl SolverSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Solves `program` to duality-gap tolerance `tol`. `start`, when given and
/// strictly feasible, seeds the barrier method directly; otherwise a
/// feasibility phase runs first (from `start` if supplied).
pub fn solve(program: &ConicProgram, tol: f64, start: Option<&[f64]>) -> Result<SolveResult> {
    solve_with(program, &SolverSettings::with_tol(tol), start)
}

pub fn solve_with(
    program: &ConicProgram,
    settings: &SolverSettings,
    start: Option<&[f64]>,
) -> Result<SolveResult> {
    let n = program.num_variables();
    let guess = match start {
        Some(s) if s.len() == n => DVector::from_column_slice(s),
        Some(s) => {
            return Err(crate::error::Error::MalformedProgram(format!(
                "start has {} entries, expected {n}",
                s.len()
            )))
        }
        None => DVector::zeros(n),
    };
    let warm = start.is_some() && program.is_strictly_feasible(&guess);
    let x0 = if warm {
        guess
    } else {
        match find_interior(program, &guess, 0.0, settings)? {
            Feasibility::Point(p) => p,
            Feasibility::Infeasible { .. } => {
                return Ok(SolveResult {
                    status: SolveStatus::InfeasibleDetected,
                    objective: program.objective().dot(&guess),
                    x: guess,
                    residuals: KktResiduals::default(),
                    newton_steps: 0,
                    stage_objectives: Vec::new(),
                })
            }
        }
    };
    let barrier = Barrier::new(program);
    Ok(barrier.run(program.objective(), x0, settings, None, warm))
}

/// Finds a point satisfying every constraint with slack at least `min_slack`
/// by minimising a uniform relaxation `s` added to all constraints.
pub fn feasibility_phase(program: &ConicProgram, min_slack: f64) -> Result<Feasibility> {
    let guess = DVector::zeros(program.num_variables());
    find_interior(program, &guess, min_slack, &SolverSettings::with_tol(1e-9))
}

fn find_interior(
    program: &ConicProgram,
    guess: &DVector<f64>,
    min_slack: f64,
    settings: &SolverSettings,
) -> Result<Feasibility> {
    let n = program.num_variables();
    let mut aux = ConicProgram::new(n + 1);
    let extend = |v: &DVector<f64>, last: f64| {
        DVector::from_iterator(n + 1, v.iter().copied().chain(std::iter::once(last)))
    };
    let widen = |m: &DMatrix<f64>| m.clone().insert_column(n, 0.0);

    let mut s0: f64 = -0.5;
    for c in program.constraints() {
        match c {
            Constraint::Linear { a, b } => {
                s0 = s0.max(a.dot(guess) - b);
                aux.push(Constraint::Linear {
                    a: extend(a, -1.0),
                    b: *b,
                })?;
            }
            Constraint::Quadratic { factor, q, c } => {
                s0 = s0.max((factor * guess).norm_squared() + q.dot(guess) + c);
                aux.push(Constraint::Quadratic {
                    factor: widen(factor),
                    q: extend(q, -1.0),
                    c: *c,
                })?;
            }
            Constraint::RotatedCone { a, b, c, d, e, f } => {
                let z = (a * guess + b).norm();
                let lo = (c.dot(guess) + d).min(e.dot(guess) + f);
                s0 = s0.max(z - lo);
                aux.push(Constraint::RotatedCone {
                    a: widen(a),
                    b: b.clone(),
                    c: extend(c, 1.0),
                    d: *d,
                    e: extend(e, 1.0),
                    f: *f,
                })?;
            }
        }
    }
    let s0 = s0 + 1.0;
    // s >= -1 keeps the auxiliary problem bounded; so does a wide box.
    let floor = 1.0;
    let mut unit = DVector::zeros(n + 1);
    unit[n] = -1.0;
    aux.push(Constraint::Linear { a: unit, b: floor })?;
    let radius = 1e6 * (1.0 + guess.amax());
    for i in 0..n {
        let mut e = DVector::zeros(n + 1);
        e[i] = 1.0;
        aux.push(Constraint::Linear {
            a: e.clone(),
            b: guess[i] + radius,
        })?;
        aux.push(Constraint::Linear {
            a: -e,
            b: radius - guess[i],
        })?;
    }
    let mut objective = DVector::zeros(n + 1);
    objective[n] = -1.0;
    aux.maximize(objective.clone())?;

    let start = extend(guess, s0);
    let barrier = Barrier::new(&aux);
    let target = -min_slack.max(0.0);
    let stop_below = if min_slack > 0.0 {
        target
    } else {
        // any strictly feasible point will do; take a little margin
        -1e-9_f64.max(1e-3 * settings.tol.sqrt())
    };
    let phase1_settings = SolverSettings {
        tol: settings.tol.max(1e-10),
        ..*settings
    };
    let res = barrier.run(&objective, start, &phase1_settings, Some(stop_below), false);
    let s = res.x[n];
    let x = res.x.rows(0, n).into_owned();
    // the early stop only saves work; any strictly feasible point qualifies
    let enough = if min_slack > 0.0 { s <= target } else { s < 0.0 };
    if enough && program.is_strictly_feasible(&x) {
        return Ok(Feasibility::Point(x));
    }
    Ok(Feasibility::Infeasible {
        min_relaxation: s - res.residuals.complementarity,
    })
}

/// Constraint restricted to the variables it touches.
struct LocalTerm {
    support: Vec<usize>,
    kind: LocalKind,
}

enum LocalKind {
    Linear {
        a: DVector<f64>,
        b: f64,
    },
    Quadratic {
        f: DMatrix<f64>,
        ftf2: DMatrix<f64>,
        q: DVector<f64>,
        c: f64,
    },
    Cone {
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
        d: f64,
        e: DVector<f64>,
        f: f64,
        /// `c e^T + e c^T - 2 A^T A`, the constant Hessian of `st - ||z||^2`.
        hess_h: DMatrix<f64>,
    },
}

struct Barrier {
    n: usize,
    terms: Vec<LocalTerm>,
    degree: f64,
}

struct Eval {
    value: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

fn support_of(n: usize, nonzero: impl Fn(usize) -> bool) -> Vec<usize> {
    (0..n).filter(|&i| nonzero(i)).collect()
}

fn gather(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

fn gather_cols(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), idx.len(), |r, c| m[(r, idx[c])])
}

impl Barrier {
    fn new(program: &ConicProgram) -> Self {
        let n = program.num_variables();
        let terms = program
            .constraints()
            .iter()
            .map(|c| match c {
                Constraint::Linear { a, b } => {
                    let support = support_of(n, |i| a[i] != 0.0);
                    LocalTerm {
                        kind: LocalKind::Linear {
                            a: gather(a, &support),
                            b: *b,
                        },
                        support,
                    }
                }
                Constraint::Quadratic { factor, q, c } => {
                    let support = support_of(n, |i| {
                        q[i] != 0.0 || factor.column(i).iter().any(|v| *v != 0.0)
                    });
                    let f = gather_cols(factor, &support);
                    let ftf2 = f.transpose() * &f * 2.0;
                    LocalTerm {
                        kind: LocalKind::Quadratic {
                            q: gather(q, &support),
                            f,
                            ftf2,
                            c: *c,
                        },
                        support,
                    }
                }
                Constraint::RotatedCone { a, b, c, d, e, f } => {
                    let support = support_of(n, |i| {
                        c[i] != 0.0 || e[i] != 0.0 || a.column(i).iter().any(|v| *v != 0.0)
                    });
                    let a = gather_cols(a, &support);
                    let c = gather(c, &support);
                    let e = gather(e, &support);
                    let hess_h = &c * e.transpose() + &e * c.transpose()
                        - a.transpose() * &a * 2.0;
                    LocalTerm {
                        kind: LocalKind::Cone {
                            a,
                            b: b.clone(),
                            c,
                            d: *d,
                            e,
                            f: *f,
                            hess_h,
                        },
                        support,
                    }
                }
            })
            .collect();
        Self {
            n,
            terms,
            degree: program.barrier_degree(),
        }
    }

    /// Barrier value only; `None` outside the domain.
    fn value(&self, x: &DVector<f64>) -> Option<f64> {
        let mut total = 0.0;
        for t in &self.terms {
            let xl = gather(x, &t.support);
            let s = match &t.kind {
                LocalKind::Linear { a, b } => b - a.dot(&xl),
                LocalKind::Quadratic { f, q, c, .. } => {
                    -((f * &xl).norm_squared() + q.dot(&xl) + c)
                }
                LocalKind::Cone { a, b, c, d, e, f, .. } => {
                    let u = c.dot(&xl) + d;
                    let w = e.dot(&xl) + f;
                    if u <= 0.0 || w <= 0.0 {
                        return None;
                    }
                    u * w - (a * &xl + b).norm_squared()
                }
            };
            if !(s > 0.0) {
                return None;
            }
            total -= s.ln();
        }
        Some(total)
    }

    /// Barrier value, gradient and Hessian; also the multiplier-weighted
    /// constraint gradients for the residual report.
    fn eval(&self, x: &DVector<f64>) -> Option<Eval> {
        let n = self.n;
        let mut value = 0.0;
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        for t in &self.terms {
            let xl = gather(x, &t.support);
            let (s, g_local, h_local) = match &t.kind {
                LocalKind::Linear { a, b } => {
                    let s = b - a.dot(&xl);
                    if !(s > 0.0) {
                        return None;
                    }
                    let g = a / s;
                    let h = &g * g.transpose();
                    (s, g, h)
                }
                LocalKind::Quadratic { f, ftf2, q, c } => {
                    let fx = f * &xl;
                    let s = -(fx.norm_squared() + q.dot(&xl) + c);
                    if !(s > 0.0) {
                        return None;
                    }
                    let dg = f.transpose() * fx * 2.0 + q;
                    let g = &dg / s;
                    let h = &g * g.transpose() + ftf2 / s;
                    (s, g, h)
                }
                LocalKind::Cone {
                    a,
                    b,
                    c,
                    d,
                    e,
                    f,
                    hess_h,
                } => {
                    let u = c.dot(&xl) + d;
                    let w = e.dot(&xl) + f;
                    if u <= 0.0 || w <= 0.0 {
                        return None;
                    }
                    let z = a * &xl + b;
                    let s = u * w - z.norm_squared();
                    if !(s > 0.0) {
                        return None;
                    }
                    let dh = c * w + e * u - a.transpose() * z * 2.0;
                    let g = -&dh / s;
                    let h = &g * g.transpose() - hess_h / s;
                    (s, g, h)
                }
            };
            value -= s.ln();
            for (li, &gi) in t.support.iter().enumerate() {
                grad[gi] += g_local[li];
                for (lj, &gj) in t.support.iter().enumerate() {
                    hess[(gi, gj)] += h_local[(li, lj)];
                }
            }
        }
        Some(Eval { value, grad, hess })
    }

    fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for t in &self.terms {
            let xl = gather(x, &t.support);
            let v = match &t.kind {
                LocalKind::Linear { a, b } => a.dot(&xl) - b,
                LocalKind::Quadratic { f, q, c, .. } => (f * &xl).norm_squared() + q.dot(&xl) + c,
                LocalKind::Cone { a, b, c, d, e, f, .. } => {
                    let u = c.dot(&xl) + d;
                    let w = e.dot(&xl) + f;
                    ((a * &xl + b).norm_squared() - u * w).max(-u).max(-w)
                }
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Maximises `objective^T x` from a strictly feasible `x`. With
    /// `stop_below = Some(level)` the run ends as soon as the last variable
    /// (the feasibility-phase relaxation) drops to `level`.
    fn run(
        &self,
        objective: &DVector<f64>,
        mut x: DVector<f64>,
        settings: &SolverSettings,
        stop_below: Option<f64>,
        warm: bool,
    ) -> SolveResult {
        let n = self.n;
        let degree = self.degree.max(1.0);
        let mut t = settings.initial_weight;
        if warm {
            t = t.max(self.warm_weight(objective, &x)).min(degree / settings.tol);
        }
        let mut final_dec2: f64 = 0.0;
        let mut newton_steps = 0;
        let mut stage_objectives = Vec::new();
        let mut status = SolveStatus::MaxIterations;
        let early_exit = |x: &DVector<f64>| stop_below.is_some_and(|lvl| x[n - 1] <= lvl);

        'stages: for stage in 0..settings.max_stages {
            let mut dec2 = f64::INFINITY;
            for _ in 0..settings.max_newton_per_stage {
                let Some(ev) = self.eval(&x) else { break };
                let grad = -objective * t + &ev.grad;
                let Some(step) = newton_direction(&ev.hess, &grad) else {
                    break;
                };
                dec2 = (-grad.dot(&step)).max(0.0);
                if dec2 / 2.0 <= 1e-12 {
                    break;
                }
                let f0 = -t * objective.dot(&x) + ev.value;
                let mut alpha = 1.0;
                let accepted = loop {
                    let trial = &x + &step * alpha;
                    if let Some(bv) = self.value(&trial) {
                        let f1 = -t * objective.dot(&trial) + bv;
                        if f1 <= f0 - 0.25 * alpha * dec2 {
                            break Some(trial);
                        }
                    }
                    alpha *= 0.5;
                    if alpha < 1e-16 {
                        break None;
                    }
                };
                newton_steps += 1;
                match accepted {
                    Some(next) => x = next,
                    // round-off floor: the merit function no longer resolves
                    None => break,
                }
                if early_exit(&x) || x.amax() > 1e15 {
                    break 'stages;
                }
            }
            stage_objectives.push(objective.dot(&x));
            if early_exit(&x) {
                break;
            }
            if degree / t < settings.tol {
                // accept only a well-centred final point
                // Newton decrement below 1/2: the gap bound below still holds
                if dec2 <= 0.25 {
                    status = SolveStatus::Optimal;
                }
                final_dec2 = dec2;
                break;
            }
            if stage + 1 == settings.max_stages {
                break;
            }
            t *= settings.barrier_growth;
        }

        let mut residuals = self.residuals(objective, &x, t, degree);
        residuals.complementarity *= 1.0 + final_dec2.sqrt();
        if status == SolveStatus::Optimal && residuals.max() > settings.tol {
            status = SolveStatus::MaxIterations;
        }
        SolveResult {
            status,
            objective: objective.dot(&x),
            x,
            residuals,
            newton_steps,
            stage_objectives,
        }
    }

    /// Barrier weight whose central-path gradient best matches `x`:
    /// `argmin_t ||grad Phi(x) - t c||` in the Hessian-inverse norm.
    fn warm_weight(&self, objective: &DVector<f64>, x: &DVector<f64>) -> f64 {
        let Some(ev) = self.eval(x) else { return 0.0 };
        let (Some(hc), Some(hg)) = (
            newton_direction(&ev.hess, objective),
            newton_direction(&ev.hess, &ev.grad),
        ) else {
            return 0.0;
        };
        // newton_direction returns -H^{-1} v
        let den = objective.dot(&hc);
        if den == 0.0 {
            return 0.0;
        }
        let t = objective.dot(&hg) / den;
        if t.is_finite() {
            t
        } else {
            0.0
        }
    }

    /// KKT residuals at barrier weight `t`. Multipliers are the barrier
    /// gradients corrected by one Newton step, `(grad Phi + H dx) / t`, which
    /// avoids the cancellation in `1 / slack` once slacks approach round-off.
    fn residuals(&self, objective: &DVector<f64>, x: &DVector<f64>, t: f64, degree: f64) -> KktResiduals {
        let primal_feasibility = self.max_violation(x).max(0.0);
        let Some(ev) = self.eval(x) else {
            return KktResiduals {
                stationarity: f64::INFINITY,
                primal_feasibility,
                complementarity: f64::INFINITY,
            };
        };
        let grad = -objective * t + &ev.grad;
        let corrected = match newton_direction(&ev.hess, &grad) {
            Some(step) => &ev.grad + &ev.hess * step,
            None => ev.grad.clone(),
        };
        KktResiduals {
            stationarity: (-objective + corrected / t).amax(),
            primal_feasibility,
            complementarity: degree / t,
        }
    }
}

/// Solves `H d = -g` by Cholesky, adding a growing ridge if `H` is not
/// numerically positive definite.
fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = hess.diagonal().amax().max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..12 {
        let mut h = hess.clone();
        if ridge > 0.0 {
            for i in 0..h.nrows() {
                h[(i, i)] += ridge;
            }
        }
        if let Some(ch) = h.cholesky() {
            let d = ch.solve(&(-grad));
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 100.0 };
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn single_upper_bound() {
        let mut p = ConicProgram::new(1);
        p.maximize_variable(0);
        p.add_linear_le(v(&[1.0]), 3.0).unwrap();
        let r = solve(&p, 1e-8, None).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.x[0] - 3.0).abs() < 1e-7, "{}", r.x[0]);
        assert!(r.residuals.max() <= 1e-8);
    }

    #[test]
    fn rotated_cone_boundary() {
        // maximise c subject to x^2 <= 1 * (1 - c)
        let mut p = ConicProgram::new(2);
        p.maximize_variable(1);
        p.add_rotated_cone(v(&[1.0, 0.0]), 0.0, v(&[0.0, 0.0]), 1.0, v(&[0.0, -1.0]), 1.0)
            .unwrap();
        let r = solve(&p, 1e-9, None).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.x[1] - 1.0).abs() < 1e-7);
        assert!(r.x[0].abs() < 1e-4);
    }

    #[test]
    fn detects_infeasible() {
        let mut p = ConicProgram::new(1);
        p.add_linear_le(v(&[1.0]), 0.0).unwrap();
        p.add_linear_ge(v(&[1.0]), 1.0).unwrap();
        assert!(matches!(
            feasibility_phase(&p, 1e-9).unwrap(),
            Feasibility::Infeasible { min_relaxation } if min_relaxation > 0.0
        ));
        assert_eq!(solve(&p, 1e-8, None).unwrap().status, SolveStatus::InfeasibleDetected);
    }

    #[test]
    fn box_interior_point() {
        let mut p = ConicProgram::new(1);
        p.add_bounds(0, 0.0, 1.0).unwrap();
        match feasibility_phase(&p, 0.1).unwrap() {
            Feasibility::Point(x) => assert!(x[0] >= 0.1 && x[0] <= 0.9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn projection_onto_ball() {
        // min ||x - p||^2 s.t. ||x|| <= 1, as max -tau with ||x - p||^2 <= tau
        let p0 = [2.0, -1.0, 0.5];
        let n = 3;
        let mut prog = ConicProgram::new(n + 1);
        prog.maximize(v(&[0.0, 0.0, 0.0, -1.0])).unwrap();
        let mut f = DMatrix::zeros(n, n + 1);
        for i in 0..n {
            f[(i, i)] = 1.0;
        }
        let q = v(&[-2.0 * p0[0], -2.0 * p0[1], -2.0 * p0[2], -1.0]);
        let c: f64 = p0.iter().map(|a| a * a).sum();
        prog.add_quadratic_factored(f.clone(), q, c).unwrap();
        prog.add_second_order_cone(f, DVector::zeros(n), DVector::zeros(n + 1), 1.0)
            .unwrap();
        let r = solve(&prog, 1e-10, None).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        let norm = p0.iter().map(|a| a * a).sum::<f64>().sqrt();
        for (xi, pi) in r.x.iter().zip(p0.iter()) {
            assert!((xi - pi / norm).abs() < 1e-6);
        }
        assert!((r.x[n] - (norm - 1.0).powi(2)).abs() < 1e-6);
        // central path objective is nondecreasing
        for w in r.stage_objectives.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }
}
