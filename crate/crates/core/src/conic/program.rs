use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One convex constraint over the program variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// `a^T x <= b`
    Linear { a: DVector<f64>, b: f64 },
    /// `||F x||^2 + q^T x + c <= 0`, i.e. `x^T (F^T F) x + q^T x + c <= 0`.
    Quadratic {
        factor: DMatrix<f64>,
        q: DVector<f64>,
        c: f64,
    },
    /// `||A x + b||^2 <= (c^T x + d)(e^T x + f)` with both right-hand factors
    /// nonnegative. A scalar left-hand side is the rotated cone; `c = e`,
    /// `d = f` gives an ordinary second-order cone.
    RotatedCone {
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
        d: f64,
        e: DVector<f64>,
        f: f64,
    },
}

/// Per-constraint evaluation at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintValue {
    /// Distance to the boundary in the constraint's natural form: `b - a^T x`,
    /// `-(||Fx||^2 + q^T x + c)`, or `(c^T x + d)(e^T x + f) - ||Ax + b||^2`.
    pub slack: f64,
    /// Smallest cone factor; `+inf` for non-cone constraints.
    pub factor_min: f64,
}

impl ConstraintValue {
    pub fn is_strict(&self) -> bool {
        self.slack > 0.0 && self.factor_min > 0.0
    }

    pub fn violation(&self) -> f64 {
        (-self.slack).max(-self.factor_min).max(0.0)
    }
}

impl Constraint {
    pub fn dim(&self) -> usize {
        match self {
            Constraint::Linear { a, .. } => a.len(),
            Constraint::Quadratic { q, .. } => q.len(),
            Constraint::RotatedCone { c, .. } => c.len(),
        }
    }

    /// Logarithmic barrier degree.
    pub fn barrier_degree(&self) -> f64 {
        match self {
            Constraint::RotatedCone { .. } => 2.0,
            _ => 1.0,
        }
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> ConstraintValue {
        match self {
            Constraint::Linear { a, b } => ConstraintValue {
                slack: b - a.dot(x),
                factor_min: f64::INFINITY,
            },
            Constraint::Quadratic { factor, q, c } => {
                let fx = factor * x;
                ConstraintValue {
                    slack: -(fx.norm_squared() + q.dot(x) + c),
                    factor_min: f64::INFINITY,
                }
            }
            Constraint::RotatedCone { a, b, c, d, e, f } => {
                let z = a * x + b;
                let s = c.dot(x) + d;
                let t = e.dot(x) + f;
                ConstraintValue {
                    slack: s * t - z.norm_squared(),
                    factor_min: s.min(t),
                }
            }
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedProgram(m));
        let finite_v = |v: &DVector<f64>| v.iter().all(|x| x.is_finite());
        let finite_m = |m: &DMatrix<f64>| m.iter().all(|x| x.is_finite());
        match self {
            Constraint::Linear { a, b } => {
                if a.len() != n {
                    return bad(format!("linear row has {} entries, expected {n}", a.len()));
                }
                if !finite_v(a) || !b.is_finite() {
                    return bad("non-finite linear data".into());
                }
            }
            Constraint::Quadratic { factor, q, c } => {
                if factor.ncols() != n || q.len() != n {
                    return bad(format!(
                        "quadratic factor is {}x{} and q has {} entries, expected {n} columns",
                        factor.nrows(),
                        factor.ncols(),
                        q.len()
                    ));
                }
                if !finite_m(factor) || !finite_v(q) || !c.is_finite() {
                    return bad("non-finite quadratic data".into());
                }
            }
            Constraint::RotatedCone { a, b, c, d, e, f } => {
                if a.ncols() != n || a.nrows() != b.len() || c.len() != n || e.len() != n {
                    return bad("rotated cone dimensions are inconsistent".into());
                }
                if !finite_m(a)
                    || !finite_v(b)
                    || !finite_v(c)
                    || !finite_v(e)
                    || !d.is_finite()
                    || !f.is_finite()
                {
                    return bad("non-finite cone data".into());
                }
            }
        }
        Ok(())
    }
}

/// Maximise a linear objective over linear, convex-quadratic and
/// rotated-cone constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    n: usize,
    objective: DVector<f64>,
    constraints: Vec<Constraint>,
}

impl ConicProgram {
    /// A program over `n` variables with a zero objective.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            objective: DVector::zeros(n),
            constraints: Vec::new(),
        }
    }

    pub fn num_variables(&self) -> usize {
        self.n
    }

    pub fn objective(&self) -> &DVector<f64> {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn maximize(&mut self, objective: DVector<f64>) -> Result<&mut Self> {
        if objective.len() != self.n {
            return Err(Error::MalformedProgram(format!(
                "objective has {} entries, expected {}",
                objective.len(),
                self.n
            )));
        }
        self.objective = objective;
        Ok(self)
    }

    /// Sets the objective to maximise the single variable `index`.
    pub fn maximize_variable(&mut self, index: usize) -> &mut Self {
        self.objective = DVector::zeros(self.n);
        self.objective[index] = 1.0;
        self
    }

    pub fn push(&mut self, constraint: Constraint) -> Result<&mut Self> {
        constraint.validate(self.n)?;
        self.constraints.push(constraint);
        Ok(self)
    }

    /// `a^T x <= b`
    pub fn add_linear_le(&mut self, a: DVector<f64>, b: f64) -> Result<&mut Self> {
        self.push(Constraint::Linear { a, b })
    }

    /// `a^T x >= b`
    pub fn add_linear_ge(&mut self, a: DVector<f64>, b: f64) -> Result<&mut Self> {
        self.push(Constraint::Linear { a: -a, b: -b })
    }

    /// `lo <= x_i <= hi`; either side may be infinite.
    pub fn add_bounds(&mut self, index: usize, lo: f64, hi: f64) -> Result<&mut Self> {
        let unit = DVector::from_fn(self.n, |i, _| if i == index { 1.0 } else { 0.0 });
        if hi.is_finite() {
            self.add_linear_le(unit.clone(), hi)?;
        }
        if lo.is_finite() {
            self.add_linear_ge(unit, lo)?;
        }
        Ok(self)
    }

    /// `x^T Q x + q^T x + c <= 0`. `Q` must be symmetric positive semidefinite;
    /// it is stored through a factor `F` with `F^T F = Q`.
    pub fn add_quadratic(
        &mut self,
        q_matrix: DMatrix<f64>,
        q: DVector<f64>,
        c: f64,
    ) -> Result<&mut Self> {
        let factor = psd_factor(&q_matrix)?;
        self.push(Constraint::Quadratic { factor, q, c })
    }

    /// `||F x||^2 + q^T x + c <= 0`.
    pub fn add_quadratic_factored(
        &mut self,
        factor: DMatrix<f64>,
        q: DVector<f64>,
        c: f64,
    ) -> Result<&mut Self> {
        self.push(Constraint::Quadratic { factor, q, c })
    }

    /// `(a^T x + b)^2 <= (c^T x + d)(e^T x + f)`, both factors nonnegative.
    #[allow(clippy::too_many_arguments)]
    pub fn add_rotated_cone(
        &mut self,
        a: DVector<f64>,
        b: f64,
        c: DVector<f64>,
        d: f64,
        e: DVector<f64>,
        f: f64,
    ) -> Result<&mut Self> {
        let a = DMatrix::from_row_slice(1, a.len(), a.as_slice());
        self.push(Constraint::RotatedCone {
            a,
            b: DVector::from_element(1, b),
            c,
            d,
            e,
            f,
        })
    }

    /// `||F x + g|| <= h^T x + k`.
    pub fn add_second_order_cone(
        &mut self,
        factor: DMatrix<f64>,
        g: DVector<f64>,
        h: DVector<f64>,
        k: f64,
    ) -> Result<&mut Self> {
        self.push(Constraint::RotatedCone {
            a: factor,
            b: g,
            c: h.clone(),
            d: k,
            e: h,
            f: k,
        })
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> Vec<ConstraintValue> {
        self.constraints.iter().map(|c| c.evaluate(x)).collect()
    }

    /// Largest constraint violation at `x` in the original (unscaled) form.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        self.evaluate(x)
            .iter()
            .map(ConstraintValue::violation)
            .fold(0.0, f64::max)
    }

    pub fn is_strictly_feasible(&self, x: &DVector<f64>) -> bool {
        self.evaluate(x).iter().all(ConstraintValue::is_strict)
    }

    pub fn barrier_degree(&self) -> f64 {
        self.constraints.iter().map(Constraint::barrier_degree).sum()
    }

    /// Pretty JSON for failure triage.
    pub fn to_debug_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `F` with `F^T F = Q`, dropping null directions. Rejects matrices that are
/// asymmetric or have a negative eigenvalue beyond round-off.
fn psd_factor(q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !q.is_square() {
        return Err(Error::MalformedProgram("quadratic matrix is not square".into()));
    }
    let scale = q.amax().max(1.0);
    if (q - q.transpose()).amax() > 1e-10 * scale {
        return Err(Error::MalformedProgram("quadratic matrix is not symmetric".into()));
    }
    let eig = SymmetricEigen::new(q.clone());
    let min = eig.eigenvalues.min();
    if min < -1e-10 * scale {
        return Err(Error::MalformedProgram(format!(
            "quadratic matrix is not PSD (eigenvalue {min})"
        )));
    }
    let rows: Vec<_> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 1e-14 * scale)
        .map(|(i, &l)| (eig.eigenvectors.column(i) * l.sqrt()).transpose())
        .collect();
    if rows.is_empty() {
        return Ok(DMatrix::zeros(0, q.ncols()));
    }
    Ok(DMatrix::from_rows(&rows))
}
