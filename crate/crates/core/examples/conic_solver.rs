//! The conic solver on its own: a small program mixing linear, quadratic and
//! second-order cone constraints.

use ma_lab::conic::{solve, ConicProgram};
use nalgebra::{DMatrix, DVector};

fn main() -> ma_lab::Result<()> {
    // maximize x + 2y  s.t.  x^2 + y^2 <= 4,  ||(x - 1, y)|| <= 2.5 - 0.5 x,  y <= 1.5
    let mut p = ConicProgram::new(2);
    p.maximize(DVector::from_vec(vec![1.0, 2.0]))?;
    p.add_quadratic(DMatrix::identity(2, 2), DVector::zeros(2), -4.0)?;
    p.add_second_order_cone(
        DMatrix::identity(2, 2),
        DVector::from_vec(vec![-1.0, 0.0]),
        DVector::from_vec(vec![-0.5, 0.0]),
        2.5,
    )?;
    p.add_linear_le(DVector::from_vec(vec![0.0, 1.0]), 1.5)?;
    let r = solve(&p, 1e-9, None)?;
    println!("status {}  newton steps {}", r.status, r.newton_steps);
    println!("x = ({:.6}, {:.6})  objective {:.6}", r.x[0], r.x[1], r.objective);
    println!(
        "kkt: stationarity {:.1e}  primal {:.1e}  complementarity {:.1e}",
        r.residuals.stationarity, r.residuals.primal_feasibility, r.residuals.complementarity
    );
    Ok(())
}
