#![allow(dead_code)]

use ma_lab::array::Geometry1D;
use ma_lab::conic::ConicProgram;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Random feasible layout on `[0, a]` with gaps of at least `d`.
pub fn random_layout<R: Rng>(rng: &mut R, a: f64, d: f64, n: usize) -> Geometry1D {
    let slack = a - (n - 1) as f64 * d;
    let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=slack)).collect();
    u.sort_by(f64::total_cmp);
    Geometry1D::new(u.iter().enumerate().map(|(i, s)| s + i as f64 * d).collect()).unwrap()
}

fn v2(a: f64, b: f64) -> DVector<f64> {
    DVector::from_vec(vec![a, b])
}

/// Two-variable program inside `[-1, 1]^2` with a random mix of linear,
/// quadratic, second-order and rotated cone constraints. A random point is
/// kept strictly feasible so the program is never empty.
pub fn random_program<R: Rng>(rng: &mut R) -> ConicProgram {
    let mut p = ConicProgram::new(2);
    let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    p.maximize(v2(ang.cos(), ang.sin())).unwrap();
    p.add_bounds(0, -1.0, 1.0).unwrap();
    p.add_bounds(1, -1.0, 1.0).unwrap();
    let z = v2(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    let mut r = |lo: f64, hi: f64| rng.random_range(lo..hi);
    for _ in 0..(1 + (r(0.0, 3.0) as usize)) {
        match r(0.0, 4.0) as usize {
            0 => {
                let a = v2(r(-1.0, 1.0), r(-1.0, 1.0));
                let b = a.dot(&z) + r(0.05, 1.0);
                p.add_linear_le(a, b).unwrap();
            }
            1 => {
                let f = DMatrix::from_row_slice(2, 2, &[r(0.5, 2.0), r(-0.5, 0.5), 0.0, r(0.5, 2.0)]);
                let c0 = v2(r(-1.0, 1.0), r(-1.0, 1.0));
                let rad2 = (&f * (&z - &c0)).norm_squared() + r(0.05, 1.0);
                // ||F(x - c0)||^2 <= rad2
                let q = -2.0 * f.transpose() * (&f * &c0);
                let c = (&f * &c0).norm_squared() - rad2;
                p.add_quadratic_factored(f, q, c).unwrap();
            }
            2 => {
                let a = DMatrix::from_row_slice(2, 2, &[r(-1.0, 1.0), r(-1.0, 1.0), r(-1.0, 1.0), r(-1.0, 1.0)]);
                let g = v2(r(-0.5, 0.5), r(-0.5, 0.5));
                let h = v2(r(-0.5, 0.5), r(-0.5, 0.5));
                let k = (&a * &z + &g).norm() - h.dot(&z) + r(0.05, 1.0);
                p.add_second_order_cone(a, g, h, k).unwrap();
            }
            _ => {
                let a = v2(r(-1.0, 1.0), r(-1.0, 1.0));
                let b = r(-0.5, 0.5);
                let c = v2(r(-0.5, 0.5), r(-0.5, 0.5));
                let e = v2(r(-0.5, 0.5), r(-0.5, 0.5));
                let d = -c.dot(&z) + r(0.2, 1.5);
                let lhs = (a.dot(&z) + b).powi(2);
                let fe = e.dot(&z);
                // choose f so the inequality holds at z with margin
                let f = ((lhs + r(0.05, 0.5)) / (c.dot(&z) + d) - fe).max(-fe + 0.1);
                p.add_rotated_cone(a, b, c, d, e, f).unwrap();
            }
        }
    }
    p
}

/// Best objective over feasible points of a grid on `[-1, 1]^2`, refined
/// around the incumbent. Feasible sets are convex and the objective linear,
/// so a window around a non-optimal feasible point always holds a better one.
pub fn grid_oracle(p: &ConicProgram) -> f64 {
    let c = p.objective().clone();
    let feasible = |x: f64, y: f64| p.max_violation(&v2(x, y)) <= 0.0;
    let mut best: Option<(f64, f64, f64)> = None;
    let consider = |x: f64, y: f64, best: &mut Option<(f64, f64, f64)>| {
        if (-1.0..=1.0).contains(&x) && (-1.0..=1.0).contains(&y) && feasible(x, y) {
            let v = c[0] * x + c[1] * y;
            if best.is_none_or(|b| v > b.0) {
                *best = Some((v, x, y));
            }
        }
    };
    let m = 400;
    let h = 2.0 / m as f64;
    for i in 0..=m {
        for j in 0..=m {
            consider(-1.0 + i as f64 * h, -1.0 + j as f64 * h, &mut best);
        }
    }
    let mut step = h;
    for _ in 0..12 {
        let (_, bx, by) = best.expect("program has a feasible grid point");
        step /= 4.0;
        for i in -40..=40 {
            for j in -40..=40 {
                consider(bx + i as f64 * step, by + j as f64 * step, &mut best);
            }
        }
    }
    best.unwrap().0
}
