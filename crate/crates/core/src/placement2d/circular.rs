//! Closed-form optimum in a circle when `N = 4K`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::array::Geometry2D;
use crate::error::{Error, Result};

/// Rotation angles of the `K` four-antenna groups, all in `[0, pi/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationGroups {
    pub k: usize,
    pub rho: Vec<f64>,
}

impl RotationGroups {
    /// Checks ordering and both angular-gap inequalities for radius `a`
    /// and spacing `d`.
    pub fn check(&self, a: f64, d: f64) -> Result<()> {
        if self.rho.len() != self.k || self.k == 0 {
            return Err(Error::InfeasibleGeometry(format!(
                "expected {} rotation angles, got {}",
                self.k,
                self.rho.len()
            )));
        }
        let need = min_angle(a, d)?;
        let slack = 1e-12;
        for w in self.rho.windows(2) {
            if w[1] - w[0] < need - slack {
                return Err(Error::InfeasibleGeometry(format!(
                    "rotation gap {} below 2 asin(D/2A) = {need}",
                    w[1] - w[0]
                )));
            }
        }
        let wrap = self.rho[0] - self.rho[self.k - 1] + FRAC_PI_2;
        if wrap < need - slack {
            return Err(Error::InfeasibleGeometry(format!(
                "wrap-around gap {wrap} below 2 asin(D/2A) = {need}"
            )));
        }
        if self.rho[0] < 0.0 || self.rho[self.k - 1] >= FRAC_PI_2 {
            return Err(Error::InfeasibleGeometry("rotation angles must lie in [0, pi/2)".into()));
        }
        Ok(())
    }
}

fn min_angle(a: f64, d: f64) -> Result<f64> {
    if !(a > 0.0 && d > 0.0) {
        return Err(Error::InfeasibleGeometry(format!("A = {a} and D = {d} must be positive")));
    }
    if d > 2.0 * a {
        return Err(Error::InfeasibleGeometry(format!("D = {d} exceeds the diameter {}", 2.0 * a)));
    }
    Ok(2.0 * (d / (2.0 * a)).asin())
}

/// Evenly spread rotations `rho_k = (k-1) pi / (2K)`.
pub fn rotation_schedule(k: usize, a: f64, d: f64) -> Result<RotationGroups> {
    if k == 0 {
        return Err(Error::Unsupported("need at least one group of four antennas".into()));
    }
    let limit = 2.0 * a * (PI / (4 * k) as f64).sin();
    if d > limit * (1.0 + 1e-12) {
        return Err(Error::InfeasibleGeometry(format!(
            "D = {d} exceeds 2 A sin(pi/N) = {limit} for N = {}",
            4 * k
        )));
    }
    let groups = RotationGroups {
        k,
        rho: (0..k).map(|i| i as f64 * PI / (2 * k) as f64).collect(),
    };
    groups.check(a, d)?;
    Ok(groups)
}

/// Places group `k` at angles `rho_k + {0, pi/2, pi, 3pi/2}` on the circle of
/// radius `a` about the origin.
pub fn circular_from_groups(groups: &RotationGroups, a: f64, d: f64) -> Result<Geometry2D> {
    groups.check(a, d)?;
    let mut pts = Vec::with_capacity(4 * groups.k);
    for rho in &groups.rho {
        for m in 0..4 {
            let ang = rho + m as f64 * FRAC_PI_2;
            pts.push([a * ang.cos(), a * ang.sin()]);
        }
    }
    let g = Geometry2D::from_points(&pts)?;
    let (dmin, k, l) = g.min_pair_distance();
    if dmin < d * (1.0 - 1e-12) {
        return Err(Error::InfeasibleGeometry(format!(
            "antennas {k} and {l} are {dmin} apart, below D = {d}"
        )));
    }
    Ok(g)
}

/// Optimal layout of `n = 4K` antennas in a circle of radius `a` centred at
/// the origin: `var_x = var_y = a^2/2` and zero covariance.
pub fn circular_optimal(n: usize, a: f64, d: f64) -> Result<Geometry2D> {
    if n == 0 || !n.is_multiple_of(4) {
        return Err(Error::Unsupported(format!(
            "the circular construction needs N to be a multiple of 4, got N = {n}"
        )));
    }
    circular_from_groups(&rotation_schedule(n / 4, a, d)?, a, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::PositionStats;

    #[test]
    fn schedule_examples() {
        assert_eq!(rotation_schedule(1, 1.0, 0.1).unwrap().rho, vec![0.0]);
        let two = rotation_schedule(2, 1.0, 0.1).unwrap();
        assert_eq!(two.rho, vec![0.0, PI / 4.0]);
        let d = 2.0 * (PI / 12.0).sin();
        let three = rotation_schedule(3, 1.0, d).unwrap();
        let need = 2.0 * (d / 2.0).asin();
        for w in three.rho.windows(2) {
            assert!((w[1] - w[0] - need).abs() < 1e-12);
        }
        assert!(rotation_schedule(3, 1.0, 1.01 * d).is_err());
    }

    #[test]
    fn eight_on_unit_circle() {
        let g = circular_optimal(8, 1.0, 0.5).unwrap();
        let s = PositionStats::of_2d(&g);
        assert!((s.var_x - 0.5).abs() < 1e-12);
        assert!((s.var_y - 0.5).abs() < 1e-12);
        assert!(s.cov_xy.abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let want = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [h, h], [-h, h], [-h, -h], [h, -h]];
        for (p, w) in g.points().zip(want) {
            assert!((p[0] - w[0]).abs() < 1e-12 && (p[1] - w[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_n() {
        let e = circular_optimal(6, 1.0, 0.1).unwrap_err();
        assert!(matches!(e, Error::Unsupported(_)));
    }
}
