//! Convex movement regions and their enclosing circles.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::conic::{self, ConicProgram, SolveStatus};
use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Convex 2D region in which antennas may be placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    Circle { center: Point, radius: f64 },
    /// Axis-aligned square `[min_x, min_x + side] x [min_y, min_y + side]`.
    Square { min: Point, side: f64 },
    /// Vertices in counterclockwise order.
    Polygon { vertices: Vec<Point> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

/// Largest inscribed and smallest circumscribed circles of a region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnclosingCircles {
    pub inscribed: Circle,
    pub circumscribed: Circle,
}

/// Half-plane `normal . p <= offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: Point,
    pub offset: f64,
}

impl Region {
    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        let r = Region::Circle { center, radius };
        r.validate()?;
        Ok(r)
    }

    /// `[0, side]^2`.
    pub fn square_cornered(side: f64) -> Result<Self> {
        let r = Region::Square {
            min: [0.0, 0.0],
            side,
        };
        r.validate()?;
        Ok(r)
    }

    /// `[-side/2, side/2]^2`.
    pub fn square_centered(side: f64) -> Result<Self> {
        let r = Region::Square {
            min: [-side / 2.0, -side / 2.0],
            side,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        let r = Region::Polygon { vertices };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRegion(m));
        match self {
            Region::Circle { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return bad(format!("circle radius {radius} must be positive and finite"));
                }
            }
            Region::Square { min, side } => {
                if !(side.is_finite() && *side > 0.0) || !min.iter().all(|c| c.is_finite()) {
                    return bad(format!("square side {side} must be positive and finite"));
                }
            }
            Region::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return bad(format!("polygon needs >= 3 vertices, got {}", vertices.len()));
                }
                if vertices.iter().flatten().any(|c| !c.is_finite()) {
                    return bad("non-finite polygon vertex".into());
                }
                let area = signed_area(vertices);
                let scale = bbox_of(vertices).1.max(1e-300);
                if area <= 1e-12 * scale * scale {
                    return bad(format!(
                        "polygon must be counterclockwise with positive area (signed area {area})"
                    ));
                }
                let m = vertices.len();
                for i in 0..m {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % m];
                    let c = vertices[(i + 2) % m];
                    let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                    if cross < -1e-12 * scale * scale {
                        return bad(format!("polygon is not convex at vertex {}", (i + 1) % m));
                    }
                    if (b[0] - a[0]).hypot(b[1] - a[1]) <= 1e-12 * scale {
                        return bad(format!("repeated polygon vertex {i}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Outward half-planes; empty for a circle.
    pub fn half_planes(&self) -> Vec<HalfPlane> {
        match self {
            Region::Circle { .. } => Vec::new(),
            Region::Square { min, side } => vec![
                HalfPlane {
                    normal: [1.0, 0.0],
                    offset: min[0] + side,
                },
                HalfPlane {
                    normal: [-1.0, 0.0],
                    offset: -min[0],
                },
                HalfPlane {
                    normal: [0.0, 1.0],
                    offset: min[1] + side,
                },
                HalfPlane {
                    normal: [0.0, -1.0],
                    offset: -min[1],
                },
            ],
            Region::Polygon { vertices } => {
                let m = vertices.len();
                (0..m)
                    .map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % m];
                        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                        let len = dx.hypot(dy);
                        let normal = [dy / len, -dx / len];
                        HalfPlane {
                            normal,
                            offset: normal[0] * a[0] + normal[1] * a[1],
                        }
                    })
                    .collect()
            }
        }
    }

    /// How far `p` lies outside the region (0 inside). For polygons this is
    /// the largest half-plane excess.
    pub fn violation(&self, p: Point) -> f64 {
        match self {
            Region::Circle { center, radius } => {
                ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).max(0.0)
            }
            _ => self
                .half_planes()
                .iter()
                .map(|h| h.normal[0] * p[0] + h.normal[1] * p[1] - h.offset)
                .fold(0.0, f64::max),
        }
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.violation(p) <= tol
    }

    /// Axis-aligned bounding box as `(min corner, max corner)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            Region::Circle { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            Region::Square { min, side } => (*min, [min[0] + side, min[1] + side]),
            Region::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Inscribed and circumscribed circles. Exact for circles and squares;
    /// for polygons the circumscribed circle is the minimum enclosing circle
    /// of the vertices and the inscribed one solves
    /// `max r  s.t.  n_i . c + r <= b_i` over the edges.
    pub fn enclosing_circles(&self) -> Result<EnclosingCircles> {
        self.validate()?;
        match self {
            Region::Circle { center, radius } => {
                let c = Circle {
                    center: *center,
                    radius: *radius,
                };
                Ok(EnclosingCircles {
                    inscribed: c,
                    circumscribed: c,
                })
            }
            Region::Square { min, side } => {
                let center = [min[0] + side / 2.0, min[1] + side / 2.0];
                Ok(EnclosingCircles {
                    inscribed: Circle {
                        center,
                        radius: side / 2.0,
                    },
                    circumscribed: Circle {
                        center,
                        radius: side / std::f64::consts::SQRT_2,
                    },
                })
            }
            Region::Polygon { vertices } => Ok(EnclosingCircles {
                inscribed: max_inscribed_circle(&self.half_planes())?,
                circumscribed: min_enclosing_circle(vertices),
            }),
        }
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let m = v.len();
    (0..m)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % m];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        / 2.0
}

fn bbox_of(v: &[Point]) -> (Point, f64) {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in v {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, (hi[0] - lo[0]).max(hi[1] - lo[1]))
}

fn max_inscribed_circle(planes: &[HalfPlane]) -> Result<Circle> {
    // variables: cx, cy, r
    let mut p = ConicProgram::new(3);
    p.maximize_variable(2);
    for h in planes {
        p.add_linear_le(DVector::from_vec(vec![h.normal[0], h.normal[1], 1.0]), h.offset)?;
    }
    let res = conic::solve(&p, 1e-12, None)?;
    if res.status != SolveStatus::Optimal {
        return Err(Error::InvalidRegion(format!(
            "inscribed-circle program ended with status {}",
            res.status
        )));
    }
    Ok(Circle {
        center: [res.x[0], res.x[1]],
        radius: res.x[2],
    })
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn circle_two(a: Point, b: Point) -> Circle {
    Circle {
        center: [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0],
        radius: dist(a, b) / 2.0,
    }
}

fn circle_three(a: Point, b: Point, c: Point) -> Circle {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    if d.abs() < 1e-300 {
        // collinear: widest pair
        let pairs = [circle_two(a, b), circle_two(a, c), circle_two(b, c)];
        return pairs
            .into_iter()
            .max_by(|p, q| p.radius.total_cmp(&q.radius))
            .unwrap();
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    Circle {
        center: [a[0] + ux, a[1] + uy],
        radius: ux.hypot(uy),
    }
}

fn inside(c: &Circle, p: Point) -> bool {
    dist(c.center, p) <= c.radius * (1.0 + 1e-12) + 1e-15
}

/// Smallest circle containing every point (incremental Welzl).
pub fn min_enclosing_circle(points: &[Point]) -> Circle {
    let mut c = Circle {
        center: points[0],
        radius: 0.0,
    };
    for i in 1..points.len() {
        if inside(&c, points[i]) {
            continue;
        }
        c = Circle {
            center: points[i],
            radius: 0.0,
        };
        for j in 0..i {
            if inside(&c, points[j]) {
                continue;
            }
            c = circle_two(points[i], points[j]);
            for k in 0..j {
                if !inside(&c, points[k]) {
                    c = circle_three(points[i], points[j], points[k]);
                }
            }
        }
    }
    c
}
