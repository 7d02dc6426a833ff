use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baseline::{generate_baseline, Extent, Scheme};
use super::config::{ScenarioConfig, SweepAxis};
use crate::array::{ArrayGeometry, SensingScene};
use crate::crb::{crb_1d, crb_2d};
use crate::error::Result;
use crate::estimation::{monte_carlo_mse, MusicOptions};
use crate::placement1d::{optimal_apv_1d, Segment1D};
use crate::placement2d::{circular_optimal, initial_layout, optimize_2d_restarts};
use crate::region::Region;

/// One (sweep value, scheme) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep: f64,
    pub scheme: Scheme,
    pub crb_u: Option<f64>,
    pub crb_v: Option<f64>,
    pub mse_u: Option<f64>,
    pub mse_v: Option<f64>,
    pub se_u: Option<f64>,
    pub se_v: Option<f64>,
    /// Seconds spent on this row, geometry construction included the first
    /// time a layout is built. Not part of the emitted files.
    #[serde(skip)]
    pub wall_time: f64,
    /// `ok`, `fallback-sca` or `failed: <reason>`.
    pub status: String,
}

impl ResultRow {
    pub fn failed(&self) -> bool {
        self.status.starts_with("failed")
    }
}

/// Region with its size set to `value`: circle radius, square side, or a
/// scale factor about the vertex mean for polygons.
pub fn resize_region(region: &Region, value: f64) -> Result<Region> {
    let r = match region {
        Region::Circle { center, .. } => Region::Circle {
            center: *center,
            radius: value,
        },
        Region::Square { min, side } => {
            let c = [min[0] + side / 2.0, min[1] + side / 2.0];
            Region::Square {
                min: [c[0] - value / 2.0, c[1] - value / 2.0],
                side: value,
            }
        }
        Region::Polygon { vertices } => {
            let k = vertices.len() as f64;
            let c = vertices
                .iter()
                .fold([0.0, 0.0], |a, v| [a[0] + v[0] / k, a[1] + v[1] / k]);
            Region::Polygon {
                vertices: vertices
                    .iter()
                    .map(|v| [c[0] + value * (v[0] - c[0]), c[1] + value * (v[1] - c[1])])
                    .collect(),
            }
        }
    };
    r.validate()?;
    Ok(r)
}

#[derive(Debug, Clone, Copy)]
struct Point {
    snr_db: f64,
    antennas: usize,
    aperture: Option<f64>,
}

type Key = (Scheme, usize, Option<u64>);

fn key(s: Scheme, p: &Point) -> Key {
    (s, p.antennas, p.aperture.map(f64::to_bits))
}

fn extent(cfg: &ScenarioConfig, aperture: Option<f64>) -> Result<Extent> {
    if let Some(seg) = &cfg.segment {
        return Ok(Extent::Segment {
            length: aperture.unwrap_or(seg.length),
        });
    }
    let region = cfg.region.as_ref().expect("validated");
    Ok(Extent::Region(match aperture {
        Some(a) => resize_region(region, a)?,
        None => region.clone(),
    }))
}

struct Built {
    geometry: ArrayGeometry,
    fallback: bool,
    seconds: f64,
}

fn build(cfg: &ScenarioConfig, scene: &SensingScene, scheme: Scheme, p: &Point) -> Result<Built> {
    let t0 = Instant::now();
    let d = cfg.scene.min_spacing;
    let n = p.antennas;
    let ext = extent(cfg, p.aperture)?;
    let sca = |region: &Region| -> Result<ArrayGeometry> {
        let init = initial_layout(region, n, d, &cfg.sca, cfg.explicit.as_ref())?;
        Ok(optimize_2d_restarts(scene, region, &cfg.sca, &init)?.0.into())
    };
    let mut fallback = false;
    let geometry = match (scheme, &ext) {
        (Scheme::Optimal1d, Extent::Segment { length }) => {
            optimal_apv_1d(&Segment1D::new(*length, d, n)?)?.into()
        }
        (Scheme::Sca2d, Extent::Region(region)) => sca(region)?,
        (Scheme::CircularOptimal, Extent::Region(region)) => {
            if n.is_multiple_of(4) {
                let c = region.enclosing_circles()?.inscribed;
                circular_optimal(n, c.radius, d)?
                    .translated(c.center[0], c.center[1])
                    .into()
            } else {
                fallback = true;
                sca(region)?
            }
        }
        (Scheme::Explicit, _) => {
            let g = cfg.explicit.clone().expect("validated");
            if g.len() != n {
                return Err(crate::Error::Config(format!(
                    "explicit geometry has {} antennas, scenario asks for {n}",
                    g.len()
                )));
            }
            g.into()
        }
        (s, e) => generate_baseline(s, n, e, d)?,
    };
    Ok(Built {
        geometry,
        fallback,
        seconds: t0.elapsed().as_secs_f64(),
    })
}

fn crb_of(scene: &SensingScene, g: &ArrayGeometry) -> (f64, Option<f64>) {
    match g {
        ArrayGeometry::Linear(l) => (crb_1d(scene, l).crb_u, None),
        ArrayGeometry::Planar(p) => {
            let r = crb_2d(scene, p);
            (r.crb_u, r.crb_v)
        }
    }
}

/// A layout built during a scenario, tagged with the first sweep value that
/// used it.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltLayout {
    pub sweep: f64,
    pub scheme: Scheme,
    pub geometry: ArrayGeometry,
}

/// Rows plus every layout that was built successfully, in sweep then scheme order.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub rows: Vec<ResultRow>,
    pub layouts: Vec<BuiltLayout>,
}

/// Evaluates every scheme at every sweep value. Rows come out in sweep order,
/// then scheme order, regardless of thread count. Every row reuses the master
/// seed so schemes see the same noise draws.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    Ok(run_scenario_full(cfg)?.rows)
}

/// [`run_scenario`] that also hands back the layouts.
pub fn run_scenario_full(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    cfg.validate()?;
    let points: Vec<Point> = cfg
        .sweep
        .values
        .iter()
        .map(|&v| {
            let mut p = Point {
                snr_db: cfg.scene.snr_db,
                antennas: cfg.scene.antennas,
                aperture: None,
            };
            match cfg.sweep.axis {
                SweepAxis::Snr => p.snr_db = v,
                SweepAxis::Antennas => p.antennas = v as usize,
                SweepAxis::Aperture => p.aperture = Some(v),
            }
            p
        })
        .collect();

    let base_scene = cfg.scene.scene(cfg.scene.snr_db)?;
    let mut jobs: Vec<(Key, Scheme, Point)> = Vec::new();
    for p in &points {
        for &s in &cfg.schemes {
            let k = key(s, p);
            if !jobs.iter().any(|j| j.0 == k) {
                jobs.push((k, s, *p));
            }
        }
    }
    let built: HashMap<Key, std::result::Result<Built, String>> = jobs
        .par_iter()
        .map(|(k, s, p)| (*k, build(cfg, &base_scene, *s, p).map_err(|e| e.to_string())))
        .collect();

    let options = MusicOptions {
        grid_step: cfg.grid_step,
        refine: true,
    };
    let mut charged: HashMap<Key, bool> = HashMap::new();
    let mut tasks = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for &s in &cfg.schemes {
            let k = key(s, p);
            let first = charged.insert(k, true).is_none();
            tasks.push((i, p, s, k, first));
        }
    }
    let rows = tasks
        .par_iter()
        .map(|&(i, p, scheme, k, first)| {
            let t0 = Instant::now();
            let sweep = cfg.sweep.values[i];
            let mut row = ResultRow {
                sweep,
                scheme,
                crb_u: None,
                crb_v: None,
                mse_u: None,
                mse_v: None,
                se_u: None,
                se_v: None,
                wall_time: 0.0,
                status: "ok".into(),
            };
            let b = match &built[&k] {
                Ok(b) => b,
                Err(e) => {
                    row.status = format!("failed: {e}");
                    return Ok(row);
                }
            };
            if b.fallback {
                row.status = "fallback-sca".into();
            }
            let scene = cfg.scene.scene(p.snr_db)?;
            let (u, v) = crb_of(&scene, &b.geometry);
            row.crb_u = Some(u);
            row.crb_v = v;
            if cfg.trials > 0 {
                match monte_carlo_mse(&scene, &b.geometry, cfg.trials, cfg.seed, &options) {
                    Ok(batch) => {
                        row.mse_u = Some(batch.mse_u);
                        row.se_u = Some(batch.se_u);
                        row.mse_v = batch.mse_v;
                        row.se_v = batch.se_v;
                    }
                    Err(e) => row.status = format!("failed: {e}"),
                }
            }
            row.wall_time = t0.elapsed().as_secs_f64() + if first { b.seconds } else { 0.0 };
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let layouts = tasks
        .iter()
        .filter(|t| t.4)
        .filter_map(|&(i, _, scheme, k, _)| {
            built[&k].as_ref().ok().map(|b| BuiltLayout {
                sweep: cfg.sweep.values[i],
                scheme,
                geometry: b.geometry.clone(),
            })
        })
        .collect();
    Ok(ScenarioOutput { rows, layouts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(trials: usize) -> ScenarioConfig {
        ScenarioConfig::from_toml(&format!(
            r#"
            seed = 11
            trials = {trials}
            schemes = ["optimal-1d", "ulaf", "ulah"]
            [scene]
            antennas = 16
            snr_db = 10
            min_spacing = 0.5
            u = 0.71
            [segment]
            length = 10
            [sweep]
            axis = "snr"
            values = [0, 20]
            "#
        ))
        .unwrap()
    }

    #[test]
    fn crb_only_rows() {
        let rows = run_scenario(&linear(0)).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].scheme, Scheme::Optimal1d);
        assert_eq!(rows[3].sweep, 20.0);
        assert!(rows.iter().all(|r| r.mse_u.is_none() && r.status == "ok"));
        // 20 dB lowers the bound by exactly 100x for a fixed layout.
        let ratio = rows[0].crb_u.unwrap() / rows[3].crb_u.unwrap();
        assert!((ratio - 100.0).abs() < 1e-9);
        assert!(rows[0].crb_u < rows[1].crb_u && rows[1].crb_u < rows[2].crb_u);
    }

    #[test]
    fn monte_carlo_rows_are_reproducible() {
        let a = run_scenario(&linear(20)).unwrap();
        let b = run_scenario(&linear(20)).unwrap();
        let bytes = |r: &[ResultRow]| {
            let mut v = Vec::new();
            crate::bench::write_csv(r, &mut v).unwrap();
            v
        };
        assert_eq!(bytes(&a), bytes(&b));
        assert!(a.iter().all(|r| r.mse_u.is_some() && r.se_u.is_some()));
    }

    #[test]
    fn circular_fallback_and_failure() {
        let cfg = ScenarioConfig::from_toml(
            r#"
            trials = 0
            schemes = ["circular-optimal", "upah"]
            [scene]
            antennas = 6
            snr_db = 10
            min_spacing = 0.5
            u = 0.35
            v = 0.71
            [region]
            shape = "circle"
            center = [0, 0]
            radius = 1.0
            [sweep]
            axis = "antennas"
            values = [6, 8, 40]
            "#,
        )
        .unwrap();
        let rows = run_scenario(&cfg).unwrap();
        assert_eq!(rows[0].status, "fallback-sca");
        assert_eq!(rows[2].status, "ok");
        let v = rows[2].crb_v.unwrap();
        assert!((rows[2].crb_u.unwrap() - v).abs() < 1e-12 * v);
        assert!(rows[4].failed(), "{}", rows[4].status);
        assert!(rows[5].failed());
    }

    #[test]
    fn resize_keeps_center() {
        let sq = Region::square_cornered(4.0).unwrap();
        assert_eq!(
            resize_region(&sq, 2.0).unwrap(),
            Region::Square {
                min: [1.0, 1.0],
                side: 2.0
            }
        );
        assert!(resize_region(&sq, -1.0).is_err());
    }
}
