//! Command-line front end. Lengths given on the command line are in the same
//! unit as `--wavelength` and are converted to wavelengths on entry; all
//! output coordinates are in wavelengths.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::array::{ArrayGeometry, Geometry1D, Geometry2D, SensingScene, SpatialAngles};
use crate::bench::{self, generate_baseline, Extent, ScenarioConfig, Scheme};
use crate::crb::{crb_1d, crb_2d, minmax_crb, region_bounds};
use crate::error::{Error, Result};
use crate::estimation::{correlation_map, monte_carlo_mse, music, synthesize, MusicOptions};
use crate::placement1d::{adjustment_sweep, optimal_apv_1d, p_closed_form, Segment1D};
use crate::placement2d::{circular_optimal, delta_of, optimize_2d_restarts, upaf_init, ScaConfig};
use crate::region::Region;

#[derive(Debug, Parser)]
#[command(name = "ma-lab", version, about = "Movable-antenna array placement and angle estimation")]
pub struct Cli {
    /// Master RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Monte Carlo trials per point.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Angle grid step for MUSIC and correlation maps.
    #[arg(long, global = true)]
    pub grid_step: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal linear layout on a segment, optionally with the one-at-a-time
    /// adjustment sequence from a start layout.
    #[command(name = "optimize-1d")]
    Optimize1d {
        #[arg(long)]
        length: f64,
        #[arg(long)]
        antennas: usize,
        #[arg(long, default_value_t = 0.5)]
        min_spacing: f64,
        /// Comma-separated start positions.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        wavelength: f64,
    },
    /// Planar layout maximising the smaller axis variance in a region.
    #[command(name = "optimize-2d")]
    Optimize2d {
        /// `square:SIDE`, `circle:RADIUS` or `polygon:x,y;x,y;...`.
        #[arg(long)]
        region: String,
        #[arg(long)]
        antennas: usize,
        #[arg(long, default_value_t = 0.5)]
        min_spacing: f64,
        /// Start layout CSV (`x,y` header); UPAF when omitted.
        #[arg(long)]
        init: Option<PathBuf>,
        /// TOML file with SCA settings.
        #[arg(long)]
        sca_config: Option<PathBuf>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Write the per-phase trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        wavelength: f64,
    },
    /// Bounds for a layout, plus region bounds when a region is given.
    Crb {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        scene: SceneArgs,
    },
    /// Monte Carlo MUSIC error against the bound; `--spectrum` dumps one
    /// pseudo-spectrum.
    Music {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Runs a scenario file.
    Sweep {
        config: PathBuf,
    },
    /// Steering-vector correlation map against the true direction.
    Correlate {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
        #[arg(long, allow_hyphen_values = true)]
        v: Option<f64>,
        /// Print this many strongest peaks to stderr.
        #[arg(long, default_value_t = 5)]
        peaks: usize,
    },
}

/// Selects a layout: a file, or a scheme on a segment or region.
#[derive(Debug, Args)]
pub struct GeometryArgs {
    /// Layout CSV with an `x` column and optionally `y`.
    #[arg(long, conflicts_with = "scheme")]
    pub geometry: Option<PathBuf>,
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<Scheme>,
    #[arg(long)]
    pub antennas: Option<usize>,
    /// Segment length for linear schemes.
    #[arg(long)]
    pub length: Option<f64>,
    /// `square:SIDE`, `circle:RADIUS` or `polygon:x,y;x,y;...`.
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub min_spacing: f64,
    #[arg(long, default_value_t = 1.0)]
    pub wavelength: f64,
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    #[arg(long, default_value_t = 15.0, allow_hyphen_values = true)]
    pub snr_db: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub u: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub snapshots: usize,
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    serde_json::from_value(Value::String(s.into())).map_err(|_| format!("unknown scheme {s}"))
}

fn nums(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("not a number: {t}")))
        })
        .collect()
}

/// Parses `square:SIDE` (centred at the origin), `circle:RADIUS` (origin) or
/// `polygon:x1,y1;x2,y2;...` (counter-clockwise), scaling lengths by `1/wavelength`.
pub fn parse_region(spec: &str, wavelength: f64) -> Result<Region> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("region {spec:?} is not KIND:PARAMS")))?;
    let k = 1.0 / wavelength;
    match kind {
        "square" => Region::square_centered(single(rest)? * k),
        "circle" => Region::circle([0.0, 0.0], single(rest)? * k),
        "polygon" => {
            let vertices = rest
                .split(';')
                .map(|p| match nums(p)?.as_slice() {
                    [x, y] => Ok([x * k, y * k]),
                    _ => Err(Error::Config(format!("polygon vertex {p:?} needs two numbers"))),
                })
                .collect::<Result<_>>()?;
            Region::polygon(vertices)
        }
        _ => Err(Error::Config(format!("unknown region kind {kind:?}"))),
    }
}

fn single(s: &str) -> Result<f64> {
    match nums(s)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(Error::Config(format!("expected one number, got {s:?}"))),
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.display().to_string(),
        source: e,
    }
}

/// Reads a layout CSV with header `x` or `x,y`.
pub fn read_geometry(path: &Path, wavelength: f64) -> Result<ArrayGeometry> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rd.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let ix = col("x").ok_or_else(|| Error::Config(format!("{}: missing x column", path.display())))?;
    let iy = col("y");
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in rd.records() {
        let rec = rec?;
        let get = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Config(format!("{}: bad row {:?}", path.display(), rec)))
        };
        xs.push(get(ix)? / wavelength);
        if let Some(iy) = iy {
            ys.push(get(iy)? / wavelength);
        }
    }
    Ok(match iy {
        Some(_) => Geometry2D::new(xs, ys)?.into(),
        None => Geometry1D::new(xs)?.into(),
    })
}

impl GeometryArgs {
    fn region(&self) -> Result<Option<Region>> {
        self.region.as_deref().map(|r| parse_region(r, self.wavelength)).transpose()
    }

    fn spacing(&self) -> f64 {
        self.min_spacing / self.wavelength
    }

    fn resolve(&self, scene: &SensingScene, sca: &ScaConfig) -> Result<ArrayGeometry> {
        if let Some(p) = &self.geometry {
            return read_geometry(p, self.wavelength);
        }
        let scheme = self
            .scheme
            .ok_or_else(|| Error::Config("give --geometry or --scheme".into()))?;
        let n = self
            .antennas
            .ok_or_else(|| Error::Config("--scheme needs --antennas".into()))?;
        let d = self.spacing();
        let extent = match (self.length, self.region()?) {
            (Some(a), None) => Extent::Segment {
                length: a / self.wavelength,
            },
            (None, Some(r)) => Extent::Region(r),
            _ => return Err(Error::Config("give exactly one of --length and --region".into())),
        };
        match (scheme, &extent) {
            (Scheme::Optimal1d, Extent::Segment { length }) => {
                Ok(optimal_apv_1d(&Segment1D::new(*length, d, n)?)?.into())
            }
            (Scheme::Sca2d, Extent::Region(r)) => {
                let init = upaf_init(r, n, d)?;
                Ok(optimize_2d_restarts(scene, r, sca, &init)?.0.into())
            }
            (Scheme::CircularOptimal, Extent::Region(r)) => {
                let c = r.enclosing_circles()?.inscribed;
                Ok(circular_optimal(n, c.radius, d)?
                    .translated(c.center[0], c.center[1])
                    .into())
            }
            (Scheme::Explicit, _) => Err(Error::Config("use --geometry for explicit layouts".into())),
            (s, e) => generate_baseline(s, n, e, d),
        }
    }
}

impl SceneArgs {
    fn scene(&self, min_spacing: f64) -> Result<SensingScene> {
        let angles = match self.v {
            Some(v) => SpatialAngles::new(self.u, v)?,
            None => SpatialAngles::from_u(self.u)?,
        };
        let mut s = SensingScene::with_snr_db(angles, self.snr_db, min_spacing)?;
        s.snapshots = self.snapshots;
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone)]
enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

/// Small homogeneous table rendered as CSV or a JSON array of objects.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render<W: Write>(&self, format: Format, mut out: W) -> Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(&self.header)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(|c| match c {
                        Cell::Num(v) if v.is_infinite() => "inf".to_string(),
                        Cell::Num(v) => format!("{v:.11e}"),
                        Cell::Int(v) => v.to_string(),
                        Cell::Text(s) => s.clone(),
                        Cell::Empty => String::new(),
                    }))?;
                }
                w.flush().map_err(io_err(Path::new("<out>")))?;
            }
            Format::Json => {
                let arr: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let mut m = Map::new();
                        for (h, c) in self.header.iter().zip(r) {
                            let v = match c {
                                Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
                                Cell::Int(v) => Value::from(*v),
                                Cell::Text(s) => Value::String(s.clone()),
                                Cell::Empty => continue,
                            };
                            m.insert((*h).into(), v);
                        }
                        Value::Object(m)
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut out, &arr)?;
                writeln!(out).map_err(io_err(Path::new("<out>")))?;
            }
        }
        Ok(())
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            }
            Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(io_err(p))?))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

fn geometry_table(g: &ArrayGeometry) -> Table {
    let (xs, ys) = g.coordinates();
    if g.is_planar() {
        let mut t = Table::new(&["antenna", "x", "y"]);
        for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
            t.push(vec![i.into(), (*x).into(), (*y).into()]);
        }
        t
    } else {
        let mut t = Table::new(&["antenna", "x"]);
        for (i, x) in xs.iter().enumerate() {
            t.push(vec![i.into(), (*x).into()]);
        }
        t
    }
}

fn sca_config(path: Option<&Path>, seed: Option<u64>, restarts: Option<usize>) -> Result<ScaConfig> {
    let mut cfg = match path {
        Some(p) => toml::from_str(&std::fs::read_to_string(p).map_err(io_err(p))?)?,
        None => ScaConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = restarts {
        cfg.restarts = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a parsed command. Returns `Ok(false)` when some result row failed.
pub fn run(cli: Cli) -> Result<bool> {
    let seed = cli.seed.unwrap_or(0);
    let trials = cli.trials.unwrap_or(200);
    let options = MusicOptions {
        grid_step: cli.grid_step,
        refine: true,
    };
    let out = cli.out.as_deref();
    match cli.command {
        Command::Optimize1d {
            length,
            antennas,
            min_spacing,
            start,
            wavelength,
        } => {
            let seg = Segment1D::new(length / wavelength, min_spacing / wavelength, antennas)?;
            let opt = optimal_apv_1d(&seg)?;
            eprintln!(
                "variance {:.11e} (closed form {:.11e})",
                crate::array::PositionStats::of_1d(&opt).var_x,
                p_closed_form(&seg)?
            );
            let mut t = Table::new(&["step", "antenna", "x"]);
            let mut steps = vec![opt.clone()];
            if let Some(s) = start {
                let x0 = Geometry1D::new(s.iter().map(|x| x / wavelength).collect())?;
                steps = std::iter::once(x0.clone()).chain(adjustment_sweep(&x0, &seg)?).collect();
            }
            for (k, g) in steps.iter().enumerate() {
                for (i, x) in g.positions().iter().enumerate() {
                    t.push(vec![k.into(), i.into(), (*x).into()]);
                }
            }
            t.render(cli.format, sink(out)?)?;
        }
        Command::Optimize2d {
            region,
            antennas,
            min_spacing,
            init,
            sca_config: cfg_path,
            restarts,
            trace,
            wavelength,
        } => {
            let region = parse_region(&region, wavelength)?;
            let d = min_spacing / wavelength;
            let cfg = sca_config(cfg_path.as_deref(), cli.seed, restarts)?;
            let start = match init {
                Some(p) => match read_geometry(&p, wavelength)? {
                    ArrayGeometry::Planar(g) => g,
                    ArrayGeometry::Linear(_) => return Err(Error::Config("init layout needs a y column".into())),
                },
                None => upaf_init(&region, antennas, d)?,
            };
            let scene = SensingScene::with_snr_db(SpatialAngles::new(0.0, 0.0)?, 0.0, d)?;
            let (g, tr) = optimize_2d_restarts(&scene, &region, &cfg, &start)?;
            eprintln!(
                "delta {:.11e} -> {:.11e} after {} subproblems (converged: {})",
                tr.initial_delta,
                delta_of(&g),
                tr.subproblem_solves,
                tr.converged
            );
            if let Some(p) = trace {
                tr.write_csv(sink(Some(&p))?)?;
            }
            geometry_table(&g.into()).render(cli.format, sink(out)?)?;
        }
        Command::Crb { geometry, scene } => {
            let sc = scene.scene(geometry.spacing())?;
            let g = geometry.resolve(&sc, &sca_config(None, cli.seed, None)?)?;
            let report = match &g {
                ArrayGeometry::Linear(l) => crb_1d(&sc, l),
                ArrayGeometry::Planar(p) => crb_2d(&sc, p),
            };
            let mut t = Table::new(&[
                "n", "prefactor", "var_x", "var_y", "cov_xy", "crb_u", "crb_v", "minmax_crb", "flag",
            ]);
            t.push(vec![
                g.len().into(),
                report.prefactor.into(),
                report.stats.var_x.into(),
                if g.is_planar() { report.stats.var_y.into() } else { Cell::Empty },
                if g.is_planar() { report.stats.cov_xy.into() } else { Cell::Empty },
                report.crb_u.into(),
                report.crb_v.into(),
                minmax_crb(&report).ok().into(),
                format!("{:?}", report.flag).to_lowercase().as_str().into(),
            ]);
            t.render(cli.format, sink(out)?)?;
            if let Some(r) = geometry.region()? {
                let b = region_bounds(&sc, &r, g.len())?;
                eprintln!(
                    "region: a_ins {:.6} a_cir {:.6} crb in [{:.6e}, {:.6e}] (circular layout attains the upper: {})",
                    b.a_ins, b.a_cir, b.crb_lower, b.crb_upper, b.lower_attained
                );
            }
        }
        Command::Music {
            geometry,
            scene,
            spectrum,
        } => {
            let sc = scene.scene(geometry.spacing())?;
            let g = geometry.resolve(&sc, &sca_config(None, cli.seed, None)?)?;
            if let Some(p) = spectrum {
                let block = synthesize(&sc, &g, seed)?;
                let s = music(&block, &options)?;
                eprintln!("single-trial estimate ({:.6}, {:.6})", s.estimate.0, s.estimate.1);
                s.write_csv(sink(Some(&p))?)?;
            }
            let (crb_u, crb_v) = match &g {
                ArrayGeometry::Linear(l) => (crb_1d(&sc, l).crb_u, None),
                ArrayGeometry::Planar(p) => {
                    let r = crb_2d(&sc, p);
                    (r.crb_u, r.crb_v)
                }
            };
            let mut t = Table::new(&["snr_db", "crb_u", "crb_v", "mse_u", "mse_v", "se_u", "se_v", "status"]);
            let mut ok = true;
            let mut row = vec![scene.snr_db.into(), crb_u.into(), crb_v.into()];
            if trials == 0 {
                row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, "ok".into()]);
            } else {
                match monte_carlo_mse(&sc, &g, trials, seed, &options) {
                    Ok(b) => row.extend([
                        b.mse_u.into(),
                        b.mse_v.into(),
                        b.se_u.into(),
                        b.se_v.into(),
                        "ok".into(),
                    ]),
                    Err(e) => {
                        ok = false;
                        row.extend([
                            Cell::Empty,
                            Cell::Empty,
                            Cell::Empty,
                            Cell::Empty,
                            Cell::Text(format!("failed: {e}")),
                        ]);
                    }
                }
            }
            t.push(row);
            t.render(cli.format, sink(out)?)?;
            return Ok(ok);
        }
        Command::Sweep { config } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(t) = cli.trials {
                cfg.trials = t;
            }
            if cli.grid_step.is_some() {
                cfg.grid_step = cli.grid_step;
            }
            let output = bench::run_scenario_full(&cfg)?;
            let rows = output.rows;
            for r in &rows {
                eprintln!("{:>10} {:<18} {:>8.2}s  {}", r.sweep, r.scheme, r.wall_time, r.status);
            }
            let target = out.or(cfg.output.as_deref());
            match (target, cli.format) {
                (Some(p), Format::Csv) => bench::emit(&rows, p)?,
                (p, Format::Json) => bench::write_json(&rows, sink(p)?)?,
                (None, Format::Csv) => bench::write_csv(&rows, sink(None)?)?,
            }
            if cfg.save_layouts || cfg.correlation_step.is_some() {
                let base = target.ok_or_else(|| Error::Config("layouts and maps need an output path".into()))?;
                let mut written = Vec::new();
                if cfg.save_layouts {
                    written.extend(bench::write_layouts(&output.layouts, base)?);
                }
                if let Some(step) = cfg.correlation_step {
                    let truth = cfg.scene.scene(cfg.scene.snr_db)?.angles;
                    written.extend(bench::write_correlation_maps(&output.layouts, &truth, step, base)?);
                }
                for p in written {
                    eprintln!("wrote {}", p.display());
                }
            }
            return Ok(!rows.iter().any(|r| r.failed()));
        }
        Command::Correlate {
            geometry,
            u,
            v,
            peaks,
        } => {
            let truth = match v {
                Some(v) => SpatialAngles::new(u, v)?,
                None => SpatialAngles::from_u(u)?,
            };
            let sc = SensingScene::with_snr_db(truth, 15.0, geometry.spacing())?;
            let g = geometry.resolve(&sc, &sca_config(None, cli.seed, None)?)?;
            let step = cli.grid_step.unwrap_or(if g.is_planar() { 0.01 } else { 1e-3 });
            let map = correlation_map(&g, &truth, step)?;
            for (pu, pv, q) in map.local_maxima(peaks) {
                if g.is_planar() {
                    eprintln!("peak ({pu:+.4}, {pv:+.4}) q = {q:.6}");
                } else {
                    eprintln!("peak {pu:+.4} q = {q:.6}");
                }
            }
            let mut t = if g.is_planar() {
                Table::new(&["u", "v", "q"])
            } else {
                Table::new(&["u", "q"])
            };
            for (i, q) in map.values.iter().enumerate() {
                let (pu, pv) = map.grid.point(i);
                if g.is_planar() {
                    if pu * pu + pv * pv <= 1.0 {
                        t.push(vec![pu.into(), pv.into(), (*q).into()]);
                    }
                } else {
                    t.push(vec![pu.into(), (*q).into()]);
                }
            }
            t.render(cli.format, sink(out)?)?;
        }
    }
    Ok(true)
}

/// Sizes the global thread pool from `MA_LAB_THREADS` when set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("MA_LAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Config(format!("MA_LAB_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Error::Config("MA_LAB_THREADS must be positive".into()));
        }
        // A pool may already exist when embedded; keep it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
