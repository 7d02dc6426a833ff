use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use super::run::{BuiltLayout, ResultRow};
use crate::array::{ArrayGeometry, SpatialAngles};
use crate::estimation::correlation_map;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 9] = [
    "sweep", "scheme", "crb_u", "crb_v", "mse_u", "mse_v", "se_u", "se_v", "status",
];

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.11e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            num(r.sweep),
            r.scheme.to_string(),
            opt(r.crb_u),
            opt(r.crb_v),
            opt(r.mse_u),
            opt(r.mse_v),
            opt(r.se_u),
            opt(r.se_v),
            r.status.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<csv>".into(),
        source: e,
    })?;
    Ok(())
}

fn json_num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// Array of objects; absent values are omitted, non-finite ones are `null`.
pub fn to_json(rows: &[ResultRow]) -> Result<Value> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let out = rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            m.insert("sweep".into(), json_num(r.sweep));
            m.insert("scheme".into(), Value::String(r.scheme.to_string()));
            let fields = [
                ("crb_u", r.crb_u),
                ("crb_v", r.crb_v),
                ("mse_u", r.mse_u),
                ("mse_v", r.mse_v),
                ("se_u", r.se_u),
                ("se_v", r.se_v),
            ];
            for (k, v) in fields {
                if let Some(v) = v {
                    m.insert(k.into(), json_num(v));
                }
            }
            m.insert("status".into(), Value::String(r.status.clone()));
            Value::Object(m)
        })
        .collect();
    Ok(Value::Array(out))
}

pub fn write_json<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    let v = to_json(rows)?;
    serde_json::to_writer_pretty(&mut out, &v)?;
    writeln!(out).map_err(|e| Error::Io {
        path: "<json>".into(),
        source: e,
    })
}

/// Writes `path` as CSV and `path` with a `.json` extension next to it.
pub fn emit(rows: &[ResultRow], path: &Path) -> Result<()> {
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |e| Error::Io {
            path: p.display().to_string(),
            source: e,
        }
    };
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
    }
    let f = std::fs::File::create(path).map_err(io(path))?;
    write_csv(rows, std::io::BufWriter::new(f))?;
    let jpath = path.with_extension("json");
    let f = std::fs::File::create(&jpath).map_err(io(&jpath))?;
    write_json(rows, std::io::BufWriter::new(f))
}

fn sibling(base: &Path, layout: &BuiltLayout, suffix: &str) -> std::path::PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    base.with_file_name(format!("{stem}_{}_{}_{suffix}.csv", layout.scheme, layout.sweep))
}

/// Writes `antenna,x[,y]` for each layout next to `base` and returns the paths.
pub fn write_layouts(layouts: &[BuiltLayout], base: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut paths = Vec::new();
    for l in layouts {
        let p = sibling(base, l, "layout");
        let f = std::fs::File::create(&p).map_err(|e| Error::Io {
            path: p.display().to_string(),
            source: e,
        })?;
        let mut w = csv::Writer::from_writer(f);
        let (xs, ys) = l.geometry.coordinates();
        match &l.geometry {
            ArrayGeometry::Planar(_) => {
                w.write_record(["antenna", "x", "y"])?;
                for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
                    w.write_record([i.to_string(), num(*x), num(*y)])?;
                }
            }
            ArrayGeometry::Linear(_) => {
                w.write_record(["antenna", "x"])?;
                for (i, x) in xs.iter().enumerate() {
                    w.write_record([i.to_string(), num(*x)])?;
                }
            }
        }
        w.flush().map_err(|e| Error::Io {
            path: p.display().to_string(),
            source: e,
        })?;
        paths.push(p);
    }
    Ok(paths)
}

/// Writes a correlation map per layout next to `base` and returns the paths.
pub fn write_correlation_maps(
    layouts: &[BuiltLayout],
    truth: &SpatialAngles,
    step: f64,
    base: &Path,
) -> Result<Vec<std::path::PathBuf>> {
    let mut paths = Vec::new();
    for l in layouts {
        let p = sibling(base, l, "corr");
        let map = correlation_map(&l.geometry, truth, step)?;
        let f = std::fs::File::create(&p).map_err(|e| Error::Io {
            path: p.display().to_string(),
            source: e,
        })?;
        map.write_csv(std::io::BufWriter::new(f))?;
        paths.push(p);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::Scheme;

    fn row(crb_v: Option<f64>) -> ResultRow {
        ResultRow {
            sweep: 10.0,
            scheme: Scheme::Upah,
            crb_u: Some(2.5e-4),
            crb_v,
            mse_u: None,
            mse_v: None,
            se_u: None,
            se_v: None,
            wall_time: 1.0,
            status: "ok".into(),
        }
    }

    #[test]
    fn csv_format() {
        let mut buf = Vec::new();
        write_csv(&[row(Some(f64::INFINITY))], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "sweep,scheme,crb_u,crb_v,mse_u,mse_v,se_u,se_v,status\n\
             1.00000000000e1,upah,2.50000000000e-4,inf,,,,,ok\n"
        );
        assert!(matches!(write_csv(&[], Vec::new()), Err(Error::EmptyRows)));
    }

    #[test]
    fn json_mirror() {
        let v = to_json(&[row(Some(f64::INFINITY)), row(None)]).unwrap();
        assert_eq!(v[0]["crb_v"], Value::Null);
        assert!(v[1].get("crb_v").is_none());
        assert!(v[0].get("mse_u").is_none());
        assert_eq!(v[1]["scheme"], "upah");
    }

    #[test]
    fn emit_writes_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.csv");
        emit(&[row(Some(1.0))], &p).unwrap();
        let a = std::fs::read(&p).unwrap();
        emit(&[row(Some(1.0))], &p).unwrap();
        assert_eq!(a, std::fs::read(&p).unwrap());
        assert!(dir.path().join("sub/out.json").exists());
    }
}
