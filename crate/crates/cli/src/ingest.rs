//! Readers and writers for the delimited text formats.

use std::fmt::Write as _;
use std::path::Path;

use recalib::{Dataset64, Forecast64};

use crate::error::{CliError, CliResult};

fn reader(path: &Path, headers: bool) -> CliResult<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            other => CliError::ingest(format!("{}: {other:?}", path.display())),
        })
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::ingest(format!("{}: {e}", path.display()))
}

fn finite(cell: &str, row: usize, column: &str) -> CliResult<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| CliError::ingest(format!("row {row}, column {column}: cannot parse {cell:?} as a number")))?;
    if !v.is_finite() {
        return Err(CliError::ingest(format!(
            "row {row}, column {column}: value {cell} is not finite"
        )));
    }
    Ok(v)
}

/// Reads a headed table whose `x*` columns are features (in header order)
/// and whose `y` column is the target. Rows are numbered from 1, not
/// counting the header.
pub fn ingest_dataset(path: &Path) -> CliResult<Dataset64> {
    let mut rdr = reader(path, true)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let mut y_col = None;
    let mut x_cols = Vec::new();
    for (i, name) in header.iter().enumerate() {
        if name == "y" {
            if y_col.replace(i).is_some() {
                return Err(CliError::ingest("duplicate y column"));
            }
        } else if name.starts_with('x') {
            x_cols.push(i);
        } else {
            return Err(CliError::ingest(format!(
                "unexpected column {name:?}: expected feature columns x* and a target column y"
            )));
        }
    }
    let y_col = y_col.ok_or_else(|| CliError::ingest(format!("{}: missing y column", path.display())))?;

    let (mut rows, mut ys) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() != header.len() {
            return Err(CliError::ingest(format!(
                "row {row}: has {} cells, header has {}",
                rec.len(),
                header.len()
            )));
        }
        let x = x_cols
            .iter()
            .map(|&c| finite(&rec[c], row, &header[c]))
            .collect::<CliResult<Vec<f64>>>()?;
        ys.push(finite(&rec[y_col], row, "y")?);
        rows.push(x);
    }
    if ys.is_empty() {
        return Err(CliError::ingest(format!("{}: no data rows", path.display())));
    }
    Ok(Dataset64::new(rows, ys)?)
}

fn parse_forecast(rec: &csv::StringRecord, row: usize) -> CliResult<(Forecast64, f64)> {
    let bad = |msg: String| CliError::ingest(format!("row {row}: {msg}"));
    let tag = rec.get(0).unwrap_or("");
    let want = match tag {
        "gaussian" => 4,
        "student_t" => 5,
        "qgrid" => 3,
        "point_distance" => 3,
        other => return Err(bad(format!("unknown forecast family {other:?}"))),
    };
    if rec.len() != want {
        return Err(bad(format!("{tag} rows have {want} fields, found {}", rec.len())));
    }
    let num = |i: usize, name: &str| finite(&rec[i], row, name);
    let y = num(want - 1, "y")?;
    let forecast = match tag {
        "gaussian" => Forecast64::gaussian(num(1, "mu")?, num(2, "sigma")?),
        "student_t" => Forecast64::student_t(num(1, "loc")?, num(2, "scale")?, num(3, "dof")?),
        "point_distance" => Forecast64::point_distance(num(1, "mu")?),
        _ => {
            let knots = rec[1]
                .split(';')
                .map(|pair| {
                    let (p, v) = pair
                        .split_once(':')
                        .ok_or_else(|| bad(format!("quantile grid knot {pair:?} is not of the form p:y")))?;
                    Ok((finite(p.trim(), row, "p")?, finite(v.trim(), row, "y")?))
                })
                .collect::<CliResult<Vec<_>>>()?;
            Forecast64::quantile_grid(knots)
        }
    }
    .map_err(|e| bad(e.to_string()))?;
    Ok((forecast, y))
}

/// Reads `family,params...,y` rows; lines starting with `#` are comments.
pub fn ingest_forecasts(path: &Path) -> CliResult<(Vec<Forecast64>, Vec<f64>)> {
    let mut rdr = reader(path, false)?;
    let (mut fs, mut ys) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let (f, y) = parse_forecast(&rec, i + 1)?;
        fs.push(f);
        ys.push(y);
    }
    if fs.is_empty() {
        return Err(CliError::ingest(format!("{}: no forecast rows", path.display())));
    }
    Ok((fs, ys))
}

/// One forecast row in the format read by [`ingest_forecasts`].
pub fn forecast_row(f: &Forecast64, y: f64) -> String {
    match f {
        Forecast64::Gaussian { mu, sigma, .. } => format!("gaussian,{mu},{sigma},{y}"),
        Forecast64::StudentT { loc, scale, dof, .. } => format!("student_t,{loc},{scale},{dof},{y}"),
        Forecast64::QuantileGrid(g) => {
            let knots: Vec<String> = g.knots().iter().map(|(p, v)| format!("{p}:{v}")).collect();
            format!("qgrid,{},{y}", knots.join(";"))
        }
        Forecast64::PointDistance { mu, .. } => format!("point_distance,{mu},{y}"),
    }
}

pub fn write_forecasts(fs: &[Forecast64], ys: &[f64], seed: u64) -> String {
    let mut out = format!("# seed: {seed}\n");
    for (f, &y) in fs.iter().zip(ys) {
        let _ = writeln!(out, "{}", forecast_row(f, y));
    }
    out
}

/// One non-negative integer demand per line, with an optional `demand`
/// header.
pub fn ingest_demand_trace(path: &Path) -> CliResult<Vec<u32>> {
    let mut rdr = reader(path, false)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let cell = rec.get(0).unwrap_or("");
        if i == 0 && cell == "demand" {
            continue;
        }
        if rec.len() != 1 {
            return Err(CliError::ingest(format!("row {}: expected one demand value", i + 1)));
        }
        let d = cell
            .parse::<u32>()
            .map_err(|_| CliError::ingest(format!("row {}: demand {cell:?} is not a non-negative integer", i + 1)))?;
        out.push(d);
    }
    if out.is_empty() {
        return Err(CliError::ingest(format!("{}: empty demand trace", path.display())));
    }
    Ok(out)
}
