use super::sweep::{Cell, ResultRow};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        v.to_string()
    }
}

fn format_cell(c: Cell<'_>) -> String {
    match c {
        Cell::Int(v) => v.map(|x| x.to_string()).unwrap_or_default(),
        Cell::Float(v) => v.map(format_float).unwrap_or_default(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(t) => t.unwrap_or_default().to_string(),
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io {
            path: "<stream>".into(),
            source: io,
        },
        other => Error::Parse(format!("{other:?}")),
    }
}

/// Writes rows as CSV with the fixed header from [`ResultRow::columns`].
/// Floats carry 12 significant digits; missing values are empty cells.
pub fn emit_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ResultRow::columns()).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.cells().into_iter().map(|(_, c)| format_cell(c)))
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<stream>".into(),
        source: e,
    })
}

/// Writes rows as a pretty-printed JSON array.
pub fn emit_json<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(out).map_err(|e| Error::io("<stream>", e))
}

/// Gnuplot data: columns `x y₁ y₂ …`, one block per `(eps, a)` pair, sorted
/// by `x`, blocks separated by two blank lines so `index` can select them.
/// Rows with an empty `x` or with every `y` empty are skipped; other empty
/// cells are written as `NaN`.
pub fn emit_plot_data<W: Write>(rows: &[ResultRow], x: &str, ys: &[&str], mut out: W) -> Result<()> {
    if ys.is_empty() {
        return Err(Error::Validation("at least one y column is required".into()));
    }
    // Validates the column names even when there are no rows.
    let probe = ResultRow::default();
    probe.numeric(x)?;
    for y in ys {
        probe.numeric(y)?;
    }

    type Block = Vec<(f64, Vec<Option<f64>>)>;
    let mut blocks: BTreeMap<(u64, u64), Block> = BTreeMap::new();
    for row in rows {
        let Some(xv) = row.numeric(x)? else { continue };
        let yv = ys.iter().map(|y| row.numeric(y)).collect::<Result<Vec<_>>>()?;
        if yv.iter().all(Option::is_none) {
            continue;
        }
        blocks
            .entry((row.eps.to_bits(), row.a.to_bits()))
            .or_default()
            .push((xv, yv));
    }
    let io = |e| Error::io("<stream>", e);
    writeln!(out, "# {x} {}", ys.join(" ")).map_err(io)?;
    for (i, ((eps, a), mut pts)) in blocks.into_iter().enumerate() {
        if i > 0 {
            write!(out, "\n\n").map_err(io)?;
        }
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        writeln!(out, "# eps = {}, a = {}", f64::from_bits(eps), f64::from_bits(a)).map_err(io)?;
        for (xv, yv) in pts {
            let mut line = format_float(xv);
            for v in yv {
                line.push(' ');
                line.push_str(&v.map(format_float).unwrap_or_else(|| "NaN".into()));
            }
            writeln!(out, "{line}").map_err(io)?;
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn with_path(path: &Path, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn write_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    with_path(path, emit_csv(rows, create(path)?))
}

pub fn write_json(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    with_path(path, emit_json(rows, &mut w))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_plot_data(
    rows: &[ResultRow],
    x: &str,
    ys: &[&str],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    with_path(path, emit_plot_data(rows, x, ys, &mut w))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads rows written by [`write_json`].
pub fn read_json(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Reads rows written by [`write_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    })?;
    let header: Vec<String> = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    if header != ResultRow::columns() {
        return Err(Error::Parse(format!("{}: unexpected CSV header", path.display())));
    }
    r.deserialize()
        .map(|rec| rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display()))))
        .collect()
}
