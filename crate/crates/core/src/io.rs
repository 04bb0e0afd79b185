//! Flat-file ingestion and export. Every writer goes through a temporary
//! file in the target directory followed by a rename.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::DirectedCountNetwork;
use crate::srm::{DyadTable, NodeTable};

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::io(path.display().to_string(), e)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::input(format!("{}:{line}: {e}", path.display()))
}

/// Writes `bytes` to `path` atomically.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::input(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Serializes rows as CSV and writes them atomically.
pub fn write_csv<I, R, S>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::input(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    atomic_write(path, &bytes)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::input(format!("{}:{}: {e}", path.display(), e.line()))
    })
}

/// `NA` for missing values, shortest round-trip decimal otherwise.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse<T: std::str::FromStr>(path: &Path, line: u64, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| {
        Error::input(format!(
            "{}:{line}: cannot parse {what} from '{field}'",
            path.display()
        ))
    })
}

fn headers(path: &Path, r: &mut csv::Reader<fs::File>) -> Result<Vec<String>> {
    Ok(r.headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect())
}

fn require_columns(path: &Path, found: &[String], want: &[&str]) -> Result<()> {
    if found.iter().map(String::as_str).ne(want.iter().copied()) {
        return Err(Error::input(format!(
            "{}:1: expected header {}, found {}",
            path.display(),
            want.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

/// Edge list `src,dst,count`.
pub fn read_edges(path: &Path) -> Result<Vec<(String, String, i64)>> {
    let mut r = reader(path)?;
    let h = headers(path, &mut r)?;
    require_columns(path, &h, &["src", "dst", "count"])?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let count: i64 = parse(path, line, &rec[2], "count")?;
        if count < 0 {
            return Err(Error::input(format!(
                "{}:{line}: negative count {count}",
                path.display()
            )));
        }
        out.push((rec[0].to_string(), rec[1].to_string(), count));
    }
    Ok(out)
}

pub fn write_edges(path: &Path, net: &DirectedCountNetwork) -> Result<()> {
    let ids = net.nodes();
    let mut arcs: Vec<(usize, usize, u64)> = net.arcs().collect();
    arcs.sort_by(|a, b| (&ids[a.0], &ids[a.1]).cmp(&(&ids[b.0], &ids[b.1])));
    write_csv(
        path,
        &["src", "dst", "count"],
        arcs.into_iter()
            .map(|(i, j, c)| [ids[i].clone(), ids[j].clone(), c.to_string()]),
    )
}

/// Node table: an `id` column followed by one column per attribute; empty
/// cells are missing values.
pub fn read_node_table(path: &Path) -> Result<NodeTable> {
    let mut r = reader(path)?;
    let h = headers(path, &mut r)?;
    if h.first().map(String::as_str) != Some("id") {
        return Err(Error::input(format!("{}:1: first column must be 'id'", path.display())));
    }
    let mut ids = Vec::new();
    let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); h.len() - 1];
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        ids.push(rec[0].to_string());
        for (k, col) in cols.iter_mut().enumerate() {
            let field = &rec[k + 1];
            col.push(if field.is_empty() || field == "NA" {
                None
            } else {
                Some(parse(path, line, field, &h[k + 1])?)
            });
        }
    }
    let mut table = NodeTable::new(ids)?;
    for (name, col) in h[1..].iter().zip(cols) {
        table.set_column(name, col)?;
    }
    Ok(table)
}

pub fn write_node_table(path: &Path, table: &NodeTable) -> Result<()> {
    let names: Vec<String> = table.column_names().map(str::to_string).collect();
    let mut header = vec!["id"];
    header.extend(names.iter().map(String::as_str));
    let cols: Vec<&[Option<f64>]> = names.iter().map(|n| table.column(n).unwrap()).collect();
    write_csv(
        path,
        &header,
        table.ids().iter().enumerate().map(|(k, id)| {
            std::iter::once(id.clone())
                .chain(cols.iter().map(|c| c[k].map_or_else(String::new, |v| v.to_string())))
                .collect::<Vec<_>>()
        }),
    )
}

/// Dyad table `src,dst,distance_minutes,co_membership` over all ordered pairs of `ids`.
pub fn read_dyad_table(path: &Path, ids: &[String]) -> Result<DyadTable> {
    let mut r = reader(path)?;
    let h = headers(path, &mut r)?;
    require_columns(path, &h, &["src", "dst", "distance_minutes", "co_membership"])?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let cm: u8 = parse(path, line, &rec[3], "co_membership")?;
        if cm > 1 {
            return Err(Error::input(format!(
                "{}:{line}: co_membership must be 0 or 1",
                path.display()
            )));
        }
        rows.push((
            rec[0].to_string(),
            rec[1].to_string(),
            parse(path, line, &rec[2], "distance_minutes")?,
            cm == 1,
        ));
    }
    DyadTable::from_rows(ids.to_vec(), &rows)
}

pub fn write_dyad_table(path: &Path, table: &DyadTable) -> Result<()> {
    let ids = table.ids();
    let d = table.distance_matrix();
    let mut rows = Vec::new();
    for i in 0..ids.len() {
        for j in 0..ids.len() {
            if i != j {
                rows.push([
                    ids[i].clone(),
                    ids[j].clone(),
                    d[i][j].to_string(),
                    u8::from(table.co_member(i, j)).to_string(),
                ]);
            }
        }
    }
    write_csv(path, &["src", "dst", "distance_minutes", "co_membership"], rows)
}

/// Square travel-time matrix with node ids in the header row and first column.
pub fn read_travel_matrix(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = reader(path)?;
    let h = headers(path, &mut r)?;
    let ids: Vec<String> = h[1..].to_vec();
    let mut m = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if ids.get(k).map(String::as_str) != Some(&rec[0]) {
            return Err(Error::input(format!(
                "{}:{line}: row id '{}' does not match header order",
                path.display(),
                &rec[0]
            )));
        }
        m.push(
            rec.iter()
                .skip(1)
                .map(|f| parse(path, line, f, "travel time"))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    if m.len() != ids.len() {
        return Err(Error::input(format!(
            "{}: travel matrix has {} rows for {} columns",
            path.display(),
            m.len(),
            ids.len()
        )));
    }
    Ok((ids, m))
}

pub fn write_travel_matrix(path: &Path, ids: &[String], m: &[Vec<f64>]) -> Result<()> {
    let mut header = vec![""];
    header.extend(ids.iter().map(String::as_str));
    write_csv(
        path,
        &header,
        ids.iter().zip(m).map(|(id, row)| {
            std::iter::once(id.clone())
                .chain(row.iter().map(|v| v.to_string()))
                .collect::<Vec<_>>()
        }),
    )
}
