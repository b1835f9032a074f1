//! CSV readers and writers for the pipeline's artifacts.
//!
//! Every file may start with `# key=value` provenance lines; readers skip lines
//! starting with `#`. Numbers are written in shortest round-trip form, so a
//! write/read cycle is lossless for `f64`.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::forward1d::TransferSeries;
use crate::gammas::GammaSet;
use crate::invert1d::{Diagnostics, InversionResult};
use crate::linalg::Matrix;
use crate::mimo2d::{BlockTransferSeries, Inversion2D};
use crate::real::Real;
use crate::romdata::{GramPair, JacobiRom};

/// Ordered `key=value` annotations written as leading comment lines.
pub type Provenance = Vec<(String, String)>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => parse_err(path, format!("{other:?}")),
    }
}

pub(crate) fn num<T: Real>(x: T) -> String {
    format!("{}", x.to_f64_lossy())
}

/// Writes `header` and `rows` as CSV after the provenance comments.
pub fn write_table(path: &Path, provenance: &Provenance, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut file = File::create(path).map_err(io_err(path))?;
    for (k, v) in provenance {
        writeln!(file, "# {k}={v}").map_err(io_err(path))?;
    }
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(file);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a CSV with a header row, skipping `#` lines. Returns header and rows.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_owned).collect()).map_err(|e| csv_err(path, e)))
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok((header, rows))
}

/// Provenance comments of a file, in order.
pub fn read_provenance(path: &Path) -> Result<Provenance> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.trim().split_once('='))
        .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
        .collect())
}

fn parse_num<T: Real>(path: &Path, s: &str, what: &str) -> Result<T> {
    s.parse::<f64>()
        .map(T::lit)
        .map_err(|_| parse_err(path, format!("{what}: '{s}' is not a number")))
}

/// Transfer series: a `tau,sigma,n` header, one row with those values, then one `f_k` per line.
pub fn write_transfer<T: Real>(path: &Path, f: &TransferSeries<T>, provenance: &Provenance) -> Result<()> {
    let mut rows = vec![vec![num(f.tau()), num(f.sigma()), f.n().to_string()]];
    rows.extend(f.values().iter().map(|&v| vec![num(v)]));
    write_table(path, provenance, &["tau", "sigma", "n"], &rows)
}

pub fn read_transfer<T: Real>(path: &Path) -> Result<TransferSeries<T>> {
    let (header, rows) = read_table(path)?;
    if header != ["tau", "sigma", "n"] {
        return Err(parse_err(path, format!("expected header tau,sigma,n, found {}", header.join(","))));
    }
    let first = rows.first().filter(|r| r.len() == 3).ok_or_else(|| parse_err(path, "missing tau,sigma,n row"))?;
    let tau = parse_num(path, &first[0], "tau")?;
    let sigma = parse_num(path, &first[1], "sigma")?;
    let n: usize = first[2].parse().map_err(|_| parse_err(path, format!("n: '{}' is not a count", first[2])))?;
    let values = rows[1..]
        .iter()
        .enumerate()
        .map(|(k, r)| match r.as_slice() {
            [v] => parse_num(path, v, &format!("f_{k}")),
            _ => Err(parse_err(path, format!("row for f_{k} must have one column"))),
        })
        .collect::<Result<Vec<T>>>()?;
    if values.len() != 2 * n {
        return Err(parse_err(path, format!("header says n = {n} but found {} samples", values.len())));
    }
    TransferSeries::new(tau, sigma, values)
}

/// Columns `j, ghat_j, g_j, source`, with `j` starting at 1.
pub fn write_gammas<T: Real>(path: &Path, gs: &GammaSet<T>, provenance: &Provenance) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..gs.len())
        .map(|j| {
            vec![
                (j + 1).to_string(),
                num(gs.ghat[j]),
                num(gs.g[j]),
                gs.source.as_str().to_owned(),
            ]
        })
        .collect();
    write_table(path, provenance, &["j", "ghat_j", "g_j", "source"], &rows)
}

/// Columns `node_type, traveltime_pos, physical_pos, v_estimate`, nodes in traveltime order.
pub fn write_inversion<T: Real>(path: &Path, r: &InversionResult<T>, provenance: &Provenance) -> Result<()> {
    let mut rows = Vec::with_capacity(2 * r.grid.len());
    for j in 0..r.grid.len() {
        rows.push(vec![
            "primary".into(),
            num(r.grid.primary[j]),
            num(r.physical.primary[j]),
            num(r.estimates.primary[j]),
        ]);
        rows.push(vec![
            "dual".into(),
            num(r.grid.dual[j]),
            num(r.physical.dual[j]),
            num(r.estimates.dual[j]),
        ]);
    }
    write_table(path, provenance, &["node_type", "traveltime_pos", "physical_pos", "v_estimate"], &rows)
}

/// `key,value` rows: cond_uu, tau, sigma, n, monotone, origin_mismatch.
pub fn write_diagnostics<T: Real>(path: &Path, d: &Diagnostics<T>, provenance: &Provenance) -> Result<()> {
    let rows = vec![
        vec!["cond_uu".into(), num(d.cond_uu)],
        vec!["tau".into(), num(d.tau)],
        vec!["sigma".into(), num(d.sigma)],
        vec!["n".into(), d.n.to_string()],
        vec!["monotone".into(), d.monotone.to_string()],
        vec!["origin_mismatch".into(), num(d.origin_mismatch)],
    ];
    write_table(path, provenance, &["key", "value"], &rows)
}

/// Inversion rows as `(node_type, traveltime_pos, physical_pos, v_estimate)`.
pub fn read_inversion(path: &Path) -> Result<Vec<(String, f64, f64, f64)>> {
    let (header, rows) = read_table(path)?;
    if header != ["node_type", "traveltime_pos", "physical_pos", "v_estimate"] {
        return Err(parse_err(path, "not an inversion result (unexpected header)"));
    }
    rows.iter()
        .map(|r| match r.as_slice() {
            [t, a, b, c] => Ok((
                t.clone(),
                parse_num(path, a, "traveltime_pos")?,
                parse_num(path, b, "physical_pos")?,
                parse_num(path, c, "v_estimate")?,
            )),
            _ => Err(parse_err(path, "inversion rows need four columns")),
        })
        .collect()
}

/// Long format `matrix, i, j, value` for both Gram matrices.
pub fn write_gram<T: Real>(path: &Path, g: &GramPair<T>, provenance: &Provenance) -> Result<()> {
    let n = g.order();
    let mut rows = Vec::with_capacity(2 * n * n);
    for (name, m) in [("uu", &g.uu), ("upu", &g.upu)] {
        for i in 0..n {
            for j in 0..n {
                rows.push(vec![name.into(), i.to_string(), j.to_string(), num(m.get(i, j))]);
            }
        }
    }
    write_table(path, provenance, &["matrix", "i", "j", "value"], &rows)
}

/// Columns `j, alpha_j, beta_j` (`beta_j` couples `j` and `j+1`; empty on the last row),
/// with the mass `c` as a provenance line.
pub fn write_jacobi<T: Real>(path: &Path, rom: &JacobiRom<T>, provenance: &Provenance) -> Result<()> {
    let mut prov = provenance.clone();
    prov.push(("mass".into(), num(rom.mass)));
    let (a, b) = (rom.jacobi.alpha(), rom.jacobi.beta());
    let rows: Vec<Vec<String>> = (0..rom.order())
        .map(|j| vec![(j + 1).to_string(), num(a[j]), b.get(j).map(|&x| num(x)).unwrap_or_default()])
        .collect();
    write_table(path, &prov, &["j", "alpha_j", "beta_j"], &rows)
}

/// Dense matrix with optional column names.
pub fn write_matrix<T: Real>(path: &Path, m: &Matrix<T>, header: &[String], provenance: &Provenance) -> Result<()> {
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = (0..m.rows()).map(|i| m.row(i).iter().map(|&x| num(x)).collect()).collect();
    write_table(path, provenance, &h, &rows)
}

/// Block series: `manifest.csv` (`kind,index,value`: tau, sigma, one `source` row per
/// source, one `block` row per file) plus `F_<k>.csv` holding each `m × m` block.
pub fn write_block_series<T: Real>(dir: &Path, fs: &BlockTransferSeries<T>, provenance: &Provenance) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let m = fs.m();
    let cols: Vec<String> = (0..m).map(|a| format!("r{a}")).collect();
    let mut rows = vec![
        vec!["tau".into(), "0".into(), num(fs.tau())],
        vec!["sigma".into(), "0".into(), num(fs.sigma())],
    ];
    rows.extend(fs.sources().iter().enumerate().map(|(a, &y)| vec!["source".into(), a.to_string(), num(y)]));
    for (k, b) in fs.blocks().iter().enumerate() {
        let name = format!("F_{k}.csv");
        write_matrix(&dir.join(&name), b.as_matrix(), &cols, &Provenance::new())?;
        rows.push(vec!["block".into(), k.to_string(), name]);
    }
    let manifest = dir.join("manifest.csv");
    write_table(&manifest, provenance, &["kind", "index", "value"], &rows)?;
    Ok(manifest)
}

pub fn read_block_series<T: Real>(dir: &Path) -> Result<BlockTransferSeries<T>> {
    let manifest = dir.join("manifest.csv");
    let (header, rows) = read_table(&manifest)?;
    if header != ["kind", "index", "value"] {
        return Err(parse_err(&manifest, "unexpected manifest header"));
    }
    let (mut tau, mut sigma) = (None, None);
    let (mut sources, mut files) = (Vec::new(), Vec::new());
    for r in &rows {
        match r.as_slice() {
            [k, _, v] if k == "tau" => tau = Some(parse_num::<T>(&manifest, v, "tau")?),
            [k, _, v] if k == "sigma" => sigma = Some(parse_num::<T>(&manifest, v, "sigma")?),
            [k, _, v] if k == "source" => sources.push(parse_num::<T>(&manifest, v, "source")?),
            [k, _, v] if k == "block" => files.push(v.clone()),
            _ => return Err(parse_err(&manifest, format!("unrecognized manifest row {}", r.join(",")))),
        }
    }
    let tau = tau.ok_or_else(|| parse_err(&manifest, "missing tau"))?;
    let sigma = sigma.ok_or_else(|| parse_err(&manifest, "missing sigma"))?;
    let blocks = files
        .iter()
        .map(|name| {
            let path = dir.join(name);
            let (_, rows) = read_table(&path)?;
            rows.iter()
                .flatten()
                .map(|s| parse_num::<T>(&path, s, "block entry"))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<Vec<T>>>>()?;
    BlockTransferSeries::new(tau, sigma, sources, blocks)
}

/// Columns `zeta, nu, x, y, v_estimate, node_type`.
pub fn write_inversion2d<T: Real>(path: &Path, r: &Inversion2D<T>, provenance: &Provenance) -> Result<()> {
    let mut rows = Vec::new();
    for line in &r.lines {
        for j in 0..r.grid.len() {
            rows.push(vec![
                num(r.grid.primary[j]),
                num(line.nu),
                num(line.physical.primary[j]),
                num(line.nu),
                num(line.estimates.primary[j]),
                "primary".into(),
            ]);
            rows.push(vec![
                num(r.grid.dual[j]),
                num(line.nu),
                num(line.physical.dual[j]),
                num(line.nu),
                num(line.estimates.dual[j]),
                "dual".into(),
            ]);
        }
    }
    write_table(path, provenance, &["zeta", "nu", "x", "y", "v_estimate", "node_type"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward1d::{discretize, synthesize};
    use crate::models::builtin_1d;

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("waverom-io-{}-{name}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn transfer_round_trip_is_exact() {
        let op = discretize(&builtin_1d::<f64>("two-layer").unwrap(), 400).unwrap();
        let f = synthesize(&op, 0.01, 0.025, 20).unwrap();
        let dir = tmp("transfer");
        let path = dir.join("f.csv");
        let prov = vec![("model".to_owned(), "two-layer".to_owned())];
        write_transfer(&path, &f, &prov).unwrap();
        assert_eq!(read_transfer::<f64>(&path).unwrap(), f);
        assert_eq!(read_provenance(&path).unwrap(), prov);
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn malformed_transfer_is_a_parse_error() {
        let dir = tmp("bad");
        let path = dir.join("f.csv");
        fs::write(&path, "tau,sigma,n\n0.1,0.01,2\n1.0\nabc\n0\n0\n").unwrap();
        assert!(matches!(read_transfer::<f64>(&path), Err(Error::Parse { .. })));
        fs::write(&path, "tau,sigma,n\n0.1,0.01,2\n1.0\n0.5\n").unwrap();
        assert!(matches!(read_transfer::<f64>(&path), Err(Error::Parse { .. })));
        assert!(matches!(read_transfer::<f64>(&dir.join("missing.csv")), Err(Error::Io { .. })));
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn block_series_round_trip() {
        let blocks = (0..4).map(|k| vec![2.0 / (k + 1) as f64, 0.1, 0.1, 1.0]).collect();
        let fs_in = BlockTransferSeries::new(0.05, 0.02, vec![-0.05, 0.05], blocks).unwrap();
        let dir = tmp("block");
        write_block_series(&dir, &fs_in, &Provenance::new()).unwrap();
        assert_eq!(read_block_series::<f64>(&dir).unwrap(), fs_in);
        fs::remove_dir_all(dir).ok();
    }
}
