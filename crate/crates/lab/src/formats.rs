//! Text formats: edge lists, moment and density CSVs, trajectories, angle
//! lists and generic numeric tables.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a file
//! read back reproduces the same `f64` bit patterns and rewriting it gives
//! the same bytes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use kuramoto_core::graph::SparseGraph;
use kuramoto_core::manifold::PhaseRecord;
use kuramoto_core::mean_field::FourierDensity;
use kuramoto_core::torus::{wrap, EmpiricalSpectrum, TorusAngle};
use num_complex::Complex64;

use crate::error::{io_err, LabError, Result};

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(io_err(path))?))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> LabError {
    LabError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// `n m p sym` then one `i j w` line per stored entry.
pub fn write_edge_list<W: Write>(g: &SparseGraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {} {} {}", g.n(), g.nnz(), g.dilution(), u8::from(g.is_symmetric()))?;
    for (i, j, w) in g.entries() {
        writeln!(out, "{i} {j} {w}")?;
    }
    out.flush()
}

pub fn save_edge_list(g: &SparseGraph, path: &Path) -> Result<()> {
    write_edge_list(g, create(path)?).map_err(io_err(path))
}

pub fn read_edge_list<R: Read>(input: R, path: &Path) -> Result<SparseGraph> {
    let mut lines = BufReader::new(input).lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let header = header.map_err(io_err(path))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(parse_err(path, 1, "header must be `n m p_n sym`"));
    }
    let bad = |what: &str| parse_err(path, 1, format!("invalid {what}"));
    let n: usize = fields[0].parse().map_err(|_| bad("vertex count"))?;
    let m: usize = fields[1].parse().map_err(|_| bad("entry count"))?;
    let p: f64 = fields[2].parse().map_err(|_| bad("dilution"))?;
    let sym = match fields[3] {
        "0" => false,
        "1" => true,
        _ => return Err(bad("symmetry flag (expected 0 or 1)")),
    };
    let mut entries = Vec::with_capacity(m);
    for (idx, line) in lines {
        let line = line.map_err(io_err(path))?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(path, line_no, "expected `i j w`"));
        }
        let parse = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| parse_err(path, line_no, format!("not an index: {s}")))
        };
        let w: u32 = f[2]
            .parse()
            .map_err(|_| parse_err(path, line_no, format!("not a multiplicity: {}", f[2])))?;
        entries.push((parse(f[0])?, parse(f[1])?, w));
    }
    if entries.len() != m {
        return Err(parse_err(
            path,
            1,
            format!("header announces {m} entries, file has {}", entries.len()),
        ));
    }
    Ok(SparseGraph::from_entries(n, &entries, p, sym)?)
}

pub fn load_edge_list(path: &Path) -> Result<SparseGraph> {
    read_edge_list(File::open(path).map_err(io_err(path))?, path)
}

/// Numeric CSV with a header row.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| parse_err(path, k + 2, format!("not a number: {s}"))))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(parse_err(path, k + 2, "row length differs from header"));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn expect_header(path: &Path, header: &[String], expected: &[&str]) -> Result<()> {
    if header.len() != expected.len() || header.iter().zip(expected).any(|(a, b)| a != b) {
        return Err(parse_err(path, 1, format!("expected header {}", expected.join(","))));
    }
    Ok(())
}

fn integer_index(path: &Path, line: usize, x: f64, expected: usize) -> Result<()> {
    if x != expected as f64 {
        return Err(parse_err(path, line, format!("expected l = {expected}, found {x}")));
    }
    Ok(())
}

/// `l,re,im` for `l = 1..=L`.
pub fn save_spectrum(spec: &EmpiricalSpectrum, path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = spec
        .moments()
        .iter()
        .enumerate()
        .map(|(k, m)| vec![(k + 1) as f64, m.re, m.im])
        .collect();
    write_table(path, &columns(&["l", "re", "im"]), &rows)
}

pub fn load_spectrum(path: &Path) -> Result<EmpiricalSpectrum> {
    let (header, rows) = read_table(path)?;
    expect_header(path, &header, &["l", "re", "im"])?;
    let mut moments = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        integer_index(path, k + 2, row[0], k + 1)?;
        moments.push(Complex64::new(row[1], row[2]));
    }
    Ok(EmpiricalSpectrum::from_moments(moments, 0)?)
}

/// `l,re,im` for `l = 0..=L`.
pub fn save_density(d: &FourierDensity, path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = d
        .coeffs()
        .iter()
        .enumerate()
        .map(|(l, c)| vec![l as f64, c.re, c.im])
        .collect();
    write_table(path, &columns(&["l", "re", "im"]), &rows)
}

pub fn load_density(path: &Path) -> Result<FourierDensity> {
    let (header, rows) = read_table(path)?;
    expect_header(path, &header, &["l", "re", "im"])?;
    let mut coeffs = Vec::with_capacity(rows.len());
    for (l, row) in rows.iter().enumerate() {
        integer_index(path, l + 2, row[0], l)?;
        coeffs.push(Complex64::new(row[1], row[2]));
    }
    Ok(FourierDensity::from_coeffs(coeffs)?)
}

pub fn trajectory_header(order: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for l in 1..=order {
        h.push(format!("re_m{l}"));
        h.push(format!("im_m{l}"));
    }
    h
}

/// `t, re_m1, im_m1, ..., re_mL, im_mL`, one row per record.
pub fn save_trajectory(records: &[(f64, EmpiricalSpectrum)], path: &Path) -> Result<()> {
    let order = records.first().map_or(1, |r| r.1.order());
    let rows: Vec<Vec<f64>> = records
        .iter()
        .map(|(t, s)| {
            let mut row = Vec::with_capacity(2 * order + 1);
            row.push(*t);
            for m in s.moments() {
                row.push(m.re);
                row.push(m.im);
            }
            row
        })
        .collect();
    write_table(path, &trajectory_header(order), &rows)
}

pub fn load_trajectory(path: &Path) -> Result<Vec<(f64, EmpiricalSpectrum)>> {
    let (header, rows) = read_table(path)?;
    if header.len() < 3 || header.len() % 2 == 0 {
        return Err(parse_err(path, 1, "expected t followed by re/im pairs"));
    }
    let order = (header.len() - 1) / 2;
    if header != trajectory_header(order) {
        return Err(parse_err(path, 1, "expected header t,re_m1,im_m1,..."));
    }
    rows.into_iter()
        .map(|row| {
            let moments = row[1..].chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            Ok((row[0], EmpiricalSpectrum::from_moments(moments, 0)?))
        })
        .collect()
}

/// `t,dist,psi`.
pub fn save_phase_track(track: &[PhaseRecord], path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = track.iter().map(|r| vec![r.time, r.dist, r.psi]).collect();
    write_table(path, &columns(&["t", "dist", "psi"]), &rows)
}

pub fn save_angles(angles: &[TorusAngle], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    for a in angles {
        writeln!(out, "{}", a.value()).map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

pub fn load_angles(path: &Path) -> Result<Vec<TorusAngle>> {
    let mut angles = Vec::new();
    for (k, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let s = line.trim();
        if s.is_empty() {
            continue;
        }
        let x: f64 = s.parse().map_err(|_| parse_err(path, k + 1, format!("not a number: {s}")))?;
        angles.push(wrap(x)?);
    }
    Ok(angles)
}
