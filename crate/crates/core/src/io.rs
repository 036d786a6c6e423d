//! Grid and coefficient file formats.
//!
//! Text: one matrix row per line, entries separated by commas, real numbers
//! with 17 significant digits, complex numbers written `re+imi` (e.g.
//! `1.5000000000000000e0-2.0000000000000000e-1i`). Blank lines and lines
//! starting with `#` are ignored.
//!
//! Binary: the 4-byte magic `ISCG`, a version byte (1), a kind byte (0 real,
//! 1 complex), two zero bytes, the row and column counts as little-endian
//! `u64`, then the entries row-major as little-endian `f64` (complex entries
//! as `re, im` pairs).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{CoeffArray, Spectrum, C64};

const MAGIC: &[u8; 4] = b"ISCG";
const VERSION: u8 = 1;

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { "" } else { "+" };
    format!("{:.16e}{sign}{:.16e}i", z.re, z.im)
}

pub fn parse_real(tok: &str) -> std::result::Result<f64, String> {
    tok.trim()
        .parse::<f64>()
        .map_err(|e| format!("bad number '{tok}': {e}"))
}

/// Parses `re+imi`, `re-imi`, `imi` or a plain real number.
pub fn parse_complex(tok: &str) -> std::result::Result<C64, String> {
    let t = tok.trim();
    let Some(body) = t.strip_suffix('i') else {
        return parse_real(t).map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = parse_real(&body[..i])?;
            let im = parse_real(&body[i..])?;
            Ok(C64::new(re, im))
        }
        None => parse_real(body).map(|im| C64::new(0.0, im)),
    }
}

fn write_rows<W: Write, T>(
    mut w: W,
    m: &DMatrix<T>,
    fmt: impl Fn(&T) -> String,
) -> Result<()>
where
    T: nalgebra::Scalar,
{
    for r in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols()).map(|c| fmt(&m[(r, c)])).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: BufRead, T: nalgebra::Scalar>(
    r: R,
    parse: impl Fn(&str) -> std::result::Result<T, String>,
) -> Result<DMatrix<T>> {
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let row = t
            .split(',')
            .map(&parse)
            .collect::<std::result::Result<Vec<T>, String>>()
            .map_err(|msg| Error::Parse { line: i + 1, msg })?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no data rows".into(),
        });
    }
    let (nr, nc) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(nr, nc, |r, c| rows[r][c].clone()))
}

pub fn write_real_text<W: Write>(w: W, m: &DMatrix<f64>) -> Result<()> {
    write_rows(w, m, |v| format_real(*v))
}

pub fn write_complex_text<W: Write>(w: W, m: &DMatrix<C64>) -> Result<()> {
    write_rows(w, m, |z| format_complex(*z))
}

pub fn read_real_text<R: BufRead>(r: R) -> Result<DMatrix<f64>> {
    read_rows(r, parse_real)
}

pub fn read_complex_text<R: BufRead>(r: R) -> Result<DMatrix<C64>> {
    read_rows(r, parse_complex)
}

/// Contents of a binary grid file.
#[derive(Debug, Clone, PartialEq)]
pub enum GridData {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

fn write_header<W: Write>(w: &mut W, kind: u8, rows: usize, cols: usize) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION, kind, 0, 0])?;
    w.write_all(&(rows as u64).to_le_bytes())?;
    w.write_all(&(cols as u64).to_le_bytes())?;
    Ok(())
}

pub fn write_real_binary<W: Write>(mut w: W, m: &DMatrix<f64>) -> Result<()> {
    write_header(&mut w, 0, m.nrows(), m.ncols())?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            w.write_all(&m[(r, c)].to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_complex_binary<W: Write>(mut w: W, m: &DMatrix<C64>) -> Result<()> {
    write_header(&mut w, 1, m.nrows(), m.ncols())?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            w.write_all(&m[(r, c)].re.to_le_bytes())?;
            w.write_all(&m[(r, c)].im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn bad(msg: &str) -> Error {
    Error::Parse {
        line: 0,
        msg: msg.to_string(),
    }
}

pub fn read_binary<R: Read>(mut r: R) -> Result<GridData> {
    let mut head = [0u8; 24];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(bad("not an ISCG grid file"));
    }
    if head[4] != VERSION {
        return Err(bad("unsupported ISCG version"));
    }
    let kind = head[5];
    let rows = u64::from_le_bytes(head[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(head[16..24].try_into().unwrap()) as usize;
    let per = match kind {
        0 => 1,
        1 => 2,
        _ => return Err(bad("unknown ISCG kind")),
    };
    let count = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(per))
        .ok_or_else(|| bad("ISCG dimensions overflow"))?;
    let mut raw = Vec::new();
    r.read_to_end(&mut raw)?;
    if raw.len() != count * 8 {
        return Err(bad("ISCG payload length does not match header"));
    }
    let vals: Vec<f64> = raw
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok(match kind {
        0 => GridData::Real(DMatrix::from_row_slice(rows, cols, &vals)),
        _ => GridData::Complex(DMatrix::from_fn(rows, cols, |i, j| {
            let o = 2 * (i * cols + j);
            C64::new(vals[o], vals[o + 1])
        })),
    })
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

/// Writes a real grid, binary when the extension is `.bin`, text otherwise.
pub fn save_spectrum(path: &Path, s: &Spectrum) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    if is_binary(path) {
        write_real_binary(w, s.values())
    } else {
        write_real_text(w, s.values())
    }
}

pub fn load_spectrum(path: &Path) -> Result<Spectrum> {
    if is_binary(path) {
        match read_binary(BufReader::new(File::open(path)?))? {
            GridData::Real(m) => Ok(Spectrum::new(m)),
            GridData::Complex(_) => Err(bad("expected a real grid file")),
        }
    } else {
        Ok(Spectrum::new(read_real_text(BufReader::new(File::open(path)?))?))
    }
}

pub fn save_complex(path: &Path, m: &DMatrix<C64>) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    if is_binary(path) {
        write_complex_binary(w, m)
    } else {
        write_complex_text(w, m)
    }
}

/// Loads a complex matrix; real binary files are promoted.
pub fn load_complex(path: &Path) -> Result<DMatrix<C64>> {
    if is_binary(path) {
        match read_binary(BufReader::new(File::open(path)?))? {
            GridData::Real(m) => Ok(m.map(|v| C64::new(v, 0.0))),
            GridData::Complex(m) => Ok(m),
        }
    } else {
        read_complex_text(BufReader::new(File::open(path)?))
    }
}

pub fn save_coeffs(path: &Path, c: &CoeffArray) -> Result<()> {
    save_complex(path, c.values())
}

pub fn load_coeffs(path: &Path) -> Result<CoeffArray> {
    CoeffArray::from_matrix(load_complex(path)?)
}
