//! CSV formats for exponential sums (`omega,re,im`), zero sets
//! (`point,multiplicity`) and point measures (`gamma,re,im`, the `γ = 0` row
//! carrying the density).

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::diffraction::{Atom, PointMeasure};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::wiener::{AlgebraConfig, ExpSum, Term};
use crate::zeros::{ZeroPoint, ZeroSet};

pub const EXPSUM_HEADER: [&str; 3] = ["omega", "re", "im"];
pub const ZEROSET_HEADER: [&str; 2] = ["point", "multiplicity"];
pub const MEASURE_HEADER: [&str; 3] = ["gamma", "re", "im"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    ExpSum,
    ZeroSet,
    Measure,
}

/// A parsed object with the non-fatal remarks made while reading it.
#[derive(Clone, Debug, PartialEq)]
pub struct Parsed<V> {
    pub value: V,
    pub warnings: Vec<String>,
}

/// Window sidecar written next to a zero-set CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSidecar {
    pub window: (f64, f64),
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, want: &[&str]) -> Result<()> {
    let got = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if got.iter().ne(want.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "header must be exactly `{}`, found `{}`",
                want.join(","),
                got.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    Ok(())
}

/// Reads the header line and reports which format it names.
pub fn detect_kind(path: &Path) -> Result<InputKind> {
    let mut rdr = reader(File::open(path)?);
    let h = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let fields: Vec<&str> = h.iter().collect();
    match fields.as_slice() {
        f if f == EXPSUM_HEADER => Ok(InputKind::ExpSum),
        f if f == ZEROSET_HEADER => Ok(InputKind::ZeroSet),
        f if f == MEASURE_HEADER => Ok(InputKind::Measure),
        _ => Err(Error::Parse {
            line: 1,
            message: format!("unrecognised header `{}`", fields.join(",")),
        }),
    }
}

/// Rows as `(line, fields)`.
fn rows<R: Read>(rdr: &mut csv::Reader<R>, width: usize) -> Result<Vec<(u64, Vec<String>)>> {
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

fn number<T: Real>(line: u64, field: &str, name: &str) -> Result<T> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{name}: `{field}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!("line {line}: {name} is not finite")));
    }
    Ok(T::lit(v))
}

pub fn parse_exp_sum<T: Real, R: Read>(r: R, cfg: &AlgebraConfig<T>) -> Result<ExpSum<T>> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &EXPSUM_HEADER)?;
    let mut raw = Vec::new();
    for (line, f) in rows(&mut rdr, 3)? {
        let omega = number(line, &f[0], "omega")?;
        let re = number(line, &f[1], "re")?;
        let im = number(line, &f[2], "im")?;
        raw.push(Term::new(omega, Complex::new(re, im)));
    }
    ExpSum::canonicalize(raw, cfg)
}

pub fn read_exp_sum<T: Real>(path: &Path, cfg: &AlgebraConfig<T>) -> Result<ExpSum<T>> {
    parse_exp_sum(File::open(path)?, cfg)
}

/// Points may come in any order; repeated points add their multiplicities.
/// Without a window, the window is the hull of the points.
pub fn parse_zero_set<T: Real, R: Read>(r: R, window: Option<(T, T)>) -> Result<Parsed<ZeroSet<T>>> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &ZEROSET_HEADER)?;
    let mut pts: Vec<ZeroPoint<T>> = Vec::new();
    for (line, f) in rows(&mut rdr, 2)? {
        let a = number(line, &f[0], "point")?;
        let mult: u32 = f[1].parse().map_err(|_| Error::Parse {
            line,
            message: format!("multiplicity `{}` is not a positive integer", f[1]),
        })?;
        if mult == 0 {
            return Err(Error::Parse {
                line,
                message: "multiplicity must be positive".into(),
            });
        }
        pts.push(ZeroPoint { a, mult });
    }
    pts.sort_by(|x, y| x.a.partial_cmp(&y.a).expect("finite"));
    let mut warnings = Vec::new();
    let mut merged: Vec<ZeroPoint<T>> = Vec::with_capacity(pts.len());
    for p in pts {
        match merged.last_mut() {
            Some(last) if last.a == p.a => {
                warnings.push(format!("repeated point {}: multiplicities added", p.a));
                last.mult += p.mult;
            }
            _ => merged.push(p),
        }
    }
    let window = match window {
        Some(w) => w,
        None => match (merged.first(), merged.last()) {
            (Some(lo), Some(hi)) => (lo.a, hi.a),
            _ => (T::zero(), T::zero()),
        },
    };
    Ok(Parsed {
        value: ZeroSet::new(window, merged)?,
        warnings,
    })
}

/// Uses the JSON sidecar for the window when `window` is `None` and the
/// sidecar exists.
pub fn read_zero_set<T: Real>(path: &Path, window: Option<(T, T)>) -> Result<Parsed<ZeroSet<T>>> {
    let window = match window {
        Some(w) => Some(w),
        None => {
            let side = sidecar_path(path);
            if side.exists() {
                let s: WindowSidecar = serde_json::from_reader(File::open(&side)?)
                    .map_err(|e| Error::Parse {
                        line: e.line() as u64,
                        message: format!("{}: {e}", side.display()),
                    })?;
                Some((T::lit(s.window.0), T::lit(s.window.1)))
            } else {
                None
            }
        }
    };
    parse_zero_set(File::open(path)?, window)
}

/// Rows with equal `γ` are summed, with a warning.
pub fn parse_measure<T: Real, R: Read>(r: R) -> Result<Parsed<PointMeasure<T>>> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &MEASURE_HEADER)?;
    let mut entries: Vec<(T, Complex<T>)> = Vec::new();
    for (line, f) in rows(&mut rdr, 3)? {
        let g = number(line, &f[0], "gamma")?;
        let re = number(line, &f[1], "re")?;
        let im = number(line, &f[2], "im")?;
        entries.push((g, Complex::new(re, im)));
    }
    entries.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
    let mut warnings = Vec::new();
    let mut merged: Vec<(T, Complex<T>)> = Vec::with_capacity(entries.len());
    for (g, b) in entries {
        match merged.last_mut() {
            Some(last) if last.0 == g => {
                warnings.push(format!("repeated gamma {g}: masses summed"));
                last.1 += b;
            }
            _ => merged.push((g, b)),
        }
    }
    let mut d = T::zero();
    let mut atoms = Vec::with_capacity(merged.len());
    for (gamma, b) in merged {
        if gamma == T::zero() {
            if b.im != T::zero() {
                warnings.push("imaginary part of the density row ignored".into());
            }
            d = b.re;
        } else {
            atoms.push(Atom { gamma, b });
        }
    }
    Ok(Parsed {
        value: PointMeasure::new(d, atoms, None)?,
        warnings,
    })
}

pub fn read_measure<T: Real>(path: &Path) -> Result<Parsed<PointMeasure<T>>> {
    parse_measure(File::open(path)?)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_exp_sum<T: Real, W: Write>(w: W, f: &ExpSum<T>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(EXPSUM_HEADER).map_err(csv_err)?;
    for t in f.terms() {
        wtr.write_record([format!("{:?}", t.omega), format!("{:?}", t.q.re), format!("{:?}", t.q.im)])
            .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_zero_set<T: Real, W: Write>(w: W, a: &ZeroSet<T>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(ZEROSET_HEADER).map_err(csv_err)?;
    for p in a.points() {
        wtr.write_record([format!("{:?}", p.a), p.mult.to_string()])
            .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_measure<T: Real, W: Write>(w: W, mu: &PointMeasure<T>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(MEASURE_HEADER).map_err(csv_err)?;
    let mut rows: Vec<(T, Complex<T>)> = mu.atoms.iter().map(|a| (a.gamma, a.b)).collect();
    rows.push((T::zero(), Complex::new(mu.d, T::zero())));
    rows.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
    for (g, b) in rows {
        wtr.write_record([format!("{g:?}"), format!("{:?}", b.re), format!("{:?}", b.im)])
            .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_sum_roundtrip() {
        let src = "omega,re,im\n0.5,0.5,0\n-0.5,0.5,0\n";
        let f: ExpSum<f64> = parse_exp_sum(src.as_bytes(), &AlgebraConfig::default()).unwrap();
        assert_eq!(f, ExpSum::cosine(0.5));
        let mut buf = Vec::new();
        write_exp_sum(&mut buf, &f).unwrap();
        let g: ExpSum<f64> = parse_exp_sum(buf.as_slice(), &AlgebraConfig::default()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn header_and_row_errors_carry_lines() {
        let bad = "omega,re\n1,2\n";
        let e = parse_exp_sum::<f64, _>(bad.as_bytes(), &AlgebraConfig::default()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let bad = "omega,re,im\n1,2,3\n1,x,3\n";
        let e = parse_exp_sum::<f64, _>(bad.as_bytes(), &AlgebraConfig::default()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
        let nan = "omega,re,im\nNaN,1,0\n";
        assert!(matches!(
            parse_exp_sum::<f64, _>(nan.as_bytes(), &AlgebraConfig::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn zero_set_parse() {
        let src = "point,multiplicity\n1.5,1\n-0.5,2\n1.5,1\n";
        let p = parse_zero_set::<f64, _>(src.as_bytes(), Some((-2.0, 2.0))).unwrap();
        assert_eq!(p.value.len(), 2);
        assert_eq!(p.value.total_count(), 4);
        assert_eq!(p.warnings.len(), 1);
        let mut buf = Vec::new();
        write_zero_set(&mut buf, &p.value).unwrap();
        let q = parse_zero_set::<f64, _>(buf.as_slice(), Some((-2.0, 2.0))).unwrap();
        assert_eq!(q.value, p.value);
    }

    #[test]
    fn measure_duplicates_summed() {
        let src = "gamma,re,im\n0,1,0\n1,-0.5,0\n1,-0.5,0\n-1,-1,0\n";
        let p = parse_measure::<f64, _>(src.as_bytes()).unwrap();
        assert_eq!(p.value.d, 1.0);
        assert_eq!(p.value.atoms.len(), 2);
        assert_eq!(p.value.mass_at(1.0, 0.0), Some(Complex::new(-1.0, 0.0)));
        assert_eq!(p.warnings.len(), 1);
    }
}
