//! Plain-text file formats.
//!
//! Lines starting with `#` and blank lines are ignored unless noted.
//!
//! * Complex vector: one entry per line, `re im`.
//! * Intensities: one real per line.
//! * Ensemble: a header line `kind N L` followed by `L` vectors of `N`
//!   lines `re im`, each vector terminated by a blank line.
//!
//! Numbers are written in the shortest form that reads back exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::measurements::{Ensemble, EnsembleKind, IntensityVector};
use crate::numerics::{Complex64, ComplexVector};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse { line, msg: format!("'{tok}' is not a number") })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, msg: format!("non-finite value '{tok}'") });
    }
    Ok(v)
}

fn parse_complex(line: usize, text: &str) -> Result<Complex64> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    match toks[..] {
        [re] => Ok(Complex64::new(parse_f64(line, re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse_f64(line, re)?, parse_f64(line, im)?)),
        _ => Err(Error::Parse { line, msg: "expected 're im'".into() }),
    }
}

pub fn parse_vector(text: &str) -> Result<ComplexVector> {
    let entries = data_lines(text).map(|(n, l)| parse_complex(n, l)).collect::<Result<Vec<_>>>()?;
    if entries.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no vector entries".into() });
    }
    ComplexVector::new(entries)
}

pub fn format_vector(x: &ComplexVector) -> String {
    let mut out = String::new();
    for z in x.iter() {
        let _ = writeln!(out, "{} {}", z.re, z.im);
    }
    out
}

pub fn parse_intensities(text: &str) -> Result<IntensityVector> {
    let values = data_lines(text).map(|(n, l)| parse_f64(n, l)).collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no measurements".into() });
    }
    Ok(IntensityVector::new(values))
}

pub fn format_intensities(b: &IntensityVector) -> String {
    let mut out = String::new();
    if let Some(v) = b.noise_variance() {
        let _ = writeln!(out, "# noise_variance {v}");
    }
    for v in b.values() {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn parse_ensemble(text: &str) -> Result<Ensemble> {
    let mut lines = data_lines(text);
    let (hline, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let [kind, n, l] = toks[..] else {
        return Err(Error::Parse { line: hline, msg: "header must be 'kind N L'".into() });
    };
    let kind: EnsembleKind = kind.parse().map_err(|e: Error| Error::Parse { line: hline, msg: e.to_string() })?;
    let bad = |what: &str| Error::Parse { line: hline, msg: format!("invalid {what}") };
    let n: usize = n.parse().map_err(|_| bad("N"))?;
    let l: usize = l.parse().map_err(|_| bad("L"))?;
    if n == 0 || l == 0 {
        return Err(bad("dimensions"));
    }
    let entries = lines.map(|(k, s)| parse_complex(k, s)).collect::<Result<Vec<_>>>()?;
    if entries.len() != n * l {
        return Err(Error::Parse { line: 0, msg: format!("expected {} entries, found {}", n * l, entries.len()) });
    }
    let vectors = entries.chunks(n).map(|c| ComplexVector::new(c.to_vec())).collect::<Result<Vec<_>>>()?;
    Ensemble::from_vectors(kind, n, vectors)
}

pub fn format_ensemble(e: &Ensemble) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", e.kind(), e.dim(), e.len());
    for v in e.vectors() {
        out.push_str(&format_vector(v));
        out.push('\n');
    }
    out
}

pub fn read_vector(path: &Path) -> Result<ComplexVector> {
    parse_vector(&fs::read_to_string(path)?)
}

pub fn write_vector(path: &Path, x: &ComplexVector) -> Result<()> {
    Ok(fs::write(path, format_vector(x))?)
}

pub fn read_intensities(path: &Path) -> Result<IntensityVector> {
    parse_intensities(&fs::read_to_string(path)?)
}

pub fn write_intensities(path: &Path, b: &IntensityVector) -> Result<()> {
    Ok(fs::write(path, format_intensities(b))?)
}

pub fn read_ensemble(path: &Path) -> Result<Ensemble> {
    parse_ensemble(&fs::read_to_string(path)?)
}

pub fn write_ensemble(path: &Path, e: &Ensemble) -> Result<()> {
    Ok(fs::write(path, format_ensemble(e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gaussian_complex, Rng};

    #[test]
    fn vector_round_trip_is_exact() {
        let x = gaussian_complex(&mut Rng::new(41, 0), 7, 1.0);
        assert_eq!(parse_vector(&format_vector(&x)).unwrap(), x);
        let parsed = parse_vector("# comment\n1 2\n\n3\n").unwrap();
        assert_eq!(parsed.as_slice(), &[Complex64::new(1.0, 2.0), Complex64::new(3.0, 0.0)]);
    }

    #[test]
    fn vector_parse_errors() {
        assert!(matches!(parse_vector("1 2\nx 3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_vector("1 2 3\n").is_err());
        assert!(parse_vector("# empty\n").is_err());
        assert!(parse_vector("nan 0\n").is_err());
    }

    #[test]
    fn intensities_round_trip() {
        let b = IntensityVector::with_noise_variance(vec![0.25, -1e-300, 3.0], 0.01);
        let back = parse_intensities(&format_intensities(&b)).unwrap();
        assert_eq!(back.values(), b.values());
    }

    #[test]
    fn ensemble_round_trip() {
        let e = Ensemble::build(EnsembleKind::Psi, 8).unwrap();
        let text = format_ensemble(&e);
        assert!(text.starts_with("psi 8 28\n"));
        let back = parse_ensemble(&text).unwrap();
        assert_eq!(back.kind(), EnsembleKind::Psi);
        assert_eq!(back.vectors(), e.vectors());

        let r = Ensemble::random(&mut Rng::new(42, 0), 3, 5).unwrap();
        assert_eq!(parse_ensemble(&format_ensemble(&r)).unwrap().vectors(), r.vectors());
    }

    #[test]
    fn ensemble_parse_errors() {
        assert!(parse_ensemble("").is_err());
        assert!(parse_ensemble("psi 3\n").is_err());
        assert!(parse_ensemble("blob 2 1\n1 0\n0 0\n").is_err());
        assert!(parse_ensemble("random 2 2\n1 0\n0 0\n").is_err());
        // deterministic kinds need exactly 4(N-1) vectors
        assert!(parse_ensemble("phi 2 1\n1 0\n0 0\n").is_err());
    }
}
