//! MatrixMarket I/O for dense matrices.
//!
//! Reads both `coordinate` and `array` layouts with `real`, `integer`,
//! `complex` or `pattern` fields and any of the `general`, `symmetric`,
//! `skew-symmetric` and `hermitian` symmetries. Writes the `array` layout
//! with 17 significant digits so a write/read cycle is bit-exact.

use num_complex::Complex64 as C64;
use spectral_dc::Matrix;
use std::fmt::Write as _;

/// Position of a malformed token, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

impl Symmetry {
    fn mirror(self, v: C64) -> C64 {
        match self {
            Symmetry::General | Symmetry::Symmetric => v,
            Symmetry::SkewSymmetric => -v,
            Symmetry::Hermitian => v.conj(),
        }
    }
}

/// Whitespace-separated tokens of one line with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((line[..s].chars().count() + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    out
}

struct Cursor<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    last_line: usize,
}

impl<'a> Cursor<'a> {
    /// Next line that is neither blank nor a comment.
    fn next_data(&mut self) -> Option<(usize, Vec<(usize, &'a str)>)> {
        for (i, line) in self.lines.by_ref() {
            self.last_line = i + 1;
            let t = line.trim_start();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            return Some((i + 1, tokens(line)));
        }
        None
    }

    fn eof(&self, what: &str) -> ParseError {
        ParseError { line: self.last_line + 1, column: 1, message: format!("unexpected end of file, expected {what}") }
    }
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

fn parse_num<T: std::str::FromStr>(line: usize, (col, tok): (usize, &str), what: &str) -> Result<T, ParseError> {
    tok.parse().map_err(|_| err(line, col, format!("expected {what}, found `{tok}`")))
}

fn parse_value(line: usize, toks: &[(usize, &str)], field: Field) -> Result<C64, ParseError> {
    match field {
        Field::Pattern => Ok(C64::new(1.0, 0.0)),
        Field::Real => Ok(C64::new(parse_num(line, toks[0], "a real number")?, 0.0)),
        Field::Complex => Ok(C64::new(parse_num(line, toks[0], "a real part")?, parse_num(line, toks[1], "an imaginary part")?)),
    }
}

fn value_width(field: Field) -> usize {
    match field {
        Field::Pattern => 0,
        Field::Real => 1,
        Field::Complex => 2,
    }
}

fn check_arity(line: usize, toks: &[(usize, &str)], want: usize) -> Result<(), ParseError> {
    if toks.len() < want {
        let col = toks.last().map_or(1, |(c, t)| c + t.chars().count());
        return Err(err(line, col, format!("expected {want} fields, found {}", toks.len())));
    }
    if toks.len() > want {
        return Err(err(line, toks[want].0, format!("unexpected trailing field `{}`", toks[want].1)));
    }
    Ok(())
}

/// Parses a MatrixMarket file into a dense complex matrix.
pub fn parse(text: &str) -> Result<Matrix<C64>, ParseError> {
    let mut lines = text.lines().enumerate();
    let header = match lines.next() {
        Some((_, h)) => h,
        None => return Err(err(1, 1, "empty file")),
    };
    let head = tokens(header);
    if head.first().map(|t| t.1.to_ascii_lowercase()) != Some("%%matrixmarket".into()) {
        return Err(err(1, 1, "missing `%%MatrixMarket` banner"));
    }
    if head.len() != 5 {
        return Err(err(1, head.last().map_or(1, |t| t.0), "banner needs object, format, field and symmetry"));
    }
    let word = |k: usize| head[k].1.to_ascii_lowercase();
    if word(1) != "matrix" {
        return Err(err(1, head[1].0, format!("unsupported object `{}`", head[1].1)));
    }
    let layout = match word(2).as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        _ => return Err(err(1, head[2].0, format!("unknown format `{}`", head[2].1))),
    };
    let field = match word(3).as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        "pattern" if layout == Layout::Coordinate => Field::Pattern,
        _ => return Err(err(1, head[3].0, format!("unsupported field `{}`", head[3].1))),
    };
    let symmetry = match word(4).as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" if field == Field::Complex => Symmetry::Hermitian,
        "hermitian" => Symmetry::Symmetric,
        _ => return Err(err(1, head[4].0, format!("unknown symmetry `{}`", head[4].1))),
    };

    let mut cur = Cursor { lines, last_line: 1 };
    let (sl, size) = cur.next_data().ok_or_else(|| cur.eof("a size line"))?;
    let want = if layout == Layout::Coordinate { 3 } else { 2 };
    check_arity(sl, &size, want)?;
    let rows: usize = parse_num(sl, size[0], "a row count")?;
    let cols: usize = parse_num(sl, size[1], "a column count")?;
    if symmetry != Symmetry::General && rows != cols {
        return Err(err(sl, size[1].0, format!("{rows}x{cols} matrix cannot be {:?}", symmetry).to_lowercase()));
    }
    let mut m = Matrix::zeros(rows, cols);
    let width = value_width(field);

    match layout {
        Layout::Coordinate => {
            let nnz: usize = parse_num(sl, size[2], "an entry count")?;
            for _ in 0..nnz {
                let (ln, t) = cur.next_data().ok_or_else(|| cur.eof("another entry"))?;
                check_arity(ln, &t, 2 + width)?;
                let i: usize = parse_num(ln, t[0], "a row index")?;
                let j: usize = parse_num(ln, t[1], "a column index")?;
                if i == 0 || i > rows {
                    return Err(err(ln, t[0].0, format!("row index {i} outside 1..={rows}")));
                }
                if j == 0 || j > cols {
                    return Err(err(ln, t[1].0, format!("column index {j} outside 1..={cols}")));
                }
                if symmetry != Symmetry::General && j > i {
                    return Err(err(ln, t[1].0, "entry above the diagonal in a symmetric file"));
                }
                let v = parse_value(ln, &t[2..], field)?;
                m[(i - 1, j - 1)] += v;
                if symmetry != Symmetry::General && i != j {
                    m[(j - 1, i - 1)] += symmetry.mirror(v);
                }
            }
        }
        Layout::Array => {
            for j in 0..cols {
                let first = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::Symmetric | Symmetry::Hermitian => j,
                    Symmetry::SkewSymmetric => j + 1,
                };
                for i in first..rows {
                    let (ln, t) = cur.next_data().ok_or_else(|| cur.eof("another value"))?;
                    check_arity(ln, &t, width)?;
                    let v = parse_value(ln, &t, field)?;
                    m[(i, j)] = v;
                    if symmetry != Symmetry::General && i != j {
                        m[(j, i)] = symmetry.mirror(v);
                    }
                }
            }
        }
    }
    if let Some((ln, t)) = cur.next_data() {
        return Err(err(ln, t[0].0, "data after the last entry"));
    }
    Ok(m)
}

/// Reads and parses a file; I/O failures are reported at line 0.
pub fn read(path: &std::path::Path) -> Result<Matrix<C64>, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|e| err(0, 0, format!("{}: {e}", path.display())))?;
    parse(&text)
}

fn push_real(out: &mut String, x: f64) {
    // 17 significant digits reproduce every f64 exactly.
    let _ = write!(out, "{x:.16e}");
}

/// Serializes `m` in the `array` layout. Real storage is used when every
/// imaginary part is zero; exactly Hermitian matrices store one triangle.
pub fn format(m: &Matrix<C64>) -> String {
    let real = m.as_slice().iter().all(|z| z.im == 0.0);
    let symmetric = m.is_square() && m.is_hermitian();
    let symmetry = match (symmetric, real) {
        (false, _) => "general",
        (true, true) => "symmetric",
        (true, false) => "hermitian",
    };
    let mut out = format!(
        "%%MatrixMarket matrix array {} {symmetry}\n{} {}\n",
        if real { "real" } else { "complex" },
        m.rows(),
        m.cols()
    );
    for j in 0..m.cols() {
        for i in if symmetric { j } else { 0 }..m.rows() {
            let z = m[(i, j)];
            push_real(&mut out, z.re);
            if !real {
                out.push(' ');
                push_real(&mut out, z.im);
            }
            out.push('\n');
        }
    }
    out
}

pub fn write(path: &std::path::Path, m: &Matrix<C64>) -> std::io::Result<()> {
    std::fs::write(path, format(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn coordinate_symmetric_real() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% tridiagonal\n3 3 2\n2 1 1.0\n3 2 1.0\n";
        let m = parse(text).unwrap();
        assert_eq!(m[(0, 1)], c(1.0, 0.0));
        assert_eq!(m[(1, 0)], c(1.0, 0.0));
        assert_eq!(m[(2, 1)], c(1.0, 0.0));
        assert_eq!(m[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn array_hermitian_complex() {
        let text = "%%MatrixMarket matrix array complex hermitian\n2 2\n1 0\n2 -3\n4 0\n";
        let m = parse(text).unwrap();
        assert_eq!(m[(1, 0)], c(2.0, -3.0));
        assert_eq!(m[(0, 1)], c(2.0, 3.0));
        assert_eq!(m[(1, 1)], c(4.0, 0.0));
    }

    #[test]
    fn skew_and_pattern() {
        let m = parse("%%MatrixMarket matrix array real skew-symmetric\n2 2\n5\n").unwrap();
        assert_eq!(m[(1, 0)], c(5.0, 0.0));
        assert_eq!(m[(0, 1)], c(-5.0, 0.0));
        let m = parse("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 2\n").unwrap();
        assert_eq!(m[(0, 1)], c(1.0, 0.0));
    }

    #[test]
    fn errors_point_at_the_token() {
        let e = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1   x 1.0\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 5));
        let e = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 1));
        let e = parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n").unwrap_err();
        assert_eq!(e.line, 6);
        let e = parse("%%MatrixMarket matrix array real general\n1 1\n1 2\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 3));
        let e = parse("%%MatrixMarket matrix cube real general\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 23));
        assert_eq!(parse("").unwrap_err().line, 1);
    }

    #[test]
    fn round_trip_is_exact() {
        let vals = [0.1, -1.0 / 3.0, 1e-300, f64::MAX, -0.0, 5e-324, std::f64::consts::PI];
        let general = Matrix::from_fn(3, 4, |i, j| c(vals[(i + j) % 7], vals[(2 * i + j) % 7]));
        let back = parse(&format(&general)).unwrap();
        for (a, b) in general.as_slice().iter().zip(back.as_slice()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        let h = Matrix::from_fn(3, 3, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => c(vals[i], 0.0),
            std::cmp::Ordering::Greater => c(vals[i + j], vals[i + 2]),
            std::cmp::Ordering::Less => c(vals[i + j], -vals[j + 2]),
        });
        let text = format(&h);
        assert!(text.starts_with("%%MatrixMarket matrix array complex hermitian"));
        assert_eq!(parse(&text).unwrap(), h);
        let real = Matrix::from_fn(2, 2, |i, j| c(vals[i + j], 0.0));
        assert!(format(&real).contains("real symmetric"));
        assert_eq!(parse(&format(&real)).unwrap(), real);
    }
}
