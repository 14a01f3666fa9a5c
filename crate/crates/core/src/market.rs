//! Matrix Market coordinate-format reader and writer.
//!
//! Reading accepts the `real` field with `general` or `symmetric` qualifiers
//! and expands symmetric storage. Writing always emits `general` coordinate
//! format with 1-based indices sorted by (row, col) and 17 significant digits,
//! so a write/read round trip reproduces every value bit-exactly.

use crate::csr::CsrMatrix;
use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let file = File::open(path)?;
    read_matrix_market_from(BufReader::new(file))
}

pub fn write_matrix_market(a: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_matrix_market_to(a, BufWriter::new(file))
}

pub fn read_matrix_market_from(reader: impl BufRead) -> Result<CsrMatrix> {
    let mut lines = reader.lines().enumerate();

    let (line_no, header) = match lines.next() {
        Some((i, line)) => (i + 1, line?),
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty file".into(),
            })
        }
    };
    let symmetric = parse_header(&header, line_no)?;

    // Skip comments, find the dimension line.
    let mut dims = None;
    let mut dims_line = 0;
    for (i, line) in &mut lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        dims = Some(trimmed.to_string());
        dims_line = i + 1;
        break;
    }
    let dims = dims.ok_or(Error::Parse {
        line: dims_line.max(1),
        msg: "missing dimension line".into(),
    })?;
    let mut it = dims.split_whitespace();
    let n_rows = parse_usize(it.next(), dims_line, "row count")?;
    let n_cols = parse_usize(it.next(), dims_line, "column count")?;
    let nnz = parse_usize(it.next(), dims_line, "nonzero count")?;

    let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut seen = 0usize;
    for (i, line) in &mut lines {
        let line = line?;
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let row = parse_usize(it.next(), line_no, "row index")?;
        let col = parse_usize(it.next(), line_no, "column index")?;
        let value: f64 = match it.next() {
            Some(tok) => tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid real value '{tok}'"),
            })?,
            None => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "missing value field".into(),
                })
            }
        };
        if row == 0 || col == 0 {
            return Err(Error::Parse {
                line: line_no,
                msg: "indices are 1-based; found index 0".into(),
            });
        }
        if row > n_rows || col > n_cols {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("index ({row}, {col}) exceeds declared size {n_rows}x{n_cols}"),
            });
        }
        triplets.push((row - 1, col - 1, value));
        if symmetric && row != col {
            triplets.push((col - 1, row - 1, value));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::Parse {
            line: dims_line,
            msg: format!("declared {nnz} entries but found {seen}"),
        });
    }
    CsrMatrix::from_triplets(n_rows, n_cols, &triplets)
}

pub fn write_matrix_market_to(a: &CsrMatrix, mut writer: impl Write) -> Result<()> {
    writeln!(writer, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(writer, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for (i, j, v) in a.iter_entries() {
        writeln!(writer, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    writer.flush()?;
    Ok(())
}

fn parse_header(header: &str, line: usize) -> Result<bool> {
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(Error::Parse {
            line,
            msg: "header must start with %%MatrixMarket".into(),
        });
    }
    let expect = |idx: usize, want: &[&str], what: &str| -> Result<String> {
        match tokens.get(idx) {
            Some(tok) if want.contains(&tok.as_str()) => Ok(tok.clone()),
            Some(tok) => Err(Error::Parse {
                line,
                msg: format!("unsupported {what} '{tok}' (expected one of {want:?})"),
            }),
            None => Err(Error::Parse {
                line,
                msg: format!("missing {what} in header"),
            }),
        }
    };
    expect(1, &["matrix"], "object")?;
    expect(2, &["coordinate"], "format")?;
    expect(3, &["real"], "field")?;
    let qualifier = expect(4, &["general", "symmetric"], "symmetry qualifier")?;
    Ok(qualifier == "symmetric")
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    match tok {
        Some(tok) => tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid {what} '{tok}'"),
        }),
        None => Err(Error::Parse {
            line,
            msg: format!("missing {what}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn roundtrip(a: &CsrMatrix) -> CsrMatrix {
        let mut buf = Vec::new();
        write_matrix_market_to(a, &mut buf).unwrap();
        read_matrix_market_from(buf.as_slice()).unwrap()
    }

    #[test]
    fn roundtrip_of_model_matrix_is_bit_exact() {
        let a = crate::problems::build_1d(8, 2.0, 0.0).unwrap().matrix;
        assert_eq!(roundtrip(&a), a);
    }

    #[test]
    fn symmetric_qualifier_expands_lower_triangle() {
        let text =
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 2.0\n2 1 -1.0\n2 2 2.0\n";
        let a = read_matrix_market_from(text.as_bytes()).unwrap();
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 0), -1.0);
    }

    #[test]
    fn zero_index_is_rejected_with_line_number() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 2.0\n";
        match read_matrix_market_from(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_real_field_is_rejected() {
        let text = "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 2.0 0.0\n";
        assert!(matches!(
            read_matrix_market_from(text.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn file_roundtrip() {
        let dir = std::env::temp_dir().join("sparselab-mm-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.mtx");
        let a = crate::problems::build_1d(8, 2.0, 0.0).unwrap().matrix;
        write_matrix_market(&a, &path).unwrap();
        let b = read_matrix_market(&path).unwrap();
        assert_eq!(a, b);
        std::fs::remove_file(&path).ok();
    }

    proptest! {
        /// Round trips preserve every value bit-exactly.
        #[test]
        fn roundtrip_preserves_bits(
            n in 1usize..12,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut trip = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if rng.gen::<f64>() < 0.4 {
                        // Mix magnitudes to exercise the formatter.
                        let v = (rng.gen::<f64>() - 0.5) * 10f64.powi(rng.gen_range(-12..12));
                        trip.push((i, j, v));
                    }
                }
            }
            let a = CsrMatrix::from_triplets(n, n, &trip).unwrap();
            let b = roundtrip(&a);
            prop_assert_eq!(a.n_rows(), b.n_rows());
            prop_assert_eq!(a.nnz(), b.nnz());
            for ((_, _, va), (_, _, vb)) in a.iter_entries().zip(b.iter_entries()) {
                prop_assert_eq!(va.to_bits(), vb.to_bits());
            }
        }
    }
}
