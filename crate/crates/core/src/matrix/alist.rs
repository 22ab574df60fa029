//! alist text format.
//!
//! ```text
//! n m
//! max_col_degree max_row_degree
//! <n column degrees>
//! <m row degrees>
//! <n lines: 1-based check indices of each column>
//! <m lines: 1-based variable indices of each row>
//! ```
//!
//! Entry lines may be padded with zeros up to the maximum degree; zeros are
//! ignored on input and written on output. Blank lines are skipped.

use std::io::{BufRead, Write};

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

pub fn save_alist<W: Write>(matrix: &ParityCheckMatrix, mut sink: W) -> Result<()> {
    sink.write_all(to_alist_string(matrix).as_bytes())?;
    sink.flush()?;
    Ok(())
}

pub fn to_alist_string(h: &ParityCheckMatrix) -> String {
    use std::fmt::Write as _;

    let (max_col, max_row) = (h.max_col_degree(), h.max_row_degree());
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", h.n(), h.m());
    let _ = writeln!(s, "{max_col} {max_row}");
    let join = |it: &mut dyn Iterator<Item = usize>| {
        it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(s, "{}", join(&mut (0..h.n()).map(|i| h.col_degree(i))));
    let _ = writeln!(s, "{}", join(&mut (0..h.m()).map(|j| h.row_degree(j))));
    for i in 0..h.n() {
        let mut entries: Vec<usize> = h.col(i).iter().map(|&c| c as usize + 1).collect();
        entries.resize(max_col, 0);
        let _ = writeln!(s, "{}", join(&mut entries.into_iter()));
    }
    for j in 0..h.m() {
        let mut entries: Vec<usize> = h.row(j).iter().map(|&v| v as usize + 1).collect();
        entries.resize(max_row, 0);
        let _ = writeln!(s, "{}", join(&mut entries.into_iter()));
    }
    s
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-blank line parsed as integers, with its 1-based line number.
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        loop {
            let line = match self.inner.next() {
                Some(line) => line?,
                None => {
                    return Err(Error::parse(
                        self.line_no + 1,
                        format!("unexpected end of input, expected {what}"),
                    ))
                }
            };
            self.line_no += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let nums = trimmed
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| {
                        Error::parse(self.line_no, format!("invalid integer {t:?} in {what}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((self.line_no, nums));
        }
    }
}

pub fn load_alist<R: BufRead>(source: R) -> Result<ParityCheckMatrix> {
    let mut lines = Lines {
        inner: source.lines(),
        line_no: 0,
    };

    let (ln, dims) = lines.next_numbers("header \"n m\"")?;
    let [n, m] = dims[..] else {
        return Err(Error::parse(ln, "header must be \"n m\""));
    };
    if m == 0 || m >= n {
        return Err(Error::parse(ln, format!("shape {m}x{n} must satisfy 0 < m < n")));
    }

    let (ln, maxes) = lines.next_numbers("maximum degrees")?;
    let [max_col, max_row] = maxes[..] else {
        return Err(Error::parse(ln, "second line must be \"max_col_degree max_row_degree\""));
    };

    let (ln, col_deg) = lines.next_numbers("column degrees")?;
    if col_deg.len() != n {
        return Err(Error::parse(ln, format!("expected {n} column degrees, found {}", col_deg.len())));
    }
    if col_deg.iter().any(|&d| d > max_col) {
        return Err(Error::parse(ln, format!("column degree exceeds declared maximum {max_col}")));
    }
    let (ln, row_deg) = lines.next_numbers("row degrees")?;
    if row_deg.len() != m {
        return Err(Error::parse(ln, format!("expected {m} row degrees, found {}", row_deg.len())));
    }
    if row_deg.iter().any(|&d| d > max_row) {
        return Err(Error::parse(ln, format!("row degree exceeds declared maximum {max_row}")));
    }

    let mut edges = Vec::with_capacity(col_deg.iter().sum());
    for (i, &deg) in col_deg.iter().enumerate() {
        let (ln, entries) = lines.next_numbers(&format!("entries of column {}", i + 1))?;
        let listed: Vec<usize> = entries.into_iter().filter(|&x| x != 0).collect();
        if listed.len() != deg {
            return Err(Error::parse(
                ln,
                format!("column {} declares degree {deg} but lists {} entries", i + 1, listed.len()),
            ));
        }
        for c in listed {
            if c > m {
                return Err(Error::parse(ln, format!("check index {c} out of range 1..={m}")));
            }
            edges.push((c - 1, i));
        }
    }

    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); m];
    for &(c, v) in &edges {
        rows[c].push(v as u32);
    }
    for row in rows.iter_mut() {
        row.sort_unstable();
    }
    for (j, &deg) in row_deg.iter().enumerate() {
        let (ln, entries) = lines.next_numbers(&format!("entries of row {}", j + 1))?;
        let mut listed: Vec<u32> = Vec::with_capacity(deg);
        for v in entries.into_iter().filter(|&x| x != 0) {
            if v > n {
                return Err(Error::parse(ln, format!("variable index {v} out of range 1..={n}")));
            }
            listed.push((v - 1) as u32);
        }
        if listed.len() != deg {
            return Err(Error::parse(
                ln,
                format!("row {} declares degree {deg} but lists {} entries", j + 1, listed.len()),
            ));
        }
        listed.sort_unstable();
        if listed != rows[j] {
            return Err(Error::parse(
                ln,
                format!("row {} disagrees with the column lists", j + 1),
            ));
        }
    }

    ParityCheckMatrix::from_edges(n, m, edges).map_err(|e| Error::parse(lines.line_no, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{peg_construct, DegreeProfile};
    use proptest::prelude::*;

    const TOY: &str = "4 2\n2 3\n1 2 2 1\n3 3\n1 0\n1 2\n1 2\n2 0\n1 2 3\n2 3 4\n";

    #[test]
    fn parses_zero_padded_file() {
        let h = load_alist(TOY.as_bytes()).unwrap();
        assert_eq!((h.n(), h.m()), (4, 2));
        assert_eq!(h.row(0), &[0, 1, 2]);
        assert_eq!(h.row(1), &[1, 2, 3]);
        assert_eq!(to_alist_string(&h), TOY);
    }

    #[test]
    fn roundtrip_peg_matrix() {
        let h = peg_construct(8, 4, &DegreeProfile::Regular(2), 7).unwrap();
        let mut buf = Vec::new();
        save_alist(&h, &mut buf).unwrap();
        assert_eq!(load_alist(buf.as_slice()).unwrap(), h);
    }

    fn err_line(text: &str) -> usize {
        match load_alist(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn column_degree_mismatch() {
        // Column 2 declares degree 2 but lists one entry.
        let bad = "4 2\n2 3\n1 2 2 1\n3 3\n1 0\n1 0\n1 2\n2 0\n1 2 3\n2 3 4\n";
        assert_eq!(err_line(bad), 6);
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(err_line(""), 1);
        assert_eq!(err_line("4\n"), 1);
        assert_eq!(err_line("4 2\n2 3\n1 2 2\n"), 3);
        // Check index 3 out of range.
        assert_eq!(err_line("4 2\n2 3\n1 2 2 1\n3 3\n3 0\n"), 5);
        // Row lists disagree with columns.
        assert_eq!(err_line("4 2\n2 3\n1 2 2 1\n3 3\n1 0\n1 2\n1 2\n2 0\n1 2 4\n2 3 4\n"), 9);
        assert_eq!(err_line("4 x\n"), 1);
        // Truncated.
        assert_eq!(err_line("4 2\n2 3\n1 2 2 1\n3 3\n1 0\n1 2\n"), 7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn save_load_bijection(m in 3usize..20, extra in 1usize..20, d in 2usize..4, seed in any::<u64>()) {
            let n = m + extra;
            let d = d.min(m);
            let h = peg_construct(n, m, &DegreeProfile::Regular(d), seed).unwrap();
            let text = to_alist_string(&h);
            let back = load_alist(text.as_bytes()).unwrap();
            prop_assert_eq!(&back, &h);
            prop_assert_eq!(to_alist_string(&back), text);
        }
    }
}
