//! Dense CSV and sparse `label idx:val` dataset files.

use std::fmt::Write as _;
use std::path::Path;

use super::dataset::Dataset;
use crate::atomic::write_atomic;
use crate::error::{HfaError, Result};

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HfaError::io(path, e))
}

fn domain_tag(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn parse_label(field: &str, name: &str, line: usize) -> Result<u32> {
    field.trim().parse::<u32>().map_err(|_| {
        HfaError::parse(
            name,
            line,
            format!("label {field:?} is not a nonnegative integer"),
        )
    })
}

fn parse_value(field: &str, name: &str, line: usize) -> Result<f64> {
    match field.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(HfaError::parse(
            name,
            line,
            format!("{field:?} is not a finite number"),
        )),
    }
}

pub fn load_dense_csv(path: &Path) -> Result<Dataset> {
    let text = read_text(path)?;
    parse_dense_csv(&text, &path.display().to_string(), &domain_tag(path))
}

/// Parses `label,f0,...,f{d-1}` text; `name` labels error positions.
pub fn parse_dense_csv(text: &str, name: &str, domain: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| HfaError::parse(name, 1, "empty file, expected header \"label,f0,...\""))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns[0] != "label" || columns.len() < 2 {
        return Err(HfaError::parse(
            name,
            1,
            "header must be \"label,f0,...,f{d-1}\"",
        ));
    }
    let dim = columns.len() - 1;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(HfaError::parse(
                name,
                lineno,
                format!("expected {} fields, found {}", dim + 1, fields.len()),
            ));
        }
        labels.push(parse_label(fields[0], name, lineno)?);
        features.push(
            fields[1..]
                .iter()
                .map(|f| parse_value(f, name, lineno))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Dataset::new(domain, dim, features, labels)
}

/// Shortest round-trip formatting, so a save/load cycle is exact.
pub fn dense_csv_string(d: &Dataset) -> String {
    let mut out = String::from("label");
    for j in 0..d.dim() {
        write!(out, ",f{j}").unwrap();
    }
    out.push('\n');
    for (x, y) in d.features().iter().zip(d.labels()) {
        write!(out, "{y}").unwrap();
        for v in x {
            write!(out, ",{v:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn save_dense_csv(d: &Dataset, path: &Path) -> Result<()> {
    write_atomic(path, dense_csv_string(d).as_bytes())
}

/// Dense CSV for a `.csv` extension, the sparse format otherwise.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        load_dense_csv(path)
    } else {
        load_sparse(path)
    }
}

pub fn load_sparse(path: &Path) -> Result<Dataset> {
    let text = read_text(path)?;
    parse_sparse(&text, &path.display().to_string(), &domain_tag(path))
}

/// Parses `label idx:val ...` lines with 1-based ascending indices and an optional `#dim N` first line.
pub fn parse_sparse(text: &str, name: &str, domain: &str) -> Result<Dataset> {
    let mut declared: Option<usize> = None;
    let mut rows: Vec<(u32, Vec<(usize, f64)>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#dim") {
            if lineno != 1 {
                return Err(HfaError::parse(name, lineno, "#dim must be the first line"));
            }
            let n = rest
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| {
                    HfaError::parse(name, lineno, format!("bad dimension {:?}", rest.trim()))
                })?;
            declared = Some(n);
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = parse_label(tokens.next().expect("nonempty line"), name, lineno)?;
        let mut entries = Vec::new();
        let mut last = 0usize;
        for token in tokens {
            let (idx, val) = token.split_once(':').ok_or_else(|| {
                HfaError::parse(name, lineno, format!("expected idx:val, found {token:?}"))
            })?;
            let idx: usize = idx
                .parse()
                .map_err(|_| HfaError::parse(name, lineno, format!("bad index {idx:?}")))?;
            if idx == 0 {
                return Err(HfaError::parse(
                    name,
                    lineno,
                    "indices are 1-based; found 0",
                ));
            }
            if idx <= last {
                return Err(HfaError::parse(
                    name,
                    lineno,
                    format!("index {idx} does not increase past {last}"),
                ));
            }
            if let Some(d) = declared {
                if idx > d {
                    return Err(HfaError::parse(
                        name,
                        lineno,
                        format!("index {idx} exceeds declared dim {d}"),
                    ));
                }
            }
            last = idx;
            entries.push((idx, parse_value(val, name, lineno)?));
        }
        rows.push((label, entries));
    }

    let max_index = rows
        .iter()
        .filter_map(|(_, e)| e.last().map(|&(i, _)| i))
        .max();
    let dim = match (declared, max_index) {
        (Some(d), _) => d,
        (None, Some(m)) => m,
        (None, None) => {
            return Err(HfaError::parse(
                name,
                1,
                "cannot infer dimension: no #dim line and no features",
            ));
        }
    };
    let mut features = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (label, entries) in rows {
        let mut x = vec![0.0; dim];
        for (i, v) in entries {
            x[i - 1] = v;
        }
        features.push(x);
        labels.push(label);
    }
    Dataset::new(domain, dim, features, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_example() {
        let d = parse_dense_csv("label,f0,f1\n0,1.0,2.0\n1,3.0,4.0\n", "t.csv", "t").unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.labels(), &[0, 1]);
        assert_eq!(d.features()[1], vec![3.0, 4.0]);
    }

    #[test]
    fn dense_errors_carry_lines() {
        let err = parse_dense_csv("label,f0,f1\n0,1.0,2.0\n1,3.0\n", "t.csv", "t").unwrap_err();
        assert!(matches!(err, HfaError::Parse { line: 3, .. }), "{err}");
        let err = parse_dense_csv("label,f0\n0,abc\n", "t.csv", "t").unwrap_err();
        assert!(matches!(err, HfaError::Parse { line: 2, .. }));
        let err = parse_dense_csv("label,f0\n-1,0.5\n", "t.csv", "t").unwrap_err();
        assert!(matches!(err, HfaError::Parse { line: 2, .. }));
        assert!(matches!(
            parse_dense_csv("", "t.csv", "t"),
            Err(HfaError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn header_only_is_empty() {
        let d = parse_dense_csv("label,f0,f1\n", "t.csv", "t").unwrap();
        assert!(d.is_empty());
        assert_eq!(d.dim(), 2);
    }

    #[test]
    fn dense_round_trip() {
        let d = Dataset::new(
            "x",
            2,
            vec![vec![0.1, -1.0 / 3.0], vec![1e-300, 123456.789]],
            vec![4, 0],
        )
        .unwrap();
        let back = parse_dense_csv(&dense_csv_string(&d), "x", "x").unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn sparse_examples() {
        let d = parse_sparse("#dim 3\n1 1:0.5 3:0.25\n0\n", "s", "s").unwrap();
        assert_eq!(d.features()[0], vec![0.5, 0.0, 0.25]);
        assert_eq!(d.features()[1], vec![0.0; 3]);
        assert_eq!(d.labels(), &[1, 0]);
        let d = parse_sparse("2 2:1 4:2\n", "s", "s").unwrap();
        assert_eq!(d.dim(), 4);
    }

    #[test]
    fn sparse_errors() {
        assert!(matches!(
            parse_sparse("1 0:1\n", "s", "s"),
            Err(HfaError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_sparse("1 1:1\n1 3:1 2:1\n", "s", "s"),
            Err(HfaError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_sparse("#dim 2\n1 3:1\n", "s", "s"),
            Err(HfaError::Parse { line: 2, .. })
        ));
        assert!(parse_sparse("1 1:x\n", "s", "s").is_err());
    }
}
