//! Text formats for networks and covariates.
//!
//! An adjacency file holds one whitespace-separated row of `0`/`1` entries per actor. A
//! covariate file is two-column `actor_id,value` text with a header line. An actor file lists
//! one actor label per line; without one, actors are labeled `1..=n` in matrix order.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::IngestError;
use crate::network::DirectedNetwork;

fn read(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), IngestError> {
    fs::write(path, text).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> IngestError {
    IngestError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub fn parse_adjacency(path: &Path, text: &str) -> Result<DirectedNetwork, IngestError> {
    let mut rows: Vec<(usize, Vec<bool>)> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .enumerate()
            .map(|(c, tok)| match tok {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(parse_err(
                    path,
                    lineno,
                    format!("column {}: expected 0 or 1, found {tok:?}", c + 1),
                )),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((lineno, row));
    }
    let n = rows.len();
    if n < 2 {
        return Err(IngestError::Invalid {
            path: path.to_path_buf(),
            msg: format!("adjacency matrix needs at least 2 rows, found {n}"),
        });
    }
    let mut ties = Vec::with_capacity(n * n);
    for (i, (lineno, row)) in rows.into_iter().enumerate() {
        if row.len() != n {
            return Err(parse_err(
                path,
                lineno,
                format!("row has {} entries; matrix with {n} rows must be square", row.len()),
            ));
        }
        if row[i] {
            return Err(parse_err(
                path,
                lineno,
                format!("self-tie at row {}, column {}", i + 1, i + 1),
            ));
        }
        ties.extend(row);
    }
    DirectedNetwork::from_ties(n, ties).map_err(|e| IngestError::Invalid {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

pub fn read_adjacency(path: &Path) -> Result<DirectedNetwork, IngestError> {
    parse_adjacency(path, &read(path)?)
}

pub fn format_adjacency(net: &DirectedNetwork) -> String {
    let mut s = String::with_capacity(2 * net.n() * net.n());
    for i in 0..net.n() {
        let row: Vec<&str> = net
            .row(i)
            .iter()
            .map(|&t| if t { "1" } else { "0" })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn write_adjacency(path: &Path, net: &DirectedNetwork) -> Result<(), IngestError> {
    write(path, &format_adjacency(net))
}

/// Covariate values in the order of `labels`; every actor must appear exactly once.
pub fn parse_covariate(path: &Path, text: &str, labels: &[String]) -> Result<Vec<f64>, IngestError> {
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(k, l)| (l.as_str(), k))
        .collect();
    let mut values = vec![None; labels.len()];
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.split(',').count() == 2 => {}
        Some((k, _)) => return Err(parse_err(path, k + 1, "expected header `actor_id,value`")),
        None => {
            return Err(IngestError::Invalid {
                path: path.to_path_buf(),
                msg: "empty covariate file".into(),
            })
        }
    }
    for (k, line) in lines {
        let lineno = k + 1;
        let mut parts = line.split(',').map(str::trim);
        let (Some(id), Some(val), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(path, lineno, "expected two comma-separated fields"));
        };
        let &a = index
            .get(id)
            .ok_or_else(|| parse_err(path, lineno, format!("unknown actor id {id:?}")))?;
        let v: f64 = val
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("value {val:?} is not a number")))?;
        if values[a].replace(v).is_some() {
            return Err(parse_err(path, lineno, format!("duplicate actor id {id:?}")));
        }
    }
    values
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            v.ok_or_else(|| IngestError::Invalid {
                path: path.to_path_buf(),
                msg: format!("no value for actor {:?}", labels[k]),
            })
        })
        .collect()
}

pub fn read_covariate(path: &Path, labels: &[String]) -> Result<Vec<f64>, IngestError> {
    parse_covariate(path, &read(path)?, labels)
}

pub fn format_covariate(labels: &[String], values: &[f64]) -> String {
    let mut s = String::from("actor_id,value\n");
    for (l, v) in labels.iter().zip(values) {
        s.push_str(&format!("{l},{v}\n"));
    }
    s
}

pub fn write_covariate(path: &Path, labels: &[String], values: &[f64]) -> Result<(), IngestError> {
    write(path, &format_covariate(labels, values))
}

pub fn read_actor_labels(path: &Path) -> Result<Vec<String>, IngestError> {
    let labels: Vec<String> = read(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    let mut seen = HashMap::new();
    for (k, l) in labels.iter().enumerate() {
        if let Some(prev) = seen.insert(l.as_str(), k) {
            return Err(IngestError::Invalid {
                path: path.to_path_buf(),
                msg: format!("actor label {l:?} appears at positions {} and {}", prev + 1, k + 1),
            });
        }
    }
    Ok(labels)
}
