//! Reading and writing replicate tables.
//!
//! The CSV layout is `replicate,N_T,L1..LK,M1..MK,z..`, where the z columns
//! run from `z1` for critical experiments and from `z2` for supercritical
//! ones. Unknown values (`N_T` outside the exact regime, mutation counts
//! when none were scattered) are left empty.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::montecarlo::{ReplicateRow, ReplicateTable, TableMeta};

fn header(k_max: usize, first_z: usize) -> Vec<String> {
    let mut h = vec!["replicate".to_string(), "N_T".to_string()];
    h.extend((1..=k_max).map(|k| format!("L{k}")));
    h.extend((1..=k_max).map(|k| format!("M{k}")));
    h.extend((first_z..=k_max).map(|k| format!("z{k}")));
    h
}

/// Serializes the rows of a table as CSV.
pub fn table_to_csv(table: &ReplicateTable) -> Result<String> {
    let k_max = table.k_max();
    let first_z = if table.is_critical() { 1 } else { 2 };
    rows_to_csv(&table.rows, k_max, first_z)
}

pub fn rows_to_csv(rows: &[ReplicateRow], k_max: usize, first_z: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(k_max, first_z))?;
    for row in rows {
        let mut rec = Vec::with_capacity(2 + 3 * k_max);
        rec.push(row.replicate.to_string());
        rec.push(row.population_size.map(|x| x.to_string()).unwrap_or_default());
        rec.extend(row.lengths.iter().map(|x| x.to_string()));
        match &row.mutations {
            Some(m) => rec.extend(m.iter().map(|x| x.to_string())),
            None => rec.extend(std::iter::repeat_n(String::new(), k_max)),
        }
        rec.extend(row.z.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// Table rows parsed back from CSV, with the layout read off the header.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTable {
    pub k_max: usize,
    pub first_z: usize,
    pub rows: Vec<ReplicateRow>,
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|e| Error::Format(format!("bad number {s:?}: {e}")))
}

fn parse_u64(s: &str) -> Result<u64> {
    s.trim()
        .parse()
        .map_err(|e| Error::Format(format!("bad count {s:?}: {e}")))
}

pub fn table_from_csv(text: &str) -> Result<ParsedTable> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let head: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let k_max = head.iter().filter(|h| h.starts_with('L')).count();
    let first_z = head
        .iter()
        .find_map(|h| h.strip_prefix('z'))
        .map(|s| s.parse::<usize>())
        .transpose()
        .map_err(|e| Error::Format(format!("bad z column: {e}")))?
        .unwrap_or(k_max + 1);
    if head != header(k_max, first_z) {
        return Err(Error::Format(format!("unexpected table header {head:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let population_size = match field(1) {
            "" => None,
            s => Some(parse_u64(s)?),
        };
        let lengths = (0..k_max).map(|j| parse_f64(field(2 + j))).collect::<Result<Vec<_>>>()?;
        let m: Vec<&str> = (0..k_max).map(|j| field(2 + k_max + j)).collect();
        let mutations = if m.iter().all(|s| s.is_empty()) {
            None
        } else {
            Some(m.iter().map(|s| parse_u64(s)).collect::<Result<Vec<_>>>()?)
        };
        let z = (0..k_max + 1 - first_z)
            .map(|j| parse_f64(field(2 + 2 * k_max + j)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(ReplicateRow {
            replicate: parse_u64(field(0))?,
            population_size,
            lengths,
            mutations,
            z,
        });
    }
    Ok(ParsedTable { k_max, first_z, rows })
}

/// One JSON object per row.
pub fn table_to_json_lines(table: &ReplicateTable) -> Result<String> {
    let mut out = String::new();
    for row in &table.rows {
        out.push_str(&serde_json::to_string(row)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn rows_from_json_lines(text: &str) -> Result<Vec<ReplicateRow>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

/// Path of the metadata written next to a table: `x.csv` -> `x.meta.json`.
pub fn meta_path(table_path: &Path) -> PathBuf {
    table_path.with_extension("meta.json")
}

#[derive(serde::Serialize, serde::Deserialize)]
struct MetaDoc {
    schema: u32,
    #[serde(flatten)]
    meta: TableMeta,
}

pub fn meta_to_json(meta: &TableMeta) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MetaDoc {
        schema: 1,
        meta: meta.clone(),
    })?)
}

pub fn meta_from_json(text: &str) -> Result<TableMeta> {
    let doc: MetaDoc = serde_json::from_str(text)?;
    if doc.schema != 1 {
        return Err(Error::Format(format!("unsupported metadata schema {}", doc.schema)));
    }
    Ok(doc.meta)
}

/// Writes the table as CSV (or JSON lines for a `.jsonl` path) and its
/// metadata alongside.
pub fn write_table(table: &ReplicateTable, path: &Path) -> Result<()> {
    let body = if path.extension().is_some_and(|e| e == "jsonl") {
        table_to_json_lines(table)?
    } else {
        table_to_csv(table)?
    };
    fs::write(path, body)?;
    fs::write(meta_path(path), meta_to_json(&table.meta)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genealogy::Regime;
    use crate::montecarlo::{run_replicates, ExperimentConfig};
    use crate::params::ModelParams;

    #[test]
    fn csv_round_trip_critical_with_mutations() {
        let p = ModelParams::new(1.0, 1.0, 200.0, 20, 2.0).unwrap();
        let mut cfg = ExperimentConfig::new(p, Regime::Exact, 5, 4, 3);
        cfg.mutations = true;
        let t = run_replicates(&cfg).unwrap();
        let text = table_to_csv(&t).unwrap();
        assert!(text.starts_with("replicate,N_T,L1,L2,L3,L4,M1,M2,M3,M4,z1,z2,z3,z4\n"));
        let back = table_from_csv(&text).unwrap();
        assert_eq!(back.rows, t.rows);
        assert_eq!((back.k_max, back.first_z), (4, 1));
    }

    #[test]
    fn csv_round_trip_supercritical_limit() {
        let p = ModelParams::new(2.0, 1.0, 30.0, 20, 0.0).unwrap();
        let cfg = ExperimentConfig::new(p, Regime::SupercriticalLimit, 4, 3, 3);
        let t = run_replicates(&cfg).unwrap();
        let text = table_to_csv(&t).unwrap();
        assert!(text.starts_with("replicate,N_T,L1,L2,L3,M1,M2,M3,z2,z3\n"));
        let back = table_from_csv(&text).unwrap();
        assert_eq!(back.rows.len(), 4);
        for (a, b) in back.rows.iter().zip(&t.rows) {
            assert!(a.lengths[0].is_nan() && b.lengths[0].is_nan());
            assert_eq!(a.lengths[1..], b.lengths[1..]);
            assert_eq!(a.z, b.z);
            assert_eq!(a.population_size, None);
            assert_eq!(a.mutations, None);
        }
    }

    #[test]
    fn json_lines_and_meta_round_trip() {
        let p = ModelParams::critical(100.0, 10).unwrap();
        let cfg = ExperimentConfig::new(p, Regime::CriticalLimit, 3, 2, 8);
        let t = run_replicates(&cfg).unwrap();
        let rows = rows_from_json_lines(&table_to_json_lines(&t).unwrap()).unwrap();
        assert_eq!(rows, t.rows);
        let meta = meta_from_json(&meta_to_json(&t.meta).unwrap()).unwrap();
        assert_eq!(meta, t.meta);
    }

    #[test]
    fn json_lines_keep_undefined_lengths() {
        let p = ModelParams::new(2.0, 1.0, 30.0, 20, 0.0).unwrap();
        let cfg = ExperimentConfig::new(p, Regime::SupercriticalLimit, 2, 3, 3);
        let t = run_replicates(&cfg).unwrap();
        let text = table_to_json_lines(&t).unwrap();
        assert!(text.contains("null"));
        let rows = rows_from_json_lines(&text).unwrap();
        assert!(rows.iter().all(|r| r.lengths[0].is_nan()));
        assert_eq!(rows[1].z, t.rows[1].z);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(table_from_csv("a,b\n1,2\n").is_err());
    }
}
