//! Candidate SubGraph selection and the SubNet x SubGraph latency table.

mod candidates;

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::accel::{AccelModel, HardwareConfig};
use crate::supernet::{SubGraphDescriptor, SubNetDescriptor};
use crate::{Error, Result};

pub use candidates::{build_candidate_set, shrink_to_fit, CandidateParams, CandidateSet};

const MAGIC: &str = "sgs-latency-table 1";

/// Dense row-major table of end-to-end latencies in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyTable {
    rows: Vec<String>,
    cols: Vec<String>,
    entries: Vec<f64>,
    fingerprint: String,
    row_index: HashMap<String, usize>,
    col_index: HashMap<String, usize>,
}

impl LatencyTable {
    /// Assembles a table from parts. `entries` is row-major.
    pub fn from_parts(
        rows: Vec<String>,
        cols: Vec<String>,
        entries: Vec<f64>,
        fingerprint: String,
    ) -> Result<Self> {
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::config("latency table needs at least one row and one column"));
        }
        if entries.len() != rows.len() * cols.len() {
            return Err(Error::config(format!(
                "{} entries for a {}x{} table",
                entries.len(),
                rows.len(),
                cols.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::config(format!("invalid table entry {bad}")));
        }
        let index = |ids: &[String], kind: &str| -> Result<HashMap<String, usize>> {
            let mut m = HashMap::with_capacity(ids.len());
            for (i, id) in ids.iter().enumerate() {
                if m.insert(id.clone(), i).is_some() {
                    return Err(Error::config(format!("duplicate {kind} id `{id}`")));
                }
            }
            Ok(m)
        };
        let row_index = index(&rows, "row")?;
        let col_index = index(&cols, "column")?;
        Ok(LatencyTable {
            rows,
            cols,
            entries,
            fingerprint,
            row_index,
            col_index,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.rows
    }

    pub fn col_ids(&self) -> &[String] {
        &self.cols
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let m = self.cols.len();
        &self.entries[row * m..(row + 1) * m]
    }

    pub fn row_of(&self, id: &str) -> Result<usize> {
        self.row_index.get(id).copied().ok_or_else(|| Error::UnknownId {
            kind: "subnet",
            id: id.to_string(),
        })
    }

    pub fn col_of(&self, id: &str) -> Result<usize> {
        self.col_index.get(id).copied().ok_or_else(|| Error::UnknownId {
            kind: "subgraph",
            id: id.to_string(),
        })
    }

    pub fn lookup(&self, subnet: &str, subgraph: &str) -> Result<f64> {
        Ok(self.get(self.row_of(subnet)?, self.col_of(subgraph)?))
    }

    /// Errors unless the table was built for `hw`.
    pub fn check_hardware(&self, hw: &HardwareConfig) -> Result<()> {
        let fp = hw.fingerprint();
        if fp != self.fingerprint {
            return Err(Error::StaleTable {
                table: self.fingerprint.clone(),
                hardware: fp,
            });
        }
        Ok(())
    }

    /// Errors unless rows and columns line up with the given descriptors.
    pub fn check_layout(&self, subnets: &[SubNetDescriptor], candidates: &CandidateSet) -> Result<()> {
        let rows_ok = self.rows.iter().map(String::as_str).eq(subnets.iter().map(|s| s.id.as_str()));
        let cols_ok = self
            .cols
            .iter()
            .map(String::as_str)
            .eq(candidates.subgraphs().iter().map(|g| g.id.as_str()));
        if !rows_ok || !cols_ok {
            return Err(Error::config(
                "latency table rows/columns do not match the subnet and candidate files",
            ));
        }
        Ok(())
    }

    /// Text form:
    ///
    /// ```text
    /// sgs-latency-table 1
    /// fingerprint <hex>
    /// rows <n>
    /// <one id per line>
    /// cols <m>
    /// <one id per line>
    /// entries
    /// <n lines of m space-separated seconds>
    /// ```
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "fingerprint {}", self.fingerprint)?;
        writeln!(out, "rows {}", self.rows.len())?;
        for id in &self.rows {
            writeln!(out, "{id}")?;
        }
        writeln!(out, "cols {}", self.cols.len())?;
        for id in &self.cols {
            writeln!(out, "{id}")?;
        }
        writeln!(out, "entries")?;
        for i in 0..self.rows.len() {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R, path: &Path) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((n, Ok(l))) => Ok((n + 1, l)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(Error::parse(path, format!("unexpected end of file, expected {what}"))),
            }
        };
        let (n, magic) = next("header")?;
        if magic.trim() != MAGIC {
            return Err(Error::parse(path, format!("line {n}: not a latency table")));
        }
        let keyed = |(n, l): (usize, String), key: &str| -> Result<String> {
            l.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(|r| r.trim().to_string())
                .ok_or_else(|| Error::parse(path, format!("line {n}: expected `{key} ...`")))
        };
        let count = |s: String, n: usize| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(path, format!("line {n}: bad count `{s}`")))
        };
        let fingerprint = keyed(next("fingerprint")?, "fingerprint")?;
        let (n, l) = next("rows")?;
        let nr = count(keyed((n, l), "rows")?, n)?;
        let mut rows = Vec::with_capacity(nr);
        for _ in 0..nr {
            rows.push(next("row id")?.1.trim().to_string());
        }
        let (n, l) = next("cols")?;
        let nc = count(keyed((n, l), "cols")?, n)?;
        let mut cols = Vec::with_capacity(nc);
        for _ in 0..nc {
            cols.push(next("column id")?.1.trim().to_string());
        }
        let (n, l) = next("entries")?;
        if l.trim() != "entries" {
            return Err(Error::parse(path, format!("line {n}: expected `entries`")));
        }
        let mut entries = Vec::with_capacity(nr * nc);
        for _ in 0..nr {
            let (n, l) = next("table row")?;
            let before = entries.len();
            for tok in l.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(path, format!("line {n}: bad number `{tok}`")))?;
                entries.push(v);
            }
            if entries.len() - before != nc {
                return Err(Error::parse(
                    path,
                    format!("line {n}: {} values, expected {nc}", entries.len() - before),
                ));
            }
        }
        LatencyTable::from_parts(rows, cols, entries, fingerprint)
            .map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_text(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        LatencyTable::read_text(std::io::BufReader::new(f), path)
    }

    /// CSV with a `subnet` column followed by one column per subgraph.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["subnet".to_string()];
        header.extend(self.cols.iter().cloned());
        w.write_record(&header)?;
        for (i, id) in self.rows.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.row(i).iter().map(|v| format!("{v:?}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fills every cell with `subnet_latency(subnet_i, subgraph_j)`.
pub fn build_table(
    model: &AccelModel<'_>,
    subnets: &[SubNetDescriptor],
    candidates: &CandidateSet,
) -> Result<LatencyTable> {
    if subnets.is_empty() {
        return Err(Error::config("no subnets to tabulate"));
    }
    let cap = model.hw().pb_bytes;
    for g in candidates.subgraphs() {
        if g.weight_bytes > cap {
            return Err(Error::Capacity {
                id: g.id.clone(),
                bytes: g.weight_bytes,
                capacity: cap,
            });
        }
    }
    let rows: Vec<Vec<f64>> = subnets
        .par_iter()
        .map(|s| {
            candidates
                .subgraphs()
                .iter()
                .map(|g| cell(model, s, g))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    LatencyTable::from_parts(
        subnets.iter().map(|s| s.id.clone()).collect(),
        candidates.subgraphs().iter().map(|g| g.id.clone()).collect(),
        rows.into_iter().flatten().collect(),
        model.hw().fingerprint(),
    )
}

fn cell(model: &AccelModel<'_>, s: &SubNetDescriptor, g: &SubGraphDescriptor) -> Result<f64> {
    model.subnet_latency(s, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn small() -> (LatencyTable, Vec<SubNetDescriptor>, CandidateSet) {
        let net = fixtures::mobv3_like();
        let subnets = fixtures::mobv3_subnets();
        let hw = fixtures::hw_edge();
        let set = build_candidate_set(&net, &subnets, &hw, &CandidateParams {
            max_columns: 12,
            ..Default::default()
        })
        .unwrap();
        let model = AccelModel::new(&net, hw).unwrap();
        (build_table(&model, &subnets, &set).unwrap(), subnets, set)
    }

    #[test]
    fn text_round_trip_is_exact() {
        let (t, _, _) = small();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let back = LatencyTable::read_text(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back, t);
        let mut again = Vec::new();
        back.write_text(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn lookup_unknown_ids() {
        let (t, subnets, set) = small();
        assert!(t.lookup(&subnets[0].id, &set.get(0).id).is_ok());
        let e = t.lookup("nope", &set.get(0).id).unwrap_err();
        assert!(e.to_string().contains("nope"));
        assert!(matches!(t.lookup(&subnets[0].id, "nope"), Err(Error::UnknownId { kind: "subgraph", .. })));
    }

    #[test]
    fn stale_hardware_is_detected() {
        let (t, _, _) = small();
        assert!(t.check_hardware(&fixtures::hw_edge()).is_ok());
        let other = fixtures::hw_edge().with_pb(1 << 22);
        assert!(matches!(t.check_hardware(&other), Err(Error::StaleTable { .. })));
    }

    #[test]
    fn truncated_file_names_the_line() {
        let (t, _, _) = small();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let cut: String = s.lines().take(s.lines().count() - 1).collect::<Vec<_>>().join("\n");
        let e = LatencyTable::read_text(cut.as_bytes(), Path::new("t.txt")).unwrap_err();
        assert!(e.to_string().contains("t.txt"));
    }
}
