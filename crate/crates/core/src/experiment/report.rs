//! CSV and JSON emission. Every cell is first turned into a JSON value and
//! the CSV cell is that value's text, so the two files agree exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::poly::Rational;

use super::{ExperimentError, Records};

/// `p/q` with `q >= 1`, also for integers.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `x` rounded to 12 significant digits, as a JSON number. Non-finite
/// values become the strings `inf`, `-inf` and `nan`.
pub fn fmt_float(x: f64) -> Value {
    if !x.is_finite() {
        let s = if x.is_nan() {
            "nan"
        } else if x > 0.0 {
            "inf"
        } else {
            "-inf"
        };
        return Value::String(s.into());
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    json!(rounded)
}

/// Column names plus one row of cells per record.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    /// `(id, degree, width, seconds)` per row, kept out of the report.
    pub timings: Vec<(String, u32, u32, f64)>,
}

fn opt<T, F: Fn(&T) -> Value>(v: &Option<T>, f: F) -> Value {
    v.as_ref().map_or(Value::Null, f)
}

impl Table {
    pub fn from_records(records: &Records) -> Table {
        match records {
            Records::Gap(recs) => Table {
                kind: "gap",
                columns: vec![
                    "id",
                    "seed",
                    "n",
                    "m",
                    "degree",
                    "width",
                    "opt",
                    "sos",
                    "sos_certified",
                    "alpha",
                    "error",
                ],
                rows: recs
                    .iter()
                    .map(|r| {
                        vec![
                            json!(r.id),
                            json!(r.seed),
                            json!(r.n),
                            json!(r.m),
                            json!(r.degree),
                            json!(r.width),
                            json!(fmt_rational(&r.opt)),
                            opt(&r.sos, |&x| fmt_float(x)),
                            opt(&r.sos_certified, |x| json!(fmt_rational(x))),
                            opt(&r.alpha, |&x| fmt_float(x)),
                            opt(&r.error, |e| json!(e)),
                        ]
                    })
                    .collect(),
                timings: recs.iter().map(|r| (r.id.clone(), r.degree, r.width, r.seconds)).collect(),
            },
            Records::Degree(recs) => Table {
                kind: "degree",
                columns: vec![
                    "id",
                    "family",
                    "n",
                    "k",
                    "width",
                    "satisfiable",
                    "min_degree",
                    "max_degree",
                    "method",
                    "exact",
                    "error",
                ],
                rows: recs
                    .iter()
                    .map(|r| {
                        vec![
                            json!(r.id),
                            json!(r.family),
                            json!(r.n),
                            json!(r.k),
                            json!(r.width),
                            opt(&r.satisfiable, |&b| json!(b)),
                            opt(&r.min_degree, |&d| json!(d)),
                            json!(r.max_degree),
                            opt(&r.method, |m| json!(m)),
                            json!(r.exact),
                            opt(&r.error, |e| json!(e)),
                        ]
                    })
                    .collect(),
                timings: recs.iter().map(|r| (r.id.clone(), r.min_degree.unwrap_or(0), r.width, r.seconds)).collect(),
            },
        }
    }

    fn cell_text(v: &Value) -> String {
        match v {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }

    pub fn to_csv(&self) -> Result<String, ExperimentError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| ExperimentError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Self::cell_text)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| ExperimentError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("cells are UTF-8"))
    }

    pub fn to_json(&self) -> String {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.clone())).collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "kind": self.kind, "columns": self.columns, "records": records });
        serde_json::to_string_pretty(&doc).expect("values serialize") + "\n"
    }

    pub fn timings_csv(&self) -> Result<String, ExperimentError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| ExperimentError::Io(e.to_string());
        let second = if self.kind == "gap" { "degree" } else { "min_degree" };
        w.write_record(["id", second, "width", "seconds"]).map_err(io)?;
        for (id, d, width, secs) in &self.timings {
            w.write_record([id.clone(), d.to_string(), width.to_string(), format!("{secs:.6}")]).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| ExperimentError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("cells are UTF-8"))
    }
}

/// Where the report files go. A missing timings path defaults to the CSV
/// (or JSON) path with the extension replaced by `timings.csv`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub timings: Option<PathBuf>,
}

impl ReportPaths {
    fn timings_path(&self) -> Option<PathBuf> {
        self.timings.clone().or_else(|| {
            let base = self.csv.as_ref().or(self.json.as_ref())?;
            Some(base.with_extension("timings.csv"))
        })
    }
}

fn write(path: &Path, text: &str) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| ExperimentError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))
}

/// Writes the CSV and JSON reports and the timings sidecar. Returns the
/// table that was written.
pub fn emit_report(records: &Records, paths: &ReportPaths) -> Result<Table, ExperimentError> {
    let table = Table::from_records(records);
    if let Some(p) = &paths.csv {
        write(p, &table.to_csv()?)?;
    }
    if let Some(p) = &paths.json {
        write(p, &table.to_json())?;
    }
    if let Some(p) = paths.timings_path() {
        write(&p, &table.timings_csv()?)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::GapRecord;
    use crate::poly::rat;

    fn record() -> GapRecord {
        GapRecord {
            id: "xor3-n8-m32-s0001".into(),
            seed: 1,
            n: 8,
            m: 32,
            degree: 2,
            width: 1,
            opt: rat(29, 32),
            sos: Some(1.0000000000123456),
            sos_certified: Some(rat(1, 1)),
            alpha: Some(0.90624999998876),
            error: None,
            seconds: 0.25,
        }
    }

    #[test]
    fn number_formats() {
        assert_eq!(fmt_rational(&rat(29, 32)), "29/32");
        assert_eq!(fmt_rational(&rat(3, 1)), "3/1");
        assert_eq!(fmt_float(1.0000000000123456), json!(1.00000000001));
        assert_eq!(fmt_float(-2.5e-9), json!(-2.5e-9));
        assert_eq!(fmt_float(f64::INFINITY), json!("inf"));
    }

    #[test]
    fn one_record_gives_header_plus_row_and_matching_json() {
        let table = Table::from_records(&Records::Gap(vec![record()]));
        let csv = table.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "id,seed,n,m,degree,width,opt,sos,sos_certified,alpha,error");
        assert_eq!(lines[1], "xor3-n8-m32-s0001,1,8,32,2,1,29/32,1.00000000001,1/1,0.906249999989,");
        let doc: Value = serde_json::from_str(&table.to_json()).unwrap();
        let rec = &doc["records"][0];
        // every JSON value prints as the CSV cell
        let cells: Vec<&str> = lines[1].split(',').collect();
        for (col, cell) in table.columns.iter().zip(cells) {
            assert_eq!(Table::cell_text(&rec[*col]), cell, "column {col}");
        }
        assert!(!csv.contains("0.25"), "timings stay out of the report");
    }

    #[test]
    fn emitted_files_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let paths = ReportPaths {
            csv: Some(dir.path().join("out/gap.csv")),
            json: Some(dir.path().join("out/gap.json")),
            timings: None,
        };
        let recs = Records::Gap(vec![record()]);
        emit_report(&recs, &paths).unwrap();
        let first = fs::read(dir.path().join("out/gap.csv")).unwrap();
        let mut slower = record();
        slower.seconds = 9.0;
        emit_report(&Records::Gap(vec![slower]), &paths).unwrap();
        assert_eq!(fs::read(dir.path().join("out/gap.csv")).unwrap(), first);
        let timings = fs::read_to_string(dir.path().join("out/gap.timings.csv")).unwrap();
        assert!(timings.contains("9.000000"));
    }
}
