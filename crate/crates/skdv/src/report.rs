//! Report files: CSV tables, JSON summaries, the MANIFEST and plot scripts.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnType {
    Int,
    Float,
    /// A float or an empty cell.
    OptFloat,
    Bool,
    Text,
}

/// Column layout of one CSV report.
#[derive(Debug, Clone, Copy)]
pub struct Schema {
    pub file: &'static str,
    pub columns: &'static [(&'static str, ColumnType)],
}

use ColumnType::*;

pub const FUNCTIONALS: Schema = Schema {
    file: "functionals.csv",
    columns: &[
        ("t", Float),
        ("M", Float),
        ("L", Float),
        ("E", Float),
        ("driftL", Float),
        ("driftE", Float),
        ("N", Float),
    ],
};

pub const INFLATION: Schema = Schema {
    file: "inflation.csv",
    columns: &[
        ("N", Float),
        ("k", Float),
        ("G_total", Float),
        ("G_nls_term", Float),
        ("G_kdv_term", Float),
        ("slope_so_far", OptFloat),
    ],
};

pub const ESTIMATES: Schema = Schema {
    file: "estimates.csv",
    columns: &[
        ("case_id", Text),
        ("sample_id", Int),
        ("LHS", Float),
        ("RHS", Float),
        ("ratio", Float),
    ],
};

pub const COUNTEREXAMPLE: Schema = Schema {
    file: "counterexample.csv",
    columns: &[
        ("N", Float),
        ("LHS", Float),
        ("norm_u1", Float),
        ("norm_u2", Float),
        ("ratio", Float),
        ("max_abs_q1", Float),
        ("support_inside", Bool),
    ],
};

pub const PICARD: Schema = Schema {
    file: "picard.csv",
    columns: &[("iteration", Int), ("step_diff", Float), ("solver_diff", Float)],
};

pub const PROBE: Schema = Schema {
    file: "probe.csv",
    columns: &[
        ("scale", Float),
        ("amplitude", Float),
        ("contracts", Text),
        ("delta_star", OptFloat),
    ],
};

/// Final snapshot; `#` lines carry the header.
pub const STATE: Schema = Schema {
    file: "state_final.csv",
    columns: &[
        ("j", Int),
        ("u_re", Float),
        ("u_im", Float),
        ("v_re", Float),
        ("v_im", Float),
    ],
};

pub const SCHEMAS: [Schema; 7] = [FUNCTIONALS, INFLATION, ESTIMATES, COUNTEREXAMPLE, PICARD, PROBE, STATE];

pub fn schema_for(file: &str) -> Option<Schema> {
    SCHEMAS.iter().copied().find(|s| s.file == file)
}

fn cell_ok(t: ColumnType, cell: &str) -> bool {
    match t {
        Int => cell.parse::<i64>().is_ok(),
        Float => cell.parse::<f64>().is_ok(),
        OptFloat => cell.is_empty() || cell.parse::<f64>().is_ok(),
        Bool => cell.parse::<bool>().is_ok(),
        Text => true,
    }
}

/// Checks the header and every cell of `text`; returns the row count.
pub fn validate_csv(schema: &Schema, text: &str) -> std::result::Result<usize, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    let want: Vec<&str> = schema.columns.iter().map(|c| c.0).collect();
    let got: Vec<&str> = header.iter().collect();
    if got != want {
        return Err(format!("{}: header {got:?}, expected {want:?}", schema.file));
    }
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| format!("{}: row {}: {e}", schema.file, i + 1))?;
        for ((name, t), cell) in schema.columns.iter().zip(rec.iter()) {
            if !cell_ok(*t, cell) {
                return Err(format!("{}: row {}: `{cell}` is not a valid {name}", schema.file, i + 1));
            }
        }
        rows += 1;
    }
    Ok(rows)
}

/// Validates every CSV in `dir` that has a known schema.
pub fn validate_dir(dir: &Path) -> std::result::Result<Vec<(String, usize)>, String> {
    let mut out = Vec::new();
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    entries.sort();
    for name in entries {
        if let Some(schema) = schema_for(&name) {
            let text = fs::read_to_string(dir.join(&name)).map_err(|e| e.to_string())?;
            out.push((name, validate_csv(&schema, &text)?));
        }
    }
    Ok(out)
}

/// Serializes `rows` under the schema's header.
pub fn csv_string<T: Serialize>(schema: &Schema, rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let header: Vec<&str> = schema.columns.iter().map(|c| c.0).collect();
    let fail = |e: csv::Error| HarnessError::Io {
        path: schema.file.to_string(),
        message: e.to_string(),
    };
    w.write_record(&header).map_err(fail)?;
    for r in rows {
        w.serialize(r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io {
        path: schema.file.to_string(),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Files produced by one run, in write order.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), bytes.into()));
    }

    pub fn add_csv<T: Serialize>(&mut self, schema: &Schema, rows: &[T]) -> Result<()> {
        let text = csv_string(schema, rows)?;
        self.add(schema.file, text);
        Ok(())
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Io {
            path: name.to_string(),
            message: e.to_string(),
        })?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|f| f.0 == name).map(|f| f.1.as_slice())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))?;
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `key=value` lines: config hash, seed, versions, file digests and a timestamp.
pub fn manifest(canonical_config: &str, seed: u64, experiment: &str, files: &[(String, Vec<u8>)]) -> String {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut out = String::new();
    out.push_str(&format!("experiment={experiment}\n"));
    out.push_str(&format!("config_sha256={}\n", sha256_hex(canonical_config.as_bytes())));
    out.push_str(&format!("seed={seed}\n"));
    out.push_str(&format!("skdv_version={}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("skdv_core_version={}\n", skdv_core::VERSION));
    for (name, bytes) in files {
        out.push_str(&format!("file.{name}.sha256={}\n", sha256_hex(bytes)));
    }
    out.push_str(&format!("timestamp={stamp}\n"));
    out
}

/// Gnuplot script for the main table of `experiment`.
pub fn gnuplot_script(experiment: crate::config::Experiment) -> String {
    use crate::config::Experiment as E;
    let body = match experiment {
        E::Simulate | E::Invariants => {
            "set xlabel 't'\nset ylabel 'drift'\nset logscale y\n\
             plot 'functionals.csv' using 1:6 with lines title 'drift E', \
             '' using 1:5 with lines title 'drift L'\n"
        }
        E::Inflate => {
            "set logscale xy\nset xlabel 'N'\nset ylabel 'G'\n\
             plot 'inflation.csv' using 1:3 with linespoints title 'G total', \
             '' using 1:4 with linespoints title 'NLS term', \
             '' using 1:5 with linespoints title 'KdV term'\n"
        }
        E::Picard => {
            "set logscale y\nset xlabel 'iteration'\n\
             plot 'picard.csv' using 1:2 with linespoints title 'step', \
             '' using 1:3 with linespoints title 'vs solver'\n"
        }
        E::Estimates => {
            "set logscale y\nset xlabel 'sample'\nset ylabel 'ratio'\n\
             plot 'estimates.csv' using 2:5 with points title 'ratio'\n"
        }
    };
    format!("set datafile separator ','\nset key autotitle columnhead\n{body}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        iteration: usize,
        step_diff: f64,
        solver_diff: f64,
    }

    #[test]
    fn written_tables_validate() {
        let rows = [Row { iteration: 1, step_diff: 0.5, solver_diff: 1e-300 }];
        let text = csv_string(&PICARD, &rows).unwrap();
        assert_eq!(validate_csv(&PICARD, &text), Ok(1));
        assert!(validate_csv(&PICARD, "iteration,step_diff\n1,2\n").is_err());
        assert!(validate_csv(&PICARD, "iteration,step_diff,solver_diff\nx,1,2\n").is_err());
    }

    #[test]
    fn optional_cells() {
        let text = "N,k,G_total,G_nls_term,G_kdv_term,slope_so_far\n32,32,1,1,0,\n";
        assert_eq!(validate_csv(&INFLATION, text), Ok(1));
    }

    #[test]
    fn manifest_lists_files() {
        let m = manifest("a=1\n", 7, "picard", &[("picard.csv".into(), b"x".to_vec())]);
        assert!(m.contains("seed=7\n"));
        assert!(m.contains(&format!("config_sha256={}\n", sha256_hex(b"a=1\n"))));
        assert!(m.contains("file.picard.csv.sha256="));
    }
}
