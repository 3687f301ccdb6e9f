use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::equalize::SinrRecord;
use crate::error::{LtbfError, Result};

use super::cdf::EmpiricalCdf;
use super::config::ScenarioConfig;
use super::flops::{flop_params, flops_report, FlopParams};
use super::montecarlo::{method_names, MonteCarloResult};

pub const VERSION: &str = concat!("ltbf-core ", env!("CARGO_PKG_VERSION"));

/// One line of the records CSV; `record` is `None` for users in outage.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub trial: u64,
    pub user: usize,
    pub record: Option<SinrRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordTable {
    pub d_list: Vec<usize>,
    pub rows: Vec<RecordRow>,
}

impl RecordTable {
    pub fn from_result(res: &MonteCarloResult) -> Self {
        let mut rows = Vec::new();
        for t in &res.trials {
            let by_user: BTreeMap<usize, &SinrRecord> = t.records.iter().map(|r| (r.user, r)).collect();
            for user in 0..t.connected.len() {
                rows.push(RecordRow { trial: t.trial, user, record: by_user.get(&user).map(|r| (*r).clone()) });
            }
        }
        Self { d_list: res.d_list(), rows }
    }

    pub fn records(&self) -> impl Iterator<Item = &SinrRecord> {
        self.rows.iter().filter_map(|r| r.record.as_ref())
    }

    /// Per-method empirical CDFs over the connected rows.
    pub fn cdfs(&self) -> Vec<(String, EmpiricalCdf)> {
        let names = method_names(&self.d_list);
        let mut samples: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for rec in self.records() {
            samples[0].push(rec.gamma_instantaneous_db);
            samples[1].push(rec.gamma_ltbf_exact_db);
            for (k, d) in self.d_list.iter().enumerate() {
                if let Some(v) = rec.gamma_ltbf_poly_db.get(d) {
                    samples[2 + k].push(*v);
                }
            }
        }
        names.into_iter().zip(samples).map(|(n, s)| (n, EmpiricalCdf::new(s))).collect()
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> =
            ["trial", "user", "connected", "gamma_inst_db", "gamma_ltbf_exact_db"].iter().map(|s| s.to_string()).collect();
        h.extend(self.d_list.iter().map(|d| format!("gamma_ltbf_poly_d{d}_db")));
        h.extend(["gamma_lower_bound_db", "eps1", "eps2", "eps_r"].iter().map(|s| s.to_string()));
        h
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header())?;
        for row in &self.rows {
            let mut line = vec![row.trial.to_string(), row.user.to_string()];
            match &row.record {
                None => {
                    line.push("0".into());
                    line.extend(std::iter::repeat_n(String::new(), 2 + self.d_list.len() + 4));
                }
                Some(rec) => {
                    line.push("1".into());
                    line.push(fmt(rec.gamma_instantaneous_db));
                    line.push(fmt(rec.gamma_ltbf_exact_db));
                    for d in &self.d_list {
                        line.push(rec.gamma_ltbf_poly_db.get(d).map_or(String::new(), |v| fmt(*v)));
                    }
                    for v in [rec.gamma_lower_bound_db, rec.eps1, rec.eps2, rec.eps_r] {
                        line.push(v.map_or(String::new(), fmt));
                    }
                }
            }
            w.write_record(&line)?;
        }
        let bytes = w.into_inner().map_err(|e| LtbfError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        let bad = |m: String| LtbfError::Config(format!("records csv: {m}"));
        let d_list: Vec<usize> = header
            .iter()
            .filter_map(|h| h.strip_prefix("gamma_ltbf_poly_d").and_then(|s| s.strip_suffix("_db")))
            .map(|s| s.parse().map_err(|_| bad(format!("column for d = {s}"))))
            .collect::<Result<_>>()?;
        let table = Self { d_list, rows: Vec::new() };
        if header != table.header() {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for line in rd.records() {
            let line = line?;
            let get = |k: usize| line.get(k).unwrap_or("");
            let num = |k: usize| -> Result<Option<f64>> {
                let s = get(k);
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad(format!("bad number {s:?}")))
                }
            };
            let req = |k: usize| -> Result<f64> { num(k)?.ok_or_else(|| bad(format!("missing {}", header[k]))) };
            let trial = get(0).parse().map_err(|_| bad("trial".into()))?;
            let user = get(1).parse().map_err(|_| bad("user".into()))?;
            let record = match get(2) {
                "0" => None,
                "1" => {
                    let nd = table.d_list.len();
                    let mut poly = BTreeMap::new();
                    for (k, d) in table.d_list.iter().enumerate() {
                        poly.insert(*d, req(5 + k)?);
                    }
                    Some(SinrRecord {
                        user,
                        gamma_instantaneous_db: req(3)?,
                        gamma_ltbf_exact_db: req(4)?,
                        gamma_ltbf_poly_db: poly,
                        gamma_lower_bound_db: num(5 + nd)?,
                        eps1: num(6 + nd)?,
                        eps2: num(7 + nd)?,
                        eps_r: num(8 + nd)?,
                    })
                }
                other => return Err(bad(format!("connected flag {other:?}"))),
            };
            rows.push(RecordRow { trial, user, record });
        }
        Ok(Self { rows, ..table })
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// `method,sinr_db,cdf` with one line per distinct value of each method.
pub fn cdf_csv(cdfs: &[(String, EmpiricalCdf)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "sinr_db", "cdf"])?;
    for (name, cdf) in cdfs {
        for (x, f) in cdf.points() {
            w.write_record([name.clone(), fmt(x), fmt(f)])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| LtbfError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub n_trials: usize,
    pub config: ScenarioConfig,
    pub flop_params: FlopParams,
}

impl Manifest {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        Self {
            version: VERSION.to_string(),
            seed: cfg.seed,
            n_trials: cfg.n_trials,
            config: cfg.clone(),
            flop_params: flop_params(cfg),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub records: PathBuf,
    pub cdf: PathBuf,
    pub flops: PathBuf,
    pub manifest: PathBuf,
}

/// Writes `records.csv`, `cdf.csv`, `flops.json` and `manifest.json` into `dir`.
pub fn write_outputs(res: &MonteCarloResult, dir: impl AsRef<Path>) -> Result<OutputPaths> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let paths = OutputPaths {
        records: dir.join("records.csv"),
        cdf: dir.join("cdf.csv"),
        flops: dir.join("flops.json"),
        manifest: dir.join("manifest.json"),
    };
    let table = RecordTable::from_result(res);
    std::fs::write(&paths.records, table.to_csv()?)?;
    std::fs::write(&paths.cdf, cdf_csv(&table.cdfs())?)?;
    std::fs::write(&paths.flops, flops_report(&res.config).to_json())?;
    std::fs::write(&paths.manifest, serde_json::to_string_pretty(&Manifest::new(&res.config))?)?;
    Ok(paths)
}

/// Reads a records CSV written by [`write_outputs`].
pub fn read_records(path: impl AsRef<Path>) -> Result<RecordTable> {
    RecordTable::from_csv(&std::fs::read_to_string(path)?)
}
