//! On-disk formats: instance, policy, diagnostics and report JSON, dataset CSV.
//!
//! Reals go through `serde_json` with `float_roundtrip`, so every `f64`
//! survives a write/read cycle bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use klbandit_core::{Dataset, EvalReport, Instance, InstanceSpec, Noise, Policy, Record, SolverDiagnostics, Table};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const DATASET_HEADER: [&str; 4] = ["idx", "context", "arm", "reward"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NoiseDoc {
    Gaussian { sigma: f64 },
    Bernoulli,
}

impl From<Noise> for NoiseDoc {
    fn from(n: Noise) -> Self {
        match n {
            Noise::Gaussian { sigma } => NoiseDoc::Gaussian { sigma },
            Noise::Bernoulli => NoiseDoc::Bernoulli,
        }
    }
}

impl From<NoiseDoc> for Noise {
    fn from(n: NoiseDoc) -> Self {
        match n {
            NoiseDoc::Gaussian { sigma } => Noise::Gaussian { sigma },
            NoiseDoc::Bernoulli => Noise::Bernoulli,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub schema_version: u32,
    pub num_contexts: usize,
    pub num_arms: usize,
    pub eta: f64,
    pub rho: Vec<f64>,
    pub ref_policy: Vec<Vec<f64>>,
    pub reward: Vec<Vec<f64>>,
    pub noise: NoiseDoc,
}

impl From<&Instance> for InstanceDoc {
    fn from(inst: &Instance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            num_contexts: inst.num_contexts(),
            num_arms: inst.num_arms(),
            eta: inst.eta(),
            rho: inst.rho().to_vec(),
            ref_policy: inst.ref_policy().to_rows(),
            reward: inst.reward().to_rows(),
            noise: inst.noise().into(),
        }
    }
}

impl InstanceDoc {
    pub fn into_instance(self) -> AppResult<Instance> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(AppError::parse(
                "instance",
                1,
                1,
                format!("unsupported schema_version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let spec = InstanceSpec {
            num_contexts: self.num_contexts,
            num_arms: self.num_arms,
            eta: self.eta,
            rho: self.rho,
            ref_policy: table_from_rows(&self.ref_policy, self.num_contexts, self.num_arms)?,
            reward: table_from_rows(&self.reward, self.num_contexts, self.num_arms)?,
            noise: self.noise.into(),
        };
        Ok(Instance::new(spec)?)
    }
}

fn table_from_rows<T: Copy>(rows: &[Vec<T>], num_rows: usize, num_cols: usize) -> AppResult<Table<T>> {
    if rows.is_empty() {
        return Err(klbandit_core::Error::ShapeMismatch(format!("empty table, expected {num_rows} x {num_cols}")).into());
    }
    Ok(Table::from_rows(rows)?)
}

fn json_error(what: &'static str, e: serde_json::Error) -> AppError {
    AppError::parse(what, e.line(), e.column(), e)
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory JSON serialization cannot fail");
    s.push('\n');
    s
}

pub fn instance_to_json(inst: &Instance) -> String {
    to_pretty(&InstanceDoc::from(inst))
}

pub fn instance_from_json(text: &str) -> AppResult<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| json_error("instance", e))?;
    doc.into_instance()
}

pub fn read_text(path: &Path) -> AppResult<String> {
    fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> AppResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| AppError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

pub fn read_instance(path: &Path) -> AppResult<Instance> {
    instance_from_json(&read_text(path)?)
}

pub fn write_instance(path: &Path, inst: &Instance) -> AppResult<()> {
    write_text(path, &instance_to_json(inst))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDoc {
    pub num_contexts: usize,
    pub num_arms: usize,
    pub probs: Vec<Vec<f64>>,
}

pub fn policy_to_json(pi: &Policy) -> String {
    to_pretty(&PolicyDoc { num_contexts: pi.num_contexts(), num_arms: pi.num_arms(), probs: pi.probs().to_rows() })
}

pub fn policy_from_json(text: &str) -> AppResult<Policy> {
    let doc: PolicyDoc = serde_json::from_str(text).map_err(|e| json_error("policy", e))?;
    let table = table_from_rows(&doc.probs, doc.num_contexts, doc.num_arms)?;
    if table.shape() != (doc.num_contexts, doc.num_arms) {
        return Err(klbandit_core::Error::ShapeMismatch(format!(
            "policy declares {} x {} but holds {:?}",
            doc.num_contexts,
            doc.num_arms,
            table.shape()
        ))
        .into());
    }
    Ok(Policy::new(table)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsDoc {
    pub delta: f64,
    pub pessimism: bool,
    pub counts: Vec<Vec<u64>>,
    pub empirical_mean: Vec<Vec<f64>>,
    pub penalty: Vec<Vec<f64>>,
    pub pessimistic_reward: Vec<Vec<f64>>,
}

pub fn diagnostics_to_json(diag: &SolverDiagnostics, delta: f64, pessimism: bool) -> String {
    to_pretty(&DiagnosticsDoc {
        delta,
        pessimism,
        counts: diag.counts.to_rows(),
        empirical_mean: diag.empirical_mean.to_rows(),
        penalty: diag.penalty.to_rows(),
        pessimistic_reward: diag.pessimistic_reward.to_rows(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReportDoc {
    pub j_value: f64,
    pub subopt_direct: f64,
    pub subopt_via_kl: f64,
    pub c_pistar: f64,
    pub d2_pistar: f64,
}

impl From<EvalReport> for EvalReportDoc {
    fn from(r: EvalReport) -> Self {
        Self {
            j_value: r.j_value,
            subopt_direct: r.subopt_direct,
            subopt_via_kl: r.subopt_via_kl,
            c_pistar: r.c_pistar,
            d2_pistar: r.d2_pistar,
        }
    }
}

pub fn eval_report_to_json(r: EvalReport) -> String {
    to_pretty(&EvalReportDoc::from(r))
}

pub fn write_dataset<W: Write>(out: W, ds: &Dataset) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| AppError::io("<dataset>", std::io::Error::other(e));
    w.write_record(DATASET_HEADER).map_err(io_err)?;
    for (i, r) in ds.records().iter().enumerate() {
        w.write_record([i.to_string(), r.context.to_string(), r.arm.to_string(), r.reward.to_string()])
            .map_err(io_err)?;
    }
    w.flush().map_err(|e| AppError::io("<dataset>", e))
}

pub fn dataset_to_csv(ds: &Dataset) -> String {
    let mut buf = Vec::new();
    write_dataset(&mut buf, ds).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// Parses `idx,context,arm,reward` rows; `idx` must count up from 0.
pub fn dataset_from_csv(text: &str) -> AppResult<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| AppError::parse("dataset", 1, 1, e))?.clone();
    if header.iter().map(str::trim).ne(DATASET_HEADER) {
        return Err(AppError::parse("dataset", 1, 1, format!("header must be `{}`", DATASET_HEADER.join(","))));
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| {
            let l = e.position().map_or(line, |p| p.line() as usize);
            AppError::parse("dataset", l, 1, e)
        })?;
        let field = |col: usize| row.get(col).unwrap_or("").trim();
        let idx: usize = field(0).parse().map_err(|e| AppError::parse("dataset", line, 1, format!("idx: {e}")))?;
        if idx != i {
            return Err(AppError::parse("dataset", line, 1, format!("idx {idx} out of sequence, expected {i}")));
        }
        let context = field(1).parse().map_err(|e| AppError::parse("dataset", line, 2, format!("context: {e}")))?;
        let arm = field(2).parse().map_err(|e| AppError::parse("dataset", line, 3, format!("arm: {e}")))?;
        let reward: f64 = field(3).parse().map_err(|e| AppError::parse("dataset", line, 4, format!("reward: {e}")))?;
        if !reward.is_finite() {
            return Err(AppError::parse("dataset", line, 4, "reward must be finite"));
        }
        records.push(Record { context, arm, reward });
    }
    Ok(Dataset::new(records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_instance() -> Instance {
        Instance::new(InstanceSpec::uniform_contexts(
            0.1 + 0.2,
            Table::from_rows(&[[1.0 / 3.0, 2.0 / 3.0]]).unwrap(),
            Table::from_rows(&[[-0.0, 1e-300]]).unwrap(),
            Noise::Gaussian { sigma: 0.7 },
        ))
        .unwrap()
    }

    #[test]
    fn instance_round_trip_is_bit_exact() {
        let inst = sample_instance();
        let text = instance_to_json(&inst);
        assert!(text.contains("\"num_contexts\": 1"));
        let back = instance_from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.eta().to_bits(), inst.eta().to_bits());
        assert_eq!(back.reward().get(0, 0).to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn truncated_instance_is_a_parse_error() {
        let text = instance_to_json(&sample_instance());
        let err = instance_from_json(&text[..text.len() / 2]).unwrap_err();
        assert_eq!(err.kind(), "ParseError");
        match err {
            AppError::Parse { line, .. } => assert!(line > 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn instance_validation_runs_on_load() {
        let text = instance_to_json(&sample_instance()).replace("0.3333333333333333", "0.0");
        assert_eq!(instance_from_json(&text).unwrap_err().kind(), "ZeroSupportReference");
        let text = instance_to_json(&sample_instance()).replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert_eq!(instance_from_json(&text).unwrap_err().kind(), "ParseError");
    }

    #[test]
    fn noise_tags() {
        assert_eq!(serde_json::to_string(&NoiseDoc::Bernoulli).unwrap(), r#"{"kind":"bernoulli"}"#);
        assert_eq!(serde_json::to_string(&NoiseDoc::Gaussian { sigma: 1.0 }).unwrap(), r#"{"kind":"gaussian","sigma":1.0}"#);
    }

    #[test]
    fn dataset_round_trip() {
        let ds = Dataset::new(vec![
            Record { context: 0, arm: 1, reward: 0.1 + 0.2 },
            Record { context: 2, arm: 0, reward: -1e-17 },
        ]);
        let text = dataset_to_csv(&ds);
        assert!(text.starts_with("idx,context,arm,reward\n0,0,1,"));
        assert_eq!(dataset_from_csv(&text).unwrap(), ds);
    }

    #[test]
    fn dataset_errors_carry_lines() {
        let err = dataset_from_csv("idx,context,arm,reward\n0,0,0,0.5\n1,0,x,0.5\n").unwrap_err();
        match err {
            AppError::Parse { line, column, .. } => assert_eq!((line, column), (3, 3)),
            other => panic!("{other:?}"),
        }
        assert_eq!(dataset_from_csv("a,b\n").unwrap_err().kind(), "ParseError");
        assert_eq!(dataset_from_csv("idx,context,arm,reward\n5,0,0,0.5\n").unwrap_err().kind(), "ParseError");
    }

    #[test]
    fn policy_round_trip() {
        let pi = Policy::new(Table::from_rows(&[[0.25, 0.75], [1.0, 0.0]]).unwrap()).unwrap();
        assert_eq!(policy_from_json(&policy_to_json(&pi)).unwrap(), pi);
        assert_eq!(policy_from_json(r#"{"num_contexts":1,"num_arms":2,"probs":[[0.5,0.6]]}"#).unwrap_err().kind(), "NonStochasticRow");
    }
}
