//! On-disk formats: model, policy, class and run-config JSON files and the
//! line-delimited dataset format. Every file carries `format_version`.
//!
//! Loaders report problems as [`Error::Parse`] with a line and column. For
//! syntax and schema errors the position comes from the JSON parser; for
//! semantic errors (a row that does not sum to one, say) it points at the
//! offending key.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundInputs, FormulaVariant, SrmCandidate};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, SampleSet};
use crate::policy::{Policy, PolicyClass, PolicySpec, SoftmaxGrid};
use crate::pomdp::{History, Pomdp, ReturnSpec, Step};

pub const FORMAT_VERSION: u32 = 1;

/// Reads a file, mapping failures to [`Error::Io`].
pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, bytes).map_err(io)
}

fn parse_error(path: &Path, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

fn from_json<T: DeserializeOwned>(path: &Path, text: &str, line_offset: usize) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let msg = match msg.rfind(" at line ") {
            Some(i) => msg[..i].to_string(),
            None => msg,
        };
        parse_error(path, e.line() + line_offset, e.column(), msg)
    })
}

/// Line and column (1-based) of the first occurrence of `"key"`, or 1:1.
fn locate(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    match text.find(&needle) {
        Some(pos) => {
            let before = &text[..pos];
            let line = before.matches('\n').count() + 1;
            let column = pos - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (line, column)
        }
        None => (1, 1),
    }
}

/// Re-reports a semantic error at the line of the field it names.
fn at_field(path: &Path, text: &str, err: Error) -> Error {
    let message = err.to_string();
    let field = match &err {
        Error::InvalidInput { field, .. } => field.clone(),
        _ => {
            let body = message.split_once(": ").map_or(message.as_str(), |(_, rest)| rest);
            body.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .next()
                .unwrap_or("")
                .to_string()
        }
    };
    let key = field.split(['[', '.']).next().unwrap_or("");
    let (line, column) = if key.is_empty() { (1, 1) } else { locate(text, key) };
    parse_error(path, line, column, message)
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<serde_json::Value>,
}

fn check_version(path: &Path, text: &str) -> Result<()> {
    let probe: VersionProbe = from_json(path, text, 0)?;
    match probe.format_version {
        None => Err(parse_error(path, 1, 1, "missing field `format_version`")),
        Some(v) if v.as_u64() == Some(FORMAT_VERSION as u64) => Ok(()),
        Some(v) => {
            let (line, column) = locate(text, "format_version");
            Err(parse_error(
                path,
                line,
                column,
                format!("unsupported format_version {v} (this build reads {FORMAT_VERSION})"),
            ))
        }
    }
}

/// Model file layout: the [`Pomdp`] fields plus `format_version`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    num_states: usize,
    num_observations: usize,
    num_actions: usize,
    initial_dist: Vec<f64>,
    transition: Vec<Vec<Vec<f64>>>,
    observation_fn: Vec<Vec<f64>>,
    reward: Vec<Vec<f64>>,
    r_max: f64,
}

/// Parses and validates a model from JSON text; `path` labels diagnostics.
pub fn parse_model(path: &Path, text: &str) -> Result<Pomdp> {
    check_version(path, text)?;
    let f: ModelFile = from_json(path, text, 0)?;
    let model = Pomdp {
        num_states: f.num_states,
        num_observations: f.num_observations,
        num_actions: f.num_actions,
        initial_dist: f.initial_dist,
        transition: f.transition,
        observation_fn: f.observation_fn,
        reward: f.reward,
        r_max: f.r_max,
    };
    model.validate().map_err(|e| at_field(path, text, e))?;
    Ok(model)
}

pub fn load_model(path: &Path) -> Result<Pomdp> {
    parse_model(path, &read_text(path)?)
}

pub fn model_to_json(model: &Pomdp) -> String {
    let f = ModelFile {
        format_version: FORMAT_VERSION,
        num_states: model.num_states,
        num_observations: model.num_observations,
        num_actions: model.num_actions,
        initial_dist: model.initial_dist.clone(),
        transition: model.transition.clone(),
        observation_fn: model.observation_fn.clone(),
        reward: model.reward.clone(),
        r_max: model.r_max,
    };
    let mut s = serde_json::to_string_pretty(&f).expect("model serializes");
    s.push('\n');
    s
}

pub fn parse_policy(path: &Path, text: &str) -> Result<Policy> {
    check_version(path, text)?;
    let spec: PolicySpec = from_json(path, text, 0)?;
    Policy::from_spec(spec).map_err(|e| at_field(path, text, e))
}

pub fn load_policy(path: &Path) -> Result<Policy> {
    parse_policy(path, &read_text(path)?)
}

pub fn policy_to_json(policy: &Policy) -> String {
    let spec = PolicySpec {
        format_version: Some(FORMAT_VERSION),
        ..policy.to_spec()
    };
    let mut s = serde_json::to_string_pretty(&spec).expect("policy serializes");
    s.push('\n');
    s
}

/// Class file layout. Exactly one of `members` and `softmax_grid` is given;
/// `contexts` defaults to every context of the widest member.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassFile {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<PolicySpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub softmax_grid: Option<SoftmaxGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contexts: Option<Vec<Vec<usize>>>,
}

impl ClassFile {
    pub fn build(&self) -> Result<PolicyClass> {
        let members = match (&self.members, &self.softmax_grid) {
            (Some(specs), None) => specs
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let p = Policy::from_spec(s.clone())?;
                    Ok(if s.id.is_none() {
                        p.with_id(format!("member[{i}]"))
                    } else {
                        p
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            (None, Some(grid)) => grid.policies()?,
            _ => {
                return Err(Error::input(
                    "members",
                    "give exactly one of `members` and `softmax_grid`",
                ))
            }
        };
        match &self.contexts {
            Some(c) => PolicyClass::with_contexts(members, c.clone()),
            None => PolicyClass::new(members),
        }
    }
}

pub fn parse_class(path: &Path, text: &str) -> Result<PolicyClass> {
    check_version(path, text)?;
    let f: ClassFile = from_json(path, text, 0)?;
    f.build().map_err(|e| at_field(path, text, e))
}

pub fn load_class(path: &Path) -> Result<PolicyClass> {
    parse_class(path, &read_text(path)?)
}

/// First line of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub format_version: u32,
    pub kind: String,
    pub behavior_policy_id: String,
    pub spec: ReturnSpec,
    pub master_seed: u64,
    pub n: usize,
}

const DATASET_KIND: &str = "sample_set";

/// One history per line after the header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub index: usize,
    pub seed: u64,
    pub observations: Vec<usize>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub behavior_probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal_observation: Option<usize>,
    #[serde(rename = "return")]
    pub ret: f64,
}

/// Serializes a sample set as JSON lines. Floats use shortest round-trip
/// formatting, so reading the text back reproduces every value bit for bit.
pub fn write_dataset_to(samples: &SampleSet, out: &mut impl Write) -> std::io::Result<()> {
    let header = DatasetHeader {
        format_version: FORMAT_VERSION,
        kind: DATASET_KIND.into(),
        behavior_policy_id: samples.behavior_policy_id.clone(),
        spec: samples.spec,
        master_seed: samples.master_seed,
        n: samples.len(),
    };
    serde_json::to_writer(&mut *out, &header)?;
    out.write_all(b"\n")?;
    for (i, h) in samples.histories.iter().enumerate() {
        let record = DatasetRecord {
            index: i,
            seed: samples.seeds[i],
            observations: h.steps.iter().map(|s| s.observation).collect(),
            actions: h.steps.iter().map(|s| s.action).collect(),
            rewards: h.steps.iter().map(|s| s.reward).collect(),
            behavior_probs: h.behavior_probs.clone().unwrap_or_default(),
            terminal_observation: h.terminal_observation,
            ret: samples.returns[i],
        };
        serde_json::to_writer(&mut *out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_dataset(path: &Path, samples: &SampleSet) -> Result<()> {
    let mut buf = BufWriter::new(Vec::new());
    write_dataset_to(samples, &mut buf).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bytes = buf.into_inner().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.into_error(),
    })?;
    write_bytes(path, &bytes)
}

pub fn parse_dataset(path: &Path, text: &str) -> Result<SampleSet> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, 1, "empty dataset file"))?;
    check_version(path, first)?;
    let header: DatasetHeader = from_json(path, first, 0)?;
    if header.kind != DATASET_KIND {
        return Err(parse_error(path, 1, 1, format!("kind must be \"{DATASET_KIND}\"")));
    }
    header.spec.validate().map_err(|e| at_field(path, first, e))?;

    let mut histories = Vec::with_capacity(header.n);
    let mut seeds = Vec::with_capacity(header.n);
    let mut stored = Vec::with_capacity(header.n);
    for (i, line) in lines {
        let lineno = i + 1;
        let r: DatasetRecord = from_json(path, line, i)?;
        let len = r.observations.len();
        if r.index != histories.len() {
            return Err(parse_error(
                path,
                lineno,
                1,
                format!("record index {} out of order (expected {})", r.index, histories.len()),
            ));
        }
        if r.actions.len() != len || r.rewards.len() != len || r.behavior_probs.len() != len {
            return Err(parse_error(
                path,
                lineno,
                1,
                "observations, actions, rewards and behavior_probs must have equal length",
            ));
        }
        let steps = (0..len)
            .map(|t| Step {
                observation: r.observations[t],
                action: r.actions[t],
                reward: r.rewards[t],
            })
            .collect();
        let mut h = History::new(steps).with_behavior_probs(r.behavior_probs);
        h.terminal_observation = r.terminal_observation;
        histories.push(h);
        seeds.push(r.seed);
        stored.push((lineno, r.ret));
    }
    if histories.len() != header.n {
        return Err(parse_error(
            path,
            1,
            1,
            format!("header announces {} records, found {}", header.n, histories.len()),
        ));
    }
    let samples = SampleSet::new(
        histories,
        header.behavior_policy_id,
        header.spec,
        header.master_seed,
        seeds,
    )
    .map_err(|e| match e {
        Error::ZeroBehaviorProbability { history, .. } | Error::MissingBehaviorProbabilities(history) => {
            parse_error(path, stored[history].0, 1, e.to_string())
        }
        other => parse_error(path, 1, 1, other.to_string()),
    })?;
    for (i, &(lineno, ret)) in stored.iter().enumerate() {
        if (samples.returns[i] - ret).abs() > 1e-12 {
            return Err(parse_error(
                path,
                lineno,
                1,
                format!("stored return {ret} disagrees with rewards ({})", samples.returns[i]),
            ));
        }
    }
    Ok(samples)
}

pub fn load_dataset(path: &Path) -> Result<SampleSet> {
    parse_dataset(path, &read_text(path)?)
}

/// One behavior policy of a mixture, with its prior weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureEntry {
    pub behavior: PathBuf,
    pub prior: f64,
}

/// Horizons, ratio grid and shared inputs for the bound comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundGrid {
    pub horizons: Vec<usize>,
    /// Values of `v_max / eps`.
    pub ratios: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Constant metric entropy `K` used by every column.
    pub log_covering: f64,
    pub vc_dim: u64,
    pub c_floor: f64,
    pub num_actions: usize,
    pub k1: f64,
}

/// Run configuration shared by all subcommands. Paths are relative to the
/// directory containing the config file. Command-line flags take precedence
/// over these fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub format_version: u32,
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub behavior: Option<PathBuf>,
    #[serde(default)]
    pub target: Option<PathBuf>,
    #[serde(default)]
    pub class: Option<PathBuf>,
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub mixture: Option<Vec<MixtureEntry>>,
    #[serde(default)]
    pub spec: Option<ReturnSpec>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default)]
    pub n_schedule: Option<Vec<usize>>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub variant: Option<FormulaVariant>,
    #[serde(default)]
    pub estimator: Option<EstimatorKind>,
    #[serde(default)]
    pub bounds: Option<BoundInputs>,
    #[serde(default)]
    pub bound_grid: Option<BoundGrid>,
    #[serde(default)]
    pub srm_classes: Option<Vec<SrmCandidate>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        join(&mut self.model);
        join(&mut self.behavior);
        join(&mut self.target);
        join(&mut self.class);
        join(&mut self.dataset);
        join(&mut self.output);
        for m in self.mixture.iter_mut().flatten() {
            if m.behavior.is_relative() {
                m.behavior = base.join(&m.behavior);
            }
        }
    }
}

/// Parses a config; relative paths are resolved against `base`.
pub fn parse_config(path: &Path, text: &str, base: &Path) -> Result<RunConfig> {
    check_version(path, text)?;
    let mut cfg: RunConfig = from_json(path, text, 0)?;
    if let Some(spec) = &cfg.spec {
        spec.validate().map_err(|e| at_field(path, text, e))?;
    }
    cfg.resolve(base);
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(path, &read_text(path)?, &base)
}
