//! Experiment orchestration: seeded Monte Carlo trials, figure sweeps and
//! tabular output.
//!
//! Every trial draws its randomness from `derive_stream(master, trial)`, and
//! trials are collected in index order, so results do not depend on the
//! number of worker threads.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::capacity::{self, Regime};
use crate::channel::{fragment_stats, torn_transmit, transmit, NoiseSpec, TornSpec};
use crate::cluster_recon::{run_pipeline, LshParams, ReconstructMode};
use crate::codec_index::{IndexCodec, IndexLayout, InnerCodeSpec, OuterCodeSpec};
use crate::codec_linear::{decode_linear, edge_probe, gen_codebook, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::gf::Gf2m;
use crate::gf2::BinaryMatrix;
use crate::sampling::SamplingSpec;
use crate::seqcore::{derive_stream, Alphabet, RandomStream, ReadPool, Sequence};

pub const SCHEMA_VERSION: u32 = 1;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub l: Option<usize>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_alphabet")]
    pub alphabet: Alphabet,
    #[serde(default)]
    pub sampling: Option<SamplingSpec<f64>>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Adds a wall-clock `runtime_ms` metric; breaks byte-identical output.
    #[serde(default)]
    pub record_runtime: bool,
}

fn default_alphabet() -> Alphabet {
    Alphabet::Binary
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    CodecTrial(CodecConfig),
    CapacitySweep(SweepSpec),
    Tradeoff {
        #[serde(default)]
        lambda: Vec<f64>,
        #[serde(default)]
        beta: Vec<f64>,
    },
    TornPaper {
        torn: TornSpec,
    },
    ClusterPipeline(ClusterConfig),
    Probe(ProbeConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Index,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecConfig {
    pub scheme: Scheme,
    /// Explicit outer code; otherwise sized from `rate`.
    #[serde(default)]
    pub outer: Option<OuterCodeSpec>,
    #[serde(default = "inner_none")]
    pub inner: InnerCodeSpec,
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub field_bits: Option<u32>,
    #[serde(default)]
    pub b: Option<usize>,
    #[serde(default)]
    pub num_messages: Option<usize>,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

fn inner_none() -> InnerCodeSpec {
    InnerCodeSpec::None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    #[serde(default)]
    pub lsh: Option<LshParams>,
    #[serde(default = "mode_sub")]
    pub mode: ReconstructMode,
}

fn mode_sub() -> ReconstructMode {
    ReconstructMode::Substitution
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Rank,
    Edges,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub probe: ProbeKind,
    #[serde(default)]
    pub b: Option<usize>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub pairs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// Storage/recovery rate pairs over coverage depth.
    Fig34,
    /// Torn-paper versus fixed-length capacity over β.
    Fig35,
    /// BSC capacity and its proven-regime boundary.
    Fig42,
    /// Erasure multi-draw capacity with outer-bound and clustering boundaries.
    Fig54,
    /// All single- and multi-draw evaluators on a (p, β, λ) grid.
    Capacity,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig34" | "tradeoff" => Ok(Figure::Fig34),
            "fig35" | "torn" => Ok(Figure::Fig35),
            "fig42" => Ok(Figure::Fig42),
            "fig54" => Ok(Figure::Fig54),
            "capacity" => Ok(Figure::Capacity),
            _ => Err(Error::Parse(format!("unknown figure '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub figure: Figure,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub lambda: Vec<f64>,
}

impl SweepSpec {
    pub fn new(figure: Figure) -> Self {
        SweepSpec { figure, p: Vec::new(), beta: Vec::new(), lambda: Vec::new() }
    }

    fn p_grid(&self) -> Vec<f64> {
        or_default(&self.p, &[0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2])
    }

    fn beta_grid(&self) -> Vec<f64> {
        if self.figure == Figure::Fig35 && self.beta.is_empty() {
            return (1..=50).map(|i| i as f64 * 0.2).collect();
        }
        or_default(&self.beta, &[1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0])
    }

    fn lambda_grid(&self) -> Vec<f64> {
        or_default(&self.lambda, &[0.5, 1.0, 2.0, 3.0, 5.0])
    }
}

fn or_default(v: &[f64], d: &[f64]) -> Vec<f64> {
    if v.is_empty() { d.to_vec() } else { v.to_vec() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// Fingerprint of the trial's derived stream.
    pub seed: u64,
    pub success: bool,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Sequence length and the β it realises, when the experiment has them.
    pub l: Option<usize>,
    pub beta: Option<f64>,
    pub means: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let phat = k / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// `L = round(β log2 M)` when β is given; returns `(L, realised β)`.
pub fn resolve_length(m: usize, l: Option<usize>, beta: Option<f64>) -> Result<(usize, f64)> {
    let log_m = (m as f64).log2();
    match (l, beta) {
        (Some(l), None) => Ok((l, l as f64 / log_m)),
        (None, Some(b)) => {
            if m < 2 {
                return Err(Error::Domain("β needs M >= 2".into()));
            }
            let l = (b * log_m).round() as usize;
            if l == 0 {
                return Err(Error::Domain(format!("β={b} gives an empty sequence")));
            }
            Ok((l, l as f64 / log_m))
        }
        _ => Err(Error::Domain("give exactly one of L and β".into())),
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.trials == 0 {
            return Err(Error::Domain("trials must be >= 1".into()));
        }
        if let Some(s) = &self.sampling {
            s.validate()?;
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        if matches!(self.experiment, Experiment::CodecTrial(_) | Experiment::ClusterPipeline(_)) {
            self.dims()?;
        }
        Ok(())
    }

    fn dims(&self) -> Result<(usize, usize, f64)> {
        let m = self.m.ok_or_else(|| Error::Domain("experiment needs M".into()))?;
        let (l, beta) = resolve_length(m, self.l, self.beta)?;
        Ok((m, l, beta))
    }

    fn sampling(&self) -> SamplingSpec<f64> {
        self.sampling.clone().unwrap_or(SamplingSpec::Fixed { n: 1 })
    }

    fn noise(&self) -> NoiseSpec {
        self.noise.unwrap_or(NoiseSpec::Identity)
    }

    pub fn master(&self) -> RandomStream {
        RandomStream::new(self.seed, "experiment")
    }
}

/// Upper bound on the rate of any code for the configured channel, when one
/// is known in closed form.
pub fn channel_rate_bound(alphabet: Alphabet, sampling: &SamplingSpec<f64>, noise: &NoiseSpec, beta: f64) -> Option<f64> {
    let q0 = sampling.q0();
    match (alphabet, noise) {
        (Alphabet::Binary, NoiseSpec::Identity) => Some(capacity::cap_noise_free(q0, beta).rate),
        (Alphabet::Binary, NoiseSpec::Bsc { p }) if *p < 0.5 => capacity::cap_multi_bsc(sampling, *p, beta).ok().map(|r| r.rate),
        (Alphabet::Binary, NoiseSpec::Bec { p }) => capacity::cap_multi_bec(sampling, *p, beta).ok().map(|r| r.rate),
        (Alphabet::Quaternary, NoiseSpec::Identity) => Some(capacity::general_alphabet_rate(q0, beta, 2.0).rate),
        _ => None,
    }
}

fn random_bits(n: usize, stream: &RandomStream) -> Vec<bool> {
    let mut rng = stream.rng();
    (0..n).map(|_| rng.random()).collect()
}

fn random_pool(alphabet: Alphabet, m: usize, l: usize, stream: &RandomStream) -> Result<ReadPool> {
    let mut rng = stream.rng();
    let size = alphabet.size() as u8;
    let reads = (0..m)
        .map(|_| Sequence::new(alphabet, (0..l).map(|_| rng.random_range(0..size)).collect()))
        .collect::<Result<Vec<_>>>()?;
    ReadPool::fixed(alphabet, reads)
}

enum Prepared {
    Index { codec: Option<IndexCodec> },
    Linear { m: usize, l: usize, b: usize, messages: usize, epsilon: f64 },
    Cluster { m: usize, l: usize, lsh: LshParams, mode: ReconstructMode },
    Torn(TornSpec),
    Rank { b: usize, delta: f64 },
    Edges { p: f64, l: usize, pairs: usize },
}

fn prepare(cfg: &ExperimentConfig, warnings: &mut Vec<String>) -> Result<(Prepared, Option<usize>, Option<f64>)> {
    match &cfg.experiment {
        Experiment::CodecTrial(c) => {
            let (m, l, beta) = cfg.dims()?;
            match c.scheme {
                Scheme::Index => {
                    let layout = IndexLayout::new(m, l, cfg.alphabet)?;
                    let codec = match (c.outer, c.rate) {
                        (Some(outer), _) => Some(IndexCodec::new(layout, outer, c.inner)?),
                        (None, Some(r)) if r <= 0.0 => None,
                        (None, Some(r)) => {
                            let bits = c.field_bits.map_or_else(|| Gf2m::with_at_least(m).map(|f| f.bits()), Ok)?;
                            Some(IndexCodec::for_rate(layout, c.inner, bits, r)?)
                        }
                        (None, None) => return Err(Error::Domain("index codec needs an outer code or a rate".into())),
                    };
                    let rate = codec.as_ref().map_or(0.0, IndexCodec::rate);
                    if let Some(bound) = channel_rate_bound(cfg.alphabet, &cfg.sampling(), &cfg.noise(), beta) {
                        if rate > bound {
                            warnings.push(format!("codec rate {rate} exceeds the channel capacity {bound}"));
                        }
                    }
                    Ok((Prepared::Index { codec }, Some(l), Some(beta)))
                }
                Scheme::Linear => {
                    let b = c.b.ok_or_else(|| Error::Domain("linear codec needs b".into()))?;
                    let messages = c.num_messages.ok_or_else(|| Error::Domain("linear codec needs num_messages".into()))?;
                    let rate = (messages as f64).log2() / (m * l) as f64;
                    if let Some(bound) = channel_rate_bound(cfg.alphabet, &cfg.sampling(), &cfg.noise(), beta) {
                        if rate > bound {
                            warnings.push(format!("codec rate {rate} exceeds the channel capacity {bound}"));
                        }
                    }
                    let epsilon = c.epsilon.unwrap_or(DEFAULT_EPSILON);
                    Ok((Prepared::Linear { m, l, b, messages, epsilon }, Some(l), Some(beta)))
                }
            }
        }
        Experiment::ClusterPipeline(c) => {
            let (m, l, beta) = cfg.dims()?;
            let lsh = c.lsh.unwrap_or_else(|| LshParams::defaults(cfg.alphabet));
            lsh.validate()?;
            Ok((Prepared::Cluster { m, l, lsh, mode: c.mode }, Some(l), Some(beta)))
        }
        Experiment::TornPaper { torn } => {
            torn.validate()?;
            Ok((Prepared::Torn(*torn), None, None))
        }
        Experiment::Probe(p) => match p.probe {
            ProbeKind::Rank => Ok((
                Prepared::Rank { b: p.b.unwrap_or(100), delta: p.delta.unwrap_or(0.0) },
                None,
                None,
            )),
            ProbeKind::Edges => {
                let l = cfg.l.ok_or_else(|| Error::Domain("edge probe needs L".into()))?;
                Ok((Prepared::Edges { p: p.p.unwrap_or(0.1), l, pairs: p.pairs.unwrap_or(10_000) }, Some(l), None))
            }
        },
        Experiment::CapacitySweep(_) | Experiment::Tradeoff { .. } => {
            Err(Error::Contract("sweep experiments have no trials; use sweep()".into()))
        }
    }
}

fn run_trial(cfg: &ExperimentConfig, prep: &Prepared, stream: &RandomStream) -> Result<(bool, BTreeMap<String, f64>)> {
    let mut metrics = BTreeMap::new();
    let success = match prep {
        Prepared::Index { codec: None } => {
            // empty message: nothing to store, nothing to lose
            metrics.insert("rate".into(), 0.0);
            true
        }
        Prepared::Index { codec: Some(codec) } => {
            let message = random_bits(codec.message_bits(), &stream.child("message"));
            let pool = codec.encode(&message)?;
            let trace = transmit(&pool, &cfg.sampling(), &cfg.noise(), &mut stream.child("channel").rng())?;
            let report = codec.decode(&trace.output)?;
            metrics.insert("rate".into(), codec.rate());
            metrics.insert("erasures".into(), report.erasures as f64);
            metrics.insert("substitutions".into(), report.substitutions as f64);
            metrics.insert("inner_failures".into(), report.inner_failures() as f64);
            metrics.insert("failed_rows".into(), report.failed_rows as f64);
            report.message.as_deref() == Some(&message[..])
        }
        Prepared::Linear { m, l, b, messages, epsilon } => {
            let codebook = gen_codebook(*m, *l, *b, *messages, &mut stream.child("codebook").rng())?;
            let sent = stream.child("message").rng().random_range(0..*messages);
            let pool = codebook.encode(sent)?;
            let sampling = cfg.sampling();
            let trace = transmit(&pool, &sampling, &cfg.noise(), &mut stream.child("channel").rng())?;
            metrics.insert("rate".into(), codebook.rate());
            metrics.insert("reads".into(), trace.output.len() as f64);
            // more reads than the exhaustive decoder accepts counts as a failed trial
            let out = match decode_linear(&trace.output, &codebook, sampling.q0(), *epsilon) {
                Err(Error::TooLarge(_)) => {
                    for key in ["candidates", "ambiguous", "underdetermined", "wrong"] {
                        metrics.insert(key.into(), 0.0);
                    }
                    metrics.insert("too_large".into(), 1.0);
                    return Ok((false, metrics));
                }
                other => other?,
            };
            metrics.insert("too_large".into(), 0.0);
            metrics.insert("candidates".into(), out.candidates.len() as f64);
            metrics.insert("ambiguous".into(), f64::from(u8::from(out.ambiguous())));
            metrics.insert("underdetermined".into(), f64::from(u8::from(out.underdetermined)));
            let wrong = out.decoded.is_some_and(|d| d != sent);
            metrics.insert("wrong".into(), f64::from(u8::from(wrong)));
            out.decoded == Some(sent)
        }
        Prepared::Cluster { m, l, lsh, mode } => {
            let inputs = random_pool(cfg.alphabet, *m, *l, &stream.child("inputs"))?;
            let lsh = LshParams { seed: stream.child("lsh").fingerprint(), ..*lsh };
            let rep = run_pipeline(&inputs, &cfg.sampling(), &cfg.noise(), &lsh, *mode, &stream.child("pipeline"))?;
            metrics.insert("reads".into(), rep.reads as f64);
            metrics.insert("clusters".into(), rep.clusters as f64);
            metrics.insert("precision".into(), rep.score.precision);
            metrics.insert("recall".into(), rep.score.recall);
            metrics.insert("accuracy".into(), rep.score.accuracy);
            metrics.insert("exact_fraction".into(), rep.exact_fraction());
            metrics.insert("recovered_fraction".into(), rep.recovered_fraction());
            rep.recovered_inputs == rep.inputs
        }
        Prepared::Torn(spec) => {
            let seq = random_pool(Alphabet::Binary, 1, spec.n, &stream.child("input"))?.reads.remove(0);
            let trace = torn_transmit(&seq, spec, &mut stream.child("channel").rng())?;
            let stats = fragment_stats(trace.fragments(), spec.n);
            metrics.insert("fragments".into(), trace.fragments().len() as f64);
            metrics.insert("coverage_long".into(), stats.coverage_long);
            metrics.insert("reorder_cost".into(), stats.reorder_cost);
            metrics.insert("long_fragments".into(), stats.long_fragments as f64);
            true
        }
        Prepared::Rank { b, delta } => {
            let rows = ((1.0 - delta) * *b as f64).round() as usize;
            let rank = BinaryMatrix::random(rows, *b, &mut stream.rng()).rank();
            metrics.insert("rank".into(), rank as f64);
            rank == rows
        }
        Prepared::Edges { p, l, pairs } => {
            let probe = edge_probe(*p, *l, *pairs, &mut stream.rng())?;
            metrics.insert("observed".into(), probe.observed);
            metrics.insert("expected".into(), probe.expected);
            metrics.insert("z".into(), probe.z_score());
            probe.z_score().abs() <= 3.0
        }
    };
    Ok((success, metrics))
}

/// Runs every trial of a trial-based experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let (prep, l, beta) = prepare(cfg, &mut warnings)?;
    let master = cfg.master();
    let records = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let stream = derive_stream(&master, i);
            let started = Instant::now();
            let (success, mut metrics) = run_trial(cfg, &prep, &stream)?;
            if cfg.record_runtime {
                metrics.insert("runtime_ms".into(), started.elapsed().as_secs_f64() * 1e3);
            }
            Ok(TrialRecord { trial: i, seed: stream.fingerprint(), success, metrics })
        })
        .collect::<Result<Vec<_>>>()?;
    let successes = records.iter().filter(|r| r.success).count();
    let (ci_low, ci_high) = wilson_interval(successes, records.len());
    let mut means: BTreeMap<String, f64> = BTreeMap::new();
    for r in &records {
        for (k, v) in &r.metrics {
            *means.entry(k.clone()).or_default() += v / records.len() as f64;
        }
    }
    Ok(RunOutput {
        summary: Summary {
            trials: records.len(),
            successes,
            success_rate: successes as f64 / records.len() as f64,
            ci_low,
            ci_high,
            l,
            beta,
            means,
            warnings,
        },
        records,
    })
}

/// Smallest β at which `condition(β) > 0`, for a condition
/// increasing in β; `∞` if it never turns positive.
pub fn boundary_by_root(condition: impl Fn(f64) -> f64) -> f64 {
    let mut hi = 1.0;
    while condition(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = hi / 2.0;
    while lo > 1e-12 && condition(lo) > 0.0 {
        hi = lo;
        lo /= 2.0;
    }
    if condition(lo) > 0.0 {
        return lo;
    }
    capacity::bisect(lo, hi, 1e-14, condition)
}

fn regime_str(r: Regime) -> Value {
    serde_json::to_value(r).expect("regime serialises")
}

/// A rectangular table of JSON scalars.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

/// JSON number for finite values, null otherwise.
pub fn num(x: f64) -> Value {
    Number::from_f64(x).map_or(Value::Null, Value::Number)
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn from_records(records: &[TrialRecord]) -> Self {
        let mut keys: Vec<String> = records.iter().flat_map(|r| r.metrics.keys().cloned()).collect();
        keys.sort();
        keys.dedup();
        let mut columns = vec!["trial".to_string(), "seed".to_string(), "success".to_string()];
        columns.extend(keys.iter().cloned());
        let rows = records
            .iter()
            .map(|r| {
                let mut row = vec![Value::from(r.trial), Value::from(r.seed), Value::Bool(r.success)];
                row.extend(keys.iter().map(|k| r.metrics.get(k).map_or(Value::Null, |&v| num(v))));
                row
            })
            .collect();
        Table { columns, rows }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell_text))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let columns = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(parse_cell).collect());
        }
        Ok(Table { columns, rows })
    }

    pub fn to_json(&self) -> Result<String> {
        let arr: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Object(self.columns.iter().cloned().zip(row.iter().cloned()).collect::<Map<_, _>>()))
            .collect();
        let mut s = serde_json::to_string_pretty(&arr)?;
        s.push('\n');
        Ok(s)
    }

    /// Column order is taken from the first object.
    pub fn from_json(text: &str) -> Result<Self> {
        let arr: Vec<Map<String, Value>> = serde_json::from_str(text)?;
        let columns: Vec<String> = arr.first().map(|o| o.keys().cloned().collect()).unwrap_or_default();
        let rows = arr
            .iter()
            .map(|o| columns.iter().map(|c| o.get(c).cloned().unwrap_or(Value::Null)).collect())
            .collect();
        Ok(Table { columns, rows })
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn parse_cell(s: &str) -> Value {
    if s.is_empty() {
        return Value::Null;
    }
    if s == "true" || s == "false" {
        return Value::Bool(s == "true");
    }
    if let Ok(u) = s.parse::<u64>() {
        return Value::from(u);
    }
    if let Ok(i) = s.parse::<i64>() {
        return Value::from(i);
    }
    match s.parse::<f64>() {
        Ok(f) if f.is_finite() => num(f),
        _ => Value::String(s.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Parse(format!("unknown format '{s}'"))),
        }
    }
}

/// Writes `table` to `path` in `format`.
pub fn emit(table: &Table, format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, table.render(format)?)?;
    Ok(())
}

/// Evaluates a figure's closed forms on its grid.
pub fn sweep(spec: &SweepSpec) -> Result<Table> {
    match spec.figure {
        Figure::Fig34 => {
            let mut t = Table::new(&["beta", "lambda", "storage_rate", "recovery_rate", "storage_fraction"]);
            for &beta in &spec.beta_grid() {
                for &lambda in &spec.lambda_grid() {
                    let r = capacity::tradeoff_region(lambda, beta);
                    let full = (1.0 - 1.0 / beta).max(0.0);
                    let frac = if full > 0.0 { r.storage / full } else { 0.0 };
                    t.push(vec![num(beta), num(lambda), num(r.storage), num(r.recovery), num(frac)]);
                }
            }
            Ok(t)
        }
        Figure::Fig35 => {
            let mut t = Table::new(&["beta", "torn_geometric", "fixed_length", "fixed_regime"]);
            for &beta in &spec.beta_grid() {
                let torn = capacity::cap_torn(capacity::TornCase::Geometric { beta })?;
                let fixed = capacity::cap_torn(capacity::TornCase::Fixed { beta })?;
                t.push(vec![num(beta), num(torn.rate), num(fixed.rate), regime_str(fixed.regime)]);
            }
            Ok(t)
        }
        Figure::Fig42 => {
            let mut t = Table::new(&[
                "p",
                "beta",
                "cap_bsc",
                "regime",
                "proven_boundary",
                "proven_boundary_closed",
                "positive_boundary",
            ]);
            for &p in &spec.p_grid() {
                let h2p = capacity::binary_entropy((2.0 * p).min(1.0))?;
                let root = boundary_by_root(|b| if p < 0.25 { 1.0 - h2p - 2.0 / b } else { -1.0 });
                let positive = capacity::bsc_positive_boundary(p);
                for &beta in &spec.beta_grid() {
                    let r = capacity::cap_bsc(0.0, p, beta);
                    t.push(vec![
                        num(p),
                        num(beta),
                        num(r.rate),
                        regime_str(r.regime),
                        num(root),
                        num(capacity::bsc_proven_boundary(p)),
                        num(positive),
                    ]);
                }
            }
            Ok(t)
        }
        Figure::Fig54 => {
            let mut t = Table::new(&[
                "p",
                "beta",
                "lambda",
                "cap_multi_bec",
                "regime",
                "blue_boundary",
                "green_boundary",
                "cluster_gamma",
                "index_rate",
            ]);
            for &p in &spec.p_grid() {
                let blue = boundary_by_root(|b| 1.0 - 2.0 * p - 2.0 / b);
                let green = boundary_by_root(|b| capacity::cluster_gamma(p, b) - 1.0);
                for &beta in &spec.beta_grid() {
                    for &lambda in &spec.lambda_grid() {
                        let s = SamplingSpec::Poisson { lambda };
                        let r = capacity::cap_multi_bec(&s, p, beta)?;
                        let idx = capacity::index_rate_multidraw(&s, p, beta, capacity::ChannelKind::Bec)?;
                        t.push(vec![
                            num(p),
                            num(beta),
                            num(lambda),
                            num(r.rate),
                            regime_str(r.regime),
                            num(blue),
                            num(green),
                            num(capacity::cluster_gamma(p, beta)),
                            num(idx),
                        ]);
                    }
                }
            }
            Ok(t)
        }
        Figure::Capacity => {
            let mut t = Table::new(&[
                "p",
                "beta",
                "lambda",
                "noise_free",
                "bsc",
                "bsc_regime",
                "bec",
                "bec_regime",
                "multi_bec",
                "multi_bec_regime",
                "multi_bsc",
                "multi_bsc_regime",
            ]);
            for &p in &spec.p_grid() {
                for &beta in &spec.beta_grid() {
                    for &lambda in &spec.lambda_grid() {
                        let s = SamplingSpec::Poisson { lambda };
                        let q0 = s.q0();
                        let nf = capacity::cap_noise_free(q0, beta);
                        let bsc = capacity::cap_bsc(q0, p, beta);
                        let bec = capacity::cap_bec(q0, p, beta);
                        let mbec = capacity::cap_multi_bec(&s, p, beta)?;
                        let mbsc = capacity::cap_multi_bsc(&s, p, beta)?;
                        t.push(vec![
                            num(p),
                            num(beta),
                            num(lambda),
                            num(nf.rate),
                            num(bsc.rate),
                            regime_str(bsc.regime),
                            num(bec.rate),
                            regime_str(bec.regime),
                            num(mbec.rate),
                            regime_str(mbec.regime),
                            num(mbsc.rate),
                            regime_str(mbsc.regime),
                        ]);
                    }
                }
            }
            Ok(t)
        }
    }
}

/// Result of [`execute`].
#[derive(Clone, Debug, PartialEq)]
pub enum Execution {
    Trials(RunOutput),
    Sweep(Table),
}

impl Execution {
    pub fn table(&self) -> Table {
        match self {
            Execution::Trials(out) => Table::from_records(&out.records),
            Execution::Sweep(t) => t.clone(),
        }
    }
}

/// Runs any experiment kind.
pub fn execute(cfg: &ExperimentConfig) -> Result<Execution> {
    cfg.validate()?;
    match &cfg.experiment {
        Experiment::CapacitySweep(spec) => Ok(Execution::Sweep(sweep(spec)?)),
        Experiment::Tradeoff { lambda, beta } => Ok(Execution::Sweep(sweep(&SweepSpec {
            figure: Figure::Fig34,
            p: Vec::new(),
            beta: beta.clone(),
            lambda: lambda.clone(),
        })?)),
        _ => Ok(Execution::Trials(run(cfg)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codec_cfg(trials: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment: Experiment::CodecTrial(CodecConfig {
                scheme: Scheme::Index,
                outer: None,
                inner: InnerCodeSpec::None,
                rate: Some(0.5),
                field_bits: None,
                b: None,
                num_messages: None,
                epsilon: None,
            }),
            m: Some(64),
            l: None,
            beta: Some(4.0),
            alphabet: Alphabet::Binary,
            sampling: Some(SamplingSpec::SingleDraw { q: 0.1 }),
            noise: None,
            trials,
            seed,
            output: None,
            record_runtime: false,
        }
    }

    #[test]
    fn wilson_basics() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403_831_530_4).abs() < 1e-9 && (hi - 0.596_168_469_6).abs() < 1e-9);
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.2 && hi < 0.4);
    }

    #[test]
    fn length_resolution() {
        assert_eq!(resolve_length(256, None, Some(4.0)).unwrap(), (32, 4.0));
        let (l, b) = resolve_length(100, None, Some(1.5)).unwrap();
        assert_eq!(l, 10);
        assert!((b - 10.0 / 100f64.log2()).abs() < 1e-12);
        assert!(resolve_length(8, Some(9), Some(3.0)).is_err());
        assert!(resolve_length(8, None, None).is_err());
    }

    #[test]
    fn same_seed_same_records() {
        let a = run(&codec_cfg(1, 3)).unwrap();
        let b = run(&codec_cfg(1, 3)).unwrap();
        assert_eq!(a, b);
        let c = run(&codec_cfg(4, 3)).unwrap();
        assert_eq!(c.records[0], a.records[0]);
    }

    #[test]
    fn empty_message_always_succeeds() {
        let mut cfg = codec_cfg(5, 1);
        if let Experiment::CodecTrial(c) = &mut cfg.experiment {
            c.rate = Some(0.0);
        }
        cfg.sampling = Some(SamplingSpec::SingleDraw { q: 0.9 });
        assert_eq!(run(&cfg).unwrap().summary.successes, 5);
    }

    #[test]
    fn infeasible_rate_warns() {
        let mut cfg = codec_cfg(2, 1);
        if let Experiment::CodecTrial(c) = &mut cfg.experiment {
            c.rate = Some(0.74);
        }
        let out = run(&cfg).unwrap();
        assert_eq!(out.summary.warnings.len(), 1);
    }

    #[test]
    fn config_json_roundtrip_and_validation() {
        let cfg = codec_cfg(3, 9);
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let mut bad = cfg.clone();
        bad.schema_version = 99;
        assert!(bad.validate().is_err());
        let mut bad = cfg;
        bad.trials = 0;
        assert!(bad.validate().is_err());
        let raw = r#"{"schema_version":1,"experiment":{"kind":"probe","probe":"rank","b":8},"trials":3,"seed":1}"#;
        let cfg: ExperimentConfig = serde_json::from_str(raw).unwrap();
        assert_eq!(run(&cfg).unwrap().records.len(), 3);
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::from_records(&[]);
        assert_eq!(t.to_csv().unwrap(), "trial,seed,success\r\n");
    }

    #[test]
    fn json_csv_json_roundtrip() {
        let out = run(&codec_cfg(6, 2)).unwrap();
        let t = Table::from_records(&out.records);
        let json = t.to_json().unwrap();
        let via_csv = Table::from_csv(&Table::from_json(&json).unwrap().to_csv().unwrap()).unwrap();
        assert_eq!(via_csv.to_json().unwrap(), json);
        assert!(json.is_ascii() && t.to_csv().unwrap().is_ascii());
        let mut q = Table::new(&["name", "x"]);
        q.push(vec![Value::String("a,\"b\"".into()), num(0.1)]);
        assert_eq!(Table::from_csv(&q.to_csv().unwrap()).unwrap(), q);
    }

    #[test]
    fn fig35_dominance() {
        let t = sweep(&SweepSpec::new(Figure::Fig35)).unwrap();
        let torn = t.column("torn_geometric").unwrap();
        let fixed = t.column("fixed_length").unwrap();
        assert_eq!(torn.len(), 50);
        for (a, b) in torn.iter().zip(&fixed) {
            assert!(a.as_f64().unwrap() >= b.as_f64().unwrap());
        }
    }

    #[test]
    fn figure_boundaries() {
        let t = sweep(&SweepSpec { p: vec![0.01], beta: vec![3.0], ..SweepSpec::new(Figure::Fig42) }).unwrap();
        let root = t.column("proven_boundary").unwrap()[0].as_f64().unwrap();
        assert!((root - 2.329_483_395).abs() < 1e-6, "{root}");
        assert!(root <= 2.35);
        let t = sweep(&SweepSpec { p: vec![0.1], beta: vec![3.0], lambda: vec![2.0], ..SweepSpec::new(Figure::Fig54) })
            .unwrap();
        let blue = t.column("blue_boundary").unwrap()[0].as_f64().unwrap();
        let green = t.column("green_boundary").unwrap()[0].as_f64().unwrap();
        assert!((blue - 2.5).abs() < 1e-6 && (green - 1.335_045).abs() < 1e-6, "{blue} {green}");
        for p in [0.0, 0.05, 0.2, 0.3] {
            let closed = capacity::cluster_gamma_boundary(p);
            let root = boundary_by_root(|b| capacity::cluster_gamma(p, b) - 1.0);
            assert!((closed - root).abs() < 1e-6);
        }
    }

    #[test]
    fn capacity_sweep_shape() {
        let t = sweep(&SweepSpec::new(Figure::Capacity)).unwrap();
        assert_eq!(t.rows.len(), 8 * 8 * 5);
        let t = sweep(&SweepSpec::new(Figure::Fig34)).unwrap();
        assert_eq!(t.columns[2], "storage_rate");
    }
}
