//! The noisy shuffling-sampling channel (sample, shuffle, corrupt) and the
//! torn-paper channel (tear, delete, shuffle).

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{DrawCounts, SamplingSpec};
use crate::seqcore::{Alphabet, ReadPool, Sequence};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Identity,
    /// Binary symmetric channel.
    Bsc { p: f64 },
    /// Erasure channel; erased symbols become `?`.
    Bec { p: f64 },
    /// Quaternary symmetric channel: with probability `p` a symbol is replaced
    /// by one of the three others, chosen uniformly.
    Qsc { p: f64 },
    /// Per-position insertion/deletion/substitution model. Before every source
    /// position (and once at the end) uniform symbols are inserted while a
    /// `p_ins` coin succeeds; each source symbol is then deleted with
    /// probability `p_del`, otherwise substituted with probability
    /// `p_sub / (1 - p_del)`.
    IndelSub { p_ins: f64, p_del: f64, p_sub: f64 },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let ok = match *self {
            NoiseSpec::Identity => true,
            NoiseSpec::Bsc { p } | NoiseSpec::Bec { p } | NoiseSpec::Qsc { p } => unit(p),
            NoiseSpec::IndelSub { p_ins, p_del, p_sub } => {
                unit(p_ins) && unit(p_del) && unit(p_sub) && p_ins < 1.0 && p_ins + p_del + p_sub <= 1.0 + 1e-12
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid noise parameters {self:?}")))
        }
    }

    /// True when every output read keeps the input length.
    pub fn preserves_length(&self) -> bool {
        !matches!(self, NoiseSpec::IndelSub { .. })
    }
}

impl FromStr for NoiseSpec {
    type Err = Error;

    /// `id`, `bsc:0.05`, `bec:0.1`, `qsc:0.03`, `indel:p_ins,p_del,p_sub`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = args
            .split(',')
            .filter(|a| !a.trim().is_empty())
            .map(|a| a.trim().parse::<f64>().map_err(|e| Error::Parse(format!("'{a}' in '{s}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let want = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("'{s}' expects {n} parameter(s)")))
            }
        };
        let spec = match kind.to_ascii_lowercase().as_str() {
            "id" | "identity" | "none" => NoiseSpec::Identity,
            "bsc" => {
                want(1)?;
                NoiseSpec::Bsc { p: nums[0] }
            }
            "bec" => {
                want(1)?;
                NoiseSpec::Bec { p: nums[0] }
            }
            "qsc" => {
                want(1)?;
                NoiseSpec::Qsc { p: nums[0] }
            }
            "indel" | "indelsub" => {
                want(3)?;
                NoiseSpec::IndelSub { p_ins: nums[0], p_del: nums[1], p_sub: nums[2] }
            }
            other => return Err(Error::Parse(format!("unknown noise model '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn other_symbol<R: Rng + ?Sized>(alphabet: Alphabet, s: u8, rng: &mut R) -> u8 {
    let size = alphabet.size() as u8;
    let shift = rng.random_range(1..size);
    (s + shift) % size
}

/// Passes one read through the per-symbol noise channel.
pub fn apply_noise<R: Rng + ?Sized>(seq: &Sequence, spec: &NoiseSpec, rng: &mut R) -> Result<Sequence> {
    spec.validate()?;
    if seq.has_erasure() {
        return Err(Error::Contract("noise input contains erasures".into()));
    }
    let alphabet = seq.alphabet();
    let symbols = seq.symbols();
    let out = match *spec {
        NoiseSpec::Identity => symbols.to_vec(),
        NoiseSpec::Bsc { p } => {
            if alphabet != Alphabet::Binary {
                return Err(Error::AlphabetMismatch("BSC requires a binary alphabet".into()));
            }
            symbols.iter().map(|&s| if rng.random_bool(p) { s ^ 1 } else { s }).collect()
        }
        NoiseSpec::Bec { p } => {
            let e = alphabet.erasure();
            symbols.iter().map(|&s| if rng.random_bool(p) { e } else { s }).collect()
        }
        NoiseSpec::Qsc { p } => {
            if alphabet != Alphabet::Quaternary {
                return Err(Error::AlphabetMismatch("QSC requires a quaternary alphabet".into()));
            }
            symbols
                .iter()
                .map(|&s| if rng.random_bool(p) { other_symbol(alphabet, s, rng) } else { s })
                .collect()
        }
        NoiseSpec::IndelSub { p_ins, p_del, p_sub } => {
            let size = alphabet.size() as u8;
            let sub_given_kept = if p_del < 1.0 { (p_sub / (1.0 - p_del)).min(1.0) } else { 0.0 };
            let mut out = Vec::with_capacity(symbols.len() + 4);
            let insert_burst = |out: &mut Vec<u8>, rng: &mut R| {
                while rng.random_bool(p_ins) {
                    out.push(rng.random_range(0..size));
                }
            };
            for &s in symbols {
                insert_burst(&mut out, rng);
                if rng.random_bool(p_del) {
                    continue;
                }
                if rng.random_bool(sub_given_kept) {
                    out.push(other_symbol(alphabet, s, rng));
                } else {
                    out.push(s);
                }
            }
            insert_burst(&mut out, rng);
            out
        }
    };
    Ok(Sequence::from_raw(alphabet, out))
}

/// Everything that happened in one channel use. The origin map is kept for
/// evaluation only; decoders never read it.
#[derive(Clone, Debug)]
pub struct ChannelTrace {
    pub input: ReadPool,
    pub counts: DrawCounts,
    /// `permutation[j]` is the position, in the pre-shuffle copy list, of the
    /// copy that ended up at output slot `j`.
    pub permutation: Vec<usize>,
    pub output: ReadPool,
    /// `origin[j]` is the input index that produced output read `j`.
    pub origin: Vec<usize>,
}

/// Sample, shuffle, then corrupt every drawn copy independently.
pub fn transmit<R: Rng + ?Sized>(
    pool: &ReadPool,
    sampling: &SamplingSpec<f64>,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<ChannelTrace> {
    pool.validate()?;
    pool.check_input()?;
    noise.validate()?;
    let counts = sampling.sample_counts(pool.len(), rng)?;
    let copies: Vec<usize> = counts
        .counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize))
        .collect();
    let mut permutation: Vec<usize> = (0..copies.len()).collect();
    permutation.shuffle(rng);
    let origin: Vec<usize> = permutation.iter().map(|&k| copies[k]).collect();
    let reads = origin
        .iter()
        .map(|&i| apply_noise(&pool.reads[i], noise, rng))
        .collect::<Result<Vec<_>>>()?;
    let output = ReadPool {
        alphabet: pool.alphabet,
        reads,
        ordered: false,
        fixed_length: noise.preserves_length(),
    };
    Ok(ChannelTrace { input: pool.clone(), counts, permutation, output, origin })
}

/// Fragment-length law of the torn-paper channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TornLength {
    /// Independent tear between consecutive symbols with probability `p`.
    Geometric { p: f64 },
    Fixed { len: usize },
    /// Lengths uniform on `1..=floor(gamma * log2 n)`.
    Uniform { gamma: f64 },
}

/// Asymptotic deletion profile `d̂(ξ)`; a fragment of length `ℓ` is deleted
/// with probability `min(1, d̂(ℓ / log2 n) / log2 n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeletionProfile {
    Zero,
    Const { eps: f64 },
    Exp { gamma: f64 },
}

impl DeletionProfile {
    pub fn profile(&self, xi: f64) -> f64 {
        match *self {
            DeletionProfile::Zero => 0.0,
            DeletionProfile::Const { eps } => eps,
            DeletionProfile::Exp { gamma } => (-gamma * xi).exp(),
        }
    }

    /// Finite-`n` deletion probability of a fragment of length `len`.
    pub fn deletion_probability(&self, len: usize, n: usize) -> f64 {
        let log_n = log2_len(n);
        (self.profile(len as f64 / log_n) / log_n).clamp(0.0, 1.0)
    }
}

fn log2_len(n: usize) -> f64 {
    (n as f64).log2().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TornSpec {
    pub length: TornLength,
    pub deletion: DeletionProfile,
    /// Input length.
    pub n: usize,
}

impl TornSpec {
    pub fn validate(&self) -> Result<()> {
        match self.length {
            TornLength::Geometric { p } if !(0.0..=1.0).contains(&p) => {
                return Err(Error::Domain(format!("tearing probability {p} outside [0,1]")))
            }
            TornLength::Fixed { len: 0 } => return Err(Error::Domain("fixed fragment length must be >= 1".into())),
            TornLength::Uniform { gamma } if gamma < 1.0 => {
                return Err(Error::Domain(format!("uniform tearing needs gamma >= 1, got {gamma}")))
            }
            _ => {}
        }
        match self.deletion {
            DeletionProfile::Const { eps } if eps < 0.0 => Err(Error::Domain("negative deletion profile".into())),
            DeletionProfile::Exp { gamma } if gamma < 0.0 => Err(Error::Domain("negative decay rate".into())),
            _ => Ok(()),
        }
    }

    /// Parses `geom:0.01`, `fixed:20`, `unif:2`, optionally followed by
    /// `,del=const:0.2` or `,del=exp:1.5`. The input length is supplied separately.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let (len_part, del_part) = match s.split_once(",del=") {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let (kind, arg) = len_part
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("torn spec '{s}' needs kind:value")))?;
        let num = |a: &str| a.trim().parse::<f64>().map_err(|e| Error::Parse(format!("'{a}' in '{s}': {e}")));
        let length = match kind {
            "geom" | "geometric" => TornLength::Geometric { p: num(arg)? },
            "fixed" => TornLength::Fixed {
                len: arg.trim().parse().map_err(|e| Error::Parse(format!("'{arg}': {e}")))?,
            },
            "unif" | "uniform" => TornLength::Uniform { gamma: num(arg)? },
            other => return Err(Error::Parse(format!("unknown tearing law '{other}'"))),
        };
        let deletion = match del_part {
            None | Some("zero") | Some("0") => DeletionProfile::Zero,
            Some(d) => match d.split_once(':') {
                Some(("const", v)) => DeletionProfile::Const { eps: num(v)? },
                Some(("exp", v)) => DeletionProfile::Exp { gamma: num(v)? },
                _ => return Err(Error::Parse(format!("unknown deletion profile '{d}'"))),
            },
        };
        let spec = TornSpec { length, deletion, n };
        spec.validate()?;
        Ok(spec)
    }
}

/// Result of tearing one long sequence.
#[derive(Clone, Debug)]
pub struct TornTrace {
    /// All pieces in ground-truth order, before deletion.
    pub pieces: Vec<Sequence>,
    /// Start offset of each piece in the input.
    pub starts: Vec<usize>,
    pub deleted: Vec<bool>,
    /// Surviving pieces in shuffled order.
    pub output: ReadPool,
    /// `origin[j]` indexes `pieces` for output fragment `j`.
    pub origin: Vec<usize>,
}

impl TornTrace {
    pub fn fragments(&self) -> &[Sequence] {
        &self.output.reads
    }
}

fn piece_lengths<R: Rng + ?Sized>(spec: &TornSpec, rng: &mut R) -> Vec<usize> {
    let n = spec.n;
    let mut lengths = Vec::new();
    let mut covered = 0usize;
    match spec.length {
        TornLength::Geometric { p } => {
            if p <= 0.0 {
                return vec![n];
            }
            if p >= 1.0 {
                return vec![1; n];
            }
            let gaps = Geometric::new(p).expect("p in (0,1)");
            while covered < n {
                // failures before the first tear, plus the symbol ending the piece
                let len = (gaps.sample(rng) as usize).saturating_add(1).min(n - covered);
                lengths.push(len);
                covered += len;
            }
        }
        TornLength::Fixed { len } => {
            while covered < n {
                let l = len.min(n - covered);
                lengths.push(l);
                covered += l;
            }
        }
        TornLength::Uniform { gamma } => {
            let max = ((gamma * log2_len(n)).floor() as usize).max(1);
            while covered < n {
                let l = rng.random_range(1..=max).min(n - covered);
                lengths.push(l);
                covered += l;
            }
        }
    }
    lengths
}

/// Tears `seq` into pieces, deletes pieces by the length-dependent profile and
/// shuffles the survivors.
pub fn torn_transmit<R: Rng + ?Sized>(seq: &Sequence, spec: &TornSpec, rng: &mut R) -> Result<TornTrace> {
    spec.validate()?;
    if seq.len() != spec.n {
        return Err(Error::LengthMismatch { expected: spec.n, got: seq.len() });
    }
    if seq.is_empty() {
        return Err(Error::Domain("torn-paper input must be non-empty".into()));
    }
    let lengths = piece_lengths(spec, rng);
    let mut pieces = Vec::with_capacity(lengths.len());
    let mut starts = Vec::with_capacity(lengths.len());
    let mut deleted = Vec::with_capacity(lengths.len());
    let mut at = 0;
    for len in lengths {
        starts.push(at);
        pieces.push(Sequence::from_raw(seq.alphabet(), seq.symbols()[at..at + len].to_vec()));
        let d = spec.deletion.deletion_probability(len, spec.n);
        deleted.push(d > 0.0 && rng.random_bool(d));
        at += len;
    }
    let mut origin: Vec<usize> = (0..pieces.len()).filter(|&i| !deleted[i]).collect();
    origin.shuffle(rng);
    let reads = origin.iter().map(|&i| pieces[i].clone()).collect();
    let output = ReadPool { alphabet: seq.alphabet(), reads, ordered: false, fixed_length: false };
    Ok(TornTrace { pieces, starts, deleted, output, origin })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FragmentStats {
    /// Fraction of the input covered by surviving fragments of length >= log2 n.
    pub coverage_long: f64,
    /// `K log2 K / n` for the `K` such fragments: index bits needed to reorder them.
    pub reorder_cost: f64,
    pub long_fragments: usize,
}

pub fn fragment_stats(fragments: &[Sequence], n: usize) -> FragmentStats {
    let threshold = (n as f64).log2();
    let long: Vec<usize> = fragments.iter().map(Sequence::len).filter(|&l| l as f64 >= threshold).collect();
    let k = long.len();
    let coverage_long = long.iter().sum::<usize>() as f64 / n as f64;
    let reorder_cost = if k > 1 { k as f64 * (k as f64).log2() / n as f64 } else { 0.0 };
    FragmentStats { coverage_long, reorder_cost, long_fragments: k }
}
