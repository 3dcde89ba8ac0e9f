//! Read clustering and trace reconstruction.
//!
//! Reads are shingled into k-mers, summarised by MinHash signatures, paired
//! by LSH banding, confirmed by banded alignment, and joined into connected
//! components. Each component is reduced to one sequence by alignment and
//! plurality voting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{transmit, NoiseSpec};
use crate::error::{Error, Result};
use crate::sampling::SamplingSpec;
use crate::seqcore::{Alphabet, RandomStream, ReadPool, Sequence};

/// Symbol-wise mask shared by every sequence position `i`, derived from `seed`.
fn mask(alphabet: Alphabet, len: usize, seed: u64) -> Vec<u8> {
    let mut rng = RandomStream::new(seed, "randomize-mask").rng();
    let size = alphabet.size() as u8;
    (0..len).map(|_| rng.random_range(0..size)).collect()
}

fn apply_mask(pool: &ReadPool, seed: u64, forward: bool) -> Result<ReadPool> {
    pool.validate()?;
    let alphabet = pool.alphabet;
    let size = alphabet.size() as u8;
    let longest = pool.reads.iter().map(Sequence::len).max().unwrap_or(0);
    let m = mask(alphabet, longest, seed);
    let reads = pool
        .reads
        .iter()
        .map(|r| {
            let symbols = r
                .symbols()
                .iter()
                .zip(&m)
                .map(|(&s, &k)| {
                    if !alphabet.is_data(s) {
                        s
                    } else if forward {
                        (s + k) % size
                    } else {
                        (s + size - k) % size
                    }
                })
                .collect();
            Sequence::new(alphabet, symbols)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReadPool { reads, ..pool.clone() })
}

/// Adds a seed-derived pseudorandom mask position-wise, modulo the alphabet
/// size. Erasures pass through.
pub fn randomize(pool: &ReadPool, seed: u64) -> Result<ReadPool> {
    apply_mask(pool, seed, true)
}

pub fn derandomize(pool: &ReadPool, seed: u64) -> Result<ReadPool> {
    apply_mask(pool, seed, false)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShingleSet {
    pub k: usize,
    /// k-mers packed in base `alphabet size + 1`, erasures included.
    pub kmers: BTreeSet<u64>,
}

impl ShingleSet {
    pub fn jaccard(&self, other: &ShingleSet) -> f64 {
        let union = self.kmers.union(&other.kmers).count();
        if union == 0 {
            return 1.0;
        }
        self.kmers.intersection(&other.kmers).count() as f64 / union as f64
    }
}

/// Longest k-mer that packs into a `u64` for this alphabet.
pub fn max_k(alphabet: Alphabet) -> usize {
    let base = (alphabet.size() + 1) as f64;
    (64.0 / base.log2()).floor() as usize
}

pub fn kmer_shingles(seq: &Sequence, k: usize) -> Result<ShingleSet> {
    if k == 0 || k > max_k(seq.alphabet()) {
        return Err(Error::Domain(format!("k={k} outside 1..={}", max_k(seq.alphabet()))));
    }
    let base = seq.alphabet().size() as u64 + 1;
    let kmers = seq
        .symbols()
        .windows(k)
        .map(|w| w.iter().fold(0u64, |acc, &s| acc * base + s as u64))
        .collect();
    Ok(ShingleSet { k, kmers })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MinHashSignature {
    pub values: Vec<u64>,
    /// Signature of an empty shingle set; never paired.
    pub empty: bool,
}

impl MinHashSignature {
    pub fn agreement(&self, other: &MinHashSignature) -> f64 {
        let same = self.values.iter().zip(&other.values).filter(|(a, b)| a == b).count();
        same as f64 / self.values.len().max(1) as f64
    }
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The `i`-th member of the seeded hash family.
#[inline]
fn family_hash(seed: u64, i: usize, x: u64) -> u64 {
    let salt = mix64(seed ^ (i as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    mix64(x.wrapping_add(salt) ^ salt.rotate_left(29))
}

pub fn minhash(shingles: &ShingleSet, h: usize, seed: u64) -> MinHashSignature {
    if shingles.kmers.is_empty() {
        return MinHashSignature { values: vec![u64::MAX; h], empty: true };
    }
    let values = (0..h)
        .map(|i| shingles.kmers.iter().map(|&x| family_hash(seed, i, x)).min().expect("non-empty"))
        .collect();
    MinHashSignature { values, empty: false }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LshParams {
    pub k: usize,
    pub h: usize,
    pub bands: usize,
    pub rows: usize,
    /// Alignment band half-width.
    pub band_width: usize,
    /// Minimum matched-symbol fraction for a pair to survive filtering.
    pub tau: f64,
    pub seed: u64,
}

impl LshParams {
    /// Two rows per band: reads of one origin at a few percent substitution
    /// noise have k-mer Jaccard near 0.45, which 8-row bands almost never catch.
    pub fn defaults(alphabet: Alphabet) -> Self {
        LshParams {
            k: if alphabet == Alphabet::Quaternary { 8 } else { 12 },
            h: 128,
            bands: 64,
            rows: 2,
            band_width: 8,
            tau: 0.75,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands * self.rows != self.h || self.h == 0 {
            return Err(Error::Domain(format!("bands*rows = {}*{} must equal h = {}", self.bands, self.rows, self.h)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::Domain(format!("tau {} outside (0,1]", self.tau)));
        }
        if self.k == 0 {
            return Err(Error::Domain("k must be positive".into()));
        }
        Ok(())
    }
}

/// Pairs `(i, j)`, `i < j`, agreeing exactly on at least one band; sorted.
pub fn lsh_pairs(signatures: &[MinHashSignature], params: &LshParams) -> Result<Vec<(usize, usize)>> {
    params.validate()?;
    if let Some(s) = signatures.iter().find(|s| s.values.len() != params.h) {
        return Err(Error::LengthMismatch { expected: params.h, got: s.values.len() });
    }
    let mut pairs = BTreeSet::new();
    for band in 0..params.bands {
        let range = band * params.rows..(band + 1) * params.rows;
        let mut buckets: BTreeMap<&[u64], Vec<usize>> = BTreeMap::new();
        for (i, s) in signatures.iter().enumerate() {
            if !s.empty {
                buckets.entry(&s.values[range.clone()]).or_default().push(i);
            }
        }
        for members in buckets.values() {
            for (x, &a) in members.iter().enumerate() {
                for &b in &members[x + 1..] {
                    pairs.insert((a, b));
                }
            }
        }
    }
    Ok(pairs.into_iter().collect())
}

/// Result of a banded global alignment of `a` against `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alignment {
    pub distance: usize,
    pub matches: usize,
    /// For each position of `b`, the aligned position of `a` (`None` if `b`'s
    /// symbol is an insertion relative to `a`).
    pub b_to_a: Vec<Option<usize>>,
    /// For each position of `a`, the aligned position of `b` (`None` if
    /// deleted in `b`).
    pub a_to_b: Vec<Option<usize>>,
}

impl Alignment {
    pub fn match_fraction(&self, len_a: usize, len_b: usize) -> f64 {
        let denom = len_a.max(len_b);
        if denom == 0 { 1.0 } else { self.matches as f64 / denom as f64 }
    }
}

/// Unit-cost edit alignment restricted to `|i - j| ≤ max(w, |len a - len b|)`.
/// Erased symbols never match.
pub fn banded_align(a: &[u8], b: &[u8], w: usize, erasure: u8) -> Alignment {
    let (n, m) = (a.len(), b.len());
    let band = w.max(n.abs_diff(m));
    const INF: u32 = u32::MAX / 2;
    let width = m + 1;
    let mut d = vec![INF; (n + 1) * width];
    let idx = |i: usize, j: usize| i * width + j;
    let same = |i: usize, j: usize| a[i] == b[j] && a[i] != erasure;
    for i in 0..=n {
        let lo = i.saturating_sub(band);
        let hi = (i + band).min(m);
        for j in lo..=hi {
            let v = if i == 0 {
                j as u32
            } else if j == 0 {
                i as u32
            } else {
                let diag = d[idx(i - 1, j - 1)] + u32::from(!same(i - 1, j - 1));
                diag.min(d[idx(i - 1, j)] + 1).min(d[idx(i, j - 1)] + 1)
            };
            d[idx(i, j)] = v;
        }
    }
    let (mut i, mut j) = (n, m);
    let mut matches = 0;
    let mut a_to_b = vec![None; n];
    let mut b_to_a = vec![None; m];
    while i > 0 || j > 0 {
        let here = d[idx(i, j)];
        if i > 0 && j > 0 && here == d[idx(i - 1, j - 1)] + u32::from(!same(i - 1, j - 1)) {
            if same(i - 1, j - 1) {
                matches += 1;
            }
            a_to_b[i - 1] = Some(j - 1);
            b_to_a[j - 1] = Some(i - 1);
            i -= 1;
            j -= 1;
        } else if i > 0 && here == d[idx(i - 1, j)] + 1 {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    Alignment { distance: d[idx(n, m)] as usize, matches, a_to_b, b_to_a }
}

/// Keeps pairs whose banded alignment matches at least `τ` of the longer read.
pub fn filter_pairs(pairs: &[(usize, usize)], reads: &[Sequence], params: &LshParams) -> Result<Vec<(usize, usize)>> {
    params.validate()?;
    let mut kept = Vec::new();
    for &(a, b) in pairs {
        let (ra, rb) = match (reads.get(a), reads.get(b)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(Error::Domain(format!("pair ({a}, {b}) out of range"))),
        };
        let al = banded_align(ra.symbols(), rb.symbols(), params.band_width, ra.alphabet().erasure());
        if al.match_fraction(ra.len(), rb.len()) >= params.tau {
            kept.push((a, b));
        }
    }
    Ok(kept)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Cluster id per read, contiguous from 0 in order of first appearance.
    pub ids: Vec<usize>,
    pub count: usize,
}

impl ClusterAssignment {
    /// Read indices of every cluster, in id order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (r, &c) in self.ids.iter().enumerate() {
            out[c].push(r);
        }
        out
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Connected components of the pair graph.
pub fn pairs_to_clusters(pairs: &[(usize, usize)], n: usize) -> Result<ClusterAssignment> {
    let mut parent: Vec<usize> = (0..n).collect();
    for &(a, b) in pairs {
        if a >= n || b >= n {
            return Err(Error::Domain(format!("pair ({a}, {b}) out of range for {n} reads")));
        }
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut label = BTreeMap::new();
    let mut ids = Vec::with_capacity(n);
    for x in 0..n {
        let root = find(&mut parent, x);
        let next = label.len();
        ids.push(*label.entry(root).or_insert(next));
    }
    Ok(ClusterAssignment { ids, count: label.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconstructMode {
    Substitution,
    Indel,
}

impl FromStr for ReconstructMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sub" | "substitution" => Ok(ReconstructMode::Substitution),
            "indel" => Ok(ReconstructMode::Indel),
            _ => Err(Error::Parse(format!("unknown reconstruction mode '{s}'"))),
        }
    }
}

impl fmt::Display for ReconstructMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReconstructMode::Substitution => "sub",
            ReconstructMode::Indel => "indel",
        })
    }
}

/// Plurality over `votes[symbol]`; ties go to the smallest symbol. `None`
/// when nothing was voted.
fn plurality(votes: &[usize]) -> Option<usize> {
    let best = *votes.iter().max()?;
    (best > 0).then(|| votes.iter().position(|&v| v == best).expect("max exists"))
}

pub fn reconstruct(cluster: &[Sequence], alphabet: Alphabet, mode: ReconstructMode) -> Result<Sequence> {
    if cluster.is_empty() {
        return Err(Error::Contract("cannot reconstruct an empty cluster".into()));
    }
    if let Some(r) = cluster.iter().find(|r| r.alphabet() != alphabet) {
        return Err(Error::AlphabetMismatch(format!("read over {:?}, expected {alphabet:?}", r.alphabet())));
    }
    let size = alphabet.size();
    let er = alphabet.erasure();
    match mode {
        ReconstructMode::Substitution => {
            // modal length, ties to the shorter
            let mut lengths: BTreeMap<usize, usize> = BTreeMap::new();
            for r in cluster {
                *lengths.entry(r.len()).or_default() += 1;
            }
            let top = *lengths.values().max().expect("non-empty");
            let len = *lengths.iter().find(|(_, &c)| c == top).expect("modal").0;
            let symbols = (0..len)
                .map(|i| {
                    let mut votes = vec![0; size];
                    for r in cluster.iter().filter(|r| r.len() > i && !r.is_erased(i)) {
                        votes[r.symbols()[i] as usize] += 1;
                    }
                    plurality(&votes).map_or(er, |s| s as u8)
                })
                .collect();
            Sequence::new(alphabet, symbols)
        }
        ReconstructMode::Indel => {
            let mut order: Vec<&Sequence> = cluster.iter().collect();
            order.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            let pivot = order[(order.len() - 1) / 2];
            // votes per pivot column; the last slot counts gaps
            let mut votes = vec![vec![0usize; size + 1]; pivot.len()];
            for r in &order {
                let al = banded_align(pivot.symbols(), r.symbols(), DEFAULT_BAND, er);
                for (c, slot) in al.a_to_b.iter().enumerate() {
                    match slot {
                        Some(j) if !r.is_erased(*j) => votes[c][r.symbols()[*j] as usize] += 1,
                        Some(_) => {}
                        None => votes[c][size] += 1,
                    }
                }
            }
            let symbols = votes
                .iter()
                .filter_map(|v| {
                    let best = *v.iter().max().expect("non-empty");
                    let sym = v[..size].iter().position(|&x| x == best);
                    match sym {
                        Some(s) if best > 0 => Some(s as u8),
                        // gap wins outright
                        _ if v[size] == best && best > 0 => None,
                        _ => Some(er),
                    }
                })
                .collect();
            Sequence::new(alphabet, symbols)
        }
    }
}

/// Alignment band used by indel-mode reconstruction.
pub const DEFAULT_BAND: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterScore {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
}

fn pairs_of(n: usize) -> u64 {
    (n as u64) * (n as u64).saturating_sub(1) / 2
}

/// Pairwise precision and recall over co-clustered read pairs (an empty
/// pair set scores 1), and accuracy: for every origin, the reads of that
/// origin in the largest cluster it holds the majority of, summed and
/// divided by the read count.
pub fn score_clustering(assignment: &ClusterAssignment, truth: &[usize]) -> Result<ClusterScore> {
    let n = assignment.ids.len();
    if truth.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: truth.len() });
    }
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut by_cluster: BTreeMap<usize, usize> = BTreeMap::new();
    let mut by_origin: BTreeMap<usize, usize> = BTreeMap::new();
    for (&c, &o) in assignment.ids.iter().zip(truth) {
        *joint.entry((c, o)).or_default() += 1;
        *by_cluster.entry(c).or_default() += 1;
        *by_origin.entry(o).or_default() += 1;
    }
    let both: u64 = joint.values().map(|&x| pairs_of(x)).sum();
    let predicted: u64 = by_cluster.values().map(|&x| pairs_of(x)).sum();
    let actual: u64 = by_origin.values().map(|&x| pairs_of(x)).sum();
    let ratio = |num: u64, den: u64| if den == 0 { 1.0 } else { num as f64 / den as f64 };

    // majority origin of each cluster (ties to the smaller origin id)
    let mut majority: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (&(c, o), &x) in &joint {
        let e = majority.entry(c).or_insert((o, x));
        if x > e.1 {
            *e = (o, x);
        }
    }
    let mut best_per_origin: BTreeMap<usize, usize> = BTreeMap::new();
    for &(o, x) in majority.values() {
        let e = best_per_origin.entry(o).or_default();
        *e = (*e).max(x);
    }
    let correct: usize = best_per_origin.values().sum();
    Ok(ClusterScore {
        precision: ratio(both, predicted),
        recall: ratio(both, actual),
        accuracy: if n == 0 { 1.0 } else { correct as f64 / n as f64 },
    })
}

/// Shingle, sign, pair, filter and join `reads`.
pub fn cluster_reads(reads: &[Sequence], params: &LshParams) -> Result<ClusterAssignment> {
    params.validate()?;
    let signatures = reads
        .iter()
        .map(|r| Ok(minhash(&kmer_shingles(r, params.k)?, params.h, params.seed)))
        .collect::<Result<Vec<_>>>()?;
    let candidates = lsh_pairs(&signatures, params)?;
    let kept = filter_pairs(&candidates, reads, params)?;
    pairs_to_clusters(&kept, reads.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub reads: usize,
    pub clusters: usize,
    pub score: ClusterScore,
    /// Clusters whose reconstruction equals the input of their majority origin.
    pub exact_clusters: usize,
    /// Inputs reproduced exactly by at least one cluster.
    pub recovered_inputs: usize,
    pub inputs: usize,
}

impl PipelineReport {
    pub fn exact_fraction(&self) -> f64 {
        if self.clusters == 0 { 0.0 } else { self.exact_clusters as f64 / self.clusters as f64 }
    }

    pub fn recovered_fraction(&self) -> f64 {
        if self.inputs == 0 { 1.0 } else { self.recovered_inputs as f64 / self.inputs as f64 }
    }
}

/// Randomize, transmit, cluster, reconstruct and derandomize `inputs`,
/// scoring against the channel's origin map.
pub fn run_pipeline(
    inputs: &ReadPool,
    sampling: &SamplingSpec<f64>,
    noise: &NoiseSpec,
    params: &LshParams,
    mode: ReconstructMode,
    stream: &RandomStream,
) -> Result<PipelineReport> {
    let mask_seed = stream.child("mask").fingerprint();
    let randomized = randomize(inputs, mask_seed)?;
    let trace = transmit(&randomized, sampling, noise, &mut stream.child("channel").rng())?;
    let reads = &trace.output.reads;
    let assignment = cluster_reads(reads, params)?;
    let score = score_clustering(&assignment, &trace.origin)?;
    let members = assignment.members();
    let recon = members
        .iter()
        .map(|idx| reconstruct(&idx.iter().map(|&i| reads[i].clone()).collect::<Vec<_>>(), inputs.alphabet, mode))
        .collect::<Result<Vec<_>>>()?;
    let recon_pool = ReadPool { alphabet: inputs.alphabet, reads: recon, ordered: false, fixed_length: false };
    let restored = derandomize(&recon_pool, mask_seed)?;
    let mut exact = 0;
    let mut recovered = BTreeSet::new();
    for (idx, seq) in members.iter().zip(&restored.reads) {
        let mut tally: BTreeMap<usize, usize> = BTreeMap::new();
        for &i in idx {
            *tally.entry(trace.origin[i]).or_default() += 1;
        }
        let top = *tally.values().max().expect("non-empty cluster");
        let origin = *tally.iter().find(|(_, &c)| c == top).expect("max").0;
        if *seq == inputs.reads[origin] {
            exact += 1;
        }
        if let Some(pos) = inputs.reads.iter().position(|x| x == seq) {
            recovered.insert(pos);
        }
    }
    Ok(PipelineReport {
        reads: reads.len(),
        clusters: assignment.count,
        score,
        exact_clusters: exact,
        recovered_inputs: recovered.len(),
        inputs: inputs.len(),
    })
}

#[cfg(test)]
mod tests {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    use super::*;
    use crate::channel::apply_noise;

    fn dna(s: &str) -> Sequence {
        Sequence::parse(Alphabet::Quaternary, s).unwrap()
    }

    fn random_seq<R: Rng>(alphabet: Alphabet, len: usize, rng: &mut R) -> Sequence {
        let size = alphabet.size() as u8;
        Sequence::new(alphabet, (0..len).map(|_| rng.random_range(0..size)).collect()).unwrap()
    }

    #[test]
    fn randomize_roundtrip_and_mask() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
        for t in 0..1000 {
            let alphabet = if t % 2 == 0 { Alphabet::Binary } else { Alphabet::Quaternary };
            let reads = (0..3).map(|_| random_seq(alphabet, 12, &mut rng)).collect();
            let pool = ReadPool::fixed(alphabet, reads).unwrap();
            let back = derandomize(&randomize(&pool, t).unwrap(), t).unwrap();
            assert_eq!(back, pool);
        }
        let zero = ReadPool::fixed(Alphabet::Quaternary, vec![dna("AAAAAAAA")]).unwrap();
        let r = randomize(&zero, 42).unwrap();
        assert_eq!(r.reads[0].symbols(), &mask(Alphabet::Quaternary, 8, 42)[..]);
        let er = ReadPool::variable(Alphabet::Binary, vec![Sequence::parse(Alphabet::Binary, "0?1").unwrap()]).unwrap();
        assert!(randomize(&er, 3).unwrap().reads[0].is_erased(1));
    }

    #[test]
    fn randomized_constant_pool_is_uniform() {
        let n = 1_000_000;
        let pool = ReadPool::fixed(Alphabet::Quaternary, vec![Sequence::new(Alphabet::Quaternary, vec![2; n]).unwrap()]).unwrap();
        let r = randomize(&pool, 7).unwrap();
        let mut counts = [0usize; 4];
        for &s in r.reads[0].symbols() {
            counts[s as usize] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 4.0).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn shingle_examples() {
        let s = kmer_shingles(&dna("ACGT"), 2).unwrap();
        let expect: BTreeSet<u64> = [dna("AC"), dna("CG"), dna("GT")]
            .iter()
            .map(|x| x.symbols().iter().fold(0u64, |a, &b| a * 5 + b as u64))
            .collect();
        assert_eq!(s.kmers, expect);
        assert_eq!(kmer_shingles(&dna("AAAA"), 2).unwrap().kmers.len(), 1);
        assert!(kmer_shingles(&dna("ACG"), 4).unwrap().kmers.is_empty());
        assert!(kmer_shingles(&dna("ACG"), 0).is_err());
    }

    #[test]
    fn minhash_properties() {
        let a = kmer_shingles(&dna("ACGTACGGTCA"), 3).unwrap();
        assert_eq!(minhash(&a, 64, 1), minhash(&a, 64, 1));
        let e = minhash(&ShingleSet { k: 3, kmers: BTreeSet::new() }, 8, 1);
        assert!(e.empty);
        // disjoint random sets
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(2);
        let mut total = 0.0;
        let trials = 10_000;
        for t in 0..trials {
            let x: BTreeSet<u64> = (0..8).map(|_| rng.random::<u64>() | 1).collect();
            let y: BTreeSet<u64> = (0..8).map(|_| rng.random::<u64>() & !1).collect();
            let sx = minhash(&ShingleSet { k: 1, kmers: x }, 128, t);
            let sy = minhash(&ShingleSet { k: 1, kmers: y }, 128, t);
            total += sx.agreement(&sy);
        }
        assert!(total / (trials as f64) < 0.01);
    }

    #[test]
    fn minhash_estimates_jaccard() {
        let a = ShingleSet { k: 1, kmers: [1, 2].into_iter().collect() };
        let b = ShingleSet { k: 1, kmers: [2, 3].into_iter().collect() };
        assert!((a.jaccard(&b) - 1.0 / 3.0).abs() < 1e-15);
        let families = 1000;
        let mean: f64 = (0..families).map(|s| minhash(&a, 256, s).agreement(&minhash(&b, 256, s))).sum::<f64>() / families as f64;
        assert!((mean - 1.0 / 3.0).abs() <= 0.05, "{mean}");
        // unbiasedness within 3 sigma of the per-coordinate Bernoulli
        let sigma = ((1.0 / 3.0) * (2.0 / 3.0) / (256.0 * families as f64)).sqrt();
        assert!((mean - 1.0 / 3.0).abs() <= 3.0 * sigma, "{mean}");
    }

    #[test]
    fn lsh_examples() {
        let p = LshParams { k: 4, ..LshParams::defaults(Alphabet::Quaternary) };
        let r = dna("ACGTTGCAACGTAGCTAGCT");
        let s = minhash(&kmer_shingles(&r, 4).unwrap(), p.h, 0);
        assert_eq!(lsh_pairs(&[s.clone(), s], &p).unwrap(), vec![(0, 1)]);
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
        let mut paired = 0;
        let trials = 2000;
        for t in 0..trials {
            let x: BTreeSet<u64> = (0..30).map(|_| rng.random::<u64>() | 1).collect();
            let y: BTreeSet<u64> = (0..30).map(|_| rng.random::<u64>() & !1).collect();
            let p = LshParams { seed: t, ..p };
            let sx = minhash(&ShingleSet { k: 1, kmers: x }, p.h, p.seed);
            let sy = minhash(&ShingleSet { k: 1, kmers: y }, p.h, p.seed);
            paired += lsh_pairs(&[sx, sy], &p).unwrap().len();
        }
        assert!((paired as f64 / trials as f64) < 0.01);
        assert!(LshParams { bands: 3, ..p }.validate().is_err());
    }

    #[test]
    fn filter_examples() {
        let p = LshParams { tau: 0.8, band_width: 2, ..LshParams::defaults(Alphabet::Quaternary) };
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(8);
        let a = random_seq(Alphabet::Quaternary, 40, &mut rng);
        let mut far = a.symbols().to_vec();
        for s in far.iter_mut().step_by(2) {
            *s = (*s + 1) % 4;
        }
        let mut del = a.symbols().to_vec();
        del.remove(17);
        let reads = vec![a.clone(), a.clone(), Sequence::new(Alphabet::Quaternary, far).unwrap(), Sequence::new(Alphabet::Quaternary, del).unwrap()];
        let kept = filter_pairs(&[(0, 1), (0, 2), (0, 3)], &reads, &p).unwrap();
        assert_eq!(kept, vec![(0, 1), (0, 3)]);
        let al = banded_align(a.symbols(), reads[3].symbols(), 2, 4);
        assert_eq!((al.distance, al.matches), (1, 39));
    }

    #[test]
    fn alignment_distance_matches_full_dp() {
        fn full(a: &[u8], b: &[u8]) -> usize {
            let mut prev: Vec<usize> = (0..=b.len()).collect();
            for i in 1..=a.len() {
                let mut cur = vec![i; b.len() + 1];
                for j in 1..=b.len() {
                    cur[j] = (prev[j - 1] + usize::from(a[i - 1] != b[j - 1])).min(prev[j] + 1).min(cur[j - 1] + 1);
                }
                prev = cur;
            }
            prev[b.len()]
        }
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(12);
        for _ in 0..300 {
            let a: Vec<u8> = (0..rng.random_range(0..25)).map(|_| rng.random_range(0..4)).collect();
            let b: Vec<u8> = (0..rng.random_range(0..25)).map(|_| rng.random_range(0..4)).collect();
            // a band as wide as the strings is the full matrix
            assert_eq!(banded_align(&a, &b, 30, 4).distance, full(&a, &b));
        }
    }

    #[test]
    fn union_find_examples() {
        assert_eq!(pairs_to_clusters(&[], 3).unwrap().ids, vec![0, 1, 2]);
        assert_eq!(pairs_to_clusters(&[(0, 1), (1, 2)], 3).unwrap().count, 1);
        let c = pairs_to_clusters(&[(3, 4), (0, 1)], 5).unwrap();
        assert_eq!(c.ids, vec![0, 0, 1, 2, 2]);
        assert!(pairs_to_clusters(&[(0, 5)], 5).is_err());
    }

    #[test]
    fn reconstruct_examples() {
        let bin = |s: &str| Sequence::parse(Alphabet::Binary, s).unwrap();
        let three = vec![bin("0110"); 3];
        assert_eq!(reconstruct(&three, Alphabet::Binary, ReconstructMode::Substitution).unwrap(), bin("0110"));
        let c = vec![bin("000"), bin("001"), bin("010")];
        assert_eq!(reconstruct(&c, Alphabet::Binary, ReconstructMode::Substitution).unwrap(), bin("000"));
        let mut rev = c.clone();
        rev.reverse();
        assert_eq!(reconstruct(&rev, Alphabet::Binary, ReconstructMode::Substitution).unwrap(), bin("000"));
        // indel: one read lost a symbol, one gained one
        let reads = vec![dna("ACGTACGTAC"), dna("ACGACGTAC"), dna("ACGTACGGTAC"), dna("ACGTACGTAC")];
        assert_eq!(reconstruct(&reads, Alphabet::Quaternary, ReconstructMode::Indel).unwrap(), dna("ACGTACGTAC"));
        assert!(reconstruct(&[], Alphabet::Binary, ReconstructMode::Substitution).is_err());
    }

    #[test]
    fn seven_read_bsc_clusters_reconstruct() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(99);
        let mut exact = 0;
        for _ in 0..1000 {
            let seed = random_seq(Alphabet::Binary, 60, &mut rng);
            let mut reads: Vec<Sequence> =
                (0..7).map(|_| apply_noise(&seed, &NoiseSpec::Bsc { p: 0.1 }, &mut rng).unwrap()).collect();
            reads.shuffle(&mut rng);
            exact += usize::from(reconstruct(&reads, Alphabet::Binary, ReconstructMode::Substitution).unwrap() == seed);
        }
        // exact oracle: a column fails iff at least 4 of 7 copies flipped
        let binom = |n: u64, k: u64| (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64);
        let col_err: f64 = (4..=7).map(|k| binom(7, k) * 0.1f64.powi(k as i32) * 0.9f64.powi(7 - k as i32)).sum();
        let expect = (1.0 - col_err).powi(60);
        let sigma = (expect * (1.0 - expect) / 1000.0).sqrt();
        assert!((exact as f64 / 1000.0 - expect).abs() <= 3.0 * sigma, "{exact} vs {expect}");
    }

    #[test]
    fn score_examples() {
        let truth = vec![0, 0, 1, 1];
        let perfect = pairs_to_clusters(&[(0, 1), (2, 3)], 4).unwrap();
        let s = score_clustering(&perfect, &truth).unwrap();
        assert_eq!((s.precision, s.recall, s.accuracy), (1.0, 1.0, 1.0));
        let single = pairs_to_clusters(&[], 4).unwrap();
        let s = score_clustering(&single, &truth).unwrap();
        assert_eq!((s.precision, s.recall), (1.0, 0.0));
        assert_eq!(s.accuracy, 0.5);
        let merged = pairs_to_clusters(&[(0, 1), (1, 2), (2, 3)], 4).unwrap();
        assert!(score_clustering(&merged, &truth).unwrap().precision < 1.0);
    }
}
