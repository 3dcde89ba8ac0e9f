//! Random linear coding for the erasure multi-draw channel.
//!
//! A message is one of an explicit list of tags `t_i ∈ F_2^B`. Its codeword
//! `G·t_i` (G is `ML × B`) is cut into `M` sequences of length `L`. The
//! decoder builds the consistency graph on the reads, enumerates partitions
//! into cliques with a plausible cluster count, forms a consensus per
//! cluster, tries every injective cluster-to-index assignment, and checks
//! which tags satisfy the resulting equations.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};
use crate::seqcore::{Alphabet, ReadPool, Sequence};

/// Largest explicit tag list.
pub const MAX_MESSAGES: usize = 1 << 12;
/// Limits of the exhaustive decoder.
pub const MAX_EXHAUSTIVE_M: usize = 8;
pub const MAX_EXHAUSTIVE_READS: usize = 12;
pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct LinearCodebook {
    pub m: usize,
    pub l: usize,
    pub b: usize,
    pub g: BinaryMatrix,
    pub tags: Vec<BitVector>,
    codewords: Vec<BitVector>,
}

impl LinearCodebook {
    pub fn with_tags(m: usize, l: usize, g: BinaryMatrix, tags: Vec<BitVector>) -> Result<Self> {
        if g.rows() != m * l {
            return Err(Error::LengthMismatch { expected: m * l, got: g.rows() });
        }
        let b = g.cols();
        if b > m * l {
            return Err(Error::Domain(format!("B={b} exceeds ML={}", m * l)));
        }
        if tags.is_empty() || tags.len() > MAX_MESSAGES {
            return Err(Error::TooLarge(format!("{} tags (allowed 1..={MAX_MESSAGES})", tags.len())));
        }
        if let Some(t) = tags.iter().find(|t| t.len() != b) {
            return Err(Error::LengthMismatch { expected: b, got: t.len() });
        }
        let codewords = tags.iter().map(|t| g.mul_vec(t)).collect();
        Ok(LinearCodebook { m, l, b, g, tags, codewords })
    }

    pub fn num_messages(&self) -> usize {
        self.tags.len()
    }

    /// `log2(#messages) / (ML)`.
    pub fn rate(&self) -> f64 {
        (self.num_messages() as f64).log2() / (self.m * self.l) as f64
    }

    pub fn codeword(&self, message: usize) -> &BitVector {
        &self.codewords[message]
    }

    pub fn encode(&self, message: usize) -> Result<ReadPool> {
        let cw = self.codewords.get(message).ok_or_else(|| Error::Domain(format!("no message {message}")))?;
        let reads = (0..self.m)
            .map(|j| Sequence::from_bits(&(0..self.l).map(|t| cw.get(j * self.l + t)).collect::<Vec<_>>()))
            .collect();
        ReadPool::fixed(Alphabet::Binary, reads)
    }
}

/// Fair-coin `G` and `num_messages` distinct uniform tags.
pub fn gen_codebook<R: Rng + ?Sized>(m: usize, l: usize, b: usize, num_messages: usize, rng: &mut R) -> Result<LinearCodebook> {
    if b == 0 || b > m * l {
        return Err(Error::Domain(format!("need 1 <= B <= ML, got B={b}, ML={}", m * l)));
    }
    if num_messages == 0 || num_messages > MAX_MESSAGES {
        return Err(Error::TooLarge(format!("{num_messages} messages (allowed 1..={MAX_MESSAGES})")));
    }
    if b < 64 && num_messages as u64 > 1u64 << b {
        return Err(Error::Domain(format!("{num_messages} distinct tags do not exist in F_2^{b}")));
    }
    let g = BinaryMatrix::random(m * l, b, rng);
    let mut seen = BTreeSet::new();
    let mut tags = Vec::with_capacity(num_messages);
    while tags.len() < num_messages {
        let t = BitVector::random(b, rng);
        if seen.insert(t.clone()) {
            tags.push(t);
        }
    }
    LinearCodebook::with_tags(m, l, g, tags)
}

/// True iff no position holds two distinct non-erased symbols.
pub fn consistent(a: &Sequence, b: &Sequence) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: b.len() });
    }
    Ok((0..a.len()).all(|i| a.is_erased(i) || b.is_erased(i) || a.symbols()[i] == b.symbols()[i]))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyGraph {
    n: usize,
    adj: Vec<Vec<bool>>,
    edges: usize,
    /// Edges joining reads of the same / different origin, when known.
    pub correct_edges: Option<usize>,
    pub incorrect_edges: Option<usize>,
}

impl ConsistencyGraph {
    /// Graph on `n` vertices from an explicit edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![vec![false; n]; n];
        let mut count = 0;
        for &(a, b) in edges {
            assert!(a != b && a < n && b < n);
            if !adj[a][b] {
                adj[a][b] = true;
                adj[b][a] = true;
                count += 1;
            }
        }
        ConsistencyGraph { n, adj, edges: count, correct_edges: None, incorrect_edges: None }
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    /// Calls `f` on every partition of the vertices into cliques whose block
    /// count lies in `[k_min, k_max]`. Blocks are listed in order of their
    /// smallest vertex.
    pub fn for_each_clique_partition(&self, k_min: usize, k_max: usize, mut f: impl FnMut(&[Vec<usize>])) {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        self.partition_rec(0, k_min, k_max, &mut blocks, &mut f);
    }

    fn partition_rec(
        &self,
        v: usize,
        k_min: usize,
        k_max: usize,
        blocks: &mut Vec<Vec<usize>>,
        f: &mut impl FnMut(&[Vec<usize>]),
    ) {
        if blocks.len() + (self.n - v) < k_min {
            return;
        }
        if v == self.n {
            if blocks.len() >= k_min && blocks.len() <= k_max {
                f(blocks);
            }
            return;
        }
        for i in 0..blocks.len() {
            if blocks[i].iter().all(|&u| self.adj[u][v]) {
                blocks[i].push(v);
                self.partition_rec(v + 1, k_min, k_max, blocks, f);
                blocks[i].pop();
            }
        }
        if blocks.len() < k_max {
            blocks.push(vec![v]);
            self.partition_rec(v + 1, k_min, k_max, blocks, f);
            blocks.pop();
        }
    }

    /// Number of partitions into cliques, of any size.
    pub fn count_clique_partitions(&self) -> u64 {
        let mut count = 0;
        self.for_each_clique_partition(0, self.n, |_| count += 1);
        count
    }
}

pub fn build_graph(reads: &[Sequence]) -> Result<ConsistencyGraph> {
    let n = reads.len();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if consistent(&reads[a], &reads[b])? {
                edges.push((a, b));
            }
        }
    }
    Ok(ConsistencyGraph::from_edges(n, &edges))
}

/// As [`build_graph`], also counting edges against the true origins.
pub fn build_graph_with_truth(reads: &[Sequence], origin: &[usize]) -> Result<ConsistencyGraph> {
    if origin.len() != reads.len() {
        return Err(Error::LengthMismatch { expected: reads.len(), got: origin.len() });
    }
    let mut g = build_graph(reads)?;
    let (mut correct, mut incorrect) = (0, 0);
    for a in 0..g.n {
        for b in a + 1..g.n {
            if g.adj[a][b] {
                if origin[a] == origin[b] {
                    correct += 1;
                } else {
                    incorrect += 1;
                }
            }
        }
    }
    g.correct_edges = Some(correct);
    g.incorrect_edges = Some(incorrect);
    Ok(g)
}

/// Position-wise first non-erased symbol; erased where every read is.
pub fn consensus_erasure(cluster: &[Sequence]) -> Result<Sequence> {
    let first = cluster.first().ok_or_else(|| Error::Contract("empty cluster".into()))?;
    let alphabet = first.alphabet();
    let er = alphabet.erasure();
    let mut out = vec![er; first.len()];
    for s in cluster {
        if s.len() != first.len() {
            return Err(Error::LengthMismatch { expected: first.len(), got: s.len() });
        }
        for (i, o) in out.iter_mut().enumerate() {
            if s.is_erased(i) {
                continue;
            }
            let v = s.symbols()[i];
            if *o == er {
                *o = v;
            } else if *o != v {
                return Err(Error::Contract(format!("cluster disagrees at position {i}")));
            }
        }
    }
    Sequence::new(alphabet, out)
}

/// Cluster-count window: the integers in `[(1-q0-ε)M, (1-q0+ε)M]`, or the
/// two integers around it when it holds none; clipped to `[1, min(M, N)]`.
pub fn cluster_count_window(m: usize, reads: usize, q0: f64, epsilon: f64) -> (usize, usize) {
    let (a, b) = ((1.0 - q0 - epsilon) * m as f64, (1.0 - q0 + epsilon) * m as f64);
    let (mut lo, mut hi) = ((a - 1e-9).ceil(), (b + 1e-9).floor());
    if lo > hi {
        (lo, hi) = (a.floor(), b.ceil());
    }
    let lo = lo.max(1.0) as usize;
    let hi = (hi.max(0.0) as usize).min(m).min(reads);
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearDecodeOutcome {
    /// Decoded message index, present iff exactly one tag solved some system.
    pub decoded: Option<usize>,
    /// Every distinct tag that solved at least one system.
    pub candidates: Vec<usize>,
    pub partitions: usize,
    pub systems: usize,
    pub max_rank: usize,
    /// No system reached rank `B`.
    pub underdetermined: bool,
}

impl LinearDecodeOutcome {
    pub fn ambiguous(&self) -> bool {
        self.candidates.len() > 1
    }
}

pub fn decode_linear(reads: &ReadPool, codebook: &LinearCodebook, q0: f64, epsilon: f64) -> Result<LinearDecodeOutcome> {
    let m = codebook.m;
    let n = reads.len();
    if m > MAX_EXHAUSTIVE_M || n > MAX_EXHAUSTIVE_READS {
        return Err(Error::TooLarge(format!(
            "exhaustive decoding needs M <= {MAX_EXHAUSTIVE_M} and N <= {MAX_EXHAUSTIVE_READS}, got M={m}, N={n}"
        )));
    }
    if let Some(r) = reads.reads.iter().find(|r| r.len() != codebook.l) {
        return Err(Error::LengthMismatch { expected: codebook.l, got: r.len() });
    }
    let graph = build_graph(&reads.reads)?;
    let (k_min, k_max) = cluster_count_window(m, n, q0, epsilon);
    let mut found = BTreeSet::new();
    let (mut partitions, mut systems, mut max_rank) = (0, 0, 0);
    let mut failure = None;
    graph.for_each_clique_partition(k_min, k_max, |blocks| {
        if failure.is_some() {
            return;
        }
        partitions += 1;
        let consensus: Vec<Sequence> = match blocks
            .iter()
            .map(|b| consensus_erasure(&b.iter().map(|&v| reads.reads[v].clone()).collect::<Vec<_>>()))
            .collect::<Result<_>>()
        {
            Ok(c) => c,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        for_each_injection(consensus.len(), m, &mut |assign| {
            systems += 1;
            let mut eqs = Vec::new();
            for (c, &j) in consensus.iter().zip(assign) {
                for t in 0..codebook.l {
                    if !c.is_erased(t) {
                        eqs.push((j * codebook.l + t, c.symbols()[t] == 1));
                    }
                }
            }
            let rows: Vec<BitVector> = eqs.iter().map(|&(pos, _)| codebook.g.row_vector(pos)).collect();
            max_rank = max_rank.max(BinaryMatrix::from_rows(codebook.b, &rows).rank());
            for (i, cw) in codebook.codewords.iter().enumerate() {
                if eqs.iter().all(|&(pos, y)| cw.get(pos) == y) {
                    found.insert(i);
                }
            }
        });
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let underdetermined = max_rank < codebook.b;
    let candidates: Vec<usize> = found.into_iter().collect();
    let decoded = (!underdetermined && candidates.len() == 1).then(|| candidates[0]);
    Ok(LinearDecodeOutcome { decoded, candidates, partitions, systems, max_rank, underdetermined })
}

/// Every injective map from `k` items into `0..m`.
fn for_each_injection(k: usize, m: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(k: usize, m: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for j in 0..m {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                rec(k, m, used, cur, f);
                cur.pop();
                used[j] = false;
            }
        }
    }
    rec(k, m, &mut vec![false; m], &mut Vec::with_capacity(k), f);
}

/// Fraction of `round((1-δ)B) × B` fair-coin matrices of full row rank.
pub fn rank_probe<R: Rng + ?Sized>(b: usize, delta: f64, trials: usize, rng: &mut R) -> Result<f64> {
    if b == 0 || !(0.0..1.0).contains(&delta) || trials == 0 {
        return Err(Error::Domain(format!("rank probe needs B >= 1, delta in [0,1), trials >= 1; got {b}, {delta}, {trials}")));
    }
    let rows = ((1.0 - delta) * b as f64).round() as usize;
    let full = (0..trials).filter(|_| BinaryMatrix::random(rows, b, rng).rank() == rows).count();
    Ok(full as f64 / trials as f64)
}

/// `2^U` for a graph with `U` edges.
pub fn clustering_count_bound(graph: &ConsistencyGraph) -> BigUint {
    BigUint::from(1u32) << graph.edge_count()
}

/// `(1 - (1-p)²/2)^L`: two independent uniform binary strings seen through
/// BEC(p) are consistent with this probability.
pub fn pair_consistency_probability(p: f64, l: usize) -> f64 {
    (1.0 - (1.0 - p) * (1.0 - p) / 2.0).powi(l as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeProbe {
    pub pairs: usize,
    pub consistent: usize,
    pub observed: f64,
    pub expected: f64,
    /// Binomial standard error of `observed` under `expected`.
    pub sigma: f64,
}

impl EdgeProbe {
    pub fn z_score(&self) -> f64 {
        if self.sigma == 0.0 {
            if self.observed == self.expected { 0.0 } else { f64::INFINITY }
        } else {
            (self.observed - self.expected) / self.sigma
        }
    }
}

/// Samples independent pairs of uniform length-`l` strings, erases each bit
/// with probability `p`, and counts consistent pairs.
pub fn edge_probe<R: Rng + ?Sized>(p: f64, l: usize, pairs: usize, rng: &mut R) -> Result<EdgeProbe> {
    if !(0.0..=1.0).contains(&p) || pairs == 0 {
        return Err(Error::Domain("edge probe needs p in [0,1] and at least one pair".into()));
    }
    let mut hits = 0;
    for _ in 0..pairs {
        let ok = (0..l).all(|_| {
            let a_seen = !rng.random_bool(p);
            let b_seen = !rng.random_bool(p);
            let differ = rng.random_bool(0.5);
            !(a_seen && b_seen && differ)
        });
        hits += ok as usize;
    }
    let expected = pair_consistency_probability(p, l);
    let observed = hits as f64 / pairs as f64;
    Ok(EdgeProbe {
        pairs,
        consistent: hits,
        observed,
        expected,
        sigma: (expected * (1.0 - expected) / pairs as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;
    use crate::channel::{apply_noise, NoiseSpec};
    use crate::seqcore::RandomStream;

    fn seq(s: &str) -> Sequence {
        Sequence::parse(Alphabet::Binary, s).unwrap()
    }

    /// Counts set partitions of `n` vertices whose blocks are cliques by
    /// enumerating restricted-growth strings.
    fn brute_partitions(g: &ConsistencyGraph) -> u64 {
        let n = g.vertices();
        let mut count = 0;
        let mut rgs = vec![0usize; n];
        loop {
            let ok = (0..n).all(|a| (a + 1..n).all(|b| rgs[a] != rgs[b] || g.adjacent(a, b)));
            count += ok as u64;
            // next restricted-growth string
            let mut i = n;
            loop {
                if i <= 1 {
                    return count;
                }
                i -= 1;
                let max_prev = rgs[..i].iter().copied().max().unwrap_or(0);
                if rgs[i] <= max_prev {
                    rgs[i] += 1;
                    for r in rgs.iter_mut().skip(i + 1) {
                        *r = 0;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn consistency_examples() {
        assert!(consistent(&seq("0?1"), &seq("001")).unwrap());
        assert!(consistent(&seq("0?1"), &seq("011")).unwrap());
        assert!(!consistent(&seq("001"), &seq("011")).unwrap());
        assert!(consistent(&seq("01"), &seq("011")).is_err());
    }

    #[test]
    fn consensus_examples() {
        let c = consensus_erasure(&[seq("0?1"), seq("?01"), seq("00?")]).unwrap();
        assert_eq!(c.to_text(), "001");
        assert_eq!(consensus_erasure(&[seq("0?1")]).unwrap().to_text(), "0?1");
        assert!(matches!(consensus_erasure(&[seq("0?1"), seq("1??")]), Err(Error::Contract(_))));
        assert!(consensus_erasure(&[]).is_err());
    }

    #[test]
    fn codebook_examples() {
        let mut rng = RandomStream::new(1, "cb").rng();
        let g = BinaryMatrix::random(12, 12, &mut rng);
        let units: Vec<BitVector> = (0..12).map(|i| BitVector::from_u64(1 << i, 12)).collect();
        let cb = LinearCodebook::with_tags(3, 4, g.clone(), units).unwrap();
        for i in 0..12 {
            let col: Vec<bool> = (0..12).map(|r| g.get(r, i)).collect();
            assert_eq!(cb.codeword(i).to_bools(), col);
        }
        let cb0 = LinearCodebook::with_tags(3, 4, g, vec![BitVector::zeros(12)]).unwrap();
        assert!(cb0.codeword(0).is_zero());
        let a = gen_codebook(2, 6, 8, 64, &mut RandomStream::new(5, "x").rng()).unwrap();
        let b = gen_codebook(2, 6, 8, 64, &mut RandomStream::new(5, "x").rng()).unwrap();
        assert_eq!((a.g.clone(), a.tags.clone()), (b.g.clone(), b.tags.clone()));
        assert_eq!(a.tags.iter().collect::<BTreeSet<_>>().len(), 64);
        assert!(gen_codebook(2, 2, 2, 5, &mut rng).is_err());
        assert!(gen_codebook(2, 2, 5, 1, &mut rng).is_err());
    }

    #[test]
    fn graph_examples() {
        let reads = vec![seq("0101"); 4];
        let g = build_graph(&reads).unwrap();
        assert_eq!(g.edge_count(), 6);
        let triangle = ConsistencyGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(triangle.count_clique_partitions(), 5);
        assert_eq!(clustering_count_bound(&triangle), BigUint::from(8u32));
        let path = ConsistencyGraph::from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(path.count_clique_partitions(), 3);
        let empty = ConsistencyGraph::from_edges(4, &[]);
        assert_eq!(empty.count_clique_partitions(), 1);
        assert_eq!(clustering_count_bound(&empty), BigUint::from(1u32));
    }

    #[test]
    fn partition_enumeration_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.random_range(1..=7);
            let edges: Vec<(usize, usize)> =
                (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|_| rng.random_bool(0.6)).collect();
            let g = ConsistencyGraph::from_edges(n, &edges);
            assert_eq!(g.count_clique_partitions(), brute_partitions(&g));
        }
    }

    #[test]
    fn origin_reads_form_cliques() {
        let mut rng = RandomStream::new(9, "clique").rng();
        let base = Sequence::from_bits(&(0..20).map(|_| rng.random()).collect::<Vec<bool>>());
        let reads: Vec<Sequence> =
            (0..6).map(|_| apply_noise(&base, &NoiseSpec::Bec { p: 0.4 }, &mut rng).unwrap()).collect();
        let g = build_graph_with_truth(&reads, &[0; 6]).unwrap();
        assert_eq!(g.edge_count(), 15);
        assert_eq!(g.incorrect_edges, Some(0));
    }

    #[test]
    fn noiseless_decoding_returns_message() {
        for seed in 0..20 {
            let mut rng = RandomStream::new(seed, "lin").rng();
            let cb = gen_codebook(2, 6, 8, 64, &mut rng).unwrap();
            let msg = rng.random_range(0..64);
            let pool = cb.encode(msg).unwrap();
            let out = decode_linear(&pool, &cb, 0.0, DEFAULT_EPSILON).unwrap();
            assert!(out.candidates.contains(&msg));
            if let Some(d) = out.decoded {
                assert_eq!(d, msg);
            }
        }
        // a full-rank square code with all tags is never ambiguous without noise
        let mut rng = RandomStream::new(1, "sq").rng();
        let mut g = BinaryMatrix::random(8, 4, &mut rng);
        while g.rank() < 4 {
            g = BinaryMatrix::random(8, 4, &mut rng);
        }
        let tags: Vec<BitVector> = (0..16).map(|v| BitVector::from_u64(v, 4)).collect();
        let cb = LinearCodebook::with_tags(1, 8, g, tags).unwrap();
        for msg in 0..16 {
            let out = decode_linear(&cb.encode(msg).unwrap(), &cb, 0.0, DEFAULT_EPSILON).unwrap();
            assert_eq!(out.decoded, Some(msg));
        }
    }

    #[test]
    fn too_few_equations_is_underdetermined() {
        let mut rng = RandomStream::new(2, "under").rng();
        let cb = gen_codebook(1, 4, 4, 8, &mut rng).unwrap();
        let pool = ReadPool::fixed(Alphabet::Binary, vec![seq("0??1")]).unwrap();
        let out = decode_linear(&pool, &cb, 0.0, DEFAULT_EPSILON).unwrap();
        assert!(out.underdetermined);
        assert!(out.decoded.is_none());
    }

    #[test]
    fn window_rounding() {
        assert_eq!(cluster_count_window(2, 5, (-2.0f64).exp(), 0.1), (1, 2));
        assert_eq!(cluster_count_window(8, 3, 0.0, 0.1), (8, 3));
        assert_eq!(cluster_count_window(8, 20, 0.0, 0.1), (8, 8));
        assert_eq!(cluster_count_window(2, 5, 0.0, 0.1), (2, 2));
        assert_eq!(cluster_count_window(10, 20, 0.5, 0.1), (4, 6));
    }

    #[test]
    fn rank_probe_single_bit() {
        let mut rng = RandomStream::new(4, "rank").rng();
        let f = rank_probe(1, 0.0, 10_000, &mut rng).unwrap();
        assert!((f - 0.5).abs() < 0.02);
        assert!(rank_probe(0, 0.0, 1, &mut rng).is_err());
    }

    #[test]
    fn consensus_erasure_rate_concentrates() {
        let mut rng = RandomStream::new(11, "cons").rng();
        let base = Sequence::from_bits(&[false]);
        let (mut erased, total) = (0usize, 100_000usize);
        for _ in 0..total {
            let a = apply_noise(&base, &NoiseSpec::Bec { p: 0.3 }, &mut rng).unwrap();
            let b = apply_noise(&base, &NoiseSpec::Bec { p: 0.3 }, &mut rng).unwrap();
            erased += consensus_erasure(&[a, b]).unwrap().erasure_count();
        }
        let frac = erased as f64 / total as f64;
        assert!((frac - 0.09).abs() <= 0.005, "{frac}");
    }
}
