//! Index-based inner/outer coding.
//!
//! Data are laid out as `B` blocks of an `n_O`-column array. Every column is
//! one stored sequence: a unique index prefix followed by `symbols_per_column`
//! symbols of an outer Reed–Solomon code over GF(2^m), one per array row.
//! Index and payload are protected together by the inner code. Decoding inner-
//! decodes each read, groups reads by index, treats missing columns as
//! erasures, and runs an erasure-and-error decoder along each row.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Elem, Gf2m, Poly};
use crate::seqcore::{Alphabet, ReadPool, Sequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexLayout {
    /// Number of stored sequences `M`.
    pub m: usize,
    /// Sequence length `L` in symbols.
    pub l: usize,
    pub alphabet: Alphabet,
}

impl IndexLayout {
    pub fn new(m: usize, l: usize, alphabet: Alphabet) -> Result<Self> {
        if m == 0 || l == 0 {
            return Err(Error::Layout("M and L must be positive".into()));
        }
        Ok(IndexLayout { m, l, alphabet })
    }

    /// `ceil(log2 M)`.
    pub fn index_bits(&self) -> usize {
        (usize::BITS - (self.m - 1).leading_zeros()) as usize
    }

    pub fn sequence_bits(&self) -> usize {
        self.l * self.alphabet.bits_per_symbol()
    }

    /// `L / log2 M` (infinite for `M = 1`).
    pub fn beta(&self) -> f64 {
        self.l as f64 / (self.m as f64).log2()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OuterCodeSpec {
    /// Block length `n_O`.
    pub n: usize,
    /// Data symbols `k_O`.
    pub k: usize,
    /// Symbols live in GF(2^field_bits).
    pub field_bits: u32,
}

impl OuterCodeSpec {
    /// Uses the smallest binary-extension field with at least `n` elements.
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let bits = Gf2m::with_at_least(n)?.bits();
        Self::with_field(n, k, bits)
    }

    pub fn with_field(n: usize, k: usize, field_bits: u32) -> Result<Self> {
        let spec = OuterCodeSpec { n, k, field_bits };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=16).contains(&self.field_bits) {
            return Err(Error::Layout(format!("field GF(2^{}) unsupported", self.field_bits)));
        }
        if self.k == 0 || self.k > self.n {
            return Err(Error::Layout(format!("need 1 <= k <= n, got ({}, {})", self.n, self.k)));
        }
        if self.n > 1 << self.field_bits {
            return Err(Error::Layout(format!("block length {} exceeds field size 2^{}", self.n, self.field_bits)));
        }
        Ok(())
    }

    pub fn redundancy(&self) -> usize {
        self.n - self.k
    }
}

impl FromStr for OuterCodeSpec {
    type Err = Error;

    /// `n,k` or `n,k,field_bits`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad outer spec '{s}'"))))
            .collect::<Result<_>>()?;
        match parts[..] {
            [n, k] => Self::new(n, k),
            [n, k, b] => Self::with_field(n, k, b as u32),
            _ => Err(Error::Parse(format!("outer spec '{s}' must be n,k[,bits]"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerCodeSpec {
    None,
    Repetition { r: usize },
    /// Data arranged row-major in a `rows × cols` array, followed by one
    /// parity bit per row and one per column; corrects one bit error.
    ParityProduct { rows: usize, cols: usize },
}

impl InnerCodeSpec {
    /// Information bits and coded bits that fit in `capacity` bits.
    pub fn dimensions(&self, capacity: usize) -> Result<(usize, usize)> {
        let (k, n) = match *self {
            InnerCodeSpec::None => (capacity, capacity),
            InnerCodeSpec::Repetition { r } => {
                if r == 0 {
                    return Err(Error::Layout("repetition factor must be positive".into()));
                }
                (capacity / r, (capacity / r) * r)
            }
            InnerCodeSpec::ParityProduct { rows, cols } => {
                if rows == 0 || cols == 0 {
                    return Err(Error::Layout("parity array must be non-empty".into()));
                }
                (rows * cols, rows * cols + rows + cols)
            }
        };
        if n > capacity {
            return Err(Error::Layout(format!("inner codeword of {n} bits exceeds {capacity} available")));
        }
        Ok((k, n))
    }

    pub fn encode(&self, info: &[bool], capacity: usize) -> Result<Vec<bool>> {
        let (k, n) = self.dimensions(capacity)?;
        if info.len() != k {
            return Err(Error::LengthMismatch { expected: k, got: info.len() });
        }
        let mut out = match *self {
            InnerCodeSpec::None => info.to_vec(),
            InnerCodeSpec::Repetition { r } => info.repeat(r),
            InnerCodeSpec::ParityProduct { rows, cols } => {
                let mut out = info.to_vec();
                out.extend((0..rows).map(|i| info[i * cols..(i + 1) * cols].iter().fold(false, |a, &b| a ^ b)));
                out.extend((0..cols).map(|j| (0..rows).fold(false, |a, i| a ^ info[i * cols + j])));
                out
            }
        };
        debug_assert_eq!(out.len(), n);
        out.resize(capacity, false);
        Ok(out)
    }

    /// Decodes `capacity` received bits (`None` = erased). Returns the
    /// information bits and the number of corrected bit errors, or `None` on
    /// a detected failure.
    pub fn decode(&self, received: &[Option<bool>]) -> Option<(Vec<bool>, usize)> {
        let (k, n) = self.dimensions(received.len()).ok()?;
        let coded = &received[..n];
        match *self {
            InnerCodeSpec::None => coded.iter().copied().collect::<Option<Vec<_>>>().map(|v| (v, 0)),
            InnerCodeSpec::Repetition { r } => {
                let mut info = Vec::with_capacity(k);
                let mut corrected = 0;
                for i in 0..k {
                    let (mut ones, mut zeros) = (0usize, 0usize);
                    for c in 0..r {
                        match coded[c * k + i] {
                            Some(true) => ones += 1,
                            Some(false) => zeros += 1,
                            None => {}
                        }
                    }
                    if ones == zeros {
                        return None;
                    }
                    info.push(ones > zeros);
                    corrected += ones.min(zeros);
                }
                Some((info, corrected))
            }
            InnerCodeSpec::ParityProduct { rows, cols } => {
                let mut bits: Vec<bool> = coded.iter().copied().collect::<Option<Vec<_>>>()?;
                let row_bad: Vec<usize> = (0..rows)
                    .filter(|&i| bits[i * cols..(i + 1) * cols].iter().fold(bits[k + i], |a, &b| a ^ b))
                    .collect();
                let col_bad: Vec<usize> = (0..cols)
                    .filter(|&j| (0..rows).fold(bits[k + rows + j], |a, i| a ^ bits[i * cols + j]))
                    .collect();
                let corrected = match (row_bad.len(), col_bad.len()) {
                    (0, 0) => 0,
                    (1, 1) => {
                        let at = row_bad[0] * cols + col_bad[0];
                        bits[at] = !bits[at];
                        1
                    }
                    // a single flipped parity bit
                    (1, 0) | (0, 1) => 1,
                    _ => return None,
                };
                bits.truncate(k);
                Some((bits, corrected))
            }
        }
    }

    /// Information bits per coded bit.
    pub fn rate(&self, capacity: usize) -> Result<f64> {
        let (k, _) = self.dimensions(capacity)?;
        Ok(k as f64 / capacity as f64)
    }
}

impl fmt::Display for InnerCodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnerCodeSpec::None => write!(f, "none"),
            InnerCodeSpec::Repetition { r } => write!(f, "rep:{r}"),
            InnerCodeSpec::ParityProduct { rows, cols } => write!(f, "pp:{rows}x{cols}"),
        }
    }
}

impl FromStr for InnerCodeSpec {
    type Err = Error;

    /// `none`, `rep:R`, or `pp:RxC`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad inner code '{s}'"));
        let s = s.trim();
        if s == "none" {
            return Ok(InnerCodeSpec::None);
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "rep" => Ok(InnerCodeSpec::Repetition { r: arg.parse().map_err(|_| bad())? }),
            "pp" => {
                let (r, c) = arg.split_once('x').ok_or_else(bad)?;
                Ok(InnerCodeSpec::ParityProduct { rows: r.parse().map_err(|_| bad())?, cols: c.parse().map_err(|_| bad())? })
            }
            _ => Err(bad()),
        }
    }
}

/// Systematic evaluation code: codeword `i` is `f(i)` for the unique
/// polynomial `f` of degree `< k` whose values at `0..k` are the data.
#[derive(Clone, Debug)]
pub struct ReedSolomon {
    field: Gf2m,
    n: usize,
    k: usize,
    points: Vec<Elem>,
    /// `parity[j][i]` is the weight of data symbol `i` in parity symbol `j`.
    parity: Vec<Vec<Elem>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OuterDecode {
    /// Corrected codeword, when decoding succeeded.
    pub codeword: Option<Vec<Elem>>,
    pub erasures: usize,
    pub substitutions: usize,
}

impl ReedSolomon {
    pub fn new(spec: &OuterCodeSpec) -> Result<Self> {
        spec.validate()?;
        let field = Gf2m::new(spec.field_bits)?;
        let (n, k) = (spec.n, spec.k);
        let points: Vec<Elem> = (0..n).map(|i| i as Elem).collect();
        // barycentric weights over the data points
        let weights: Vec<Elem> = (0..k)
            .map(|i| {
                let prod = (0..k).filter(|&l| l != i).fold(1, |acc, l| field.mul(acc, points[i] ^ points[l]));
                field.inv(prod)
            })
            .collect();
        let parity = (k..n)
            .map(|j| {
                let xj = points[j];
                let lj = (0..k).fold(1, |acc, l| field.mul(acc, xj ^ points[l]));
                (0..k).map(|i| field.mul(lj, field.div(weights[i], xj ^ points[i]))).collect()
            })
            .collect();
        Ok(ReedSolomon { field, n, k, points, parity })
    }

    pub fn field(&self) -> &Gf2m {
        &self.field
    }

    pub fn encode(&self, data: &[Elem]) -> Result<Vec<Elem>> {
        if data.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, got: data.len() });
        }
        if let Some(&bad) = data.iter().find(|&&d| !self.field.contains(d)) {
            return Err(Error::Domain(format!("symbol {bad} outside GF(2^{})", self.field.bits())));
        }
        let mut out = data.to_vec();
        for row in &self.parity {
            out.push(row.iter().zip(data).fold(0, |acc, (&w, &d)| acc ^ self.field.mul(w, d)));
        }
        Ok(out)
    }

    /// Corrects `e` erasures and `s` substitutions whenever `e + 2s ≤ n - k`
    /// (Gao's algorithm on the surviving positions). Outside that bound the
    /// result is either a failure or, if the word lies within the decoding
    /// radius of another codeword, that codeword.
    pub fn decode(&self, received: &[Option<Elem>]) -> Result<OuterDecode> {
        if received.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: received.len() });
        }
        let f = &self.field;
        let (xs, ys): (Vec<Elem>, Vec<Elem>) = received
            .iter()
            .zip(&self.points)
            .filter_map(|(r, &x)| r.map(|y| (x, y & (f.order() - 1) as Elem)))
            .unzip();
        let erasures = self.n - xs.len();
        let fail = OuterDecode { codeword: None, erasures, substitutions: 0 };
        let n1 = xs.len();
        if n1 < self.k {
            return Ok(fail);
        }
        let g1 = f.interpolate(&xs, &ys);
        let msg = if Gf2m::degree(&g1).is_none_or(|d| d < self.k) {
            g1
        } else {
            let g0 = f.vanishing(&xs);
            let (mut r0, mut r1) = (g0, g1);
            let (mut v0, mut v1): (Poly, Poly) = (Vec::new(), vec![1]);
            while let Some(d) = Gf2m::degree(&r1) {
                if 2 * d < n1 + self.k {
                    break;
                }
                let (q, rem) = f.poly_divrem(&r0, &r1);
                let nv = f.poly_add(&v0, &f.poly_mul(&q, &v1));
                r0 = std::mem::replace(&mut r1, rem);
                v0 = std::mem::replace(&mut v1, nv);
            }
            let (q, rem) = f.poly_divrem(&r1, &v1);
            if !rem.is_empty() || Gf2m::degree(&q).is_some_and(|d| d >= self.k) {
                return Ok(fail);
            }
            q
        };
        let codeword: Vec<Elem> = self.points.iter().map(|&x| f.eval(&msg, x)).collect();
        let substitutions = received.iter().zip(&codeword).filter(|(r, c)| r.is_some_and(|y| y != **c)).count();
        if erasures + 2 * substitutions > self.n - self.k {
            return Ok(OuterDecode { substitutions, ..fail });
        }
        Ok(OuterDecode { codeword: Some(codeword), erasures, substitutions })
    }
}

pub fn outer_mds_encode(symbols: &[Elem], spec: &OuterCodeSpec) -> Result<Vec<Elem>> {
    ReedSolomon::new(spec)?.encode(symbols)
}

pub fn outer_mds_decode(received: &[Option<Elem>], spec: &OuterCodeSpec) -> Result<OuterDecode> {
    ReedSolomon::new(spec)?.decode(received)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ReadStatus {
    Decoded { index: usize, corrected: usize },
    WrongLength,
    InnerFailure,
    IndexOutOfRange { index: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ColumnStatus {
    Ok { corrected: usize, candidates: usize },
    Erased,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecReport {
    /// Decoded message, present iff every outer row decoded.
    pub message: Option<Vec<bool>>,
    pub reads: Vec<ReadStatus>,
    pub columns: Vec<ColumnStatus>,
    /// Erased columns over all blocks.
    pub erasures: usize,
    /// Substitutions corrected over all rows.
    pub substitutions: usize,
    pub failed_rows: usize,
}

impl CodecReport {
    pub fn success(&self) -> bool {
        self.message.is_some()
    }

    pub fn inner_failures(&self) -> usize {
        self.reads.iter().filter(|r| !matches!(r, ReadStatus::Decoded { .. })).count()
    }
}

/// A validated layout/outer/inner triple with its derived dimensions.
#[derive(Clone, Debug)]
pub struct IndexCodec {
    pub layout: IndexLayout,
    pub outer: OuterCodeSpec,
    pub inner: InnerCodeSpec,
    rs: ReedSolomon,
    blocks: usize,
    info_bits: usize,
    symbols_per_column: usize,
}

impl IndexCodec {
    pub fn new(layout: IndexLayout, outer: OuterCodeSpec, inner: InnerCodeSpec) -> Result<Self> {
        outer.validate()?;
        if !layout.m.is_multiple_of(outer.n) {
            return Err(Error::Layout(format!("M={} is not a multiple of n_O={}", layout.m, outer.n)));
        }
        let (info_bits, _) = inner.dimensions(layout.sequence_bits())?;
        let ib = layout.index_bits();
        if info_bits < ib + outer.field_bits as usize {
            return Err(Error::Layout(format!(
                "{info_bits} inner information bits cannot hold a {ib}-bit index and one {}-bit symbol",
                outer.field_bits
            )));
        }
        let symbols_per_column = (info_bits - ib) / outer.field_bits as usize;
        Ok(IndexCodec {
            layout,
            outer,
            inner,
            rs: ReedSolomon::new(&outer)?,
            blocks: layout.m / outer.n,
            info_bits,
            symbols_per_column,
        })
    }

    /// Largest single-block `k_O` whose rate does not exceed `target`.
    pub fn for_rate(layout: IndexLayout, inner: InnerCodeSpec, field_bits: u32, target: f64) -> Result<Self> {
        let probe = Self::new(layout, OuterCodeSpec::with_field(layout.m, layout.m, field_bits)?, inner)?;
        let per_column = probe.symbols_per_column * field_bits as usize;
        let k = ((target * (layout.m * layout.l) as f64 + 1e-9) / per_column as f64).floor() as usize;
        if k == 0 {
            return Err(Error::Layout(format!("target rate {target} below one outer data column")));
        }
        Self::new(layout, OuterCodeSpec::with_field(layout.m, k.min(layout.m), field_bits)?, inner)
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn symbols_per_column(&self) -> usize {
        self.symbols_per_column
    }

    pub fn payload_bits(&self) -> usize {
        self.symbols_per_column * self.outer.field_bits as usize
    }

    pub fn message_bits(&self) -> usize {
        self.blocks * self.outer.k * self.payload_bits()
    }

    /// Message bits per stored symbol.
    pub fn rate(&self) -> f64 {
        self.message_bits() as f64 / (self.layout.m * self.layout.l) as f64
    }

    pub fn encode(&self, message: &[bool]) -> Result<ReadPool> {
        if message.len() != self.message_bits() {
            return Err(Error::Layout(format!(
                "message has {} bits, layout carries exactly {}",
                message.len(),
                self.message_bits()
            )));
        }
        let fb = self.outer.field_bits as usize;
        let spc = self.symbols_per_column;
        let (n, k) = (self.outer.n, self.outer.k);
        let mut reads = Vec::with_capacity(self.layout.m);
        for b in 0..self.blocks {
            // array[row][column]
            let mut rows = vec![Vec::with_capacity(k); spc];
            for i in 0..k {
                let base = (b * k + i) * spc * fb;
                for (r, row) in rows.iter_mut().enumerate() {
                    row.push(bits_to_symbol(&message[base + r * fb..base + (r + 1) * fb]));
                }
            }
            let coded: Vec<Vec<Elem>> = rows.iter().map(|row| self.rs.encode(row)).collect::<Result<_>>()?;
            for j in 0..n {
                let column: Vec<Elem> = coded.iter().map(|row| row[j]).collect();
                reads.push(self.column_sequence(b * n + j, &column)?);
            }
        }
        ReadPool::fixed(self.layout.alphabet, reads)
    }

    fn column_sequence(&self, index: usize, column: &[Elem]) -> Result<Sequence> {
        let mut info = Vec::with_capacity(self.info_bits);
        push_bits(&mut info, index as u64, self.layout.index_bits());
        for &s in column {
            push_bits(&mut info, s as u64, self.outer.field_bits as usize);
        }
        info.resize(self.info_bits, false);
        let coded = self.inner.encode(&info, self.layout.sequence_bits())?;
        let bps = self.layout.alphabet.bits_per_symbol();
        let symbols = coded.chunks(bps).map(|c| c.iter().fold(0u8, |a, &b| a << 1 | b as u8)).collect();
        Sequence::new(self.layout.alphabet, symbols)
    }

    fn read_bits(&self, read: &Sequence) -> Vec<Option<bool>> {
        let bps = self.layout.alphabet.bits_per_symbol();
        let mut bits = Vec::with_capacity(read.len() * bps);
        for (i, &s) in read.symbols().iter().enumerate() {
            if read.is_erased(i) {
                bits.extend(std::iter::repeat_n(None, bps));
            } else {
                bits.extend((0..bps).rev().map(|t| Some(s >> t & 1 == 1)));
            }
        }
        bits
    }

    pub fn decode(&self, pool: &ReadPool) -> Result<CodecReport> {
        if pool.alphabet != self.layout.alphabet {
            return Err(Error::AlphabetMismatch(format!(
                "pool over {:?}, layout over {:?}",
                pool.alphabet, self.layout.alphabet
            )));
        }
        let ib = self.layout.index_bits();
        let fb = self.outer.field_bits as usize;
        let spc = self.symbols_per_column;
        let mut candidates: BTreeMap<usize, Vec<(usize, Vec<Elem>)>> = BTreeMap::new();
        let mut statuses = Vec::with_capacity(pool.len());
        for read in &pool.reads {
            if read.len() != self.layout.l {
                statuses.push(ReadStatus::WrongLength);
                continue;
            }
            let Some((info, corrected)) = self.inner.decode(&self.read_bits(read)) else {
                statuses.push(ReadStatus::InnerFailure);
                continue;
            };
            let index = bits_to_u64(&info[..ib]) as usize;
            if index >= self.layout.m {
                statuses.push(ReadStatus::IndexOutOfRange { index });
                continue;
            }
            let payload = (0..spc).map(|r| bits_to_symbol(&info[ib + r * fb..ib + (r + 1) * fb])).collect();
            candidates.entry(index).or_default().push((corrected, payload));
            statuses.push(ReadStatus::Decoded { index, corrected });
        }

        let mut columns = vec![ColumnStatus::Erased; self.layout.m];
        let mut chosen: Vec<Option<Vec<Elem>>> = vec![None; self.layout.m];
        for (index, cands) in candidates {
            let (corrected, payload) = select_candidate(&cands);
            columns[index] = ColumnStatus::Ok { corrected, candidates: cands.len() };
            chosen[index] = Some(payload);
        }

        let (n, k) = (self.outer.n, self.outer.k);
        let mut message = Vec::with_capacity(self.message_bits());
        let (mut substitutions, mut failed_rows) = (0, 0);
        for b in 0..self.blocks {
            let mut data_rows = Vec::with_capacity(spc);
            for r in 0..spc {
                let received: Vec<Option<Elem>> =
                    (0..n).map(|j| chosen[b * n + j].as_ref().map(|p| p[r])).collect();
                let out = self.rs.decode(&received)?;
                substitutions += out.substitutions;
                match out.codeword {
                    Some(cw) => data_rows.push(cw[..k].to_vec()),
                    None => failed_rows += 1,
                }
            }
            if data_rows.len() == spc {
                for i in 0..k {
                    for row in &data_rows {
                        push_bits(&mut message, row[i] as u64, fb);
                    }
                }
            }
        }
        let erasures = columns.iter().filter(|c| matches!(c, ColumnStatus::Erased)).count();
        Ok(CodecReport {
            message: (failed_rows == 0).then_some(message),
            reads: statuses,
            columns,
            erasures,
            substitutions,
            failed_rows,
        })
    }
}

/// Fewest corrected errors, then plurality, then the smallest payload.
fn select_candidate(cands: &[(usize, Vec<Elem>)]) -> (usize, Vec<Elem>) {
    let best = cands.iter().map(|c| c.0).min().expect("non-empty candidate list");
    let mut tally: BTreeMap<&[Elem], usize> = BTreeMap::new();
    for (c, p) in cands {
        if *c == best {
            *tally.entry(p).or_default() += 1;
        }
    }
    let top = tally.values().copied().max().unwrap_or(0);
    let payload = tally.into_iter().find(|(_, n)| *n == top).map(|(p, _)| p.to_vec()).expect("tally non-empty");
    (best, payload)
}

fn push_bits(out: &mut Vec<bool>, value: u64, width: usize) {
    out.extend((0..width).rev().map(|t| value >> t & 1 == 1));
}

fn bits_to_u64(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |a, &b| a << 1 | b as u64)
}

fn bits_to_symbol(bits: &[bool]) -> Elem {
    bits_to_u64(bits) as Elem
}

pub fn encode(message: &[bool], layout: IndexLayout, outer: OuterCodeSpec, inner: InnerCodeSpec) -> Result<ReadPool> {
    IndexCodec::new(layout, outer, inner)?.encode(message)
}

pub fn decode(reads: &ReadPool, layout: IndexLayout, outer: OuterCodeSpec, inner: InnerCodeSpec) -> Result<CodecReport> {
    IndexCodec::new(layout, outer, inner)?.decode(reads)
}

pub fn rate_of(layout: IndexLayout, outer: OuterCodeSpec, inner: InnerCodeSpec) -> Result<f64> {
    Ok(IndexCodec::new(layout, outer, inner)?.rate())
}

/// Most-significant bit first within each byte.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes.iter().flat_map(|&b| (0..8).rev().map(move |t| b >> t & 1 == 1)).collect()
}

/// Inverse of [`bytes_to_bits`]; a trailing partial byte is zero-filled.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8).map(|c| c.iter().enumerate().fold(0u8, |a, (i, &b)| a | (b as u8) << (7 - i))).collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    use super::*;

    fn small_codec() -> IndexCodec {
        let layout = IndexLayout::new(8, 9, Alphabet::Binary).unwrap();
        IndexCodec::new(layout, OuterCodeSpec::new(8, 6).unwrap(), InnerCodeSpec::None).unwrap()
    }

    fn random_bits(n: usize, seed: u64) -> Vec<bool> {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random()).collect()
    }

    /// Nearest-codeword decoding by enumerating every message.
    fn brute_decode(rs: &ReedSolomon, k: usize, received: &[Option<Elem>]) -> Vec<Vec<Elem>> {
        let q = rs.field().order();
        let mut best = usize::MAX;
        let mut found = Vec::new();
        for m in 0..q.pow(k as u32) {
            let data: Vec<Elem> = (0..k).map(|i| ((m / q.pow(i as u32)) % q) as Elem).collect();
            let cw = rs.encode(&data).unwrap();
            let d = received.iter().zip(&cw).filter(|(r, c)| r.is_some_and(|y| y != **c)).count();
            if d < best {
                best = d;
                found.clear();
            }
            if d == best {
                found.push(cw);
            }
        }
        found
    }

    #[test]
    fn layout_example() {
        let codec = small_codec();
        assert_eq!(codec.outer.field_bits, 3);
        assert_eq!(codec.symbols_per_column(), 2);
        assert_eq!(codec.message_bits(), 36);
        let pool = codec.encode(&random_bits(36, 3)).unwrap();
        assert_eq!(pool.len(), 8);
        let mut seen = std::collections::BTreeSet::new();
        for (j, r) in pool.reads.iter().enumerate() {
            assert_eq!(r.len(), 9);
            let prefix = r.symbols()[..3].iter().fold(0usize, |a, &b| a << 1 | b as usize);
            assert_eq!(prefix, j);
            seen.insert(r.clone());
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn zero_message_and_determinism() {
        let codec = small_codec();
        let pool = codec.encode(&[false; 36]).unwrap();
        assert!(pool.reads.iter().all(|r| r.symbols()[3..].iter().all(|&s| s == 0)));
        let msg = random_bits(36, 9);
        assert_eq!(codec.encode(&msg).unwrap(), codec.encode(&msg).unwrap());
        assert!(matches!(codec.encode(&[false; 35]), Err(Error::Layout(_))));
    }

    #[test]
    fn erasure_patterns() {
        let codec = small_codec();
        let msg = random_bits(36, 5);
        let pool = codec.encode(&msg).unwrap();
        let mut ok = 0;
        for a in 0..8 {
            for b in a + 1..8 {
                let reads = pool.reads.iter().enumerate().filter(|(i, _)| *i != a && *i != b).map(|(_, r)| r.clone());
                let p = ReadPool::fixed(Alphabet::Binary, reads.collect()).unwrap();
                let rep = codec.decode(&p).unwrap();
                assert_eq!(rep.message.as_deref(), Some(&msg[..]));
                assert_eq!(rep.erasures, 2);
                ok += 1;
                for c in b + 1..8 {
                    let reads: Vec<_> = pool
                        .reads
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| ![a, b, c].contains(i))
                        .map(|(_, r)| r.clone())
                        .collect();
                    let rep = codec.decode(&ReadPool::fixed(Alphabet::Binary, reads).unwrap()).unwrap();
                    assert!(!rep.success());
                }
            }
        }
        assert_eq!(ok, 28);
    }

    #[test]
    fn rs_small_examples() {
        let spec = OuterCodeSpec::new(5, 3).unwrap();
        let rs = ReedSolomon::new(&spec).unwrap();
        let data = vec![5, 0, 7];
        let cw = rs.encode(&data).unwrap();
        assert_eq!(&cw[..3], &data[..]);
        let clean = rs.decode(&cw.iter().map(|&c| Some(c)).collect::<Vec<_>>()).unwrap();
        assert_eq!(clean.codeword.as_ref(), Some(&cw));
        for a in 0..5 {
            for b in a + 1..5 {
                let mut r: Vec<Option<Elem>> = cw.iter().map(|&c| Some(c)).collect();
                r[a] = None;
                r[b] = None;
                let out = rs.decode(&r).unwrap();
                assert_eq!(out.codeword.as_ref(), Some(&cw));
                assert_eq!(out.erasures, 2);
            }
        }
        for pos in 0..5 {
            for v in 0..8u16 {
                let mut r: Vec<Option<Elem>> = cw.iter().map(|&c| Some(c)).collect();
                r[pos] = Some(v);
                let out = rs.decode(&r).unwrap();
                assert_eq!(out.codeword.as_ref(), Some(&cw));
                assert_eq!(out.substitutions, usize::from(v != cw[pos]));
            }
        }
    }

    #[test]
    fn rs_against_nearest_codeword_oracle() {
        let spec = OuterCodeSpec::new(7, 3).unwrap();
        let rs = ReedSolomon::new(&spec).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(77);
        for _ in 0..300 {
            let data: Vec<Elem> = (0..3).map(|_| rng.random_range(0..8)).collect();
            let cw = rs.encode(&data).unwrap();
            let mut r: Vec<Option<Elem>> = cw.iter().map(|&c| Some(c)).collect();
            let e = rng.random_range(0..=4usize);
            let s = rng.random_range(0..=3usize);
            let mut pos: Vec<usize> = (0..7).collect();
            pos.shuffle(&mut rng);
            for &p in &pos[..e] {
                r[p] = None;
            }
            for &p in &pos[e..(e + s).min(7)] {
                r[p] = Some(rng.random_range(0..8));
            }
            let out = rs.decode(&r).unwrap();
            let nearest = brute_decode(&rs, 3, &r);
            let actual_s = r.iter().zip(&cw).filter(|(x, c)| x.is_some_and(|y| y != **c)).count();
            if e + 2 * actual_s <= 4 {
                assert_eq!(out.codeword.as_ref(), Some(&cw));
            }
            if let Some(got) = &out.codeword {
                // any decoded word is a unique nearest codeword within the bound
                assert_eq!(nearest, vec![got.clone()]);
                assert!(out.erasures + 2 * out.substitutions <= 4);
            }
        }
    }

    #[test]
    fn rate_examples() {
        let layout = IndexLayout::new(8, 9, Alphabet::Binary).unwrap();
        assert_eq!(rate_of(layout, OuterCodeSpec::new(8, 6).unwrap(), InnerCodeSpec::None).unwrap(), 0.5);
        let full = rate_of(layout, OuterCodeSpec::new(8, 8).unwrap(), InnerCodeSpec::None).unwrap();
        assert!((full - (1.0 - 1.0 / layout.beta())).abs() < 1e-15);
        let long = IndexLayout::new(8, 27, Alphabet::Binary).unwrap();
        let none = rate_of(long, OuterCodeSpec::new(8, 8).unwrap(), InnerCodeSpec::None).unwrap();
        let rep = rate_of(long, OuterCodeSpec::new(8, 8).unwrap(), InnerCodeSpec::Repetition { r: 3 }).unwrap();
        // 27 bits: 3-bit index + 24 payload bits; repetition keeps 9 info bits, 6 payload bits
        assert_eq!(none, 8.0 * 24.0 / 216.0);
        assert_eq!(rep, 8.0 * 6.0 / 216.0);
    }

    #[test]
    fn parity_product_corrects_every_single_error() {
        let code = InnerCodeSpec::ParityProduct { rows: 3, cols: 4 };
        let info = random_bits(12, 1);
        let coded = code.encode(&info, 20).unwrap();
        assert_eq!(coded.len(), 20);
        for i in 0..19 {
            let mut r: Vec<Option<bool>> = coded.iter().map(|&b| Some(b)).collect();
            r[i] = r[i].map(|b| !b);
            let (got, corrected) = code.decode(&r).unwrap();
            assert_eq!(got, info);
            assert_eq!(corrected, usize::from(i < 19));
        }
        // padding bit is ignored
        let mut r: Vec<Option<bool>> = coded.iter().map(|&b| Some(b)).collect();
        r[19] = Some(true);
        assert_eq!(code.decode(&r).unwrap(), (info.clone(), 0));
        r[0] = None;
        assert!(code.decode(&r).is_none());
    }

    #[test]
    fn repetition_votes() {
        let code = InnerCodeSpec::Repetition { r: 3 };
        let info = random_bits(4, 2);
        let coded = code.encode(&info, 13).unwrap();
        let mut r: Vec<Option<bool>> = coded.iter().map(|&b| Some(b)).collect();
        r[0] = r[0].map(|b| !b);
        assert_eq!(code.decode(&r).unwrap(), (info.clone(), 1));
        r[4] = None;
        // copies of bit 0: one flipped, one erased, one intact -> tie
        assert!(code.decode(&r).is_none());
        let code2 = InnerCodeSpec::Repetition { r: 2 };
        let c2 = code2.encode(&info, 8).unwrap();
        let mut r: Vec<Option<bool>> = c2.iter().map(|&b| Some(b)).collect();
        r[1] = None;
        assert_eq!(code2.decode(&r).unwrap(), (info, 0));
    }

    #[test]
    fn inner_spec_parsing() {
        for s in ["none", "rep:3", "pp:6x6"] {
            assert_eq!(s.parse::<InnerCodeSpec>().unwrap().to_string(), s);
        }
        assert!("pp:6".parse::<InnerCodeSpec>().is_err());
        assert_eq!("8,6".parse::<OuterCodeSpec>().unwrap(), OuterCodeSpec::new(8, 6).unwrap());
    }

    #[test]
    fn quaternary_and_multiblock_roundtrip() {
        let layout = IndexLayout::new(16, 10, Alphabet::Quaternary).unwrap();
        let codec = IndexCodec::new(layout, OuterCodeSpec::new(4, 3).unwrap(), InnerCodeSpec::None).unwrap();
        assert_eq!(codec.blocks(), 4);
        let msg = random_bits(codec.message_bits(), 4);
        let pool = codec.encode(&msg).unwrap();
        let rep = codec.decode(&pool).unwrap();
        assert_eq!(rep.message, Some(msg));
    }

    #[test]
    fn candidate_selection_rules() {
        let c = vec![(1, vec![3]), (0, vec![5]), (0, vec![4]), (0, vec![5])];
        assert_eq!(select_candidate(&c), (0, vec![5]));
        let c = vec![(0, vec![5]), (0, vec![4])];
        assert_eq!(select_candidate(&c), (0, vec![4]));
    }

    #[test]
    fn byte_bit_conversions() {
        assert_eq!(bytes_to_bits(&[0x80]), vec![true, false, false, false, false, false, false, false]);
        assert_eq!(bits_to_bytes(&[true, true]), vec![0xC0]);
    }

    proptest! {
        #[test]
        fn roundtrip_and_permutation_invariance(seed in any::<u64>(), k in 1usize..=16, inner_kind in 0u8..3) {
            let inner = match inner_kind {
                0 => InnerCodeSpec::None,
                1 => InnerCodeSpec::Repetition { r: 3 },
                _ => InnerCodeSpec::ParityProduct { rows: 4, cols: 4 },
            };
            let layout = IndexLayout::new(16, 24, Alphabet::Binary).unwrap();
            let codec = IndexCodec::new(layout, OuterCodeSpec::new(16, k).unwrap(), inner).unwrap();
            let msg = random_bits(codec.message_bits(), seed);
            let pool = codec.encode(&msg).unwrap();
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed ^ 1);
            let mut shuffled = pool.clone();
            shuffled.reads.shuffle(&mut rng);
            // duplicate a few reads
            for _ in 0..5 {
                let r = shuffled.reads[rng.random_range(0..16)].clone();
                shuffled.reads.push(r);
            }
            let a = codec.decode(&pool).unwrap();
            let b = codec.decode(&shuffled).unwrap();
            prop_assert_eq!(a.message.as_ref(), Some(&msg));
            prop_assert_eq!(b.message.as_ref(), Some(&msg));
            prop_assert_eq!(a.columns, b.columns.iter().map(|c| match c {
                ColumnStatus::Ok { corrected, .. } => ColumnStatus::Ok { corrected: *corrected, candidates: 1 },
                other => *other,
            }).collect::<Vec<_>>());
        }

        #[test]
        fn within_bound_always_corrects(seed in any::<u64>(), e in 0usize..=6) {
            let spec = OuterCodeSpec::new(16, 8).unwrap();
            let rs = ReedSolomon::new(&spec).unwrap();
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let data: Vec<Elem> = (0..8).map(|_| rng.random_range(0..16)).collect();
            let cw = rs.encode(&data).unwrap();
            let s = (8 - e) / 2;
            let mut pos: Vec<usize> = (0..16).collect();
            pos.shuffle(&mut rng);
            let mut r: Vec<Option<Elem>> = cw.iter().map(|&c| Some(c)).collect();
            for &p in &pos[..e] { r[p] = None; }
            for &p in &pos[e..e + s] { r[p] = Some(cw[p] ^ rng.random_range(1..16)); }
            let out = rs.decode(&r).unwrap();
            prop_assert_eq!(out.codeword, Some(cw));
            prop_assert_eq!((out.erasures, out.substitutions), (e, s));
        }
    }
}
