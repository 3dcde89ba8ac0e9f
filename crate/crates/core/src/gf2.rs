//! Bit-packed vectors and matrices over GF(2) with exact elimination.

use rand::Rng;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, words: vec![0; words_for(len)] }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Low `len` bits of `value`, bit `i` at position `i`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = if len == 64 { value } else { value & ((1u64 << len) - 1) };
        }
        v
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = rng.random();
        }
        v.mask_tail();
        v
    }

    fn mask_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(w) = self.words.last_mut() {
                *w &= (1u64 << r) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

fn dot_words(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).fold(0u32, |acc, (x, y)| acc ^ (x & y).count_ones()) & 1 == 1
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BinaryMatrix { rows, cols, stride, data: vec![0; rows * stride] }
    }

    /// I.i.d. fair-coin entries.
    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        let tail = cols % 64;
        for r in 0..rows {
            let row = m.row_mut(r);
            for w in row.iter_mut() {
                *w = rng.random();
            }
            if tail != 0 {
                if let Some(w) = row.last_mut() {
                    *w &= (1u64 << tail) - 1;
                }
            }
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            m.row_mut(i).copy_from_slice(r.words());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_vector(&self, r: usize) -> BitVector {
        BitVector { len: self.cols, words: self.row(r).to_vec() }
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row(r)[c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        let m = 1u64 << (c % 64);
        let w = &mut self.row_mut(r)[c / 64];
        if bit {
            *w |= m;
        } else {
            *w &= !m;
        }
    }

    /// `A·x`.
    pub fn mul_vec(&self, x: &BitVector) -> BitVector {
        assert_eq!(x.len(), self.cols);
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            out.set(r, dot_words(self.row(r), x.words()));
        }
        out
    }

    /// Bit `r` of `A·x` without forming the whole product.
    pub fn row_dot(&self, r: usize, x: &BitVector) -> bool {
        dot_words(self.row(r), x.words())
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate(None).rank
    }

    /// Rank of `A` and whether `A·t = y` has a solution.
    pub fn solve_status(&self, y: &BitVector) -> Elimination {
        assert_eq!(y.len(), self.rows);
        self.clone().eliminate(Some(y.clone()))
    }

    /// Gauss–Jordan elimination in place; tracks the right-hand side when given.
    fn eliminate(mut self, mut rhs: Option<BitVector>) -> Elimination {
        let mut pivot_row = 0;
        let mut pivots = Vec::new();
        for c in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let (w, bit) = (c / 64, 1u64 << (c % 64));
            let Some(found) = (pivot_row..self.rows).find(|&r| self.data[r * self.stride + w] & bit != 0) else {
                continue;
            };
            if found != pivot_row {
                for k in 0..self.stride {
                    self.data.swap(found * self.stride + k, pivot_row * self.stride + k);
                }
                if let Some(y) = rhs.as_mut() {
                    let (a, b) = (y.get(found), y.get(pivot_row));
                    y.set(found, b);
                    y.set(pivot_row, a);
                }
            }
            for r in 0..self.rows {
                if r != pivot_row && self.data[r * self.stride + w] & bit != 0 {
                    for k in 0..self.stride {
                        let v = self.data[pivot_row * self.stride + k];
                        self.data[r * self.stride + k] ^= v;
                    }
                    if let Some(y) = rhs.as_mut() {
                        let yp = y.get(pivot_row);
                        if yp {
                            let cur = y.get(r);
                            y.set(r, !cur);
                        }
                    }
                }
            }
            pivots.push(c);
            pivot_row += 1;
        }
        let rank = pivot_row;
        let (consistent, solution) = match rhs {
            None => (true, None),
            Some(y) => {
                let ok = (rank..self.rows).all(|r| !y.get(r));
                let sol = ok.then(|| {
                    let mut t = BitVector::zeros(self.cols);
                    for (i, &c) in pivots.iter().enumerate() {
                        t.set(c, y.get(i));
                    }
                    t
                });
                (ok, sol)
            }
        };
        Elimination { rank, consistent, particular: solution }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elimination {
    pub rank: usize,
    pub consistent: bool,
    /// A solution with free variables set to zero, when consistent.
    pub particular: Option<BitVector>,
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::SeedableRng;

    use super::*;

    /// Rank by brute force: the dimension of the row span, from enumerating
    /// all 2^rows combinations.
    fn brute_rank(m: &BinaryMatrix) -> usize {
        let mut span = std::collections::HashSet::new();
        for mask in 0u32..(1 << m.rows()) {
            let mut acc = BitVector::zeros(m.cols());
            for r in 0..m.rows() {
                if mask >> r & 1 == 1 {
                    acc.xor_assign(&m.row_vector(r));
                }
            }
            span.insert(acc);
        }
        span.len().trailing_zeros() as usize
    }

    #[test]
    fn identity_rank() {
        let mut m = BinaryMatrix::zeros(70, 70);
        for i in 0..70 {
            m.set(i, i, true);
        }
        assert_eq!(m.rank(), 70);
        let x = BitVector::random(70, &mut rand_chacha::ChaCha20Rng::seed_from_u64(1));
        assert_eq!(m.mul_vec(&x), x);
    }

    #[test]
    fn inconsistent_system_detected() {
        let mut m = BinaryMatrix::zeros(2, 1);
        m.set(0, 0, true);
        m.set(1, 0, true);
        let y = BitVector::from_bools(&[true, false]);
        let e = m.solve_status(&y);
        assert_eq!((e.rank, e.consistent), (1, false));
    }

    proptest! {
        #[test]
        fn rank_matches_span_size(seed in any::<u64>(), rows in 1usize..8, cols in 1usize..80) {
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let m = BinaryMatrix::random(rows, cols, &mut rng);
            prop_assert_eq!(m.rank(), brute_rank(&m));
            prop_assert!(m.rank() <= rows.min(cols));
        }

        #[test]
        fn solution_solves(seed in any::<u64>(), rows in 1usize..40, cols in 1usize..90) {
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let m = BinaryMatrix::random(rows, cols, &mut rng);
            let t = BitVector::random(cols, &mut rng);
            let y = m.mul_vec(&t);
            let e = m.solve_status(&y);
            prop_assert!(e.consistent);
            prop_assert_eq!(m.mul_vec(e.particular.as_ref().unwrap()), y);
        }

        #[test]
        fn linearity(seed in any::<u64>(), rows in 1usize..50, cols in 1usize..130) {
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let m = BinaryMatrix::random(rows, cols, &mut rng);
            let a = BitVector::random(cols, &mut rng);
            let b = BitVector::random(cols, &mut rng);
            let mut ab = a.clone();
            ab.xor_assign(&b);
            let mut lhs = m.mul_vec(&a);
            lhs.xor_assign(&m.mul_vec(&b));
            prop_assert_eq!(m.mul_vec(&ab), lhs);
        }
    }
}
