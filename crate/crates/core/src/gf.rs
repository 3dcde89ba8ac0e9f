//! Arithmetic in GF(2^m), 2 ≤ m ≤ 16, and dense polynomials over it.
//!
//! Elements are `u16` in the polynomial basis. Polynomials are coefficient
//! vectors, lowest degree first, kept trimmed (no trailing zeros; the zero
//! polynomial is the empty vector).

use crate::error::{Error, Result};

pub type Elem = u16;
pub type Poly = Vec<Elem>;

/// Primitive polynomials including the leading term, indexed by `m`.
const PRIMITIVE: [u32; 17] = [
    0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443, 0x8003, 0x1100B,
];

#[derive(Clone, Debug)]
pub struct Gf2m {
    bits: u32,
    order: usize,
    exp: Vec<Elem>,
    log: Vec<u32>,
}

impl Gf2m {
    pub fn new(bits: u32) -> Result<Self> {
        if !(2..=16).contains(&bits) {
            return Err(Error::Domain(format!("field size 2^{bits} not supported (need 2..=16)")));
        }
        let order = 1usize << bits;
        let poly = PRIMITIVE[bits as usize];
        let mut exp = vec![0 as Elem; 2 * order];
        let mut log = vec![0u32; order];
        let mut x: u32 = 1;
        #[allow(clippy::needless_range_loop)]
        for i in 0..order - 1 {
            if i > 0 && x == 1 {
                return Err(Error::Domain(format!("polynomial {poly:#x} is not primitive")));
            }
            exp[i] = x as Elem;
            log[x as usize] = i as u32;
            x <<= 1;
            if x & order as u32 != 0 {
                x ^= poly;
            }
        }
        for i in order - 1..2 * order {
            exp[i] = exp[i - (order - 1)];
        }
        Ok(Gf2m { bits, order, exp, log })
    }

    /// Smallest supported field with at least `n` elements.
    pub fn with_at_least(n: usize) -> Result<Self> {
        let bits = (usize::BITS - n.saturating_sub(1).leading_zeros()).max(2);
        Self::new(bits)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        assert!(a != 0, "inverse of zero");
        self.exp[(self.order - 1 - self.log[a as usize] as usize) % (self.order - 1)]
    }

    #[inline]
    pub fn div(&self, a: Elem, b: Elem) -> Elem {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = (self.log[a as usize] as u64 * e) % (self.order as u64 - 1);
        self.exp[l as usize]
    }

    pub fn contains(&self, a: Elem) -> bool {
        (a as usize) < self.order
    }

    // polynomial helpers

    pub fn trim(p: &mut Poly) {
        while p.last() == Some(&0) {
            p.pop();
        }
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(p: &[Elem]) -> Option<usize> {
        p.iter().rposition(|&c| c != 0)
    }

    pub fn eval(&self, p: &[Elem], x: Elem) -> Elem {
        p.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }

    pub fn poly_add(&self, a: &[Elem], b: &[Elem]) -> Poly {
        let mut out: Poly = (0..a.len().max(b.len()))
            .map(|i| a.get(i).copied().unwrap_or(0) ^ b.get(i).copied().unwrap_or(0))
            .collect();
        Self::trim(&mut out);
        out
    }

    pub fn poly_mul(&self, a: &[Elem], b: &[Elem]) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= self.mul(x, y);
            }
        }
        Self::trim(&mut out);
        out
    }

    /// Euclidean division `a = q·b + r` with `deg r < deg b`.
    pub fn poly_divrem(&self, a: &[Elem], b: &[Elem]) -> (Poly, Poly) {
        let db = Self::degree(b).expect("division by the zero polynomial");
        let mut r: Poly = a.to_vec();
        Self::trim(&mut r);
        if r.len() <= db {
            return (Vec::new(), r);
        }
        let lead_inv = self.inv(b[db]);
        let mut q = vec![0; r.len() - db];
        for i in (db..r.len()).rev() {
            let c = r[i];
            if c == 0 {
                continue;
            }
            let f = self.mul(c, lead_inv);
            q[i - db] = f;
            for j in 0..=db {
                r[i - db + j] ^= self.mul(f, b[j]);
            }
        }
        Self::trim(&mut q);
        r.truncate(db);
        Self::trim(&mut r);
        (q, r)
    }

    /// `∏ (x - x_i)`.
    pub fn vanishing(&self, points: &[Elem]) -> Poly {
        let mut out: Poly = vec![1];
        for &x in points {
            out.push(0);
            for i in (1..out.len()).rev() {
                out[i] = out[i - 1] ^ self.mul(out[i], x);
            }
            out[0] = self.mul(out[0], x);
        }
        out
    }

    /// The unique polynomial of degree `< points.len()` through the given
    /// points (Newton divided differences). Points must be distinct.
    pub fn interpolate(&self, xs: &[Elem], ys: &[Elem]) -> Poly {
        assert_eq!(xs.len(), ys.len());
        let n = xs.len();
        let mut coef = ys.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                let num = coef[i] ^ coef[i - 1];
                let den = xs[i] ^ xs[i - j];
                coef[i] = self.div(num, den);
            }
        }
        // expand the Newton form by Horner's scheme from the top
        let mut out: Poly = Vec::with_capacity(n);
        for i in (0..n).rev() {
            // out = out·(x - xs[i]) + coef[i]
            out.push(0);
            for t in (1..out.len()).rev() {
                out[t] = out[t - 1] ^ self.mul(out[t], xs[i]);
            }
            out[0] = self.mul(out[0], xs[i]) ^ coef[i];
        }
        Self::trim(&mut out);
        out
    }
}
