//! Binary words, generator-matrix codes, bias and distance, and the
//! exhaustive decoders used as ground truth everywhere else.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::Rational;

/// Default bound on the dimension of codes that may be enumerated.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Default number of generator matrices tried by [`random_balanced_code`].
pub const DEFAULT_SEARCH_BUDGET: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum F2Error {
    #[error("code dimension {dim} exceeds the enumeration cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("received word is outside the unique decoding radius")]
    OutsideUniqueRadius,
    #[error("no code with the requested bias found after {attempts} attempts")]
    SearchExhausted { attempts: usize },
    #[error("words must have positive length")]
    EmptyWord,
    #[error("generator rows are linearly dependent")]
    RankDeficient,
    #[error("parse error: {0}")]
    Parse(String),
}

/// A packed binary word of positive length.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    len: usize,
    blocks: Vec<u64>,
}

impl Word {
    pub fn zeros(len: usize) -> Result<Word, F2Error> {
        if len == 0 {
            return Err(F2Error::EmptyWord);
        }
        Ok(Word { len, blocks: vec![0; len.div_ceil(64)] })
    }

    pub fn ones(len: usize) -> Result<Word, F2Error> {
        let mut w = Word::zeros(len)?;
        for b in w.blocks.iter_mut() {
            *b = u64::MAX;
        }
        w.clear_tail();
        Ok(w)
    }

    pub fn from_bits(bits: &[u8]) -> Result<Word, F2Error> {
        let mut w = Word::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => w.set(i, true),
                _ => return Err(F2Error::Parse(format!("bit value {b} at position {i}"))),
            }
        }
        Ok(w)
    }

    /// Builds a word from the low `len` bits of `value` (bit i of the integer is position i).
    pub fn from_u64(value: u64, len: usize) -> Result<Word, F2Error> {
        if len > 64 {
            return Err(F2Error::LengthMismatch { expected: 64, found: len });
        }
        let mut w = Word::zeros(len)?;
        w.blocks[0] = value;
        w.clear_tail();
        Ok(w)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Word, F2Error> {
        let mut w = Word::zeros(len)?;
        for b in w.blocks.iter_mut() {
            *b = rng.gen();
        }
        w.clear_tail();
        Ok(w)
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            let last = self.blocks.len() - 1;
            self.blocks[last] &= (1u64 << r) - 1;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.blocks[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn bit(&self, i: usize) -> u8 {
        ((self.blocks[i >> 6] >> (i & 63)) & 1) as u8
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i & 63);
        if value {
            self.blocks[i >> 6] |= mask;
        } else {
            self.blocks[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.blocks[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn weight(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    fn check_len(&self, other: &Word) -> Result<(), F2Error> {
        if self.len != other.len {
            return Err(F2Error::LengthMismatch { expected: self.len, found: other.len });
        }
        Ok(())
    }

    pub fn xor_assign(&mut self, other: &Word) -> Result<(), F2Error> {
        self.check_len(other)?;
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a ^= *b;
        }
        Ok(())
    }

    pub fn xor(&self, other: &Word) -> Result<Word, F2Error> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn complement(&self) -> Word {
        let mut out = self.clone();
        for b in out.blocks.iter_mut() {
            *b = !*b;
        }
        out.clear_tail();
        out
    }

    /// Number of positions where the words differ.
    pub fn hamming(&self, other: &Word) -> Result<usize, F2Error> {
        self.check_len(other)?;
        Ok(self.blocks.iter().zip(&other.blocks).map(|(a, b)| (a ^ b).count_ones() as usize).sum())
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.bit(i)).collect()
    }

    /// ±1 encoding: bit b maps to (−1)^b.
    pub fn signs(&self) -> Vec<f64> {
        (0..self.len).map(|i| if self.get(i) { -1.0 } else { 1.0 }).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = F2Error;

    fn from_str(s: &str) -> Result<Word, F2Error> {
        let s = s.trim();
        let bits: Result<Vec<u8>, F2Error> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(F2Error::Parse(format!("unexpected character {c:?} in word"))),
            })
            .collect();
        Word::from_bits(&bits?)
    }
}

impl Ord for Word {
    /// Lexicographic order on the bit strings, position 1 first; shorter words first.
    fn cmp(&self, other: &Word) -> Ordering {
        if self.len != other.len {
            return self.len.cmp(&other.len);
        }
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            let d = a ^ b;
            if d != 0 {
                let low = d & d.wrapping_neg();
                return if a & low == 0 { Ordering::Less } else { Ordering::Greater };
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Word) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// |n − 2·weight| / n.
pub fn bias(w: &Word) -> Rational {
    let n = w.len() as i128;
    let wt = w.weight() as i128;
    Rational::new((n - 2 * wt).abs(), n)
}

pub fn relative_distance(a: &Word, b: &Word) -> Result<Rational, F2Error> {
    let d = a.hamming(b)?;
    Ok(Rational::new(d as i128, a.len() as i128))
}

/// A binary linear code given by linearly independent generator rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    len: usize,
    rows: Vec<Word>,
    enumeration_cap: usize,
}

impl LinearCode {
    pub fn new(rows: Vec<Word>) -> Result<LinearCode, F2Error> {
        let first = rows.first().ok_or(F2Error::RankDeficient)?;
        let len = first.len();
        for r in &rows {
            if r.len() != len {
                return Err(F2Error::LengthMismatch { expected: len, found: r.len() });
            }
        }
        if rank(&rows) != rows.len() {
            return Err(F2Error::RankDeficient);
        }
        Ok(LinearCode { len, rows, enumeration_cap: DEFAULT_ENUMERATION_CAP })
    }

    pub fn with_enumeration_cap(mut self, cap: usize) -> LinearCode {
        self.enumeration_cap = cap;
        self
    }

    pub fn enumeration_cap(&self) -> usize {
        self.enumeration_cap
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rows(&self) -> &[Word] {
        &self.rows
    }

    pub fn check_enumerable(&self) -> Result<(), F2Error> {
        if self.dim() > self.enumeration_cap || self.dim() >= 63 {
            return Err(F2Error::DimensionTooLarge { dim: self.dim(), cap: self.enumeration_cap });
        }
        Ok(())
    }

    pub fn encode(&self, message: &Word) -> Result<Word, F2Error> {
        if message.len() != self.dim() {
            return Err(F2Error::LengthMismatch { expected: self.dim(), found: message.len() });
        }
        let mut out = Word::zeros(self.len)?;
        for (i, row) in self.rows.iter().enumerate() {
            if message.get(i) {
                out.xor_assign(row)?;
            }
        }
        Ok(out)
    }

    /// Codeword for the message whose bit i is bit i of `m`.
    pub fn encode_index(&self, m: u64) -> Word {
        let mut out = Word::zeros(self.len).expect("positive length");
        for (i, row) in self.rows.iter().enumerate() {
            if (m >> i) & 1 == 1 {
                out.xor_assign(row).expect("rows share the block length");
            }
        }
        out
    }

    /// Visits every (message index, codeword) pair in Gray-code order.
    pub fn for_each_codeword<F: FnMut(u64, &Word)>(&self, mut f: F) -> Result<(), F2Error> {
        self.check_enumerable()?;
        let mut current = Word::zeros(self.len)?;
        let mut msg = 0u64;
        f(0, &current);
        for step in 1u64..(1u64 << self.dim()) {
            let bit = step.trailing_zeros() as usize;
            current.xor_assign(&self.rows[bit])?;
            msg ^= 1 << bit;
            f(msg, &current);
        }
        Ok(())
    }

    pub fn codewords(&self) -> Result<Vec<Word>, F2Error> {
        let mut out = Vec::with_capacity(1 << self.dim().min(24));
        self.for_each_codeword(|_, w| out.push(w.clone()))?;
        Ok(out)
    }

    /// Recovers the message of a codeword by Gaussian elimination; `None` if not a codeword.
    pub fn message_of(&self, codeword: &Word) -> Result<Option<Word>, F2Error> {
        if codeword.len() != self.len {
            return Err(F2Error::LengthMismatch { expected: self.len, found: codeword.len() });
        }
        // Row-reduce [G | I] and track combinations.
        let d = self.dim();
        let mut rows: Vec<(Word, Word)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut tag = Word::zeros(d).expect("dim > 0");
                tag.set(i, true);
                (r.clone(), tag)
            })
            .collect();
        let mut target = codeword.clone();
        let mut combo = Word::zeros(d)?;
        let mut pivot_row = 0;
        for col in 0..self.len {
            if pivot_row == d {
                break;
            }
            let Some(p) = (pivot_row..d).find(|&r| rows[r].0.get(col)) else { continue };
            rows.swap(pivot_row, p);
            let (pr, pt) = rows[pivot_row].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != pivot_row && row.0.get(col) {
                    row.0.xor_assign(&pr)?;
                    row.1.xor_assign(&pt)?;
                }
            }
            if target.get(col) {
                target.xor_assign(&pr)?;
                combo.xor_assign(&pt)?;
            }
            pivot_row += 1;
        }
        Ok(if target.is_zero() { Some(combo) } else { None })
    }

    /// Minimum Hamming weight of a nonzero codeword.
    pub fn min_distance(&self) -> Result<usize, F2Error> {
        let mut best = usize::MAX;
        self.for_each_codeword(|m, w| {
            if m != 0 {
                best = best.min(w.weight());
            }
        })?;
        Ok(best)
    }
}

/// Rank over GF(2) of a set of equal-length words.
pub fn rank(rows: &[Word]) -> usize {
    let mut basis: Vec<Word> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for r in rows {
        let mut v = r.clone();
        for (b, &p) in basis.iter().zip(&pivots) {
            if v.get(p) {
                v.xor_assign(b).expect("equal lengths");
            }
        }
        if let Some(p) = (0..v.len()).find(|&i| v.get(i)) {
            basis.push(v);
            pivots.push(p);
        }
    }
    basis.len()
}

/// Maximum bias over the nonzero codewords.
pub fn code_bias(c: &LinearCode) -> Result<Rational, F2Error> {
    let n = c.len() as i128;
    let mut worst = 0i128;
    c.for_each_codeword(|m, w| {
        if m != 0 {
            worst = worst.max((n - 2 * w.weight() as i128).abs());
        }
    })?;
    Ok(Rational::new(worst, n))
}

/// All codewords within relative distance `radius` of `y`, in lexicographic order.
pub fn brute_force_list_decode(c: &LinearCode, y: &Word, radius: Rational) -> Result<Vec<Word>, F2Error> {
    if y.len() != c.len() {
        return Err(F2Error::LengthMismatch { expected: c.len(), found: y.len() });
    }
    let n = c.len() as i128;
    let mut out = Vec::new();
    c.for_each_codeword(|_, w| {
        let d = w.hamming(y).expect("lengths checked") as i128;
        if Rational::new(d, n) <= radius {
            out.push(w.clone());
        }
    })?;
    out.sort();
    Ok(out)
}

/// The codeword strictly closer than half the minimum distance, if any.
pub fn brute_force_unique_decode(c: &LinearCode, y: &Word) -> Result<Word, F2Error> {
    if y.len() != c.len() {
        return Err(F2Error::LengthMismatch { expected: c.len(), found: y.len() });
    }
    let dmin = c.min_distance()?;
    let mut found = None;
    c.for_each_codeword(|_, w| {
        let d = w.hamming(y).expect("lengths checked");
        if 2 * d < dmin {
            found = Some(w.clone());
        }
    })?;
    found.ok_or(F2Error::OutsideUniqueRadius)
}

/// Seeded rejection search for a code of the given shape with `code_bias ≤ eps0`.
pub fn random_balanced_code(dim: usize, len: usize, eps0: Rational, seed: u64) -> Result<LinearCode, F2Error> {
    random_balanced_code_with_budget(dim, len, eps0, seed, DEFAULT_SEARCH_BUDGET)
}

pub fn random_balanced_code_with_budget(
    dim: usize,
    len: usize,
    eps0: Rational,
    seed: u64,
    budget: usize,
) -> Result<LinearCode, F2Error> {
    if dim > DEFAULT_ENUMERATION_CAP {
        return Err(F2Error::DimensionTooLarge { dim, cap: DEFAULT_ENUMERATION_CAP });
    }
    if dim == 0 || len == 0 {
        return Err(F2Error::EmptyWord);
    }
    if dim > len {
        return Err(F2Error::RankDeficient);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget {
        let rows: Result<Vec<Word>, F2Error> = (0..dim).map(|_| Word::random(len, &mut rng)).collect();
        let Ok(code) = LinearCode::new(rows?) else { continue };
        if code_bias(&code)? <= eps0 {
            return Ok(code);
        }
    }
    Err(F2Error::SearchExhausted { attempts: budget })
}

/// Whether relative distance d/n is at most 1/2 − √η, decided exactly.
pub fn within_list_radius(distance: usize, n: usize, eta: Rational) -> bool {
    let r = Rational::new(1, 2) - Rational::new(distance as i128, n as i128);
    if r < Rational::zero() {
        return false;
    }
    eta <= r * r
}

/// Parses the code file format: `code <dim> <len>` then one generator row per line.
pub fn parse_code(text: &str) -> Result<LinearCode, F2Error> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| F2Error::Parse("missing code header".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "code" {
        return Err(F2Error::Parse(format!("bad code header {header:?}")));
    }
    let dim: usize = parts[1].parse().map_err(|_| F2Error::Parse("bad dimension".into()))?;
    let len: usize = parts[2].parse().map_err(|_| F2Error::Parse("bad length".into()))?;
    let rows: Vec<Word> = lines.take(dim).map(Word::from_str).collect::<Result<_, _>>()?;
    if rows.len() != dim {
        return Err(F2Error::Parse(format!("expected {dim} generator rows, found {}", rows.len())));
    }
    for r in &rows {
        if r.len() != len {
            return Err(F2Error::LengthMismatch { expected: len, found: r.len() });
        }
    }
    LinearCode::new(rows)
}

pub fn format_code(c: &LinearCode) -> String {
    let mut out = format!("code {} {}\n", c.dim(), c.len());
    for r in c.rows() {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

/// Parses a word file: one 0/1 string per line.
pub fn parse_words(text: &str) -> Result<Vec<Word>, F2Error> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(Word::from_str).collect()
}

pub fn format_words(words: &[Word]) -> String {
    let mut out = String::new();
    for w in words {
        out.push_str(&w.to_string());
        out.push('\n');
    }
    out
}

/// In-place Walsh–Hadamard transform: afterwards `a[z] = Σ_x a[x]·(−1)^{popcount(x & z)}`.
pub fn walsh_hadamard(a: &mut [i64]) {
    let n = a.len();
    assert!(n.is_power_of_two(), "transform length must be a power of two");
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (x, y) = (a[i], a[i + h]);
                a[i] = x + y;
                a[i + h] = x - y;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn code(rows: &[&str]) -> LinearCode {
        LinearCode::new(rows.iter().map(|r| w(r)).collect()).unwrap()
    }

    fn q(a: i128, b: i128) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn bias_examples() {
        assert_eq!(bias(&w("0000")), q(1, 1));
        assert_eq!(bias(&w("0011")), q(0, 1));
        assert_eq!(bias(&w("0111")), q(1, 2));
    }

    #[test]
    fn bias_matches_signed_average_exhaustively() {
        for n in 1..=12usize {
            for v in 0u64..(1 << n) {
                let word = Word::from_u64(v, n).unwrap();
                let signed: i128 = (0..n).map(|i| if (v >> i) & 1 == 1 { -1 } else { 1 }).sum();
                assert_eq!(bias(&word), Rational::new(signed.abs(), n as i128));
            }
        }
    }

    #[test]
    fn code_bias_examples() {
        assert_eq!(code_bias(&code(&["011", "101"])).unwrap(), q(1, 3));
        assert_eq!(code_bias(&code(&["0101", "0011"])).unwrap(), q(0, 1));
        assert_eq!(code_bias(&code(&["11"])).unwrap(), q(1, 1));
    }

    #[test]
    fn code_bias_rejects_large_dimension() {
        let c = code(&["100", "010", "001"]).with_enumeration_cap(2);
        assert!(matches!(code_bias(&c), Err(F2Error::DimensionTooLarge { dim: 3, cap: 2 })));
    }

    #[test]
    fn relative_distance_examples() {
        assert_eq!(relative_distance(&w("0000"), &w("0000")).unwrap(), q(0, 1));
        assert_eq!(relative_distance(&w("0000"), &w("1111")).unwrap(), q(1, 1));
        assert_eq!(relative_distance(&w("1010"), &w("1001")).unwrap(), q(1, 2));
        assert!(matches!(relative_distance(&w("10"), &w("100")), Err(F2Error::LengthMismatch { .. })));
    }

    #[test]
    fn list_decode_examples() {
        let rep = code(&["111"]);
        assert_eq!(brute_force_list_decode(&rep, &w("001"), q(1, 3)).unwrap(), vec![w("000")]);
        assert_eq!(brute_force_list_decode(&rep, &w("001"), q(1, 1)).unwrap(), vec![w("000"), w("111")]);
        // Distances from 0100: 0000→1, 0101→1, 0011→3, 0110→1.
        let c = code(&["0101", "0011"]);
        assert_eq!(brute_force_list_decode(&c, &w("0100"), q(1, 4)).unwrap(), vec![w("0000"), w("0101"), w("0110")]);
        assert_eq!(brute_force_list_decode(&c, &w("0100"), q(0, 1)).unwrap(), vec![]);
    }

    #[test]
    fn unique_decode_examples() {
        let rep = code(&["111"]);
        assert_eq!(brute_force_unique_decode(&rep, &w("100")).unwrap(), w("000"));
        assert_eq!(brute_force_unique_decode(&rep, &w("000")).unwrap(), w("000"));
        let rep4 = code(&["1111"]);
        assert_eq!(brute_force_unique_decode(&rep4, &w("1100")), Err(F2Error::OutsideUniqueRadius));
    }

    #[test]
    fn random_code_examples() {
        let c = random_balanced_code(1, 2, q(0, 1), 3).unwrap();
        assert_eq!(c.dim(), 1);
        assert_eq!(code_bias(&c).unwrap(), q(0, 1));
        let c = random_balanced_code(2, 4, q(0, 1), 1).unwrap();
        let mut words = c.codewords().unwrap();
        words.sort();
        // Every bias-0 two-dimensional code of length 4 has three weight-2 nonzero words.
        assert!(words[1..].iter().all(|x| x.weight() == 2));
        let c = random_balanced_code(4, 16, q(1, 4), 7).unwrap();
        assert!(code_bias(&c).unwrap() <= q(1, 4));
        assert_eq!(random_balanced_code(4, 16, q(1, 4), 7).unwrap(), c);
    }

    #[test]
    fn random_code_search_exhausts() {
        assert_eq!(
            random_balanced_code_with_budget(2, 2, q(0, 1), 1, 50),
            Err(F2Error::SearchExhausted { attempts: 50 })
        );
    }

    #[test]
    fn words_sort_lexicographically() {
        let mut v = vec![w("110"), w("011"), w("100"), w("001")];
        v.sort();
        assert_eq!(v, vec![w("001"), w("011"), w("100"), w("110")]);
    }

    #[test]
    fn message_recovery() {
        let c = code(&["1100", "0110", "0011"]);
        for m in 0..8u64 {
            let msg = Word::from_u64(m, 3).unwrap();
            let cw = c.encode(&msg).unwrap();
            assert_eq!(c.message_of(&cw).unwrap(), Some(msg));
        }
        assert_eq!(c.message_of(&w("1000")).unwrap(), None);
    }

    #[test]
    fn code_file_round_trip() {
        let c = code(&["0101", "0011"]);
        let text = format_code(&c);
        assert_eq!(text, "code 2 4\n0101\n0011\n");
        assert_eq!(parse_code(&text).unwrap(), c);
        assert!(parse_code("code 2 4\n0101\n").is_err());
        assert_eq!(parse_words("01\n10\n").unwrap(), vec![w("01"), w("10")]);
    }

    #[test]
    fn walsh_hadamard_matches_direct_sums() {
        let a0: Vec<i64> = vec![3, 0, 1, 5, 2, 2, 0, 7];
        let mut a = a0.clone();
        walsh_hadamard(&mut a);
        for (z, &got) in a.iter().enumerate() {
            let direct: i64 = (0..8usize).map(|x| if (x & z).count_ones() % 2 == 0 { a0[x] } else { -a0[x] }).sum();
            assert_eq!(got, direct);
        }
    }

    #[test]
    fn list_radius_is_exact() {
        // 1/2 − √(1/16) = 1/4
        assert!(within_list_radius(4, 16, q(1, 16)));
        assert!(!within_list_radius(5, 16, q(1, 16)));
        assert!(!within_list_radius(9, 16, q(0, 1)));
    }
}
