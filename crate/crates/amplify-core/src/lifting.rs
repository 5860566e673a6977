//! Direct-sum lifting over tuple collections, parity-sampling measurement, split and
//! swap operators, splitting trees, splittability certificates and code cascades.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::f2::{walsh_hadamard, F2Error, LinearCode, Word};
use crate::graphs::RotationGraph;
use crate::rpp::{ProductError, WideReplacementProduct, DEFAULT_WALK_CAP};
use crate::spectra::{matrix_singular_values, RealOperator, SpectraError, DEFAULT_DIM_CAP};
use crate::Rational;

/// Largest ground set for exhaustive parity-sampling measurement.
pub const EXHAUSTIVE_GROUND_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiftError {
    #[error(transparent)]
    F2(#[from] F2Error),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("ground set of size {n} exceeds the exhaustive cap {cap}")]
    GroundSetTooLarge { n: usize, cap: usize },
    #[error("{count} tuples exceed the walk cap {cap}")]
    TooManyWalks { count: u128, cap: usize },
    #[error("operator of size {rows}x{cols} exceeds the dimension cap {cap}")]
    TooLarge { rows: u128, cols: u128, cap: usize },
    #[error("bad split indices: {0}")]
    BadIndices(String),
    #[error("r = {r} is not -1 mod s = {s}")]
    BadResidue { r: usize, s: usize },
    #[error("invalid collection: {0}")]
    InvalidCollection(String),
    #[error("invalid splitting tree: {0}")]
    InvalidTree(String),
    #[error("bad arity: {0}")]
    BadArity(String),
    #[error("lifted generator rows are linearly dependent")]
    NotInjective,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Where a collection's tuples came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// W[k1,k2] on a replacement product, entries are outer-graph vertices.
    ProductWalks {
        k1: usize,
        k2: usize,
    },
    /// Walks over a cascade level through the swap operator; each entry is a walk of `block` vertices.
    SwapWalks {
        level: usize,
        block: usize,
    },
    ExpanderWalks,
    Explicit,
}

/// A nonempty multiset of k-tuples over [n] with the uniform measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkCollection {
    arity: usize,
    ground: usize,
    tuples: Vec<u32>,
    provenance: Provenance,
    product_vertices: Option<Vec<u32>>,
}

impl WalkCollection {
    pub fn new(
        arity: usize,
        ground: usize,
        tuples: Vec<u32>,
        provenance: Provenance,
    ) -> Result<WalkCollection, LiftError> {
        if arity == 0 || ground == 0 {
            return Err(LiftError::InvalidCollection("arity and ground set must be positive".into()));
        }
        if tuples.is_empty() || !tuples.len().is_multiple_of(arity) {
            return Err(LiftError::InvalidCollection(format!(
                "{} entries do not form a nonempty list of {arity}-tuples",
                tuples.len()
            )));
        }
        if let Some(&bad) = tuples.iter().find(|&&e| e as usize >= ground) {
            return Err(LiftError::InvalidCollection(format!("entry {bad} outside [{ground}]")));
        }
        Ok(WalkCollection { arity, ground, tuples, provenance, product_vertices: None })
    }

    pub fn explicit(arity: usize, ground: usize, tuples: Vec<u32>) -> Result<WalkCollection, LiftError> {
        WalkCollection::new(arity, ground, tuples, Provenance::Explicit)
    }

    /// The G-projection of a replacement-product walk space, keeping the product vertices alongside.
    pub fn from_walk_space(
        p: &WideReplacementProduct,
        k1: usize,
        k2: usize,
        cap: usize,
    ) -> Result<WalkCollection, LiftError> {
        let space = p.enumerate_walks_capped(k1, k2, cap)?;
        let mut c = WalkCollection::new(
            space.walk_len(),
            p.outer().n(),
            space.outer_projection(),
            Provenance::ProductWalks { k1, k2 },
        )?;
        c.product_vertices = Some(space.into_vertices());
        Ok(c)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn count(&self) -> usize {
        self.tuples.len() / self.arity
    }

    pub fn tuple(&self, i: usize) -> &[u32] {
        &self.tuples[i * self.arity..(i + 1) * self.arity]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.tuples.chunks(self.arity)
    }

    pub fn tuples(&self) -> &[u32] {
        &self.tuples
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Product vertices of each walk, for collections built from a walk space.
    pub fn product_vertices(&self) -> Option<&[u32]> {
        self.product_vertices.as_deref()
    }
}

/// Collection file: `walks <k> <n>` then one tuple of 0-based entries per line.
pub fn parse_walks(text: &str) -> Result<WalkCollection, LiftError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| LiftError::Parse("empty collection file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "walks" {
        return Err(LiftError::Parse(format!("expected `walks <k> <n>`, found `{header}`")));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|e| LiftError::Parse(format!("{s}: {e}")));
    let (arity, ground) = (num(fields[1])?, num(fields[2])?);
    let mut tuples = Vec::new();
    for line in lines {
        let entries: Vec<&str> =
            line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if entries.len() != arity {
            return Err(LiftError::Parse(format!("tuple `{line}` does not have {arity} entries")));
        }
        for e in entries {
            tuples.push(e.parse::<u32>().map_err(|err| LiftError::Parse(format!("{e}: {err}")))?);
        }
    }
    WalkCollection::explicit(arity, ground, tuples)
}

pub fn format_walks(w: &WalkCollection) -> String {
    let mut out = format!("walks {} {}\n", w.arity, w.ground);
    for t in w.iter() {
        let parts: Vec<String> = t.iter().map(u32::to_string).collect();
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}

/// Bit per tuple: the XOR of z over the tuple's entries.
pub fn direct_sum_lift(z: &Word, w: &WalkCollection) -> Result<Word, LiftError> {
    if z.len() != w.ground {
        return Err(LiftError::LengthMismatch { expected: w.ground, found: z.len() });
    }
    direct_sum_lift_tuples(z, &w.tuples, w.arity)
}

/// [`direct_sum_lift`] over a flat tuple list.
pub fn direct_sum_lift_tuples(z: &Word, tuples: &[u32], arity: usize) -> Result<Word, LiftError> {
    if arity == 0 || tuples.is_empty() || !tuples.len().is_multiple_of(arity) {
        return Err(LiftError::InvalidCollection("flat tuple list does not match the arity".into()));
    }
    if let Some(&bad) = tuples.iter().find(|&&e| e as usize >= z.len()) {
        return Err(LiftError::LengthMismatch { expected: bad as usize + 1, found: z.len() });
    }
    let mut out = Word::zeros(tuples.len() / arity)?;
    for (j, t) in tuples.chunks(arity).enumerate() {
        if t.iter().fold(false, |acc, &e| acc ^ z.get(e as usize)) {
            out.set(j, true);
        }
    }
    Ok(out)
}

/// The lifted code: the lift of every generator row, with injectivity checked by rank.
pub fn lift_code(c: &LinearCode, w: &WalkCollection) -> Result<LinearCode, LiftError> {
    let rows = c.rows().iter().map(|r| direct_sum_lift(r, w)).collect::<Result<Vec<_>, _>>()?;
    lift_rows(rows, c.enumeration_cap())
}

fn lift_rows(rows: Vec<Word>, cap: usize) -> Result<LinearCode, LiftError> {
    match LinearCode::new(rows) {
        Ok(code) => Ok(code.with_enumeration_cap(cap)),
        Err(F2Error::RankDeficient) => Err(LiftError::NotInjective),
        Err(e) => Err(e.into()),
    }
}

/// Σ_tuples (−1)^{⟨z, tuple⟩} for every z ∈ F_2^n, indexed by z with bit i = z_i.
pub fn lifted_bias_sums(w: &WalkCollection) -> Result<Vec<i64>, LiftError> {
    if w.ground > EXHAUSTIVE_GROUND_CAP {
        return Err(LiftError::GroundSetTooLarge { n: w.ground, cap: EXHAUSTIVE_GROUND_CAP });
    }
    let mut counts = vec![0i64; 1 << w.ground];
    for t in w.iter() {
        counts[t.iter().fold(0usize, |m, &e| m ^ (1 << e))] += 1;
    }
    walsh_hadamard(&mut counts);
    Ok(counts)
}

/// Exact lifted bias of every z ∈ F_2^n.
pub fn lifted_biases_exhaustive(w: &WalkCollection) -> Result<Vec<Rational>, LiftError> {
    let total = w.count() as i128;
    Ok(lifted_bias_sums(w)?.into_iter().map(|s| Rational::new((s as i128).abs(), total)).collect())
}

fn word_bias_at_most(weight: usize, n: usize, eps0: Rational) -> bool {
    let num = (n as i128 - 2 * weight as i128).abs();
    num * eps0.denom() <= *eps0.numer() * n as i128
}

/// Max lifted bias over all z with bias(z) ≤ ε0 (0 if there are none): an exhaustive certificate.
pub fn parity_sampling_measure(w: &WalkCollection, eps0: Rational) -> Result<Rational, LiftError> {
    let sums = lifted_bias_sums(w)?;
    let total = w.count() as i128;
    let n = w.ground;
    let best = sums
        .iter()
        .enumerate()
        .filter(|(z, _)| word_bias_at_most(z.count_ones() as usize, n, eps0))
        .map(|(_, &s)| (s as i128).abs())
        .max()
        .unwrap_or(0);
    Ok(Rational::new(best, total))
}

/// [`parity_sampling_measure`] restricted to a supplied word list.
pub fn parity_sampling_measure_words(
    w: &WalkCollection,
    words: &[Word],
    eps0: Rational,
) -> Result<Rational, LiftError> {
    let mut best = Rational::from_integer(0);
    for z in words {
        if !word_bias_at_most(z.weight(), z.len(), eps0) {
            continue;
        }
        best = best.max(crate::f2::bias(&direct_sum_lift(z, w)?));
    }
    Ok(best)
}

/// All t-vertex walks on G in lexicographic order of (start, edge labels).
pub fn expander_walk_collection(g: &RotationGraph, t: usize) -> Result<WalkCollection, LiftError> {
    expander_walk_collection_capped(g, t, DEFAULT_WALK_CAP)
}

pub fn expander_walk_collection_capped(g: &RotationGraph, t: usize, cap: usize) -> Result<WalkCollection, LiftError> {
    if t == 0 {
        return Err(LiftError::BadArity("walks need at least one vertex".into()));
    }
    let count = (g.n() as u128).saturating_mul((g.degree() as u128).saturating_pow(t as u32 - 1));
    if count > cap as u128 {
        return Err(LiftError::TooManyWalks { count, cap });
    }
    let mut walks: Vec<u32> = (0..g.n() as u32).collect();
    for len in 1..t {
        let mut next = Vec::with_capacity(walks.len() * g.degree() * (len + 1) / len);
        for walk in walks.chunks(len) {
            let last = walk[len - 1] as usize;
            for j in 0..g.degree() {
                next.extend_from_slice(walk);
                next.push(g.neighbor(last, j) as u32);
            }
        }
        walks = next;
    }
    WalkCollection::new(t, g.n(), walks, Provenance::ExpanderWalks)
}

/// S[k1,k2,k3] from functions on W[k2+1,k3] to functions on W[k1,k2], stored as exact
/// transition counts over a common denominator d2^{2(k3−k2)}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitOperator {
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    rows: usize,
    cols: usize,
    counts: Vec<u32>,
    denominator: u64,
    row_final: Vec<u32>,
    col_initial: Vec<u32>,
}

impl SplitOperator {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn count(&self, r: usize, c: usize) -> u32 {
        self.counts[r * self.cols + c]
    }

    /// Overwrites one numerator; used to build corrupted instances.
    pub fn set_count(&mut self, r: usize, c: usize, value: u32) {
        self.counts[r * self.cols + c] = value;
    }

    pub fn entry(&self, r: usize, c: usize) -> Rational {
        Rational::new(self.count(r, c) as i128, self.denominator as i128)
    }

    /// Last product vertex of each row walk.
    pub fn row_final(&self) -> &[u32] {
        &self.row_final
    }

    /// First product vertex of each column walk.
    pub fn col_initial(&self) -> &[u32] {
        &self.col_initial
    }

    pub fn rows_sum_to_one(&self) -> bool {
        self.counts.chunks(self.cols).all(|row| row.iter().map(|&c| c as u64).sum::<u64>() == self.denominator)
    }

    pub fn to_operator(&self) -> RealOperator {
        let d = self.denominator as f64;
        RealOperator::new(DMatrix::from_fn(self.rows, self.cols, |r, c| self.count(r, c) as f64 / d))
    }

    pub fn sigma2(&self, cap: usize) -> Result<f64, LiftError> {
        Ok(crate::spectra::second_singular_value_capped(&self.to_operator(), cap)?)
    }
}

fn check_split_indices(k1: usize, k2: usize, k3: usize) -> Result<(), LiftError> {
    if !(k1 <= k2 && k2 < k3) {
        return Err(LiftError::BadIndices(format!("need k1 ≤ k2 < k3, got ({k1}, {k2}, {k3})")));
    }
    Ok(())
}

fn split_dims(
    p: &WideReplacementProduct,
    k1: usize,
    k2: usize,
    k3: usize,
    cap: usize,
) -> Result<(usize, usize), LiftError> {
    let rows = p.walk_count(k1, k2);
    let cols = p.walk_count(k2 + 1, k3);
    if rows > cap as u128 || cols > cap as u128 {
        return Err(LiftError::TooLarge { rows, cols, cap });
    }
    Ok((rows as usize, cols as usize))
}

/// The split operator with entries (number of step choices joining w to w′)/d2^{2(k3−k2)}.
pub fn split_operator(p: &WideReplacementProduct, k1: usize, k2: usize, k3: usize) -> Result<SplitOperator, LiftError> {
    split_operator_capped(p, k1, k2, k3, DEFAULT_DIM_CAP)
}

pub fn split_operator_capped(
    p: &WideReplacementProduct,
    k1: usize,
    k2: usize,
    k3: usize,
    cap: usize,
) -> Result<SplitOperator, LiftError> {
    check_split_indices(k1, k2, k3)?;
    let (rows, cols) = split_dims(p, k1, k2, k3, cap)?;
    let prefixes = p.enumerate_walks_capped(k1, k2, cap)?;
    let per_start = cols / p.vertex_count();
    let step = k2 % p.width();
    let mut counts = vec![0u32; rows * cols];
    let row_final: Vec<u32> = prefixes.iter().map(|w| w[w.len() - 1]).collect();
    for (r, &last) in row_final.iter().enumerate() {
        for c in 0..p.step_choices() {
            let y = p.successor(step, last as usize, c);
            for col in y * per_start..(y + 1) * per_start {
                counts[r * cols + col] += 1;
            }
        }
    }
    let denominator = (p.step_choices() as u64).pow((k3 - k2) as u32);
    let col_initial = (0..cols).map(|c| (c / per_start) as u32).collect();
    Ok(SplitOperator { k1, k2, k3, rows, cols, counts, denominator, row_final, col_initial })
}

/// The reverse operator from functions on W[k1,k2] to functions on W[k2+1,k3]:
/// (S̄f)(w′) = E_{w : ww′ ∈ W[k1,k3]} f(w), with multiplicity.
pub fn reverse_split_operator(
    p: &WideReplacementProduct,
    k1: usize,
    k2: usize,
    k3: usize,
    cap: usize,
) -> Result<RealOperator, LiftError> {
    check_split_indices(k1, k2, k3)?;
    let (rows, cols) = split_dims(p, k1, k2, k3, cap)?;
    let prefixes = p.enumerate_walks_capped(k1, k2, cap)?;
    let suffixes = p.enumerate_walks_capped(k2 + 1, k3, cap)?;
    let step = k2 % p.width();
    let mut joins = HashMap::new();
    for w in prefixes.iter() {
        let last = w[w.len() - 1] as usize;
        for c in 0..p.step_choices() {
            *joins.entry((last, p.successor(step, last, c))).or_insert(0u64) += 1;
        }
    }
    let mut m = DMatrix::zeros(cols, rows);
    for (c, w2) in suffixes.iter().enumerate() {
        let first = w2[0] as usize;
        let mut total = 0.0;
        for (r, w) in prefixes.iter().enumerate() {
            let value = joins.get(&(w[w.len() - 1] as usize, first)).copied().unwrap_or(0) as f64;
            m[(c, r)] = value;
            total += value;
        }
        for r in 0..rows {
            m[(c, r)] /= total;
        }
    }
    Ok(RealOperator::new(m))
}

/// Checks S[k1,k2,k3] against ((I⊗A_H)G_{k2}(I⊗A_H)) ⊗ J/d2^{2(k3−k2−1)} exactly, after
/// sorting rows by final vertex and columns by initial vertex. The step operator is rebuilt
/// from the product.
pub fn verify_tensor_structure(p: &WideReplacementProduct, split: &SplitOperator) -> Result<bool, LiftError> {
    verify_tensor_structure_capped(p, split, DEFAULT_DIM_CAP)
}

pub fn verify_tensor_structure_capped(
    p: &WideReplacementProduct,
    split: &SplitOperator,
    cap: usize,
) -> Result<bool, LiftError> {
    let n0 = p.vertex_count();
    let step = p.step_counts(split.k2 % p.width(), cap.max(n0))?;
    if !split.rows.is_multiple_of(n0) || !split.cols.is_multiple_of(n0) {
        return Ok(false);
    }
    let (r_block, c_block) = (split.rows / n0, split.cols / n0);
    let mut row_order: Vec<usize> = (0..split.rows).collect();
    row_order.sort_by_key(|&r| split.row_final[r]);
    let mut col_order: Vec<usize> = (0..split.cols).collect();
    col_order.sort_by_key(|&c| split.col_initial[c]);
    if row_order.iter().enumerate().any(|(a, &r)| split.row_final[r] as usize != a / r_block)
        || col_order.iter().enumerate().any(|(b, &c)| split.col_initial[c] as usize != b / c_block)
    {
        return Ok(false);
    }
    let d2sq = p.step_choices() as i128;
    for (a, &r) in row_order.iter().enumerate() {
        for (b, &c) in col_order.iter().enumerate() {
            let expected =
                Rational::new(step[(a / r_block) * n0 + b / c_block] as i128, d2sq) * Rational::new(1, c_block as i128);
            if split.entry(r, c) != expected {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// S_r = S[0, r, 2r+1] for r ≡ −1 mod s; rows and columns are both indexed by W[0,r].
pub fn swap_operator(p: &WideReplacementProduct, r: usize) -> Result<SplitOperator, LiftError> {
    swap_operator_capped(p, r, DEFAULT_DIM_CAP)
}

pub fn swap_operator_capped(p: &WideReplacementProduct, r: usize, cap: usize) -> Result<SplitOperator, LiftError> {
    if !(r + 1).is_multiple_of(p.width()) {
        return Err(LiftError::BadResidue { r, s: p.width() });
    }
    split_operator_capped(p, 0, r, 2 * r + 1, cap)
}

/// U(S) = [[0, S], [S†, 0]] on the normalized spaces, from independently built S and S†.
pub fn symmetrized(forward: &RealOperator, adjoint: &RealOperator) -> Result<DMatrix<f64>, LiftError> {
    let (r, c) = (forward.rows(), forward.cols());
    if adjoint.rows() != c || adjoint.cols() != r {
        return Err(LiftError::BadIndices("adjoint shape does not match".into()));
    }
    let f = forward.normalized_matrix();
    let b = adjoint.normalized_matrix();
    let mut u = DMatrix::zeros(r + c, r + c);
    u.view_mut((0, r), (r, c)).copy_from(&f);
    u.view_mut((r, 0), (c, r)).copy_from(&b);
    Ok(u)
}

/// Largest singular value of U(S) after the two trivial ones (eigenvalues ±1).
pub fn symmetrized_sigma2(forward: &RealOperator, adjoint: &RealOperator, cap: usize) -> Result<f64, LiftError> {
    let u = symmetrized(forward, adjoint)?;
    Ok(matrix_singular_values(u, cap)?.get(2).copied().unwrap_or(0.0))
}

/// Split of an arbitrary collection at (k1,k2,k3): the joint law of the prefix on
/// positions [k1,k2] and suffix on [k2+1,k3] under the uniform measure on tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectionSplit {
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    rows: usize,
    cols: usize,
    joint: Vec<u64>,
    row_mass: Vec<u64>,
    col_mass: Vec<u64>,
}

impl CollectionSplit {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-stochastic operator f ↦ E[f(suffix) | prefix].
    pub fn forward(&self) -> RealOperator {
        RealOperator::new(DMatrix::from_fn(self.rows, self.cols, |r, c| {
            self.joint[r * self.cols + c] as f64 / self.row_mass[r] as f64
        }))
    }

    /// Row-stochastic operator g ↦ E[g(prefix) | suffix].
    pub fn reverse(&self) -> RealOperator {
        RealOperator::new(DMatrix::from_fn(self.cols, self.rows, |c, r| {
            self.joint[r * self.cols + c] as f64 / self.col_mass[c] as f64
        }))
    }

    /// P(a,b)/sqrt(p_a q_b): the operator between the L² spaces of the two marginals.
    pub fn normalized(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| {
            self.joint[r * self.cols + c] as f64 / ((self.row_mass[r] * self.col_mass[c]) as f64).sqrt()
        })
    }

    pub fn row_measure(&self) -> Vec<f64> {
        let t: u64 = self.row_mass.iter().sum();
        self.row_mass.iter().map(|&m| m as f64 / t as f64).collect()
    }

    pub fn col_measure(&self) -> Vec<f64> {
        let t: u64 = self.col_mass.iter().sum();
        self.col_mass.iter().map(|&m| m as f64 / t as f64).collect()
    }

    pub fn sigma2(&self, cap: usize) -> Result<f64, LiftError> {
        Ok(matrix_singular_values(self.normalized(), cap)?.get(1).copied().unwrap_or(0.0))
    }
}

pub fn collection_split(
    w: &WalkCollection,
    k1: usize,
    k2: usize,
    k3: usize,
    cap: usize,
) -> Result<CollectionSplit, LiftError> {
    check_split_indices(k1, k2, k3)?;
    if k3 >= w.arity {
        return Err(LiftError::BadIndices(format!("k3 = {k3} outside arity {}", w.arity)));
    }
    let mut row_ids: HashMap<&[u32], usize> = HashMap::new();
    let mut col_ids: HashMap<&[u32], usize> = HashMap::new();
    let mut pairs = Vec::with_capacity(w.count());
    for t in w.iter() {
        let next = row_ids.len();
        let r = *row_ids.entry(&t[k1..=k2]).or_insert(next);
        let next = col_ids.len();
        let c = *col_ids.entry(&t[k2 + 1..=k3]).or_insert(next);
        pairs.push((r, c));
    }
    let (rows, cols) = (row_ids.len(), col_ids.len());
    if rows > cap || cols > cap {
        return Err(LiftError::TooLarge { rows: rows as u128, cols: cols as u128, cap });
    }
    let mut joint = vec![0u64; rows * cols];
    let mut row_mass = vec![0u64; rows];
    let mut col_mass = vec![0u64; cols];
    for (r, c) in pairs {
        joint[r * cols + c] += 1;
        row_mass[r] += 1;
        col_mass[c] += 1;
    }
    Ok(CollectionSplit { k1, k2, k3, rows, cols, joint, row_mass, col_mass })
}

/// A k-interval splitting tree; internal nodes carry (k1,k2,k3) with children [k1,k2] and [k2+1,k3].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplittingTree {
    Leaf(usize),
    Node { k1: usize, k2: usize, k3: usize, left: Box<SplittingTree>, right: Box<SplittingTree> },
}

impl SplittingTree {
    fn build(a: usize, c: usize, split: &mut dyn FnMut(usize, usize) -> usize) -> SplittingTree {
        if a == c {
            return SplittingTree::Leaf(a);
        }
        let m = split(a, c);
        let left = Box::new(SplittingTree::build(a, m, split));
        let right = Box::new(SplittingTree::build(m + 1, c, split));
        SplittingTree::Node { k1: a, k2: m, k3: c, left, right }
    }

    /// Splits every interval at ⌊(k1+k3)/2⌋.
    pub fn balanced(k: usize) -> Result<SplittingTree, LiftError> {
        Self::check_arity(k)?;
        Ok(Self::build(0, k - 1, &mut |a, c| (a + c) / 2))
    }

    /// Peels off one position on the right at every node.
    pub fn left_linear(k: usize) -> Result<SplittingTree, LiftError> {
        Self::check_arity(k)?;
        Ok(Self::build(0, k - 1, &mut |_, c| c - 1))
    }

    fn check_arity(k: usize) -> Result<(), LiftError> {
        if k == 0 {
            return Err(LiftError::InvalidTree("arity must be positive".into()));
        }
        Ok(())
    }

    /// Rebuilds a tree from its internal node labels, checking the interval structure.
    pub fn from_nodes(k: usize, nodes: &[(usize, usize, usize)]) -> Result<SplittingTree, LiftError> {
        Self::check_arity(k)?;
        if nodes.len() != k - 1 {
            return Err(LiftError::InvalidTree(format!("{} internal nodes for arity {k}", nodes.len())));
        }
        let mut by_interval = HashMap::new();
        for &(a, m, c) in nodes {
            if !(a <= m && m < c && c < k) {
                return Err(LiftError::InvalidTree(format!("bad node ({a}, {m}, {c})")));
            }
            if by_interval.insert((a, c), m).is_some() {
                return Err(LiftError::InvalidTree(format!("interval [{a}, {c}] split twice")));
            }
        }
        fn go(a: usize, c: usize, table: &HashMap<(usize, usize), usize>) -> Result<SplittingTree, LiftError> {
            if a == c {
                return Ok(SplittingTree::Leaf(a));
            }
            let &m = table.get(&(a, c)).ok_or_else(|| LiftError::InvalidTree(format!("no node splits [{a}, {c}]")))?;
            Ok(SplittingTree::Node {
                k1: a,
                k2: m,
                k3: c,
                left: Box::new(go(a, m, table)?),
                right: Box::new(go(m + 1, c, table)?),
            })
        }
        go(0, k - 1, &by_interval)
    }

    /// Every k-interval splitting tree (Catalan many).
    pub fn all(k: usize) -> Result<Vec<SplittingTree>, LiftError> {
        Self::check_arity(k)?;
        fn go(a: usize, c: usize) -> Vec<SplittingTree> {
            if a == c {
                return vec![SplittingTree::Leaf(a)];
            }
            let mut out = Vec::new();
            for m in a..c {
                for l in go(a, m) {
                    for r in go(m + 1, c) {
                        out.push(SplittingTree::Node {
                            k1: a,
                            k2: m,
                            k3: c,
                            left: Box::new(l.clone()),
                            right: Box::new(r),
                        });
                    }
                }
            }
            out
        }
        Ok(go(0, k - 1))
    }

    pub fn arity(&self) -> usize {
        match self {
            SplittingTree::Leaf(_) => 1,
            SplittingTree::Node { k1, k3, .. } => k3 - k1 + 1,
        }
    }

    /// Internal node labels in preorder.
    pub fn internal_nodes(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        fn go(t: &SplittingTree, out: &mut Vec<(usize, usize, usize)>) {
            if let SplittingTree::Node { k1, k2, k3, left, right } = t {
                out.push((*k1, *k2, *k3));
                go(left, out);
                go(right, out);
            }
        }
        go(self, &mut out);
        out
    }

    pub fn leaves(&self) -> Vec<usize> {
        match self {
            SplittingTree::Leaf(i) => vec![*i],
            SplittingTree::Node { left, right, .. } => {
                let mut l = left.leaves();
                l.extend(right.leaves());
                l
            }
        }
    }
}

impl fmt::Display for SplittingTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tree {}", self.arity())?;
        for (a, m, c) in self.internal_nodes() {
            writeln!(f, "{a} {m} {c}")?;
        }
        Ok(())
    }
}

/// Tree file: `tree <k>` then one `k1 k2 k3` line per internal node.
pub fn parse_tree(text: &str) -> Result<SplittingTree, LiftError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| LiftError::Parse("empty tree file".into()))?;
    let k = header
        .strip_prefix("tree")
        .and_then(|r| r.trim().parse::<usize>().ok())
        .ok_or_else(|| LiftError::Parse(format!("expected `tree <k>`, found `{header}`")))?;
    let mut nodes = Vec::new();
    for line in lines {
        let v: Vec<usize> = line
            .split_whitespace()
            .map(|x| x.parse::<usize>().map_err(|e| LiftError::Parse(format!("{x}: {e}"))))
            .collect::<Result<_, _>>()?;
        if v.len() != 3 {
            return Err(LiftError::Parse(format!("node line `{line}` needs three indices")));
        }
        nodes.push((v[0], v[1], v[2]));
    }
    SplittingTree::from_nodes(k, &nodes)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeSigma {
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    pub sigma2: f64,
}

/// τ = max σ₂ over internal nodes, with the per-node values.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitCertificate {
    pub tau: f64,
    pub nodes: Vec<NodeSigma>,
}

fn certificate_from(nodes: Vec<NodeSigma>) -> SplitCertificate {
    SplitCertificate { tau: nodes.iter().map(|n| n.sigma2).fold(0.0, f64::max), nodes }
}

fn check_tree(tree: &SplittingTree, arity: usize) -> Result<(), LiftError> {
    if tree.arity() != arity {
        return Err(LiftError::InvalidTree(format!("tree arity {} for collection arity {arity}", tree.arity())));
    }
    Ok(())
}

/// Splittability of an arbitrary collection through its marginal split operators.
pub fn splittability_certificate(
    w: &WalkCollection,
    tree: &SplittingTree,
    cap: usize,
) -> Result<SplitCertificate, LiftError> {
    check_tree(tree, w.arity)?;
    let nodes = tree
        .internal_nodes()
        .into_iter()
        .map(|(k1, k2, k3)| Ok(NodeSigma { k1, k2, k3, sigma2: collection_split(w, k1, k2, k3, cap)?.sigma2(cap)? }))
        .collect::<Result<Vec<_>, LiftError>>()?;
    Ok(certificate_from(nodes))
}

/// Splittability of walks over blocks of `block` product vertices: node (k1,k2,k3) is
/// S[k1·B, (k2+1)B−1, (k3+1)B−1] on the product.
pub fn product_splittability_certificate(
    p: &WideReplacementProduct,
    block: usize,
    tree: &SplittingTree,
    cap: usize,
) -> Result<SplitCertificate, LiftError> {
    if block == 0 || (block > 1 && !block.is_multiple_of(p.width())) {
        return Err(LiftError::BadResidue { r: block.saturating_sub(1), s: p.width() });
    }
    let nodes = tree
        .internal_nodes()
        .into_iter()
        .map(|(k1, k2, k3)| {
            let split = split_operator_capped(p, k1 * block, (k2 + 1) * block - 1, (k3 + 1) * block - 1, cap)?;
            Ok(NodeSigma { k1, k2, k3, sigma2: split.sigma2(cap)? })
        })
        .collect::<Result<Vec<_>, LiftError>>()?;
    Ok(certificate_from(nodes))
}

/// One cascade level: the collection over the previous level's positions, the lifted code,
/// and the projection of every tuple to base-code positions.
#[derive(Clone, Debug)]
pub struct CascadeLevel {
    pub walks: WalkCollection,
    pub code: LinearCode,
    base_positions: Vec<u32>,
    base_arity: usize,
    last_vertex: Vec<u32>,
}

impl CascadeLevel {
    pub fn len(&self) -> usize {
        self.walks.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Product-walk vertices per tuple.
    pub fn base_arity(&self) -> usize {
        self.base_arity
    }

    pub fn base_positions(&self) -> &[u32] {
        &self.base_positions
    }

    pub fn base_tuple(&self, i: usize) -> &[u32] {
        &self.base_positions[i * self.base_arity..(i + 1) * self.base_arity]
    }

    /// Final product vertex of each walk.
    pub fn last_vertices(&self) -> &[u32] {
        &self.last_vertex
    }

    /// The level viewed as a collection over base-code positions.
    pub fn base_collection(&self, n: usize) -> Result<WalkCollection, LiftError> {
        WalkCollection::explicit(self.base_arity, n, self.base_positions.clone())
    }
}

/// C₀, C₁, …, C_ℓ with C_i the lift of C_{i−1} over the i-th level's collection.
#[derive(Clone, Debug)]
pub struct Cascade {
    base: LinearCode,
    product: WideReplacementProduct,
    levels: Vec<CascadeLevel>,
    top_arity: usize,
}

impl Cascade {
    pub fn base(&self) -> &LinearCode {
        &self.base
    }

    pub fn product(&self) -> &WideReplacementProduct {
        &self.product
    }

    /// Number of levels ℓ.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn width(&self) -> usize {
        self.product.width()
    }

    pub fn top_arity(&self) -> usize {
        self.top_arity
    }

    /// Level i for i = 1..=ℓ.
    pub fn level(&self, i: usize) -> &CascadeLevel {
        &self.levels[i - 1]
    }

    pub fn levels(&self) -> &[CascadeLevel] {
        &self.levels
    }

    pub fn top(&self) -> &CascadeLevel {
        self.levels.last().expect("cascades have at least one level")
    }

    /// Code C_i, with C_0 the base code.
    pub fn code(&self, i: usize) -> &LinearCode {
        if i == 0 {
            &self.base
        } else {
            &self.levels[i - 1].code
        }
    }

    /// Total product-walk length t′ of the top level.
    pub fn total_length(&self) -> usize {
        self.top().base_arity
    }

    /// Lifts a word of C_{i−1}'s length to level i.
    pub fn lift_to_level(&self, i: usize, z: &Word) -> Result<Word, LiftError> {
        direct_sum_lift(z, &self.levels[i - 1].walks)
    }

    /// Lifts a base word straight to level i through the composed projection.
    pub fn lift_from_base(&self, i: usize, z: &Word) -> Result<Word, LiftError> {
        if z.len() != self.base.len() {
            return Err(LiftError::LengthMismatch { expected: self.base.len(), found: z.len() });
        }
        let level = &self.levels[i - 1];
        direct_sum_lift_tuples(z, &level.base_positions, level.base_arity)
    }

    pub fn encode(&self, message: &Word) -> Result<Word, LiftError> {
        let z = self.base.encode(message)?;
        self.lift_from_base(self.depth(), &z)
    }
}

/// Level 1 walks W[0,s−1] (W[0,P−1] when ℓ = 1); level i ≥ 2 binds s walks of the previous level
/// (P at the top) through the swap operator.
pub fn build_cascade(
    base: &LinearCode,
    p: &WideReplacementProduct,
    depth: usize,
    top_arity: usize,
) -> Result<Cascade, LiftError> {
    build_cascade_capped(base, p, depth, top_arity, DEFAULT_WALK_CAP)
}

pub fn build_cascade_capped(
    base: &LinearCode,
    p: &WideReplacementProduct,
    depth: usize,
    top_arity: usize,
    cap: usize,
) -> Result<Cascade, LiftError> {
    let s = p.width();
    if depth == 0 {
        return Err(LiftError::BadArity("a cascade needs at least one level".into()));
    }
    if top_arity < s || top_arity > s * s {
        return Err(LiftError::BadArity(format!("top arity {top_arity} outside [{s}, {}]", s * s)));
    }
    if base.len() != p.outer().n() {
        return Err(LiftError::LengthMismatch { expected: p.outer().n(), found: base.len() });
    }
    let first_arity = if depth == 1 { top_arity } else { s };
    let walks = WalkCollection::from_walk_space(p, 0, first_arity - 1, cap)?;
    let code = lift_code(base, &walks)?;
    let product_vertices = walks.product_vertices().expect("built from a walk space");
    let last_vertex = product_vertices.chunks(first_arity).map(|w| w[first_arity - 1]).collect();
    let base_positions = walks.tuples().to_vec();
    let mut levels = vec![CascadeLevel { walks, code, base_positions, base_arity: first_arity, last_vertex }];

    for i in 2..=depth {
        let prev = levels.last().expect("nonempty");
        let arity = if i == depth { top_arity } else { s };
        let block = prev.base_arity;
        let per_start = prev.len() / p.vertex_count();
        let choices = p.step_choices();
        let branching = (choices as u128) * per_start as u128;
        let count = (prev.len() as u128).saturating_mul(branching.saturating_pow(arity as u32 - 1));
        if count > cap as u128 {
            return Err(LiftError::TooManyWalks { count, cap });
        }
        let count = count as usize;
        let mut tuples: Vec<u32> = (0..prev.len() as u32).collect();
        for j in 1..arity {
            let bind = (j * block - 1) % s;
            let mut next = Vec::with_capacity(tuples.len() / j * (j + 1) * branching as usize);
            for partial in tuples.chunks(j) {
                let last = prev.last_vertex[partial[j - 1] as usize] as usize;
                for c in 0..choices {
                    let y = p.successor(bind, last, c);
                    for idx in y * per_start..(y + 1) * per_start {
                        next.extend_from_slice(partial);
                        next.push(idx as u32);
                    }
                }
            }
            tuples = next;
        }
        debug_assert_eq!(tuples.len(), count * arity);
        let mut base_positions = Vec::with_capacity(count * arity * block);
        let mut last_vertex = Vec::with_capacity(count);
        for t in tuples.chunks(arity) {
            for &w in t {
                base_positions.extend_from_slice(prev.base_tuple(w as usize));
            }
            last_vertex.push(prev.last_vertex[t[arity - 1] as usize]);
        }
        let walks = WalkCollection::new(arity, prev.len(), tuples, Provenance::SwapWalks { level: i, block })?;
        let code = lift_code(&prev.code, &walks)?;
        levels.push(CascadeLevel { walks, code, base_positions, base_arity: arity * block, last_vertex });
    }
    Ok(Cascade { base: base.clone(), product: p.clone(), levels, top_arity })
}
