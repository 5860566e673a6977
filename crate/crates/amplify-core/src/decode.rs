//! Decoding: the list-decoding contract with pluggable backends, unique and fixed-polynomial
//! cascade decoding, local ensembles with propagation rounding, cover pruning, and
//! derandomized rounding by conditional expectations over multilinear polynomials.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::f2::{bias, brute_force_unique_decode, within_list_radius, F2Error, LinearCode, Word};
use crate::lifting::{direct_sum_lift, Cascade, LiftError, SplittingTree, WalkCollection};
use crate::params::{thresholds, ThresholdSet};
use crate::rpp::WideReplacementProduct;
use crate::Rational;

/// Largest variable set accepted by the covariance check.
pub const COVARIANCE_VAR_CAP: usize = 12;

/// Default bound on monomial degree for exact product expectations.
pub const DEFAULT_DEGREE_CAP: usize = 64;

/// Largest number of variables in a multilinear polynomial.
pub const MAX_POLY_VARS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error(transparent)]
    F2(#[from] F2Error),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error("ensemble locality {have} is below the required {needed}")]
    LocalityTooSmall { needed: usize, have: usize },
    #[error("no codeword lies within the list decoding radius")]
    EmptyList,
    #[error("conditioning on an event of probability zero")]
    NullEvent,
    #[error("variable {var} out of range for {n} variables")]
    VariableOutOfRange { var: usize, n: usize },
    #[error("conditional expectation {value} fell below the target {target} at step {step}")]
    PremiseViolated { step: usize, value: f64, target: f64 },
    #[error("monomial of degree {degree} exceeds the cap {cap}")]
    DegreeTooHigh { degree: usize, cap: usize },
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("too many variables: {found} > {cap}")]
    TooManyVariables { found: usize, cap: usize },
}

/// A family of local distributions over binary variables Z_0..Z_{n−1}.
///
/// Tuple distributions are indexed by assignment: bit j of the index is the value of `vars[j]`.
/// Assignments giving different values to a repeated variable have probability 0.
pub trait LocalEnsemble: Sized {
    fn num_vars(&self) -> usize;

    /// Largest number of distinct variables that may be queried jointly.
    fn locality(&self) -> usize;

    fn tuple_distribution(&self, vars: &[usize]) -> Result<Vec<f64>, DecodeError>;

    /// Conditions on Z_vars = values; locality drops by the number of distinct variables.
    fn condition(&self, vars: &[usize], values: &[bool]) -> Result<Self, DecodeError>;

    /// Pr[Z_v = 1].
    fn marginal(&self, v: usize) -> Result<f64, DecodeError> {
        Ok(self.tuple_distribution(&[v])?[1])
    }

    /// Draws an assignment of `vars` from their joint distribution.
    fn sample<R: Rng + ?Sized>(&self, vars: &[usize], rng: &mut R) -> Result<Vec<bool>, DecodeError> {
        let dist = self.tuple_distribution(vars)?;
        let mut u: f64 = rng.gen();
        let mut pick = dist.len() - 1;
        for (i, p) in dist.iter().enumerate() {
            if u < *p {
                pick = i;
                break;
            }
            u -= p;
        }
        Ok((0..vars.len()).map(|j| (pick >> j) & 1 == 1).collect())
    }
}

fn distinct(vars: &[usize]) -> usize {
    let mut v = vars.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// A true joint distribution given by a weighted support; every local view is its marginal.
#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceEnsemble {
    n: usize,
    support: Vec<Word>,
    weights: Vec<f64>,
    locality: usize,
}

impl BruteForceEnsemble {
    pub fn uniform(support: Vec<Word>) -> Result<Self, DecodeError> {
        let w = vec![1.0; support.len()];
        Self::weighted(support, w)
    }

    pub fn weighted(support: Vec<Word>, weights: Vec<f64>) -> Result<Self, DecodeError> {
        let first = support.first().ok_or(DecodeError::EmptyList)?;
        let n = first.len();
        if let Some(w) = support.iter().find(|w| w.len() != n) {
            return Err(F2Error::LengthMismatch { expected: n, found: w.len() }.into());
        }
        if weights.len() != support.len() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(DecodeError::BadConfig("weights must be nonnegative, one per word".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(DecodeError::NullEvent);
        }
        Ok(BruteForceEnsemble {
            n,
            support,
            weights: weights.iter().map(|w| w / total).collect(),
            locality: usize::MAX,
        })
    }

    pub fn point_mass(z: Word) -> Self {
        BruteForceEnsemble { n: z.len(), support: vec![z], weights: vec![1.0], locality: usize::MAX }
    }

    /// Independent bits with Pr[Z_i = 1] = probs[i], expanded over all 2^n words.
    pub fn product(probs: &[f64]) -> Result<Self, DecodeError> {
        let n = probs.len();
        if n == 0 || n > 20 {
            return Err(DecodeError::TooManyVariables { found: n, cap: 20 });
        }
        let mut support = Vec::with_capacity(1 << n);
        let mut weights = Vec::with_capacity(1 << n);
        for m in 0..1u64 << n {
            let w = Word::from_u64(m, n)?;
            weights.push((0..n).map(|i| if w.get(i) { probs[i] } else { 1.0 - probs[i] }).product());
            support.push(w);
        }
        Self::weighted(support, weights)
    }

    pub fn with_locality(mut self, locality: usize) -> Self {
        self.locality = locality;
        self
    }

    pub fn support(&self) -> &[Word] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_vars(&self, vars: &[usize]) -> Result<(), DecodeError> {
        if let Some(&v) = vars.iter().find(|&&v| v >= self.n) {
            return Err(DecodeError::VariableOutOfRange { var: v, n: self.n });
        }
        let d = distinct(vars);
        if d > self.locality {
            return Err(DecodeError::LocalityTooSmall { needed: d, have: self.locality });
        }
        Ok(())
    }

    fn index_of(word: &Word, vars: &[usize]) -> usize {
        vars.iter().enumerate().fold(0, |acc, (j, &v)| acc | (word.bit(v) as usize) << j)
    }
}

impl LocalEnsemble for BruteForceEnsemble {
    fn num_vars(&self) -> usize {
        self.n
    }

    fn locality(&self) -> usize {
        self.locality
    }

    fn tuple_distribution(&self, vars: &[usize]) -> Result<Vec<f64>, DecodeError> {
        self.check_vars(vars)?;
        if vars.len() > 24 {
            return Err(DecodeError::TooManyVariables { found: vars.len(), cap: 24 });
        }
        let mut dist = vec![0.0; 1 << vars.len()];
        for (w, p) in self.support.iter().zip(&self.weights) {
            dist[Self::index_of(w, vars)] += p;
        }
        Ok(dist)
    }

    fn condition(&self, vars: &[usize], values: &[bool]) -> Result<Self, DecodeError> {
        self.check_vars(vars)?;
        if vars.len() != values.len() {
            return Err(F2Error::LengthMismatch { expected: vars.len(), found: values.len() }.into());
        }
        let (support, weights): (Vec<Word>, Vec<f64>) = self
            .support
            .iter()
            .zip(&self.weights)
            .filter(|(w, _)| vars.iter().zip(values).all(|(&v, &b)| w.get(v) == b))
            .map(|(w, p)| (w.clone(), *p))
            .unzip();
        if support.is_empty() {
            return Err(DecodeError::NullEvent);
        }
        let locality = self.locality.saturating_sub(distinct(vars));
        Ok(Self::weighted(support, weights)?.with_locality(locality))
    }

    fn marginal(&self, v: usize) -> Result<f64, DecodeError> {
        self.check_vars(&[v])?;
        Ok(self.support.iter().zip(&self.weights).filter(|(w, _)| w.get(v)).map(|(_, p)| p).sum())
    }

    fn sample<R: Rng + ?Sized>(&self, vars: &[usize], rng: &mut R) -> Result<Vec<bool>, DecodeError> {
        self.check_vars(vars)?;
        let mut u: f64 = rng.gen();
        let mut pick = self.support.len() - 1;
        for (i, p) in self.weights.iter().enumerate() {
            if u < *p {
                pick = i;
                break;
            }
            u -= p;
        }
        Ok(vars.iter().map(|&v| self.support[pick].get(v)).collect())
    }
}

/// Variables Y_x = Z_{g(x)} indexed by product vertices x, backed by an ensemble on outer vertices.
/// Conditioning always acts on the Z variables.
#[derive(Clone, Debug)]
pub struct CloudView<E> {
    base: E,
    map: Vec<usize>,
}

impl<E: LocalEnsemble> CloudView<E> {
    pub fn new(base: E, map: Vec<usize>) -> Result<Self, DecodeError> {
        if let Some(&v) = map.iter().find(|&&v| v >= base.num_vars()) {
            return Err(DecodeError::VariableOutOfRange { var: v, n: base.num_vars() });
        }
        Ok(CloudView { base, map })
    }

    /// The view whose variables are the product vertices, each reading its outer vertex.
    pub fn for_product(base: E, p: &WideReplacementProduct) -> Result<Self, DecodeError> {
        let map = (0..p.vertex_count()).map(|x| p.g_component(x)).collect();
        Self::new(base, map)
    }

    pub fn base(&self) -> &E {
        &self.base
    }

    fn project(&self, vars: &[usize]) -> Result<Vec<usize>, DecodeError> {
        vars.iter()
            .map(|&x| self.map.get(x).copied().ok_or(DecodeError::VariableOutOfRange { var: x, n: self.map.len() }))
            .collect()
    }

    /// Conditions the underlying Z ensemble on Z_vars = values.
    pub fn condition_base(&self, vars: &[usize], values: &[bool]) -> Result<Self, DecodeError> {
        Ok(CloudView { base: self.base.condition(vars, values)?, map: self.map.clone() })
    }
}

impl<E: LocalEnsemble> LocalEnsemble for CloudView<E> {
    fn num_vars(&self) -> usize {
        self.map.len()
    }

    fn locality(&self) -> usize {
        self.base.locality()
    }

    fn tuple_distribution(&self, vars: &[usize]) -> Result<Vec<f64>, DecodeError> {
        self.base.tuple_distribution(&self.project(vars)?)
    }

    fn condition(&self, vars: &[usize], values: &[bool]) -> Result<Self, DecodeError> {
        self.condition_base(&self.project(vars)?, values)
    }

    fn marginal(&self, v: usize) -> Result<f64, DecodeError> {
        self.base.marginal(self.project(&[v])?[0])
    }
}

/// Steps: m uniform in {1..⌊L/k⌋}; m i.i.d. uniform walks; S the union of their vertices;
/// σ ~ Z_S; condition on σ; round each variable independently from its conditioned marginal.
pub fn propagation_rounding<E: LocalEnsemble>(
    ens: &E,
    walks: &WalkCollection,
    l: usize,
    seed: u64,
) -> Result<(Word, E), DecodeError> {
    let k = walks.arity();
    if l < k {
        return Err(DecodeError::LocalityTooSmall { needed: k, have: l });
    }
    if ens.locality() < l + 2 * k {
        return Err(DecodeError::LocalityTooSmall { needed: l + 2 * k, have: ens.locality() });
    }
    if walks.ground_size() != ens.num_vars() {
        return Err(F2Error::LengthMismatch { expected: ens.num_vars(), found: walks.ground_size() }.into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=l / k);
    let mut set: Vec<usize> = Vec::with_capacity(m * k);
    for _ in 0..m {
        let w = rng.gen_range(0..walks.count());
        set.extend(walks.tuple(w).iter().map(|&v| v as usize));
    }
    set.sort_unstable();
    set.dedup();
    let sigma = ens.sample(&set, &mut rng)?;
    let conditioned = ens.condition(&set, &sigma)?;
    let mut out = Word::zeros(ens.num_vars())?;
    for i in 0..ens.num_vars() {
        let p = conditioned.marginal(i)?;
        if rng.gen::<f64>() < p {
            out.set(i, true);
        }
    }
    Ok((out, conditioned))
}

fn product_l1(joint: &[f64], factors: &[f64]) -> f64 {
    // factors[j] = Pr[variable j = 1]
    joint
        .iter()
        .enumerate()
        .map(|(a, p)| {
            let q: f64 =
                factors.iter().enumerate().map(|(j, f)| if (a >> j) & 1 == 1 { *f } else { 1.0 - f }).product();
            (p - q).abs()
        })
        .sum()
}

/// E_w ‖{Z_w} − {Z_{w(1)}}⋯{Z_{w(k)}}‖₁ over the collection.
pub fn tensoriality_defect<E: LocalEnsemble>(ens: &E, walks: &WalkCollection) -> Result<f64, DecodeError> {
    let mut total = 0.0;
    for w in walks.iter() {
        let vars: Vec<usize> = w.iter().map(|&v| v as usize).collect();
        let joint = ens.tuple_distribution(&vars)?;
        let factors = vars.iter().map(|&v| ens.marginal(v)).collect::<Result<Vec<_>, _>>()?;
        total += product_l1(&joint, &factors);
    }
    Ok(total / walks.count() as f64)
}

/// E_{w,w′} ‖{Z_w Z_{w′}} − {Z_w}{Z_{w′}}‖₁ over ordered pairs of walks.
pub fn two_step_defect<E: LocalEnsemble>(ens: &E, walks: &WalkCollection) -> Result<f64, DecodeError> {
    let k = walks.arity();
    let tuples: Vec<Vec<usize>> = walks.iter().map(|w| w.iter().map(|&v| v as usize).collect()).collect();
    let dists = tuples.iter().map(|t| ens.tuple_distribution(t)).collect::<Result<Vec<_>, _>>()?;
    let mut total = 0.0;
    for (a, ta) in tuples.iter().enumerate() {
        for (b, tb) in tuples.iter().enumerate() {
            let vars: Vec<usize> = ta.iter().chain(tb).copied().collect();
            let joint = ens.tuple_distribution(&vars)?;
            let mask = (1usize << k) - 1;
            total +=
                joint.iter().enumerate().map(|(x, p)| (p - dists[a][x & mask] * dists[b][x >> k]).abs()).sum::<f64>();
        }
    }
    Ok(total / (tuples.len() * tuples.len()) as f64)
}

/// E_w ‖{Z_{w[k1..=k3]}} − {Z_{w[k1..=k2]}}{Z_{w[k2+1..=k3]}}‖₁: the defect of splitting
/// tuple positions k1..=k3 at k2.
pub fn split_defect<E: LocalEnsemble>(
    ens: &E,
    walks: &WalkCollection,
    k1: usize,
    k2: usize,
    k3: usize,
) -> Result<f64, DecodeError> {
    if !(k1 <= k2 && k2 < k3 && k3 < walks.arity()) {
        return Err(DecodeError::BadConfig(format!("need k1 ≤ k2 < k3 < {}, got ({k1}, {k2}, {k3})", walks.arity())));
    }
    let left = k2 - k1 + 1;
    let mask = (1usize << left) - 1;
    let mut total = 0.0;
    for w in walks.iter() {
        let vars: Vec<usize> = w[k1..=k3].iter().map(|&v| v as usize).collect();
        let joint = ens.tuple_distribution(&vars)?;
        let a = ens.tuple_distribution(&vars[..left])?;
        let b = ens.tuple_distribution(&vars[left..])?;
        total += joint.iter().enumerate().map(|(x, p)| (p - a[x & mask] * b[x >> left]).abs()).sum::<f64>();
    }
    Ok(total / walks.count() as f64)
}

/// Split defects of every internal node of a splitting tree, in the tree's node order.
pub fn tree_split_defects<E: LocalEnsemble>(
    ens: &E,
    walks: &WalkCollection,
    tree: &SplittingTree,
) -> Result<Vec<f64>, DecodeError> {
    if tree.arity() != walks.arity() {
        return Err(DecodeError::BadConfig(format!(
            "tree arity {} ≠ collection arity {}",
            tree.arity(),
            walks.arity()
        )));
    }
    tree.internal_nodes().into_iter().map(|(k1, k2, k3)| split_defect(ens, walks, k1, k2, k3)).collect()
}

/// Per-variable argmax of the 1-local marginals; ties go to 0.
pub fn majority_vote<E: LocalEnsemble>(ens: &E) -> Result<Word, DecodeError> {
    let mut out = Word::zeros(ens.num_vars())?;
    for i in 0..ens.num_vars() {
        if ens.marginal(i)? > 0.5 {
            out.set(i, true);
        }
    }
    Ok(out)
}

/// Covariance matrix of the 0/1 variables `vars`, from the pairwise distributions.
pub fn covariance_matrix<E: LocalEnsemble>(ens: &E, vars: &[usize]) -> Result<DMatrix<f64>, DecodeError> {
    if vars.len() > COVARIANCE_VAR_CAP {
        return Err(DecodeError::TooManyVariables { found: vars.len(), cap: COVARIANCE_VAR_CAP });
    }
    let p = vars.iter().map(|&v| ens.marginal(v)).collect::<Result<Vec<_>, _>>()?;
    let mut m = DMatrix::zeros(vars.len(), vars.len());
    for i in 0..vars.len() {
        for j in i..vars.len() {
            let both = ens.tuple_distribution(&[vars[i], vars[j]])?[3];
            let c = both - p[i] * p[j];
            m[(i, j)] = c;
            m[(j, i)] = c;
        }
    }
    Ok(m)
}

/// Smallest eigenvalue of the covariance matrix is ≥ −tol.
pub fn covariance_is_psd<E: LocalEnsemble>(ens: &E, vars: &[usize], tol: f64) -> Result<bool, DecodeError> {
    let m = covariance_matrix(ens, vars)?;
    if m.nrows() == 0 {
        return Ok(true);
    }
    Ok(m.symmetric_eigen().eigenvalues.min() >= -tol)
}

/// One decoding level: the code C_{i−1}, its lift C_i and the collection between them.
/// Codewords of C_{i−1} and C_i with the same message index correspond under the lift.
#[derive(Clone, Copy, Debug)]
pub struct LevelView<'a> {
    pub code: &'a LinearCode,
    pub lifted: &'a LinearCode,
    pub walks: &'a WalkCollection,
}

impl<'a> LevelView<'a> {
    /// Level i (1-based) of a cascade.
    pub fn of(cascade: &'a Cascade, i: usize) -> Self {
        LevelView { code: cascade.code(i - 1), lifted: cascade.code(i), walks: &cascade.level(i).walks }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeEntry {
    pub z: Word,
    pub y: Word,
}

/// Pairs (z, lift(z)).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecodeList {
    pub entries: Vec<DecodeEntry>,
}

impl DecodeList {
    /// Builds a list from base words, lifting each over `walks`.
    pub fn from_words(words: &[Word], walks: &WalkCollection) -> Result<Self, DecodeError> {
        let entries = words
            .iter()
            .map(|z| Ok(DecodeEntry { z: z.clone(), y: direct_sum_lift(z, walks)? }))
            .collect::<Result<Vec<_>, DecodeError>>()?;
        Ok(DecodeList { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> Vec<Word> {
        self.entries.iter().map(|e| e.z.clone()).collect()
    }
}

/// A list decoder for one level: every z with Δ(lift(z), ỹ) ≤ 1/2 − √η.
pub trait ListDecoderBackend {
    fn decode(&self, level: &LevelView<'_>, y: &Word, eta: Rational) -> Result<DecodeList, DecodeError>;

    /// A ζ-cover of the list; the exact list is one.
    fn cover(&self, level: &LevelView<'_>, y: &Word, eta: Rational, zeta: Rational) -> Result<DecodeList, DecodeError> {
        let _ = zeta;
        self.decode(level, y, eta)
    }
}

/// Exhaustive enumeration of the level code.
#[derive(Clone, Copy, Debug, Default)]
pub struct BruteForceBackend;

impl ListDecoderBackend for BruteForceBackend {
    fn decode(&self, level: &LevelView<'_>, y: &Word, eta: Rational) -> Result<DecodeList, DecodeError> {
        let n = level.lifted.len();
        if y.len() != n {
            return Err(F2Error::LengthMismatch { expected: n, found: y.len() }.into());
        }
        let mut entries = Vec::new();
        level.lifted.for_each_codeword(|m, w| {
            let d = w.hamming(y).expect("lengths checked");
            if within_list_radius(d, n, eta) {
                entries.push(DecodeEntry { z: level.code.encode_index(m), y: w.clone() });
            }
        })?;
        entries.sort_by(|a, b| a.z.cmp(&b.z));
        Ok(DecodeList { entries })
    }
}

/// Uniform distribution over the level codewords whose lifts lie within the list radius.
pub fn brute_force_ensemble(level: &LevelView<'_>, y: &Word, eta: Rational) -> Result<BruteForceEnsemble, DecodeError> {
    let list = BruteForceBackend.decode(level, y, eta)?;
    if list.is_empty() {
        return Err(DecodeError::EmptyList);
    }
    BruteForceEnsemble::uniform(list.words())
}

/// Propagation rounding on the brute-force ensemble followed by majority vote, repeated
/// over seeds; rounded words that are list members are reported.
#[derive(Clone, Debug)]
pub struct RoundingBackend {
    pub l: usize,
    pub trials: usize,
    pub seed: u64,
}

impl ListDecoderBackend for RoundingBackend {
    fn decode(&self, level: &LevelView<'_>, y: &Word, eta: Rational) -> Result<DecodeList, DecodeError> {
        let truth = BruteForceBackend.decode(level, y, eta)?;
        if truth.is_empty() {
            return Ok(truth);
        }
        let ens = BruteForceEnsemble::uniform(truth.words())?;
        let mut found: Vec<Word> = Vec::new();
        for t in 0..self.trials {
            let (_, conditioned) = propagation_rounding(&ens, level.walks, self.l, self.seed.wrapping_add(t as u64))?;
            let z = majority_vote(&conditioned)?;
            if truth.entries.iter().any(|e| e.z == z) && !found.contains(&z) {
                found.push(z);
            }
        }
        found.sort();
        DecodeList::from_words(&found, level.walks)
    }
}

pub fn list_decode_level<B: ListDecoderBackend>(
    backend: &B,
    level: &LevelView<'_>,
    y: &Word,
    eta: Rational,
) -> Result<DecodeList, DecodeError> {
    backend.decode(level, y, eta)
}

fn closest_unique<'w>(candidates: impl Iterator<Item = (&'w Word, usize)>) -> Option<&'w Word> {
    let mut best: Option<(&Word, usize)> = None;
    let mut tied = false;
    for (z, d) in candidates {
        match best {
            Some((b, bd)) if d == bd && b != z => tied = true,
            Some((_, bd)) if d >= bd => {}
            _ => {
                best = Some((z, d));
                tied = false;
            }
        }
    }
    if tied {
        None
    } else {
        best.map(|(z, _)| z)
    }
}

/// The list entry closest to ỹ; `None` (Failure) on an empty list or a distance tie.
pub fn unique_decode_level<B: ListDecoderBackend>(
    backend: &B,
    level: &LevelView<'_>,
    y: &Word,
    eta: Rational,
) -> Result<Option<Word>, DecodeError> {
    let list = backend.decode(level, y, eta)?;
    let dists = list.entries.iter().map(|e| e.y.hamming(y)).collect::<Result<Vec<_>, _>>()?;
    Ok(closest_unique(list.entries.iter().map(|e| &e.z).zip(dists)).cloned())
}

/// Thresholds and radii of the decoders.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderConfig {
    pub eta0: Rational,
    pub eta: Rational,
    pub zeta: Rational,
    pub thresholds: ThresholdSet,
}

impl DecoderConfig {
    /// Requires η < η0 < 1/4; ζ = 1/8 − η0/8; thresholds evaluated at arity k.
    pub fn new(eta0: Rational, eta: Rational, k: usize) -> Result<Self, DecodeError> {
        if !(Rational::zero() < eta && eta < eta0 && eta0 < Rational::new(1, 4)) {
            return Err(DecodeError::BadConfig(format!("need 0 < η < η0 < 1/4, got η = {eta}, η0 = {eta0}")));
        }
        let eta_f = *eta.numer() as f64 / *eta.denom() as f64;
        Ok(DecoderConfig {
            eta0,
            eta,
            zeta: Rational::new(1, 8) - eta0 / 8,
            thresholds: thresholds(eta_f.log2(), k as u64),
        })
    }

    /// η < 1/16, so that the list radius 1/2 − √η exceeds 1/4.
    pub fn unique_path_ok(&self) -> bool {
        self.eta < Rational::new(1, 16)
    }
}

/// Per-level list sizes of one decode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelTrace {
    pub level: usize,
    pub list_size: usize,
    pub pruned_size: Option<usize>,
}

/// Result of a cascade decode; `codeword` is `None` on Failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CascadeDecode {
    pub codeword: Option<Word>,
    pub trace: Vec<LevelTrace>,
    pub nodes: usize,
}

fn check_top(cascade: &Cascade, y: &Word) -> Result<(), DecodeError> {
    let n = cascade.code(cascade.depth()).len();
    if y.len() != n {
        return Err(F2Error::LengthMismatch { expected: n, found: y.len() }.into());
    }
    Ok(())
}

fn base_unique(cascade: &Cascade, y: &Word) -> Result<Option<Word>, DecodeError> {
    match brute_force_unique_decode(cascade.base(), y) {
        Ok(z) => Ok(Some(z)),
        Err(F2Error::OutsideUniqueRadius) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Decodes top to bottom: list-decode level ℓ, decode each entry recursively down to C₀,
/// and return the base codeword whose lift is closest to ỹ.
pub fn cascade_unique_decode<B: ListDecoderBackend>(
    cascade: &Cascade,
    backend: &B,
    y: &Word,
    eta: Rational,
) -> Result<CascadeDecode, DecodeError> {
    check_top(cascade, y)?;
    let mut trace = Vec::new();
    let mut nodes = 0;
    let codeword = unique_rec(cascade, backend, cascade.depth(), y, eta, &mut trace, &mut nodes)?;
    trace.sort_by_key(|t| std::cmp::Reverse(t.level));
    Ok(CascadeDecode { codeword, trace, nodes })
}

fn unique_rec<B: ListDecoderBackend>(
    cascade: &Cascade,
    backend: &B,
    i: usize,
    y: &Word,
    eta: Rational,
    trace: &mut Vec<LevelTrace>,
    nodes: &mut usize,
) -> Result<Option<Word>, DecodeError> {
    *nodes += 1;
    if i == 0 {
        return base_unique(cascade, y);
    }
    let list = backend.decode(&LevelView::of(cascade, i), y, eta)?;
    record(trace, i, list.len(), None);
    let mut candidates = Vec::new();
    for e in &list.entries {
        if let Some(z0) = unique_rec(cascade, backend, i - 1, &e.z, eta, trace, nodes)? {
            let d = cascade.lift_from_base(i, &z0)?.hamming(y)?;
            candidates.push((z0, d));
        }
    }
    Ok(closest_unique(candidates.iter().map(|(z, d)| (z, *d))).cloned())
}

fn record(trace: &mut Vec<LevelTrace>, level: usize, size: usize, pruned: Option<usize>) {
    if let Some(t) = trace.iter_mut().find(|t| t.level == level) {
        t.list_size = t.list_size.max(size);
        t.pruned_size = match (t.pruned_size, pruned) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    } else {
        trace.push(LevelTrace { level, list_size: size, pruned_size: pruned });
    }
}

/// bias(a ⊕ b) > 1 − 2ζ: the words agree up to complement outside a ζ fraction.
pub fn zeta_close(a: &Word, b: &Word, zeta: Rational) -> Result<bool, DecodeError> {
    Ok(bias(&a.xor(b)?) > Rational::one() - zeta * 2)
}

/// Greedy maximal independent set, in list order, of the graph joining entries whose
/// difference has bias > 1 − 2ζ.
pub fn zeta_cover_prune(list: &DecodeList, zeta: Rational) -> Result<DecodeList, DecodeError> {
    let mut kept: Vec<DecodeEntry> = Vec::new();
    for e in &list.entries {
        let mut independent = true;
        for k in &kept {
            if zeta_close(&k.z, &e.z, zeta)? {
                independent = false;
                break;
            }
        }
        if independent {
            kept.push(e.clone());
        }
    }
    Ok(DecodeList { entries: kept })
}

/// Every word of `truth` is ζ-close (up to complement) to some entry of `cover`.
pub fn is_zeta_cover(cover: &[Word], truth: &[Word], zeta: Rational) -> Result<bool, DecodeError> {
    for z in truth {
        let mut hit = false;
        for c in cover {
            if zeta_close(z, c, zeta)? {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per level: take a ζ-cover, prune it, recurse on the pruned entries and their complements.
/// The base codeword whose lift is closest to ỹ (and within the list radius) is returned.
pub fn fixed_poly_decode<B: ListDecoderBackend>(
    cascade: &Cascade,
    backend: &B,
    y: &Word,
    config: &DecoderConfig,
) -> Result<CascadeDecode, DecodeError> {
    check_top(cascade, y)?;
    let mut trace = Vec::new();
    let mut nodes = 0;
    let l = cascade.depth();
    let mut candidates = fixed_rec(cascade, backend, l, y, config, &mut trace, &mut nodes)?;
    candidates.sort();
    candidates.dedup();
    let n = y.len();
    let mut scored = Vec::new();
    for z0 in &candidates {
        let d = cascade.lift_from_base(l, z0)?.hamming(y)?;
        if within_list_radius(d, n, config.eta) {
            scored.push((z0, d));
        }
    }
    let codeword = closest_unique(scored.into_iter()).cloned();
    trace.sort_by_key(|t| std::cmp::Reverse(t.level));
    Ok(CascadeDecode { codeword, trace, nodes })
}

fn fixed_rec<B: ListDecoderBackend>(
    cascade: &Cascade,
    backend: &B,
    i: usize,
    y: &Word,
    config: &DecoderConfig,
    trace: &mut Vec<LevelTrace>,
    nodes: &mut usize,
) -> Result<Vec<Word>, DecodeError> {
    *nodes += 1;
    if i == 0 {
        return Ok(base_unique(cascade, y)?.into_iter().collect());
    }
    let cover = backend.cover(&LevelView::of(cascade, i), y, config.eta, config.zeta)?;
    let pruned = zeta_cover_prune(&cover, config.zeta)?;
    record(trace, i, cover.len(), Some(pruned.len()));
    let mut out = Vec::new();
    for e in &pruned.entries {
        for z in [e.z.clone(), e.z.complement()] {
            out.extend(fixed_rec(cascade, backend, i - 1, &z, config, trace, nodes)?);
        }
    }
    Ok(out)
}

/// (2/η)^ℓ.
pub fn fixed_poly_node_bound(eta: Rational, depth: usize) -> f64 {
    let e = *eta.numer() as f64 / *eta.denom() as f64;
    (2.0 / e).powi(depth as i32)
}

/// A multilinear polynomial over ±1 variables z_0..z_{n−1}; monomials are bitmasks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearPoly {
    n: usize,
    terms: BTreeMap<u64, BigRational>,
}

impl MultilinearPoly {
    pub fn zero(n: usize) -> Result<Self, DecodeError> {
        if n > MAX_POLY_VARS {
            return Err(DecodeError::TooManyVariables { found: n, cap: MAX_POLY_VARS });
        }
        Ok(MultilinearPoly { n, terms: BTreeMap::new() })
    }

    pub fn constant(n: usize, c: BigRational) -> Result<Self, DecodeError> {
        let mut p = Self::zero(n)?;
        p.add_term(0, c);
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<u64, BigRational> {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, mask: u64, c: BigRational) {
        let slot = self.terms.entry(mask).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    /// Product with z_i² = 1.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = MultilinearPoly { n: self.n.max(other.n), terms: BTreeMap::new() };
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a ^ b, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = MultilinearPoly { n: self.n, terms: BTreeMap::from([(0, BigRational::one())]) };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn evaluate(&self, point: &[i8]) -> BigRational {
        self.terms
            .iter()
            .map(|(m, c)| {
                let neg = (0..self.n).filter(|i| (m >> i) & 1 == 1 && point[*i] < 0).count() % 2 == 1;
                if neg {
                    -c.clone()
                } else {
                    c.clone()
                }
            })
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// A(z) = ⟨ỹ, lift(z)⟩ = E_t (−1)^{ỹ_t} ∏_{i∈t} z_i, with z_i = (−1)^{bit i}.
    pub fn lift_correlation(y: &Word, walks: &WalkCollection) -> Result<Self, DecodeError> {
        if y.len() != walks.count() {
            return Err(F2Error::LengthMismatch { expected: walks.count(), found: y.len() }.into());
        }
        let mut p = Self::zero(walks.ground_size())?;
        let w = BigRational::new(BigInt::one(), BigInt::from(walks.count()));
        for (t, tuple) in walks.iter().enumerate() {
            let mask = tuple.iter().fold(0u64, |m, &v| m ^ (1u64 << v));
            p.add_term(mask, if y.get(t) { -w.clone() } else { w.clone() });
        }
        Ok(p)
    }

    /// B(z) = ⟨z′, z⟩² with ⟨z′, z⟩ = E_i z′_i z_i.
    pub fn agreement_square(z: &Word) -> Result<Self, DecodeError> {
        let n = z.len();
        let mut p = Self::zero(n)?;
        let w = BigRational::new(BigInt::one(), BigInt::from(n));
        for i in 0..n {
            p.add_term(1u64 << i, if z.get(i) { -w.clone() } else { w.clone() });
        }
        Ok(p.mul(&p))
    }
}

/// ±1 point of a word: z_i = (−1)^{bit i}.
pub fn sign_point(z: &Word) -> Vec<i8> {
    (0..z.len()).map(|i| if z.get(i) { -1 } else { 1 }).collect()
}

/// The word of a ±1 point.
pub fn point_word(point: &[i8]) -> Result<Word, DecodeError> {
    let mut w = Word::zeros(point.len())?;
    for (i, &s) in point.iter().enumerate() {
        if s < 0 {
            w.set(i, true);
        }
    }
    Ok(w)
}

/// A product distribution on {±1}ⁿ given by the means E[z_i] ∈ [−1, 1].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductDistribution {
    pub means: Vec<BigRational>,
}

impl ProductDistribution {
    pub fn uniform(n: usize) -> Self {
        ProductDistribution { means: vec![BigRational::zero(); n] }
    }

    /// Pr[z_i = +1] = probs[i], converted exactly from f64.
    pub fn from_probabilities(probs: &[f64]) -> Result<Self, DecodeError> {
        let means = probs
            .iter()
            .map(|&p| {
                if !(0.0..=1.0).contains(&p) {
                    return Err(DecodeError::BadConfig(format!("probability {p} outside [0, 1]")));
                }
                let r = BigRational::from_float(p).expect("finite");
                Ok(r * BigRational::from_integer(2.into()) - BigRational::one())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ProductDistribution { means })
    }
}

/// Σ_T α_T ∏_{i∈T} E_ν[z_i], exactly.
pub fn product_expectation(
    nu: &ProductDistribution,
    poly: &MultilinearPoly,
    degree_cap: usize,
) -> Result<BigRational, DecodeError> {
    if nu.means.len() < poly.num_vars() {
        return Err(F2Error::LengthMismatch { expected: poly.num_vars(), found: nu.means.len() }.into());
    }
    let mut total = BigRational::zero();
    for (m, c) in poly.terms() {
        let degree = m.count_ones() as usize;
        if degree > degree_cap {
            return Err(DecodeError::DegreeTooHigh { degree, cap: degree_cap });
        }
        let mut term = c.clone();
        let mut bits = *m;
        while bits != 0 && !term.is_zero() {
            let i = bits.trailing_zeros() as usize;
            term *= &nu.means[i];
            bits &= bits - 1;
        }
        total += term;
    }
    Ok(total)
}

/// Output of [`derandomized_round`].
#[derive(Clone, Debug, PartialEq)]
pub struct DerandomizedRound {
    pub omega: Vec<i8>,
    pub k: u32,
    /// E[A·B^{2k}] before any coordinate is fixed and after each step.
    pub trace: Vec<BigRational>,
    pub oracle_calls: usize,
    pub a_value: BigRational,
    pub b_value: BigRational,
}

/// k = ⌈ln(1/(a(1−β)))/(2δ)⌉ + 1, forced by e^{−2kδ} < a(1−β).
pub fn derandomization_exponent(a: f64, beta: f64, delta: f64) -> Result<u32, DecodeError> {
    let target = a * (1.0 - beta);
    if !(target > 0.0 && delta > 0.0 && delta < 1.0) {
        return Err(DecodeError::BadConfig(format!("need a(1−β) > 0 and 0 < δ < 1, got {target}, {delta}")));
    }
    let k = ((1.0 / target).ln() / (2.0 * delta)).ceil().max(0.0) + 1.0;
    if k > u32::MAX as f64 / 4.0 {
        return Err(DecodeError::BadConfig("exponent too large".into()));
    }
    Ok(k as u32)
}

/// Fixes the coordinates one at a time to the sign maximizing the conditional expectation of
/// F = A·B^{2k} under ν (two oracle calls per coordinate, ties to +1).
pub fn derandomized_round(
    nu: &ProductDistribution,
    a_poly: &MultilinearPoly,
    b_poly: &MultilinearPoly,
    a: f64,
    beta: f64,
    delta: f64,
) -> Result<DerandomizedRound, DecodeError> {
    let n = nu.means.len();
    if a_poly.num_vars() > n || b_poly.num_vars() > n {
        return Err(DecodeError::BadConfig("polynomials use more variables than the distribution".into()));
    }
    let k = derandomization_exponent(a, beta, delta)?;
    let f = a_poly.mul(&b_poly.pow(2 * k));
    let target = BigRational::from_float(a * (1.0 - beta)).expect("finite");
    let cap = DEFAULT_DEGREE_CAP;
    let mut current = nu.clone();
    let mut value = product_expectation(&current, &f, cap)?;
    let mut calls = 1;
    let to_f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
    if value < target {
        return Err(DecodeError::PremiseViolated { step: 0, value: to_f(&value), target: to_f(&target) });
    }
    let mut trace = vec![value.clone()];
    for i in 0..n {
        current.means[i] = BigRational::one();
        let plus = product_expectation(&current, &f, cap)?;
        current.means[i] = -BigRational::one();
        let minus = product_expectation(&current, &f, cap)?;
        calls += 2;
        if plus >= minus {
            current.means[i] = BigRational::one();
            value = plus;
        } else {
            value = minus;
        }
        if value < target {
            return Err(DecodeError::PremiseViolated { step: i + 1, value: to_f(&value), target: to_f(&target) });
        }
        trace.push(value.clone());
    }
    let omega: Vec<i8> = current.means.iter().map(|m| if m.is_positive() { 1 } else { -1 }).collect();
    Ok(DerandomizedRound {
        a_value: a_poly.evaluate(&omega),
        b_value: b_poly.evaluate(&omega),
        omega,
        k,
        trace,
        oracle_calls: calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::{brute_force_list_decode, parse_code};
    use crate::graphs::{cayley_graph, Group};
    use crate::lifting::{build_cascade, lift_code};
    use crate::rpp::WideReplacementProduct;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn tv(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
    }

    #[test]
    fn propagation_point_mass_is_fixed() {
        let z = w("10110");
        let ens = BruteForceEnsemble::point_mass(z.clone());
        let walks = WalkCollection::explicit(2, 5, vec![0, 1, 2, 3, 3, 4]).unwrap();
        for seed in 0..50 {
            assert_eq!(propagation_rounding(&ens, &walks, 4, seed).unwrap().0, z);
        }
    }

    #[test]
    fn propagation_on_complementary_pair() {
        let ens = BruteForceEnsemble::uniform(vec![w("000"), w("111")]).unwrap();
        let walks = WalkCollection::explicit(3, 3, vec![0, 1, 2]).unwrap();
        let mut seen = [0usize; 2];
        for seed in 0..200 {
            let (out, cond) = propagation_rounding(&ens, &walks, 3, seed).unwrap();
            assert!(out == w("000") || out == w("111"));
            assert_eq!(cond.support().len(), 1);
            seen[out.get(0) as usize] += 1;
        }
        assert!(seen[0] > 50 && seen[1] > 50);
    }

    #[test]
    fn propagation_errors() {
        let ens = BruteForceEnsemble::uniform(vec![w("000"), w("111")]).unwrap();
        let walks = WalkCollection::explicit(3, 3, vec![0, 1, 2]).unwrap();
        assert!(matches!(propagation_rounding(&ens, &walks, 2, 0), Err(DecodeError::LocalityTooSmall { .. })));
        let small = ens.clone().with_locality(8);
        assert!(matches!(propagation_rounding(&small, &walks, 3, 0), Err(DecodeError::LocalityTooSmall { .. })));
        assert!(propagation_rounding(&ens.with_locality(9), &walks, 3, 0).is_ok());
    }

    #[test]
    fn propagation_reproduces_the_joint_distribution() {
        let words = vec![w("0000"), w("0110"), w("1011"), w("1101")];
        let weights = vec![0.1, 0.2, 0.3, 0.4];
        let ens = BruteForceEnsemble::weighted(words.clone(), weights.clone()).unwrap();
        let walks = WalkCollection::explicit(4, 4, vec![0, 1, 2, 3]).unwrap();
        let mut counts = [0.0; 4];
        let trials = 10_000;
        for seed in 0..trials {
            let (out, _) = propagation_rounding(&ens, &walks, 4, seed).unwrap();
            let i = words.iter().position(|x| *x == out).expect("outputs lie in the support");
            counts[i] += 1.0 / trials as f64;
        }
        assert!(tv(&counts, &weights) <= 0.05);
    }

    #[test]
    fn tensoriality_examples() {
        let pair = BruteForceEnsemble::uniform(vec![w("000"), w("111")]).unwrap();
        let walks = WalkCollection::explicit(2, 3, vec![0, 1]).unwrap();
        assert!((tensoriality_defect(&pair, &walks).unwrap() - 1.0).abs() < 1e-12);
        let prod = BruteForceEnsemble::product(&[0.3, 0.6, 0.9]).unwrap();
        let all = WalkCollection::explicit(2, 3, vec![0, 1, 1, 2, 2, 0]).unwrap();
        assert!(tensoriality_defect(&prod, &all).unwrap() < 1e-12);
        let point = BruteForceEnsemble::point_mass(w("101"));
        assert!(tensoriality_defect(&point, &all).unwrap() < 1e-12);
        assert!(two_step_defect(&point, &all).unwrap() < 1e-12);
        // Pairs of the single walk (0,1) on {000,111}: joint over (Z0,Z1,Z0,Z1) vs product of halves.
        // Joint: 1/2 on 0000 and 1111; product of two copies of {1/2 on 00, 1/2 on 11}: 1/4 on
        // 0000, 0011, 1100, 1111. L1 = 1/4 + 1/4 + 1/4 + 1/4 = 1.
        assert!((two_step_defect(&pair, &walks).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tree_defects_bound_the_tensoriality_defect() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let support: Vec<Word> = (0..5).map(|_| Word::random(6, &mut rng).unwrap()).collect();
        let weights: Vec<f64> = (1..=5).map(|i| i as f64).collect();
        let ens = BruteForceEnsemble::weighted(support, weights).unwrap();
        let tuples: Vec<u32> = (0..40).map(|_| rng.gen_range(0..6)).collect();
        let walks = WalkCollection::explicit(4, 6, tuples).unwrap();
        let total = tensoriality_defect(&ens, &walks).unwrap();
        assert!(total > 1e-3);
        for tree in SplittingTree::all(4).unwrap() {
            let nodes = tree_split_defects(&ens, &walks, &tree).unwrap();
            assert_eq!(nodes.len(), 3);
            assert!(total <= nodes.iter().sum::<f64>() + 1e-12);
        }
        let prod = BruteForceEnsemble::product(&[0.2, 0.4, 0.6, 0.8, 0.1, 0.9]).unwrap();
        let distinct = WalkCollection::explicit(4, 6, vec![0, 1, 2, 3, 5, 4, 3, 2]).unwrap();
        assert!(split_defect(&prod, &distinct, 0, 1, 3).unwrap() < 1e-12);
        assert!(split_defect(&prod, &walks, 2, 1, 3).is_err());
    }

    #[test]
    fn implausible_assignments_have_zero_mass() {
        let ens = BruteForceEnsemble::product(&[0.5, 0.5]).unwrap();
        let d = ens.tuple_distribution(&[0, 0]).unwrap();
        assert_eq!(d[1], 0.0);
        assert_eq!(d[2], 0.0);
        assert!((d[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn restriction_consistency() {
        let ens = BruteForceEnsemble::weighted(vec![w("0011"), w("0101"), w("1110")], vec![1.0, 2.0, 3.0]).unwrap();
        let joint = ens.tuple_distribution(&[0, 2, 3]).unwrap();
        let pair = ens.tuple_distribution(&[0, 3]).unwrap();
        for a in 0..4usize {
            let summed: f64 = (0..2usize).map(|b| joint[(a & 1) | (b << 1) | ((a >> 1) << 2)]).sum();
            assert!((summed - pair[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn majority_examples() {
        assert_eq!(majority_vote(&BruteForceEnsemble::point_mass(w("1011"))).unwrap(), w("1011"));
        let pair = BruteForceEnsemble::uniform(vec![w("0110"), w("1001")]).unwrap();
        assert_eq!(majority_vote(&pair).unwrap(), w("0000"));
        let lean = BruteForceEnsemble::product(&[0.1, 0.1, 0.1]).unwrap();
        assert_eq!(majority_vote(&lean).unwrap(), w("000"));
    }

    #[test]
    fn conditioning_and_covariance() {
        let ens =
            BruteForceEnsemble::uniform(vec![w("0011"), w("0101"), w("1110"), w("1000")]).unwrap().with_locality(10);
        let c = ens.condition(&[0, 0], &[true, true]).unwrap();
        assert_eq!(c.locality(), 9);
        assert_eq!(c.support(), &[w("1110"), w("1000")]);
        assert!(matches!(ens.condition(&[0, 0], &[true, false]), Err(DecodeError::NullEvent)));
        assert!(covariance_is_psd(&ens, &[0, 1, 2, 3], 1e-12).unwrap());
        assert!(covariance_is_psd(&c, &[1, 2, 3], 1e-12).unwrap());
    }

    #[test]
    fn cloud_view_reads_outer_vertices() {
        let ens = BruteForceEnsemble::uniform(vec![w("01"), w("10")]).unwrap();
        let view = CloudView::new(ens, vec![0, 0, 1, 1]).unwrap();
        let d = view.tuple_distribution(&[0, 1]).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-12 && (d[3] - 0.5).abs() < 1e-12);
        let d = view.tuple_distribution(&[1, 2]).unwrap();
        assert!((d[1] - 0.5).abs() < 1e-12 && (d[2] - 0.5).abs() < 1e-12);
        let c = view.condition(&[3], &[true]).unwrap();
        assert_eq!(c.marginal(0).unwrap(), 0.0);
        assert_eq!(c.marginal(2).unwrap(), 1.0);
    }

    fn small_cascade() -> Cascade {
        let g = cayley_graph(Group::Binary(2), &[1, 2]).unwrap();
        let h = cayley_graph(Group::Binary(2), &[1, 2]).unwrap();
        let p = WideReplacementProduct::new(g, h, 2).unwrap();
        let base = parse_code("code 2 4\n1000\n0100\n").unwrap();
        build_cascade(&base, &p, 2, 2).unwrap()
    }

    #[test]
    fn brute_force_backend_matches_direct_list() {
        let c = small_cascade();
        for i in 1..=c.depth() {
            let view = LevelView::of(&c, i);
            let n = view.lifted.len();
            let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
            for _ in 0..64 {
                let y = Word::random(n, &mut rng).unwrap();
                for eta in [Rational::new(1, 100), Rational::new(1, 20), Rational::new(1, 5)] {
                    let list = BruteForceBackend.decode(&view, &y, eta).unwrap();
                    let radius_words: Vec<Word> = view
                        .lifted
                        .codewords()
                        .unwrap()
                        .into_iter()
                        .filter(|x| within_list_radius(x.hamming(&y).unwrap(), n, eta))
                        .collect();
                    let mut lifted: Vec<Word> = list.entries.iter().map(|e| e.y.clone()).collect();
                    lifted.sort();
                    let mut expect = radius_words;
                    expect.sort();
                    assert_eq!(lifted, expect);
                    for e in &list.entries {
                        assert_eq!(direct_sum_lift(&e.z, view.walks).unwrap(), e.y);
                    }
                }
            }
        }
    }

    #[test]
    fn unique_decode_examples() {
        let c = small_cascade();
        let eta = Rational::new(1, 100);
        let z0 = c.base().encode_index(3);
        let y = c.lift_from_base(2, &z0).unwrap();
        let out = cascade_unique_decode(&c, &BruteForceBackend, &y, eta).unwrap();
        assert_eq!(out.codeword, Some(z0.clone()));
        let view = LevelView::of(&c, 2);
        assert_eq!(unique_decode_level(&BruteForceBackend, &view, &y, eta).unwrap(), Some(c.code(1).encode_index(3)));
        // Far from the code the list is empty.
        let n = y.len();
        let mut far = None;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let cand = Word::random(n, &mut rng).unwrap();
            if BruteForceBackend.decode(&view, &cand, eta).unwrap().is_empty() {
                far = Some(cand);
                break;
            }
        }
        let far = far.expect("a word outside every list radius");
        assert_eq!(cascade_unique_decode(&c, &BruteForceBackend, &far, eta).unwrap().codeword, None);
        assert_eq!(unique_decode_level(&BruteForceBackend, &view, &far, eta).unwrap(), None);
    }

    #[test]
    fn zeta_prune_examples() {
        let walks = WalkCollection::explicit(1, 8, (0..8).collect()).unwrap();
        let z = w("10110010");
        let list = DecodeList::from_words(&[z.clone(), z.clone(), z.complement()], &walks).unwrap();
        assert_eq!(zeta_cover_prune(&list, Rational::new(1, 16)).unwrap().len(), 1);
        // Δ = 1/8 gives bias 3/4 = 1 − 2ζ at ζ = 1/8: no edge.
        let other = w("10110011");
        let list = DecodeList::from_words(&[z.clone(), other.clone()], &walks).unwrap();
        assert_eq!(zeta_cover_prune(&list, Rational::new(1, 8)).unwrap().len(), 2);
        assert_eq!(zeta_cover_prune(&list, Rational::new(1, 4)).unwrap().len(), 1);
        assert!(is_zeta_cover(std::slice::from_ref(&z), std::slice::from_ref(&other), Rational::new(1, 4)).unwrap());
        assert!(!is_zeta_cover(&[z], &[other], Rational::new(1, 8)).unwrap());
    }

    #[test]
    fn prune_collapses_clusters() {
        let n = 32;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let centers = [Word::random(n, &mut rng).unwrap(), Word::random(n, &mut rng).unwrap()];
        assert!(bias(&centers[0].xor(&centers[1]).unwrap()) < Rational::new(1, 2));
        let walks = WalkCollection::explicit(1, n, (0..n as u32).collect()).unwrap();
        let mut words = Vec::new();
        for i in 0..20 {
            let mut x = centers[i % 2].clone();
            x.flip(i % n);
            if i % 3 == 0 {
                x = x.complement();
            }
            words.push(x);
        }
        let list = DecodeList::from_words(&words, &walks).unwrap();
        assert_eq!(zeta_cover_prune(&list, Rational::new(1, 8)).unwrap().len(), 2);
    }

    #[test]
    fn fixed_poly_agrees_with_unique() {
        let c = small_cascade();
        let config = DecoderConfig::new(Rational::new(1, 50), Rational::new(1, 100), 2).unwrap();
        assert_eq!(config.zeta, Rational::new(1, 8) - Rational::new(1, 400));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = c.code(2).len();
        for trial in 0..40 {
            let z0 = c.base().encode_index(trial % 4);
            let mut y = c.lift_from_base(2, &z0).unwrap();
            for _ in 0..(trial as usize % 6) {
                y.flip(rng.gen_range(0..n));
            }
            let u = cascade_unique_decode(&c, &BruteForceBackend, &y, config.eta).unwrap();
            let f = fixed_poly_decode(&c, &BruteForceBackend, &y, &config).unwrap();
            assert_eq!(u.codeword, f.codeword);
            assert!(f.nodes as f64 <= fixed_poly_node_bound(config.eta, c.depth()));
        }
    }

    #[test]
    fn config_validation() {
        assert!(DecoderConfig::new(Rational::new(1, 4), Rational::new(1, 100), 3).is_err());
        assert!(DecoderConfig::new(Rational::new(1, 50), Rational::new(1, 20), 3).is_err());
        let c = DecoderConfig::new(Rational::new(1, 5), Rational::new(1, 10), 3).unwrap();
        assert!(!c.unique_path_ok());
    }

    #[test]
    fn rounding_backend_finds_list_members() {
        let base = parse_code("code 2 4\n1000\n0100\n").unwrap();
        let walks = WalkCollection::explicit(2, 4, vec![0, 1, 1, 2, 2, 3, 3, 0, 0, 2, 1, 3]).unwrap();
        let lifted = lift_code(&base, &walks).unwrap();
        let view = LevelView { code: &base, lifted: &lifted, walks: &walks };
        let y = lifted.encode_index(1);
        let backend = RoundingBackend { l: 2, trials: 8, seed: 1 };
        let eta = Rational::new(1, 100);
        let found = backend.decode(&view, &y, eta).unwrap();
        let truth = BruteForceBackend.decode(&view, &y, eta).unwrap();
        assert!(!found.is_empty());
        assert!(found.entries.iter().all(|e| truth.entries.contains(e)));
        assert!(brute_force_list_decode(&base, &found.entries[0].z, Rational::zero()).unwrap().len() == 1);
    }

    #[test]
    fn polynomial_expectations() {
        let c = MultilinearPoly::constant(3, rat(5, 7)).unwrap();
        assert_eq!(product_expectation(&ProductDistribution::uniform(3), &c, 4).unwrap(), rat(5, 7));
        let mut m = MultilinearPoly::zero(2).unwrap();
        m.add_term(0b11, rat(1, 1));
        assert_eq!(product_expectation(&ProductDistribution::uniform(2), &m, 4).unwrap(), rat(0, 1));
        let b = MultilinearPoly::agreement_square(&w("0110")).unwrap();
        assert_eq!(product_expectation(&ProductDistribution::uniform(4), &b, 4).unwrap(), rat(1, 4));
        assert!(matches!(
            product_expectation(&ProductDistribution::uniform(2), &m, 1),
            Err(DecodeError::DegreeTooHigh { degree: 2, cap: 1 })
        ));
    }

    #[test]
    fn polynomial_evaluation_matches_definitions() {
        let walks = WalkCollection::explicit(3, 6, vec![0, 1, 2, 1, 3, 5, 4, 4, 0, 2, 5, 3]).unwrap();
        let y = w("1010");
        let a = MultilinearPoly::lift_correlation(&y, &walks).unwrap();
        let zs = w("011010");
        let b = MultilinearPoly::agreement_square(&zs).unwrap();
        for m in 0..64u64 {
            let z = Word::from_u64(m, 6).unwrap();
            let lifted = direct_sum_lift(&z, &walks).unwrap();
            let agree = 4 - 2 * lifted.hamming(&y).unwrap() as i64;
            assert_eq!(a.evaluate(&sign_point(&z)), rat(agree, 4));
            let corr = 6 - 2 * z.hamming(&zs).unwrap() as i64;
            assert_eq!(b.evaluate(&sign_point(&z)), rat(corr * corr, 36));
        }
    }

    #[test]
    fn derandomization_examples() {
        let n = 8;
        let walks = WalkCollection::explicit(
            2,
            n,
            (0..n as u32).flat_map(|i| [i, (i + 1) % n as u32]).chain([0, 4, 2, 6]).collect(),
        )
        .unwrap();
        let z_star = w("10110100");
        let y = direct_sum_lift(&z_star, &walks).unwrap();
        let a_poly = MultilinearPoly::lift_correlation(&y, &walks).unwrap();
        let b_poly = MultilinearPoly::agreement_square(&z_star).unwrap();
        let probs: Vec<f64> = (0..n).map(|i| if z_star.get(i) { 0.05 } else { 0.95 }).collect();
        let nu = ProductDistribution::from_probabilities(&probs).unwrap();
        let (a, beta, delta) = (0.5, 0.5, 0.5);
        let out = derandomized_round(&nu, &a_poly, &b_poly, a, beta, delta).unwrap();
        assert_eq!(out.k, derandomization_exponent(a, beta, delta).unwrap());
        assert_eq!(out.oracle_calls, 2 * n + 1);
        assert!(out.trace.windows(2).all(|p| p[0] <= p[1]));
        let target = BigRational::from_float(a * (1.0 - beta)).unwrap();
        assert!(out.a_value >= target);
        let b_abs = out.b_value.abs();
        assert!(b_abs >= BigRational::from_float(1.0 - delta).unwrap());
        // Exhaustive: the chosen point attains the final trace value and no point beats the maximum.
        let f = a_poly.mul(&b_poly.pow(2 * out.k));
        let mut best = BigRational::zero();
        for m in 0..1u64 << n {
            let z = Word::from_u64(m, n).unwrap();
            let v = f.evaluate(&sign_point(&z));
            if v > best {
                best = v;
            }
        }
        let reached = f.evaluate(&out.omega);
        assert_eq!(&reached, out.trace.last().unwrap());
        assert!(reached <= best);
        assert_eq!(point_word(&out.omega).unwrap(), z_star);
    }

    #[test]
    fn derandomization_trivial_and_violated() {
        let n = 4;
        let a_poly = MultilinearPoly::constant(n, rat(1, 2)).unwrap();
        let b_poly = MultilinearPoly::constant(n, rat(1, 1)).unwrap();
        let out = derandomized_round(&ProductDistribution::uniform(n), &a_poly, &b_poly, 0.5, 0.1, 0.5).unwrap();
        assert_eq!(out.a_value, rat(1, 2));
        assert_eq!(out.b_value, rat(1, 1));
        let bad = MultilinearPoly::constant(n, rat(-1, 1)).unwrap();
        assert!(matches!(
            derandomized_round(&ProductDistribution::uniform(n), &bad, &b_poly, 0.5, 0.1, 0.5),
            Err(DecodeError::PremiseViolated { step: 0, .. })
        ));
    }
}
