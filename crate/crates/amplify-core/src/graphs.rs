//! Regular graphs given by rotation maps, Cayley graphs over Z_n and F_2^m,
//! and small-bias generator sets.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::f2::walsh_hadamard;
use crate::spectra::{RealOperator, DEFAULT_DIM_CAP};
use crate::Rational;

/// Largest m for which small-bias sets are certified exhaustively.
pub const MAX_CERTIFIED_BITS: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("generator multiset is not closed under inversion")]
    NotClosedUnderInverse,
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(String),
    #[error("small-bias construction exceeded its target bias: measured {measured}, target {target}")]
    BiasCertificationFailed { measured: Rational, target: Rational },
    #[error("size {size} exceeds the cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("rotation map is not an involution at ({v}, {j})")]
    NotInvolution { v: usize, j: usize },
    #[error("label out of range: {0}")]
    OutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// The groups used for Cayley graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    /// Z_n under addition.
    Cyclic(u64),
    /// F_2^m under XOR, elements as m-bit integers.
    Binary(u32),
}

impl Group {
    pub fn order(&self) -> u64 {
        match *self {
            Group::Cyclic(n) => n,
            Group::Binary(m) => 1u64 << m,
        }
    }

    pub fn op(&self, a: u64, b: u64) -> u64 {
        match *self {
            Group::Cyclic(n) => (a + b) % n,
            Group::Binary(_) => a ^ b,
        }
    }

    pub fn inverse(&self, a: u64) -> u64 {
        match *self {
            Group::Cyclic(n) => (n - a % n) % n,
            Group::Binary(_) => a,
        }
    }

    pub fn contains(&self, a: u64) -> bool {
        a < self.order()
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Cyclic(n) => write!(f, "z{n}"),
            Group::Binary(m) => write!(f, "f2^{m}"),
        }
    }
}

impl FromStr for Group {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Group, GraphError> {
        let s = s.trim();
        if let Some(m) = s.strip_prefix("f2^") {
            let m: u32 = m.parse().map_err(|_| GraphError::Parse(format!("bad group {s:?}")))?;
            if m == 0 || m > 32 {
                return Err(GraphError::Parse(format!("unsupported bit length {m}")));
            }
            Ok(Group::Binary(m))
        } else if let Some(n) = s.strip_prefix('z') {
            let n: u64 = n.parse().map_err(|_| GraphError::Parse(format!("bad group {s:?}")))?;
            if n == 0 {
                return Err(GraphError::Parse("empty cyclic group".into()));
            }
            Ok(Group::Cyclic(n))
        } else {
            Err(GraphError::Parse(format!("unknown group {s:?}")))
        }
    }
}

/// The group and ordered generator multiset of a Cayley graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CayleyData {
    pub group: Group,
    pub generators: Vec<u64>,
}

/// A d-regular graph on [n] with rotation map (v, j) ↦ (v', j') and, when the
/// label update ignores the vertex, the local inversion φ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationGraph {
    n: usize,
    d: usize,
    rot: Vec<(u32, u32)>,
    phi: Option<Vec<usize>>,
    cayley: Option<CayleyData>,
}

impl RotationGraph {
    /// Builds a graph from its rotation map, listed as `rot[v·d + j]`.
    pub fn from_rotation(n: usize, d: usize, rot: Vec<(usize, usize)>) -> Result<RotationGraph, GraphError> {
        if n == 0 || d == 0 {
            return Err(GraphError::OutOfRange("graphs need vertices and edges".into()));
        }
        if rot.len() != n * d {
            return Err(GraphError::OutOfRange(format!("expected {} rotation entries, found {}", n * d, rot.len())));
        }
        if n > u32::MAX as usize || d > u32::MAX as usize {
            return Err(GraphError::TooLarge { size: n.max(d), cap: u32::MAX as usize });
        }
        for &(v, j) in &rot {
            if v >= n || j >= d {
                return Err(GraphError::OutOfRange(format!("({v}, {j})")));
            }
        }
        let rot: Vec<(u32, u32)> = rot.into_iter().map(|(v, j)| (v as u32, j as u32)).collect();
        let mut g = RotationGraph { n, d, rot, phi: None, cayley: None };
        for v in 0..n {
            for j in 0..d {
                let (w, k) = g.rot(v, j);
                if g.rot(w, k) != (v, j) {
                    return Err(GraphError::NotInvolution { v, j });
                }
            }
        }
        g.phi = local_invertibility_check(&g);
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn rot(&self, v: usize, j: usize) -> (usize, usize) {
        let (w, k) = self.rot[v * self.d + j];
        (w as usize, k as usize)
    }

    #[inline]
    pub fn neighbor(&self, v: usize, j: usize) -> usize {
        self.rot[v * self.d + j].0 as usize
    }

    pub fn phi(&self) -> Option<&[usize]> {
        self.phi.as_deref()
    }

    pub fn cayley(&self) -> Option<&CayleyData> {
        self.cayley.as_ref()
    }

    /// Whether this is a Cayley graph on F_2^m for the given m.
    pub fn is_binary_cayley(&self, m: u32) -> bool {
        matches!(self.cayley, Some(CayleyData { group: Group::Binary(bits), .. }) if bits == m)
    }
}

/// Cayley graph with rot(r, j) = (r·a_j, φ(j)), where φ pairs each generator
/// occurrence with an occurrence of its inverse.
pub fn cayley_graph(group: Group, generators: &[u64]) -> Result<RotationGraph, GraphError> {
    let order = group.order();
    if order > u32::MAX as u64 {
        return Err(GraphError::TooLarge { size: order as usize, cap: u32::MAX as usize });
    }
    if generators.is_empty() {
        return Err(GraphError::OutOfRange("empty generator multiset".into()));
    }
    for &a in generators {
        if !group.contains(a) {
            return Err(GraphError::OutOfRange(format!("generator {a} not in {group}")));
        }
    }
    let d = generators.len();
    let mut phi = vec![usize::MAX; d];
    let mut waiting: HashMap<u64, Vec<usize>> = HashMap::new();
    for (j, &a) in generators.iter().enumerate() {
        let inv = group.inverse(a);
        if inv == a {
            phi[j] = j;
            continue;
        }
        match waiting.get_mut(&inv).and_then(|q| if q.is_empty() { None } else { Some(q.remove(0)) }) {
            Some(k) => {
                phi[j] = k;
                phi[k] = j;
            }
            None => waiting.entry(a).or_default().push(j),
        }
    }
    if phi.contains(&usize::MAX) {
        return Err(GraphError::NotClosedUnderInverse);
    }
    let n = order as usize;
    let mut rot = Vec::with_capacity(n * d);
    for r in 0..order {
        for (j, &a) in generators.iter().enumerate() {
            rot.push((group.op(r, a) as u32, phi[j] as u32));
        }
    }
    Ok(RotationGraph { n, d, rot, phi: Some(phi), cayley: Some(CayleyData { group, generators: generators.to_vec() }) })
}

/// Recovers φ when the second coordinate of rot depends only on the label.
pub fn local_invertibility_check(g: &RotationGraph) -> Option<Vec<usize>> {
    let phi: Vec<usize> = (0..g.degree()).map(|j| g.rot(0, j).1).collect();
    for v in 0..g.n() {
        for (j, &p) in phi.iter().enumerate() {
            if g.rot(v, j).1 != p {
                return None;
            }
        }
    }
    Some(phi)
}

pub fn normalized_adjacency(g: &RotationGraph) -> Result<RealOperator, GraphError> {
    normalized_adjacency_capped(g, DEFAULT_DIM_CAP)
}

/// Row-stochastic symmetric matrix with entry (u, v) = multiplicity(u, v)/d.
pub fn normalized_adjacency_capped(g: &RotationGraph, cap: usize) -> Result<RealOperator, GraphError> {
    if g.n() > cap {
        return Err(GraphError::TooLarge { size: g.n(), cap });
    }
    let mut m = nalgebra::DMatrix::zeros(g.n(), g.n());
    let w = 1.0 / g.degree() as f64;
    for v in 0..g.n() {
        for j in 0..g.degree() {
            m[(v, g.neighbor(v, j))] += w;
        }
    }
    Ok(RealOperator::new(m))
}

/// Applies the normalized adjacency operator to a vector without forming the matrix.
pub fn apply_adjacency(g: &RotationGraph, x: &[f64], out: &mut [f64]) {
    let w = 1.0 / g.degree() as f64;
    for (v, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..g.degree() {
            acc += x[g.neighbor(v, j)];
        }
        *o = acc * w;
    }
}

/// A multiset of elements of F_2^m with a certified bound on every nontrivial character sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiasedSet {
    pub m: u32,
    pub generators: Vec<u64>,
    pub certified_bias: Rational,
}

impl BiasedSet {
    pub fn cayley_graph(&self) -> Result<RotationGraph, GraphError> {
        cayley_graph(Group::Binary(self.m), &self.generators)
    }
}

/// Primitive polynomials over GF(2), indexed by degree.
const FIELD_MODULI: [u64; 17] =
    [0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443, 0x8003, 0x1100B];

/// Multiplication in GF(2^r) modulo the fixed primitive polynomial of degree r.
pub(crate) fn gf_mul(mut a: u64, mut b: u64, r: u32) -> u64 {
    let modulus = FIELD_MODULI[r as usize];
    let mut acc = 0u64;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if (a >> r) & 1 == 1 {
            a ^= modulus;
        }
    }
    acc
}

fn power_of_two_exponent(q: Rational) -> Option<u32> {
    if *q.denom() != 1 || *q.numer() <= 0 {
        return None;
    }
    let v = *q.numer() as u128;
    v.is_power_of_two().then(|| v.trailing_zeros())
}

/// Small-bias set of size m²/β² by the powering construction: for x, y in GF(2^r)
/// with 2^r = m/β, the element with bits ⟨x^i, y⟩ for i = 0..m−1.
pub fn aghp_generators(m: u32, beta: Rational) -> Result<BiasedSet, GraphError> {
    if m == 0 || beta <= Rational::from_integer(0) {
        return Err(GraphError::OutOfRange("m and β must be positive".into()));
    }
    if m > MAX_CERTIFIED_BITS {
        return Err(GraphError::TooLarge { size: m as usize, cap: MAX_CERTIFIED_BITS as usize });
    }
    let ratio = Rational::from_integer(m as i128) / beta;
    let r = power_of_two_exponent(ratio).ok_or_else(|| GraphError::NotPowerOfTwo(format!("m/β = {ratio}")))?;
    if r == 0 || r as usize >= FIELD_MODULI.len() {
        return Err(GraphError::TooLarge { size: 1usize << r.min(40), cap: 1 << (FIELD_MODULI.len() - 1) });
    }
    let q = 1u64 << r;
    let mut generators = Vec::with_capacity((q * q) as usize);
    for x in 0..q {
        let mut powers = Vec::with_capacity(m as usize);
        let mut p = 1u64;
        for _ in 0..m {
            powers.push(p);
            p = gf_mul(p, x, r);
        }
        for y in 0..q {
            let mut element = 0u64;
            for (i, &xi) in powers.iter().enumerate() {
                element |= (((xi & y).count_ones() & 1) as u64) << i;
            }
            generators.push(element);
        }
    }
    let mut set = BiasedSet { m, generators, certified_bias: beta };
    let measured = verify_small_bias(&set)?;
    if measured > beta {
        return Err(GraphError::BiasCertificationFailed { measured, target: beta });
    }
    set.certified_bias = beta;
    Ok(set)
}

/// Signed character sums Σ_{a∈A} χ_S(a) for every S ⊆ [m], indexed by the bitmask of S.
pub fn character_sums(m: u32, elements: &[u64]) -> Result<Vec<i64>, GraphError> {
    if m > MAX_CERTIFIED_BITS {
        return Err(GraphError::TooLarge { size: m as usize, cap: MAX_CERTIFIED_BITS as usize });
    }
    let mut counts = vec![0i64; 1usize << m];
    for &a in elements {
        let slot =
            counts.get_mut(a as usize).ok_or_else(|| GraphError::OutOfRange(format!("element {a} outside F_2^{m}")))?;
        *slot += 1;
    }
    walsh_hadamard(&mut counts);
    Ok(counts)
}

/// Exact max over nonempty S of |E_{a∈A} χ_S(a)|.
pub fn verify_small_bias(set: &BiasedSet) -> Result<Rational, GraphError> {
    let sums = character_sums(set.m, &set.generators)?;
    let worst = sums.iter().skip(1).map(|x| x.abs()).max().unwrap_or(0);
    Ok(Rational::new(worst as i128, set.generators.len() as i128))
}

/// Second singular value of a Cayley graph on F_2^m from its character sums.
pub fn binary_cayley_sigma2(m: u32, generators: &[u64]) -> Result<f64, GraphError> {
    let sums = character_sums(m, generators)?;
    let worst = sums.iter().skip(1).map(|x| x.abs()).max().unwrap_or(0);
    Ok(worst as f64 / generators.len() as f64)
}

/// Parses `graph <n> <d>` followed by n·d lines `v j v' j'`, or the shorthand
/// `cayley z<n>|f2^<m> g1,g2,...`.
pub fn parse_graph(text: &str) -> Result<RotationGraph, GraphError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| GraphError::Parse("empty graph description".into()))?;
    if header.starts_with("cayley") {
        return parse_cayley_shorthand(header);
    }
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "graph" {
        return Err(GraphError::Parse(format!("bad graph header {header:?}")));
    }
    let n: usize = parts[1].parse().map_err(|_| GraphError::Parse("bad vertex count".into()))?;
    let d: usize = parts[2].parse().map_err(|_| GraphError::Parse("bad degree".into()))?;
    let mut rot = vec![(usize::MAX, usize::MAX); n * d];
    let mut seen = 0;
    for line in lines {
        let nums: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| GraphError::Parse(format!("bad number {t:?}"))))
            .collect::<Result<_, _>>()?;
        if nums.len() != 4 {
            return Err(GraphError::Parse(format!("rotation line {line:?} needs four numbers")));
        }
        let (v, j) = (nums[0], nums[1]);
        if v >= n || j >= d {
            return Err(GraphError::OutOfRange(format!("({v}, {j})")));
        }
        rot[v * d + j] = (nums[2], nums[3]);
        seen += 1;
    }
    if seen != n * d || rot.iter().any(|&(v, _)| v == usize::MAX) {
        return Err(GraphError::Parse(format!("expected {} rotation lines", n * d)));
    }
    RotationGraph::from_rotation(n, d, rot)
}

fn parse_cayley_shorthand(line: &str) -> Result<RotationGraph, GraphError> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(GraphError::Parse(format!("bad cayley shorthand {line:?}")));
    }
    let group: Group = parts[1].parse()?;
    let gens: Vec<u64> = parts[2]
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| GraphError::Parse(format!("bad generator {t:?}"))))
        .collect::<Result<_, _>>()?;
    cayley_graph(group, &gens)
}

/// Writes the shorthand for Cayley graphs and the full rotation table otherwise.
pub fn format_graph(g: &RotationGraph) -> String {
    if let Some(c) = g.cayley() {
        let gens: Vec<String> = c.generators.iter().map(u64::to_string).collect();
        return format!("cayley {} {}\n", c.group, gens.join(","));
    }
    format_rotation_table(g)
}

pub fn format_rotation_table(g: &RotationGraph) -> String {
    let mut out = format!("graph {} {}\n", g.n(), g.degree());
    for v in 0..g.n() {
        for j in 0..g.degree() {
            let (w, k) = g.rot(v, j);
            out.push_str(&format!("{v} {j} {w} {k}\n"));
        }
    }
    out
}
