//! The tweaked s-wide replacement product of an outer graph G and an inner
//! graph H on [d1]^s: rotation steps, step operators, walk spaces, sign
//! operators and the spectral facts about them.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::f2::Word;
use crate::graphs::{binary_cayley_sigma2, normalized_adjacency_capped, GraphError, RotationGraph};
use crate::spectra::{operator_norm_capped, second_singular_value_capped, RealOperator, SpectraError, DEFAULT_DIM_CAP};

/// Default bound on enumerated walk counts.
pub const DEFAULT_WALK_CAP: usize = 1_000_000;

/// Slack added to the spectral bounds checked by [`zigzag_spectral_checks`].
pub const SPECTRAL_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProductError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error("step index {i} out of range for width {s}")]
    IndexOutOfRange { i: usize, s: usize },
    #[error("{count} walks exceed the walk cap {cap}")]
    TooManyWalks { count: u128, cap: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("spectral bound violated: {0}")]
    BoundViolated(String),
    #[error("width {s} too small; at least {min} required")]
    WidthTooSmall { s: usize, min: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// The s-wide replacement product of G (locally invertible, degree d1) with H on [d1]^s.
#[derive(Clone, Debug)]
pub struct WideReplacementProduct {
    outer: RotationGraph,
    inner: RotationGraph,
    s: usize,
    d1: usize,
    place: Vec<usize>,
}

impl WideReplacementProduct {
    pub fn new(outer: RotationGraph, inner: RotationGraph, s: usize) -> Result<WideReplacementProduct, ProductError> {
        if s == 0 {
            return Err(ProductError::WidthTooSmall { s, min: 1 });
        }
        if outer.phi().is_none() {
            return Err(ProductError::PreconditionViolated("outer graph is not locally invertible".into()));
        }
        let d1 = outer.degree();
        let clouds = (d1 as u128).checked_pow(s as u32);
        if clouds != Some(inner.n() as u128) {
            return Err(ProductError::PreconditionViolated(format!(
                "inner graph has {} vertices but d1^s = {d1}^{s}",
                inner.n()
            )));
        }
        let place = (0..s).map(|i| d1.pow(i as u32)).collect();
        Ok(WideReplacementProduct { outer, inner, s, d1, place })
    }

    pub fn outer(&self) -> &RotationGraph {
        &self.outer
    }

    pub fn inner(&self) -> &RotationGraph {
        &self.inner
    }

    pub fn width(&self) -> usize {
        self.s
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.inner.degree()
    }

    pub fn cloud_size(&self) -> usize {
        self.inner.n()
    }

    /// Number of product vertices n·d1^s.
    pub fn vertex_count(&self) -> usize {
        self.outer.n() * self.inner.n()
    }

    /// Choices per step, d2².
    pub fn step_choices(&self) -> usize {
        self.d2() * self.d2()
    }

    #[inline]
    pub fn vertex(&self, v: usize, h: usize) -> usize {
        v * self.inner.n() + h
    }

    #[inline]
    pub fn split_vertex(&self, x: usize) -> (usize, usize) {
        (x / self.inner.n(), x % self.inner.n())
    }

    #[inline]
    pub fn g_component(&self, x: usize) -> usize {
        x / self.inner.n()
    }

    /// Coordinate i of the cloud label h ∈ [d1]^s.
    #[inline]
    pub fn coordinate(&self, h: usize, i: usize) -> usize {
        (h / self.place[i]) % self.d1
    }

    /// Rot_i: follow the outer edge labelled by coordinate i and replace that coordinate.
    pub fn rot_i(&self, i: usize, v: usize, h: usize) -> Result<(usize, usize), ProductError> {
        if i >= self.s {
            return Err(ProductError::IndexOutOfRange { i, s: self.s });
        }
        if v >= self.outer.n() || h >= self.inner.n() {
            return Err(ProductError::DimensionMismatch(format!("vertex ({v}, {h}) out of range")));
        }
        Ok(self.rot_unchecked(i, v, h))
    }

    #[inline]
    fn rot_unchecked(&self, i: usize, v: usize, h: usize) -> (usize, usize) {
        let a = self.coordinate(h, i);
        let (w, b) = self.outer.rot(v, a);
        (w, h - a * self.place[i] + b * self.place[i])
    }

    /// Successor of product vertex x under step i with choice c = a·d2 + b:
    /// inner edge a, then Rot_i, then inner edge b.
    #[inline]
    pub fn successor(&self, i: usize, x: usize, c: usize) -> usize {
        let d2 = self.d2();
        let (v, h) = self.split_vertex(x);
        let h1 = self.inner.neighbor(h, c / d2);
        let (w, h2) = self.rot_unchecked(i, v, h1);
        self.vertex(w, self.inner.neighbor(h2, c % d2))
    }

    fn check_index(&self, i: usize) -> Result<(), ProductError> {
        if i >= self.s {
            return Err(ProductError::IndexOutOfRange { i, s: self.s });
        }
        Ok(())
    }

    fn check_dim(&self, cap: usize) -> Result<(), ProductError> {
        let n = self.vertex_count();
        if n > cap {
            return Err(SpectraError::TooLarge { rows: n, cols: n, cap }.into());
        }
        Ok(())
    }

    /// Transition counts of step i: `counts[x·N + y]` is the number of choices leading from x to y.
    pub fn step_counts(&self, i: usize, cap: usize) -> Result<Vec<u32>, ProductError> {
        self.check_index(i)?;
        self.check_dim(cap)?;
        let n = self.vertex_count();
        let mut counts = vec![0u32; n * n];
        for x in 0..n {
            for c in 0..self.step_choices() {
                counts[x * n + self.successor(i, x, c)] += 1;
            }
        }
        Ok(counts)
    }

    /// The operator (I⊗A_H)·G_i·(I⊗A_H).
    pub fn step_operator(&self, i: usize) -> Result<RealOperator, ProductError> {
        self.step_operator_capped(i, DEFAULT_DIM_CAP)
    }

    pub fn step_operator_capped(&self, i: usize, cap: usize) -> Result<RealOperator, ProductError> {
        let counts = self.step_counts(i, cap)?;
        let n = self.vertex_count();
        let scale = 1.0 / self.step_choices() as f64;
        Ok(RealOperator::new(DMatrix::from_fn(n, n, |x, y| counts[x * n + y] as f64 * scale)))
    }

    /// (I⊗A_H) f, f a function on product vertices.
    pub fn apply_inner(&self, f: &[f64]) -> Vec<f64> {
        let d2 = self.d2();
        let scale = 1.0 / d2 as f64;
        (0..self.vertex_count())
            .map(|x| {
                let (v, h) = self.split_vertex(x);
                (0..d2).map(|a| f[self.vertex(v, self.inner.neighbor(h, a))]).sum::<f64>() * scale
            })
            .collect()
    }

    /// G_i f: the permutation operator of Rot_i.
    pub fn apply_rotation(&self, i: usize, f: &[f64]) -> Vec<f64> {
        (0..self.vertex_count())
            .map(|x| {
                let (v, h) = self.split_vertex(x);
                let (w, h2) = self.rot_unchecked(i, v, h);
                f[self.vertex(w, h2)]
            })
            .collect()
    }

    /// Step operator applied to f without forming the matrix.
    pub fn apply_step(&self, i: usize, f: &[f64]) -> Vec<f64> {
        let g = self.apply_inner(f);
        let g = self.apply_rotation(i, &g);
        self.apply_inner(&g)
    }

    /// Sign operator P_z: (−1)^{z_v} on every vertex of cloud v.
    pub fn sign_vector(&self, z: &Word) -> Result<Vec<f64>, ProductError> {
        if z.len() != self.outer.n() {
            return Err(ProductError::DimensionMismatch(format!(
                "word of length {} over {} outer vertices",
                z.len(),
                self.outer.n()
            )));
        }
        let signs = z.signs();
        Ok((0..self.vertex_count()).map(|x| signs[self.g_component(x)]).collect())
    }

    /// Number of walks n·d1^s·d2^{2(k2−k1)} in W[k1,k2].
    pub fn walk_count(&self, k1: usize, k2: usize) -> u128 {
        let steps = k2.saturating_sub(k1) as u32;
        (self.vertex_count() as u128).saturating_mul((self.step_choices() as u128).saturating_pow(steps))
    }

    /// All walks of W[k1,k2] in lexicographic order of (start vertex, step choices).
    pub fn enumerate_walks(&self, k1: usize, k2: usize) -> Result<WalkSpace, ProductError> {
        self.enumerate_walks_capped(k1, k2, DEFAULT_WALK_CAP)
    }

    pub fn enumerate_walks_capped(&self, k1: usize, k2: usize, cap: usize) -> Result<WalkSpace, ProductError> {
        if k2 < k1 {
            return Err(ProductError::PreconditionViolated(format!("k1 = {k1} > k2 = {k2}")));
        }
        let count = self.walk_count(k1, k2);
        if count > cap as u128 {
            return Err(ProductError::TooManyWalks { count, cap });
        }
        let mut len = 1;
        let mut vertices: Vec<u32> = (0..self.vertex_count() as u32).collect();
        for time in k1..k2 {
            let i = time % self.s;
            let choices = self.step_choices();
            let mut next = Vec::with_capacity(vertices.len() / len * (len + 1) * choices);
            for walk in vertices.chunks(len) {
                let last = *walk.last().expect("walks are nonempty") as usize;
                for c in 0..choices {
                    next.extend_from_slice(walk);
                    next.push(self.successor(i, last, c) as u32);
                }
            }
            vertices = next;
            len += 1;
        }
        Ok(WalkSpace { k1, k2, len, clouds: self.cloud_size(), vertices })
    }

    /// |⟨1, P_z M_{t−2} P_z ⋯ M_0 P_z 1⟩| under the uniform measure, where M_i is step i mod s.
    pub fn exact_lift_bias(&self, z: &Word, t: usize) -> Result<f64, ProductError> {
        if t == 0 {
            return Err(ProductError::PreconditionViolated("walks need at least one vertex".into()));
        }
        let signs = self.sign_vector(z)?;
        let mut f = signs.clone();
        for time in (0..t - 1).rev() {
            f = self.apply_step(time % self.s, &f);
            for (x, s) in f.iter_mut().zip(&signs) {
                *x *= s;
            }
        }
        Ok((f.iter().sum::<f64>() / f.len() as f64).abs())
    }

    /// Whether ⟨v⊗1, ∏_{i=k1}^{k2} G_i(I⊗A_H)P_z (w⊗1)⟩ = ⟨v, (A_G M_z)^{k2−k1+1} w⟩ within 1e−10.
    pub fn pseudorandomness_identity_check(
        &self,
        z: &Word,
        k1: usize,
        k2: usize,
        v: &[f64],
        w: &[f64],
    ) -> Result<bool, ProductError> {
        let (lhs, rhs) = self.pseudorandomness_identity_sides(z, k1, k2, v, w)?;
        Ok((lhs - rhs).abs() <= 1e-10)
    }

    /// Both sides of the identity checked by [`Self::pseudorandomness_identity_check`].
    pub fn pseudorandomness_identity_sides(
        &self,
        z: &Word,
        k1: usize,
        k2: usize,
        v: &[f64],
        w: &[f64],
    ) -> Result<(f64, f64), ProductError> {
        if !self.d1.is_power_of_two() {
            return Err(ProductError::PreconditionViolated(format!("d1 = {} is not a power of two", self.d1)));
        }
        let bits = self.s as u32 * self.d1.trailing_zeros();
        if !self.inner.is_binary_cayley(bits) {
            return Err(ProductError::PreconditionViolated(format!("inner graph is not a Cayley graph on F_2^{bits}")));
        }
        if k1 > k2 || k2 >= self.s {
            return Err(ProductError::PreconditionViolated(format!("need 0 ≤ k1 ≤ k2 < s, got ({k1}, {k2})")));
        }
        let n = self.outer.n();
        if v.len() != n || w.len() != n {
            return Err(ProductError::DimensionMismatch("test vectors must live on the outer vertices".into()));
        }
        let signs = self.sign_vector(z)?;
        let mut f: Vec<f64> = (0..self.vertex_count()).map(|x| w[self.g_component(x)]).collect();
        for i in k1..=k2 {
            for (x, s) in f.iter_mut().zip(&signs) {
                *x *= s;
            }
            f = self.apply_inner(&f);
            f = self.apply_rotation(i, &f);
        }
        let lhs =
            (0..self.vertex_count()).map(|x| v[self.g_component(x)] * f[x]).sum::<f64>() / self.vertex_count() as f64;

        let zs = z.signs();
        let mut g = w.to_vec();
        let mut tmp = vec![0.0; n];
        for _ in k1..=k2 {
            for (x, s) in g.iter_mut().zip(&zs) {
                *x *= s;
            }
            crate::graphs::apply_adjacency(&self.outer, &g, &mut tmp);
            std::mem::swap(&mut g, &mut tmp);
        }
        let rhs = v.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        Ok((lhs, rhs))
    }

    /// The operator ∏_{i=0}^{s−1} P_z G_i (I⊗A_H), applied with i = 0 first.
    pub fn sign_block_operator(&self, z: &Word, cap: usize) -> Result<RealOperator, ProductError> {
        self.check_dim(cap)?;
        let n = self.vertex_count();
        let signs = self.sign_vector(z)?;
        let mut m = DMatrix::zeros(n, n);
        for col in 0..n {
            let mut f = vec![0.0; n];
            f[col] = 1.0;
            for i in 0..self.s {
                f = self.apply_inner(&f);
                f = self.apply_rotation(i, &f);
                for (x, s) in f.iter_mut().zip(&signs) {
                    *x *= s;
                }
            }
            for (row, value) in f.into_iter().enumerate() {
                m[(row, col)] = value;
            }
        }
        Ok(RealOperator::new(m))
    }

    pub fn outer_sigma2(&self, cap: usize) -> Result<f64, ProductError> {
        Ok(second_singular_value_capped(&normalized_adjacency_capped(&self.outer, cap)?, cap)?)
    }

    /// σ₂(H), from character sums when H is a Cayley graph on F_2^m.
    pub fn inner_sigma2(&self, cap: usize) -> Result<f64, ProductError> {
        if let Some(c) = self.inner.cayley() {
            if let crate::graphs::Group::Binary(m) = c.group {
                if m <= crate::graphs::MAX_CERTIFIED_BITS {
                    return Ok(binary_cayley_sigma2(m, &c.generators)?);
                }
            }
        }
        Ok(second_singular_value_capped(&normalized_adjacency_capped(&self.inner, cap)?, cap)?)
    }
}

/// The walks of W[k1,k2] as consecutive runs of product-vertex indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkSpace {
    pub k1: usize,
    pub k2: usize,
    len: usize,
    clouds: usize,
    vertices: Vec<u32>,
}

impl WalkSpace {
    pub fn count(&self) -> usize {
        self.vertices.len() / self.len
    }

    /// Vertices per walk, k2 − k1 + 1.
    pub fn walk_len(&self) -> usize {
        self.len
    }

    pub fn walk(&self, index: usize) -> &[u32] {
        &self.vertices[index * self.len..(index + 1) * self.len]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.vertices.chunks(self.len)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<u32> {
        self.vertices
    }

    /// G-components of every walk, flattened.
    pub fn outer_projection(&self) -> Vec<u32> {
        let clouds = self.clouds as u32;
        self.vertices.iter().map(|&x| x / clouds).collect()
    }

    /// Walk dump: one line per walk of space-separated `(v,h)` pairs.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for walk in self.iter() {
            let parts: Vec<String> =
                walk.iter().map(|&x| format!("({},{})", x as usize / self.clouds, x as usize % self.clouds)).collect();
            out.push_str(&parts.join(" "));
            out.push('\n');
        }
        out
    }
}

/// The companion bound σ^s + s·σ^{s−1} + s²·σ^{s−3} on one block of s signed steps.
pub fn sign_block_bound(sigma_h: f64, s: usize) -> Result<f64, ProductError> {
    if s < 3 {
        return Err(ProductError::WidthTooSmall { s, min: 3 });
    }
    let s_f = s as f64;
    Ok(sigma_h.powi(s as i32) + s_f * sigma_h.powi(s as i32 - 1) + s_f * s_f * sigma_h.powi(s as i32 - 3))
}

/// (σ^{s−1} + (s−1)σ^{s−2} + (s−1)²σ^{s−4})^{⌊(t−1)/s⌋} with σ = σ₂(H²).
pub fn bias_upper_bound(sigma_h2: f64, s: usize, t: usize) -> Result<f64, ProductError> {
    if s < 5 {
        return Err(ProductError::WidthTooSmall { s, min: 5 });
    }
    if t == 0 {
        return Err(ProductError::PreconditionViolated("t ≥ 1 required".into()));
    }
    let sm = (s - 1) as f64;
    let si = s as i32;
    let block = sigma_h2.powi(si - 1) + sm * sigma_h2.powi(si - 2) + sm * sm * sigma_h2.powi(si - 4);
    Ok(block.powi(((t - 1) / s) as i32))
}

/// Per-step σ₂ values and the zig-zag bounds they were checked against.
#[derive(Clone, Debug, PartialEq)]
pub struct ZigzagReport {
    pub sigma_outer: f64,
    pub sigma_inner: f64,
    pub step_sigmas: Vec<f64>,
    pub zigzag_bound: f64,
    /// 2σ₂(H), present when σ₂(G) ≤ σ₂(H).
    pub refined_bound: Option<f64>,
}

impl ZigzagReport {
    pub fn max_step_sigma(&self) -> f64 {
        self.step_sigmas.iter().copied().fold(0.0, f64::max)
    }
}

/// σ₂(G) + 2σ₂(H) + σ₂(H)².
pub fn zigzag_bound(sigma_outer: f64, sigma_inner: f64) -> f64 {
    sigma_outer + 2.0 * sigma_inner + sigma_inner * sigma_inner
}

/// Checks one step operator against the zig-zag bound and, when it applies, the refined bound.
pub fn check_step_operator(
    op: &RealOperator,
    sigma_outer: f64,
    sigma_inner: f64,
    cap: usize,
) -> Result<f64, ProductError> {
    let sigma = second_singular_value_capped(op, cap)?;
    let bound = zigzag_bound(sigma_outer, sigma_inner);
    if sigma > bound + SPECTRAL_SLACK {
        return Err(ProductError::BoundViolated(format!("σ₂(step) = {sigma} > {bound}")));
    }
    if sigma_outer <= sigma_inner && sigma > 2.0 * sigma_inner + SPECTRAL_SLACK {
        return Err(ProductError::BoundViolated(format!("σ₂(step) = {sigma} > 2σ₂(H) = {}", 2.0 * sigma_inner)));
    }
    Ok(sigma)
}

pub fn zigzag_spectral_checks(p: &WideReplacementProduct) -> Result<ZigzagReport, ProductError> {
    zigzag_spectral_checks_capped(p, DEFAULT_DIM_CAP)
}

pub fn zigzag_spectral_checks_capped(p: &WideReplacementProduct, cap: usize) -> Result<ZigzagReport, ProductError> {
    let sigma_outer = p.outer_sigma2(cap)?;
    let sigma_inner = p.inner_sigma2(cap)?;
    let mut step_sigmas = Vec::with_capacity(p.width());
    for i in 0..p.width() {
        let op = p.step_operator_capped(i, cap)?;
        step_sigmas.push(check_step_operator(&op, sigma_outer, sigma_inner, cap)?);
    }
    Ok(ZigzagReport {
        sigma_outer,
        sigma_inner,
        step_sigmas,
        zigzag_bound: zigzag_bound(sigma_outer, sigma_inner),
        refined_bound: (sigma_outer <= sigma_inner).then_some(2.0 * sigma_inner),
    })
}

/// Operator norm of the signed block and its companion bound, for instances meeting
/// bias(z) + 2σ₂(G) ≤ σ₂(H)².
#[derive(Clone, Debug, PartialEq)]
pub struct SignBlockCheck {
    pub hypothesis_holds: bool,
    pub norm: f64,
    pub bound: f64,
}

pub fn sign_block_check(p: &WideReplacementProduct, z: &Word, cap: usize) -> Result<SignBlockCheck, ProductError> {
    let sigma_outer = p.outer_sigma2(cap)?;
    let sigma_inner = p.inner_sigma2(cap)?;
    let eps0 = crate::f2::bias(z);
    let eps0 = *eps0.numer() as f64 / *eps0.denom() as f64;
    let hypothesis_holds = eps0 + 2.0 * sigma_outer <= sigma_inner * sigma_inner + 1e-12;
    let norm = operator_norm_capped(&p.sign_block_operator(z, cap)?, cap)?;
    let bound = sign_block_bound(sigma_inner, p.width())?;
    Ok(SignBlockCheck { hypothesis_holds, norm, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{aghp_generators, cayley_graph, Group};
    use crate::lifting::direct_sum_lift_tuples;
    use crate::Rational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// K5 outer graph with a 4-cycle on the cloud labels, s = 1.
    fn figure_product() -> WideReplacementProduct {
        let g = cayley_graph(Group::Cyclic(5), &[1, 4, 2, 3]).unwrap();
        let h = cayley_graph(Group::Cyclic(4), &[1, 3]).unwrap();
        WideReplacementProduct::new(g, h, 1).unwrap()
    }

    fn desk_product(d1_bits: u32, s: usize, seed: u64) -> WideReplacementProduct {
        let g = cayley_graph(Group::Binary(d1_bits + 1), &(1..=(1u64 << d1_bits)).collect::<Vec<_>>()).unwrap();
        let m = s as u32 * d1_bits;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens: Vec<u64> = (0..3).map(|_| rng.gen_range(1..(1u64 << m))).collect();
        let h = cayley_graph(Group::Binary(m), &gens).unwrap();
        WideReplacementProduct::new(g, h, s).unwrap()
    }

    #[test]
    fn rot_examples() {
        let p = figure_product();
        // Labels are 0-based: generator index 0 is the first generator.
        assert_eq!(p.rot_i(0, 0, 0).unwrap(), (1, 1));
        for v in 0..5 {
            for h in 0..4 {
                let (w, h2) = p.rot_i(0, v, h).unwrap();
                assert_eq!(p.rot_i(0, w, h2).unwrap(), (v, h));
            }
        }
        assert_eq!(p.rot_i(1, 0, 0), Err(ProductError::IndexOutOfRange { i: 1, s: 1 }));
    }

    #[test]
    fn rot_changes_only_one_coordinate() {
        let p = desk_product(2, 3, 1);
        for v in 0..p.outer().n() {
            for h in 0..p.cloud_size() {
                for i in 0..3 {
                    let (_, h2) = p.rot_i(i, v, h).unwrap();
                    for j in (0..3).filter(|&j| j != i) {
                        assert_eq!(p.coordinate(h, j), p.coordinate(h2, j));
                    }
                }
            }
        }
    }

    #[test]
    fn walk_counts() {
        let p = figure_product();
        assert_eq!(p.enumerate_walks(0, 0).unwrap().count(), 20);
        assert_eq!(p.enumerate_walks(0, 2).unwrap().count(), 320);
        assert!(matches!(p.enumerate_walks_capped(0, 2, 100), Err(ProductError::TooManyWalks { count: 320, .. })));
        let q = desk_product(1, 2, 4);
        for (k1, k2) in [(0, 0), (0, 1), (1, 3), (2, 4)] {
            let w = q.enumerate_walks(k1, k2).unwrap();
            assert_eq!(w.count() as u128, q.walk_count(k1, k2));
        }
    }

    #[test]
    fn walks_follow_steps() {
        let p = desk_product(1, 2, 8);
        let w = p.enumerate_walks(1, 3).unwrap();
        for walk in w.iter() {
            for (j, pair) in walk.windows(2).enumerate() {
                let i = (1 + j) % 2;
                let reachable = (0..p.step_choices()).any(|c| p.successor(i, pair[0] as usize, c) == pair[1] as usize);
                assert!(reachable);
            }
        }
    }

    #[test]
    fn step_operator_properties() {
        for p in [figure_product(), desk_product(1, 2, 3), desk_product(2, 2, 5)] {
            for i in 0..p.width() {
                let m = p.step_operator(i).unwrap();
                assert!(m.is_row_stochastic());
                assert!(m.is_column_stochastic(1e-12));
                assert!(m.is_symmetric(1e-15));
                let f: Vec<f64> = (0..p.vertex_count()).map(|x| (x as f64).sin()).collect();
                let direct = m.apply(&f);
                let free = p.apply_step(i, &f);
                for (a, b) in direct.iter().zip(&free) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn trivial_cloud_reduces_to_outer_walk() {
        let g = cayley_graph(Group::Cyclic(5), &[1, 4, 2, 3]).unwrap();
        let h = cayley_graph(Group::Cyclic(1), &[0]).unwrap();
        let p = WideReplacementProduct::new(g.clone(), cayley_graph(Group::Cyclic(4), &[0]).unwrap(), 1).unwrap();
        // H with a single self-loop generator: A_H = I, so the step is the permutation G_0.
        let m = p.step_operator(0).unwrap();
        for x in 0..p.vertex_count() {
            let (v, hh) = p.split_vertex(x);
            let (w, h2) = p.rot_i(0, v, hh).unwrap();
            assert_eq!(m.matrix()[(x, p.vertex(w, h2))], 1.0);
        }
        assert!(WideReplacementProduct::new(g, h, 1).is_err());
    }

    #[test]
    fn exact_lift_bias_matches_enumeration() {
        for (p, t) in [(figure_product(), 3), (desk_product(1, 2, 2), 4), (desk_product(1, 3, 6), 3)] {
            let walks = p.enumerate_walks(0, t - 1).unwrap();
            let proj = walks.outer_projection();
            let n = p.outer().n();
            for zv in 0..(1u64 << n) {
                let z = Word::from_u64(zv, n).unwrap();
                let lifted = direct_sum_lift_tuples(&z, &proj, t).unwrap();
                let b = crate::f2::bias(&lifted);
                let enumerated = *b.numer() as f64 / *b.denom() as f64;
                let operator = p.exact_lift_bias(&z, t).unwrap();
                assert!((enumerated - operator).abs() < 1e-10, "z={z}: {enumerated} vs {operator}");
            }
        }
    }

    #[test]
    fn exact_lift_bias_examples() {
        let p = desk_product(1, 2, 2);
        let zero = Word::zeros(p.outer().n()).unwrap();
        assert!((p.exact_lift_bias(&zero, 5).unwrap() - 1.0).abs() < 1e-12);
        // Complete inner graph with loops and s = 1: outer projections are uniform walks on G.
        let g = cayley_graph(Group::Binary(2), &[1, 2, 3]).unwrap();
        let h = cayley_graph(Group::Cyclic(3), &[0, 1, 2]).unwrap();
        let p = WideReplacementProduct::new(g.clone(), h, 1).unwrap();
        for zv in 0..16 {
            let z = Word::from_u64(zv, 4).unwrap();
            for t in 1..5 {
                let walks = crate::lifting::expander_walk_collection(&g, t).unwrap();
                let b = crate::f2::bias(&crate::lifting::direct_sum_lift(&z, &walks).unwrap());
                let expected = *b.numer() as f64 / *b.denom() as f64;
                assert!((p.exact_lift_bias(&z, t).unwrap() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_check_examples() {
        let g = cayley_graph(Group::Cyclic(8), &[1, 7, 3, 5]).unwrap();
        let h = cayley_graph(Group::Binary(4), &[1, 2, 4, 8, 15]).unwrap();
        let p = WideReplacementProduct::new(g, h, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
        let w: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
        let zero = Word::zeros(8).unwrap();
        let (lhs, rhs) = p.pseudorandomness_identity_sides(&zero, 0, 0, &v, &w).unwrap();
        let mut aw = vec![0.0; 8];
        crate::graphs::apply_adjacency(p.outer(), &w, &mut aw);
        let direct = v.iter().zip(&aw).map(|(a, b)| a * b).sum::<f64>() / 8.0;
        assert!((lhs - direct).abs() < 1e-12 && (rhs - direct).abs() < 1e-12);
        for _ in 0..20 {
            let z = Word::random(8, &mut rng).unwrap();
            let k1 = rng.gen_range(0..2);
            let k2 = rng.gen_range(k1..2);
            assert!(p.pseudorandomness_identity_check(&z, k1, k2, &v, &w).unwrap());
        }
        let cyc = cayley_graph(Group::Cyclic(16), &[1, 15]).unwrap();
        let q = WideReplacementProduct::new(cayley_graph(Group::Cyclic(8), &[1, 7, 3, 5]).unwrap(), cyc, 2).unwrap();
        assert!(matches!(
            q.pseudorandomness_identity_check(&zero, 0, 1, &v, &w),
            Err(ProductError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn bias_bound_examples() {
        assert_eq!(bias_upper_bound(0.0, 5, 17).unwrap(), 0.0);
        let s = 6;
        let vacuous = bias_upper_bound(1.0, s, 13).unwrap();
        assert_eq!(vacuous, (1.0 + 5.0 + 25.0f64).powi(2));
        // 10⁻⁴ + 4·10⁻³ + 16·10⁻¹
        assert!((bias_upper_bound(0.1, 5, 6).unwrap() - 1.6041).abs() < 1e-12);
        assert_eq!(bias_upper_bound(0.1, 4, 6), Err(ProductError::WidthTooSmall { s: 4, min: 5 }));
        assert!((sign_block_bound(0.5, 3).unwrap() - (0.125 + 0.75 + 9.0)).abs() < 1e-15);
    }

    #[test]
    fn zigzag_examples() {
        // Complete inner graph with loops: (I⊗J)G_i(I⊗J) averages clouds.
        let g = cayley_graph(Group::Cyclic(8), &[1, 7]).unwrap();
        let h = cayley_graph(Group::Binary(1), &[0, 1]).unwrap();
        let p = WideReplacementProduct::new(g, h, 1).unwrap();
        let report = zigzag_spectral_checks(&p).unwrap();
        assert!(report.sigma_inner.abs() < 1e-15);
        assert!(report.step_sigmas[0] <= report.sigma_outer + 1e-12);

        let g = cayley_graph(Group::Cyclic(8), &[1, 7, 3, 5]).unwrap();
        let set = aghp_generators(4, Rational::new(1, 2)).unwrap();
        let p = WideReplacementProduct::new(g, set.cayley_graph().unwrap(), 2).unwrap();
        let report = zigzag_spectral_checks(&p).unwrap();
        assert!(report.max_step_sigma() <= report.zigzag_bound + 1e-9);

        let bad = RealOperator::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.0 });
        assert!(matches!(check_step_operator(&bad, 0.1, 0.1, 64), Err(ProductError::BoundViolated(_))));
    }

    #[test]
    fn sign_block_norm_bound_on_complete_graphs() {
        // σ₂(G) = σ₂(H) = 0 and a balanced word meet the hypothesis with equality.
        let g = cayley_graph(Group::Binary(2), &[0, 1, 2, 3]).unwrap();
        let h = cayley_graph(Group::Binary(6), &(0..64).collect::<Vec<_>>()).unwrap();
        let p = WideReplacementProduct::new(g, h, 3).unwrap();
        let z: Word = "0110".parse().unwrap();
        let check = sign_block_check(&p, &z, 1024).unwrap();
        assert!(check.hypothesis_holds);
        assert!(check.norm <= check.bound + 1e-9, "{check:?}");
    }
}
