//! Dense real operators, singular values under uniform measures, tensor
//! products and the entropy potential of an ensemble.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default bound on operator dimensions.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Largest minimum dimension for which a full SVD is used.
pub const SVD_LIMIT: usize = 512;

/// Iteration cap of the deflated power method.
pub const POWER_ITERATION_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("operator of size {rows}x{cols} exceeds the dimension cap {cap}")]
    TooLarge { rows: usize, cols: usize, cap: usize },
    #[error("no marginal available for variable {0}")]
    MissingMarginal(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// A dense real matrix viewed as an operator between uniform probability spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct RealOperator {
    matrix: DMatrix<f64>,
    row_stochastic: bool,
}

impl RealOperator {
    pub fn new(matrix: DMatrix<f64>) -> RealOperator {
        let row_stochastic = matrix.nrows() > 0
            && matrix.row_iter().all(|r| (r.sum() - 1.0).abs() <= 1e-12 && r.iter().all(|&x| x >= -1e-15));
        RealOperator { matrix, row_stochastic }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(rows: usize, cols: usize, f: F) -> RealOperator {
        RealOperator::new(DMatrix::from_fn(rows, cols, f))
    }

    pub fn identity(n: usize) -> RealOperator {
        RealOperator::new(DMatrix::identity(n, n))
    }

    /// The rank-one averaging operator J/n.
    pub fn uniform(n: usize) -> RealOperator {
        RealOperator::new(DMatrix::from_element(n, n, 1.0 / n as f64))
    }

    pub fn diagonal(entries: &[f64]) -> RealOperator {
        RealOperator::new(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn is_row_stochastic(&self) -> bool {
        self.row_stochastic
    }

    pub fn is_column_stochastic(&self, tol: f64) -> bool {
        self.matrix.column_iter().all(|c| (c.sum() - 1.0).abs() <= tol)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows() == self.cols() && (&self.matrix - self.matrix.transpose()).amax() <= tol
    }

    pub fn transpose(&self) -> RealOperator {
        RealOperator::new(self.matrix.transpose())
    }

    pub fn compose(&self, other: &RealOperator) -> Result<RealOperator, SpectraError> {
        if self.cols() != other.rows() {
            return Err(SpectraError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(RealOperator::new(&self.matrix * &other.matrix))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = &self.matrix * DVector::from_column_slice(x);
        v.iter().copied().collect()
    }

    fn check_cap(&self, cap: usize) -> Result<(), SpectraError> {
        if self.rows() > cap || self.cols() > cap {
            return Err(SpectraError::TooLarge { rows: self.rows(), cols: self.cols(), cap });
        }
        Ok(())
    }

    /// Matrix of the operator between the standard Euclidean spaces isometric to the
    /// uniform probability spaces on rows and columns.
    pub fn normalized_matrix(&self) -> DMatrix<f64> {
        let scale = (self.cols() as f64 / self.rows() as f64).sqrt();
        &self.matrix * scale
    }
}

/// All singular values, descending, with respect to the uniform measures.
pub fn singular_values(op: &RealOperator, cap: usize) -> Result<Vec<f64>, SpectraError> {
    op.check_cap(cap)?;
    matrix_singular_values(op.normalized_matrix(), cap)
}

/// Singular values of a matrix taken as is between Euclidean spaces, descending.
pub fn matrix_singular_values(m: DMatrix<f64>, cap: usize) -> Result<Vec<f64>, SpectraError> {
    let (r, c) = m.shape();
    if r > cap || c > cap {
        return Err(SpectraError::TooLarge { rows: r, cols: c, cap });
    }
    let mut values: Vec<f64> = if r.min(c) == 0 {
        Vec::new()
    } else if r.min(c) <= SVD_LIMIT {
        m.singular_values().iter().copied().collect()
    } else if r == c && (&m - m.transpose()).amax() <= 1e-12 {
        SymmetricEigen::new(m).eigenvalues.iter().map(|x| x.abs()).collect()
    } else {
        let gram = if r <= c { &m * m.transpose() } else { m.transpose() * &m };
        SymmetricEigen::new(gram).eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect()
    };
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(values)
}

pub fn second_singular_value(op: &RealOperator) -> Result<f64, SpectraError> {
    second_singular_value_capped(op, DEFAULT_DIM_CAP)
}

pub fn second_singular_value_capped(op: &RealOperator, cap: usize) -> Result<f64, SpectraError> {
    Ok(singular_values(op, cap)?.get(1).copied().unwrap_or(0.0))
}

pub fn operator_norm(op: &RealOperator) -> Result<f64, SpectraError> {
    operator_norm_capped(op, DEFAULT_DIM_CAP)
}

pub fn operator_norm_capped(op: &RealOperator, cap: usize) -> Result<f64, SpectraError> {
    Ok(singular_values(op, cap)?.first().copied().unwrap_or(0.0))
}

pub fn kronecker(a: &RealOperator, b: &RealOperator) -> Result<RealOperator, SpectraError> {
    kronecker_capped(a, b, DEFAULT_DIM_CAP)
}

pub fn kronecker_capped(a: &RealOperator, b: &RealOperator, cap: usize) -> Result<RealOperator, SpectraError> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    if rows > cap || cols > cap {
        return Err(SpectraError::TooLarge { rows, cols, cap });
    }
    Ok(RealOperator::new(a.matrix.kronecker(&b.matrix)))
}

/// Leading singular values by power iteration on the normalized Gram operator with
/// deflation; an independent route to the values computed by [`singular_values`].
pub fn power_singular_values(op: &RealOperator, count: usize, seed: u64) -> Vec<f64> {
    let m = op.normalized_matrix();
    let n = m.ncols();
    let gram = m.transpose() * &m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<DVector<f64>> = Vec::new();
    let mut values = Vec::new();
    for _ in 0..count.min(n) {
        let mut v = DVector::from_fn(n, |_, _| rng.gen::<f64>() - 0.5);
        let mut lambda = 0.0f64;
        for _ in 0..POWER_ITERATION_CAP {
            for u in &found {
                let p = u.dot(&v);
                v.axpy(-p, u, 1.0);
            }
            let norm = v.norm();
            if norm < 1e-300 {
                lambda = 0.0;
                break;
            }
            v /= norm;
            let w = &gram * &v;
            let next = v.dot(&w);
            v = w;
            if (next - lambda).abs() <= 1e-15 * next.abs().max(1e-300) {
                lambda = next;
                break;
            }
            lambda = next;
        }
        for u in &found {
            let p = u.dot(&v);
            v.axpy(-p, u, 1.0);
        }
        let norm = v.norm();
        if norm > 0.0 {
            v /= norm;
        }
        found.push(v);
        values.push(lambda.max(0.0).sqrt());
    }
    values
}

/// One-variable marginal access used by [`entropy_potential`].
pub trait MarginalSource {
    fn num_vars(&self) -> usize;
    /// Probability that variable `i` equals 1, if available.
    fn marginal_one(&self, i: usize) -> Option<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EntropyBase {
    #[default]
    Two,
    Natural,
}

fn binary_entropy(p: f64, base: EntropyBase) -> f64 {
    let h = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.ln() };
    let nats = h(p) + h(1.0 - p);
    match base {
        EntropyBase::Two => nats / std::f64::consts::LN_2,
        EntropyBase::Natural => nats,
    }
}

/// E_{i∼measure} of the average over a ∈ {0,1} of the entropy of the indicator [Y_i = a].
pub fn entropy_potential<S: MarginalSource + ?Sized>(
    source: &S,
    measure: &[f64],
    base: EntropyBase,
) -> Result<f64, SpectraError> {
    let mut total = 0.0;
    for (i, &weight) in measure.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let p1 = source.marginal_one(i).ok_or(SpectraError::MissingMarginal(i))?;
        let p0 = 1.0 - p1;
        let per_value = (binary_entropy(p0, base) + binary_entropy(p1, base)) / 2.0;
        total += weight * per_value;
    }
    Ok(total)
}

/// Operator dump: `op <rows> <cols>` followed by one whitespace-separated row per line.
pub fn format_operator(op: &RealOperator) -> String {
    let mut out = format!("op {} {}\n", op.rows(), op.cols());
    for r in 0..op.rows() {
        let row: Vec<String> = (0..op.cols()).map(|c| format!("{:.17e}", op.matrix[(r, c)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_operator(text: &str) -> Result<RealOperator, SpectraError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| SpectraError::Parse("missing header".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "op" {
        return Err(SpectraError::Parse(format!("bad operator header {header:?}")));
    }
    let rows: usize = parts[1].parse().map_err(|_| SpectraError::Parse("bad row count".into()))?;
    let cols: usize = parts[2].parse().map_err(|_| SpectraError::Parse("bad column count".into()))?;
    let mut data = Vec::with_capacity(rows * cols);
    for line in lines.by_ref().take(rows) {
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(tok.parse::<f64>().map_err(|_| SpectraError::Parse(format!("bad entry {tok:?}")))?);
        }
        if data.len() - before != cols {
            return Err(SpectraError::Parse(format!("row with {} entries, expected {cols}", data.len() - before)));
        }
    }
    if data.len() != rows * cols {
        return Err(SpectraError::Parse("too few rows".into()));
    }
    Ok(RealOperator::new(DMatrix::from_row_slice(rows, cols, &data)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest, Just, Strategy};

    fn k4() -> RealOperator {
        RealOperator::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 / 3.0 })
    }

    #[test]
    fn second_singular_value_examples() {
        assert!((second_singular_value(&k4()).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(second_singular_value(&RealOperator::uniform(5)).unwrap().abs() < 1e-12);
        assert!((second_singular_value(&RealOperator::identity(4)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&RealOperator::identity(3)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(operator_norm(&RealOperator::new(DMatrix::zeros(3, 3))).unwrap(), 0.0);
        assert!((operator_norm(&RealOperator::diagonal(&[-1.0, 1.0])).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let op = RealOperator::identity(10);
        assert!(matches!(singular_values(&op, 8), Err(SpectraError::TooLarge { .. })));
    }

    #[test]
    fn kronecker_examples() {
        let i2 = RealOperator::identity(2);
        assert_eq!(kronecker(&i2, &i2).unwrap(), RealOperator::identity(4));
        let j = kronecker(&RealOperator::uniform(2), &RealOperator::uniform(2)).unwrap();
        assert!((j.matrix() - RealOperator::uniform(4).matrix()).amax() < 1e-15);
        let a = k4();
        let t = kronecker(&a, &RealOperator::uniform(3)).unwrap();
        let s_a = second_singular_value(&a).unwrap();
        let s_t = second_singular_value(&t).unwrap();
        assert!((s_a - s_t).abs() < 1e-12);
    }

    #[test]
    fn rectangular_stochastic_operator_has_norm_one() {
        // Each row averages two of four columns: a conditional expectation.
        let op = RealOperator::from_fn(2, 4, |r, c| if c / 2 == r { 0.5 } else { 0.0 });
        assert!(op.is_row_stochastic());
        let sv = singular_values(&op, 16).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-12);
        assert!((sv[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_symmetric_and_gram_paths_agree_with_power_method() {
        let n = 600;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let raw = DMatrix::from_fn(n, n, |_, _| rng.gen::<f64>());
        let sym = (&raw + raw.transpose()) / (2.0 * n as f64);
        let op = RealOperator::new(sym);
        let sv = singular_values(&op, DEFAULT_DIM_CAP).unwrap();
        let pw = power_singular_values(&op, 2, 1);
        assert!((sv[0] - pw[0]).abs() < 1e-9);
        assert!((sv[1] - pw[1]).abs() < 1e-9);
        let rect = RealOperator::new(DMatrix::from_fn(520, 530, |_, _| rng.gen::<f64>() / 530.0));
        let sv = singular_values(&rect, DEFAULT_DIM_CAP).unwrap();
        let pw = power_singular_values(&rect, 2, 2);
        assert!((sv[0] - pw[0]).abs() < 1e-9 * sv[0]);
        assert!((sv[1] - pw[1]).abs() < 1e-8);
    }

    struct Marginals(Vec<f64>);

    impl MarginalSource for Marginals {
        fn num_vars(&self) -> usize {
            self.0.len()
        }
        fn marginal_one(&self, i: usize) -> Option<f64> {
            self.0.get(i).copied()
        }
    }

    #[test]
    fn entropy_potential_examples() {
        let uniform4 = vec![0.25; 4];
        let det = Marginals(vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(entropy_potential(&det, &uniform4, EntropyBase::Two).unwrap(), 0.0);
        let unif = Marginals(vec![0.5; 4]);
        assert!((entropy_potential(&unif, &uniform4, EntropyBase::Two).unwrap() - 1.0).abs() < 1e-15);
        let one = Marginals(vec![0.5, 0.0, 1.0, 0.0]);
        assert!((entropy_potential(&one, &uniform4, EntropyBase::Two).unwrap() - 0.25).abs() < 1e-15);
        let nat = entropy_potential(&unif, &uniform4, EntropyBase::Natural).unwrap();
        assert!((nat - std::f64::consts::LN_2).abs() < 1e-15);
        let short = Marginals(vec![0.5]);
        assert_eq!(entropy_potential(&short, &uniform4, EntropyBase::Two), Err(SpectraError::MissingMarginal(1)));
    }

    #[test]
    fn operator_dump_round_trip() {
        let op = k4();
        let parsed = parse_operator(&format_operator(&op)).unwrap();
        assert!((parsed.matrix() - op.matrix()).amax() < 1e-15);
        assert!(parse_operator("op 2 2\n1 0\n").is_err());
    }

    fn small_matrix() -> impl Strategy<Value = DMatrix<f64>> {
        (1usize..=12, 1usize..=12).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-1.0f64..1.0, r * c).prop_map(move |v| DMatrix::from_vec(r, c, v))
        })
    }

    proptest! {
        #[test]
        fn svd_and_power_routes_agree(m in small_matrix()) {
            let op = RealOperator::new(m);
            let sv = singular_values(&op, 64).unwrap();
            let pw = power_singular_values(&op, 2.min(op.cols()), 9);
            prop_assert!((sv[0] - pw[0]).abs() < 1e-9 * sv[0].max(1.0));
            if pw.len() > 1 && sv.len() > 1 {
                prop_assert!((sv[1] - pw[1]).abs() < 1e-7 * sv[0].max(1.0));
            }
        }

        #[test]
        fn sigma2_invariant_under_simultaneous_permutation(
            v in proptest::collection::vec(0.0f64..1.0, 49),
            perm in Just((0..7usize).collect::<Vec<_>>()).prop_shuffle(),
        ) {
            let m = DMatrix::from_vec(7, 7, v);
            let a = RealOperator::new(&m + m.transpose());
            let b = RealOperator::from_fn(7, 7, |i, j| a.matrix()[(perm[i], perm[j])]);
            let sa = second_singular_value(&a).unwrap();
            let sb = second_singular_value(&b).unwrap();
            prop_assert!((sa - sb).abs() < 1e-9);
        }

        #[test]
        fn kronecker_multiplies_norms(a in small_matrix(), b in small_matrix()) {
            let (a, b) = (RealOperator::new(a), RealOperator::new(b));
            let k = kronecker(&a, &b).unwrap();
            let lhs = operator_norm(&k).unwrap();
            let rhs = operator_norm(&a).unwrap() * operator_norm(&b).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0));
        }
    }
}
