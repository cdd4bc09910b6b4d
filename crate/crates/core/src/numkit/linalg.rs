//! Small dense matrices and pivoted-QR least squares.

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Dense matrix. Constructors take row-major data; storage is column-major
/// because every consumer in this crate walks columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::domain(format!("matrix shape {rows}x{cols} must be non-empty")));
        }
        Ok(Self { rows, cols, data: vec![T::zero(); rows * cols] })
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: &[T]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::domain(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let mut m = Self::zeros(rows, cols)?;
        for i in 0..rows {
            for j in 0..cols {
                m.data[j * rows + i] = entries[i * cols + j];
            }
        }
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_columns(columns: Vec<Vec<T>>) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::domain("columns have unequal lengths"));
        }
        let m = Self::zeros(rows, cols)?;
        let m = Self { data: columns.into_iter().flatten().collect(), ..m };
        m.check_finite()?;
        Ok(m)
    }

    /// Wraps column-major storage without validation; crate-internal.
    pub(crate) fn from_raw_column_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, T::one());
        }
        Ok(m)
    }

    fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::domain("matrix has non-finite entries"))
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.rows)
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Xv
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "mul_vec dimension mismatch");
        let mut out = vec![T::zero(); self.rows];
        for (col, &vj) in self.columns().zip(v) {
            if vj != T::zero() {
                crate::scalar::axpy(vj, col, &mut out);
            }
        }
        out
    }

    /// Xᵀv
    pub fn t_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.rows, "t_mul_vec dimension mismatch");
        self.columns().map(|c| dot(c, v)).collect()
    }

    /// XᵀX
    pub fn gram(&self) -> DenseMatrix<T> {
        let p = self.cols;
        let mut g = DenseMatrix { rows: p, cols: p, data: vec![T::zero(); p * p] };
        for a in 0..p {
            for b in a..p {
                let v = dot(self.col(a), self.col(b));
                g.set(a, b, v);
                g.set(b, a, v);
            }
        }
        g
    }

    pub fn column_norms(&self) -> Vec<T> {
        self.columns().map(crate::scalar::norm2).collect()
    }

    /// Submatrix of the listed columns, in the listed order.
    pub fn select_columns(&self, idx: &[usize]) -> Result<DenseMatrix<T>> {
        if idx.is_empty() {
            return Err(Error::domain("cannot select zero columns"));
        }
        let mut data = Vec::with_capacity(idx.len() * self.rows);
        for &j in idx {
            if j >= self.cols {
                return Err(Error::domain(format!("column {j} out of range for {} columns", self.cols)));
            }
            data.extend_from_slice(self.col(j));
        }
        Ok(DenseMatrix { rows: self.rows, cols: idx.len(), data })
    }

    /// Checks ‖X_j‖₂ = 1 for every column within the scalar's tolerance.
    pub fn ensure_unit_columns(&self) -> Result<()> {
        let tol = T::lit(T::UNIT_NORM_TOL);
        for (j, norm) in self.column_norms().into_iter().enumerate() {
            if (norm - T::one()).abs() > tol {
                return Err(Error::Contract(format!(
                    "column {j} has norm {norm}, predictors must be unit normed"
                )));
            }
        }
        Ok(())
    }
}

/// Householder QR with column pivoting, `A P = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr<T> {
    // R in the upper triangle, Householder vectors (unit leading entry implied) below.
    packed: DenseMatrix<T>,
    tau: Vec<T>,
    perm: Vec<usize>,
    rank: usize,
}

impl<T: Scalar> PivotedQr<T> {
    pub fn new(a: &DenseMatrix<T>) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let mut qr = a.clone();
        let steps = m.min(n);
        let mut tau = vec![T::zero(); steps];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut r00 = T::zero();
        let mut rank = 0;
        let rank_tol = T::lit(T::RANK_TOL);

        for k in 0..steps {
            // pivot on the largest remaining column norm
            let (best, _) = (k..n)
                .map(|j| (j, sq_norm(&qr.col(j)[k..])))
                .fold((k, T::neg_infinity()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if best != k {
                swap_columns(&mut qr, k, best);
                perm.swap(k, best);
            }

            let col = &mut qr.col_mut(k)[k..];
            let normx = sq_norm(col).sqrt();
            if normx == T::zero() {
                tau[k] = T::zero();
            } else {
                let x0 = col[0];
                let beta = if x0 >= T::zero() { -normx } else { normx };
                tau[k] = (beta - x0) / beta;
                let scale = T::one() / (x0 - beta);
                for v in col[1..].iter_mut() {
                    *v = *v * scale;
                }
                col[0] = beta;
            }
            let rkk = qr.get(k, k).abs();
            if k == 0 {
                r00 = rkk;
            }
            if rkk > rank_tol * r00 && rkk > T::zero() {
                rank += 1;
            }

            if tau[k] != T::zero() {
                for j in (k + 1)..n {
                    let (head, tail) = qr.data.split_at_mut(j * m);
                    let v = &head[k * m + k..k * m + m];
                    let target = &mut tail[k..m];
                    apply_reflector(v, tau[k], target);
                }
            }
        }

        Self { packed: qr, tau, perm, rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_column_rank(&self) -> bool {
        self.rank == self.packed.cols()
    }

    /// Applies Qᵀ to `b` in place.
    fn apply_qt(&self, b: &mut [T]) {
        let m = self.packed.rows();
        for (k, &t) in self.tau.iter().enumerate() {
            if t != T::zero() {
                apply_reflector(&self.packed.col(k)[k..m], t, &mut b[k..]);
            }
        }
    }

    /// Least-squares solution; fails if the factored matrix is rank deficient.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let (m, n) = (self.packed.rows(), self.packed.cols());
        if b.len() != m {
            return Err(Error::domain(format!("rhs length {} does not match {m} rows", b.len())));
        }
        if !self.is_full_column_rank() || m < n {
            return Err(Error::Singular { rank: self.rank, cols: n });
        }
        let mut qtb = b.to_vec();
        self.apply_qt(&mut qtb);
        let mut z = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = qtb[i];
            for (j, &zj) in z.iter().enumerate().skip(i + 1) {
                s = s - self.packed.get(i, j) * zj;
            }
            z[i] = s / self.packed.get(i, i);
        }
        let mut x = vec![T::zero(); n];
        for (i, &pi) in self.perm.iter().enumerate() {
            x[pi] = z[i];
        }
        Ok(x)
    }

    /// Orthonormal basis (m×n) of the column space, columns in pivot order.
    pub fn thin_q(&self) -> DenseMatrix<T> {
        let (m, n) = (self.packed.rows(), self.packed.cols());
        let k = m.min(n);
        let mut q = DenseMatrix { rows: m, cols: k, data: vec![T::zero(); m * k] };
        for j in 0..k {
            q.set(j, j, T::one());
        }
        for r in (0..k).rev() {
            if self.tau[r] == T::zero() {
                continue;
            }
            let v = &self.packed.col(r)[r..m];
            for j in 0..k {
                apply_reflector(v, self.tau[r], &mut q.col_mut(j)[r..]);
            }
        }
        q
    }
}

fn sq_norm<T: Scalar>(x: &[T]) -> T {
    dot(x, x)
}

fn swap_columns<T: Scalar>(m: &mut DenseMatrix<T>, a: usize, b: usize) {
    let rows = m.rows;
    for i in 0..rows {
        m.data.swap(a * rows + i, b * rows + i);
    }
}

/// x ← (I − τ v vᵀ) x where v[0] is implicitly 1.
fn apply_reflector<T: Scalar>(v: &[T], tau: T, x: &mut [T]) {
    let mut w = x[0];
    for (vi, xi) in v[1..].iter().zip(&x[1..]) {
        w = w + *vi * *xi;
    }
    let s = tau * w;
    x[0] = x[0] - s;
    for (vi, xi) in v[1..].iter().zip(x[1..].iter_mut()) {
        *xi = *xi - s * *vi;
    }
}

/// Minimises ‖b − Aβ‖₂ over β. Requires full column rank.
pub fn least_squares<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    if a.rows() != b.len() {
        return Err(Error::domain(format!(
            "least squares: {} rows but rhs of length {}",
            a.rows(),
            b.len()
        )));
    }
    PivotedQr::new(a).solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: usize, cols: usize, v: &[f64]) -> DenseMatrix<f64> {
        DenseMatrix::from_row_major(rows, cols, v).unwrap()
    }

    /// Normal equations solved by Gauss-Jordan elimination, test-only oracle.
    fn normal_equations(a: &DenseMatrix<f64>, b: &[f64]) -> Vec<f64> {
        let n = a.cols();
        let g = a.gram();
        let rhs = a.t_mul_vec(b);
        let mut aug: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| g.get(i, j)).chain([rhs[i]]).collect()).collect();
        for c in 0..n {
            let piv = (c..n).max_by(|&x, &y| aug[x][c].abs().total_cmp(&aug[y][c].abs())).unwrap();
            aug.swap(c, piv);
            let d = aug[c][c];
            for v in aug[c].iter_mut() {
                *v /= d;
            }
            for r in 0..n {
                if r != c {
                    let f = aug[r][c];
                    let row_c = aug[c].clone();
                    for (v, w) in aug[r].iter_mut().zip(row_c) {
                        *v -= f * w;
                    }
                }
            }
        }
        aug.into_iter().map(|r| r[n]).collect()
    }

    #[test]
    fn orthonormal_columns_give_projection_coefficients() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = mat(3, 2, &[s, 0.0, s, 0.0, 0.0, 1.0]);
        let b = [1.0, 3.0, -2.0];
        let x = least_squares(&a, &b).unwrap();
        let atb = a.t_mul_vec(&b);
        for (u, v) in x.iter().zip(&atb) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn single_column_is_scalar_regression() {
        let a = mat(4, 1, &[1.0, 2.0, -1.0, 0.5]);
        let b = [2.0, 1.0, 0.0, 4.0];
        let x = least_squares(&a, &b).unwrap();
        let expected = dot(a.col(0), &b) / dot(a.col(0), a.col(0));
        assert!((x[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn random_instance_matches_normal_equations() {
        // fixed 10x3 instance
        let v: Vec<f64> = (0..30).map(|i| ((i * 37 % 17) as f64 - 8.0) / 5.0 + (i as f64).sin()).collect();
        let a = mat(10, 3, &v);
        let b: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).cos() * 3.0).collect();
        let x = least_squares(&a, &b).unwrap();
        let oracle = normal_equations(&a, &b);
        for (u, w) in x.iter().zip(&oracle) {
            assert!((u - w).abs() < 1e-8, "{u} vs {w}");
        }
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let a = mat(4, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 1.0, 3.0, 6.0, 0.0, 4.0, 8.0, 2.0]);
        match least_squares(&a, &[1.0, 2.0, 3.0, 4.0]) {
            Err(Error::Singular { rank, cols }) => {
                assert_eq!(rank, 2);
                assert_eq!(cols, 3);
            }
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn thin_q_is_orthonormal() {
        let v: Vec<f64> = (0..24).map(|i| ((i * 13 % 7) as f64) - 3.0 + 0.1 * i as f64).collect();
        let a = mat(6, 4, &v);
        let q = PivotedQr::new(&a).thin_q();
        let g = q.gram();
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g.get(i, j) - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn shape_validation() {
        assert!(DenseMatrix::<f64>::zeros(0, 2).is_err());
        assert!(DenseMatrix::from_row_major(2, 2, &[1.0, 2.0, 3.0]).is_err());
        assert!(DenseMatrix::from_row_major(1, 2, &[1.0, f64::NAN]).is_err());
        assert!(least_squares(&mat(2, 1, &[1.0, 1.0]), &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn residual_is_orthogonal_to_columns(
            entries in prop::collection::vec(-3.0f64..3.0, 24),
            b in prop::collection::vec(-5.0f64..5.0, 8),
        ) {
            let a = mat(8, 3, &entries);
            let qr = PivotedQr::new(&a);
            prop_assume!(qr.is_full_column_rank());
            let x = qr.solve(&b).unwrap();
            let fit = a.mul_vec(&x);
            let resid: Vec<f64> = b.iter().zip(&fit).map(|(u, v)| u - v).collect();
            let grad = a.t_mul_vec(&resid);
            let scale = a.t_mul_vec(&b).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assume!(scale > 1e-3);
            let worst = grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(worst <= 1e-8 * scale, "{worst} vs {scale}");
        }
    }
}
