//! Dense real kernels used by the solver: dot products, a cyclic Jacobi
//! eigensolver for symmetric matrices, and deterministic extraction of a
//! unit vector orthogonal to a spanning set.

use thiserror::Error;

/// Residual norms at or below this are treated as linear dependence.
pub const RANK_THRESHOLD: f64 = 1e-8;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    NonSymmetric { row: usize, col: usize, gap: f64 },
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("eigen tolerance {0:e} outside (0, 1e-6]")]
    BadTolerance(f64),
    #[error("spanning set covers all of R^{0}; no orthogonal unit vector exists")]
    TrivialComplement(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("warm-start basis is not usable")]
    BadBasis,
    #[error("vector norm {0} is not 1 within 1e-9")]
    NotUnit(f64),
}

/// Inner product with four interleaved partial sums (index mod 4), combined
/// as `(s₀ + s₁) + (s₂ + s₃)` plus the tail. The order is fixed, so results
/// are reproducible bit for bit, with or without SIMD.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let body = a.len() / 4 * 4;
    let acc = kernels::dot4(&a[..body], &b[..body]);
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in a[body..].iter().zip(&b[body..]) {
        s += x * y;
    }
    s
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

/// Returns `x / ‖x‖`, or `None` when the norm is zero or not finite.
pub fn normalized(x: &[f64]) -> Option<Vec<f64>> {
    let nrm = norm(x);
    if nrm > 0.0 && nrm.is_finite() {
        Some(x.iter().map(|v| v / nrm).collect())
    } else {
        None
    }
}

pub fn unit_basis(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// A vector with Euclidean norm 1 (within 1e-9).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub const NORM_TOLERANCE: f64 = 1e-9;

    pub fn new(v: Vec<f64>) -> Result<Self, LinalgError> {
        let nrm = norm(&v);
        if v.is_empty() || !((nrm - 1.0).abs() <= Self::NORM_TOLERANCE) {
            return Err(LinalgError::NotUnit(nrm));
        }
        Ok(Self(v))
    }

    /// Scales `v` to unit length.
    pub fn normalize(v: &[f64]) -> Result<Self, LinalgError> {
        normalized(v).map(Self).ok_or(LinalgError::NotUnit(norm(v)))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Dense symmetric matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Validates symmetry (relative 1e-12 of the largest entry) and finiteness.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        let m = Self { n, data };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), LinalgError> {
        let n = self.n;
        let mut scale = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let v = self.get(r, c);
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite { row: r, col: c });
                }
                scale = scale.max(v.abs());
            }
        }
        for r in 0..n {
            for c in (r + 1)..n {
                let gap = (self.get(r, c) - self.get(c, r)).abs();
                if gap > 1e-12 * scale {
                    return Err(LinalgError::NonSymmetric { row: r, col: c, gap });
                }
            }
        }
        Ok(())
    }

    /// Sum of `weight * v vᵀ` over the supplied pairs.
    pub fn weighted_outer_sum<'a>(
        n: usize,
        terms: impl IntoIterator<Item = (f64, &'a [f64])>,
    ) -> Self {
        let mut m = Self::zeros(n);
        m.accumulate_outer(terms);
        m
    }

    /// Adds `weight * v vᵀ` for each pair, touching only the upper triangle
    /// and mirroring at the end.
    pub fn accumulate_outer<'a>(&mut self, terms: impl IntoIterator<Item = (f64, &'a [f64])>) {
        let n = self.n;
        for (w, v) in terms {
            debug_assert_eq!(v.len(), n);
            for r in 0..n {
                let wr = w * v[r];
                let row = &mut self.data[r * n + r..(r + 1) * n];
                for (dst, vs) in row.iter_mut().zip(&v[r..]) {
                    *dst += wr * vs;
                }
            }
        }
        for r in 0..n {
            for c in (r + 1)..n {
                self.data[c * n + r] = self.data[r * n + c];
            }
        }
    }

    /// Overwrites `self` with `Σ_i coef_i v_i v_iᵀ`, where the vectors are
    /// given coordinate-major: `columns[r][i]` is coordinate `r` of `v_i`.
    pub fn set_weighted_gram(&mut self, columns: &[Vec<f64>], coef: &[f64], scratch: &mut Vec<f64>) {
        let n = self.n;
        let k = coef.len();
        debug_assert_eq!(columns.len(), n);
        scratch.clear();
        for col in columns {
            scratch.extend(col.iter().zip(coef).map(|(v, c)| v * c));
        }
        let scaled = |r: usize| &scratch[r * k..(r + 1) * k];
        // 2×4 output blocks of the upper triangle; entries left of the
        // diagonal inside a block are computed but overwritten by the mirror.
        let mut r = 0;
        while r + 2 <= n {
            let mut c = r;
            while c + 4 <= n {
                let block = gram_block_2x4(
                    [scaled(r), scaled(r + 1)],
                    [&columns[c], &columns[c + 1], &columns[c + 2], &columns[c + 3]],
                );
                for (p, row) in block.iter().enumerate() {
                    for (q, &val) in row.iter().enumerate() {
                        if c + q >= r + p {
                            self.data[(r + p) * n + c + q] = val;
                        }
                    }
                }
                c += 4;
            }
            for rr in r..r + 2 {
                for cc in c.max(rr)..n {
                    self.data[rr * n + cc] = dot(scaled(rr), &columns[cc]);
                }
            }
            r += 2;
        }
        if r < n {
            for cc in r..n {
                self.data[r * n + cc] = dot(scaled(r), &columns[cc]);
            }
        }
        for r in 0..n {
            for c in 0..r {
                self.data[r * n + c] = self.data[c * n + r];
            }
        }
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|r| dot(self.row(r), x)).collect()
    }

    /// `xᵀ M x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|r| x[r] * dot(self.row(r), x)).sum()
    }
}

/// Eigenpairs sorted by descending eigenvalue; `vectors[j]` pairs with `values[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Largest `‖M u_j − μ_j u_j‖₂` over all pairs.
    pub fn max_residual(&self, m: &SymmetricMatrix) -> f64 {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(mu, u)| {
                let mu_u = m.mul_vec(u);
                mu_u.iter()
                    .zip(u)
                    .map(|(a, b)| (a - mu * b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation of the eigenvector Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }
}

/// Symmetric eigendecomposition: Householder reduction to tridiagonal form
/// followed by implicit QL iterations.
///
/// `tol` bounds the accepted residual `‖M u_j − μ_j u_j‖₂ / ‖M‖_F`; the result
/// is checked against it before returning.
pub fn sym_eig(m: &SymmetricMatrix, tol: f64) -> Result<EigenDecomposition, LinalgError> {
    check_tolerance(tol)?;
    m.validate()?;
    let n = m.dim();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: vec![],
            vectors: vec![],
        });
    }
    let mut v: Vec<f64> = m.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut v, &mut d, &mut e);
    let mut rows: Vec<Vec<f64>> = v.chunks_exact(n).map(|r| r.to_vec()).collect();
    tridiagonal_ql(&mut d, &mut e, &mut rows)?;

    let decomposition = sorted_descending(d, rows);
    let fro = m.frobenius_norm();
    let residual = decomposition.max_residual(m);
    if residual > tol * fro.max(f64::MIN_POSITIVE) {
        return Err(LinalgError::NoConvergence {
            sweeps: 0,
            off: residual,
        });
    }
    Ok(decomposition)
}

/// `a_p · b_q` for a 2×4 block, with two interleaved partial sums per entry
/// (even and odd indices) combined at the end. The summation order depends
/// only on the length, never on the data.
#[inline]
fn gram_block_2x4(a: [&[f64]; 2], b: [&Vec<f64>; 4]) -> [[f64; 4]; 2] {
    let k = a[0].len();
    let even = k / 2 * 2;
    let acc = kernels::block_2x4(
        [&a[0][..even], &a[1][..even]],
        [&b[0][..even], &b[1][..even], &b[2][..even], &b[3][..even]],
    );
    let mut out = [[0.0; 4]; 2];
    for p in 0..2 {
        for q in 0..4 {
            let mut v = acc[p][q][0] + acc[p][q][1];
            if k % 2 == 1 {
                v += a[p][k - 1] * b[q][k - 1];
            }
            out[p][q] = v;
        }
    }
    out
}

/// Hot loops, written lane by lane. The SSE2 versions perform exactly the
/// same operations as the portable ones, so both give identical bits.
mod kernels {
    #[cfg(target_arch = "x86_64")]
    use std::arch::x86_64::*;

    /// Partial sums of `a·b` by index mod 4; lengths must be equal and a
    /// multiple of 4.
    #[cfg(target_arch = "x86_64")]
    #[inline]
    pub fn dot4(a: &[f64], b: &[f64]) -> [f64; 4] {
        assert!(a.len() == b.len() && a.len().is_multiple_of(4));
        // SAFETY: SSE2 is part of the x86_64 baseline; every load reads
        // a[i..i+2] / b[i..i+2] with i + 4 <= len.
        unsafe {
            let mut lo = _mm_setzero_pd();
            let mut hi = _mm_setzero_pd();
            let (pa, pb) = (a.as_ptr(), b.as_ptr());
            let mut i = 0;
            while i < a.len() {
                lo = _mm_add_pd(lo, _mm_mul_pd(_mm_loadu_pd(pa.add(i)), _mm_loadu_pd(pb.add(i))));
                hi = _mm_add_pd(
                    hi,
                    _mm_mul_pd(_mm_loadu_pd(pa.add(i + 2)), _mm_loadu_pd(pb.add(i + 2))),
                );
                i += 4;
            }
            let mut out = [0.0; 4];
            _mm_storeu_pd(out.as_mut_ptr(), lo);
            _mm_storeu_pd(out.as_mut_ptr().add(2), hi);
            out
        }
    }

    #[cfg(not(target_arch = "x86_64"))]
    #[inline]
    pub fn dot4(a: &[f64], b: &[f64]) -> [f64; 4] {
        assert!(a.len() == b.len() && a.len().is_multiple_of(4));
        let mut acc = [0.0f64; 4];
        for (x, y) in a.chunks_exact(4).zip(b.chunks_exact(4)) {
            for l in 0..4 {
                acc[l] += x[l] * y[l];
            }
        }
        acc
    }

    /// Even/odd partial sums of `a_p·b_q`; all lengths equal and even.
    #[cfg(target_arch = "x86_64")]
    #[inline]
    pub fn block_2x4(a: [&[f64]; 2], b: [&[f64]; 4]) -> [[[f64; 2]; 4]; 2] {
        let k = a[0].len();
        assert!(k.is_multiple_of(2) && a.iter().all(|s| s.len() == k) && b.iter().all(|s| s.len() == k));
        // SAFETY: SSE2 is baseline on x86_64; each load reads [i, i+2) with
        // i + 2 <= k on slices of length k.
        unsafe {
            let mut acc = [[_mm_setzero_pd(); 4]; 2];
            let mut i = 0;
            while i < k {
                let a0 = _mm_loadu_pd(a[0].as_ptr().add(i));
                let a1 = _mm_loadu_pd(a[1].as_ptr().add(i));
                for q in 0..4 {
                    let bq = _mm_loadu_pd(b[q].as_ptr().add(i));
                    acc[0][q] = _mm_add_pd(acc[0][q], _mm_mul_pd(a0, bq));
                    acc[1][q] = _mm_add_pd(acc[1][q], _mm_mul_pd(a1, bq));
                }
                i += 2;
            }
            let mut out = [[[0.0; 2]; 4]; 2];
            for p in 0..2 {
                for q in 0..4 {
                    _mm_storeu_pd(out[p][q].as_mut_ptr(), acc[p][q]);
                }
            }
            out
        }
    }

    #[cfg(not(target_arch = "x86_64"))]
    #[inline]
    pub fn block_2x4(a: [&[f64]; 2], b: [&[f64]; 4]) -> [[[f64; 2]; 4]; 2] {
        let k = a[0].len();
        assert!(k.is_multiple_of(2) && a.iter().all(|s| s.len() == k) && b.iter().all(|s| s.len() == k));
        let mut acc = [[[0.0f64; 2]; 4]; 2];
        for i in (0..k).step_by(2) {
            for p in 0..2 {
                for q in 0..4 {
                    acc[p][q][0] += a[p][i] * b[q][i];
                    acc[p][q][1] += a[p][i + 1] * b[q][i + 1];
                }
            }
        }
        acc
    }

    #[cfg(test)]
    mod tests {
        #[test]
        fn portable_and_simd_agree() {
            let a: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64 / 7.0 - 0.6).collect();
            let b: Vec<f64> = (0..40).map(|i| ((i * 13) % 17) as f64 / 3.0 - 2.2).collect();
            let mut want = [0.0f64; 4];
            for i in 0..40 {
                want[i % 4] += a[i] * b[i];
            }
            assert_eq!(super::dot4(&a, &b), want);
            let got = super::block_2x4([&a, &b], [&b, &a, &a, &b]);
            let mut w = [0.0f64; 2];
            for i in 0..40 {
                w[i % 2] += a[i] * a[i];
            }
            assert_eq!(got[0][1], w);
        }
    }
}

/// Householder tridiagonalization of the symmetric matrix stored row-major
/// in `v`. On return `d` holds the diagonal, `e[1..]` the subdiagonal and the
/// rows of `v` the accumulated orthogonal basis.
fn tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    assert!(v.len() == n * n && d.len() == n && e.len() == n);
    d.copy_from_slice(&v[(n - 1) * n..]);
    for i in (1..n).rev() {
        let mut h = 0.0;
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);
            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                // Row j's lower part is column j of the lower triangle; the
                // matrix is symmetric, so read it from row k instead.
                for k in (j + 1)..i {
                    let vkj = v[k * n + j];
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }
    // Accumulate the transform on the transpose, so that the inner loops
    // run along contiguous rows; afterwards row j of `v` is basis vector j.
    for r in 0..n {
        for c in (r + 1)..n {
            v.swap(r * n + c, c * n + r);
        }
    }
    for i in 0..n - 1 {
        v[i * n + n - 1] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        let (head, tail) = v.split_at_mut((i + 1) * n);
        let next = &mut tail[..n];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = next[k] / h;
            }
            for row in head.chunks_exact_mut(n) {
                let g = dot(&next[..=i], &row[..=i]);
                axpy(-g, &d[..=i], &mut row[..=i]);
            }
        }
        next[..=i].fill(0.0);
    }
    for j in 0..n {
        d[j] = v[j * n + n - 1];
        v[j * n + n - 1] = 0.0;
    }
    v[n * n - 1] = 1.0;
    e[0] = 0.0;
}

/// `√(a² + b²)`; the library `hypot` guards against overflow at a cost that
/// dominates small decompositions, so only fall back to it for huge inputs.
#[inline]
fn fast_hypot(a: f64, b: f64) -> f64 {
    const SAFE: f64 = 1e150;
    if a.abs() < SAFE && b.abs() < SAFE {
        (a * a + b * b).sqrt()
    } else {
        a.hypot(b)
    }
}

/// Implicit QL on the tridiagonal `(d, e)`, applying the rotations to the
/// rows of `z`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [Vec<f64>]) -> Result<(), LinalgError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let max_iter = 30 * n.max(1);
    let mut iterations = 0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                iterations += 1;
                if iterations > max_iter {
                    return Err(LinalgError::NoConvergence {
                        sweeps: iterations,
                        off: e[l].abs(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = fast_hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = fast_hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = z.split_at_mut(i + 1);
                    for (zi, zi1) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
                        let t = *zi1;
                        *zi1 = s * *zi + c * t;
                        *zi = c * *zi - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sorted_descending(values: Vec<f64>, vectors: Vec<Vec<f64>>) -> EigenDecomposition {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let mut slots: Vec<Option<Vec<f64>>> = vectors.into_iter().map(Some).collect();
    EigenDecomposition {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: order
            .iter()
            .map(|&i| slots[i].take().expect("each index used once"))
            .collect(),
    }
}

/// Cyclic Jacobi rotations from the identity basis. Slower than [`sym_eig`]
/// but shares no code with it, which makes it a useful cross-check.
pub fn sym_eig_jacobi(m: &SymmetricMatrix, tol: f64) -> Result<EigenDecomposition, LinalgError> {
    let n = m.dim();
    let basis: Vec<Vec<f64>> = (0..n).map(|i| unit_basis(n, i)).collect();
    jacobi(m, basis, tol)
}

fn check_tolerance(tol: f64) -> Result<(), LinalgError> {
    if tol > 0.0 && tol <= 1e-6 {
        Ok(())
    } else {
        Err(LinalgError::BadTolerance(tol))
    }
}

/// Core rotation loop. `q` holds an orthonormal basis as rows; on return its
/// rows are the eigenvectors.
fn jacobi(
    m: &SymmetricMatrix,
    mut q: Vec<Vec<f64>>,
    tol: f64,
) -> Result<EigenDecomposition, LinalgError> {
    check_tolerance(tol)?;
    m.validate()?;
    let n = m.dim();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: vec![],
            vectors: vec![],
        });
    }

    // a = Q M Qᵀ in the current basis.
    let mq: Vec<Vec<f64>> = q.iter().map(|row| m.mul_vec(row)).collect();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = dot(&q[i], &mq[j]);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }

    let fro = m.frobenius_norm();
    // Column residual of eigenpair j is bounded by the off-diagonal norm.
    let target = 0.5 * tol * fro;
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[i * n + j] * a[i * n + j];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut off = off_norm(&a);
    let mut sweeps = 0;
    while off > target {
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[p * n + r];
                if apr == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let arr = a[r * n + r];
                // Negligible against both diagonal entries: zero it outright.
                if apr.abs() < f64::EPSILON * 1e-3 * (app.abs() + arr.abs()) {
                    a[p * n + r] = 0.0;
                    a[r * n + p] = 0.0;
                    continue;
                }
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == r {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akr = a[k * n + r];
                    let new_kp = c * akp - s * akr;
                    let new_kr = s * akp + c * akr;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + r] = new_kr;
                    a[r * n + k] = new_kr;
                }
                a[p * n + p] = app - t * apr;
                a[r * n + r] = arr + t * apr;
                a[p * n + r] = 0.0;
                a[r * n + p] = 0.0;
                let (lo, hi) = q.split_at_mut(r);
                let qp = &mut lo[p];
                let qr = &mut hi[0];
                for (x, y) in qp.iter_mut().zip(qr.iter_mut()) {
                    let (u, v) = (*x, *y);
                    *x = c * u - s * v;
                    *y = s * u + c * v;
                }
            }
        }
        off = off_norm(&a);
    }

    let values = (0..n).map(|i| a[i * n + i]).collect();
    Ok(sorted_descending(values, q))
}

/// Orthonormalizes `spanning` in order (Gram–Schmidt with one
/// re-orthogonalization pass), dropping vectors whose residual norm is at most
/// [`RANK_THRESHOLD`]. Returns the orthonormal rows.
pub fn orthonormalize<'a>(n: usize, spanning: impl IntoIterator<Item = &'a [f64]>) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for s in spanning {
        debug_assert_eq!(s.len(), n);
        if basis.len() == n {
            break;
        }
        let mut r = s.to_vec();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&r, b);
                axpy(-c, b, &mut r);
            }
        }
        let nrm = norm(&r);
        if nrm > RANK_THRESHOLD {
            scale(1.0 / nrm, &mut r);
            basis.push(r);
        }
    }
    basis
}

/// Deterministic unit vector orthogonal to every vector of `spanning`.
///
/// The spanning set is orthonormalized in the given order; then the standard
/// basis probes `e₁, e₂, …` are projected onto the orthogonal complement and
/// the first with residual norm above [`RANK_THRESHOLD`] is normalized and
/// returned.
pub fn complement_unit_vector<'a>(
    n: usize,
    spanning: impl IntoIterator<Item = &'a [f64]>,
) -> Result<Vec<f64>, LinalgError> {
    let spanning: Vec<&[f64]> = spanning.into_iter().collect();
    if let Some(bad) = spanning.iter().find(|s| s.len() != n) {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let basis = orthonormalize(n, spanning.iter().copied());
    complement_from_basis(n, &basis)
}

/// Probe step of [`complement_unit_vector`] for an already orthonormal basis.
pub fn complement_from_basis(n: usize, basis: &[Vec<f64>]) -> Result<Vec<f64>, LinalgError> {
    if basis.len() >= n {
        return Err(LinalgError::TrivialComplement(n));
    }
    for j in 0..n {
        // e_j − Σ b_j b
        let mut p = unit_basis(n, j);
        for b in basis {
            axpy(-b[j], b, &mut p);
        }
        let nrm = norm(&p);
        if nrm <= RANK_THRESHOLD {
            continue;
        }
        scale(1.0 / nrm, &mut p);
        // Normalizing a short residual amplifies rounding; one more pass
        // restores orthogonality to working precision.
        for b in basis {
            let c = dot(&p, b);
            axpy(-c, b, &mut p);
        }
        let nrm = norm(&p);
        scale(1.0 / nrm, &mut p);
        return Ok(p);
    }
    Err(LinalgError::TrivialComplement(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn mat(rows: &[&[f64]]) -> SymmetricMatrix {
        SymmetricMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_eigenvalues() {
        let e = sym_eig(&mat(&[&[1.0, 0.0], &[0.0, 1.0]]), TOL).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        assert!(e.orthonormality_defect() < 1e-15);
    }

    #[test]
    fn diagonal_matrix() {
        let e = sym_eig(&mat(&[&[1.0, 0.0], &[0.0, 3.0]]), TOL).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert!((e.vectors[0][1].abs() - 1.0).abs() < 1e-15);
        assert!((e.vectors[1][0].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_one_projector() {
        let v = [0.6, 0.8];
        let m = SymmetricMatrix::weighted_outer_sum(2, [(1.0, &v[..])]);
        let e = sym_eig(&m, TOL).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!(e.values[1].abs() < 1e-14);
        assert!((dot(&e.vectors[0], &v).abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let err = SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).unwrap_err();
        assert!(matches!(err, LinalgError::NonSymmetric { .. }));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let m = mat(&[&[1.0]]);
        assert!(matches!(sym_eig(&m, 0.0), Err(LinalgError::BadTolerance(_))));
        assert!(matches!(sym_eig(&m, 1e-3), Err(LinalgError::BadTolerance(_))));
    }

    #[test]
    fn ql_agrees_with_jacobi() {
        let rows = vec![
            vec![4.0, 1.0, 0.5, 0.0],
            vec![1.0, 3.0, -0.2, 2.0],
            vec![0.5, -0.2, 1.0, 0.3],
            vec![0.0, 2.0, 0.3, -1.0],
        ];
        let m = SymmetricMatrix::from_rows(&rows).unwrap();
        let ql = sym_eig(&m, TOL).unwrap();
        let jac = sym_eig_jacobi(&m, TOL).unwrap();
        for (a, b) in ql.values.iter().zip(&jac.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(ql.max_residual(&m) < 1e-12 * m.frobenius_norm());
        assert!(ql.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn one_by_one_and_zero_matrix() {
        let e = sym_eig(&mat(&[&[-2.5]]), TOL).unwrap();
        assert_eq!(e.values, vec![-2.5]);
        let z = sym_eig(&SymmetricMatrix::zeros(3), TOL).unwrap();
        assert_eq!(z.values, vec![0.0; 3]);
        assert!(z.orthonormality_defect() < 1e-15);
    }

    #[test]
    fn coordinate_complement() {
        let e1 = unit_basis(3, 0);
        let y = complement_unit_vector(3, [&e1[..]]).unwrap();
        assert_eq!(y[0], 0.0);
        assert!((norm(&y) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn full_basis_has_trivial_complement() {
        let basis: Vec<Vec<f64>> = (0..4).map(|i| unit_basis(4, i)).collect();
        let err = complement_unit_vector(4, basis.iter().map(|v| v.as_slice())).unwrap_err();
        assert_eq!(err, LinalgError::TrivialComplement(4));
    }

    #[test]
    fn zero_and_dependent_vectors_are_skipped() {
        let z = vec![0.0; 3];
        let a = vec![1.0, 1.0, 0.0];
        let b = vec![2.0, 2.0, 0.0];
        let y = complement_unit_vector(3, [&z[..], &a[..], &b[..]]).unwrap();
        assert!(dot(&y, &a).abs() < 1e-15);
        assert!((norm(&y) - 1.0).abs() < 1e-15);
        // e₁ projects to (1/2, −1/2, 0): the first probe survives.
        assert!((y[0] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn trace_of_outer_sum() {
        let v = [0.6, 0.8, 0.0];
        let u = [0.0, 0.0, 1.0];
        let m = SymmetricMatrix::weighted_outer_sum(3, [(2.0, &v[..]), (0.5, &u[..])]);
        assert!((m.trace() - 2.5).abs() < 1e-15);
        assert!((m.quadratic_form(&u) - 0.5).abs() < 1e-15);
    }
}
