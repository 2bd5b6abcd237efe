//! Dense complex linear algebra kernel.
//!
//! Everything downstream works with [`CMatrix`] (row-major complex dense) and
//! [`MatrixTuple`] (a d-tuple of square matrices of a shared size). Values are
//! immutable after construction and every operation is pure, so sharing across
//! threads is safe.
//!
//! Heavy decompositions (SVD, LU, hermitian eigenvalues) are delegated to
//! `nalgebra`; structural operations (Kronecker products, block assembly,
//! direct sums, adjoints) are implemented directly on the row-major storage.
//! Resolvent-style inverses are always realized as linear solves with a
//! residual report; there is no explicit inverse anywhere.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;
use crate::Scalar;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

/// Wire format: `{"rows":n,"cols":m,"re":[...],"im":[...]}` row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for CMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            re: self.data.iter().map(|z| z.re).collect(),
            im: self.data.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        if raw.re.len() != raw.rows * raw.cols || raw.im.len() != raw.rows * raw.cols {
            return Err(serde::de::Error::custom(format!(
                "matrix payload length {}/{} does not match {}x{}",
                raw.re.len(),
                raw.im.len(),
                raw.rows,
                raw.cols
            )));
        }
        let data: Vec<Scalar> = raw
            .re
            .iter()
            .zip(&raw.im)
            .map(|(&re, &im)| Complex::new(re, im))
            .collect();
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(serde::de::Error::custom("non-finite matrix entry"));
        }
        Ok(CMatrix {
            rows: raw.rows,
            cols: raw.cols,
            data,
        })
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Scalar::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Scalar::ONE;
        }
        m
    }

    /// Diagonal matrix from complex entries.
    pub fn diag(entries: &[Scalar]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Build from real row slices; imaginary parts zero.
    pub fn from_rows_re(rows: &[&[f64]]) -> Self {
        let nr = rows.len();
        let nc = if nr == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|r| r.len() == nc), "ragged rows");
        Self::from_fn(nr, nc, |r, c| Complex::new(rows[r][c], 0.0))
    }

    /// Matrix unit `E_{rc}` (1-based would be confusing; indices are 0-based).
    pub fn unit(n: usize, r: usize, c: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.data[r * n + c] = Scalar::ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn scale(&self, a: Scalar) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * a).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other, "add")?;
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other, "sub")?;
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    fn check_same_shape(&self, other: &CMatrix, what: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dim(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// Plain transpose, no conjugation.
    pub fn transpose(&self) -> CMatrix {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn to_na(&self) -> DMatrix<Scalar> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c))
    }

    pub(crate) fn from_na(m: &DMatrix<Scalar>) -> CMatrix {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    /// Copy `src` into `self` with upper-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, src: &CMatrix) {
        assert!(r0 + src.rows <= self.rows && c0 + src.cols <= self.cols);
        for r in 0..src.rows {
            for c in 0..src.cols {
                self.data[(r0 + r) * self.cols + (c0 + c)] = src.get(r, c);
            }
        }
    }

    /// Extract the `h x w` block with upper-left corner at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> CMatrix {
        assert!(r0 + h <= self.rows && c0 + w <= self.cols);
        Self::from_fn(h, w, |r, c| self.get(r0 + r, c0 + c))
    }
}

/// Matrix product. Errors on inner-dimension mismatch.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.cols != b.rows {
        return Err(Error::Dim(format!(
            "matmul: {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = CMatrix::zeros(a.rows, b.cols);
    for r in 0..a.rows {
        for k in 0..a.cols {
            let av = a.data[r * a.cols + k];
            if av == Scalar::ZERO {
                continue;
            }
            let brow = &b.data[k * b.cols..(k + 1) * b.cols];
            let orow = &mut out.data[r * b.cols..(r + 1) * b.cols];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    Ok(out)
}

/// Kronecker product `A (x) B` in row-major convention:
/// entry `((i*p + k), (j*q + l)) = A[i,j] * B[k,l]` for B of shape p x q.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (p, q) = (b.rows, b.cols);
    let mut out = CMatrix::zeros(a.rows * p, a.cols * q);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let av = a.get(i, j);
            if av == Scalar::ZERO {
                continue;
            }
            for k in 0..p {
                for l in 0..q {
                    out.data[(i * p + k) * out.cols + (j * q + l)] = av * b.get(k, l);
                }
            }
        }
    }
    out
}

/// Assemble a rectangular grid of blocks into one matrix.
/// All blocks in a grid row must share a height, all blocks in a grid column
/// must share a width, and every row must have the same number of blocks.
pub fn block_assemble(grid: &[Vec<CMatrix>]) -> Result<CMatrix> {
    if grid.is_empty() || grid[0].is_empty() {
        return Err(Error::Dim("block_assemble: empty grid".into()));
    }
    let ncols_blocks = grid[0].len();
    if grid.iter().any(|row| row.len() != ncols_blocks) {
        return Err(Error::Dim("block_assemble: ragged grid".into()));
    }
    let row_heights: Vec<usize> = grid.iter().map(|row| row[0].rows).collect();
    let col_widths: Vec<usize> = grid[0].iter().map(|b| b.cols).collect();
    for (i, row) in grid.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            if b.rows != row_heights[i] || b.cols != col_widths[j] {
                return Err(Error::Dim(format!(
                    "block_assemble: block ({i},{j}) is {}x{}, expected {}x{}",
                    b.rows, b.cols, row_heights[i], col_widths[j]
                )));
            }
        }
    }
    let total_r: usize = row_heights.iter().sum();
    let total_c: usize = col_widths.iter().sum();
    let mut out = CMatrix::zeros(total_r, total_c);
    let mut r0 = 0;
    for (i, row) in grid.iter().enumerate() {
        let mut c0 = 0;
        for (j, b) in row.iter().enumerate() {
            out.set_block(r0, c0, b);
            c0 += col_widths[j];
        }
        r0 += row_heights[i];
    }
    Ok(out)
}

/// Block-diagonal sum of square matrices.
pub fn blkdiag(blocks: &[&CMatrix]) -> CMatrix {
    let total_r: usize = blocks.iter().map(|b| b.rows).sum();
    let total_c: usize = blocks.iter().map(|b| b.cols).sum();
    let mut out = CMatrix::zeros(total_r, total_c);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.set_block(r0, c0, b);
        r0 += b.rows;
        c0 += b.cols;
    }
    out
}

/// Largest singular value. Full SVD up to [`tol::OPNORM_SVD_LIMIT`], power
/// iteration on `A^H A` above.
pub fn opnorm(a: &CMatrix) -> f64 {
    if a.data.is_empty() {
        return 0.0;
    }
    // the SVD iteration is not guaranteed to terminate on NaN input
    if !a.is_finite() {
        return f64::NAN;
    }
    if a.rows.max(a.cols) <= tol::OPNORM_SVD_LIMIT {
        let sv = a.to_na().svd(false, false).singular_values;
        sv.iter().cloned().fold(0.0, f64::max)
    } else {
        opnorm_power(a)
    }
}

fn opnorm_power(a: &CMatrix) -> f64 {
    let m = a.to_na();
    let mh = m.adjoint();
    let n = a.cols;
    // Deterministic start vector with a mild ramp to avoid symmetry traps.
    let mut v = nalgebra::DVector::from_fn(n, |i, _| {
        Complex::new(1.0 + (i as f64) / (n as f64), 0.25 * ((i % 7) as f64))
    });
    v /= Complex::new(v.norm(), 0.0);
    let mut lambda = 0.0f64;
    for _ in 0..50_000 {
        let w = &m * &v;
        let next = lambda.max(w.norm_squared());
        let u = &mh * w;
        let un = u.norm();
        if un == 0.0 {
            return 0.0;
        }
        v = u / Complex::new(un, 0.0);
        let cur = next;
        // iterate well past the documented OPNORM_REL accuracy target
        if (cur - lambda).abs() <= 1e-3 * tol::OPNORM_REL * cur.max(1.0) {
            lambda = cur;
            break;
        }
        lambda = cur;
    }
    lambda.sqrt()
}

/// Reciprocal condition number from singular values; 0 for the zero matrix.
pub fn rcond(a: &CMatrix) -> f64 {
    let sv = a.to_na().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 {
        0.0
    } else {
        smin / smax
    }
}

/// Outcome of a linear solve `A X = B`.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: CMatrix,
    /// `||A x - B||_F / ||B||_F` (absolute when B = 0).
    pub residual: f64,
    /// Reciprocal condition estimate of A.
    pub rcond: f64,
}

/// Solve `A X = B` by LU with partial pivoting. Rejects A whose reciprocal
/// condition estimate falls below [`tol::RCOND_FLOOR`].
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<SolveOutcome> {
    if !a.is_square() {
        return Err(Error::Dim(format!("solve: A is {}x{}", a.rows, a.cols)));
    }
    if a.rows != b.rows {
        return Err(Error::Dim(format!(
            "solve: A is {}x{}, B is {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("solve operands"));
    }
    let rc = rcond(a);
    if rc < tol::RCOND_FLOOR {
        return Err(Error::Singular {
            rcond: rc,
            floor: tol::RCOND_FLOOR,
        });
    }
    let lu = a.to_na().lu();
    let x_na = lu.solve(&b.to_na()).ok_or(Error::Singular {
        rcond: rc,
        floor: tol::RCOND_FLOOR,
    })?;
    let x = CMatrix::from_na(&x_na);
    let bnorm = b.frobenius_norm();
    let resid = matmul(a, &x)?.sub(b)?.frobenius_norm();
    let residual = if bnorm > 0.0 { resid / bnorm } else { resid };
    Ok(SolveOutcome {
        x,
        residual,
        rcond: rc,
    })
}

/// Solve `X A = B` (right division) via the transposed system.
pub fn solve_right(a: &CMatrix, b: &CMatrix) -> Result<SolveOutcome> {
    let out = solve(&a.transpose(), &b.transpose())?;
    Ok(SolveOutcome {
        x: out.x.transpose(),
        residual: out.residual,
        rcond: out.rcond,
    })
}

/// Smallest eigenvalue of the hermitian part of `A`. Rejects matrices whose
/// asymmetry `||A - A^H||` exceeds `HERM_TOL * ||A||`.
pub fn min_eig_hermitian(a: &CMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dim(format!(
            "min_eig_hermitian: {}x{}",
            a.rows, a.cols
        )));
    }
    let scale = opnorm(a).max(f64::MIN_POSITIVE);
    let asym = a.sub(&a.adjoint())?.frobenius_norm() / scale;
    if asym > tol::HERM_TOL {
        return Err(Error::NotHermitian {
            asym,
            tol: tol::HERM_TOL,
        });
    }
    let herm = a.add(&a.adjoint())?.scale(Complex::new(0.5, 0.0));
    let eig = nalgebra::linalg::SymmetricEigen::new(herm.to_na());
    Ok(eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min))
}

/// A d-tuple of n x n complex matrices: one evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixTuple {
    dim: usize,
    parts: Vec<CMatrix>,
}

impl MatrixTuple {
    pub fn new(parts: Vec<CMatrix>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Dim("tuple needs at least one part".into()));
        }
        let dim = parts[0].rows;
        for (r, p) in parts.iter().enumerate() {
            if !p.is_square() || p.rows != dim {
                return Err(Error::Dim(format!(
                    "tuple part {} is {}x{}, expected {dim}x{dim}",
                    r + 1,
                    p.rows,
                    p.cols
                )));
            }
            if !p.is_finite() {
                return Err(Error::NonFinite("tuple part"));
            }
        }
        Ok(MatrixTuple { dim, parts })
    }

    /// The zero tuple of d parts at size n.
    pub fn zeros(d: usize, n: usize) -> Self {
        MatrixTuple {
            dim: n,
            parts: vec![CMatrix::zeros(n, n); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of variables d.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Part for 1-based variable index `r`.
    pub fn part(&self, r: usize) -> &CMatrix {
        &self.parts[r - 1]
    }

    pub fn parts(&self) -> &[CMatrix] {
        &self.parts
    }

    /// Coordinate-wise scaling `lambda * x`.
    pub fn scale(&self, lambda: Scalar) -> MatrixTuple {
        MatrixTuple {
            dim: self.dim,
            parts: self.parts.iter().map(|p| p.scale(lambda)).collect(),
        }
    }

    /// Direct sum: coordinate-wise block diagonal of all tuples.
    pub fn direct_sum(tuples: &[&MatrixTuple]) -> Result<MatrixTuple> {
        if tuples.is_empty() {
            return Err(Error::Dim("direct_sum of no tuples".into()));
        }
        let d = tuples[0].len();
        if tuples.iter().any(|t| t.len() != d) {
            return Err(Error::Dim("direct_sum: variable counts differ".into()));
        }
        let parts = (0..d)
            .map(|r| {
                let blocks: Vec<&CMatrix> = tuples.iter().map(|t| &t.parts[r]).collect();
                blkdiag(&blocks)
            })
            .collect();
        MatrixTuple::new(parts)
    }

    /// Compression to the leading k x k corner.
    pub fn compress(&self, k: usize) -> MatrixTuple {
        assert!(k >= 1 && k <= self.dim);
        MatrixTuple {
            dim: k,
            parts: self.parts.iter().map(|p| p.block(0, 0, k, k)).collect(),
        }
    }

    /// Zero-pad to size n, placing the tuple in the leading corner.
    pub fn embed(&self, n: usize) -> MatrixTuple {
        assert!(n >= self.dim);
        MatrixTuple {
            dim: n,
            parts: self
                .parts
                .iter()
                .map(|p| {
                    let mut big = CMatrix::zeros(n, n);
                    big.set_block(0, 0, p);
                    big
                })
                .collect(),
        }
    }
}

/// Conjugate a tuple: `y = s x s^{-1}`, computed per coordinate by a right
/// solve (never by explicit inversion).
pub fn conjugate_tuple(s: &CMatrix, x: &MatrixTuple) -> Result<MatrixTuple> {
    if !s.is_square() || s.rows != x.dim() {
        return Err(Error::Dim(format!(
            "conjugate: s is {}x{}, tuple size {}",
            s.rows(),
            s.cols(),
            x.dim()
        )));
    }
    let parts = x
        .parts()
        .iter()
        .map(|p| {
            let m = matmul(s, p)?;
            Ok(solve_right(s, &m)?.x)
        })
        .collect::<Result<Vec<_>>>()?;
    MatrixTuple::new(parts)
}
