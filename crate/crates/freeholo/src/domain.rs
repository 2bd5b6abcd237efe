//! Sublevel domains cut out by a matrix of free polynomials.
//!
//! For an I x J matrix `delta` of free polynomials over d variables, the
//! domain consists of the d-tuples x with `||delta(x)|| < 1`, where
//! `delta(x)` is the (nI) x (nJ) block matrix of entrywise evaluations.
//! This module provides membership tests with explicit strictness margins,
//! samplers for points, similarities and unitaries, and a nullspace solver
//! for intertwiners `T x^r = y^r T`.
//!
//! All randomness flows through caller-provided seeded generators, so every
//! sample is a deterministic function of (seed, parameters).

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::freepoly::{EvalCache, FreePoly};
use crate::matcore::{block_assemble, kron, matmul, opnorm, CMatrix, MatrixTuple};
use crate::tol;
use crate::Scalar;

/// An I x J grid of free polynomials over a shared variable count.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    block_rows: usize,
    block_cols: usize,
    nvars: usize,
    entries: Vec<FreePoly>,
}

impl PolyMatrix {
    pub fn new(
        block_rows: usize,
        block_cols: usize,
        nvars: usize,
        entries: Vec<FreePoly>,
    ) -> Result<Self> {
        if block_rows == 0 || block_cols == 0 {
            return Err(Error::Dim("polynomial matrix must be non-empty".into()));
        }
        if entries.len() != block_rows * block_cols {
            return Err(Error::Dim(format!(
                "polynomial matrix needs {} entries, got {}",
                block_rows * block_cols,
                entries.len()
            )));
        }
        for p in &entries {
            if p.nvars() > nvars {
                return Err(Error::Dim(format!(
                    "entry uses {} variables, matrix declares {nvars}",
                    p.nvars()
                )));
            }
        }
        let entries = entries.into_iter().map(|p| p.with_nvars(nvars)).collect();
        Ok(PolyMatrix {
            block_rows,
            block_cols,
            nvars,
            entries,
        })
    }

    /// 1 x 1 matrix holding a single polynomial.
    pub fn scalar(p: FreePoly) -> Self {
        let nvars = p.nvars();
        PolyMatrix {
            block_rows: 1,
            block_cols: 1,
            nvars,
            entries: vec![p],
        }
    }

    /// diag(x1, ..., xd): membership means every coordinate has norm < 1.
    pub fn ball_max(d: usize) -> Self {
        let mut entries = vec![FreePoly::zero(d); d * d];
        for r in 0..d {
            entries[r * d + r] = FreePoly::var(d, (r + 1) as u32);
        }
        PolyMatrix {
            block_rows: d,
            block_cols: d,
            nvars: d,
            entries,
        }
    }

    /// The row [x1 ... xd]: membership means `x1 x1* + ... + xd xd* < I`.
    pub fn ball_row(d: usize) -> Self {
        PolyMatrix {
            block_rows: 1,
            block_cols: d,
            nvars: d,
            entries: (1..=d).map(|r| FreePoly::var(d, r as u32)).collect(),
        }
    }

    /// `1 - (x1 x2 - x2 x1)`: a domain with operator-level points but no
    /// matrix-level points (the trace of a commutator vanishes).
    pub fn commutator_shift() -> Self {
        let x1 = FreePoly::var(2, 1);
        let x2 = FreePoly::var(2, 2);
        let p = FreePoly::one(2).sub(&x1.mul(&x2).sub(&x2.mul(&x1)));
        PolyMatrix::scalar(p)
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn entry(&self, i: usize, j: usize) -> &FreePoly {
        &self.entries[i * self.block_cols + j]
    }

    pub fn entries(&self) -> &[FreePoly] {
        &self.entries
    }

    /// Constant terms as an I x J complex matrix — the value at x = 0.
    pub fn constant_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.block_rows, self.block_cols, |i, j| {
            self.entry(i, j).constant_term()
        })
    }

    /// `||delta(0)||`, computed on the small constant matrix.
    pub fn norm_at_zero(&self) -> f64 {
        opnorm(&self.constant_matrix())
    }

    /// True when every entry has zero constant term, i.e. delta(0) = 0.
    pub fn vanishes_at_zero(&self) -> bool {
        self.entries
            .iter()
            .all(|p| p.constant_term() == Scalar::ZERO)
    }

    /// Subtract the constant terms from every entry.
    pub fn centered(&self) -> PolyMatrix {
        PolyMatrix {
            block_rows: self.block_rows,
            block_cols: self.block_cols,
            nvars: self.nvars,
            entries: self
                .entries
                .iter()
                .map(|p| p.sub(&FreePoly::constant(self.nvars, p.constant_term())))
                .collect(),
        }
    }

    /// Multiply every entry by `t > 0`: membership in the scaled matrix
    /// means `||delta(x)|| < 1/t`.
    pub fn scale_domain(&self, t: f64) -> PolyMatrix {
        assert!(t > 0.0, "scale factor must be positive");
        let a = Complex::new(t, 0.0);
        PolyMatrix {
            block_rows: self.block_rows,
            block_cols: self.block_cols,
            nvars: self.nvars,
            entries: self.entries.iter().map(|p| p.scale(a)).collect(),
        }
    }
}

/// Evaluate the polynomial matrix as one (nI) x (nJ) block operator.
pub fn delta_eval(delta: &PolyMatrix, x: &MatrixTuple) -> Result<CMatrix> {
    if x.len() != delta.nvars() {
        return Err(Error::Dim(format!(
            "delta has {} variables, point has {}",
            delta.nvars(),
            x.len()
        )));
    }
    let mut cache = EvalCache::new(x);
    let grid: Vec<Vec<CMatrix>> = (0..delta.block_rows)
        .map(|i| {
            (0..delta.block_cols)
                .map(|j| delta.entry(i, j).eval_cached(&mut cache))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    block_assemble(&grid)
}

/// `||delta(x)||` as an operator from (C^n)^J to (C^n)^I.
pub fn delta_norm(delta: &PolyMatrix, x: &MatrixTuple) -> Result<f64> {
    Ok(opnorm(&delta_eval(delta, x)?))
}

/// Strict membership with margin: `||delta(x)|| < 1 - margin`.
/// The norm is always returned.
pub fn is_member(delta: &PolyMatrix, x: &MatrixTuple, margin: f64) -> Result<(bool, f64)> {
    let norm = delta_norm(delta, x)?;
    Ok((norm < 1.0 - margin, norm))
}

/// A point certified to lie in the domain, with its cached norm.
#[derive(Debug, Clone)]
pub struct DomainPoint {
    x: MatrixTuple,
    delta_norm: f64,
}

impl DomainPoint {
    /// Certify membership (strict, margin 0) and cache the norm.
    pub fn certify(delta: &PolyMatrix, x: MatrixTuple) -> Result<Self> {
        let (member, norm) = is_member(delta, &x, 0.0)?;
        if !member {
            return Err(Error::OutsideDomain { norm, bound: 1.0 });
        }
        Ok(DomainPoint {
            x,
            delta_norm: norm,
        })
    }

    pub fn point(&self) -> &MatrixTuple {
        &self.x
    }

    pub fn delta_norm(&self) -> f64 {
        self.delta_norm
    }

    pub fn into_point(self) -> MatrixTuple {
        self.x
    }
}

/// Standard complex Gaussian matrix (independent real and imaginary parts).
pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re, im)
    })
}

/// d-tuple of n x n complex Gaussians.
pub fn gaussian_tuple(rng: &mut ChaCha8Rng, d: usize, n: usize) -> MatrixTuple {
    MatrixTuple::new((0..d).map(|_| gaussian_matrix(rng, n, n)).collect())
        .expect("gaussian tuple is well formed")
}

/// Haar-ish random unitary via QR of a complex Gaussian.
pub fn sample_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = gaussian_matrix(rng, n, n);
    let qr = g.to_na().qr();
    CMatrix::from_na(&qr.q())
}

/// Random invertible matrix with condition number at most `cond_cap`:
/// `U diag(sigma) V^H` with log-uniform singular values in
/// `[1/sqrt(cap), sqrt(cap)]`.
pub fn sample_similarity(n: usize, cond_cap: f64, rng: &mut ChaCha8Rng) -> CMatrix {
    assert!(cond_cap > 1.0, "condition cap must exceed 1");
    let u = sample_unitary(n, rng);
    let v = sample_unitary(n, rng);
    let half = cond_cap.ln() / 2.0;
    let sigma: Vec<Scalar> = (0..n)
        .map(|_| {
            let t: f64 = rng.random_range(-1.0..=1.0);
            Complex::new((t * half).exp(), 0.0)
        })
        .collect();
    matmul(&matmul(&u, &CMatrix::diag(&sigma)).unwrap(), &v.adjoint()).unwrap()
}

/// Sample a domain point at size n.
///
/// When `||delta(0)|| < 1` and the target `shrink` is reachable from the
/// origin, a Gaussian direction is rescaled by bisection until
/// `||delta(x)|| = shrink` within [`tol::SAMPLE_NORM_TOL`]. Otherwise the
/// sampler falls back to rejection (fresh Gaussians over a downscaling
/// ladder) and returns the first strict member, whatever its norm.
pub fn sample_point(
    delta: &PolyMatrix,
    n: usize,
    rng: &mut ChaCha8Rng,
    shrink: f64,
) -> Result<DomainPoint> {
    assert!(shrink > 0.0 && shrink < 1.0, "shrink must be in (0,1)");
    let norm0 = delta.norm_at_zero();
    if norm0 < 1.0 - tol::SAMPLE_NORM_TOL && shrink >= norm0 {
        let g = gaussian_tuple(rng, delta.nvars(), n);
        let phi = |t: f64| -> Result<f64> { delta_norm(delta, &g.scale(Complex::new(t, 0.0))) };
        // Bracket the first crossing of the target level.
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let mut crossed = false;
        for _ in 0..80 {
            if phi(hi)? >= shrink {
                crossed = true;
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        if !crossed {
            return Err(Error::SamplerExhausted { attempts: 80 });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = phi(mid)?;
            if (v - shrink).abs() <= tol::SAMPLE_NORM_TOL {
                let x = g.scale(Complex::new(mid, 0.0));
                return Ok(DomainPoint { delta_norm: v, x });
            }
            if v < shrink {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Interval collapsed without meeting the tolerance; a jump in the
        // norm along the ray. Fall back to the inner endpoint if strict.
        let v = phi(lo)?;
        if v < 1.0 {
            return Ok(DomainPoint {
                delta_norm: v,
                x: g.scale(Complex::new(lo, 0.0)),
            });
        }
        return Err(Error::SamplerExhausted { attempts: 280 });
    }

    // Rejection-only mode.
    let ladder = [1.0, 0.5, 0.25, 0.125, 0.0625];
    let mut attempts = 0usize;
    while attempts < tol::MAX_REJECTS {
        let g = gaussian_tuple(rng, delta.nvars(), n);
        for &t in &ladder {
            attempts += 1;
            let x = g.scale(Complex::new(t, 0.0));
            let (member, norm) = is_member(delta, &x, 0.0)?;
            if member {
                return Ok(DomainPoint {
                    x,
                    delta_norm: norm,
                });
            }
            if attempts >= tol::MAX_REJECTS {
                break;
            }
        }
    }
    Err(Error::SamplerExhausted { attempts })
}

/// The co-isometric inclusion `[I; 0]` of C^k into C^n, which intertwines a
/// tuple with any direct sum having it as the leading summand.
pub fn inclusion_intertwiner(k: usize, n: usize) -> CMatrix {
    assert!(k <= n);
    let mut t = CMatrix::zeros(n, k);
    t.set_block(0, 0, &CMatrix::identity(k));
    t
}

/// Basis of the intertwiner space `{T : T x^r = y^r T for all r}`, computed
/// from the SVD nullspace of the stacked Sylvester system. Singular values
/// below `NULLSPACE_CUTOFF * sigma_max` count as zero.
pub fn intertwiner_space(x: &MatrixTuple, y: &MatrixTuple) -> Result<Vec<CMatrix>> {
    if x.len() != y.len() {
        return Err(Error::Dim("intertwiner: variable counts differ".into()));
    }
    let n = x.dim();
    let m = y.dim();
    let d = x.len();
    let mut blocks: Vec<Vec<CMatrix>> = Vec::with_capacity(d);
    for r in 1..=d {
        // vec is column-major: vec(T x^r) = (x^r)^T (x) I_m, vec(y^r T) = I_n (x) y^r
        let a = kron(&x.part(r).transpose(), &CMatrix::identity(m));
        let b = kron(&CMatrix::identity(n), y.part(r));
        blocks.push(vec![a.sub(&b)?]);
    }
    let stacked = block_assemble(&blocks)?;
    let svd = stacked.to_na().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol::NULLSPACE_CUTOFF * smax;
    let mut basis = Vec::new();
    for (i, &s) in sv.iter().enumerate() {
        if s <= cutoff {
            // row i of V^H corresponds to the i-th right singular vector
            let mut t = CMatrix::zeros(m, n);
            for col in 0..m * n {
                let v = vt[(i, col)].conj();
                t.set(col % m, col / m, v);
            }
            basis.push(t);
        }
    }
    // A rank-deficient stack can hide nullspace directions past the row
    // count; rows(vt) = min(dmn, mn) = mn here since d >= 1.
    Ok(basis)
}

/// Random element of the intertwiner space, Frobenius-normalized;
/// `None` when the space is trivial.
pub fn sample_intertwiner(
    x: &MatrixTuple,
    y: &MatrixTuple,
    rng: &mut ChaCha8Rng,
) -> Result<Option<CMatrix>> {
    let basis = intertwiner_space(x, y)?;
    if basis.is_empty() {
        return Ok(None);
    }
    let mut acc = CMatrix::zeros(y.dim(), x.dim());
    for b in &basis {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        acc = acc.add(&b.scale(Complex::new(re, im)))?;
    }
    let norm = acc.frobenius_norm();
    if norm == 0.0 {
        return Ok(Some(basis[0].clone()));
    }
    Ok(Some(acc.scale(Complex::new(1.0 / norm, 0.0))))
}
