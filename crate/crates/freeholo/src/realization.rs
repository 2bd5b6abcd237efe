//! Transfer-function realizations and their evaluation.
//!
//! A [`Colligation`] is a block operator `V = [[alpha, B], [C, D]]` mapping
//! `C (+) Aux^I -> C (+) Aux^J` with auxiliary dimension `ell`. Paired with an
//! I x J polynomial matrix `delta`, it realizes the function
//!
//! ```text
//! F(x) = alpha I + B' d'(x) [I - D' d'(x)]^{-1} C'
//! ```
//!
//! where primes denote the operators amplified to size n and `d'(x)` is
//! `delta(x)` tensored with the auxiliary space. When V is an isometry, F
//! maps the domain into the closed unit ball, and the defect identity
//!
//! ```text
//! I - F(x)* F(x) = G* [I - d'(x)* d'(x)] G,   G = [I - D' d'(x)]^{-1} C'
//! ```
//!
//! certifies the bound. The resolvent is always applied as a linear solve.
//!
//! The same module houses the Moebius maps `z -> (z - a)(1 - conj(a) z)^{-1}`
//! used to re-center function values, and the block-matrix derivative trick:
//! evaluating F on `[[a, eps h], [0, a]]` puts `eps * DF(a)[h]` in the
//! (1,2) corner, exactly, for any evaluator in this crate.

use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{delta_eval, gaussian_matrix, is_member, PolyMatrix};
use crate::error::{Error, Result};
use crate::freepoly::{EvalCache, FreePoly};
use crate::matcore::{
    block_assemble, kron, matmul, min_eig_hermitian, opnorm, solve, CMatrix, MatrixTuple,
};
use crate::tol;
use crate::Scalar;

/// State-space data `[[alpha, B], [C, D]] : C (+) Aux^I -> C (+) Aux^J`.
///
/// Shapes: `B` is `1 x (ell*I)`, `C` is `(ell*J) x 1`, `D` is
/// `(ell*J) x (ell*I)`. Copies of the auxiliary space are indexed
/// row-major: slot `(i, s)` sits at `i*ell + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Colligation {
    pub alpha: Scalar,
    pub b: CMatrix,
    pub c: CMatrix,
    pub d: CMatrix,
    pub aux_dim: usize,
    pub shape: (usize, usize),
}

#[derive(Serialize, Deserialize)]
struct ColligationJson {
    alpha: [f64; 2],
    #[serde(rename = "B")]
    b: CMatrix,
    #[serde(rename = "C")]
    c: CMatrix,
    #[serde(rename = "D")]
    d: CMatrix,
    ell: usize,
    #[serde(rename = "I")]
    i: usize,
    #[serde(rename = "J")]
    j: usize,
}

impl Serialize for Colligation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ColligationJson {
            alpha: [self.alpha.re, self.alpha.im],
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
            ell: self.aux_dim,
            i: self.shape.0,
            j: self.shape.1,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Colligation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ColligationJson::deserialize(d)?;
        Colligation::new(
            Complex::new(raw.alpha[0], raw.alpha[1]),
            raw.b,
            raw.c,
            raw.d,
            raw.ell,
            (raw.i, raw.j),
        )
        .map_err(serde::de::Error::custom)
    }
}

impl Colligation {
    pub fn new(
        alpha: Scalar,
        b: CMatrix,
        c: CMatrix,
        d: CMatrix,
        aux_dim: usize,
        shape: (usize, usize),
    ) -> Result<Self> {
        let (bi, bj) = shape;
        if b.rows() != 1 || b.cols() != aux_dim * bi {
            return Err(Error::Dim(format!(
                "B must be 1 x {}, got {}x{}",
                aux_dim * bi,
                b.rows(),
                b.cols()
            )));
        }
        if c.rows() != aux_dim * bj || c.cols() != 1 {
            return Err(Error::Dim(format!(
                "C must be {} x 1, got {}x{}",
                aux_dim * bj,
                c.rows(),
                c.cols()
            )));
        }
        if d.rows() != aux_dim * bj || d.cols() != aux_dim * bi {
            return Err(Error::Dim(format!(
                "D must be {} x {}, got {}x{}",
                aux_dim * bj,
                aux_dim * bi,
                d.rows(),
                d.cols()
            )));
        }
        Ok(Colligation {
            alpha,
            b,
            c,
            d,
            aux_dim,
            shape,
        })
    }

    /// Assemble the block operator `V = [[alpha, B], [C, D]]`.
    pub fn block_operator(&self) -> CMatrix {
        let alpha = CMatrix::from_fn(1, 1, |_, _| self.alpha);
        block_assemble(&[
            vec![alpha, self.b.clone()],
            vec![self.c.clone(), self.d.clone()],
        ])
        .expect("colligation blocks are conformable")
    }

    /// Isometry defect `||V^H V - I||`.
    pub fn isometry_defect(&self) -> f64 {
        let v = self.block_operator();
        let gram = matmul(&v.adjoint(), &v).expect("square product");
        let eye = CMatrix::identity(gram.rows());
        opnorm(&gram.sub(&eye).expect("same shape"))
    }

    /// Defect check against [`tol::ISO_TOL`]; errors carry nothing, the
    /// defect itself is returned so callers can report it.
    pub fn validate_isometry(&self) -> f64 {
        self.isometry_defect()
    }

    pub fn is_isometric(&self) -> bool {
        // columns of V can only be orthonormal when the codomain is at
        // least as large, i.e. 1 + ell*J >= 1 + ell*I
        let (i, j) = self.shape;
        j >= i && self.isometry_defect() <= tol::ISO_TOL
    }

    /// Random isometric colligation: QR orthonormalization of a complex
    /// Gaussian `(1 + ell*J) x (1 + ell*I)` matrix. Deterministic in the
    /// generator state. Requires `J >= I` so the columns can be orthonormal.
    pub fn random(
        shape_i: usize,
        shape_j: usize,
        aux_dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let rows = 1 + aux_dim * shape_j;
        let cols = 1 + aux_dim * shape_i;
        if rows < cols {
            return Err(Error::ColligationShape {
                cols_out: rows,
                cols_in: cols,
            });
        }
        let g = gaussian_matrix(rng, rows, cols);
        let q = CMatrix::from_na(&g.to_na().qr().q());
        let alpha = q.get(0, 0);
        let b = q.block(0, 1, 1, cols - 1);
        let c = q.block(1, 0, rows - 1, 1);
        let d = q.block(1, 1, rows - 1, cols - 1);
        Colligation::new(alpha, b, c, d, aux_dim, (shape_i, shape_j))
    }

    /// Change of basis on the auxiliary space: conjugating by a unitary
    /// `u` on Aux produces a different colligation realizing the same
    /// function.
    pub fn rotate_aux_basis(&self, u: &CMatrix) -> Result<Colligation> {
        if u.rows() != self.aux_dim || u.cols() != self.aux_dim {
            return Err(Error::Dim(format!(
                "aux rotation must be {0} x {0}",
                self.aux_dim
            )));
        }
        let (i, j) = self.shape;
        let ui = kron(&CMatrix::identity(i), u);
        let uj = kron(&CMatrix::identity(j), u);
        Ok(Colligation {
            alpha: self.alpha,
            b: matmul(&self.b, &ui.adjoint())?,
            c: matmul(&uj, &self.c)?,
            d: matmul(&matmul(&uj, &self.d)?, &ui.adjoint())?,
            aux_dim: self.aux_dim,
            shape: self.shape,
        })
    }
}

/// A colligation paired with its domain: a concretely evaluable function.
#[derive(Debug, Clone)]
pub struct RealizedFunction {
    colligation: Colligation,
    delta: PolyMatrix,
}

impl RealizedFunction {
    pub fn new(colligation: Colligation, delta: PolyMatrix) -> Result<Self> {
        if colligation.shape != (delta.block_rows(), delta.block_cols()) {
            return Err(Error::Dim(format!(
                "colligation shape {:?} does not match delta {}x{}",
                colligation.shape,
                delta.block_rows(),
                delta.block_cols()
            )));
        }
        if !colligation.is_isometric() {
            log::warn!(
                "colligation is not an isometry (defect {:.3e}); values may exceed the unit ball",
                colligation.isometry_defect()
            );
        }
        Ok(RealizedFunction { colligation, delta })
    }

    pub fn colligation(&self) -> &Colligation {
        &self.colligation
    }

    pub fn delta(&self) -> &PolyMatrix {
        &self.delta
    }

    fn lift(&self, x: &MatrixTuple) -> Result<Lifted> {
        let dval = delta_eval(&self.delta, x)?;
        Ok(Lifted::build(&self.colligation, &dval, x.dim()))
    }

    /// Evaluate by one linear solve. Requires strict domain membership and a
    /// well-conditioned resolvent.
    pub fn eval_exact(&self, x: &MatrixTuple) -> Result<CMatrix> {
        let (member, norm) = is_member(&self.delta, x, 0.0)?;
        if !member {
            return Err(Error::OutsideDomain { norm, bound: 1.0 });
        }
        let mut lifted = self.lift(x)?;
        lifted.value(self.colligation.alpha, x.dim())
    }

    /// Truncated Neumann evaluation with a certified tail bound:
    /// `value = alpha I + sum_{k<m} B' d' (D' d')^k C'`. Requires
    /// `q = ||D' d'(x)|| < 1`.
    pub fn eval_neumann(&self, x: &MatrixTuple, terms: usize) -> Result<NeumannReport> {
        let mut it = self.neumann_iter(x)?;
        for _ in 0..terms {
            it.step()?;
        }
        Ok(it.report())
    }

    /// Reports for every truncation order `1..=m_max`, sharing one lift of
    /// the point. Equivalent to calling [`Self::eval_neumann`] per order.
    pub fn eval_neumann_sweep(&self, x: &MatrixTuple, m_max: usize) -> Result<Vec<NeumannReport>> {
        let mut it = self.neumann_iter(x)?;
        let mut out = Vec::with_capacity(m_max);
        for _ in 0..m_max {
            it.step()?;
            out.push(it.report());
        }
        Ok(out)
    }

    /// Grow the truncation until the certified tail falls below
    /// `NEUMANN_TAIL_TARGET * (1 + ||value||)`, capped at
    /// [`tol::NEUMANN_MAX_TERMS`].
    pub fn eval_neumann_auto(&self, x: &MatrixTuple) -> Result<NeumannReport> {
        let mut it = self.neumann_iter(x)?;
        for _ in 0..tol::NEUMANN_MAX_TERMS {
            it.step()?;
            let r = it.report();
            if r.tail_bound <= tol::NEUMANN_TAIL_TARGET * (1.0 + opnorm(&r.value)) {
                break;
            }
        }
        Ok(it.report())
    }

    fn neumann_iter(&self, x: &MatrixTuple) -> Result<NeumannIter> {
        let lifted = self.lift(x)?;
        let q = opnorm(&lifted.dd);
        if q >= 1.0 {
            return Err(Error::Divergent { q });
        }
        let n = x.dim();
        let bnorm = opnorm(&self.colligation.b);
        let cnorm = opnorm(&self.colligation.c).max(1.0);
        let dnorm = lifted.delta_norm;
        Ok(NeumannIter {
            acc: CMatrix::identity(n).scale(self.colligation.alpha),
            cur: lifted.c_dot.clone(),
            bd: matmul(&lifted.b_dot, &lifted.delta_hat)?,
            dd: lifted.dd,
            q,
            terms: 0,
            scale: bnorm * dnorm * cnorm,
        })
    }

    /// Defect identity: residual between `I - F(x)* F(x)` and
    /// `G* (I - d'* d') G`, plus the smallest eigenvalue of the left side.
    pub fn defect_check(&self, x: &MatrixTuple) -> Result<DefectReport> {
        let (member, norm) = is_member(&self.delta, x, 0.0)?;
        if !member {
            return Err(Error::OutsideDomain { norm, bound: 1.0 });
        }
        let mut lifted = self.lift(x)?;
        let n = x.dim();
        let value = lifted.value(self.colligation.alpha, n)?;
        let lhs = CMatrix::identity(n).sub(&matmul(&value.adjoint(), &value)?)?;

        let g = &lifted.resolvent_c;
        let dh = &lifted.delta_hat;
        let mid = CMatrix::identity(dh.cols()).sub(&matmul(&dh.adjoint(), dh)?)?;
        let rhs = matmul(&g.adjoint(), &matmul(&mid, g)?)?;
        let residual = opnorm(&lhs.sub(&rhs)?);
        let min_eig = min_eig_hermitian(&lhs)?;
        Ok(DefectReport { residual, min_eig })
    }
}

/// Result of a truncated Neumann evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct NeumannReport {
    pub terms_used: usize,
    /// `||D' d'(x)||`, the geometric ratio of the series.
    pub q: f64,
    /// `||B|| * ||delta(x)|| * max(1, ||C||) * q^m / (1 - q)`; for isometric
    /// colligations `||C|| <= 1` and the extra factor is 1.
    pub tail_bound: f64,
    pub value: CMatrix,
}

struct NeumannIter {
    acc: CMatrix,
    cur: CMatrix,
    bd: CMatrix,
    dd: CMatrix,
    q: f64,
    terms: usize,
    scale: f64,
}

impl NeumannIter {
    fn step(&mut self) -> Result<()> {
        let term = matmul(&self.bd, &self.cur)?;
        self.acc = self.acc.add(&term)?;
        self.cur = matmul(&self.dd, &self.cur)?;
        self.terms += 1;
        Ok(())
    }

    fn report(&self) -> NeumannReport {
        let tail_bound = if self.q < 1.0 {
            self.scale * self.q.powi(self.terms as i32) / (1.0 - self.q)
        } else {
            f64::INFINITY
        };
        NeumannReport {
            terms_used: self.terms,
            q: self.q,
            tail_bound,
            value: self.acc.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DefectReport {
    /// `|| (I - F*F) - G*(I - d'*d')G ||`.
    pub residual: f64,
    /// Smallest eigenvalue of `I - F(x)* F(x)`.
    pub min_eig: f64,
}

/// Operators of the realization formula amplified to point size n.
///
/// The amplified space is ordered `C^n (x) C^I (x) C^ell`; `delta_hat` is the
/// shuffle of `delta(x) (x) I_ell` into that ordering, so `B' = I_n (x) B`,
/// `C' = I_n (x) C`, `D' = I_n (x) D` compose with it directly.
struct Lifted {
    b_dot: CMatrix,
    c_dot: CMatrix,
    delta_hat: CMatrix,
    /// `D' * delta_hat`.
    dd: CMatrix,
    /// `[I - D' delta_hat]^{-1} C'`, by linear solve.
    resolvent_c: CMatrix,
    delta_norm: f64,
    resolvent_rcond: f64,
}

impl Lifted {
    fn build(col: &Colligation, dval: &CMatrix, n: usize) -> Lifted {
        let (bi, bj) = col.shape;
        let ell = col.aux_dim;
        let mut delta_hat = CMatrix::zeros(n * bi * ell, n * bj * ell);
        for a in 0..n {
            for i in 0..bi {
                for b in 0..n {
                    for j in 0..bj {
                        let v = dval.get(i * n + a, j * n + b);
                        if v == Scalar::ZERO {
                            continue;
                        }
                        for s in 0..ell {
                            delta_hat.set((a * bi + i) * ell + s, (b * bj + j) * ell + s, v);
                        }
                    }
                }
            }
        }
        let eye_n = CMatrix::identity(n);
        let b_dot = kron(&eye_n, &col.b);
        let c_dot = kron(&eye_n, &col.c);
        let d_dot = kron(&eye_n, &col.d);
        let dd = matmul(&d_dot, &delta_hat).expect("conformable");
        // The resolvent solve is deferred to first use, so Neumann iteration
        // does not pay for a solve it never needs.
        Lifted {
            b_dot,
            c_dot,
            delta_hat,
            dd,
            resolvent_c: CMatrix::zeros(0, 0),
            delta_norm: opnorm(dval),
            resolvent_rcond: 0.0,
        }
    }

    fn ensure_resolvent(&mut self) -> Result<()> {
        if self.resolvent_c.rows() != 0 {
            return Ok(());
        }
        let m = self.dd.rows();
        let sys = CMatrix::identity(m).sub(&self.dd)?;
        let out = solve(&sys, &self.c_dot)?;
        self.resolvent_c = out.x;
        self.resolvent_rcond = out.rcond;
        Ok(())
    }

    fn value(&mut self, alpha: Scalar, n: usize) -> Result<CMatrix> {
        self.ensure_resolvent()?;
        let bd = matmul(&self.b_dot, &self.delta_hat)?;
        let tail = matmul(&bd, &self.resolvent_c)?;
        CMatrix::identity(n).scale(alpha).add(&tail)
    }
}

/// A graded function of matrix tuples with a declared domain.
///
/// Implementations must be graded (output size = input size) and declare
/// which structural laws they claim, so the property harness knows what a
/// failure means.
pub trait Evaluator {
    fn eval(&self, x: &MatrixTuple) -> Result<CMatrix>;
    fn delta(&self) -> &PolyMatrix;
    /// Claims the intertwining-preservation laws.
    fn claims_ip(&self) -> bool {
        true
    }
    /// Claims values in the closed unit ball on the domain.
    fn claims_schur(&self) -> bool {
        false
    }
    fn name(&self) -> String;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn eval(&self, x: &MatrixTuple) -> Result<CMatrix> {
        (**self).eval(x)
    }
    fn delta(&self) -> &PolyMatrix {
        (**self).delta()
    }
    fn claims_ip(&self) -> bool {
        (**self).claims_ip()
    }
    fn claims_schur(&self) -> bool {
        (**self).claims_schur()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl Evaluator for RealizedFunction {
    fn eval(&self, x: &MatrixTuple) -> Result<CMatrix> {
        self.eval_exact(x)
    }

    fn delta(&self) -> &PolyMatrix {
        &self.delta
    }

    fn claims_schur(&self) -> bool {
        self.colligation.is_isometric()
    }

    fn name(&self) -> String {
        let (i, j) = self.colligation.shape;
        format!("realized({i}x{j}, ell={})", self.colligation.aux_dim)
    }
}

/// A free polynomial with a declared domain.
#[derive(Debug, Clone)]
pub struct PolyEvaluator {
    poly: FreePoly,
    delta: PolyMatrix,
}

impl PolyEvaluator {
    pub fn new(poly: FreePoly, delta: PolyMatrix) -> Result<Self> {
        if poly.nvars() > delta.nvars() {
            return Err(Error::Dim(format!(
                "polynomial uses {} variables, domain has {}",
                poly.nvars(),
                delta.nvars()
            )));
        }
        Ok(PolyEvaluator { poly, delta })
    }

    pub fn poly(&self) -> &FreePoly {
        &self.poly
    }
}

impl Evaluator for PolyEvaluator {
    fn eval(&self, x: &MatrixTuple) -> Result<CMatrix> {
        let mut cache = EvalCache::new(x);
        self.poly.eval_cached(&mut cache)
    }

    fn delta(&self) -> &PolyMatrix {
        &self.delta
    }

    fn name(&self) -> String {
        format!("poly(deg {})", self.poly.degree())
    }
}

/// Closed-form Moebius map `(Z - alpha I)(I - conj(alpha) Z)^{-1}` applied
/// to an operator argument with `||Z|| < 1`, `|alpha| < 1`.
pub fn mobius_apply(alpha: Scalar, z: &CMatrix) -> Result<CMatrix> {
    if alpha.norm() >= 1.0 {
        return Err(Error::Usage(format!("|alpha| = {} >= 1", alpha.norm())));
    }
    if !z.is_square() {
        return Err(Error::Dim("mobius argument must be square".into()));
    }
    let nz = opnorm(z);
    if nz >= 1.0 {
        return Err(Error::OutsideDomain {
            norm: nz,
            bound: 1.0,
        });
    }
    let n = z.rows();
    let eye = CMatrix::identity(n);
    let num = z.sub(&eye.scale(alpha))?;
    let den = eye.sub(&z.scale(alpha.conj()))?;
    // (I - conj(a) Z)^{-1} commutes with (Z - a I); a left solve suffices.
    Ok(solve(&den, &num)?.x)
}

/// Power-series Moebius map:
/// `-alpha I + (1 - |alpha|^2) sum_{k=1}^{m} conj(alpha)^{k-1} Z^k`.
pub fn mobius_series(alpha: Scalar, z: &CMatrix, terms: usize) -> Result<CMatrix> {
    if alpha.norm() >= 1.0 {
        return Err(Error::Usage(format!("|alpha| = {} >= 1", alpha.norm())));
    }
    let nz = opnorm(z);
    if nz >= 1.0 {
        return Err(Error::OutsideDomain {
            norm: nz,
            bound: 1.0,
        });
    }
    let n = z.rows();
    let mut acc = CMatrix::identity(n).scale(-alpha);
    let factor = Complex::new(1.0 - alpha.norm_sqr(), 0.0);
    let mut zk = z.clone();
    let mut apow = Scalar::ONE;
    for _ in 1..=terms {
        acc = acc.add(&zk.scale(factor * apow))?;
        zk = matmul(&zk, z)?;
        apow *= alpha.conj();
    }
    Ok(acc)
}

/// Analytic tail of the Moebius series after m terms:
/// `(1 - |alpha|^2) ||Z||^{m+1} / (1 - |alpha| ||Z||)`.
pub fn mobius_series_tail(alpha: Scalar, z_norm: f64, terms: usize) -> f64 {
    (1.0 - alpha.norm_sqr()) * z_norm.powi(terms as i32 + 1) / (1.0 - alpha.norm() * z_norm)
}

/// Composition `phi_alpha . F`, itself an evaluator on the same domain.
#[derive(Debug, Clone)]
pub struct MobiusComposed<E> {
    inner: E,
    alpha: Scalar,
}

/// Build `H = phi_alpha . F`. When `F(0) = alpha I` (which holds whenever the
/// domain contains 0 and F is a bounded realized function), H maps 0 to 0.
pub fn compose_mobius<E: Evaluator>(inner: E, alpha: Scalar) -> Result<MobiusComposed<E>> {
    if alpha.norm() >= 1.0 {
        return Err(Error::Usage(format!("|alpha| = {} >= 1", alpha.norm())));
    }
    Ok(MobiusComposed { inner, alpha })
}

impl<E: Evaluator> Evaluator for MobiusComposed<E> {
    fn eval(&self, x: &MatrixTuple) -> Result<CMatrix> {
        mobius_apply(self.alpha, &self.inner.eval(x)?)
    }

    fn delta(&self) -> &PolyMatrix {
        self.inner.delta()
    }

    fn claims_ip(&self) -> bool {
        self.inner.claims_ip()
    }

    fn claims_schur(&self) -> bool {
        self.inner.claims_schur()
    }

    fn name(&self) -> String {
        format!("mobius({:.3}) . {}", self.alpha, self.inner.name())
    }
}

/// Read off the scalar `alpha` with `F(0) = alpha I` at size n, together with
/// the off-scalar mass `||F(0) - alpha I||`.
pub fn scalar_at_zero<E: Evaluator>(f: &E, d: usize, n: usize) -> Result<(Scalar, f64)> {
    let value = f.eval(&MatrixTuple::zeros(d, n))?;
    let mut tr = Scalar::ZERO;
    for i in 0..n {
        tr += value.get(i, i);
    }
    let alpha = tr / Complex::new(n as f64, 0.0);
    let off = opnorm(&value.sub(&CMatrix::identity(n).scale(alpha))?);
    Ok((alpha, off))
}

/// Default derivative step: keeps the doubled block tuple inside the domain.
/// The identity is exact in eps, so the step only matters for membership.
pub fn default_derivative_step(delta_norm_at_a: f64) -> f64 {
    1e-2 * (1.0 - delta_norm_at_a).max(0.0)
}

/// Derivative via the block trick: evaluate F on `[[a, eps h], [0, a]]` and
/// return the (1,2) corner divided by eps. For the evaluators in this crate
/// the identity is exact — no limit is taken.
pub fn block_derivative<E: Evaluator>(
    f: &E,
    a: &MatrixTuple,
    h: &MatrixTuple,
    eps: f64,
) -> Result<CMatrix> {
    if a.len() != h.len() || a.dim() != h.dim() {
        return Err(Error::Dim("derivative: a and h shapes differ".into()));
    }
    let n = a.dim();
    let parts: Vec<CMatrix> = a
        .parts()
        .iter()
        .zip(h.parts())
        .map(|(ar, hr)| {
            let mut big = CMatrix::zeros(2 * n, 2 * n);
            big.set_block(0, 0, ar);
            big.set_block(n, n, ar);
            big.set_block(0, n, &hr.scale(Complex::new(eps, 0.0)));
            big
        })
        .collect();
    let block_tuple = MatrixTuple::new(parts)?;
    let (member, norm) = is_member(f.delta(), &block_tuple, 0.0)?;
    if !member {
        return Err(Error::BlockOutsideDomain {
            norm,
            suggested_eps: eps / 4.0,
        });
    }
    let value = f.eval(&block_tuple)?;
    Ok(value.block(0, n, n, n).scale(Complex::new(1.0 / eps, 0.0)))
}

/// Block derivative with the default step, retrying with smaller steps while
/// the doubled tuple escapes the domain.
pub fn block_derivative_auto<E: Evaluator>(
    f: &E,
    a: &MatrixTuple,
    h: &MatrixTuple,
) -> Result<CMatrix> {
    let (member, norm) = is_member(f.delta(), a, 0.0)?;
    if !member {
        return Err(Error::OutsideDomain { norm, bound: 1.0 });
    }
    let mut eps = default_derivative_step(norm).max(1e-9);
    for _ in 0..10 {
        match block_derivative(f, a, h, eps) {
            Err(Error::BlockOutsideDomain { suggested_eps, .. }) => {
                eps = suggested_eps.min(eps / 4.0);
            }
            other => return other,
        }
    }
    block_derivative(f, a, h, eps)
}
