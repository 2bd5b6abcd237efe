//! Homogeneous power-series machinery.
//!
//! A realized function expands as `F(x) = sum_k P_k(x)` with `P_k` a
//! homogeneous free polynomial of degree k. This module produces the `P_k`
//! three ways and cross-checks them:
//!
//! * [`symbolic_expand`] — exact polynomial arithmetic on the truncated
//!   Neumann series of the realization (re-centering the colligation first
//!   when `delta(0) != 0`);
//! * [`dft_components`] — evaluate `F(lambda x)` on a circle of N roots of
//!   unity and extract `P_k(x)` by a discrete Fourier transform;
//! * [`cauchy_certificate`] — a growth certificate `||P_k(x)|| <= M / r^k`
//!   from the supremum of `||F(lambda x)||` on a circle of radius r > 1,
//!   which also powers certified polynomial approximation on finite sets.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::domain::{is_member, PolyMatrix};
use crate::error::{Error, Result};
use crate::freepoly::FreePoly;
use crate::matcore::{kron, opnorm, solve, CMatrix, MatrixTuple};
use crate::realization::{Colligation, Evaluator, RealizedFunction};
use crate::tol;
use crate::Scalar;

/// Growth certificate for the homogeneous components at a fixed point:
/// `||P_k(x)|| <= sup / radius^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    /// Supremum of `||F(lambda x)||` over the sampled circle.
    pub sup: f64,
    /// Circle radius, greater than 1.
    pub radius: f64,
}

impl GrowthCertificate {
    /// Certified bound on `||P_k(x)||`.
    pub fn component_bound(&self, k: usize) -> f64 {
        self.sup / self.radius.powi(k as i32)
    }

    /// Certified bound on `||F(x) - sum_{k<=K} P_k(x)||`.
    pub fn tail_bound(&self, k_max: usize) -> f64 {
        self.sup / (self.radius.powi(k_max as i32) * (self.radius - 1.0))
    }
}

/// Ordered homogeneous components `P_0 ... P_K` of a series expansion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesExpansion {
    #[serde(rename = "K")]
    k_max: usize,
    components: Vec<FreePoly>,
    #[serde(rename = "M")]
    growth_sup: Option<f64>,
    #[serde(rename = "r")]
    growth_radius: Option<f64>,
}

impl SeriesExpansion {
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn components(&self) -> &[FreePoly] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &FreePoly {
        &self.components[k]
    }

    pub fn growth_cert(&self) -> Option<GrowthCertificate> {
        match (self.growth_sup, self.growth_radius) {
            (Some(sup), Some(radius)) => Some(GrowthCertificate { sup, radius }),
            _ => None,
        }
    }

    pub fn with_growth_cert(mut self, cert: GrowthCertificate) -> Self {
        self.growth_sup = Some(cert.sup);
        self.growth_radius = Some(cert.radius);
        self
    }

    /// `sum_{k<=K} P_k` as a single polynomial.
    pub fn partial_sum(&self, k_max: usize) -> FreePoly {
        let d = self.components.first().map(|p| p.nvars()).unwrap_or(1);
        self.components
            .iter()
            .take(k_max + 1)
            .fold(FreePoly::zero(d), |acc, p| acc.add(p))
    }
}

/// Dense matrix of polynomials used during symbolic expansion.
struct PMat {
    rows: usize,
    cols: usize,
    e: Vec<FreePoly>,
}

impl PMat {
    fn at(&self, i: usize, j: usize) -> &FreePoly {
        &self.e[i * self.cols + j]
    }

    /// `delta (x) I_ell` as a polynomial matrix over the amplified slots.
    fn amplified_delta(delta: &PolyMatrix, ell: usize) -> PMat {
        let rows = delta.block_rows() * ell;
        let cols = delta.block_cols() * ell;
        let d = delta.nvars();
        let mut e = vec![FreePoly::zero(d); rows * cols];
        for i in 0..delta.block_rows() {
            for j in 0..delta.block_cols() {
                for s in 0..ell {
                    e[(i * ell + s) * cols + (j * ell + s)] = delta.entry(i, j).clone();
                }
            }
        }
        PMat { rows, cols, e }
    }

    /// Complex matrix times polynomial matrix, truncated in degree.
    fn scalar_mul(c: &CMatrix, p: &PMat, trunc: usize) -> PMat {
        assert_eq!(c.cols(), p.rows);
        let d = p.e.first().map(|q| q.nvars()).unwrap_or(1);
        let mut e = Vec::with_capacity(c.rows() * p.cols);
        for i in 0..c.rows() {
            for j in 0..p.cols {
                let mut acc = FreePoly::zero(d);
                for k in 0..p.rows {
                    let coeff = c.get(i, k);
                    if coeff != Scalar::ZERO {
                        acc = acc.add(&p.at(k, j).scale(coeff));
                    }
                }
                e.push(acc.truncate_degree(trunc));
            }
        }
        PMat {
            rows: c.rows(),
            cols: p.cols,
            e,
        }
    }

    /// Polynomial matrix product, truncated in degree.
    fn mul(&self, other: &PMat, trunc: usize) -> PMat {
        assert_eq!(self.cols, other.rows);
        let d = self.e.first().map(|q| q.nvars()).unwrap_or(1);
        let mut e = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = FreePoly::zero(d);
                for k in 0..self.cols {
                    let a = self.at(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(other.at(k, j)).truncate_degree(trunc));
                }
                e.push(acc);
            }
        }
        PMat {
            rows: self.rows,
            cols: other.cols,
            e,
        }
    }

    fn term_count(&self) -> usize {
        self.e.iter().map(|p| p.num_terms()).sum()
    }

    fn is_zero(&self) -> bool {
        self.e.iter().all(|p| p.is_zero())
    }
}

/// Fold the constant part of delta into the colligation so the series can be
/// expanded in the centered variable `delta - delta(0)`. Requires
/// `||D (delta(0) (x) I)|| < 1`; the result is generally not an isometry.
fn recenter(col: &Colligation, delta: &PolyMatrix) -> Result<(Colligation, PolyMatrix)> {
    let ell = col.aux_dim;
    let delta0 = kron(&delta.constant_matrix(), &CMatrix::identity(ell));
    let d_delta0 = crate::matcore::matmul(&col.d, &delta0)?;
    let q = opnorm(&d_delta0);
    if q >= 1.0 {
        return Err(Error::Recenter { norm: q });
    }
    let m = d_delta0.rows();
    let sys = CMatrix::identity(m).sub(&d_delta0)?;
    let d_prime = solve(&sys, &col.d)?.x;
    let c_prime = solve(&sys, &col.c)?.x;
    let b_delta0 = crate::matcore::matmul(&col.b, &delta0)?;
    let alpha_prime = col.alpha + crate::matcore::matmul(&b_delta0, &c_prime)?.get(0, 0);
    let b_prime = col.b.add(&crate::matcore::matmul(&b_delta0, &d_prime)?)?;
    let recentered = Colligation::new(alpha_prime, b_prime, c_prime, d_prime, ell, col.shape)?;
    Ok((recentered, delta.centered()))
}

/// Expand a realization into homogeneous components `P_0 ... P_K` by exact
/// polynomial arithmetic on the Neumann series. When `delta(0) != 0` the
/// colligation is re-centered first. Errors when re-centering is spectrally
/// impossible or the term budget blows up.
pub fn symbolic_expand(f: &RealizedFunction, k_max: usize) -> Result<SeriesExpansion> {
    let (col, delta) = if f.delta().vanishes_at_zero() {
        (f.colligation().clone(), f.delta().clone())
    } else {
        recenter(f.colligation(), f.delta())?
    };
    let d = delta.nvars();
    let ell = col.aux_dim;
    let delta_dot = PMat::amplified_delta(&delta, ell);

    // Row 1 x (J ell): B * delta_dot. Matrix (J ell) x (J ell): D * delta_dot.
    let b_row = PMat::scalar_mul(&col.b, &delta_dot, k_max);
    let dd = PMat::scalar_mul(&col.d, &delta_dot, k_max.saturating_sub(1));

    // Column vector v_m = (D delta_dot)^m C, truncated at degree K-1.
    let mut v = PMat {
        rows: col.c.rows(),
        cols: 1,
        e: (0..col.c.rows())
            .map(|i| FreePoly::constant(d, col.c.get(i, 0)))
            .collect(),
    };
    let mut total = FreePoly::constant(d, col.alpha);
    let mut stage = 0usize;
    while !v.is_zero() {
        let term = b_row.mul(&v, k_max);
        total = total.add(term.at(0, 0));
        if total.num_terms() + v.term_count() > tol::TERM_BUDGET {
            return Err(Error::TermBudget {
                budget: tol::TERM_BUDGET,
                degree: stage,
            });
        }
        if stage >= k_max {
            break;
        }
        v = dd.mul(&v, k_max.saturating_sub(1));
        stage += 1;
    }

    let mut components = total.homogeneous_split();
    components.resize(k_max + 1, FreePoly::zero(d));
    components.truncate(k_max + 1);
    debug_assert!(components
        .iter()
        .enumerate()
        .all(|(k, p)| p.is_homogeneous(k)));
    Ok(SeriesExpansion {
        k_max,
        components,
        growth_sup: None,
        growth_radius: None,
    })
}

/// Default DFT node count for components up to degree `k_max`:
/// `4 (K+1)` rounded up to a power of two, which pushes aliasing well past
/// tolerance while keeping circle evaluations cheap.
pub fn default_nodes(k_max: usize) -> usize {
    (4 * (k_max + 1)).next_power_of_two()
}

/// Numeric homogeneous components at a point, by DFT over a circle.
#[derive(Debug, Clone)]
pub struct DftComponents {
    /// `A_k ~ P_k(x)` for k = 0..=K.
    pub components: Vec<CMatrix>,
    /// Radius actually used after auto-shrinking.
    pub radius: f64,
    /// Per-component aliasing bounds, when an outer growth certificate
    /// makes them certifiable.
    pub alias_bounds: Option<Vec<f64>>,
}

/// Extract `P_k(x)` for `k <= k_max` from N evaluations on the circle of
/// radius `r <= 1`: `A_k = r^{-k} (1/N) sum_j F(r w^j x) w^{-jk}`.
///
/// Every node must lie in the domain; the radius shrinks by 10% steps until
/// that holds (the `r^{-k}` rescaling keeps the components unbiased). With an
/// outer certificate `(M, r')`, the aliasing error of `A_k` is bounded by
/// `M (r/r')^N / ((1 - (r/r')^N) r'^k)`.
pub fn dft_components<E: Evaluator>(
    f: &E,
    x: &MatrixTuple,
    k_max: usize,
    nodes: usize,
    r: f64,
    outer: Option<GrowthCertificate>,
) -> Result<DftComponents> {
    if nodes <= k_max {
        return Err(Error::Usage(format!(
            "need more DFT nodes than components: N = {nodes} <= K = {k_max}"
        )));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Usage(format!("radius must be in (0, 1], got {r}")));
    }
    let delta = f.delta();
    let mut radius = r;
    let mut admissible = false;
    'search: for _ in 0..60 {
        for j in 0..nodes {
            let lambda =
                Complex::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / nodes as f64);
            let (member, _) = is_member(delta, &x.scale(lambda), 0.0)?;
            if !member {
                radius *= 0.9;
                continue 'search;
            }
        }
        admissible = true;
        break;
    }
    if !admissible {
        return Err(Error::NoAdmissibleRadius);
    }

    let values: Vec<CMatrix> = (0..nodes)
        .map(|j| {
            let lambda =
                Complex::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / nodes as f64);
            f.eval(&x.scale(lambda))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = x.dim();
    let mut components = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut acc = CMatrix::zeros(n, n);
        // fixed reduction order (node index) for bit-reproducible sums
        for (j, value) in values.iter().enumerate() {
            let w = Complex::from_polar(
                1.0,
                -2.0 * std::f64::consts::PI * (j * k % nodes) as f64 / nodes as f64,
            );
            acc = acc.add(&value.scale(w))?;
        }
        let rescale = Complex::new(1.0 / (nodes as f64 * radius.powi(k as i32)), 0.0);
        components.push(acc.scale(rescale));
    }

    let alias_bounds = outer.map(|cert| {
        let ratio = (radius / cert.radius).powi(nodes as i32);
        (0..=k_max)
            .map(|k| cert.sup * ratio / ((1.0 - ratio) * cert.radius.powi(k as i32)))
            .collect()
    });

    Ok(DftComponents {
        components,
        radius,
        alias_bounds,
    })
}

/// Supremum of `||F(lambda x)||` over `samples` points on the circle
/// `|lambda| = r`, verifying domain membership at every sampled node.
pub fn circle_supremum<E: Evaluator>(
    f: &E,
    x: &MatrixTuple,
    r: f64,
    samples: usize,
) -> Result<f64> {
    let delta = f.delta();
    let mut sup: f64 = 0.0;
    for j in 0..samples {
        let lambda = Complex::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / samples as f64);
        let scaled = x.scale(lambda);
        let (member, norm) = is_member(delta, &scaled, 0.0)?;
        if !member {
            return Err(Error::OutsideDomain { norm, bound: 1.0 });
        }
        sup = sup.max(opnorm(&f.eval(&scaled)?));
    }
    Ok(sup)
}

/// Growth certificate at radius `r > 1`: the sampled circle must stay inside
/// the domain (balanced scaling is verified on the samples, not assumed).
pub fn cauchy_certificate<E: Evaluator>(
    f: &E,
    x: &MatrixTuple,
    r: f64,
    samples: usize,
) -> Result<GrowthCertificate> {
    if r <= 1.0 {
        return Err(Error::Usage(format!(
            "certificate radius must exceed 1, got {r}"
        )));
    }
    let sup = circle_supremum(f, x, r, samples)?;
    Ok(GrowthCertificate { sup, radius: r })
}

/// Check `||A_k|| <= M / r^k + tol` for each DFT component.
pub fn check_component_bounds(
    cert: &GrowthCertificate,
    components: &[CMatrix],
    tol: f64,
) -> Vec<bool> {
    components
        .iter()
        .enumerate()
        .map(|(k, a)| opnorm(a) <= cert.component_bound(k) + tol)
        .collect()
}

/// A certified (or flagged) polynomial approximant on a finite point set.
#[derive(Debug, Clone)]
pub struct Approximation {
    pub poly: FreePoly,
    pub max_error: f64,
    pub degree: usize,
    /// True when every point carried a Cauchy certificate with r > 1; false
    /// for the measured fallback.
    pub certified: bool,
}

const CIRCLE_SAMPLES: usize = 16;
const DEGREE_CAP: usize = 200;

fn find_certified_radius(
    f: &RealizedFunction,
    x: &MatrixTuple,
    norm: f64,
) -> Option<GrowthCertificate> {
    // Large radii only certify near the origin; the circle membership check
    // rejects them fast elsewhere. The homogeneous guess 1/||delta(x)|| is
    // sharp for degree-one delta.
    let mut candidates: Vec<f64> = vec![
        1e9, 1e6, 1e3, 32.0, 8.0, 4.0, 2.0, 1.5, 1.25, 1.1, 1.05, 1.02, 1.01,
    ];
    if norm > 0.0 {
        let homogeneous_guess = 0.999 / norm;
        if homogeneous_guess > 1.0 {
            candidates.push(homogeneous_guess);
        }
    }
    candidates.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for r in candidates {
        if r <= 1.0 {
            continue;
        }
        if let Ok(cert) = cauchy_certificate(f, x, r, CIRCLE_SAMPLES) {
            return Some(cert);
        }
    }
    None
}

/// Truncate the series so `||F(x) - p(x)|| <= eps` on every supplied point.
///
/// Each point needs a scaling ray admitting a certified radius r > 1; the
/// truncation degree comes from the worst Cauchy tail. With
/// `allow_uncertified`, points without a certificate fall back to a measured
/// degree search and the result is flagged.
pub fn approximate_on_finite_set(
    f: &RealizedFunction,
    points: &[MatrixTuple],
    eps: f64,
    allow_uncertified: bool,
) -> Result<Approximation> {
    if points.is_empty() {
        return Err(Error::Usage("no points to approximate on".into()));
    }
    let mut k_needed = 0usize;
    let mut certified = true;
    for (idx, x) in points.iter().enumerate() {
        let (member, norm) = is_member(f.delta(), x, 0.0)?;
        if !member {
            return Err(Error::OutsideDomain { norm, bound: 1.0 });
        }
        match find_certified_radius(f, x, norm) {
            Some(cert) => {
                let mut k = 0usize;
                while cert.tail_bound(k) > eps && k < DEGREE_CAP {
                    k += 1;
                }
                k_needed = k_needed.max(k);
            }
            None if allow_uncertified => {
                certified = false;
            }
            None => return Err(Error::NoCertifiedRadius { point: idx }),
        }
    }

    let mut k = k_needed;
    loop {
        let expansion = symbolic_expand(f, k)?;
        let poly = expansion.partial_sum(k);
        let mut max_error: f64 = 0.0;
        for x in points {
            let approx = poly.eval(x)?;
            let exact = f.eval_exact(x)?;
            max_error = max_error.max(opnorm(&exact.sub(&approx)?));
        }
        if max_error <= eps || certified || k >= DEGREE_CAP {
            return Ok(Approximation {
                poly,
                max_error,
                degree: k,
                certified,
            });
        }
        k += 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::sample_point;
    use crate::freepoly::Word;
    use crate::realization::PolyEvaluator;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Scalar {
        Complex::new(re, im)
    }

    fn scalar_mat(v: f64) -> CMatrix {
        CMatrix::from_fn(1, 1, |_, _| c(v, 0.0))
    }

    fn identity_realization() -> RealizedFunction {
        let col = Colligation::new(
            Scalar::ZERO,
            scalar_mat(1.0),
            scalar_mat(1.0),
            scalar_mat(0.0),
            1,
            (1, 1),
        )
        .unwrap();
        RealizedFunction::new(col, PolyMatrix::ball_max(1)).unwrap()
    }

    fn scalar_toy() -> RealizedFunction {
        let s = 1.0 / 2.0f64.sqrt();
        let col = Colligation::new(
            c(s, 0.0),
            scalar_mat(s),
            scalar_mat(s),
            scalar_mat(-s),
            1,
            (1, 1),
        )
        .unwrap();
        RealizedFunction::new(col, PolyMatrix::ball_max(1)).unwrap()
    }

    #[test]
    fn identity_expansion_is_x() {
        let f = identity_realization();
        let exp = symbolic_expand(&f, 5).unwrap();
        assert_eq!(exp.components().len(), 6);
        assert!(exp.component(0).is_zero());
        assert_eq!(*exp.component(1), FreePoly::var(1, 1));
        for k in 2..=5 {
            assert!(exp.component(k).is_zero(), "k = {k}");
        }
    }

    #[test]
    fn scalar_toy_coefficients_match_geometric_oracle() {
        // c_0 = 1/sqrt2, c_m = (1/2)(-1/sqrt2)^{m-1} for m >= 1.
        let f = scalar_toy();
        let exp = symbolic_expand(&f, 8).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert_relative_eq!(exp.component(0).constant_term().re, s, max_relative = 1e-14);
        for m in 1..=8usize {
            let word = Word(vec![1; m]);
            let got = exp.component(m).coeff(&word);
            let oracle = 0.5 * (-s).powi(m as i32 - 1);
            assert_relative_eq!(got.re, oracle, max_relative = 1e-13);
            assert!(got.im.abs() < 1e-15);
        }
    }

    #[test]
    fn partial_sums_approach_exact_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let delta = PolyMatrix::ball_max(2);
        let col = Colligation::random(2, 2, 2, &mut rng).unwrap();
        let f = RealizedFunction::new(col, delta).unwrap();
        let x = sample_point(f.delta(), 3, &mut rng, 0.4).unwrap();
        let exact = f.eval_exact(x.point()).unwrap();
        let exp = symbolic_expand(&f, 12).unwrap();
        let mut last = f64::INFINITY;
        for k in [4usize, 8, 12] {
            let p = exp.partial_sum(k);
            let err = opnorm(&exact.sub(&p.eval(x.point()).unwrap()).unwrap());
            assert!(err <= last + 1e-12);
            last = err;
        }
        // ||delta(x)|| = 0.4 and the colligation is a contraction, so the
        // truncation error is at most the geometric tail 0.4^{K+1}/(1-0.4).
        let tail = 0.4f64.powi(13) / 0.6;
        assert!(last <= tail * 10.0, "err {last} vs tail scale {tail}");
    }

    #[test]
    fn recentred_expansion_matches_evaluation() {
        // delta = 0.5 + 0.5 x1 does not vanish at 0.
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        let entry = FreePoly::constant(1, c(0.5, 0.0)).add(&FreePoly::var(1, 1).scale(c(0.5, 0.0)));
        let delta = PolyMatrix::new(1, 1, 1, vec![entry]).unwrap();
        assert!(!delta.vanishes_at_zero());
        let col = Colligation::random(1, 1, 2, &mut rng).unwrap();
        let f = RealizedFunction::new(col, delta).unwrap();

        let exp = symbolic_expand(&f, 14).unwrap();
        // components are homogeneous in the *centered* variable = original x1
        for (k, p) in exp.components().iter().enumerate() {
            assert!(p.is_homogeneous(k));
        }
        let x = MatrixTuple::new(vec![scalar_mat(0.3)]).unwrap();
        let exact = f.eval_exact(&x).unwrap();
        let approx = exp.partial_sum(14).eval(&x).unwrap();
        let err = (exact.get(0, 0) - approx.get(0, 0)).norm();
        assert!(err < 1e-9, "err {err}");
    }

    #[test]
    fn recenter_rejects_spectral_failure() {
        // D large and delta(0) large: ||D delta0|| >= 1.
        let col = Colligation::new(
            Scalar::ZERO,
            scalar_mat(1.0),
            scalar_mat(1.0),
            scalar_mat(2.0),
            1,
            (1, 1),
        )
        .unwrap();
        let entry = FreePoly::constant(1, c(0.9, 0.0)).add(&FreePoly::var(1, 1).scale(c(0.1, 0.0)));
        let delta = PolyMatrix::new(1, 1, 1, vec![entry]).unwrap();
        let f = RealizedFunction::new(col, delta).unwrap();
        assert!(matches!(
            symbolic_expand(&f, 4),
            Err(Error::Recenter { .. })
        ));
    }

    #[test]
    fn dft_exact_on_degree_three_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let x1 = FreePoly::var(2, 1);
        let x2 = FreePoly::var(2, 2);
        // 0.3 + x1 x2 - 0.5 x2 + 0.25 x1 x2 x1
        let p = FreePoly::constant(2, c(0.3, 0.0))
            .add(&x1.mul(&x2))
            .sub(&x2.scale(c(0.5, 0.0)))
            .add(&x1.mul(&x2).mul(&x1).scale(c(0.25, 0.0)));
        let f = PolyEvaluator::new(p.clone(), PolyMatrix::ball_max(2)).unwrap();
        let x = sample_point(f.delta(), 3, &mut rng, 0.6).unwrap();
        let out = dft_components(&f, x.point(), 3, 8, 1.0, None).unwrap();
        assert_eq!(out.radius, 1.0);
        let split = p.homogeneous_split();
        for (k, (comp, part)) in out.components.iter().zip(&split).enumerate() {
            let oracle = part.eval(x.point()).unwrap();
            let err = opnorm(&comp.sub(&oracle).unwrap());
            assert!(err <= 1e-12, "k={k}: {err}");
        }
    }

    #[test]
    fn dft_zero_component_is_value_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(84);
        let delta = PolyMatrix::ball_max(2);
        let col = Colligation::random(2, 2, 2, &mut rng).unwrap();
        let alpha = col.alpha;
        let f = RealizedFunction::new(col, delta).unwrap();
        let x = sample_point(f.delta(), 2, &mut rng, 0.5).unwrap();
        let out = dft_components(&f, x.point(), 4, 32, 0.9, None).unwrap();
        let expected = CMatrix::identity(2).scale(alpha);
        assert!(opnorm(&out.components[0].sub(&expected).unwrap()) <= 1e-10);
    }

    #[test]
    fn dft_constant_function_has_no_higher_components() {
        let p = FreePoly::constant(2, c(0.4, 0.1));
        let f = PolyEvaluator::new(p, PolyMatrix::ball_max(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(85);
        let x = sample_point(f.delta(), 2, &mut rng, 0.7).unwrap();
        let out = dft_components(&f, x.point(), 5, 16, 1.0, None).unwrap();
        for k in 1..=5 {
            assert!(opnorm(&out.components[k]) <= 1e-13, "k={k}");
        }
        // the growth bounds hold trivially for k >= 1
        let cert = cauchy_certificate(&f, x.point(), 1.2, 8).unwrap();
        let checks = check_component_bounds(&cert, &out.components, 1e-10);
        assert!(checks.iter().all(|&ok| ok));
    }

    #[test]
    fn dft_matches_symbolic_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(86);
        let delta = PolyMatrix::ball_max(2);
        let col = Colligation::random(2, 2, 3, &mut rng).unwrap();
        let f = RealizedFunction::new(col, delta).unwrap();
        let exp = symbolic_expand(&f, 8).unwrap();
        for n in [2usize, 4, 6] {
            let x = sample_point(f.delta(), n, &mut rng, 0.6).unwrap();
            let out = dft_components(&f, x.point(), 8, 64, 1.0, None).unwrap();
            for k in 0..=8 {
                let sym = exp.component(k).eval(x.point()).unwrap();
                let err = opnorm(&out.components[k].sub(&sym).unwrap());
                let scale = 1.0 + opnorm(&out.components[k]);
                assert!(err <= 1e-9 * scale, "n={n} k={k}: {err}");
            }
        }
    }

    #[test]
    fn dft_homogeneity_across_scaled_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(87);
        let delta = PolyMatrix::ball_max(2);
        let col = Colligation::random(2, 2, 2, &mut rng).unwrap();
        let f = RealizedFunction::new(col, delta).unwrap();
        let x = sample_point(f.delta(), 3, &mut rng, 0.3).unwrap();
        let x2 = x.point().scale(c(2.0, 0.0));
        let a = dft_components(&f, x.point(), 6, 64, 1.0, None).unwrap();
        let b = dft_components(&f, &x2, 6, 64, 1.0, None).unwrap();
        for k in 0..=6 {
            let scaled = a.components[k].scale(c(2.0f64.powi(k as i32), 0.0));
            let err = opnorm(&b.components[k].sub(&scaled).unwrap());
            let scale = opnorm(&scaled).max(1e-12);
            assert!(err / scale <= 1e-8, "k={k}: rel {err}", err = err / scale);
        }
    }

    #[test]
    fn dft_radius_autoshrinks() {
        let f = identity_realization();
        let x = MatrixTuple::new(vec![scalar_mat(0.95)]).unwrap();
        // r = 1 circle has ||delta|| = 0.95 < 1, fine; force shrink with a
        // point that leaves the domain when scaled by 1:
        let y = MatrixTuple::new(vec![scalar_mat(0.95)]).unwrap();
        let out = dft_components(&f, &y, 2, 8, 1.0, None).unwrap();
        assert!(out.radius <= 1.0);
        let err = (out.components[1].get(0, 0).re - 0.95).abs();
        assert!(err < 1e-10);
        let _ = x;
    }

    #[test]
    fn cauchy_certificate_equality_case() {
        // F(x) = x at |x| = 0.9 with r = 1/0.9: M = 1, bound M/r = 0.9.
        let f = identity_realization();
        let x = MatrixTuple::new(vec![scalar_mat(0.9)]).unwrap();
        let r = 1.0 / 0.9 * (1.0 - 1e-12);
        let cert = cauchy_certificate(&f, &x, r, 32).unwrap();
        assert_relative_eq!(cert.sup, 1.0, max_relative = 1e-9);
        let p1 = scalar_mat(0.9);
        assert!(opnorm(&p1) <= cert.component_bound(1) + 1e-8);

        // circle exits the domain for r too large
        assert!(cauchy_certificate(&f, &x, 1.2, 8).is_err());
    }

    #[test]
    fn cauchy_bounds_hold_for_random_realizations() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let delta = PolyMatrix::ball_max(2);
        let col = Colligation::random(2, 2, 2, &mut rng).unwrap();
        let f = RealizedFunction::new(col, delta).unwrap();
        let x = sample_point(f.delta(), 3, &mut rng, 0.5).unwrap();
        let cert = cauchy_certificate(&f, x.point(), 1.8, 32).unwrap();
        let out = dft_components(&f, x.point(), 12, 64, 1.0, Some(cert)).unwrap();
        let checks = check_component_bounds(&cert, &out.components, 1e-8);
        assert!(checks.iter().all(|&ok| ok), "{checks:?}");
        let bounds = out.alias_bounds.unwrap();
        assert!(bounds.iter().all(|b| b.is_finite() && *b >= 0.0));
        assert!(bounds[0] < 1e-9);
    }

    #[test]
    fn approximate_on_sampled_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let delta = PolyMatrix::ball_max(2);
        let col = Colligation::random(2, 2, 2, &mut rng).unwrap();
        let f = RealizedFunction::new(col, delta).unwrap();
        let points: Vec<MatrixTuple> = (0..5)
            .map(|_| {
                sample_point(f.delta(), 2, &mut rng, 0.45)
                    .unwrap()
                    .into_point()
            })
            .collect();
        let approx = approximate_on_finite_set(&f, &points, 1e-6, false).unwrap();
        assert!(approx.certified);
        assert!(approx.max_error <= 1e-6, "max_error {}", approx.max_error);
    }

    #[test]
    fn approximate_polynomial_terminates_exactly() {
        // D = 0 makes F a polynomial of degree <= max entry degree + ... = 1 here.
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        let q = Colligation::random(2, 2, 1, &mut rng).unwrap();
        let col = Colligation::new(
            q.alpha,
            q.b.clone(),
            q.c.clone(),
            CMatrix::zeros(2, 2),
            1,
            (2, 2),
        )
        .unwrap();
        let f = RealizedFunction::new(col, PolyMatrix::ball_max(2)).unwrap();
        let points: Vec<MatrixTuple> = (0..3)
            .map(|_| {
                sample_point(f.delta(), 2, &mut rng, 0.5)
                    .unwrap()
                    .into_point()
            })
            .collect();
        let approx = approximate_on_finite_set(&f, &points, 1e-6, false).unwrap();
        assert!(approx.max_error <= 1e-12, "max_error {}", approx.max_error);
    }

    #[test]
    fn approximate_at_origin_is_constant_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let delta = PolyMatrix::ball_max(2);
        let col = Colligation::random(2, 2, 2, &mut rng).unwrap();
        let alpha = col.alpha;
        let f = RealizedFunction::new(col, delta).unwrap();
        let origin = MatrixTuple::zeros(2, 3);
        let approx = approximate_on_finite_set(&f, &[origin], 1e-9, false).unwrap();
        assert_eq!(approx.degree, 0);
        assert_eq!(approx.poly.constant_term(), alpha);
    }

    #[test]
    fn expanded_components_intertwine_under_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        let col = Colligation::random(2, 2, 2, &mut rng).unwrap();
        let f = RealizedFunction::new(col, PolyMatrix::ball_max(2)).unwrap();
        let exp = symbolic_expand(&f, 4).unwrap();
        let x = crate::domain::gaussian_tuple(&mut rng, 2, 3);
        let s = crate::domain::sample_similarity(3, 10.0, &mut rng);
        let y = crate::matcore::conjugate_tuple(&s, &x).unwrap();
        for (k, p) in exp.components().iter().enumerate() {
            let lhs = crate::matcore::matmul(&s, &p.eval(&x).unwrap()).unwrap();
            let rhs = crate::matcore::matmul(&p.eval(&y).unwrap(), &s).unwrap();
            let scale = opnorm(&s) * (1.0 + opnorm(&p.eval(&x).unwrap()));
            let err = opnorm(&lhs.sub(&rhs).unwrap()) / scale;
            assert!(err <= 1e-9, "component {k}: {err:.3e}");
        }
    }

    #[test]
    fn series_json_round_trip() {
        let f = scalar_toy();
        let exp = symbolic_expand(&f, 4)
            .unwrap()
            .with_growth_cert(GrowthCertificate {
                sup: 1.0,
                radius: 1.3,
            });
        let text = serde_json::to_string(&exp).unwrap();
        assert!(text.contains("\"K\":4"));
        let back: SeriesExpansion = serde_json::from_str(&text).unwrap();
        assert_eq!(back.k_max(), 4);
        assert_eq!(back.components()[1], *exp.component(1));
        assert_eq!(
            back.growth_cert(),
            Some(GrowthCertificate {
                sup: 1.0,
                radius: 1.3
            })
        );
    }
}
