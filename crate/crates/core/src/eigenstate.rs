//! State parameters and the product formula for `phi`.
//!
//! Given a symmetric positive semidefinite matrix `B` with unit diagonal and
//! positive coefficients `c` with `Bc.c > 0`, put `lambda = sqrt(Bc.c)` and
//! `a = Bc / lambda`. The associated positive definite function on the free
//! group is
//!
//! ```text
//! phi(s) = prod_i a_i^(|s|_i - sum_j gamma_ij(s)) * prod_{i>j} b_ij^gamma_ij(s)
//! ```
//!
//! with `0^0 = 1`, where `|s|_i` counts occurrences of `u_i^(+-1)` and
//! `gamma_ij(s)` counts adjacent `u_i^-1 u_j` or `u_j^-1 u_i` pairs.
//!
//! The canonical member of the family with prescribed `(c, lambda)` comes
//! from inverting the orthant map: `x = S^-1(c_i^2 / lambda^2)` yields
//!
//! ```text
//! a_i = sqrt(x_i / (t (1+y_i))),   b_ij = -sqrt(x_i x_j / ((1+y_i)(1+y_j))) = -t a_i a_j ,
//! ```
//!
//! and then `phi(s) = (-t)^gamma(s) prod_j a_j^(|s|_j)`, an independent
//! evaluation route kept separate so the two can be compared.
//!
//! Positivity is certified through the Gram matrices `A_k` over positive
//! words of length `k`, which obey the block recursion
//! `A_(k+1) = I (x) A_k + (B - I) (x) X_k` with `X_k` the rank-one matrix of
//! `phi` values and `X_(k+1) = X_1 (x) X_k`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::smap::{self, OrthantPoint, TargetPoint};
use crate::words::{enumerate_positive, enumerate_words, Letter, ReducedWord, Sign};

/// Largest allowed Gram dimension `n^k`.
pub const DEFAULT_GRAM_CAP: usize = 4096;

/// Eigenvalues above `-DEFAULT_PSD_TOL` count as nonnegative.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;

/// Maximum tolerated `|m_ij - m_ji|` before a matrix is rejected as
/// asymmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Positive coefficients together with a prospective eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    c: Vec<f64>,
    lambda: f64,
}

impl CoefficientVector {
    pub fn new(c: Vec<f64>, lambda: f64) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::ZeroRank);
        }
        if !c.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::NotPositive);
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::NotPositive);
        }
        Ok(CoefficientVector { c, lambda })
    }

    pub fn rank(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Open interval of admissible eigenvalues,
    /// `(sqrt(max(0, 2 max c_i^2 - sum c_i^2)), sqrt(sum c_i^2))`.
    pub fn admissible_interval(&self) -> (f64, f64) {
        let sum: f64 = self.c.iter().map(|v| v * v).sum();
        let max: f64 = self.c.iter().map(|v| v * v).fold(0.0, f64::max);
        ((2.0 * max - sum).max(0.0).sqrt(), sum.sqrt())
    }

    /// Strict membership of `lambda` in the admissible interval; equivalent
    /// to `(c_i^2 / lambda^2)_i` lying in the range of `S`.
    pub fn is_interior(&self) -> bool {
        let (lo, hi) = self.admissible_interval();
        lo < self.lambda && self.lambda < hi
    }

    /// The inversion target `(c_i^2 / lambda^2)_i`.
    pub fn target(&self) -> TargetPoint {
        let s = self.c.iter().map(|ci| ci * ci / (self.lambda * self.lambda)).collect();
        TargetPoint::new(s).expect("coefficients validated positive")
    }

    fn ensure_interior(&self) -> Result<()> {
        if self.is_interior() {
            Ok(())
        } else {
            let (lo, hi) = self.admissible_interval();
            Err(Error::NotInterior { lambda: self.lambda, lo, hi })
        }
    }
}

/// An annulus `{ inner_radius <= |z| <= outer_radius }` in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSpectrum {
    pub inner_radius: f64,
    pub outer_radius: f64,
}

/// Spectrum of `sum c_i u_i` in the regular representation: the annulus with
/// radii `sqrt(max(0, 2 max |c_i|^2 - sum |c_i|^2))` and `sqrt(sum |c_i|^2)`.
/// Only the moduli of the entries matter.
pub fn reduced_spectrum(c: &[f64]) -> Result<AnnulusSpectrum> {
    if c.is_empty() {
        return Err(Error::ZeroRank);
    }
    if !c.iter().all(|v| v.is_finite()) || c.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroCoefficients);
    }
    let sum: f64 = c.iter().map(|v| v * v).sum();
    let max: f64 = c.iter().map(|v| v * v).fold(0.0, f64::max);
    Ok(AnnulusSpectrum {
        inner_radius: (2.0 * max - sum).max(0.0).sqrt(),
        outer_radius: sum.sqrt(),
    })
}

/// Spectrum of `sum c_i u_i` (positive coefficients) in the full group
/// C*-algebra: the annulus with radii `max(0, 2 max c_i - sum c_i)` and
/// `sum c_i`.
pub fn universal_spectrum(c: &[f64]) -> Result<AnnulusSpectrum> {
    if c.is_empty() {
        return Err(Error::ZeroRank);
    }
    if !c.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::NotPositive);
    }
    let sum: f64 = c.iter().sum();
    let max: f64 = c.iter().copied().fold(0.0, f64::max);
    Ok(AnnulusSpectrum {
        inner_radius: (2.0 * max - sum).max(0.0),
        outer_radius: sum,
    })
}

/// A state given by its `phi` evaluation together with the data entering the
/// eigenvalue relation `sum_i c_i phi(s u_i) = lambda phi(s)`.
pub trait State {
    fn rank(&self) -> usize;

    fn coefficients(&self) -> &[f64];

    fn lambda(&self) -> f64;

    /// Evaluates `phi`. Panics when the word rank disagrees with the state
    /// rank; [`phi_eval`] is the checked front end.
    fn phi(&self, w: &ReducedWord) -> f64;

    /// `phi(u_i)`, with a 1-based generator index.
    fn a_value(&self, i: usize) -> f64;

    /// `phi(u_j^-1 u_i)` for `i != j`, with 1-based generator indices.
    fn b_value(&self, i: usize, j: usize) -> f64;
}

/// Checked `phi` evaluation.
pub fn phi_eval<S: State>(state: &S, w: &ReducedWord) -> Result<f64> {
    if state.rank() != w.rank() {
        return Err(Error::RankMismatch { left: state.rank(), right: w.rank() });
    }
    Ok(state.phi(w))
}

/// State parameters for an arbitrary admissible pair `(B, c)`.
#[derive(Debug, Clone)]
pub struct GeneralStateParams {
    b: DMatrix<f64>,
    c: Vec<f64>,
    lambda: f64,
    a: Vec<f64>,
}

/// Validates `(B, c)` and derives `lambda = sqrt(Bc.c)`, `a = Bc / lambda`.
///
/// `B` must be symmetric with unit diagonal and positive semidefinite up to
/// [`DEFAULT_PSD_TOL`]; `c` must be positive and `Bc.c > 0`.
pub fn general_params(b: DMatrix<f64>, c: Vec<f64>) -> Result<GeneralStateParams> {
    let n = c.len();
    if n == 0 {
        return Err(Error::ZeroRank);
    }
    if b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.nrows().max(b.ncols()) });
    }
    if !c.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::NotPositive);
    }
    let mut asym: f64 = 0.0;
    let mut diag_dev: f64 = 0.0;
    for i in 0..n {
        diag_dev = diag_dev.max((b[(i, i)] - 1.0).abs());
        for j in (i + 1)..n {
            asym = asym.max((b[(i, j)] - b[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    if diag_dev > SYMMETRY_TOL {
        return Err(Error::NotUnitDiagonal { deviation: diag_dev });
    }
    let min_eig = b
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -DEFAULT_PSD_TOL {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min_eig });
    }
    let bc: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| b[(i, j)] * c[j]).sum())
        .collect();
    let form: f64 = bc.iter().zip(&c).map(|(x, y)| x * y).sum();
    if !(form > 0.0) {
        return Err(Error::NonPositiveForm { value: form });
    }
    let lambda = form.sqrt();
    let a = bc.iter().map(|v| v / lambda).collect();
    Ok(GeneralStateParams { b, c, lambda, a })
}

impl GeneralStateParams {
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }
}

impl State for GeneralStateParams {
    fn rank(&self) -> usize {
        self.c.len()
    }

    fn coefficients(&self) -> &[f64] {
        &self.c
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn phi(&self, w: &ReducedWord) -> f64 {
        assert_eq!(self.rank(), w.rank(), "rank mismatch in phi");
        let n = self.rank();
        let mut counts = vec![0i32; n];
        for l in w.letters() {
            counts[l.index - 1] += 1;
        }
        let mut gamma = vec![0i32; n * n];
        for p in w.letters().windows(2) {
            if p[0].sign == Sign::Negative && p[1].sign == Sign::Positive {
                let (lo, hi) = if p[0].index < p[1].index {
                    (p[0].index - 1, p[1].index - 1)
                } else {
                    (p[1].index - 1, p[0].index - 1)
                };
                gamma[lo * n + hi] += 1;
            }
        }
        let mut value = 1.0;
        for i in 0..n {
            let mut gsum = 0;
            for j in 0..n {
                if j != i {
                    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                    gsum += gamma[lo * n + hi];
                }
            }
            value *= self.a[i].powi(counts[i] - gsum);
        }
        for lo in 0..n {
            for hi in (lo + 1)..n {
                let g = gamma[lo * n + hi];
                if g > 0 {
                    value *= self.b[(lo, hi)].powi(g);
                }
            }
        }
        value
    }

    fn a_value(&self, i: usize) -> f64 {
        self.a[i - 1]
    }

    fn b_value(&self, i: usize, j: usize) -> f64 {
        self.b[(i - 1, j - 1)]
    }
}

/// The canonical state with prescribed `(c, lambda)`, parameterized by the
/// preimage `x = S^-1(c_i^2 / lambda^2)`.
#[derive(Debug, Clone)]
pub struct CanonicalParams {
    cv: CoefficientVector,
    x: OrthantPoint,
    a: Vec<f64>,
    general: GeneralStateParams,
}

/// Builds the canonical state; `tol` bounds the accepted inversion residual
/// (use [`smap::DEFAULT_MAP_RESIDUAL`] unless there is a reason not to).
pub fn canonical_params(cv: &CoefficientVector, tol: f64) -> Result<CanonicalParams> {
    cv.ensure_interior()?;
    let x = smap::invert_s(&cv.target(), tol)?;
    canonical_params_from_preimage(cv.clone(), x)
}

fn canonical_params_from_preimage(cv: CoefficientVector, x: OrthantPoint) -> Result<CanonicalParams> {
    let n = x.dim();
    let t = x.t();
    let a: Vec<f64> = (0..n)
        .map(|i| (x.x()[i] / (t * (1.0 + x.y()[i]))).sqrt())
        .collect();
    let b = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            -(x.x()[i] * x.x()[j] / ((1.0 + x.y()[i]) * (1.0 + x.y()[j]))).sqrt()
        }
    });
    let general = general_params(b, cv.c().to_vec())?;
    Ok(CanonicalParams { cv, x, a, general })
}

impl CanonicalParams {
    pub fn x(&self) -> &OrthantPoint {
        &self.x
    }

    /// The same state through the general `(B, c)` route; its `phi` is an
    /// independent evaluation path.
    pub fn as_general(&self) -> &GeneralStateParams {
        &self.general
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }
}

impl State for CanonicalParams {
    fn rank(&self) -> usize {
        self.cv.rank()
    }

    fn coefficients(&self) -> &[f64] {
        self.cv.c()
    }

    fn lambda(&self) -> f64 {
        self.cv.lambda()
    }

    /// Canonical form `(-t)^gamma(s) prod_j a_j^(|s|_j)`.
    fn phi(&self, w: &ReducedWord) -> f64 {
        assert_eq!(self.rank(), w.rank(), "rank mismatch in phi");
        let mut value = (-self.x.t()).powi(w.gamma_total() as i32);
        for i in 1..=self.rank() {
            let k = w.letter_count(i);
            if k > 0 {
                value *= self.a[i - 1].powi(k as i32);
            }
        }
        value
    }

    fn a_value(&self, i: usize) -> f64 {
        self.a[i - 1]
    }

    fn b_value(&self, i: usize, j: usize) -> f64 {
        -self.x.t() * self.a[i - 1] * self.a[j - 1]
    }
}

/// The boundary state of the admissible interval, `lambda = |c|_2`:
/// `phi(s) = prod_i (c_i / lambda)^(|s|_i)` when `gamma(s) = 0` and `0`
/// otherwise. Zero coefficients are allowed.
#[derive(Debug, Clone)]
pub struct OuterBoundaryState {
    c: Vec<f64>,
    lambda: f64,
}

pub fn outer_boundary_state(c: Vec<f64>) -> Result<OuterBoundaryState> {
    if c.is_empty() {
        return Err(Error::ZeroRank);
    }
    if !c.iter().all(|v| v.is_finite() && *v >= 0.0) || c.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroCoefficients);
    }
    let lambda = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(OuterBoundaryState { c, lambda })
}

impl State for OuterBoundaryState {
    fn rank(&self) -> usize {
        self.c.len()
    }

    fn coefficients(&self) -> &[f64] {
        &self.c
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn phi(&self, w: &ReducedWord) -> f64 {
        assert_eq!(self.rank(), w.rank(), "rank mismatch in phi");
        if w.gamma_total() > 0 {
            return 0.0;
        }
        let mut value = 1.0;
        for i in 1..=self.rank() {
            let k = w.letter_count(i);
            if k > 0 {
                value *= (self.c[i - 1] / self.lambda).powi(k as i32);
            }
        }
        value
    }

    fn a_value(&self, i: usize) -> f64 {
        self.c[i - 1] / self.lambda
    }

    fn b_value(&self, _i: usize, _j: usize) -> f64 {
        0.0
    }
}

/// Checked evaluation of the outer boundary state.
pub fn phi_outer_boundary(c: &[f64], w: &ReducedWord) -> Result<f64> {
    let state = outer_boundary_state(c.to_vec())?;
    phi_eval(&state, w)
}

/// Gram matrix over positive words of length `k`, entry `(s, t)` equal to
/// `phi(s^-1 t)`, rows and columns in lexicographic word order. The lower
/// triangle is mirrored from the upper one so the result is exactly
/// symmetric.
pub fn gram_direct<S: State>(state: &S, k: usize) -> Result<DMatrix<f64>> {
    let size = gram_size(state.rank(), k)?;
    let words = enumerate_positive(state.rank(), k)?;
    let mut m = DMatrix::zeros(size, size);
    for i in 0..size {
        let si = words[i].inverse();
        for j in i..size {
            let v = state.phi(&si.concat(&words[j]).expect("equal ranks"));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Gram matrix by the block recursion
/// `A_(k+1) = I (x) A_k + (B - I) (x) X_k`, `X_(k+1) = X_1 (x) X_k`,
/// starting from `A_1 = B` and the rank-one `X_1 = a a^T`. Block index =
/// first letter, matching the order of [`enumerate_positive`].
pub fn gram_recursive(params: &GeneralStateParams, k: usize) -> Result<DMatrix<f64>> {
    let n = params.rank();
    gram_size(n, k)?;
    if k == 0 {
        return Ok(DMatrix::from_element(1, 1, 1.0));
    }
    let x1 = DMatrix::from_fn(n, n, |i, j| params.a[i] * params.a[j]);
    let eye = DMatrix::<f64>::identity(n, n);
    let b_minus_eye = params.b.clone() - &eye;
    let mut a = params.b.clone();
    let mut x = x1.clone();
    for _ in 1..k {
        a = eye.kronecker(&a) + b_minus_eye.kronecker(&x);
        x = x1.kronecker(&x);
    }
    Ok(a)
}

fn gram_size(rank: usize, k: usize) -> Result<usize> {
    if rank == 0 {
        return Err(Error::ZeroRank);
    }
    let size = rank
        .checked_pow(k as u32)
        .ok_or(Error::GramTooLarge { size: usize::MAX, cap: DEFAULT_GRAM_CAP })?;
    if size > DEFAULT_GRAM_CAP {
        return Err(Error::GramTooLarge { size, cap: DEFAULT_GRAM_CAP });
    }
    Ok(size)
}

/// `B - X_1 = B - a a^T`, the positive matrix driving the Gram induction.
pub fn b_minus_x1(params: &GeneralStateParams) -> DMatrix<f64> {
    let n = params.rank();
    DMatrix::from_fn(n, n, |i, j| params.b[(i, j)] - params.a[i] * params.a[j])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub pass: bool,
}

/// Minimum eigenvalue of a symmetric matrix; `pass` when it is at least
/// `-tol`. Asymmetric input is rejected rather than silently symmetrized.
pub fn psd_report(m: &DMatrix<f64>, tol: f64) -> Result<PsdReport> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let mut asym: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let min_eigenvalue = m
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(PsdReport { min_eigenvalue, pass: min_eigenvalue >= -tol })
}

/// Worst violation of `sum_i c_i phi(s u_i) = lambda phi(s)` over all
/// reduced words of length at most `max_len`.
pub fn eigenstate_residual<S: State>(state: &S, max_len: usize) -> Result<f64> {
    let n = state.rank();
    let c = state.coefficients();
    let lambda = state.lambda();
    let mut worst: f64 = 0.0;
    for w in enumerate_words(n, max_len)? {
        let mut acc = 0.0;
        for i in 1..=n {
            acc += c[i - 1] * state.phi(&w.push(Letter::positive(i))?);
        }
        worst = worst.max((acc - lambda * state.phi(&w)).abs());
    }
    Ok(worst)
}

/// Worst violation of the local multiplication rules over words of length at
/// most `max_len`:
///
/// * `phi(1) = 1`;
/// * `phi(s) = phi(s^-1)`;
/// * `phi(u_i s) = a_i phi(s)` when `s` does not begin with `u_i^-1`;
/// * `phi(s u_i) = a_i phi(s)` when `s` does not end with an inverse letter;
/// * `phi(s u_j^-1 u_i) = b_ij phi(s)` when `i != j` and `s` does not end
///   with `u_j`.
pub fn local_rules_residual<S: State>(state: &S, max_len: usize) -> Result<f64> {
    let n = state.rank();
    let identity = ReducedWord::identity(n)?;
    let mut worst = (state.phi(&identity) - 1.0).abs();
    for s in enumerate_words(n, max_len)? {
        let phi_s = state.phi(&s);
        worst = worst.max((phi_s - state.phi(&s.inverse())).abs());
        let ends_negative = s.last().is_some_and(|l| l.sign == Sign::Negative);
        for i in 1..=n {
            let ai = state.a_value(i);
            if s.first() != Some(Letter::negative(i)) {
                let left = ReducedWord::from_letters(n, [Letter::positive(i)])?.concat(&s)?;
                worst = worst.max((state.phi(&left) - ai * phi_s).abs());
            }
            if !ends_negative {
                worst = worst.max((state.phi(&s.push(Letter::positive(i))?) - ai * phi_s).abs());
            }
            for j in 1..=n {
                if i != j && s.last() != Some(Letter::positive(j)) {
                    let w = s.push(Letter::negative(j))?.push(Letter::positive(i))?;
                    worst = worst.max((state.phi(&w) - state.b_value(i, j) * phi_s).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Worst violation of the length-`k` isometry identity
/// `lambda^-2 sum_{i,j} c_i c_j phi(u_j^-1 t^-1 s u_i) = phi(t^-1 s)`
/// over `s, t` positive words of length `k`.
pub fn isometry_residual<S: State>(state: &S, k: usize) -> Result<f64> {
    let n = state.rank();
    gram_size(n, k)?;
    let c = state.coefficients();
    let lambda2 = state.lambda() * state.lambda();
    let words = enumerate_positive(n, k)?;
    let mut worst: f64 = 0.0;
    for s in &words {
        for t in &words {
            let w = t.inverse().concat(s)?;
            let mut acc = 0.0;
            for i in 1..=n {
                let wi = w.push(Letter::positive(i))?;
                for j in 1..=n {
                    let full = ReducedWord::from_letters(n, [Letter::negative(j)])?.concat(&wi)?;
                    acc += c[i - 1] * c[j - 1] * state.phi(&full);
                }
            }
            worst = worst.max((acc / lambda2 - state.phi(&w)).abs());
        }
    }
    Ok(worst)
}

/// Worst disagreement between the canonical evaluation
/// `(-t)^gamma prod a_j^|s|_j` and the general product formula applied to
/// the same parameters, over words of length at most `max_len`.
pub fn canonical_general_agreement(params: &CanonicalParams, max_len: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for w in enumerate_words(params.rank(), max_len)? {
        worst = worst.max((params.phi(&w) - params.as_general().phi(&w)).abs());
    }
    Ok(worst)
}
