//! The Markov measure on the boundary of the free group and the cocycle
//! that reconstructs `phi` from it.
//!
//! Boundary points are infinite reduced words; the cylinder `Omega(w)` is
//! the set of points beginning with the finite reduced word `w`. The
//! canonical state with preimage `x` (and `t = sum x_i`, `y_i = t - x_i`)
//! induces the Markov measure
//!
//! ```text
//! mu(Omega(v_1 .. v_k)) = beta(v_1) alpha(v_1, v_2) .. alpha(v_(k-1), v_k)
//! ```
//!
//! with initial weights `beta(u_i) = x_i / (t (1+t))`,
//! `beta(u_i^-1) = x_i / (1+t)` and transition weights
//!
//! ```text
//! alpha(v, w) = 0                     when w = v^-1,
//! alpha(u_j^e, u_i^e)  = x_i / (t (1+y_j))   (same sign),
//! alpha(u_j^e, u_i^-e) = x_i / (1+y_j)       (opposite sign, i != j).
//! ```
//!
//! The multiplicative cocycle `P(s, .)` is determined by its one-letter
//! values, which only read the first symbol (or, for an inverse letter that
//! cancels, the first two symbols) of the boundary point:
//!
//! ```text
//! P(u_i, w...)        = 1/a_i   if w = u_i,
//!                       -t a_i  if w = u_j positive, j != i,
//!                       a_i     if w negative;
//! P(u_i^-1, w...)     = a_i     if w != u_i^-1,
//! P(u_i^-1, u_i^-1 w...) = -1/(t a_i) if w positive,  1/a_i if w negative,
//! ```
//!
//! extended by `P(rs, omega) = P(r, omega) P(s, r^-1 omega)`. On the
//! cylinders of depth `|s| + 1` the function `P(s, .)` is constant, and
//! exact integration recovers the state: `phi(s) = integral P(s, .) dmu`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eigenstate::{CanonicalParams, State};
use crate::error::{Error, Result};
use crate::words::{alphabet, enumerate_words_of_length, Letter, ReducedWord, Sign};

/// Exact integration refuses to enumerate more cylinder words than this.
pub const INTEGRATION_WORD_CAP: usize = 4_000_000;

/// Two cocycle values within this relative window count as equal when
/// classifying constancy.
pub const CONSTANCY_WINDOW: f64 = 1e-12;

/// The boundary Markov measure of a canonical state, tabulated by letter.
#[derive(Debug, Clone)]
pub struct BoundaryMeasure {
    rank: usize,
    t: f64,
    /// Initial cylinder weights, indexed by letter code.
    beta: Vec<f64>,
    /// Transition weights, `alpha[prev code][next code]`.
    alpha: Vec<Vec<f64>>,
}

/// Tabulates the measure attached to a canonical state.
pub fn measure_from(params: &CanonicalParams) -> BoundaryMeasure {
    let x = params.x();
    let n = x.dim();
    let t = x.t();
    let letters = alphabet(n);
    let mut beta = vec![0.0; 2 * n];
    for i in 0..n {
        beta[Letter::positive(i + 1).code()] = x.x()[i] / (t * (1.0 + t));
        beta[Letter::negative(i + 1).code()] = x.x()[i] / (1.0 + t);
    }
    let mut alpha = vec![vec![0.0; 2 * n]; 2 * n];
    for &prev in &letters {
        let yj = x.y()[prev.index - 1];
        for &next in &letters {
            let xi = x.x()[next.index - 1];
            alpha[prev.code()][next.code()] = if next == prev.inverse() {
                0.0
            } else if next.sign == prev.sign {
                xi / (t * (1.0 + yj))
            } else {
                xi / (1.0 + yj)
            };
        }
    }
    BoundaryMeasure { rank: n, t, beta, alpha }
}

impl BoundaryMeasure {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Initial weight `beta(v)` of the one-letter cylinder.
    pub fn beta(&self, v: Letter) -> f64 {
        self.beta[v.code()]
    }

    /// Transition weight `alpha(prev, next)`.
    pub fn alpha(&self, prev: Letter, next: Letter) -> f64 {
        self.alpha[prev.code()][next.code()]
    }

    /// Measure of the cylinder `Omega(w)`; the empty word gives total mass 1.
    pub fn mu_hat(&self, w: &ReducedWord) -> Result<f64> {
        if w.rank() != self.rank {
            return Err(Error::RankMismatch { left: self.rank, right: w.rank() });
        }
        let letters = w.letters();
        let Some(&first) = letters.first() else {
            return Ok(1.0);
        };
        let mut mass = self.beta(first);
        for pair in letters.windows(2) {
            mass *= self.alpha(pair[0], pair[1]);
        }
        Ok(mass)
    }

    /// Largest violation, over cylinder words of length at most `max_len`,
    /// of the consistency equation `mu(Omega(w)) = sum_v mu(Omega(w v))`
    /// where `v` runs over the letters that extend `w` without cancelling.
    /// The identity word contributes `|1 - sum_v beta(v)|`.
    pub fn compatibility_residual(&self, max_len: usize) -> Result<f64> {
        let letters = alphabet(self.rank);
        let mut worst: f64 = 0.0;
        for w in crate::words::enumerate_words(self.rank, max_len)? {
            let mut extended = 0.0;
            for &v in &letters {
                if w.last() != Some(v.inverse()) {
                    extended += self.mu_hat(&w.push(v)?)?;
                }
            }
            worst = worst.max((self.mu_hat(&w)? - extended).abs());
        }
        Ok(worst)
    }

    /// Draws a length-`depth` prefix of a boundary point using the supplied
    /// generator.
    pub fn sample_prefix_with<R: Rng>(&self, depth: usize, rng: &mut R) -> Result<ReducedWord> {
        let letters = alphabet(self.rank);
        let mut out: Vec<Letter> = Vec::with_capacity(depth);
        for _ in 0..depth {
            let weights: Vec<f64> = match out.last() {
                None => letters.iter().map(|l| self.beta(*l)).collect(),
                Some(&prev) => letters.iter().map(|l| self.alpha(prev, *l)).collect(),
            };
            let draw: f64 = rng.random();
            let mut cumulative = 0.0;
            let mut picked = None;
            for (l, w) in letters.iter().zip(&weights) {
                if *w > 0.0 {
                    cumulative += w;
                    if draw < cumulative {
                        picked = Some(*l);
                        break;
                    }
                }
            }
            // rounding can leave the cumulative total a hair under the draw;
            // fall back to the last admissible letter
            let picked = picked.or_else(|| {
                letters
                    .iter()
                    .zip(&weights)
                    .rev()
                    .find(|(_, w)| **w > 0.0)
                    .map(|(l, _)| *l)
            });
            out.push(picked.expect("transition rows always have positive entries"));
        }
        ReducedWord::from_letters(self.rank, out)
    }

    /// Deterministically seeded prefix sample.
    pub fn sample_prefix(&self, depth: usize, seed: u64) -> Result<ReducedWord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_prefix_with(depth, &mut rng)
    }
}

/// Reading cursor for the translates `(v_1 .. v_m)^-1 omega` of a boundary
/// point known through a finite prefix. The translate is `front` (last
/// element first) followed by the unread tail of the prefix; each update and
/// read is O(1).
struct TranslateCursor<'a> {
    front: Vec<Letter>,
    pos: usize,
    prefix: &'a [Letter],
}

impl<'a> TranslateCursor<'a> {
    fn new(prefix: &'a [Letter]) -> Self {
        TranslateCursor { front: Vec::new(), pos: 0, prefix }
    }

    fn first(&self) -> Letter {
        match self.front.last() {
            Some(&l) => l,
            None => self.prefix[self.pos],
        }
    }

    fn second(&self) -> Letter {
        match self.front.len() {
            0 => self.prefix[self.pos + 1],
            1 => self.prefix[self.pos],
            k => self.front[k - 2],
        }
    }

    /// Replaces the tracked point `tau` by `v^-1 tau`.
    fn translate_by_inverse(&mut self, v: Letter) {
        if let Some(&top) = self.front.last() {
            if top == v {
                self.front.pop();
            } else {
                self.front.push(v.inverse());
            }
        } else if self.pos < self.prefix.len() && self.prefix[self.pos] == v {
            self.pos += 1;
        } else {
            self.front.push(v.inverse());
        }
    }
}

fn one_letter_value(params: &CanonicalParams, v: Letter, cursor: &TranslateCursor) -> f64 {
    let t = params.x().t();
    let a = params.a()[v.index - 1];
    match v.sign {
        Sign::Positive => {
            let f1 = cursor.first();
            if f1 == v {
                1.0 / a
            } else if f1.sign == Sign::Positive {
                -t * a
            } else {
                a
            }
        }
        Sign::Negative => {
            if cursor.first() != v {
                a
            } else if cursor.second().sign == Sign::Positive {
                -1.0 / (t * a)
            } else {
                1.0 / a
            }
        }
    }
}

/// Value of the cocycle `P(s, .)` on the cylinder `Omega(prefix)`. The
/// prefix must have length at least `|s| + 1`, which makes the value
/// well defined: the factor for the `m`-th letter of `s` reads at most two
/// symbols of the translate `(v_1 .. v_(m-1))^-1 omega`, and those symbols
/// are determined by the prefix.
pub fn cocycle_p(params: &CanonicalParams, s: &ReducedWord, prefix: &ReducedWord) -> Result<f64> {
    if params.rank() != s.rank() {
        return Err(Error::RankMismatch { left: params.rank(), right: s.rank() });
    }
    if params.rank() != prefix.rank() {
        return Err(Error::RankMismatch { left: params.rank(), right: prefix.rank() });
    }
    let needed = s.len() + 1;
    if prefix.len() < needed {
        return Err(Error::PrefixTooShort { needed, got: prefix.len() });
    }
    let mut cursor = TranslateCursor::new(prefix.letters());
    let mut value = 1.0;
    for &v in s.letters() {
        value *= one_letter_value(params, v, &cursor);
        cursor.translate_by_inverse(v);
    }
    Ok(value)
}

fn cylinder_words(rank: usize, depth: usize) -> Result<Vec<ReducedWord>> {
    let mut count: usize = if depth == 0 { 1 } else { 2 * rank };
    for _ in 1..depth {
        count = count
            .checked_mul(2 * rank - 1)
            .ok_or(Error::SupportCap { cap: INTEGRATION_WORD_CAP })?;
        if count > INTEGRATION_WORD_CAP {
            return Err(Error::SupportCap { cap: INTEGRATION_WORD_CAP });
        }
    }
    enumerate_words_of_length(rank, depth)
}

/// Exact integral of `P(s, .)` over the boundary, summed over the cylinders
/// of the given depth (at least `|s| + 1`). Reconstructs `phi(s)`.
pub fn integrate_p_at_depth(
    params: &CanonicalParams,
    measure: &BoundaryMeasure,
    s: &ReducedWord,
    depth: usize,
) -> Result<f64> {
    if measure.rank() != params.rank() {
        return Err(Error::RankMismatch { left: params.rank(), right: measure.rank() });
    }
    if depth < s.len() + 1 {
        return Err(Error::PrefixTooShort { needed: s.len() + 1, got: depth });
    }
    let mut total = 0.0;
    for w in cylinder_words(params.rank(), depth)? {
        total += cocycle_p(params, s, &w)? * measure.mu_hat(&w)?;
    }
    Ok(total)
}

/// Exact integral of `P(s, .)` at the minimal depth `|s| + 1`.
pub fn integrate_p(
    params: &CanonicalParams,
    measure: &BoundaryMeasure,
    s: &ReducedWord,
) -> Result<f64> {
    integrate_p_at_depth(params, measure, s, s.len() + 1)
}

/// Largest violation of `sum_i (c_i / lambda) P(u_i, .) = 1` over the
/// cylinders of the given depth (at least 2).
pub fn rightsum_residual(params: &CanonicalParams, depth: usize) -> Result<f64> {
    if depth < 2 {
        return Err(Error::PrefixTooShort { needed: 2, got: depth });
    }
    let n = params.rank();
    let c = params.coefficients();
    let lambda = params.lambda();
    let mut worst: f64 = 0.0;
    for w in cylinder_words(n, depth)? {
        let mut acc = 0.0;
        for i in 1..=n {
            let gen = ReducedWord::from_letters(n, [Letter::positive(i)])?;
            acc += c[i - 1] / lambda * cocycle_p(params, &gen, &w)?;
        }
        worst = worst.max((acc - 1.0).abs());
    }
    Ok(worst)
}

fn h_value(t: f64, first: Letter) -> f64 {
    if first.is_positive() {
        t.sqrt()
    } else {
        -1.0 / t.sqrt()
    }
}

/// Residual of the split identity
/// `integral of P(s, .) over negative-first points = t * integral over
/// positive-first points` (equivalently, `P(s, .)` is orthogonal to the
/// function `h` that is `sqrt(t)` on positive-first and `-1/sqrt(t)` on
/// negative-first points).
pub fn h_identity_residual(
    params: &CanonicalParams,
    measure: &BoundaryMeasure,
    s: &ReducedWord,
) -> Result<f64> {
    if measure.rank() != params.rank() {
        return Err(Error::RankMismatch { left: params.rank(), right: measure.rank() });
    }
    let depth = s.len() + 1;
    let mut positive_mass = 0.0;
    let mut negative_mass = 0.0;
    for w in cylinder_words(params.rank(), depth)? {
        let contribution = cocycle_p(params, s, &w)? * measure.mu_hat(&w)?;
        if w.first().expect("depth >= 1").is_positive() {
            positive_mass += contribution;
        } else {
            negative_mass += contribution;
        }
    }
    Ok((negative_mass - params.x().t() * positive_mass).abs())
}

/// Largest split-identity residual over all words of length at most
/// `max_len`; see [`h_identity_residual`].
pub fn h_identity_max(
    params: &CanonicalParams,
    measure: &BoundaryMeasure,
    max_len: usize,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in crate::words::enumerate_words(params.rank(), max_len)? {
        worst = worst.max(h_identity_residual(params, measure, &s)?);
    }
    Ok(worst)
}

/// Largest deviation, over generators `i` and cylinders of the given depth
/// (at least 2), between the two sides of the intertwining identity
///
/// ```text
/// h(omega) P(u_i, sigma omega) = h(u_i omega) P(u_i^-1, omega)
/// ```
///
/// (`sigma` inverts every letter) and their common closed-form value:
/// `-1/(sqrt(t) a_i)` on `Omega(u_i^-1)` and `sqrt(t) a_i` elsewhere.
pub fn w_intertwiner_residual(params: &CanonicalParams, depth: usize) -> Result<f64> {
    if depth < 2 {
        return Err(Error::PrefixTooShort { needed: 2, got: depth });
    }
    let n = params.rank();
    let t = params.x().t();
    let words = cylinder_words(n, depth)?;
    let mut worst: f64 = 0.0;
    for i in 1..=n {
        let a = params.a()[i - 1];
        let gen = ReducedWord::from_letters(n, [Letter::positive(i)])?;
        let gen_inv = gen.inverse();
        for w in &words {
            let first = w.first().expect("depth >= 1");
            let left = h_value(t, first) * cocycle_p(params, &gen, &w.invert_letters())?;
            let translated_first = if first == Letter::negative(i) {
                w.letters()[1]
            } else {
                Letter::positive(i)
            };
            let right = h_value(t, translated_first) * cocycle_p(params, &gen_inv, w)?;
            let table = if first == Letter::negative(i) {
                -1.0 / (t.sqrt() * a)
            } else {
                t.sqrt() * a
            };
            worst = worst.max((left - right).abs()).max((left - table).abs());
        }
    }
    Ok(worst)
}

/// A first-letter class of boundary points: all positive-first points
/// together, or the points starting with a specific inverse generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixClass {
    Positive,
    NegativeOf(usize),
}

impl PrefixClass {
    fn contains(self, first: Letter) -> bool {
        match self {
            PrefixClass::Positive => first.is_positive(),
            PrefixClass::NegativeOf(i) => first == Letter::negative(i),
        }
    }
}

/// Values of `P(r, .)` on all cylinders of the given depth whose first
/// letter lies in the class.
pub fn cocycle_class_values(
    params: &CanonicalParams,
    r: &ReducedWord,
    class: PrefixClass,
    depth: usize,
) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for w in cylinder_words(params.rank(), depth.max(r.len() + 1))? {
        if class.contains(w.first().expect("depth >= 1")) {
            values.push(cocycle_p(params, r, &w)?);
        }
    }
    Ok(values)
}

/// The constant value of `P(r, .)` on the class, or `None` when the values
/// spread wider than [`CONSTANCY_WINDOW`].
pub fn cocycle_constant_on(
    params: &CanonicalParams,
    r: &ReducedWord,
    class: PrefixClass,
    depth: usize,
) -> Result<Option<f64>> {
    let values = cocycle_class_values(params, r, class, depth)?;
    let Some(&first) = values.first() else {
        return Ok(None);
    };
    let window = CONSTANCY_WINDOW * (1.0 + first.abs());
    if values.iter().all(|v| (v - first).abs() <= window) {
        Ok(Some(first))
    } else {
        Ok(None)
    }
}

fn asserted_classes(params: &CanonicalParams, r: &ReducedWord) -> Vec<PrefixClass> {
    match r.first() {
        Some(l) if l.is_positive() => (1..=params.rank()).map(PrefixClass::NegativeOf).collect(),
        _ => vec![PrefixClass::Positive],
    }
}

/// Worst spread of `P(r, .)` within the classes on which it is asserted
/// constant: the positive-first class when `r` starts with an inverse
/// letter, and each `Omega(u_i^-1)` when `r` starts with a generator. The
/// identity word is constant everywhere.
pub fn constancy_residual(params: &CanonicalParams, r: &ReducedWord, depth: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for class in asserted_classes(params, r) {
        let values = cocycle_class_values(params, r, class, depth)?;
        if let (Some(lo), Some(hi)) = (
            values.iter().copied().reduce(f64::min),
            values.iter().copied().reduce(f64::max),
        ) {
            worst = worst.max(hi - lo);
        }
    }
    Ok(worst)
}

/// Whether `P(r, .)` is constant (within [`CONSTANCY_WINDOW`]) on every
/// class the theory asserts for `r`, checked on cylinders of the minimal
/// depth `|r| + 1`.
pub fn check_constancy(params: &CanonicalParams, r: &ReducedWord) -> Result<bool> {
    for class in asserted_classes(params, r) {
        if cocycle_constant_on(params, r, class, r.len() + 1)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sorted cluster representatives of all values of `P(r, .)` over cylinders
/// of the given depth; values within `tol` of a cluster join it.
pub fn distinct_cocycle_values(
    params: &CanonicalParams,
    r: &ReducedWord,
    depth: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for w in cylinder_words(params.rank(), depth.max(r.len() + 1))? {
        values.push(cocycle_p(params, r, &w)?);
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("cocycle values are finite"));
    let mut clusters: Vec<f64> = Vec::new();
    for v in values {
        match clusters.last() {
            Some(&last) if (v - last).abs() <= tol => {}
            _ => clusters.push(v),
        }
    }
    Ok(clusters)
}

/// Largest violation of the flip identity: inverting every letter of a
/// cylinder word multiplies its measure by `beta(v_1^-1) / beta(v_1)`.
pub fn sigma_ratio_residual(measure: &BoundaryMeasure, depth: usize) -> Result<f64> {
    if depth == 0 {
        return Err(Error::PrefixTooShort { needed: 1, got: 0 });
    }
    let mut worst: f64 = 0.0;
    for w in cylinder_words(measure.rank(), depth)? {
        let first = w.first().expect("depth >= 1");
        let expected = measure.beta(first.inverse()) / measure.beta(first);
        let ratio = measure.mu_hat(&w.invert_letters())? / measure.mu_hat(&w)?;
        worst = worst.max((ratio - expected).abs());
    }
    Ok(worst)
}

/// Largest violation of the change-of-variable identity
/// `mu(Omega(v w)) / mu(Omega(w)) = P(v^-1, Omega(w))^2` over all letters
/// `v` and cylinders of the given depth (at least 2), where `v w` is the
/// reduced concatenation — together with the closed-form derivative table
/// for generator translates:
///
/// ```text
/// P(u_i, .)^2 = t(1+y_i)/x_i on Omega(u_i),
///               t x_i/(1+y_i) on Omega(u_j) (j != i),
///               x_i/(t(1+y_i)) on negative-first points.
/// ```
pub fn rn_consistency_residual(
    params: &CanonicalParams,
    measure: &BoundaryMeasure,
    depth: usize,
) -> Result<f64> {
    if measure.rank() != params.rank() {
        return Err(Error::RankMismatch { left: params.rank(), right: measure.rank() });
    }
    if depth < 2 {
        return Err(Error::PrefixTooShort { needed: 2, got: depth });
    }
    let n = params.rank();
    let t = params.x().t();
    let words = cylinder_words(n, depth)?;
    let mut worst: f64 = 0.0;
    for v in alphabet(n) {
        let v_word = ReducedWord::from_letters(n, [v])?;
        let v_inv = v_word.inverse();
        for w in &words {
            let ratio = measure.mu_hat(&v_word.concat(w)?)? / measure.mu_hat(w)?;
            let p = cocycle_p(params, &v_inv, w)?;
            worst = worst.max((ratio - p * p).abs());
            if v.is_positive() {
                let i = v.index;
                let (xi, yi) = (params.x().x()[i - 1], params.x().y()[i - 1]);
                let first = w.first().expect("depth >= 2");
                let table = if first == v {
                    t * (1.0 + yi) / xi
                } else if first.is_positive() {
                    t * xi / (1.0 + yi)
                } else {
                    xi / (t * (1.0 + yi))
                };
                let p_fwd = cocycle_p(params, &v_word, w)?;
                worst = worst.max((p_fwd * p_fwd - table).abs());
            }
        }
    }
    Ok(worst)
}

/// Monte Carlo estimate of `integral P(s, .) dmu` from seeded prefix
/// samples; returns the sample mean and its standard error.
pub fn mc_estimate(
    params: &CanonicalParams,
    measure: &BoundaryMeasure,
    s: &ReducedWord,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if measure.rank() != params.rank() {
        return Err(Error::RankMismatch { left: params.rank(), right: measure.rank() });
    }
    if samples < 2 {
        return Err(Error::TooFewSamples);
    }
    let depth = s.len() + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let prefix = measure.sample_prefix_with(depth, &mut rng)?;
        let v = cocycle_p(params, s, &prefix)?;
        sum += v;
        sum_sq += v * v;
    }
    let m = samples as f64;
    let mean = sum / m;
    let variance = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok((mean, (variance / m).sqrt()))
}
