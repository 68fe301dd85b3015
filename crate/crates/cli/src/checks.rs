//! The verification suite: every identity the library asserts, run against a
//! resolved job and reported as one record per check. All randomness is
//! seeded from the job configuration, so a run is a pure function of the
//! config.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use freestate_core::boundary::{
    check_constancy, constancy_residual, h_identity_max, integrate_p, integrate_p_at_depth,
    mc_estimate, rightsum_residual, rn_consistency_residual, sigma_ratio_residual,
    w_intertwiner_residual, BoundaryMeasure,
};
use freestate_core::eigenstate::{
    b_minus_x1, canonical_general_agreement, canonical_params, eigenstate_residual, gram_direct,
    gram_recursive, isometry_residual, local_rules_residual, outer_boundary_state, phi_eval,
    psd_report, reduced_spectrum, universal_spectrum, CanonicalParams, CoefficientVector,
};
use freestate_core::smap::{
    apply_s, arrow_matrix, det_arrow, det_jacobian, grid_search, invert_s, jacobian, OrthantPoint,
};
use freestate_core::spectral::{
    geometric_inverse_residual, geometric_tail, GroupFunction,
};
use freestate_core::words::{enumerate_positive, enumerate_words, Letter, ReducedWord};
use freestate_core::Result;

use crate::config::JobConfig;
use crate::report::CheckRecord;

/// A resolved verification job: configuration plus the derived state and
/// boundary measure it describes.
pub struct Job {
    pub config: JobConfig,
    pub canonical: CanonicalParams,
    pub measure: BoundaryMeasure,
}

impl Job {
    pub fn new(config: JobConfig) -> Result<Self> {
        let cv = CoefficientVector::new(config.c.clone(), config.lambda)?;
        let canonical = canonical_params(&cv, config.tol("map_residual", 1e-10))?;
        let measure = freestate_core::boundary::measure_from(&canonical);
        Ok(Job { config, canonical, measure })
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.config.seed ^ salt)
    }

    fn n(&self) -> usize {
        self.config.n
    }
}

pub struct CheckSpec {
    pub name: &'static str,
    pub identity: &'static str,
    pub default_tol: f64,
    run: fn(&Job) -> Result<f64>,
}

/// Runs every check and returns one record per check, in table order
/// (the report sorts by name).
pub fn run_all(job: &Job) -> Result<Vec<CheckRecord>> {
    let mut records = Vec::with_capacity(CHECKS.len());
    for spec in CHECKS {
        let max_residual = (spec.run)(job)?;
        let tolerance = job.config.tol(spec.name, spec.default_tol);
        records.push(CheckRecord {
            name: spec.name.into(),
            identity: spec.identity.into(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
        });
    }
    Ok(records)
}

pub const CHECKS: &[CheckSpec] = &[
    CheckSpec {
        name: "words.parse_roundtrip",
        identity: "parse(tokens(w)) = w",
        default_tol: 0.5,
        run: words_parse_roundtrip,
    },
    CheckSpec {
        name: "words.group_laws",
        identity: "(ab)c = a(bc), a a^-1 = e, e a = a e = a",
        default_tol: 0.5,
        run: words_group_laws,
    },
    CheckSpec {
        name: "words.statistic_additivity",
        identity: "|ab|_i = |a|_i + |b|_i and gamma(ab) = gamma(a) + gamma(b) + seam when |ab| = |a| + |b|",
        default_tol: 0.5,
        run: words_statistic_additivity,
    },
    CheckSpec {
        name: "words.inversion_invariance",
        identity: "|s^-1|_i = |s|_i and gamma_ij(s^-1) = gamma_ij(s)",
        default_tol: 0.5,
        run: words_inversion_invariance,
    },
    CheckSpec {
        name: "smap.round_trip",
        identity: "invert_S(S(x)) = x",
        default_tol: 1e-8,
        run: smap_round_trip,
    },
    CheckSpec {
        name: "smap.range_membership",
        identity: "S(x) satisfies sum s > 1 and 2 s_j - sum s < 1",
        default_tol: 0.5,
        run: smap_range_membership,
    },
    CheckSpec {
        name: "smap.det_arrow",
        identity: "det(arrow(r, p)) = prod q_i + sum_j p_j prod_{i != j} q_i, q = r - p",
        default_tol: 1e-10,
        run: smap_det_arrow,
    },
    CheckSpec {
        name: "smap.det_jacobian",
        identity: "det S'(x) = (sum_j x_j y_j prod_{i != j} theta_i) / t^{n+1} > 0",
        default_tol: 1e-10,
        run: smap_det_jacobian,
    },
    CheckSpec {
        name: "smap.jacobian_fd",
        identity: "S'(x) matches central finite differences of S",
        default_tol: 1e-5,
        run: smap_jacobian_fd,
    },
    CheckSpec {
        name: "smap.arrow_identity",
        identity: "det(diag(1 + y_i) with off-diagonal rows -x_i) = (1 + t)^{n-1}",
        default_tol: 1e-10,
        run: smap_arrow_identity,
    },
    CheckSpec {
        name: "smap.injectivity_probe",
        identity: "no second preimage of S(x) in a box displaced from x has residual < 1e-6",
        default_tol: 0.5,
        run: smap_injectivity_probe,
    },
    CheckSpec {
        name: "eigenstate.local_rules",
        identity: "phi(s) = phi(s^-1), phi(u_i s) = a_i phi(s), phi(s u_i) = a_i phi(s), phi(s u_j^-1 u_i) = b_ij phi(s)",
        default_tol: 1e-12,
        run: eigenstate_local_rules,
    },
    CheckSpec {
        name: "eigenstate.eigen_relation",
        identity: "sum_i c_i phi(s u_i) = lambda phi(s)",
        default_tol: 1e-12,
        run: eigenstate_eigen_relation,
    },
    CheckSpec {
        name: "eigenstate.gram_psd",
        identity: "A_k = [phi(s^-1 t)] over positive words of length k is positive semidefinite",
        default_tol: 1e-9,
        run: eigenstate_gram_psd,
    },
    CheckSpec {
        name: "eigenstate.gram_recursion",
        identity: "A_{k+1} = I (x) A_k + (B - I) (x) X_k, X_{k+1} = X_1 (x) X_k",
        default_tol: 1e-12,
        run: eigenstate_gram_recursion,
    },
    CheckSpec {
        name: "eigenstate.b_minus_x1",
        identity: "B - a a^T is positive semidefinite",
        default_tol: 1e-12,
        run: eigenstate_b_minus_x1,
    },
    CheckSpec {
        name: "eigenstate.isometry",
        identity: "lambda^-2 sum_{i,j} c_i c_j phi(u_j^-1 t^-1 s u_i) = phi(t^-1 s)",
        default_tol: 1e-12,
        run: eigenstate_isometry,
    },
    CheckSpec {
        name: "eigenstate.route_agreement",
        identity: "phi from (x, t) products = phi from (B, c) products",
        default_tol: 1e-12,
        run: eigenstate_route_agreement,
    },
    CheckSpec {
        name: "eigenstate.outer_psd",
        identity: "Gram matrices of the lambda = ||c|| boundary state are positive semidefinite",
        default_tol: 1e-9,
        run: eigenstate_outer_psd,
    },
    CheckSpec {
        name: "boundary.integration",
        identity: "phi(s) = integral P(s, .) dmu",
        default_tol: 1e-10,
        run: boundary_integration,
    },
    CheckSpec {
        name: "boundary.depth_stability",
        identity: "integral of P(s, .) over depth |s|+2 cylinders = integral over depth |s|+1",
        default_tol: 1e-12,
        run: boundary_depth_stability,
    },
    CheckSpec {
        name: "boundary.compatibility",
        identity: "mu(w) = sum over non-cancelling v of mu(w v)",
        default_tol: 1e-12,
        run: boundary_compatibility,
    },
    CheckSpec {
        name: "boundary.rightsum",
        identity: "sum_i (c_i / lambda) P(u_i, .) = 1",
        default_tol: 1e-12,
        run: boundary_rightsum,
    },
    CheckSpec {
        name: "boundary.h_identity",
        identity: "integral of P(s, .) over negative-first points = t times integral over positive-first points",
        default_tol: 1e-10,
        run: boundary_h_identity,
    },
    CheckSpec {
        name: "boundary.w_intertwiner",
        identity: "h(w) P(u_i, T w) = h(u_i w) P(u_i^-1, w), T inverting every letter",
        default_tol: 1e-12,
        run: boundary_w_intertwiner,
    },
    CheckSpec {
        name: "boundary.rn_consistency",
        identity: "P(v^-1, .)^2 on the w-cylinder = mu(v w) / mu(w), with the closed-form table for positive v",
        default_tol: 1e-12,
        run: boundary_rn_consistency,
    },
    CheckSpec {
        name: "boundary.sigma_ratio",
        identity: "mu(sigma w) / mu(w) = beta(v_1^-1) / beta(v_1) with sigma inverting every letter",
        default_tol: 1e-12,
        run: boundary_sigma_ratio,
    },
    CheckSpec {
        name: "boundary.constancy",
        identity: "P(r, .) is constant on positive-first points and on each u_i^-1-first class off the support of r",
        default_tol: 1e-12,
        run: boundary_constancy,
    },
    CheckSpec {
        name: "boundary.monte_carlo",
        identity: "sample mean of P(s, .) lies within four standard errors of phi(s), in units of that budget",
        default_tol: 1.0,
        run: boundary_monte_carlo,
    },
    CheckSpec {
        name: "spectral.power_norms",
        identity: "l2 norm of X^k = (sum c_i^2)^{k/2}",
        default_tol: 1e-12,
        run: spectral_power_norms,
    },
    CheckSpec {
        name: "spectral.power_support",
        identity: "X^k is supported on exactly the n^k positive words of length k",
        default_tol: 0.5,
        run: spectral_power_support,
    },
    CheckSpec {
        name: "spectral.geometric_tail",
        identity: "l2 norm of ((d0 + sum d_i u_i) * inverse_m - delta_e) matches the analytic geometric tail",
        default_tol: 1e-12,
        run: spectral_geometric_tail,
    },
    CheckSpec {
        name: "spectral.geometric_monotone",
        identity: "the geometric-inverse residual strictly decreases with truncation depth",
        default_tol: 0.5,
        run: spectral_geometric_monotone,
    },
    CheckSpec {
        name: "spectral.convolution_assoc",
        identity: "(f * g) * h = f * (g * h)",
        default_tol: 1e-12,
        run: spectral_convolution_assoc,
    },
    CheckSpec {
        name: "spectral.annulus",
        identity: "annulus radii match the closed formulas and bound the admissible eigenvalue interval",
        default_tol: 1e-12,
        run: spectral_annulus,
    },
];

// ---------------------------------------------------------------------------
// shared helpers

/// Number of reduced words of length exactly `len`.
fn words_of_len(rank: usize, len: usize) -> usize {
    if len == 0 {
        return 1;
    }
    let mut count = 2 * rank;
    for _ in 1..len {
        count = count.saturating_mul(2 * rank - 1);
    }
    count
}

/// Largest length `L <= want` whose cumulative word count stays within the
/// budget (always at least 1 so every sweep sees some words).
fn capped_len(rank: usize, want: usize, budget: usize) -> usize {
    let mut total = 1usize;
    for l in 1..=want {
        total = total.saturating_add(words_of_len(rank, l));
        if total > budget {
            return l.saturating_sub(1).max(1);
        }
    }
    want.max(1)
}

fn random_orthant(rng: &mut ChaCha8Rng, dim: usize, lo: f64, width: f64) -> OrthantPoint {
    let x: Vec<f64> = (0..dim).map(|_| lo + width * rng.random::<f64>()).collect();
    OrthantPoint::new(x).expect("positive samples")
}

fn random_word(rng: &mut ChaCha8Rng, rank: usize, max_len: usize) -> ReducedWord {
    let len = (rng.random::<f64>() * (max_len as f64 + 1.0)) as usize;
    let letters = (0..len).map(|_| {
        let index = 1 + (rng.random::<f64>() * rank as f64) as usize;
        if rng.random::<f64>() < 0.5 {
            Letter::positive(index.min(rank))
        } else {
            Letter::negative(index.min(rank))
        }
    });
    ReducedWord::from_letters(rank, letters).expect("letters are in range")
}

// ---------------------------------------------------------------------------
// words

fn words_parse_roundtrip(job: &Job) -> Result<f64> {
    let len = capped_len(job.n(), job.config.max_word_len.min(6), 30_000);
    let mut failures = 0.0;
    for w in enumerate_words(job.n(), len)? {
        if ReducedWord::parse(&w.tokens(), job.n())? != w {
            failures += 1.0;
        }
    }
    Ok(failures)
}

fn words_group_laws(job: &Job) -> Result<f64> {
    let n = job.n();
    let mut len = 3;
    while len > 1 {
        let pool_size = (0..=len).map(|l| words_of_len(n, l)).sum::<usize>();
        if pool_size.pow(3) <= 200_000 {
            break;
        }
        len -= 1;
    }
    let pool = enumerate_words(n, len)?;
    let e = ReducedWord::identity(n)?;
    let mut failures = 0.0;
    for a in &pool {
        if a.concat(&a.inverse())? != e || e.concat(a)? != *a || a.concat(&e)? != *a {
            failures += 1.0;
        }
        for b in &pool {
            for c in &pool {
                if a.concat(b)?.concat(c)? != a.concat(&b.concat(c)?)? {
                    failures += 1.0;
                }
            }
        }
    }
    Ok(failures)
}

fn words_statistic_additivity(job: &Job) -> Result<f64> {
    let n = job.n();
    let len = capped_len(n, 3, 400);
    let pool = enumerate_words(n, len)?;
    let mut failures = 0.0;
    for a in &pool {
        for b in &pool {
            let m = a.concat(b)?;
            if m.len() != a.len() + b.len() {
                continue;
            }
            for i in 1..=n {
                if m.letter_count(i) != a.letter_count(i) + b.letter_count(i) {
                    failures += 1.0;
                }
            }
            let seam = match (a.last(), b.first()) {
                (Some(la), Some(fb))
                    if !la.is_positive() && fb.is_positive() && la.index != fb.index =>
                {
                    1
                }
                _ => 0,
            };
            if m.gamma_total() != a.gamma_total() + b.gamma_total() + seam {
                failures += 1.0;
            }
        }
    }
    Ok(failures)
}

fn words_inversion_invariance(job: &Job) -> Result<f64> {
    let n = job.n();
    let len = capped_len(n, job.config.max_word_len.min(6), 30_000);
    let mut failures = 0.0;
    for w in enumerate_words(n, len)? {
        let inv = w.inverse();
        for i in 1..=n {
            if w.letter_count(i) != inv.letter_count(i) {
                failures += 1.0;
            }
            for j in 1..=n {
                if i != j && w.gamma_pair(i, j) != inv.gamma_pair(i, j) {
                    failures += 1.0;
                }
            }
        }
    }
    Ok(failures)
}

// ---------------------------------------------------------------------------
// smap

fn smap_round_trip(job: &Job) -> Result<f64> {
    let mut rng = job.rng(0x51);
    let tol = job.config.tol("map_residual", 1e-10);
    let mut worst: f64 = 0.0;
    for dim in 2..=6 {
        for _ in 0..200 {
            let p = random_orthant(&mut rng, dim, 0.01, 9.99);
            let q = apply_s(&p);
            let back = invert_s(&q, tol)?;
            for (a, b) in p.x().iter().zip(back.x()) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(worst)
}

fn smap_range_membership(job: &Job) -> Result<f64> {
    let mut rng = job.rng(0x52);
    let mut failures = 0.0;
    for dim in 2..=6 {
        for _ in 0..200 {
            let p = random_orthant(&mut rng, dim, 0.01, 9.99);
            if !apply_s(&p).in_range() {
                failures += 1.0;
            }
        }
    }
    Ok(failures)
}

fn smap_det_arrow(job: &Job) -> Result<f64> {
    let mut rng = job.rng(0x53);
    let mut worst: f64 = 0.0;
    for dim in 1..=8 {
        for _ in 0..40 {
            let r: Vec<f64> = (0..dim).map(|_| 0.1 + 3.0 * rng.random::<f64>()).collect();
            let p: Vec<f64> = (0..dim).map(|_| -1.0 + 2.0 * rng.random::<f64>()).collect();
            let closed = det_arrow(&r, &p)?;
            let direct = arrow_matrix(&r, &p).determinant();
            worst = worst.max((closed - direct).abs() / closed.abs().max(1.0));
        }
    }
    Ok(worst)
}

fn smap_det_jacobian(job: &Job) -> Result<f64> {
    let mut rng = job.rng(0x54);
    let mut worst: f64 = 0.0;
    for dim in 2..=6 {
        for _ in 0..40 {
            let p = random_orthant(&mut rng, dim, 0.05, 5.0);
            let closed = det_jacobian(&p);
            if closed <= 0.0 {
                worst = worst.max(1.0);
            }
            let direct = jacobian(&p).determinant();
            worst = worst.max((closed - direct).abs() / closed.abs().max(1.0));
        }
    }
    Ok(worst)
}

fn smap_jacobian_fd(job: &Job) -> Result<f64> {
    let mut rng = job.rng(0x55);
    let step = 1e-6;
    let mut worst: f64 = 0.0;
    for dim in 2..=5 {
        for _ in 0..8 {
            let p = random_orthant(&mut rng, dim, 0.2, 4.0);
            let m = jacobian(&p);
            for j in 0..dim {
                let mut hi = p.x().to_vec();
                let mut lo = p.x().to_vec();
                hi[j] += step;
                lo[j] -= step;
                let s_hi = apply_s(&OrthantPoint::new(hi)?);
                let s_lo = apply_s(&OrthantPoint::new(lo)?);
                for i in 0..dim {
                    let fd = (s_hi.values()[i] - s_lo.values()[i]) / (2.0 * step);
                    worst = worst.max((m[(i, j)] - fd).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn smap_arrow_identity(job: &Job) -> Result<f64> {
    let mut rng = job.rng(0x56);
    let mut worst: f64 = 0.0;
    for dim in 2..=6 {
        for _ in 0..40 {
            let p = random_orthant(&mut rng, dim, 0.05, 5.0);
            let r: Vec<f64> = p.y().iter().map(|y| 1.0 + y).collect();
            let neg_x: Vec<f64> = p.x().iter().map(|x| -x).collect();
            let expected = (1.0 + p.t()).powi(dim as i32 - 1);
            let closed = det_arrow(&r, &neg_x)?;
            worst = worst.max((closed - expected).abs() / expected.abs().max(1.0));
        }
    }
    Ok(worst)
}

fn smap_injectivity_probe(job: &Job) -> Result<f64> {
    let mut rng = job.rng(0x57);
    let mut failures = 0.0;
    for dim in 2..=3 {
        for _ in 0..3 {
            let p = random_orthant(&mut rng, dim, 0.5, 3.0);
            let q = apply_s(&p);
            let lo: Vec<f64> = p.x().iter().map(|x| x + 1.0).collect();
            let hi: Vec<f64> = p.x().iter().map(|x| x + 11.0).collect();
            let (_, residual) = grid_search(&q, &lo, &hi, 13, 18);
            if residual < 1e-6 {
                failures += 1.0;
            }
        }
    }
    Ok(failures)
}

// ---------------------------------------------------------------------------
// eigenstate

fn eigenstate_local_rules(job: &Job) -> Result<f64> {
    let len = capped_len(job.n(), job.config.max_word_len.min(5), 100_000);
    let canonical = local_rules_residual(&job.canonical, len)?;
    let general = local_rules_residual(job.canonical.as_general(), len)?;
    Ok(canonical.max(general))
}

fn eigenstate_eigen_relation(job: &Job) -> Result<f64> {
    let len = capped_len(job.n(), (job.config.max_word_len + 1).min(6), 200_000);
    let canonical = eigenstate_residual(&job.canonical, len)?;
    let general = eigenstate_residual(job.canonical.as_general(), len)?;
    Ok(canonical.max(general))
}

/// Largest Gram order checked: the full spec depth at ranks 2 and 3, a
/// size-capped depth above.
fn gram_depth(rank: usize) -> usize {
    match rank {
        2 => 5,
        3 => 4,
        _ => {
            let mut k = 1;
            while k < 4 && rank.pow(k as u32 + 1) <= 700 {
                k += 1;
            }
            k
        }
    }
}

fn eigenstate_gram_psd(job: &Job) -> Result<f64> {
    let tol = job.config.tol("eigenstate.gram_psd", 1e-9);
    let mut worst: f64 = 0.0;
    for k in 1..=gram_depth(job.n()) {
        let report = psd_report(&gram_direct(&job.canonical, k)?, tol)?;
        worst = worst.max((-report.min_eigenvalue).max(0.0));
    }
    Ok(worst)
}

fn eigenstate_gram_recursion(job: &Job) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 1..=gram_depth(job.n()) {
        let direct = gram_direct(&job.canonical, k)?;
        let recursive = gram_recursive(job.canonical.as_general(), k)?;
        worst = worst.max((direct - recursive).abs().max());
    }
    Ok(worst)
}

fn eigenstate_b_minus_x1(job: &Job) -> Result<f64> {
    let report = psd_report(
        &b_minus_x1(job.canonical.as_general()),
        job.config.tol("eigenstate.b_minus_x1", 1e-12),
    )?;
    Ok((-report.min_eigenvalue).max(0.0))
}

fn eigenstate_isometry(job: &Job) -> Result<f64> {
    let n = job.n();
    let mut k_max = 1;
    while k_max < 3 && n.pow(k_max as u32 + 1) <= 2_000 {
        k_max += 1;
    }
    let mut worst: f64 = 0.0;
    for k in 1..=k_max {
        worst = worst.max(isometry_residual(&job.canonical, k)?);
    }
    Ok(worst)
}

fn eigenstate_route_agreement(job: &Job) -> Result<f64> {
    let len = capped_len(job.n(), job.config.max_word_len.min(5), 100_000);
    canonical_general_agreement(&job.canonical, len)
}

fn eigenstate_outer_psd(job: &Job) -> Result<f64> {
    let outer = outer_boundary_state(job.config.c.clone())?;
    let tol = job.config.tol("eigenstate.outer_psd", 1e-9);
    let mut k_max = 1;
    while k_max < 4 && job.n().pow(k_max as u32 + 1) <= 700 {
        k_max += 1;
    }
    let mut worst: f64 = 0.0;
    for k in 1..=k_max {
        let report = psd_report(&gram_direct(&outer, k)?, tol)?;
        worst = worst.max((-report.min_eigenvalue).max(0.0));
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// boundary

/// Sweep length for exact-integration checks, shortened as the cylinder
/// count (2n)(2n-1)^d grows.
fn boundary_len(job: &Job) -> usize {
    let n = job.n();
    let want = job.config.max_word_len.min(if n == 2 { 5 } else { 4 });
    let mut len = want.max(1);
    while len > 1 {
        let cost: usize = (0..=len)
            .map(|l| words_of_len(n, l).saturating_mul(words_of_len(n, l + 1)))
            .sum();
        if cost <= 5_000_000 {
            break;
        }
        len -= 1;
    }
    len
}

fn boundary_integration(job: &Job) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in enumerate_words(job.n(), boundary_len(job))? {
        let integral = integrate_p(&job.canonical, &job.measure, &s)?;
        let direct = phi_eval(&job.canonical, &s)?;
        worst = worst.max((integral - direct).abs());
    }
    Ok(worst)
}

fn boundary_depth_stability(job: &Job) -> Result<f64> {
    let len = boundary_len(job).min(3);
    let mut worst: f64 = 0.0;
    for s in enumerate_words(job.n(), len)? {
        let minimal = integrate_p_at_depth(&job.canonical, &job.measure, &s, s.len() + 1)?;
        let deeper = integrate_p_at_depth(&job.canonical, &job.measure, &s, s.len() + 2)?;
        worst = worst.max((minimal - deeper).abs());
    }
    Ok(worst)
}

fn boundary_compatibility(job: &Job) -> Result<f64> {
    job.measure.compatibility_residual(job.config.max_word_len.min(5))
}

fn boundary_rightsum(job: &Job) -> Result<f64> {
    rightsum_residual(&job.canonical, 2)
}

fn boundary_h_identity(job: &Job) -> Result<f64> {
    h_identity_max(&job.canonical, &job.measure, job.config.max_word_len.min(4))
}

fn boundary_w_intertwiner(job: &Job) -> Result<f64> {
    w_intertwiner_residual(&job.canonical, 2)
}

fn boundary_rn_consistency(job: &Job) -> Result<f64> {
    rn_consistency_residual(&job.canonical, &job.measure, 2)
}

fn boundary_sigma_ratio(job: &Job) -> Result<f64> {
    sigma_ratio_residual(&job.measure, job.config.max_word_len.min(5))
}

fn boundary_constancy(job: &Job) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for r in enumerate_words(job.n(), 2)? {
        if r.is_identity() {
            continue;
        }
        if !check_constancy(&job.canonical, &r)? {
            worst = worst.max(1.0);
        }
        worst = worst.max(constancy_residual(&job.canonical, &r, r.len() + 1)?);
    }
    Ok(worst)
}

fn boundary_monte_carlo(job: &Job) -> Result<f64> {
    let samples = 100_000;
    let len = job.config.max_word_len.min(if job.n() == 2 { 3 } else { 2 });
    let mut worst: f64 = 0.0;
    for (idx, s) in enumerate_words(job.n(), len)?.into_iter().enumerate() {
        let seed = (job.config.seed ^ 0xb0).wrapping_add(1_000 * idx as u64);
        let (mean, stderr) = mc_estimate(&job.canonical, &job.measure, &s, samples, seed)?;
        let diff = (mean - phi_eval(&job.canonical, &s)?).abs();
        let scaled = if stderr == 0.0 {
            if diff <= 1e-12 {
                0.0
            } else {
                1e6
            }
        } else {
            diff / (4.0 * stderr)
        };
        worst = worst.max(scaled);
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// spectral

/// Largest power with support n^k within budget, at most 6.
fn power_depth(rank: usize) -> usize {
    let mut k = 1;
    while k < 6 && rank.pow(k as u32 + 1) <= 50_000 {
        k += 1;
    }
    k
}

fn spectral_power_norms(job: &Job) -> Result<f64> {
    let c = &job.config.c;
    let x = GroupFunction::generator_combination(c)?;
    let norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut power = GroupFunction::delta(ReducedWord::identity(job.n())?);
    let mut worst: f64 = 0.0;
    for k in 1..=power_depth(job.n()) {
        power = power.convolve(&x)?;
        let expected = norm.powi(k as i32);
        worst = worst.max((power.l2_norm() - expected).abs() / expected);
    }
    Ok(worst)
}

fn spectral_power_support(job: &Job) -> Result<f64> {
    let x = GroupFunction::generator_combination(&job.config.c)?;
    let mut power = GroupFunction::delta(ReducedWord::identity(job.n())?);
    let mut failures = 0.0;
    for k in 1..=power_depth(job.n()) {
        power = power.convolve(&x)?;
        let positive = enumerate_positive(job.n(), k)?;
        if power.support_len() != positive.len() {
            failures += 1.0;
        }
        if positive.iter().any(|w| power.coefficient(w) == 0.0) {
            failures += 1.0;
        }
    }
    Ok(failures)
}

fn dominating_d0(c: &[f64]) -> f64 {
    1.0 + c.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn spectral_geometric_tail(job: &Job) -> Result<f64> {
    let d0 = dominating_d0(&job.config.c);
    let depth = 5;
    let actual = geometric_inverse_residual(d0, &job.config.c, depth)?;
    let analytic = geometric_tail(d0, &job.config.c, depth)?;
    Ok((actual - analytic).abs() / analytic)
}

fn spectral_geometric_monotone(job: &Job) -> Result<f64> {
    let d0 = dominating_d0(&job.config.c);
    let mut failures = 0.0;
    let mut previous = f64::INFINITY;
    for depth in 1..=6 {
        let residual = geometric_inverse_residual(d0, &job.config.c, depth)?;
        if residual >= previous {
            failures += 1.0;
        }
        previous = residual;
    }
    Ok(failures)
}

fn spectral_convolution_assoc(job: &Job) -> Result<f64> {
    let n = job.n();
    let mut rng = job.rng(0x70);
    let sparse = |rng: &mut ChaCha8Rng| -> Result<GroupFunction> {
        let terms = (0..6).map(|_| {
            let w = random_word(rng, n, 3);
            let coeff = -1.0 + 2.0 * rng.random::<f64>();
            (w, coeff)
        });
        GroupFunction::from_terms(n, terms.collect::<Vec<_>>())
    };
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = sparse(&mut rng)?;
        let g = sparse(&mut rng)?;
        let h = sparse(&mut rng)?;
        let left = f.convolve(&g)?.convolve(&h)?;
        let right = f.convolve(&g.convolve(&h)?)?;
        let diff = left.sub(&right)?;
        for (_, v) in diff.terms() {
            worst = worst.max(v.abs());
        }
    }
    Ok(worst)
}

fn spectral_annulus(job: &Job) -> Result<f64> {
    let c = &job.config.c;
    let reduced = reduced_spectrum(c)?;
    let cv = CoefficientVector::new(c.clone(), job.config.lambda)?;
    let (lo, hi) = cv.admissible_interval();
    let mut worst = (reduced.inner_radius - lo).abs().max((reduced.outer_radius - hi).abs());

    let universal = universal_spectrum(c)?;
    let sum: f64 = c.iter().sum();
    let max = c.iter().copied().fold(0.0f64, f64::max);
    worst = worst.max((universal.inner_radius - (2.0 * max - sum).max(0.0)).abs());
    worst = worst.max((universal.outer_radius - sum).abs());
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn job(c: Vec<f64>, lambda: f64, max_word_len: usize) -> Job {
        Job::new(JobConfig {
            n: c.len(),
            c,
            lambda,
            max_word_len,
            seed: 7,
            tolerances: BTreeMap::new(),
        })
        .unwrap()
    }

    #[test]
    fn check_names_are_unique_and_dotted() {
        let mut names: Vec<&str> = CHECKS.iter().map(|c| c.name).collect();
        names.sort_unstable();
        let before = names.len();
        names.dedup();
        assert_eq!(before, names.len());
        assert!(CHECKS.iter().all(|c| c.name.contains('.')));
    }

    #[test]
    fn whole_suite_passes_on_the_symmetric_pair() {
        let job = job(vec![1.0, 1.0], 1.0, 3);
        let records = run_all(&job).unwrap();
        assert_eq!(records.len(), CHECKS.len());
        for record in &records {
            assert!(
                record.pass,
                "{} failed: {:.3e} > {:.3e}",
                record.name, record.max_residual, record.tolerance
            );
        }
    }

    #[test]
    fn tolerance_overrides_flip_outcomes() {
        let mut config = JobConfig {
            n: 2,
            c: vec![2.0, 1.0],
            lambda: 2.0,
            max_word_len: 2,
            seed: 7,
            tolerances: BTreeMap::new(),
        };
        config.tolerances.insert("smap.round_trip".into(), 0.0);
        let job = Job::new(config).unwrap();
        let records = run_all(&job).unwrap();
        let record = records.iter().find(|r| r.name == "smap.round_trip").unwrap();
        assert!(!record.pass, "zero tolerance cannot pass on float data");
    }

    #[test]
    fn capped_len_respects_budget() {
        assert_eq!(capped_len(2, 6, usize::MAX), 6);
        assert!(capped_len(8, 6, 30_000) < 6);
        assert_eq!(capped_len(2, 1, 1), 1);
    }
}
