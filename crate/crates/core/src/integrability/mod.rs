//! Integrability diagnostics for a contact system `F = (f_0, .., f_n)`:
//! involution, rank, projection onto ray preimages `F^{-1}(R+ Lambda)`,
//! coisotropy and tangency of those preimages, plus the action-angle
//! construction in [`action_angle`] on top of a verified [`section`].

pub mod action_angle;
pub mod section;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::contact::ContactSystem;
use crate::error::{Error, Result};
use crate::linalg;

pub use action_angle::{angle_solve, darboux_verify, period_detect, ActionAngleResult, AngleSolveConfig};
pub use section::{verify_section, SectionReport, SectionSpec, Sign};

/// Relative tolerance `||F(x) - r Lambda|| / ||F(x)||` for ray membership.
pub const RAY_MEMBERSHIP_TOL: f64 = 1e-8;

/// Sample points together with the seed that produced them, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub seed: Option<u64>,
    pub points: Vec<Vec<f64>>,
}

impl Samples {
    pub fn from_region(region: &crate::Region, count: usize, seed: u64) -> Self {
        Samples {
            seed: Some(seed),
            points: region.sample_points(count, seed),
        }
    }

    pub fn given(points: Vec<Vec<f64>>) -> Self {
        Samples { seed: None, points }
    }
}

/// Outcome of a sampled residual check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: &'static str,
    /// Worst residual over the samples.
    pub residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: Option<u64>,
    pub worst_point: Option<Vec<f64>>,
    pub pass: bool,
}

impl CheckReport {
    fn from_max(
        check: &'static str,
        samples: &Samples,
        tolerance: f64,
        residuals: Vec<f64>,
    ) -> Self {
        let mut residual = 0.0_f64;
        let mut worst_point = None;
        for (r, x) in residuals.iter().zip(&samples.points) {
            // NaN compares as worse than anything
            let r = if r.is_nan() { f64::INFINITY } else { *r };
            if worst_point.is_none() || r > residual {
                residual = r;
                worst_point = Some(x.clone());
            }
        }
        CheckReport {
            check,
            residual,
            tolerance,
            samples: samples.points.len(),
            seed: samples.seed,
            worst_point,
            pass: residual < tolerance,
        }
    }
}

/// Evaluates `f` at every sample in parallel, keeping sample order.
fn per_sample(samples: &Samples, f: impl Fn(&[f64]) -> Result<f64> + Sync) -> Result<Vec<f64>> {
    samples.points.par_iter().map(|x| f(x)).collect()
}

/// All pairwise brackets `{f_a, f_b}` at `x`.
fn bracket_matrix(system: &ContactSystem, x: &[f64]) -> Result<DMatrix<f64>> {
    let fs = system.integrals();
    let k = fs.len();
    let mut m = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a + 1..k {
            let v = system.chart().jacobi_bracket_at(&fs[a], &fs[b], x)?;
            m[(a, b)] = v;
            m[(b, a)] = -v;
        }
    }
    Ok(m)
}

/// `max |{f_a, f_b}|` over the samples and all pairs.
pub fn involution_check(system: &ContactSystem, samples: &Samples, tol: f64) -> Result<CheckReport> {
    let residuals = per_sample(samples, |x| Ok(bracket_matrix(system, x)?.abs().max()))?;
    Ok(CheckReport::from_max("involution", samples, tol, residuals))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub min_rank: usize,
    pub required: usize,
    /// Relative singular value cutoff.
    pub tolerance: f64,
    /// Smallest `sigma_n / sigma_max` seen, the margin of the required rank.
    pub min_relative_singular_value: f64,
    pub samples: usize,
    pub seed: Option<u64>,
    pub worst_point: Option<Vec<f64>>,
    pub pass: bool,
}

/// Numerical rank of `TF`: singular values above `tol * sigma_max`.
pub fn numerical_rank(jac: &DMatrix<f64>, tol: f64) -> (usize, Vec<f64>) {
    let mut sv: Vec<f64> = jac.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let max = sv.first().copied().unwrap_or(0.0);
    let rank = if max == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > tol * max).count()
    };
    (rank, sv)
}

/// Minimum rank of `TF` over the samples; passes when it is at least `n`.
pub fn rank_check(system: &ContactSystem, samples: &Samples, tol: f64) -> Result<RankReport> {
    let n = system.chart().n();
    let per_point: Vec<(usize, f64)> = samples
        .points
        .par_iter()
        .map(|x| {
            let (rank, sv) = numerical_rank(&system.jacobian_at(x)?, tol);
            let max = sv.first().copied().unwrap_or(0.0);
            let margin = match sv.get(n.saturating_sub(1)) {
                Some(s) if max > 0.0 && n > 0 => s / max,
                _ if n == 0 => 1.0,
                _ => 0.0,
            };
            Ok((rank, margin))
        })
        .collect::<Result<_>>()?;
    let mut min_rank = usize::MAX;
    let mut worst_point = None;
    let mut margin = f64::INFINITY;
    for ((rank, m), x) in per_point.iter().zip(&samples.points) {
        if *rank < min_rank {
            min_rank = *rank;
            worst_point = Some(x.clone());
        }
        margin = margin.min(*m);
    }
    if samples.points.is_empty() {
        min_rank = 0;
        margin = 0.0;
    }
    Ok(RankReport {
        min_rank,
        required: n,
        tolerance: tol,
        min_relative_singular_value: margin,
        samples: samples.points.len(),
        seed: samples.seed,
        worst_point,
        pass: !samples.points.is_empty() && min_rank >= n,
    })
}

fn check_lambda(system: &ContactSystem, lambda: &[f64]) -> Result<()> {
    if lambda.len() != system.integrals().len() {
        return Err(Error::Dimension(format!(
            "ray direction has {} components for {} integrals",
            lambda.len(),
            system.integrals().len()
        )));
    }
    if !(linalg::norm(lambda) > 0.0) || lambda.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("ray direction must be finite and nonzero".into()));
    }
    Ok(())
}

/// Best scale `r` with `F(x) ~ r Lambda` and the relative residual
/// `||F(x) - r Lambda|| / ||F(x)||`.
pub fn ray_membership(system: &ContactSystem, lambda: &[f64], x: &[f64]) -> Result<(f64, f64)> {
    check_lambda(system, lambda)?;
    let values = system.values_at(x)?;
    let r = linalg::dot(&values, lambda) / linalg::dot(lambda, lambda);
    let diff: Vec<f64> = values.iter().zip(lambda).map(|(v, l)| v - r * l).collect();
    let scale = linalg::norm(&values);
    let residual = if scale == 0.0 { f64::INFINITY } else { linalg::norm(&diff) / scale };
    Ok((r, residual))
}

/// A point on the ray preimage with its scale `F(x) = r Lambda`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayPoint {
    pub x: Vec<f64>,
    pub r: f64,
    pub residual: f64,
    pub iterations: usize,
}

const RAY_PROJECT_TOL: f64 = 1e-10;
const RAY_PROJECT_MAX_ITER: usize = 100;

/// Gauss–Newton with minimum-norm steps on `F(x) - r Lambda` over `(x, r)`.
pub fn ray_project(system: &ContactSystem, lambda: &[f64], seed: &[f64]) -> Result<RayPoint> {
    check_lambda(system, lambda)?;
    let d = system.chart().dim();
    if seed.len() != d {
        return Err(Error::Dimension(format!("seed has {} components, chart has {d}", seed.len())));
    }
    let k = lambda.len();
    let mut x = seed.to_vec();
    let mut r = linalg::dot(&system.values_at(&x)?, lambda) / linalg::dot(lambda, lambda);
    let residual_at = |x: &[f64], r: f64| -> Result<Vec<f64>> {
        let v = system.values_at(x)?;
        Ok(v.iter().zip(lambda).map(|(f, l)| f - r * l).collect())
    };
    let mut res = residual_at(&x, r)?;
    let mut iterations = 0;
    while linalg::norm(&res) >= RAY_PROJECT_TOL {
        if iterations == RAY_PROJECT_MAX_ITER {
            return Err(Error::NoConvergence {
                iterations,
                residual: linalg::norm(&res),
            });
        }
        iterations += 1;
        let jf = system.jacobian_at(&x)?;
        let j = DMatrix::from_fn(k, d + 1, |a, b| if b < d { jf[(a, b)] } else { -lambda[a] });
        let step = j
            .svd(true, true)
            .solve(&DVector::from_column_slice(&res), 1e-14)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        for b in 0..d {
            x[b] -= step[b];
        }
        r -= step[d];
        res = residual_at(&x, r)?;
    }
    if !system.region().contains(&x) {
        return Err(Error::OutsideRegion { point: x });
    }
    if !(r > 0.0) {
        return Err(Error::NotOnRay {
            point: x,
            residual: linalg::norm(&res),
        });
    }
    Ok(RayPoint {
        x,
        r,
        residual: linalg::norm(&res),
        iterations,
    })
}

fn require_on_ray(system: &ContactSystem, lambda: &[f64], x: &[f64]) -> Result<()> {
    let (r, residual) = ray_membership(system, lambda, x)?;
    if !(r > 0.0) || !(residual < RAY_MEMBERSHIP_TOL) {
        return Err(Error::NotOnRay {
            point: x.to_vec(),
            residual,
        });
    }
    Ok(())
}

/// `max |f_a {f_b, f_c} + f_c {f_a, f_b} + f_b {f_c, f_a}|` over index
/// triples at points of the ray preimage. With two integrals every triple
/// repeats an index and the sum vanishes identically.
pub fn coisotropy_check(
    system: &ContactSystem,
    lambda: &[f64],
    points: &Samples,
    tol: f64,
) -> Result<CheckReport> {
    let residuals = per_sample(points, |x| {
        require_on_ray(system, lambda, x)?;
        let f = system.values_at(x)?;
        let b = bracket_matrix(system, x)?;
        let k = f.len();
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for bb in a + 1..k {
                for c in bb + 1..k {
                    let s = f[a] * b[(bb, c)] + f[c] * b[(a, bb)] + f[bb] * b[(c, a)];
                    worst = worst.max(s.abs());
                }
            }
        }
        Ok(worst)
    })?;
    Ok(CheckReport::from_max("coisotropy", points, tol, residuals))
}

/// `max |f_a X_c(f_b) - f_b X_c(f_a)|`: every `X_{f_c}` annihilates the
/// forms `f_a df_b - f_b df_a` cutting out the ray preimage.
pub fn tangency_check(
    system: &ContactSystem,
    lambda: &[f64],
    points: &Samples,
    tol: f64,
) -> Result<CheckReport> {
    let chart = system.chart();
    let residuals = per_sample(points, |x| {
        require_on_ray(system, lambda, x)?;
        let fs = system.integrals();
        let jets = fs
            .iter()
            .map(|f| f.eval_jet1(x))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut worst: f64 = 0.0;
        for fc in fs {
            let xc = chart.hamiltonian_field_at(fc, x)?;
            let derivs: Vec<f64> = jets.iter().map(|j| linalg::dot(&j.grad, &xc)).collect();
            for a in 0..fs.len() {
                for b in a + 1..fs.len() {
                    let s = jets[a].value * derivs[b] - jets[b].value * derivs[a];
                    worst = worst.max(s.abs());
                }
            }
        }
        Ok(worst)
    })?;
    Ok(CheckReport::from_max("tangency", points, tol, residuals))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipativeReport {
    pub coisotropy: CheckReport,
    pub rank: RankReport,
    pub pass: bool,
}

/// The dissipative-map criterion, which reduces to coisotropy of the ray
/// preimage together with regularity of `F` there.
pub fn dissipative_map_check(
    system: &ContactSystem,
    lambda: &[f64],
    points: &Samples,
    tol: f64,
) -> Result<DissipativeReport> {
    let coisotropy = coisotropy_check(system, lambda, points, tol)?;
    let rank = rank_check(system, points, 1e-10)?;
    let pass = coisotropy.pass && rank.pass;
    Ok(DissipativeReport { coisotropy, rank, pass })
}
