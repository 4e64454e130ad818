//! Numerical action-angle coordinates.
//!
//! Given a horizontal section `chi` of the lifted integrals, the angles of a
//! point `x` are the times `y` with `Phi(E^T y; chi(s F^S(x))) = x`, where
//! `Phi` is the group action of the lifted flows and `E` the lattice basis.
//! The actions are `A = E F(x)`; normalising by a pivot action `A_k` gives
//! `A~_i = -A_i / A_k` and the Darboux form `-eta / A_k = dy^k - A~_i dy^i`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::section::{SectionSpec, Sign};
use super::{CheckReport, Samples};
use crate::error::{Error, Result};
use crate::flows::{flow_map, group_action, integrate, IntegratorConfig, SympField, TrajectoryStatus, VectorField};
use crate::linalg;
use crate::symplectic::SympSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSolveConfig {
    pub integrator: IntegratorConfig,
    /// Required `||Phi(E^T y; base) - x||`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Central-difference step for the Jacobian of the group action.
    pub fd_step: f64,
    /// Step halvings allowed per iteration.
    pub max_halvings: usize,
    /// Largest flow time `|(E^T y)_a|` a trial step may ask for; points
    /// farther along their orbit are reported as not converging instead of
    /// integrating for ever.
    pub max_time: f64,
}

impl Default for AngleSolveConfig {
    fn default() -> Self {
        AngleSolveConfig {
            integrator: IntegratorConfig::default(),
            tol: 1e-8,
            max_iterations: 50,
            fd_step: 1e-6,
            max_halvings: 20,
            max_time: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionAngleResult {
    /// Query point `(x, r)`.
    pub point: Vec<f64>,
    /// Orbit base point `chi(s F^S(x))`.
    pub base_point: Vec<f64>,
    /// Angles `y^a`.
    pub y: Vec<f64>,
    /// Actions `A_a = M_a^b f_b(x)`.
    pub a: Vec<f64>,
    /// Lifted actions `A^S_a = M_a^b f^S_b(x, r)`.
    pub a_sigma: Vec<f64>,
    /// Index `k` of the normalising action.
    pub pivot: usize,
    /// `-A_i / A_k` for `i != k`, in index order.
    pub a_tilde: Vec<f64>,
    /// Basis change `M` (rows are lattice vectors).
    pub m_matrix: Vec<Vec<f64>>,
    /// `N = M^{-1}`.
    pub n_matrix: Vec<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
}

impl ActionAngleResult {
    /// Angular velocities `dy^a/dt` along the flow of `f_b`: row `b` of `N`.
    pub fn frequencies(&self, b: usize) -> Vec<f64> {
        self.n_matrix[b].clone()
    }

    /// Indices `i != pivot` matching the entries of `a_tilde`.
    pub fn non_pivot(&self) -> Vec<usize> {
        (0..self.y.len()).filter(|&i| i != self.pivot).collect()
    }
}

fn lattice(section: &SectionSpec, k: usize) -> DMatrix<f64> {
    match &section.lattice {
        Some(rows) => DMatrix::from_fn(k, k, |a, b| rows[a][b]),
        None => DMatrix::identity(k, k),
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Solves for the angles and actions of `point = (x, r)`.
pub fn angle_solve(
    system: &SympSystem,
    section: &SectionSpec,
    convention: Sign,
    point: &[f64],
    config: &AngleSolveConfig,
) -> Result<ActionAngleResult> {
    section.validate(system)?;
    let chart = system.chart();
    let dim = chart.dim();
    if point.len() != dim {
        return Err(Error::Dimension(format!(
            "point has {} components, symplectization has {dim}",
            point.len()
        )));
    }
    let k = system.integrals().len();
    let lifted = system.values_at(point)?;
    let lambda: Vec<f64> = lifted.iter().map(|v| convention.factor() * v).collect();
    if !section.domain.contains(&lambda) {
        return Err(Error::InvalidSection(format!(
            "{}: parameters {lambda:?} lie outside the section domain",
            section.name
        )));
    }
    let base = section.eval(&lambda)?;

    let e = lattice(section, k);
    let n_inv = e
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidSection(format!("{}: lattice basis is singular", section.name)))?;
    let fields: Vec<SympField> = system.integrals().iter().map(|f| SympField { chart, f }).collect();
    let refs: Vec<&dyn VectorField> = fields.iter().map(|f| f as &dyn VectorField).collect();
    let residual_at = |y: &[f64]| -> Result<Vec<f64>> {
        let t = e.transpose() * DVector::from_column_slice(y);
        if let Some(&ti) = t.iter().find(|ti| !(ti.abs() <= config.max_time)) {
            return Err(Error::StepFailure {
                t: ti,
                reason: format!("flow time exceeds the limit of {}", config.max_time),
            });
        }
        let image = group_action(&refs, t.as_slice(), &base, &config.integrator)?;
        Ok(image.iter().zip(point).map(|(a, b)| a - b).collect())
    };
    // Failures of the flow during the search count as an infinite residual.
    let norm_at = |y: &[f64]| match residual_at(y) {
        Ok(g) => Ok((linalg::norm(&g), Some(g))),
        Err(Error::DomainExit { .. } | Error::StepFailure { .. } | Error::MaxSteps(_)) => Ok((f64::INFINITY, None)),
        Err(e) => Err(e),
    };

    let mut y = vec![0.0; k];
    let mut g = residual_at(&y)?;
    let mut norm = linalg::norm(&g);
    let mut iterations = 0;
    let mut polished = false;
    loop {
        if norm < config.tol {
            if polished {
                break;
            }
            polished = true;
        }
        if iterations == config.max_iterations {
            if norm < config.tol {
                break;
            }
            return Err(Error::NoConvergence {
                iterations,
                residual: norm,
            });
        }
        iterations += 1;
        let h = config.fd_step;
        let mut cols = Vec::with_capacity(k);
        for j in 0..k {
            let mut yp = y.clone();
            yp[j] += h;
            let mut ym = y.clone();
            ym[j] -= h;
            let gp = residual_at(&yp)?;
            let gm = residual_at(&ym)?;
            cols.push(gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>());
        }
        let jac = DMatrix::from_fn(dim, k, |a, b| cols[b][a]);
        let step = jac
            .svd(true, true)
            .solve(&DVector::from_column_slice(&g), 1e-14)
            .map_err(|m| Error::InvalidInput(m.to_string()))?;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=config.max_halvings {
            let trial: Vec<f64> = y.iter().zip(step.iter()).map(|(a, d)| a - scale * d).collect();
            let (trial_norm, trial_g) = norm_at(&trial)?;
            if trial_norm < norm {
                accepted = Some((trial, trial_g.expect("finite residual has a value"), trial_norm));
                break;
            }
            scale *= 0.5;
        }
        match accepted {
            Some((ty, tg, tn)) => {
                y = ty;
                g = tg;
                norm = tn;
            }
            None if norm < config.tol => break,
            None => {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: norm,
                })
            }
        }
    }

    let values = system.base().values_at(&point[..dim - 1])?;
    let a: Vec<f64> = (&e * DVector::from_vec(values)).iter().copied().collect();
    let a_sigma: Vec<f64> = (&e * DVector::from_vec(lifted)).iter().copied().collect();
    let pivot = match section.pivot {
        Some(p) => p,
        None => (0..k).fold(0, |best, i| if a[i].abs() > a[best].abs() { i } else { best }),
    };
    if a[pivot] == 0.0 {
        return Err(Error::VanishingActions { point: point.to_vec() });
    }
    let a_tilde = (0..k).filter(|&i| i != pivot).map(|i| -a[i] / a[pivot]).collect();
    Ok(ActionAngleResult {
        point: point.to_vec(),
        base_point: base,
        y,
        a,
        a_sigma,
        pivot,
        a_tilde,
        m_matrix: rows(&e),
        n_matrix: rows(&n_inv),
        residual: norm,
        iterations,
    })
}

/// Step of the central differences applied to the solved coordinates.
pub const DARBOUX_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarbouxReport {
    /// `max |(dy^k - A~_i dy^i) + eta / A_k|` over components and points.
    pub contact: CheckReport,
    /// `max |A^S_a dy^a - theta|`.
    pub symplectic: CheckReport,
    pub pass: bool,
}

/// Compares the forms built from central differences of the numerically
/// solved coordinates with `-eta / A_k` and `theta` at each point `(x, r)`.
pub fn darboux_verify(
    system: &SympSystem,
    section: &SectionSpec,
    convention: Sign,
    points: &Samples,
    config: &AngleSolveConfig,
    tol: f64,
) -> Result<DarbouxReport> {
    let chart = system.chart();
    let base_chart = system.base().chart();
    let dim = chart.dim();
    let per_point: Vec<(f64, f64)> = points
        .points
        .par_iter()
        .map(|y| {
            let centre = angle_solve(system, section, convention, y, config)?;
            let k = centre.y.len();
            let h = DARBOUX_FD_STEP;
            // dys[c][a] = d y^a / d x^c
            let mut dys = Vec::with_capacity(dim);
            for c in 0..dim {
                let mut yp = y.clone();
                yp[c] += h;
                let mut ym = y.clone();
                ym[c] -= h;
                let plus = angle_solve(system, section, convention, &yp, config)?;
                let minus = angle_solve(system, section, convention, &ym, config)?;
                dys.push(
                    plus.y.iter().zip(&minus.y).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>(),
                );
            }
            let pivot = centre.pivot;
            let eta = base_chart.eta_at(&y[..dim - 1])?;
            let a_pivot = centre.a[pivot];
            let mut contact: f64 = 0.0;
            for c in 0..dim - 1 {
                let mut form = dys[c][pivot];
                for (i, at) in centre.non_pivot().into_iter().zip(&centre.a_tilde) {
                    form -= at * dys[c][i];
                }
                contact = contact.max((form + eta[c] / a_pivot).abs());
            }
            let theta = chart.theta_at(y)?;
            let mut symplectic: f64 = 0.0;
            for c in 0..dim {
                let form: f64 = (0..k).map(|a| centre.a_sigma[a] * dys[c][a]).sum();
                symplectic = symplectic.max((form - theta[c]).abs());
            }
            Ok((contact, symplectic))
        })
        .collect::<Result<_>>()?;
    let contact = CheckReport::from_max("darboux_contact", points, tol, per_point.iter().map(|p| p.0).collect());
    let symplectic =
        CheckReport::from_max("darboux_symplectic", points, tol, per_point.iter().map(|p| p.1).collect());
    let pass = contact.pass && symplectic.pass;
    Ok(DarbouxReport {
        contact,
        symplectic,
        pass,
    })
}

/// Smallest `t` in `(0, t_max]` with `||phi_t(x0) - x0|| < tol`.
///
/// Candidate returns are the local minima of the distance to `x0` along an
/// integrated trajectory; each is refined by bisection on the sign of
/// `(phi_t(x0) - x0) . V(phi_t(x0))`, the derivative of half the squared
/// distance.
pub fn period_detect(
    field: &dyn VectorField,
    x0: &[f64],
    t_max: f64,
    tol: f64,
    config: &IntegratorConfig,
) -> Result<Option<f64>> {
    if !(t_max > 0.0) {
        return Err(Error::InvalidInput("t_max must be positive".into()));
    }
    let traj = integrate(field, x0, t_max, config)?;
    if traj.status == TrajectoryStatus::DomainExit {
        return Err(Error::DomainExit {
            t: traj.final_time(),
            point: traj.last().to_vec(),
        });
    }
    let slope = |x: &[f64]| -> Result<f64> {
        let v = field.eval(x)?;
        Ok(x.iter().zip(x0).zip(&v).map(|((a, b), c)| (a - b) * c).sum())
    };
    let distance = |x: &[f64]| linalg::norm(&x.iter().zip(x0).map(|(a, b)| a - b).collect::<Vec<_>>());
    let mut departed = false;
    let mut prev_slope = 0.0;
    for i in 1..traj.len() {
        let x = &traj.points[i];
        let s = slope(x)?;
        if !departed {
            departed = distance(x) > tol;
            prev_slope = s;
            continue;
        }
        if prev_slope < 0.0 && s >= 0.0 {
            // Minimum of the distance inside [t_{i-1}, t_i].
            let start = &traj.points[i - 1];
            let t0 = traj.times[i - 1];
            let (mut lo, mut hi) = (0.0, traj.times[i] - t0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if slope(&flow_map(field, mid, start, config)?)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = t0 + 0.5 * (lo + hi);
            let x = flow_map(field, t - t0, start, config)?;
            if distance(&x) < tol {
                return Ok(Some(t));
            }
        }
        prev_slope = s;
    }
    Ok(None)
}
