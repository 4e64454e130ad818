//! Integration of contact and symplectic Hamiltonian flows, the group
//! action of a family of commuting flows, and dissipation monitoring.

use serde::{Deserialize, Serialize};

use crate::contact::ContactChart;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::region::Region;
use crate::symplectic::SympChart;

/// Smallest adaptive step before the integrator gives up.
const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    /// Classical fixed-step Runge–Kutta.
    Rk4 { step: f64 },
    /// Runge–Kutta–Fehlberg 4(5) with local extrapolation.
    Rkf45 { rel_tol: f64, abs_tol: f64, max_step: f64 },
}

// `deny_unknown_fields` does not combine with `flatten`; `Method` rejects
// unknown keys instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    #[serde(flatten)]
    pub method: Method,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_max_steps() -> usize {
    1_000_000
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rkf45 {
                rel_tol: 1e-10,
                abs_tol: 1e-12,
                max_step: 0.1,
            },
            max_steps: default_max_steps(),
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4 { step },
            max_steps: default_max_steps(),
        }
    }

    pub fn rkf45(rel_tol: f64, abs_tol: f64, max_step: f64) -> Self {
        IntegratorConfig {
            method: Method::Rkf45 {
                rel_tol,
                abs_tol,
                max_step,
            },
            max_steps: default_max_steps(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.method {
            Method::Rk4 { step } => step > 0.0 && step.is_finite(),
            Method::Rkf45 {
                rel_tol,
                abs_tol,
                max_step,
            } => rel_tol > 0.0 && abs_tol > 0.0 && max_step > 0.0 && max_step.is_finite(),
        };
        if !ok {
            return Err(Error::InvalidInput("integrator step and tolerances must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// A time-independent vector field on an open domain.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }
}

/// The contact Hamiltonian field `X_f`.
pub struct ContactField<'a> {
    pub chart: &'a ContactChart,
    pub f: &'a Expr,
}

impl VectorField for ContactField<'_> {
    fn dim(&self) -> usize {
        self.chart.dim()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.chart.hamiltonian_field_at(self.f, x).map(|v| v.into_inner())
    }
}

/// The symplectic Hamiltonian field `X_F`; the domain is `r > 0`.
pub struct SympField<'a> {
    pub chart: &'a SympChart,
    pub f: &'a Expr,
}

impl VectorField for SympField<'_> {
    fn dim(&self) -> usize {
        self.chart.dim()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.chart.hamiltonian_field_at(self.f, x).map(|v| v.into_inner())
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x[self.chart.fiber_index()] > 0.0
    }
}

/// Restricts a field to a box.
pub struct Clamped<'a, F: VectorField> {
    pub field: F,
    pub region: &'a Region,
}

impl<F: VectorField> VectorField for Clamped<'_, F> {
    fn dim(&self) -> usize {
        self.field.dim()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.field.eval(x)
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        self.region.contains(x) && self.field.in_domain(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    /// The flow left the domain; the trajectory stops at the last accepted
    /// point inside it.
    DomainExit,
}

/// Per-sample step record. The first sample has `step = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: f64,
    /// Scaled local error estimate (`<= 1` accepted); zero for fixed steps.
    pub error: f64,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Monotone in the direction of integration (decreasing for `t < 0`).
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub diagnostics: Vec<StepRecord>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.points.last().expect("trajectory has at least the initial point")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least the initial point")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn axpy(x: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut y = x.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for (yi, ki) in y.iter_mut().zip(k.iter()) {
                *yi += h * c * ki;
            }
        }
    }
    y
}

/// Evaluates the field, mapping points outside the domain to `None`.
fn stage(field: &dyn VectorField, x: &[f64]) -> Result<Option<Vec<f64>>> {
    if !x.iter().all(|v| v.is_finite()) || !field.in_domain(x) {
        return Ok(None);
    }
    match field.eval(x) {
        Ok(v) if v.iter().all(|c| c.is_finite()) => Ok(Some(v)),
        Ok(_) => Ok(None),
        // Expression domains and degenerate forms bound the flow's domain.
        Err(Error::Expr(_) | Error::SingularFlat { .. } | Error::SingularOmega { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn rk4_step(field: &dyn VectorField, x: &[f64], k1: &[f64], h: f64) -> Result<Option<Vec<f64>>> {
    let Some(k2) = stage(field, &axpy(x, h, &[(0.5, k1)]))? else {
        return Ok(None);
    };
    let Some(k3) = stage(field, &axpy(x, h, &[(0.5, &k2)]))? else {
        return Ok(None);
    };
    let Some(k4) = stage(field, &axpy(x, h, &[(1.0, &k3)]))? else {
        return Ok(None);
    };
    Ok(Some(axpy(
        x,
        h,
        &[(1.0 / 6.0, k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
    )))
}

/// Fehlberg stages. Returns the fifth-order solution and the difference to
/// the embedded fourth-order one.
fn rkf45_step(
    field: &dyn VectorField,
    x: &[f64],
    k1: &[f64],
    h: f64,
) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let Some(k2) = stage(field, &axpy(x, h, &[(0.25, k1)]))? else {
        return Ok(None);
    };
    let Some(k3) = stage(field, &axpy(x, h, &[(3.0 / 32.0, k1), (9.0 / 32.0, &k2)]))? else {
        return Ok(None);
    };
    let Some(k4) = stage(
        field,
        &axpy(
            x,
            h,
            &[(1932.0 / 2197.0, k1), (-7200.0 / 2197.0, &k2), (7296.0 / 2197.0, &k3)],
        ),
    )?
    else {
        return Ok(None);
    };
    let Some(k5) = stage(
        field,
        &axpy(
            x,
            h,
            &[
                (439.0 / 216.0, k1),
                (-8.0, &k2),
                (3680.0 / 513.0, &k3),
                (-845.0 / 4104.0, &k4),
            ],
        ),
    )?
    else {
        return Ok(None);
    };
    let Some(k6) = stage(
        field,
        &axpy(
            x,
            h,
            &[
                (-8.0 / 27.0, k1),
                (2.0, &k2),
                (-3544.0 / 2565.0, &k3),
                (1859.0 / 4104.0, &k4),
                (-11.0 / 40.0, &k5),
            ],
        ),
    )?
    else {
        return Ok(None);
    };
    let fifth = axpy(
        x,
        h,
        &[
            (16.0 / 135.0, k1),
            (6656.0 / 12825.0, &k3),
            (28561.0 / 56430.0, &k4),
            (-9.0 / 50.0, &k5),
            (2.0 / 55.0, &k6),
        ],
    );
    let fourth = axpy(
        x,
        h,
        &[
            (25.0 / 216.0, k1),
            (1408.0 / 2565.0, &k3),
            (2197.0 / 4104.0, &k4),
            (-1.0 / 5.0, &k5),
        ],
    );
    let err = fifth.iter().zip(&fourth).map(|(a, b)| a - b).collect();
    Ok(Some((fifth, err)))
}

/// Integrates `x' = V(x)` from `x0` over `[0, t_final]` (or `[t_final, 0]`
/// for negative times).
///
/// Leaving the field's domain ends the trajectory early with
/// [`TrajectoryStatus::DomainExit`]; other failures are errors.
pub fn integrate(
    field: &dyn VectorField,
    x0: &[f64],
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if x0.len() != field.dim() {
        return Err(Error::Dimension(format!(
            "initial point has {} components, field has {}",
            x0.len(),
            field.dim()
        )));
    }
    if !t_final.is_finite() {
        return Err(Error::InvalidInput("final time must be finite".into()));
    }
    let mut traj = Trajectory {
        times: vec![0.0],
        points: vec![x0.to_vec()],
        diagnostics: vec![StepRecord {
            step: 0.0,
            error: 0.0,
            rejected: 0,
        }],
        status: TrajectoryStatus::Completed,
    };
    let Some(mut k1) = stage(field, x0)? else {
        if field.in_domain(x0) {
            // Evaluation failed inside the domain: report the cause.
            field.eval(x0)?;
        }
        return Err(Error::DomainExit {
            t: 0.0,
            point: x0.to_vec(),
        });
    };
    if t_final == 0.0 {
        return Ok(traj);
    }
    let dir = t_final.signum();
    let span = t_final.abs();
    let mut t = 0.0_f64;
    let mut x = x0.to_vec();
    let mut steps = 0;

    match config.method {
        Method::Rk4 { step } => {
            while t < span {
                if steps >= config.max_steps {
                    return Err(Error::MaxSteps(config.max_steps));
                }
                steps += 1;
                let h = step.min(span - t);
                let next = rk4_step(field, &x, &k1, dir * h)?;
                let next_k = match &next {
                    Some(y) => stage(field, y)?,
                    None => None,
                };
                let (Some(y), Some(k)) = (next, next_k) else {
                    traj.status = TrajectoryStatus::DomainExit;
                    return Ok(traj);
                };
                t = if span - t <= step { span } else { t + h };
                x = y;
                k1 = k;
                traj.times.push(dir * t);
                traj.points.push(x.clone());
                traj.diagnostics.push(StepRecord {
                    step: h,
                    error: 0.0,
                    rejected: 0,
                });
            }
        }
        Method::Rkf45 {
            rel_tol,
            abs_tol,
            max_step,
        } => {
            let mut h = max_step.min(span).min(1e-2);
            let mut rejected = 0;
            while t < span {
                if steps >= config.max_steps {
                    return Err(Error::MaxSteps(config.max_steps));
                }
                steps += 1;
                let last = span - t <= h;
                let h_try = if last { span - t } else { h };
                let result = rkf45_step(field, &x, &k1, dir * h_try)?;
                let accepted = match result {
                    None => None,
                    Some((y, err)) => {
                        let scaled = y
                            .iter()
                            .zip(&x)
                            .zip(&err)
                            .map(|((yn, yo), e)| e.abs() / (abs_tol + rel_tol * yn.abs().max(yo.abs())))
                            .fold(0.0, f64::max);
                        if !scaled.is_finite() {
                            None
                        } else {
                            let factor = if scaled == 0.0 {
                                5.0
                            } else {
                                (0.9 * scaled.powf(-0.2)).clamp(0.2, 5.0)
                            };
                            if scaled <= 1.0 {
                                stage(field, &y)?.map(|k| (y, k, scaled, factor))
                            } else {
                                rejected += 1;
                                h = h_try * factor;
                                if h < MIN_STEP * t.max(1.0) {
                                    return Err(Error::StepFailure {
                                        t: dir * t,
                                        reason: "adaptive step size underflow".into(),
                                    });
                                }
                                continue;
                            }
                        }
                    }
                };
                match accepted {
                    Some((y, k, scaled, factor)) => {
                        t = if last { span } else { t + h_try };
                        x = y;
                        k1 = k;
                        traj.times.push(dir * t);
                        traj.points.push(x.clone());
                        traj.diagnostics.push(StepRecord {
                            step: h_try,
                            error: scaled,
                            rejected,
                        });
                        rejected = 0;
                        h = (h_try * factor).min(max_step);
                        if last {
                            h = h.max(max_step.min(1e-2));
                        }
                    }
                    None => {
                        // A stage left the domain: shrink towards the boundary.
                        rejected += 1;
                        h = h_try * 0.25;
                        if h < MIN_STEP * t.max(1.0) {
                            traj.status = TrajectoryStatus::DomainExit;
                            return Ok(traj);
                        }
                    }
                }
            }
        }
    }
    Ok(traj)
}

/// Endpoint `phi_t(x0)`; leaving the domain is an error.
pub fn flow_map(
    field: &dyn VectorField,
    t: f64,
    x0: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<f64>> {
    let traj = integrate(field, x0, t, config)?;
    match traj.status {
        TrajectoryStatus::Completed => Ok(traj.last().to_vec()),
        TrajectoryStatus::DomainExit => Err(Error::DomainExit {
            t: traj.final_time(),
            point: traj.last().to_vec(),
        }),
    }
}

/// `Phi(t; x) = phi^0_{t_0} o ... o phi^k_{t_k}(x)`: the last field is
/// applied first and field 0 last.
pub fn group_action(
    fields: &[&dyn VectorField],
    t: &[f64],
    x0: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<f64>> {
    if fields.len() != t.len() {
        return Err(Error::Dimension(format!(
            "{} times for {} flows",
            t.len(),
            fields.len()
        )));
    }
    let mut x = x0.to_vec();
    for (field, &ti) in fields.iter().zip(t).rev() {
        if ti != 0.0 {
            x = flow_map(*field, ti, &x, config)?;
        }
    }
    Ok(x)
}

/// Derivative at sample `i` of the interpolating polynomial through up to
/// five neighbouring samples.
pub fn local_derivative(times: &[f64], values: &[f64], i: usize) -> f64 {
    let m = times.len();
    if m < 2 {
        return 0.0;
    }
    let width = m.min(5);
    let start = i.saturating_sub(width / 2).min(m - width);
    let nodes = start..start + width;
    let ti = times[i];
    let mut d = 0.0;
    for j in nodes.clone() {
        let weight = if j == i {
            nodes.clone().filter(|&k| k != i).map(|k| 1.0 / (ti - times[k])).sum()
        } else {
            let mut num = 1.0;
            let mut den = times[j] - ti;
            for k in nodes.clone().filter(|&k| k != i && k != j) {
                num *= ti - times[k];
                den *= times[j] - times[k];
            }
            num / den
        };
        d += weight * values[j];
    }
    d
}

/// `max |d/dt f(c(t)) + R(h) f(c(t))|` along a trajectory of `X_h`, with the
/// time derivative estimated from the sampled values of `f`.
pub fn dissipation_residual(
    chart: &ContactChart,
    h: &Expr,
    f: &Expr,
    traj: &Trajectory,
) -> Result<f64> {
    let values = traj
        .points
        .iter()
        .map(|x| f.eval(x))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut worst: f64 = 0.0;
    for (i, x) in traj.points.iter().enumerate() {
        let rh = chart.reeb_derivative_at(h, x)?;
        let dfdt = local_derivative(&traj.times, &values, i);
        worst = worst.max((dfdt + rh * values[i]).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn darboux() -> ContactChart {
        ContactChart::darboux(1)
    }

    #[test]
    fn reeb_flow_of_z_is_exponential_decay() {
        let c = darboux();
        let f = c.parse("z").unwrap();
        let field = ContactField { chart: &c, f: &f };
        let x = flow_map(&field, 1.0, &[2.0, 3.0, 5.0], &IntegratorConfig::default()).unwrap();
        let e = (-1.0_f64).exp();
        assert!(max_abs_diff(&x, &[2.0, 3.0 * e, 5.0 * e]) < 1e-8);
    }

    #[test]
    fn translation_flow() {
        let c = darboux();
        let f = c.parse("p").unwrap();
        let field = ContactField { chart: &c, f: &f };
        for config in [IntegratorConfig::default(), IntegratorConfig::rk4(0.1)] {
            let x = flow_map(&field, 4.0, &[2.0, 3.0, 5.0], &config).unwrap();
            assert!(max_abs_diff(&x, &[6.0, 3.0, 5.0]) < 1e-12);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let c = darboux();
        let f = c.parse("z").unwrap();
        let field = ContactField { chart: &c, f: &f };
        let traj = integrate(&field, &[2.0, 3.0, 5.0], 0.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.last(), &[2.0, 3.0, 5.0]);
    }

    #[test]
    fn negative_time_runs_backwards() {
        let c = darboux();
        let f = c.parse("z").unwrap();
        let field = ContactField { chart: &c, f: &f };
        let traj = integrate(&field, &[2.0, 3.0, 5.0], -2.0, &IntegratorConfig::default()).unwrap();
        assert!(traj.times.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(traj.final_time(), -2.0);
        let e = 2.0_f64.exp();
        assert!(max_abs_diff(traj.last(), &[2.0, 3.0 * e, 5.0 * e]) < 1e-8);
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let c = darboux();
        let f = c.parse("z").unwrap();
        let field = ContactField { chart: &c, f: &f };
        let exact = 5.0 * (-1.0_f64).exp();
        let err = |h: f64| {
            let x = flow_map(&field, 1.0, &[2.0, 3.0, 5.0], &IntegratorConfig::rk4(h)).unwrap();
            (x[2] - exact).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn region_exit_truncates() {
        let c = darboux();
        let f = c.parse("p").unwrap();
        let region = Region::new(vec![(-10.0, 3.0), (-10.0, 10.0), (-10.0, 10.0)]).unwrap();
        let field = Clamped {
            field: ContactField { chart: &c, f: &f },
            region: &region,
        };
        let traj = integrate(&field, &[2.0, 3.0, 5.0], 4.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::DomainExit);
        let q = traj.last()[0];
        assert!(q <= 3.0 && q > 2.99, "stopped at {q}");
        assert!(matches!(
            flow_map(&field, 4.0, &[2.0, 3.0, 5.0], &IntegratorConfig::default()),
            Err(Error::DomainExit { .. })
        ));
        let rk = integrate(&field, &[2.0, 3.0, 5.0], 4.0, &IntegratorConfig::rk4(0.3)).unwrap();
        assert_eq!(rk.status, TrajectoryStatus::DomainExit);
        assert!(rk.last()[0] <= 3.0);
    }

    #[test]
    fn fiber_must_stay_positive() {
        let s = SympChart::new(darboux()).unwrap();
        // iota_{d/dr} omega = -dz, so F = -z generates a pure fiber translation
        let f = s.parse("-z").unwrap();
        let field = SympField { chart: &s, f: &f };
        let v = field.eval(&[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(max_abs_diff(&v, &[0.0, 0.0, 0.0, 1.0]) < 1e-12);
        let traj = integrate(&field, &[0.0, 0.0, 1.0, 1.0], -2.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::DomainExit);
        // omega degenerates (det = r^2) just before r reaches zero
        assert!(traj.last()[3] > 0.0 && traj.last()[3] < 1e-5);
    }

    #[test]
    fn max_steps_is_enforced() {
        let c = darboux();
        let f = c.parse("p").unwrap();
        let field = ContactField { chart: &c, f: &f };
        let mut config = IntegratorConfig::rk4(0.1);
        config.max_steps = 5;
        assert!(matches!(
            integrate(&field, &[0.0; 3], 1.0, &config),
            Err(Error::MaxSteps(5))
        ));
        assert!(IntegratorConfig::rk4(0.0).validate().is_err());
        assert!(IntegratorConfig::rkf45(0.0, 1e-12, 0.1).validate().is_err());
    }

    #[test]
    fn lifted_group_action() {
        let s = SympChart::new(darboux()).unwrap();
        let h = s.parse("-(r*p)").unwrap();
        let f = s.parse("-(r*z)").unwrap();
        let xh = SympField { chart: &s, f: &h };
        let xf = SympField { chart: &s, f: &f };
        let fields: [&dyn VectorField; 2] = [&xh, &xf];
        let y = [2.0, 3.0, 5.0, 7.0];
        let (t, sv): (f64, f64) = (0.7, -0.4);
        let e = (-sv).exp();
        let expected = [2.0 + t, 3.0 * e, 5.0 * e, 7.0 / e];
        let config = IntegratorConfig::default();
        let got = group_action(&fields, &[t, sv], &y, &config).unwrap();
        assert!(max_abs_diff(&got, &expected) < 1e-7);
        let swapped: [&dyn VectorField; 2] = [&xf, &xh];
        let other = group_action(&swapped, &[sv, t], &y, &config).unwrap();
        assert!(max_abs_diff(&got, &other) < 1e-7);
        assert_eq!(group_action(&fields, &[0.0, 0.0], &y, &config).unwrap(), y.to_vec());
    }

    #[test]
    fn flow_property() {
        let c = darboux();
        let f = c.parse("q^2/2 + p*z").unwrap();
        let field = ContactField { chart: &c, f: &f };
        let config = IntegratorConfig::default();
        let x0 = [0.3, -0.2, 0.5];
        let a = flow_map(&field, 0.4, &flow_map(&field, 0.3, &x0, &config).unwrap(), &config).unwrap();
        let b = flow_map(&field, 0.7, &x0, &config).unwrap();
        assert!(max_abs_diff(&a, &b) < 2e-9);
    }

    #[test]
    fn dissipation_along_flows() {
        let c = darboux();
        let f = c.parse("z").unwrap();
        let h = c.parse("p").unwrap();
        let fine = IntegratorConfig::rkf45(1e-10, 1e-12, 0.02);
        let along_f = integrate(&ContactField { chart: &c, f: &f }, &[2.0, 3.0, 5.0], 5.0, &fine).unwrap();
        assert!(dissipation_residual(&c, &f, &h, &along_f).unwrap() < 1e-6);
        // the Hamiltonian itself is dissipated
        assert!(dissipation_residual(&c, &f, &f, &along_f).unwrap() < 1e-6);
        let along_h = integrate(&ContactField { chart: &c, f: &h }, &[2.0, 3.0, 5.0], 5.0, &fine).unwrap();
        assert!(dissipation_residual(&c, &h, &f, &along_h).unwrap() < 1e-8);
        let zero = Expr::constant(0.0);
        assert_eq!(dissipation_residual(&c, &f, &zero, &along_f).unwrap(), 0.0);
    }

    #[test]
    fn local_derivative_is_exact_on_quartics() {
        let times = [0.0, 0.1, 0.25, 0.3, 0.5, 0.8, 0.85];
        let poly = |t: f64| 1.0 - 2.0 * t + t.powi(3) - 0.5 * t.powi(4);
        let dpoly = |t: f64| -2.0 + 3.0 * t * t - 2.0 * t.powi(3);
        let values: Vec<f64> = times.iter().map(|&t| poly(t)).collect();
        for i in 0..times.len() {
            assert!((local_derivative(&times, &values, i) - dpoly(times[i])).abs() < 1e-10);
        }
    }
}
