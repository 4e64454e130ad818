//! The symplectization `M x R+` of a contact chart with potential
//! `theta = r eta`, symplectic form `omega = -d theta`, lifted functions
//! `f^S = -r f` and the Liouville field `Delta = r d/dr`.
//!
//! Points are base coordinates followed by the fiber coordinate `r > 0`.

use nalgebra::DMatrix;

use crate::contact::{central_jacobian, ContactChart, ContactSystem};
use crate::error::{Error, Result};
use crate::expr::{Expr, Jet1};
use crate::linalg;
use crate::tensor::{Covector, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct SympChart {
    base: ContactChart,
    coords: Vec<String>,
    theta: Vec<Expr>,
}

/// A base point together with the fiber coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SympPoint {
    pub x: Vec<f64>,
    pub r: f64,
}

impl SympPoint {
    pub fn new(x: Vec<f64>, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            let mut point = x;
            point.push(r);
            return Err(Error::OutsideRegion { point });
        }
        Ok(SympPoint { x, r })
    }

    /// Splits `(x, r)`; the last component is the fiber coordinate.
    pub fn from_slice(y: &[f64]) -> Result<Self> {
        match y.split_last() {
            Some((&r, x)) => SympPoint::new(x.to_vec(), r),
            None => Err(Error::Dimension("empty point".into())),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut y = self.x.clone();
        y.push(self.r);
        y
    }
}

impl SympChart {
    /// Symplectization with fiber coordinate `r`.
    pub fn new(base: ContactChart) -> Result<Self> {
        SympChart::with_fiber_name(base, "r")
    }

    pub fn with_fiber_name(base: ContactChart, fiber: &str) -> Result<Self> {
        if base.coords().iter().any(|c| c == fiber) {
            return Err(Error::InvalidInput(format!(
                "fiber coordinate '{fiber}' clashes with a chart coordinate"
            )));
        }
        let mut coords = base.coords().to_vec();
        coords.push(fiber.to_string());
        let r = Expr::var(fiber, base.dim());
        let mut theta: Vec<Expr> = base.eta().iter().map(|e| r.clone() * e.clone()).collect();
        theta.push(Expr::constant(0.0));
        Ok(SympChart { base, coords, theta })
    }

    pub fn base(&self) -> &ContactChart {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn fiber_index(&self) -> usize {
        self.base.dim()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    /// Coefficients of `theta` in coordinate order.
    pub fn theta(&self) -> &[Expr] {
        &self.theta
    }

    pub fn parse(&self, source: &str) -> Result<Expr> {
        Ok(Expr::parse(source, &self.coords)?)
    }

    /// `f^S = -r f`.
    pub fn lift_function(&self, f: &Expr) -> Expr {
        if f.is_constant(0.0) {
            return Expr::constant(0.0);
        }
        -(Expr::var(self.coords[self.fiber_index()].clone(), self.fiber_index()) * f.clone())
    }

    fn check_point(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has {} components, symplectization has {}",
                y.len(),
                self.dim()
            )));
        }
        if !(y[self.fiber_index()] > 0.0) {
            return Err(Error::OutsideRegion { point: y.to_vec() });
        }
        Ok(())
    }

    pub fn theta_at(&self, y: &[f64]) -> Result<Covector> {
        self.check_point(y)?;
        let c = self.theta.iter().map(|e| e.eval(y)).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Covector::new(c))
    }

    /// `omega_ab = -(d theta)_ab`, from first-order jets of the coefficients.
    pub fn omega_at(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(y)?;
        let grads = self
            .theta
            .iter()
            .map(|e| e.eval_jet1(y).map(|j| j.grad))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(-linalg::exterior_derivative(&grads))
    }

    /// Solves `iota_X omega = alpha`, i.e. `omega^T X = alpha`.
    fn solve_omega(&self, y: &[f64], omega: &DMatrix<f64>, alpha: &[f64]) -> Result<Vector> {
        linalg::solve(&omega.transpose(), alpha)
            .map(Vector::new)
            .map_err(|det| Error::SingularOmega { point: y.to_vec(), det })
    }

    /// Liouville field: `iota_Delta omega = -theta`.
    pub fn liouville_field_at(&self, y: &[f64]) -> Result<Vector> {
        let omega = self.omega_at(y)?;
        let theta = self.theta_at(y)?;
        let rhs: Vec<f64> = theta.iter().map(|t| -t).collect();
        self.solve_omega(y, &omega, &rhs)
    }

    /// Symplectic Hamiltonian field: `iota_{X_F} omega = dF`.
    pub fn hamiltonian_field_at(&self, f: &Expr, y: &[f64]) -> Result<Vector> {
        let omega = self.omega_at(y)?;
        let df = self.gradient(f, y)?;
        self.solve_omega(y, &omega, &df.grad)
    }

    /// `X_{f^S}` for a base function `f`.
    pub fn lifted_field_at(&self, f: &Expr, y: &[f64]) -> Result<Vector> {
        self.hamiltonian_field_at(&self.lift_function(f), y)
    }

    fn gradient(&self, f: &Expr, y: &[f64]) -> Result<Jet1> {
        self.check_point(y)?;
        if f.max_index().is_some_and(|i| i >= self.dim()) {
            return Err(Error::Dimension("function references an unknown coordinate".into()));
        }
        Ok(f.eval_jet1(y)?)
    }

    /// `{F, G} = omega(X_F, X_G)`.
    pub fn poisson_bracket_at(&self, f: &Expr, g: &Expr, y: &[f64]) -> Result<f64> {
        let omega = self.omega_at(y)?;
        let xf = self.solve_omega(y, &omega, &self.gradient(f, y)?.grad)?;
        let xg = self.solve_omega(y, &omega, &self.gradient(g, y)?.grad)?;
        let mut s = 0.0;
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                s += xf[a] * omega[(a, b)] * xg[b];
            }
        }
        Ok(s)
    }

    /// `|Delta(F) - k F|`.
    pub fn homogeneity_residual(&self, f: &Expr, y: &[f64], k: i32) -> Result<f64> {
        let delta = self.liouville_field_at(y)?;
        let jet = self.gradient(f, y)?;
        Ok((linalg::dot(&jet.grad, &delta) - k as f64 * jet.value).abs())
    }

    /// `[Delta, X_F]` with both Jacobians by central differences.
    pub fn liouville_commutator_at(&self, f: &Expr, y: &[f64]) -> Result<Vector> {
        let delta = self.liouville_field_at(y)?;
        let xf = self.hamiltonian_field_at(f, y)?;
        let jd = central_jacobian(y, |w| self.liouville_field_at(w).map(Vector::into_inner))?;
        let jx = central_jacobian(y, |w| self.hamiltonian_field_at(f, w).map(Vector::into_inner))?;
        let a = linalg::mat_vec(&jx, &delta);
        let b = linalg::mat_vec(&jd, &xf);
        Ok(Vector::new(a.iter().zip(&b).map(|(u, v)| u - v).collect()))
    }
}

/// Pushforward along the projection `(x, r) -> x`: drops the fiber component.
pub fn project_vector(v: &Vector) -> Vector {
    let mut c = v.to_vec();
    c.pop();
    Vector::new(c)
}

/// A contact system lifted to its symplectization.
#[derive(Debug, Clone, PartialEq)]
pub struct SympSystem {
    base: ContactSystem,
    chart: SympChart,
    lifted: Vec<Expr>,
}

impl SympSystem {
    pub fn new(base: ContactSystem) -> Result<Self> {
        let chart = SympChart::new(base.chart().clone())?;
        let lifted = base.integrals().iter().map(|f| chart.lift_function(f)).collect();
        Ok(SympSystem { base, chart, lifted })
    }

    pub fn base(&self) -> &ContactSystem {
        &self.base
    }

    pub fn chart(&self) -> &SympChart {
        &self.chart
    }

    /// The lifted integrals `f_a^S`.
    pub fn integrals(&self) -> &[Expr] {
        &self.lifted
    }

    pub fn values_at(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.chart.check_point(y)?;
        Ok(self.lifted.iter().map(|f| f.eval(y)).collect::<std::result::Result<Vec<_>, _>>()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Y: [f64; 4] = [2.0, 3.0, 5.0, 7.0];

    fn chart() -> SympChart {
        SympChart::new(ContactChart::darboux(1)).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && linalg::max_abs_diff(a, b) < tol
    }

    #[test]
    fn lifts() {
        let s = chart();
        let p = s.base().parse("p").unwrap();
        let lifted = s.lift_function(&p);
        assert_eq!(lifted.to_string(), "-(r*p)");
        assert_eq!(lifted.eval(&Y).unwrap(), -21.0);
        assert_eq!(s.lift_function(&s.base().parse("z").unwrap()).eval(&Y).unwrap(), -35.0);
        assert!(s.lift_function(&Expr::constant(0.0)).is_constant(0.0));
    }

    #[test]
    fn potential() {
        let s = chart();
        assert_eq!(s.theta_at(&Y).unwrap().into_inner(), vec![-21.0, 0.0, 7.0, 0.0]);
        assert_eq!(s.theta_at(&[1.0, 0.0, 1.0, 4.0]).unwrap().into_inner(), vec![0.0, 0.0, 4.0, 0.0]);
        let delta = Vector::new(vec![0.0, 0.0, 0.0, 7.0]);
        assert_eq!(s.theta_at(&Y).unwrap().apply(&delta), 0.0);
        assert!(s.theta_at(&[0.0, 0.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn symplectic_form() {
        let s = chart();
        let omega = s.omega_at(&Y).unwrap();
        // d theta = dr^dz - p dr^dq - r dp^dq
        let mut expected = DMatrix::zeros(4, 4);
        expected[(3, 2)] = -1.0;
        expected[(2, 3)] = 1.0;
        expected[(3, 0)] = 3.0;
        expected[(0, 3)] = -3.0;
        expected[(1, 0)] = 7.0;
        expected[(0, 1)] = -7.0;
        assert_eq!(omega, expected);
        assert!((omega.determinant() - 49.0).abs() < 1e-10);

        let fd = central_jacobian(&Y, |y| s.theta_at(y).map(Covector::into_inner)).unwrap();
        // fd[(b, a)] = d_a theta_b
        let curl = DMatrix::from_fn(4, 4, |a, b| -(fd[(b, a)] - fd[(a, b)]));
        assert!((curl - &omega).abs().max() < 1e-8);
    }

    #[test]
    fn liouville_field() {
        let s = chart();
        let delta = s.liouville_field_at(&Y).unwrap();
        assert!(close(&delta, &[0.0, 0.0, 0.0, 7.0], 1e-12));
        assert!(s.theta_at(&Y).unwrap().apply(&delta).abs() < 1e-12);
        let sigma = s.parse("r").unwrap();
        assert!(s.homogeneity_residual(&sigma, &Y, 1).unwrap() < 1e-10);
        assert!(project_vector(&delta).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn hamiltonian_fields() {
        let s = chart();
        let h = s.parse("-(r*p)").unwrap();
        let f = s.parse("-(r*z)").unwrap();
        assert!(close(&s.hamiltonian_field_at(&h, &Y).unwrap(), &[1.0, 0.0, 0.0, 0.0], 1e-12));
        let xf = s.hamiltonian_field_at(&f, &Y).unwrap();
        assert!(close(&xf, &[0.0, -3.0, -5.0, 7.0], 1e-12));
        assert!(close(&project_vector(&xf), &[0.0, -3.0, -5.0], 1e-12));
        let c = s.parse("4").unwrap();
        assert!(s.hamiltonian_field_at(&c, &Y).unwrap().iter().all(|v| v.abs() < 1e-15));
        // theta(X_F) = F for degree-one F
        assert!((s.theta_at(&Y).unwrap().apply(&xf) - f.eval(&Y).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn poisson_brackets() {
        let s = chart();
        let h = s.parse("-(r*p)").unwrap();
        let f = s.parse("-(r*z)").unwrap();
        let lq = s.parse("-(r*q)").unwrap();
        assert!(s.poisson_bracket_at(&h, &f, &Y).unwrap().abs() < 1e-12);
        assert!(s.poisson_bracket_at(&f, &f, &Y).unwrap().abs() < 1e-12);
        // omega(X_{-rq}, X_{-rp}) = d(-rq)(d/dq) = -r
        assert!((s.poisson_bracket_at(&lq, &h, &Y).unwrap() + 7.0).abs() < 1e-12);
    }

    #[test]
    fn homogeneity() {
        let s = chart();
        let f = s.parse("-(r*p)").unwrap();
        assert!(s.homogeneity_residual(&f, &Y, 1).unwrap() < 1e-12);
        let q = s.parse("q").unwrap();
        assert!(s.homogeneity_residual(&q, &Y, 0).unwrap() < 1e-12);
        let r2 = s.parse("r^2").unwrap();
        let y = [0.0, 1.0, 1.0, 1.0];
        assert!((s.homogeneity_residual(&r2, &y, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degree_one_fields_commute_with_liouville() {
        let s = chart();
        let f = s.lift_function(&s.base().parse("q*p + z^2").unwrap());
        let c = s.liouville_commutator_at(&f, &Y).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-6));
        let g = s.parse("r^2*p").unwrap();
        let c = s.liouville_commutator_at(&g, &Y).unwrap();
        assert!(c.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn fiber_name_clash() {
        let base = ContactChart::darboux_named(vec!["a".into(), "r".into(), "c".into()]).unwrap();
        assert!(SympChart::new(base.clone()).is_err());
        let s = SympChart::with_fiber_name(base, "s").unwrap();
        assert_eq!(s.coords()[3], "s");
    }

    #[test]
    fn points() {
        let p = SympPoint::from_slice(&Y).unwrap();
        assert_eq!(p.r, 7.0);
        assert_eq!(p.to_vec(), Y.to_vec());
        assert!(SympPoint::new(vec![0.0; 3], 0.0).is_err());
    }
}
