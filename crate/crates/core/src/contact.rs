//! Contact charts: the contact form, its flat isomorphism, the Reeb field,
//! contact Hamiltonian vector fields and the Jacobi bracket.
//!
//! Coordinates are ordered `(q^1..q^n, p_1..p_n, z)`. A chart either carries
//! the Darboux form `dz - p_i dq^i`, in which case fields come from closed
//! forms, or an arbitrary coframe, in which case every field is obtained by
//! solving against the flat matrix `B_ab = (d eta)_ab + eta_a eta_b`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, Jet1, Jet2, Node, UnaryOp};
use crate::linalg;
use crate::region::Region;
use crate::tensor::{Covector, Vector};

/// Threshold on `|det B|` used by [`ContactChart::contact_condition_check`].
pub const CONTACT_CHECK_THRESHOLD: f64 = 1e-8;

/// Central finite-difference step for field Jacobians on general coframes.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct ContactChart {
    n: usize,
    coords: Vec<String>,
    eta: Vec<Expr>,
    darboux: bool,
}

/// Per-point linear algebra shared by the general-coframe operations.
#[derive(Debug, Clone)]
pub struct PointFrame {
    pub eta: Covector,
    pub deta: DMatrix<f64>,
    /// `B_ab`; the flat map is `(flat v)_b = v^a B_ab`.
    pub flat: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    det: f64,
    point: Vec<f64>,
}

impl PointFrame {
    pub fn det(&self) -> f64 {
        self.det
    }

    /// Inverse flat map: the vector `v` with `flat(v) = alpha`.
    pub fn sharp(&self, alpha: &[f64]) -> Result<Vector> {
        if !(self.det.abs() > linalg::SINGULAR_DET) {
            return Err(Error::SingularFlat {
                point: self.point.clone(),
                det: self.det,
            });
        }
        self.lu
            .solve(&nalgebra::DVector::from_column_slice(alpha))
            .map(|v| Vector::new(v.as_slice().to_vec()))
            .ok_or_else(|| Error::SingularFlat {
                point: self.point.clone(),
                det: self.det,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactConditionReport {
    pub min_abs_det: f64,
    pub threshold: f64,
    pub samples: usize,
    pub failed_evaluations: usize,
    pub worst_point: Vec<f64>,
    pub pass: bool,
}

impl ContactChart {
    /// Default coordinate names: `q, p, z` for `n = 1`, otherwise
    /// `q1..qn, p1..pn, z`.
    pub fn default_names(n: usize) -> Vec<String> {
        if n == 1 {
            return vec!["q".into(), "p".into(), "z".into()];
        }
        let mut names: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
        names.extend((1..=n).map(|i| format!("p{i}")));
        names.push("z".into());
        names
    }

    pub fn darboux(n: usize) -> Self {
        Self::darboux_named(Self::default_names(n)).expect("default names are valid")
    }

    /// Darboux chart over caller-chosen names in `(q.., p.., z)` order.
    pub fn darboux_named(coords: Vec<String>) -> Result<Self> {
        let n = Self::check_coords(&coords)?;
        let eta = Self::darboux_coefficients(&coords, n);
        Ok(ContactChart {
            n,
            coords,
            eta,
            darboux: true,
        })
    }

    /// Chart with an arbitrary coframe `eta = sum eta_a dx^a`.
    pub fn with_coframe(coords: Vec<String>, eta: Vec<Expr>) -> Result<Self> {
        let n = Self::check_coords(&coords)?;
        if eta.len() != coords.len() {
            return Err(Error::Dimension(format!(
                "{} contact-form coefficients for {} coordinates",
                eta.len(),
                coords.len()
            )));
        }
        if let Some(bad) = eta.iter().find(|e| e.max_index().is_some_and(|i| i >= coords.len())) {
            return Err(Error::Dimension(format!("coefficient `{bad}` references an unknown coordinate")));
        }
        let darboux = eta == Self::darboux_coefficients(&coords, n);
        Ok(ContactChart {
            n,
            coords,
            eta,
            darboux,
        })
    }

    /// Parses coframe coefficients given as expression sources.
    pub fn from_sources(coords: Vec<String>, eta: &[&str]) -> Result<Self> {
        let parsed = eta
            .iter()
            .map(|s| Expr::parse(s, &coords))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::with_coframe(coords, parsed)
    }

    fn check_coords(coords: &[String]) -> Result<usize> {
        if coords.len().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "a contact chart needs 2n+1 coordinates, got {}",
                coords.len()
            )));
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(Error::InvalidInput(format!("duplicate coordinate name `{c}`")));
            }
        }
        Ok((coords.len() - 1) / 2)
    }

    fn darboux_coefficients(coords: &[String], n: usize) -> Vec<Expr> {
        let mut eta = Vec::with_capacity(2 * n + 1);
        for i in 0..n {
            eta.push(Expr::from_node(Node::Unary(
                UnaryOp::Neg,
                Box::new(Node::Var {
                    name: coords[n + i].clone(),
                    index: n + i,
                }),
            )));
        }
        eta.extend((0..n).map(|_| Expr::constant(0.0)));
        eta.push(Expr::constant(1.0));
        eta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn eta(&self) -> &[Expr] {
        &self.eta
    }

    pub fn is_darboux(&self) -> bool {
        self.darboux
    }

    /// Parses an expression over this chart's coordinates.
    pub fn parse(&self, source: &str) -> Result<Expr> {
        Ok(Expr::parse(source, &self.coords)?)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has {} components, chart has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn eta_at(&self, x: &[f64]) -> Result<Covector> {
        self.check_point(x)?;
        let c = self.eta.iter().map(|e| e.eval(x)).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Covector::new(c))
    }

    pub fn deta_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let grads = self
            .eta
            .iter()
            .map(|e| e.eval_jet1(x).map(|j| j.grad))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(linalg::exterior_derivative(&grads))
    }

    /// Assembles `eta`, `d eta`, `B` and its LU factorisation at `x`.
    pub fn frame_at(&self, x: &[f64]) -> Result<PointFrame> {
        self.check_point(x)?;
        let jets = self
            .eta
            .iter()
            .map(|e| e.eval_jet1(x))
            .collect::<std::result::Result<Vec<Jet1>, _>>()?;
        let eta: Vec<f64> = jets.iter().map(|j| j.value).collect();
        let grads: Vec<Vec<f64>> = jets.into_iter().map(|j| j.grad).collect();
        let deta = linalg::exterior_derivative(&grads);
        let d = self.dim();
        let flat = DMatrix::from_fn(d, d, |a, b| deta[(a, b)] + eta[a] * eta[b]);
        // flat(v)_b = v^a B_ab, i.e. B^T v
        let lu = flat.transpose().lu();
        let det = lu.determinant();
        Ok(PointFrame {
            eta: Covector::new(eta),
            deta,
            flat,
            lu,
            det,
            point: x.to_vec(),
        })
    }

    pub fn flat_at(&self, x: &[f64], v: &Vector) -> Result<Covector> {
        let frame = self.frame_at(x)?;
        if v.len() != self.dim() {
            return Err(Error::Dimension("vector length does not match chart".into()));
        }
        Ok(Covector::new(linalg::mat_vec(&frame.flat.transpose(), v)))
    }

    pub fn reeb_at(&self, x: &[f64]) -> Result<Vector> {
        if self.darboux {
            self.check_point(x)?;
            let mut r = vec![0.0; self.dim()];
            r[2 * self.n] = 1.0;
            return Ok(Vector::new(r));
        }
        let frame = self.frame_at(x)?;
        frame.sharp(&frame.eta)
    }

    /// `X_f(x)`: closed form on Darboux charts, flat solve otherwise.
    pub fn hamiltonian_field_at(&self, f: &Expr, x: &[f64]) -> Result<Vector> {
        if self.darboux {
            self.check_point(x)?;
            let jet = f.eval_jet1(x)?;
            return Ok(self.darboux_field(x, jet.value, &jet.grad));
        }
        self.hamiltonian_field_general_at(f, x)
    }

    /// Solves `flat(X_f) = df - (R(f) + f) eta` regardless of chart type.
    pub fn hamiltonian_field_general_at(&self, f: &Expr, x: &[f64]) -> Result<Vector> {
        let frame = self.frame_at(x)?;
        let reeb = frame.sharp(&frame.eta)?;
        let jet = f.eval_jet1(x)?;
        let rf = linalg::dot(&jet.grad, &reeb);
        let rhs: Vec<f64> = jet
            .grad
            .iter()
            .zip(frame.eta.iter())
            .map(|(df, e)| df - (rf + jet.value) * e)
            .collect();
        frame.sharp(&rhs)
    }

    /// `X_f = f_{p_i} d/dq^i - (f_{q^i} + p_i f_z) d/dp_i + (p_i f_{p_i} - f) d/dz`.
    fn darboux_field(&self, x: &[f64], f: f64, g: &[f64]) -> Vector {
        let n = self.n;
        let z = 2 * n;
        let mut v = vec![0.0; self.dim()];
        let mut vz = -f;
        for i in 0..n {
            let (q, p) = (i, n + i);
            v[q] = g[p];
            v[p] = -(g[q] + x[p] * g[z]);
            vz += x[p] * g[p];
        }
        v[z] = vz;
        Vector::new(v)
    }

    /// Reeb derivative `R(f)`.
    pub fn reeb_derivative_at(&self, f: &Expr, x: &[f64]) -> Result<f64> {
        let reeb = self.reeb_at(x)?;
        let jet = f.eval_jet1(x)?;
        Ok(linalg::dot(&jet.grad, &reeb))
    }

    /// `{f, g} = X_f(g) + g R(f)`.
    pub fn jacobi_bracket_at(&self, f: &Expr, g: &Expr, x: &[f64]) -> Result<f64> {
        Ok(self.jacobi_bracket_forms_at(f, g, x)?.0)
    }

    /// Both field expressions of the bracket: `X_f(g) + g R(f)` and
    /// `-X_g(f) - f R(g)`.
    pub fn jacobi_bracket_forms_at(&self, f: &Expr, g: &Expr, x: &[f64]) -> Result<(f64, f64)> {
        let reeb = self.reeb_at(x)?;
        let jf = f.eval_jet1(x)?;
        let jg = g.eval_jet1(x)?;
        let xf = self.hamiltonian_field_at(f, x)?;
        let xg = self.hamiltonian_field_at(g, x)?;
        let rf = linalg::dot(&jf.grad, &reeb);
        let rg = linalg::dot(&jg.grad, &reeb);
        let first = linalg::dot(&jg.grad, &xf) + jg.value * rf;
        let second = -linalg::dot(&jf.grad, &xg) - jf.value * rg;
        Ok((first, second))
    }

    /// `Lambda(df, dg) = -d eta(sharp df, sharp dg)` by direct solves.
    pub fn lambda_pairing_at(&self, f: &Expr, g: &Expr, x: &[f64]) -> Result<f64> {
        let frame = self.frame_at(x)?;
        let u = frame.sharp(&f.eval_jet1(x)?.grad)?;
        let w = frame.sharp(&g.eval_jet1(x)?.grad)?;
        Ok(-two_form(&frame.deta, &u, &w))
    }

    /// The bracket through the bivector: `Lambda(df, dg) - f R(g) + g R(f)`.
    pub fn jacobi_bracket_via_lambda_at(&self, f: &Expr, g: &Expr, x: &[f64]) -> Result<f64> {
        let frame = self.frame_at(x)?;
        let reeb = frame.sharp(&frame.eta)?;
        let jf = f.eval_jet1(x)?;
        let jg = g.eval_jet1(x)?;
        let u = frame.sharp(&jf.grad)?;
        let w = frame.sharp(&jg.grad)?;
        let lambda = -two_form(&frame.deta, &u, &w);
        Ok(lambda - jf.value * linalg::dot(&jg.grad, &reeb) + jg.value * linalg::dot(&jf.grad, &reeb))
    }

    /// Jacobian `J[(a, b)] = d_b X_f^a`.
    ///
    /// Exact from second-order jets on Darboux charts; central differences
    /// with step [`FD_STEP`] otherwise.
    pub fn hamiltonian_field_jacobian_at(&self, f: &Expr, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        if self.darboux {
            let jet = f.eval_jet2(x)?;
            return Ok(self.darboux_jacobian(x, &jet));
        }
        central_jacobian(x, |y| self.hamiltonian_field_at(f, y).map(Vector::into_inner))
    }

    fn darboux_jacobian(&self, x: &[f64], jet: &Jet2) -> DMatrix<f64> {
        let n = self.n;
        let d = self.dim();
        let z = 2 * n;
        let g = &jet.grad;
        let h = |a: usize, b: usize| jet.hessian(a, b);
        let mut jac = DMatrix::zeros(d, d);
        for b in 0..d {
            let mut dz = -g[b];
            for i in 0..n {
                let (q, p) = (i, n + i);
                let kronecker = if b == p { 1.0 } else { 0.0 };
                jac[(q, b)] = h(p, b);
                jac[(p, b)] = -(h(q, b) + x[p] * h(z, b)) - kronecker * g[z];
                dz += x[p] * h(p, b) + kronecker * g[p];
            }
            jac[(z, b)] = dz;
        }
        jac
    }

    /// Lie bracket `[X_f, X_g]^a = X_f^b d_b X_g^a - X_g^b d_b X_f^a`.
    pub fn lie_bracket_at(&self, f: &Expr, g: &Expr, x: &[f64]) -> Result<Vector> {
        let xf = self.hamiltonian_field_at(f, x)?;
        let xg = self.hamiltonian_field_at(g, x)?;
        let jf = self.hamiltonian_field_jacobian_at(f, x)?;
        let jg = self.hamiltonian_field_jacobian_at(g, x)?;
        let a = linalg::mat_vec(&jg, &xf);
        let b = linalg::mat_vec(&jf, &xg);
        Ok(Vector::new(a.iter().zip(&b).map(|(u, v)| u - v).collect()))
    }

    /// Value and gradient of the function `{g, h}` at `x`.
    ///
    /// Exact on Darboux charts (second-order jets of `g` and `h`); central
    /// differences of the bracket otherwise.
    pub fn bracket_jet_at(&self, g: &Expr, h: &Expr, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_point(x)?;
        if !self.darboux {
            let value = self.jacobi_bracket_at(g, h, x)?;
            let grad = central_jacobian(x, |y| Ok(vec![self.jacobi_bracket_at(g, h, y)?]))?;
            return Ok((value, grad.row(0).iter().copied().collect()));
        }
        let z = 2 * self.n;
        let jg = g.eval_jet2(x)?;
        let jh = h.eval_jet2(x)?;
        let xg = self.darboux_field(x, jg.value, &jg.grad);
        let jac = self.darboux_jacobian(x, &jg);
        // {g, h} = X_g^a h_a + h g_z
        let value = linalg::dot(&xg, &jh.grad) + jh.value * jg.grad[z];
        let grad = (0..self.dim())
            .map(|b| {
                let mut s = jh.grad[b] * jg.grad[z] + jh.value * jg.hessian(z, b);
                for a in 0..self.dim() {
                    s += jac[(a, b)] * jh.grad[a] + xg[a] * jh.hessian(a, b);
                }
                s
            })
            .collect();
        Ok((value, grad))
    }

    /// `{f, {g, h}}` using the exact gradient of the inner bracket.
    pub fn nested_bracket_at(&self, f: &Expr, g: &Expr, h: &Expr, x: &[f64]) -> Result<f64> {
        let (k, dk) = self.bracket_jet_at(g, h, x)?;
        let xf = self.hamiltonian_field_at(f, x)?;
        let rf = self.reeb_derivative_at(f, x)?;
        Ok(linalg::dot(&dk, &xf) + k * rf)
    }

    /// Chart for the conformally equivalent form `a * eta`.
    ///
    /// `a` must be nonzero with a constant sign on every sample point.
    pub fn conformal_rescale(&self, a: &Expr, samples: &[Vec<f64>]) -> Result<ContactChart> {
        if a.max_index().is_some_and(|i| i >= self.dim()) {
            return Err(Error::Dimension("conformal factor references an unknown coordinate".into()));
        }
        let mut sign = 0.0;
        for x in samples {
            let v = a.eval(x)?;
            if v == 0.0 || !v.is_finite() || (sign != 0.0 && v.signum() != sign) {
                return Err(Error::VanishingConformalFactor { point: x.clone() });
            }
            sign = v.signum();
        }
        if a.is_constant(1.0) {
            return Ok(self.clone());
        }
        let eta = self.eta.iter().map(|e| a.clone() * e.clone()).collect();
        ContactChart::with_coframe(self.coords.clone(), eta)
    }

    /// Minimum of `|det B|` over the samples; passes when it exceeds
    /// [`CONTACT_CHECK_THRESHOLD`]. Samples where evaluation fails count as
    /// zero determinant.
    pub fn contact_condition_check(&self, samples: &[Vec<f64>]) -> ContactConditionReport {
        let mut min_abs_det = f64::INFINITY;
        let mut worst_point = Vec::new();
        let mut failed = 0;
        for x in samples {
            let det = match self.frame_at(x) {
                Ok(frame) => frame.det().abs(),
                Err(_) => {
                    failed += 1;
                    0.0
                }
            };
            if det < min_abs_det {
                min_abs_det = det;
                worst_point = x.clone();
            }
        }
        if samples.is_empty() {
            min_abs_det = 0.0;
        }
        ContactConditionReport {
            min_abs_det,
            threshold: CONTACT_CHECK_THRESHOLD,
            samples: samples.len(),
            failed_evaluations: failed,
            worst_point,
            pass: !samples.is_empty() && min_abs_det > CONTACT_CHECK_THRESHOLD,
        }
    }
}

/// A contact chart together with the integrals `f_0..f_n` and a sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSystem {
    chart: ContactChart,
    integrals: Vec<Expr>,
    region: Region,
}

impl ContactSystem {
    pub fn new(chart: ContactChart, integrals: Vec<Expr>, region: Region) -> Result<Self> {
        if region.dim() != chart.dim() {
            return Err(Error::Dimension(format!(
                "region has {} axes, chart has {} coordinates",
                region.dim(),
                chart.dim()
            )));
        }
        if let Some(bad) = integrals
            .iter()
            .find(|f| f.max_index().is_some_and(|i| i >= chart.dim()))
        {
            return Err(Error::Dimension(format!("integral `{bad}` references an unknown coordinate")));
        }
        Ok(ContactSystem {
            chart,
            integrals,
            region,
        })
    }

    /// Parses integrals given as expression sources.
    pub fn from_sources(chart: ContactChart, integrals: &[&str], region: Region) -> Result<Self> {
        let parsed = integrals
            .iter()
            .map(|s| chart.parse(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(chart, parsed, region)
    }

    pub fn chart(&self) -> &ContactChart {
        &self.chart
    }

    pub fn integrals(&self) -> &[Expr] {
        &self.integrals
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// `F(x) = (f_0(x), .., f_k(x))`.
    pub fn values_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.integrals
            .iter()
            .map(|f| f.eval(x).map_err(Error::from))
            .collect()
    }

    /// Rows are the gradients of the integrals.
    pub fn jacobian_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let grads = self
            .integrals
            .iter()
            .map(|f| f.eval_jet1(x).map(|j| j.grad))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(DMatrix::from_fn(grads.len(), self.chart.dim(), |a, b| grads[a][b]))
    }
}

fn two_form(m: &DMatrix<f64>, u: &[f64], w: &[f64]) -> f64 {
    let d = u.len();
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            s += u[a] * m[(a, b)] * w[b];
        }
    }
    s
}

/// Central-difference Jacobian `J[(a, b)] = d_b F^a` with step [`FD_STEP`].
pub fn central_jacobian(
    x: &[f64],
    field: impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<DMatrix<f64>> {
    let d = x.len();
    let mut cols = Vec::with_capacity(d);
    let mut y = x.to_vec();
    let mut m = 0;
    for b in 0..d {
        y[b] = x[b] + FD_STEP;
        let plus = field(&y)?;
        y[b] = x[b] - FD_STEP;
        let minus = field(&y)?;
        y[b] = x[b];
        m = plus.len();
        cols.push(
            plus.iter()
                .zip(&minus)
                .map(|(a, c)| (a - c) / (2.0 * FD_STEP))
                .collect::<Vec<_>>(),
        );
    }
    Ok(DMatrix::from_fn(m, d, |a, b| cols[b][a]))
}
