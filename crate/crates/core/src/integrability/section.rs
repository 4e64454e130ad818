//! User-supplied sections `chi` of the lifted integral map, verified for the
//! section property `F^S(chi(L)) = s L` and horizontality `chi^* theta = 0`.

use serde::{Deserialize, Serialize};

use super::Samples;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg;
use crate::region::Region;
use crate::symplectic::SympSystem;

/// Which sign the section property holds with: `F^S(chi(L)) = s L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionSpec {
    pub name: String,
    /// Parameter names `L_0..L_n`.
    pub params: Vec<String>,
    /// Components of `chi` over the parameters, in symplectization
    /// coordinate order (base coordinates, then `r`).
    pub components: Vec<Expr>,
    /// Parameter box on which the section is used.
    pub domain: Region,
    /// Index of the action used to normalise the others; defaults to the
    /// largest `|A_a|` at each query point.
    pub pivot: Option<usize>,
    /// Rows are the lattice basis vectors `e_a` in integral coordinates;
    /// identity when absent.
    pub lattice: Option<Vec<Vec<f64>>>,
}

impl SectionSpec {
    pub fn parse(
        name: impl Into<String>,
        params: Vec<String>,
        components: &[&str],
        domain: Region,
    ) -> Result<Self> {
        let components = components
            .iter()
            .map(|c| Expr::parse(c, &params).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Ok(SectionSpec {
            name: name.into(),
            params,
            components,
            domain,
            pivot: None,
            lattice: None,
        })
    }

    pub fn with_pivot(mut self, pivot: usize) -> Self {
        self.pivot = Some(pivot);
        self
    }

    /// Checks the section's shape against a lifted system.
    pub fn validate(&self, system: &SympSystem) -> Result<()> {
        let k = system.integrals().len();
        let dim = system.chart().dim();
        let fail = |m: String| Err(Error::InvalidSection(format!("{}: {m}", self.name)));
        if self.params.len() != k {
            return fail(format!("{} parameters for {k} integrals", self.params.len()));
        }
        if self.components.len() != dim {
            return fail(format!("{} components for {dim} coordinates", self.components.len()));
        }
        if self.domain.dim() != k {
            return fail(format!("domain has {} axes for {k} parameters", self.domain.dim()));
        }
        if self.pivot.is_some_and(|p| p >= k) {
            return fail("pivot index out of range".into());
        }
        if let Some(rows) = &self.lattice {
            if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                return fail(format!("lattice basis must be {k}x{k}"));
            }
            let m = nalgebra::DMatrix::from_fn(k, k, |a, b| rows[a][b]);
            if !(m.determinant().abs() > linalg::SINGULAR_DET) {
                return fail("lattice basis is singular".into());
            }
        }
        Ok(())
    }

    /// `chi(L)`.
    pub fn eval(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        self.components
            .iter()
            .map(|c| c.eval(lambda).map_err(Error::from))
            .collect()
    }

    /// `(chi^* theta)_j = theta_a(chi(L)) d chi^a / d L_j`.
    pub fn pullback_theta(&self, system: &SympSystem, lambda: &[f64]) -> Result<Vec<f64>> {
        let jets = self
            .components
            .iter()
            .map(|c| c.eval_jet1(lambda))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let point: Vec<f64> = jets.iter().map(|j| j.value).collect();
        let theta = system.chart().theta_at(&point)?;
        Ok((0..lambda.len())
            .map(|j| jets.iter().zip(theta.iter()).map(|(jet, t)| t * jet.grad[j]).sum())
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionReport {
    pub section: String,
    /// `max ||F^S(chi(L)) - L||`.
    pub residual_plus: f64,
    /// `max ||F^S(chi(L)) + L||`.
    pub residual_minus: f64,
    /// `max ||chi^* theta||`.
    pub horizontality: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: Option<u64>,
    /// Convention under which the section property holds, if any.
    pub convention: Option<Sign>,
    pub pass: bool,
}

/// Evaluates both residuals at parameter samples drawn from the section's
/// domain. Passes iff horizontality and the section property under one of
/// the two sign conventions are below `tol`.
pub fn verify_section(
    system: &SympSystem,
    section: &SectionSpec,
    samples: &Samples,
    tol: f64,
) -> Result<SectionReport> {
    section.validate(system)?;
    let mut plus: f64 = 0.0;
    let mut minus: f64 = 0.0;
    let mut horizontal: f64 = 0.0;
    for lambda in &samples.points {
        let point = section.eval(lambda)?;
        let values = system.values_at(&point)?;
        let dp: Vec<f64> = values.iter().zip(lambda).map(|(v, l)| v - l).collect();
        let dm: Vec<f64> = values.iter().zip(lambda).map(|(v, l)| v + l).collect();
        plus = plus.max(linalg::norm(&dp));
        minus = minus.max(linalg::norm(&dm));
        horizontal = horizontal.max(linalg::norm(&section.pullback_theta(system, lambda)?));
    }
    let convention = if samples.points.is_empty() || !(horizontal < tol) {
        None
    } else if plus < tol {
        Some(Sign::Plus)
    } else if minus < tol {
        Some(Sign::Minus)
    } else {
        None
    };
    Ok(SectionReport {
        section: section.name.clone(),
        residual_plus: plus,
        residual_minus: minus,
        horizontality: horizontal,
        tolerance: tol,
        samples: samples.points.len(),
        seed: samples.seed,
        convention,
        pass: convention.is_some(),
    })
}
