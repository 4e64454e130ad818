//! System definition files.
//!
//! A config names a contact chart (coordinates and optionally the coframe
//! `eta`; Darboux by default), the `n + 1` integrals, a sampling box and any
//! sections used for action-angle coordinates. Expressions are strings in
//! the expression grammar of `contactkit::expr`.

use std::path::Path;

use contactkit::flows::IntegratorConfig;
use contactkit::integrability::{SectionSpec, Sign};
use contactkit::{ContactChart, ContactSystem, Expr, Region};
use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    pub n: usize,
    /// `2n + 1` names; `q, p, z` style defaults when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<String>>,
    /// Coefficients of `eta` in the coordinate basis; Darboux when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<String>>,
    pub integrals: Vec<String>,
    /// `[min, max]` per coordinate.
    pub region: Vec<[f64; 2]>,
    /// Sampling range of the fiber coordinate `r` for lifted checks.
    #[serde(default = "default_fiber_range")]
    pub fiber_range: [f64; 2],
    #[serde(default)]
    pub sections: Vec<SectionConfig>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    /// Sample count of every sampled check.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_fiber_range() -> [f64; 2] {
    [0.5, 2.0]
}

fn default_samples() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionConfig {
    pub name: String,
    /// Parameter names; `L0..Ln` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<String>>,
    /// `2n + 2` expressions in the parameters: base coordinates, then `r`.
    pub components: Vec<String>,
    /// Parameter box, `[min, max]` per parameter.
    pub domain: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Vec<Vec<f64>>>,
    /// Sign `s` in `F^S(chi(L)) = s L`; detected when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<Sign>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub involution: f64,
    /// Relative singular value cutoff for the rank of `TF`.
    pub rank: f64,
    pub coisotropy: f64,
    pub bracket: f64,
    pub projection: f64,
    pub homogeneity: f64,
    /// `[Delta, X_F]` uses finite differences, hence the looser default.
    pub liouville: f64,
    /// Relative drift of the ratios `f_a / f_b` along an integrated flow.
    pub invariance: f64,
    pub section: f64,
    pub angle: f64,
    pub darboux: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            involution: 1e-9,
            rank: 1e-8,
            coisotropy: 1e-8,
            bracket: 1e-8,
            projection: 1e-8,
            homogeneity: 1e-8,
            liouville: 1e-6,
            invariance: 1e-8,
            section: 1e-8,
            angle: 1e-8,
            darboux: 1e-5,
        }
    }
}

/// A validated config together with the objects built from it.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: SystemConfig,
    pub system: ContactSystem,
    pub sections: Vec<SectionSpec>,
    /// `sha256:` digest of the canonical serialization.
    pub digest: String,
}

impl LoadedConfig {
    pub fn section(&self, name: &str) -> CliResult<(&SectionSpec, Option<Sign>)> {
        self.sections
            .iter()
            .zip(&self.config.sections)
            .find(|(s, _)| s.name == name)
            .map(|(s, c)| (s, c.convention))
            .ok_or_else(|| {
                let known: Vec<&str> = self.sections.iter().map(|s| s.name.as_str()).collect();
                CliError::Input(format!("no section named '{name}' (known: {})", known.join(", ")))
            })
    }
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

fn schema_error(at: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{at}: {msg}"))
}

pub fn load_config(path: &Path) -> CliResult<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> CliResult<LoadedConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: SystemConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let at = pointer(e.path());
        schema_error(&at, e.into_inner())
    })?;
    build(config)
}

fn parse_region(bounds: &[[f64; 2]], at: &str) -> CliResult<Region> {
    for (i, [lo, hi]) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(schema_error(&format!("{at}/{i}"), format!("empty interval [{lo}, {hi}]")));
        }
    }
    Region::new(bounds.iter().map(|b| (b[0], b[1])).collect()).map_err(|e| schema_error(at, e))
}

fn parse_all(sources: &[String], coords: &[String], at: &str) -> CliResult<Vec<Expr>> {
    sources
        .iter()
        .enumerate()
        .map(|(i, s)| Expr::parse(s, coords).map_err(|e| schema_error(&format!("{at}/{i}"), e)))
        .collect()
}

fn expect_len(at: &str, what: &str, found: usize, expected: usize) -> CliResult<()> {
    if found != expected {
        return Err(schema_error(at, format!("expected {expected} {what}, found {found}")));
    }
    Ok(())
}

/// Validates a deserialized config and builds the system and sections.
pub fn build(config: SystemConfig) -> CliResult<LoadedConfig> {
    let n = config.n;
    let dim = 2 * n + 1;
    let coords = match &config.coordinates {
        Some(c) => {
            expect_len("/coordinates", "coordinate names (2n+1)", c.len(), dim)?;
            c.clone()
        }
        None => ContactChart::default_names(n),
    };
    for (i, c) in coords.iter().enumerate() {
        if coords[..i].contains(c) {
            return Err(schema_error(&format!("/coordinates/{i}"), format!("duplicate name '{c}'")));
        }
        if c == "r" {
            return Err(schema_error(
                &format!("/coordinates/{i}"),
                "'r' is reserved for the fiber coordinate",
            ));
        }
    }
    let chart = match &config.eta {
        Some(eta) => {
            expect_len("/eta", "coefficients (2n+1)", eta.len(), dim)?;
            let eta = parse_all(eta, &coords, "/eta")?;
            ContactChart::with_coframe(coords.clone(), eta)
        }
        None => ContactChart::darboux_named(coords.clone()),
    }
    .map_err(|e| schema_error("/coordinates", e))?;

    expect_len("/integrals", "integrals (n+1)", config.integrals.len(), n + 1)?;
    let integrals = parse_all(&config.integrals, &coords, "/integrals")?;
    expect_len("/region", "intervals (2n+1)", config.region.len(), dim)?;
    let region = parse_region(&config.region, "/region")?;
    let [r_lo, r_hi] = config.fiber_range;
    if !(r_lo > 0.0 && r_lo < r_hi && r_hi.is_finite()) {
        return Err(schema_error("/fiber_range", "expected 0 < min < max"));
    }
    if config.samples == 0 {
        return Err(schema_error("/samples", "must be positive"));
    }
    config.integrator.validate().map_err(|e| schema_error("/integrator", e))?;
    let tol = serde_json::to_value(config.tolerances).expect("tolerances serialize");
    for (k, v) in tol.as_object().expect("tolerances are an object") {
        if !v.as_f64().is_some_and(|t| t > 0.0) {
            return Err(schema_error(&format!("/tolerances/{k}"), "must be positive"));
        }
    }
    let system = ContactSystem::new(chart, integrals, region).map_err(|e| schema_error("/integrals", e))?;

    let mut sections = Vec::with_capacity(config.sections.len());
    for (j, s) in config.sections.iter().enumerate() {
        let at = format!("/sections/{j}");
        if config.sections[..j].iter().any(|o| o.name == s.name) {
            return Err(schema_error(&format!("{at}/name"), format!("duplicate section '{}'", s.name)));
        }
        let params = match &s.params {
            Some(p) => {
                expect_len(&format!("{at}/params"), "parameters (n+1)", p.len(), n + 1)?;
                p.clone()
            }
            None => (0..=n).map(|i| format!("L{i}")).collect(),
        };
        expect_len(&format!("{at}/components"), "components (2n+2)", s.components.len(), dim + 1)?;
        expect_len(&format!("{at}/domain"), "intervals (n+1)", s.domain.len(), n + 1)?;
        let components = parse_all(&s.components, &params, &format!("{at}/components"))?;
        let domain = parse_region(&s.domain, &format!("{at}/domain"))?;
        if s.pivot.is_some_and(|p| p > n) {
            return Err(schema_error(&format!("{at}/pivot"), "index out of range"));
        }
        if let Some(rows) = &s.lattice {
            expect_len(&format!("{at}/lattice"), "rows (n+1)", rows.len(), n + 1)?;
            for (i, row) in rows.iter().enumerate() {
                expect_len(&format!("{at}/lattice/{i}"), "entries (n+1)", row.len(), n + 1)?;
            }
        }
        sections.push(SectionSpec {
            name: s.name.clone(),
            params,
            components,
            domain,
            pivot: s.pivot,
            lattice: s.lattice.clone(),
        });
    }

    let digest = digest(&config);
    Ok(LoadedConfig {
        config,
        system,
        sections,
        digest,
    })
}

/// Digest of the canonical serialization: defaults filled in, fixed field
/// order, no insignificant whitespace.
pub fn digest(config: &SystemConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    format!("sha256:{}", hex::encode(Sha256::digest(&bytes)))
}
