//! Fixtures shared by the benchmarks in `benches/`.

use contactkit::integrability::SectionSpec;
use contactkit::{ContactChart, ContactSystem, Region, SympSystem};

/// `h = p`, `f = z` on the Darboux chart.
pub fn worked_example() -> ContactSystem {
    let region = Region::new(vec![(-3.0, 3.0), (0.5, 4.0), (0.5, 6.0)]).unwrap();
    ContactSystem::from_sources(ContactChart::darboux(1), &["p", "z"], region).unwrap()
}

pub fn worked_example_lifted() -> SympSystem {
    SympSystem::new(worked_example()).unwrap()
}

/// `chi(L0, L1) = (0, L0/L1, 1, L1)`.
pub fn chi() -> SectionSpec {
    let domain = Region::new(vec![(1e-3, 1e3), (1e-3, 1e3)]).unwrap();
    SectionSpec::parse("chi", vec!["L0".into(), "L1".into()], &["0", "L0/L1", "1", "L1"], domain)
        .unwrap()
        .with_pivot(1)
}

/// A non-Darboux coframe, forcing the linear-solve path for `X_f`.
pub fn symmetric_gauge() -> ContactChart {
    ContactChart::from_sources(ContactChart::default_names(1), &["-p/2", "q/2", "1"]).unwrap()
}
