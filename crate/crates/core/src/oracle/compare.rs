//! Predicted rational-series counts against the class census of the dual
//! group.

use serde::Serialize;

use super::census::{census, ClassCensus, MatrixFamily, MatrixGroupSpec};
use crate::charsheaf::little_groups;
use crate::endoscopy::stable_parameters;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::root_datum::{Family, FrobeniusTwist, Isogeny, RootDatum};
use crate::series::rational_partition;
use crate::weyl::{WeylGroup, DEFAULT_CAP};

/// `(element order, rational classes in the bundle, centralizer components)`.
pub type BundleShape = (u64, usize, usize);

#[derive(Debug, Clone, Serialize)]
pub struct PredictedOrbit {
    pub representative: Vec<String>,
    pub orbit_size: usize,
    pub shape: BundleShape,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub spec: MatrixGroupSpec,
    pub predicted_total: usize,
    pub census_total: usize,
    pub predicted: Vec<PredictedOrbit>,
    pub census_shapes: Vec<BundleShape>,
    pub skipped_parameters: usize,
    /// Census classes of element order above the denominator bound, left out
    /// of both totals.
    pub census_excluded: usize,
    /// Predicted orbits with no matching census bundle, and vice versa.
    pub mismatches: Vec<String>,
    pub matched: bool,
}

/// The root datum of the census group itself.
pub fn census_datum(spec: &MatrixGroupSpec) -> Result<RootDatum> {
    if spec.n < 2 {
        return Err(Error::input("comparison needs n ≥ 2"));
    }
    match spec.family {
        MatrixFamily::Gl => RootDatum::gl(spec.n),
        MatrixFamily::Sl => RootDatum::named(Family::A, spec.n - 1, Isogeny::SimplyConnected),
        MatrixFamily::Pgl => RootDatum::named(Family::A, spec.n - 1, Isogeny::Adjoint),
    }
}

pub fn compare(datum: &RootDatum, eps: &FrobeniusTwist, bound: i64, spec: MatrixGroupSpec, exec: Exec) -> Result<ComparisonReport> {
    if !eps.tau.is_identity() {
        return Err(Error::input("census groups are split; τ must be trivial"));
    }
    if eps.q != spec.q {
        return Err(Error::input(format!("q = {} but the census is over F_{}", eps.q, spec.q)));
    }
    if datum.dual() != census_datum(&spec)? {
        return Err(Error::input(format!("{spec} is not the dual group of the given datum")));
    }
    let c = census(spec, exec)?;
    compare_with_census(datum, eps, bound, &c, exec)
}

pub fn compare_with_census(datum: &RootDatum, eps: &FrobeniusTwist, bound: i64, c: &ClassCensus, exec: Exec) -> Result<ComparisonReport> {
    let w = WeylGroup::generate(datum, DEFAULT_CAP)?;
    let params = stable_parameters(&w, eps, bound, exec);
    let predicted: Vec<PredictedOrbit> = params
        .representatives
        .iter()
        .zip(&params.orbit_sizes)
        .map(|(l, &size)| {
            let series = rational_partition(&w, eps, l)?;
            let omega = little_groups(&w, l)?.omega.len();
            Ok(PredictedOrbit {
                representative: l.to_strings(),
                orbit_size: size,
                shape: (l.denominator() as u64, series.len(), omega),
            })
        })
        .collect::<Result<_>>()?;
    let in_range = |order: u64| order <= bound as u64;
    let mut census_shapes: Vec<BundleShape> = c
        .bundles
        .iter()
        .filter(|b| in_range(b.order))
        .map(|b| (b.order, b.classes.len(), b.components))
        .collect();
    census_shapes.sort_unstable();
    let mut remaining = census_shapes.clone();
    let mut mismatches = Vec::new();
    for p in &predicted {
        match remaining.iter().position(|s| *s == p.shape) {
            Some(i) => {
                remaining.remove(i);
            }
            None => mismatches.push(format!(
                "parameter orbit of {:?} predicts (order, classes, components) = {:?}, absent from the census",
                p.representative, p.shape
            )),
        }
    }
    for s in remaining {
        mismatches.push(format!("census bundle {s:?} has no parameter orbit"));
    }
    let predicted_total = predicted.iter().map(|p| p.shape.1).sum();
    let census_total = c.classes.iter().filter(|k| in_range(k.order)).count();
    Ok(ComparisonReport {
        spec: c.spec,
        predicted_total,
        census_total,
        matched: mismatches.is_empty() && predicted_total == census_total,
        predicted,
        census_shapes,
        skipped_parameters: params.skipped,
        census_excluded: c.classes.len() - census_total,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sl2_against_pgl2() {
        let d = RootDatum::named(Family::A, 1, Isogeny::SimplyConnected).unwrap();
        let eps = FrobeniusTwist::split(&d, 3).unwrap();
        let spec = MatrixGroupSpec {
            family: MatrixFamily::Pgl,
            n: 2,
            q: 3,
        };
        let r = compare(&d, &eps, 12, spec, Exec::default()).unwrap();
        assert!(r.matched, "{:?}", r.mismatches);
        assert_eq!((r.predicted_total, r.census_total), (4, 4));
    }

    #[test]
    fn wrong_dual_rejected() {
        let d = RootDatum::named(Family::A, 1, Isogeny::SimplyConnected).unwrap();
        let eps = FrobeniusTwist::split(&d, 3).unwrap();
        let spec = MatrixGroupSpec {
            family: MatrixFamily::Sl,
            n: 2,
            q: 3,
        };
        assert!(compare(&d, &eps, 12, spec, Exec::default()).is_err());
    }
}
