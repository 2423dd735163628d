//! Job configuration files.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dlseries::charsheaf::{make_param, parse_fraction, SheafParam};
use dlseries::lattice::IntMatrix;
use dlseries::oracle::MatrixGroupSpec;
use dlseries::root_datum::{BasedAutomorphism, Family, FrobeniusTwist, Isogeny, RootDatum};
use dlseries::sweep::SweepGrid;
use dlseries::weyl::{ComponentAction, DEFAULT_CAP};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub datum: Option<DatumSpec>,
    #[serde(default)]
    pub q: Option<u64>,
    #[serde(default)]
    pub p: Option<u64>,
    /// `tau[k]` is the image of simple root `k` (Dynkin label order).
    #[serde(default)]
    pub tau: Option<Vec<usize>>,
    #[serde(default)]
    pub pi0: Option<Pi0Spec>,
    /// Sheaf parameter as fraction strings in the basis of `X`.
    #[serde(default)]
    pub param: Option<Vec<String>>,
    #[serde(default)]
    pub denominator_bound: Option<i64>,
    #[serde(default)]
    pub max_weyl: Option<u64>,
    #[serde(default)]
    pub census: Option<MatrixGroupSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum DatumSpec {
    Named {
        family: Family,
        rank: usize,
        isogeny: Isogeny,
    },
    Explicit {
        rank: usize,
        roots: Vec<Vec<i64>>,
        coroots: Vec<Vec<i64>>,
        simple: Vec<usize>,
    },
    Torus {
        torus: usize,
    },
}

/// A finite component group: its multiplication table (element 0 is the
/// identity) and the action of generators on the based datum.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pi0Spec {
    pub table: Vec<Vec<usize>>,
    pub generators: Vec<Pi0Generator>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pi0Generator {
    pub element: usize,
    /// Permutation of simple indices.
    #[serde(default)]
    pub perm: Option<Vec<usize>>,
    /// Matrix on `X`, for actions not determined by the simple roots.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<i64>>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Cartan types such as `"A2"`.
    #[serde(default)]
    pub types: Option<Vec<String>>,
    #[serde(default)]
    pub isogenies: Option<Vec<Isogeny>>,
    #[serde(default)]
    pub qs: Option<Vec<u64>>,
    #[serde(default)]
    pub twisted: Option<bool>,
}

impl JobConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// SHA-256 of the effective configuration and subcommand.
    pub fn hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(serde_json::to_vec(self).expect("config serializes"));
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn weyl_cap(&self) -> u64 {
        self.max_weyl.unwrap_or(DEFAULT_CAP)
    }

    pub fn bound(&self) -> i64 {
        self.denominator_bound.unwrap_or(12)
    }

    pub fn datum(&self) -> CliResult<RootDatum> {
        let spec = self.datum.as_ref().ok_or_else(|| CliError::Config("missing \"datum\"".into()))?;
        Ok(match spec {
            DatumSpec::Named { family, rank, isogeny } => RootDatum::named(*family, *rank, *isogeny)?,
            DatumSpec::Explicit {
                rank,
                roots,
                coroots,
                simple,
            } => RootDatum::new(*rank, roots.clone(), coroots.clone(), simple.clone())?,
            DatumSpec::Torus { torus } => RootDatum::torus(*torus),
        })
    }

    pub fn twist(&self, datum: &RootDatum) -> CliResult<FrobeniusTwist> {
        let q = self.q.ok_or_else(|| CliError::Config("missing \"q\"".into()))?;
        let tau = match &self.tau {
            Some(perm) => BasedAutomorphism::from_simple_permutation(datum, perm)?,
            None => BasedAutomorphism::identity(datum),
        };
        Ok(match self.p {
            Some(p) => FrobeniusTwist::with_characteristic(q, p, tau)?,
            None => FrobeniusTwist::new(q, tau)?,
        })
    }

    pub fn param(&self, datum: &RootDatum, p: u64) -> CliResult<SheafParam> {
        let raw = self.param.as_ref().ok_or_else(|| CliError::Config("missing \"param\"".into()))?;
        let v = raw.iter().map(|s| parse_fraction(s)).collect::<dlseries::Result<Vec<_>>>()?;
        Ok(make_param(&v, datum, p)?)
    }

    pub fn components(&self, datum: &RootDatum) -> CliResult<Option<ComponentAction>> {
        let Some(spec) = &self.pi0 else {
            return Ok(None);
        };
        let gens = spec
            .generators
            .iter()
            .map(|g| {
                let aut = match (&g.perm, &g.matrix) {
                    (Some(perm), None) => BasedAutomorphism::from_simple_permutation(datum, perm)?,
                    (None, Some(rows)) => {
                        let m = IntMatrix::try_from(rows.clone()).map_err(CliError::Config)?;
                        BasedAutomorphism::from_matrix(datum, m)?
                    }
                    _ => return Err(CliError::Config("each pi0 generator needs exactly one of perm, matrix".into())),
                };
                Ok((g.element, aut))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Some(ComponentAction::from_generators(datum, spec.table.clone(), &gens)?))
    }

    pub fn census_spec(&self) -> CliResult<MatrixGroupSpec> {
        self.census.ok_or_else(|| CliError::Config("missing \"census\"".into()))
    }

    pub fn sweep_grid(&self) -> CliResult<SweepGrid> {
        let mut grid = SweepGrid {
            denominator_bound: self.bound(),
            weyl_cap: self.weyl_cap(),
            ..SweepGrid::default()
        };
        let Some(s) = &self.sweep else {
            return Ok(grid);
        };
        if let Some(types) = &s.types {
            grid.types = types.iter().map(|t| parse_type(t)).collect::<CliResult<_>>()?;
        }
        if let Some(isos) = &s.isogenies {
            grid.isogenies = isos.clone();
        }
        if let Some(qs) = &s.qs {
            grid.qs = qs.clone();
        }
        if let Some(t) = s.twisted {
            grid.twisted = t;
        }
        Ok(grid)
    }
}

fn parse_type(t: &str) -> CliResult<(Family, usize)> {
    let t = t.trim();
    let split = t.find(|c: char| c.is_ascii_digit()).ok_or_else(|| CliError::Config(format!("bad Cartan type {t:?}")))?;
    let family: Family = t[..split].parse()?;
    let rank = t[split..].parse().map_err(|_| CliError::Config(format!("bad Cartan type {t:?}")))?;
    Ok((family, rank))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_and_explicit() {
        let c = JobConfig::parse(r#"{"datum": {"family": "A", "rank": 1, "isogeny": "sc"}, "q": 3, "param": ["1/2"]}"#).unwrap();
        let d = c.datum().unwrap();
        let eps = c.twist(&d).unwrap();
        assert_eq!(c.param(&d, eps.p).unwrap().to_strings(), vec!["1/2"]);
        let e = JobConfig::parse(r#"{"datum": {"rank": 1, "roots": [[2], [-2]], "coroots": [[1], [-1]], "simple": [0]}}"#).unwrap();
        assert_eq!(e.datum().unwrap(), d);
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(JobConfig::parse(r#"{"datum": {"family": "A", "rank": 1, "isogeny": "sc"}, "qq": 3}"#).is_err());
    }

    #[test]
    fn hash_depends_on_command_and_content() {
        let a = JobConfig::parse(r#"{"q": 3}"#).unwrap();
        let b = JobConfig::parse(r#"{"q": 5}"#).unwrap();
        assert_ne!(a.hash("datum"), b.hash("datum"));
        assert_ne!(a.hash("datum"), a.hash("sweep"));
        assert_eq!(a.hash("datum").len(), 64);
    }

    #[test]
    fn cartan_types() {
        assert_eq!(parse_type("G2").unwrap(), (Family::G, 2));
        assert!(parse_type("X").is_err());
    }
}
