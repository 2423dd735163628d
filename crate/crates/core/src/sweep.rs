//! Property sweeps over grids of data, twists, field sizes and parameters.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::charsheaf::{little_groups, SheafParam};
use crate::endoscopy::{
    b_set, coinvariants, BSet, EndoscopicDatum, endoscopic_datum, extend_to_embedding, fixed_omega, rational_form, stable_parameters,
    stabilizer_omega, steinberg_component_group,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lattice::IntMatrix;
use crate::root_datum::{cartan_matrix, BasedAutomorphism, Family, FrobeniusTwist, Isogeny, RootDatum};
use crate::weyl::{ActingGroup, WeylGroup, DEFAULT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepCheck {
    /// `|𝔅_L/Ad_ε(Ω_L)| = |(Ω_L)_Fr|`.
    Coinvariants,
    /// `Ω_L → W_s/W_s°` is an isomorphism.
    Steinberg,
    /// Unique length-minimal coset representatives, `w^β(Φ_L⁺) ⊂ Φ⁺`,
    /// `σ_{βε}(Φ_L⁺) = Φ_L⁺`.
    MinimalRepresentatives,
    /// `Ω_{L,1} = Ω_L^ε`.
    BetaOne,
}

impl SweepCheck {
    pub const ALL: [SweepCheck; 4] = [
        SweepCheck::Coinvariants,
        SweepCheck::Steinberg,
        SweepCheck::MinimalRepresentatives,
        SweepCheck::BetaOne,
    ];

    /// The identity the check verifies.
    pub fn identity(self) -> &'static str {
        match self {
            SweepCheck::Coinvariants => "(Ω_L)_Fr = 𝔅_L/Ad_ε(Ω_L)",
            SweepCheck::Steinberg => "Ω_L ≅ W_s/W_s°",
            SweepCheck::MinimalRepresentatives => "unique minimal w^β with σ_{βε}(Φ_L⁺) = Φ_L⁺",
            SweepCheck::BetaOne => "Ω_{L,1} = Ω_L^ε",
        }
    }
}

impl fmt::Display for SweepCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepCheck::Coinvariants => "coinvariants",
            SweepCheck::Steinberg => "steinberg",
            SweepCheck::MinimalRepresentatives => "minimal-representatives",
            SweepCheck::BetaOne => "beta-one",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    /// `(family, rank)` pairs.
    pub types: Vec<(Family, usize)>,
    pub isogenies: Vec<Isogeny>,
    pub qs: Vec<u64>,
    /// Also sweep the diagram flip where the Dynkin diagram has one.
    pub twisted: bool,
    pub denominator_bound: i64,
    pub weyl_cap: u64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            types: vec![(Family::A, 1), (Family::A, 2), (Family::A, 3), (Family::B, 2), (Family::G, 2)],
            isogenies: vec![Isogeny::SimplyConnected, Isogeny::Adjoint],
            qs: vec![2, 3, 4, 5, 7],
            twisted: true,
            denominator_bound: 12,
            weyl_cap: DEFAULT_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCase {
    pub datum: String,
    pub tau: String,
    pub q: u64,
    pub param: Vec<String>,
    pub b_size: usize,
    pub orbits: usize,
    pub omega_order: usize,
    pub failures: Vec<(SweepCheck, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub cases: Vec<SweepCase>,
    /// Grid points whose sc and ad data coincide up to coordinates (e.g.
    /// `G₂`); both are swept, in their own coordinates.
    pub coincident: Vec<String>,
    pub passed: BTreeMap<SweepCheck, usize>,
}

impl SweepReport {
    pub fn failures(&self) -> impl Iterator<Item = (&SweepCase, &(SweepCheck, String))> {
        self.cases.iter().flat_map(|c| c.failures.iter().map(move |f| (c, f)))
    }

    pub fn all_passed(&self) -> bool {
        self.cases.iter().all(|c| c.failures.is_empty())
    }
}

struct GridPoint {
    label: String,
    tau_label: &'static str,
    weyl: usize,
    eps: FrobeniusTwist,
}

/// The reverse of the `A_n` labels, where the diagram has a flip.
fn diagram_flip(family: Family, rank: usize) -> Option<Vec<usize>> {
    (family == Family::A && rank >= 2).then(|| (0..rank).rev().collect())
}

pub fn run_sweep(grid: &SweepGrid, exec: Exec) -> Result<SweepReport> {
    let mut groups: Vec<(WeylGroup, WeylGroup)> = Vec::new();
    let mut points = Vec::new();
    let mut coincident = Vec::new();
    for &(family, rank) in &grid.types {
        for &iso in &grid.isogenies {
            let d = RootDatum::named(family, rank, iso)?;
            let label = format!("{family}{rank}-{iso}");
            // a unimodular Cartan matrix makes sc and ad the same datum
            let unimodular = IntMatrix::from_rows(&cartan_matrix(family, rank), rank).det().abs() == 1;
            if unimodular && iso == Isogeny::Adjoint {
                coincident.push(label.clone());
            }
            let w = WeylGroup::generate(&d, grid.weyl_cap)?;
            let dual_w = WeylGroup::generate(&d.dual(), grid.weyl_cap)?;
            let weyl = groups.len();
            groups.push((w, dual_w));
            let mut taus = vec![("1", BasedAutomorphism::identity(&d))];
            if grid.twisted {
                if let Some(perm) = diagram_flip(family, rank) {
                    taus.push(("flip", BasedAutomorphism::from_simple_permutation(&d, &perm)?));
                }
            }
            for (tau_label, tau) in taus {
                for &q in &grid.qs {
                    points.push(GridPoint {
                        label: label.clone(),
                        tau_label,
                        weyl,
                        eps: FrobeniusTwist::new(q, tau.clone())?,
                    });
                }
            }
        }
    }
    // one coarse task per grid point; the per-w solves are too small to split
    let reps = exec.map(&points, |pt| {
        stable_parameters(&groups[pt.weyl].0, &pt.eps, grid.denominator_bound, Exec::Sequential).representatives
    });
    let jobs: Vec<(usize, SheafParam)> = reps
        .into_iter()
        .enumerate()
        .flat_map(|(k, ls)| ls.into_iter().map(move |l| (k, l)))
        .collect();
    let cases = exec.map(&jobs, |(k, l)| {
        let pt = &points[*k];
        let (w, dual_w) = &groups[pt.weyl];
        check_case(w, dual_w, pt, l)
    });
    let mut passed: BTreeMap<SweepCheck, usize> = SweepCheck::ALL.iter().map(|&c| (c, 0)).collect();
    for c in &cases {
        for check in SweepCheck::ALL {
            if c.failures.iter().all(|f| f.0 != check) {
                *passed.get_mut(&check).unwrap() += 1;
            }
        }
    }
    Ok(SweepReport {
        cases,
        coincident,
        passed,
    })
}

fn check_case(w: &WeylGroup, dual_w: &WeylGroup, pt: &GridPoint, l: &SheafParam) -> SweepCase {
    let mut case = SweepCase {
        datum: pt.label.clone(),
        tau: pt.tau_label.to_string(),
        q: pt.eps.q,
        param: l.to_strings(),
        b_size: 0,
        orbits: 0,
        omega_order: 0,
        failures: Vec::new(),
    };
    let setup = endoscopic_datum(w, &pt.eps, l).and_then(|e| b_set(w, &e).map(|b| (e, b)));
    let (e, b) = match setup {
        Ok(x) => x,
        Err(err) => {
            case.failures = SweepCheck::ALL.iter().map(|&c| (c, format!("setup: {err}"))).collect();
            return case;
        }
    };
    case.b_size = b.len();
    case.orbits = b.orbits.len();
    case.omega_order = e.little.omega.len();

    let mut record = |check: SweepCheck, r: Result<()>| {
        if let Err(err) = r {
            case.failures.push((check, err.to_string()));
        }
    };
    record(
        SweepCheck::Coinvariants,
        coinvariants(w, &e, &b).and_then(|c| {
            if c.classes.len() == b.orbits.len() {
                Ok(())
            } else {
                Err(Error::invariant(
                    "(Ω_L)_Fr = 𝔅_L/Ad_ε(Ω_L)",
                    format!("{} ≠ {}", c.classes.len(), b.orbits.len()),
                ))
            }
        }),
    );
    record(
        SweepCheck::Steinberg,
        steinberg_component_group(w, dual_w, l, &e.little).map(|_| ()),
    );
    record(SweepCheck::MinimalRepresentatives, minimal_representatives(w, &e, &b));
    record(
        SweepCheck::BetaOne,
        fixed_omega(w, &e).and_then(|fixed| {
            let stab = stabilizer_omega(&b, 0)?;
            if stab == fixed {
                Ok(())
            } else {
                Err(Error::invariant(
                    "Ω_{L,1} = Ω_L^ε",
                    format!("|Ω_{{L,1}}| = {}, |Ω_L^ε| = {}", stab.len(), fixed.len()),
                ))
            }
        }),
    );
    case
}

/// Recomputes the length minimizer of every coset from scratch and checks
/// positivity in both frames. For `W_L°·w = w·W_{εℓ}°` minimality means
/// `w^β(τΦ_L⁺) ⊂ Φ⁺`; in the stabilized frame the representative is the
/// label `ω` and the condition reads `ω(Φ_L⁺) ⊂ Φ⁺`.
fn minimal_representatives(w: &WeylGroup, e: &EndoscopicDatum, b: &BSet) -> Result<()> {
    let d = w.datum();
    let tau = e.frame.eps.tau.matrix();
    let maps_positive = |m: &IntMatrix| {
        e.little.phi_l_positive.iter().all(|&a| {
            d.index_of_root(&m.mul_vec(d.root(a))).is_some_and(|j| d.is_positive(j))
        })
    };
    for (beta, coset) in b.cosets.iter().enumerate() {
        let min_len = coset.iter().map(|&x| w.length(x)).min().unwrap_or(0);
        let minimizers: Vec<usize> = coset.iter().copied().filter(|&x| w.length(x) == min_len).collect();
        let w_beta = b.min_reps[beta];
        if minimizers != [w_beta] {
            return Err(Error::invariant(
                "unique element w^β of minimal length",
                format!("coset {beta} has minimizers {minimizers:?}"),
            ));
        }
        if w_beta != w.mul(b.labels[beta], e.frame.w_s) {
            return Err(Error::invariant("w^β = ω·w_s", format!("β = {beta}")));
        }
        if !maps_positive(&w.matrix(w_beta).mul(tau)) || !maps_positive(w.matrix(b.labels[beta])) {
            return Err(Error::invariant("w^β(Φ_L⁺) ⊂ Φ⁺", format!("β = {beta}")));
        }
        if !maps_positive(w.matrix(w.inv(w_beta))) {
            return Err(Error::invariant("(w^β)⁻¹(Φ_L⁺) ⊂ Φ⁺", format!("β = {beta}")));
        }
        rational_form(w, e, b, beta)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectedCenterEntry {
    pub label: String,
    pub rank: usize,
    /// Parameters of the connected-center datum itself.
    pub params_checked: usize,
    /// Parameters of the original datum extended through the embedding.
    pub extensions_checked: usize,
    pub violations: Vec<String>,
}

/// Every `ℓ` of denominator exactly `d`: numerators in `[0, d)^rank` with
/// no common factor with `d`.
pub fn params_with_denominator(rank: usize, d: i64) -> Vec<SheafParam> {
    let total = (d as usize).pow(rank as u32);
    (0..total)
        .filter_map(|mut k| {
            let num: Vec<i64> = (0..rank)
                .map(|_| {
                    let x = (k % d as usize) as i64;
                    k /= d as usize;
                    x
                })
                .collect();
            (num.iter().fold(d, |g, &x| g.gcd(&x)) == 1).then(|| SheafParam::from_parts(num, d))
        })
        .collect()
}

fn omega_violations(w: &WeylGroup, params: &[SheafParam], exec: Exec) -> Vec<String> {
    exec.map(params, |l| match little_groups(w, l) {
        Ok(lg) if lg.omega.len() == 1 => None,
        Ok(lg) => Some(format!("ℓ = {l}: |Ω_L| = {}", lg.omega.len())),
        Err(e) => Some(format!("ℓ = {l}: {e}")),
    })
    .into_iter()
    .flatten()
    .collect()
}

/// `Ω_L = 1` for `GL₂`, `GL₃` and the regular embeddings of `A₁`-sc,
/// `A₂`-sc, `B₂`-ad, `C₂`-sc, over every `ℓ` of denominator at most `bound`.
pub fn connected_center_sweep(bound: i64, exec: Exec) -> Result<Vec<ConnectedCenterEntry>> {
    let all_params = |rank: usize| -> Vec<SheafParam> { (1..=bound).flat_map(|d| params_with_denominator(rank, d)).collect() };
    let mut out = Vec::new();
    for n in [2, 3] {
        let d = RootDatum::gl(n)?;
        let w = WeylGroup::generate(&d, DEFAULT_CAP)?;
        let params = all_params(d.rank());
        out.push(ConnectedCenterEntry {
            label: format!("GL{n}"),
            rank: d.rank(),
            params_checked: params.len(),
            extensions_checked: 0,
            violations: omega_violations(&w, &params, exec),
        });
    }
    for (family, rank, iso) in [
        (Family::A, 1, Isogeny::SimplyConnected),
        (Family::A, 2, Isogeny::SimplyConnected),
        (Family::B, 2, Isogeny::Adjoint),
        (Family::C, 2, Isogeny::SimplyConnected),
    ] {
        let d = RootDatum::named(family, rank, iso)?;
        let emb = d.regular_embedding()?;
        let mut violations = Vec::new();
        if !emb.big.has_connected_center() {
            violations.push("X_c/ZΦ_c has torsion".to_string());
        }
        let big_w = WeylGroup::generate(&emb.big, DEFAULT_CAP)?;
        let params = all_params(emb.big.rank());
        violations.extend(omega_violations(&big_w, &params, exec));
        let small = all_params(d.rank());
        let ext_violations = exec.map(&small, |l| {
            // any prime not dividing the denominator serves as p
            let p = [2u64, 3, 5, 7, 11, 13].into_iter().find(|p| l.denominator() % *p as i64 != 0).unwrap();
            extend_to_embedding(&d, &emb, &big_w, l, p).err().map(|e| format!("extension of ℓ = {l}: {e}"))
        });
        violations.extend(ext_violations.into_iter().flatten());
        out.push(ConnectedCenterEntry {
            label: format!("{family}{rank}-{iso} embedded"),
            rank: emb.big.rank(),
            params_checked: params.len(),
            extensions_checked: small.len(),
            violations,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_passes() {
        let grid = SweepGrid {
            types: vec![(Family::A, 1), (Family::A, 2)],
            qs: vec![2, 3],
            denominator_bound: 6,
            ..SweepGrid::default()
        };
        let r = run_sweep(&grid, Exec::default()).unwrap();
        assert!(r.all_passed(), "{:?}", r.failures().next());
        assert!(r.cases.len() > 10);
        assert!(r.cases.iter().any(|c| c.tau == "flip"));
    }

    #[test]
    fn modes_agree() {
        let grid = SweepGrid {
            types: vec![(Family::B, 2)],
            qs: vec![3],
            denominator_bound: 8,
            ..SweepGrid::default()
        };
        let a = serde_json::to_string(&run_sweep(&grid, Exec::Sequential).unwrap()).unwrap();
        let b = serde_json::to_string(&run_sweep(&grid, Exec::Parallel).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn g2_isogenies_coincide() {
        let grid = SweepGrid {
            types: vec![(Family::G, 2)],
            qs: vec![5],
            denominator_bound: 4,
            ..SweepGrid::default()
        };
        let r = run_sweep(&grid, Exec::default()).unwrap();
        assert_eq!(r.coincident, vec!["G2-ad".to_string()]);
        let count = |label: &str| r.cases.iter().filter(|c| c.datum == label).count();
        assert_eq!(count("G2-sc"), count("G2-ad"));
    }

    #[test]
    fn primitive_parameters() {
        assert_eq!(params_with_denominator(1, 6).len(), 2);
        assert_eq!(params_with_denominator(2, 2).len(), 3);
        assert_eq!(params_with_denominator(2, 1).len(), 1);
    }

    #[test]
    fn connected_center_small_bound() {
        for entry in connected_center_sweep(4, Exec::default()).unwrap() {
            assert!(entry.violations.is_empty(), "{}: {:?}", entry.label, entry.violations);
        }
    }
}
