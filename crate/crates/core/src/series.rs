//! Index data of geometric and rational series: the endoscopic forms, the
//! equivariance groups, and for disconnected groups the `π₀` bookkeeping.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::charsheaf::{frobenius_act, stabilize, SheafParam};
use crate::endoscopy::{
    b_set, coinvariants, endoscopic_datum, endoscopic_datum_in_frame, fixed_omega, rational_form, stabilizer_omega, BSet,
    EndoscopicDatum, Frame, RationalForm,
};
use crate::error::{Error, Result};
use crate::root_datum::{BasedAutomorphism, FrobeniusTwist, RootDatum};
use crate::weyl::{ActingGroup, ComponentAction, ExtendedWeylGroup, WeylGroup};

/// Right-hand side of the geometric-series equivalence: forms of `H` indexed
/// by `𝔅_L` (or `𝔅_L°`), with the equivariance group `Ω_L`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometricSeriesReport {
    pub param: SheafParam,
    pub q: u64,
    pub orbit_size: usize,
    /// `w_s`, sending `ε·ℓ` to `ℓ`.
    pub stabilizer_of_frobenius: usize,
    pub phi_l: Vec<usize>,
    pub phi_l_positive: Vec<usize>,
    pub h_roots: Vec<Vec<i64>>,
    pub h_simple: Vec<Vec<i64>>,
    pub w_l_order: usize,
    pub w_l0_order: usize,
    pub omega: Vec<usize>,
    /// `w^β` for each `β`.
    pub min_reps: Vec<usize>,
    pub orbits: Vec<Vec<usize>>,
    pub forms: Vec<RationalFormSummary>,
    pub disconnected: Option<DisconnectedGeometric>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalFormSummary {
    pub beta: usize,
    pub w_beta: usize,
    pub sigma: Vec<Vec<i64>>,
    pub sigma_order: u32,
}

impl From<&RationalForm> for RationalFormSummary {
    fn from(f: &RationalForm) -> Self {
        RationalFormSummary {
            beta: f.beta,
            w_beta: f.w_beta,
            sigma: f.sigma.to_rows(),
            sigma_order: f.sigma_order,
        }
    }
}

/// `π₀` data for the disconnected case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisconnectedGeometric {
    pub pi0_order: usize,
    /// `Ω_L° = Ω_L ∩ W°`.
    pub omega_connected: Vec<usize>,
    /// `π₀(G)_{W°ℓ}`, the components stabilizing the `W°`-orbit.
    pub pi0_stabilizer: Vec<usize>,
    /// `|W°\W/W_L|`, equal to the number of `W°`-orbits in `Wℓ`.
    pub double_cosets: usize,
    pub connected_orbits: Vec<Vec<SheafParam>>,
}

fn assemble<G: ActingGroup + ?Sized>(g: &G, e: &EndoscopicDatum, b: &BSet) -> Result<GeometricSeriesReport> {
    let forms = (0..b.len())
        .map(|beta| rational_form(g, e, b, beta).map(|f| RationalFormSummary::from(&f)))
        .collect::<Result<Vec<_>>>()?;
    let d = g.datum();
    let orbit: BTreeSet<SheafParam> = (0..g.order()).map(|a| e.param.act(g.matrix(a))).collect();
    Ok(GeometricSeriesReport {
        param: e.param.clone(),
        q: e.frame.eps.q,
        orbit_size: orbit.len(),
        stabilizer_of_frobenius: e.frame.w_s,
        phi_l: e.little.phi_l.clone(),
        phi_l_positive: e.little.phi_l_positive.clone(),
        h_roots: e.h_datum.roots().to_vec(),
        h_simple: e.little.w_l0.simple.iter().map(|&i| d.root(i).to_vec()).collect(),
        w_l_order: e.little.w_l.len(),
        w_l0_order: e.little.w_l0.group.len(),
        omega: e.little.omega.elements.clone(),
        min_reps: b.min_reps.clone(),
        orbits: b.orbits.clone(),
        forms,
        disconnected: None,
    })
}

/// Geometric series of a connected group. Requires `Wℓ` to be `ε`-stable.
pub fn geometric_report<G: ActingGroup + ?Sized>(g: &G, eps: &FrobeniusTwist, l: &SheafParam) -> Result<GeometricSeriesReport> {
    let e = endoscopic_datum(g, eps, l)?;
    let b = b_set(g, &e)?;
    coinvariants(g, &e, &b)?;
    assemble(g, &e, &b)
}

/// One rational series inside a geometric series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalSeriesReport {
    /// Representative `β`, least in its orbit.
    pub beta: usize,
    pub orbit: Vec<usize>,
    pub w_beta: usize,
    pub sigma: Vec<Vec<i64>>,
    /// `Ω_{L,β}`.
    pub omega_beta: Vec<usize>,
    /// `Ω_L^ε`, reported for `β = 1`.
    pub omega_fixed: Option<Vec<usize>>,
    pub disconnected: Option<DisconnectedRational>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisconnectedRational {
    /// `Ω°_{L,β} = Ω_{L,β} ∩ W°`.
    pub omega_beta_connected: Vec<usize>,
    /// Image of `Ω_{L,β}` in `π₀`, isomorphic to `Ω_{L,β}/Ω°_{L,β}`.
    pub pi0_image: Vec<usize>,
}

fn rational_reports<G: ActingGroup + ?Sized>(g: &G, e: &EndoscopicDatum, b: &BSet) -> Result<Vec<RationalSeriesReport>> {
    let fixed = fixed_omega(g, e)?;
    let mut out = Vec::with_capacity(b.orbits.len());
    for orbit in &b.orbits {
        let beta = orbit[0];
        let form = rational_form(g, e, b, beta)?;
        let omega_beta = stabilizer_omega(b, beta)?;
        let omega_fixed = if beta == 0 {
            if omega_beta != fixed {
                return Err(Error::invariant(
                    "Ω_{L,1} = Ω_L^ε",
                    format!("|Ω_{{L,1}}| = {}, |Ω_L^ε| = {}", omega_beta.len(), fixed.len()),
                ));
            }
            Some(fixed.clone())
        } else {
            None
        };
        out.push(RationalSeriesReport {
            beta,
            orbit: orbit.clone(),
            w_beta: form.w_beta,
            sigma: form.sigma.to_rows(),
            omega_beta,
            omega_fixed,
            disconnected: None,
        });
    }
    if out.first().map(|r| r.beta) != Some(0) {
        return Err(Error::invariant("β = 1 lies in 𝔅_L", "no orbit contains β = 1"));
    }
    Ok(out)
}

/// One report per `Ad_ε`-orbit on `𝔅_L`; the `β = 1` orbit comes first.
pub fn rational_partition<G: ActingGroup + ?Sized>(g: &G, eps: &FrobeniusTwist, l: &SheafParam) -> Result<Vec<RationalSeriesReport>> {
    let e = endoscopic_datum(g, eps, l)?;
    let b = b_set(g, &e)?;
    let reports = rational_reports(g, &e, &b)?;
    let total: usize = reports.iter().map(|r| r.orbit.len()).sum();
    if total != b.len() {
        return Err(Error::invariant("Σ|orbit| = |𝔅_L|", format!("{total} ≠ {}", b.len())));
    }
    Ok(reports)
}

/// A group with reductive identity component and finite `π₀`, acting on the
/// based datum of the identity component.
#[derive(Debug, Clone)]
pub struct DisconnectedInput {
    pub connected: RootDatum,
    pub components: ComponentAction,
    pub eps: FrobeniusTwist,
}

impl DisconnectedInput {
    /// Checks that `ε` commutes with the component action, so every
    /// component is `ε`-stable.
    pub fn new(connected: RootDatum, components: ComponentAction, eps: FrobeniusTwist) -> Result<Self> {
        components.validate(&connected)?;
        for (c, aut) in components.automorphisms.iter().enumerate() {
            if aut.matrix().mul(eps.tau.matrix()) != eps.tau.matrix().mul(aut.matrix()) {
                return Err(Error::input(format!("ε does not commute with the action of component {c}")));
            }
        }
        Ok(DisconnectedInput {
            connected,
            components,
            eps,
        })
    }

    pub fn connected_only(connected: RootDatum, eps: FrobeniusTwist) -> Result<Self> {
        let c = ComponentAction::trivial(&connected);
        Self::new(connected, c, eps)
    }

    pub fn group(&self, cap: u64) -> Result<ExtendedWeylGroup> {
        let w0 = WeylGroup::generate(&self.connected, cap)?;
        ExtendedWeylGroup::extend(w0, self.components.clone())
    }

    pub fn component_automorphism(&self, c: usize) -> &BasedAutomorphism {
        &self.components.automorphisms[c]
    }
}

/// Endoscopic data in `W = W° ⋊ π₀` with the stabilizing element taken in
/// `W°`, and `𝔅_L°` (the cosets inside `W°`) with the full `Ω_L` action.
fn disconnected_setup(ext: &ExtendedWeylGroup, eps: &FrobeniusTwist, l: &SheafParam) -> Result<(EndoscopicDatum, BSet)> {
    let w0 = ext.connected();
    let ws0 = stabilize(w0, eps, l).map_err(|_| Error::input("W°ℓ is not ε-stable"))?;
    let frame = Frame {
        eps: eps.clone(),
        w_s: ext.from_connected(ws0),
    };
    let e = endoscopic_datum_in_frame(ext, frame, l)?;
    let full = b_set(ext, &e)?;
    let keep: Vec<usize> = (0..full.len()).filter(|&b| ext.in_identity_component(full.min_reps[b])).collect();
    let b0 = full.restrict(&keep)?;
    Ok((e, b0))
}

pub fn disconnected_geometric_report(input: &DisconnectedInput, ext: &ExtendedWeylGroup, l: &SheafParam) -> Result<GeometricSeriesReport> {
    let eps = &input.eps;
    let (e, b0) = disconnected_setup(ext, eps, l)?;
    let mut report = assemble(ext, &e, &b0)?;

    let w0 = ext.connected();
    let omega_connected: Vec<usize> = e.little.omega.iter().filter(|&o| ext.in_identity_component(o)).collect();
    let conn = crate::charsheaf::little_groups(w0, l)?;
    let conn_embedded: Vec<usize> = conn.omega.iter().map(|o| ext.from_connected(o)).collect();
    if conn_embedded != omega_connected {
        return Err(Error::invariant("Ω_L° = Ω_L ∩ W°", "connected little group disagrees"));
    }

    let orbit0: BTreeSet<SheafParam> = (0..w0.order()).map(|a| l.act(w0.matrix(a))).collect();
    let k = input.components.order();
    let pi0_stabilizer: Vec<usize> = (0..k)
        .filter(|&c| orbit0.contains(&l.act(input.component_automorphism(c).matrix())))
        .collect();
    let projected: BTreeSet<usize> = e.little.omega.iter().map(|o| ext.component(o)).collect();
    if projected.iter().copied().collect::<Vec<_>>() != pi0_stabilizer
        || omega_connected.len() * pi0_stabilizer.len() != e.little.omega.len()
    {
        return Err(Error::invariant(
            "π₀(G)_{W°ℓ} ≅ Ω_L/Ω_L°",
            format!(
                "|Ω_L| = {}, |Ω_L°| = {}, stabilizer {:?}, projection {:?}",
                e.little.omega.len(),
                omega_connected.len(),
                pi0_stabilizer,
                projected
            ),
        ));
    }

    // W°-orbits inside Wℓ
    let full_orbit: BTreeSet<SheafParam> = (0..ext.order()).map(|a| l.act(ext.matrix(a))).collect();
    let mut connected_orbits: Vec<Vec<SheafParam>> = Vec::new();
    let mut seen = BTreeSet::new();
    for m in &full_orbit {
        if seen.contains(m) {
            continue;
        }
        let o: BTreeSet<SheafParam> = (0..w0.order()).map(|a| m.act(w0.matrix(a))).collect();
        seen.extend(o.iter().cloned());
        connected_orbits.push(o.into_iter().collect());
    }
    let double_cosets = count_double_cosets(ext, &e.little.w_l.elements);
    if double_cosets != connected_orbits.len() {
        return Err(Error::invariant(
            "|W°\\W/W_L| = #W°-orbits in Wℓ",
            format!("{double_cosets} ≠ {}", connected_orbits.len()),
        ));
    }
    report.disconnected = Some(DisconnectedGeometric {
        pi0_order: k,
        omega_connected,
        pi0_stabilizer,
        double_cosets,
        connected_orbits,
    });
    Ok(report)
}

fn count_double_cosets(ext: &ExtendedWeylGroup, w_l: &[usize]) -> usize {
    let w0 = ext.connected();
    let mut seen = vec![false; ext.order()];
    let mut count = 0;
    for x in 0..ext.order() {
        if seen[x] {
            continue;
        }
        count += 1;
        for u in 0..w0.order() {
            let ux = ext.mul(ext.from_connected(u), x);
            for &v in w_l {
                seen[ext.mul(ux, v)] = true;
            }
        }
    }
    count
}

/// The `β = 1` rational series of a disconnected group: `Ω_{L,1}` computed
/// in `W`, checked against `Ω_L^ε`, with its `W°` part and `π₀` image.
pub fn disconnected_rational_report(input: &DisconnectedInput, ext: &ExtendedWeylGroup, l: &SheafParam) -> Result<RationalSeriesReport> {
    let eps = &input.eps;
    if frobenius_act(eps, l) != *l {
        return Err(Error::input("parameter is not ε-fixed"));
    }
    let (e, b0) = disconnected_setup(ext, eps, l)?;
    let reports = rational_reports(ext, &e, &b0)?;
    let mut r = reports.into_iter().next().expect("β = 1 orbit");
    let omega_beta_connected: Vec<usize> = r.omega_beta.iter().copied().filter(|&o| ext.in_identity_component(o)).collect();
    let pi0_image: BTreeSet<usize> = r.omega_beta.iter().map(|&o| ext.component(o)).collect();

    // Ω°_{L,1} against the connected pipeline
    let w0 = ext.connected();
    let conn = endoscopic_datum(w0, eps, l)?;
    let conn_fixed: Vec<usize> = fixed_omega(w0, &conn)?.into_iter().map(|o| ext.from_connected(o)).collect();
    if conn_fixed != omega_beta_connected {
        return Err(Error::invariant("Ω°_{L,1} = (Ω_L°)^ε", "connected fixed points disagree"));
    }
    // π₀ image against the twisted stabilizer of β = 1 in W_L
    let frame = &e.frame;
    let brute: BTreeSet<usize> = e
        .little
        .w_l
        .iter()
        .filter(|&w| e.little.w_l0.group.contains(ext.mul(w, ext.inv(frame.on_group(ext, w)))))
        .map(|w| ext.component(w))
        .collect();
    if brute != pi0_image || omega_beta_connected.len() * pi0_image.len() != r.omega_beta.len() {
        return Err(Error::invariant(
            "Ω_{L,1}/Ω°_{L,1} ≅ π₀ image",
            format!("image {pi0_image:?}, brute force {brute:?}"),
        ));
    }
    r.disconnected = Some(DisconnectedRational {
        omega_beta_connected,
        pi0_image: pi0_image.into_iter().collect(),
    });
    Ok(r)
}

/// Predicted number of irreducibles in a geometric series when `H` is a
/// torus: each `Rep₁` summand has one irreducible, so the count is the sum
/// over `Ω_L`-orbits on `𝔅` of the number of conjugacy classes of the
/// stabilizer.
pub fn predicted_irreducibles<G: ActingGroup + ?Sized>(g: &G, report: &GeometricSeriesReport, b: &BSet) -> Result<usize> {
    if !report.phi_l.is_empty() {
        return Err(Error::input("irreducible counts are predicted only when H is a torus"));
    }
    let mut total = 0;
    for orbit in &b.orbits {
        let stab = stabilizer_omega(b, orbit[0])?;
        total += conjugacy_class_count(g, &stab);
    }
    Ok(total)
}

/// Number of conjugacy classes of a subgroup given by its elements.
pub fn conjugacy_class_count<G: ActingGroup + ?Sized>(g: &G, elements: &[usize]) -> usize {
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for &x in elements {
        if seen.contains(&x) {
            continue;
        }
        count += 1;
        for &h in elements {
            seen.insert(g.conj(h, x));
        }
    }
    count
}

/// Geometric report plus the `𝔅_L°` used for it, for callers that need the
/// action itself.
pub fn disconnected_series_data(input: &DisconnectedInput, ext: &ExtendedWeylGroup, l: &SheafParam) -> Result<(GeometricSeriesReport, BSet)> {
    let report = disconnected_geometric_report(input, ext, l)?;
    let (_, b0) = disconnected_setup(ext, &input.eps, l)?;
    Ok((report, b0))
}
