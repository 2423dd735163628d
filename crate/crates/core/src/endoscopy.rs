//! Endoscopic data attached to a parameter: the group `H`, the twisted set
//! `𝔅_L` with its `Ad_ε(Ω_L)` action, minimal representatives `w^β`, the forms
//! `σ_{βε}`, coinvariants, Steinberg component groups and fixed points.
//!
//! Parameters whose orbit is `ε`-stable but which are not themselves fixed
//! are handled in the frame of [`stabilize`]: with `w_s` the minimal element
//! sending `ε·ℓ` to `ℓ`, the Frobenius `F = w_s·τ` (times `q`) fixes `ℓ`,
//! preserves `Φ_L⁺`, and acts on `W` by `a ↦ w_s·τaτ⁻¹·w_s⁻¹`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::charsheaf::{frobenius_act, little_groups, stabilize, LittleGroups, SheafParam};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lattice::{smith_normal_form, IntMatrix};
use crate::root_datum::{BasedAutomorphism, FrobeniusTwist, RegularEmbedding, RootDatum};
use crate::weyl::{min_coset_rep, reflection_subgroup, ActingGroup, WeylGroup};

/// The Frobenius in the stabilized frame of a parameter.
#[derive(Debug, Clone, Serialize)]
pub struct Frame {
    pub eps: FrobeniusTwist,
    /// Index of `w_s` in the acting group.
    pub w_s: usize,
}

impl Frame {
    /// `F(a) = w_s·τ(a)·w_s⁻¹`.
    pub fn on_group<G: ActingGroup + ?Sized>(&self, g: &G, a: usize) -> usize {
        g.conj(self.w_s, g.tau_conj(&self.eps.tau, a))
    }

    /// Finite part `w_s·τ` of the effective Frobenius on `X`.
    pub fn matrix<G: ActingGroup + ?Sized>(&self, g: &G) -> IntMatrix {
        g.matrix(self.w_s).mul(self.eps.tau.matrix())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EndoscopicDatum {
    pub ambient: RootDatum,
    pub param: SheafParam,
    pub frame: Frame,
    pub little: LittleGroups,
    /// Roots `Φ_L`, coroots `Φ_L^∨`, same lattices.
    pub h_datum: RootDatum,
    /// `h_roots[i]` is the ambient index of root `i` of `h_datum`.
    pub h_roots: Vec<usize>,
}

/// Builds `H` and checks `W(H) ≅ W_L°` as permutation groups of `Φ_L`.
pub fn endoscopic_datum<G: ActingGroup + ?Sized>(g: &G, eps: &FrobeniusTwist, l: &SheafParam) -> Result<EndoscopicDatum> {
    let w_s = stabilize(g, eps, l)?;
    endoscopic_datum_in_frame(g, Frame { eps: eps.clone(), w_s }, l)
}

/// As [`endoscopic_datum`], with a given stabilizing element.
pub fn endoscopic_datum_in_frame<G: ActingGroup + ?Sized>(g: &G, frame: Frame, l: &SheafParam) -> Result<EndoscopicDatum> {
    let d = g.datum();
    let little = little_groups(g, l)?;
    let phi = &little.phi_l;
    let h_datum = if phi.is_empty() {
        RootDatum::torus(d.rank())
    } else if phi.len() == d.num_roots() {
        d.clone()
    } else {
        let simple = little.w_l0.simple.iter().map(|s| phi.iter().position(|x| x == s).unwrap()).collect();
        RootDatum::new(
            d.rank(),
            phi.iter().map(|&i| d.root(i).to_vec()).collect(),
            phi.iter().map(|&i| d.coroot(i).to_vec()).collect(),
            simple,
        )
        .map_err(|e| Error::invariant("H datum validates", e.to_string()))?
    };
    let h_roots: Vec<usize> = (0..h_datum.num_roots())
        .map(|i| d.index_of_root(h_datum.root(i)).expect("H root lies in Φ"))
        .collect();
    let hw = WeylGroup::generate(&h_datum, u64::MAX)?;
    let as_phi_perm = |perm: &[u32]| -> Vec<usize> { h_roots.iter().map(|&i| perm[i] as usize).collect() };
    let from_h: BTreeSet<Vec<usize>> = (0..hw.order())
        .map(|a| hw.root_perm(a).iter().map(|&j| h_roots[j as usize]).collect())
        .collect();
    let from_w: BTreeSet<Vec<usize>> = little.w_l0.group.iter().map(|a| as_phi_perm(g.root_perm(a))).collect();
    if from_h != from_w || hw.order() != little.w_l0.group.len() {
        return Err(Error::invariant(
            "W(H) ≅ W_L°",
            format!("|W(H)| = {}, |W_L°| = {}", hw.order(), little.w_l0.group.len()),
        ));
    }
    Ok(EndoscopicDatum {
        ambient: d.clone(),
        param: l.clone(),
        frame,
        little,
        h_datum,
        h_roots,
    })
}

/// `𝔅_L = W_L°\{w : w·ε·ℓ = ℓ}` with the action `Ad_ε(ω)w = ω·w·ε(ω)⁻¹`.
///
/// Cosets are ordered by their minimal representatives (length, then
/// matrix), so `β = 1`, the coset of `w_s`, comes first.
#[derive(Debug, Clone, Serialize)]
pub struct BSet {
    /// Each coset `W_L°·ω·w_s`, as sorted group indices.
    pub cosets: Vec<Vec<usize>>,
    /// `w^β` for each coset.
    pub min_reps: Vec<usize>,
    /// The `Ω_L` label `ω` of each coset.
    pub labels: Vec<usize>,
    /// `Ω_L` elements in the order used by `action`.
    pub omega: Vec<usize>,
    /// `action[i][β]`: image of `β` under `Ad_ε(omega[i])`.
    pub action: Vec<Vec<usize>>,
    /// Orbits, each sorted, listed by their least element.
    pub orbits: Vec<Vec<usize>>,
}

impl BSet {
    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty()
    }

    pub fn orbit_of(&self, beta: usize) -> usize {
        self.orbits.iter().position(|o| o.contains(&beta)).unwrap()
    }
}

/// Computes `𝔅_L`. The parameter must be fixed by the frame's Frobenius.
pub fn b_set<G: ActingGroup + ?Sized>(g: &G, e: &EndoscopicDatum) -> Result<BSet> {
    let l = &e.param;
    let fl = frobenius_act(&e.frame.eps, l);
    if fl.act(g.matrix(e.frame.w_s)) != *l {
        return Err(Error::input("parameter is not fixed by the Frobenius; apply stabilize first"));
    }
    let lg = &e.little;
    let w_s = e.frame.w_s;
    let mut entries: Vec<(usize, Vec<usize>, usize)> = Vec::with_capacity(lg.omega.len());
    for omega in lg.omega.iter() {
        let x = g.mul(omega, w_s);
        let mut coset: Vec<usize> = lg.w_l0.group.iter().map(|u| g.mul(u, x)).collect();
        coset.sort_unstable();
        if let Some(&bad) = coset.iter().find(|&&c| fl.act(g.matrix(c)) != *l) {
            return Err(Error::invariant("W_L°·ω·w_s ⊂ {w : wεℓ = ℓ}", format!("element {bad}")));
        }
        let m = min_coset_rep(g, &lg.w_l0, &coset)?;
        entries.push((omega, coset, m));
    }
    let total: usize = entries.iter().map(|e| e.1.len()).sum();
    let direct = (0..g.order()).filter(|&a| fl.act(g.matrix(a)) == *l).count();
    if total != direct {
        return Err(Error::invariant(
            "{w : wεℓ = ℓ} = W_L·w_s",
            format!("{direct} solutions, cosets cover {total}"),
        ));
    }
    entries.sort_by(|a, b| g.length(a.2).cmp(&g.length(b.2)).then_with(|| g.matrix(a.2).cmp(g.matrix(b.2))));
    let labels: Vec<usize> = entries.iter().map(|e| e.0).collect();
    let label_pos: BTreeMap<usize, usize> = labels.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let omega: Vec<usize> = lg.omega.iter().collect();
    let tau = &e.frame.eps.tau;
    let mut action = Vec::with_capacity(omega.len());
    for &o in &omega {
        let fo = e.frame.on_group(g, o);
        if !lg.omega.contains(fo) {
            return Err(Error::invariant("F(Ω_L) = Ω_L", format!("F moves ω = {o} out of Ω_L")));
        }
        let eo_inv = g.inv(g.tau_conj(tau, o));
        let row: Vec<usize> = entries
            .iter()
            .map(|(lab, _, rep)| {
                let image = g.mul(g.mul(o, *rep), eo_inv);
                let target = g.mul(g.mul(o, *lab), g.inv(fo));
                let pos = label_pos[&target];
                debug_assert!(entries[pos].1.binary_search(&image).is_ok());
                pos
            })
            .collect();
        for (beta, &pos) in row.iter().enumerate() {
            let image = g.mul(g.mul(o, entries[beta].2), eo_inv);
            if entries[pos].1.binary_search(&image).is_err() {
                return Err(Error::invariant("Ad_ε acts on cosets", format!("ω = {o}, β = {beta}")));
            }
        }
        action.push(row);
    }
    let pos_of: BTreeMap<usize, usize> = omega.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    for (i, &a) in omega.iter().enumerate() {
        for (j, &b) in omega.iter().enumerate() {
            let ab = pos_of[&g.mul(a, b)];
            for beta in 0..entries.len() {
                if action[ab][beta] != action[i][action[j][beta]] {
                    return Err(Error::invariant("Ad_ε is a group action", format!("fails at ({a},{b})")));
                }
            }
        }
    }
    let orbits = orbits_of(&action, entries.len());
    Ok(BSet {
        min_reps: entries.iter().map(|e| e.2).collect(),
        cosets: entries.into_iter().map(|e| e.1).collect(),
        labels,
        omega,
        action,
        orbits,
    })
}

impl BSet {
    /// The sub-`𝔅` on the `β` in `keep`, which must be stable under the
    /// action; `β` indices are renumbered in the order of `keep`.
    pub fn restrict(&self, keep: &[usize]) -> Result<BSet> {
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let mut action = Vec::with_capacity(self.action.len());
        for row in &self.action {
            let r: Option<Vec<usize>> = keep.iter().map(|b| pos.get(&row[*b]).copied()).collect();
            action.push(r.ok_or_else(|| Error::invariant("Ω_L preserves 𝔅_L°", "action leaves the subset"))?);
        }
        let orbits = orbits_of(&action, keep.len());
        Ok(BSet {
            cosets: keep.iter().map(|&b| self.cosets[b].clone()).collect(),
            min_reps: keep.iter().map(|&b| self.min_reps[b]).collect(),
            labels: keep.iter().map(|&b| self.labels[b]).collect(),
            omega: self.omega.clone(),
            action,
            orbits,
        })
    }
}

/// Orbits of a permutation action given as rows of images.
pub fn orbits_of(action: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let orbit: BTreeSet<usize> = action.iter().map(|row| row[start]).chain([start]).collect();
        for &x in &orbit {
            seen[x] = true;
        }
        out.push(orbit.into_iter().collect());
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RationalForm {
    pub beta: usize,
    pub w_beta: usize,
    /// Finite part of `σ_{βε}`: the matrix of `w^β∘τ` on `X`.
    pub sigma: IntMatrix,
    pub sigma_order: u32,
    /// Action of `σ_{βε}` on `Φ_L⁺`, as ambient root indices.
    pub positive_perm: Vec<(usize, usize)>,
    pub q: u64,
}

/// `σ_{βε}`, checked to be a based automorphism of `H` preserving `Φ_L⁺`.
pub fn rational_form<G: ActingGroup + ?Sized>(g: &G, e: &EndoscopicDatum, b: &BSet, beta: usize) -> Result<RationalForm> {
    let w_beta = *b
        .min_reps
        .get(beta)
        .ok_or_else(|| Error::input(format!("β = {beta} is not in 𝔅_L (size {})", b.len())))?;
    let sigma = g.matrix(w_beta).mul(e.frame.eps.tau.matrix());
    let d = g.datum();
    let pos: BTreeSet<usize> = e.little.phi_l_positive.iter().copied().collect();
    let mut positive_perm = Vec::with_capacity(pos.len());
    for &a in &pos {
        let image: Vec<i64> = sigma.mul_vec(d.root(a));
        match d.index_of_root(&image) {
            Some(j) if pos.contains(&j) => positive_perm.push((a, j)),
            _ => {
                return Err(Error::invariant(
                    "σ_{βε}(Φ_L⁺) = Φ_L⁺",
                    format!("β = {beta} sends root {a} outside Φ_L⁺"),
                ))
            }
        }
    }
    let aut = BasedAutomorphism::from_matrix(&e.h_datum, sigma.clone())
        .map_err(|err| Error::invariant("σ_{βε} is a based automorphism of H", err.to_string()))?;
    Ok(RationalForm {
        beta,
        w_beta,
        sigma,
        sigma_order: aut.order(),
        positive_perm,
        q: e.frame.eps.q,
    })
}

/// Twisted classes of `Ω_L` under `ω' ~ ω·ω'·F(ω)⁻¹` and their bijection with
/// the `Ad_ε`-orbits of `𝔅_L`.
#[derive(Debug, Clone, Serialize)]
pub struct Coinvariants {
    /// Classes of `Ω_L` elements, sorted.
    pub classes: Vec<Vec<usize>>,
    /// `orbit_to_class[k]`: the class containing the labels of orbit `k`.
    pub orbit_to_class: Vec<usize>,
}

pub fn coinvariants<G: ActingGroup + ?Sized>(g: &G, e: &EndoscopicDatum, b: &BSet) -> Result<Coinvariants> {
    let omega: Vec<usize> = e.little.omega.iter().collect();
    let fo: Vec<usize> = omega.iter().map(|&o| e.frame.on_group(g, o)).collect();
    let mut seen = BTreeSet::new();
    let mut classes = Vec::new();
    for &x in &omega {
        if seen.contains(&x) {
            continue;
        }
        let class: BTreeSet<usize> = omega
            .iter()
            .zip(&fo)
            .map(|(&o, &f)| g.mul(g.mul(o, x), g.inv(f)))
            .collect();
        seen.extend(class.iter().copied());
        classes.push(class.into_iter().collect::<Vec<_>>());
    }
    let class_of = |w: usize| classes.iter().position(|c: &Vec<usize>| c.binary_search(&w).is_ok());
    let mut orbit_to_class = Vec::with_capacity(b.orbits.len());
    for orbit in &b.orbits {
        let cs: BTreeSet<Option<usize>> = orbit.iter().map(|&beta| class_of(b.labels[beta])).collect();
        match (cs.len(), cs.first()) {
            (1, Some(Some(c))) => orbit_to_class.push(*c),
            _ => return Err(Error::invariant("(Ω_L)_Fr = 𝔅_L/Ad_ε(Ω_L)", "an orbit meets several classes")),
        }
    }
    let distinct: BTreeSet<usize> = orbit_to_class.iter().copied().collect();
    if distinct.len() != orbit_to_class.len() || classes.len() != b.orbits.len() {
        return Err(Error::invariant(
            "(Ω_L)_Fr = 𝔅_L/Ad_ε(Ω_L)",
            format!("{} classes, {} orbits", classes.len(), b.orbits.len()),
        ));
    }
    Ok(Coinvariants { classes, orbit_to_class })
}

/// `π₀(Z(s)) ≅ W_s°\W_s ≅ Ω_L`, computed on an independently generated dual
/// Weyl group.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentGroupReport {
    /// Dual root indices whose reflections generate `W_s°`.
    pub w_s0_generators: Vec<usize>,
    pub w_s_order: usize,
    pub w_s0_order: usize,
    /// Coset representatives of `W_s/W_s°` in the dual Weyl group.
    pub coset_reps: Vec<usize>,
    /// Multiplication table of the quotient.
    pub table: Vec<Vec<usize>>,
    /// `(ω, coset index)` for each `ω ∈ Ω_L`.
    pub map: Vec<(usize, usize)>,
}

pub fn steinberg_component_group(w: &WeylGroup, dual_w: &WeylGroup, l: &SheafParam, little: &LittleGroups) -> Result<ComponentGroupReport> {
    let dual = dual_w.datum();
    // W' acts on X' = Y; its action on Y' = X is the inverse transpose
    let on_x: Vec<IntMatrix> = (0..dual_w.order())
        .map(|a| dual_w.matrix(a).inverse().expect("Weyl elements are unimodular").transpose())
        .collect();
    let w_s: Vec<usize> = (0..dual_w.order()).filter(|&a| l.act(&on_x[a]) == *l).collect();
    let sub_roots: Vec<usize> = (0..dual.num_roots()).filter(|&i| l.pairs_integrally(dual.root(i))).collect();
    let w_s0 = reflection_subgroup(dual_w, &sub_roots)?;
    if let Some(x) = w_s0.group.iter().find(|x| w_s.binary_search(x).is_err()) {
        return Err(Error::invariant("W_s° ⊂ W_s", format!("dual element {x} moves s")));
    }
    let mut coset_of = vec![usize::MAX; dual_w.order()];
    let mut coset_reps = Vec::new();
    for &x in &w_s {
        if coset_of[x] != usize::MAX {
            continue;
        }
        let k = coset_reps.len();
        coset_reps.push(x);
        for u in w_s0.group.iter() {
            coset_of[dual_w.mul(u, x)] = k;
        }
    }
    let table: Vec<Vec<usize>> = coset_reps
        .iter()
        .map(|&a| coset_reps.iter().map(|&b| coset_of[dual_w.mul(a, b)]).collect())
        .collect();
    let mut map = Vec::with_capacity(little.omega.len());
    for o in little.omega.iter() {
        let m = w.matrix(o).inverse().expect("unimodular").transpose();
        let x = dual_w
            .index_of_matrix(&m)
            .ok_or_else(|| Error::invariant("W ≅ W(G^∨)", format!("ω = {o} has no dual image")))?;
        if coset_of[x] == usize::MAX {
            return Err(Error::invariant("Ω_L → W_s/W_s°", format!("image of ω = {o} does not fix s")));
        }
        map.push((o, coset_of[x]));
    }
    let img: BTreeMap<usize, usize> = map.iter().copied().collect();
    for &(a, ca) in &map {
        for &(b, cb) in &map {
            if img[&w.mul(a, b)] != table[ca][cb] {
                return Err(Error::invariant("Ω_L ≅ W_s°\\W_s", "map is not a homomorphism"));
            }
        }
    }
    let targets: BTreeSet<usize> = map.iter().map(|m| m.1).collect();
    if targets.len() != map.len() || targets.len() != coset_reps.len() {
        return Err(Error::invariant(
            "Ω_L ≅ W_s°\\W_s",
            format!("|Ω_L| = {}, |W_s/W_s°| = {}, image size {}", map.len(), coset_reps.len(), targets.len()),
        ));
    }
    Ok(ComponentGroupReport {
        w_s0_generators: w_s0.simple.clone(),
        w_s_order: w_s.len(),
        w_s0_order: w_s0.group.len(),
        coset_reps,
        table,
        map,
    })
}

/// `Ω_L^ε`, checked against `{ω : ω·ε(ω)⁻¹ ∈ W_L°}`.
pub fn fixed_omega<G: ActingGroup + ?Sized>(g: &G, e: &EndoscopicDatum) -> Result<Vec<usize>> {
    let lg = &e.little;
    let fixed: Vec<usize> = lg.omega.iter().filter(|&o| e.frame.on_group(g, o) == o).collect();
    let via_w0: Vec<usize> = lg
        .omega
        .iter()
        .filter(|&o| lg.w_l0.group.contains(g.mul(o, g.inv(e.frame.on_group(g, o)))))
        .collect();
    if fixed != via_w0 {
        return Err(Error::invariant(
            "{ω : ωε(ω)⁻¹ ∈ W_L°} = Ω_L^ε",
            format!("{} fixed, {} with ωε(ω)⁻¹ ∈ W_L°", fixed.len(), via_w0.len()),
        ));
    }
    Ok(fixed)
}

/// `Ω_{L,β}`, the stabilizer of `β` under `Ad_ε`.
pub fn stabilizer_omega(b: &BSet, beta: usize) -> Result<Vec<usize>> {
    if beta >= b.len() {
        return Err(Error::input(format!("β = {beta} is not in 𝔅_L (size {})", b.len())));
    }
    let stab: Vec<usize> = b
        .omega
        .iter()
        .zip(&b.action)
        .filter(|(_, row)| row[beta] == beta)
        .map(|(&o, _)| o)
        .collect();
    let orbit = &b.orbits[b.orbit_of(beta)];
    if stab.len() * orbit.len() != b.omega.len() {
        return Err(Error::invariant(
            "|orbit|·|Ω_{L,β}| = |Ω_L|",
            format!("{}·{} ≠ {}", orbit.len(), stab.len(), b.omega.len()),
        ));
    }
    Ok(stab)
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingExtension {
    pub param_c: SheafParam,
    pub phi_l_c: Vec<usize>,
    pub w_l_c_order: usize,
    pub w_l0_c_order: usize,
    pub omega_c_order: usize,
}

/// The lexicographically least `ℓ_c` with `restriction·ℓ_c ≡ ℓ` and
/// denominator dividing that of `ℓ`, with `Ω_{L_c} = 1` and
/// `Φ_{L_c}` the image of `Φ_L` checked.
pub fn extend_to_embedding(
    datum: &RootDatum,
    emb: &RegularEmbedding,
    big_w: &WeylGroup,
    l: &SheafParam,
    p: u64,
) -> Result<EmbeddingExtension> {
    let r = &emb.restriction;
    let (rows, n) = (r.rows(), r.cols());
    let d = l.denominator();
    let s = smith_normal_form(r);
    if s.diag.len() < rows || s.diag[..rows].iter().any(|&x| x != 1) {
        return Err(Error::invariant("restriction X_c → X surjective", format!("{:?}", s.diag)));
    }
    let un = s.u.mul_vec(l.numerators());
    let free = n - rows;
    let mut best: Option<SheafParam> = None;
    let total = (d as usize).pow(free as u32);
    for k in 0..total {
        let mut z = un.clone();
        let mut kk = k;
        for _ in 0..free {
            z.push((kk % d as usize) as i64);
            kk /= d as usize;
        }
        let cand = SheafParam::from_parts(s.v.mul_vec(&z), d);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    }
    let lc = best.expect("at least one lift");
    if lc.act(r) != *l {
        return Err(Error::invariant("restriction(ℓ_c) = ℓ", format!("lift {lc} restricts wrongly")));
    }
    if lc.denominator() % p as i64 == 0 {
        return Err(Error::input(format!("extension has denominator divisible by p = {p}")));
    }
    let lg = little_groups(big_w, &lc)?;
    let small_phi: BTreeSet<usize> = crate::charsheaf::endoscopic_roots(l, datum)
        .into_iter()
        .map(|i| emb.root_map[i])
        .collect();
    let phi_c: BTreeSet<usize> = lg.phi_l.iter().copied().collect();
    if small_phi != phi_c {
        return Err(Error::invariant("H_c is the full preimage of H", "Φ_{L_c} differs from the image of Φ_L"));
    }
    if lg.omega.len() != 1 {
        return Err(Error::invariant(
            "Ω_{L_c} = 1 (connected center)",
            format!("|Ω_{{L_c}}| = {}", lg.omega.len()),
        ));
    }
    Ok(EmbeddingExtension {
        param_c: lc,
        phi_l_c: lg.phi_l.clone(),
        w_l_c_order: lg.w_l.len(),
        w_l0_c_order: lg.w_l0.group.len(),
        omega_c_order: lg.omega.len(),
    })
}

/// Parameters of bounded denominator in `ε`-stable orbits.
#[derive(Debug, Clone, Serialize)]
pub struct StableParameters {
    /// Lexicographically least element of each orbit, sorted.
    pub representatives: Vec<SheafParam>,
    /// Orbit sizes, aligned with `representatives`.
    pub orbit_sizes: Vec<usize>,
    /// Solutions skipped because their denominator exceeds the bound.
    pub skipped: usize,
}

/// All `ℓ` with `(q·wτ − 1)ℓ ∈ X` for some `w`, of denominator at most
/// `bound` and prime to `p`, grouped into `W`-orbits.
pub fn stable_parameters<G: ActingGroup + ?Sized>(g: &G, eps: &FrobeniusTwist, bound: i64, exec: Exec) -> StableParameters {
    let rank = g.datum().rank();
    let per_w: Vec<(Vec<SheafParam>, usize)> = exec.map_range(0..g.order(), |a| {
        let m = g.matrix(a).mul(eps.tau.matrix()).scale(eps.q as i64).sub(&IntMatrix::identity(rank));
        let s = smith_normal_form(&m);
        let dens: Vec<i64> = s.diag.clone();
        assert!(dens.iter().all(|&x| x != 0), "q·wτ − 1 is invertible");
        let count: i64 = dens.iter().product();
        let mut found = Vec::new();
        let mut skipped = 0;
        for k in 0..count {
            // ℓ = V·(k_i / D_i)
            let mut kk = k;
            let lcm = dens.iter().fold(1i64, |l, &x| num_integer::lcm(l, x));
            let mut z = Vec::with_capacity(rank);
            for &di in &dens {
                z.push((kk % di) * (lcm / di));
                kk /= di;
            }
            let l = SheafParam::from_parts(s.v.mul_vec(&z), lcm);
            if l.denominator() > bound {
                skipped += 1;
            } else if l.denominator() % eps.p as i64 != 0 {
                found.push(l);
            }
        }
        (found, skipped)
    });
    let mut all: BTreeSet<SheafParam> = BTreeSet::new();
    let mut skipped_set = 0;
    for (f, s) in per_w {
        all.extend(f);
        skipped_set += s;
    }
    let mut reps = Vec::new();
    let mut sizes = Vec::new();
    let mut done: BTreeSet<SheafParam> = BTreeSet::new();
    for l in &all {
        if done.contains(l) {
            continue;
        }
        let orbit: BTreeSet<SheafParam> = (0..g.order()).map(|a| l.act(g.matrix(a))).collect();
        sizes.push(orbit.len());
        reps.push(orbit.first().unwrap().clone());
        done.extend(orbit);
    }
    StableParameters {
        representatives: reps,
        orbit_sizes: sizes,
        skipped: skipped_set,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charsheaf::parse_fraction;
    use crate::root_datum::{Family, Isogeny};
    use crate::weyl::DEFAULT_CAP;

    fn group(f: Family, n: usize, iso: Isogeny) -> WeylGroup {
        WeylGroup::generate(&RootDatum::named(f, n, iso).unwrap(), DEFAULT_CAP).unwrap()
    }

    fn param(v: &[&str]) -> SheafParam {
        SheafParam::from_rationals(&v.iter().map(|s| parse_fraction(s).unwrap()).collect::<Vec<_>>())
    }

    #[test]
    fn sl2_half() {
        let w = group(Family::A, 1, Isogeny::SimplyConnected);
        let eps = FrobeniusTwist::split(w.datum(), 3).unwrap();
        let e = endoscopic_datum(&w, &eps, &param(&["1/2"])).unwrap();
        assert_eq!(e.h_datum, RootDatum::torus(1));
        let b = b_set(&w, &e).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.orbits.len(), 2);
        assert_eq!(b.min_reps[0], w.identity());
        let f0 = rational_form(&w, &e, &b, 0).unwrap();
        let f1 = rational_form(&w, &e, &b, 1).unwrap();
        assert_eq!(f0.sigma, IntMatrix::identity(1));
        assert_eq!(f1.sigma, IntMatrix::from_rows(&[vec![-1]], 1));
        assert_eq!(coinvariants(&w, &e, &b).unwrap().classes.len(), 2);
        assert_eq!(fixed_omega(&w, &e).unwrap().len(), 2);
        assert_eq!(stabilizer_omega(&b, 0).unwrap().len(), 2);
        let dual = WeylGroup::generate(&w.datum().dual(), DEFAULT_CAP).unwrap();
        let c = steinberg_component_group(&w, &dual, &e.param, &e.little).unwrap();
        assert_eq!((c.w_s_order, c.w_s0_order, c.coset_reps.len()), (2, 1, 2));
    }

    #[test]
    fn zero_parameter() {
        let w = group(Family::A, 2, Isogeny::SimplyConnected);
        let flip = BasedAutomorphism::from_simple_permutation(w.datum(), &[1, 0]).unwrap();
        let eps = FrobeniusTwist::new(4, flip.clone()).unwrap();
        let e = endoscopic_datum(&w, &eps, &SheafParam::zero(2)).unwrap();
        assert_eq!(e.h_datum, *w.datum());
        let b = b_set(&w, &e).unwrap();
        assert_eq!((b.len(), b.orbits.len()), (1, 1));
        assert_eq!(rational_form(&w, &e, &b, 0).unwrap().sigma, *flip.matrix());
        assert!(rational_form(&w, &e, &b, 1).is_err());
    }

    #[test]
    fn gl2_cases() {
        let w = group(Family::A, 1, Isogeny::Gl);
        let eps = FrobeniusTwist::split(w.datum(), 3).unwrap();
        let e = endoscopic_datum(&w, &eps, &param(&["1/2", "1/2"])).unwrap();
        assert_eq!(e.h_datum, *w.datum());
        let e = endoscopic_datum(&w, &eps, &param(&["1/2", "0"])).unwrap();
        let b = b_set(&w, &e).unwrap();
        assert_eq!((b.len(), b.orbits.len()), (1, 1));
    }

    #[test]
    fn twisted_coinvariants_collapse() {
        // A₂ sc with the flip: ℓ = (1/3, 2/3) in weight coordinates has
        // Ω_L = ℤ/3, on which the flip acts by inversion.
        let w = group(Family::A, 2, Isogeny::SimplyConnected);
        let flip = BasedAutomorphism::from_simple_permutation(w.datum(), &[1, 0]).unwrap();
        let eps = FrobeniusTwist::new(2, flip).unwrap();
        let stable = stable_parameters(&w, &eps, 3, Exec::Sequential);
        let mut seen = false;
        for l in &stable.representatives {
            let e = endoscopic_datum(&w, &eps, l).unwrap();
            if e.little.omega.len() == 3 {
                let b = b_set(&w, &e).unwrap();
                let c = coinvariants(&w, &e, &b).unwrap();
                assert_eq!(c.classes.len(), b.orbits.len());
                seen = true;
            }
        }
        assert!(seen);
    }

    #[test]
    fn embedding_extensions() {
        let d = RootDatum::named(Family::A, 1, Isogeny::SimplyConnected).unwrap();
        let emb = d.regular_embedding().unwrap();
        let big = WeylGroup::generate(&emb.big, DEFAULT_CAP).unwrap();
        let ext = extend_to_embedding(&d, &emb, &big, &param(&["1/2"]), 3).unwrap();
        assert_eq!(ext.param_c.act(&emb.restriction), param(&["1/2"]));
        assert_eq!(ext.omega_c_order, 1);
        let z = extend_to_embedding(&d, &emb, &big, &SheafParam::zero(1), 3).unwrap();
        assert!(z.param_c.is_zero());
        assert_eq!(z.phi_l_c.len(), 2);
    }

    #[test]
    fn stable_parameters_sl2() {
        let w = group(Family::A, 1, Isogeny::SimplyConnected);
        let eps = FrobeniusTwist::split(w.datum(), 3).unwrap();
        let s = stable_parameters(&w, &eps, 12, Exec::Sequential);
        // split: den | 2; nonsplit: den | 4 → orbits {0}, {1/2}, {1/4, 3/4}
        let strs: Vec<Vec<String>> = s.representatives.iter().map(|l| l.to_strings()).collect();
        assert_eq!(strs, vec![vec!["0"], vec!["1/4"], vec!["1/2"]]);
        assert_eq!(s.orbit_sizes, vec![1, 2, 1]);
        let par = stable_parameters(&w, &eps, 12, Exec::Parallel);
        assert_eq!(par.representatives, s.representatives);
    }
}
