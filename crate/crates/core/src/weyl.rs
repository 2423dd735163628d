//! Finite Weyl groups, reflection subgroups, minimal coset representatives
//! and extended groups `W° ⋊ π₀`.
//!
//! Elements are integer matrices on `X`, indexed densely. An element of a
//! Weyl group is determined by the permutation it induces on the root list,
//! which is what the lookup tables key on.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::IntMatrix;
use crate::root_datum::{BasedAutomorphism, RootDatum};

pub const DEFAULT_CAP: u64 = 200_000;

/// A finite group of lattice automorphisms of `X` that permutes the roots.
///
/// Implemented by [`WeylGroup`] and [`ExtendedWeylGroup`]; the endoscopy and
/// series code is generic over it.
pub trait ActingGroup: Sync {
    fn datum(&self) -> &RootDatum;
    fn order(&self) -> usize;
    fn identity(&self) -> usize;
    fn mul(&self, a: usize, b: usize) -> usize;
    fn inv(&self, a: usize) -> usize;
    /// Action on `X`.
    fn matrix(&self, a: usize) -> &IntMatrix;
    /// Action on the root list.
    fn root_perm(&self, a: usize) -> &[u32];
    /// `τ a τ⁻¹` for a pinned automorphism `τ` commuting with the
    /// component action.
    fn tau_conj(&self, tau: &BasedAutomorphism, a: usize) -> usize;
    /// Whether `a` lies in the Weyl group of the identity component.
    fn in_identity_component(&self, a: usize) -> bool;
    /// Index of the reflection in root `i`.
    fn reflection(&self, root: usize) -> usize;
    /// Component of `a` in `π₀` (always 0 for a connected group).
    fn component(&self, a: usize) -> usize;

    /// Number of positive roots sent to negative roots.
    fn length(&self, a: usize) -> usize {
        let d = self.datum();
        let perm = self.root_perm(a);
        d.positive().iter().filter(|&&i| !d.is_positive(perm[i] as usize)).count()
    }

    fn conj(&self, g: usize, a: usize) -> usize {
        self.mul(self.mul(g, a), self.inv(g))
    }

    fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity() {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }
}

/// A Weyl group element: its matrix on `X` and the permutation it induces on
/// the root list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeylElement {
    pub matrix: IntMatrix,
    pub perm: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct WeylGroup {
    datum: RootDatum,
    elements: Vec<WeylElement>,
    lookup: HashMap<Vec<u32>, usize>,
    inverse: Vec<usize>,
    table: Option<Vec<u32>>,
    simple: Vec<usize>,
}

const TABLE_LIMIT: usize = 2048;

/// `|W|` from a parabolic chain `W_{≤0} ⊂ W_{≤1} ⊂ …`: each step multiplies
/// by the orbit size of a vector whose stabilizer is the previous parabolic.
/// Returns `None` once the running product exceeds `limit`.
pub fn weyl_order(datum: &RootDatum, limit: u128) -> Option<u128> {
    use crate::lattice::Rational;
    let ss = datum.semisimple_rank();
    let simple = datum.simple();
    let mut total: u128 = 1;
    for k in 0..ss {
        // v in the span of α_0..α_k with ⟨v, α_j^∨⟩ = δ_{jk} for j ≤ k
        let a: Vec<Vec<i64>> = (0..=k)
            .map(|j| (0..=k).map(|i| crate::lattice::dot(datum.root(simple[i]), datum.coroot(simple[j]))).collect())
            .collect();
        let amat = IntMatrix::from_rows(&a, k + 1);
        let rhs: Vec<i64> = (0..=k).map(|j| i64::from(j == k)).collect();
        let coeff = crate::lattice::solve_rational(&amat, &rhs)?;
        let den = coeff.iter().fold(1i64, |l, c| num_integer::lcm(l, *c.denom()));
        let v: Vec<i64> = (0..datum.rank())
            .map(|t| {
                (0..=k)
                    .map(|i| (coeff[i] * Rational::from(den)).to_integer() * datum.root(simple[i])[t])
                    .sum()
            })
            .collect();
        let mut seen: HashSet<Vec<i64>> = HashSet::from([v.clone()]);
        let mut queue = VecDeque::from([v]);
        while let Some(x) = queue.pop_front() {
            for &s in &simple[..=k] {
                let c = crate::lattice::dot(&x, datum.coroot(s));
                if c == 0 {
                    continue;
                }
                let y: Vec<i64> = x.iter().zip(datum.root(s)).map(|(a, b)| a - c * b).collect();
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
            if total * seen.len() as u128 > limit {
                return None;
            }
        }
        total *= seen.len() as u128;
    }
    Some(total)
}

impl WeylGroup {
    /// Enumerates `W` by breadth-first closure over the simple reflections.
    pub fn generate(datum: &RootDatum, cap: u64) -> Result<WeylGroup> {
        let order = weyl_order(datum, cap as u128).ok_or_else(|| Error::CapExceeded {
            what: "Weyl group".into(),
            estimate: match weyl_order(datum, u128::MAX / 4) {
                Some(o) => o.to_string(),
                None => "unknown".into(),
            },
            cap,
        })?;
        let n = datum.num_roots();
        let id = WeylElement {
            matrix: IntMatrix::identity(datum.rank()),
            perm: (0..n as u32).collect(),
        };
        let gens: Vec<WeylElement> = datum
            .simple()
            .iter()
            .map(|&s| {
                let m = datum.reflection_matrix(s);
                let perm = datum.permutation_of(&m).expect("reflections permute roots");
                WeylElement { matrix: m, perm }
            })
            .collect();
        let mut elements = vec![id.clone()];
        let mut lookup = HashMap::from([(id.perm.clone(), 0usize)]);
        let mut head = 0;
        while head < elements.len() {
            for g in &gens {
                let cur = &elements[head];
                let perm: Vec<u32> = g.perm.iter().map(|&k| cur.perm[k as usize]).collect();
                if lookup.contains_key(&perm) {
                    continue;
                }
                let matrix = cur.matrix.mul(&g.matrix);
                lookup.insert(perm.clone(), elements.len());
                elements.push(WeylElement { matrix, perm });
                if elements.len() as u128 > order {
                    return Err(Error::invariant("|W| = product formula", "closure exceeded the computed order"));
                }
            }
            head += 1;
        }
        if elements.len() as u128 != order {
            return Err(Error::invariant(
                "|W| = product formula",
                format!("closure has {} elements, expected {order}", elements.len()),
            ));
        }
        let simple = gens.iter().map(|g| lookup[&g.perm]).collect();
        let mut w = WeylGroup {
            datum: datum.clone(),
            elements,
            lookup,
            inverse: Vec::new(),
            table: None,
            simple,
        };
        w.inverse = (0..w.elements.len())
            .map(|a| {
                let p = &w.elements[a].perm;
                let mut inv = vec![0u32; p.len()];
                for (i, &j) in p.iter().enumerate() {
                    inv[j as usize] = i as u32;
                }
                w.lookup[&inv]
            })
            .collect();
        if w.elements.len() <= TABLE_LIMIT {
            let n = w.elements.len();
            let table = (0..n * n).map(|k| w.mul_uncached(k / n, k % n) as u32).collect();
            w.table = Some(table);
        }
        Ok(w)
    }

    fn mul_uncached(&self, a: usize, b: usize) -> usize {
        let (pa, pb) = (&self.elements[a].perm, &self.elements[b].perm);
        let perm: Vec<u32> = pb.iter().map(|&k| pa[k as usize]).collect();
        self.lookup[&perm]
    }

    pub fn elements(&self) -> &[WeylElement] {
        &self.elements
    }

    pub fn element(&self, a: usize) -> &WeylElement {
        &self.elements[a]
    }

    /// Indices of the simple reflections, in Dynkin label order.
    pub fn simple_reflections(&self) -> &[usize] {
        &self.simple
    }

    pub fn index_of_perm(&self, perm: &[u32]) -> Option<usize> {
        self.lookup.get(perm).copied()
    }

    /// Index of the element acting on `X` by `m`, if it lies in `W`.
    pub fn index_of_matrix(&self, m: &IntMatrix) -> Option<usize> {
        let perm = self.datum.permutation_of(m)?;
        let a = self.index_of_perm(&perm)?;
        (self.elements[a].matrix == *m).then_some(a)
    }

    /// Length, rejecting indices outside the group.
    pub fn length_checked(&self, a: usize) -> Result<usize> {
        if a >= self.elements.len() {
            return Err(Error::input(format!("element {a} is not in W (order {})", self.elements.len())));
        }
        Ok(self.length(a))
    }

    /// The element of maximal length.
    pub fn longest_element(&self) -> usize {
        (0..self.order()).max_by_key(|&a| self.length(a)).unwrap_or(0)
    }

    /// A reduced word in the simple reflections (label positions), by
    /// repeatedly stripping a left descent.
    pub fn reduced_word(&self, a: usize) -> Vec<usize> {
        let mut word = Vec::new();
        let mut x = a;
        while self.length(x) > 0 {
            let (k, s) = self
                .simple
                .iter()
                .enumerate()
                .find(|&(_, &s)| self.length(self.mul(s, x)) < self.length(x))
                .expect("nontrivial element has a descent");
            word.push(k);
            x = self.mul(*s, x);
        }
        word
    }
}

impl ActingGroup for WeylGroup {
    fn datum(&self) -> &RootDatum {
        &self.datum
    }

    fn order(&self) -> usize {
        self.elements.len()
    }

    fn identity(&self) -> usize {
        0
    }

    #[inline]
    fn mul(&self, a: usize, b: usize) -> usize {
        match &self.table {
            Some(t) => t[a * self.elements.len() + b] as usize,
            None => self.mul_uncached(a, b),
        }
    }

    fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    fn matrix(&self, a: usize) -> &IntMatrix {
        &self.elements[a].matrix
    }

    fn root_perm(&self, a: usize) -> &[u32] {
        &self.elements[a].perm
    }

    fn tau_conj(&self, tau: &BasedAutomorphism, a: usize) -> usize {
        let t = tau.root_perm();
        let p = &self.elements[a].perm;
        // τ a τ⁻¹ on roots: k ↦ t[p[t⁻¹[k]]]
        let mut tinv = vec![0u32; t.len()];
        for (i, &j) in t.iter().enumerate() {
            tinv[j as usize] = i as u32;
        }
        let perm: Vec<u32> = (0..t.len()).map(|k| t[p[tinv[k] as usize] as usize]).collect();
        self.lookup[&perm]
    }

    fn in_identity_component(&self, _a: usize) -> bool {
        true
    }

    fn reflection(&self, root: usize) -> usize {
        let m = self.datum.reflection_matrix(root);
        let perm = self.datum.permutation_of(&m).expect("reflection permutes roots");
        self.lookup[&perm]
    }

    fn component(&self, _a: usize) -> usize {
        0
    }
}

/// A subset of an ambient group with fast membership.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subset {
    pub elements: Vec<usize>,
    #[serde(skip)]
    mask: Vec<bool>,
}

impl Subset {
    pub fn new(mut elements: Vec<usize>, ambient_order: usize) -> Self {
        elements.sort_unstable();
        elements.dedup();
        let mut mask = vec![false; ambient_order];
        for &e in &elements {
            mask[e] = true;
        }
        Subset { elements, mask }
    }

    #[inline]
    pub fn contains(&self, a: usize) -> bool {
        self.mask.get(a).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.elements.iter().copied()
    }
}

/// The subgroup generated by reflections in a closed subsystem, with the
/// subsystem's canonical base.
#[derive(Debug, Clone, Serialize)]
pub struct ReflectionSubgroup {
    pub group: Subset,
    /// Root indices of the subsystem.
    pub roots: Vec<usize>,
    /// Subsystem roots lying in `Φ⁺`.
    pub positive: Vec<usize>,
    /// Indecomposable elements of `positive`.
    pub simple: Vec<usize>,
}

/// Closed-subgroup generated by `gens` inside `g`.
pub fn generated_subgroup<G: ActingGroup + ?Sized>(g: &G, gens: &[usize]) -> Subset {
    let mut seen = vec![false; g.order()];
    let id = g.identity();
    seen[id] = true;
    let mut out = vec![id];
    let mut head = 0;
    while head < out.len() {
        let x = out[head];
        for &s in gens {
            let y = g.mul(x, s);
            if !seen[y] {
                seen[y] = true;
                out.push(y);
            }
        }
        head += 1;
    }
    Subset::new(out, g.order())
}

/// The reflection subgroup of a subsystem `roots ⊂ Φ`.
///
/// Rejects subsets that are not closed under negation and under their own
/// reflections.
pub fn reflection_subgroup<G: ActingGroup + ?Sized>(g: &G, roots: &[usize]) -> Result<ReflectionSubgroup> {
    let d = g.datum();
    let set: HashSet<usize> = roots.iter().copied().collect();
    for &a in roots {
        if !set.contains(&d.negative(a)) {
            return Err(Error::input(format!("subsystem not closed under negation at root {a}")));
        }
    }
    let refl: HashMap<usize, usize> = roots.iter().map(|&a| (a, g.reflection(a))).collect();
    for &a in roots {
        let perm = g.root_perm(refl[&a]);
        for &b in roots {
            if !set.contains(&(perm[b] as usize)) {
                return Err(Error::input(format!("subsystem not closed under the reflection in root {a}")));
            }
        }
    }
    let mut positive: Vec<usize> = roots.iter().copied().filter(|&a| d.is_positive(a)).collect();
    positive.sort_unstable();
    let pos_set: HashSet<Vec<i64>> = positive.iter().map(|&a| d.root(a).to_vec()).collect();
    let simple: Vec<usize> = positive
        .iter()
        .copied()
        .filter(|&a| {
            !positive.iter().any(|&b| {
                let diff: Vec<i64> = d.root(a).iter().zip(d.root(b)).map(|(x, y)| x - y).collect();
                pos_set.contains(&diff)
            })
        })
        .collect();
    let gens: Vec<usize> = simple.iter().map(|a| refl[a]).collect();
    let mut sorted_roots = roots.to_vec();
    sorted_roots.sort_unstable();
    Ok(ReflectionSubgroup {
        group: generated_subgroup(g, &gens),
        roots: sorted_roots,
        positive,
        simple,
    })
}

/// The unique minimal-length element of a left coset `W_sub · w`.
///
/// The minimizer `m` is characterized by `m⁻¹(Φ_sub⁺) ⊂ Φ⁺`; that is
/// checked, as is uniqueness.
pub fn min_coset_rep<G: ActingGroup + ?Sized>(g: &G, sub: &ReflectionSubgroup, coset: &[usize]) -> Result<usize> {
    let &first = coset.first().ok_or_else(|| Error::input("empty coset"))?;
    let expected: HashSet<usize> = sub.group.iter().map(|u| g.mul(u, first)).collect();
    let given: HashSet<usize> = coset.iter().copied().collect();
    if expected != given || given.len() != coset.len() {
        return Err(Error::input("input is not a left coset of the subgroup"));
    }
    let min_len = coset.iter().map(|&w| g.length(w)).min().unwrap();
    let minimizers: Vec<usize> = coset.iter().copied().filter(|&w| g.length(w) == min_len).collect();
    if minimizers.len() != 1 {
        return Err(Error::invariant(
            "unique minimal-length coset element",
            format!("{} elements of length {min_len}", minimizers.len()),
        ));
    }
    let m = minimizers[0];
    let d = g.datum();
    let inv_perm = g.root_perm(g.inv(m));
    if sub.positive.iter().any(|&a| !d.is_positive(inv_perm[a] as usize)) {
        return Err(Error::invariant(
            "minimal coset element is positive on the subsystem",
            "m⁻¹ sends a positive subsystem root to a negative root",
        ));
    }
    Ok(m)
}

/// A finite group given by its multiplication table, acting on the datum by
/// based automorphisms.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentAction {
    /// `table[a][b] = a·b`; element 0 is the identity.
    pub table: Vec<Vec<usize>>,
    pub automorphisms: Vec<BasedAutomorphism>,
}

impl ComponentAction {
    pub fn trivial(datum: &RootDatum) -> Self {
        ComponentAction {
            table: vec![vec![0]],
            automorphisms: vec![BasedAutomorphism::identity(datum)],
        }
    }

    /// Checks the table is a group with identity 0 and the action is a
    /// homomorphism into based automorphisms.
    pub fn validate(&self, datum: &RootDatum) -> Result<()> {
        let n = self.table.len();
        if n == 0 || self.automorphisms.len() != n {
            return Err(Error::input("component group table and action sizes differ"));
        }
        if self.table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::input("component group table is not square or has out-of-range entries"));
        }
        for a in 0..n {
            if self.table[0][a] != a || self.table[a][0] != a {
                return Err(Error::input("element 0 of the component group is not the identity"));
            }
            if !self.table[a].contains(&0) {
                return Err(Error::input(format!("component {a} has no inverse")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]] {
                        return Err(Error::input("component group table is not associative"));
                    }
                }
            }
        }
        for (a, aut) in self.automorphisms.iter().enumerate() {
            BasedAutomorphism::from_matrix(datum, aut.matrix().clone())
                .map_err(|e| Error::input(format!("component {a} does not act by a based automorphism: {e}")))?;
        }
        for a in 0..n {
            for b in 0..n {
                let prod = self.automorphisms[a].matrix().mul(self.automorphisms[b].matrix());
                if prod != *self.automorphisms[self.table[a][b]].matrix() {
                    return Err(Error::input("component action is not a homomorphism"));
                }
            }
        }
        Ok(())
    }

    /// Closes generator images under the table to get the action of every
    /// element. `gens` pairs an element with its automorphism.
    pub fn from_generators(datum: &RootDatum, table: Vec<Vec<usize>>, gens: &[(usize, BasedAutomorphism)]) -> Result<Self> {
        let n = table.len();
        let mut auts: Vec<Option<BasedAutomorphism>> = vec![None; n];
        if n == 0 {
            return Err(Error::input("empty component group"));
        }
        auts[0] = Some(BasedAutomorphism::identity(datum));
        let mut queue = VecDeque::from([0usize]);
        while let Some(a) = queue.pop_front() {
            for (g, ga) in gens {
                if *g >= n {
                    return Err(Error::input(format!("generator {g} out of range")));
                }
                let b = table[a][*g];
                let m = auts[a].as_ref().unwrap().matrix().mul(ga.matrix());
                match &auts[b] {
                    Some(existing) if *existing.matrix() != m => {
                        return Err(Error::input("generator images do not define a homomorphism"))
                    }
                    Some(_) => {}
                    None => {
                        auts[b] = Some(BasedAutomorphism::from_matrix(datum, m)?);
                        queue.push_back(b);
                    }
                }
            }
        }
        let automorphisms = auts
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::input("generators do not generate the component group"))?;
        let c = ComponentAction { table, automorphisms };
        c.validate(datum)?;
        Ok(c)
    }

    /// `ℤ/2` acting by the given automorphism.
    pub fn order_two(datum: &RootDatum, aut: BasedAutomorphism) -> Result<Self> {
        let c = ComponentAction {
            table: vec![vec![0, 1], vec![1, 0]],
            automorphisms: vec![BasedAutomorphism::identity(datum), aut],
        };
        c.validate(datum)?;
        Ok(c)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.table[a].iter().position(|&x| x == 0).unwrap()
    }
}

/// `W = W° ⋊ π₀`, elements stored as pairs `(w, ω)` with index
/// `w·|π₀| + ω` and product `(w₁,ω₁)(w₂,ω₂) = (w₁·ω₁(w₂), ω₁ω₂)`.
#[derive(Debug, Clone)]
pub struct ExtendedWeylGroup {
    connected: WeylGroup,
    components: ComponentAction,
    /// `conj[ω][w] = ω w ω⁻¹` in `W°`.
    conj: Vec<Vec<usize>>,
    matrices: Vec<IntMatrix>,
    perms: Vec<Vec<u32>>,
}

impl ExtendedWeylGroup {
    /// Forms the semidirect product and checks that `ω ↦ (1, ω)` is a
    /// homomorphism.
    pub fn extend(connected: WeylGroup, components: ComponentAction) -> Result<Self> {
        components.validate(connected.datum())?;
        let k = components.order();
        let conj: Vec<Vec<usize>> = components
            .automorphisms
            .iter()
            .map(|aut| (0..connected.order()).map(|w| connected.tau_conj(aut, w)).collect())
            .collect();
        let mut matrices = Vec::with_capacity(connected.order() * k);
        let mut perms = Vec::with_capacity(connected.order() * k);
        for w in 0..connected.order() {
            for aut in &components.automorphisms {
                matrices.push(connected.matrix(w).mul(aut.matrix()));
                let pw = connected.root_perm(w);
                perms.push(aut.root_perm().iter().map(|&j| pw[j as usize]).collect());
            }
        }
        let g = ExtendedWeylGroup {
            connected,
            components,
            conj,
            matrices,
            perms,
        };
        for a in 0..k {
            for b in 0..k {
                let prod = g.mul(g.section(a), g.section(b));
                if prod != g.section(g.components.table[a][b]) {
                    return Err(Error::invariant("splitting ω ↦ (1,ω) is a homomorphism", format!("fails at ({a},{b})")));
                }
            }
        }
        Ok(g)
    }

    pub fn connected(&self) -> &WeylGroup {
        &self.connected
    }

    pub fn components(&self) -> &ComponentAction {
        &self.components
    }

    pub fn pair(&self, a: usize) -> (usize, usize) {
        let k = self.components.order();
        (a / k, a % k)
    }

    pub fn index(&self, w: usize, omega: usize) -> usize {
        w * self.components.order() + omega
    }

    /// `(1, ω)`.
    pub fn section(&self, omega: usize) -> usize {
        self.index(self.connected.identity(), omega)
    }

    /// Embeds an element of `W°`.
    pub fn from_connected(&self, w: usize) -> usize {
        self.index(w, 0)
    }
}

impl ActingGroup for ExtendedWeylGroup {
    fn datum(&self) -> &RootDatum {
        self.connected.datum()
    }

    fn order(&self) -> usize {
        self.matrices.len()
    }

    fn identity(&self) -> usize {
        0
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        let (w1, o1) = self.pair(a);
        let (w2, o2) = self.pair(b);
        let w = self.connected.mul(w1, self.conj[o1][w2]);
        self.index(w, self.components.table[o1][o2])
    }

    fn inv(&self, a: usize) -> usize {
        let (w, o) = self.pair(a);
        let oi = self.components.inverse(o);
        // (w, ω)⁻¹ = (ω⁻¹(w⁻¹), ω⁻¹)
        self.index(self.conj[oi][self.connected.inv(w)], oi)
    }

    fn matrix(&self, a: usize) -> &IntMatrix {
        &self.matrices[a]
    }

    fn root_perm(&self, a: usize) -> &[u32] {
        &self.perms[a]
    }

    fn tau_conj(&self, tau: &BasedAutomorphism, a: usize) -> usize {
        let (w, o) = self.pair(a);
        self.index(self.connected.tau_conj(tau, w), o)
    }

    fn in_identity_component(&self, a: usize) -> bool {
        self.pair(a).1 == 0
    }

    fn reflection(&self, root: usize) -> usize {
        self.from_connected(self.connected.reflection(root))
    }

    fn component(&self, a: usize) -> usize {
        self.pair(a).1
    }
}
