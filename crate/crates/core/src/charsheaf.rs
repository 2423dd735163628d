//! Rank-one character-sheaf parameters: torsion points of `X ⊗ ℚ/ℤ` of order
//! prime to `p`, their Frobenius and Weyl actions, and the little groups
//! `W_L = W_L° ⋊ Ω_L`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::{IntMatrix, Rational};
use crate::root_datum::{FrobeniusTwist, RootDatum};
use crate::weyl::{reflection_subgroup, ActingGroup, ReflectionSubgroup, Subset};

/// A point `num/den` of `X ⊗ ℚ/ℤ` with `0 ≤ num_i < den` and `den` the exact
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SheafParam {
    num: Vec<i64>,
    den: i64,
}

impl SheafParam {
    pub fn zero(rank: usize) -> Self {
        SheafParam { num: vec![0; rank], den: 1 }
    }

    /// Reduces `num/den` mod `X` to canonical form.
    pub fn from_parts(num: Vec<i64>, den: i64) -> Self {
        assert!(den > 0, "denominator must be positive");
        let num: Vec<i64> = num.iter().map(|x| x.rem_euclid(den)).collect();
        let g = num.iter().fold(den, |g, &x| g.gcd(&x));
        SheafParam {
            num: num.iter().map(|x| x / g).collect(),
            den: den / g,
        }
    }

    pub fn from_rationals(v: &[Rational]) -> Self {
        let den = v.iter().fold(1i64, |l, x| l.lcm(x.denom()));
        Self::from_parts(v.iter().map(|x| (x * den).to_integer()).collect(), den)
    }

    pub fn rank(&self) -> usize {
        self.num.len()
    }

    pub fn numerators(&self) -> &[i64] {
        &self.num
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.den == 1
    }

    pub fn entries(&self) -> Vec<Rational> {
        self.num.iter().map(|&x| Rational::new(x, self.den)).collect()
    }

    /// `M·ℓ` for an integer matrix on `X`.
    pub fn act(&self, m: &IntMatrix) -> Self {
        Self::from_parts(m.mul_vec(&self.num), self.den)
    }

    pub fn scale(&self, k: i64) -> Self {
        Self::from_parts(self.num.iter().map(|x| x * k).collect(), self.den)
    }

    /// `⟨ℓ, y⟩ mod ℤ`, as a reduced fraction in `[0, 1)`.
    pub fn pair(&self, y: &[i64]) -> Rational {
        let n: i64 = self.num.iter().zip(y).map(|(a, b)| a * b).sum();
        Rational::new(n.rem_euclid(self.den), self.den)
    }

    /// Whether `⟨ℓ, y⟩ ∈ ℤ`.
    pub fn pairs_integrally(&self, y: &[i64]) -> bool {
        let n: i64 = self.num.iter().zip(y).map(|(a, b)| a * b).sum();
        n % self.den == 0
    }

    /// Lexicographic on the entries as fractions in `[0,1)`.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.num
            .iter()
            .zip(&other.num)
            .map(|(&a, &b)| (i128::from(a) * i128::from(other.den)).cmp(&(i128::from(b) * i128::from(self.den))))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }

    /// Renders entries as fraction strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.entries().iter().map(|x| x.to_string()).collect()
    }
}

impl PartialOrd for SheafParam {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SheafParam {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lex_cmp(other).then_with(|| self.den.cmp(&other.den))
    }
}

impl fmt::Display for SheafParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

impl Serialize for SheafParam {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

/// Parses a fraction such as `"1/2"`, `"-3/4"` or `"0"`.
pub fn parse_fraction(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n = i64::from_str(n).map_err(|_| Error::input(format!("bad fraction {s:?}")))?;
    let d = i64::from_str(d).map_err(|_| Error::input(format!("bad fraction {s:?}")))?;
    if d == 0 {
        return Err(Error::input(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(n, d))
}

/// Canonical parameter from rational coordinates, rejecting orders divisible
/// by `p`.
pub fn make_param(vector: &[Rational], datum: &RootDatum, p: u64) -> Result<SheafParam> {
    if vector.len() != datum.rank() {
        return Err(Error::input(format!(
            "parameter has {} entries, datum has rank {}",
            vector.len(),
            datum.rank()
        )));
    }
    let l = SheafParam::from_rationals(vector);
    if l.den % p as i64 == 0 {
        return Err(Error::input(format!(
            "parameter order not prime to p: denominator {} and p = {p}",
            l.den
        )));
    }
    Ok(l)
}

/// `ε·ℓ = q·τ(ℓ)`.
pub fn frobenius_act(eps: &FrobeniusTwist, l: &SheafParam) -> SheafParam {
    l.act(eps.tau.matrix()).scale(eps.q as i64)
}

#[derive(Debug, Clone, Serialize)]
pub struct SheafOrbit {
    pub base: SheafParam,
    /// Distinct translates, sorted.
    pub elements: Vec<SheafParam>,
    /// `W_L`, the stabilizer of `base`.
    pub stabilizer: Subset,
    pub param_fixed: bool,
    pub orbit_stable: bool,
}

pub fn orbit_and_stability<G: ActingGroup + ?Sized>(g: &G, eps: &FrobeniusTwist, l: &SheafParam) -> SheafOrbit {
    let mut set = BTreeSet::new();
    let mut stab = Vec::new();
    for a in 0..g.order() {
        let m = l.act(g.matrix(a));
        if m == *l {
            stab.push(a);
        }
        set.insert(m);
    }
    let fl = frobenius_act(eps, l);
    SheafOrbit {
        base: l.clone(),
        param_fixed: fl == *l,
        orbit_stable: set.contains(&fl),
        elements: set.into_iter().collect(),
        stabilizer: Subset::new(stab, g.order()),
    }
}

/// The minimal-length `w` with `w·(ε·ℓ) = ℓ`, ties broken by the
/// lexicographically least matrix. The effective Frobenius on the torus is
/// then `q·w·τ`, and `ℓ` is fixed by it.
pub fn stabilize<G: ActingGroup + ?Sized>(g: &G, eps: &FrobeniusTwist, l: &SheafParam) -> Result<usize> {
    stabilize_image(g, &frobenius_act(eps, l), l)
}

/// The minimal-length `w` (then least matrix) with `w·image = ℓ`.
pub fn stabilize_image<G: ActingGroup + ?Sized>(g: &G, image: &SheafParam, l: &SheafParam) -> Result<usize> {
    (0..g.order())
        .filter(|&a| image.act(g.matrix(a)) == *l)
        .min_by(|&a, &b| g.length(a).cmp(&g.length(b)).then_with(|| g.matrix(a).cmp(g.matrix(b))))
        .ok_or_else(|| Error::input(format!("orbit not ε-stable: ε·ℓ = {image} is not a W-translate of ℓ = {l}")))
}

/// `Φ_L = {α : ⟨ℓ, α^∨⟩ ∈ ℤ}`, as sorted root indices.
pub fn endoscopic_roots(l: &SheafParam, datum: &RootDatum) -> Vec<usize> {
    (0..datum.num_roots()).filter(|&i| l.pairs_integrally(datum.coroot(i))).collect()
}

/// `W_L`, `W_L°`, `Ω_L` for a parameter.
#[derive(Debug, Clone, Serialize)]
pub struct LittleGroups {
    pub phi_l: Vec<usize>,
    pub phi_l_positive: Vec<usize>,
    pub w_l: Subset,
    pub w_l0: ReflectionSubgroup,
    pub omega: Subset,
}

impl LittleGroups {
    /// The `Ω_L` factor of `w ∈ W_L`.
    pub fn omega_part<G: ActingGroup + ?Sized>(&self, g: &G, w: usize) -> usize {
        self.omega
            .iter()
            .find(|&o| self.w_l0.group.contains(g.mul(w, g.inv(o))))
            .expect("W_L = W_L° ⋊ Ω_L")
    }
}

/// Computes the little groups and checks unique factorization
/// `W_L = W_L° · Ω_L`.
pub fn little_groups<G: ActingGroup + ?Sized>(g: &G, l: &SheafParam) -> Result<LittleGroups> {
    let d = g.datum();
    let phi_l = endoscopic_roots(l, d);
    let phi_l_positive: Vec<usize> = phi_l.iter().copied().filter(|&a| d.is_positive(a)).collect();
    let w_l: Vec<usize> = (0..g.order()).filter(|&a| l.act(g.matrix(a)) == *l).collect();
    let w_l = Subset::new(w_l, g.order());
    let w_l0 = reflection_subgroup(g, &phi_l).map_err(|e| Error::invariant("Φ_L is a closed subsystem", e.to_string()))?;
    if let Some(u) = w_l0.group.iter().find(|&u| !w_l.contains(u)) {
        return Err(Error::invariant("W_L° ⊂ W_L", format!("element {u} moves ℓ")));
    }
    let pos: BTreeSet<usize> = phi_l_positive.iter().copied().collect();
    let omega: Vec<usize> = w_l
        .iter()
        .filter(|&a| {
            let perm = g.root_perm(a);
            phi_l_positive.iter().all(|&r| pos.contains(&(perm[r] as usize)))
        })
        .collect();
    let omega = Subset::new(omega, g.order());
    if w_l0.group.len() * omega.len() != w_l.len() {
        return Err(Error::invariant(
            "W_L = W_L° ⋊ Ω_L",
            format!("|W_L| = {}, |W_L°| = {}, |Ω_L| = {}", w_l.len(), w_l0.group.len(), omega.len()),
        ));
    }
    let mut seen = vec![false; g.order()];
    for u in w_l0.group.iter() {
        for o in omega.iter() {
            let x = g.mul(u, o);
            if !w_l.contains(x) || std::mem::replace(&mut seen[x], true) {
                return Err(Error::invariant("W_L = W_L° ⋊ Ω_L", "factorization u·ω is not unique"));
            }
        }
    }
    Ok(LittleGroups {
        phi_l,
        phi_l_positive,
        w_l,
        w_l0,
        omega,
    })
}
