//! Based root data, pinned automorphisms and regular embeddings.
//!
//! The character lattice is `X = Z^rank`, the cocharacter lattice is
//! `Y = Z^rank`, and the pairing is the dot product. Roots live in `X`,
//! coroots in `Y`, and root `i` is paired with coroot `i`.
//!
//! Canonical root order: positive roots sorted by height and then
//! lexicographically by `X`-coordinates, followed by the negative roots in
//! the same order. So in a canonical datum with `N` positive roots, root
//! `i + N` is `-root i`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dot, lattice_basis, smith_normal_form, solve_integer, solve_rational, IntMatrix, Rational};

/// Version tag of the canonical root ordering, embedded in reports.
pub const ROOT_ORDER_VERSION: &str = "height-lex/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    G,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "G" => Ok(Family::G),
            other => Err(Error::input(format!("unknown or unsupported Cartan family {other:?}"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Isogeny {
    #[serde(alias = "sc")]
    SimplyConnected,
    #[serde(alias = "ad")]
    Adjoint,
    /// `GL_{rank+1}`; type A only.
    Gl,
}

impl FromStr for Isogeny {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sc" | "simply-connected" | "simply_connected" | "simplyconnected" => Ok(Isogeny::SimplyConnected),
            "ad" | "adjoint" => Ok(Isogeny::Adjoint),
            "gl" => Ok(Isogeny::Gl),
            other => Err(Error::input(format!("unknown isogeny {other:?}"))),
        }
    }
}

impl fmt::Display for Isogeny {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Isogeny::SimplyConnected => "sc",
            Isogeny::Adjoint => "ad",
            Isogeny::Gl => "gl",
        })
    }
}

/// One failed root-datum axiom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Clone, Serialize)]
pub struct RootDatum {
    rank: usize,
    roots: Vec<Vec<i64>>,
    coroots: Vec<Vec<i64>>,
    simple: Vec<usize>,
    positive: Vec<usize>,
    #[serde(skip)]
    lookup: HashMap<Vec<i64>, usize>,
    #[serde(skip)]
    positive_mask: Vec<bool>,
    #[serde(skip)]
    heights: Vec<i64>,
}

impl PartialEq for RootDatum {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank
            && self.roots == other.roots
            && self.coroots == other.coroots
            && self.simple == other.simple
            && self.positive == other.positive
    }
}

impl Eq for RootDatum {}

impl fmt::Debug for RootDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RootDatum")
            .field("rank", &self.rank)
            .field("roots", &self.roots)
            .field("coroots", &self.coroots)
            .field("simple", &self.simple)
            .finish()
    }
}

impl RootDatum {
    /// Wraps raw data without checking any axiom. Use [`RootDatum::validate`]
    /// on the result, or [`RootDatum::new`] to get a checked canonical datum.
    pub fn unchecked(
        rank: usize,
        roots: Vec<Vec<i64>>,
        coroots: Vec<Vec<i64>>,
        simple: Vec<usize>,
        positive: Vec<usize>,
    ) -> Self {
        let lookup = roots.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
        let mut positive_mask = vec![false; roots.len()];
        for &i in &positive {
            if i < positive_mask.len() {
                positive_mask[i] = true;
            }
        }
        let mut d = RootDatum {
            rank,
            roots,
            coroots,
            simple,
            positive,
            lookup,
            positive_mask,
            heights: Vec::new(),
        };
        d.heights = d
            .simple_coefficients_all()
            .map(|cs| cs.iter().map(|c| c.iter().sum()).collect())
            .unwrap_or_default();
        d
    }

    /// Validates the given data, derives the positive system from the base
    /// and returns the datum in canonical root order.
    pub fn new(rank: usize, roots: Vec<Vec<i64>>, coroots: Vec<Vec<i64>>, simple: Vec<usize>) -> Result<Self> {
        let positive = Self::derive_positive(rank, &roots, &simple);
        let raw = Self::unchecked(rank, roots, coroots, simple, positive);
        let violations = raw.validate();
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(|v| v.message.clone()).collect();
            return Err(Error::input(format!("invalid root datum: {}", msgs.join("; "))));
        }
        Ok(raw.canonicalize())
    }

    /// The datum of a torus of the given rank.
    pub fn torus(rank: usize) -> Self {
        Self::unchecked(rank, Vec::new(), Vec::new(), Vec::new(), Vec::new())
    }

    /// Standard datum of the given Cartan type and isogeny.
    pub fn named(family: Family, rank: usize, isogeny: Isogeny) -> Result<Self> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::B | Family::C => rank >= 2,
            Family::D => rank >= 3,
            Family::G => rank == 2,
        };
        if !ok {
            return Err(Error::input(format!("invalid Cartan type {family}{rank}")));
        }
        if isogeny == Isogeny::Gl {
            if family != Family::A {
                return Err(Error::input(format!("gl isogeny requires family A, got {family}")));
            }
            return Self::gl(rank + 1);
        }
        let a = cartan_matrix(family, rank);
        let pairs = root_pairs_from_cartan(&a);
        let (roots, coroots): (Vec<_>, Vec<_>) = pairs
            .iter()
            .map(|(c, d)| match isogeny {
                Isogeny::SimplyConnected => {
                    let x: Vec<i64> = (0..rank).map(|j| (0..rank).map(|i| c[i] * a[i][j]).sum()).collect();
                    (x, d.clone())
                }
                _ => {
                    let y: Vec<i64> = (0..rank).map(|j| (0..rank).map(|k| a[j][k] * d[k]).sum()).collect();
                    (c.clone(), y)
                }
            })
            .unzip();
        let simple = (0..rank)
            .map(|i| {
                pairs
                    .iter()
                    .position(|(c, _)| c.iter().enumerate().all(|(k, &x)| x == i64::from(k == i)))
                    .expect("simple root generated")
            })
            .collect();
        Self::new(rank, roots, coroots, simple)
    }

    /// The datum of `GL_n`.
    pub fn gl(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::input("GL_n needs n >= 1"));
        }
        let e = |i: usize, j: usize| -> Vec<i64> {
            (0..n).map(|k| i64::from(k == i) - i64::from(k == j)).collect()
        };
        let mut roots = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    roots.push(e(i, j));
                }
            }
        }
        let simple = (0..n - 1)
            .map(|i| roots.iter().position(|r| *r == e(i, i + 1)).unwrap())
            .collect();
        Self::new(n, roots.clone(), roots, simple)
    }

    fn derive_positive(rank: usize, roots: &[Vec<i64>], simple: &[usize]) -> Vec<usize> {
        if simple.iter().any(|&s| s >= roots.len()) || roots.iter().any(|r| r.len() != rank) {
            return Vec::new();
        }
        let basis = IntMatrix::from_cols(&simple.iter().map(|&s| roots[s].clone()).collect::<Vec<_>>(), rank);
        roots
            .iter()
            .enumerate()
            .filter(|(_, r)| {
                solve_rational(&basis, r)
                    .is_some_and(|c| c.iter().all(|x| *x >= Rational::from(0)) && c.iter().any(|x| *x > Rational::from(0)))
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Simple-root coefficients of every root, if all roots are integral
    /// combinations of the base.
    fn simple_coefficients_all(&self) -> Option<Vec<Vec<i64>>> {
        if self.simple.iter().any(|&s| s >= self.roots.len()) {
            return None;
        }
        let basis = IntMatrix::from_cols(
            &self.simple.iter().map(|&s| self.roots[s].clone()).collect::<Vec<_>>(),
            self.rank,
        );
        self.roots.iter().map(|r| solve_integer(&basis, r)).collect()
    }

    /// Lists every failed axiom; empty means the datum is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |m: String| out.push(Violation { message: m });
        let n = self.roots.len();
        if self.coroots.len() != n {
            bad(format!("{} roots but {} coroots", n, self.coroots.len()));
            return out;
        }
        if let Some(i) = (0..n).find(|&i| self.roots[i].len() != self.rank || self.coroots[i].len() != self.rank) {
            bad(format!("root/coroot {i} does not have length {}", self.rank));
            return out;
        }
        let mut seen = HashMap::new();
        for (i, r) in self.roots.iter().enumerate() {
            if let Some(j) = seen.insert(r.clone(), i) {
                bad(format!("duplicate root {r:?} at indices {j} and {i}"));
            }
        }
        let mut seen_co = HashSet::new();
        for r in &self.coroots {
            if !seen_co.insert(r.clone()) {
                bad(format!("duplicate coroot {r:?}"));
            }
        }
        for i in 0..n {
            let p = dot(&self.roots[i], &self.coroots[i]);
            if p != 2 {
                bad(format!("⟨α,α^∨⟩ ≠ 2 for root {i}: pairing is {p}"));
            }
        }
        let find = |v: &Vec<i64>| self.roots.iter().position(|r| r == v);
        for i in 0..n {
            let neg: Vec<i64> = self.roots[i].iter().map(|x| -x).collect();
            let negc: Vec<i64> = self.coroots[i].iter().map(|x| -x).collect();
            match find(&neg) {
                Some(j) if self.coroots[j] == negc => {}
                _ => bad(format!("negative of root {i} missing or paired with the wrong coroot")),
            }
        }
        'refl: for i in 0..n {
            for j in 0..n {
                let (a, ac) = (&self.roots[i], &self.coroots[i]);
                let c = dot(&self.roots[j], ac);
                let image: Vec<i64> = self.roots[j].iter().zip(a).map(|(x, y)| x - c * y).collect();
                let cc = dot(a, &self.coroots[j]);
                let image_co: Vec<i64> = self.coroots[j].iter().zip(ac).map(|(x, y)| x - cc * y).collect();
                match find(&image) {
                    Some(k) if self.coroots[k] == image_co => {}
                    Some(_) => {
                        bad(format!("reflection s_{i} maps root {j} to a root with a mismatched coroot"));
                        break 'refl;
                    }
                    None => {
                        bad(format!("reflection s_{i}(α_{j}) is not a root"));
                        break 'refl;
                    }
                }
            }
        }
        if let Some(&s) = self.simple.iter().find(|&&s| s >= n) {
            bad(format!("simple index {s} out of range"));
            return out;
        }
        let smat = IntMatrix::from_cols(&self.simple.iter().map(|&s| self.roots[s].clone()).collect::<Vec<_>>(), self.rank);
        if smith_normal_form(&smat).rank() != self.simple.len() {
            bad("simple roots are linearly dependent".to_string());
            return out;
        }
        match self.simple_coefficients_all() {
            None => bad("some root is not an integral combination of the simple roots".to_string()),
            Some(coeffs) => {
                let mut derived = Vec::new();
                for (i, c) in coeffs.iter().enumerate() {
                    let nonneg = c.iter().all(|&x| x >= 0);
                    let nonpos = c.iter().all(|&x| x <= 0);
                    if !nonneg && !nonpos {
                        bad(format!("root {i} has simple coefficients of mixed sign"));
                    }
                    if nonneg {
                        derived.push(i);
                    }
                }
                let mut given = self.positive.clone();
                given.sort_unstable();
                if given != derived {
                    bad("positive system differs from the nonnegative combinations of the base".to_string());
                }
            }
        }
        out
    }

    fn canonicalize(&self) -> Self {
        let heights = &self.heights;
        let mut pos = self.positive.clone();
        pos.sort_by(|&a, &b| heights[a].cmp(&heights[b]).then_with(|| self.roots[a].cmp(&self.roots[b])));
        let neg: Vec<usize> = pos
            .iter()
            .map(|&i| {
                let v: Vec<i64> = self.roots[i].iter().map(|x| -x).collect();
                self.lookup[&v]
            })
            .collect();
        let order: Vec<usize> = pos.iter().chain(neg.iter()).copied().collect();
        let mut new_index = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        Self::unchecked(
            self.rank,
            order.iter().map(|&i| self.roots[i].clone()).collect(),
            order.iter().map(|&i| self.coroots[i].clone()).collect(),
            self.simple.iter().map(|&s| new_index[s]).collect(),
            (0..pos.len()).collect(),
        )
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    pub fn num_positive(&self) -> usize {
        self.positive.len()
    }

    pub fn semisimple_rank(&self) -> usize {
        self.simple.len()
    }

    pub fn roots(&self) -> &[Vec<i64>] {
        &self.roots
    }

    pub fn coroots(&self) -> &[Vec<i64>] {
        &self.coroots
    }

    pub fn root(&self, i: usize) -> &[i64] {
        &self.roots[i]
    }

    pub fn coroot(&self, i: usize) -> &[i64] {
        &self.coroots[i]
    }

    /// Root indices of the base, in Dynkin label order.
    pub fn simple(&self) -> &[usize] {
        &self.simple
    }

    pub fn positive(&self) -> &[usize] {
        &self.positive
    }

    #[inline]
    pub fn is_positive(&self, i: usize) -> bool {
        self.positive_mask[i]
    }

    pub fn height(&self, i: usize) -> i64 {
        self.heights[i]
    }

    pub fn index_of_root(&self, v: &[i64]) -> Option<usize> {
        self.lookup.get(v).copied()
    }

    /// Index of `-root i`.
    pub fn negative(&self, i: usize) -> usize {
        let v: Vec<i64> = self.roots[i].iter().map(|x| -x).collect();
        self.lookup[&v]
    }

    /// Matrix of the reflection `x ↦ x - ⟨x, α_i^∨⟩ α_i` on `X`.
    pub fn reflection_matrix(&self, i: usize) -> IntMatrix {
        let (a, ac) = (&self.roots[i], &self.coroots[i]);
        let mut m = IntMatrix::identity(self.rank);
        for r in 0..self.rank {
            for c in 0..self.rank {
                m.set(r, c, m.get(r, c) - a[r] * ac[c]);
            }
        }
        m
    }

    /// The permutation of the root list induced by `m`, if `m` maps roots
    /// to roots.
    pub fn permutation_of(&self, m: &IntMatrix) -> Option<Vec<u32>> {
        self.roots
            .iter()
            .map(|r| self.index_of_root(&m.mul_vec(r)).map(|i| i as u32))
            .collect()
    }

    /// The dual datum `(Y, Φ^∨, X, Φ)`, in canonical order.
    pub fn dual(&self) -> RootDatum {
        RootDatum::new(self.rank, self.coroots.clone(), self.roots.clone(), self.simple.clone())
            .expect("dual of a valid datum is valid")
    }

    /// Invariant factors of `X / ZΦ` that exceed one, and the free rank.
    pub fn fundamental_group(&self) -> (Vec<i64>, usize) {
        if self.roots.is_empty() {
            return (Vec::new(), self.rank);
        }
        let m = IntMatrix::from_cols(&self.roots, self.rank);
        let s = smith_normal_form(&m);
        (s.torsion(), self.rank - s.rank())
    }

    /// `X / ZΦ` is torsion-free, i.e. the center is connected.
    pub fn has_connected_center(&self) -> bool {
        self.fundamental_group().0.is_empty()
    }

    /// Builds the regular embedding `G → G_c = (G × T)/Z`.
    pub fn regular_embedding(&self) -> Result<RegularEmbedding> {
        RegularEmbedding::build(self)
    }
}

/// Cartan matrix with entries `a[i][j] = ⟨α_i, α_j^∨⟩`, Bourbaki labelling.
pub fn cartan_matrix(family: Family, n: usize) -> Vec<Vec<i64>> {
    let mut a = vec![vec![0i64; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |i: usize, j: usize, aij: i64, aji: i64| {
        a[i][j] = aij;
        a[j][i] = aji;
    };
    match family {
        Family::A => (0..n.saturating_sub(1)).for_each(|i| link(i, i + 1, -1, -1)),
        Family::B => {
            (0..n - 2).for_each(|i| link(i, i + 1, -1, -1));
            link(n - 2, n - 1, -2, -1);
        }
        Family::C => {
            (0..n - 2).for_each(|i| link(i, i + 1, -1, -1));
            link(n - 2, n - 1, -1, -2);
        }
        Family::D => {
            (0..n - 2).for_each(|i| link(i, i + 1, -1, -1));
            link(n - 3, n - 1, -1, -1);
        }
        Family::G => link(0, 1, -1, -3),
    }
    a
}

/// All roots and coroots, as simple-root and simple-coroot coefficient
/// vectors, generated by closing the base under simple reflections.
fn root_pairs_from_cartan(a: &[Vec<i64>]) -> Vec<(Vec<i64>, Vec<i64>)> {
    let n = a.len();
    let unit = |i: usize| (0..n).map(|k| i64::from(k == i)).collect::<Vec<i64>>();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for i in 0..n {
        queue.push_back((unit(i), unit(i)));
    }
    while let Some((c, d)) = queue.pop_front() {
        if !seen.insert(c.clone()) {
            continue;
        }
        for j in 0..n {
            let pc: i64 = (0..n).map(|i| c[i] * a[i][j]).sum();
            let pd: i64 = (0..n).map(|k| a[j][k] * d[k]).sum();
            let mut c2 = c.clone();
            c2[j] -= pc;
            let mut d2 = d.clone();
            d2[j] -= pd;
            if !seen.contains(&c2) {
                queue.push_back((c2, d2));
            }
        }
        out.push((c, d));
    }
    out
}

/// A finite-order automorphism of `X` that preserves the based datum.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BasedAutomorphism {
    matrix: IntMatrix,
    order: u32,
    #[serde(skip)]
    root_perm: Vec<u32>,
}

impl fmt::Debug for BasedAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BasedAutomorphism({:?}, order {})", self.matrix, self.order)
    }
}

impl BasedAutomorphism {
    pub fn identity(datum: &RootDatum) -> Self {
        BasedAutomorphism {
            matrix: IntMatrix::identity(datum.rank()),
            order: 1,
            root_perm: (0..datum.num_roots() as u32).collect(),
        }
    }

    /// Checks that `matrix` permutes the base, acts compatibly on coroots and
    /// has finite order.
    pub fn from_matrix(datum: &RootDatum, matrix: IntMatrix) -> Result<Self> {
        let r = datum.rank();
        if matrix.rows() != r || matrix.cols() != r {
            return Err(Error::input(format!("automorphism must be a {r}x{r} matrix")));
        }
        let inv = matrix
            .inverse()
            .ok_or_else(|| Error::input("automorphism matrix is not invertible over Z"))?;
        let dual = inv.transpose();
        let perm = datum
            .permutation_of(&matrix)
            .ok_or_else(|| Error::input("matrix does not permute the roots"))?;
        for (i, &j) in perm.iter().enumerate() {
            if dual.mul_vec(datum.coroot(i)) != datum.coroot(j as usize) {
                return Err(Error::input("inverse transpose does not permute the coroots compatibly"));
            }
        }
        let simple: HashSet<usize> = datum.simple().iter().copied().collect();
        if datum.simple().iter().any(|&s| !simple.contains(&(perm[s] as usize))) {
            return Err(Error::input("matrix does not permute the simple roots"));
        }
        let order = matrix
            .order(10_000)
            .ok_or_else(|| Error::input("automorphism does not have finite order"))?;
        Ok(BasedAutomorphism {
            matrix,
            order,
            root_perm: perm,
        })
    }

    /// The automorphism sending simple root `k` (label position) to simple
    /// root `perm[k]`. On the part of `X` orthogonal to all coroots it acts
    /// by `+1`, or by `-1` when `+1` is not integral (e.g. the flip of
    /// `GL_n`).
    pub fn from_simple_permutation(datum: &RootDatum, perm: &[usize]) -> Result<Self> {
        let ss = datum.semisimple_rank();
        let r = datum.rank();
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..ss).collect::<Vec<_>>() {
            return Err(Error::input(format!("{perm:?} is not a permutation of the {ss} simple indices")));
        }
        let simple_cols: Vec<Vec<i64>> = datum.simple().iter().map(|&s| datum.root(s).to_vec()).collect();
        let image_cols: Vec<Vec<i64>> = perm.iter().map(|&k| datum.root(datum.simple()[k]).to_vec()).collect();
        // kernel of the simple coroots: the central directions of X
        let kernel: Vec<Vec<i64>> = if ss < r {
            let corows: Vec<Vec<i64>> = datum.simple().iter().map(|&s| datum.coroot(s).to_vec()).collect();
            let c = IntMatrix::from_rows(&corows, r);
            let s = smith_normal_form(&c);
            (s.rank()..r).map(|j| s.v.col(j)).collect()
        } else {
            Vec::new()
        };
        let mut last_err = Error::input("no integral automorphism realizes this permutation");
        for sign in [1i64, -1] {
            let basis_cols: Vec<Vec<i64>> = simple_cols.iter().chain(kernel.iter()).cloned().collect();
            let target_cols: Vec<Vec<i64>> = image_cols
                .iter()
                .cloned()
                .chain(kernel.iter().map(|k| k.iter().map(|x| sign * x).collect()))
                .collect();
            let basis = IntMatrix::from_cols(&basis_cols, r);
            let Some(binv) = basis.inverse_rational() else {
                return Err(Error::input("simple roots and central directions do not span X"));
            };
            let target = IntMatrix::from_cols(&target_cols, r);
            let mut m = IntMatrix::zeros(r, r);
            let mut integral = true;
            for i in 0..r {
                for j in 0..r {
                    let v: Rational = (0..r).map(|k| Rational::from(target.get(i, k)) * binv[k][j]).sum();
                    if !v.is_integer() {
                        integral = false;
                    }
                    m.set(i, j, v.to_integer());
                }
            }
            if integral {
                match Self::from_matrix(datum, m) {
                    Ok(a) => return Ok(a),
                    Err(e) => last_err = e,
                }
            }
        }
        Err(last_err)
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn root_perm(&self) -> &[u32] {
        &self.root_perm
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    pub fn compose(&self, datum: &RootDatum, other: &BasedAutomorphism) -> Result<BasedAutomorphism> {
        Self::from_matrix(datum, self.matrix.mul(&other.matrix))
    }
}

/// Smallest prime factor and exponent when `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..).find(|d| q.is_multiple_of(*d) || d * d > q).map(|d| if q.is_multiple_of(d) { d } else { q })?;
    let (mut m, mut e) = (q, 0);
    while m % p == 0 {
        m /= p;
        e += 1;
    }
    (m == 1).then_some((p, e))
}

/// A Frobenius `ε = q·τ`: a prime power and a pinned automorphism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrobeniusTwist {
    pub q: u64,
    pub p: u64,
    pub tau: BasedAutomorphism,
}

impl FrobeniusTwist {
    pub fn new(q: u64, tau: BasedAutomorphism) -> Result<Self> {
        let (p, _) = prime_power(q).ok_or_else(|| Error::input(format!("q = {q} is not a prime power")))?;
        Ok(FrobeniusTwist { q, p, tau })
    }

    /// Checks an explicitly supplied characteristic.
    pub fn with_characteristic(q: u64, p: u64, tau: BasedAutomorphism) -> Result<Self> {
        let t = Self::new(q, tau)?;
        if t.p != p {
            return Err(Error::input(format!("q = {q} is not a power of p = {p}")));
        }
        Ok(t)
    }

    pub fn split(datum: &RootDatum, q: u64) -> Result<Self> {
        Self::new(q, BasedAutomorphism::identity(datum))
    }
}

/// `G → G_c` with `X_c = {(χ₁, χ₂) ∈ X ⊕ X : χ₁ - χ₂ ∈ ZΦ}`.
#[derive(Debug, Clone, Serialize)]
pub struct RegularEmbedding {
    /// Datum of `G_c`, in the coordinates of `basis`.
    pub big: RootDatum,
    /// Columns: a basis of `X_c` inside `X ⊕ X`.
    pub basis: IntMatrix,
    /// Restriction of characters `X_c → X`, `(χ₁, χ₂) ↦ χ₁`.
    pub restriction: IntMatrix,
    /// `root_map[i]` is the index in `big` of the root `(α_i, 0)`.
    pub root_map: Vec<usize>,
}

impl RegularEmbedding {
    fn build(d: &RootDatum) -> Result<Self> {
        let r = d.rank();
        let mut gens: Vec<Vec<i64>> = (0..r)
            .map(|i| (0..2 * r).map(|k| i64::from(k == i || k == i + r)).collect())
            .collect();
        for &s in d.simple() {
            let mut v = d.root(s).to_vec();
            v.extend(std::iter::repeat_n(0, r));
            gens.push(v);
        }
        let basis = lattice_basis(&IntMatrix::from_cols(&gens, 2 * r));
        let n = basis.cols();
        let top = IntMatrix::from_rows(&(0..r).map(|i| basis.row(i).to_vec()).collect::<Vec<_>>(), n);
        let mut roots = Vec::with_capacity(d.num_roots());
        let mut coroots = Vec::with_capacity(d.num_roots());
        for i in 0..d.num_roots() {
            let mut v = d.root(i).to_vec();
            v.extend(std::iter::repeat_n(0, r));
            let c = solve_integer(&basis, &v)
                .ok_or_else(|| Error::invariant("regular-embedding", "root (α,0) not in X_c"))?;
            roots.push(c);
            coroots.push(top.transpose().mul_vec(d.coroot(i)));
        }
        let simple = d.simple().to_vec();
        let big = RootDatum::new(n, roots.clone(), coroots, simple)?;
        let root_map = roots.iter().map(|c| big.index_of_root(c).unwrap()).collect();
        let emb = RegularEmbedding {
            big,
            basis,
            restriction: top,
            root_map,
        };
        emb.check()?;
        Ok(emb)
    }

    /// Surjective restriction, torsion-free `X_c/ZΦ_c`, and roots matching
    /// under restriction.
    pub fn check(&self) -> Result<()> {
        let s = smith_normal_form(&self.restriction);
        if s.rank() != self.restriction.rows() || s.diag.iter().any(|&x| x != 1) {
            return Err(Error::invariant(
                "restriction X_c → X surjective",
                format!("invariant factors {:?}", s.diag),
            ));
        }
        if !self.big.has_connected_center() {
            return Err(Error::invariant(
                "Z(G_c) connected",
                format!("X_c/ZΦ_c has torsion {:?}", self.big.fundamental_group().0),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sl2_and_gl2() {
        let sl2 = RootDatum::named(Family::A, 1, Isogeny::SimplyConnected).unwrap();
        assert_eq!(sl2.rank(), 1);
        assert_eq!(sl2.roots(), &[vec![2], vec![-2]]);
        assert_eq!(sl2.coroots(), &[vec![1], vec![-1]]);
        let gl2 = RootDatum::named(Family::A, 1, Isogeny::Gl).unwrap();
        assert_eq!(gl2.rank(), 2);
        assert_eq!(gl2.roots(), &[vec![1, -1], vec![-1, 1]]);
        assert_eq!(gl2.coroots(), &[vec![1, -1], vec![-1, 1]]);
    }

    #[test]
    fn root_counts_by_type() {
        // |Φ| = 2|Φ⁺| with |Φ⁺| = n(n+1)/2, n², n², n(n-1), 6
        let cases = [
            (Family::A, 3, 12),
            (Family::B, 2, 8),
            (Family::B, 3, 18),
            (Family::C, 3, 18),
            (Family::D, 4, 24),
            (Family::G, 2, 12),
        ];
        for (f, n, count) in cases {
            for iso in [Isogeny::SimplyConnected, Isogeny::Adjoint] {
                let d = RootDatum::named(f, n, iso).unwrap();
                assert_eq!(d.num_roots(), count, "{f}{n} {iso}");
                assert!(d.validate().is_empty());
            }
        }
    }

    #[test]
    fn invalid_types_rejected() {
        assert!(RootDatum::named(Family::G, 3, Isogeny::Adjoint).is_err());
        assert!(RootDatum::named(Family::B, 1, Isogeny::Adjoint).is_err());
        assert!(RootDatum::named(Family::B, 2, Isogeny::Gl).is_err());
        assert!(RootDatum::named(Family::A, 0, Isogeny::SimplyConnected).is_err());
        assert!("E".parse::<Family>().is_err());
    }

    #[test]
    fn validate_reports_bad_pairing_and_duplicates() {
        let bad = RootDatum::unchecked(1, vec![vec![2], vec![-2]], vec![vec![2], vec![-2]], vec![0], vec![0]);
        let v = bad.validate();
        assert!(v.iter().any(|x| x.message.contains("⟨α,α^∨⟩ ≠ 2")), "{v:?}");

        let dup = RootDatum::unchecked(
            2,
            vec![vec![1, -1], vec![-1, 1], vec![1, -1]],
            vec![vec![1, -1], vec![-1, 1], vec![1, -1]],
            vec![0],
            vec![0, 2],
        );
        assert!(dup.validate().iter().any(|x| x.message.contains("duplicate root")));
    }

    #[test]
    fn fundamental_groups() {
        let sl2 = RootDatum::named(Family::A, 1, Isogeny::SimplyConnected).unwrap();
        assert_eq!(sl2.fundamental_group(), (vec![2], 0));
        assert_eq!(sl2.dual().fundamental_group(), (vec![], 0));
        let sl4 = RootDatum::named(Family::A, 3, Isogeny::SimplyConnected).unwrap();
        assert_eq!(sl4.fundamental_group().0, vec![4]);
        let spin5 = RootDatum::named(Family::B, 2, Isogeny::SimplyConnected).unwrap();
        assert_eq!(spin5.fundamental_group().0, vec![2]);
        let g2 = RootDatum::named(Family::G, 2, Isogeny::SimplyConnected).unwrap();
        assert!(g2.has_connected_center());
        assert_eq!(RootDatum::gl(3).unwrap().fundamental_group(), (vec![], 1));
    }

    #[test]
    fn dual_swaps_isogeny() {
        let b2sc = RootDatum::named(Family::B, 2, Isogeny::SimplyConnected).unwrap();
        let c2ad = RootDatum::named(Family::C, 2, Isogeny::Adjoint).unwrap();
        assert_eq!(b2sc.dual(), c2ad);
        let gl3 = RootDatum::gl(3).unwrap();
        assert_eq!(gl3.dual(), gl3);
    }

    #[test]
    fn diagram_flip() {
        for iso in [Isogeny::SimplyConnected, Isogeny::Adjoint, Isogeny::Gl] {
            let a2 = RootDatum::named(Family::A, 2, iso).unwrap();
            let flip = BasedAutomorphism::from_simple_permutation(&a2, &[1, 0]).unwrap();
            assert_eq!(flip.order(), 2, "{iso}");
            let s = a2.simple();
            assert_eq!(flip.root_perm()[s[0]] as usize, s[1]);
        }
        let b2 = RootDatum::named(Family::B, 2, Isogeny::Adjoint).unwrap();
        assert!(BasedAutomorphism::from_simple_permutation(&b2, &[1, 0]).is_err());
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(4), Some((2, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(1), None);
        let d = RootDatum::named(Family::A, 1, Isogeny::SimplyConnected).unwrap();
        assert!(FrobeniusTwist::split(&d, 6).is_err());
        assert!(FrobeniusTwist::with_characteristic(9, 2, BasedAutomorphism::identity(&d)).is_err());
    }
}
