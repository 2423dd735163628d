//! Brute-force census of semisimple conjugacy classes in `GL_n(𝔽_q)`,
//! `SL_n(𝔽_q)` and `PGL_n(𝔽_q)` for `n ≤ 3`, `q ≤ 5`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::field::GaloisField;
use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MatrixFamily {
    #[serde(rename = "GL", alias = "gl")]
    Gl,
    #[serde(rename = "SL", alias = "sl")]
    Sl,
    #[serde(rename = "PGL", alias = "pgl")]
    Pgl,
}

impl FromStr for MatrixFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GL" => Ok(MatrixFamily::Gl),
            "SL" => Ok(MatrixFamily::Sl),
            "PGL" => Ok(MatrixFamily::Pgl),
            _ => Err(Error::input(format!("unknown matrix group family {s:?}"))),
        }
    }
}

impl fmt::Display for MatrixFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixFamily::Gl => "GL",
            MatrixFamily::Sl => "SL",
            MatrixFamily::Pgl => "PGL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixGroupSpec {
    pub family: MatrixFamily,
    pub n: usize,
    pub q: u64,
}

impl fmt::Display for MatrixGroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}(F_{})", self.family, self.n, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RationalClass {
    /// Entries of the least matrix in the class, row-major, as indices into
    /// the sorted list of `𝔽_q` elements.
    pub representative: Vec<u32>,
    pub size: u64,
    pub order: u64,
    pub bundle: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeometricBundle {
    /// Sorted eigenvalues in `𝔽_{q^k}` (for `PGL`, least over scalar multiples).
    pub eigenvalues: Vec<u32>,
    pub classes: Vec<usize>,
    pub order: u64,
    /// Number of scalars `λ` with `λ·E = E`: the component count of the
    /// centralizer in `PGL_n`, and `1` for `GL_n`, `SL_n`.
    pub components: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassCensus {
    pub spec: MatrixGroupSpec,
    pub group_order: u64,
    pub semisimple_elements: u64,
    pub classes: Vec<RationalClass>,
    pub bundles: Vec<GeometricBundle>,
}

/// `𝔽_q` inside a splitting field for characteristic polynomials of degree
/// `≤ n`, with `n × n` matrix arithmetic.
struct Arith {
    big: GaloisField,
    /// `small[i]` is the `i`-th element of `𝔽_q` inside `big`.
    small: Vec<u32>,
    index: BTreeMap<u32, u32>,
    n: usize,
    q: u32,
}

type Mat = Vec<u32>;

impl Arith {
    fn new(n: usize, q: u64) -> Result<Self> {
        let k = (1..=n as u64).fold(1, num_integer::lcm);
        let big = GaloisField::new(q.pow(k as u32))?;
        let small = big.subfield(q as u32)?;
        let index = small.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
        Ok(Arith {
            big,
            small,
            index,
            n,
            q: q as u32,
        })
    }

    fn decode(&self, mut code: u64) -> Mat {
        (0..self.n * self.n)
            .map(|_| {
                let d = (code % u64::from(self.q)) as usize;
                code /= u64::from(self.q);
                self.small[d]
            })
            .collect()
    }

    fn encode(&self, m: &Mat) -> u64 {
        m.iter().rev().fold(0u64, |acc, x| acc * u64::from(self.q) + u64::from(self.index[x]))
    }

    fn mul(&self, a: &Mat, b: &Mat) -> Mat {
        let n = self.n;
        let f = &self.big;
        let mut out = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0;
                for k in 0..n {
                    s = f.add(s, f.mul(a[i * n + k], b[k * n + j]));
                }
                out[i * n + j] = s;
            }
        }
        out
    }

    fn identity(&self) -> Mat {
        (0..self.n * self.n).map(|k| u32::from(k / self.n == k % self.n)).collect()
    }

    fn det(&self, a: &Mat) -> u32 {
        self.char_poly(a)[0]
    }

    /// Coefficients `c_0..c_n` of `det(x − a)`, with the sign folded in so
    /// `c_0 = det(a)` up to `(−1)^n`; returned as `[det, …]` where index 0 is
    /// `det(a)` itself and the rest are the signed elementary symmetric
    /// functions used for bundling.
    fn char_poly(&self, a: &Mat) -> Vec<u32> {
        let f = &self.big;
        let n = self.n;
        let at = |i: usize, j: usize| a[i * n + j];
        match n {
            1 => vec![at(0, 0)],
            2 => {
                let det = f.sub(f.mul(at(0, 0), at(1, 1)), f.mul(at(0, 1), at(1, 0)));
                vec![det, f.add(at(0, 0), at(1, 1))]
            }
            3 => {
                let minor = |i: usize, j: usize| f.sub(f.mul(at(i, i), at(j, j)), f.mul(at(i, j), at(j, i)));
                let m2 = f.add(f.add(minor(0, 1), minor(0, 2)), minor(1, 2));
                let tr = f.add(f.add(at(0, 0), at(1, 1)), at(2, 2));
                let c0 = f.mul(at(0, 0), f.sub(f.mul(at(1, 1), at(2, 2)), f.mul(at(1, 2), at(2, 1))));
                let c1 = f.mul(at(0, 1), f.sub(f.mul(at(1, 0), at(2, 2)), f.mul(at(1, 2), at(2, 0))));
                let c2 = f.mul(at(0, 2), f.sub(f.mul(at(1, 0), at(2, 1)), f.mul(at(1, 1), at(2, 0))));
                let det = f.add(f.sub(c0, c1), c2);
                vec![det, m2, tr]
            }
            _ => unreachable!("n ≤ 3"),
        }
    }

    /// Roots with multiplicity of `x^n − e₁x^{n−1} + e₂x^{n−2} − …`, sorted.
    fn eigenvalues(&self, a: &Mat) -> Vec<u32> {
        let f = &self.big;
        let cp = self.char_poly(a);
        // elementary symmetric functions e_1..e_n
        let e: Vec<u32> = match self.n {
            1 => vec![cp[0]],
            2 => vec![cp[1], cp[0]],
            3 => vec![cp[2], cp[1], cp[0]],
            _ => unreachable!(),
        };
        // monic coefficients, highest first
        let mut poly: Vec<u32> = vec![1];
        for (k, &ek) in e.iter().enumerate() {
            poly.push(if k % 2 == 0 { f.neg(ek) } else { ek });
        }
        let mut roots = Vec::new();
        let mut x = 0;
        while poly.len() > 1 && x < f.order() {
            // synthetic division by (t − x)
            let mut quotient = Vec::with_capacity(poly.len() - 1);
            let mut acc = 0;
            for &c in &poly {
                acc = f.add(f.mul(acc, x), c);
                quotient.push(acc);
            }
            if acc == 0 {
                quotient.pop();
                poly = quotient;
                roots.push(x);
            } else {
                x += 1;
            }
        }
        assert_eq!(poly.len(), 1, "characteristic polynomial splits in the extension");
        roots.sort_unstable();
        roots
    }

    /// Scales so the first nonzero entry is 1.
    fn normalize(&self, a: &Mat) -> Mat {
        let f = &self.big;
        let lead = *a.iter().find(|&&x| x != 0).expect("nonzero matrix");
        let s = f.inv(lead);
        a.iter().map(|&x| f.mul(s, x)).collect()
    }

    fn inverse(&self, a: &Mat) -> Mat {
        // a^{-1} = a^{|GL_n(𝔽_q)| − 1}
        let order: u64 = (0..self.n as u32)
            .map(|i| u64::from(self.q).pow(self.n as u32) - u64::from(self.q).pow(i))
            .product();
        self.power(a, order - 1)
    }

    fn power(&self, a: &Mat, mut e: u64) -> Mat {
        let mut base = a.clone();
        let mut out = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                out = self.mul(&out, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        out
    }
}

const ELEMENT_CAP: u64 = 10_000_000;

pub fn census(spec: MatrixGroupSpec, exec: Exec) -> Result<ClassCensus> {
    if spec.n == 0 || spec.n > 3 || !(2..=5).contains(&spec.q) {
        return Err(Error::input(format!("census supports n ≤ 3 and q ≤ 5, got {spec}")));
    }
    let total = spec.q.pow((spec.n * spec.n) as u32);
    if total > ELEMENT_CAP {
        return Err(Error::CapExceeded {
            what: format!("matrix enumeration for {spec}"),
            estimate: total.to_string(),
            cap: ELEMENT_CAP,
        });
    }
    let ar = Arith::new(spec.n, spec.q)?;
    let p = u64::from(ar.big.characteristic());
    let one = 1u32;
    let keep = |code: u64| -> bool {
        let m = ar.decode(code);
        let d = ar.det(&m);
        match spec.family {
            MatrixFamily::Gl => d != 0,
            MatrixFamily::Sl => d == one,
            MatrixFamily::Pgl => d != 0 && ar.normalize(&m) == m,
        }
    };
    let codes = exec.filter_range(0..total as usize, |c| keep(c as u64));
    let group_order = codes.len() as u64;
    let is_identity = |m: &Mat| -> bool {
        match spec.family {
            MatrixFamily::Pgl => {
                let n = spec.n;
                let d = m[0];
                (0..n * n).all(|k| m[k] == if k / n == k % n { d } else { 0 })
            }
            _ => *m == ar.identity(),
        }
    };
    let orders: Vec<u64> = exec.map(&codes, |&c| {
        let m = ar.decode(c as u64);
        let mut x = m.clone();
        let mut k = 1;
        while !is_identity(&x) {
            x = ar.mul(&x, &m);
            k += 1;
        }
        k
    });
    let semisimple: BTreeMap<u64, u64> = codes
        .iter()
        .zip(&orders)
        .filter(|(_, &o)| o % p != 0)
        .map(|(&c, &o)| (c as u64, o))
        .collect();
    let semisimple_elements = semisimple.len() as u64;

    // conjugating generators
    let f = &ar.big;
    let n = spec.n;
    let mut gens: Vec<Mat> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                for &t in ar.small.iter().filter(|&&t| t != 0) {
                    let mut m = ar.identity();
                    m[i * n + j] = t;
                    gens.push(m);
                }
            }
        }
    }
    if spec.family != MatrixFamily::Sl {
        let g = *ar.small.iter().find(|&&x| x != 0 && f.element_order(x) == ar.q - 1).unwrap();
        let mut m = ar.identity();
        m[0] = g;
        gens.push(m);
    }
    let gens: Vec<(Mat, Mat)> = gens.into_iter().map(|g| (ar.inverse(&g), g)).collect();
    let canon = |m: Mat| -> Mat {
        match spec.family {
            MatrixFamily::Pgl => ar.normalize(&m),
            _ => m,
        }
    };

    let mut done: HashSet<u64> = HashSet::new();
    let mut raw_classes: Vec<(u64, u64, u64)> = Vec::new();
    for (&c, &o) in &semisimple {
        if done.contains(&c) {
            continue;
        }
        let mut orbit = vec![c];
        let mut seen: HashSet<u64> = HashSet::from([c]);
        let mut head = 0;
        while head < orbit.len() {
            let x = ar.decode(orbit[head]);
            for (gi, g) in &gens {
                let y = ar.encode(&canon(ar.mul(&ar.mul(g, &x), gi)));
                if seen.insert(y) {
                    orbit.push(y);
                }
            }
            head += 1;
        }
        let min = *orbit.iter().min().unwrap();
        done.extend(orbit.iter().copied());
        raw_classes.push((min, orbit.len() as u64, o));
    }
    raw_classes.sort_unstable();

    // geometric bundling
    let q_big = f.order();
    let mut bundle_index: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    let mut bundles: Vec<GeometricBundle> = Vec::new();
    let mut classes = Vec::with_capacity(raw_classes.len());
    for &(code, size, order) in &raw_classes {
        let m = ar.decode(code);
        let eig = ar.eigenvalues(&m);
        let (key, components) = match spec.family {
            MatrixFamily::Pgl => {
                let mut best: Option<Vec<u32>> = None;
                let mut comps = 0;
                for lambda in 1..q_big {
                    let mut s: Vec<u32> = eig.iter().map(|&e| f.mul(lambda, e)).collect();
                    s.sort_unstable();
                    if s == eig {
                        comps += 1;
                    }
                    if best.as_ref().is_none_or(|b| s < *b) {
                        best = Some(s);
                    }
                }
                (best.unwrap(), comps)
            }
            _ => (eig, 1),
        };
        let idx = *bundle_index.entry(key.clone()).or_insert_with(|| {
            bundles.push(GeometricBundle {
                eigenvalues: key,
                classes: Vec::new(),
                order,
                components,
            });
            bundles.len() - 1
        });
        if bundles[idx].order != order || bundles[idx].components != components {
            return Err(Error::invariant("bundles share characteristic data", format!("bundle {idx}")));
        }
        bundles[idx].classes.push(classes.len());
        let rep = m.iter().map(|x| ar.index[x]).collect();
        classes.push(RationalClass {
            representative: rep,
            size,
            order,
            bundle: idx,
        });
    }
    let sum: u64 = classes.iter().map(|c| c.size).sum();
    if sum != semisimple_elements || classes.iter().any(|c| !group_order.is_multiple_of(c.size)) {
        return Err(Error::invariant("class sizes sum to the semisimple count", format!("{sum} ≠ {semisimple_elements}")));
    }
    Ok(ClassCensus {
        spec,
        group_order,
        semisimple_elements,
        classes,
        bundles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(family: MatrixFamily, n: usize, q: u64) -> ClassCensus {
        census(MatrixGroupSpec { family, n, q }, Exec::default()).unwrap()
    }

    #[test]
    fn gl2_f2() {
        let c = run(MatrixFamily::Gl, 2, 2);
        assert_eq!(c.group_order, 6);
        assert_eq!(c.classes.len(), 2);
        assert_eq!(c.semisimple_elements, 3);
    }

    #[test]
    fn pgl2_f3() {
        let c = run(MatrixFamily::Pgl, 2, 3);
        assert_eq!(c.group_order, 24);
        assert_eq!(c.classes.len(), 4);
        let order_two: Vec<&GeometricBundle> = c.bundles.iter().filter(|b| b.order == 2).collect();
        assert_eq!(order_two.len(), 1);
        assert_eq!(order_two[0].classes.len(), 2);
        assert_eq!(order_two[0].components, 2);
    }

    #[test]
    fn sl2_f3() {
        let c = run(MatrixFamily::Sl, 2, 3);
        assert_eq!(c.group_order, 24);
        let mut orders: Vec<u64> = c.classes.iter().map(|k| k.order).collect();
        orders.sort_unstable();
        assert_eq!(orders, vec![1, 2, 4]);
    }

    #[test]
    fn sequential_matches_parallel() {
        let a = census(MatrixGroupSpec { family: MatrixFamily::Gl, n: 2, q: 3 }, Exec::Sequential).unwrap();
        let b = census(MatrixGroupSpec { family: MatrixFamily::Gl, n: 2, q: 3 }, Exec::Parallel).unwrap();
        assert_eq!(a.classes, b.classes);
        assert_eq!(a.group_order, 48);
    }

    #[test]
    fn refuses_out_of_range() {
        assert!(census(MatrixGroupSpec { family: MatrixFamily::Gl, n: 4, q: 2 }, Exec::default()).is_err());
        assert!(census(MatrixGroupSpec { family: MatrixFamily::Gl, n: 2, q: 7 }, Exec::default()).is_err());
    }
}
