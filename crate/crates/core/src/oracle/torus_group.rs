//! Irreducible counts for `G = T(𝔽_q) ⋊ P` with `T` a split torus and `P`
//! a finite group acting on the character lattice.
//!
//! Over a prime field `𝔽_r` with `r ≡ 1 mod |G|`, the group algebra is split
//! semisimple, so the irreducibles lying over a `P`-orbit `O` of characters
//! of `T(𝔽_q)` number `dim e_O·Z(𝔽_r G)`, the rank of `e_O` times the class
//! sums.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::charsheaf::SheafParam;
use crate::error::{Error, Result};
use crate::lattice::IntMatrix;
use crate::series::{disconnected_series_data, predicted_irreducibles, DisconnectedInput};
use crate::weyl::{ComponentAction, DEFAULT_CAP};

const ORDER_CAP: usize = 5000;

/// `(ℤ/N)^r ⋊ P` with elements indexed `a + |A|·c`.
struct SemidirectGroup {
    n: i64,
    rank: usize,
    /// Action of each component on `A = Y ⊗ ℤ/N`.
    on_a: Vec<IntMatrix>,
    table: Vec<Vec<usize>>,
    a_size: usize,
}

impl SemidirectGroup {
    fn order(&self) -> usize {
        self.a_size * self.table.len()
    }

    fn decode_a(&self, mut i: usize) -> Vec<i64> {
        (0..self.rank)
            .map(|_| {
                let d = (i % self.n as usize) as i64;
                i /= self.n as usize;
                d
            })
            .collect()
    }

    fn encode_a(&self, v: &[i64]) -> usize {
        v.iter().rev().fold(0usize, |acc, &x| acc * self.n as usize + x.rem_euclid(self.n) as usize)
    }

    fn mul(&self, x: usize, y: usize) -> usize {
        let (a1, c1) = (x % self.a_size, x / self.a_size);
        let (a2, c2) = (y % self.a_size, y / self.a_size);
        let moved = self.on_a[c1].mul_vec(&self.decode_a(a2));
        let sum: Vec<i64> = self.decode_a(a1).iter().zip(&moved).map(|(s, t)| s + t).collect();
        self.encode_a(&sum) + self.a_size * self.table[c1][c2]
    }
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut out = 1;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            out = out * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    out
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Rank of a list of vectors over `𝔽_r`.
fn rank_mod(mut rows: Vec<Vec<u64>>, r: u64) -> usize {
    let cols = rows.first().map_or(0, |v| v.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = pow_mod(rows[rank][c], r - 2, r);
        for x in rows[rank].iter_mut() {
            *x = *x * inv % r;
        }
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let f = row[c];
                for (x, &pv) in row.iter_mut().zip(&pivot) {
                    *x = (*x + r * r - f * pv % r) % r;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, Serialize)]
pub struct TorusSeriesCheck {
    pub param: SheafParam,
    /// Characters of `T(𝔽_q)` in the `P`-orbit, as elements of `X/(q−1)X`.
    pub orbit: Vec<Vec<i64>>,
    pub oracle_irreducibles: usize,
    /// `Σ ψ(1)²` over those irreducibles, when the group is small enough.
    pub sum_of_squared_dimensions: Option<usize>,
    pub predicted_irreducibles: usize,
    pub matched: bool,
}

/// Counts irreducibles of `T(𝔽_q) ⋊ P` over the orbit of each parameter and
/// compares with the series prediction. The torus is split, so parameters
/// must satisfy `(q−1)ℓ ∈ X`.
pub fn finite_group_series_check(input: &DisconnectedInput, params: &[SheafParam]) -> Result<Vec<TorusSeriesCheck>> {
    let d = &input.connected;
    if d.num_roots() != 0 || !input.eps.tau.is_identity() {
        return Err(Error::input("the finite-group oracle needs a split torus"));
    }
    let rank = d.rank();
    let q = input.eps.q;
    let n = q as i64 - 1;
    let comps: &ComponentAction = &input.components;
    let a_size = (n as usize).pow(rank as u32);
    let on_a: Vec<IntMatrix> = comps
        .automorphisms
        .iter()
        .map(|aut| aut.matrix().inverse().expect("unimodular").transpose())
        .collect();
    let g = SemidirectGroup {
        n,
        rank,
        on_a,
        table: comps.table.clone(),
        a_size,
    };
    let order = g.order();
    if order > ORDER_CAP {
        return Err(Error::CapExceeded {
            what: "torus-by-component group".into(),
            estimate: order.to_string(),
            cap: ORDER_CAP as u64,
        });
    }
    let r = (1..).map(|k| k * order as u64 + 1).find(|&x| is_prime(x)).unwrap();
    let zeta = (2..r)
        .map(|x| pow_mod(x, (r - 1) / n.max(1) as u64, r))
        .find(|&z| (1..n as u64).all(|k| pow_mod(z, k, r) != 1))
        .unwrap_or(1);

    // conjugacy classes and class sums
    let inv: Vec<usize> = (0..order).map(|x| (0..order).find(|&y| g.mul(x, y) == 0).unwrap()).collect();
    let mut seen = vec![false; order];
    let mut class_sums: Vec<Vec<usize>> = Vec::new();
    for x in 0..order {
        if seen[x] {
            continue;
        }
        let class: BTreeSet<usize> = (0..order).map(|h| g.mul(g.mul(h, x), inv[h])).collect();
        for &c in &class {
            seen[c] = true;
        }
        class_sums.push(class.into_iter().collect());
    }

    let inv_a = pow_mod(a_size as u64 % r, r - 2, r);
    let mut out = Vec::with_capacity(params.len());
    for l in params {
        let chi0: Vec<i64> = l.numerators().iter().map(|&x| x * n / l.denominator()).collect();
        if l.numerators().iter().any(|&x| (x * n) % l.denominator() != 0) {
            return Err(Error::input(format!("parameter {l} is not a character of the split torus over F_{q}")));
        }
        let orbit: BTreeSet<Vec<i64>> = comps
            .automorphisms
            .iter()
            .map(|aut| aut.matrix().mul_vec(&chi0).iter().map(|x| x.rem_euclid(n.max(1))).collect())
            .collect();
        // e_O on A
        let mut e = vec![0u64; order];
        for chi in &orbit {
            for (a, slot) in e.iter_mut().enumerate().take(a_size) {
                let av = g.decode_a(a);
                let pairing: i64 = chi.iter().zip(&av).map(|(x, y)| x * y).sum();
                let exp = (-pairing).rem_euclid(n.max(1)) as u64;
                *slot = (*slot + pow_mod(zeta, exp, r) * inv_a) % r;
            }
        }
        let support: Vec<usize> = (0..a_size).filter(|&a| e[a] != 0).collect();
        let times = |elements: &[usize]| -> Vec<u64> {
            let mut v = vec![0u64; order];
            for &a in &support {
                for &x in elements {
                    let y = g.mul(a, x);
                    v[y] = (v[y] + e[a]) % r;
                }
            }
            v
        };
        let rows: Vec<Vec<u64>> = class_sums.iter().map(|c| times(c)).collect();
        let oracle = rank_mod(rows, r);
        let sum_sq = (order <= 256).then(|| rank_mod((0..order).map(|x| times(&[x])).collect(), r));

        let ext = input.group(DEFAULT_CAP)?;
        let (report, b) = disconnected_series_data(input, &ext, l)?;
        let predicted = predicted_irreducibles(&ext, &report, &b)?;
        out.push(TorusSeriesCheck {
            param: l.clone(),
            orbit: orbit.into_iter().collect(),
            oracle_irreducibles: oracle,
            sum_of_squared_dimensions: sum_sq,
            predicted_irreducibles: predicted,
            matched: oracle == predicted,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charsheaf::parse_fraction;
    use crate::root_datum::{BasedAutomorphism, FrobeniusTwist, RootDatum};

    fn param(v: &[&str]) -> SheafParam {
        SheafParam::from_rationals(&v.iter().map(|s| parse_fraction(s).unwrap()).collect::<Vec<_>>())
    }

    fn swap_input(q: u64) -> DisconnectedInput {
        let t = RootDatum::torus(2);
        let swap = BasedAutomorphism::from_matrix(&t, IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]], 2)).unwrap();
        let eps = FrobeniusTwist::split(&t, q).unwrap();
        DisconnectedInput::new(t.clone(), ComponentAction::order_two(&t, swap).unwrap(), eps).unwrap()
    }

    #[test]
    fn dihedral_of_order_eight() {
        let input = swap_input(3);
        let checks =
            finite_group_series_check(&input, &[param(&["1/2", "0"]), param(&["1/2", "1/2"]), param(&["0", "0"])]).unwrap();
        let counts: Vec<usize> = checks.iter().map(|c| c.oracle_irreducibles).collect();
        assert_eq!(counts, vec![1, 2, 2]);
        assert_eq!(checks[0].sum_of_squared_dimensions, Some(4));
        assert_eq!(checks[1].sum_of_squared_dimensions, Some(2));
        assert!(checks.iter().all(|c| c.matched));
    }

    #[test]
    fn rejects_nonsplit_characters() {
        let input = swap_input(3);
        assert!(finite_group_series_check(&input, &[param(&["1/4", "0"])]).is_err());
    }
}
