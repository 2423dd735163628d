//! Finite fields `𝔽_{p^m}` by log/exp tables over a primitive polynomial.
//!
//! Elements are integers `0..p^m` whose base-`p` digits are polynomial
//! coefficients (lowest degree first).

use crate::error::{Error, Result};
use crate::root_datum::prime_power;

#[derive(Debug, Clone)]
pub struct GaloisField {
    p: u32,
    m: u32,
    size: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl GaloisField {
    pub fn new(q: u64) -> Result<Self> {
        let (p, m) = prime_power(q).ok_or_else(|| Error::input(format!("{q} is not a prime power")))?;
        if q > 1 << 20 {
            return Err(Error::input(format!("field of size {q} exceeds the table limit")));
        }
        let (p, size) = (p as u32, q as u32);
        // monic modulus x^m + c_{m-1}x^{m-1} + … + c_0, searched by coefficients
        for tail in 0..size {
            if let Some((exp, log)) = try_primitive(p, m, size, tail) {
                return Ok(GaloisField { p, m, size, exp, log });
            }
        }
        Err(Error::invariant("primitive polynomial exists", format!("none found for q = {q}")))
    }

    pub fn order(&self) -> u32 {
        self.size
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    /// A generator of the multiplicative group.
    pub fn generator(&self) -> u32 {
        self.exp[1]
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        digitwise(self.p, self.m, a, b, |x, y| (x + y) % self.p)
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        digitwise(self.p, self.m, a, b, |x, y| (x + self.p - y) % self.p)
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.sub(0, a)
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.size - 1;
        self.exp[((self.log[a as usize] + self.log[b as usize]) % n) as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero");
        let n = self.size - 1;
        self.exp[((n - self.log[a as usize]) % n) as usize]
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = u64::from(self.size - 1);
        self.exp[((u64::from(self.log[a as usize]) * (e % n)) % n) as usize]
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: u32) -> u32 {
        let n = self.size - 1;
        n / num_integer::gcd(n, self.log[a as usize])
    }

    /// The subfield of size `q`, which must be `p^d` with `d | m`.
    pub fn subfield(&self, q: u32) -> Result<Vec<u32>> {
        if q < 2 || !(self.size - 1).is_multiple_of(q - 1) {
            return Err(Error::input(format!("no subfield of size {q} in 𝔽_{}", self.size)));
        }
        let mut out: Vec<u32> = (0..self.size).filter(|&x| self.pow(x, u64::from(q)) == x).collect();
        out.sort_unstable();
        if out.len() != q as usize {
            return Err(Error::input(format!("no subfield of size {q} in 𝔽_{}", self.size)));
        }
        Ok(out)
    }
}

fn digitwise(p: u32, m: u32, mut a: u32, mut b: u32, f: impl Fn(u32, u32) -> u32) -> u32 {
    let mut out = 0;
    let mut place = 1;
    for _ in 0..m {
        out += f(a % p, b % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

/// Powers of `x` modulo `x^m + tail`; accepted when `x` has order `p^m − 1`.
fn try_primitive(p: u32, m: u32, size: u32, tail: u32) -> Option<(Vec<u32>, Vec<u32>)> {
    let tail_digits: Vec<u32> = (0..m).map(|i| (tail / p.pow(i)) % p).collect();
    if tail_digits[0] == 0 {
        return None;
    }
    let n = size - 1;
    let mut exp = Vec::with_capacity(n as usize + 1);
    let mut log = vec![0u32; size as usize];
    let mut cur: Vec<u32> = (0..m).map(|i| u32::from(i == 0)).collect();
    for k in 0..n {
        let val: u32 = cur.iter().enumerate().map(|(i, &c)| c * p.pow(i as u32)).sum();
        if val == 1 && k > 0 {
            return None;
        }
        exp.push(val);
        log[val as usize] = k;
        // multiply by x: shift, then reduce x^m = −tail
        let top = cur[m as usize - 1];
        for i in (1..m as usize).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        for i in 0..m as usize {
            cur[i] = (cur[i] + p * p - top * tail_digits[i] % p) % p;
        }
    }
    let val: u32 = cur.iter().enumerate().map(|(i, &c)| c * p.pow(i as u32)).sum();
    if val != 1 {
        return None;
    }
    exp.push(1);
    Some((exp, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_small() {
        for q in [2u64, 3, 4, 5, 8, 9, 16, 25, 27, 64] {
            let f = GaloisField::new(q).unwrap();
            let n = f.order();
            for a in 1..n {
                assert_eq!(f.mul(a, f.inv(a)), 1, "q = {q}, a = {a}");
                assert_eq!(f.add(a, f.neg(a)), 0);
            }
            for a in 0..n.min(16) {
                for b in 0..n.min(16) {
                    for c in 0..n.min(8) {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
            assert_eq!(f.element_order(f.generator()), n - 1);
        }
    }

    #[test]
    fn subfields() {
        let f = GaloisField::new(729).unwrap();
        assert_eq!(f.subfield(3).unwrap().len(), 3);
        assert_eq!(f.subfield(9).unwrap().len(), 9);
        assert_eq!(f.subfield(27).unwrap().len(), 27);
        assert!(f.subfield(81).is_err());
        assert!(GaloisField::new(6).is_err());
    }
}
