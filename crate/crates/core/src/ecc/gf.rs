//! Arithmetic in GF(p^d) over log/antilog tables.
//!
//! Elements are integers in `[0, p^d)` whose base-p digits are polynomial
//! coefficients, so a run of base-q digits with `q = p^r` maps to a field
//! element without conversion.

use crate::error::{Error, Result};

/// Largest field order we build tables for.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    p: u32,
    degree: u32,
    order: u32,
    /// Coefficients of the primitive modulus below `x^degree`, as an element.
    modulus: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// `(p, r)` with `q = p^r`, or `None` when `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut v = q;
    let mut r = 0;
    while v % p == 0 {
        v /= p;
        r += 1;
    }
    (v == 1).then_some((p as u32, r))
}

impl Field {
    /// `GF(q)` for a prime power `q`.
    pub fn new(q: u64) -> Result<Self> {
        let (p, d) = prime_power(q)
            .ok_or_else(|| Error::Config(format!("field order {q} is not a prime power")))?;
        Self::with_degree(p, d)
    }

    pub fn with_degree(p: u32, degree: u32) -> Result<Self> {
        let order = u64::from(p)
            .checked_pow(degree)
            .filter(|&o| o <= MAX_FIELD_ORDER)
            .ok_or_else(|| {
                Error::Config(format!("GF({p}^{degree}) exceeds the supported order {MAX_FIELD_ORDER}"))
            })? as u32;
        if degree == 0 || prime_power(u64::from(p)) != Some((p, 1)) {
            return Err(Error::Config(format!("GF({p}^{degree}) is not a field")));
        }
        // First monic polynomial (in integer order) whose root x is primitive.
        for modulus in 0..order {
            if let Some((exp, log)) = try_tables(p, degree, order, modulus) {
                return Ok(Self { p, degree, order, modulus, exp, log });
            }
        }
        Err(Error::Config(format!("no primitive polynomial found for GF({p}^{degree})")))
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Low coefficients of the primitive modulus `x^d − modulus(x)`.
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        digitwise(self.p, a, b, |x, y| (x + y) % self.p)
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        digitwise(self.p, a, b, |x, y| (x + self.p - y) % self.p)
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.sub(0, a)
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] + self.log[b as usize];
        self.exp[(s % (self.order - 1)) as usize]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| {
            let l = self.log[a as usize];
            self.exp[((self.order - 1 - l) % (self.order - 1)) as usize]
        })
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    /// `alpha^e` for the primitive element `alpha = x`.
    pub fn alpha_pow(&self, e: i64) -> u32 {
        let n = i64::from(self.order - 1);
        self.exp[e.rem_euclid(n) as usize]
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = u64::from(self.log[a as usize]) * e % u64::from(self.order - 1);
        self.exp[l as usize]
    }

    /// The integer `k` as a field element (an element of the prime subfield).
    pub fn scalar(&self, k: u64) -> u32 {
        (k % u64::from(self.p)) as u32
    }
}

fn digitwise(p: u32, mut a: u32, mut b: u32, op: impl Fn(u32, u32) -> u32) -> u32 {
    let mut out = 0;
    let mut place = 1;
    while a > 0 || b > 0 {
        out += op(a % p, b % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

/// Multiplies an element by `x` modulo `x^d − modulus`.
fn times_x(p: u32, degree: u32, order: u32, modulus: u32, a: u32) -> u32 {
    let top = a / (order / p);
    let shifted = (a % (order / p)) * p;
    if top == 0 {
        return shifted;
    }
    // x^d = modulus(x), so the carried coefficient adds top·modulus.
    let mut carry = 0;
    let mut m = modulus;
    let mut place = 1;
    for _ in 0..degree {
        carry += (m % p) * top % p * place;
        m /= p;
        place *= p;
    }
    digitwise(p, shifted, carry, |x, y| (x + y) % p)
}

fn try_tables(p: u32, degree: u32, order: u32, modulus: u32) -> Option<(Vec<u32>, Vec<u32>)> {
    if modulus == 0 && order > 2 {
        return None;
    }
    let n = (order - 1) as usize;
    let mut exp = vec![0u32; 2 * n.max(1)];
    let mut log = vec![0u32; order as usize];
    let mut seen = vec![false; order as usize];
    let mut v = 1u32;
    for e in 0..n {
        if seen[v as usize] || v == 0 {
            return None;
        }
        seen[v as usize] = true;
        exp[e] = v;
        log[v as usize] = e as u32;
        v = if degree == 1 {
            // GF(p): step by a candidate generator `modulus`.
            (u64::from(v) * u64::from(modulus) % u64::from(p)) as u32
        } else {
            times_x(p, degree, order, modulus, v)
        };
    }
    if v != 1 {
        return None;
    }
    for e in n..2 * n {
        exp[e] = exp[e - n];
    }
    Some((exp, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(2), Some((2, 1)));
        assert_eq!(prime_power(4), Some((2, 2)));
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(1), None);
        assert!(Field::new(6).is_err());
        assert!(Field::new(1 << 21).is_err());
    }

    #[test]
    fn gf4_tables() {
        let f = Field::new(4).unwrap();
        // x^2 = x + 1
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.mul(2, 3), 1);
        assert_eq!(f.add(2, 3), 1);
    }

    #[test]
    fn inverses_exhaustive() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49, 64, 81, 125, 128, 256, 243, 512, 1024, 2048, 4096] {
            let f = Field::new(q).unwrap();
            for a in 1..f.order() {
                let ia = f.inv(a).unwrap();
                assert_eq!(f.mul(a, ia), 1, "q={q} a={a}");
            }
            assert_eq!(f.inv(0), None);
        }
    }

    /// Schoolbook polynomial product reduced by the modulus, as an oracle for the tables.
    fn slow_mul(f: &Field, a: u32, b: u32) -> u32 {
        let p = f.characteristic();
        let d = f.degree() as usize;
        let digits = |mut v: u32| {
            let mut out = vec![0u32; d];
            for slot in out.iter_mut() {
                *slot = v % p;
                v /= p;
            }
            out
        };
        let (da, db, dm) = (digits(a), digits(b), digits(f.modulus()));
        let mut prod = vec![0u32; 2 * d];
        for i in 0..d {
            for j in 0..d {
                prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
            }
        }
        for k in (d..2 * d).rev() {
            let c = prod[k];
            prod[k] = 0;
            for (i, &m) in dm.iter().enumerate() {
                prod[k - d + i] = (prod[k - d + i] + c * m) % p;
            }
        }
        prod[..d].iter().rev().fold(0, |acc, &c| acc * p + c)
    }

    #[test]
    fn field_axioms_on_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for q in [4u64, 9, 16, 27, 256, 625, 4096] {
            let f = Field::new(q).unwrap();
            for _ in 0..5000 {
                let (a, b, c) = (
                    rng.gen_range(0..f.order()),
                    rng.gen_range(0..f.order()),
                    rng.gen_range(0..f.order()),
                );
                if f.degree() > 1 {
                    assert_eq!(f.mul(a, b), slow_mul(&f, a, b));
                }
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.add(f.sub(a, b), b), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
            }
        }
    }

    #[test]
    fn prime_field_is_modular_arithmetic() {
        let f = Field::new(7).unwrap();
        for a in 0..7 {
            for b in 0..7 {
                assert_eq!(f.mul(a, b), a * b % 7);
                assert_eq!(f.add(a, b), (a + b) % 7);
            }
        }
    }
}
