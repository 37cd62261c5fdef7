//! Systematic Reed–Solomon codes with errors-and-erasures decoding
//! (Berlekamp–Massey initialised with the erasure locator, then Forney).

use std::sync::Arc;

use super::gf::Field;
use crate::error::{Error, Result};

/// A received symbol: `None` marks an erasure.
pub type Received = Option<u32>;

#[derive(Clone, Debug)]
pub struct ReedSolomon {
    field: Arc<Field>,
    n: usize,
    k: usize,
    /// Generator coefficients, ascending degree, monic.
    generator: Vec<u32>,
}

/// What the decoder did to a word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RsDecoded {
    pub message: Vec<u32>,
    pub codeword: Vec<u32>,
    /// Unerased positions whose value was changed.
    pub corrected: Vec<usize>,
    pub erasures: usize,
}

impl ReedSolomon {
    /// `[n, k]` code with roots `alpha^1 … alpha^{n−k}`; needs `n < |F|`.
    pub fn new(field: Arc<Field>, n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Config(format!("RS needs 0 < k <= n (got n={n}, k={k})")));
        }
        if n as u64 >= u64::from(field.order()) {
            return Err(Error::Config(format!(
                "RS length {n} needs a field larger than GF({})",
                field.order()
            )));
        }
        let mut generator = vec![1u32];
        for i in 1..=(n - k) {
            let root = field.alpha_pow(i as i64);
            generator = poly_mul(&field, &generator, &[field.neg(root), 1]);
        }
        Ok(Self { field, n, k, generator })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn redundancy(&self) -> usize {
        self.n - self.k
    }

    /// Message first, then `n − k` check symbols.
    pub fn encode(&self, message: &[u32]) -> Result<Vec<u32>> {
        if message.len() != self.k {
            return Err(Error::Param(format!("RS message must have {} symbols", self.k)));
        }
        if let Some(&bad) = message.iter().find(|&&s| s >= self.field.order()) {
            return Err(Error::Param(format!("symbol {bad} outside GF({})", self.field.order())));
        }
        let f = &*self.field;
        let r = self.n - self.k;
        // Long division of m(x)·x^r by g(x); v[j] is the coefficient of x^{n−1−j}.
        let mut rem = vec![0u32; r];
        for &m in message {
            let coef = f.add(m, rem.last().copied().unwrap_or(0));
            for i in (1..r).rev() {
                rem[i] = f.sub(rem[i - 1], f.mul(coef, self.generator[i]));
            }
            if r > 0 {
                rem[0] = f.neg(f.mul(coef, self.generator[0]));
            }
        }
        let mut out = message.to_vec();
        out.extend(rem.iter().rev().map(|&c| f.neg(c)));
        Ok(out)
    }

    fn locator(&self, j: usize) -> u32 {
        self.field.alpha_pow((self.n - 1 - j) as i64)
    }

    fn syndromes(&self, word: &[u32]) -> Vec<u32> {
        let f = &*self.field;
        (1..=self.n - self.k)
            .map(|i| {
                let a = f.alpha_pow(i as i64);
                word.iter().fold(0, |acc, &c| f.add(f.mul(acc, a), c))
            })
            .collect()
    }

    pub fn is_codeword(&self, word: &[u32]) -> bool {
        word.len() == self.n && self.syndromes(word).iter().all(|&s| s == 0)
    }

    /// Corrects `s` errors and `e` erasures whenever `2s + e <= n − k`.
    pub fn decode(&self, word: &[Received]) -> Result<RsDecoded> {
        if word.len() != self.n {
            return Err(Error::Param(format!("RS word must have {} symbols", self.n)));
        }
        let f = &*self.field;
        let two_t = self.n - self.k;
        let erased: Vec<usize> = (0..self.n).filter(|&j| word[j].is_none()).collect();
        if erased.len() > two_t {
            return Err(Error::Decode(format!("{} erasures exceed the budget {two_t}", erased.len())));
        }
        let mut r: Vec<u32> = word.iter().map(|s| s.unwrap_or(0)).collect();
        if let Some(&bad) = r.iter().find(|&&s| s >= f.order()) {
            return Err(Error::Param(format!("symbol {bad} outside GF({})", f.order())));
        }
        let synd = self.syndromes(&r);
        if synd.iter().all(|&s| s == 0) && erased.is_empty() {
            return Ok(RsDecoded { message: r[..self.k].to_vec(), codeword: r, corrected: vec![], erasures: 0 });
        }
        let mut gamma = vec![1u32];
        for &j in &erased {
            gamma = poly_mul(f, &gamma, &[1, f.neg(self.locator(j))]);
        }
        let e = erased.len();
        let mut lambda = gamma.clone();
        let mut b = gamma;
        let mut l = e;
        for step in (e + 1)..=two_t {
            let mut delta = 0;
            for (i, &c) in lambda.iter().enumerate() {
                if i < step {
                    delta = f.add(delta, f.mul(c, synd[step - i - 1]));
                }
            }
            let xb: Vec<u32> = std::iter::once(0).chain(b.iter().copied()).collect();
            if delta == 0 {
                b = xb;
                continue;
            }
            let t = poly_sub(f, &lambda, &poly_scale(f, &xb, delta));
            if 2 * l < step + e {
                b = poly_scale(f, &lambda, f.inv(delta).unwrap());
                l = step + e - l;
            } else {
                b = xb;
            }
            lambda = t;
        }
        trim(&mut lambda);
        let deg = lambda.len() - 1;
        if deg != l || 2 * (l - e) + e > two_t {
            return Err(Error::Decode("errata exceed the correction radius".into()));
        }
        let mut omega = poly_mul(f, &synd, &lambda);
        omega.truncate(two_t);
        let dlambda: Vec<u32> = lambda
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| f.mul(f.scalar(i as u64), c))
            .collect();
        let mut corrected = Vec::new();
        let mut roots = 0;
        for j in 0..self.n {
            let xinv = f.inv(self.locator(j)).unwrap();
            if poly_eval(f, &lambda, xinv) != 0 {
                continue;
            }
            roots += 1;
            let den = poly_eval(f, &dlambda, xinv);
            let Some(mag) = f.div(f.neg(poly_eval(f, &omega, xinv)), den) else {
                return Err(Error::Decode("repeated errata locator root".into()));
            };
            if mag != 0 || word[j].is_none() {
                r[j] = f.sub(r[j], mag);
                if word[j].is_some() {
                    corrected.push(j);
                }
            }
        }
        if roots != deg || !self.is_codeword(&r) {
            return Err(Error::Decode("errata locator does not split over the code positions".into()));
        }
        Ok(RsDecoded { message: r[..self.k].to_vec(), codeword: r, corrected, erasures: e })
    }
}

fn trim(p: &mut Vec<u32>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

pub(crate) fn poly_mul(f: &Field, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    out
}

fn poly_sub(f: &Field, a: &[u32], b: &[u32]) -> Vec<u32> {
    (0..a.len().max(b.len()))
        .map(|i| f.sub(a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0)))
        .collect()
}

fn poly_scale(f: &Field, a: &[u32], s: u32) -> Vec<u32> {
    a.iter().map(|&c| f.mul(c, s)).collect()
}

pub(crate) fn poly_eval(f: &Field, p: &[u32], x: u32) -> u32 {
    p.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
}
