//! Finite-n evaluation of the redundancy and rate bounds.
//!
//! Logarithms are base `q`. Asymptotic terms are never folded into a value:
//! a [`Term`] carries the evaluable part and, separately, the size of whatever
//! `o(1)`/`O(·)` term was dropped.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::CodeParams;
use crate::robust::{delta_redundancy, DeltaRedundancy, RobustConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    /// An `o(1)` or `O(·)` term was dropped; see [`Term::dropped`].
    AsymptoticDroppedO1,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub value: f64,
    pub exactness: Exactness,
    /// Argument of the dropped `O(·)` term, when there is one with a known shape.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped: Option<f64>,
}

impl Term {
    fn exact(value: f64) -> Self {
        Self { value, exactness: Exactness::Exact, dropped: None }
    }

    fn asymptotic(value: f64, dropped: Option<f64>) -> Self {
        Self { value, exactness: Exactness::AsymptoticDroppedO1, dropped }
    }
}

fn log_q(x: f64, q: u32) -> f64 {
    x.ln() / f64::from(q).ln()
}

/// `nk·(1/a − a·log k/n)`; the dropped term is `log log(nk)/log(nk)` (times `nk`, constant unknown).
pub fn lemma1_lower(q: u32, n: usize, k: usize, a: f64) -> Term {
    let nk = (n * k) as f64;
    let main = nk * (1.0 / a - a * log_q(k as f64, q) / n as f64);
    let l = log_q(nk, q);
    Term::asymptotic(main, Some(log_q(l, q) / l))
}

/// `log_q C(b + a, a)` with `b = q^e + off`, evaluated as a product of `a` ratios.
/// Once `q^e` dwarfs the shifts, `log_q(b + i)` is `e` to double precision.
fn log_binom_power(q: u32, e: usize, off: i64, a: u64) -> f64 {
    let qf = f64::from(q);
    let big = e as f64 * qf.ln() > 40.0;
    let base = if big { 0.0 } else { qf.powi(e as i32) };
    (1..=a)
        .map(|i| {
            let shift = off as f64 + i as f64;
            let top = if big { e as f64 } else { log_q(base + shift, q) };
            top - log_q(i as f64, q)
        })
        .sum()
}

/// The counting bound before simplification:
/// `log C(k + q^n − 1, k) − log C(k⌈n/Lmin⌉ + q^Lmin − 1, q^Lmin − 1)`.
pub fn lemma1_counting(q: u32, n: usize, k: usize, lmin: usize) -> f64 {
    let u = (k * n.div_ceil(lmin)) as u64;
    log_binom_power(q, n, -1, k as u64) - log_binom_power(q, lmin, -1, u)
}

/// `1 − 1/a`, asymptotic.
pub fn cor1_rate_cap(a: f64) -> Term {
    Term::asymptotic(1.0 - 1.0 / a, None)
}

/// `(n/a)·(1 + f/log n + 1/f)` with the `(1 + o(1))` factor dropped.
pub fn thm2_upper(q: u32, n: usize, a: f64, f: usize) -> Term {
    let ln = log_q(n as f64, q);
    Term::asymptotic(n as f64 / a * (1.0 + f as f64 / ln + 1.0 / f as f64), None)
}

/// `(n/a)·(1 + 2/√log n)`, the form for `f ≈ √log n`.
pub fn thm2_sqrt_form(q: u32, n: usize, a: f64) -> Term {
    Term::asymptotic(n as f64 / a * (1.0 + 2.0 / log_q(n as f64, q).sqrt()), None)
}

/// `n·k − K·m·k`, computed from the layout fields.
pub fn implementation_red(params: &CodeParams) -> usize {
    params.k * (params.n - params.blocks * params.m)
}

/// Pilot order for the union-bound regime, `⌈(2+δ)·log(n/m)⌉`.
pub fn pilot_s_lemma5(q: u32, n: usize, m: usize, delta: f64) -> usize {
    ((2.0 + delta) * log_q(n as f64 / m as f64, q)).ceil() as usize
}

/// `1 − 1/m − (m−1)(n/m)^{−δ} / (n(1 − (n/m)^{−δ}))`.
pub fn pilot_rate_lemma5(n: usize, m: usize, delta: f64) -> Term {
    let (nf, mf) = (n as f64, m as f64);
    let d = (nf / mf).powf(-delta);
    Term::exact(1.0 - 1.0 / mf - (mf - 1.0) * d / (nf * (1.0 - d)))
}

/// Pilot order for the local-lemma regime, `⌈log(n/m) + log log(n/m) + log(3e)⌉`.
pub fn pilot_s_lemma6(q: u32, n: usize, m: usize) -> usize {
    let l = log_q(n as f64 / m as f64, q);
    (l + log_q(l, q) + log_q(3.0 * std::f64::consts::E, q)).ceil() as usize
}

/// `1 − 1/m`; the dropped term is `(1 − 1/m)·log(e)/(2s)`, valid for large `n` only.
pub fn pilot_rate_lemma6(q: u32, n: usize, m: usize) -> Term {
    let s = pilot_s_lemma6(q, n, m) as f64;
    let keep = 1.0 - 1.0 / m as f64;
    Term::asymptotic(keep, Some(keep * log_q(std::f64::consts::E, q) / (2.0 * s)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PilotRates {
    pub m: usize,
    pub delta: f64,
    pub lemma5_s: usize,
    pub lemma5_rate: Term,
    pub lemma6_s: usize,
    pub lemma6_rate: Term,
}

impl PilotRates {
    pub fn new(q: u32, n: usize, m: usize, delta: f64) -> Self {
        Self {
            m,
            delta,
            lemma5_s: pilot_s_lemma5(q, n, m, delta),
            lemma5_rate: pilot_rate_lemma5(n, m, delta),
            lemma6_s: pilot_s_lemma6(q, n, m),
            lemma6_rate: pilot_rate_lemma6(q, n, m),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub params: CodeParams,
    pub a: f64,
    pub lemma1_lower: Term,
    pub cor1_rate_cap: Term,
    pub thm2_upper: Term,
    pub thm2_sqrt_form: Term,
    pub implementation_red: usize,
    pub implementation_rate: Term,
    pub pilot: PilotRates,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robust: Option<DeltaRedundancy>,
}

impl BoundReport {
    pub fn new(params: &CodeParams, pilot_m: usize, delta: f64, robust: Option<&RobustConfig>) -> Result<Self> {
        let a = params.asymptotic_a();
        let red = implementation_red(params);
        let total = (params.n * params.k) as f64;
        Ok(Self {
            params: *params,
            a,
            lemma1_lower: lemma1_lower(params.q, params.n, params.k, a),
            cor1_rate_cap: cor1_rate_cap(a),
            thm2_upper: thm2_upper(params.q, params.n, a, params.f),
            thm2_sqrt_form: thm2_sqrt_form(params.q, params.n, a),
            implementation_red: red,
            implementation_rate: Term::exact(1.0 - red as f64 / total),
            pilot: PilotRates::new(params.q, params.n, pilot_m, delta),
            robust: robust.map(|r| delta_redundancy(params, r)).transpose()?,
        })
    }

    /// `(name, value, annotation)` rows for table output.
    pub fn rows(&self) -> Vec<(String, String, &'static str)> {
        let t = |x: &Term| match x.exactness {
            Exactness::Exact => "exact",
            Exactness::AsymptoticDroppedO1 => "asymptotic, o(1) dropped",
        };
        let mut rows = vec![
            ("a".to_string(), format!("{:.4}", self.a), "exact"),
            ("lemma1_lower".into(), format!("{:.2}", self.lemma1_lower.value), t(&self.lemma1_lower)),
            ("cor1_rate_cap".into(), format!("{:.4}", self.cor1_rate_cap.value), t(&self.cor1_rate_cap)),
            ("thm2_upper".into(), format!("{:.2}", self.thm2_upper.value), t(&self.thm2_upper)),
            ("thm2_sqrt_form".into(), format!("{:.2}", self.thm2_sqrt_form.value), t(&self.thm2_sqrt_form)),
            ("implementation_red".into(), self.implementation_red.to_string(), "exact"),
            ("implementation_rate".into(), format!("{:.4}", self.implementation_rate.value), "exact"),
            (format!("pilot_lemma5_rate (m={}, s={})", self.pilot.m, self.pilot.lemma5_s), format!("{:.4}", self.pilot.lemma5_rate.value), t(&self.pilot.lemma5_rate)),
            (format!("pilot_lemma6_rate (m={}, s={})", self.pilot.m, self.pilot.lemma6_s), format!("{:.4}", self.pilot.lemma6_rate.value), t(&self.pilot.lemma6_rate)),
        ];
        if let Some(d) = &self.robust {
            rows.push(("robust_extra".into(), d.extra.to_string(), "exact"));
            rows.push(("robust_formula_extra".into(), d.formula_extra.to_string(), "exact"));
            rows.push(("robust_total_red".into(), d.total.to_string(), "exact"));
        }
        rows
    }
}
