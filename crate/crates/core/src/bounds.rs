//! Finite-parameter evaluation of the counting bounds, in natural log.
//!
//! Every closed form is evaluated with log-gamma for factorials. Whole-poset
//! products use exact binomial (or hypergrid) level sizes and are also
//! reported divided by the number of elements, which keeps them finite when
//! the raw log value exceeds the `f64` range.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::poset::level_sizes;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    Lemma3,
    Lemma8,
    Thm1,
    Thm2,
    Trivial,
}

impl Formula {
    pub fn as_str(self) -> &'static str {
        match self {
            Formula::Lemma3 => "lemma3",
            Formula::Lemma8 => "lemma8",
            Formula::Thm1 => "thm1",
            Formula::Thm2 => "thm2",
            Formula::Trivial => "trivial",
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lemma3" => Formula::Lemma3,
            "lemma8" => Formula::Lemma8,
            "thm1" => Formula::Thm1,
            "thm2" => Formula::Thm2,
            "trivial" => Formula::Trivial,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown formula `{other}`"
                )))
            }
        })
    }
}

/// A bound on `ln(count)`. Missing sides are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogBound {
    pub formula: Formula,
    pub params: BTreeMap<String, f64>,
    pub log_lower: Option<f64>,
    pub log_upper: Option<f64>,
    /// `log_lower` divided by the poset size, for whole-poset formulas.
    pub normalized_lower: Option<f64>,
    pub normalized_upper: Option<f64>,
}

impl LogBound {
    fn new(formula: Formula, params: &[(&str, f64)]) -> Self {
        LogBound {
            formula,
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            log_lower: None,
            log_upper: None,
            normalized_lower: None,
            normalized_upper: None,
        }
    }

    /// Whether `ln_count` lies between the available sides, allowing a
    /// relative slack `rel` on each.
    pub fn contains(&self, ln_count: f64, rel: f64) -> bool {
        let slack = |v: f64| rel * v.abs().max(1.0);
        self.log_lower.is_none_or(|lo| ln_count >= lo - slack(lo))
            && self.log_upper.is_none_or(|hi| ln_count <= hi + slack(hi))
    }
}

/// `ln(k!)`.
pub fn ln_factorial(k: f64) -> f64 {
    ln_gamma(k + 1.0)
}

/// Natural log of a big integer; `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("64 bits").ln() + shift as f64 * std::f64::consts::LN_2
}

/// `num / den` as `f64` with full relative precision, for operands of any
/// size. Underflows to zero gracefully.
pub fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    fn split(x: &BigUint) -> (f64, i64) {
        let bits = x.bits();
        let shift = bits.saturating_sub(64);
        ((x >> shift).to_f64().expect("64 bits"), shift as i64)
    }
    if num.is_zero() {
        return 0.0;
    }
    let (a, ea) = split(num);
    let (b, eb) = split(den);
    let e = ea - eb;
    let r = a / b;
    // Scale in two steps so that neither factor overflows prematurely.
    let half = (e / 2) as i32;
    r * 2f64.powi(half) * 2f64.powi(e as i32 - half)
}

/// Neumaier-compensated sum.
#[derive(Default, Clone, Copy)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn value(self) -> f64 {
        self.s + self.c
    }
}

fn check_ab(a: u64, b: u64) -> Result<()> {
    if a >= b {
        return Err(Error::InvalidParameter(format!(
            "need a < b, got a = {a}, b = {b}"
        )));
    }
    Ok(())
}

/// Three-level bounds for `|X| = |Z| = a`, `|Y| = b`, `X`/`Z` degree `r`:
/// lower `2a(ln r - 1) - 2(b - a)`, upper `((a + b)/r)·ln r!`.
pub fn lemma3_bounds(a: u64, b: u64, r: u64) -> Result<LogBound> {
    check_ab(a, b)?;
    if r == 0 {
        return Err(Error::InvalidParameter("need r >= 1".into()));
    }
    let (af, bf, rf) = (a as f64, b as f64, r as f64);
    let mut out = LogBound::new(Formula::Lemma3, &[("a", af), ("b", bf), ("r", rf)]);
    out.log_lower = Some(2.0 * af * (rf.ln() - 1.0) - 2.0 * (bf - af));
    out.log_upper = Some((af + bf) / rf * ln_factorial(rf));
    Ok(out)
}

/// The intermediate Brégman form `(a/r)·ln r! + (b/q)·ln q!` with
/// `q = ar/b + 1`; never above the upper side of [`lemma3_bounds`].
pub fn lemma3_bregman(a: u64, b: u64, r: u64) -> Result<f64> {
    check_ab(a, b)?;
    if r == 0 {
        return Err(Error::InvalidParameter("need r >= 1".into()));
    }
    let (af, bf, rf) = (a as f64, b as f64, r as f64);
    let q = af * rf / bf + 1.0;
    Ok(af / rf * ln_factorial(rf) + bf / q * ln_factorial(q))
}

/// Flow-weighted three-level lower bound `-2a·ln W - (a + b)`.
pub fn lemma8_lower(a: u64, b: u64, w: f64) -> Result<LogBound> {
    check_ab(a, b)?;
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < W <= 1, got {w}")));
    }
    let (af, bf) = (a as f64, b as f64);
    let mut out = LogBound::new(Formula::Lemma8, &[("a", af), ("b", bf), ("W", w)]);
    out.log_lower = Some(-2.0 * af * w.ln() - (af + bf));
    Ok(out)
}

/// Exact `C(n, k)` for `k = 0..=n`.
pub fn binomial_row(n: u32) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 0..n {
        c = c * (n - k) / (k + 1);
        row.push(c.clone());
    }
    row
}

/// Upper limit on `n` accepted by [`theorem1_bounds`].
pub const THEOREM1_MAX_N: u32 = 10_000;

/// One factor of the layered product: `a = |Z|`, `b = |Y|`, degree `r`.
/// Sizes are kept as ratios to the poset size.
struct Layer {
    a: f64,
    b: f64,
    r: f64,
}

/// Whole-poset bounds for `2^[n]`.
///
/// Even `n = 2m`: layer `s = 1..=m` glues `L_{m-s+1}` to `L_{m+s-1}` and
/// contributes the three-level bounds with `a = |L_{m+s}|`,
/// `b = |L_{m+s-1}|`, `r = m + s`.
///
/// Odd `n = 2m + 1`: a first factor for the perfect matchings between the
/// two middle levels (`k = |L_m|`, degree `m + 1`): lower `k·ln(m+1) - k`
/// from van der Waerden, upper `(k/(m+1))·ln (m+1)!` from Brégman. Then
/// layers `s = 1..=m` with `a = |L_{m+s+1}|`, `b = |L_{m+s}|`, `r = m + s + 1`.
pub fn theorem1_bounds(n: u32) -> Result<LogBound> {
    if n == 0 || n > THEOREM1_MAX_N {
        return Err(Error::InvalidParameter(format!(
            "theorem1 needs 1 <= n <= {THEOREM1_MAX_N}, got {n}"
        )));
    }
    let sizes = binomial_row(n);
    let total = BigUint::one() << n;
    let frac = |i: usize| big_ratio(&sizes[i], &total);
    let m = (n / 2) as usize;
    let mut lower = Sum::default();
    let mut upper = Sum::default();
    let mut layers = Vec::with_capacity(m);
    if n.is_multiple_of(2) {
        for s in 1..=m {
            layers.push(Layer {
                a: frac(m + s),
                b: frac(m + s - 1),
                r: (m + s) as f64,
            });
        }
    } else {
        let k = frac(m);
        let r = (m + 1) as f64;
        lower.add(k * r.ln() - k);
        upper.add(k / r * ln_factorial(r));
        for s in 1..=m {
            layers.push(Layer {
                a: frac(m + s + 1),
                b: frac(m + s),
                r: (m + s + 1) as f64,
            });
        }
    }
    for l in &layers {
        lower.add(2.0 * l.a * (l.r.ln() - 1.0));
        lower.add(-2.0 * (l.b - l.a));
        upper.add((l.a + l.b) / l.r * ln_factorial(l.r));
    }
    let scale = 2f64.powi(n as i32);
    let mut out = LogBound::new(Formula::Thm1, &[("n", n as f64)]);
    out.normalized_lower = Some(lower.value());
    out.normalized_upper = Some(upper.value());
    out.log_lower = Some(lower.value() * scale);
    out.log_upper = Some(upper.value() * scale);
    Ok(out)
}

/// `(theorem1 lower)/2^n - ln(n/2e)`.
pub fn theorem1_headline_gap(n: u32) -> Result<f64> {
    let b = theorem1_bounds(n)?;
    let target = (n as f64 / (2.0 * std::f64::consts::E)).ln();
    Ok(b.normalized_lower.expect("thm1 has a lower side") - target)
}

/// Number of layers kept by [`theorem2_lower`]: `min(floor(t·n^{3/5}), floor(M/2))`
/// with `M = (t-1)n`.
pub fn theorem2_layer_count(t: u32, n: u32) -> usize {
    let band = (t as f64 * (n as f64).powf(0.6)).floor() as usize;
    band.min((n as usize * (t as usize - 1)) / 2)
}

/// The two level pairs `(i, i+1)` whose flows weight layer `s`: the pair
/// below the glued middle and the pair above it.
pub fn layer_pairs(total_rank: usize, s: usize) -> (usize, usize) {
    let m = total_rank / 2;
    if total_rank.is_multiple_of(2) {
        (m - s, m + s - 1)
    } else {
        (m - s, m + s)
    }
}

/// Flow-weighted lower bound for `[t]^n`:
/// `Σ_s [-2|L_{m+s}|·ln W_s - (|L_{m+s-1}| + |L_{m+s}|)]` over the first
/// [`theorem2_layer_count`] layers. For odd total rank the middle
/// matching contributes `0` (it has at least one perfect matching) and
/// layer `s` uses `a = |L_{m+s+1}|`, `b = |L_{m+s}|`.
///
/// `w` holds `W_1, W_2, ...`; a single value is used for every layer.
pub fn theorem2_lower(t: u32, n: u32, w: &[f64]) -> Result<LogBound> {
    if t < 2 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "theorem2 needs t >= 2, n >= 1, got t = {t}, n = {n}"
        )));
    }
    let layers = theorem2_layer_count(t, n);
    let ws: Vec<f64> = match w.len() {
        1 => vec![w[0]; layers],
        len if len >= layers => w[..layers].to_vec(),
        len => {
            return Err(Error::InvalidParameter(format!(
                "theorem2 needs {layers} weights (or one), got {len}"
            )))
        }
    };
    if let Some(bad) = ws.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < W <= 1, got {bad}"
        )));
    }
    let sizes = if t == 2 {
        binomial_row(n)
    } else {
        level_sizes(t, n)?
    };
    let total = BigUint::from(t).pow(n);
    let frac = |i: usize| big_ratio(&sizes[i], &total);
    let big_m = sizes.len() - 1;
    let m = big_m / 2;
    let offset = big_m % 2;
    let mut lower = Sum::default();
    for (s, &w_s) in (1..=layers).zip(&ws) {
        let a = frac(m + s + offset);
        let b = frac(m + s + offset - 1);
        lower.add(-2.0 * a * w_s.ln());
        lower.add(-(a + b));
    }
    let scale = (t as f64).powi(n as i32);
    let mut out = LogBound::new(
        Formula::Thm2,
        &[("t", t as f64), ("n", n as f64), ("layers", layers as f64)],
    );
    out.normalized_lower = Some(lower.value());
    out.log_lower = Some(lower.value() * scale);
    Ok(out)
}

/// `t^n · ln n`.
pub fn trivial_upper(t: u32, n: u32) -> Result<LogBound> {
    if t < 2 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "need t >= 2, n >= 1, got t = {t}, n = {n}"
        )));
    }
    let mut out = LogBound::new(Formula::Trivial, &[("t", t as f64), ("n", n as f64)]);
    out.log_upper = Some((t as f64).powi(n as i32) * (n as f64).ln());
    out.normalized_upper = Some((n as f64).ln());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol
    }

    #[test]
    fn lemma3_examples() {
        let b = lemma3_bounds(1, 2, 2).unwrap();
        assert!(close(
            b.log_lower.unwrap(),
            2.0 * (2f64.ln() - 1.0) - 2.0,
            1e-12
        ));
        assert!(close(b.log_lower.unwrap(), -2.614, 1e-3));
        assert!(close(b.log_upper.unwrap(), 1.0397, 1e-4));
        assert!(b.contains(2f64.ln(), 0.0));

        let b = lemma3_bounds(4, 6, 3).unwrap();
        assert!(close(b.log_lower.unwrap().exp(), 0.0403, 1e-4));
        assert!(close(b.log_upper.unwrap().exp(), 392.4, 0.1));

        assert!(lemma3_bounds(2, 2, 3).is_err());
        assert!(lemma3_bounds(1, 2, 0).is_err());
    }

    #[test]
    fn lemma3_bregman_sits_below_upper() {
        for (a, b, r) in [(1, 2, 2), (4, 6, 3), (10, 15, 6), (3, 100, 50)] {
            let mid = lemma3_bregman(a, b, r).unwrap();
            assert!(mid <= lemma3_bounds(a, b, r).unwrap().log_upper.unwrap() + 1e-9);
        }
    }

    #[test]
    fn lemma8_examples() {
        let b = lemma8_lower(1, 2, 0.5).unwrap();
        assert!(close(b.log_lower.unwrap(), 2.0 * 2f64.ln() - 3.0, 1e-12));
        let b = lemma8_lower(4, 6, 1.0 / 3.0).unwrap();
        assert!(close(b.log_lower.unwrap(), 8.0 * 3f64.ln() - 10.0, 1e-12));
        assert!(close(b.log_lower.unwrap(), -1.211, 1e-3));
        assert_eq!(lemma8_lower(3, 5, 1.0).unwrap().log_lower, Some(-8.0));
        assert!(lemma8_lower(1, 2, 0.0).is_err());
        assert!(lemma8_lower(1, 2, 1.5).is_err());
    }

    #[test]
    fn trivial_examples() {
        assert!(close(
            trivial_upper(2, 4).unwrap().log_upper.unwrap(),
            22.18,
            0.01
        ));
        assert_eq!(trivial_upper(2, 1).unwrap().log_upper, Some(0.0));
        assert!(close(
            trivial_upper(3, 2).unwrap().log_upper.unwrap(),
            6.24,
            0.01
        ));
    }

    #[test]
    fn theorem1_composes_layers() {
        let t = theorem1_bounds(2).unwrap();
        let l = lemma3_bounds(1, 2, 2).unwrap();
        assert!(close(t.log_lower.unwrap(), l.log_lower.unwrap(), 1e-12));
        assert!(close(t.log_upper.unwrap(), l.log_upper.unwrap(), 1e-12));

        // n = 4: layers (a, b, r) = (4, 6, 3), (1, 4, 4).
        let t = theorem1_bounds(4).unwrap();
        let l1 = lemma3_bounds(4, 6, 3).unwrap();
        let l2 = lemma3_bounds(1, 4, 4).unwrap();
        assert!(close(
            t.log_lower.unwrap(),
            l1.log_lower.unwrap() + l2.log_lower.unwrap(),
            1e-9
        ));
        assert!(close(
            t.log_upper.unwrap(),
            l1.log_upper.unwrap() + l2.log_upper.unwrap(),
            1e-9
        ));

        // n = 1: one middle matching of a single edge.
        let t = theorem1_bounds(1).unwrap();
        assert!(t.contains(0.0, 0.0));
        assert!(theorem1_bounds(0).is_err());
    }

    #[test]
    fn theorem1_large_n_is_finite() {
        let t = theorem1_bounds(THEOREM1_MAX_N).unwrap();
        assert!(t.normalized_lower.unwrap().is_finite());
        assert!(t.normalized_upper.unwrap().is_finite());
        assert!(t.normalized_lower < t.normalized_upper);
    }

    #[test]
    fn theorem2_with_uniform_boolean_weights() {
        // W_s = 1/(m+s) turns each term into 2a·ln(m+s) - a - b, which
        // exceeds the theorem1 term by b - a; the excess telescopes.
        for n in [2u32, 4, 6, 8, 10] {
            let m = n as usize / 2;
            let layers = theorem2_layer_count(2, n);
            assert_eq!(layers, m);
            let ws: Vec<f64> = (1..=m).map(|s| 1.0 / (m + s) as f64).collect();
            let t2 = theorem2_lower(2, n, &ws).unwrap().log_lower.unwrap();
            let t1 = theorem1_bounds(n).unwrap().log_lower.unwrap();
            let row = binomial_row(n);
            let excess = row[m].to_f64().unwrap() - 1.0;
            assert!(close(t2 - t1, excess, 1e-9), "n = {n}");
        }
    }

    #[test]
    fn theorem2_all_ones_is_minus_level_sums() {
        let b = theorem2_lower(3, 2, &[1.0]).unwrap();
        // Levels 1,2,3,2,1; one layer: -(|L_2| + |L_3|).
        assert_eq!(b.params["layers"], 2.0);
        let expect: f64 = (1..=theorem2_layer_count(3, 2))
            .map(|s| -([1.0, 2.0, 3.0, 2.0, 1.0][2 + s - 1] + [1.0, 2.0, 3.0, 2.0, 1.0][2 + s]))
            .sum();
        assert!(close(b.log_lower.unwrap(), expect, 1e-12));
        assert!(theorem2_lower(3, 2, &[0.5, 0.5, 0.5, 0.5, 0.5, 0.5]).is_ok());
        assert!(theorem2_lower(3, 4, &[0.5, 0.5]).is_err());
        assert!(theorem2_lower(3, 2, &[0.0]).is_err());
    }

    #[test]
    fn layer_pair_indices() {
        assert_eq!(layer_pairs(4, 1), (1, 2));
        assert_eq!(layer_pairs(4, 2), (0, 3));
        assert_eq!(layer_pairs(3, 1), (0, 2));
    }

    #[test]
    fn big_ratio_precision() {
        let row = binomial_row(3000);
        let total = BigUint::one() << 3000u32;
        let r = big_ratio(&row[1500], &total);
        let exact = BigRational::new(BigInt::from(row[1500].clone()), BigInt::from(total.clone()));
        let scaled = (exact * BigRational::from_integer(BigInt::from(10u64.pow(15)))).to_integer();
        let want = scaled.to_f64().unwrap() / 1e15;
        assert!(((r - want) / want).abs() < 1e-12);
        assert_eq!(big_ratio(&BigUint::zero(), &total), 0.0);
        assert!(close(
            ln_biguint(&(BigUint::one() << 5000u32)),
            5000.0 * std::f64::consts::LN_2,
            1e-9
        ));
    }
}
