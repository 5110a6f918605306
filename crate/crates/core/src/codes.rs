//! Binary `t`-codes: subsets of `Z_2^t` closed under cycling and under sums
//! of comparable words, together with the decision procedure telling when
//! two symmetry configurations are guaranteed to be incompatible.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::SymmetryConfig;
use crate::error::{Error, Result};

/// Longest supported word.
pub const MAX_LEN: usize = 64;

fn mask(t: usize) -> u64 {
    if t == 64 {
        u64::MAX
    } else {
        (1u64 << t) - 1
    }
}

/// A binary word `(c_1, ..., c_t)`; bit `i` of `bits` holds `c_{i+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Codeword {
    t: usize,
    bits: u64,
}

impl Codeword {
    pub fn new(t: usize, bits: u64) -> Result<Self> {
        if t == 0 || t > MAX_LEN {
            return Err(Error::InvalidArgument(format!("word length {t} outside 1..={MAX_LEN}")));
        }
        if bits & !mask(t) != 0 {
            return Err(Error::InvalidArgument(format!("bits {bits:#x} do not fit length {t}")));
        }
        Ok(Codeword { t, bits })
    }

    pub fn zero(t: usize) -> Result<Self> {
        Codeword::new(t, 0)
    }

    /// `v_r = (1, ..., 1, 0, ..., 0)` with `r` leading ones.
    pub fn leading_ones(t: usize, r: usize) -> Result<Self> {
        if r > t {
            return Err(Error::InvalidArgument(format!("v_{r} does not fit length {t}")));
        }
        Codeword::new(t, if r == 0 { 0 } else { mask(r) })
    }

    /// Standard basis word `e_i`, 1-based.
    pub fn basis(t: usize, i: usize) -> Result<Self> {
        if i == 0 || i > t {
            return Err(Error::InvalidArgument(format!("e_{i} does not exist for length {t}")));
        }
        Codeword::new(t, 1 << (i - 1))
    }

    pub fn from_bools(c: &[bool]) -> Result<Self> {
        let bits = c.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
        Codeword::new(c.len(), bits)
    }

    pub fn len(&self) -> usize {
        self.t
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// `c_i`, 1-based.
    pub fn get(&self, i: usize) -> bool {
        (self.bits >> (i - 1)) & 1 == 1
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (1..=self.t).map(|i| self.get(i)).collect()
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// `(c_t, c_1, ..., c_{t-1})`.
    pub fn cycle(self) -> Codeword {
        let top = (self.bits >> (self.t - 1)) & 1;
        Codeword { t: self.t, bits: ((self.bits << 1) & mask(self.t)) | top }
    }

    pub fn cycle_by(self, k: usize) -> Codeword {
        (0..k % self.t).fold(self, |c, _| c.cycle())
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Codeword) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn comparable(&self, other: &Codeword) -> bool {
        self.le(other) || other.le(self)
    }

    /// Sum in `Z_2^t`.
    pub fn add(self, other: Codeword) -> Codeword {
        Codeword { t: self.t, bits: self.bits ^ other.bits }
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.t {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Codeword {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bools = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("`{s}` is not a bitstring"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Codeword::from_bools(&bools)
    }
}

impl Serialize for Codeword {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Codeword {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A violated closure axiom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum AxiomViolation {
    /// `word` is present but its cycle is not.
    Cycle { word: Codeword },
    /// `a <= b` are present but `a + b` is not.
    ComparableSum { a: Codeword, b: Codeword },
}

/// A set of words of a common length `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Code {
    t: usize,
    words: BTreeSet<Codeword>,
}

impl Code {
    pub fn new(t: usize, words: impl IntoIterator<Item = Codeword>) -> Result<Self> {
        Codeword::zero(t)?;
        let words: BTreeSet<_> = words.into_iter().collect();
        if let Some(w) = words.iter().find(|w| w.len() != t) {
            return Err(Error::InvalidArgument(format!("word {w} does not have length {t}")));
        }
        Ok(Code { t, words })
    }

    /// The least code containing `seeds`.
    pub fn closure(t: usize, seeds: impl IntoIterator<Item = Codeword>) -> Result<Self> {
        let seeds = Code::new(t, seeds)?;
        let mut words = BTreeSet::new();
        let mut pending: Vec<Codeword> = seeds.words.into_iter().collect();
        while let Some(w) = pending.pop() {
            if !words.insert(w) {
                continue;
            }
            let c = w.cycle();
            if !words.contains(&c) {
                pending.push(c);
            }
            for x in &words {
                if x.comparable(&w) {
                    let s = x.add(w);
                    if !words.contains(&s) {
                        pending.push(s);
                    }
                }
            }
        }
        Ok(Code { t, words })
    }

    pub fn len_words(&self) -> usize {
        self.t
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> impl Iterator<Item = &Codeword> {
        self.words.iter()
    }

    pub fn contains(&self, w: &Codeword) -> bool {
        self.words.contains(w)
    }

    /// All violations of the two closure axioms; empty iff this is a code.
    pub fn axiom_violations(&self) -> Vec<AxiomViolation> {
        let mut out = Vec::new();
        for w in &self.words {
            if !self.words.contains(&w.cycle()) {
                out.push(AxiomViolation::Cycle { word: *w });
            }
        }
        for a in &self.words {
            for b in &self.words {
                if a.le(b) && !self.words.contains(&a.add(*b)) {
                    out.push(AxiomViolation::ComparableSum { a: *a, b: *b });
                }
            }
        }
        out
    }

    pub fn is_code(&self) -> bool {
        self.axiom_violations().is_empty()
    }

    pub fn to_bitstrings(&self) -> Vec<String> {
        self.words.iter().map(ToString::to_string).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOp {
    Cycle,
    Sum,
}

/// One derivation step: `result = cycle(operands[0])` or
/// `result = operands[0] + operands[1]` with comparable operands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub op: StepOp,
    pub operands: Vec<Codeword>,
    pub result: Codeword,
}

impl Step {
    /// Whether the step is a legal application of a closure rule.
    pub fn is_valid(&self) -> bool {
        match (self.op, self.operands.as_slice()) {
            (StepOp::Cycle, [a]) => a.cycle() == self.result,
            (StepOp::Sum, [a, b]) => a.comparable(b) && a.add(*b) == self.result,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EuclidTrace {
    pub t: usize,
    pub r: usize,
    pub s: usize,
    pub steps: Vec<Step>,
    /// Sequence of remainders `(r, s) -> ...` ending with `1`.
    pub remainders: Vec<usize>,
    pub result: Codeword,
}

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Derives `v_1` from `{v_r, v_s}` by subtractive Euclid: `v_s + v_r` has
/// its ones in positions `r+1..s`, and cycling it `t - r` times gives
/// `v_{s-r}`.
pub fn euclid_reduce(t: usize, r: usize, s: usize) -> Result<EuclidTrace> {
    if !(0 < r && r < s && s <= t) {
        return Err(Error::InvalidArgument(format!("need 0 < r < s <= t, got t={t}, r={r}, s={s}")));
    }
    if gcd(r, s) != 1 {
        return Err(Error::InvalidArgument(format!("gcd({r}, {s}) = {} is not 1", gcd(r, s))));
    }
    let mut steps = Vec::new();
    let mut remainders = vec![s, r];
    let (mut lo, mut hi) = (r, s);
    while lo > 1 {
        // lo < hi, and gcd 1 rules out lo == hi
        let a = Codeword::leading_ones(t, lo)?;
        let b = Codeword::leading_ones(t, hi)?;
        let mut w = b.add(a);
        steps.push(Step { op: StepOp::Sum, operands: vec![b, a], result: w });
        for _ in 0..(t - lo) {
            let next = w.cycle();
            steps.push(Step { op: StepOp::Cycle, operands: vec![w], result: next });
            w = next;
        }
        let d = hi - lo;
        debug_assert_eq!(w, Codeword::leading_ones(t, d)?);
        remainders.push(d);
        if d == 1 {
            break;
        }
        (lo, hi) = if d < lo { (d, lo) } else { (lo, d) };
    }
    let result = Codeword::leading_ones(t, 1)?;
    Ok(EuclidTrace { t, r, s, steps, remainders, result })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Guaranteed,
    NotGuaranteed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    /// Different pinwheel parameters.
    Alpha,
    /// The tuples are equal.
    Identical,
    /// One tuple is `≲` the other.
    Precedes,
    /// `gcd(m, n) = 1`.
    GcdOne,
    /// None of the sufficient conditions applies.
    NoCriterion,
}

#[derive(Debug, Clone, Serialize)]
pub struct Distinction {
    pub verdict: Verdict,
    pub reason: Reason,
    /// `gcd(m, n)`, or `None` when the tuples are equal.
    pub gcd: Option<usize>,
}

impl Distinction {
    pub fn guaranteed(&self) -> bool {
        self.verdict == Verdict::Guaranteed
    }
}

/// `m ≲ n`: some index `l` has `m_j = n_j` for `j < l`, `m_l < n_l` and
/// `m_j = 0` for `j > l`.
pub fn precedes(m: &[u32], n: &[u32]) -> bool {
    let len = m.len().max(n.len());
    let at = |v: &[u32], j: usize| v.get(j).copied().unwrap_or(0);
    for l in 0..len {
        if at(m, l) < at(n, l) && (l + 1..len).all(|j| at(m, j) == 0) {
            return true;
        }
        if at(m, l) != at(n, l) {
            return false;
        }
    }
    false
}

/// `max gcd(j+1, l+1)` over `m_j != 0`, `n_l != 0`, `l != j`; `1` if either
/// tuple is zero or the index set is empty.
pub fn tuple_gcd(m: &[u32], n: &[u32]) -> usize {
    let mut best = None;
    for (j, &mj) in m.iter().enumerate() {
        for (l, &nl) in n.iter().enumerate() {
            if mj != 0 && nl != 0 && j != l {
                let g = gcd(j + 2, l + 2);
                best = Some(best.map_or(g, |b: usize| b.max(g)));
            }
        }
    }
    best.unwrap_or(1)
}

/// Whether the existence theorem guarantees that `(alpha, m)`- and
/// `(beta, n)`-symmetric solutions are different.
pub fn distinct_guaranteed(c1: &SymmetryConfig, c2: &SymmetryConfig) -> Result<Distinction> {
    if c1.n != c2.n {
        return Err(Error::ConfigMismatch(format!("dimensions {} and {} differ", c1.n, c2.n)));
    }
    c1.validate_group()?;
    c2.validate_group()?;
    if c1.alpha != c2.alpha {
        let g = (c1.m != c2.m).then(|| tuple_gcd(&c1.m, &c2.m));
        return Ok(Distinction { verdict: Verdict::Guaranteed, reason: Reason::Alpha, gcd: g });
    }
    if c1.m == c2.m {
        return Ok(Distinction { verdict: Verdict::NotGuaranteed, reason: Reason::Identical, gcd: None });
    }
    let g = tuple_gcd(&c1.m, &c2.m);
    let (verdict, reason) = if precedes(&c1.m, &c2.m) || precedes(&c2.m, &c1.m) {
        (Verdict::Guaranteed, Reason::Precedes)
    } else if g == 1 {
        (Verdict::Guaranteed, Reason::GcdOne)
    } else {
        (Verdict::NotGuaranteed, Reason::NoCriterion)
    };
    Ok(Distinction { verdict, reason, gcd: Some(g) })
}

/// Result of classifying which rotations `R_c(theta)` leave a function invariant.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceCode {
    pub code: Code,
    /// Closure axioms the sampled set fails; nonempty only through sampling artifacts.
    pub violations: Vec<AxiomViolation>,
    /// `max |f(R_c(theta) x) - f(x)|` per word, in the order of `Codeword::bits`.
    pub residuals: Vec<f64>,
}

/// Numerically classifies the words `c ∈ Z_2^{j+1}` for which `f` is
/// invariant under `R_c(theta)` acting on the complex coordinates of the
/// block starting at real coordinate `start`. A sampled heuristic: a word is
/// accepted when the largest deviation over all samples is at most `tol`.
pub fn rotation_invariance_code<F>(
    f: F,
    start: usize,
    j: usize,
    thetas: &[f64],
    points: &[Vec<f64>],
    tol: f64,
) -> Result<InvarianceCode>
where
    F: Fn(&[f64]) -> f64,
{
    let t = j + 1;
    if t > 16 {
        return Err(Error::InvalidArgument(format!("block of {t} complex coordinates is too large to classify")));
    }
    let mut words = Vec::new();
    let mut residuals = Vec::with_capacity(1 << t);
    let mut y = Vec::new();
    for bits in 0..(1u64 << t) {
        let c = Codeword::new(t, bits)?;
        let mut worst = 0.0f64;
        for x in points {
            if x.len() < start + 2 * t {
                return Err(Error::DimensionMismatch { expected: start + 2 * t, actual: x.len() });
            }
            let fx = f(x);
            for &theta in thetas {
                let (s, co) = theta.sin_cos();
                y.clear();
                y.extend_from_slice(x);
                for k in 0..t {
                    if c.get(k + 1) {
                        let (a, b) = (x[start + 2 * k], x[start + 2 * k + 1]);
                        y[start + 2 * k] = co * a - s * b;
                        y[start + 2 * k + 1] = s * a + co * b;
                    }
                }
                worst = worst.max((f(&y) - fx).abs());
            }
        }
        residuals.push(worst);
        if worst <= tol {
            words.push(c);
        }
    }
    let code = Code::new(t, words)?;
    let violations = code.axiom_violations();
    Ok(InvarianceCode { code, violations, residuals })
}

/// `Im(z_1 conj(z_2) z_3 conj(z_4))` on `C^4 = R^8`, interleaved coordinates.
pub fn four_term_invariant(x: &[f64]) -> f64 {
    let z = |k: usize| (x[2 * k], x[2 * k + 1]);
    let mul = |(a, b): (f64, f64), (c, d): (f64, f64)| (a * c - b * d, a * d + b * c);
    let conj = |(a, b): (f64, f64)| (a, -b);
    mul(mul(z(0), conj(z(1))), mul(z(2), conj(z(3)))).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Regime;

    fn w(s: &str) -> Codeword {
        s.parse().unwrap()
    }

    fn cfg(n: usize, alpha: u32, m: Vec<u32>) -> SymmetryConfig {
        SymmetryConfig::new(n, alpha, m, Regime::ALessB).unwrap()
    }

    #[test]
    fn cycle_examples() {
        assert_eq!(w("100").cycle(), w("010"));
        assert_eq!(w("001").cycle(), w("100"));
        let v = Codeword::leading_ones(7, 3).unwrap();
        assert_eq!(v, w("1110000"));
        assert_eq!(v.cycle_by(3), w("0001110"));
        assert_eq!(v.cycle_by(7), v);
    }

    #[test]
    fn closure_small() {
        let z = Code::closure(4, [Codeword::zero(4).unwrap()]).unwrap();
        assert_eq!(z.size(), 1);
        let c = Code::closure(5, [w("11000"), w("11100")]).unwrap();
        for i in 1..=5 {
            assert!(c.contains(&Codeword::basis(5, i).unwrap()));
        }
        let even = Code::closure(4, [w("1100"), w("1111")]).unwrap();
        assert!(even.words().all(|x| x.weight() % 2 == 0));
        assert!(!even.contains(&w("1000")));
        assert!(even.is_code());
    }

    #[test]
    fn euclid_examples() {
        let tr = euclid_reduce(5, 2, 3).unwrap();
        assert_eq!(tr.result, w("10000"));
        assert_eq!(tr.remainders, vec![3, 2, 1]);
        assert!(tr.steps.iter().all(Step::is_valid));
        let tr = euclid_reduce(7, 3, 7).unwrap();
        assert_eq!(tr.remainders, vec![7, 3, 4, 1]);
        assert_eq!(tr.steps.last().unwrap().result, Codeword::basis(7, 1).unwrap());
        assert!(euclid_reduce(4, 2, 4).is_err());
        assert!(euclid_reduce(4, 3, 5).is_err());
    }

    #[test]
    fn precedes_reading() {
        assert!(precedes(&[1, 0, 0], &[2, 0, 0]));
        assert!(!precedes(&[2, 0, 0], &[0, 0, 1]));
        assert!(!precedes(&[0, 0, 1], &[2, 0, 0]));
        assert!(precedes(&[1, 0, 0], &[1, 1, 0]));
        assert!(!precedes(&[1, 0, 0], &[1, 0, 0]));
    }

    #[test]
    fn distinction_examples() {
        let d = distinct_guaranteed(&cfg(8, 0, vec![1, 0, 0]), &cfg(8, 1, vec![0, 0, 0])).unwrap();
        assert_eq!((d.verdict, d.reason), (Verdict::Guaranteed, Reason::Alpha));
        let d = distinct_guaranteed(&cfg(8, 0, vec![1, 0, 0]), &cfg(8, 0, vec![2, 0, 0])).unwrap();
        assert_eq!((d.verdict, d.reason), (Verdict::Guaranteed, Reason::Precedes));
        let d = distinct_guaranteed(&cfg(8, 0, vec![2, 0, 0]), &cfg(8, 0, vec![0, 0, 1])).unwrap();
        assert_eq!((d.verdict, d.gcd), (Verdict::NotGuaranteed, Some(2)));
        let d = distinct_guaranteed(&cfg(8, 0, vec![2, 0, 0]), &cfg(8, 0, vec![0, 1, 0])).unwrap();
        assert!(d.guaranteed());
        assert!(distinct_guaranteed(&cfg(8, 0, vec![1, 0, 0]), &cfg(4, 0, vec![1])).is_err());
    }

    #[test]
    fn gcd_conventions() {
        assert_eq!(tuple_gcd(&[0, 0], &[1, 0]), 1);
        // supports overlap only at equal indices
        assert_eq!(tuple_gcd(&[1, 0, 0], &[2, 0, 0]), 1);
        assert_eq!(tuple_gcd(&[1, 0, 1], &[0, 0, 1]), 2);
    }

    #[test]
    fn constant_and_modulus_functions() {
        let pts: Vec<Vec<f64>> = (0..5).map(|i| (0..4).map(|k| ((i * 4 + k) as f64 * 0.7).sin()).collect()).collect();
        let th = [0.3, 1.1, 2.5];
        let full = rotation_invariance_code(|_| 1.0, 0, 1, &th, &pts, 1e-12).unwrap();
        assert_eq!(full.code.size(), 4);
        let m = rotation_invariance_code(|x| x[0] * x[0] + x[1] * x[1], 0, 1, &th, &pts, 1e-12).unwrap();
        assert!(m.code.contains(&w("10")));
        assert!(m.violations.is_empty());
    }

    #[test]
    fn serde_bitstrings() {
        let c = Code::closure(3, [w("110")]).unwrap();
        let s = toml::to_string(&c).unwrap();
        assert!(s.contains("\"011\""));
        let back: Code = toml::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
