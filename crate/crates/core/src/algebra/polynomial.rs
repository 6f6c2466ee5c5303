use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use super::AlgebraError;

/// Per-mode `(creation power, annihilation power)` of a normal-ordered monomial.
///
/// Ordering puts higher total degree first, then compares modes in turn with
/// more creation operators first. The first entry of a polynomial under this
/// order is its leading term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature(Vec<(u32, u32)>);

impl Signature {
    pub fn identity(modes: usize) -> Self {
        Signature(vec![(0, 0); modes])
    }

    pub fn new(powers: Vec<(u32, u32)>) -> Self {
        Signature(powers)
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn powers(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(c, a)| c + a).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&(c, a)| c == 0 && a == 0)
    }
}

impl Ord for Signature {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .degree()
            .cmp(&self.degree())
            .then_with(|| {
                for (x, y) in self.0.iter().zip(&other.0) {
                    let o = y.0.cmp(&x.0).then(y.1.cmp(&x.1));
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            })
            .then_with(|| self.0.len().cmp(&other.0.len()))
    }
}

impl PartialOrd for Signature {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderMonomial {
    pub signature: Signature,
    pub coeff: C64,
}

/// A single ladder operator inside an (unordered) operator word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Ladder { mode, dagger: false }
    }
}

/// Coefficient times a product of ladder operators in arbitrary order.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorWord {
    pub coeff: C64,
    pub ops: Vec<Ladder>,
}

/// Normal-ordered polynomial in the ladder operators of a fixed number of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderPolynomial {
    modes: usize,
    terms: BTreeMap<Signature, C64>,
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

// Relative size below which cancellation residue is discarded.
const CANCEL_TOL: f64 = 1e-13;

impl LadderPolynomial {
    pub fn zero(modes: usize) -> Self {
        LadderPolynomial { modes, terms: BTreeMap::new() }
    }

    pub fn identity(modes: usize) -> Self {
        Self::constant(modes, ONE)
    }

    pub fn constant(modes: usize, c: C64) -> Self {
        let mut p = Self::zero(modes);
        p.add_term(Signature::identity(modes), c);
        p
    }

    /// `c · (a_mode†)^cre (a_mode)^ann`.
    pub fn monomial(modes: usize, mode: usize, cre: u32, ann: u32, c: C64) -> Self {
        assert!(mode < modes, "mode {mode} out of range for {modes} modes");
        let mut sig = vec![(0, 0); modes];
        sig[mode] = (cre, ann);
        let mut p = Self::zero(modes);
        p.add_term(Signature(sig), c);
        p
    }

    pub fn from_monomials(modes: usize, monomials: impl IntoIterator<Item = LadderMonomial>) -> Self {
        let mut p = Self::zero(modes);
        for m in monomials {
            assert_eq!(m.signature.modes(), modes);
            p.add_term(m.signature, m.coeff);
        }
        p
    }

    pub fn creation(modes: usize, mode: usize) -> Self {
        Self::monomial(modes, mode, 1, 0, ONE)
    }

    pub fn annihilation(modes: usize, mode: usize) -> Self {
        Self::monomial(modes, mode, 0, 1, ONE)
    }

    pub fn number(modes: usize, mode: usize) -> Self {
        Self::monomial(modes, mode, 1, 1, ONE)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Signature, &C64)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = LadderMonomial> + '_ {
        self.terms.iter().map(|(s, c)| LadderMonomial { signature: s.clone(), coeff: *c })
    }

    pub fn coefficient(&self, sig: &Signature) -> C64 {
        self.terms.get(sig).copied().unwrap_or(ZERO)
    }

    pub fn leading(&self) -> Option<(&Signature, &C64)> {
        self.terms.iter().next()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Signature::degree).max().unwrap_or(0)
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Same operator viewed in a larger mode space (new modes act as identity).
    pub fn embed(&self, modes: usize) -> Self {
        assert!(modes >= self.modes);
        let terms = self
            .terms
            .iter()
            .map(|(s, c)| {
                let mut p = s.0.clone();
                p.resize(modes, (0, 0));
                (Signature(p), *c)
            })
            .collect();
        LadderPolynomial { modes, terms }
    }

    fn add_term(&mut self, sig: Signature, c: C64) {
        if c == ZERO {
            return;
        }
        let v = self.coefficient(&sig) + c;
        if v == ZERO {
            self.terms.remove(&sig);
        } else {
            self.terms.insert(sig, v);
        }
    }

    /// Drops cancellation residue relative to `scale`.
    fn prune(mut self, scale: f64) -> Self {
        let cut = CANCEL_TOL * scale;
        self.terms.retain(|_, c| c.norm() > cut);
        self
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == ZERO {
            return Self::zero(self.modes);
        }
        LadderPolynomial {
            modes: self.modes,
            terms: self.terms.iter().map(|(s, v)| (s.clone(), v * c)).collect(),
        }
    }

    fn check_modes(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.modes != other.modes {
            return Err(AlgebraError::ModeMismatch { left: self.modes, right: other.modes });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_modes(other)?;
        let scale = self.max_coeff().max(other.max_coeff());
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), *c);
        }
        Ok(out.prune(scale))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.try_add(&other.scale(-ONE))
    }

    /// Operator product, returned in normal order.
    pub fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_modes(other)?;
        let mut out = Self::zero(self.modes);
        let mut scale: f64 = 0.0;
        for (s1, c1) in &self.terms {
            for (s2, c2) in &other.terms {
                for (sig, w) in monomial_product(s1, s2) {
                    let c = c1 * c2 * w;
                    scale = scale.max(c.norm());
                    out.add_term(sig, c);
                }
            }
        }
        Ok(out.prune(scale))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::identity(self.modes);
        for _ in 0..n {
            out = out.try_mul(self).expect("same modes");
        }
        out
    }

    /// Hermitian conjugate.
    pub fn dagger(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(s, c)| (Signature(s.0.iter().map(|&(cr, an)| (an, cr)).collect()), c.conj()))
            .collect();
        LadderPolynomial { modes: self.modes, terms }
    }

    /// Largest coefficient difference over the union of signatures.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (s, c) in &self.terms {
            d = d.max((c - other.coefficient(s)).norm());
        }
        for (s, c) in &other.terms {
            if !self.terms.contains_key(s) {
                d = d.max(c.norm());
            }
        }
        d
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.modes == other.modes && self.distance(other) <= tol
    }

    /// Rescales so that the leading coefficient is exactly one.
    pub fn normalized(&self) -> Self {
        match self.leading() {
            Some((_, c)) => {
                let inv = c.inv();
                let lead = self.leading().unwrap().0.clone();
                let mut out = self.scale(inv);
                out.terms.insert(lead, ONE);
                out
            }
            None => self.clone(),
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `(a†^p a^q)(a†^r a^s) = Σ_k C(q,k) C(r,k) k! a†^{p+r−k} a^{q+s−k}` per mode,
/// multiplied out across modes.
fn monomial_product(left: &Signature, right: &Signature) -> Vec<(Signature, f64)> {
    let mut acc: Vec<(Vec<(u32, u32)>, f64)> = vec![(Vec::with_capacity(left.0.len()), 1.0)];
    for (&(p, q), &(r, s)) in left.0.iter().zip(&right.0) {
        let mut next = Vec::with_capacity(acc.len() * (q.min(r) as usize + 1));
        for k in 0..=q.min(r) {
            let w = binomial(q, k) * binomial(r, k) * factorial(k);
            for (sig, c) in &acc {
                let mut sig = sig.clone();
                sig.push((p + r - k, q + s - k));
                next.push((sig, c * w));
            }
        }
        acc = next;
    }
    acc.into_iter().map(|(s, c)| (Signature(s), c)).collect()
}

/// Rewrites operator words of any ordering into a normal-ordered polynomial
/// using `[a, a†] = 1` mode by mode.
pub fn normal_order(modes: usize, words: &[OperatorWord]) -> Result<LadderPolynomial, AlgebraError> {
    let mut out = LadderPolynomial::zero(modes);
    for w in words {
        let mut prod = LadderPolynomial::constant(modes, w.coeff);
        for op in &w.ops {
            if op.mode >= modes {
                return Err(AlgebraError::ModeMismatch { left: modes, right: op.mode + 1 });
            }
            let factor = if op.dagger {
                LadderPolynomial::creation(modes, op.mode)
            } else {
                LadderPolynomial::annihilation(modes, op.mode)
            };
            prod = prod.try_mul(&factor)?;
        }
        out = out.try_add(&prod)?;
    }
    Ok(out)
}

/// `pq − qp`, normal ordered.
pub fn commutator(p: &LadderPolynomial, q: &LadderPolynomial) -> Result<LadderPolynomial, AlgebraError> {
    let pq = p.try_mul(q)?;
    let qp = q.try_mul(p)?;
    let scale = pq.max_coeff().max(qp.max_coeff());
    let mut out = pq;
    for (s, c) in &qp.terms {
        out.add_term(s.clone(), -c);
    }
    Ok(out.prune(scale))
}

impl Add for &LadderPolynomial {
    type Output = LadderPolynomial;
    fn add(self, rhs: Self) -> LadderPolynomial {
        self.try_add(rhs).expect("mode mismatch in polynomial addition")
    }
}

impl Sub for &LadderPolynomial {
    type Output = LadderPolynomial;
    fn sub(self, rhs: Self) -> LadderPolynomial {
        self.try_sub(rhs).expect("mode mismatch in polynomial subtraction")
    }
}

impl Mul for &LadderPolynomial {
    type Output = LadderPolynomial;
    fn mul(self, rhs: Self) -> LadderPolynomial {
        self.try_mul(rhs).expect("mode mismatch in polynomial product")
    }
}

impl Mul<C64> for &LadderPolynomial {
    type Output = LadderPolynomial;
    fn mul(self, rhs: C64) -> LadderPolynomial {
        self.scale(rhs)
    }
}

impl Neg for &LadderPolynomial {
    type Output = LadderPolynomial;
    fn neg(self) -> LadderPolynomial {
        self.scale(-ONE)
    }
}

const MODE_NAMES: &[&str] = &["a", "b", "c", "e", "f", "g", "h"];

pub(crate) fn mode_name(mode: usize) -> String {
    MODE_NAMES.get(mode).map(|s| s.to_string()).unwrap_or_else(|| format!("m{mode}"))
}

fn fmt_real(x: f64) -> String {
    format!("{x}")
}

fn fmt_coeff(c: C64) -> String {
    if c.im == 0.0 {
        fmt_real(c.re)
    } else if c.re == 0.0 {
        format!("{}i", fmt_real(c.im))
    } else if c.im < 0.0 {
        format!("({}-{}i)", fmt_real(c.re), fmt_real(-c.im))
    } else {
        format!("({}+{}i)", fmt_real(c.re), fmt_real(c.im))
    }
}

fn fmt_signature(sig: &Signature) -> String {
    let mut parts = Vec::new();
    for (mode, &(cre, ann)) in sig.0.iter().enumerate() {
        let name = mode_name(mode);
        let push = |parts: &mut Vec<String>, tok: String, pow: u32| match pow {
            0 => {}
            1 => parts.push(tok),
            n => parts.push(format!("{tok}^{n}")),
        };
        push(&mut parts, format!("{name}d"), cre);
        push(&mut parts, name, ann);
    }
    parts.join("*")
}

fn fmt_term(sig: &Signature, c: C64) -> String {
    if sig.is_identity() {
        return if c == ONE { "I".to_string() } else { fmt_coeff(c) };
    }
    let body = fmt_signature(sig);
    if c == ONE {
        body
    } else if c == -ONE {
        format!("-{body}")
    } else {
        format!("{}*{body}", fmt_coeff(c))
    }
}

impl fmt::Display for LadderPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (sig, c)) in self.terms.iter().enumerate() {
            if i == 0 {
                write!(f, "{}", fmt_term(sig, *c))?;
            } else if c.im == 0.0 && c.re < 0.0 {
                write!(f, " - {}", fmt_term(sig, -c))?;
            } else {
                write!(f, " + {}", fmt_term(sig, *c))?;
            }
        }
        Ok(())
    }
}
