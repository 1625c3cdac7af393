//! Chern-root calculus over formal manifolds.
//!
//! Cohomology is never modeled as a ring with relations. A manifold is a
//! dimension, a list of formal degree-2 root symbols for its complexified
//! tangent bundle, and a table pairing top-degree Pontryagin monomials with
//! exact rational characteristic numbers. Classes are truncated polynomials in
//! the roots with q-series coefficients; integration reads the top-degree part
//! through the table.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::series::{format_rational, rint, QSeries};

/// A root symbol with a sign, or the zero root of a trivial line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignedRoot {
    Zero,
    Plus(usize),
    Minus(usize),
}

impl SignedRoot {
    fn linear_term(&self) -> Option<(usize, i64)> {
        match self {
            SignedRoot::Zero => None,
            SignedRoot::Plus(i) => Some((*i, 1)),
            SignedRoot::Minus(i) => Some((*i, -1)),
        }
    }
}

/// Truncated polynomial in nilpotent degree-2 root variables with q-series
/// coefficients. Monomials above `degree_cap` (cohomological degree) are
/// dropped eagerly; all coefficients share one truncation order.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSeries {
    vars: Arc<Vec<String>>,
    degree_cap: u32,
    q_order: usize,
    terms: BTreeMap<Vec<u16>, QSeries>,
}

impl RootSeries {
    pub fn one(vars: Arc<Vec<String>>, degree_cap: u32, q_order: usize) -> Self {
        Self::constant(vars, degree_cap, q_order, QSeries::one(q_order))
    }

    pub fn constant(
        vars: Arc<Vec<String>>,
        degree_cap: u32,
        q_order: usize,
        c: QSeries,
    ) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0u16; vars.len()], c);
        }
        RootSeries {
            vars,
            degree_cap,
            q_order,
            terms,
        }
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn q_order(&self) -> usize {
        self.q_order
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u16>, QSeries> {
        &self.terms
    }

    fn degree_of(exps: &[u16]) -> u32 {
        2 * exps.iter().map(|&e| e as u32).sum::<u32>()
    }

    fn insert_term(&mut self, exps: Vec<u16>, c: QSeries) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(&c).expect("aligned coefficient offsets");
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &RootSeries) -> RootSeries {
        assert_eq!(self.vars, other.vars, "root series must share variables");
        let mut out = self.clone();
        out.q_order = self.q_order.min(other.q_order);
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale_series(&self, s: &QSeries) -> RootSeries {
        let mut out = RootSeries {
            vars: self.vars.clone(),
            degree_cap: self.degree_cap,
            q_order: self.q_order.min(s.order()),
            terms: BTreeMap::new(),
        };
        for (e, c) in &self.terms {
            out.insert_term(e.clone(), c.mul(s));
        }
        out
    }

    pub fn mul(&self, other: &RootSeries) -> RootSeries {
        assert_eq!(self.vars, other.vars, "root series must share variables");
        let cap = self.degree_cap.min(other.degree_cap);
        let mut out = RootSeries {
            vars: self.vars.clone(),
            degree_cap: cap,
            q_order: self.q_order.min(other.q_order),
            terms: BTreeMap::new(),
        };
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u16> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                if Self::degree_of(&exps) > cap {
                    continue;
                }
                out.insert_term(exps, ca.mul(cb));
            }
        }
        out
    }

    /// e^{sum of c_i x_i} for a rational linear form, truncated by the cap.
    pub fn exp_linear(
        vars: Arc<Vec<String>>,
        degree_cap: u32,
        q_order: usize,
        linear: &[(usize, BigRational)],
    ) -> RootSeries {
        let mut acc = RootSeries::one(vars.clone(), degree_cap, q_order);
        for (var, coeff) in linear {
            if coeff.is_zero() {
                continue;
            }
            let mut factor = RootSeries {
                vars: vars.clone(),
                degree_cap,
                q_order,
                terms: BTreeMap::new(),
            };
            let mut power = BigRational::one();
            let mut factorial = BigRational::one();
            let max_exp = (degree_cap / 2) as usize;
            for k in 0..=max_exp {
                if k > 0 {
                    power *= coeff;
                    factorial *= rint(k as i64);
                }
                let mut exps = vec![0u16; vars.len()];
                exps[*var] = k as u16;
                factor.insert_term(
                    exps,
                    QSeries::constant(&power / &factorial, q_order),
                );
            }
            acc = acc.mul(&factor);
        }
        acc
    }

    /// The part of the series in a single cohomological degree.
    pub fn degree_part(&self, degree: u32) -> BTreeMap<Vec<u16>, QSeries> {
        self.terms
            .iter()
            .filter(|(e, _)| Self::degree_of(e) == degree)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect()
    }
}

/// Formal manifold: even dimension, tangent Chern roots, characteristic-number
/// pairing table on top-degree Pontryagin monomials, and the spin / p1 = 0
/// input flags.
#[derive(Clone, Debug)]
pub struct ManifoldData {
    dim: u32,
    tangent_roots: Arc<Vec<String>>,
    /// Exponent vectors over p_1..p_l; each key satisfies sum 4*i*e_i = dim.
    pairings: BTreeMap<Vec<u32>, BigRational>,
    spin: bool,
    p1_zero: bool,
}

impl ManifoldData {
    pub fn new(
        dim: u32,
        tangent_roots: Option<Vec<String>>,
        pairings: BTreeMap<Vec<u32>, BigRational>,
        spin: bool,
        p1_zero: bool,
    ) -> Result<Self> {
        if dim % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "manifold dimension must be even, got {dim}"
            )));
        }
        let l = (dim / 2) as usize;
        let roots = match tangent_roots {
            Some(r) => {
                if r.len() != l {
                    return Err(Error::InvalidInput(format!(
                        "expected {l} tangent roots for dimension {dim}, got {}",
                        r.len()
                    )));
                }
                r
            }
            None => (1..=l).map(|i| format!("x{i}")).collect(),
        };
        for (key, value) in &pairings {
            if key.len() != l {
                return Err(Error::InvalidPairing(format!(
                    "exponent vector {key:?} must list all {l} Pontryagin generators"
                )));
            }
            let degree: u32 = key
                .iter()
                .enumerate()
                .map(|(i, e)| 4 * (i as u32 + 1) * e)
                .sum();
            if degree != dim {
                return Err(Error::InvalidPairing(format!(
                    "monomial {} has degree {degree}, expected top degree {dim}",
                    p_monomial_name(key)
                )));
            }
            if p1_zero && key.first().copied().unwrap_or(0) > 0 && !value.is_zero() {
                return Err(Error::InvalidPairing(format!(
                    "p1_zero manifold cannot pair {} with {}",
                    p_monomial_name(key),
                    format_rational(value)
                )));
            }
        }
        Ok(ManifoldData {
            dim,
            tangent_roots: Arc::new(roots),
            pairings,
            spin,
            p1_zero,
        })
    }

    pub fn point() -> Self {
        ManifoldData::new(0, None, BTreeMap::new(), true, true).expect("point data is valid")
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn root_count(&self) -> usize {
        self.tangent_roots.len()
    }

    pub fn tangent_roots(&self) -> &Arc<Vec<String>> {
        &self.tangent_roots
    }

    pub fn spin(&self) -> bool {
        self.spin
    }

    pub fn p1_zero(&self) -> bool {
        self.p1_zero
    }

    pub fn pairings(&self) -> &BTreeMap<Vec<u32>, BigRational> {
        &self.pairings
    }

    /// Roots of the complexified tangent bundle: the pairs +-x_i.
    pub fn signed_tangent_roots(&self) -> Vec<SignedRoot> {
        let mut out = Vec::with_capacity(2 * self.root_count());
        for i in 0..self.root_count() {
            out.push(SignedRoot::Plus(i));
            out.push(SignedRoot::Minus(i));
        }
        out
    }
}

/// Display name of a Pontryagin exponent vector, e.g. "p1^2*p2".
pub fn p_monomial_name(exps: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in exps.iter().enumerate() {
        if e == 1 {
            parts.push(format!("p{}", i + 1));
        } else if e > 1 {
            parts.push(format!("p{}^{}", i + 1, e));
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// Parse "p1^2*p2" into an exponent vector over p_1..p_l.
pub fn parse_p_monomial(s: &str, l: usize) -> Result<Vec<u32>> {
    let mut exps = vec![0u32; l];
    let s = s.trim();
    if s == "1" {
        return Ok(exps);
    }
    for factor in s.split('*') {
        let factor = factor.trim();
        let (base, exp) = match factor.split_once('^') {
            Some((b, e)) => {
                let e: u32 = e.trim().parse().map_err(|_| {
                    Error::InvalidPairing(format!("bad exponent in {factor:?}"))
                })?;
                (b.trim(), e)
            }
            None => (factor, 1),
        };
        let idx: usize = base
            .strip_prefix('p')
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::InvalidPairing(format!("bad Pontryagin factor {factor:?}")))?;
        if idx == 0 || idx > l {
            return Err(Error::InvalidPairing(format!(
                "p{idx} is out of range for {l} tangent roots"
            )));
        }
        exps[idx - 1] += exp;
    }
    Ok(exps)
}

/// Coefficients of (x/2)/sinh(x/2) as a series in u = x^2, through u^max_u.
fn ahat_factor_coeffs(max_u: usize) -> Vec<BigRational> {
    // sinh(x/2)/(x/2) = sum_j u^j / (4^j (2j+1)!), then invert.
    let mut s = Vec::with_capacity(max_u + 1);
    let mut four_pow = BigRational::one();
    let mut fact = BigRational::one(); // (2j+1)! running
    for j in 0..=max_u {
        if j > 0 {
            four_pow *= rint(4);
            fact *= rint(2 * j as i64) * rint(2 * j as i64 + 1);
        }
        s.push(BigRational::one() / (&four_pow * &fact));
    }
    let mut inv = vec![BigRational::zero(); max_u + 1];
    inv[0] = BigRational::one();
    for k in 1..=max_u {
        let mut acc = BigRational::zero();
        for i in 1..=k {
            acc += &s[i] * &inv[k - i];
        }
        inv[k] = -acc;
    }
    inv
}

/// The multiplicative A-hat class of the tangent bundle, expanded in the
/// manifold's root variables up to its dimension.
pub fn ahat_class(m: &ManifoldData, q_order: usize) -> RootSeries {
    ahat_class_in(m, m.tangent_roots().clone(), q_order)
}

/// A-hat class expanded inside an ambient variable universe whose first
/// `m.root_count()` variables are the manifold's tangent roots.
pub fn ahat_class_in(m: &ManifoldData, vars: Arc<Vec<String>>, q_order: usize) -> RootSeries {
    let cap = m.dim();
    let max_u = (cap / 4) as usize;
    let factor = ahat_factor_coeffs(max_u);
    let mut acc = RootSeries::one(vars.clone(), cap, q_order);
    for i in 0..m.root_count() {
        let mut f = RootSeries::constant(vars.clone(), cap, q_order, QSeries::one(q_order));
        for (j, c) in factor.iter().enumerate().skip(1) {
            let mut exps = vec![0u16; vars.len()];
            exps[i] = (2 * j) as u16;
            if RootSeries::degree_of(&exps) > cap {
                break;
            }
            f.insert_term(exps, QSeries::constant(c.clone(), q_order));
        }
        acc = acc.mul(&f);
    }
    acc
}

/// Chern character of a bundle given by signed roots: sum of e^{y_j}.
pub fn chern_character(
    vars: Arc<Vec<String>>,
    degree_cap: u32,
    q_order: usize,
    roots: &[SignedRoot],
) -> RootSeries {
    let mut acc = RootSeries {
        vars: vars.clone(),
        degree_cap,
        q_order,
        terms: BTreeMap::new(),
    };
    for r in roots {
        let linear: Vec<(usize, BigRational)> = r
            .linear_term()
            .map(|(i, s)| vec![(i, rint(s))])
            .unwrap_or_default();
        let e = RootSeries::exp_linear(vars.clone(), degree_cap, q_order, &linear);
        acc = acc.add(&e);
    }
    acc
}

/// Chern character of the symmetric-power series S_{q^w}(E):
/// prod_j (1 - q^w e^{y_j})^{-1}, truncated jointly in q and root degree.
pub fn ch_sym(
    vars: Arc<Vec<String>>,
    degree_cap: u32,
    q_order: usize,
    weight: i64,
    roots: &[SignedRoot],
) -> Result<RootSeries> {
    if weight <= 0 {
        return Err(Error::NonPositiveWeight(weight));
    }
    let w = weight as usize;
    let mut acc = RootSeries::one(vars.clone(), degree_cap, q_order);
    for r in roots {
        // 1/(1 - q^w e^y) = sum_m q^{wm} e^{my}
        let mut factor = RootSeries {
            vars: vars.clone(),
            degree_cap,
            q_order,
            terms: BTreeMap::new(),
        };
        let mut m = 0usize;
        while m * w < q_order.max(1) {
            let linear: Vec<(usize, BigRational)> = r
                .linear_term()
                .map(|(i, s)| vec![(i, rint(s * m as i64))])
                .unwrap_or_default();
            let e = RootSeries::exp_linear(vars.clone(), degree_cap, q_order, &linear);
            let qmono = QSeries::monomial(BigRational::one(), rint((m * w) as i64), q_order);
            // Re-window the monomial so additions align at offset 0.
            let qmono = QSeries::zero(q_order).add(&qmono).expect("integer offsets");
            factor = factor.add(&e.scale_series(&qmono));
            m += 1;
        }
        acc = acc.mul(&factor);
    }
    Ok(acc)
}

/// Chern character of the exterior-power series: prod_j (1 + t e^{y_j}) for a
/// signed q-monomial t.
pub fn ch_wedge(
    vars: Arc<Vec<String>>,
    degree_cap: u32,
    q_order: usize,
    t: &QSeries,
    roots: &[SignedRoot],
) -> RootSeries {
    let mut acc = RootSeries::one(vars.clone(), degree_cap, q_order);
    for r in roots {
        let linear: Vec<(usize, BigRational)> = r
            .linear_term()
            .map(|(i, s)| vec![(i, rint(s))])
            .unwrap_or_default();
        let e = RootSeries::exp_linear(vars.clone(), degree_cap, q_order, &linear);
        let factor = RootSeries::one(vars.clone(), degree_cap, q_order).add(&e.scale_series(t));
        acc = acc.mul(&factor);
    }
    acc
}

/// Chern character of the square-root determinant line: e^{(sum y_j)/2}.
pub fn sqrt_det_ch(
    vars: Arc<Vec<String>>,
    degree_cap: u32,
    q_order: usize,
    roots: &[SignedRoot],
) -> RootSeries {
    let mut linear: BTreeMap<usize, BigRational> = BTreeMap::new();
    for r in roots {
        if let Some((i, s)) = r.linear_term() {
            *linear.entry(i).or_insert_with(BigRational::zero) += rint(s) / rint(2);
        }
    }
    let linear: Vec<(usize, BigRational)> = linear.into_iter().collect();
    RootSeries::exp_linear(vars, degree_cap, q_order, &linear)
}

/// Pair the top-degree part of a class against the manifold's characteristic
/// numbers. Lower-degree parts are discarded; the top part must be symmetric
/// in the tangent roots and even in each.
pub fn integrate(m: &ManifoldData, c: &RootSeries) -> Result<QSeries> {
    let q_order = c.q_order();
    if m.dim() == 0 {
        let exps = vec![0u16; c.vars().len()];
        return Ok(c
            .terms()
            .get(&exps)
            .cloned()
            .unwrap_or_else(|| QSeries::zero(q_order)));
    }
    let top = c.degree_part(m.dim());
    if top.is_empty() {
        return Ok(QSeries::zero(q_order));
    }

    // Map ambient variables onto tangent positions; any other variable must
    // not appear in the top part.
    let mut position: Vec<Option<usize>> = Vec::with_capacity(c.vars().len());
    for name in c.vars().iter() {
        position.push(m.tangent_roots().iter().position(|t| t == name));
    }
    let l = m.root_count();
    let mut upoly: BTreeMap<Vec<u16>, QSeries> = BTreeMap::new();
    for (exps, coeff) in top {
        let mut uexp = vec![0u16; l];
        for (var, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            match position[var] {
                Some(p) => {
                    if e % 2 != 0 {
                        return Err(Error::NotACharacteristicClass(format!(
                            "odd exponent {e} of root {} in the top-degree part",
                            c.vars()[var]
                        )));
                    }
                    uexp[p] = e / 2;
                }
                None => {
                    return Err(Error::NotACharacteristicClass(format!(
                        "root {} is not a tangent root of the integrating manifold",
                        c.vars()[var]
                    )));
                }
            }
        }
        match upoly.entry(uexp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(&coeff)?;
                *o.get_mut() = sum;
            }
        }
    }
    upoly.retain(|_, v| !v.is_zero());

    let epoly = symmetric_to_elementary(upoly, l)?;
    let mut total = QSeries::zero(q_order);
    for (emono, coeff) in epoly {
        if coeff.is_zero() {
            continue;
        }
        let key: Vec<u32> = emono.iter().map(|&e| e as u32).collect();
        let value = m
            .pairings()
            .get(&key)
            .ok_or_else(|| Error::MissingPairing(p_monomial_name(&key)))?;
        total = total.add(&coeff.scale(value))?;
    }
    Ok(total)
}

/// Rewrite a symmetric polynomial in u_1..u_l (with q-series coefficients) in
/// the elementary symmetric basis by leading-term subtraction. The basis is
/// triangular for the lexicographic order, so the rewriting is unique.
fn symmetric_to_elementary(
    mut upoly: BTreeMap<Vec<u16>, QSeries>,
    l: usize,
) -> Result<BTreeMap<Vec<u16>, QSeries>> {
    let mut out: BTreeMap<Vec<u16>, QSeries> = BTreeMap::new();
    while let Some((lead, coeff)) = upoly.iter().next_back().map(|(k, v)| (k.clone(), v.clone())) {
        upoly.remove(&lead);
        if coeff.is_zero() {
            continue;
        }
        if !lead.windows(2).all(|w| w[0] >= w[1]) {
            return Err(Error::NotACharacteristicClass(format!(
                "top-degree part is not symmetric in the tangent roots (leading exponents {lead:?})"
            )));
        }
        // e_1^{a1-a2} e_2^{a2-a3} ... e_l^{al}
        let mut emono = vec![0u16; l];
        for i in 0..l {
            let next = if i + 1 < l { lead[i + 1] } else { 0 };
            emono[i] = lead[i] - next;
        }
        match out.entry(emono.clone()) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().add(&coeff)?;
                *o.get_mut() = sum;
            }
        }
        // Subtract coeff * expansion(e-monomial) from the running polynomial.
        let expansion = expand_elementary_monomial(&emono, l);
        for (uexp, mult) in expansion {
            let delta = coeff.scale(&BigRational::from_integer(BigInt::from(-mult)));
            match upoly.entry(uexp) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    if !delta.is_zero() {
                        v.insert(delta);
                    }
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    let sum = o.get().add(&delta)?;
                    if sum.is_zero() {
                        o.remove();
                    } else {
                        *o.get_mut() = sum;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Expand e_1^{c1} ... e_l^{cl} as a map from u-exponent vectors to integer
/// multiplicities.
fn expand_elementary_monomial(emono: &[u16], l: usize) -> BTreeMap<Vec<u16>, i64> {
    let mut acc: BTreeMap<Vec<u16>, i64> = BTreeMap::new();
    acc.insert(vec![0u16; l], 1);
    for (i, &power) in emono.iter().enumerate() {
        let subsets = k_subsets(l, i + 1);
        for _ in 0..power {
            let mut next: BTreeMap<Vec<u16>, i64> = BTreeMap::new();
            for (exp, mult) in &acc {
                for subset in &subsets {
                    let mut e = exp.clone();
                    for &j in subset {
                        e[j] += 1;
                    }
                    *next.entry(e).or_insert(0) += mult;
                }
            }
            acc = next;
        }
    }
    acc
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    fn k3() -> ManifoldData {
        let mut pairings = BTreeMap::new();
        pairings.insert(vec![1, 0], rint(-48));
        ManifoldData::new(4, None, pairings, true, false).unwrap()
    }

    fn quaternionic_plane() -> ManifoldData {
        // Pairing table {p1^2 -> 4, p2 -> 7}; its A-hat integral vanishes.
        let mut pairings = BTreeMap::new();
        pairings.insert(vec![2, 0, 0, 0], rint(4));
        pairings.insert(vec![0, 1, 0, 0], rint(7));
        ManifoldData::new(8, None, pairings, true, false).unwrap()
    }

    #[test]
    fn ahat_point_is_one() {
        let m = ManifoldData::point();
        let a = ahat_class(&m, 3);
        assert_eq!(a.terms().len(), 1);
        assert_eq!(a.terms().values().next().unwrap(), &QSeries::one(3));
        assert_eq!(integrate(&m, &a).unwrap(), QSeries::one(3));
    }

    #[test]
    fn ahat_dim4_has_minus_p1_over_24() {
        let m = k3();
        let a = ahat_class(&m, 2);
        // Degree-4 part: -(x1^2 + x2^2)/24.
        let part = a.degree_part(4);
        assert_eq!(part.len(), 2);
        assert_eq!(
            part.get(&vec![2u16, 0]).unwrap(),
            &QSeries::constant(rat(-1, 24), 2)
        );
        assert_eq!(
            part.get(&vec![0u16, 2]).unwrap(),
            &QSeries::constant(rat(-1, 24), 2)
        );
        assert_eq!(integrate(&m, &a).unwrap(), QSeries::constant(rint(2), 2));
    }

    #[test]
    fn ahat_dim8_integral_vanishes_on_hp2_table() {
        let m = quaternionic_plane();
        let a = ahat_class(&m, 2);
        // (7 p1^2 - 4 p2)/5760 paired with {4, 7} cancels exactly.
        assert!(integrate(&m, &a).unwrap().is_zero());
    }

    #[test]
    fn ahat_dim8_pontryagin_coefficients() {
        // Frozen from the expansion of prod (x_i/2)/sinh(x_i/2): the degree-8
        // part is (7 p1^2 - 4 p2)/5760, checked through the pairing table
        // {p1^2 -> 1, p2 -> 0} and {p1^2 -> 0, p2 -> 1}.
        let mut t1 = BTreeMap::new();
        t1.insert(vec![2, 0, 0, 0], rint(1));
        t1.insert(vec![0, 1, 0, 0], rint(0));
        let m1 = ManifoldData::new(8, None, t1, false, false).unwrap();
        assert_eq!(
            integrate(&m1, &ahat_class(&m1, 1)).unwrap(),
            QSeries::constant(rat(7, 5760), 1)
        );
        let mut t2 = BTreeMap::new();
        t2.insert(vec![2, 0, 0, 0], rint(0));
        t2.insert(vec![0, 1, 0, 0], rint(1));
        let m2 = ManifoldData::new(8, None, t2, false, false).unwrap();
        assert_eq!(
            integrate(&m2, &ahat_class(&m2, 1)).unwrap(),
            QSeries::constant(rat(-4, 5760), 1)
        );
    }

    #[test]
    fn chern_character_of_trivial_bundle_is_rank() {
        let m = k3();
        let vars = m.tangent_roots().clone();
        let ch = chern_character(vars, 4, 2, &[SignedRoot::Zero, SignedRoot::Zero, SignedRoot::Zero]);
        let c0 = ch.terms().get(&vec![0u16, 0]).unwrap();
        assert_eq!(c0, &QSeries::constant(rint(3), 2));
        assert_eq!(ch.terms().len(), 1);
    }

    #[test]
    fn chern_character_of_tangent_bundle_dim4() {
        // ch(TM_C) truncated at degree 4 equals 4 + p1.
        let m = k3();
        let vars = m.tangent_roots().clone();
        let ch = chern_character(vars, 4, 2, &m.signed_tangent_roots());
        assert_eq!(
            ch.terms().get(&vec![0u16, 0]).unwrap(),
            &QSeries::constant(rint(4), 2)
        );
        assert_eq!(
            ch.terms().get(&vec![2u16, 0]).unwrap(),
            &QSeries::constant(rint(1), 2)
        );
        assert_eq!(
            ch.terms().get(&vec![0u16, 2]).unwrap(),
            &QSeries::constant(rint(1), 2)
        );
        // Odd-degree parts cancel between +x and -x.
        assert!(ch.terms().get(&vec![1u16, 0]).is_none());
        // Paired with {p1 -> -48}: integral is -48.
        assert_eq!(
            integrate(&m, &ch).unwrap(),
            QSeries::constant(rint(-48), 2)
        );
    }

    #[test]
    fn single_root_exponential() {
        let vars = Arc::new(vec!["x".to_string()]);
        let ch = chern_character(vars, 4, 1, &[SignedRoot::Plus(0)]);
        assert_eq!(ch.terms().get(&vec![0u16]).unwrap(), &QSeries::one(1));
        assert_eq!(ch.terms().get(&vec![1u16]).unwrap(), &QSeries::one(1));
        assert_eq!(
            ch.terms().get(&vec![2u16]).unwrap(),
            &QSeries::constant(rat(1, 2), 1)
        );
    }

    #[test]
    fn ch_sym_of_trivial_line_is_geometric() {
        let vars: Arc<Vec<String>> = Arc::new(vec![]);
        let s = ch_sym(vars, 0, 5, 1, &[SignedRoot::Zero]).unwrap();
        let c = s.terms().get(&vec![]).unwrap();
        assert_eq!(c, &QSeries::new(rint(0), vec![rint(1), rint(1), rint(1), rint(1), rint(1)]));
    }

    #[test]
    fn ch_sym_rank2_weight2_is_squared_geometric() {
        let vars: Arc<Vec<String>> = Arc::new(vec![]);
        let s = ch_sym(vars, 0, 7, 2, &[SignedRoot::Zero, SignedRoot::Zero]).unwrap();
        let c = s.terms().get(&vec![]).unwrap().clone();
        // 1/(1-q^2)^2 = 1 + 2q^2 + 3q^4 + 4q^6 + ...
        let expected = QSeries::new(
            rint(0),
            vec![rint(1), rint(0), rint(2), rint(0), rint(3), rint(0), rint(4)],
        );
        assert_eq!(c, expected);
    }

    /// Oracle: multiplying ch(S_q(L)) by (1 - q e^x) must give exactly 1 at
    /// every joint truncation.
    #[test]
    fn ch_sym_times_defining_factor_is_one() {
        let vars = Arc::new(vec!["x".to_string()]);
        for cap in [0u32, 2, 4, 6] {
            for q_order in [1usize, 2, 4, 6] {
                let s = ch_sym(vars.clone(), cap, q_order, 1, &[SignedRoot::Plus(0)]).unwrap();
                let q = QSeries::zero(q_order)
                    .add(&QSeries::monomial(rint(1), rint(1), q_order))
                    .unwrap();
                let e = RootSeries::exp_linear(vars.clone(), cap, q_order, &[(0, rint(1))]);
                let factor = RootSeries::one(vars.clone(), cap, q_order)
                    .add(&e.scale_series(&q.neg()));
                let product = s.mul(&factor);
                let one = RootSeries::one(vars.clone(), cap, q_order);
                assert_eq!(product, one, "cap {cap}, order {q_order}");
            }
        }
    }

    #[test]
    fn ch_sym_degree_coefficients_from_oracle() {
        // 1/(1 - q e^x) = sum_m q^m e^{mx}: the x^2/2-weighted coefficient of
        // q^m is m^2, so with cap 2 and q-order 3 the x^2 coefficient reads
        // [0, 1/2, 2].
        let vars = Arc::new(vec!["x".to_string()]);
        let s = ch_sym(vars, 2, 3, 1, &[SignedRoot::Plus(0)]).unwrap();
        assert_eq!(
            s.terms().get(&vec![1u16]).unwrap(),
            &QSeries::new(rint(0), vec![rint(0), rint(1), rint(2)])
        );
        assert_eq!(
            s.terms().get(&vec![2u16]).unwrap(),
            &QSeries::new(rint(0), vec![rint(0), rat(1, 2), rint(2)])
        );
    }

    #[test]
    fn ch_sym_rejects_nonpositive_weight() {
        let vars: Arc<Vec<String>> = Arc::new(vec![]);
        assert!(matches!(
            ch_sym(vars, 0, 3, 0, &[SignedRoot::Zero]),
            Err(Error::NonPositiveWeight(0))
        ));
    }

    #[test]
    fn ch_wedge_values() {
        let vars = Arc::new(vec!["x".to_string()]);
        // t = -1 kills the degree-0 term of (1 + t e^x).
        let t = QSeries::constant(rint(-1), 3);
        let w = ch_wedge(vars.clone(), 4, 3, &t, &[SignedRoot::Plus(0)]);
        assert!(w.terms().get(&vec![0u16]).is_none());
        // t = +1 on trivial rank n gives 2^n.
        let t = QSeries::one(3);
        let w = ch_wedge(
            vars.clone(),
            4,
            3,
            &t,
            &[SignedRoot::Zero, SignedRoot::Zero, SignedRoot::Zero],
        );
        assert_eq!(
            w.terms().get(&vec![0u16]).unwrap(),
            &QSeries::constant(rint(8), 3)
        );
        // t = -q on a zero root gives 1 - q.
        let t = QSeries::zero(3)
            .add(&QSeries::monomial(rint(-1), rint(1), 3))
            .unwrap();
        let w = ch_wedge(vars, 4, 3, &t, &[SignedRoot::Zero]);
        assert_eq!(
            w.terms().get(&vec![0u16]).unwrap(),
            &QSeries::new(rint(0), vec![rint(1), rint(-1), rint(0)])
        );
    }

    #[test]
    fn sqrt_det_values() {
        let vars = Arc::new(vec!["x".to_string()]);
        let s = sqrt_det_ch(vars.clone(), 4, 1, &[]);
        assert_eq!(s.terms().get(&vec![0u16]).unwrap(), &QSeries::one(1));
        let s = sqrt_det_ch(vars.clone(), 4, 1, &[SignedRoot::Plus(0)]);
        assert_eq!(
            s.terms().get(&vec![1u16]).unwrap(),
            &QSeries::constant(rat(1, 2), 1)
        );
        assert_eq!(
            s.terms().get(&vec![2u16]).unwrap(),
            &QSeries::constant(rat(1, 8), 1)
        );
        let s = sqrt_det_ch(vars, 4, 1, &[SignedRoot::Plus(0), SignedRoot::Minus(0)]);
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.terms().get(&vec![0u16]).unwrap(), &QSeries::one(1));
    }

    #[test]
    fn integrate_constant_on_positive_dim_is_zero() {
        let m = k3();
        let one = RootSeries::one(m.tangent_roots().clone(), 4, 2);
        assert!(integrate(&m, &one).unwrap().is_zero());
    }

    #[test]
    fn integrate_rejects_odd_classes() {
        let m = k3();
        let vars = m.tangent_roots().clone();
        // x1^3 x2 is symmetric-breaking and odd; x1 x2 (cubed exponents) etc.
        let odd = chern_character(vars.clone(), 4, 1, &[SignedRoot::Plus(0)]);
        // e^{x1} has x1^2 at top degree... construct x1^1 * x2^1 explicitly:
        let mut bad = RootSeries::one(vars, 4, 1);
        bad.insert_term(vec![1, 1], QSeries::one(1));
        assert!(matches!(
            integrate(&m, &bad),
            Err(Error::NotACharacteristicClass(_))
        ));
        // e^{x1} alone has odd lower terms but even top part x1^2/2; its
        // integral needs the p1 pairing and is legal.
        assert_eq!(
            integrate(&m, &odd).unwrap(),
            QSeries::constant(rint(-24), 1)
        );
    }

    #[test]
    fn integrate_reports_missing_pairings() {
        let m = ManifoldData::new(4, None, BTreeMap::new(), false, false).unwrap();
        let a = ahat_class(&m, 1);
        assert_eq!(
            integrate(&m, &a).unwrap_err(),
            Error::MissingPairing("p1".to_string())
        );
    }

    #[test]
    fn integrate_is_linear_over_series_coefficients() {
        let m = k3();
        let a = ahat_class(&m, 3);
        let s = QSeries::new(rint(0), vec![rint(2), rint(-1), rat(1, 3)]);
        let lhs = integrate(&m, &a.scale_series(&s)).unwrap();
        let rhs = integrate(&m, &a).unwrap().mul(&s);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn product_manifold_ahat_is_multiplicative() {
        // K3 x K3: pairings {p1^2 -> 4608, p2 -> 2304} from the product
        // splitting; the A-hat integral must be 2 * 2 = 4.
        let mut pairings = BTreeMap::new();
        pairings.insert(vec![2, 0, 0, 0], rint(4608));
        pairings.insert(vec![0, 1, 0, 0], rint(2304));
        let m = ManifoldData::new(8, None, pairings, true, false).unwrap();
        let a = ahat_class(&m, 1);
        assert_eq!(integrate(&m, &a).unwrap(), QSeries::constant(rint(4), 1));
    }

    #[test]
    fn p1_zero_flag_rejects_inconsistent_tables() {
        let mut pairings = BTreeMap::new();
        pairings.insert(vec![2, 0, 0, 0], rint(5));
        pairings.insert(vec![0, 1, 0, 0], rint(7));
        assert!(matches!(
            ManifoldData::new(8, None, pairings, false, true),
            Err(Error::InvalidPairing(_))
        ));
        let mut pairings = BTreeMap::new();
        pairings.insert(vec![2, 0, 0, 0], rint(0));
        pairings.insert(vec![0, 1, 0, 0], rint(7));
        assert!(ManifoldData::new(8, None, pairings, false, true).is_ok());
    }

    #[test]
    fn monomial_name_round_trip() {
        for s in ["p1", "p1^2", "p1*p2", "p2^3*p4", "1"] {
            let exps = parse_p_monomial(s, 4).unwrap();
            assert_eq!(p_monomial_name(&exps), s);
        }
        assert!(parse_p_monomial("p5", 4).is_err(), "p5 out of range");
        assert!(parse_p_monomial("q1", 4).is_err());
    }
}
