//! Truncated Puiseux q-series over exact rationals, plus the number-theoretic
//! series built on top of them: Bernoulli numbers, divisor sums, Eisenstein
//! series, Dedekind eta powers, and fitting against the E4/E6 monomial basis.
//!
//! A series stores coefficients for the exponents `offset + 0, offset + 1, ...`
//! where `offset` is an exact rational (in practice a half-integer or a 24th).
//! The number of stored coefficients is the truncation order: every coefficient
//! strictly below `offset + order` is known, nothing beyond it is.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational from an integer pair. Panics on zero denominator.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact rational from an integer.
pub fn rint(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parse `"p"` or `"p/q"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let mk_err = || Error::InvalidInput(format!("cannot parse rational from {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| mk_err())?;
        let d: BigInt = den.trim().parse().map_err(|_| mk_err())?;
        if d.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| mk_err())?;
        Ok(BigRational::from_integer(n))
    }
}

/// Render a rational as `"p"` or `"p/q"` in lowest terms.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Truncated Puiseux q-series: exact rational coefficients for the exponents
/// `offset + k`, `0 <= k < order`, with `order = coeffs.len()`.
#[derive(Clone, Debug)]
pub struct QSeries {
    offset: BigRational,
    coeffs: Vec<BigRational>,
}

impl QSeries {
    pub fn new(offset: BigRational, coeffs: Vec<BigRational>) -> Self {
        QSeries { offset, coeffs }
    }

    /// The zero series with `order` known (zero) coefficients starting at q^0.
    pub fn zero(order: usize) -> Self {
        QSeries {
            offset: BigRational::zero(),
            coeffs: vec![BigRational::zero(); order],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(BigRational::one(), order)
    }

    pub fn constant(c: BigRational, order: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); order.max(1)];
        coeffs[0] = c;
        QSeries {
            offset: BigRational::zero(),
            coeffs,
        }
    }

    /// c * q^e with `order` known coefficients starting at e.
    pub fn monomial(c: BigRational, exponent: BigRational, order: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); order.max(1)];
        coeffs[0] = c;
        QSeries {
            offset: exponent,
            coeffs,
        }
    }

    pub fn offset(&self) -> &BigRational {
        &self.offset
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient at relative index `k` (exponent `offset + k`).
    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Exclusive bound on the exponents whose coefficients are known.
    pub fn known_bound(&self) -> BigRational {
        &self.offset + rint(self.coeffs.len() as i64)
    }

    /// Coefficient at an absolute exponent. Exponents below the stored window
    /// or off its integer lattice are zero. Reading at or beyond the knowledge
    /// bound also returns zero; use `known_bound` to stay inside it.
    pub fn coeff_at(&self, exponent: &BigRational) -> BigRational {
        let rel = exponent - &self.offset;
        if rel.is_integer() && !rel.is_negative() {
            let k = rel.to_integer();
            if let Some(k) = usize::try_from(&k).ok() {
                return self.coeff(k);
            }
        }
        BigRational::zero()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// First nonzero term as (exponent, coefficient).
    pub fn first_nonzero(&self) -> Option<(BigRational, BigRational)> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|k| (&self.offset + rint(k as i64), self.coeffs[k].clone()))
    }

    /// Drop all coefficients at exponents >= `bound`.
    pub fn truncate_to_bound(&self, bound: &BigRational) -> QSeries {
        if *bound <= self.offset {
            // Everything known about the result is "zero below bound".
            return QSeries {
                offset: bound.clone(),
                coeffs: Vec::new(),
            };
        }
        let keep = (bound - &self.offset).ceil().to_integer();
        let keep = usize::try_from(&keep).unwrap_or(usize::MAX).min(self.coeffs.len());
        QSeries {
            offset: self.offset.clone(),
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    pub fn neg(&self) -> QSeries {
        QSeries {
            offset: self.offset.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> QSeries {
        QSeries {
            offset: self.offset.clone(),
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Multiply by the monomial q^shift.
    pub fn mul_monomial(&self, shift: &BigRational) -> QSeries {
        QSeries {
            offset: &self.offset + shift,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Addition after offset alignment. The result is known strictly below the
    /// smaller of the two knowledge bounds. Fails when the supports live on
    /// incompatible exponent lattices.
    pub fn add(&self, other: &QSeries) -> Result<QSeries> {
        let bound = self.known_bound().min(other.known_bound());
        if self.is_zero() {
            return Ok(other.truncate_to_bound(&bound));
        }
        if other.is_zero() {
            return Ok(self.truncate_to_bound(&bound));
        }
        let delta = &other.offset - &self.offset;
        if !delta.is_integer() {
            return Err(Error::OffsetMismatch(
                format_rational(&self.offset),
                format_rational(&other.offset),
            ));
        }
        let offset = if delta.is_negative() {
            other.offset.clone()
        } else {
            self.offset.clone()
        };
        let len_big = (&bound - &offset).to_integer();
        let len = usize::try_from(&len_big).unwrap_or(0);
        let mut coeffs = vec![BigRational::zero(); len];
        for (src, base) in [(self, &self.offset), (other, &other.offset)] {
            let shift_big = (base - &offset).to_integer();
            let shift = usize::try_from(&shift_big).expect("non-negative shift");
            for (k, c) in src.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let idx = k + shift;
                if idx < len {
                    coeffs[idx] += c;
                }
            }
        }
        Ok(QSeries { offset, coeffs })
    }

    pub fn sub(&self, other: &QSeries) -> Result<QSeries> {
        self.add(&other.neg())
    }

    /// Truncated product; the result carries the smaller of the two orders.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let offset = &self.offset + &other.offset;
        let len = self.coeffs.len().min(other.coeffs.len());
        let mut coeffs = vec![BigRational::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= len {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        QSeries { offset, coeffs }
    }

    /// Multiplicative inverse. Requires a nonzero leading coefficient.
    pub fn inverse(&self) -> Result<QSeries> {
        let lead = self.coeffs.first().cloned().unwrap_or_else(BigRational::zero);
        if lead.is_zero() {
            return Err(Error::NotInvertible);
        }
        let n = self.coeffs.len();
        let lead_inv = BigRational::one() / lead;
        let mut inv = vec![BigRational::zero(); n];
        inv[0] = lead_inv.clone();
        for k in 1..n {
            let mut acc = BigRational::zero();
            for i in 1..=k {
                if !self.coeffs[i].is_zero() {
                    acc += &self.coeffs[i] * &inv[k - i];
                }
            }
            inv[k] = -(&lead_inv * acc);
        }
        Ok(QSeries {
            offset: -&self.offset,
            coeffs: inv,
        })
    }

    /// Integer power by repeated squaring; negative exponents invert first.
    pub fn pow(&self, exponent: i64) -> Result<QSeries> {
        if exponent == 0 {
            return Ok(QSeries::one(self.order()));
        }
        let base = if exponent < 0 {
            self.inverse()?
        } else {
            self.clone()
        };
        let mut e = exponent.unsigned_abs();
        let mut result = QSeries::one(base.order());
        let mut power = base;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&power);
            }
            e >>= 1;
            if e > 0 {
                power = power.mul(&power);
            }
        }
        Ok(result)
    }

    /// Substitute q -> q^m (exponent scaling by a positive integer).
    pub fn substitute_power(&self, m: u32) -> QSeries {
        assert!(m >= 1, "substitution power must be positive");
        if m == 1 {
            return self.clone();
        }
        let m_us = m as usize;
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len().saturating_mul(m_us)];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[k * m_us] = c.clone();
        }
        QSeries {
            offset: &self.offset * rint(m as i64),
            coeffs,
        }
    }

    fn support(&self) -> BTreeMap<BigRational, BigRational> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (&self.offset + rint(k as i64), c.clone()))
            .collect()
    }

    /// Exact agreement of all coefficients at exponents strictly below `bound`.
    /// Both series must know their coefficients that far out.
    pub fn agree_through(&self, other: &QSeries, bound: &BigRational) -> bool {
        self.first_difference(other, bound).is_none()
    }

    /// First exponent below `bound` where the two series differ, with the two
    /// coefficient values.
    pub fn first_difference(
        &self,
        other: &QSeries,
        bound: &BigRational,
    ) -> Option<(BigRational, BigRational, BigRational)> {
        assert!(
            self.known_bound() >= *bound && other.known_bound() >= *bound,
            "comparison window exceeds known coefficients"
        );
        let mut exps: Vec<BigRational> = Vec::new();
        for (e, _) in self.support().into_iter().chain(other.support()) {
            if e < *bound && !exps.contains(&e) {
                exps.push(e);
            }
        }
        exps.sort();
        for e in exps {
            let a = self.coeff_at(&e);
            let b = other.coeff_at(&e);
            if a != b {
                return Some((e, a, b));
            }
        }
        None
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            offset: format_rational(&self.offset),
            coeffs: self.coeffs.iter().map(format_rational).collect(),
            order: self.coeffs.len(),
        }
    }

    pub fn from_json(json: &SeriesJson) -> Result<QSeries> {
        let offset = parse_rational(&json.offset)?;
        let coeffs = json
            .coeffs
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() != json.order {
            return Err(Error::InvalidInput(format!(
                "series order {} does not match {} coefficients",
                json.order,
                coeffs.len()
            )));
        }
        Ok(QSeries { offset, coeffs })
    }
}

/// Equality compares the nonzero supports; the truncation window and any
/// stored zero padding are bookkeeping, not content.
impl PartialEq for QSeries {
    fn eq(&self, other: &Self) -> bool {
        self.support() == other.support()
    }
}

impl Eq for QSeries {}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let support = self.support();
        if support.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in support {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let qpart = match (e.is_zero(), e.is_integer()) {
                (true, _) => String::new(),
                (false, true) if e.is_one() => "q".to_string(),
                (false, true) => format!("q^{}", e.numer()),
                (false, false) => format!("q^({})", format_rational(&e)),
            };
            if qpart.is_empty() {
                write!(f, "{}", format_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{qpart}")?;
            } else {
                write!(f, "{}*{}", format_rational(&abs), qpart)?;
            }
        }
        Ok(())
    }
}

/// Wire form of a series: exact rational strings, no floating point.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SeriesJson {
    pub offset: String,
    pub coeffs: Vec<String>,
    pub order: usize,
}

/// Exact Bernoulli number, convention B1 = -1/2.
pub fn bernoulli(n: usize) -> BigRational {
    let mut table: Vec<BigRational> = Vec::with_capacity(n + 1);
    table.push(BigRational::one());
    for m in 1..=n {
        // sum_{k=0}^{m-1} C(m+1, k) B_k, then B_m = -sum / (m+1)
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one(); // C(m+1, 0)
        for (k, b) in table.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * b;
            // C(m+1, k+1) = C(m+1, k) * (m+1-k) / (k+1)
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        table.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    table.pop().expect("table is non-empty")
}

/// Divisor power sum sigma_k(n) = sum_{d | n} d^k.
pub fn sigma(k: u32, n: u64) -> BigInt {
    assert!(n >= 1, "sigma is defined for n >= 1");
    let mut total = BigInt::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            total += BigInt::from(d).pow(k);
            let other = n / d;
            if other != d {
                total += BigInt::from(other).pow(k);
            }
        }
        d += 1;
    }
    total
}

/// Eisenstein series G_w(q) = -B_w/(2w) + sum_{n>=1} sigma_{w-1}(n) q^n for
/// even weight w >= 2, truncated at `order`.
pub fn eisenstein(weight: u32, order: usize) -> Result<QSeries> {
    if weight < 2 || weight % 2 != 0 {
        return Err(Error::InvalidWeight(weight as i64));
    }
    let mut coeffs = vec![BigRational::zero(); order.max(1)];
    coeffs[0] = -bernoulli(weight as usize) / rint(2 * weight as i64);
    for n in 1..coeffs.len() {
        coeffs[n] = BigRational::from_integer(sigma(weight - 1, n as u64));
    }
    Ok(QSeries::new(BigRational::zero(), coeffs))
}

/// Eisenstein series normalized to constant term 1, e.g. E4 = 240 G4.
pub fn normalized_eisenstein(weight: u32, order: usize) -> Result<QSeries> {
    let g = eisenstein(weight, order)?;
    let c = g.coeff(0);
    Ok(g.scale(&(BigRational::one() / c)))
}

/// The truncated Euler product prod_{n=1..order} (1 - q^n).
pub fn euler_product(order: usize) -> QSeries {
    let mut acc = QSeries::one(order.max(1));
    for n in 1..=order {
        let mut coeffs = vec![BigRational::zero(); order.max(1)];
        coeffs[0] = BigRational::one();
        if n < coeffs.len() {
            coeffs[n] = -BigRational::one();
        }
        acc = acc.mul(&QSeries::new(BigRational::zero(), coeffs));
    }
    acc
}

/// Dedekind eta power: eta(q)^d = q^{d/24} prod_{n>=1} (1-q^n)^d, truncated.
pub fn eta_power(d: i32, order: usize) -> QSeries {
    let euler = euler_product(order);
    let power = euler.pow(d as i64).expect("Euler product has unit leading term");
    power.mul_monomial(&rat(d as i64, 24))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModularCoordinate {
    pub e4_power: u32,
    pub e6_power: u32,
    pub coefficient: String,
}

/// Outcome of expressing a series in the weight-w monomial basis
/// {E4^a E6^b : 4a + 6b = w}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ModularFit {
    Member { coordinates: Vec<ModularCoordinate> },
    NonMember { witness_exponent: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModularFitReport {
    pub weight: u32,
    pub fit: ModularFit,
}

impl ModularFitReport {
    pub fn is_member(&self) -> bool {
        matches!(self.fit, ModularFit::Member { .. })
    }
}

/// Exact coordinates of `s` in the weight-w basis {E4^a E6^b : 4a+6b = w}, or
/// a certified non-membership witness. The q-expansion must overdetermine the
/// basis: strictly more known coefficients than basis monomials.
pub fn modular_fit(s: &QSeries, weight: u32) -> Result<ModularFitReport> {
    // Normalize the window to integer exponents starting at 0.
    let s = if s.is_zero() {
        QSeries::new(BigRational::zero(), vec![BigRational::zero(); s.order().max(1)])
    } else if s.offset().is_integer() && !s.offset().is_negative() {
        let shift = usize::try_from(&s.offset().to_integer()).expect("small offset");
        let mut coeffs = vec![BigRational::zero(); shift];
        coeffs.extend_from_slice(s.coeffs());
        QSeries::new(BigRational::zero(), coeffs)
    } else {
        return Err(Error::InvalidInput(format!(
            "modular fitting needs a q-expansion with nonnegative integer offset, got {}",
            format_rational(s.offset())
        )));
    };

    let mut basis_exponents: Vec<(u32, u32)> = Vec::new();
    for a in (0..=(weight / 4)).rev() {
        let rest = weight - 4 * a;
        if rest % 6 == 0 {
            basis_exponents.push((a, rest / 6));
        }
    }
    let m = basis_exponents.len();
    let n = s.order();
    if n < m + 1 {
        return Err(Error::NeedMoreOrder {
            required: m + 1,
            have: n,
        });
    }

    let mut columns: Vec<QSeries> = Vec::with_capacity(m);
    for &(a, b) in &basis_exponents {
        let e4 = normalized_eisenstein(4, n)?;
        let e6 = normalized_eisenstein(6, n)?;
        columns.push(e4.pow(a as i64)?.mul(&e6.pow(b as i64)?));
    }

    // Exact Gaussian elimination on the n x (m+1) augmented system.
    let mut rows: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = columns.iter().map(|c| c.coeff(i)).collect();
            row.push(s.coeff(i));
            row
        })
        .collect();
    let mut pivot_rows: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for col in 0..m {
        let Some(p) = (r..n).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = BigRational::one() / rows[r][col].clone();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for c2 in col..=m {
                    let delta = &f * &rows[r][c2];
                    rows[i][c2] -= delta;
                }
            }
        }
        pivot_rows.push(col);
        r += 1;
    }
    // Any leftover row with zero basis part but nonzero target certifies
    // non-membership; report the first offending q-power.
    for i in r..n {
        if !rows[i][m].is_zero() {
            // Recover which exponent failed: re-check the candidate solution.
            let mut coords = vec![BigRational::zero(); m];
            for (row_idx, &col) in pivot_rows.iter().enumerate() {
                coords[col] = rows[row_idx][m].clone();
            }
            let witness = (0..n)
                .find(|&k| {
                    let lhs: BigRational = columns
                        .iter()
                        .zip(&coords)
                        .map(|(c, x)| c.coeff(k) * x)
                        .sum();
                    lhs != s.coeff(k)
                })
                .unwrap_or(0);
            return Ok(ModularFitReport {
                weight,
                fit: ModularFit::NonMember {
                    witness_exponent: witness.to_string(),
                },
            });
        }
    }
    let mut coords = vec![BigRational::zero(); m];
    for (row_idx, &col) in pivot_rows.iter().enumerate() {
        coords[col] = rows[row_idx][m].clone();
    }
    let coordinates = basis_exponents
        .iter()
        .zip(&coords)
        .map(|(&(a, b), c)| ModularCoordinate {
            e4_power: a,
            e6_power: b,
            coefficient: format_rational(c),
        })
        .collect();
    Ok(ModularFitReport {
        weight,
        fit: ModularFit::Member { coordinates },
    })
}
