//! Exact arithmetic kernels: residues mod p^N, arbitrary-precision rationals
//! and elements of cyclotomic fields on the power basis.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational numbers. Always kept reduced by `num_rational`.
pub type ExactRational = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("denominator divisible by p")]
    DenominatorDivisible,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cyclotomic modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
}

/// p-adic valuation of a residue. A stored zero only certifies divisibility
/// up to the precision it carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Exact(u32),
    /// The value is 0 mod p^N; the true valuation is at least N.
    AtLeastN(u32),
}

/// An element of ℤ/p^N for an odd prime p, tagged with (p, N).
///
/// p^N must fit well below 2^63 so that products can be accumulated in u128.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    p: u64,
    prec: u32,
}

pub fn pow_u64(base: u64, exp: u32) -> u64 {
    let mut r: u64 = 1;
    for _ in 0..exp {
        r = r.checked_mul(base).expect("modulus overflow");
    }
    r
}

fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Extended gcd; returns (g, x) with x·a ≡ g (mod m).
fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u64)
}

impl Residue {
    pub fn new(value: i128, p: u64, prec: u32) -> Residue {
        assert!(is_odd_prime(p), "p must be an odd prime, got {p}");
        assert!(prec >= 1, "precision must be at least 1");
        let m = pow_u64(p, prec);
        assert!(m < (1u64 << 62), "p^N too large for u64 backing");
        Residue {
            value: value.rem_euclid(m as i128) as u64,
            p,
            prec,
        }
    }

    pub fn zero(p: u64, prec: u32) -> Residue {
        Residue::new(0, p, prec)
    }

    pub fn one(p: u64, prec: u32) -> Residue {
        Residue::new(1, p, prec)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn modulus(&self) -> u64 {
        pow_u64(self.p, self.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Reduce to a (possibly lower) precision.
    pub fn truncate(&self, prec: u32) -> Residue {
        assert!(prec >= 1 && prec <= self.prec);
        Residue::new(self.value as i128, self.p, prec)
    }

    /// Reinterpret at higher precision using the stored representative.
    /// The extra digits are a choice of lift, not certified information.
    pub fn lift(&self, prec: u32) -> Residue {
        assert!(prec >= self.prec);
        Residue::new(self.value as i128, self.p, prec)
    }

    fn joint(&self, other: &Residue) -> (u64, u32) {
        assert_eq!(self.p, other.p, "residues over different primes");
        let prec = self.prec.min(other.prec);
        (pow_u64(self.p, prec), prec)
    }

    pub fn add(&self, other: &Residue) -> Residue {
        let (m, prec) = self.joint(other);
        Residue {
            value: (self.value % m + other.value % m) % m,
            p: self.p,
            prec,
        }
    }

    pub fn sub(&self, other: &Residue) -> Residue {
        let (m, prec) = self.joint(other);
        Residue {
            value: (self.value % m + m - other.value % m) % m,
            p: self.p,
            prec,
        }
    }

    pub fn neg(&self) -> Residue {
        let m = self.modulus();
        Residue {
            value: (m - self.value) % m,
            p: self.p,
            prec: self.prec,
        }
    }

    pub fn mul(&self, other: &Residue) -> Residue {
        let (m, prec) = self.joint(other);
        let v = (self.value as u128 % m as u128) * (other.value as u128 % m as u128) % m as u128;
        Residue {
            value: v as u64,
            p: self.p,
            prec,
        }
    }

    pub fn mul_u64(&self, k: u64) -> Residue {
        let m = self.modulus();
        let v = (self.value as u128) * (k as u128 % m as u128) % m as u128;
        Residue {
            value: v as u64,
            p: self.p,
            prec: self.prec,
        }
    }

    pub fn pow(&self, mut e: u64) -> Residue {
        let mut base = *self;
        let mut acc = Residue::one(self.p, self.prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_unit(&self) -> bool {
        self.value % self.p != 0
    }

    pub fn inv(&self) -> Option<Residue> {
        inv_mod(self.value, self.modulus()).map(|v| Residue {
            value: v,
            p: self.p,
            prec: self.prec,
        })
    }

    pub fn valuation(&self) -> Valuation {
        if self.value == 0 {
            return Valuation::AtLeastN(self.prec);
        }
        let mut v = 0;
        let mut x = self.value;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        Valuation::Exact(v)
    }

    /// Exact division by p^k; None if the value is not divisible. The result
    /// lives at precision prec − k, which is all the input determines.
    pub fn div_exact_pk(&self, k: u32) -> Option<Residue> {
        if k == 0 {
            return Some(*self);
        }
        assert!(k < self.prec, "dividing away all precision");
        let pk = pow_u64(self.p, k);
        if self.value % pk != 0 {
            return None;
        }
        Some(Residue {
            value: (self.value / pk) % pow_u64(self.p, self.prec - k),
            p: self.p,
            prec: self.prec - k,
        })
    }

    /// The Teichmüller representative of this residue's class mod p:
    /// the unique c with c^p = c and c ≡ self (mod p).
    pub fn teichmuller(&self) -> Residue {
        let mut c = *self;
        for _ in 0..self.prec {
            c = c.pow(self.p);
        }
        c
    }
}

/// Reduce a p-integral rational into ℤ/p^N.
pub fn reduce_mod_pn(q: &ExactRational, p: u64, prec: u32) -> Result<Residue, ExactError> {
    let m = BigInt::from(pow_u64(p, prec));
    let den = q.denom().mod_floor(&m);
    if (q.denom() % BigInt::from(p)).is_zero() {
        return Err(ExactError::DenominatorDivisible);
    }
    let num = q.numer().mod_floor(&m);
    let den_u = u64::try_from(&den).expect("reduced denominator fits u64");
    let num_u = u64::try_from(&num).expect("reduced numerator fits u64");
    let inv = inv_mod(den_u, pow_u64(p, prec)).ok_or(ExactError::DenominatorDivisible)?;
    Ok(Residue::new((num_u as i128) * (inv as i128), p, prec))
}

/// p-adic valuation of an exact rational (negative for p in the denominator).
/// Returns None for 0.
pub fn rational_valuation(q: &ExactRational, p: u64) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v: i64 = 0;
    let mut n = q.numer().abs();
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    let mut d = q.denom().clone();
    while (&d % &p).is_zero() {
        d /= &p;
        v -= 1;
    }
    Some(v)
}

// ---------------------------------------------------------------------------
// Cyclotomic fields ℚ(ζ_m) on the power basis.
// ---------------------------------------------------------------------------

fn poly_trim(c: &mut Vec<ExactRational>) {
    while c.last().map_or(false, |x| x.is_zero()) {
        c.pop();
    }
}

fn poly_mul(a: &[ExactRational], b: &[ExactRational]) -> Vec<ExactRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![ExactRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    poly_trim(&mut out);
    out
}

/// Polynomial division with remainder over ℚ; returns (quotient, remainder).
fn poly_divmod(a: &[ExactRational], b: &[ExactRational]) -> (Vec<ExactRational>, Vec<ExactRational>) {
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut rem: Vec<ExactRational> = a.to_vec();
    poly_trim(&mut rem);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if rem.len() <= db {
        return (vec![], rem);
    }
    let mut quot = vec![ExactRational::zero(); rem.len() - db];
    while rem.len() > db {
        let dr = rem.len() - 1;
        let c = &rem[dr] / &lead;
        quot[dr - db] = c.clone();
        for k in 0..=db {
            let t = &c * &b[k];
            rem[dr - db + k] -= t;
        }
        poly_trim(&mut rem);
        if rem.is_empty() {
            break;
        }
    }
    poly_trim(&mut quot);
    (quot, rem)
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

pub fn euler_phi(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            while m % d == 0 {
                m /= d;
            }
            result -= result / d;
        }
        d += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// The m-th cyclotomic polynomial, by recursive division of x^m − 1.
pub fn cyclotomic_poly(m: u64) -> Vec<ExactRational> {
    assert!(m >= 1);
    let mut num = vec![ExactRational::zero(); m as usize + 1];
    num[0] = -ExactRational::one();
    num[m as usize] = ExactRational::one();
    let mut acc = num;
    for d in divisors(m) {
        if d == m {
            continue;
        }
        let phi_d = cyclotomic_poly(d);
        let (q, r) = poly_divmod(&acc, &phi_d);
        assert!(r.is_empty(), "cyclotomic division must be exact");
        acc = q;
    }
    acc
}

/// An element of ℚ(ζ_m) with coordinates on the power basis 1, ζ, …, ζ^{φ(m)−1}.
/// Arithmetic reduces modulo the m-th cyclotomic polynomial, so coordinates
/// are a unique normal form and equality is coordinatewise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycloRational {
    m: u64,
    coords: Vec<ExactRational>,
}

impl CycloRational {
    pub fn zero(m: u64) -> CycloRational {
        CycloRational {
            m,
            coords: vec![ExactRational::zero(); euler_phi(m) as usize],
        }
    }

    pub fn from_rational(m: u64, q: ExactRational) -> CycloRational {
        let mut z = CycloRational::zero(m);
        z.coords[0] = q;
        z
    }

    pub fn one(m: u64) -> CycloRational {
        CycloRational::from_rational(m, ExactRational::one())
    }

    /// ζ_m^k.
    pub fn root_of_unity(m: u64, k: i64) -> CycloRational {
        let kk = k.rem_euclid(m as i64) as usize;
        let mut poly = vec![ExactRational::zero(); kk + 1];
        poly[kk] = ExactRational::one();
        CycloRational::from_poly(m, poly)
    }

    fn from_poly(m: u64, poly: Vec<ExactRational>) -> CycloRational {
        let phi = cyclotomic_poly(m);
        let (_, r) = poly_divmod(&poly, &phi);
        let mut coords = r;
        coords.resize(euler_phi(m) as usize, ExactRational::zero());
        CycloRational { m, coords }
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn coords(&self) -> &[ExactRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// If all non-constant coordinates vanish, the rational value.
    pub fn as_rational(&self) -> Option<ExactRational> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    /// Map into ℚ(ζ_n) for m | n via ζ_m ↦ ζ_n^{n/m}.
    pub fn embed(&self, n: u64) -> CycloRational {
        assert!(n % self.m == 0, "no embedding ℚ(ζ_{}) → ℚ(ζ_{})", self.m, n);
        let step = (n / self.m) as usize;
        let mut poly = vec![ExactRational::zero(); self.coords.len() * step + 1];
        for (i, c) in self.coords.iter().enumerate() {
            poly[i * step] = c.clone();
        }
        CycloRational::from_poly(n, poly)
    }

    pub fn add(&self, other: &CycloRational) -> Result<CycloRational, ExactError> {
        if self.m != other.m {
            return Err(ExactError::ModulusMismatch(self.m, other.m));
        }
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CycloRational { m: self.m, coords })
    }

    pub fn sub(&self, other: &CycloRational) -> Result<CycloRational, ExactError> {
        if self.m != other.m {
            return Err(ExactError::ModulusMismatch(self.m, other.m));
        }
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CycloRational { m: self.m, coords })
    }

    pub fn mul(&self, other: &CycloRational) -> Result<CycloRational, ExactError> {
        if self.m != other.m {
            return Err(ExactError::ModulusMismatch(self.m, other.m));
        }
        Ok(CycloRational::from_poly(
            self.m,
            poly_mul(&self.coords, &other.coords),
        ))
    }

    pub fn scale(&self, q: &ExactRational) -> CycloRational {
        CycloRational {
            m: self.m,
            coords: self.coords.iter().map(|c| c * q).collect(),
        }
    }

    /// Field inverse via the extended euclidean algorithm against Φ_m.
    pub fn inv(&self) -> Result<CycloRational, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let phi = cyclotomic_poly(self.m);
        let mut a = self.coords.clone();
        poly_trim(&mut a);
        // Bezout: u·a + v·Φ = gcd; Φ_m irreducible over ℚ so gcd is a unit.
        let (mut r0, mut r1) = (phi, a);
        let (mut s0, mut s1): (Vec<ExactRational>, Vec<ExactRational>) =
            (vec![], vec![ExactRational::one()]);
        while !r1.is_empty() {
            let (q, r) = poly_divmod(&r0, &r1);
            let qs1 = poly_mul(&q, &s1);
            let mut s_next = s0.clone();
            s_next.resize(s_next.len().max(qs1.len()), ExactRational::zero());
            for (i, c) in qs1.iter().enumerate() {
                s_next[i] -= c;
            }
            poly_trim(&mut s_next);
            (r0, r1) = (r1, r);
            (s0, s1) = (s1, s_next);
        }
        // r0 = gcd (a nonzero constant), s0·a ≡ r0 (mod Φ).
        assert_eq!(r0.len(), 1, "cyclotomic polynomial must be coprime to a nonzero element");
        let c = ExactRational::one() / r0[0].clone();
        let inv = s0.iter().map(|x| x * &c).collect();
        Ok(CycloRational::from_poly(self.m, inv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn rat(n: i64, d: i64) -> ExactRational {
        ExactRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn reduce_zero() {
        let r = reduce_mod_pn(&ExactRational::zero(), 3, 2).unwrap();
        assert_eq!(r.value(), 0);
    }

    #[test]
    fn reduce_one_third_mod_25() {
        // extended-gcd inverse of 3 mod 25
        let r = reduce_mod_pn(&rat(1, 3), 5, 2).unwrap();
        assert_eq!(r.value(), 17);
    }

    #[test]
    fn reduce_one_twelfth_mod_5() {
        let r = reduce_mod_pn(&rat(1, 12), 5, 1).unwrap();
        assert_eq!(r.value(), 3);
    }

    #[test]
    fn reduce_p_in_denominator_fails() {
        assert_eq!(
            reduce_mod_pn(&rat(1, 15), 5, 2),
            Err(ExactError::DenominatorDivisible)
        );
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(Residue::new(0, 3, 3).valuation(), Valuation::AtLeastN(3));
        assert_eq!(Residue::new(18, 3, 3).valuation(), Valuation::Exact(2));
        assert_eq!(Residue::new(7, 3, 3).valuation(), Valuation::Exact(0));
    }

    #[test]
    fn valuation_additive_under_product() {
        let xs = [1i128, 3, 6, 7, 9, 12, 21];
        for &a in &xs {
            for &b in &xs {
                let x = Residue::new(a, 3, 4);
                let y = Residue::new(b, 3, 4);
                let (Valuation::Exact(va), Valuation::Exact(vb)) = (x.valuation(), y.valuation())
                else {
                    continue;
                };
                if va + vb < 4 {
                    assert_eq!(x.mul(&y).valuation(), Valuation::Exact(va + vb));
                }
            }
        }
    }

    #[test]
    fn reduce_is_ring_homomorphism() {
        let samples: Vec<ExactRational> = (0..40)
            .map(|i| rat(7 * i - 100, [1, 2, 3, 4, 6, 7, 8, 9][(i % 8) as usize]))
            .collect();
        for a in &samples {
            for b in &samples {
                let ra = reduce_mod_pn(a, 5, 3).unwrap();
                let rb = reduce_mod_pn(b, 5, 3).unwrap();
                assert_eq!(reduce_mod_pn(&(a + b), 5, 3).unwrap(), ra.add(&rb));
                assert_eq!(reduce_mod_pn(&(a * b), 5, 3).unwrap(), ra.mul(&rb));
            }
        }
    }

    #[test]
    fn teichmuller_fixed_points() {
        for a in 1..7u64 {
            let c = Residue::new(a as i128, 7, 4).teichmuller();
            assert_eq!(c.pow(7), c);
            assert_eq!(c.value() % 7, a);
        }
    }

    #[test]
    fn cyclo_zeta4_squares_to_minus_one() {
        let z = CycloRational::root_of_unity(4, 1);
        let m1 = CycloRational::from_rational(4, -ExactRational::one());
        assert_eq!(z.mul(&z).unwrap(), m1);
    }

    #[test]
    fn cyclo_vanishing_sum_m3() {
        let one = CycloRational::one(3);
        let z = CycloRational::root_of_unity(3, 1);
        let z2 = CycloRational::root_of_unity(3, 2);
        let s = one.add(&z).unwrap().add(&z2).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn cyclo_inverse_of_one_minus_zeta3() {
        let one = CycloRational::one(3);
        let z = CycloRational::root_of_unity(3, 1);
        let x = one.sub(&z).unwrap();
        let inv = x.inv().unwrap();
        // (1 − ζ²)/3 = (2 + ζ)/3 on the power basis
        assert_eq!(inv.coords()[0], rat(2, 3));
        assert_eq!(inv.coords()[1], rat(1, 3));
        assert_eq!(x.mul(&inv).unwrap(), CycloRational::one(3));
    }

    #[test]
    fn cyclo_inverse_roundtrip_all_small_m() {
        for m in 1..=20u64 {
            for seed in 0..5u64 {
                let mut x = CycloRational::zero(m);
                let phi = euler_phi(m) as usize;
                for i in 0..phi {
                    let c = ((seed + 1) * (i as u64 + 2) * 7919) % 11;
                    x.coords[i] = ExactRational::from_u64(c).unwrap() - rat(5, 1);
                }
                if x.is_zero() {
                    continue;
                }
                let prod = x.mul(&x.inv().unwrap()).unwrap();
                assert_eq!(prod, CycloRational::one(m), "m={m} seed={seed}");
            }
        }
    }

    #[test]
    fn mixed_precision_truncates_to_min() {
        let a = Residue::new(17, 3, 4);
        let b = Residue::new(5, 3, 2);
        let s = a.add(&b);
        assert_eq!(s.prec(), 2);
        assert_eq!(s.value(), (17 + 5) % 9);
    }
}
