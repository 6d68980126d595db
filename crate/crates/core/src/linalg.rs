//! Linear algebra over ℤ/p^M and ℤ: Howell forms for canonical row spaces,
//! membership with witnesses, and Smith normal form for integer lattices.
//!
//! ℤ/p^M is not a field, so ordinary row reduction does not give canonical
//! row spaces; the Howell form does. Pivots are normalised to powers of p.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exactnum::pow_u64;

fn val_p(mut x: u64, p: u64) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn inv_unit(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1, "not a unit");
    s0.rem_euclid(m as i128) as u64
}

/// Canonical Howell form of a row space in (ℤ/p^M)^cols, with the transform
/// expressing each Howell row as a combination of the original generators.
#[derive(Debug, Clone)]
pub struct HowellForm {
    pub p: u64,
    pub prec: u32,
    pub cols: usize,
    /// Rows sorted by strictly increasing pivot column.
    pub rows: Vec<Vec<u64>>,
    /// (pivot column, pivot valuation v); the pivot entry is p^v.
    pub pivots: Vec<(usize, u32)>,
    /// transform[r] has one coefficient per original generator.
    pub transform: Vec<Vec<u64>>,
}

impl HowellForm {
    /// Number of Howell basis rows (the rank in the ℤ/p^M sense).
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn max_pivot_valuation(&self) -> u32 {
        self.pivots.iter().map(|&(_, v)| v).max().unwrap_or(0)
    }

    /// Reduce a vector against the form. Returns the residual and the
    /// coefficient used against each Howell row.
    pub fn reduce(&self, v: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let m = pow_u64(self.p, self.prec);
        let mut res: Vec<u64> = v.iter().map(|x| x % m).collect();
        let mut coeffs = vec![0u64; self.rows.len()];
        for (r, &(c, val)) in self.pivots.iter().enumerate() {
            let e = res[c];
            if e == 0 {
                continue;
            }
            let pv = pow_u64(self.p, val);
            if e % pv != 0 {
                // leading part not reducible; divide off what we can
                let q = e / pv;
                if q == 0 {
                    continue;
                }
                coeffs[r] = q;
                row_sub_scaled(&mut res, &self.rows[r], q, m);
                continue;
            }
            let q = e / pv;
            coeffs[r] = q;
            row_sub_scaled(&mut res, &self.rows[r], q, m);
        }
        (res, coeffs)
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).0.iter().all(|&x| x == 0)
    }

    /// Membership with a witness in terms of the original generators.
    pub fn express(&self, v: &[u64]) -> Option<Vec<u64>> {
        let (res, coeffs) = self.reduce(v);
        if res.iter().any(|&x| x != 0) {
            return None;
        }
        let m = pow_u64(self.p, self.prec);
        let gens = self.transform.first().map_or(0, |t| t.len());
        let mut witness = vec![0u64; gens];
        for (r, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (w, t) in witness.iter_mut().zip(&self.transform[r]) {
                *w = (*w + (c as u128 * *t as u128 % m as u128) as u64) % m;
            }
        }
        Some(witness)
    }

    /// Equality of row spaces, decided by mutual containment.
    pub fn same_space(&self, other: &HowellForm) -> bool {
        self.rows.iter().all(|r| other.contains(r))
            && other.rows.iter().all(|r| self.contains(r))
    }
}

fn row_sub_scaled(target: &mut [u64], row: &[u64], q: u64, m: u64) {
    for (t, r) in target.iter_mut().zip(row) {
        let s = (q as u128 * *r as u128) % m as u128;
        *t = ((*t as u128 + m as u128 - s) % m as u128) as u64;
    }
}

/// Compute the Howell form of the span of `gens` in (ℤ/p^prec)^cols.
pub fn howell_form(gens: &[Vec<u64>], cols: usize, p: u64, prec: u32) -> HowellForm {
    let m = pow_u64(p, prec);
    let ngens = gens.len();
    // work rows carry their transform coefficients appended
    let mut work: Vec<(Vec<u64>, Vec<u64>)> = gens
        .iter()
        .enumerate()
        .map(|(i, g)| {
            assert_eq!(g.len(), cols);
            let mut t = vec![0u64; ngens];
            t[i] = 1;
            (g.iter().map(|x| x % m).collect(), t)
        })
        .collect();

    let mut result_rows: Vec<(Vec<u64>, Vec<u64>, usize, u32)> = Vec::new();

    loop {
        // echelon pass over the worklist plus existing rows
        let mut all: Vec<(Vec<u64>, Vec<u64>)> = result_rows
            .iter()
            .map(|(r, t, _, _)| (r.clone(), t.clone()))
            .collect();
        all.append(&mut work);
        result_rows.clear();

        let mut r = 0;
        for c in 0..cols {
            // find the row at or below r with minimal valuation in column c
            let mut best: Option<(usize, u32)> = None;
            for (i, row) in all.iter().enumerate().skip(r) {
                let v = val_p(row.0[c], p);
                if v < prec && best.map_or(true, |(_, bv)| v < bv) {
                    best = Some((i, v));
                }
            }
            let Some((bi, bv)) = best else { continue };
            all.swap(r, bi);
            // normalise pivot to p^bv
            let unit = all[r].0[c] / pow_u64(p, bv);
            let uinv = inv_unit(unit % m, m);
            scale_row(&mut all[r], uinv, m);
            // eliminate the column everywhere else
            let pivot_row = all[r].clone();
            let pv = pow_u64(p, bv);
            for (i, row) in all.iter_mut().enumerate() {
                if i == r || row.0[c] == 0 {
                    continue;
                }
                let e = row.0[c];
                let q = if i > r {
                    debug_assert!(e % pv == 0);
                    (e / pv) % m
                } else {
                    e / pv // reduce mod p^bv above the pivot
                };
                if q == 0 {
                    continue;
                }
                row_sub_scaled(&mut row.0, &pivot_row.0, q, m);
                row_sub_scaled(&mut row.1, &pivot_row.1, q, m);
            }
            result_rows.push((all[r].0.clone(), all[r].1.clone(), c, bv));
            r += 1;
        }

        // Howell condition: shadows p^{M−v}·row must lie in the span of rows
        // with later pivots. Collect the ones that do not reduce to zero.
        let mut new_work: Vec<(Vec<u64>, Vec<u64>)> = Vec::new();
        for (row, t, _, v) in &result_rows {
            if *v == 0 {
                continue;
            }
            let s = pow_u64(p, prec - v);
            let mut shadow: Vec<u64> = row.iter().map(|x| (*x as u128 * s as u128 % m as u128) as u64).collect();
            let mut shadow_t: Vec<u64> = t.iter().map(|x| (*x as u128 * s as u128 % m as u128) as u64).collect();
            // reduce against current rows
            for (rrow, rt, c, rv) in &result_rows {
                let e = shadow[*c];
                if e == 0 {
                    continue;
                }
                let pv = pow_u64(p, *rv);
                if e % pv != 0 {
                    continue;
                }
                let q = e / pv;
                row_sub_scaled(&mut shadow, rrow, q, m);
                row_sub_scaled(&mut shadow_t, rt, q, m);
            }
            if shadow.iter().any(|&x| x != 0) {
                new_work.push((shadow, shadow_t));
            }
        }
        if new_work.is_empty() {
            break;
        }
        work = new_work;
    }

    HowellForm {
        p,
        prec,
        cols,
        rows: result_rows.iter().map(|(r, _, _, _)| r.clone()).collect(),
        pivots: result_rows.iter().map(|(_, _, c, v)| (*c, *v)).collect(),
        transform: result_rows.iter().map(|(_, t, _, _)| t.clone()).collect(),
    }
}

fn scale_row(row: &mut (Vec<u64>, Vec<u64>), k: u64, m: u64) {
    for x in row.0.iter_mut().chain(row.1.iter_mut()) {
        *x = (*x as u128 * k as u128 % m as u128) as u64;
    }
}

// ---------------------------------------------------------------------------
// Integer Smith normal form (BigInt; matrices here are small).
// ---------------------------------------------------------------------------

pub type IMat = Vec<Vec<BigInt>>;

pub fn imat_zero(rows: usize, cols: usize) -> IMat {
    vec![vec![BigInt::zero(); cols]; rows]
}

pub fn imat_identity(n: usize) -> IMat {
    let mut m = imat_zero(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigInt::one();
    }
    m
}

pub fn imat_mul(a: &IMat, b: &IMat) -> IMat {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    let mut out = imat_zero(r, c);
    for i in 0..r {
        for t in 0..k {
            if a[i][t].is_zero() {
                continue;
            }
            for j in 0..c {
                let prod = &a[i][t] * &b[t][j];
                out[i][j] += prod;
            }
        }
    }
    out
}

/// Smith normal form with transforms: returns (u, d, v) with u·m·v = d,
/// u and v unimodular, d diagonal with d[i] | d[i+1].
pub fn smith_normal_form(m: &IMat) -> (IMat, IMat, IMat) {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut d = m.clone();
    let mut u = imat_identity(rows);
    let mut v = imat_identity(cols);

    fn row_op(d: &mut IMat, u: &mut IMat, target: usize, source: usize, q: &BigInt) {
        // row_target -= q·row_source
        if q.is_zero() {
            return;
        }
        for j in 0..d[0].len() {
            let s = q * &d[source][j];
            d[target][j] -= s;
        }
        for j in 0..u[0].len() {
            let s = q * &u[source][j];
            u[target][j] -= s;
        }
    }
    fn col_op(d: &mut IMat, v: &mut IMat, target: usize, source: usize, q: &BigInt) {
        // col_target -= q·col_source
        if q.is_zero() {
            return;
        }
        for row in d.iter_mut() {
            let s = q * &row[source];
            row[target] -= s;
        }
        for row in v.iter_mut() {
            let s = q * &row[source];
            row[target] -= s;
        }
    }

    let n = rows.min(cols);
    for t in 0..n {
        'outer: loop {
            // move a nonzero entry of minimal absolute value to (t,t)
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if d[i][j].is_zero() {
                        continue;
                    }
                    if best.map_or(true, |(bi, bj): (usize, usize)| {
                        d[i][j].abs() < d[bi][bj].abs()
                    }) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            if bi != t {
                d.swap(t, bi);
                u.swap(t, bi);
            }
            if bj != t {
                for row in d.iter_mut() {
                    row.swap(t, bj);
                }
                for row in v.iter_mut() {
                    row.swap(t, bj);
                }
            }
            // reduce column and row against the pivot
            let mut again = false;
            for i in t + 1..rows {
                if d[i][t].is_zero() {
                    continue;
                }
                let q = d[i][t].div_floor(&d[t][t]);
                row_op(&mut d, &mut u, i, t, &q);
                if !d[i][t].is_zero() {
                    again = true;
                }
            }
            for j in t + 1..cols {
                if d[t][j].is_zero() {
                    continue;
                }
                let q = d[t][j].div_floor(&d[t][t]);
                col_op(&mut d, &mut v, j, t, &q);
                if !d[t][j].is_zero() {
                    again = true;
                }
            }
            if again {
                continue;
            }
            // pivot must divide every remaining entry
            for i in t + 1..rows {
                for j in t + 1..cols {
                    if !(&d[i][j] % &d[t][t]).is_zero() {
                        // fold row i into row t and restart this pivot
                        let one = BigInt::from(-1);
                        row_op(&mut d, &mut u, t, i, &one);
                        continue 'outer;
                    }
                }
            }
            break;
        }
        if d[t][t].is_negative() {
            for j in 0..cols {
                d[t][j] = -d[t][j].clone();
            }
            for j in 0..rows {
                u[t][j] = -u[t][j].clone();
            }
        }
    }
    (u, d, v)
}

/// Basis of the integer kernel {x : m·x = 0} (saturated lattice in ℤ^cols).
pub fn integer_kernel(m: &IMat) -> Vec<Vec<BigInt>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    if rows == 0 {
        return (0..cols)
            .map(|i| {
                let mut v = vec![BigInt::zero(); cols];
                v[i] = BigInt::one();
                v
            })
            .collect();
    }
    let (_, d, v) = smith_normal_form(m);
    let n = rows.min(cols);
    let mut basis = Vec::new();
    for j in 0..cols {
        let dj = if j < n { d[j][j].clone() } else { BigInt::zero() };
        if dj.is_zero() {
            basis.push((0..cols).map(|i| v[i][j].clone()).collect());
        }
    }
    basis
}

/// Solve m·x ≡ b (mod modulus) over the integers, if possible.
pub fn solve_mod(m: &IMat, b: &[BigInt], modulus: &BigInt) -> Option<Vec<BigInt>> {
    // append modulus·e_i columns and solve exactly with SNF
    let rows = m.len();
    let cols = m[0].len();
    let mut ext = imat_zero(rows, cols + rows);
    for i in 0..rows {
        for j in 0..cols {
            ext[i][j] = m[i][j].clone();
        }
        ext[i][cols + i] = modulus.clone();
    }
    let (u, d, v) = smith_normal_form(&ext);
    // solve d·y = u·b, then x = v·y
    let ub: Vec<BigInt> = (0..rows)
        .map(|i| {
            (0..rows)
                .map(|j| &u[i][j] * &b[j])
                .fold(BigInt::zero(), |a, x| a + x)
        })
        .collect();
    let n = rows.min(cols + rows);
    let mut y = vec![BigInt::zero(); cols + rows];
    for i in 0..rows {
        if i < n && !d[i][i].is_zero() {
            let (q, r) = ub[i].div_rem(&d[i][i]);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !ub[i].is_zero() {
            return None;
        }
    }
    let x: Vec<BigInt> = (0..cols)
        .map(|i| {
            (0..cols + rows)
                .map(|j| &v[i][j] * &y[j])
                .fold(BigInt::zero(), |a, x| a + x)
        })
        .collect();
    Some(x)
}

/// Invert a unimodular integer matrix.
pub fn imat_inverse_unimodular(m: &IMat) -> IMat {
    let n = m.len();
    // Gauss-Jordan over rationals; entries must come out integral.
    use num_rational::BigRational;
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|row| row.iter().map(|x| BigRational::from(x.clone())).collect())
        .collect();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for c in 0..n {
        let pr = (c..n).find(|&r| !a[r][c].is_zero()).expect("singular matrix");
        a.swap(c, pr);
        inv.swap(c, pr);
        let piv = a[c][c].clone();
        for j in 0..n {
            a[c][j] /= &piv;
            inv[c][j] /= &piv;
        }
        for r in 0..n {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone();
            for j in 0..n {
                let s = &f * &a[c][j];
                a[r][j] -= s;
                let s = &f * &inv[c][j];
                inv[r][j] -= s;
            }
        }
    }
    inv.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| {
                    assert!(x.is_integer(), "matrix not unimodular");
                    x.to_integer()
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn howell_detects_scaled_membership() {
        // span{(3,0)} in (ℤ/9)²: contains (3,0), (6,0), not (1,0)
        let h = howell_form(&[vec![3, 0]], 2, 3, 2);
        assert!(h.contains(&[3, 0]));
        assert!(h.contains(&[6, 0]));
        assert!(!h.contains(&[1, 0]));
        assert_eq!(h.rank(), 1);
    }

    #[test]
    fn howell_shadow_rows() {
        // span{(1,1)·3 + (0,3)} style: gens (3,3),(0,9)=0 mod 9 → shadows matter:
        // span{(1,3)} over ℤ/9: shadow 3·(1,3) = (3,0) must be representable.
        let h = howell_form(&[vec![1, 3]], 2, 3, 2);
        assert!(h.contains(&[3, 0]));
        assert!(h.contains(&[1, 3]));
        assert!(!h.contains(&[0, 1]));
    }

    #[test]
    fn howell_express_witness() {
        let gens = vec![vec![1, 2, 0], vec![0, 3, 3]];
        let h = howell_form(&gens, 3, 3, 2);
        let target = vec![2, 7, 3];
        let w = h.express(&target).unwrap();
        // recombine
        let m = 9u64;
        let mut acc = vec![0u64; 3];
        for (c, g) in w.iter().zip(&gens) {
            for (a, x) in acc.iter_mut().zip(g) {
                *a = (*a + c * x) % m;
            }
        }
        assert_eq!(acc, vec![2, 7, 3]);
    }

    #[test]
    fn howell_canonical_equality() {
        let h1 = howell_form(&[vec![1, 2], vec![0, 3]], 2, 3, 2);
        let h2 = howell_form(&[vec![1, 5], vec![0, 6], vec![1, 2]], 2, 3, 2);
        assert!(h1.same_space(&h2));
        let h3 = howell_form(&[vec![1, 2]], 2, 3, 2);
        assert!(!h1.same_space(&h3));
    }

    #[test]
    fn smith_form_diagonalises() {
        let m: IMat = vec![
            vec![BigInt::from(2), BigInt::from(4), BigInt::from(4)],
            vec![BigInt::from(-6), BigInt::from(6), BigInt::from(12)],
            vec![BigInt::from(10), BigInt::from(4), BigInt::from(16)],
        ];
        let (u, d, v) = smith_normal_form(&m);
        let umv = imat_mul(&imat_mul(&u, &m), &v);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(umv[i][j].is_zero());
                }
            }
        }
        for i in 0..3 {
            assert_eq!(umv[i][i], d[i][i]);
        }
    }

    #[test]
    fn integer_kernel_is_correct() {
        // kernel of (1 2 3) is rank 2
        let m: IMat = vec![vec![BigInt::from(1), BigInt::from(2), BigInt::from(3)]];
        let k = integer_kernel(&m);
        assert_eq!(k.len(), 2);
        for v in &k {
            let s = &v[0] + &v[1] * BigInt::from(2) + &v[2] * BigInt::from(3);
            assert!(s.is_zero());
        }
    }

    #[test]
    fn solve_mod_finds_solutions() {
        let m: IMat = vec![
            vec![BigInt::from(3), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1)],
        ];
        let b = vec![BigInt::from(6), BigInt::from(5)];
        let x = solve_mod(&m, &b, &BigInt::from(27)).unwrap();
        let r0 = (&m[0][0] * &x[0] + &m[0][1] * &x[1] - &b[0]) % BigInt::from(27);
        let r1 = (&m[1][0] * &x[0] + &m[1][1] * &x[1] - &b[1]) % BigInt::from(27);
        assert!(r0.is_zero() && r1.is_zero());
        assert!(solve_mod(&m, &[BigInt::from(1), BigInt::zero()], &BigInt::from(27)).is_none());
    }

    #[test]
    fn unimodular_inverse() {
        let m: IMat = vec![
            vec![BigInt::from(1), BigInt::from(2)],
            vec![BigInt::from(1), BigInt::from(3)],
        ];
        let inv = imat_inverse_unimodular(&m);
        let prod = imat_mul(&m, &inv);
        assert_eq!(prod, imat_identity(2));
    }
}
