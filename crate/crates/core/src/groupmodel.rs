//! Finite-level model of G = H ⋊ Γ and its subquotients.
//!
//! H is a finite abelian p-group given by a cyclic decomposition together
//! with the matrix of the γ-action. The model works in the quotient G/Γ^(j),
//! whose elements are written h·γ^a with a mod p^j. The layer data H_i =
//! H/(γ^{p^i}−1)H is computed by Smith reduction of the relation lattice.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::exactnum::pow_u64;
use crate::linalg::{imat_inverse_unimodular, imat_mul, smith_normal_form, IMat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("level {level} smaller than e = {e}")]
    LevelTooSmall { level: u32, e: u32 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("transfer ill-defined: {0}")]
    IllDefined(String),
}

/// Input description of a model: p, minimal e with trivial Γ^(e)-action,
/// the cyclic decomposition of H, the action matrix, the level j and the
/// coefficient precision N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    pub p: u64,
    pub e: u32,
    pub orders: Vec<u64>,
    /// Row-major r×r matrix; γ·h = A·h with h a column vector of exponents.
    pub action: Vec<Vec<i64>>,
    pub level: u32,
    pub precision: u32,
}

/// h·γ^a at level j: exponent vector for the H-part, Γ-exponent mod p^j.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub h: Vec<u64>,
    pub a: u64,
}

/// One conjugacy class of G/Γ^(j). All members share the Γ-exponent.
#[derive(Debug, Clone)]
pub struct ConjClass {
    pub rep: GroupElement,
    /// Indices into the model's element enumeration, sorted.
    pub members: Vec<usize>,
    /// The i with aℤ_p = p^iℤ_p, capped at e.
    pub stratum: u32,
    pub a: u64,
}

/// Abelianization layer data: H_i = H/(γ^{p^i}−1)H with projection, section
/// and the induced γ-action.
#[derive(Debug, Clone)]
pub struct AbelianLayer {
    pub i: u32,
    /// Cyclic decomposition of H_i (entries may be 1).
    pub h_orders: Vec<u64>,
    /// Projection matrix H → H_i (rows indexed by H_i coordinates).
    pub proj: Vec<Vec<i64>>,
    /// Section H_i → H (integer matrix; proj∘sect = id).
    pub sect: Vec<Vec<i64>>,
    /// Induced action of γ on H_i.
    pub gamma_act: Vec<Vec<i64>>,
}

impl AbelianLayer {
    pub fn size(&self) -> u64 {
        self.h_orders.iter().product()
    }

    pub fn project_h(&self, h: &[u64]) -> Vec<u64> {
        apply_matrix(&self.proj, h, &self.h_orders)
    }

    pub fn act_gamma(&self, h: &[u64]) -> Vec<u64> {
        apply_matrix(&self.gamma_act, h, &self.h_orders)
    }

    pub fn lift_h(&self, h: &[u64], target_orders: &[u64]) -> Vec<u64> {
        apply_matrix(&self.sect, h, target_orders)
    }
}

fn apply_matrix(m: &[Vec<i64>], h: &[u64], orders: &[u64]) -> Vec<u64> {
    m.iter()
        .zip(orders)
        .map(|(row, &d)| {
            let s: i128 = row.iter().zip(h).map(|(&c, &x)| c as i128 * x as i128).sum();
            s.rem_euclid(d as i128) as u64
        })
        .collect()
}

/// Validated model of G/Γ^(j) with cached action powers and layer data.
#[derive(Debug)]
pub struct GroupModel {
    pub spec: GroupSpec,
    /// A^k mod orders for 0 ≤ k < p^e.
    action_pows: Vec<Vec<Vec<i64>>>,
    layers: Vec<AbelianLayer>,
    h_size: u64,
    gamma_size: u64,
}

impl GroupModel {
    pub fn p(&self) -> u64 {
        self.spec.p
    }

    pub fn e(&self) -> u32 {
        self.spec.e
    }

    pub fn level(&self) -> u32 {
        self.spec.level
    }

    pub fn precision(&self) -> u32 {
        self.spec.precision
    }

    pub fn rank(&self) -> usize {
        self.spec.orders.len()
    }

    pub fn h_size(&self) -> u64 {
        self.h_size
    }

    pub fn gamma_size(&self) -> u64 {
        self.gamma_size
    }

    pub fn size(&self) -> u64 {
        self.h_size * self.gamma_size
    }

    pub fn layer(&self, i: u32) -> &AbelianLayer {
        &self.layers[i as usize]
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            h: vec![0; self.rank()],
            a: 0,
        }
    }

    fn action_pow(&self, k: u64) -> &Vec<Vec<i64>> {
        let pe = pow_u64(self.spec.p, self.spec.e);
        &self.action_pows[(k % pe) as usize]
    }

    pub fn act_gamma_pow(&self, k: u64, h: &[u64]) -> Vec<u64> {
        apply_matrix(self.action_pow(k), h, &self.spec.orders)
    }

    fn normalize(&self, g: &GroupElement) -> GroupElement {
        GroupElement {
            h: g.h
                .iter()
                .zip(&self.spec.orders)
                .map(|(&x, &d)| x % d)
                .collect(),
            a: g.a % self.gamma_size,
        }
    }

    pub fn element(&self, h: &[i64], a: i64) -> GroupElement {
        GroupElement {
            h: h.iter()
                .zip(&self.spec.orders)
                .map(|(&x, &d)| (x as i128).rem_euclid(d as i128) as u64)
                .collect(),
            a: (a as i128).rem_euclid(self.gamma_size as i128) as u64,
        }
    }

    /// (h1, a1)·(h2, a2) = (h1 + A^{a1} h2, a1 + a2).
    pub fn multiply(&self, g1: &GroupElement, g2: &GroupElement) -> GroupElement {
        let moved = self.act_gamma_pow(g1.a, &g2.h);
        let h = g1
            .h
            .iter()
            .zip(moved)
            .zip(&self.spec.orders)
            .map(|((&x, y), &d)| (x + y) % d)
            .collect();
        GroupElement {
            h,
            a: (g1.a + g2.a) % self.gamma_size,
        }
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        let a_inv = (self.gamma_size - g.a % self.gamma_size) % self.gamma_size;
        let moved = self.act_gamma_pow(a_inv, &g.h);
        let h = moved
            .iter()
            .zip(&self.spec.orders)
            .map(|(&x, &d)| (d - x % d) % d)
            .collect();
        GroupElement { h, a: a_inv }
    }

    /// g^p by repeated multiplication.
    pub fn p_power_phi(&self, g: &GroupElement) -> GroupElement {
        let mut acc = self.identity();
        for _ in 0..self.spec.p {
            acc = self.multiply(&acc, g);
        }
        acc
    }

    pub fn conjugate(&self, by: &GroupElement, g: &GroupElement) -> GroupElement {
        self.multiply(&self.multiply(by, g), &self.inverse(by))
    }

    // -- enumeration ---------------------------------------------------------

    /// Deterministic index of an element in [0, |G/Γ^(j)|).
    pub fn index_of(&self, g: &GroupElement) -> usize {
        let g = self.normalize(g);
        let mut idx: u64 = 0;
        for (x, d) in g.h.iter().zip(&self.spec.orders) {
            idx = idx * d + x;
        }
        (idx * self.gamma_size + g.a) as usize
    }

    pub fn element_at(&self, mut idx: usize) -> GroupElement {
        let a = (idx as u64) % self.gamma_size;
        idx /= self.gamma_size as usize;
        let mut h = vec![0u64; self.rank()];
        for t in (0..self.rank()).rev() {
            h[t] = (idx as u64) % self.spec.orders[t];
            idx /= self.spec.orders[t] as usize;
        }
        GroupElement { h, a }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.size() as usize).map(move |i| self.element_at(i))
    }

    // -- conjugacy -----------------------------------------------------------

    /// Partition of G/Γ^(j) into conjugacy classes, via the normal-form
    /// criterion: the conjugates of hγ^a are A^b h + (1−A^a)H for b < p^e.
    pub fn conjugacy_classes(&self) -> Vec<ConjClass> {
        let pe = pow_u64(self.spec.p, self.spec.e);
        let mut classes = Vec::new();
        for a in 0..self.gamma_size {
            // the subgroup (1 − A^a)H
            let mut k_sub = BTreeSet::new();
            for hidx in 0..self.h_size {
                let h = self.h_at(hidx);
                let moved = self.act_gamma_pow(a, &h);
                let diff: Vec<u64> = h
                    .iter()
                    .zip(&moved)
                    .zip(&self.spec.orders)
                    .map(|((&x, &y), &d)| (x + d - y) % d)
                    .collect();
                k_sub.insert(diff);
            }
            let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
            for hidx in 0..self.h_size {
                let h0 = self.h_at(hidx);
                if seen.contains(&h0) {
                    continue;
                }
                let mut members_h = BTreeSet::new();
                for b in 0..pe {
                    let hb = self.act_gamma_pow(b, &h0);
                    for k in &k_sub {
                        let m: Vec<u64> = hb
                            .iter()
                            .zip(k)
                            .zip(&self.spec.orders)
                            .map(|((&x, &y), &d)| (x + y) % d)
                            .collect();
                        members_h.insert(m);
                    }
                }
                for m in &members_h {
                    seen.insert(m.clone());
                }
                let mut members: Vec<usize> = members_h
                    .iter()
                    .map(|h| self.index_of(&GroupElement { h: h.clone(), a }))
                    .collect();
                members.sort_unstable();
                let rep_idx = members[0];
                classes.push(ConjClass {
                    rep: self.element_at(rep_idx),
                    members,
                    stratum: self.stratum_of(a),
                    a,
                });
            }
        }
        classes.sort_by_key(|c| c.members[0]);
        classes
    }

    /// The i with aℤ_p = p^iℤ_p, where p^e-divisible exponents count as e.
    pub fn stratum_of(&self, a: u64) -> u32 {
        if a == 0 {
            return self.spec.e;
        }
        let mut v = 0;
        let mut x = a;
        while x % self.spec.p == 0 {
            x /= self.spec.p;
            v += 1;
        }
        v.min(self.spec.e)
    }

    pub fn h_at(&self, mut idx: u64) -> Vec<u64> {
        let mut h = vec![0u64; self.rank()];
        for t in (0..self.rank()).rev() {
            h[t] = idx % self.spec.orders[t];
            idx /= self.spec.orders[t];
        }
        h
    }

    pub fn h_elements(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        (0..self.h_size).map(move |i| self.h_at(i))
    }

    // -- transfer and special type -------------------------------------------

    /// Σ_{k=0}^{p−1} A^{k·p^{i−1}} as an integer matrix.
    fn transfer_matrix(&self, i: u32) -> Vec<Vec<i64>> {
        let r = self.rank();
        let pe = pow_u64(self.spec.p, self.spec.e);
        let mut m = vec![vec![0i64; r]; r];
        for k in 0..self.spec.p {
            let pow = self.action_pow((k * pow_u64(self.spec.p, i - 1)) % pe);
            for s in 0..r {
                for t in 0..r {
                    m[s][t] += pow[s][t];
                }
            }
        }
        m
    }

    /// Transfer ver_i: G_{i−1}^{ab} → G_i^{ab} on the H-part: the class of
    /// h ∈ H_{i−1} maps to the class of (Σ_k γ^{kp^{i−1}}·h) in H_i.
    /// The Γ-part maps γ^a ↦ γ^{pa}.
    pub fn transfer_h(&self, i: u32, h_in_prev: &[u64]) -> Vec<u64> {
        assert!(i >= 1 && i <= self.spec.e, "transfer layer out of range");
        let prev = self.layer(i - 1);
        let cur = self.layer(i);
        let lift = prev.lift_h(h_in_prev, &self.spec.orders);
        let m = self.transfer_matrix(i);
        let moved = apply_matrix(&m, &lift, &self.spec.orders);
        cur.project_h(&moved)
    }

    /// Defensive well-definedness check of `transfer_h` on the kernel of
    /// H → H_{i−1}. Cannot fail for valid models.
    pub fn check_transfer_well_defined(&self, i: u32) -> Result<(), GroupError> {
        let m = self.transfer_matrix(i);
        let cur = self.layer(i);
        let pi_prev = pow_u64(self.spec.p, i - 1);
        let r = self.rank();
        for t in 0..r {
            // kernel generators (A^{p^{i−1}} − 1)·e_t; the d_t·e_t relations
            // are absorbed by the mod-orders arithmetic.
            let mut et = vec![0u64; r];
            et[t] = 1;
            let moved = self.act_gamma_pow(pi_prev % pow_u64(self.spec.p, self.spec.e), &et);
            let diff: Vec<u64> = moved
                .iter()
                .zip(&et)
                .zip(&self.spec.orders)
                .map(|((&x, &y), &d)| (x + d - y) % d)
                .collect();
            let image = apply_matrix(&m, &diff, &self.spec.orders);
            if cur.project_h(&image).iter().any(|&x| x != 0) {
                return Err(GroupError::IllDefined(format!(
                    "kernel generator {:?} does not die under ver_{}",
                    diff, i
                )));
            }
        }
        Ok(())
    }

    /// Special type: the p-power map descends to a homomorphism
    /// G_i^{ab} → G_{i+1}^{ab} for all i, i.e. [h^p] equals the class of the
    /// twisted product h·(γ^{p^i}hγ^{−p^i})⋯ in H_{i+1} for every h.
    /// Returns the offending (generator index, i) on failure.
    pub fn is_special_type(&self) -> (bool, Option<(usize, u32)>) {
        let r = self.rank();
        for i in 0..self.spec.e {
            let cur = self.layer(i + 1);
            let m = self.transfer_matrix(i + 1);
            for t in 0..r {
                let mut et = vec![0u64; r];
                et[t] = 1;
                let twisted = apply_matrix(&m, &et, &self.spec.orders);
                let plain: Vec<u64> = et
                    .iter()
                    .zip(&self.spec.orders)
                    .map(|(&x, &d)| (x * self.spec.p) % d)
                    .collect();
                if cur.project_h(&twisted) != cur.project_h(&plain) {
                    return (false, Some((t, i)));
                }
            }
        }
        (true, None)
    }

    /// Rebuild the same group at a lower level j′ ≤ j.
    pub fn at_level(&self, level: u32) -> Result<GroupModel, GroupError> {
        let mut spec = self.spec.clone();
        spec.level = level;
        build_group(&spec)
    }
}

/// Validate a spec and build the model.
pub fn build_group(spec: &GroupSpec) -> Result<GroupModel, GroupError> {
    let r = spec.orders.len();
    if spec.action.len() != r || spec.action.iter().any(|row| row.len() != r) {
        return Err(GroupError::InvalidAction(format!(
            "action matrix must be {r}×{r}"
        )));
    }
    for &d in &spec.orders {
        let mut x = d;
        while x % spec.p == 0 {
            x /= spec.p;
        }
        if x != 1 {
            return Err(GroupError::InvalidAction(format!(
                "order {d} is not a power of p = {}",
                spec.p
            )));
        }
    }
    if spec.level < spec.e {
        return Err(GroupError::LevelTooSmall {
            level: spec.level,
            e: spec.e,
        });
    }
    // well-definedness of the action on ⊕ ℤ/d_t: d_s | a_{st}·d_t
    for s in 0..r {
        for t in 0..r {
            let prod = spec.action[s][t].unsigned_abs() as u128 * spec.orders[t] as u128;
            if prod % spec.orders[s] as u128 != 0 {
                return Err(GroupError::InvalidAction(format!(
                    "entry ({s},{t}) does not define a map on the cyclic factors"
                )));
            }
        }
    }
    // invertibility: A mod p must be invertible over 𝔽_p (Nakayama)
    if r > 0 && det_mod_p(&spec.action, spec.p) == 0 {
        return Err(GroupError::InvalidAction(
            "action matrix is singular mod p".into(),
        ));
    }
    // order of A must be exactly p^e
    let pe = pow_u64(spec.p, spec.e);
    let mut pow = identity_i64(r);
    let mut pows = vec![pow.clone()];
    for _ in 1..pe {
        pow = mat_mul_mod(&pow, &spec.action, &spec.orders);
        pows.push(pow.clone());
    }
    let last = mat_mul_mod(pows.last().unwrap(), &spec.action, &spec.orders);
    if !is_identity(&last, &spec.orders) {
        return Err(GroupError::InvalidAction(format!(
            "action order does not divide p^e = {pe}"
        )));
    }
    if spec.e > 0 {
        let pe1 = pow_u64(spec.p, spec.e - 1);
        if is_identity(&pows[pe1 as usize], &spec.orders) {
            return Err(GroupError::InvalidAction(format!(
                "action order divides p^{} already; e is not minimal",
                spec.e - 1
            )));
        }
    }

    let mut model = GroupModel {
        spec: spec.clone(),
        action_pows: pows,
        layers: Vec::new(),
        h_size: spec.orders.iter().product(),
        gamma_size: pow_u64(spec.p, spec.level),
    };
    for i in 0..=spec.e {
        model.layers.push(compute_layer(&model, i));
    }
    for i in 1..=spec.e {
        model.check_transfer_well_defined(i)?;
    }
    Ok(model)
}

fn compute_layer(model: &GroupModel, i: u32) -> AbelianLayer {
    let r = model.rank();
    if r == 0 {
        return AbelianLayer {
            i,
            h_orders: vec![],
            proj: vec![],
            sect: vec![],
            gamma_act: vec![],
        };
    }
    let pe = pow_u64(model.spec.p, model.spec.e);
    let pi = pow_u64(model.spec.p, i) % pe;
    // relation lattice: columns (A^{p^i} − I)e_t and d_t e_t
    let api = model.action_pow(pi);
    let mut rel = vec![vec![BigInt::zero(); 2 * r]; r];
    for s in 0..r {
        for t in 0..r {
            rel[s][t] = BigInt::from(api[s][t]) - BigInt::from(if s == t { 1 } else { 0 });
        }
        rel[s][r + s] = BigInt::from(model.spec.orders[s]);
    }
    let (u, d, _v) = smith_normal_form(&rel);
    let h_orders: Vec<u64> = (0..r)
        .map(|t| d[t][t].to_u64().expect("layer order fits u64"))
        .collect();
    let u_inv = imat_inverse_unimodular(&u);
    let proj: Vec<Vec<i64>> = u
        .iter()
        .map(|row| row.iter().map(|x| x.to_i64().expect("proj entry")).collect())
        .collect();
    let sect: Vec<Vec<i64>> = u_inv
        .iter()
        .map(|row| row.iter().map(|x| x.to_i64().expect("sect entry")).collect())
        .collect();
    // induced γ-action: proj ∘ A ∘ sect
    let a_big: IMat = model
        .spec
        .action
        .iter()
        .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let comp = imat_mul(&u, &imat_mul(&a_big, &u_inv));
    let gamma_act: Vec<Vec<i64>> = comp
        .iter()
        .enumerate()
        .map(|(s, row)| {
            row.iter()
                .map(|x| {
                    let d = BigInt::from(h_orders[s].max(1));
                    let m = ((x % &d) + &d) % &d;
                    m.to_i64().expect("action entry")
                })
                .collect()
        })
        .collect();
    AbelianLayer {
        i,
        h_orders,
        proj,
        sect,
        gamma_act,
    }
}

fn identity_i64(r: usize) -> Vec<Vec<i64>> {
    (0..r)
        .map(|i| (0..r).map(|j| if i == j { 1 } else { 0 }).collect())
        .collect()
}

fn is_identity(m: &[Vec<i64>], orders: &[u64]) -> bool {
    m.iter().enumerate().all(|(s, row)| {
        row.iter().enumerate().all(|(t, &x)| {
            let want = if s == t { 1i128 } else { 0 };
            (x as i128 - want).rem_euclid(orders[s] as i128) == 0
        })
    })
}

fn mat_mul_mod(a: &[Vec<i64>], b: &[Vec<i64>], orders: &[u64]) -> Vec<Vec<i64>> {
    let r = a.len();
    (0..r)
        .map(|s| {
            (0..r)
                .map(|t| {
                    let sum: i128 = (0..r).map(|k| a[s][k] as i128 * b[k][t] as i128).sum();
                    sum.rem_euclid(orders[s] as i128) as i64
                })
                .collect()
        })
        .collect()
}

fn det_mod_p(m: &[Vec<i64>], p: u64) -> u64 {
    let r = m.len();
    let mut a: Vec<Vec<u64>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|&x| (x as i128).rem_euclid(p as i128) as u64)
                .collect()
        })
        .collect();
    let mut det: u64 = 1;
    for c in 0..r {
        let Some(pr) = (c..r).find(|&i| a[i][c] % p != 0) else {
            return 0;
        };
        if pr != c {
            a.swap(c, pr);
            det = (det * (p - 1)) % p;
        }
        det = det * a[c][c] % p;
        let inv = mod_inv_small(a[c][c], p);
        for i in c + 1..r {
            let f = a[i][c] * inv % p;
            for j in c..r {
                a[i][j] = (a[i][j] + (p - f) * a[c][j]) % p;
            }
        }
    }
    det % p
}

fn mod_inv_small(a: u64, p: u64) -> u64 {
    let mut res = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            res = res * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    res
}

// ---------------------------------------------------------------------------
// Spec file format
// ---------------------------------------------------------------------------

/// Parse the line-based group-spec format. `#` starts a comment.
pub fn parse_group_spec(text: &str) -> Result<GroupSpec, GroupError> {
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| GroupError::Parse(format!("expected key=value, got '{line}'")))?;
        fields.insert(key.trim().to_string(), value.trim().to_string());
    }
    let get = |k: &str| {
        fields
            .get(k)
            .ok_or_else(|| GroupError::Parse(format!("missing key '{k}'")))
    };
    let num = |k: &str| -> Result<u64, GroupError> {
        get(k)?
            .parse::<u64>()
            .map_err(|_| GroupError::Parse(format!("key '{k}' is not an integer")))
    };
    let orders: Vec<u64> = split_ints(get("orders")?)
        .ok_or_else(|| GroupError::Parse("bad orders list".into()))?
        .iter()
        .map(|&x| x as u64)
        .collect();
    let flat =
        split_ints(get("action")?).ok_or_else(|| GroupError::Parse("bad action list".into()))?;
    let r = orders.len();
    if flat.len() != r * r {
        return Err(GroupError::Parse(format!(
            "action needs {} entries, got {}",
            r * r,
            flat.len()
        )));
    }
    let action = flat.chunks(r.max(1)).map(|c| c.to_vec()).collect();
    Ok(GroupSpec {
        p: num("p")?,
        e: num("e")? as u32,
        orders,
        action,
        level: num("level")? as u32,
        precision: num("precision")? as u32,
    })
}

fn split_ints(s: &str) -> Option<Vec<i64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().ok())
        .collect()
}

/// Canonical serialisation; parse(serialize(s)) == s.
pub fn serialize_group_spec(spec: &GroupSpec) -> String {
    let orders = spec
        .orders
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let action = spec
        .action
        .iter()
        .flat_map(|row| row.iter().map(|x| x.to_string()))
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "p={}\ne={}\norders={}\naction={}\nlevel={}\nprecision={}\n",
        spec.p, spec.e, orders, action, spec.level, spec.precision
    )
}

// ---------------------------------------------------------------------------
// Reference models used across the test suite
// ---------------------------------------------------------------------------

/// p=3, H = ℤ/9 with γ·h = h⁴, e = 1.
pub fn model_e1(level: u32, precision: u32) -> GroupModel {
    build_group(&GroupSpec {
        p: 3,
        e: 1,
        orders: vec![9],
        action: vec![vec![4]],
        level,
        precision,
    })
    .expect("E1 is valid")
}

/// p=3, H = (ℤ/3)³ with γ acting by the unipotent Jordan block, e = 1.
pub fn model_e2(level: u32, precision: u32) -> GroupModel {
    build_group(&GroupSpec {
        p: 3,
        e: 1,
        orders: vec![3, 3, 3],
        action: vec![vec![1, 1, 0], vec![0, 1, 1], vec![0, 0, 1]],
        level,
        precision,
    })
    .expect("E2 is valid")
}

/// Abelian model: trivial action, e = 0.
pub fn model_abelian(p: u64, orders: Vec<u64>, level: u32, precision: u32) -> GroupModel {
    let r = orders.len();
    build_group(&GroupSpec {
        p,
        e: 0,
        orders,
        action: identity_i64(r),
        level,
        precision,
    })
    .expect("abelian model is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_is_valid_and_e_minimal() {
        let m = model_e1(2, 4);
        assert_eq!(m.size(), 81);
        // 4³ ≡ 1 mod 9, 4 ≢ 1
        assert_eq!(m.act_gamma_pow(3, &[1]), vec![1]);
        assert_ne!(m.act_gamma_pow(1, &[1]), vec![1]);
    }

    #[test]
    fn trivial_h_abelian_model() {
        let m = model_abelian(3, vec![], 1, 2);
        assert_eq!(m.size(), 3);
        assert_eq!(m.e(), 0);
    }

    #[test]
    fn order_2_action_rejected() {
        // 2 has order 6 in (ℤ/9)^×, not a 3-power
        let err = build_group(&GroupSpec {
            p: 3,
            e: 1,
            orders: vec![9],
            action: vec![vec![2]],
            level: 1,
            precision: 1,
        })
        .unwrap_err();
        assert!(matches!(err, GroupError::InvalidAction(_)));
    }

    #[test]
    fn level_too_small_rejected() {
        let err = build_group(&GroupSpec {
            p: 3,
            e: 1,
            orders: vec![9],
            action: vec![vec![4]],
            level: 0,
            precision: 1,
        })
        .unwrap_err();
        assert!(matches!(err, GroupError::LevelTooSmall { .. }));
    }

    #[test]
    fn multiply_examples() {
        let m = model_e1(2, 4);
        let g = m.element(&[1], 1);
        let id = m.identity();
        assert_eq!(m.multiply(&id, &g), g);
        // (h,1)·(h,1) = (h⁵, 2)
        assert_eq!(m.multiply(&g, &g), m.element(&[5], 2));
        // (0,1)·(h,0) = (h⁴, 1)
        assert_eq!(
            m.multiply(&m.element(&[0], 1), &m.element(&[1], 0)),
            m.element(&[4], 1)
        );
    }

    #[test]
    fn multiply_associative_and_inverses() {
        let m = model_e2(1, 1);
        let els: Vec<GroupElement> = m.elements().step_by(7).collect();
        for g1 in &els {
            for g2 in &els {
                for g3 in &els {
                    assert_eq!(
                        m.multiply(&m.multiply(g1, g2), g3),
                        m.multiply(g1, &m.multiply(g2, g3))
                    );
                }
            }
        }
        for g in &els {
            assert_eq!(m.multiply(g, &m.inverse(g)), m.identity());
            assert_eq!(m.multiply(&m.inverse(g), g), m.identity());
        }
    }

    #[test]
    fn e1_classes_at_level_1() {
        let m = model_e1(1, 1);
        let classes = m.conjugacy_classes();
        assert_eq!(classes.len(), 11);
        let mut sizes: Vec<usize> = classes.iter().map(|c| c.members.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 1, 3, 3, 3, 3, 3, 3, 3, 3]);
        // h⁴γ⁰ and hγ⁰ in the same class
        let c_h = classes
            .iter()
            .find(|c| c.members.contains(&m.index_of(&m.element(&[1], 0))))
            .unwrap();
        assert!(c_h.members.contains(&m.index_of(&m.element(&[4], 0))));
    }

    #[test]
    fn abelian_classes_are_singletons() {
        let m = model_abelian(3, vec![3, 3], 1, 1);
        let classes = m.conjugacy_classes();
        assert_eq!(classes.len(), m.size() as usize);
        assert!(classes.iter().all(|c| c.members.len() == 1));
    }

    #[test]
    fn classes_match_brute_force_orbits() {
        for m in [model_e1(1, 1), model_e2(1, 1), model_e1(2, 1)] {
            let classes = m.conjugacy_classes();
            // brute force: orbit of g under all inner automorphisms
            let mut covered = vec![false; m.size() as usize];
            for c in &classes {
                let mut orbit = BTreeSet::new();
                for x in m.elements() {
                    orbit.insert(m.index_of(&m.conjugate(&x, &c.rep)));
                }
                let members: BTreeSet<usize> = c.members.iter().copied().collect();
                assert_eq!(orbit, members);
                for &i in &c.members {
                    assert!(!covered[i], "classes must partition");
                    covered[i] = true;
                }
            }
            assert!(covered.iter().all(|&b| b));
        }
    }

    #[test]
    fn abelianization_layers_e1() {
        let m = model_e1(2, 4);
        let l0 = m.layer(0);
        let nontrivial: Vec<u64> = l0.h_orders.iter().copied().filter(|&d| d > 1).collect();
        assert_eq!(nontrivial, vec![3]); // H_0 ≅ ℤ/3
        let l1 = m.layer(1);
        let nontrivial: Vec<u64> = l1.h_orders.iter().copied().filter(|&d| d > 1).collect();
        assert_eq!(nontrivial, vec![9]); // H_1 ≅ ℤ/9
    }

    #[test]
    fn abelianization_layer_e2() {
        let m = model_e2(1, 1);
        let l0 = m.layer(0);
        let nontrivial: Vec<u64> = l0.h_orders.iter().copied().filter(|&d| d > 1).collect();
        assert_eq!(nontrivial, vec![3]); // (A−I)H spans two factors
    }

    #[test]
    fn transfer_examples_e1() {
        let m = model_e1(2, 4);
        // ver_1(h̄) = h^{1+4+16} = h²¹ = h³ in ℤ/9
        let l0 = m.layer(0);
        let h_bar = l0.project_h(&[1]);
        let v = m.transfer_h(1, &h_bar);
        let l1 = m.layer(1);
        assert_eq!(v, l1.project_h(&[3]));
        // identity → identity
        let z = l0.project_h(&[0]);
        assert!(m.transfer_h(1, &z).iter().all(|&x| x == 0));
    }

    #[test]
    fn transfer_is_homomorphism() {
        let m = model_e2(2, 2);
        let l0 = m.layer(0);
        let l1 = m.layer(1);
        for xi in (0..m.h_size()).step_by(3) {
            for yi in (0..m.h_size()).step_by(4) {
                let px = l0.project_h(&m.h_at(xi));
                let py = l0.project_h(&m.h_at(yi));
                let sum: Vec<u64> = px
                    .iter()
                    .zip(&py)
                    .zip(&l0.h_orders)
                    .map(|((&a, &b), &d)| (a + b) % d.max(1))
                    .collect();
                let vx = m.transfer_h(1, &px);
                let vy = m.transfer_h(1, &py);
                let vsum = m.transfer_h(1, &sum);
                let direct: Vec<u64> = vx
                    .iter()
                    .zip(&vy)
                    .zip(&l1.h_orders)
                    .map(|((&a, &b), &d)| (a + b) % d.max(1))
                    .collect();
                assert_eq!(vsum, direct);
            }
        }
    }

    #[test]
    fn phi_examples_e1() {
        let m = model_e1(2, 4);
        assert_eq!(m.p_power_phi(&m.identity()), m.identity());
        // φ(h, 1) = (h²¹ mod 9, 3) = (h³, 3)
        assert_eq!(m.p_power_phi(&m.element(&[1], 1)), m.element(&[3], 3));
        assert_eq!(m.p_power_phi(&m.element(&[1], 0)), m.element(&[3], 0));
    }

    #[test]
    fn special_type_classification() {
        assert_eq!(model_e1(2, 2).is_special_type(), (true, None));
        let (ok, witness) = model_e2(1, 1).is_special_type();
        assert!(!ok);
        assert_eq!(witness, Some((2, 0))); // generator e₃, layer 0
        assert_eq!(
            model_abelian(3, vec![9, 3], 2, 2).is_special_type(),
            (true, None)
        );
    }

    #[test]
    fn special_type_phi_descends() {
        // on special-type models φ(x·y) ≡ φ(x)·φ(y) in G_1^{ab}
        let m = model_e1(2, 2);
        let l1 = m.layer(1);
        for x in m.elements().step_by(5) {
            for y in m.elements().step_by(7) {
                let lhs = m.p_power_phi(&m.multiply(&x, &y));
                let rhs = m.multiply(&m.p_power_phi(&x), &m.p_power_phi(&y));
                assert_eq!(l1.project_h(&lhs.h), l1.project_h(&rhs.h));
                assert_eq!(lhs.a, rhs.a);
            }
        }
    }

    #[test]
    fn spec_roundtrip() {
        let m = model_e2(2, 3);
        let text = serialize_group_spec(&m.spec);
        let parsed = parse_group_spec(&text).unwrap();
        assert_eq!(parsed, m.spec);
        assert_eq!(serialize_group_spec(&parsed), text);
        // comments and loose whitespace
        let messy =
            "# a model\np = 3\n e=1\norders= 9\naction=4 # the action\nlevel=2\nprecision=4\n";
        let s = parse_group_spec(messy).unwrap();
        assert_eq!(s.p, 3);
        assert_eq!(s.orders, vec![9]);
    }
}
