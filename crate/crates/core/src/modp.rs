//! Polynomials over a small prime field and over `Z / p^k`, as needed by the
//! modular factorization routine.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

/// Dense polynomial over `F_p`, lowest degree first, no trailing zeros.
pub(crate) type Fp = Vec<u64>;

fn trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a % p, p - 2, p)
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

pub(crate) fn reduce(coeffs: &[BigInt], p: u64) -> Fp {
    let bp = BigInt::from(p);
    trim(
        coeffs
            .iter()
            .map(|c| {
                let r: BigInt = c.mod_floor(&bp);
                u64::try_from(r).expect("residue fits")
            })
            .collect(),
    )
}

pub(crate) fn add(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

pub(crate) fn sub(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

pub(crate) fn mul(a: &Fp, b: &Fp, p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(out)
}

pub(crate) fn scale(a: &Fp, c: u64, p: u64) -> Fp {
    trim(a.iter().map(|&x| x * (c % p) % p).collect())
}

/// Quotient and remainder; `b` must be nonzero.
pub(crate) fn divrem(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp) {
    let db = b.len() - 1;
    if a.len() < b.len() {
        return (Vec::new(), a.clone());
    }
    let inv = inv_mod(b[db], p);
    let mut rem = a.clone();
    let mut quot = vec![0u64; a.len() - db];
    for i in (0..quot.len()).rev() {
        let c = rem[i + db] * inv % p;
        if c == 0 {
            continue;
        }
        quot[i] = c;
        for (j, &y) in b.iter().enumerate() {
            rem[i + j] = (rem[i + j] + p - c * y % p) % p;
        }
    }
    rem.truncate(db);
    (trim(quot), trim(rem))
}

pub(crate) fn monic(a: &Fp, p: u64) -> Fp {
    match a.last() {
        None => Vec::new(),
        Some(&lc) => scale(a, inv_mod(lc, p), p),
    }
}

pub(crate) fn gcd(a: &Fp, b: &Fp, p: u64) -> Fp {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let r = divrem(&a, &b, p).1;
        a = b;
        b = r;
    }
    monic(&a, p)
}

/// Extended gcd: `(g, s, t)` with `s a + t b = g`, `g` monic.
pub(crate) fn xgcd(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp, Fp) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s2 = sub(&s0, &mul(&q, &s1, p), p);
        let t2 = sub(&t0, &mul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let inv = inv_mod(*r0.last().expect("nonzero gcd"), p);
    (scale(&r0, inv, p), scale(&s0, inv, p), scale(&t0, inv, p))
}

pub(crate) fn derivative(a: &Fp, p: u64) -> Fp {
    trim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| (i as u64 % p) * c % p)
            .collect(),
    )
}

pub(crate) fn is_squarefree(a: &Fp, p: u64) -> bool {
    let d = derivative(a, p);
    !d.is_empty() && gcd(a, &d, p).len() == 1
}

pub(crate) fn eval(a: &Fp, x: u64, p: u64) -> u64 {
    a.iter().rev().fold(0, |acc, &c| (acc * x + c) % p)
}

/// Distinct monic irreducible factors of a monic squarefree polynomial,
/// by Berlekamp's algorithm.
pub(crate) fn berlekamp(f: &Fp, p: u64) -> Vec<Fp> {
    let n = f.len() - 1;
    if n <= 1 {
        return vec![f.clone()];
    }
    // Rows: x^(i p) mod f.
    let xp = powmod_x(p, f, p);
    let mut rows = Vec::with_capacity(n);
    let mut cur: Fp = vec![1];
    for _ in 0..n {
        let mut row = cur.clone();
        row.resize(n, 0);
        rows.push(row);
        cur = divrem(&mul(&cur, &xp, p), f, p).1;
    }
    // Matrix Q - I; solve v (Q - I) = 0 for row vectors v.
    let mut m = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut v = rows[i][j];
            if i == j {
                v = (v + p - 1) % p;
            }
            // transpose so that the kernel is a column kernel
            m[j][i] = v;
        }
    }
    let basis = kernel(m, p);
    let k = basis.len();
    let mut factors = vec![f.clone()];
    if k == 1 {
        return factors;
    }
    for v in &basis {
        let v = trim(v.clone());
        let mut next = Vec::new();
        for u in factors {
            if u.len() <= 2 {
                next.push(u);
                continue;
            }
            let mut rest = u;
            for s in 0..p {
                if rest.len() <= 2 {
                    break;
                }
                let shifted = sub(&v, &vec![s], p);
                let g = gcd(&rest, &shifted, p);
                if g.len() > 1 && g.len() < rest.len() {
                    rest = divrem(&rest, &g, p).0;
                    next.push(g);
                }
            }
            next.push(monic(&rest, p));
        }
        factors = next;
        if factors.len() == k {
            break;
        }
    }
    factors.sort();
    factors
}

fn powmod_x(e: u64, f: &Fp, p: u64) -> Fp {
    let mut result: Fp = vec![1];
    let mut base = divrem(&vec![0, 1], f, p).1;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = divrem(&mul(&result, &base, p), f, p).1;
        }
        base = divrem(&mul(&base, &base, p), f, p).1;
        e >>= 1;
    }
    result
}

/// Basis of the column kernel of a square matrix over `F_p`.
fn kernel(mut m: Vec<Vec<u64>>, p: u64) -> Vec<Vec<u64>> {
    let n = m.len();
    let mut pivot_col = vec![usize::MAX; n];
    let mut row = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        let Some(r) = (row..n).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, r);
        let inv = inv_mod(m[row][col], p);
        for x in m[row].iter_mut() {
            *x = *x * inv % p;
        }
        for r2 in 0..n {
            if r2 != row && m[r2][col] != 0 {
                let c = m[r2][col];
                for j in 0..n {
                    m[r2][j] = (m[r2][j] + p - c * m[row][j] % p) % p;
                }
            }
        }
        pivot_col[row] = col;
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free {
        let mut v = vec![0u64; n];
        v[fc] = 1;
        for r in 0..row {
            let pc = pivot_col[r];
            v[pc] = (p - m[r][fc]) % p;
        }
        basis.push(v);
    }
    basis
}

/// Integer polynomial arithmetic modulo `m`, lowest degree first.
pub(crate) type Zm = Vec<BigInt>;

pub(crate) fn zm_reduce(a: &[BigInt], m: &BigInt) -> Zm {
    let mut v: Zm = a.iter().map(|c| c.mod_floor(m)).collect();
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

pub(crate) fn zm_mul(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Zm {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    zm_reduce(&out, m)
}

pub(crate) fn zm_sub(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Zm {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    let v: Vec<BigInt> = (0..n)
        .map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z))
        .collect();
    zm_reduce(&v, m)
}

pub(crate) fn zm_add(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Zm {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    let v: Vec<BigInt> = (0..n)
        .map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z))
        .collect();
    zm_reduce(&v, m)
}

fn lift(a: &Fp) -> Zm {
    a.iter().map(|&c| BigInt::from(c)).collect()
}

/// Hensel-lift `f = g h (mod p)` for monic `f` (mod `p^k`) with `g`, `h`
/// monic and coprime mod `p`. Returns the factors modulo `p^k`.
fn hensel_pair(f: &Zm, g: &Fp, h: &Fp, p: u64, k: u32) -> (Zm, Zm) {
    let (_, s, t) = xgcd(g, h, p);
    let bp = BigInt::from(p);
    let mut g_z = lift(g);
    let mut h_z = lift(h);
    let mut pj = bp.clone();
    for _ in 1..k {
        let next = &pj * &bp;
        let diff = zm_sub(f, &zm_mul(&g_z, &h_z, &next), &next);
        let e: Vec<BigInt> = diff.iter().map(|c| c / &pj).collect();
        let e = reduce(&e, p);
        let te = mul(&t, &e, p);
        let (q, a) = divrem(&te, g, p);
        let b = add(&mul(&s, &e, p), &mul(&q, h, p), p);
        let a_z: Zm = lift(&a).into_iter().map(|c| c * &pj).collect();
        let b_z: Zm = lift(&b).into_iter().map(|c| c * &pj).collect();
        g_z = zm_add(&g_z, &a_z, &next);
        h_z = zm_add(&h_z, &b_z, &next);
        pj = next;
    }
    (g_z, h_z)
}

/// Lift the monic modular factorization `f = prod factors (mod p)` of the
/// monic polynomial `f` (coefficients mod `p^k`) to a factorization mod `p^k`.
pub(crate) fn hensel_multi(f: &Zm, factors: &[Fp], p: u64, k: u32) -> Vec<Zm> {
    if factors.len() == 1 {
        return vec![f.clone()];
    }
    let mid = factors.len() / 2;
    let (left, right) = factors.split_at(mid);
    let g = left.iter().fold(vec![1u64], |acc, x| mul(&acc, x, p));
    let h = right.iter().fold(vec![1u64], |acc, x| mul(&acc, x, p));
    let (g_z, h_z) = hensel_pair(f, &g, &h, p, k);
    let mut out = hensel_multi(&g_z, left, p, k);
    out.extend(hensel_multi(&h_z, right, p, k));
    out
}

/// Symmetric representative of `c` modulo `m` in `(-m/2, m/2]`.
pub(crate) fn symmetric(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn prod(fs: &[Fp], p: u64) -> Fp {
        fs.iter().fold(vec![1], |acc, x| mul(&acc, x, p))
    }

    #[test]
    fn berlekamp_splits_x4_minus_1_mod_5() {
        let f = vec![4, 0, 0, 0, 1];
        let fs = berlekamp(&f, 5);
        assert_eq!(fs.len(), 4);
        assert_eq!(prod(&fs, 5), f);
    }

    #[test]
    fn berlekamp_keeps_irreducible() {
        // x^2 + 1 is irreducible mod 3
        assert_eq!(berlekamp(&vec![1, 0, 1], 3), vec![vec![1, 0, 1]]);
        // x^4 + 1 mod 3 = (x^2 + x + 2)(x^2 + 2x + 2)
        let fs = berlekamp(&vec![1, 0, 0, 0, 1], 3);
        assert_eq!(fs.len(), 2);
        assert_eq!(prod(&fs, 3), vec![1, 0, 0, 0, 1]);
    }

    #[test]
    fn hensel_lifts_to_higher_power() {
        // x^2 - 2 mod 7 = (x - 3)(x - 4); lift to 7^5
        let m = BigInt::from(7u64.pow(5));
        let f = zm_reduce(&[BigInt::from(-2), BigInt::zero(), BigInt::one()], &m);
        let lifted = hensel_multi(&f, &[vec![4, 1], vec![3, 1]], 7, 5);
        let back = zm_mul(&lifted[0], &lifted[1], &m);
        assert_eq!(back, f);
    }

    #[test]
    fn xgcd_identity() {
        let p = 11;
        let a = vec![3, 1, 4, 1];
        let b = vec![5, 9, 2];
        let (g, s, t) = xgcd(&a, &b, p);
        assert_eq!(add(&mul(&s, &a, p), &mul(&t, &b, p), p), g);
        assert_eq!(g, vec![1]);
    }
}
