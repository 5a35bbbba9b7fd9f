//! Kernel vectors of univariate polynomial blocks by evaluation, rational interpolation
//! and Chinese remaindering over word-sized primes.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::polynomial::{Polynomial, Vars, Q};

/// Largest number of evaluation points tried per prime.
const MAX_POINTS: usize = 1 << 14;
const MAX_PRIMES: usize = 400;

#[derive(Clone, Copy)]
struct Fp(u64);

impl Fp {
    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }

    fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.0 - 2)
    }

    fn reduce(&self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.0)).to_u64().unwrap()
    }

    fn eval(&self, p: &[u64], x: u64) -> u64 {
        p.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }

    fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    fn mul_poly(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        Self::trim(&mut out);
        out
    }

    fn sub_poly(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = vec![0; a.len().max(b.len())];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.sub(a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0));
        }
        Self::trim(&mut out);
        out
    }

    fn divrem(&self, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let mut r = a.to_vec();
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let lead = self.inv(*b.last().unwrap());
        let mut q = vec![0; r.len() - b.len() + 1];
        for i in (0..q.len()).rev() {
            let c = self.mul(r[i + b.len() - 1], lead);
            q[i] = c;
            if c != 0 {
                for (j, &y) in b.iter().enumerate() {
                    r[i + j] = self.sub(r[i + j], self.mul(c, y));
                }
            }
        }
        r.truncate(b.len() - 1);
        Self::trim(&mut r);
        Self::trim(&mut q);
        (q, r)
    }

    fn monic(&self, a: &[u64]) -> Vec<u64> {
        match a.last() {
            None => Vec::new(),
            Some(&l) => {
                let i = self.inv(l);
                a.iter().map(|&c| self.mul(c, i)).collect()
            }
        }
    }

    fn gcd(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let (mut x, mut y) = (a.to_vec(), b.to_vec());
        while !y.is_empty() {
            let (_, r) = self.divrem(&x, &y);
            x = y;
            y = r;
        }
        self.monic(&x)
    }

    /// Newton interpolation through `(xs[i], ys[i])`, in the monomial basis.
    fn interpolate(&self, xs: &[u64], ys: &[u64]) -> Vec<u64> {
        let n = xs.len();
        let mut c = ys.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                let num = self.sub(c[i], c[i - 1]);
                let den = self.sub(xs[i], xs[i - j]);
                c[i] = self.mul(num, self.inv(den));
            }
        }
        let mut out = vec![0u64; n];
        for i in (0..n).rev() {
            // out = out·(t − xs[i]) + c[i]
            let mut next = vec![0u64; n];
            for k in (0..n).rev() {
                let v = out[k];
                if v == 0 {
                    continue;
                }
                if k + 1 < n {
                    next[k + 1] = self.add(next[k + 1], v);
                }
                next[k] = self.sub(next[k], self.mul(v, xs[i]));
            }
            next[0] = self.add(next[0], c[i]);
            out = next;
        }
        Self::trim(&mut out);
        out
    }

    /// `(r, q)` with `q·u ≡ r` mod `m`, `deg r ≤ a`, `q` monic.
    fn rational_reconstruct(&self, u: &[u64], m: &[u64], a: usize) -> Option<(Vec<u64>, Vec<u64>)> {
        let (mut r0, mut r1) = (m.to_vec(), u.to_vec());
        let (mut t0, mut t1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
        while r1.len() > a + 1 {
            let (q, r) = self.divrem(&r0, &r1);
            let t = self.sub_poly(&t0, &self.mul_poly(&q, &t1));
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t;
        }
        if t1.is_empty() || t1.len() + a > m.len() - 1 {
            return None;
        }
        let lead = self.inv(*t1.last().unwrap());
        let scale = |v: &[u64]| v.iter().map(|&c| self.mul(c, lead)).collect::<Vec<u64>>();
        Some((scale(&r1), scale(&t1)))
    }

    /// Solve `A[:, ..k] x = −A[:, k]`; `None` if the leading block is singular.
    fn solve(&self, mut a: Vec<Vec<u64>>) -> Option<Vec<u64>> {
        let k = a.len();
        for col in 0..k {
            let piv = (col..k).find(|&r| a[r][col] != 0)?;
            a.swap(col, piv);
            let inv = self.inv(a[col][col]);
            for x in a[col].iter_mut() {
                *x = self.mul(*x, inv);
            }
            let pivot_row = a[col].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r == col || row[col] == 0 {
                    continue;
                }
                let f = row[col];
                for (x, &y) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *x = self.sub(*x, self.mul(f, y));
                }
            }
        }
        Some((0..k).map(|r| self.sub(0, a[r][k])).collect())
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let f = Fp(n);
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = f.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

struct Primes(u64);

impl Iterator for Primes {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        loop {
            self.0 -= 2;
            if is_prime(self.0) {
                return Some(self.0);
            }
        }
    }
}

/// `(a, b)` with `a ≡ b·u` mod `m` and `|a|, b ≤ √(m/2)`.
fn rational_from_residue(u: &BigInt, m: &BigInt) -> Option<Q> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r = &r0 - &q * &r1;
        let t = &t0 - &q * &t1;
        r0 = r1;
        r1 = r;
        t0 = t1;
        t1 = t;
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(Q::new(r1, t1))
}

/// Normalized kernel vector of one prime: `v_c` is the monic common denominator.
struct Image {
    degrees: Vec<usize>,
    coeffs: Vec<Vec<u64>>,
    points: usize,
}

fn image_mod(f: Fp, block: &[Vec<Vec<BigInt>>], start_points: usize) -> Option<Image> {
    let k = block.len();
    let red: Vec<Vec<Vec<u64>>> = block
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    let mut v: Vec<u64> = e.iter().map(|c| f.reduce(c)).collect();
                    Fp::trim(&mut v);
                    v
                })
                .collect()
        })
        .collect();
    let constant = red.iter().flatten().all(|e| e.len() <= 1);
    let at = |x: u64| -> Option<Vec<u64>> {
        let a: Vec<Vec<u64>> = red.iter().map(|row| row.iter().map(|e| f.eval(e, x)).collect()).collect();
        f.solve(a)
    };
    if constant {
        let x = at(0)?;
        let mut coeffs: Vec<Vec<u64>> = x.into_iter().map(|c| if c == 0 { vec![] } else { vec![c] }).collect();
        coeffs.push(vec![1]);
        let degrees = coeffs.iter().map(|c| c.len()).collect();
        return Some(Image { degrees, coeffs, points: 1 });
    }
    let mut xs: Vec<u64> = Vec::new();
    let mut ys: Vec<Vec<u64>> = vec![Vec::new(); k];
    let mut next = 1u64;
    let mut sample = |xs: &mut Vec<u64>, ys: &mut Vec<Vec<u64>>, want: usize| -> Option<()> {
        while xs.len() < want {
            if next > 4 * MAX_POINTS as u64 {
                return None;
            }
            let x = next;
            next += 1;
            if let Some(v) = at(x) {
                xs.push(x);
                for (y, c) in ys.iter_mut().zip(v) {
                    y.push(c);
                }
            }
        }
        Some(())
    };
    let mut m_pts = start_points.max(4);
    loop {
        if m_pts > MAX_POINTS {
            return None;
        }
        sample(&mut xs, &mut ys, m_pts)?;
        let mut modulus = vec![1u64];
        for &x in &xs {
            modulus = f.mul_poly(&modulus, &[f.sub(0, x), 1]);
        }
        let a = (m_pts - 1) / 2;
        let mut parts = Vec::with_capacity(k);
        let mut ok = true;
        for y in &ys {
            let u = f.interpolate(&xs, y);
            match f.rational_reconstruct(&u, &modulus, a) {
                Some(rq) => parts.push(rq),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let mut den = vec![1u64];
            for (_, q) in &parts {
                let g = f.gcd(&den, q);
                den = f.mul_poly(&den, &f.divrem(q, &g).0);
            }
            let mut coeffs: Vec<Vec<u64>> = parts
                .iter()
                .map(|(r, q)| f.mul_poly(r, &f.divrem(&den, q).0))
                .collect();
            coeffs.push(den.clone());
            let before = xs.len();
            sample(&mut xs, &mut ys, before + 2)?;
            let fits = (before..xs.len()).all(|s| {
                let d = f.eval(&den, xs[s]);
                d != 0 && (0..k).all(|j| f.eval(&coeffs[j], xs[s]) == f.mul(ys[j][s], d))
            });
            if fits {
                let degrees = coeffs.iter().map(|c| c.len()).collect();
                return Some(Image { degrees, coeffs, points: m_pts });
            }
        }
        m_pts *= 2;
    }
}

/// Kernel vector `(x_0, .., x_{k−1}, 1)·den` of a `k × (k+1)` block with integer
/// polynomial entries in variable `var` (dense, low degree first), over `vars`.
/// `check` decides whether a reconstructed candidate is exact.
pub(crate) fn univariate_kernel(
    block: &[Vec<Vec<BigInt>>],
    vars: &Vars,
    var: usize,
    mut check: impl FnMut(&[Polynomial]) -> bool,
) -> Option<Vec<Polynomial>> {
    let mut primes = Primes((1u64 << 62) + 1);
    let mut modulus = BigInt::one();
    let mut residues: Vec<Vec<BigInt>> = Vec::new();
    let mut degrees: Vec<usize> = Vec::new();
    let mut points = 4;
    let mut candidate: Option<Vec<Vec<Q>>> = None;
    for _ in 0..MAX_PRIMES {
        let p = primes.next()?;
        let f = Fp(p);
        let Some(img) = image_mod(f, block, points) else { continue };
        if !degrees.is_empty() && img.degrees != degrees {
            let larger: usize = img.degrees.iter().sum::<usize>();
            if larger <= degrees.iter().sum::<usize>() {
                continue;
            }
            residues.clear();
            modulus = BigInt::one();
            candidate = None;
        }
        degrees = img.degrees.clone();
        points = img.points;
        if let Some(c) = &candidate {
            let agrees = c.iter().zip(&img.coeffs).all(|(qs, us)| {
                let pb = BigInt::from(p);
                qs.iter().zip(us).all(|(q, &u)| {
                    let d = q.denom().mod_floor(&pb);
                    !d.is_zero() && (q.numer() - BigInt::from(u) * q.denom()).mod_floor(&pb).is_zero()
                })
            });
            if agrees {
                let polys = to_polys(c, vars, var);
                if check(&polys) {
                    return Some(polys);
                }
            }
        }
        let pb = BigInt::from(p);
        if residues.is_empty() {
            residues = img.coeffs.iter().map(|c| c.iter().map(|&u| BigInt::from(u)).collect()).collect();
            modulus = pb;
        } else {
            let inv = BigInt::from(f.inv(f.reduce(&modulus)));
            for (acc, us) in residues.iter_mut().zip(&img.coeffs) {
                for (a, &u) in acc.iter_mut().zip(us) {
                    let delta = (BigInt::from(u) - &*a).mod_floor(&pb) * &inv % &pb;
                    *a = &*a + &modulus * delta;
                }
            }
            modulus *= pb;
        }
        candidate = residues
            .iter()
            .map(|acc| acc.iter().map(|a| rational_from_residue(a, &modulus)).collect::<Option<Vec<Q>>>())
            .collect::<Option<Vec<_>>>();
    }
    None
}

fn to_polys(c: &[Vec<Q>], vars: &Vars, var: usize) -> Vec<Polynomial> {
    c.iter()
        .map(|qs| {
            Polynomial::from_terms(
                vars,
                qs.iter().enumerate().filter(|(_, q)| !q.is_zero()).map(|(i, q)| {
                    let mut e = vec![0u32; vars.len()];
                    if !e.is_empty() {
                        e[var] = i as u32;
                    }
                    (e, q.clone())
                }),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_reconstruction() {
        let f = Fp(1_000_000_007);
        let xs = [1, 2, 3, 4, 5, 6, 7];
        // (t + 2) / (t^2 + 1)
        let ys: Vec<u64> = xs
            .iter()
            .map(|&x| f.mul(x + 2, f.inv(f.add(f.mul(x, x), 1))))
            .collect();
        let u = f.interpolate(&xs, &ys);
        let mut m = vec![1u64];
        for &x in &xs {
            m = f.mul_poly(&m, &[f.sub(0, x), 1]);
        }
        let (r, q) = f.rational_reconstruct(&u, &m, 3).unwrap();
        assert_eq!(r, vec![2, 1]);
        assert_eq!(q, vec![1, 0, 1]);
    }

    #[test]
    fn rational_numbers_from_residues() {
        let m = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64);
        let q = Q::new(BigInt::from(-12345), BigInt::from(678));
        let inv = |d: &BigInt| {
            let e = d.extended_gcd(&m);
            e.x.mod_floor(&m)
        };
        let u = (q.numer() * inv(q.denom())).mod_floor(&m);
        assert_eq!(rational_from_residue(&u, &m), Some(q));
    }

    #[test]
    fn primes_are_prime() {
        let ps: Vec<u64> = Primes((1 << 62) + 1).take(3).collect();
        assert!(ps.iter().all(|&p| is_prime(p) && p < 1 << 62));
        assert!(!is_prime(1_000_000_007 * 3));
    }
}
