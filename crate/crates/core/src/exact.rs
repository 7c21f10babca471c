//! Exact integer characteristic polynomials and decimal rounding of rationals.
//!
//! The characteristic polynomial of an integer matrix is computed modulo a
//! set of 62-bit primes (Hessenberg reduction over each prime field) and
//! lifted with the Chinese remainder theorem. Enough primes are used to cover
//! a Gershgorin bound on the coefficients, so the result is exact.

use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Dense integer polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly(pub Vec<BigInt>);

impl IntPoly {
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.0.get(i).cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.0.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Divide by `(x - root)`; returns `None` if `root` is not a root.
    pub fn deflate(&self, root: &BigInt) -> Option<IntPoly> {
        let n = self.0.len();
        if n < 2 {
            return None;
        }
        let mut quotient = vec![BigInt::zero(); n - 1];
        let mut carry = BigInt::zero();
        for i in (1..n).rev() {
            carry = &self.0[i] + carry * root;
            quotient[i - 1] = carry.clone();
        }
        let remainder = &self.0[0] + carry * root;
        remainder.is_zero().then_some(IntPoly(quotient))
    }

    /// Number of leading zero coefficients at `x = 0`, and the polynomial divided by that power of `x`.
    pub fn strip_zero_roots(&self) -> (usize, IntPoly) {
        let zeros = self.0.iter().take_while(|c| c.is_zero()).count();
        (zeros, IntPoly(self.0[zeros..].to_vec()))
    }
}

/// Characteristic polynomial `det(xI - A)` of an `n × n` row-major integer matrix.
pub fn charpoly(matrix: &[i64], n: usize) -> IntPoly {
    assert_eq!(matrix.len(), n * n);
    if n == 0 {
        return IntPoly(vec![BigInt::one()]);
    }
    let row_bound = (0..n)
        .map(|i| matrix[i * n..(i + 1) * n].iter().map(|x| x.unsigned_abs() as u128).sum::<u128>())
        .max()
        .unwrap_or(0);
    // |c_i| <= C(n, i) R^(n-i) <= (1 + R)^n; one extra bit for the sign.
    let bits = (n as f64) * ((1 + row_bound) as f64).log2() + 2.0;
    let primes = primes();
    let needed = (bits / 61.0).ceil() as usize + 1;
    assert!(needed <= primes.len(), "coefficient bound exceeds the prime table");

    let residues: Vec<Vec<u64>> =
        primes[..needed].iter().map(|&p| charpoly_mod(matrix, n, p)).collect();

    let mut coeffs = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut value = BigInt::zero();
        let mut modulus = BigInt::one();
        for (residue, &p) in residues.iter().zip(&primes[..needed]) {
            let a = residue[i];
            let pb = BigInt::from(p);
            let current = value.mod_floor(&pb).to_u64_digits().1.first().copied().unwrap_or(0);
            let m_mod = modulus.mod_floor(&pb).to_u64_digits().1.first().copied().unwrap_or(0);
            let diff = sub_mod(a, current, p);
            let t = mul_mod(diff, inv_mod(m_mod, p), p);
            value += &modulus * BigInt::from(t);
            modulus *= pb;
        }
        let half: BigInt = &modulus >> 1;
        if value > half {
            value -= &modulus;
        }
        coeffs.push(value);
    }
    IntPoly(coeffs)
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + (p - b)
    }
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn to_residue(x: i64, p: u64) -> u64 {
    let m = (x as i128).rem_euclid(p as i128);
    m as u64
}

/// Characteristic polynomial modulo the prime `p`, ascending coefficients.
fn charpoly_mod(matrix: &[i64], n: usize, p: u64) -> Vec<u64> {
    let mut h: Vec<u64> = matrix.iter().map(|&x| to_residue(x, p)).collect();
    let at = |i: usize, j: usize| i * n + j;

    // Reduce to upper Hessenberg form by similarity transforms.
    for m in 1..n.saturating_sub(1) {
        let Some(pivot) = (m..n).find(|&i| h[at(i, m - 1)] != 0) else {
            continue;
        };
        if pivot != m {
            for j in 0..n {
                h.swap(at(pivot, j), at(m, j));
            }
            for i in 0..n {
                h.swap(at(i, pivot), at(i, m));
            }
        }
        let inv = inv_mod(h[at(m, m - 1)], p);
        for i in m + 1..n {
            let u = mul_mod(h[at(i, m - 1)], inv, p);
            if u == 0 {
                continue;
            }
            for j in 0..n {
                let t = mul_mod(u, h[at(m, j)], p);
                h[at(i, j)] = sub_mod(h[at(i, j)], t, p);
            }
            for j in 0..n {
                let t = mul_mod(u, h[at(j, i)], p);
                h[at(j, m)] = (h[at(j, m)] + t) % p;
            }
        }
    }

    // p_0 = 1; p_m = (x - h_mm) p_{m-1} - sum_i h_{i,m} (prod_{j=i+1..m} h_{j,j-1}) p_{i-1}
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for m in 0..n {
        let prev = &polys[m];
        let mut next = vec![0u64; m + 2];
        for (d, &c) in prev.iter().enumerate() {
            next[d + 1] = (next[d + 1] + c) % p;
            next[d] = sub_mod(next[d], mul_mod(c, h[at(m, m)], p), p);
        }
        let mut t = 1u64;
        for i in (0..m).rev() {
            t = mul_mod(t, h[at(i + 1, i)], p);
            let coef = mul_mod(t, h[at(i, m)], p);
            if coef == 0 {
                continue;
            }
            for (d, &c) in polys[i].iter().enumerate() {
                next[d] = sub_mod(next[d], mul_mod(coef, c, p), p);
            }
        }
        polys.push(next);
    }
    polys.pop().unwrap()
}

/// Descending 62-bit primes.
fn primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut out = Vec::new();
        let mut candidate = (1u64 << 62) - 1;
        while out.len() < 64 {
            if is_prime(candidate) {
                out.push(candidate);
            }
            candidate -= 2;
        }
        out
    })
}

// Deterministic Miller-Rabin for 64-bit integers.
fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Decimal string of `q` rounded half away from zero to `places` decimals.
pub fn round_decimal(q: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let num: BigInt = q.numer().abs() * &scale * 2 + q.denom();
    let den = q.denom() * 2;
    let rounded = num.div_floor(&den);
    let negative = q.numer().sign() == Sign::Minus && !rounded.is_zero();
    let digits = rounded.to_string();
    let digits = if digits.len() <= places {
        format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(int_part);
    if places > 0 {
        out.push('.');
        out.push_str(frac_part);
    }
    out
}

/// Nearest `f64` to a rational.
pub fn to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}
