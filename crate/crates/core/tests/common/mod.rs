//! Independent oracles for the integration tests. None of these go through
//! the characteristic polynomial used by the library.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use sixsquare::design::{BlockDesign, ConcurrenceMatrix, ResolvableDesign};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `I - Λ/(rk)` as exact rationals.
pub fn information_matrix(design: &ResolvableDesign) -> Vec<Vec<BigRational>> {
    information_matrix_of(&design.concurrence_matrix().unwrap())
}

fn information_matrix_of(c: &ConcurrenceMatrix) -> Vec<Vec<BigRational>> {
    let v = c.v();
    let s = (c.r() * c.k()) as i64;
    (0..v)
        .map(|i| {
            (0..v)
                .map(|j| int((i == j) as i64) - rat(c.get(i, j) as i64, s))
                .collect()
        })
        .collect()
}

/// Gauss-Jordan inverse over the rationals; `None` if singular.
pub fn inverse(mut a: Vec<Vec<BigRational>>) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    let t = &f * &a[col][j];
                    a[r][j] -= t;
                    let t = &f * &inv[col][j];
                    inv[r][j] -= t;
                }
            }
        }
    }
    Some(inv)
}

pub fn rank(mut a: Vec<Vec<BigRational>>) -> usize {
    let (rows, cols) = (a.len(), a.first().map_or(0, Vec::len));
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        for r in rank + 1..rows {
            if !a[r][col].is_zero() {
                let f = &a[r][col] / &a[rank][col];
                for j in col..cols {
                    let t = &f * &a[rank][j];
                    a[r][j] -= t;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `A = (v-1) / trace(M⁺)` with `trace(M⁺) = trace((M + J/v)⁻¹) - 1`.
pub fn a_oracle(design: &ResolvableDesign) -> Option<BigRational> {
    a_oracle_concurrence(&design.concurrence_matrix().unwrap())
}

pub fn a_oracle_block(design: &BlockDesign) -> Option<BigRational> {
    a_oracle_concurrence(&design.concurrence_matrix().unwrap())
}

fn a_oracle_concurrence(c: &ConcurrenceMatrix) -> Option<BigRational> {
    let v = c.v();
    let mut m = information_matrix_of(c);
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x += rat(1, v as i64);
        }
    }
    let q = inverse(m)?;
    let trace = (0..v).fold(BigRational::zero(), |acc, i| acc + &q[i][i]) - int(1);
    Some(int(v as i64 - 1) / trace)
}

/// Multiplicity of `theta` as an eigenvalue of `M`: `v - rank(M - θI)`.
pub fn eigen_multiplicity(design: &ResolvableDesign, theta: &BigRational) -> usize {
    let mut m = information_matrix(design);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= theta;
    }
    design.v() - rank(m)
}

/// Count 1-factorizations of K6 by testing every 5-set of perfect matchings.
pub fn brute_force_one_factorization_count() -> usize {
    let points = [0u8, 1, 2, 3, 4, 5];
    let mut matchings: Vec<u16> = Vec::new();
    let edge = |a: u8, b: u8| -> u16 {
        let (a, b) = (a.min(b), a.max(b));
        // index of {a,b} among the 15 pairs
        let idx = (0..a).map(|i| 5 - i as u16).sum::<u16>() + (b - a - 1) as u16;
        1 << idx
    };
    for &b in &points[1..] {
        let rest: Vec<u8> = points.iter().copied().filter(|&p| p != 0 && p != b).collect();
        for &c in &rest[1..] {
            let last: Vec<u8> = rest.iter().copied().filter(|&p| p != rest[0] && p != c).collect();
            matchings.push(edge(0, b) | edge(rest[0], c) | edge(last[0], last[1]));
        }
    }
    assert_eq!(matchings.len(), 15);
    let mut count = 0;
    for mask in 0u32..1 << 15 {
        if mask.count_ones() != 5 {
            continue;
        }
        let mut union = 0u16;
        let mut disjoint = true;
        for (i, &m) in matchings.iter().enumerate() {
            if mask >> i & 1 == 1 {
                disjoint &= union & m == 0;
                union |= m;
            }
        }
        if disjoint && union == (1 << 15) - 1 {
            count += 1;
        }
    }
    count
}
