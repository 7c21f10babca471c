//! Canonical efficiency factors and the A-criterion.
//!
//! For an equireplicate design with replication `r` and block size `k`, the
//! scaled information matrix is `I - Λ/(rk)`. It is held here as the integer
//! matrix `N = rk·I - Λ` together with the scale `rk`, so the exact work is
//! done on integers: the eigenvalues of `N` are `rk` times the efficiency
//! factors, and its characteristic polynomial gives `A` directly.
//!
//! If `q(x) = x^(v-1) + ... + q1·x + q0` is the characteristic polynomial of
//! `N` with the forced zero root removed, then the sum of reciprocal nonzero
//! eigenvalues is `-q1/q0`, hence `A = -(v-1)·q0 / (rk·q1)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::design::{BlockDesign, ConcurrenceMatrix, ResolvableDesign};
use crate::error::EfficiencyError;
use crate::exact::{self, IntPoly};

/// `I - Λ/(rk)`, stored as `rk·I - Λ` over the common denominator `rk`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InformationMatrix {
    v: usize,
    scale: u64,
    numerators: Vec<i64>,
}

impl InformationMatrix {
    pub fn from_concurrence(c: &ConcurrenceMatrix) -> Self {
        let v = c.v();
        let scale = (c.r() * c.k()) as u64;
        let numerators = (0..v * v)
            .map(|idx| {
                let (i, j) = (idx / v, idx % v);
                let diag = if i == j { scale as i64 } else { 0 };
                diag - c.get(i, j) as i64
            })
            .collect();
        InformationMatrix { v, scale, numerators }
    }

    pub fn v(&self) -> usize {
        self.v
    }

    /// The common denominator `rk`.
    pub fn scale(&self) -> u64 {
        self.scale
    }

    /// Row-major `rk·I - Λ`.
    pub fn numerators(&self) -> &[i64] {
        &self.numerators
    }

    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(self.numerators[i * self.v + j].into(), self.scale.into())
    }

    pub fn row_sum(&self, i: usize) -> BigRational {
        let s: i64 = self.numerators[i * self.v..(i + 1) * self.v].iter().sum();
        BigRational::new(s.into(), self.scale.into())
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let s = self.scale as f64;
        DMatrix::from_row_iterator(self.v, self.v, self.numerators.iter().map(|&x| x as f64 / s))
    }

    /// Characteristic polynomial of `rk·I - Λ`.
    pub fn characteristic_polynomial(&self) -> ScaledPolynomial {
        ScaledPolynomial { scale: self.scale, poly: exact::charpoly(&self.numerators, self.v) }
    }
}

/// Characteristic polynomial of `scale · M`, where `M` is a scaled information matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledPolynomial {
    pub scale: u64,
    pub poly: IntPoly,
}

impl ScaledPolynomial {
    /// Coefficients of `det(xI - M)` itself: `c_i · scale^(i - v)`.
    pub fn unscaled_coefficients(&self) -> Vec<BigRational> {
        let n = self.poly.degree();
        let s = BigInt::from(self.scale);
        self.poly
            .0
            .iter()
            .enumerate()
            .map(|(i, c)| BigRational::new(c.clone(), s.pow((n - i) as u32)))
            .collect()
    }

    /// Same spectrum as `other` (as matrices `M`, not `scale · M`).
    pub fn same_roots_as(&self, other: &ScaledPolynomial) -> bool {
        if self.scale == other.scale {
            self.poly == other.poly
        } else {
            self.unscaled_coefficients() == other.unscaled_coefficients()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FactorValue {
    Exact(BigRational),
    /// Root of an irreducible factor of degree > 1, to double precision.
    Approximate(f64),
}

impl FactorValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            FactorValue::Exact(q) => exact::to_f64(q),
            FactorValue::Approximate(x) => *x,
        }
    }
}

impl std::fmt::Display for FactorValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FactorValue::Exact(q) => write!(f, "{q}"),
            FactorValue::Approximate(x) => write!(f, "~{}", format_sig(*x, 12)),
        }
    }
}

fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyFactor {
    pub value: FactorValue,
    pub multiplicity: usize,
}

/// Nonzero canonical efficiency factors with multiplicities, largest first,
/// and their harmonic mean when the design is connected.
#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencySpectrum {
    pub factors: Vec<EfficiencyFactor>,
    pub a_value: Option<BigRational>,
    pub connected: bool,
    /// Multiplicity of the zero eigenvalue (1 for a connected design).
    pub zero_multiplicity: usize,
}

impl EfficiencySpectrum {
    pub fn total_multiplicity(&self) -> usize {
        self.factors.iter().map(|f| f.multiplicity).sum()
    }

    pub fn is_exact(&self) -> bool {
        self.factors.iter().all(|f| matches!(f.value, FactorValue::Exact(_)))
    }

    /// `(value, multiplicity)` for the exact part of the spectrum.
    pub fn exact_factors(&self) -> Vec<(BigRational, usize)> {
        self.factors
            .iter()
            .filter_map(|f| match &f.value {
                FactorValue::Exact(q) => Some((q.clone(), f.multiplicity)),
                FactorValue::Approximate(_) => None,
            })
            .collect()
    }
}

/// Exact spectrum of a scaled information matrix.
pub fn efficiency_spectrum_exact(m: &InformationMatrix) -> EfficiencySpectrum {
    let cp = m.characteristic_polynomial();
    let (zeros, reduced) = cp.poly.strip_zero_roots();
    let v = m.v();
    let connected = zeros == 1;
    let a_value = if connected && v > 1 {
        let q0 = reduced.coeff(0);
        let q1 = reduced.coeff(1);
        let num = -BigInt::from(v as u64 - 1) * q0;
        let den = BigInt::from(m.scale()) * q1;
        Some(BigRational::new(num, den))
    } else {
        None
    };

    // Eigenvalues of rk·M are algebraic integers in [0, rk]; rational ones are integers.
    let mut residual = reduced;
    let mut factors = Vec::new();
    for theta in (1..=m.scale()).rev() {
        let root = BigInt::from(theta);
        let mut multiplicity = 0;
        while let Some(q) = residual.deflate(&root) {
            residual = q;
            multiplicity += 1;
        }
        if multiplicity > 0 {
            factors.push(EfficiencyFactor {
                value: FactorValue::Exact(BigRational::new(root, m.scale().into())),
                multiplicity,
            });
        }
    }
    if residual.degree() > 0 {
        factors.extend(approximate_residual_factors(m, &factors, zeros));
        factors.sort_by(|a, b| b.value.to_f64().total_cmp(&a.value.to_f64()));
    }
    EfficiencySpectrum { factors, a_value, connected, zero_multiplicity: zeros }
}

// Irrational part of the spectrum, taken from a floating eigendecomposition
// after removing the zero eigenvalues and the exact rational ones.
fn approximate_residual_factors(
    m: &InformationMatrix,
    exact: &[EfficiencyFactor],
    zeros: usize,
) -> Vec<EfficiencyFactor> {
    let mut eig: Vec<f64> = SymmetricEigen::new(m.to_f64()).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig.drain(..zeros.min(eig.len()));
    for f in exact {
        let target = f.value.to_f64();
        for _ in 0..f.multiplicity {
            if let Some((idx, _)) = eig
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
            {
                eig.remove(idx);
            }
        }
    }
    let mut out: Vec<EfficiencyFactor> = Vec::new();
    for x in eig {
        match out.last_mut() {
            Some(last) if (last.value.to_f64() - x).abs() < 1e-9 => last.multiplicity += 1,
            _ => out.push(EfficiencyFactor { value: FactorValue::Approximate(x), multiplicity: 1 }),
        }
    }
    out
}

pub fn information_matrix(c: &ConcurrenceMatrix) -> InformationMatrix {
    InformationMatrix::from_concurrence(c)
}

/// Spectrum of a resolvable design.
pub fn spectrum(design: &ResolvableDesign) -> Result<EfficiencySpectrum, EfficiencyError> {
    if design.r() == 0 {
        return Err(EfficiencyError::Empty);
    }
    let c = design.concurrence_matrix()?;
    Ok(efficiency_spectrum_exact(&InformationMatrix::from_concurrence(&c)))
}

/// Exact A-criterion of a connected resolvable design.
pub fn a_value(design: &ResolvableDesign) -> Result<BigRational, EfficiencyError> {
    spectrum(design)?.a_value.ok_or(EfficiencyError::Disconnected)
}

/// Exact A-criterion of an equireplicate, proper block design (such as a dual).
pub fn a_value_block_design(design: &BlockDesign) -> Result<BigRational, EfficiencyError> {
    if design.blocks().is_empty() {
        return Err(EfficiencyError::Empty);
    }
    let c = design.concurrence_matrix()?;
    efficiency_spectrum_exact(&InformationMatrix::from_concurrence(&c))
        .a_value
        .ok_or(EfficiencyError::Disconnected)
}

/// Eigenvalues of `I - Λ/(rk)` in ascending order, in floating point.
pub fn float_eigenvalues(c: &ConcurrenceMatrix) -> Vec<f64> {
    let m = InformationMatrix::from_concurrence(c).to_f64();
    let mut eig: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

const FLOAT_ZERO: f64 = 1e-9;

/// A from a floating-point symmetric eigendecomposition; an independent
/// check on [`a_value`].
pub fn a_value_float_oracle(design: &ResolvableDesign) -> Result<f64, EfficiencyError> {
    if design.r() == 0 {
        return Err(EfficiencyError::Empty);
    }
    let c = design.concurrence_matrix()?;
    harmonic_mean_nonzero(&float_eigenvalues(&c))
}

fn harmonic_mean_nonzero(ascending: &[f64]) -> Result<f64, EfficiencyError> {
    let nonzero = &ascending[1..];
    if nonzero.first().is_none_or(|&x| x < FLOAT_ZERO) {
        return Err(EfficiencyError::Disconnected);
    }
    let sum: f64 = nonzero.iter().map(|x| 1.0 / x).sum();
    Ok(nonzero.len() as f64 / sum)
}

/// Average variance of a pairwise variety difference, `2σ²/(rA)`.
pub fn average_variance(a: &BigRational, r: usize, sigma2: f64) -> Result<f64, EfficiencyError> {
    if !a.is_positive() {
        return Err(EfficiencyError::NonPositiveA);
    }
    Ok(2.0 * sigma2 / (r as f64 * exact::to_f64(a)))
}

/// Published upper bound on A for 36 varieties in blocks of six with eight
/// replicates. Its derivation is not available, so it is only compared against.
pub const REPORTED_UPPER_BOUND_R8: f64 = 0.854931;

/// A of a square lattice for `n²` varieties in `r` replicates (whether or not
/// the needed orthogonal Latin squares exist): the harmonic mean of
/// `(r-1)/r` with multiplicity `r(n-1)` and `1` with multiplicity `(n-1)(n+1-r)`.
pub fn square_lattice_bound(n: usize, r: usize) -> Result<BigRational, EfficiencyError> {
    if r < 2 || r > n + 1 {
        return Err(EfficiencyError::LatticeRange { n, r });
    }
    let n_big = BigInt::from(n as u64);
    let r_big = BigInt::from(r as u64);
    let total = &n_big * &n_big - 1;
    let low_mult = &r_big * (&n_big - 1);
    let one_mult = (&n_big - 1) * (&n_big + 1 - &r_big);
    // sum of reciprocals = low_mult · r/(r-1) + one_mult
    let recip = BigRational::new(low_mult * &r_big, &r_big - 1) + BigRational::from(one_mult);
    Ok(BigRational::from(total) / recip)
}

/// A-values after losing each single replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct Robustness {
    pub per_replicate: Vec<Result<BigRational, EfficiencyError>>,
    /// Minimum over the deletions that were kept.
    pub worst: Option<BigRational>,
    /// Exact arithmetic mean over the deletions that were kept.
    pub average: Option<BigRational>,
    pub disconnected: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RobustnessOptions {
    /// Leave disconnected deletions out of worst/average instead of failing them.
    pub exclude_disconnected: bool,
}

pub fn robustness(design: &ResolvableDesign) -> Result<Robustness, EfficiencyError> {
    robustness_with(design, RobustnessOptions::default())
}

pub fn robustness_with(
    design: &ResolvableDesign,
    options: RobustnessOptions,
) -> Result<Robustness, EfficiencyError> {
    design.ensure_valid()?;
    let per_replicate: Vec<_> = (0..design.r())
        .into_par_iter()
        .map(|i| a_value(&design.without_replicate(i)))
        .collect();
    let disconnected: Vec<usize> = per_replicate
        .iter()
        .enumerate()
        .filter(|(_, a)| a.is_err())
        .map(|(i, _)| i)
        .collect();
    let kept: Vec<&BigRational> = per_replicate.iter().filter_map(|a| a.as_ref().ok()).collect();
    let usable = !kept.is_empty() && (disconnected.is_empty() || options.exclude_disconnected);
    let (worst, average) = if usable {
        let worst = kept.iter().min().map(|&a| a.clone());
        let sum = kept.iter().fold(BigRational::zero(), |acc, &a| acc + a);
        (worst, Some(sum / BigRational::from(BigInt::from(kept.len()))))
    } else {
        (None, None)
    };
    Ok(Robustness { per_replicate, worst, average, disconnected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{Block, Replicate};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn lattice(r_extra: Option<[[usize; 6]; 6]>) -> ResolvableDesign {
        let rows = (0..6).map(|i| Block::new((0..6).map(|j| 6 * i + j).collect())).collect();
        let cols = (0..6).map(|j| Block::new((0..6).map(|i| 6 * i + j).collect())).collect();
        let mut reps = vec![Replicate::new(cols), Replicate::new(rows)];
        if let Some(ls) = r_extra {
            let blocks = (0..6)
                .map(|s| {
                    Block::new(
                        (0..36).filter(|&cell| ls[cell / 6][cell % 6] == s).collect(),
                    )
                })
                .collect();
            reps.push(Replicate::new(blocks));
        }
        ResolvableDesign::new(36, 6, reps, "lattice").unwrap()
    }

    fn cyclic_square() -> [[usize; 6]; 6] {
        let mut ls = [[0; 6]; 6];
        for (i, row) in ls.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (i + j) % 6;
            }
        }
        ls
    }

    #[test]
    fn lattice_information_matrix() {
        let c = lattice(None).concurrence_matrix().unwrap();
        let m = InformationMatrix::from_concurrence(&c);
        for i in 0..36 {
            assert_eq!(m.entry(i, i), rat(5, 6));
            assert!(m.row_sum(i).is_zero());
        }
    }

    #[test]
    fn two_replicate_lattice_a_value() {
        let s = spectrum(&lattice(None)).unwrap();
        assert!(s.connected);
        assert_eq!(s.a_value, Some(rat(7, 9)));
        assert_eq!(s.exact_factors(), vec![(rat(1, 1), 25), (rat(1, 2), 10)]);
    }

    #[test]
    fn lattice_bound_matches_constructed_lattices() {
        assert_eq!(square_lattice_bound(6, 2).unwrap(), a_value(&lattice(None)).unwrap());
        assert_eq!(
            square_lattice_bound(6, 3).unwrap(),
            a_value(&lattice(Some(cyclic_square()))).unwrap()
        );
        // other orders, using cyclic squares (orthogonal for prime n)
        for n in [3usize, 5, 7] {
            let design = prime_lattice(n, 4.min(n + 1));
            assert_eq!(square_lattice_bound(n, design.r()).unwrap(), a_value(&design).unwrap());
        }
    }

    // rows, columns and the squares L_m(i, j) = (m·i + j) mod n, m = 1..
    fn prime_lattice(n: usize, r: usize) -> ResolvableDesign {
        let v = n * n;
        let mut reps = vec![
            Replicate::new((0..n).map(|i| Block::new((0..n).map(|j| n * i + j).collect())).collect()),
            Replicate::new((0..n).map(|j| Block::new((0..n).map(|i| n * i + j).collect())).collect()),
        ];
        for m in 1..=r - 2 {
            reps.push(Replicate::new(
                (0..n)
                    .map(|s| Block::new((0..v).filter(|&c| (m * (c / n) + c % n) % n == s).collect()))
                    .collect(),
            ));
        }
        ResolvableDesign::new(v, n, reps, "").unwrap()
    }

    #[test]
    fn lattice_bound_values() {
        assert_eq!(exact::round_decimal(&square_lattice_bound(6, 4).unwrap(), 4), "0.8400");
        assert_eq!(square_lattice_bound(6, 7).unwrap(), rat(6, 7));
        assert!(square_lattice_bound(6, 1).is_err());
        assert!(square_lattice_bound(6, 8).is_err());
    }

    #[test]
    fn average_variance_examples() {
        assert!((average_variance(&rat(1, 1), 2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((average_variance(&rat(7, 9), 2, 1.0).unwrap() - 9.0 / 7.0).abs() < 1e-12);
        let a = rat(8549, 10000);
        assert!((average_variance(&a, 8, 1.0).unwrap() - 0.29243).abs() < 1e-4);
        assert_eq!(average_variance(&rat(0, 1), 2, 1.0), Err(EfficiencyError::NonPositiveA));
    }

    #[test]
    fn single_replicate_is_disconnected() {
        let d = lattice(None).select_replicates(&[0]);
        let s = spectrum(&d).unwrap();
        assert!(!s.connected);
        assert_eq!(s.zero_multiplicity, 6);
        assert_eq!(a_value(&d), Err(EfficiencyError::Disconnected));
        assert_eq!(a_value_float_oracle(&d), Err(EfficiencyError::Disconnected));
    }

    #[test]
    fn robustness_flags_disconnected_deletions() {
        let rob = robustness(&lattice(None)).unwrap();
        assert_eq!(rob.disconnected, vec![0, 1]);
        assert!(rob.worst.is_none() && rob.average.is_none());

        let three = lattice(Some(cyclic_square()));
        let rob = robustness(&three).unwrap();
        assert!(rob.disconnected.is_empty());
        assert_eq!(rob.worst, Some(rat(7, 9)));
        assert_eq!(rob.average, Some(rat(7, 9)));
    }

    #[test]
    fn irrational_factors_are_approximated() {
        // path-like design on 4 varieties: blocks {1,2},{2,3},{3,4},{4,1} is a cycle;
        // use a 5-cycle, whose eigenvalues involve sqrt(5)
        let blocks = (0..5).map(|i| Block::new(vec![i, (i + 1) % 5])).collect();
        let d = BlockDesign::new(5, blocks, "c5");
        let c = d.concurrence_matrix().unwrap();
        let s = efficiency_spectrum_exact(&InformationMatrix::from_concurrence(&c));
        assert!(s.connected);
        assert!(!s.is_exact());
        assert_eq!(s.total_multiplicity(), 4);
        let eig = float_eigenvalues(&c);
        let float_a = harmonic_mean_nonzero(&eig).unwrap();
        let exact_a = exact::to_f64(s.a_value.as_ref().unwrap());
        assert!((float_a - exact_a).abs() < 1e-12);
    }
}
