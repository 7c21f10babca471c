//! The Γ (galaxy) and Δ (Latin square) families on the 6×6 array, the
//! embedded published designs, and semi-Latin square utilities.
//!
//! Variety `6·(row-1) + column` sits in cell `(row, column)` of the array.
//! Replicate order: for `RC` designs the columns replicate comes first, then
//! rows, then galaxies or Latin squares; `R` and `C` designs start with
//! their single extra replicate.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::design::{Block, BlockDesign, Replicate, ResolvableDesign};
use crate::efficiency::{a_value, a_value_block_design};
use crate::error::FamilyError;
use crate::format::read_design;
use crate::sylvester::{galaxy, sylvester_graph};

pub const V: usize = 36;
pub const K: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Plain,
    /// Plus a rows replicate.
    R,
    /// Plus a columns replicate.
    C,
    /// Plus both.
    RC,
}

impl Variant {
    /// Replicates contributed by rows and columns.
    pub fn extra(self) -> usize {
        match self {
            Variant::Plain => 0,
            Variant::R | Variant::C => 1,
            Variant::RC => 2,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Variant::Plain => "",
            Variant::R => "-r",
            Variant::C => "-c",
            Variant::RC => "-rc",
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "" | "plain" | "none" => Ok(Variant::Plain),
            "r" => Ok(Variant::R),
            "c" => Ok(Variant::C),
            "rc" => Ok(Variant::RC),
            other => Err(format!("unknown variant `{other}` (plain, R, C, RC)")),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Plain => "plain",
            Variant::R => "R",
            Variant::C => "C",
            Variant::RC => "RC",
        })
    }
}

pub fn rows_replicate() -> Replicate {
    Replicate::new((0..6).map(|i| Block::new((0..6).map(|j| 6 * i + j).collect())).collect())
}

pub fn columns_replicate() -> Replicate {
    Replicate::new((0..6).map(|j| Block::new((0..6).map(|i| 6 * i + j).collect())).collect())
}

/// Replicate whose blocks are the starfish centered on one column (1-based).
pub fn galaxy_replicate(column: u8) -> Replicate {
    galaxy(sylvester_graph(), column).expect("the Sylvester graph has galaxies").to_replicate()
}

fn check_range(r: usize, variant: Variant) -> Result<(), FamilyError> {
    let min = variant.extra();
    let max = 6 + variant.extra();
    if r < min || r > max {
        return Err(FamilyError::OutOfRange { r, min, max });
    }
    Ok(())
}

fn assemble(base: Vec<Replicate>, variant: Variant, label: String) -> ResolvableDesign {
    let mut reps = match variant {
        Variant::Plain => vec![],
        Variant::R => vec![rows_replicate()],
        Variant::C => vec![columns_replicate()],
        Variant::RC => vec![columns_replicate(), rows_replicate()],
    };
    reps.extend(base);
    ResolvableDesign::from_parts(V, K, reps, label)
}

/// Γ designs: galaxies from columns d1, d2, ... plus rows and/or columns.
/// `r` counts all replicates.
pub fn gamma(r: usize, variant: Variant) -> Result<ResolvableDesign, FamilyError> {
    check_range(r, variant)?;
    let galaxies = (1..=(r - variant.extra()) as u8).map(galaxy_replicate).collect();
    Ok(assemble(galaxies, variant, format!("gamma{}-{r}", variant.suffix())))
}

/// A Latin square of order 6 on the array, symbols `1..=6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatinSquare6 {
    grid: [[u8; 6]; 6],
}

impl LatinSquare6 {
    pub fn new(grid: [[u8; 6]; 6]) -> Option<Self> {
        let full = 0b11_1111u8;
        let ok = (0..6).all(|i| {
            let row = (0..6).try_fold(0u8, |m, j| {
                let s = grid[i][j];
                (1..=6).contains(&s).then(|| m | 1 << (s - 1))
            });
            let col = (0..6).try_fold(0u8, |m, j| {
                let s = grid[j][i];
                (1..=6).contains(&s).then(|| m | 1 << (s - 1))
            });
            row == Some(full) && col == Some(full)
        });
        ok.then_some(LatinSquare6 { grid })
    }

    /// Read a square off a replicate: the symbol of a cell is the position of its block.
    pub fn from_replicate(rep: &Replicate) -> Option<Self> {
        if rep.blocks().len() != 6 {
            return None;
        }
        let mut grid = [[0u8; 6]; 6];
        for (b, block) in rep.blocks().iter().enumerate() {
            for &x in block.members() {
                if x >= V {
                    return None;
                }
                grid[x / 6][x % 6] = b as u8 + 1;
            }
        }
        LatinSquare6::new(grid)
    }

    pub fn grid(&self) -> &[[u8; 6]; 6] {
        &self.grid
    }

    pub fn to_replicate(&self) -> Replicate {
        Replicate::new(
            (1..=6u8)
                .map(|s| Block::new((0..V).filter(|&x| self.grid[x / 6][x % 6] == s).collect()))
                .collect(),
        )
    }
}

/// The six Latin squares behind the Δ family, in order `L1..L6`.
pub fn published_latin_squares() -> &'static [LatinSquare6; 6] {
    static SQUARES: OnceLock<[LatinSquare6; 6]> = OnceLock::new();
    SQUARES.get_or_init(|| {
        let d = embedded_delta_rc_8();
        std::array::from_fn(|i| {
            LatinSquare6::from_replicate(&d.replicates()[i + 2])
                .expect("replicates 3..8 of the embedded design are Latin squares")
        })
    })
}

/// Δ designs from an arbitrary list of Latin squares.
pub fn delta_from_squares(
    squares: &[LatinSquare6],
    variant: Variant,
    label: impl Into<String>,
) -> ResolvableDesign {
    assemble(squares.iter().map(LatinSquare6::to_replicate).collect(), variant, label.into())
}

/// Δ designs: Latin squares `L1..`, plus rows and/or columns.
pub fn delta(r: usize, variant: Variant) -> Result<ResolvableDesign, FamilyError> {
    check_range(r, variant)?;
    let squares = &published_latin_squares()[..r - variant.extra()];
    Ok(delta_from_squares(squares, variant, format!("delta{}-{r}", variant.suffix())))
}

/// A `(6×6)/r` semi-Latin square: `cells[i][j]` holds `r` symbols (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiLatinSquare {
    pub r: usize,
    pub cells: Vec<Vec<Vec<usize>>>,
}

/// Check whether the dual of a 36-variety design, with dual block `6i + j`
/// at array position `(i, j)`, has every symbol once per row and column.
pub fn is_semi_latin(dual: &BlockDesign) -> Result<Option<SemiLatinSquare>, FamilyError> {
    let Some(r) = dual.block_size() else {
        return Err(FamilyError::Shape { v: V, k: K });
    };
    if dual.blocks().len() != V || dual.v() != 6 * r {
        return Err(FamilyError::Shape { v: V, k: K });
    }
    let symbols = dual.v();
    let at = |i: usize, j: usize| &dual.blocks()[6 * i + j];
    for line in 0..6 {
        let mut in_row = vec![0u32; symbols];
        let mut in_col = vec![0u32; symbols];
        for other in 0..6 {
            for &s in at(line, other).members() {
                in_row[s] += 1;
            }
            for &s in at(other, line).members() {
                in_col[s] += 1;
            }
        }
        if in_row.iter().chain(&in_col).any(|&c| c != 1) {
            return Ok(None);
        }
    }
    let cells = (0..6)
        .map(|i| (0..6).map(|j| at(i, j).members().to_vec()).collect())
        .collect();
    Ok(Some(SemiLatinSquare { r, cells }))
}

/// Both sides of `35/A = 6(6 - r) + (6r - 1)/A'`, where `A'` belongs to the dual.
#[derive(Clone, Debug, PartialEq)]
pub struct RoyCheck {
    pub a: BigRational,
    pub a_dual: BigRational,
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub residual: BigRational,
}

pub fn roy_check(design: &ResolvableDesign) -> Result<RoyCheck, FamilyError> {
    if design.v() != V || design.k() != K {
        return Err(FamilyError::Shape { v: V, k: K });
    }
    let r = design.r() as i64;
    let a = a_value(design)?;
    let dual = design.dual()?;
    let a_dual = a_value_block_design(&dual.design)?;
    let int = |x: i64| BigRational::from(BigInt::from(x));
    let lhs = int(35) / &a;
    let rhs = int(6 * (6 - r)) + int(6 * r - 1) / &a_dual;
    let residual = &lhs - &rhs;
    Ok(RoyCheck { a, a_dual, lhs, rhs, residual })
}

/// A of the plain Δ design built from every `r`-subset of `L1..L6`,
/// subsets as 0-based index lists in lexicographic order.
pub fn latin_subset_a_values(r: usize) -> Vec<(Vec<usize>, BigRational)> {
    let subsets = k_subsets(6, r);
    let squares = published_latin_squares();
    subsets
        .into_par_iter()
        .filter_map(|subset| {
            let chosen: Vec<LatinSquare6> = subset.iter().map(|&i| squares[i]).collect();
            let design = delta_from_squares(&chosen, Variant::Plain, "subset");
            a_value(&design).ok().map(|a| (subset, a))
        })
        .collect()
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect::<Vec<_>>())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect()
}

const GAMMA_RC_8: &str = include_str!("../data/gamma-rc-8.txt");
const THETA_8: &str = include_str!("../data/theta-8.txt");
const DELTA_RC_8: &str = include_str!("../data/delta-rc-8.txt");
const THETA_4_SEARCH: &str = include_str!("../data/theta-4-search.txt");

pub fn embedded_gamma_rc_8() -> ResolvableDesign {
    read_design(GAMMA_RC_8).expect("embedded design parses")
}

pub fn embedded_theta_8() -> ResolvableDesign {
    read_design(THETA_8).expect("embedded design parses")
}

pub fn embedded_delta_rc_8() -> ResolvableDesign {
    read_design(DELTA_RC_8).expect("embedded design parses")
}

/// A design for `r = 4` found by annealing (seed 0, restart 0, 2000 moves
/// per temperature, initial temperature 0.2), with `A = 0.8393`.
pub fn cached_theta_4_search() -> ResolvableDesign {
    read_design(THETA_4_SEARCH).expect("cached design parses")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Published design, stored as data.
    Embedded,
    /// Built by a constructor.
    Constructed(String),
    /// Found by the annealing search and stored as data.
    Search(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Embedded => f.write_str("embedded data"),
            Provenance::Constructed(how) => write!(f, "constructed: {how}"),
            Provenance::Search(how) => write!(f, "search: {how}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub design: ResolvableDesign,
    pub provenance: Provenance,
}

/// Family kind in a catalog name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Gamma,
    Delta,
}

/// Build a design from its kebab-case name: `gamma-6`, `gamma-rc-8`,
/// `delta-c-4`, `theta-8`, `theta-4-search`, ... The `-8` RC designs and
/// the theta designs come from the embedded data.
pub fn lookup(name: &str) -> Result<ResolvableDesign, FamilyError> {
    let unknown = || FamilyError::UnknownName(name.to_string());
    match name {
        "theta-8" => return Ok(embedded_theta_8()),
        "gamma-rc-8" => return Ok(embedded_gamma_rc_8()),
        "delta-rc-8" => return Ok(embedded_delta_rc_8()),
        "theta-4-search" => return Ok(cached_theta_4_search()),
        _ => {}
    }
    let parts: Vec<&str> = name.split('-').collect();
    let (family, variant, r) = match parts.as_slice() {
        [f, r] => (*f, Variant::Plain, *r),
        [f, v, r] => (*f, v.parse::<Variant>().map_err(|_| unknown())?, *r),
        _ => return Err(unknown()),
    };
    let r: usize = r.parse().map_err(|_| unknown())?;
    match family {
        "gamma" => gamma(r, variant),
        "delta" => delta(r, variant),
        _ => Err(unknown()),
    }
}

/// Published designs plus every connected family member.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut out = vec![
        CatalogEntry {
            name: "theta-8".into(),
            design: embedded_theta_8(),
            provenance: Provenance::Embedded,
        },
        CatalogEntry {
            name: "gamma-rc-8".into(),
            design: embedded_gamma_rc_8(),
            provenance: Provenance::Embedded,
        },
        CatalogEntry {
            name: "delta-rc-8".into(),
            design: embedded_delta_rc_8(),
            provenance: Provenance::Embedded,
        },
        CatalogEntry {
            name: "theta-4-search".into(),
            design: cached_theta_4_search(),
            provenance: Provenance::Search("annealing, seed 0, restart 0".into()),
        },
    ];
    for (family, prefix, recipe) in
        [(Family::Gamma, "gamma", "galaxies"), (Family::Delta, "delta", "Latin squares")]
    {
        for variant in [Variant::Plain, Variant::R, Variant::C, Variant::RC] {
            for r in 2..=6 + variant.extra() {
                let name = format!("{prefix}{}-{r}", variant.suffix());
                if out.iter().any(|e| e.name == name) {
                    continue;
                }
                let design = match family {
                    Family::Gamma => gamma(r, variant),
                    Family::Delta => delta(r, variant),
                }
                .expect("in range");
                let how = format!(
                    "{} {recipe}{}",
                    r - variant.extra(),
                    match variant {
                        Variant::Plain => "",
                        Variant::R => " + rows",
                        Variant::C => " + columns",
                        Variant::RC => " + columns + rows",
                    }
                );
                out.push(CatalogEntry { name, design, provenance: Provenance::Constructed(how) });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::round_decimal;

    #[test]
    fn rows_and_columns_match_embedded_layout() {
        let fig = embedded_gamma_rc_8();
        assert_eq!(&fig.replicates()[0], &columns_replicate());
        assert_eq!(&fig.replicates()[1], &rows_replicate());
    }

    #[test]
    fn gamma_rc_8_is_the_embedded_design() {
        let built = gamma(8, Variant::RC).unwrap();
        assert_eq!(built.replicates(), embedded_gamma_rc_8().replicates());
    }

    #[test]
    fn delta_rc_8_is_the_embedded_design() {
        let built = delta(8, Variant::RC).unwrap();
        assert_eq!(built.replicates(), embedded_delta_rc_8().replicates());
    }

    #[test]
    fn ranges() {
        assert!(gamma(9, Variant::RC).is_err());
        assert!(gamma(1, Variant::RC).is_err());
        assert!(gamma(7, Variant::Plain).is_err());
        assert!(delta(8, Variant::C).is_err());
        assert_eq!(gamma(0, Variant::Plain).unwrap().r(), 0);
        assert!(gamma(1, Variant::Plain).unwrap().is_valid());
    }

    #[test]
    fn small_a_values() {
        let a = |d: ResolvableDesign| round_decimal(&a_value(&d).unwrap(), 4);
        assert_eq!(a(gamma(2, Variant::RC).unwrap()), "0.7778");
        assert_eq!(a(gamma(6, Variant::Plain).unwrap()), "0.8442");
        assert_eq!(a(delta(4, Variant::RC).unwrap()), "0.8393");
        assert_eq!(a(delta(6, Variant::Plain).unwrap()), "0.8442");
    }

    #[test]
    fn theta_first_block() {
        let t = embedded_theta_8();
        assert_eq!(t.replicates()[0].blocks()[0], Block::from_numbers([2, 29, 18, 33, 6, 17]));
    }

    #[test]
    fn semi_latin_duals() {
        let d6 = delta(6, Variant::Plain).unwrap().dual().unwrap();
        let sls = is_semi_latin(&d6.design).unwrap().expect("semi-Latin");
        assert_eq!(sls.r, 6);
        assert!(d6.resolution.is_resolvable());

        let lattice = gamma(2, Variant::RC).unwrap().dual().unwrap();
        assert_eq!(is_semi_latin(&lattice.design).unwrap(), None);

        let g = gamma(3, Variant::Plain).unwrap().dual().unwrap();
        assert!(is_semi_latin(&g.design).unwrap().is_some());
    }

    #[test]
    fn repeated_symbol_in_a_row_is_not_semi_latin() {
        // a rows replicate puts one dual symbol in every cell of an array row
        let squares = published_latin_squares();
        let d = delta_from_squares(&squares[..2], Variant::R, "x");
        assert_eq!(is_semi_latin(&d.dual().unwrap().design).unwrap(), None);
    }

    #[test]
    fn roy_identity_small() {
        let check = roy_check(&delta(2, Variant::Plain).unwrap()).unwrap();
        assert_eq!(check.residual, BigRational::from(BigInt::from(0)));
        let six = roy_check(&delta(6, Variant::Plain).unwrap()).unwrap();
        assert_eq!(six.a, six.a_dual);
    }

    #[test]
    fn lookup_names() {
        assert_eq!(lookup("gamma-rc-5").unwrap(), gamma(5, Variant::RC).unwrap());
        assert_eq!(lookup("delta-4").unwrap(), delta(4, Variant::Plain).unwrap());
        assert!(lookup("theta-4").is_err());
        assert!(lookup("gamma-x-3").is_err());
        assert!(catalog().iter().all(|e| e.design.is_valid()));
    }
}
