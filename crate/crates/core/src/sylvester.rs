//! The Sylvester graph on the 36 cells of a 6×6 array.
//!
//! Rows are the six points of K6, columns are its six 1-factorizations. Two
//! columns share exactly one 1-factor, and each duad `{a, b}` of that
//! 1-factor joins `(a, dᵢ)`–`(b, dⱼ)` and `(b, dᵢ)`–`(a, dⱼ)`.

use std::fmt;
use std::sync::OnceLock;

use crate::design::{Block, Replicate};
use crate::error::SylvesterError;

/// An edge `{a, b}` of K6, `1 <= a < b <= 6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Duad(u8, u8);

impl Duad {
    pub fn new(a: u8, b: u8) -> Self {
        assert!(a != b && (1..=6).contains(&a) && (1..=6).contains(&b), "bad duad {a}{b}");
        Duad(a.min(b), a.max(b))
    }

    pub fn points(self) -> (u8, u8) {
        (self.0, self.1)
    }

    fn mask(self) -> u8 {
        (1 << (self.0 - 1)) | (1 << (self.1 - 1))
    }

    // position in the lexicographic list of the 15 duads
    fn edge_index(self) -> usize {
        let (a, b) = (self.0 as usize - 1, self.1 as usize - 1);
        (0..a).map(|i| 5 - i).sum::<usize>() + (b - a - 1)
    }
}

impl fmt::Display for Duad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0, self.1)
    }
}

/// A 1-factor (perfect matching) of K6; duads sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OneFactor([Duad; 3]);

impl OneFactor {
    pub fn new(mut duads: [Duad; 3]) -> Option<Self> {
        let covered = duads.iter().fold(0u8, |m, d| m | d.mask());
        if covered != 0b11_1111 {
            return None;
        }
        duads.sort();
        Some(OneFactor(duads))
    }

    /// Parse `12|36|45`.
    pub fn parse(s: &str) -> Option<Self> {
        let duads: Vec<Duad> = s
            .split('|')
            .map(|d| {
                let b = d.trim().as_bytes();
                (b.len() == 2).then(|| Duad::new(b[0] - b'0', b[1] - b'0'))
            })
            .collect::<Option<_>>()?;
        OneFactor::new(duads.try_into().ok()?)
    }

    pub fn duads(&self) -> &[Duad; 3] {
        &self.0
    }

    fn edge_mask(&self) -> u16 {
        self.0.iter().fold(0, |m, d| m | 1 << d.edge_index())
    }

    /// The point matched with `a`.
    pub fn partner(&self, a: u8) -> u8 {
        self.0
            .iter()
            .find_map(|d| match d.points() {
                (x, y) if x == a => Some(y),
                (x, y) if y == a => Some(x),
                _ => None,
            })
            .expect("a 1-factor covers every point")
    }
}

impl fmt::Display for OneFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}|{}", self.0[0], self.0[1], self.0[2])
    }
}

/// A 1-factorization of K6: five 1-factors covering all 15 duads once,
/// ordered by the partner of point 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OneFactorization {
    factors: [OneFactor; 5],
    label: String,
}

impl OneFactorization {
    pub fn new(mut factors: [OneFactor; 5], label: impl Into<String>) -> Option<Self> {
        let mut edges = 0u16;
        for f in &factors {
            let m = f.edge_mask();
            if edges & m != 0 {
                return None;
            }
            edges |= m;
        }
        factors.sort_by_key(|f| f.partner(1));
        Some(OneFactorization { factors, label: label.into() })
    }

    pub fn factors(&self) -> &[OneFactor; 5] {
        &self.factors
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn contains(&self, factor: &OneFactor) -> bool {
        self.factors.contains(factor)
    }
}

impl fmt::Display for OneFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ||", self.label)?;
        for factor in &self.factors {
            write!(f, "{factor}||")?;
        }
        Ok(())
    }
}

/// The six 1-factorizations in their published order, `d1`..`d6`.
pub const REFERENCE_FACTORIZATIONS: [&str; 6] = [
    "12|36|45 13|24|56 14|35|26 15|23|46 16|25|34",
    "12|36|45 13|25|46 14|23|56 15|26|34 16|24|35",
    "12|34|56 13|25|46 14|35|26 15|24|36 16|23|45",
    "12|34|56 13|26|45 14|25|36 15|23|46 16|24|35",
    "12|46|35 13|26|45 14|23|56 15|24|36 16|25|34",
    "12|46|35 13|24|56 14|25|36 15|26|34 16|23|45",
];

/// All 15 perfect matchings of K6, in lexicographic order.
pub fn all_one_factors() -> Vec<OneFactor> {
    let mut out = Vec::new();
    for b in 2..=6u8 {
        let rest: Vec<u8> = (2..=6).filter(|&x| x != b).collect();
        // rest has four points; pair rest[0] with each of the others
        for i in 1..4 {
            let others: Vec<u8> = rest[1..].iter().copied().filter(|&x| x != rest[i]).collect();
            let f = OneFactor::new([
                Duad::new(1, b),
                Duad::new(rest[0], rest[i]),
                Duad::new(others[0], others[1]),
            ])
            .expect("perfect matching");
            out.push(f);
        }
    }
    out.sort();
    out
}

/// Every 1-factorization of K6, found by backtracking over the 15
/// 1-factors and labeled `d1`..`d6` by the reference order.
pub fn enumerate_one_factorizations() -> Vec<OneFactorization> {
    let factors = all_one_factors();
    let mut found: Vec<[OneFactor; 5]> = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    extend_factorization(&factors, 0, 0, &mut chosen, &mut found);

    let reference: Vec<Vec<OneFactor>> = REFERENCE_FACTORIZATIONS
        .iter()
        .map(|row| row.split_whitespace().map(|f| OneFactor::parse(f).unwrap()).collect())
        .collect();
    let mut labeled: Vec<(usize, OneFactorization)> = found
        .into_iter()
        .map(|fs| {
            let pos = reference
                .iter()
                .position(|r| r.iter().all(|f| fs.contains(f)))
                .unwrap_or(usize::MAX);
            let label = if pos == usize::MAX { "d?".to_string() } else { format!("d{}", pos + 1) };
            (pos, OneFactorization::new(fs, label).expect("edge-disjoint"))
        })
        .collect();
    labeled.sort_by_key(|(pos, _)| *pos);
    labeled.into_iter().map(|(_, f)| f).collect()
}

fn extend_factorization(
    factors: &[OneFactor],
    start: usize,
    used: u16,
    chosen: &mut Vec<usize>,
    found: &mut Vec<[OneFactor; 5]>,
) {
    if chosen.len() == 5 {
        found.push(std::array::from_fn(|i| factors[chosen[i]]));
        return;
    }
    for i in start..factors.len() {
        let m = factors[i].edge_mask();
        if used & m == 0 {
            chosen.push(i);
            extend_factorization(factors, i + 1, used | m, chosen, found);
            chosen.pop();
        }
    }
}

/// The unique 1-factor shared by two distinct 1-factorizations.
pub fn common_factor(
    a: &OneFactorization,
    b: &OneFactorization,
) -> Result<OneFactor, SylvesterError> {
    if a.factors == b.factors {
        return Err(SylvesterError::SameFactorization);
    }
    let shared: Vec<OneFactor> = a.factors.iter().filter(|f| b.contains(f)).copied().collect();
    assert_eq!(shared.len(), 1, "two 1-factorizations of K6 share exactly one 1-factor");
    Ok(shared[0])
}

/// A cell of the 6×6 array, 1-based: `row` is a point of K6, `column` the
/// index of a 1-factorization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub row: u8,
    pub column: u8,
}

impl Cell {
    pub fn new(row: u8, column: u8) -> Self {
        assert!((1..=6).contains(&row) && (1..=6).contains(&column), "cell out of range");
        Cell { row, column }
    }

    /// 0-based variety index, `6·(row-1) + (column-1)`.
    pub fn index(self) -> usize {
        6 * (self.row as usize - 1) + self.column as usize - 1
    }

    pub fn from_index(i: usize) -> Self {
        Cell::new((i / 6 + 1) as u8, (i % 6 + 1) as u8)
    }

    /// 1-based variety number.
    pub fn variety(self) -> usize {
        self.index() + 1
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},d{})", self.row, self.column)
    }
}

/// Simple undirected graph on the 36 cells, as adjacency bitmasks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph36 {
    adj: [u64; 36],
}

impl Default for Graph36 {
    fn default() -> Self {
        Graph36 { adj: [0; 36] }
    }
}

impl Graph36 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a != b, "no loops");
        self.adj[a] |= 1 << b;
        self.adj[b] |= 1 << a;
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.adj[a] &= !(1 << b);
        self.adj[b] &= !(1 << a);
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        (0..36).filter(move |&b| self.has_edge(a, b))
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adj[a].count_ones() as usize
    }

    pub fn neighbor_mask(&self, a: usize) -> u64 {
        self.adj[a]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges `(a, b)`, `a < b`, as 1-based variety numbers.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        (0..36)
            .flat_map(|a| self.neighbors(a).filter(move |&b| b > a).map(move |b| (a + 1, b + 1)))
            .collect()
    }

    /// 0/1 adjacency matrix, row-major.
    pub fn adjacency_matrix(&self) -> Vec<i64> {
        (0..36 * 36).map(|i| self.has_edge(i / 36, i % 36) as i64).collect()
    }

    /// Apply a relabeling: vertex `x` becomes `perm[x]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph36 {
        let mut g = Graph36::new();
        for (a, b) in self.edge_list() {
            g.add_edge(perm[a - 1], perm[b - 1]);
        }
        g
    }
}

/// Build the Sylvester graph from the six 1-factorizations.
pub fn build_sylvester() -> Graph36 {
    let d = enumerate_one_factorizations();
    let mut g = Graph36::new();
    for i in 0..6 {
        for j in i + 1..6 {
            let shared = common_factor(&d[i], &d[j]).expect("distinct columns");
            for duad in shared.duads() {
                let (a, b) = duad.points();
                let (ci, cj) = (i as u8 + 1, j as u8 + 1);
                g.add_edge(Cell::new(a, ci).index(), Cell::new(b, cj).index());
                g.add_edge(Cell::new(b, ci).index(), Cell::new(a, cj).index());
            }
        }
    }
    g
}

/// Shared copy of [`build_sylvester`].
pub fn sylvester_graph() -> &'static Graph36 {
    static GRAPH: OnceLock<Graph36> = OnceLock::new();
    GRAPH.get_or_init(build_sylvester)
}

/// One structural check and, on failure, a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureReport {
    pub edge_count: usize,
    pub checks: Vec<Check>,
}

impl StructureReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const ROW_MASK: u64 = 0b11_1111;

fn same_row_mask(i: usize) -> u64 {
    ROW_MASK << (6 * (i / 6))
}

fn same_column_mask(i: usize) -> u64 {
    (0..6).fold(0u64, |m, r| m | 1 << (6 * r + i % 6))
}

/// Run every structural check on a candidate Sylvester graph.
pub fn verify_sylvester(g: &Graph36) -> StructureReport {
    let mut checks = Vec::new();
    let mut push = |name, failures: Vec<String>| {
        let passed = failures.is_empty();
        let witness = (!passed).then(|| failures.join("; "));
        checks.push(Check { name, passed, witness });
    };

    push(
        "5-regular",
        (0..36)
            .filter(|&a| g.degree(a) != 5)
            .map(|a| format!("{} has degree {}", Cell::from_index(a), g.degree(a)))
            .collect(),
    );

    push(
        "90 edges",
        if g.edge_count() == 90 { vec![] } else { vec![format!("{} edges", g.edge_count())] },
    );

    // no triangles: adjacent vertices share no neighbor;
    // no quadrilaterals: distinct vertices share at most one neighbor
    let mut girth_failures = Vec::new();
    for a in 0..36 {
        for b in a + 1..36 {
            let common = (g.adj[a] & g.adj[b]).count_ones();
            if g.has_edge(a, b) && common > 0 {
                girth_failures.push(format!(
                    "triangle on {} {}",
                    Cell::from_index(a),
                    Cell::from_index(b)
                ));
            } else if common > 1 {
                girth_failures.push(format!(
                    "quadrilateral through {} {}",
                    Cell::from_index(a),
                    Cell::from_index(b)
                ));
            }
        }
    }
    push("girth >= 5", girth_failures);

    push(
        "neighbors in distinct rows and columns",
        (0..36)
            .filter(|&a| {
                let nbrs: Vec<usize> = g.neighbors(a).collect();
                let rows: u8 = nbrs.iter().fold(0, |m, &b| m | 1 << (b / 6));
                let cols: u8 = nbrs.iter().fold(0, |m, &b| m | 1 << (b % 6));
                let own_row = 1u8 << (a / 6);
                let own_col = 1u8 << (a % 6);
                rows.count_ones() as usize != nbrs.len()
                    || cols.count_ones() as usize != nbrs.len()
                    || rows & own_row != 0
                    || cols & own_col != 0
            })
            .map(|a| Cell::from_index(a).to_string())
            .collect(),
    );

    push(
        "distance <= 2 covers exactly the other rows and columns",
        (0..36)
            .filter(|&a| {
                let ball = g.neighbors(a).fold(g.adj[a] | 1 << a, |m, b| m | g.adj[b]);
                let off = !(same_row_mask(a) | same_column_mask(a)) & ((1u64 << 36) - 1);
                ball != off | 1 << a
            })
            .map(|a| Cell::from_index(a).to_string())
            .collect(),
    );

    push("association scheme", association_scheme_failures(g));

    StructureReport { edge_count: g.edge_count(), checks }
}

/// Relation of a pair of cells: 0 identity, 1 same row, 2 same column,
/// 3 adjacent, 4 other. Adjacency takes precedence only off row and column.
fn relation(g: &Graph36, a: usize, b: usize) -> usize {
    if a == b {
        0
    } else if a / 6 == b / 6 {
        1
    } else if a % 6 == b % 6 {
        2
    } else if g.has_edge(a, b) {
        3
    } else {
        4
    }
}

// Every product of two relation matrices must be constant on each relation.
fn association_scheme_failures(g: &Graph36) -> Vec<String> {
    let rel: Vec<usize> = (0..36 * 36).map(|i| relation(g, i / 36, i % 36)).collect();
    let mats: Vec<Vec<i64>> =
        (0..5).map(|c| rel.iter().map(|&x| (x == c) as i64).collect()).collect();
    let mut failures = Vec::new();
    for (ia, a) in mats.iter().enumerate() {
        for (ib, b) in mats.iter().enumerate() {
            let mut product = vec![0i64; 36 * 36];
            for i in 0..36 {
                for l in 0..36 {
                    let x = a[i * 36 + l];
                    if x == 0 {
                        continue;
                    }
                    for j in 0..36 {
                        product[i * 36 + j] += x * b[l * 36 + j];
                    }
                }
            }
            let mut value: [Option<i64>; 5] = [None; 5];
            for (idx, &p) in product.iter().enumerate() {
                let c = rel[idx];
                match value[c] {
                    None => value[c] = Some(p),
                    Some(q) if q != p => {
                        failures.push(format!(
                            "R{ia}·R{ib} not constant on R{c} at {} {}",
                            Cell::from_index(idx / 36),
                            Cell::from_index(idx % 36)
                        ));
                        break;
                    }
                    _ => {}
                }
            }
        }
    }
    failures
}

/// The center and its neighbors, center first.
pub fn starfish(g: &Graph36, center: Cell) -> Vec<Cell> {
    let c = center.index();
    std::iter::once(center).chain(g.neighbors(c).map(Cell::from_index)).collect()
}

/// The six starfish centered on one column, ordered by center row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Galaxy {
    pub column: u8,
    pub starfish: Vec<Vec<Cell>>,
}

impl Galaxy {
    /// Entry `(i, j)` is the row of the center whose starfish holds cell `(i+1, j+1)`.
    pub fn latin_square(&self) -> [[u8; 6]; 6] {
        let mut grid = [[0u8; 6]; 6];
        for fish in &self.starfish {
            let symbol = fish[0].row;
            for cell in fish {
                grid[cell.row as usize - 1][cell.column as usize - 1] = symbol;
            }
        }
        grid
    }

    pub fn to_replicate(&self) -> Replicate {
        Replicate::new(
            self.starfish.iter().map(|f| Block::new(f.iter().map(|c| c.index()).collect())).collect(),
        )
    }
}

pub fn galaxy(g: &Graph36, column: u8) -> Result<Galaxy, SylvesterError> {
    let starfish: Vec<Vec<Cell>> =
        (1..=6).map(|row| self::starfish(g, Cell::new(row, column))).collect();
    let mut seen = 0u64;
    for fish in &starfish {
        if fish.len() != 6 {
            return Err(SylvesterError::GalaxyNotPartition {
                column: column as usize,
                reason: format!("starfish at {} has {} cells", fish[0], fish.len()),
            });
        }
        for cell in fish {
            let bit = 1u64 << cell.index();
            if seen & bit != 0 {
                return Err(SylvesterError::GalaxyNotPartition {
                    column: column as usize,
                    reason: format!("{cell} covered twice"),
                });
            }
            seen |= bit;
        }
    }
    let galaxy = Galaxy { column, starfish };
    let grid = galaxy.latin_square();
    let latin = (0..6).all(|i| {
        let row: u8 = (0..6).fold(0, |m, j| m | 1 << (grid[i][j] - 1));
        let col: u8 = (0..6).fold(0, |m, j| m | 1 << (grid[j][i] - 1));
        row == 0b11_1111 && col == 0b11_1111
    });
    if !latin {
        return Err(SylvesterError::GalaxyNotPartition {
            column: column as usize,
            reason: "starfish pattern is not a Latin square".into(),
        });
    }
    Ok(galaxy)
}
