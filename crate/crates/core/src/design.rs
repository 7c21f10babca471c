//! Block designs, resolvable designs, validation and concurrence.
//!
//! Varieties are stored 0-based inside blocks. Everything that crosses the
//! text boundary (parsing, printing, violation reports) is 1-based.

use std::fmt;

use crate::error::DesignError;

/// A variety (treatment), identified by its 1-based number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variety(u32);

impl Variety {
    /// `number` must lie in `1..=v`.
    pub fn new(number: u32, v: usize) -> Option<Self> {
        (number >= 1 && number as usize <= v).then_some(Variety(number))
    }

    pub fn from_index(index: usize) -> Self {
        Variety(index as u32 + 1)
    }

    pub fn number(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Variety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A block: a sorted list of 0-based variety indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block(Vec<usize>);

impl Block {
    /// Build a block from 0-based indices. Members are sorted; duplicates are
    /// kept so that validation can report them.
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        Block(members)
    }

    /// Build a block from 1-based variety numbers.
    pub fn from_numbers<I: IntoIterator<Item = usize>>(numbers: I) -> Self {
        Block::new(numbers.into_iter().map(|n| n - 1).collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    #[cfg(test)]
    pub(crate) fn members_mut(&mut self) -> &mut Vec<usize> {
        &mut self.0
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", m + 1)?;
        }
        Ok(())
    }
}

/// One replicate: an ordered list of blocks that should partition the varieties.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Replicate {
    blocks: Vec<Block>,
}

impl Replicate {
    pub fn new(blocks: Vec<Block>) -> Self {
        Replicate { blocks }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    #[cfg(test)]
    pub(crate) fn blocks_mut(&mut self) -> &mut [Block] {
        &mut self.blocks
    }

    /// `owner[x]` = position of the block holding variety `x`.
    /// Only meaningful for a valid replicate.
    pub fn block_of(&self, v: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; v];
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block.members() {
                if x < v {
                    owner[x] = b;
                }
            }
        }
        owner
    }
}

/// A single invariant violation, with 1-based replicate/block coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoReplicates,
    BlockSizeDoesNotDivide { v: usize, k: usize },
    WrongBlockCount { replicate: usize, found: usize, expected: usize },
    WrongBlockSize { replicate: usize, block: usize, found: usize, expected: usize },
    OutOfRange { replicate: usize, block: usize, number: usize },
    DuplicateInBlock { replicate: usize, block: usize, variety: Variety },
    DuplicateInReplicate { replicate: usize, variety: Variety, blocks: Vec<usize> },
    MissingVariety { replicate: usize, variety: Variety },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoReplicates => write!(f, "no replicates"),
            BlockSizeDoesNotDivide { v, k } => {
                write!(f, "block size {k} does not divide variety count {v}")
            }
            WrongBlockCount { replicate, found, expected } => write!(
                f,
                "replicate {replicate}: {found} blocks, expected {expected}"
            ),
            WrongBlockSize { replicate, block, found, expected } => write!(
                f,
                "replicate {replicate}, block {block}: size {found}, expected {expected}"
            ),
            OutOfRange { replicate, block, number } => write!(
                f,
                "replicate {replicate}, block {block}: variety {number} out of range"
            ),
            DuplicateInBlock { replicate, block, variety } => write!(
                f,
                "replicate {replicate}, block {block}: variety {variety} repeated"
            ),
            DuplicateInReplicate { replicate, variety, blocks } => {
                let list: Vec<String> = blocks.iter().map(|b| b.to_string()).collect();
                write!(
                    f,
                    "replicate {replicate}: variety {variety} occurs in blocks {}",
                    list.join(", ")
                )
            }
            MissingVariety { replicate, variety } => {
                write!(f, "replicate {replicate}: variety {variety} missing")
            }
        }
    }
}

/// A resolvable block design: `r` replicates, each a partition of `v`
/// varieties into `v / k` blocks of size `k`.
///
/// Construction through [`ResolvableDesign::new`] validates; `from_parts`
/// does not, so that [`ResolvableDesign::validate`] can report problems.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResolvableDesign {
    v: usize,
    k: usize,
    replicates: Vec<Replicate>,
    label: String,
}

impl ResolvableDesign {
    pub fn new(
        v: usize,
        k: usize,
        replicates: Vec<Replicate>,
        label: impl Into<String>,
    ) -> Result<Self, DesignError> {
        let design = Self::from_parts(v, k, replicates, label);
        design.ensure_valid()?;
        Ok(design)
    }

    pub fn from_parts(
        v: usize,
        k: usize,
        replicates: Vec<Replicate>,
        label: impl Into<String>,
    ) -> Self {
        ResolvableDesign { v, k, replicates, label: label.into() }
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of replicates.
    pub fn r(&self) -> usize {
        self.replicates.len()
    }

    pub fn replicates(&self) -> &[Replicate] {
        &self.replicates
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// All blocks, replicate by replicate.
    pub fn blocks(&self) -> impl Iterator<Item = &Block> {
        self.replicates.iter().flat_map(|rep| rep.blocks.iter())
    }

    /// Every invariant violation; empty iff the design is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.replicates.is_empty() {
            out.push(Violation::NoReplicates);
        }
        if self.k == 0 || self.v % self.k != 0 {
            out.push(Violation::BlockSizeDoesNotDivide { v: self.v, k: self.k });
            return out;
        }
        let expected_blocks = self.v / self.k;
        for (ri, rep) in self.replicates.iter().enumerate() {
            let replicate = ri + 1;
            if rep.blocks.len() != expected_blocks {
                out.push(Violation::WrongBlockCount {
                    replicate,
                    found: rep.blocks.len(),
                    expected: expected_blocks,
                });
            }
            let mut seen_in: Vec<Vec<usize>> = vec![Vec::new(); self.v];
            for (bi, block) in rep.blocks.iter().enumerate() {
                let b = bi + 1;
                if block.len() != self.k {
                    out.push(Violation::WrongBlockSize {
                        replicate,
                        block: b,
                        found: block.len(),
                        expected: self.k,
                    });
                }
                let mut prev: Option<usize> = None;
                for &x in block.members() {
                    if x >= self.v {
                        out.push(Violation::OutOfRange { replicate, block: b, number: x + 1 });
                        continue;
                    }
                    if prev == Some(x) {
                        out.push(Violation::DuplicateInBlock {
                            replicate,
                            block: b,
                            variety: Variety::from_index(x),
                        });
                        continue;
                    }
                    prev = Some(x);
                    seen_in[x].push(b);
                }
            }
            for (x, blocks) in seen_in.into_iter().enumerate() {
                match blocks.len() {
                    0 => out.push(Violation::MissingVariety {
                        replicate,
                        variety: Variety::from_index(x),
                    }),
                    1 => {}
                    _ => out.push(Violation::DuplicateInReplicate {
                        replicate,
                        variety: Variety::from_index(x),
                        blocks,
                    }),
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn ensure_valid(&self) -> Result<(), DesignError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(DesignError::Invalid(violations))
        }
    }

    pub fn concurrence_matrix(&self) -> Result<ConcurrenceMatrix, DesignError> {
        self.ensure_valid()?;
        Ok(ConcurrenceMatrix::from_blocks(self.v, self.r(), self.k, self.blocks()))
    }

    /// The design made of the replicates at `indices` (0-based, in that order).
    pub fn select_replicates(&self, indices: &[usize]) -> ResolvableDesign {
        let replicates = indices.iter().map(|&i| self.replicates[i].clone()).collect();
        ResolvableDesign::from_parts(self.v, self.k, replicates, self.label.clone())
    }

    /// The design with replicate `index` (0-based) deleted.
    pub fn without_replicate(&self, index: usize) -> ResolvableDesign {
        let keep: Vec<usize> = (0..self.r()).filter(|&i| i != index).collect();
        self.select_replicates(&keep)
    }

    /// Replicates of `self` followed by those of `other`.
    pub fn concat(&self, other: &ResolvableDesign) -> ResolvableDesign {
        let mut replicates = self.replicates.clone();
        replicates.extend(other.replicates.iter().cloned());
        ResolvableDesign::from_parts(self.v, self.k, replicates, self.label.clone())
    }

    /// Forget the resolution.
    pub fn to_block_design(&self) -> BlockDesign {
        BlockDesign::new(self.v, self.blocks().cloned().collect(), self.label.clone())
    }

    /// Dual design: one variety per original block, one block per original
    /// variety. The resolvability of the dual is checked, not assumed.
    pub fn dual(&self) -> Result<DualDesign, DesignError> {
        self.ensure_valid()?;
        let design = self.to_block_design().dual();
        let resolution = design.find_resolution(DEFAULT_RESOLUTION_BUDGET);
        Ok(DualDesign { design, resolution })
    }

    /// Apply a variety relabeling: variety `x` becomes `perm[x]`.
    pub fn relabel(&self, perm: &[usize]) -> ResolvableDesign {
        let replicates = self
            .replicates
            .iter()
            .map(|rep| {
                Replicate::new(
                    rep.blocks
                        .iter()
                        .map(|b| Block::new(b.members().iter().map(|&x| perm[x]).collect()))
                        .collect(),
                )
            })
            .collect();
        ResolvableDesign::from_parts(self.v, self.k, replicates, self.label.clone())
    }
}

const DEFAULT_RESOLUTION_BUDGET: u64 = 2_000_000;

/// A (not necessarily resolvable) block design with `v` varieties.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockDesign {
    v: usize,
    blocks: Vec<Block>,
    label: String,
}

impl BlockDesign {
    pub fn new(v: usize, blocks: Vec<Block>, label: impl Into<String>) -> Self {
        BlockDesign { v, blocks, label: label.into() }
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Common block size, if all blocks have the same size.
    pub fn block_size(&self) -> Option<usize> {
        let k = self.blocks.first()?.len();
        self.blocks.iter().all(|b| b.len() == k).then_some(k)
    }

    /// Number of blocks containing each variety.
    pub fn replications(&self) -> Vec<usize> {
        let mut rep = vec![0; self.v];
        for b in &self.blocks {
            for &x in b.members() {
                rep[x] += 1;
            }
        }
        rep
    }

    /// Common replication, if the design is equireplicate.
    pub fn replication(&self) -> Option<usize> {
        let reps = self.replications();
        let r = *reps.first()?;
        reps.iter().all(|&x| x == r).then_some(r)
    }

    /// Concurrence matrix; requires equal block sizes and equal replication.
    pub fn concurrence_matrix(&self) -> Result<ConcurrenceMatrix, DesignError> {
        let k = self.block_size().ok_or(DesignError::NotProper)?;
        let r = self.replication().ok_or(DesignError::NotEquireplicate)?;
        if self.blocks.iter().any(|b| b.members().windows(2).any(|w| w[0] == w[1])) {
            return Err(DesignError::RepeatedVarietyInBlock);
        }
        Ok(ConcurrenceMatrix::from_blocks(self.v, r, k, self.blocks.iter()))
    }

    /// Dual: variety `j` of the dual is block `j` here; block `i` of the dual
    /// lists the blocks containing variety `i`.
    pub fn dual(&self) -> BlockDesign {
        let mut dual_blocks = vec![Vec::new(); self.v];
        for (j, b) in self.blocks.iter().enumerate() {
            for &x in b.members() {
                dual_blocks[x].push(j);
            }
        }
        let blocks = dual_blocks.into_iter().map(Block::new).collect();
        BlockDesign::new(self.blocks.len(), blocks, format!("dual of {}", self.label))
    }

    /// Search for a grouping of the blocks into classes that each partition
    /// the varieties. Gives up after `budget` search nodes.
    pub fn find_resolution(&self, budget: u64) -> Resolvability {
        let Some(k) = self.block_size() else {
            return Resolvability::NotResolvable;
        };
        if k == 0 || self.v % k != 0 || self.replication().is_none() {
            return Resolvability::NotResolvable;
        }
        let mut search = ResolutionSearch {
            blocks: &self.blocks,
            v: self.v,
            per_class: self.v / k,
            assigned: vec![false; self.blocks.len()],
            classes: Vec::new(),
            nodes: 0,
            budget,
        };
        match search.run() {
            Some(true) => Resolvability::Resolvable(search.classes),
            Some(false) => Resolvability::NotResolvable,
            None => Resolvability::Unknown,
        }
    }
}

/// Outcome of the resolution search on a dual design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolvability {
    /// Block indices grouped into parallel classes.
    Resolvable(Vec<Vec<usize>>),
    NotResolvable,
    /// Search budget exhausted.
    Unknown,
}

impl Resolvability {
    pub fn is_resolvable(&self) -> bool {
        matches!(self, Resolvability::Resolvable(_))
    }
}

struct ResolutionSearch<'a> {
    blocks: &'a [Block],
    v: usize,
    per_class: usize,
    assigned: Vec<bool>,
    classes: Vec<Vec<usize>>,
    nodes: u64,
    budget: u64,
}

impl ResolutionSearch<'_> {
    // Some(found) or None when the budget runs out.
    fn run(&mut self) -> Option<bool> {
        let Some(first) = self.assigned.iter().position(|a| !a) else {
            return Some(true);
        };
        let mut covered = vec![false; self.v];
        for &x in self.blocks[first].members() {
            covered[x] = true;
        }
        self.assigned[first] = true;
        let mut class = vec![first];
        let found = self.extend_class(&mut class, &mut covered, first + 1);
        self.assigned[first] = false;
        found
    }

    fn extend_class(
        &mut self,
        class: &mut Vec<usize>,
        covered: &mut [bool],
        start: usize,
    ) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        if class.len() == self.per_class {
            self.classes.push(class.clone());
            let found = self.run()?;
            if found {
                return Some(true);
            }
            self.classes.pop();
            return Some(false);
        }
        for j in start..self.blocks.len() {
            if self.assigned[j] || self.blocks[j].members().iter().any(|&x| covered[x]) {
                continue;
            }
            for &x in self.blocks[j].members() {
                covered[x] = true;
            }
            self.assigned[j] = true;
            class.push(j);
            let found = self.extend_class(class, covered, j + 1);
            class.pop();
            self.assigned[j] = false;
            for &x in self.blocks[j].members() {
                covered[x] = false;
            }
            if found != Some(false) {
                return found;
            }
        }
        Some(false)
    }
}

/// Result of [`ResolvableDesign::dual`].
#[derive(Clone, Debug)]
pub struct DualDesign {
    pub design: BlockDesign,
    pub resolution: Resolvability,
}

/// Symmetric `v × v` matrix of pairwise concurrences, diagonal = replication.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConcurrenceMatrix {
    v: usize,
    r: usize,
    k: usize,
    entries: Vec<u32>,
}

impl ConcurrenceMatrix {
    pub(crate) fn from_blocks<'a, I>(v: usize, r: usize, k: usize, blocks: I) -> Self
    where
        I: IntoIterator<Item = &'a Block>,
    {
        let mut entries = vec![0u32; v * v];
        for block in blocks {
            for &x in block.members() {
                for &y in block.members() {
                    entries[x * v + y] += 1;
                }
            }
        }
        ConcurrenceMatrix { v, r, k, entries }
    }

    pub fn v(&self) -> usize {
        self.v
    }

    /// Replication.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Block size.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.v + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.entries[i * self.v..(i + 1) * self.v]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Sorted set of off-diagonal values.
    pub fn off_diagonal_values(&self) -> Vec<u32> {
        let mut vals: Vec<u32> = (0..self.v)
            .flat_map(|i| (0..self.v).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        vals.sort_unstable();
        vals.dedup();
        vals
    }

    /// Apply a relabeling: new entry `(perm[i], perm[j])` = old `(i, j)`.
    pub fn permuted(&self, perm: &[usize]) -> ConcurrenceMatrix {
        let mut entries = vec![0; self.v * self.v];
        for i in 0..self.v {
            for j in 0..self.v {
                entries[perm[i] * self.v + perm[j]] = self.get(i, j);
            }
        }
        ConcurrenceMatrix { entries, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // columns first, then rows
    fn lattice() -> ResolvableDesign {
        let rows = (0..6).map(|i| Block::new((0..6).map(|j| 6 * i + j).collect())).collect();
        let cols = (0..6).map(|j| Block::new((0..6).map(|i| 6 * i + j).collect())).collect();
        ResolvableDesign::new(36, 6, vec![Replicate::new(cols), Replicate::new(rows)], "lattice")
            .unwrap()
    }

    #[test]
    fn rows_replicate_is_valid() {
        let d = lattice().select_replicates(&[0]);
        assert!(d.validate().is_empty());
        let c = d.concurrence_matrix().unwrap();
        for i in 0..36 {
            assert_eq!(c.row(i).iter().sum::<u32>(), 6);
        }
        assert_eq!(c.off_diagonal_values(), vec![0, 1]);
    }

    #[test]
    fn lattice_concurrences_are_zero_or_one() {
        let c = lattice().concurrence_matrix().unwrap();
        assert_eq!(c.off_diagonal_values(), vec![0, 1]);
        assert!((0..36).all(|i| c.get(i, i) == 2));
    }

    #[test]
    fn swapping_a_variety_gives_two_violations() {
        let d = lattice();
        let mut reps = d.replicates().to_vec();
        let b0 = &mut reps[0].blocks_mut()[0];
        b0.members_mut()[0] = 1;
        b0.members_mut().sort_unstable();
        let bad = ResolvableDesign::from_parts(36, 6, reps, "bad");
        let v = bad.validate();
        assert_eq!(v.len(), 2, "{v:?}");
        assert!(matches!(v[0], Violation::MissingVariety { replicate: 1, variety } if variety.number() == 1));
        assert!(matches!(&v[1], Violation::DuplicateInReplicate { replicate: 1, variety, blocks }
            if variety.number() == 2 && blocks == &vec![1, 2]));
    }

    #[test]
    fn duplicate_inside_block_is_reported() {
        let bad = ResolvableDesign::from_parts(
            4,
            2,
            vec![Replicate::new(vec![Block::new(vec![0, 0]), Block::new(vec![2, 3])])],
            "",
        );
        let v = bad.validate();
        assert!(v.iter().any(|x| matches!(x, Violation::DuplicateInBlock { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::MissingVariety { .. })));
    }

    #[test]
    fn empty_design_is_invalid() {
        let d = ResolvableDesign::from_parts(36, 6, vec![], "");
        assert_eq!(d.validate(), vec![Violation::NoReplicates]);
        assert!(d.concurrence_matrix().is_err());
    }

    #[test]
    fn dual_of_lattice() {
        let dual = lattice().dual().unwrap();
        assert_eq!(dual.design.v(), 12);
        assert_eq!(dual.design.blocks().len(), 36);
        for (cell, b) in dual.design.blocks().iter().enumerate() {
            assert_eq!(b.members(), &[cell % 6, 6 + cell / 6]);
        }
        assert!(dual.resolution.is_resolvable());
        let c = dual.design.concurrence_matrix().unwrap();
        assert!((0..12).all(|i| c.get(i, i) == 6));
    }

    #[test]
    fn off_diagonal_sum_identity() {
        let d = lattice();
        let c = d.concurrence_matrix().unwrap();
        let off: u32 = (0..36)
            .flat_map(|i| (0..36).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| c.get(i, j))
            .sum();
        assert_eq!(off as usize, d.r() * d.v() * (d.k() - 1));
    }
}
