//! Design isomorphism, automorphism group orders, spectrum comparison and
//! the Sylvester-design predicate.
//!
//! Designs are encoded as bipartite incidence graphs with varieties and
//! blocks in different color classes; concurrence matrices as complete
//! edge-colored graphs. Both go through [`crate::canon`].

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;

use crate::canon::{analyze, ColoredGraph};
use crate::design::{BlockDesign, ConcurrenceMatrix, ResolvableDesign};
use crate::efficiency::InformationMatrix;
use crate::error::{EfficiencyError, SylvesterError};
use crate::sylvester::{sylvester_graph, Graph36};

/// Varieties are vertices `0..v`, blocks `v..v+b`.
pub fn incidence_graph(design: &BlockDesign) -> ColoredGraph {
    let v = design.v();
    let b = design.blocks().len();
    let mut colors = vec![0u32; v];
    colors.extend(std::iter::repeat(1).take(b));
    let mut g = ColoredGraph::new(colors);
    for (j, block) in design.blocks().iter().enumerate() {
        let mut counts: HashMap<usize, u32> = HashMap::new();
        for &x in block.members() {
            *counts.entry(x).or_default() += 1;
        }
        let mut counts: Vec<_> = counts.into_iter().collect();
        counts.sort_unstable();
        for (x, m) in counts {
            g.add_edge(x, v + j, m);
        }
    }
    g
}

/// Complete graph on the varieties: vertex color = diagonal, edge color = concurrence.
pub fn concurrence_graph(c: &ConcurrenceMatrix) -> ColoredGraph {
    let v = c.v();
    let mut g = ColoredGraph::new((0..v).map(|i| c.get(i, i)).collect());
    for i in 0..v {
        for j in i + 1..v {
            if c.get(i, j) > 0 {
                g.add_edge(i, j, c.get(i, j));
            }
        }
    }
    g
}

pub fn graph36_colored(g: &Graph36) -> ColoredGraph {
    let mut out = ColoredGraph::new(vec![0; 36]);
    for (a, b) in g.edge_list() {
        out.add_edge(a - 1, b - 1, 1);
    }
    out
}

/// Blocks as sorted canonical variety labels, sorted as a multiset.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub v: usize,
    pub blocks: Vec<Vec<usize>>,
    /// Variety `x` has canonical label `variety_labeling[x]`.
    pub variety_labeling: Vec<usize>,
    /// Block `j` has canonical position `block_labeling[j]`.
    pub block_labeling: Vec<usize>,
}

impl PartialEq for CanonicalForm {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v && self.blocks == other.blocks
    }
}

impl Eq for CanonicalForm {}

pub fn canonical_form_block_design(design: &BlockDesign) -> CanonicalForm {
    let v = design.v();
    let analysis = analyze(&incidence_graph(design));
    let variety_labeling = analysis.labeling[..v].to_vec();
    let block_labeling: Vec<usize> = analysis.labeling[v..].iter().map(|&p| p - v).collect();
    let mut blocks: Vec<Vec<usize>> = design
        .blocks()
        .iter()
        .map(|b| {
            let mut m: Vec<usize> = b.members().iter().map(|&x| variety_labeling[x]).collect();
            m.sort_unstable();
            m
        })
        .collect();
    blocks.sort();
    CanonicalForm { v, blocks, variety_labeling, block_labeling }
}

/// Canonical form under variety and block permutations (replicate structure ignored).
pub fn canonical_form(design: &ResolvableDesign) -> CanonicalForm {
    canonical_form_block_design(&design.to_block_design())
}

/// Outcome of [`compare`], naming the first test that told the designs apart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comparison {
    Isomorphic,
    Shape(String),
    ConcurrenceRows,
    Spectrum,
    CanonicalForm,
}

impl Comparison {
    pub fn is_isomorphic(&self) -> bool {
        *self == Comparison::Isomorphic
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comparison::Isomorphic => f.write_str("isomorphic"),
            Comparison::Shape(s) => write!(f, "not isomorphic: {s}"),
            Comparison::ConcurrenceRows => {
                f.write_str("not isomorphic: concurrence rows differ as multisets")
            }
            Comparison::Spectrum => f.write_str("not isomorphic: efficiency spectra differ"),
            Comparison::CanonicalForm => {
                f.write_str("not isomorphic: same spectrum, different canonical forms")
            }
        }
    }
}

fn row_multiset(c: &ConcurrenceMatrix) -> Vec<Vec<u32>> {
    let mut rows: Vec<Vec<u32>> = (0..c.v())
        .map(|i| {
            let mut row = c.row(i).to_vec();
            row.sort_unstable();
            row
        })
        .collect();
    rows.sort();
    rows
}

/// Isomorphism test with cheap invariants first: shape, concurrence rows,
/// characteristic polynomial, then canonical forms.
pub fn compare(a: &ResolvableDesign, b: &ResolvableDesign) -> Comparison {
    let (sa, sb) = ((a.v(), a.k(), a.r()), (b.v(), b.k(), b.r()));
    if sa != sb {
        return Comparison::Shape(format!("(v, k, r) = {sa:?} versus {sb:?}"));
    }
    if let (Ok(ca), Ok(cb)) = (a.concurrence_matrix(), b.concurrence_matrix()) {
        if row_multiset(&ca) != row_multiset(&cb) {
            return Comparison::ConcurrenceRows;
        }
        let pa = InformationMatrix::from_concurrence(&ca).characteristic_polynomial();
        let pb = InformationMatrix::from_concurrence(&cb).characteristic_polynomial();
        if !pa.same_roots_as(&pb) {
            return Comparison::Spectrum;
        }
    }
    if canonical_form(a) == canonical_form(b) {
        Comparison::Isomorphic
    } else {
        Comparison::CanonicalForm
    }
}

pub fn are_isomorphic(a: &ResolvableDesign, b: &ResolvableDesign) -> bool {
    compare(a, b).is_isomorphic()
}

/// Order of an automorphism group.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroupOrder(pub BigUint);

impl fmt::Display for GroupOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for GroupOrder {
    fn from(n: u64) -> Self {
        GroupOrder(BigUint::from(n))
    }
}

/// Order of the group of variety permutations mapping the block multiset to
/// itself. Permutations of identical blocks are factored out.
pub fn automorphism_order_block_design(design: &BlockDesign) -> GroupOrder {
    let full = analyze(&incidence_graph(design)).group_order;
    let mut multiplicity: HashMap<&[usize], u64> = HashMap::new();
    for b in design.blocks() {
        *multiplicity.entry(b.members()).or_default() += 1;
    }
    let twins = multiplicity
        .values()
        .fold(BigUint::from(1u32), |acc, &m| acc * (1..=m).product::<BigUint>());
    GroupOrder(full / twins)
}

pub fn automorphism_order(design: &ResolvableDesign) -> GroupOrder {
    automorphism_order_block_design(&design.to_block_design())
}

pub fn graph_automorphism_order(g: &Graph36) -> GroupOrder {
    GroupOrder(analyze(&graph36_colored(g)).group_order)
}

/// Equality of the efficiency spectra, via the characteristic polynomials
/// of the scaled information matrices.
pub fn same_spectrum(a: &ResolvableDesign, b: &ResolvableDesign) -> Result<bool, EfficiencyError> {
    let poly = |d: &ResolvableDesign| -> Result<_, EfficiencyError> {
        if d.r() == 0 {
            return Err(EfficiencyError::Empty);
        }
        let p = InformationMatrix::from_concurrence(&d.concurrence_matrix()?)
            .characteristic_polynomial();
        if p.poly.strip_zero_roots().0 > 1 {
            return Err(EfficiencyError::Disconnected);
        }
        Ok(p)
    };
    Ok(poly(a)?.same_roots_as(&poly(b)?))
}

/// A variety permutation `perm` with `a.permuted(perm) == b`, if one exists.
pub fn graph_isomorphism(a: &ColoredGraph, b: &ColoredGraph) -> Option<Vec<usize>> {
    if a.n() != b.n() {
        return None;
    }
    let (ca, cb) = (analyze(a), analyze(b));
    if ca.certificate != cb.certificate {
        return None;
    }
    let mut inverse_b = vec![0; b.n()];
    for (x, &p) in cb.labeling.iter().enumerate() {
        inverse_b[p] = x;
    }
    Some(ca.labeling.iter().map(|&p| inverse_b[p]).collect())
}

/// Witness that two concurrence matrices are equal up to relabeling.
pub fn concurrence_equivalence(a: &ConcurrenceMatrix, b: &ConcurrenceMatrix) -> Option<Vec<usize>> {
    let perm = graph_isomorphism(&concurrence_graph(a), &concurrence_graph(b))?;
    debug_assert_eq!(a.permuted(&perm).entries(), b.entries());
    Some(perm)
}

/// Verdict of [`is_sylvester_design`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SylvesterVerdict {
    /// Variety `x` plays the role of vertex `witness[x]` of the Sylvester graph.
    Sylvester { witness: Vec<usize> },
    NotSylvester { reason: String },
}

impl SylvesterVerdict {
    pub fn is_sylvester(&self) -> bool {
        matches!(self, SylvesterVerdict::Sylvester { .. })
    }
}

/// Map from the vertices of `g` onto the Sylvester graph, if `g` is a copy of it.
pub fn sylvester_isomorphism(g: &Graph36) -> Option<Vec<usize>> {
    graph_isomorphism(&graph36_colored(g), &graph36_colored(sylvester_graph()))
}

/// Whether some relabeling takes the concurrence matrix to `7I + J + Adj(Σ)`.
pub fn is_sylvester_design(design: &ResolvableDesign) -> Result<SylvesterVerdict, SylvesterError> {
    if design.v() != 36 || design.k() != 6 || design.r() != 8 {
        return Err(SylvesterError::Shape { v: design.v(), k: design.k(), r: design.r() });
    }
    let not = |reason: String| Ok(SylvesterVerdict::NotSylvester { reason });
    let c = match design.concurrence_matrix() {
        Ok(c) => c,
        Err(e) => return not(e.to_string()),
    };
    let mut g = Graph36::new();
    for i in 0..36 {
        if c.get(i, i) != 8 {
            return not(format!("variety {} has replication {}", i + 1, c.get(i, i)));
        }
        for j in i + 1..36 {
            match c.get(i, j) {
                1 => {}
                2 => g.add_edge(i, j),
                other => {
                    return not(format!("varieties {} and {} concur {other} times", i + 1, j + 1))
                }
            }
        }
    }
    let Some(witness) = sylvester_isomorphism(&g) else {
        return not("the graph of concurrence-2 pairs is not the Sylvester graph".into());
    };
    let sigma = sylvester_graph();
    let permuted = c.permuted(&witness);
    let ok = (0..36).all(|i| {
        (0..36).all(|j| {
            let expected = if i == j { 8 } else { 1 + sigma.has_edge(i, j) as u32 };
            permuted.get(i, j) == expected
        })
    });
    assert!(ok, "witness does not carry the concurrence matrix to 7I + J + Adj");
    Ok(SylvesterVerdict::Sylvester { witness })
}
