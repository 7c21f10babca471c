//! Canonical labeling and automorphism group order of vertex- and
//! edge-colored graphs by individualization and refinement.
//!
//! Each search node carries an equitable ordered coloring. Refinement sorts
//! vertices by (own color, multiset of (neighbor color, edge color)) and
//! repeats until no cell splits; the sorted signatures are hashed into a
//! per-level trace, so traces are invariant under relabeling. A leaf is a
//! discrete coloring, read as a labeling. The canonical leaf is the one with
//! the largest (trace, relabeled graph). The group order is the product of
//! orbit sizes along the first path, each orbit found by looking for leaves
//! equivalent to the first leaf.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use num_bigint::BigUint;

/// Undirected graph with colored vertices and colored edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredGraph {
    colors: Vec<u32>,
    adj: Vec<Vec<(usize, u32)>>,
}

impl ColoredGraph {
    pub fn new(colors: Vec<u32>) -> Self {
        let adj = vec![Vec::new(); colors.len()];
        ColoredGraph { colors, adj }
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    /// Add an edge; adding the same pair twice keeps both, so callers merge
    /// multiplicities into the edge color themselves.
    pub fn add_edge(&mut self, a: usize, b: usize, color: u32) {
        assert!(a != b, "loops are not supported");
        self.adj[a].push((b, color));
        self.adj[b].push((a, color));
    }

    pub fn neighbors(&self, a: usize) -> &[(usize, u32)] {
        &self.adj[a]
    }

    pub fn is_automorphism(&self, perm: &[usize]) -> bool {
        if perm.len() != self.n() {
            return false;
        }
        let mut seen = vec![false; self.n()];
        for &p in perm {
            if p >= self.n() || std::mem::replace(&mut seen[p], true) {
                return false;
            }
        }
        (0..self.n()).all(|a| {
            self.colors[a] == self.colors[perm[a]] && {
                let mut mapped: Vec<(usize, u32)> =
                    self.adj[a].iter().map(|&(b, c)| (perm[b], c)).collect();
                let mut target = self.adj[perm[a]].clone();
                mapped.sort_unstable();
                target.sort_unstable();
                mapped == target
            }
        })
    }

    /// The graph relabeled so that vertex `a` becomes `labeling[a]`.
    pub fn relabeled(&self, labeling: &[usize]) -> Certificate {
        let mut colors = vec![0; self.n()];
        for (a, &p) in labeling.iter().enumerate() {
            colors[p] = self.colors[a];
        }
        let mut edges: Vec<(u32, u32, u32)> = (0..self.n())
            .flat_map(|a| self.adj[a].iter().map(move |&(b, c)| (a, b, c)))
            .filter(|&(a, b, _)| labeling[a] < labeling[b])
            .map(|(a, b, c)| (labeling[a] as u32, labeling[b] as u32, c))
            .collect();
        edges.sort_unstable();
        Certificate { colors, edges }
    }
}

/// A graph written out under a labeling.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Certificate {
    pub colors: Vec<u32>,
    pub edges: Vec<(u32, u32, u32)>,
}

/// Canonical labeling, automorphism group order and generators.
#[derive(Clone, Debug)]
pub struct Analysis {
    /// Vertex `a` goes to `labeling[a]` in the canonical form.
    pub labeling: Vec<usize>,
    pub certificate: Certificate,
    pub group_order: BigUint,
    pub generators: Vec<Vec<usize>>,
}

#[derive(Clone)]
struct Node {
    colors: Vec<u32>,
    cells: usize,
    prefix: Vec<usize>,
    trace: Vec<u64>,
}

impl Node {
    fn root(g: &ColoredGraph) -> Node {
        let mut node =
            Node { colors: g.colors.clone(), cells: 0, prefix: Vec::new(), trace: Vec::new() };
        node.refine(g);
        node
    }

    fn refine(&mut self, g: &ColoredGraph) {
        let n = g.n();
        let mut hasher = DefaultHasher::new();
        let mut cells = usize::MAX;
        loop {
            let sigs: Vec<(u32, Vec<(u32, u32)>)> = (0..n)
                .map(|a| {
                    let mut nb: Vec<(u32, u32)> =
                        g.adj[a].iter().map(|&(b, c)| (self.colors[b], c)).collect();
                    nb.sort_unstable();
                    (self.colors[a], nb)
                })
                .collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]));
            let mut rank = 0u32;
            for (i, &a) in order.iter().enumerate() {
                if i > 0 && sigs[a] != sigs[order[i - 1]] {
                    rank += 1;
                }
                self.colors[a] = rank;
                sigs[a].hash(&mut hasher);
            }
            let new_cells = if n == 0 { 0 } else { rank as usize + 1 };
            if new_cells == cells {
                break;
            }
            cells = new_cells;
        }
        self.cells = cells;
        self.trace.push(hasher.finish());
    }

    fn is_discrete(&self) -> bool {
        self.cells == self.colors.len()
    }

    /// First smallest non-singleton cell, vertices ascending.
    fn target_cell(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.cells];
        for &c in &self.colors {
            sizes[c as usize] += 1;
        }
        let (color, _) = sizes
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 1)
            .min_by_key(|&(c, &s)| (s, c))
            .expect("non-discrete coloring has a non-singleton cell");
        (0..self.colors.len()).filter(|&a| self.colors[a] as usize == color).collect()
    }

    fn child(&self, g: &ColoredGraph, vertex: usize) -> Node {
        let mut colors: Vec<u32> = self.colors.iter().map(|&c| 2 * c).collect();
        colors[vertex] += 1;
        let mut prefix = self.prefix.clone();
        prefix.push(vertex);
        let mut node = Node { colors, cells: 0, prefix, trace: self.trace.clone() };
        node.refine(g);
        node
    }

    fn labeling(&self) -> Vec<usize> {
        self.colors.iter().map(|&c| c as usize).collect()
    }
}

struct Leaf {
    trace: Vec<u64>,
    certificate: Certificate,
    labeling: Vec<usize>,
}

impl Leaf {
    fn new(g: &ColoredGraph, node: &Node) -> Leaf {
        let labeling = node.labeling();
        Leaf { trace: node.trace.clone(), certificate: g.relabeled(&labeling), labeling }
    }

    fn key_cmp(&self, other: &Leaf) -> Ordering {
        self.trace.cmp(&other.trace).then_with(|| self.certificate.cmp(&other.certificate))
    }

    /// The automorphism taking this leaf onto `other`.
    fn map_to(&self, other: &Leaf) -> Vec<usize> {
        let mut inverse = vec![0; other.labeling.len()];
        for (a, &p) in other.labeling.iter().enumerate() {
            inverse[p] = a;
        }
        self.labeling.iter().map(|&p| inverse[p]).collect()
    }
}

struct Orbits {
    parent: Vec<usize>,
}

impl Orbits {
    /// Orbits of the group generated by those generators fixing `prefix` pointwise.
    fn new(n: usize, generators: &[Vec<usize>], prefix: &[usize]) -> Orbits {
        let mut orbits = Orbits { parent: (0..n).collect() };
        for g in generators {
            if prefix.iter().all(|&p| g[p] == p) {
                orbits.add(g);
            }
        }
        orbits
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn add(&mut self, g: &[usize]) {
        for (a, &b) in g.iter().enumerate() {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra != rb {
                self.parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }

    fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

fn prefix_lt(trace: &[u64], best: &[u64]) -> bool {
    let m = trace.len().min(best.len());
    trace[..m] < best[..m]
}

struct Engine<'a> {
    g: &'a ColoredGraph,
    generators: Vec<Vec<usize>>,
}

impl Engine<'_> {
    /// Search below `node` for a leaf equivalent to `first`.
    fn find_equivalent(&mut self, node: &Node, first: &Leaf) -> Option<Leaf> {
        if node.trace.len() > first.trace.len() || node.trace[..] != first.trace[..node.trace.len()]
        {
            return None;
        }
        if node.is_discrete() {
            let leaf = Leaf::new(self.g, node);
            return (leaf.certificate == first.certificate).then_some(leaf);
        }
        let cell = node.target_cell();
        let mut orbits = Orbits::new(self.g.n(), &self.generators, &node.prefix);
        let mut tried: Vec<usize> = Vec::new();
        for &w in &cell {
            if tried.iter().any(|&t| orbits.same(t, w)) {
                continue;
            }
            tried.push(w);
            if let Some(leaf) = self.find_equivalent(&node.child(self.g, w), first) {
                return Some(leaf);
            }
        }
        None
    }

    fn canonical(&mut self, node: &Node, best: &mut Option<Leaf>) {
        if let Some(b) = best.as_ref() {
            if prefix_lt(&node.trace, &b.trace) {
                return;
            }
        }
        if node.is_discrete() {
            let leaf = Leaf::new(self.g, node);
            match best.as_ref().map(|b| leaf.key_cmp(b)) {
                None | Some(Ordering::Greater) => *best = Some(leaf),
                Some(Ordering::Equal) => {
                    let gamma = leaf.map_to(best.as_ref().unwrap());
                    if gamma.iter().enumerate().any(|(a, &b)| a != b) {
                        debug_assert!(self.g.is_automorphism(&gamma));
                        self.generators.push(gamma);
                    }
                }
                Some(Ordering::Less) => {}
            }
            return;
        }
        let cell = node.target_cell();
        let mut explored: Vec<usize> = Vec::new();
        for &w in &cell {
            let mut orbits = Orbits::new(self.g.n(), &self.generators, &node.prefix);
            if explored.iter().any(|&e| orbits.same(e, w)) {
                continue;
            }
            explored.push(w);
            self.canonical(&node.child(self.g, w), best);
        }
    }
}

pub fn analyze(g: &ColoredGraph) -> Analysis {
    let mut engine = Engine { g, generators: Vec::new() };

    let mut path = vec![Node::root(g)];
    while !path.last().unwrap().is_discrete() {
        let node = path.last().unwrap();
        let first = node.target_cell()[0];
        let child = node.child(g, first);
        path.push(child);
    }
    let first = Leaf::new(g, path.last().unwrap());

    let mut order = BigUint::from(1u32);
    for d in (0..path.len() - 1).rev() {
        let node = &path[d];
        let base = path[d + 1].prefix[d];
        let mut orbits = Orbits::new(g.n(), &engine.generators, &node.prefix);
        let mut failed: Vec<usize> = Vec::new();
        let cell = node.target_cell();
        for &w in &cell {
            if w == base
                || orbits.same(w, base)
                || failed.iter().any(|&f| orbits.same(f, w))
            {
                continue;
            }
            match engine.find_equivalent(&node.child(g, w), &first) {
                Some(leaf) => {
                    let gamma = first.map_to(&leaf);
                    debug_assert!(g.is_automorphism(&gamma));
                    debug_assert!(node.prefix.iter().all(|&p| gamma[p] == p) && gamma[base] == w);
                    orbits.add(&gamma);
                    engine.generators.push(gamma);
                }
                None => failed.push(w),
            }
        }
        let size = cell.iter().filter(|&&w| orbits.same(w, base)).count();
        order *= BigUint::from(size);
    }

    let mut best = None;
    engine.canonical(&path[0], &mut best);
    let best = best.expect("the search tree has leaves");
    Analysis {
        labeling: best.labeling,
        certificate: best.certificate,
        group_order: order,
        generators: engine.generators,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> ColoredGraph {
        let mut g = ColoredGraph::new(vec![0; n]);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n, 1);
        }
        g
    }

    fn petersen() -> ColoredGraph {
        let mut g = ColoredGraph::new(vec![0; 10]);
        for i in 0..5 {
            g.add_edge(i, (i + 1) % 5, 1);
            g.add_edge(i, i + 5, 1);
            g.add_edge(5 + i, 5 + (i + 2) % 5, 1);
        }
        g
    }

    fn relabel(g: &ColoredGraph, perm: &[usize]) -> ColoredGraph {
        let mut colors = vec![0; g.n()];
        for a in 0..g.n() {
            colors[perm[a]] = g.colors()[a];
        }
        let mut h = ColoredGraph::new(colors);
        for a in 0..g.n() {
            for &(b, c) in g.neighbors(a) {
                if a < b {
                    h.add_edge(perm[a], perm[b], c);
                }
            }
        }
        h
    }

    #[test]
    fn small_group_orders() {
        assert_eq!(analyze(&cycle(7)).group_order, BigUint::from(14u32));
        assert_eq!(analyze(&petersen()).group_order, BigUint::from(120u32));
        assert_eq!(analyze(&ColoredGraph::new(vec![0; 5])).group_order, BigUint::from(120u32));
        let mut path = ColoredGraph::new(vec![0; 4]);
        path.add_edge(0, 1, 1);
        path.add_edge(1, 2, 1);
        path.add_edge(2, 3, 2);
        assert_eq!(analyze(&path).group_order, BigUint::from(1u32));
    }

    #[test]
    fn canonical_form_is_relabeling_invariant() {
        let g = petersen();
        let perm = [3, 7, 1, 9, 0, 2, 8, 4, 6, 5];
        assert_eq!(analyze(&g).certificate, analyze(&relabel(&g, &perm)).certificate);
        let a = analyze(&g);
        assert_eq!(g.relabeled(&a.labeling), a.certificate);
    }

    #[test]
    fn distinguishes_non_isomorphic() {
        // two 6-vertex 2-regular graphs: one hexagon versus two triangles
        let mut triangles = ColoredGraph::new(vec![0; 6]);
        for (a, b) in [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)] {
            triangles.add_edge(a, b, 1);
        }
        assert_ne!(analyze(&cycle(6)).certificate, analyze(&triangles).certificate);
        assert_eq!(analyze(&triangles).group_order, BigUint::from(72u32));
    }
}
