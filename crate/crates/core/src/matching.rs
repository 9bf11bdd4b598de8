//! Minimum-weight matching of defects on a graph with boundary vertices.
//!
//! A defect is matched either to another defect (along a shortest path) or
//! to the boundary (along a shortest path to the nearest boundary vertex).
//! Paths never pass through boundary vertices. Edge weights are unit.

use std::cell::RefCell;
use std::collections::VecDeque;

use crate::blossom;
use crate::code::Graph;
use crate::error::{Error, Result};
use crate::gf2::{Basis, BitVec};

const INF: u32 = u32::MAX;

/// A graph prepared for repeated matching: boundary distances and the
/// canonical first step towards the boundary are computed once.
#[derive(Clone, Debug)]
pub struct MatchingGraph {
    graph: Graph,
    bdist: Vec<u32>,
    bstep: Vec<Option<(u32, u32)>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingInstance {
    /// Graph vertices, strictly increasing.
    pub defects: Vec<usize>,
    /// `None` when the pair is farther apart than it could ever be useful
    /// (pruned instances only).
    pub pairwise_dist: Vec<Vec<Option<u32>>>,
    /// `None` when no boundary vertex is reachable.
    pub boundary_dist: Vec<Option<u32>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Partner {
    Defect(usize),
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingResult {
    /// Edge set over the graph's edges.
    pub edge_set: BitVec,
    pub total_weight: u64,
    /// Partner of each defect, by position in the instance.
    pub partners: Vec<Partner>,
}

struct Bfs {
    dist: Vec<u32>,
    /// Visited vertices in BFS order; doubles as the queue.
    touched: Vec<u32>,
}

struct Scratch {
    bfs: Bfs,
    /// Defect position of each vertex, INF if not a defect.
    marks: Vec<u32>,
}

impl Scratch {
    fn mark(&mut self, n: usize, defects: &[usize]) {
        if self.marks.len() < n {
            self.marks.resize(n, INF);
        }
        for (i, &d) in defects.iter().enumerate() {
            self.marks[d] = i as u32;
        }
    }

    fn unmark(&mut self, defects: &[usize]) {
        for &d in defects {
            self.marks[d] = INF;
        }
    }

    fn split(&mut self) -> (&mut Bfs, &[u32]) {
        (&mut self.bfs, &self.marks)
    }
}

impl Bfs {
    fn reset(&mut self, n: usize) {
        if self.dist.len() < n {
            self.dist.resize(n, INF);
        }
        for &v in &self.touched {
            self.dist[v as usize] = INF;
        }
        self.touched.clear();
    }
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = RefCell::new(Scratch {
        bfs: Bfs { dist: Vec::new(), touched: Vec::new() },
        marks: Vec::new(),
    });
}

impl MatchingGraph {
    pub fn new(graph: Graph) -> Self {
        let n = graph.n_vertices();
        let mut bdist = vec![INF; n];
        let mut queue = VecDeque::new();
        for v in 0..n {
            if graph.is_boundary(v) {
                bdist[v] = 0;
                queue.push_back(v);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &(w, _) in graph.neighbors(u) {
                let w = w as usize;
                if bdist[w] == INF && !graph.is_boundary(w) {
                    bdist[w] = bdist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        let bstep = (0..n)
            .map(|v| {
                if graph.is_boundary(v) || bdist[v] == INF {
                    return None;
                }
                graph.neighbors(v).iter().copied().find(|&(w, _)| bdist[w as usize] != INF && bdist[w as usize] + 1 == bdist[v])
            })
            .collect();
        MatchingGraph { graph, bdist, bstep }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Distance from `v` to the nearest boundary vertex.
    pub fn boundary_distance(&self, v: usize) -> Option<u32> {
        (self.bdist[v] != INF).then_some(self.bdist[v])
    }

    /// Distances among defects and to the boundary. With `prune`, pairs at
    /// distance at least the sum of their boundary distances are left out;
    /// they never improve on matching both to the boundary.
    pub fn build_instance(&self, defects: &[usize], prune: bool) -> Result<MatchingInstance> {
        let mut defects = defects.to_vec();
        defects.sort_unstable();
        defects.dedup();
        for &d in &defects {
            if d >= self.graph.n_vertices() {
                return Err(Error::Usage(format!("defect {d} is not a vertex")));
            }
            if self.graph.is_boundary(d) {
                return Err(Error::Usage(format!("defect {d} is a boundary vertex")));
            }
        }
        let k = defects.len();
        let boundary_dist: Vec<Option<u32>> = defects.iter().map(|&d| self.boundary_distance(d)).collect();
        // Search from defects in decreasing boundary distance; each search only
        // needs to reach defects later in that order, the farthest of which
        // from the boundary is the next one.
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&i| (std::cmp::Reverse(boundary_dist[i].unwrap_or(INF)), i));
        let mut rank = vec![0u32; k];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r as u32;
        }
        let mut pairwise_dist = vec![vec![None; k]; k];
        SCRATCH.with(|s| {
            let mut s = s.borrow_mut();
            s.mark(self.graph.n_vertices(), &defects);
            for (r, &i) in order.iter().enumerate().take(k.saturating_sub(1)) {
                let next = boundary_dist[order[r + 1]];
                let radius = match (prune, boundary_dist[i], next) {
                    (true, Some(a), Some(b)) => (a + b).saturating_sub(1),
                    _ => INF,
                };
                let remaining = k - 1 - r;
                let mut found = 0;
                let (bfs, marks) = s.split();
                self.bfs(bfs, defects[i], radius, |v, d| {
                    let j = marks[v];
                    if j != INF && rank[j as usize] as usize > r {
                        let j = j as usize;
                        pairwise_dist[i][j] = Some(d);
                        pairwise_dist[j][i] = Some(d);
                        found += 1;
                        return found < remaining;
                    }
                    true
                });
            }
            s.unmark(&defects);
        });
        if prune {
            for i in 0..k {
                for j in 0..k {
                    if let (Some(d), Some(a), Some(b)) = (pairwise_dist[i][j], boundary_dist[i], boundary_dist[j]) {
                        if d >= a + b {
                            pairwise_dist[i][j] = None;
                        }
                    }
                }
            }
        }
        Ok(MatchingInstance { defects, pairwise_dist, boundary_dist })
    }

    /// Breadth-first search from `src` over interior vertices up to `radius`.
    /// `visit(v, d)` is called once per reached vertex other than `src`;
    /// returning false stops the search.
    fn bfs(&self, s: &mut Bfs, src: usize, radius: u32, mut visit: impl FnMut(usize, u32) -> bool) {
        s.reset(self.graph.n_vertices());
        s.dist[src] = 0;
        s.touched.push(src as u32);
        let mut head = 0;
        while head < s.touched.len() {
            let u = s.touched[head] as usize;
            head += 1;
            let du = s.dist[u];
            if du >= radius {
                break;
            }
            for &(w, _) in self.graph.neighbors(u) {
                let wu = w as usize;
                if s.dist[wu] != INF || self.graph.is_boundary(wu) {
                    continue;
                }
                s.dist[wu] = du + 1;
                s.touched.push(w);
                if !visit(wu, du + 1) {
                    return;
                }
            }
        }
    }

    /// Flips the edges of the canonical shortest path between two interior
    /// vertices at distance `d`: walking back from `dst`, each step takes the
    /// smallest-index neighbor one step closer to `src`.
    fn flip_path(&self, src: usize, dst: usize, d: u32, edges: &mut BitVec) {
        SCRATCH.with(|s| {
            let mut s = s.borrow_mut();
            let s = &mut s.bfs;
            self.bfs(s, src, d, |v, _| v != dst);
            let mut v = dst;
            while v != src {
                let dv = s.dist[v];
                let &(u, e) = self
                    .graph
                    .neighbors(v)
                    .iter()
                    .find(|&&(u, _)| {
                        let du = s.dist[u as usize];
                        !self.graph.is_boundary(u as usize) && du != INF && du + 1 == dv
                    })
                    .expect("broken shortest-path record");
                edges.flip(e as usize);
                v = u as usize;
            }
        });
    }

    fn flip_boundary_path(&self, src: usize, edges: &mut BitVec) {
        let mut v = src;
        while let Some((u, e)) = self.bstep[v] {
            edges.flip(e as usize);
            v = u as usize;
        }
    }

    fn realize(&self, inst: &MatchingInstance, partners: Vec<Partner>) -> MatchingResult {
        let mut edge_set = BitVec::zeros(Basis::Edges, self.graph.n_edges());
        let mut total = 0u64;
        for (i, p) in partners.iter().enumerate() {
            match *p {
                Partner::Boundary => {
                    total += inst.boundary_dist[i].unwrap() as u64;
                    self.flip_boundary_path(inst.defects[i], &mut edge_set);
                }
                Partner::Defect(j) if i < j => {
                    let d = inst.pairwise_dist[i][j].unwrap();
                    total += d as u64;
                    self.flip_path(inst.defects[i], inst.defects[j], d, &mut edge_set);
                }
                Partner::Defect(_) => {}
            }
        }
        MatchingResult { edge_set, total_weight: total, partners }
    }

    /// Exact minimum-weight matching via the blossom solver on the derived
    /// graph: defect `i` and its boundary twin `k+i` joined at the boundary
    /// distance, defects joined at their path distance, and the twins of
    /// every joined pair joined to each other at weight zero. Components of
    /// the pair graph are solved separately.
    pub fn solve_mwpm(&self, inst: &MatchingInstance) -> Result<MatchingResult> {
        let k = inst.defects.len();
        let mut comp: Vec<usize> = (0..k).collect();
        fn find(c: &mut [usize], mut x: usize) -> usize {
            while c[x] != x {
                c[x] = c[c[x]];
                x = c[x];
            }
            x
        }
        for i in 0..k {
            for j in i + 1..k {
                if inst.pairwise_dist[i][j].is_some() {
                    let (a, b) = (find(&mut comp, i), find(&mut comp, j));
                    if a != b {
                        comp[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
        for i in 0..k {
            let r = find(&mut comp, i);
            groups.entry(r).or_default().push(i);
        }
        let mut partners = vec![Partner::Boundary; k];
        for members in groups.values() {
            self.solve_component(inst, members, &mut partners)?;
        }
        Ok(self.realize(inst, partners))
    }

    fn solve_component(&self, inst: &MatchingInstance, members: &[usize], partners: &mut [Partner]) -> Result<()> {
        let k = members.len();
        let unmatched = |i: usize| Error::Infeasible(format!("defect {} left unmatched", inst.defects[i]));
        if k == 1 {
            let i = members[0];
            return match inst.boundary_dist[i] {
                Some(_) => Ok(()),
                None => Err(unmatched(i)),
            };
        }
        let mut cost: Vec<(usize, usize, i64)> = Vec::new();
        for (a, &i) in members.iter().enumerate() {
            if let Some(b) = inst.boundary_dist[i] {
                cost.push((a, k + a, b as i64));
            }
            for (b, &j) in members.iter().enumerate().skip(a + 1) {
                if let Some(d) = inst.pairwise_dist[i][j] {
                    cost.push((a, b, d as i64));
                    cost.push((k + a, k + b, 0));
                }
            }
        }
        let top = cost.iter().map(|e| e.2).max().unwrap_or(0) + 1;
        let edges: Vec<blossom::WeightedEdge> = cost.iter().map(|&(i, j, w)| (i, j, 2 * (top - w))).collect();
        let mate = blossom::max_weight_matching(2 * k, &edges, true);
        for (a, &i) in members.iter().enumerate() {
            partners[i] = match mate[a] {
                Some(b) if b < k => Partner::Defect(members[b]),
                Some(b) if b == k + a => Partner::Boundary,
                _ => return Err(unmatched(i)),
            };
        }
        Ok(())
    }

    /// Exhaustive minimum over all pairings and boundary assignments (dynamic
    /// programming over subsets). At most 14 defects.
    pub fn brute_force_mwpm(&self, inst: &MatchingInstance) -> Result<MatchingResult> {
        let k = inst.defects.len();
        if k > 14 {
            return Err(Error::Size(format!("brute force needs at most 14 defects, got {k}")));
        }
        let full = (1usize << k) - 1;
        let mut best = vec![u64::MAX; 1 << k];
        let mut choice = vec![(0usize, Partner::Boundary); 1 << k];
        best[0] = 0;
        for mask in 1..=full {
            let i = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << i);
            if let Some(b) = inst.boundary_dist[i] {
                if best[rest] != u64::MAX && best[rest] + (b as u64) < best[mask] {
                    best[mask] = best[rest] + b as u64;
                    choice[mask] = (i, Partner::Boundary);
                }
            }
            for j in i + 1..k {
                if rest & (1 << j) == 0 {
                    continue;
                }
                if let Some(d) = inst.pairwise_dist[i][j] {
                    let r = rest & !(1 << j);
                    if best[r] != u64::MAX && best[r] + (d as u64) < best[mask] {
                        best[mask] = best[r] + d as u64;
                        choice[mask] = (i, Partner::Defect(j));
                    }
                }
            }
        }
        if best[full] == u64::MAX {
            return Err(Error::Infeasible("no complete pairing exists".into()));
        }
        let mut partners = vec![Partner::Boundary; k];
        let mut mask = full;
        while mask != 0 {
            let (i, p) = choice[mask];
            partners[i] = p;
            mask &= !(1 << i);
            if let Partner::Defect(j) = p {
                partners[j] = Partner::Defect(i);
                mask &= !(1 << j);
            }
        }
        Ok(self.realize(inst, partners))
    }

    /// Relative boundary of an edge set: interior vertices with odd
    /// incidence, as a sorted vertex list.
    pub fn relative_boundary(&self, edges: &BitVec) -> Vec<usize> {
        let mut odd = vec![false; self.graph.n_vertices()];
        for e in edges.ones() {
            let [u, v] = self.graph.edges[e];
            if u != v {
                odd[u] ^= true;
                odd[v] ^= true;
            }
        }
        (0..odd.len()).filter(|&v| odd[v] && !self.graph.is_boundary(v)).collect()
    }

    /// Matches the given defects and returns the correcting edge set.
    pub fn decode(&self, defects: &[usize]) -> Result<MatchingResult> {
        let inst = self.build_instance(defects, true)?;
        self.solve_mwpm(&inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{Color, GraphVertex};

    /// Path 0-1-...-(n-1) with boundary vertices at both ends.
    fn path(n: usize) -> MatchingGraph {
        let vertices = (0..n)
            .map(|i| GraphVertex { lattice: i, color: Color::B, boundary: i == 0 || i == n - 1 })
            .collect();
        let edges = (0..n - 1).map(|i| [i, i + 1]).collect();
        MatchingGraph::new(Graph::new(vertices, edges))
    }

    #[test]
    fn empty_instance() {
        let g = path(6);
        let inst = g.build_instance(&[], true).unwrap();
        assert!(inst.defects.is_empty());
        assert_eq!(g.solve_mwpm(&inst).unwrap().total_weight, 0);
        assert_eq!(g.brute_force_mwpm(&inst).unwrap().total_weight, 0);
    }

    #[test]
    fn adjacent_pair_and_boundary() {
        let g = path(12);
        let r = g.decode(&[5, 6]).unwrap();
        assert_eq!(r.total_weight, 1);
        assert_eq!(r.edge_set.ones().collect::<Vec<_>>(), vec![5]);
        let r = g.decode(&[2]).unwrap();
        assert_eq!(r.total_weight, 2);
        assert_eq!(g.relative_boundary(&r.edge_set), vec![2]);
    }

    #[test]
    fn far_pair_goes_to_boundary() {
        let g = path(6);
        // distances to the boundary are 1 each, pairwise 3
        let inst = g.build_instance(&[1, 4], false).unwrap();
        assert_eq!(inst.pairwise_dist[0][1], Some(3));
        assert_eq!(g.brute_force_mwpm(&inst).unwrap().total_weight, 2);
        assert_eq!(g.solve_mwpm(&inst).unwrap().total_weight, 2);
    }

    #[test]
    fn boundary_defect_is_rejected() {
        let g = path(6);
        assert!(matches!(g.build_instance(&[0], true), Err(Error::Usage(_))));
    }

    #[test]
    fn four_on_a_path() {
        let g = path(20);
        let inst = g.build_instance(&[3, 5, 9, 16], false).unwrap();
        let bf = g.brute_force_mwpm(&inst).unwrap();
        // 3-5 (2) and 9-16 (7) beat 3 -> boundary, 5-9, 16 -> boundary (10)
        assert_eq!(bf.total_weight, 9);
        assert_eq!(g.solve_mwpm(&inst).unwrap().total_weight, 9);
    }

    #[test]
    fn no_boundary_odd_count_is_infeasible() {
        let vertices = (0..3).map(|i| GraphVertex { lattice: i, color: Color::B, boundary: false }).collect();
        let g = MatchingGraph::new(Graph::new(vertices, vec![[0, 1], [1, 2]]));
        let inst = g.build_instance(&[0, 1, 2], true).unwrap();
        assert!(matches!(g.solve_mwpm(&inst), Err(Error::Infeasible(_))));
        assert!(matches!(g.brute_force_mwpm(&inst), Err(Error::Infeasible(_))));
    }
}
