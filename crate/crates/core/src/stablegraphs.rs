//! Stable graphs of type `(g,n)` and the sums over them.
//!
//! A stable graph records the mapping-class-group orbit of a primitive
//! multicurve: vertices carry genera and the labelled leaves, edges are the
//! curve components. The sums evaluated here put a Kontsevich volume at each
//! vertex and an edge weight `l dl / (e^{sl} - 1)` (or its `L = 0`, `s = 1`
//! specialisation) on each edge, producing the Masur-Veech polynomials and
//! the asymptotic multicurve-count integrals through a route completely
//! independent of the twisted recursion.

use crate::poly::Poly;
#[cfg(test)]
use crate::poly::EXTRA_VARS;
use crate::rational::{factorial, Rat};
use crate::trengine::{vk, zeta_moment, TrError};
use num_traits::One;
use serde::Serialize;
use std::collections::HashMap;

/// Decorated graph indexing a mapping-class-group orbit of primitive
/// multicurves. Leaves are labelled `1..n` and fixed by isomorphisms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct StableGraph {
    /// Genus of each vertex.
    pub genus: Vec<u32>,
    /// Sorted leaf labels attached to each vertex.
    pub leaves: Vec<Vec<u32>>,
    /// Sorted unordered vertex pairs, one entry per edge (loops allowed).
    pub edges: Vec<(usize, usize)>,
}

impl StableGraph {
    pub fn n_vertices(&self) -> usize {
        self.genus.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn first_betti(&self) -> usize {
        self.edges.len() + 1 - self.genus.len()
    }

    pub fn total_genus(&self) -> usize {
        self.genus.iter().sum::<u32>() as usize + self.first_betti()
    }

    /// Valence including leaves; loops count twice.
    pub fn valence(&self, v: usize) -> usize {
        let ends = self
            .edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum::<usize>();
        ends + self.leaves[v].len()
    }

    pub fn is_stable(&self) -> bool {
        (0..self.n_vertices()).all(|v| 2 * self.genus[v] as i64 - 2 + self.valence(v) as i64 > 0)
    }

    pub fn is_connected(&self) -> bool {
        let v = self.n_vertices();
        let mut seen = vec![false; v];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(a, b) in &self.edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == u && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn normalized(mut self) -> Self {
        for l in &mut self.leaves {
            l.sort_unstable();
        }
        for e in &mut self.edges {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        self.edges.sort_unstable();
        self
    }

    /// Canonical key: minimum serialisation over all vertex permutations.
    /// Vertices carrying leaves are pinned by them, so the search space is
    /// tiny at desk scale.
    pub fn canon_key(&self) -> Vec<u64> {
        let v = self.n_vertices();
        let mut best: Option<Vec<u64>> = None;
        for perm in permutations(v) {
            let key = self.serialize_under(&perm);
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
        best.unwrap()
    }

    fn serialize_under(&self, perm: &[usize]) -> Vec<u64> {
        // perm[old] = new
        let v = self.n_vertices();
        let mut vert: Vec<(usize, u32, Vec<u32>)> = (0..v)
            .map(|old| (perm[old], self.genus[old], self.leaves[old].clone()))
            .collect();
        vert.sort_unstable();
        let mut key: Vec<u64> = Vec::new();
        for (_, g, leaves) in &vert {
            key.push(u64::from(*g) | (1 << 40));
            key.extend(leaves.iter().map(|&l| l as u64));
        }
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (perm[a], perm[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        edges.sort_unstable();
        for (a, b) in edges {
            key.push(((a as u64) << 20) | b as u64 | (1 << 41));
        }
        key
    }

    /// Automorphism order: compatible vertex permutations times the edge
    /// factors (parallel edges permute freely, each loop's ends can swap).
    pub fn aut_order(&self) -> u64 {
        let v = self.n_vertices();
        let me = self.canon_key();
        // Renaming by p and by q produce the same serialisation exactly when
        // q o p^{-1} is structure preserving, so the count below is the
        // number of vertex automorphisms.
        let mut n_perm = 0u64;
        for perm in permutations(v) {
            if self.serialize_under(&perm) == me {
                n_perm += 1;
            }
        }
        let mut mult: HashMap<(usize, usize), u64> = HashMap::new();
        for &e in &self.edges {
            *mult.entry(e).or_insert(0) += 1;
        }
        let mut factor = 1u64;
        for (&(a, b), &m) in &mult {
            factor *= fact_u64(m);
            if a == b {
                factor *= 1u64 << m; // each loop end-swap
            }
        }
        n_perm * factor
    }
}

fn fact_u64(n: u64) -> u64 {
    (2..=n).product::<u64>().max(1)
}

fn permutations(v: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..v {
        let mut next = Vec::new();
        for p in &out {
            for x in 0..v {
                if !p.contains(&x) {
                    let mut q = p.clone();
                    q.push(x);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

/// Every stable graph of type `(g,n)`, with automorphism order, starting
/// from the edgeless graph (the empty multicurve) and closing under one-edge
/// degenerations: a genus drop with a new loop, or a vertex split
/// distributing genus and attachments.
pub fn enumerate_stable_graphs(g: usize, n: usize) -> Result<Vec<(StableGraph, u64)>, TrError> {
    if 2 * (g as i64) - 2 + (n as i64) <= 0 {
        return Err(TrError::Unstable(g, n));
    }
    let root = StableGraph {
        genus: vec![g as u32],
        leaves: vec![(1..=n as u32).collect()],
        edges: vec![],
    }
    .normalized();
    let mut seen: HashMap<Vec<u64>, StableGraph> = HashMap::new();
    let mut work = vec![root.clone()];
    seen.insert(root.canon_key(), root);
    while let Some(top) = work.pop() {
        for next in degenerations(&top) {
            let next = next.normalized();
            debug_assert_eq!(next.total_genus(), g);
            let key = next.canon_key();
            if !seen.contains_key(&key) {
                seen.insert(key, next.clone());
                work.push(next);
            }
        }
    }
    let mut out: Vec<(StableGraph, u64)> = seen
        .into_values()
        .map(|sg| {
            let aut = sg.aut_order();
            (sg, aut)
        })
        .collect();
    out.sort_by_key(|(sg, _)| (sg.n_edges(), sg.canon_key()));
    Ok(out)
}

fn degenerations(sg: &StableGraph) -> Vec<StableGraph> {
    let mut out = Vec::new();
    let v_count = sg.n_vertices();
    for v in 0..v_count {
        // (a) drop the genus, add a loop
        if sg.genus[v] >= 1 {
            let mut next = sg.clone();
            next.genus[v] -= 1;
            next.edges.push((v, v));
            if next.is_stable() {
                out.push(next);
            }
        }
        // (b) split v into v and a fresh vertex w joined by a new edge,
        // distributing genus, leaves and edge-ends
        let leaf_list = sg.leaves[v].clone();
        let end_list: Vec<(usize, u8)> = sg
            .edges
            .iter()
            .enumerate()
            .flat_map(|(i, &(a, b))| {
                let mut ends = Vec::new();
                if a == v {
                    ends.push((i, 0u8));
                }
                if b == v {
                    ends.push((i, 1u8));
                }
                ends
            })
            .collect();
        let k = leaf_list.len() + end_list.len();
        for h1 in 0..=sg.genus[v] {
            for mask in 0..(1u64 << k) {
                let w = v_count;
                let mut next = sg.clone();
                next.genus[v] = h1;
                next.genus.push(sg.genus[v] - h1);
                next.leaves.push(Vec::new());
                // reassign attachments chosen by the mask to w
                let mut kept_leaves = Vec::new();
                for (i, &leaf) in leaf_list.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        next.leaves[w].push(leaf);
                    } else {
                        kept_leaves.push(leaf);
                    }
                }
                next.leaves[v] = kept_leaves;
                for (j, &(edge_idx, side)) in end_list.iter().enumerate() {
                    if mask & (1 << (leaf_list.len() + j)) != 0 {
                        let e = &mut next.edges[edge_idx];
                        if side == 0 {
                            e.0 = w;
                        } else {
                            e.1 = w;
                        }
                    }
                }
                next.edges.push((v, w));
                if next.is_stable() {
                    debug_assert!(next.is_connected());
                    out.push(next);
                }
            }
        }
    }
    out
}

/// Edge weight of a stable-graph sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeWeight {
    /// `l dl / (e^{s l} - 1)`: produces the Masur-Veech polynomial.
    Zeta,
    /// Same weight with boundary lengths set to zero and `s = 1`: produces
    /// `(6g-6+2n)!` times the integral of the multicurve-growth constant.
    Bgn,
}

/// Evaluates `sum_Gamma 1/#Aut int prod_v V^K prod_e (edge weight)`.
pub fn stable_graph_sum(g: usize, n: usize, weight: EdgeWeight) -> Result<Poly, TrError> {
    let graphs = enumerate_stable_graphs(g, n)?;
    let mut total = Poly::zero(n);
    for (sg, aut) in &graphs {
        let term = graph_term(sg, n, weight)?;
        total = &total + &term.scale(&(Rat::one() / Rat::from_integer((*aut).into())));
    }
    if let EdgeWeight::Bgn = weight {
        total = total.set_sinv_one();
    }
    Ok(total)
}

fn graph_term(sg: &StableGraph, n: usize, weight: EdgeWeight) -> Result<Poly, TrError> {
    // Working context: n leaf variables then one variable per edge.
    let e_count = sg.n_edges();
    let ext = n + e_count;
    let mut prod = Poly::one(ext);
    for v in 0..sg.n_vertices() {
        // Argument order: edge-ends first, then leaves (the volume is
        // symmetric, so only the multiset matters).
        let mut map = Vec::new();
        for (i, &(a, b)) in sg.edges.iter().enumerate() {
            if a == v {
                map.push(n + i);
            }
            if b == v {
                map.push(n + i);
            }
        }
        for &leaf in &sg.leaves[v] {
            map.push(leaf as usize - 1);
        }
        let volume = vk(sg.genus[v] as usize, map.len())?;
        let volume = match weight {
            EdgeWeight::Zeta => volume,
            EdgeWeight::Bgn => {
                // boundary lengths vanish: keep only edge-variable content
                let mut specialised = volume;
                for (slot, &target) in map.iter().enumerate() {
                    if target < n {
                        specialised = specialised.set_lsq_zero(slot);
                    }
                }
                specialised
            }
        };
        prod = &prod * &volume.relabel(ext, &map);
    }
    // Integrate the edge variables one at a time against the zeta weight.
    for e in 0..e_count {
        let var = n + e;
        let mut integrated = Poly::zero(ext);
        for (k, coeff) in prod.coeffs_in(var) {
            integrated = &integrated + &(&coeff * &zeta_moment(k, ext));
        }
        prod = integrated;
    }
    // Shrink the context back to the n leaf variables.
    let back: Vec<usize> = (0..ext).map(|v| if v < n { v } else { 0 }).collect();
    Ok(prod.relabel(n, &back))
}

/// The Masur-Veech volume `MV_{g,n}` as a rational multiple of
/// `PiSq^{3g-3+n}`, computed through two independent routes that are
/// asserted equal:
///
/// * `a'_{g,n}` times the constant-in-`L` term of the twisted-recursion
///   Masur-Veech polynomial at `s = 1`;
/// * `a_{g,n} / (6g-6+2n)!` times the stable-graph sum with the `Bgn`
///   weight (the integral of the multicurve-growth constant).
pub fn mv_volume(g: usize, n: usize) -> Result<Poly, TrError> {
    if 2 * (g as i64) - 2 + (n as i64) < 1 || (g, n) == (0, 3) {
        // 6g - 7 + 2n < 0 makes the normalisation ill-defined on (0,3)
        return Err(TrError::Unstable(g, n));
    }
    let dim = (6 * g as i64 - 6 + 2 * n as i64) as u64;

    // a'_{g,n} = 2^{4g-2+n} (4g-4+n)! / (6g-7+2n)!
    let two_exp = (4 * g as i64 - 2 + n as i64) as u32;
    let two_pow = Rat::from_integer(num_bigint::BigInt::from(2u32).pow(two_exp));
    let a_prime = &two_pow * factorial((4 * g + n) as u64 - 4) / factorial(dim - 1);
    // a_{g,n} = 2^{4g-2+n} (4g-4+n)! (6g-6+2n); a / (6g-6+2n)! = a'
    let a_full = &two_pow * factorial((4 * g + n) as u64 - 4) * Rat::from_integer(dim.into());

    // Route 1: twisted recursion.
    let mv_poly = crate::trengine::twisted_mv(g, n)?;
    let constant = constant_in_l(&mv_poly).set_sinv_one();
    let route1 = drop_lsq(&constant).scale(&a_prime);

    // Route 2: stable-graph sum (top coefficient of the counting polynomial).
    let bgn = stable_graph_sum(g, n, EdgeWeight::Bgn)?;
    let route2 = drop_lsq(&bgn).scale(&(a_full / factorial(dim)));

    if route1 != route2 {
        return Err(TrError::UnbalancedAmplitude);
    }
    Ok(route1)
}

fn constant_in_l(p: &Poly) -> Poly {
    let n = p.arity();
    let mut out = Poly::zero(n);
    for (exp, c) in p.terms() {
        if exp[..n].iter().all(|&e| e == 0) {
            out.add_term(exp.clone(), c.clone());
        }
    }
    out
}

/// Moves a polynomial with no boundary-variable content to the empty context.
fn drop_lsq(p: &Poly) -> Poly {
    let n = p.arity();
    let mut out = Poly::zero(0);
    for (exp, c) in p.terms() {
        assert!(exp[..n].iter().all(|&e| e == 0));
        out.add_term(exp[n..].to_vec(), c.clone());
    }
    out
}

/// Float rendering of a `PiSq^k` multiple.
pub fn pisq_poly_to_f64(p: &Poly) -> f64 {
    p.eval_f64(&vec![0.0; p.arity()], 0.0, 0.0)
}

/// The expected Masur-Veech volumes of the two smallest types, used as
/// fixtures: `MV_{1,1} = 2 pi^2 / 3` and `MV_{0,4} = 2 pi^2`.
pub fn mv_reference(g: usize, n: usize) -> Option<Poly> {
    let pisq = Poly::pisq(0);
    match (g, n) {
        (1, 1) => Some(pisq.scale(&Rat::new(2.into(), 3.into()))),
        (0, 4) => Some(pisq.scale(&Rat::from_integer(2.into()))),
        _ => None,
    }
}

/// DOT-like JSON rendering of a stable graph with its automorphism count.
pub fn stable_graph_json(sg: &StableGraph, aut: u64) -> serde_json::Value {
    serde_json::json!({
        "vertices": (0..sg.n_vertices()).map(|v| serde_json::json!({
            "genus": sg.genus[v],
            "leaves": sg.leaves[v],
        })).collect::<Vec<_>>(),
        "edges": sg.edges.iter().map(|&(a, b)| serde_json::json!([a, b])).collect::<Vec<_>>(),
        "aut": aut,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::trengine::{twisted_mv, twisted_vn};
    use crate::zeta::zeta_even_coeff as _z;

    #[test]
    fn enumerate_small_types() {
        // (0,3): only the edgeless graph.
        let g03 = enumerate_stable_graphs(0, 3).unwrap();
        assert_eq!(g03.len(), 1);
        assert_eq!(g03[0].1, 1);

        // (1,1): edgeless, and the genus-0 vertex with a loop (Aut = 2).
        let g11 = enumerate_stable_graphs(1, 1).unwrap();
        assert_eq!(g11.len(), 2);
        let loops: Vec<u64> = g11
            .iter()
            .filter(|(sg, _)| sg.n_edges() == 1)
            .map(|(_, a)| *a)
            .collect();
        assert_eq!(loops, vec![2]);

        // (0,4): edgeless plus one two-vertex graph per pairing {1i|jk},
        // each with trivial automorphisms.
        let g04 = enumerate_stable_graphs(0, 4).unwrap();
        assert_eq!(g04.len(), 4);
        assert!(g04.iter().all(|(sg, a)| sg.n_edges() <= 1 && *a == 1));
    }

    #[test]
    fn edgeless_contribution_is_vk() {
        // The Tsq^0 part of the zeta sum comes from the edgeless graph only.
        for (g, n) in [(1usize, 1usize), (0, 4), (1, 2)] {
            let total = stable_graph_sum(g, n, EdgeWeight::Zeta).unwrap();
            assert_eq!(total.lsq_part(), vk(g, n).unwrap());
        }
    }

    #[test]
    fn zeta_sum_matches_twisted_recursion() {
        for (g, n) in [(0usize, 4usize), (0, 5), (1, 1), (1, 2), (2, 1)] {
            let sum = stable_graph_sum(g, n, EdgeWeight::Zeta).unwrap();
            let mv = twisted_mv(g, n).unwrap();
            assert_eq!(sum, mv, "stable-graph sum vs twisted recursion ({g},{n})");
        }
    }

    #[test]
    fn bgn_values() {
        // (1,1): the loop graph gives zeta(2)/2 = pi^2/12.
        let bgn = stable_graph_sum(1, 1, EdgeWeight::Bgn).unwrap();
        let expect = Poly::pisq(1).scale(&(_z(1) * rat(1, 2)));
        assert_eq!(bgn, expect);
    }

    #[test]
    fn mv_volume_small() {
        let v11 = mv_volume(1, 1).unwrap();
        assert_eq!(v11, mv_reference(1, 1).unwrap());
        let v04 = mv_volume(0, 4).unwrap();
        assert_eq!(v04, mv_reference(0, 4).unwrap());
    }

    #[test]
    fn mv_volume_higher_types() {
        // Values derived from the reference coefficients and the
        // normalisation constants: a'_{2,1} = 64/21 etc.
        let expect = [
            ((1usize, 2usize), rat(1, 3), 2u32),
            ((2, 1), rat(29, 840), 4),
            ((2, 2), rat(337, 18144), 5),
            ((3, 1), rat(4111, 2223936), 7),
        ];
        for ((g, n), coeff, power) in expect {
            let got = mv_volume(g, n).unwrap();
            assert_eq!(got, Poly::pisq(0).pow(power).scale(&coeff), "({g},{n})");
        }
    }

    #[test]
    fn mv_volume_03_excluded() {
        assert!(mv_volume(0, 3).is_err());
    }

    #[test]
    fn vn_top_coefficient_consistency() {
        // The top Tsq coefficient of VN equals the Bgn sum over (6g-6+2n)!.
        for (g, n) in [(1usize, 1usize), (0, 4), (1, 2)] {
            let (_, vn) = twisted_vn(g, n).unwrap();
            let dim = (6 * g as i64 - 6 + 2 * n as i64) as u64;
            let bgn = stable_graph_sum(g, n, EdgeWeight::Bgn).unwrap();
            let top = constant_in_l(&vn);
            // strip Tsq exponent, compare rationals against bgn / dim!
            let d = 3 * g as i64 - 3 + n as i64;
            let mut top_exp = vec![0u32; n + EXTRA_VARS];
            top_exp[n] = d as u32;
            top_exp[n + 1] = d as u32;
            let mut bgn_exp = vec![0u32; n + EXTRA_VARS];
            bgn_exp[n] = d as u32;
            assert_eq!(top.coeff(&top_exp), bgn.coeff(&bgn_exp) / factorial(dim));
        }
    }

    #[test]
    fn loop_aut_counts() {
        // A genus-0 vertex with two loops and a leaf has Aut order 8.
        let sg = StableGraph {
            genus: vec![0],
            leaves: vec![vec![1]],
            edges: vec![(0, 0), (0, 0)],
        };
        assert_eq!(sg.aut_order(), 8);
    }
}
