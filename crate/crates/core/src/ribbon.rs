//! Ribbon graph combinatorics.
//!
//! A ribbon graph is a pair of permutations on a set of half-edges: a
//! fixed-point-free involution `iota` pairing half-edges into edges, and a
//! permutation `sigma` whose cycles are the vertices (cyclic order of
//! half-edges). Faces are the cycles of `phi = iota o sigma^{-1}` and carry
//! labels `1..n`. All graphs here are connected, reduced (valence >= 3) and
//! labelled; isomorphisms preserve the face labels.

use crate::rational::{rat_to_string, Rat};
use itertools::Itertools;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RibbonError {
    #[error("iota must be a fixed-point-free involution")]
    BadInvolution,
    #[error("sigma and iota must act on the same half-edge set")]
    BadPermutation,
    #[error("graph is not connected")]
    NotConnected,
    #[error("vertex of valence {0} < 3 (graph not reduced)")]
    NotReduced(usize),
    #[error("face labelling must be a bijection onto 1..n")]
    BadLabels,
    #[error("unstable type ({0},{1})")]
    Unstable(i64, usize),
    #[error("type ({0},{1}) exceeds the supported size (6g-6+3n <= 15)")]
    TooLarge(usize, usize),
    #[error("metric must assign a positive length to every edge")]
    BadMetric,
    #[error("no admissible spanning subset found for the adjacency matrix")]
    NoAdmissibleSubset,
    #[error("invalid graph JSON: {0}")]
    BadJson(String),
}

/// Labelled ribbon graph on half-edges `0..2E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RibbonGraph {
    sigma: Vec<usize>,
    iota: Vec<usize>,
    /// Edge id for each half-edge; edges are numbered by their smaller half-edge.
    edge_of: Vec<usize>,
    /// Representative (smaller) half-edge of each edge.
    edge_rep: Vec<usize>,
    /// Face cycles of `phi = iota o sigma^{-1}`, indexed by label-1.
    faces: Vec<Vec<usize>>,
    face_of: Vec<usize>,
    vertices: Vec<Vec<usize>>,
    vertex_of: Vec<usize>,
    genus: usize,
}

/// Positive edge lengths, indexed by edge id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metric {
    pub lengths: Vec<Rat>,
}

impl Metric {
    pub fn new(lengths: Vec<Rat>) -> Result<Self, RibbonError> {
        if lengths.iter().any(|l| !l.is_positive()) {
            return Err(RibbonError::BadMetric);
        }
        Ok(Metric { lengths })
    }

    pub fn from_ints(lengths: &[i64]) -> Self {
        Metric {
            lengths: lengths
                .iter()
                .map(|&l| Rat::from_integer(l.into()))
                .collect(),
        }
    }
}

impl RibbonGraph {
    /// Builds a graph from vertex cycles, `iota` and a face labelling.
    /// `face_labels` maps the smallest half-edge of each `phi`-cycle to its
    /// label in `1..=n`.
    pub fn new(
        sigma_cycles: &[Vec<usize>],
        iota: Vec<usize>,
        face_labels: &HashMap<usize, usize>,
    ) -> Result<Self, RibbonError> {
        let m = iota.len();
        let mut sigma = vec![usize::MAX; m];
        for cyc in sigma_cycles {
            if cyc.len() < 3 {
                return Err(RibbonError::NotReduced(cyc.len()));
            }
            for i in 0..cyc.len() {
                let h = cyc[i];
                if h >= m || sigma[h] != usize::MAX {
                    return Err(RibbonError::BadPermutation);
                }
                sigma[h] = cyc[(i + 1) % cyc.len()];
            }
        }
        if sigma.iter().any(|&s| s == usize::MAX) {
            return Err(RibbonError::BadPermutation);
        }
        Self::from_perms_labeled(sigma, iota, |faces| {
            let n = faces.len();
            let mut order: Vec<Option<usize>> = vec![None; n];
            for (idx, f) in faces.iter().enumerate() {
                let key = *f.iter().min().unwrap();
                let label = *face_labels.get(&key).ok_or(RibbonError::BadLabels)?;
                if !(1..=n).contains(&label) || order[label - 1].is_some() {
                    return Err(RibbonError::BadLabels);
                }
                order[label - 1] = Some(idx);
            }
            Ok(order.into_iter().map(Option::unwrap).collect())
        })
    }

    /// Internal constructor: `label_order` receives the raw `phi`-cycles and
    /// returns the face indices in label order.
    fn from_perms_labeled<F>(
        sigma: Vec<usize>,
        iota: Vec<usize>,
        label_order: F,
    ) -> Result<Self, RibbonError>
    where
        F: FnOnce(&[Vec<usize>]) -> Result<Vec<usize>, RibbonError>,
    {
        let m = sigma.len();
        if iota.len() != m {
            return Err(RibbonError::BadPermutation);
        }
        for h in 0..m {
            if iota[h] >= m || iota[h] == h || iota[iota[h]] != h {
                return Err(RibbonError::BadInvolution);
            }
            if sigma[h] >= m {
                return Err(RibbonError::BadPermutation);
            }
        }
        // sigma must be a permutation.
        let mut seen = vec![false; m];
        for &s in &sigma {
            if seen[s] {
                return Err(RibbonError::BadPermutation);
            }
            seen[s] = true;
        }

        let vertices = cycles_of(&sigma);
        for v in &vertices {
            if v.len() < 3 {
                return Err(RibbonError::NotReduced(v.len()));
            }
        }
        if !connected(&sigma, &iota) {
            return Err(RibbonError::NotConnected);
        }

        let mut sigma_inv = vec![0usize; m];
        for h in 0..m {
            sigma_inv[sigma[h]] = h;
        }
        let phi: Vec<usize> = (0..m).map(|h| iota[sigma_inv[h]]).collect();
        let raw_faces = cycles_of(&phi);
        let order = label_order(&raw_faces)?;
        if order.len() != raw_faces.len() {
            return Err(RibbonError::BadLabels);
        }
        let faces: Vec<Vec<usize>> = order.iter().map(|&i| raw_faces[i].clone()).collect();

        let n_v = vertices.len();
        let n_e = m / 2;
        let n_f = faces.len();
        let euler = n_v as i64 - n_e as i64 + n_f as i64;
        if euler % 2 != 0 || euler > 2 {
            return Err(RibbonError::BadPermutation);
        }
        let genus = ((2 - euler) / 2) as usize;

        let mut edge_of = vec![usize::MAX; m];
        let mut edge_rep = Vec::with_capacity(n_e);
        for h in 0..m {
            if edge_of[h] == usize::MAX {
                let id = edge_rep.len();
                edge_of[h] = id;
                edge_of[iota[h]] = id;
                edge_rep.push(h);
            }
        }
        let mut face_of = vec![usize::MAX; m];
        for (i, f) in faces.iter().enumerate() {
            for &h in f {
                face_of[h] = i;
            }
        }
        let mut vertex_of = vec![usize::MAX; m];
        for (i, v) in vertices.iter().enumerate() {
            for &h in v {
                vertex_of[h] = i;
            }
        }
        Ok(RibbonGraph {
            sigma,
            iota,
            edge_of,
            edge_rep,
            faces,
            face_of,
            vertices,
            vertex_of,
            genus,
        })
    }

    pub fn n_half_edges(&self) -> usize {
        self.sigma.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_rep.len()
    }

    pub fn n_boundaries(&self) -> usize {
        self.faces.len()
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn sigma(&self, h: usize) -> usize {
        self.sigma[h]
    }

    pub fn iota(&self, h: usize) -> usize {
        self.iota[h]
    }

    pub fn edge_of(&self, h: usize) -> usize {
        self.edge_of[h]
    }

    pub fn edge_rep(&self, e: usize) -> usize {
        self.edge_rep[e]
    }

    /// Face index (= label - 1) of a half-edge.
    pub fn face_of(&self, h: usize) -> usize {
        self.face_of[h]
    }

    pub fn vertex_of(&self, h: usize) -> usize {
        self.vertex_of[h]
    }

    pub fn vertices(&self) -> &[Vec<usize>] {
        &self.vertices
    }

    /// Face cycles in label order; `faces()[i]` is the `phi`-cycle of label i+1.
    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn is_trivalent(&self) -> bool {
        self.vertices.iter().all(|v| v.len() == 3)
    }

    /// A loop edge bounds the same vertex on both sides.
    pub fn is_loop(&self, e: usize) -> bool {
        let h = self.edge_rep[e];
        self.vertex_of[h] == self.vertex_of[self.iota[h]]
    }

    pub fn perimeters(&self, metric: &Metric) -> Vec<Rat> {
        self.faces
            .iter()
            .map(|f| {
                f.iter()
                    .map(|&h| metric.lengths[self.edge_of[h]].clone())
                    .sum()
            })
            .collect()
    }

    /// `n x E` matrix: multiplicity of each edge around each face.
    pub fn adjacency_matrix(&self) -> Vec<Vec<u32>> {
        let mut a = vec![vec![0u32; self.n_edges()]; self.n_boundaries()];
        for (i, f) in self.faces.iter().enumerate() {
            for &h in f {
                a[i][self.edge_of[h]] += 1;
            }
        }
        a
    }

    // -- canonical form ----------------------------------------------------

    /// Deterministic traversal from `start`; returns the serialized key and
    /// the old-to-new half-edge relabelling.
    fn traversal_key(&self, start: usize) -> (Vec<u32>, Vec<usize>) {
        let m = self.n_half_edges();
        let mut new_of_old = vec![usize::MAX; m];
        let mut old_of_new = Vec::with_capacity(m);
        new_of_old[start] = 0;
        old_of_new.push(start);
        let mut next = 0;
        while next < old_of_new.len() {
            let h = old_of_new[next];
            next += 1;
            for nb in [self.sigma[h], self.iota[h]] {
                if new_of_old[nb] == usize::MAX {
                    new_of_old[nb] = old_of_new.len();
                    old_of_new.push(nb);
                }
            }
        }
        debug_assert_eq!(old_of_new.len(), m);
        let mut key = Vec::with_capacity(3 * m);
        for k in 0..m {
            key.push(new_of_old[self.sigma[old_of_new[k]]] as u32);
        }
        for k in 0..m {
            key.push(new_of_old[self.iota[old_of_new[k]]] as u32);
        }
        for k in 0..m {
            key.push(self.face_of[old_of_new[k]] as u32);
        }
        (key, new_of_old)
    }

    /// Canonical key: lexicographic minimum of the traversal keys over all
    /// starting half-edges. Two labelled graphs are isomorphic iff their keys
    /// agree; relabelling half-edges never changes the key.
    pub fn canon_key(&self) -> Vec<u32> {
        (0..self.n_half_edges())
            .map(|s| self.traversal_key(s).0)
            .min()
            .expect("nonempty graph")
    }

    /// All automorphisms as half-edge permutations (commuting with `sigma`
    /// and `iota` and preserving every labelled face). The identity is
    /// included; for a connected graph an automorphism is determined by the
    /// image of a single half-edge.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let m = self.n_half_edges();
        let (ref_key, ref_map) = self.traversal_key(0);
        let mut result = Vec::new();
        for s in 0..m {
            let (key, map) = self.traversal_key(s);
            if key == ref_key {
                // phi = map^{-1} o ref_map sends 0 to s and commutes with both
                // permutations.
                let mut inv = vec![0usize; m];
                for (old, &new) in map.iter().enumerate() {
                    inv[new] = old;
                }
                let phi: Vec<usize> = (0..m).map(|h| inv[ref_map[h]]).collect();
                result.push(phi);
            }
        }
        result
    }

    pub fn aut_order(&self) -> u64 {
        let m = self.n_half_edges();
        let (ref_key, _) = self.traversal_key(0);
        (0..m)
            .filter(|&s| self.traversal_key(s).0 == ref_key)
            .count() as u64
    }

    /// Order of the subgroup preserving the metric.
    pub fn metric_aut_order(&self, metric: &Metric) -> u64 {
        self.automorphisms()
            .iter()
            .filter(|phi| {
                (0..self.n_edges()).all(|e| {
                    let h = self.edge_rep[e];
                    metric.lengths[self.edge_of[phi[h]]] == metric.lengths[e]
                })
            })
            .count() as u64
    }

    // -- contraction --------------------------------------------------------

    /// Contracts a non-loop edge; the merged vertex inherits the spliced
    /// cyclic order and face labels are carried over.
    pub fn contract(&self, e: usize) -> Option<RibbonGraph> {
        if self.is_loop(e) {
            return None;
        }
        let h = self.edge_rep[e];
        let hb = self.iota[h];
        let m = self.n_half_edges();
        // Dense reindex of the remaining half-edges.
        let mut new_id = vec![usize::MAX; m];
        let mut cnt = 0;
        for x in 0..m {
            if x != h && x != hb {
                new_id[x] = cnt;
                cnt += 1;
            }
        }
        // Splice the two cycles: the predecessor of h continues into hb's
        // cycle and vice versa. Neither sigma[h] nor sigma[hb] can be h or hb
        // since the edge is not a loop and valences are >= 3.
        let mut sigma = vec![0usize; cnt];
        let mut iota = vec![0usize; cnt];
        for x in 0..m {
            if x == h || x == hb {
                continue;
            }
            let s = if self.sigma[x] == h {
                self.sigma[hb]
            } else if self.sigma[x] == hb {
                self.sigma[h]
            } else {
                self.sigma[x]
            };
            sigma[new_id[x]] = new_id[s];
            iota[new_id[x]] = new_id[self.iota[x]];
        }
        // Carry labels: each old face keeps its half-edges except h, hb.
        let old_face_label: Vec<usize> = (0..m)
            .filter(|&x| x != h && x != hb)
            .map(|x| self.face_of[x])
            .collect();
        RibbonGraph::from_perms_labeled(sigma, iota, |faces| {
            let n = faces.len();
            let mut order = vec![usize::MAX; n];
            for (idx, f) in faces.iter().enumerate() {
                let lbl = old_face_label[f[0]];
                if lbl >= n || (order[lbl] != usize::MAX && order[lbl] != idx) {
                    return Err(RibbonError::BadLabels);
                }
                order[lbl] = idx;
            }
            if order.iter().any(|&o| o == usize::MAX) {
                return Err(RibbonError::BadLabels);
            }
            Ok(order)
        })
        .ok()
    }

    // -- JSON ---------------------------------------------------------------

    pub fn to_json(&self) -> serde_json::Value {
        let doc = GraphJson {
            n_half_edges: self.n_half_edges(),
            iota: self.iota.clone(),
            sigma_cycles: self.vertices.clone(),
            face_labels: self
                .faces
                .iter()
                .enumerate()
                .map(|(i, f)| (f.iter().min().unwrap().to_string(), i + 1))
                .collect(),
        };
        serde_json::to_value(doc).expect("graph serialization")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, RibbonError> {
        let doc: GraphJson =
            serde_json::from_value(v.clone()).map_err(|e| RibbonError::BadJson(e.to_string()))?;
        if doc.iota.len() != doc.n_half_edges {
            return Err(RibbonError::BadJson("iota length != n_half_edges".into()));
        }
        let labels: HashMap<usize, usize> = doc
            .face_labels
            .iter()
            .map(|(k, &v)| {
                k.parse::<usize>()
                    .map(|h| (h, v))
                    .map_err(|_| RibbonError::BadJson(format!("bad half-edge key {k:?}")))
            })
            .collect::<Result<_, _>>()?;
        RibbonGraph::new(&doc.sigma_cycles, doc.iota, &labels)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n_half_edges: usize,
    iota: Vec<usize>,
    sigma_cycles: Vec<Vec<usize>>,
    face_labels: HashMap<String, usize>,
}

fn cycles_of(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut cycles = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cyc = vec![start];
        seen[start] = true;
        let mut x = perm[start];
        while x != start {
            seen[x] = true;
            cyc.push(x);
            x = perm[x];
        }
        cycles.push(cyc);
    }
    cycles
}

fn connected(sigma: &[usize], iota: &[usize]) -> bool {
    let m = sigma.len();
    if m == 0 {
        return false;
    }
    let mut seen = vec![false; m];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(h) = stack.pop() {
        for nb in [sigma[h], iota[h]] {
            if !seen[nb] {
                seen[nb] = true;
                count += 1;
                stack.push(nb);
            }
        }
    }
    count == m
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

pub fn check_stable(g: usize, n: usize) -> Result<(), RibbonError> {
    if 2 * (g as i64) - 2 + n as i64 <= 0 {
        return Err(RibbonError::Unstable(g as i64, n));
    }
    if 6 * g + 3 * n > 21 {
        // 6g - 6 + 3n <= 15
        return Err(RibbonError::TooLarge(g, n));
    }
    Ok(())
}

/// All labelled trivalent ribbon graphs of type `(g,n)` up to isomorphism,
/// with automorphism orders.
pub fn enumerate_trivalent(g: usize, n: usize) -> Result<Vec<(RibbonGraph, u64)>, RibbonError> {
    check_stable(g, n)?;
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<(RibbonGraph, u64)>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&(g, n)) {
        return Ok(hit.as_ref().clone());
    }

    let n_edges = 6 * g + 3 * n - 6;
    let m = 2 * n_edges; // = 3 * n_vertices
    let mut pairing: Vec<Option<usize>> = vec![None; m];
    let mut found: HashMap<Vec<u32>, (RibbonGraph, u64)> = HashMap::new();
    enumerate_pairings(&mut pairing, m, g, n, &mut found);
    let mut result: Vec<(RibbonGraph, u64)> = found.into_values().collect();
    result.sort_by_key(|(gr, _)| gr.canon_key());
    cache
        .lock()
        .unwrap()
        .insert((g, n), Arc::new(result.clone()));
    Ok(result)
}

fn enumerate_pairings(
    pairing: &mut Vec<Option<usize>>,
    m: usize,
    g: usize,
    n: usize,
    found: &mut HashMap<Vec<u32>, (RibbonGraph, u64)>,
) {
    let h = match pairing.iter().position(Option::is_none) {
        Some(h) => h,
        None => {
            finish_pairing(pairing, m, g, n, found);
            return;
        }
    };
    let cur_vertex = h / 3;
    let touched = |v: usize, pairing: &[Option<usize>]| -> bool {
        v == cur_vertex || (0..3).any(|k| pairing[3 * v + k].is_some())
    };
    let min_untouched = (0..m / 3).find(|&v| !touched(v, pairing));
    for hp in (h + 1)..m {
        if pairing[hp].is_some() {
            continue;
        }
        let v = hp / 3;
        if !touched(v, pairing) {
            // Fresh vertices are entered at their first slot, smallest first;
            // any pairing is conjugate to one of this shape, and the final
            // canonical dedup removes what symmetry pruning misses.
            if hp % 3 != 0 || Some(v) != min_untouched {
                continue;
            }
        }
        pairing[h] = Some(hp);
        pairing[hp] = Some(h);
        enumerate_pairings(pairing, m, g, n, found);
        pairing[h] = None;
        pairing[hp] = None;
    }
}

fn finish_pairing(
    pairing: &[Option<usize>],
    m: usize,
    g: usize,
    n: usize,
    found: &mut HashMap<Vec<u32>, (RibbonGraph, u64)>,
) {
    let iota: Vec<usize> = pairing.iter().map(|p| p.unwrap()).collect();
    let mut sigma = vec![0usize; m];
    for v in 0..m / 3 {
        sigma[3 * v] = 3 * v + 1;
        sigma[3 * v + 1] = 3 * v + 2;
        sigma[3 * v + 2] = 3 * v;
    }
    if !connected(&sigma, &iota) {
        return;
    }
    // Quick type check on the unlabelled graph.
    let mut sigma_inv = vec![0usize; m];
    for h in 0..m {
        sigma_inv[sigma[h]] = h;
    }
    let phi: Vec<usize> = (0..m).map(|h| iota[sigma_inv[h]]).collect();
    let faces = cycles_of(&phi);
    if faces.len() != n {
        return;
    }
    let euler = (m / 3) as i64 - (m / 2) as i64 + n as i64;
    if euler != 2 - 2 * (g as i64) {
        return;
    }
    // One labelled graph per bijection faces -> {1..n}.
    for perm in (0..n).permutations(n) {
        let graph = RibbonGraph::from_perms_labeled(sigma.clone(), iota.clone(), |raw| {
            debug_assert_eq!(raw.len(), n);
            Ok(perm.clone())
        })
        .expect("validated pairing");
        let key = graph.canon_key();
        if let Entry::Vacant(v) = found.entry(key) {
            let aut = graph.aut_order();
            v.insert((graph, aut));
        }
    }
}

/// All labelled cells (valence >= 3, every dimension): contraction closure
/// of the trivalent classes, deduplicated by canonical form.
pub fn enumerate_all_cells(g: usize, n: usize) -> Result<Vec<(RibbonGraph, u64)>, RibbonError> {
    check_stable(g, n)?;
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<(RibbonGraph, u64)>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&(g, n)) {
        return Ok(hit.as_ref().clone());
    }

    let trivalent = enumerate_trivalent(g, n)?;
    let mut seen: HashMap<Vec<u32>, (RibbonGraph, u64)> = HashMap::new();
    let mut work: Vec<RibbonGraph> = Vec::new();
    for (gr, aut) in trivalent {
        seen.insert(gr.canon_key(), (gr.clone(), aut));
        work.push(gr);
    }
    while let Some(gr) = work.pop() {
        for e in 0..gr.n_edges() {
            if let Some(smaller) = gr.contract(e) {
                let key = smaller.canon_key();
                if let Entry::Vacant(v) = seen.entry(key) {
                    let aut = smaller.aut_order();
                    v.insert((smaller.clone(), aut));
                    work.push(smaller);
                }
            }
        }
    }
    let mut result: Vec<(RibbonGraph, u64)> = seen.into_values().collect();
    result.sort_by_key(|(gr, _)| (std::cmp::Reverse(gr.n_edges()), gr.canon_key()));
    cache
        .lock()
        .unwrap()
        .insert((g, n), Arc::new(result.clone()));
    Ok(result)
}

// ---------------------------------------------------------------------------
// Integer metrics
// ---------------------------------------------------------------------------

/// All positive integer solutions of `A l = L` on this graph, each with the
/// order of its metric automorphism group. The list covers every solution,
/// not one per isomorphism orbit; `Sum 1/#Aut(G)` over it equals the moduli
/// count `Sum 1/#Aut(bold G)` over orbits.
pub fn integer_metrics(graph: &RibbonGraph, boundary: &[i64]) -> Vec<(Metric, u64)> {
    assert_eq!(boundary.len(), graph.n_boundaries());
    assert!(boundary.iter().all(|&l| l >= 1));
    let a = graph.adjacency_matrix();
    let n_e = graph.n_edges();
    let mut sols = Vec::new();
    let mut lengths = vec![0i64; n_e];
    let mut remaining: Vec<i64> = boundary.to_vec();
    // Minimum further contribution to each face if all later edges get length 1.
    let mut min_tail: Vec<Vec<i64>> = vec![vec![0; boundary.len()]; n_e + 1];
    for e in (0..n_e).rev() {
        for i in 0..boundary.len() {
            min_tail[e][i] = min_tail[e + 1][i] + a[i][e] as i64;
        }
    }
    solve_rec(&a, 0, &mut lengths, &mut remaining, &min_tail, &mut sols);
    sols.into_iter()
        .map(|l| {
            let metric = Metric::from_ints(&l);
            let aut = graph.metric_aut_order(&metric);
            (metric, aut)
        })
        .collect()
}

fn solve_rec(
    a: &[Vec<u32>],
    e: usize,
    lengths: &mut Vec<i64>,
    remaining: &mut Vec<i64>,
    min_tail: &[Vec<i64>],
    sols: &mut Vec<Vec<i64>>,
) {
    let n_e = lengths.len();
    if e == n_e {
        if remaining.iter().all(|&r| r == 0) {
            sols.push(lengths.clone());
        }
        return;
    }
    // Upper bound for this edge from the tightest face it touches.
    let mut ub = i64::MAX;
    for (i, row) in a.iter().enumerate() {
        if row[e] > 0 {
            let slack = remaining[i] - min_tail[e + 1][i];
            ub = ub.min(slack / row[e] as i64);
        }
    }
    if ub < 1 {
        return;
    }
    for val in 1..=ub {
        lengths[e] = val;
        let mut ok = true;
        for (i, row) in a.iter().enumerate() {
            remaining[i] -= row[e] as i64 * val;
            if remaining[i] < min_tail[e + 1][i] {
                ok = false;
            }
        }
        if ok {
            solve_rec(a, e + 1, lengths, remaining, min_tail, sols);
        }
        for (i, row) in a.iter().enumerate() {
            remaining[i] += row[e] as i64 * val;
        }
    }
    lengths[e] = 0;
}

/// Brute-force Norbury count: automorphism-weighted number of integer metric
/// ribbon graphs over every cell of `(g,n)` with the given perimeters.
pub fn lattice_count_brute(g: usize, n: usize, boundary: &[i64]) -> Result<Rat, RibbonError> {
    if boundary.iter().sum::<i64>() % 2 != 0 {
        return Ok(Rat::zero());
    }
    let cells = enumerate_all_cells(g, n)?;
    let mut total = Rat::zero();
    for (graph, aut) in &cells {
        let sols = count_integer_solutions(graph, boundary);
        if sols > 0 {
            total += Rat::new(sols.into(), (*aut).into());
        }
    }
    Ok(total)
}

/// Number of positive integer solutions without building the metrics.
pub fn count_integer_solutions(graph: &RibbonGraph, boundary: &[i64]) -> u64 {
    let a = graph.adjacency_matrix();
    let n_e = graph.n_edges();
    let mut lengths = vec![0i64; n_e];
    let mut remaining: Vec<i64> = boundary.to_vec();
    let mut min_tail: Vec<Vec<i64>> = vec![vec![0; boundary.len()]; n_e + 1];
    for e in (0..n_e).rev() {
        for i in 0..boundary.len() {
            min_tail[e][i] = min_tail[e + 1][i] + a[i][e] as i64;
        }
    }
    let mut sols = Vec::new();
    solve_rec(&a, 0, &mut lengths, &mut remaining, &min_tail, &mut sols);
    sols.len() as u64
}

// ---------------------------------------------------------------------------
// Adjacency determinant (the factor-of-2 integral structure)
// ---------------------------------------------------------------------------

/// Searches for `S subset E` with `#S = n` whose dual subgraph (edges of S
/// drawn between the faces they bound) is connected and unicyclic with an
/// odd cycle, and returns it with `det(A restricted to S)`. For a trivalent
/// graph the determinant always has absolute value 2.
pub fn adjacency_det_check(graph: &RibbonGraph) -> Result<(Vec<usize>, i64), RibbonError> {
    let n = graph.n_boundaries();
    let a = graph.adjacency_matrix();
    let edges: Vec<(usize, usize)> = (0..graph.n_edges())
        .map(|e| {
            let h = graph.edge_rep(e);
            (graph.face_of(h), graph.face_of(graph.iota(h)))
        })
        .collect();
    for subset in (0..graph.n_edges()).combinations(n) {
        if !dual_unicyclic_odd(&subset, &edges, n) {
            continue;
        }
        let det = det_submatrix(&a, &subset);
        return Ok((subset, det));
    }
    Err(RibbonError::NoAdmissibleSubset)
}

fn dual_unicyclic_odd(subset: &[usize], edges: &[(usize, usize)], n: usize) -> bool {
    // Connected + (#edges == #vertices) forces exactly one cycle; the cycle
    // is odd iff the graph is not bipartite (a self-loop is an odd 1-cycle).
    if subset.len() != n {
        return false;
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &e in subset {
        let (u, v) = edges[e];
        if u == v {
            // odd cycle of length one; mark via a sentinel below
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    // connectivity over faces
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut cnt = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                cnt += 1;
                stack.push(v);
            }
        }
    }
    if cnt != n {
        return false;
    }
    // bipartiteness (2-coloring); loops or odd cycles break it
    if subset.iter().any(|&e| edges[e].0 == edges[e].1) {
        return true;
    }
    let mut color = vec![-1i8; n];
    color[0] = 0;
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if color[v] == -1 {
                color[v] = 1 - color[u];
                stack.push(v);
            } else if color[v] == color[u] {
                return true; // odd cycle
            }
        }
    }
    false
}

fn det_submatrix(a: &[Vec<u32>], cols: &[usize]) -> i64 {
    let n = cols.len();
    let mut m: Vec<Vec<i64>> = (0..n)
        .map(|i| cols.iter().map(|&c| a[i][c] as i64).collect())
        .collect();
    // Fraction-free Gaussian elimination (Bareiss).
    let mut sign = 1i64;
    let mut prev = 1i64;
    for k in 0..n {
        if m[k][k] == 0 {
            let swap = (k + 1..n).find(|&r| m[r][k] != 0);
            match swap {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Solves `A_S x = rhs` exactly for the columns in `subset`.
pub fn solve_subset(a: &[Vec<u32>], subset: &[usize], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let n = subset.len();
    let mut m: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            subset
                .iter()
                .map(|&c| Rat::from_integer(a[i][c].into()))
                .chain([rhs[i].clone()])
                .collect()
        })
        .collect();
    for k in 0..n {
        let pivot = (k..n).find(|&r| !m[r][k].is_zero())?;
        m.swap(k, pivot);
        let p = m[k][k].clone();
        for j in k..=n {
            m[k][j] = &m[k][j] / &p;
        }
        for i in 0..n {
            if i != k && !m[i][k].is_zero() {
                let f = m[i][k].clone();
                for j in k..=n {
                    m[i][j] = &m[i][j] - &(&f * &m[k][j]);
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n].clone()).collect())
}

/// Random positive rational metric, denominators up to 6, numerators up to 24.
pub fn random_metric<R: Rng>(graph: &RibbonGraph, rng: &mut R) -> Metric {
    let lengths = (0..graph.n_edges())
        .map(|_| {
            let num = rng.gen_range(1..=24i64);
            let den = rng.gen_range(1..=6i64);
            Rat::new(num.into(), den.into())
        })
        .collect();
    Metric { lengths }
}

pub fn metric_to_string(metric: &Metric) -> String {
    metric.lengths.iter().map(rat_to_string).join(",")
}
