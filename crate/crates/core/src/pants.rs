//! Pair-of-pants geometry on metric ribbon graphs: the piecewise-linear
//! kernels `B` and `C`, seam lengths, reconstruction of edge lengths from
//! simple closed curves, and the Mirzakhani-McShane partition of unity.

use crate::curves::{cyclic_reduce, multicurves_up_to, trace_components, CyclicEdgeWord};
use crate::rational::{plus_part, Rat};
use crate::ribbon::{Metric, RibbonGraph};
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PantsError {
    #[error("first boundary length must be positive")]
    ZeroBoundary,
    #[error("the identity check requires a trivalent graph")]
    NotTrivalent,
    #[error("type ({0},{1}) is outside the identity's range")]
    BadType(usize, usize),
}

/// Cell of the combinatorial Teichmueller space of a pair of pants with
/// boundary lengths `(L1, L2, L3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PantsCell {
    /// All three triangle inequalities hold.
    Theta,
    /// Boundary `i` (1-based) dominates: `L_i >= L_j + L_k`.
    BigBoundary(u8),
}

pub fn classify_cell(lengths: &[Rat; 3]) -> PantsCell {
    for i in 0..3 {
        let others: Rat = (0..3).filter(|&j| j != i).map(|j| lengths[j].clone()).sum();
        if lengths[i] >= others {
            return PantsCell::BigBoundary(i as u8 + 1);
        }
    }
    PantsCell::Theta
}

/// `B(L1, L2, l) = ([L1-L2-l]_+ - [-L1+L2-l]_+ + [L1+L2-l]_+) / (2 L1)`,
/// the fraction of the first boundary not shared with the third.
pub fn kernel_b(l1: &Rat, l2: &Rat, ell: &Rat) -> Result<Rat, PantsError> {
    if !l1.is_positive() {
        return Err(PantsError::ZeroBoundary);
    }
    let a = plus_part(&(l1 - l2 - ell));
    let b = plus_part(&(-(l1.clone()) + l2 - ell));
    let c = plus_part(&(l1 + l2 - ell));
    Ok((a - b + c) / (Rat::from_integer(2.into()) * l1))
}

/// `C(L1, l, l') = [L1 - l - l']_+ / L1`, the fraction of the first boundary
/// not shared with the other two.
pub fn kernel_c(l1: &Rat, ell: &Rat, ellp: &Rat) -> Result<Rat, PantsError> {
    if !l1.is_positive() {
        return Err(PantsError::ZeroBoundary);
    }
    Ok(plus_part(&(l1 - ell - ellp)) / l1)
}

/// Seam kind on a pair of pants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeamKind {
    /// Arc from boundary 1 to boundary 2.
    Between12,
    /// Arc from boundary 1 back to itself.
    Self1,
}

/// Length of a combinatorial seam of a pair of pants.
pub fn seam_length(l1: &Rat, l2: &Rat, l3: &Rat, kind: SeamKind) -> Rat {
    let two = Rat::from_integer(2.into());
    match kind {
        SeamKind::Between12 => plus_part(&((l3 - l1 - l2) / &two)),
        SeamKind::Self1 => {
            let mut best = Rat::zero();
            for cand in [(l2 + l3 - l1) / &two, l2 - l1, l3 - l1] {
                if cand > best {
                    best = cand;
                }
            }
            best
        }
    }
}

/// The pants dual to an oriented edge occurrence on a face, described by the
/// reduced boundary words and their lengths.
#[derive(Debug, Clone)]
pub struct DualArcPants {
    /// Half-edge whose face-cycle occurrence defines the arc.
    pub half_edge: usize,
    /// Face index of the side containing the arc's start (0-based).
    pub face: usize,
    /// `None` when both sides of the edge lie on the same face.
    pub other_face: Option<usize>,
    /// Boundary length triple.
    pub lengths: [Rat; 3],
    /// The reduced words of the interior boundary curves.
    pub curves: Vec<CyclicEdgeWord>,
}

/// Builds the pants dual to the edge of `h` seen from the face of `h`.
///
/// For an edge between distinct faces the third boundary is the reduced
/// concatenation of the two face cycles with the edge occurrences removed.
/// For an edge with both sides on one face the cycle splits at the two
/// occurrences into the two interior boundary words.
pub fn dual_arc_pants(graph: &RibbonGraph, metric: &Metric, h: usize) -> DualArcPants {
    let f1 = graph.face_of(h);
    let hb = graph.iota(h);
    let f2 = graph.face_of(hb);
    let perims = graph.perimeters(metric);
    if f1 != f2 {
        let mut word = cycle_without(graph, f1, h);
        word.extend(cycle_without(graph, f2, hb));
        let gamma = CyclicEdgeWord(cyclic_reduce(graph, word));
        let lg = gamma.length(graph, metric);
        DualArcPants {
            half_edge: h,
            face: f1,
            other_face: Some(f2),
            lengths: [perims[f1].clone(), perims[f2].clone(), lg],
            curves: vec![gamma],
        }
    } else {
        let (r1, r2) = cycle_split(graph, f1, h);
        let g2 = CyclicEdgeWord(cyclic_reduce(graph, r1));
        let g3 = CyclicEdgeWord(cyclic_reduce(graph, r2));
        let l2 = g2.length(graph, metric);
        let l3 = g3.length(graph, metric);
        DualArcPants {
            half_edge: h,
            face: f1,
            other_face: None,
            lengths: [perims[f1].clone(), l2, l3],
            curves: vec![g2, g3],
        }
    }
}

/// The face cycle rotated to start after the occurrence of `h` and with `h`
/// removed; an open path from `vertex(h)` to `vertex(iota(h))`.
fn cycle_without(graph: &RibbonGraph, face: usize, h: usize) -> Vec<usize> {
    let cyc = &graph.faces()[face];
    let pos = cyc
        .iter()
        .position(|&x| x == h)
        .expect("h lies on its face");
    let k = cyc.len();
    (1..k).map(|i| cyc[(pos + i) % k]).collect()
}

/// Splits the face cycle at the occurrences of `h` and `iota(h)`; the two
/// returned open paths are closed at `vertex(h)` and `vertex(iota(h))`.
fn cycle_split(graph: &RibbonGraph, face: usize, h: usize) -> (Vec<usize>, Vec<usize>) {
    let cyc = &graph.faces()[face];
    let k = cyc.len();
    let hb = graph.iota(h);
    let p1 = cyc.iter().position(|&x| x == h).expect("h on face");
    let p2 = cyc.iter().position(|&x| x == hb).expect("iota(h) on face");
    let mut r1 = Vec::new();
    let mut i = (p1 + 1) % k;
    while i != p2 {
        r1.push(cyc[i]);
        i = (i + 1) % k;
    }
    let mut r2 = Vec::new();
    let mut i = (p2 + 1) % k;
    while i != p1 {
        r2.push(cyc[i]);
        i = (i + 1) % k;
    }
    (r1, r2)
}

/// Reconstructs the length of the underlying edge from the pants boundary
/// lengths alone: `L1 (B - C)` across two distinct faces, `L1 C / 2` on a
/// single face.
pub fn reconstruct_edge_length(pants: &DualArcPants) -> Result<Rat, PantsError> {
    let [l1, l2, l3] = &pants.lengths;
    match pants.other_face {
        Some(_) => {
            let b = kernel_b(l1, l2, l3)?;
            let c = kernel_c(l1, l2, l3)?;
            Ok(l1 * (b - c))
        }
        None => {
            let c = kernel_c(l1, l2, l3)?;
            Ok(l1 * c / Rat::from_integer(2.into()))
        }
    }
}

/// One term of the Mirzakhani-McShane sum.
#[derive(Debug, Clone)]
pub struct McShaneTerm {
    pub pants: DualArcPants,
    pub value: Rat,
}

/// Evaluates the Mirzakhani-McShane sum on boundary 1 of a trivalent metric
/// ribbon graph. For every type with `2g - 2 + n > 1` the sum
/// `sum B + 1/2 sum C` over embedded pairs of pants containing boundary 1
/// equals 1 exactly. Pants are enumerated through the dual arcs of the edge
/// occurrences around face 1: an arc to another face `m` contributes
/// `B - C`, each same-face occurrence contributes `C / 2`, and the three
/// arcs lying over a pants bounded by `m` recombine to its single `B`.
pub fn mcshane_terms(graph: &RibbonGraph, metric: &Metric) -> Result<Vec<McShaneTerm>, PantsError> {
    if !graph.is_trivalent() {
        return Err(PantsError::NotTrivalent);
    }
    let (g, n) = (graph.genus(), graph.n_boundaries());
    if 2 * g + n <= 3 {
        return Err(PantsError::BadType(g, n));
    }
    let half = Rat::new(1.into(), 2.into());
    let mut terms = Vec::new();
    for &h in &graph.faces()[0].clone() {
        let pants = dual_arc_pants(graph, metric, h);
        let [l1, l2, l3] = &pants.lengths;
        let value = match pants.other_face {
            Some(_) => kernel_b(l1, l2, l3)? - kernel_c(l1, l2, l3)?,
            None => kernel_c(l1, l2, l3)? * &half,
        };
        terms.push(McShaneTerm { pants, value });
    }
    Ok(terms)
}

/// The full identity: returns the sum, which must be exactly 1.
pub fn mcshane_check(graph: &RibbonGraph, metric: &Metric) -> Result<Rat, PantsError> {
    let (g, n) = (graph.genus(), graph.n_boundaries());
    if (g, n) == (1, 1) {
        return mcshane_torus(graph, metric);
    }
    Ok(mcshane_terms(graph, metric)?
        .into_iter()
        .map(|t| t.value)
        .sum())
}

/// Torus variant: `sum_gamma C(L, l(gamma), l(gamma)) = 1` over essential
/// simple closed curves; only those with `2 l(gamma) < L` contribute.
/// Candidates come from the multicurve lattice, filtered down to connected
/// vectors (a one-component trace is a simple closed curve).
pub fn mcshane_torus(graph: &RibbonGraph, metric: &Metric) -> Result<Rat, PantsError> {
    if !graph.is_trivalent() {
        return Err(PantsError::NotTrivalent);
    }
    if (graph.genus(), graph.n_boundaries()) != (1, 1) {
        return Err(PantsError::BadType(graph.genus(), graph.n_boundaries()));
    }
    let perim = graph.perimeters(metric)[0].clone();
    let bound = &perim / Rat::from_integer(2.into());
    let vectors = multicurves_up_to(graph, metric, &bound).map_err(|_| PantsError::NotTrivalent)?;
    let mut total = Rat::zero();
    for m in vectors {
        let comps = trace_components(graph, &m).map_err(|_| PantsError::NotTrivalent)?;
        if comps.len() != 1 {
            continue;
        }
        let lg = comps[0].length(graph, metric);
        total += kernel_c(&perim, &lg, &lg)?;
    }
    Ok(total)
}

/// Number of terms with a nonzero kernel value; at most `2 (6g - 6 + 3n)`.
pub fn nonzero_mcshane_terms(graph: &RibbonGraph, metric: &Metric) -> Result<usize, PantsError> {
    let terms = mcshane_terms(graph, metric)?;
    Ok(terms
        .iter()
        .filter(|t| {
            let [l1, l2, l3] = &t.pants.lengths;
            match t.pants.other_face {
                Some(_) => kernel_b(l1, l2, l3).map(|b| !b.is_zero()).unwrap_or(false),
                None => kernel_c(l1, l2, l3).map(|c| !c.is_zero()).unwrap_or(false),
            }
        })
        .count())
}

/// Checks the reconstruction lemma on every edge of the graph, from both
/// sides. Returns the edges where it fails (empty on success).
pub fn reconstruct_all_edges(graph: &RibbonGraph, metric: &Metric) -> Vec<usize> {
    let mut bad = Vec::new();
    for e in 0..graph.n_edges() {
        let h = graph.edge_rep(e);
        for side in [h, graph.iota(h)] {
            let pants = dual_arc_pants(graph, metric, side);
            match reconstruct_edge_length(&pants) {
                Ok(len) if len == metric.lengths[e] => {}
                _ => {
                    bad.push(e);
                    break;
                }
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use crate::ribbon::{enumerate_trivalent, random_metric};
    use rand::SeedableRng;

    #[test]
    fn kernel_values() {
        let one = rat_int(1);
        assert_eq!(kernel_b(&one, &one, &one).unwrap(), rat(1, 2));
        assert_eq!(kernel_c(&rat_int(4), &one, &one).unwrap(), rat(1, 2));
        // support: B vanishes from L1 + L2 on
        for ell in [2, 3, 7] {
            assert_eq!(kernel_b(&one, &one, &rat_int(ell)).unwrap(), rat_int(0));
        }
        assert!(kernel_b(&rat_int(0), &one, &one).is_err());
    }

    #[test]
    fn kernel_range() {
        let vals = [rat(1, 3), rat_int(1), rat(7, 2), rat_int(5)];
        for l1 in &vals {
            for l2 in &vals {
                for ell in &vals {
                    let b = kernel_b(l1, l2, ell).unwrap();
                    let c = kernel_c(l1, ell, l2).unwrap();
                    assert!(b >= rat_int(0) && b <= rat_int(1), "B out of range");
                    assert!(c >= rat_int(0) && c <= rat_int(1), "C out of range");
                }
            }
        }
    }

    #[test]
    fn kernels_continuous_at_cell_walls() {
        // Evaluate on both sides of each wall of the four-cell decomposition;
        // piecewise-linear continuity means one-sided values approach the
        // wall value linearly, in particular they agree at the wall.
        let l1 = rat_int(3);
        let l2 = rat_int(2);
        for wall in [rat_int(1), rat_int(5), rat(1, 1)] {
            let eps = rat(1, 1000);
            let b0 = kernel_b(&l1, &l2, &wall).unwrap();
            let c0 = kernel_c(&l1, &l2, &wall).unwrap();
            for s in [rat_int(1), rat_int(-1)] {
                let b1 = kernel_b(&l1, &l2, &(&wall + &eps * &s)).unwrap();
                let c1 = kernel_c(&l1, &l2, &(&wall + &eps * &s)).unwrap();
                assert!((&b1 - &b0).abs() <= &eps / &l1);
                assert!((&c1 - &c0).abs() <= &eps / &l1);
            }
        }
    }

    #[test]
    fn seam_values() {
        assert_eq!(
            seam_length(&rat_int(1), &rat_int(1), &rat_int(4), SeamKind::Between12),
            rat_int(1)
        );
        assert_eq!(
            seam_length(&rat_int(3), &rat_int(1), &rat_int(1), SeamKind::Between12),
            rat_int(0)
        );
        assert_eq!(
            seam_length(&rat_int(1), &rat_int(5), &rat_int(1), SeamKind::Self1),
            rat_int(4)
        );
    }

    #[test]
    fn cell_classification() {
        assert_eq!(
            classify_cell(&[rat_int(2), rat_int(2), rat_int(3)]),
            PantsCell::Theta
        );
        assert_eq!(
            classify_cell(&[rat_int(5), rat_int(2), rat_int(3)]),
            PantsCell::BigBoundary(1)
        );
    }

    #[test]
    fn theta_reconstruction_formula() {
        // On the theta graph with perimeters in the Theta cell, the edge
        // between faces i and j has length (L_i + L_j - L_k) / 2.
        let graphs = enumerate_trivalent(0, 3).unwrap();
        let metric = Metric::from_ints(&[2, 3, 4]);
        for (g, _) in &graphs {
            if g.faces().iter().any(|f| f.len() != 2) {
                continue; // only the theta graph has all 2-gon faces
            }
            let per = g.perimeters(&metric);
            for e in 0..g.n_edges() {
                let h = g.edge_rep(e);
                let (f1, f2) = (g.face_of(h), g.face_of(g.iota(h)));
                let pants = dual_arc_pants(g, &metric, h);
                let rec = reconstruct_edge_length(&pants).unwrap();
                assert_eq!(rec, metric.lengths[e]);
                let other = 3 - f1 - f2;
                let expect = (&per[f1] + &per[f2] - per[other].clone()) / rat_int(2);
                assert_eq!(rec, expect);
            }
        }
    }

    #[test]
    fn dumbbell_big_face_word() {
        // The big face of a dumbbell visits eye, bridge, eye, bridge, so its
        // reduced boundary word has length a + b + 2c.
        use crate::curves::{face_word, reduce_and_length};
        let graphs = enumerate_trivalent(0, 3).unwrap();
        let metric = Metric::from_ints(&[2, 3, 11]);
        let mut seen = false;
        for (g, _) in &graphs {
            let Some(big) = g.faces().iter().position(|f| f.len() == 4) else {
                continue;
            };
            seen = true;
            let bridge = (0..g.n_edges()).find(|&e| !g.is_loop(e)).unwrap();
            let eyes: Vec<usize> = (0..g.n_edges()).filter(|&e| g.is_loop(e)).collect();
            let (word, len) = reduce_and_length(g, &face_word(g, big).0, &metric).unwrap();
            assert_eq!(word.len(), 4);
            let expect = &metric.lengths[eyes[0]]
                + &metric.lengths[eyes[1]]
                + rat_int(2) * &metric.lengths[bridge];
            assert_eq!(len, expect);
        }
        assert!(seen, "some (0,3) class has a 4-gon face");
    }

    #[test]
    fn reconstruction_on_random_04_graphs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let graphs = enumerate_trivalent(0, 4).unwrap();
        for (g, _) in graphs.iter().take(12) {
            for _ in 0..4 {
                let metric = random_metric(g, &mut rng);
                assert!(reconstruct_all_edges(g, &metric).is_empty());
            }
        }
    }

    #[test]
    fn mcshane_is_one_on_04() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let graphs = enumerate_trivalent(0, 4).unwrap();
        for (g, _) in &graphs {
            let metric = random_metric(g, &mut rng);
            assert_eq!(mcshane_check(g, &metric).unwrap(), rat_int(1));
        }
    }

    #[test]
    fn mcshane_torus_is_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let (g, _) = enumerate_trivalent(1, 1).unwrap().remove(0);
        for _ in 0..20 {
            let metric = random_metric(&g, &mut rng);
            assert_eq!(mcshane_check(&g, &metric).unwrap(), rat_int(1));
        }
    }

    #[test]
    fn pants_excluded_from_identity() {
        let graphs = enumerate_trivalent(0, 3).unwrap();
        let metric = Metric::from_ints(&[1, 1, 1]);
        assert!(matches!(
            mcshane_check(&graphs[0].0, &metric),
            Err(PantsError::BadType(0, 3))
        ));
    }

    #[test]
    fn small_pants_bound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for (g, n) in [(0usize, 4usize), (1, 2)] {
            let graphs = enumerate_trivalent(g, n).unwrap();
            let bound = 2 * (6 * g + 3 * n - 6);
            for (graph, _) in graphs.iter().take(6) {
                let metric = random_metric(graph, &mut rng);
                let nz = nonzero_mcshane_terms(graph, &metric).unwrap();
                assert!(nz <= bound, "{nz} > {bound}");
            }
        }
    }
}
