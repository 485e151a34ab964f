use super::graph::InterferenceGraph;

/// Cliques of `g`: all maximal cliques when `size` is `None`, otherwise all
/// cliques with exactly `size` nodes. Each clique is sorted ascending and the
/// list is sorted lexicographically.
pub fn enumerate_cliques(g: &InterferenceGraph, size: Option<usize>) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    match size {
        None => bron_kerbosch(g, 0, g.full_mask(), 0, &mut out),
        Some(0) => {}
        Some(k) => {
            let mut current = Vec::with_capacity(k);
            extend_fixed(g, k, 0, g.full_mask(), &mut current, &mut out);
        }
    }
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort();
    out
}

fn mask_to_vec(mask: u64) -> Vec<usize> {
    let mut v = Vec::with_capacity(mask.count_ones() as usize);
    let mut rest = mask;
    while rest != 0 {
        v.push(rest.trailing_zeros() as usize);
        rest &= rest - 1;
    }
    v
}

fn bron_kerbosch(g: &InterferenceGraph, r: u64, mut p: u64, mut x: u64, out: &mut Vec<Vec<usize>>) {
    if p == 0 {
        if x == 0 {
            out.push(mask_to_vec(r));
        }
        return;
    }
    // Tomita pivot: the vertex of P ∪ X with most neighbours in P.
    let px = p | x;
    let pivot = mask_to_vec(px)
        .into_iter()
        .max_by_key(|&u| (g.neighbor_mask(u) & p).count_ones())
        .expect("P nonempty");
    let mut candidates = p & !g.neighbor_mask(pivot);
    while candidates != 0 {
        let v = candidates.trailing_zeros() as usize;
        candidates &= candidates - 1;
        let nv = g.neighbor_mask(v);
        bron_kerbosch(g, r | 1 << v, p & nv, x & nv, out);
        p &= !(1 << v);
        x |= 1 << v;
    }
}

fn extend_fixed(
    g: &InterferenceGraph,
    k: usize,
    start: usize,
    allowed: u64,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for v in start..g.n_nodes() {
        if allowed >> v & 1 == 1 {
            current.push(v);
            extend_fixed(g, k, v + 1, allowed & g.neighbor_mask(v), current, out);
            current.pop();
        }
    }
}

/// True when every pair of nodes in `nodes` interferes.
pub fn is_clique(g: &InterferenceGraph, nodes: &[usize]) -> bool {
    nodes
        .iter()
        .enumerate()
        .all(|(a, &i)| nodes[a + 1..].iter().all(|&j| g.has_edge(i, j)))
}
