//! Ring perception: smallest set of smallest rings as a minimum cycle basis.
//!
//! Candidate cycles follow Horton: for every vertex `v` and edge `(x, y)`,
//! join the BFS-tree paths `v..x` and `v..y` when they meet only at `v`.
//! Candidates are sorted by length and kept greedily while they stay
//! linearly independent over GF(2) (edge-incidence vectors), until the
//! cyclomatic number is reached.

use std::collections::{HashSet, VecDeque};

/// Marks every edge that lies on at least one cycle (i.e. is not a bridge).
pub fn cyclic_edges(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut cyclic = vec![true; edges.len()];
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (vertex, edge used to enter, next adjacency cursor)
        let mut stack = vec![(root, usize::MAX, 0usize)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (v, via, ref mut cursor)) = stack.last_mut() {
            if *cursor < adj[v].len() {
                let (w, ei) = adj[v][*cursor];
                *cursor += 1;
                if ei == via {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, ei, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        cyclic[via] = false;
                    }
                }
            }
        }
    }
    cyclic
}

/// Smallest set of smallest rings. Each ring is an atom cycle starting at
/// its smallest atom index, oriented so the second atom is the smaller of
/// the two neighbors. Rings are sorted by (size, atoms).
pub fn sssr(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let cyclic = cyclic_edges(n, edges);
    let ring_edges: Vec<(usize, usize)> = edges
        .iter()
        .zip(&cyclic)
        .filter(|(_, &c)| c)
        .map(|(&e, _)| e)
        .collect();
    if ring_edges.is_empty() {
        return Vec::new();
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &(a, b)) in ring_edges.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let vertices: Vec<usize> = (0..n).filter(|&v| !adj[v].is_empty()).collect();
    let components = count_components(&vertices, &adj);
    let target = ring_edges.len() + components - vertices.len();

    let words = ring_edges.len().div_ceil(64);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut candidates: Vec<(Vec<usize>, Vec<u64>)> = Vec::new();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![(usize::MAX, usize::MAX); n];
    for &v in &vertices {
        bfs_tree(v, &adj, &mut dist, &mut parent);
        for &(x, y) in &ring_edges {
            if dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            if parent[x].0 == y || parent[y].0 == x {
                continue;
            }
            let px = path_to_root(x, &parent);
            let py = path_to_root(y, &parent);
            // Paths end at v; they must share nothing else.
            let shared = px.iter().filter(|a| py.contains(a)).count();
            if shared != 1 {
                continue;
            }
            let mut cycle: Vec<usize> = px.iter().rev().copied().collect(); // v .. x
            cycle.extend(py.iter().take(py.len() - 1)); // y .. (before v)
            let bits = edge_bits(&cycle, &adj, words);
            if seen.insert(bits.clone()) {
                candidates.push((normalize_cycle(cycle), bits));
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.0.len().cmp(&b.0.len()).then_with(|| {
            let mut sa = a.0.clone();
            let mut sb = b.0.clone();
            sa.sort_unstable();
            sb.sort_unstable();
            sa.cmp(&sb).then_with(|| a.0.cmp(&b.0))
        })
    });

    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new(); // (pivot bit, vector)
    let mut rings = Vec::new();
    for (cycle, bits) in candidates {
        if rings.len() == target {
            break;
        }
        let mut v = bits;
        for (pivot, b) in &basis {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (x, y) in v.iter_mut().zip(b) {
                    *x ^= y;
                }
            }
        }
        if let Some(pivot) = first_bit(&v) {
            basis.push((pivot, v));
            rings.push(cycle);
        }
    }
    rings.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    rings
}

fn count_components(vertices: &[usize], adj: &[Vec<(usize, usize)>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut count = 0;
    for &s in vertices {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    count
}

fn bfs_tree(
    root: usize,
    adj: &[Vec<(usize, usize)>],
    dist: &mut [usize],
    parent: &mut [(usize, usize)],
) {
    dist.fill(usize::MAX);
    parent.fill((usize::MAX, usize::MAX));
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                parent[w] = (v, e);
                queue.push_back(w);
            }
        }
    }
}

/// Path from `x` up to the BFS root, inclusive of both ends.
fn path_to_root(mut x: usize, parent: &[(usize, usize)]) -> Vec<usize> {
    let mut path = vec![x];
    while parent[x].0 != usize::MAX {
        x = parent[x].0;
        path.push(x);
    }
    path
}

fn edge_bits(cycle: &[usize], adj: &[Vec<(usize, usize)>], words: usize) -> Vec<u64> {
    let mut bits = vec![0u64; words];
    for k in 0..cycle.len() {
        let a = cycle[k];
        let b = cycle[(k + 1) % cycle.len()];
        let e = adj[a].iter().find(|(w, _)| *w == b).expect("cycle follows edges").1;
        bits[e / 64] |= 1 << (e % 64);
    }
    bits
}

fn first_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn normalize_cycle(cycle: Vec<usize>) -> Vec<usize> {
    let len = cycle.len();
    let start = (0..len).min_by_key(|&i| cycle[i]).unwrap_or(0);
    let next = cycle[(start + 1) % len];
    let prev = cycle[(start + len - 1) % len];
    if next <= prev {
        (0..len).map(|k| cycle[(start + k) % len]).collect()
    } else {
        (0..len).map(|k| cycle[(start + len - k) % len]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring_edges(n: usize) -> Vec<(usize, usize)> {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    }

    #[test]
    fn single_ring() {
        let rings = sssr(6, &ring_edges(6));
        assert_eq!(rings, vec![vec![0, 1, 2, 3, 4, 5]]);
    }

    #[test]
    fn acyclic_has_no_rings() {
        assert!(sssr(3, &[(0, 1), (1, 2)]).is_empty());
        assert_eq!(cyclic_edges(3, &[(0, 1), (1, 2)]), vec![false, false]);
    }

    #[test]
    fn bridge_between_rings_is_not_cyclic() {
        // two triangles joined by edge 2-3
        let edges = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)];
        let c = cyclic_edges(6, &edges);
        assert_eq!(c, vec![true, true, true, false, true, true, true]);
        assert_eq!(sssr(6, &edges).len(), 2);
    }

    #[test]
    fn cubane_has_five_four_rings() {
        let edges = [
            (0, 1), (1, 2), (2, 3), (3, 0),
            (4, 5), (5, 6), (6, 7), (7, 4),
            (0, 4), (1, 5), (2, 6), (3, 7),
        ];
        let rings = sssr(8, &edges);
        assert_eq!(rings.len(), 5);
        assert!(rings.iter().all(|r| r.len() == 4));
    }
}
