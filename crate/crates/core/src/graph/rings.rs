//! Ring perception: a smallest-set-of-smallest-rings and ring-membership flags.

use super::MolecularGraph;

/// Result of SSSR perception.
#[derive(Debug, Clone)]
pub struct RingInfo {
    /// Each ring as a list of atom indices in cycle order.
    pub rings: Vec<Vec<usize>>,
}

impl RingInfo {
    pub fn count(&self) -> usize {
        self.rings.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.rings.iter().map(|r| r.len()).collect();
        s.sort_unstable();
        s
    }

    pub fn largest(&self) -> usize {
        self.rings.iter().map(|r| r.len()).max().unwrap_or(0)
    }
}

/// Per-bond flag: true when the bond lies on some cycle (is not a bridge).
pub fn bond_ring_flags(g: &MolecularGraph) -> Vec<bool> {
    let n = g.atom_count();
    let m = g.bond_count();
    let mut flags = vec![true; m];
    if n == 0 {
        return flags;
    }
    // Tarjan bridge finding; a bridge is exactly a non-ring bond.
    let mut bond_index = std::collections::HashMap::new();
    for (i, b) in g.bonds().iter().enumerate() {
        bond_index.insert((b.a.min(b.b), b.a.max(b.b)), i);
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0usize;
    // iterative DFS: (vertex, parent edge index, neighbor cursor)
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while !stack.is_empty() {
            let top = stack.len() - 1;
            let (v, pe, cursor) = stack[top];
            if cursor < g.neighbors(v).len() {
                stack[top].2 += 1;
                let (w, _) = g.neighbors(v)[cursor];
                let e = bond_index[&(v.min(w), v.max(w))];
                if e == pe {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, e, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                    if low[v] > disc[u] {
                        flags[pe] = false; // bridge
                    }
                }
            }
        }
    }
    flags
}

/// Per-atom flag: true when the atom lies on some cycle.
pub fn atom_ring_flags(g: &MolecularGraph) -> Vec<bool> {
    let bf = bond_ring_flags(g);
    let mut af = vec![false; g.atom_count()];
    for (i, b) in g.bonds().iter().enumerate() {
        if bf[i] {
            af[b.a] = true;
            af[b.b] = true;
        }
    }
    af
}

/// Smallest set of smallest rings.
///
/// The returned set always has exactly `|bonds| - |atoms| + |components|`
/// rings: candidate cycles (the shortest cycle through each ring bond, plus
/// spanning-forest fundamental cycles as a completeness fallback) are added
/// smallest-first under GF(2) independence over bond incidence vectors.
pub fn ring_info(g: &MolecularGraph) -> RingInfo {
    let n = g.atom_count();
    let m = g.bond_count();
    let components = g.components().len();
    let cyclomatic = (m + components).saturating_sub(n);
    if cyclomatic == 0 {
        return RingInfo { rings: Vec::new() };
    }

    let mut bond_index = std::collections::HashMap::new();
    for (i, b) in g.bonds().iter().enumerate() {
        bond_index.insert((b.a.min(b.b), b.a.max(b.b)), i);
    }
    let edge_of = |a: usize, b: usize| bond_index[&(a.min(b), a.max(b))];

    let ring_bond = bond_ring_flags(g);
    let mut candidates: Vec<Vec<usize>> = Vec::new();

    // shortest cycle through each ring bond: BFS between endpoints avoiding
    // the bond itself
    for (ei, b) in g.bonds().iter().enumerate() {
        if !ring_bond[ei] {
            continue;
        }
        if let Some(path) = shortest_path_avoiding(g, b.a, b.b, ei, &bond_index) {
            candidates.push(path);
        }
    }

    // fundamental cycles of a BFS forest guarantee the basis can be completed
    candidates.extend(fundamental_cycles(g));

    let words = m.div_ceil(64);
    let to_bits = |cycle: &[usize]| -> Vec<u64> {
        let mut bits = vec![0u64; words];
        for w in 0..cycle.len() {
            let e = edge_of(cycle[w], cycle[(w + 1) % cycle.len()]);
            bits[e / 64] |= 1 << (e % 64);
        }
        bits
    };

    candidates.sort_by_key(|c| (c.len(), c.iter().min().copied()));

    let mut basis: Vec<Vec<u64>> = Vec::new();
    let mut rings = Vec::new();
    for cand in candidates {
        if rings.len() == cyclomatic {
            break;
        }
        let mut v = to_bits(&cand);
        // reduce against current basis
        for row in &basis {
            let pivot = row.iter().rposition(|&w| w != 0).unwrap();
            let bit = 63 - row[pivot].leading_zeros() as usize;
            if v[pivot] >> bit & 1 == 1 {
                for (vi, ri) in v.iter_mut().zip(row.iter()) {
                    *vi ^= ri;
                }
            }
        }
        if v.iter().any(|&w| w != 0) {
            basis.push(v);
            rings.push(cand);
        }
    }
    RingInfo { rings }
}

fn shortest_path_avoiding(
    g: &MolecularGraph,
    from: usize,
    to: usize,
    avoid_edge: usize,
    bond_index: &std::collections::HashMap<(usize, usize), usize>,
) -> Option<Vec<usize>> {
    let n = g.atom_count();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            return Some(path);
        }
        for &(w, _) in g.neighbors(v) {
            let e = bond_index[&(v.min(w), v.max(w))];
            if e == avoid_edge || seen[w] {
                continue;
            }
            seen[w] = true;
            prev[w] = v;
            queue.push_back(w);
        }
    }
    None
}

fn fundamental_cycles(g: &MolecularGraph) -> Vec<Vec<usize>> {
    let n = g.atom_count();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut tree_edges = std::collections::HashSet::new();
    let mut cycles = Vec::new();
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in g.neighbors(v) {
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = v;
                    depth[w] = depth[v] + 1;
                    tree_edges.insert((v.min(w), v.max(w)));
                    queue.push_back(w);
                }
            }
        }
    }
    for b in g.bonds() {
        if tree_edges.contains(&(b.a.min(b.b), b.a.max(b.b))) {
            continue;
        }
        // walk both endpoints up to their lowest common ancestor
        let (mut x, mut y) = (b.a, b.b);
        let mut left = vec![x];
        let mut right = vec![y];
        while depth[x] > depth[y] {
            x = parent[x];
            left.push(x);
        }
        while depth[y] > depth[x] {
            y = parent[y];
            right.push(y);
        }
        while x != y {
            x = parent[x];
            y = parent[y];
            left.push(x);
            right.push(y);
        }
        right.pop();
        right.reverse();
        left.extend(right);
        cycles.push(left);
    }
    cycles
}
