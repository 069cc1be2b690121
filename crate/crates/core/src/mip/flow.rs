//! Connectivity checks on a chosen table set, independent of the program's
//! flow variables.

use std::collections::{HashMap, VecDeque};

use petgraph::algo::ford_fulkerson;
use petgraph::graph::DiGraph;

/// Breadth-first search: are all `nodes` reachable from the first one using
/// only `links` between them?
pub fn is_connected(nodes: &[usize], links: &[(usize, usize)]) -> bool {
    let Some(&root) = nodes.first() else {
        return true;
    };
    let mut adjacency: HashMap<usize, Vec<usize>> = nodes.iter().map(|&n| (n, Vec::new())).collect();
    for &(a, b) in links {
        if !adjacency.contains_key(&a) || !adjacency.contains_key(&b) {
            return false;
        }
        adjacency.get_mut(&a).unwrap().push(b);
        adjacency.get_mut(&b).unwrap().push(a);
    }
    let mut seen: HashMap<usize, bool> = nodes.iter().map(|&n| (n, false)).collect();
    let mut queue = VecDeque::from([root]);
    seen.insert(root, true);
    let mut reached = 1;
    while let Some(n) = queue.pop_front() {
        for &m in &adjacency[&n] {
            if !seen[&m] {
                seen.insert(m, true);
                reached += 1;
                queue.push_back(m);
            }
        }
    }
    reached == nodes.len()
}

/// Maximum flow from a virtual source into the first node (capacity K),
/// through links of capacity K in both directions, to a virtual sink that
/// every node feeds with capacity 1. Equals K exactly when the nodes are
/// connected.
pub fn connectivity_flow(nodes: &[usize], links: &[(usize, usize)]) -> u64 {
    let k = nodes.len() as u64;
    let mut g = DiGraph::<(), u64>::new();
    let source = g.add_node(());
    let sink = g.add_node(());
    let index: HashMap<usize, _> = nodes.iter().map(|&n| (n, g.add_node(()))).collect();
    if let Some(first) = nodes.first() {
        g.add_edge(source, index[first], k);
    }
    for &n in nodes {
        g.add_edge(index[&n], sink, 1);
    }
    for &(a, b) in links {
        if let (Some(&x), Some(&y)) = (index.get(&a), index.get(&b)) {
            g.add_edge(x, y, k);
            g.add_edge(y, x, k);
        }
    }
    ford_fulkerson(&g, source, sink).0
}
