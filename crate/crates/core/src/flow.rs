//! Dinic max-flow over exact `BigInt` capacities.
//!
//! Capacities are integers (callers pre-scale rationals), so the computed
//! flow is integral — the integrality guarantee that veto-order synthesis
//! relies on.

use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::VecDeque;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    /// Remaining capacity. The paired reverse edge holds the pushed flow.
    cap: BigInt,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub(crate) fn new(num_nodes: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            adj: vec![Vec::new(); num_nodes],
        }
    }

    /// Adds a directed edge and its zero-capacity reverse; returns the
    /// forward edge id.
    pub(crate) fn add_edge(&mut self, from: usize, to: usize, cap: BigInt) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap });
        self.edges.push(Edge {
            to: from,
            cap: BigInt::zero(),
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Flow pushed along a forward edge (the reverse edge's gained capacity).
    pub(crate) fn flow_on(&self, edge_id: usize) -> &BigInt {
        &self.edges[edge_id ^ 1].cap
    }

    pub(crate) fn max_flow(&mut self, source: usize, sink: usize) -> BigInt {
        let mut total = BigInt::zero();
        loop {
            let levels = self.bfs_levels(source);
            if levels[sink].is_none() {
                return total;
            }
            let mut current_arc = vec![0usize; self.adj.len()];
            loop {
                let pushed = self.dfs_push(source, sink, None, &levels, &mut current_arc);
                if pushed.is_zero() {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn bfs_levels(&self, source: usize) -> Vec<Option<usize>> {
        let mut levels = vec![None; self.adj.len()];
        levels[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let next = levels[u].unwrap() + 1;
            for &eid in &self.adj[u] {
                let e = &self.edges[eid];
                if !e.cap.is_zero() && levels[e.to].is_none() {
                    levels[e.to] = Some(next);
                    queue.push_back(e.to);
                }
            }
        }
        levels
    }

    fn dfs_push(
        &mut self,
        u: usize,
        sink: usize,
        limit: Option<&BigInt>,
        levels: &[Option<usize>],
        current_arc: &mut [usize],
    ) -> BigInt {
        if u == sink {
            // Reaching the sink with no limit cannot happen: the source has
            // outgoing edges bounding the first recursion level.
            return limit.cloned().expect("sink reached without a bottleneck");
        }
        while current_arc[u] < self.adj[u].len() {
            let eid = self.adj[u][current_arc[u]];
            let (to, cap) = {
                let e = &self.edges[eid];
                (e.to, e.cap.clone())
            };
            let viable = !cap.is_zero()
                && levels[to].is_some()
                && levels[to] == levels[u].map(|l| l + 1);
            if viable {
                let bottleneck = match limit {
                    Some(l) if *l < cap => Some(l.clone()),
                    _ => Some(cap),
                };
                let pushed =
                    self.dfs_push(to, sink, bottleneck.as_ref(), levels, current_arc);
                if !pushed.is_zero() {
                    self.edges[eid].cap -= &pushed;
                    self.edges[eid ^ 1].cap += &pushed;
                    return pushed;
                }
            }
            current_arc[u] += 1;
        }
        BigInt::zero()
    }

    /// Nodes reachable from `source` in the residual graph. After a
    /// max-flow run this is the source side of a minimum cut.
    pub(crate) fn residual_reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &eid in &self.adj[u] {
                let e = &self.edges[eid];
                if !e.cap.is_zero() && !seen[e.to] {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        seen
    }
}
