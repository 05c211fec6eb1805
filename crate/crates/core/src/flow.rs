//! Dinic max-flow on small dense graphs with floating-point capacities.

use std::collections::VecDeque;

/// Residual capacities at or below this are treated as saturated.
const CAP_EPS: f64 = 1e-15;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: f64,
    rev: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    adj: Vec<Vec<Edge>>,
    level: Vec<i64>,
    iter: Vec<usize>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            level: vec![-1; nodes],
            iter: vec![0; nodes],
        }
    }

    /// Adds `from -> to` and returns its position for [`Self::flow_on`].
    pub(crate) fn add_edge(&mut self, from: usize, to: usize, cap: f64) -> (usize, usize) {
        let fwd = self.adj[from].len();
        let back = self.adj[to].len() + usize::from(from == to);
        self.adj[from].push(Edge { to, cap, rev: back });
        self.adj[to].push(Edge {
            to: from,
            cap: 0.0,
            rev: fwd,
        });
        (from, fwd)
    }

    /// Flow pushed along an edge, read off its reverse residual.
    pub(crate) fn flow_on(&self, edge: (usize, usize)) -> f64 {
        let e = &self.adj[edge.0][edge.1];
        self.adj[e.to][e.rev].cap
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for e in &self.adj[v] {
                if e.cap > CAP_EPS && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[v] + 1;
                    queue.push_back(e.to);
                }
            }
        }
    }

    fn dfs(&mut self, v: usize, t: usize, pushed: f64) -> f64 {
        if v == t {
            return pushed;
        }
        while self.iter[v] < self.adj[v].len() {
            let i = self.iter[v];
            let (to, cap) = (self.adj[v][i].to, self.adj[v][i].cap);
            if cap > CAP_EPS && self.level[v] < self.level[to] {
                let d = self.dfs(to, t, pushed.min(cap));
                if d > 0.0 {
                    self.adj[v][i].cap -= d;
                    let rev = self.adj[v][i].rev;
                    self.adj[to][rev].cap += d;
                    return d;
                }
            }
            self.iter[v] += 1;
        }
        0.0
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return total;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_network() {
        // CLRS figure: max flow 23
        let mut g = FlowNetwork::new(6);
        for (u, v, c) in [
            (0, 1, 16.0),
            (0, 2, 13.0),
            (1, 3, 12.0),
            (2, 1, 4.0),
            (2, 4, 14.0),
            (3, 2, 9.0),
            (3, 5, 20.0),
            (4, 3, 7.0),
            (4, 5, 4.0),
        ] {
            g.add_edge(u, v, c);
        }
        assert!((g.max_flow(0, 5) - 23.0).abs() < 1e-12);
    }

    #[test]
    fn edge_flows_are_readable() {
        let mut g = FlowNetwork::new(3);
        let a = g.add_edge(0, 1, 0.25);
        let b = g.add_edge(1, 2, 1.0);
        assert!((g.max_flow(0, 2) - 0.25).abs() < 1e-15);
        assert_eq!(g.flow_on(a), 0.25);
        assert_eq!(g.flow_on(b), 0.25);
    }
}
