//! Dinic max-flow on exact integer capacities.

use std::collections::VecDeque;

pub type Capacity = i128;

/// Effectively unbounded capacity for uncapacitated arcs.
pub const UNBOUNDED: Capacity = Capacity::MAX / 4;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    rev: usize,
    cap: Capacity,
    initial: Capacity,
}

/// Residual network for Dinic's algorithm.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    graph: Vec<Vec<Arc>>,
    level: Vec<i32>,
    cursor: Vec<usize>,
}

/// Handle to an arc returned by [`FlowNetwork::add_arc`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArcId {
    from: usize,
    index: usize,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self {
            graph: vec![Vec::new(); nodes],
            level: vec![-1; nodes],
            cursor: vec![0; nodes],
        }
    }

    pub fn node_count(&self) -> usize {
        self.graph.len()
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: Capacity) -> ArcId {
        assert!(cap >= 0, "negative capacity");
        let index = self.graph[from].len();
        let rev = self.graph[to].len() + usize::from(from == to);
        self.graph[from].push(Arc {
            to,
            rev,
            cap,
            initial: cap,
        });
        self.graph[to].push(Arc {
            to: from,
            rev: index,
            cap: 0,
            initial: 0,
        });
        ArcId { from, index }
    }

    /// Flow currently pushed through an arc.
    pub fn flow(&self, arc: ArcId) -> Capacity {
        let a = &self.graph[arc.from][arc.index];
        a.initial - a.cap
    }

    fn bfs(&mut self, source: usize, sink: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for a in &self.graph[v] {
                if a.cap > 0 && self.level[a.to] < 0 {
                    self.level[a.to] = self.level[v] + 1;
                    queue.push_back(a.to);
                }
            }
        }
        self.level[sink] >= 0
    }

    fn dfs(&mut self, v: usize, sink: usize, pushed: Capacity) -> Capacity {
        if v == sink {
            return pushed;
        }
        while self.cursor[v] < self.graph[v].len() {
            let i = self.cursor[v];
            let Arc { to, cap, .. } = self.graph[v][i];
            if cap > 0 && self.level[v] < self.level[to] {
                let d = self.dfs(to, sink, pushed.min(cap));
                if d > 0 {
                    self.graph[v][i].cap -= d;
                    let rev = self.graph[v][i].rev;
                    self.graph[to][rev].cap += d;
                    return d;
                }
            }
            self.cursor[v] += 1;
        }
        0
    }

    /// Pushes a maximum flow from `source` to `sink` and returns its value.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> Capacity {
        assert_ne!(source, sink);
        let mut total = 0;
        while self.bfs(source, sink) {
            self.cursor.iter_mut().for_each(|c| *c = 0);
            loop {
                let f = self.dfs(source, sink, UNBOUNDED);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }
}
