//! Plan-graph construction over known object poses and min-hop path search
//! with Euclidean tie-breaking.
//!
//! An edge between two poses certifies that the end-effector carrying the
//! largest known object can move between them, so any object can. Relocation
//! plans are paths on this graph ending at the target node.

use std::collections::VecDeque;

use crate::collision::{edge_free, EdgePredicate};
use crate::geom::Point;
use crate::scene::{ObjectId, SceneState};
use crate::Real;

/// Distances closer than this tie; ties fall back to the lexicographically
/// smallest id sequence.
pub const DISTANCE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
struct Node<R> {
    id: ObjectId,
    pose: Point<R>,
    is_target: bool,
}

/// Counters recorded while building a graph; used by the complexity tests.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub pair_tests: u64,
    /// Obstacle clearance evaluations summed over all pair tests.
    pub clearance_checks: u64,
}

/// Unweighted undirected graph over the known objects of one scene.
#[derive(Clone, Debug)]
pub struct PlanGraph<R> {
    nodes: Vec<Node<R>>,
    adjacency: Vec<Vec<bool>>,
    r_g_used: R,
    predicate_used: EdgePredicate,
    stats: BuildStats,
}

impl<R: Real> PlanGraph<R> {
    /// Assembles a graph from explicit parts (mainly for tests); edges listed
    /// once per unordered pair.
    pub fn from_parts(
        nodes: Vec<(ObjectId, Point<R>, bool)>,
        edges: &[(ObjectId, ObjectId)],
        r_g_used: R,
        predicate_used: EdgePredicate,
    ) -> Self {
        let nodes: Vec<Node<R>> = nodes
            .into_iter()
            .map(|(id, pose, is_target)| Node { id, pose, is_target })
            .collect();
        let n = nodes.len();
        let mut adjacency = vec![vec![false; n]; n];
        for (a, b) in edges {
            let i = nodes.iter().position(|v| v.id == *a).expect("edge endpoint");
            let j = nodes.iter().position(|v| v.id == *b).expect("edge endpoint");
            assert_ne!(i, j, "self loops are not allowed");
            adjacency[i][j] = true;
            adjacency[j][i] = true;
        }
        PlanGraph {
            nodes,
            adjacency,
            r_g_used,
            predicate_used,
            stats: BuildStats::default(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn ids(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.index_of(id).is_some()
    }

    pub fn pose(&self, id: ObjectId) -> Option<Point<R>> {
        self.index_of(id).map(|i| self.nodes[i].pose)
    }

    pub fn target_id(&self) -> Option<ObjectId> {
        self.nodes.iter().find(|n| n.is_target).map(|n| n.id)
    }

    pub fn r_g_used(&self) -> R {
        self.r_g_used
    }

    pub fn predicate_used(&self) -> EdgePredicate {
        self.predicate_used
    }

    pub fn stats(&self) -> BuildStats {
        self.stats
    }

    pub fn has_edge(&self, a: ObjectId, b: ObjectId) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.adjacency[i][j],
            _ => false,
        }
    }

    pub fn edge_count(&self) -> usize {
        let mut c = 0;
        for i in 0..self.nodes.len() {
            for j in i + 1..self.nodes.len() {
                if self.adjacency[i][j] {
                    c += 1;
                }
            }
        }
        c
    }

    pub fn neighbors(&self, id: ObjectId) -> Vec<ObjectId> {
        match self.index_of(id) {
            Some(i) => (0..self.nodes.len())
                .filter(|&j| self.adjacency[i][j])
                .map(|j| self.nodes[j].id)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Edge list as `i j` lines, one per unordered pair.
    pub fn dump_edges(&self) -> String {
        let mut out = String::new();
        for i in 0..self.nodes.len() {
            for j in i + 1..self.nodes.len() {
                if self.adjacency[i][j] {
                    out.push_str(&format!("{} {}\n", self.nodes[i].id, self.nodes[j].id));
                }
            }
        }
        out
    }

    fn index_of(&self, id: ObjectId) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }
}

/// A path on the plan graph ending at the goal node.
#[derive(Clone, Debug, PartialEq)]
pub struct PathResult<R> {
    /// Node ids from the chosen accessible object to the goal, inclusive.
    pub nodes: Vec<ObjectId>,
    /// Number of nodes in the path (`nodes.len()`).
    pub hop_count: usize,
    /// Sum of consecutive pose distances.
    pub distance: R,
}

/// Builds the plan graph for the known objects of `scene`.
pub fn gen_graph<R: Real>(
    scene: &SceneState<R>,
    predicate: EdgePredicate,
    bin_width_deg: u32,
) -> PlanGraph<R> {
    let mut nodes: Vec<Node<R>> = scene
        .known()
        .map(|o| Node {
            id: o.id,
            pose: o.center,
            is_target: o.is_target(),
        })
        .collect();
    nodes.sort_by_key(|n| n.id);
    let r_g = scene.dilated_radius();
    let walls = scene.walls();
    let n = nodes.len();
    let mut adjacency = vec![vec![false; n]; n];
    let mut stats = BuildStats::default();
    for i in 0..n {
        for j in i + 1..n {
            let others = scene.known_discs_except(&[nodes[i].id, nodes[j].id]);
            stats.pair_tests += 1;
            stats.clearance_checks += others.len() as u64;
            if edge_free(
                nodes[i].pose,
                nodes[j].pose,
                &others,
                r_g,
                Some(&walls),
                predicate,
                bin_width_deg,
            ) {
                adjacency[i][j] = true;
                adjacency[j][i] = true;
            }
        }
    }
    PlanGraph {
        nodes,
        adjacency,
        r_g_used: r_g,
        predicate_used: predicate,
        stats,
    }
}

/// Finds a minimum-hop path from `start` to `goal`; among all min-hop paths
/// it returns one of exactly minimal Euclidean distance, breaking remaining
/// ties by the lexicographically smallest id sequence. `None` when the nodes
/// are disconnected.
pub fn min_hop_path<R: Real>(
    g: &PlanGraph<R>,
    start: ObjectId,
    goal: ObjectId,
) -> Option<PathResult<R>> {
    let s = g.index_of(start)?;
    let t = g.index_of(goal)?;
    if s == t {
        return Some(PathResult {
            nodes: vec![goal],
            hop_count: 1,
            distance: R::zero(),
        });
    }
    let dist_s = bfs_levels(g, s);
    let hops = dist_s[t]?;
    let dist_t = bfs_levels(g, t);

    // Valid edges are those on some min-hop path: one BFS level forward from
    // the start and one level backward from the goal.
    let on_path = |u: usize| -> bool {
        matches!((dist_s[u], dist_t[u]), (Some(a), Some(b)) if a + b == hops)
    };
    let valid_edge = |u: usize, v: usize| -> bool {
        g.adjacency[u][v]
            && on_path(u)
            && on_path(v)
            && dist_s[v] == dist_s[u].map(|d| d + 1)
    };

    let n = g.node_count();
    let inf = R::infinity();
    // Min Euclidean distance from each on-path node to the goal, by
    // decreasing BFS level.
    let mut to_goal = vec![inf; n];
    to_goal[t] = R::zero();
    let mut order: Vec<usize> = (0..n).filter(|&u| on_path(u)).collect();
    order.sort_by_key(|&u| std::cmp::Reverse(dist_s[u].unwrap()));
    for &u in &order {
        if u == t {
            continue;
        }
        for v in 0..n {
            if valid_edge(u, v) && to_goal[v] < inf {
                let d = g.nodes[u].pose.dist(g.nodes[v].pose) + to_goal[v];
                if d < to_goal[u] {
                    to_goal[u] = d;
                }
            }
        }
    }
    let total = to_goal[s];
    debug_assert!(total < inf);

    // Walk forward, always taking the smallest-id successor that can still
    // complete a distance-minimal path.
    let tol = R::of(DISTANCE_TOL);
    let mut path = vec![g.nodes[s].id];
    let mut acc = R::zero();
    let mut cur = s;
    while cur != t {
        let mut successors: Vec<usize> = (0..n).filter(|&v| valid_edge(cur, v)).collect();
        successors.sort_by_key(|&v| g.nodes[v].id);
        let next = successors
            .into_iter()
            .find(|&v| {
                acc + g.nodes[cur].pose.dist(g.nodes[v].pose) + to_goal[v] <= total + tol
            })
            .expect("distance-minimal successor exists");
        acc = acc + g.nodes[cur].pose.dist(g.nodes[next].pose);
        path.push(g.nodes[next].id);
        cur = next;
    }
    Some(PathResult {
        hop_count: path.len(),
        nodes: path,
        distance: acc,
    })
}

fn bfs_levels<R: Real>(g: &PlanGraph<R>, from: usize) -> Vec<Option<usize>> {
    let n = g.node_count();
    let mut level = vec![None; n];
    level[from] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        let next = level[u].unwrap() + 1;
        for v in 0..n {
            if g.adjacency[u][v] && level[v].is_none() {
                level[v] = Some(next);
                queue.push_back(v);
            }
        }
    }
    level
}
