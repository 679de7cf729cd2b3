//! Brute-force oracles the fast planners are validated against. Every oracle
//! deliberately takes a different computational route from the code it
//! checks: state-space search instead of graph search, exhaustive path
//! enumeration instead of BFS, dense sampling instead of closed-form
//! clearance.

use std::collections::{HashSet, VecDeque};

use crate::collision::{Corridor, EdgePredicate, Walls};
use crate::error::PlanError;
use crate::geom::Disc;
use crate::plangraph::PlanGraph;
use crate::scene::{ObjectId, SceneState};
use crate::Real;

/// Largest obstacle count accepted by [`brute_force_min_relocations`].
pub const BRUTE_FORCE_MAX_OBSTACLES: usize = 10;

/// Exact minimum number of relocations after which the target can be grasped:
/// breadth-first search over scene states, where one transition removes one
/// currently graspable obstacle. Graspability, with cleared poses acting as
/// waypoints and the dilated radius recomputed, is evaluated per state.
pub fn brute_force_min_relocations<R: Real>(
    scene: &SceneState<R>,
    predicate: EdgePredicate,
    bin_width_deg: u32,
) -> Result<usize, PlanError> {
    let target = scene.known_target().ok_or(PlanError::TargetUnknown)?.id;
    let obstacles: Vec<ObjectId> = scene
        .known()
        .filter(|o| !o.is_target())
        .map(|o| o.id)
        .collect();
    if obstacles.len() > BRUTE_FORCE_MAX_OBSTACLES {
        return Err(PlanError::SizeGuardExceeded {
            count: obstacles.len(),
            max: BRUTE_FORCE_MAX_OBSTACLES,
        });
    }

    let graspable_for = |mask: u32| -> Vec<ObjectId> {
        let mut s = scene.clone();
        let mut waypoints = Vec::new();
        for (bit, id) in obstacles.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                waypoints.push(s.get(*id).expect("obstacle id").center);
                s = s.with_removed(*id);
            }
        }
        crate::planners::reachable_set(&s, &waypoints, predicate, bin_width_deg)
    };

    let mut seen: HashSet<u32> = HashSet::from([0]);
    let mut frontier = VecDeque::from([(0u32, 0usize)]);
    while let Some((mask, depth)) = frontier.pop_front() {
        let graspable = graspable_for(mask);
        if graspable.contains(&target) {
            return Ok(depth);
        }
        for (bit, id) in obstacles.iter().enumerate() {
            if mask & (1 << bit) != 0 || !graspable.contains(id) {
                continue;
            }
            let next = mask | (1 << bit);
            if seen.insert(next) {
                frontier.push_back((next, depth + 1));
            }
        }
    }
    Err(PlanError::Disconnected)
}

/// Exhaustively enumerates simple paths from `start` to `goal` and returns
/// the minimum hop count together with the minimum Euclidean distance among
/// the min-hop paths. Only feasible on small graphs.
pub fn enumerate_min_hop<R: Real>(
    g: &PlanGraph<R>,
    start: ObjectId,
    goal: ObjectId,
) -> Option<(usize, R)> {
    let ids: Vec<ObjectId> = g.ids().collect();
    if !ids.contains(&start) || !ids.contains(&goal) {
        return None;
    }
    let mut best: Option<(usize, R)> = None;
    let mut path = vec![start];
    let mut visited: HashSet<ObjectId> = HashSet::from([start]);
    fn dfs<R: Real>(
        g: &PlanGraph<R>,
        goal: ObjectId,
        path: &mut Vec<ObjectId>,
        visited: &mut HashSet<ObjectId>,
        dist: R,
        best: &mut Option<(usize, R)>,
    ) {
        let cur = *path.last().unwrap();
        if cur == goal {
            let candidate = (path.len(), dist);
            let replace = match best {
                None => true,
                Some((k, d)) => candidate.0 < *k || (candidate.0 == *k && candidate.1 < *d),
            };
            if replace {
                *best = Some(candidate);
            }
            return;
        }
        if let Some((k, _)) = best {
            if path.len() >= *k {
                return; // cannot beat the best hop count anymore
            }
        }
        for next in g.neighbors(cur) {
            if visited.insert(next) {
                let step = g.pose(cur).unwrap().dist(g.pose(next).unwrap());
                path.push(next);
                dfs(g, goal, path, visited, dist + step, best);
                path.pop();
                visited.remove(&next);
            }
        }
    }
    dfs(g, goal, &mut path, &mut visited, R::zero(), &mut best);
    best
}

/// Dense-sampling corridor oracle: slides the swept disc along the segment in
/// `step`-sized increments (endpoints included) and tests for penetration
/// pointwise.
pub fn corridor_free_sampled<R: Real>(
    c: &Corridor<R>,
    others: &[Disc<R>],
    walls: Option<&Walls<R>>,
    step: f64,
) -> bool {
    let len = c.start.dist(c.end).as_f64();
    let samples = (len / step).ceil().max(1.0) as usize;
    let open = walls
        .map(|w| w.is_access(c.start) || w.is_access(c.end))
        .unwrap_or(false);
    for k in 0..=samples {
        let t = R::of(k as f64 / samples as f64);
        let p = c.start.lerp(c.end, t);
        for o in others {
            if p.dist(o.center) < c.sweep_radius + o.radius {
                return false;
            }
        }
        if let Some(w) = walls {
            let access = w.access_side();
            for side in crate::collision::Side::ALL {
                if open && side == access {
                    continue;
                }
                if w.wall_distance(p, side) < c.sweep_radius {
                    return false;
                }
            }
        }
    }
    true
}
