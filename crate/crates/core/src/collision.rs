//! Swept-disc corridor checks and the polar-histogram free-angle predicate
//! used for plan-graph edges.
//!
//! A corridor models the end-effector carrying the largest object between two
//! poses: a disc of radius `r_g` swept along a straight segment. The four
//! workspace walls block corridors except for the access edge, which is open
//! only for corridors anchored at the robot access point.

use crate::geom::{bearing_deg, dist_point_segment, Disc, Point, Rect};
use crate::Real;

/// Angular slack (degrees) when rasterizing blocked arcs into bins, so that
/// arcs whose ends land exactly on bin boundaries do not bleed into the
/// neighboring bin through floating-point noise.
const ARC_EPS_DEG: f64 = 1e-9;

/// Predicate deciding whether two poses get a graph edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgePredicate {
    /// Exact swept-disc check along the straight segment between the poses.
    StraightCorridor,
    /// Free-angle check: the bin containing the bearing to the other pose
    /// must be free in the polar histogram built at each endpoint.
    VfhHistogram,
}

impl EdgePredicate {
    pub fn name(&self) -> &'static str {
        match self {
            EdgePredicate::StraightCorridor => "straight",
            EdgePredicate::VfhHistogram => "vfh",
        }
    }
}

/// Straight swept-disc motion between two poses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corridor<R> {
    pub start: Point<R>,
    pub end: Point<R>,
    pub sweep_radius: R,
}

impl<R: Real> Corridor<R> {
    pub fn new(start: Point<R>, end: Point<R>, sweep_radius: R) -> Self {
        Corridor {
            start,
            end,
            sweep_radius,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    /// Direction of the outward normal, i.e. the bearing pointing at the wall.
    fn outward_deg(self) -> f64 {
        match self {
            Side::Right => 0.0,
            Side::Top => 90.0,
            Side::Left => 180.0,
            Side::Bottom => 270.0,
        }
    }
}

/// Workspace walls plus the access point through which the robot enters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Walls<R> {
    pub rect: Rect<R>,
    pub access_point: Point<R>,
}

impl<R: Real> Walls<R> {
    pub fn new(rect: Rect<R>, access_point: Point<R>) -> Self {
        Walls { rect, access_point }
    }

    /// The edge the access point sits on (nearest edge on ties).
    pub fn access_side(&self) -> Side {
        let a = self.access_point;
        let d = [
            (Side::Left, (a.x - self.rect.min.x).abs()),
            (Side::Right, (a.x - self.rect.max.x).abs()),
            (Side::Bottom, (a.y - self.rect.min.y).abs()),
            (Side::Top, (a.y - self.rect.max.y).abs()),
        ];
        d.iter()
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap()
            .0
    }

    /// Signed distance from `p` to a wall (negative when outside).
    pub fn wall_distance(&self, p: Point<R>, side: Side) -> R {
        match side {
            Side::Left => p.x - self.rect.min.x,
            Side::Right => self.rect.max.x - p.x,
            Side::Bottom => p.y - self.rect.min.y,
            Side::Top => self.rect.max.y - p.y,
        }
    }

    pub fn is_access(&self, p: Point<R>) -> bool {
        p.dist(self.access_point) <= R::of(1e-12)
    }

    /// True when a disc of radius `r` swept along `ab` stays clear of every
    /// closed wall. The access edge is skipped when `open_access` holds.
    fn segment_clear(&self, a: Point<R>, b: Point<R>, r: R, open_access: bool) -> bool {
        let access = self.access_side();
        for side in Side::ALL {
            if open_access && side == access {
                continue;
            }
            // The segment is convex, so its least wall distance is attained
            // at an endpoint.
            let d = self.wall_distance(a, side).min(self.wall_distance(b, side));
            if d < r {
                return false;
            }
        }
        true
    }
}

/// Free/blocked state of the directions around a point, in fixed-width
/// angular bins covering `[0°, 360°)` exactly once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarHistogram {
    bin_width_deg: u32,
    blocked: Vec<bool>,
}

impl PolarHistogram {
    /// `bin_width_deg` must divide 360.
    pub fn all_free(bin_width_deg: u32) -> Self {
        assert!(
            bin_width_deg > 0 && 360 % bin_width_deg == 0,
            "bin width must divide 360"
        );
        PolarHistogram {
            bin_width_deg,
            blocked: vec![false; (360 / bin_width_deg) as usize],
        }
    }

    pub fn bin_width_deg(&self) -> u32 {
        self.bin_width_deg
    }

    pub fn bin_count(&self) -> usize {
        self.blocked.len()
    }

    pub fn block_all(&mut self) {
        self.blocked.iter_mut().for_each(|b| *b = true);
    }

    pub fn is_blocked(&self, bin: usize) -> bool {
        self.blocked[bin]
    }

    /// Index of the bin containing the direction `deg`.
    pub fn bin_of_deg(&self, deg: f64) -> usize {
        let deg = deg.rem_euclid(360.0);
        ((deg / self.bin_width_deg as f64) as usize).min(self.bin_count() - 1)
    }

    pub fn is_free_deg(&self, deg: f64) -> bool {
        !self.blocked[self.bin_of_deg(deg)]
    }

    pub fn free_bin_count(&self) -> usize {
        self.blocked.iter().filter(|b| !**b).count()
    }

    /// Blocks every bin overlapping the arc `[lo, hi]` (degrees, may wrap),
    /// rounding outward to whole bins.
    pub fn block_arc_deg(&mut self, lo: f64, hi: f64) {
        if hi - lo >= 360.0 {
            self.block_all();
            return;
        }
        let start = lo.rem_euclid(360.0);
        let span = hi - lo;
        let w = self.bin_width_deg as f64;
        // Split a wrapping arc at 360°.
        let pieces = if start + span > 360.0 {
            vec![(start, 360.0), (0.0, start + span - 360.0)]
        } else {
            vec![(start, start + span)]
        };
        for (p_lo, p_hi) in pieces {
            for k in 0..self.bin_count() {
                let b_lo = k as f64 * w;
                let b_hi = b_lo + w;
                if b_lo < p_hi - ARC_EPS_DEG && b_hi > p_lo + ARC_EPS_DEG {
                    self.blocked[k] = true;
                }
            }
        }
    }
}

/// True when the swept disc can move along the corridor without touching any
/// of `others` or a closed wall.
pub fn corridor_free<R: Real>(
    c: &Corridor<R>,
    others: &[Disc<R>],
    walls: Option<&Walls<R>>,
) -> bool {
    for o in others {
        if dist_point_segment(o.center, c.start, c.end) < c.sweep_radius + o.radius {
            return false;
        }
    }
    match walls {
        Some(w) => {
            let open = w.is_access(c.start) || w.is_access(c.end);
            w.segment_clear(c.start, c.end, c.sweep_radius, open)
        }
        None => true,
    }
}

/// Builds the polar histogram of free directions at `at` for a swept disc of
/// radius `r_g`. `open_access` exempts the access edge from wall blocking,
/// matching the corridor the histogram stands in for.
pub fn build_histogram<R: Real>(
    at: Point<R>,
    others: &[Disc<R>],
    r_g: R,
    bin_width_deg: u32,
    walls: Option<&Walls<R>>,
    open_access: bool,
) -> PolarHistogram {
    let mut hist = PolarHistogram::all_free(bin_width_deg);
    for o in others {
        let d = at.dist(o.center);
        let reach = r_g + o.radius;
        if d <= reach {
            hist.block_all();
            return hist;
        }
        let half = (reach / d).as_f64().asin().to_degrees();
        let theta = bearing_deg(at, o.center);
        hist.block_arc_deg(theta - half, theta + half);
    }
    if let Some(w) = walls {
        let access = w.access_side();
        for side in Side::ALL {
            if open_access && side == access {
                continue;
            }
            if w.wall_distance(at, side) < r_g {
                let c = side.outward_deg();
                hist.block_arc_deg(c - 90.0, c + 90.0);
            }
        }
    }
    hist
}

/// Edge test between two poses. `others` must exclude the objects whose
/// poses are being connected.
pub fn edge_free<R: Real>(
    a: Point<R>,
    b: Point<R>,
    others: &[Disc<R>],
    r_g: R,
    walls: Option<&Walls<R>>,
    predicate: EdgePredicate,
    bin_width_deg: u32,
) -> bool {
    match predicate {
        EdgePredicate::StraightCorridor => {
            corridor_free(&Corridor::new(a, b, r_g), others, walls)
        }
        EdgePredicate::VfhHistogram => {
            if a.dist(b) <= R::of(GEOM_EPS) {
                // Degenerate pair: fall back to the in-place disc check.
                return corridor_free(&Corridor::new(a, b, r_g), others, walls);
            }
            let open = walls.map(|w| w.is_access(a) || w.is_access(b)).unwrap_or(false);
            let ha = build_histogram(a, others, r_g, bin_width_deg, walls, open);
            if !ha.is_free_deg(bearing_deg(a, b)) {
                return false;
            }
            let hb = build_histogram(b, others, r_g, bin_width_deg, walls, open);
            hb.is_free_deg(bearing_deg(b, a))
        }
    }
}

const GEOM_EPS: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    fn disc(x: f64, y: f64, r: f64) -> Disc<f64> {
        Disc::new(p(x, y), r)
    }

    #[test]
    fn corridor_clear_of_distant_disc() {
        let c = Corridor::new(p(0.0, 0.0), p(10.0, 0.0), 2.0);
        assert!(corridor_free(&c, &[disc(5.0, 5.0, 1.0)], None));
    }

    #[test]
    fn corridor_blocked_by_near_disc() {
        let c = Corridor::new(p(0.0, 0.0), p(10.0, 0.0), 2.0);
        assert!(!corridor_free(&c, &[disc(5.0, 2.0, 1.0)], None));
    }

    #[test]
    fn degenerate_corridor_is_a_disc_check() {
        let c = Corridor::new(p(3.0, 3.0), p(3.0, 3.0), 0.2);
        assert!(corridor_free(&c, &[disc(3.0, 3.5, 0.1)], None));
        assert!(!corridor_free(&c, &[disc(3.0, 3.25, 0.1)], None));
    }

    #[test]
    fn walls_block_unless_corridor_is_access_anchored() {
        let walls = Walls::new(Rect::from_size(1.0, 1.0), p(0.5, 0.0));
        // Straight run parallel to the bottom wall at 0.06 < r_g = 0.1.
        let c = Corridor::new(p(0.2, 0.06), p(0.8, 0.06), 0.1);
        assert!(!corridor_free(&c, &[], Some(&walls)));
        // Anchored at the access point the bottom edge is open.
        let c = Corridor::new(p(0.5, 0.0), p(0.5, 0.4), 0.1);
        assert!(corridor_free(&c, &[], Some(&walls)));
        // Same corridor but sliding along the closed left wall.
        let c = Corridor::new(p(0.05, 0.4), p(0.5, 0.0), 0.1);
        assert!(!corridor_free(&c, &[], Some(&walls)));
    }

    #[test]
    fn empty_histogram_is_all_free() {
        let h = build_histogram(p(0.0, 0.0), &[], 0.1, 5, None, false);
        assert_eq!(h.free_bin_count(), 72);
    }

    // Blocker due north at d = 2 (r_g + r): the blocked arc is 90° ± asin(1/2),
    // i.e. [60°, 120°], which rasterizes to bins 12..=23 at 5° width.
    #[test]
    fn histogram_blocks_closed_form_arc() {
        let r_g = 0.6;
        let r = 0.4;
        let d = 2.0 * (r_g + r);
        let h = build_histogram(p(0.0, 0.0), &[disc(0.0, d, r)], r_g, 5, None, false);
        for k in 0..h.bin_count() {
            let expect_blocked = (12..=23).contains(&k);
            assert_eq!(h.is_blocked(k), expect_blocked, "bin {k}");
        }
    }

    #[test]
    fn histogram_overlapping_blocker_blocks_everything() {
        let h = build_histogram(p(0.0, 0.0), &[disc(0.05, 0.0, 0.1)], 0.2, 5, None, false);
        assert_eq!(h.free_bin_count(), 0);
    }

    #[test]
    fn histogram_arc_wraps_across_zero() {
        let r_g = 0.6;
        let r = 0.4;
        let d = 2.0 * (r_g + r);
        let h = build_histogram(p(0.0, 0.0), &[disc(d, 0.0, r)], r_g, 5, None, false);
        // Arc [-30°, 30°] -> bins 0..=5 and 66..=71.
        for k in 0..h.bin_count() {
            let expect_blocked = k <= 5 || k >= 66;
            assert_eq!(h.is_blocked(k), expect_blocked, "bin {k}");
        }
    }

    #[test]
    fn edge_free_open_space_both_predicates() {
        let a = p(0.0, 0.0);
        let b = p(1.0, 0.0);
        for pred in [EdgePredicate::StraightCorridor, EdgePredicate::VfhHistogram] {
            assert!(edge_free(a, b, &[], 0.1, None, pred, 5));
        }
    }

    // A midspan blocker that violates the corridor clearance also shadows the
    // bearing bin, so both predicates reject the edge.
    #[test]
    fn edge_free_midpoint_blocker_blocks_both() {
        let a = p(0.0, 0.0);
        let b = p(10.0, 0.0);
        let others = [disc(5.0, 0.5, 1.0)];
        for pred in [EdgePredicate::StraightCorridor, EdgePredicate::VfhHistogram] {
            assert!(!edge_free(a, b, &others, 1.0, None, pred, 5));
        }
    }

    // Divergence case: a pose too close to a closed wall kills every straight
    // corridor, while the free-angle predicate still sees the away-from-wall
    // bearing as open (a bent path could leave the wall first).
    #[test]
    fn edge_free_wall_case_splits_predicates() {
        let walls = Walls::new(Rect::from_size(1.0, 1.0), p(0.5, 0.0));
        let a = p(0.2, 0.06);
        let b = p(0.2, 0.5);
        let r_g = 0.1;
        assert!(!edge_free(
            a,
            b,
            &[],
            r_g,
            Some(&walls),
            EdgePredicate::StraightCorridor,
            5
        ));
        assert!(edge_free(
            a,
            b,
            &[],
            r_g,
            Some(&walls),
            EdgePredicate::VfhHistogram,
            5
        ));
    }

    // Reverse divergence: a disc just outside the corridor still shadows the
    // bearing bin after outward rounding.
    #[test]
    fn edge_free_bin_rounding_splits_predicates() {
        let a = p(0.0, 0.0);
        let b = p(1.0, 0.0);
        let others = [disc(0.5, 0.155, 0.05)];
        let r_g = 0.1;
        assert!(edge_free(
            a,
            b,
            &others,
            r_g,
            None,
            EdgePredicate::StraightCorridor,
            5
        ));
        assert!(!edge_free(
            a,
            b,
            &others,
            r_g,
            None,
            EdgePredicate::VfhHistogram,
            5
        ));
    }

    proptest! {
        // Adding a disc never frees a corridor, and never frees a bin.
        #[test]
        fn monotone_in_obstacles(
            sx in -1.0f64..1.0, sy in -1.0f64..1.0,
            ex in -1.0f64..1.0, ey in -1.0f64..1.0,
            ox in -1.0f64..1.0, oy in -1.0f64..1.0,
            nx in -1.0f64..1.0, ny in -1.0f64..1.0,
            r in 0.01f64..0.3,
        ) {
            let c = Corridor::new(p(sx, sy), p(ex, ey), 0.15);
            let base = vec![disc(ox, oy, r)];
            let mut more = base.clone();
            more.push(disc(nx, ny, r));
            prop_assert!(corridor_free(&c, &more, None) <= corridor_free(&c, &base, None));

            let h0 = build_histogram(p(sx, sy), &base, 0.15, 5, None, false);
            let h1 = build_histogram(p(sx, sy), &more, 0.15, 5, None, false);
            for k in 0..h0.bin_count() {
                prop_assert!(h0.is_blocked(k) <= h1.is_blocked(k));
            }
        }

        #[test]
        fn corridor_symmetric(
            sx in -1.0f64..1.0, sy in -1.0f64..1.0,
            ex in -1.0f64..1.0, ey in -1.0f64..1.0,
            ox in -1.0f64..1.0, oy in -1.0f64..1.0,
            r in 0.01f64..0.3,
        ) {
            let others = [disc(ox, oy, r)];
            let fwd = Corridor::new(p(sx, sy), p(ex, ey), 0.15);
            let rev = Corridor::new(p(ex, ey), p(sx, sy), 0.15);
            prop_assert_eq!(corridor_free(&fwd, &others, None), corridor_free(&rev, &others, None));
            for pred in [EdgePredicate::StraightCorridor, EdgePredicate::VfhHistogram] {
                prop_assert_eq!(
                    edge_free(p(sx, sy), p(ex, ey), &others, 0.15, None, pred, 5),
                    edge_free(p(ex, ey), p(sx, sy), &others, 0.15, None, pred, 5)
                );
            }
        }

        // Uniform scaling of every length leaves the decisions unchanged.
        #[test]
        fn scale_invariant(
            sx in -1.0f64..1.0, sy in 0.1f64..1.0,
            ex in -1.0f64..1.0, ey in 0.1f64..1.0,
            ox in -1.0f64..1.0, oy in 0.1f64..1.0,
            r in 0.01f64..0.3,
        ) {
            let walls = Walls::new(Rect::new(p(-2.0, 0.0), p(2.0, 2.0)), p(0.0, 0.0));
            for s in [0.5f64, 2.0, 10.0] {
                let scale = |q: Point<f64>| p(q.x * s, q.y * s);
                let swalls = Walls::new(
                    Rect::new(scale(walls.rect.min), scale(walls.rect.max)),
                    scale(walls.access_point),
                );
                let others = [disc(ox, oy, r)];
                let sothers = [Disc::new(scale(p(ox, oy)), r * s)];
                for pred in [EdgePredicate::StraightCorridor, EdgePredicate::VfhHistogram] {
                    prop_assert_eq!(
                        edge_free(p(sx, sy), p(ex, ey), &others, 0.15, Some(&walls), pred, 5),
                        edge_free(scale(p(sx, sy)), scale(p(ex, ey)), &sothers, 0.15 * s, Some(&swalls), pred, 5)
                    );
                }
            }
        }
    }
}
