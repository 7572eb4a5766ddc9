use crate::envelope_geometry::{ClosedPolyline, Point};
use crate::error::{Error, Result};

/// Signed winding number of a closed polyline around `point`, by summing the
/// signed angles subtended by its edges.
pub fn winding_number(poly: &ClosedPolyline, point: Point) -> Result<i64> {
    let idx = IndexedLoop::new(poly.vertices());
    match idx.wind(point, 1e-9) {
        Wind::Clear(w) => Ok(w),
        Wind::Near => Err(Error::Argument("point lies on the polyline".into())),
        Wind::Unresolved(t) => Err(Error::Numerical(format!("winding sum {t} is not close to an integer"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Wind {
    Clear(i64),
    /// Within tolerance of an edge.
    Near,
    /// Rounding residual too large.
    Unresolved(f64),
}

fn angle(u: Point, v: Point) -> f64 {
    let cross = u[0] * v[1] - u[1] * v[0];
    let dot = u[0] * v[0] + u[1] * v[1];
    cross.atan2(dot)
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    // measure from the nearer endpoint; closing edges can be very long
    let (a, b) = if (p[0] - a[0]).hypot(p[1] - a[1]) <= (p[0] - b[0]).hypot(p[1] - b[1]) { (a, b) } else { (b, a) };
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let (px, py) = (p[0] - a[0], p[1] - a[1]);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 || !l2.is_finite() { 0.0 } else { ((px * dx + py * dy) / l2).clamp(0.0, 1.0) };
    (px - t * dx).hypot(py - t * dy)
}

const CHUNK: usize = 32;

/// Closed loop with bounding boxes over runs of edges. A run whose box does not
/// contain the query point subtends the same angle as its chord.
#[derive(Debug, Clone)]
pub(crate) struct IndexedLoop {
    pts: Vec<Point>,
    boxes: Vec<[f64; 4]>,
}

impl IndexedLoop {
    pub(crate) fn new(vertices: &[Point]) -> Self {
        let mut pts = vertices.to_vec();
        pts.push(vertices[0]);
        let boxes = pts
            .windows(2)
            .collect::<Vec<_>>()
            .chunks(CHUNK)
            .map(|c| {
                let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
                for w in c {
                    for p in w.iter() {
                        b[0] = b[0].min(p[0]);
                        b[1] = b[1].max(p[0]);
                        b[2] = b[2].min(p[1]);
                        b[3] = b[3].max(p[1]);
                    }
                }
                b
            })
            .collect();
        IndexedLoop { pts, boxes }
    }

    pub(crate) fn wind(&self, q: Point, tol: f64) -> Wind {
        let edges = self.pts.len() - 1;
        let mut total = 0.0;
        for (k, b) in self.boxes.iter().enumerate() {
            let lo = k * CHUNK;
            let hi = ((k + 1) * CHUNK).min(edges);
            let outside = q[0] < b[0] - tol || q[0] > b[1] + tol || q[1] < b[2] - tol || q[1] > b[3] + tol;
            let sub = |p: Point| [p[0] - q[0], p[1] - q[1]];
            if outside {
                total += angle(sub(self.pts[lo]), sub(self.pts[hi]));
                continue;
            }
            for i in lo..hi {
                let (a, c) = (self.pts[i], self.pts[i + 1]);
                if segment_distance(q, a, c) <= tol {
                    return Wind::Near;
                }
                total += angle(sub(a), sub(c));
            }
        }
        let turns = total / std::f64::consts::TAU;
        let w = turns.round();
        if (turns - w).abs() >= 0.25 {
            Wind::Unresolved(turns)
        } else {
            Wind::Clear(w as i64)
        }
    }
}
