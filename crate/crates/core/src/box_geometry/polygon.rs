/// Areas below this are treated as zero: contact along a point or an edge
/// has no measurable overlap.
const AREA_EPS: f64 = 1e-12;

/// A convex polygon with counter-clockwise vertices in a 2D plane.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon2D {
    pub vertices: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl ConvexPolygon2D {
    /// Builds a polygon from the vertices of a convex ring in either winding.
    pub fn from_points(mut vertices: Vec<[f64; 2]>) -> Self {
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Self { vertices }
    }

    /// Shoelace area; zero for fewer than three vertices.
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).max(0.0)
    }

    /// Sutherland-Hodgman: clips `self` against each edge of `clip` in turn.
    pub fn clip(&self, clip: &ConvexPolygon2D) -> ConvexPolygon2D {
        let mut output = self.vertices.clone();
        let n = clip.vertices.len();
        for i in 0..n {
            if output.is_empty() {
                break;
            }
            let a = clip.vertices[i];
            let b = clip.vertices[(i + 1) % n];
            let input = std::mem::take(&mut output);
            let m = input.len();
            for j in 0..m {
                let current = input[j];
                let previous = input[(j + m - 1) % m];
                let cur_side = cross(a, b, current);
                let prev_side = cross(a, b, previous);
                if cur_side >= 0.0 {
                    if prev_side < 0.0 {
                        output.push(intersect(previous, current, prev_side, cur_side));
                    }
                    output.push(current);
                } else if prev_side >= 0.0 {
                    output.push(intersect(previous, current, prev_side, cur_side));
                }
            }
        }
        ConvexPolygon2D { vertices: output }
    }

    pub fn intersection_area(&self, other: &ConvexPolygon2D) -> f64 {
        let area = self.clip(other).area();
        if area < AREA_EPS {
            0.0
        } else {
            area
        }
    }
}

/// Point on segment p->q where the signed distance to the clip line is zero.
fn intersect(p: [f64; 2], q: [f64; 2], dp: f64, dq: f64) -> [f64; 2] {
    let t = dp / (dp - dq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

fn signed_area(vertices: &[[f64; 2]]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    twice / 2.0
}
