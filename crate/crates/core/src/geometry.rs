use serde::{Deserialize, Serialize};

/// A position in the sensor field, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn distance_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn distance(self, other: Point) -> f64 {
        self.distance_sq(other).sqrt()
    }

    /// Angle of `self` seen from `origin`, in `[-pi, pi]`.
    pub fn angle_from(self, origin: Point) -> f64 {
        (self.y - origin.y).atan2(self.x - origin.x)
    }
}

/// Mean position of a non-empty point set.
pub fn centroid(points: &[Point]) -> Option<Point> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Some(Point::new(sx / n, sy / n))
}

/// Geometric median by Weiszfeld iteration, starting from the centroid.
///
/// Stops after `max_iter` updates or once a step moves less than `tol`
/// metres. When the iterate lands on an input point the update is taken
/// with that point excluded (Vardi-Zhang style), which keeps the iteration
/// well defined on lattice inputs.
pub fn geometric_median(points: &[Point], max_iter: usize, tol: f64) -> Option<Point> {
    let mut current = centroid(points)?;
    if points.len() <= 2 {
        return Some(current);
    }
    for _ in 0..max_iter {
        let mut num_x = 0.0;
        let mut num_y = 0.0;
        let mut denom = 0.0;
        let mut coincident = 0usize;
        let mut rx = 0.0;
        let mut ry = 0.0;
        for p in points {
            let d = current.distance(*p);
            if d < 1e-12 {
                coincident += 1;
                continue;
            }
            let w = 1.0 / d;
            num_x += p.x * w;
            num_y += p.y * w;
            denom += w;
            rx += (p.x - current.x) * w;
            ry += (p.y - current.y) * w;
        }
        if denom == 0.0 {
            break;
        }
        let candidate = Point::new(num_x / denom, num_y / denom);
        let next = if coincident == 0 {
            candidate
        } else {
            // Vardi-Zhang correction: stay put if the pull of the other
            // points does not beat the weight sitting on `current`.
            let r = rx.hypot(ry);
            if r <= coincident as f64 {
                break;
            }
            let eta = coincident as f64 / r;
            Point::new(
                (1.0 - eta) * candidate.x + eta * current.x,
                (1.0 - eta) * candidate.y + eta * current.y,
            )
        };
        let moved = next.distance(current);
        current = next;
        if moved < tol {
            break;
        }
    }
    Some(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cost(points: &[Point], at: Point) -> f64 {
        points.iter().map(|p| p.distance(at)).sum()
    }

    #[test]
    fn centroid_of_nothing_is_none() {
        assert!(centroid(&[]).is_none());
        assert!(geometric_median(&[], 100, 1e-6).is_none());
    }

    #[test]
    fn median_of_symmetric_square_is_centre() {
        let pts: Vec<Point> = (0..3)
            .flat_map(|y| (0..3).map(move |x| Point::new(x as f64, y as f64)))
            .collect();
        let m = geometric_median(&pts, 100, 1e-9).unwrap();
        assert!(m.distance(Point::new(1.0, 1.0)) < 1e-9);
    }

    #[test]
    fn median_beats_centroid_on_skewed_input() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(20.0, 20.0),
        ];
        let m = geometric_median(&pts, 1000, 1e-9).unwrap();
        let c = centroid(&pts).unwrap();
        assert!(cost(&pts, m) <= cost(&pts, c));
    }
}
