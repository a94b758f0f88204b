use crate::grid::Point;

/// Bucketed point set for nearest-neighbour distance queries.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<Point>,
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>, cell: f64) -> Self {
        assert!(cell > 0.0);
        if points.is_empty() {
            return PointCloud { points, origin: Point::default(), cell, nx: 0, ny: 0, starts: vec![0], order: vec![] };
        }
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in &points {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let nx = ((hi.x - lo.x) / cell) as usize + 1;
        let ny = ((hi.y - lo.y) / cell) as usize + 1;
        let key = |p: &Point| {
            let i = (((p.x - lo.x) / cell) as usize).min(nx - 1);
            let j = (((p.y - lo.y) / cell) as usize).min(ny - 1);
            j * nx + i
        };
        let mut counts = vec![0usize; nx * ny + 1];
        for p in &points {
            counts[key(p) + 1] += 1;
        }
        for k in 0..nx * ny {
            counts[k + 1] += counts[k];
        }
        let mut fill = counts.clone();
        let mut order = vec![0; points.len()];
        for (idx, p) in points.iter().enumerate() {
            let k = key(p);
            order[fill[k]] = idx;
            fill[k] += 1;
        }
        PointCloud { points, origin: lo, cell, nx, ny, starts: counts, order }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Nearest point and its distance; `None` for an empty cloud.
    pub fn nearest(&self, q: Point) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let ci = ((q.x - self.origin.x) / self.cell).floor() as i64;
        let cj = ((q.y - self.origin.y) / self.cell).floor() as i64;
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        let mut best: Option<(usize, f64)> = None;
        let max_ring = nx.max(ny) + ci.abs().max(cj.abs()) + 1;
        for ring in 0..=max_ring {
            // every cell in this ring is at least (ring - 1) cells away
            if let Some((_, bd)) = best {
                if (ring - 1) as f64 * self.cell > bd {
                    break;
                }
            }
            for j in cj - ring..=cj + ring {
                if j < 0 || j >= ny {
                    continue;
                }
                let on_edge_row = j == cj - ring || j == cj + ring;
                let mut i = ci - ring;
                while i <= ci + ring {
                    if i >= 0 && i < nx {
                        let k = (j * nx + i) as usize;
                        for &idx in &self.order[self.starts[k]..self.starts[k + 1]] {
                            let d = self.points[idx].dist(q);
                            if best.map_or(true, |(_, bd)| d < bd) {
                                best = Some((idx, d));
                            }
                        }
                    }
                    i += if on_edge_row || ring == 0 { 1 } else { 2 * ring };
                }
            }
        }
        best
    }
}
