//! Fixtures shared by the benchmarks.

use infbern::{CompactMask, Domain, Grid, Point, Problem};

pub fn unit_ball() -> Domain {
    Domain::ball(Point::default(), 1.0).expect("valid disk")
}

pub fn grid_for(domain: &Domain, h: f64) -> Grid {
    Grid::covering(domain.bbox, h, 3).expect("valid grid")
}

/// Unit ball with the closed disk of radius 1/2 as zero set.
pub fn annulus(h: f64) -> (Domain, Grid, CompactMask) {
    let domain = unit_ball();
    let grid = grid_for(&domain, h);
    let problem = Problem::new(&domain, grid).expect("ball problem");
    let k = problem.closed_parallel(2.0).expect("core disk");
    (domain, grid, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_core_is_half_disk() {
        let (_, grid, k) = annulus(1.0 / 16.0);
        assert!(k.indices().all(|i| grid.point(i).norm() <= 0.5 + 1e-9));
        assert!(k.contains(grid.nearest(Point::new(0.5, 0.0)).unwrap()));
    }
}
