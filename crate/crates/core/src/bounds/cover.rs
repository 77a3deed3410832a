use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

/// `ln N(theta)` for the radius-`w` ball in `R^d`, using `N <= (2 w sqrt(d) / theta)^d`
/// and clamped at zero since a cover always has at least one point.
pub fn log_covering_number_ball(theta: f64, w: f64, d: u64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::input(format!(
            "cover scale must be positive, got {theta}"
        )));
    }
    if !(w > 0.0) || d == 0 {
        return Err(Error::input("radius and dimension must be positive"));
    }
    let d = d as f64;
    let log = d * ((2.0 * w).ln() + 0.5 * d.ln() - theta.ln());
    Ok(log.max(0.0))
}

/// Centers of a cell-centred grid over `[-W, W]^d` with cell side `2 theta / sqrt(d)`,
/// so every point of the cube is within `theta` of a center.
pub fn cube_cover_centers(dim: usize, radius: f64, theta: f64) -> Vec<Vec<f64>> {
    let d = dim as f64;
    let per_axis = ((radius * d.sqrt() / theta).ceil() as usize).max(1);
    let side = 2.0 * radius / per_axis as f64;
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -radius + (i as f64 + 0.5) * side)
        .collect();
    (0..per_axis.pow(dim as u32))
        .map(|mut code| {
            (0..dim)
                .map(|_| {
                    let c = axis[code % per_axis];
                    code /= per_axis;
                    c
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverCheck {
    pub dim: usize,
    pub radius: f64,
    pub theta: f64,
    pub centers_per_axis: usize,
    pub centers: usize,
    /// `ceil((2 W sqrt(d) / theta)^d)`, at least 1.
    pub lemma_count: f64,
    pub probes: usize,
    /// Largest distance from a probe to its nearest center.
    pub max_probe_distance: f64,
    pub uncovered: usize,
    pub holds: bool,
}

/// Builds a cell-centred grid over `[-W, W]^d` whose cells have half-diagonal at most
/// `theta` and checks by brute force that `probes` uniform points of the cube each
/// lie within `theta` of a center, and that the grid is no larger than the covering
/// number bound.
pub fn verify_cover_bruteforce(
    dim: usize,
    radius: f64,
    theta: f64,
    probes: usize,
    seed: u64,
) -> Result<CoverCheck> {
    if !(1..=3).contains(&dim) {
        return Err(Error::input("brute-force cover check supports d in 1..=3"));
    }
    if !(theta > 0.0) || !(radius > 0.0) {
        return Err(Error::input("theta and W must be positive"));
    }
    let d = dim as f64;
    let centers = cube_cover_centers(dim, radius, theta);
    let per_axis = ((radius * d.sqrt() / theta).ceil() as usize).max(1);

    let lemma_count = (2.0 * radius * d.sqrt() / theta)
        .powi(dim as i32)
        .ceil()
        .max(1.0);

    let mut rng = rng::seeded(seed);
    let mut worst = 0.0f64;
    let mut uncovered = 0;
    let mut probe = vec![0.0; dim];
    for _ in 0..probes {
        for x in probe.iter_mut() {
            *x = rng.random_range(-radius..=radius);
        }
        let nearest = centers
            .iter()
            .map(|c| {
                c.iter()
                    .zip(&probe)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
        if nearest > theta {
            uncovered += 1;
        }
    }

    Ok(CoverCheck {
        dim,
        radius,
        theta,
        centers_per_axis: per_axis,
        centers: centers.len(),
        lemma_count,
        probes,
        max_probe_distance: worst,
        uncovered,
        holds: uncovered == 0 && centers.len() as f64 <= lemma_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_cover_values() {
        let w = 1.5;
        let d = 4;
        let at_diameter = 2.0 * w * (d as f64).sqrt();
        assert_eq!(log_covering_number_ball(at_diameter, w, d).unwrap(), 0.0);
        assert_eq!(
            log_covering_number_ball(10.0 * at_diameter, w, d).unwrap(),
            0.0
        );
        assert!((log_covering_number_ball(1.0, 1.0, 1).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(log_covering_number_ball(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn product_of_half_scale_covers_covers_the_joint_class() {
        for &(wb, wt, theta) in &[(1.0, 1.0, 0.3), (2.0, 0.5, 0.5), (1.0, 3.0, 1.0)] {
            let branch = cube_cover_centers(1, wb, theta / 2.0);
            let trunk = cube_cover_centers(1, wt, theta / 2.0);
            let joint: Vec<[f64; 2]> = branch
                .iter()
                .flat_map(|b| trunk.iter().map(move |t| [b[0], t[0]]))
                .collect();
            let mut rng = rng::seeded(3);
            for _ in 0..2000 {
                let p = [rng.random_range(-wb..=wb), rng.random_range(-wt..=wt)];
                let nearest = joint
                    .iter()
                    .map(|c| f64::hypot(c[0] - p[0], c[1] - p[1]))
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest <= theta);
            }
            let log_joint = (joint.len() as f64).ln();
            let split = log_covering_number_ball(theta / 2.0, wb, 1).unwrap()
                + log_covering_number_ball(theta / 2.0, wt, 1).unwrap();
            assert!(log_joint <= split + 1e-12, "{log_joint} > {split}");
        }
    }

    #[test]
    fn single_center_cases() {
        let c = verify_cover_bruteforce(1, 1.0, 2.0, 100, 1).unwrap();
        assert_eq!(c.centers, 1);
        assert!(c.holds);
        let c = verify_cover_bruteforce(3, 1.0, 10.0, 100, 1).unwrap();
        assert_eq!(c.centers, 1);
        assert!(c.holds);
    }

    #[test]
    fn two_dimensional_cover() {
        let c = verify_cover_bruteforce(2, 1.0, 0.5, 10_000, 7).unwrap();
        assert!(c.holds, "{c:?}");
        assert!(c.max_probe_distance <= 0.5);
        assert!(c.centers as f64 <= c.lemma_count);
    }

    #[test]
    fn rejects_large_dimension() {
        assert!(verify_cover_bruteforce(4, 1.0, 0.5, 10, 7).is_err());
    }
}
