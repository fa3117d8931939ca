//! Point sampling and best-server association for one replication.

use std::f64::consts::{PI, TAU};

use crate::channel::NetworkModel;
use crate::error::Result;
use crate::numerics::{Point, RandomStream};

/// Expected number of points per sampling shell.
const SHELL_POINTS: f64 = 32.0;

/// Fading key of the BS added at the origin of the typical cell.
pub const ORIGIN_BS_ID: u64 = u64::MAX;

/// A sampled point with an id that does not depend on the window radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub id: u64,
    pub position: Point,
}

/// Homogeneous Poisson sample on the disk of `radius`.
///
/// The plane is cut into annuli of equal area, each sampled from its own
/// substream of `stream`. Growing `radius` keeps every point (and id) of the
/// smaller window and only adds points outside it.
pub fn sample_shells(intensity: f64, radius: f64, stream: &RandomStream) -> Result<Vec<Site>> {
    let shell_area = SHELL_POINTS / intensity;
    let target = PI * radius * radius;
    let mut sites = Vec::new();
    let mut shell = 0u64;
    while (shell as f64) * shell_area < target {
        let mut s = stream.substream(shell);
        let count = s.poisson(SHELL_POINTS)?;
        for j in 0..count {
            let area = (shell as f64 + s.open01()) * shell_area;
            let r = (area / PI).sqrt();
            let theta = TAU * s.open01();
            if r <= radius {
                sites.push(Site {
                    id: (shell << 24) | j,
                    position: Point::new(r * theta.cos(), r * theta.sin()),
                });
            }
        }
        shell += 1;
    }
    Ok(sites)
}

/// `s = (h·L(z))^{-1}` for one fresh fading draw.
///
/// A user exactly at a BS under the unclamped model sees infinite gain and
/// gets `s = 0`.
pub fn path_loss_fading(network: &NetworkModel, displacement: Point, stream: &mut RandomStream) -> f64 {
    let h = network.fading.sample(stream);
    let g = network.path_loss.gain(displacement.norm());
    if g.is_infinite() {
        return 0.0;
    }
    1.0 / (h * g)
}

/// Uniform bucket grid over the square `[-extent, extent]²`.
pub struct Grid {
    extent: f64,
    cell: f64,
    n: usize,
    buckets: Vec<Vec<u32>>,
}

impl Grid {
    pub fn new(points: &[Site], extent: f64, target_cell: f64) -> Self {
        let n = ((2.0 * extent / target_cell).ceil() as usize).clamp(1, 512);
        let cell = 2.0 * extent / n as f64;
        let mut buckets = vec![Vec::new(); n * n];
        let mut grid = Grid {
            extent,
            cell,
            n,
            buckets: Vec::new(),
        };
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = grid.cell_of(p.position);
            buckets[cy * n + cx].push(i as u32);
        }
        grid.buckets = buckets;
        grid
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let idx = |v: f64| (((v + self.extent) / self.cell).floor().max(0.0) as usize).min(self.n - 1);
        (idx(p.x), idx(p.y))
    }

    /// Visits point indices ring by ring outward from `p`'s cell until
    /// `visit` returns true; returns whether it did.
    pub fn any_outward<F: FnMut(usize) -> bool>(&self, p: Point, mut visit: F) -> bool {
        let (cx, cy) = self.cell_of(p);
        let (cx, cy) = (cx as i64, cy as i64);
        let n = self.n as i64;
        for ring in 0..n {
            let mut inside = false;
            for dy in -ring..=ring {
                let y = cy + dy;
                if y < 0 || y >= n {
                    continue;
                }
                let step = if dy.abs() == ring { 1 } else { 2 * ring.max(1) };
                let mut dx = -ring;
                while dx <= ring {
                    let x = cx + dx;
                    if x >= 0 && x < n {
                        inside = true;
                        for &i in &self.buckets[(y * n + x) as usize] {
                            if visit(i as usize) {
                                return true;
                            }
                        }
                    }
                    dx += step;
                }
            }
            if !inside {
                break;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{FadingModel, PathLossModel};
    use std::collections::HashSet;

    #[test]
    fn shells_are_nested_and_ids_stable() {
        let s = RandomStream::new(5, 9);
        let small = sample_shells(1e-3, 100.0, &s).unwrap();
        let large = sample_shells(1e-3, 200.0, &s).unwrap();
        let ids: HashSet<u64> = large.iter().map(|p| p.id).collect();
        assert_eq!(ids.len(), large.len());
        for p in &small {
            assert!(p.position.norm() <= 100.0);
            assert!(large.contains(p));
        }
        for p in &large {
            if p.position.norm() <= 100.0 {
                assert!(small.contains(p));
            }
        }
    }

    #[test]
    fn shell_counts_are_poisson() {
        // Mean and variance of the count both equal λπR².
        let (lambda, radius) = (1e-3, 50.0);
        let mean = lambda * PI * radius * radius;
        let counts: Vec<f64> = (0..20_000)
            .map(|i| sample_shells(lambda, radius, &RandomStream::new(1, i)).unwrap().len() as f64)
            .collect();
        let n = counts.len() as f64;
        let m = counts.iter().sum::<f64>() / n;
        let v = counts.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((m - mean).abs() < 4.0 * (mean / n).sqrt(), "{m} vs {mean}");
        assert!((v - mean).abs() < 4.0 * mean * (2.0 / n).sqrt(), "{v} vs {mean}");
    }

    #[test]
    fn shell_points_are_uniform_in_area() {
        let (lambda, radius) = (1e-2, 100.0);
        let pts: Vec<f64> = (0..200)
            .flat_map(|i| sample_shells(lambda, radius, &RandomStream::new(2, i)).unwrap())
            .map(|p| (p.position.norm() / radius).powi(2))
            .collect();
        let d = crate::simulator::stats::ks_statistic(&pts, |u| u.clamp(0.0, 1.0));
        assert!(d < crate::simulator::stats::ks_critical_value(pts.len(), 0.001));
    }

    #[test]
    fn path_loss_fading_examples() {
        let net = NetworkModel::new(
            1.0,
            1.0,
            FadingModel::constant(1.0).unwrap(),
            PathLossModel::exponent(1.0, 2.0).unwrap(),
            1.0,
        )
        .unwrap();
        let mut s = RandomStream::new(0, 0);
        assert_eq!(path_loss_fading(&net, Point::new(2.0, 0.0), &mut s), 4.0);
        assert_eq!(path_loss_fading(&net, Point::ORIGIN, &mut s), 0.0);
        let clamped = NetworkModel {
            path_loss: PathLossModel::modified_exponent(1.0, 2.0, 1.0).unwrap(),
            ..net
        };
        assert_eq!(path_loss_fading(&clamped, Point::ORIGIN, &mut s), 1.0);
    }

    #[test]
    fn grid_visits_every_point_once() {
        let s = RandomStream::new(3, 3);
        let pts = sample_shells(1e-3, 300.0, &s).unwrap();
        let grid = Grid::new(&pts, 300.0, 40.0);
        for probe in [Point::ORIGIN, Point::new(-290.0, 10.0), Point::new(200.0, 200.0)] {
            let mut seen = vec![0u32; pts.len()];
            let hit = grid.any_outward(probe, |i| {
                seen[i] += 1;
                false
            });
            assert!(!hit);
            assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
