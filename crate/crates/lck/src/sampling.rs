//! Seeded sample points and tangent vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::chart::{Chart, ChartId};

/// Default half-width of the `t` window on the cylinder.
pub const DEFAULT_T_RANGE: f64 = 2.0;

/// A reproducible stream of samples on one chart.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
    chart: Chart,
    t_range: f64,
}

impl Sampler {
    pub fn new(chart: Chart, seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            chart,
            t_range: DEFAULT_T_RANGE,
        }
    }

    pub fn with_t_range(mut self, t_range: f64) -> Self {
        self.t_range = t_range;
        self
    }

    pub fn gaussian(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.rng.sample(StandardNormal)).collect()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    /// A point of the model: `t` uniform in the window and `w` a normalized
    /// Gaussian on the cylinder, a Gaussian vector scaled into
    /// `0.2 ≤ |z| ≤ 5` on `ℂⁿ`.
    pub fn point(&mut self) -> Vec<f64> {
        let m = 2 * self.chart.n;
        match self.chart.id {
            ChartId::Cylinder => {
                let t = self.uniform(-self.t_range, self.t_range);
                let w = self.unit(m);
                let mut p = vec![t];
                p.extend(w);
                p
            }
            ChartId::PuncturedCn => {
                let r = self.uniform(0.2f64.ln(), 5.0f64.ln()).exp();
                self.unit(m).into_iter().map(|c| c * r).collect()
            }
        }
    }

    pub fn points(&mut self, count: usize) -> Vec<Vec<f64>> {
        (0..count).map(|_| self.point()).collect()
    }

    fn unit(&mut self, m: usize) -> Vec<f64> {
        loop {
            let v = self.gaussian(m);
            let l = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if l > 1e-3 {
                return v.into_iter().map(|c| c / l).collect();
            }
        }
    }

    /// A Gaussian tangent vector at `x`.
    pub fn tangent(&mut self, x: &[f64]) -> Vec<f64> {
        let v = self.gaussian(self.chart.dim());
        self.chart.project(x, &v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let c = Chart::cylinder(2);
        let a = Sampler::new(c, 7).points(5);
        let b = Sampler::new(c, 7).points(5);
        assert_eq!(a, b);
        assert_ne!(a, Sampler::new(c, 8).points(5));
    }

    #[test]
    fn cylinder_points_lie_on_the_sphere() {
        let mut s = Sampler::new(Chart::cylinder(3), 1);
        for p in s.points(20) {
            let r: f64 = p[1..].iter().map(|c| c * c).sum();
            assert!((r - 1.0).abs() < 1e-12);
            assert!(p[0].abs() <= DEFAULT_T_RANGE);
            let v = s.tangent(&p);
            let dotw: f64 = v[1..].iter().zip(&p[1..]).map(|(a, b)| a * b).sum();
            assert!(dotw.abs() < 1e-12);
        }
    }
}
