use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Abscissae at which a tabulated flux is sampled for fitting, together
/// with the three-point stencils that give centered first-derivative data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    /// Sorted, strictly increasing, inside `(0, phi_m)`.
    pub points: Vec<f64>,
    /// `(left, centre, right)` indices into `points`.
    pub stencils: Vec<[usize; 3]>,
}

impl SamplePlan {
    /// Centered-difference slopes `(x, f'(x))` from values at `points`.
    pub fn derivative_data(&self, values: &[f64]) -> Vec<(f64, f64)> {
        self.stencils
            .iter()
            .map(|&[a, c, b]| {
                let x = &self.points;
                (x[c], (values[b] - values[a]) / (x[b] - x[a]))
            })
            .collect()
    }

    pub fn samples(&self, values: &[f64]) -> Vec<(f64, f64)> {
        self.points.iter().copied().zip(values.iter().copied()).collect()
    }
}

/// 10 uniform points around `phi_c`, 10 below `phi_m`, each cluster
/// spanning `window_frac * phi_m`, plus 13 triplets centred at
/// `(k + 1/2) phi_m / 13` with half-spacing `triplet_frac * phi_m / 13`.
pub fn sample_plan(phi_c: f64, phi_m: f64, window_frac: f64, triplet_frac: f64) -> Result<SamplePlan> {
    if !(phi_c > 0.0 && phi_c < phi_m) {
        return Err(Error::Invalid(format!("need 0 < phi_c < phi_m, got {phi_c}, {phi_m}")));
    }
    if !(window_frac > 0.0 && window_frac < 1.0 && triplet_frac > 0.0 && triplet_frac < 0.5) {
        return Err(Error::Invalid("sample plan fractions out of range".into()));
    }
    let w = window_frac * phi_m;
    // (x, group, position in group)
    let mut pts: Vec<(f64, usize, usize)> = Vec::with_capacity(59);
    let lo_c = (phi_c - 0.5 * w).max(0.1 * w);
    for i in 0..10 {
        pts.push((lo_c + w * i as f64 / 9.0, 0, i));
    }
    for i in 0..10 {
        pts.push((phi_m - w + w * i as f64 / 10.0, 1, i));
    }
    let spacing = phi_m / 13.0;
    let half = triplet_frac * spacing;
    for k in 0..13 {
        let c = (k as f64 + 0.5) * spacing;
        for (j, x) in [c - half, c, c + half].into_iter().enumerate() {
            pts.push((x, 2 + k, j));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for pair in pts.windows(2) {
        if !(pair[1].0 > pair[0].0) {
            return Err(Error::Invalid(format!("sample points collide at {}", pair[0].0)));
        }
    }
    if pts[0].0 <= 0.0 || pts[pts.len() - 1].0 >= phi_m {
        return Err(Error::Invalid("sample points leave (0, phi_m)".into()));
    }
    let index_of = |group: usize, pos: usize| pts.iter().position(|p| p.1 == group && p.2 == pos).unwrap();
    let mut stencils = Vec::new();
    for (group, len) in [(0usize, 10usize), (1, 10)] {
        for pos in 1..len - 1 {
            stencils.push([index_of(group, pos - 1), index_of(group, pos), index_of(group, pos + 1)]);
        }
    }
    for k in 0..13 {
        stencils.push([index_of(2 + k, 0), index_of(2 + k, 1), index_of(2 + k, 2)]);
    }
    stencils.sort_by_key(|s| s[1]);
    Ok(SamplePlan { points: pts.into_iter().map(|p| p.0).collect(), stencils })
}

/// [`sample_plan`] with a 5% window and triplet half-spacing of a tenth of
/// the triplet separation.
pub fn default_sample_plan(phi_c: f64, phi_m: f64) -> SamplePlan {
    sample_plan(phi_c, phi_m, 0.05, 0.1).expect("default plan is well formed for 0 < phi_c < phi_m")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_shape() {
        let p = default_sample_plan(0.50297, 0.61);
        assert_eq!(p.points.len(), 59);
        assert!(p.points.windows(2).all(|w| w[1] > w[0]));
        assert!(p.points.iter().all(|&x| x > 0.0 && x < 0.61));
        // one stencil per triplet plus the cluster interiors
        assert_eq!(p.stencils.len(), 13 + 8 + 8);
    }

    #[test]
    fn every_triplet_centre_has_a_slope() {
        let phi_m = 0.61;
        let p = default_sample_plan(0.50297, phi_m);
        for k in 0..13 {
            let c = (k as f64 + 0.5) * phi_m / 13.0;
            assert!(p.stencils.iter().any(|s| (p.points[s[1]] - c).abs() < 1e-15), "triplet {k}");
        }
    }

    #[test]
    fn centered_slopes_exact_on_quadratics_for_symmetric_stencils() {
        let p = default_sample_plan(0.3, 0.61);
        let vals: Vec<f64> = p.points.iter().map(|x| 1.0 + 2.0 * x - 3.0 * x * x).collect();
        for (x, d) in p.derivative_data(&vals) {
            assert!((d - (2.0 - 6.0 * x)).abs() < 1e-9, "x={x}");
        }
    }
}
