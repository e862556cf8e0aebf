use super::FluxClosure;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const DEGREE_TERMS: usize = 10;

/// Two degree-9 polynomials joined at `phi_c`:
/// `sum_j beta_s[j] (phi_c - x)^j` below and `sum_j beta_r[j] (x - phi_c)^j` above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePolyFlux {
    pub phi_c: f64,
    pub phi_m: f64,
    pub beta_s: [f64; DEGREE_TERMS],
    pub beta_r: [f64; DEGREE_TERMS],
}

fn poly(beta: &[f64; DEGREE_TERMS], t: f64) -> (f64, f64, f64) {
    // Horner for the value and both derivatives in t.
    let mut p = 0.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for &b in beta.iter().rev() {
        d2 = d2 * t + 2.0 * d1;
        d1 = d1 * t + p;
        p = p * t + b;
    }
    (p, d1, d2)
}

impl PiecewisePolyFlux {
    /// Value and derivatives from the lower (`below = true`) or upper piece,
    /// regardless of which side of `phi_c` the argument lies on.
    pub fn eval_piece(&self, x: f64, below: bool) -> (f64, f64, f64) {
        if below {
            let (p, d1, d2) = poly(&self.beta_s, self.phi_c - x);
            (p, -d1, d2)
        } else {
            poly(&self.beta_r, x - self.phi_c)
        }
    }
}

impl FluxClosure for PiecewisePolyFlux {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let x = x.clamp(0.0, self.phi_m);
        self.eval_piece(x, x < self.phi_c)
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, self.phi_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Weight of the derivative-data term.
    pub lambda: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { lambda: 0.03 }
    }
}

/// Values the fit must reproduce exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitAnchors {
    pub phi_c: f64,
    pub phi_m: f64,
    pub at_zero: f64,
    pub at_phi_c: f64,
    pub at_phi_m: f64,
    pub slope_at_phi_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Residuals of the seven equality constraints, in the order: value,
    /// slope and curvature matching at `phi_c`, value at `phi_c`, value at
    /// 0, value and slope at `phi_m`.
    pub constraint_residuals: [f64; 7],
    /// Infinity norm of the Lagrangian gradient with respect to the
    /// coefficients.
    pub lagrangian_gradient: f64,
    pub multipliers: [f64; 7],
    pub objective: f64,
    /// Smallest over largest pivot magnitude of the saddle-point factorization.
    pub pivot_ratio: f64,
}

impl FitDiagnostics {
    pub fn max_constraint_residual(&self) -> f64 {
        self.constraint_residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

const N: usize = 2 * DEGREE_TERMS;

/// Row of the unscaled design matrix for a value sample at `x`.
fn value_row(anchors: &FitAnchors, x: f64) -> [f64; N] {
    let mut row = [0.0; N];
    let below = x < anchors.phi_c;
    let t = if below { anchors.phi_c - x } else { x - anchors.phi_c };
    let off = if below { 0 } else { DEGREE_TERMS };
    let mut p = 1.0;
    for j in 0..DEGREE_TERMS {
        row[off + j] = p;
        p *= t;
    }
    row
}

fn slope_row(anchors: &FitAnchors, x: f64) -> [f64; N] {
    let mut row = [0.0; N];
    let below = x < anchors.phi_c;
    let t = if below { anchors.phi_c - x } else { x - anchors.phi_c };
    let off = if below { 0 } else { DEGREE_TERMS };
    let sign = if below { -1.0 } else { 1.0 };
    let mut p = 1.0;
    for j in 1..DEGREE_TERMS {
        row[off + j] = sign * j as f64 * p;
        p *= t;
    }
    row
}

fn constraints(a: &FitAnchors) -> ([[f64; N]; 7], [f64; 7]) {
    let mut c = [[0.0; N]; 7];
    let s = 0;
    let r = DEGREE_TERMS;
    // value, slope and curvature continuity
    c[0][s] = 1.0;
    c[0][r] = -1.0;
    c[1][s + 1] = 1.0;
    c[1][r + 1] = 1.0;
    c[2][s + 2] = 1.0;
    c[2][r + 2] = -1.0;
    c[3][s] = 1.0;
    let dr = a.phi_m - a.phi_c;
    let mut ps = 1.0;
    let mut pr = 1.0;
    for j in 0..DEGREE_TERMS {
        c[4][s + j] = ps;
        c[5][r + j] = pr;
        if j > 0 {
            c[6][r + j] = j as f64 * dr.powi(j as i32 - 1);
        }
        ps *= a.phi_c;
        pr *= dr;
    }
    (c, [0.0, 0.0, 0.0, a.at_phi_c, a.at_zero, a.at_phi_m, a.slope_at_phi_m])
}

/// Equality-constrained least squares for the piecewise polynomial.
///
/// Minimises `1/2 |f - X beta|^2 + lambda/2 |f' - X' beta|^2` subject to
/// curvature-continuous matching at `phi_c` and the anchors. Columns are
/// scaled by powers of the piece lengths and the problem is solved through
/// the augmented saddle-point system
/// `[[I, A, 0], [A^T, 0, C^T], [0, C, 0]] [r; beta; mu] = [b; 0; c]`,
/// which avoids squaring the condition number of the design matrix.
pub fn fit_piecewise_poly(
    samples: &[(f64, f64)],
    deriv_samples: &[(f64, f64)],
    config: &FitConfig,
    anchors: &FitAnchors,
) -> Result<(PiecewisePolyFlux, FitDiagnostics)> {
    if !(config.lambda >= 0.0 && config.lambda.is_finite()) {
        return Err(Error::Invalid(format!("lambda must be non-negative, got {}", config.lambda)));
    }
    if !(anchors.phi_c > 0.0 && anchors.phi_c < anchors.phi_m) {
        return Err(Error::Invalid("need 0 < phi_c < phi_m".into()));
    }
    let use_deriv = config.lambda > 0.0;
    let sqrt_l = config.lambda.sqrt();
    let mut rows: Vec<([f64; N], f64)> = samples.iter().map(|&(x, y)| (value_row(anchors, x), y)).collect();
    if use_deriv {
        rows.extend(deriv_samples.iter().map(|&(x, d)| {
            let mut r = slope_row(anchors, x);
            r.iter_mut().for_each(|e| *e *= sqrt_l);
            (r, sqrt_l * d)
        }));
    }
    if rows.iter().any(|(r, y)| !y.is_finite() || r.iter().any(|e| !e.is_finite())) {
        return Err(Error::Invalid("non-finite fit data".into()));
    }
    let m = rows.len();
    let (c_rows, c_rhs) = constraints(anchors);

    // beta_j = gamma_j / d^j
    let ds = anchors.phi_c;
    let dr = anchors.phi_m - anchors.phi_c;
    let scale: [f64; N] = std::array::from_fn(|i| {
        if i < DEGREE_TERMS {
            ds.powi(i as i32)
        } else {
            dr.powi((i - DEGREE_TERMS) as i32)
        }
    });
    let dim = m + N + 7;
    let mut k = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    for (i, (row, y)) in rows.iter().enumerate() {
        k[(i, i)] = 1.0;
        for j in 0..N {
            let a = row[j] / scale[j];
            k[(i, m + j)] = a;
            k[(m + j, i)] = a;
        }
        rhs[i] = *y;
    }
    for (q, (crow, cval)) in c_rows.iter().zip(c_rhs.iter()).enumerate() {
        let scaled: Vec<f64> = (0..N).map(|j| crow[j] / scale[j]).collect();
        let norm = scaled.iter().map(|e| e * e).sum::<f64>().sqrt();
        for j in 0..N {
            k[(m + N + q, m + j)] = scaled[j] / norm;
            k[(m + j, m + N + q)] = scaled[j] / norm;
        }
        rhs[m + N + q] = cval / norm;
    }
    let lu = k.clone().full_piv_lu();
    let diag = lu.u().diagonal();
    let max_piv = diag.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let min_piv = diag.iter().fold(f64::INFINITY, |a, b| a.min(b.abs()));
    let ratio = if max_piv > 0.0 { min_piv / max_piv } else { 0.0 };
    if !(ratio > 1e-12) {
        return Err(Error::Rank(ratio));
    }
    let mut sol = lu.solve(&rhs).ok_or(Error::Rank(ratio))?;
    // one step of iterative refinement
    let resid = &rhs - &k * &sol;
    if let Some(corr) = lu.solve(&resid) {
        sol += corr;
    }

    let beta: [f64; N] = std::array::from_fn(|j| sol[m + j] / scale[j]);
    let mut beta_s = [0.0; DEGREE_TERMS];
    let mut beta_r = [0.0; DEGREE_TERMS];
    beta_s.copy_from_slice(&beta[..DEGREE_TERMS]);
    beta_r.copy_from_slice(&beta[DEGREE_TERMS..]);
    let fit = PiecewisePolyFlux { phi_c: anchors.phi_c, phi_m: anchors.phi_m, beta_s, beta_r };

    // Diagnostics in the unscaled coefficients.
    let constraint_residuals: [f64; 7] = std::array::from_fn(|q| {
        (0..N).map(|j| c_rows[q][j] * beta[j]).sum::<f64>() - c_rhs[q]
    });
    let mut multipliers = [0.0; 7];
    for q in 0..7 {
        let norm = (0..N).map(|j| (c_rows[q][j] / scale[j]).powi(2)).sum::<f64>().sqrt();
        // the scaled system carried the row divided by `norm`
        multipliers[q] = sol[m + N + q] / norm;
    }
    let mut grad = [0.0; N];
    let mut objective = 0.0;
    for (row, y) in &rows {
        let res = (0..N).map(|j| row[j] * beta[j]).sum::<f64>() - y;
        objective += 0.5 * res * res;
        for j in 0..N {
            grad[j] += row[j] * res;
        }
    }
    // saddle system: A^T r + C^T mu = 0 with r = b - A beta
    for j in 0..N {
        for q in 0..7 {
            grad[j] -= c_rows[q][j] * multipliers[q];
        }
    }
    let lagrangian_gradient = grad.iter().fold(0.0f64, |g, e| g.max(e.abs()));
    Ok((
        fit,
        FitDiagnostics { constraint_residuals, lagrangian_gradient, multipliers, objective, pivot_ratio: ratio },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::default_sample_plan;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PHI_C: f64 = 0.50297;
    const PHI_M: f64 = 0.61;

    /// Random piecewise polynomial meeting the matching conditions and
    /// vanishing with zero slope at phi_m.
    fn admissible_poly(seed: u64) -> PiecewisePolyFlux {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut beta_s = [0.0; 10];
        let mut beta_r = [0.0; 10];
        for b in beta_s.iter_mut() {
            *b = rng.random_range(-1.0..1.0);
        }
        for b in beta_r.iter_mut().skip(3) {
            *b = rng.random_range(-1.0..1.0);
        }
        beta_r[0] = beta_s[0];
        beta_r[1] = -beta_s[1];
        beta_r[2] = beta_s[2];
        // solve for beta_r[8], beta_r[9] to make value and slope vanish at phi_m
        let d = PHI_M - PHI_C;
        let mut p = PiecewisePolyFlux { phi_c: PHI_C, phi_m: PHI_M, beta_s, beta_r };
        beta_r[8] = 0.0;
        beta_r[9] = 0.0;
        p.beta_r = beta_r;
        let (v, s, _) = p.eval_piece(PHI_M, false);
        // [d^8 d^9; 8 d^7 9 d^8] [b8; b9] = [-v; -s]
        let (a11, a12, a21, a22) = (d.powi(8), d.powi(9), 8.0 * d.powi(7), 9.0 * d.powi(8));
        let det = a11 * a22 - a12 * a21;
        p.beta_r[8] = (-v * a22 + s * a12) / det;
        p.beta_r[9] = (-s * a11 + v * a21) / det;
        p
    }

    fn anchors_of(p: &PiecewisePolyFlux) -> FitAnchors {
        FitAnchors {
            phi_c: p.phi_c,
            phi_m: p.phi_m,
            at_zero: p.eval_piece(0.0, true).0,
            at_phi_c: p.beta_s[0],
            at_phi_m: 0.0,
            slope_at_phi_m: 0.0,
        }
    }

    fn data(p: &PiecewisePolyFlux) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
        let plan = default_sample_plan(PHI_C, PHI_M);
        let s = plan.points.iter().map(|&x| (x, p.eval(x).0)).collect();
        let d = plan.stencils.iter().map(|st| plan.points[st[1]]).map(|x| (x, p.eval(x).1)).collect();
        (s, d)
    }

    fn rel_coef_err(a: &PiecewisePolyFlux, b: &PiecewisePolyFlux) -> f64 {
        let num: f64 = a.beta_s.iter().chain(a.beta_r.iter()).zip(b.beta_s.iter().chain(b.beta_r.iter())).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = b.beta_s.iter().chain(b.beta_r.iter()).map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn generator_meets_constraints() {
        let p = admissible_poly(1);
        let (v, s, _) = p.eval_piece(PHI_M, false);
        assert!(v.abs() < 1e-12 && s.abs() < 1e-11);
        let lo = p.eval_piece(PHI_C, true);
        let hi = p.eval_piece(PHI_C, false);
        assert!((lo.0 - hi.0).abs() < 1e-15 && (lo.1 - hi.1).abs() < 1e-15 && (lo.2 - hi.2).abs() < 1e-15);
    }

    #[test]
    fn recovers_admissible_polynomial() {
        for seed in 0..5 {
            let truth = admissible_poly(seed);
            let (s, d) = data(&truth);
            for lambda in [0.0, 0.03, 1.0] {
                let (fit, diag) = fit_piecewise_poly(&s, &d, &FitConfig { lambda }, &anchors_of(&truth)).unwrap();
                let e = rel_coef_err(&fit, &truth);
                assert!(e <= 1e-8, "seed {seed} lambda {lambda}: {e:e}");
                assert!(diag.max_constraint_residual() <= 1e-10);
            }
        }
    }

    #[test]
    fn zero_lambda_ignores_derivative_data() {
        let truth = admissible_poly(7);
        let (s, d) = data(&truth);
        let garbage: Vec<(f64, f64)> = d.iter().map(|&(x, _)| (x, 1e6 * x.sin())).collect();
        let a = fit_piecewise_poly(&s, &d, &FitConfig { lambda: 0.0 }, &anchors_of(&truth)).unwrap().0;
        let b = fit_piecewise_poly(&s, &garbage, &FitConfig { lambda: 0.0 }, &anchors_of(&truth)).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn anchors_and_matching_hold_on_noisy_data() {
        let plan = default_sample_plan(PHI_C, PHI_M);
        let f = |x: f64| (0.971 / 3.0) * (1.0 - x / PHI_M).powi(2) * (1.0 + (8.0 * x).sin() * 0.1);
        let vals: Vec<f64> = plan.points.iter().map(|&x| f(x)).collect();
        let anchors = FitAnchors {
            phi_c: PHI_C,
            phi_m: PHI_M,
            at_zero: 0.971 / 3.0,
            at_phi_c: f(PHI_C),
            at_phi_m: 0.0,
            slope_at_phi_m: 0.0,
        };
        let (fit, diag) =
            fit_piecewise_poly(&plan.samples(&vals), &plan.derivative_data(&vals), &FitConfig::default(), &anchors).unwrap();
        assert!(diag.max_constraint_residual() <= 1e-10, "{diag:?}");
        assert!((fit.eval(0.0).0 - 0.971 / 3.0).abs() <= 1e-10);
        assert!(fit.eval(PHI_M).0.abs() <= 1e-10 && fit.eval(PHI_M).1.abs() <= 1e-10);
        let lo = fit.eval_piece(PHI_C, true);
        let hi = fit.eval_piece(PHI_C, false);
        assert!((lo.0 - hi.0).abs() <= 1e-10 && (lo.1 - hi.1).abs() <= 1e-10 && (lo.2 - hi.2).abs() <= 1e-10);
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(diag.lagrangian_gradient <= 1e-8 * scale.max(1.0), "{}", diag.lagrangian_gradient);
    }

    #[test]
    fn too_few_samples_is_rank_error() {
        let anchors = FitAnchors { phi_c: PHI_C, phi_m: PHI_M, at_zero: 1.0, at_phi_c: 0.5, at_phi_m: 0.0, slope_at_phi_m: 0.0 };
        let s = vec![(0.1, 0.9), (0.2, 0.8)];
        assert!(matches!(fit_piecewise_poly(&s, &[], &FitConfig { lambda: 0.0 }, &anchors), Err(Error::Rank(_))));
    }

    #[test]
    fn horner_derivatives() {
        let mut b = [0.0; 10];
        b[3] = 2.0;
        let (p, d1, d2) = poly(&b, 0.5);
        assert_eq!((p, d1, d2), (0.25, 1.5, 6.0));
    }
}
