//! Quantile re-ordering machinery: empirical survival curves, their
//! pseudo-inverse, Lorenz and concentration curves, the ordered-draw
//! Riemann estimator, and the deterministic-grid quadrature used by nested
//! sampling.
//!
//! The central identity is that for Y = L(X) with survival function
//! Z(y) = P(L(X) > y) and pseudo-inverse Lambda(s) = sup{y : Z(y) > s},
//! the expectation E[L(X)] equals the one-dimensional integral of Lambda
//! over (0, 1). All curves here are step functions with merged ties, since
//! integer energies generate heavy ties.

use serde::Serialize;
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuantileError {
    #[error("input values must be nonempty")]
    Empty,
    #[error("at least two draws are required")]
    TooFewDraws,
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("values must be nonnegative")]
    Negative,
    #[error("values must not all be zero")]
    AllZero,
    #[error("grid must be strictly decreasing inside (0, 1]")]
    BadGrid,
}

fn check_finite(values: &[f64]) -> Result<(), QuantileError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(QuantileError::NonFinite);
    }
    Ok(())
}

/// Non-increasing step function y -> P(Y > y), from knots at the distinct
/// sample values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    /// `(y, mass strictly above y)`, ascending in y. The curve is 1 left of
    /// the first knot and takes the stored value on `[y_k, y_{k+1})`.
    knots: Vec<(f64, f64)>,
}

impl SurvivalCurve {
    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self
            .knots
            .partition_point(|&(knot, _)| knot <= y)
        {
            0 => 1.0,
            k => self.knots[k - 1].1,
        }
    }
}

/// Empirical survival function 1 - F of a sample, ties merged.
pub fn empirical_survival(values: &[f64]) -> Result<SurvivalCurve, QuantileError> {
    if values.is_empty() {
        return Err(QuantileError::Empty);
    }
    check_finite(values)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut knots = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let y = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == y {
            j += 1;
        }
        knots.push((y, (sorted.len() - j) as f64 / n));
        i = j;
    }
    Ok(SurvivalCurve { knots })
}

/// Non-increasing pseudo-inverse Lambda(s) = sup{y : Z(y) > s} on [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaCurve {
    /// `(s_lower, value)` segments ascending in s; Lambda takes `value` on
    /// `[s_lower, s_upper)` where s_upper is the next segment's lower bound
    /// (1 for the last segment).
    segments: Vec<(f64, f64)>,
}

impl LambdaCurve {
    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self
            .segments
            .partition_point(|&(lo, _)| lo <= s)
        {
            0 => self.segments[0].1,
            k => self.segments[k - 1].1,
        }
    }

    /// Exact integral over (0, 1): the quantile-reordering identity makes
    /// this the sample mean when the curve comes from data.
    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        for (k, &(lo, value)) in self.segments.iter().enumerate() {
            let hi = self
                .segments
                .get(k + 1)
                .map(|&(next, _)| next)
                .unwrap_or(1.0);
            total += value * (hi - lo);
        }
        total
    }
}

/// Pseudo-inverse of a survival curve.
pub fn lambda_inverse(curve: &SurvivalCurve) -> LambdaCurve {
    // Z takes value Z_k on [y_k, y_{k+1}), so Lambda(s) = y_k exactly on
    // [Z_k, Z_{k-1}), with Z_0 = 1 to the left of the first knot.
    let segments = curve
        .knots
        .iter()
        .rev()
        .map(|&(y, z)| (z, y))
        .collect();
    LambdaCurve { segments }
}

/// Ordered-draw trapezoid estimator of the integral of `l` over [0, 1] from
/// uniform draws, with the endpoints 0 and 1 adjoined. Exact for constant
/// and linear integrands.
pub fn riemann_quantile_estimate(
    draws: &[f64],
    l: impl Fn(f64) -> f64,
) -> Result<f64, QuantileError> {
    if draws.len() < 2 {
        return Err(QuantileError::TooFewDraws);
    }
    check_finite(draws)?;
    let mut u = Vec::with_capacity(draws.len() + 2);
    u.push(0.0);
    u.extend_from_slice(draws);
    u.push(1.0);
    u.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    let mut prev_l = l(u[0]);
    for w in u.windows(2) {
        let next_l = l(w[1]);
        total += (w[1] - w[0]) * (next_l + prev_l) / 2.0;
        prev_l = next_l;
    }
    Ok(total)
}

/// Ordered-draw left Riemann sum for a general base density `p`:
/// sum (x_(i+1) - x_(i)) p(x_(i)) L(x_(i)).
pub fn riemann_general_estimate(
    draws: &[f64],
    p: impl Fn(f64) -> f64,
    l: impl Fn(f64) -> f64,
) -> Result<f64, QuantileError> {
    if draws.len() < 2 {
        return Err(QuantileError::TooFewDraws);
    }
    check_finite(draws)?;
    let mut x = draws.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(x.windows(2)
        .map(|w| (w[1] - w[0]) * p(w[0]) * l(w[0]))
        .sum())
}

/// Weight rule for the deterministic-grid quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    /// w_i = s_{i-1} - s_i.
    Rectangle,
    /// w_i = (s_{i-1} - s_{i+1}) / 2.
    Trapezoid,
}

/// Quadrature of Lambda over (0, 1) on a strictly decreasing grid in (0, 1],
/// with the conventions s_0 = 1 and s_{m+1} = 0.
pub fn trapezoid_lambda_estimate(
    lambda: impl Fn(f64) -> f64,
    grid: &[f64],
    rule: QuadratureRule,
) -> Result<f64, QuantileError> {
    if grid.is_empty() {
        return Err(QuantileError::BadGrid);
    }
    let decreasing = grid.windows(2).all(|w| w[0] > w[1]);
    if !decreasing || grid[0] > 1.0 || *grid.last().unwrap() <= 0.0 {
        return Err(QuantileError::BadGrid);
    }
    let m = grid.len();
    let s = |i: isize| -> f64 {
        if i < 0 {
            1.0
        } else if i as usize >= m {
            0.0
        } else {
            grid[i as usize]
        }
    };
    let mut total = 0.0;
    for i in 0..m {
        let w = match rule {
            QuadratureRule::Rectangle => s(i as isize - 1) - s(i as isize),
            QuadratureRule::Trapezoid => (s(i as isize - 1) - s(i as isize + 1)) / 2.0,
        };
        total += w * lambda(grid[i]);
    }
    Ok(total)
}

/// The nested-sampling grid s_i = exp(-i/n) for i = 1..=m.
pub fn geometric_grid(n: usize, m: usize) -> Vec<f64> {
    (1..=m).map(|i| (-(i as f64) / n as f64).exp()).collect()
}

/// Normalized cumulative quantile integral of a nonnegative sample:
/// convex, L(0) = 0, L(1) = 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorenzCurve {
    /// Knot points (u, L(u)); piecewise linear in between.
    points: Vec<(f64, f64)>,
}

impl LorenzCurve {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let k = self.points.partition_point(|&(pu, _)| pu <= u);
        if k == 0 {
            return self.points[0].1;
        }
        if k == self.points.len() {
            return self.points[k - 1].1;
        }
        let (u0, v0) = self.points[k - 1];
        let (u1, v1) = self.points[k];
        v0 + (v1 - v0) * (u - u0) / (u1 - u0)
    }
}

/// Lorenz curve of weighted nonnegative values.
pub fn lorenz_curve(values: &[f64], weights: Option<&[f64]>) -> Result<LorenzCurve, QuantileError> {
    if values.is_empty() {
        return Err(QuantileError::Empty);
    }
    check_finite(values)?;
    if values.iter().any(|&v| v < 0.0) {
        return Err(QuantileError::Negative);
    }
    let weights: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != values.len() {
                return Err(QuantileError::Empty);
            }
            check_finite(w)?;
            if w.iter().any(|&x| x <= 0.0) {
                return Err(QuantileError::Negative);
            }
            w.to_vec()
        }
        None => vec![1.0; values.len()],
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let total_w: f64 = weights.iter().sum();
    let total_v: f64 = order.iter().map(|&i| values[i] * weights[i]).sum();
    if total_v == 0.0 {
        return Err(QuantileError::AllZero);
    }
    let mut points = vec![(0.0, 0.0)];
    let mut cum_w = 0.0;
    let mut cum_v = 0.0;
    for &i in &order {
        cum_w += weights[i];
        cum_v += values[i] * weights[i];
        points.push((cum_w / total_w, cum_v / total_v));
    }
    // Pin the endpoint against rounding drift.
    points.last_mut().unwrap().0 = 1.0;
    points.last_mut().unwrap().1 = 1.0;
    Ok(LorenzCurve { points })
}

/// Concentration function: the unnormalized cumulative quantile integral of
/// likelihood ratios, phi(u) = integral of the ratio quantile over [0, u].
/// phi(1) recovers the sample mean (1 when the ratios are a true likelihood
/// ratio sample).
pub fn concentration_curve(
    likelihood_ratios: &[f64],
    u_grid: &[f64],
) -> Result<Vec<(f64, f64)>, QuantileError> {
    if likelihood_ratios.is_empty() {
        return Err(QuantileError::Empty);
    }
    check_finite(likelihood_ratios)?;
    if likelihood_ratios.iter().any(|&r| r < 0.0) {
        return Err(QuantileError::Negative);
    }
    let mut sorted = likelihood_ratios.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let phi = |u: f64| -> f64 {
        let u = u.clamp(0.0, 1.0);
        let pos = u * n as f64;
        let k = (pos.floor() as usize).min(n);
        let mut acc: f64 = sorted[..k].iter().sum::<f64>() / n as f64;
        if k < n {
            acc += (pos - k as f64) / n as f64 * sorted[k];
        }
        acc
    };
    Ok(u_grid.iter().map(|&u| (u, phi(u))).collect())
}

/// Integrands for the Riemann convergence-rate probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeIntegrand {
    Const,
    Linear,
    Quadratic,
    Exp,
}

impl std::str::FromStr for ProbeIntegrand {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "const" => Ok(Self::Const),
            "linear" => Ok(Self::Linear),
            "quadratic" => Ok(Self::Quadratic),
            "exp" => Ok(Self::Exp),
            other => Err(format!("unknown integrand {other:?}")),
        }
    }
}

impl ProbeIntegrand {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Self::Const => 1.0,
            Self::Linear => u,
            Self::Quadratic => u * u,
            Self::Exp => u.exp(),
        }
    }

    pub fn truth(&self) -> f64 {
        match self {
            Self::Const => 1.0,
            Self::Linear => 0.5,
            Self::Quadratic => 1.0 / 3.0,
            Self::Exp => std::f64::consts::E - 1.0,
        }
    }
}

/// Mean-squared-error curve of the ordered-draw trapezoid estimator, with
/// the fitted log-log slope. The paper's rate claim is about mean squared
/// error, so that is what the probe regresses.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeResult {
    pub integrand: ProbeIntegrand,
    pub repeats: usize,
    /// (sample size, mean squared error across repeats).
    pub points: Vec<(usize, f64)>,
    /// Least-squares slope of ln(mse) against ln(N); `None` when every
    /// error vanishes (constant/linear integrands are integrated exactly).
    pub slope: Option<f64>,
}

pub fn riemann_probe(
    integrand: ProbeIntegrand,
    sizes: &[usize],
    repeats: usize,
    seed: u64,
) -> ProbeResult {
    use rand::Rng;
    let mut points = Vec::with_capacity(sizes.len());
    for (si, &n) in sizes.iter().enumerate() {
        let mut sq_sum = 0.0;
        for rep in 0..repeats {
            let mut r = rng::derive(seed, &[rng::tag::PROBE, si as u64, rep as u64]);
            let draws: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
            let est = riemann_quantile_estimate(&draws, |u| integrand.eval(u))
                .expect("n >= 2 draws");
            let err = est - integrand.truth();
            sq_sum += err * err;
        }
        points.push((n, sq_sum / repeats as f64));
    }
    let slope = fit_log_slope(&points);
    ProbeResult {
        integrand,
        repeats,
        points,
        slope,
    }
}

/// Least-squares slope of ln(err) vs ln(N) over the strictly positive
/// error entries.
pub fn fit_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, e)| e > 0.0)
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    if data.len() < 2 {
        return None;
    }
    let n = data.len() as f64;
    let mx = data.iter().map(|d| d.0).sum::<f64>() / n;
    let my = data.iter().map(|d| d.1).sum::<f64>() / n;
    let sxy: f64 = data.iter().map(|d| (d.0 - mx) * (d.1 - my)).sum();
    let sxx: f64 = data.iter().map(|d| (d.0 - mx) * (d.0 - mx)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    use crate::exact::exact_dos;

    #[test]
    fn survival_of_constant_sample() {
        let z = empirical_survival(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(z.eval(0.5), 1.0);
        assert_eq!(z.eval(1.0), 0.0);
        assert_eq!(z.eval(2.0), 0.0);
    }

    #[test]
    fn survival_midpoint() {
        let z = empirical_survival(&[0.0, 1.0]).unwrap();
        assert_eq!(z.eval(0.5), 0.5);
        assert_eq!(z.eval(-0.1), 1.0);
        assert_eq!(z.eval(1.0), 0.0);
    }

    #[test]
    fn survival_matches_dos_exactly() {
        // e^{-S} over all 24 permutations of n=4: Z(e^{-s}) is the fraction
        // of states with energy strictly below s.
        let dos = exact_dos(4).unwrap();
        let values: Vec<f64> = dos
            .counts
            .iter()
            .enumerate()
            .flat_map(|(s, &c)| std::iter::repeat((-(s as f64)).exp()).take(c as usize))
            .collect();
        let z = empirical_survival(&values).unwrap();
        for s in 0..=6u64 {
            let below = if s == 0 { 0 } else { dos.cumulative(s - 1) };
            let want = below as f64 / 24.0;
            assert_eq!(z.eval((-(s as f64)).exp()), want, "s = {s}");
        }
    }

    #[test]
    fn lambda_of_constant_sample() {
        let lam = lambda_inverse(&empirical_survival(&[1.0, 1.0, 1.0]).unwrap());
        for s in [0.0, 0.3, 0.99] {
            assert_eq!(lam.eval(s), 1.0);
        }
    }

    #[test]
    fn lambda_integral_is_mean() {
        let values = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let lam = lambda_inverse(&empirical_survival(&values).unwrap());
        assert!((lam.integral() - mean).abs() < 1e-12);
    }

    #[test]
    fn lambda_round_trip_hits_order_statistics() {
        let values = [0.5, 0.25, 0.125, 0.125, 1.0];
        let z = empirical_survival(&values).unwrap();
        let lam = lambda_inverse(&z);
        for &(y, zy) in z.knots() {
            assert_eq!(lam.eval(zy), y);
        }
    }

    #[test]
    fn lambda_of_uniform_sample_approaches_identity() {
        let mut r = rng::derive(3, &[rng::tag::PROBE, 100]);
        let draws: Vec<f64> = (0..20_000).map(|_| r.random::<f64>()).collect();
        let lam = lambda_inverse(&empirical_survival(&draws).unwrap());
        let sup = (0..100)
            .map(|k| {
                let s = k as f64 / 100.0;
                (lam.eval(s) - (1.0 - s)).abs()
            })
            .fold(0.0, f64::max);
        assert!(sup < 0.02, "sup distance {sup}");
    }

    #[test]
    fn riemann_exact_for_constant_and_linear() {
        let mut r = rng::derive(4, &[rng::tag::PROBE, 101]);
        let draws: Vec<f64> = (0..100).map(|_| r.random::<f64>()).collect();
        let c = riemann_quantile_estimate(&draws, |_| 2.5).unwrap();
        assert!((c - 2.5).abs() < 1e-12);
        let lin = riemann_quantile_estimate(&draws, |u| u).unwrap();
        assert!((lin - 0.5).abs() < 1e-12);
        assert!(matches!(
            riemann_quantile_estimate(&[0.5], |u| u),
            Err(QuantileError::TooFewDraws)
        ));
    }

    #[test]
    fn riemann_probe_shows_fast_rate() {
        let probe = riemann_probe(ProbeIntegrand::Quadratic, &[16, 64, 256, 1024], 20, 0);
        let slope = probe.slope.unwrap();
        assert!(slope < -3.0, "slope {slope}");
        // Errors shrink monotonically across these sizes.
        for w in probe.points.windows(2) {
            assert!(w[1].1 < w[0].1);
        }
    }

    #[test]
    fn grid_quadrature_constant() {
        let grid = geometric_grid(1000, 20_000);
        let est = trapezoid_lambda_estimate(|_| 1.0, &grid, QuadratureRule::Rectangle).unwrap();
        assert!((est - 1.0).abs() < 1e-6, "got {est}");
    }

    #[test]
    fn grid_quadrature_linear_geometric() {
        let grid = geometric_grid(20, 1000);
        let est =
            trapezoid_lambda_estimate(|s| 1.0 - s, &grid, QuadratureRule::Trapezoid).unwrap();
        assert!((est - 0.5).abs() < 1e-3, "got {est}");
    }

    #[test]
    fn trapezoid_beats_rectangle_on_monotone_integrand() {
        let grid = geometric_grid(20, 1000);
        let rect =
            trapezoid_lambda_estimate(|s| 1.0 - s, &grid, QuadratureRule::Rectangle).unwrap();
        let trap =
            trapezoid_lambda_estimate(|s| 1.0 - s, &grid, QuadratureRule::Trapezoid).unwrap();
        assert!((trap - 0.5).abs() <= (rect - 0.5).abs());
    }

    #[test]
    fn grid_validation() {
        assert!(trapezoid_lambda_estimate(|_| 1.0, &[], QuadratureRule::Rectangle).is_err());
        assert!(
            trapezoid_lambda_estimate(|_| 1.0, &[0.5, 0.5], QuadratureRule::Rectangle).is_err()
        );
        assert!(
            trapezoid_lambda_estimate(|_| 1.0, &[1.5, 0.5], QuadratureRule::Rectangle).is_err()
        );
    }

    #[test]
    fn lorenz_equal_values_is_diagonal() {
        let curve = lorenz_curve(&[2.0, 2.0, 2.0, 2.0], None).unwrap();
        for k in 0..=8 {
            let u = k as f64 / 8.0;
            assert!((curve.eval(u) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn lorenz_single_rich_holder() {
        let curve = lorenz_curve(&[0.0, 0.0, 0.0, 1.0], None).unwrap();
        assert_eq!(curve.eval(0.0), 0.0);
        assert_eq!(curve.eval(0.75), 0.0);
        assert!((curve.eval(0.875) - 0.5).abs() < 1e-12);
        assert_eq!(curve.eval(1.0), 1.0);
        assert!(matches!(
            lorenz_curve(&[0.0, 0.0], None),
            Err(QuantileError::AllZero)
        ));
    }

    #[test]
    fn lorenz_from_dos_matches_weighted_form() {
        // e^{-S} over all n=4 permutations: the per-state curve equals the
        // per-level curve weighted by the density of states.
        let dos = exact_dos(4).unwrap();
        let per_state: Vec<f64> = dos
            .counts
            .iter()
            .enumerate()
            .flat_map(|(s, &c)| std::iter::repeat((-(s as f64)).exp()).take(c as usize))
            .collect();
        let a = lorenz_curve(&per_state, None).unwrap();
        let levels: Vec<f64> = dos
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, _)| (-(s as f64)).exp())
            .collect();
        let weights: Vec<f64> = dos
            .counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| c as f64)
            .collect();
        let b = lorenz_curve(&levels, Some(&weights)).unwrap();
        for k in 0..=24 {
            let u = k as f64 / 24.0;
            assert!((a.eval(u) - b.eval(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn concentration_identity_ratios() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let curve = concentration_curve(&[1.0; 50], &grid).unwrap();
        for &(u, phi) in &curve {
            assert!((phi - u).abs() < 1e-12);
        }
        assert_eq!(curve[0].1, 0.0);
    }

    #[test]
    fn concentration_endpoint_is_mean() {
        let ratios = [0.5, 1.5, 0.8, 1.2];
        let curve = concentration_curve(&ratios, &[0.0, 1.0]).unwrap();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert_eq!(curve[0].1, 0.0);
        assert!((curve[1].1 - mean).abs() < 1e-12);
    }

    #[test]
    fn normalizing_ratio_identity_exhaustive() {
        // P uniform on n=4 permutations, Q the Boltzmann law at gamma = 1,
        // L = e^{-S}. Both integrals in Z/Z_0 = int L dP / int L dQ are
        // exhaustively computable from the density of states.
        let dos = exact_dos(4).unwrap();
        let zq: f64 = dos
            .counts
            .iter()
            .enumerate()
            .map(|(s, &c)| c as f64 * (-(s as f64)).exp())
            .sum();
        let z: f64 = zq / 24.0; // int L dP
        let z0: f64 = dos
            .counts
            .iter()
            .enumerate()
            .map(|(s, &c)| c as f64 * (-2.0 * s as f64).exp())
            .sum::<f64>()
            / zq; // int L dQ
        // The tilted-measure endpoint identity: the ratio of normalizing
        // constants written as a ratio of the two likelihood integrals.
        let ratio = z / z0;
        // Independent route: E_Q[L] = E_P[L^2] / E_P[L].
        let ep_l2: f64 = dos
            .counts
            .iter()
            .enumerate()
            .map(|(s, &c)| c as f64 * (-2.0 * s as f64).exp())
            .sum::<f64>()
            / 24.0;
        let alt = z / (ep_l2 / z);
        assert!((ratio - alt).abs() < 1e-12);
    }

    #[test]
    fn general_riemann_estimator() {
        // Integral of L(x) = x under the uniform density on [0, 1].
        let mut r = rng::derive(8, &[rng::tag::PROBE, 102]);
        let draws: Vec<f64> = (0..50_000).map(|_| r.random::<f64>()).collect();
        let est = riemann_general_estimate(&draws, |_| 1.0, |x| x).unwrap();
        assert!((est - 0.5).abs() < 0.01, "got {est}");
    }
}
