use serde::Serialize;

use crate::error::{Error, Result};
use crate::stream::{split_stream, SeedSpec};
use crate::vector::Vector;

/// Per-coordinate minimum value of `(x² − 1)² + 0.1·x²`, attained at `x² = 0.95`.
pub const DOUBLE_WELL_COORD_MIN: f64 = 0.0975;
/// Half-width of the box on which the double-well's declared smoothness constant holds.
pub const DOUBLE_WELL_BOX: f64 = 4.0;

/// Finite-sum logistic loss with a ridge term, one component per sample:
/// `g_i(θ) = ln(1 + exp(−y_i a_iᵀθ)) + λ‖θ‖²`, `g = mean_i g_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogisticData {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub ridge: f64,
}

impl LogisticData {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn margin(&self, i: usize, theta: &[f64]) -> f64 {
        self.labels[i] * dot(&self.features[i], theta)
    }

    fn component_value(&self, i: usize, theta: &[f64]) -> f64 {
        softplus(-self.margin(i, theta)) + self.ridge * sq_norm(theta)
    }

    fn component_grad_into(&self, i: usize, theta: &[f64], scale: f64, out: &mut [f64]) {
        let w = -self.labels[i] * sigmoid(-self.margin(i, theta));
        for ((o, a), t) in out.iter_mut().zip(&self.features[i]).zip(theta) {
            *o += scale * (w * a + 2.0 * self.ridge * t);
        }
    }

    fn max_feature_norm(&self) -> f64 {
        self.features
            .iter()
            .map(|a| sq_norm(a).sqrt())
            .fold(0.0, f64::max)
    }

    fn mean_feature_norm(&self) -> f64 {
        self.features.iter().map(|a| sq_norm(a).sqrt()).sum::<f64>() / self.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// `½‖θ‖²`
    Quadratic,
    /// `e^{−‖θ‖²} + ‖θ‖²`
    RegularizedExp,
    /// `Σ_i [(θ_i² − 1)² + 0.1 θ_i² − 0.0975]`
    DoubleWell,
    Logistic(LogisticData),
    /// `e^{−‖θ‖²}`: asymptotically flat, kept as an anti-example.
    FlatExp,
}

/// A test objective together with the analytic metadata the diagnostics rely on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Objective {
    pub id: String,
    pub dim: usize,
    pub kind: ObjectiveKind,
    /// Declared smoothness constant `L`.
    pub lipschitz: f64,
    /// Declared infimum of the objective.
    pub g_inf: f64,
    /// Non-flatness margin `δ̃`; zero means no claim.
    pub delta_tilde: f64,
    /// Upper bound of `g` over the gradient sublevel set `{‖∇g‖ ≤ δ̃}`, when known.
    pub sublevel_g_max: Option<f64>,
    pub coercive: bool,
    /// Radius of a ball containing every critical point.
    pub critical_radius: f64,
}

impl Objective {
    pub fn quadratic(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Objective {
            id: "quadratic".into(),
            dim,
            kind: ObjectiveKind::Quadratic,
            lipschitz: 1.0,
            g_inf: 0.0,
            delta_tilde: 1.0,
            // {‖θ‖ ≤ 1} on which ½‖θ‖² ≤ ½
            sublevel_g_max: Some(0.5),
            coercive: true,
            critical_radius: 0.0,
        })
    }

    /// `e^{−‖θ‖²} + ‖θ‖²`. Its infimum is 1 at the origin; the value is not shifted.
    pub fn regularized_exp(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let delta_tilde = 1.0;
        // ‖∇g‖ = 2r(1 − e^{−r²}) is increasing in r, so the sublevel set is a ball.
        let r = bisect(|r| 2.0 * r * (1.0 - (-r * r).exp()) - delta_tilde, 0.0, 10.0);
        Ok(Objective {
            id: "regularized_exp".into(),
            dim,
            kind: ObjectiveKind::RegularizedExp,
            lipschitz: regularized_exp_lipschitz(),
            g_inf: 1.0,
            delta_tilde,
            sublevel_g_max: Some((-r * r).exp() + r * r),
            coercive: true,
            critical_radius: 0.0,
        })
    }

    /// Coercive, non-convex double well, shifted so that its infimum is 0.
    ///
    /// The objective is not globally smooth; the declared `L` is the Hessian
    /// spectral-norm maximum over the box `[−4, 4]^d`.
    pub fn double_well(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let delta_tilde = 1.0;
        let f = |x: f64| (x * x - 1.0).powi(2) + 0.1 * x * x - DOUBLE_WELL_COORD_MIN;
        // f' = 4x³ − 3.8x is increasing past √(3.8/12); |f'| ≤ δ̃ forces |x| ≤ x*.
        let x_star = bisect(
            |x| 4.0 * x * x * x - 3.8 * x - delta_tilde,
            (3.8f64 / 12.0).sqrt(),
            10.0,
        );
        let per_coord = f(0.0).max(f(x_star));
        Ok(Objective {
            id: "double_well".into(),
            dim,
            kind: ObjectiveKind::DoubleWell,
            lipschitz: double_well_lipschitz(DOUBLE_WELL_BOX),
            g_inf: 0.0,
            delta_tilde,
            sublevel_g_max: Some(dim as f64 * per_coord),
            coercive: true,
            critical_radius: (0.95 * dim as f64).sqrt(),
        })
    }

    /// Logistic finite sum over `components` synthetic samples drawn from `data_seed`.
    pub fn logistic(dim: usize, components: usize, ridge: f64, data_seed: u64) -> Result<Self> {
        check_dim(dim)?;
        if components == 0 {
            return Err(Error::invalid("components", "must be at least 1"));
        }
        let mut stream = split_stream(SeedSpec::new(data_seed, 0, u64::MAX));
        let planted = stream.draw_standard_normal(dim);
        let mut features = Vec::with_capacity(components);
        let mut labels = Vec::with_capacity(components);
        for _ in 0..components {
            let a = stream.draw_standard_normal(dim);
            let score = a.dot(&planted)? + 0.5 * stream.standard_normal();
            labels.push(if score >= 0.0 { 1.0 } else { -1.0 });
            features.push(a.into_inner());
        }
        Self::logistic_from_data(LogisticData {
            features,
            labels,
            ridge,
        })
    }

    pub fn logistic_from_data(data: LogisticData) -> Result<Self> {
        if data.is_empty() || data.features.len() != data.labels.len() {
            return Err(Error::invalid("logistic data", "need one label per feature row"));
        }
        let dim = data.features[0].len();
        check_dim(dim)?;
        if data.features.iter().any(|a| a.len() != dim) {
            return Err(Error::invalid("logistic data", "ragged feature rows"));
        }
        if !(data.ridge > 0.0 && data.ridge.is_finite()) {
            return Err(Error::invalid("ridge", "must be positive"));
        }
        if data.labels.iter().any(|y| *y != 1.0 && *y != -1.0) {
            return Err(Error::invalid("labels", "must be ±1"));
        }
        let a_max = data.max_feature_norm();
        let a_mean = data.mean_feature_norm();
        // s(1 − s) ≤ ¼ bounds every component Hessian.
        let lipschitz = a_max * a_max / 4.0 + 2.0 * data.ridge;
        let delta_tilde = 1.0;
        // ‖∇g‖ ≥ 2λ‖θ‖ − mean‖a_i‖, so the sublevel set sits in a ball of radius r.
        let r = (delta_tilde + a_mean) / (2.0 * data.ridge);
        let sublevel_g_max = data
            .features
            .iter()
            .map(|a| softplus(sq_norm(a).sqrt() * r))
            .sum::<f64>()
            / data.len() as f64
            + data.ridge * r * r;
        let mut obj = Objective {
            id: "logistic".into(),
            dim,
            lipschitz,
            g_inf: 0.0,
            delta_tilde,
            sublevel_g_max: Some(sublevel_g_max),
            coercive: true,
            critical_radius: a_mean / (2.0 * data.ridge),
            kind: ObjectiveKind::Logistic(data),
        };
        obj.g_inf = obj.minimise_strongly_convex()?;
        Ok(obj)
    }

    pub fn flat_exp(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Objective {
            id: "flat_exp".into(),
            dim,
            kind: ObjectiveKind::FlatExp,
            // max |(4x² − 2)e^{−x²}| is 2, at the origin
            lipschitz: 2.0,
            g_inf: 0.0,
            delta_tilde: 0.0,
            sublevel_g_max: None,
            coercive: false,
            critical_radius: 0.0,
        })
    }

    /// Looks up a built-in by its config id.
    pub fn by_id(id: &str, dim: usize, logistic: Option<(usize, f64, u64)>) -> Result<Self> {
        match id {
            "quadratic" => Self::quadratic(dim),
            "regularized_exp" => Self::regularized_exp(dim),
            "double_well" => Self::double_well(dim),
            "flat_exp" => Self::flat_exp(dim),
            "logistic" => {
                let (n, ridge, seed) = logistic.unwrap_or((8, 0.1, 0));
                Self::logistic(dim, n, ridge, seed)
            }
            other => Err(Error::invalid("problem.id", format!("unknown objective `{other}`"))),
        }
    }

    pub fn value(&self, theta: &Vector) -> Result<f64> {
        theta.ensure_dim(self.dim)?;
        let t = theta.as_slice();
        let v = match &self.kind {
            ObjectiveKind::Quadratic => 0.5 * sq_norm(t),
            ObjectiveKind::RegularizedExp => {
                let r2 = sq_norm(t);
                (-r2).exp() + r2
            }
            ObjectiveKind::DoubleWell => t
                .iter()
                .map(|x| (x * x - 1.0).powi(2) + 0.1 * x * x - DOUBLE_WELL_COORD_MIN)
                .sum(),
            ObjectiveKind::Logistic(data) => {
                (0..data.len()).map(|i| data.component_value(i, t)).sum::<f64>()
                    / data.len() as f64
            }
            ObjectiveKind::FlatExp => (-sq_norm(t)).exp(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                what: "objective value",
            })
        }
    }

    pub fn grad(&self, theta: &Vector) -> Result<Vector> {
        theta.ensure_dim(self.dim)?;
        match &self.kind {
            ObjectiveKind::Quadratic => Ok(theta.clone()),
            ObjectiveKind::RegularizedExp => {
                let c = 2.0 * (1.0 - (-theta.norm_sq()).exp());
                theta.scaled(c)
            }
            ObjectiveKind::DoubleWell => theta.map(|x| 4.0 * x * (x * x - 1.0) + 0.2 * x),
            ObjectiveKind::Logistic(data) => {
                let mut out = vec![0.0; self.dim];
                let w = 1.0 / data.len() as f64;
                for i in 0..data.len() {
                    data.component_grad_into(i, theta.as_slice(), w, &mut out);
                }
                Vector::new(out)
            }
            ObjectiveKind::FlatExp => {
                let c = -2.0 * (-theta.norm_sq()).exp();
                theta.scaled(c)
            }
        }
    }

    /// Number of summands for finite-sum objectives.
    pub fn component_count(&self) -> Option<usize> {
        match &self.kind {
            ObjectiveKind::Logistic(data) => Some(data.len()),
            _ => None,
        }
    }

    /// Mean gradient of the listed components.
    pub fn batch_grad(&self, theta: &Vector, batch: &[usize]) -> Result<Vector> {
        theta.ensure_dim(self.dim)?;
        let ObjectiveKind::Logistic(data) = &self.kind else {
            return Err(Error::invalid("objective", "not a finite sum"));
        };
        if batch.is_empty() || batch.iter().any(|&i| i >= data.len()) {
            return Err(Error::invalid("batch", "empty or out-of-range component index"));
        }
        let mut out = vec![0.0; self.dim];
        let w = 1.0 / batch.len() as f64;
        for &i in batch {
            data.component_grad_into(i, theta.as_slice(), w, &mut out);
        }
        Vector::new(out)
    }

    /// Largest distance between two component gradients' deviation from the mean
    /// gradient; bounds the minibatch noise norm.
    pub(crate) fn component_spread(&self) -> Option<f64> {
        match &self.kind {
            ObjectiveKind::Logistic(data) => Some(2.0 * data.max_feature_norm()),
            _ => None,
        }
    }

    /// `Ĉ_g = C_g + σ₀α₀δ̃²/(2√S₀)`, the Lyapunov bound on the gradient sublevel set.
    pub fn c_hat_g(&self, sigma0: f64, alpha0: f64, s0: f64) -> Option<f64> {
        self.sublevel_g_max.map(|cg| {
            cg + sigma0 * alpha0 * self.delta_tilde * self.delta_tilde / (2.0 * s0.sqrt())
        })
    }

    // Gradient descent with step 1/L; the ridge term makes this strongly convex.
    fn minimise_strongly_convex(&self) -> Result<f64> {
        let mut theta = Vector::zeros(self.dim);
        let step = 1.0 / self.lipschitz;
        for _ in 0..200_000 {
            let g = self.grad(&theta)?;
            if g.norm() < 1e-13 {
                break;
            }
            theta = theta.axpy(-step, &g)?;
        }
        self.value(&theta)
    }
}

/// `max_t 2 − 2e^{−t} + 4t e^{−t}` (radial Hessian eigenvalue), attained at `t = 3/2`.
pub fn regularized_exp_lipschitz() -> f64 {
    2.0 + 4.0 * (-1.5f64).exp()
}

/// `max_{|x| ≤ b} |12x² − 3.8|`.
pub fn double_well_lipschitz(half_width: f64) -> f64 {
    (12.0 * half_width * half_width - 3.8).max(3.8)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::invalid("dim", "must be at least 1"))
    } else {
        Ok(())
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    debug_assert!(f(lo) <= 0.0 && f(hi) >= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{split_stream, SeedSpec};

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x).unwrap()
    }

    fn all_builtins(dim: usize) -> Vec<Objective> {
        vec![
            Objective::quadratic(dim).unwrap(),
            Objective::regularized_exp(dim).unwrap(),
            Objective::double_well(dim).unwrap(),
            Objective::logistic(dim, 6, 0.1, 3).unwrap(),
            Objective::flat_exp(dim).unwrap(),
        ]
    }

    #[test]
    fn regularized_exp_values() {
        let obj = Objective::regularized_exp(1).unwrap();
        assert_eq!(obj.value(&v(&[0.0])).unwrap(), 1.0);
        let one = obj.value(&v(&[1.0])).unwrap();
        assert!((one - ((-1.0f64).exp() + 1.0)).abs() < 1e-15);
        assert!((one - 1.3678794).abs() < 1e-7);
        assert_eq!(obj.grad(&v(&[0.0])).unwrap()[0], 0.0);
        let g1 = obj.grad(&v(&[1.0])).unwrap()[0];
        assert!((g1 - 1.2642411).abs() < 1e-7);
    }

    #[test]
    fn quadratic_values() {
        let obj = Objective::quadratic(2).unwrap();
        assert_eq!(obj.value(&Vector::zeros(2)).unwrap(), 0.0);
        let g = obj.grad(&v(&[3.0, 4.0])).unwrap();
        assert_eq!(g.as_slice(), &[3.0, 4.0]);
        assert_eq!(g.norm(), 5.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let obj = Objective::quadratic(2).unwrap();
        assert!(matches!(
            obj.value(&Vector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(obj.grad(&Vector::zeros(1)).is_err());
    }

    #[test]
    fn double_well_minimum_is_zero() {
        let obj = Objective::double_well(3).unwrap();
        let x = 0.95f64.sqrt();
        let at_min = obj.value(&v(&[x, -x, x])).unwrap();
        assert!(at_min.abs() < 1e-15, "{at_min}");
        assert!(obj.grad(&v(&[x, -x, 0.0])).unwrap().norm() < 1e-14);
    }

    // Independent grid oracle for the declared smoothness constants.
    #[test]
    fn declared_lipschitz_matches_grid_maximum() {
        let grid = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
            (0..=400_000)
                .map(|k| f(lo + (hi - lo) * k as f64 / 400_000.0).abs())
                .fold(0.0, f64::max)
        };
        // 1-d second derivative of e^{−x²} + x²
        let reg = grid(
            &|x: f64| 2.0 - 2.0 * (-x * x).exp() + 4.0 * x * x * (-x * x).exp(),
            -8.0,
            8.0,
        );
        assert!((reg - regularized_exp_lipschitz()).abs() < 1e-8, "{reg}");
        let dw = grid(&|x: f64| 12.0 * x * x - 3.8, -DOUBLE_WELL_BOX, DOUBLE_WELL_BOX);
        assert!((dw - Objective::double_well(1).unwrap().lipschitz).abs() < 1e-9);
        let flat = grid(&|x: f64| (4.0 * x * x - 2.0) * (-x * x).exp(), -8.0, 8.0);
        assert!((flat - 2.0).abs() < 1e-9);
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut s = split_stream(SeedSpec::new(5, 0, 9));
        for obj in all_builtins(3) {
            for _ in 0..1000 {
                let theta = s.in_ball(3, 2.5);
                let g = obj.grad(&theta).unwrap();
                let h = 1e-5;
                let mut fd = Vec::with_capacity(3);
                for i in 0..3 {
                    let mut p = theta.as_slice().to_vec();
                    let mut m = p.clone();
                    p[i] += h;
                    m[i] -= h;
                    fd.push(
                        (obj.value(&v(&p)).unwrap() - obj.value(&v(&m)).unwrap()) / (2.0 * h),
                    );
                }
                let fd = Vector::new(fd).unwrap();
                let err = fd.distance(&g).unwrap();
                assert!(
                    err <= 1e-5 * g.norm().max(1e-2),
                    "{}: fd error {err} at {theta:?}",
                    obj.id
                );
            }
        }
    }

    #[test]
    fn values_are_non_negative_and_above_infimum() {
        let mut s = split_stream(SeedSpec::new(6, 0, 9));
        for obj in all_builtins(2) {
            for _ in 0..2000 {
                let theta = s.in_ball(2, 5.0);
                let g = obj.value(&theta).unwrap();
                assert!(g >= 0.0, "{}", obj.id);
                assert!(g >= obj.g_inf - 1e-12, "{}", obj.id);
            }
        }
    }

    #[test]
    fn logistic_infimum_is_a_stationary_value() {
        let obj = Objective::logistic(2, 8, 0.1, 1).unwrap();
        assert!(obj.g_inf > 0.0);
        let mut s = split_stream(SeedSpec::new(1, 0, 9));
        for _ in 0..500 {
            assert!(obj.value(&s.in_ball(2, 3.0)).unwrap() >= obj.g_inf);
        }
        assert_eq!(obj.component_count(), Some(8));
        let full: Vec<usize> = (0..8).collect();
        let theta = v(&[0.3, -0.7]);
        let bg = obj.batch_grad(&theta, &full).unwrap();
        assert!(bg.distance(&obj.grad(&theta).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn regularized_exp_sublevel_bound() {
        let obj = Objective::regularized_exp(2).unwrap();
        let cg = obj.sublevel_g_max.unwrap();
        // every sampled point with ‖∇g‖ ≤ δ̃ has g ≤ C_g
        let mut s = split_stream(SeedSpec::new(2, 0, 9));
        for _ in 0..5000 {
            let theta = s.in_ball(2, 2.0);
            if obj.grad(&theta).unwrap().norm() <= obj.delta_tilde {
                assert!(obj.value(&theta).unwrap() <= cg + 1e-12);
            }
        }
        let c_hat = obj.c_hat_g(1.0, 1.0, 1.0).unwrap();
        assert!((c_hat - (cg + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn unknown_id_rejected() {
        assert!(Objective::by_id("rosenbrock", 2, None).is_err());
        assert_eq!(Objective::by_id("double_well", 2, None).unwrap().id, "double_well");
    }
}
