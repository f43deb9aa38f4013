//! Two-class "angle" dataset and a 2-20-1 ReLU MLP trained full batch with
//! the unified optimizer.
//!
//! Each class is a V made of two segments leaving a common vertex. Class 0
//! opens upward from the origin, class 1 is the same V turned upside down with
//! its vertex at `(0, vertex_offset)`, so the arms of the two classes cross.
//! Per class, 75% of the points sit on the long ("far") arm and 25% on the
//! short ("near") arm.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::math::{abs, cos, exp, ln, sin, sqrt};
use crate::optim::{OptimConfig, OptimState};
use crate::schedule::PSchedule;
use crate::seed::{rng_for, Stream};
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

pub const HIDDEN: usize = 20;
/// `2·20 + 20 + 20 + 1`.
pub const N_PARAMS: usize = 2 * HIDDEN + HIDDEN + HIDDEN + 1;

const W1: usize = 0;
const B1: usize = 2 * HIDDEN;
const W2: usize = 3 * HIDDEN;
const B2: usize = 4 * HIDDEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum Branch {
    Far,
    Near,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct AngleGeometry {
    /// Vertical distance between the two vertices.
    pub vertex_offset: f64,
    /// Angle of each arm from the vertical, in degrees.
    pub half_angle_deg: f64,
    pub far_radius: f64,
    pub near_radius: f64,
    /// Standard deviation of the isotropic Gaussian jitter.
    pub jitter: f64,
}

impl Default for AngleGeometry {
    fn default() -> Self {
        Self {
            vertex_offset: 1.0,
            half_angle_deg: 40.0,
            far_radius: 2.0,
            near_radius: 0.7,
            jitter: 0.03,
        }
    }
}

impl AngleGeometry {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.vertex_offset,
            self.half_angle_deg,
            self.far_radius,
            self.near_radius,
            self.jitter,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("geometry parameters must be finite"));
        }
        if !(self.far_radius > 0.0 && self.near_radius > 0.0) {
            return Err(Error::invalid("arm radii must be positive"));
        }
        if !(self.half_angle_deg > 0.0 && self.half_angle_deg < 90.0) {
            return Err(Error::invalid("half_angle_deg must lie in (0, 90)"));
        }
        if self.jitter < 0.0 {
            return Err(Error::invalid("jitter must be nonnegative"));
        }
        Ok(())
    }

    /// Vertex, unit direction and length of one arm.
    pub fn arm(&self, class: u8, branch: Branch) -> ([f64; 2], [f64; 2], f64) {
        let a = self.half_angle_deg.to_radians();
        let (s, c) = (sin(a), cos(a));
        let (vertex, sign) = if class == 0 {
            ([0.0, 0.0], 1.0)
        } else {
            ([0.0, self.vertex_offset], -1.0)
        };
        match branch {
            Branch::Far => (vertex, [sign * s, sign * c], self.far_radius),
            Branch::Near => (vertex, [-sign * s, sign * c], self.near_radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AngleDataset {
    pub points: Vec<[f64; 2]>,
    /// 0 or 1.
    pub labels: Vec<u8>,
    pub branches: Vec<Branch>,
    pub seed: u64,
}

impl AngleDataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.points {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }
}

/// Far-arm sample count for a class of `n`: `round(0.75·n)`.
pub fn far_count(n: usize) -> usize {
    (3 * n + 2) / 4
}

/// Builds the dataset. Points are ordered class 0 then class 1, far arm
/// before near arm; positions along an arm are uniform.
pub fn gen_angle_dataset(seed: u64, n_per_class: usize, geom: &AngleGeometry) -> Result<AngleDataset> {
    if n_per_class < 8 {
        return Err(Error::invalid("n_per_class must be at least 8"));
    }
    geom.validate()?;
    let mut rng = rng_for(seed, Stream::Dataset);
    let n_far = far_count(n_per_class);
    let mut ds = AngleDataset {
        points: Vec::with_capacity(2 * n_per_class),
        labels: Vec::with_capacity(2 * n_per_class),
        branches: Vec::with_capacity(2 * n_per_class),
        seed,
    };
    for class in 0..2u8 {
        for i in 0..n_per_class {
            let branch = if i < n_far { Branch::Far } else { Branch::Near };
            let (v, d, len) = geom.arm(class, branch);
            let r = rng.random::<f64>() * len;
            let jx: f64 = rng.sample(StandardNormal);
            let jy: f64 = rng.sample(StandardNormal);
            ds.points
                .push([v[0] + r * d[0] + geom.jitter * jx, v[1] + r * d[1] + geom.jitter * jy]);
            ds.labels.push(class);
            ds.branches.push(branch);
        }
    }
    Ok(ds)
}

/// Flat parameter vector. Layout: `W1` (2×20, row-major, row = input
/// coordinate), `b1`, `W2`, `b2`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Mlp {
    pub params: Vec<f64>,
}

impl Default for Mlp {
    fn default() -> Self {
        Self::zeros()
    }
}

impl Mlp {
    pub fn zeros() -> Self {
        Self {
            params: vec![0.0; N_PARAMS],
        }
    }

    /// `W1 ~ N(0, 1)`, `W2 ~ N(0, 1/20)`, zero biases.
    pub fn init(seed: u64) -> Self {
        let mut rng = rng_for(seed, Stream::Init);
        let mut m = Self::zeros();
        for w in &mut m.params[W1..B1] {
            *w = rng.sample(StandardNormal);
        }
        let s = sqrt(1.0 / HIDDEN as f64);
        for w in &mut m.params[W2..B2] {
            let z: f64 = rng.sample(StandardNormal);
            *w = s * z;
        }
        m
    }

    pub fn w1(&self, input: usize, unit: usize) -> f64 {
        self.params[W1 + input * HIDDEN + unit]
    }

    pub fn b1(&self, unit: usize) -> f64 {
        self.params[B1 + unit]
    }

    pub fn w2(&self, unit: usize) -> f64 {
        self.params[W2 + unit]
    }

    pub fn b2(&self) -> f64 {
        self.params[B2]
    }

    fn pre_activation(&self, x: [f64; 2], unit: usize) -> f64 {
        self.w1(0, unit) * x[0] + self.w1(1, unit) * x[1] + self.b1(unit)
    }

    pub fn logit(&self, x: [f64; 2]) -> f64 {
        let mut z = self.b2();
        for h in 0..HIDDEN {
            z += self.w2(h) * self.pre_activation(x, h).max(0.0);
        }
        z
    }

    pub fn forward(&self, xs: &[[f64; 2]]) -> Vec<f64> {
        xs.iter().map(|&x| self.logit(x)).collect()
    }

    /// Predicted class: 1 when the logit is positive.
    pub fn predict(&self, x: [f64; 2]) -> u8 {
        u8::from(self.logit(x) > 0.0)
    }

    /// BCE-with-logits loss of one sample and its gradient, accumulated into
    /// `grad` with weight `scale`. Returns the unscaled loss.
    pub fn backward_one(&self, x: [f64; 2], y: u8, scale: f64, grad: &mut [f64]) -> f64 {
        let mut act = [0.0; HIDDEN];
        let mut z = self.b2();
        for (h, a) in act.iter_mut().enumerate() {
            *a = self.pre_activation(x, h).max(0.0);
            z += self.w2(h) * *a;
        }
        let y = f64::from(y);
        let dz = scale * (sigmoid(z) - y);
        grad[B2] += dz;
        for (h, &a) in act.iter().enumerate() {
            grad[W2 + h] += dz * a;
            if a > 0.0 {
                let da = dz * self.w2(h);
                grad[W1 + h] += da * x[0];
                grad[W1 + HIDDEN + h] += da * x[1];
                grad[B1 + h] += da;
            }
        }
        softplus(z) - y * z
    }

    /// Loss and full gradient over a batch.
    pub fn loss_and_grad(&self, xs: &[[f64; 2]], ys: &[u8], reduction: Reduction) -> Result<(f64, Vec<f64>)> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                got: ys.len(),
            });
        }
        if xs.is_empty() {
            return Err(Error::invalid("empty batch"));
        }
        let scale = match reduction {
            Reduction::Mean => 1.0 / xs.len() as f64,
            Reduction::Sum => 1.0,
        };
        let mut grad = vec![0.0; N_PARAMS];
        let mut loss = 0.0;
        for (&x, &y) in xs.iter().zip(ys) {
            loss += self.backward_one(x, y, scale, &mut grad);
        }
        Ok((loss * scale, grad))
    }

    /// Gradient of a single sample's own (unreduced) loss.
    pub fn sample_grad(&self, x: [f64; 2], y: u8) -> Vec<f64> {
        let mut g = vec![0.0; N_PARAMS];
        self.backward_one(x, y, 1.0, &mut g);
        g
    }

    /// Mean BCE loss.
    pub fn loss(&self, xs: &[[f64; 2]], ys: &[u8]) -> f64 {
        let total: f64 = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let z = self.logit(x);
                softplus(z) - f64::from(y) * z
            })
            .sum();
        total / xs.len() as f64
    }

    pub fn accuracy(&self, xs: &[[f64; 2]], ys: &[u8]) -> f64 {
        let hits = xs.iter().zip(ys).filter(|(&x, &y)| self.predict(x) == y).count();
        hits as f64 / xs.len() as f64
    }

    /// Upper bound on the Lipschitz constant of the logit w.r.t. the input
    /// (Euclidean norm): `Σ_h |W2_h|·‖W1[:, h]‖₂`.
    pub fn lipschitz_bound(&self) -> f64 {
        (0..HIDDEN)
            .map(|h| abs(self.w2(h)) * sqrt(self.w1(0, h) * self.w1(0, h) + self.w1(1, h) * self.w1(1, h)))
            .sum()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + ln(1.0 + exp(-abs(z)))
}

/// How the per-sample losses are combined into the training objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum Reduction {
    #[default]
    Sum,
    Mean,
}

/// What the per-sample "effective update norm" measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum NormMode {
    /// `‖η·g_i ⊘ ((v̂ + ε_v)^p + ε)‖₂`.
    #[default]
    Preconditioned,
    /// `‖g_i‖₂`.
    PlainGradient,
}

/// Per-sample norms for the given per-sample gradients and preconditioner.
pub fn effective_update_norms(
    sample_grads: &[Vec<f64>],
    v_hat: &[f64],
    p: f64,
    cfg: &OptimConfig,
    mode: NormMode,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sample_grads.len());
    for g in sample_grads {
        if g.len() != v_hat.len() {
            return Err(Error::LengthMismatch {
                expected: v_hat.len(),
                got: g.len(),
            });
        }
        let sq: f64 = match mode {
            NormMode::Preconditioned => g
                .iter()
                .zip(v_hat)
                .map(|(gi, &v)| {
                    let u = cfg.eta * gi / cfg.denominator(v, p);
                    u * u
                })
                .sum(),
            NormMode::PlainGradient => g.iter().map(|gi| gi * gi).sum(),
        };
        out.push(sqrt(sq));
    }
    Ok(out)
}

/// Flags the top 30% of `norms` within each class, `⌈0.3·n_class⌉` samples
/// per class. Equal norms go to the lower index first.
pub fn top30_mask(norms: &[f64], labels: &[u8]) -> Result<Vec<bool>> {
    if norms.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            got: norms.len(),
        });
    }
    let mut mask = vec![false; norms.len()];
    for class in 0..2u8 {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let k = (3 * idx.len()).div_ceil(10);
        idx.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
        for &i in idx.iter().take(k) {
            mask[i] = true;
        }
    }
    Ok(mask)
}

/// Class map of the logit sign over a rectangular window. Row 0 is the top
/// (largest `x2`); cells are sampled at their centres.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Row-major, `height × width`, values 0 or 1.
    pub cells: Vec<u8>,
}

impl Raster {
    /// Window = dataset bounding box grown by `margin` of its extent on each
    /// side.
    pub fn window(ds: &AngleDataset, margin: f64) -> ((f64, f64), (f64, f64)) {
        let (lo, hi) = ds.bbox();
        let mx = margin * (hi[0] - lo[0]);
        let my = margin * (hi[1] - lo[1]);
        ((lo[0] - mx, hi[0] + mx), (lo[1] - my, hi[1] + my))
    }

    pub fn render(model: &Mlp, x_range: (f64, f64), y_range: (f64, f64), width: usize, height: usize) -> Self {
        let mut cells = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                cells.push(model.predict(Self::centre_of(x_range, y_range, width, height, r, c)));
            }
        }
        Self {
            width,
            height,
            x_range,
            y_range,
            cells,
        }
    }

    fn centre_of(x_range: (f64, f64), y_range: (f64, f64), w: usize, h: usize, r: usize, c: usize) -> [f64; 2] {
        let dx = (x_range.1 - x_range.0) / w as f64;
        let dy = (y_range.1 - y_range.0) / h as f64;
        [x_range.0 + (c as f64 + 0.5) * dx, y_range.1 - (r as f64 + 0.5) * dy]
    }

    pub fn centre(&self, row: usize, col: usize) -> [f64; 2] {
        Self::centre_of(self.x_range, self.y_range, self.width, self.height, row, col)
    }

    /// Half the diagonal of one cell.
    pub fn half_diagonal(&self) -> f64 {
        let dx = (self.x_range.1 - self.x_range.0) / self.width as f64;
        let dy = (self.y_range.1 - self.y_range.0) / self.height as f64;
        0.5 * sqrt(dx * dx + dy * dy)
    }

    /// Cell `(row, col)` containing `pt`, clamped to the window.
    pub fn cell_of(&self, pt: [f64; 2]) -> (usize, usize) {
        let fx = (pt[0] - self.x_range.0) / (self.x_range.1 - self.x_range.0);
        let fy = (self.y_range.1 - pt[1]) / (self.y_range.1 - self.y_range.0);
        let clamp = |f: f64, n: usize| ((f * n as f64) as isize).clamp(0, n as isize - 1) as usize;
        (clamp(fy, self.height), clamp(fx, self.width))
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.width + col]
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct BoundaryConfig {
    pub n_per_class: usize,
    pub geometry: AngleGeometry,
    pub optim: OptimConfig,
    pub schedule: PSchedule,
    pub n_iters: u64,
    pub checkpoints: Vec<u64>,
    pub reduction: Reduction,
    pub norm_mode: NormMode,
    pub raster_size: usize,
    /// Fraction of the data extent added on each side of the raster window.
    pub raster_margin: f64,
    pub target_accuracy: f64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            n_per_class: 100,
            geometry: AngleGeometry::default(),
            optim: OptimConfig {
                eta: 0.02,
                eps_v: 1e-12,
                ..OptimConfig::default()
            },
            schedule: PSchedule::default(),
            n_iters: 1000,
            checkpoints: vec![5, 20, 50, 100, 200, 500, 1000],
            reduction: Reduction::Sum,
            norm_mode: NormMode::Preconditioned,
            raster_size: 200,
            raster_margin: 0.1,
            target_accuracy: 0.95,
        }
    }
}

impl BoundaryConfig {
    pub fn with_p(p: f64) -> Self {
        Self {
            schedule: PSchedule::constant(p),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.optim.validate()?;
        self.schedule.validate()?;
        if self.n_per_class < 8 {
            return Err(Error::invalid("n_per_class must be at least 8"));
        }
        if self.n_iters == 0 {
            return Err(Error::invalid("n_iters must be positive"));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::invalid("at least one checkpoint is required"));
        }
        if self.checkpoints.iter().any(|&c| c > self.n_iters) {
            return Err(Error::invalid("checkpoints must not exceed n_iters"));
        }
        if self.raster_size == 0 {
            return Err(Error::invalid("raster_size must be positive"));
        }
        if !(self.raster_margin >= 0.0 && self.raster_margin.is_finite()) {
            return Err(Error::invalid("raster_margin must be nonnegative"));
        }
        if !(self.target_accuracy > 0.0 && self.target_accuracy <= 1.0) {
            return Err(Error::invalid("target_accuracy must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// State of a run after `iteration` optimizer steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub iteration: u64,
    pub accuracy: f64,
    /// Mean BCE, regardless of the training reduction.
    pub loss: f64,
    pub raster: Raster,
    pub update_norms: Vec<f64>,
    pub top_mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRun {
    /// `(iteration, train accuracy)` for every iteration `0..=n_iters`.
    pub accuracy_curve: Vec<(u64, f64)>,
    pub loss_curve: Vec<(u64, f64)>,
    pub checkpoints: Vec<Checkpoint>,
    /// First iteration with accuracy ≥ the target, if any.
    pub first_to_target: Option<u64>,
    pub model: Mlp,
}

/// Full-batch training from `Mlp::init(init_seed)`. The exponent at step `t`
/// (counting from 0) is `schedule.p_at(t)`.
pub fn train_boundary(ds: &AngleDataset, init_seed: u64, cfg: &BoundaryConfig) -> Result<BoundaryRun> {
    cfg.validate()?;
    if ds.is_empty() || ds.labels.len() != ds.len() {
        return Err(Error::invalid("dataset is empty or inconsistent"));
    }
    let mut model = Mlp::init(init_seed);
    let mut state = OptimState::new(N_PARAMS);
    let window = Raster::window(ds, cfg.raster_margin);
    let mut run = BoundaryRun {
        accuracy_curve: Vec::with_capacity(cfg.n_iters as usize + 1),
        loss_curve: Vec::with_capacity(cfg.n_iters as usize + 1),
        checkpoints: Vec::new(),
        first_to_target: None,
        model: Mlp::zeros(),
    };
    for it in 0..=cfg.n_iters {
        let (loss, grad) = model.loss_and_grad(&ds.points, &ds.labels, cfg.reduction)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { iteration: it });
        }
        let mean_loss = match cfg.reduction {
            Reduction::Mean => loss,
            Reduction::Sum => loss / ds.len() as f64,
        };
        let acc = model.accuracy(&ds.points, &ds.labels);
        run.accuracy_curve.push((it, acc));
        run.loss_curve.push((it, mean_loss));
        if run.first_to_target.is_none() && acc >= cfg.target_accuracy {
            run.first_to_target = Some(it);
        }
        let p = cfg.schedule.p_at(it as f64)?;
        if cfg.checkpoints.contains(&it) {
            let grads: Vec<Vec<f64>> = ds
                .points
                .iter()
                .zip(&ds.labels)
                .map(|(&x, &y)| model.sample_grad(x, y))
                .collect();
            let norms = effective_update_norms(&grads, &state.v_hat(&cfg.optim), p, &cfg.optim, cfg.norm_mode)?;
            let top_mask = top30_mask(&norms, &ds.labels)?;
            run.checkpoints.push(Checkpoint {
                iteration: it,
                accuracy: acc,
                loss: mean_loss,
                raster: Raster::render(&model, window.0, window.1, cfg.raster_size, cfg.raster_size),
                update_norms: norms,
                top_mask,
            });
        }
        if it == cfg.n_iters {
            break;
        }
        state.step(&mut model.params, &grad, &cfg.optim, p)?;
    }
    run.model = model;
    Ok(run)
}

/// Median of `first_to_target`, with runs that never reach the target counted
/// as `n_iters + 1`. Lower median for even counts.
pub fn median_iterations(runs: &[BoundaryRun], n_iters: u64) -> Option<u64> {
    if runs.is_empty() {
        return None;
    }
    let mut its: Vec<u64> = runs.iter().map(|r| r.first_to_target.unwrap_or(n_iters + 1)).collect();
    its.sort_unstable();
    Some(its[(its.len() - 1) / 2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_count() {
        assert_eq!(N_PARAMS, 81);
        assert_eq!(Mlp::init(0).params.len(), 81);
    }

    #[test]
    fn split_is_75_25() {
        let ds = gen_angle_dataset(3, 100, &AngleGeometry::default()).unwrap();
        for class in 0..2u8 {
            let far = (0..ds.len())
                .filter(|&i| ds.labels[i] == class && ds.branches[i] == Branch::Far)
                .count();
            let near = (0..ds.len())
                .filter(|&i| ds.labels[i] == class && ds.branches[i] == Branch::Near)
                .count();
            assert_eq!((far, near), (75, 25));
        }
        for n in 8..60 {
            let f = far_count(n) as f64;
            assert!((f - 0.75 * n as f64).abs() <= 0.5, "n={n}");
        }
    }

    #[test]
    fn zero_jitter_points_lie_on_their_arm() {
        let geom = AngleGeometry {
            jitter: 0.0,
            ..AngleGeometry::default()
        };
        let ds = gen_angle_dataset(1, 40, &geom).unwrap();
        for i in 0..ds.len() {
            let (v, d, len) = geom.arm(ds.labels[i], ds.branches[i]);
            let rel = [ds.points[i][0] - v[0], ds.points[i][1] - v[1]];
            let along = rel[0] * d[0] + rel[1] * d[1];
            let across = rel[0] * d[1] - rel[1] * d[0];
            assert!(across.abs() < 1e-12);
            assert!((-1e-12..=len + 1e-12).contains(&along));
        }
    }

    #[test]
    fn zero_model_loss_is_ln2() {
        let ds = gen_angle_dataset(0, 20, &AngleGeometry::default()).unwrap();
        let (loss, grad) = Mlp::zeros()
            .loss_and_grad(&ds.points, &ds.labels, Reduction::Mean)
            .unwrap();
        assert!((loss - core::f64::consts::LN_2).abs() < 1e-15);
        assert!(grad[B2].abs() < 1e-15);
        assert!(grad[..B2].iter().all(|g| *g == 0.0));
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0 && softplus(-1000.0) < 1e-300);
        assert!((sigmoid(-800.0)).is_finite());
    }

    #[test]
    fn identical_samples_mask_first_indices() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1];
        let mask = top30_mask(&[2.0; 12], &labels).unwrap();
        let flagged: Vec<usize> = (0..12).filter(|&i| mask[i]).collect();
        // ⌈1.5⌉ = 2 of class 0, ⌈2.1⌉ = 3 of class 1.
        assert_eq!(flagged, vec![0, 1, 5, 6, 7]);
    }

    #[test]
    fn mask_size_is_exact_ceiling() {
        for n in 1..=40usize {
            let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 3 == 0)).collect();
            let norms: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64).collect();
            let mask = top30_mask(&norms, &labels).unwrap();
            for class in 0..2u8 {
                let nc = labels.iter().filter(|&&l| l == class).count();
                let k = mask.iter().zip(&labels).filter(|(m, l)| **m && **l == class).count();
                assert_eq!(k, (3 * nc).div_ceil(10), "n={n} class={class}");
            }
        }
    }

    #[test]
    fn validate_rejects_bad_checkpoints() {
        let cfg = BoundaryConfig {
            checkpoints: vec![2000],
            ..BoundaryConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = BoundaryConfig {
            checkpoints: vec![],
            ..BoundaryConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
