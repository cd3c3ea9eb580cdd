//! Method-of-lines integration of the reduced flow in the `Θ` variable,
//! `∂_t Θ = Θ V' - Θ' V`, with `2V = F_t'/p_c + k₀ Θ - P/p_c`.
//!
//! `V` is evaluated in the balanced form `2V = w' + (p_c'/p_c + k₀) w`,
//! `w = Θ - Θ_∞`, which uses `Θ_∞' + (p_c'/p_c + k₀) Θ_∞ = P/p_c` and makes the
//! discrete profile an exact steady state.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::gqe::{GqeProfile, LogWeight, MomentumProfile};
use crate::numerics::{fd_weights, linspace};
use crate::stability::QFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid flow config: {field}: {message}")]
    InvalidConfig { field: &'static str, message: String },
    #[error("invalid initialization: {0}")]
    InvalidInitialization(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("positivity lost at node {node} (z = {z}, t = {t}): theta = {theta:e}")]
    PositivityLoss { node: usize, z: f64, t: f64, theta: f64 },
    #[error("decay rate undefined: {0}")]
    UndefinedRate(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FlowError {
    fn from(e: std::io::Error) -> Self {
        FlowError::Io(e.to_string())
    }
}

impl From<csv::Error> for FlowError {
    fn from(e: csv::Error) -> Self {
        FlowError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub n: usize,
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub tol_conv: f64,
    /// Flow time between recorded trajectory samples.
    pub output_interval: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            n: 200,
            cfl: 0.2,
            dt_max: 1e-2,
            t_end: 50.0,
            tol_conv: 1e-8,
            output_interval: 0.05,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |field: &'static str, message: String| Err(FlowError::InvalidConfig { field, message });
        if self.n < 16 || self.n % 2 != 0 {
            return bad("n", format!("n = {} must be even and at least 16", self.n));
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return bad("cfl", format!("cfl = {} must lie in (0, 0.5]", self.cfl));
        }
        if !(self.dt_max > 0.0) {
            return bad("dt_max", format!("dt_max = {} must be positive", self.dt_max));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end", format!("t_end = {} must be finite and non-negative", self.t_end));
        }
        if !(self.tol_conv > 0.0) {
            return bad("tol_conv", format!("tol_conv = {} must be positive", self.tol_conv));
        }
        if !(self.output_interval > 0.0) {
            return bad("output_interval", format!("output interval = {} must be positive", self.output_interval));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// `Θ₀ = 1 - z²`.
    Canonical,
    /// `Θ₀ = Θ_∞ (1 + a (1 - z²)^p)`, `p ≥ 1`.
    Perturbed { amplitude: f64, power: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub sup_phi: f64,
    /// `(∫ φ² p_c dz)^{1/2}` by the trapezoid rule.
    pub l2_phi: f64,
    pub min_theta: f64,
    /// `|Θ'(-1) - 2|` from a one-sided sixth-order stencil.
    pub bnd_err_m1: f64,
    /// `|Θ'(1) + 2|` from a one-sided sixth-order stencil.
    pub bnd_err_p1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub grid: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub time: f64,
    pub steps: u64,
    pub diagnostics: Diagnostics,
}

impl FlowState {
    pub fn n(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn dz(&self) -> f64 {
        2.0 / self.n() as f64
    }
}

/// Profile data sampled on a grid, shared by every step on that grid.
#[derive(Debug, Clone)]
pub struct FlowGrid {
    pub z: Vec<f64>,
    pub theta_inf: Vec<f64>,
    /// `p_c'/p_c + k₀` at the half nodes `z_{i+1/2}`.
    pub drift_half: Vec<f64>,
    /// Four-node windows giving values and first derivatives at the half
    /// nodes to fourth order.
    half_start: Vec<usize>,
    half_value: Vec<[f64; 4]>,
    half_slope: Vec<[f64; 4]>,
    pub p_c: Vec<f64>,
    weight: LogWeight,
    k0: f64,
    slope_m1: Vec<f64>,
    slope_p1: Vec<f64>,
}

impl FlowGrid {
    pub fn new(profile: &GqeProfile, n: usize) -> Self {
        let z = linspace(-1.0, 1.0, n);
        let weight = profile.log_weight().clone();
        let mut theta_inf: Vec<f64> = z.iter().map(|&t| profile.theta(t)).collect();
        theta_inf[0] = 0.0;
        theta_inf[n] = 0.0;
        let h = 2.0 / n as f64;
        let drift_half = z[..n]
            .iter()
            .map(|&t| weight.value(t + 0.5 * h) + profile.k0)
            .collect();
        let mut half_start = Vec::with_capacity(n);
        let mut half_value = Vec::with_capacity(n);
        let mut half_slope = Vec::with_capacity(n);
        for j in 0..n {
            let start = j.saturating_sub(1).min(n - 3);
            let nodes: Vec<f64> = (start..start + 4).map(|k| k as f64 - j as f64).collect();
            let value = fd_weights(0.5, &nodes, 0);
            let slope = fd_weights(0.5, &nodes, 1);
            half_start.push(start);
            half_value.push([value[0], value[1], value[2], value[3]]);
            half_slope.push([slope[0] / h, slope[1] / h, slope[2] / h, slope[3] / h]);
        }
        let offsets: Vec<f64> = (0..7).map(|j| j as f64).collect();
        let slope_m1 = fd_weights(0.0, &offsets, 1).into_iter().map(|w| w / h).collect();
        let slope_p1 = fd_weights(0.0, &offsets, 1).into_iter().map(|w| -w / h).collect();
        Self {
            p_c: z.iter().map(|&t| profile.p_c(t)).collect(),
            z,
            theta_inf,
            drift_half,
            half_start,
            half_value,
            half_slope,
            weight,
            k0: profile.k0,
            slope_m1,
            slope_p1,
        }
    }

    pub fn n(&self) -> usize {
        self.z.len() - 1
    }

    pub fn phi_of(&self, theta: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..=n)
            .map(|i| {
                if i == 0 || i == n {
                    0.0
                } else {
                    (theta[i] - self.theta_inf[i]) / self.theta_inf[i]
                }
            })
            .collect()
    }

    pub fn diagnostics(&self, theta: &[f64], phi: &[f64]) -> Diagnostics {
        let n = self.n();
        let h = 2.0 / n as f64;
        let sup_phi = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut l2 = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            l2 += w * phi[i] * phi[i] * self.p_c[i];
        }
        let min_theta = theta[1..n].iter().cloned().fold(f64::INFINITY, f64::min);
        let left: f64 = self.slope_m1.iter().zip(theta).map(|(w, v)| w * v).sum();
        let right: f64 = self
            .slope_p1
            .iter()
            .zip(theta.iter().rev())
            .map(|(w, v)| w * v)
            .sum();
        Diagnostics {
            sup_phi,
            l2_phi: (l2 * h).sqrt(),
            min_theta,
            bnd_err_m1: (left - 2.0).abs(),
            bnd_err_p1: (right + 2.0).abs(),
        }
    }

    pub fn state(&self, theta: Vec<f64>, time: f64, steps: u64) -> FlowState {
        let phi = self.phi_of(&theta);
        let diagnostics = self.diagnostics(&theta, &phi);
        FlowState { grid: self.z.clone(), theta, phi, time, steps, diagnostics }
    }

    /// `∂_t Θ = Θ² (V/Θ)'`: `V/Θ` at the half nodes to fourth order, then
    /// one compact difference. The truncation error carries the factor `Θ²`,
    /// so it vanishes at the ends and leaves the boundary slopes alone.
    fn rhs(&self, theta: &[f64], u: &mut [f64], out: &mut [f64]) {
        let n = self.n();
        let inv_h = n as f64 / 2.0;
        for j in 0..n {
            let s = self.half_start[j];
            let (cv, cd) = (&self.half_value[j], &self.half_slope[j]);
            let (mut w, mut dw, mut th) = (0.0, 0.0, 0.0);
            for k in 0..4 {
                let t = theta[s + k];
                let wk = t - self.theta_inf[s + k];
                w += cv[k] * wk;
                dw += cd[k] * wk;
                th += cv[k] * t;
            }
            u[j] = 0.5 * (dw + self.drift_half[j] * w) / th;
        }
        out[0] = 0.0;
        out[n] = 0.0;
        for i in 1..n {
            out[i] = theta[i] * theta[i] * (u[i] - u[i - 1]) * inv_h;
        }
    }

    /// `V` at every node, with high-order differences of `w = Θ - Θ_∞`.
    pub fn velocity(&self, theta: &[f64]) -> Vec<f64> {
        let n = self.n();
        let w: Vec<f64> = theta.iter().zip(&self.theta_inf).map(|(a, b)| a - b).collect();
        let dw = high_order_derivative(&w, 2.0 / n as f64, 1);
        (0..=n)
            .map(|i| {
                if i == 0 || i == n {
                    0.0
                } else {
                    0.5 * (dw[i] + self.weight.times_theta(w[i], dw[i], self.z[i]) + self.k0 * w[i])
                }
            })
            .collect()
    }

    /// `ΘV' - Θ'V` with high-order differences.
    pub fn theta_rate(&self, theta: &[f64]) -> Vec<f64> {
        let h = 2.0 / self.n() as f64;
        let v = self.velocity(theta);
        let dv = high_order_derivative(&v, h, 1);
        let dth = high_order_derivative(theta, h, 1);
        (0..theta.len()).map(|i| theta[i] * dv[i] - dth[i] * v[i]).collect()
    }
}

/// Derivative of order `m` of uniformly spaced samples: seven-point
/// stencils for `m = 1` and eight-point stencils for `m = 2`, shifted
/// inward near the ends.
pub fn high_order_derivative(values: &[f64], h: f64, m: usize) -> Vec<f64> {
    let n = values.len();
    let width = if m == 1 { 7 } else { 8 };
    let half = width / 2;
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - width);
            let offsets: Vec<f64> = (start..start + width).map(|j| j as f64 - i as f64).collect();
            let w = fd_weights(0.0, &offsets, m);
            w.iter().zip(&values[start..start + width]).map(|(a, b)| a * b).sum::<f64>() / h.powi(m as i32)
        })
        .collect()
}

pub fn init_state(
    profile: &GqeProfile,
    initial: InitialData,
    config: &FlowConfig,
) -> Result<(FlowGrid, FlowState), FlowError> {
    config.validate()?;
    let grid = FlowGrid::new(profile, config.n);
    let n = config.n;
    let theta: Vec<f64> = match initial {
        InitialData::Canonical => grid.z.iter().map(|z| 1.0 - z * z).collect(),
        InitialData::Perturbed { amplitude, power } => {
            if !(power >= 1.0) {
                return Err(FlowError::InvalidInitialization(format!(
                    "power = {power} must be at least 1"
                )));
            }
            grid.z
                .iter()
                .zip(&grid.theta_inf)
                .map(|(z, t)| t * (1.0 + amplitude * (1.0 - z * z).powf(power)))
                .collect()
        }
    };
    let mut theta = theta;
    theta[0] = 0.0;
    theta[n] = 0.0;
    if let Some(i) = (1..n).find(|&i| !(theta[i] > 0.0)) {
        return Err(FlowError::InvalidInitialization(format!(
            "initial theta = {} <= 0 at z = {}",
            theta[i], grid.z[i]
        )));
    }
    let state = grid.state(theta, 0.0, 0);
    Ok((grid, state))
}

/// Explicit RK4 integrator with reusable buffers.
pub struct Stepper<'g> {
    grid: &'g FlowGrid,
    cfl: f64,
    dt_max: f64,
    v: Vec<f64>,
    stage: Vec<f64>,
    k: [Vec<f64>; 4],
}

impl<'g> Stepper<'g> {
    pub fn new(grid: &'g FlowGrid, config: &FlowConfig) -> Self {
        let len = grid.n() + 1;
        Self {
            grid,
            cfl: config.cfl,
            dt_max: config.dt_max,
            v: vec![0.0; len - 1],
            stage: vec![0.0; len],
            k: [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]],
        }
    }

    /// `min(dt_max, cfl Δz² / max Θ)`.
    pub fn dt(&self, theta: &[f64]) -> f64 {
        let h = 2.0 / self.grid.n() as f64;
        let max_theta = theta.iter().cloned().fold(0.0, f64::max);
        self.dt_max.min(self.cfl * h * h / max_theta)
    }

    /// Advances `theta` in place by `dt`, leaving the end values at 0.
    pub fn advance(&mut self, theta: &mut [f64], dt: f64) {
        let g = self.grid;
        let [k1, k2, k3, k4] = &mut self.k;
        g.rhs(theta, &mut self.v, k1);
        for i in 0..theta.len() {
            self.stage[i] = theta[i] + 0.5 * dt * k1[i];
        }
        g.rhs(&self.stage, &mut self.v, k2);
        for i in 0..theta.len() {
            self.stage[i] = theta[i] + 0.5 * dt * k2[i];
        }
        g.rhs(&self.stage, &mut self.v, k3);
        for i in 0..theta.len() {
            self.stage[i] = theta[i] + dt * k3[i];
        }
        g.rhs(&self.stage, &mut self.v, k4);
        for i in 0..theta.len() {
            theta[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

fn positivity(grid: &FlowGrid, theta: &[f64], t: f64) -> Result<(), FlowError> {
    let n = grid.n();
    match (1..n).find(|&i| !(theta[i] > 0.0)) {
        Some(node) => Err(FlowError::PositivityLoss { node, z: grid.z[node], t, theta: theta[node] }),
        None => Ok(()),
    }
}

/// One RK4 step of size `min(dt_max, cfl Δz²/max Θ)`.
pub fn step(grid: &FlowGrid, state: &FlowState, config: &FlowConfig) -> Result<FlowState, FlowError> {
    let mut stepper = Stepper::new(grid, config);
    let mut theta = state.theta.clone();
    let dt = stepper.dt(&theta);
    stepper.advance(&mut theta, dt);
    positivity(grid, &theta, state.time + dt)?;
    Ok(grid.state(theta, state.time + dt, state.steps + 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub final_state: FlowState,
    pub converged: bool,
    /// Largest boundary-slope error over every step.
    pub max_bnd_err: f64,
    /// Smallest interior `Θ` over every step.
    pub min_theta: f64,
}

/// Steps until `sup|φ| < tol_conv` or `t ≥ t_end`.
pub fn run(grid: &FlowGrid, state: FlowState, config: &FlowConfig) -> Result<Trajectory, FlowError> {
    run_with(grid, state, config, |_| {})
}

/// As [`run`], calling `inspect` on the state after every step.
pub fn run_with<F: FnMut(&FlowState)>(
    grid: &FlowGrid,
    state: FlowState,
    config: &FlowConfig,
    mut inspect: F,
) -> Result<Trajectory, FlowError> {
    config.validate()?;
    let mut stepper = Stepper::new(grid, config);
    let mut theta = state.theta.clone();
    let mut t = state.time;
    let mut steps = state.steps;
    let mut current = state;
    let d0 = &current.diagnostics;
    let mut max_bnd_err = d0.bnd_err_m1.max(d0.bnd_err_p1);
    let mut min_theta = d0.min_theta;
    let mut samples = vec![TrajectorySample { t, diagnostics: d0.clone() }];
    let mut next_output = t + config.output_interval;
    let mut converged = d0.sup_phi < config.tol_conv;
    while !converged && t < config.t_end {
        let dt = stepper.dt(&theta).min(config.t_end - t);
        stepper.advance(&mut theta, dt);
        t += dt;
        steps += 1;
        positivity(grid, &theta, t)?;
        current = grid.state(theta.clone(), t, steps);
        let d = &current.diagnostics;
        max_bnd_err = max_bnd_err.max(d.bnd_err_m1).max(d.bnd_err_p1);
        min_theta = min_theta.min(d.min_theta);
        converged = d.sup_phi < config.tol_conv;
        inspect(&current);
        if t >= next_output || converged || t >= config.t_end {
            samples.push(TrajectorySample { t, diagnostics: d.clone() });
            while next_output <= t {
                next_output += config.output_interval;
            }
        }
    }
    Ok(Trajectory { samples, final_state: current, converged, max_bnd_err, min_theta })
}

/// Integrates to exactly `t_end`, ignoring convergence.
pub fn evolve_to(grid: &FlowGrid, state: &FlowState, config: &FlowConfig, t_end: f64) -> Result<FlowState, FlowError> {
    let mut stepper = Stepper::new(grid, config);
    let mut theta = state.theta.clone();
    let mut t = state.time;
    let mut steps = state.steps;
    while t < t_end {
        let dt = stepper.dt(&theta).min(t_end - t);
        stepper.advance(&mut theta, dt);
        t += dt;
        steps += 1;
    }
    positivity(grid, &theta, t)?;
    Ok(grid.state(theta, t, steps))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub r_squared: f64,
}

/// Least-squares slope of `ln sup|φ|` against `t` over the last half of
/// the samples.
pub fn decay_fit(samples: &[(f64, f64)]) -> Result<DecayFit, FlowError> {
    if samples.len() < 10 {
        return Err(FlowError::UndefinedRate(format!(
            "{} samples, need at least 10",
            samples.len()
        )));
    }
    let tail = &samples[samples.len() / 2..];
    if tail.iter().any(|(_, s)| !(*s > 0.0)) {
        return Err(FlowError::UndefinedRate("tail contains zero amplitudes".to_string()));
    }
    let pts: Vec<(f64, f64)> = tail.iter().map(|(t, s)| (*t, s.ln())).collect();
    let m = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FlowError::UndefinedRate("all samples at one time".to_string()));
    }
    let rate = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(DecayFit { rate, r_squared })
}

pub fn trajectory_decay_fit(traj: &Trajectory) -> Result<DecayFit, FlowError> {
    let pts: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.t, s.diagnostics.sup_phi)).collect();
    decay_fit(&pts)
}

/// `Θ_∞Θφ'' - (Θ_∞φ')² + (P/p_c)Θ_∞φ' + Q(1+φ)φ`, which equals `2Θ_∞ ∂_tφ`,
/// at every node, with high-order differences of `φ`.
pub fn phi_form_rhs(grid: &FlowGrid, profile: &GqeProfile, q: &QFunction<'_>, state: &FlowState) -> Vec<f64> {
    let h = state.dz();
    let d1 = high_order_derivative(&state.phi, h, 1);
    let d2 = high_order_derivative(&state.phi, h, 2);
    (0..state.phi.len())
        .map(|i| {
            let z = grid.z[i];
            let ti = grid.theta_inf[i];
            let phi = state.phi[i];
            ti * state.theta[i] * d2[i] - (ti * d1[i]).powi(2)
                + profile.p_over_pc(z) * ti * d1[i]
                + q.eval(z) * (1.0 + phi) * phi
        })
        .collect()
}

/// Sampled symplectic potential `u` with `y = u'` and `h = -u + yz`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticPotential {
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub h: Vec<f64>,
    /// `u''` as `1/Θ_c` plus the discrete second difference of `u - u_c`.
    pub u_d2: Vec<f64>,
}

pub fn canonical_u(z: f64) -> f64 {
    let xlogx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    0.5 * (xlogx(1.0 - z) + xlogx(1.0 + z) - 2.0 * std::f64::consts::LN_2)
}

pub fn canonical_y(z: f64) -> f64 {
    0.5 * ((1.0 + z) / (1.0 - z)).ln()
}

pub fn canonical_u_d2(z: f64) -> f64 {
    1.0 / (1.0 - z * z)
}

pub fn canonical_potential(n: usize) -> SymplecticPotential {
    let z = linspace(-1.0, 1.0, n);
    let u: Vec<f64> = z.iter().map(|&t| canonical_u(t)).collect();
    let y: Vec<f64> = z.iter().map(|&t| canonical_y(t)).collect();
    let h = z.iter().zip(&u).zip(&y).map(|((t, u), y)| -u + y * t).collect();
    let u_d2 = z.iter().map(|&t| canonical_u_d2(t)).collect();
    SymplecticPotential { z, u, y, h, u_d2 }
}

/// `u = u_c + v` with `v(±1) = 0` and discrete `v'' = 1/Θ - 1/Θ_c` at
/// interior nodes; `θ` holds samples on a uniform grid over `[-1, 1]`.
pub fn potential_from_theta(theta: &[f64]) -> Result<SymplecticPotential, FlowError> {
    let n = theta.len() - 1;
    if n < 2 {
        return Err(FlowError::InvalidProfile("need at least three samples".to_string()));
    }
    if let Some(i) = (1..n).find(|&i| !(theta[i] > 0.0)) {
        return Err(FlowError::InvalidProfile(format!("theta[{i}] = {} <= 0", theta[i])));
    }
    let z = linspace(-1.0, 1.0, n);
    let h = 2.0 / n as f64;
    let g: Vec<f64> = (0..=n)
        .map(|i| if i == 0 || i == n { 0.0 } else { 1.0 / theta[i] - canonical_u_d2(z[i]) })
        .collect();
    // v_{i+1} - 2v_i + v_{i-1} = h² g_i with v_0 = v_n = 0: take v_1 = c, march,
    // and fix c from v_n = 0 by linearity.
    let march = |c: f64| {
        let mut v = vec![0.0; n + 1];
        v[1] = c;
        for i in 1..n {
            v[i + 1] = 2.0 * v[i] - v[i - 1] + h * h * g[i];
        }
        v
    };
    let v0 = march(0.0);
    let v1 = march(1.0);
    let c = -v0[n] / (v1[n] - v0[n]);
    let mut v = march(c);
    v[n] = 0.0;
    let dv = high_order_derivative(&v, h, 1);
    let u: Vec<f64> = (0..=n).map(|i| canonical_u(z[i]) + v[i]).collect();
    let y: Vec<f64> = (0..=n).map(|i| canonical_y(z[i]) + dv[i]).collect();
    let hh = (0..=n).map(|i| -u[i] + y[i] * z[i]).collect();
    let u_d2 = (0..=n)
        .map(|i| {
            if i == 0 || i == n {
                f64::INFINITY
            } else {
                canonical_u_d2(z[i]) + (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h)
            }
        })
        .collect();
    Ok(SymplecticPotential { z, u, y, h: hh, u_d2 })
}

/// `max |u'' Θ - 1|` over interior nodes.
pub fn potential_residual(pot: &SymplecticPotential, theta: &[f64]) -> f64 {
    let n = theta.len() - 1;
    (1..n).map(|i| (pot.u_d2[i] * theta[i] - 1.0).abs()).fold(0.0, f64::max)
}

pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "sup_phi", "l2_phi", "min_theta", "bnd_err_m1", "bnd_err_p1"];
pub const SNAPSHOT_HEADER: [&str; 4] = ["z", "theta", "phi", "V"];

pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> Result<(), FlowError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for s in &traj.samples {
        let d = &s.diagnostics;
        w.write_record(
            [s.t, d.sup_phi, d.l2_phi, d.min_theta, d.bnd_err_m1, d.bnd_err_p1].map(|v| v.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshot_csv<W: Write>(out: W, grid: &FlowGrid, state: &FlowState) -> Result<(), FlowError> {
    let v = grid.velocity(&state.theta);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SNAPSHOT_HEADER)?;
    for i in 0..state.grid.len() {
        w.write_record([state.grid[i], state.theta[i], state.phi[i], v[i]].map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_file(path: &Path, traj: &Trajectory) -> Result<(), FlowError> {
    write_trajectory_csv(std::fs::File::create(path)?, traj)
}

pub fn write_snapshot_file(path: &Path, grid: &FlowGrid, state: &FlowState) -> Result<(), FlowError> {
    write_snapshot_csv(std::fs::File::create(path)?, grid, state)
}
