//! The Maschler–Tønnesen obstruction `MT(k)`, its zero `k₀`, and the GQE
//! momentum profile `F = e^{-k₀z} ∫_{-1}^z P(t) e^{k₀t} dt`, `Θ_∞ = F / p_c`.

use std::f64::consts::PI;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::admissible::{
    fano_residual, single_root_check, AdmissibleData, AdmissibleError, FanoParameters,
    InvariantBundle,
};
use crate::numerics::{central_derivative6, richardson_limit};
use crate::polycalc::{rat_int, rat_to_f64, FloatPoly, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GqeError {
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("no GQE profile: {0}")]
    NoGqeProfile(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Admissible(#[from] AdmissibleError),
}

/// `MT(k) = ∫_{-1}^{1} P(t) e^{kt} dt`.
pub fn mt(inv: &InvariantBundle, k: f64) -> f64 {
    inv.p.to_float().exp_weighted_integral(k, -1.0, 1.0)
}

/// Largest `|k|` the bracket search may reach.
pub const K_CAP: f64 = 500.0;

/// Unique zero of `MT`, assuming `P` has exactly one root in `(-1, 1)`.
pub fn solve_k0(inv: &InvariantBundle) -> Result<f64, GqeError> {
    let roots = single_root_check(inv)?;
    if !roots.holds() {
        return Err(GqeError::HypothesisNotMet(format!(
            "P has {} roots in (-1, 1), need exactly one",
            roots.brackets.len()
        )));
    }
    let p = inv.p.to_float();
    let f = |k: f64| p.exp_weighted_integral(k, -1.0, 1.0);
    let f0 = f(0.0);
    if f0 == 0.0 {
        return Ok(0.0);
    }
    // MT > 0 as k -> -inf and MT < 0 as k -> +inf.
    let mut width = 1.0;
    let (mut lo, mut hi) = if f0 > 0.0 { (0.0, width) } else { (-width, 0.0) };
    loop {
        let (flo, fhi) = (f(lo), f(hi));
        if flo >= 0.0 && fhi <= 0.0 {
            break;
        }
        width *= 2.0;
        if width > K_CAP {
            return Err(GqeError::NumericFailure(format!(
                "no sign change of MT within [-{K_CAP}, {K_CAP}]"
            )));
        }
        if f0 > 0.0 {
            hi = width;
        } else {
            lo = -width;
        }
    }
    Ok(bracketed_zero(f, lo, hi))
}

/// Zero of a decreasing-through-zero `f` on `[lo, hi]` with `f(lo) >= 0 >= f(hi)`,
/// alternating secant and bisection steps until the bracket collapses.
fn bracketed_zero<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    for iter in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let secant = hi - fhi * (hi - lo) / (fhi - flo);
        let cand = if iter % 2 == 0 && secant > lo && secant < hi {
            secant
        } else {
            mid
        };
        let fc = f(cand);
        if fc == 0.0 {
            return cand;
        }
        if fc > 0.0 {
            lo = cand;
            flo = fc;
        } else {
            hi = cand;
            fhi = fc;
        }
    }
    if flo.abs() <= fhi.abs() {
        lo
    } else {
        hi
    }
}

/// A momentum profile `Θ` on `[-1, 1]` with its first two derivatives.
pub trait MomentumProfile {
    fn theta(&self, z: f64) -> f64;
    fn theta_d1(&self, z: f64) -> f64;
    fn theta_d2(&self, z: f64) -> f64;
}

/// The canonical profile `Θ_c = 1 - z²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CanonicalProfile;

impl MomentumProfile for CanonicalProfile {
    fn theta(&self, z: f64) -> f64 {
        1.0 - z * z
    }
    fn theta_d1(&self, z: f64) -> f64 {
        -2.0 * z
    }
    fn theta_d2(&self, _z: f64) -> f64 {
        -2.0
    }
}

/// `p_c'/p_c = Σ x_a d_a / (1 + x_a z)` split into its smooth base part and
/// the two fiber poles, so that `Θ · p_c'/p_c` has exact endpoint limits.
#[derive(Debug, Clone)]
pub struct LogWeight {
    base: Vec<(f64, f64)>,
    d0: f64,
    dinf: f64,
}

impl LogWeight {
    pub fn new(data: &AdmissibleData) -> Self {
        Self {
            base: data
                .base_factors
                .iter()
                .map(|f| (rat_to_f64(&f.x), f.d as f64))
                .collect(),
            d0: data.d0 as f64,
            dinf: data.dinf as f64,
        }
    }

    fn base_part(&self, z: f64) -> f64 {
        self.base.iter().map(|(x, d)| x * d / (1.0 + x * z)).sum()
    }

    /// `p_c'(z)/p_c(z)` for `z` in the open interval.
    pub fn value(&self, z: f64) -> f64 {
        self.base_part(z) + self.d0 / (1.0 + z) - self.dinf / (1.0 - z)
    }

    /// `Θ(z) · p_c'(z)/p_c(z)`, using `Θ(±1) = 0` and l'Hôpital at the ends.
    pub fn times_theta(&self, theta: f64, theta_d1: f64, z: f64) -> f64 {
        let left = if z <= -1.0 { theta_d1 } else { theta / (1.0 + z) };
        let right = if z >= 1.0 { -theta_d1 } else { theta / (1.0 - z) };
        theta * self.base_part(z) + self.d0 * left - self.dinf * right
    }

    /// Minimum distance from `±1` to a pole `-1/x_a` of a base factor.
    pub fn pole_clearance(&self) -> f64 {
        self.base
            .iter()
            .map(|(x, _)| {
                let pole = -1.0 / x;
                (pole - 1.0).abs().min((pole + 1.0).abs())
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Power series of `Θ_∞` about an endpoint, in `σ = z - end`.
#[derive(Debug, Clone)]
struct EndpointSeries {
    end: f64,
    radius: f64,
    coeffs: Vec<f64>,
}

const SERIES_TERMS: usize = 28;

impl EndpointSeries {
    /// Integrates `P e^{kt}` from the endpoint, so the leading `d_e + 1`
    /// orders of `F` vanish exactly; the `d_e` of them shared with `p_c` cancel.
    fn new(inv: &InvariantBundle, k: f64, end: i64, order: usize, radius: f64) -> Self {
        let n = SERIES_TERMS + order + 2;
        let shifted_p = to_series(&inv.p.shift(&rat_int(end)), n);
        let shifted_pc = to_series(&inv.p_c.shift(&rat_int(end)), n);
        let exp_pos = exp_series(k, n);
        let exp_neg = exp_series(-k, n);
        let integrand = series_mul(&shifted_p, &exp_pos, n);
        let mut integral = vec![0.0; n];
        for i in 0..n - 1 {
            integral[i + 1] = integrand[i] / (i as f64 + 1.0);
        }
        let f = series_mul(&integral, &exp_neg, n);
        let num = &f[order..];
        let den = &shifted_pc[order..];
        let coeffs = series_div(num, den, SERIES_TERMS);
        Self { end: end as f64, radius, coeffs }
    }

    fn contains(&self, z: f64) -> bool {
        (z - self.end).abs() < self.radius
    }

    fn eval(&self, z: f64) -> (f64, f64, f64) {
        let s = z - self.end;
        let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            let fi = i as f64;
            v = v * s + c;
            if i >= 1 {
                d1 = d1 * s + c * fi;
            }
            if i >= 2 {
                d2 = d2 * s + c * fi * (fi - 1.0);
            }
        }
        (v, d1, d2)
    }
}

fn to_series(p: &Polynomial, n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = p.coeffs().iter().map(rat_to_f64).collect();
    out.resize(n.max(out.len()), 0.0);
    out.truncate(n);
    out
}

fn exp_series(k: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 1.0;
    for j in 0..n {
        if j > 0 {
            c *= k / j as f64;
        }
        out.push(c);
    }
    out
}

fn series_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (0..=i).filter(|&j| j < a.len() && i - j < b.len()).map(|j| a[j] * b[i - j]).sum())
        .collect()
}

fn series_div(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut q = vec![0.0; n];
    for i in 0..n {
        let mut acc = a.get(i).copied().unwrap_or(0.0);
        for j in 1..=i {
            acc -= b.get(j).copied().unwrap_or(0.0) * q[i - j];
        }
        q[i] = acc / b[0];
    }
    q
}

/// Width of the endpoint windows where `Θ_∞` switches to the series form.
pub const DEFLATED_WINDOW: f64 = 1e-2;

/// The self-similar target `Θ_∞` of the flow, for a given slope `k`.
#[derive(Debug, Clone)]
pub struct GqeProfile {
    pub k0: f64,
    pub mt_residual: f64,
    pub data: AdmissibleData,
    p: FloatPoly,
    dp: FloatPoly,
    pc: FloatPoly,
    dpc: FloatPoly,
    d2pc: FloatPoly,
    p_deflated: FloatPoly,
    base_denominator: FloatPoly,
    weight: LogWeight,
    left: EndpointSeries,
    right: EndpointSeries,
}

impl GqeProfile {
    /// `F` from the integral form; anchored at `+1` on the right half via
    /// `∫_{-1}^z = MT(k) - ∫_z^1`, which is the same function.
    pub fn f(&self, z: f64) -> f64 {
        let k = self.k0;
        let integral = if z <= 0.0 {
            self.p.exp_weighted_integral(k, -1.0, z)
        } else {
            self.mt_residual - self.p.exp_weighted_integral(k, z, 1.0)
        };
        (-k * z).exp() * integral
    }

    /// `F' = P - k₀ F`.
    pub fn f_d1(&self, z: f64) -> f64 {
        self.p.eval(z) - self.k0 * self.f(z)
    }

    /// `F'' = P' - k₀ F'`.
    pub fn f_d2(&self, z: f64) -> f64 {
        self.dp.eval(z) - self.k0 * self.f_d1(z)
    }

    pub fn p_c(&self, z: f64) -> f64 {
        self.pc.eval(z)
    }

    pub fn p(&self, z: f64) -> f64 {
        self.p.eval(z)
    }

    /// `P/p_c` through the deflated quotient, smooth on `[-1, 1]`.
    pub fn p_over_pc(&self, z: f64) -> f64 {
        self.p_deflated.eval(z) / self.base_denominator.eval(z)
    }

    pub fn p_over_pc_d1(&self, z: f64) -> f64 {
        let (n, d) = (self.p_deflated.eval(z), self.base_denominator.eval(z));
        let (dn, dd) = (
            self.p_deflated.derivative().eval(z),
            self.base_denominator.derivative().eval(z),
        );
        (dn * d - n * dd) / (d * d)
    }

    /// `F/p_c` without any endpoint treatment.
    pub fn theta_naive(&self, z: f64) -> f64 {
        self.f(z) / self.pc.eval(z)
    }

    pub fn log_weight(&self) -> &LogWeight {
        &self.weight
    }

    fn series_for(&self, z: f64) -> Option<&EndpointSeries> {
        if self.left.contains(z) {
            Some(&self.left)
        } else if self.right.contains(z) {
            Some(&self.right)
        } else {
            None
        }
    }
}

impl MomentumProfile for GqeProfile {
    fn theta(&self, z: f64) -> f64 {
        match self.series_for(z) {
            Some(s) => s.eval(z).0,
            None => self.theta_naive(z),
        }
    }

    fn theta_d1(&self, z: f64) -> f64 {
        match self.series_for(z) {
            Some(s) => s.eval(z).1,
            None => {
                let pc = self.pc.eval(z);
                (self.f_d1(z) - self.theta_naive(z) * self.dpc.eval(z)) / pc
            }
        }
    }

    fn theta_d2(&self, z: f64) -> f64 {
        match self.series_for(z) {
            Some(s) => s.eval(z).2,
            None => {
                let pc = self.pc.eval(z);
                let th = self.theta_naive(z);
                let th1 = (self.f_d1(z) - th * self.dpc.eval(z)) / pc;
                (self.f_d2(z) - 2.0 * th1 * self.dpc.eval(z) - th * self.d2pc.eval(z)) / pc
            }
        }
    }
}

/// Number of interior samples used by the positivity screen in
/// [`build_profile`].
const POSITIVITY_SAMPLES: usize = 2000;

/// Builds the profile for `k0` and screens `Θ_∞ > 0` on interior samples.
pub fn build_profile(inv: &InvariantBundle, k0: f64) -> Result<GqeProfile, GqeError> {
    let profile = assemble_profile(inv, k0);
    for i in 1..POSITIVITY_SAMPLES {
        let z = -1.0 + 2.0 * i as f64 / POSITIVITY_SAMPLES as f64;
        let th = profile.theta(z);
        if !(th > 0.0) {
            return Err(GqeError::NoGqeProfile(format!(
                "F/p_c = {th:e} <= 0 at z = {z}"
            )));
        }
    }
    Ok(profile)
}

/// `MT(k)`, or zero when it is below the rounding bound of its evaluation.
fn resolved_mt(inv: &InvariantBundle, k: f64) -> f64 {
    let value = mt(inv, k);
    let abs_coeffs: f64 = inv.p.to_float().coeffs().iter().map(|c| c.abs()).sum();
    let weight = if k == 0.0 { 2.0 } else { 2.0 * k.sinh() / k };
    if value.abs() <= 64.0 * f64::EPSILON * abs_coeffs * weight {
        0.0
    } else {
        value
    }
}

/// Builds the profile for any slope `k` without screening it.
pub fn assemble_profile(inv: &InvariantBundle, k0: f64) -> GqeProfile {
    let weight = LogWeight::new(&inv.data);
    let radius = DEFLATED_WINDOW.min(weight.pole_clearance() / 4.0);
    GqeProfile {
        k0,
        mt_residual: resolved_mt(inv, k0),
        data: inv.data.clone(),
        p: inv.p.to_float(),
        dp: inv.p.derivative().to_float(),
        pc: inv.p_c.to_float(),
        dpc: inv.p_c.derivative().to_float(),
        d2pc: inv.p_c.nth_derivative(2).to_float(),
        p_deflated: inv.p_deflated.to_float(),
        base_denominator: inv.base_denominator.to_float(),
        weight,
        left: EndpointSeries::new(inv, k0, -1, inv.data.d0 as usize, radius),
        right: EndpointSeries::new(inv, k0, 1, inv.data.dinf as usize, radius),
    }
}

/// Solves for `k₀` and builds the profile.
pub fn gqe_profile(inv: &InvariantBundle) -> Result<GqeProfile, GqeError> {
    let k0 = solve_k0(inv)?;
    build_profile(inv, k0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `|value| <= tolerance`.
    pub fn within(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
            passed: value.abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReport {
    pub checks: Vec<Check>,
    pub min_f_interior: f64,
}

impl ProfileReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const ENDPOINT_TOL: f64 = 1e-8;
pub const ODE_TOL: f64 = 1e-10;
pub const VERIFY_GRID: usize = 10_000;

/// Numerical audit of the profile conditions; failures are reported, not
/// raised.
pub fn verify_profile(profile: &GqeProfile) -> ProfileReport {
    let scale_m = profile.p_c(-1.0).abs().max(1.0);
    let scale_p = profile.p_c(1.0).abs().max(1.0);
    let mut checks = vec![
        Check::within("F(-1)", profile.f(-1.0), ENDPOINT_TOL * scale_m),
        Check::within("F(1)", profile.f(1.0), ENDPOINT_TOL * scale_p),
        Check::within(
            "F'(-1) - 2 p_c(-1)",
            profile.f_d1(-1.0) - 2.0 * profile.p_c(-1.0),
            ENDPOINT_TOL * scale_m,
        ),
        Check::within(
            "F'(1) + 2 p_c(1)",
            profile.f_d1(1.0) + 2.0 * profile.p_c(1.0),
            ENDPOINT_TOL * scale_p,
        ),
        Check::within("Theta(-1)", profile.theta(-1.0), ENDPOINT_TOL),
        Check::within("Theta(1)", profile.theta(1.0), ENDPOINT_TOL),
        Check::within("Theta'(-1) - 2", profile.theta_d1(-1.0) - 2.0, ENDPOINT_TOL),
        Check::within("Theta'(1) + 2", profile.theta_d1(1.0) + 2.0, ENDPOINT_TOL),
    ];

    let mut min_f = f64::INFINITY;
    for i in 1..VERIFY_GRID {
        let z = -1.0 + 2.0 * i as f64 / VERIFY_GRID as f64;
        min_f = min_f.min(profile.f(z));
    }
    checks.push(Check {
        name: "F > 0 interior".to_string(),
        value: min_f,
        tolerance: 0.0,
        passed: min_f > 0.0,
    });

    // F' by finite differences, independent of the identity F' = P - k₀F.
    let h = 5e-3;
    let mut residual: f64 = 0.0;
    let mut max_p: f64 = 0.0;
    for i in 0..=2000 {
        let z = -1.0 + 2.0 * i as f64 / 2000.0;
        let df = central_derivative6(|t| profile.f(t), z, h);
        let p = profile.p(z);
        max_p = max_p.max(p.abs());
        residual = residual.max((df + profile.k0 * profile.f(z) - p).abs());
    }
    checks.push(Check::within(
        "sup|F' + k0 F - P|",
        residual,
        ODE_TOL * max_p.max(1.0),
    ));
    ProfileReport { checks, min_f_interior: min_f }
}

/// `Δ S = -[S' F]' / (2 p_c) = -(S'' Θ + S' (Θ' + Θ p_c'/p_c)) / 2`.
///
/// `s` returns `(S', S'')` at `z`.
pub fn laplacian_of<'a, M, S>(
    profile: &'a M,
    weight: &'a LogWeight,
    s: S,
) -> impl Fn(f64) -> f64 + 'a
where
    M: MomentumProfile + ?Sized,
    S: Fn(f64) -> (f64, f64) + 'a,
{
    move |z| {
        let (d1, d2) = s(z);
        let th = profile.theta(z);
        let th1 = profile.theta_d1(z);
        let f_over_pc = th1 + weight.times_theta(th, th1, z);
        -(d2 * th + d1 * f_over_pc) / 2.0
    }
}

/// Scalar curvature of the metric with momentum profile `Θ`.
pub struct ScalarCurvature<'a, M: MomentumProfile + ?Sized> {
    profile: &'a M,
    weight: LogWeight,
    factors: Vec<(f64, f64, f64)>,
    pub mean: f64,
}

impl<'a, M: MomentumProfile + ?Sized> ScalarCurvature<'a, M> {
    fn interior(&self, z: f64) -> f64 {
        let th = self.profile.theta(z);
        let th1 = self.profile.theta_d1(z);
        let th2 = self.profile.theta_d2(z);
        let l = self.weight.value(z);
        let sum_dl: f64 = self
            .factors
            .iter()
            .map(|(_, x, d)| -x * x * d / ((1.0 + x * z) * (1.0 + x * z)))
            .sum();
        // p_c''/p_c = (p_c'/p_c)' + (p_c'/p_c)²
        let f2_over_pc = th2 + 2.0 * th1 * l + th * (sum_dl + l * l);
        let curv: f64 = self
            .factors
            .iter()
            .map(|(ds, x, _)| 2.0 * ds * x / (1.0 + x * z))
            .sum();
        0.5 * (curv - f2_over_pc)
    }

    pub fn eval(&self, z: f64) -> f64 {
        if z <= -1.0 || z >= 1.0 {
            richardson_limit(|t| self.interior(t), z.signum(), 1e-3)
        } else {
            self.interior(z)
        }
    }
}

pub fn scalar_curvature<'a, M: MomentumProfile + ?Sized>(
    profile: &'a M,
    inv: &InvariantBundle,
) -> ScalarCurvature<'a, M> {
    let factors = inv
        .data
        .all_factors()
        .into_iter()
        .map(|(d, s, x)| {
            let ds = rat_to_f64(&(rat_int(d as i64) * s));
            (ds, rat_to_f64(&x), d as f64)
        })
        .collect();
    ScalarCurvature {
        profile,
        weight: LogWeight::new(&inv.data),
        factors,
        mean: rat_to_f64(&inv.mean_scalar_curvature()),
    }
}

/// The reduced Tian–Zhu invariant `-2π λ^m e^{-kC/2λ} vol_S MT(k)`,
/// defined only for (scaled) anti-canonical classes.
pub fn tz_value(
    inv: &InvariantBundle,
    fp: &FanoParameters,
    k: f64,
    vol_s: f64,
) -> Result<f64, GqeError> {
    if !fano_residual(inv, fp).is_zero() {
        return Err(GqeError::NotApplicable(
            "class is not a multiple of the anti-canonical class".to_string(),
        ));
    }
    if !(vol_s > 0.0) {
        return Err(GqeError::InvalidArgument(format!("vol_S = {vol_s} must be positive")));
    }
    let lambda = rat_to_f64(&fp.lambda);
    let c = fp.c.to_f64().unwrap_or(0.0);
    Ok(-2.0 * PI * lambda.powi(fp.m as i32) * (-k * c / (2.0 * lambda)).exp() * vol_s * mt(inv, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissible::{build_invariants, fano_parameters, BaseFactor};
    use crate::polycalc::rat;

    fn round() -> InvariantBundle {
        build_invariants(&AdmissibleData::new(vec![], 0, 0).unwrap()).unwrap()
    }

    fn koiso(x: num_rational::BigRational) -> InvariantBundle {
        build_invariants(&AdmissibleData::koiso(1, x).unwrap()).unwrap()
    }

    #[test]
    fn mt_examples() {
        assert_eq!(mt(&round(), 0.0), 0.0);
        assert!((mt(&koiso(rat(1, 2)), 0.0) + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn k0_round_is_zero() {
        assert_eq!(solve_k0(&round()).unwrap(), 0.0);
    }

    #[test]
    fn k0_koiso_half() {
        let inv = koiso(rat(1, 2));
        let k0 = solve_k0(&inv).unwrap();
        assert!(k0 > -10.0 && k0 < 0.0, "k0 = {k0}");
        assert!(mt(&inv, k0).abs() <= 1e-12 * mt(&inv, 0.0).abs().max(1.0));
    }

    #[test]
    fn k0_rejects_three_roots() {
        let data = AdmissibleData::new(
            vec![
                BaseFactor::new(1, rat_int(-200), rat(9, 20)),
                BaseFactor::new(1, rat_int(8), rat(-19, 20)),
            ],
            0,
            0,
        )
        .unwrap();
        let inv = build_invariants(&data).unwrap();
        assert_eq!(single_root_check(&inv).unwrap().brackets.len(), 3);
        assert!(matches!(solve_k0(&inv), Err(GqeError::HypothesisNotMet(_))));
    }

    #[test]
    fn round_profile_is_canonical() {
        let inv = round();
        let prof = build_profile(&inv, 0.0).unwrap();
        for z in [-1.0, -0.999, -0.5, 0.0, 0.3, 0.995, 1.0] {
            assert!((prof.f(z) - (1.0 - z * z)).abs() < 1e-14);
            assert!((prof.theta(z) - (1.0 - z * z)).abs() < 1e-14);
            assert!((prof.theta_d1(z) + 2.0 * z).abs() < 1e-12);
            assert!((prof.theta_d2(z) + 2.0).abs() < 1e-10);
        }
        assert!(verify_profile(&prof).all_passed());
    }

    #[test]
    fn wrong_slope_fails_endpoint_check() {
        let inv = koiso(rat(1, 2));
        let k0 = solve_k0(&inv).unwrap();
        let good = build_profile(&inv, k0).unwrap();
        assert!(verify_profile(&good).all_passed(), "{:?}", verify_profile(&good).failures());
        let bad = assemble_profile(&inv, k0 + 0.1);
        let report = verify_profile(&bad);
        assert!(!report.get("F(1)").unwrap().passed);
        assert!((bad.f(1.0) - (-(k0 + 0.1)).exp() * mt(&inv, k0 + 0.1)).abs() < 1e-14);
    }

    #[test]
    fn laplacian_examples() {
        let w = LogWeight::new(&AdmissibleData::new(vec![], 0, 0).unwrap());
        let lap = laplacian_of(&CanonicalProfile, &w, |_| (1.0, 0.0));
        for z in [-1.0, -0.3, 0.7, 1.0] {
            assert!((lap(z) - z).abs() < 1e-15);
        }
        let zero = laplacian_of(&CanonicalProfile, &w, |_| (0.0, 0.0));
        assert_eq!(zero(0.4), 0.0);
    }

    #[test]
    fn laplacian_endpoint_limits() {
        let data = AdmissibleData::new(vec![BaseFactor::new(1, rat_int(1), rat(1, 5))], 1, 2).unwrap();
        let inv = build_invariants(&data).unwrap();
        let prof = gqe_profile(&inv).unwrap();
        let lap = laplacian_of(&prof, prof.log_weight(), |_| (1.0, 0.0));
        assert!((lap(-1.0) + 2.0).abs() < 1e-8, "{}", lap(-1.0));
        assert!((lap(1.0) - 3.0).abs() < 1e-8, "{}", lap(1.0));
    }

    #[test]
    fn scalar_curvature_round_is_constant() {
        let inv = round();
        let scal = scalar_curvature(&CanonicalProfile, &inv);
        assert_eq!(scal.mean, 1.0);
        for z in [-1.0, -0.5, 0.0, 0.9, 1.0] {
            assert!((scal.eval(z) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn scalar_curvature_of_gqe_profile() {
        let inv = koiso(rat(1, 2));
        let prof = gqe_profile(&inv).unwrap();
        let scal = scalar_curvature(&prof, &inv);
        for z in [-0.9, -0.4, 0.1, 0.6, 0.95] {
            let lhs = scal.eval(z) - scal.mean;
            let rhs = prof.k0 * prof.f_d1(z) / (2.0 * prof.p_c(z));
            assert!((lhs - rhs).abs() < 1e-9, "z={z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn tz_examples() {
        let data = AdmissibleData::koiso(1, rat(1, 2)).unwrap();
        let inv = build_invariants(&data).unwrap();
        let fp = fano_parameters(&data);
        let tz0 = tz_value(&inv, &fp, 0.0, 1.0).unwrap();
        assert!((tz0 - 4.0 * PI / 3.0).abs() < 1e-12);
        let k0 = solve_k0(&inv).unwrap();
        assert!(tz_value(&inv, &fp, k0, 1.0).unwrap().abs() < 1e-12);
        for k in [-2.0, 0.5, 3.0] {
            let ratio = tz_value(&inv, &fp, k, 1.0).unwrap() / mt(&inv, k);
            assert!((ratio + 2.0 * PI).abs() < 1e-12);
        }
        let other = AdmissibleData::new(vec![BaseFactor::new(1, rat_int(1), rat(1, 2))], 0, 0).unwrap();
        let inv2 = build_invariants(&other).unwrap();
        assert!(matches!(
            tz_value(&inv2, &fano_parameters(&other), 0.0, 1.0),
            Err(GqeError::NotApplicable(_))
        ));
    }
}
