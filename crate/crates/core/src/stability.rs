//! The decay condition `Q = Θ_∞ (P/p_c)' - (P/p_c) Θ_∞' < 0`, its
//! sufficient criteria, and the small-`x` limit of `P`.

use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use thiserror::Error;

use crate::admissible::{build_invariants, AdmissibleData, AdmissibleError, InvariantBundle};
use crate::gqe::{GqeError, GqeProfile, MomentumProfile};
use crate::numerics::richardson_limit;
use crate::polycalc::{count_real_roots, isolate_real_roots, rat_int, rat_to_f64, FloatPoly, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Admissible(#[from] AdmissibleError),
    #[error(transparent)]
    Gqe(#[from] GqeError),
}

/// Step used for the endpoint limits of `Q`.
pub const ENDPOINT_STEP: f64 = 1e-3;
/// Relative agreement required between the two evaluations of `Q`.
pub const CROSS_CHECK_TOL: f64 = 1e-6;
/// Interior samples for `q_min` and the cross-check.
pub const Q_SAMPLES: usize = 4000;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub q_min: f64,
    /// Limits of `Q` at `-1` and `+1`.
    pub q_boundary: (f64, f64),
    pub condition_holds: bool,
    /// Minimum of `ξ² - ηξ'` over the open interval.
    pub xi_eta_min: f64,
    pub log_concavity_holds: bool,
    /// Largest `|Q_a - Q_b|` seen by the cross-check.
    pub cross_check_error: f64,
}

/// `Q` and its `ξ/η` representation for a fixed profile.
pub struct QFunction<'a> {
    profile: &'a GqeProfile,
    p: FloatPoly,
    dp: FloatPoly,
}

impl<'a> QFunction<'a> {
    pub fn new(profile: &'a GqeProfile, inv: &InvariantBundle) -> Self {
        Self {
            profile,
            p: inv.p.to_float(),
            dp: inv.p.derivative().to_float(),
        }
    }

    /// `Θ_∞ R' - R Θ_∞'` with `R = P/p_c` in deflated form.
    pub fn direct(&self, z: f64) -> f64 {
        let r = self.profile.p_over_pc(z);
        let dr = self.profile.p_over_pc_d1(z);
        self.profile.theta(z) * dr - r * self.profile.theta_d1(z)
    }

    pub fn xi(&self, t: f64) -> f64 {
        self.p.eval(t) * (self.profile.k0 * t).exp()
    }

    pub fn xi_d1(&self, t: f64) -> f64 {
        (self.dp.eval(t) + self.profile.k0 * self.p.eval(t)) * (self.profile.k0 * t).exp()
    }

    /// `η(t) = ∫_{-1}^t ξ`, taken as `-∫_t^1 ξ` for `t > 0` since
    /// `η(1) = MT(k₀) = 0`; the rounding residual of `MT(k₀)` is dropped,
    /// as in the endpoint series of `Θ_∞`.
    pub fn eta(&self, t: f64) -> f64 {
        let k = self.profile.k0;
        if t <= 0.0 {
            self.p.exp_weighted_integral(k, -1.0, t)
        } else {
            -self.p.exp_weighted_integral(k, t, 1.0)
        }
    }

    pub fn xi_eta(&self, t: f64) -> f64 {
        let xi = self.xi(t);
        xi * xi - self.eta(t) * self.xi_d1(t)
    }

    /// `-(ξ² - ηξ') e^{-2k₀z} / p_c²`.
    pub fn via_xi_eta(&self, z: f64) -> f64 {
        let pc = self.profile.p_c(z);
        -self.xi_eta(z) * (-2.0 * self.profile.k0 * z).exp() / (pc * pc)
    }

    /// Rounding bound for [`Self::via_xi_eta`], which cancels badly where
    /// `p_c` is small.
    fn via_xi_eta_error(&self, z: f64) -> f64 {
        let pc = self.profile.p_c(z);
        let xi = self.xi(z);
        let size = xi * xi + (self.eta(z) * self.xi_d1(z)).abs();
        64.0 * f64::EPSILON * size * (-2.0 * self.profile.k0 * z).exp() / (pc * pc)
    }

    /// Endpoint value as a Richardson limit of the direct form.
    pub fn limit(&self, end: f64) -> f64 {
        richardson_limit(|z| self.direct(z), end, ENDPOINT_STEP)
    }

    pub fn eval(&self, z: f64) -> f64 {
        if z <= -1.0 || z >= 1.0 {
            self.limit(z.signum())
        } else {
            self.direct(z)
        }
    }
}

/// Evaluates `Q` on the closed interval and cross-checks the two
/// representations on `[-1 + δ, 1 - δ]`.
pub fn q_function<'a>(
    profile: &'a GqeProfile,
    inv: &InvariantBundle,
) -> Result<(QFunction<'a>, StabilityReport), StabilityError> {
    let q = QFunction::new(profile, inv);
    let delta = 1e-3;
    let q_boundary = (q.limit(-1.0), q.limit(1.0));
    let mut q_min = q_boundary.0.min(q_boundary.1);
    let mut q_max_abs = q_boundary.0.abs().max(q_boundary.1.abs());
    let mut xi_eta_min = f64::INFINITY;
    let mut samples = Vec::with_capacity(Q_SAMPLES);
    for i in 1..Q_SAMPLES {
        let z = -1.0 + 2.0 * i as f64 / Q_SAMPLES as f64;
        let a = q.direct(z);
        q_min = q_min.min(a);
        q_max_abs = q_max_abs.max(a.abs());
        xi_eta_min = xi_eta_min.min(q.xi_eta(z));
        if z.abs() <= 1.0 - delta {
            samples.push((z, a));
        }
    }
    let mut cross_check_error: f64 = 0.0;
    for (z, a) in samples {
        let b = q.via_xi_eta(z);
        let diff = (a - b).abs();
        let allowed = CROSS_CHECK_TOL * q_max_abs + q.via_xi_eta_error(z);
        if !(diff <= allowed) {
            return Err(StabilityError::NumericFailure(format!(
                "Q evaluations disagree at z = {z}: {a} vs {b}"
            )));
        }
        cross_check_error = cross_check_error.max(diff);
    }
    let report = StabilityReport {
        q_min,
        q_boundary,
        condition_holds: q_min < 0.0,
        xi_eta_min,
        log_concavity_holds: log_concavity_check(inv),
        cross_check_error,
    };
    Ok((q, report))
}

/// `P'' P - P'²`.
pub fn log_concavity_polynomial(p: &Polynomial) -> Polynomial {
    let d1 = p.derivative();
    &(&p.nth_derivative(2) * p) - &(&d1 * &d1)
}

/// Grid points used by [`log_concavity_check`].
const LOG_CONCAVITY_GRID: i64 = 1000;

/// `P'' P - P'² < 0` on `(-1, 1)`: no root there by Sturm counting, and
/// negative at every rational grid point.
pub fn log_concavity_check(inv: &InvariantBundle) -> bool {
    let w = log_concavity_polynomial(&inv.p);
    if w.is_zero() {
        return false;
    }
    match count_real_roots(&w, &rat_int(-1), &rat_int(1)) {
        Ok(0) => {}
        _ => return false,
    }
    (1..2 * LOG_CONCAVITY_GRID).all(|i| {
        let t = BigRational::new((i - LOG_CONCAVITY_GRID).into(), LOG_CONCAVITY_GRID.into());
        w.eval(&t).is_negative()
    })
}

/// Exact signs at the root `t₀` of `P` that force `ξ² - ηξ' > 0` there.
#[derive(Debug, Clone, PartialEq)]
pub struct RootPositivity {
    pub t0: f64,
    /// `ξ'(t₀) < 0`, i.e. `P'(t₀) < 0`.
    pub xi_d1_negative: bool,
    /// `η(t₀) > 0`, i.e. `P > 0` on `(-1, t₀)`.
    pub eta_positive: bool,
    /// `ξ² - ηξ'` at `t₀`, evaluated numerically.
    pub value: f64,
}

impl RootPositivity {
    pub fn holds(&self) -> bool {
        self.xi_d1_negative && self.eta_positive
    }
}

pub fn xi_eta_at_root(
    q: &QFunction<'_>,
    inv: &InvariantBundle,
) -> Result<RootPositivity, StabilityError> {
    let brackets = isolate_real_roots(&inv.p, &rat_int(-1), &rat_int(1))
        .map_err(AdmissibleError::from)?;
    let [root] = brackets.as_slice() else {
        return Err(StabilityError::InvariantViolation(format!(
            "P has {} interior roots",
            brackets.len()
        )));
    };
    let dp = inv.p.derivative();
    // P' keeps one sign on the bracket when it has no root there.
    let dp_roots = if dp.is_zero() {
        1
    } else if root.lo == root.hi {
        0
    } else {
        count_real_roots(&dp, &root.lo, &root.hi).map_err(AdmissibleError::from)?
    };
    let mid = (&root.lo + &root.hi) / rat_int(2);
    let xi_d1_negative = dp_roots == 0 && dp.eval(&mid).is_negative()
        && !dp.eval(&root.lo).is_positive()
        && !dp.eval(&root.hi).is_positive();
    let left = (rat_int(-1) + &root.lo) / rat_int(2);
    let eta_positive = inv.p.eval(&left).is_positive();
    let t0 = root.midpoint();
    Ok(RootPositivity {
        t0,
        xi_d1_negative,
        eta_positive,
        value: q.xi_eta(t0),
    })
}

/// The `x_a → 0` limit of `P` with `s_a` fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitPolynomial {
    pub p: Polynomial,
    pub t0: BigRational,
}

impl LimitPolynomial {
    pub fn t0_f64(&self) -> f64 {
        rat_to_f64(&self.t0)
    }
}

/// Builds `lim P` and checks it equals
/// `-(2 + d₀ + d_∞)(t - t₀)(1+t)^{d₀}(1-t)^{d_∞}`.
pub fn limit_p(data: &AdmissibleData) -> Result<LimitPolynomial, StabilityError> {
    // Dropping every base term and base factor of p_c is the same as
    // building the invariants of the bare fiber.
    let bare = AdmissibleData::new(Vec::new(), data.d0, data.dinf)?;
    let inv = build_invariants(&bare)?;
    let linear = &inv.p_deflated;
    let lead = rat_int(-(2 + data.d0 as i64 + data.dinf as i64));
    if linear.degree() != Some(1) || linear.coeff(1) != lead {
        return Err(StabilityError::InvariantViolation(format!(
            "limit of P does not factor as expected: P/fiber = {linear}"
        )));
    }
    let t0 = -linear.coeff(0) / linear.coeff(1);
    let rebuilt = &Polynomial::linear(-&t0 * &lead, lead.clone()) * &bare.fiber_factor();
    if rebuilt != inv.p {
        return Err(StabilityError::InvariantViolation(
            "limit of P does not match its factored form".to_string(),
        ));
    }
    let roots = isolate_real_roots(&inv.p, &rat_int(-1), &rat_int(1)).map_err(AdmissibleError::from)?;
    if roots.len() != 1 || !roots[0].contains(&t0) {
        return Err(StabilityError::InvariantViolation(format!(
            "t0 = {t0} is not the unique interior root"
        )));
    }
    Ok(LimitPolynomial { p: inv.p, t0 })
}

/// `(2 + d_∞)(1 + t₀) = 2`, exactly.
pub fn case_one_relation(limit: &LimitPolynomial, dinf: u32) -> bool {
    rat_int(2 + dinf as i64) * (BigRational::one() + &limit.t0) == rat_int(2)
}

/// Limit of `P''P - P'²` at `t = -1` when `d₀ = 0`:
/// `-(1+d_∞)(4+d_∞) 2^{2d_∞}`.
pub fn case_one_constant(dinf: u32) -> i64 {
    let d = dinf as i64;
    -(1 + d) * (4 + d) * (1i64 << (2 * d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallXRow {
    pub scale: BigRational,
    /// `P''P - P'²` at `t = -1`.
    pub w_minus1: f64,
    /// `P''P - P'²` at `t = +1`.
    pub w_plus1: f64,
    /// `max_i |P_ε,i - (lim P)_i|`.
    pub distance: f64,
}

/// Rebuilds `P` with every `x_a` scaled by each `ε` and compares it with
/// its limit.
pub fn small_x_diagnostic(
    data: &AdmissibleData,
    scales: &[BigRational],
) -> Result<Vec<SmallXRow>, StabilityError> {
    let limit = limit_p(data)?;
    scales
        .par_iter()
        .map(|eps| {
            if !eps.is_positive() || eps > &BigRational::one() {
                return Err(StabilityError::Admissible(AdmissibleError::MalformedInput(format!(
                    "scale {eps} is outside (0, 1]"
                ))));
            }
            let inv = build_invariants(&data.with_x_scaled(eps)?)?;
            let w = log_concavity_polynomial(&inv.p);
            Ok(SmallXRow {
                scale: eps.clone(),
                w_minus1: rat_to_f64(&w.eval(&rat_int(-1))),
                w_plus1: rat_to_f64(&w.eval(&rat_int(1))),
                distance: inv.p.coeff_distance(&limit.p),
            })
        })
        .collect()
}

/// `true` when the table's `distance` column decreases with the scale.
pub fn distances_monotone(rows: &[SmallXRow]) -> bool {
    let mut sorted: Vec<&SmallXRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.scale.cmp(&b.scale));
    sorted.windows(2).all(|w| w[0].distance < w[1].distance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissible::BaseFactor;
    use crate::gqe::gqe_profile;
    use crate::polycalc::rat;
    use num_traits::Zero;

    fn inv(factors: Vec<BaseFactor>, d0: u32, dinf: u32) -> InvariantBundle {
        build_invariants(&AdmissibleData::new(factors, d0, dinf).unwrap()).unwrap()
    }

    #[test]
    fn round_case_q() {
        let inv = inv(vec![], 0, 0);
        let prof = gqe_profile(&inv).unwrap();
        let (q, report) = q_function(&prof, &inv).unwrap();
        for z in [-0.9, -0.2, 0.0, 0.5, 0.99] {
            assert!((q.direct(z) + 2.0 + 2.0 * z * z).abs() < 1e-10);
            assert!((q.via_xi_eta(z) + 2.0 + 2.0 * z * z).abs() < 1e-10);
            assert!((q.xi_eta(z) - (2.0 + 2.0 * z * z)).abs() < 1e-12);
        }
        assert!((report.q_boundary.0 + 4.0).abs() < 1e-4);
        assert!((report.q_boundary.1 + 4.0).abs() < 1e-4);
        assert!(report.condition_holds && report.log_concavity_holds);
    }

    #[test]
    fn boundary_limits_with_fiber_ends() {
        for (d0, dinf) in [(0, 1), (1, 2)] {
            let inv = inv(vec![BaseFactor::new(1, rat_int(1), rat(1, 10))], d0, dinf);
            let prof = gqe_profile(&inv).unwrap();
            let (_, report) = q_function(&prof, &inv).unwrap();
            let expect = (-4.0 * (d0 as f64 + 1.0), -4.0 * (dinf as f64 + 1.0));
            assert!((report.q_boundary.0 - expect.0).abs() < 1e-4, "{report:?}");
            assert!((report.q_boundary.1 - expect.1).abs() < 1e-4, "{report:?}");
        }
    }

    #[test]
    fn log_concavity_examples() {
        assert!(log_concavity_check(&inv(vec![], 0, 0)));
        assert!(log_concavity_check(&inv(vec![], 0, 1)));
        let koiso = build_invariants(&AdmissibleData::koiso(2, rat(1, 2)).unwrap()).unwrap();
        assert!(log_concavity_check(&koiso));
        let w = log_concavity_polynomial(&Polynomial::from_ints(&[-1, -2, 3]));
        assert_eq!(w, Polynomial::from_ints(&[-10, 12, -18]));
    }

    #[test]
    fn limit_examples() {
        let l = limit_p(&AdmissibleData::new(vec![], 0, 0).unwrap()).unwrap();
        assert_eq!(l.p, Polynomial::from_ints(&[0, -2]));
        assert!(l.t0.is_zero());
        let data = AdmissibleData::new(vec![BaseFactor::new(2, rat_int(3), rat(1, 3))], 0, 1).unwrap();
        let l = limit_p(&data).unwrap();
        assert_eq!(l.p, Polynomial::from_ints(&[-1, -2, 3]));
        assert_eq!(l.t0, rat(-1, 3));
        assert!(case_one_relation(&l, 1));
        for dinf in 0..5 {
            let l = limit_p(&AdmissibleData::new(vec![], 0, dinf).unwrap()).unwrap();
            assert!(case_one_relation(&l, dinf));
        }
    }

    #[test]
    fn case_one_constants() {
        assert_eq!(case_one_constant(0), -4);
        assert_eq!(case_one_constant(2), -288);
        for dinf in [0, 2] {
            let l = limit_p(&AdmissibleData::new(vec![], 0, dinf).unwrap()).unwrap();
            let w = log_concavity_polynomial(&l.p).eval(&rat_int(-1));
            assert_eq!(w, rat_int(case_one_constant(dinf)));
        }
    }

    #[test]
    fn small_x_converges() {
        let data = AdmissibleData::new(vec![BaseFactor::new(1, rat_int(2), rat(1, 2))], 0, 2).unwrap();
        let scales = [rat(1, 10), rat(1, 100), rat(1, 1000)];
        let rows = small_x_diagnostic(&data, &scales).unwrap();
        assert!(distances_monotone(&rows));
        let last = rows.iter().find(|r| r.scale == rat(1, 1000)).unwrap();
        assert!((last.w_minus1 + 288.0).abs() < 0.01 * 288.0);
    }

    #[test]
    fn root_positivity() {
        let inv = build_invariants(&AdmissibleData::koiso(1, rat(1, 2)).unwrap()).unwrap();
        let prof = gqe_profile(&inv).unwrap();
        let q = QFunction::new(&prof, &inv);
        let r = xi_eta_at_root(&q, &inv).unwrap();
        assert!(r.holds());
        assert!(r.value > 0.0);
        assert!(r.t0.abs() < 1e-12);
    }
}
