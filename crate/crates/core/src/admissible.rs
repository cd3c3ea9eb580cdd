//! Admissible data and the exact class invariants built from it.
//!
//! The fiber ends are implicit: `x₀ = 1`, `x_∞ = -1`, `s₀ = d₀ + 1` and
//! `s_∞ = -(d_∞ + 1)`. Only the base factors are stored.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::polycalc::{isolate_real_roots, rat, rat_int, PolyError, Polynomial, RootBracket};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdmissibleError {
    #[error("factors[{index}].x = {x}: class is not Kähler, need 0 < |x| < 1")]
    ClassNotKahler { index: usize, x: BigRational },
    #[error("factors[{index}].d must be a positive integer")]
    ZeroDimension { index: usize },
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

impl AdmissibleError {
    /// Config path of the field an error refers to, when there is one.
    pub fn field_path(&self) -> Option<String> {
        match self {
            AdmissibleError::ClassNotKahler { index, .. } => Some(format!("factors[{index}].x")),
            AdmissibleError::ZeroDimension { index } => Some(format!("factors[{index}].d")),
            _ => None,
        }
    }
}

/// One base factor `(d_a, s_a, x_a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseFactor {
    pub d: u32,
    pub s: BigRational,
    pub x: BigRational,
}

impl BaseFactor {
    pub fn new(d: u32, s: BigRational, x: BigRational) -> Self {
        Self { d, s, x }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibleData {
    pub base_factors: Vec<BaseFactor>,
    pub d0: u32,
    pub dinf: u32,
}

impl AdmissibleData {
    /// Builds and validates in one step.
    pub fn new(base_factors: Vec<BaseFactor>, d0: u32, dinf: u32) -> Result<Self, AdmissibleError> {
        let data = Self { base_factors, d0, dinf };
        data.validate()?;
        Ok(data)
    }

    /// Koiso's example over CP^l: one factor `(l, 1/x, x)`, no fiber ends.
    pub fn koiso(l: u32, x: BigRational) -> Result<Self, AdmissibleError> {
        if x.is_zero() {
            return Err(AdmissibleError::ClassNotKahler { index: 0, x });
        }
        let s = BigRational::one() / &x;
        Self::new(vec![BaseFactor::new(l, s, x)], 0, 0)
    }

    pub fn validate(&self) -> Result<(), AdmissibleError> {
        for (index, f) in self.base_factors.iter().enumerate() {
            if f.d == 0 {
                return Err(AdmissibleError::ZeroDimension { index });
            }
            if f.x.is_zero() || f.x.abs() >= BigRational::one() {
                return Err(AdmissibleError::ClassNotKahler { index, x: f.x.clone() });
            }
        }
        Ok(())
    }

    /// Complex dimension `m = Σ d_a + 1` over base factors and fiber ends.
    pub fn dimension(&self) -> u32 {
        self.base_factors.iter().map(|f| f.d).sum::<u32>() + self.d0 + self.dinf + 1
    }

    /// Every factor with `d > 0`, fiber ends included, as `(d, s, x)`.
    pub fn all_factors(&self) -> Vec<(u32, BigRational, BigRational)> {
        let mut out: Vec<_> = self
            .base_factors
            .iter()
            .map(|f| (f.d, f.s.clone(), f.x.clone()))
            .collect();
        if self.d0 > 0 {
            out.push((self.d0, rat_int(self.d0 as i64 + 1), rat_int(1)));
        }
        if self.dinf > 0 {
            out.push((self.dinf, -rat_int(self.dinf as i64 + 1), rat_int(-1)));
        }
        out
    }

    /// Same data with every base `x_a` multiplied by `scale`, `s_a` fixed.
    pub fn with_x_scaled(&self, scale: &BigRational) -> Result<Self, AdmissibleError> {
        let base_factors = self
            .base_factors
            .iter()
            .map(|f| BaseFactor::new(f.d, f.s.clone(), &f.x * scale))
            .collect();
        Self::new(base_factors, self.d0, self.dinf)
    }

    /// `(1+z)^{d₀} (1-z)^{d_∞}`.
    pub fn fiber_factor(&self) -> Polynomial {
        Polynomial::from_ints(&[1, 1]).pow(self.d0) * Polynomial::from_ints(&[1, -1]).pow(self.dinf)
    }

    /// `∏_{a∈𝒜} (1 + x_a z)^{d_a}` over base factors only.
    pub fn base_denominator(&self) -> Polynomial {
        self.base_factors.iter().fold(Polynomial::one(), |acc, f| {
            &acc * &Polynomial::linear(rat_int(1), f.x.clone()).pow(f.d)
        })
    }
}

/// `p_c(z) = ∏ (1 + x_a z)^{d_a}` including the fiber ends.
pub fn build_pc(data: &AdmissibleData) -> Polynomial {
    &data.fiber_factor() * &data.base_denominator()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantBundle {
    pub data: AdmissibleData,
    pub p_c: Polynomial,
    pub p: Polynomial,
    pub alpha0: BigRational,
    pub beta0: BigRational,
    /// `P / [(1+z)^{d₀}(1-z)^{d_∞}]`, exact.
    pub p_deflated: Polynomial,
    pub base_denominator: Polynomial,
}

impl InvariantBundle {
    /// Average scalar curvature `β₀/α₀`.
    pub fn mean_scalar_curvature(&self) -> BigRational {
        &self.beta0 / &self.alpha0
    }
}

/// `Σ_a d_a s_a x_a p_c(z) / (1 + x_a z)`, a polynomial since each
/// `(1 + x_a z)` divides `p_c`.
pub fn curvature_weight(data: &AdmissibleData, p_c: &Polynomial) -> Result<Polynomial, AdmissibleError> {
    let mut acc = Polynomial::zero();
    for (d, s, x) in data.all_factors() {
        let lin = Polynomial::linear(rat_int(1), x.clone());
        let quot = p_c.exact_div(&lin).ok_or_else(|| {
            AdmissibleError::InvariantViolation(format!("1 + ({x}) z does not divide p_c"))
        })?;
        let c = rat_int(d as i64) * &s * &x;
        acc = &acc + &quot.scale(&c);
    }
    Ok(acc)
}

pub fn build_invariants(data: &AdmissibleData) -> Result<InvariantBundle, AdmissibleError> {
    data.validate()?;
    let (m1, p1) = (rat_int(-1), rat_int(1));
    let p_c = build_pc(data);
    let weight = curvature_weight(data, &p_c)?;
    let alpha0 = p_c.definite_integral(&m1, &p1);
    let beta0 = p_c.eval(&p1) + p_c.eval(&m1) + weight.definite_integral(&m1, &p1);
    let mean = &beta0 / &alpha0;
    let integrand = &weight - &p_c.scale(&mean);
    let anti = integrand.antiderivative();
    let offset = anti.eval(&m1);
    let p = &(&anti - &Polynomial::constant(offset)).scale(&rat_int(2))
        + &Polynomial::constant(rat_int(2) * p_c.eval(&m1));
    let p_deflated = p.exact_div(&data.fiber_factor()).ok_or_else(|| {
        AdmissibleError::InvariantViolation(
            "P is not divisible by (1+z)^d0 (1-z)^dinf".to_string(),
        )
    })?;
    Ok(InvariantBundle {
        data: data.clone(),
        p_c,
        p,
        alpha0,
        beta0,
        p_deflated,
        base_denominator: data.base_denominator(),
    })
}

/// Values checked against the boundary structure of `P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryReport {
    pub p_at_minus1: BigRational,
    pub p_at_plus1: BigRational,
    /// `P^{(d₀)}(-1)`, positive.
    pub leading_derivative_minus1: BigRational,
    /// `P^{(d_∞)}(1)`, sign `(-1)^{d_∞+1}`.
    pub leading_derivative_plus1: BigRational,
}

pub fn boundary_structure_check(
    inv: &InvariantBundle,
    data: &AdmissibleData,
) -> Result<BoundaryReport, AdmissibleError> {
    let (m1, p1) = (rat_int(-1), rat_int(1));
    let fail = |msg: String| Err(AdmissibleError::InvariantViolation(msg));
    let mut deriv = inv.p.clone();
    for j in 0..data.d0 {
        if !deriv.eval(&m1).is_zero() {
            return fail(format!("P^({j})(-1) != 0 with d0 = {}", data.d0));
        }
        deriv = deriv.derivative();
    }
    let lead_m1 = deriv.eval(&m1);
    if !lead_m1.is_positive() {
        return fail(format!("P^({})(-1) = {lead_m1} is not positive", data.d0));
    }
    let mut deriv = inv.p.clone();
    for j in 0..data.dinf {
        if !deriv.eval(&p1).is_zero() {
            return fail(format!("P^({j})(1) != 0 with dinf = {}", data.dinf));
        }
        deriv = deriv.derivative();
    }
    let lead_p1 = deriv.eval(&p1);
    let want_positive = data.dinf % 2 == 1;
    if lead_p1.is_zero() || lead_p1.is_positive() != want_positive {
        return fail(format!("P^({})(1) = {lead_p1} has the wrong sign", data.dinf));
    }
    Ok(BoundaryReport {
        p_at_minus1: inv.p.eval(&m1),
        p_at_plus1: inv.p.eval(&p1),
        leading_derivative_minus1: lead_m1,
        leading_derivative_plus1: lead_p1,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootCheck {
    pub brackets: Vec<RootBracket>,
}

impl RootCheck {
    pub fn holds(&self) -> bool {
        self.brackets.len() == 1
    }

    /// The unique interior root, when there is exactly one.
    pub fn root(&self) -> Option<&RootBracket> {
        if self.holds() {
            self.brackets.first()
        } else {
            None
        }
    }
}

/// Roots of `P` in `(-1, 1)`; the GQE construction needs exactly one.
pub fn single_root_check(inv: &InvariantBundle) -> Result<RootCheck, AdmissibleError> {
    let brackets = isolate_real_roots(&inv.p, &rat_int(-1), &rat_int(1))?;
    Ok(RootCheck { brackets })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanoParameters {
    pub lambda: BigRational,
    pub c: BigRational,
    pub m: u32,
}

pub fn fano_parameters(data: &AdmissibleData) -> FanoParameters {
    FanoParameters {
        lambda: rat((data.d0 + data.dinf + 2) as i64, 2),
        c: rat_int(data.d0 as i64 - data.dinf as i64),
        m: data.dimension(),
    }
}

/// `2λ z p_c - C p_c + P`; identically zero exactly for (scaled)
/// anti-canonical classes.
pub fn fano_residual(inv: &InvariantBundle, fp: &FanoParameters) -> Polynomial {
    let two_lambda_z = Polynomial::linear(-fp.c.clone(), rat_int(2) * &fp.lambda);
    &(&two_lambda_z * &inv.p_c) + &inv.p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factor(d: u32, s: BigRational, x: BigRational) -> BaseFactor {
        BaseFactor::new(d, s, x)
    }

    #[test]
    fn validate_examples() {
        assert!(AdmissibleData::new(vec![factor(1, rat_int(2), rat(1, 2))], 0, 0).is_ok());
        let err = AdmissibleData::new(vec![factor(1, rat_int(1), rat(3, 2))], 0, 0).unwrap_err();
        assert!(matches!(err, AdmissibleError::ClassNotKahler { index: 0, .. }));
        let round = AdmissibleData::new(vec![], 0, 0).unwrap();
        assert_eq!(round.dimension(), 1);
        let zero_x = AdmissibleData::new(vec![factor(1, rat_int(1), rat_int(0))], 0, 0);
        assert!(matches!(zero_x, Err(AdmissibleError::ClassNotKahler { .. })));
        let zero_d = AdmissibleData::new(vec![factor(0, rat_int(1), rat(1, 3))], 0, 0);
        assert!(matches!(zero_d, Err(AdmissibleError::ZeroDimension { index: 0 })));
    }

    #[test]
    fn pc_examples() {
        let d = AdmissibleData::new(vec![], 1, 1).unwrap();
        assert_eq!(build_pc(&d), Polynomial::from_ints(&[1, 0, -1]));
        let d = AdmissibleData::new(vec![factor(1, rat_int(1), rat(1, 2))], 0, 0).unwrap();
        assert_eq!(build_pc(&d), Polynomial::new(vec![rat_int(1), rat(1, 2)]));
        let d = AdmissibleData::new(vec![factor(2, rat_int(1), rat(1, 2))], 0, 1).unwrap();
        // (1 - z)(1 + z + z²/4) by hand convolution
        let want = Polynomial::new(vec![rat_int(1), rat_int(0), rat(-3, 4), rat(-1, 4)]);
        assert_eq!(build_pc(&d), want);
    }

    #[test]
    fn invariants_koiso() {
        let d = AdmissibleData::koiso(1, rat(1, 2)).unwrap();
        let inv = build_invariants(&d).unwrap();
        assert_eq!(inv.p, Polynomial::from_ints(&[0, -2, -1]));
        assert_eq!(inv.alpha0, rat_int(2));
        assert_eq!(inv.beta0, rat_int(4));
    }

    #[test]
    fn invariants_round_and_fiber_end() {
        let inv = build_invariants(&AdmissibleData::new(vec![], 0, 0).unwrap()).unwrap();
        assert_eq!(inv.p, Polynomial::from_ints(&[0, -2]));
        assert_eq!((inv.alpha0.clone(), inv.beta0.clone()), (rat_int(2), rat_int(2)));

        let d = AdmissibleData::new(vec![], 0, 1).unwrap();
        let inv = build_invariants(&d).unwrap();
        assert_eq!(inv.p, Polynomial::from_ints(&[-1, -2, 3]));
        assert_eq!(inv.p_deflated, Polynomial::from_ints(&[-1, -3]));
    }

    #[test]
    fn boundary_examples() {
        let d = AdmissibleData::koiso(1, rat(1, 2)).unwrap();
        let inv = build_invariants(&d).unwrap();
        let r = boundary_structure_check(&inv, &d).unwrap();
        assert_eq!((r.p_at_minus1, r.p_at_plus1), (rat_int(1), rat_int(-3)));

        let d = AdmissibleData::new(vec![], 0, 1).unwrap();
        let inv = build_invariants(&d).unwrap();
        let r = boundary_structure_check(&inv, &d).unwrap();
        assert_eq!(r.p_at_plus1, rat_int(0));
        assert_eq!(r.leading_derivative_plus1, rat_int(4));

        let d = AdmissibleData::new(vec![factor(1, rat_int(3), rat(-1, 3))], 1, 2).unwrap();
        let inv = build_invariants(&d).unwrap();
        let r = boundary_structure_check(&inv, &d).unwrap();
        assert_eq!(r.p_at_minus1, rat_int(0));
    }

    #[test]
    fn corrupted_polynomial_fails_boundary_check() {
        let d = AdmissibleData::new(vec![], 1, 0).unwrap();
        let mut inv = build_invariants(&d).unwrap();
        inv.p = &inv.p + &Polynomial::one();
        assert!(matches!(
            boundary_structure_check(&inv, &d),
            Err(AdmissibleError::InvariantViolation(_))
        ));
    }

    #[test]
    fn single_root_examples() {
        for (data, root) in [
            (AdmissibleData::koiso(1, rat(1, 2)).unwrap(), rat_int(0)),
            (AdmissibleData::new(vec![], 0, 0).unwrap(), rat_int(0)),
            (AdmissibleData::new(vec![], 0, 1).unwrap(), rat(-1, 3)),
        ] {
            let check = single_root_check(&build_invariants(&data).unwrap()).unwrap();
            assert!(check.holds());
            assert!(check.root().unwrap().contains(&root));
        }
    }

    #[test]
    fn fano_examples() {
        let fp = fano_parameters(&AdmissibleData::new(vec![], 1, 2).unwrap());
        assert_eq!((fp.lambda, fp.c), (rat(5, 2), rat_int(-1)));

        let d = AdmissibleData::koiso(1, rat(1, 2)).unwrap();
        let inv = build_invariants(&d).unwrap();
        let fp = fano_parameters(&d);
        assert_eq!((fp.lambda.clone(), fp.c.clone(), fp.m), (rat_int(1), rat_int(0), 2));
        assert!(fano_residual(&inv, &fp).is_zero());

        let d = AdmissibleData::new(vec![factor(1, rat_int(1), rat(1, 2))], 0, 0).unwrap();
        let inv = build_invariants(&d).unwrap();
        assert!(!fano_residual(&inv, &fano_parameters(&d)).is_zero());
    }
}
