//! Multinomial opinions and the four subjective-logic operators the
//! self-assessment method is built on: cumulative (aleatory) belief fusion,
//! cumulative unfusion, trust discounting, and the degree of conflict.
//!
//! An opinion distributes one unit of mass between per-outcome belief and
//! an explicit uncertainty mass, alongside a base-rate prior. All values
//! here are immutable and all operators are pure, so opinions can be moved
//! and shared freely across threads.

use thiserror::Error;

/// Tolerance for mass-sum bookkeeping. Violations below this bound are
/// treated as floating-point noise and repaired; anything larger is an
/// error in the caller's data.
pub const MASS_TOL: f64 = 1e-9;

/// Unfusion denominators at or below this bound are degenerate.
pub const UNFUSE_DENOM_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum OpinionError {
    #[error("belief and base rate lengths differ or domain is too small ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("mass sum violation: {what} sums to {sum}")]
    SumViolation { what: &'static str, sum: f64 },
    #[error("negative mass {value} at component {index}")]
    NegativeMass { index: usize, value: f64 },
    #[error("base rates disagree beyond tolerance at component {index}")]
    BaseRateMismatch { index: usize },
    #[error("degenerate unfusion: denominator {denom}")]
    DegenerateUnfusion { denom: f64 },
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, OpinionError>;

/// A multinomial opinion: belief mass per outcome, an explicit uncertainty
/// mass, and a base-rate prior over the same finite domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Opinion {
    belief: Vec<f64>,
    uncertainty: f64,
    base_rate: Vec<f64>,
}

/// Pseudo-observation counts backing an opinion, together with the
/// non-informative prior weight that maps them onto the opinion simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceVector {
    counts: Vec<f64>,
    prior_weight: f64,
}

impl EvidenceVector {
    /// Default prior weight: one pseudo-count per cell of a 9-bin domain.
    pub const DEFAULT_PRIOR_WEIGHT: f64 = 9.0;

    pub fn new(counts: Vec<f64>, prior_weight: f64) -> Result<Self> {
        if let Some((index, &value)) = counts.iter().enumerate().find(|(_, c)| **c < 0.0) {
            return Err(OpinionError::NegativeMass { index, value });
        }
        if prior_weight <= 0.0 {
            return Err(OpinionError::Domain(format!(
                "prior weight must be positive, got {prior_weight}"
            )));
        }
        Ok(Self {
            counts,
            prior_weight,
        })
    }

    /// A single unit of evidence in `bin` over a domain of `len` outcomes.
    pub fn unit(bin: usize, len: usize, prior_weight: f64) -> Result<Self> {
        if bin >= len {
            return Err(OpinionError::Domain(format!(
                "bin {bin} out of range for domain of {len}"
            )));
        }
        let mut counts = vec![0.0; len];
        counts[bin] = 1.0;
        Self::new(counts, prior_weight)
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn prior_weight(&self) -> f64 {
        self.prior_weight
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

fn validate_base_rate(base_rate: &[f64]) -> Result<()> {
    if base_rate.len() < 2 {
        return Err(OpinionError::LengthMismatch {
            left: base_rate.len(),
            right: base_rate.len(),
        });
    }
    if let Some((index, &value)) = base_rate.iter().enumerate().find(|(_, a)| **a < -MASS_TOL) {
        return Err(OpinionError::NegativeMass { index, value });
    }
    let sum: f64 = base_rate.iter().sum();
    if (sum - 1.0).abs() > MASS_TOL {
        return Err(OpinionError::SumViolation {
            what: "base rate",
            sum,
        });
    }
    Ok(())
}

impl Opinion {
    /// Builds a validated opinion.
    ///
    /// Components within `MASS_TOL` of the valid range are clamped and the
    /// mass sum repaired; larger violations are reported as errors rather
    /// than silently fixed.
    pub fn new(belief: Vec<f64>, uncertainty: f64, base_rate: Vec<f64>) -> Result<Self> {
        if belief.len() != base_rate.len() || belief.len() < 2 {
            return Err(OpinionError::LengthMismatch {
                left: belief.len(),
                right: base_rate.len(),
            });
        }
        validate_base_rate(&base_rate)?;

        let mut belief = belief;
        for (index, b) in belief.iter_mut().enumerate() {
            if *b < -MASS_TOL {
                return Err(OpinionError::NegativeMass { index, value: *b });
            }
            *b = b.clamp(0.0, 1.0);
        }
        if uncertainty < -MASS_TOL {
            return Err(OpinionError::NegativeMass {
                index: belief.len(),
                value: uncertainty,
            });
        }
        let mut uncertainty = uncertainty.clamp(0.0, 1.0);

        let sum: f64 = belief.iter().sum::<f64>() + uncertainty;
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(OpinionError::SumViolation {
                what: "belief + uncertainty",
                sum,
            });
        }
        // absorb rounding error into the uncertainty mass; if the belief
        // alone already overshoots one, rescale it instead
        let belief_sum: f64 = belief.iter().sum();
        if belief_sum > 1.0 {
            for b in belief.iter_mut() {
                *b /= belief_sum;
            }
            uncertainty = 0.0;
        } else {
            uncertainty = 1.0 - belief_sum;
        }

        // the base rate is stored as given: operators that carry a base
        // rate over must preserve it bit for bit
        let mut base_rate = base_rate;
        for a in base_rate.iter_mut() {
            *a = a.clamp(0.0, 1.0);
        }

        Ok(Self {
            belief,
            uncertainty,
            base_rate,
        })
    }

    /// Total ignorance: zero belief, full uncertainty mass.
    pub fn vacuous(base_rate: Vec<f64>) -> Result<Self> {
        let n = base_rate.len();
        Self::new(vec![0.0; n], 1.0, base_rate)
    }

    /// Vacuous opinion with a uniform base rate over `n` outcomes.
    pub fn vacuous_uniform(n: usize) -> Result<Self> {
        Self::vacuous(vec![1.0 / n as f64; n])
    }

    /// Zero-uncertainty opinion: a classical probability distribution.
    pub fn dogmatic(prob: Vec<f64>, base_rate: Vec<f64>) -> Result<Self> {
        let sum: f64 = prob.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(OpinionError::SumViolation {
                what: "dogmatic belief",
                sum,
            });
        }
        Self::new(prob, 0.0, base_rate)
    }

    /// Dogmatic opinion, uniform over `n` outcomes.
    pub fn dogmatic_uniform(n: usize) -> Result<Self> {
        let p = vec![1.0 / n as f64; n];
        Self::dogmatic(p.clone(), p)
    }

    /// Maps evidence counts onto the opinion simplex: with total count `R`
    /// and prior weight `W`, belief is `count / (W + R)` per outcome and
    /// `W / (W + R)` mass stays uncertain. Cumulative fusion is additive in
    /// this representation.
    pub fn from_evidence(evidence: &EvidenceVector, base_rate: Vec<f64>) -> Result<Self> {
        if evidence.counts.len() != base_rate.len() {
            return Err(OpinionError::LengthMismatch {
                left: evidence.counts.len(),
                right: base_rate.len(),
            });
        }
        let w = evidence.prior_weight;
        let denom = w + evidence.total();
        let belief = evidence.counts.iter().map(|c| c / denom).collect();
        Self::new(belief, w / denom, base_rate)
    }

    pub fn belief(&self) -> &[f64] {
        &self.belief
    }

    pub fn uncertainty(&self) -> f64 {
        self.uncertainty
    }

    pub fn base_rate(&self) -> &[f64] {
        &self.base_rate
    }

    pub fn domain_size(&self) -> usize {
        self.belief.len()
    }

    pub fn is_vacuous(&self) -> bool {
        self.uncertainty >= 1.0 - MASS_TOL
    }

    pub fn is_dogmatic(&self) -> bool {
        self.uncertainty <= MASS_TOL
    }

    /// Projected probability distribution `P(x) = b(x) + a(x) u`.
    pub fn projected(&self) -> Vec<f64> {
        self.belief
            .iter()
            .zip(&self.base_rate)
            .map(|(b, a)| b + a * self.uncertainty)
            .collect()
    }

    /// Cumulative (aleatory) belief fusion: pools the evidence underlying
    /// both opinions. Commutative and, on a common base rate, associative
    /// and additive in evidence space.
    ///
    /// Limit conventions for the cases the closed form excludes: two
    /// dogmatic opinions average their beliefs, two vacuous opinions
    /// average their base rates.
    pub fn fuse(&self, other: &Opinion) -> Result<Opinion> {
        if self.domain_size() != other.domain_size() {
            return Err(OpinionError::LengthMismatch {
                left: self.domain_size(),
                right: other.domain_size(),
            });
        }
        let (ua, ub) = (self.uncertainty, other.uncertainty);

        if self.is_dogmatic() && other.is_dogmatic() {
            let belief = self
                .belief
                .iter()
                .zip(&other.belief)
                .map(|(x, y)| 0.5 * (x + y))
                .collect();
            let base = average_base_rates(&self.base_rate, &other.base_rate);
            return Opinion::new(belief, 0.0, base);
        }
        if self.is_vacuous() && other.is_vacuous() {
            let base = average_base_rates(&self.base_rate, &other.base_rate);
            return Opinion::vacuous(base);
        }

        let denom = ua + ub - ua * ub;
        let belief: Vec<f64> = self
            .belief
            .iter()
            .zip(&other.belief)
            .map(|(ba, bb)| (ba * ub + bb * ua) / denom)
            .collect();
        let u = ua * ub / denom;

        // base-rate fusion weights each prior by the other side's uncertainty
        let base_denom = ua + ub - 2.0 * ua * ub;
        let base: Vec<f64> = if base_denom.abs() <= UNFUSE_DENOM_TOL {
            average_base_rates(&self.base_rate, &other.base_rate)
        } else {
            self.base_rate
                .iter()
                .zip(&other.base_rate)
                .map(|(aa, ab)| (aa * ub + ab * ua - (aa + ab) * ua * ub) / base_denom)
                .collect()
        };

        Opinion::new(belief, u, base)
    }

    /// Cumulative unfusion: removes `other`'s contribution from a fused
    /// opinion. Inverse of [`Opinion::fuse`] on a common base rate.
    ///
    /// Belief components no more negative than `-MASS_TOL` are clamped to
    /// zero (unfusion is subtractive and accumulates rounding error); a
    /// larger negative component means `self` never contained `other` and
    /// is reported as [`OpinionError::NegativeMass`].
    pub fn unfuse(&self, other: &Opinion) -> Result<Opinion> {
        if self.domain_size() != other.domain_size() {
            return Err(OpinionError::LengthMismatch {
                left: self.domain_size(),
                right: other.domain_size(),
            });
        }
        if let Some(index) = self
            .base_rate
            .iter()
            .zip(&other.base_rate)
            .position(|(x, y)| (x - y).abs() > MASS_TOL)
        {
            return Err(OpinionError::BaseRateMismatch { index });
        }
        let (uc, ub) = (self.uncertainty, other.uncertainty);
        let denom = ub - uc + ub * uc;
        if denom <= UNFUSE_DENOM_TOL {
            return Err(OpinionError::DegenerateUnfusion { denom });
        }
        let mut belief = Vec::with_capacity(self.domain_size());
        for (index, (bc, bb)) in self.belief.iter().zip(&other.belief).enumerate() {
            let value = (bc * ub - bb * uc) / denom;
            if value < -MASS_TOL {
                return Err(OpinionError::NegativeMass { index, value });
            }
            belief.push(value.max(0.0));
        }
        let u = (ub * uc / denom).clamp(0.0, 1.0);
        Opinion::new(belief, u, self.base_rate.clone())
    }

    /// Trust discounting: scales belief by `p_d` and moves the removed
    /// mass into uncertainty. Models information aging; `p_d = 1` is the
    /// identity.
    pub fn discount(&self, p_d: f64) -> Result<Opinion> {
        if !(0.0..=1.0).contains(&p_d) {
            return Err(OpinionError::Domain(format!(
                "discount probability must lie in [0, 1], got {p_d}"
            )));
        }
        let belief: Vec<f64> = self.belief.iter().map(|b| p_d * b).collect();
        let u = 1.0 - p_d * self.belief.iter().sum::<f64>();
        Opinion::new(belief, u, self.base_rate.clone())
    }

    /// Degree of conflict with `other`: the total-variation distance of
    /// the projected distributions, damped by the conjunctive certainty
    /// `(1 - u_A)(1 - u_B)`. Lies in `[0, 1]` and vanishes whenever either
    /// opinion is vacuous.
    pub fn conflict(&self, other: &Opinion) -> Result<f64> {
        if self.domain_size() != other.domain_size() {
            return Err(OpinionError::LengthMismatch {
                left: self.domain_size(),
                right: other.domain_size(),
            });
        }
        let pa = self.projected();
        let pb = other.projected();
        let projected_distance: f64 =
            pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).sum::<f64>() * 0.5;
        let conjunctive_certainty = (1.0 - self.uncertainty) * (1.0 - other.uncertainty);
        Ok((projected_distance * conjunctive_certainty).clamp(0.0, 1.0))
    }
}

fn average_base_rates(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn new_accepts_dogmatic_and_vacuous() {
        Opinion::new(vec![0.5, 0.5], 0.0, uniform(2)).unwrap();
        let v = Opinion::new(vec![0.0, 0.0], 1.0, uniform(2)).unwrap();
        assert!(v.is_vacuous());
    }

    #[test]
    fn new_rejects_sum_violation() {
        let err = Opinion::new(vec![0.6, 0.6], 0.1, uniform(2)).unwrap_err();
        assert!(matches!(err, OpinionError::SumViolation { .. }));
    }

    #[test]
    fn new_rejects_negative_mass() {
        let err = Opinion::new(vec![-0.2, 1.2], 0.0, uniform(2)).unwrap_err();
        assert!(matches!(err, OpinionError::NegativeMass { .. }));
    }

    #[test]
    fn new_rejects_length_mismatch() {
        let err = Opinion::new(vec![0.5, 0.5], 0.0, uniform(3)).unwrap_err();
        assert!(matches!(err, OpinionError::LengthMismatch { .. }));
        let err = Opinion::new(vec![1.0], 0.0, vec![1.0]).unwrap_err();
        assert!(matches!(err, OpinionError::LengthMismatch { .. }));
    }

    #[test]
    fn new_repairs_rounding_noise() {
        let op = Opinion::new(vec![0.5 + 4e-10, 0.5], -2e-10, uniform(2)).unwrap();
        let total = op.belief().iter().sum::<f64>() + op.uncertainty();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(op.uncertainty() >= 0.0);

        let op = Opinion::new(vec![0.3, 0.3], 0.4 + 8e-10, uniform(2)).unwrap();
        let total = op.belief().iter().sum::<f64>() + op.uncertainty();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vacuous_basics() {
        let v = Opinion::vacuous(vec![0.5, 0.5]).unwrap();
        assert_eq!(v.belief(), &[0.0, 0.0]);
        assert_eq!(v.uncertainty(), 1.0);

        let v9 = Opinion::vacuous_uniform(9).unwrap();
        assert_eq!(v9.uncertainty(), 1.0);
        assert!(v9.belief().iter().all(|b| *b == 0.0));

        let err = Opinion::vacuous(vec![0.3, 0.3]).unwrap_err();
        assert!(matches!(err, OpinionError::SumViolation { .. }));
    }

    #[test]
    fn dogmatic_basics() {
        let d = Opinion::dogmatic(vec![1.0, 0.0], uniform(2)).unwrap();
        assert_eq!(d.uncertainty(), 0.0);
        assert_eq!(d.belief(), &[1.0, 0.0]);

        let err = Opinion::dogmatic(vec![0.5, 0.6], uniform(2)).unwrap_err();
        assert!(matches!(err, OpinionError::SumViolation { .. }));

        let g = Opinion::dogmatic_uniform(9).unwrap();
        assert!(g.belief().iter().all(|b| (b - 1.0 / 9.0).abs() < 1e-15));
    }

    #[test]
    fn from_evidence_examples() {
        let uniform9 = uniform(9);

        let empty = EvidenceVector::new(vec![0.0; 9], 9.0).unwrap();
        let op = Opinion::from_evidence(&empty, uniform9.clone()).unwrap();
        assert_eq!(op.uncertainty(), 1.0);

        let one = EvidenceVector::unit(0, 9, 9.0).unwrap();
        let op = Opinion::from_evidence(&one, uniform9.clone()).unwrap();
        assert!((op.belief()[0] - 0.1).abs() < 1e-15);
        assert!((op.uncertainty() - 0.9).abs() < 1e-15);

        // 35 unit counts: uncertainty 9/44
        let mut counts = vec![0.0; 9];
        for i in 0..35 {
            counts[i % 9] += 1.0;
        }
        let ev = EvidenceVector::new(counts, 9.0).unwrap();
        let op = Opinion::from_evidence(&ev, uniform9).unwrap();
        assert!((op.uncertainty() - 0.204545454545455).abs() < 1e-12);
    }

    #[test]
    fn evidence_rejects_bad_input() {
        assert!(EvidenceVector::new(vec![1.0, -0.5], 9.0).is_err());
        assert!(EvidenceVector::new(vec![1.0, 0.5], 0.0).is_err());
        assert!(EvidenceVector::unit(9, 9, 9.0).is_err());
    }

    #[test]
    fn projected_examples() {
        let v = Opinion::vacuous(vec![0.5, 0.5]).unwrap();
        assert_eq!(v.projected(), vec![0.5, 0.5]);

        let d = Opinion::dogmatic(vec![0.2, 0.8], uniform(2)).unwrap();
        assert_eq!(d.projected(), vec![0.2, 0.8]);

        let op = Opinion::new(vec![0.3, 0.2], 0.5, vec![0.4, 0.6]).unwrap();
        let p = op.projected();
        assert!((p[0] - 0.5).abs() < 1e-15, "{p:?}");
        assert!((p[1] - 0.5).abs() < 1e-15);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fuse_vacuous_is_neutral() {
        let b = Opinion::new(vec![0.4, 0.1], 0.5, vec![0.5, 0.5]).unwrap();
        let v = Opinion::vacuous(vec![0.5, 0.5]).unwrap();
        let fused = v.fuse(&b).unwrap();
        assert!((fused.uncertainty() - b.uncertainty()).abs() < 1e-12);
        for (x, y) in fused.belief().iter().zip(b.belief()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn fuse_hand_example() {
        let a = Opinion::new(vec![0.3, 0.2], 0.5, vec![0.5, 0.5]).unwrap();
        let b = Opinion::new(vec![0.4, 0.1], 0.5, vec![0.5, 0.5]).unwrap();
        let fused = a.fuse(&b).unwrap();
        assert!((fused.belief()[0] - 7.0 / 15.0).abs() < 1e-12);
        assert!((fused.belief()[1] - 0.2).abs() < 1e-12);
        assert!((fused.uncertainty() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(fused.base_rate(), &[0.5, 0.5]);
    }

    #[test]
    fn fuse_two_single_evidence_opinions() {
        let uniform9 = uniform(9);
        let a = Opinion::from_evidence(&EvidenceVector::unit(0, 9, 9.0).unwrap(), uniform9.clone())
            .unwrap();
        let b =
            Opinion::from_evidence(&EvidenceVector::unit(3, 9, 9.0).unwrap(), uniform9).unwrap();
        let fused = a.fuse(&b).unwrap();
        assert!((fused.uncertainty() - 0.818181818181818).abs() < 1e-12);
    }

    #[test]
    fn fuse_limit_cases() {
        let d1 = Opinion::dogmatic(vec![1.0, 0.0], uniform(2)).unwrap();
        let d2 = Opinion::dogmatic(vec![0.0, 1.0], uniform(2)).unwrap();
        let fused = d1.fuse(&d2).unwrap();
        assert_eq!(fused.belief(), &[0.5, 0.5]);
        assert_eq!(fused.uncertainty(), 0.0);

        let v1 = Opinion::vacuous(vec![0.2, 0.8]).unwrap();
        let v2 = Opinion::vacuous(vec![0.6, 0.4]).unwrap();
        let fused = v1.fuse(&v2).unwrap();
        assert!(fused.is_vacuous());
        assert!((fused.base_rate()[0] - 0.4).abs() < 1e-12);
        assert!((fused.base_rate()[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn unfuse_vacuous_is_neutral() {
        let c = Opinion::new(vec![0.3, 0.2], 0.5, vec![0.5, 0.5]).unwrap();
        let v = Opinion::vacuous(vec![0.5, 0.5]).unwrap();
        let out = c.unfuse(&v).unwrap();
        for (x, y) in out.belief().iter().zip(c.belief()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((out.uncertainty() - c.uncertainty()).abs() < 1e-12);
    }

    #[test]
    fn unfuse_round_trip() {
        let a = Opinion::new(vec![0.3, 0.2], 0.5, vec![0.5, 0.5]).unwrap();
        let b = Opinion::new(vec![0.1, 0.6], 0.3, vec![0.5, 0.5]).unwrap();
        let fused = a.fuse(&b).unwrap();
        let back = fused.unfuse(&b).unwrap();
        for (x, y) in back.belief().iter().zip(a.belief()) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!((back.uncertainty() - a.uncertainty()).abs() < 1e-9);
    }

    #[test]
    fn unfuse_self_is_vacuous() {
        let b = Opinion::new(vec![0.4, 0.1], 0.5, vec![0.5, 0.5]).unwrap();
        let out = b.unfuse(&b).unwrap();
        assert!(out.is_vacuous());
        assert!(out.belief().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn unfuse_detects_foreign_opinion() {
        // C carries less evidence for outcome 0 than B claims to have added
        let c = Opinion::new(vec![0.0, 0.5], 0.5, vec![0.5, 0.5]).unwrap();
        let b = Opinion::new(vec![0.5, 0.0], 0.5, vec![0.5, 0.5]).unwrap();
        let err = c.unfuse(&b).unwrap_err();
        assert!(matches!(err, OpinionError::NegativeMass { .. }));
    }

    #[test]
    fn unfuse_degenerate_cases() {
        let d = Opinion::dogmatic(vec![0.5, 0.5], uniform(2)).unwrap();
        let err = d.unfuse(&d).unwrap_err();
        assert!(matches!(err, OpinionError::DegenerateUnfusion { .. }));

        let c = Opinion::new(vec![0.3, 0.2], 0.5, vec![0.5, 0.5]).unwrap();
        let b = Opinion::new(vec![0.3, 0.2], 0.5, vec![0.4, 0.6]).unwrap();
        let err = c.unfuse(&b).unwrap_err();
        assert!(matches!(err, OpinionError::BaseRateMismatch { .. }));
    }

    #[test]
    fn discount_examples() {
        let op = Opinion::new(vec![0.6, 0.3], 0.1, vec![0.5, 0.5]).unwrap();
        let same = op.discount(1.0).unwrap();
        assert_eq!(same, op);

        let half = op.discount(0.5).unwrap();
        assert!((half.belief()[0] - 0.3).abs() < 1e-15);
        assert!((half.belief()[1] - 0.15).abs() < 1e-15);
        assert!((half.uncertainty() - 0.55).abs() < 1e-15);
        assert_eq!(half.base_rate(), op.base_rate());

        assert!(op.discount(1.5).is_err());
        assert!(op.discount(-0.1).is_err());
    }

    #[test]
    fn discount_matches_published_value() {
        // opinion with u = 9/78 discounted by 0.99: u' = 1 - 0.99 * 69/78
        let mut counts = vec![0.0; 9];
        for i in 0..69 {
            counts[i % 9] += 1.0;
        }
        let op =
            Opinion::from_evidence(&EvidenceVector::new(counts, 9.0).unwrap(), uniform(9)).unwrap();
        assert!((op.uncertainty() - 9.0 / 78.0).abs() < 1e-12);
        let out = op.discount(0.99).unwrap();
        assert!((out.uncertainty() - 0.124230769230769).abs() < 1e-12);
    }

    #[test]
    fn conflict_examples() {
        let op = Opinion::new(vec![0.3, 0.2], 0.5, vec![0.5, 0.5]).unwrap();
        assert_eq!(op.conflict(&op).unwrap(), 0.0);

        let v = Opinion::vacuous(vec![0.5, 0.5]).unwrap();
        assert_eq!(v.conflict(&op).unwrap(), 0.0);

        let d1 = Opinion::dogmatic(vec![1.0, 0.0], uniform(2)).unwrap();
        let d2 = Opinion::dogmatic(vec![0.0, 1.0], uniform(2)).unwrap();
        assert_eq!(d1.conflict(&d2).unwrap(), 1.0);
    }

    #[test]
    fn evidence_additivity() {
        let uniform9 = uniform(9);
        let mut c1 = vec![0.0; 9];
        c1[2] = 3.0;
        c1[5] = 1.0;
        let mut c2 = vec![0.0; 9];
        c2[2] = 1.0;
        c2[8] = 4.0;
        let sum: Vec<f64> = c1.iter().zip(&c2).map(|(x, y)| x + y).collect();

        let o1 = Opinion::from_evidence(&EvidenceVector::new(c1, 9.0).unwrap(), uniform9.clone())
            .unwrap();
        let o2 = Opinion::from_evidence(&EvidenceVector::new(c2, 9.0).unwrap(), uniform9.clone())
            .unwrap();
        let direct =
            Opinion::from_evidence(&EvidenceVector::new(sum, 9.0).unwrap(), uniform9).unwrap();
        let fused = o1.fuse(&o2).unwrap();
        for (x, y) in fused.belief().iter().zip(direct.belief()) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!((fused.uncertainty() - direct.uncertainty()).abs() < 1e-9);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_opinion(n: usize) -> impl Strategy<Value = Opinion> {
            (
                proptest::collection::vec(0.01f64..1.0, n),
                0.01f64..1.0,
                proptest::collection::vec(0.01f64..1.0, n),
            )
                .prop_map(move |(raw_b, raw_u, raw_a)| {
                    let total: f64 = raw_b.iter().sum::<f64>() + raw_u;
                    let belief: Vec<f64> = raw_b.iter().map(|b| b / total).collect();
                    let a_total: f64 = raw_a.iter().sum();
                    let base: Vec<f64> = raw_a.iter().map(|a| a / a_total).collect();
                    Opinion::new(belief, raw_u / total, base).unwrap()
                })
        }

        fn arb_opinion_common_base(n: usize) -> impl Strategy<Value = (Opinion, Opinion)> {
            (arb_opinion(n), arb_opinion(n)).prop_map(|(a, b)| {
                let base = a.base_rate().to_vec();
                let b = Opinion::new(b.belief().to_vec(), b.uncertainty(), base).unwrap();
                (a, b)
            })
        }

        fn assert_valid(op: &Opinion) {
            let total = op.belief().iter().sum::<f64>() + op.uncertainty();
            assert!((total - 1.0).abs() < 1e-9, "mass sum {total}");
            assert!(op.belief().iter().all(|b| (0.0..=1.0).contains(b)));
            assert!((0.0..=1.0).contains(&op.uncertainty()));
            let a_sum: f64 = op.base_rate().iter().sum();
            assert!((a_sum - 1.0).abs() < 1e-9);
        }

        proptest! {
            #[test]
            fn fusion_is_commutative((a, b) in arb_opinion_common_base(4)) {
                let ab = a.fuse(&b).unwrap();
                let ba = b.fuse(&a).unwrap();
                assert_valid(&ab);
                for (x, y) in ab.belief().iter().zip(ba.belief()) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
                prop_assert!((ab.uncertainty() - ba.uncertainty()).abs() < 1e-9);
            }

            #[test]
            fn fusion_is_associative(
                (a, b) in arb_opinion_common_base(3),
                c in arb_opinion(3),
            ) {
                let c = Opinion::new(
                    c.belief().to_vec(), c.uncertainty(), a.base_rate().to_vec(),
                ).unwrap();
                let left = a.fuse(&b).unwrap().fuse(&c).unwrap();
                let right = a.fuse(&b.fuse(&c).unwrap()).unwrap();
                for (x, y) in left.belief().iter().zip(right.belief()) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
                prop_assert!((left.uncertainty() - right.uncertainty()).abs() < 1e-9);
            }

            #[test]
            fn unfuse_inverts_fuse((a, b) in arb_opinion_common_base(4)) {
                let fused = a.fuse(&b).unwrap();
                let back = fused.unfuse(&b).unwrap();
                assert_valid(&back);
                for (x, y) in back.belief().iter().zip(a.belief()) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
                prop_assert!((back.uncertainty() - a.uncertainty()).abs() < 1e-9);
            }

            #[test]
            fn discount_never_decreases_uncertainty(a in arb_opinion(5), p in 0.0f64..=1.0) {
                let out = a.discount(p).unwrap();
                assert_valid(&out);
                prop_assert!(out.uncertainty() >= a.uncertainty() - 1e-12);
                prop_assert_eq!(out.base_rate(), a.base_rate());
            }

            #[test]
            fn conflict_is_symmetric_and_bounded((a, b) in arb_opinion_common_base(4)) {
                let ab = a.conflict(&b).unwrap();
                let ba = b.conflict(&a).unwrap();
                prop_assert!((ab - ba).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&ab));
            }

            #[test]
            fn conflict_with_a_vacuous_opinion_is_zero(a in arb_opinion(5)) {
                let vacuous = Opinion::vacuous(a.base_rate().to_vec()).unwrap();
                prop_assert_eq!(a.conflict(&vacuous).unwrap(), 0.0);
                prop_assert_eq!(vacuous.conflict(&a).unwrap(), 0.0);
            }

            #[test]
            fn projection_sums_to_one(a in arb_opinion(6)) {
                let p = a.projected();
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }

            #[test]
            fn projection_of_evidence_is_dirichlet_mean(
                counts in proptest::collection::vec(0.0f64..20.0, 9),
            ) {
                let base = vec![1.0 / 9.0; 9];
                let w = 9.0;
                let ev = EvidenceVector::new(counts.clone(), w).unwrap();
                let op = Opinion::from_evidence(&ev, base.clone()).unwrap();
                let total: f64 = counts.iter().sum();
                let p = op.projected();
                for (i, pi) in p.iter().enumerate() {
                    let mean = (counts[i] + w * base[i]) / (w + total);
                    prop_assert!((pi - mean).abs() < 1e-9);
                }
            }
        }
    }
}
