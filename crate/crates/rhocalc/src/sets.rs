//! Set nets in the generalized complex plane: internal sets `[A_ε]` and
//! strongly internal sets `⟨A_ε⟩`, decided through signed-distance nets.
//!
//! For a region net A = (A_ε) and a point x = [x_ε], membership questions
//! reduce to the signed distance `sd(x)_ε` = distance of `x_ε` to the
//! complement of `A_ε` (positive inside, negative outside):
//!
//! * `x ∈ [A_ε]` (internal): some representative lies in `A_ε` eventually,
//!   i.e. the outside excess `max(0, −sd)` is negligible;
//! * `x ∈ ⟨A_ε⟩` (strongly internal): `sd(x) ≥ ρ^m` eventually for some `m`,
//!   i.e. `0 < sd(x)` strictly in the generalized order.
//!
//! Signed distances of primitive regions are built from [`GenNumber`]
//! arithmetic, so they stay symbolic when the inputs are; unions and
//! intersections take pointwise min/max and degrade to sampled form.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::scalars::{GenNumber, Verdict, VerdictValue};
use crate::wide::{SignedLog, WideComplex};

/// A net of regions of the complex plane, one per ε.
#[derive(Clone, Debug)]
pub enum RegionNet {
    /// The whole plane (signed distance +∞, represented as ρ^{-1}).
    FullPlane,
    /// `|z − center_ε| ≤ radius_ε`.
    Disk { center: GenNumber, radius: GenNumber },
    /// `Re(conj(normal_ε)·z) ≤ offset_ε`; `normal` must be invertible.
    HalfPlane { normal: GenNumber, offset: GenNumber },
    Union(Box<RegionNet>, Box<RegionNet>),
    Inter(Box<RegionNet>, Box<RegionNet>),
    Complement(Box<RegionNet>),
}

impl RegionNet {
    pub fn disk(center: GenNumber, radius: GenNumber) -> RegionNet {
        RegionNet::Disk { center, radius }
    }

    pub fn half_plane(normal: GenNumber, offset: GenNumber) -> RegionNet {
        RegionNet::HalfPlane { normal, offset }
    }

    /// Axis-aligned rectangle as an intersection of four half-planes.
    pub fn rect(
        gauge: Arc<Gauge>,
        re_lo: GenNumber,
        re_hi: GenNumber,
        im_lo: GenNumber,
        im_hi: GenNumber,
    ) -> Result<RegionNet> {
        let one = GenNumber::one(gauge.clone());
        let i = GenNumber::parse("i", gauge)?;
        let right = RegionNet::half_plane(one.clone(), re_hi);
        let left = RegionNet::half_plane(one.neg(), re_lo.neg());
        let top = RegionNet::half_plane(i.clone(), im_hi);
        let bottom = RegionNet::half_plane(i.neg(), im_lo.neg());
        Ok(RegionNet::Inter(
            Box::new(RegionNet::Inter(Box::new(right), Box::new(left))),
            Box::new(RegionNet::Inter(Box::new(top), Box::new(bottom))),
        ))
    }

    pub fn union(a: RegionNet, b: RegionNet) -> RegionNet {
        RegionNet::Union(Box::new(a), Box::new(b))
    }

    pub fn inter(a: RegionNet, b: RegionNet) -> RegionNet {
        RegionNet::Inter(Box::new(a), Box::new(b))
    }

    pub fn complement(a: RegionNet) -> RegionNet {
        RegionNet::Complement(Box::new(a))
    }

    /// Signed distance of `x` to the region's complement: positive inside,
    /// negative outside. For unions the inside margin is a certified lower
    /// bound (exact outside); for intersections it is exact.
    pub fn signed_dist(&self, x: &GenNumber) -> Result<GenNumber> {
        match self {
            RegionNet::FullPlane => {
                GenNumber::drho(x.gauge().clone()).invert()
            }
            RegionNet::Disk { center, radius } => {
                let d = x.sub(center)?.abs();
                radius.sub(&d)
            }
            RegionNet::HalfPlane { normal, offset } => {
                let inv = normal.is_invertible();
                if !inv.is_true() {
                    return Err(Error::invalid(format!(
                        "half-plane normal must be invertible: {inv}"
                    )));
                }
                // (offset − Re(conj(n)·x)) / |n|
                let proj = normal.conj().mul(x)?.re();
                offset.sub(&proj)?.div(&normal.abs())
            }
            RegionNet::Union(a, b) => {
                let sa = a.signed_dist(x)?;
                let sb = b.signed_dist(x)?;
                pointwise_extremum(&sa, &sb, true)
            }
            RegionNet::Inter(a, b) => {
                let sa = a.signed_dist(x)?;
                let sb = b.signed_dist(x)?;
                pointwise_extremum(&sa, &sb, false)
            }
            RegionNet::Complement(a) => Ok(a.signed_dist(x)?.neg()),
        }
    }

    /// Membership in the internal set `[A_ε]`: the outside excess must be
    /// negligible.
    pub fn member_internal(&self, x: &GenNumber) -> Result<Verdict> {
        let sd = self.signed_dist(x)?;
        let nn = sd.nonneg_at(crate::scalars::DEFAULT_ORDER)?;
        if nn.is_true() {
            return Ok(Verdict {
                detail: format!("signed distance nonnegative: {}", nn.detail),
                ..nn
            });
        }
        // Outside by a possibly negligible excess: clip the negative part.
        let excess = clip_negative(&sd)?;
        let z = excess.is_zero_at(crate::scalars::DEFAULT_ORDER)?;
        Ok(match z.value {
            VerdictValue::True => Verdict {
                detail: format!("outside excess negligible: {}", z.detail),
                ..z
            },
            _ => Verdict {
                detail: format!("outside excess: {}", z.detail),
                ..z
            },
        })
    }

    /// Membership in the strongly internal set `⟨A_ε⟩`: the inside margin
    /// must dominate some power of the gauge.
    pub fn member_strongly(&self, x: &GenNumber) -> Result<Verdict> {
        let sd = self.signed_dist(x)?;
        let zero = GenNumber::zero(x.gauge().clone());
        let v = zero.lt(&sd)?;
        Ok(Verdict {
            detail: format!("inside margin: {}", v.detail),
            ..v
        })
    }

    /// Whether the closed sharp ball lies inside `⟨A_ε⟩`: by the 1-Lipschitz
    /// property of all signed distances here, it does whenever
    /// `radius < sd(center)` strictly.
    pub fn ball_inside_strongly(&self, ball: &SharpBall) -> Result<Verdict> {
        let sd = self.signed_dist(&ball.center)?;
        let v = ball.radius.lt(&sd)?;
        Ok(Verdict {
            detail: format!("radius vs. center margin: {}", v.detail),
            ..v
        })
    }
}

/// Sharp ball `{x : |x − center| ≤ radius}` in the generalized plane.
#[derive(Clone, Debug)]
pub struct SharpBall {
    pub center: GenNumber,
    pub radius: GenNumber,
}

impl SharpBall {
    pub fn new(center: GenNumber, radius: GenNumber) -> SharpBall {
        SharpBall { center, radius }
    }

    pub fn member(&self, x: &GenNumber) -> Result<Verdict> {
        let d = x.sub(&self.center)?.abs();
        d.leq(&self.radius)
    }

    pub fn member_strict(&self, x: &GenNumber) -> Result<Verdict> {
        let d = x.sub(&self.center)?.abs();
        d.lt(&self.radius)
    }
}

fn real_signed(v: &WideComplex) -> SignedLog {
    if v.is_zero() {
        return SignedLog::ZERO;
    }
    let ph = v.phase();
    let sign = if ph.cos() >= 0.0 { 1 } else { -1 };
    SignedLog::from_log(sign, v.lm())
}

fn signed_to_wide(s: SignedLog) -> WideComplex {
    match s.sign {
        0 => WideComplex::ZERO,
        1 => WideComplex::from_log(s.lm, 0.0),
        _ => WideComplex::from_log(s.lm, std::f64::consts::PI),
    }
}

/// Pointwise max (or min) of two real generalized numbers.
fn pointwise_extremum(a: &GenNumber, b: &GenNumber, want_max: bool) -> Result<GenNumber> {
    let va = a.values()?;
    let vb = b.values()?;
    let out: Vec<WideComplex> = va
        .iter()
        .zip(vb.iter())
        .map(|(x, y)| {
            let sx = real_signed(x);
            let sy = real_signed(y);
            let pick = if want_max {
                sx.max_val(sy)
            } else {
                sx.min_val(sy)
            };
            signed_to_wide(pick)
        })
        .collect();
    GenNumber::from_samples(out, a.gauge().clone())
}

/// `max(0, −x)` pointwise: the magnitude by which `x` dips negative.
fn clip_negative(x: &GenNumber) -> Result<GenNumber> {
    let vals = x.values()?;
    let out: Vec<WideComplex> = vals
        .iter()
        .map(|v| {
            let s = real_signed(v);
            if s.sign < 0 {
                WideComplex::from_log(s.lm, 0.0)
            } else {
                WideComplex::ZERO
            }
        })
        .collect();
    GenNumber::from_samples(out, x.gauge().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::Gauge;

    fn g() -> Arc<Gauge> {
        Gauge::standard()
    }

    fn num(src: &str) -> GenNumber {
        GenNumber::parse(src, g()).unwrap()
    }

    fn unit_disk() -> RegionNet {
        RegionNet::disk(GenNumber::zero(g()), GenNumber::one(g()))
    }

    #[test]
    fn interior_point_is_strongly_internal() {
        let d = unit_disk();
        let x = num("(1/2) + eps*i");
        assert!(d.member_internal(&x).unwrap().is_true());
        let v = d.member_strongly(&x).unwrap();
        assert!(v.is_true(), "{v}");
    }

    #[test]
    fn infinitesimal_margin_counts_as_strong() {
        // Distance to the boundary is ρ², far below any standard margin but
        // still a gauge power.
        let d = unit_disk();
        let x = num("1 - rho^2");
        let v = d.member_strongly(&x).unwrap();
        assert!(v.is_true(), "{v}");
    }

    #[test]
    fn boundary_point_internal_but_not_strong() {
        let d = unit_disk();
        let x = num("1");
        assert!(d.member_internal(&x).unwrap().is_true());
        let v = d.member_strongly(&x).unwrap();
        assert!(!v.is_true(), "{v}");
    }

    #[test]
    fn negligibly_outside_is_still_internal() {
        let d = unit_disk();
        let x = num("1 + exp(log(rho)/eps)");
        let v = d.member_internal(&x).unwrap();
        assert!(v.is_true(), "{v}");
        assert!(!d.member_strongly(&x).unwrap().is_true());
    }

    #[test]
    fn clearly_outside_fails_both() {
        let d = unit_disk();
        let x = num("2");
        assert!(d.member_internal(&x).unwrap().is_false());
        assert!(d.member_strongly(&x).unwrap().is_false());
    }

    #[test]
    fn half_plane_and_rect() {
        let hp = RegionNet::half_plane(GenNumber::one(g()), GenNumber::zero(g()));
        let x = num("-1 + i*rho");
        assert!(hp.member_strongly(&x).unwrap().is_true());
        assert!(hp.member_internal(&num("0")).unwrap().is_true());
        assert!(hp.member_strongly(&num("0")).unwrap().is_false());

        let r = RegionNet::rect(
            g(),
            num("-1"),
            num("1"),
            num("-1"),
            num("1"),
        )
        .unwrap();
        assert!(r.member_strongly(&num("(1/2) + (1/2)*i")).unwrap().is_true());
        assert!(r.member_internal(&num("2 + 2*i")).unwrap().is_false());
    }

    #[test]
    fn union_and_complement() {
        let left = RegionNet::disk(num("-2"), GenNumber::one(g()));
        let right = RegionNet::disk(num("2"), GenNumber::one(g()));
        let u = RegionNet::union(left, right);
        assert!(u.member_strongly(&num("2 + rho*i")).unwrap().is_true());
        assert!(u.member_internal(&num("0")).unwrap().is_false());
        let c = RegionNet::complement(u);
        assert!(c.member_strongly(&num("0")).unwrap().is_true());
    }

    #[test]
    fn ball_containment_with_sharp_radius() {
        let d = unit_disk();
        let ball = SharpBall::new(num("(1/2)"), num("rho"));
        let v = d.ball_inside_strongly(&ball).unwrap();
        assert!(v.is_true(), "{v}");

        // A ball poking negligibly over the boundary is rejected.
        let bad = SharpBall::new(num("1"), num("rho"));
        assert!(!d.ball_inside_strongly(&bad).unwrap().is_true());
    }

    #[test]
    fn sharp_ball_membership() {
        let ball = SharpBall::new(num("1"), num("rho^2"));
        assert!(ball.member(&num("1 + rho^3")).unwrap().is_true());
        assert!(ball.member(&num("1 + rho")).unwrap().is_false());
        assert!(ball.member_strict(&num("1 + rho^3")).unwrap().is_true());
    }
}
