//! Forbidden-region geometry for the complementary sensitivity function.
//!
//! A delay band `[0, tau]` forbids the value `T(i omega)` from landing on a
//! frequency-dependent half-line ("cut") in the complex plane; gain and phase
//! margin requirements forbid further sets. Everything here is closed-form
//! Euclidean distance to those sets, plus membership tests for the combined
//! gain/phase/delay region expressed in the Nyquist (loop-gain) domain.

use crate::error::{Error, Result};
use crate::C64;
use std::f64::consts::PI;

/// Half-line forbidden to `T(i omega)` by a phase rotation of `phi` radians.
///
/// Empty for `phi = 0`; the vertical ray `1/2 + (i/2)(-inf, -cot(phi/2)]` for
/// `0 < phi < 2 pi`; its mirror image for negative `phi`; the full vertical
/// line `Re = 1/2` once `|phi| >= 2 pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub phi: f64,
}

/// Distance from `z` to the cut with parameter `phi`. `+inf` when the cut is
/// empty (`phi = 0`).
pub fn dist_to_cut(phi: f64, z: C64) -> f64 {
    if phi == 0.0 {
        return f64::INFINITY;
    }
    if phi < 0.0 {
        return dist_to_cut(-phi, z.conj());
    }
    let dx = z.re - 0.5;
    if phi >= 2.0 * PI {
        return dx.abs();
    }
    // endpoint of the ray sits at 1/2 - (i/2) cot(phi/2)
    let cot_half = cot(phi / 2.0);
    let eta0 = z.im + 0.5 * cot_half;
    if eta0 <= 0.0 {
        dx.abs()
    } else {
        (dx * dx + eta0 * eta0).sqrt()
    }
}

/// Distance from `z` to the real segment `(-inf, -1/(k-1)]` forbidden by a
/// gain margin requirement `k`.
pub fn dist_to_gain_set(k: f64, z: C64) -> Result<f64> {
    if k <= 1.0 {
        return Err(Error::InvalidGain(k));
    }
    let end = -1.0 / (k - 1.0);
    if z.re <= end {
        Ok(z.im.abs())
    } else {
        Ok((z - C64::new(end, 0.0)).norm())
    }
}

/// Distance from `z` to the symmetric pair of cuts forbidden by a phase
/// margin requirement `phase_phi >= 0`.
pub fn dist_to_phase_set(phase_phi: f64, z: C64) -> f64 {
    dist_to_cut(phase_phi, z).min(dist_to_cut(-phase_phi, z))
}

/// Forbidden region for `T(i omega)` under simultaneous gain (`>= 1/gain_k`
/// and `<= 1` loop-gain scaling), phase (`+- phase_phi`), and delay
/// (`[0, delay_tau]`) disturbances, instantiated at frequency `omega`.
///
/// In the Nyquist domain the disturbance product reaches every loop gain
/// `-rho e^{i psi}` with `rho` in `[1/k, 1]` and `psi` in
/// `[-phase_phi, phase_phi + |omega| delay_tau]` (for `omega >= 0`;
/// conjugated for negative frequencies). The image under
/// `w -> w/(1+w)` is bounded by at most five circular arcs / segments.
#[derive(Debug, Clone, Copy)]
pub struct SimultaneousRegion {
    pub gain_k: f64,
    pub phase_phi: f64,
    pub delay_tau: f64,
    pub omega: f64,
}

impl SimultaneousRegion {
    pub fn new(gain_k: f64, phase_phi: f64, delay_tau: f64, omega: f64) -> Result<Self> {
        if gain_k < 1.0 || !gain_k.is_finite() {
            return Err(Error::InvalidGain(gain_k));
        }
        if !(0.0..2.0 * PI).contains(&phase_phi) {
            return Err(Error::InvalidParameter(format!(
                "phase margin {phase_phi} outside [0, 2 pi)"
            )));
        }
        if delay_tau < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delay margin {delay_tau} negative"
            )));
        }
        if gain_k == 1.0 && phase_phi == 0.0 && delay_tau == 0.0 {
            return Err(Error::DegenerateRegion);
        }
        Ok(SimultaneousRegion {
            gain_k,
            phase_phi,
            delay_tau,
            omega,
        })
    }

    /// Reachable phase interval `[psi_min, psi_max]` at `|omega|`.
    pub fn psi_range(&self) -> (f64, f64) {
        (
            -self.phase_phi,
            self.phase_phi + self.omega.abs() * self.delay_tau,
        )
    }
}

/// Membership of a Nyquist-domain (loop-gain) point in the disturbance image:
/// `w = -rho e^{i psi}` with `rho` in `[1/k, 1]` and reachable `psi`.
pub fn point_in_region_nyquist(region: &SimultaneousRegion, w: C64) -> bool {
    let w = if region.omega < 0.0 { w.conj() } else { w };
    let rho = w.norm();
    if !(1.0 / region.gain_k..=1.0).contains(&rho) {
        return false;
    }
    let (psi_min, psi_max) = region.psi_range();
    if psi_max - psi_min >= 2.0 * PI {
        return true;
    }
    let psi = (-w).arg();
    [psi, psi + 2.0 * PI, psi - 2.0 * PI]
        .iter()
        .any(|p| (psi_min..=psi_max).contains(p))
}

/// Distance from a `T`-domain point `z` to the simultaneous forbidden region.
/// Zero inside the region; `+inf` when the region has no finite image (pure
/// critical point `-1` with no gain slack).
pub fn dist_to_simultaneous(region: &SimultaneousRegion, z: C64) -> f64 {
    let z = if region.omega < 0.0 { z.conj() } else { z };
    let k = region.gain_k;
    let (psi_min, psi_max) = region.psi_range();
    let width = psi_max - psi_min;

    if k == 1.0 && width == 0.0 {
        // only the loop gain -1 itself, whose T-image is the point at infinity
        return f64::INFINITY;
    }
    // membership via the loop-gain map w = z/(1-z); z = 1 maps to infinity
    if (z - C64::new(1.0, 0.0)).norm() > 0.0 {
        let w = z / (C64::new(1.0, 0.0) - z);
        if point_in_region_nyquist(&positive_omega(region), w) {
            return 0.0;
        }
    }

    let mut d = f64::INFINITY;
    if width >= 2.0 * PI {
        // full annulus: outer boundary maps to the line Re = 1/2
        d = d.min((z.re - 0.5).abs());
        if k > 1.0 {
            d = d.min(dist_to_inner(region, z, true));
        }
        return d;
    }
    if psi_max > 0.0 {
        d = d.min(dist_to_cut(psi_max, z));
    }
    if psi_min < 0.0 {
        d = d.min(dist_to_cut(psi_min, z));
    }
    if k == 1.0 {
        return d;
    }
    d = d.min(dist_to_inner(region, z, false));
    d = d.min(dist_to_connector(region, psi_min, z));
    d = d.min(dist_to_connector(region, psi_max, z));
    d
}

fn positive_omega(region: &SimultaneousRegion) -> SimultaneousRegion {
    SimultaneousRegion {
        omega: region.omega.abs(),
        ..*region
    }
}

/// T-image of the loop gain `-rho e^{i psi}`.
pub fn image_point(rho: f64, psi: f64) -> C64 {
    let w = -rho * C64::new(0.0, psi).exp();
    w / (C64::new(1.0, 0.0) + w)
}

/// Distance to the image of the reduced-gain circle `rho = 1/k`: an arc of
/// the circle centered at `-1/(k^2-1)` with radius `k/(k^2-1)`.
fn dist_to_inner(region: &SimultaneousRegion, z: C64, full_circle: bool) -> f64 {
    let k = region.gain_k;
    let (psi_min, psi_max) = region.psi_range();
    let c = C64::new(-1.0 / (k * k - 1.0), 0.0);
    let r = k / (k * k - 1.0);
    let endpoints = [
        image_point(1.0 / k, psi_min),
        image_point(1.0 / k, psi_max),
    ];
    dist_to_arc(z, c, r, full_circle, &endpoints, |w| {
        let psi = (-w).arg();
        [psi, psi + 2.0 * PI, psi - 2.0 * PI]
            .iter()
            .any(|p| (psi_min..=psi_max).contains(p))
    })
}

/// Distance to the connector piece at a fixed reachable-phase boundary
/// `psi_b`: the image of the radial segment `rho` in `[1/k, 1]`.
fn dist_to_connector(region: &SimultaneousRegion, psi_b: f64, z: C64) -> f64 {
    let k = region.gain_k;
    let s = psi_b.sin();
    if s.abs() < 1e-9 {
        // radial segment maps onto the real axis
        let wrapped = wrap_angle(psi_b);
        if wrapped.cos() > 0.0 {
            // psi_b ~ 0 mod 2 pi: half-line (-inf, -1/(k-1)]
            let end = -1.0 / (k - 1.0);
            return if z.re <= end {
                z.im.abs()
            } else {
                (z - C64::new(end, 0.0)).norm()
            };
        }
        // psi_b ~ pi: segment [1/(k+1), 1/2]
        let x = z.re.clamp(1.0 / (k + 1.0), 0.5);
        return (z - C64::new(x, 0.0)).norm();
    }
    let c = C64::new(0.5, -0.5 * cot(psi_b));
    let r = 1.0 / (2.0 * s.abs());
    let endpoints = [image_point(1.0 / k, psi_b), image_point(1.0, psi_b)];
    dist_to_arc(z, c, r, false, &endpoints, |w| {
        let rho = w.norm();
        if !(1.0 / k - 1e-12..=1.0 + 1e-12).contains(&rho) {
            return false;
        }
        // the circle carries both rays psi_b and psi_b + pi; keep our ray
        wrap_angle((-w).arg() - psi_b).abs() < 0.5 * PI
    })
}

/// Distance from `z` to an arc of the circle `|x - c| = r`. The arc is
/// recognized by mapping the radial projection of `z` back to the Nyquist
/// domain and testing `on_arc`; off-arc projections fall back to the
/// endpoint distances.
fn dist_to_arc(
    z: C64,
    c: C64,
    r: f64,
    full_circle: bool,
    endpoints: &[C64; 2],
    on_arc: impl Fn(C64) -> bool,
) -> f64 {
    let v = z - c;
    let vn = v.norm();
    if vn > 0.0 {
        let proj = c + v * (r / vn);
        if full_circle {
            return (vn - r).abs();
        }
        if (proj - C64::new(1.0, 0.0)).norm() > 1e-12 {
            let w = proj / (C64::new(1.0, 0.0) - proj);
            if on_arc(w) {
                return (vn - r).abs();
            }
        }
    } else if full_circle {
        return r;
    }
    endpoints
        .iter()
        .map(|e| (z - e).norm())
        .fold(f64::INFINITY, f64::min)
}

fn cot(x: f64) -> f64 {
    let t = x.tan();
    if t == 0.0 {
        f64::INFINITY * x.signum()
    } else {
        1.0 / t
    }
}

fn wrap_angle(x: f64) -> f64 {
    let mut a = x % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cut_distance_cases() {
        assert_relative_eq!(dist_to_cut(PI, c(0.0, 0.0)), 0.5);
        assert_relative_eq!(
            dist_to_cut(PI / 2.0, c(0.0, 0.0)),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
        assert_eq!(dist_to_cut(0.0, c(3.0, -7.0)), f64::INFINITY);
        assert_relative_eq!(dist_to_cut(3.0 * PI, c(0.2, 5.0)), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn cut_conjugate_symmetry() {
        for &(phi, re, im) in &[(0.7, 0.1, -2.0), (4.0, -1.0, 0.5), (6.9, 2.0, 2.0)] {
            let z = c(re, im);
            assert_relative_eq!(
                dist_to_cut(-phi, z.conj()),
                dist_to_cut(phi, z),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn gain_set_distance() {
        assert_relative_eq!(dist_to_gain_set(2.0, c(0.0, 0.0)).unwrap(), 1.0);
        assert_relative_eq!(dist_to_gain_set(2.0, c(-3.0, 0.0)).unwrap(), 0.0);
        assert_relative_eq!(dist_to_gain_set(3.0, c(-0.5, 1.0)).unwrap(), 1.0);
        assert!(matches!(
            dist_to_gain_set(1.0, c(0.0, 0.0)),
            Err(Error::InvalidGain(_))
        ));
    }

    #[test]
    fn phase_set_distance() {
        assert_relative_eq!(
            dist_to_phase_set(PI / 2.0, c(0.0, 0.0)),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
        assert_eq!(dist_to_phase_set(0.0, c(7.0, -2.0)), f64::INFINITY);
        assert_relative_eq!(dist_to_phase_set(2.0 * PI, c(0.0, 0.0)), 0.5);
    }

    #[test]
    fn degenerate_region_rejected() {
        assert!(matches!(
            SimultaneousRegion::new(1.0, 0.0, 0.0, 1.0),
            Err(Error::DegenerateRegion)
        ));
    }

    #[test]
    fn nyquist_membership() {
        let region = SimultaneousRegion::new(1.5, PI / 12.0, 1.0, 1.0).unwrap();
        assert!(point_in_region_nyquist(&region, c(-1.0, 0.0)));
        let region2 = SimultaneousRegion::new(2.0, PI / 12.0, 1.0, 1.0).unwrap();
        assert!(!point_in_region_nyquist(&region2, c(0.25, 0.0)));
        // explicit witness: kappa = 1.2, theta = phase_phi, half the delay
        let psi = PI / 12.0 + 0.5;
        let w = -C64::new(0.0, psi).exp() / 1.2;
        assert!(point_in_region_nyquist(&region, w));
    }

    #[test]
    fn reduces_to_cut_when_gain_and_phase_trivial() {
        let region = SimultaneousRegion::new(1.0, 0.0, 0.8, 1.3).unwrap();
        for &(re, im) in &[(0.0, 0.0), (1.2, -0.7), (-0.4, 2.0), (0.5, -9.0)] {
            let z = c(re, im);
            assert_relative_eq!(
                dist_to_simultaneous(&region, z),
                dist_to_cut(1.3 * 0.8, z),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn boundary_points_have_zero_distance() {
        let region = SimultaneousRegion::new(1.5, PI / 12.0, 0.0, 1.0).unwrap();
        let (psi_min, psi_max) = region.psi_range();
        for i in 0..20 {
            let psi = psi_min + (psi_max - psi_min) * i as f64 / 19.0;
            for rho in [1.0 / region.gain_k, 1.0] {
                if psi == 0.0 && rho == 1.0 {
                    continue; // maps to infinity
                }
                let z = image_point(rho, psi);
                assert!(
                    dist_to_simultaneous(&region, z) < 1e-9,
                    "psi={psi} rho={rho}"
                );
            }
        }
    }

    #[test]
    fn gain_only_region_is_gain_segment() {
        // zero reachable-phase width leaves only the real segment of loop
        // gains [-1, -1/k], whose image is the gain forbidden set
        let region = SimultaneousRegion::new(2.0, 0.0, 0.0, 1.0).unwrap();
        for &(re, im) in &[(0.0, 0.0), (-3.0, 1.0), (0.5, -0.5), (-1.0, 0.0)] {
            let z = c(re, im);
            assert_relative_eq!(
                dist_to_simultaneous(&region, z),
                dist_to_gain_set(2.0, z).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn negative_omega_conjugates() {
        let a = SimultaneousRegion::new(1.5, 0.3, 0.7, 2.0).unwrap();
        let b = SimultaneousRegion::new(1.5, 0.3, 0.7, -2.0).unwrap();
        let z = c(0.3, -1.1);
        assert_relative_eq!(
            dist_to_simultaneous(&a, z),
            dist_to_simultaneous(&b, z.conj()),
            epsilon = 1e-14
        );
    }
}
